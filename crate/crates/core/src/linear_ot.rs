//! Exact linear OT by the transportation simplex, the cyclical-monotonicity
//! verifier and the permutation (Monge) brute force.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::polytope::{as_permutation, extreme_decomposition, northwest_basis};
use crate::types::{
    check_finite, check_shape, inner, Coupling, Histogram, Permutation, DEFAULT_SUPPORT_TOL,
};

/// Largest support the monotonicity verifier will enumerate.
pub const MONOTONICITY_SUPPORT_CAP: usize = 64;

/// Largest `n` for the exhaustive permutation search.
pub const MONGE_CAP: usize = 9;

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub plan: Coupling,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `⟨C, P⟩` over `Π(a, b)`.
///
/// Transportation simplex started from the northwest corner. Entering cell is
/// the most negative reduced cost (row-major on ties); leaving cell is the
/// smallest mass among the decreasing cells of the pivot cycle (row-major on
/// ties). After `10·(n+m)` consecutive degenerate pivots the entering rule
/// switches to Bland's rule for the rest of the run.
pub fn solve_linear_ot(c: &DMatrix<f64>, a: &Histogram, b: &Histogram) -> Result<LinearSolution> {
    let (n, m) = (a.len(), b.len());
    check_shape(c, n, m)?;
    check_finite(c)?;

    let (mut x, mut basis) = northwest_basis(a, b);
    let mut in_basis = vec![false; n * m];
    for &(i, j) in &basis {
        in_basis[i * m + j] = true;
    }
    let scale = c.amax().max(1.0);
    let eps = 1e-11 * scale;
    let degenerate_limit = 10 * (n + m);
    let max_iter = 100 * n * m * (n + m) + 1000;
    let mut degenerate_run = 0;
    let mut bland = false;
    let mut iterations = 0;

    loop {
        let adj = basis_adjacency(n, m, &basis);
        let (u, v) = potentials(n, m, c, &adj);

        let mut entering: Option<(usize, usize, f64)> = None;
        'scan: for i in 0..n {
            for j in 0..m {
                if in_basis[i * m + j] {
                    continue;
                }
                let d = c[(i, j)] - u[i] - v[j];
                if d < -eps {
                    if bland {
                        entering = Some((i, j, d));
                        break 'scan;
                    }
                    if entering.is_none_or(|(_, _, best)| d < best) {
                        entering = Some((i, j, d));
                    }
                }
            }
        }
        let Some((ei, ej, _)) = entering else {
            break;
        };
        if iterations == max_iter {
            return Err(Error::NotConverged(iterations));
        }
        iterations += 1;

        // Tree path from column ej back to row ei; its cells alternate -, +, …, -.
        let path = tree_path(&adj, n + ej, ei);
        let cells: Vec<(usize, usize)> = path
            .windows(2)
            .map(|w| {
                let (p, q) = (w[0].min(w[1]), w[0].max(w[1]));
                (p, q - n)
            })
            .collect();
        let mut leave: Option<(usize, f64)> = None;
        for (t, &(i, j)) in cells.iter().enumerate() {
            if t % 2 == 0 {
                let val = x[(i, j)];
                let better = match leave {
                    None => true,
                    Some((lt, lv)) => val < lv || (val == lv && (i, j) < cells[lt]),
                };
                if better {
                    leave = Some((t, val));
                }
            }
        }
        let (lt, theta) = leave.expect("pivot cycle has a decreasing cell");
        x[(ei, ej)] += theta;
        for (t, &(i, j)) in cells.iter().enumerate() {
            if t % 2 == 0 {
                x[(i, j)] -= theta;
            } else {
                x[(i, j)] += theta;
            }
        }
        let (li, lj) = cells[lt];
        x[(li, lj)] = 0.0;
        in_basis[li * m + lj] = false;
        in_basis[ei * m + ej] = true;
        let pos = basis
            .iter()
            .position(|&e| e == (li, lj))
            .expect("leaving cell is basic");
        basis[pos] = (ei, ej);

        if theta <= 1e-15 {
            degenerate_run += 1;
            if degenerate_run >= degenerate_limit {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }
    }

    x.apply(|v| {
        if *v < 0.0 {
            *v = 0.0
        }
    });
    let plan = Coupling::new(x, a, b)?;
    let value = inner(c, plan.matrix());
    Ok(LinearSolution {
        plan,
        value,
        iterations,
    })
}

fn basis_adjacency(n: usize, m: usize, basis: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n + m];
    for &(i, j) in basis {
        adj[i].push(n + j);
        adj[n + j].push(i);
    }
    adj
}

fn potentials(n: usize, m: usize, c: &DMatrix<f64>, adj: &[Vec<usize>]) -> (Vec<f64>, Vec<f64>) {
    let mut pot = vec![f64::NAN; n + m];
    let mut stack = vec![0usize];
    pot[0] = 0.0;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !pot[w].is_nan() {
                continue;
            }
            // u_i + v_j = C_ij on basic cells.
            pot[w] = if v < n {
                c[(v, w - n)] - pot[v]
            } else {
                c[(w, v - n)] - pot[v]
            };
            stack.push(w);
        }
    }
    let v = pot.split_off(n);
    let _ = m;
    (pot, v)
}

fn tree_path(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    parent[from] = from;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    path
}

/// A violating tuple: `Σ C[i_k, j_k] > Σ C[i_k, j_σ(k)] + tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub pairs: Vec<(usize, usize)>,
    pub permutation: Vec<usize>,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub passed: bool,
    pub max_n_checked: usize,
    pub support_size: usize,
    pub violation: Option<MonotonicityViolation>,
}

/// Checks cyclical monotonicity of `P` against `C` for every subset of at most
/// `max_n` support pairs and every non-identity reassignment.
///
/// This is a necessary condition for optimality only; `max_n` is capped at 3
/// and the cap is recorded in the report.
pub fn check_cyclical_monotonicity(
    c: &DMatrix<f64>,
    p: &Coupling,
    max_n: usize,
    tol: f64,
) -> Result<MonotonicityReport> {
    check_shape(c, p.nrows(), p.ncols())?;
    if !(2..=3).contains(&max_n) {
        return Err(Error::InvalidArgument(format!(
            "max_n must be 2 or 3, got {max_n}"
        )));
    }
    let pairs = p.support(DEFAULT_SUPPORT_TOL);
    if pairs.len() > MONOTONICITY_SUPPORT_CAP {
        return Err(Error::TooLarge {
            what: "monotonicity support",
            size: pairs.len(),
            cap: MONOTONICITY_SUPPORT_CAP,
        });
    }
    for size in 2..=max_n {
        let perms: Vec<Vec<usize>> = (0..size)
            .permutations(size)
            .filter(|s| s.iter().enumerate().any(|(k, &v)| k != v))
            .collect();
        for subset in pairs.iter().copied().combinations(size) {
            let lhs: f64 = subset.iter().map(|&(i, j)| c[(i, j)]).sum();
            for sigma in &perms {
                let rhs: f64 = (0..size)
                    .map(|k| c[(subset[k].0, subset[sigma[k]].1)])
                    .sum();
                if lhs > rhs + tol {
                    return Ok(MonotonicityReport {
                        passed: false,
                        max_n_checked: max_n,
                        support_size: pairs.len(),
                        violation: Some(MonotonicityViolation {
                            pairs: subset.clone(),
                            permutation: sigma.clone(),
                            deficit: lhs - rhs,
                        }),
                    });
                }
            }
        }
    }
    Ok(MonotonicityReport {
        passed: true,
        max_n_checked: max_n,
        support_size: pairs.len(),
        violation: None,
    })
}

/// Exhaustive minimum of `⟨C, P_σ⟩` over permutations, `P_σ = perm / n`.
/// Ties go to the lexicographically smallest `σ`.
pub fn solve_monge(c: &DMatrix<f64>) -> Result<(Permutation, f64)> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square cost".into(),
            found: format!("{}x{}", n, c.ncols()),
        });
    }
    if n == 0 {
        return Err(Error::EmptyWeights);
    }
    if n > MONGE_CAP {
        return Err(Error::TooLarge {
            what: "permutation search n",
            size: n,
            cap: MONGE_CAP,
        });
    }
    check_finite(c)?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for sigma in (0..n).permutations(n) {
        let value = sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| c[(i, j)])
            .sum::<f64>()
            / n as f64;
        if best
            .as_ref()
            .is_none_or(|(_, b)| value < b - 1e-12 * b.abs().max(1.0))
        {
            best = Some((sigma, value));
        }
    }
    let (sigma, value) = best.expect("at least one permutation");
    Ok((Permutation::new(sigma)?, value))
}

#[derive(Debug, Clone)]
pub struct MongeReport {
    pub permutation: Permutation,
    pub monge_value: f64,
    pub lp_value: f64,
    pub gap: f64,
    pub lp_plan: Coupling,
    /// Every component of the LP plan's extreme decomposition is a permutation.
    pub lp_components_are_permutations: bool,
    pub holds: bool,
}

/// Compares the permutation brute force with the uniform-marginal LP.
pub fn verify_monge_equals_kantorovich(c: &DMatrix<f64>) -> Result<MongeReport> {
    let (permutation, monge_value) = solve_monge(c)?;
    let u = Histogram::uniform(c.nrows())?;
    let lp = solve_linear_ot(c, &u, &u)?;
    let decomposition = extreme_decomposition(&lp.plan);
    let lp_components_are_permutations = decomposition
        .components
        .iter()
        .all(|(_, p)| as_permutation(p).is_some());
    let gap = (monge_value - lp.value).abs();
    Ok(MongeReport {
        permutation,
        monge_value,
        lp_value: lp.value,
        gap,
        holds: gap <= 1e-9 && lp_components_are_permutations,
        lp_plan: lp.plan,
        lp_components_are_permutations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{enumerate_vertices, is_extreme};
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_cost_gives_zero_value() {
        let a = Histogram::new(&[0.2, 0.3, 0.5]).unwrap();
        let b = Histogram::new(&[0.6, 0.4]).unwrap();
        let s = solve_linear_ot(&DMatrix::zeros(3, 2), &a, &b).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(is_extreme(&s.plan));
    }

    #[test]
    fn antidiagonal_cost_picks_identity() {
        let u = Histogram::uniform(2).unwrap();
        let c = dmatrix![0.0, 1.0; 1.0, 0.0];
        let s = solve_linear_ot(&c, &u, &u).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.plan.matrix(), &dmatrix![0.5, 0.0; 0.0, 0.5]);
        let c = dmatrix![1.0, 0.0; 0.0, 1.0];
        let s = solve_linear_ot(&c, &u, &u).unwrap();
        assert_eq!(s.plan.matrix(), &dmatrix![0.0, 0.5; 0.5, 0.0]);
        assert!(s.iterations >= 1);
    }

    #[test]
    fn matches_vertex_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.random_range(1..=4);
            let m = rng.random_range(1..=4);
            let a = Histogram::new(
                &(0..n)
                    .map(|_| rng.random::<f64>() + 0.05)
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let b = Histogram::new(
                &(0..m)
                    .map(|_| rng.random::<f64>() + 0.05)
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            let c = DMatrix::from_fn(n, m, |_, _| rng.random::<f64>() * 10.0);
            let s = solve_linear_ot(&c, &a, &b).unwrap();
            let brute = enumerate_vertices(&a, &b)
                .unwrap()
                .iter()
                .map(|v| inner(&c, v.matrix()))
                .fold(f64::INFINITY, f64::min);
            assert!((s.value - brute).abs() <= 1e-9, "{} vs {}", s.value, brute);
            assert!(s.plan.support(1e-12).len() < n + m);
        }
    }

    #[test]
    fn degenerate_marginals_terminate() {
        let u = Histogram::uniform(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = DMatrix::from_fn(5, 5, |_, _| rng.random_range(0..3) as f64);
            let s = solve_linear_ot(&c, &u, &u).unwrap();
            let (_, monge) = solve_monge(&c).unwrap();
            assert!((s.value - monge).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_cost_rejected() {
        let u = Histogram::uniform(2).unwrap();
        let c = dmatrix![0.0, f64::INFINITY; 1.0, 0.0];
        assert!(matches!(
            solve_linear_ot(&c, &u, &u),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn monotonicity_examples() {
        let c = dmatrix![0.0, 1.0; 1.0, 0.0];
        let id = Coupling::from_matrix(dmatrix![0.5, 0.0; 0.0, 0.5]).unwrap();
        let r = check_cyclical_monotonicity(&c, &id, 2, 1e-9).unwrap();
        assert!(r.passed);
        let anti = Coupling::from_matrix(dmatrix![0.0, 0.5; 0.5, 0.0]).unwrap();
        let r = check_cyclical_monotonicity(&c, &anti, 2, 1e-9).unwrap();
        assert!(!r.passed);
        let v = r.violation.unwrap();
        assert_eq!(v.pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(v.permutation, vec![1, 0]);
        assert!((v.deficit - 2.0).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_argument_checks() {
        let c = dmatrix![0.0, 1.0; 1.0, 0.0];
        let id = Coupling::from_matrix(dmatrix![0.5, 0.0; 0.0, 0.5]).unwrap();
        assert!(check_cyclical_monotonicity(&c, &id, 4, 1e-9).is_err());
        assert!(check_cyclical_monotonicity(&c, &id, 1, 1e-9).is_err());
        let u = Histogram::uniform(9).unwrap();
        let dense = crate::types::product_coupling(&u, &u);
        assert!(matches!(
            check_cyclical_monotonicity(&DMatrix::zeros(9, 9), &dense, 2, 1e-9),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn monge_examples() {
        let (p, v) = solve_monge(&DMatrix::zeros(4, 4)).unwrap();
        assert_eq!(p, Permutation::identity(4));
        assert_eq!(v, 0.0);
        let (p, v) = solve_monge(&dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        assert_eq!(p, Permutation::identity(2));
        assert_eq!(v, 0.0);
        assert!(matches!(
            solve_monge(&DMatrix::zeros(10, 10)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn monge_equals_kantorovich_small() {
        let r = verify_monge_equals_kantorovich(&DMatrix::zeros(3, 3)).unwrap();
        assert!(r.holds);
        assert_eq!(r.lp_value, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>());
            let r = verify_monge_equals_kantorovich(&c).unwrap();
            assert!(r.holds, "gap {}", r.gap);
        }
    }

    #[test]
    fn unique_optimum_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let sigma = {
                let mut s: Vec<usize> = (0..4).collect();
                for i in (1..4).rev() {
                    s.swap(i, rng.random_range(0..=i));
                }
                s
            };
            let c = DMatrix::from_fn(4, 4, |i, j| {
                let noise = rng.random::<f64>() * 1e-3;
                if sigma[i] == j {
                    noise
                } else {
                    1.0 + noise
                }
            });
            let r = verify_monge_equals_kantorovich(&c).unwrap();
            assert_eq!(r.permutation.as_slice(), sigma.as_slice());
            assert_eq!(as_permutation(&r.lp_plan).unwrap(), r.permutation);
        }
    }
}
