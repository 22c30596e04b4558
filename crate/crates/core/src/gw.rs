//! Gromov-Wasserstein solvers and verifiers: the exact solver for concave
//! instances, the permutation brute force, Frank-Wolfe, the bilinear
//! relaxation and the frozen-cost LP checks.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnd::{separable_concavity_check, CndCertificate};
use crate::error::{Error, Result};
use crate::linear_ot::{check_cyclical_monotonicity, solve_linear_ot, MonotonicityReport};
use crate::polytope::{enumerate_vertices, VERTEX_CAP};
use crate::sample::random_vertex;
use crate::tensor::{QuadCost, SeparableCost};
use crate::types::{inner, product_coupling, Coupling, Histogram, Permutation};

/// Largest `n` for the permutation brute force.
pub const PERMUTATION_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GwMethod {
    ExactConcave,
    FrankWolfe,
    Permutation,
}

impl GwMethod {
    pub fn name(self) -> &'static str {
        match self {
            GwMethod::ExactConcave => "exact_concave",
            GwMethod::FrankWolfe => "frank_wolfe",
            GwMethod::Permutation => "permutation",
        }
    }
}

/// Per-run Frank-Wolfe diagnostics.
#[derive(Debug, Clone)]
pub struct FwTrace {
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at every iterate, starting point included.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GwSolution {
    pub plan: Coupling,
    pub value: f64,
    pub method: GwMethod,
    /// `(h1(C), h2(C̄))` certificates; present for `ExactConcave`.
    pub certificates: Option<(CndCertificate, CndCertificate)>,
    pub fw: Option<FwTrace>,
    /// `true` when the value is only an upper bound on GW.
    pub upper_bound_only: bool,
}

impl GwSolution {
    pub fn fw_gap(&self) -> Option<f64> {
        self.fw.as_ref().map(|t| t.gap)
    }
}

/// Values within this relative distance count as ties.
fn improves(value: f64, best: f64) -> bool {
    value < best - 1e-12 * best.abs().max(1.0)
}

/// Global GW on a concave-certified separable instance: the minimum over the
/// vertices of `Π(a, b)`, first vertex in canonical order on ties.
pub fn solve_gw_exact_concave(
    cost: &SeparableCost,
    a: &Histogram,
    b: &Histogram,
) -> Result<GwSolution> {
    check_marginal_lengths(cost, a, b)?;
    let report = separable_concavity_check(cost.loss(), cost.c(), cost.cb())?;
    if !report.concave {
        return Err(Error::NotConcave);
    }
    let (n, m) = cost.shape();
    if n * m > VERTEX_CAP {
        return Err(Error::TooLarge {
            what: "exact concave solver n*m",
            size: n * m,
            cap: VERTEX_CAP,
        });
    }
    let mut best: Option<(Coupling, f64)> = None;
    for v in enumerate_vertices(a, b)? {
        let value = cost.quadratic(v.matrix());
        if best.as_ref().is_none_or(|(_, bv)| improves(value, *bv)) {
            best = Some((v, value));
        }
    }
    let (plan, value) = best.expect("polytope has a vertex");
    Ok(GwSolution {
        plan,
        value,
        method: GwMethod::ExactConcave,
        certificates: Some((report.h1, report.h2)),
        fw: None,
        upper_bound_only: false,
    })
}

/// Exhaustive minimum over scaled permutation matrices, lexicographically
/// first `σ` on ties. Requires `n = m <= 8`.
pub fn solve_gw_permutation<L: QuadCost + ?Sized>(cost: &L) -> Result<GwSolution> {
    let (n, m) = cost.shape();
    if n != m {
        return Err(Error::DimensionMismatch {
            expected: "square plan".into(),
            found: format!("{n}x{m}"),
        });
    }
    if n > PERMUTATION_CAP {
        return Err(Error::TooLarge {
            what: "permutation search n",
            size: n,
            cap: PERMUTATION_CAP,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut plan = DMatrix::zeros(n, n);
    let w = 1.0 / n as f64;
    for sigma in (0..n).permutations(n) {
        plan.fill(0.0);
        for (i, &j) in sigma.iter().enumerate() {
            plan[(i, j)] = w;
        }
        let value = cost.quadratic(&plan);
        if best.as_ref().is_none_or(|(_, bv)| improves(value, *bv)) {
            best = Some((sigma, value));
        }
    }
    let (sigma, value) = best.expect("at least one permutation");
    Ok(GwSolution {
        plan: Permutation::new(sigma)?.to_coupling(),
        value,
        method: GwMethod::Permutation,
        certificates: None,
        fw: None,
        upper_bound_only: false,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct FwOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FwOptions {
    fn default() -> Self {
        FwOptions {
            max_iter: 200,
            tol: 1e-9,
        }
    }
}

/// Frank-Wolfe from `start`.
///
/// Gradient `2·(L ⊗ P)`, direction from the exact LP, gap
/// `⟨G, P - D⟩`, and exact line search on the univariate quadratic along
/// `[P, D]`. Hitting `max_iter` is reported through `FwTrace::converged`.
pub fn solve_gw_frank_wolfe<L: QuadCost + ?Sized>(
    cost: &L,
    a: &Histogram,
    b: &Histogram,
    start: &Coupling,
    opts: FwOptions,
) -> Result<GwSolution> {
    require_symmetric(cost)?;
    check_marginal_lengths(cost, a, b)?;
    cost.check_plan_shape(start.matrix())?;
    let mut p = Coupling::new(start.matrix().clone(), a, b)?.into_matrix();
    let mut value = cost.quadratic(&p);
    let mut values = vec![value];
    let mut gap;
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let lp = cost.apply(&p);
        let grad = &lp * 2.0;
        let d = solve_linear_ot(&grad, a, b)?.plan.into_matrix();
        gap = inner(&grad, &(&p - &d));
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if iterations == opts.max_iter {
            break;
        }
        iterations += 1;
        let delta = &d - &p;
        // f(P + γΔ) = f(P) + γ·slope + γ²·curvature
        let slope = -gap;
        let curvature = cost.quadratic(&delta);
        let gamma = if curvature > 0.0 {
            (-slope / (2.0 * curvature)).clamp(0.0, 1.0)
        } else if slope + curvature < 0.0 {
            1.0
        } else {
            0.0
        };
        if gamma == 0.0 {
            break;
        }
        p += &delta * gamma;
        value = cost.quadratic(&p);
        values.push(value);
    }

    let plan = Coupling::new(p, a, b)?;
    Ok(GwSolution {
        plan,
        value,
        method: GwMethod::FrankWolfe,
        certificates: None,
        fw: Some(FwTrace {
            gap,
            iterations,
            converged,
            values,
        }),
        upper_bound_only: true,
    })
}

/// Best of `starts` Frank-Wolfe runs: the product coupling followed by random
/// vertices. The result is labelled an upper bound.
pub fn solve_gw_multistart<L: QuadCost + ?Sized>(
    cost: &L,
    a: &Histogram,
    b: &Histogram,
    starts: usize,
    seed: u64,
    opts: FwOptions,
) -> Result<GwSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<GwSolution> = None;
    for s in 0..starts.max(1) {
        let start = if s == 0 {
            product_coupling(a, b)
        } else {
            random_vertex(&mut rng, a, b)
        };
        let sol = solve_gw_frank_wolfe(cost, a, b, &start, opts)?;
        if best.as_ref().is_none_or(|bs| improves(sol.value, bs.value)) {
            best = Some(sol);
        }
    }
    Ok(best.expect("at least one start"))
}

#[derive(Debug, Clone)]
pub struct StationarityReport {
    pub passed: bool,
    /// `⟨L ⊗ P*, P*⟩`.
    pub plan_value: f64,
    /// `min_P ⟨L ⊗ P*, P⟩`.
    pub lp_value: f64,
    pub lp_plan: Coupling,
    pub tol: f64,
}

/// Whether `P*` solves the linear problem with the frozen cost `L ⊗ P*`.
pub fn check_qp_lp_stationarity<L: QuadCost + ?Sized>(
    cost: &L,
    p_star: &Coupling,
    tol: f64,
) -> Result<StationarityReport> {
    require_symmetric(cost)?;
    cost.check_plan_shape(p_star.matrix())?;
    let frozen = cost.apply(p_star.matrix());
    let lp = solve_linear_ot(&frozen, p_star.row_marginal(), p_star.col_marginal())?;
    let plan_value = inner(&frozen, p_star.matrix());
    Ok(StationarityReport {
        passed: plan_value <= lp.value + tol,
        plan_value,
        lp_value: lp.value,
        lp_plan: lp.plan,
        tol,
    })
}

/// Cyclical monotonicity of `P*` for its own frozen cost `L ⊗ P*`.
pub fn gw_monotonicity_check<L: QuadCost + ?Sized>(
    cost: &L,
    p_star: &Coupling,
    max_n: usize,
    tol: f64,
) -> Result<MonotonicityReport> {
    require_symmetric(cost)?;
    cost.check_plan_shape(p_star.matrix())?;
    let frozen = cost.apply(p_star.matrix());
    check_cyclical_monotonicity(&frozen, p_star, max_n, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearMode {
    Alternating,
    Brute,
}

#[derive(Debug, Clone)]
pub struct BilinearSolution {
    pub plan1: Coupling,
    pub plan2: Coupling,
    /// `⟨L ⊗ plan1, plan2⟩`.
    pub value: f64,
}

/// `min ⟨L ⊗ P1, P2⟩` over pairs of couplings.
///
/// Brute mode scans all vertex pairs, which is exact because the objective is
/// linear in each argument. Alternating mode runs block-coordinate LP steps
/// from the product coupling until the decrease is at most 1e-10.
pub fn solve_bilinear<L: QuadCost + ?Sized>(
    cost: &L,
    a: &Histogram,
    b: &Histogram,
    mode: BilinearMode,
) -> Result<BilinearSolution> {
    require_symmetric(cost)?;
    check_marginal_lengths(cost, a, b)?;
    match mode {
        BilinearMode::Brute => {
            let vertices = enumerate_vertices(a, b)?;
            let applied: Vec<DMatrix<f64>> =
                vertices.iter().map(|v| cost.apply(v.matrix())).collect();
            let mut best: Option<(usize, usize, f64)> = None;
            for (s, lv) in applied.iter().enumerate() {
                for (t, v2) in vertices.iter().enumerate() {
                    let value = inner(lv, v2.matrix());
                    if best.is_none_or(|(_, _, bv)| improves(value, bv)) {
                        best = Some((s, t, value));
                    }
                }
            }
            let (s, t, value) = best.expect("polytope has a vertex");
            Ok(BilinearSolution {
                plan1: vertices[s].clone(),
                plan2: vertices[t].clone(),
                value,
            })
        }
        BilinearMode::Alternating => {
            let mut p1 = product_coupling(a, b);
            let mut p2 = solve_linear_ot(&cost.apply(p1.matrix()), a, b)?.plan;
            let mut value = cost.bilinear(p1.matrix(), p2.matrix());
            for _ in 0..1000 {
                p1 = solve_linear_ot(&cost.apply(p2.matrix()), a, b)?.plan;
                p2 = solve_linear_ot(&cost.apply(p1.matrix()), a, b)?.plan;
                let next = cost.bilinear(p1.matrix(), p2.matrix());
                let decrease = value - next;
                value = next;
                if decrease <= 1e-10 {
                    break;
                }
            }
            Ok(BilinearSolution {
                plan1: p1,
                plan2: p2,
                value,
            })
        }
    }
}

/// `|g(X, Y) - ½(f(X+Y) - f(X) - f(Y))|` for arbitrary matrices, with
/// `g(X, Y) = ⟨L ⊗ X, Y⟩` and `f(X) = g(X, X)`.
pub fn bilinear_identity_check<L: QuadCost + ?Sized>(
    cost: &L,
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> Result<f64> {
    require_symmetric(cost)?;
    cost.check_plan_shape(x)?;
    cost.check_plan_shape(y)?;
    let g = cost.bilinear(x, y);
    let sum = x + y;
    let rhs = 0.5 * (cost.quadratic(&sum) - cost.quadratic(x) - cost.quadratic(y));
    Ok((g - rhs).abs())
}

#[derive(Debug, Clone)]
pub struct TightnessReport {
    pub concave: bool,
    pub bilinear: BilinearSolution,
    /// Exact GW when `concave`, otherwise the best vertex value (an upper
    /// bound on GW).
    pub gw_value: f64,
    pub gw_plan: Coupling,
    /// `|bilinear - GW| <= 1e-9`; only asserted on concave instances.
    pub tight: Option<bool>,
    /// `⟨L ⊗ P_gw, P_gw⟩` equals the bilinear value within 1e-9.
    pub diagonal_attains: Option<bool>,
    /// `bilinear <= GW + 1e-9`, which holds for every instance.
    pub relaxation_holds: bool,
    pub holds: bool,
}

/// Compares the brute-force bilinear relaxation with GW.
pub fn check_bilinear_tightness(
    cost: &SeparableCost,
    a: &Histogram,
    b: &Histogram,
) -> Result<TightnessReport> {
    check_marginal_lengths(cost, a, b)?;
    let (n, m) = cost.shape();
    if n * m > VERTEX_CAP {
        return Err(Error::TooLarge {
            what: "tightness check n*m",
            size: n * m,
            cap: VERTEX_CAP,
        });
    }
    let concave = separable_concavity_check(cost.loss(), cost.c(), cost.cb())?.concave;
    let bilinear = solve_bilinear(cost, a, b, BilinearMode::Brute)?;
    let (gw_plan, gw_value) = if concave {
        let s = solve_gw_exact_concave(cost, a, b)?;
        (s.plan, s.value)
    } else {
        let mut best: Option<(Coupling, f64)> = None;
        for v in enumerate_vertices(a, b)? {
            let value = cost.quadratic(v.matrix());
            if best.as_ref().is_none_or(|(_, bv)| improves(value, *bv)) {
                best = Some((v, value));
            }
        }
        best.expect("polytope has a vertex")
    };
    let relaxation_holds = bilinear.value <= gw_value + 1e-9;
    let (tight, diagonal_attains) = if concave {
        let tight = (bilinear.value - gw_value).abs() <= 1e-9;
        let diag = cost.bilinear(gw_plan.matrix(), gw_plan.matrix());
        (Some(tight), Some((diag - bilinear.value).abs() <= 1e-9))
    } else {
        (None, None)
    };
    let holds = relaxation_holds && tight.unwrap_or(true) && diagonal_attains.unwrap_or(true);
    Ok(TightnessReport {
        concave,
        bilinear,
        gw_value,
        gw_plan,
        tight,
        diagonal_attains,
        relaxation_holds,
        holds,
    })
}

fn require_symmetric<L: QuadCost + ?Sized>(cost: &L) -> Result<()> {
    if cost.is_symmetric() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "tensor must be symmetric; symmetrize it first".into(),
        ))
    }
}

fn check_marginal_lengths<L: QuadCost + ?Sized>(
    cost: &L,
    a: &Histogram,
    b: &Histogram,
) -> Result<()> {
    let (n, m) = cost.shape();
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("histograms of length {n} and {m}"),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::SeparableLoss;
    use crate::polytope::is_extreme;
    use crate::sample::{random_points, squared_distances};
    use crate::tensor::QuadTensor;
    use crate::types::CostMatrix;
    use nalgebra::dmatrix;
    use rand::Rng;

    fn sym(m: DMatrix<f64>) -> CostMatrix {
        CostMatrix::symmetric(m).unwrap()
    }

    fn euclid_instance(seed: u64, n: usize, m: usize) -> SeparableCost {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = squared_distances(&random_points(&mut rng, n, 2, 1.0));
        let cb = squared_distances(&random_points(&mut rng, m, 2, 1.0));
        SeparableCost::new(SeparableLoss::square(), c, cb).unwrap()
    }

    #[test]
    fn self_comparison_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = squared_distances(&random_points(&mut rng, 3, 2, 1.0));
        let cost = SeparableCost::new(SeparableLoss::square(), c.clone(), c).unwrap();
        let u = Histogram::uniform(3).unwrap();
        let s = solve_gw_exact_concave(&cost, &u, &u).unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!(crate::polytope::as_permutation(&s.plan).is_some());
        assert!(s.certificates.is_some());
        let p = solve_gw_permutation(&cost).unwrap();
        assert_eq!(p.plan, Permutation::identity(3).to_coupling());
        assert!(p.value.abs() < 1e-12);
    }

    #[test]
    fn permutation_tie_returns_identity() {
        let cost = SeparableCost::new(
            SeparableLoss::square(),
            sym(dmatrix![0.0, 1.0; 1.0, 0.0]),
            sym(dmatrix![0.0, 2.0; 2.0, 0.0]),
        )
        .unwrap();
        let s = solve_gw_permutation(&cost).unwrap();
        assert!((s.value - 0.25).abs() < 1e-15);
        assert_eq!(s.plan, Permutation::identity(2).to_coupling());
        // Dense oracle on both permutations.
        let dense = cost.to_dense().unwrap();
        for sigma in [vec![0, 1], vec![1, 0]] {
            let p = Permutation::new(sigma).unwrap().to_coupling();
            assert!((dense.quadratic(p.matrix()) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_concave_sparse_on_nonuniform_marginals() {
        let cost = euclid_instance(5, 2, 2);
        let a = Histogram::new(&[0.3, 0.7]).unwrap();
        let b = Histogram::uniform(2).unwrap();
        let s = solve_gw_exact_concave(&cost, &a, &b).unwrap();
        assert!(s.plan.support(1e-12).len() <= 3);
        assert!(is_extreme(&s.plan));
    }

    #[test]
    fn exact_solver_refuses_non_concave() {
        let cost = SeparableCost::new(
            SeparableLoss::square(),
            sym(dmatrix![0.0, 1.0; 1.0, 0.0]),
            sym(dmatrix![0.0, -1.0; -1.0, 0.0]),
        )
        .unwrap();
        let u = Histogram::uniform(2).unwrap();
        assert!(matches!(
            solve_gw_exact_concave(&cost, &u, &u),
            Err(Error::NotConcave)
        ));
    }

    #[test]
    fn permutation_value_bounds_sampled_couplings() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cost = euclid_instance(21, 3, 3);
        let u = Histogram::uniform(3).unwrap();
        let best = solve_gw_permutation(&cost).unwrap().value;
        for _ in 0..1000 {
            let p = crate::sample::random_plan(&mut rng, &u, &u);
            assert!(best <= cost.quadratic(p.matrix()) + 1e-12);
        }
    }

    #[test]
    fn frank_wolfe_at_optimum_stops_immediately() {
        let cost = euclid_instance(2, 3, 3);
        let u = Histogram::uniform(3).unwrap();
        let exact = solve_gw_exact_concave(&cost, &u, &u).unwrap();
        let fw = solve_gw_frank_wolfe(&cost, &u, &u, &exact.plan, FwOptions::default()).unwrap();
        let trace = fw.fw.unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations, 0);
        assert!(trace.gap <= 1e-9);
    }

    #[test]
    fn frank_wolfe_multistart_matches_exact_on_concave() {
        for seed in 0..10 {
            let cost = euclid_instance(100 + seed, 3, 3);
            let u = Histogram::uniform(3).unwrap();
            let exact = solve_gw_exact_concave(&cost, &u, &u).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = f64::INFINITY;
            for _ in 0..20 {
                let start = random_vertex(&mut rng, &u, &u);
                let fw = solve_gw_frank_wolfe(&cost, &u, &u, &start, FwOptions::default()).unwrap();
                let t = fw.fw.as_ref().unwrap();
                for w in t.values.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12);
                }
                if t.converged {
                    assert!(
                        check_qp_lp_stationarity(&cost, &fw.plan, 1e-7)
                            .unwrap()
                            .passed
                    );
                }
                best = best.min(fw.value);
            }
            assert!(
                (best - exact.value).abs() <= 1e-7,
                "seed {seed}: {best} vs {}",
                exact.value
            );
        }
    }

    #[test]
    fn stationarity_examples() {
        let cost = euclid_instance(7, 3, 3);
        let u = Histogram::uniform(3).unwrap();
        let exact = solve_gw_exact_concave(&cost, &u, &u).unwrap();
        assert!(
            check_qp_lp_stationarity(&cost, &exact.plan, 1e-7)
                .unwrap()
                .passed
        );
        let perm = solve_gw_permutation(&cost).unwrap();
        assert!(
            check_qp_lp_stationarity(&cost, &perm.plan, 1e-7)
                .unwrap()
                .passed
        );
        // The product coupling of a generic concave instance is not stationary.
        let prod = product_coupling(&u, &u);
        let r = check_qp_lp_stationarity(&cost, &prod, 1e-7).unwrap();
        assert!(!r.passed);
        assert!(r.lp_value < r.plan_value - 1e-7);
    }

    #[test]
    fn gw_monotonicity_examples() {
        let cost = euclid_instance(8, 3, 3);
        let u = Histogram::uniform(3).unwrap();
        let exact = solve_gw_exact_concave(&cost, &u, &u).unwrap();
        assert!(
            gw_monotonicity_check(&cost, &exact.plan, 3, 1e-9)
                .unwrap()
                .passed
        );
        let fw = solve_gw_multistart(&cost, &u, &u, 10, 1, FwOptions::default()).unwrap();
        if fw.fw.as_ref().unwrap().converged {
            assert!(
                gw_monotonicity_check(&cost, &fw.plan, 3, 1e-9)
                    .unwrap()
                    .passed
            );
        }
    }

    #[test]
    fn bilinear_examples() {
        let u = Histogram::uniform(2).unwrap();
        let zero = QuadTensor::zeros(2, 2).unwrap();
        assert_eq!(
            solve_bilinear(&zero, &u, &u, BilinearMode::Brute)
                .unwrap()
                .value,
            0.0
        );
        for seed in 0..5 {
            let cost = euclid_instance(40 + seed, 3, 3);
            let u3 = Histogram::uniform(3).unwrap();
            let exact = solve_gw_exact_concave(&cost, &u3, &u3).unwrap();
            let bl = solve_bilinear(&cost, &u3, &u3, BilinearMode::Brute).unwrap();
            assert!((bl.value - exact.value).abs() <= 1e-9);
            assert!((cost.quadratic(bl.plan1.matrix()) - exact.value).abs() <= 1e-9);
            assert!((cost.quadratic(bl.plan2.matrix()) - exact.value).abs() <= 1e-9);
            let alt = solve_bilinear(&cost, &u3, &u3, BilinearMode::Alternating).unwrap();
            assert!(alt.value >= bl.value - 1e-9);
        }
    }

    #[test]
    fn bilinear_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cost = euclid_instance(77, 3, 2);
        let a = Histogram::uniform(3).unwrap();
        let b = Histogram::uniform(2).unwrap();
        let p = crate::sample::random_plan(&mut rng, &a, &b);
        assert!(bilinear_identity_check(&cost, p.matrix(), p.matrix()).unwrap() <= 1e-10);
        let zero = QuadTensor::zeros(3, 2).unwrap();
        assert_eq!(
            bilinear_identity_check(&zero, p.matrix(), p.matrix()).unwrap(),
            0.0
        );
        let asym =
            QuadTensor::from_fn(3, 2, false, |i, j, k, l| (i + 2 * j + 3 * k + 5 * l) as f64)
                .unwrap();
        assert!(bilinear_identity_check(&asym, p.matrix(), p.matrix()).is_err());
        let x = DMatrix::from_fn(3, 2, |_, _| rng.random::<f64>());
        assert!(bilinear_identity_check(&cost, &x, p.matrix()).unwrap() <= 1e-10);
    }

    #[test]
    fn tightness_examples() {
        let cost = euclid_instance(9, 3, 3);
        let u = Histogram::uniform(3).unwrap();
        let r = check_bilinear_tightness(&cost, &u, &u).unwrap();
        assert!(r.concave && r.holds);
        assert_eq!(r.tight, Some(true));

        let cost = SeparableCost::new(
            SeparableLoss::square(),
            sym(dmatrix![0.0, 1.0; 1.0, 0.0]),
            sym(dmatrix![0.0, -1.0; -1.0, 0.0]),
        )
        .unwrap();
        let u2 = Histogram::uniform(2).unwrap();
        let r = check_bilinear_tightness(&cost, &u2, &u2).unwrap();
        assert!(!r.concave);
        assert!(r.tight.is_none());
        assert!(r.relaxation_holds);
        let perm = solve_gw_permutation(&cost).unwrap().value;
        assert!(r.bilinear.value <= perm + 1e-9);
    }
}
