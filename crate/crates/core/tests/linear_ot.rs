mod common;

use common::{marginals, rng};
use gwot::linear_ot::{
    check_cyclical_monotonicity, solve_linear_ot, verify_monge_equals_kantorovich,
};
use gwot::polytope::{enumerate_vertices, is_extreme};
use gwot::types::inner;
use gwot::{Coupling, Histogram, DEFAULT_SUPPORT_TOL};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn brute_min(c: &DMatrix<f64>, a: &Histogram, b: &Histogram) -> f64 {
    enumerate_vertices(a, b)
        .unwrap()
        .iter()
        .map(|v| inner(c, v.matrix()))
        .fold(f64::INFINITY, f64::min)
}

fn random_cost(r: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize) -> DMatrix<f64> {
    match r.random_range(0..3) {
        0 => DMatrix::from_fn(n, m, |_, _| r.random::<f64>()),
        // Integer costs produce ties and degenerate pivots.
        1 => DMatrix::from_fn(n, m, |_, _| r.random_range(0..3) as f64),
        _ => DMatrix::from_fn(n, m, |i, j| (i as f64 - j as f64).powi(2)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = marginals(&mut r, n, m);
        let c = random_cost(&mut r, n, m);
        let sol = solve_linear_ot(&c, &a, &b).unwrap();
        let brute = brute_min(&c, &a, &b);
        prop_assert!((sol.value - brute).abs() <= 1e-9, "simplex {} brute {}", sol.value, brute);
        prop_assert!((inner(&c, sol.plan.matrix()) - sol.value).abs() <= 1e-12);
        prop_assert!(sol.plan.support(DEFAULT_SUPPORT_TOL).len() < n + m);
        prop_assert!(is_extreme(&sol.plan));
        let report = check_cyclical_monotonicity(&c, &sol.plan, 3, 1e-9).unwrap();
        prop_assert!(report.passed, "{:?}", report.violation);
    }

    #[test]
    fn verifier_catches_costly_swaps(seed in any::<u64>(), n in 2usize..=4, m in 2usize..=4) {
        let mut r = rng(seed);
        let (a, b) = marginals(&mut r, n, m);
        let c = random_cost(&mut r, n, m);
        let plan = solve_linear_ot(&c, &a, &b).unwrap().plan;
        for (perturbed, delta) in cycle_moves(&mut r, &c, &plan) {
            let report = check_cyclical_monotonicity(&c, &perturbed, 3, 1e-9).unwrap();
            prop_assert!(!report.passed, "increase {delta} not detected");
        }
    }
}

/// Plans obtained by moving half of the smaller mass along 2- and 3-cycles
/// through support cells of an optimal plan, kept when the cost rises by
/// more than 1e-6.
fn cycle_moves(
    r: &mut rand_chacha::ChaCha8Rng,
    c: &DMatrix<f64>,
    plan: &Coupling,
) -> Vec<(Coupling, f64)> {
    let mut cells = plan.support(DEFAULT_SUPPORT_TOL);
    cells.shuffle(r);
    let p = plan.matrix();
    let base = inner(c, p);
    let mut out = Vec::new();
    for len in [2usize, 3] {
        for chosen in cells.chunks_exact(len) {
            let rows: Vec<usize> = chosen.iter().map(|x| x.0).collect();
            let cols: Vec<usize> = chosen.iter().map(|x| x.1).collect();
            let distinct =
                |v: &[usize]| (0..v.len()).all(|x| (x + 1..v.len()).all(|y| v[x] != v[y]));
            if !distinct(&rows) || !distinct(&cols) {
                continue;
            }
            let theta = 0.5
                * chosen
                    .iter()
                    .map(|&(i, j)| p[(i, j)])
                    .fold(f64::INFINITY, f64::min);
            let mut q = p.clone();
            for k in 0..len {
                q[(rows[k], cols[k])] -= theta;
                q[(rows[k], cols[(k + 1) % len])] += theta;
            }
            let delta = inner(c, &q) - base;
            if delta > 1e-6 {
                let coupling = Coupling::new(q, plan.row_marginal(), plan.col_marginal()).unwrap();
                out.push((coupling, delta));
            }
        }
    }
    out
}

#[test]
fn zero_cost_has_zero_value() {
    let a = Histogram::new(&[0.2, 0.3, 0.5]).unwrap();
    let b = Histogram::uniform(4).unwrap();
    let sol = solve_linear_ot(&DMatrix::zeros(3, 4), &a, &b).unwrap();
    assert_eq!(sol.value, 0.0);
    assert!(is_extreme(&sol.plan));
}

#[test]
fn monge_equals_kantorovich_on_square_uniform_costs() {
    let mut r = rng(77);
    for n in 1..=4 {
        for _ in 0..50 {
            let c = random_cost(&mut r, n, n);
            let report = verify_monge_equals_kantorovich(&c).unwrap();
            assert!(report.gap <= 1e-9, "gap {}", report.gap);
            assert!(report.lp_components_are_permutations);
            assert!(report.holds);
        }
    }
}

#[test]
fn degenerate_marginals_still_reach_the_optimum() {
    let mut r = rng(3);
    let a = Histogram::uniform(4).unwrap();
    let b = Histogram::new(&[0.25, 0.25, 0.5]).unwrap();
    for _ in 0..200 {
        let c = DMatrix::from_fn(4, 3, |_, _| r.random_range(0..2) as f64);
        let sol = solve_linear_ot(&c, &a, &b).unwrap();
        assert!((sol.value - brute_min(&c, &a, &b)).abs() <= 1e-9);
    }
}
