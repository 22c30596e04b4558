mod common;

use std::collections::BTreeSet;

use common::rng;
use gwot::polytope::{
    as_permutation, cycle_perturbation, enumerate_vertices, extreme_decomposition, find_cycle,
    is_extreme, northwest_corner, support_graph,
};
use gwot::sample::{random_coupling, random_histogram, random_permutation, random_plan};
use gwot::{Coupling, Histogram, DEFAULT_SUPPORT_TOL};
use itertools::Itertools;
use proptest::prelude::*;
use rand::Rng;

fn rounded(p: &Coupling) -> Vec<i64> {
    p.matrix()
        .transpose()
        .iter()
        .map(|x| (x * 1e9).round() as i64)
        .collect()
}

fn histograms(seed: u64, n: usize, m: usize) -> (rand_chacha::ChaCha8Rng, Histogram, Histogram) {
    let mut r = rng(seed);
    let (a, b) = if r.random_bool(0.3) {
        (
            Histogram::uniform(n).unwrap(),
            Histogram::uniform(m).unwrap(),
        )
    } else {
        (
            random_histogram(&mut r, n, 0.05),
            random_histogram(&mut r, m, 0.05),
        )
    };
    (r, a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn decomposition_reconstructs_with_extreme_components(
        seed in any::<u64>(),
        n in 1usize..=5,
        m in 1usize..=5,
    ) {
        let (mut r, a, b) = histograms(seed, n, m);
        let p = if r.random_bool(0.5) { random_coupling(&mut r, &a, &b) } else { random_plan(&mut r, &a, &b) };
        let dec = extreme_decomposition(&p);
        prop_assert!((dec.weight_sum() - 1.0).abs() <= 1e-10);
        prop_assert!((dec.reconstruct() - p.matrix()).amax() <= 1e-9);
        prop_assert!(dec.components.len() <= p.support(DEFAULT_SUPPORT_TOL).len());
        for (w, c) in &dec.components {
            prop_assert!(*w >= 0.0);
            prop_assert!(is_extreme(c));
            prop_assert!((c.matrix().row_sum() - p.matrix().row_sum()).amax() <= 1e-9);
            prop_assert!((c.matrix().column_sum() - p.matrix().column_sum()).amax() <= 1e-9);
        }
    }

    #[test]
    fn cycle_children_are_couplings(seed in any::<u64>(), n in 2usize..=5, m in 2usize..=5) {
        let (mut r, a, b) = histograms(seed, n, m);
        let p = random_coupling(&mut r, &a, &b);
        let g = support_graph(&p, DEFAULT_SUPPORT_TOL);
        let Some(cycle) = find_cycle(&g) else {
            prop_assert!(is_extreme(&p));
            return Ok(());
        };
        prop_assert!(!is_extreme(&p));
        let e = cycle_perturbation(&cycle);
        let pm = p.matrix();
        let eps_minus = cycle.backward_edges().iter().map(|&(i, j)| pm[(i, j)]).fold(f64::INFINITY, f64::min);
        let eps_plus = cycle.forward_edges().iter().map(|&(i, j)| pm[(i, j)]).fold(f64::INFINITY, f64::min);
        prop_assert!(eps_minus > 0.0 && eps_plus > 0.0);
        let em = e.to_matrix();
        for child in [pm + &em * eps_minus, pm - &em * eps_plus] {
            prop_assert!(child.min() >= -1e-12);
            prop_assert!(Coupling::new(child, &a, &b).is_ok());
        }
    }

    #[test]
    fn perturbations_have_zero_line_sums(seed in any::<u64>(), n in 2usize..=6, m in 2usize..=6) {
        let (mut r, a, b) = histograms(seed, n, m);
        let p = random_coupling(&mut r, &a, &b);
        if let Some(cycle) = find_cycle(&support_graph(&p, DEFAULT_SUPPORT_TOL)) {
            let e = cycle_perturbation(&cycle);
            prop_assert!(e.row_sums().iter().all(|s| *s == 0));
            prop_assert!(e.col_sums().iter().all(|s| *s == 0));
            prop_assert_eq!(e.nonzeros(), 2 * cycle.len());
        }
    }

    #[test]
    fn northwest_corner_is_a_sparse_vertex(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let (_, a, b) = histograms(seed, n, m);
        let p = northwest_corner(&a, &b);
        prop_assert!(is_extreme(&p));
        prop_assert!(p.support(DEFAULT_SUPPORT_TOL).len() < n + m);
    }

    #[test]
    fn enumerated_vertices_are_distinct_vertices(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
        let (_, a, b) = histograms(seed, n, m);
        let vs = enumerate_vertices(&a, &b).unwrap();
        prop_assert!(!vs.is_empty());
        let keys: BTreeSet<_> = vs.iter().map(rounded).collect();
        prop_assert_eq!(keys.len(), vs.len());
        for v in &vs {
            prop_assert!(is_extreme(v));
            prop_assert!(v.support(DEFAULT_SUPPORT_TOL).len() < n + m);
        }
    }
}

#[test]
fn uniform_vertices_are_exactly_the_permutations() {
    for n in 1..=4 {
        let u = Histogram::uniform(n).unwrap();
        let got: BTreeSet<_> = enumerate_vertices(&u, &u)
            .unwrap()
            .iter()
            .map(rounded)
            .collect();
        let want: BTreeSet<_> = (0..n)
            .permutations(n)
            .map(|s| rounded(&gwot::Permutation::new(s).unwrap().to_coupling()))
            .collect();
        assert_eq!(got, want, "n = {n}");
    }
}

#[test]
fn birkhoff_components_are_permutations() {
    let mut r = rng(11);
    for n in 2..=5 {
        let u = Histogram::uniform(n).unwrap();
        for _ in 0..20 {
            let p = random_coupling(&mut r, &u, &u);
            let dec = extreme_decomposition(&p);
            assert!(dec
                .components
                .iter()
                .all(|(_, c)| as_permutation(c).is_some()));
        }
        let s = random_permutation(&mut r, n);
        let back = as_permutation(&s.to_coupling()).unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn decomposition_is_deterministic() {
    let mut r = rng(5);
    let u = Histogram::uniform(4).unwrap();
    let p = random_coupling(&mut r, &u, &u);
    let first = extreme_decomposition(&p);
    let second = extreme_decomposition(&p);
    assert_eq!(first.components.len(), second.components.len());
    for ((w1, c1), (w2, c2)) in first.components.iter().zip(&second.components) {
        assert_eq!(w1, w2);
        assert_eq!(c1.matrix(), c2.matrix());
    }
}
