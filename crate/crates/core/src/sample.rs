//! Seeded random instances: histograms, point clouds, vertices and interior
//! couplings of `Π(a, b)`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::linear_ot::solve_linear_ot;
use crate::types::{CostMatrix, Coupling, Histogram, Permutation};

/// Weights drawn from `[floor, 1 + floor)` and normalized.
pub fn random_histogram<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Histogram {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + floor).collect();
    Histogram::new(&w).expect("positive weights")
}

/// A vertex of `Π(a, b)`: the LP optimum for a random cost.
pub fn random_vertex<R: Rng>(rng: &mut R, a: &Histogram, b: &Histogram) -> Coupling {
    let c = DMatrix::from_fn(a.len(), b.len(), |_, _| rng.random::<f64>());
    solve_linear_ot(&c, a, b).expect("finite random cost").plan
}

/// Convex combination of `k` random vertices with random weights.
pub fn random_mixture<R: Rng>(rng: &mut R, a: &Histogram, b: &Histogram, k: usize) -> Coupling {
    let weights = random_histogram(rng, k.max(1), 0.01);
    let mut m = DMatrix::zeros(a.len(), b.len());
    for t in 0..k.max(1) {
        m += random_vertex(rng, a, b).matrix() * weights[t];
    }
    Coupling::new(m, a, b).expect("mixture of couplings is a coupling")
}

/// Random vertex half of the time, otherwise a mixture of two to four
/// vertices.
pub fn random_plan<R: Rng>(rng: &mut R, a: &Histogram, b: &Histogram) -> Coupling {
    if rng.random_bool(0.5) {
        random_vertex(rng, a, b)
    } else {
        let k = rng.random_range(2..=4);
        random_mixture(rng, a, b, k)
    }
}

/// A generic interior coupling: mixture of `n·m` random vertices.
pub fn random_coupling<R: Rng>(rng: &mut R, a: &Histogram, b: &Histogram) -> Coupling {
    random_mixture(rng, a, b, a.len() * b.len())
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Permutation {
    let mut s: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        s.swap(i, rng.random_range(0..=i));
    }
    Permutation::new(s).expect("shuffle is a bijection")
}

/// Points with coordinates uniform in `[-scale, scale)`.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

/// `C_ik = ‖x_i - x_k‖²`.
pub fn squared_distances(points: &[Vec<f64>]) -> CostMatrix {
    let n = points.len();
    let m = DMatrix::from_fn(n, n, |i, k| {
        points[i]
            .iter()
            .zip(&points[k])
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    });
    CostMatrix::symmetric(m).expect("squared distances are symmetric")
}

/// Random symmetric matrix with entries in `[lo, hi)`.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> CostMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let v = rng.random_range(lo..hi);
            m[(i, k)] = v;
            m[(k, i)] = v;
        }
    }
    CostMatrix::symmetric(m).expect("symmetric by construction")
}
