#![allow(dead_code)]

use gwot::cnd::separable_concavity_check;
use gwot::sample::{random_histogram, random_points, random_symmetric, squared_distances};
use gwot::{CostMatrix, Histogram, LossPreset, SeparableCost, SeparableLoss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sqdist_cloud(rng: &mut ChaCha8Rng, n: usize) -> CostMatrix {
    let d = rng.random_range(1..=3);
    squared_distances(&random_points(rng, n, d, 1.0))
}

pub fn marginals(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Histogram, Histogram) {
    if rng.random_bool(0.3) {
        (
            Histogram::uniform(n).unwrap(),
            Histogram::uniform(m).unwrap(),
        )
    } else {
        (
            random_histogram(rng, n, 0.05),
            random_histogram(rng, m, 0.05),
        )
    }
}

/// Random separable instance valid for the preset: KL gets a nonnegative first
/// cost and a strictly positive second cost.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    preset: LossPreset,
) -> (SeparableCost, Histogram, Histogram) {
    let (loss, c, cb) = match preset {
        LossPreset::Kl => (
            SeparableLoss::kl(),
            sqdist_cloud(rng, n),
            random_symmetric(rng, m, 0.1, 2.0),
        ),
        _ => {
            let c = if rng.random_bool(0.5) {
                sqdist_cloud(rng, n)
            } else {
                random_symmetric(rng, n, -1.0, 1.0)
            };
            (
                SeparableLoss::square(),
                c,
                random_symmetric(rng, m, -1.0, 1.0),
            )
        }
    };
    let (a, b) = marginals(rng, n, m);
    (SeparableCost::new(loss, c, cb).unwrap(), a, b)
}

/// Square loss on two squared-Euclidean costs: concave.
pub fn concave_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    uniform: bool,
) -> (SeparableCost, Histogram, Histogram) {
    let c = sqdist_cloud(rng, n);
    let cb = sqdist_cloud(rng, m);
    let (a, b) = if uniform {
        (
            Histogram::uniform(n).unwrap(),
            Histogram::uniform(m).unwrap(),
        )
    } else {
        marginals(rng, n, m)
    };
    (
        SeparableCost::new(SeparableLoss::square(), c, cb).unwrap(),
        a,
        b,
    )
}

/// Square loss with a CND first cost and either a CPD or a generic symmetric
/// second cost, redrawn until the concavity check fails. Needs `n, m >= 2`.
pub fn nonconcave_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
) -> (SeparableCost, Histogram, Histogram) {
    assert!(n >= 2 && m >= 2);
    loop {
        let c = sqdist_cloud(rng, n);
        let cb = if rng.random_bool(0.5) {
            CostMatrix::symmetric(-sqdist_cloud(rng, m).matrix()).unwrap()
        } else {
            random_symmetric(rng, m, -1.0, 1.0)
        };
        let loss = SeparableLoss::square();
        if separable_concavity_check(&loss, &c, &cb).unwrap().concave {
            continue;
        }
        let (a, b) = marginals(rng, n, m);
        return (SeparableCost::new(loss, c, cb).unwrap(), a, b);
    }
}
