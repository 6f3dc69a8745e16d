//! Shared helpers for the integration tests.

#![allow(dead_code)]

/// Hurwitz zeta via Euler-Maclaurin; plenty of accuracy for CCDF ratios.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let cut = 20u64;
    let mut sum = 0.0;
    for i in 0..cut {
        sum += (a + i as f64).powf(-s);
    }
    let an = a + cut as f64;
    sum + an.powf(1.0 - s) / (s - 1.0) + 0.5 * an.powf(-s) + s * an.powf(-s - 1.0) / 12.0
}

/// Exact inverse-CDF sampler for a discrete power law on k >= k_min:
/// P(K >= k) = zeta(gamma, k) / zeta(gamma, k_min). The estimators under
/// test never see this construction.
pub fn sample_discrete_power_law(gamma: f64, k_min: u64, u: f64) -> u64 {
    let norm = hurwitz_zeta(gamma, k_min as f64);
    let ccdf = |k: u64| hurwitz_zeta(gamma, k as f64) / norm;
    let mut lo = k_min;
    let mut hi = k_min * 2;
    while ccdf(hi) > u {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ccdf(mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Draws n samples with a seeded generator.
pub fn power_law_samples(gamma: f64, k_min: u64, n: usize, seed: u64) -> Vec<u64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-12..1.0);
            sample_discrete_power_law(gamma, k_min, u)
        })
        .collect()
}
