//! Seedable RNG plumbing: stream derivation and Poisson count sampling.
//!
//! Every stochastic routine in this crate takes either an explicit seed or an
//! explicit generator, so identical inputs give bit-identical outputs on any
//! platform. Parallel replications derive independent streams from one master
//! seed via [`stream`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The generator used throughout the crate.
pub type Generator = ChaCha12Rng;

/// SplitMix64 finalizer, used to hash stream indices.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed for stream `index` of a master `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

/// Builds the generator for stream `index` of a master `seed`.
pub fn stream(seed: u64, index: u64) -> Generator {
    Generator::seed_from_u64(derive_seed(seed, index))
}

/// Builds the generator for a plain seed (stream 0 semantics are not implied;
/// this is the entry point for single-sample reproducibility).
pub fn generator(seed: u64) -> Generator {
    Generator::seed_from_u64(seed)
}

/// Draws a Poisson count with the given mean.
///
/// Inversion by sequential search below mean 30, PTRS transformed rejection
/// above, so the cost stays bounded for large means.
pub fn poisson(rng: &mut impl Rng, mean: f64) -> u64 {
    assert!(mean.is_finite() && mean >= 0.0, "Poisson mean must be finite and non-negative");
    if mean == 0.0 {
        0
    } else if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion(rng: &mut impl Rng, mean: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if k > 2000 {
            // Unreachable for mean < 30 with u < 1; guards against NaN inputs.
            break;
        }
    }
    k
}

/// PTRS rejection sampler (Hörmann's transformed rejection with squeeze),
/// valid for mean >= 10.
fn poisson_ptrs(rng: &mut impl Rng, mean: f64) -> u64 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mean = mean.ln();
    loop {
        let u: f64 = rng.gen::<f64>() - 0.5;
        let v: f64 = rng.gen();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if (v * inv_alpha / (a / (us * us) + b)).ln() <= k * ln_mean - mean - ln_factorial(k as u64)
        {
            return k as u64;
        }
    }
}

/// ln(k!) via direct product for small k and a Stirling series above.
fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        let mut acc = 0.0;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        acc
    } else {
        let x = k as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        0.5 * (std::f64::consts::TAU).ln() + (x + 0.5) * x.ln() - x
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}
