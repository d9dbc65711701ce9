//! Deterministic instance generators.
//!
//! Every generator draws from a caller-supplied RNG; [`stream_rng`] derives
//! independent ChaCha8 streams from a seed so that parallel batches are
//! reproducible regardless of scheduling.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::measure::DiscreteMeasure;
use crate::structure::{same_order, RationalMeasure};

/// ChaCha8 generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes labels into a seed (splitmix64 finalizer).
pub fn mix_seed(seed: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(seed, |acc, l| {
        let mut z = acc ^ l.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(acc << 6).wrapping_add(acc >> 2);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    })
}

/// Uniform draws from `[-1, 1]^n`.
pub fn real_box<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Uniform draws from `[0, 1]^n`.
pub fn nonnegative_box<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..=1.0)).collect()
}

/// Real and imaginary parts uniform in `[-1, 1]`.
pub fn complex_box<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect()
}

/// Values with `floor <= |v| <= 1` and random sign.
pub fn invertible_real<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.random_range(floor..=1.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

/// Values in `[floor, 1]`.
pub fn positive_box<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(floor..=1.0)).collect()
}

/// Uniform point of the open simplex, by normalizing exponential draws.
pub fn simplex_measure<R: Rng>(rng: &mut R, n: usize) -> DiscreteMeasure {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
    DiscreteMeasure::from_masses(&draws).expect("exponential draws are positive")
}

/// Measure with positive integer masses in `1..=max_count`.
pub fn rational_measure<R: Rng>(rng: &mut R, n: usize, max_count: u64) -> RationalMeasure {
    let counts: Vec<u64> = (0..n).map(|_| rng.random_range(1..=max_count)).collect();
    RationalMeasure::new(counts).expect("positive counts")
}

/// A pair of real vectors with a common non-increasing rearrangement of
/// `f`, `g` and `fg`, presented in a random common order.
pub fn aligned_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let signed = rng.random_bool(0.5);
    let mut attempts = 0;
    let (mut f, mut g) = loop {
        attempts += 1;
        let (mut f, mut g) = if signed && attempts <= 64 {
            (real_box(rng, n), real_box(rng, n))
        } else {
            (nonnegative_box(rng, n), nonnegative_box(rng, n))
        };
        f.sort_by(|a, b| b.total_cmp(a));
        g.sort_by(|a, b| b.total_cmp(a));
        if same_order(&f, &g).is_ok_and(|a| a.aligned) {
            break (f, g);
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    f = order.iter().map(|&i| f[i]).collect();
    g = order.iter().map(|&i| g[i]).collect();
    (f, g)
}

/// Nonnegative vectors, both non-decreasing or both non-increasing along the index.
pub fn monotone_pair<R: Rng>(rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut f = nonnegative_box(rng, n);
    let mut g = nonnegative_box(rng, n);
    f.sort_by(|a, b| a.total_cmp(b));
    g.sort_by(|a, b| a.total_cmp(b));
    if rng.random_bool(0.5) {
        f.reverse();
        g.reverse();
    }
    (f, g)
}
