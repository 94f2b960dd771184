//! Seeded Monte Carlo plumbing: seed derivation, chunked parallel sweeps,
//! and the unit-sphere sampler shared across modules.
//!
//! All randomness flows from a single master seed. Work is split into
//! fixed-size chunks, each chunk gets its own stream derived from the master
//! seed by a fixed stride, and results are reduced in chunk order. The output
//! is therefore bit-identical regardless of thread count.

use crate::scalar::{lit, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Samples per worker chunk.
pub const CHUNK: usize = 4096;

/// Derives a sub-seed from a master seed and a label (splitmix64 finalizer).
pub fn subseed(master: u64, label: &str) -> u64 {
    let mut z = master;
    for &b in label.as_bytes() {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(b as u64);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Stream `index` of the run identified by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs `total` Monte Carlo draws split into seeded chunks, in parallel,
/// and folds the per-chunk accumulators in deterministic chunk order.
pub fn chunked<A, F>(seed: u64, total: usize, per_sample: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng) -> A + Sync,
{
    let chunks: Vec<(u64, usize)> = (0..total.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(total - c * CHUNK)))
        .collect();
    chunks
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream(seed, c);
            (0..len).map(|_| per_sample(&mut rng)).collect::<Vec<A>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// One uniform point on `S^{n-1}`, by normalizing a standard Gaussian vector.
pub fn unit_vector<T: Real, R: Rng>(n: usize, rng: &mut R) -> Vec<T> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.iter().map(|x| lit(x / norm)).collect();
        }
    }
}

/// Standard Gaussian vector in `R^n`.
pub fn gaussian_vector<T: Real, R: Rng>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n).map(|_| lit(rng.sample::<f64, _>(StandardNormal))).collect()
}

/// Uniform point on the probability simplex `Δ^m` via sorted-uniform spacings.
pub fn simplex_point<T: Real, R: Rng>(m: usize, rng: &mut R) -> Vec<T> {
    if m == 1 {
        return vec![T::one()];
    }
    let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.gen::<f64>()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(m);
    let mut prev = 0.0;
    for &c in &cuts {
        out.push(lit(c - prev));
        prev = c;
    }
    out.push(lit(1.0 - prev));
    out
}

/// Mean and central-limit standard error of a sample.
pub fn mean_stderr<T: Real>(samples: &[T]) -> (T, T) {
    let n = crate::scalar::from_usize::<T>(samples.len());
    let mean = samples.iter().copied().sum::<T>() / n;
    if samples.len() < 2 {
        return (mean, T::zero());
    }
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>()
        / (n - T::one());
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_is_deterministic() {
        let a: Vec<f64> = chunked(7, 10_000, |rng| rng.gen::<f64>());
        let b: Vec<f64> = chunked(7, 10_000, |rng| rng.gen::<f64>());
        assert_eq!(a, b);
    }

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = stream(3, 0);
        for _ in 0..100 {
            let v: Vec<f64> = unit_vector(5, &mut rng);
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_points_sum_to_one() {
        let mut rng = stream(11, 0);
        for _ in 0..100 {
            let a: Vec<f64> = simplex_point(6, &mut rng);
            assert!(a.iter().all(|&x| x >= 0.0));
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subseed_separates_labels() {
        assert_ne!(subseed(1, "grid"), subseed(1, "mu"));
        assert_eq!(subseed(1, "grid"), subseed(1, "grid"));
    }
}
