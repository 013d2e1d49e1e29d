//! Built-in test functions and coefficient tables for the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::expansion::{Compositions, SpectralCoefficients};
use crate::special::{AlphaVector, MultiIndex};

/// Smooth compactly supported bump centered at `center` with the given
/// half-width, normalized to 1 at the center.
pub fn smooth_bump(center: f64, halfwidth: f64) -> impl Fn(f64) -> f64 + Copy {
    move |x: f64| {
        let s = (x - center) / halfwidth;
        if s.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

/// Random band-limited table: independent Gaussian coefficients damped by
/// `(1 + n)^{-decay}` per total degree.
pub fn random_band_limited(
    alpha: &AlphaVector,
    max_degree: usize,
    decay: f64,
    seed: u64,
) -> SpectralCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = alpha.dim();
    let mut coeffs = SpectralCoefficients::empty(alpha.clone(), max_degree);
    for n in 0..=max_degree {
        let damp = (1.0 + n as f64).powf(-decay);
        for mu in Compositions::new(n, d) {
            let g: f64 = rng.sample(StandardNormal);
            coeffs.set(MultiIndex::new(mu), g * damp).unwrap();
        }
    }
    coeffs
}

/// Dyadic-block table: coefficients of magnitude one with seeded random
/// signs on total degrees in `[n_lo, n_hi]`, zero elsewhere.
pub fn dyadic_block(
    alpha: &AlphaVector,
    n_lo: usize,
    n_hi: usize,
    seed: u64,
) -> SpectralCoefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = alpha.dim();
    let mut coeffs = SpectralCoefficients::empty(alpha.clone(), n_hi);
    for n in n_lo..=n_hi {
        for mu in Compositions::new(n, d) {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            coeffs.set(MultiIndex::new(mu), sign).unwrap();
        }
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support() {
        let b = smooth_bump(1.5, 1.0);
        assert_eq!(b(0.4), 0.0);
        assert_eq!(b(2.6), 0.0);
        assert!(b(1.5) == 1.0_f64.min(1.0));
        assert!(b(1.0) > 0.0);
    }

    #[test]
    fn tables_are_seeded() {
        let alpha = AlphaVector::scalar(0.5).unwrap();
        let a = random_band_limited(&alpha, 8, 2.0, 11);
        let b = random_band_limited(&alpha, 8, 2.0, 11);
        let c = random_band_limited(&alpha, 8, 2.0, 12);
        assert_eq!(a, b);
        assert_ne!(a, c);

        let blk = dyadic_block(&alpha, 4, 8, 3);
        for (mu, &v) in blk.iter() {
            assert!(mu.total() >= 4 && mu.total() <= 8);
            assert!(v == 1.0 || v == -1.0);
        }
    }
}
