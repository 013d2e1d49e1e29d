//! Log-log slope fitting with a bootstrap standard error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`, with a seeded bootstrap
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_points: usize,
    /// Abscissa span in decades, `log10(x_max / x_min)`.
    pub decades: f64,
}

fn ls_slope(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Fit `ln y = slope ln x + b` and bootstrap the slope by resampling the
/// points with replacement (`resamples >= 200` for production use).
pub fn fit_loglog(samples: &[(f64, f64)], resamples: usize, seed: u64) -> Result<SlopeFit> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument(
            "slope fit needs at least 2 samples".into(),
        ));
    }
    let mut logs = Vec::with_capacity(samples.len());
    for &(x, y) in samples {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "log-log fit requires positive samples, got ({x}, {y})"
            )));
        }
        logs.push((x.ln(), y.ln()));
    }
    let (slope, intercept) = ls_slope(&logs);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(resamples);
    let mut draw = Vec::with_capacity(logs.len());
    for _ in 0..resamples {
        draw.clear();
        for _ in 0..logs.len() {
            draw.push(logs[rng.gen_range(0..logs.len())]);
        }
        // degenerate resamples (all equal abscissas) are skipped
        let x0 = draw[0].0;
        if draw.iter().all(|p| p.0 == x0) {
            continue;
        }
        boot.push(ls_slope(&draw).0);
    }
    let stderr = if boot.len() > 1 {
        let mean = boot.iter().sum::<f64>() / boot.len() as f64;
        (boot.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (boot.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };

    let xs_min = samples.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xs_max = samples
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        n_points: samples.len(),
        decades: (xs_max / xs_min).log10(),
    })
}

/// Half-octave geometric ladder of integers from `lo` to `hi` inclusive.
pub fn half_octave_range(lo: usize, hi: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut v = lo as f64;
    while (v.round() as usize) < hi {
        out.push(v.round() as usize);
        v *= std::f64::consts::SQRT_2;
    }
    out.push(hi);
    out.dedup();
    out
}
