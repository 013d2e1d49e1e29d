//! Heat kernel of the operator in closed form and as a truncated
//! eigenfunction series, the bilinear generating identity behind the closed
//! form, and the Gaussian upper-bound probe.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expansion::{self, projection_kernel, DEFAULT_COMPOSITION_CAP};
use crate::gamma::ln_gamma;
use crate::measure::{measure_ball, BallSpec, DEFAULT_MC_POINTS};
use crate::special::{bessel_i_ratio_log, AlphaVector};

/// Diffusion time and type parameter of a heat-kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatParams {
    pub t: f64,
    pub alpha: AlphaVector,
}

impl HeatParams {
    pub fn new(t: f64, alpha: AlphaVector) -> Result<Self> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "diffusion time {t} must be positive"
            )));
        }
        Ok(Self { t, alpha })
    }
}

/// ln of the closed-form heat kernel. All exponential and Bessel factors
/// are assembled in the log domain with one final exponentiation by the
/// caller; small `t` makes the coupling huge and the Gaussian factor tiny
/// in opposite directions.
pub fn heat_kernel_log(p: &HeatParams, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = p.alpha.dim();
    if x.len() != d || y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len().max(y.len()),
        });
    }
    if x.iter().chain(y.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(
            "all coordinates must be positive".into(),
        ));
    }
    let t = p.t;
    // c = 2 e^{-2t} / (1 - e^{-4t}) = 1/sinh(2t)
    let log_c = -(2.0 * t).sinh().ln();
    let c = log_c.exp();
    let coth = 1.0 / (2.0 * t).tanh();
    let norm2: f64 = x.iter().map(|v| v * v).sum::<f64>() + y.iter().map(|v| v * v).sum::<f64>();
    let mut log_k = d as f64 * log_c - 0.5 * coth * norm2;
    for j in 0..d {
        let a = p.alpha[j];
        let z = c * x[j] * y[j];
        // I_a(z)/(x y)^a = (I_a(z)/z^a) c^a; the ratio form stays finite
        // as x y -> 0
        log_k += bessel_i_ratio_log(a, z)? + a * log_c;
    }
    Ok(log_k)
}

/// Closed-form heat kernel value.
pub fn heat_kernel_closed(p: &HeatParams, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(heat_kernel_log(p, x, y)?.exp())
}

/// Truncation order making the series tail `e^{-4tN}` fall below `tol`
/// (with slack for the polynomial composition growth in dimension `d`).
pub fn series_order_for_tolerance(t: f64, d: usize, tol: f64) -> usize {
    ((tol.recip().ln() / (4.0 * t)).ceil() as usize).max(1) + 8 * d
}

/// Heat kernel as the truncated eigenfunction series
/// `sum_{n <= N} e^{-t e_n} P_n(x, y)`.
pub fn heat_kernel_series(p: &HeatParams, x: &[f64], y: &[f64], n_terms: usize) -> Result<f64> {
    let mut sum = 0.0;
    for n in 0..=n_terms {
        let e = p.alpha.eigenvalue(n);
        sum += (-p.t * e).exp() * projection_kernel(n, &p.alpha, x, y, DEFAULT_COMPOSITION_CAP)?;
    }
    Ok(sum)
}

/// Both sides of the bilinear generating identity for the Laguerre family,
/// with a geometric estimate of the truncation tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub tail_estimate: f64,
}

/// Partial sum `sum_{k<=N} (Gamma(k+1)/Gamma(k+a+1)) L_k^a(x) L_k^a(y) z^k`
/// against the closed form
/// `(1-z)^{-1} (xyz)^{-a/2} e^{-z(x+y)/(1-z)} I_a(2 sqrt(xyz)/(1-z))`.
/// The closed form is evaluated through the Bessel ratio so `x = 0` or
/// `y = 0` stay finite for `a > 0`.
pub fn mehler_identity_check(
    a: f64,
    z: f64,
    x: f64,
    y: f64,
    n_terms: usize,
) -> Result<MehlerCheck> {
    if a <= -1.0 || !a.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "type parameter {a} must be > -1"
        )));
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::InvalidArgument(format!(
            "z = {z} must lie in [0, 1)"
        )));
    }
    if x < 0.0 || y < 0.0 {
        return Err(Error::InvalidArgument("arguments must be >= 0".into()));
    }
    // lhs via the 0-normalized polynomials: term_k = tildeL_k(x) tildeL_k(y) z^k / Gamma(a+1)
    let tx = expansion::laguerre_tilde_all(n_terms, a, x);
    let ty = expansion::laguerre_tilde_all(n_terms, a, y);
    let inv_gamma = (-ln_gamma(a + 1.0)).exp();
    let mut lhs = 0.0;
    let mut zk = 1.0;
    let mut last_terms: (f64, f64) = (0.0, 0.0);
    for k in 0..=n_terms {
        let term = tx[k] * ty[k] * zk * inv_gamma;
        lhs += term;
        last_terms = (last_terms.1, term);
        zk *= z;
    }
    let tail_estimate = if z > 0.0 {
        last_terms.0.abs().max(last_terms.1.abs()) * z / (1.0 - z)
    } else {
        0.0
    };

    // rhs = (1-z)^{-1} (2/(1-z))^a e^{-z(x+y)/(1-z)} (I_a(w)/w^a), w = 2 sqrt(xyz)/(1-z)
    let w = 2.0 * (x * y * z).sqrt() / (1.0 - z);
    let log_rhs = -(1.0 - z).ln() + a * (2.0f64.ln() - (1.0 - z).ln()) - z * (x + y) / (1.0 - z)
        + bessel_i_ratio_log(a, w)?;
    Ok(MehlerCheck {
        lhs,
        rhs: log_rhs.exp(),
        tail_estimate,
    })
}

// ---------------------------------------------------------------------------
// Gaussian bound probe
// ---------------------------------------------------------------------------

/// One probe row: the measured candidate constant at a given decay rate,
/// time, and grid refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub t: f64,
    pub c: f64,
    pub measured_c: f64,
    pub grid_level: u32,
}

/// Max over the point pairs of
/// `K(t,x,y) e^{dt} mu(Q(x, sqrt t)) exp(+c |x-y|^2 / t)` -- a measured
/// candidate for the constant in the Gaussian upper bound. The product is
/// evaluated in the log domain.
pub fn gaussian_bound_probe(p: &HeatParams, pairs: &[(Vec<f64>, Vec<f64>)], c: f64) -> Result<f64> {
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "decay rate c = {c} must be positive"
        )));
    }
    let d = p.alpha.dim() as f64;
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in pairs {
        let log_k = heat_kernel_log(p, x, y)?;
        let q = BallSpec::cube(x.clone(), p.t.sqrt())?;
        let mass = measure_ball(&q, &p.alpha, DEFAULT_MC_POINTS, 0)?.value;
        let dist2: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        let log_probe = log_k + d * p.t + mass.ln() + c * dist2 / p.t;
        worst = worst.max(log_probe);
    }
    Ok(worst.exp())
}

/// Deterministic lattice of point pairs in `(0, extent]^d`, with
/// `2^level + 2` points per axis. Level `l+1` contains a strictly denser
/// lattice over the same box.
pub fn probe_pair_grid(dim: usize, extent: f64, level: u32) -> Vec<(Vec<f64>, Vec<f64>)> {
    let per_axis = (1usize << level) + 2;
    let coords: Vec<f64> = (1..=per_axis)
        .map(|i| extent * i as f64 / per_axis as f64)
        .collect();
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &points {
            for &c in &coords {
                let mut q = p.clone();
                q.push(c);
                next.push(q);
            }
        }
        points = next;
    }
    let mut pairs = Vec::new();
    for (i, x) in points.iter().enumerate() {
        for y in points.iter().skip(i) {
            pairs.push((x.clone(), y.clone()));
        }
    }
    pairs
}

/// Serialize probe rows as CSV `t,c,measured_C,grid_level`.
pub fn write_probe_csv<P: AsRef<Path>>(path: P, samples: &[ProbeSample]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,c,measured_C,grid_level")?;
    for s in samples {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{}",
            s.t, s.c, s.measured_c, s.grid_level
        )?;
    }
    Ok(())
}
