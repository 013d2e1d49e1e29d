//! Dense evaluation and quadrature helpers for integrals of high-degree
//! Laguerre functions, whose local frequency in the radial variable is
//! `sqrt(nu - r^2)`, plus the super-level weak-norm estimator.

use rayon::prelude::*;

use crate::error::Result;
use crate::measure::{sphere_constant, GaussLegendre};
use crate::special::{phi_recurrence, AlphaVector};

/// Radius beyond which `phi_n^a` is negligible for every purpose here.
pub fn support_radius(n: usize, a: f64) -> f64 {
    let nu = 4.0 * n as f64 + 2.0 * a + 2.0;
    (2.0 * nu).sqrt() + 4.0
}

fn local_frequency(nu: f64, r: f64) -> f64 {
    (nu - r * r).max(nu.powf(2.0 / 3.0)).sqrt()
}

/// Panel edges over `[lo, hi]` sized to a fixed fraction of the local
/// oscillation period, widening smoothly past the turning point.
fn oscillation_panels(n: usize, a: f64, lo: f64, hi: f64, period_fraction: f64) -> Vec<f64> {
    let nu = 4.0 * n as f64 + 2.0 * a + 2.0;
    let turning = nu.sqrt();
    let mut edges = vec![lo];
    let mut r = lo;
    while r < hi {
        let step = if r < 1.05 * turning {
            period_fraction * std::f64::consts::PI / local_frequency(nu, r.min(turning))
        } else {
            // decaying tail: geometric widening
            0.25 * (r - turning).max(period_fraction)
        };
        r = (r + step).min(hi);
        edges.push(r);
    }
    edges
}

/// `int_lo^hi g(r, phi_n^a(r)) dr` by composite Gauss-Legendre on panels a
/// fixed fraction of the local period wide. `period_fraction = 1/4`
/// resolves kinks of `|phi|^q`; `1/2` is enough for smooth integrands
/// like `phi^2`.
pub fn integrate_phi<F>(
    n: usize,
    a: f64,
    lo: f64,
    hi: f64,
    period_fraction: f64,
    g: F,
) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let gl = GaussLegendre::new(16)?;
    let edges = oscillation_panels(n, a, lo, hi, period_fraction);
    let partials: Vec<f64> = edges
        .par_windows(2)
        .map(|w| {
            gl.integrate(w[0], w[1], |r| {
                let phi = phi_recurrence(a, r * r).value_at(n);
                g(r, phi)
            })
        })
        .collect();
    Ok(partials.iter().sum())
}

/// `phi_n^a` sampled on a uniform grid over `(0, r_max]` dense enough for
/// the requested points per oscillation cycle. Returns the grid step and
/// the values; positions are `(i+1) h`.
pub fn phi_dense_values(n: usize, a: f64, r_max: f64, points_per_cycle: usize) -> (f64, Vec<f64>) {
    let nu = 4.0 * n as f64 + 2.0 * a + 2.0;
    let cycles = (std::f64::consts::PI * nu / 4.0) / (2.0 * std::f64::consts::PI) + 8.0;
    let points = ((cycles * points_per_cycle as f64).ceil() as usize).max(4096);
    let h = r_max / points as f64;
    let values: Vec<f64> = (0..points)
        .into_par_iter()
        .map(|i| {
            let r = (i as f64 + 1.0) * h;
            phi_recurrence(a, r * r).value_at(n)
        })
        .collect();
    (h, values)
}

/// Estimate of the super-level functional
/// `sup_delta delta (int_{|phi_n^A(|x|)| > delta} omega(|x|) d mu_alpha)^{1/2}`
/// over a finite delta ladder, via the radial reduction
/// `int g(|x|) d mu_alpha = c_alpha int g(r) r^{2|a|+2d-1} dr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakNormEstimate {
    pub value: f64,
    /// The ladder rung attaining the sup.
    pub argmax_delta: f64,
}

pub fn weak_super_level_norm<W: Fn(f64) -> f64 + Sync>(
    alpha: &AlphaVector,
    n: usize,
    omega: W,
    ladder: &[f64],
    points_per_cycle: usize,
) -> Result<WeakNormEstimate> {
    let a_red = alpha.reduced_type();
    let power = 2.0 * alpha.sum() + 2.0 * alpha.dim() as f64 - 1.0;
    let c_alpha = sphere_constant(alpha);
    let r_max = support_radius(n, a_red);
    let (h, values) = phi_dense_values(n, a_red, r_max, points_per_cycle);
    // midpoint masses omega(r) r^power h, reused across the ladder
    let masses: Vec<f64> = values
        .par_iter()
        .enumerate()
        .map(|(i, _)| {
            let r = (i as f64 + 1.0) * h;
            c_alpha * omega(r) * r.powf(power) * h
        })
        .collect();
    let mut best = (0.0_f64, ladder.first().copied().unwrap_or(0.0));
    for &delta in ladder {
        let meas: f64 = values
            .iter()
            .zip(&masses)
            .filter(|(v, _)| v.abs() > delta)
            .map(|(_, m)| m)
            .sum();
        let score = delta * meas.sqrt();
        if score > best.0 {
            best = (score, delta);
        }
    }
    Ok(WeakNormEstimate {
        value: best.0,
        argmax_delta: best.1,
    })
}

/// Geometric delta ladder centered on the `n^{-1/4}` scale the super-level
/// functional concentrates at.
pub fn default_delta_ladder(n: usize, rungs: usize) -> Vec<f64> {
    let center = (n as f64).powf(-0.25);
    let lo = 0.5 * center;
    let hi = 8.0 * center;
    let ratio = (hi / lo).powf(1.0 / (rungs as f64 - 1.0));
    (0..rungs).map(|k| lo * ratio.powi(k as i32)).collect()
}
