//! Diagonal spectral multipliers: Bochner-Riesz and Cesaro means, the
//! maximal Riesz operator over a nested geometric grid of cutoffs, the
//! bump-multiplier square function, the critical summability index, and the
//! cell-discretized sup norm.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expansion::SpectralCoefficients;
use crate::gamma::ln_gamma;
use crate::special::AlphaVector;

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

/// A scalar function of the eigenvalue, applied diagonally to coefficient
/// tables.
#[derive(Clone)]
pub struct MultiplierSpec {
    tag: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl MultiplierSpec {
    pub fn new(tag: impl Into<String>, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            tag: tag.into(),
            func: Arc::new(func),
        }
    }

    pub fn eval(&self, eigenvalue: f64) -> f64 {
        (self.func)(eigenvalue)
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

impl std::fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MultiplierSpec({})", self.tag)
    }
}

/// Scale each entry at degree `n` by `m(e_n)`. A non-finite multiplier value
/// on an active eigenvalue is rejected.
pub fn apply_multiplier(
    coeffs: &SpectralCoefficients,
    m: &MultiplierSpec,
) -> Result<SpectralCoefficients> {
    let alpha = coeffs.alpha().clone();
    for n in 0..=coeffs.max_degree() {
        let v = m.eval(alpha.eigenvalue(n));
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "multiplier {} is {v} at eigenvalue e_{n}",
                m.tag
            )));
        }
    }
    Ok(coeffs.scale_by_degree(|n| m.eval(alpha.eigenvalue(n))))
}

/// Export an audit trace of the multiplier over the active spectrum as CSV
/// rows `e_n,m(e_n)`.
pub fn write_multiplier_trace<P: AsRef<Path>>(
    path: P,
    alpha: &AlphaVector,
    max_degree: usize,
    m: &MultiplierSpec,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "eigenvalue,multiplier")?;
    for n in 0..=max_degree {
        let e = alpha.eigenvalue(n);
        writeln!(out, "{:.17e},{:.17e}", e, m.eval(e))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Riesz and Cesaro means
// ---------------------------------------------------------------------------

/// Order and cutoff of a Riesz mean; `lambda >= 0` is required for the mean
/// to be defined at every cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszParams {
    pub lambda: f64,
    pub r: f64,
}

impl RieszParams {
    pub fn new(lambda: f64, r: f64) -> Result<Self> {
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda = {lambda} must be >= 0"
            )));
        }
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cutoff R = {r} must be positive"
            )));
        }
        Ok(Self { lambda, r })
    }
}

/// The multiplier `e -> (1 - e/R^2)_+^lambda`.
pub fn riesz_multiplier(params: RieszParams) -> MultiplierSpec {
    let RieszParams { lambda, r } = params;
    MultiplierSpec::new(format!("riesz(lambda={lambda},R={r})"), move |e| {
        let t = 1.0 - e / (r * r);
        if t <= 0.0 {
            0.0
        } else if lambda == 0.0 {
            1.0
        } else {
            t.powf(lambda)
        }
    })
}

/// Riesz mean of a table.
pub fn riesz_mean(
    coeffs: &SpectralCoefficients,
    params: RieszParams,
) -> Result<SpectralCoefficients> {
    apply_multiplier(coeffs, &riesz_multiplier(params))
}

/// `A_k(lambda) = Gamma(k + lambda + 1) / (Gamma(k+1) Gamma(lambda+1))`,
/// evaluated through log-Gamma differences.
pub fn cesaro_weight(k: usize, lambda: f64) -> f64 {
    let kf = k as f64;
    (ln_gamma(kf + lambda + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(lambda + 1.0)).exp()
}

/// Cesaro mean: entry at degree `n` scaled by `A_{K-n}(lambda)/A_K(lambda)`
/// for `n <= K = floor(R^2)`, zero beyond.
pub fn cesaro_mean(
    coeffs: &SpectralCoefficients,
    lambda: f64,
    r: f64,
) -> Result<SpectralCoefficients> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be >= 0"
        )));
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cutoff R = {r} must be positive"
        )));
    }
    let cap = (r * r).floor();
    if cap < 0.0 {
        return Ok(coeffs.scale_by_degree(|_| 0.0));
    }
    let cap = cap as usize;
    let denom = cesaro_weight(cap, lambda);
    Ok(coeffs.scale_by_degree(|n| {
        if n <= cap {
            cesaro_weight(cap - n, lambda) / denom
        } else {
            0.0
        }
    }))
}

// ---------------------------------------------------------------------------
// Maximal Riesz operator over a nested geometric cutoff grid
// ---------------------------------------------------------------------------

/// Geometric grid of cutoffs `R`, nested under refinement: level `k` places
/// `base_points * 2^k` intervals between the same endpoints, so every level
/// contains the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub base_points: usize,
    pub level: u32,
}

impl RGrid {
    pub fn geometric(r_min: f64, r_max: f64, base_points: usize) -> Result<Self> {
        if !(r_min > 0.0) || !(r_max > r_min) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if base_points < 2 {
            return Err(Error::InvalidArgument(
                "grid needs at least 2 points".into(),
            ));
        }
        Ok(Self {
            r_min,
            r_max,
            base_points,
            level: 0,
        })
    }

    /// Default grid for a table: covers `[sqrt(e_0), sqrt(e_N) (1+margin)]`
    /// with ratio about `1 + 1/(4N)`, the scale on which the Riesz
    /// multiplier varies near the spectral edge.
    pub fn for_table(alpha: &AlphaVector, max_degree: usize) -> Result<Self> {
        let r_min = alpha.eigenvalue(0).sqrt();
        let r_max = alpha.eigenvalue(max_degree).sqrt() * 1.25;
        let ratio = 1.0 + 1.0 / (4.0 * (max_degree.max(1)) as f64);
        let pts = ((r_max / r_min).ln() / ratio.ln()).ceil() as usize + 1;
        Self::geometric(r_min, r_max, pts.max(2))
    }

    /// Same endpoints, doubled density; the point set is a superset.
    pub fn refine(&self) -> Self {
        Self {
            level: self.level + 1,
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        (self.base_points - 1) * (1usize << self.level) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.len();
        let log_ratio = (self.r_max / self.r_min).ln() / (n - 1) as f64;
        (0..n)
            .map(|i| self.r_min * (log_ratio * i as f64).exp())
            .collect()
    }

    /// Whether the grid covers the active spectrum of a table.
    pub fn covers(&self, alpha: &AlphaVector, max_degree: usize) -> bool {
        self.r_min <= alpha.eigenvalue(0).sqrt()
            && self.r_max * self.r_max > alpha.eigenvalue(max_degree)
    }
}

/// Pointwise maximal Riesz values over the cutoff grid.
#[derive(Debug, Clone)]
pub struct MaximalRiesz {
    /// One value per query point: `max_R |S_R f(x)|` over the grid.
    pub values: Vec<f64>,
    /// False when the grid misses part of the active spectrum (reported,
    /// not fatal).
    pub grid_covers: bool,
    pub grid_points: usize,
}

/// `sup_R |S_R^lambda f(x)|` approximated over the grid, per query point.
pub fn maximal_riesz(
    coeffs: &SpectralCoefficients,
    lambda: f64,
    grid: &RGrid,
    x_grid: &[Vec<f64>],
) -> Result<MaximalRiesz> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be >= 0"
        )));
    }
    let alpha = coeffs.alpha();
    let n_max = coeffs.max_degree();
    let eigen: Vec<f64> = (0..=n_max).map(|n| alpha.eigenvalue(n)).collect();
    let rs = grid.values();
    let mut values = Vec::with_capacity(x_grid.len());
    for x in x_grid {
        let channels = coeffs.degree_channels(x)?;
        let mut best: f64 = 0.0;
        for &r in &rs {
            let r2 = r * r;
            let mut s = 0.0;
            for n in 0..=n_max {
                let t = 1.0 - eigen[n] / r2;
                if t > 0.0 {
                    s += if lambda == 0.0 {
                        channels[n]
                    } else {
                        t.powf(lambda) * channels[n]
                    };
                }
            }
            best = best.max(s.abs());
        }
        values.push(best);
    }
    Ok(MaximalRiesz {
        values,
        grid_covers: grid.covers(alpha, n_max),
        grid_points: rs.len(),
    })
}

// ---------------------------------------------------------------------------
// Critical index
// ---------------------------------------------------------------------------

/// The critical summability index and derived thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalIndex {
    /// `lambda(alpha, p) = max(2(|alpha|_1 + d)|1/2 - 1/p| - 1/2, 0)`.
    pub lambda: f64,
    /// The a.e.-convergence threshold `lambda(alpha, p)/2`.
    pub ae_threshold: f64,
    /// Whether `p` lies in the range where the index is known sharp:
    /// `2|alpha|_1 + 2d > 1` and `p > (4|alpha|_1+4d)/(2|alpha|_1+2d-1)`.
    pub in_sharpness_range: bool,
}

pub fn critical_index(alpha: &AlphaVector, p: f64) -> Result<CriticalIndex> {
    if p < 2.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 2")));
    }
    let m = alpha.sum() + alpha.dim() as f64; // |alpha|_1 + d
    let lambda = (2.0 * m * (0.5 - 1.0 / p).abs() - 0.5).max(0.0);
    let in_sharpness_range = 2.0 * m > 1.0 && p > 4.0 * m / (2.0 * m - 1.0);
    Ok(CriticalIndex {
        lambda,
        ae_threshold: lambda / 2.0,
        in_sharpness_range,
    })
}

// ---------------------------------------------------------------------------
// Bump functions and the square function
// ---------------------------------------------------------------------------

/// A smooth bump supported in `[1/8, 1/2]` with `|phi| <= 1`.
#[derive(Clone)]
pub struct BumpFunction {
    tag: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl BumpFunction {
    /// The standard bump `exp(1 - 1/(1-s^2))` rescaled so its support is
    /// `[1/8, 1/2]` and its maximum is 1.
    pub fn standard() -> Self {
        Self {
            tag: "standard".into(),
            func: Arc::new(|u| {
                let s = (u - 0.3125) / 0.1875;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }),
        }
    }

    /// Custom bump; the closure must vanish outside `[1/8, 1/2]` and stay
    /// within `[-1, 1]`. Evaluation clamps the support hard.
    pub fn custom(tag: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            tag: tag.into(),
            func: Arc::new(f),
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        if !(0.125..=0.5).contains(&u) {
            0.0
        } else {
            (self.func)(u)
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

impl std::fmt::Debug for BumpFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BumpFunction({})", self.tag)
    }
}

/// Uniform grid in `log t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TGrid {
    pub fn log_spaced(t_min: f64, t_max: f64, points: usize) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidArgument(
                "t grid needs at least 2 points".into(),
            ));
        }
        Ok(Self {
            t_min,
            t_max,
            points,
        })
    }

    /// Grid spanning every multiplier window of the table at `delta`, with
    /// the requested number of points across each window (>= 32 for
    /// production use; below 8 the square function rejects the grid).
    pub fn for_table(
        coeffs: &SpectralCoefficients,
        delta: f64,
        points_per_window: usize,
    ) -> Result<Self> {
        let e0 = coeffs.alpha().eigenvalue(0);
        let etop = coeffs.alpha().eigenvalue(coeffs.max_degree());
        let t_min = (e0 / (1.0 - delta / 8.0)).sqrt() * 0.98;
        let t_max = (etop / (1.0 - delta / 2.0)).sqrt() * 1.02;
        let window = window_log_width(delta);
        let points = ((t_max / t_min).ln() / window * points_per_window as f64).ceil() as usize + 2;
        Self::log_spaced(t_min, t_max, points)
    }

    pub fn values(&self) -> Vec<f64> {
        let dl = self.dlog();
        (0..self.points)
            .map(|i| self.t_min * (dl * i as f64).exp())
            .collect()
    }

    pub fn dlog(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.points - 1) as f64
    }
}

/// Width in `log t` of the window where the bump multiplier of one
/// eigenvalue is active: `t^2 in [e/(1-delta/8), e/(1-delta/2)]`.
fn window_log_width(delta: f64) -> f64 {
    0.5 * ((1.0 - delta / 8.0) / (1.0 - delta / 2.0)).ln().abs()
}

/// The square function at one point:
/// `(sum_grid |sum_n phi(delta^{-1}(1 - e_n/t^2)) s_n(x)|^2 dlog t)^{1/2}`,
/// trapezoidal in `log t`.
pub fn square_function(
    coeffs: &SpectralCoefficients,
    delta: f64,
    phi: &BumpFunction,
    x: &[f64],
    t_grid: &TGrid,
) -> Result<f64> {
    let channels = coeffs.degree_channels(x)?;
    square_function_channels(coeffs.alpha(), &channels, delta, phi, t_grid)
}

/// Same as [`square_function`] but on precomputed degree channels; the lab
/// experiments reuse channels across many points.
pub fn square_function_channels(
    alpha: &AlphaVector,
    channels: &[f64],
    delta: f64,
    phi: &BumpFunction,
    t_grid: &TGrid,
) -> Result<f64> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} must be in (0, 1/2)"
        )));
    }
    let window = window_log_width(delta);
    let dlog = t_grid.dlog();
    if dlog > window / 8.0 {
        return Err(Error::UnderResolvedGrid(format!(
            "t grid spacing {dlog:.3e} exceeds 1/8 of the multiplier window {window:.3e}"
        )));
    }
    let n_max = channels.len() - 1;
    let e0 = alpha.eigenvalue(0);
    let etop = alpha.eigenvalue(n_max);
    let need_min = (e0 / (1.0 - delta / 8.0)).sqrt();
    let need_max = (etop / (1.0 - delta / 2.0)).sqrt();
    if t_grid.t_min > need_min || t_grid.t_max < need_max {
        return Err(Error::UnderResolvedGrid(format!(
            "t grid [{}, {}] does not span the active window [{need_min}, {need_max}]",
            t_grid.t_min, t_grid.t_max
        )));
    }
    let eigen: Vec<f64> = (0..=n_max).map(|n| alpha.eigenvalue(n)).collect();
    let ts = t_grid.values();
    let mut sum = 0.0;
    let mut first = 0.0;
    let mut last = 0.0;
    for (i, &t) in ts.iter().enumerate() {
        let t2 = t * t;
        // the bump is active only for e in [t^2(1 - delta/2), t^2(1 - delta/8)];
        // restrict the degree loop to that window
        let e_lo = t2 * (1.0 - 0.5 * delta);
        let e_hi = t2 * (1.0 - 0.125 * delta);
        let n_lo = (((e_lo - eigen[0]) / 4.0).ceil().max(0.0)) as usize;
        if n_lo > n_max {
            continue;
        }
        let n_hi = ((((e_hi - eigen[0]) / 4.0).floor()).max(0.0) as usize).min(n_max);
        let mut v = 0.0;
        for n in n_lo..=n_hi {
            let arg = (1.0 - eigen[n] / t2) / delta;
            if (0.125..=0.5).contains(&arg) && channels[n] != 0.0 {
                v += phi.eval(arg) * channels[n];
            }
        }
        let v2 = v * v;
        sum += v2;
        if i == 0 {
            first = v2;
        }
        if i == ts.len() - 1 {
            last = v2;
        }
    }
    Ok(((sum - 0.5 * (first + last)) * dlog).max(0.0).sqrt())
}

/// The scalar factor `int |phi(delta^{-1}(1 - e/t^2))|^2 dt/t` for a single
/// eigenvalue, computed by substitution as `int phi(s)^2 delta/(2(1-delta s)) ds`
/// over the bump support. Reference path for separability checks.
pub fn square_function_scalar_factor(delta: f64, phi: &BumpFunction) -> Result<f64> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "delta = {delta} must be in (0, 1/2)"
        )));
    }
    let gl = crate::measure::GaussLegendre::new(32)?;
    Ok(crate::measure::integrate_panels(
        &|s: f64| {
            let b = phi.eval(s);
            b * b * delta / (2.0 * (1.0 - delta * s))
        },
        0.125,
        0.5,
        8,
        &gl,
    ))
}

// ---------------------------------------------------------------------------
// Discretized sup norm over N^2 cells
// ---------------------------------------------------------------------------

pub const DEFAULT_SUP_SAMPLES: usize = 64;

/// The cell-discretized norm with the per-cell sampling density attached;
/// the sup realized by sampling makes this a lower estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizedNorm {
    pub value: f64,
    pub samples_per_cell: usize,
}

/// `((1/N^2) sum_i sup_{cell i} |F|^q)^{1/q}` over the `N^2` cells of
/// `[0, 1]`, with the cell sup realized by dense sampling of the closed
/// cell (endpoints included).
pub fn discretized_norm<F: Fn(f64) -> f64>(f: F, n: usize, q: f64) -> Result<DiscretizedNorm> {
    discretized_norm_with(f, n, q, DEFAULT_SUP_SAMPLES)
}

pub fn discretized_norm_with<F: Fn(f64) -> f64>(
    f: F,
    n: usize,
    q: f64,
    samples_per_cell: usize,
) -> Result<DiscretizedNorm> {
    if q < 2.0 {
        return Err(Error::InvalidArgument(format!("q = {q} must be >= 2")));
    }
    if n == 0 || samples_per_cell < 2 {
        return Err(Error::InvalidArgument(
            "need N >= 1 and at least 2 samples per cell".into(),
        ));
    }
    let cells = n * n;
    let width = 1.0 / cells as f64;
    let mut acc = 0.0;
    for i in 0..cells {
        let lo = i as f64 * width;
        let mut sup: f64 = 0.0;
        for j in 0..samples_per_cell {
            let x = lo + width * j as f64 / (samples_per_cell - 1) as f64;
            sup = sup.max(f(x).abs());
        }
        acc += sup.powf(q);
    }
    Ok(DiscretizedNorm {
        value: (acc / cells as f64).powf(1.0 / q),
        samples_per_cell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{evaluate, project, Compositions};
    use crate::special::MultiIndex;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(seed: u64, alpha: AlphaVector, max_degree: usize) -> SpectralCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = alpha.dim();
        let mut coeffs = SpectralCoefficients::empty(alpha, max_degree);
        for n in 0..=max_degree {
            for mu in Compositions::new(n, d) {
                coeffs
                    .set(MultiIndex::new(mu), rng.gen_range(-1.0..1.0))
                    .unwrap();
            }
        }
        coeffs
    }

    #[test]
    fn multiplier_algebra() {
        let coeffs = random_table(1, AlphaVector::new(vec![0.5, 0.0]).unwrap(), 5);
        let one = MultiplierSpec::new("one", |_| 1.0);
        assert_eq!(apply_multiplier(&coeffs, &one).unwrap(), coeffs);

        let m1 = MultiplierSpec::new("m1", |e| 1.0 / (1.0 + e));
        let m2 = MultiplierSpec::new("m2", |e| e.sqrt());
        let chained = apply_multiplier(&apply_multiplier(&coeffs, &m2).unwrap(), &m1).unwrap();
        let prod = MultiplierSpec::new("m1*m2", move |e| (1.0 / (1.0 + e)) * e.sqrt());
        let direct = apply_multiplier(&coeffs, &prod).unwrap();
        for (mu, &c) in chained.iter() {
            // (c m2) m1 and c (m1 m2) differ by at most reassociation roundoff
            assert_relative_eq!(c, direct.get(mu), max_relative = 1e-15);
        }

        // indicator of one eigenvalue equals projection on that degree
        let alpha = coeffs.alpha().clone();
        let e2 = alpha.eigenvalue(2);
        let ind = MultiplierSpec::new("indicator", move |e| if e == e2 { 1.0 } else { 0.0 });
        assert_eq!(
            apply_multiplier(&coeffs, &ind).unwrap(),
            project(&coeffs, 2).unwrap()
        );

        // non-finite multiplier rejected
        let bad = MultiplierSpec::new("bad", |_| f64::NAN);
        assert!(apply_multiplier(&coeffs, &bad).is_err());
    }

    #[test]
    fn riesz_mean_basics() {
        let coeffs = random_table(2, AlphaVector::scalar(0.5).unwrap(), 6);
        let alpha = coeffs.alpha().clone();
        // lambda = 0 with R^2 above the top eigenvalue: identity
        let big_r = (alpha.eigenvalue(6) + 1.0).sqrt();
        let id = riesz_mean(&coeffs, RieszParams::new(0.0, big_r).unwrap()).unwrap();
        assert_eq!(id, coeffs);
        // R^2 <= e_0: zero table
        let small_r = (alpha.eigenvalue(0)).sqrt() * 0.99;
        let zero = riesz_mean(&coeffs, RieszParams::new(1.0, small_r).unwrap()).unwrap();
        assert!(zero.iter().all(|(_, &c)| c == 0.0));
        // single eigenfunction gets exactly the multiplier factor
        let unit = SpectralCoefficients::unit(alpha.clone(), MultiIndex::new(vec![3])).unwrap();
        let lam = 1.7;
        let r = (alpha.eigenvalue(4)).sqrt();
        let out = riesz_mean(&unit, RieszParams::new(lam, r).unwrap()).unwrap();
        let expect = (1.0 - alpha.eigenvalue(3) / (r * r)).powf(lam);
        assert_relative_eq!(
            out.get(&MultiIndex::new(vec![3])),
            expect,
            max_relative = 1e-15
        );

        assert!(RieszParams::new(-0.1, 1.0).is_err());
    }

    #[test]
    fn riesz_first_order_proximity() {
        // |S_R f(x) - partial sum(x)| <= lambda (e_N / R^2) sum |c phi(x)|
        // for R^2 >= 2 e_N and lambda >= 1
        let coeffs = random_table(3, AlphaVector::scalar(0.0).unwrap(), 8);
        let alpha = coeffs.alpha().clone();
        let e_top = alpha.eigenvalue(8);
        let x = [0.8];
        let channels = coeffs.degree_channels(&x).unwrap();
        let partial: f64 = channels.iter().sum();
        let abs_bound: f64 = channels.iter().map(|c| c.abs()).sum();
        for lam in [1.0, 2.0] {
            for r2_factor in [2.0, 4.0, 16.0] {
                let r = (r2_factor * e_top).sqrt();
                let sr = evaluate(
                    &riesz_mean(&coeffs, RieszParams::new(lam, r).unwrap()).unwrap(),
                    &x,
                )
                .unwrap();
                assert!(
                    (sr - partial).abs() <= lam * (e_top / (r * r)) * abs_bound + 1e-12,
                    "lambda={lam}, R^2={r2_factor} e_N"
                );
            }
        }
    }

    #[test]
    fn cesaro_weights_and_means() {
        // A_k(0) = 1: partial sum
        let coeffs = random_table(4, AlphaVector::scalar(0.5).unwrap(), 9);
        let r = 2.5; // R^2 = 6.25 -> K = 6
        let c0 = cesaro_mean(&coeffs, 0.0, r).unwrap();
        for (mu, &c) in coeffs.iter() {
            let expect = if mu.total() <= 6 { c } else { 0.0 };
            assert_eq!(c0.get(mu), expect);
        }
        // lambda = 1: weights (K - n + 1)/(K + 1)
        let c1 = cesaro_mean(&coeffs, 1.0, r).unwrap();
        for (mu, &c) in coeffs.iter() {
            let n = mu.total();
            let expect = if n <= 6 {
                c * (6.0 - n as f64 + 1.0) / 7.0
            } else {
                0.0
            };
            assert_relative_eq!(c1.get(mu), expect, max_relative = 1e-12);
        }
        // Gamma-ratio path against frozen extended-precision values
        assert_relative_eq!(cesaro_weight(3, 2.5), 14.4375, max_relative = 1e-12);
        assert_relative_eq!(
            cesaro_weight(137, 2.5),
            68232.916362030952,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            cesaro_weight(10000, 2.5),
            3010327710.9474417,
            max_relative = 1e-10
        );
        // lambda = 0 equivalence with the Riesz mean at matching cutoff
        let riesz0 = riesz_mean(&coeffs, RieszParams::new(0.0, r).unwrap()).unwrap();
        // Riesz truncates at e_n < R^2, Cesaro at n <= floor(R^2); both are
        // sharp truncations, compare through their own definitions
        assert!(riesz0.iter().all(|(mu, &c)| c == 0.0
            || (coeffs.get(mu) == c && coeffs.alpha().eigenvalue(mu.total()) < r * r)));
    }

    #[test]
    fn maximal_riesz_properties() {
        let coeffs = random_table(5, AlphaVector::scalar(0.5).unwrap(), 6);
        let alpha = coeffs.alpha().clone();
        let grid = RGrid::for_table(&alpha, 6).unwrap();
        let xs: Vec<Vec<f64>> = vec![vec![0.5], vec![1.2], vec![2.0]];

        // single eigenfunction: grid sup within the last-R factor of |phi(x)|
        let unit = SpectralCoefficients::unit(alpha.clone(), MultiIndex::new(vec![2])).unwrap();
        let lam = 1.0;
        let res = maximal_riesz(&unit, lam, &grid, &xs).unwrap();
        assert!(res.grid_covers);
        let e2 = alpha.eigenvalue(2);
        for (x, got) in xs.iter().zip(&res.values) {
            let target = evaluate(&unit, x).unwrap().abs();
            let floor = (1.0 - e2 / (grid.r_max * grid.r_max)).powf(lam) * target;
            assert!(*got <= target * (1.0 + 1e-12));
            assert!(*got >= floor - 1e-15);
        }

        // lambda = 0: maximal >= |partial sum| whenever the grid tops the spectrum
        let res0 = maximal_riesz(&coeffs, 0.0, &grid, &xs).unwrap();
        for (x, got) in xs.iter().zip(&res0.values) {
            let partial = evaluate(&coeffs, x).unwrap().abs();
            assert!(*got >= partial - 1e-12);
        }

        // monotone in lambda for a nonnegative single-eigenfunction input:
        // each grid factor (1 - e/R^2)_+^lambda is nonincreasing in lambda
        let low = maximal_riesz(&unit, 0.5, &grid, &xs).unwrap();
        let high = maximal_riesz(&unit, 2.0, &grid, &xs).unwrap();
        for (l, h) in low.values.iter().zip(&high.values) {
            assert!(h <= &(l + 1e-15));
        }

        // refinement makes a superset of cutoffs: values never decrease
        let fine = grid.refine();
        let vs_coarse = maximal_riesz(&coeffs, 0.7, &grid, &xs).unwrap();
        let vs_fine = maximal_riesz(&coeffs, 0.7, &fine, &xs).unwrap();
        let coarse_values = grid.values();
        let fine_values = fine.values();
        for c in &coarse_values {
            assert!(fine_values.iter().any(|f| (f / c - 1.0).abs() < 1e-12));
        }
        for (a, b) in vs_coarse.values.iter().zip(&vs_fine.values) {
            assert!(b >= &(a - 1e-12));
        }
    }

    #[test]
    fn critical_index_cases() {
        let a0 = AlphaVector::scalar(0.0).unwrap();
        assert_eq!(critical_index(&a0, 2.0).unwrap().lambda, 0.0);
        assert_relative_eq!(
            critical_index(&a0, 6.0).unwrap().lambda,
            1.0 / 6.0,
            max_relative = 1e-14
        );
        // 2(|alpha|_1 + d) <= 1: zero for every p
        let small = AlphaVector::scalar(-0.8).unwrap();
        for p in [2.0, 4.0, 16.0, 1e6] {
            let ci = critical_index(&small, p).unwrap();
            assert_eq!(ci.lambda, 0.0);
            assert!(!ci.in_sharpness_range);
        }
        // sharpness predicate: d=1, alpha=0 -> p > 4
        assert!(!critical_index(&a0, 3.9).unwrap().in_sharpness_range);
        assert!(critical_index(&a0, 4.1).unwrap().in_sharpness_range);
        assert!(critical_index(&a0, 1.5).is_err());
    }

    #[test]
    fn bump_support_and_max() {
        let b = BumpFunction::standard();
        assert_eq!(b.eval(0.1), 0.0);
        assert_eq!(b.eval(0.51), 0.0);
        assert_relative_eq!(b.eval(0.3125), 1.0, max_relative = 1e-15);
        assert!(b.eval(0.2) > 0.0 && b.eval(0.2) < 1.0);
    }

    #[test]
    fn square_function_zero_and_separable() {
        let alpha = AlphaVector::scalar(0.5).unwrap();
        let zero = SpectralCoefficients::empty(alpha.clone(), 4);
        let phi = BumpFunction::standard();
        let delta = 0.25;
        let grid = TGrid::for_table(&zero, delta, 32).unwrap();
        assert_eq!(
            square_function(&zero, delta, &phi, &[1.0], &grid).unwrap(),
            0.0
        );

        // single eigenfunction: S(x)^2 = |phi_mu(x)|^2 * scalar factor; the
        // trapezoid error falls fast with grid density since the bump is
        // smooth and compactly supported inside the grid span
        let unit = SpectralCoefficients::unit(alpha.clone(), MultiIndex::new(vec![3])).unwrap();
        let grid = TGrid::for_table(&unit, delta, 1024).unwrap();
        let x = [0.9];
        let s = square_function(&unit, delta, &phi, &x, &grid).unwrap();
        let scalar = square_function_scalar_factor(delta, &phi).unwrap();
        let target = evaluate(&unit, &x).unwrap().abs() * scalar.sqrt();
        assert_relative_eq!(s, target, max_relative = 1e-6);

        // under-resolved grid rejected
        let coarse = TGrid::log_spaced(grid.t_min, grid.t_max, 8).unwrap();
        assert!(matches!(
            square_function(&unit, delta, &phi, &x, &coarse),
            Err(Error::UnderResolvedGrid(_))
        ));
    }

    #[test]
    fn square_function_scale_invariance() {
        // the scalar dt/t integral is invariant under e -> c^2 e with the
        // grid scaled t -> ct; compare two eigenvalues on scaled grids
        let phi = BumpFunction::standard();
        let delta = 0.2;
        let alpha = AlphaVector::scalar(0.0).unwrap();
        let unit3 = SpectralCoefficients::unit(alpha.clone(), MultiIndex::new(vec![3])).unwrap();
        let unit9 = SpectralCoefficients::unit(alpha.clone(), MultiIndex::new(vec![9])).unwrap();
        // choose x where both eigenfunctions are nonzero; normalize away
        // the pointwise factor to isolate the scalar integral
        let x = [0.7];
        let g3 = TGrid::for_table(&unit3, delta, 64).unwrap();
        let g9 = TGrid::for_table(&unit9, delta, 64).unwrap();
        let s3 = square_function(&unit3, delta, &phi, &x, &g3).unwrap()
            / evaluate(&unit3, &x).unwrap().abs();
        let s9 = square_function(&unit9, delta, &phi, &x, &g9).unwrap()
            / evaluate(&unit9, &x).unwrap().abs();
        assert_relative_eq!(s3, s9, max_relative = 2e-3);
    }

    #[test]
    fn multiplier_trace_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let alpha = AlphaVector::scalar(0.5).unwrap();
        let m = riesz_multiplier(RieszParams::new(1.0, 4.0).unwrap());
        write_multiplier_trace(&path, &alpha, 5, &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("eigenvalue,multiplier\n"));
        assert_eq!(text.lines().count(), 7);
        // first row carries e_0 = 3 and (1 - 3/16)
        let row: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|t| t.parse().unwrap())
            .collect();
        assert_relative_eq!(row[0], 3.0, max_relative = 1e-15);
        assert_relative_eq!(row[1], 1.0 - 3.0 / 16.0, max_relative = 1e-15);
    }

    #[test]
    fn maximal_riesz_reports_coverage() {
        let coeffs = random_table(9, AlphaVector::scalar(0.0).unwrap(), 12);
        // grid stopping short of the top eigenvalue: flagged, not fatal
        let short = RGrid::geometric(1.0, coeffs.alpha().eigenvalue(4).sqrt(), 16).unwrap();
        let res = maximal_riesz(&coeffs, 0.5, &short, &[vec![1.0]]).unwrap();
        assert!(!res.grid_covers);
        assert_eq!(res.grid_points, 16);
    }

    #[test]
    fn discretized_norm_cases() {
        // constant function: 1 for all N, q
        for n in [1usize, 3, 5] {
            for q in [2.0, 4.0] {
                assert_relative_eq!(
                    discretized_norm(|_| 1.0, n, q).unwrap().value,
                    1.0,
                    max_relative = 1e-14
                );
            }
        }
        // indicator of the first cell: N^{-2/q}
        let n = 4usize;
        let q = 3.0;
        let cells = (n * n) as f64;
        let ind = |x: f64| if x < 1.0 / cells { 1.0 } else { 0.0 };
        assert_relative_eq!(
            discretized_norm(ind, n, q).unwrap().value,
            cells.powf(-1.0 / q),
            max_relative = 1e-14
        );
        // F(x) = x at N=4, q=2: frozen exact finite sum
        assert_relative_eq!(
            discretized_norm(|x| x, 4, 2.0).unwrap().value,
            0.60434623768167863,
            max_relative = 1e-14
        );
        assert!(discretized_norm(|x| x, 4, 1.5).is_err());
    }
}
