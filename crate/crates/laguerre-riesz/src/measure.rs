//! Quadrature and measure utilities for the weighted space
//! `((0,inf)^d, x_1^{2a_1+1} ... x_d^{2a_d+1} dx)`: Gauss rules in the
//! squared variable, tensor-product inner products and norms, ball and cube
//! measures, doubling ratios, and Muckenhoupt constants.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::special::{weight_orthonormal_recurrence, AlphaVector};

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigen solver (implicit QL with shifts)
// ---------------------------------------------------------------------------

/// Eigenvalues of a symmetric tridiagonal matrix, ascending. When `z` is
/// given it is rotated along; initializing it to the first basis vector
/// yields the first components of the normalized eigenvectors, from which
/// Gauss weights follow as `mu0 * z_i^2`.
fn imtqlx(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Err(Error::QuadratureFailure("empty matrix".into()));
    }
    if n > 1 {
        e[n - 1] = 0.0;
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m < n - 1 {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::QuadratureFailure(
                        "tridiagonal QL iteration did not converge".into(),
                    ));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = (g * g + 1.0).sqrt();
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let mut s = 1.0;
                let mut c = 1.0;
                let mut p = 0.0;
                let mut underflowed = false;
                for i in (l..m).rev() {
                    let mut f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        // rotation vanished: recover and restart this row
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflowed = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if let Some(zz) = z.as_deref_mut() {
                        f = zz[i + 1];
                        zz[i + 1] = s * zz[i] + c * f;
                        zz[i] = c * zz[i] - s * f;
                    }
                }
                if underflowed {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
    }
    // sort ascending, carrying z
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let d_sorted: Vec<f64> = idx.iter().map(|&i| d[i]).collect();
    d.copy_from_slice(&d_sorted);
    if let Some(zz) = z {
        let z_sorted: Vec<f64> = idx.iter().map(|&i| zz[i]).collect();
        zz.copy_from_slice(&z_sorted);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gauss-Legendre and Gauss-Jacobi rules (finite intervals)
// ---------------------------------------------------------------------------

/// Nodes and weights from a three-term recurrence via Golub-Welsch.
fn golub_welsch(
    mut diag: Vec<f64>,
    mut offdiag: Vec<f64>,
    mu0: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    imtqlx(&mut diag, &mut offdiag, Some(&mut z))?;
    let weights = z.iter().map(|&v| mu0 * v * v).collect();
    Ok((diag, weights))
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::QuadratureFailure("order must be >= 1".into()));
        }
        let diag = vec![0.0; order];
        let mut off = vec![0.0; order];
        for k in 1..order {
            let kf = k as f64;
            off[k - 1] = kf / ((2.0 * kf + 1.0) * (2.0 * kf - 1.0)).sqrt();
        }
        let (nodes, weights) = golub_welsch(diag, off, 2.0)?;
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * t);
        }
        half * sum
    }
}

/// Composite Gauss-Legendre over equal panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    gl: &GaussLegendre,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        sum += gl.integrate(a + i as f64 * h, a + (i + 1) as f64 * h, f);
    }
    sum
}

/// Composite Gauss-Legendre with panel edges graded geometrically toward `a`;
/// handles integrable endpoint singularities like `x^c`, `c > -1`, and steep
/// but smooth integrands concentrated at the left edge.
pub fn integrate_panels_graded<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    gl: &GaussLegendre,
) -> f64 {
    let len = b - a;
    let mut sum = 0.0;
    let mut hi = b;
    for i in 0..panels {
        let lo = if i + 1 == panels {
            a
        } else {
            a + len * 2f64.powi(-(i as i32 + 1))
        };
        sum += gl.integrate(lo, hi, f);
        hi = lo;
    }
    sum
}

/// Gauss-Jacobi rule for `int_0^1 f(s) s^{b1} (1-s)^{b2} ds`.
#[derive(Debug, Clone)]
pub struct GaussJacobi01 {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi01 {
    pub fn new(order: usize, b1: f64, b2: f64) -> Result<Self> {
        if order < 1 {
            return Err(Error::QuadratureFailure("order must be >= 1".into()));
        }
        if b1 <= -1.0 || b2 <= -1.0 {
            return Err(Error::QuadratureFailure(
                "Jacobi exponents must be > -1".into(),
            ));
        }
        // weight (1-t)^A (1+t)^B on [-1,1] with A = b2, B = b1
        let (aa, bb) = (b2, b1);
        let mut diag = vec![0.0; order];
        let mut off = vec![0.0; order];
        diag[0] = (bb - aa) / (aa + bb + 2.0);
        for k in 1..order {
            let kf = k as f64;
            let den = 2.0 * kf + aa + bb;
            diag[k] = (bb * bb - aa * aa) / (den * (den + 2.0));
            let o2 = if k == 1 {
                4.0 * (aa + 1.0) * (bb + 1.0) / ((aa + bb + 2.0).powi(2) * (aa + bb + 3.0))
            } else {
                4.0 * kf * (kf + aa) * (kf + bb) * (kf + aa + bb)
                    / (den.powi(2) * (den + 1.0) * (den - 1.0))
            };
            off[k - 1] = o2.sqrt();
        }
        let mu0 =
            ((aa + bb + 1.0) * std::f64::consts::LN_2 + ln_gamma(aa + 1.0) + ln_gamma(bb + 1.0)
                - ln_gamma(aa + bb + 2.0))
            .exp();
        let (t_nodes, t_weights) = golub_welsch(diag, off, mu0)?;
        // map t in [-1,1] to s = (1+t)/2 and fold in the 2^{-b1-b2-1} factor
        let scale = (-(b1 + b2 + 1.0) * std::f64::consts::LN_2).exp();
        let nodes = t_nodes.iter().map(|&t| 0.5 * (1.0 + t)).collect();
        let weights = t_weights.iter().map(|&w| w * scale).collect();
        Ok(Self { nodes, weights })
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// The half-line rule in the squared variable
// ---------------------------------------------------------------------------

/// Gauss rule realizing `int_0^inf g(x) x^{2a+1} dx` for Gaussian-decaying
/// `g`. Built as generalized Gauss-Laguerre in `u = kappa x^2` with weight
/// `u^a e^{-u}`; the `e^{-u}` factor is divided out into the weights, so the
/// rule applies to `g` directly. Exact (to roundoff) whenever
/// `g(x) = p(x^2) e^{-kappa x^2}` with `deg p <= 2 order - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha_param: f64,
    order: usize,
    scale: f64,
}

impl QuadratureRule {
    /// Rule tuned to integrands decaying like `e^{-x^2}` (scale 1).
    pub fn build(a: f64, order: usize) -> Result<Self> {
        Self::build_scaled(a, order, 1.0)
    }

    /// Rule tuned to integrands decaying like `e^{-kappa x^2}`.
    pub fn build_scaled(a: f64, order: usize, kappa: f64) -> Result<Self> {
        if a <= -1.0 || !a.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "type parameter {a} must be > -1"
            )));
        }
        if order < 2 {
            return Err(Error::QuadratureFailure("order must be >= 2".into()));
        }
        if kappa <= 0.0 || !kappa.is_finite() {
            return Err(Error::QuadratureFailure("scale must be positive".into()));
        }
        // Jacobi matrix of the u^a e^{-u} weight
        let mut diag: Vec<f64> = (0..order).map(|k| 2.0 * k as f64 + a + 1.0).collect();
        let mut off: Vec<f64> = (1..order)
            .map(|k| (k as f64 * (k as f64 + a)).sqrt())
            .collect();
        off.push(0.0);
        imtqlx(&mut diag, &mut off, None)?;
        let mut u_nodes = diag;

        // Newton polish on the damped orthonormal-polynomial values; the
        // ratio f/f' is frame-free so no exponent is needed.
        for u in u_nodes.iter_mut() {
            for _ in 0..4 {
                let mut rec = weight_orthonormal_recurrence(a, *u);
                while rec.degree() < order {
                    rec.advance();
                }
                let m_n = rec.significand();
                let m_prev = rec.prev_significand();
                let nf = order as f64;
                let deriv = (nf * m_n - (nf * (nf + a)).sqrt() * m_prev) / *u - 0.5 * m_n;
                if deriv == 0.0 {
                    break;
                }
                let du = m_n / deriv;
                *u -= du;
                if du.abs() < 1e-15 * u.abs() {
                    break;
                }
            }
        }

        // Positivity / ordering diagnostic
        for i in 0..order {
            if !(u_nodes[i] > 0.0) || (i > 0 && u_nodes[i] <= u_nodes[i - 1]) {
                return Err(Error::QuadratureFailure(format!(
                    "node computation lost positivity/ordering at order {order}, a = {a} (node {i})"
                )));
            }
        }

        // Weights from the Christoffel function: the x-space weight with the
        // e^u factor folded in is 1 / (2 kappa^{a+1} sum_k hatL_k(u_i)^2),
        // where hatL_k = p_k e^{-u/2} are the damped orthonormal polynomials.
        let log_kappa_factor = (a + 1.0) * kappa.ln();
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for &u in &u_nodes {
            let mut rec = weight_orthonormal_recurrence(a, u);
            let mut christoffel = rec.value() * rec.value();
            for _ in 1..order {
                rec.advance();
                let v = rec.value();
                christoffel += v * v;
            }
            if !(christoffel > 0.0) || !christoffel.is_finite() {
                return Err(Error::QuadratureFailure(format!(
                    "weight computation failed at order {order}, a = {a}"
                )));
            }
            nodes.push((u / kappa).sqrt());
            weights.push((-(christoffel.ln()) - std::f64::consts::LN_2 - log_kappa_factor).exp());
        }

        Ok(Self {
            nodes,
            weights,
            alpha_param: a,
            order,
            scale: kappa,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha_param(&self) -> f64 {
        self.alpha_param
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `int_0^inf g(x) x^{2a+1} dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// Same, failing on non-finite evaluations.
    pub fn try_integrate<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        let mut sum = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::IntegrationFailure(format!(
                    "integrand returned {v} at x = {x}"
                )));
            }
            sum += w * v;
        }
        Ok(sum)
    }
}

// ---------------------------------------------------------------------------
// Rule cache file
// ---------------------------------------------------------------------------

/// Write rules to a cache file, one record per line:
/// `a order node_1 ... node_k w_1 ... w_k` with 17 significant digits.
pub fn write_rules<P: AsRef<Path>>(path: P, rules: &[QuadratureRule]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in rules {
        write!(out, "{:.16e} {}", r.alpha_param, r.order)?;
        for &x in &r.nodes {
            write!(out, " {x:.16e}")?;
        }
        for &w in &r.weights {
            write!(out, " {w:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read every rule record from a cache file.
pub fn read_rules<P: AsRef<Path>>(path: P) -> Result<Vec<QuadratureRule>> {
    let file = std::fs::File::open(path)?;
    let mut rules = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let a: f64 = it
            .next()
            .ok_or_else(|| Error::Parse("missing type parameter".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad type parameter: {e}")))?;
        let order: usize = it
            .next()
            .ok_or_else(|| Error::Parse("missing order".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad order: {e}")))?;
        let rest: Vec<f64> = it
            .map(|t| {
                t.parse()
                    .map_err(|e| Error::Parse(format!("bad float: {e}")))
            })
            .collect::<Result<_>>()?;
        if rest.len() != 2 * order {
            return Err(Error::Parse(format!(
                "expected {} values, got {}",
                2 * order,
                rest.len()
            )));
        }
        rules.push(QuadratureRule {
            nodes: rest[..order].to_vec(),
            weights: rest[order..].to_vec(),
            alpha_param: a,
            order,
            scale: 1.0,
        });
    }
    Ok(rules)
}

/// Load the `(a, order)` rule from the cache file, regenerating (and
/// rewriting the file with the new rule appended) when absent.
pub fn load_or_build<P: AsRef<Path>>(path: P, a: f64, order: usize) -> Result<QuadratureRule> {
    let path = path.as_ref();
    let mut rules = if path.exists() {
        read_rules(path)?
    } else {
        Vec::new()
    };
    if let Some(r) = rules
        .iter()
        .find(|r| r.alpha_param == a && r.order == order)
    {
        return Ok(r.clone());
    }
    let rule = QuadratureRule::build(a, order)?;
    rules.push(rule.clone());
    write_rules(path, &rules)?;
    Ok(rule)
}

// ---------------------------------------------------------------------------
// Tensor integration, inner products, norms
// ---------------------------------------------------------------------------

/// Per-dimension rules for a tensor-product integral against `d mu_alpha`.
pub fn tensor_rules(alpha: &AlphaVector, order: usize) -> Result<Vec<QuadratureRule>> {
    alpha
        .entries()
        .iter()
        .map(|&a| QuadratureRule::build(a, order))
        .collect()
}

/// `int f d mu_alpha` by tensor-product quadrature.
pub fn integrate<F: Fn(&[f64]) -> f64>(f: F, alpha: &AlphaVector, order: usize) -> Result<f64> {
    let rules = tensor_rules(alpha, order)?;
    integrate_with_rules(f, &rules)
}

/// `int f d mu_alpha` using prebuilt per-dimension rules.
pub fn integrate_with_rules<F: Fn(&[f64]) -> f64>(f: F, rules: &[QuadratureRule]) -> Result<f64> {
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..d {
            x[j] = rules[j].nodes[idx[j]];
            w *= rules[j].weights[idx[j]];
        }
        let v = f(&x);
        if !v.is_finite() {
            return Err(Error::IntegrationFailure(format!(
                "integrand returned {v} at {x:?}"
            )));
        }
        sum += w * v;
        // odometer
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < rules[j].nodes.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == d {
                return Ok(sum);
            }
        }
    }
}

/// Inner product `<f, g>_alpha` in `L^2(d mu_alpha)`.
pub fn inner_product<F, G>(f: F, g: G, alpha: &AlphaVector, order: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    integrate(|x| f(x) * g(x), alpha, order)
}

/// Sign of the inhomogeneous weight exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSign {
    Plus,
    Minus,
}

/// The three weight families used throughout: the constant weight,
/// `|x|^beta`, and `(1+|x|)^{+-beta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec {
    Unit,
    Power { beta: f64 },
    Inhomogeneous { beta: f64, sign: WeightSign },
}

impl WeightSpec {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        match *self {
            WeightSpec::Unit => 1.0,
            WeightSpec::Power { beta } => norm.powf(beta),
            WeightSpec::Inhomogeneous { beta, sign } => {
                let e = match sign {
                    WeightSign::Plus => beta,
                    WeightSign::Minus => -beta,
                };
                (1.0 + norm).powf(e)
            }
        }
    }
}

/// Weighted norm `(int |f|^p w d mu_alpha)^{1/p}`.
pub fn weighted_lp_norm<F: Fn(&[f64]) -> f64>(
    f: F,
    p: f64,
    alpha: &AlphaVector,
    weight: &WeightSpec,
    order: usize,
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be >= 1")));
    }
    let v = integrate(|x| f(x).abs().powf(p) * weight.evaluate(x), alpha, order)?;
    Ok(v.powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Balls, cubes, doubling, Muckenhoupt constants
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallShape {
    EuclideanBall,
    ProductCube,
}

/// A ball or product cube in `(0, inf)^d` (intersection with the positive
/// orthant is implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub shape: BallShape,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64, shape: BallShape) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        if center.is_empty() || center.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidArgument(
                "center must have positive coordinates".into(),
            ));
        }
        Ok(Self {
            center,
            radius,
            shape,
        })
    }

    pub fn cube(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(center, radius, BallShape::ProductCube)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(center, radius, BallShape::EuclideanBall)
    }
}

/// Result of a ball-measure computation. Cubes are closed-form and carry no
/// error estimate; Euclidean balls in d >= 2 are quasi-Monte-Carlo with the
/// standard error over independent scrambles reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallMeasure {
    pub value: f64,
    pub rel_std_error: Option<f64>,
}

impl BallMeasure {
    /// True when the estimate meets the requested relative accuracy
    /// (closed forms always do).
    pub fn is_converged(&self, tol: f64) -> bool {
        self.rel_std_error.is_none_or(|e| e <= tol)
    }
}

/// One-dimensional interval mass `int_{max(c-r,0)}^{c+r} x^{2a+1} dx`.
fn interval_mass(a: f64, c: f64, r: f64) -> f64 {
    let p = 2.0 * a + 2.0;
    let hi = c + r;
    let lo = (c - r).max(0.0);
    (hi.powf(p) - lo.powf(p)) / p
}

/// Default QMC point budget for Euclidean balls.
pub const DEFAULT_MC_POINTS: usize = 1 << 16;
const MC_SCRAMBLES: usize = 8;

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `mu_alpha` measure of a ball or cube. Product cubes use the closed form
/// per coordinate; Euclidean balls (d >= 2) use scrambled-Halton QMC with
/// `points` samples split over independent scrambles.
pub fn measure_ball(
    ball: &BallSpec,
    alpha: &AlphaVector,
    points: usize,
    seed: u64,
) -> Result<BallMeasure> {
    if ball.center.len() != alpha.dim() {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            got: ball.center.len(),
        });
    }
    let d = alpha.dim();
    match ball.shape {
        BallShape::ProductCube => {
            let mut v = 1.0;
            for j in 0..d {
                v *= interval_mass(alpha[j], ball.center[j], ball.radius);
            }
            Ok(BallMeasure {
                value: v,
                rel_std_error: None,
            })
        }
        BallShape::EuclideanBall => {
            if d == 1 {
                // interval: identical to the cube closed form
                return Ok(BallMeasure {
                    value: interval_mass(alpha[0], ball.center[0], ball.radius),
                    rel_std_error: None,
                });
            }
            let lo: Vec<f64> = ball
                .center
                .iter()
                .map(|&c| (c - ball.radius).max(0.0))
                .collect();
            let hi: Vec<f64> = ball.center.iter().map(|&c| c + ball.radius).collect();
            let box_vol: f64 = lo.iter().zip(&hi).map(|(&l, &h)| h - l).product();
            let per = (points / MC_SCRAMBLES).max(64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut means = Vec::with_capacity(MC_SCRAMBLES);
            for _ in 0..MC_SCRAMBLES {
                let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                let mut acc = 0.0;
                for i in 0..per {
                    let mut density = 1.0;
                    let mut r2 = 0.0;
                    for j in 0..d {
                        let t = (halton(i as u64 + 1, PRIMES[j]) + shift[j]).fract();
                        let x = lo[j] + (hi[j] - lo[j]) * t;
                        density *= x.powf(2.0 * alpha[j] + 1.0);
                        r2 += (x - ball.center[j]) * (x - ball.center[j]);
                    }
                    if r2 < ball.radius * ball.radius {
                        acc += density;
                    }
                }
                means.push(box_vol * acc / per as f64);
            }
            let mean = means.iter().sum::<f64>() / MC_SCRAMBLES as f64;
            let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
                / (MC_SCRAMBLES as f64 - 1.0)
                / MC_SCRAMBLES as f64;
            let rel = if mean > 0.0 {
                var.sqrt() / mean
            } else {
                f64::INFINITY
            };
            Ok(BallMeasure {
                value: mean,
                rel_std_error: Some(rel),
            })
        }
    }
}

/// Largest ratio `mu(B(x, lambda R)) / (lambda^{2|a|+2d} mu(B(x, R)))` over
/// the supplied grid; the doubling property says this stays bounded.
pub fn doubling_constant(
    alpha: &AlphaVector,
    centers: &[Vec<f64>],
    radii: &[f64],
    lambdas: &[f64],
    shape: BallShape,
    seed: u64,
) -> Result<f64> {
    let expo = 2.0 * alpha.sum() + 2.0 * alpha.dim() as f64;
    let mut worst: f64 = 0.0;
    for c in centers {
        for &r in radii {
            let base = measure_ball(
                &BallSpec::new(c.clone(), r, shape)?,
                alpha,
                DEFAULT_MC_POINTS,
                seed,
            )?;
            for &lam in lambdas {
                let big = measure_ball(
                    &BallSpec::new(c.clone(), lam * r, shape)?,
                    alpha,
                    DEFAULT_MC_POINTS,
                    seed,
                )?;
                worst = worst.max(big.value / (lam.powf(expo) * base.value));
            }
        }
    }
    Ok(worst)
}

/// Average of `w` over a ball with respect to `mu_alpha`, by graded-panel
/// tensor quadrature on cubes and QMC on Euclidean balls. Returns the
/// weighted integral and the plain mass.
fn ball_average<W: Fn(&[f64]) -> f64>(
    weight: W,
    ball: &BallSpec,
    alpha: &AlphaVector,
    seed: u64,
) -> Result<(f64, f64)> {
    let d = alpha.dim();
    let gl = GaussLegendre::new(16)?;
    if d == 1 {
        let a = alpha[0];
        let lo = (ball.center[0] - ball.radius).max(0.0);
        let hi = ball.center[0] + ball.radius;
        let mass = interval_mass(a, ball.center[0], ball.radius);
        let f = |x: f64| weight(&[x]) * x.powf(2.0 * a + 1.0);
        let int = integrate_panels_graded(&f, lo, hi, 48, &gl);
        return Ok((int, mass));
    }
    match ball.shape {
        BallShape::ProductCube => {
            // tensor of graded panels per dimension
            let mut nodes_per_dim: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
            for j in 0..d {
                let lo = (ball.center[j] - ball.radius).max(0.0);
                let hi = ball.center[j] + ball.radius;
                let mut pts = Vec::new();
                let panels = 12usize;
                let collect = |a_: f64, b_: f64, pts: &mut Vec<(f64, f64)>| {
                    let half = 0.5 * (b_ - a_);
                    let mid = 0.5 * (a_ + b_);
                    for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
                        pts.push((mid + half * t, half * w));
                    }
                };
                if lo == 0.0 {
                    let mut hi_edge = hi;
                    for i in 0..panels {
                        let lo_edge = if i + 1 == panels {
                            0.0
                        } else {
                            hi * 2f64.powi(-(i as i32 + 1))
                        };
                        collect(lo_edge, hi_edge, &mut pts);
                        hi_edge = lo_edge;
                    }
                } else {
                    let h = (hi - lo) / panels as f64;
                    for i in 0..panels {
                        collect(lo + i as f64 * h, lo + (i + 1) as f64 * h, &mut pts);
                    }
                }
                nodes_per_dim.push(pts);
            }
            let mut idx = vec![0usize; d];
            let mut int = 0.0;
            let mut mass = 0.0;
            let mut x = vec![0.0; d];
            loop {
                let mut w = 1.0;
                for j in 0..d {
                    let (xy, wy) = nodes_per_dim[j][idx[j]];
                    x[j] = xy;
                    w *= wy * xy.powf(2.0 * alpha[j] + 1.0);
                }
                int += w * weight(&x);
                mass += w;
                let mut j = 0;
                loop {
                    idx[j] += 1;
                    if idx[j] < nodes_per_dim[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                    if j == d {
                        return Ok((int, mass));
                    }
                }
            }
        }
        BallShape::EuclideanBall => {
            // QMC both the weighted integral and the mass with shared points
            let lo: Vec<f64> = ball
                .center
                .iter()
                .map(|&c| (c - ball.radius).max(0.0))
                .collect();
            let hi: Vec<f64> = ball.center.iter().map(|&c| c + ball.radius).collect();
            let box_vol: f64 = lo.iter().zip(&hi).map(|(&l, &h)| h - l).product();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let n = DEFAULT_MC_POINTS;
            let (mut int, mut mass) = (0.0, 0.0);
            let mut x = vec![0.0; d];
            for i in 0..n {
                let mut density = 1.0;
                let mut r2 = 0.0;
                for j in 0..d {
                    let t = (halton(i as u64 + 1, PRIMES[j]) + shift[j]).fract();
                    x[j] = lo[j] + (hi[j] - lo[j]) * t;
                    density *= x[j].powf(2.0 * alpha[j] + 1.0);
                    r2 += (x[j] - ball.center[j]) * (x[j] - ball.center[j]);
                }
                if r2 < ball.radius * ball.radius {
                    int += density * weight(&x);
                    mass += density;
                }
            }
            Ok((box_vol * int / n as f64, box_vol * mass / n as f64))
        }
    }
}

/// Muckenhoupt quantity: the maximum over the supplied balls of
/// `(avg_B w) (avg_B w^{-1/(p-1)})^{p-1}`. Degenerate balls are skipped
/// with a warning.
pub fn ap_constant(
    weight: &WeightSpec,
    p: f64,
    alpha: &AlphaVector,
    balls: &[BallSpec],
    seed: u64,
) -> Result<f64> {
    if p <= 1.0 {
        return Err(Error::InvalidArgument(format!("p = {p} must be > 1")));
    }
    if balls.is_empty() {
        return Err(Error::InvalidArgument(
            "ball family must be non-empty".into(),
        ));
    }
    let dual = -1.0 / (p - 1.0);
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for b in balls {
        let (int_w, mass) = ball_average(|x| weight.evaluate(x), b, alpha, seed)?;
        if !(mass > 0.0) || !mass.is_finite() {
            eprintln!(
                "warning: skipping degenerate ball centered at {:?}",
                b.center
            );
            continue;
        }
        let (int_dual, _) = ball_average(|x| weight.evaluate(x).powf(dual), b, alpha, seed)?;
        let avg_w = int_w / mass;
        let avg_dual = int_dual / mass;
        worst = worst.max(avg_w * avg_dual.powf(p - 1.0));
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidArgument(
            "every supplied ball was degenerate".into(),
        ));
    }
    Ok(worst)
}

/// The constant `c` with `int g(|x|) d mu_alpha = c int_0^inf g(r)
/// r^{2|a|+2d-1} dr`: the weighted mass of the unit sphere patch inside the
/// positive orthant.
pub fn sphere_constant(alpha: &AlphaVector) -> f64 {
    let d = alpha.dim() as f64;
    let log_num: f64 = alpha.entries().iter().map(|&a| ln_gamma(a + 1.0)).sum();
    (log_num - (d - 1.0) * std::f64::consts::LN_2 - ln_gamma(alpha.sum() + d)).exp()
}
