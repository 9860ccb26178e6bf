//! Lévy measures in polar form `ν(du) = k(r)/r dr σ(dy)`, the weight
//! functions that compare two of them, stable normalization constants,
//! Lévy exponents and the radial integrals behind the stability bounds.

use crate::quadfun::{
    gamma, integrate, integrate_breaks, integrate_radial, oscillatory_tail, Domain, IntegralResult, QuadError, QuadSpec,
};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("centering incompatible with the measure: {0}")]
    IncompatibleCentering(String),
    #[error("k vanishes at r = {0}")]
    DivisionByZero(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

pub type Result<T> = std::result::Result<T, LevyError>;

type Radial = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn radial_spec() -> QuadSpec {
    QuadSpec::new(1e-13, 1e-11).with_subdivisions(4000)
}

fn accept(r: std::result::Result<IntegralResult, QuadError>) -> Result<f64> {
    match r {
        Ok(v) => Ok(v.value),
        Err(QuadError::Divergent(m)) => Err(LevyError::Divergent(m)),
        Err(e) => Err(e.into()),
    }
}

/// Normalization constants of symmetric stable laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableConstants {
    /// Lévy density coefficient giving the characteristic function `exp(-|ξ|^α)` in one dimension.
    pub c_alpha: f64,
    /// Scale turning the symmetrized unit Pareto law into the domain of attraction of `exp(-|ξ|^α)`.
    pub lambda1_alpha: f64,
    /// Coefficient of the rotationally invariant Lévy density `c/‖u‖^{α+d}` for `exp(-‖ξ‖^α/2)`.
    pub c_alpha_d: f64,
    /// Standard Cauchy density constant `Γ((d+1)/2)/π^{(d+1)/2}`.
    pub c_d: f64,
    pub c_prime_d: f64,
}

// (1-α)/cos(απ/2), written through sinc so that α = 1 is a removable point.
fn reflected_ratio(alpha: f64) -> f64 {
    let z = (1.0 - alpha) * PI / 2.0;
    let sinc = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
    (2.0 / PI) / sinc
}

pub fn stable_constants(alpha: f64, d: usize) -> Result<StableConstants> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LevyError::OutOfRange(format!("alpha = {alpha} outside (0, 2)")));
    }
    if d == 0 {
        return Err(LevyError::OutOfRange("dimension must be positive".into()));
    }
    let df = d as f64;
    let ratio = reflected_ratio(alpha);
    let g2 = gamma(2.0 - alpha);
    let c_alpha = alpha * ratio / (2.0 * g2);
    let lambda1_alpha = (ratio / (2.0 * g2)).powf(1.0 / alpha);
    let c_alpha_d = alpha * ratio * gamma((alpha + df) / 2.0)
        / (4.0 * gamma((alpha + 1.0) / 2.0) * PI.powf((df - 1.0) / 2.0) * g2);
    let c_d = gamma((df + 1.0) / 2.0) / PI.powf((df + 1.0) / 2.0);
    Ok(StableConstants { c_alpha, lambda1_alpha, c_alpha_d, c_d, c_prime_d: c_d })
}

/// `E|Y|` for the one-dimensional law with characteristic function `exp(-|ξ|^α)`, `α > 1`.
pub fn stable_abs_mean(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0 + 1e-15) {
        return Err(LevyError::OutOfRange(format!("E|Y| needs alpha in (1, 2], got {alpha}")));
    }
    Ok(2.0 / PI * gamma(1.0 - 1.0 / alpha))
}

/// Radial profile `k` of a polar Lévy measure.
#[derive(Clone)]
pub struct KFunction {
    eval: Radial,
    /// `α` such that `r^α k(r)` tends to a constant at infinity, when known.
    pub tail_exponent: Option<f64>,
    pub monotone: bool,
    /// Radii where `k` is not smooth.
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for KFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KFunction")
            .field("tail_exponent", &self.tail_exponent)
            .field("monotone", &self.monotone)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

const PROBE_RADII: [f64; 9] = [1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3, 1e6];

impl KFunction {
    pub fn new<F>(eval: F, tail_exponent: Option<f64>, monotone: bool, breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let k = KFunction { eval: Arc::new(eval), tail_exponent, monotone, breakpoints };
        for &r in &PROBE_RADII {
            let v = k.eval(r);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(LevyError::InvalidMeasure(format!("k({r}) = {v}")));
            }
        }
        if monotone && PROBE_RADII.windows(2).any(|w| k.eval(w[0]) < k.eval(w[1])) {
            return Err(LevyError::InvalidMeasure("k declared non-increasing but increases".into()));
        }
        if diverges_at_zero(|r| r * k.eval(r)) {
            return Err(LevyError::InvalidMeasure("∫_0^1 r k(r) dr diverges".into()));
        }
        if diverges_at_infinity(|r| k.eval(r) / r) {
            return Err(LevyError::InvalidMeasure("∫_1^∞ k(r)/r dr diverges".into()));
        }
        Ok(k)
    }

    /// `k(r) = c r^{-α}`.
    pub fn stable(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0 && c > 0.0) {
            return Err(LevyError::OutOfRange(format!("stable k with alpha {alpha}, c {c}")));
        }
        Self::new(move |r| c * r.powf(-alpha), Some(alpha), true, vec![])
    }

    /// Layered profile: `r^{-β}` on `(0, 1]` and `r^{-α}` beyond.
    pub fn layered(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < beta && beta < 2.0) {
            return Err(LevyError::OutOfRange(format!("layered k needs 0 < alpha < beta < 2, got {alpha}, {beta}")));
        }
        Self::new(move |r| if r <= 1.0 { r.powf(-beta) } else { r.powf(-alpha) }, Some(alpha), true, vec![1.0])
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }
}

fn diverges_at_zero<F: Fn(f64) -> f64>(f: F) -> bool {
    let near = 1e-20 * f(1e-20).abs();
    let far = 1e-10 * f(1e-10).abs();
    !near.is_finite() || (near > 0.0 && near >= 0.9 * far)
}

fn diverges_at_infinity<F: Fn(f64) -> f64>(f: F) -> bool {
    let near = 1e10 * f(1e10).abs();
    let far = 1e20 * f(1e20).abs();
    !far.is_finite() || (far > 0.0 && far >= 0.9 * near)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SphericalKind {
    Uniform { total_mass: f64 },
    Atoms(Vec<(Vec<f64>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalMeasure {
    pub dim: usize,
    pub kind: SphericalKind,
    pub symmetric: bool,
}

impl SphericalMeasure {
    pub fn uniform(dim: usize, total_mass: f64) -> Result<Self> {
        if dim == 0 || !(total_mass > 0.0) {
            return Err(LevyError::InvalidMeasure(format!("uniform measure with d {dim}, mass {total_mass}")));
        }
        Ok(SphericalMeasure { dim, kind: SphericalKind::Uniform { total_mass }, symmetric: true })
    }

    pub fn atoms(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim == 0 || atoms.is_empty() {
            return Err(LevyError::InvalidMeasure("need at least one atom".into()));
        }
        for (y, w) in &atoms {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if y.len() != dim || (norm - 1.0).abs() > 1e-12 || !(*w > 0.0) {
                return Err(LevyError::InvalidMeasure(format!("atom {y:?} with weight {w}")));
            }
        }
        let symmetric = atoms.iter().all(|(y, w)| {
            atoms.iter().any(|(z, v)| (v - w).abs() <= 1e-14 * w && y.iter().zip(z).all(|(a, b)| (a + b).abs() < 1e-12))
        });
        Ok(SphericalMeasure { dim, kind: SphericalKind::Atoms(atoms), symmetric })
    }

    /// `w δ_{+1} + w δ_{-1}` on the zero-sphere of the real line.
    pub fn symmetric_pair(weight: f64) -> Result<Self> {
        Self::atoms(1, vec![(vec![1.0], weight), (vec![-1.0], weight)])
    }

    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            SphericalKind::Uniform { total_mass } => *total_mass,
            SphericalKind::Atoms(a) => a.iter().map(|(_, w)| w).sum(),
        }
    }

    /// `inf_e ∫ |⟨e, y⟩|^α σ(dy)` over a direction grid (exact in d = 1).
    pub fn nondegeneracy(&self, alpha: f64) -> f64 {
        match &self.kind {
            SphericalKind::Uniform { total_mass } => {
                // E|y_1|^α for y uniform on the sphere
                let d = self.dim as f64;
                if self.dim == 1 {
                    return *total_mass;
                }
                total_mass * gamma(d / 2.0) * gamma((alpha + 1.0) / 2.0) / (PI.sqrt() * gamma((alpha + d) / 2.0))
            }
            SphericalKind::Atoms(atoms) => {
                let dirs = direction_grid(self.dim, 400);
                dirs.iter()
                    .map(|e| atoms.iter().map(|(y, w)| w * dot(e, y).abs().powf(alpha)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Deterministic, roughly even set of unit vectors (Fibonacci lattice in d = 3,
// circle in d = 2, coordinate-mixing lattice otherwise).
fn direction_grid(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0]],
        2 => (0..n).map(|i| {
            let t = PI * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        }).collect(),
        _ => {
            let golden = (5f64.sqrt() - 1.0) / 2.0;
            (0..n).map(|i| {
                let mut v: Vec<f64> = (0..d)
                    .map(|j| ((i as f64 + 0.5) * golden * (j + 1) as f64).fract() * 2.0 - 1.0)
                    .collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                v.iter_mut().for_each(|x| *x /= norm);
                v
            }).collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevyMeasure {
    pub dim: usize,
    pub spherical: SphericalMeasure,
    pub k: KFunction,
}

impl LevyMeasure {
    pub fn new(spherical: SphericalMeasure, k: KFunction) -> Self {
        LevyMeasure { dim: spherical.dim, spherical, k }
    }

    /// One-dimensional `c_α |u|^{-1-α} du`, the Lévy measure of `exp(-|ξ|^α)`.
    pub fn stable_unit(alpha: f64) -> Result<Self> {
        let c = stable_constants(alpha, 1)?.c_alpha;
        Ok(Self::new(SphericalMeasure::symmetric_pair(1.0)?, KFunction::stable(alpha, c)?))
    }

    /// One-dimensional `|u|^{-1-α} du`, the stable reference measure of the layered laws.
    pub fn stable_reference(alpha: f64) -> Result<Self> {
        Ok(Self::new(SphericalMeasure::symmetric_pair(1.0)?, KFunction::stable(alpha, 1.0)?))
    }

    /// One-dimensional layered measure with `σ = δ_{+1} + δ_{-1}`.
    pub fn layered(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::new(SphericalMeasure::symmetric_pair(1.0)?, KFunction::layered(alpha, beta)?))
    }
}

/// Compensation used in the Lévy-Khintchine integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Centering {
    None,
    Full,
    UnitBall,
}

/// `∫ (e^{i⟨u,ξ⟩} - 1 - i⟨u,ξ⟩ 1_C(u)) ν(du)`.
pub fn levy_exponent(nu: &LevyMeasure, xi: &[f64], centering: Centering) -> Result<Complex64> {
    if xi.len() != nu.dim {
        return Err(LevyError::OutOfRange(format!("ξ has dimension {}, measure has {}", xi.len(), nu.dim)));
    }
    let k = &nu.k;
    let small_ok = !diverges_at_zero(|r| k.eval(r));
    if centering == Centering::Full {
        let tail_ok = match k.tail_exponent {
            Some(a) => a > 1.0,
            None => !diverges_at_infinity(|r| k.eval(r)),
        };
        if !tail_ok {
            return Err(LevyError::IncompatibleCentering("∫_1^∞ k(r) dr diverges".into()));
        }
    }
    if centering == Centering::None && !small_ok && !nu.spherical.symmetric {
        return Err(LevyError::IncompatibleCentering("∫_0^1 k(r) dr diverges without compensation".into()));
    }
    if xi.iter().all(|&v| v == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut total = Complex64::new(0.0, 0.0);
    match &nu.spherical.kind {
        SphericalKind::Atoms(atoms) => {
            for (y, w) in atoms {
                let s = dot(y, xi);
                let re = radial_cos(k, s)?;
                let im = if nu.spherical.symmetric { 0.0 } else { radial_sin(k, s, centering)? };
                total += Complex64::new(re, im) * *w;
            }
            if nu.spherical.symmetric {
                total.im = 0.0;
            }
        }
        SphericalKind::Uniform { total_mass } => {
            // rotational symmetry: only |ξ| matters; integrate over the polar angle
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nu.dim == 1 {
                total = Complex64::new(total_mass * radial_cos(k, norm)?, 0.0);
            } else {
                let d = nu.dim as f64;
                let density_norm = gamma(d / 2.0) / (PI.sqrt() * gamma((d - 1.0) / 2.0));
                let spec = QuadSpec::new(1e-11, 1e-9).with_subdivisions(200).with_rule(61);
                let failure = std::cell::RefCell::new(None);
                let ang = integrate(
                    |theta: f64| {
                        let s = norm * theta.cos();
                        match radial_cos(k, s) {
                            Ok(v) => v * theta.sin().powf(d - 2.0),
                            Err(e) => {
                                failure.borrow_mut().get_or_insert(e);
                                0.0
                            }
                        }
                    },
                    Domain::Finite(0.0, PI),
                    &spec,
                );
                let ang = accept(ang)?;
                if let Some(e) = failure.into_inner() {
                    return Err(e);
                }
                total = Complex64::new(total_mass * density_norm * ang, 0.0);
            }
        }
    }
    Ok(total)
}

// ∫_0^∞ (cos(rs) - 1) k(r)/r dr
fn radial_cos(k: &KFunction, s: f64) -> Result<f64> {
    let s = s.abs();
    if s == 0.0 {
        return Ok(0.0);
    }
    let spec = radial_spec();
    let t_end = k.breakpoints.iter().cloned().fold(1.0f64, f64::max).max(PI / s);
    let mut pts = vec![0.0];
    let half_period = PI / s;
    let lobes = ((t_end / half_period).ceil() as usize).min(20_000);
    for i in 1..lobes {
        pts.push(i as f64 * half_period);
    }
    pts.extend(k.breakpoints.iter().cloned().filter(|&b| b > 0.0 && b < t_end));
    pts.push(t_end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let body = |r: f64| {
        let h = (0.5 * r * s).sin();
        -2.0 * h * h * k.eval(r) / r
    };
    let head = accept(integrate_radial(body, &pts, &spec.with_subdivisions(spec.max_subdivisions + 4 * pts.len())))?;
    let osc = accept(oscillatory_tail(|r: f64| (r * s).cos() * k.eval(r) / r, t_end, s, &spec))?;
    let plain = accept(integrate_radial(|r: f64| k.eval(r) / r, &[t_end, f64::INFINITY], &spec))?;
    Ok(head + osc - plain)
}

// ∫_0^∞ (sin(rs) - rs 1_C(r)) k(r)/r dr
fn radial_sin(k: &KFunction, s: f64, centering: Centering) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let spec = radial_spec();
    let comp = |r: f64| match centering {
        Centering::None => 0.0,
        Centering::Full => r * s,
        Centering::UnitBall => if r <= 1.0 { r * s } else { 0.0 },
    };
    let half_period = PI / s.abs();
    let t_end = k.breakpoints.iter().cloned().fold(1.0f64, f64::max).max(half_period);
    let mut pts = vec![0.0, 1.0f64.min(t_end)];
    let lobes = ((t_end / half_period).ceil() as usize).min(20_000);
    for i in 1..lobes {
        pts.push(i as f64 * half_period);
    }
    pts.extend(k.breakpoints.iter().cloned().filter(|&b| b > 0.0 && b < t_end));
    pts.push(t_end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let head = accept(integrate_radial(|r: f64| ((r * s).sin() - comp(r)) * k.eval(r) / r, &pts, &spec))?;
    let osc = accept(oscillatory_tail(|r: f64| (r * s).sin() * k.eval(r) / r, t_end, s.abs(), &spec))?;
    let drift = match centering {
        Centering::Full => accept(integrate_radial(|r: f64| s * k.eval(r), &[t_end, f64::INFINITY], &spec))?,
        _ => 0.0,
    };
    Ok(head + osc - drift)
}

/// Radial weight `ω` multiplying a reference Lévy measure.
#[derive(Clone)]
pub struct WeightFunction {
    eval: Radial,
    pub label: String,
    pub breakpoints: Vec<f64>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction").field("label", &self.label).field("breakpoints", &self.breakpoints).finish()
    }
}

impl WeightFunction {
    pub fn new<F>(label: impl Into<String>, eval: F, breakpoints: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WeightFunction { eval: Arc::new(eval), label: label.into(), breakpoints }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const-{c}"), move |_| c, vec![])
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        (self.eval)(r)
    }

    /// `|ω - 1|`, the integrand factor of the stability bounds.
    pub fn deviation(&self) -> Self {
        let w = self.eval.clone();
        Self::new(format!("|{}-1|", self.label), move |r| (w(r) - 1.0).abs(), self.breakpoints.clone())
    }
}

/// `ωₙ(r) = (k(nr/(n+1)) - k(nr)) / k(r)`. The returned weight is NaN where
/// `k(r) = 0`; [`weight_canonical_at`] reports that case as an error.
pub fn weight_canonical(n: u64, k: &KFunction) -> Result<WeightFunction> {
    if n == 0 {
        return Err(LevyError::OutOfRange("n must be positive".into()));
    }
    let nf = n as f64;
    let kk = k.clone();
    let mut bps: Vec<f64> = k.breakpoints.iter().flat_map(|&b| [b, b / nf, b * (nf + 1.0) / nf]).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    Ok(WeightFunction::new(
        format!("canonical-{n}"),
        move |r| {
            let base = kk.eval(r);
            if base == 0.0 {
                return f64::NAN;
            }
            (kk.eval(nf * r / (nf + 1.0)) - kk.eval(nf * r)) / base
        },
        bps,
    ))
}

/// Pointwise `ωₙ(r)`, failing where `k(r)` vanishes.
pub fn weight_canonical_at(n: u64, k: &KFunction, r: f64) -> Result<f64> {
    if k.eval(r) == 0.0 {
        return Err(LevyError::DivisionByZero(r));
    }
    Ok(weight_canonical(n, k)?.eval(r))
}

/// The constant weight `(1+1/n)^α - n^{-α}` of the canonical stable example and `aₙ = ωₙ^{1/α}`.
pub fn weight_stable_canonical(n: u64, alpha: f64) -> Result<(f64, f64)> {
    if n == 0 || !(alpha > 0.0 && alpha < 2.0) {
        return Err(LevyError::OutOfRange(format!("n = {n}, alpha = {alpha}")));
    }
    let nf = n as f64;
    // (1+1/n)^α - 1 - n^{-α} + 1, with the first difference kept accurate for large n
    let omega = (alpha * (1.0 / nf).ln_1p()).exp_m1() - nf.powf(-alpha) + 1.0;
    Ok((omega, omega.powf(1.0 / alpha)))
}

/// `ω(r) = n^{1-β/α} r^{-(β-α)}` for `r ≤ n^{-1/α}`, and 1 beyond.
pub fn weight_layered(n: u64, alpha: f64, beta: f64) -> Result<WeightFunction> {
    if n == 0 || !(alpha > 0.0 && alpha < beta && beta < 2.0) {
        return Err(LevyError::OutOfRange(format!("n = {n}, alpha = {alpha}, beta = {beta}")));
    }
    let nf = n as f64;
    let edge = nf.powf(-1.0 / alpha);
    let scale = nf.powf(1.0 - beta / alpha);
    Ok(WeightFunction::new(
        format!("layered-{n}"),
        move |r| if r <= edge { scale * r.powf(alpha - beta) } else { 1.0 },
        vec![edge],
    ))
}

pub fn weight_sum(w1: &WeightFunction, w2: &WeightFunction) -> WeightFunction {
    let (a, b) = (w1.eval.clone(), w2.eval.clone());
    let mut bps: Vec<f64> = w1.breakpoints.iter().chain(&w2.breakpoints).cloned().collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    WeightFunction::new(format!("{}+{}", w1.label, w2.label), move |r| a(r) + b(r), bps)
}

/// Weight of a normalized sum `b_n Σ Z_j` whose summands carry weights `ω_j`
/// against a common Lévy measure with profile `k`:
/// `ω̃ₙ(r) = (Σ_j ω_j(r/b_n)) k(r/b_n)/k(r)`.
pub fn weight_normalized_sum(weights: &[WeightFunction], b_n: f64, k: &KFunction) -> Result<WeightFunction> {
    if weights.is_empty() || !(b_n > 0.0) {
        return Err(LevyError::OutOfRange("need at least one weight and b_n > 0".into()));
    }
    let total = weights[1..].iter().fold(weights[0].clone(), |acc, w| weight_sum(&acc, w));
    let kk = k.clone();
    let te = total.eval.clone();
    let mut bps: Vec<f64> = total.breakpoints.iter().map(|b| b * b_n).chain(k.breakpoints.iter().cloned()).collect();
    bps.extend(k.breakpoints.iter().map(|b| b * b_n));
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    Ok(WeightFunction::new(
        format!("normalized-sum-{}", weights.len()),
        move |r| te(r / b_n) * kk.eval(r / b_n) / kk.eval(r),
        bps,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    InsideUnitBall,
    OutsideUnitBall,
    All,
}

/// `∫ ‖u‖^p ω(‖u‖) ν(du) = σ(S^{d-1}) ∫ r^p ω(r) k(r)/r dr` over the region.
pub fn moment_integral(nu: &LevyMeasure, p: f64, region: Region, weight: Option<&WeightFunction>) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(LevyError::OutOfRange(format!("p = {p}")));
    }
    let (lo, hi) = match region {
        Region::InsideUnitBall => (0.0, 1.0),
        Region::OutsideUnitBall => (1.0, f64::INFINITY),
        Region::All => (0.0, f64::INFINITY),
    };
    radial_moment(nu, p, lo, hi, weight)
}

/// Radial moment over `[lo, hi]` (bounds may be 0 and infinity).
pub fn radial_moment(nu: &LevyMeasure, p: f64, lo: f64, hi: f64, weight: Option<&WeightFunction>) -> Result<f64> {
    let k = &nu.k;
    let f = |r: f64| {
        let w = weight.map_or(1.0, |w| w.eval(r));
        if w == 0.0 {
            0.0
        } else {
            r.powf(p - 1.0) * w * k.eval(r)
        }
    };
    if lo == 0.0 && diverges_at_zero(f) {
        return Err(LevyError::Divergent(format!("moment of order {p} at the origin")));
    }
    if hi.is_infinite() && diverges_at_infinity(f) {
        return Err(LevyError::Divergent(format!("moment of order {p} at infinity")));
    }
    let mut pts = vec![lo];
    let extra = weight.map(|w| w.breakpoints.clone()).unwrap_or_default();
    pts.extend(k.breakpoints.iter().chain(&extra).cloned().chain([1.0]).filter(|&b| b > lo && b < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let spec = QuadSpec::new(1e-14, 1e-12).with_subdivisions(6000);
    let v = accept(integrate_radial(f, &pts, &spec))?;
    Ok(nu.spherical.total_mass() * v)
}

/// `(∫_{≤1} r²|ω-1| ν, ∫_{≥1} r|ω-1| ν, ∫_{≥1} |ω-1| ν)`.
pub fn omega_error_integrals(weight: &WeightFunction, nu_alpha: &LevyMeasure, alpha: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LevyError::OutOfRange(format!("alpha = {alpha}")));
    }
    let dev = weight.deviation();
    let zero_outside = moment_integral(nu_alpha, 0.0, Region::OutsideUnitBall, Some(&dev))?;
    let first = moment_integral(nu_alpha, 2.0, Region::InsideUnitBall, Some(&dev))?;
    let (second, third) = if zero_outside == 0.0 {
        (0.0, 0.0)
    } else {
        (moment_integral(nu_alpha, 1.0, Region::OutsideUnitBall, Some(&dev))?, zero_outside)
    };
    Ok((first, second, third))
}

/// Which explicit bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundStudy {
    /// Finite second moment target; `second_moment = ∫‖u‖²ν`.
    CanonicalSd { second_moment: f64 },
    /// Canonical stable example in one dimension, unit-exponent target.
    CanonicalStable { alpha: f64 },
    /// Layered stable sum against `|u|^{-1-α}du`.
    LayeredStable { alpha: f64, beta: f64 },
    /// Layered Cauchy sum against `du/u²`.
    LayeredCauchy { beta: f64 },
}

/// Right-hand side of the explicit stability bound at sample size `n`,
/// with the unspecified constant set to `c_alpha_d`.
pub fn bound_eval(study: BoundStudy, n: u64, c_alpha_d: f64) -> Result<f64> {
    if n == 0 {
        return Err(LevyError::OutOfRange("n must be positive".into()));
    }
    let nf = n as f64;
    match study {
        BoundStudy::CanonicalSd { second_moment } => Ok((1.0 / nf) * (1.0 + 1.0 / nf) * second_moment),
        BoundStudy::CanonicalStable { alpha } => {
            if !(alpha > 1.0 && alpha < 2.0) {
                return Err(LevyError::OutOfRange(format!("canonical stable bound needs alpha in (1, 2), got {alpha}")));
            }
            let nu = LevyMeasure::stable_unit(alpha)?;
            let outer = moment_integral(&nu, 1.0, Region::OutsideUnitBall, None)?;
            let inner = moment_integral(&nu, 2.0, Region::InsideUnitBall, None)?;
            let (omega, _) = weight_stable_canonical(n, alpha)?;
            Ok((2.0 * outer + c_alpha_d * inner) * (omega - 1.0).abs())
        }
        BoundStudy::LayeredStable { alpha, beta } => {
            let w = weight_layered(n, alpha, beta)?;
            let nu = LevyMeasure::stable_reference(alpha)?;
            let (first, second, _) = omega_error_integrals(&w, &nu, alpha)?;
            Ok(2.0 * second + c_alpha_d * first)
        }
        BoundStudy::LayeredCauchy { beta } => {
            let w = weight_layered(n, 1.0, beta)?;
            let nu = LevyMeasure::stable_reference(1.0)?;
            let (first, second, third) = omega_error_integrals(&w, &nu, 1.0)?;
            if second != 0.0 {
                return Err(LevyError::OutOfRange("weight differs from 1 outside the unit ball".into()));
            }
            Ok(first + c_alpha_d * third)
        }
    }
}

/// `(f₁ * f₁)(x) / f₁(x)` for the one-sided Pareto density `α/(1+x)^{α+1}`.
pub fn pareto_selfconv_ratio(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || !(x > 0.0) || !x.is_finite() {
        return Err(LevyError::OutOfRange(format!("alpha = {alpha}, x = {x}")));
    }
    let f = move |y: f64| alpha * (1.0 + y).powf(-alpha - 1.0);
    let half = 0.5 * x;
    let mut pts = vec![0.0];
    if half > 1.0 {
        pts.push(1.0);
    }
    pts.push(half);
    let conv = accept(integrate_breaks(|y: f64| f(y) * f(x - y), &pts, &QuadSpec::new(0.0, 1e-12)))?;
    Ok(2.0 * conv / f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct evaluation of the closed forms with the textbook cosine, valid
    // away from α = 1.
    fn c_alpha_oracle(alpha: f64) -> f64 {
        alpha * (1.0 - alpha) / (2.0 * gamma(2.0 - alpha) * (alpha * PI / 2.0).cos())
    }

    #[test]
    fn constants_at_one_and_a_half() {
        let c = stable_constants(1.5, 1).unwrap();
        assert!((c.c_alpha - 0.299_206_710_301_074_5).abs() < 1e-14);
        assert!((c.lambda1_alpha - 0.341_392_031_627_647_8).abs() < 1e-14);
        assert!((c.c_alpha - c_alpha_oracle(1.5)).abs() < 1e-14);
        assert!((c.c_alpha - 1.5 * c.lambda1_alpha.powf(1.5)).abs() < 1e-14);
        assert!((c.c_d - 1.0 / PI).abs() < 1e-15);
        assert_eq!(c.c_d, c.c_prime_d);
    }

    #[test]
    fn constants_continuous_through_alpha_one() {
        let at = stable_constants(1.0, 1).unwrap();
        assert!((at.c_alpha - 1.0 / PI).abs() < 1e-15);
        for &eps in &[1e-3, 1e-5] {
            let up = stable_constants(1.0 + eps, 1).unwrap().c_alpha;
            assert!((up - at.c_alpha).abs() < 2.0 * eps);
        }
        assert!(matches!(stable_constants(2.0, 1), Err(LevyError::OutOfRange(_))));
        assert!(matches!(stable_constants(0.0, 1), Err(LevyError::OutOfRange(_))));
    }

    #[test]
    fn half_normalization_identity() {
        for i in 1..=9 {
            let a = 1.0 + i as f64 / 10.0;
            let c = stable_constants(a, 1).unwrap();
            assert!((c.c_alpha_d - c.c_alpha / 2.0).abs() <= 1e-12 * c.c_alpha);
        }
    }

    #[test]
    fn stable_exponent_is_minus_one_at_unit_frequency() {
        let nu = LevyMeasure::stable_unit(1.5).unwrap();
        let psi = levy_exponent(&nu, &[1.0], Centering::Full).unwrap();
        assert!((psi.re + 1.0).abs() < 1e-9, "{psi}");
        assert_eq!(psi.im, 0.0);
        assert_eq!(levy_exponent(&nu, &[0.0], Centering::Full).unwrap(), Complex64::new(0.0, 0.0));
        let psi3 = levy_exponent(&nu, &[3.0], Centering::Full).unwrap();
        assert!((psi3.re + 3f64.powf(1.5)).abs() < 1e-8);
    }

    // ∫ (cos r - 1) k/r dr with k = r^{-1.5} on (0, 1] and r^{-1} beyond. On [0, 1]
    // the leading -r²/2 term is integrated exactly and the remainder by a
    // midpoint sum with 10⁶ panels; the tail uses ∫_1^∞ cos r / r² = cos 1 - π/2 + Si(1).
    fn layered_cauchy_oracle() -> f64 {
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            s += (r.cos() - 1.0 + 0.5 * r * r) * r.powf(-2.5);
        }
        let si1 = 0.946_083_070_367_183_1;
        let tail = 1f64.cos() - (PI / 2.0 - si1) - 1.0;
        2.0 * (s * h - 1.0 + tail)
    }

    #[test]
    fn layered_cauchy_exponent_matches_riemann_sum() {
        let nu = LevyMeasure::layered(1.0, 1.5).unwrap();
        let psi = levy_exponent(&nu, &[1.0], Centering::UnitBall).unwrap();
        assert!((psi.re - layered_cauchy_oracle()).abs() < 1e-6, "{} vs {}", psi.re, layered_cauchy_oracle());
    }

    #[test]
    fn asymmetric_measures_have_imaginary_part() {
        let sigma = SphericalMeasure::atoms(1, vec![(vec![1.0], 1.0)]).unwrap();
        assert!(!sigma.symmetric);
        let c = stable_constants(1.5, 1).unwrap().c_alpha;
        let nu = LevyMeasure::new(sigma, KFunction::stable(1.5, c).unwrap());
        let psi = levy_exponent(&nu, &[1.0], Centering::Full).unwrap();
        // one-sided stable: ψ(1) = c Γ(-α) e^{-iπα/2}
        let g = gamma(-1.5);
        let expect = Complex64::new((-0.75 * PI).cos(), (-0.75 * PI).sin()) * (c * g);
        assert!((psi - expect).norm() < 1e-8, "{psi} vs {expect}");
    }

    #[test]
    fn full_centering_rejected_for_heavy_tails() {
        let nu = LevyMeasure::stable_unit(0.8).unwrap();
        assert!(matches!(levy_exponent(&nu, &[1.0], Centering::Full), Err(LevyError::IncompatibleCentering(_))));
        assert!(levy_exponent(&nu, &[1.0], Centering::UnitBall).is_ok());
    }

    #[test]
    fn rotational_exponent_in_three_dimensions() {
        // c/‖u‖^{α+d} with c = 2 c_{α,3} gives exp(-‖ξ‖^α); in polar form k = c r^{-α}
        // against the uniform surface measure of total mass 4π.
        let alpha = 1.5;
        let c = 2.0 * stable_constants(alpha, 3).unwrap().c_alpha_d;
        let nu = LevyMeasure::new(SphericalMeasure::uniform(3, 4.0 * PI).unwrap(), KFunction::stable(alpha, c).unwrap());
        let psi = levy_exponent(&nu, &[0.6, 0.0, 0.8], Centering::Full).unwrap();
        assert!((psi.re + 1.0).abs() < 1e-7, "{psi}");
    }

    #[test]
    fn canonical_weights() {
        let k = KFunction::stable(1.5, 1.0).unwrap();
        let w = weight_canonical(1, &k).unwrap();
        for &r in &[0.01, 1.0, 7.0] {
            assert!((w.eval(r) - 1.828427).abs() < 1e-6);
        }
        let e = KFunction::new(|r: f64| (-r).exp(), None, true, vec![]).unwrap();
        let w2 = weight_canonical(2, &e).unwrap();
        assert!(matches!(weight_canonical_at(2, &e, 1e3), Err(LevyError::DivisionByZero(_))));
        let oracle = ((-1.0f64 / 3.0).exp() - (-1.0f64).exp()) / (-0.5f64).exp();
        assert!((w2.eval(0.5) - oracle).abs() < 1e-15);
        assert!((w2.eval(0.5) - 0.574_829_753_153_012_6).abs() < 1e-14);
        let far = weight_canonical(1_000_000, &e).unwrap();
        for &r in &[0.1, 1.0, 3.0] {
            assert!((far.eval(r) - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn stable_canonical_weight_values() {
        let (w, a) = weight_stable_canonical(10, 1.5).unwrap();
        assert!((w - 1.122_066_956_385_482_9).abs() < 1e-14);
        assert!((a - 1.079_806_279_443_830_7).abs() < 1e-14);
        assert!((w - (1.1f64.powf(1.5) - 10f64.powf(-1.5))).abs() < 1e-14);
        assert_eq!(weight_stable_canonical(1, 1.0).unwrap().0, 1.0);
        let mut prev = f64::INFINITY;
        for n in 1..=1_000_000u64 {
            let (w, _) = weight_stable_canonical(n, 1.5).unwrap();
            assert!(w > 1.0 && w <= prev);
            prev = w;
        }
        assert!(prev - 1.0 < 1e-5);
    }

    #[test]
    fn layered_weight_values() {
        let w = weight_layered(4, 1.5, 1.8).unwrap();
        assert_eq!(w.eval(0.5), 1.0);
        assert!((w.eval(0.1) - 4f64.powf(-0.2) * 0.1f64.powf(-0.3)).abs() < 1e-14);
        assert!((w.eval(0.1) - 1.512_126_072_666_109_3).abs() < 1e-14);
        for &r in &[1e-3, 0.05, 0.5] {
            let big = weight_layered(1 << 40, 1.5, 1.8).unwrap();
            assert!((big.eval(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_sums() {
        let one = WeightFunction::constant(1.0);
        assert_eq!(weight_sum(&one, &one).eval(0.3), 2.0);
        let w = weight_layered(4, 1.5, 1.8).unwrap();
        let z = weight_sum(&w, &WeightFunction::constant(0.0));
        for &r in &[0.01, 0.2, 2.0] {
            assert_eq!(z.eval(r), w.eval(r));
        }
    }

    #[test]
    fn normalized_sum_weight_matches_direct_formula() {
        // Summands Z_j with weights ω_j = canonical-j against an exponential k.
        let k = KFunction::new(|r: f64| (-r).exp(), None, true, vec![]).unwrap();
        let ws: Vec<_> = (1..=4).map(|j| weight_canonical(j, &k).unwrap()).collect();
        let b = 0.5;
        let tilde = weight_normalized_sum(&ws, b, &k).unwrap();
        for &r in &[0.05, 0.3, 1.0, 2.5] {
            let direct: f64 = (1..=4)
                .map(|j| {
                    let jf = j as f64;
                    let s = r / b;
                    ((-(jf * s / (jf + 1.0))).exp() - (-(jf * s)).exp()) / (-s).exp()
                })
                .sum::<f64>()
                * (-(r / b)).exp()
                / (-r).exp();
            assert!((tilde.eval(r) - direct).abs() < 1e-13 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn stable_second_moment_inside() {
        let nu = LevyMeasure::stable_unit(1.5).unwrap();
        let c = stable_constants(1.5, 1).unwrap().c_alpha;
        let m = moment_integral(&nu, 2.0, Region::InsideUnitBall, None).unwrap();
        assert!((m - 2.0 * c / 0.5).abs() < 1e-10);
        assert!((m - 1.196_826_841_204_298).abs() < 1e-10);
        assert!(matches!(moment_integral(&nu, 0.0, Region::All, None), Err(LevyError::Divergent(_))));
        assert!(matches!(moment_integral(&nu, 2.0, Region::All, None), Err(LevyError::Divergent(_))));
    }

    #[test]
    fn layered_weighted_second_moment_matches_riemann_sum() {
        let (alpha, beta, n) = (1.5, 1.8, 16u64);
        let nu = LevyMeasure::stable_reference(alpha).unwrap();
        let w = weight_layered(n, alpha, beta).unwrap();
        let m = moment_integral(&nu, 2.0, Region::InsideUnitBall, Some(&w)).unwrap();
        // ∫_0^1 r ω(r) r^{-α} dr with the singular piece r^{1-β} integrated exactly on the
        // first panel and midpoint sums elsewhere.
        let edge = (n as f64).powf(-1.0 / alpha);
        let scale = (n as f64).powf(1.0 - beta / alpha);
        let exact_inner = scale * edge.powf(2.0 - beta) / (2.0 - beta);
        let panels = 1_000_000;
        let h = (1.0 - edge) / panels as f64;
        let outer: f64 = (0..panels).map(|i| (edge + (i as f64 + 0.5) * h).powf(1.0 - alpha)).sum::<f64>() * h;
        let oracle = 2.0 * (exact_inner + outer);
        assert!((m - oracle).abs() < 1e-8, "{m} vs {oracle}");
    }

    #[test]
    fn omega_error_integrals_cases() {
        let nu = LevyMeasure::stable_unit(1.5).unwrap();
        assert_eq!(omega_error_integrals(&WeightFunction::constant(1.0), &nu, 1.5).unwrap(), (0.0, 0.0, 0.0));
        let c = 1.3;
        let (a, b, cc) = omega_error_integrals(&WeightFunction::constant(c), &nu, 1.5).unwrap();
        let m2 = moment_integral(&nu, 2.0, Region::InsideUnitBall, None).unwrap();
        let m1 = moment_integral(&nu, 1.0, Region::OutsideUnitBall, None).unwrap();
        let m0 = moment_integral(&nu, 0.0, Region::OutsideUnitBall, None).unwrap();
        assert!((a - 0.3 * m2).abs() < 1e-10 && (b - 0.3 * m1).abs() < 1e-10 && (cc - 0.3 * m0).abs() < 1e-10);
    }

    #[test]
    fn layered_error_integral_closed_form_and_slope() {
        let (alpha, beta) = (1.5, 1.8);
        let nu = LevyMeasure::stable_reference(alpha).unwrap();
        let mut logs = vec![];
        for e in 4..=14 {
            let n = 1u64 << e;
            let (first, second, third) = omega_error_integrals(&weight_layered(n, alpha, beta).unwrap(), &nu, alpha).unwrap();
            let nf = n as f64;
            let exact = 2.0 * nf.powf(1.0 - 2.0 / alpha) * (1.0 / (2.0 - beta) - 1.0 / (2.0 - alpha));
            assert!((first - exact).abs() < 1e-9 * exact, "n = {n}");
            assert_eq!((second, third), (0.0, 0.0));
            assert!(first <= (1.0 / (2.0 - beta) + 1.0 / (2.0 - alpha)) * 2.0 * nf.powf(1.0 - 2.0 / alpha));
            logs.push((nf.ln(), first.ln()));
        }
        let slope = crate::metrics::ols_slope(&logs);
        assert!((slope - (1.0 - 2.0 / alpha)).abs() < 0.02);
    }

    #[test]
    fn bounds() {
        assert!((bound_eval(BoundStudy::CanonicalSd { second_moment: 1.0 }, 10, 1.0).unwrap() - 0.11).abs() < 1e-15);
        let b10 = bound_eval(BoundStudy::CanonicalStable { alpha: 1.5 }, 10, 1.0).unwrap();
        let c = stable_constants(1.5, 1).unwrap().c_alpha;
        let expect = (2.0 * 2.0 * c / 0.5 + 2.0 * c / 0.5) * 0.122067;
        assert!((b10 - expect).abs() < 1e-5);
        for study in [
            BoundStudy::CanonicalSd { second_moment: 2.0 },
            BoundStudy::CanonicalStable { alpha: 1.5 },
            BoundStudy::LayeredStable { alpha: 1.5, beta: 1.8 },
            BoundStudy::LayeredCauchy { beta: 1.5 },
        ] {
            let mut prev = f64::INFINITY;
            for n in 2..=64u64 {
                let b = bound_eval(study, n, 1.0).unwrap();
                assert!(b <= prev * (1.0 + 1e-12), "{study:?} at n = {n}");
                prev = b;
            }
        }
    }

    #[test]
    fn pareto_subexponential_ratio() {
        let r = pareto_selfconv_ratio(1.5, 1e3).unwrap();
        assert!((r - 2.0).abs() < 0.1);
        for &x in &[1e2, 1e3, 1e4] {
            assert!(pareto_selfconv_ratio(1.5, x).unwrap() >= 2.0);
        }
        let r1 = pareto_selfconv_ratio(1.5, 1.0).unwrap();
        assert!(r1.is_finite() && r1 > 0.0);
    }

    #[test]
    fn invalid_constructions() {
        assert!(KFunction::new(|r: f64| 1.0 / r, None, true, vec![]).is_ok());
        assert!(matches!(KFunction::new(|r: f64| r.powf(-2.0), None, true, vec![]), Err(LevyError::InvalidMeasure(_))));
        assert!(matches!(KFunction::new(|_| 1.0, None, true, vec![]), Err(LevyError::InvalidMeasure(_))));
        assert!(SphericalMeasure::atoms(2, vec![(vec![1.0, 1.0], 1.0)]).is_err());
        let s = SphericalMeasure::atoms(2, vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0)]).unwrap();
        assert!(s.symmetric);
        // degenerate in the second coordinate
        assert!(s.nondegeneracy(1.5) < 1e-3);
        assert!(SphericalMeasure::symmetric_pair(1.0).unwrap().nondegeneracy(1.5) == 2.0);
    }

    proptest! {
        #[test]
        fn stable_moments_scale(c in prop::sample::select(vec![0.5f64, 2.0]), p in prop::sample::select(vec![0.0f64, 1.0, 2.0]),
                                a in 0.2f64..0.9, len in 0.5f64..3.0) {
            let alpha = 1.5;
            let nu = LevyMeasure::stable_unit(alpha).unwrap();
            let b = a + len;
            let lhs = radial_moment(&nu, p, a, b, None).unwrap();
            // ν(cB) = c^{-α} ν(B) with the r^p factor bringing c^p
            let rhs = c.powf(-p) * c.powf(alpha) * radial_moment(&nu, p, c * a, c * b, None).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0));
        }

        #[test]
        fn symmetric_exponent_is_real_nonpositive(xi in -20.0f64..20.0, beta in 1.55f64..1.95) {
            let nu = LevyMeasure::layered(1.5, beta).unwrap();
            let psi = levy_exponent(&nu, &[xi], Centering::Full).unwrap();
            prop_assert_eq!(psi.im, 0.0);
            prop_assert!(psi.re <= 0.0);
        }
    }
}
