//! Spectral diagnostics of the one-dimensional Cauchy Mehler generators on the
//! truncated identities `g_R(x) = x exp(-x²/R²)`, the Poincaré inequality for
//! stable laws, and the Weyl-sequence gap for `α ∈ (1, 2)`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::dist::{density_1d, DensityGrid, DistError, GridSpec, Law, StableLaw};
use crate::levy::{stable_constants, LevyError};
use crate::quadfun::{
    dawson, erfc, integrate_breaks, integrate_oscillatory, ln_gamma, oscillatory_tail, QuadError, QuadSpec,
};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("quadrature failed: {0}")]
    NonConvergence(#[from] QuadError),
    #[error("extrapolation is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Levy(#[from] LevyError),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Strictly increasing positive truncation scales.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationLadder {
    scales: Vec<f64>,
}

impl TruncationLadder {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(SpectralError::InvalidArgument("empty ladder".into()));
        }
        if scales.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(SpectralError::InvalidArgument(format!("ladder scales must be positive: {scales:?}")));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpectralError::InvalidArgument(format!("ladder must increase strictly: {scales:?}")));
        }
        Ok(TruncationLadder { scales })
    }

    /// 10, 20, 40, 80, 160.
    pub fn doubling() -> Self {
        TruncationLadder { scales: vec![10.0, 20.0, 40.0, 80.0, 160.0] }
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// A quantity along a ladder together with its extrapolated limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub quantity: String,
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// Largest deviation of the fitted model from the data.
    pub residual: f64,
}

impl SpectralReport {
    fn build(quantity: &str, scales: &[f64], values: Vec<f64>) -> Result<Self> {
        let (limit, residual) = extrapolate(scales, &values)?;
        Ok(SpectralReport { quantity: quantity.into(), scales: scales.to_vec(), values, limit, residual })
    }
}

/// Least-squares fit of `c₀ + c₁/R + c₂/R²`; returns `(c₀, max |fit - data|)`.
pub fn extrapolate(scales: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if scales.len() != values.len() {
        return Err(SpectralError::InvalidArgument(format!("{} scales for {} values", scales.len(), values.len())));
    }
    if scales.len() < 3 {
        return Err(SpectralError::IllConditioned(format!("need at least 3 points, got {}", scales.len())));
    }
    if scales.iter().chain(values).any(|v| !v.is_finite()) || scales.iter().any(|&r| r <= 0.0) {
        return Err(SpectralError::IllConditioned("non-finite data or non-positive scale".into()));
    }
    // modified Gram-Schmidt on the columns 1, h, h² with h = r_min / R
    let r_min = scales.iter().cloned().fold(f64::INFINITY, f64::min);
    let h: Vec<f64> = scales.iter().map(|r| r_min / r).collect();
    let mut cols: Vec<Vec<f64>> = (0..3).map(|k| h.iter().map(|t| t.powi(k)).collect()).collect();
    let mut rmat = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let original = norm(&cols[j]);
        for i in 0..j {
            let proj = dot(&cols[i], &cols[j]);
            rmat[i][j] = proj;
            let qi = cols[i].clone();
            for (c, q) in cols[j].iter_mut().zip(&qi) {
                *c -= proj * q;
            }
        }
        let nj = norm(&cols[j]);
        if !(nj > 1e-10 * original) {
            return Err(SpectralError::IllConditioned("scales too close to separate the 1/R terms".into()));
        }
        rmat[j][j] = nj;
        for c in cols[j].iter_mut() {
            *c /= nj;
        }
    }
    let qty: Vec<f64> = (0..3).map(|i| dot(&cols[i], values)).collect();
    let mut coef = [0.0f64; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| rmat[i][j] * coef[j]).sum();
        coef[i] = (qty[i] - s) / rmat[i][i];
    }
    let residual = h
        .iter()
        .zip(values)
        .map(|(t, v)| (coef[0] + coef[1] * t + coef[2] * t * t - v).abs())
        .fold(0.0, f64::max);
    Ok((coef[0], residual))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `(g_R(x), g_R'(x))`.
pub fn g_eval(x: f64, r: f64) -> (f64, f64) {
    let e = (-(x / r) * (x / r)).exp();
    (x * e, e * (1.0 - 2.0 * (x / r) * (x / r)))
}

/// Standard Cauchy density on the line.
pub fn cauchy_density(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}

fn cauchy_density_derivative(x: f64) -> f64 {
    let s = 1.0 + x * x;
    -2.0 * x / (PI * s * s)
}

/// `A g₁(x)` for `g₁(x) = x e^{-x²}`, where `A` has Fourier multiplier `-|ξ|`.
pub fn a1rot_g1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 12.0 {
        let f = dawson(ax);
        -(4.0 * f + 4.0 * ax - 8.0 * ax * ax * f) / (2.0 * SQRT_PI)
    } else {
        // asymptotic form: 4F + 4y - 8y²F = -Σ_{n≥1} 4n (2n-1)!!/2^n y^{-2n-1}
        let inv2 = 1.0 / (ax * ax);
        let mut d = 0.5; // (2n-1)!!/2^n
        let mut pw = inv2 / ax;
        let mut sum = 0.0;
        for n in 1..60 {
            let term = 4.0 * n as f64 * d * pw;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
            d *= (2 * n + 1) as f64 / 2.0;
            pw *= inv2;
        }
        sum / (2.0 * SQRT_PI)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `A g_R(x) = A g₁(x/R)` by homogeneity of the symbol.
pub fn a1rot_g(x: f64, r: f64) -> f64 {
    a1rot_g1(x / r)
}

/// `A p(x)` for the standard Cauchy density `p` on `R^d`, with `d = x.len()`.
pub fn a1rot_density(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let ln_c = ln_gamma((d + 1.0) / 2.0) - (d + 1.0) / 2.0 * PI.ln();
    let p = (ln_c - (d + 1.0) / 2.0 * (1.0 + r2).ln()).exp();
    p * (r2 - d) / (1.0 + r2)
}

// e^{-z} - 1 + z without cancellation.
fn expm1_plus(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = z * z / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += term;
            k += 1.0;
            term *= -z / k;
        }
        sum
    } else {
        (-z).exp_m1() + z
    }
}

// Collects the first error raised inside an integrand that must return f64.
struct Trap(RefCell<Option<SpectralError>>);

impl Trap {
    fn new() -> Self {
        Trap(RefCell::new(None))
    }

    fn take<E: Into<SpectralError>>(&self, r: std::result::Result<f64, E>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.0.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e.into());
                }
                0.0
            }
        }
    }

    fn finish(self, v: std::result::Result<f64, QuadError>) -> Result<f64> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(v?),
        }
    }
}

fn sorted_points(lo: f64, hi: f64, candidates: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut inner: Vec<f64> = candidates.iter().cloned().filter(|&p| p > lo && p < hi).collect();
    inner.sort_by(f64::total_cmp);
    for p in inner {
        let last = pts[pts.len() - 1];
        if !last.is_finite() || p - last > 1e-12 * p.abs().max(last.abs()).max(1e-300) {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}

fn outer_spec() -> QuadSpec {
    QuadSpec::new(1e-13, 1e-11).with_subdivisions(4000)
}

// 2∫_0^∞ f(x) p(x) dx for even integrands, with breaks on the scales 1 and R.
fn cauchy_even_integral<F: Fn(f64) -> f64>(f: F, r: f64) -> std::result::Result<f64, QuadError> {
    let pts = sorted_points(0.0, f64::INFINITY, &[1.0, r / 4.0, r / 2.0, r, 2.0 * r, 4.0 * r, 8.0 * r]);
    Ok(2.0 * integrate_breaks(|x| f(x) * cauchy_density(x), &pts, &outer_spec())?.value)
}

/// Cauchy-weighted integrals of `g_R` under the Mehler generator `L = -x∂ + A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GQuantities {
    /// `‖g_R‖²`
    pub norm_sq: f64,
    /// `‖x g_R'‖²`
    pub drift_sq: f64,
    /// `⟨x g_R', A g_R⟩`
    pub cross: f64,
    /// `‖A g_R‖²`
    pub nonlocal_sq: f64,
    /// `2⟨x g_R', g_R⟩`
    pub drift_form: f64,
    /// `-2⟨A g_R, g_R⟩`
    pub nonlocal_form: f64,
    /// `E(g_R, g_R) = drift_form + nonlocal_form`
    pub form: f64,
}

impl GQuantities {
    /// `‖L g_R + g_R‖² / ‖g_R‖²`.
    pub fn rayleigh(&self) -> f64 {
        (self.drift_sq + self.nonlocal_sq + self.norm_sq - 2.0 * self.cross - self.form) / self.norm_sq
    }
}

pub fn cauchy_g_quantities(r: f64) -> Result<GQuantities> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!("R = {r}")));
    }
    let parts = |x: f64| {
        let (g, dg) = g_eval(x, r);
        (g, x * dg, a1rot_g(x, r))
    };
    let norm_sq = cauchy_even_integral(|x| parts(x).0.powi(2), r)?;
    let drift_sq = cauchy_even_integral(|x| parts(x).1.powi(2), r)?;
    let cross = cauchy_even_integral(|x| {
        let (_, xg, ag) = parts(x);
        xg * ag
    }, r)?;
    let nonlocal_sq = cauchy_even_integral(|x| parts(x).2.powi(2), r)?;
    let drift_form = 2.0 * cauchy_even_integral(|x| {
        let (g, xg, _) = parts(x);
        xg * g
    }, r)?;
    let nonlocal_form = -2.0 * cauchy_even_integral(|x| {
        let (g, _, ag) = parts(x);
        ag * g
    }, r)?;
    Ok(GQuantities {
        norm_sq,
        drift_sq,
        cross,
        nonlocal_sq,
        drift_form,
        nonlocal_form,
        form: drift_form + nonlocal_form,
    })
}

fn ladder_map<F>(ladder: &TruncationLadder, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    ladder.scales().par_iter().map(|&r| f(r)).collect()
}

fn ladder_quantities(ladder: &TruncationLadder) -> Result<Vec<GQuantities>> {
    ladder.scales().par_iter().map(|&r| cauchy_g_quantities(r)).collect()
}

/// `‖L g_R + g_R‖²/‖g_R‖²` along the ladder.
pub fn rayleigh_l1rot(ladder: &TruncationLadder) -> Result<SpectralReport> {
    let q = ladder_quantities(ladder)?;
    SpectralReport::build("rayleigh_l1rot", ladder.scales(), q.iter().map(GQuantities::rayleigh).collect())
}

/// `E(g_R, g_R) - ‖g_R‖²` along the ladder.
pub fn form_minus_norm_cauchy(ladder: &TruncationLadder) -> Result<SpectralReport> {
    let q = ladder_quantities(ladder)?;
    SpectralReport::build("form_minus_norm", ladder.scales(), q.iter().map(|q| q.form - q.norm_sq).collect())
}

/// The two parts of [`form_minus_norm_cauchy`]: the drift part
/// `2⟨x g_R', g_R⟩ - ‖g_R‖²` and the nonlocal part `-2⟨A g_R, g_R⟩`.
pub fn form_split_cauchy(ladder: &TruncationLadder) -> Result<(SpectralReport, SpectralReport)> {
    let q = ladder_quantities(ladder)?;
    let drift = SpectralReport::build("form_drift_part", ladder.scales(), q.iter().map(|q| q.drift_form - q.norm_sq).collect())?;
    let nonlocal = SpectralReport::build("form_nonlocal_part", ladder.scales(), q.iter().map(|q| q.nonlocal_form).collect())?;
    Ok((drift, nonlocal))
}

/// `Γ(p, g_R)(x) = ∫ (p(x+u) - p(x))(g_R(x+u) - g_R(x)) du/(πu²)` for the
/// standard Cauchy density `p`, by direct quadrature in `u`.
pub fn gamma1_p_g(x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite() && x.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!("x = {x}, R = {r}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let px = cauchy_density(x);
    let (gx, dgx) = g_eval(x, r);
    let dpx = cauchy_density_derivative(x);
    let eps = 1e-4 * r.min(1.0);
    // (u, -u) pair; its quotient by u² tends to 2p'g' as u → 0
    let pair = |u: f64| {
        let a = (cauchy_density(x + u) - px) * (g_eval(x + u, r).0 - gx);
        let b = (cauchy_density(x - u) - px) * (g_eval(x - u, r).0 - gx);
        (a + b) / (PI * u * u)
    };
    let ax = x.abs();
    let pts = sorted_points(
        eps,
        f64::INFINITY,
        &[1.0, r, 2.0 * r, ax - r, ax - 1.0, ax - 0.25, ax, ax + 0.25, ax + 1.0, ax + r, 2.0 * (ax + r)],
    );
    let spec = QuadSpec::new(1e-14 * px * ax.min(r).max(1e-3), 1e-12).with_subdivisions(4000);
    let body = integrate_breaks(pair, &pts, &spec)?.value;
    Ok(body + eps * 2.0 * dpx * dgx / PI)
}

/// `L₁ g_R(x) = 2 A g_R(x) + Γ(p, g_R)(x)/p(x)`.
pub fn l1_apply_g(x: f64, r: f64) -> Result<f64> {
    Ok(2.0 * a1rot_g(x, r) + gamma1_p_g(x, r)? / cauchy_density(x))
}

/// `⟨-L₁ g_{R₁}, g_{R₂}⟩` in `L²` of the standard Cauchy law.
pub fn l1_pairing(r1: f64, r2: f64) -> Result<f64> {
    let trap = Trap::new();
    let v = cauchy_even_integral(|x| -trap.take(l1_apply_g(x, r1)) * g_eval(x, r2).0, r1.max(r2));
    trap.finish(v)
}

/// `‖L₁ g_R‖²`.
pub fn l1_norm_sq(r: f64) -> Result<f64> {
    let trap = Trap::new();
    let v = cauchy_even_integral(|x| trap.take(l1_apply_g(x, r)).powi(2), r);
    trap.finish(v)
}

/// `(‖g_R‖/‖L₁ g_R‖, ‖g_R‖² - ‖L₁ g_R‖²)` along the ladder.
pub fn carre_diagnostics(ladder: &TruncationLadder) -> Result<(SpectralReport, SpectralReport)> {
    let pairs: Vec<(f64, f64)> = ladder
        .scales()
        .par_iter()
        .map(|&r| {
            let n = cauchy_g_quantities(r)?.norm_sq;
            let l = l1_norm_sq(r)?;
            Ok(((n / l).sqrt(), n - l))
        })
        .collect::<Result<_>>()?;
    let ratio = SpectralReport::build("carre_ratio", ladder.scales(), pairs.iter().map(|p| p.0).collect())?;
    let diff = SpectralReport::build("carre_difference", ladder.scales(), pairs.iter().map(|p| p.1).collect())?;
    Ok((ratio, diff))
}

// E(b) = ∫_b^∞ e^{-t²} dt.
fn tail_gauss(b: f64) -> f64 {
    SQRT_PI / 2.0 * erfc(b)
}

/// `A(g_R p)(x)` from its Fourier-side decomposition into two Gaussian-damped
/// sine transforms and a Dawson term. Defined for `x ≠ 0`; returns 0 at the origin.
pub fn a1rot_g_density(x: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite() && x.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!("x = {x}, R = {r}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let c = 1.0 / r;
    let minus = |xi: f64| (-xi).exp() * tail_gauss(r * xi / 2.0 - c);
    let plus = |xi: f64| xi.exp() * tail_gauss(r * xi / 2.0 + c);
    // both pieces are below e^{-45} relative to their scale past xi_max
    let mut xi_max = 1.0 / r;
    while (r * xi_max / 2.0 - c).powi(2) - xi_max < 45.0 {
        xi_max *= 1.25;
    }
    let spec = QuadSpec::new(1e-15, 1e-12).with_subdivisions(4000);
    let s1 = integrate_oscillatory(|xi| xi * (minus(xi) + plus(xi)) * (x * xi).sin(), 0.0, xi_max, x, &spec)?.value;
    let s2 = integrate_oscillatory(|xi| (minus(xi) - plus(xi)) * (x * xi).sin(), 0.0, xi_max, x, &spec)?.value;
    let x2 = x * x;
    // G = √π e^{-ξ} - minus - plus, H = -√π e^{-ξ} + minus - plus
    let int_xi_g = SQRT_PI * 2.0 * x / ((1.0 + x2) * (1.0 + x2)) - s1;
    let int_h = -SQRT_PI * x / (1.0 + x2) + s2;
    let y = x / r;
    let fy = dawson(y);
    let head = (c * c).exp() * (int_xi_g + 2.0 * int_h);
    Ok((head + 2.0 * fy - 2.0 * y + 4.0 * y * y * fy) / (x2 * PI * SQRT_PI))
}

/// Reference law for [`poincare_check`].
#[derive(Debug, Clone, PartialEq)]
pub enum PoincareLaw {
    /// Standard Cauchy with `ν(du) = du/(πu²)`.
    Cauchy,
    /// Characteristic function `exp(-|ξ|^α)` with `ν(du) = c_α du/|u|^{1+α}`.
    Stable { alpha: f64 },
}

/// Bounded test functions with known behaviour at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `exp(-(x - shift)²/width²)`
    Gaussian { shift: f64, width: f64 },
    /// `sin(freq·x + phase)`
    Sine { freq: f64, phase: f64 },
    /// `tanh((x - shift)/width)`
    Step { shift: f64, width: f64 },
    /// `g_R(x) = x exp(-x²/R²)`
    Truncated { r: f64 },
}

// Averages of f and f² far out on either side, and any persistent frequency.
struct FarField {
    mean: [f64; 2],
    square: [f64; 2],
    frequency: Option<f64>,
}

impl TestFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Constant(c) => c,
            TestFunction::Gaussian { shift, width } => (-((x - shift) / width).powi(2)).exp(),
            TestFunction::Sine { freq, phase } => (freq * x + phase).sin(),
            TestFunction::Step { shift, width } => ((x - shift) / width).tanh(),
            TestFunction::Truncated { r } => g_eval(x, r).0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Constant(_) => 0.0,
            TestFunction::Gaussian { shift, width } => {
                let z = (x - shift) / width;
                -2.0 * z / width * (-z * z).exp()
            }
            TestFunction::Sine { freq, phase } => freq * (freq * x + phase).cos(),
            TestFunction::Step { shift, width } => {
                let c = ((x - shift) / width).cosh();
                1.0 / (width * c * c)
            }
            TestFunction::Truncated { r } => g_eval(x, r).1,
        }
    }

    fn far_field(&self) -> FarField {
        match *self {
            TestFunction::Constant(c) => FarField { mean: [c, c], square: [c * c, c * c], frequency: None },
            TestFunction::Gaussian { .. } | TestFunction::Truncated { .. } => {
                FarField { mean: [0.0, 0.0], square: [0.0, 0.0], frequency: None }
            }
            TestFunction::Sine { freq, phase } if freq == 0.0 => {
                let c = phase.sin();
                FarField { mean: [c, c], square: [c * c, c * c], frequency: None }
            }
            TestFunction::Sine { freq, .. } => FarField { mean: [0.0, 0.0], square: [0.5, 0.5], frequency: Some(freq.abs()) },
            TestFunction::Step { width, .. } => {
                let s = width.signum();
                FarField { mean: [s, -s], square: [1.0, 1.0], frequency: None }
            }
        }
    }

    // Length over which the function varies.
    fn scale(&self) -> f64 {
        match *self {
            TestFunction::Constant(_) => 1.0,
            TestFunction::Gaussian { width, .. } | TestFunction::Step { width, .. } => width.abs(),
            TestFunction::Sine { freq, .. } => 1.0 / freq.abs().max(1e-3),
            TestFunction::Truncated { r } => r,
        }
    }

    fn center(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { shift, .. } | TestFunction::Step { shift, .. } => shift,
            _ => 0.0,
        }
    }
}

/// Twenty centered-after-subtraction test functions: shifted Gaussians, sines
/// and smoothed steps.
pub fn poincare_battery() -> Vec<TestFunction> {
    let mut out = Vec::with_capacity(20);
    for &(shift, width) in &[(0.0, 1.0), (0.0, 0.3), (1.0, 1.0), (-2.0, 0.5), (3.0, 2.0), (0.5, 5.0), (-5.0, 1.5)] {
        out.push(TestFunction::Gaussian { shift, width });
    }
    for &(freq, phase) in &[(1.0, 0.0), (0.5, 0.0), (2.0, 0.0), (1.0, 0.7), (0.25, 1.0), (3.0, 0.3), (0.1, 0.0)] {
        out.push(TestFunction::Sine { freq, phase });
    }
    for &(shift, width) in &[(0.0, 1.0), (0.0, 0.2), (1.0, 1.0), (-3.0, 2.0), (2.0, 0.5), (0.0, 10.0)] {
        out.push(TestFunction::Step { shift, width });
    }
    out
}

enum Density {
    Cauchy,
    Grid(DensityGrid),
}

impl Density {
    fn eval(&self, x: f64) -> std::result::Result<f64, DistError> {
        match self {
            Density::Cauchy => Ok(cauchy_density(x)),
            Density::Grid(g) => g.pdf(x),
        }
    }
}

/// `(Var_μ f, ∫∫ (f(x+u) - f(x))² ν(du) μ(dx))` by nested quadrature.
pub fn poincare_check(f: &TestFunction, law: &PoincareLaw) -> Result<(f64, f64)> {
    let (alpha, c, density) = match *law {
        PoincareLaw::Cauchy => (1.0, 1.0 / PI, Density::Cauchy),
        PoincareLaw::Stable { alpha } => {
            let c = stable_constants(alpha, 1)?.c_alpha;
            let grid = density_1d(&Law::Stable(StableLaw::unit(alpha)?), &GridSpec::default())?;
            (alpha, c, Density::Grid(grid))
        }
    };
    let scale = f.scale();
    let center = f.center();
    let mut marks = vec![0.0, center];
    for k in [1.0, 3.0, 10.0, 30.0, 100.0] {
        marks.extend([-k, k, center - k * scale, center + k * scale]);
    }
    let pts = sorted_points(f64::NEG_INFINITY, f64::INFINITY, &marks);
    let spec = QuadSpec::new(1e-12, 1e-10).with_subdivisions(2000);

    let period = f.far_field().frequency.map(|w| 2.0 * PI / w);
    let weighted = |h: &dyn Fn(f64) -> Result<f64>| {
        let trap = Trap::new();
        let v = match period {
            // fold the line onto one period of the integrand
            Some(t) => integrate_breaks(
                |x| trap.take(h(x)) * periodized_stable_density(x, t, alpha),
                &[0.0, t / 4.0, t / 2.0, 3.0 * t / 4.0, t],
                &spec,
            ),
            None => integrate_breaks(|x| trap.take(h(x)) * trap.take(density.eval(x)), &pts, &spec),
        };
        trap.finish(v.map(|r| r.value))
    };
    let mean = weighted(&|x| Ok(f.value(x)))?;
    let second = weighted(&|x| Ok(f.value(x).powi(2)))?;
    let variance = (second - mean * mean).max(0.0);
    let form = weighted(&|x| form_density(f, x, alpha, c, scale))?;
    Ok((variance, form))
}

// Σ_j p(x + jT) for the law exp(-|ξ|^α), by Poisson summation.
fn periodized_stable_density(x: f64, t: f64, alpha: f64) -> f64 {
    let w = 2.0 * PI / t;
    let mut sum = 1.0;
    for m in 1.. {
        let damp = (-(w * m as f64).powf(alpha)).exp();
        if damp < 1e-18 {
            break;
        }
        sum += 2.0 * damp * (w * m as f64 * x).cos();
    }
    sum / t
}

// ∫ (f(x+u) - f(x))² c|u|^{-1-α} du over the whole line.
fn form_density(f: &TestFunction, x: f64, alpha: f64, c: f64, scale: f64) -> Result<f64> {
    let fx = f.value(x);
    let dfx = f.derivative(x);
    let eps = 1e-3 * scale.min(1.0);
    let kernel = |u: f64| c * u.powf(-1.0 - alpha);
    let pair = |u: f64| ((f.value(x + u) - fx).powi(2) + (f.value(x - u) - fx).powi(2)) * kernel(u);
    let near = 2.0 * c * dfx * dfx * eps.powf(2.0 - alpha) / (2.0 - alpha);
    let dist = (x - f.center()).abs();
    let cut = dist + 40.0 * scale + 1.0;
    let pts = sorted_points(
        eps,
        cut,
        &[scale, 3.0 * scale, dist - 3.0 * scale, dist - scale, dist, dist + scale, dist + 3.0 * scale],
    );
    let spec = QuadSpec::new(1e-14, 1e-12).with_subdivisions(8000);
    let body = integrate_breaks(pair, &pts, &spec)?.value;
    // beyond the cut: 2f(x)² exactly, the far-field mean of f(x±u)² - 2f(x)f(x±u)
    // exactly, and the oscillating or decaying remainder by quadrature
    let ff = f.far_field();
    let level = (ff.square[0] - 2.0 * fx * ff.mean[0]) + (ff.square[1] - 2.0 * fx * ff.mean[1]) + 2.0 * fx * fx;
    let tail_mass = c * cut.powf(-alpha) / alpha;
    let rest = |u: f64| {
        let h = |y: f64| {
            let v = f.value(y);
            v * v - 2.0 * fx * v
        };
        let far = (ff.square[0] - 2.0 * fx * ff.mean[0]) + (ff.square[1] - 2.0 * fx * ff.mean[1]);
        (h(x + u) + h(x - u) - far) * kernel(u)
    };
    let tail_spec = QuadSpec::new(1e-13 * (body.abs() + near.abs()).max(1e-300), 1e-11);
    let remainder = match ff.frequency {
        Some(w) => oscillatory_tail(rest, cut, w, &tail_spec)?.value,
        None => integrate_breaks(rest, &[cut, 2.0 * cut, f64::INFINITY], &spec)?.value,
    };
    Ok(near + body + level * tail_mass + remainder)
}

/// `E(g_R, g_R) - ‖g_R‖²` for the law `exp(-|ξ|^α)`, `α ∈ [1, 2)`, as a double
/// Fourier integral of the Gaussian profile of `g_R` against the Lévy symbol.
pub fn weyl_gap(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0 && alpha < 2.0) {
        return Err(SpectralError::InvalidArgument(format!("alpha = {alpha} outside [1, 2)")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!("R = {r}")));
    }
    let big = 13.0;
    // rounding in the bracket sits near 1e-14 of R^{2-2α}
    let floor = r.powf(2.0 - 2.0 * alpha);
    let inner_spec = QuadSpec::new(1e-13 * floor, 1e-12).with_subdivisions(4000);
    let outer_spec = QuadSpec::new(1e-12 * floor, 1e-10).with_subdivisions(400);
    let ra = r.powf(-alpha);
    let r2a = r.powf(2.0 - alpha);
    let integrand = |t1: f64, t2: f64| {
        let s = (t1 + t2).abs().powf(alpha);
        let z = s * ra;
        let m = -s + t1.abs().powf(alpha) + t2.abs().powf(alpha);
        let bracket = r2a * m * (-z).exp_m1() - r * r * expm1_plus(z);
        t1 * t2 * (-(t1 * t1 + t2 * t2) / 4.0).exp() * bracket
    };
    let trap = Trap::new();
    let inner = |t1: f64| {
        let pts = sorted_points(-big, big, &[0.0, -t1]);
        trap.take(integrate_breaks(|t2| integrand(t1, t2), &pts, &inner_spec).map(|v| v.value))
    };
    // the integrand is even under (t₁, t₂) → (-t₁, -t₂)
    let v = integrate_breaks(inner, &[0.0, 1.0, 3.0, big], &outer_spec).map(|v| v.value);
    let half = trap.finish(v)?;
    Ok(-2.0 * half / (16.0 * PI))
}

/// [`weyl_gap`] along the ladder.
pub fn weyl_gap_alpha(ladder: &TruncationLadder, alpha: f64) -> Result<SpectralReport> {
    let values = ladder_map(ladder, |r| weyl_gap(r, alpha))?;
    SpectralReport::build(&format!("weyl_gap_alpha_{alpha}"), ladder.scales(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::fit_rate;
    use crate::quadfun::{integrate, Domain};
    use proptest::prelude::*;

    fn spec() -> QuadSpec {
        QuadSpec::new(1e-13, 1e-11).with_subdivisions(4000)
    }

    // (1/2π)∫ F[g₁](ξ)(-|ξ|)e^{ixξ} dξ with F[g₁](ξ) = -i(√π/2)ξ e^{-ξ²/4}, scaled to g_R.
    fn fourier_a_g(x: f64, r: f64) -> f64 {
        let amp = SQRT_PI / 2.0 * r.powi(3);
        let v = integrate(|xi: f64| xi * xi * (-r * r * xi * xi / 4.0).exp() * (x * xi).sin(), Domain::Finite(0.0, 20.0 / r), &spec())
            .unwrap()
            .value;
        -amp * v / PI
    }

    // (1/2π)∫ e^{-|ξ|}(-|ξ|)e^{ixξ} dξ.
    fn fourier_a_density(x: f64) -> f64 {
        let v = integrate(|xi: f64| xi * (-xi).exp() * (x * xi).cos(), Domain::UpperHalf(0.0), &spec()).unwrap().value;
        -v / PI
    }

    // (1/4π²)∫∫ F[g_R](ξ₁) F[p](ξ₂) m(ξ₁, ξ₂) e^{ix(ξ₁+ξ₂)} dξ₂ dξ₁ for a symbol m.
    fn fourier_pair<M: Fn(f64, f64) -> f64>(x: f64, r: f64, m: M) -> f64 {
        let s = QuadSpec::new(1e-12, 1e-10).with_subdivisions(4000);
        let inner = |a: f64| {
            let pts = sorted_points(-45.0, 45.0, &[0.0, -a]);
            integrate_breaks(|b: f64| (-b.abs()).exp() * (x * (a + b)).sin() * m(a, b), &pts, &s).unwrap().value
        };
        let lim = 14.0 / r;
        let v = integrate_breaks(|a: f64| a * (-r * r * a * a / 4.0).exp() * inner(a), &[-lim, 0.0, lim], &s)
            .unwrap()
            .value;
        SQRT_PI / 2.0 * r.powi(3) * v / (4.0 * PI * PI)
    }

    #[test]
    fn g_eval_values_and_derivative() {
        assert_eq!(g_eval(0.0, 3.0), (0.0, 1.0));
        let r = 2.5;
        let (g, dg) = g_eval(r, r);
        assert!((g - r / std::f64::consts::E).abs() < 1e-15);
        assert!((r * dg + g).abs() < 1e-14);
        let h = 1e-5;
        for i in -40..=40 {
            let x = i as f64 * 0.25;
            let fd = (g_eval(x + h, r).0 - g_eval(x - h, r).0) / (2.0 * h);
            assert!((fd - g_eval(x, r).1).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn a_g1_matches_fourier_quadrature() {
        assert_eq!(a1rot_g1(0.0), 0.0);
        for i in -50..=50 {
            let x = i as f64 * 0.1;
            assert!((a1rot_g1(x) - fourier_a_g(x, 1.0)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn a_g_scaling_identity() {
        for &r in &[2.0, 10.0] {
            for &x in &[-3.0, -1.0, 1.0, 3.0] {
                assert!((a1rot_g(x, r) - fourier_a_g(x, r)).abs() < 1e-8, "x = {x}, R = {r}");
            }
        }
    }

    #[test]
    fn a_g1_asymptotic_branch_is_continuous() {
        let below = a1rot_g1(12.0);
        let above = a1rot_g1(12.0 + 1e-12);
        assert!((below - above).abs() < 1e-10 * below.abs());
        // leading behaviour 1/(√π y³)
        let y = 40.0;
        assert!((a1rot_g1(y) * SQRT_PI * y.powi(3) - 1.0).abs() < 4.0 / (y * y));
    }

    #[test]
    fn a_density_values_and_fourier_check() {
        assert!((a1rot_density(&[0.0]) + 1.0 / PI).abs() < 1e-15);
        assert!(a1rot_density(&[1.0]).abs() < 1e-16);
        assert!(a1rot_density(&[1.0, 1.0]).abs() < 1e-16);
        assert!(a1rot_density(&[1.0, -1.0, 1.0]).abs() < 1e-16);
        for i in -50..=50 {
            let x = i as f64 * 0.1;
            assert!((a1rot_density(&[x]) - fourier_a_density(x)).abs() < 1e-8, "x = {x}");
        }
    }

    #[test]
    fn g_density_decomposition_matches_fourier() {
        for &(x, r) in &[(1.0, 2.0), (2.0, 5.0), (3.0, 10.0)] {
            let oracle = fourier_pair(x, r, |a, b| -(a + b).abs());
            let v = a1rot_g_density(x, r).unwrap();
            assert!((v - oracle).abs() < 1e-5, "({x}, {r}): {v} vs {oracle}");
        }
    }

    #[test]
    fn gamma_matches_fourier_and_vanishes_at_origin() {
        assert_eq!(gamma1_p_g(0.0, 5.0).unwrap(), 0.0);
        let oracle = fourier_pair(2.0, 5.0, |a, b| -(a + b).abs() + a.abs() + b.abs());
        let v = gamma1_p_g(2.0, 5.0).unwrap();
        assert!((v - oracle).abs() < 1e-5, "{v} vs {oracle}");
        // the field identity Γ(p, g) = A(pg) - p A g - g A p at the same point
        let (g, _) = g_eval(2.0, 5.0);
        let field = a1rot_g_density(2.0, 5.0).unwrap() - cauchy_density(2.0) * a1rot_g(2.0, 5.0) - g * a1rot_density(&[2.0]);
        assert!((v - field).abs() < 1e-5);
    }

    #[test]
    fn gamma_renormalized_limit() {
        for &x in &[0.5f64, 1.0, 2.0] {
            let target = -x * (-x * x).exp() / (PI * x * x);
            let errs: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&r| (r * gamma1_p_g(r * x, r).unwrap() - target).abs()).collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "x = {x}: {errs:?}");
            assert!(errs[2] < 1e-2 * target.abs(), "x = {x}: {errs:?}");
        }
    }

    #[test]
    fn l1_pointwise_limit_and_identities() {
        assert_eq!(l1_apply_g(0.0, 7.0).unwrap(), 0.0);
        for &x in &[0.5, 1.0, 2.0] {
            let errs: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&r| (l1_apply_g(x, r).unwrap() + x).abs()).collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 1e-3, "x = {x}: {errs:?}");
        }
        let q = cauchy_g_quantities(5.0).unwrap();
        assert!((l1_pairing(5.0, 5.0).unwrap() - q.form).abs() < 1e-5);
        assert!((l1_pairing(2.0, 5.0).unwrap() - l1_pairing(5.0, 2.0).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn form_matches_double_quadrature() {
        let q = cauchy_g_quantities(5.0).unwrap();
        let (var, form) = poincare_check(&TestFunction::Truncated { r: 5.0 }, &PoincareLaw::Cauchy).unwrap();
        assert!((form - q.form).abs() < 1e-5);
        assert!((var - q.norm_sq).abs() < 1e-8);
    }

    #[test]
    fn norm_growth_and_vanishing_nonlocal_part() {
        let limit = 1.0 / (2.0 * PI).sqrt();
        let mut last = f64::INFINITY;
        for &r in &[1e2, 1e3, 1e4] {
            let q = cauchy_g_quantities(r).unwrap();
            assert!((q.norm_sq / r - limit).abs() < 2.0 / r, "R = {r}");
            assert!(q.nonlocal_sq < last);
            last = q.nonlocal_sq;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn rayleigh_ladder() {
        let ladder = TruncationLadder::doubling();
        let rep = rayleigh_l1rot(&ladder).unwrap();
        assert!((rep.limit - 0.75).abs() < 1e-2, "{rep:?}");
        assert!(rep.values.iter().all(|&v| v > 0.0 && v < 1.0));
        let q: Vec<GQuantities> = ladder.scales().iter().map(|&r| cauchy_g_quantities(r).unwrap()).collect();
        let cross: Vec<f64> = q.iter().map(|q| (1.0 - q.form / q.norm_sq).abs()).collect();
        assert!(cross.windows(2).all(|w| w[1] < w[0]) && cross[4] < 2e-2, "{cross:?}");
    }

    #[test]
    fn form_minus_norm_ladder() {
        let ladder = TruncationLadder::doubling();
        let total = form_minus_norm_cauchy(&ladder).unwrap();
        assert!((total.limit - 2.0 / PI).abs() < 1e-2, "{total:?}");
        let (drift, nonlocal) = form_split_cauchy(&ladder).unwrap();
        assert!((drift.limit + 1.0).abs() < 2e-2, "{drift:?}");
        assert!((nonlocal.limit - (2.0 + PI) / PI).abs() < 2e-2, "{nonlocal:?}");
    }

    #[test]
    fn carre_ladder() {
        let (ratio, diff) = carre_diagnostics(&TruncationLadder::doubling()).unwrap();
        assert!((ratio.limit - 1.0).abs() < 1e-2, "{ratio:?}");
        assert!((diff.limit + 4.0 / PI).abs() < 2e-2, "{diff:?}");
        assert!(ratio.values.iter().all(|&v| v <= 1.0 + 1e-9));
    }

    #[test]
    fn poincare_sine_variance_and_constant() {
        let (var, _) = poincare_check(&TestFunction::Sine { freq: 1.0, phase: 0.0 }, &PoincareLaw::Cauchy).unwrap();
        assert!((var - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-10);
        let (var, form) = poincare_check(&TestFunction::Constant(2.5), &PoincareLaw::Cauchy).unwrap();
        assert!(var.abs() < 1e-12 && form.abs() < 1e-12);
    }

    // For sin(kx + φ): Var and form through the characteristic function and
    // ∫(1 - cos ku)ν(du) = |k|^α.
    fn sine_oracle(k: f64, phase: f64, alpha: f64) -> (f64, f64) {
        let cf = |w: f64| (-w.abs().powf(alpha)).exp();
        let m = phase.sin() * cf(k);
        let c2 = (2.0 * phase).cos() * cf(2.0 * k);
        let ka = k.abs().powf(alpha);
        (0.5 - c2 / 2.0 - m * m, ka + c2 * (2f64.powf(alpha) * ka / 2.0 - ka))
    }

    #[test]
    fn poincare_sines_match_closed_forms() {
        for (law, alpha) in [(PoincareLaw::Cauchy, 1.0), (PoincareLaw::Stable { alpha: 1.5 }, 1.5)] {
            for &(k, phase) in &[(1.0, 0.0), (2.0, 0.0), (0.25, 1.0), (3.0, 0.3)] {
                let (var, form) = poincare_check(&TestFunction::Sine { freq: k, phase }, &law).unwrap();
                let (v0, f0) = sine_oracle(k, phase, alpha);
                assert!((var - v0).abs() < 1e-9, "{law:?} k = {k}");
                assert!((form - f0).abs() < 1e-8 * f0, "{law:?} k = {k}: {form} vs {f0}");
            }
        }
    }

    #[test]
    fn poincare_battery_holds_for_cauchy() {
        let battery = poincare_battery();
        assert_eq!(battery.len(), 20);
        for f in &battery {
            let (var, form) = poincare_check(f, &PoincareLaw::Cauchy).unwrap();
            assert!((form - var) / var >= -1e-6, "{f:?}: {var} > {form}");
        }
    }

    #[test]
    fn weyl_gap_reduces_to_cauchy_at_one() {
        let q = cauchy_g_quantities(10.0).unwrap();
        assert!((weyl_gap(10.0, 1.0).unwrap() - (q.form - q.norm_sq)).abs() < 1e-8);
    }

    #[test]
    fn weyl_gap_matches_density_route() {
        let law = PoincareLaw::Stable { alpha: 1.5 };
        for &r in &[2.0, 5.0] {
            let (var, form) = poincare_check(&TestFunction::Truncated { r }, &law).unwrap();
            let gap = weyl_gap(r, 1.5).unwrap();
            assert!((form - var - gap).abs() < 1e-7, "R = {r}: {} vs {gap}", form - var);
        }
    }

    #[test]
    fn weyl_gap_decays() {
        let ladder = TruncationLadder::doubling();
        let rep = weyl_gap_alpha(&ladder, 1.5).unwrap();
        assert!(rep.values.iter().all(|v| v.is_finite() && *v > 0.0));
        let fit = fit_rate(ladder.scales(), &rep.values, 0).unwrap();
        assert!(fit.exponent <= -0.8, "{fit:?}");
        assert!(weyl_gap(10.0, 0.9).is_err());
        assert!(weyl_gap(10.0, 2.0).is_err());
    }

    #[test]
    fn weyl_gap_approaches_cauchy_as_alpha_decreases() {
        let r = 20.0;
        let q = cauchy_g_quantities(r).unwrap();
        let target = q.form - q.norm_sq;
        let dist: Vec<f64> = [1.3, 1.1, 1.03, 1.01].iter().map(|&a| (weyl_gap(r, a).unwrap() - target).abs()).collect();
        assert!(dist.windows(2).all(|w| w[1] < w[0]), "{dist:?}");
    }

    #[test]
    fn extrapolation_basics() {
        let rs = [10.0, 20.0, 40.0, 80.0];
        let v: Vec<f64> = rs.iter().map(|r| 0.3 - 2.0 / r).collect();
        let (c0, res) = extrapolate(&rs, &v).unwrap();
        assert!((c0 - 0.3).abs() < 1e-12 && res < 1e-12);
        let (c0, res) = extrapolate(&rs, &[1.5; 4]).unwrap();
        assert!((c0 - 1.5).abs() < 1e-14 && res < 1e-14);
        assert!(matches!(extrapolate(&rs[..2], &v[..2]), Err(SpectralError::IllConditioned(_))));
        assert!(matches!(extrapolate(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]), Err(SpectralError::IllConditioned(_))));
    }

    #[test]
    fn ladder_validation() {
        assert!(TruncationLadder::new(vec![10.0, 20.0]).is_ok());
        assert!(TruncationLadder::new(vec![]).is_err());
        assert!(TruncationLadder::new(vec![10.0, 10.0]).is_err());
        assert!(TruncationLadder::new(vec![-1.0, 10.0]).is_err());
    }

    proptest! {
        #[test]
        fn a_g1_is_odd(x in -40.0f64..40.0) {
            prop_assert_eq!(a1rot_g1(-x), -a1rot_g1(x));
        }

        #[test]
        fn a_g_is_scale_invariant(x in -20.0f64..20.0, r in 0.5f64..50.0, lambda in 0.1f64..10.0) {
            let a = a1rot_g(x, r);
            let b = a1rot_g(lambda * x, lambda * r);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn g_derivative_identity(x in -30.0f64..30.0, r in 0.5f64..50.0) {
            let (g, dg) = g_eval(x, r);
            prop_assert!((x * dg - g * (1.0 - 2.0 * x * x / (r * r))).abs() <= 1e-12 * (1.0 + g.abs()));
        }
    }
}
