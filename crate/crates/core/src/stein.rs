//! Mehler semigroups of the one-dimensional stable targets and the Stein
//! solutions `f_h = -∫_0^∞ (P_t h - E h) dt`.
//!
//! The target is `exp(-|ξ|^α)` with `α ∈ [1, 2)`; at `α = 1` this is the
//! standard Cauchy law. The semigroup is
//! `P_t h(x) = ∫ h(x e^{-t} + s(t) y) p_α(y) dy` with `s(t) = (1 - e^{-αt})^{1/α}`.
//!
//! Derivatives of `f_h` come from `(P_t h)' = e^{-t} P_t(h')`. The nonlocal part
//! of the Stein operator has Fourier multiplier `-α|ξ|^α` and is applied by FFT
//! to a windowed copy of `f_h`; the part cut away by the window is added back
//! by direct quadrature against the Lévy kernel.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::dist::{density_1d, DensityGrid, DistError, GridSpec, Law, StableLaw};
use crate::levy::{stable_constants, LevyError};
use crate::quadfun::{gauss_legendre_10, integrate_breaks, oscillatory_tail, QuadError, QuadSpec};

#[derive(Debug, Error)]
pub enum SteinError {
    #[error(transparent)]
    NonConvergence(#[from] QuadError),
    #[error("time horizon too short: tail bound {tail:e} exceeds tolerance {tolerance:e}")]
    HorizonTooShort { tail: f64, tolerance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Levy(#[from] LevyError),
}

pub type Result<T> = std::result::Result<T, SteinError>;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Where a function varies: a center, a length scale, and the angular
/// frequency if it is periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Features {
    pub center: f64,
    pub width: f64,
    pub frequency: Option<f64>,
}

impl Default for Features {
    fn default() -> Self {
        Features { center: 0.0, width: 1.0, frequency: None }
    }
}

/// A test function in `H₂` with closed-form derivatives and certified
/// bounds `M₀, M₁, M₂ ≤ 1` on the sup norms of `h, h', h''`.
#[derive(Clone)]
pub struct TestFunctionH2 {
    label: String,
    value: RealFn,
    d1: RealFn,
    d2: RealFn,
    bounds: [f64; 3],
    features: Features,
}

impl std::fmt::Debug for TestFunctionH2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunctionH2").field("label", &self.label).field("bounds", &self.bounds).finish()
    }
}

impl TestFunctionH2 {
    pub fn new(label: &str, value: RealFn, d1: RealFn, d2: RealFn, bounds: [f64; 3]) -> Result<Self> {
        if bounds.iter().any(|b| !(b.is_finite() && *b >= 0.0 && *b <= 1.0)) {
            return Err(SteinError::InvalidArgument(format!("{label}: bounds {bounds:?} outside [0, 1]")));
        }
        Ok(TestFunctionH2 { label: label.to_string(), value, d1, d2, bounds, features: Features::default() })
    }

    pub fn with_features(mut self, features: Features) -> Self {
        self.features = features;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        (self.d2)(x)
    }

    pub fn m0(&self) -> f64 {
        self.bounds[0]
    }

    pub fn m1(&self) -> f64 {
        self.bounds[1]
    }

    pub fn m2(&self) -> f64 {
        self.bounds[2]
    }

    pub fn features(&self) -> Features {
        self.features
    }

    fn is_constant(&self) -> bool {
        self.bounds[1] == 0.0
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new("constant", Arc::new(move |_| c), Arc::new(|_| 0.0), Arc::new(|_| 0.0), [c.abs(), 0.0, 0.0])
    }

    pub fn tanh() -> Self {
        // |tanh''| peaks at 4/(3√3)
        Self::new(
            "tanh",
            Arc::new(f64::tanh),
            Arc::new(|x: f64| 1.0 / x.cosh().powi(2)),
            Arc::new(|x: f64| -2.0 * x.tanh() / x.cosh().powi(2)),
            [1.0, 1.0, 4.0 / (3.0 * 3f64.sqrt())],
        )
        .expect("static bounds")
    }

    pub fn sine() -> Self {
        Self::new("sin", Arc::new(f64::sin), Arc::new(f64::cos), Arc::new(|x: f64| -x.sin()), [1.0; 3])
            .expect("static bounds")
            .with_features(Features { frequency: Some(1.0), ..Features::default() })
    }

    pub fn cosine() -> Self {
        Self::new("cos", Arc::new(f64::cos), Arc::new(|x: f64| -x.sin()), Arc::new(|x: f64| -x.cos()), [1.0; 3])
            .expect("static bounds")
            .with_features(Features { frequency: Some(1.0), ..Features::default() })
    }

    /// `cos(2x)/4`.
    pub fn cosine_double() -> Self {
        Self::new(
            "cos2x/4",
            Arc::new(|x: f64| 0.25 * (2.0 * x).cos()),
            Arc::new(|x: f64| -0.5 * (2.0 * x).sin()),
            Arc::new(|x: f64| -(2.0 * x).cos()),
            [0.25, 0.5, 1.0],
        )
        .expect("static bounds")
        .with_features(Features { frequency: Some(2.0), ..Features::default() })
    }

    /// `exp(-x²/2)`.
    pub fn gaussian() -> Self {
        Self::new(
            "gaussian",
            Arc::new(|x: f64| (-0.5 * x * x).exp()),
            Arc::new(|x: f64| -x * (-0.5 * x * x).exp()),
            Arc::new(|x: f64| (x * x - 1.0) * (-0.5 * x * x).exp()),
            [1.0, (-0.5f64).exp(), 1.0],
        )
        .expect("static bounds")
    }

    /// `x/√(1+x²)`.
    pub fn algebraic_sigmoid() -> Self {
        // |h''| = 3|x|(1+x²)^{-5/2} peaks at x = 1/2
        Self::new(
            "x/sqrt(1+x^2)",
            Arc::new(|x: f64| x / (1.0 + x * x).sqrt()),
            Arc::new(|x: f64| (1.0 + x * x).powf(-1.5)),
            Arc::new(|x: f64| -3.0 * x * (1.0 + x * x).powf(-2.5)),
            [1.0, 1.0, 1.5 * 1.25f64.powf(-2.5)],
        )
        .expect("static bounds")
    }

    /// `(2/π) arctan x`.
    pub fn arctan_scaled() -> Self {
        let k = 2.0 / PI;
        Self::new(
            "2atan/pi",
            Arc::new(move |x: f64| k * x.atan()),
            Arc::new(move |x: f64| k / (1.0 + x * x)),
            Arc::new(move |x: f64| -2.0 * k * x / (1.0 + x * x).powi(2)),
            [1.0, k, k * 3.0 * 3f64.sqrt() / 8.0],
        )
        .expect("static bounds")
    }

    /// Sigmoid `tanh((x - c)/2)/2`, shifted off the symmetry axis.
    pub fn shifted_tanh(c: f64) -> Self {
        Self::new(
            "tanh-shift",
            Arc::new(move |x: f64| 0.5 * (0.5 * (x - c)).tanh()),
            Arc::new(move |x: f64| 0.25 / (0.5 * (x - c)).cosh().powi(2)),
            Arc::new(move |x: f64| {
                let z = 0.5 * (x - c);
                -0.25 * z.tanh() / z.cosh().powi(2)
            }),
            [0.5, 0.25, 1.0 / (6.0 * 3f64.sqrt())],
        )
        .expect("static bounds")
        .with_features(Features { center: c, width: 2.0, frequency: None })
    }
}

/// The H₂ battery used for the regularity checks.
pub fn h2_battery() -> Vec<TestFunctionH2> {
    vec![
        TestFunctionH2::tanh(),
        TestFunctionH2::sine(),
        TestFunctionH2::cosine(),
        TestFunctionH2::cosine_double(),
        TestFunctionH2::gaussian(),
        TestFunctionH2::algebraic_sigmoid(),
        TestFunctionH2::arctan_scaled(),
        TestFunctionH2::shifted_tanh(1.5),
    ]
}

// Captures an error raised inside an `f64` integrand.
struct Trap(RefCell<Option<SteinError>>);

impl Trap {
    fn new() -> Self {
        Trap(RefCell::new(None))
    }

    fn take(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
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


/// The Mehler semigroup of the unit stable law `exp(-|ξ|^α)`.
#[derive(Debug, Clone)]
pub struct Mehler {
    alpha: f64,
    // None means the exact Cauchy density
    density: Option<DensityGrid>,
    c_alpha: f64,
}

impl Mehler {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&alpha) {
            return Err(SteinError::InvalidArgument(format!("alpha = {alpha} outside [1, 2)")));
        }
        let density = if alpha == 1.0 {
            None
        } else {
            let law = Law::Stable(StableLaw::unit(alpha)?);
            Some(density_1d(&law, &GridSpec { dx: 1.0 / 64.0, log2_n: 19 })?)
        };
        let c_alpha = stable_constants(alpha, 1)?.c_alpha;
        Ok(Mehler { alpha, density, c_alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficient of the Lévy density `c_α |u|^{-1-α}` of the target.
    pub fn levy_coefficient(&self) -> f64 {
        self.c_alpha
    }

    pub fn pdf(&self, y: f64) -> f64 {
        match &self.density {
            None => 1.0 / (PI * (1.0 + y * y)),
            Some(d) => d.pdf(y).unwrap_or(f64::NAN),
        }
    }

    /// `s(t) = (1 - e^{-αt})^{1/α}`.
    pub fn scale(&self, t: f64) -> f64 {
        let v = -(-self.alpha * t).exp_m1();
        if self.alpha == 1.0 {
            v
        } else {
            v.powf(1.0 / self.alpha)
        }
    }

    /// `∫ g(a + s y) p_α(y) dy`.
    pub fn convolve<G: Fn(f64) -> f64>(&self, g: G, a: f64, s: f64, features: Features) -> Result<f64> {
        if s == 0.0 {
            return Ok(g(a));
        }
        let a = match features.frequency {
            Some(w) if w > 0.0 => {
                let period = 2.0 * PI / w;
                a - period * (a / period).round()
            }
            _ => a,
        };
        let mut cands = vec![-4.0, -1.0, 0.0, 1.0, 4.0];
        if features.frequency.is_none() {
            let yc = (features.center - a) / s;
            let yw = features.width / s;
            for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
                cands.push(yc + k * yw);
            }
        }
        let integrand = |y: f64| g(a + s * y) * self.pdf(y);
        // the interpolated grid density is only piecewise smooth
        let spec = match self.density {
            None => QuadSpec::new(1e-13, 1e-11),
            Some(_) => QuadSpec::new(1e-12, 1e-10),
        }
        .with_subdivisions(2000);
        let value = match features.frequency {
            Some(w) if w > 0.0 => {
                // oscillating far field: finite core plus accelerated tails
                let edge = 16.0;
                let core = integrate_breaks(integrand, &sorted_points(-edge, edge, &cands), &spec)?.value;
                let right = oscillatory_tail(integrand, edge, w * s, &spec)?.value;
                let left = oscillatory_tail(|y: f64| integrand(-y), edge, w * s, &spec)?.value;
                core + right + left
            }
            _ => integrate_breaks(integrand, &sorted_points(f64::NEG_INFINITY, f64::INFINITY, &cands), &spec)?.value,
        };
        if !value.is_finite() {
            return Err(SteinError::InvalidArgument("non-finite convolution".into()));
        }
        Ok(value)
    }

    /// `P_t g(x)` for a callable with the given features.
    pub fn apply_fn<G: Fn(f64) -> f64>(&self, t: f64, g: G, features: Features, x: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(SteinError::InvalidArgument(format!("t = {t} is negative")));
        }
        if t.is_infinite() {
            return self.convolve(g, 0.0, 1.0, features);
        }
        self.convolve(g, x * (-t).exp(), self.scale(t), features)
    }

    pub fn apply(&self, t: f64, h: &TestFunctionH2, x: f64) -> Result<f64> {
        if h.is_constant() {
            return Ok(h.value(x));
        }
        self.apply_fn(t, |z| h.value(z), h.features, x)
    }

    /// `E h(X_α)`.
    pub fn mean(&self, h: &TestFunctionH2) -> Result<f64> {
        self.apply(f64::INFINITY, h, 0.0)
    }
}

/// `P_t h(x)` for the unit stable target of index `alpha`.
pub fn mehler_apply(alpha: f64, t: f64, h: &TestFunctionH2, x: f64) -> Result<f64> {
    Mehler::new(alpha)?.apply(t, h, x)
}

/// Time horizon, quadrature layout and space grid for a Stein solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinSolveSpec {
    pub alpha: f64,
    pub horizon: f64,
    /// Output grid `j·step` for `|j·step| ≤ half_width`.
    pub half_width: f64,
    pub step: f64,
    /// FFT window: flat on `[-a, a]`, zero beyond `b`.
    pub window: (f64, f64),
    /// Largest `|y|` kept in the far-field correction.
    pub far_cap: f64,
    /// Largest admissible tail bound on the grid.
    pub tolerance: f64,
}

impl SteinSolveSpec {
    pub fn new(alpha: f64) -> Self {
        SteinSolveSpec {
            alpha,
            horizon: 40.0,
            half_width: 5.0,
            step: 0.1,
            window: (12.0, 24.0),
            far_cap: 1e8,
            tolerance: 1e-6,
        }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn target(&self) -> Result<StableLaw> {
        Ok(StableLaw::unit(self.alpha)?)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (1.0..2.0).contains(&self.alpha)
            && self.horizon > 0.0
            && self.horizon.is_finite()
            && self.step > 0.0
            && self.half_width >= 0.0
            && self.window.0 > self.half_width
            && self.window.1 > self.window.0
            && self.far_cap > self.window.1
            && self.tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SteinError::InvalidArgument(format!("{self:?}")))
        }
    }

    /// Gauss-Legendre nodes on `[0, T]`: dyadic panels up to 1, unit panels
    /// up to 4, then panels of width 2.
    pub fn time_nodes(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![0.0];
        let mut e = 1.0 / 64.0;
        while e < 1.0 && e < self.horizon {
            edges.push(e);
            e *= 2.0;
        }
        let mut k = 1.0;
        while k < self.horizon {
            edges.push(k);
            k += if k < 4.0 { 1.0 } else { 2.0 };
        }
        edges.push(self.horizon);
        edges.windows(2).filter(|w| w[1] > w[0]).flat_map(|w| gauss_legendre_10(w[0], w[1])).collect()
    }

    /// Output grid points.
    pub fn grid(&self) -> Vec<f64> {
        let n = (self.half_width / self.step + 1e-9).floor() as i64;
        (-n..=n).map(|j| j as f64 * self.step).collect()
    }
}

// C^∞ step: 1 on |y| ≤ a, 0 on |y| ≥ b.
fn window(y: f64, a: f64, b: f64) -> f64 {
    let r = y.abs();
    if r <= a {
        return 1.0;
    }
    if r >= b {
        return 0.0;
    }
    let t = (b - r) / (b - a);
    let p = (-1.0 / t).exp();
    let q = (-1.0 / (1.0 - t)).exp();
    p / (p + q)
}

/// Grid values of a Stein solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinSolution {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
    pub mean: f64,
    /// Largest recorded tail bound over the grid.
    pub tail_bound: f64,
}

/// Regularity of `f_h` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinBounds {
    pub m1_f: f64,
    pub m2_f: f64,
    /// Whether `|f(x+u) - f(x)| ≤ 2(1 + ln|u|)` on the increment grid (α = 1 only).
    pub log_increment_ok: Option<bool>,
    /// Smallest slack of the increment bound at `|u| = 100`.
    pub slack_at_100: Option<f64>,
}

/// Evaluates `f_h` and its derivatives at arbitrary points.
pub struct SteinSolver {
    mehler: Mehler,
    spec: SteinSolveSpec,
    h: TestFunctionH2,
    mean: f64,
    nodes: Vec<(f64, f64)>,
}

impl SteinSolver {
    pub fn new(h: &TestFunctionH2, spec: &SteinSolveSpec) -> Result<Self> {
        spec.validate()?;
        let mehler = Mehler::new(spec.alpha)?;
        let mean = if h.is_constant() { h.value(0.0) } else { mehler.mean(h)? };
        Ok(SteinSolver { mehler, spec: *spec, h: h.clone(), mean, nodes: spec.time_nodes() })
    }

    pub fn mehler(&self) -> &Mehler {
        &self.mehler
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    // -∫_0^T e^{-kt} (P_t h^{(k)}(x) - centering) dt
    fn time_integral(&self, x: f64, order: usize) -> Result<f64> {
        if self.h.is_constant() {
            return Ok(0.0);
        }
        let h = &self.h;
        let mut acc = 0.0;
        for &(t, w) in &self.nodes {
            let v = match order {
                0 => self.mehler.apply_fn(t, |z| h.value(z), h.features, x)? - self.mean,
                1 => (-t).exp() * self.mehler.apply_fn(t, |z| h.derivative(z), h.features, x)?,
                _ => (-2.0 * t).exp() * self.mehler.apply_fn(t, |z| h.second_derivative(z), h.features, x)?,
            };
            acc += w * v;
        }
        Ok(-acc)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.time_integral(x, 0)
    }

    /// `f_h'(x) = -∫ e^{-t} P_t(h')(x) dt`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.time_integral(x, 1)
    }

    /// `f_h''(x) = -∫ e^{-2t} P_t(h'')(x) dt`.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        self.time_integral(x, 2)
    }

    /// Bound on `|∫_T^∞ (P_t h(x) - E h) dt|` from
    /// `|P_t h(x) - E h| ≤ E min(2M₀, M₁ e^{-t} |x - Y|)`.
    pub fn tail_bound(&self, x: f64) -> Result<f64> {
        let (m0, m1) = (self.h.m0(), self.h.m1());
        if m1 == 0.0 {
            return Ok(0.0);
        }
        let horizon = self.spec.horizon;
        let knee = 2.0 * m0 * horizon.exp() / m1;
        let g = |z: f64| {
            if z <= knee {
                m1 * z * (-horizon).exp()
            } else {
                2.0 * m0 * ((m1 * z / (2.0 * m0)).ln() - horizon + 1.0)
            }
        };
        let pts = sorted_points(f64::NEG_INFINITY, f64::INFINITY, &[x - knee, x, x + knee, 0.0, -1.0, 1.0]);
        let spec = QuadSpec::new(1e-300, 1e-8).with_subdivisions(2000);
        Ok(integrate_breaks(|y| g((x - y).abs()) * self.mehler.pdf(y), &pts, &spec)?.value)
    }

    /// `A f_h` at the output grid by FFT of the windowed solution plus the
    /// far-field quadrature. Returns `(xs, A f_h(xs))`.
    pub fn nonlocal_fourier(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let spec = &self.spec;
        let xs = spec.grid();
        if self.h.is_constant() {
            return Ok((xs.clone(), vec![0.0; xs.len()]));
        }
        let (a, b) = spec.window;
        let step = spec.step;
        let alpha = spec.alpha;
        let nb = (b / step).round() as i64;
        let inner: Vec<i64> = (-nb + 1..nb).collect();
        let windowed: Vec<f64> = inner
            .par_iter()
            .map(|&j| {
                let x = j as f64 * step;
                Ok(window(x, a, b) * self.value(x)?)
            })
            .collect::<Result<_>>()?;
        let n = ((16 * nb) as usize).next_power_of_two().max(1 << 16);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (&j, &v) in inner.iter().zip(&windowed) {
            buf[j.rem_euclid(n as i64) as usize] = Complex64::new(v, 0.0);
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let dxi = 2.0 * PI / (n as f64 * step);
        for (k, z) in buf.iter_mut().enumerate() {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            let xi = (kk * dxi).abs();
            *z *= -alpha * xi.powf(alpha) / n as f64;
        }
        planner.plan_fft_inverse(n).process(&mut buf);

        // far field: α c_α ∫ (1 - w(y)) f(y) |y - x|^{-1-α} dy
        let mut far = Vec::new();
        let panels = (b - a).ceil() as usize;
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            far.extend(gauss_legendre_10(a + p as f64 * width, a + (p + 1) as f64 * width));
        }
        let mut hi = 1.0;
        while b / hi < spec.far_cap * 2.0 {
            for (v, w) in gauss_legendre_10(hi / 2.0, hi) {
                far.push((b / v, w * b / (v * v)));
            }
            hi /= 2.0;
        }
        let both: Vec<(f64, f64)> = far.iter().flat_map(|&(y, w)| [(y, w), (-y, w)]).collect();
        let weights: Vec<(f64, f64)> = both
            .par_iter()
            .map(|&(y, w)| Ok((y, w * (1.0 - window(y, a, b)) * self.value(y)?)))
            .collect::<Result<_>>()?;
        let kappa = alpha * self.mehler.c_alpha;
        let values = xs
            .iter()
            .map(|&x| {
                let j = (x / step).round() as i64;
                let near = buf[j.rem_euclid(n as i64) as usize].re;
                let corr: f64 = weights.iter().map(|&(y, w)| w * (y - x).abs().powf(-1.0 - alpha)).sum();
                near + kappa * corr
            })
            .collect();
        Ok((xs, values))
    }

    /// `A f_h(x) = ½∫ u (f'(x+u) - f'(x-u)) ν(du)`, by spatial quadrature.
    pub fn nonlocal_symmetrized(&self, x: f64) -> Result<f64> {
        let alpha = self.spec.alpha;
        let trap = Trap::new();
        let f = |u: f64| {
            let d = trap.take(self.derivative(x + u)) - trap.take(self.derivative(x - u));
            d * u.powf(-alpha)
        };
        let pts = [0.0, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0, f64::INFINITY];
        let v = integrate_breaks(f, &pts, &QuadSpec::new(1e-8, 1e-7).with_subdivisions(400));
        Ok(self.mehler.c_alpha * trap.finish(v.map(|r| r.value))?)
    }

    /// `A f_h(x) = ∫ u (f'(x+u) - f'(x) 1_{|u|≤1}) ν(du)`, by spatial quadrature.
    pub fn nonlocal_centered(&self, x: f64) -> Result<f64> {
        let alpha = self.spec.alpha;
        let d0 = self.derivative(x)?;
        let trap = Trap::new();
        let f = |u: f64| {
            if u == 0.0 {
                return 0.0;
            }
            let local = if u.abs() <= 1.0 { d0 } else { 0.0 };
            u.signum() * u.abs().powf(-alpha) * (trap.take(self.derivative(x + u)) - local)
        };
        let pos = [0.5, 1.0, 3.0, 10.0, 30.0, 100.0];
        let mut pts: Vec<f64> = pos.iter().map(|p| -p).collect();
        pts.push(0.0);
        pts.extend(pos);
        let pts = sorted_points(f64::NEG_INFINITY, f64::INFINITY, &pts);
        let v = integrate_breaks(f, &pts, &QuadSpec::new(1e-8, 1e-7).with_subdivisions(400));
        Ok(self.mehler.c_alpha * trap.finish(v.map(|r| r.value))?)
    }

    /// Pointwise Stein residuals `-x f' + A f - (h - E h)` on the output grid.
    pub fn residuals(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let (xs, af) = self.nonlocal_fourier()?;
        let d: Vec<f64> = xs.par_iter().map(|&x| self.derivative(x)).collect::<Result<_>>()?;
        let r = xs
            .iter()
            .zip(&af)
            .zip(&d)
            .map(|((&x, &a), &dv)| -x * dv + a - (self.h.value(x) - self.mean))
            .collect();
        Ok((xs, r))
    }
}

/// Solves the Stein equation on the output grid.
pub fn stein_solve(h: &TestFunctionH2, spec: &SteinSolveSpec) -> Result<SteinSolution> {
    let solver = SteinSolver::new(h, spec)?;
    let xs = spec.grid();
    let tails: Vec<f64> = xs.par_iter().map(|&x| solver.tail_bound(x)).collect::<Result<_>>()?;
    let tail_bound = tails.iter().cloned().fold(0.0, f64::max);
    if tail_bound > spec.tolerance {
        return Err(SteinError::HorizonTooShort { tail: tail_bound, tolerance: spec.tolerance });
    }
    let values: Vec<f64> = xs.par_iter().map(|&x| solver.value(x)).collect::<Result<_>>()?;
    let derivatives: Vec<f64> = xs.par_iter().map(|&x| solver.derivative(x)).collect::<Result<_>>()?;
    Ok(SteinSolution { xs, values, derivatives, mean: solver.mean, tail_bound })
}

/// Sup over the output grid of `|-x f_h' + A f_h - (h - E h)|`.
pub fn stein_residual(h: &TestFunctionH2, spec: &SteinSolveSpec) -> Result<f64> {
    let solver = SteinSolver::new(h, spec)?;
    let (_, r) = solver.residuals()?;
    Ok(r.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Grid suprema of `|f_h'|` and `|f_h''|`, and for `α = 1` the logarithmic
/// increment bound on `|u| ∈ [1, 100]`.
pub fn stein_bounds_check(h: &TestFunctionH2, spec: &SteinSolveSpec) -> Result<SteinBounds> {
    let solver = SteinSolver::new(h, spec)?;
    let mut xs = spec.grid();
    for r in [7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0] {
        xs.push(r);
        xs.push(-r);
    }
    let pairs: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&x| Ok((solver.derivative(x)?.abs(), solver.second_derivative(x)?.abs())))
        .collect::<Result<_>>()?;
    let m1_f = pairs.iter().fold(0.0f64, |m, p| m.max(p.0));
    let m2_f = pairs.iter().fold(0.0f64, |m, p| m.max(p.1));
    if spec.alpha != 1.0 {
        return Ok(SteinBounds { m1_f, m2_f, log_increment_ok: None, slack_at_100: None });
    }
    let bases = [-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0];
    let mags = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let mut cases = Vec::new();
    for &x in &bases {
        for &m in &mags {
            cases.push((x, m));
            cases.push((x, -m));
        }
    }
    let slacks: Vec<(f64, f64)> = cases
        .par_iter()
        .map(|&(x, u)| {
            let inc = (solver.value(x + u)? - solver.value(x)?).abs();
            Ok((u.abs(), 2.0 * (1.0 + u.abs().ln()) - inc))
        })
        .collect::<Result<_>>()?;
    let ok = slacks.iter().all(|&(_, s)| s >= 0.0);
    let at_100 = slacks.iter().filter(|p| p.0 == 100.0).fold(f64::INFINITY, |m, p| m.min(p.1));
    Ok(SteinBounds { m1_f, m2_f, log_increment_ok: Some(ok), slack_at_100: Some(at_100) })
}
