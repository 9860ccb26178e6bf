//! Symmetric stable targets and the initial laws of the limit theorems:
//! characteristic functions, FFT densities and quantiles, seeded samplers and
//! normalized partial sums.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::levy::{levy_exponent, stable_constants, Centering, KFunction, LevyError, LevyMeasure, SphericalMeasure};
use crate::quadfun::{gamma, integrate_radial, oscillatory_tail, QuadError, QuadSpec};

#[derive(Debug, Error)]
pub enum DistError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),
    #[error("inversion grid too coarse: error estimate {0:e}")]
    GridTooCoarse(f64),
    #[error("{0} lies outside the density grid and no tail model is attached")]
    OutOfGrid(f64),
    #[error("quadrature failed: {0}")]
    NonConvergence(#[from] QuadError),
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error("malformed sample batch: {0}")]
    BadFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DistError>;

/// How a symmetric stable law is scaled.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    /// `exp(-‖ξ‖^α)`.
    UnitExponent,
    /// `exp(-‖ξ‖^α / 2)`.
    HalfExponent,
    /// `exp(-Σ λ_j |⟨ξ, y_j⟩|^α)` over the listed atoms of a symmetric spectral measure.
    Spectral(Vec<(Vec<f64>, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableLaw {
    pub alpha: f64,
    pub d: usize,
    pub normalization: Normalization,
}

impl StableLaw {
    pub fn unit(alpha: f64) -> Result<Self> {
        Self::rotational(alpha, 1, Normalization::UnitExponent)
    }

    /// Rotationally invariant law with `exp(-‖ξ‖^α/2)`.
    pub fn half(alpha: f64, d: usize) -> Result<Self> {
        Self::rotational(alpha, d, Normalization::HalfExponent)
    }

    /// The standard Cauchy law, `exp(-‖ξ‖)`.
    pub fn cauchy(d: usize) -> Result<Self> {
        Self::rotational(1.0, d, Normalization::UnitExponent)
    }

    fn rotational(alpha: f64, d: usize, normalization: Normalization) -> Result<Self> {
        check_alpha(alpha)?;
        if d == 0 {
            return Err(DistError::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self { alpha, d, normalization })
    }

    pub fn spectral(alpha: f64, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        check_alpha(alpha)?;
        let sigma = SphericalMeasure::atoms(atoms.first().map_or(0, |a| a.0.len()), atoms.clone())?;
        if !sigma.symmetric {
            return Err(DistError::InvalidParameter("spectral measure must be symmetric".into()));
        }
        if sigma.nondegeneracy(alpha) <= 0.0 {
            return Err(DistError::InvalidParameter("spectral measure is degenerate".into()));
        }
        Ok(Self { alpha, d: sigma.dim, normalization: Normalization::Spectral(atoms) })
    }

    /// The stable law whose Lévy measure is `r^{-1-α} dr σ(dy)` for the atoms of `σ`.
    pub fn from_levy_atoms(alpha: f64, sigma: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let c = stable_constants(alpha, 1)?.c_alpha;
        Self::spectral(alpha, sigma.into_iter().map(|(y, w)| (y, w / (2.0 * c))).collect())
    }

    /// `-log φ(ξ)`.
    pub fn exponent(&self, xi: &[f64]) -> f64 {
        match &self.normalization {
            Normalization::UnitExponent => norm(xi).powf(self.alpha),
            Normalization::HalfExponent => 0.5 * norm(xi).powf(self.alpha),
            Normalization::Spectral(atoms) => atoms
                .iter()
                .map(|(y, w)| w * y.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>().abs().powf(self.alpha))
                .sum(),
        }
    }

    /// In one dimension, the `s` of `exp(-s|ξ|^α)`.
    pub fn scale_1d(&self) -> f64 {
        self.exponent(&[1.0])
    }

    /// Density tail `C|x|^{-1-α}` in one dimension.
    pub fn tail_1d(&self) -> Result<PowerTail> {
        let c = stable_constants(self.alpha, 1)?.c_alpha;
        Ok(PowerTail { c: self.scale_1d() * c, alpha: self.alpha })
    }

    pub fn tag(&self) -> String {
        let kind = match &self.normalization {
            Normalization::UnitExponent => "unit".to_string(),
            Normalization::HalfExponent => "half".to_string(),
            Normalization::Spectral(a) => format!("spectral{}", a.len()),
        };
        format!("stable-{kind}-a{}-d{}", self.alpha, self.d)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(DistError::InvalidParameter(format!("alpha = {alpha} outside (0, 2]")))
    }
}

/// Initial laws of the limit theorems.
#[derive(Debug, Clone)]
pub enum InitialLaw {
    /// `Y₁ - Y₂` with `Y_i` one-sided Pareto, density `α(1+x)^{-α-1}`.
    ParetoSymmetrized { alpha: f64 },
    /// Layered stable law with `k = r^{-β}` on (0,1] and `r^{-α}` beyond.
    Layered { alpha: f64, beta: f64, d: usize },
    /// Summands `Z_k ~ ((k+1)^α - k^α)^{1/α} X_α` of the canonical stable example.
    CanonicalStable { alpha: f64 },
    /// Summands with `φ_k(ξ) = φ((k+1)ξ)/φ(kξ)`, `φ` self-decomposable with the given `k`.
    CanonicalSd { k: KFunction },
}

impl InitialLaw {
    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(DistError::InvalidParameter(format!("pareto needs alpha in (1, 2), got {alpha}")));
        }
        Ok(Self::ParetoSymmetrized { alpha })
    }

    pub fn layered(alpha: f64, beta: f64, d: usize) -> Result<Self> {
        if !(alpha >= 1.0 && alpha < 2.0 && beta > alpha && beta < 2.0) {
            return Err(DistError::InvalidParameter(format!("layered needs 1 ≤ α < β < 2, got α = {alpha}, β = {beta}")));
        }
        if d == 0 {
            return Err(DistError::InvalidParameter("dimension must be positive".into()));
        }
        Ok(Self::Layered { alpha, beta, d })
    }

    pub fn canonical_stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(DistError::InvalidParameter(format!("alpha = {alpha} outside (0, 2)")));
        }
        Ok(Self::CanonicalStable { alpha })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::ParetoSymmetrized { alpha } | Self::Layered { alpha, .. } | Self::CanonicalStable { alpha } => Some(*alpha),
            Self::CanonicalSd { k } => k.tail_exponent,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Layered { d, .. } => *d,
            _ => 1,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Self::ParetoSymmetrized { alpha } => format!("pareto-sym-a{alpha}"),
            Self::Layered { alpha, beta, d } => format!("layered-a{alpha}-b{beta}-d{d}"),
            Self::CanonicalStable { alpha } => format!("canonical-stable-a{alpha}"),
            Self::CanonicalSd { .. } => "canonical-sd".into(),
        }
    }

    /// The stable limit of the normalized sums.
    pub fn target(&self) -> Result<StableLaw> {
        match self {
            Self::ParetoSymmetrized { alpha } | Self::CanonicalStable { alpha } => StableLaw::unit(*alpha),
            Self::Layered { alpha, d: 1, .. } => StableLaw::from_levy_atoms(*alpha, vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)]),
            Self::Layered { d, .. } => Err(DistError::UnsupportedLaw(format!("layered target in d = {d}"))),
            Self::CanonicalSd { .. } => Err(DistError::UnsupportedLaw("canonical-sd target is the SD law itself".into())),
        }
    }

    fn levy_measure(&self) -> Result<LevyMeasure> {
        match self {
            Self::Layered { alpha, beta, d: 1 } => Ok(LevyMeasure::layered(*alpha, *beta)?),
            Self::Layered { alpha, beta, d } => Ok(LevyMeasure::new(SphericalMeasure::uniform(*d, 2.0)?, KFunction::layered(*alpha, *beta)?)),
            Self::CanonicalSd { k } => Ok(LevyMeasure::new(SphericalMeasure::symmetric_pair(1.0)?, k.clone())),
            _ => Err(DistError::UnsupportedLaw(format!("{} has no polar Lévy measure here", self.tag()))),
        }
    }
}

/// A target or an initial law.
#[derive(Debug, Clone)]
pub enum Law {
    Stable(StableLaw),
    Initial(InitialLaw),
}

impl From<StableLaw> for Law {
    fn from(l: StableLaw) -> Self {
        Law::Stable(l)
    }
}

impl From<InitialLaw> for Law {
    fn from(l: InitialLaw) -> Self {
        Law::Initial(l)
    }
}

impl Law {
    pub fn tag(&self) -> String {
        match self {
            Law::Stable(s) => s.tag(),
            Law::Initial(i) => i.tag(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Law::Stable(s) => s.d,
            Law::Initial(i) => i.dim(),
        }
    }
}

// ---------------------------------------------------------------------------
// Characteristic functions

/// `∫_s^∞ e^{iy} y^{-α} dy` for `s > 0`, `α ∈ (1, 2)`.
fn upper_oscillatory_gamma(alpha: f64, s: f64) -> Result<Complex64> {
    if s <= 6.0 {
        // Γ(1-α) e^{iπ(1-α)/2} minus the entire series of ∫_0^s
        let whole = Complex64::from_polar(gamma(1.0 - alpha), PI * (1.0 - alpha) / 2.0);
        let mut head = Complex64::new(0.0, 0.0);
        let mut ik = Complex64::new(1.0, 0.0);
        let mut pow = s.powf(1.0 - alpha); // s^{k+1-α}/k!
        for k in 0..200 {
            let kf = k as f64;
            let term = ik * (pow / (kf + 1.0 - alpha));
            head += term;
            if k > 4 && term.norm() < 1e-18 * head.norm() {
                break;
            }
            ik *= Complex64::i();
            pow *= s / (kf + 1.0);
        }
        Ok(whole - head)
    } else {
        let spec = QuadSpec::new(1e-15, 1e-13);
        let re = oscillatory_tail(|y: f64| y.cos() * y.powf(-alpha), s, 1.0, &spec)?.value;
        let im = oscillatory_tail(|y: f64| y.sin() * y.powf(-alpha), s, 1.0, &spec)?.value;
        Ok(Complex64::new(re, im))
    }
}

/// `1 - φ_P(s)` for the one-sided Pareto law, from `1 - φ = -i s^α e^{-is} ∫_s^∞ e^{iy} y^{-α} dy`.
pub fn pareto_one_minus_cf(alpha: f64, s: f64) -> Result<Complex64> {
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if s < 0.0 {
        return Ok(pareto_one_minus_cf(alpha, -s)?.conj());
    }
    let tail = upper_oscillatory_gamma(alpha, s)?;
    Ok(-Complex64::i() * s.powf(alpha) * Complex64::from_polar(1.0, -s) * tail)
}

/// `log|φ_P(s)|²`, the log-characteristic function of `Y₁ - Y₂`.
pub fn pareto_sym_log_cf(alpha: f64, s: f64) -> Result<f64> {
    let w = pareto_one_minus_cf(alpha, s)?;
    Ok((-2.0 * w.re + w.norm_sqr()).ln_1p())
}

/// `2∫_0^1 (cos(rs) - 1)(r^{-β-1} - r^{-α-1}) dr`, the layer correction to the stable exponent.
pub fn layer_correction(alpha: f64, beta: f64, s: f64) -> Result<f64> {
    let s = s.abs();
    if s <= 6.0 {
        let mut sum = 0.0;
        let mut term = 1.0; // (-1)^k s^{2k}/(2k)!
        for k in 1..200 {
            let kf = k as f64;
            term *= -s * s / ((2.0 * kf - 1.0) * (2.0 * kf));
            let t = term * (1.0 / (2.0 * kf - beta) - 1.0 / (2.0 * kf - alpha));
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        Ok(2.0 * sum)
    } else {
        let n = (s / PI).ceil() as usize;
        let mut pts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        pts[n] = 1.0;
        let f = |r: f64| -2.0 * (0.5 * r * s).sin().powi(2) * (r.powf(-beta - 1.0) - r.powf(-alpha - 1.0));
        Ok(2.0 * integrate_radial(f, &pts, &QuadSpec::new(1e-14, 1e-12))?.value)
    }
}

/// Log-characteristic function of a one-dimensional layered law.
pub fn layered_log_cf(alpha: f64, beta: f64, s: f64) -> Result<f64> {
    let c = stable_constants(alpha, 1)?.c_alpha;
    Ok(-s.abs().powf(alpha) / c + layer_correction(alpha, beta, s)?)
}

/// Characteristic function of a law at `ξ`.
pub fn cf_eval(law: &Law, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != law.dim() {
        return Err(DistError::InvalidParameter(format!("ξ has length {}, law has dimension {}", xi.len(), law.dim())));
    }
    if xi.iter().all(|&v| v == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    match law {
        Law::Stable(s) => Ok(Complex64::new((-s.exponent(xi)).exp(), 0.0)),
        Law::Initial(i) => match i {
            InitialLaw::ParetoSymmetrized { alpha } => Ok(Complex64::new(pareto_sym_log_cf(*alpha, xi[0])?.exp(), 0.0)),
            InitialLaw::Layered { alpha, beta, d: 1 } => Ok(Complex64::new(layered_log_cf(*alpha, *beta, xi[0])?.exp(), 0.0)),
            InitialLaw::Layered { alpha, .. } => {
                let centering = if *alpha > 1.0 { Centering::Full } else { Centering::UnitBall };
                Ok(levy_exponent(&i.levy_measure()?, xi, centering)?.exp())
            }
            InitialLaw::CanonicalStable { alpha } => Ok(Complex64::new((-(2f64.powf(*alpha) - 1.0) * xi[0].abs().powf(*alpha)).exp(), 0.0)),
            InitialLaw::CanonicalSd { .. } => {
                let nu = i.levy_measure()?;
                let two = [2.0 * xi[0]];
                Ok((levy_exponent(&nu, &two, Centering::Full)? - levy_exponent(&nu, xi, Centering::Full)?).exp())
            }
        },
    }
}

/// Scaling of the partial sums `S_n = b_n Σ Z_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SumScale {
    /// `λ₁ n^{-1/α}` (Pareto), `n^{-1/α}` (layered), `1/n` (canonical).
    Standard,
    Custom(f64),
}

pub fn sum_scale(law: &InitialLaw, n: u64, scale: SumScale) -> Result<f64> {
    if n == 0 {
        return Err(DistError::InvalidParameter("n must be positive".into()));
    }
    let nf = n as f64;
    Ok(match scale {
        SumScale::Custom(b) if b > 0.0 => b,
        SumScale::Custom(b) => return Err(DistError::InvalidParameter(format!("b_n = {b} must be positive"))),
        SumScale::Standard => match law {
            InitialLaw::ParetoSymmetrized { alpha } => stable_constants(*alpha, 1)?.lambda1_alpha * nf.powf(-1.0 / alpha),
            InitialLaw::Layered { alpha, .. } => nf.powf(-1.0 / alpha),
            InitialLaw::CanonicalStable { .. } | InitialLaw::CanonicalSd { .. } => 1.0 / nf,
        },
    })
}

pub type CfFn = Arc<dyn Fn(f64) -> Result<Complex64> + Send + Sync>;

/// Exact characteristic function of the one-dimensional normalized sum.
pub fn sum_cf(law: &InitialLaw, n: u64, scale: SumScale) -> Result<CfFn> {
    let b = sum_scale(law, n, scale)?;
    let nf = n as f64;
    Ok(match law.clone() {
        InitialLaw::ParetoSymmetrized { alpha } => Arc::new(move |x| Ok(Complex64::new((nf * pareto_sym_log_cf(alpha, b * x)?).exp(), 0.0))),
        InitialLaw::Layered { alpha, beta, d: 1 } => {
            let c = stable_constants(alpha, 1)?.c_alpha;
            Arc::new(move |x| {
                let main = -nf * (b * x).abs().powf(alpha) / c;
                Ok(Complex64::new((main + nf * layer_correction(alpha, beta, b * x)?).exp(), 0.0))
            })
        }
        InitialLaw::CanonicalStable { alpha } => {
            let s = b.powf(alpha) * ((nf + 1.0).powf(alpha) - 1.0);
            Arc::new(move |x| Ok(Complex64::new((-s * x.abs().powf(alpha)).exp(), 0.0)))
        }
        InitialLaw::CanonicalSd { k } => {
            let nu = LevyMeasure::new(SphericalMeasure::symmetric_pair(1.0)?, k);
            Arc::new(move |x| {
                let hi = levy_exponent(&nu, &[(nf + 1.0) * b * x], Centering::Full)?;
                let lo = levy_exponent(&nu, &[b * x], Centering::Full)?;
                Ok((hi - lo).exp())
            })
        }
        other => return Err(DistError::UnsupportedLaw(format!("sum cf of {} in d > 1", other.tag()))),
    })
}

/// Density tail of the normalized sum (identical for every `n` under the standard scale).
fn sum_tail(law: &InitialLaw, n: u64, b: f64) -> Result<Option<PowerTail>> {
    let nf = n as f64;
    Ok(match law {
        InitialLaw::ParetoSymmetrized { alpha } => Some(PowerTail { c: nf * alpha * b.powf(*alpha), alpha: *alpha }),
        InitialLaw::Layered { alpha, .. } => Some(PowerTail { c: nf * b.powf(*alpha), alpha: *alpha }),
        InitialLaw::CanonicalStable { alpha } => {
            let s = b.powf(*alpha) * ((nf + 1.0).powf(*alpha) - 1.0);
            Some(PowerTail { c: s * stable_constants(*alpha, 1)?.c_alpha, alpha: *alpha })
        }
        InitialLaw::CanonicalSd { k } => k.tail_exponent.map(|a| PowerTail { c: f64::NAN, alpha: a }).filter(|t| t.c.is_finite()),
    })
}

// ---------------------------------------------------------------------------
// Densities by FFT inversion

/// Density tail `c |x|^{-1-α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dx: f64,
    pub log2_n: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { dx: 1.0 / 16.0, log2_n: 17 }
    }
}

/// Symmetric density on the nonnegative grid `x_j = j·dx`, with its CDF and an
/// optional power tail beyond the last node.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    dx: f64,
    ps: Vec<f64>,
    cdf: Vec<f64>,
    tail: Option<PowerTail>,
}

// ∫_0^1 of the quintic through nodes -2..3.
const NC6: [f64; 6] = [11.0 / 1440.0, -93.0 / 1440.0, 802.0 / 1440.0, 802.0 / 1440.0, -93.0 / 1440.0, 11.0 / 1440.0];

/// Inverts a real, even characteristic function `g`.
pub fn density_from_cf<G>(g: G, tail: Option<PowerTail>, spec: &GridSpec) -> Result<DensityGrid>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    if !(spec.dx > 0.0) || spec.log2_n < 8 || spec.log2_n > 24 {
        return Err(DistError::InvalidParameter(format!("{spec:?}")));
    }
    let n = 1usize << spec.log2_n;
    let period = n as f64 * spec.dx;
    let dxi = 2.0 * PI / period;
    let half = n / 2;
    // evaluate in blocks, stopping once the cf has been negligible for a whole block
    let mut vals = vec![0.0; half + 1];
    const BLOCK: usize = 512;
    let mut start = 0;
    while start <= half {
        let end = (start + BLOCK).min(half + 1);
        let block: Vec<f64> = (start..end).into_par_iter().map(|k| g(k as f64 * dxi)).collect::<Result<_>>()?;
        let negligible = block.iter().all(|v| v.abs() < 1e-18);
        vals[start..end].copy_from_slice(&block);
        if negligible && start > 0 {
            break;
        }
        start = end;
    }
    if vals[half].abs() > 1e-12 {
        return Err(DistError::GridTooCoarse(vals[half].abs()));
    }
    let mut buf: Vec<rustfft::num_complex::Complex<f64>> = (0..n)
        .map(|k| {
            let j = if k <= half { k } else { n - k };
            rustfft::num_complex::Complex::new(vals[j], 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let keep = n / 16;
    let mut ps: Vec<f64> = (0..keep).map(|j| buf[j].re * dxi / (2.0 * PI)).collect();
    if let Some(t) = tail {
        for (j, p) in ps.iter_mut().enumerate() {
            *p -= t.c * alias_sum(j as f64 * spec.dx, period, t.alpha);
        }
    }
    // clamp round-off negatives in the far tail
    for p in ps.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let at = |j: isize| ps[j.unsigned_abs()];
    let usable = keep - 3;
    let mut cdf = vec![0.5; usable];
    for j in 1..usable {
        let i = (j - 1) as isize;
        let area: f64 = (0..6).map(|m| NC6[m] * at(i - 2 + m as isize)).sum::<f64>() * spec.dx;
        cdf[j] = cdf[j - 1] + area;
    }
    ps.truncate(usable);
    Ok(DensityGrid { dx: spec.dx, ps, cdf, tail })
}

// Σ_{m≥1} (mL + x)^{-1-α} + (mL - x)^{-1-α}.
fn alias_sum(x: f64, period: f64, alpha: f64) -> f64 {
    const M: usize = 64;
    let mut s = 0.0;
    for m in 1..=M {
        let c = m as f64 * period;
        s += (c + x).powf(-1.0 - alpha) + (c - x).powf(-1.0 - alpha);
    }
    s + 2.0 * ((M as f64 + 0.5) * period).powf(-alpha) / (alpha * period)
}

impl DensityGrid {
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Largest covered abscissa.
    pub fn x_max(&self) -> f64 {
        (self.ps.len() - 1) as f64 * self.dx
    }

    /// Symmetric abscissae `-x_max..x_max` and the matching density values.
    pub fn table(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.ps.len() as isize - 1;
        (-m..=m).map(|j| (j as f64 * self.dx, self.ps[j.unsigned_abs()])).unzip()
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    /// `P(X > x_max)`.
    pub fn edge_survival(&self) -> f64 {
        1.0 - self.cdf[self.cdf.len() - 1]
    }

    /// Probability mass of the grid range plus the tail mass.
    pub fn total_mass(&self) -> f64 {
        let (xs, ps) = self.table();
        let mut m = 0.0;
        for i in 1..xs.len() {
            m += 0.5 * (ps[i] + ps[i - 1]) * self.dx;
        }
        let tail = match self.tail {
            Some(t) => 2.0 * t.c * self.x_max().powf(-t.alpha) / t.alpha,
            None => 0.0,
        };
        m + tail
    }

    fn tail_or_err(&self, x: f64) -> Result<PowerTail> {
        self.tail.ok_or(DistError::OutOfGrid(x))
    }

    /// Density by six-point interpolation on the grid, power tail beyond it.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let ax = x.abs();
        let xm = self.x_max();
        if ax > xm - 3.0 * self.dx {
            if ax <= xm {
                let j = (ax / self.dx).round() as usize;
                return Ok(self.ps[j.min(self.ps.len() - 1)]);
            }
            let t = self.tail_or_err(x)?;
            // match the grid's edge survival so pdf and cdf stay consistent
            let s = self.edge_survival();
            return Ok(t.alpha * s * xm.powf(t.alpha) * ax.powf(-1.0 - t.alpha));
        }
        let u = ax / self.dx;
        let j = u.floor() as isize;
        let t = u - j as f64;
        let mut v = 0.0;
        for m in -2..=3isize {
            let mut w = 1.0;
            for q in -2..=3isize {
                if q != m {
                    w *= (t - q as f64) / (m - q) as f64;
                }
            }
            v += w * self.ps[(j + m).unsigned_abs()];
        }
        Ok(v.max(0.0))
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(1.0 - self.cdf(-x)?);
        }
        let xm = self.x_max();
        if x >= xm {
            let t = self.tail_or_err(x)?;
            return Ok(1.0 - self.edge_survival() * (xm / x).powf(t.alpha));
        }
        let j = ((x / self.dx).floor() as usize).min(self.cdf.len() - 2);
        let (x0, x1) = (j as f64 * self.dx, (j + 1) as f64 * self.dx);
        Ok(hermite(x, x0, x1, self.cdf[j], self.cdf[j + 1], self.ps[j], self.ps[j + 1]))
    }

    /// Inverse CDF, with the power tail inverted analytically beyond the grid.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::InvalidParameter(format!("p = {p} outside (0, 1)")));
        }
        if p < 0.5 {
            return Ok(-self.quantile(1.0 - p)?);
        }
        if p == 0.5 {
            return Ok(0.0);
        }
        let last = self.cdf.len() - 1;
        if p >= self.cdf[last] {
            let t = self.tail_or_err(f64::INFINITY)?;
            return Ok(self.x_max() * (self.edge_survival() / (1.0 - p)).powf(1.0 / t.alpha));
        }
        let j = self.cdf.partition_point(|&c| c <= p).saturating_sub(1).min(last - 1);
        let (mut lo, mut hi) = (j as f64 * self.dx, (j + 1) as f64 * self.dx);
        let f = |x: f64| hermite(x, j as f64 * self.dx, (j + 1) as f64 * self.dx, self.cdf[j], self.cdf[j + 1], self.ps[j], self.ps[j + 1]);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn hermite(x: f64, x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1
}

/// FFT density of a one-dimensional law.
pub fn density_1d(law: &Law, spec: &GridSpec) -> Result<DensityGrid> {
    if law.dim() != 1 {
        return Err(DistError::UnsupportedLaw(format!("density of {} needs d = 1", law.tag())));
    }
    match law {
        Law::Stable(s) => {
            let scale = s.scale_1d();
            let a = s.alpha;
            density_from_cf(|x| Ok((-scale * x.abs().powf(a)).exp()), Some(s.tail_1d()?), spec)
        }
        Law::Initial(i) => sum_density(i, 1, SumScale::Custom(1.0), spec),
    }
}

/// FFT density of the normalized sum `b_n Σ_{k≤n} Z_k`.
pub fn sum_density(law: &InitialLaw, n: u64, scale: SumScale, spec: &GridSpec) -> Result<DensityGrid> {
    let b = sum_scale(law, n, scale)?;
    let cf = sum_cf(law, n, scale)?;
    density_from_cf(|x| Ok(cf(x)?.re), sum_tail(law, n, b)?, spec)
}

// ---------------------------------------------------------------------------
// Sampling

/// Samples per counter-based RNG stream.
pub const CHUNK: usize = 4096;

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// The RNG stream for `(seed, tag, index)`; independent of scheduling.
pub fn stream_rng(seed: u64, tag: &str, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ fnv1a(tag).rotate_left(17));
    rng.set_stream(index);
    rng
}

/// Symmetric Chambers-Mallows-Stuck draw with characteristic function `exp(-|ξ|^α)`.
pub fn cms_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.gen::<f64>() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * ((v * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive stable draw with Laplace transform `exp(-λ^a)`, `a ∈ (0,1)`.
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let v = PI * rng.gen::<f64>();
    let w: f64 = rng.sample(Exp1);
    (a * v).sin() / v.sin().powf(1.0 / a) * (((1.0 - a) * v).sin() / w).powf((1.0 - a) / a)
}

/// One-sided Pareto draw, survival `(1+x)^{-α}`.
pub fn pareto_one_sided<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.gen::<f64>();
    u.powf(-1.0 / alpha) - 1.0
}

fn stable_draw<R: Rng + ?Sized>(law: &StableLaw, rng: &mut R, out: &mut [f64]) {
    let a = law.alpha;
    match &law.normalization {
        Normalization::Spectral(atoms) => {
            out.iter_mut().for_each(|v| *v = 0.0);
            for (y, w) in atoms {
                let z = w.powf(1.0 / a) * cms_symmetric(a, rng);
                for (o, c) in out.iter_mut().zip(y) {
                    *o += z * c;
                }
            }
        }
        _ => {
            let s = law.scale_1d();
            if law.d == 1 {
                out[0] = s.powf(1.0 / a) * cms_symmetric(a, rng);
            } else {
                // Gaussian subordination: √A·G with E e^{-λA} = e^{-λ^{α/2}}
                let amp = if a == 2.0 { 1.0 } else { positive_stable(a / 2.0, rng).sqrt() };
                let sd = (2.0 * s.powf(2.0 / a)).sqrt();
                for o in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = amp * sd * g;
                }
            }
        }
    }
}

/// `n` rows of `d` reals, generated from a counter-based seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub d: usize,
    pub n: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub law_tag: String,
}

const MAGIC: &[u8; 8] = b"SLBATCH1";

impl SampleBatch {
    pub fn from_values(d: usize, values: Vec<f64>, seed: u64, law_tag: &str) -> Result<Self> {
        if d == 0 || values.len() % d != 0 {
            return Err(DistError::InvalidParameter(format!("{} values do not form rows of {d}", values.len())));
        }
        Ok(Self { d, n: values.len() / d, values, seed, law_tag: law_tag.into() })
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.d)
    }

    /// 32-byte header (magic, d, n, seed) then little-endian row-major values.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for h in [self.d as u64, self.n as u64, self.seed] {
            w.write_all(&h.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R, law_tag: &str) -> Result<Self> {
        let mut head = [0u8; 32];
        r.read_exact(&mut head)?;
        if &head[..8] != MAGIC {
            return Err(DistError::BadFormat("bad magic".into()));
        }
        let word = |i: usize| u64::from_le_bytes(head[8 * i..8 * i + 8].try_into().unwrap());
        let (d, n, seed) = (word(1) as usize, word(2) as usize, word(3));
        if d == 0 {
            return Err(DistError::BadFormat("zero dimension".into()));
        }
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 8 * d * n {
            return Err(DistError::BadFormat(format!("expected {} value bytes, found {}", 8 * d * n, bytes.len())));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { d, n, values, seed, law_tag: law_tag.into() })
    }
}

/// Draws `n` rows by chunked counter streams, each chunk filled by `fill`.
fn generate<F>(d: usize, n: usize, seed: u64, tag: &str, fill: F) -> SampleBatch
where
    F: Fn(&mut ChaCha12Rng, usize, &mut [f64]) + Sync,
{
    let mut values = vec![0.0; n * d];
    values.par_chunks_mut(CHUNK * d).enumerate().for_each(|(c, chunk)| {
        let mut rng = stream_rng(seed, tag, c as u64);
        for (i, row) in chunk.chunks_mut(d).enumerate() {
            fill(&mut rng, c * CHUNK + i, row);
        }
    });
    SampleBatch { d, n, values, seed, law_tag: tag.into() }
}

/// `n` draws from a law. Canonical initial laws give the summands `Z_1..Z_n`.
pub fn sample(law: &Law, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(DistError::InvalidParameter("n must be positive".into()));
    }
    let tag = law.tag();
    let d = law.dim();
    match law {
        Law::Stable(s) => Ok(generate(d, n, seed, &tag, |rng, _, row| stable_draw(s, rng, row))),
        Law::Initial(InitialLaw::ParetoSymmetrized { alpha }) => {
            let a = *alpha;
            Ok(generate(1, n, seed, &tag, |rng, _, row| row[0] = pareto_one_sided(a, rng) - pareto_one_sided(a, rng)))
        }
        Law::Initial(InitialLaw::CanonicalStable { alpha }) => {
            let a = *alpha;
            Ok(generate(1, n, seed, &tag, |rng, i, row| {
                let k = (i + 1) as f64;
                row[0] = ((k + 1.0).powf(a) - k.powf(a)).powf(1.0 / a) * cms_symmetric(a, rng)
            }))
        }
        Law::Initial(InitialLaw::Layered { d: 1, .. }) => {
            let grid = density_1d(law, &GridSpec::default())?;
            inverse_cdf_batch(&grid, n, seed, &tag)
        }
        Law::Initial(l) => Err(DistError::UnsupportedLaw(format!("sampling {}", l.tag()))),
    }
}

fn inverse_cdf_batch(grid: &DensityGrid, n: usize, seed: u64, tag: &str) -> Result<SampleBatch> {
    let batch = generate(1, n, seed, tag, |rng, _, row| {
        let u: f64 = rng.gen();
        row[0] = grid.quantile(u.max(f64::MIN_POSITIVE)).unwrap_or(f64::NAN);
    });
    if batch.values.iter().any(|v| v.is_nan()) {
        return Err(DistError::OutOfGrid(f64::NAN));
    }
    Ok(batch)
}

/// `batch_count` independent realizations of `S_n = b_n Σ_{k≤n} Z_k`.
/// Canonical stable sums use their exact law `b_n((n+1)^α - 1)^{1/α} X_α`;
/// the other laws are summed draw by draw.
pub fn partial_sum(law: &InitialLaw, n: u64, batch_count: usize, seed: u64, scale: SumScale) -> Result<SampleBatch> {
    if batch_count == 0 {
        return Err(DistError::InvalidParameter("batch_count must be positive".into()));
    }
    let b = sum_scale(law, n, scale)?;
    let tag = format!("{}/sum{n}", law.tag());
    match law {
        InitialLaw::CanonicalStable { alpha } => {
            let a = *alpha;
            let factor = b * ((n as f64 + 1.0).powf(a) - 1.0).powf(1.0 / a);
            Ok(generate(1, batch_count, seed, &tag, |rng, _, row| row[0] = factor * cms_symmetric(a, rng)))
        }
        InitialLaw::ParetoSymmetrized { alpha } => {
            let a = *alpha;
            Ok(generate(1, batch_count, seed, &tag, |rng, _, row| {
                let s: f64 = (0..n).map(|_| pareto_one_sided(a, rng) - pareto_one_sided(a, rng)).sum();
                row[0] = b * s;
            }))
        }
        InitialLaw::Layered { d: 1, .. } => {
            let grid = density_1d(&Law::Initial(law.clone()), &GridSpec::default())?;
            let batch = generate(1, batch_count, seed, &tag, |rng, _, row| {
                let s: f64 = (0..n).map(|_| grid.quantile(rng.gen::<f64>().max(f64::MIN_POSITIVE)).unwrap_or(f64::NAN)).sum();
                row[0] = b * s;
            });
            if batch.values.iter().any(|v| v.is_nan()) {
                return Err(DistError::OutOfGrid(f64::NAN));
            }
            Ok(batch)
        }
        other => Err(DistError::UnsupportedLaw(format!("partial sums of {}", other.tag()))),
    }
}

/// Realizations of `S_n` drawn by inverse CDF from its exact FFT density.
pub fn partial_sum_exact(law: &InitialLaw, n: u64, batch_count: usize, seed: u64, scale: SumScale) -> Result<SampleBatch> {
    let grid = sum_density(law, n, scale, &GridSpec::default())?;
    inverse_cdf_batch(&grid, batch_count, seed, &format!("{}/exact{n}", law.tag()))
}
