//! Config-driven experiment runner: config parsing, study dispatch and CSV output.
//!
//! A config is a list of `key = value` lines; `#` starts a comment. Every study
//! produces [`ResultRow`]s; a failing row is reported and skipped while the
//! remaining rows still run.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dist::{cf_eval, density_1d, stream_rng, sum_cf, sum_density, GridSpec, InitialLaw, Law, StableLaw, SumScale};
use crate::levy::{bound_eval, omega_error_integrals, stable_abs_mean, weight_layered, weight_stable_canonical, BoundStudy, LevyMeasure};
use crate::metrics::{cf_battery_distance, default_omega_grid, fit_rate, median, RateFit};
use crate::quadfun::{dawson, dawson_by_sine_transform, dawson_identity_integrals};
use crate::spectral::{
    carre_diagnostics, form_minus_norm_cauchy, form_split_cauchy, poincare_battery, poincare_check, rayleigh_l1rot, weyl_gap_alpha,
    PoincareLaw, SpectralReport, TruncationLadder,
};
use crate::stein::{h2_battery, stein_bounds_check, stein_residual, SteinSolveSpec};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "STABLELAB_WORKERS";

pub const CSV_HEADER: [&str; 7] = ["study", "n_or_R", "estimate", "stderr", "bound", "seconds", "seed"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    fn validation(field: &str, message: impl Into<String>) -> Self {
        CliError::Validation { field: field.into(), message: message.into() }
    }

    /// The offending field of a validation error.
    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Study {
    RatesCanonicalStable,
    RatesParetoSym,
    RatesLayeredStable,
    RatesLayeredCauchy,
    SpectralSuite,
    SteinSuite,
    SpecfunSuite,
    PoincareSuite,
}

impl Study {
    pub const ALL: [Study; 8] = [
        Study::RatesCanonicalStable,
        Study::RatesParetoSym,
        Study::RatesLayeredStable,
        Study::RatesLayeredCauchy,
        Study::SpectralSuite,
        Study::SteinSuite,
        Study::SpecfunSuite,
        Study::PoincareSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::RatesCanonicalStable => "rates-canonical-stable",
            Study::RatesParetoSym => "rates-pareto-sym",
            Study::RatesLayeredStable => "rates-layered-stable",
            Study::RatesLayeredCauchy => "rates-layered-cauchy",
            Study::SpectralSuite => "spectral-suite",
            Study::SteinSuite => "stein-suite",
            Study::SpecfunSuite => "specfun-suite",
            Study::PoincareSuite => "poincare-suite",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Study::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| CliError::validation("study", format!("unknown study {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub alpha: f64,
    pub beta: f64,
    pub d: usize,
    pub n_grid: Vec<u64>,
    /// Monte Carlo draws per `n` and replicate; 0 disables the MC track.
    pub samples: usize,
    pub replicates: usize,
    pub ladder: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// 0 means the rayon default.
    pub workers: usize,
    /// Keys that were filled from defaults.
    pub defaulted: Vec<String>,
}

pub const KEYS: [&str; 11] = ["study", "alpha", "beta", "d", "n_grid", "samples", "replicates", "ladder", "seed", "out", "workers"];

/// Raw key/value pairs with the line each came from (0 for command-line flags).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigBuilder {
    values: BTreeMap<&'static str, (String, usize)>,
}

impl ConfigBuilder {
    /// Adds a config-file entry; unknown and repeated keys are parse errors.
    pub fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<(), CliError> {
        let Some(k) = KEYS.iter().find(|k| **k == key) else {
            return Err(CliError::Parse { line, message: format!("unknown key {key:?}") });
        };
        if let Some((_, first)) = self.values.get(k) {
            return Err(CliError::Parse { line, message: format!("duplicate key {key:?} (first set on line {first})") });
        }
        self.values.insert(k, (value.to_string(), line));
        Ok(())
    }

    /// Sets or replaces a value, as command-line flags do.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let Some(k) = KEYS.iter().find(|k| **k == key) else {
            return Err(CliError::Parse { line: 0, message: format!("unknown key {key:?}") });
        };
        self.values.insert(k, (value.to_string(), 0));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn build(&self) -> Result<ExperimentConfig, CliError> {
        if let Some(a) = self.get("alpha").map(|v| num::<f64>("alpha", v)).transpose()? {
            if !(a > 0.0 && a < 2.0) {
                return Err(CliError::validation("alpha", format!("{a} outside (0, 2)")));
            }
        }
        let study: Study = self.get("study").ok_or_else(|| CliError::validation("study", "missing"))?.parse()?;
        let mut defaulted = Vec::new();
        let mut pick = |key: &str| {
            let v = self.get(key);
            if v.is_none() {
                defaulted.push(key.to_string());
            }
            v
        };
        let d = defaults(study);
        let alpha = pick("alpha").map(|v| num::<f64>("alpha", v)).transpose()?.unwrap_or(d.alpha);
        let beta = pick("beta").map(|v| num::<f64>("beta", v)).transpose()?.unwrap_or(d.beta);
        let dim = pick("d").map(|v| num::<usize>("d", v)).transpose()?.unwrap_or(1);
        let n_grid = pick("n_grid").map(|v| grid::<u64>("n_grid", v)).transpose()?.unwrap_or(d.n_grid);
        let samples = pick("samples").map(|v| num::<usize>("samples", v)).transpose()?.unwrap_or(0);
        let replicates = pick("replicates").map(|v| num::<usize>("replicates", v)).transpose()?.unwrap_or(5);
        let ladder = pick("ladder").map(|v| grid::<f64>("ladder", v)).transpose()?.unwrap_or(d.ladder);
        let seed = pick("seed").map(|v| num::<u64>("seed", v)).transpose()?.unwrap_or(0);
        let out = pick("out").map(PathBuf::from);
        let workers = pick("workers").map(|v| num::<usize>("workers", v)).transpose()?.unwrap_or(0);
        let cfg = ExperimentConfig { study, alpha, beta, d: dim, n_grid, samples, replicates, ladder, seed, out, workers, defaulted };
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Defaults {
    alpha: f64,
    beta: f64,
    n_grid: Vec<u64>,
    ladder: Vec<f64>,
}

fn doubling(lo: u64, hi: u64) -> Vec<u64> {
    std::iter::successors(Some(lo), |&n| Some(2 * n)).take_while(|&n| n <= hi).collect()
}

fn defaults(study: Study) -> Defaults {
    let ladder = vec![10.0, 20.0, 40.0, 80.0, 160.0];
    let (alpha, beta, n_grid) = match study {
        Study::RatesCanonicalStable => (1.5, 1.8, (2..=1 << 12).collect()),
        Study::RatesParetoSym | Study::RatesLayeredStable => (1.5, 1.8, doubling(1 << 4, 1 << 14)),
        Study::RatesLayeredCauchy => (1.0, 1.5, doubling(2, 1 << 12)),
        Study::SpectralSuite => (1.5, 1.8, doubling(2, 1 << 12)),
        Study::SteinSuite | Study::SpecfunSuite | Study::PoincareSuite => (1.0, 1.8, doubling(2, 1 << 12)),
    };
    Defaults { alpha, beta, n_grid, ladder }
}

fn num<T: FromStr>(field: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::validation(field, format!("cannot parse {v:?}")))
}

// A comma list, `lo..hi` (doubling from lo up to hi) or `lo:hi` (every integer).
fn grid<T>(field: &str, v: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr + Copy + PartialOrd + std::ops::Add<Output = T> + From<u8>,
{
    if let Some((lo, hi)) = v.split_once(':') {
        let (mut cur, hi): (T, T) = (num(field, lo)?, num(field, hi)?);
        let mut out = Vec::new();
        while cur <= hi {
            out.push(cur);
            cur = cur + T::from(1);
        }
        return Ok(out);
    }
    if let Some((lo, hi)) = v.split_once("..") {
        let (lo, hi): (T, T) = (num(field, lo)?, num(field, hi)?);
        let mut out = vec![lo];
        let mut cur = lo;
        while cur + cur <= hi && cur + cur > cur {
            cur = cur + cur;
            out.push(cur);
        }
        return Ok(out);
    }
    v.split(',').map(|p| num(field, p)).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let a = self.alpha;
        if !(a > 0.0 && a < 2.0) {
            return Err(CliError::validation("alpha", format!("{a} outside (0, 2)")));
        }
        let alpha_ok = match self.study {
            Study::RatesCanonicalStable | Study::RatesParetoSym | Study::RatesLayeredStable => a > 1.0,
            Study::RatesLayeredCauchy => a == 1.0,
            Study::SpectralSuite | Study::SteinSuite => a >= 1.0,
            Study::SpecfunSuite | Study::PoincareSuite => true,
        };
        if !alpha_ok {
            return Err(CliError::validation("alpha", format!("{a} not supported by {}", self.study)));
        }
        if matches!(self.study, Study::RatesLayeredStable | Study::RatesLayeredCauchy) && !(self.beta > a && self.beta < 2.0) {
            return Err(CliError::validation("beta", format!("{} outside (alpha, 2)", self.beta)));
        }
        if self.d != 1 {
            return Err(CliError::validation("d", format!("{} unsupported; every study runs in d = 1", self.d)));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::validation("n_grid", "must be positive and strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(CliError::validation("replicates", "must be at least 1"));
        }
        if self.study == Study::SpectralSuite {
            TruncationLadder::new(self.ladder.clone()).map_err(|e| CliError::validation("ladder", e.to_string()))?;
        }
        Ok(())
    }
}

/// Parses a config file into raw entries.
pub fn parse_entries(text: &str) -> Result<ConfigBuilder, CliError> {
    let mut b = ConfigBuilder::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(CliError::Parse { line, message: format!("expected key = value, got {content:?}") });
        };
        b.insert(k.trim(), v.trim(), line)?;
    }
    Ok(b)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    parse_entries(text)?.build()
}

/// One CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub study: String,
    pub n_or_r: Option<f64>,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    pub seconds: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub label: String,
    pub message: String,
}

/// Rows of a study plus its fitted rates and extrapolation reports.
#[derive(Debug, Clone, Default)]
pub struct StudyOutput {
    pub rows: Vec<ResultRow>,
    pub errors: Vec<RowError>,
    pub fits: Vec<(String, RateFit)>,
    pub reports: Vec<SpectralReport>,
}

impl StudyOutput {
    pub fn row<'a>(&'a self, study: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.study == study)
    }

    pub fn fit(&self, label: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.0 == label).map(|f| &f.1)
    }

    fn push(&mut self, r: Result<ResultRow, RowError>) {
        match r {
            Ok(row) => self.rows.push(row),
            Err(e) => self.errors.push(e),
        }
    }

    // Fits log-distance on log-n over the rows with the given label.
    fn fit_rows(&mut self, label: &str, seed: u64) {
        let (ns, ds): (Vec<f64>, Vec<f64>) = self.row(label).map(|r| (r.n_or_r.unwrap_or(f64::NAN), r.estimate)).unzip();
        let start = Instant::now();
        match fit_rate(&ns, &ds, 200) {
            Ok(fit) => {
                self.rows.push(ResultRow {
                    study: format!("{label}/exponent"),
                    n_or_r: None,
                    estimate: fit.exponent,
                    stderr: Some(0.5 * (fit.exponent_ci.1 - fit.exponent_ci.0)),
                    bound: None,
                    seconds: start.elapsed().as_secs_f64(),
                    seed,
                });
                self.fits.push((label.to_string(), fit));
            }
            Err(e) => self.errors.push(RowError { label: format!("{label}/exponent"), message: e.to_string() }),
        }
    }

    fn add_report(&mut self, label: &str, report: Result<SpectralReport, String>, start: Instant, seed: u64) {
        match report {
            Ok(rep) => {
                let seconds = start.elapsed().as_secs_f64();
                for (&r, &v) in rep.scales.iter().zip(&rep.values) {
                    self.rows.push(ResultRow { study: label.into(), n_or_r: Some(r), estimate: v, stderr: None, bound: None, seconds, seed });
                }
                self.rows.push(ResultRow {
                    study: format!("{label}/limit"),
                    n_or_r: None,
                    estimate: rep.limit,
                    stderr: Some(rep.residual),
                    bound: None,
                    seconds,
                    seed,
                });
                self.reports.push(rep);
            }
            Err(message) => self.errors.push(RowError { label: label.into(), message }),
        }
    }
}

// Runs one row, timing it and turning its error into a RowError.
fn timed<F>(label: &str, n: Option<f64>, seed: u64, f: F) -> Result<ResultRow, RowError>
where
    F: FnOnce() -> Result<(f64, Option<f64>, Option<f64>), String>,
{
    let start = Instant::now();
    let (estimate, stderr, bound) = f().map_err(|message| RowError { label: label.into(), message })?;
    if !estimate.is_finite() {
        return Err(RowError { label: label.into(), message: format!("non-finite estimate {estimate}") });
    }
    Ok(ResultRow { study: label.into(), n_or_r: n, estimate, stderr, bound, seconds: start.elapsed().as_secs_f64(), seed })
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs a study on a pool of `config.workers` threads (or `STABLELAB_WORKERS`,
/// or the rayon default). Rows do not depend on the worker count.
pub fn run_study(config: &ExperimentConfig) -> Result<StudyOutput, CliError> {
    config.validate()?;
    let workers = if config.workers > 0 {
        config.workers
    } else {
        std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()).unwrap_or(0)
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(|| dispatch(config)))
}

fn dispatch(cfg: &ExperimentConfig) -> StudyOutput {
    match cfg.study {
        Study::RatesCanonicalStable => canonical_stable(cfg),
        Study::RatesParetoSym => {
            let law = InitialLaw::ParetoSymmetrized { alpha: cfg.alpha };
            cf_rate_study(cfg, &law, None)
        }
        Study::RatesLayeredStable => {
            let law = InitialLaw::Layered { alpha: cfg.alpha, beta: cfg.beta, d: 1 };
            cf_rate_study(cfg, &law, Some(BoundStudy::LayeredStable { alpha: cfg.alpha, beta: cfg.beta }))
        }
        Study::RatesLayeredCauchy => {
            let law = InitialLaw::Layered { alpha: 1.0, beta: cfg.beta, d: 1 };
            cf_rate_study(cfg, &law, Some(BoundStudy::LayeredCauchy { beta: cfg.beta }))
        }
        Study::SpectralSuite => spectral_suite(cfg),
        Study::SteinSuite => stein_suite(cfg),
        Study::SpecfunSuite => specfun_suite(cfg),
        Study::PoincareSuite => poincare_suite(cfg),
    }
}

// Exact W₁ = |aₙ - 1| E|X_α| of the canonical stable sums, with the explicit
// bound at C_{α,d} = 1.
fn canonical_stable(cfg: &ExperimentConfig) -> StudyOutput {
    let label = cfg.study.name();
    let alpha = cfg.alpha;
    let rows: Vec<_> = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            timed(label, Some(n as f64), cfg.seed, || {
                let (_, a_n) = weight_stable_canonical(n, alpha).map_err(err)?;
                let w1 = (a_n - 1.0).abs() * stable_abs_mean(alpha).map_err(err)?;
                let bound = bound_eval(BoundStudy::CanonicalStable { alpha }, n, 1.0).map_err(err)?;
                Ok((w1, None, Some(bound)))
            })
        })
        .collect();
    let mut out = StudyOutput::default();
    rows.into_iter().for_each(|r| out.push(r));
    out.fit_rows(label, cfg.seed);
    out
}

// Deterministic cf-battery distances between the normalized sums and their
// stable limit, an optional Monte Carlo W₁ track, and for the layered laws the
// explicit bound and its driving integral.
fn cf_rate_study(cfg: &ExperimentConfig, law: &InitialLaw, bound: Option<BoundStudy>) -> StudyOutput {
    let name = cfg.study.name();
    let cf_label = format!("{name}/cf-battery");
    let omegas = default_omega_grid();
    let mut out = StudyOutput::default();
    let target = match law.target() {
        Ok(t) => t,
        Err(e) => {
            out.errors.push(RowError { label: name.into(), message: e.to_string() });
            return out;
        }
    };
    let target_law = Law::Stable(target.clone());
    let rows: Vec<_> = cfg
        .n_grid
        .par_iter()
        .map(|&n| {
            timed(&cf_label, Some(n as f64), cfg.seed, || {
                let cf = sum_cf(law, n, SumScale::Standard).map_err(err)?;
                let nan = num_complex::Complex64::new(f64::NAN, 0.0);
                let d = cf_battery_distance(
                    |w| cf(w).unwrap_or(nan),
                    |w| cf_eval(&target_law, &[w]).unwrap_or(nan),
                    &omegas,
                )
                .map_err(err)?;
                let b = bound.map(|s| bound_eval(s, n, 1.0)).transpose().map_err(err)?;
                Ok((d, None, b))
            })
        })
        .collect();
    rows.into_iter().for_each(|r| out.push(r));
    out.fit_rows(&cf_label, cfg.seed);

    if let Some(BoundStudy::LayeredStable { alpha, beta }) = bound {
        let label = format!("{name}/omega-first");
        let rows: Vec<_> = cfg
            .n_grid
            .par_iter()
            .map(|&n| {
                timed(&label, Some(n as f64), cfg.seed, || {
                    let w = weight_layered(n, alpha, beta).map_err(err)?;
                    let nu = LevyMeasure::stable_reference(alpha).map_err(err)?;
                    Ok((omega_error_integrals(&w, &nu, alpha).map_err(err)?.0, None, None))
                })
            })
            .collect();
        rows.into_iter().for_each(|r| out.push(r));
        out.fit_rows(&label, cfg.seed);
    }
    if let Some(BoundStudy::LayeredCauchy { .. }) = bound {
        let label = format!("{name}/n-times-distance");
        let scaled: Vec<_> = out.row(&cf_label).map(|r| (r.n_or_r, r.estimate * r.n_or_r.unwrap_or(f64::NAN))).collect();
        for (n, v) in scaled {
            out.push(timed(&label, n, cfg.seed, || Ok((v, None, None))));
        }
    }
    if cfg.samples > 0 {
        let label = format!("{name}/mc-w1");
        let rows: Vec<_> = cfg.n_grid.par_iter().map(|&n| timed(&label, Some(n as f64), cfg.seed, || mc_w1(cfg, law, &target, n))).collect();
        rows.into_iter().for_each(|r| out.push(r));
        out.fit_rows(&label, cfg.seed);
    }
    out
}

// Median over replicates of the quantile-coupling estimate E|q_n(U) - q(U)|,
// where q_n is the quantile of the exact FFT law of S_n and q that of the
// limit. The stderr column holds the median absolute deviation of the replicates.
fn mc_w1(cfg: &ExperimentConfig, law: &InitialLaw, target: &StableLaw, n: u64) -> Result<(f64, Option<f64>, Option<f64>), String> {
    let sum = sum_density(law, n, SumScale::Standard, &GridSpec::default()).map_err(err)?;
    let limit = density_1d(&Law::Stable(target.clone()), &GridSpec::default()).map_err(err)?;
    let tag = format!("{}/mc-w1/n{n}", law.tag());
    let mut estimates = Vec::with_capacity(cfg.replicates);
    for rep in 0..cfg.replicates {
        // one stream per (seed, study, n, replicate) and fixed-size chunk
        const CHUNK: usize = 4096;
        let chunks = cfg.samples.div_ceil(CHUNK);
        let total: f64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(cfg.seed, &tag, ((rep as u64) << 32) | c as u64);
                let len = CHUNK.min(cfg.samples - c * CHUNK);
                let mut acc = 0.0;
                for _ in 0..len {
                    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                    acc += (sum.quantile(u).unwrap_or(f64::NAN) - limit.quantile(u).unwrap_or(f64::NAN)).abs();
                }
                acc
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        estimates.push(total / cfg.samples as f64);
    }
    let m = median(&estimates).map_err(err)?;
    let dev: Vec<f64> = estimates.iter().map(|e| (e - m).abs()).collect();
    Ok((m, Some(median(&dev).map_err(err)?), None))
}

fn spectral_suite(cfg: &ExperimentConfig) -> StudyOutput {
    let name = cfg.study.name();
    let mut out = StudyOutput::default();
    let ladder = match TruncationLadder::new(cfg.ladder.clone()) {
        Ok(l) => l,
        Err(e) => {
            out.errors.push(RowError { label: name.into(), message: e.to_string() });
            return out;
        }
    };
    let start = Instant::now();
    out.add_report(&format!("{name}/rayleigh"), rayleigh_l1rot(&ladder).map_err(err), start, cfg.seed);
    let start = Instant::now();
    out.add_report(&format!("{name}/form-minus-norm"), form_minus_norm_cauchy(&ladder).map_err(err), start, cfg.seed);
    let start = Instant::now();
    match form_split_cauchy(&ladder) {
        Ok((drift, nonlocal)) => {
            out.add_report(&format!("{name}/form-drift"), Ok(drift), start, cfg.seed);
            out.add_report(&format!("{name}/form-nonlocal"), Ok(nonlocal), start, cfg.seed);
        }
        Err(e) => out.add_report(&format!("{name}/form-split"), Err(e.to_string()), start, cfg.seed),
    }
    let start = Instant::now();
    match carre_diagnostics(&ladder) {
        Ok((ratio, diff)) => {
            out.add_report(&format!("{name}/carre-ratio"), Ok(ratio), start, cfg.seed);
            out.add_report(&format!("{name}/carre-difference"), Ok(diff), start, cfg.seed);
        }
        Err(e) => out.add_report(&format!("{name}/carre"), Err(e.to_string()), start, cfg.seed),
    }
    let start = Instant::now();
    let weyl = format!("{name}/weyl-gap");
    out.add_report(&weyl, weyl_gap_alpha(&ladder, cfg.alpha).map_err(err), start, cfg.seed);
    out.fit_rows(&weyl, cfg.seed);
    out
}

// Stein residual, M₁ and M₂ of f_h for each H₂ test function, with the
// regularity bounds in the bound column (α = 1), and the increment slack at |u| = 100.
fn stein_suite(cfg: &ExperimentConfig) -> StudyOutput {
    let name = cfg.study.name();
    let spec = SteinSolveSpec::new(cfg.alpha);
    let cauchy = cfg.alpha == 1.0;
    let battery = h2_battery();
    let rows: Vec<Vec<Result<ResultRow, RowError>>> = battery
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let idx = Some(i as f64);
            let tag = h.label();
            let mut rows = vec![timed(&format!("{name}/residual:{tag}"), idx, cfg.seed, || {
                Ok((stein_residual(h, &spec).map_err(err)?, None, None))
            })];
            match stein_bounds_check(h, &spec) {
                Ok(b) => {
                    let (b1, b2) = if cauchy { (Some(1.0), Some(0.5)) } else { (Some(1.0), None) };
                    rows.push(timed(&format!("{name}/m1:{tag}"), idx, cfg.seed, || Ok((b.m1_f, None, b1))));
                    rows.push(timed(&format!("{name}/m2:{tag}"), idx, cfg.seed, || Ok((b.m2_f, None, b2))));
                    if let (Some(ok), Some(slack)) = (b.log_increment_ok, b.slack_at_100) {
                        let label = format!("{name}/log-increment-slack:{tag}");
                        rows.push(timed(&label, idx, cfg.seed, || {
                            if ok {
                                Ok((slack, None, None))
                            } else {
                                Err("logarithmic increment bound violated".into())
                            }
                        }));
                    }
                }
                Err(e) => rows.push(Err(RowError { label: format!("{name}/bounds:{tag}"), message: e.to_string() })),
            }
            rows
        })
        .collect();
    let mut out = StudyOutput::default();
    rows.into_iter().flatten().for_each(|r| out.push(r));
    out
}

// Dawson integrals with their exact values as the bound column and the
// absolute error as stderr; the sine representation error on |x| ≤ 4.
fn specfun_suite(cfg: &ExperimentConfig) -> StudyOutput {
    let name = cfg.study.name();
    let mut out = StudyOutput::default();
    let pi = std::f64::consts::PI;
    let exact = [pi.powf(1.5) / 4.0, pi.sqrt() / 4.0];
    let start = Instant::now();
    match dawson_identity_integrals() {
        Ok((a, b)) => {
            let seconds = start.elapsed().as_secs_f64();
            for (k, (v, e)) in [a, b].into_iter().zip(exact).enumerate() {
                out.rows.push(ResultRow {
                    study: format!("{name}/dawson-integral-{}", k + 1),
                    n_or_r: None,
                    estimate: v,
                    stderr: Some((v - e).abs()),
                    bound: Some(e),
                    seconds,
                    seed: cfg.seed,
                });
            }
        }
        Err(e) => out.errors.push(RowError { label: format!("{name}/dawson-integrals"), message: e.to_string() }),
    }
    out.push(timed(&format!("{name}/sine-representation-max-error"), None, cfg.seed, || {
        let errs: Vec<f64> = (-40..=40)
            .into_par_iter()
            .map(|k| {
                let x = k as f64 * 0.1;
                Ok((dawson_by_sine_transform(x).map_err(err)? - dawson(x)).abs())
            })
            .collect::<Result<_, String>>()?;
        Ok((errs.iter().cloned().fold(0.0, f64::max), None, None))
    }));
    out
}

// Variance (estimate) against the Dirichlet form (bound) for the 20-function
// battery; α = 1 is the standard Cauchy law.
fn poincare_suite(cfg: &ExperimentConfig) -> StudyOutput {
    let name = cfg.study.name();
    let law = if cfg.alpha == 1.0 { PoincareLaw::Cauchy } else { PoincareLaw::Stable { alpha: cfg.alpha } };
    let rows: Vec<_> = poincare_battery()
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            timed(&format!("{name}/variance-vs-form"), Some(i as f64), cfg.seed, || {
                let (var, form) = poincare_check(f, &law).map_err(err)?;
                Ok((var, None, Some(form)))
            })
        })
        .collect();
    let mut out = StudyOutput::default();
    rows.into_iter().for_each(|r| out.push(r));
    out
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes rows as CSV. Rows are checked first so nothing is written when
/// any estimate is non-finite.
pub fn write_csv<W: Write>(rows: &[ResultRow], sink: W) -> Result<(), CliError> {
    for r in rows {
        if !r.estimate.is_finite() {
            return Err(CliError::validation("estimate", format!("non-finite estimate {} in row {}", r.estimate, r.study)));
        }
        if !(r.seconds >= 0.0) {
            return Err(CliError::validation("seconds", format!("{} in row {}", r.seconds, r.study)));
        }
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.study.clone(),
            opt(r.n_or_r),
            fmt_float(r.estimate),
            opt(r.stderr),
            opt(r.bound),
            fmt_float(r.seconds),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// Reads rows written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(CliError::Parse { line: 1, message: format!("unexpected header {header:?}") });
    }
    let opt = |s: &str, field: &str| if s.is_empty() { Ok(None) } else { num::<f64>(field, s).map(Some) };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        rows.push(ResultRow {
            study: rec[0].to_string(),
            n_or_r: opt(&rec[1], "n_or_R")?,
            estimate: num("estimate", &rec[2])?,
            stderr: opt(&rec[3], "stderr")?,
            bound: opt(&rec[4], "bound")?,
            seconds: num("seconds", &rec[5])?,
            seed: num("seed", &rec[6])?,
        });
    }
    Ok(rows)
}
