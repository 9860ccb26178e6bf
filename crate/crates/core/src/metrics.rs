//! Distance estimators between samples and target laws, and log-log rate fits.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::dist::SampleBatch;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("quantile function returned {value} at p = {p}")]
    QuantileDomain { p: f64, value: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("distance {value} at position {index} is not positive")]
    NonPositiveDistance { index: usize, value: f64 },
    #[error("rate fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// Finite values in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MetricsError::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::NonFinite);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Exact W₁ between two empirical measures, via their quantile functions.
pub fn w1_two_sample(x: &SortedSample, y: &SortedSample) -> f64 {
    let (a, b) = (x.values(), y.values());
    if a.len() == b.len() {
        let s: f64 = a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum();
        return s / a.len() as f64;
    }
    // Walk the merged breakpoints i/n and j/m of the two step quantiles.
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut p = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next_a = (i + 1) as f64 / n;
        let next_b = (j + 1) as f64 / m;
        let next = next_a.min(next_b);
        total += (next - p) * (a[i] - b[j]).abs();
        p = next;
        if next_a <= next {
            i += 1;
        }
        if next_b <= next {
            j += 1;
        }
    }
    total
}

/// `∫₀¹ |F_x⁻¹(p) − q(p)| dp` with `q` evaluated at the midpoints `(i + ½)/n`.
pub fn w1_vs_quantile<Q: Fn(f64) -> f64>(x: &SortedSample, q: Q) -> Result<f64> {
    let n = x.len() as f64;
    let mut total = 0.0;
    for (i, &v) in x.values().iter().enumerate() {
        let p = (i as f64 + 0.5) / n;
        let t = q(p);
        if !t.is_finite() {
            return Err(MetricsError::QuantileDomain { p, value: t });
        }
        total += (v - t).abs();
    }
    Ok(total / n)
}

/// Quasi-uniform unit directions in ℝ^d: a Halton sequence with a seeded
/// Cranley-Patterson shift, pushed through Box-Muller and normalized.
pub fn sphere_directions(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];
    if d == 1 {
        return vec![vec![1.0]; count.max(1)];
    }
    if d == 2 {
        let shift: f64 = ChaCha12Rng::seed_from_u64(seed).gen();
        return (0..count)
            .map(|k| {
                let t = std::f64::consts::PI * (k as f64 + shift) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let dims = d + d % 2;
    assert!(dims <= PRIMES.len(), "sphere_directions supports d ≤ {}", PRIMES.len());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dims).map(|_| rng.gen()).collect();
    (1..=count as u64)
        .map(|k| {
            let u: Vec<f64> = (0..dims).map(|j| (radical_inverse(k, PRIMES[j]) + shift[j]).fract()).collect();
            let mut v = Vec::with_capacity(dims);
            for pair in u.chunks(2) {
                let r = (-2.0 * (1.0 - pair[0]).ln()).sqrt();
                let t = 2.0 * std::f64::consts::PI * pair[1];
                v.push(r * t.cos());
                v.push(r * t.sin());
            }
            v.truncate(d);
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter().map(|c| c / norm).collect()
        })
        .collect()
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    out
}

/// Sliced W₁: mean over seeded quasi-uniform directions of the 1D W₁ between projections.
pub fn sliced_w1(x: &SampleBatch, y: &SampleBatch, n_directions: usize, seed: u64) -> Result<f64> {
    if x.d != y.d {
        return Err(MetricsError::DimensionMismatch(x.d, y.d));
    }
    if x.n == 0 || y.n == 0 {
        return Err(MetricsError::EmptySample);
    }
    if x.d == 1 {
        return Ok(w1_two_sample(&SortedSample::new(x.values.clone())?, &SortedSample::new(y.values.clone())?));
    }
    if n_directions == 0 {
        return Err(MetricsError::InvalidArgument("n_directions must be positive".into()));
    }
    let dirs = sphere_directions(x.d, n_directions, seed);
    let project = |b: &SampleBatch, th: &[f64]| -> Result<SortedSample> {
        SortedSample::new(b.rows().map(|r| r.iter().zip(th).map(|(a, t)| a * t).sum()).collect())
    };
    let mut total = 0.0;
    for th in &dirs {
        total += w1_two_sample(&project(x, th)?, &project(y, th)?);
    }
    Ok(total / dirs.len() as f64)
}

/// `max_ω |cf_a(ω) − cf_b(ω)| / max(1, ω²)` over the grid.
pub fn cf_battery_distance<A, B>(cf_a: A, cf_b: B, omega_grid: &[f64]) -> Result<f64>
where
    A: Fn(f64) -> Complex64,
    B: Fn(f64) -> Complex64,
{
    if omega_grid.is_empty() {
        return Err(MetricsError::InvalidArgument("empty omega grid".into()));
    }
    Ok(omega_grid
        .iter()
        .map(|&w| (cf_a(w) - cf_b(w)).norm() / (w * w).max(1.0))
        .fold(0.0, f64::max))
}

/// Sup norms `(M₀, M₁, M₂)` of the battery function `cos(ωx)/max(1, ω²)`.
pub fn battery_sup_norms(omega: f64) -> [f64; 3] {
    let s = (omega * omega).max(1.0);
    let w = omega.abs();
    [1.0 / s, w / s, w * w / s]
}

/// The default frequency grid for battery distances: geometric on [1e-2, 1] and
/// linear up to 30.
pub fn default_omega_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..100).map(|i| 1e-2 * 100f64.powf(i as f64 / 100.0)).collect();
    g.extend((0..=580).map(|i| 1.0 + i as f64 * 0.05));
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub exponent_ci: (f64, f64),
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    ols(points).0
}

fn ols(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

const BOOTSTRAP_SEED: u64 = 0x7261_7465_6669_7400;

/// Fits `log d = intercept + exponent·log n`. The 95% interval comes from
/// resampling residuals with a fixed internal seed.
pub fn fit_rate(ns: &[f64], distances: &[f64], bootstrap: usize) -> Result<RateFit> {
    if ns.len() != distances.len() {
        return Err(MetricsError::DimensionMismatch(ns.len(), distances.len()));
    }
    if ns.len() < 4 {
        return Err(MetricsError::TooFewPoints(ns.len()));
    }
    if let Some((index, &value)) = distances.iter().enumerate().find(|(_, d)| !(**d > 0.0 && d.is_finite())) {
        return Err(MetricsError::NonPositiveDistance { index, value });
    }
    if let Some(&n) = ns.iter().find(|n| !(**n > 0.0)) {
        return Err(MetricsError::InvalidArgument(format!("n = {n} is not positive")));
    }
    let pts: Vec<(f64, f64)> = ns.iter().zip(distances).map(|(n, d)| (n.ln(), d.ln())).collect();
    let (exponent, intercept) = ols(&pts);
    let fitted: Vec<f64> = pts.iter().map(|p| intercept + exponent * p.0).collect();
    let resid: Vec<f64> = pts.iter().zip(&fitted).map(|(p, f)| p.1 - f).collect();
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };

    let mut slopes = Vec::with_capacity(bootstrap);
    let mut rng = ChaCha12Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut resampled = pts.clone();
    for _ in 0..bootstrap {
        for (i, p) in resampled.iter_mut().enumerate() {
            p.1 = fitted[i] + resid[rng.gen_range(0..resid.len())];
        }
        slopes.push(ols(&resampled).0);
    }
    let exponent_ci = if slopes.is_empty() {
        (exponent, exponent)
    } else {
        slopes.sort_by(f64::total_cmp);
        let lo = percentile(&slopes, 0.025);
        let hi = percentile(&slopes, 0.975);
        (lo.min(exponent), hi.max(exponent))
    };
    Ok(RateFit { exponent, intercept, r_squared, exponent_ci })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Median of the values (mean of the two middle ones for even counts).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> SortedSample {
        SortedSample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_sample_examples() {
        let x = s(&[0.3, -1.0, 2.5]);
        assert_eq!(w1_two_sample(&x, &x), 0.0);
        assert_eq!(w1_two_sample(&s(&[0.0, 0.0]), &s(&[1.0, 1.0])), 1.0);
        assert_eq!(w1_two_sample(&s(&[0.0, 1.0]), &s(&[0.0, 3.0])), 1.0);
        assert!(matches!(SortedSample::new(vec![]), Err(MetricsError::EmptySample)));
        assert!(matches!(SortedSample::new(vec![f64::NAN]), Err(MetricsError::NonFinite)));
    }

    #[test]
    fn unequal_sizes_use_step_quantiles() {
        // F_x⁻¹ = 0 on (0,½], 1 on (½,1]; F_y⁻¹ = 0, 0, 3 on thirds.
        let d = w1_two_sample(&s(&[0.0, 1.0]), &s(&[0.0, 0.0, 3.0]));
        let expect = (0.5 - 1.0 / 3.0) * 0.0 + (2.0 / 3.0 - 0.5) * 1.0 + (1.0 / 3.0) * 2.0;
        assert!((d - expect).abs() < 1e-15);
        // a sample against its own duplication is at distance zero
        assert_eq!(w1_two_sample(&s(&[1.0, 2.0]), &s(&[1.0, 1.0, 2.0, 2.0])), 0.0);
    }

    #[test]
    fn quantile_distance() {
        assert_eq!(w1_vs_quantile(&s(&[2.0]), |_| 2.0).unwrap(), 0.0);
        assert!(matches!(
            w1_vs_quantile(&s(&[0.0]), |p: f64| (p - 0.5).ln()),
            Err(MetricsError::QuantileDomain { .. })
        ));
        // uniform order statistics at the midpoints: exact zero
        let u: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        assert!(w1_vs_quantile(&s(&u), |p| p).unwrap() < 1e-16);
    }

    #[test]
    fn sliced_translation_is_mean_projection() {
        let d = 3;
        let pts: Vec<f64> = (0..60).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let x = SampleBatch::from_values(d, pts.clone(), 1, "test").unwrap();
        let v = [0.4, -1.2, 0.7];
        let shifted: Vec<f64> = pts.chunks(d).flat_map(|r| (0..d).map(move |j| r[j] + v[j])).collect();
        let y = SampleBatch::from_values(d, shifted, 1, "test").unwrap();
        let got = sliced_w1(&x, &y, 64, 9).unwrap();
        let dirs = sphere_directions(d, 64, 9);
        let expect = dirs.iter().map(|t| (0..d).map(|j| v[j] * t[j]).sum::<f64>().abs()).sum::<f64>() / 64.0;
        assert!((got - expect).abs() < 1e-12);
        assert_eq!(sliced_w1(&x, &x, 64, 9).unwrap(), 0.0);
        assert_eq!(got, sliced_w1(&x, &y, 64, 9).unwrap());
        let one = SampleBatch::from_values(1, vec![0.0, 1.0], 1, "t").unwrap();
        let three = SampleBatch::from_values(1, vec![0.0, 3.0], 1, "t").unwrap();
        assert_eq!(sliced_w1(&one, &three, 5, 0).unwrap(), 1.0);
        assert!(matches!(sliced_w1(&one, &x, 5, 0), Err(MetricsError::DimensionMismatch(1, 3))));
    }

    #[test]
    fn directions_are_unit_and_spread() {
        for d in [2, 3, 5] {
            let dirs = sphere_directions(d, 400, 3);
            let mut mean = vec![0.0; d];
            for t in &dirs {
                assert!((t.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
                for j in 0..d {
                    mean[j] += t[j] / 400.0;
                }
            }
            // d = 2 uses half-circle directions, which suffice for projections
            if d > 2 {
                assert!(mean.iter().all(|m| m.abs() < 0.1), "{mean:?}");
            }
        }
    }

    #[test]
    fn battery_properties() {
        let grid = default_omega_grid();
        let cf = |w: f64| Complex64::new((-w).exp(), 0.0);
        assert_eq!(cf_battery_distance(cf, cf, &grid).unwrap(), 0.0);
        for &w in &grid {
            assert!(battery_sup_norms(w).iter().all(|&m| m <= 1.0));
        }
        let far = |w: f64| Complex64::new((-2.0 * w).exp(), 0.0);
        let d = cf_battery_distance(cf, far, &[0.5, 2.0]).unwrap();
        let expect = ((-0.5f64).exp() - (-1.0f64).exp()).max(((-2.0f64).exp() - (-4.0f64).exp()) / 4.0);
        assert!((d - expect).abs() < 1e-15);
    }

    #[test]
    fn rate_fit_exact_data() {
        let ns: Vec<f64> = (1..=12).map(|k| 2f64.powi(k)).collect();
        let d: Vec<f64> = ns.iter().map(|n| 3.0 / n).collect();
        let f = fit_rate(&ns, &d, 200).unwrap();
        assert!((f.exponent + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let d2: Vec<f64> = ns.iter().map(|n| 0.7 * n.powf(1.0 - 2.0 / 1.5)).collect();
        let f2 = fit_rate(&ns, &d2, 0).unwrap();
        assert!((f2.exponent + 1.0 / 3.0).abs() < 1e-12);
        assert!(matches!(fit_rate(&ns[..3], &d[..3], 10), Err(MetricsError::TooFewPoints(3))));
        let mut bad = d.clone();
        bad[4] = 0.0;
        assert!(matches!(fit_rate(&ns, &bad, 10), Err(MetricsError::NonPositiveDistance { index: 4, .. })));
    }

    #[test]
    fn rate_fit_noisy_interval() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let ns: Vec<f64> = (1..=12).map(|k| 2f64.powi(k)).collect();
        let d: Vec<f64> = ns.iter().map(|n| 2.0 / n * (1.0 + 0.05 * (2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0))).collect();
        let f = fit_rate(&ns, &d, 1000).unwrap();
        assert!(f.exponent_ci.0 <= f.exponent && f.exponent <= f.exponent_ci.1);
        assert!(f.exponent_ci.1 - f.exponent_ci.0 < 0.1);
        assert!((f.exponent + 1.0).abs() < 0.05);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }

    proptest! {
        #[test]
        fn w1_is_a_scale_equivariant_metric(
            a in proptest::collection::vec(-50.0f64..50.0, 1..20),
            b in proptest::collection::vec(-50.0f64..50.0, 1..20),
            c in proptest::collection::vec(-50.0f64..50.0, 1..20),
            k in 0.01f64..100.0,
        ) {
            let (x, y, z) = (s(&a), s(&b), s(&c));
            let xy = w1_two_sample(&x, &y);
            prop_assert!((xy - w1_two_sample(&y, &x)).abs() <= 1e-12 * (1.0 + xy));
            prop_assert!(xy <= w1_two_sample(&x, &z) + w1_two_sample(&z, &y) + 1e-12);
            prop_assert!(w1_two_sample(&x, &x) == 0.0);
            let scaled = |v: &[f64]| s(&v.iter().map(|t| k * t).collect::<Vec<_>>());
            let sxy = w1_two_sample(&scaled(&a), &scaled(&b));
            prop_assert!((sxy - k * xy).abs() <= 1e-12 * (1.0 + k * xy));
        }

        #[test]
        fn w1_zero_only_for_equal_multisets(a in proptest::collection::vec(-5.0f64..5.0, 1..10), shift in 0.001f64..1.0) {
            let mut b = a.clone();
            b[0] += shift;
            prop_assert!(w1_two_sample(&s(&a), &s(&b)) > 0.0);
        }
    }
}
