// Special functions. erf, erfc and the gamma family come from libm; Dawson's
// integral is evaluated here.

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

const SERIES_LIMIT: f64 = 6.5;

/// Dawson's integral `F(x) = e^{-x²} ∫_0^x e^{t²} dt`.
pub fn dawson(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { dawson_series(ax) } else { dawson_asymptotic(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

// e^{-x²} Σ x^{2n+1} / (n! (2n+1)); every term is positive, so no cancellation.
fn dawson_series(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let x2 = x * x;
    let mut power = x; // x^{2n+1}/n!
    let mut sum = x;
    let mut n = 0.0f64;
    loop {
        n += 1.0;
        power *= x2 / n;
        let term = power / (2.0 * n + 1.0);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum * (-x2).exp()
}

// 1/(2x) Σ (2n-1)!!/(2x²)^n, cut at the smallest term.
fn dawson_asymptotic(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0f64;
    loop {
        n += 1.0;
        let next = term * (2.0 * n - 1.0) * inv;
        if next >= term || next < 1e-18 * sum {
            break;
        }
        term = next;
        sum += term;
    }
    sum / (2.0 * x)
}
