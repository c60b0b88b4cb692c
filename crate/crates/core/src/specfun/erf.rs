use super::gamma::{lower_incomplete_gamma_reg, upper_gamma_continued_fraction};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Below this |x|^2 the series for P(1/2, x^2) converges faster than the
/// continued fraction (the usual a + 1 split with a = 1/2).
const SERIES_LIMIT_SQ: f64 = 1.5;

/// Beyond this argument `erfcx` switches to its asymptotic expansion.
const ASYMPTOTIC_START: f64 = 25.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x * x < SERIES_LIMIT_SQ {
        let p = lower_incomplete_gamma_reg(0.5, x * x).unwrap_or(f64::NAN);
        p.copysign(x)
    } else {
        (1.0 - erfc(x.abs())).copysign(x)
    }
}

/// Complementary error function `1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x * x < SERIES_LIMIT_SQ {
        1.0 - lower_incomplete_gamma_reg(0.5, x * x).unwrap_or(f64::NAN)
    } else {
        (-x * x).exp() * erfcx(x)
    }
}

/// Scaled complementary error function `exp(x^2) erfc(x)`, finite for all
/// `x >= 0` (it decays like `1 / (x sqrt(pi))`).
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x * x < SERIES_LIMIT_SQ {
        (x * x).exp() * erfc(x)
    } else if x <= ASYMPTOTIC_START {
        x * upper_gamma_continued_fraction(0.5, x * x).unwrap_or(f64::NAN) * FRAC_1_SQRT_PI
    } else {
        erfcx_asymptotic(x)
    }
}

/// `1/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!! / (2x^2)^n`, truncated at the
/// smallest term.
fn erfcx_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..60 {
        let next = -term * f64::from(2 * n - 1) * inv;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum * FRAC_1_SQRT_PI / x
}
