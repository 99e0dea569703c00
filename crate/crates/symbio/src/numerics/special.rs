use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch between the power series and the continued fraction for `Ei`.
const EI_SERIES_CUTOFF: f64 = 6.0;

/// Exponential integral `Ei(x)` for strictly negative arguments.
///
/// `Ei(x) = integral_{-inf}^{x} e^t / t dt`, which for `x < 0` equals
/// `-E1(-x)`. Only the negative branch is implemented; the rate expressions
/// never evaluate `Ei` at non-negative arguments.
///
/// For `|x| <= 6` the classical series
/// `Ei(x) = gamma + ln|x| + sum_{k>=1} x^k / (k k!)`
/// is used; beyond that the Lentz continued fraction for `E1` takes over.
pub fn expint_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Numeric(format!(
            "Ei is only implemented for x < 0, got {x}"
        )));
    }
    if x < -700.0 {
        // e^x underflows; the integral is far below any representable value.
        return Ok(-0.0);
    }
    let ax = -x;
    if ax <= EI_SERIES_CUTOFF {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=200 {
            term *= x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * (1.0 + sum.abs()) {
                break;
            }
        }
        Ok(EULER_GAMMA + ax.ln() + sum)
    } else {
        // Modified Lentz evaluation of the continued fraction
        // E1(z) = e^{-z} / (z + 1/(1 + 1/(z + 2/(1 + 2/(z + ...))))).
        let z = ax;
        let tiny = 1e-300;
        let f = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / f;
        let mut h = d;
        for i in 1..=500 {
            let a = -(i as f64) * (i as f64);
            let b = z + 2.0 * i as f64 + 1.0;
            d = b + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                break;
            }
        }
        let e1 = (-z).exp() * h;
        Ok(-e1)
    }
}

/// Modified Bessel function of the first kind `I0(x)` for `x >= 0`.
///
/// Plain power series `sum_k (x/2)^{2k} / (k!)^2` with term-ratio stopping;
/// adequate for the desk-scale arguments this library produces (|x| well
/// below the ~700 overflow threshold of `e^x`).
pub fn bessel_i0(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Numeric(format!("I0 requires x >= 0, got {x}")));
    }
    let q = x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=1000 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < 1e-14 * sum {
            break;
        }
    }
    Ok(sum)
}
