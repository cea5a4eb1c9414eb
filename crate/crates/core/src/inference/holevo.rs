use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Default period: the width of the frequency domain.
pub const DEFAULT_PERIOD: f64 = 2.0;

const MIN_PHASOR: f64 = 1e-12;

/// Holevo variance of estimates around a single true value.
pub fn holevo_variance_empirical(estimates: &[f64], omega_true: f64, period: f64) -> Result<f64> {
    holevo_variance_of_errors(estimates.iter().map(|e| e - omega_true), period)
}

/// Holevo variance `(P/2pi)^2 (|<exp(2 pi i err / P)>|^-2 - 1)` of raw errors.
///
/// Returns `+inf` when the mean phasor vanishes.
pub fn holevo_variance_of_errors<I>(errors: I, period: f64) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::usage(format!("period must be positive, got {period}")));
    }
    let k = TAU / period;
    let (mut re, mut im, mut n) = (0.0, 0.0, 0usize);
    for e in errors {
        let (s, c) = (k * e).sin_cos();
        re += c;
        im += s;
        n += 1;
    }
    if n == 0 {
        return Err(Error::usage("holevo variance needs at least one estimate"));
    }
    let mag = re.hypot(im) / n as f64;
    if mag < MIN_PHASOR {
        return Ok(f64::INFINITY);
    }
    let scale = (period / TAU).powi(2);
    Ok((scale * (mag.powi(-2) - 1.0)).max(0.0))
}
