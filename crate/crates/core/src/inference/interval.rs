use serde::{Deserialize, Serialize};

use super::quantile::z_for_confidence;
use crate::error::{Error, Result};

/// Lower edge of the dimensionless frequency domain.
pub const DOMAIN_LO: f64 = -1.0;
/// Upper edge of the dimensionless frequency domain (excluded).
pub const DOMAIN_HI: f64 = 1.0;

/// A closed search interval `[lo, hi]` inside `[-1, 1]`.
///
/// `hi == 1.0` stands for the half-open right end of the periodic domain;
/// the MLE still evaluates it, which is harmless because the likelihood
/// is continuous there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::usage(format!("invalid interval [{lo}, {hi}]")));
        }
        if lo < DOMAIN_LO || hi > DOMAIN_HI {
            return Err(Error::usage(format!("interval [{lo}, {hi}] leaves [-1, 1)")));
        }
        Ok(Self { lo, hi })
    }

    /// The whole frequency domain.
    pub fn full() -> Self {
        Self { lo: DOMAIN_LO, hi: DOMAIN_HI }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Center, half-width and clipped bounds of an asymptotic normal interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    /// Interval for a precomputed `z`; skips the quantile evaluation in hot loops.
    pub fn with_z(center: f64, fisher_total: f64, z: f64) -> Result<Self> {
        if !(fisher_total > 0.0) {
            return Err(Error::usage(format!("fisher_total must be positive, got {fisher_total}")));
        }
        let half_width = z / fisher_total.sqrt();
        Ok(Self {
            center,
            half_width,
            lo: (center - half_width).max(DOMAIN_LO),
            hi: (center + half_width).min(DOMAIN_HI),
        })
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.lo, hi: self.hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// `omega_hat +- z_{alpha/2} / sqrt(F)`, clipped to the domain.
pub fn confidence_interval(
    omega_hat: f64,
    fisher_total: f64,
    confidence_level: f64,
) -> Result<ConfidenceInterval> {
    let z = z_for_confidence(confidence_level)?;
    ConfidenceInterval::with_z(omega_hat, fisher_total, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_half_width_covers_domain() {
        let z = z_for_confidence(0.95).unwrap();
        let ci = confidence_interval(0.0, z * z, 0.95).unwrap();
        assert!((ci.half_width - 1.0).abs() < 1e-12);
        assert_eq!((ci.lo, ci.hi), (-1.0, 1.0));
    }

    #[test]
    fn clips_at_upper_edge() {
        let z = z_for_confidence(0.99).unwrap();
        let ci = confidence_interval(0.9, 100.0 * z * z, 0.99).unwrap();
        assert!((ci.lo - 0.8).abs() < 1e-12);
        assert_eq!(ci.hi, 1.0);
        assert!((ci.half_width - 0.1).abs() < 1e-12);
    }

    #[test]
    fn half_width_one_half_needs_f_43() {
        let f = (2.0 * 3.290_527_f64).powi(2);
        let ci = confidence_interval(0.0, f, 0.999).unwrap();
        assert!((ci.half_width - 0.5).abs() < 1e-6);
        assert!((f - 43.31).abs() < 0.01);
    }

    #[test]
    fn rejects_nonpositive_fisher() {
        assert!(confidence_interval(0.0, 0.0, 0.9).is_err());
        assert!(confidence_interval(0.0, -1.0, 0.9).is_err());
        assert!(confidence_interval(0.0, 1.0, 1.0).is_err());
        assert!(Interval::new(0.5, 0.2).is_err());
        assert!(Interval::new(-1.5, 0.2).is_err());
    }
}
