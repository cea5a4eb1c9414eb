//! Analytic strategy schedule: minimal measurement counts per sensing time.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::z_for_confidence;

fn check_inputs(confidence_level: f64, n_qubits_product: u32) -> Result<f64> {
    if n_qubits_product == 0 {
        return Err(Error::usage("qubit count must be at least 1"));
    }
    z_for_confidence(confidence_level)
}

/// Unrounded `(4/pi^2) z^2 (2i+1) / i^2 / N`.
fn nu_min_raw(i: u32, z: f64, n: u32) -> f64 {
    let i = f64::from(i);
    4.0 / (PI * PI) * z * z * (2.0 * i + 1.0) / (i * i) / f64::from(n)
}

/// Minimal measurement count for strategy `i`, rounded up with floor 1.
///
/// `n_qubits_product` divides the count for product probes; pass 1 for
/// single or GHZ probes.
pub fn schedule_nu_min(i: u32, confidence_level: f64, n_qubits_product: u32) -> Result<u64> {
    if i == 0 {
        return Err(Error::usage("strategy index starts at 1"));
    }
    let z = check_inputs(confidence_level, n_qubits_product)?;
    Ok(nu_min_with_z(i, z, n_qubits_product))
}

pub(crate) fn nu_min_with_z(i: u32, z: f64, n: u32) -> u64 {
    // tiny slack so that exact integers are not pushed up by rounding noise
    let raw = nu_min_raw(i, z, n);
    ((raw - 1e-12).ceil() as u64).max(1)
}

/// Strategy index where the schedule reaches a single measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S1 {
    /// Smallest `i` whose minimal count is at most one.
    pub exact: u32,
    /// Large-`i` approximation `(8/pi^2) z^2 / N`.
    pub analytic: f64,
}

pub fn schedule_s1(confidence_level: f64, n_qubits_product: u32) -> Result<S1> {
    let z = check_inputs(confidence_level, n_qubits_product)?;
    let exact = (1u32..)
        .find(|&i| nu_min_raw(i, z, n_qubits_product) <= 1.0 + 1e-12)
        .expect("the schedule decays to zero");
    let analytic = 8.0 / (PI * PI) * z * z / f64::from(n_qubits_product);
    Ok(S1 { exact, analytic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_min_examples() {
        assert_eq!(schedule_nu_min(1, 0.999, 1).unwrap(), 14);
        assert_eq!(schedule_nu_min(5, 0.99, 1).unwrap(), 2);
        assert_eq!(schedule_nu_min(10_000, 0.99, 1).unwrap(), 1);
        assert!(schedule_nu_min(0, 0.99, 1).is_err());
        assert!(schedule_nu_min(1, 1.0, 1).is_err());
    }

    #[test]
    fn s1_examples() {
        let s = schedule_s1(0.99, 1).unwrap();
        assert_eq!(s.analytic.round(), 5.0);
        assert_eq!(s.exact, 6);
        let s = schedule_s1(0.999_999, 1).unwrap();
        assert_eq!(s.analytic.round(), 19.0);
        assert_eq!(s.exact, 20);
        let s = schedule_s1(0.99, 5).unwrap();
        assert!((s.analytic - 1.0756).abs() < 1e-3);
        assert!(s.exact == 1 || s.exact == 2);
    }
}
