//! Closed-form variance bounds and resource formulas.
//!
//! Everything is dimensionless (`omega_tilde`, `t_tilde`) unless a frequency
//! range `delta_omega` is passed to [`BoundQuery`], which then rescales the
//! variance-valued ATFE bounds by `delta_omega^2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptive::{schedule_s1, schedule::nu_min_with_z};
use crate::error::{Error, Result};
use crate::inference::z_for_confidence;
use crate::probe::ProbeMode;

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::usage(format!("{name} must be positive, got {x}")))
    }
}

fn confidence(c: f64) -> Result<f64> {
    if c > 0.0 && c < 1.0 {
        Ok(c)
    } else {
        Err(Error::usage(format!("confidence level must lie in (0, 1), got {c}")))
    }
}

fn count(name: &str, n: u32) -> Result<u32> {
    if n == 0 {
        Err(Error::usage(format!("{name} must be at least 1")))
    } else {
        Ok(n)
    }
}

/// Product-state QCRB `1/(nu N t^2)`.
pub fn qcrb_product(nu: f64, n: f64, t: f64) -> Result<f64> {
    Ok(1.0 / (positive("nu", nu)? * positive("N", n)? * positive("t", t)?.powi(2)))
}

/// GHZ QCRB `1/(nu N^2 t^2)`.
pub fn qcrb_ghz(nu: f64, n: f64, t: f64) -> Result<f64> {
    let n = positive("N", n)?;
    Ok(qcrb_product(nu, n, t)? / n)
}

/// Product QCRB at the longest identifiable time `t = pi/(2 delta_omega)`.
pub fn qcrb_max_ramsey(nu: f64, n: f64, delta_omega: f64) -> Result<f64> {
    let d = positive("delta_omega", delta_omega)?;
    Ok(4.0 * d * d / (PI * PI * positive("nu", nu)? * positive("N", n)?))
}

/// GHZ bound at its longest identifiable time; the N dependence cancels.
pub fn ghz_fixed_time_bound(nu: f64, delta_omega: f64) -> Result<f64> {
    qcrb_max_ramsey(nu, 1.0, delta_omega)
}

/// Bound in terms of total sensing time, `2 delta_omega / (pi T N)`.
///
/// Product and GHZ probes share this form.
pub fn qcrb_total_time(total_time: f64, n: f64, delta_omega: f64) -> Result<f64> {
    let d = positive("delta_omega", delta_omega)?;
    Ok(2.0 * d / (PI * positive("T", total_time)? * positive("N", n)?))
}

/// Bound for an arbitrary strategy history.
///
/// `steps[i]` is `(measurement count, Fisher information per measurement)` of
/// strategy `i + 1`. The first term charges the full history at confidence
/// `C^S`, the second the probability that some interval missed, weighted by
/// the squared marginal error `1/(i+1)^2`.
pub fn strategy_bound(steps: &[(u64, f64)], confidence_level: f64) -> Result<f64> {
    if steps.is_empty() {
        return Err(Error::usage("at least one strategy is required"));
    }
    if !(confidence_level > 0.0 && confidence_level <= 1.0) {
        return Err(Error::usage(format!(
            "confidence level must lie in (0, 1], got {confidence_level}"
        )));
    }
    let c = confidence_level;
    let info: f64 = steps.iter().map(|&(n, f)| n as f64 * f).sum();
    let s = steps.len() as i32;
    Ok(c.powi(s) / info + (1.0 - c) * second_term_sum(steps.len() as u32, c))
}

/// `sum_{i=1}^{S} C^{i-1} / (i+1)^2`.
fn second_term_sum(s: u32, c: f64) -> f64 {
    (1..=s).map(|i| c.powi(i as i32 - 1) / f64::from(i + 1).powi(2)).sum()
}

/// Minimal counts `nu_i^min` for strategies `1..=s`.
fn nu_min_counts(s: u32, confidence_level: f64, n: u32) -> Result<Vec<u64>> {
    let z = z_for_confidence(confidence_level)?;
    Ok((1..=s).map(|i| nu_min_with_z(i, z, n)).collect())
}

/// Strategy-schedule bound after `s` strategies with `n` product qubits.
///
/// Uses `nu_i = nu_i^min` and `F_i = N pi^2 i^2 / 4`. GHZ probes coincide
/// with `n = 1`.
pub fn atfe_step_bound(s: u32, confidence_level: f64, n: u32) -> Result<f64> {
    count("S", s)?;
    count("N", n)?;
    confidence(confidence_level)?;
    let counts = nu_min_counts(s, confidence_level, n)?;
    let steps: Vec<(u64, f64)> = counts
        .iter()
        .zip(1u32..)
        .map(|(&k, i)| (k, f64::from(n) * PI * PI * f64::from(i * i) / 4.0))
        .collect();
    strategy_bound(&steps, confidence_level)
}

/// The two parts of the closed-form ideal bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealBound {
    /// Fisher-limited part, falls as `1/nu^3`.
    pub first: f64,
    /// Interval-miss part, independent of `nu`.
    pub second: f64,
}

impl IdealBound {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

/// Closed-form large-`nu` bound after `s` strategies.
///
/// `S1` is the exact single-probe schedule constant and enters as
/// `S1/N`. The cubic term keeps the published form `s (s^2 - 3s - 1)`;
/// summing the schedule directly gives `s (s^2 + 3s - 1)` instead, but the
/// `nu^3` part dominates in the regime where the formula applies.
pub fn atfe_ideal_bound(nu: f64, confidence_level: f64, n: u32, s: u32) -> Result<IdealBound> {
    positive("nu", nu)?;
    confidence(confidence_level)?;
    count("N", n)?;
    count("S", s)?;
    let s1 = f64::from(schedule_s1(confidence_level, 1)?.exact) / f64::from(n);
    let denom = f64::from(n)
        * PI
        * PI
        * (s1 * (s1 * s1 - 3.0 * s1 - 1.0) + 2.0 * (nu - s1 * s1.ln()).powi(3));
    if !(denom > 0.0) {
        return Err(Error::domain(format!(
            "ideal bound denominator is not positive at nu = {nu}; nu is too small for the closed form"
        )));
    }
    let c = confidence_level;
    Ok(IdealBound {
        first: 24.0 * c.powi(s as i32) / denom,
        second: (1.0 - c) * second_term_sum(s, c),
    })
}

/// Ceiling on the interval-miss term for any number of strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondTermBound {
    /// `0.64 (1 - C)`.
    pub bound: f64,
    /// `sum_{i>=1} 1/(i+1)^2 = pi^2/6 - 1`.
    pub series_constant: f64,
}

pub fn second_term_upper_bound(confidence_level: f64) -> Result<SecondTermBound> {
    let c = confidence(confidence_level)?;
    Ok(SecondTermBound { bound: 0.64 * (1.0 - c), series_constant: PI * PI / 6.0 - 1.0 })
}

/// Exact and closed-form cumulative sensing time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalTime {
    /// `sum_i nu_i^min t_i`.
    pub exact: f64,
    /// Large-`S` closed form.
    pub approx: f64,
}

/// Total sensing time after `s` strategies.
///
/// GHZ probes use `t_i = i/(4N)` with the undivided schedule, product probes
/// `t_i = i/4` with the schedule divided by `N`. The closed forms use the
/// analytic `S1`.
pub fn total_time(s: u32, confidence_level: f64, n: u32, mode: ProbeMode) -> Result<TotalTime> {
    count("S", s)?;
    count("N", n)?;
    confidence(confidence_level)?;
    let nf = f64::from(n);
    let sf = f64::from(s);
    let s1 = schedule_s1(confidence_level, 1)?.analytic;
    let tail = sf * (sf + 1.0);
    let (exact, approx) = match mode {
        ProbeMode::Ghz => {
            let counts = nu_min_counts(s, confidence_level, 1)?;
            let exact = sum_time(&counts, 1.0 / (4.0 * nf));
            (exact, (2.0 * s1 * (s1 + s1.ln() - 1.0) + tail) / (8.0 * nf))
        }
        ProbeMode::ProductParallel | ProbeMode::Single => {
            let n = if mode == ProbeMode::Single { 1 } else { n };
            let counts = nu_min_counts(s, confidence_level, n)?;
            let r = s1 / f64::from(n);
            (sum_time(&counts, 0.25), (2.0 * r * (r + r.ln() - 1.0) + tail) / 8.0)
        }
    };
    Ok(TotalTime { exact, approx })
}

fn sum_time(counts: &[u64], t1: f64) -> f64 {
    counts.iter().zip(1u32..).map(|(&k, i)| k as f64 * f64::from(i) * t1).sum()
}

/// Approximate and exact measurement count to finish `s` strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuTotal {
    /// `(S1/N) ln(S1/N) + S` with the exact `S1`.
    pub approx: f64,
    /// `sum_i nu_i^min`.
    pub exact: u64,
}

pub fn nu_total_approx(s: u32, confidence_level: f64, n: u32) -> Result<NuTotal> {
    count("S", s)?;
    count("N", n)?;
    confidence(confidence_level)?;
    let s1 = f64::from(schedule_s1(confidence_level, 1)?.exact) / f64::from(n);
    let exact = nu_min_counts(s, confidence_level, n)?.iter().sum();
    Ok(NuTotal { approx: nu_total_from_s1(s1, s), exact })
}

/// `s1 ln s1 + S` for a given schedule constant.
pub fn nu_total_from_s1(s1: f64, s: u32) -> f64 {
    s1 * s1.ln() + f64::from(s)
}

/// Bound formula selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    QcrbProduct,
    QcrbGhz,
    QcrbMaxRamsey,
    QcrbTotalTimeProduct,
    QcrbTotalTimeGhz,
    GhzFixedTime,
    AtfeStepBound,
    AtfeIdealBound,
    SecondTermBound,
    TotalTimeGhz,
    TotalTimeProduct,
    NuTotalApprox,
}

impl BoundKind {
    pub const ALL: [BoundKind; 12] = [
        Self::QcrbProduct,
        Self::QcrbGhz,
        Self::QcrbMaxRamsey,
        Self::QcrbTotalTimeProduct,
        Self::QcrbTotalTimeGhz,
        Self::GhzFixedTime,
        Self::AtfeStepBound,
        Self::AtfeIdealBound,
        Self::SecondTermBound,
        Self::TotalTimeGhz,
        Self::TotalTimeProduct,
        Self::NuTotalApprox,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::QcrbProduct => "qcrb_product",
            Self::QcrbGhz => "qcrb_ghz",
            Self::QcrbMaxRamsey => "qcrb_max_ramsey",
            Self::QcrbTotalTimeProduct => "qcrb_total_time_product",
            Self::QcrbTotalTimeGhz => "qcrb_total_time_ghz",
            Self::GhzFixedTime => "ghz_fixed_time",
            Self::AtfeStepBound => "atfe_step_bound",
            Self::AtfeIdealBound => "atfe_ideal_bound",
            Self::SecondTermBound => "second_term_bound",
            Self::TotalTimeGhz => "total_time_ghz",
            Self::TotalTimeProduct => "total_time_product",
            Self::NuTotalApprox => "nu_total_approx",
        }
    }

    /// Parameter names the kind reads.
    pub fn parameters(&self) -> &'static [&'static str] {
        match self {
            Self::QcrbProduct | Self::QcrbGhz => &["nu", "n", "t"],
            Self::QcrbMaxRamsey => &["nu", "n", "delta_omega"],
            Self::QcrbTotalTimeProduct | Self::QcrbTotalTimeGhz => &["total_time", "n", "delta_omega"],
            Self::GhzFixedTime => &["nu", "delta_omega"],
            Self::AtfeStepBound => &["s", "confidence", "n"],
            Self::AtfeIdealBound => &["nu", "confidence", "n", "s"],
            Self::SecondTermBound => &["confidence"],
            Self::TotalTimeGhz | Self::TotalTimeProduct | Self::NuTotalApprox => &["s", "confidence", "n"],
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == key)
            .ok_or_else(|| Error::usage(format!("unknown bound kind '{s}'")))
    }
}

/// Named inputs of a bound evaluation. Unused fields are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub nu: Option<f64>,
    pub n: Option<f64>,
    pub t: Option<f64>,
    pub total_time: Option<f64>,
    pub delta_omega: Option<f64>,
    pub confidence: Option<f64>,
    pub s: Option<f64>,
}

impl BoundParams {
    fn real(&self, name: &str) -> Result<f64> {
        let v = match name {
            "nu" => self.nu,
            "n" => self.n,
            "t" => self.t,
            "total_time" => self.total_time,
            "delta_omega" => self.delta_omega,
            "confidence" => self.confidence,
            "s" => self.s,
            _ => None,
        };
        v.ok_or_else(|| Error::usage(format!("{name} required")))
    }

    fn int(&self, name: &str) -> Result<u32> {
        let v = self.real(name)?;
        if v < 1.0 || v.fract() != 0.0 || v > f64::from(u32::MAX) {
            return Err(Error::usage(format!("{name} must be a positive integer, got {v}")));
        }
        Ok(v as u32)
    }
}

/// A bound kind together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub kind: BoundKind,
    pub params: BoundParams,
}

/// Value of a query, with the companion exact or approximate figure when the
/// formula has one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub value: f64,
    pub companion: Option<(&'static str, f64)>,
}

impl BoundQuery {
    pub fn new(kind: BoundKind, params: BoundParams) -> Self {
        Self { kind, params }
    }

    pub fn evaluate(&self) -> Result<BoundValue> {
        let p = &self.params;
        let plain = |value| Ok(BoundValue { value, companion: None });
        // optional frequency range for the dimensionless ATFE bounds
        let scale = match p.delta_omega {
            Some(d) => positive("delta_omega", d)?.powi(2),
            None => 1.0,
        };
        match self.kind {
            BoundKind::QcrbProduct => plain(qcrb_product(p.real("nu")?, p.real("n")?, p.real("t")?)?),
            BoundKind::QcrbGhz => plain(qcrb_ghz(p.real("nu")?, p.real("n")?, p.real("t")?)?),
            BoundKind::QcrbMaxRamsey => {
                plain(qcrb_max_ramsey(p.real("nu")?, p.real("n")?, p.real("delta_omega")?)?)
            }
            BoundKind::QcrbTotalTimeProduct | BoundKind::QcrbTotalTimeGhz => plain(qcrb_total_time(
                p.real("total_time")?,
                p.real("n")?,
                p.real("delta_omega")?,
            )?),
            BoundKind::GhzFixedTime => plain(ghz_fixed_time_bound(p.real("nu")?, p.real("delta_omega")?)?),
            BoundKind::AtfeStepBound => {
                plain(scale * atfe_step_bound(p.int("s")?, p.real("confidence")?, p.int("n")?)?)
            }
            BoundKind::AtfeIdealBound => {
                let b = atfe_ideal_bound(p.real("nu")?, p.real("confidence")?, p.int("n")?, p.int("s")?)?;
                Ok(BoundValue { value: scale * b.total(), companion: Some(("first_term", scale * b.first)) })
            }
            BoundKind::SecondTermBound => {
                let b = second_term_upper_bound(p.real("confidence")?)?;
                Ok(BoundValue {
                    value: scale * b.bound,
                    companion: Some(("series_constant", b.series_constant)),
                })
            }
            BoundKind::TotalTimeGhz | BoundKind::TotalTimeProduct => {
                let mode = if self.kind == BoundKind::TotalTimeGhz {
                    ProbeMode::Ghz
                } else {
                    ProbeMode::ProductParallel
                };
                let t = total_time(p.int("s")?, p.real("confidence")?, p.int("n")?, mode)?;
                Ok(BoundValue { value: t.exact, companion: Some(("closed_form", t.approx)) })
            }
            BoundKind::NuTotalApprox => {
                let v = nu_total_approx(p.int("s")?, p.real("confidence")?, p.int("n")?)?;
                Ok(BoundValue { value: v.approx, companion: Some(("exact", v.exact as f64)) })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOUR_OVER_PI2: f64 = 4.0 / (PI * PI);

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn qcrb_examples() {
        assert_eq!(qcrb_product(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(qcrb_product(4.0, 2.0, 0.5).unwrap(), 0.5);
        assert!(close(qcrb_product(8.0, 2.0, 0.5).unwrap(), 0.25, 1e-15));
        assert_eq!(qcrb_ghz(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(close(qcrb_ghz(1.0, 10.0, 1.0).unwrap(), 0.01, 1e-15));
        assert!(close(qcrb_ghz(3.0, 4.0, 0.7).unwrap(), qcrb_product(3.0, 4.0, 0.7).unwrap() / 4.0, 1e-15));
        assert!(close(qcrb_ghz(1.0, 8.0, 1.0).unwrap(), qcrb_ghz(1.0, 4.0, 1.0).unwrap() / 4.0, 1e-15));
        assert!(qcrb_product(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ramsey_and_fixed_time() {
        assert!(close(qcrb_max_ramsey(1.0, 1.0, 1.0).unwrap(), 0.405_284_734_569_351, 1e-12));
        assert!(close(qcrb_max_ramsey(3.0, 2.0, 0.5).unwrap(), qcrb_max_ramsey(3.0, 2.0, 1.0).unwrap() / 4.0, 1e-15));
        for (nu, n, d) in [(1.0, 1.0, 1.0), (7.0, 3.0, 0.2), (50.0, 10.0, 4.0)] {
            let via_t = qcrb_product(nu, n, PI / (2.0 * d)).unwrap();
            assert!(close(qcrb_max_ramsey(nu, n, d).unwrap(), via_t, 1e-14));
        }
        assert!(close(ghz_fixed_time_bound(1.0, 1.0).unwrap(), FOUR_OVER_PI2, 1e-15));
        assert_eq!(ghz_fixed_time_bound(5.0, 2.0).unwrap(), qcrb_max_ramsey(5.0, 1.0, 2.0).unwrap());
    }

    #[test]
    fn total_time_qcrb() {
        assert!(close(qcrb_total_time(1.0, 1.0, 1.0).unwrap(), 2.0 / PI, 1e-15));
        assert!(close(qcrb_total_time(2.0, 3.0, 1.0).unwrap(), qcrb_total_time(1.0, 3.0, 1.0).unwrap() / 2.0, 1e-15));
    }

    #[test]
    fn step_bound_single_strategy() {
        let b = atfe_step_bound(1, 0.999, 1).unwrap();
        let want = 0.999 / (14.0 * PI * PI / 4.0) + 0.001 / 4.0;
        assert!(close(b, want, 1e-12));
        assert!((b - 0.029_170_0).abs() < 1e-6);
    }

    #[test]
    fn full_confidence_drops_second_term() {
        let steps = [(14, PI * PI / 4.0), (5, PI * PI)];
        let b = strategy_bound(&steps, 1.0).unwrap();
        assert!(close(b, 1.0 / (14.0 * PI * PI / 4.0 + 5.0 * PI * PI), 1e-15));
    }

    #[test]
    fn second_term_ceiling() {
        let b = second_term_upper_bound(0.999).unwrap();
        assert!((b.bound - 6.4e-4).abs() < 1e-15);
        let partial: f64 = (1..=1_000_000u32).map(|i| 1.0 / f64::from(i + 1).powi(2)).sum();
        assert!((b.series_constant - partial).abs() < 1.1e-6);
        for c in [0.9, 0.99, 0.999] {
            for s in [1, 5, 50, 500] {
                assert!((1.0 - c) * second_term_sum(s, c) <= 0.6450 * (1.0 - c));
            }
        }
    }

    #[test]
    fn ideal_bound_properties() {
        let b = atfe_ideal_bound(100.0, 0.999_999, 1, 30).unwrap();
        assert!(b.second < 1e-6);
        let r = atfe_ideal_bound(2e4, 0.99, 1, 40).unwrap().first / atfe_ideal_bound(1e4, 0.99, 1, 40).unwrap().first;
        assert!((r - 0.125).abs() < 1e-3);
        assert!(atfe_ideal_bound(1.0, 0.999, 1, 30).is_err());
    }

    #[test]
    fn nu_total_examples() {
        assert!((nu_total_from_s1(5.0, 20) - 28.047).abs() < 1e-3);
        for s in [1, 10, 60] {
            let v = nu_total_approx(s, 0.99, 2).unwrap();
            assert!(v.exact >= u64::from(s));
        }
    }

    #[test]
    fn step_bound_beats_fixed_time_eventually() {
        // the miss term eventually overtakes 1/nu, earlier for lower confidence
        for (c, last) in [(0.99, 50), (0.999, 200)] {
            for s in 2..=last {
                let nu: u64 = nu_min_counts(s, c, 1).unwrap().iter().sum();
                let fixed = qcrb_max_ramsey(nu as f64, 1.0, 1.0).unwrap();
                assert!(atfe_step_bound(s, c, 1).unwrap() <= fixed, "S={s} C={c}");
            }
        }
    }

    #[test]
    fn query_dispatch() {
        let params = BoundParams { nu: Some(1.0), n: Some(1.0), delta_omega: Some(1.0), ..Default::default() };
        let v = BoundQuery::new("qcrb_max_ramsey".parse().unwrap(), params).evaluate().unwrap();
        assert!((v.value - 0.405_285).abs() < 1e-6);
        assert!("nope".parse::<BoundKind>().is_err());
        let missing = BoundQuery::new(BoundKind::QcrbProduct, params).evaluate();
        assert!(missing.unwrap_err().to_string().contains("t required"));
        for k in BoundKind::ALL {
            assert_eq!(k.as_str().parse::<BoundKind>().unwrap(), k);
        }
    }
}
