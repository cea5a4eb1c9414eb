use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::probe::{MeasurementRecord, Outcome, ProbeConfig};

/// Floor applied to probabilities inside `ln`, keeping the log-likelihood finite
/// where a record's outcome is impossible.
pub const PROB_FLOOR: f64 = 1e-300;

/// One record prepared for repeated evaluation.
///
/// `p(x | omega) = [1 + sign * sin(rate * omega - rate * g)] / 2`, with the
/// sine expanded so that records sharing a `rate` share one `sin_cos` call.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub rate: f64,
    pub cos_off: f64,
    pub sin_off: f64,
    pub sign: f64,
}

impl Term {
    fn new(record: &MeasurementRecord, multiplier: f64) -> Self {
        let rate = TAU * multiplier * record.t_tilde;
        let (sin_off, cos_off) = (rate * record.g_tilde).sin_cos();
        let sign = match record.outcome {
            Outcome::Zero => 1.0,
            Outcome::One => -1.0,
        };
        Self { rate, cos_off, sin_off, sign }
    }

    /// `sin` and `cos` of the record phase given `sin_cos(rate * omega)`.
    #[inline]
    pub fn phase(&self, s: f64, c: f64) -> (f64, f64) {
        (s * self.cos_off - c * self.sin_off, c * self.cos_off + s * self.sin_off)
    }
}

/// Memoises `sin_cos(rate * omega)` across consecutive terms.
///
/// Equal rates reuse the cached pair. A rate that advances by the same step
/// as the previous change is reached by angle addition, which covers the
/// arithmetic time ladders of the adaptive schedules without a fresh
/// `sin_cos` per record.
pub(crate) struct PhaseCache {
    omega: f64,
    rate: f64,
    s: f64,
    c: f64,
    step: f64,
    step_s: f64,
    step_c: f64,
}

impl PhaseCache {
    pub fn new(omega: f64) -> Self {
        Self { omega, rate: f64::NAN, s: 0.0, c: 1.0, step: f64::NAN, step_s: 0.0, step_c: 1.0 }
    }

    #[inline]
    pub fn get(&mut self, rate: f64) -> (f64, f64) {
        if rate == self.rate {
            return (self.s, self.c);
        }
        let d = rate - self.rate;
        if (d - self.step).abs() <= 1e-13 * rate.abs() {
            let (s, c) = (self.s, self.c);
            self.s = s * self.step_c + c * self.step_s;
            self.c = c * self.step_c - s * self.step_s;
        } else {
            if d.is_finite() {
                self.step = d;
                (self.step_s, self.step_c) = (d * self.omega).sin_cos();
            }
            (self.s, self.c) = (rate * self.omega).sin_cos();
        }
        self.rate = rate;
        (self.s, self.c)
    }
}

/// Clamped outcome probability of `term`.
#[inline]
pub(crate) fn prob_term(term: &Term, s: f64, c: f64) -> f64 {
    let (sin_phase, _) = term.phase(s, c);
    (0.5 * (1.0 + term.sign * sin_phase)).max(PROB_FLOOR)
}

/// Sum of logs taken as the log of running products, one `ln` per batch.
///
/// Every factor is at least `PROB_FLOOR`, so flushing once the product
/// drops below `FLUSH` keeps it in the normal range.
pub(crate) struct LogProduct {
    sum: f64,
    prod: f64,
}

impl LogProduct {
    const FLUSH: f64 = 1e-7;

    #[inline]
    pub fn push(&mut self, p: f64) {
        self.prod *= p;
        if self.prod < Self::FLUSH {
            self.sum += self.prod.ln();
            self.prod = 1.0;
        }
    }

    #[inline]
    pub fn finish(self) -> f64 {
        self.sum + self.prod.ln()
    }
}

impl Default for LogProduct {
    fn default() -> Self {
        Self { sum: 0.0, prod: 1.0 }
    }
}

/// Log-likelihood of a sequence of heterogeneous records.
///
/// Each record carries its own POVM guess and sensing time, which covers both
/// the AQSE product form and per-qubit random guesses.
#[derive(Debug, Clone)]
pub struct LogLikelihood {
    probe: ProbeConfig,
    records: Vec<MeasurementRecord>,
    terms: Vec<Term>,
    fisher_total: f64,
}

impl LogLikelihood {
    pub fn new(probe: ProbeConfig) -> Self {
        Self { probe, records: Vec::new(), terms: Vec::new(), fisher_total: 0.0 }
    }

    pub fn from_records(probe: ProbeConfig, records: &[MeasurementRecord]) -> Self {
        let mut ll = Self::new(probe);
        for r in records {
            ll.push(*r);
        }
        ll
    }

    pub fn push(&mut self, record: MeasurementRecord) {
        let term = Term::new(&record, self.probe.phase_multiplier());
        // per-record Fisher information is the squared phase rate
        self.fisher_total += term.rate * term.rate;
        self.terms.push(term);
        self.records.push(record);
    }

    pub fn probe(&self) -> &ProbeConfig {
        &self.probe
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Accumulated Fisher information of all records.
    pub fn fisher_total(&self) -> f64 {
        self.fisher_total
    }

    pub(crate) fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `sum_j ln p(x_j | omega)`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.eval_range(omega, 0)
    }

    /// Contribution of records `from..` at `omega`.
    pub(crate) fn eval_range(&self, omega: f64, from: usize) -> f64 {
        let mut cache = PhaseCache::new(omega);
        let mut acc = LogProduct::default();
        for term in &self.terms[from..] {
            let (s, c) = cache.get(term.rate);
            acc.push(prob_term(term, s, c));
        }
        acc.finish()
    }

    /// First and second derivative of the log-likelihood in `omega`.
    ///
    /// Each term is concave in its phase, `d2/dtheta2 ln(1 + s sin) = -1/(1 + s sin)`,
    /// so the second derivative is negative wherever it is finite.
    pub fn score(&self, omega: f64) -> (f64, f64) {
        let mut cache = PhaseCache::new(omega);
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for term in &self.terms {
            let (s, c) = cache.get(term.rate);
            let (sin_phase, cos_phase) = term.phase(s, c);
            let denom = 1.0 + term.sign * sin_phase;
            d1 += term.sign * term.rate * cos_phase / denom;
            d2 -= term.rate * term.rate / denom;
        }
        (d1, d2)
    }
}

/// `sum_j ln p(x_j | omega; g_j, t_j)` for a record list.
pub fn log_likelihood_eval(
    probe: &ProbeConfig,
    records: &[MeasurementRecord],
    omega_tilde: f64,
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::usage("log-likelihood needs at least one record"));
    }
    Ok(LogLikelihood::from_records(*probe, records).eval(omega_tilde))
}
