//! Adaptive estimation loops.
//!
//! AQSE re-centres the POVM on the running estimate at a fixed sensing time.
//! ATFE wraps it in a confidence-interval gate that lengthens the sensing
//! time by one unit `t1` whenever the interval half-width drops below
//! `1/(i+1)`.

pub(crate) mod schedule;

pub use schedule::{schedule_nu_min, schedule_s1, S1};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    z_for_confidence, ConfidenceInterval, EstimateResult, Interval, MleEngine,
};
use crate::probe::{draw, MeasurementRecord, ProbeConfig, ProbeMode};
use crate::rng::{stream_rng, INIT_STREAM};

/// Inputs of one ATFE trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtfeConfig {
    pub confidence_level: f64,
    pub nu_initial: u32,
    pub nu_total: u32,
    pub probe: ProbeConfig,
    pub update_ci: bool,
    pub t1_scale: f64,
    pub seed: u64,
}

impl AtfeConfig {
    pub const DEFAULT_CONFIDENCE: f64 = 0.999;
    pub const DEFAULT_NU_INITIAL: u32 = 20;

    /// Defaults for everything except the probe and measurement budget.
    pub fn new(probe: ProbeConfig, nu_total: u32) -> Self {
        Self {
            confidence_level: Self::DEFAULT_CONFIDENCE,
            nu_initial: Self::DEFAULT_NU_INITIAL.min(nu_total.max(1)),
            nu_total,
            probe,
            update_ci: true,
            t1_scale: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::usage(format!(
                "confidence_level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        if self.nu_initial == 0 {
            return Err(Error::usage("nu_initial must be at least 1"));
        }
        if self.nu_total < self.nu_initial {
            return Err(Error::usage(format!(
                "nu_total ({}) must be at least nu_initial ({})",
                self.nu_total, self.nu_initial
            )));
        }
        if !(self.t1_scale > 0.0 && self.t1_scale.is_finite()) {
            return Err(Error::usage(format!("t1_scale must be positive, got {}", self.t1_scale)));
        }
        self.probe.validate()
    }

    /// Sensing time of the first strategy.
    pub fn t1(&self) -> f64 {
        self.probe.first_sensing_time(self.t1_scale)
    }
}

/// Per-measurement record of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Measurement step, starting at 1.
    pub j: u32,
    /// Strategy index used for this step.
    pub strategy: u32,
    pub t_tilde: f64,
    pub omega_hat: f64,
    pub ci: ConfidenceInterval,
    pub cum_time: f64,
    pub cum_qubits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTrace {
    pub omega_true: f64,
    pub snapshots: Vec<Snapshot>,
}

/// Mutable state of a running trial.
#[derive(Debug, Clone)]
pub struct TrialState {
    pub strategy_index: u32,
    pub t_tilde: f64,
    pub domain: Interval,
    pub estimate: f64,
    /// POVM guesses of the next step, one per record.
    pub guesses: Vec<f64>,
    engine: MleEngine,
}

impl TrialState {
    /// Fresh state at strategy 1 with explicit initial guesses.
    pub fn new(probe: ProbeConfig, t_tilde: f64, guesses: Vec<f64>) -> Result<Self> {
        if guesses.len() != probe.records_per_step() {
            return Err(Error::usage(format!(
                "expected {} initial guesses, got {}",
                probe.records_per_step(),
                guesses.len()
            )));
        }
        if !(t_tilde > 0.0) {
            return Err(Error::usage(format!("sensing time must be positive, got {t_tilde}")));
        }
        Ok(Self {
            strategy_index: 1,
            t_tilde,
            domain: Interval::full(),
            estimate: guesses[0],
            guesses,
            engine: MleEngine::new(probe),
        })
    }

    /// Fresh state with guesses drawn uniformly from `[-1, 1)`.
    pub fn random_start<R: Rng + ?Sized>(probe: ProbeConfig, t_tilde: f64, rng: &mut R) -> Result<Self> {
        let guesses = (0..probe.records_per_step()).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self::new(probe, t_tilde, guesses)
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        self.engine.likelihood().records()
    }

    pub fn fisher_total(&self) -> f64 {
        self.engine.likelihood().fisher_total()
    }

    pub fn probe(&self) -> &ProbeConfig {
        self.engine.likelihood().probe()
    }
}

/// One AQSE step against true frequency `omega_true`.
///
/// Measures every record of the step with its current guess, re-maximises the
/// likelihood on `state.domain`, then points all guesses at the new estimate.
pub fn aqse_step<R: Rng + ?Sized>(
    state: &mut TrialState,
    omega_true: f64,
    rng: &mut R,
) -> Result<EstimateResult> {
    let probe = *state.probe();
    let rate = std::f64::consts::TAU * probe.phase_multiplier() * state.t_tilde;
    for (q, &g) in state.guesses.iter().enumerate() {
        let p0 = (0.5 * (1.0 + (rate * (omega_true - g)).sin())).clamp(0.0, 1.0);
        state.engine.push(MeasurementRecord {
            outcome: draw(p0, rng),
            g_tilde: g,
            t_tilde: state.t_tilde,
            qubit_index: q as u32,
        });
    }
    let est = state.engine.maximize(state.domain)?;
    state.estimate = est.omega_hat;
    state.guesses.iter_mut().for_each(|g| *g = est.omega_hat);
    Ok(est)
}

/// ATFE trial for single or GHZ probes.
pub fn run_atfe_ghz(config: &AtfeConfig, omega_true: f64) -> Result<(EstimateResult, TrialTrace)> {
    if config.probe.mode == ProbeMode::ProductParallel {
        return Err(Error::usage("run_atfe_ghz needs a single or GHZ probe"));
    }
    run_loop(config, omega_true)
}

/// ATFE trial for N-qubit parallel product probes.
pub fn run_atfe_product(config: &AtfeConfig, omega_true: f64) -> Result<(EstimateResult, TrialTrace)> {
    if config.probe.mode != ProbeMode::ProductParallel {
        return Err(Error::usage("run_atfe_product needs a product probe"));
    }
    run_loop(config, omega_true)
}

/// ATFE trial for any probe mode.
pub fn run_atfe(config: &AtfeConfig, omega_true: f64) -> Result<(EstimateResult, TrialTrace)> {
    run_loop(config, omega_true)
}

fn run_loop(config: &AtfeConfig, omega_true: f64) -> Result<(EstimateResult, TrialTrace)> {
    config.validate()?;
    if !(-1.0..1.0).contains(&omega_true) {
        return Err(Error::domain(format!("true frequency {omega_true} lies outside [-1, 1)")));
    }
    let z = z_for_confidence(config.confidence_level)?;
    let t1 = config.t1();
    let mut state = TrialState::random_start(config.probe, t1, &mut stream_rng(config.seed, INIT_STREAM))?;
    let qubits_per_step = config.probe.qubits_per_step();

    let mut snapshots = Vec::with_capacity(config.nu_total as usize);
    let mut last = None;
    let mut ci: Option<ConfidenceInterval> = None;
    let mut anchor = state.estimate;
    let (mut cum_time, mut cum_qubits) = (0.0, 0u64);

    for j in 1..=config.nu_total {
        state.domain = match ci {
            Some(prev) if j >= config.nu_initial => prev.interval(),
            _ => Interval::full(),
        };
        let est = aqse_step(&mut state, omega_true, &mut stream_rng(config.seed, u64::from(j)))?;
        cum_time += state.t_tilde;
        cum_qubits += qubits_per_step;

        let fisher = est.fisher_total;
        let i = state.strategy_index;
        let gate = j >= config.nu_initial && z / fisher.sqrt() <= 1.0 / f64::from(i + 1);
        if config.update_ci || j <= config.nu_initial || gate {
            anchor = est.omega_hat;
        }
        let interval = ConfidenceInterval::with_z(anchor, fisher, z)?;
        snapshots.push(Snapshot {
            j,
            strategy: i,
            t_tilde: state.t_tilde,
            omega_hat: est.omega_hat,
            ci: interval,
            cum_time,
            cum_qubits,
        });
        ci = Some(interval);
        last = Some(est);
        if gate {
            state.strategy_index += 1;
            state.t_tilde = f64::from(state.strategy_index) * t1;
        }
    }
    let est = last.ok_or_else(|| Error::usage("nu_total must be at least 1"))?;
    Ok((est, TrialTrace { omega_true, snapshots }))
}

/// Step of the realised strategy schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub j: u32,
    pub strategy: u32,
    pub t_tilde: f64,
    pub fisher_total: f64,
    pub cum_time: f64,
    pub cum_qubits: u64,
}

/// Strategy and time sequence an ATFE trial follows.
///
/// The gate only looks at the accumulated Fisher information, which depends
/// on sensing times alone, so the schedule is the same for every outcome
/// sequence.
pub fn realized_schedule(config: &AtfeConfig) -> Result<Vec<ScheduleStep>> {
    config.validate()?;
    let z = z_for_confidence(config.confidence_level)?;
    let t1 = config.t1();
    let records = config.probe.records_per_step() as f64;
    let mult = config.probe.phase_multiplier();
    let mut out = Vec::with_capacity(config.nu_total as usize);
    let (mut i, mut fisher, mut cum_time, mut cum_qubits) = (1u32, 0.0, 0.0, 0u64);
    for j in 1..=config.nu_total {
        let t = f64::from(i) * t1;
        let rate = std::f64::consts::TAU * mult * t;
        // same accumulation order as the likelihood keeps the gate bit-identical
        for _ in 0..records as usize {
            fisher += rate * rate;
        }
        cum_time += t;
        cum_qubits += config.probe.qubits_per_step();
        out.push(ScheduleStep { j, strategy: i, t_tilde: t, fisher_total: fisher, cum_time, cum_qubits });
        if j >= config.nu_initial && z / fisher.sqrt() <= 1.0 / f64::from(i + 1) {
            i += 1;
        }
    }
    Ok(out)
}
