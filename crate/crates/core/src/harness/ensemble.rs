use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive::{realized_schedule, run_atfe, AtfeConfig, ScheduleStep};
use crate::bounds::strategy_bound;
use crate::error::{Error, Result};
use crate::inference::{holevo_variance_of_errors, DEFAULT_PERIOD};
use crate::rng::{stream_rng, trial_seed, SETUP_STREAM};

/// Half-width of the default true-frequency range; keeps trials away from the
/// domain edge where clipped intervals distort the statistics.
pub const UNIFORM_OMEGA_LIMIT: f64 = 0.9;

/// How each trial's true frequency is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaPolicy {
    Fixed(f64),
    /// Uniform on `[-0.9, 0.9]`, drawn from the trial's setup stream.
    UniformPerTrial,
}

impl Default for OmegaPolicy {
    fn default() -> Self {
        Self::UniformPerTrial
    }
}

/// A Monte Carlo ensemble of independent ATFE trials.
///
/// `base.seed` is the master seed; trial `k` runs with seed
/// `trial_seed(master, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub base: AtfeConfig,
    pub trials_per_batch: u32,
    pub batches: u32,
    pub checkpoints: Vec<u32>,
    pub omega_policy: OmegaPolicy,
    /// Period of the Holevo variance.
    pub period: f64,
}

impl ExperimentPlan {
    pub const DEFAULT_TRIALS_PER_BATCH: u32 = 1000;
    pub const DEFAULT_BATCHES: u32 = 5;

    /// Default batching with a checkpoint at every measurement.
    pub fn new(base: AtfeConfig) -> Self {
        Self {
            checkpoints: (1..=base.nu_total).collect(),
            base,
            trials_per_batch: Self::DEFAULT_TRIALS_PER_BATCH,
            batches: Self::DEFAULT_BATCHES,
            omega_policy: OmegaPolicy::default(),
            period: DEFAULT_PERIOD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.trials_per_batch == 0 || self.batches == 0 {
            return Err(Error::usage("trials_per_batch and batches must be at least 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::usage("at least one checkpoint is required"));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("checkpoints must be strictly increasing"));
        }
        let (first, last) = (self.checkpoints[0], *self.checkpoints.last().expect("nonempty"));
        if first == 0 || last > self.base.nu_total {
            return Err(Error::usage(format!(
                "checkpoints must lie in 1..={}, got {first}..={last}",
                self.base.nu_total
            )));
        }
        if let OmegaPolicy::Fixed(w) = self.omega_policy {
            if !(-1.0..1.0).contains(&w) {
                return Err(Error::usage(format!("fixed omega {w} lies outside [-1, 1)")));
            }
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::usage(format!("period must be positive, got {}", self.period)));
        }
        Ok(())
    }

    pub fn total_trials(&self) -> u64 {
        u64::from(self.trials_per_batch) * u64::from(self.batches)
    }

    /// Seed and true frequency of trial `k`.
    pub fn trial_setup(&self, k: u64) -> (u64, f64) {
        let seed = trial_seed(self.base.seed, k);
        let omega = match self.omega_policy {
            OmegaPolicy::Fixed(w) => w,
            OmegaPolicy::UniformPerTrial => stream_rng(seed, SETUP_STREAM)
                .random_range(-UNIFORM_OMEGA_LIMIT..=UNIFORM_OMEGA_LIMIT),
        };
        (seed, omega)
    }
}

/// Aggregates at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub nu: u32,
    /// Mean of the finite per-batch Holevo variances.
    pub holevo_var: f64,
    /// Standard error of that mean over batches.
    pub holevo_stderr: f64,
    pub cum_time: f64,
    pub total_qubits: u64,
    pub bound_fixed_qcrb: f64,
    pub bound_ideal: f64,
    /// Strategy bound over the strategies visited so far.
    pub bound_eq31: f64,
    /// Batches whose phasor mean vanished and were left out.
    pub infinite_batches: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub rows: Vec<CheckpointSummary>,
}

impl EnsembleSummary {
    pub fn row(&self, nu: u32) -> Option<&CheckpointSummary> {
        self.rows.iter().find(|r| r.nu == nu)
    }
}

/// Errors of one trial at each checkpoint.
fn run_trial(plan: &ExperimentPlan, k: u64) -> Result<Vec<f64>> {
    let (seed, omega) = plan.trial_setup(k);
    let config = AtfeConfig { seed, ..plan.base };
    let (_, trace) = run_atfe(&config, omega)?;
    Ok(plan
        .checkpoints
        .iter()
        .map(|&c| trace.snapshots[c as usize - 1].omega_hat - omega)
        .collect())
}

/// Runs every trial on a pool of `workers` threads (`None` keeps rayon's
/// default) and returns per-trial checkpoint errors in trial order.
pub fn run_trials(plan: &ExperimentPlan, workers: Option<usize>) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    let n = plan.total_trials();
    let work = || (0..n).into_par_iter().map(|k| run_trial(plan, k)).collect::<Result<Vec<_>>>();
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Mean and standard error of the finite entries, plus the count left out.
fn batch_stats(values: &[f64]) -> (f64, f64, u32) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let left_out = (values.len() - finite.len()) as u32;
    let m = finite.len();
    if m == 0 {
        return (f64::INFINITY, 0.0, left_out);
    }
    let mean = finite.iter().sum::<f64>() / m as f64;
    let stderr = if m > 1 {
        let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        (var / m as f64).sqrt()
    } else {
        0.0
    };
    (mean, stderr, left_out)
}

/// Analytic overlays at step `nu` of a realised schedule.
///
/// Returns the fixed-time QCRB at `t1`, the full-confidence bound `1/F(nu)`
/// and the strategy bound over the strategies visited so far.
pub fn overlay_bounds(config: &AtfeConfig, schedule: &[ScheduleStep], nu: u32) -> Result<(f64, f64, f64)> {
    let steps = &schedule[..nu as usize];
    let first_step_info = steps[0].fisher_total;
    let fixed = 1.0 / (f64::from(nu) * first_step_info);
    let ideal = 1.0 / steps[nu as usize - 1].fisher_total;
    let mut per_strategy: Vec<(u64, f64)> = Vec::new();
    let mut prev_fisher = 0.0;
    for s in steps {
        let info = s.fisher_total - prev_fisher;
        prev_fisher = s.fisher_total;
        match per_strategy.get_mut(s.strategy as usize - 1) {
            Some(entry) => entry.0 += 1,
            None => per_strategy.push((1, info)),
        }
    }
    let strategy = strategy_bound(&per_strategy, config.confidence_level)?;
    Ok((fixed, ideal, strategy))
}

/// Runs the plan and aggregates every checkpoint.
pub fn run_ensemble(plan: &ExperimentPlan) -> Result<EnsembleSummary> {
    run_ensemble_with(plan, None)
}

pub fn run_ensemble_with(plan: &ExperimentPlan, workers: Option<usize>) -> Result<EnsembleSummary> {
    let errors = run_trials(plan, workers)?;
    summarize(plan, &errors)
}

/// Aggregates per-trial checkpoint errors produced by [`run_trials`].
pub fn summarize(plan: &ExperimentPlan, errors: &[Vec<f64>]) -> Result<EnsembleSummary> {
    let schedule = realized_schedule(&plan.base)?;
    let per_batch = plan.trials_per_batch as usize;
    let mut rows = Vec::with_capacity(plan.checkpoints.len());
    for (c, &nu) in plan.checkpoints.iter().enumerate() {
        let variances = errors
            .chunks(per_batch)
            .map(|batch| holevo_variance_of_errors(batch.iter().map(|e| e[c]), plan.period))
            .collect::<Result<Vec<f64>>>()?;
        let (holevo_var, holevo_stderr, infinite_batches) = batch_stats(&variances);
        let step = &schedule[nu as usize - 1];
        let (bound_fixed_qcrb, bound_ideal, bound_eq31) = overlay_bounds(&plan.base, &schedule, nu)?;
        rows.push(CheckpointSummary {
            nu,
            holevo_var,
            holevo_stderr,
            cum_time: step.cum_time,
            total_qubits: step.cum_qubits,
            bound_fixed_qcrb,
            bound_ideal,
            bound_eq31,
            infinite_batches,
        });
    }
    Ok(EnsembleSummary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::ProbeConfig;
    use std::f64::consts::PI;

    fn plan(probe: ProbeConfig, nu: u32, trials: u32, batches: u32) -> ExperimentPlan {
        let base = AtfeConfig { seed: 17, ..AtfeConfig::new(probe, nu) };
        ExperimentPlan { trials_per_batch: trials, batches, ..ExperimentPlan::new(base) }
    }

    #[test]
    fn single_trial_matches_direct_statistic() {
        let mut p = plan(ProbeConfig::single(), 25, 1, 1);
        p.checkpoints = vec![25];
        let summary = run_ensemble(&p).unwrap();
        let (seed, omega) = p.trial_setup(0);
        let (est, _) = run_atfe(&AtfeConfig { seed, ..p.base }, omega).unwrap();
        let want = holevo_variance_of_errors([est.omega_hat - omega], 2.0).unwrap();
        assert_eq!(summary.rows[0].holevo_var, want);
        assert_eq!(summary.rows[0].holevo_stderr, 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = plan(ProbeConfig::product(2).unwrap(), 30, 20, 3);
        let a = run_ensemble_with(&p, Some(1)).unwrap();
        let b = run_ensemble_with(&p, Some(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resource_bookkeeping_is_exact() {
        for probe in [ProbeConfig::product(3).unwrap(), ProbeConfig::ghz(4).unwrap()] {
            let p = plan(probe, 40, 2, 1);
            let s = run_ensemble(&p).unwrap();
            let (seed, omega) = p.trial_setup(0);
            let (_, trace) = run_atfe(&AtfeConfig { seed, ..p.base }, omega).unwrap();
            for (row, snap) in s.rows.iter().zip(&trace.snapshots) {
                assert_eq!(row.total_qubits, u64::from(row.nu) * u64::from(probe.n_qubits));
                let direct: f64 = trace.snapshots[..row.nu as usize].iter().map(|x| x.t_tilde).sum();
                assert_eq!(row.cum_time, direct);
                assert_eq!(row.cum_time, snap.cum_time);
            }
        }
    }

    #[test]
    fn overlays_for_single_qubit() {
        let p = plan(ProbeConfig::single(), 60, 1, 1);
        let sched = realized_schedule(&p.base).unwrap();
        let (fixed, ideal, strategy) = overlay_bounds(&p.base, &sched, 10).unwrap();
        assert!((fixed - 4.0 / (PI * PI * 10.0)).abs() < 1e-12);
        assert!((ideal - fixed).abs() < 1e-12, "no transition yet at nu = 10");
        let single = 0.999 / (10.0 * PI * PI / 4.0) + 0.001 / 4.0;
        assert!((strategy - single).abs() < 1e-12);
        let (fixed, ideal, _) = overlay_bounds(&p.base, &sched, 60).unwrap();
        assert!(ideal < fixed / 10.0);
    }

    #[test]
    fn rejects_bad_plans() {
        let mut p = plan(ProbeConfig::single(), 30, 1, 1);
        p.checkpoints = vec![5, 5];
        assert!(p.validate().is_err());
        p.checkpoints = vec![31];
        assert!(p.validate().is_err());
        p.checkpoints = vec![1];
        p.batches = 0;
        assert!(p.validate().is_err());
        p.batches = 1;
        p.omega_policy = OmegaPolicy::Fixed(1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn batch_stats_skip_infinite() {
        let (m, se, n) = batch_stats(&[1.0, f64::INFINITY, 3.0]);
        assert_eq!((m, n), (2.0, 1));
        assert!((se - 1.0).abs() < 1e-12);
    }
}
