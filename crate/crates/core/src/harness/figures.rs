use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::compare::compare_summaries;
use super::ensemble::{run_ensemble_with, ExperimentPlan, OmegaPolicy};
use super::output::{artifact_path, write_json, Table};
use crate::adaptive::{realized_schedule, AtfeConfig};
use crate::error::{Error, Result};
use crate::inference::LogLikelihood;
use crate::probe::{sample_outcome, MeasurementRecord, ProbeConfig, ProbeMode};
use crate::rng::{stream_rng, trial_seed};
use crate::ARTIFACT_VERSION;

/// Canned reproductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    Fig2Likelihood,
    Fig3,
    Fig5,
    Fig6,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [Self::Fig2Likelihood, Self::Fig3, Self::Fig5, Self::Fig6];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig2Likelihood => "fig2_likelihood",
            Self::Fig3 => "fig3",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| {
            let known: Vec<_> = Self::ALL.iter().map(FigureId::as_str).collect();
            Error::usage(format!("unknown figure '{s}', expected one of {}", known.join(", ")))
        })
    }
}

/// Knobs shared by every reproduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureOptions {
    pub master_seed: u64,
    pub trials_per_batch: u32,
    pub batches: u32,
    #[serde(skip)]
    pub workers: Option<usize>,
    pub omega_policy: OmegaPolicy,
    /// Re-run the last three no-update points of fig3 with ten times the trials.
    pub dense: bool,
}

impl FigureOptions {
    pub const DEFAULT_MASTER_SEED: u64 = 2025;
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            master_seed: Self::DEFAULT_MASTER_SEED,
            trials_per_batch: ExperimentPlan::DEFAULT_TRIALS_PER_BATCH,
            batches: ExperimentPlan::DEFAULT_BATCHES,
            workers: None,
            omega_policy: OmegaPolicy::default(),
            dense: false,
        }
    }
}

/// Tables of one reproduction plus the parameter record written beside them.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureArtifacts {
    pub figure: FigureId,
    /// `(tag, table)`; written to `reproduce_<figure>_<tag>.csv`.
    pub tables: Vec<(String, Table)>,
    pub sidecar: Value,
}

impl FigureArtifacts {
    pub fn table(&self, tag: &str) -> Option<&Table> {
        self.tables.iter().find(|(t, _)| t == tag).map(|(_, t)| t)
    }

    /// Writes every CSV and the JSON sidecar `reproduce_<figure>.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let stem = format!("reproduce_{}", self.figure);
        let mut paths = Vec::with_capacity(self.tables.len() + 1);
        for (tag, table) in &self.tables {
            let path = artifact_path(dir, &stem, tag, "csv");
            table.write_csv(&path)?;
            paths.push(path);
        }
        let path = dir.join(format!("{stem}.json"));
        write_json(&path, &self.sidecar)?;
        paths.push(path);
        Ok(paths)
    }
}

pub fn reproduce_figure(figure: FigureId, options: &FigureOptions) -> Result<FigureArtifacts> {
    match figure {
        FigureId::Fig2Likelihood => fig2_likelihood(options),
        FigureId::Fig3 => fig3(options),
        FigureId::Fig5 => fig5(options),
        FigureId::Fig6 => fig6(options),
    }
}

fn plan(options: &FigureOptions, base: AtfeConfig) -> ExperimentPlan {
    ExperimentPlan {
        trials_per_batch: options.trials_per_batch,
        batches: options.batches,
        omega_policy: options.omega_policy,
        ..ExperimentPlan::new(AtfeConfig { seed: options.master_seed, ..base })
    }
}

fn sidecar(figure: FigureId, options: &FigureOptions, plans: Value, extra: Value) -> Value {
    json!({
        "artifact_version": ARTIFACT_VERSION,
        "figure": figure,
        "master_seed": options.master_seed,
        "options": options,
        "plans": plans,
        "results": extra,
    })
}

/// Parameters of the identifiability demonstration.
pub const FIG2_OMEGA: f64 = 0.2;
pub const FIG2_OUTCOMES: u32 = 64;
pub const FIG2_TIMES: [f64; 3] = [0.25, 0.5, 0.75];
pub const FIG2_GRID: u32 = 2048;

/// Interior local maxima of a sampled curve.
///
/// The left end of a half-open domain is not a turning point, so only
/// interior samples that rise from the left and do not fall to the right
/// count.
pub fn count_local_maxima(values: &[f64]) -> usize {
    values.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count()
}

fn fig2_likelihood(options: &FigureOptions) -> Result<FigureArtifacts> {
    let probe = ProbeConfig::single();
    let grid: Vec<f64> = (0..FIG2_GRID).map(|k| -1.0 + 2.0 * f64::from(k) / f64::from(FIG2_GRID)).collect();
    let mut header = vec!["omega".to_string()];
    let mut columns = Vec::new();
    let mut maxima = Vec::new();
    let mut zeros = Vec::new();
    for (m, &t) in FIG2_TIMES.iter().enumerate() {
        let mut rng = stream_rng(options.master_seed, m as u64);
        let mut ll = LogLikelihood::new(probe);
        for _ in 0..FIG2_OUTCOMES {
            let outcome = sample_outcome(0.0, t, FIG2_OMEGA, ProbeMode::Single, 1, &mut rng)?;
            ll.push(MeasurementRecord { outcome, g_tilde: 0.0, t_tilde: t, qubit_index: 0 });
        }
        zeros.push(ll.records().iter().filter(|r| r.outcome.bit() == 0).count());
        let raw: Vec<f64> = grid.iter().map(|&w| ll.eval(w)).collect();
        let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let curve: Vec<f64> = raw.iter().map(|v| v - top).collect();
        maxima.push(count_local_maxima(&curve));
        header.push(format!("loglik_t{t}"));
        columns.push(curve);
    }
    let mut table = Table::new(header);
    for (k, &w) in grid.iter().enumerate() {
        let mut row = vec![w];
        row.extend(columns.iter().map(|c| c[k]));
        table.push(row);
    }
    let params = json!({
        "omega_true": FIG2_OMEGA,
        "g_tilde": 0.0,
        "outcomes_per_time": FIG2_OUTCOMES,
        "times": FIG2_TIMES,
        "grid_points": FIG2_GRID,
    });
    let extra = json!({ "local_maxima": maxima, "zero_counts": zeros });
    Ok(FigureArtifacts {
        figure: FigureId::Fig2Likelihood,
        tables: vec![("curves".into(), table)],
        sidecar: sidecar(FigureId::Fig2Likelihood, options, params, extra),
    })
}

/// Horizon and first-stage length shared by the ensemble figures.
pub const FIG_NU_TOTAL: u32 = 60;
pub const FIG_NU_INITIAL: u32 = 20;
/// Checkpoints re-run with ten times the trials in dense mode.
pub const FIG3_DENSE_POINTS: [u32; 3] = [40, 50, 60];

fn fig3(options: &FigureOptions) -> Result<FigureArtifacts> {
    let single = AtfeConfig { nu_initial: FIG_NU_INITIAL, ..AtfeConfig::new(ProbeConfig::single(), FIG_NU_TOTAL) };
    let series = [
        ("aqse", AtfeConfig { nu_initial: FIG_NU_TOTAL, update_ci: false, ..single }),
        ("atfe_no_update", AtfeConfig { update_ci: false, ..single }),
        ("atfe_update", single),
    ];
    let mut tables = Vec::new();
    let mut plans = serde_json::Map::new();
    for (tag, base) in series {
        let p = plan(options, base);
        let mut summary = run_ensemble_with(&p, options.workers)?;
        plans.insert(tag.into(), serde_json::to_value(&p)?);
        if options.dense && tag == "atfe_no_update" {
            let dense = ExperimentPlan {
                trials_per_batch: options.trials_per_batch * 2,
                checkpoints: FIG3_DENSE_POINTS.to_vec(),
                ..p.clone()
            };
            let dense_plan = ExperimentPlan { batches: options.batches * 5, ..dense };
            let extra = run_ensemble_with(&dense_plan, options.workers)?;
            for row in extra.rows {
                if let Some(slot) = summary.rows.iter_mut().find(|r| r.nu == row.nu) {
                    *slot = row;
                }
            }
            plans.insert(format!("{tag}_dense"), serde_json::to_value(&dense_plan)?);
        }
        tables.push((tag.to_string(), Table::from(&summary)));
    }
    Ok(FigureArtifacts {
        figure: FigureId::Fig3,
        tables,
        sidecar: sidecar(FigureId::Fig3, options, Value::Object(plans), Value::Null),
    })
}

pub const FIG5_QUBITS: [u32; 3] = [1, 5, 10];

/// Master seed of the `n`-qubit GHZ series.
pub fn fig5_seed(master: u64, n: u32) -> u64 {
    trial_seed(master, u64::MAX - u64::from(n))
}

fn fig5(options: &FigureOptions) -> Result<FigureArtifacts> {
    let mut tables = Vec::new();
    let mut plans = serde_json::Map::new();
    for n in FIG5_QUBITS {
        let base = AtfeConfig { nu_initial: FIG_NU_INITIAL, ..AtfeConfig::new(ProbeConfig::ghz(n)?, FIG_NU_TOTAL) };
        // independent seeds so the curves can be compared within standard errors
        let seeded = AtfeConfig { seed: fig5_seed(options.master_seed, n), ..base };
        let p = ExperimentPlan { base: seeded, ..plan(options, base) };
        let summary = run_ensemble_with(&p, options.workers)?;
        let tag = format!("ghz_n{n}");
        plans.insert(tag.clone(), serde_json::to_value(&p)?);
        tables.push((tag, Table::from(&summary)));
    }
    Ok(FigureArtifacts {
        figure: FigureId::Fig5,
        tables,
        sidecar: sidecar(FigureId::Fig5, options, Value::Object(plans), Value::Null),
    })
}

pub const FIG6_QUBITS: [u32; 3] = [5, 10, 15];

/// Smallest GHZ horizon whose cumulative sensing time reaches `target`.
pub fn ghz_horizon_for_time(base: &AtfeConfig, target: f64) -> Result<u32> {
    let mut nu = base.nu_total.max(base.nu_initial).max(1);
    loop {
        let schedule = realized_schedule(&AtfeConfig { nu_total: nu, ..*base })?;
        if let Some(step) = schedule.iter().find(|s| s.cum_time >= target) {
            return Ok(step.j);
        }
        nu = nu.checked_mul(2).ok_or_else(|| Error::domain("GHZ horizon overflow"))?;
    }
}

/// GHZ and product ensembles with matched qubit count and shared seed.
pub fn fig6_pair(options: &FigureOptions, n: u32, nu_product: u32) -> Result<(ExperimentPlan, ExperimentPlan)> {
    let product = AtfeConfig { nu_initial: FIG_NU_INITIAL, ..AtfeConfig::new(ProbeConfig::product(n)?, nu_product) };
    let target = realized_schedule(&product)?.last().expect("nonempty schedule").cum_time;
    let ghz = AtfeConfig { probe: ProbeConfig::ghz(n)?, ..product };
    let nu_ghz = ghz_horizon_for_time(&ghz, target)?;
    Ok((plan(options, AtfeConfig { nu_total: nu_ghz, ..ghz }), plan(options, product)))
}

fn fig6(options: &FigureOptions) -> Result<FigureArtifacts> {
    let mut tables = Vec::new();
    let mut plans = serde_json::Map::new();
    for n in FIG6_QUBITS {
        let (ghz, product) = fig6_pair(options, n, FIG_NU_TOTAL)?;
        let g = run_ensemble_with(&ghz, options.workers)?;
        let p = run_ensemble_with(&product, options.workers)?;
        tables.push((format!("ghz_n{n}"), Table::from(&g)));
        tables.push((format!("product_n{n}"), Table::from(&p)));
        tables.push((format!("ratio_n{n}"), compare_summaries(g, p).table()));
        plans.insert(format!("ghz_n{n}"), serde_json::to_value(&ghz)?);
        plans.insert(format!("product_n{n}"), serde_json::to_value(&product)?);
    }
    Ok(FigureArtifacts {
        figure: FigureId::Fig6,
        tables,
        sidecar: sidecar(FigureId::Fig6, options, Value::Object(plans), Value::Null),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_parse() {
        for f in FigureId::ALL {
            assert_eq!(f.as_str().parse::<FigureId>().unwrap(), f);
        }
        assert!(matches!("fig4".parse::<FigureId>(), Err(Error::Usage(_))));
    }

    #[test]
    fn likelihood_maxima_grow_with_time() {
        let art = reproduce_figure(FigureId::Fig2Likelihood, &FigureOptions::default()).unwrap();
        assert_eq!(art.sidecar["results"]["local_maxima"], json!([1, 2, 3]));
        let t = art.table("curves").unwrap();
        assert_eq!(t.rows.len(), FIG2_GRID as usize);
        for c in 1..4 {
            let top = t.rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(top, 0.0);
        }
    }

    #[test]
    fn counts_interior_maxima() {
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0]), 0);
        assert_eq!(count_local_maxima(&[0.0, 1.0, 1.0, 0.0, 2.0, 0.0]), 2);
    }

    #[test]
    fn ghz_horizon_reaches_product_time() {
        let (ghz, product) = fig6_pair(&FigureOptions::default(), 5, 60).unwrap();
        let target = realized_schedule(&product.base).unwrap().last().unwrap().cum_time;
        let sched = realized_schedule(&ghz.base).unwrap();
        assert!(sched.last().unwrap().cum_time >= target);
        assert!(sched[sched.len() - 2].cum_time < target);
        assert_eq!(ghz.base.seed, product.base.seed);
    }

    #[test]
    fn small_fig3_writes_files() {
        let options = FigureOptions { trials_per_batch: 4, batches: 2, ..FigureOptions::default() };
        let art = reproduce_figure(FigureId::Fig3, &options).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = art.write(dir.path()).unwrap();
        let names: Vec<_> = paths.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(
            names,
            ["reproduce_fig3_aqse.csv", "reproduce_fig3_atfe_no_update.csv", "reproduce_fig3_atfe_update.csv", "reproduce_fig3.json"]
        );
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(text.starts_with("nu,holevo_var,holevo_stderr,cum_time,total_qubits,bound_fixed_qcrb,bound_ideal,bound_eq31\n"));
        assert_eq!(text.lines().count(), 61);
    }
}
