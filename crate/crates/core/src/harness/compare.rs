use serde::{Deserialize, Serialize};

use super::ensemble::{run_ensemble_with, CheckpointSummary, EnsembleSummary, ExperimentPlan};
use super::output::Table;
use crate::error::{Error, Result};
use crate::probe::ProbeMode;

/// One row of the GHZ-versus-product comparison at cumulative time `cum_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub cum_time: f64,
    pub var_product: f64,
    pub var_ghz: f64,
    /// `var_product / var_ghz`.
    pub variance_ratio: f64,
    pub qubits_product: f64,
    pub qubits_ghz: f64,
    /// `qubits_ghz / qubits_product`.
    pub qubit_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<RatioRow>,
    pub ghz: EnsembleSummary,
    pub product: EnsembleSummary,
}

impl Comparison {
    pub const HEADER: [&'static str; 7] = [
        "cum_time",
        "var_product",
        "var_ghz",
        "variance_ratio",
        "qubits_product",
        "qubits_ghz",
        "qubit_ratio",
    ];

    pub fn table(&self) -> Table {
        let mut t = Table::new(Self::HEADER);
        for r in &self.rows {
            t.push(vec![
                r.cum_time,
                r.var_product,
                r.var_ghz,
                r.variance_ratio,
                r.qubits_product,
                r.qubits_ghz,
                r.qubit_ratio,
            ]);
        }
        t
    }

    /// Row at the largest cumulative time both series reach.
    pub fn last(&self) -> Option<&RatioRow> {
        self.rows.last()
    }
}

fn check_pair(ghz: &ExperimentPlan, product: &ExperimentPlan) -> Result<()> {
    let (g, p) = (&ghz.base, &product.base);
    if g.probe.mode != ProbeMode::Ghz {
        return Err(Error::usage("first plan must use a GHZ probe"));
    }
    if !matches!(p.probe.mode, ProbeMode::ProductParallel | ProbeMode::Single) {
        return Err(Error::usage("second plan must use a product probe"));
    }
    if g.probe.n_qubits != p.probe.n_qubits {
        return Err(Error::usage(format!(
            "qubit counts differ: {} (GHZ) vs {} (product)",
            g.probe.n_qubits, p.probe.n_qubits
        )));
    }
    if g.confidence_level != p.confidence_level || g.nu_initial != p.nu_initial {
        return Err(Error::usage("both plans must share confidence_level and nu_initial"));
    }
    Ok(())
}

/// Runs both ensembles and tabulates their ratios over cumulative time.
pub fn compare_ghz_vs_product(
    ghz: &ExperimentPlan,
    product: &ExperimentPlan,
    workers: Option<usize>,
) -> Result<Comparison> {
    check_pair(ghz, product)?;
    let g = run_ensemble_with(ghz, workers)?;
    let p = run_ensemble_with(product, workers)?;
    Ok(compare_summaries(g, p))
}

/// Ratios at the product checkpoints that the GHZ series also covers.
///
/// The GHZ variance is interpolated linearly in `(ln T, ln var)`, and its
/// qubit count linearly in `T`.
pub fn compare_summaries(ghz: EnsembleSummary, product: EnsembleSummary) -> Comparison {
    let rows = product
        .rows
        .iter()
        .filter_map(|p| {
            let (var_ghz, qubits_ghz) = interpolate(&ghz.rows, p.cum_time)?;
            let qubits_product = p.total_qubits as f64;
            Some(RatioRow {
                cum_time: p.cum_time,
                var_product: p.holevo_var,
                var_ghz,
                variance_ratio: p.holevo_var / var_ghz,
                qubits_product,
                qubits_ghz,
                qubit_ratio: qubits_ghz / qubits_product,
            })
        })
        .collect();
    Comparison { rows, ghz, product }
}

fn interpolate(rows: &[CheckpointSummary], t: f64) -> Option<(f64, f64)> {
    let k = rows.iter().position(|r| r.cum_time >= t)?;
    let hi = &rows[k];
    if hi.cum_time == t || k == 0 {
        return (hi.cum_time == t).then_some((hi.holevo_var, hi.total_qubits as f64));
    }
    let lo = &rows[k - 1];
    let w = (t - lo.cum_time) / (hi.cum_time - lo.cum_time);
    let qubits = lo.total_qubits as f64 + w * (hi.total_qubits as f64 - lo.total_qubits as f64);
    let var = if lo.holevo_var > 0.0 && hi.holevo_var > 0.0 {
        let lw = (t.ln() - lo.cum_time.ln()) / (hi.cum_time.ln() - lo.cum_time.ln());
        (lo.holevo_var.ln() + lw * (hi.holevo_var.ln() - lo.holevo_var.ln())).exp()
    } else {
        lo.holevo_var + w * (hi.holevo_var - lo.holevo_var)
    };
    Some((var, qubits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(nu: u32, t: f64, var: f64, qubits: u64) -> CheckpointSummary {
        CheckpointSummary {
            nu,
            holevo_var: var,
            holevo_stderr: 0.0,
            cum_time: t,
            total_qubits: qubits,
            bound_fixed_qcrb: 0.0,
            bound_ideal: 0.0,
            bound_eq31: 0.0,
            infinite_batches: 0,
        }
    }

    #[test]
    fn interpolates_power_laws_exactly() {
        // var = T^-2 and qubits = 4T on the GHZ side
        let ghz = EnsembleSummary {
            rows: (1..=8).map(|k| row(k, f64::from(k), f64::from(k).powi(-2), 4 * u64::from(k))).collect(),
        };
        let product = EnsembleSummary {
            rows: vec![row(1, 0.5, 1.0, 2), row(2, 2.5, 0.3, 4), row(3, 9.0, 0.1, 6)],
        };
        let cmp = compare_summaries(ghz, product);
        assert_eq!(cmp.rows.len(), 1, "0.5 precedes and 9 exceeds the GHZ range");
        let r = cmp.rows[0];
        assert!((r.var_ghz - 2.5f64.powi(-2)).abs() < 1e-12);
        assert!((r.qubits_ghz - 10.0).abs() < 1e-12);
        assert!((r.qubit_ratio - 2.5).abs() < 1e-12);
        assert!((r.variance_ratio - 0.3 * 6.25).abs() < 1e-12);
    }

    #[test]
    fn identical_series_give_unit_ratios() {
        let s = EnsembleSummary { rows: (1..=5).map(|k| row(k, 0.25 * f64::from(k), 1.0 / f64::from(k), u64::from(k))).collect() };
        let cmp = compare_summaries(s.clone(), s);
        assert_eq!(cmp.rows.len(), 5);
        for r in &cmp.rows {
            assert_eq!(r.variance_ratio, 1.0);
            assert_eq!(r.qubit_ratio, 1.0);
        }
    }
}
