//! Monte Carlo ensembles, GHZ versus product comparisons and canned figure
//! reproductions.
//!
//! Trials are independent work items on a rayon pool. Each owns RNG streams
//! derived from the master seed and its index, and results are reduced in
//! index order, so output does not depend on the worker count.

mod compare;
mod ensemble;
mod figures;
mod output;

pub use compare::{compare_ghz_vs_product, compare_summaries, Comparison, RatioRow};
pub use ensemble::{
    overlay_bounds, run_ensemble, run_ensemble_with, run_trials, summarize, CheckpointSummary,
    EnsembleSummary, ExperimentPlan, OmegaPolicy, UNIFORM_OMEGA_LIMIT,
};
pub use figures::{
    count_local_maxima, fig5_seed, fig6_pair, ghz_horizon_for_time, reproduce_figure, FigureArtifacts, FigureId,
    FigureOptions, FIG2_GRID, FIG2_OMEGA, FIG2_OUTCOMES, FIG2_TIMES, FIG3_DENSE_POINTS, FIG5_QUBITS,
    FIG6_QUBITS, FIG_NU_INITIAL, FIG_NU_TOTAL,
};
pub use output::{artifact_path, write_json, Table, SUMMARY_HEADER};
