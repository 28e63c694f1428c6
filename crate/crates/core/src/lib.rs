//! Drift detection for numeric tabular data.
//!
//! Strong polynomial relations between features are discovered on a baseline
//! table ([`relations`]), frozen into a [`engine::BaselineProfile`], and
//! re-evaluated on field data. A relation whose Gaussian likelihood drops on
//! the field data yields a large Bayes factor (BIC approximation), which is
//! reported as drift. [`sim`] injects controlled drift for experiments.

pub mod engine;
pub mod error;
pub mod io;
pub mod relations;
pub mod sim;
pub mod stats;
pub mod synthetic;
pub mod tabular;

pub use engine::{
    build_profile, load_profile, save_profile, score_drift, BaselineProfile, Decision, DriftFinding,
    DriftReport, Grade, DEFAULT_THRESHOLD_2LNBF,
};
pub use error::{Error, Result};
pub use relations::{
    discover_relations, embed, enumerate_terms, top_k_correlated, DiscoveryParams, Relation,
    RelationSet, TermExponents,
};
pub use sim::{
    gen_unfair_target, permute_rows, run_permutation_sweep, run_unfairness_sweep, DriftKind,
    SimulationSpec, SweepConfig, SweepResult, UnfairRoles,
};
pub use stats::{
    bayes_factor, bic, correlation_matrix, fit_ols, gaussian_log_likelihood, pearson, BayesFactor,
    CorrelationMatrix, OlsFit,
};
pub use tabular::{
    column_stats, load_csv, split_rows, standardize, unstandardize, ColumnStats, CsvOptions,
    DataTable, SplitPair,
};
