//! Single-break cointegration: designs, residual statistics, the minimising
//! search over break dates, critical values, verdicts and long-run fits.

mod critical;
mod decision;
mod design;
mod fit;
mod gh;
mod phillips;

pub use critical::{
    embedded_critical_values, gh_critical_values, CvSource, GhStatistic, SourcedCriticalValues,
};
pub use decision::{decide, Decision, DecisionRule, ModelVerdict};
pub use design::{build_design, build_design_trimmed, BreakDummy, Design, GhModel, Trim};
pub use fit::{
    fit_break_regression, fit_long_run, post_break_restrictions, wald_test, Coefficient,
    CointegrationFit, LinearRestriction, WaldResult,
};
pub use gh::{
    adf_on_residuals, candidate_stats, gh_minima, gh_test, BreakStat, CandidateStats,
    GhCriticalSet, GhMinima, GhOptions, GhResult,
};
pub use phillips::{default_bandwidth, long_run_variance, phillips_stats, LongRunVariance, PhillipsStats};

pub(crate) use design::design_columns;
#[cfg(test)]
pub(crate) use gh::break_residuals;
