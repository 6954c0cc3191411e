//! Verification campaigns for the circular law: convergence rates,
//! deviation tables, analytic ledgers and byte-stable reports.

// `!(x >= a)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod bank;
pub mod config;
pub mod deviations;
pub mod error;
pub mod ledger;
pub mod rates;
pub mod report;

pub use analytics::verify_analytics;
pub use bank::SpectrumBank;
pub use config::ExperimentConfig;
pub use deviations::{
    verify_counting_concentration, verify_edge_moment, verify_eigenvalue_deviation, DeviationRow,
    DeviationTable,
};
pub use error::{LabError, LabResult};
pub use ledger::{LedgerRow, Verdict};
pub use rates::{run_rate_experiment, RateCell, RateReport};
pub use report::{emit_report, run_campaign, Campaigns, Report};
