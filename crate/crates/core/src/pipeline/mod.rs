//! Per-hour global study and rolling-window study over hourly panels.

mod config;
mod global;
mod report;
mod rolling;

pub use config::{AnalysisConfig, DEFAULT_SCENARIOS};
pub use global::{
    analyze_hour, fit_hour, run_global, GlobalRun, HourFailure, HourModel, HourlyAnalysisResult, LambdaRow,
    MarginalSummary, PairEstimate, PairTdcRow, PanelKind, ScenarioRow,
};
pub use report::{tail_row, write_global_bundle, write_rolling_bundle, RunMetadata, TAIL_HEADER, UPPER_RATIO_NOTE};
pub use rolling::{rolling_hour, run_rolling, window_count, RollingResult, RollingRun, WindowRow};

#[cfg(test)]
mod tests;
