use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::AnalysisConfig;
use super::global::{check_panel, fit_hour, HourFailure};
use crate::data::HourlyPanel;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream};
use crate::vine::sim::spearman_estimate;
use crate::vine::{simulate, McEstimate};

/// Number of windows of length `window` advancing by `step` over `total`
/// days: `floor((total - window) / step) + 1`, or 0 when none fits.
pub fn window_count(total: usize, window: usize, step: usize) -> usize {
    if step == 0 || window == 0 || total < window {
        0
    } else {
        (total - window) / step + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub index: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Vine-induced Spearman correlation per pair, empty if the window failed.
    pub values: Vec<McEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingResult {
    pub hour: u8,
    pub variables: Vec<String>,
    pub pairs: Vec<(usize, usize)>,
    pub windows: Vec<WindowRow>,
    /// Same measure estimated on the whole panel.
    pub full_sample: Vec<McEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingRun {
    pub results: Vec<RollingResult>,
    pub failures: Vec<HourFailure>,
}

fn pair_spearman(panel: &HourlyPanel, config: &AnalysisConfig, n_mc: usize, seed: u64) -> Result<Vec<McEstimate>> {
    let model = fit_hour(panel, config)?;
    let cols = simulate(&model.vine, n_mc, seed)?;
    let n = cols.len();
    Ok((0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .map(|(a, b)| spearman_estimate(&cols[a], &cols[b], seed))
        .collect())
}

/// Rolling study for one hour. Windows that fail are kept in the series
/// with their error and no values.
pub fn rolling_hour(panel: &HourlyPanel, config: &AnalysisConfig) -> Result<RollingResult> {
    check_panel(panel)?;
    let total = panel.len();
    if total < config.window_days + config.step_days {
        return Err(Error::Domain(format!(
            "hour {} has {total} days; rolling needs at least window_days + step_days = {}",
            panel.hour,
            config.window_days + config.step_days
        )));
    }
    let hour = u64::from(panel.hour);
    let n = panel.n_vars();
    let full_seed = derive_seed(config.seed, &[stream::ROLLING_FULL, hour]);
    let full_sample = pair_spearman(panel, config, config.rolling_n_mc, full_seed)?;
    let count = window_count(total, config.window_days, config.step_days);
    let windows = (0..count)
        .into_par_iter()
        .map(|k| {
            let start = k * config.step_days;
            let w = panel.window(start, config.window_days);
            let seed = derive_seed(config.seed, &[stream::ROLLING_MC, hour, k as u64]);
            let (values, error) = match pair_spearman(&w, config, config.rolling_n_mc, seed) {
                Ok(v) => (v, None),
                Err(e) => (Vec::new(), Some(format!("{}: {e}", e.code()))),
            };
            WindowRow { index: k, start: w.dates[0], end: *w.dates.last().expect("non-empty window"), values, error }
        })
        .collect();
    Ok(RollingResult {
        hour: panel.hour,
        variables: panel.variable_names.clone(),
        pairs: (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
        windows,
        full_sample,
    })
}

/// Rolling study over the configured hours.
pub fn run_rolling(panels: &[HourlyPanel], config: &AnalysisConfig) -> Result<RollingRun> {
    config.validate()?;
    let outcomes: Vec<(u8, Result<RollingResult>)> = config
        .hours
        .par_iter()
        .map(|&h| {
            let r = match panels.iter().find(|p| p.hour == h) {
                Some(p) => rolling_hour(p, config),
                None => Err(Error::Domain(format!("no panel for hour {h}"))),
            };
            (h, r)
        })
        .collect();
    let mut run = RollingRun { results: Vec::new(), failures: Vec::new() };
    for (h, r) in outcomes {
        match r {
            Ok(res) => {
                for w in res.windows.iter().filter(|w| w.error.is_some()) {
                    run.failures.push(HourFailure {
                        hour: h,
                        window: Some(w.index),
                        code: "window_skipped".into(),
                        message: w.error.clone().unwrap_or_default(),
                    });
                }
                run.results.push(res);
            }
            Err(e) => run.failures.push(HourFailure::new(h, None, &e)),
        }
    }
    run.results.sort_by_key(|r| r.hour);
    run.failures.sort_by_key(|f| (f.hour, f.window));
    Ok(run)
}
