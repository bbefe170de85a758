use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::AnalysisConfig;
use crate::data::{build_dummies, has_solar, HourlyPanel};
use crate::error::{Error, Result};
use crate::marginals::{fit_ar_garch_with, ArGarchParams, FitOptions, MarginalFit, MarginalSpec};
use crate::seed::{derive_seed, stream};
use crate::taildep::{lambda_kendall, scenario_on_sample, CollapsedSample, LambdaEstimate, ScenarioPattern, Side, TailMeasureResult};
use crate::vine::sim::{pair_tdc_points, spearman_estimate};
use crate::vine::{select_and_fit, simulate, McEstimate, TdcPoint, VineModel};

/// Panel layout by hour: solar enters only in the solar hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelKind {
    Trivariate,
    Quadrivariate,
}

impl PanelKind {
    pub fn for_hour(hour: u8) -> Self {
        if has_solar(hour) {
            PanelKind::Quadrivariate
        } else {
            PanelKind::Trivariate
        }
    }

    pub fn n_vars(self) -> usize {
        match self {
            PanelKind::Trivariate => 3,
            PanelKind::Quadrivariate => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub variable: String,
    pub params: ArGarchParams,
    pub loglik: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Marginal fits and the copula sample they produce.
#[derive(Debug, Clone)]
pub struct HourModel {
    pub marginals: Vec<MarginalFit>,
    /// Pseudo-observations by variable, aligned on the longest lag.
    pub pseudo_obs: Vec<Vec<f64>>,
    pub vine: VineModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub a: String,
    pub b: String,
    pub estimate: McEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTdcRow {
    pub a: String,
    pub b: String,
    pub points: Vec<TdcPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub target: String,
    pub conditioning: Vec<String>,
    pub estimate: LambdaEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub pattern: String,
    pub result: TailMeasureResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyAnalysisResult {
    pub hour: u8,
    pub kind: PanelKind,
    pub variables: Vec<String>,
    pub n_obs: usize,
    pub marginals: Vec<MarginalSummary>,
    pub vine: VineModel,
    pub spearman: Vec<PairEstimate>,
    pub pair_tdc: Vec<PairTdcRow>,
    pub lambda: Vec<LambdaRow>,
    pub scenarios: Vec<ScenarioRow>,
    pub n_mc: usize,
    pub mc_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourFailure {
    pub hour: u8,
    /// Window index for rolling runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    pub code: String,
    pub message: String,
}

impl HourFailure {
    pub(crate) fn new(hour: u8, window: Option<usize>, e: &Error) -> Self {
        Self { hour, window, code: e.code().into(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRun {
    pub results: Vec<HourlyAnalysisResult>,
    pub failures: Vec<HourFailure>,
}

pub(crate) fn check_panel(panel: &HourlyPanel) -> Result<PanelKind> {
    panel.validate()?;
    let kind = PanelKind::for_hour(panel.hour);
    if panel.n_vars() != kind.n_vars() {
        return Err(Error::Schema(format!("hour {} needs {} variables", panel.hour, kind.n_vars())));
    }
    Ok(kind)
}

/// Fits the marginals of every variable, then a vine on the aligned
/// pseudo-observations.
pub fn fit_hour(panel: &HourlyPanel, config: &AnalysisConfig) -> Result<HourModel> {
    check_panel(panel)?;
    let dummies = build_dummies(&panel.dates);
    let opts = FitOptions { pit_mode: config.pit_mode, bfgs: None };
    let marginals: Vec<MarginalFit> = panel
        .variable_names
        .iter()
        .enumerate()
        .map(|(j, name)| fit_ar_garch_with(&panel.column(j), &dummies, &MarginalSpec::for_variable(name), opts))
        .collect::<Result<_>>()?;
    let len = marginals.iter().map(|m| m.pseudo_obs.len()).min().unwrap_or(0);
    let pseudo_obs: Vec<Vec<f64>> = marginals.iter().map(|m| m.pseudo_obs[m.pseudo_obs.len() - len..].to_vec()).collect();
    let vine = select_and_fit(&pseudo_obs, &config.vine_options())?;
    Ok(HourModel { marginals, pseudo_obs, vine })
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Global study for one hour: model fit, then every dependence summary from
/// one simulated vine sample.
pub fn analyze_hour(panel: &HourlyPanel, config: &AnalysisConfig) -> Result<HourlyAnalysisResult> {
    let kind = check_panel(panel)?;
    let model = fit_hour(panel, config)?;
    let names = &panel.variable_names;
    let n = names.len();
    let mc_seed = derive_seed(config.seed, &[stream::GLOBAL_MC, u64::from(panel.hour)]);
    let cols = simulate(&model.vine, config.n_mc, mc_seed)?;

    let spearman = pairs(n)
        .into_iter()
        .map(|(a, b)| PairEstimate {
            a: names[a].clone(),
            b: names[b].clone(),
            estimate: spearman_estimate(&cols[a], &cols[b], mc_seed),
        })
        .collect();
    let pair_tdc = pairs(n)
        .into_iter()
        .map(|(a, b)| PairTdcRow {
            a: names[a].clone(),
            b: names[b].clone(),
            points: pair_tdc_points(&cols[a], &cols[b], &config.alpha_grid),
        })
        .collect();

    let cond: Vec<usize> = (1..n).collect();
    let x: Vec<Vec<f64>> = cond.iter().map(|&j| cols[j].clone()).collect();
    let collapsed = CollapsedSample::new(&x, &cols[0])?;
    let lambda = [Side::Lower, Side::Upper]
        .into_iter()
        .map(|side| {
            Ok(LambdaRow {
                target: names[0].clone(),
                conditioning: cond.iter().map(|&j| names[j].clone()).collect(),
                estimate: lambda_kendall(&collapsed, side, &config.alpha_grid)?,
            })
        })
        .collect::<Result<_>>()?;

    let scenarios = config
        .scenario_labels(cond.len())
        .into_iter()
        .map(|label| {
            let p = ScenarioPattern::from_label(&label, 0, &cond, config.alpha, config.beta)?;
            Ok(ScenarioRow { result: scenario_on_sample(&cols, &p)?, pattern: label })
        })
        .collect::<Result<_>>()?;

    Ok(HourlyAnalysisResult {
        hour: panel.hour,
        kind,
        variables: names.clone(),
        n_obs: model.pseudo_obs[0].len(),
        marginals: model
            .marginals
            .iter()
            .zip(names)
            .map(|(m, name)| MarginalSummary {
                variable: name.clone(),
                params: m.params.clone(),
                loglik: m.loglik,
                converged: m.diagnostics.converged,
                warnings: m.diagnostics.warnings.clone(),
            })
            .collect(),
        vine: model.vine,
        spearman,
        pair_tdc,
        lambda,
        scenarios,
        n_mc: config.n_mc,
        mc_seed,
    })
}

/// Runs the global study over the configured hours. Hours fail
/// independently; failures are listed next to the results.
pub fn run_global(panels: &[HourlyPanel], config: &AnalysisConfig) -> Result<GlobalRun> {
    config.validate()?;
    let outcomes: Vec<(u8, Result<HourlyAnalysisResult>)> = config
        .hours
        .par_iter()
        .map(|&h| {
            let r = match panels.iter().find(|p| p.hour == h) {
                Some(p) => analyze_hour(p, config),
                None => Err(Error::Domain(format!("no panel for hour {h}"))),
            };
            (h, r)
        })
        .collect();
    let mut run = GlobalRun { results: Vec::new(), failures: Vec::new() };
    for (h, r) in outcomes {
        match r {
            Ok(res) => run.results.push(res),
            Err(e) => run.failures.push(HourFailure::new(h, None, &e)),
        }
    }
    run.results.sort_by_key(|r| r.hour);
    run.failures.sort_by_key(|f| f.hour);
    Ok(run)
}
