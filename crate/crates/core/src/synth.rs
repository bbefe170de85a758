//! Synthetic hourly datasets from AR-GARCH marginals coupled by vines.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicop::BivariateCopula;
use crate::data::{build_dummies, has_solar, RawHourlyRecord, N_DUMMIES, VARIABLES};
use crate::error::{Error, Result};
use crate::marginals::{ar_garch_path, ArGarchParams, MarginalSpec};
use crate::numeric::special::norm_quantile;
use crate::seed::{derive_seed, stream};
use crate::vine::{simulate, Edge, VineModel, VineStructure};

const BURN_IN: usize = 200;

/// Dependence switches to these vines from day `day` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeBreak {
    pub day: usize,
    pub vine_night: VineModel,
    pub vine_day: VineModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub start_date: NaiveDate,
    pub days: usize,
    /// Parameters for price, demand, wind and solar, in that order.
    pub marginals: Vec<ArGarchParams>,
    /// Vine on (price, demand, wind) for hours without solar.
    pub vine_night: VineModel,
    /// Vine on (price, demand, wind, solar) for the solar hours.
    pub vine_day: VineModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_break: Option<RegimeBreak>,
}

fn level_params(phi: Vec<f64>, level: f64, scale: f64) -> ArGarchParams {
    let persistence: f64 = phi.iter().sum();
    let mut psi = vec![0.0; N_DUMMIES];
    for m in psi.iter_mut().take(12) {
        *m = level * (1.0 - persistence);
    }
    ArGarchParams { phi, psi, omega: 0.1 * scale * scale, alpha: 0.1, beta: 0.8 }
}

fn default_marginals() -> Vec<ArGarchParams> {
    vec![
        level_params(vec![0.5, 0.1, 0.2], 40.0, 5.0),
        level_params(vec![0.6], 50.0, 3.0),
        level_params(vec![0.6], 10.0, 2.0),
        level_params(vec![0.6], 5.0, 1.0),
    ]
}

/// Canonical vine rooted at price (variable 0).
pub fn price_rooted_vine(n: usize, copulas: Vec<Vec<BivariateCopula>>) -> Result<VineModel> {
    let trees = match n {
        3 => vec![vec![Edge::new(0, 1, vec![]), Edge::new(0, 2, vec![])], vec![Edge::new(1, 2, vec![0])]],
        4 => vec![
            vec![Edge::new(0, 1, vec![]), Edge::new(0, 2, vec![]), Edge::new(0, 3, vec![])],
            vec![Edge::new(1, 2, vec![0]), Edge::new(1, 3, vec![0])],
            vec![Edge::new(2, 3, vec![0, 1])],
        ],
        _ => return Err(Error::Domain(format!("vines are supported for 3 or 4 variables, got {n}"))),
    };
    let model = VineModel::from_parts(VineStructure { n_vars: n, trees }, copulas);
    model.validate()?;
    Ok(model)
}

fn independence_vine(n: usize) -> VineModel {
    let cops = (0..n - 1).map(|k| vec![BivariateCopula::independence(); n - 1 - k]).collect();
    price_rooted_vine(n, cops).expect("static structure")
}

impl GeneratorSpec {
    /// All variables independent.
    pub fn independence(start_date: NaiveDate, days: usize) -> Self {
        Self {
            start_date,
            days,
            marginals: default_marginals(),
            vine_night: independence_vine(3),
            vine_day: independence_vine(4),
            regime_break: None,
        }
    }

    /// Price rises with demand and falls with wind and solar.
    pub fn default_dependent(start_date: NaiveDate, days: usize) -> Self {
        let price_demand = BivariateCopula::gumbel(1.6).expect("valid");
        let price_wind = BivariateCopula::gaussian(-0.45).expect("valid");
        let demand_wind = BivariateCopula::frank(0.8).expect("valid");
        let vine_night = price_rooted_vine(3, vec![vec![price_demand.clone(), price_wind.clone()], vec![demand_wind.clone()]])
            .expect("static vine");
        let vine_day = price_rooted_vine(
            4,
            vec![
                vec![price_demand, price_wind, BivariateCopula::gaussian(-0.3).expect("valid")],
                vec![demand_wind, BivariateCopula::gaussian(0.15).expect("valid")],
                vec![BivariateCopula::independence()],
            ],
        )
        .expect("static vine");
        Self { start_date, days, marginals: default_marginals(), vine_night, vine_day, regime_break: None }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Error::Config(m);
        if self.days < 2 {
            return Err(cfg(format!("days must be at least 2, got {}", self.days)));
        }
        if self.marginals.len() != VARIABLES.len() {
            return Err(cfg(format!("expected {} marginal models, got {}", VARIABLES.len(), self.marginals.len())));
        }
        for (p, name) in self.marginals.iter().zip(VARIABLES) {
            p.validate(&MarginalSpec::for_variable(name)).map_err(|e| cfg(format!("{name}: {e}")))?;
        }
        let mut vines = vec![(&self.vine_night, 3), (&self.vine_day, 4)];
        if let Some(b) = &self.regime_break {
            if b.day == 0 || b.day >= self.days {
                return Err(cfg(format!("regime break day {} outside 1..{}", b.day, self.days)));
            }
            vines.push((&b.vine_night, 3));
            vines.push((&b.vine_day, 4));
        }
        for (v, n) in vines {
            if v.n_vars() != n {
                return Err(cfg(format!("expected a {n}-variable vine, got {}", v.n_vars())));
            }
            v.validate().map_err(|e| cfg(e.to_string()))?;
        }
        Ok(())
    }

    fn dates(&self) -> Vec<NaiveDate> {
        self.start_date.iter_days().take(self.days).collect()
    }
}

/// Uniform innovations for one hour: burn-in and the first regime, then
/// the second regime if any. Columns by variable.
fn hour_uniforms(spec: &GeneratorSpec, hour: u8, seed: u64) -> Result<Vec<Vec<f64>>> {
    let solar = has_solar(hour);
    let pick = |night: &VineModel, day: &VineModel| if solar { day.clone() } else { night.clone() };
    let first = pick(&spec.vine_night, &spec.vine_day);
    let split = spec.regime_break.as_ref().map_or(spec.days, |b| b.day);
    let mut cols = simulate(&first, BURN_IN + split, derive_seed(seed, &[stream::SYNTH, u64::from(hour)]))?;
    if let Some(b) = &spec.regime_break {
        let second = pick(&b.vine_night, &b.vine_day);
        let rest = simulate(&second, spec.days - split, derive_seed(seed, &[stream::SYNTH_BREAK, u64::from(hour)]))?;
        for (c, r) in cols.iter_mut().zip(rest) {
            c.extend(r);
        }
    }
    Ok(cols)
}

/// Generates `days x 24` records. Solar is empty outside the solar hours.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Vec<RawHourlyRecord>> {
    spec.validate()?;
    let dates = spec.dates();
    let dummies = build_dummies(&dates);
    let per_hour: Vec<Vec<Vec<f64>>> = (0u8..24)
        .into_par_iter()
        .map(|hour| {
            let u = hour_uniforms(spec, hour, seed)?;
            u.iter()
                .enumerate()
                .map(|(j, col)| {
                    let eta: Vec<f64> = col.iter().map(|&p| norm_quantile(p)).collect();
                    ar_garch_path(&spec.marginals[j], &MarginalSpec::for_variable(VARIABLES[j]), &dummies, &eta, BURN_IN)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(24 * spec.days);
    for (t, &date) in dates.iter().enumerate() {
        for (hour, series) in per_hour.iter().enumerate() {
            out.push(RawHourlyRecord {
                date,
                hour: hour as u8,
                price: series[0][t],
                demand: series[1][t],
                wind: series[2][t],
                solar: series.get(3).map(|s| s[t]),
            });
        }
    }
    Ok(out)
}
