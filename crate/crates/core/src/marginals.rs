//! AR-GARCH(1,1) marginal models with calendar dummies.
//!
//! Mean equation: `y_t = sum_j phi_j y_{t - l_j} + sum_k psi_k d_{k,t} + eps_t`;
//! variance equation: `sigma2_t = omega + alpha eps_{t-1}^2 + beta sigma2_{t-1}`,
//! `eps_t = sigma_t eta_t` with Gaussian `eta_t`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{CalendarDummies, N_DUMMIES};
use crate::error::{Error, Result};
use crate::numeric::optim::{minimize_bfgs, BfgsOptions};
use crate::numeric::special::{norm_cdf, LN_SQRT_2PI};
use crate::stats::{ordinal_ranks, variance};

/// Upper bound on `alpha + beta` is `1 - STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-6;
/// Minimum number of observations beyond the largest lag.
pub const MIN_EFFECTIVE_OBS: usize = 50;
const PIT_CLAMP: f64 = 1e-12;
const BURN_IN: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PitMode {
    /// `u = Phi(eta)`.
    #[default]
    Parametric,
    /// `u = rank(eta) / (T + 1)`.
    Rank,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalSpec {
    pub lag_set: Vec<usize>,
    pub n_dummies: usize,
    pub innovation_dist: Innovation,
}

impl MarginalSpec {
    pub fn new(mut lag_set: Vec<usize>) -> Result<Self> {
        lag_set.sort_unstable();
        lag_set.dedup();
        if lag_set.is_empty() || lag_set[0] == 0 {
            return Err(Error::Domain("lag set must hold positive lags".into()));
        }
        Ok(Self { lag_set, n_dummies: N_DUMMIES, innovation_dist: Innovation::Gaussian })
    }

    /// Lags {1, 2, 7} for price, {1} for every other variable.
    pub fn for_variable(name: &str) -> Self {
        let lags = if name == "price" { vec![1, 2, 7] } else { vec![1] };
        Self::new(lags).expect("static lag sets are valid")
    }

    pub fn max_lag(&self) -> usize {
        *self.lag_set.last().expect("non-empty lag set")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArGarchParams {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ArGarchParams {
    pub fn validate(&self, spec: &MarginalSpec) -> Result<()> {
        if self.phi.len() != spec.lag_set.len() || self.psi.len() != spec.n_dummies {
            return Err(Error::Domain("parameter vector does not match the marginal spec".into()));
        }
        let all = self.phi.iter().chain(&self.psi).chain([&self.omega, &self.alpha, &self.beta]);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::Domain("marginal parameters must be finite".into()));
        }
        if !(self.omega > 0.0 && self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta < 1.0) {
            return Err(Error::Domain(format!(
                "GARCH restrictions violated: omega={}, alpha={}, beta={}",
                self.omega, self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Dummy columns that were all zero in the sample; their psi is fixed at 0.
    pub inactive_dummies: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalFit {
    pub spec: MarginalSpec,
    pub params: ArGarchParams,
    pub diagnostics: FitDiagnostics,
    pub sigma2_path: Vec<f64>,
    pub residuals: Vec<f64>,
    pub pseudo_obs: Vec<f64>,
    pub loglik: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    pub pit_mode: PitMode,
    pub bfgs: Option<BfgsOptions>,
}

/// Mean-equation residuals `eps_t` for `t >= max_lag`.
fn mean_residuals(y: &[f64], rows: &[[f64; N_DUMMIES]], lags: &[usize], phi: &[f64], psi: &[f64]) -> Vec<f64> {
    let p0 = lags[lags.len() - 1];
    (p0..y.len())
        .map(|t| {
            let ar: f64 = lags.iter().zip(phi).map(|(&l, &f)| f * y[t - l]).sum();
            let dm: f64 = rows[t].iter().zip(psi).map(|(&d, &s)| d * s).sum();
            y[t] - ar - dm
        })
        .collect()
}

/// GARCH(1,1) variance path, started at the sample variance of `eps`.
fn garch_path(eps: &[f64], omega: f64, alpha: f64, beta: f64) -> Vec<f64> {
    let mut s2 = Vec::with_capacity(eps.len());
    let mut prev = variance(eps);
    for t in 0..eps.len() {
        if t > 0 {
            prev = omega + alpha * eps[t - 1] * eps[t - 1] + beta * prev;
        }
        s2.push(prev);
    }
    s2
}

fn gaussian_loglik(eps: &[f64], s2: &[f64]) -> f64 {
    eps.iter()
        .zip(s2)
        .map(|(e, v)| -LN_SQRT_2PI - 0.5 * v.ln() - 0.5 * e * e / v)
        .sum()
}

fn check_inputs(series: &[f64], dummies: &CalendarDummies, spec: &MarginalSpec) -> Result<()> {
    if dummies.len() != series.len() {
        return Err(Error::Domain(format!(
            "dummies have {} rows but the series has {}",
            dummies.len(),
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let max_lag = spec.max_lag();
    if series.len() <= max_lag + MIN_EFFECTIVE_OBS {
        return Err(Error::DegenerateInput(format!(
            "series length {} must exceed max lag {} + {}",
            series.len(),
            max_lag,
            MIN_EFFECTIVE_OBS
        )));
    }
    Ok(())
}

/// Gaussian log-likelihood of `series` under `params`.
pub fn ar_garch_loglik(params: &ArGarchParams, series: &[f64], dummies: &CalendarDummies, spec: &MarginalSpec) -> Result<f64> {
    check_inputs(series, dummies, spec)?;
    params.validate(spec)?;
    let eps = mean_residuals(series, &dummies.rows, &spec.lag_set, &params.phi, &params.psi);
    let s2 = garch_path(&eps, params.omega, params.alpha, params.beta);
    Ok(gaussian_loglik(&eps, &s2))
}

/// Standardized residuals `eta_t = eps_t / sigma_t` and the variance path.
pub fn filter_residuals(
    params: &ArGarchParams,
    series: &[f64],
    dummies: &CalendarDummies,
    spec: &MarginalSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_inputs(series, dummies, spec)?;
    params.validate(spec)?;
    let eps = mean_residuals(series, &dummies.rows, &spec.lag_set, &params.phi, &params.psi);
    let s2 = garch_path(&eps, params.omega, params.alpha, params.beta);
    if let Some(t) = s2.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Numerical(format!("conditional variance not positive at index {t}")));
    }
    let eta = eps.iter().zip(&s2).map(|(e, v)| e / v.sqrt()).collect();
    Ok((eta, s2))
}

pub fn pit_transform(residuals: &[f64], mode: PitMode) -> Vec<f64> {
    match mode {
        PitMode::Parametric => residuals.iter().map(|&e| norm_cdf(e).clamp(PIT_CLAMP, 1.0 - PIT_CLAMP)).collect(),
        PitMode::Rank => {
            let n = residuals.len() as f64;
            ordinal_ranks(residuals).into_iter().map(|r| r as f64 / (n + 1.0)).collect()
        }
    }
}

/// Solves the symmetric positive definite system `a x = b` by Cholesky.
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        z[i] = (b[i] - (0..i).map(|k| l[i * n + k] * z[k]).sum::<f64>()) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (z[i] - (i + 1..n).map(|k| l[k * n + i] * x[k]).sum::<f64>()) / l[i * n + i];
    }
    Some(x)
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Maps unconstrained `(a, b1, b2)` to `(omega, alpha, beta)`.
fn garch_from_free(a: f64, b1: f64, b2: f64) -> (f64, f64, f64) {
    let s = (1.0 - STABILITY_MARGIN) * logistic(b1);
    let w = logistic(b2);
    (a.exp(), s * w, s * (1.0 - w))
}

fn garch_to_free(omega: f64, alpha: f64, beta: f64) -> (f64, f64, f64) {
    let s = (alpha + beta) / (1.0 - STABILITY_MARGIN);
    (omega.ln(), logit(s), logit(alpha / (alpha + beta)))
}

pub fn fit_ar_garch(series: &[f64], dummies: &CalendarDummies, spec: &MarginalSpec) -> Result<MarginalFit> {
    fit_ar_garch_with(series, dummies, spec, FitOptions::default())
}

/// Joint Gaussian maximum likelihood for the mean and variance equations.
///
/// The series is rescaled by its standard deviation before optimizing; the
/// reported parameters and log-likelihood are on the original scale.
pub fn fit_ar_garch_with(
    series: &[f64],
    dummies: &CalendarDummies,
    spec: &MarginalSpec,
    opts: FitOptions,
) -> Result<MarginalFit> {
    check_inputs(series, dummies, spec)?;
    let sd = variance(series).sqrt();
    if !(sd > 0.0) || sd < 1e-12 * series.iter().fold(0.0_f64, |m, v| m.max(v.abs())) {
        return Err(Error::DegenerateVariance("series has zero variance".into()));
    }
    let y: Vec<f64> = series.iter().map(|v| v / sd).collect();
    let lags = &spec.lag_set;
    let p0 = spec.max_lag();
    let p = lags.len();
    let rows = &dummies.rows;

    let active: Vec<usize> = (0..N_DUMMIES).filter(|&k| rows[p0..].iter().any(|r| r[k] != 0.0)).collect();
    let inactive: Vec<usize> = (0..N_DUMMIES).filter(|k| !active.contains(k)).collect();
    let m = p + active.len();

    // OLS start for the mean equation.
    let regressors = |t: usize| -> Vec<f64> {
        let mut x: Vec<f64> = lags.iter().map(|&l| y[t - l]).collect();
        x.extend(active.iter().map(|&k| rows[t][k]));
        x
    };
    let mut xtx = vec![0.0; m * m];
    let mut xty = vec![0.0; m];
    for t in p0..y.len() {
        let x = regressors(t);
        for i in 0..m {
            xty[i] += x[i] * y[t];
            for j in 0..m {
                xtx[i * m + j] += x[i] * x[j];
            }
        }
    }
    let ridge = 1e-10 * (0..m).map(|i| xtx[i * m + i]).fold(0.0, f64::max);
    for i in 0..m {
        xtx[i * m + i] += ridge;
    }
    let beta_ols = cholesky_solve(&xtx, &xty, m)
        .ok_or_else(|| Error::Numerical("mean-equation design matrix is singular".into()))?;

    let expand = |theta: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let phi = theta[..p].to_vec();
        let mut psi = vec![0.0; N_DUMMIES];
        for (i, &k) in active.iter().enumerate() {
            psi[k] = theta[p + i];
        }
        (phi, psi)
    };
    let (phi0, psi0) = expand(&beta_ols);
    let eps0 = mean_residuals(&y, rows, lags, &phi0, &psi0);
    let v0 = variance(&eps0);
    if !(v0 > 1e-20) {
        return Err(Error::DegenerateVariance("mean-equation residuals have zero variance".into()));
    }

    let objective = |theta: &[f64]| -> f64 {
        let (phi, psi) = expand(&theta[..m]);
        let (omega, alpha, beta) = garch_from_free(theta[m], theta[m + 1], theta[m + 2]);
        let eps = mean_residuals(&y, rows, lags, &phi, &psi);
        let s2 = garch_path(&eps, omega, alpha, beta);
        -gaussian_loglik(&eps, &s2)
    };

    let bfgs = opts.bfgs.unwrap_or_default();
    let mut best: Option<crate::numeric::optim::Minimum> = None;
    let mut last_failure = None;
    for &(a0, b0) in &[(0.05, 0.90), (0.10, 0.80), (0.20, 0.60), (0.02, 0.50)] {
        let (a, b1, b2) = garch_to_free(v0 * (1.0 - a0 - b0), a0, b0);
        let mut x0 = beta_ols.clone();
        x0.extend([a, b1, b2]);
        let run = minimize_bfgs(objective, &x0, bfgs);
        if !run.converged {
            last_failure = Some(run);
            continue;
        }
        if best.as_ref().is_none_or(|b| run.fx < b.fx) {
            best = Some(run);
        }
    }
    let Some(run) = best else {
        let run = last_failure.expect("at least one start ran");
        return Err(Error::Optimization {
            message: "AR-GARCH likelihood did not converge from any start".into(),
            iterations: run.iterations,
            last_iterate: run.x,
        });
    };

    let (phi, psi_scaled) = expand(&run.x[..m]);
    let (omega_s, alpha, beta) = garch_from_free(run.x[m], run.x[m + 1], run.x[m + 2]);
    let params = ArGarchParams {
        phi,
        psi: psi_scaled.iter().map(|v| v * sd).collect(),
        omega: omega_s * sd * sd,
        alpha,
        beta,
    };
    params.validate(spec)?;

    let mut warnings = Vec::new();
    if alpha < 1e-4 {
        warnings.push(format!("alpha at lower bound ({alpha:.3e})"));
    }
    if beta < 1e-4 {
        warnings.push(format!("beta at lower bound ({beta:.3e})"));
    }
    if alpha + beta > 1.0 - 1e-4 {
        warnings.push(format!("persistence alpha + beta at upper bound ({:.6})", alpha + beta));
    }

    let (residuals, sigma2_path) = filter_residuals(&params, series, dummies, spec)?;
    let eps = mean_residuals(series, rows, lags, &params.phi, &params.psi);
    let loglik = gaussian_loglik(&eps, &sigma2_path);
    let pseudo_obs = pit_transform(&residuals, opts.pit_mode);
    Ok(MarginalFit {
        spec: spec.clone(),
        params,
        diagnostics: FitDiagnostics {
            loglik,
            converged: true,
            iterations: run.iterations,
            inactive_dummies: inactive,
            warnings,
        },
        sigma2_path,
        residuals,
        pseudo_obs,
        loglik,
    })
}

/// Runs the AR-GARCH recursion on given innovations. The first `burn_in`
/// innovations warm the recursion up with the first dummy row and are not
/// returned; variance starts at its unconditional level.
pub fn ar_garch_path(
    params: &ArGarchParams,
    spec: &MarginalSpec,
    dummies: &CalendarDummies,
    innovations: &[f64],
    burn_in: usize,
) -> Result<Vec<f64>> {
    params.validate(spec)?;
    let horizon = innovations.len().saturating_sub(burn_in);
    if dummies.len() != horizon {
        return Err(Error::Domain(format!("need {horizon} dummy rows, got {}", dummies.len())));
    }
    let p0 = spec.max_lag();
    let total = innovations.len();
    let mut y = vec![0.0; p0 + total];
    let mut s2 = params.omega / (1.0 - params.alpha - params.beta);
    let mut eps_prev = 0.0;
    for (i, &eta) in innovations.iter().enumerate() {
        if i > 0 {
            s2 = params.omega + params.alpha * eps_prev * eps_prev + params.beta * s2;
        }
        let row = if i < burn_in { &dummies.rows[0] } else { &dummies.rows[i - burn_in] };
        let t = p0 + i;
        let ar: f64 = spec.lag_set.iter().zip(&params.phi).map(|(&l, &f)| f * y[t - l]).sum();
        let dm: f64 = row.iter().zip(&params.psi).map(|(&d, &s)| d * s).sum();
        let eps = s2.sqrt() * eta;
        y[t] = ar + dm + eps;
        eps_prev = eps;
    }
    Ok(y.split_off(p0 + burn_in))
}

/// Simulates `dummies.len()` days of the model with Gaussian innovations.
pub fn simulate_ar_garch(
    params: &ArGarchParams,
    spec: &MarginalSpec,
    dummies: &CalendarDummies,
    seed: u64,
) -> Result<Vec<f64>> {
    if dummies.is_empty() {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta: Vec<f64> = (0..BURN_IN + dummies.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    ar_garch_path(params, spec, dummies, &eta, BURN_IN)
}
