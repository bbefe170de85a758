use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kendall::{check_sample, empirical_quantile, kendall_pit};
use crate::error::{Error, Result};
use crate::vine::sim::ols_intercept;

/// Conditioning-region size below which a result is flagged unreliable.
pub const MIN_CONDITIONING: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailMeasureResult {
    pub side: Side,
    pub value: f64,
    /// `value / beta`: equals 1 when Y is independent of X, on both sides.
    pub ratio_vs_independence: f64,
    /// `value / beta` on the lower side, `value / (1 - beta)` on the upper
    /// side, the normalization that treats `1 - beta` as the upper
    /// independence level.
    pub remark_ratio: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Binomial standard error of `value` given the conditioning count.
    pub mc_stderr: f64,
    /// Kendall threshold `t_L` or `t_U` on the multivariate PIT.
    pub threshold: f64,
    pub n_conditioning: usize,
    pub n_joint: usize,
    pub n_obs: usize,
    pub reliable: bool,
}

fn check_level(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 0.5), got {x}")))
    }
}

/// The pairs `(F_X(X), Y)` of a sample with the sorted values needed for
/// Kendall quantiles and empirical Y quantiles.
#[derive(Debug, Clone)]
pub struct CollapsedSample {
    w: Vec<f64>,
    y: Vec<f64>,
    w_sorted: Vec<f64>,
    y_sorted: Vec<f64>,
}

impl CollapsedSample {
    pub fn new(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Domain("at least one conditioning column is required".into()));
        }
        let m = check_sample(x)?;
        if y.len() != m {
            return Err(Error::Domain(format!("target has {} rows, conditioning columns have {m}", y.len())));
        }
        if m == 0 || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("target must be non-empty and finite".into()));
        }
        let w = kendall_pit(x)?;
        Ok(Self::from_pit(w, y.to_vec()))
    }

    /// Builds the sample from a precomputed collapsed variable `w`.
    pub fn from_pit(w: Vec<f64>, y: Vec<f64>) -> Self {
        let mut w_sorted = w.clone();
        w_sorted.sort_by(f64::total_cmp);
        let mut y_sorted = y.clone();
        y_sorted.sort_by(f64::total_cmp);
        Self { w, y, w_sorted, y_sorted }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn pit(&self) -> &[f64] {
        &self.w
    }

    /// Counting estimate of `P(Y <= F_Y^-1(beta) | W <= K^-1(alpha))` or
    /// `P(Y >= F_Y^-1(1 - beta) | W >= K^-1(1 - alpha))`. No size checks.
    pub fn measure(&self, side: Side, alpha: f64, beta: f64) -> Result<TailMeasureResult> {
        check_level("alpha", alpha)?;
        check_level("beta", beta)?;
        let (threshold, n_cond, n_joint) = match side {
            Side::Lower => {
                let t = empirical_quantile(&self.w_sorted, alpha);
                let yq = empirical_quantile(&self.y_sorted, beta);
                let (c, j) = count(&self.w, &self.y, |w| w <= t, |y| y <= yq);
                (t, c, j)
            }
            Side::Upper => {
                let t = empirical_quantile(&self.w_sorted, 1.0 - alpha);
                let yq = empirical_quantile(&self.y_sorted, 1.0 - beta);
                let (c, j) = count(&self.w, &self.y, |w| w >= t, |y| y >= yq);
                (t, c, j)
            }
        };
        if n_cond == 0 {
            return Err(Error::Resolution(format!("empty conditioning region at alpha = {alpha}")));
        }
        let value = n_joint as f64 / n_cond as f64;
        let remark = match side {
            Side::Lower => beta,
            Side::Upper => 1.0 - beta,
        };
        Ok(TailMeasureResult {
            side,
            value,
            ratio_vs_independence: value / beta,
            remark_ratio: value / remark,
            alpha,
            beta,
            mc_stderr: (value * (1.0 - value) / n_cond as f64).sqrt(),
            threshold,
            n_conditioning: n_cond,
            n_joint,
            n_obs: self.len(),
            reliable: n_cond >= MIN_CONDITIONING,
        })
    }
}

fn count(w: &[f64], y: &[f64], in_region: impl Fn(f64) -> bool, in_tail: impl Fn(f64) -> bool) -> (usize, usize) {
    w.iter().zip(y).fold((0, 0), |(c, j), (&wi, &yi)| {
        if in_region(wi) {
            (c + 1, j + usize::from(in_tail(yi)))
        } else {
            (c, j)
        }
    })
}

fn checked_measure(x: &[Vec<f64>], y: &[f64], side: Side, alpha: f64, beta: f64) -> Result<TailMeasureResult> {
    check_level("alpha", alpha)?;
    check_level("beta", beta)?;
    let s = CollapsedSample::new(x, y)?;
    let expected = alpha * s.len() as f64;
    if expected < MIN_CONDITIONING as f64 {
        return Err(Error::Resolution(format!(
            "alpha * m = {expected:.1} is below the minimum conditioning count {MIN_CONDITIONING}"
        )));
    }
    s.measure(side, alpha, beta)
}

/// Lower Kendall-scenario tail measure of `y` given the columns `x`.
pub fn q_lower_kendall(x: &[Vec<f64>], y: &[f64], alpha: f64, beta: f64) -> Result<TailMeasureResult> {
    checked_measure(x, y, Side::Lower, alpha, beta)
}

/// Upper Kendall-scenario tail measure of `y` given the columns `x`.
pub fn q_upper_kendall(x: &[Vec<f64>], y: &[f64], alpha: f64, beta: f64) -> Result<TailMeasureResult> {
    checked_measure(x, y, Side::Upper, alpha, beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub side: Side,
    /// `q(alpha, alpha)` for each grid point, in grid order.
    pub points: Vec<TailMeasureResult>,
    /// Least-squares intercept in alpha over the reliable points.
    pub extrapolated: f64,
    pub smallest_reliable_alpha: f64,
    pub smallest_reliable_value: f64,
}

/// Evaluates `q(alpha, alpha)` on a decreasing grid inside (0, 0.1] and
/// extrapolates linearly to `alpha = 0`.
pub fn lambda_kendall(sample: &CollapsedSample, side: Side, alpha_grid: &[f64]) -> Result<LambdaEstimate> {
    if alpha_grid.is_empty()
        || alpha_grid.iter().any(|&a| !(a > 0.0 && a <= 0.1))
        || alpha_grid.windows(2).any(|p| p[1] >= p[0])
    {
        return Err(Error::Domain("alpha grid must be non-empty, strictly decreasing and inside (0, 0.1]".into()));
    }
    let points: Vec<TailMeasureResult> =
        alpha_grid.par_iter().map(|&a| sample.measure(side, a, a)).collect::<Result<_>>()?;
    let reliable: Vec<&TailMeasureResult> = points.iter().filter(|p| p.reliable).collect();
    let Some(last) = reliable.last() else {
        return Err(Error::Resolution(format!(
            "no grid point has at least {MIN_CONDITIONING} observations in the conditioning region"
        )));
    };
    let a: Vec<f64> = reliable.iter().map(|p| p.alpha).collect();
    let q: Vec<f64> = reliable.iter().map(|p| p.value).collect();
    Ok(LambdaEstimate {
        side,
        extrapolated: ols_intercept(&a, &q),
        smallest_reliable_alpha: last.alpha,
        smallest_reliable_value: last.value,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub beta: f64,
    /// `P(V <= beta | U <= alpha)`.
    pub lower: f64,
    /// `P(V >= 1 - beta | U >= 1 - alpha)`.
    pub upper: f64,
}

/// Empirical tail concentration curves of a pseudo-observation pair.
pub fn tail_concentration(u: &[f64], v: &[f64], alpha: f64, beta_grid: &[f64]) -> Result<Vec<ConcentrationPoint>> {
    check_level("alpha", alpha)?;
    if u.len() != v.len() {
        return Err(Error::Domain("pair columns have different lengths".into()));
    }
    if beta_grid.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
        return Err(Error::Domain("beta grid must lie inside (0, 1)".into()));
    }
    let lo: Vec<f64> = u.iter().zip(v).filter(|(&a, _)| a <= alpha).map(|(_, &b)| b).collect();
    let hi: Vec<f64> = u.iter().zip(v).filter(|(&a, _)| a >= 1.0 - alpha).map(|(_, &b)| b).collect();
    if lo.is_empty() || hi.is_empty() {
        return Err(Error::Resolution(format!("no observations beyond alpha = {alpha}")));
    }
    Ok(beta_grid
        .iter()
        .map(|&beta| ConcentrationPoint {
            beta,
            lower: lo.iter().filter(|&&b| b <= beta).count() as f64 / lo.len() as f64,
            upper: hi.iter().filter(|&&b| b >= 1.0 - beta).count() as f64 / hi.len() as f64,
        })
        .collect())
}
