use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BivariateCopula, Family, Rotation, CLAMP};
use crate::error::{Error, Result};
use crate::numeric::optim::{bisect, brent_minimize};
use crate::numeric::special::{norm_quantile, StudentT};
use crate::stats::{kendall_independence_pvalue, kendall_tau};

const MIN_PAIRS: usize = 30;
const RHO_MAX: f64 = 0.999;
const CLAYTON_RANGE: (f64, f64) = (1e-4, 28.0);
const GUMBEL_RANGE: (f64, f64) = (1.0, 17.0);
const FRANK_RANGE: (f64, f64) = (-35.0, 35.0);
const NU_RANGE: (f64, f64) = (2.1, 30.0);
const NU_GRID: usize = 12;

/// A family together with the rotation it is fitted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Candidate {
    pub family: Family,
    pub rotation: Rotation,
}

impl Candidate {
    pub const fn new(family: Family, rotation: Rotation) -> Self {
        Self { family, rotation }
    }

    pub const fn base(family: Family) -> Self {
        Self { family, rotation: Rotation::R0 }
    }

    /// Independence, Gaussian, StudentT, Frank and all four rotations of
    /// Clayton and Gumbel.
    pub fn default_set() -> Vec<Candidate> {
        let mut v = vec![
            Candidate::base(Family::Independence),
            Candidate::base(Family::Gaussian),
            Candidate::base(Family::StudentT),
        ];
        for fam in [Family::Clayton, Family::Gumbel] {
            for rot in Rotation::ALL {
                v.push(Candidate::new(fam, rot));
            }
        }
        v.push(Candidate::base(Family::Frank));
        v
    }

    pub fn n_params(self) -> usize {
        self.family.n_params()
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rotation {
            Rotation::R0 => write!(f, "{}", self.family),
            r => write!(f, "{}{}", self.family, r.degrees()),
        }
    }
}

impl FromStr for Candidate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let family: Family = s[..split].parse()?;
        let rotation = if split == s.len() {
            Rotation::R0
        } else {
            let deg: u16 = s[split..]
                .parse()
                .map_err(|_| Error::Domain(format!("bad rotation in candidate '{s}'")))?;
            Rotation::try_from(deg).map_err(Error::Domain)?
        };
        Ok(Candidate { family, rotation })
    }
}

impl TryFrom<String> for Candidate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Candidate> for String {
    fn from(c: Candidate) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub copula: BivariateCopula,
    pub loglik: f64,
    pub aic: f64,
    pub n_obs: usize,
    /// The optimum sits on the edge of the admissible parameter range.
    pub at_boundary: bool,
}

impl FitResult {
    fn new(copula: BivariateCopula, loglik: f64, n_obs: usize, at_boundary: bool) -> Self {
        let aic = 2.0 * copula.n_params() as f64 - 2.0 * loglik;
        Self { copula, loglik, aic, n_obs, at_boundary }
    }

    pub fn candidate(&self) -> Candidate {
        Candidate::new(self.copula.family, self.copula.rotation)
    }
}

fn check_pairs(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::Domain(format!("pair lengths differ: {} vs {}", u.len(), v.len())));
    }
    if u.len() < MIN_PAIRS {
        return Err(Error::DegenerateInput(format!("need at least {MIN_PAIRS} pairs, got {}", u.len())));
    }
    if u.iter().chain(v).any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::Domain("pseudo-observations must lie strictly inside (0, 1)".into()));
    }
    Ok(())
}

/// Maps data into the coordinates of the unrotated family.
fn to_base(u: &[f64], v: &[f64], rot: Rotation) -> (Vec<f64>, Vec<f64>) {
    let flip = |x: &[f64], on: bool| -> Vec<f64> {
        x.iter().map(|&t| if on { 1.0 - t } else { t }.clamp(CLAMP, 1.0 - CLAMP)).collect()
    };
    let (fu, fv) = match rot {
        Rotation::R0 => (false, false),
        Rotation::R90 => (true, false),
        Rotation::R180 => (true, true),
        Rotation::R270 => (false, true),
    };
    (flip(u, fu), flip(v, fv))
}

/// Maximum-likelihood fit of one family in one rotation.
pub fn fit_mle(u: &[f64], v: &[f64], cand: Candidate) -> Result<FitResult> {
    check_pairs(u, v)?;
    let n = u.len();
    let rot = cand.rotation;
    let (a, b) = to_base(u, v, rot);
    let base = |family, params| BivariateCopula { family, rotation: Rotation::R0, params };
    let ll_base = |c: &BivariateCopula| -> f64 {
        let s: f64 = a.iter().zip(&b).map(|(&x, &y)| c.base_ln_pdf(x, y)).sum();
        if s.is_finite() {
            s
        } else {
            f64::NEG_INFINITY
        }
    };

    let (copula, loglik, at_boundary) = match cand.family {
        Family::Independence => (base(Family::Independence, vec![]), 0.0, false),
        Family::Gaussian => {
            let x: Vec<f64> = a.iter().map(|&t| norm_quantile(t)).collect();
            let y: Vec<f64> = b.iter().map(|&t| norm_quantile(t)).collect();
            let (rho, ll) = fit_gaussian(&x, &y);
            (base(Family::Gaussian, vec![rho]), ll, rho.abs() >= RHO_MAX - 1e-6)
        }
        Family::StudentT => {
            let (rho, nu, ll) = fit_student(&a, &b);
            let boundary = rho.abs() >= RHO_MAX - 1e-6
                || (nu - NU_RANGE.0).abs() < 1e-3
                || (nu - NU_RANGE.1).abs() < 1e-3;
            (base(Family::StudentT, vec![rho, nu]), ll, boundary)
        }
        Family::Clayton | Family::Gumbel => {
            let tau = kendall_tau(&a, &b);
            if !(tau > 0.0) {
                return Err(Error::FamilyInfeasible { family: cand.to_string(), tau });
            }
            let (lo, hi, init) = if cand.family == Family::Clayton {
                (CLAYTON_RANGE.0.ln(), CLAYTON_RANGE.1.ln(), (2.0 * tau / (1.0 - tau)).max(CLAYTON_RANGE.0).ln())
            } else {
                (GUMBEL_RANGE.0.ln(), GUMBEL_RANGE.1.ln(), (1.0 / (1.0 - tau)).ln())
            };
            let fam = cand.family;
            let obj = |z: f64| -ll_base(&base(fam, vec![z.exp().max(if fam == Family::Gumbel { 1.0 } else { 0.0 })]));
            let z = bracketed_then_full(&obj, init, 1.0, lo, hi);
            let theta = z.exp().max(if fam == Family::Gumbel { 1.0 } else { 0.0 });
            let c = base(fam, vec![theta]);
            let ll = ll_base(&c);
            (c, ll, z - lo < 1e-4 || hi - z < 1e-4)
        }
        Family::Frank => {
            let tau = kendall_tau(&a, &b);
            let init = frank_theta_from_tau(tau);
            let obj = |th: f64| -ll_base(&base(Family::Frank, vec![nonzero(th)]));
            let th = nonzero(bracketed_then_full(&obj, init, 3.0, FRANK_RANGE.0, FRANK_RANGE.1));
            let c = base(Family::Frank, vec![th]);
            let ll = ll_base(&c);
            (c, ll, FRANK_RANGE.1 - th.abs() < 1e-3)
        }
    };
    if !loglik.is_finite() {
        return Err(Error::Optimization {
            message: format!("{cand} log-likelihood is not finite at the optimum"),
            iterations: 0,
            last_iterate: copula.params.clone(),
        });
    }
    let copula = BivariateCopula { rotation: rot, ..copula };
    copula.validate()?;
    Ok(FitResult::new(copula, loglik, n, at_boundary))
}

fn nonzero(th: f64) -> f64 {
    if th.abs() < 1e-8 {
        1e-8_f64.copysign(if th == 0.0 { 1.0 } else { th })
    } else {
        th
    }
}

/// Minimizes on a bracket of half-width `half` around `init`; if the optimum
/// lands on the bracket edge the search is repeated over the full range.
fn bracketed_then_full<F: Fn(f64) -> f64>(f: &F, init: f64, half: f64, lo: f64, hi: f64) -> f64 {
    let a = (init - half).max(lo);
    let b = (init + half).min(hi);
    let (x, fx) = brent_minimize(f, a, b, 1e-8);
    let edge = 1e-4 * (b - a);
    let inner_edge = (x - a < edge && a > lo) || (b - x < edge && b < hi);
    if !inner_edge && fx.is_finite() {
        return x;
    }
    let (y, fy) = brent_minimize(f, lo, hi, 1e-8);
    if fy < fx || !fx.is_finite() {
        y
    } else {
        x
    }
}

fn frank_theta_from_tau(tau: f64) -> f64 {
    let tau = tau.clamp(-0.89, 0.89);
    if tau.abs() < 1e-4 {
        return 1e-3_f64.copysign(tau);
    }
    let g = |th: f64| BivariateCopula { family: Family::Frank, rotation: Rotation::R0, params: vec![th] }.base_tau() - tau;
    if tau > 0.0 {
        bisect(g, 1e-6, FRANK_RANGE.1, 1e-8)
    } else {
        bisect(g, FRANK_RANGE.0, -1e-6, 1e-8)
    }
}

fn gaussian_profile(sxx: f64, sxy: f64, n: f64, r: f64) -> f64 {
    let om = 1.0 - r * r;
    -0.5 * n * om.ln() - (r * r * sxx - 2.0 * r * sxy) / (2.0 * om)
}

/// Returns `(rho, loglik)` of the Gaussian copula on normal scores.
fn fit_gaussian(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sxx: f64 = x.iter().zip(y).map(|(a, b)| a * a + b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let zmax = RHO_MAX.atanh();
    let (z, _) = brent_minimize(|z| -gaussian_profile(sxx, sxy, n, z.tanh()), -zmax, zmax, 1e-10);
    let rho = z.tanh().clamp(-RHO_MAX, RHO_MAX);
    (rho, gaussian_profile(sxx, sxy, n, rho))
}

/// Student-t copula profile log-likelihood at fixed `nu`: `(rho, loglik)`.
fn student_profile(a: &[f64], b: &[f64], nu: f64) -> (f64, f64) {
    use statrs::function::gamma::ln_gamma;
    let t = StudentT::new(nu);
    let x: Vec<f64> = a.iter().map(|&p| t.quantile(p)).collect();
    let y: Vec<f64> = b.iter().map(|&p| t.quantile(p)).collect();
    let n = a.len() as f64;
    let marg: f64 = x.iter().chain(&y).map(|&q| t.ln_pdf(q)).sum();
    let konst = ln_gamma((nu + 2.0) / 2.0) - ln_gamma(nu / 2.0) - (nu * std::f64::consts::PI).ln();
    let ll = |r: f64| -> f64 {
        let om = 1.0 - r * r;
        let s: f64 = x
            .iter()
            .zip(&y)
            .map(|(&p, &q)| ((p * p + q * q - 2.0 * r * p * q) / (nu * om)).ln_1p())
            .sum();
        n * konst - 0.5 * n * om.ln() - (nu + 2.0) / 2.0 * s - marg
    };
    let zmax = RHO_MAX.atanh();
    let (z, _) = brent_minimize(|z| -ll(z.tanh()), -zmax, zmax, 1e-9);
    let rho = z.tanh().clamp(-RHO_MAX, RHO_MAX);
    (rho, ll(rho))
}

/// Profile likelihood over a log grid of `nu`, refined between the
/// neighbours of the best grid point.
fn fit_student(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (l0, l1) = (NU_RANGE.0.ln(), NU_RANGE.1.ln());
    let grid: Vec<f64> = (0..NU_GRID).map(|i| (l0 + (l1 - l0) * i as f64 / (NU_GRID - 1) as f64).exp()).collect();
    let profiles: Vec<(f64, f64)> = grid.iter().map(|&nu| student_profile(a, b, nu)).collect();
    let best = (0..NU_GRID)
        .max_by(|&i, &j| profiles[i].1.total_cmp(&profiles[j].1))
        .expect("non-empty grid");
    let lo = grid[best.saturating_sub(1)].ln();
    let hi = grid[(best + 1).min(NU_GRID - 1)].ln();
    let (lnu, _) = brent_minimize(|z| -student_profile(a, b, z.exp()).1, lo, hi, 1e-3);
    let nu = lnu.exp();
    let (rho, ll) = student_profile(a, b, nu);
    if ll >= profiles[best].1 {
        (rho, nu, ll)
    } else {
        (profiles[best].0, grid[best], profiles[best].1)
    }
}

#[derive(Debug, Clone)]
pub struct SelectOptions {
    pub candidates: Vec<Candidate>,
    /// When set, a Kendall tau test of independence at this level runs
    /// first; if it does not reject, Independence is returned without
    /// fitting the other candidates.
    pub independence_test_level: Option<f64>,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self { candidates: Candidate::default_set(), independence_test_level: None }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub best: FitResult,
    pub fits: Vec<FitResult>,
    /// Candidates that could not be fitted, with the reason.
    pub skipped: Vec<(Candidate, String)>,
    pub pretest_independent: bool,
}

fn canonical_key(c: Candidate) -> (usize, u16, usize) {
    let fam = Family::ALL.iter().position(|&f| f == c.family).unwrap_or(usize::MAX);
    (fam, c.rotation.degrees(), c.n_params())
}

/// Pure AIC selection over `candidates`.
pub fn select_family_aic(u: &[f64], v: &[f64], candidates: &[Candidate]) -> Result<FitResult> {
    let opts = SelectOptions { candidates: candidates.to_vec(), independence_test_level: None };
    select_family(u, v, &opts).map(|s| s.best)
}

/// AIC selection with optional independence pretest; ties go to the
/// earlier family in [`Family::ALL`], then the smaller rotation.
pub fn select_family(u: &[f64], v: &[f64], opts: &SelectOptions) -> Result<Selection> {
    if opts.candidates.is_empty() {
        return Err(Error::Selection("candidate set is empty".into()));
    }
    check_pairs(u, v)?;
    if let Some(level) = opts.independence_test_level {
        let tau = kendall_tau(u, v);
        if kendall_independence_pvalue(tau, u.len()) > level {
            let best = FitResult::new(BivariateCopula::independence(), 0.0, u.len(), false);
            return Ok(Selection { best: best.clone(), fits: vec![best], skipped: vec![], pretest_independent: true });
        }
    }
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for &cand in &opts.candidates {
        match fit_mle(u, v, cand) {
            Ok(f) => fits.push(f),
            Err(e) => skipped.push((cand, e.to_string())),
        }
    }
    let best = fits
        .iter()
        .min_by(|x, y| {
            x.aic
                .total_cmp(&y.aic)
                .then_with(|| canonical_key(x.candidate()).cmp(&canonical_key(y.candidate())))
        })
        .cloned()
        .ok_or_else(|| {
            let reasons: Vec<String> = skipped.iter().map(|(c, m)| format!("{c}: {m}")).collect();
            Error::Selection(format!("every candidate failed ({})", reasons.join("; ")))
        })?;
    Ok(Selection { best, fits, skipped, pretest_independent: false })
}
