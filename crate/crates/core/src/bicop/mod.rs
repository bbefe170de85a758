//! Bivariate (pair) copulas.
//!
//! Every family is implemented in its unrotated, positively dependent base
//! form. Rotations act as coordinate reflections on top of the base:
//!
//! | rotation | copula                      | density            |
//! |----------|-----------------------------|--------------------|
//! | 0        | C(u, v)                     | c(u, v)            |
//! | 90       | v - C(1 - u, v)             | c(1 - u, v)        |
//! | 180      | u + v - 1 + C(1 - u, 1 - v) | c(1 - u, 1 - v)    |
//! | 270      | u - C(u, 1 - v)             | c(u, 1 - v)        |
//!
//! The 180 rotation is the survival copula.

mod bvn;
mod fit;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::quad::{gauss_legendre, integrate};
use crate::numeric::special::{norm_cdf, norm_quantile, StudentT};

pub use bvn::bvn_cdf;
pub use fit::{fit_mle, select_family, select_family_aic, Candidate, FitResult, SelectOptions, Selection};

/// Inputs to the h-functions, densities and inverses are clamped to
/// `[CLAMP, 1 - CLAMP]`.
pub(crate) const CLAMP: f64 = 1e-12;

#[inline]
fn clamp01(x: f64) -> f64 {
    x.clamp(CLAMP, 1.0 - CLAMP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Independence,
        Family::Gaussian,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
    ];

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "Independence",
            Family::Gaussian => "Gaussian",
            Family::StudentT => "StudentT",
            Family::Clayton => "Clayton",
            Family::Gumbel => "Gumbel",
            Family::Frank => "Frank",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown copula family '{s}'")))
    }
}

/// Counter-clockwise rotation in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270];

    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    /// Composition of two rotations.
    pub fn then(self, other: Rotation) -> Rotation {
        Rotation::try_from((self.degrees() + other.degrees()) % 360).expect("multiple of 90")
    }

    /// Whether the rotation flips the sign of concordance.
    pub fn is_negating(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;

    fn try_from(d: u16) -> std::result::Result<Self, String> {
        match d {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(format!("rotation must be 0, 90, 180 or 270, got {other}")),
        }
    }
}

impl From<Rotation> for u16 {
    fn from(r: Rotation) -> u16 {
        r.degrees()
    }
}

/// Which argument the h-function conditions on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    /// `dC/du`, the law of V given U = u.
    First,
    /// `dC/dv`, the law of U given V = v.
    Second,
}

/// A parametric bivariate copula.
///
/// Parameters: Gaussian `[rho]`, StudentT `[rho, nu]`, Clayton `[theta]`
/// with theta > 0, Gumbel `[theta]` with theta >= 1, Frank `[theta]` with
/// theta != 0, Independence `[]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateCopula {
    pub family: Family,
    pub rotation: Rotation,
    pub params: Vec<f64>,
}

impl BivariateCopula {
    pub fn new(family: Family, params: Vec<f64>, rotation: Rotation) -> Result<Self> {
        let c = Self { family, rotation, params };
        c.validate()?;
        Ok(c)
    }

    pub fn independence() -> Self {
        Self { family: Family::Independence, rotation: Rotation::R0, params: vec![] }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(Family::Gaussian, vec![rho], Rotation::R0)
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, vec![rho, nu], Rotation::R0)
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(Family::Clayton, vec![theta], Rotation::R0)
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(Family::Gumbel, vec![theta], Rotation::R0)
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(Family::Frank, vec![theta], Rotation::R0)
    }

    /// Rotates the copula further by `by`.
    pub fn rotated(&self, by: Rotation) -> Self {
        Self { rotation: self.rotation.then(by), ..self.clone() }
    }

    pub fn n_params(&self) -> usize {
        self.family.n_params()
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if p.len() != self.family.n_params() {
            return Err(Error::Domain(format!(
                "{} expects {} parameters, got {}",
                self.family,
                self.family.n_params(),
                p.len()
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{} parameters must be finite: {p:?}", self.family)));
        }
        let ok = match self.family {
            Family::Independence => true,
            Family::Gaussian => p[0].abs() < 1.0,
            Family::StudentT => p[0].abs() < 1.0 && p[1] > 2.0,
            Family::Clayton => p[0] > 0.0,
            Family::Gumbel => p[0] >= 1.0,
            Family::Frank => p[0] != 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{} parameters out of domain: {p:?}", self.family)))
        }
    }

    // ---- base (unrotated) family functions ----

    fn base_cdf(&self, a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        if a >= 1.0 {
            return b.min(1.0);
        }
        if b >= 1.0 {
            return a;
        }
        let p = &self.params;
        match self.family {
            Family::Independence => a * b,
            Family::Gaussian => bvn_cdf(norm_quantile(a), norm_quantile(b), p[0]),
            Family::StudentT => {
                // C(a, b) = integral over s < y of f(s) h(a | s); s = y - w / (1 - w)
                let (r, nu) = (p[0], p[1]);
                let t = StudentT::new(nu);
                let t1 = StudentT::new(nu + 1.0);
                let x = t.quantile(a);
                let y = t.quantile(b);
                integrate(
                    |w| {
                        if w >= 1.0 {
                            return 0.0;
                        }
                        let s = y - w / (1.0 - w);
                        t.pdf(s) * t_h_raw(x, s, r, nu, &t1) / ((1.0 - w) * (1.0 - w))
                    },
                    0.0,
                    1.0,
                    1e-13,
                )
            }
            Family::Clayton => {
                if a <= 0.0 || b <= 0.0 {
                    return 0.0;
                }
                let th = p[0];
                (-clayton_ln_s(a, b, th) / th).exp()
            }
            Family::Gumbel => {
                if a <= 0.0 || b <= 0.0 {
                    return 0.0;
                }
                if a >= 1.0 {
                    return b;
                }
                if b >= 1.0 {
                    return a;
                }
                (-gumbel_a(a, b, p[0])).exp()
            }
            Family::Frank => {
                let th = p[0];
                let num = (-th * a).exp_m1() * (-th * b).exp_m1();
                -(num / (-th).exp_m1()).ln_1p() / th
            }
        }
    }

    /// `d/db C0(a, b)`: law of the first coordinate given the second.
    fn base_h(&self, a: f64, b: f64) -> f64 {
        let a = clamp01(a);
        let b = clamp01(b);
        let p = &self.params;
        let h = match self.family {
            Family::Independence => a,
            Family::Gaussian => {
                let r = p[0];
                norm_cdf((norm_quantile(a) - r * norm_quantile(b)) / (1.0 - r * r).sqrt())
            }
            Family::StudentT => {
                let t = StudentT::new(p[1]);
                let t1 = StudentT::new(p[1] + 1.0);
                t_h_raw(t.quantile(a), t.quantile(b), p[0], p[1], &t1)
            }
            Family::Clayton => {
                let th = p[0];
                ((th + 1.0) * -b.ln() - (1.0 + 1.0 / th) * clayton_ln_s(a, b, th)).exp()
            }
            Family::Gumbel => {
                let th = p[0];
                let big_a = gumbel_a(a, b, th);
                let y = -b.ln();
                (-big_a).exp() / b * (y / big_a).powf(th - 1.0)
            }
            Family::Frank => {
                let th = p[0];
                let ea = (-th * a).exp_m1();
                let eb = (-th * b).exp_m1();
                let d = (-th).exp_m1();
                (-th * b).exp() * ea / (d + ea * eb)
            }
        };
        h.clamp(0.0, 1.0)
    }

    /// Solves `base_h(a, b) = w` for `a`.
    fn base_h_inv(&self, w: f64, b: f64) -> f64 {
        let w = clamp01(w);
        let b = clamp01(b);
        let p = &self.params;
        let a = match self.family {
            Family::Independence => w,
            Family::Gaussian => {
                let r = p[0];
                norm_cdf(norm_quantile(w) * (1.0 - r * r).sqrt() + r * norm_quantile(b))
            }
            Family::StudentT => {
                let (r, nu) = (p[0], p[1]);
                let t = StudentT::new(nu);
                let t1 = StudentT::new(nu + 1.0);
                let y = t.quantile(b);
                let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
                t.cdf(t1.quantile(w) * scale + r * y)
            }
            Family::Clayton => {
                let th = p[0];
                // a^{-th} = 1 + b^{-th} (w^{-th/(th+1)} - 1)
                let k = -th / (th + 1.0) * w.ln();
                let z = -th * b.ln() + k.exp_m1().ln();
                (-softplus(z) / th).exp()
            }
            Family::Frank => {
                let th = p[0];
                let d = (-th).exp_m1();
                let big_a = w * d / (w + (1.0 - w) * (-th * b).exp());
                -big_a.ln_1p() / th
            }
            Family::Gumbel => newton_bracketed(|a| self.base_h(a, b) - w, |a| self.base_pdf(a, b), w),
        };
        clamp01(a)
    }

    fn base_ln_pdf(&self, a: f64, b: f64) -> f64 {
        let a = clamp01(a);
        let b = clamp01(b);
        let p = &self.params;
        match self.family {
            Family::Independence => 0.0,
            Family::Gaussian => {
                let r = p[0];
                let (x, y) = (norm_quantile(a), norm_quantile(b));
                gaussian_ln_pdf(x, y, r)
            }
            Family::StudentT => {
                let t = StudentT::new(p[1]);
                let (x, y) = (t.quantile(a), t.quantile(b));
                t_ln_pdf(x, y, p[0], p[1], &t)
            }
            Family::Clayton => {
                let th = p[0];
                (1.0 + th).ln() - (th + 1.0) * (a.ln() + b.ln()) - (2.0 + 1.0 / th) * clayton_ln_s(a, b, th)
            }
            Family::Gumbel => {
                let th = p[0];
                let (x, y) = (-a.ln(), -b.ln());
                let big_a = gumbel_a(a, b, th);
                -big_a - a.ln() - b.ln() + (th - 1.0) * (x.ln() + y.ln()) + (1.0 - 2.0 * th) * big_a.ln()
                    + (big_a + th - 1.0).ln()
            }
            Family::Frank => {
                let th = p[0];
                if th.abs() < 1e-10 {
                    return 0.0;
                }
                let ea = (-th * a).exp_m1();
                let eb = (-th * b).exp_m1();
                let d = (-th).exp_m1();
                (th * -d).ln() - th * (a + b) - 2.0 * (d + ea * eb).abs().ln()
            }
        }
    }

    fn base_pdf(&self, a: f64, b: f64) -> f64 {
        self.base_ln_pdf(a, b).exp()
    }

    // ---- rotated public interface ----

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let c = match self.rotation {
            Rotation::R0 => self.base_cdf(u, v),
            Rotation::R90 => v - self.base_cdf(1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + self.base_cdf(1.0 - u, 1.0 - v),
            Rotation::R270 => u - self.base_cdf(u, 1.0 - v),
        };
        c.clamp(0.0, 1.0)
    }

    pub fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        match self.rotation {
            Rotation::R0 => self.base_ln_pdf(u, v),
            Rotation::R90 => self.base_ln_pdf(1.0 - u, v),
            Rotation::R180 => self.base_ln_pdf(1.0 - u, 1.0 - v),
            Rotation::R270 => self.base_ln_pdf(u, 1.0 - v),
        }
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        self.ln_pdf(u, v).exp()
    }

    /// Sum of log-densities over paired samples.
    pub fn loglik(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).map(|(&a, &b)| self.ln_pdf(a, b)).sum()
    }

    /// `dC/dv (u, v)`.
    pub fn h_given_v(&self, u: f64, v: f64) -> f64 {
        match self.rotation {
            Rotation::R0 => self.base_h(u, v),
            Rotation::R90 => 1.0 - self.base_h(1.0 - u, v),
            Rotation::R180 => 1.0 - self.base_h(1.0 - u, 1.0 - v),
            Rotation::R270 => self.base_h(u, 1.0 - v),
        }
    }

    /// `dC/du (u, v)`.
    pub fn h_given_u(&self, u: f64, v: f64) -> f64 {
        // Base families are exchangeable: d/da C0(a, b) = base_h(b, a).
        match self.rotation {
            Rotation::R0 => self.base_h(v, u),
            Rotation::R90 => self.base_h(v, 1.0 - u),
            Rotation::R180 => 1.0 - self.base_h(1.0 - v, 1.0 - u),
            Rotation::R270 => 1.0 - self.base_h(1.0 - v, u),
        }
    }

    pub fn hfunc(&self, u: f64, v: f64, margin: Margin) -> f64 {
        match margin {
            Margin::First => self.h_given_u(u, v),
            Margin::Second => self.h_given_v(u, v),
        }
    }

    /// Inverse of [`h_given_v`](Self::h_given_v) in `u`.
    pub fn h_given_v_inv(&self, w: f64, v: f64) -> f64 {
        let u = match self.rotation {
            Rotation::R0 => self.base_h_inv(w, v),
            Rotation::R90 => 1.0 - self.base_h_inv(1.0 - w, v),
            Rotation::R180 => 1.0 - self.base_h_inv(1.0 - w, 1.0 - v),
            Rotation::R270 => self.base_h_inv(w, 1.0 - v),
        };
        clamp01(u)
    }

    /// Inverse of [`h_given_u`](Self::h_given_u) in `v`.
    pub fn h_given_u_inv(&self, w: f64, u: f64) -> f64 {
        let v = match self.rotation {
            Rotation::R0 => self.base_h_inv(w, u),
            Rotation::R90 => self.base_h_inv(w, 1.0 - u),
            Rotation::R180 => 1.0 - self.base_h_inv(1.0 - w, 1.0 - u),
            Rotation::R270 => 1.0 - self.base_h_inv(1.0 - w, u),
        };
        clamp01(v)
    }

    /// Draws `n` pairs by conditional inversion.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = rng.sample(rand::distr::Open01);
            let w: f64 = rng.sample(rand::distr::Open01);
            u.push(a);
            v.push(self.h_given_u_inv(w, a));
        }
        (u, v)
    }

    pub fn sample(&self, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    // ---- dependence summaries ----

    fn base_tau(&self) -> f64 {
        let p = &self.params;
        match self.family {
            Family::Independence => 0.0,
            Family::Gaussian | Family::StudentT => 2.0 / PI * p[0].asin(),
            Family::Clayton => p[0] / (p[0] + 2.0),
            Family::Gumbel => 1.0 - 1.0 / p[0],
            Family::Frank => {
                let th = p[0];
                1.0 - 4.0 / th + 4.0 * debye(1, th) / th
            }
        }
    }

    /// Kendall's tau implied by the copula.
    pub fn tau(&self) -> f64 {
        let t = self.base_tau();
        if self.rotation.is_negating() {
            -t
        } else {
            t
        }
    }

    fn base_spearman(&self) -> f64 {
        let p = &self.params;
        match self.family {
            Family::Independence => 0.0,
            Family::Gaussian => 6.0 / PI * (p[0] / 2.0).asin(),
            Family::Frank => {
                let th = p[0];
                1.0 - 12.0 / th * (debye(1, th) - debye(2, th))
            }
            _ => {
                // rho_S = 12 * integral of C over the unit square - 3
                let nodes = gauss_legendre(64, 0.0, 1.0);
                let mut acc = 0.0;
                for &(x, wx) in &nodes {
                    for &(y, wy) in &nodes {
                        acc += wx * wy * self.base_cdf(x, y);
                    }
                }
                12.0 * acc - 3.0
            }
        }
    }

    /// Spearman's rho implied by the copula.
    pub fn spearman(&self) -> f64 {
        let r = self.base_spearman();
        if self.rotation.is_negating() {
            -r
        } else {
            r
        }
    }

    /// Base corner coefficients `(lower-lower, upper-upper, anti-diagonal)`.
    fn base_corners(&self) -> (f64, f64, f64) {
        let p = &self.params;
        match self.family {
            Family::Clayton => (2f64.powf(-1.0 / p[0]), 0.0, 0.0),
            Family::Gumbel => (0.0, 2.0 - 2f64.powf(1.0 / p[0]), 0.0),
            Family::StudentT => {
                let (r, nu) = (p[0], p[1]);
                let t1 = StudentT::new(nu + 1.0);
                let diag = 2.0 * t1.cdf(-((nu + 1.0) * (1.0 - r) / (1.0 + r)).sqrt());
                let anti = 2.0 * t1.cdf(-((nu + 1.0) * (1.0 + r) / (1.0 - r)).sqrt());
                (diag, diag, anti)
            }
            _ => (0.0, 0.0, 0.0),
        }
    }

    /// Lower tail dependence coefficient, `lim C(t,t)/t` as t -> 0.
    pub fn lower_tdc(&self) -> f64 {
        let (ll, uu, anti) = self.base_corners();
        match self.rotation {
            Rotation::R0 => ll,
            Rotation::R180 => uu,
            Rotation::R90 | Rotation::R270 => anti,
        }
    }

    /// Upper tail dependence coefficient, `lim (1 - 2t + C(t,t))/(1 - t)` as t -> 1.
    pub fn upper_tdc(&self) -> f64 {
        let (ll, uu, anti) = self.base_corners();
        match self.rotation {
            Rotation::R0 => uu,
            Rotation::R180 => ll,
            Rotation::R90 | Rotation::R270 => anti,
        }
    }
}

/// Kendall's tau implied by a copula.
pub fn tau_of(c: &BivariateCopula) -> f64 {
    c.tau()
}

/// Spearman's rho implied by a copula.
pub fn spearman_of(c: &BivariateCopula) -> f64 {
    c.spearman()
}

pub fn lower_tdc(c: &BivariateCopula) -> f64 {
    c.lower_tdc()
}

pub fn upper_tdc(c: &BivariateCopula) -> f64 {
    c.upper_tdc()
}

/// `ln(a^-th + b^-th - 1)` without overflow.
fn clayton_ln_s(a: f64, b: f64, th: f64) -> f64 {
    let la = -th * a.ln();
    let lb = -th * b.ln();
    let m = la.max(lb);
    m + ((la - m).exp() + (lb - m).exp() - (-m).exp()).ln()
}

/// Gumbel `A = ((-ln a)^th + (-ln b)^th)^(1/th)`.
fn gumbel_a(a: f64, b: f64, th: f64) -> f64 {
    let lx = (-a.ln()).ln() * th;
    let ly = (-b.ln()).ln() * th;
    let m = lx.max(ly);
    ((m + ((lx - m).exp() + (ly - m).exp()).ln()) / th).exp()
}

fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

fn gaussian_ln_pdf(x: f64, y: f64, r: f64) -> f64 {
    let one_m = 1.0 - r * r;
    -0.5 * one_m.ln() - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * one_m)
}

/// Conditional law of the first t-quantile given the second.
fn t_h_raw(x: f64, y: f64, r: f64, nu: f64, t1: &StudentT) -> f64 {
    let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
    t1.cdf((x - r * y) / scale)
}

pub(crate) fn t_ln_pdf(x: f64, y: f64, r: f64, nu: f64, t: &StudentT) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let one_m = 1.0 - r * r;
    let q = (x * x + y * y - 2.0 * r * x * y) / (nu * one_m);
    let joint = ln_gamma((nu + 2.0) / 2.0) - ln_gamma(nu / 2.0) - (nu * PI).ln() - 0.5 * one_m.ln()
        - (nu + 2.0) / 2.0 * q.ln_1p();
    joint - t.ln_pdf(x) - t.ln_pdf(y)
}

/// Debye function `D_k(x) = k / x^k * integral_0^x t^k / (e^t - 1) dt`.
fn debye(k: i32, x: f64) -> f64 {
    let kf = k as f64;
    let integral = integrate(
        |t: f64| if t == 0.0 { if k == 1 { 1.0 } else { 0.0 } } else { t.powi(k) / t.exp_m1() },
        0.0,
        x,
        1e-13,
    );
    kf / x.powi(k) * integral
}

/// Root of an increasing function on (0, 1) by Newton steps safeguarded
/// with bisection.
fn newton_bracketed<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(f: F, df: D, guess: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = guess.clamp(1e-6, 1.0 - 1e-6);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-15 || hi - lo < 1e-15 {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests;
