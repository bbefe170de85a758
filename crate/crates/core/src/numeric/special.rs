//! Gaussian and Student t distribution functions.
//!
//! Accuracy contract: `norm_quantile` follows Wichura's AS241 rational
//! approximation (relative error below 1e-15 over the open unit interval);
//! `StudentT::quantile` polishes the incomplete-beta inversion with Newton
//! steps so that `|cdf(quantile(p)) - p| < 1e-12` for p in [1e-12, 1 - 1e-12].

use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Standard normal quantile (AS241, PPND16).
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((r * 2509.080_928_730_122_7 + 33_430.575_583_588_13) * r
            + 67_265.770_927_008_7)
            * r
            + 45_921.953_931_549_87)
            * r
            + 13_731.693_765_509_461)
            * r
            + 1_971.590_950_306_551_4)
            * r
            + 133.141_667_891_784_38)
            * r
            + 3.387_132_872_796_366_5;
        let den = ((((((r * 5_226.495_278_852_546 + 28_729.085_735_721_943) * r
            + 39_307.895_800_092_71)
            * r
            + 21_213.794_301_586_597)
            * r
            + 5_394.196_021_424_751)
            * r
            + 687.187_007_492_057_9)
            * r
            + 42.313_330_701_600_91)
            * r
            + 1.0;
        return q * num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((r * 7.745_450_142_783_414e-4 + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_545)
            * r
            + 1.423_437_110_749_683_5;
        let den = ((((((r * 1.050_750_071_644_416_9e-9 + 5.475_938_084_995_345e-4) * r
            + 0.015_198_666_563_616_457)
            * r
            + 0.148_103_976_427_480_08)
            * r
            + 0.689_767_334_985_1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((r * 2.010_334_399_292_288e-7 + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = ((((((r * 2.044_263_103_389_939_7e-15 + 1.421_511_758_316_446e-7) * r
            + 1.846_318_317_510_054_8e-5)
            * r
            + 7.868_691_311_456_133e-4)
            * r
            + 0.014_875_361_290_850_615)
            * r
            + 0.136_929_880_922_735_8)
            * r
            + 0.599_832_206_555_888)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard Student t distribution with `nu` degrees of freedom.
#[derive(Debug, Clone)]
pub struct StudentT {
    nu: f64,
    dist: StudentsT,
}

impl StudentT {
    pub fn new(nu: f64) -> Self {
        let dist = StudentsT::new(0.0, 1.0, nu).expect("degrees of freedom must be positive");
        Self { nu, dist }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.dist.pdf(x)
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.dist.ln_pdf(x)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        let mut x = self.dist.inverse_cdf(p);
        if !x.is_finite() {
            return x;
        }
        // Newton polish; keep the iterate only while the residual shrinks.
        let mut err = self.cdf(x) - p;
        for _ in 0..4 {
            let d = self.pdf(x);
            if d <= 0.0 || err == 0.0 {
                break;
            }
            let cand = x - err / d;
            let cand_err = self.cdf(cand) - p;
            if cand_err.abs() < err.abs() {
                x = cand;
                err = cand_err;
            } else {
                break;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = norm_quantile(p);
            assert!((norm_cdf(x) - p).abs() < 1e-14, "p={p}");
        }
        for &p in &[1e-300, 1e-100, 1e-20, 1e-10, 1e-5] {
            let x = norm_quantile(p);
            assert!(((norm_cdf(x) - p) / p).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn normal_reference_values() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(1.96) - 0.975_002_104_851_780_1).abs() < 1e-15);
        assert!((norm_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
    }

    #[test]
    fn student_quantile_contract() {
        for &nu in &[2.1, 3.0, 4.5, 10.0, 30.0] {
            let t = StudentT::new(nu);
            for &p in &[1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-8] {
                let x = t.quantile(p);
                assert!((t.cdf(x) - p).abs() < 1e-12, "nu={nu} p={p}");
            }
        }
    }
}
