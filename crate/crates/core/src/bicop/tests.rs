use super::*;
use crate::numeric::quad::gauss_legendre;
use crate::stats::kendall_tau;

fn reference_copulas() -> Vec<BivariateCopula> {
    let mut v = vec![
        BivariateCopula::independence(),
        BivariateCopula::gaussian(0.5).unwrap(),
        BivariateCopula::gaussian(-0.7).unwrap(),
        BivariateCopula::student_t(0.4, 5.0).unwrap(),
        BivariateCopula::student_t(-0.6, 3.0).unwrap(),
        BivariateCopula::frank(5.0).unwrap(),
        BivariateCopula::frank(-3.0).unwrap(),
    ];
    for rot in Rotation::ALL {
        v.push(BivariateCopula::clayton(2.0).unwrap().rotated(rot));
        v.push(BivariateCopula::gumbel(2.0).unwrap().rotated(rot));
    }
    v
}

fn grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

#[test]
fn closed_form_spot_values() {
    let ind = BivariateCopula::independence();
    assert_eq!(ind.cdf(0.5, 0.5), 0.25);
    assert_eq!(ind.pdf(0.3, 0.8), 1.0);
    assert_eq!(ind.h_given_v(0.3, 0.8), 0.3);
    let cl = BivariateCopula::clayton(2.0).unwrap();
    assert!((cl.cdf(0.5, 0.5) - 7f64.powf(-0.5)).abs() < 1e-14);
    let g = BivariateCopula::gaussian(0.5).unwrap();
    assert!((g.pdf(0.5, 0.5) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!((g.h_given_v(0.5, 0.5) - 0.5).abs() < 1e-14);
    let g0 = BivariateCopula::gaussian(0.0).unwrap();
    for &(u, v) in &[(0.1, 0.7), (0.45, 0.2), (0.9, 0.95)] {
        assert!((g0.cdf(u, v) - u * v).abs() < 1e-12);
    }
}

#[test]
fn frechet_bounds_hold() {
    for c in reference_copulas() {
        for &u in &grid(15) {
            for &v in &grid(15) {
                let x = c.cdf(u, v);
                let lo = (u + v - 1.0).max(0.0);
                let hi = u.min(v);
                assert!(x >= lo - 1e-12 && x <= hi + 1e-12, "{c:?} at ({u},{v}): {x}");
            }
        }
    }
}

#[test]
fn h_functions_match_finite_differences() {
    let d = 1e-5;
    for c in reference_copulas() {
        for &u in &grid(20) {
            for &v in &grid(20) {
                let fd2 = (c.cdf(u, v + d) - c.cdf(u, v - d)) / (2.0 * d);
                let fd1 = (c.cdf(u + d, v) - c.cdf(u - d, v)) / (2.0 * d);
                assert!((fd2 - c.hfunc(u, v, Margin::Second)).abs() < 1e-4, "{c:?} h2 at ({u},{v})");
                assert!((fd1 - c.hfunc(u, v, Margin::First)).abs() < 1e-4, "{c:?} h1 at ({u},{v})");
            }
        }
    }
}

#[test]
fn h_inverses_invert() {
    for c in reference_copulas() {
        for &w in &grid(19) {
            for &x in &grid(19) {
                let u = c.h_given_v_inv(w, x);
                assert!((c.h_given_v(u, x) - w).abs() < 1e-9, "{c:?} inv h2 w={w} v={x}");
                let v = c.h_given_u_inv(w, x);
                assert!((c.h_given_u(x, v) - w).abs() < 1e-9, "{c:?} inv h1 w={w} u={x}");
            }
        }
    }
}

#[test]
fn h_is_increasing_in_free_argument() {
    for c in reference_copulas() {
        for &v in &grid(9) {
            let hs: Vec<f64> = grid(50).iter().map(|&u| c.h_given_v(u, v)).collect();
            assert!(hs.windows(2).all(|w| w[1] >= w[0]), "{c:?}");
        }
    }
}

#[test]
fn density_matches_mixed_difference_of_cdf() {
    let d = 1e-4;
    for c in reference_copulas() {
        for &u in &grid(6) {
            for &v in &grid(6) {
                let mixed = (c.cdf(u + d, v + d) - c.cdf(u + d, v - d) - c.cdf(u - d, v + d) + c.cdf(u - d, v - d))
                    / (4.0 * d * d);
                let p = c.pdf(u, v);
                assert!((mixed - p).abs() < 1e-3 * p.max(1.0), "{c:?} at ({u},{v}): {mixed} vs {p}");
            }
        }
    }
}

#[test]
fn clayton_density_integrates_to_square_mass() {
    let c = BivariateCopula::clayton(2.0).unwrap();
    let (a, b) = (0.01, 0.99);
    let nodes = gauss_legendre(200, a, b);
    let mut acc = 0.0;
    for &(x, wx) in &nodes {
        for &(y, wy) in &nodes {
            acc += wx * wy * c.pdf(x, y);
        }
    }
    let mass = c.cdf(b, b) - c.cdf(a, b) - c.cdf(b, a) + c.cdf(a, a);
    assert!((acc - mass).abs() < 1e-3, "{acc} vs {mass}");
}

#[test]
fn rotation_algebra() {
    for c in reference_copulas() {
        let twice = c.rotated(Rotation::R180).rotated(Rotation::R180);
        for &u in &grid(7) {
            for &v in &grid(7) {
                assert!((twice.cdf(u, v) - c.cdf(u, v)).abs() < 1e-12);
            }
        }
    }
    let c = BivariateCopula::gumbel(2.5).unwrap();
    let s = c.rotated(Rotation::R180);
    for &u in &grid(7) {
        for &v in &grid(7) {
            let expected = u + v - 1.0 + c.cdf(1.0 - u, 1.0 - v);
            assert!((s.cdf(u, v) - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn dependence_measures() {
    let g = BivariateCopula::gaussian(0.5).unwrap();
    assert!((g.tau() - 1.0 / 3.0).abs() < 1e-12);
    assert!((g.spearman() - 0.482_584_712_8).abs() < 1e-6);
    assert!((BivariateCopula::gumbel(2.0).unwrap().tau() - 0.5).abs() < 1e-14);
    assert!((BivariateCopula::clayton(2.0).unwrap().tau() - 0.5).abs() < 1e-14);
    let ind = BivariateCopula::independence();
    assert_eq!((ind.tau(), ind.spearman()), (0.0, 0.0));
    assert!((BivariateCopula::clayton(2.0).unwrap().rotated(Rotation::R90).tau() + 0.5).abs() < 1e-14);
}

#[test]
fn frank_tau_and_spearman_match_quadrature_of_cdf() {
    for th in [-4.0, 2.0, 8.0] {
        let c = BivariateCopula::frank(th).unwrap();
        let nodes = gauss_legendre(80, 0.0, 1.0);
        let mut int_c = 0.0;
        let mut int_hh = 0.0;
        for &(x, wx) in &nodes {
            for &(y, wy) in &nodes {
                int_c += wx * wy * c.cdf(x, y);
                int_hh += wx * wy * c.h_given_u(x, y) * c.h_given_v(x, y);
            }
        }
        assert!((c.spearman() - (12.0 * int_c - 3.0)).abs() < 1e-6, "theta {th}");
        assert!((c.tau() - (1.0 - 4.0 * int_hh)).abs() < 1e-5, "theta {th}");
    }
}

#[test]
fn numerical_spearman_for_clayton_and_t() {
    // Student t rank correlation equals the Gaussian one for the same rho.
    let t = BivariateCopula::student_t(0.5, 4.0).unwrap();
    let g = BivariateCopula::gaussian(0.5).unwrap();
    assert!((t.spearman() - g.spearman()).abs() < 0.02);
    let c = BivariateCopula::clayton(2.0).unwrap();
    assert!((c.spearman() - 0.6822).abs() < 1e-3);
}

#[test]
fn tail_coefficients_match_numerical_limits() {
    // Tail-independent corners decay like a power of t, so they are probed
    // much deeper than the tail-dependent ones.
    for c in reference_copulas() {
        let survival = c.rotated(Rotation::R180);
        for (lambda, corner) in [(c.lower_tdc(), &c), (c.upper_tdc(), &survival)] {
            let t = if lambda > 0.0 { 1e-4 } else { 1e-8 };
            let ratio = corner.cdf(t, t) / t;
            assert!((ratio - lambda).abs() < 2e-2, "{c:?}: {ratio} vs {lambda}");
        }
    }
    let c = BivariateCopula::clayton(2.0).unwrap();
    assert!((c.lower_tdc() - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(c.upper_tdc(), 0.0);
    let g = BivariateCopula::gumbel(2.0).unwrap();
    assert!((g.upper_tdc() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    let n = BivariateCopula::gaussian(0.9).unwrap();
    assert_eq!((n.lower_tdc(), n.upper_tdc()), (0.0, 0.0));
}

#[test]
fn sampling_is_deterministic_and_tau_consistent() {
    let c = BivariateCopula::clayton(2.0).unwrap();
    let (u1, v1) = c.sample(100_000, 9);
    let (u2, v2) = c.sample(100_000, 9);
    assert_eq!(u1, u2);
    assert_eq!(v1, v2);
    assert!((kendall_tau(&u1, &v1) - 0.5).abs() < 0.01);
    let (u, v) = BivariateCopula::independence().sample(100_000, 3);
    assert!(kendall_tau(&u, &v).abs() < 0.01);
}

#[test]
fn serialization_round_trips() {
    let c = BivariateCopula::new(Family::StudentT, vec![0.123_456_789_012_345_67, 4.1], Rotation::R0).unwrap();
    let s = serde_json::to_string(&c).unwrap();
    assert!(s.contains("\"rotation\":0"));
    let back: BivariateCopula = serde_json::from_str(&s).unwrap();
    assert_eq!(back, c);
    let r = BivariateCopula::clayton(1.5).unwrap().rotated(Rotation::R270);
    let back: BivariateCopula = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert!(serde_json::from_str::<BivariateCopula>(r#"{"family":"Clayton","rotation":45,"params":[1.0]}"#).is_err());
}

#[test]
fn domain_checks() {
    assert!(BivariateCopula::clayton(0.0).is_err());
    assert!(BivariateCopula::gumbel(0.9).is_err());
    assert!(BivariateCopula::frank(0.0).is_err());
    assert!(BivariateCopula::gaussian(1.0).is_err());
    assert!(BivariateCopula::student_t(0.2, 2.0).is_err());
    assert!(BivariateCopula::new(Family::Gaussian, vec![], Rotation::R0).is_err());
}

#[test]
fn candidate_labels() {
    let set = Candidate::default_set();
    assert_eq!(set.len(), 12);
    for c in &set {
        assert_eq!(c.to_string().parse::<Candidate>().unwrap(), *c);
    }
    assert_eq!("Clayton90".parse::<Candidate>().unwrap(), Candidate::new(Family::Clayton, Rotation::R90));
}

#[test]
fn fit_recovers_parameters() {
    let (u, v) = BivariateCopula::clayton(2.0).unwrap().sample(5000, 1);
    let f = fit_mle(&u, &v, Candidate::base(Family::Clayton)).unwrap();
    assert!((1.8..=2.2).contains(&f.copula.params[0]), "{:?}", f.copula);
    assert!((f.aic - (2.0 - 2.0 * f.loglik)).abs() < 1e-9);

    let (u, v) = BivariateCopula::independence().sample(5000, 2);
    let f = fit_mle(&u, &v, Candidate::base(Family::Gaussian)).unwrap();
    assert!(f.copula.params[0].abs() < 0.05);

    for (c, tol) in [
        (BivariateCopula::gumbel(1.8).unwrap().rotated(Rotation::R90), 0.1),
        (BivariateCopula::frank(-4.0).unwrap(), 0.3),
        (BivariateCopula::gaussian(0.6).unwrap(), 0.03),
    ] {
        let (u, v) = c.sample(5000, 5);
        let f = fit_mle(&u, &v, Candidate::new(c.family, c.rotation)).unwrap();
        assert!((f.copula.params[0] - c.params[0]).abs() < tol, "{c:?} -> {:?}", f.copula);
    }

    let (u, v) = BivariateCopula::student_t(0.5, 4.0).unwrap().sample(5000, 7);
    let f = fit_mle(&u, &v, Candidate::base(Family::StudentT)).unwrap();
    assert!((f.copula.params[0] - 0.5).abs() < 0.05);
    assert!((2.5..=7.0).contains(&f.copula.params[1]), "{:?}", f.copula);
}

#[test]
fn infeasible_and_boundary_cases() {
    let (u, v) = BivariateCopula::clayton(2.0).unwrap().rotated(Rotation::R90).sample(500, 4);
    assert!(matches!(
        fit_mle(&u, &v, Candidate::base(Family::Clayton)),
        Err(Error::FamilyInfeasible { .. })
    ));
    let x: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
    let f = fit_mle(&x, &x, Candidate::base(Family::Gaussian)).unwrap();
    assert!(f.at_boundary);
    assert!(fit_mle(&x[..10], &x[..10], Candidate::base(Family::Gaussian)).is_err());
}

#[test]
fn selection_prefers_generating_family() {
    let cands = [
        Candidate::base(Family::Gaussian),
        Candidate::base(Family::Clayton),
        Candidate::base(Family::Gumbel),
    ];
    let (u, v) = BivariateCopula::clayton(2.0).unwrap().sample(1000, 11);
    let best = select_family_aic(&u, &v, &cands).unwrap();
    assert_eq!(best.copula.family, Family::Clayton);

    let (u, v) = BivariateCopula::gumbel(2.0).unwrap().rotated(Rotation::R270).sample(1000, 12);
    let sel = select_family(&u, &v, &SelectOptions::default()).unwrap();
    assert_eq!(sel.best.candidate(), Candidate::new(Family::Gumbel, Rotation::R270));
    assert!(!sel.skipped.is_empty());

    let (u, v) = BivariateCopula::independence().sample(30, 13);
    let a = select_family(&u, &v, &SelectOptions::default()).unwrap();
    let b = select_family(&u, &v, &SelectOptions::default()).unwrap();
    assert_eq!(a.best, b.best);
    assert!(select_family_aic(&u, &v, &[]).is_err());
}
