use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bicop::{BivariateCopula, Family};
use crate::vine::{Edge, VineModel, VineStructure};

fn uniform_cols(l: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..l).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect()
}

fn discrete_cols(l: usize, m: usize, levels: u32, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..l).map(|_| (0..m).map(|_| rng.random_range(0..levels) as f64).collect()).collect()
}

/// Conditioning and joint counts from the defining probabilities, by
/// scanning every candidate threshold.
fn brute_counts(x: &[Vec<f64>], y: &[f64], side: Side, alpha: f64, beta: f64) -> (usize, usize) {
    let m = y.len();
    let w: Vec<f64> = dominance_counts_naive(x).iter().map(|&c| c as f64 / m as f64).collect();
    let quantile = |s: &[f64], p: f64| {
        s.iter()
            .copied()
            .filter(|&t| s.iter().filter(|&&v| v <= t).count() as f64 >= p * m as f64)
            .fold(f64::INFINITY, f64::min)
    };
    let mut cond = 0;
    let mut joint = 0;
    match side {
        Side::Lower => {
            let (t, q) = (quantile(&w, alpha), quantile(y, beta));
            for i in 0..m {
                if w[i] <= t {
                    cond += 1;
                    joint += usize::from(y[i] <= q);
                }
            }
        }
        Side::Upper => {
            let (t, q) = (quantile(&w, 1.0 - alpha), quantile(y, 1.0 - beta));
            for i in 0..m {
                if w[i] >= t {
                    cond += 1;
                    joint += usize::from(y[i] >= q);
                }
            }
        }
    }
    (cond, joint)
}

#[test]
fn fast_dominance_counts_match_pairwise_comparison() {
    for seed in 0..10 {
        for l in 1..=4 {
            let cont = uniform_cols(l, 300, seed);
            assert_eq!(dominance_counts(&cont), dominance_counts_naive(&cont), "l={l} seed={seed}");
            let ties = discrete_cols(l, 300, 7, seed + 100);
            assert_eq!(dominance_counts(&ties), dominance_counts_naive(&ties), "ties l={l} seed={seed}");
        }
    }
}

#[test]
fn analytic_kendall_values() {
    let ind = analytic_kendall_fn(Family::Independence, &[], 2).unwrap();
    assert!((ind.eval(0.25) - 0.25 * (1.0 + 4f64.ln())).abs() < 1e-14);
    assert!((ind.eval(0.5) - 0.5 * (1.0 + 2f64.ln())).abs() < 1e-14);
    let cl = analytic_kendall_fn(Family::Clayton, &[1.0], 2).unwrap();
    assert!((cl.eval(0.5) - 0.75).abs() < 1e-14);
    let cl2 = analytic_kendall_fn(Family::Clayton, &[2.0], 2).unwrap();
    assert!((cl2.eval(0.5) - 0.6875).abs() < 1e-14);
    let gu = analytic_kendall_fn(Family::Gumbel, &[2.0], 2).unwrap();
    let ind3 = analytic_kendall_fn(Family::Independence, &[], 3).unwrap();
    for k in [&ind, &cl, &cl2, &gu, &ind3] {
        assert_eq!(k.eval(1.0), 1.0);
        assert_eq!(k.eval(0.0), 0.0);
        for a in [0.01, 0.05, 0.3, 0.9] {
            assert!((k.eval(k.inverse(a)) - a).abs() < 1e-12);
        }
    }
    assert_eq!(ind.source(), KendallSource::AnalyticIndependence);
    assert_eq!(cl.source(), KendallSource::AnalyticArchimedean);
    assert!(matches!(analytic_kendall_fn(Family::Frank, &[2.0], 2), Err(crate::Error::Unsupported(_))));
    assert!(matches!(analytic_kendall_fn(Family::Clayton, &[2.0], 3), Err(crate::Error::Unsupported(_))));
}

#[test]
fn empirical_kendall_invariants_and_convergence() {
    let (u, v) = BivariateCopula::clayton(2.0).unwrap().sample(20_000, 3);
    let emp = empirical_kendall_fn(&[u, v]).unwrap();
    assert_eq!(emp.source(), KendallSource::Empirical);
    let oracle = analytic_kendall_fn(Family::Clayton, &[2.0], 2).unwrap();
    let mut prev = 0.0;
    let mut sup: f64 = 0.0;
    for i in 1..100 {
        let t = i as f64 / 100.0;
        let k = emp.eval(t);
        assert!(k >= t && k >= prev);
        prev = k;
        sup = sup.max((k - oracle.eval(t)).abs());
    }
    assert!(sup < 0.02, "sup distance {sup}");
    assert_eq!(emp.eval(1.0), 1.0);
    for a in [0.01, 0.05, 0.5] {
        let t = emp.inverse(a);
        assert!(emp.eval(t) >= a);
        assert!(emp.eval(t - 1e-12) < a);
    }

    let ind = empirical_kendall_fn(&uniform_cols(2, 20_000, 4)).unwrap();
    assert!((ind.eval(0.5) - 0.8466).abs() < 0.01);

    // Comonotone sample: W is the rank, so K is the uniform CDF up to 1/m.
    let u = uniform_cols(1, 1000, 5).remove(0);
    let co = empirical_kendall_fn(&[u.clone(), u]).unwrap();
    for t in [0.1, 0.5, 0.9] {
        assert!((co.eval(t) - t).abs() <= 1e-3 + 1e-12);
    }
}

#[test]
fn kendall_errors() {
    assert!(matches!(empirical_kendall_fn(&uniform_cols(1, 500, 1)), Err(crate::Error::Domain(_))));
    assert!(matches!(empirical_kendall_fn(&uniform_cols(2, 100, 1)), Err(crate::Error::Domain(_))));
    let mut bad = uniform_cols(2, 300, 1);
    bad[1].pop();
    assert!(empirical_kendall_fn(&bad).is_err());
}

#[test]
fn multivariate_pit_examples() {
    let r = uniform_cols(2, 20_000, 9);
    assert_eq!(multivariate_pit(&[2.0, 2.0], &r).unwrap(), 1.0);
    assert_eq!(multivariate_pit(&[-1.0, -1.0], &r).unwrap(), 0.0);
    assert!((multivariate_pit(&[0.5, 0.5], &r).unwrap() - 0.25).abs() < 0.01);
    assert!(multivariate_pit(&[0.5], &r).is_err());
}

#[test]
fn counting_estimator_equals_direct_definition() {
    for seed in 0..6 {
        let l = 1 + (seed as usize % 3);
        let (a, b) = BivariateCopula::clayton(2.0).unwrap().sample(600, seed);
        let mut x = uniform_cols(l, 600, seed + 50);
        x[0] = a;
        for (alpha, beta) in [(0.05, 0.05), (0.1, 0.2), (0.37, 0.11)] {
            for side in [Side::Lower, Side::Upper] {
                let r = match side {
                    Side::Lower => q_lower_kendall(&x, &b, alpha, beta).unwrap(),
                    Side::Upper => q_upper_kendall(&x, &b, alpha, beta).unwrap(),
                };
                let (c, j) = brute_counts(&x, &b, side, alpha, beta);
                assert_eq!((r.n_conditioning, r.n_joint), (c, j));
                assert_eq!(r.value, j as f64 / c as f64);
            }
        }
    }
}

#[test]
fn gumbel_max_component_upper_tail_matches_brute_force() {
    let (a, b) = BivariateCopula::gumbel(2.0).unwrap().sample(1500, 21);
    let y: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p.max(*q)).collect();
    let x = vec![a, b];
    let r = q_upper_kendall(&x, &y, 0.05, 0.05).unwrap();
    let (c, j) = brute_counts(&x, &y, Side::Upper, 0.05, 0.05);
    assert_eq!(r.value, j as f64 / c as f64);
    assert!(r.value > 0.5);
}

#[test]
fn q_measures_limiting_cases() {
    let x = uniform_cols(2, 50_000, 11);
    let y = uniform_cols(1, 50_000, 12).remove(0);
    let lo = q_lower_kendall(&x, &y, 0.05, 0.05).unwrap();
    assert!((lo.value - 0.05).abs() < 3.0 * lo.mc_stderr);
    assert!((lo.ratio_vs_independence - 1.0).abs() < 3.0 * lo.mc_stderr / 0.05);
    let up = q_upper_kendall(&x, &y, 0.05, 0.1).unwrap();
    assert!((up.value - 0.1).abs() < 3.0 * up.mc_stderr);
    assert!((up.remark_ratio - up.value / 0.9).abs() < 1e-15);

    // Comonotone conditioning variables and target.
    let u = uniform_cols(1, 20_000, 13).remove(0);
    let co = vec![u.clone(), u.clone()];
    assert!(q_lower_kendall(&co, &u, 0.05, 0.05).unwrap().value > 0.99);
    assert!(q_upper_kendall(&co, &u, 0.05, 0.05).unwrap().value > 0.99);
    let neg: Vec<f64> = u.iter().map(|v| 1.0 - v).collect();
    assert_eq!(q_upper_kendall(&co, &neg, 0.05, 0.05).unwrap().value, 0.0);

    assert!(matches!(q_lower_kendall(&x, &y, 0.5, 0.05), Err(crate::Error::Domain(_))));
    assert!(matches!(q_lower_kendall(&x, &y, 0.05, 0.0), Err(crate::Error::Domain(_))));
    let small = uniform_cols(2, 300, 1);
    assert!(matches!(q_lower_kendall(&small, &small[0], 0.05, 0.05), Err(crate::Error::Resolution(_))));
}

#[test]
fn lambda_kendall_limits() {
    let grid = [0.1, 0.08, 0.06, 0.04, 0.02, 0.01];
    let x = uniform_cols(2, 100_000, 31);
    let y = uniform_cols(1, 100_000, 32).remove(0);
    let s = CollapsedSample::new(&x, &y).unwrap();
    let ind = lambda_kendall(&s, Side::Lower, &grid).unwrap();
    for p in &ind.points {
        assert!((p.value - p.alpha).abs() < 4.0 * p.mc_stderr + 1e-3);
    }
    assert!(ind.extrapolated.abs() < 0.03);
    assert_eq!(ind.smallest_reliable_alpha, 0.01);

    let u = uniform_cols(1, 20_000, 33).remove(0);
    let co = CollapsedSample::new(&[u.clone(), u.clone()], &u).unwrap();
    let l = lambda_kendall(&co, Side::Upper, &grid).unwrap();
    assert!(l.points.iter().all(|p| p.value > 0.99));

    // (F_X(X), Y) Clayton by construction: X is an independent pair with
    // product W = K^-1(U), so F_X(X) = W and K(W) = U.
    let m = 200_000;
    let (cu, cv) = BivariateCopula::clayton(2.0).unwrap().sample(m, 34);
    let k = analytic_kendall_fn(Family::Independence, &[], 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut x1 = Vec::with_capacity(m);
    let mut x2 = Vec::with_capacity(m);
    for &a in &cu {
        let w = k.inverse(a);
        let s: f64 = rng.random();
        x1.push(w.powf(s));
        x2.push(w.powf(1.0 - s));
    }
    let c = CollapsedSample::new(&[x1, x2], &cv).unwrap();
    let lam = lambda_kendall(&c, Side::Lower, &grid).unwrap();
    assert!((lam.extrapolated - 0.5f64.sqrt()).abs() < 0.05, "{}", lam.extrapolated);

    assert!(lambda_kendall(&c, Side::Lower, &[0.01, 0.02]).is_err());
    assert!(lambda_kendall(&c, Side::Lower, &[0.2]).is_err());
    let tiny = CollapsedSample::new(&uniform_cols(2, 500, 1), &uniform_cols(1, 500, 2)[0]).unwrap();
    assert!(matches!(lambda_kendall(&tiny, Side::Lower, &[0.02, 0.01]), Err(crate::Error::Resolution(_))));
}

#[test]
fn tail_concentration_cases() {
    let beta = [0.01, 0.05, 0.1, 0.2, 0.4];
    let c = uniform_cols(2, 100_000, 41);
    for p in tail_concentration(&c[0], &c[1], 0.05, &beta).unwrap() {
        assert!((p.lower - p.beta).abs() < 0.02 && (p.upper - p.beta).abs() < 0.02);
    }
    let u = &c[0];
    for p in tail_concentration(u, u, 0.05, &beta).unwrap() {
        if p.beta >= 0.05 {
            assert_eq!((p.lower, p.upper), (1.0, 1.0));
        }
    }
    assert!(tail_concentration(u, u, 0.6, &beta).is_err());
}

fn price_demand_model(theta: f64) -> VineModel {
    let s = VineStructure {
        n_vars: 3,
        trees: vec![vec![Edge::new(0, 1, vec![]), Edge::new(0, 2, vec![])], vec![Edge::new(1, 2, vec![0])]],
    };
    let cops = vec![
        vec![BivariateCopula::gumbel(theta).unwrap(), BivariateCopula::independence()],
        vec![BivariateCopula::independence()],
    ];
    VineModel::from_parts(s, cops)
}

#[test]
fn scenario_patterns() {
    let p = ScenarioPattern::from_label("HLL", 0, &[1, 2, 3], 0.05, 0.05).unwrap();
    assert_eq!(p.label(), "HLL");
    assert_eq!(p.reflected().label(), "LHH");
    assert_eq!(p.reflected().target_direction, Direction::Low);
    assert_eq!(p.reflected().reflected(), p);
    assert!(ScenarioPattern::from_label("HX", 0, &[1, 2], 0.05, 0.05).is_err());
    assert!(ScenarioPattern::from_label("HL", 0, &[1, 2, 3], 0.05, 0.05).is_err());
    assert!(ScenarioPattern::from_label("HL", 1, &[1, 2], 0.05, 0.05).is_err());
    assert!(ScenarioPattern::from_label("", 0, &[], 0.05, 0.05).is_err());
    assert!(ScenarioPattern::from_label("H", 0, &[1], 0.5, 0.05).is_err());
    let json = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<ScenarioPattern>(&json).unwrap(), p);
}

#[test]
fn scenario_reflection_is_an_involution() {
    let model = price_demand_model(2.0);
    let cols = crate::vine::simulate(&model, 20_000, 5).unwrap();
    let p = ScenarioPattern::from_label("HL", 0, &[1, 2], 0.05, 0.05).unwrap();
    let direct = scenario_on_sample(&cols, &p).unwrap();
    let flipped: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().map(|v| -v).collect()).collect();
    let twice = scenario_on_sample(&flipped, &p.reflected()).unwrap();
    assert_eq!(direct, twice);
}

#[test]
fn scenario_values() {
    let s = price_demand_model(2.0).structure;
    let ind = VineModel::independence(s).unwrap();
    let p = ScenarioPattern::from_label("HH", 0, &[1, 2], 0.05, 0.05).unwrap();
    let r = scenario_tail_coefficient(&ind, &p, 100_000, 1).unwrap();
    assert!((r.ratio_vs_independence - 1.0).abs() < 3.0 * r.mc_stderr / 0.05);

    // Wind is independent of (price, demand): reflecting it leaves the
    // conditional law of price unchanged.
    let model = price_demand_model(2.0);
    let hh = scenario_tail_coefficient(&model, &p, 200_000, 2).unwrap();
    let hl = ScenarioPattern::from_label("HL", 0, &[1, 2], 0.05, 0.05).unwrap();
    let hl = scenario_tail_coefficient(&model, &hl, 200_000, 2).unwrap();
    let band = 2.0 * (hh.mc_stderr.powi(2) + hl.mc_stderr.powi(2)).sqrt();
    assert!((hh.value - hl.value).abs() < band, "{} vs {} band {band}", hh.value, hl.value);
    assert!(hh.value > 0.2);
    let lh = ScenarioPattern::from_label("LH", 0, &[1, 2], 0.05, 0.05).unwrap();
    assert!(scenario_tail_coefficient(&model, &lh, 200_000, 2).unwrap().value < 0.05);

    let out_of_range = ScenarioPattern::from_label("H", 0, &[5], 0.05, 0.05).unwrap();
    assert!(scenario_tail_coefficient(&model, &out_of_range, 10_000, 1).is_err());
}
