use chrono::NaiveDate;

use super::*;
use crate::data::slice_hour;
use crate::synth::{generate, GeneratorSpec};

fn panels(days: usize, hours: &[u8], seed: u64) -> Vec<crate::data::HourlyPanel> {
    let spec = GeneratorSpec::default_dependent(NaiveDate::from_ymd_opt(2016, 1, 1).unwrap(), days);
    let recs = generate(&spec, seed).unwrap();
    hours.iter().map(|&h| slice_hour(&recs, h).unwrap()).collect()
}

fn small_config(hours: Vec<u8>) -> AnalysisConfig {
    AnalysisConfig { hours, n_mc: 20_000, rolling_n_mc: 10_000, window_days: 150, step_days: 40, ..Default::default() }
}

#[test]
fn config_defaults_and_toml() {
    let d = AnalysisConfig::default();
    assert_eq!(d.hours.len(), 24);
    assert_eq!((d.window_days, d.step_days), (730, 1));
    assert_eq!(d.scenarios, DEFAULT_SCENARIOS);
    d.validate().unwrap();
    let back = AnalysisConfig::from_toml_str(&d.to_toml_string()).unwrap();
    assert_eq!(back, d);
    let c = AnalysisConfig::from_toml_str("hours = [8, 12]\nseed = 9\ncandidates = [\"Gaussian\", \"Clayton\"]").unwrap();
    assert_eq!((c.hours.clone(), c.seed, c.candidates.len()), (vec![8, 12], 9, 2));
    assert_eq!(c.alpha, 0.05);
    for bad in ["hours = [24]", "step_days = 0", "alpha = 0.5", "alpha_grid = [0.01, 0.02]", "unknown = 1", "scenarios = [\"HX\"]"] {
        assert!(matches!(AnalysisConfig::from_toml_str(bad), Err(crate::Error::Config(_))), "{bad}");
    }
}

#[test]
fn scenario_labels_for_trivariate_hours() {
    let c = AnalysisConfig::default();
    assert_eq!(c.scenario_labels(3), DEFAULT_SCENARIOS);
    assert_eq!(c.scenario_labels(2), ["HL", "HH", "LH"]);
}

#[test]
fn window_count_formula() {
    assert_eq!(window_count(732, 730, 1), 3);
    assert_eq!(window_count(730, 730, 1), 1);
    assert_eq!(window_count(729, 730, 1), 0);
    assert_eq!(window_count(1000, 730, 100), 3);
    assert_eq!(window_count(1000, 730, 0), 0);
}

#[test]
fn global_run_layout_and_failures() {
    let ps = panels(400, &[3, 12], 1);
    let cfg = small_config(vec![3, 12, 20]);
    let run = run_global(&ps, &cfg).unwrap();
    assert_eq!(run.results.len(), 2);
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].hour, 20);
    let night = &run.results[0];
    assert_eq!((night.hour, night.kind, night.variables.len()), (3, PanelKind::Trivariate, 3));
    assert_eq!(night.scenarios.iter().map(|s| s.pattern.as_str()).collect::<Vec<_>>(), ["HL", "HH", "LH"]);
    assert_eq!(night.spearman.len(), 3);
    let day = &run.results[1];
    assert_eq!((day.kind, day.vine.n_vars(), day.spearman.len(), day.scenarios.len()), (PanelKind::Quadrivariate, 4, 6, 5));
    assert_eq!(day.lambda.len(), 2);
    assert_eq!(day.n_obs, 400 - 7);
    // Price rises with demand in the generator.
    assert!(day.spearman[0].estimate.value > 0.2);

    let empty = run_global(&ps, &small_config(vec![])).unwrap();
    assert!(empty.results.is_empty() && empty.failures.is_empty());
}

#[test]
fn bundles_are_deterministic() {
    let ps = panels(300, &[3], 2);
    let cfg = small_config(vec![3]);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let run = run_global(&ps, &cfg).unwrap();
        let rolling = run_rolling(&ps, &cfg).unwrap();
        let mut written = write_global_bundle(d.path(), &cfg, &run).unwrap();
        written.extend(write_rolling_bundle(d.path(), &cfg, &rolling).unwrap());
        files.push(written);
    }
    assert_eq!(files[0].len(), 6);
    for (a, b) in files[0].iter().zip(&files[1]) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{a:?}");
    }
    let tail = std::fs::read_to_string(dirs[0].path().join("tail.csv")).unwrap();
    assert!(tail.starts_with("hour,measure,side,pattern,alpha,beta,value,ratio,remark_ratio,stderr,n_conditioning,reliable"));
    assert!(tail.contains("3,scenario,upper,HL,0.05,0.05,"));
}

#[test]
fn rolling_windows() {
    let ps = panels(300, &[3], 3);
    let cfg = small_config(vec![3]);
    let run = run_rolling(&ps, &cfg).unwrap();
    let r = &run.results[0];
    assert_eq!(r.windows.len(), window_count(300, 150, 40));
    assert_eq!(r.pairs, [(0, 1), (0, 2), (1, 2)]);
    for (k, w) in r.windows.iter().enumerate() {
        assert_eq!(w.index, k);
        assert_eq!(w.start, ps[0].dates[k * 40]);
        assert_eq!((w.end - w.start).num_days(), 149);
        assert_eq!(w.values.len(), 3);
    }
    let too_short = AnalysisConfig { window_days: 290, step_days: 20, ..cfg };
    let run = run_rolling(&ps, &too_short).unwrap();
    assert!(run.results.is_empty());
    assert_eq!(run.failures[0].code, "domain");
}
