use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::AnalysisConfig;
use super::global::{GlobalRun, HourFailure, HourlyAnalysisResult};
use super::rolling::RollingRun;
use crate::error::{Error, Result};
use crate::taildep::TailMeasureResult;

/// Note attached to every report: how the upper Kendall measure is normalized.
pub const UPPER_RATIO_NOTE: &str = "q_upper_kendall is P(Y >= F_Y^-1(1-beta) | F_X(X) >= t_U), which equals beta \
under independence; ratio = value/beta, remark_ratio = value/(1-beta) treats 1-beta as the independence level";

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata<'a> {
    pub study: &'a str,
    pub version: &'a str,
    pub config: &'a AnalysisConfig,
    pub hour_seeds: Vec<(u8, u64)>,
    pub warnings: Vec<String>,
    pub notes: Vec<&'a str>,
    pub failures: &'a [HourFailure],
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub const TAIL_HEADER: [&str; 12] =
    ["hour", "measure", "side", "pattern", "alpha", "beta", "value", "ratio", "remark_ratio", "stderr", "n_conditioning", "reliable"];

/// CSV fields for one tail measure in the order of [`TAIL_HEADER`].
pub fn tail_row(hour: u8, measure: &str, pattern: &str, r: &TailMeasureResult) -> Vec<String> {
    vec![
        hour.to_string(),
        measure.into(),
        r.side.to_string(),
        pattern.into(),
        r.alpha.to_string(),
        r.beta.to_string(),
        r.value.to_string(),
        r.ratio_vs_independence.to_string(),
        r.remark_ratio.to_string(),
        r.mc_stderr.to_string(),
        r.n_conditioning.to_string(),
        r.reliable.to_string(),
    ]
}

fn hour_warnings(r: &HourlyAnalysisResult) -> Vec<String> {
    r.marginals
        .iter()
        .flat_map(|m| m.warnings.iter().map(move |w| format!("hour {} {}: {w}", r.hour, m.variable)))
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `hour_HH.json` per hour, `tail.csv`, `dependence.csv` and
/// `run_metadata.json`. Returns the written paths.
pub fn write_global_bundle(dir: &Path, config: &AnalysisConfig, run: &GlobalRun) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for r in &run.results {
        let p = dir.join(format!("hour_{:02}.json", r.hour));
        write_json(&p, r)?;
        written.push(p);
    }

    let tail = dir.join("tail.csv");
    let mut w = csv_writer(&tail)?;
    w.write_record(TAIL_HEADER)?;
    for r in &run.results {
        for s in &r.scenarios {
            w.write_record(tail_row(r.hour, "scenario", &s.pattern, &s.result))?;
        }
        for l in &r.lambda {
            let pattern = l.conditioning.join("+");
            for p in &l.estimate.points {
                w.write_record(tail_row(r.hour, "q_kendall", &pattern, p))?;
            }
            let e = &l.estimate;
            let side = e.side.to_string();
            let v = e.extrapolated.to_string();
            let a = e.smallest_reliable_alpha.to_string();
            w.write_record([&r.hour.to_string(), "lambda_kendall_intercept", &side, &pattern, "0", "0", &v, "", "", "", "", "true"])?;
            let s = e.smallest_reliable_value.to_string();
            w.write_record([&r.hour.to_string(), "lambda_kendall_smallest_alpha", &side, &pattern, &a, &a, &s, "", "", "", "", "true"])?;
        }
    }
    finish(w, &tail)?;
    written.push(tail);

    let dep = dir.join("dependence.csv");
    let mut w = csv_writer(&dep)?;
    w.write_record(["hour", "measure", "a", "b", "alpha", "value", "stderr"])?;
    for r in &run.results {
        let h = r.hour.to_string();
        for s in &r.spearman {
            let e = &s.estimate;
            w.write_record([&h, "spearman", &s.a, &s.b, "", &e.value.to_string(), &e.stderr.to_string()])?;
        }
        for t in &r.pair_tdc {
            for p in &t.points {
                let a = p.t.to_string();
                w.write_record([&h, "tdc_lower", &t.a, &t.b, &a, &p.lower.to_string(), &p.lower_stderr.to_string()])?;
                w.write_record([&h, "tdc_upper", &t.a, &t.b, &a, &p.upper.to_string(), &p.upper_stderr.to_string()])?;
            }
        }
    }
    finish(w, &dep)?;
    written.push(dep);

    let meta = dir.join("run_metadata.json");
    write_json(
        &meta,
        &RunMetadata {
            study: "global",
            version: env!("CARGO_PKG_VERSION"),
            config,
            hour_seeds: run.results.iter().map(|r| (r.hour, r.mc_seed)).collect(),
            warnings: run.results.iter().flat_map(hour_warnings).collect(),
            notes: vec![UPPER_RATIO_NOTE],
            failures: &run.failures,
        },
    )?;
    written.push(meta);
    Ok(written)
}

/// Writes `rolling.csv` (one row per hour, window and pair) and
/// `rolling_metadata.json`. Returns the written paths.
pub fn write_rolling_bundle(dir: &Path, config: &AnalysisConfig, run: &RollingRun) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let series = dir.join("rolling.csv");
    let mut w = csv_writer(&series)?;
    w.write_record([
        "hour", "measure", "a", "b", "window", "window_start", "window_end", "value", "stderr", "full_sample", "flag",
    ])?;
    for r in &run.results {
        let h = r.hour.to_string();
        for (k, &(a, b)) in r.pairs.iter().enumerate() {
            let full = r.full_sample[k].value.to_string();
            for win in &r.windows {
                let (value, se, flag) = match win.values.get(k) {
                    Some(e) => (e.value.to_string(), e.stderr.to_string(), String::new()),
                    None => (String::new(), String::new(), "skipped".to_string()),
                };
                w.write_record([
                    &h,
                    "spearman",
                    &r.variables[a],
                    &r.variables[b],
                    &win.index.to_string(),
                    &win.start.to_string(),
                    &win.end.to_string(),
                    &value,
                    &se,
                    &full,
                    &flag,
                ])?;
            }
        }
    }
    finish(w, &series)?;
    let meta = dir.join("rolling_metadata.json");
    write_json(
        &meta,
        &RunMetadata {
            study: "rolling",
            version: env!("CARGO_PKG_VERSION"),
            config,
            hour_seeds: Vec::new(),
            warnings: Vec::new(),
            notes: vec![],
            failures: &run.failures,
        },
    )?;
    Ok(vec![series, meta])
}
