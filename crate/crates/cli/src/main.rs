mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::json;

use args::{Cli, Command, Common, InputArg};
use elecvine::data::{fix_clock_changes, load_csv, slice_hour, write_records_csv, ColumnSchema, HourlyPanel, VARIABLES};
use elecvine::pipeline::{
    fit_hour, run_global, run_rolling, tail_row, write_global_bundle, write_rolling_bundle, AnalysisConfig,
    MarginalSummary, TAIL_HEADER,
};
use elecvine::seed::{derive_seed, stream};
use elecvine::synth::{generate, GeneratorSpec};
use elecvine::taildep::{scenario_tail_coefficient, ScenarioPattern};
use elecvine::vine::{simulate, VineModel};

/// Refusal to overwrite an existing output without `--force`.
#[derive(Debug)]
struct OutputExists(PathBuf);

impl std::fmt::Display for OutputExists {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} exists; pass --force to overwrite", self.0.display())
    }
}

impl std::error::Error for OutputExists {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(json!({ "code": "usage", "message": e.render().to_string().trim_end() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(error_json(&e));
            ExitCode::from(1)
        }
    }
}

fn report(v: serde_json::Value) {
    eprintln!("{v}");
}

fn error_json(e: &anyhow::Error) -> serde_json::Value {
    let message = format!("{e:#}");
    if let Some(lib) = e.chain().find_map(|c| c.downcast_ref::<elecvine::Error>()) {
        let mut v = json!({ "code": lib.code(), "message": message });
        if let Some(loc) = lib.location() {
            v["location"] = json!(loc);
        }
        return v;
    }
    if let Some(OutputExists(p)) = e.downcast_ref::<OutputExists>() {
        return json!({ "code": "output_exists", "message": message, "location": p.display().to_string() });
    }
    if e.chain().any(|c| c.is::<std::io::Error>()) {
        return json!({ "code": "io", "message": message });
    }
    json!({ "code": "error", "message": message })
}

fn run(cli: Cli) -> Result<()> {
    let common = cli.common;
    if let Some(n) = common.jobs {
        if n == 0 {
            bail!(elecvine::Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let mut config = base_config(&common)?;
    match cli.command {
        Command::Ingest { input, schema } => ingest(&common, &input, schema.as_deref()),
        Command::FitMarginals { input, hour } => {
            let panel = load_panel(&common, &input, hour)?;
            let model = fit_hour(&panel, &config)?;
            let summaries: Vec<MarginalSummary> = model
                .marginals
                .iter()
                .zip(&panel.variable_names)
                .map(|(m, name)| MarginalSummary {
                    variable: name.clone(),
                    params: m.params.clone(),
                    loglik: m.loglik,
                    converged: m.diagnostics.converged,
                    warnings: m.diagnostics.warnings.clone(),
                })
                .collect();
            write_json(&common, &format!("marginals_h{hour:02}.json"), &summaries)
        }
        Command::FitVine { input, hour } => {
            let panel = load_panel(&common, &input, hour)?;
            let model = fit_hour(&panel, &config)?;
            write_json(&common, &format!("vine_h{hour:02}.json"), &model.vine)
        }
        Command::Tail { input, hour, alpha, beta, pattern, vine, n_mc } => {
            override_opt(&mut config.alpha, alpha);
            override_opt(&mut config.beta, beta);
            override_opt(&mut config.n_mc, n_mc);
            config.validate()?;
            tail(&common, &config, &input, hour, &pattern, vine.as_deref())
        }
        Command::Scenarios { input, hours, alpha, beta, n_mc } => {
            override_opt(&mut config.hours, hours);
            override_opt(&mut config.alpha, alpha);
            override_opt(&mut config.beta, beta);
            override_opt(&mut config.n_mc, n_mc);
            config.validate()?;
            let panels = load_panels(&common, &input, &config.hours)?;
            let dir = common.out.join("global");
            guard(&dir.join("run_metadata.json"), common.force)?;
            let run = run_global(&panels, &config)?;
            print_paths(&write_global_bundle(&dir, &config, &run)?);
            for f in &run.failures {
                eprintln!("hour {} failed: {}: {}", f.hour, f.code, f.message);
            }
            Ok(())
        }
        Command::Roll { input, hours, window, step, n_mc } => {
            override_opt(&mut config.hours, hours);
            override_opt(&mut config.window_days, window);
            override_opt(&mut config.step_days, step);
            override_opt(&mut config.rolling_n_mc, n_mc);
            config.validate()?;
            let panels = load_panels(&common, &input, &config.hours)?;
            let dir = common.out.join("rolling");
            guard(&dir.join("rolling.csv"), common.force)?;
            let run = run_rolling(&panels, &config)?;
            print_paths(&write_rolling_bundle(&dir, &config, &run)?);
            Ok(())
        }
        Command::Simulate { vine, n } => {
            let model = read_vine(&vine)?;
            let cols = simulate(&model, n, config.seed)?;
            let path = output(&common, "simulated.csv")?;
            let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
            w.write_record(&VARIABLES[..model.n_vars()])?;
            for i in 0..n {
                w.write_record(cols.iter().map(|c| c[i].to_string()))?;
            }
            w.flush()?;
            print_paths(&[path]);
            Ok(())
        }
        Command::Synth { days, start, generator, independent } => {
            let default_start = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
            let (d, s) = (days.unwrap_or(800), start.unwrap_or(default_start));
            let mut spec = match generator {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str::<GeneratorSpec>(&text)
                        .map_err(|e| elecvine::Error::Config(format!("{}: {e}", p.display())))?
                }
                None if independent => GeneratorSpec::independence(s, d),
                None => GeneratorSpec::default_dependent(s, d),
            };
            override_opt(&mut spec.days, days);
            override_opt(&mut spec.start_date, start);
            let records = generate(&spec, config.seed)?;
            let path = output(&common, "data.csv")?;
            let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_records_csv(std::io::BufWriter::new(file), &records)?;
            print_paths(&[path]);
            write_json(&common, "data.meta.json", &json!({ "seed": config.seed, "generator": spec }))
        }
    }
}

fn base_config(common: &Common) -> Result<AnalysisConfig> {
    let mut config = match &common.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    override_opt(&mut config.seed, common.seed);
    Ok(config)
}

fn override_opt<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn guard(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(OutputExists(path.to_path_buf()).into());
    }
    Ok(())
}

fn output(common: &Common, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
    let path = common.out.join(name);
    guard(&path, common.force)?;
    Ok(path)
}

fn write_json<T: Serialize>(common: &Common, name: &str, value: &T) -> Result<()> {
    let path = output(common, name)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    print_paths(&[path]);
    Ok(())
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn input_path(common: &Common, input: &InputArg) -> PathBuf {
    input.input.clone().unwrap_or_else(|| common.out.join("data.csv"))
}

fn load_records(path: &Path) -> Result<Vec<elecvine::data::RawHourlyRecord>> {
    let records = load_csv(path, &ColumnSchema::default())?;
    Ok(fix_clock_changes(&records)?.records)
}

fn load_panel(common: &Common, input: &InputArg, hour: u8) -> Result<HourlyPanel> {
    let records = load_records(&input_path(common, input))?;
    Ok(slice_hour(&records, hour)?)
}

fn load_panels(common: &Common, input: &InputArg, hours: &[u8]) -> Result<Vec<HourlyPanel>> {
    let records = load_records(&input_path(common, input))?;
    Ok(hours.iter().map(|&h| slice_hour(&records, h)).collect::<elecvine::Result<_>>()?)
}

fn read_vine(path: &Path) -> Result<VineModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model: VineModel = serde_json::from_str(&text).map_err(elecvine::Error::from)?;
    model.validate()?;
    Ok(model)
}

fn ingest(common: &Common, input: &Path, schema: Option<&Path>) -> Result<()> {
    let schema = match schema {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str::<ColumnSchema>(&text).map_err(|e| elecvine::Error::Config(format!("{}: {e}", p.display())))?
        }
        None => ColumnSchema::default(),
    };
    let raw = load_csv(input, &schema)?;
    let fixed = fix_clock_changes(&raw)?;
    for h in 0..24 {
        slice_hour(&fixed.records, h)?;
    }
    let path = output(common, "data.csv")?;
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_records_csv(std::io::BufWriter::new(file), &fixed.records)?;
    print_paths(&[path]);
    let summary = json!({
        "input": input.display().to_string(),
        "records": fixed.records.len(),
        "dropped": fixed.dropped,
        "interpolated": fixed.interpolated,
    });
    write_json(common, "ingest_report.json", &summary)
}

fn tail(
    common: &Common,
    config: &AnalysisConfig,
    input: &InputArg,
    hour: u8,
    pattern: &str,
    vine: Option<&Path>,
) -> Result<()> {
    let model = match vine {
        Some(p) => read_vine(p)?,
        None => fit_hour(&load_panel(common, input, hour)?, config)?.vine,
    };
    let cond: Vec<usize> = (1..model.n_vars()).collect();
    let label: String = pattern.chars().take(cond.len()).collect();
    let p = ScenarioPattern::from_label(&label, 0, &cond, config.alpha, config.beta)?;
    let seed = derive_seed(config.seed, &[stream::GLOBAL_MC, u64::from(hour)]);
    let r = scenario_tail_coefficient(&model, &p, config.n_mc, seed)?;
    let path = output(common, &format!("tail_h{hour:02}_{label}.csv"))?;
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(TAIL_HEADER)?;
    let row = tail_row(hour, "scenario", &label, &r);
    w.write_record(&row)?;
    w.flush()?;
    println!("{}", row.join(","));
    print_paths(&[path]);
    Ok(())
}
