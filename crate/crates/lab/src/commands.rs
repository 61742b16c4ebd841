//! Subcommand implementations. Everything is callable as a library function
//! so the test suites can drive the exact CLI pipelines in-process.

use std::fs;
use std::path::{Path, PathBuf};

use csmlab_core::flow::Model;
use csmlab_core::integrate::{
    self, run_pair_prepared, InitialCondition, PairOutcome, RunOutcome, RunStatus,
};
use csmlab_core::monitors::{monitor_theorem1, monitor_theorem2, monitor_theorem3, TheoremReport};

use crate::checkpoint;
use crate::config::{self, effective_seed, load_pair_config, load_run_config, PairConfig};
use crate::digest::config_digest;
use crate::error::{LabError, Result};
use crate::manifest::{now_rfc3339, ManifestStatus, RunManifest, TOOL_VERSION};
use crate::plot::{parse_columns, render_svg, PlotSpec, SeriesTable};
use crate::report::ReportDocument;
use crate::series::{
    read_pair_series, read_series, read_table, write_pair_series, write_series,
};

/// Pick the output directory: an explicit --out is used as given; otherwise a
/// timestamped directory is created under $CSMLAB_OUT_DIR (default
/// ./csmlab-out).
pub fn resolve_out_dir(cli: Option<PathBuf>, subcmd: &str) -> Result<PathBuf> {
    let dir = match cli {
        Some(d) => d,
        None => {
            let root = std::env::var_os("CSMLAB_OUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("csmlab-out"));
            let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S%.3f");
            root.join(format!("{stamp}-{}-{subcmd}", std::process::id()))
        }
    };
    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    Ok(dir)
}

fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| LabError::Validation(format!("serialize {}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn status_to_manifest(status: &RunStatus) -> ManifestStatus {
    match status {
        RunStatus::Completed => ManifestStatus::Completed,
        RunStatus::Aborted(reason) => ManifestStatus::Aborted { reason: reason.to_string() },
    }
}

fn rel_paths(paths: &[&Path]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
        .collect()
}

/// Execute a single-model run into `out_dir`: echoed config, series CSV,
/// final checkpoint, and manifest.
pub fn run_single_pipeline(config: &csmlab_core::integrate::RunConfig, out_dir: &Path) -> Result<(RunOutcome, String)> {
    let started = now_rfc3339();
    let digest = config_digest(config)?;
    write_json_pretty(&out_dir.join("config.echo.json"), config)?;

    let grid = config.grid()?;
    let state0 = match &config.initial_condition {
        InitialCondition::FromCheckpoint { path } => {
            checkpoint::initial_state_from_checkpoint(Path::new(path), &grid)?
        }
        _ => integrate::initial_state(config, &grid)?,
    };
    let outcome = integrate::run_prepared(config, state0)?;

    let series_path = out_dir.join("series.csv");
    write_series(&series_path, &outcome.records)?;
    let ckpt_path = out_dir.join("final.ckpt");
    checkpoint::save_checkpoint(&ckpt_path, &outcome.final_state, &digest)?;
    let manifest = RunManifest {
        config_digest: digest.clone(),
        tool_version: TOOL_VERSION.to_string(),
        started,
        finished: now_rfc3339(),
        seed: effective_seed(config),
        output_paths: rel_paths(&[&out_dir.join("config.echo.json"), &series_path, &ckpt_path]),
        status: status_to_manifest(&outcome.status),
    };
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok((outcome, digest))
}

pub fn cmd_run(model: Model, config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let subcmd = match model {
        Model::Nse => "run-dns",
        Model::Csm => "run-csm",
    };
    let mut config = load_run_config(config_path, Some(model))?;
    if let Some(s) = seed {
        config::override_seed(&mut config, s);
    }
    let out_dir = resolve_out_dir(out, subcmd)?;
    let (outcome, _) = run_single_pipeline(&config, &out_dir)?;
    match &outcome.status {
        RunStatus::Completed => {
            println!(
                "{subcmd}: completed, {} records, final t = {}, outputs in {}",
                outcome.records.len(),
                outcome.final_state.t,
                out_dir.display()
            );
            Ok(())
        }
        RunStatus::Aborted(reason) => {
            println!("{subcmd}: aborted ({reason}), partial outputs in {}", out_dir.display());
            Err(LabError::Numerical(reason.to_string()))
        }
    }
}

/// Execute a paired run into `out_dir`: u/w/phi series, both checkpoints,
/// echoed pair config, manifest.
pub fn run_pair_pipeline(pair: &PairConfig, out_dir: &Path) -> Result<(PairOutcome, String)> {
    let started = now_rfc3339();
    let digest = config_digest(pair)?;
    write_json_pretty(&out_dir.join("config.echo.json"), pair)?;

    let grid = pair.u.grid()?;
    let u0 = match &pair.u.initial_condition {
        InitialCondition::FromCheckpoint { path } => {
            checkpoint::initial_state_from_checkpoint(Path::new(path), &grid)?
        }
        _ => integrate::initial_state(&pair.u, &grid)?,
    };
    let outcome = run_pair_prepared(&pair.u, &pair.w, &pair.perturbation, u0)?;

    let u_path = out_dir.join("u_series.csv");
    let w_path = out_dir.join("w_series.csv");
    let phi_path = out_dir.join("phi_series.csv");
    write_series(&u_path, &outcome.u_records)?;
    write_series(&w_path, &outcome.w_records)?;
    write_pair_series(&phi_path, &outcome.phi_records)?;
    checkpoint::save_checkpoint(&out_dir.join("u_final.ckpt"), &outcome.final_u, &digest)?;
    checkpoint::save_checkpoint(&out_dir.join("w_final.ckpt"), &outcome.final_w, &digest)?;
    let manifest = RunManifest {
        config_digest: digest.clone(),
        tool_version: TOOL_VERSION.to_string(),
        started,
        finished: now_rfc3339(),
        seed: pair.perturbation.seed,
        output_paths: rel_paths(&[&u_path, &w_path, &phi_path]),
        status: status_to_manifest(&outcome.status),
    };
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok((outcome, digest))
}

pub fn cmd_run_pair(config_path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let mut pair = load_pair_config(config_path)?;
    if let Some(s) = seed {
        pair.perturbation.seed = s;
        config::override_seed(&mut pair.u, s);
        config::override_seed(&mut pair.w, s);
    }
    let out_dir = resolve_out_dir(out, "run-pair")?;
    let (outcome, _) = run_pair_pipeline(&pair, &out_dir)?;
    match &outcome.status {
        RunStatus::Completed => {
            println!(
                "run-pair: completed, {} records, outputs in {}",
                outcome.phi_records.len(),
                out_dir.display()
            );
            Ok(())
        }
        RunStatus::Aborted(reason) => {
            println!("run-pair: aborted ({reason}), partial outputs in {}", out_dir.display());
            Err(LabError::Numerical(reason.to_string()))
        }
    }
}

fn closure_sign_label(pair: Option<&PairConfig>) -> String {
    match pair {
        Some(p) => format!("{:?}", p.w.params.closure_sign),
        None => "unspecified".to_string(),
    }
}

pub struct VerifyArgs {
    pub theorem: u8,
    pub config: Option<PathBuf>,
    pub series: Option<PathBuf>,
    pub nu: Option<f64>,
    pub decay_threshold: f64,
    pub out: Option<PathBuf>,
}

pub fn cmd_verify(args: VerifyArgs) -> Result<()> {
    if !(1..=3).contains(&args.theorem) {
        return Err(LabError::Validation(format!(
            "theorem: must be 1, 2, or 3, got {}",
            args.theorem
        )));
    }
    let out_dir = resolve_out_dir(args.out.clone(), &format!("verify-{}", args.theorem))?;

    let (report, digest, sign): (TheoremReport, String, String) = match args.theorem {
        1 => {
            let (records, digest) = if let Some(series) = &args.series {
                (read_series(series)?, "unspecified".to_string())
            } else if let Some(config_path) = &args.config {
                let config = load_run_config(config_path, None)?;
                let (outcome, digest) = run_single_pipeline(&config, &out_dir)?;
                if let RunStatus::Aborted(reason) = &outcome.status {
                    return Err(LabError::Numerical(reason.to_string()));
                }
                (outcome.records, digest)
            } else {
                return Err(LabError::Validation(
                    "verify needs --series with an existing series or --config to produce one".into(),
                ));
            };
            (monitor_theorem1(&records)?, digest, "unspecified".to_string())
        }
        _ => {
            let (phi, nu, digest, sign) = if let Some(series) = &args.series {
                let nu = args.nu.ok_or_else(|| {
                    LabError::Validation("--nu is required when verifying from --series".into())
                })?;
                (read_pair_series(series)?, nu, "unspecified".to_string(), "unspecified".to_string())
            } else if let Some(config_path) = &args.config {
                let pair = load_pair_config(config_path)?;
                let (outcome, digest) = run_pair_pipeline(&pair, &out_dir)?;
                if let RunStatus::Aborted(reason) = &outcome.status {
                    return Err(LabError::Numerical(reason.to_string()));
                }
                let sign = closure_sign_label(Some(&pair));
                (outcome.phi_records, pair.u.params.nu, digest, sign)
            } else {
                return Err(LabError::Validation(
                    "verify needs --series with an existing series or --config to produce one".into(),
                ));
            };
            let report = if args.theorem == 2 {
                monitor_theorem2(&phi)?
            } else {
                monitor_theorem3(&phi, nu, args.decay_threshold)?
            };
            (report, digest, sign)
        }
    };

    let doc = ReportDocument::new(report, &digest, &sign);
    doc.write_json(&out_dir.join(format!("theorem{}_report.json", args.theorem)))?;
    doc.write_margins_csv(&out_dir.join(format!("theorem{}_margins.csv", args.theorem)))?;
    println!("{}", doc.summary_line());
    if doc.report.pass {
        Ok(())
    } else {
        let reason = doc
            .report
            .reason
            .clone()
            .unwrap_or_else(|| "bound not satisfied over the series".into());
        Err(LabError::VerificationFailed(reason))
    }
}

#[derive(Debug, Clone)]
struct SummaryRow {
    key: String,
    value: String,
    theorem: u8,
    pass: bool,
    constants: Vec<(String, Option<f64>)>,
}

const SUMMARY_COLUMNS: [&str; 5] = ["C", "C1", "C2", "C2_nu", "lambda"];

fn report_to_row(key: &str, value: &str, theorem: u8, report: &TheoremReport) -> SummaryRow {
    let mut constants = Vec::new();
    for name in SUMMARY_COLUMNS {
        let v = if name == "lambda" {
            report.decay_rate
        } else {
            report.fitted_constants.get(name).copied()
        };
        constants.push((name.to_string(), v));
    }
    SummaryRow {
        key: key.to_string(),
        value: value.to_string(),
        theorem,
        pass: report.pass,
        constants,
    }
}

fn set_json_path(root: &mut serde_json::Value, path: &str, value: serde_json::Value) -> Result<()> {
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(LabError::Validation(format!("--vary: empty segment in key `{path}`")));
        }
        let obj = cursor.as_object_mut().ok_or_else(|| {
            LabError::Validation(format!("--vary: `{path}` descends into a non-object at `{part}`"))
        })?;
        if i == parts.len() - 1 {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!()
}

pub struct SweepArgs {
    pub config: PathBuf,
    pub vary: String,
    pub out: Option<PathBuf>,
    pub theorem: Option<u8>,
    pub jobs: Option<usize>,
}

pub fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (key, value_list) = args
        .vary
        .split_once('=')
        .ok_or_else(|| LabError::Validation(format!("--vary must look like KEY=v1,v2,..., got `{}`", args.vary)))?;
    let values: Vec<f64> = value_list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| LabError::Validation(format!("--vary: `{s}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(LabError::Validation("--vary: empty value list".into()));
    }

    let text = fs::read_to_string(&args.config).map_err(|e| LabError::io(&args.config, e))?;
    let root: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| LabError::Validation(format!("{}: {e}", args.config.display())))?;
    let pair_mode = config::is_pair_document(&root);
    let out_dir = resolve_out_dir(args.out.clone(), "sweep")?;

    let theorems: Vec<u8> = match (pair_mode, args.theorem) {
        (true, Some(t)) if (2..=3).contains(&t) => vec![t],
        (true, Some(t)) => {
            return Err(LabError::Validation(format!(
                "theorem: paired sweeps support theorems 2 and 3, got {t}"
            )));
        }
        (true, None) => vec![2, 3],
        (false, Some(1)) | (false, None) => vec![1],
        (false, Some(t)) => {
            return Err(LabError::Validation(format!(
                "theorem: single-run sweeps support theorem 1 only, got {t}"
            )));
        }
    };

    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Validation(format!("worker pool: {e}")))?;

    let run_one = |&value: &f64| -> Result<Vec<SummaryRow>> {
        let mut doc = root.clone();
        let json_value = serde_json::Value::from(value);
        if pair_mode && !key.starts_with("u.") && !key.starts_with("w.") && !key.starts_with("perturbation") {
            set_json_path(&mut doc, &format!("u.{key}"), json_value.clone())?;
            set_json_path(&mut doc, &format!("w.{key}"), json_value)?;
        } else {
            set_json_path(&mut doc, key, json_value)?;
        }
        let sub_dir = out_dir.join(format!("{key}={value}"));
        fs::create_dir_all(&sub_dir).map_err(|e| LabError::io(&sub_dir, e))?;

        let mut rows = Vec::new();
        if pair_mode {
            let raw: config::RawPairConfig = serde_json::from_value(doc)
                .map_err(|e| LabError::Validation(format!("sweep config for {key}={value}: {e}")))?;
            let pair = raw.resolve()?;
            let (outcome, digest) = run_pair_pipeline(&pair, &sub_dir)?;
            if let RunStatus::Aborted(reason) = &outcome.status {
                return Err(LabError::Numerical(format!("{key}={value}: {reason}")));
            }
            let sign = closure_sign_label(Some(&pair));
            for &t in &theorems {
                let report = if t == 2 {
                    monitor_theorem2(&outcome.phi_records)?
                } else {
                    monitor_theorem3(&outcome.phi_records, pair.u.params.nu, csmlab_core::monitors::DECAY_THRESHOLD)?
                };
                let doc = ReportDocument::new(report, &digest, &sign);
                doc.write_json(&sub_dir.join(format!("theorem{t}_report.json")))?;
                doc.write_margins_csv(&sub_dir.join(format!("theorem{t}_margins.csv")))?;
                rows.push(report_to_row(key, &format!("{value}"), t, &doc.report));
            }
        } else {
            let raw: config::RawRunConfig = serde_json::from_value(doc)
                .map_err(|e| LabError::Validation(format!("sweep config for {key}={value}: {e}")))?;
            let config = raw.resolve(None)?;
            let (outcome, digest) = run_single_pipeline(&config, &sub_dir)?;
            if let RunStatus::Aborted(reason) = &outcome.status {
                return Err(LabError::Numerical(format!("{key}={value}: {reason}")));
            }
            let report = monitor_theorem1(&outcome.records)?;
            let doc = ReportDocument::new(report, &digest, "unspecified");
            doc.write_json(&sub_dir.join("theorem1_report.json"))?;
            doc.write_margins_csv(&sub_dir.join("theorem1_margins.csv"))?;
            rows.push(report_to_row(key, &format!("{value}"), 1, &doc.report));
        }
        Ok(rows)
    };

    let results: Result<Vec<Vec<SummaryRow>>> = pool.install(|| {
        use rayon::prelude::*;
        values.par_iter().map(run_one).collect()
    });
    let rows: Vec<SummaryRow> = results?.into_iter().flatten().collect();

    let mut summary = String::from("vary_key,vary_value,theorem,pass");
    for c in SUMMARY_COLUMNS {
        summary.push(',');
        summary.push_str(c);
    }
    summary.push('\n');
    for row in &rows {
        summary.push_str(&format!("{},{},{},{}", row.key, row.value, row.theorem, row.pass));
        for (_, v) in &row.constants {
            summary.push(',');
            if let Some(v) = v {
                summary.push_str(&format!("{v}"));
            }
        }
        summary.push('\n');
    }
    let summary_path = out_dir.join("summary.csv");
    fs::write(&summary_path, summary).map_err(|e| LabError::io(&summary_path, e))?;
    println!(
        "sweep: {} values x {} theorem(s), summary in {}",
        values.len(),
        theorems.len(),
        summary_path.display()
    );
    Ok(())
}

pub fn cmd_plot(series: &[PathBuf], out_file: &Path, columns: &str, log_y: bool, title: &str) -> Result<()> {
    if series.is_empty() {
        return Err(LabError::Validation("--series: need at least one input file".into()));
    }
    let (x_col, y_cols) = parse_columns(columns)?;
    let tables: Vec<SeriesTable> = series
        .iter()
        .map(|p| {
            let (headers, rows) = read_table(p)?;
            Ok(SeriesTable {
                label: p
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string()),
                headers,
                rows,
            })
        })
        .collect::<Result<_>>()?;
    let spec = PlotSpec { x_col, y_cols, log_y, title: title.to_string() };
    let svg = render_svg(&tables, &spec)?;
    if let Some(parent) = out_file.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| LabError::io(parent, e))?;
        }
    }
    fs::write(out_file, svg).map_err(|e| LabError::io(out_file, e))?;
    println!("plot: wrote {}", out_file.display());
    Ok(())
}
