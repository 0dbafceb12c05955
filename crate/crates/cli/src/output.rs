//! Artifact rendering and atomic file writes.
//!
//! Numbers are printed with 17 significant digits (`{:.16e}`), which
//! round-trips f64 exactly, so identical runs produce identical bytes.
//! Files are staged as temporaries and renamed only after every write
//! succeeded; a failure leaves no partial artifacts behind.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use optexec_core::benchmark::StrategyReport;
use optexec_core::market::Schedule;
use optexec_core::sgd::ConvergenceTrace;

use crate::config::ExperimentConfig;
use crate::CliError;

pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn render_report_csv(reports: &[StrategyReport]) -> String {
    let mut out =
        String::from("strategy,cost,excess_per_share,std_within_path,std_across_paths_total,rank\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            fmt_f64(r.cost),
            fmt_f64(r.excess_per_share),
            fmt_f64(r.std_within_path),
            fmt_f64(r.std_across_paths_total),
            r.rank
        );
    }
    out
}

/// Wide table of the reference-path schedules: one period per row, one
/// column per strategy. Periods are 1-based in the output.
pub fn render_schedules_csv(names: &[String], reference: &[Schedule]) -> String {
    let horizon = reference.first().map_or(0, Schedule::horizon);
    let mut out = String::from("period");
    for name in names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for t in 0..horizon {
        let _ = write!(out, "{}", t + 1);
        for schedule in reference {
            let _ = write!(out, ",{}", fmt_f64(schedule.purchases[t]));
        }
        out.push('\n');
    }
    out
}

pub fn render_trace_csv(traces: &[(&'static str, ConvergenceTrace)]) -> String {
    let mut out = String::from("strategy,iteration,objective,grad_norm,learning_rate\n");
    for (name, trace) in traces {
        for record in &trace.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                name,
                record.iteration,
                fmt_f64(record.objective),
                fmt_f64(record.grad_norm),
                fmt_f64(record.learning_rate)
            );
        }
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    seed: u64,
    config: &'a ExperimentConfig,
    report: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    strategy: &'a str,
    cost: f64,
    excess_per_share: f64,
    std_within_path: f64,
    std_across_paths_total: f64,
    rank: usize,
}

/// report.csv's rows plus the resolved configuration and seed.
pub fn render_report_json(config: &ExperimentConfig, reports: &[StrategyReport]) -> String {
    let body = JsonReport {
        seed: config.seed,
        config,
        report: reports
            .iter()
            .map(|r| JsonRow {
                strategy: &r.name,
                cost: r.cost,
                excess_per_share: r.excess_per_share,
                std_within_path: r.std_within_path,
                std_across_paths_total: r.std_across_paths_total,
                rank: r.rank,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&body).expect("report serializes");
    text.push('\n');
    text
}

/// Stage every file as `<name>.tmp`, then rename the whole set. Cleans up
/// the temporaries (and writes nothing final) if any step fails.
pub fn write_atomic_all(dir: &Path, files: &[(String, String)]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(files.len());
    for (name, content) in files {
        let tmp = dir.join(format!("{name}.tmp"));
        if let Err(err) = fs::write(&tmp, content) {
            remove_staged(&staged, Some(&tmp));
            return Err(err);
        }
        staged.push((tmp, dir.join(name)));
    }
    for index in 0..staged.len() {
        let (tmp, target) = &staged[index];
        if let Err(err) = fs::rename(tmp, target) {
            remove_staged(&staged[index..], None);
            // the set is all-or-nothing: drop what was already renamed
            for (_, renamed) in &staged[..index] {
                let _ = fs::remove_file(renamed);
            }
            return Err(err);
        }
    }
    Ok(())
}

fn remove_staged(staged: &[(PathBuf, PathBuf)], extra: Option<&Path>) {
    for (tmp, _) in staged {
        let _ = fs::remove_file(tmp);
    }
    if let Some(path) = extra {
        let _ = fs::remove_file(path);
    }
}

/// Reshape schedules.csv into long-format plot_data.csv
/// (strategy,period,shares), one row per strategy and period. Cell text is
/// copied verbatim so the values match schedules.csv byte for byte.
pub fn emit_plot_data(dir: &Path) -> Result<usize, CliError> {
    let source = dir.join("schedules.csv");
    let text = fs::read_to_string(&source).map_err(|err| {
        CliError::Runtime(format!("missing artifact {}: {err}", source.display()))
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Runtime("schedules.csv is empty".into()))?;
    let strategies: Vec<&str> = header.split(',').skip(1).collect();
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for line in lines {
        let mut cells = line.split(',');
        let period = cells
            .next()
            .and_then(|p| p.parse::<usize>().ok())
            .ok_or_else(|| CliError::Runtime(format!("malformed schedules.csv row: {line}")))?;
        rows.push((period, cells.collect()));
    }
    let mut out = String::from("strategy,period,shares\n");
    let mut count = 0usize;
    for (s, strategy) in strategies.iter().enumerate() {
        for (period, cells) in &rows {
            let _ = writeln!(out, "{strategy},{period},{}", cells[s]);
            count += 1;
        }
    }
    write_atomic_all(dir, &[(String::from("plot_data.csv"), out)])
        .map_err(|err| CliError::Runtime(format!("writing plot_data.csv: {err}")))?;
    Ok(count)
}
