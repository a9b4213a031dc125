//! Runs a configuration and writes its CSV and metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{substitute, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::experiments::{lookup, Context, Outcome};
use crate::table::{Cell, Table};

/// Conventions baked into the numerics, echoed into every sidecar.
pub fn design_flags() -> Value {
    json!({
        "influence_region_default": "ordered: 0 <= s <= t <= t_final, iterated trapezoid; full_square uses the tensor trapezoid",
        "decoherence_exponent": "W_I / hbar; dephasing rate eta * omega_cut / (pi * hbar)",
        "unitary_term": "-i omega_nm rho_nm with omega_nm = (E_n - E_m) / hbar",
        "first_order_shift": "finite interval: delta_rho_nn proportional to the elapsed time t",
        "energy_change_sign": "E(t) - E(0)",
        "friction_term": "omitted",
        "hamilton_jacobi_default": "standard_madelung",
        "csv_float_format": "17 significant digits, lowercase scientific",
    })
}

fn run_single(config: &ExperimentConfig) -> CliResult<Outcome> {
    let experiment = lookup(&config.command)?;
    let ctx = Context {
        system: config.system.build()?,
        bath: config.bath,
        units: config.units,
        params: &config.params,
        seed: config.seed,
    };
    log::info!("running `{}`", config.command);
    experiment.run(&ctx)
}

fn sweep_cell(value: &Value) -> Cell {
    match value.as_f64() {
        Some(v) => Cell::Num(v),
        None => Cell::Text(value.to_string()),
    }
}

fn part_path(out_dir: &Path, csv: &str, index: usize) -> PathBuf {
    out_dir.join(format!(".{csv}.part{index}"))
}

/// Writes `bytes` next to `path` and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

struct Collected {
    csv: Vec<u8>,
    columns: Vec<String>,
    rows: usize,
    resolved_params: Value,
    summary: Value,
}

fn collect_single(config: &ExperimentConfig) -> CliResult<Collected> {
    let outcome = run_single(config)?;
    Ok(Collected {
        csv: outcome.table.to_csv()?,
        columns: outcome.table.columns.clone(),
        rows: outcome.table.rows.len(),
        resolved_params: outcome.resolved_params,
        summary: outcome.summary.unwrap_or(Value::Null),
    })
}

/// Fans the sweep points out over the thread pool; each point writes its own
/// part file and the parts are merged in declared order.
fn collect_sweep(config: &ExperimentConfig, out_dir: &Path) -> CliResult<Collected> {
    let sweep = config.sweep.as_ref().expect("sweep present");
    if sweep.values.is_empty() {
        return Err(CliError::config("sweep needs at least one value"));
    }
    let points: Vec<ExperimentConfig> = sweep
        .values
        .iter()
        .map(|v| substitute(config, &sweep.parameter, v))
        .collect::<CliResult<_>>()?;
    let parts: Vec<PathBuf> = (0..points.len()).map(|k| part_path(out_dir, &config.output.csv, k)).collect();

    let results: Vec<CliResult<(Table, Value, Value)>> = points
        .par_iter()
        .zip(sweep.values.par_iter())
        .zip(parts.par_iter())
        .map(|((point, value), part)| {
            let outcome = run_single(point)?;
            let table = outcome.table.with_leading("sweep_value", sweep_cell(value));
            fs::write(part, table.to_csv()?).map_err(|e| CliError::io(part, e))?;
            Ok((table, outcome.resolved_params, outcome.summary.unwrap_or(Value::Null)))
        })
        .collect();

    let cleanup = || {
        for part in &parts {
            let _ = fs::remove_file(part);
        }
    };
    let mut columns: Option<Vec<String>> = None;
    let mut rows = 0;
    let mut resolved = Vec::new();
    let mut summaries = Vec::new();
    for result in results {
        let (table, params, summary) = result.inspect_err(|_| cleanup())?;
        if columns.as_ref().is_some_and(|c| *c != table.columns) {
            cleanup();
            return Err(CliError::config("sweep points produced different columns"));
        }
        columns.get_or_insert(table.columns);
        rows += table.rows.len();
        resolved.push(params);
        summaries.push(summary);
    }

    let mut merged = Vec::new();
    for (k, part) in parts.iter().enumerate() {
        let bytes = fs::read(part).map_err(|e| {
            cleanup();
            CliError::io(part, e)
        })?;
        let body = if k == 0 {
            &bytes[..]
        } else {
            let header_end = bytes.iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| i + 1);
            &bytes[header_end..]
        };
        merged.extend_from_slice(body);
    }
    cleanup();
    Ok(Collected {
        csv: merged,
        columns: columns.unwrap_or_default(),
        rows,
        resolved_params: Value::Array(resolved),
        summary: Value::Array(summaries),
    })
}

/// Runs `config`, writing `<out_dir>/<csv>` and its sidecar only on success.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    // resolve the command before touching the filesystem
    lookup(&config.command)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let collected = match &config.sweep {
        Some(_) => collect_sweep(config, out_dir)?,
        None => collect_single(config)?,
    };

    let mut resolved_config = config.clone();
    if config.sweep.is_none() {
        resolved_config.params = collected.resolved_params.clone();
    }
    let sidecar = json!({
        "tool": "zerotemp",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "csv": config.output.csv,
        "columns": collected.columns,
        "rows": collected.rows,
        "resolved_config": resolved_config,
        "resolved_params": collected.resolved_params,
        "design_flags": design_flags(),
        "summary": collected.summary,
    });
    let csv_path = out_dir.join(&config.output.csv);
    let meta_path = out_dir.join(config.output.metadata_name());
    let meta_bytes = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(&csv_path, &collected.csv)?;
    write_atomic(&meta_path, &meta_bytes)?;
    Ok((csv_path, meta_path))
}
