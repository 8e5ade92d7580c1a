//! The `cycle`, `sweep` and `validate` subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use anyon_otto::closed_form::{
    cs_efficiency_closed_with, relative_residual, ring_efficiency_closed_with,
};
use anyon_otto::otto::{efficiency_cs_volume, sweep_with};
use anyon_otto::{
    run_cycle, CheckSettings, CycleMedium, CycleReport, OttoCycleSpec, Regime, Result,
};
use log::warn;
use thiserror::Error;

use crate::config::{ConfigError, Format, RawConfig, RunConfig};
use crate::output::{render_csv, render_svg, short_number, JsonReport, ResultRow};
use crate::validate::{run_validation, ValidateOptions};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Engine = 0,
    Other = 1,
    NotEngine = 2,
    ValidationFailed = 3,
    Config = 64,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{0}")]
    Compute(#[from] anyon_otto::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        match self {
            CliError::Config(_) => ExitStatus::Config,
            _ => ExitStatus::Other,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    fs::write(path, contents).map_err(io_err)
}

/// Cycle evaluated by summation, with the closed-form residual attached
/// where one exists.
pub fn evaluate_with_oracle(spec: &OttoCycleSpec, cfg: &RunConfig) -> Result<CycleReport> {
    let mut report = run_cycle(spec)?;
    let settings = CheckSettings {
        accuracy: cfg.accuracy,
        tail_tol: cfg.tail_tol,
    };
    let closed = match spec.medium {
        CycleMedium::CsVolume { l1, l2, .. } => Ok(match report.regime {
            Regime::Degenerate => 0.0,
            _ => efficiency_cs_volume(l1, l2),
        }),
        CycleMedium::Ring {
            eps0,
            alpha_h,
            alpha_l,
        } => ring_efficiency_closed_with(
            alpha_h,
            alpha_l,
            spec.beta_h,
            spec.beta_l,
            eps0,
            cfg.variant,
            &settings,
        )
        .map(|c| c.report.value),
        CycleMedium::CsCoupling {
            length,
            alpha1,
            alpha2,
        } => cs_efficiency_closed_with(
            alpha1,
            alpha2,
            spec.beta_h,
            spec.beta_l,
            length,
            cfg.variant,
            &settings,
        )
        .map(|c| c.report.value),
    };
    match closed {
        Ok(value) => report.oracle_residual = Some(relative_residual(value, report.efficiency)),
        Err(e) => warn!("closed form unavailable for this point: {e}"),
    }
    Ok(report)
}

fn parameter_list(raw: &RawConfig) -> BTreeMap<&str, &str> {
    raw.iter().collect()
}

pub fn cmd_cycle(
    cfg: &RunConfig,
    raw: &RawConfig,
    stdout: &mut dyn Write,
) -> std::result::Result<ExitStatus, CliError> {
    let spec = cfg.spec.expect("cycle mode always builds a spec");
    let started = Instant::now();
    let report = evaluate_with_oracle(&spec, cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut text = String::new();
    text.push_str(&format!("medium = {}\n", spec.medium.kind()));
    text.push_str(&format!("regime = {}\n", report.regime));
    text.push_str(&format!(
        "efficiency = {}\n",
        short_number(report.efficiency)
    ));
    text.push_str(&format!("q_in = {}\n", short_number(report.q_in)));
    text.push_str(&format!("q_out = {}\n", short_number(report.q_out)));
    text.push_str(&format!("w_out = {}\n", short_number(report.w_out)));
    match report.oracle_residual {
        Some(r) => text.push_str(&format!(
            "residual = {} ({})\n",
            short_number(r),
            cfg.variant
        )),
        None => text.push_str("residual = n/a\n"),
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            path: "stdout".into(),
            source,
        })?;

    if let Some(dir) = &cfg.out {
        let rows = [ResultRow::from_report(None, &report, elapsed)];
        for format in &cfg.formats {
            let path = dir.join(format!("cycle.{}", format.extension()));
            let contents = match format {
                Format::Csv => render_csv("value", &rows),
                Format::Json => JsonReport::new(
                    spec.medium.kind(),
                    None,
                    cfg.variant,
                    parameter_list(raw),
                    &rows,
                )
                .render(),
                Format::Svg => unreachable!("rejected during configuration"),
            };
            write_file(&path, &contents)?;
        }
    }

    Ok(match report.regime {
        Regime::Engine => ExitStatus::Engine,
        _ => ExitStatus::NotEngine,
    })
}

/// Evaluates every grid point; rows keep grid order.
pub fn sweep_rows(cfg: &RunConfig) -> Vec<ResultRow> {
    let spec = cfg.spec.expect("sweep mode always builds a spec");
    let plan = cfg.sweep.as_ref().expect("sweep mode always has a plan");
    let values = plan.grid.values();
    let timed = sweep_with(&spec, plan.axis, &values, |s| {
        let started = Instant::now();
        evaluate_with_oracle(s, cfg).map(|r| (r, started.elapsed().as_secs_f64()))
    });
    timed
        .into_iter()
        .map(|row| match row.outcome {
            Ok((report, secs)) => ResultRow::from_report(Some(row.value), &report, secs),
            Err(e) => ResultRow::failed(Some(row.value), e.to_string(), 0.0),
        })
        .collect()
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    raw: &RawConfig,
    stdout: &mut dyn Write,
) -> std::result::Result<ExitStatus, CliError> {
    let spec = cfg.spec.expect("sweep mode always builds a spec");
    let axis = cfg
        .sweep
        .as_ref()
        .expect("sweep mode always has a plan")
        .axis;
    let rows = sweep_rows(cfg);
    let medium = spec.medium.kind();
    let io_err = |source| CliError::Io {
        path: "stdout".into(),
        source,
    };

    match &cfg.out {
        None => stdout
            .write_all(render_csv(axis.as_str(), &rows).as_bytes())
            .map_err(io_err)?,
        Some(dir) => {
            for format in &cfg.formats {
                let path = dir.join(format!("sweep.{}", format.extension()));
                let contents = match format {
                    Format::Csv => render_csv(axis.as_str(), &rows),
                    Format::Json => {
                        JsonReport::new(medium, Some(axis), cfg.variant, parameter_list(raw), &rows)
                            .render()
                    }
                    Format::Svg => render_svg(axis.as_str(), medium.as_str(), &rows),
                };
                write_file(&path, &contents)?;
                writeln!(stdout, "wrote {}", path.display()).map_err(io_err)?;
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            writeln!(stdout, "{} rows, {} failed", rows.len(), failed).map_err(io_err)?;
        }
    }
    Ok(ExitStatus::Engine)
}

pub fn cmd_validate(
    cfg: &RunConfig,
    stdout: &mut dyn Write,
) -> std::result::Result<ExitStatus, CliError> {
    let opts = ValidateOptions {
        accuracy: cfg.accuracy,
        tail_tol: cfg.tail_tol,
        seed: cfg.seed,
        variant: cfg.variant,
    };
    let results = run_validation(&opts);
    let io_err = |source| CliError::Io {
        path: "stdout".into(),
        source,
    };

    writeln!(stdout, "formula variant: {}", cfg.variant).map_err(io_err)?;
    for r in &results {
        writeln!(
            stdout,
            "{:<30} {:>5} checks {:>4} skipped  max residual {:>10.3e}  threshold {:.1e}  {}",
            r.family,
            r.checks,
            r.skipped,
            r.max_residual,
            r.threshold,
            if r.passed() { "ok" } else { "FAIL" }
        )
        .map_err(io_err)?;
        if !r.passed() {
            writeln!(stdout, "    worst at {}", r.worst_point).map_err(io_err)?;
        }
    }

    let worst = results
        .iter()
        .filter(|r| !r.passed())
        .max_by(|a, b| (a.max_residual / a.threshold).total_cmp(&(b.max_residual / b.threshold)));
    match worst {
        None => {
            writeln!(stdout, "all {} families within threshold", results.len()).map_err(io_err)?;
            Ok(ExitStatus::Engine)
        }
        Some(w) => {
            let variant = if w.uses_variant {
                format!(" using formula variant {}", cfg.variant)
            } else {
                String::new()
            };
            writeln!(
                stdout,
                "validation failed: worst offender is {}{} at {} (residual {:.3e})",
                w.family, variant, w.worst_point, w.max_residual
            )
            .map_err(io_err)?;
            Ok(ExitStatus::ValidationFailed)
        }
    }
}
