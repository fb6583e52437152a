//! Implementations of the CLI verbs.

use serde_json::json;

use strobosim_core::{
    compare, evolve as evolve_trajectory, mc_errorbars, nm_measure, sweep as run_sweep,
    ComplexMatrix, InputDescriptor, StepConfig, Trajectory,
};

use crate::config::Resolved;
use crate::output::{cell, cell_json, csv_table, emit, json_doc, sig, sig_json, Format};
use crate::{CliError, PhysicsArgs, TomoArgs, TrajectoryArgs, VerifyArgs};

const EVOLVE_HEADER: &str = "step,T,theta,C_as,C_ae,purity,N_cum";
const SWEEP_HEADER: &str = "T,theta,step,C_as,C_ae,N_cum";
const TOMO_HEADER: &str = "step,C_true,C_mean,C_std";
/// Agreement bound between the channel route and the explicit-mode route.
const ORACLE_BOUND: f64 = 1e-10;

/// Backflow accumulated after each step, counting rises between consecutive
/// defined concurrence values.
fn cumulative_backflow(series: &[Option<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut last: Option<f64> = None;
    let mut accumulated = 0.0;
    for value in series {
        if let Some(c) = *value {
            if let Some(prev) = last {
                let rise = c - prev;
                if rise > strobosim_core::tol::NM_INCREMENT {
                    accumulated += rise;
                }
            }
            last = Some(c);
        }
        out.push(accumulated);
    }
    out
}

fn run_trajectory(resolved: &Resolved) -> Result<(StepConfig, Trajectory), CliError> {
    let cfg = resolved.step_config()?;
    let initial = resolved.input.state()?;
    let trajectory = evolve_trajectory(&initial, &cfg, resolved.steps)?;
    Ok((cfg, trajectory))
}

fn config_json(resolved: &Resolved, cfg: &StepConfig) -> serde_json::Value {
    json!({
        "input": resolved.input_label,
        "r": sig_json(cfg.r),
        "T": sig_json(cfg.transmission),
        "theta": sig_json(cfg.theta),
        "eta_s": sig_json(cfg.eta_s),
        "eta_e": sig_json(cfg.eta_e),
        "steps": resolved.steps,
    })
}

fn matrix_json(matrix: &ComplexMatrix) -> serde_json::Value {
    let part = |imag: bool| -> serde_json::Value {
        (0..matrix.rows())
            .map(|r| {
                (0..matrix.cols())
                    .map(|c| {
                        let entry = matrix.get(r, c);
                        sig_json(if imag { entry.im } else { entry.re })
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>()
            .into()
    };
    json!({ "re": part(false), "im": part(true) })
}

fn evolve_cmd_output(resolved: &Resolved, format: Format) -> Result<String, CliError> {
    let (cfg, trajectory) = run_trajectory(resolved)?;
    let n_cum = cumulative_backflow(&trajectory.c_as_series());
    match format {
        Format::Csv => {
            let rows: Vec<String> = trajectory
                .records
                .iter()
                .zip(&n_cum)
                .map(|(record, &n)| {
                    format!(
                        "{},{},{},{},{},{},{}",
                        record.k,
                        sig(cfg.transmission),
                        sig(cfg.theta),
                        cell(record.c_as),
                        cell(record.c_ae),
                        sig(record.purity),
                        sig(n)
                    )
                })
                .collect();
            Ok(csv_table(EVOLVE_HEADER, &rows))
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = trajectory
                .records
                .iter()
                .zip(&n_cum)
                .map(|(record, &n)| {
                    json!({
                        "step": record.k,
                        "T": sig_json(cfg.transmission),
                        "theta": sig_json(cfg.theta),
                        "C_as": cell_json(record.c_as),
                        "C_ae": cell_json(record.c_ae),
                        "purity": sig_json(record.purity),
                        "N_cum": sig_json(n),
                    })
                })
                .collect();
            Ok(json_doc(&json!({
                "command": "evolve",
                "config": config_json(resolved, &cfg),
                "rows": rows,
            })))
        }
    }
}

pub fn evolve(args: &TrajectoryArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args.physics, false)?;
    let format = Format::parse(&resolved.resolve_text(&args.out.format, "format", "csv"))?;
    let content = evolve_cmd_output(&resolved, format)?;
    let output = args.out.output.clone().or_else(|| resolved.file_output());
    emit(output.as_deref(), &content)
}

pub fn sweep(args: &TrajectoryArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args.physics, true)?;
    let format = Format::parse(&resolved.resolve_text(&args.out.format, "format", "csv"))?;
    let base = StepConfig::new(
        resolved.r,
        resolved.transmissions[0],
        resolved.thetas[0],
        resolved.eta_s,
        resolved.eta_e,
    )?;
    let initial = resolved.input.state()?;
    let rows = run_sweep(
        &initial,
        &base,
        &resolved.transmissions,
        &resolved.thetas,
        resolved.steps,
    )?;
    let content = match format {
        Format::Csv => {
            let lines: Vec<String> = rows
                .iter()
                .map(|row| {
                    format!(
                        "{},{},{},{},{},{}",
                        sig(row.transmission),
                        sig(row.theta),
                        row.step,
                        cell(row.c_as),
                        cell(row.c_ae),
                        sig(row.n_cum)
                    )
                })
                .collect();
            csv_table(SWEEP_HEADER, &lines)
        }
        Format::Json => {
            let records: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "T": sig_json(row.transmission),
                        "theta": sig_json(row.theta),
                        "step": row.step,
                        "C_as": cell_json(row.c_as),
                        "C_ae": cell_json(row.c_ae),
                        "N_cum": sig_json(row.n_cum),
                    })
                })
                .collect();
            json_doc(&json!({
                "command": "sweep",
                "config": {
                    "input": resolved.input_label,
                    "r": sig_json(resolved.r),
                    "eta_s": sig_json(resolved.eta_s),
                    "eta_e": sig_json(resolved.eta_e),
                    "steps": resolved.steps,
                },
                "rows": records,
            }))
        }
    };
    let output = args.out.output.clone().or_else(|| resolved.file_output());
    emit(output.as_deref(), &content)
}

pub fn tomo(args: &TomoArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args.physics, false)?;
    let format = Format::parse(&resolved.resolve_text(&args.out.format, "format", "csv"))?;
    let shots = resolved.resolve_u64(&args.shots, "shots", "10000")?;
    let mc_runs = resolved.resolve_usize(&args.mc, "mc", "100")?;
    let seed = resolved.resolve_u64(&args.seed, "seed", "0")?;
    if shots == 0 {
        return Err(CliError::usage("shots must be at least 1"));
    }
    if mc_runs < 2 {
        return Err(CliError::usage(
            "at least 2 Monte-Carlo runs are needed for a standard deviation",
        ));
    }
    let (cfg, trajectory) = run_trajectory(&resolved)?;
    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for record in &trajectory.records {
        // Disjoint seed windows keep the per-step samplers independent.
        let step_seed = seed.wrapping_add((record.k * mc_runs) as u64);
        let result = match record.rho_as.as_ref() {
            Some(rho) => Some(mc_errorbars(rho, shots, mc_runs, step_seed)?),
            None => None,
        };
        match format {
            Format::Csv => {
                let (c_mean, c_std) = result
                    .as_ref()
                    .map(|r| (Some(r.c_mean), Some(r.c_std)))
                    .unwrap_or((None, None));
                csv_rows.push(format!(
                    "{},{},{},{}",
                    record.k,
                    cell(record.c_as),
                    cell(c_mean),
                    cell(c_std)
                ));
            }
            Format::Json => {
                json_rows.push(json!({
                    "step": record.k,
                    "C_true": cell_json(record.c_as),
                    "C_mean": cell_json(result.as_ref().map(|r| r.c_mean)),
                    "C_std": cell_json(result.as_ref().map(|r| r.c_std)),
                    "rho_hat": result
                        .as_ref()
                        .map(|r| matrix_json(&r.rho_hat))
                        .unwrap_or(serde_json::Value::Null),
                }));
            }
        }
    }
    let content = match format {
        Format::Csv => csv_table(TOMO_HEADER, &csv_rows),
        Format::Json => {
            let mut config = config_json(&resolved, &cfg);
            let extras = config.as_object_mut().expect("config is an object");
            extras.insert("shots".into(), shots.into());
            extras.insert("mc_runs".into(), mc_runs.into());
            extras.insert("seed".into(), seed.into());
            json_doc(&json!({
                "command": "tomo",
                "config": config,
                "rows": json_rows,
            }))
        }
    };
    let output = args.out.output.clone().or_else(|| resolved.file_output());
    emit(output.as_deref(), &content)
}

pub fn nm(args: &PhysicsArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(args, false)?;
    let (cfg, trajectory) = run_trajectory(&resolved)?;
    let series = trajectory.c_as_defined();
    let measure = nm_measure(&series)?;
    let mut text = format!(
        "# input={} r={} T={} theta={} eta_s={} eta_e={} steps={}\n",
        resolved.input_label,
        cfg.r,
        cfg.transmission,
        cfg.theta,
        cfg.eta_s,
        cfg.eta_e,
        resolved.steps
    );
    text.push_str(&format!("N={:.6}\n", measure.n));
    if measure.increments.is_empty() {
        text.push_str("rises: none\n");
    } else {
        for (k, rise) in &measure.increments {
            text.push_str(&format!("rise k={k} dC={rise:.6}\n"));
        }
    }
    emit(None, &text)
}

pub fn verify_oracle(args: &VerifyArgs) -> Result<(), CliError> {
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    let samples: usize = args
        .samples
        .as_deref()
        .unwrap_or("20")
        .trim()
        .parse()
        .map_err(|_| CliError::usage("unparsable sample count"))?;
    let steps: usize = args
        .steps
        .as_deref()
        .unwrap_or("3")
        .trim()
        .parse()
        .map_err(|_| CliError::usage("unparsable step count"))?;
    let seed: u64 = args
        .seed
        .as_deref()
        .unwrap_or("0")
        .trim()
        .parse()
        .map_err(|_| CliError::usage("unparsable seed"))?;
    if samples == 0 {
        return Err(CliError::usage("sample count must be ≥ 1"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let descriptors = [
        InputDescriptor::BellPlus,
        InputDescriptor::BellMinus,
        InputDescriptor::Werner(0.9712),
    ];
    let mut worst: f64 = 0.0;
    for trial in 0..samples {
        let cfg = StepConfig::new(
            uniform(),
            uniform(),
            uniform() * std::f64::consts::TAU,
            1.0,
            1.0,
        )?;
        let distance = compare(&descriptors[trial % descriptors.len()], &cfg, steps)?;
        worst = worst.max(distance);
    }
    let text = format!("samples={samples} steps={steps}\nmax_distance={worst:.3e}\n");
    emit(None, &text)?;
    if worst > ORACLE_BOUND {
        return Err(CliError::Numerical(format!(
            "route disagreement {worst:.3e} exceeds {ORACLE_BOUND:.0e}"
        )));
    }
    Ok(())
}
