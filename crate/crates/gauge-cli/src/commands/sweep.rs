//! Asymptote scaling sweep over a (gamma, L) grid: each cell's deviation
//! asymptote becomes one scaling point, noisy cells are excluded by the
//! flatness gate, and the surviving points feed the three-parameter fit
//! of ln(gamma^2 S) against L.

use gauge_dynamics::analysis::{
    extract_asymptote, fit_scaling, ScalingPoint, CLEAN_ASYMPTOTE_GATE,
};
use gauge_dynamics::engine::ObservableRequest;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::csvio::{emit_report, fmt_label, fmt_value, Table};
use crate::error::{analysis_stage, CliError, CliResult};

struct CellOutcome {
    gamma: f64,
    l: usize,
    value: f64,
    fluctuation: f64,
}

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let (points, excluded) = match &cfg.points_file {
        Some(path) => (read_points(path)?, Vec::new()),
        None => simulate_grid(cfg)?,
    };
    if points.is_empty() {
        return Err(CliError::Analysis(if excluded.is_empty() {
            "no scaling points to fit".to_string()
        } else {
            format!(
                "all {} grid cells failed the {}% asymptote-flatness gate",
                excluded.len(),
                CLEAN_ASYMPTOTE_GATE * 100.0
            )
        }));
    }

    let mut table = Table::new(vec![
        "gamma".to_string(),
        "l".to_string(),
        "s_asymptote".to_string(),
    ]);
    for p in &points {
        table.push_row(vec![Some(p.gamma), Some(p.l as f64), Some(p.s_asymptote)])?;
    }
    table.write(&cfg.output_path)?;
    eprintln!("[sweep] wrote {} scaling points to {}", points.len(), cfg.output_path.display());

    let fit = fit_scaling(&points).map_err(analysis_stage)?;
    let mut lines = vec![
        "scaling fit: ln(gamma^2 S) = a*L + b + c/L".to_string(),
        format!("a = {}", fmt_value(fit.a)),
        format!("b = {}", fmt_value(fit.b)),
        format!("c = {}", fmt_value(fit.c)),
        format!("residual = {}", fmt_value(fit.residual)),
        format!("points = {}", points.len()),
    ];
    if excluded.is_empty() {
        lines.push("excluded = none".to_string());
    } else {
        for cell in &excluded {
            lines.push(format!(
                "excluded: gamma={} L={} (fluctuation {})",
                fmt_label(cell.gamma),
                cell.l,
                fmt_value(cell.fluctuation)
            ));
        }
    }
    emit_report(&cfg.output_path, &lines)?;
    Ok(())
}

/// Run every (gamma, L) cell, splitting results by the flatness gate.
fn simulate_grid(cfg: &RunConfig) -> CliResult<(Vec<ScalingPoint>, Vec<CellOutcome>)> {
    let request = ObservableRequest {
        record_sites: false,
        record_pairs: true,
        record_energy: false,
        check_invariants: false,
    };
    let cells: Vec<(f64, usize)> = cfg
        .gamma_list
        .iter()
        .flat_map(|&gamma| cfg.l_list.iter().map(move |&l| (gamma, l)))
        .collect();
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&(gamma, l)| -> CliResult<CellOutcome> {
            let record = super::run_cell(cfg, gamma, l, &request)?;
            let series = super::s_mean_series(&record, format!("s_mean(gamma={gamma}, L={l})"))?;
            let est = extract_asymptote(&series, cfg.t_eval, cfg.window)?;
            Ok(CellOutcome { gamma, l, value: est.value, fluctuation: est.fluctuation })
        })
        .collect::<CliResult<_>>()?;

    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for cell in outcomes {
        if cell.fluctuation < CLEAN_ASYMPTOTE_GATE {
            points.push(ScalingPoint { gamma: cell.gamma, l: cell.l, s_asymptote: cell.value });
        } else {
            eprintln!(
                "[sweep] excluding gamma={} L={}: fluctuation {} over the window",
                fmt_label(cell.gamma),
                cell.l,
                fmt_value(cell.fluctuation)
            );
            excluded.push(cell);
        }
    }
    Ok((points, excluded))
}

/// Fit-only mode: scaling points from a CSV with columns gamma, l,
/// s_asymptote (extra columns are ignored).
fn read_points(path: &std::path::Path) -> CliResult<Vec<ScalingPoint>> {
    let table = Table::read(path)?;
    let (ig, il, is) =
        (table.column("gamma")?, table.column("l")?, table.column("s_asymptote")?);
    let mut points = Vec::with_capacity(table.rows.len());
    for (k, row) in table.rows.iter().enumerate() {
        let cell = |idx: usize, name: &str| {
            row[idx].ok_or_else(|| {
                CliError::Usage(format!(
                    "'{}' row {}: column '{name}' is empty",
                    path.display(),
                    k + 1
                ))
            })
        };
        let l_raw = cell(il, "l")?;
        if l_raw < 1.0 || (l_raw - l_raw.round()).abs() > 1e-9 {
            return Err(CliError::Usage(format!(
                "'{}' row {}: l = {l_raw} is not a positive integer",
                path.display(),
                k + 1
            )));
        }
        points.push(ScalingPoint {
            gamma: cell(ig, "gamma")?,
            l: l_raw.round() as usize,
            s_asymptote: cell(is, "s_asymptote")?,
        });
    }
    Ok(points)
}
