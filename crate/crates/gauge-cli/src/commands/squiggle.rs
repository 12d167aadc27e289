//! Onset scan: for each gamma on the grid, integrate the deviation mean
//! and record the first time it turns over (the squiggle onset). The
//! finite onsets feed the divergence fit 1/t_s^2 = m (gamma - gamma0),
//! which locates the threshold coupling gamma0.

use gauge_dynamics::analysis::{detect_onset, fit_onset_divergence};
use gauge_dynamics::engine::ObservableRequest;

use crate::config::RunConfig;
use crate::csvio::{emit_report, fmt_label, fmt_value, Table};
use crate::error::{analysis_stage, CliError, CliResult};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let onsets: Vec<(f64, Option<f64>)> = match &cfg.points_file {
        Some(path) => read_onsets(path)?,
        None => scan_grid(cfg)?,
    };

    let mut table = Table::new(vec!["gamma".to_string(), "t_onset".to_string()]);
    for &(gamma, t_s) in &onsets {
        table.push_row(vec![Some(gamma), t_s])?;
    }
    table.write(&cfg.output_path)?;
    eprintln!("[squiggle] wrote {} onset rows to {}", onsets.len(), cfg.output_path.display());

    let present: Vec<(f64, f64)> =
        onsets.iter().filter_map(|&(gamma, t_s)| t_s.map(|t| (gamma, t))).collect();
    if present.len() < 3 {
        return Err(CliError::Analysis(format!(
            "only {} of {} gammas produced a finite onset; the divergence fit needs at least 3",
            present.len(),
            onsets.len()
        )));
    }
    let fit = fit_onset_divergence(&present).map_err(analysis_stage)?;
    let lines = vec![
        "onset-divergence fit: straight line in 1/t_s^2 vs gamma, root at gamma0".to_string(),
        format!("gamma0 = {}", fmt_value(fit.gamma0)),
        format!("t0 = {}", fmt_value(fit.t0)),
        format!("residual = {}", fmt_value(fit.residual)),
        format!("r_squared = {}", fmt_value(fit.r_squared)),
        format!("onsets = {} of {}", present.len(), onsets.len()),
    ];
    emit_report(&cfg.output_path, &lines)?;
    Ok(())
}

fn scan_grid(cfg: &RunConfig) -> CliResult<Vec<(f64, Option<f64>)>> {
    let l = cfg.l_list[0];
    let request = ObservableRequest {
        record_sites: false,
        record_pairs: true,
        record_energy: false,
        check_invariants: false,
    };
    let mut onsets = Vec::with_capacity(cfg.gamma_list.len());
    for &gamma in &cfg.gamma_list {
        let record = super::run_cell(cfg, gamma, l, &request)?;
        let series = super::s_mean_series(&record, format!("s_mean(gamma={gamma})"))?;
        let t_s = detect_onset(&series, cfg.onset_t_min, cfg.onset_epsilon);
        match t_s {
            Some(t) => eprintln!("[squiggle] gamma={}: onset at t = {t}", fmt_label(gamma)),
            None => eprintln!(
                "[squiggle] gamma={}: no onset up to t_max = {}",
                fmt_label(gamma),
                cfg.t_max
            ),
        }
        onsets.push((gamma, t_s));
    }
    Ok(onsets)
}

/// Fit-only mode: onset rows from a CSV with columns gamma, t_onset; an
/// empty t_onset cell means "no onset for this gamma".
fn read_onsets(path: &std::path::Path) -> CliResult<Vec<(f64, Option<f64>)>> {
    let table = Table::read(path)?;
    let (ig, it) = (table.column("gamma")?, table.column("t_onset")?);
    let mut onsets = Vec::with_capacity(table.rows.len());
    for (k, row) in table.rows.iter().enumerate() {
        let gamma = row[ig].ok_or_else(|| {
            CliError::Usage(format!("'{}' row {}: column 'gamma' is empty", path.display(), k + 1))
        })?;
        onsets.push((gamma, row[it]));
    }
    Ok(onsets)
}
