//! Butterfly-effect comparison: site-0 `<sigma^x>` from the frame
//! dynamics at one or two step sizes against the exact reference, with
//! an exponential fit to each absolute-error series. An exact-vs-exact
//! control column (two reference step sizes) separates integrator chaos
//! from reference error.

use gauge_dynamics::analysis::fit_growth;
use gauge_dynamics::engine::ObservableRequest;
use gauge_dynamics::linalg::embed_local;
use gauge_dynamics::metrics::TimeSeries;
use gauge_dynamics::model::{assemble_full_hamiltonian, sigma_x};
use gauge_dynamics::reference::{evolve_exact, expectation, ExactPropagator};

use crate::config::RunConfig;
use crate::csvio::{emit_report, fmt_label, fmt_value, Table};
use crate::error::{analysis_stage, CliError, CliResult};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    if let Some(path) = &cfg.points_file {
        return fit_only(cfg, path);
    }

    let l = cfg.l_list[0];
    let interval = cfg.sample_interval;
    let n_rows = (cfg.t_max / interval).round() as usize + 1;
    let times: Vec<f64> = (0..n_rows).map(|k| k as f64 * interval).collect();

    // Exact reference at the two step sizes; the finer one anchors the
    // gauge errors, the pair difference is the control.
    let (delta_coarse, delta_fine) = control_deltas(&cfg.dt_list);
    let exact_coarse = exact_sx(cfg, l, delta_coarse, &times)?;
    let exact_fine = exact_sx(cfg, l, delta_fine, &times)?;
    let control_err: Vec<f64> =
        exact_coarse.iter().zip(&exact_fine).map(|(a, b)| (a - b).abs()).collect();

    // Frame-dynamics variants.
    let request = ObservableRequest {
        record_sites: true,
        record_pairs: false,
        record_energy: false,
        check_invariants: false,
    };
    struct Variant {
        label: String,
        sx: Vec<f64>,
        err: Vec<f64>,
    }
    let mut variants: Vec<Variant> = Vec::new();
    for &gamma in &cfg.gamma_list {
        for &dt in &cfg.dt_list {
            let stride = (interval / dt).round() as usize;
            let evolution = gauge_dynamics::engine::EvolutionConfig {
                gamma,
                dt,
                t_max: cfg.t_max,
                sample_stride: stride,
                convention: cfg.convention,
                unitarize_every: cfg.unitarize_every,
            };
            let record = super::run_cell_with(cfg, evolution, l, &request)?;
            check_grid(&times, &record.times)?;
            let sx = record.sx[0].clone();
            let err: Vec<f64> =
                sx.iter().zip(&exact_fine).map(|(a, b)| (a - b).abs()).collect();
            variants.push(Variant {
                label: format!("g{}_dt{}", fmt_label(gamma), fmt_label(dt)),
                sx,
                err,
            });
        }
    }

    // Table: t, exact, per-variant value and error, control error.
    let mut headers = vec!["t".to_string(), "sx_exact".to_string()];
    for v in &variants {
        headers.push(format!("sx_gauge_{}", v.label));
        headers.push(format!("abs_err_{}", v.label));
    }
    headers.push("abs_err_exact_ctrl".to_string());
    let mut table = Table::new(headers);
    for k in 0..n_rows {
        let mut row = Vec::with_capacity(table.headers.len());
        row.push(Some(times[k]));
        row.push(Some(exact_fine[k]));
        for v in &variants {
            row.push(Some(v.sx[k]));
            row.push(Some(v.err[k]));
        }
        row.push(Some(control_err[k]));
        table.push_row(row)?;
    }
    table.write(&cfg.output_path)?;
    eprintln!("[chaos] wrote {} rows to {}", table.rows.len(), cfg.output_path.display());

    // Growth-rate report, one line per variant plus the control.
    let mut lines = vec![format!(
        "error-growth fits: ln|err| vs t inside the band ({}, {})",
        fmt_label(cfg.growth_floor),
        fmt_label(cfg.growth_ceiling)
    )];
    let mut fitted = 0usize;
    for v in &variants {
        let (line, ok) = growth_line(cfg, &format!("variant {}", v.label), &times, &v.err)?;
        if ok {
            fitted += 1;
        }
        lines.push(line);
    }
    let control_name = format!(
        "control exact dt={} vs dt={}",
        fmt_label(delta_coarse),
        fmt_label(delta_fine)
    );
    lines.push(growth_line(cfg, &control_name, &times, &control_err)?.0);
    if fitted == 0 {
        return Err(CliError::Analysis(
            "no frame-dynamics variant produced a fittable or floor-level error series".into(),
        ));
    }
    emit_report(&cfg.output_path, &lines)?;
    Ok(())
}

/// The two reference step sizes: the given pair, or (dt, dt/2).
fn control_deltas(dt_list: &[f64]) -> (f64, f64) {
    if dt_list.len() == 2 {
        let (a, b) = (dt_list[0], dt_list[1]);
        if a >= b {
            (a, b)
        } else {
            (b, a)
        }
    } else {
        (dt_list[0], dt_list[0] / 2.0)
    }
}

/// Site-0 `<sigma^x>` under the exact propagator at step `delta`,
/// sampled on `times`.
fn exact_sx(cfg: &RunConfig, l: usize, delta: f64, times: &[f64]) -> CliResult<Vec<f64>> {
    let model = cfg.model_for(l)?;
    let h = assemble_full_hamiltonian(&model)?;
    let stride = (cfg.sample_interval / delta).round() as usize;
    if stride == 0 || (stride as f64 * delta - cfg.sample_interval).abs() > 1e-9 {
        return Err(CliError::Usage(format!(
            "field 'sample_interval': {} is not an integer multiple of reference dt = {delta}",
            cfg.sample_interval
        )));
    }
    let prop = ExactPropagator::build(&h, delta)?;
    let psi0 = cfg.initial_state.vector(l)?;
    let n_steps = (cfg.t_max / delta).round() as usize;
    let states = evolve_exact(&prop, &psi0, n_steps, stride)?;
    let grid: Vec<f64> = states.iter().map(|(t, _)| *t).collect();
    check_grid(times, &grid)?;
    let op = embed_local(&sigma_x(), &[0], l)?;
    states.iter().map(|(_, psi)| Ok(expectation(&op, psi)?)).collect()
}

fn check_grid(expected: &[f64], got: &[f64]) -> CliResult<()> {
    if expected.len() != got.len()
        || expected.iter().zip(got).any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(CliError::Usage(format!(
            "sample grids disagree ({} vs {} rows); t_max must be a whole number of sample \
             intervals and every dt must divide the interval",
            expected.len(),
            got.len()
        )));
    }
    Ok(())
}

/// One report line for an error series, plus whether it counts as a
/// definite verdict (a fitted rate or a floor-level series).
fn growth_line(
    cfg: &RunConfig,
    name: &str,
    times: &[f64],
    err: &[f64],
) -> CliResult<(String, bool)> {
    let max_err = err.iter().cloned().fold(0.0, f64::max);
    if max_err <= cfg.growth_floor {
        return Ok((
            format!(
                "{name}: all errors at or below the floor {} (max {}); no measurable growth",
                fmt_label(cfg.growth_floor),
                fmt_value(max_err)
            ),
            true,
        ));
    }
    let series = TimeSeries::new(name.to_string(), times.to_vec(), err.to_vec())
        .map_err(analysis_stage)?;
    match fit_growth(&series, cfg.growth_floor, cfg.growth_ceiling) {
        Ok(fit) => Ok((
            format!(
                "{name}: rate = {}, intercept = {}, window = [{}, {}]",
                fmt_value(fit.rate),
                fmt_value(fit.intercept),
                fmt_label(fit.window.0),
                fmt_label(fit.window.1)
            ),
            true,
        )),
        Err(e) => Ok((format!("{name}: growth fit not available ({e})"), false)),
    }
}

/// Fit-only mode: an error series from a CSV with columns t, abs_err.
fn fit_only(cfg: &RunConfig, path: &std::path::Path) -> CliResult<()> {
    let table = Table::read(path)?;
    let (it, ie) = (table.column("t")?, table.column("abs_err")?);
    let mut times = Vec::with_capacity(table.rows.len());
    let mut err = Vec::with_capacity(table.rows.len());
    for (k, row) in table.rows.iter().enumerate() {
        let get = |idx: usize, name: &str| {
            row[idx].ok_or_else(|| {
                CliError::Usage(format!(
                    "'{}' row {}: column '{name}' is empty",
                    path.display(),
                    k + 1
                ))
            })
        };
        times.push(get(it, "t")?);
        err.push(get(ie, "abs_err")?);
    }
    let series =
        TimeSeries::new(path.display().to_string(), times, err).map_err(analysis_stage)?;
    let fit = fit_growth(&series, cfg.growth_floor, cfg.growth_ceiling).map_err(analysis_stage)?;
    table.write(&cfg.output_path)?;
    let lines = vec![
        format!(
            "error-growth fit: ln|err| vs t inside the band ({}, {})",
            fmt_label(cfg.growth_floor),
            fmt_label(cfg.growth_ceiling)
        ),
        format!("rate = {}", fmt_value(fit.rate)),
        format!("intercept = {}", fmt_value(fit.intercept)),
        format!(
            "window = [{}, {}]",
            fmt_label(fit.window.0),
            fmt_label(fit.window.1)
        ),
    ];
    emit_report(&cfg.output_path, &lines)?;
    Ok(())
}
