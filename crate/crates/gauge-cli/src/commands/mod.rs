//! The five experiment workflows. Each writes one CSV (plus a `.fit.txt`
//! sidecar where a fit is part of the product) and reports progress on
//! standard error.

pub mod chaos;
pub mod deviation;
pub mod quench;
pub mod squiggle;
pub mod sweep;

use std::time::Instant;

use gauge_dynamics::engine::{GaugeEngine, ObservableRequest, RunRecord};
use gauge_dynamics::metrics::TimeSeries;

use crate::config::RunConfig;
use crate::error::CliResult;

/// Integrate one (gamma, L) cell of the grid and report its wall time.
pub fn run_cell(
    cfg: &RunConfig,
    gamma: f64,
    l: usize,
    request: &ObservableRequest,
) -> CliResult<RunRecord> {
    run_cell_with(cfg, cfg.evolution_for(gamma), l, request)
}

/// Same, with explicit integration parameters (for commands that vary
/// the step size per variant).
pub fn run_cell_with(
    cfg: &RunConfig,
    evolution: gauge_dynamics::engine::EvolutionConfig,
    l: usize,
    request: &ObservableRequest,
) -> CliResult<RunRecord> {
    let model = cfg.model_for(l)?;
    for warning in evolution.validate()? {
        eprintln!("[{}] warning: {warning}", cfg.command.name());
    }
    let engine = GaugeEngine::from_model(&model)?;
    let psi0 = cfg.initial_state.vector(l)?;
    let started = Instant::now();
    eprintln!(
        "[{}] gamma={} L={l}: integrating {} steps (dt={}, t_max={})",
        cfg.command.name(),
        evolution.gamma,
        evolution.n_steps(),
        evolution.dt,
        evolution.t_max
    );
    let record = engine.run(psi0, &evolution, request)?;
    eprintln!(
        "[{}] gamma={} L={l}: done in {:.1}s",
        cfg.command.name(),
        evolution.gamma,
        started.elapsed().as_secs_f64()
    );
    Ok(record)
}

/// The mean-deviation series of one run, labelled for diagnostics.
pub fn s_mean_series(record: &RunRecord, label: String) -> CliResult<TimeSeries> {
    Ok(TimeSeries::new(label, record.times.clone(), record.s_mean.clone())?)
}
