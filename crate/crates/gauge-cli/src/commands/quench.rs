//! Single quench: per-site `<sigma^x>` and `<sigma^z>` against time,
//! optionally side by side with the exact reference propagator.

use gauge_dynamics::engine::ObservableRequest;
use gauge_dynamics::linalg::embed_local;
use gauge_dynamics::model::{assemble_full_hamiltonian, sigma_x, sigma_z};
use gauge_dynamics::reference::{evolve_exact, expectation, ExactPropagator};

use crate::config::RunConfig;
use crate::csvio::Table;
use crate::error::{CliError, CliResult};

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let l = cfg.l_list[0];
    let gamma = cfg.gamma_list[0];
    let request = ObservableRequest {
        record_sites: true,
        record_pairs: false,
        record_energy: false,
        check_invariants: false,
    };
    let record = super::run_cell(cfg, gamma, l, &request)?;

    let mut headers = vec!["t".to_string()];
    headers.extend((0..l).map(|s| format!("sx_site{s}")));
    headers.extend((0..l).map(|s| format!("sz_site{s}")));

    let exact = if cfg.with_exact {
        headers.extend((0..l).map(|s| format!("sx_exact_site{s}")));
        headers.extend((0..l).map(|s| format!("sz_exact_site{s}")));
        Some(exact_columns(cfg, l, &record.times)?)
    } else {
        None
    };

    let mut table = Table::new(headers);
    for (k, &t) in record.times.iter().enumerate() {
        let mut row = Vec::with_capacity(table.headers.len());
        row.push(Some(t));
        for site in 0..l {
            row.push(Some(record.sx[site][k]));
        }
        for site in 0..l {
            row.push(Some(record.sz[site][k]));
        }
        if let Some((ex, ez)) = &exact {
            for col in ex {
                row.push(Some(col[k]));
            }
            for col in ez {
                row.push(Some(col[k]));
            }
        }
        table.push_row(row)?;
    }
    table.write(&cfg.output_path)?;
    eprintln!("[quench] wrote {} rows to {}", table.rows.len(), cfg.output_path.display());
    Ok(())
}

/// Exact per-site series on the same sample grid as the frame run.
#[allow(clippy::type_complexity)]
fn exact_columns(
    cfg: &RunConfig,
    l: usize,
    times: &[f64],
) -> CliResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let model = cfg.model_for(l)?;
    let h = assemble_full_hamiltonian(&model)?;
    let prop = ExactPropagator::build(&h, cfg.dt)?;
    let psi0 = cfg.initial_state.vector(l)?;
    let evolution = cfg.evolution_for(cfg.gamma_list[0]);
    let states = evolve_exact(&prop, &psi0, evolution.n_steps() as usize, cfg.sample_stride)?;
    if states.len() != times.len() {
        return Err(CliError::Usage(format!(
            "exact reference produced {} samples, frame run produced {}",
            states.len(),
            times.len()
        )));
    }
    let (sx_op, sz_op) = (sigma_x(), sigma_z());
    let mut ex = vec![Vec::with_capacity(times.len()); l];
    let mut ez = vec![Vec::with_capacity(times.len()); l];
    for (site, (ex_col, ez_col)) in ex.iter_mut().zip(ez.iter_mut()).enumerate() {
        let full_x = embed_local(&sx_op, &[site], l)?;
        let full_z = embed_local(&sz_op, &[site], l)?;
        for (_, psi) in &states {
            ex_col.push(expectation(&full_x, psi)?);
            ez_col.push(expectation(&full_z, psi)?);
        }
    }
    Ok((ex, ez))
}
