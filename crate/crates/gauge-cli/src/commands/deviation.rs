//! Pairwise deviation traces: `S_IJ(t)` for every overlapping patch pair
//! plus their mean, one file per gamma (suffixed when several gammas are
//! requested). Prints the trailing-window asymptote of `s_mean` when the
//! run covers the read-out window.

use std::path::PathBuf;

use gauge_dynamics::analysis::extract_asymptote;
use gauge_dynamics::engine::ObservableRequest;

use crate::config::RunConfig;
use crate::csvio::{fmt_label, fmt_value, Table};
use crate::error::CliResult;

pub fn run(cfg: &RunConfig) -> CliResult<()> {
    let l = cfg.l_list[0];
    let request = ObservableRequest {
        record_sites: false,
        record_pairs: true,
        record_energy: false,
        check_invariants: false,
    };
    let multi = cfg.gamma_list.len() > 1;
    for &gamma in &cfg.gamma_list {
        let record = super::run_cell(cfg, gamma, l, &request)?;
        let n_pairs = record.s_pairs.len();

        let mut headers = vec!["t".to_string()];
        headers.extend((0..n_pairs).map(|p| format!("s_pair_{p}")));
        headers.push("s_mean".to_string());
        let mut table = Table::new(headers);
        for (k, &t) in record.times.iter().enumerate() {
            let mut row = Vec::with_capacity(n_pairs + 2);
            row.push(Some(t));
            for pair in &record.s_pairs {
                row.push(Some(pair[k]));
            }
            row.push(Some(record.s_mean[k]));
            table.push_row(row)?;
        }
        let path = output_path_for(cfg, gamma, multi);
        table.write(&path)?;
        eprintln!("[deviation] wrote {} rows to {}", table.rows.len(), path.display());

        let series = super::s_mean_series(&record, format!("s_mean(gamma={gamma})"))?;
        let t_eval = cfg.t_eval.min(cfg.t_max);
        if let Ok(est) = extract_asymptote(&series, t_eval, cfg.window) {
            println!(
                "gamma={} L={l}: s_mean asymptote = {} (fluctuation {}, window [{}, {}])",
                fmt_label(gamma),
                fmt_value(est.value),
                fmt_value(est.fluctuation),
                fmt_label(t_eval - cfg.window),
                fmt_label(t_eval),
            );
        }
    }
    Ok(())
}

/// `dev.csv` for one gamma; `dev_gamma2.2.csv` etc. for several.
fn output_path_for(cfg: &RunConfig, gamma: f64, multi: bool) -> PathBuf {
    if !multi {
        return cfg.output_path.clone();
    }
    let stem = cfg.output_path.file_stem().and_then(|s| s.to_str()).unwrap_or("deviation");
    let ext = cfg.output_path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    cfg.output_path.with_file_name(format!("{stem}_gamma{}.{ext}", fmt_label(gamma)))
}
