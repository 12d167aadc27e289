//! Regression and detection procedures for the experiment harness:
//! asymptote extraction with a fluctuation gate, the (a, b, c) scaling fit
//! in log space, squiggle-onset detection, the onset-divergence fit, and
//! exponential error-growth rates.
//!
//! All fits are closed-form linear least squares (no iterative optimizer),
//! so they are deterministic and exact on noiseless synthetic data.

use crate::error::{Error, Result};
use crate::metrics::TimeSeries;

/// Default trailing-window width for [`extract_asymptote`].
pub const ASYMPTOTE_WINDOW_DEFAULT: f64 = 0.5;
/// Default evaluation time for [`extract_asymptote`].
pub const ASYMPTOTE_T_EVAL_DEFAULT: f64 = 5.0;
/// Points whose trailing-window fluctuation exceeds this fraction are
/// excluded from scaling-fit sets (no clean asymptote).
pub const CLEAN_ASYMPTOTE_GATE: f64 = 0.02;
/// Default earliest time at which [`detect_onset`] may report a decrease,
/// skipping the initial transient rise.
pub const ONSET_T_MIN_DEFAULT: f64 = 1.0;
/// Default relative threshold for [`detect_onset`].
pub const ONSET_EPSILON_DEFAULT: f64 = 1e-4;
/// Default lower edge of the [`fit_growth`] band.
pub const GROWTH_FLOOR_DEFAULT: f64 = 1e-10;
/// Default upper edge of the [`fit_growth`] band.
pub const GROWTH_CEILING_DEFAULT: f64 = 1e-2;

/// Tolerance when matching sample times against window edges.
const TIME_EDGE_TOL: f64 = 1e-9;

/// One data point for the deviation scaling fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub gamma: f64,
    pub l: usize,
    pub s_asymptote: f64,
}

/// Trailing-window summary of a deviation series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteEstimate {
    /// Mean of the values inside the trailing window.
    pub value: f64,
    /// Relative spread (max − min)/mean inside the window; 0 for a
    /// constant window.
    pub fluctuation: f64,
}

impl AsymptoteEstimate {
    /// Whether the window is flat enough for the point to enter a fit set.
    pub fn is_clean(&self) -> bool {
        self.fluctuation < CLEAN_ASYMPTOTE_GATE
    }
}

/// Parameters of ln(γ²S) = a·L + b + c/L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Root-mean-square residual in ln space.
    pub residual: f64,
}

/// Parameters of the onset-divergence line t_s⁻² = m·(γ − γ₀) with
/// t₀ = |m|^{−1/2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetFit {
    pub gamma0: f64,
    pub t0: f64,
    /// Root-mean-square residual in t_s⁻² space.
    pub residual: f64,
    /// Coefficient of determination of the line in t_s⁻² space.
    pub r_squared: f64,
}

/// Exponential growth rate of an error series within a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    /// Slope of ln(err) per unit time.
    pub rate: f64,
    /// Intercept of ln(err) at t = 0.
    pub intercept: f64,
    /// Time span (first, last) of the in-band samples used.
    pub window: (f64, f64),
}

/// Mean and relative fluctuation of `series` over the trailing window
/// `[t_eval − window, t_eval]`.
///
/// The series must cover the window, and the window must contain at least
/// two samples (one when `window` is zero).
pub fn extract_asymptote(
    series: &TimeSeries,
    t_eval: f64,
    window: f64,
) -> Result<AsymptoteEstimate> {
    if !t_eval.is_finite() || !window.is_finite() || window < 0.0 {
        return Err(Error::invalid(format!(
            "window [{}, {t_eval}] is not a valid trailing window",
            t_eval - window
        )));
    }
    let lo = t_eval - window;
    let times = series.times();
    if times[0] > lo + TIME_EDGE_TOL || times[times.len() - 1] < t_eval - TIME_EDGE_TOL {
        return Err(Error::invalid(format!(
            "series '{}' spans [{}, {}] and does not cover the window [{lo}, {t_eval}]",
            series.label,
            times[0],
            times[times.len() - 1]
        )));
    }
    let in_window: Vec<f64> = times
        .iter()
        .zip(series.values())
        .filter(|(t, _)| **t >= lo - TIME_EDGE_TOL && **t <= t_eval + TIME_EDGE_TOL)
        .map(|(_, v)| *v)
        .collect();
    let min_samples = if window == 0.0 { 1 } else { 2 };
    if in_window.len() < min_samples {
        return Err(Error::invalid(format!(
            "window [{lo}, {t_eval}] contains {} samples; need at least {min_samples}",
            in_window.len()
        )));
    }
    let mean = in_window.iter().sum::<f64>() / in_window.len() as f64;
    let max = in_window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = in_window.iter().cloned().fold(f64::INFINITY, f64::min);
    let fluctuation = if max == min {
        0.0
    } else if mean > 0.0 {
        (max - min) / mean
    } else {
        return Err(Error::analysis(format!(
            "relative fluctuation undefined: window mean {mean} is not positive"
        )));
    };
    Ok(AsymptoteEstimate { value: mean, fluctuation })
}

/// Least-squares fit of ln(γ²·S) against the design (L, 1, 1/L).
///
/// Requires at least three points spanning at least three distinct L
/// values; with fewer distinct L the three design columns are linearly
/// dependent and the parameters cannot be separated.
pub fn fit_scaling(points: &[ScalingPoint]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for p in points {
        if !(p.gamma.is_finite() && p.gamma > 0.0) {
            return Err(Error::invalid(format!(
                "scaling point has nonpositive gamma {}",
                p.gamma
            )));
        }
        if p.l == 0 {
            return Err(Error::invalid("scaling point has L = 0"));
        }
        if !(p.s_asymptote.is_finite() && p.s_asymptote > 0.0) {
            return Err(Error::invalid(format!(
                "scaling point at gamma={}, L={} has nonpositive deviation {}",
                p.gamma, p.l, p.s_asymptote
            )));
        }
    }
    let mut ls: Vec<usize> = points.iter().map(|p| p.l).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 3 {
        return Err(Error::invalid(format!(
            "rank-deficient design: the columns (L, 1, 1/L) are linearly dependent \
             over {} distinct L value(s); at least 3 distinct L are required to \
             separate a, b, and c",
            ls.len()
        )));
    }
    let rows: Vec<[f64; 3]> = points
        .iter()
        .map(|p| {
            let l = p.l as f64;
            [l, 1.0, 1.0 / l]
        })
        .collect();
    let y: Vec<f64> = points
        .iter()
        .map(|p| (p.gamma * p.gamma * p.s_asymptote).ln())
        .collect();
    let coef = solve_least_squares(&rows, &y)?;
    let residual = rms_residual(&rows, &y, &coef);
    Ok(ScalingFit { a: coef[0], b: coef[1], c: coef[2], residual })
}

/// First time after `t_min` at which the series begins to decrease:
/// the smallest grid time t_k > `t_min` whose forward difference
/// v_{k+1} − v_k drops below −`epsilon`·(running max of the series up
/// to k). Returns `None` when the series never decreases that way
/// (a clean asymptote); absence is a value, not an error.
///
/// The test is invariant under uniform positive rescaling of the values.
pub fn detect_onset(series: &TimeSeries, t_min: f64, epsilon: f64) -> Option<f64> {
    let times = series.times();
    let values = series.values();
    let mut running_max = f64::NEG_INFINITY;
    for k in 0..values.len() - 1 {
        running_max = running_max.max(values[k]);
        if times[k] <= t_min {
            continue;
        }
        let diff = values[k + 1] - values[k];
        if diff < -epsilon * running_max.max(0.0) && diff < 0.0 {
            return Some(times[k]);
        }
    }
    None
}

/// Ordinary least squares of t_s⁻² against γ. The divergence point is the
/// zero crossing γ₀ = −q/m of the fitted line m·γ + q, and t₀ = |m|^{−1/2}.
///
/// Requires at least three points with distinct γ, each with t_s > 0.
/// A degenerate (vanishing) slope is rejected: onset times that do not
/// vary with γ admit no divergence point.
pub fn fit_onset_divergence(points: &[(f64, f64)]) -> Result<OnsetFit> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "onset-divergence fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(gamma, t_s) in points {
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("onset point has non-finite gamma {gamma}")));
        }
        if !(t_s.is_finite() && t_s > 0.0) {
            return Err(Error::invalid(format!(
                "onset point at gamma={gamma} has nonpositive onset time {t_s}"
            )));
        }
    }
    let mut gammas: Vec<f64> = points.iter().map(|p| p.0).collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if gammas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("onset-divergence fit requires distinct gamma values"));
    }

    let rows: Vec<[f64; 2]> = points.iter().map(|p| [p.0, 1.0]).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.powi(-2)).collect();
    let coef = solve_least_squares(&rows, &y)?;
    let (m, q) = (coef[0], coef[1]);

    let x_range = gammas[gammas.len() - 1] - gammas[0];
    let y_scale = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !m.is_finite() || m.abs() * x_range <= 1e-12 * y_scale.max(f64::MIN_POSITIVE) {
        return Err(Error::analysis(
            "onset times do not vary with gamma (slope of t_s^-2 vs gamma is degenerate); \
             no divergence point is consistent with the model",
        ));
    }
    let gamma0 = -q / m;
    let t0 = m.abs().powf(-0.5);
    if !gamma0.is_finite() || !t0.is_finite() {
        return Err(Error::analysis(format!(
            "onset-divergence fit produced non-finite parameters (gamma0={gamma0}, t0={t0})"
        )));
    }
    let residual = rms_residual(&rows, &y, &coef);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();
    let ss_res: f64 = rows
        .iter()
        .zip(&y)
        .map(|(row, v)| (v - (coef[0] * row[0] + coef[1])).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(OnsetFit { gamma0, t0, residual, r_squared })
}

/// Least squares of ln(err) against t, restricted to samples with
/// `floor < err < ceiling`. Requires at least five in-band samples.
pub fn fit_growth(err: &TimeSeries, floor: f64, ceiling: f64) -> Result<GrowthFit> {
    if !(floor.is_finite() && ceiling.is_finite() && 0.0 < floor && floor < ceiling) {
        return Err(Error::invalid(format!(
            "invalid growth band ({floor}, {ceiling})"
        )));
    }
    if let Some(v) = err.values().iter().find(|v| **v < 0.0) {
        return Err(Error::invalid(format!(
            "error series '{}' has a negative entry {v}",
            err.label
        )));
    }
    let in_band: Vec<(f64, f64)> = err
        .times()
        .iter()
        .zip(err.values())
        .filter(|(_, v)| floor < **v && **v < ceiling)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if in_band.len() < 5 {
        return Err(Error::invalid(format!(
            "only {} samples of '{}' lie inside the band ({floor}, {ceiling}); \
             need at least 5 for a growth fit",
            in_band.len(),
            err.label
        )));
    }
    let rows: Vec<[f64; 2]> = in_band.iter().map(|p| [p.0, 1.0]).collect();
    let y: Vec<f64> = in_band.iter().map(|p| p.1).collect();
    let coef = solve_least_squares(&rows, &y)?;
    Ok(GrowthFit {
        rate: coef[0],
        intercept: coef[1],
        window: (in_band[0].0, in_band[in_band.len() - 1].0),
    })
}

/// Dense least squares min ‖A·x − y‖₂ for a short fixed column count.
///
/// Uses column equilibration followed by modified Gram-Schmidt QR with a
/// reorthogonalization pass, plus one step of iterative refinement; the
/// narrow (L, 1, 1/L) design is ill-conditioned enough that plain MGS
/// loses several digits.
fn solve_least_squares<const K: usize>(rows: &[[f64; K]], y: &[f64]) -> Result<[f64; K]> {
    let n = rows.len();
    debug_assert_eq!(n, y.len());
    if n < K {
        return Err(Error::invalid(format!(
            "least squares needs at least {K} rows, got {n}"
        )));
    }
    // Scale each column to unit norm; solve in scaled variables.
    let mut col_scale = [0.0f64; K];
    for (j, scale) in col_scale.iter_mut().enumerate() {
        let norm: f64 = rows.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid(format!(
                "rank-deficient design: column {j} is identically zero"
            )));
        }
        *scale = norm;
    }
    // Columns of Q (orthonormalized in place) and the triangular factor R.
    let mut q = vec![[0.0f64; K]; n];
    for (qi, row) in q.iter_mut().zip(rows) {
        for j in 0..K {
            qi[j] = row[j] / col_scale[j];
        }
    }
    let mut r = [[0.0f64; K]; K];
    for j in 0..K {
        // Two orthogonalization sweeps keep Q orthonormal to machine
        // precision even when the columns are nearly dependent.
        for _sweep in 0..2 {
            for i in 0..j {
                let dot: f64 = q.iter().map(|row| row[i] * row[j]).sum();
                r[i][j] += dot;
                for row in q.iter_mut() {
                    row[j] -= dot * row[i];
                }
            }
        }
        let norm: f64 = q.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
        if norm <= 1e-12 * (n as f64).sqrt() {
            return Err(Error::invalid(format!(
                "rank-deficient design: column {j} is linearly dependent on the others"
            )));
        }
        r[j][j] = norm;
        for row in q.iter_mut() {
            row[j] /= norm;
        }
    }

    let solve = |rhs: &[f64]| -> [f64; K] {
        let mut qty = [0.0f64; K];
        for (j, slot) in qty.iter_mut().enumerate() {
            *slot = q.iter().zip(rhs).map(|(row, v)| row[j] * v).sum();
        }
        let mut x = [0.0f64; K];
        for j in (0..K).rev() {
            let mut acc = qty[j];
            for i in j + 1..K {
                acc -= r[j][i] * x[i];
            }
            x[j] = acc / r[j][j];
        }
        x
    };

    let x = solve(y);
    // One refinement pass against the original (scaled) system.
    let residual: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(row, v)| {
            let fit: f64 = (0..K).map(|j| row[j] / col_scale[j] * x[j]).sum();
            v - fit
        })
        .collect();
    let delta = solve(&residual);
    let mut out = [0.0f64; K];
    for j in 0..K {
        out[j] = (x[j] + delta[j]) / col_scale[j];
    }
    Ok(out)
}

fn rms_residual<const K: usize>(rows: &[[f64; K]], y: &[f64], coef: &[f64; K]) -> f64 {
    let ss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, v)| {
            let fit: f64 = row.iter().zip(coef).map(|(a, b)| a * b).sum();
            (v - fit).powi(2)
        })
        .sum();
    (ss / rows.len() as f64).sqrt()
}
