//! Scalar time-series diagnostics comparing runs against each other and
//! against the exact baseline.

use crate::engine::GaugeState;
use crate::error::{Error, Result};

/// A labelled real-valued series on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub label: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "series has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::invalid("series must not be empty"));
        }
        if !times.iter().all(|t| t.is_finite()) || !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("series entries must be finite"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("series times must be strictly increasing"));
        }
        Ok(TimeSeries { label: label.into(), times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty series
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Deviation of one connection from the identity (see
/// [`GaugeState::s_deviation`]; this is the free-function spelling used
/// by the analysis layer).
pub fn s_deviation(state: &GaugeState, i: usize, j: usize) -> Result<f64> {
    state.s_deviation(i, j)
}

/// Pointwise absolute difference of two series on the same grid.
pub fn picture_error(gauge: &TimeSeries, exact: &TimeSeries) -> Result<TimeSeries> {
    if gauge.len() != exact.len() {
        return Err(Error::invalid(format!(
            "series length mismatch: {} vs {}",
            gauge.len(),
            exact.len()
        )));
    }
    for (a, b) in gauge.times.iter().zip(&exact.times) {
        if (a - b).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "time grids differ at t = {a} vs {b}"
            )));
        }
    }
    let values = gauge
        .values
        .iter()
        .zip(&exact.values)
        .map(|(g, e)| (g - e).abs())
        .collect();
    TimeSeries::new(
        format!("|{} - {}|", gauge.label, exact.label),
        gauge.times.clone(),
        values,
    )
}
