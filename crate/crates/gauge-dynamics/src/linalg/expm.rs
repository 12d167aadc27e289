//! Matrix exponential of anti-Hermitian input via scaling-and-squaring
//! with a truncated Taylor series.
//!
//! The argument is halved until its infinity norm is at most 1/2, the
//! series is evaluated in Horner form with enough terms for the requested
//! tolerance, and the result is squared back up. For anti-Hermitian input
//! the exact exponential is unitary, which the validation relies on.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Anti-Hermiticity acceptance threshold (Frobenius, relative to scale).
const ANTIHERM_TOL: f64 = 1e-10;
/// Target norm of the scaled argument.
const SCALED_NORM: f64 = 0.5;
/// Hard cap on Taylor terms (reached only for absurd tolerances).
const MAX_TERMS: usize = 60;

/// `exp(g)` for anti-Hermitian `g` (i.e. `g = -i H dt` with `H` Hermitian).
///
/// `tol` controls the Taylor truncation of the scaled series; the overall
/// accuracy is of the same order. Rejects non-square and non-anti-Hermitian
/// input and tolerances outside `(0, 1e-2]`.
pub fn expm_antihermitian(g: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    if !g.is_square() {
        return Err(Error::invalid(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::invalid(format!(
            "exponential tolerance {tol} outside supported range (0, 1e-2]"
        )));
    }
    if !g.all_finite() {
        return Err(Error::invalid("matrix exponential input must be finite"));
    }
    // g^dag = -g check: reuse the Hermiticity residual of i*g.
    let ig = g.scale(Complex64::new(0.0, 1.0));
    let scale = 1.0 + g.frobenius_norm();
    if ig.hermiticity_residual() > ANTIHERM_TOL * scale {
        return Err(Error::invalid(
            "matrix exponential input must be anti-Hermitian (g^dag = -g)",
        ));
    }

    let n = g.rows();
    let norm = g.inf_norm();
    let s = if norm <= SCALED_NORM {
        0
    } else {
        (norm / SCALED_NORM).log2().ceil() as u32
    };
    let x = g.scale(Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0));

    // Smallest K with a series remainder below tol at ||x|| <= 1/2:
    // remainder <= 0.5^(K+1)/(K+1)! * 1/(1 - 0.5/(K+2)).
    let mut terms = 1usize;
    let mut bound = SCALED_NORM * SCALED_NORM / 2.0; // 0.5^2/2!
    while bound / (1.0 - SCALED_NORM / (terms as f64 + 2.0)) > tol && terms < MAX_TERMS {
        terms += 1;
        bound *= SCALED_NORM / (terms as f64 + 1.0);
    }

    // Horner: P = 1 + x (1 + x/2 (1 + x/3 (...)))
    let id = ComplexMatrix::identity(n);
    let mut p = id.clone();
    for k in (1..=terms).rev() {
        let xp = x.matmul(&p)?;
        p = id.add(&xp.scale(Complex64::new(1.0 / k as f64, 0.0)))?;
    }
    for _ in 0..s {
        p = p.matmul(&p)?;
    }
    Ok(p)
}
