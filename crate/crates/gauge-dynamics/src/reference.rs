//! Exact fixed-frame evolution, used as the comparison baseline.
//!
//! For a time-independent Hamiltonian the step propagator
//! `U = exp(-i H dt)` is computed once; repeated application gives the
//! wavefunction on a uniform time grid to machine accuracy (up to the
//! propagator's own construction tolerance). This is dense linear
//! algebra on the full `2^L`-dimensional space, so it is only intended
//! for the small registers the library supports.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_antihermitian, ComplexMatrix, StateVector};

/// Relative Hermiticity tolerance for accepted Hamiltonians.
const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance passed to the matrix exponential.
const EXP_TOL: f64 = 1e-13;

fn check_hermitian(h: &ComplexMatrix, what: &str) -> Result<()> {
    let res = h.hermiticity_residual();
    if res > HERMITIAN_TOL * (1.0 + h.frobenius_norm()) {
        return Err(Error::invalid(format!(
            "{what} is not Hermitian: residual {res:.3e}"
        )));
    }
    Ok(())
}

/// A fixed-step exact propagator `exp(-i H dt)`.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    u: ComplexMatrix,
    dt: f64,
}

impl ExactPropagator {
    /// Build the propagator. `h` must be square and Hermitian, `dt`
    /// positive and finite.
    pub fn build(h: &ComplexMatrix, dt: f64) -> Result<Self> {
        if h.rows() != h.cols() {
            return Err(Error::invalid("Hamiltonian must be square"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("step size must be positive, got {dt}")));
        }
        check_hermitian(h, "Hamiltonian")?;
        let g = h.scale(Complex64::new(0.0, -dt)); // -i H dt
        let u = expm_antihermitian(&g, EXP_TOL)?;
        Ok(ExactPropagator { u, dt })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    /// Advance a state by one step.
    pub fn step(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "state dimension {} does not match propagator dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        self.u.mul_vec(psi)
    }
}

/// Evolve `psi0` for `n_steps` steps, recording `(t, psi)` every
/// `stride` steps. The initial state is recorded at `t = 0`; the final
/// step is always recorded.
pub fn evolve_exact(
    prop: &ExactPropagator,
    psi0: &StateVector,
    n_steps: usize,
    stride: usize,
) -> Result<Vec<(f64, StateVector)>> {
    if stride == 0 {
        return Err(Error::invalid("sample stride must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_steps / stride + 2);
    out.push((0.0, psi0.clone()));
    let mut psi = psi0.clone();
    for step in 1..=n_steps {
        psi = prop.step(&psi)?;
        if step % stride == 0 || step == n_steps {
            out.push((step as f64 * prop.dt(), psi.clone()));
        }
    }
    Ok(out)
}

/// Real expectation value `<psi|op|psi>` of a Hermitian operator.
pub fn expectation(op: &ComplexMatrix, psi: &StateVector) -> Result<f64> {
    if op.rows() != op.cols() || op.rows() != psi.dim() {
        return Err(Error::invalid(format!(
            "operator is {}x{} but the state has dimension {}",
            op.rows(),
            op.cols(),
            psi.dim()
        )));
    }
    check_hermitian(op, "observable")?;
    let image = op.mul_vec(psi)?;
    let val = psi.inner(&image)?;
    Ok(val.re)
}
