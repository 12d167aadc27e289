//! Simulation engine for patch-local ("gauge picture") quantum dynamics.
//!
//! A chain of qubits is covered by overlapping patches. Instead of one
//! global wavefunction, every patch `I` carries a frame unitary `U_I`;
//! the local wavefunction is `psi_I = U_I psi(0)` and the connection
//! between overlapping patches is `U_IJ = U_I U_J^dag`. Frames evolve
//! under patch-local generators
//!
//! ```text
//!     d/dt U_I = -i G_I U_I,      G_I = H<I> + gamma * X_I,
//! ```
//!
//! where `H<I>` is the connection-dressed sum of local Hamiltonian terms
//! overlapping `I` and `X_I` is a drive (computed from the anti-Hermitian
//! part of the connections, partially traced over patch `I`) that pushes
//! connections toward the identity without touching local observables.
//!
//! Modules:
//! - [`linalg`]: dense complex matrices, GEMM kernel, local-operator
//!   embedding, matrix exponential, polar unitarization.
//! - [`model`]: transverse+longitudinal-field Ising chain, patch covers.
//! - [`engine`]: the frame integrator (classical RK4, re-unitarized).
//! - [`reference`]: exact Schroedinger propagation for cross-checks.
//! - [`metrics`]: connection deviation `S_IJ` and picture comparisons.
//! - [`analysis`]: asymptote extraction, scaling/onset/growth fits.
//!
//! Basis convention used everywhere: site `k` is bit `k` of the
//! computational-basis index (site 0 is the least-significant bit).

pub mod analysis;
pub mod engine;
mod error;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod reference;

pub use error::{Error, Result};
