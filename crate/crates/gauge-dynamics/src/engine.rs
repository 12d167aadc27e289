//! Patch-frame dynamics.
//!
//! The evolved objects are per-patch frames `U_I`, one full-dimension
//! unitary per patch, integrated under
//!
//! ```text
//!     d/dt U_I = -i G_I U_I,      G_I = H<I> + gamma * X_I,
//! ```
//!
//! where `H<I> = sum_{J: J overlaps I} U_IJ H_J U_JI` conjugates each
//! neighbouring local term into patch `I`'s frame through the connections
//! `U_IJ = U_I U_J^dag`, and `X_I` is the identity-driving term: the
//! partial trace over patch `I` of
//! `sum_J (-i)(U_IJ - U_IJ^dag)`, re-embedded so that it acts trivially
//! on patch `I`. At `gamma = 0` the dynamics is the plain patch-frame
//! picture; large `gamma` pins the connections near the identity.
//!
//! Everything physical is derived from the frames: local wavefunctions
//! `psi_I = U_I psi0`, connections, per-pair deviations
//! `S_IJ = 1 - Re Tr(U_IJ) / 2^L`. Because connections are literal frame
//! products, the cocycle identity `U_IJ U_JK = U_IK` and the relation
//! `psi_I = U_IJ psi_J` hold automatically up to floating-point noise;
//! the invariant sampler measures that noise rather than trusting it.
//!
//! The right-hand side is evaluated as `-i (U_I P_I + gamma X_I U_I)`
//! with `P_I = sum_J U_J^dag H_J U_J`, which equals `-i G_I U_I` whenever
//! the frames are unitary and extends it smoothly off the unitary
//! manifold (the flow of this extension preserves unitarity exactly, so
//! mid-step Runge-Kutta stage frames cause no order loss). Per stage this
//! costs about `3L` dense multiplies instead of the naive `L^2`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    apply_left_planned, apply_local_vec, embed_local, pair_trace, partial_trace_planned,
    polar_unitarize, random_hermitian, unitarity_residual, ComplexMatrix, SitePlan, StateVector,
};
use crate::model::{build_chain_cover, plus_x_state, tfim_patch_terms, LocalTerm, ModelSpec, PatchCover};
use crate::model::{sigma_x, sigma_z};

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Relative Hermiticity tolerance for registered local terms.
const TERM_HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on the initial state norm.
const NORM_TOL: f64 = 1e-10;
/// Unitarity tolerance for caller-supplied frames.
const UNITARITY_INIT_TOL: f64 = 1e-10;

/// How the reduced identity-driving term is embedded back onto the full
/// register. The two choices differ only by the constant factor `2^|I|`
/// absorbed into `gamma`: a literal-convention run at `gamma` is bitwise
/// identical to a normalized-convention run at `gamma · 2^|I|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XConvention {
    /// Plain partial trace tensored with the identity on the patch.
    Literal,
    /// Same, divided by the patch dimension `2^|I|` (the
    /// conditional-expectation normalization). This keeps the drive
    /// strength per patch independent of patch size: in these units the
    /// squiggle threshold sits near gamma ≈ 2.7 and gamma = 20 integrates
    /// stably at dt = 0.005, so it is the default.
    #[default]
    Normalized,
}

impl XConvention {
    fn factor(self, patch_dim: usize) -> f64 {
        match self {
            XConvention::Literal => 1.0,
            XConvention::Normalized => 1.0 / patch_dim as f64,
        }
    }
}

/// Integration parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Identity-driving strength. `0` runs the unmodified dynamics.
    pub gamma: f64,
    /// Time step.
    pub dt: f64,
    /// Final time (rounded to the nearest whole step).
    pub t_max: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
    pub convention: XConvention,
    /// Steps between polar re-unitarizations of the frames.
    pub unitarize_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            gamma: 0.0,
            dt: 0.005,
            t_max: 5.0,
            sample_stride: 1,
            convention: XConvention::Normalized,
            unitarize_every: 1,
        }
    }
}

impl EvolutionConfig {
    /// Validate, returning human-readable warnings for legal but unusual
    /// settings (negative `gamma` drives connections away from the
    /// identity; useful for sign-convention experiments).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return Err(Error::invalid(format!(
                "t_max must be non-negative and finite, got {}",
                self.t_max
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be finite"));
        }
        if self.sample_stride == 0 {
            return Err(Error::invalid("sample_stride must be at least 1"));
        }
        if self.unitarize_every == 0 {
            return Err(Error::invalid("unitarize_every must be at least 1"));
        }
        let mut warnings = Vec::new();
        if self.gamma < 0.0 {
            warnings.push(format!(
                "gamma = {} is negative: the identity-driving term will push connections away from the identity",
                self.gamma
            ));
        }
        Ok(warnings)
    }

    /// Number of whole steps covering `t_max`.
    pub fn n_steps(&self) -> u64 {
        (self.t_max / self.dt + 0.5).floor() as u64
    }
}

/// The evolving state: per-patch frames plus the frozen initial
/// wavefunction they act on.
#[derive(Debug, Clone)]
pub struct GaugeState {
    cover: Arc<PatchCover>,
    frames: Vec<ComplexMatrix>,
    psi0: StateVector,
    t: f64,
    step: u64,
}

impl GaugeState {
    /// All frames start at the identity, so every derived connection is
    /// the identity and every local wavefunction equals `psi0`.
    pub fn initial(cover: Arc<PatchCover>, psi0: StateVector) -> Result<Self> {
        let dim = cover.dim();
        if psi0.dim() != dim {
            return Err(Error::invalid(format!(
                "initial state has dimension {}, cover needs {dim}",
                psi0.dim()
            )));
        }
        if (psi0.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "initial state must be normalized (norm = {:.12})",
                psi0.norm()
            )));
        }
        let frames = (0..cover.len()).map(|_| ComplexMatrix::identity(dim)).collect();
        Ok(GaugeState { cover, frames, psi0, t: 0.0, step: 0 })
    }

    /// State at t = 0 with caller-supplied frames (one unitary per patch).
    /// Useful for probing the per-patch operators at arbitrary points of
    /// the configuration space rather than only along trajectories.
    pub fn with_frames(
        cover: Arc<PatchCover>,
        frames: Vec<ComplexMatrix>,
        psi0: StateVector,
    ) -> Result<Self> {
        let dim = cover.dim();
        if psi0.dim() != dim {
            return Err(Error::invalid(format!(
                "initial state has dimension {}, cover needs {dim}",
                psi0.dim()
            )));
        }
        if (psi0.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "initial state must be normalized (norm = {:.12})",
                psi0.norm()
            )));
        }
        if frames.len() != cover.len() {
            return Err(Error::invalid(format!(
                "got {} frames for {} patches",
                frames.len(),
                cover.len()
            )));
        }
        for (k, f) in frames.iter().enumerate() {
            if f.rows() != dim || f.cols() != dim {
                return Err(Error::invalid(format!(
                    "frame {k} is {}x{}, cover needs {dim}x{dim}",
                    f.rows(),
                    f.cols()
                )));
            }
            if !f.all_finite() {
                return Err(Error::invalid(format!("frame {k} has non-finite entries")));
            }
            if unitarity_residual(f) > UNITARITY_INIT_TOL {
                return Err(Error::invalid(format!(
                    "frame {k} is not unitary (residual {:.3e})",
                    unitarity_residual(f)
                )));
            }
        }
        Ok(GaugeState { cover, frames, psi0, t: 0.0, step: 0 })
    }

    pub fn cover(&self) -> &PatchCover {
        &self.cover
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }

    pub fn frame(&self, patch: usize) -> Result<&ComplexMatrix> {
        self.frames
            .get(patch)
            .ok_or_else(|| Error::invalid(format!("patch id {patch} out of range")))
    }

    pub fn frames(&self) -> &[ComplexMatrix] {
        &self.frames
    }

    /// Connection `U_IJ = U_I U_J^dag`.
    pub fn connection(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        let (fi, fj) = (self.frame(i)?, self.frame(j)?);
        fi.matmul_adj_b(fj)
    }

    /// Local wavefunction `psi_I = U_I psi0`.
    pub fn local_wavefunction(&self, patch: usize) -> Result<StateVector> {
        self.frame(patch)?.mul_vec(&self.psi0)
    }

    /// Deviation of a connection from the identity:
    /// `S_IJ = 1 - Re Tr(U_I U_J^dag) / 2^L`, in `[0, 2]`. Computed
    /// entrywise without forming the connection.
    pub fn s_deviation(&self, i: usize, j: usize) -> Result<f64> {
        let tr = pair_trace(self.frame(i)?, self.frame(j)?)?;
        Ok(1.0 - tr.re / self.cover.dim() as f64)
    }

    /// Largest frame unitarity defect.
    pub fn max_unitarity_residual(&self) -> f64 {
        self.frames.iter().map(unitarity_residual).fold(0.0, f64::max)
    }
}

/// What [`GaugeEngine::run`] records at each sample.
#[derive(Debug, Clone)]
pub struct ObservableRequest {
    /// Per-site `<sigma^x>` and `<sigma^z>`, read from each site's owner
    /// patch.
    pub record_sites: bool,
    /// Per-pair deviations `S_IJ` plus their mean.
    pub record_pairs: bool,
    /// Patch-resolved energy (see [`RunRecord::energy`]).
    pub record_energy: bool,
    /// Expensive structural checks per sample (unitarity, cocycle and
    /// wavefunction-consistency residuals, commutant spot checks).
    pub check_invariants: bool,
}

impl Default for ObservableRequest {
    fn default() -> Self {
        ObservableRequest {
            record_sites: true,
            record_pairs: true,
            record_energy: true,
            check_invariants: false,
        }
    }
}

/// Structural residuals measured at one sample time.
#[derive(Debug, Clone, Copy)]
pub struct InvariantSample {
    pub t: f64,
    /// Max over frames of the unitarity defect.
    pub unitarity: f64,
    /// Max cocycle residual `||U_IJ U_JK - U_IK||_F` over sampled triples.
    pub flatness: f64,
    /// Max of `|| psi_I - U_IJ psi_J ||` over connected pairs.
    pub consistency: f64,
    /// Max commutator norm `||[X_I, A_I]||_F` over random patch-supported
    /// Hermitian `A_I`.
    pub commutant: f64,
    pub s_min: f64,
    pub s_max: f64,
}

/// Time-resolved output of one run. Outer index of the per-site and
/// per-pair vectors is the site / pair, inner index is the sample.
#[derive(Debug, Clone, Default)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub sx: Vec<Vec<f64>>,
    pub sz: Vec<Vec<f64>>,
    /// Pair order follows [`PatchCover::pairs`].
    pub s_pairs: Vec<Vec<f64>>,
    pub s_mean: Vec<f64>,
    /// Patch-resolved energy `sum_J <psi_J| H_J |psi_J>`: every local
    /// term is read from a frame that contains its support, so the sum
    /// tracks the conserved total energy of the underlying dynamics (a
    /// frame-independent quantity, unlike expectations of operators that
    /// leave a patch).
    pub energy: Vec<f64>,
    /// Max frame unitarity defect per sample.
    pub unitarity: Vec<f64>,
    /// Filled only when requested.
    pub invariants: Vec<InvariantSample>,
}

impl RunRecord {
    /// Largest drift of the energy series from its initial value.
    pub fn energy_drift(&self) -> f64 {
        match self.energy.first() {
            Some(&e0) => self.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max),
            None => 0.0,
        }
    }
}

/// Number of random commutant spot checks per invariant sample.
const COMMUTANT_DRAWS: usize = 20;
/// Seed base for the commutant draws (fixed: invariant sampling must be
/// deterministic).
const COMMUTANT_SEED: u64 = 0x9a3c_52f7;

/// Holds the cover and registered local terms; stateless between calls
/// apart from cached index plans.
#[derive(Debug, Clone)]
pub struct GaugeEngine {
    cover: Arc<PatchCover>,
    terms: Vec<LocalTerm>,
    /// Per patch: plan for its own sites (term application, partial
    /// traces over the patch).
    patch_plans: Vec<SitePlan>,
    /// Per patch: plan for the complement sites (re-embedding the reduced
    /// identity-driving term). `None` when the patch covers the whole
    /// register, in which case the reduction is a scalar.
    rest_plans: Vec<Option<SitePlan>>,
}

impl GaugeEngine {
    /// Register one Hermitian local term per patch. `terms[k]` must carry
    /// `patch == k`.
    pub fn new(cover: Arc<PatchCover>, terms: Vec<LocalTerm>) -> Result<Self> {
        if terms.len() != cover.len() {
            return Err(Error::invalid(format!(
                "need exactly one local term per patch: {} patches, {} terms",
                cover.len(),
                terms.len()
            )));
        }
        let l = cover.l();
        let mut patch_plans = Vec::with_capacity(cover.len());
        let mut rest_plans = Vec::with_capacity(cover.len());
        for (k, term) in terms.iter().enumerate() {
            if term.patch != k {
                return Err(Error::invalid(format!(
                    "term {k} is attached to patch {}, expected {k}",
                    term.patch
                )));
            }
            let sites = &cover.patch(k).sites;
            let dim = 1usize << sites.len();
            let m = &term.matrix;
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::invalid(format!(
                    "term {k} is {}x{} but its {}-site patch requires {dim}x{dim}",
                    m.rows(),
                    m.cols(),
                    sites.len()
                )));
            }
            if !m.all_finite() {
                return Err(Error::invalid(format!("term {k} has non-finite entries")));
            }
            if m.hermiticity_residual() > TERM_HERMITIAN_TOL * (1.0 + m.frobenius_norm()) {
                return Err(Error::invalid(format!(
                    "term {k} is not Hermitian (residual {:.3e})",
                    m.hermiticity_residual()
                )));
            }
            patch_plans.push(SitePlan::new(sites, l)?);
            let rest = patch_plans[k].rest_sites();
            rest_plans.push(if rest.is_empty() { None } else { Some(SitePlan::new(&rest, l)?) });
        }
        Ok(GaugeEngine { cover, terms, patch_plans, rest_plans })
    }

    /// Ring cover plus bond terms for the Ising model.
    pub fn from_model(spec: &ModelSpec) -> Result<Self> {
        let cover = Arc::new(build_chain_cover(spec.l)?);
        let terms = tfim_patch_terms(spec, &cover)?;
        GaugeEngine::new(cover, terms)
    }

    pub fn cover(&self) -> &Arc<PatchCover> {
        &self.cover
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Fresh state with identity frames.
    pub fn init_state(&self, psi0: StateVector) -> Result<GaugeState> {
        GaugeState::initial(Arc::clone(&self.cover), psi0)
    }

    fn check_state(&self, state: &GaugeState) -> Result<()> {
        if !Arc::ptr_eq(&self.cover, &state.cover) && *state.cover != *self.cover {
            return Err(Error::invalid("state was built over a different patch cover"));
        }
        Ok(())
    }

    // ----- literal-definition views (diagnostics and tests) -----

    /// `H<I> = sum_{J overlapping I} U_IJ H_J U_JI`, built from explicit
    /// connections.
    pub fn effective_hamiltonian(&self, state: &GaugeState, i: usize) -> Result<ComplexMatrix> {
        self.check_state(state)?;
        let dim = self.cover.dim();
        let mut acc = ComplexMatrix::new_zero(dim, dim);
        for &j in self.cover.overlapping(i) {
            let c = state.connection(i, j)?;
            // U_IJ H_J U_JI = C * (H_J * C^dag)
            let hcd = apply_left_planned(&self.terms[j].matrix, &self.patch_plans[j], &c.adjoint())?;
            let sandwich = c.matmul(&hcd)?;
            acc.add_assign_scaled(&sandwich, Complex64::new(1.0, 0.0))?;
        }
        Ok(acc)
    }

    /// `sum_{J overlapping I} (-i)(U_IJ - U_IJ^dag)`. The `J = I` summand
    /// is skipped: `U_II = U_I U_I^dag` is Hermitian for any frame, so its
    /// contribution is identically zero.
    pub fn xtilde(&self, state: &GaugeState, i: usize) -> Result<ComplexMatrix> {
        self.check_state(state)?;
        let dim = self.cover.dim();
        let mut acc = ComplexMatrix::new_zero(dim, dim);
        for &j in self.cover.overlapping(i) {
            if j == i {
                continue;
            }
            let c = state.connection(i, j)?;
            let anti = c.sub(&c.adjoint())?;
            acc.add_assign_scaled(&anti, MINUS_I)?;
        }
        Ok(acc)
    }

    /// The identity-driving term: partial trace of [`Self::xtilde`] over
    /// patch `I`, embedded back so it acts as the identity on the patch.
    pub fn x_term(
        &self,
        state: &GaugeState,
        i: usize,
        convention: XConvention,
    ) -> Result<ComplexMatrix> {
        let xt = self.xtilde(state, i)?;
        let reduced = partial_trace_planned(&xt, &self.patch_plans[i])?;
        let factor = convention.factor(self.patch_plans[i].op_dim);
        let full = match &self.rest_plans[i] {
            Some(rest) => embed_local(&reduced, &rest.sites, self.cover.l())?,
            None => ComplexMatrix::identity(self.cover.dim()).scale(reduced.get(0, 0)),
        };
        Ok(full.scale(Complex64::new(factor, 0.0)))
    }

    /// `G_I = H<I> + gamma X_I`.
    pub fn generator(
        &self,
        state: &GaugeState,
        i: usize,
        gamma: f64,
        convention: XConvention,
    ) -> Result<ComplexMatrix> {
        let mut g = self.effective_hamiltonian(state, i)?;
        if gamma != 0.0 {
            let x = self.x_term(state, i, convention)?;
            g.add_assign_scaled(&x, Complex64::new(gamma, 0.0))?;
        }
        Ok(g)
    }

    /// `<psi_I| op |psi_I>` for a Hermitian `op` given in the patch-local
    /// basis (first patch site = low bit).
    pub fn local_expectation(
        &self,
        state: &GaugeState,
        i: usize,
        op: &ComplexMatrix,
    ) -> Result<f64> {
        self.check_state(state)?;
        let sites = &self.cover.patch(i).sites;
        let dim = 1usize << sites.len();
        if op.rows() != dim || op.cols() != dim {
            return Err(Error::invalid(format!(
                "operator is {}x{}, not supported on the {}-site patch {i} (needs {dim}x{dim})",
                op.rows(),
                op.cols(),
                sites.len()
            )));
        }
        if op.hermiticity_residual() > TERM_HERMITIAN_TOL * (1.0 + op.frobenius_norm()) {
            return Err(Error::invalid("observable must be Hermitian"));
        }
        let psi = state.local_wavefunction(i)?;
        let image = apply_local_vec(op, sites, self.cover.l(), psi.amplitudes())?;
        let image = StateVector::from_vec(image)?;
        Ok(psi.inner(&image)?.re)
    }

    /// `<psi_I| op_site |psi_I>` where `I` is the patch owning `site` and
    /// `op` is a single-site Hermitian operator.
    pub fn site_expectation(
        &self,
        state: &GaugeState,
        site: usize,
        op: &ComplexMatrix,
    ) -> Result<f64> {
        self.check_state(state)?;
        if op.rows() != 2 || op.cols() != 2 {
            return Err(Error::invalid("site operator must be 2x2"));
        }
        let owner = self.cover.owner_of(site)?;
        let psi = state.local_wavefunction(owner)?;
        let image = apply_local_vec(op, &[site], self.cover.l(), psi.amplitudes())?;
        let image = StateVector::from_vec(image)?;
        Ok(psi.inner(&image)?.re)
    }

    /// Patch-resolved energy (see [`RunRecord::energy`]).
    pub fn energy(&self, state: &GaugeState) -> Result<f64> {
        self.check_state(state)?;
        let l = self.cover.l();
        let mut total = 0.0;
        for (k, term) in self.terms.iter().enumerate() {
            let psi = state.local_wavefunction(k)?;
            let image =
                apply_local_vec(&term.matrix, &self.cover.patch(k).sites, l, psi.amplitudes())?;
            let image = StateVector::from_vec(image)?;
            total += psi.inner(&image)?.re;
        }
        Ok(total)
    }

    // ----- integration -----

    /// Right-hand side `-i (U_I P_I + gamma X_I U_I)` for every patch,
    /// evaluated on an arbitrary frame tuple (Runge-Kutta stage values
    /// included). See the module docs for why this extension of
    /// `-i G_I U_I` is the one integrated.
    fn derivative(
        &self,
        frames: &[ComplexMatrix],
        gamma: f64,
        convention: XConvention,
    ) -> Result<Vec<ComplexMatrix>> {
        let n = self.cover.len();
        // M_J = U_J^dag (H_J U_J): one sparse local apply + one adjoint GEMM.
        let m_list: Vec<ComplexMatrix> = (0..n)
            .into_par_iter()
            .map(|j| {
                let hu = apply_left_planned(&self.terms[j].matrix, &self.patch_plans[j], &frames[j])?;
                frames[j].matmul_adj_a(&hu)
            })
            .collect::<Result<_>>()?;

        // Reduced identity-driving terms, one per patch, from pair
        // connections C = U_i U_j^dag. Partial traces commute with the
        // dagger, so each pair contributes its traced connection to both
        // endpoint patches without forming any X matrix at full dimension.
        let reduced: Vec<Option<ComplexMatrix>> = if gamma != 0.0 {
            let pairs = self.cover.pairs();
            let connections: Vec<ComplexMatrix> = pairs
                .par_iter()
                .map(|&(i, j)| frames[i].matmul_adj_b(&frames[j]))
                .collect::<Result<_>>()?;
            let mut acc: Vec<Option<ComplexMatrix>> = vec![None; n];
            let mut add = |patch: usize, contrib: ComplexMatrix| match &mut acc[patch] {
                Some(m) => m.add_assign_scaled(&contrib, Complex64::new(1.0, 0.0)),
                slot @ None => {
                    *slot = Some(contrib);
                    Ok(())
                }
            };
            for (&(i, j), c) in pairs.iter().zip(&connections) {
                // Patch i sees C, patch j sees C^dag.
                let di = partial_trace_planned(c, &self.patch_plans[i])?;
                add(i, di.sub(&di.adjoint())?.scale(MINUS_I))?;
                let dj = partial_trace_planned(c, &self.patch_plans[j])?;
                add(j, dj.adjoint().sub(&dj)?.scale(MINUS_I))?;
            }
            acc
        } else {
            vec![None; n]
        };

        (0..n)
            .into_par_iter()
            .map(|i| {
                // P_I: fixed ascending-neighbour order for determinism.
                let overlapping = self.cover.overlapping(i);
                let mut p = m_list[overlapping[0]].clone();
                for &j in &overlapping[1..] {
                    p.add_assign_scaled(&m_list[j], Complex64::new(1.0, 0.0))?;
                }
                let mut w = frames[i].matmul(&p)?;
                if let Some(r) = &reduced[i] {
                    let factor = gamma * convention.factor(self.patch_plans[i].op_dim);
                    let xu = match &self.rest_plans[i] {
                        Some(rest) => apply_left_planned(r, rest, &frames[i])?,
                        None => frames[i].scale(r.get(0, 0)),
                    };
                    w.add_assign_scaled(&xu, Complex64::new(factor, 0.0))?;
                }
                Ok(w.scale(MINUS_I))
            })
            .collect()
    }

    /// One classical four-stage Runge-Kutta step over all frames, with
    /// the right-hand side rebuilt from the provisional frames at every
    /// stage, followed by polar re-unitarization when due.
    pub fn rk4_step(&self, state: &mut GaugeState, config: &EvolutionConfig) -> Result<()> {
        self.check_state(state)?;
        let (gamma, dt, conv) = (config.gamma, config.dt, config.convention);

        let add_tuple = |dst: &mut Vec<ComplexMatrix>, src: &[ComplexMatrix], w: f64| -> Result<()> {
            for (d, s) in dst.iter_mut().zip(src) {
                d.add_assign_scaled(s, Complex64::new(w, 0.0))?;
            }
            Ok(())
        };
        let offset = |base: &[ComplexMatrix], k: &[ComplexMatrix], w: f64| -> Result<Vec<ComplexMatrix>> {
            let mut out = base.to_vec();
            add_tuple(&mut out, k, w)?;
            Ok(out)
        };

        let k1 = self.derivative(&state.frames, gamma, conv)?;
        let mut acc = offset(&state.frames, &k1, dt / 6.0)?;
        let stage = offset(&state.frames, &k1, dt / 2.0)?;
        drop(k1);

        let k2 = self.derivative(&stage, gamma, conv)?;
        drop(stage);
        add_tuple(&mut acc, &k2, dt / 3.0)?;
        let stage = offset(&state.frames, &k2, dt / 2.0)?;
        drop(k2);

        let k3 = self.derivative(&stage, gamma, conv)?;
        drop(stage);
        add_tuple(&mut acc, &k3, dt / 3.0)?;
        let stage = offset(&state.frames, &k3, dt)?;
        drop(k3);

        let k4 = self.derivative(&stage, gamma, conv)?;
        drop(stage);
        add_tuple(&mut acc, &k4, dt / 6.0)?;
        drop(k4);

        state.frames = acc;
        state.step += 1;
        state.t = state.step as f64 * dt;

        if state.step.is_multiple_of(config.unitarize_every as u64) {
            let t = state.t;
            let unitarized: Vec<ComplexMatrix> = state
                .frames
                .par_iter()
                .enumerate()
                .map(|(patch, f)| {
                    if !f.all_finite() {
                        return Err(Error::Instability {
                            t,
                            patch,
                            detail: "frame left the finite range".into(),
                        });
                    }
                    polar_unitarize(f).map_err(|e| Error::Instability {
                        t,
                        patch,
                        detail: e.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            state.frames = unitarized;
        }
        Ok(())
    }

    /// Integrate from `psi0` (identity frames) to `t_max`, recording the
    /// requested observables at `t = 0`, every `sample_stride` steps, and
    /// the final step.
    pub fn run(
        &self,
        psi0: StateVector,
        config: &EvolutionConfig,
        request: &ObservableRequest,
    ) -> Result<RunRecord> {
        config.validate()?;
        let mut state = self.init_state(psi0)?;
        let n_steps = config.n_steps();
        let l = self.cover.l();
        let n_pairs = self.cover.pairs().len();

        let mut record = RunRecord::default();
        if request.record_sites {
            record.sx = vec![Vec::new(); l];
            record.sz = vec![Vec::new(); l];
        }
        if request.record_pairs {
            record.s_pairs = vec![Vec::new(); n_pairs];
        }
        let owners: Vec<usize> =
            (0..l).map(|s| self.cover.owner_of(s)).collect::<Result<_>>()?;
        let (sx_op, sz_op) = (sigma_x(), sigma_z());

        self.sample(&state, config, request, &owners, &sx_op, &sz_op, &mut record)?;
        for step in 1..=n_steps {
            self.rk4_step(&mut state, config)?;
            if step % config.sample_stride as u64 == 0 || step == n_steps {
                self.sample(&state, config, request, &owners, &sx_op, &sz_op, &mut record)?;
            }
        }
        Ok(record)
    }

    #[allow(clippy::too_many_arguments)]
    fn sample(
        &self,
        state: &GaugeState,
        config: &EvolutionConfig,
        request: &ObservableRequest,
        owners: &[usize],
        sx_op: &ComplexMatrix,
        sz_op: &ComplexMatrix,
        record: &mut RunRecord,
    ) -> Result<()> {
        let l = self.cover.l();
        record.times.push(state.t);
        if request.record_sites {
            // One local wavefunction per owner patch, reused for both ops.
            for site in 0..l {
                let psi = state.local_wavefunction(owners[site])?;
                for (op, dst) in [(sx_op, &mut record.sx), (sz_op, &mut record.sz)] {
                    let image = apply_local_vec(op, &[site], l, psi.amplitudes())?;
                    let image = StateVector::from_vec(image)?;
                    dst[site].push(psi.inner(&image)?.re);
                }
            }
        }
        let mut s_values = Vec::with_capacity(self.cover.pairs().len());
        if request.record_pairs || request.check_invariants {
            for &(i, j) in self.cover.pairs() {
                s_values.push(state.s_deviation(i, j)?);
            }
        }
        if request.record_pairs {
            for (dst, s) in record.s_pairs.iter_mut().zip(&s_values) {
                dst.push(*s);
            }
            let mean = s_values.iter().sum::<f64>() / s_values.len().max(1) as f64;
            record.s_mean.push(mean);
        }
        if request.record_energy {
            record.energy.push(self.energy(state)?);
        }
        record.unitarity.push(state.max_unitarity_residual());
        if request.check_invariants {
            record
                .invariants
                .push(self.invariant_sample(state, config.convention, &s_values)?);
        }
        Ok(())
    }

    /// Measure the structural residuals at the current state: frame
    /// unitarity, cocycle identity over connected triples, wavefunction
    /// consistency over connected pairs, and `[X_I, A_I]` commutant spot
    /// checks with seeded random patch-supported Hermitian operators.
    pub fn invariant_sample(
        &self,
        state: &GaugeState,
        convention: XConvention,
        s_values: &[f64],
    ) -> Result<InvariantSample> {
        self.check_state(state)?;
        let n = self.cover.len();
        let l = self.cover.l();

        let mut flatness: f64 = 0.0;
        for j in 0..n {
            let neighbours: Vec<usize> =
                self.cover.overlapping(j).iter().copied().filter(|&x| x != j).collect();
            for (a, &i) in neighbours.iter().enumerate() {
                for &k in &neighbours[a + 1..] {
                    let cij = state.connection(i, j)?;
                    let cjk = state.connection(j, k)?;
                    let cik = state.connection(i, k)?;
                    let res = cij.matmul(&cjk)?.sub(&cik)?.frobenius_norm();
                    flatness = flatness.max(res);
                }
            }
        }

        let mut consistency: f64 = 0.0;
        for &(i, j) in self.cover.pairs() {
            for (a, b) in [(i, j), (j, i)] {
                let psi_a = state.local_wavefunction(a)?;
                let psi_b = state.local_wavefunction(b)?;
                // U_AB psi_B, evaluated as U_A (U_B^dag psi_B).
                let mid = state.frame(b)?.adjoint().mul_vec(&psi_b)?;
                let via = state.frame(a)?.mul_vec(&mid)?;
                consistency = consistency.max(psi_a.distance(&via)?);
            }
        }

        let mut commutant: f64 = 0.0;
        for draw in 0..COMMUTANT_DRAWS {
            let patch = draw % n;
            let sites = &self.cover.patch(patch).sites;
            let dim = 1usize << sites.len();
            let seed = COMMUTANT_SEED ^ (state.step << 8) ^ draw as u64;
            let a_local = random_hermitian(dim, seed);
            let x = self.x_term(state, patch, convention)?;
            let a_full = embed_local(&a_local, sites, l)?;
            let comm = x.matmul(&a_full)?.sub(&a_full.matmul(&x)?)?;
            commutant = commutant.max(comm.frobenius_norm());
        }

        let (s_min, s_max) = s_values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
        Ok(InvariantSample {
            t: state.t(),
            unitarity: state.max_unitarity_residual(),
            flatness,
            consistency,
            commutant,
            s_min: if s_values.is_empty() { 0.0 } else { s_min },
            s_max: if s_values.is_empty() { 0.0 } else { s_max },
        })
    }
}

/// Build the ring-cover engine for `spec` and run one quench from the
/// all-`+x` product state.
pub fn run(
    spec: &ModelSpec,
    config: &EvolutionConfig,
    request: &ObservableRequest,
) -> Result<RunRecord> {
    let engine = GaugeEngine::from_model(spec)?;
    engine.run(plus_x_state(spec.l)?, config, request)
}
