//! Spin-chain model and patch covers.
//!
//! The Hamiltonian is an Ising chain in transverse and longitudinal
//! fields on a periodic ring of `L` sites,
//!
//! ```text
//!     H = -J sum_<ij> Z_i Z_j - h_x sum_i X_i - h_z sum_i Z_i,
//! ```
//!
//! split into one local term per nearest-neighbour bond; the field terms
//! are shared half-and-half between the two bonds containing a site, so
//! the embedded bond terms sum exactly to `H`. Patches are the bonds
//! themselves: patch `i` covers sites `(i, i+1 mod L)`.
//!
//! The engine itself is cover-agnostic: any list of patches with their
//! (Hermitian) local terms is accepted. This module provides the ring
//! cover used throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{embed_local, kron, ComplexMatrix, StateVector, EMBED_SITE_CAP};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pauli X.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(0.0), c(1.0), c(1.0), c(0.0)]).expect("const")
}

/// Pauli Y.
pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(
        2,
        2,
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
        ],
    )
    .expect("const")
}

/// Pauli Z. Basis rule: `|0>` is the +1 eigenstate.
pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![c(1.0), c(0.0), c(0.0), c(-1.0)]).expect("const")
}

/// Model parameters for the periodic Ising chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    /// Number of sites (ring length), at least 3.
    pub l: usize,
    /// Bond coupling.
    pub j: f64,
    /// Transverse field.
    pub h_x: f64,
    /// Longitudinal field.
    pub h_z: f64,
}

impl ModelSpec {
    pub fn new(l: usize, j: f64, h_x: f64, h_z: f64) -> Result<Self> {
        let spec = ModelSpec { l, j, h_x, h_z };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 3 {
            return Err(Error::invalid(format!(
                "ring length {} too short: overlapping bond patches need L >= 3",
                self.l
            )));
        }
        for (name, v) in [("j", self.j), ("h_x", self.h_x), ("h_z", self.h_z)] {
            if !v.is_finite() {
                return Err(Error::invalid(format!("model parameter {name} must be finite")));
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1 << self.l
    }
}

/// A patch: an ordered list of distinct sites. The first listed site is
/// the least-significant bit of the patch-local basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub sites: Vec<usize>,
}

impl Patch {
    pub fn new(sites: Vec<usize>) -> Self {
        Patch { sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: usize) -> bool {
        self.sites.contains(&site)
    }

    fn overlaps(&self, other: &Patch) -> bool {
        self.sites.iter().any(|s| other.contains(*s))
    }
}

/// A set of patches covering an `L`-site register, with precomputed
/// overlap structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchCover {
    l: usize,
    patches: Vec<Patch>,
    /// For each patch, the ascending ids of patches sharing at least one
    /// site with it — including the patch itself.
    overlaps: Vec<Vec<usize>>,
    /// Unordered pairs (i, j), i != j, of overlapping patches. For the
    /// ring cover these are listed in bond order: pair k = {k, k+1 mod L}.
    pairs: Vec<(usize, usize)>,
}

impl PatchCover {
    /// Build a cover from arbitrary patches. Every site in `0..l` must be
    /// covered and every patch must be non-empty with distinct in-range
    /// sites. Pairs are listed lexicographically.
    pub fn new(l: usize, patches: Vec<Patch>) -> Result<Self> {
        if patches.is_empty() {
            return Err(Error::invalid("a patch cover needs at least one patch"));
        }
        let mut covered = vec![false; l];
        for (id, p) in patches.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::invalid(format!("patch {id} is empty")));
            }
            let mut seen = vec![false; l];
            for &s in &p.sites {
                if s >= l {
                    return Err(Error::invalid(format!(
                        "patch {id} references site {s}, register has {l} sites"
                    )));
                }
                if seen[s] {
                    return Err(Error::invalid(format!("patch {id} repeats site {s}")));
                }
                seen[s] = true;
                covered[s] = true;
            }
        }
        if let Some(hole) = covered.iter().position(|&x| !x) {
            return Err(Error::invalid(format!("site {hole} is not covered by any patch")));
        }
        let n = patches.len();
        let mut overlaps = vec![Vec::new(); n];
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if patches[i].overlaps(&patches[j]) {
                    overlaps[i].push(j);
                    if i < j {
                        pairs.push((i, j));
                    }
                }
            }
        }
        Ok(PatchCover { l, patches, overlaps, pairs })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    /// Hilbert-space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1 << self.l
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch(&self, id: usize) -> &Patch {
        &self.patches[id]
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    /// Ids of patches overlapping patch `id`, ascending, self included.
    pub fn overlapping(&self, id: usize) -> &[usize] {
        &self.overlaps[id]
    }

    /// Distinct unordered overlapping pairs (see type-level docs for order).
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// The patch that "owns" a site for single-site observables: the
    /// patch that lists the site first, falling back to the lowest patch
    /// id containing it. On the ring cover this makes patch `i` own
    /// site `i`.
    pub fn owner_of(&self, site: usize) -> Result<usize> {
        self.patches
            .iter()
            .position(|p| p.sites.first() == Some(&site))
            .or_else(|| self.patches.iter().position(|p| p.contains(site)))
            .ok_or_else(|| Error::invalid(format!("no patch contains site {site}")))
    }
}

/// The ring cover: `L` two-site patches `(i, i+1 mod L)`, each overlapping
/// its two neighbours. Needs `L >= 3` so that neighbouring patches are
/// distinct and overlap in exactly one site.
pub fn build_chain_cover(l: usize) -> Result<PatchCover> {
    if l < 3 {
        return Err(Error::invalid(format!(
            "ring cover needs L >= 3 (got {l}): with L = 2 the two bond patches would coincide on both sites"
        )));
    }
    let patches = (0..l).map(|i| Patch::new(vec![i, (i + 1) % l])).collect();
    let mut cover = PatchCover::new(l, patches)?;
    // Re-list pairs in bond order (k, k+1 mod L) for stable downstream
    // column naming; contents are the same unordered pairs.
    cover.pairs = (0..l)
        .map(|k| {
            let a = k;
            let b = (k + 1) % l;
            (a.min(b), a.max(b))
        })
        .collect();
    Ok(cover)
}

/// A Hermitian operator attached to one patch of a cover.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub patch: usize,
    pub matrix: ComplexMatrix,
}

/// The 4x4 bond term of the Ising chain on patch `(i, j)`:
/// `-J Z_i Z_j - h_x/2 (X_i + X_j) - h_z/2 (Z_i + Z_j)`.
/// Site `i` (first in the patch) is the low bit of the local index.
pub fn tfim_local_term(spec: &ModelSpec) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let (sx, sz) = (sigma_x(), sigma_z());
    let mut term = kron(&sz, &sz).scale(c(-spec.j));
    for (field, op) in [(spec.h_x, &sx), (spec.h_z, &sz)] {
        if field != 0.0 {
            let first = kron(&id, op); // low bit = first site
            let second = kron(op, &id);
            let sum = first.add(&second).expect("shape");
            term = term.add(&sum.scale(c(-field / 2.0))).expect("shape");
        }
    }
    term
}

/// One bond term per patch of the ring cover.
pub fn tfim_patch_terms(spec: &ModelSpec, cover: &PatchCover) -> Result<Vec<LocalTerm>> {
    spec.validate()?;
    if cover.l() != spec.l {
        return Err(Error::invalid(format!(
            "cover is over {} sites but the model has {}",
            cover.l(),
            spec.l
        )));
    }
    let matrix = tfim_local_term(spec);
    cover
        .patches()
        .iter()
        .enumerate()
        .map(|(id, p)| {
            if p.len() != 2 {
                return Err(Error::invalid(format!(
                    "bond terms need two-site patches; patch {id} has {} sites",
                    p.len()
                )));
            }
            Ok(LocalTerm { patch: id, matrix: matrix.clone() })
        })
        .collect()
}

/// Sum of all embedded bond terms: the full `2^L x 2^L` Hamiltonian.
/// Capped at `L <= EMBED_SITE_CAP` ( = 12) to bound memory.
pub fn assemble_full_hamiltonian(spec: &ModelSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    if spec.l > EMBED_SITE_CAP {
        return Err(Error::ResourceLimit(format!(
            "assembling the full Hamiltonian for L = {} exceeds the L <= {EMBED_SITE_CAP} cap",
            spec.l
        )));
    }
    let cover = build_chain_cover(spec.l)?;
    let term = tfim_local_term(spec);
    let mut h = ComplexMatrix::new_zero(spec.dim(), spec.dim());
    for p in cover.patches() {
        let embedded = embed_local(&term, &p.sites, spec.l)?;
        h = h.add(&embedded)?;
    }
    Ok(h)
}

/// Product state with every spin polarized along +x: uniform amplitudes
/// `2^(-L/2)` over the whole basis.
pub fn plus_x_state(l: usize) -> Result<StateVector> {
    if l == 0 || l > EMBED_SITE_CAP {
        return Err(Error::ResourceLimit(format!(
            "state register of {l} sites outside supported range 1..={EMBED_SITE_CAP}"
        )));
    }
    let dim = 1usize << l;
    let amp = c(1.0 / (dim as f64).sqrt());
    StateVector::from_vec(vec![amp; dim])
}

/// Computational-basis state `|index>`.
pub fn basis_state(l: usize, index: usize) -> Result<StateVector> {
    if l == 0 || l > EMBED_SITE_CAP {
        return Err(Error::ResourceLimit(format!(
            "state register of {l} sites outside supported range 1..={EMBED_SITE_CAP}"
        )));
    }
    let dim = 1usize << l;
    if index >= dim {
        return Err(Error::invalid(format!(
            "basis index {index} out of range for dimension {dim}"
        )));
    }
    let mut v = StateVector::new_zero(dim);
    v.amplitudes_mut()[index] = c(1.0);
    Ok(v)
}
