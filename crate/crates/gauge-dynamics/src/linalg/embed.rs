//! Embedding of few-site operators into the full register and the
//! complementary reductions (apply-without-materializing, partial trace).
//!
//! Index convention: site `k` of an `l`-site register is bit `k` of the
//! computational-basis index. A local operator on `sites = [s0, s1, ...]`
//! uses the same rule internally: bit `j` of its own index refers to site
//! `s[j]`. Sites need not be sorted or contiguous.

use num_complex::Complex64;

use super::gemm::{gemm, Variant};
use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Hard cap on register size for anything that materializes or walks a
/// full `2^l x 2^l` operator.
pub const EMBED_SITE_CAP: usize = 12;

/// Precomputed scatter tables for one (sites, register) combination.
///
/// `op_scatter[p]` spreads the bits of a local index `p` onto the operator
/// sites; `rest_scatter[r]` spreads a complement index onto the remaining
/// sites. Every full index decomposes uniquely as `op | rest`.
#[derive(Debug, Clone)]
pub(crate) struct SitePlan {
    pub sites: Vec<usize>,
    pub l: usize,
    pub op_dim: usize,
    pub rest_dim: usize,
    pub op_scatter: Vec<usize>,
    pub rest_scatter: Vec<usize>,
}

fn scatter(bits: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (b, pos)| acc | (((bits >> b) & 1) << pos))
}

impl SitePlan {
    pub fn new(sites: &[usize], l: usize) -> Result<Self> {
        if l == 0 || l > EMBED_SITE_CAP {
            return Err(Error::ResourceLimit(format!(
                "register of {l} sites outside supported range 1..={EMBED_SITE_CAP}"
            )));
        }
        if sites.is_empty() || sites.len() > l {
            return Err(Error::invalid(format!(
                "operator must act on between 1 and {l} sites, got {}",
                sites.len()
            )));
        }
        let mut seen = vec![false; l];
        for &s in sites {
            if s >= l {
                return Err(Error::invalid(format!(
                    "site index {s} out of range for {l}-site register"
                )));
            }
            if seen[s] {
                return Err(Error::invalid(format!("duplicate site index {s}")));
            }
            seen[s] = true;
        }
        let rest: Vec<usize> = (0..l).filter(|s| !seen[*s]).collect();
        let k = sites.len();
        let op_dim = 1 << k;
        let rest_dim = 1 << (l - k);
        let op_scatter = (0..op_dim).map(|p| scatter(p, sites)).collect();
        let rest_scatter = (0..rest_dim).map(|r| scatter(r, &rest)).collect();
        Ok(SitePlan {
            sites: sites.to_vec(),
            l,
            op_dim,
            rest_dim,
            op_scatter,
            rest_scatter,
        })
    }

    /// Sites not acted on, in ascending order (the basis order of the
    /// reduced operator produced by [`partial_trace`]).
    pub fn rest_sites(&self) -> Vec<usize> {
        let mut seen = vec![false; self.l];
        for &s in &self.sites {
            seen[s] = true;
        }
        (0..self.l).filter(|s| !seen[*s]).collect()
    }
}

fn check_op_shape(op: &ComplexMatrix, plan: &SitePlan) -> Result<()> {
    if op.rows() != plan.op_dim || op.cols() != plan.op_dim {
        return Err(Error::invalid(format!(
            "operator is {}x{} but {} site(s) require {}x{}",
            op.rows(),
            op.cols(),
            plan.sites.len(),
            plan.op_dim,
            plan.op_dim
        )));
    }
    Ok(())
}

/// Materialize `op` (acting on `sites`) as a full `2^l x 2^l` matrix.
pub fn embed_local(op: &ComplexMatrix, sites: &[usize], l: usize) -> Result<ComplexMatrix> {
    let plan = SitePlan::new(sites, l)?;
    check_op_shape(op, &plan)?;
    let dim = 1 << l;
    let mut out = ComplexMatrix::new_zero(dim, dim);
    for &base in &plan.rest_scatter {
        for a in 0..plan.op_dim {
            let row = base | plan.op_scatter[a];
            for b in 0..plan.op_dim {
                let col = base | plan.op_scatter[b];
                out.set(row, col, op.get(a, b));
            }
        }
    }
    Ok(out)
}

/// Past this operator dimension, `apply_local_left` gathers rows into a
/// contiguous block and calls the GEMM kernel instead of streaming AXPYs.
const GATHER_GEMM_MIN_DIM: usize = 32;

/// Compute `embed(op) * target` without materializing the embedding.
pub fn apply_local_left(
    op: &ComplexMatrix,
    sites: &[usize],
    l: usize,
    target: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let plan = SitePlan::new(sites, l)?;
    apply_left_planned(op, &plan, target)
}

pub(crate) fn apply_left_planned(
    op: &ComplexMatrix,
    plan: &SitePlan,
    target: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_op_shape(op, plan)?;
    let dim = 1 << plan.l;
    if target.rows() != dim {
        return Err(Error::invalid(format!(
            "target has {} rows, embedding needs {dim}",
            target.rows()
        )));
    }
    let cols = target.cols();
    let mut out = ComplexMatrix::new_zero(dim, cols);
    if plan.op_dim >= GATHER_GEMM_MIN_DIM {
        // Gather the rows touched by one complement assignment, multiply as
        // a dense block, scatter back.
        let mut block = vec![Complex64::new(0.0, 0.0); plan.op_dim * cols];
        for &base in &plan.rest_scatter {
            for a in 0..plan.op_dim {
                let row = base | plan.op_scatter[a];
                block[a * cols..(a + 1) * cols].copy_from_slice(target.row(row));
            }
            let (prod, _, _) =
                gemm(Variant::Plain, op.data(), plan.op_dim, plan.op_dim, &block, plan.op_dim, cols);
            for a in 0..plan.op_dim {
                let row = base | plan.op_scatter[a];
                out.row_mut(row).copy_from_slice(&prod[a * cols..(a + 1) * cols]);
            }
        }
    } else {
        for &base in &plan.rest_scatter {
            for a in 0..plan.op_dim {
                let row_out = base | plan.op_scatter[a];
                for b in 0..plan.op_dim {
                    let w = op.get(a, b);
                    if w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let row_in = base | plan.op_scatter[b];
                    // out[row_out, :] += w * target[row_in, :]
                    for (o, s) in out.row_mut(row_out).iter_mut().zip(target.row(row_in)) {
                        *o += w * s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Compute `target * embed(op)` without materializing the embedding.
pub fn apply_local_right(
    op: &ComplexMatrix,
    sites: &[usize],
    l: usize,
    target: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let plan = SitePlan::new(sites, l)?;
    check_op_shape(op, &plan)?;
    let dim = 1 << plan.l;
    if target.cols() != dim {
        return Err(Error::invalid(format!(
            "target has {} cols, embedding needs {dim}",
            target.cols()
        )));
    }
    let rows = target.rows();
    let mut out = ComplexMatrix::new_zero(rows, dim);
    // (T * E)[r, base|b] = sum_a T[r, base|a] * op[a, b]
    for &base in &plan.rest_scatter {
        for b in 0..plan.op_dim {
            let col_out = base | plan.op_scatter[b];
            for a in 0..plan.op_dim {
                let w = op.get(a, b);
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let col_in = base | plan.op_scatter[a];
                for r in 0..rows {
                    let v = target.get(r, col_in);
                    let cur = out.get(r, col_out);
                    out.set(r, col_out, cur + w * v);
                }
            }
        }
    }
    Ok(out)
}

/// Apply `op` (acting on `sites`) to a state vector of `l` qubits.
pub fn apply_local_vec(
    op: &ComplexMatrix,
    sites: &[usize],
    l: usize,
    amps: &[Complex64],
) -> Result<Vec<Complex64>> {
    let plan = SitePlan::new(sites, l)?;
    check_op_shape(op, &plan)?;
    let dim = 1 << l;
    if amps.len() != dim {
        return Err(Error::invalid(format!(
            "state has dimension {}, register needs {dim}",
            amps.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for &base in &plan.rest_scatter {
        for a in 0..plan.op_dim {
            let ia = base | plan.op_scatter[a];
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..plan.op_dim {
                acc += op.get(a, b) * amps[base | plan.op_scatter[b]];
            }
            out[ia] = acc;
        }
    }
    Ok(out)
}

/// Trace out `traced_sites` from a full operator, returning the reduced
/// operator on the remaining sites (ascending order, usual bit rule).
pub fn partial_trace(
    a: &ComplexMatrix,
    traced_sites: &[usize],
    l: usize,
) -> Result<ComplexMatrix> {
    let plan = SitePlan::new(traced_sites, l)?;
    partial_trace_planned(a, &plan)
}

pub(crate) fn partial_trace_planned(a: &ComplexMatrix, plan: &SitePlan) -> Result<ComplexMatrix> {
    let dim = 1 << plan.l;
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::invalid(format!(
            "operator is {}x{}, register needs {dim}x{dim}",
            a.rows(),
            a.cols()
        )));
    }
    if plan.sites.len() == plan.l {
        // Tracing every site leaves a 1x1 "scalar operator".
        let mut out = ComplexMatrix::new_zero(1, 1);
        out.set(0, 0, a.trace_unchecked());
        return Ok(out);
    }
    let rdim = plan.rest_dim;
    let mut out = ComplexMatrix::new_zero(rdim, rdim);
    for x in 0..rdim {
        let bx = plan.rest_scatter[x];
        for y in 0..rdim {
            let by = plan.rest_scatter[y];
            let mut acc = Complex64::new(0.0, 0.0);
            for &p in &plan.op_scatter {
                acc += a.get(bx | p, by | p);
            }
            out.set(x, y, acc);
        }
    }
    Ok(out)
}
