//! Independent reference implementations used to cross-check the library.
//!
//! Everything here is deliberately written the slow, obvious way — triple
//! loops, explicit index bookkeeping, and a cyclic Jacobi eigensolver —
//! sharing no code paths with the optimized kernels under test.

#![allow(dead_code)]

use gauge_dynamics::linalg::{ComplexMatrix, StateVector};
use num_complex::Complex64;

/// Plain O(n³) matrix product.
pub fn naive_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols(), b.rows(), "shape mismatch");
    let mut out = ComplexMatrix::new_zero(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.cols() {
                acc += a.get(i, k) * b.get(k, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Conjugate transpose, entry by entry.
pub fn naive_adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::new_zero(a.cols(), a.rows());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(j, i, a.get(i, j).conj());
        }
    }
    out
}

/// Kronecker product from the index formula: entry
/// ((i1·r2 + i2), (j1·c2 + j2)) = a(i1, j1)·b(i2, j2), so the second
/// factor occupies the low bits of power-of-two indices.
pub fn naive_kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (r1, c1, r2, c2) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::new_zero(r1 * r2, c1 * c2);
    for i1 in 0..r1 {
        for j1 in 0..c1 {
            for i2 in 0..r2 {
                for j2 in 0..c2 {
                    out.set(i1 * r2 + i2, j1 * c2 + j2, a.get(i1, j1) * b.get(i2, j2));
                }
            }
        }
    }
    out
}

/// Embed `op` acting on `sites` of an `l`-site register by walking every
/// pair of full indices and testing the site-by-site selection rule
/// (site k of the register is bit k of the index; bit j of the local
/// index is site `sites[j]`).
pub fn naive_embed(op: &ComplexMatrix, sites: &[usize], l: usize) -> ComplexMatrix {
    let dim = 1usize << l;
    let mut out = ComplexMatrix::new_zero(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            // Off-site bits must agree; on-site bits select the op entry.
            let mut ok = true;
            for s in 0..l {
                if !sites.contains(&s) && ((row >> s) & 1) != ((col >> s) & 1) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut a = 0usize;
            let mut b = 0usize;
            for (j, &s) in sites.iter().enumerate() {
                a |= ((row >> s) & 1) << j;
                b |= ((col >> s) & 1) << j;
            }
            out.set(row, col, op.get(a, b));
        }
    }
    out
}

/// Partial trace over `traced_sites` by direct summation over full
/// indices: every full index pair whose kept bits match contributes to
/// the reduced entry addressed by the kept bits (ascending site order).
pub fn naive_partial_trace(a: &ComplexMatrix, traced_sites: &[usize], l: usize) -> ComplexMatrix {
    let dim = 1usize << l;
    assert_eq!(a.rows(), dim);
    assert_eq!(a.cols(), dim);
    let kept: Vec<usize> = (0..l).filter(|s| !traced_sites.contains(s)).collect();
    let rdim = 1usize << kept.len();
    let mut out = ComplexMatrix::new_zero(rdim.max(1), rdim.max(1));
    for row in 0..dim {
        for col in 0..dim {
            let mut traced_match = true;
            for &s in traced_sites {
                if ((row >> s) & 1) != ((col >> s) & 1) {
                    traced_match = false;
                    break;
                }
            }
            if !traced_match {
                continue;
            }
            let mut x = 0usize;
            let mut y = 0usize;
            for (j, &s) in kept.iter().enumerate() {
                x |= ((row >> s) & 1) << j;
                y |= ((col >> s) & 1) << j;
            }
            let cur = out.get(x, y);
            out.set(x, y, cur + a.get(row, col));
        }
    }
    out
}

/// Largest entrywise difference between two equally shaped matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.rows(), b.rows());
    assert_eq!(a.cols(), b.cols());
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            worst = worst.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching eigenvectors
/// as columns of a unitary matrix, so that `a · v = v · diag(λ)`.
pub fn eigh(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert!(a.is_square());
    let n = a.rows();
    assert!(
        a.hermiticity_residual() <= 1e-10 * (1.0 + a.frobenius_norm()),
        "eigh oracle needs Hermitian input"
    );
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m.get(p, q).norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let beta = m.get(p, q);
                let b = beta.norm();
                if b <= 1e-18 * scale {
                    continue;
                }
                let phase = beta / b;
                let alpha = m.get(p, p).re;
                let delta = m.get(q, q).re;
                let tau = (delta - alpha) / (2.0 * b);
                // Smaller-magnitude root of t² − 2τt − 1 = 0.
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = -sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotation R: identity except R[p][p]=c, R[p][q]=−s·φ,
                // R[q][p]=s·φ̄, R[q][q]=c. Update M ← R†·M·R, V ← V·R.
                let cc = Complex64::new(c, 0.0);
                let sphi = Complex64::new(s, 0.0) * phase;
                // Columns (right-multiply by R).
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, mip * cc + miq * sphi.conj());
                    m.set(i, q, miq * cc - mip * sphi);
                }
                // Rows (left-multiply by R†).
                for i in 0..n {
                    let mpi = m.get(p, i);
                    let mqi = m.get(q, i);
                    m.set(p, i, mpi * cc + mqi * sphi);
                    m.set(q, i, mqi * cc - mpi * sphi.conj());
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * cc + viq * sphi.conj());
                    v.set(i, q, viq * cc - vip * sphi);
                }
            }
        }
    }
    // Sort ascending by eigenvalue, permuting eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    (values, vectors)
}

/// `exp(g)` for anti-Hermitian `g`, via the eigendecomposition of the
/// Hermitian matrix `i·g`: if i·g = V diag(λ) V†, then
/// exp(g) = V diag(e^{−iλ}) V†.
pub fn expm_via_eig(g: &ComplexMatrix) -> ComplexMatrix {
    let h = g.scale(Complex64::new(0.0, 1.0));
    let (values, vectors) = eigh(&h);
    apply_spectral_function(&values, &vectors, |lambda| {
        Complex64::new(0.0, -lambda).exp()
    })
}

/// Evolve `psi0` to time `t` under Hermitian `h` via eigendecomposition.
pub fn evolve_via_eig(h: &ComplexMatrix, psi0: &StateVector, t: f64) -> StateVector {
    let (values, vectors) = eigh(h);
    let propagator = apply_spectral_function(&values, &vectors, |lambda| {
        Complex64::new(0.0, -lambda * t).exp()
    });
    matvec(&propagator, psi0)
}

/// Unitary polar factor via the spectral square root of a†a:
/// U = a · (a†a)^{−1/2}.
pub fn polar_via_eig(a: &ComplexMatrix) -> ComplexMatrix {
    let ata = naive_matmul(&naive_adjoint(a), a);
    let (values, vectors) = eigh(&ata);
    assert!(
        values.iter().all(|&lam| lam > 1e-12),
        "polar oracle needs full-rank input"
    );
    let inv_sqrt = apply_spectral_function(&values, &vectors, |lambda| {
        Complex64::new(1.0 / lambda.sqrt(), 0.0)
    });
    naive_matmul(a, &inv_sqrt)
}

/// V · diag(f(λ)) · V†.
fn apply_spectral_function(
    values: &[f64],
    vectors: &ComplexMatrix,
    f: impl Fn(f64) -> Complex64,
) -> ComplexMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &vj) in values.iter().enumerate() {
        let fj = f(vj);
        for i in 0..n {
            scaled.set(i, j, vectors.get(i, j) * fj);
        }
    }
    naive_matmul(&scaled, &naive_adjoint(vectors))
}

/// Dense matrix–vector product, straightforwardly.
pub fn matvec(a: &ComplexMatrix, v: &StateVector) -> StateVector {
    assert_eq!(a.cols(), v.dim());
    let amps = v.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); a.rows()];
    for (i, slot) in out.iter_mut().enumerate() {
        for (j, &aj) in amps.iter().enumerate() {
            *slot += a.get(i, j) * aj;
        }
    }
    StateVector::from_vec(out).expect("finite matvec result")
}

/// ⟨ψ|A|ψ⟩ as an explicit double sum.
pub fn naive_expectation(op: &ComplexMatrix, psi: &StateVector) -> f64 {
    let amps = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            acc += amps[i].conj() * op.get(i, j) * amps[j];
        }
    }
    acc.re
}
