//! Cache-blocked dense complex matrix multiply.
//!
//! Operands are packed once into split real/imaginary panels so the inner
//! loop is four independent real dot products, which the compiler maps onto
//! FMA vector units. The kernel is single-threaded and sums in a fixed
//! order, so results are bitwise reproducible for given shapes.

use num_complex::Complex64;

/// Accumulator lanes in the inner dot product (one vector register's worth
/// of f64 on AVX-512; harmless elsewhere).
const LANES: usize = 8;
/// k-extent of a panel block kept hot in cache.
const KC: usize = 256;
/// Rows of the packed right-hand panel processed per pass.
const JB: usize = 96;

/// Which operand is conjugate-transposed in `A op B`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Variant {
    /// C = A B
    Plain,
    /// C = A^dag B
    AdjA,
    /// C = A B^dag
    AdjB,
}

/// An operand packed as rows over a shared inner dimension `k`:
/// row r of the pack holds the length-`k` slice that gets dotted.
struct Packed {
    re: Vec<f64>,
    im: Vec<f64>,
    rows: usize,
    k: usize,
}

impl Packed {
    fn row(&self, r: usize) -> (&[f64], &[f64]) {
        let s = r * self.k;
        (&self.re[s..s + self.k], &self.im[s..s + self.k])
    }
}

/// Pack matrix rows as-is (`conj` negates the imaginary part).
fn pack_rows(data: &[Complex64], rows: usize, cols: usize, conj: bool) -> Packed {
    let mut re = Vec::with_capacity(rows * cols);
    let mut im = Vec::with_capacity(rows * cols);
    let sign = if conj { -1.0 } else { 1.0 };
    for z in &data[..rows * cols] {
        re.push(z.re);
        im.push(sign * z.im);
    }
    Packed { re, im, rows, k: cols }
}

/// Pack matrix columns as rows (transpose pack; `conj` negates imaginary).
fn pack_cols(data: &[Complex64], rows: usize, cols: usize, conj: bool) -> Packed {
    let mut re = vec![0.0; rows * cols];
    let mut im = vec![0.0; rows * cols];
    let sign = if conj { -1.0 } else { 1.0 };
    for r in 0..rows {
        let base = r * cols;
        for c in 0..cols {
            let z = data[base + c];
            re[c * rows + r] = z.re;
            im[c * rows + r] = sign * z.im;
        }
    }
    Packed { re, im, rows: cols, k: rows }
}

/// Split-complex dot product over equal-length slices.
#[inline]
fn dot_split(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    let n = ar.len();
    let mut rr = [0.0f64; LANES];
    let mut ii = [0.0f64; LANES];
    let mut ri = [0.0f64; LANES];
    let mut ir = [0.0f64; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let s = c * LANES;
        let (xr, xi) = (&ar[s..s + LANES], &ai[s..s + LANES]);
        let (yr, yi) = (&br[s..s + LANES], &bi[s..s + LANES]);
        for l in 0..LANES {
            rr[l] += xr[l] * yr[l];
            ii[l] += xi[l] * yi[l];
            ri[l] += xr[l] * yi[l];
            ir[l] += xi[l] * yr[l];
        }
    }
    let (mut tr, mut ti) = (0.0, 0.0);
    for t in chunks * LANES..n {
        tr += ar[t] * br[t] - ai[t] * bi[t];
        ti += ar[t] * bi[t] + ai[t] * br[t];
    }
    let re = rr.iter().sum::<f64>() - ii.iter().sum::<f64>() + tr;
    let im = ri.iter().sum::<f64>() + ir.iter().sum::<f64>() + ti;
    (re, im)
}

/// Multiply with the requested adjoint variant. `a` is `ar x ac`, `b` is
/// `br x bc`, both row-major; shape compatibility is the caller's job
/// (validated at the `ComplexMatrix` API layer). Returns the row-major
/// result and its (rows, cols).
pub(crate) fn gemm(
    variant: Variant,
    a: &[Complex64],
    ar: usize,
    ac: usize,
    b: &[Complex64],
    br: usize,
    bc: usize,
) -> (Vec<Complex64>, usize, usize) {
    let (ap, bp) = match variant {
        Variant::Plain => (pack_rows(a, ar, ac, false), pack_cols(b, br, bc, false)),
        Variant::AdjA => (pack_cols(a, ar, ac, true), pack_cols(b, br, bc, false)),
        Variant::AdjB => (pack_rows(a, ar, ac, false), pack_rows(b, br, bc, true)),
    };
    debug_assert_eq!(ap.k, bp.k);
    let (m, n, kt) = (ap.rows, bp.rows, ap.k);
    let mut out = vec![Complex64::new(0.0, 0.0); m * n];
    let mut k0 = 0;
    while k0 < kt.max(1) {
        let kl = KC.min(kt - k0);
        let mut j0 = 0;
        while j0 < n {
            let jl = JB.min(n - j0);
            for i in 0..m {
                let (air, aii) = ap.row(i);
                let (air, aii) = (&air[k0..k0 + kl], &aii[k0..k0 + kl]);
                let orow = &mut out[i * n + j0..i * n + j0 + jl];
                for (dj, o) in orow.iter_mut().enumerate() {
                    let (bjr, bji) = bp.row(j0 + dj);
                    let (re, im) = dot_split(air, aii, &bjr[k0..k0 + kl], &bji[k0..k0 + kl]);
                    o.re += re;
                    o.im += im;
                }
            }
            j0 += jl;
        }
        k0 += kl.max(1);
    }
    (out, m, n)
}
