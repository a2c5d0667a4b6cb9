//! Dense helpers and slot-wise tensor application.
//!
//! A vector in `(ℂ^d)^{⊗n}` is indexed by `Σ_m i_m d^{n-m}`, i.e. slot 1 is the most
//! significant digit. This is the layout of `kron(a, b)` for `a` on the left slots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `d^n`, or `None` on overflow.
pub fn tensor_dim(d: usize, n: usize) -> Option<usize> {
    u32::try_from(n).ok().and_then(|n| d.checked_pow(n))
}

pub fn tensor_dim_capped(d: usize, n: usize, cap: usize) -> Result<usize> {
    match tensor_dim(d, n) {
        Some(m) if m <= cap => Ok(m),
        Some(m) => Err(Error::SizeCapExceeded { entries: m as u128, cap }),
        None => Err(Error::SizeCapExceeded { entries: u128::MAX, cap }),
    }
}

/// Checks that a dense `rows × cols` matrix fits under the entry cap.
pub fn check_dense(rows: usize, cols: usize, cap: usize) -> Result<()> {
    let entries = rows as u128 * cols as u128;
    if entries > cap as u128 {
        return Err(Error::SizeCapExceeded { entries, cap });
    }
    Ok(())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn block_shape(d: usize, n: usize, k: usize, width: usize) -> (usize, usize) {
    let outer = d.pow((k - 1) as u32);
    let inner = d.pow((n + 1 - k - width) as u32);
    (outer, inner)
}

/// Applies a `d×d` operator to slot `k` (1-based) of a vector in `(ℂ^d)^{⊗n}`.
pub fn apply_single(op: &CMat, d: usize, n: usize, k: usize, v: &[C64]) -> Vec<C64> {
    debug_assert!(k >= 1 && k <= n);
    let (outer, inner) = block_shape(d, n, k, 1);
    let mut out = vec![ZERO; v.len()];
    let mut buf = vec![ZERO; d];
    for a in 0..outer {
        for c in 0..inner {
            let base = a * d * inner + c;
            for (p, b) in buf.iter_mut().enumerate() {
                *b = v[base + p * inner];
            }
            for r in 0..d {
                let mut s = ZERO;
                for (p, b) in buf.iter().enumerate() {
                    s += op[(r, p)] * b;
                }
                out[base + r * inner] = s;
            }
        }
    }
    out
}

/// Applies a `d²×d²` operator to slots `k, k+1` (1-based) of a vector in `(ℂ^d)^{⊗n}`.
pub fn apply_pair(op: &CMat, d: usize, n: usize, k: usize, v: &[C64]) -> Vec<C64> {
    debug_assert!(k >= 1 && k < n);
    let dd = d * d;
    let (outer, inner) = block_shape(d, n, k, 2);
    let mut out = vec![ZERO; v.len()];
    let mut buf = vec![ZERO; dd];
    // Skip zero entries; most structured twists are very sparse.
    let nz: Vec<Vec<(usize, C64)>> = (0..dd)
        .map(|r| (0..dd).filter(|&p| op[(r, p)] != ZERO).map(|p| (p, op[(r, p)])).collect())
        .collect();
    for a in 0..outer {
        for c in 0..inner {
            let base = a * dd * inner + c;
            for (p, b) in buf.iter_mut().enumerate() {
                *b = v[base + p * inner];
            }
            for (r, row) in nz.iter().enumerate() {
                let mut s = ZERO;
                for &(p, t) in row {
                    s += t * buf[p];
                }
                out[base + r * inner] = s;
            }
        }
    }
    out
}

/// Contracts slots `k, k+1` with the bilinear form `x ⊗ y ↦ xᵀ G y`; output has `n-2` slots.
pub fn contract_pair(g: &CMat, d: usize, n: usize, k: usize, v: &[C64]) -> Vec<C64> {
    debug_assert!(k >= 1 && k < n);
    let dd = d * d;
    let (outer, inner) = block_shape(d, n, k, 2);
    let mut out = vec![ZERO; outer * inner];
    let nz: Vec<(usize, C64)> = (0..dd)
        .filter_map(|p| {
            let val = g[(p / d, p % d)];
            (val != ZERO).then_some((p, val))
        })
        .collect();
    for a in 0..outer {
        for c in 0..inner {
            let base = a * dd * inner + c;
            let mut s = ZERO;
            for &(p, val) in &nz {
                s += val * v[base + p * inner];
            }
            out[a * inner + c] = s;
        }
    }
    out
}

/// Adjoint of [`contract_pair`]: inserts `Σ conj(G_xy) b_x ⊗ b_y` at slots `k, k+1`.
/// `n` is the number of slots of the output.
pub fn insert_pair(g: &CMat, d: usize, n: usize, k: usize, y: &[C64]) -> Vec<C64> {
    debug_assert!(k >= 1 && k < n);
    let dd = d * d;
    let (outer, inner) = block_shape(d, n, k, 2);
    let mut out = vec![ZERO; outer * dd * inner];
    for a in 0..outer {
        for c in 0..inner {
            let val = y[a * inner + c];
            if val == ZERO {
                continue;
            }
            let base = a * dd * inner + c;
            for p in 0..dd {
                out[base + p * inner] = g[(p / d, p % d)].conj() * val;
            }
        }
    }
    out
}

/// Applies `f` to every column of `m`, producing a matrix with `rows` rows.
pub fn map_columns<F>(m: &CMat, rows: usize, f: F) -> CMat
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let r = m.nrows();
    let mut data = Vec::with_capacity(rows * m.ncols());
    for j in 0..m.ncols() {
        let col = &m.as_slice()[j * r..(j + 1) * r];
        let out = f(col);
        debug_assert_eq!(out.len(), rows);
        data.extend(out);
    }
    CMat::from_vec(rows, m.ncols(), data)
}

/// Builds the dense matrix of a linear map from `ℂ^cols` to `ℂ^rows` given by its action.
pub fn matrix_of<F>(rows: usize, cols: usize, f: F) -> CMat
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let mut data = Vec::with_capacity(rows * cols);
    let mut e = vec![ZERO; cols];
    for j in 0..cols {
        e[j] = ONE;
        data.extend(f(&e));
        e[j] = ZERO;
    }
    CMat::from_vec(rows, cols, data)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `f(H)` for Hermitian `H` via its spectral decomposition.
pub fn hermitian_function<F: Fn(f64) -> f64>(m: &CMat, f: F) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let diag = CMat::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c(f(l), 0.0)),
    ));
    u * diag * u.adjoint()
}

pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Plain inner product, antilinear in the first slot.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tensor product of vectors, left factor most significant.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Unit vector `e_i` of `ℂ^n`.
pub fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

/// `b_{w_1} ⊗ ⋯ ⊗ b_{w_k}` for columns `b_i` of `basis` (0-based word).
pub fn word_tensor(basis: &CMat, word: &[usize]) -> Vec<C64> {
    let mut v = vec![ONE];
    for &i in word {
        let col: Vec<C64> = basis.column(i).iter().copied().collect();
        v = kron_vec(&v, &col);
    }
    v
}
