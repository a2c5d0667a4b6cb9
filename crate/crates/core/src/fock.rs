//! Truncated twisted Fock space: kernels `R_{T,n}`, `P_{T,n}`, graded vectors and operators.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::{Cholesky, Dyn};

use crate::error::{Error, Result};
use crate::hilbert::StandardSubspace;
use crate::linalg::{
    c, check_dense, hermitian_eigenvalues, hermitian_part, identity, inner, kron, map_columns, max_abs, tensor_dim,
    tensor_dim_capped, CMat, CVec, C64, ONE, ZERO,
};
use crate::twist::Twist;
use crate::Settings;

const MAX_LEVEL: usize = 48;
/// Above this dimension the smallest kernel eigenvalue is estimated by inverse iteration.
const DENSE_EIGEN_LIMIT: usize = 2048;

/// Graded vector `(v_0, …, v_N)` with `v_n ∈ (ℂ^d)^{⊗n}` in plain tensor coordinates.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FockVector {
    d: usize,
    levels: Vec<CVec>,
}

impl FockVector {
    pub fn zeros(d: usize, truncation: usize) -> FockVector {
        let levels = (0..=truncation).map(|n| CVec::zeros(d.pow(n as u32))).collect();
        FockVector { d, levels }
    }

    pub fn vacuum(d: usize, truncation: usize) -> FockVector {
        let mut v = FockVector::zeros(d, truncation);
        v.levels[0][0] = ONE;
        v
    }

    pub fn from_levels(d: usize, levels: Vec<CVec>) -> Result<FockVector> {
        for (n, l) in levels.iter().enumerate() {
            if Some(l.len()) != tensor_dim(d, n) {
                return Err(Error::ShapeMismatch(format!("level {n} has length {}", l.len())));
            }
        }
        if levels.is_empty() {
            return Err(Error::ShapeMismatch("a Fock vector needs at least the vacuum level".into()));
        }
        Ok(FockVector { d, levels })
    }

    /// Vector supported on a single level.
    pub fn at_level(d: usize, truncation: usize, n: usize, v: CVec) -> Result<FockVector> {
        let mut out = FockVector::zeros(d, truncation.max(n));
        if out.levels[n].len() != v.len() {
            return Err(Error::ShapeMismatch(format!("level {n} needs length {}", out.levels[n].len())));
        }
        out.levels[n] = v;
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn truncation(&self) -> usize {
        self.levels.len() - 1
    }
    pub fn level(&self, n: usize) -> &CVec {
        &self.levels[n]
    }
    pub fn level_mut(&mut self, n: usize) -> &mut CVec {
        &mut self.levels[n]
    }
    pub fn levels(&self) -> &[CVec] {
        &self.levels
    }

    pub fn axpy(&mut self, a: C64, other: &FockVector) {
        for (x, y) in self.levels.iter_mut().zip(&other.levels) {
            x.axpy(a, y, ONE);
        }
    }

    pub fn scale(&self, a: C64) -> FockVector {
        FockVector { d: self.d, levels: self.levels.iter().map(|l| l * a).collect() }
    }

    pub fn max_abs_diff(&self, other: &FockVector) -> f64 {
        let n = self.levels.len().max(other.levels.len());
        (0..n)
            .map(|k| match (self.levels.get(k), other.levels.get(k)) {
                (Some(a), Some(b)) => (a - b).camax(),
                (Some(a), None) | (None, Some(a)) => a.camax(),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }
}

/// Graded operator with blocks `A_{m,n}: level n → level m`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    d: usize,
    truncation: usize,
    blocks: BTreeMap<(usize, usize), CMat>,
}

impl FockOperator {
    pub fn zero(d: usize, truncation: usize) -> FockOperator {
        FockOperator { d, truncation, blocks: BTreeMap::new() }
    }

    pub fn identity(d: usize, truncation: usize) -> FockOperator {
        let mut op = FockOperator::zero(d, truncation);
        for n in 0..=truncation {
            op.blocks.insert((n, n), identity(d.pow(n as u32)));
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn truncation(&self) -> usize {
        self.truncation
    }
    pub fn blocks(&self) -> &BTreeMap<(usize, usize), CMat> {
        &self.blocks
    }
    pub fn block(&self, m: usize, n: usize) -> Option<&CMat> {
        self.blocks.get(&(m, n))
    }

    /// Adds `a` into block `(m, n)`.
    pub fn add_block(&mut self, m: usize, n: usize, a: CMat) {
        if m > self.truncation || n > self.truncation {
            return;
        }
        match self.blocks.get_mut(&(m, n)) {
            Some(b) => *b += a,
            None => {
                self.blocks.insert((m, n), a);
            }
        }
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = FockVector::zeros(self.d, self.truncation);
        for (&(m, n), a) in &self.blocks {
            if n < v.levels.len() {
                out.levels[m] += a * &v.levels[n];
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FockOperator) -> FockOperator {
        let mut out = FockOperator::zero(self.d, self.truncation.min(other.truncation));
        for (&(k, n), b) in &other.blocks {
            for (&(m, k2), a) in self.blocks.range((0, 0)..) {
                if k2 == k {
                    out.add_block(m, n, a * b);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &FockOperator) -> FockOperator {
        let mut out = self.clone();
        for (&(m, n), b) in &other.blocks {
            out.add_block(m, n, b.clone());
        }
        out
    }

    pub fn scale(&self, a: C64) -> FockOperator {
        FockOperator {
            d: self.d,
            truncation: self.truncation,
            blocks: self.blocks.iter().map(|(k, b)| (*k, b * a)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &FockOperator) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.blocks.keys().chain(other.blocks.keys()).collect();
        keys.into_iter()
            .map(|k| match (self.blocks.get(k), other.blocks.get(k)) {
                (Some(a), Some(b)) => max_abs(&(a - b)),
                (Some(a), None) | (None, Some(a)) => max_abs(a),
                (None, None) => 0.0,
            })
            .fold(0.0, f64::max)
    }
}

/// `R_{T,n} v = (1 + T_1 + T_1T_2 + ⋯ + T_1⋯T_{n-1}) v`, starting the chain at slot `first`.
fn apply_r_from(t: &Twist, n: usize, first: usize, v: &[C64]) -> Vec<C64> {
    let mut acc = v.to_vec();
    for k in (first..n).rev() {
        let tv = t.apply_embedded(k, n, &acc);
        for (a, (x, y)) in acc.iter_mut().zip(v.iter().zip(tv)) {
            *a = x + y;
        }
    }
    acc
}

/// `R_{T,n} v` without forming the matrix.
pub fn apply_r(t: &Twist, n: usize, v: &[C64]) -> Vec<C64> {
    apply_r_from(t, n, 1, v)
}

/// `(1 ⊗ R_{T,n-1}) v` for `v` on `n` slots.
pub fn apply_r_tail(t: &Twist, n: usize, v: &[C64]) -> Vec<C64> {
    apply_r_from(t, n, 2, v)
}

/// Dense `(R_{T,n}, P_{T,n})` built level by level without caching.
pub fn dense_kernels(t: &Twist, n: usize) -> (CMat, CMat) {
    let d = t.dim();
    if n == 0 {
        return (identity(1), identity(1));
    }
    let mut p = identity(d);
    let mut r = identity(d);
    for m in 2..=n {
        let dim = d.pow(m as u32);
        r = map_columns(&identity(dim), dim, |v| apply_r(t, m, v));
        p = lift_p(&p, &r, d);
    }
    (r, p)
}

/// `(1 ⊗ P_{n-1}) R_n`, symmetrized.
fn lift_p(prev: &CMat, r: &CMat, d: usize) -> CMat {
    let block = prev.nrows();
    let dim = block * d;
    let mut p = CMat::zeros(dim, dim);
    for a in 0..d {
        let rows = prev * r.rows(a * block, block);
        p.rows_mut(a * block, block).copy_from(&rows);
    }
    hermitian_part(&p)
}

struct DenseLevel {
    r: CMat,
    p: CMat,
    chol: Option<Cholesky<C64, Dyn>>,
    min_eigenvalue: OnceLock<f64>,
}

/// Twisted Fock space over a standard subspace with a twist, with per-level kernel caches.
pub struct FockSpace {
    subspace: Arc<StandardSubspace>,
    twist: Arc<Twist>,
    settings: Settings,
    levels: Vec<OnceLock<Option<Arc<DenseLevel>>>>,
}

impl FockSpace {
    pub fn new(subspace: Arc<StandardSubspace>, twist: Arc<Twist>, settings: Settings) -> FockSpace {
        FockSpace { subspace, twist, settings, levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect() }
    }

    pub fn subspace(&self) -> &StandardSubspace {
        &self.subspace
    }
    pub fn twist(&self) -> &Twist {
        &self.twist
    }
    pub fn settings(&self) -> &Settings {
        &self.settings
    }
    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }

    fn level_dim(&self, n: usize) -> Result<usize> {
        tensor_dim_capped(self.dim(), n, usize::MAX)
    }

    /// Dense level data, or `None` when the level exceeds the size cap.
    fn dense(&self, n: usize) -> Result<Option<Arc<DenseLevel>>> {
        if n > MAX_LEVEL {
            return Err(Error::CapExceeded { what: "Fock level", value: n, cap: MAX_LEVEL });
        }
        let dim = self.level_dim(n)?;
        if check_dense(dim, dim, self.settings.size_cap).is_err() {
            return Ok(None);
        }
        if let Some(l) = self.levels[n].get() {
            return Ok(l.clone());
        }
        let (r, p) = if n <= 1 {
            (identity(dim), identity(dim))
        } else {
            let prev = self.dense(n - 1)?.expect("lower level is below the cap");
            let r = map_columns(&identity(dim), dim, |v| apply_r(&self.twist, n, v));
            let p = lift_p(&prev.p, &r, self.dim());
            (r, p)
        };
        let chol = Cholesky::new(p.clone());
        let level = Arc::new(DenseLevel { r, p, chol, min_eigenvalue: OnceLock::new() });
        Ok(self.levels[n].get_or_init(|| Some(level)).clone())
    }

    /// Dense `(R_{T,n}, P_{T,n})`.
    pub fn kernels(&self, n: usize) -> Result<(CMat, CMat)> {
        let dim = self.level_dim(n)?;
        match self.dense(n)? {
            Some(l) => Ok((l.r.clone(), l.p.clone())),
            None => Err(Error::SizeCapExceeded { entries: dim as u128 * dim as u128, cap: self.settings.size_cap }),
        }
    }

    /// `R_{T,n} v`.
    pub fn apply_r(&self, n: usize, v: &[C64]) -> Vec<C64> {
        apply_r(&self.twist, n, v)
    }

    /// `P_{T,n} v`, dense when cached and matrix-free otherwise.
    pub fn apply_p(&self, n: usize, v: &[C64]) -> Result<Vec<C64>> {
        if let Some(l) = self.dense(n)? {
            return Ok((&l.p * CVec::from_column_slice(v)).as_slice().to_vec());
        }
        let w = self.apply_r(n, v);
        let block = self.level_dim(n - 1)?;
        let mut out = Vec::with_capacity(w.len());
        for chunk in w.chunks(block) {
            out.extend(self.apply_p(n - 1, chunk)?);
        }
        Ok(out)
    }

    /// Smallest eigenvalue of `P_{T,n}`.
    pub fn min_eigenvalue(&self, n: usize) -> Result<f64> {
        let dim = self.level_dim(n)?;
        let Some(l) = self.dense(n)? else {
            return Err(Error::SizeCapExceeded { entries: dim as u128 * dim as u128, cap: self.settings.size_cap });
        };
        Ok(*l.min_eigenvalue.get_or_init(|| {
            if dim <= DENSE_EIGEN_LIMIT {
                hermitian_eigenvalues(&l.p)[0]
            } else {
                match &l.chol {
                    Some(ch) => inverse_iteration(ch, dim),
                    None => f64::NEG_INFINITY,
                }
            }
        }))
    }

    fn check_positive(&self, n: usize) -> Result<()> {
        let min = self.min_eigenvalue(n)?;
        if !(min > self.settings.tolerance) {
            return Err(Error::NotStrictlyPositive { level: n, min_eigenvalue: min });
        }
        Ok(())
    }

    /// Solves `P_{T,n} x = v`.
    pub fn solve(&self, n: usize, v: &CVec) -> Result<CVec> {
        match self.dense(n)? {
            Some(l) => {
                self.check_positive(n)?;
                let ch = l.chol.as_ref().ok_or(Error::NotStrictlyPositive { level: n, min_eigenvalue: f64::NAN })?;
                Ok(ch.solve(v))
            }
            None => self.solve_matrix_free(n, v),
        }
    }

    /// Solves `P_{T,n} X = B` column by column.
    pub fn solve_matrix(&self, n: usize, b: &CMat) -> Result<CMat> {
        match self.dense(n)? {
            Some(l) => {
                self.check_positive(n)?;
                let ch = l.chol.as_ref().ok_or(Error::NotStrictlyPositive { level: n, min_eigenvalue: f64::NAN })?;
                Ok(ch.solve(b))
            }
            None => {
                let mut out = CMat::zeros(b.nrows(), b.ncols());
                for j in 0..b.ncols() {
                    out.set_column(j, &self.solve_matrix_free(n, &b.column(j).into_owned())?);
                }
                Ok(out)
            }
        }
    }

    /// Conjugate gradients on the matrix-free `P_{T,n}`.
    pub fn solve_matrix_free(&self, n: usize, b: &CVec) -> Result<CVec> {
        let dim = b.len();
        let bnorm = b.norm();
        let mut x = CVec::zeros(dim);
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rs = r.norm_squared();
        for _ in 0..(10 * dim).max(100) {
            let ap = CVec::from_vec(self.apply_p(n, p.as_slice())?);
            let pap = p.dotc(&ap).re;
            if !(pap > 0.0) {
                return Err(Error::NotStrictlyPositive { level: n, min_eigenvalue: pap / p.norm_squared() });
            }
            let alpha = c(rs / pap, 0.0);
            x.axpy(alpha, &p, ONE);
            r.axpy(-alpha, &ap, ONE);
            let rs_new = r.norm_squared();
            if rs_new.sqrt() <= 1e-14 * bnorm {
                return Ok(x);
            }
            p = &r + &p * c(rs_new / rs, 0.0);
            rs = rs_new;
        }
        Err(Error::NoConvergence(format!("CG on level {n}")))
    }

    /// `⟨a, P_{T,n} b⟩`.
    pub fn level_inner(&self, n: usize, a: &[C64], b: &[C64]) -> Result<C64> {
        Ok(inner(a, &self.apply_p(n, b)?))
    }

    /// `Σ_n ⟨f_n, P_{T,n} g_n⟩`.
    pub fn twisted_inner(&self, f: &FockVector, g: &FockVector) -> Result<C64> {
        if f.d != self.dim() || g.d != self.dim() || f.levels.len() != g.levels.len() {
            return Err(Error::ShapeMismatch("Fock vectors differ in dimension or truncation".into()));
        }
        let mut s = ZERO;
        for (n, (a, b)) in f.levels.iter().zip(&g.levels).enumerate() {
            s += self.level_inner(n, a.as_slice(), b.as_slice())?;
        }
        Ok(s)
    }

    pub fn twisted_norm(&self, f: &FockVector) -> Result<f64> {
        Ok(self.twisted_inner(f, f)?.re.max(0.0).sqrt())
    }

    /// `a*(ξ)`: level `n` to `n+1` by `ξ ⊗ ·`; the top level maps to zero.
    pub fn create(&self, xi: &CVec, truncation: usize) -> Result<FockOperator> {
        let d = self.dim();
        let mut op = FockOperator::zero(d, truncation);
        let col = CMat::from_column_slice(d, 1, xi.as_slice());
        for n in 0..truncation {
            op.add_block(n + 1, n, kron(&col, &identity(self.level_dim(n)?)));
        }
        Ok(op)
    }

    /// `a_T(h)`: level `n` to `n-1` by `(h* ⊗ 1) R_{T,n}`.
    pub fn annihilate(&self, h: &CVec, truncation: usize) -> Result<FockOperator> {
        let d = self.dim();
        let mut op = FockOperator::zero(d, truncation);
        let row = CMat::from_row_slice(1, d, h.as_slice()).map(|z| z.conj());
        for n in 1..=truncation {
            let (r, _) = self.kernels_r(n)?;
            op.add_block(n - 1, n, kron(&row, &identity(self.level_dim(n - 1)?)) * r);
        }
        Ok(op)
    }

    fn kernels_r(&self, n: usize) -> Result<(CMat, ())> {
        match self.dense(n)? {
            Some(l) => Ok((l.r.clone(), ())),
            None => {
                let dim = self.level_dim(n)?;
                Err(Error::SizeCapExceeded { entries: dim as u128 * dim as u128, cap: self.settings.size_cap })
            }
        }
    }

    /// `X_T(ξ) = a*(ξ) + a_T(Sξ)`.
    pub fn field(&self, xi: &CVec, truncation: usize) -> Result<FockOperator> {
        let sxi = self.subspace.s().apply(xi);
        Ok(self.create(xi, truncation)?.add(&self.annihilate(&sxi, truncation)?))
    }

    /// `Λ_T(A)`: level `n ≥ 1` to itself by `(A ⊗ 1) R_{T,n}`.
    pub fn preservation(&self, a: &CMat, truncation: usize) -> Result<FockOperator> {
        let d = self.dim();
        let mut op = FockOperator::zero(d, truncation);
        for n in 1..=truncation {
            let (r, _) = self.kernels_r(n)?;
            op.add_block(n, n, kron(a, &identity(self.level_dim(n - 1)?)) * r);
        }
        Ok(op)
    }

    /// Adjoint for the twisted inner product: `A†_{n,m} = P_n⁻¹ (A_{m,n})* P_m`.
    pub fn twisted_adjoint(&self, a: &FockOperator) -> Result<FockOperator> {
        let mut out = FockOperator::zero(a.d, a.truncation);
        for (&(m, n), block) in &a.blocks {
            let (_, pm) = self.kernels(m)?;
            let rhs = block.adjoint() * pm;
            out.add_block(n, m, self.solve_matrix(n, &rhs)?);
        }
        Ok(out)
    }

    /// Applies `X_T(ξ)` to a graded vector without forming the operator.
    pub fn apply_field(&self, xi: &CVec, v: &FockVector) -> FockVector {
        let d = self.dim();
        let top = v.truncation();
        let sxi = self.subspace.s().apply(xi);
        let mut out = FockVector::zeros(d, top);
        for n in 0..=top {
            let vn = v.levels[n].as_slice();
            if n < top {
                out.levels[n + 1] += CVec::from_vec(crate::linalg::kron_vec(xi.as_slice(), vn));
            }
            if n >= 1 {
                let rv = self.apply_r(n, vn);
                let block = rv.len() / d;
                let target = &mut out.levels[n - 1];
                for (a, chunk) in rv.chunks(block).enumerate() {
                    let w = sxi[a].conj();
                    for (t, x) in target.iter_mut().zip(chunk) {
                        *t += w * x;
                    }
                }
            }
        }
        out
    }

    /// `X_T(e_{w_1}) ⋯ X_T(e_{w_k}) Ω` for a 0-based word.
    pub fn word_on_vacuum(&self, word: &[usize], truncation: usize) -> Result<FockVector> {
        let d = self.dim();
        if let Some(&bad) = word.iter().find(|&&i| i >= d) {
            return Err(Error::IndexOutOfRange { index: bad + 1, max: d });
        }
        let mut v = FockVector::vacuum(d, truncation);
        for &i in word.iter().rev() {
            v = self.apply_field(&self.subspace.basis().column(i).into_owned(), &v);
        }
        Ok(v)
    }

    /// `⟨Ω, X_T(e_{w_1}) ⋯ X_T(e_{w_k}) Ω⟩`; exact once `truncation ≥ |w|`.
    pub fn vacuum_moment(&self, word: &[usize], truncation: usize) -> Result<C64> {
        if truncation < word.len() {
            return Err(Error::TruncationTooSmall { needed: word.len(), got: truncation });
        }
        Ok(self.word_on_vacuum(word, truncation)?.levels[0][0])
    }

    /// Norm of `A` restricted to level `n`, both sides in the twisted inner product.
    pub fn level_norm(&self, a: &FockOperator, n: usize) -> Result<f64> {
        let dim = self.level_dim(n)?;
        let mut b = CMat::zeros(dim, dim);
        for (&(m, k), block) in &a.blocks {
            if k == n {
                let (_, pm) = self.kernels(m)?;
                b += block.adjoint() * pm * block;
            }
        }
        self.check_positive(n)?;
        let l = self.dense(n)?.expect("kernel is below the cap");
        let low = l.chol.as_ref().expect("positive level has a factorization").l();
        let x = low.solve_lower_triangular(&b).expect("triangular factor is invertible");
        let y = low.solve_lower_triangular(&x.adjoint()).expect("triangular factor is invertible");
        let top = hermitian_eigenvalues(&hermitian_part(&y)).last().copied().unwrap_or(0.0);
        Ok(top.max(0.0).sqrt())
    }

    /// `‖P_{T,n}⁻¹‖ = 1 / λ_min(P_{T,n})`.
    pub fn inverse_norm(&self, n: usize) -> Result<f64> {
        Ok(1.0 / self.min_eigenvalue(n)?)
    }
}

/// Smallest eigenvalue of a positive matrix from its Cholesky factor, by inverse iteration.
fn inverse_iteration(ch: &Cholesky<C64, Dyn>, dim: usize) -> f64 {
    let mut v = CVec::from_fn(dim, |i, _| c(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05));
    v /= c(v.norm(), 0.0);
    let mut est = 0.0;
    for _ in 0..200 {
        let w = ch.solve(&v);
        let rq = v.dotc(&w).re;
        let nw = w.norm();
        v = w / c(nw, 0.0);
        if (rq - est).abs() <= 1e-12 * rq.abs() {
            est = rq;
            break;
        }
        est = rq;
    }
    1.0 / est
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_standard_subspace, BasisMode, SubspaceSpec};
    use crate::twist::{make_twist, TwistKind};

    fn space(d: usize, q: f64) -> FockSpace {
        let h = build_standard_subspace(&SubspaceSpec::tracial(d), BasisMode::ComplexLinear, 1e-10).unwrap();
        let t = make_twist(&TwistKind::QFlip { q }, &h).unwrap();
        FockSpace::new(Arc::new(h), Arc::new(t), Settings::default())
    }

    #[test]
    fn free_kernels_are_identities() {
        let f = space(2, 0.0);
        for n in 0..5 {
            let (r, p) = f.kernels(n).unwrap();
            let i = identity(2usize.pow(n as u32));
            assert_eq!(max_abs(&(r - &i)), 0.0);
            assert_eq!(max_abs(&(p - &i)), 0.0);
        }
    }

    #[test]
    fn kernel_factorization_both_ways() {
        let f = space(2, 0.6);
        for n in 2..6 {
            let (r, p) = f.kernels(n).unwrap();
            let (_, prev) = f.kernels(n - 1).unwrap();
            let other = r.adjoint() * kron(&identity(2), &prev);
            assert!(max_abs(&(&p - other)) < 1e-12);
            assert!(max_abs(&(&p - p.adjoint())) < 1e-14);
        }
    }

    #[test]
    fn one_dimensional_two_particle_norm() {
        let q = 0.37;
        let f = space(1, q);
        let v = FockVector::at_level(1, 2, 2, CVec::from_vec(vec![ONE])).unwrap();
        assert!((f.twisted_inner(&v, &v).unwrap().re - (1.0 + q)).abs() < 1e-14);
        let vac = FockVector::vacuum(1, 2);
        assert_eq!(f.twisted_inner(&vac, &vac).unwrap(), ONE);
    }

    #[test]
    fn matrix_free_matches_dense() {
        let f = space(2, 0.5);
        let mut small = Settings::default();
        small.size_cap = 64;
        let g = FockSpace::new(f.subspace.clone(), f.twist.clone(), small);
        let v = CVec::from_fn(32, |i, _| c(i as f64 * 0.1 - 1.0, (i % 5) as f64 * 0.3));
        let dense = f.solve(5, &v).unwrap();
        let free = g.solve(5, &v).unwrap();
        assert!((dense - free).camax() < 1e-10);
        let pv = f.apply_p(5, v.as_slice()).unwrap();
        let pv2 = g.apply_p(5, v.as_slice()).unwrap();
        assert!(crate::linalg::max_abs_slice(&pv.iter().zip(&pv2).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-12);
        assert!(matches!(g.kernels(5), Err(Error::SizeCapExceeded { .. })));
    }

    #[test]
    fn annihilation_kills_vacuum_and_fields_pair() {
        let f = space(2, 0.3);
        let h = CVec::from_vec(vec![c(0.3, 1.0), c(-2.0, 0.5)]);
        let a = f.annihilate(&h, 3).unwrap();
        let vac = FockVector::vacuum(2, 3);
        assert_eq!(a.apply(&vac).max_abs_diff(&FockVector::zeros(2, 3)), 0.0);
        let xi = CVec::from_vec(vec![c(1.0, 2.0), c(0.5, -1.0)]);
        let eta = CVec::from_vec(vec![c(-0.2, 0.1), c(1.5, 0.0)]);
        let v = f.apply_field(&xi, &f.apply_field(&eta, &vac));
        let want = f.subspace().s().apply(&xi).dotc(&eta);
        assert!((v.level(0)[0] - want).norm() < 1e-14);
        let dense = f.field(&xi, 3).unwrap().compose(&f.field(&eta, 3).unwrap()).apply(&vac);
        assert!(dense.max_abs_diff(&v) < 1e-14);
    }

    #[test]
    fn vacuum_moment_four_letters() {
        let q = 0.45;
        let f = space(1, q);
        let m = f.vacuum_moment(&[0, 0, 0, 0], 4).unwrap();
        assert!((m - c(2.0 + q, 0.0)).norm() < 1e-13);
        assert!(f.vacuum_moment(&[0, 0, 0], 3).unwrap().norm() < 1e-15);
        assert!(matches!(f.vacuum_moment(&[0, 0], 1), Err(Error::TruncationTooSmall { .. })));
    }
}
