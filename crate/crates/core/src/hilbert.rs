//! Standard subspaces `H ⊂ ℂ^d` given by their Tomita data, plus spectral classifiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, conj_mat, conj_vec, hermitian_eigenvalues, hermitian_function, max_abs, CMat, CVec, ONE};

/// An antilinear map `v ↦ M·conj(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AntilinearMap {
    matrix: CMat,
}

impl AntilinearMap {
    pub fn new(matrix: CMat) -> Self {
        AntilinearMap { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.matrix * conj_vec(v)
    }

    /// Matrix of the linear map `self ∘ other`.
    pub fn compose(&self, other: &AntilinearMap) -> CMat {
        &self.matrix * conj_mat(&other.matrix)
    }

    /// Max-abs defect of `self ∘ self = 1`.
    pub fn involution_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        max_abs(&(self.compose(self) - CMat::identity(n, n)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    /// Arbitrary complex basis, dual basis from the Gram solve.
    #[default]
    ComplexLinear,
    /// Basis of `H` orthonormal for `Re⟨·,·⟩`, with `f_i = (1+Δ)e_i/2`.
    RealOrthonormal,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubspaceSpec {
    /// `Δ e_i = λ_i e_i` and `J e_i = e_{ī}`; `involution[i] = ī` (0-based).
    Eigen { eigenvalues: Vec<f64>, involution: Vec<usize> },
    /// Raw `Δ` and the matrix of `J` (acting as `v ↦ J·conj(v)`).
    Matrices { delta: CMat, j: CMat },
}

impl SubspaceSpec {
    /// Tracial subspace of dimension `d`: `Δ = 1`, `J` = complex conjugation.
    pub fn tracial(d: usize) -> Self {
        SubspaceSpec::Eigen { eigenvalues: vec![1.0; d], involution: (0..d).collect() }
    }

    /// `M_n(ℂ)` with weight `h`: orthonormal basis `E_ij/√h_j` indexed row-major, so that
    /// `Δ u_ij = (h_i/h_j) u_ij` and `J u_ij = u_ji`.
    pub fn matrix_algebra(h: &[f64]) -> Self {
        let n = h.len();
        let mut eigenvalues = Vec::with_capacity(n * n);
        let mut involution = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                eigenvalues.push(h[i] / h[j]);
                involution.push(j * n + i);
            }
        }
        SubspaceSpec::Eigen { eigenvalues, involution }
    }
}

#[derive(Clone, Debug)]
pub struct StandardSubspace {
    d: usize,
    delta: CMat,
    delta_sqrt: CMat,
    j: AntilinearMap,
    s: AntilinearMap,
    s_adjoint: AntilinearMap,
    pairing: CMat,
    mode: BasisMode,
    basis: CMat,
    dual: CMat,
    s_norm: f64,
    spectrum: Vec<f64>,
}

pub fn build_standard_subspace(spec: &SubspaceSpec, mode: BasisMode, tol: f64) -> Result<StandardSubspace> {
    let (delta, j) = match spec {
        SubspaceSpec::Eigen { eigenvalues, involution } => from_eigen_data(eigenvalues, involution, tol)?,
        SubspaceSpec::Matrices { delta, j } => (delta.clone(), j.clone()),
    };
    StandardSubspace::from_matrices(delta, j, mode, tol)
}

fn from_eigen_data(lambda: &[f64], bar: &[usize], tol: f64) -> Result<(CMat, CMat)> {
    let d = lambda.len();
    if bar.len() != d || d == 0 {
        return Err(Error::ShapeMismatch(format!("{} eigenvalues but {} involution entries", d, bar.len())));
    }
    if let Some(&l) = lambda.iter().find(|&&l| !(l > tol) || !l.is_finite()) {
        return Err(Error::NotPositive { min_eigenvalue: l });
    }
    for (i, &b) in bar.iter().enumerate() {
        if b >= d || bar[b] != i {
            return Err(Error::NotInvolutive { residual: 1.0 });
        }
        let want = 1.0 / lambda[i];
        if (lambda[b] - want).abs() > tol * want.max(1.0) {
            return Err(Error::BadPairing { index: i, lambda: lambda[i], lambda_bar: lambda[b] });
        }
    }
    let delta = CMat::from_diagonal(&CVec::from_iterator(d, lambda.iter().map(|&l| c(l, 0.0))));
    let mut j = CMat::zeros(d, d);
    for (i, &b) in bar.iter().enumerate() {
        j[(b, i)] = ONE;
    }
    Ok((delta, j))
}

impl StandardSubspace {
    fn from_matrices(delta: CMat, j: CMat, mode: BasisMode, tol: f64) -> Result<Self> {
        let d = delta.nrows();
        if d == 0 || delta.ncols() != d || j.nrows() != d || j.ncols() != d {
            return Err(Error::ShapeMismatch("Δ and J must be square of the same size".into()));
        }
        let herm = max_abs(&(&delta - delta.adjoint()));
        if herm > tol {
            return Err(Error::NotPositive { min_eigenvalue: f64::NAN });
        }
        let delta = crate::linalg::hermitian_part(&delta);
        let spectrum = hermitian_eigenvalues(&delta);
        if spectrum[0] <= tol {
            return Err(Error::NotPositive { min_eigenvalue: spectrum[0] });
        }
        let j = AntilinearMap::new(j);
        let unitary = max_abs(&(j.matrix().adjoint() * j.matrix() - CMat::identity(d, d)));
        let residual = j.involution_residual().max(unitary);
        if residual > tol {
            return Err(Error::NotInvolutive { residual });
        }
        let delta_inv = hermitian_function(&delta, |l| 1.0 / l);
        let jdj = j.matrix() * conj_mat(&delta) * conj_mat(j.matrix());
        let residual = max_abs(&(jdj - &delta_inv));
        if residual > tol * spectrum[d - 1].max(1.0 / spectrum[0]) {
            return Err(Error::ModularMismatch { residual });
        }
        let delta_sqrt = hermitian_function(&delta, f64::sqrt);
        let s = AntilinearMap::new(j.matrix() * conj_mat(&delta_sqrt));
        let s_adjoint = AntilinearMap::new(&delta_sqrt * j.matrix());
        let pairing = s.matrix().adjoint();
        let s_norm = spectrum[d - 1].sqrt();
        let mut out = StandardSubspace {
            d,
            delta,
            delta_sqrt,
            j,
            s,
            s_adjoint,
            pairing,
            mode,
            basis: CMat::identity(d, d),
            dual: CMat::identity(d, d),
            s_norm,
            spectrum,
        };
        match mode {
            BasisMode::ComplexLinear => out.set_complex_basis(CMat::identity(d, d))?,
            BasisMode::RealOrthonormal => out.set_real_orthonormal_basis()?,
        }
        Ok(out)
    }

    fn set_complex_basis(&mut self, basis: CMat) -> Result<()> {
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::ShapeMismatch("basis matrix is singular".into()))?;
        self.dual = inv.adjoint();
        self.basis = basis;
        Ok(())
    }

    /// Replaces the basis by the columns of `basis`; switches to complex-linear mode.
    pub fn with_basis(mut self, basis: CMat) -> Result<Self> {
        if basis.nrows() != self.d || basis.ncols() != self.d {
            return Err(Error::ShapeMismatch("basis must be d×d".into()));
        }
        self.mode = BasisMode::ComplexLinear;
        self.set_complex_basis(basis)?;
        Ok(self)
    }

    fn set_real_orthonormal_basis(&mut self) -> Result<()> {
        let d = self.d;
        let mut found: Vec<CVec> = Vec::with_capacity(d);
        for k in 0..d {
            for phase in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut b = CVec::zeros(d);
                b[k] = phase;
                let mut v = &b + self.s.apply(&b);
                for e in &found {
                    let r = e.dotc(&v).re;
                    v -= e.scale(r);
                }
                let nv = v.norm();
                if nv > 1e-8 && found.len() < d {
                    found.push(v.unscale(nv));
                }
            }
        }
        if found.len() != d {
            return Err(Error::ShapeMismatch(format!("real span of H has dimension {} ≠ {}", found.len(), d)));
        }
        let mut basis = CMat::zeros(d, d);
        for (i, e) in found.iter().enumerate() {
            basis.set_column(i, e);
        }
        let half = CMat::identity(d, d) + &self.delta;
        self.dual = half * &basis * c(0.5, 0.0);
        self.basis = basis;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn delta(&self) -> &CMat {
        &self.delta
    }
    pub fn delta_sqrt(&self) -> &CMat {
        &self.delta_sqrt
    }
    pub fn j(&self) -> &AntilinearMap {
        &self.j
    }
    pub fn s(&self) -> &AntilinearMap {
        &self.s
    }
    pub fn s_adjoint(&self) -> &AntilinearMap {
        &self.s_adjoint
    }
    pub fn mode(&self) -> BasisMode {
        self.mode
    }
    /// Columns are `e_1..e_d`.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }
    /// Columns are `f_1..f_d` with `⟨f_i, e_j⟩ = δ_ij`.
    pub fn dual_basis(&self) -> &CMat {
        &self.dual
    }
    /// `‖S‖ = ‖Δ‖^{1/2}`.
    pub fn s_norm(&self) -> f64 {
        self.s_norm
    }
    /// Eigenvalues of `Δ`, ascending, with multiplicity.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }
    /// `G` with `⟨Sξ, η⟩ = ξᵀ G η`.
    pub fn pairing(&self) -> &CMat {
        &self.pairing
    }

    pub fn is_tracial(&self, tol: f64) -> bool {
        max_abs(&(&self.delta - CMat::identity(self.d, self.d))) <= tol
    }

    /// Matrix `A` of `Δ^{-1}` in the basis `e`: `Δ^{-1} e_j = Σ_k A_kj e_k`.
    pub fn a_matrix(&self) -> CMat {
        let inv = self.basis.clone().try_inverse().expect("basis is invertible");
        let delta_inv = hermitian_function(&self.delta, |l| 1.0 / l);
        inv * delta_inv * &self.basis
    }

    /// Gram matrix `⟨e_i, e_j⟩` at `(i, j)`.
    pub fn gram(&self) -> CMat {
        self.basis.adjoint() * &self.basis
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "lambda")]
pub enum FactorTag {
    II1,
    IIIlambda(f64),
    III1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Exact,
    Numerical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorType {
    pub tag: FactorTag,
    pub confidence: Confidence,
}

/// Eigenvalues known exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactSpectrum {
    /// Each eigenvalue as `numerator / denominator`.
    Rationals(Vec<(u64, u64)>),
    /// Each eigenvalue as `base^k`.
    Powers { base: f64, exponents: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumInput {
    Exact(ExactSpectrum),
    Numerical(Vec<f64>),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn factorize(mut n: u64, out: &mut Vec<(u64, i64)>, sign: i64) {
    let mut p = 2u64;
    while p * p <= n {
        while n % p == 0 {
            add_exponent(out, p, sign);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        add_exponent(out, n, sign);
    }
}

fn add_exponent(out: &mut Vec<(u64, i64)>, p: u64, e: i64) {
    match out.iter_mut().find(|(q, _)| *q == p) {
        Some(slot) => slot.1 += e,
        None => out.push((p, e)),
    }
}

/// Rank of an integer matrix by fraction-free elimination.
fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let (a, b) = (m[rank][col], m[r][col]);
                for k in 0..cols {
                    m[r][k] = m[r][k] * a - m[rank][k] * b;
                }
                let g = m[r].iter().fold(0i128, |g, &x| {
                    let (mut a, mut b) = (g.abs(), x.abs());
                    while b != 0 {
                        (a, b) = (b, a % b);
                    }
                    a
                });
                if g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn lambda_below_one(x: f64) -> f64 {
    if x > 1.0 {
        1.0 / x
    } else {
        x
    }
}

fn classify_exact(spec: &ExactSpectrum) -> Result<FactorTag> {
    match spec {
        ExactSpectrum::Powers { base, exponents } => {
            if !(*base > 0.0) {
                return Err(Error::NonPositiveEigenvalue(*base));
            }
            let g = exponents.iter().fold(0, |g, &e| gcd(g, e));
            if g == 0 || *base == 1.0 {
                return Ok(FactorTag::II1);
            }
            Ok(FactorTag::IIIlambda(lambda_below_one(base.powi(g as i32))))
        }
        ExactSpectrum::Rationals(values) => {
            let mut vectors: Vec<Vec<(u64, i64)>> = Vec::with_capacity(values.len());
            let mut primes: Vec<u64> = Vec::new();
            for &(num, den) in values {
                if num == 0 || den == 0 {
                    return Err(Error::NonPositiveEigenvalue(if den == 0 { f64::NAN } else { 0.0 }));
                }
                let mut v = Vec::new();
                factorize(num, &mut v, 1);
                factorize(den, &mut v, -1);
                v.retain(|&(_, e)| e != 0);
                for &(p, _) in &v {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
                vectors.push(v);
            }
            let rows: Vec<Vec<i64>> = vectors
                .iter()
                .map(|v| {
                    primes.iter().map(|p| v.iter().find(|(q, _)| q == p).map_or(0, |&(_, e)| e)).collect()
                })
                .collect();
            match integer_rank(&rows) {
                0 => Ok(FactorTag::II1),
                1 => {
                    let first = rows.iter().find(|r| r.iter().any(|&x| x != 0)).expect("rank one");
                    let g0 = first.iter().fold(0, |g, &x| gcd(g, x));
                    let dir: Vec<i64> = first.iter().map(|&x| x / g0).collect();
                    let lead = dir.iter().position(|&x| x != 0).expect("nonzero direction");
                    let g = rows.iter().fold(0, |g, r| gcd(g, r[lead] / dir[lead]));
                    let log: f64 = primes.iter().zip(&dir).map(|(&p, &e)| (e * g) as f64 * (p as f64).ln()).sum();
                    Ok(FactorTag::IIIlambda((-log.abs()).exp()))
                }
                _ => Ok(FactorTag::III1),
            }
        }
    }
}

/// Best rational approximation `p/q` of `x` with `q ≤ bound` among continued-fraction convergents.
fn convergents(x: f64, bound: u64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i64;
        let h = ai * h1 + h0;
        let k = ai * k1 + k0;
        if k as u64 > bound {
            break;
        }
        out.push((h, k));
        (h0, h1, k0, k1) = (h1, h, k1, k);
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

fn classify_numerical(eigenvalues: &[f64], tol: f64, denominator_bound: u64) -> Result<FactorTag> {
    if let Some(&l) = eigenvalues.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NonPositiveEigenvalue(l));
    }
    let logs: Vec<f64> = eigenvalues.iter().map(|l| l.ln()).filter(|l| l.abs() > tol).collect();
    let Some(&reference) = logs.iter().min_by(|a, b| a.abs().total_cmp(&b.abs())) else {
        return Ok(FactorTag::II1);
    };
    let mut fractions = Vec::with_capacity(logs.len());
    for &l in &logs {
        let ratio = l / reference;
        let fit = convergents(ratio, denominator_bound)
            .into_iter()
            .find(|&(p, q)| (ratio - p as f64 / q as f64).abs() <= tol * ratio.abs().max(1.0));
        match fit {
            Some(f) => fractions.push(f),
            None => return Ok(FactorTag::III1),
        }
    }
    let lcm = fractions.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
    let g = fractions.iter().fold(0i64, |g, &(p, q)| gcd(g, p * (lcm / q)));
    let generator = reference.abs() * g as f64 / lcm as f64;
    Ok(FactorTag::IIIlambda((-generator).exp()))
}

/// Type of the generated factor from the closed subgroup generated by the spectrum of `Δ`.
pub fn classify_factor_type(input: &SpectrumInput, tol: f64, denominator_bound: u64) -> Result<FactorType> {
    match input {
        SpectrumInput::Exact(spec) => Ok(FactorType { tag: classify_exact(spec)?, confidence: Confidence::Exact }),
        SpectrumInput::Numerical(values) => Ok(FactorType {
            tag: classify_numerical(values, tol, denominator_bound)?,
            confidence: Confidence::Numerical,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonInjectivity {
    pub holds: bool,
    /// Threshold `C` maximizing `dim E([1,C]) / C`.
    pub best_c: Option<f64>,
    pub best_ratio: f64,
    /// `16 / (1-q)²`.
    pub threshold: f64,
    pub note: String,
}

/// Checks `dim E_Δ([1,C]) / C > 16/(1-q)²` over the spectral thresholds `C ≥ 1`.
pub fn noninjectivity_criterion(spectrum: &[f64], q: f64) -> Result<NonInjectivity> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidNorm(q));
    }
    let threshold = 16.0 / ((1.0 - q) * (1.0 - q));
    let eps = 1e-12;
    let mut candidates: Vec<f64> = spectrum.iter().copied().filter(|&l| l >= 1.0 - eps).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= eps * b.abs().max(1.0));
    let mut best: Option<(f64, f64)> = None;
    for &cand in &candidates {
        let cc = cand.max(1.0);
        let dim = spectrum.iter().filter(|&&l| l >= 1.0 - eps && l <= cc * (1.0 + eps)).count();
        let ratio = dim as f64 / cc;
        if best.is_none_or(|(_, r)| ratio > r) {
            best = Some((cc, ratio));
        }
    }
    let (best_c, best_ratio) = match best {
        Some((cc, r)) => (Some(cc), r),
        None => (None, 0.0),
    };
    Ok(NonInjectivity {
        holds: best_ratio > threshold,
        best_c,
        best_ratio,
        threshold,
        note: "finite atomic spectrum; C scanned over eigenvalues ≥ 1".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nontracial() -> StandardSubspace {
        let spec = SubspaceSpec::Eigen { eigenvalues: vec![2.0, 0.5], involution: vec![1, 0] };
        build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10).unwrap()
    }

    #[test]
    fn tracial_subspace() {
        let h = build_standard_subspace(&SubspaceSpec::tracial(2), BasisMode::ComplexLinear, 1e-10).unwrap();
        assert!(max_abs(&(h.delta() - CMat::identity(2, 2))) < 1e-15);
        assert!(max_abs(&(h.s().matrix() - CMat::identity(2, 2))) < 1e-15);
        assert_eq!(h.s_norm(), 1.0);
    }

    #[test]
    fn swapped_pair() {
        let h = nontracial();
        assert!((h.delta()[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((h.delta()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert_eq!(h.j().matrix()[(1, 0)], ONE);
        assert!((h.s_norm() - 2f64.sqrt()).abs() < 1e-14);
        let e1 = CVec::from_vec(vec![ONE, c(0.0, 0.0)]);
        let se1 = h.s().apply(&e1);
        assert!((se1[1].re - 2f64.sqrt()).abs() < 1e-14 && se1[0].norm() < 1e-14);
    }

    #[test]
    fn bad_pairing_is_rejected() {
        let spec = SubspaceSpec::Eigen { eigenvalues: vec![2.0, 3.0], involution: vec![1, 0] };
        assert!(matches!(
            build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10),
            Err(Error::BadPairing { .. })
        ));
        let spec = SubspaceSpec::Eigen { eigenvalues: vec![1.0, 1.0, 1.0], involution: vec![1, 2, 0] };
        assert!(matches!(
            build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10),
            Err(Error::NotInvolutive { .. })
        ));
    }

    #[test]
    fn raw_matrix_errors() {
        let delta = CMat::from_diagonal(&CVec::from_vec(vec![c(2.0, 0.0), c(0.5, 0.0)]));
        let spec = SubspaceSpec::Matrices { delta: delta.clone(), j: CMat::identity(2, 2) };
        assert!(matches!(
            build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10),
            Err(Error::ModularMismatch { .. })
        ));
        let spec = SubspaceSpec::Matrices { delta: -CMat::identity(2, 2), j: CMat::identity(2, 2) };
        assert!(matches!(
            build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10),
            Err(Error::NotPositive { .. })
        ));
        let spec = SubspaceSpec::Matrices { delta, j: CMat::identity(2, 2) * c(2.0, 0.0) };
        assert!(matches!(
            build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10),
            Err(Error::NotInvolutive { .. })
        ));
    }

    #[test]
    fn s_is_an_involution_bounded_by_its_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [
            SubspaceSpec::Eigen { eigenvalues: vec![2.0, 0.5, 1.0], involution: vec![1, 0, 2] },
            SubspaceSpec::matrix_algebra(&[1.0, 3.0]),
        ] {
            for mode in [BasisMode::ComplexLinear, BasisMode::RealOrthonormal] {
                let h = build_standard_subspace(&spec, mode, 1e-10).unwrap();
                assert!(h.s().involution_residual() < 1e-12);
                for _ in 0..100 {
                    let v = CVec::from_fn(h.dim(), |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                    let sv = h.s().apply(&v);
                    assert!(norm(sv.as_slice()) <= h.s_norm() * norm(v.as_slice()) * (1.0 + 1e-12));
                    assert!((h.s().apply(&sv) - &v).camax() < 1e-12);
                }
                let duality = h.dual_basis().adjoint() * h.basis();
                assert!(max_abs(&(duality - CMat::identity(h.dim(), h.dim()))) < 1e-12);
            }
        }
    }

    #[test]
    fn real_orthonormal_covariance() {
        let spec = SubspaceSpec::Eigen { eigenvalues: vec![2.0, 0.5, 3.0, 1.0 / 3.0], involution: vec![1, 0, 3, 2] };
        let h = build_standard_subspace(&spec, BasisMode::RealOrthonormal, 1e-10).unwrap();
        let d = h.dim();
        let a = h.a_matrix();
        let cov = (CMat::identity(d, d) + &a).try_inverse().unwrap() * c(2.0, 0.0);
        // ⟨e_k, e_j⟩ = [2/(1+A)]_{jk}
        assert!(max_abs(&(h.gram().transpose() - cov)) < 1e-12);
        for k in 0..d {
            let e = h.basis().column(k).into_owned();
            assert!((h.s().apply(&e) - &e).camax() < 1e-12);
        }
        assert!(max_abs(&(h.gram().map(|z| c(z.re, 0.0)) - CMat::identity(d, d))) < 1e-12);
    }

    #[test]
    fn factor_type_anchors() {
        let tol = 1e-10;
        let t = classify_factor_type(&SpectrumInput::Numerical(vec![1.0; 3]), tol, 64).unwrap();
        assert_eq!(t.tag, FactorTag::II1);
        let t = classify_factor_type(&SpectrumInput::Numerical(vec![2.0, 0.5]), tol, 64).unwrap();
        match t.tag {
            FactorTag::IIIlambda(l) => assert!((l - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let t = classify_factor_type(&SpectrumInput::Numerical(vec![4.0, 0.25, 8.0, 0.125, 1.0]), tol, 64).unwrap();
        match t.tag {
            FactorTag::IIIlambda(l) => assert!((l - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let exact = ExactSpectrum::Rationals(vec![(2, 1), (3, 1), (1, 2), (1, 3)]);
        let t = classify_factor_type(&SpectrumInput::Exact(exact), tol, 64).unwrap();
        assert_eq!(t, FactorType { tag: FactorTag::III1, confidence: Confidence::Exact });
        let t = classify_factor_type(&SpectrumInput::Numerical(vec![2.0, 3.0, 0.5, 1.0 / 3.0]), tol, 64).unwrap();
        assert_eq!(t.tag, FactorTag::III1);
        let exact = ExactSpectrum::Rationals(vec![(4, 9), (9, 4), (8, 27), (27, 8), (1, 1)]);
        match classify_factor_type(&SpectrumInput::Exact(exact), tol, 64).unwrap().tag {
            FactorTag::IIIlambda(l) => assert!((l - 2.0 / 3.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(classify_factor_type(&SpectrumInput::Numerical(vec![1.0, -1.0]), tol, 64).is_err());
    }

    #[test]
    fn power_mode_agrees_with_numerical_mode() {
        for exps in [vec![2, -2, 4, -4, 0], vec![3, -3], vec![0, 0], vec![6, -6, 9, -9]] {
            let base = 0.7f64;
            let exact = classify_factor_type(
                &SpectrumInput::Exact(ExactSpectrum::Powers { base, exponents: exps.clone() }),
                1e-10,
                64,
            )
            .unwrap();
            let values: Vec<f64> = exps.iter().map(|&k| base.powi(k as i32)).collect();
            let num = classify_factor_type(&SpectrumInput::Numerical(values), 1e-9, 64).unwrap();
            match (exact.tag, num.tag) {
                (FactorTag::IIIlambda(a), FactorTag::IIIlambda(b)) => assert!((a - b).abs() < 1e-9),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn noninjectivity_anchors() {
        assert!(noninjectivity_criterion(&[1.0; 17], 0.0).unwrap().holds);
        let r = noninjectivity_criterion(&[1.0; 16], 0.0).unwrap();
        assert!(!r.holds);
        assert_eq!(r.best_c, Some(1.0));
        assert!(!noninjectivity_criterion(&[2.0, 0.5], 0.9).unwrap().holds);
        assert!(matches!(noninjectivity_criterion(&[1.0], 1.0), Err(Error::InvalidNorm(_))));
    }
}
