//! Twists `T` on `ℋ⊗ℋ`, their embeddings `T_k`, and the structural validator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock;
use crate::hilbert::StandardSubspace;
use crate::linalg::{
    apply_pair, c, check_dense, contract_pair, hermitian_eigenvalues, identity, kron, kron_vec, matrix_of, max_abs,
    op_norm, tensor_dim_capped, CMat, CVec, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Dim2Family {
    Diag { q1: f64, q12: f64, q2: f64 },
    Anti { q1: f64, c: f64 },
    /// `epsilon` must be `1` or `-1`.
    Mixed { q1: f64, q2: f64, epsilon: i8 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum TwistKind {
    /// `q·F` with `F` the tensor flip.
    QFlip { q: f64 },
    /// `T(b_i⊗b_j) = q_ij b_j⊗b_i` in the standard basis; `coeffs[(i, j)] = q_ij`.
    Qij { coeffs: CMat },
    /// One of the two-dimensional tracial families.
    Dim2(Dim2Family),
    /// `c·m*m` on `M_n(ℂ)` with weight `diag(h)`.
    MatrixAlgebra { h: Vec<f64>, c: f64 },
    Raw(CMat),
}

impl TwistKind {
    pub fn label(&self) -> &'static str {
        match self {
            TwistKind::QFlip { .. } => "q-flip",
            TwistKind::Qij { .. } => "q-ij",
            TwistKind::Dim2(_) => "dim2",
            TwistKind::MatrixAlgebra { .. } => "matrix-algebra",
            TwistKind::Raw(_) => "raw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub pass: bool,
    pub residual: f64,
}

impl Flag {
    fn from_residual(residual: f64, tol: f64) -> Flag {
        Flag { pass: residual < tol, residual }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub norm: f64,
    pub self_adjoint: Flag,
    /// Residual is `max(0, ‖T‖ - 1 + tol)`.
    pub norm_lt_one: Flag,
    pub braided: Flag,
    pub compatible: Flag,
    /// `C_1T_2 = C_2T_1` on `ℋ^{⊗3}`.
    pub crossing_symmetric: Flag,
    /// `S a(φ_1)T(φ_2⊗φ_3) = a(φ_3)T(Sφ_2⊗φ_1)` on seeded random vectors.
    pub crossing_symmetric_secondary: Flag,
    /// Residual is `max(0, 2·tol - min eigenvalue)` over the checked levels.
    pub strictly_positive: Flag,
    pub strict_positivity_checked_to_level: usize,
    pub min_eigenvalues: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// Braided, crossing symmetric and compatible.
    pub fn structural_pass(&self) -> bool {
        self.braided.pass && self.crossing_symmetric.pass && self.compatible.pass
    }

    pub fn all_pass(&self) -> bool {
        self.structural_pass() && self.self_adjoint.pass && self.norm_lt_one.pass && self.strictly_positive.pass
    }
}

#[derive(Clone, Debug)]
pub struct Twist {
    d: usize,
    matrix: CMat,
    q: f64,
    label: &'static str,
    report: Option<ValidationReport>,
}

pub fn make_twist(kind: &TwistKind, h: &StandardSubspace) -> Result<Twist> {
    let d = h.dim();
    let matrix = match kind {
        TwistKind::QFlip { q } => {
            if !(q.abs() < 1.0) {
                return Err(Error::BadParams(format!("|q| = {} must be < 1", q.abs())));
            }
            flip(d) * c(*q, 0.0)
        }
        TwistKind::Qij { coeffs } => {
            if coeffs.nrows() != d || coeffs.ncols() != d {
                return Err(Error::BadParams(format!("q_ij must be {d}×{d}")));
            }
            if max_abs(&(coeffs - coeffs.adjoint())) > 1e-12 {
                return Err(Error::BadParams("q_ij must satisfy q_ij = conj(q_ji)".into()));
            }
            let mut t = CMat::zeros(d * d, d * d);
            for i in 0..d {
                for j in 0..d {
                    t[(j * d + i, i * d + j)] = coeffs[(i, j)];
                }
            }
            t
        }
        TwistKind::Dim2(family) => {
            if d != 2 || !h.is_tracial(1e-12) {
                return Err(Error::BadParams("dim2 families need a tracial subspace with d = 2".into()));
            }
            dim2_matrix(family)?
        }
        TwistKind::MatrixAlgebra { h: weights, c: coef } => matrix_algebra(weights, *coef, h)?,
        TwistKind::Raw(m) => {
            if m.nrows() != d * d || m.ncols() != d * d {
                return Err(Error::BadParams(format!("raw twist must be {}×{}", d * d, d * d)));
            }
            m.clone()
        }
    };
    Ok(Twist::from_matrix_labeled(d, matrix, kind.label()))
}

/// Tensor flip on `ℂ^d ⊗ ℂ^d`.
pub fn flip(d: usize) -> CMat {
    let mut f = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = c(1.0, 0.0);
        }
    }
    f
}

fn dim2_matrix(family: &Dim2Family) -> Result<CMat> {
    let r = |rows: [[f64; 4]; 4]| CMat::from_fn(4, 4, |i, j| c(rows[i][j], 0.0));
    Ok(match *family {
        Dim2Family::Diag { q1, q12, q2 } => {
            r([[q1, 0.0, 0.0, 0.0], [0.0, 0.0, q12, 0.0], [0.0, q12, 0.0, 0.0], [0.0, 0.0, 0.0, q2]])
        }
        Dim2Family::Anti { q1, c: cc } => {
            r([[q1, 0.0, 0.0, cc], [0.0, cc, -q1, 0.0], [0.0, -q1, cc, 0.0], [cc, 0.0, 0.0, q1]])
        }
        Dim2Family::Mixed { q1, q2, epsilon } => {
            if epsilon != 1 && epsilon != -1 {
                return Err(Error::BadParams("epsilon must be 1 or -1".into()));
            }
            let s = (q1 + q2) / 2.0;
            let m = epsilon as f64 * ((q1 * q1 + q2 * q2) / 2.0).sqrt();
            r([[q1, 0.0, 0.0, s], [0.0, s, m, 0.0], [0.0, m, s, 0.0], [s, 0.0, 0.0, q2]])
        }
    })
}

/// `c·m*m` in the orthonormal basis `u_ij = E_ij/√h_j`, indexed `i*n + j`.
fn matrix_algebra(weights: &[f64], coef: f64, h: &StandardSubspace) -> Result<CMat> {
    let n = weights.len();
    if n == 0 || weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::BadParams("weights must be positive".into()));
    }
    let d = n * n;
    if h.dim() != d {
        return Err(Error::BadParams(format!("matrix algebra M_{n} needs d = {d}, got {}", h.dim())));
    }
    let mut expected = CMat::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            expected[(i * n + j, i * n + j)] = c(weights[i] / weights[j], 0.0);
        }
    }
    if max_abs(&(h.delta() - expected)) > 1e-10 {
        return Err(Error::BadParams("subspace is not the matrix-algebra subspace for these weights".into()));
    }
    let tr_inv: f64 = weights.iter().map(|w| 1.0 / w).sum();
    if coef < -1.0 / tr_inv {
        return Err(Error::BadParams(format!("c = {coef} is below -1/Tr(h^-1) = {}", -1.0 / tr_inv)));
    }
    // m(u_ij ⊗ u_kl) = δ_jk h_j^{-1/2} u_il
    let mut m = CMat::zeros(d, d * d);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let col = (i * n + j) * d + (j * n + l);
                m[(i * n + l, col)] = c(weights[j].powf(-0.5), 0.0);
            }
        }
    }
    Ok(m.adjoint() * m * c(coef, 0.0))
}

impl Twist {
    pub fn from_matrix(d: usize, matrix: CMat) -> Twist {
        Twist::from_matrix_labeled(d, matrix, "raw")
    }

    fn from_matrix_labeled(d: usize, matrix: CMat, label: &'static str) -> Twist {
        let q = op_norm(&matrix);
        Twist { d, matrix, q, label, report: None }
    }

    pub fn zero(d: usize) -> Twist {
        Twist::from_matrix_labeled(d, CMat::zeros(d * d, d * d), "q-flip")
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
    /// Operator norm `‖T‖`.
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn label(&self) -> &'static str {
        self.label
    }
    pub fn report(&self) -> Option<&ValidationReport> {
        self.report.as_ref()
    }

    /// Runs the validator and stores its report.
    pub fn validated(mut self, h: &StandardSubspace, level: usize, tol: f64, size_cap: usize) -> Twist {
        self.report = Some(validate_twist(&self, h, level, tol, size_cap));
        self
    }

    /// `(U⊗U) T (U*⊗U*)`.
    pub fn conjugated(&self, u: &CMat) -> Twist {
        let uu = kron(u, u);
        Twist::from_matrix_labeled(self.d, &uu * &self.matrix * uu.adjoint(), self.label)
    }

    /// Dense `T_k = 1^{⊗k-1} ⊗ T ⊗ 1^{⊗n-k-1}`.
    pub fn embed(&self, k: usize, n: usize, size_cap: usize) -> Result<CMat> {
        if k == 0 || k >= n {
            return Err(Error::IndexOutOfRange { index: k, max: n.saturating_sub(1) });
        }
        let dim = tensor_dim_capped(self.d, n, usize::MAX)?;
        check_dense(dim, dim, size_cap)?;
        let left = identity(self.d.pow(k as u32 - 1));
        let right = identity(self.d.pow((n - k - 1) as u32));
        Ok(kron(&kron(&left, &self.matrix), &right))
    }

    /// Dense `T_{i,j} = T_i T_{i+1} ⋯ T_{j-1}`, identity when `i = j`.
    pub fn ranged_product(&self, i: usize, j: usize, n: usize, size_cap: usize) -> Result<CMat> {
        if i == 0 || i > j || j > n {
            return Err(Error::IndexOutOfRange { index: j, max: n });
        }
        let dim = tensor_dim_capped(self.d, n, usize::MAX)?;
        check_dense(dim, dim, size_cap)?;
        Ok(crate::linalg::map_columns(&identity(dim), dim, |v| self.apply_ranged(i, j, n, v)))
    }

    /// `T_k v` for `v ∈ (ℂ^d)^{⊗n}` without forming `T_k`.
    pub fn apply_embedded(&self, k: usize, n: usize, v: &[C64]) -> Vec<C64> {
        apply_pair(&self.matrix, self.d, n, k, v)
    }

    /// `T_{i,j} v`; the rightmost factor `T_{j-1}` acts first.
    pub fn apply_ranged(&self, i: usize, j: usize, n: usize, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        for k in (i..j).rev() {
            out = self.apply_embedded(k, n, &out);
        }
        out
    }
}

fn crossing_residual(t: &Twist, h: &StandardSubspace) -> f64 {
    let d = t.d;
    let g = h.pairing();
    let lhs = matrix_of(d, d * d * d, |v| contract_pair(g, d, 3, 1, &t.apply_embedded(2, 3, v)));
    let rhs = matrix_of(d, d * d * d, |v| contract_pair(g, d, 3, 2, &t.apply_embedded(1, 3, v)));
    max_abs(&(lhs - rhs))
}

/// `a(φ)(x⊗y) = ⟨φ, x⟩ y`.
fn free_annihilate(phi: &CVec, v: &[C64], d: usize) -> CVec {
    CVec::from_fn(d, |y, _| (0..d).map(|x| phi[x].conj() * v[x * d + y]).sum())
}

fn secondary_crossing_residual(t: &Twist, h: &StandardSubspace) -> f64 {
    let d = t.d;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut rand_vec = || CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let (p1, p2, p3) = (rand_vec(), rand_vec(), rand_vec());
        let tv = &t.matrix * CVec::from_vec(kron_vec(p2.as_slice(), p3.as_slice()));
        let lhs = h.s().apply(&free_annihilate(&p1, tv.as_slice(), d));
        let sp2 = h.s().apply(&p2);
        let tw = &t.matrix * CVec::from_vec(kron_vec(sp2.as_slice(), p1.as_slice()));
        let rhs = free_annihilate(&p3, tw.as_slice(), d);
        worst = worst.max((lhs - rhs).camax());
    }
    worst
}

/// Runs every structural check; failures are recorded, never raised.
pub fn validate_twist(t: &Twist, h: &StandardSubspace, level: usize, tol: f64, size_cap: usize) -> ValidationReport {
    let d = t.d;
    let mut warnings = Vec::new();
    let self_adjoint = Flag::from_residual(max_abs(&(&t.matrix - t.matrix.adjoint())), tol);
    let norm_lt_one = Flag::from_residual((t.q - 1.0 + tol).max(0.0), tol);
    if t.q >= 1.0 {
        warnings.push(format!("‖T‖ = {} ≥ 1; only ‖T‖ < 1 is supported", t.q));
    }
    let t1 = kron(&t.matrix, &identity(d));
    let t2 = kron(&identity(d), &t.matrix);
    let braided = Flag::from_residual(max_abs(&(&t1 * &t2 * &t1 - &t2 * &t1 * &t2)), tol);
    let dd = kron(h.delta(), h.delta());
    let compatible = Flag::from_residual(max_abs(&(&dd * &t.matrix - &t.matrix * &dd)), tol);
    let crossing_symmetric = Flag::from_residual(crossing_residual(t, h), tol);
    let crossing_symmetric_secondary = Flag::from_residual(secondary_crossing_residual(t, h), tol.max(1e-9));

    let mut min_eigenvalues = Vec::new();
    let mut checked = 0;
    for n in 1..=level {
        let Ok(dim) = tensor_dim_capped(d, n, usize::MAX) else { break };
        if check_dense(dim, dim, size_cap).is_err() {
            warnings.push(format!("strict positivity checked only up to level {checked} (size cap)"));
            break;
        }
        let (_, p) = fock::dense_kernels(t, n);
        min_eigenvalues.push(hermitian_eigenvalues(&p)[0]);
        checked = n;
    }
    let worst = min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let strictly_positive = if min_eigenvalues.is_empty() {
        Flag { pass: false, residual: f64::MAX }
    } else {
        Flag::from_residual((2.0 * tol - worst).max(0.0), tol)
    };
    ValidationReport {
        tolerance: tol,
        norm: t.q,
        self_adjoint,
        norm_lt_one,
        braided,
        compatible,
        crossing_symmetric,
        crossing_symmetric_secondary,
        strictly_positive,
        strict_positivity_checked_to_level: checked,
        min_eigenvalues,
        warnings,
    }
}

/// Residual of the tracial cyclic relations `t^{kl}_{ij} = t^{lj}_{ki}`.
pub fn tracial_cyclic_residual(t: &CMat, d: usize) -> f64 {
    let at = |k: usize, l: usize, i: usize, j: usize| t[(k * d + l, i * d + j)];
    let mut worst: f64 = 0.0;
    for k in 0..d {
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((at(k, l, i, j) - at(l, j, k, i)).norm());
                }
            }
        }
    }
    worst
}

/// Whether `q_ij = q_{j̄i} = q_{īj̄} = q_{jī}` for all `i, j`.
pub fn qij_crossing_condition(q: &CMat, bar: &[usize], tol: f64) -> bool {
    let d = bar.len();
    (0..d).all(|i| {
        (0..d).all(|j| {
            let v = q[(i, j)];
            (v - q[(bar[j], i)]).norm() <= tol
                && (v - q[(bar[i], bar[j])]).norm() <= tol
                && (v - q[(j, bar[i])]).norm() <= tol
        })
    })
}

/// Product of dense slot embeddings, used to cross-check [`Twist::ranged_product`].
pub fn ranged_product_by_embeddings(t: &Twist, i: usize, j: usize, n: usize, cap: usize) -> Result<CMat> {
    let dim = tensor_dim_capped(t.d, n, cap)?;
    let mut acc = identity(dim);
    for k in i..j {
        acc *= t.embed(k, n, cap)?;
    }
    Ok(acc)
}
