//! Difference quotients, the conjugate-variable series and the quasi-free potential.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockSpace, FockVector};
use crate::hilbert::BasisMode;
use crate::linalg::{tensor_dim, CMat, CVec, C64, ONE, ZERO};
use crate::matchings::{enumerate_b, enumerate_matchings};
use crate::wick::{wick_polynomial, NCPolynomial, Word, PRUNE};
use crate::Model;

/// Element of `ℂ⟨x⟩ ⊗ ℂ⟨x⟩`, keyed by `(left word, right word)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPolynomial {
    terms: BTreeMap<(Word, Word), C64>,
}

impl BiPolynomial {
    pub fn zero() -> Self {
        BiPolynomial::default()
    }

    pub fn add_term(&mut self, left: Word, right: Word, c: C64) {
        *self.terms.entry((left, right)).or_insert(ZERO) += c;
    }

    pub fn coeff(&self, left: &[usize], right: &[usize]) -> C64 {
        self.terms.get(&(left.to_vec(), right.to_vec())).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> &BTreeMap<(Word, Word), C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn pruned(mut self, threshold: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > threshold);
        self
    }
}

/// `∂_i`: sum over occurrences of `x_i`, splitting the word around it.
pub fn free_dq(p: &NCPolynomial, i: usize) -> BiPolynomial {
    let mut out = BiPolynomial::zero();
    for (w, c) in p.terms() {
        for (m, &letter) in w.iter().enumerate() {
            if letter == i {
                out.add_term(w[..m].to_vec(), w[m + 1..].to_vec(), *c);
            }
        }
    }
    out.pruned(0.0)
}

/// Element of `F(ℋ) ⊗ F(ℋ)`: block `(l, r)` is a `d^l × d^r` coefficient matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairTensor {
    blocks: BTreeMap<(usize, usize), CMat>,
}

impl PairTensor {
    pub fn zero() -> Self {
        PairTensor::default()
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), CMat> {
        &self.blocks
    }

    pub fn block(&self, l: usize, r: usize) -> Option<&CMat> {
        self.blocks.get(&(l, r))
    }

    pub fn add_block(&mut self, l: usize, r: usize, m: &CMat) {
        match self.blocks.get_mut(&(l, r)) {
            Some(b) => *b += m,
            None => {
                self.blocks.insert((l, r), m.clone());
            }
        }
    }

    /// Adds `c · a ⊗ b` (bilinear, no conjugation).
    pub fn add_outer(&mut self, l: usize, r: usize, a: &[C64], b: &[C64], c: C64) {
        let m = CMat::from_fn(a.len(), b.len(), |x, y| c * a[x] * b[y]);
        self.add_block(l, r, &m);
    }

    /// `⟨Ω⊗Ω, ·⟩`.
    pub fn vacuum_component(&self) -> C64 {
        self.block(0, 0).map(|b| b[(0, 0)]).unwrap_or(ZERO)
    }

    pub fn max_abs_diff(&self, other: &PairTensor) -> f64 {
        let mut worst: f64 = 0.0;
        let keys: std::collections::BTreeSet<_> = self.blocks.keys().chain(other.blocks.keys()).collect();
        for k in keys {
            let diff = match (self.blocks.get(k), other.blocks.get(k)) {
                (Some(a), Some(b)) => crate::linalg::max_abs(&(a - b)),
                (Some(a), None) | (None, Some(a)) => crate::linalg::max_abs(a),
                (None, None) => 0.0,
            };
            worst = worst.max(diff);
        }
        worst
    }
}

/// `∇_i^k Ξ` as a `d^{k-1} × d^{n-k}` matrix; `i` is 0-based, `k` is 1-based.
pub fn nabla(f_i: &[C64], k: usize, xi: &[C64], n: usize) -> Result<CMat> {
    let d = f_i.len();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, max: n });
    }
    if Some(xi.len()) != tensor_dim(d, n) {
        return Err(Error::ShapeMismatch(format!("tensor of length {} is not on {n} slots", xi.len())));
    }
    let right = d.pow((n - k) as u32);
    let left = d.pow((k - 1) as u32);
    Ok(CMat::from_fn(left, right, |a, c| {
        (0..d).map(|x| f_i[x].conj() * xi[(a * d + x) * right + c]).sum()
    }))
}

fn dual_vector(model: &Model, i: usize) -> Result<Vec<C64>> {
    let d = model.dim();
    if i >= d {
        return Err(Error::IndexOutOfRange { index: i + 1, max: d });
    }
    Ok(model.subspace.dual_basis().column(i).iter().copied().collect())
}

/// `∂_iΦ(Ξ) = Σ_π Σ_{k∈∩p(π)} (-1)^{|p(π)|} ∇_i^{ps(k,π)} W_π^T Ξ`.
pub fn dq_wick(model: &Model, xi: &[C64], n: usize, i: usize) -> Result<PairTensor> {
    let f = dual_vector(model, i)?;
    let mut out = PairTensor::zero();
    for pi in enumerate_matchings(n, model.settings.matching_cap)? {
        let ks: Vec<usize> = pi.pair_intersection().into_iter().filter(|&k| pi.is_singleton(k)).collect();
        if ks.is_empty() {
            continue;
        }
        let y = model.contractions.w_apply(&pi, xi)?;
        let s = pi.num_singletons();
        let sign = if pi.num_pairs() % 2 == 0 { ONE } else { -ONE };
        for k in ks {
            let pos = pi.singleton_position(k)?;
            out.add_block(pos - 1, s - pos, &(nabla(&f, pos, &y, s)? * sign));
        }
    }
    Ok(out)
}

/// Both legs of a bipolynomial evaluated on the vacuum, `(P ⊗ Q) ↦ PΩ ⊗ QΩ`.
pub fn bipolynomial_on_vacuum(fock: &FockSpace, b: &BiPolynomial) -> Result<PairTensor> {
    let mut out = PairTensor::zero();
    for ((u, v), c) in b.terms() {
        let left = fock.word_on_vacuum(u, u.len())?;
        let right = fock.word_on_vacuum(v, v.len())?;
        for (l, a) in left.levels().iter().enumerate() {
            if a.iter().all(|z| *z == ZERO) {
                continue;
            }
            for (r, bb) in right.levels().iter().enumerate() {
                if bb.iter().all(|z| *z == ZERO) {
                    continue;
                }
                out.add_outer(l, r, a.as_slice(), bb.as_slice(), *c);
            }
        }
    }
    Ok(out)
}

/// `ω(q)` with `ω(q)² = (1-q²)^{-1} ∏_k (1-q^k)/(1+q^k)`.
pub fn omega(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::InvalidNorm(q));
    }
    let mut w2 = 1.0 / (1.0 - q * q);
    let mut qk = q;
    while qk > 1e-16 {
        w2 *= (1.0 - qk) / (1.0 + qk);
        qk *= q;
    }
    Ok(w2.sqrt())
}

const TAIL_MAX_TERMS: usize = 20_000;

/// `Σ_{n>m} exp(log_term(n))`, stopped once terms fall geometrically below the running sum.
///
/// `ln_fact[k] = ln k!` is supplied for the term closures. Returns `∞` when the series does not
/// settle within the term budget.
fn log_tail<F: Fn(usize, &[f64]) -> f64>(m: usize, log_term: F) -> f64 {
    let ln_fact = ln_factorials(2 * (m + TAIL_MAX_TERMS) + 4);
    let mut sum = 0.0f64;
    let mut prev = f64::NAN;
    for n in m + 1..m + 1 + TAIL_MAX_TERMS {
        let lt = log_term(n, &ln_fact);
        if lt == f64::NEG_INFINITY {
            return sum;
        }
        let t = lt.exp();
        if !t.is_finite() {
            return f64::INFINITY;
        }
        sum += t;
        let ratio = (lt - prev).exp();
        if ratio < 0.5 && t <= sum * 1e-17 {
            // remaining terms shrink at least geometrically from here
            return sum + t * ratio / (1.0 - ratio);
        }
        prev = lt;
    }
    f64::INFINITY
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Certified tail `Σ_{n>M} (2n+1)! ω^{-2n-1} d^{n/2} ‖S‖^n q^{n(n+1)/2} ‖f_i‖`.
pub fn conjugate_tail(m: usize, q: f64, d: usize, s_norm: f64, f_norm: f64) -> Result<f64> {
    let w = omega(q)?;
    if q == 0.0 || f_norm == 0.0 {
        return Ok(0.0);
    }
    let (lw, ld, ls, lq, lf) = (w.ln(), (d as f64).ln(), s_norm.ln(), q.ln(), f_norm.ln());
    Ok(log_tail(m, |n, lf_tab| {
        let nf = n as f64;
        lf_tab[2 * n + 1] - (2.0 * nf + 1.0) * lw + 0.5 * nf * ld + nf * ls + 0.5 * nf * (nf + 1.0) * lq + lf
    }))
}

/// Same series with `|B(2n+1)| = n!` in place of `(2n+1)!`.
pub fn conjugate_tail_sharp(m: usize, q: f64, d: usize, s_norm: f64, f_norm: f64) -> Result<f64> {
    let w = omega(q)?;
    if q == 0.0 || f_norm == 0.0 {
        return Ok(0.0);
    }
    let (lw, ld, ls, lq, lf) = (w.ln(), (d as f64).ln(), s_norm.ln(), q.ln(), f_norm.ln());
    Ok(log_tail(m, |n, lf_tab| {
        let nf = n as f64;
        lf_tab[n] - (2.0 * nf + 1.0) * lw + 0.5 * nf * ld + nf * ls + 0.5 * nf * (nf + 1.0) * lq + lf
    }))
}

/// `Σ_{m>M} d^{7m/2+1/2} ((2m+1)!)² ω^{-2m-1} q^{m(m+1)/2} ‖S‖^{3m+5} R^{2m+1}`.
pub fn transport_tail(m: usize, q: f64, d: usize, s_norm: f64, r: f64) -> Result<f64> {
    let w = omega(q)?;
    if q == 0.0 {
        return Ok(0.0);
    }
    let (lw, ld, ls, lq, lr) = (w.ln(), (d as f64).ln(), s_norm.ln(), q.ln(), r.ln());
    Ok(log_tail(m, |n, lf_tab| {
        let nf = n as f64;
        (3.5 * nf + 0.5) * ld + 2.0 * lf_tab[2 * n + 1] - (2.0 * nf + 1.0) * lw
            + 0.5 * nf * (nf + 1.0) * lq
            + (3.0 * nf + 5.0) * ls
            + (2.0 * nf + 1.0) * lr
    }))
}

/// Truncated conjugate system with its tail certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateResult {
    pub truncation: usize,
    /// `Ξ_i` on levels `0..=2M+1`; only odd levels are populated.
    pub xi: Vec<FockVector>,
    /// `‖level 2n+1 of Ξ_i‖_T` for `n = 0..=M`, per index.
    pub level_norms: Vec<Vec<f64>>,
    pub tail_bounds: Vec<f64>,
    /// Tail with `n!` in place of `(2n+1)!`.
    pub tail_bounds_sharp: Vec<f64>,
    /// Largest per-index tail.
    pub tail_bound: f64,
    pub fisher_value: f64,
    pub fisher_error_interval: (f64, f64),
}

/// `Σ_{n≤M} (-1)^n P_{T,2n+1}^{-1} Σ_{π∈B(2n+1)} (W_π^T)^* g`.
pub fn conjugate_series(model: &Model, g: &[C64], m: usize) -> Result<FockVector> {
    let d = model.dim();
    let top = 2 * m + 1;
    let mut out = FockVector::zeros(d, top);
    for n in 0..=m {
        let level = 2 * n + 1;
        let mut y = vec![ZERO; tensor_dim(d, level).ok_or(Error::SizeCapExceeded { entries: u128::MAX, cap: 0 })?];
        for pi in enumerate_b(level, model.settings.matching_cap)? {
            let v = model.contractions.w_adjoint_apply(&pi, g)?;
            for (a, b) in y.iter_mut().zip(&v) {
                *a += b;
            }
        }
        let x = model.fock.solve(level, &CVec::from_vec(y))?;
        let sign = if n % 2 == 0 { ONE } else { -ONE };
        *out.level_mut(level) = x * sign;
    }
    Ok(out)
}

pub fn conjugate_variables(model: &Model, m: usize) -> Result<ConjugateResult> {
    let d = model.dim();
    let q = model.twist.q();
    let s_norm = model.subspace.s_norm();
    let mut xi = Vec::with_capacity(d);
    let mut level_norms = Vec::with_capacity(d);
    let mut tail_bounds = Vec::with_capacity(d);
    let mut tail_bounds_sharp = Vec::with_capacity(d);
    let mut fisher = 0.0;
    let mut slack = 0.0;
    for i in 0..d {
        let f = dual_vector(model, i)?;
        let x = conjugate_series(model, &f, m)?;
        let mut norms = Vec::with_capacity(m + 1);
        for n in 0..=m {
            let lvl = x.level(2 * n + 1).as_slice();
            norms.push(model.fock.level_inner(2 * n + 1, lvl, lvl)?.re.max(0.0).sqrt());
        }
        let f_norm = crate::linalg::norm(&f);
        let tail = conjugate_tail(m, q, d, s_norm, f_norm)?;
        fisher += norms.iter().map(|v| v * v).sum::<f64>();
        slack += tail * tail;
        tail_bounds.push(tail);
        tail_bounds_sharp.push(conjugate_tail_sharp(m, q, d, s_norm, f_norm)?);
        level_norms.push(norms);
        xi.push(x);
    }
    let tail_bound = tail_bounds.iter().copied().fold(0.0, f64::max);
    Ok(ConjugateResult {
        truncation: m,
        xi,
        level_norms,
        tail_bounds,
        tail_bounds_sharp,
        tail_bound,
        fisher_value: fisher,
        fisher_error_interval: (fisher, fisher + slack),
    })
}

fn require_orthonormal(model: &Model) -> Result<()> {
    if model.subspace.mode() != BasisMode::RealOrthonormal {
        return Err(Error::WrongBasisMode);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiFree {
    /// `Θ_j = Σ_k ⟨e_k, e_j⟩ Ξ_k`.
    pub theta: Vec<FockVector>,
    /// The series run directly on `e_j`.
    pub theta_direct: Vec<FockVector>,
    pub discrepancy: f64,
    /// `max_j |Σ_k ⟨e_k, e_j⟩ f_k - e_j|`.
    pub dual_residual: f64,
}

pub fn quasi_free(model: &Model, m: usize) -> Result<QuasiFree> {
    require_orthonormal(model)?;
    let d = model.dim();
    let gram = model.subspace.gram();
    let e = model.subspace.basis();
    let f = model.subspace.dual_basis();
    let xi: Vec<FockVector> =
        (0..d).map(|i| conjugate_series(model, &dual_vector(model, i)?, m)).collect::<Result<_>>()?;
    let mut theta = Vec::with_capacity(d);
    let mut theta_direct = Vec::with_capacity(d);
    let mut discrepancy: f64 = 0.0;
    let mut dual_residual: f64 = 0.0;
    for j in 0..d {
        let mut t = FockVector::zeros(d, 2 * m + 1);
        for (k, xk) in xi.iter().enumerate() {
            t.axpy(gram[(k, j)], xk);
        }
        let ej: Vec<C64> = e.column(j).iter().copied().collect();
        let direct = conjugate_series(model, &ej, m)?;
        discrepancy = discrepancy.max(t.max_abs_diff(&direct));
        let recon = (0..d).fold(CVec::zeros(d), |acc, k| acc + f.column(k) * gram[(k, j)]);
        dual_residual = dual_residual.max((recon - e.column(j)).camax());
        theta.push(t);
        theta_direct.push(direct);
    }
    Ok(QuasiFree { theta, theta_direct, discrepancy, dual_residual })
}

/// `‖P‖_R = Σ_w |c_w| R^{|w|}`.
pub fn rnorm(p: &NCPolynomial, r: f64) -> f64 {
    p.terms().iter().map(|(w, c)| c.norm() * r.powi(w.len() as i32)).sum()
}

/// `σ(x_j) = Σ_k A_jk x_k` extended multiplicatively.
pub fn sigma(p: &NCPolynomial, a: &CMat) -> NCPolynomial {
    let mut out = NCPolynomial::zero();
    for (w, c) in p.terms() {
        let mut acc = NCPolynomial::constant(*c);
        for &j in w {
            acc = acc.mul(&sigma_letter(j, a));
        }
        out = out.add(&acc);
    }
    out.pruned(PRUNE)
}

fn sigma_letter(j: usize, a: &CMat) -> NCPolynomial {
    NCPolynomial::from_terms((0..a.ncols()).filter(|&k| a[(j, k)] != ZERO).map(|k| (vec![k], a[(j, k)])))
}

/// `ρ(x_{j_1} ⋯ x_{j_m}) = σ(x_{j_m}) x_{j_1} ⋯ x_{j_{m-1}}`.
pub fn rho(p: &NCPolynomial, a: &CMat) -> NCPolynomial {
    let mut out = NCPolynomial::zero();
    for (w, c) in p.terms() {
        match w.split_last() {
            None => out.add_term(Vec::new(), *c),
            Some((&last, rest)) => {
                let head = NCPolynomial::from_terms([(rest.to_vec(), *c)]);
                out = out.add(&sigma_letter(last, a).mul(&head));
            }
        }
    }
    out.pruned(PRUNE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaNorm {
    pub value: f64,
    /// Whether every homogeneous part returned to itself within the window.
    pub periodic: bool,
}

/// `Σ_n sup_k ‖ρ^k(π_n P)‖_R` with `k` ranging over one period or the first `window` iterates.
pub fn sigma_rnorm(p: &NCPolynomial, a: &CMat, r: f64, window: usize) -> SigmaNorm {
    let mut value = 0.0;
    let mut periodic = true;
    for n in 0..=p.degree().unwrap_or(0) {
        let part = p.homogeneous(n);
        if part.is_empty() {
            continue;
        }
        let mut best = rnorm(&part, r);
        let mut cur = part.clone();
        let mut closed = false;
        for _ in 0..window {
            cur = rho(&cur, a);
            if cur.max_abs_diff(&part) <= 1e-12 {
                closed = true;
                break;
            }
            best = best.max(rnorm(&cur, r));
        }
        periodic &= closed;
        value += best;
    }
    SigmaNorm { value, periodic }
}

/// `(1+A)/2` and its inverse `2/(1+A)`.
fn half_one_plus(a: &CMat) -> (CMat, CMat) {
    let b = (CMat::identity(a.nrows(), a.ncols()) + a) * crate::linalg::c(0.5, 0.0);
    let g = b.clone().try_inverse().expect("1 + A is invertible for positive A");
    (b, g)
}

/// `𝒟_i(x_{k_1}⋯x_{k_n}) = Σ_l [2/(1+A)]_{i k_l} σ(x_{k_{l+1}}⋯x_{k_n}) x_{k_1}⋯x_{k_{l-1}}`.
pub fn cyclic_derivative(p: &NCPolynomial, i: usize, a: &CMat) -> NCPolynomial {
    let (_, g) = half_one_plus(a);
    let mut out = NCPolynomial::zero();
    for (w, c) in p.terms() {
        for (l, &k) in w.iter().enumerate() {
            let coef = g[(i, k)] * c;
            if coef == ZERO {
                continue;
            }
            let tail = sigma(&NCPolynomial::from_terms([(w[l + 1..].to_vec(), coef)]), a);
            out = out.add(&tail.mul(&NCPolynomial::from_terms([(w[..l].to_vec(), ONE)])));
        }
    }
    out.pruned(PRUNE)
}

/// `V₀ = ½ Σ [(1+A)/2]_{jk} x_k x_j`.
pub fn v0(a: &CMat) -> NCPolynomial {
    let (b, _) = half_one_plus(a);
    let mut out = NCPolynomial::zero();
    for j in 0..a.nrows() {
        for k in 0..a.ncols() {
            out.add_term(vec![k, j], b[(j, k)] * 0.5);
        }
    }
    out.pruned(PRUNE)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialReport {
    pub v: NCPolynomialTerms,
    pub w: NCPolynomialTerms,
    pub w_rnorm: f64,
    /// `‖Φ(Θ_i) - x_i‖_R` on the computed levels.
    pub generator_rnorms: Vec<f64>,
    pub generator_tail: f64,
    /// `‖W_M‖_R` plus the tail contribution of the omitted levels.
    pub w_bound: f64,
    pub threshold: Option<f64>,
    pub below_threshold: Option<bool>,
}

/// 1-based `(word, coefficient)` list.
pub type NCPolynomialTerms = Vec<(Vec<usize>, C64)>;

/// `Φ(Θ)` summed over the populated levels of `Θ`.
pub fn wick_of_vector(model: &Model, v: &FockVector) -> Result<NCPolynomial> {
    let mut out = NCPolynomial::zero();
    for (n, lvl) in v.levels().iter().enumerate() {
        if lvl.iter().any(|z| *z != ZERO) {
            out = out.add(&wick_polynomial(model, lvl.as_slice(), n)?);
        }
    }
    Ok(out.pruned(PRUNE))
}

/// `V = 𝒩^{-1}(Σ_{jk} [(1+A)/2]_{jk} Φ(Θ_k) x_j)` and the transport-regime check.
pub fn potential(model: &Model, m: usize, r: f64, threshold: Option<f64>) -> Result<PotentialReport> {
    require_orthonormal(model)?;
    if !(r > 1.0) {
        return Err(Error::BadParams(format!("R must exceed 1, got {r}")));
    }
    let d = model.dim();
    let a = model.subspace.a_matrix();
    let (b, _) = half_one_plus(&a);
    let qf = quasi_free(model, m)?;
    let phis: Vec<NCPolynomial> = qf.theta.iter().map(|t| wick_of_vector(model, t)).collect::<Result<_>>()?;
    let mut sum = NCPolynomial::zero();
    for j in 0..d {
        for (k, phi) in phis.iter().enumerate() {
            if b[(j, k)] != ZERO {
                sum = sum.add(&phi.mul(&NCPolynomial::generator(j)).scale(b[(j, k)]));
            }
        }
    }
    let v = sum.map_degree(|n| if n == 0 { 1.0 } else { 1.0 / n as f64 }).pruned(PRUNE);
    let w = v.sub(&v0(&a)).pruned(PRUNE);
    let generator_rnorms: Vec<f64> =
        phis.iter().enumerate().map(|(i, p)| rnorm(&p.sub(&NCPolynomial::generator(i)), r)).collect();
    let generator_tail = transport_tail(m, model.twist.q(), d, model.subspace.s_norm(), r)?;
    let w_rnorm = rnorm(&w, r);
    let b_sum: f64 = b.iter().map(|z| z.norm()).sum();
    let w_bound = w_rnorm + r * b_sum * generator_tail;
    Ok(PotentialReport {
        v: v.to_one_based(),
        w: w.to_one_based(),
        w_rnorm,
        generator_rnorms,
        generator_tail,
        w_bound,
        threshold,
        below_threshold: threshold.map(|c| w_bound < c),
    })
}
