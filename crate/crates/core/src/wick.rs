//! Noncommutative polynomials and the T-Wick product `Φ`.
//!
//! Words are 0-based internally: the letter `i` stands for the generator `x_{i+1} ↔ X_T(e_{i+1})`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace, FockVector};
use crate::linalg::{apply_single, contract_pair, tensor_dim, CMat, C64, ONE, ZERO};
use crate::matchings::enumerate_matchings;
use crate::Model;

pub type Word = Vec<usize>;

pub const PRUNE: f64 = 1e-14;

/// Finitely supported map from words to coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NCPolynomial {
    terms: BTreeMap<Word, C64>,
}

impl NCPolynomial {
    pub fn zero() -> Self {
        NCPolynomial::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = NCPolynomial::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn generator(i: usize) -> Self {
        let mut p = NCPolynomial::zero();
        p.add_term(vec![i], ONE);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, C64)>>(terms: I) -> Self {
        let mut p = NCPolynomial::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, word: Word, c: C64) {
        *self.terms.entry(word).or_insert(ZERO) += c;
    }

    pub fn coeff(&self, word: &[usize]) -> C64 {
        self.terms.get(word).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> &BTreeMap<Word, C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Longest word length, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    /// Drops coefficients with modulus at most `threshold`.
    pub fn pruned(mut self, threshold: f64) -> Self {
        self.terms.retain(|_, c| c.norm() > threshold);
        self
    }

    pub fn add(&self, other: &NCPolynomial) -> NCPolynomial {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &NCPolynomial) -> NCPolynomial {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, a: C64) -> NCPolynomial {
        NCPolynomial { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * a)).collect() }
    }

    /// Product by word concatenation.
    pub fn mul(&self, other: &NCPolynomial) -> NCPolynomial {
        let mut out = NCPolynomial::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                out.add_term(w, a * b);
            }
        }
        out
    }

    /// Homogeneous part of degree `n`.
    pub fn homogeneous(&self, n: usize) -> NCPolynomial {
        NCPolynomial { terms: self.terms.iter().filter(|(w, _)| w.len() == n).map(|(w, c)| (w.clone(), *c)).collect() }
    }

    /// Multiplies each degree-`n` word by `f(n)`.
    pub fn map_degree<F: Fn(usize) -> f64>(&self, f: F) -> NCPolynomial {
        NCPolynomial { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * f(w.len()))).collect() }
    }

    pub fn max_abs_diff(&self, other: &NCPolynomial) -> f64 {
        let mut worst: f64 = 0.0;
        for (w, c) in &self.terms {
            worst = worst.max((c - other.coeff(w)).norm());
        }
        for (w, c) in &other.terms {
            if !self.terms.contains_key(w) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// `(1-based word, coefficient)` pairs.
    pub fn to_one_based(&self) -> Vec<(Vec<usize>, C64)> {
        self.terms.iter().map(|(w, c)| (w.iter().map(|i| i + 1).collect(), *c)).collect()
    }
}

impl fmt::Display for NCPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word: String = if w.is_empty() {
                    "1".into()
                } else {
                    w.iter().map(|i| format!("x{}", i + 1)).collect::<Vec<_>>().join("")
                };
                format!("({:+.6}{:+.6}i)·{}", c.re, c.im, word)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Digits of `index` in base `d`, most significant first, padded to `len`.
pub fn index_to_word(mut index: usize, d: usize, len: usize) -> Word {
    let mut w = vec![0; len];
    for slot in (0..len).rev() {
        w[slot] = index % d;
        index /= d;
    }
    w
}

/// Adds `Σ_w coef·c_w x_w` where `c` are the coordinates of `v ∈ ℋ^{⊗s}` in the basis `e`.
fn accumulate_in_basis(out: &mut NCPolynomial, v: &[C64], s: usize, e_inv: &CMat, d: usize, coef: C64) {
    let mut coords = v.to_vec();
    for k in 1..=s {
        coords = apply_single(e_inv, d, s, k, &coords);
    }
    for (idx, c) in coords.into_iter().enumerate() {
        if c != ZERO {
            out.add_term(index_to_word(idx, d, s), coef * c);
        }
    }
}

fn check_tensor(model: &Model, xi: &[C64], n: usize) -> Result<()> {
    if Some(xi.len()) != tensor_dim(model.dim(), n) {
        return Err(Error::ShapeMismatch(format!("tensor of length {} is not on {n} slots", xi.len())));
    }
    if n > model.settings.matching_cap {
        return Err(Error::CapExceeded { what: "Wick degree", value: n, cap: model.settings.matching_cap });
    }
    Ok(())
}

fn basis_inverse(model: &Model) -> CMat {
    model.subspace.basis().clone().try_inverse().expect("basis is invertible")
}

/// `Φ(Ξ) = X(Σ_π (-1)^{|p(π)|} W_π^T Ξ)` expanded in the generators.
pub fn wick_polynomial(model: &Model, xi: &[C64], n: usize) -> Result<NCPolynomial> {
    check_tensor(model, xi, n)?;
    let d = model.dim();
    let e_inv = basis_inverse(model);
    let mut out = NCPolynomial::zero();
    for pi in enumerate_matchings(n, model.settings.matching_cap)? {
        let v = model.contractions.w_apply(&pi, xi)?;
        let sign = if pi.num_pairs() % 2 == 0 { ONE } else { -ONE };
        accumulate_in_basis(&mut out, &v, pi.num_singletons(), &e_inv, d, sign);
    }
    Ok(out.pruned(PRUNE))
}

/// `Φ(ξ_1⊗⋯⊗ξ_n) = X_T(ξ_1)Φ(ξ_2⊗⋯) - Φ(a_T(Sξ_1)ξ_2⊗⋯)`, by linearity on the first slot.
pub fn wick_recursive(model: &Model, xi: &[C64], n: usize) -> Result<NCPolynomial> {
    check_tensor(model, xi, n)?;
    let e_inv = basis_inverse(model);
    Ok(recursive(model, &e_inv, xi, n).pruned(PRUNE))
}

fn recursive(model: &Model, e_inv: &CMat, xi: &[C64], n: usize) -> NCPolynomial {
    let d = model.dim();
    if n == 0 {
        return NCPolynomial::constant(xi[0]);
    }
    let block = xi.len() / d;
    let tails: Vec<NCPolynomial> = (0..d).map(|a| recursive(model, e_inv, &xi[a * block..(a + 1) * block], n - 1)).collect();
    let mut out = NCPolynomial::zero();
    for i in 0..d {
        let mut combo = NCPolynomial::zero();
        for (a, tail) in tails.iter().enumerate() {
            if e_inv[(i, a)] != ZERO {
                combo = combo.add(&tail.scale(e_inv[(i, a)]));
            }
        }
        out = out.add(&NCPolynomial::generator(i).mul(&combo));
    }
    if n >= 2 {
        let shifted = crate::fock::apply_r_tail(model.twist.as_ref(), n, xi);
        let contracted = contract_pair(model.subspace.pairing(), d, n, 1, &shifted);
        out = out.sub(&recursive(model, e_inv, &contracted, n - 2));
    }
    out
}

/// `Σ_w c_w X_T(e_{w_1}) ⋯ X_T(e_{w_k})` as a graded operator.
pub fn evaluate(p: &NCPolynomial, fock: &FockSpace, truncation: usize, exact: bool) -> Result<FockOperator> {
    let d = fock.dim();
    let deg = p.degree().unwrap_or(0);
    if exact && truncation < deg {
        return Err(Error::TruncationTooSmall { needed: deg, got: truncation });
    }
    let fields: Vec<FockOperator> = (0..d)
        .map(|i| fock.field(&fock.subspace().basis().column(i).into_owned(), truncation))
        .collect::<Result<_>>()?;
    let mut out = FockOperator::zero(d, truncation);
    for (w, c) in p.terms() {
        let mut op = FockOperator::identity(d, truncation);
        for &i in w.iter().rev() {
            op = fields[i].compose(&op);
        }
        out = out.add(&op.scale(*c));
    }
    Ok(out)
}

/// `P(X)Ω`, applying fields to the vacuum word by word.
pub fn evaluate_on_vacuum(p: &NCPolynomial, fock: &FockSpace, truncation: usize) -> Result<FockVector> {
    let deg = p.degree().unwrap_or(0);
    if truncation < deg {
        return Err(Error::TruncationTooSmall { needed: deg, got: truncation });
    }
    let mut out = FockVector::zeros(fock.dim(), truncation);
    for (w, c) in p.terms() {
        out.axpy(*c, &fock.word_on_vacuum(w, truncation)?);
    }
    Ok(out)
}
