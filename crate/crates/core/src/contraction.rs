//! Contractions `C_i` and twisted contractions `W_π^T`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StandardSubspace;
use crate::linalg::{
    apply_pair, check_dense, contract_pair, insert_pair, matrix_of, op_norm, tensor_dim_capped, CMat, C64,
};
use crate::matchings::{AdmissibleOrder, IncompleteMatching};
use crate::twist::Twist;
use crate::Settings;

/// One factor `C_c T_{c+1, t}` of a twisted contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionStep {
    pub contract: usize,
    /// Twist chain `T_{contract+1} ⋯ T_{twist_to - 1}`; empty when `twist_to = contract + 1`.
    pub twist_to: usize,
    /// Number of tensor slots before this step.
    pub slots: usize,
}

impl ContractionStep {
    pub fn twist_count(&self) -> usize {
        self.twist_to - self.contract - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionPlan {
    pub n: usize,
    pub out: usize,
    /// In application order.
    pub steps: Vec<ContractionStep>,
}

impl ContractionPlan {
    pub fn compile(pi: &IncompleteMatching, order: &AdmissibleOrder) -> Result<ContractionPlan> {
        if !pi.is_admissible(order) {
            return Err(Error::NotAdmissible);
        }
        let mut removed: Vec<usize> = Vec::new();
        let mut steps = Vec::with_capacity(order.pairs().len());
        let mut slots = pi.n();
        for &(i, j) in order.pairs() {
            let r = |x: usize| removed.iter().filter(|&&y| y < x).count();
            let contract = i - r(i);
            let twist_to = j - r(j);
            steps.push(ContractionStep { contract, twist_to, slots });
            slots -= 2;
            removed.push(i);
            removed.push(j);
        }
        Ok(ContractionPlan { n: pi.n(), out: slots, steps })
    }

    pub fn twist_factors(&self) -> usize {
        self.steps.iter().map(ContractionStep::twist_count).sum()
    }
}

impl fmt::Display for ContractionPlan {
    /// Operator product, rightmost factor applied first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self
            .steps
            .iter()
            .rev()
            .map(|s| {
                let mut p = format!("C{}", s.contract);
                for k in s.contract + 1..s.twist_to {
                    p.push_str(&format!("T{k}"));
                }
                p
            })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Dense `C_i` on `ℋ^{⊗k}`: pairs slots `i, i+1` via `⟨Sξ_i, ξ_{i+1}⟩`.
pub fn contraction_op(i: usize, k: usize, h: &StandardSubspace) -> Result<CMat> {
    if k < 2 || i == 0 || i >= k {
        return Err(Error::IndexOutOfRange { index: i, max: k.saturating_sub(1) });
    }
    let d = h.dim();
    let cols = tensor_dim_capped(d, k, usize::MAX)?;
    Ok(matrix_of(cols / (d * d), cols, |v| contract_pair(h.pairing(), d, k, i, v)))
}

/// `‖C_1‖^{|p(π)|} q^{Cr(π)}`.
pub fn w_norm_bound(pi: &IncompleteMatching, q: f64, c1_norm: f64) -> f64 {
    if pi.num_pairs() == 0 {
        return 1.0;
    }
    c1_norm.powi(pi.num_pairs() as i32) * q.powi(pi.crossing_total() as i32)
}

/// Applies twisted contractions, caching left-standard plans per matching.
pub struct Contractions {
    subspace: Arc<StandardSubspace>,
    twist: Arc<Twist>,
    twist_adjoint: CMat,
    settings: Settings,
    plans: RwLock<HashMap<IncompleteMatching, Arc<ContractionPlan>>>,
}

impl Contractions {
    pub fn new(subspace: Arc<StandardSubspace>, twist: Arc<Twist>, settings: Settings) -> Contractions {
        let twist_adjoint = twist.matrix().adjoint();
        Contractions { subspace, twist, twist_adjoint, settings, plans: RwLock::new(HashMap::new()) }
    }

    pub fn subspace(&self) -> &StandardSubspace {
        &self.subspace
    }

    pub fn twist(&self) -> &Twist {
        &self.twist
    }

    /// Left-standard plan for `π`, compiled once.
    pub fn plan(&self, pi: &IncompleteMatching) -> Result<Arc<ContractionPlan>> {
        if let Some(p) = self.plans.read().expect("plan cache lock").get(pi) {
            return Ok(p.clone());
        }
        let plan = Arc::new(ContractionPlan::compile(pi, &pi.left_standard())?);
        let mut cache = self.plans.write().expect("plan cache lock");
        Ok(cache.entry(pi.clone()).or_insert(plan).clone())
    }

    /// `W v` for `v ∈ ℋ^{⊗n}`, streamed step by step.
    pub fn apply(&self, plan: &ContractionPlan, v: &[C64]) -> Vec<C64> {
        let d = self.subspace.dim();
        let mut cur = v.to_vec();
        for s in &plan.steps {
            for k in (s.contract + 1..s.twist_to).rev() {
                cur = apply_pair(self.twist.matrix(), d, s.slots, k, &cur);
            }
            cur = contract_pair(self.subspace.pairing(), d, s.slots, s.contract, &cur);
        }
        cur
    }

    /// `W* y` for the plain inner product.
    pub fn apply_adjoint(&self, plan: &ContractionPlan, y: &[C64]) -> Vec<C64> {
        let d = self.subspace.dim();
        let mut cur = y.to_vec();
        for s in plan.steps.iter().rev() {
            cur = insert_pair(self.subspace.pairing(), d, s.slots, s.contract, &cur);
            for k in s.contract + 1..s.twist_to {
                cur = apply_pair(&self.twist_adjoint, d, s.slots, k, &cur);
            }
        }
        cur
    }

    pub fn w_apply(&self, pi: &IncompleteMatching, v: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply(&*self.plan(pi)?, v))
    }

    pub fn w_adjoint_apply(&self, pi: &IncompleteMatching, y: &[C64]) -> Result<Vec<C64>> {
        Ok(self.apply_adjoint(&*self.plan(pi)?, y))
    }

    /// Dense `W_π^T` along `order` (left standard when `None`).
    pub fn twisted_contraction(&self, pi: &IncompleteMatching, order: Option<&AdmissibleOrder>) -> Result<CMat> {
        let plan = match order {
            Some(o) => Arc::new(ContractionPlan::compile(pi, o)?),
            None => self.plan(pi)?,
        };
        let d = self.subspace.dim();
        let cols = tensor_dim_capped(d, pi.n(), usize::MAX)?;
        let rows = tensor_dim_capped(d, plan.out, usize::MAX)?;
        check_dense(rows, cols, self.settings.size_cap)?;
        Ok(matrix_of(rows, cols, |v| self.apply(&plan, v)))
    }

    /// `‖C_1‖` as an operator `ℋ⊗ℋ → ℂ`.
    pub fn c1_norm(&self) -> f64 {
        op_norm(&contraction_op(1, 2, &self.subspace).expect("C_1 on two slots"))
    }
}
