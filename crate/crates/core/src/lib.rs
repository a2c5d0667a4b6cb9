//! Twisted Fock spaces over a finite-dimensional standard subspace.
//!
//! Vectors live in plain tensor coordinates on `(ℂ^d)^{⊗n}` with the first tensor slot
//! most significant. The twist enters only through the kernels `P_{T,n}` used for
//! inner products, adjoints and solves.

pub mod conjugate;
pub mod contraction;
pub mod error;
pub mod fock;
pub mod hilbert;
pub mod linalg;
pub mod matchings;
pub mod twist;
pub mod wick;

use std::sync::Arc;

pub use conjugate::{BiPolynomial, ConjugateResult, PairTensor};
pub use contraction::{ContractionPlan, Contractions};
pub use error::{Error, Result};
pub use fock::{FockOperator, FockSpace, FockVector};
pub use hilbert::{AntilinearMap, BasisMode, FactorType, StandardSubspace, SubspaceSpec};
pub use linalg::{CMat, CVec, C64};
pub use matchings::{AdmissibleOrder, Decomposition, IncompleteMatching};
pub use twist::{Dim2Family, Twist, TwistKind, ValidationReport};
pub use wick::NCPolynomial;

/// Numerical knobs shared by every module.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Settings {
    pub tolerance: f64,
    /// Largest number of complex entries a dense matrix may have.
    pub size_cap: usize,
    pub matching_cap: usize,
    pub pair_cap: usize,
    pub order_count_cap: usize,
    pub positivity_level: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tolerance: 1e-10,
            size_cap: 1 << 26,
            matching_cap: 10,
            pair_cap: 8,
            order_count_cap: 10_000,
            positivity_level: 6,
        }
    }
}

/// A standard subspace together with a twist and the caches built on top of them.
pub struct Model {
    pub subspace: Arc<StandardSubspace>,
    pub twist: Arc<Twist>,
    pub settings: Settings,
    pub fock: FockSpace,
    pub contractions: Contractions,
}

impl Model {
    pub fn new(subspace: StandardSubspace, twist: Twist, settings: Settings) -> Result<Model> {
        if subspace.dim() != twist.dim() {
            return Err(Error::ShapeMismatch(format!(
                "subspace has dimension {} but twist acts on dimension {}",
                subspace.dim(),
                twist.dim()
            )));
        }
        let subspace = Arc::new(subspace);
        let twist = Arc::new(twist);
        let fock = FockSpace::new(subspace.clone(), twist.clone(), settings.clone());
        let contractions = Contractions::new(subspace.clone(), twist.clone(), settings.clone());
        Ok(Model { subspace, twist, settings, fock, contractions })
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}
