//! Fixtures shared by the benchmarks.

use twistfock::hilbert::build_standard_subspace;
use twistfock::linalg::{c, C64};
use twistfock::twist::make_twist;
use twistfock::{BasisMode, Model, Settings, SubspaceSpec, TwistKind};

/// `q·F` on the tracial subspace of dimension `d`, without validation.
pub fn q_flip(d: usize, q: f64) -> Model {
    let settings = Settings::default();
    let h = build_standard_subspace(&SubspaceSpec::tracial(d), BasisMode::ComplexLinear, settings.tolerance)
        .expect("tracial subspace");
    let t = make_twist(&TwistKind::QFlip { q }, &h).expect("q-flip");
    Model::new(h, t, settings).expect("model")
}

/// `c·m*m` on `M_2(ℂ)` with weights `(1, 2)`.
pub fn matrix_algebra(c: f64) -> Model {
    let weights = [1.0, 2.0];
    let settings = Settings::default();
    let h = build_standard_subspace(&SubspaceSpec::matrix_algebra(&weights), BasisMode::ComplexLinear, settings.tolerance)
        .expect("matrix algebra subspace");
    let t = make_twist(&TwistKind::MatrixAlgebra { h: weights.to_vec(), c }, &h).expect("matrix algebra twist");
    Model::new(h, t, settings).expect("model")
}

/// Deterministic dense vector of length `len`.
pub fn probe(len: usize) -> Vec<C64> {
    (0..len).map(|k| c(((k * 7 + 3) % 11) as f64 / 11.0 - 0.5, ((k * 5 + 1) % 13) as f64 / 13.0 - 0.5)).collect()
}
