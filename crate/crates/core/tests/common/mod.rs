#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistfock::hilbert::build_standard_subspace;
use twistfock::linalg::{c, CMat, C64};
use twistfock::twist::make_twist;
use twistfock::{BasisMode, Dim2Family, Model, Settings, SubspaceSpec, TwistKind};

pub struct Family {
    pub name: &'static str,
    pub model: Model,
}

pub fn model(spec: SubspaceSpec, mode: BasisMode, kind: TwistKind) -> Model {
    let settings = Settings::default();
    let h = build_standard_subspace(&spec, mode, settings.tolerance).expect("subspace");
    let t = make_twist(&kind, &h).expect("twist").validated(&h, 5, settings.tolerance, settings.size_cap);
    Model::new(h, t, settings).expect("model")
}

pub fn non_tracial() -> SubspaceSpec {
    SubspaceSpec::Eigen { eigenvalues: vec![2.0, 0.5], involution: vec![1, 0] }
}

pub fn qij_coeffs() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.1, 0.0)])
}

/// One validated twist per family at `d = 2`, plus the matrix-algebra family on `M_2(ℂ)`.
pub fn families(include_matrix_algebra: bool) -> Vec<Family> {
    let mut out = vec![
        Family {
            name: "q-flip",
            model: model(SubspaceSpec::tracial(2), BasisMode::ComplexLinear, TwistKind::QFlip { q: 0.4 }),
        },
        Family {
            name: "q-flip/non-tracial",
            model: model(non_tracial(), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.3 }),
        },
        Family {
            name: "q-ij",
            model: model(SubspaceSpec::tracial(2), BasisMode::ComplexLinear, TwistKind::Qij { coeffs: qij_coeffs() }),
        },
        Family {
            name: "dim2/mixed",
            model: model(
                SubspaceSpec::tracial(2),
                BasisMode::ComplexLinear,
                TwistKind::Dim2(Dim2Family::Mixed { q1: 0.3, q2: 0.1, epsilon: 1 }),
            ),
        },
        Family {
            name: "dim2/anti",
            model: model(
                SubspaceSpec::tracial(2),
                BasisMode::ComplexLinear,
                TwistKind::Dim2(Dim2Family::Anti { q1: 0.3, c: 0.15 }),
            ),
        },
    ];
    if include_matrix_algebra {
        out.push(matrix_algebra());
    }
    out
}

pub fn matrix_algebra() -> Family {
    let h = [1.0, 2.0];
    Family {
        name: "matrix-algebra",
        model: model(
            SubspaceSpec::matrix_algebra(&h),
            BasisMode::ComplexLinear,
            TwistKind::MatrixAlgebra { h: h.to_vec(), c: 0.2 },
        ),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

/// Every word of length `n` over `d` letters, lexicographic.
pub fn words(d: usize, n: usize) -> Vec<Vec<usize>> {
    (0..d.pow(n as u32)).map(|idx| twistfock::wick::index_to_word(idx, d, n)).collect()
}
