use proptest::prelude::*;
use twistfock::hilbert::{build_standard_subspace, classify_factor_type, ExactSpectrum, FactorTag, SpectrumInput};
use twistfock::linalg::{c, max_abs, norm, CMat, CVec};
use twistfock::{BasisMode, SubspaceSpec};

/// Eigenvalue pairs `(λ, 1/λ)` swapped by the involution, then fixed points at 1.
fn paired_spec(lambdas: &[f64], fixed: usize) -> SubspaceSpec {
    let mut eigenvalues = Vec::new();
    let mut involution = Vec::new();
    for (k, &l) in lambdas.iter().enumerate() {
        eigenvalues.extend([l, 1.0 / l]);
        involution.extend([2 * k + 1, 2 * k]);
    }
    for _ in 0..fixed {
        involution.push(eigenvalues.len());
        eigenvalues.push(1.0);
    }
    SubspaceSpec::Eigen { eigenvalues, involution }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn s_and_duality_hold(
        lambdas in prop::collection::vec(1.05f64..6.0, 0..3),
        fixed in 0usize..3,
        real in any::<bool>(),
        re in prop::collection::vec(-1.0f64..1.0, 8),
        im in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        prop_assume!(!lambdas.is_empty() || fixed > 0);
        let mode = if real { BasisMode::RealOrthonormal } else { BasisMode::ComplexLinear };
        let h = build_standard_subspace(&paired_spec(&lambdas, fixed), mode, 1e-10).unwrap();
        let d = h.dim();
        let top = lambdas.iter().copied().fold(1.0, f64::max);
        prop_assert!((h.s_norm() - top.sqrt()).abs() < 1e-12);
        let v = CVec::from_fn(d, |i, _| c(re[i], im[i]));
        let sv = h.s().apply(&v);
        prop_assert!(norm(sv.as_slice()) <= h.s_norm() * norm(v.as_slice()) * (1.0 + 1e-12) + 1e-15);
        prop_assert!((h.s().apply(&sv) - &v).camax() < 1e-12);
        let duality = h.dual_basis().adjoint() * h.basis();
        prop_assert!(max_abs(&(duality - CMat::identity(d, d))) < 1e-12);
    }

    #[test]
    fn classifier_is_scale_consistent(base in 0.2f64..0.9, exps in prop::collection::vec(-4i64..=4, 1..5)) {
        let mut all = exps.clone();
        all.extend(exps.iter().map(|k| -k));
        let exact = classify_factor_type(
            &SpectrumInput::Exact(ExactSpectrum::Powers { base, exponents: all.clone() }),
            1e-10,
            64,
        ).unwrap();
        let values: Vec<f64> = all.iter().map(|&k| base.powi(k as i32)).collect();
        let num = classify_factor_type(&SpectrumInput::Numerical(values), 1e-9, 64).unwrap();
        match (exact.tag, num.tag) {
            (FactorTag::IIIlambda(a), FactorTag::IIIlambda(b)) => prop_assert!((a - b).abs() < 1e-8),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}

#[test]
fn non_hermitian_delta_is_rejected() {
    let delta = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let spec = SubspaceSpec::Matrices { delta, j: CMat::identity(2, 2) };
    assert!(build_standard_subspace(&spec, BasisMode::ComplexLinear, 1e-10).is_err());
}
