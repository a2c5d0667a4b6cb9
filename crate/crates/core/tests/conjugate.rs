mod common;

use common::{families, model, non_tracial, random_vec, rng, words};
use twistfock::conjugate::{
    bipolynomial_on_vacuum, conjugate_variables, dq_wick, free_dq, omega, potential, quasi_free,
};
use twistfock::hilbert::build_standard_subspace;
use twistfock::linalg::{word_tensor, CMat, CVec, C64};
use twistfock::wick::wick_polynomial;
use twistfock::{BasisMode, Error, Model, Settings, SubspaceSpec, Twist, TwistKind};

#[test]
fn dq_of_wick_matches_free_dq_on_vacuum() {
    let mut r = rng(21);
    for fam in families(false) {
        let d = fam.model.dim();
        for n in 1..=4 {
            let xi = random_vec(&mut r, d.pow(n as u32));
            let p = wick_polynomial(&fam.model, &xi, n).unwrap();
            for i in 0..d {
                let direct = dq_wick(&fam.model, &xi, n, i).unwrap();
                let via_free = bipolynomial_on_vacuum(&fam.model.fock, &free_dq(&p, i)).unwrap();
                let diff = direct.max_abs_diff(&via_free);
                assert!(diff < 1e-9, "{} n={n} i={i}: {diff:e}", fam.name);
            }
        }
    }
}

/// Level 3 of `Ξ_i` from the linear system `⟨X, e_w⟩_T = ⟨Ω⊗Ω, ∂_iΦ(e_w)⟩` over all `|w| = 3`.
#[test]
fn level_three_from_dense_solve() {
    let m = model(non_tracial(), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.3 });
    let d = m.dim();
    let e = m.subspace.basis();
    let ws = words(d, 3);
    let tensors: Vec<Vec<C64>> = ws.iter().map(|w| word_tensor(e, w)).collect();
    let gram = CMat::from_fn(8, 8, |a, b| m.fock.level_inner(3, &tensors[a], &tensors[b]).unwrap());
    let res = conjugate_variables(&m, 2).unwrap();
    for i in 0..d {
        let rhs = CVec::from_fn(8, |w, _| {
            let p = wick_polynomial(&m, &tensors[w], 3).unwrap();
            bipolynomial_on_vacuum(&m.fock, &free_dq(&p, i)).unwrap().vacuum_component()
        });
        // Σ_v conj(c_v) ⟨e_v, e_w⟩ = rhs_w
        let conj_c = gram.transpose().lu().solve(&rhs).unwrap();
        let want: CVec = tensors.iter().zip(conj_c.iter()).fold(CVec::zeros(8), |acc, (t, cv)| {
            acc + CVec::from_column_slice(t) * cv.conj()
        });
        let got = res.xi[i].level(3);
        let diff = (got - &want).camax();
        assert!(diff < 1e-10, "i={i}: {diff:e}");
    }
}

#[test]
fn quasi_free_consistency() {
    let m = model(non_tracial(), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.3 });
    let qf = quasi_free(&m, 2).unwrap();
    assert!(qf.discrepancy < 1e-9, "{}", qf.discrepancy);
    assert!(qf.dual_residual < 1e-12, "{}", qf.dual_residual);

    let tr = model(SubspaceSpec::tracial(2), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.3 });
    let qf = quasi_free(&tr, 2).unwrap();
    let res = conjugate_variables(&tr, 2).unwrap();
    for (theta, xi) in qf.theta.iter().zip(&res.xi) {
        assert!(theta.max_abs_diff(xi) < 1e-12);
    }

    let complex = model(non_tracial(), BasisMode::ComplexLinear, TwistKind::QFlip { q: 0.3 });
    assert!(matches!(quasi_free(&complex, 1), Err(Error::WrongBasisMode)));
}

#[test]
fn level_norms_obey_successive_term_bound() {
    let m = model(non_tracial(), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.3 });
    let d = m.dim() as f64;
    let q = m.twist.q();
    let s = m.subspace.s_norm();
    let w = omega(q).unwrap();
    let res = conjugate_variables(&m, 3).unwrap();
    for (i, norms) in res.level_norms.iter().enumerate() {
        let f = m.subspace.dual_basis().column(i).norm();
        let mut fact = 1.0;
        for (n, v) in norms.iter().enumerate() {
            if n > 0 {
                fact *= ((2 * n) * (2 * n + 1)) as f64;
            }
            let term = fact
                * w.powi(-(2 * n as i32) - 1)
                * d.powf(n as f64 / 2.0)
                * s.powi(n as i32)
                * q.powf((n * (n + 1)) as f64 / 2.0)
                * f;
            assert!(*v <= term * (1.0 + 1e-9), "i={i} n={n}: {v} > {term}");
        }
    }
    let low = res.fisher_error_interval.0;
    assert_eq!(low, res.fisher_value);
    assert!(res.fisher_error_interval.1 >= low);
}

#[test]
fn potential_vanishes_without_twist() {
    let settings = Settings::default();
    let h = build_standard_subspace(&non_tracial(), BasisMode::RealOrthonormal, settings.tolerance).unwrap();
    let d = h.dim();
    let m = Model::new(h, Twist::zero(d), settings).unwrap();
    let rep = potential(&m, 2, 1.5, Some(0.1)).unwrap();
    assert!(rep.w_rnorm < 1e-10, "{}", rep.w_rnorm);
    assert_eq!(rep.generator_tail, 0.0);
    assert_eq!(rep.below_threshold, Some(true));
    assert!(matches!(potential(&m, 2, 1.0, None), Err(Error::BadParams(_))));
}

#[test]
fn potential_is_small_for_small_q() {
    let m = model(non_tracial(), BasisMode::RealOrthonormal, TwistKind::QFlip { q: 0.05 });
    let rep = potential(&m, 2, 1.2, None).unwrap();
    assert!(rep.w_bound.is_finite());
    assert!(rep.w_bound >= rep.w_rnorm);
    assert!(rep.generator_rnorms.iter().all(|v| *v < 1.0), "{:?}", rep.generator_rnorms);
    assert_eq!(rep.below_threshold, None);
}
