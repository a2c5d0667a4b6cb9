mod common;

use common::{families, matrix_algebra};
use twistfock::contraction::contraction_op;
use twistfock::linalg::{identity, kron, max_abs};
use twistfock::matchings::{dcp, delete_pair, delete_singleton, enumerate_matchings};

#[test]
fn recurrences_and_decomposition() {
    for fam in families(false) {
        let m = &fam.model;
        let d = m.dim();
        let w = |pi: &twistfock::IncompleteMatching| m.contractions.twisted_contraction(pi, None).unwrap();
        for n in 1..=6 {
            for pi in enumerate_matchings(n, 10).unwrap() {
                let full = w(&pi);
                if n >= 2 && pi.is_singleton(1) {
                    let rest = w(&delete_singleton(&pi).unwrap());
                    assert!(max_abs(&(&full - kron(&identity(d), &rest))) < 1e-12, "{}: (a) {pi:?}", fam.name);
                }
                if let Some(j) = pi.partner(1) {
                    if n >= 3 {
                        let (sigma, _) = delete_pair(&pi).unwrap();
                        let c1 = contraction_op(1, n, &m.subspace).unwrap();
                        let chain = m.twist.ranged_product(2, j, n, 1 << 24).unwrap();
                        let rhs = w(&sigma) * c1 * chain;
                        assert!(max_abs(&(&full - rhs)) < 1e-12, "{}: (b) {pi:?}", fam.name);
                    }
                }
                for &k in pi.singletons() {
                    let dec = dcp(&pi, k).unwrap();
                    let outer = kron(&kron(&w(&dec.left), &identity(d)), &w(&dec.right));
                    let rhs = outer * w(&dec.middle);
                    assert!(max_abs(&(&full - rhs)) < 1e-12, "{}: decomposition {pi:?} at {k}", fam.name);
                }
            }
        }
    }
}

#[test]
fn crossing_symmetry_as_matrices() {
    let mut fams = families(false);
    fams.push(matrix_algebra());
    for fam in &fams {
        let m = &fam.model;
        let top = if m.dim() == 2 { 4 } else { 2 };
        for k in 1..=top {
            let n = k + 2;
            let lhs = contraction_op(k, n, &m.subspace).unwrap() * m.twist.embed(k + 1, n, 1 << 24).unwrap();
            let rhs = contraction_op(k + 1, n, &m.subspace).unwrap() * m.twist.embed(k, n, 1 << 24).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-12, "{} at k = {k}", fam.name);
        }
    }
}

#[test]
fn adjoint_application_is_the_adjoint() {
    let m = &families(false)[1].model;
    for pi in enumerate_matchings(5, 10).unwrap() {
        let dense = m.contractions.twisted_contraction(&pi, None).unwrap();
        let plan = m.contractions.plan(&pi).unwrap();
        let adj = twistfock::linalg::matrix_of(dense.ncols(), dense.nrows(), |y| m.contractions.apply_adjoint(&plan, y));
        assert!(max_abs(&(adj - dense.adjoint())) < 1e-13);
    }
}
