mod common;

use common::*;
use proptest::prelude::*;
use qcc_core::hilbert::{superpose, OperatorExpr, StateVector, DEFAULT_DENSE_CAP};
use qcc_core::Complex64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn tensor_norm_is_multiplicative(
        (d, a, b) in dims().prop_flat_map(|d| (Just(d), amplitudes(d.0), amplitudes(d.1)))
    ) {
        let sa = qcc_core::hilbert::SpaceDescriptor::new([("x", d.0)]).unwrap();
        let sb = qcc_core::hilbert::SpaceDescriptor::new([("y", d.1)]).unwrap();
        let va = state_from(&sa, &a);
        let vb = state_from(&sb, &b);
        let t = va.tensor(&vb).unwrap();
        prop_assert!((t.norm() - va.norm() * vb.norm()).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_sesquilinear(
        (d, a, b, c) in dims().prop_flat_map(|d| {
            let n = d.0 * d.1;
            (Just(d), amplitudes(n), amplitudes(n), amplitudes(n))
        }),
        alpha in complex(),
        beta in complex(),
    ) {
        let s = space(["path", "pol"], d);
        let (va, vb, vc) = (state_from(&s, &a), state_from(&s, &b), state_from(&s, &c));
        let ab = va.inner(&vb).unwrap();
        prop_assert!(close(ab, vb.inner(&va).unwrap().conj(), 1e-12));
        let mix = superpose(&[(alpha, &vb), (beta, &vc)]).unwrap();
        let lhs = va.inner(&mix).unwrap();
        let rhs = alpha * ab + beta * va.inner(&vc).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
        let scaled_bra = va.scaled(alpha).inner(&vb).unwrap();
        prop_assert!(close(scaled_bra, alpha.conj() * ab, 1e-12));
    }

    #[test]
    fn apply_distributes_over_superposition(
        (d, a, b, m) in dims().prop_flat_map(|d| {
            let n = d.0 * d.1;
            (Just(d), amplitudes(n), amplitudes(n), square(d.1))
        }),
        alpha in complex(),
        beta in complex(),
    ) {
        let s = space(["path", "pol"], d);
        let op = OperatorExpr::local(s.clone(), "pol", m).unwrap();
        let (va, vb) = (state_from(&s, &a), state_from(&s, &b));
        let lhs = op.apply(&superpose(&[(alpha, &va), (beta, &vb)]).unwrap()).unwrap();
        let rhs = superpose(&[(alpha, &op.apply(&va).unwrap()), (beta, &op.apply(&vb).unwrap())]).unwrap();
        let diff = superpose(&[(Complex64::new(1.0, 0.0), &lhs), (Complex64::new(-1.0, 0.0), &rhs)]).unwrap();
        prop_assert!(diff.norm() < 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn sparse_apply_matches_dense_product(
        (d, a, m1, m2, m3) in dims().prop_flat_map(|d| {
            (Just(d), amplitudes(d.0 * d.1), square(d.0), square(d.1), square(d.1))
        }),
        c1 in complex(),
        c2 in complex(),
    ) {
        let s = space(["path", "pol"], d);
        let op = OperatorExpr::product(s.clone(), [("path", m1), ("pol", m2)])
            .unwrap()
            .scaled(c1)
            .plus(&OperatorExpr::local(s.clone(), "pol", m3).unwrap().scaled(c2))
            .unwrap();
        let v = state_from(&s, &a);
        let sparse = op.apply(&v).unwrap().to_dense(DEFAULT_DENSE_CAP).unwrap();
        let dense = op.to_dense(DEFAULT_DENSE_CAP).unwrap() * v.to_dense(DEFAULT_DENSE_CAP).unwrap();
        prop_assert!((sparse - dense).norm() < 1e-12 * (1.0 + v.norm()) * 16.0);
    }

    #[test]
    fn local_embeddings_keep_hermiticity_and_unitarity(
        (d, h) in dims().prop_flat_map(|d| (Just(d), hermitian(d.1))),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let s = space(["path", "pol"], d);
        let op = OperatorExpr::local(s.clone(), "pol", h).unwrap();
        prop_assert!(op.is_hermitian().unwrap());
        let report = op.check_structure().unwrap();
        prop_assert!(report.hermitian);

        let mut u = nalgebra::DMatrix::<Complex64>::identity(d.0, d.0);
        u[(0, 0)] = Complex64::from_polar(1.0, theta);
        u[(1, 1)] = Complex64::from_polar(1.0, -theta);
        let mut perm = qcc_core::hilbert::swap_levels(d.0, 0, d.0 - 1);
        for k in 1..d.0 - 1 {
            perm[(k, k)] = Complex64::new(1.0, 0.0);
        }
        let embedded = OperatorExpr::local(s, "path", perm * u).unwrap();
        prop_assert!(embedded.check_structure().unwrap().unitary);
    }

    #[test]
    fn state_json_round_trips(
        (d, a) in dims().prop_flat_map(|d| (Just(d), amplitudes(d.0 * d.1)))
    ) {
        let s = space(["path", "pol"], d);
        let v = state_from(&s, &a);
        prop_assert_eq!(StateVector::from_json_str(&v.to_json_string()).unwrap(), v);
    }
}
