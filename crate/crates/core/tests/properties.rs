use bellgup::chsh::{chsh_operator, chsh_square_identity, ChshSettings};
use bellgup::matkernel::{commutator, complex_anticommutator, dagger, kron, ComplexMatrix};
use bellgup::observables::Direction;
use num_complex::Complex;
use proptest::prelude::*;

type M = ComplexMatrix<f64>;

fn matrix(dim: usize) -> impl Strategy<Value = M> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), dim * dim)
        .prop_map(move |v| M::new(dim, v.into_iter().map(|(re, im)| Complex::new(re, im)).collect()).unwrap())
}

fn direction() -> impl Strategy<Value = Direction<f64>> {
    (0.0..std::f64::consts::PI, 0.0..2.0 * std::f64::consts::PI).prop_map(|(t, p)| Direction::from_spherical(t, p))
}

fn settings() -> impl Strategy<Value = ChshSettings<f64>> {
    (direction(), direction(), direction(), direction()).prop_map(|(a, a_prime, b, b_prime)| ChshSettings {
        a,
        a_prime,
        b,
        b_prime,
    })
}

fn close(a: &M, b: &M, tol: f64) -> bool {
    (a - b).frobenius_norm() <= tol
}

proptest! {
    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(3), c in matrix(2)) {
        prop_assert!(close(&kron(&kron(&a, &b), &c), &kron(&a, &kron(&b, &c)), 1e-12));
    }

    #[test]
    fn dagger_distributes_over_kron(a in matrix(3), b in matrix(2)) {
        prop_assert!(close(&dagger(&kron(&a, &b)), &kron(&dagger(&a), &dagger(&b)), 0.0));
    }

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(3), c in matrix(2), d in matrix(3)) {
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        prop_assert!(close(&lhs, &kron(&(&a * &c), &(&b * &d)), 1e-11));
    }

    #[test]
    fn commutator_is_antisymmetric(a in matrix(3), b in matrix(3)) {
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(close(&ab, &-&ba, 1e-12));
    }

    #[test]
    fn complex_anticommutator_is_hermitian(a in matrix(3), b in matrix(3)) {
        prop_assert!(complex_anticommutator(&a, &b).unwrap().hermiticity_residual() <= 1e-12);
    }

    #[test]
    fn chsh_operator_hermitian_and_bounded(s in settings()) {
        let b = chsh_operator(&s);
        prop_assert!(b.hermiticity_residual() <= 1e-12);
        prop_assert!(b.operator_norm() <= 2.0 * 2f64.sqrt() + 1e-9);
    }

    #[test]
    fn chsh_square_identity_holds(s in settings()) {
        prop_assert!(chsh_square_identity(&s).gap <= 1e-12);
    }
}
