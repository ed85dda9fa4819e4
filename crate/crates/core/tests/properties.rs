use proptest::prelude::*;

use hubbard_lax::aux_space::{AuxSpace, AuxVertex};
use hubbard_lax::lax::{LaxBuilder, LaxFamily, LaxParams};
use hubbard_lax::linalg::{SparseOperator, C64};
use hubbard_lax::verify::{check_family, CheckOptions, DEFAULT_TOL};

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
}

/// Random sparse matrix with roughly half of its entries set.
fn sparse(rows: usize, cols: usize) -> impl Strategy<Value = SparseOperator> {
    proptest::collection::vec(proptest::option::weighted(0.5, complex()), rows * cols).prop_map(move |cells| {
        let trip = cells
            .into_iter()
            .enumerate()
            .filter_map(|(k, v)| v.map(|v| (k / cols, k % cols, v)));
        SparseOperator::from_triplets(rows, cols, trip).unwrap()
    })
}

fn triple() -> impl Strategy<Value = (SparseOperator, SparseOperator, SparseOperator)> {
    (1usize..6, 1usize..6, 1usize..6, 1usize..6)
        .prop_flat_map(|(a, b, c, d)| (sparse(a, b), sparse(b, c), sparse(c, d)))
}

fn on_annulus() -> impl Strategy<Value = C64> {
    (0.3f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn params() -> impl Strategy<Value = LaxParams> {
    (on_annulus(), on_annulus(), prop::sample::select(vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]))
        .prop_map(|(lambda, omega, u)| LaxParams::new(lambda, omega, u))
}

proptest! {
    #[test]
    fn compose_is_associative((a, b, c) in triple()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        let scale = a.frobenius() * b.frobenius() * c.frobenius();
        prop_assert!(left.try_sub(&right).unwrap().frobenius() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn kron_mixed_product(
        (a, c) in (1usize..4, 1usize..4).prop_flat_map(|(m, k)| (sparse(m, k), sparse(k, m))),
        (b, d) in (1usize..4, 1usize..4).prop_flat_map(|(m, k)| (sparse(m, k), sparse(k, m))),
    ) {
        let lhs = a.kron(&b).unwrap().compose(&c.kron(&d).unwrap()).unwrap();
        let rhs = a.compose(&c).unwrap().kron(&b.compose(&d).unwrap()).unwrap();
        let scale = a.frobenius() * b.frobenius() * c.frobenius() * d.frobenius();
        prop_assert!(lhs.try_sub(&rhs).unwrap().frobenius() <= 1e-13 * scale.max(1e-300));
    }

    #[test]
    fn dagger_is_an_involution(a in (1usize..7, 1usize..7).prop_flat_map(|(r, c)| sparse(r, c))) {
        prop_assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn aux_index_round_trip(k in 1usize..12) {
        let space = AuxSpace::new(k).unwrap();
        prop_assert_eq!(space.dim(), 4 * k + 1);
        for (i, v) in space.vertices().iter().enumerate() {
            prop_assert_eq!(space.index(*v), Some(i));
            prop_assert_eq!(AuxVertex::parse(&v.to_string()), Some(*v));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn residuals_are_gauge_invariant(p in params(), xi in on_annulus()) {
        let opts = CheckOptions::new(3, DEFAULT_TOL);
        let plain = check_family(&LaxFamily::new(p, 5).unwrap(), &opts).unwrap();
        let gauged = check_family(&LaxBuilder::new(p, 5).gauge(xi).build().unwrap(), &opts).unwrap();
        for (a, b) in plain.iter().zip(&gauged) {
            prop_assert!(b.passed, "{:?}", b);
            prop_assert!((a.relative() - b.relative()).abs() <= 1e-12);
        }
    }

    /// With `Y` deliberately scaled the residuals are nonzero; they must still
    /// not depend on how far beyond the projection level the operators extend.
    #[test]
    fn residuals_do_not_depend_on_cutoff(p in params(), k in 3usize..5) {
        let opts = CheckOptions::new(k, DEFAULT_TOL);
        let run = |cutoff: usize| {
            let mut f = LaxFamily::new(p, cutoff).unwrap();
            f.y = f.y.scale(C64::new(1.01, 0.0));
            f.assemble().unwrap();
            check_family(&f, &opts).unwrap()
        };
        let a = run(k + 2);
        let b = run(k + 3);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.residual_fro - y.residual_fro).abs() <= 1e-12 * x.operand_scale.max(1.0), "{:?} {:?}", x, y);
        }
        prop_assert!(a.iter().any(|r| !r.passed));
    }
}
