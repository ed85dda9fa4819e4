use hubbard_lax::hubbard::{local, PhysicalSpace, ID};
use hubbard_lax::lax::LaxFamily;
use hubbard_lax::lindblad::{compare_states, fixed_point_oracle, spectrum, LindbladSpec};
use hubbard_lax::linalg::{DenseOperator, SparseOperator, C64};
use hubbard_lax::ness::{build_double_lax, build_ness, check_telescoping, exact_cutoff, DrivingConfig};
use hubbard_lax::verify::{lax_tensor, DEFAULT_TOL};

fn drive(gl: f64, gr: f64, ml: f64, mr: f64, u: f64, n: usize) -> DrivingConfig {
    DrivingConfig { gamma_l: gl, gamma_r: gr, mu_l: ml, mu_r: mr, u, n_sites: n }
}

fn oracle_distance(cfg: &DrivingConfig) -> f64 {
    let ness = build_ness(cfg, None).unwrap();
    let oracle = fixed_point_oracle(&LindbladSpec::new(cfg).unwrap()).unwrap();
    assert_eq!(oracle.null_dim, 1);
    compare_states(&ness.rho, &oracle.rho, oracle.null_dim).frobenius_distance
}

#[test]
fn two_site_example_matches_oracle() {
    assert!(oracle_distance(&drive(1.0, 0.5, 0.0, 0.0, 1.0, 2)) < 1e-10);
}

#[test]
fn free_two_site_chain_matches_oracle() {
    assert!(oracle_distance(&drive(0.8, 1.4, 0.5, -0.3, 0.0, 2)) < 1e-10);
}

#[test]
fn three_site_chemical_potentials_match_oracle() {
    assert!(oracle_distance(&drive(0.6, 1.1, -0.4, 0.7, 1.5, 3)) < 1e-9);
}

#[test]
fn generator_is_dissipative() {
    let spec = LindbladSpec::new(&drive(1.0, 1.0, 0.0, 0.0, 1.0, 2)).unwrap();
    let ev = spectrum(&spec).unwrap();
    assert_eq!(ev.len(), 256);
    assert!(ev.iter().all(|z| z.re <= 1e-12));
    assert_eq!(ev.iter().filter(|z| z.norm() < 1e-10).count(), 1);
}

#[test]
fn state_is_species_symmetric() {
    for n in 2..=4 {
        let ness = build_ness(&drive(1.3, 0.4, 0.2, -0.9, 2.0, n), None).unwrap();
        let g = PhysicalSpace::new(n).unwrap().spin_flip().to_dense();
        let flipped = g.compose(&ness.rho).unwrap().compose(&g).unwrap();
        assert!((&flipped - &ness.rho).frobenius() < 1e-12);
        assert!(ness.diagnostics.filter_commutator < 1e-10);
    }
}

#[test]
fn equal_rates_give_trivial_filter() {
    let ness = build_ness(&drive(0.7, 0.7, 0.2, 0.5, 1.0, 3), None).unwrap();
    assert_eq!(ness.eta, 0.0);
    let oo = (&ness.omega_op * &ness.omega_op.dagger()).to_dense();
    let tr = oo.trace();
    assert!((&oo.scale(C64::new(1.0, 0.0) / tr) - &ness.rho).frobenius() < 1e-13);
}

/// Lax operator assembled from its 16 components equals the product of the
/// three factors `S`, `T`, `X` on `aux (x) phys`.
#[test]
fn lax_components_match_factored_product() {
    let cfg = drive(1.0, 0.5, 0.3, -0.2, 1.0, 2);
    let fam = LaxFamily::new(cfg.lax_params().unwrap(), 3).unwrap();
    let embed = |aux: &SparseOperator, phys: &DenseOperator| aux.kron(&SparseOperator::from_dense(phys)).unwrap();
    let mut s = SparseOperator::zeros(fam.dim() * 4, fam.dim() * 4);
    let mut t = s.clone();
    for k in 0..4 {
        s = s.try_add(&embed(&fam.s[k], &local(k, ID))).unwrap();
        t = t.try_add(&embed(&fam.t[k], &local(ID, k))).unwrap();
    }
    let x = embed(&fam.x, &DenseOperator::identity(4));
    let product = &(&s * &t) * &x;
    let assembled = lax_tensor(&fam.l).unwrap().to_operator();
    assert!(product.max_abs_diff(&assembled).unwrap() < 1e-13);
}

#[test]
fn contracted_telescoping_up_to_four_sites() {
    for n in 2..=4 {
        let cfg = drive(1.2, 0.7, 0.4, 0.1, -1.0, n);
        let double = build_double_lax(&cfg, exact_cutoff(n)).unwrap();
        let r = check_telescoping(&double, n, DEFAULT_TOL).unwrap();
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn invalid_driving_is_rejected() {
    assert!(build_ness(&drive(0.0, 1.0, 0.0, 0.0, 1.0, 2), None).is_err());
    assert!(build_ness(&drive(1.0, -1.0, 0.0, 0.0, 1.0, 2), None).is_err());
    assert!(build_ness(&drive(1.0, 1.0, 0.0, 0.0, 1.0, 1), None).is_err());
    assert!(build_ness(&drive(1.0, 1.0, 0.0, 0.0, 1.0, 6), None).is_err());
    assert!(fixed_point_oracle(&LindbladSpec::new(&drive(1.0, 1.0, 0.0, 0.0, 1.0, 4)).unwrap()).is_err());
}
