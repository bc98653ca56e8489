use trotter_core::family::{
    estimate_c_alpha, holder_seminorm, make_heat1d_family, make_scalar_family, make_synthetic_matrix_family,
    scalar_family_with_dim, Potential, ScalarProfile,
};
use trotter_core::oracle::{analytic_commuting, refine_to_tol};
use trotter_core::semigroup::{build_u_evo, correspondence_check_variant, BlockShiftOperator};
use trotter_core::spectral::op_norm;
use trotter_core::trotter::{trotter_left, trotter_right};
use trotter_core::{Error, Role, SpectralOperator, SymMatrix, TimeDependentFamily, Variant};

const TOL: f64 = 1e-10;

fn unit() -> SpectralOperator {
    SpectralOperator::from_diagonal(&[1.0], Role::Generator).unwrap()
}

fn linear() -> TimeDependentFamily {
    make_scalar_family(ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap()
}

fn families() -> Vec<(SpectralOperator, TimeDependentFamily)> {
    let diag = SpectralOperator::from_diagonal(&[1.0, 2.0, 5.0], Role::Generator).unwrap();
    let base = SymMatrix::from_row_slice(3, &[1.0, 0.2, 0.0, 0.2, 0.5, 0.1, 0.0, 0.1, 0.3]).unwrap();
    let direction = SymMatrix::from_row_slice(3, &[0.5, 0.0, 0.3, 0.0, 1.0, 0.0, 0.3, 0.0, 0.4]).unwrap();
    let w = ScalarProfile::Weierstrass { c: 1.0, beta: 0.5, terms: 8 };
    let mut out = vec![
        (diag.clone(), TimeDependentFamily::zero(3, 1.0).unwrap()),
        (diag.clone(), scalar_family_with_dim(ScalarProfile::Power { c: 1.0, beta: 0.5 }, 1.0, 3).unwrap()),
        (diag.clone(), make_synthetic_matrix_family(base, direction, w.clone(), 1.0).unwrap()),
    ];
    out.push(make_heat1d_family(6, &Potential::sin_squared(), w, 1.0).unwrap());
    out
}

#[test]
fn scalar_split_step_values() {
    let v = trotter_left(&unit(), &linear(), 0.0, 1.0, 2).unwrap();
    assert!((v.matrix[(0, 0)] - (-1.25f64).exp()).abs() < 1e-15);
    let w = trotter_right(&unit(), &linear(), 0.0, 1.0, 2).unwrap();
    assert!((w.matrix[(0, 0)] - (-1.75f64).exp()).abs() < 1e-15);
    let u = refine_to_tol(&unit(), &linear(), 0.0, 1.0, TOL).unwrap();
    assert!((u.matrix[(0, 0)] - (-1.5f64).exp()).abs() <= TOL);
    assert!(((v.matrix[(0, 0)] - u.matrix[(0, 0)]) - 0.06337).abs() < 1e-5);
    assert!(((u.matrix[(0, 0)] - w.matrix[(0, 0)]) - 0.04936).abs() < 1e-5);
}

#[test]
fn oracles_agree_on_scalar_profiles() {
    for p in [
        ScalarProfile::Constant { c: 2.0 },
        ScalarProfile::Power { c: 1.0, beta: 0.5 },
        ScalarProfile::Linear { c: 1.0 },
        ScalarProfile::Weierstrass { c: 1.0, beta: 0.5, terms: 12 },
    ] {
        let family = make_scalar_family(p, 1.0).unwrap();
        for (s, t) in [(0.0, 1.0), (0.25, 0.75), (0.1, 0.1)] {
            let exact = analytic_commuting(&unit(), &family, s, t).unwrap();
            let reference = refine_to_tol(&unit(), &family, s, t, TOL).unwrap();
            assert!(op_norm(&(exact.matrix - reference.matrix)).unwrap() <= TOL, "{} on [{s}, {t}]", family.label());
        }
    }
}

#[test]
fn reference_is_a_contractive_cocycle() {
    for (a, family) in families() {
        let (s, t) = (0.125, 0.875);
        let r = 0.5 * (s + t);
        let full = refine_to_tol(&a, &family, s, t, TOL).unwrap().matrix;
        let split = refine_to_tol(&a, &family, r, t, TOL).unwrap().matrix * refine_to_tol(&a, &family, s, r, TOL).unwrap().matrix;
        assert!(op_norm(&(full.clone() - split)).unwrap() <= 3.0 * TOL, "{}", family.label());
        assert!(op_norm(&full).unwrap() <= 1.0 + 1e-12);
        let same = refine_to_tol(&a, &family, r, r, TOL).unwrap().matrix;
        assert_eq!(same, nalgebra::DMatrix::identity(a.dim(), a.dim()));
    }
}

#[test]
fn heat_laplacian_spectrum() {
    let (a, _) = make_heat1d_family(16, &Potential::sin_squared(), ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap();
    for (k, &lambda) in a.eigenvalues().iter().enumerate() {
        assert_eq!(lambda, ((k + 1) * (k + 1)) as f64);
    }
}

#[test]
fn samples_stay_positive_semidefinite() {
    for (_, family) in families() {
        for i in 0..=64 {
            let b = family.sample(i as f64 / 64.0).unwrap();
            assert!(b.min_eigenvalue() >= -1e-10, "{} at {i}", family.label());
        }
    }
}

#[test]
fn constants_decrease_in_alpha() {
    for (a, family) in families() {
        let alphas = [0.0, 0.2, 0.4, 0.6, 0.8];
        for pair in alphas.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let c_lo = estimate_c_alpha(&family, &a, lo, 64).unwrap();
            let c_hi = estimate_c_alpha(&family, &a, hi, 64).unwrap();
            assert!(c_hi <= c_lo + 1e-10, "{} C at {hi}", family.label());
            let l_lo = holder_seminorm(&family, &a, lo, 0.5, 64).unwrap();
            let l_hi = holder_seminorm(&family, &a, hi, 0.5, 64).unwrap();
            assert!(l_hi <= l_lo + 1e-10, "{} L at {hi}", family.label());
        }
    }
}

#[test]
fn correspondence_on_small_grid() {
    for variant in [Variant::Left, Variant::Right] {
        for n in [2, 4] {
            let c = correspondence_check_variant(variant, &unit(), &linear(), 8, n, TOL).unwrap();
            assert!(c.gap <= 1e-10, "{variant:?} n={n}: {c:?}");
        }
    }
    let err = correspondence_check_variant(Variant::Left, &unit(), &linear(), 8, 3, TOL).unwrap_err();
    assert!(matches!(err, Error::IndivisibleGrid { .. }), "{err:?}");
}

#[test]
fn evolution_semigroup_law() {
    let (a, family) = make_heat1d_family(4, &Potential::sin_squared(), ScalarProfile::Linear { c: 1.0 }, 1.0).unwrap();
    let n_slots = 8;
    let u = |k| build_u_evo(&a, &family, n_slots, k, TOL).unwrap();
    let (u2, u3, u5): (BlockShiftOperator, BlockShiftOperator, BlockShiftOperator) = (u(2), u(3), u(5));
    assert!(u2.compose(&u3).unwrap().sub(&u5).unwrap().block_norm().unwrap() <= 3.0 * TOL);
    assert!(u5.block_norm().unwrap() <= 1.0 + 1e-12);
}
