use std::f64::consts::PI;

use proptest::prelude::*;

use helfrich_core::body::Body;
use helfrich_core::constructions::{dumbbell, ellipsoid, sphere};
use helfrich_core::functionals::SurfaceRef;
use helfrich_core::inequalities::{
    check_diameter_bound, check_isoperimetric, check_varifold_bounds, empirical_diameter_constant, expansion_identity,
    fixture_suite, gamma_threshold, isoperimetric_constant, lsc_deficit_sweep, total_mc_sweep, GammaInputs,
    InequalityReport,
};
use helfrich_core::surface::CompositeSurface;
use helfrich_core::{GeomError, QuadSpec, Vec3};

fn q() -> QuadSpec {
    QuadSpec::default()
}

fn unit_sphere() -> CompositeSurface {
    CompositeSurface::single(sphere(1.0, Vec3::zeros()).unwrap())
}

#[test]
fn diameter_ratios_of_the_unit_sphere() {
    let s = unit_sphere();
    let r0 = check_diameter_bound((&s).into(), 0.0, None, &q()).unwrap();
    assert!((r0.metadata["ratio"] - 1.0 / (4.0 * PI)).abs() < 1e-9);
    assert!((r0.metadata["ratio"] - 0.07958).abs() < 1e-5);
    let r1 = check_diameter_bound((&s).into(), -1.0, None, &q()).unwrap();
    assert!((r1.metadata["ratio"] - 2.0 / (12.0 * PI)).abs() < 1e-9);
    assert!((r1.metadata["ratio"] - 0.05305).abs() < 1e-5);
    let with_c = check_diameter_bound((&s).into(), 0.0, Some(0.1), &q()).unwrap();
    assert!(with_c.pass && (with_c.rhs - 0.1 * 8.0 * PI).abs() < 1e-9);
    let too_small = check_diameter_bound((&s).into(), 0.0, Some(0.05), &q()).unwrap();
    assert!(!too_small.pass);
    assert!(matches!(check_diameter_bound((&s).into(), 0.5, None, &q()), Err(GeomError::Domain(_))));
}

#[test]
fn empirical_constant_grows_with_the_suite() {
    let suite = fixture_suite().unwrap();
    let refs: Vec<SurfaceRef<'_>> = suite.iter().map(|(_, f)| f.as_ref()).collect();
    let mut last = 0.0;
    for k in 1..=refs.len() {
        let c = empirical_diameter_constant(&refs[..k], -1.0, &q()).unwrap();
        assert!(c.is_finite() && c >= last);
        last = c;
    }
    println!("empirical diameter constant at c0 = -1: {last:.5}");
    for (name, f) in &suite {
        let r = check_diameter_bound(f.as_ref(), -1.0, Some(last), &q()).unwrap();
        assert!(r.pass, "{name}");
    }
}

#[test]
fn isoperimetric_unit_ball() {
    let ball = Body::ball(Vec3::zeros(), 1.0).unwrap();
    let (thm, cor) = check_isoperimetric(&ball, 0.0, 20_000, 7, 0.0, &q()).unwrap();
    assert!(thm.pass && cor.pass);
    assert!((thm.residual - 60.0 * PI * PI).abs() < 1e-8 * thm.rhs);
    let (thm, cor) = check_isoperimetric(&ball, -1.0, 20_000, 7, 0.0, &q()).unwrap();
    assert!(thm.pass && cor.pass);
    assert!((thm.lhs - 4.0 * PI * PI).abs() < 1e-9);
    println!("unit ball c0 = -1: theorem residual {:.4}, corollary residual {:.4}", thm.residual, cor.residual);
    assert!(check_isoperimetric(&ball, 1.0, 20_000, 7, 0.0, &q()).is_err());
}

#[test]
fn isoperimetric_terms_scale() {
    let (t1, _) = check_isoperimetric(&Body::ball(Vec3::zeros(), 1.0).unwrap(), -1.0, 20_000, 7, 0.0, &q()).unwrap();
    for lambda in [0.5, 2.0] {
        let b = Body::ball(Vec3::zeros(), lambda).unwrap();
        // At c₀/λ every term of the theorem scales as λ².
        let (t, _) = check_isoperimetric(&b, -1.0 / lambda, 20_000, 7, 0.0, &q()).unwrap();
        let l2 = lambda * lambda;
        assert!((t.lhs / (l2 * t1.lhs) - 1.0).abs() < 1e-10);
        assert!((t.metadata["deficit_l1"] / (lambda * t1.metadata["deficit_l1"]) - 1.0).abs() < 1e-10);
        assert!((t.metadata["k1"] / (lambda.powi(3) * t1.metadata["k1"]) - 1.0).abs() < 1e-3);
        assert!((t.metadata["k2"] / (lambda.powi(3) * t1.metadata["k2"]) - 1.0).abs() < 1e-3);
        assert!((t.residual / (l2 * t1.residual) - 1.0).abs() < 1e-3);
    }
}

#[test]
fn isoperimetric_on_solids() {
    let solids = [
        Body::from_composite(&CompositeSurface::single(ellipsoid(1.4, 0.7).unwrap())).unwrap(),
        Body::from_composite(&dumbbell(0.3, 0.3).unwrap()).unwrap(),
    ];
    for b in &solids {
        for c0 in [-2.0, -1.0, 0.0] {
            let (thm, cor) = check_isoperimetric(b, c0, 10_000, 1, 0.0, &q()).unwrap();
            assert!(thm.pass && cor.pass, "{thm:?} {cor:?}");
        }
    }
}

#[test]
fn varifold_bound_examples() {
    let s = unit_sphere();
    let r = check_varifold_bounds((&s).into(), 0.0, &q()).unwrap();
    assert!(r.iter().all(|x| x.pass));
    assert!(r[0].residual.abs() < 1e-6 * r[0].rhs, "the ball is extremal");
    assert!((r[0].metadata["c"] - isoperimetric_constant()).abs() < 1e-16);
    // At c₀ = 0 both energy bounds read 𝒲 ≤ 2𝒲.
    assert!((r[1].rhs - 2.0 * r[1].lhs).abs() < 1e-12 && (r[2].rhs - 2.0 * r[2].lhs).abs() < 1e-12);
    let db = dumbbell(1.0, 1.0).unwrap();
    let r = check_varifold_bounds((&db).into(), -1.0, &q()).unwrap();
    assert!(r.iter().all(|x| x.pass && x.residual > 0.0), "{r:?}");
}

#[test]
fn fixture_suite_satisfies_all_bounds() {
    let suite = fixture_suite().unwrap();
    assert!(suite.len() >= 8);
    for (name, f) in &suite {
        for c0 in [-2.0, -1.0, 0.0, 1.0] {
            let rep = helfrich_core::functionals::evaluate_functionals(f.as_ref(), c0, &q()).unwrap();
            let e = expansion_identity(&rep);
            assert!(e.pass, "{name} c0 = {c0}: {e:?}");
            for b in helfrich_core::inequalities::varifold_bounds(&rep) {
                assert!(b.pass, "{name} c0 = {c0}: {b:?}");
            }
        }
    }
}

#[test]
fn gamma_examples() {
    let g = |c0, a0, v0, c| GammaInputs { c0, a0, v0, c_diam: c };
    let (gm, th) = gamma_threshold(&g(0.0, 4.0 * PI, 1.0, 1.0)).unwrap();
    assert_eq!((gm, th), (0.0, 8.0 * PI));
    let (gm, th) = gamma_threshold(&g(-1.0, 4.0 * PI, 4.0 * PI / 3.0, 1.0)).unwrap();
    let oracle = 4.0 * PI * ((1.0 + (4.0 * PI / 3.0) / (32.0 * PI.powi(3))).sqrt() - 1.0);
    assert!((gm - oracle).abs() < 1e-15 && (th - 8.0 * PI - oracle).abs() < 1e-14);
    let (gm, _) = gamma_threshold(&g(1.0, 4.0 * PI, 1.0, 1.0)).unwrap();
    assert!((gm + 6.0 * (4.0 * PI * PI).cbrt()).abs() < 1e-13);
    assert!(matches!(gamma_threshold(&g(-1.0, 1.0, 1.0, 1.0)), Err(GeomError::Infeasible(_))));
    assert!(gamma_threshold(&g(-1.0, 1.0, 0.01, 0.0)).is_err());
}

proptest! {
    #[test]
    fn gamma_branches(c0 in -5.0f64..5.0, a0 in 0.5f64..50.0, frac in 0.01f64..1.0, c in 0.01f64..2.0) {
        let v0 = frac * isoperimetric_constant() * a0.powf(1.5);
        let (gm, th) = gamma_threshold(&GammaInputs { c0, a0, v0, c_diam: c }).unwrap();
        prop_assert_eq!(th, 8.0 * PI + gm);
        if c0 < 0.0 { prop_assert!(gm > 0.0); } else { prop_assert!(gm <= 0.0); }
        let (g0, t0) = gamma_threshold(&GammaInputs { c0: 0.0, a0, v0, c_diam: c }).unwrap();
        prop_assert_eq!((g0, t0), (0.0, 8.0 * PI));
    }

    #[test]
    fn report_pass_rule(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0, err in 0.0f64..1.0) {
        let r = InequalityReport::new("x", lhs, rhs, err);
        prop_assert_eq!(r.residual, rhs - lhs);
        prop_assert_eq!(r.pass, r.residual >= -err);
    }

    #[test]
    fn ellipsoids_satisfy_varifold_bounds(a in 0.3f64..2.0, c in 0.3f64..2.0, c0 in -3.0f64..3.0) {
        let s = CompositeSurface::single(ellipsoid(a, c).unwrap());
        for r in check_varifold_bounds((&s).into(), c0, &q()).unwrap() {
            prop_assert!(r.pass, "{:?}", r);
        }
    }
}

#[test]
fn sweeps_reject_bad_grids() {
    assert!(lsc_deficit_sweep(-2.0, &[0.05, 0.1], &q()).is_err());
    assert!(lsc_deficit_sweep(0.0, &[0.1, 0.05], &q()).is_err());
    assert!(total_mc_sweep(&[0.01, 0.02], &q()).is_err());
    let r = total_mc_sweep(&[0.04, 0.02], &q()).unwrap();
    assert_eq!(r.rows.len() + r.skipped.len(), 2);
    assert!(r.rows.windows(2).all(|w| w[0].total_mc < w[1].total_mc));
}
