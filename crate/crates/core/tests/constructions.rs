use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use proptest::prelude::*;

use helfrich_core::constructions::{
    bridged_double_sphere, bridged_immersed_sphere, bump_count, capped_catenoid, catenoid_piece, cut_sphere,
    handled_sphere, nodoid_piece, snake_a_for_side, snake_cell_length, snake_surface, sphere, spherical_cap,
};
use helfrich_core::elliptic::{elliptic_e, elliptic_ke};
use helfrich_core::functionals::{evaluate_functionals, evaluate_piece};
use helfrich_core::nodoid::{nodoid_closure_height, NodoidParams, NodoidTable};
use helfrich_core::surface::{check_c11_gluing, BoundaryId, CompositeSurface};
use helfrich_core::{integrate_1d, GeomError, QuadSpec, RigidMotion, Vec3};

fn q() -> QuadSpec {
    QuadSpec::default()
}

/// K and E from their Maclaurin series in k².
fn series_ke(k: f64) -> (f64, f64) {
    let (mut big_k, mut big_e) = (0.0, 0.0);
    let mut coef = 1.0;
    let k2 = k * k;
    let mut pow = 1.0;
    for n in 0..2000 {
        if n > 0 {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            coef *= r * r;
            pow *= k2;
        }
        big_k += coef * pow;
        big_e += coef * pow / (1.0 - 2.0 * n as f64);
    }
    (FRAC_PI_2 * big_k, FRAC_PI_2 * big_e)
}

#[test]
fn elliptic_examples() {
    let p = elliptic_ke(0.0).unwrap();
    assert_eq!((p.big_k, p.big_e), (FRAC_PI_2, FRAC_PI_2));
    assert!((elliptic_e(1.0).unwrap() - 1.0).abs() < 1e-14);
    let k = 0.5f64.sqrt();
    let p = elliptic_ke(k).unwrap();
    let (sk, se) = series_ke(k);
    assert!((p.big_k - sk).abs() < 1e-10 && (p.big_e - se).abs() < 1e-10);
    assert!((p.big_k - 1.85407468).abs() < 1e-8 && (p.big_e - 1.35064388).abs() < 1e-8);
    assert!(elliptic_ke(1.0).is_err());
}

proptest! {
    #[test]
    fn elliptic_matches_series_and_bounds(k in 0.0f64..0.9) {
        let p = elliptic_ke(k).unwrap();
        let (sk, se) = series_ke(k);
        prop_assert!((p.big_k - sk).abs() < 1e-10 * sk);
        prop_assert!((p.big_e - se).abs() < 1e-10 * se);
        prop_assert!(p.big_k >= FRAC_PI_2 - 1e-15 && FRAC_PI_2 >= p.big_e - 1e-15 && p.big_e >= 1.0);
    }
}

#[test]
fn catenoid_piece_examples() {
    let p = catenoid_piece(1.0, 1.0).unwrap();
    let r = evaluate_piece(&p, 0.0, &q()).unwrap();
    assert_relative_eq!(r.area, PI * (2f64.sinh() / 2.0 + 1.0), max_relative = 1e-10);
    assert!((r.area - 8.83865).abs() < 1e-5);
    assert!(catenoid_piece(0.0, 1.0).is_err());
    assert!(catenoid_piece(1.0, -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn catenoid_area_and_minimality(a in 0.05f64..3.0, t in 0.05f64..3.0, lambda in 0.2f64..4.0) {
        let p = catenoid_piece(a, t).unwrap();
        // Independent oracle: 2π∫ f√(1 + f'²) dx with f = a cosh(x/a).
        let (oracle, _) = integrate_1d(|x| 2.0 * PI * a * (x / a).cosh().powi(2), 0.0, t, &q()).unwrap();
        let formula = PI * a * (0.5 * a * (2.0 * t / a).sinh() + t);
        let area = evaluate_piece(&p, 0.0, &q()).unwrap().area;
        prop_assert!((area / formula - 1.0).abs() < 1e-10);
        prop_assert!((oracle / formula - 1.0).abs() < 1e-10);
        prop_assert!(p.scalar_mc_defect(100).unwrap() < 1e-8);
        let big = evaluate_piece(&catenoid_piece(lambda * a, lambda * t).unwrap(), 0.0, &q()).unwrap().area;
        prop_assert!((big / (lambda * lambda * area) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spherical_cap_area(r in 0.1f64..5.0, theta0 in 0.01f64..PI) {
        let c = spherical_cap(r, theta0).unwrap();
        let area = evaluate_piece(&c, 0.0, &q()).unwrap().area;
        let h = r * (1.0 - theta0.cos());
        prop_assert!((area / (2.0 * PI * r * h) - 1.0).abs() < 1e-12);
        prop_assert!((c.scalar_mc.unwrap() - 2.0 / r).abs() < 1e-15);
    }

    #[test]
    fn cut_sphere_closed_forms(a in 0.05f64..2.0, u in 0.05f64..6.0) {
        let t = a * u;
        let cs = cut_sphere(a, t).unwrap();
        prop_assert!((cs.r / (a * u.cosh().powi(2)) - 1.0).abs() < 1e-8);
        prop_assert!((cs.h / (a * u.cosh() * (-u).exp()) - 1.0).abs() < 1e-8);
        prop_assert!((cs.rho / (a * u.cosh()) - 1.0).abs() < 1e-8);
        prop_assert!((cs.p / (t + a * u.cosh() * u.sinh()) - 1.0).abs() < 1e-8);
        let r = evaluate_piece(&cs.piece, 0.0, &q()).unwrap();
        prop_assert!((r.area / (2.0 * PI * a * a * u.cosh().powi(3) * u.exp()) - 1.0).abs() < 1e-8);
        prop_assert!((r.total_mc / (4.0 * PI * a * u.cosh() * u.exp()) - 1.0).abs() < 1e-8);
        let glued = capped_catenoid(a, t).unwrap();
        for g in check_c11_gluing(&glued).unwrap() {
            prop_assert!(g.position_gap < 1e-9 && g.tangent_gap < 1e-8);
        }
    }

    #[test]
    fn nodoid_closure_height_scales(a in 0.1f64..3.0, b in 0.1f64..3.0, lambda in 0.2f64..5.0) {
        let h = nodoid_closure_height(a, b).unwrap();
        prop_assert!((nodoid_closure_height(lambda * a, lambda * b).unwrap() / (lambda * h) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn cut_sphere_examples() {
    let cs = cut_sphere(1.0, 1.0).unwrap();
    assert!((cs.r - 2.381098).abs() < 1e-6);
    let r = evaluate_piece(&cs.piece, 0.0, &q()).unwrap();
    assert!((r.area - 62.7538).abs() < 1e-4);
    assert!((r.total_mc - 52.7100).abs() < 1e-3);
    let gaps = check_c11_gluing(&capped_catenoid(1.0, 1.0).unwrap()).unwrap();
    assert!(gaps.iter().all(|g| g.position_gap < 1e-9 && g.tangent_gap < 1e-8));
}

#[test]
fn offset_joint_is_detected() {
    let lower = spherical_cap(1.0, FRAC_PI_2).unwrap();
    let upper = spherical_cap(1.0, FRAC_PI_2)
        .unwrap()
        .transformed(&RigidMotion::rotation_axis_angle(Vec3::x(), PI).then_translate(Vec3::new(0.0, 0.0, 0.01)));
    let mut s = CompositeSurface::new("offset");
    let i = s.push(upper);
    let j = s.push(lower);
    s.glue((i, BoundaryId::Start), (j, BoundaryId::Start));
    let g = check_c11_gluing(&s).unwrap();
    assert!((g[0].position_gap - 0.01).abs() < 1e-9, "{g:?}");
    assert!(!g[0].passes());
}

#[test]
fn nodoid_radii_and_mean_curvature() {
    let p = NodoidParams::new(1.0, 1.0).unwrap();
    let tab = NodoidTable::new(p).unwrap();
    assert!((tab.f(0.0) - 0.414214).abs() < 1e-6);
    let piece = nodoid_piece(p).unwrap();
    let prof = &piece.profile;
    let mut sup: f64 = 0.0;
    for i in 0..100 {
        let t = prof.t_min + (prof.t_max - prof.t_min) * (i as f64 + 0.5) / 100.0;
        let h = piece.scalar_mean_curvature(t);
        assert!((0.5 * h + 0.5).abs() < 1e-6, "t = {t}: averaged {}", 0.5 * h);
        sup = sup.max(tab.f(t));
        assert!(tab.f(t) >= tab.f(0.0) - 1e-15);
    }
    assert!(sup < 1.0 && (tab.f(p.t_max) - 1.0).abs() < 1e-8);
}

#[test]
fn nodoid_normal_matches_closed_form() {
    for (a, b) in [(1.0, 1.0), (0.5, 0.2), (2.0, 0.7)] {
        let p = NodoidParams::new(a, b).unwrap();
        let piece = nodoid_piece(p).unwrap();
        for i in 0..50 {
            let t = p.t_max * (i as f64 + 0.5) / 50.0;
            let th = 0.37 * i as f64;
            let d = (p.c * t.cosh()).powi(2) - a * a;
            let nu = Vec3::new(-b * th.cos(), -b * th.sin(), p.c * t.sinh()) / d.sqrt();
            let cross = piece.tangent(t, th).cross(&(piece.point(t, th + 1e-6) - piece.point(t, th - 1e-6))).normalize();
            let n = piece.normal(t, th);
            assert!((n - nu).norm() < 1e-8 || (n + nu).norm() < 1e-8, "t = {t}");
            assert!((cross - nu).norm() < 1e-6 || (cross + nu).norm() < 1e-6, "t = {t}");
            assert!((n - nu).norm() < 1e-8, "normal points towards the axis at the neck");
        }
    }
}

#[test]
fn nodoid_closure_height_examples() {
    let h = nodoid_closure_height(1.0, 1.0).unwrap();
    let c = 2f64.sqrt();
    let ke = elliptic_ke(1.0 / c).unwrap();
    assert!((h - 2.0 * (1.0 - c * (ke.big_e - 0.5 * ke.big_k)).abs()).abs() < 1e-14);
    assert!((h - 0.80186).abs() < 1e-5, "{h}");
    for (a, b) in [(1.0, 1.0), (0.5, 0.1), (2.0, 0.5)] {
        let p = NodoidParams::new(a, b).unwrap();
        let tab = NodoidTable::new(p).unwrap();
        let g_limit = tab.g(p.t_max) - tab.g(-p.t_max);
        assert!((g_limit.abs() - nodoid_closure_height(a, b).unwrap()).abs() < 1e-6);
    }
    let hs: Vec<f64> = [0.1, 0.05, 0.01].iter().map(|&b| nodoid_closure_height(1.0, b).unwrap()).collect();
    assert!(hs.windows(2).all(|w| w[1] < w[0]) && hs[2] < 1e-3, "{hs:?}");
}

#[test]
fn nodoid_area_bound() {
    for (a, b) in [(1.0, 1.0), (0.5, 0.2), (1.0, 0.3)] {
        let p = NodoidParams::new(a, b).unwrap();
        let area = evaluate_piece(&nodoid_piece(p).unwrap(), 0.0, &q()).unwrap().area;
        let (series, _) =
            integrate_1d(|x| ((p.c + a * x.cos()) / (p.c - a * x.cos()).powi(3)).sqrt(), FRAC_PI_2, PI, &q()).unwrap();
        let closed = 2.0 * PI * a * b * b * series;
        assert!((area / closed - 1.0).abs() < 1e-6, "{area} vs {closed}");
        assert!(area <= PI * PI * a * b * b / p.c);
    }
    assert!(area_bound_example() <= PI * PI / 2f64.sqrt());
    assert!((PI * PI / 2f64.sqrt() - 6.97886).abs() < 1e-5);
}

fn area_bound_example() -> f64 {
    evaluate_piece(&nodoid_piece(NodoidParams::new(1.0, 1.0).unwrap()).unwrap(), 0.0, &q()).unwrap().area
}

#[test]
fn nodoid_overflow_is_rejected() {
    assert!(matches!(NodoidParams::with_t_max(1.0, 1.0, 1000.0), Err(GeomError::Domain(_))));
}

#[test]
fn handled_sphere_total_mean_curvature() {
    let a = 0.01;
    let h = handled_sphere(a).unwrap();
    assert_eq!(h.n_bumps, bump_count(a));
    assert_eq!(h.n_bumps, 21);
    assert!((h.t_a - a * (1.0 / a.sqrt()).acosh()).abs() < 1e-15);
    let r = evaluate_functionals(&h.surface, 0.0, &q()).unwrap();
    let n = h.n_bumps as f64;
    assert!(r.total_mc > 8.0 * PI + 4.0 * PI * n * a.sqrt(), "{}", r.total_mc);
    assert!((r.area - 4.0 * PI).abs() < 20.0 * n * a);
    assert!(check_c11_gluing(&h.surface).unwrap().iter().all(|g| g.passes()));
    assert!(handled_sphere(2.0).is_err());
}

#[test]
fn snake_construction() {
    assert!(snake_surface(0.25).is_err() && snake_surface(0.09).is_err());
    for n in 2..=3 {
        let a = snake_a_for_side(n).unwrap();
        assert!((snake_cell_length(a) - 1.0 / n as f64).abs() < 1e-12);
        let s = snake_surface(a).unwrap();
        assert_eq!((s.info.side, s.info.n_cells), (n, n * n * n));
        assert!((s.info.bridge_radius - (a * (2.0 + a)).sqrt()).abs() < 1e-15);
        assert!(s.surface.validate_closed().is_ok());
        assert!(check_c11_gluing(&s.surface).unwrap().iter().all(|g| g.passes()));
        let r = evaluate_functionals(&s.surface, s.info.c0, &q()).unwrap();
        assert!((s.info.c0 + 2.0 / a.sqrt()).abs() < 1e-12);
        println!("snake n = {n}: deficit·√a = {:.4}", r.deficit_l1 * a.sqrt());
    }
    let s = snake_surface(0.04).unwrap();
    assert!(check_c11_gluing(&s.surface).unwrap().iter().all(|g| g.passes()));
}

#[test]
fn bridged_double_sphere_sweep() {
    let c0 = -2.0;
    let mut sff = Vec::new();
    for b in [0.2, 0.1, 0.05] {
        let s = bridged_double_sphere(c0, b).unwrap();
        let r = evaluate_functionals(&s.surface, c0, &q()).unwrap();
        let l = evaluate_functionals(&s.limit, c0, &q()).unwrap();
        assert!(check_c11_gluing(&s.surface).unwrap().iter().all(|g| g.passes()));
        assert!((s.info.h_b - s.info.h_closed_form).abs() < 1e-6);
        assert_eq!(s.info.genus + 1, s.info.n_bridges);
        sff.push(r.sff_l2);
        if b == 0.05 {
            let gap = r.helfrich - l.helfrich;
            assert!((gap / (-c0 * c0 * PI / 8.0) - 1.0).abs() < 0.05, "{gap}");
        }
    }
    assert!(sff.windows(2).all(|w| w[1] > w[0]));
    let hs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&b| bridged_double_sphere(c0, b).unwrap().info.h_b).collect();
    assert!(hs.windows(2).all(|w| w[1] < w[0]));
    assert!(bridged_double_sphere(1.0, 0.1).is_err());
    assert!(matches!(bridged_double_sphere(-2.0, 0.6), Err(GeomError::Infeasible(_))));
}

#[test]
fn bridged_immersed_sphere_bookkeeping() {
    for b in [0.1, 0.05] {
        let s = bridged_immersed_sphere(2.0, b).unwrap();
        assert!((s.info.genus as f64 * (2.0 * s.info.r_out).powi(2) - 1.0).abs() < 1e-12);
        let r = evaluate_functionals(&s.surface, 2.0, &q()).unwrap();
        let l = evaluate_functionals(&s.limit, 2.0, &q()).unwrap();
        assert!(r.helfrich < l.helfrich);
        assert!(check_c11_gluing(&s.surface).unwrap().iter().all(|g| g.passes()));
    }
    // The pancake without bridges tends to its limit.
    let l = evaluate_functionals(&bridged_immersed_sphere(2.0, 0.1).unwrap().limit, 2.0, &q()).unwrap().helfrich;
    let e: Vec<f64> = [0.1, 0.01, 0.001]
        .iter()
        .map(|&h| evaluate_functionals(&helfrich_core::constructions::pancake_sphere(h).unwrap(), 2.0, &q()).unwrap().helfrich)
        .collect();
    assert!(e.iter().map(|x| (x - l).abs()).collect::<Vec<_>>().windows(2).all(|w| w[1] < w[0]), "{e:?} → {l}");
    assert!(bridged_immersed_sphere(-2.0, 0.1).is_err());
}

#[test]
fn sphere_rejects_bad_radius() {
    assert!(sphere(-1.0, Vec3::zeros()).is_err());
    assert!(spherical_cap(1.0, 4.0).is_err());
}
