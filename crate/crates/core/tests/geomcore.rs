use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use helfrich_core::constructions::{catenoid_piece, ellipsoid, nodoid_piece, sphere, spherical_cap, torus};
use helfrich_core::functionals::evaluate_functionals;
use helfrich_core::mesh::{mesh_vertex_curvature, revolve_to_mesh, TriMesh};
use helfrich_core::mesh_io::{emit_mesh, parse_mesh, MeshFormat};
use helfrich_core::nodoid::NodoidParams;
use helfrich_core::compmesh::mesh_composite;
use helfrich_core::{integrate_1d, GeomError, QuadSpec, RigidMotion, Vec3};

fn q() -> QuadSpec {
    QuadSpec::default()
}

#[test]
fn integrate_examples() {
    let (v, e) = integrate_1d(|x| x * x, 0.0, 1.0, &q()).unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-12 && e >= 0.0);
    let (v, _) = integrate_1d(f64::sin, 0.0, PI, &q()).unwrap();
    assert!((v - 2.0).abs() < 1e-12);
    let (v, _) = integrate_1d(|x| x.cosh().powi(2), 0.0, 1.0, &q()).unwrap();
    assert_relative_eq!(v, 2f64.sinh() / 4.0 + 0.5, max_relative = 1e-12);
    assert!((v - 1.40672).abs() < 1e-5);
}

#[test]
fn integrate_reports_bad_interval() {
    assert!(integrate_1d(|x| x, 1.0, 0.0, &q()).is_err());
}

proptest! {
    #[test]
    fn polynomials_up_to_rule_degree_are_exact(coeffs in prop::collection::vec(-3.0f64..3.0, 1..20), b in 0.1f64..4.0) {
        // Degree ≤ 2·nodes_per_panel − 1 = 19.
        let p = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let exact: f64 = coeffs.iter().enumerate().map(|(k, c)| c * b.powi(k as i32 + 1) / (k as f64 + 1.0)).sum();
        let scale: f64 = coeffs.iter().enumerate().map(|(k, c)| (c * b.powi(k as i32 + 1) / (k as f64 + 1.0)).abs()).sum();
        let (v, _) = integrate_1d(p, 0.0, b, &q()).unwrap();
        prop_assert!((v - exact).abs() <= 1e-13 * scale.max(1.0));
    }
}

#[test]
fn revolved_sphere_and_catenoid_areas() {
    let s = revolve_to_mesh(&sphere(1.0, Vec3::zeros()).unwrap(), 64, 128).unwrap();
    assert!((s.area() / (4.0 * PI) - 1.0).abs() < 1e-3);
    let c = revolve_to_mesh(&catenoid_piece(1.0, 1.0).unwrap(), 64, 128).unwrap();
    let exact = PI * (2f64.sinh() / 2.0 + 1.0);
    assert!((c.area() / exact - 1.0).abs() < 1e-3);
}

#[test]
fn polar_fans_have_no_degenerate_triangles() {
    let cap = revolve_to_mesh(&spherical_cap(1.0, PI / 3.0).unwrap(), 16, 32).unwrap();
    let min = (0..cap.triangles.len()).map(|i| cap.triangle_area(i)).fold(f64::INFINITY, f64::min);
    assert!(min > 1e-6);
    let s = revolve_to_mesh(&sphere(1.0, Vec3::zeros()).unwrap(), 16, 32).unwrap();
    assert!(s.is_closed());
    assert_eq!(s.euler_char, 2);
}

#[test]
fn revolve_rejects_too_few_samples() {
    let p = sphere(1.0, Vec3::zeros()).unwrap();
    assert!(revolve_to_mesh(&p, 1, 16).is_err());
    assert!(revolve_to_mesh(&p, 8, 2).is_err());
}

fn observed_order(ns: &[usize], errs: &[f64]) -> f64 {
    let k = errs.len() - 1;
    (errs[k - 1] / errs[k]).ln() / (ns[k] as f64 / ns[k - 1] as f64).ln()
}

#[test]
fn mesh_area_converges_at_second_order() {
    let ns = [16, 32, 64, 128];
    for piece in [ellipsoid(1.5, 0.7).unwrap(), catenoid_piece(1.0, 1.0).unwrap()] {
        let exact = helfrich_core::functionals::evaluate_piece(&piece, 0.0, &q()).unwrap().area;
        let errs: Vec<f64> = ns
            .iter()
            .map(|&n| (revolve_to_mesh(&piece, n, 2 * n).unwrap().area() - exact).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(observed_order(&ns, &errs) >= 1.9, "{errs:?}");
    }
}

#[test]
fn sphere_mean_curvature_vectors() {
    let m = revolve_to_mesh(&sphere(1.0, Vec3::zeros()).unwrap(), 64, 128).unwrap();
    let vc = mesh_vertex_curvature(&m).unwrap();
    let total: f64 = vc.iter().map(|v| v.area_weight).sum();
    assert_relative_eq!(total, m.area(), max_relative = 1e-12);
    let mean: f64 = vc.iter().map(|v| v.h_vec.norm() * v.area_weight).sum::<f64>() / total;
    assert!((mean - 2.0).abs() < 0.02);
    for (v, x) in vc.iter().zip(&m.vertices) {
        assert!(v.normal.dot(x) < -0.99, "inner normal points to the centre");
    }
}

#[test]
fn flat_disc_is_minimal() {
    let n = 24;
    let mut verts = vec![Vec3::zeros()];
    for ring in 1..=4 {
        for k in 0..n {
            let th = 2.0 * PI * (k as f64 + 0.5 * ring as f64) / n as f64;
            let r = ring as f64 * 0.25;
            verts.push(Vec3::new(r * th.cos(), r * th.sin(), 0.0));
        }
    }
    let idx = |ring: usize, k: usize| if ring == 0 { 0 } else { 1 + (ring - 1) * n + k % n };
    let mut tris = Vec::new();
    for k in 0..n {
        tris.push([0, idx(1, k), idx(1, k + 1)]);
    }
    for ring in 1..4 {
        for k in 0..n {
            tris.push([idx(ring, k), idx(ring + 1, k), idx(ring + 1, k + 1)]);
            tris.push([idx(ring, k), idx(ring + 1, k + 1), idx(ring, k + 1)]);
        }
    }
    let m = TriMesh::new_open(verts, tris).unwrap();
    assert!(!m.is_closed());
    for v in mesh_vertex_curvature(&m).unwrap().iter().filter(|v| !v.boundary) {
        assert!(v.h_vec.norm() < 1e-10);
    }
}

#[test]
fn nodoid_mesh_mean_curvature() {
    let p = NodoidParams::new(1.0, 1.0).unwrap();
    let piece = nodoid_piece(NodoidParams::with_t_max(1.0, 1.0, 1.5).unwrap()).unwrap();
    let m = revolve_to_mesh(&piece, 96, 192).unwrap();
    let vc = mesh_vertex_curvature(&m).unwrap();
    let interior: Vec<_> = vc.iter().filter(|v| !v.boundary).collect();
    let w: f64 = interior.iter().map(|v| v.area_weight).sum();
    let trace = interior.iter().map(|v| v.h_vec.dot(&v.normal) * v.area_weight).sum::<f64>() / w;
    // Averaged convention −1/(2a); the trace is twice that.
    assert!((0.5 * trace + 0.5 / p.a).abs() < 5e-3, "averaged {}", 0.5 * trace);
    assert!((trace + 1.0 / p.a).abs() < 1e-2);
}

#[test]
fn rigid_motion_examples() {
    let s = revolve_to_mesh(&sphere(1.0, Vec3::zeros()).unwrap(), 32, 64).unwrap();
    let t = s.transformed(&RigidMotion::translation(Vec3::new(5.0, 0.0, 0.0)));
    let (a, b) = (evaluate_functionals(&s, 0.0, &q()).unwrap(), evaluate_functionals(&t, 0.0, &q()).unwrap());
    assert!((a.area - b.area).abs() < 1e-12 && (a.volume - b.volume).abs() < 1e-12);
    assert!((a.willmore - b.willmore).abs() < 1e-12);

    let piece = nodoid_piece(NodoidParams::new(1.0, 1.0).unwrap()).unwrap();
    let rot = piece.transformed(&RigidMotion::rotation_axis_angle(Vec3::x(), PI / 2.0));
    assert!(rot.scalar_mc_defect(200).unwrap() < 1e-6);

    let m1 = RigidMotion::rotation_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7).then_translate(Vec3::new(1.0, -1.0, 2.0));
    let m2 = RigidMotion::rotation_axis_angle(Vec3::z(), -1.1);
    let x = Vec3::new(0.3, -0.4, 2.0);
    assert!((m1.compose(&m2).apply(&x) - m1.apply(&m2.apply(&x))).norm() < 1e-12);
}

fn motion() -> impl Strategy<Value = RigidMotion> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..6.3, prop::array::uniform3(-10.0f64..10.0)).prop_filter_map(
        "axis",
        |(x, y, z, ang, t)| {
            let axis = Vec3::new(x, y, z);
            (axis.norm() > 1e-3).then(|| RigidMotion::rotation_axis_angle(axis, ang).then_translate(Vec3::from(t)))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functionals_are_euclidean_invariant(m in motion(), c0 in -2.0f64..2.0) {
        let mesh = revolve_to_mesh(&ellipsoid(1.2, 0.6).unwrap(), 12, 24).unwrap();
        let a = evaluate_functionals(&mesh, c0, &q()).unwrap();
        let b = evaluate_functionals(&mesh.transformed(&m), c0, &q()).unwrap();
        for (x, y) in [(a.area, b.area), (a.volume, b.volume), (a.total_mc, b.total_mc), (a.willmore, b.willmore),
                       (a.helfrich, b.helfrich), (a.deficit_l1, b.deficit_l1), (a.sff_l2, b.sff_l2)] {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
        let t = torus(2.0, 0.5).unwrap();
        let ta = evaluate_functionals(&t, c0, &q()).unwrap();
        let tb = evaluate_functionals(&t.transformed(&m), c0, &q()).unwrap();
        prop_assert!((ta.helfrich - tb.helfrich).abs() <= 1e-10 * ta.helfrich.abs().max(1.0));
        prop_assert!((ta.volume - tb.volume).abs() <= 1e-10 * ta.volume.abs().max(1.0));
    }

    #[test]
    fn motions_compose_as_a_group(a in motion(), b in motion(), x in prop::array::uniform3(-5.0f64..5.0)) {
        let x = Vec3::from(x);
        prop_assert!((a.compose(&b).apply(&x) - a.apply(&b.apply(&x))).norm() < 1e-12 * (1.0 + x.norm() + 20.0));
        prop_assert!((a.inverse().apply(&a.apply(&x)) - x).norm() < 1e-11);
    }

    #[test]
    fn mesh_files_round_trip(n_mer in 3usize..12, n_az in 3usize..16, m in motion(), obj in any::<bool>()) {
        let mesh = revolve_to_mesh(&sphere(1.0, Vec3::zeros()).unwrap(), n_mer, n_az).unwrap().transformed(&m);
        let fmt = if obj { MeshFormat::Obj } else { MeshFormat::Off };
        let back = parse_mesh(&emit_mesh(&mesh, fmt), fmt).unwrap();
        prop_assert_eq!(&back.triangles, &mesh.triangles);
        for (u, v) in back.vertices.iter().zip(&mesh.vertices) {
            prop_assert!((u - v).norm() < 1e-9);
        }
    }

    #[test]
    fn angle_defects_sum_to_euler_characteristic(n_mer in 3usize..20, n_az in 3usize..24, kind in 0usize..3) {
        let mesh = match kind {
            0 => revolve_to_mesh(&sphere(1.3, Vec3::zeros()).unwrap(), n_mer, n_az).unwrap(),
            1 => revolve_to_mesh(&ellipsoid(0.5, 2.0).unwrap(), n_mer, n_az).unwrap(),
            _ => mesh_composite(&torus(2.0, 0.7).unwrap(), n_az.max(8), 0.3).unwrap(),
        };
        prop_assert!((mesh.total_angle_defect() - 2.0 * PI * mesh.euler_char as f64).abs() < 1e-9);
    }
}

const OCTAHEDRON: &str = "OFF\n6 8 0\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

#[test]
fn mesh_topology_examples() {
    let oct = parse_mesh(OCTAHEDRON.as_bytes(), MeshFormat::Off).unwrap();
    assert_eq!((oct.vertices.len(), oct.triangles.len(), oct.euler_char), (6, 8, 2));
    let tor = mesh_composite(&torus(2.0, 0.5).unwrap(), 48, 0.1).unwrap();
    assert_eq!(tor.euler_char, 0);
    let tor2 = parse_mesh(&emit_mesh(&tor, MeshFormat::Obj), MeshFormat::Obj).unwrap();
    assert_eq!(tor2.euler_char, 0);
}

#[test]
fn mesh_validation_errors_are_distinct() {
    let fan = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
    assert!(matches!(parse_mesh(fan.as_bytes(), MeshFormat::Off), Err(GeomError::NonManifoldEdge(..))));
    let flipped = OCTAHEDRON.replace("3 0 2 4\n", "3 2 0 4\n");
    assert!(matches!(
        parse_mesh(flipped.as_bytes(), MeshFormat::Off),
        Err(GeomError::InconsistentOrientation(..))
    ));
    assert!(matches!(parse_mesh(b"OFF\n3 1 0\n0 0\n", MeshFormat::Off), Err(GeomError::Parse { .. })));
}
