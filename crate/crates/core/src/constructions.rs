//! Constructors for catenoid pieces, spherical caps, cut spheres, nodoid
//! pieces and the glued example surfaces built from them.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::geom::{RigidMotion, Vec3};
use crate::nodoid::{NodoidParams, NodoidTable};
use crate::profile::{Generator, ProfileCurve};
use crate::surface::{AxisymPiece, BoundaryId, CompositeSurface, Hole, PerforatedPiece, Piece};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(GeomError::Domain(format!("{name} must be positive and finite (got {x})")))
    }
}

fn circle_arc(center: [f64; 2], r: f64, phi0: f64, phi1: f64) -> Result<ProfileCurve> {
    ProfileCurve::new(
        Generator::Ellipse {
            center,
            semi_rho: r,
            semi_z: r,
        },
        phi0,
        phi1,
    )
}

fn segment(p0: [f64; 2], p1: [f64; 2]) -> Result<ProfileCurve> {
    ProfileCurve::new(Generator::Segment { p0, p1 }, 0.0, 1.0)
}

/// Round sphere of radius `r` about `center`, inner orientation.
pub fn sphere(r: f64, center: Vec3) -> Result<AxisymPiece> {
    positive("radius", r)?;
    let prof = circle_arc([0.0, 0.0], r, -FRAC_PI_2, FRAC_PI_2)?;
    Ok(AxisymPiece::new(prof, RigidMotion::translation(center), 1.0, "sphere")?.with_scalar_mc(2.0 / r))
}

/// Spheroid with equatorial semi-axis `a` and polar semi-axis `c`.
pub fn ellipsoid(a: f64, c: f64) -> Result<AxisymPiece> {
    positive("a", a)?;
    positive("c", c)?;
    let prof = ProfileCurve::new(
        Generator::Ellipse {
            center: [0.0, 0.0],
            semi_rho: a,
            semi_z: c,
        },
        -FRAC_PI_2,
        FRAC_PI_2,
    )?;
    AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "ellipsoid")
}

/// Torus of revolution with centre-line radius `big_r` and tube radius `r`.
pub fn torus(big_r: f64, r: f64) -> Result<CompositeSurface> {
    positive("R", big_r)?;
    positive("r", r)?;
    if r >= big_r {
        return Err(GeomError::Domain("torus needs r < R".into()));
    }
    let prof = circle_arc([big_r, 0.0], r, -PI, PI)?;
    let mut s = CompositeSurface::new("torus");
    let i = s.push(AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "torus")?);
    s.glue((i, BoundaryId::End), (i, BoundaryId::Start));
    Ok(s)
}

/// The catenoid graph ρ = a cosh(z/a) over z ∈ [0, t].
pub fn catenoid_piece(a: f64, t: f64) -> Result<AxisymPiece> {
    positive("a", a)?;
    positive("t", t)?;
    let prof = ProfileCurve::new(Generator::Catenary { a, z0: 0.0 }, 0.0, t)?;
    Ok(AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "catenoid")?.with_scalar_mc(0.0))
}

/// Cap {0 ≤ θ < θ₀} of the sphere of radius `r`, θ measured from the north pole.
pub fn spherical_cap(r: f64, theta0: f64) -> Result<AxisymPiece> {
    positive("r", r)?;
    if !(theta0 > 0.0 && theta0 <= PI) {
        return Err(GeomError::Domain(format!("theta0 must lie in (0, π] (got {theta0})")));
    }
    let prof = circle_arc([0.0, 0.0], r, FRAC_PI_2 - theta0, FRAC_PI_2)?;
    Ok(AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "spherical_cap")?.with_scalar_mc(2.0 / r))
}

/// A sphere with a cap removed so that it continues the catenoid piece of the
/// same (a, t) tangentially at z = t.
#[derive(Debug, Clone)]
pub struct CutSphere {
    pub piece: AxisymPiece,
    pub r: f64,
    pub h: f64,
    pub rho: f64,
    /// Height of the centre on the axis.
    pub p: f64,
}

pub fn cut_sphere(a: f64, t: f64) -> Result<CutSphere> {
    positive("a", a)?;
    positive("t", t)?;
    let u = t / a;
    let (ch, sh) = (u.cosh(), u.sinh());
    let r = a * ch * ch;
    let h = a * ch * (-u).exp();
    let rho = a * ch;
    let p = t + a * ch * sh;
    let phi_rim = (-u.tanh()).asin();
    let prof = circle_arc([0.0, p], r, phi_rim, FRAC_PI_2)?;
    let piece = AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "cut_sphere")?.with_scalar_mc(2.0 / r);
    Ok(CutSphere { piece, r, h, rho, p })
}

/// Catenoid piece with its cut sphere attached: an open surface whose only
/// boundary is the neck circle of radius a.
pub fn capped_catenoid(a: f64, t: f64) -> Result<CompositeSurface> {
    let cat = catenoid_piece(a, t)?;
    let cs = cut_sphere(a, t)?;
    let mut s = CompositeSurface::new("capped_catenoid");
    let i = s.push(cat);
    let j = s.push(cs.piece);
    s.glue((i, BoundaryId::End), (j, BoundaryId::Start));
    Ok(s)
}

/// Two cut spheres joined by the catenoid over z ∈ [−t, t]; a closed sphere.
pub fn dumbbell(a: f64, t: f64) -> Result<CompositeSurface> {
    let cs = cut_sphere(a, t)?;
    let cat = AxisymPiece::new(
        ProfileCurve::new(Generator::Catenary { a, z0: 0.0 }, -t, t)?,
        RigidMotion::identity(),
        1.0,
        "neck",
    )?
    .with_scalar_mc(0.0);
    let phi_rim = (-(t / a).tanh()).asin();
    let lower = AxisymPiece::new(
        circle_arc([0.0, -cs.p], cs.r, -FRAC_PI_2, -phi_rim)?,
        RigidMotion::identity(),
        1.0,
        "lower_sphere",
    )?
    .with_scalar_mc(2.0 / cs.r);
    let mut s = CompositeSurface::new("dumbbell");
    let lo = s.push(lower);
    let mid = s.push(cat);
    let hi = s.push(cs.piece);
    s.glue((lo, BoundaryId::End), (mid, BoundaryId::Start));
    s.glue((mid, BoundaryId::End), (hi, BoundaryId::Start));
    Ok(s)
}

/// The nodoid piece t ∈ [0, t_max] with the normal of the construction
/// (pointing towards the axis at the neck). With H the full trace,
/// ⟨H, ν⟩ = −1/a; the averaged mean curvature ½⟨H, ν⟩ is −1/(2a).
pub fn nodoid_piece(p: NodoidParams) -> Result<AxisymPiece> {
    let tab = NodoidTable::shared(p)?;
    let prof = ProfileCurve::new(Generator::Nodoid(tab), 0.0, p.t_max)?;
    Ok(AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "nodoid")?.with_scalar_mc(-1.0 / p.a))
}

/// The symmetric nodoid bridge t ∈ [−t_max, t_max]; `orientation` −1 flips the
/// normal so that ⟨H, ν⟩ = +1/a.
pub fn nodoid_bridge(p: NodoidParams, orientation: f64) -> Result<AxisymPiece> {
    let tab = NodoidTable::shared(p)?;
    let prof = ProfileCurve::new(Generator::Nodoid(tab), -p.t_max, p.t_max)?;
    Ok(AxisymPiece::new(prof, RigidMotion::identity(), orientation, "nodoid_bridge")?
        .with_scalar_mc(-orientation / p.a))
}

/// `n` points on the unit sphere along the Fibonacci spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

fn min_pairwise_distance(v: &[Vec3]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            m = m.min((v[i] - v[j]).norm());
        }
    }
    m
}

/// The unit sphere carrying N_a bumps, each a catenoid neck ending in a small
/// sphere of radius √a.
#[derive(Debug, Clone)]
pub struct HandledSphere {
    pub surface: CompositeSurface,
    pub a: f64,
    pub n_bumps: usize,
    pub t_a: f64,
    pub s_a: f64,
    pub centers: Vec<Vec3>,
}

/// Largest integer strictly smaller than a^{−2/3}.
pub fn bump_count(a: f64) -> usize {
    let x = a.powf(-2.0 / 3.0);
    let c = x.ceil();
    (c as i64 - 1).max(0) as usize
}

pub fn handled_sphere(a: f64) -> Result<HandledSphere> {
    positive("a", a)?;
    if a >= 1.0 {
        return Err(GeomError::Domain("handled_sphere needs a < 1".into()));
    }
    let n = bump_count(a);
    if n == 0 {
        return Err(GeomError::Infeasible(format!("a = {a} gives no bumps")));
    }
    let centers = fibonacci_sphere(n);
    if n > 1 && min_pairwise_distance(&centers) < 4.0 * a.sqrt() {
        return Err(GeomError::Infeasible(format!(
            "cannot place {n} disjoint balls of radius 2√a on the sphere for a = {a}"
        )));
    }
    let t_a = a * (1.0 / a.sqrt()).acosh();
    let s_a = a * a.powf(-0.25).acosh();
    let arm = |t: f64| a * (t / a).cosh() * (t / a).sinh();
    let p_t = t_a + arm(t_a);
    let p_s = s_a + arm(s_a);
    let r_small = a * (s_a / a).cosh().powi(2);
    let theta_h = a.sqrt().asin();

    let base = sphere(1.0, Vec3::zeros())?;
    let mut holes = Vec::with_capacity(n);
    let mut bumps = Vec::with_capacity(n);
    for (k, v) in centers.iter().enumerate() {
        let frame = RigidMotion::frame(*v, Vec3::zeros());
        let removed = AxisymPiece::new(
            circle_arc([0.0, 0.0], 1.0, FRAC_PI_2 - theta_h, FRAC_PI_2)?,
            frame,
            1.0,
            format!("cap_{k}"),
        )?;
        holes.push(Hole { removed });
        let neck = AxisymPiece::new(
            ProfileCurve::new(Generator::Catenary { a, z0: p_t }, -t_a, s_a)?,
            frame,
            1.0,
            format!("neck_{k}"),
        )?
        .with_scalar_mc(0.0);
        let sin_rim = (s_a - p_s) / r_small;
        let head = AxisymPiece::new(
            circle_arc([0.0, p_t + p_s], r_small, sin_rim.asin(), FRAC_PI_2)?,
            frame,
            1.0,
            format!("head_{k}"),
        )?
        .with_scalar_mc(2.0 / r_small);
        bumps.push((neck, head));
    }
    let mut s = CompositeSurface::new(format!("handled_sphere(a={a})"));
    let body = s.push(PerforatedPiece {
        base,
        holes,
        label: "unit_sphere".into(),
    });
    for (k, (neck, head)) in bumps.into_iter().enumerate() {
        let i = s.push(neck);
        let j = s.push(head);
        s.glue((body, BoundaryId::Hole(k)), (i, BoundaryId::Start));
        s.glue((i, BoundaryId::End), (j, BoundaryId::Start));
    }
    Ok(HandledSphere {
        surface: s,
        a,
        n_bumps: n,
        t_a,
        s_a,
        centers,
    })
}

/// `n` hexagonal-lattice centres in the unit disc, spaced as widely as
/// possible while discs of radius `r` stay inside radius 0.9.
pub fn hex_disc_centers(n: usize, r: f64) -> Result<Vec<[f64; 2]>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let place = |d: f64| -> Vec<[f64; 2]> {
        let m = (1.0 / d).ceil() as i64 + 2;
        let mut pts = Vec::new();
        for j in -m..=m {
            for i in -m..=m {
                let x = d * (i as f64 + 0.5 * j as f64);
                let y = d * (3f64.sqrt() / 2.0) * j as f64;
                if x.hypot(y) <= 1.0 {
                    pts.push([x, y]);
                }
            }
        }
        pts.sort_by(|p, q| {
            let (rp, rq) = (p[0].hypot(p[1]), q[0].hypot(q[1]));
            (rp - rq)
                .abs()
                .gt(&1e-12)
                .then(|| rp.total_cmp(&rq))
                .unwrap_or_else(|| p[1].atan2(p[0]).total_cmp(&q[1].atan2(q[0])))
        });
        pts.truncate(n);
        pts
    };
    let mut d = 2.0;
    while d > 2.0 * r {
        let pts = place(d);
        if pts.len() == n && pts.iter().all(|p| p[0].hypot(p[1]) + r <= 0.9) {
            if d < 2.1 * r {
                break;
            }
            return Ok(pts);
        }
        d *= 0.995;
    }
    Err(GeomError::Infeasible(format!(
        "cannot place {n} disjoint discs of radius {r} in the unit disc"
    )))
}

/// A bridged example together with its limit and bookkeeping values.
#[derive(Debug, Clone, Serialize)]
pub struct BridgeInfo {
    pub c0: f64,
    pub a: f64,
    pub b: f64,
    pub genus: usize,
    pub n_bridges: usize,
    /// Distance between the two bridged discs.
    pub h_b: f64,
    /// The closed-form height 2|a − c[E(a/c) − (b²/c²)K(a/c)]|.
    pub h_closed_form: f64,
    pub r_in: f64,
    pub r_out: f64,
    /// Radius of the removed discs, f(t_max).
    pub hole_radius: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone)]
pub struct BridgedSurface {
    pub surface: CompositeSurface,
    pub limit: CompositeSurface,
    pub info: BridgeInfo,
}

fn bridge_setup(a: f64, b: f64, n: usize) -> Result<(NodoidParams, f64, f64, Vec<[f64; 2]>)> {
    let p = NodoidParams::new(a, b)?;
    let tab = NodoidTable::new(p)?;
    let rho_h = tab.f(p.t_max);
    let h = 2.0 * tab.g(p.t_max);
    let centers = hex_disc_centers(n, b).map_err(|_| {
        GeomError::Infeasible(format!("b = {b} too large: {n} necks do not fit in the unit disc"))
    })?;
    Ok((p, rho_h, h, centers))
}

fn disc_hole(rho_h: f64, z: f64, toward_axis: bool, motion: RigidMotion, label: String) -> Result<Hole> {
    let prof = if toward_axis {
        segment([rho_h, z], [0.0, z])?
    } else {
        segment([0.0, z], [rho_h, z])?
    };
    Ok(Hole {
        removed: AxisymPiece::new(prof, motion, 1.0, label)?,
    })
}

/// Flat-bottomed puck below the plane z = 0 whose top face is the unit disc.
fn puck_pieces() -> Result<(AxisymPiece, AxisymPiece, AxisymPiece)> {
    let bottom = AxisymPiece::new(segment([0.0, -1.0], [1.0, -1.0])?, RigidMotion::identity(), 1.0, "bottom")?
        .with_scalar_mc(0.0);
    let rim = AxisymPiece::new(
        circle_arc([1.0, -0.5], 0.5, -FRAC_PI_2, FRAC_PI_2)?,
        RigidMotion::identity(),
        1.0,
        "rim",
    )?;
    let top = AxisymPiece::new(segment([1.0, 0.0], [0.0, 0.0])?, RigidMotion::identity(), 1.0, "top")?
        .with_scalar_mc(0.0);
    Ok((bottom, rim, top))
}

fn push_puck(s: &mut CompositeSurface, m: &RigidMotion, top_holes: Vec<Hole>, tag: &str) -> Result<usize> {
    let (bottom, rim, top) = puck_pieces()?;
    let i = s.push(bottom.transformed(m));
    let j = s.push(rim.transformed(m));
    let top = top.transformed(m);
    let k = if top_holes.is_empty() {
        s.push(top)
    } else {
        s.push(PerforatedPiece {
            base: top,
            holes: top_holes,
            label: format!("{tag}_disc"),
        })
    };
    s.glue((i, BoundaryId::End), (j, BoundaryId::Start));
    s.glue((j, BoundaryId::End), (k, BoundaryId::Start));
    Ok(k)
}

fn genus_count(b: f64) -> usize {
    (1.0 / (4.0 * b * b)).round() as usize
}

/// Nodoid parameter a whose bridges satisfy ⟨H, ν⟩ = c₀ with H the full trace.
pub fn bridge_nodoid_a(c0: f64) -> f64 {
    1.0 / c0.abs()
}

/// Two pucks S (below z = 0) and its mirror image above z = h_b, joined by
/// g_b + 1 nodoid bridges with ⟨H, ν⟩ = c₀ < 0.
pub fn bridged_double_sphere(c0: f64, b: f64) -> Result<BridgedSurface> {
    if !(c0 < 0.0) {
        return Err(GeomError::Domain("bridged_double_sphere needs c0 < 0".into()));
    }
    positive("b", b)?;
    let a = bridge_nodoid_a(c0);
    let n = genus_count(b);
    if n < 2 {
        return Err(GeomError::Infeasible(format!("b = {b} too large: genus g_b = {} < 1", n as i64 - 1)));
    }
    let (p, rho_h, h, centers) = bridge_setup(a, b, n)?;
    let flip = RigidMotion::rotation_axis_angle(Vec3::x(), PI);
    let upper = flip.then_translate(Vec3::new(0.0, 0.0, h));

    let mut s = CompositeSurface::new(format!("bridged_double_sphere(c0={c0}, b={b})"));
    let lower_holes = centers
        .iter()
        .enumerate()
        .map(|(k, c)| disc_hole(rho_h, 0.0, true, RigidMotion::translation(Vec3::new(c[0], c[1], 0.0)), format!("hole_lo_{k}")))
        .collect::<Result<Vec<_>>>()?;
    let upper_holes = centers
        .iter()
        .enumerate()
        .map(|(k, c)| {
            disc_hole(
                rho_h,
                0.0,
                true,
                RigidMotion::translation(Vec3::new(c[0], c[1], h)).compose(&flip),
                format!("hole_hi_{k}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = push_puck(&mut s, &RigidMotion::identity(), lower_holes, "lower")?;
    let hi = push_puck(&mut s, &upper, upper_holes, "upper")?;
    let bridge = nodoid_bridge(p, 1.0)?;
    for (k, c) in centers.iter().enumerate() {
        let mut piece = bridge.transformed(&RigidMotion::translation(Vec3::new(c[0], c[1], 0.5 * h)));
        piece.label = format!("bridge_{k}");
        let i = s.push(piece);
        s.glue((i, BoundaryId::Start), (lo, BoundaryId::Hole(k)));
        s.glue((i, BoundaryId::End), (hi, BoundaryId::Hole(k)));
    }

    let mut limit = CompositeSurface::new("double_sphere_limit");
    push_puck(&mut limit, &RigidMotion::identity(), Vec::new(), "lower")?;
    push_puck(&mut limit, &flip, Vec::new(), "upper")?;

    let info = BridgeInfo {
        c0,
        a,
        b,
        genus: n - 1,
        n_bridges: n,
        h_b: h,
        h_closed_form: crate::nodoid::nodoid_closure_height(a, b)?,
        r_in: p.c - a,
        r_out: b,
        hole_radius: rho_h,
        t_max: p.t_max,
    };
    Ok(BridgedSurface { surface: s, limit, info })
}

/// Radii of the arcs forming the loop Γ_h: the outgoing quarter arc, the
/// top half arc and the returning quarter arc (radius r − 2R).
pub const LOOP_R: f64 = 0.3;
pub const LOOP_TOP_R: f64 = 0.1;

/// Meridian pieces of Γ_h from (1, 0) heading outward to (1, h) heading
/// back to the axis: a quarter arc, a vertical segment of length h, a half
/// arc, a vertical segment and a clockwise quarter arc. Γ_0 touches itself
/// tangentially at (1, 0).
pub fn loop_pieces(h: f64) -> Result<Vec<AxisymPiece>> {
    let (r, big) = (LOOP_R, LOOP_TOP_R);
    let rd = r - 2.0 * big;
    let id = RigidMotion::identity();
    let mut out = vec![AxisymPiece::new(circle_arc([1.0, r], r, -FRAC_PI_2, 0.0)?, id, 1.0, "loop_out")?];
    if h > 0.0 {
        out.push(
            AxisymPiece::new(segment([1.0 + r, r], [1.0 + r, r + h])?, id, 1.0, "loop_lift")?
                .with_scalar_mc(1.0 / (1.0 + r)),
        );
    }
    out.push(
        AxisymPiece::new(circle_arc([1.0 + r - big, r + h], big, 0.0, PI)?, id, 1.0, "loop_top")?,
    );
    out.push(AxisymPiece::new(
        segment([1.0 + rd, r + h], [1.0 + rd, h + rd])?,
        id,
        1.0,
        "loop_down",
    )?);
    out.push(AxisymPiece::new(
        circle_arc([1.0, h + rd], rd, -FRAC_PI_2, 0.0)?.reversed(),
        id,
        1.0,
        "loop_in",
    )?);
    Ok(out)
}

fn pancake(h: f64, lower_holes: Vec<Hole>, upper_holes: Vec<Hole>, s: &mut CompositeSurface) -> Result<(usize, usize)> {
    let d = AxisymPiece::new(segment([0.0, 0.0], [1.0, 0.0])?, RigidMotion::identity(), 1.0, "disc")?
        .with_scalar_mc(0.0);
    let db = AxisymPiece::new(segment([1.0, h], [0.0, h])?, RigidMotion::identity(), 1.0, "disc_b")?
        .with_scalar_mc(0.0);
    let wrap = |base: AxisymPiece, holes: Vec<Hole>, label: &str| -> Piece {
        if holes.is_empty() {
            Piece::Axisym(base)
        } else {
            Piece::Perforated(PerforatedPiece {
                base,
                holes,
                label: label.into(),
            })
        }
    };
    let i = s.push(wrap(d, lower_holes, "disc"));
    let mut prev = i;
    for p in loop_pieces(h)? {
        let j = s.push(p);
        s.glue((prev, BoundaryId::End), (j, BoundaryId::Start));
        prev = j;
    }
    let k = s.push(wrap(db, upper_holes, "disc_b"));
    s.glue((prev, BoundaryId::End), (k, BoundaryId::Start));
    Ok((i, k))
}

/// The pancake sphere Γ_h ∪ D ∪ D_h with g_b holes in each disc joined by
/// outward-oriented nodoid bridges, ⟨H, ν⟩ = c₀ > 0 on the bridges.
pub fn bridged_immersed_sphere(c0: f64, b: f64) -> Result<BridgedSurface> {
    if !(c0 > 0.0) {
        return Err(GeomError::Domain("bridged_immersed_sphere needs c0 > 0".into()));
    }
    positive("b", b)?;
    let a = bridge_nodoid_a(c0);
    let n = genus_count(b);
    if n < 1 {
        return Err(GeomError::Infeasible(format!("b = {b} too large: genus 0")));
    }
    let (p, rho_h, h, centers) = bridge_setup(a, b, n)?;
    let lower_holes = centers
        .iter()
        .enumerate()
        .map(|(k, c)| disc_hole(rho_h, 0.0, false, RigidMotion::translation(Vec3::new(c[0], c[1], 0.0)), format!("hole_lo_{k}")))
        .collect::<Result<Vec<_>>>()?;
    let upper_holes = centers
        .iter()
        .enumerate()
        .map(|(k, c)| disc_hole(rho_h, h, true, RigidMotion::translation(Vec3::new(c[0], c[1], 0.0)), format!("hole_hi_{k}")))
        .collect::<Result<Vec<_>>>()?;
    let mut s = CompositeSurface::new(format!("bridged_immersed_sphere(c0={c0}, b={b})"));
    let (lo, hi) = pancake(h, lower_holes, upper_holes, &mut s)?;
    let bridge = nodoid_bridge(p, -1.0)?;
    for (k, c) in centers.iter().enumerate() {
        let mut piece = bridge.transformed(&RigidMotion::translation(Vec3::new(c[0], c[1], 0.5 * h)));
        piece.label = format!("bridge_{k}");
        let i = s.push(piece);
        s.glue((i, BoundaryId::Start), (lo, BoundaryId::Hole(k)));
        s.glue((i, BoundaryId::End), (hi, BoundaryId::Hole(k)));
    }
    let mut limit = CompositeSurface::new("immersed_sphere_limit");
    pancake(0.0, Vec::new(), Vec::new(), &mut limit)?;
    let info = BridgeInfo {
        c0,
        a,
        b,
        genus: n,
        n_bridges: n,
        h_b: h,
        h_closed_form: crate::nodoid::nodoid_closure_height(a, b)?,
        r_in: p.c - a,
        r_out: b,
        hole_radius: rho_h,
        t_max: p.t_max,
    };
    Ok(BridgedSurface { surface: s, limit, info })
}

/// The pancake S_h = Γ_h ∪ D ∪ D_h without bridges.
pub fn pancake_sphere(h: f64) -> Result<CompositeSurface> {
    if !(h >= 0.0) {
        return Err(GeomError::Domain("pancake height must be nonnegative".into()));
    }
    let mut s = CompositeSurface::new(format!("pancake(h={h})"));
    pancake(h, Vec::new(), Vec::new(), &mut s)?;
    Ok(s)
}

/// Cell edge l_a = 2(t_a + a·cosh(t_a/a)·sinh(t_a/a)) with t_a = a·arcosh(a^{−1/4}),
/// the length of a sphere of radius √a with a catenoid piece on either side.
pub fn snake_cell_length(a: f64) -> f64 {
    let t = a * a.powf(-0.25).acosh();
    2.0 * (t + a * (t / a).cosh() * (t / a).sinh())
}

/// The a for which exactly `n` cells fit along the unit edge, l_a = 1/n.
pub fn snake_a_for_side(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(GeomError::Domain("a snake needs at least 2 cells per side".into()));
    }
    let target = 1.0 / n as f64;
    let (mut lo, mut hi) = (1e-8, 0.25);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if snake_cell_length(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct SnakeInfo {
    pub a: f64,
    pub c0: f64,
    pub side: usize,
    pub n_cells: usize,
    pub cell_length: f64,
    pub t_a: f64,
    pub r_a: f64,
    /// Outer radius R_a = √(a(2 + a)) of the nodoid joining the snake to the container.
    pub bridge_radius: f64,
    /// Height of the snake's bottom face above the container floor z = −1.
    pub bridge_height: f64,
}

#[derive(Debug, Clone)]
pub struct SnakeSurface {
    pub surface: CompositeSurface,
    pub container: CompositeSurface,
    pub info: SnakeInfo,
}

const CONTAINER_FLOOR: f64 = 2.9;
const CONTAINER_RIM: f64 = 0.5;
const CONTAINER_TOP: f64 = 2.0;

/// Cells of an n×n×n block in snake order: serpentine within each layer,
/// top layer first, each layer starting below the end of the previous one.
fn snake_order(n: usize) -> Vec<[usize; 3]> {
    let layer: Vec<[usize; 2]> = (0..n)
        .flat_map(|j| (0..n).map(move |i| if j % 2 == 0 { [i, j] } else { [n - 1 - i, j] }))
        .collect();
    let mut out = Vec::with_capacity(n * n * n);
    for l in 0..n {
        let k = n - 1 - l;
        if l % 2 == 0 {
            out.extend(layer.iter().map(|c| [c[0], c[1], k]));
        } else {
            out.extend(layer.iter().rev().map(|c| [c[0], c[1], k]));
        }
    }
    out
}

/// The container: a flat floor at z = −1 with a hole of radius `rho_h`, a
/// rounded rim, a vertical wall and a hemispherical dome, enclosing (−1, 2)³.
fn container_pieces(rho_h: f64, m: &RigidMotion) -> Result<Vec<AxisymPiece>> {
    let wall = CONTAINER_FLOOR + CONTAINER_RIM;
    let z_rim = -1.0 + CONTAINER_RIM;
    Ok(vec![
        AxisymPiece::new(segment([rho_h, -1.0], [CONTAINER_FLOOR, -1.0])?, *m, 1.0, "floor")?.with_scalar_mc(0.0),
        AxisymPiece::new(
            circle_arc([CONTAINER_FLOOR, z_rim], CONTAINER_RIM, -FRAC_PI_2, 0.0)?,
            *m,
            1.0,
            "floor_rim",
        )?,
        AxisymPiece::new(segment([wall, z_rim], [wall, CONTAINER_TOP])?, *m, 1.0, "wall")?.with_scalar_mc(1.0 / wall),
        AxisymPiece::new(circle_arc([0.0, CONTAINER_TOP], wall, 0.0, FRAC_PI_2)?, *m, 1.0, "dome")?
            .with_scalar_mc(2.0 / wall),
    ])
}

/// A winding chain of n³ spheres of radius √a joined by catenoid necks,
/// filling the cube [0, n·l_a]² × [z₀, z₀ + n·l_a] with n = round(1/l_a), and
/// attached by a nodoid bridge to the floor of a container. With ν pointing
/// out of the snake every sphere has ⟨H, ν⟩ = −2/√a = c₀.
pub fn snake_surface(a: f64) -> Result<SnakeSurface> {
    positive("a", a)?;
    if a > 0.25 {
        return Err(GeomError::Domain(format!("snake_surface needs a ≤ 0.25 (got {a})")));
    }
    let l = snake_cell_length(a);
    let n = (1.0 / l).round() as usize;
    if n < 2 {
        return Err(GeomError::Infeasible(format!(
            "a = {a}: 1/l_a = {:.3} rounds to {n} cells per side, need at least 2",
            1.0 / l
        )));
    }
    let t_a = a * a.powf(-0.25).acosh();
    let r = a.sqrt();
    let phi_r = (t_a / a).tanh().asin();
    let big_r = (a * (2.0 + a)).sqrt();
    let bridge = NodoidParams::new(1.0, big_r)?;
    let tab = NodoidTable::shared(bridge)?;
    let rho_h = tab.f(bridge.t_max);
    let g_t = tab.g(bridge.t_max);
    let z0 = -1.0 + g_t;
    if z0 + n as f64 * l >= CONTAINER_TOP {
        return Err(GeomError::Infeasible(format!("a = {a}: the snake does not fit in the container")));
    }

    let order = snake_order(n);
    let center = |c: [usize; 3]| {
        Vec3::new(
            (c[0] as f64 + 0.5) * l,
            (c[1] as f64 + 0.5) * l,
            z0 + (c[2] as f64 + 0.5) * l,
        )
    };
    let dir = |from: [usize; 3], to: [usize; 3]| {
        Vec3::new(
            to[0] as f64 - from[0] as f64,
            to[1] as f64 - from[1] as f64,
            to[2] as f64 - from[2] as f64,
        )
    };
    let cap = |e: Vec3, c: Vec3, label: String| -> Result<Hole> {
        Ok(Hole {
            removed: AxisymPiece::new(circle_arc([0.0, 0.0], r, phi_r, FRAC_PI_2)?, RigidMotion::frame(e, c), -1.0, label)?,
        })
    };
    let neck = |e: Vec3, c: Vec3, label: String| -> Result<AxisymPiece> {
        Ok(AxisymPiece::new(
            ProfileCurve::new(Generator::Catenary { a, z0: 0.5 * l }, -t_a, 0.0)?,
            RigidMotion::frame(e, c),
            -1.0,
            label,
        )?
        .with_scalar_mc(0.0))
    };

    let mut s = CompositeSurface::new(format!("snake(a={a})"));
    let mut prev_exit: Option<usize> = None;
    let mut last_exit = 0;
    let mut bridge_axis = Vec3::zeros();
    for (k, &cell) in order.iter().enumerate() {
        let c = center(cell);
        let e_out = if k + 1 < order.len() { dir(cell, order[k + 1]) } else { -Vec3::z() };
        let e_in = (k > 0).then(|| dir(cell, order[k - 1]));
        let mut dirs = vec![e_out];
        dirs.extend(e_in);
        let holes = dirs
            .iter()
            .enumerate()
            .map(|(h, &e)| cap(e, c, format!("cell_{k}_cap_{h}")))
            .collect::<Result<Vec<_>>>()?;
        let base = AxisymPiece::new(
            circle_arc([0.0, 0.0], r, -FRAC_PI_2, FRAC_PI_2)?,
            RigidMotion::frame(e_out, c),
            -1.0,
            format!("cell_{k}"),
        )?
        .with_scalar_mc(-2.0 / r);
        let body = s.push(PerforatedPiece {
            base,
            holes,
            label: format!("cell_{k}"),
        });
        let out = s.push(neck(e_out, c, format!("cell_{k}_out"))?);
        s.glue((body, BoundaryId::Hole(0)), (out, BoundaryId::Start));
        if let Some(e) = e_in {
            let inn = s.push(neck(e, c, format!("cell_{k}_in"))?);
            s.glue((body, BoundaryId::Hole(1)), (inn, BoundaryId::Start));
            if let Some(p) = prev_exit {
                s.glue((p, BoundaryId::End), (inn, BoundaryId::End));
            }
        }
        prev_exit = Some(out);
        last_exit = out;
        bridge_axis = Vec3::new(c.x, c.y, z0);
    }

    let flip = RigidMotion::rotation_axis_angle(Vec3::x(), PI).then_translate(bridge_axis);
    let prof = ProfileCurve::new(Generator::Nodoid(tab), 0.0, bridge.t_max)?;
    let nod = s.push(AxisymPiece::new(prof, flip, -1.0, "bridge")?.with_scalar_mc(1.0 / bridge.a));
    s.glue((last_exit, BoundaryId::End), (nod, BoundaryId::Start));

    let base = RigidMotion::translation(Vec3::new(bridge_axis.x, bridge_axis.y, 0.0));
    let mut container = CompositeSurface::new(format!("snake_container(a={a})"));
    let mut prev = (nod, BoundaryId::End);
    for p in container_pieces(rho_h, &base)? {
        container.push(p.clone());
        let i = s.push(p);
        s.glue(prev, (i, BoundaryId::Start));
        prev = (i, BoundaryId::End);
    }
    for k in 1..container.pieces.len() {
        container.glue((k - 1, BoundaryId::End), (k, BoundaryId::Start));
    }

    Ok(SnakeSurface {
        surface: s,
        container,
        info: SnakeInfo {
            a,
            c0: -2.0 / r,
            side: n,
            n_cells: order.len(),
            cell_length: l,
            t_a,
            r_a: r,
            bridge_radius: big_r,
            bridge_height: g_t,
        },
    })
}
