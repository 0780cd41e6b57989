//! Axisymmetric surface pieces, perforated pieces and glued composites.

use std::f64::consts::PI;

use crate::error::{GeomError, Result};
use crate::geom::{RigidMotion, Vec3};
use crate::profile::ProfileCurve;
use crate::quadrature::{integrate_vec_sub, QuadSpec};

/// Number of integrated quantities per piece, see [`PieceIntegrals`].
pub(crate) const NQ: usize = 7;

/// A surface of revolution: the profile revolved about the local z-axis,
/// then placed by `motion`. `orientation` multiplies the left profile normal
/// to give the inner normal ν of the composite the piece belongs to.
#[derive(Debug, Clone)]
pub struct AxisymPiece {
    pub profile: ProfileCurve,
    pub motion: RigidMotion,
    pub orientation: f64,
    pub scalar_mc: Option<f64>,
    pub label: String,
}

/// Integrals of one piece at a fixed spontaneous curvature.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PieceIntegrals {
    pub area: f64,
    pub volume: f64,
    pub total_mc: f64,
    pub willmore: f64,
    pub helfrich: f64,
    pub deficit_l1: f64,
    pub sff_l2: f64,
}

impl PieceIntegrals {
    pub(crate) fn from_array(v: [f64; NQ]) -> Self {
        Self {
            area: v[0],
            volume: v[1],
            total_mc: v[2],
            willmore: v[3],
            helfrich: v[4],
            deficit_l1: v[5],
            sff_l2: v[6],
        }
    }

    pub(crate) fn to_array(self) -> [f64; NQ] {
        [
            self.area,
            self.volume,
            self.total_mc,
            self.willmore,
            self.helfrich,
            self.deficit_l1,
            self.sff_l2,
        ]
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] - b[k]))
    }

    pub fn abs_add(&self, o: &Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k].abs() + b[k].abs()))
    }
}

impl AxisymPiece {
    pub fn new(profile: ProfileCurve, motion: RigidMotion, orientation: f64, label: impl Into<String>) -> Result<Self> {
        if orientation != 1.0 && orientation != -1.0 {
            return Err(GeomError::Domain("orientation must be ±1".into()));
        }
        profile.check_regular(256)?;
        Ok(Self {
            profile,
            motion,
            orientation,
            scalar_mc: None,
            label: label.into(),
        })
    }

    pub fn with_scalar_mc(mut self, h: f64) -> Self {
        self.scalar_mc = Some(h);
        self
    }

    pub fn local_point(&self, t: f64, theta: f64) -> Vec3 {
        let [r, z] = self.profile.eval(t);
        Vec3::new(r * theta.cos(), r * theta.sin(), z)
    }

    pub fn point(&self, t: f64, theta: f64) -> Vec3 {
        self.motion.apply(&self.local_point(t, theta))
    }

    /// Inner unit normal ν at (t, θ).
    pub fn normal(&self, t: f64, theta: f64) -> Vec3 {
        let [nr, nz] = self.profile.normal(t);
        let o = self.orientation;
        self.motion
            .apply_vector(&Vec3::new(o * nr * theta.cos(), o * nr * theta.sin(), o * nz))
    }

    /// Unit meridian tangent in the direction of increasing t.
    pub fn tangent(&self, t: f64, theta: f64) -> Vec3 {
        let [tr, tz] = self.profile.unit_tangent(t);
        self.motion
            .apply_vector(&Vec3::new(tr * theta.cos(), tr * theta.sin(), tz))
    }

    /// Scalar mean curvature ⟨H, ν⟩.
    pub fn scalar_mean_curvature(&self, t: f64) -> f64 {
        self.orientation * self.profile.mean_curvature(t)
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        let mut p = self.clone();
        p.motion = m.compose(&self.motion);
        p
    }

    /// All functionals of the piece by adaptive meridian quadrature; the azimuth
    /// is integrated exactly.
    pub fn integrals(&self, c0: f64, q: &QuadSpec) -> Result<(PieceIntegrals, PieceIntegrals)> {
        let p = &self.profile;
        let o = self.orientation;
        let shift = -self.motion.apply_inverse(&Vec3::zeros()).z;
        let f = |t: f64| -> [f64; NQ] {
            let [r, z] = p.eval(t);
            let s = p.speed(t);
            let [nr, nz] = p.normal(t);
            let (k1, k2) = p.curvatures(t);
            let h = k1 + k2;
            let mc = o * h;
            let da = 2.0 * PI * r * s;
            let dev = mc - c0;
            [
                da,
                -(o * (r * nr + (z + shift) * nz)) * da / 3.0,
                mc * da,
                0.25 * h * h * da,
                0.25 * dev * dev * da,
                dev.abs() * da,
                (k1 * k1 + k2 * k2) * da,
            ]
        };
        let (v, e) = integrate_vec_sub(f, p.t_min, p.t_max, p.axis_touch_start, p.axis_touch_end, q)?;
        Ok((PieceIntegrals::from_array(v), PieceIntegrals::from_array(e)))
    }

    /// Largest deviation of ⟨H, ν⟩ from `scalar_mc` on `samples` meridian points.
    pub fn scalar_mc_defect(&self, samples: usize) -> Option<f64> {
        let h0 = self.scalar_mc?;
        let p = &self.profile;
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let t = p.t_min + (p.t_max - p.t_min) * (i as f64 + 0.5) / samples as f64;
            worst = worst.max((self.scalar_mean_curvature(t) - h0).abs());
        }
        Some(worst)
    }
}

/// A hole cut from the base of a [`PerforatedPiece`]. `removed` is the part of
/// the base surface inside the hole, with the base orientation; its non-axis
/// end is the rim circle.
#[derive(Debug, Clone)]
pub struct Hole {
    pub removed: AxisymPiece,
}

impl Hole {
    /// Whether a point of the base surface lies strictly inside the removed patch.
    pub fn contains(&self, x: &Vec3) -> bool {
        let p = &self.removed.profile;
        let l = self.removed.motion.apply_inverse(x);
        let rim_t = match self.rim_end() {
            End::Start => p.t_min,
            End::End => p.t_max,
        };
        let rim = p.eval(rim_t)[0];
        if l.x.hypot(l.y) >= rim * (1.0 - 1e-9) {
            return false;
        }
        let (mut zlo, mut zhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=16 {
            let z = p.eval(p.t_min + (p.t_max - p.t_min) * k as f64 / 16.0)[1];
            zlo = zlo.min(z);
            zhi = zhi.max(z);
        }
        let tol = 1e-9 * p.scale();
        l.z >= zlo - tol && l.z <= zhi + tol
    }

    pub(crate) fn rim_end(&self) -> End {
        if self.removed.profile.axis_touch_start {
            End::End
        } else {
            End::Start
        }
    }
}

/// An axisymmetric base surface with disjoint axisymmetric patches removed.
#[derive(Debug, Clone)]
pub struct PerforatedPiece {
    pub base: AxisymPiece,
    pub holes: Vec<Hole>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub enum Piece {
    Axisym(AxisymPiece),
    Perforated(PerforatedPiece),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryId {
    Start,
    End,
    Hole(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint {
    pub a: (usize, BoundaryId),
    pub b: (usize, BoundaryId),
}

/// A boundary circle resolved to the axisymmetric piece that carries it.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCircle<'a> {
    pub carrier: &'a AxisymPiece,
    pub end: End,
    /// Holes see the removed piece from outside, so the conormal flips.
    pub flip: bool,
}

impl BoundaryCircle<'_> {
    pub fn t(&self) -> f64 {
        match self.end {
            End::Start => self.carrier.profile.t_min,
            End::End => self.carrier.profile.t_max,
        }
    }

    pub fn point(&self, theta: f64) -> Vec3 {
        self.carrier.point(self.t(), theta)
    }

    /// Outward unit conormal of the owning piece.
    pub fn conormal(&self, theta: f64) -> Vec3 {
        let tan = self.carrier.tangent(self.t(), theta);
        let s = match self.end {
            End::Start => -1.0,
            End::End => 1.0,
        };
        if self.flip {
            -s * tan
        } else {
            s * tan
        }
    }

    pub fn normal(&self, theta: f64) -> Vec3 {
        self.carrier.normal(self.t(), theta)
    }

    pub fn radius(&self) -> f64 {
        self.carrier.profile.eval(self.t())[0]
    }

    /// Local azimuth of the carrier for a world point near the circle.
    pub fn theta_of(&self, x: &Vec3) -> f64 {
        let l = self.carrier.motion.apply_inverse(x);
        l.y.atan2(l.x)
    }

    pub fn center(&self) -> Vec3 {
        let z = self.carrier.profile.eval(self.t())[1];
        self.carrier.motion.apply(&Vec3::new(0.0, 0.0, z))
    }

    pub fn axis(&self) -> Vec3 {
        self.carrier.motion.apply_vector(&Vec3::z())
    }
}

impl Piece {
    pub fn label(&self) -> &str {
        match self {
            Piece::Axisym(p) => &p.label,
            Piece::Perforated(p) => &p.label,
        }
    }

    pub fn integrals(&self, c0: f64, q: &QuadSpec) -> Result<(PieceIntegrals, PieceIntegrals)> {
        match self {
            Piece::Axisym(p) => p.integrals(c0, q),
            Piece::Perforated(p) => {
                let (mut v, mut e) = p.base.integrals(c0, q)?;
                for h in &p.holes {
                    let (hv, he) = h.removed.integrals(c0, q)?;
                    v = v.sub(&hv);
                    e = e.abs_add(&he);
                }
                Ok((v, e))
            }
        }
    }

    pub fn boundary(&self, id: BoundaryId) -> Option<BoundaryCircle<'_>> {
        match (self, id) {
            (Piece::Axisym(p), BoundaryId::Start) if !p.profile.axis_touch_start => Some(BoundaryCircle {
                carrier: p,
                end: End::Start,
                flip: false,
            }),
            (Piece::Axisym(p), BoundaryId::End) if !p.profile.axis_touch_end => Some(BoundaryCircle {
                carrier: p,
                end: End::End,
                flip: false,
            }),
            (Piece::Perforated(p), BoundaryId::Start) if !p.base.profile.axis_touch_start => Some(BoundaryCircle {
                carrier: &p.base,
                end: End::Start,
                flip: false,
            }),
            (Piece::Perforated(p), BoundaryId::End) if !p.base.profile.axis_touch_end => Some(BoundaryCircle {
                carrier: &p.base,
                end: End::End,
                flip: false,
            }),
            (Piece::Perforated(p), BoundaryId::Hole(k)) => p.holes.get(k).map(|h| BoundaryCircle {
                carrier: &h.removed,
                end: h.rim_end(),
                flip: true,
            }),
            _ => None,
        }
    }

    /// Every free boundary of the piece.
    pub fn boundaries(&self) -> Vec<BoundaryId> {
        let mut out = Vec::new();
        for id in [BoundaryId::Start, BoundaryId::End] {
            if self.boundary(id).is_some() {
                out.push(id);
            }
        }
        if let Piece::Perforated(p) = self {
            out.extend((0..p.holes.len()).map(BoundaryId::Hole));
        }
        out
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        match self {
            Piece::Axisym(p) => Piece::Axisym(p.transformed(m)),
            Piece::Perforated(p) => Piece::Perforated(PerforatedPiece {
                base: p.base.transformed(m),
                holes: p
                    .holes
                    .iter()
                    .map(|h| Hole {
                        removed: h.removed.transformed(m),
                    })
                    .collect(),
                label: p.label.clone(),
            }),
        }
    }

    /// The underlying axisymmetric piece (the base for perforated pieces).
    pub fn carrier(&self) -> &AxisymPiece {
        match self {
            Piece::Axisym(p) => p,
            Piece::Perforated(p) => &p.base,
        }
    }
}

/// Pieces glued along boundary circles.
#[derive(Debug, Clone, Default)]
pub struct CompositeSurface {
    pub pieces: Vec<Piece>,
    pub joints: Vec<Joint>,
    pub label: String,
}

/// Gaps measured at one joint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointGap {
    pub joint: usize,
    pub position_gap: f64,
    pub tangent_gap: f64,
    pub normal_gap: f64,
}

impl JointGap {
    pub fn passes(&self) -> bool {
        self.position_gap < 1e-9 && self.tangent_gap < 1e-6 && self.normal_gap < 1e-6
    }
}

impl CompositeSurface {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            pieces: Vec::new(),
            joints: Vec::new(),
            label: label.into(),
        }
    }

    pub fn single(piece: AxisymPiece) -> Self {
        let label = piece.label.clone();
        Self {
            pieces: vec![Piece::Axisym(piece)],
            joints: Vec::new(),
            label,
        }
    }

    pub fn push(&mut self, p: impl Into<Piece>) -> usize {
        self.pieces.push(p.into());
        self.pieces.len() - 1
    }

    pub fn glue(&mut self, a: (usize, BoundaryId), b: (usize, BoundaryId)) {
        self.joints.push(Joint { a, b });
    }

    /// Append another composite, shifting its piece indices.
    pub fn extend(&mut self, other: CompositeSurface) -> usize {
        let off = self.pieces.len();
        self.pieces.extend(other.pieces);
        self.joints.extend(other.joints.into_iter().map(|j| Joint {
            a: (j.a.0 + off, j.a.1),
            b: (j.b.0 + off, j.b.1),
        }));
        off
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| p.transformed(m)).collect(),
            joints: self.joints.clone(),
            label: self.label.clone(),
        }
    }

    /// Free boundaries that appear in no joint, and those in more than one.
    pub fn unmatched_boundaries(&self) -> (Vec<(usize, BoundaryId)>, Vec<(usize, BoundaryId)>) {
        let mut missing = Vec::new();
        let mut repeated = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            for id in p.boundaries() {
                let n = self
                    .joints
                    .iter()
                    .filter(|j| j.a == (i, id) || j.b == (i, id))
                    .count();
                match n {
                    0 => missing.push((i, id)),
                    1 => {}
                    _ => repeated.push((i, id)),
                }
            }
        }
        (missing, repeated)
    }

    pub fn is_closed(&self) -> bool {
        let (m, r) = self.unmatched_boundaries();
        m.is_empty() && r.is_empty()
    }

    pub fn validate_closed(&self) -> Result<()> {
        let (m, r) = self.unmatched_boundaries();
        if !m.is_empty() || !r.is_empty() {
            return Err(GeomError::Domain(format!(
                "composite '{}' is not closed: unglued {:?}, multiply glued {:?}",
                self.label, m, r
            )));
        }
        Ok(())
    }

    pub fn circle(&self, id: (usize, BoundaryId)) -> Result<BoundaryCircle<'_>> {
        self.pieces
            .get(id.0)
            .and_then(|p| p.boundary(id.1))
            .ok_or_else(|| GeomError::Domain(format!("no boundary {:?} on piece {}", id.1, id.0)))
    }

    /// All axisymmetric carriers (bases and removed patches are not included separately).
    pub fn carriers(&self) -> impl Iterator<Item = &AxisymPiece> {
        self.pieces.iter().map(|p| p.carrier())
    }
}

impl From<AxisymPiece> for Piece {
    fn from(p: AxisymPiece) -> Self {
        Piece::Axisym(p)
    }
}

impl From<PerforatedPiece> for Piece {
    fn from(p: PerforatedPiece) -> Self {
        Piece::Perforated(p)
    }
}

/// Position, tangent and normal gaps at every joint of `s`.
pub fn check_c11_gluing(s: &CompositeSurface) -> Result<Vec<JointGap>> {
    let n = 64;
    let mut out = Vec::with_capacity(s.joints.len());
    for (ji, j) in s.joints.iter().enumerate() {
        let ca = s.circle(j.a)?;
        let cb = s.circle(j.b)?;
        let mut gap = JointGap {
            joint: ji,
            position_gap: 0.0,
            tangent_gap: 0.0,
            normal_gap: 0.0,
        };
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64;
            let x = ca.point(th);
            let thb = cb.theta_of(&x);
            let y = cb.point(thb);
            gap.position_gap = gap.position_gap.max((x - y).norm());
            let tg = (ca.conormal(th) + cb.conormal(thb)).norm();
            gap.tangent_gap = gap.tangent_gap.max(tg);
            gap.normal_gap = gap.normal_gap.max((ca.normal(th) - cb.normal(thb)).norm());
        }
        out.push(gap);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Generator;

    fn hemisphere(upper: bool) -> AxisymPiece {
        let (a, b) = if upper { (0.0, PI / 2.0) } else { (-PI / 2.0, 0.0) };
        let prof = ProfileCurve::new(
            Generator::Ellipse {
                center: [0.0, 0.0],
                semi_rho: 1.0,
                semi_z: 1.0,
            },
            a,
            b,
        )
        .unwrap();
        AxisymPiece::new(prof, RigidMotion::identity(), 1.0, "hemi").unwrap()
    }

    #[test]
    fn two_hemispheres_glue() {
        let mut s = CompositeSurface::new("sphere");
        let lo = s.push(hemisphere(false));
        let hi = s.push(hemisphere(true));
        s.glue((lo, BoundaryId::End), (hi, BoundaryId::Start));
        assert!(s.is_closed());
        let gaps = check_c11_gluing(&s).unwrap();
        assert!(gaps[0].passes(), "{:?}", gaps[0]);
    }

    #[test]
    fn offset_is_detected() {
        let mut s = CompositeSurface::new("offset");
        let lo = s.push(hemisphere(false));
        let hi = s.push(hemisphere(true).transformed(&RigidMotion::translation(Vec3::new(0.0, 0.0, 1e-3))));
        s.glue((lo, BoundaryId::End), (hi, BoundaryId::Start));
        let g = check_c11_gluing(&s).unwrap()[0];
        assert!((g.position_gap - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn area_independent_of_placement() {
        let q = QuadSpec::default();
        let h = hemisphere(true);
        let base = h.integrals(0.0, &q).unwrap().0;
        let moved = h
            .transformed(&RigidMotion::translation(Vec3::new(0.0, 0.0, 3.0)))
            .integrals(0.0, &q)
            .unwrap()
            .0;
        assert!((base.area - moved.area).abs() < 1e-12);
        assert!((base.area - 2.0 * PI).abs() < 1e-12);
    }
}
