//! The region E enclosed by an embedded surface.

use std::f64::consts::PI;

use crate::constructions::sphere;
use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::{arclength_samples, TriMesh};
use crate::qmc::halton;
use crate::surface::{CompositeSurface, Piece};

/// Meridian polyline of a solid of revolution about the z-axis, indexed by
/// z-buckets for crossing-number containment tests.
#[derive(Debug, Clone)]
pub struct Meridian {
    pub segments: Vec<[[f64; 2]; 2]>,
    z_lo: f64,
    dz: f64,
    buckets: Vec<Vec<usize>>,
}

impl Meridian {
    fn new(segments: Vec<[[f64; 2]; 2]>) -> Self {
        let z_lo = segments.iter().map(|s| s[0][1].min(s[1][1])).fold(f64::INFINITY, f64::min);
        let z_hi = segments.iter().map(|s| s[0][1].max(s[1][1])).fold(f64::NEG_INFINITY, f64::max);
        let nb = 256;
        let dz = ((z_hi - z_lo) / nb as f64).max(1e-300);
        let mut buckets = vec![Vec::new(); nb];
        for (i, s) in segments.iter().enumerate() {
            let lo = s[0][1].min(s[1][1]);
            let hi = s[0][1].max(s[1][1]);
            let b0 = (((lo - z_lo) / dz).floor() as usize).min(nb - 1);
            let b1 = (((hi - z_lo) / dz).floor() as usize).min(nb - 1);
            for b in buckets.iter_mut().take(b1 + 1).skip(b0) {
                b.push(i);
            }
        }
        Self {
            segments,
            z_lo,
            dz,
            buckets,
        }
    }

    /// Crossing-number test in the (ρ, z) half-plane.
    pub fn contains(&self, rho: f64, z: f64) -> bool {
        let b = (z - self.z_lo) / self.dz;
        if b < 0.0 || b >= self.buckets.len() as f64 {
            return false;
        }
        let mut inside = false;
        for &i in &self.buckets[b as usize] {
            let [p, q] = self.segments[i];
            if (p[1] > z) != (q[1] > z) {
                let x = p[0] + (z - p[1]) * (q[0] - p[0]) / (q[1] - p[1]);
                if x > rho {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

#[derive(Debug, Clone)]
pub enum BodyKind {
    Ball { center: Vec3, radius: f64 },
    Axisym(Meridian),
    Mesh,
}

#[derive(Debug, Clone)]
pub enum BodyBoundary {
    Composite(CompositeSurface),
    Mesh(TriMesh),
}

/// The enclosed region E together with its boundary surface.
#[derive(Debug, Clone)]
pub struct Body {
    pub kind: BodyKind,
    pub boundary: BodyBoundary,
    /// Center and radius of a ball containing E.
    pub bound_center: Vec3,
    pub bound_radius: f64,
}

fn bounding_ball(points: &[Vec3]) -> (Vec3, f64) {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let c = 0.5 * (lo + hi);
    let r = points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    (c, r * (1.0 + 1e-9) + 1e-12)
}

impl Body {
    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        let s = CompositeSurface::single(sphere(radius, center)?);
        Ok(Self {
            kind: BodyKind::Ball { center, radius },
            boundary: BodyBoundary::Composite(s),
            bound_center: center,
            bound_radius: radius * (1.0 + 1e-9),
        })
    }

    /// Solid of revolution bounded by a closed composite whose pieces all
    /// revolve about the world z-axis.
    pub fn from_composite(s: &CompositeSurface) -> Result<Self> {
        s.validate_closed()?;
        let mut segs = Vec::new();
        let mut pts = Vec::new();
        for p in &s.pieces {
            let c = match p {
                Piece::Axisym(a) => a,
                Piece::Perforated(_) => {
                    return Err(GeomError::Domain("perforated pieces do not bound a solid of revolution".into()));
                }
            };
            let axis = c.motion.apply_vector(&Vec3::z());
            let o = c.motion.apply(&Vec3::zeros());
            if (axis - Vec3::z()).norm() > 1e-12 || o.x.hypot(o.y) > 1e-12 {
                return Err(GeomError::Domain(format!("piece '{}' is not coaxial with the z-axis", c.label)));
            }
            let ts = arclength_samples(c, 512);
            let mer: Vec<[f64; 2]> = ts
                .iter()
                .map(|&t| {
                    let x = c.point(t, 0.0);
                    [x.x.hypot(x.y), x.z]
                })
                .collect();
            for w in mer.windows(2) {
                segs.push([w[0], w[1]]);
            }
            for m in &mer {
                pts.push(Vec3::new(m[0], 0.0, m[1]));
                pts.push(Vec3::new(-m[0], 0.0, m[1]));
                pts.push(Vec3::new(0.0, m[0], m[1]));
                pts.push(Vec3::new(0.0, -m[0], m[1]));
            }
        }
        let (bc, br) = bounding_ball(&pts);
        Ok(Self {
            kind: BodyKind::Axisym(Meridian::new(segs)),
            boundary: BodyBoundary::Composite(s.clone()),
            bound_center: bc,
            bound_radius: br * 1.01,
        })
    }

    pub fn from_mesh(m: &TriMesh) -> Result<Self> {
        if !m.is_closed() {
            return Err(GeomError::Domain("a body needs a closed mesh".into()));
        }
        let (bc, br) = bounding_ball(&m.vertices);
        Ok(Self {
            kind: BodyKind::Mesh,
            boundary: BodyBoundary::Mesh(m.clone()),
            bound_center: bc,
            bound_radius: br,
        })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match (&self.kind, &self.boundary) {
            (BodyKind::Ball { center, radius }, _) => (x - center).norm_squared() <= radius * radius,
            (BodyKind::Axisym(m), _) => m.contains(x.x.hypot(x.y), x.z),
            (BodyKind::Mesh, BodyBoundary::Mesh(m)) => winding_number(m, x) > 0.5,
            (BodyKind::Mesh, BodyBoundary::Composite(_)) => false,
        }
    }

    /// `n` quasi-random points of E with their common volume weight, drawn
    /// from the bounding cube; `seed` picks the Halton offset.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<(Vec3, f64)> {
        let r = self.bound_radius;
        let lo = self.bound_center - Vec3::repeat(r);
        let w = (2.0 * r).powi(3) / n as f64;
        (0..n as u64)
            .filter_map(|i| {
                let h = halton::<3>(i + seed);
                let x = lo + 2.0 * r * Vec3::new(h[0], h[1], h[2]);
                self.contains(&x).then_some((x, w))
            })
            .collect()
    }
}

/// Generalized winding number of a closed mesh about `x`.
pub fn winding_number(m: &TriMesh, x: &Vec3) -> f64 {
    let mut total = 0.0;
    for t in &m.triangles {
        let a = m.vertices[t[0]] - x;
        let b = m.vertices[t[1]] - x;
        let c = m.vertices[t[2]] - x;
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let num = a.dot(&b.cross(&c));
        let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        total += 2.0 * num.atan2(den);
    }
    total / (4.0 * PI)
}
