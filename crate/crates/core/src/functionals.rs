//! Area, volume, total mean curvature, Willmore and Helfrich energies, the L¹
//! curvature deficit, ∫|A|² and density ratios on composites and meshes.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::{mesh_vertex_curvature, TriMesh};
use crate::quadrature::{integrate_vec_sub, pairwise_sum, QuadSpec};
use crate::surface::{check_c11_gluing, AxisymPiece, CompositeSurface, Piece, PieceIntegrals};

pub use crate::diameter::{extrinsic_diameter, extrinsic_diameter_mesh, intrinsic_diameter};
pub use crate::kernels::{concentrated_volume, iso_kernel_integrals, KernelIntegrals};

/// Per-field error estimates of a [`FunctionalReport`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionalErrors {
    pub area: f64,
    pub volume: f64,
    pub total_mc: f64,
    pub willmore: f64,
    pub helfrich: f64,
    pub deficit_l1: f64,
    pub sff_l2: f64,
}

/// Every surface functional at one spontaneous curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub area: f64,
    pub volume: f64,
    pub total_mc: f64,
    pub willmore: f64,
    pub helfrich: f64,
    pub deficit_l1: f64,
    pub sff_l2: f64,
    pub c0: f64,
    pub err_est: FunctionalErrors,
}

impl FunctionalReport {
    fn from_integrals(v: PieceIntegrals, e: PieceIntegrals, c0: f64) -> Self {
        Self {
            area: v.area,
            volume: v.volume,
            total_mc: v.total_mc,
            willmore: v.willmore,
            helfrich: v.helfrich,
            deficit_l1: v.deficit_l1,
            sff_l2: v.sff_l2,
            c0,
            err_est: FunctionalErrors {
                area: e.area,
                volume: e.volume,
                total_mc: e.total_mc,
                willmore: e.willmore,
                helfrich: e.helfrich,
                deficit_l1: e.deficit_l1,
                sff_l2: e.sff_l2,
            },
        }
    }

    /// 𝒲 − (c₀/2)∫⟨H, n⟩ + (c₀²/4)𝒜, which must equal `helfrich`.
    pub fn expanded_helfrich(&self) -> f64 {
        self.willmore - 0.5 * self.c0 * self.total_mc + 0.25 * self.c0 * self.c0 * self.area
    }

    /// Error budget of the expansion identity.
    pub fn expansion_err(&self) -> f64 {
        let e = &self.err_est;
        e.helfrich + e.willmore + 0.5 * self.c0.abs() * e.total_mc + 0.25 * self.c0 * self.c0 * e.area
    }

    /// Helfrich energy at another spontaneous curvature from the expansion.
    pub fn helfrich_at(&self, c0: f64) -> f64 {
        self.willmore - 0.5 * c0 * self.total_mc + 0.25 * c0 * c0 * self.area
    }
}

/// A surface the functionals can be evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum SurfaceRef<'a> {
    Composite(&'a CompositeSurface),
    Mesh(&'a TriMesh),
}

impl<'a> From<&'a CompositeSurface> for SurfaceRef<'a> {
    fn from(s: &'a CompositeSurface) -> Self {
        SurfaceRef::Composite(s)
    }
}

impl<'a> From<&'a TriMesh> for SurfaceRef<'a> {
    fn from(m: &'a TriMesh) -> Self {
        SurfaceRef::Mesh(m)
    }
}

/// Evaluate all functionals of a closed oriented surface.
pub fn evaluate_functionals<'a>(s: impl Into<SurfaceRef<'a>>, c0: f64, q: &QuadSpec) -> Result<FunctionalReport> {
    match s.into() {
        SurfaceRef::Composite(c) => evaluate_composite(c, c0, q),
        SurfaceRef::Mesh(m) => evaluate_mesh(m, c0),
    }
}

fn sum_pieces(parts: &[(PieceIntegrals, PieceIntegrals)]) -> (PieceIntegrals, PieceIntegrals) {
    let cols = |f: &dyn Fn(&(PieceIntegrals, PieceIntegrals)) -> [f64; 7]| -> [f64; 7] {
        let rows: Vec<[f64; 7]> = parts.iter().map(f).collect();
        std::array::from_fn(|k| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
    };
    let v = cols(&|p| p.0.to_array());
    let e = cols(&|p| p.1.to_array().map(f64::abs));
    (PieceIntegrals::from_array(v), PieceIntegrals::from_array(e))
}

fn integrate_pieces(s: &CompositeSurface, c0: f64, q: &QuadSpec) -> Result<(PieceIntegrals, PieceIntegrals)> {
    let parts: Vec<(PieceIntegrals, PieceIntegrals)> = s
        .pieces
        .par_iter()
        .map(|p| p.integrals(c0, q))
        .collect::<Result<_>>()?;
    Ok(sum_pieces(&parts))
}

/// Functionals of a closed composite. Joints whose normals disagree make the
/// inner normal ill-defined and are rejected.
pub fn evaluate_composite(s: &CompositeSurface, c0: f64, q: &QuadSpec) -> Result<FunctionalReport> {
    q.validate()?;
    s.validate_closed()?;
    for g in check_c11_gluing(s)? {
        if !(g.normal_gap < 1e-6) {
            return Err(GeomError::Orientation(format!(
                "normals disagree by {:e} at joint {} of '{}'",
                g.normal_gap, g.joint, s.label
            )));
        }
    }
    let (v, e) = integrate_pieces(s, c0, q)?;
    Ok(FunctionalReport::from_integrals(v, e, c0))
}

/// Functionals of a possibly open composite; the volume entry is then the
/// flux −⅓∫⟨x, ν⟩ of the pieces rather than an enclosed volume.
pub fn evaluate_open(s: &CompositeSurface, c0: f64, q: &QuadSpec) -> Result<FunctionalReport> {
    q.validate()?;
    let (v, e) = integrate_pieces(s, c0, q)?;
    Ok(FunctionalReport::from_integrals(v, e, c0))
}

/// Functionals of one axisymmetric piece.
pub fn evaluate_piece(p: &AxisymPiece, c0: f64, q: &QuadSpec) -> Result<FunctionalReport> {
    q.validate()?;
    let (v, e) = p.integrals(c0, q)?;
    Ok(FunctionalReport::from_integrals(v, e, c0))
}

/// Functionals of a closed mesh from cotangent curvature vectors. The error
/// estimate is the value times the squared largest edge length.
pub fn evaluate_mesh(m: &TriMesh, c0: f64) -> Result<FunctionalReport> {
    if !m.is_closed() {
        return Err(GeomError::Domain("functionals need a closed mesh".into()));
    }
    let vc = mesh_vertex_curvature(m)?;
    let col = |f: &dyn Fn(&crate::mesh::VertexCurvature) -> f64| pairwise_sum(&vc.iter().map(f).collect::<Vec<_>>());
    let area = col(&|v| v.area_weight);
    let total_mc = col(&|v| v.h_vec.dot(&v.normal) * v.area_weight);
    let willmore = 0.25 * col(&|v| v.h_vec.norm_squared() * v.area_weight);
    let helfrich = 0.25 * col(&|v| (v.h_vec - c0 * v.normal).norm_squared() * v.area_weight);
    let deficit_l1 = col(&|v| (v.h_vec - c0 * v.normal).norm() * v.area_weight);
    let sff_l2 = col(&|v| v.h_vec.norm_squared() * v.area_weight - 2.0 * v.angle_defect);
    let volume = m.volume();
    let h2 = m.max_edge_length().powi(2);
    let e = |x: f64| x.abs() * h2;
    Ok(FunctionalReport {
        area,
        volume,
        total_mc,
        willmore,
        helfrich,
        deficit_l1,
        sff_l2,
        c0,
        err_est: FunctionalErrors {
            area: e(area),
            volume: e(volume),
            total_mc: e(total_mc),
            willmore: e(willmore),
            helfrich: e(helfrich),
            deficit_l1: e(deficit_l1),
            sff_l2: e(sff_l2),
        },
    })
}

/// μ(B̄_r(x₀))/(πr²) at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySample {
    pub center: [f64; 3],
    pub radius: f64,
    pub ratio: f64,
}

/// Area of an axisymmetric piece inside the closed ball B̄_r(x₀), azimuth
/// clipped exactly and meridian by adaptive quadrature.
fn piece_area_in_ball(p: &AxisymPiece, x0: &Vec3, r: f64, q: &QuadSpec) -> Result<f64> {
    let l = p.motion.apply_inverse(x0);
    let r0 = l.x.hypot(l.y);
    let prof = &p.profile;
    let f = |t: f64| -> [f64; 1] {
        let [rho, z] = prof.eval(t);
        let a = rho * rho + r0 * r0 + (z - l.z) * (z - l.z);
        let arc = if rho * r0 <= 1e-300 {
            if a <= r * r {
                2.0 * PI
            } else {
                0.0
            }
        } else {
            let c = (a - r * r) / (2.0 * rho * r0);
            2.0 * c.clamp(-1.0, 1.0).acos()
        };
        [arc * rho * prof.speed(t)]
    };
    let (v, _) = integrate_vec_sub(f, prof.t_min, prof.t_max, prof.axis_touch_start, prof.axis_touch_end, q)?;
    Ok(v[0])
}

fn composite_area_in_ball(s: &CompositeSurface, x0: &Vec3, r: f64, q: &QuadSpec) -> Result<f64> {
    let mut parts = Vec::new();
    for p in &s.pieces {
        match p {
            Piece::Axisym(a) => parts.push(piece_area_in_ball(a, x0, r, q)?),
            Piece::Perforated(pp) => {
                parts.push(piece_area_in_ball(&pp.base, x0, r, q)?);
                for h in &pp.holes {
                    parts.push(-piece_area_in_ball(&h.removed, x0, r, q)?);
                }
            }
        }
    }
    Ok(pairwise_sum(&parts).max(0.0))
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(GeomError::Domain("radii must be positive and sorted".into()));
    }
    Ok(())
}

/// Density ratios μ(B̄_r(x₀))/(πr²) of a composite (multiplicities add).
pub fn density_ratio(s: &CompositeSurface, x0: Vec3, radii: &[f64]) -> Result<Vec<DensitySample>> {
    check_radii(radii)?;
    let q = QuadSpec {
        rel_tol: 1e-9,
        abs_tol: 1e-13,
        max_depth: 60,
        ..QuadSpec::default()
    };
    radii
        .iter()
        .map(|&r| {
            let a = composite_area_in_ball(s, &x0, r, &q)?;
            Ok(DensitySample {
                center: [x0.x, x0.y, x0.z],
                radius: r,
                ratio: a / (PI * r * r),
            })
        })
        .collect()
}

/// Density ratios of a mesh with each triangle split into vertex thirds.
pub fn density_ratio_mesh(m: &TriMesh, x0: Vec3, radii: &[f64]) -> Result<Vec<DensitySample>> {
    check_radii(radii)?;
    Ok(radii
        .iter()
        .map(|&r| {
            let parts: Vec<f64> = (0..m.triangles.len())
                .map(|i| {
                    let t = m.triangles[i];
                    let a = m.triangle_area(i) / 3.0;
                    t.iter().filter(|&&v| (m.vertices[v] - x0).norm() <= r).count() as f64 * a
                })
                .collect();
            DensitySample {
                center: [x0.x, x0.y, x0.z],
                radius: r,
                ratio: pairwise_sum(&parts) / (PI * r * r),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::sphere;

    #[test]
    fn unit_sphere_values() {
        let s = CompositeSurface::single(sphere(1.0, Vec3::zeros()).unwrap());
        let r = evaluate_functionals(&s, -1.0, &QuadSpec::default()).unwrap();
        assert!((r.area - 4.0 * PI).abs() < 1e-12);
        assert!((r.volume - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((r.total_mc - 8.0 * PI).abs() < 1e-11);
        assert!((r.willmore - 4.0 * PI).abs() < 1e-11);
        assert!((r.helfrich - 9.0 * PI).abs() < 1e-11);
        assert!((r.sff_l2 - 8.0 * PI).abs() < 1e-11);
        assert!((r.helfrich - r.expanded_helfrich()).abs() < 1e-10);
    }

    #[test]
    fn density_of_sphere_point() {
        let s = CompositeSurface::single(sphere(1.0, Vec3::zeros()).unwrap());
        let d = density_ratio(&s, Vec3::new(0.0, 0.0, 1.0), &[0.1]).unwrap();
        assert!((d[0].ratio - 1.0).abs() < 1e-2);
        let d = density_ratio(&s, Vec3::new(0.0, 0.0, 2.0), &[0.5]).unwrap();
        assert_eq!(d[0].ratio, 0.0);
    }
}
