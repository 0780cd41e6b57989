//! Concentrated volume and the kernel integrals of the isoperimetric
//! inequality, estimated by randomized quasi-Monte Carlo along rays.
//!
//! For a point y, ∫_E |x − y|^{-2} dx = ∫_{S²} ∫ 1_E(y + rω) dr dω and
//! ∫_E |x − y|^{-1} dx = ∫_{S²} ∫ r·1_E(y + rω) dr dω, so both become
//! bounded integrands over directions and ray lengths.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::{Body, BodyBoundary, BodyKind};
use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::mesh_vertex_curvature;
use crate::qmc::{halton, shifts, QmcEstimate, REPLICATES};
use crate::quadrature::{gauss_rule, pairwise_sum};
use crate::surface::Piece;

/// Rays from `y` that can meet the bounding ball: a direction cone and a
/// range of ray lengths.
struct RayDomain {
    frame: [Vec3; 3],
    cos_max: f64,
    r_lo: f64,
    r_hi: f64,
}

impl RayDomain {
    fn new(b: &Body, y: &Vec3) -> Self {
        let d = b.bound_center - y;
        let dist = d.norm();
        let rb = b.bound_radius;
        let axis = if dist > 0.0 { d / dist } else { Vec3::z() };
        let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = axis.cross(&helper).normalize();
        let e2 = axis.cross(&e1);
        let (cos_max, r_lo) = if dist > rb {
            ((1.0 - (rb / dist).powi(2)).max(0.0).sqrt(), dist - rb)
        } else {
            (-1.0, 0.0)
        };
        Self {
            frame: [e1, e2, axis],
            cos_max,
            r_lo,
            r_hi: dist + rb,
        }
    }

    fn solid_angle(&self) -> f64 {
        2.0 * PI * (1.0 - self.cos_max)
    }

    fn point(&self, y: &Vec3, u: &[f64; 3]) -> (Vec3, f64) {
        let cz = 1.0 - u[0] * (1.0 - self.cos_max);
        let sz = (1.0 - cz * cz).max(0.0).sqrt();
        let phi = 2.0 * PI * u[1];
        let w = self.frame[0] * (sz * phi.cos()) + self.frame[1] * (sz * phi.sin()) + self.frame[2] * cz;
        let r = self.r_lo + (self.r_hi - self.r_lo) * u[2];
        (y + r * w, r)
    }
}

/// Means of 1_E and r·1_E along rays from `y`, scaled to ∫_E |x−y|^{-2} and
/// ∫_E |x−y|^{-1}, for one shifted point set.
fn ray_integrals(b: &Body, y: &Vec3, n: usize, shift: &[f64; 3], offset: u64) -> (f64, f64) {
    let dom = RayDomain::new(b, y);
    let mut hits = Vec::with_capacity(n);
    let mut weighted = Vec::with_capacity(n);
    for i in 0..n as u64 {
        let h = halton::<3>(i + offset);
        let u: [f64; 3] = std::array::from_fn(|k| (h[k] + shift[k]).fract());
        let (x, r) = dom.point(y, &u);
        let inside = b.contains(&x);
        hits.push(if inside { 1.0 } else { 0.0 });
        weighted.push(if inside { r } else { 0.0 });
    }
    let scale = dom.solid_angle() * (dom.r_hi - dom.r_lo) / n as f64;
    (scale * pairwise_sum(&hits), scale * pairwise_sum(&weighted))
}

/// 𝒱_c(E, x₀) = ∫_E |x − x₀|^{-2} dx with its randomized-QMC standard error.
pub fn concentrated_volume(b: &Body, x0: Vec3, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    if n_samples < 1000 {
        return Err(GeomError::Domain("concentrated_volume needs at least 1000 samples".into()));
    }
    let sh = shifts::<3>(seed, 1, REPLICATES);
    let reps: Vec<f64> = sh
        .par_iter()
        .map(|s| ray_integrals(b, &x0, n_samples, s, 0).0)
        .collect();
    let e = QmcEstimate::from_replicates(&reps);
    Ok((e.value, e.err))
}

/// Kernel integrals over E × Σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegrals {
    /// ∫_Σ ∫_E |x − y|^{-2} dx dμ(y).
    pub k1: f64,
    /// ∫_Σ |H − c₀n|(y) ∫_E |x − y|^{-1} dx dμ(y).
    pub k2: f64,
    pub k1_err: f64,
    pub k2_err: f64,
    pub c0: f64,
}

/// A boundary quadrature node: position, area weight and |H − c₀n|.
#[derive(Debug, Clone, Copy)]
struct Node {
    y: Vec3,
    w: f64,
    deficit: f64,
}

fn meridian_nodes(p: &crate::surface::AxisymPiece, c0: f64, panels: usize) -> Vec<Node> {
    let rule = gauss_rule(8);
    let prof = &p.profile;
    let h = (prof.t_max - prof.t_min) / panels as f64;
    let mut out = Vec::new();
    for k in 0..panels {
        let a = prof.t_min + h * k as f64;
        for (x, wq) in rule.nodes.iter().zip(&rule.weights) {
            let t = a + 0.5 * h * (x + 1.0);
            let [rho, _] = prof.eval(t);
            out.push(Node {
                y: p.point(t, 0.0),
                w: 0.5 * h * wq * 2.0 * PI * rho * prof.speed(t),
                deficit: (p.scalar_mean_curvature(t) - c0).abs(),
            });
        }
    }
    out
}

fn boundary_nodes(b: &Body, c0: f64) -> Result<Vec<Node>> {
    match (&b.kind, &b.boundary) {
        (BodyKind::Mesh, BodyBoundary::Mesh(m)) => {
            let vc = mesh_vertex_curvature(m)?;
            Ok(m.vertices
                .iter()
                .zip(&vc)
                .map(|(y, v)| Node {
                    y: *y,
                    w: v.area_weight,
                    deficit: (v.h_vec - c0 * v.normal).norm(),
                })
                .collect())
        }
        (_, BodyBoundary::Composite(s)) => {
            let mut out = Vec::new();
            for p in &s.pieces {
                match p {
                    Piece::Axisym(a) => out.extend(meridian_nodes(a, c0, 6)),
                    Piece::Perforated(_) => {
                        return Err(GeomError::Domain("kernel integrals need an unperforated solid".into()));
                    }
                }
            }
            Ok(out)
        }
        _ => Err(GeomError::Domain("body kind and boundary disagree".into())),
    }
}

/// k₁ and k₂ by boundary quadrature paired with ray QMC. For bodies of
/// revolution the boundary nodes lie on one meridian and carry the full
/// azimuthal weight. `n_samples` is the total number of rays per replicate.
pub fn iso_kernel_integrals(b: &Body, c0: f64, n_samples: usize, seed: u64) -> Result<KernelIntegrals> {
    let nodes = boundary_nodes(b, c0)?;
    let per = (n_samples / nodes.len()).max(256);
    let sh = shifts::<3>(seed, 2, REPLICATES);
    let reps: Vec<(f64, f64)> = sh
        .iter()
        .map(|s| {
            let vals: Vec<(f64, f64)> = nodes
                .par_iter()
                .enumerate()
                .map(|(i, nd)| {
                    let (v2, v1) = ray_integrals(b, &nd.y, per, s, (i as u64) * 7919);
                    (nd.w * v2, nd.w * nd.deficit * v1)
                })
                .collect();
            (
                pairwise_sum(&vals.iter().map(|v| v.0).collect::<Vec<_>>()),
                pairwise_sum(&vals.iter().map(|v| v.1).collect::<Vec<_>>()),
            )
        })
        .collect();
    let e1 = QmcEstimate::from_replicates(&reps.iter().map(|r| r.0).collect::<Vec<_>>());
    let e2 = QmcEstimate::from_replicates(&reps.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok(KernelIntegrals {
        k1: e1.value,
        k2: e2.value,
        k1_err: e1.err,
        k2_err: e2.err,
        c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_center_and_boundary() {
        let b = Body::ball(Vec3::zeros(), 1.0).unwrap();
        let (v, e) = concentrated_volume(&b, Vec3::zeros(), 20000, 3).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-2 && e < 1e-2, "{v} {e}");
        let (v, e) = concentrated_volume(&b, Vec3::new(0.0, 0.0, 1.0), 20000, 3).unwrap();
        assert!((v - 2.0 * PI).abs() < 5.0 * e + 1e-2, "{v} {e}");
    }
}
