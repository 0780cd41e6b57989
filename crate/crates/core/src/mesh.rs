//! Oriented triangle meshes with discrete curvature.
//!
//! Triangles are wound so that the right-hand normal points out of the
//! enclosed region; the inner normal is its negative. The mean curvature
//! vector is the cotangent Laplacian of the position with barycentric vertex
//! areas, so a sphere of radius r gives |H| → 2/r pointing inward.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{GeomError, Result};
use crate::geom::{RigidMotion, Vec3};
use crate::quadrature::pairwise_sum;
use crate::surface::AxisymPiece;

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub euler_char: i64,
}

/// Per-vertex curvature data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCurvature {
    pub h_vec: Vec3,
    /// Inner unit normal.
    pub normal: Vec3,
    pub area_weight: f64,
    /// Angle defect 2π − Σ incident angles (zero on boundary vertices).
    pub angle_defect: f64,
    pub boundary: bool,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Directed uses of every undirected edge.
fn edge_uses(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), Vec<(usize, usize)>> {
    let mut m: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::with_capacity(triangles.len() * 3 / 2);
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            m.entry(edge_key(a, b)).or_default().push((a, b));
        }
    }
    m
}

impl TriMesh {
    /// A closed, oriented, edge-manifold mesh.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, false)
    }

    /// Like [`TriMesh::new`] but boundary edges are allowed.
    pub fn new_open(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, true)
    }

    fn build(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>, allow_open: bool) -> Result<Self> {
        let nv = vertices.len();
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeomError::Parse {
                    line: i,
                    msg: format!("invalid triangle {t:?}"),
                });
            }
        }
        let uses = edge_uses(&triangles);
        let mut keys: Vec<_> = uses.keys().copied().collect();
        keys.sort_unstable();
        for k in &keys {
            let u = &uses[k];
            match u.len() {
                1 if allow_open => {}
                1 => return Err(GeomError::OpenMesh(k.0, k.1)),
                2 => {
                    if u[0] == u[1] {
                        return Err(GeomError::InconsistentOrientation(k.0, k.1));
                    }
                }
                _ => return Err(GeomError::NonManifoldEdge(k.0, k.1)),
            }
        }
        let euler_char = nv as i64 - uses.len() as i64 + triangles.len() as i64;
        Ok(Self {
            vertices,
            triangles,
            euler_char,
        })
    }

    pub fn n_edges(&self) -> usize {
        edge_uses(&self.triangles).len()
    }

    pub fn is_closed(&self) -> bool {
        edge_uses(&self.triangles).values().all(|u| u.len() == 2)
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangles[i];
        0.5 * (self.vertices[b] - self.vertices[a])
            .cross(&(self.vertices[c] - self.vertices[a]))
            .norm()
    }

    pub fn area(&self) -> f64 {
        let a: Vec<f64> = (0..self.triangles.len()).map(|i| self.triangle_area(i)).collect();
        pairwise_sum(&a)
    }

    /// Signed enclosed volume (positive for outward winding).
    pub fn volume(&self) -> f64 {
        let v: Vec<f64> = self
            .triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .collect();
        pairwise_sum(&v)
    }

    pub fn transformed(&self, m: &RigidMotion) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| m.apply(v)).collect(),
            triangles: self.triangles.clone(),
            euler_char: self.euler_char,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v * s).collect(),
            triangles: self.triangles.clone(),
            euler_char: self.euler_char,
        }
    }

    /// Vertex-to-vertex adjacency with edge lengths, sorted by neighbour index.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let d = (self.vertices[a] - self.vertices[b]).norm();
                adj[a].push((b, d));
                adj[b].push((a, d));
            }
        }
        for l in adj.iter_mut() {
            l.sort_by(|x, y| x.0.cmp(&y.0));
            l.dedup_by(|x, y| x.0 == y.0);
        }
        adj
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                m = m.max((self.vertices[t[k]] - self.vertices[t[(k + 1) % 3]]).norm());
            }
        }
        m
    }

    /// Σ (2π − Σ incident angles) over interior vertices.
    pub fn total_angle_defect(&self) -> f64 {
        let mut angle_sum = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let ang = triangle_angles(&self.vertices, t);
            for k in 0..3 {
                angle_sum[t[k]] += ang[k];
            }
        }
        let d: Vec<f64> = angle_sum.iter().map(|s| 2.0 * PI - s).collect();
        pairwise_sum(&d)
    }
}

fn triangle_angles(v: &[Vec3], t: &[usize; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let p = v[t[k]];
        let e1 = v[t[(k + 1) % 3]] - p;
        let e2 = v[t[(k + 2) % 3]] - p;
        out[k] = e1.cross(&e2).norm().atan2(e1.dot(&e2));
    }
    out
}

/// Cotangent mean curvature vectors, inner normals and barycentric areas.
pub fn mesh_vertex_curvature(m: &TriMesh) -> Result<Vec<VertexCurvature>> {
    let n = m.vertices.len();
    let v = &m.vertices;
    let mut lap = vec![Vec3::zeros(); n];
    let mut area = vec![0.0; n];
    let mut nrm = vec![Vec3::zeros(); n];
    let mut angle_sum = vec![0.0; n];
    for (i, t) in m.triangles.iter().enumerate() {
        let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
        let cr = (b - a).cross(&(c - a));
        let ar = 0.5 * cr.norm();
        if !(ar >= 1e-14) {
            return Err(GeomError::DegenerateTriangle { index: i, area: ar });
        }
        for k in 0..3 {
            let (i0, i1, i2) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let e1 = v[i1] - v[i0];
            let e2 = v[i2] - v[i0];
            let cot = e1.dot(&e2) / e1.cross(&e2).norm();
            // angle at i0 weights the opposite edge (i1, i2)
            let d = v[i2] - v[i1];
            lap[i1] += 0.5 * cot * d;
            lap[i2] -= 0.5 * cot * d;
            area[i0] += ar / 3.0;
            nrm[i0] += cr;
            angle_sum[i0] += e1.cross(&e2).norm().atan2(e1.dot(&e2));
        }
    }
    let uses = edge_uses(&m.triangles);
    let mut boundary = vec![false; n];
    for (k, u) in &uses {
        if u.len() == 1 {
            boundary[k.0] = true;
            boundary[k.1] = true;
        }
    }
    Ok((0..n)
        .map(|i| {
            let a = area[i];
            let h_vec = if a > 0.0 { lap[i] / a } else { Vec3::zeros() };
            let nn = nrm[i].norm();
            VertexCurvature {
                h_vec,
                normal: if nn > 0.0 { -nrm[i] / nn } else { Vec3::zeros() },
                area_weight: a,
                angle_defect: if boundary[i] { 0.0 } else { 2.0 * PI - angle_sum[i] },
                boundary: boundary[i],
            }
        })
        .collect())
}

/// Meridian parameters equally spaced in arclength.
pub fn arclength_samples(piece: &AxisymPiece, n: usize) -> Vec<f64> {
    let p = &piece.profile;
    let fine = 4096usize.max(8 * n);
    let dt = (p.t_max - p.t_min) / fine as f64;
    let mut cum = Vec::with_capacity(fine + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    let gl = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];
    for i in 0..fine {
        let t0 = p.t_min + dt * i as f64;
        let mid = t0 + 0.5 * dt;
        let mut s = 0.0;
        for (x, w) in gl {
            s += w * p.speed(mid + 0.5 * dt * x);
        }
        acc += 0.5 * dt * s;
        cum.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(n + 1);
    out.push(p.t_min);
    for j in 1..n {
        let target = total * j as f64 / n as f64;
        let k = cum.partition_point(|&c| c < target).clamp(1, fine);
        let (c0, c1) = (cum[k - 1], cum[k]);
        let frac = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
        out.push(p.t_min + dt * (k as f64 - 1.0 + frac));
    }
    out.push(p.t_max);
    out
}

/// Meridian arclength of the profile.
pub fn profile_length(piece: &AxisymPiece) -> f64 {
    let p = &piece.profile;
    crate::quadrature::integrate_1d(|t| p.speed(t), p.t_min, p.t_max, &crate::quadrature::QuadSpec::with_rel_tol(1e-9))
        .map(|r| r.0)
        .unwrap_or(f64::NAN)
}

/// Mesh of a revolved piece together with the vertex indices of its two
/// boundary rings (empty where the profile touches the axis).
#[derive(Debug, Clone)]
pub struct RevolvedMesh {
    pub mesh: TriMesh,
    pub start_ring: Vec<usize>,
    pub end_ring: Vec<usize>,
}

/// Revolve with an explicit azimuthal phase offset.
pub fn revolve_with_phase(piece: &AxisymPiece, n_meridian: usize, n_azimuth: usize, phase: f64) -> Result<RevolvedMesh> {
    if n_meridian < 2 || n_azimuth < 3 {
        return Err(GeomError::Domain(format!(
            "revolve_to_mesh needs n_meridian ≥ 2 and n_azimuth ≥ 3 (got {n_meridian}, {n_azimuth})"
        )));
    }
    piece.profile.check_regular(256)?;
    let ts = arclength_samples(piece, n_meridian);
    let p = &piece.profile;
    let closed_loop = {
        let (a, b) = (p.start(), p.end());
        (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-12 * p.scale() && !p.axis_touch_start
    };
    let mut vertices = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();
    let last = if closed_loop { ts.len() - 1 } else { ts.len() };
    for (i, &t) in ts.iter().enumerate().take(last) {
        let pole = (i == 0 && p.axis_touch_start) || (i + 1 == ts.len() && p.axis_touch_end);
        if pole {
            rings.push(vec![vertices.len()]);
            vertices.push(piece.point(t, 0.0));
        } else {
            let ring: Vec<usize> = (0..n_azimuth).map(|k| vertices.len() + k).collect();
            for k in 0..n_azimuth {
                let th = phase + 2.0 * PI * k as f64 / n_azimuth as f64;
                vertices.push(piece.point(t, th));
            }
            rings.push(ring);
        }
    }
    if closed_loop {
        rings.push(rings[0].clone());
    }
    let mut tris = Vec::new();
    let mid = (rings.len() - 1) / 2;
    let mut probe_tri = 0;
    for (wi, w) in rings.windows(2).enumerate() {
        if wi == mid {
            probe_tri = tris.len();
        }
        let (r0, r1) = (&w[0], &w[1]);
        match (r0.len(), r1.len()) {
            (1, 1) => {
                return Err(GeomError::Domain("profile touches the axis at both ends of one segment".into()));
            }
            (1, n) => {
                for k in 0..n {
                    tris.push([r0[0], r1[k], r1[(k + 1) % n]]);
                }
            }
            (n, 1) => {
                for k in 0..n {
                    tris.push([r0[k], r1[0], r0[(k + 1) % n]]);
                }
            }
            (n, _) => {
                for k in 0..n {
                    let k1 = (k + 1) % n;
                    tris.push([r0[k], r1[k], r1[k1]]);
                    tris.push([r0[k], r1[k1], r0[k1]]);
                }
            }
        }
    }
    // these windings follow ∂t × ∂θ, the left profile normal; flip to outward
    let tri = tris[probe_tri];
    let probe_t = 0.5 * (ts[mid] + ts[mid + 1]);
    let probe = piece.normal(probe_t, phase + PI / n_azimuth as f64);
    let face = (vertices[tri[1]] - vertices[tri[0]]).cross(&(vertices[tri[2]] - vertices[tri[0]]));
    if face.dot(&probe) > 0.0 {
        for t in tris.iter_mut() {
            t.swap(1, 2);
        }
    }
    let start_ring = if p.axis_touch_start || closed_loop { Vec::new() } else { rings[0].clone() };
    let end_ring = if p.axis_touch_end || closed_loop {
        Vec::new()
    } else {
        rings[rings.len() - 1].clone()
    };
    let mesh = TriMesh::new_open(vertices, tris)?;
    Ok(RevolvedMesh {
        mesh,
        start_ring,
        end_ring,
    })
}

/// Triangulate a revolved piece with `n_meridian` arclength-uniform meridian
/// segments and `n_azimuth` azimuthal segments; poles become fans.
pub fn revolve_to_mesh(piece: &AxisymPiece, n_meridian: usize, n_azimuth: usize) -> Result<TriMesh> {
    let r = revolve_with_phase(piece, n_meridian, n_azimuth, 0.0)?;
    if r.start_ring.is_empty() && r.end_ring.is_empty() {
        TriMesh::new(r.mesh.vertices, r.mesh.triangles)
    } else {
        Ok(r.mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> TriMesh {
        let v = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(0.0, 0.0, -1.0),
        ];
        let t = vec![
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ];
        TriMesh::new(v, t).unwrap()
    }

    #[test]
    fn octahedron_topology() {
        let m = octahedron();
        assert_eq!(m.euler_char, 2);
        assert!((m.total_angle_defect() - 4.0 * PI).abs() < 1e-12);
        assert!((m.volume() - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn flipped_triangle_is_rejected() {
        let mut m = octahedron();
        m.triangles[0].swap(1, 2);
        assert!(matches!(
            TriMesh::new(m.vertices, m.triangles),
            Err(GeomError::InconsistentOrientation(..))
        ));
    }

    #[test]
    fn flat_patch_has_no_curvature() {
        let mut v = Vec::new();
        for j in 0..5 {
            for i in 0..5 {
                v.push(Vec3::new(i as f64 * 0.3, j as f64 * 0.25 + 0.1 * i as f64, 0.0));
            }
        }
        let mut t = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                let a = j * 5 + i;
                t.push([a, a + 1, a + 6]);
                t.push([a, a + 6, a + 5]);
            }
        }
        let m = TriMesh::new_open(v, t).unwrap();
        let c = mesh_vertex_curvature(&m).unwrap();
        for (i, vc) in c.iter().enumerate() {
            if !vc.boundary {
                assert!(vc.h_vec.norm() < 1e-10, "vertex {i}");
            }
        }
    }
}
