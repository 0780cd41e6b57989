//! Axisymmetric genus-zero minimization of the Helfrich energy under area and
//! volume constraints on discrete meridian profiles.
//!
//! A profile is a polyline in the (ρ, z) half-plane running from one axis
//! point to another. With T the unit tangent, the inner normal is
//! n = (T_z, −T_ρ) when the enclosed volume is positive, and the nodewise
//! principal curvatures are κ_mer = −φ/s (φ the counter-clockwise turning
//! angle, s the dual arclength) and κ_circ = −T_z/ρ.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::inequalities::{gamma_threshold, GammaInputs, InequalityReport};
use crate::mesh::TriMesh;

/// Shortest admissible segment.
pub const MIN_SEGMENT: f64 = 1e-12;

/// A closed meridian polyline with both endpoints on the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProfile {
    pub nodes: Vec<[f64; 2]>,
}

/// Discrete energies and constraint values of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEnergy {
    pub helfrich: f64,
    pub area: f64,
    pub volume: f64,
    pub willmore: f64,
    pub total_mc: f64,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let d1 = cross(sub(q, p), sub(r, p));
    let d2 = cross(sub(q, p), sub(s, p));
    let d3 = cross(sub(s, r), sub(p, r));
    let d4 = cross(sub(s, r), sub(q, r));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: f64| {
        d == 0.0 && c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    on(p, q, r, d1) || on(p, q, s, d2) || on(r, s, p, d3) || on(r, s, q, d4)
}

/// Helfrich, Willmore and total mean curvature contributions of node i. An
/// axis node is an umbilic whose curvature is the turning angle between its
/// edge and the edge's mirror image, weighted by the disc of radius l/2.
fn node_terms(nodes: &[[f64; 2]], i: usize, c0: f64) -> [f64; 3] {
    let n = nodes.len();
    let (h, w) = if i == 0 || i + 1 == n {
        let e = if i == 0 { sub(nodes[1], nodes[0]) } else { sub(nodes[n - 1], nodes[n - 2]) };
        let mirror = [e[0], -e[1]];
        let (a, b) = if i == 0 { (mirror, e) } else { (e, mirror) };
        let l = norm(e);
        let phi = cross(a, b).atan2(a[0] * b[0] + a[1] * b[1]);
        (-2.0 * phi / l, 0.25 * PI * l * l)
    } else {
        let e0 = sub(nodes[i], nodes[i - 1]);
        let e1 = sub(nodes[i + 1], nodes[i]);
        let (l0, l1) = (norm(e0), norm(e1));
        let s = 0.5 * (l0 + l1);
        let phi = cross(e0, e1).atan2(e0[0] * e1[0] + e0[1] * e1[1]);
        let t = [e0[0] / l0 + e1[0] / l1, e0[1] / l0 + e1[1] / l1];
        let rho = nodes[i][0];
        (-phi / s - t[1] / (norm(t) * rho), 2.0 * PI * rho * s)
    };
    [0.25 * (h - c0).powi(2) * w, 0.25 * h * h * w, h * w]
}

/// Exact area and signed volume of the frustum swept by segment i.
fn segment_terms(nodes: &[[f64; 2]], i: usize) -> [f64; 2] {
    let [r0, z0] = nodes[i];
    let [r1, z1] = nodes[i + 1];
    let len = (r1 - r0).hypot(z1 - z0);
    [PI * (r0 + r1) * len, -PI / 3.0 * (r0 * r0 + r0 * r1 + r1 * r1) * (z1 - z0)]
}

impl DiscreteProfile {
    /// Validates and wraps a node list.
    pub fn new(nodes: Vec<[f64; 2]>) -> Result<Self> {
        let p = Self { nodes };
        p.validate()?;
        Ok(p)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Circle of radius r about the origin, `n` nodes equally spaced in angle.
    pub fn sphere(r: f64, n: usize) -> Result<Self> {
        Self::ellipse(r, r, n)
    }

    /// Ellipse with equatorial semi-axis `a` and polar semi-axis `c`, nodes
    /// equally spaced in the polar angle from the north pole.
    pub fn ellipse(a: f64, c: f64, n: usize) -> Result<Self> {
        if n < 5 || !(a > 0.0 && c > 0.0) {
            return Err(GeomError::Domain("an ellipse profile needs n ≥ 5 and positive semi-axes".into()));
        }
        let nodes = (0..n)
            .map(|k| {
                let th = PI * k as f64 / (n - 1) as f64;
                let rho = if k == 0 || k + 1 == n { 0.0 } else { a * th.sin() };
                [rho, c * th.cos()]
            })
            .collect();
        Self::new(nodes)
    }

    /// Checks axis endpoints, positive interior radii, segment lengths,
    /// simplicity and positive enclosed volume.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 4 {
            return Err(GeomError::Domain("a profile needs at least 4 nodes".into()));
        }
        if self.nodes.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(GeomError::Domain("non-finite node".into()));
        }
        if self.nodes[0][0] != 0.0 || self.nodes[n - 1][0] != 0.0 {
            return Err(GeomError::Domain("profile endpoints must lie on the axis".into()));
        }
        if let Some(i) = (1..n - 1).find(|&i| self.nodes[i][0] <= 0.0) {
            return Err(GeomError::Domain(format!("interior node {i} is not off the axis")));
        }
        for i in 0..n - 1 {
            let length = norm(sub(self.nodes[i + 1], self.nodes[i]));
            if length < MIN_SEGMENT {
                return Err(GeomError::DegenerateSegment { index: i, length });
            }
        }
        if let Some((i, j)) = self.first_intersection() {
            return Err(GeomError::SelfIntersection(i, j));
        }
        if self.volume() <= 0.0 {
            return Err(GeomError::Orientation(
                "the profile encloses negative volume; reverse the node order".into(),
            ));
        }
        Ok(())
    }

    /// First pair of non-adjacent segments that meet.
    pub fn first_intersection(&self) -> Option<(usize, usize)> {
        let p = &self.nodes;
        let m = p.len() - 1;
        for i in 0..m {
            for j in i + 2..m {
                if segments_cross(p[i], p[i + 1], p[j], p[j + 1]) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn area(&self) -> f64 {
        (0..self.nodes.len() - 1).map(|i| segment_terms(&self.nodes, i)[0]).sum()
    }

    pub fn volume(&self) -> f64 {
        (0..self.nodes.len() - 1).map(|i| segment_terms(&self.nodes, i)[1]).sum()
    }

    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| norm(sub(w[1], w[0]))).sum()
    }

    /// Largest coordinate extent, the length unit of finite differences.
    pub fn scale(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (hi[0] - lo[0]).max(hi[1] - lo[1])
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|p| [s * p[0], s * p[1]]).collect(),
        }
    }

    pub fn translated(&self, dz: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|p| [p[0], p[1] + dz]).collect(),
        }
    }

    /// Same number of nodes, equally spaced in arclength.
    pub fn resampled(&self) -> Self {
        self.resampled_to(self.nodes.len())
    }

    /// `n` nodes equally spaced in chord parameter along the uniform
    /// Catmull–Rom spline through the nodes, with ghost nodes mirrored across
    /// the axis so the curve meets the axis perpendicularly. Falls back to
    /// the polyline where the spline leaves the admissible set.
    pub fn resampled_to(&self, n: usize) -> Self {
        let spline = self.spline_samples(n);
        match DiscreteProfile::new(spline) {
            Ok(p) => p,
            Err(_) => self.polyline_samples(n),
        }
    }

    fn chord_params(&self) -> Vec<f64> {
        let mut cum = vec![0.0];
        for w in self.nodes.windows(2) {
            cum.push(cum.last().unwrap() + norm(sub(w[1], w[0])));
        }
        cum
    }

    fn spline_samples(&self, n: usize) -> Vec<[f64; 2]> {
        let m = self.nodes.len();
        let cum = self.chord_params();
        let total = cum[m - 1];
        let pt = |k: isize| -> [f64; 2] {
            if k < 0 {
                let p = self.nodes[(-k) as usize];
                [-p[0], p[1]]
            } else if k as usize >= m {
                let p = self.nodes[2 * (m - 1) - k as usize];
                [-p[0], p[1]]
            } else {
                self.nodes[k as usize]
            }
        };
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let s = total * k as f64 / (n - 1) as f64;
            while seg + 2 < m && cum[seg + 1] < s {
                seg += 1;
            }
            let u = ((s - cum[seg]) / (cum[seg + 1] - cum[seg])).clamp(0.0, 1.0);
            let i = seg as isize;
            let (p0, p1, p2, p3) = (pt(i - 1), pt(i), pt(i + 1), pt(i + 2));
            let (u2, u3) = (u * u, u * u * u);
            let w = [
                -0.5 * u3 + u2 - 0.5 * u,
                1.5 * u3 - 2.5 * u2 + 1.0,
                -1.5 * u3 + 2.0 * u2 + 0.5 * u,
                0.5 * u3 - 0.5 * u2,
            ];
            out.push([
                w[0] * p0[0] + w[1] * p1[0] + w[2] * p2[0] + w[3] * p3[0],
                w[0] * p0[1] + w[1] * p1[1] + w[2] * p2[1] + w[3] * p3[1],
            ]);
        }
        out[0] = self.nodes[0];
        out[n - 1] = self.nodes[m - 1];
        out
    }

    fn polyline_samples(&self, n: usize) -> Self {
        let m = self.nodes.len();
        let cum = self.chord_params();
        let total = cum[m - 1];
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for k in 0..n {
            let s = total * k as f64 / (n - 1) as f64;
            while seg + 2 < m && cum[seg + 1] < s {
                seg += 1;
            }
            let u = ((s - cum[seg]) / (cum[seg + 1] - cum[seg])).clamp(0.0, 1.0);
            let (a, b) = (self.nodes[seg], self.nodes[seg + 1]);
            out.push([a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]);
        }
        out[0] = self.nodes[0];
        out[n - 1] = self.nodes[m - 1];
        Self { nodes: out }
    }

    /// Triangulated surface of revolution with `n_azimuth` copies of every
    /// interior node and one vertex per axis point.
    pub fn to_mesh(&self, n_azimuth: usize) -> Result<TriMesh> {
        if n_azimuth < 3 {
            return Err(GeomError::Domain("need at least 3 azimuthal samples".into()));
        }
        let n = self.nodes.len();
        let mut v = vec![Vec3::new(0.0, 0.0, self.nodes[0][1])];
        for p in &self.nodes[1..n - 1] {
            for k in 0..n_azimuth {
                let th = 2.0 * PI * k as f64 / n_azimuth as f64;
                v.push(Vec3::new(p[0] * th.cos(), p[0] * th.sin(), p[1]));
            }
        }
        v.push(Vec3::new(0.0, 0.0, self.nodes[n - 1][1]));
        let last = v.len() - 1;
        let ring = |i: usize, k: usize| 1 + (i - 1) * n_azimuth + k % n_azimuth;
        let mut t = Vec::new();
        for k in 0..n_azimuth {
            t.push([0, ring(1, k + 1), ring(1, k)]);
            t.push([last, ring(n - 2, k), ring(n - 2, k + 1)]);
        }
        for i in 1..n - 2 {
            for k in 0..n_azimuth {
                t.push([ring(i, k), ring(i, k + 1), ring(i + 1, k + 1)]);
                t.push([ring(i, k), ring(i + 1, k + 1), ring(i + 1, k)]);
            }
        }
        let m = TriMesh::new(v, t)?;
        if m.volume() < 0.0 {
            let flipped = m.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect();
            return TriMesh::new(m.vertices, flipped);
        }
        Ok(m)
    }

    /// True when an axis point is not the extreme height on its side, the
    /// dimple of a biconcave or stomatocyte shape.
    pub fn dimpled(&self) -> bool {
        let n = self.nodes.len();
        let zmax = self.nodes.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let zmin = self.nodes.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * self.scale();
        self.nodes[0][1] < zmax - tol || self.nodes[n - 1][1] > zmin + tol
    }
}

/// Trapezoid energies with nodewise principal curvatures; area and volume
/// are those of the polyhedral surface of revolution.
pub fn discrete_energy(p: &DiscreteProfile, c0: f64) -> Result<DiscreteEnergy> {
    let n = p.nodes.len();
    if n < 3 {
        return Err(GeomError::Domain("a profile needs at least 3 nodes".into()));
    }
    for i in 0..n - 1 {
        let length = norm(sub(p.nodes[i + 1], p.nodes[i]));
        if length < MIN_SEGMENT {
            return Err(GeomError::DegenerateSegment { index: i, length });
        }
    }
    let mut e = DiscreteEnergy {
        helfrich: 0.0,
        area: p.area(),
        volume: p.volume(),
        willmore: 0.0,
        total_mc: 0.0,
    };
    for i in 0..n {
        let [h, w, m] = node_terms(&p.nodes, i, c0);
        e.helfrich += h;
        e.willmore += w;
        e.total_mc += m;
    }
    Ok(e)
}

/// Multipliers and penalty weight of the augmented objective
/// 𝓗 + λ_A c_A + λ_V c_V + (μ/2)(c_A² + c_V²), with c_A = (𝒜 − a₀)/a₀ and
/// c_V = (𝒱 − v₀)/v₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalties {
    pub c0: f64,
    pub a0: f64,
    pub v0: f64,
    pub lambda_a: f64,
    pub lambda_v: f64,
    pub mu: f64,
}

impl Penalties {
    fn value(&self, e: f64, area: f64, volume: f64) -> f64 {
        let ca = (area - self.a0) / self.a0;
        let cv = (volume - self.v0) / self.v0;
        e + self.lambda_a * ca + self.lambda_v * cv + 0.5 * self.mu * (ca * ca + cv * cv)
    }
}

/// The augmented objective.
pub fn objective(p: &DiscreteProfile, pen: &Penalties) -> Result<f64> {
    let e = discrete_energy(p, pen.c0)?;
    Ok(pen.value(e.helfrich, e.area, e.volume))
}

/// Helfrich energy, area and volume contributions that depend on node i.
fn local_terms(nodes: &[[f64; 2]], i: usize, c0: f64) -> [f64; 3] {
    let n = nodes.len();
    let mut out = [0.0; 3];
    for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
        out[0] += node_terms(nodes, j, c0)[0];
    }
    for j in i.saturating_sub(1)..=i.min(n - 2) {
        if j + 1 < n {
            let [a, v] = segment_terms(nodes, j);
            out[1] += a;
            out[2] += v;
        }
    }
    out
}

/// Central-difference gradient of the augmented objective with step
/// 1e-6·scale, one 2-vector per node; axis endpoints move only along the
/// axis. Only the terms touching each node are re-evaluated.
pub fn gradient(p: &DiscreteProfile, pen: &Penalties) -> Vec<[f64; 2]> {
    let h = 1e-6 * p.scale();
    let area = p.area();
    let volume = p.volume();
    let n = p.nodes.len();
    let ca = (area - pen.a0) / pen.a0;
    let cv = (volume - pen.v0) / pen.v0;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            let mut nodes = p.nodes.clone();
            let base = local_terms(&nodes, i, pen.c0);
            for (k, gk) in g.iter_mut().enumerate() {
                if k == 0 && (i == 0 || i + 1 == n) {
                    continue;
                }
                let x = p.nodes[i][k];
                nodes[i][k] = x + h;
                let plus = local_terms(&nodes, i, pen.c0);
                nodes[i][k] = x - h;
                let minus = local_terms(&nodes, i, pen.c0);
                nodes[i][k] = x;
                let (ap, am) = ((plus[1] - base[1]) / pen.a0, (minus[1] - base[1]) / pen.a0);
                let (vp, vm) = ((plus[2] - base[2]) / pen.v0, (minus[2] - base[2]) / pen.v0);
                let df = plus[0] - minus[0]
                    + pen.lambda_a * (ap - am)
                    + pen.lambda_v * (vp - vm)
                    + 0.5 * pen.mu * ((ap - am) * (2.0 * ca + ap + am) + (vp - vm) * (2.0 * cv + vp + vm));
                *gk = df / (2.0 * h);
            }
            g
        })
        .collect()
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeConfig {
    pub c0: f64,
    pub a0: f64,
    pub v0: f64,
    pub max_iters: usize,
    /// First trial step, as a fraction of the profile scale.
    pub step0: f64,
    /// Relative tolerance on the area and volume constraints.
    pub constraint_tol: f64,
    /// Stationarity tolerance on the Euclidean gradient norm.
    pub grad_tol: f64,
    /// Stationarity tolerance on the relative energy change between
    /// consecutive 50-iteration blocks.
    pub energy_tol: f64,
    pub penalty_growth: f64,
    /// Solve on coarser node counts first.
    pub multilevel: bool,
    /// Recorded with the trace; the descent is deterministic.
    pub seed: u64,
}

impl MinimizeConfig {
    pub fn new(c0: f64, a0: f64, v0: f64) -> Self {
        Self {
            c0,
            a0,
            v0,
            max_iters: 2000,
            step0: 1e-3,
            constraint_tol: 1e-4,
            grad_tol: 1e-6,
            energy_tol: 1e-5,
            penalty_growth: 4.0,
            multilevel: true,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c0.is_finite() {
            return Err(GeomError::Domain("c0 must be finite".into()));
        }
        if !(self.step0 > 0.0 && self.constraint_tol > 0.0 && self.grad_tol > 0.0 && self.energy_tol > 0.0) {
            return Err(GeomError::Domain("step and tolerances must be positive".into()));
        }
        if !(self.penalty_growth > 1.0) || self.max_iters == 0 {
            return Err(GeomError::Domain("penalty_growth must exceed 1 and max_iters be positive".into()));
        }
        GammaInputs {
            c0: self.c0,
            a0: self.a0,
            v0: self.v0,
            c_diam: 1.0,
        }
        .validate()
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub n_nodes: usize,
    /// Helfrich energy of the accepted profile.
    pub energy: f64,
    /// Relative violations (𝒜 − a₀)/a₀ and (𝒱 − v₀)/v₀.
    pub area_violation: f64,
    pub volume_violation: f64,
    pub step: f64,
    pub grad_norm: f64,
    /// Augmented objective; non-increasing within a phase.
    pub objective: f64,
    /// Incremented at every multiplier update and resampling.
    pub phase: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeTrace {
    pub rows: Vec<TraceRow>,
    pub initial: DiscreteEnergy,
    pub final_profile: DiscreteProfile,
    pub final_energy: DiscreteEnergy,
    pub converged: bool,
    pub config: MinimizeConfig,
}

impl MinimizeTrace {
    /// True when the objective never increases within a phase.
    pub fn monotone(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].phase != w[1].phase || w[1].objective <= w[0].objective)
    }
}

fn dot(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x[0] * y[0] + x[1] * y[1]).sum()
}

fn axpy(x: &[[f64; 2]], a: f64, d: &[[f64; 2]]) -> Vec<[f64; 2]> {
    x.iter().zip(d).map(|(p, q)| [p[0] + a * q[0], p[1] + a * q[1]]).collect()
}

/// Two-loop L-BFGS direction.
fn lbfgs_direction(g: &[[f64; 2]], mem: &VecDeque<(Vec<[f64; 2]>, Vec<[f64; 2]>, f64)>) -> Vec<[f64; 2]> {
    let mut q: Vec<[f64; 2]> = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        q = axpy(&q, -a, y);
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| {
            v[0] *= gamma;
            v[1] *= gamma;
        });
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q = axpy(&q, a - b, s);
    }
    q.iter().map(|v| [-v[0], -v[1]]).collect()
}

const LBFGS_MEMORY: usize = 12;
const RESAMPLE_EVERY: usize = 50;
const COARSEST: usize = 40;

fn admissible(nodes: Vec<[f64; 2]>) -> Option<DiscreteProfile> {
    DiscreteProfile::new(nodes).ok()
}

/// Node counts from coarse to fine, halving while at least `COARSEST` remain.
fn levels(n: usize) -> Vec<usize> {
    let mut out = vec![n];
    while out[0] / 2 >= COARSEST {
        out.insert(0, (out[0] + 1) / 2);
    }
    out
}

/// State shared by the stages of one run.
struct Run<'a> {
    cfg: &'a MinimizeConfig,
    mem: VecDeque<(Vec<[f64; 2]>, Vec<[f64; 2]>, f64)>,
    pen: Penalties,
    rows: Vec<TraceRow>,
    phase: usize,
    iter: usize,
}

/// Outcome of an inner solve at fixed multipliers.
struct Inner {
    p: DiscreteProfile,
    grad_norm: f64,
    /// Relative objective decrease fell below round-off or no step was accepted.
    stalled: bool,
}

impl Run<'_> {
    fn record(&mut self, p: &DiscreteProfile, f: f64, step: f64, grad_norm: f64) -> Result<()> {
        let e = discrete_energy(p, self.cfg.c0)?;
        self.rows.push(TraceRow {
            iter: self.iter,
            n_nodes: p.n_nodes(),
            energy: e.helfrich,
            area_violation: (e.area - self.cfg.a0) / self.cfg.a0,
            volume_violation: (e.volume - self.cfg.v0) / self.cfg.v0,
            step,
            grad_norm,
            objective: f,
            phase: self.phase,
        });
        Ok(())
    }

    /// L-BFGS with Armijo backtracking on the augmented objective until the
    /// gradient norm drops below `tol`, the budget runs out or progress stalls.
    fn inner(&mut self, mut p: DiscreteProfile, tol: f64, end: usize) -> Result<Inner> {
        let cfg = self.cfg;
        let mut mem = std::mem::take(&mut self.mem);
        if mem.front().is_some_and(|m| m.0.len() != p.n_nodes()) {
            mem.clear();
        }
        let mut f = objective(&p, &self.pen)?;
        let mut g = gradient(&p, &self.pen);
        let mut gnorm = dot(&g, &g).sqrt();
        let mut stalled = false;
        for _ in 0..RESAMPLE_EVERY {
            if self.iter >= end || gnorm <= tol {
                break;
            }
            let mut d = lbfgs_direction(&g, &mem);
            let mut slope = dot(&g, &d);
            if mem.is_empty() || slope >= 0.0 {
                let s = cfg.step0 * p.scale() / gnorm.max(1e-300);
                d = g.iter().map(|v| [-s * v[0], -s * v[1]]).collect();
                slope = dot(&g, &d);
                mem.clear();
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                if let Some(q) = admissible(axpy(&p.nodes, alpha, &d)) {
                    let fq = objective(&q, &self.pen)?;
                    if fq <= f + 1e-4 * alpha * slope {
                        accepted = Some((q, fq));
                        break;
                    }
                }
                alpha *= 0.5;
            }
            let Some((q, fq)) = accepted else {
                if mem.is_empty() {
                    stalled = true;
                    break;
                }
                mem.clear();
                continue;
            };
            let gq = gradient(&q, &self.pen);
            let s: Vec<[f64; 2]> = q.nodes.iter().zip(&p.nodes).map(|(a, b)| sub(*a, *b)).collect();
            let y: Vec<[f64; 2]> = gq.iter().zip(&g).map(|(a, b)| sub(*a, *b)).collect();
            let sy = dot(&s, &y);
            if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
                mem.push_back((s, y, 1.0 / sy));
                if mem.len() > LBFGS_MEMORY {
                    mem.pop_front();
                }
            }
            let step = alpha * dot(&d, &d).sqrt();
            let rel = (f - fq) / f.abs().max(1.0);
            p = q;
            f = fq;
            g = gq;
            gnorm = dot(&g, &g).sqrt();
            self.iter += 1;
            self.record(&p, f, step, gnorm)?;
            if rel < 1e-14 {
                stalled = true;
                break;
            }
        }
        self.mem = mem;
        Ok(Inner {
            p,
            grad_norm: gnorm,
            stalled,
        })
    }
}

/// Augmented-Lagrangian descent: L-BFGS directions with Armijo backtracking
/// at fixed multipliers, first-order multiplier updates between inner
/// solves, and arclength resampling every 50 iterations. The profile is
/// solved on successively refined node counts ending at the node count of
/// `p0`, with multipliers carried between levels. Steps that leave the
/// admissible set (self-intersection, nodes reaching the axis, degenerate
/// segments) are halved.
pub fn minimize_helfrich(p0: &DiscreteProfile, cfg: &MinimizeConfig) -> Result<MinimizeTrace> {
    cfg.validate()?;
    p0.validate()?;
    let initial = discrete_energy(p0, cfg.c0)?;
    let mu0 = 10.0 * initial.helfrich.max(1.0);
    let mut run = Run {
        cfg,
        mem: VecDeque::new(),
        pen: Penalties {
            c0: cfg.c0,
            a0: cfg.a0,
            v0: cfg.v0,
            lambda_a: 0.0,
            lambda_v: 0.0,
            mu: mu0,
        },
        rows: Vec::new(),
        phase: 0,
        iter: 0,
    };
    let lv = if cfg.multilevel { levels(p0.n_nodes()) } else { vec![p0.n_nodes()] };
    let coarse_budget = cfg.max_iters / (2 * lv.len().max(2) - 2);
    let mut p = p0.clone();
    let mut converged = false;
    for (li, &n) in lv.iter().enumerate() {
        let finest = li + 1 == lv.len();
        if n != p.n_nodes() {
            p = p.resampled_to(n);
            run.phase += 1;
        }
        let level_end = if finest { cfg.max_iters } else { (run.iter + coarse_budget).min(cfg.max_iters) };
        let (tol_c, tol_e) = if finest {
            (cfg.constraint_tol, cfg.energy_tol)
        } else {
            (10.0 * cfg.constraint_tol, 10.0 * cfg.energy_tol)
        };
        let mut last_violation = f64::INFINITY;
        let mut last_energy = f64::NAN;
        let mut idle = 0;
        while run.iter < level_end && idle < 50 {
            let before = run.iter;
            let inner = run.inner(p, cfg.grad_tol, level_end)?;
            idle = if run.iter == before { idle + 1 } else { 0 };
            p = inner.p;
            let e = discrete_energy(&p, cfg.c0)?;
            let ca = (e.area - cfg.a0) / cfg.a0;
            let cv = (e.volume - cfg.v0) / cfg.v0;
            let violation = ca.abs().max(cv.abs());
            let settled = (e.helfrich - last_energy).abs() <= tol_e * e.helfrich.abs().max(1.0);
            let stationary = inner.grad_norm <= cfg.grad_tol || inner.stalled || settled;
            last_energy = e.helfrich;
            if violation <= tol_c && stationary {
                converged = finest;
                break;
            }
            run.pen.lambda_a += run.pen.mu * ca;
            run.pen.lambda_v += run.pen.mu * cv;
            if violation > 0.25 * last_violation {
                run.pen.mu = (run.pen.mu * cfg.penalty_growth).min(1e4 * mu0);
            }
            last_violation = violation;
            if let Some(r) = admissible(p.resampled().nodes) {
                p = r;
            }
            run.phase += 1;
        }
    }
    let final_energy = discrete_energy(&p, cfg.c0)?;
    Ok(MinimizeTrace {
        rows: run.rows,
        initial,
        final_profile: p,
        final_energy,
        converged,
        config: *cfg,
    })
}

/// Compares the achieved energy with the existence threshold 8π + Γ; a pass
/// witnesses the strict inequality for these constraint values.
pub fn threshold_report(trace: &MinimizeTrace, g: &GammaInputs) -> Result<InequalityReport> {
    if !trace.converged {
        return Err(GeomError::NotConverged);
    }
    let (gamma, threshold) = gamma_threshold(g)?;
    let e = trace.final_energy.helfrich;
    let mut r = InequalityReport::new("existence_threshold", e, threshold, 0.0)
        .with("gamma", gamma)
        .with("c0", g.c0)
        .with("a0", g.a0)
        .with("v0", g.v0)
        .with("dimpled", if trace.final_profile.dimpled() { 1.0 } else { 0.0 });
    r.pass = e < threshold;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_sphere_energy() {
        let p = DiscreteProfile::sphere(1.0, 200).unwrap();
        let e = discrete_energy(&p, 0.0).unwrap();
        assert!((e.helfrich / (4.0 * PI) - 1.0).abs() < 1e-2, "{e:?}");
        assert!((e.area / (4.0 * PI) - 1.0).abs() < 1e-3);
        assert!((e.volume / (4.0 * PI / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn revolved_mesh_matches_profile() {
        let p = DiscreteProfile::ellipse(1.0, 0.6, 60).unwrap();
        let m = p.to_mesh(64).unwrap();
        assert_eq!(m.euler_char, 2);
        assert!(m.volume() > 0.0);
        assert!((m.volume() / p.volume() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn rejects_crossing_profile() {
        let nodes = vec![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.0, -1.0]];
        assert!(DiscreteProfile::new(nodes).is_err());
    }
}
