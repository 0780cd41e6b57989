//! Extrinsic diameters of composites and meshes, and graph-geodesic intrinsic
//! diameters of meshes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::TriMesh;
use crate::surface::{AxisymPiece, CompositeSurface, Hole, Piece};

#[derive(Debug, Clone, Copy)]
struct Sample {
    piece: usize,
    t: f64,
    theta: f64,
    x: Vec3,
}

fn carrier_and_holes(p: &Piece) -> (&AxisymPiece, &[Hole]) {
    match p {
        Piece::Axisym(a) => (a, &[]),
        Piece::Perforated(pp) => (&pp.base, &pp.holes),
    }
}

fn admissible(holes: &[Hole], x: &Vec3) -> bool {
    !holes.iter().any(|h| h.contains(x))
}

fn sample_composite(s: &CompositeSurface, n_t: usize, n_az: usize) -> Vec<Sample> {
    let per_piece: Vec<Vec<Sample>> = s
        .pieces
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (c, holes) = carrier_and_holes(p);
            let prof = &c.profile;
            let mut out = Vec::new();
            for k in 0..=n_t {
                let t = prof.t_min + (prof.t_max - prof.t_min) * k as f64 / n_t as f64;
                let pole = (k == 0 && prof.axis_touch_start) || (k == n_t && prof.axis_touch_end);
                let m = if pole { 1 } else { n_az };
                for j in 0..m {
                    let theta = 2.0 * PI * j as f64 / n_az as f64;
                    let x = c.point(t, theta);
                    if admissible(holes, &x) {
                        out.push(Sample { piece: i, t, theta, x });
                    }
                }
            }
            out
        })
        .collect();
    per_piece.into_iter().flatten().collect()
}

struct Cluster {
    center: Vec3,
    radius: f64,
    members: Vec<usize>,
}

/// Group points into voxel cells holding roughly 32 points each.
fn clusters(points: &[Vec3]) -> Vec<Cluster> {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let diag = (hi - lo).norm().max(1e-300);
    let cells = ((points.len() as f64 / 32.0).sqrt()).max(1.0);
    let h = diag / cells;
    let mut map: std::collections::BTreeMap<(i64, i64, i64), Vec<usize>> = std::collections::BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let k = (
            ((p.x - lo.x) / h).floor() as i64,
            ((p.y - lo.y) / h).floor() as i64,
            ((p.z - lo.z) / h).floor() as i64,
        );
        map.entry(k).or_default().push(i);
    }
    map.into_values()
        .map(|members| {
            let c = members.iter().fold(Vec3::zeros(), |a, &i| a + points[i]) / members.len() as f64;
            let r = members.iter().map(|&i| (points[i] - c).norm()).fold(0.0, f64::max);
            Cluster {
                center: c,
                radius: r,
                members,
            }
        })
        .collect()
}

fn better(a: (usize, usize, f64), b: (usize, usize, f64)) -> (usize, usize, f64) {
    if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) {
        b
    } else {
        a
    }
}

/// Exact farthest pair by branch and bound over voxel clusters; ties go to
/// the lexicographically smallest index pair.
fn farthest_pair(points: &[Vec3]) -> (usize, usize, f64) {
    if points.len() < 2 {
        return (0, 0, 0.0);
    }
    let cl = clusters(points);
    let far = |from: usize| {
        (0..points.len()).fold((from, 0.0), |b, i| {
            let d = (points[i] - points[from]).norm();
            if d > b.1 {
                (i, d)
            } else {
                b
            }
        })
    };
    let p1 = far(0).0;
    let (p2, d12) = far(p1);
    let mut best = (p1.min(p2), p1.max(p2), d12 * d12);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..cl.len() {
        for j in i..cl.len() {
            let ub = (cl[i].center - cl[j].center).norm() + cl[i].radius + cl[j].radius;
            if ub * ub >= best.2 * (1.0 - 1e-12) {
                pairs.push((ub, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for chunk in pairs.chunks(256) {
        if chunk[0].0 * chunk[0].0 < best.2 * (1.0 - 1e-12) {
            break;
        }
        let bound = best.2;
        let found = chunk
            .par_iter()
            .filter(|c| c.0 * c.0 >= bound * (1.0 - 1e-12))
            .map(|&(_, ci, cj)| {
                let mut b = (usize::MAX, usize::MAX, -1.0);
                for &a in &cl[ci].members {
                    for &c in &cl[cj].members {
                        if a == c {
                            continue;
                        }
                        let d = (points[a] - points[c]).norm_squared();
                        b = better(b, (a.min(c), a.max(c), d));
                    }
                }
                b
            })
            .reduce(|| (usize::MAX, usize::MAX, -1.0), better);
        best = better(best, found);
    }
    (best.0, best.1, best.2.sqrt())
}

fn refine_pair(s: &CompositeSurface, a: Sample, b: Sample, h_t: [f64; 2], h_th: f64) -> f64 {
    let eval = |smp: &Sample, t: f64, th: f64| -> Option<Vec3> {
        let (c, holes) = carrier_and_holes(&s.pieces[smp.piece]);
        let t = t.clamp(c.profile.t_min, c.profile.t_max);
        let x = c.point(t, th);
        admissible(holes, &x).then_some(x)
    };
    let mut p = [a.t, a.theta, b.t, b.theta];
    let mut best = (a.x - b.x).norm();
    let mut step = [h_t[0], h_th, h_t[1], h_th];
    let clamp_t = |smp: &Sample, t: f64| {
        let c = s.pieces[smp.piece].carrier();
        t.clamp(c.profile.t_min, c.profile.t_max)
    };
    for _ in 0..60 {
        let mut improved = false;
        for k in 0..4 {
            for sgn in [1.0, -1.0] {
                let mut q = p;
                q[k] += sgn * step[k];
                q[0] = clamp_t(&a, q[0]);
                q[2] = clamp_t(&b, q[2]);
                if let (Some(x), Some(y)) = (eval(&a, q[0], q[1]), eval(&b, q[2], q[3])) {
                    let d = (x - y).norm();
                    if d > best {
                        best = d;
                        p = q;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            for st in step.iter_mut() {
                *st *= 0.5;
            }
        }
    }
    best
}

/// Extrinsic diameter of a composite on an `n_t × n_az` parameter grid per
/// piece, followed by local refinement of the farthest pair. Doubling the
/// grid sizes nests the sample sets, so the sampled maximum is monotone.
pub fn extrinsic_diameter_with(s: &CompositeSurface, n_t: usize, n_az: usize) -> Result<f64> {
    let samples = sample_composite(s, n_t.max(2), n_az.max(3));
    if samples.is_empty() {
        return Err(GeomError::Domain("empty surface".into()));
    }
    let pts: Vec<Vec3> = samples.iter().map(|s| s.x).collect();
    let (i, j, d) = farthest_pair(&pts);
    let h = |k: usize| {
        let c = s.pieces[samples[k].piece].carrier();
        (c.profile.t_max - c.profile.t_min) / n_t as f64
    };
    let refined = refine_pair(s, samples[i], samples[j], [h(i), h(j)], 2.0 * PI / n_az as f64);
    Ok(d.max(refined))
}

/// Extrinsic diameter of a composite at the default resolution.
pub fn extrinsic_diameter(s: &CompositeSurface) -> Result<f64> {
    extrinsic_diameter_with(s, 32, 64)
}

/// Largest vertex distance of a mesh.
pub fn extrinsic_diameter_mesh(m: &TriMesh) -> f64 {
    farthest_pair(&m.vertices).2
}

struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((Key(0.0), src)));
    while let Some(Reverse((Key(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((Key(nd), v)));
            }
        }
    }
    dist
}

fn argmax(d: &[f64]) -> (usize, f64) {
    d.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
}

fn components(adj: &[Vec<(usize, f64)>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut n = 0;
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        n += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    n
}

/// Graph-geodesic diameter of a connected mesh: the largest eccentricity over
/// farthest-point sweeps and the endpoints of the extrinsic diameter.
pub fn intrinsic_diameter(m: &TriMesh) -> Result<f64> {
    let adj = m.adjacency();
    if adj.is_empty() {
        return Err(GeomError::Domain("empty mesh".into()));
    }
    let nc = components(&adj);
    if nc > 1 {
        return Err(GeomError::Disconnected(nc));
    }
    let (ei, ej, _) = farthest_pair(&m.vertices);
    let mut sources = vec![ei, ej];
    let mut best: f64 = 0.0;
    let mut src = ei;
    for _ in 0..6 {
        let d = dijkstra(&adj, src);
        let (far, ecc) = argmax(&d);
        best = best.max(ecc);
        sources.push(far);
        src = far;
    }
    let extra: Vec<f64> = sources[..2]
        .par_iter()
        .map(|&s| argmax(&dijkstra(&adj, s)).1)
        .collect();
    Ok(extra.into_iter().fold(best, f64::max))
}
