//! Triangulation of closed composite surfaces.
//!
//! Every piece is revolved on its own meridian grid with a shared number of
//! azimuthal segments. Rings on coaxial joints are welded vertex to vertex.
//! Around each hole the base triangles near the rim are removed and the
//! remaining boundary loop is zipped to the ring of the piece glued there.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::{profile_length, revolve_with_phase, RevolvedMesh, TriMesh};
use crate::surface::{BoundaryCircle, BoundaryId, CompositeSurface, Hole, Piece};

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn ring_of(r: &RevolvedMesh, id: BoundaryId) -> &[usize] {
    match id {
        BoundaryId::Start => &r.start_ring,
        BoundaryId::End => &r.end_ring,
        BoundaryId::Hole(_) => &[],
    }
}

/// Phases aligning the rings of coaxial joints, by breadth-first search over
/// the joint graph.
fn phases(s: &CompositeSurface) -> Result<Vec<f64>> {
    let n = s.pieces.len();
    let mut nbrs: Vec<Vec<(BoundaryId, usize, BoundaryId)>> = vec![Vec::new(); n];
    for j in &s.joints {
        if matches!(j.a.1, BoundaryId::Hole(_)) || matches!(j.b.1, BoundaryId::Hole(_)) || j.a.0 == j.b.0 {
            continue;
        }
        nbrs[j.a.0].push((j.a.1, j.b.0, j.b.1));
        nbrs[j.b.0].push((j.b.1, j.a.0, j.a.1));
    }
    let mut phase: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if phase[root].is_some() {
            continue;
        }
        phase[root] = Some(0.0);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for &(own, j, other) in &nbrs[i] {
                if phase[j].is_some() {
                    continue;
                }
                let a = s.circle((i, own))?;
                let b = s.circle((j, other))?;
                phase[j] = Some(b.theta_of(&a.point(phase[i].unwrap_or(0.0))));
                queue.push_back(j);
            }
        }
    }
    Ok(phase.into_iter().map(|p| p.unwrap_or(0.0)).collect())
}

fn rim_distance(c: &BoundaryCircle<'_>, x: &Vec3) -> f64 {
    let d = x - c.center();
    let ax = c.axis();
    let along = d.dot(&ax);
    let radial = (d - along * ax).norm();
    (radial - c.radius()).hypot(along)
}

fn hole_azimuth(h: &Hole, x: &Vec3) -> f64 {
    let l = h.removed.motion.apply_inverse(x);
    l.y.atan2(l.x)
}

/// Directed boundary edges of a triangle set, as a map from tail to heads.
fn boundary_edges(tris: &[[usize; 3]]) -> BTreeMap<usize, Vec<usize>> {
    let mut directed = BTreeSet::new();
    for t in tris {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) {
            out.entry(a).or_default().push(b);
        }
    }
    out
}

/// Cyclic order of `ids` by increasing hole azimuth, starting at the smallest
/// azimuth, with unwrapped angles. Returns whether the input order was reversed.
fn angular_order(h: &Hole, ids: &[usize], verts: &[Vec3]) -> (Vec<usize>, Vec<f64>, bool) {
    let a: Vec<f64> = ids.iter().map(|&i| hole_azimuth(h, &verts[i])).collect();
    let n = ids.len();
    let wrap = |d: f64| (d + PI).rem_euclid(2.0 * PI) - PI;
    let turn: f64 = (0..n).map(|k| wrap(a[(k + 1) % n] - a[k])).sum();
    let reversed = turn < 0.0;
    let (mut ids, mut a) = (ids.to_vec(), a);
    if reversed {
        ids.reverse();
        a.reverse();
    }
    let start = (0..n).min_by(|&i, &j| a[i].total_cmp(&a[j])).unwrap_or(0);
    ids.rotate_left(start);
    a.rotate_left(start);
    let mut un = vec![a[0]];
    for k in 1..n {
        let prev = un[k - 1];
        un.push(prev + wrap(a[k] - a[k - 1]).rem_euclid(2.0 * PI));
    }
    ids.push(ids[0]);
    un.push(un[0] + 2.0 * PI);
    (ids, un, reversed)
}

/// Triangulate the annulus between a loop cut from a base piece and the ring
/// of the neighbouring piece. `loop_ids` follows the base boundary direction.
fn zipper(h: &Hole, loop_ids: &[usize], ring: &[usize], verts: &[Vec3]) -> Vec<[usize; 3]> {
    let (l, al, reversed) = angular_order(h, loop_ids, verts);
    let (r, ar, _) = angular_order(h, ring, verts);
    let (m, n) = (l.len() - 1, r.len() - 1);
    let (mut i, mut j) = (0, 0);
    let mut tris = Vec::with_capacity(m + n);
    while i < m || j < n {
        if j == n || (i < m && al[i + 1] <= ar[j + 1]) {
            tris.push([l[i], l[i + 1], r[j]]);
            i += 1;
        } else {
            tris.push([l[i], r[j + 1], r[j]]);
            j += 1;
        }
    }
    if !reversed {
        for t in tris.iter_mut() {
            t.swap(1, 2);
        }
    }
    tris
}

/// Remove the base triangles near every hole and return the surviving
/// triangles with one boundary loop per hole.
fn cut_holes(
    base: &RevolvedMesh,
    holes: &[Hole],
    circles: &[BoundaryCircle<'_>],
    label: &str,
) -> Result<(Vec<[usize; 3]>, Vec<Vec<usize>>)> {
    let m = &base.mesh;
    let v = &m.vertices;
    let edge_len = |t: &[usize; 3]| (0..3).map(|k| (v[t[k]] - v[t[(k + 1) % 3]]).norm()).fold(0.0, f64::max);
    let global = m.triangles.iter().map(edge_len).fold(0.0, f64::max);
    let mut bad = vec![false; v.len()];
    for (h, c) in holes.iter().zip(circles) {
        let reach = c.radius() + 2.0 * global;
        let local = m
            .triangles
            .iter()
            .filter(|t| t.iter().any(|&i| (v[i] - c.center()).norm() < reach))
            .map(edge_len)
            .fold(0.0, f64::max);
        let margin = 0.6 * local;
        for (i, x) in v.iter().enumerate() {
            if h.contains(x) || rim_distance(c, x) < margin {
                bad[i] = true;
            }
        }
    }
    let original: BTreeSet<(usize, usize)> = boundary_edges(&m.triangles)
        .into_iter()
        .flat_map(|(a, hs)| hs.into_iter().map(move |b| (a, b)))
        .collect();
    loop {
        let kept: Vec<[usize; 3]> = m.triangles.iter().copied().filter(|t| t.iter().all(|&i| !bad[i])).collect();
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (a, hs) in boundary_edges(&kept) {
            for b in hs {
                if !original.contains(&(a, b)) {
                    next.entry(a).or_default().push(b);
                }
            }
        }
        let pinched: Vec<usize> = next.iter().filter(|(_, hs)| hs.len() > 1).map(|(a, _)| *a).collect();
        if !pinched.is_empty() {
            for p in pinched {
                bad[p] = true;
            }
            continue;
        }
        let mut loops: Vec<Option<Vec<usize>>> = vec![None; holes.len()];
        let mut seen = BTreeSet::new();
        for &start in next.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut lp = vec![start];
            seen.insert(start);
            let mut cur = next[&start][0];
            while cur != start {
                if !seen.insert(cur) || !next.contains_key(&cur) {
                    return Err(GeomError::Domain(format!("broken hole boundary on '{label}'")));
                }
                lp.push(cur);
                cur = next[&cur][0];
            }
            let centroid = lp.iter().fold(Vec3::zeros(), |a, &i| a + v[i]) / lp.len() as f64;
            let k = (0..circles.len())
                .min_by(|&i, &j| {
                    (circles[i].center() - centroid)
                        .norm()
                        .total_cmp(&(circles[j].center() - centroid).norm())
                })
                .unwrap_or(0);
            if loops[k].replace(lp).is_some() {
                return Err(GeomError::Domain(format!("hole {k} of '{label}' needs a finer mesh")));
            }
        }
        let loops = loops
            .into_iter()
            .enumerate()
            .map(|(k, l)| l.ok_or_else(|| GeomError::Domain(format!("hole {k} of '{label}' was not cut"))))
            .collect::<Result<Vec<_>>>()?;
        return Ok((kept, loops));
    }
}

/// Closed triangle mesh of a closed composite with `n_azimuth` segments per
/// ring and meridian spacing close to `edge`.
pub fn mesh_composite(s: &CompositeSurface, n_azimuth: usize, edge: f64) -> Result<TriMesh> {
    s.validate_closed()?;
    if !(edge > 0.0) {
        return Err(GeomError::Domain("mesh edge length must be positive".into()));
    }
    let ph = phases(s)?;
    let revolved: Vec<RevolvedMesh> = s
        .pieces
        .iter()
        .zip(&ph)
        .map(|(p, &phase)| {
            let c = p.carrier();
            let n_mer = ((profile_length(c) / edge).ceil() as usize).clamp(2, 4000);
            revolve_with_phase(c, n_mer, n_azimuth, phase)
        })
        .collect::<Result<_>>()?;
    let mut offsets = Vec::with_capacity(revolved.len());
    let mut verts: Vec<Vec3> = Vec::new();
    for r in &revolved {
        offsets.push(verts.len());
        verts.extend_from_slice(&r.mesh.vertices);
    }
    let global_ring = |i: usize, id: BoundaryId| -> Vec<usize> {
        ring_of(&revolved[i], id).iter().map(|&k| k + offsets[i]).collect()
    };
    let mut uf = UnionFind((0..verts.len()).collect());
    let mut hole_partner: BTreeMap<(usize, usize), (usize, BoundaryId)> = BTreeMap::new();
    for j in &s.joints {
        match (j.a.1, j.b.1) {
            (BoundaryId::Hole(k), other) => {
                hole_partner.insert((j.a.0, k), (j.b.0, other));
            }
            (other, BoundaryId::Hole(k)) => {
                hole_partner.insert((j.b.0, k), (j.a.0, other));
            }
            _ => {
                let ra = global_ring(j.a.0, j.a.1);
                let rb = global_ring(j.b.0, j.b.1);
                if ra.len() != rb.len() {
                    return Err(GeomError::Domain("joint rings differ in size".into()));
                }
                let scale = 1.0 + s.circle(j.a)?.radius();
                for &b in &rb {
                    let (best, d) = ra
                        .iter()
                        .map(|&a| (a, (verts[a] - verts[b]).norm()))
                        .min_by(|x, y| x.1.total_cmp(&y.1))
                        .unwrap_or((b, 0.0));
                    if d > 1e-6 * scale {
                        return Err(GeomError::Domain(format!("joint rings do not coincide (gap {d:.2e})")));
                    }
                    uf.union(best, b);
                }
            }
        }
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for (i, p) in s.pieces.iter().enumerate() {
        let off = offsets[i];
        match p {
            Piece::Axisym(_) => {
                tris.extend(revolved[i].mesh.triangles.iter().map(|t| t.map(|k| k + off)));
            }
            Piece::Perforated(pp) => {
                let circles: Vec<BoundaryCircle<'_>> = (0..pp.holes.len())
                    .map(|k| s.circle((i, BoundaryId::Hole(k))))
                    .collect::<Result<_>>()?;
                let (kept, loops) = cut_holes(&revolved[i], &pp.holes, &circles, &pp.label)?;
                tris.extend(kept.iter().map(|t| t.map(|k| k + off)));
                for (k, lp) in loops.iter().enumerate() {
                    let &(q, qid) = hole_partner
                        .get(&(i, k))
                        .ok_or_else(|| GeomError::Domain(format!("hole {k} of '{}' is not glued", pp.label)))?;
                    if matches!(s.pieces[q], Piece::Perforated(_)) && matches!(qid, BoundaryId::Hole(_)) {
                        return Err(GeomError::Domain("hole-to-hole joints cannot be meshed".into()));
                    }
                    let ring = global_ring(q, qid);
                    let lp: Vec<usize> = lp.iter().map(|&v| v + off).collect();
                    tris.extend(zipper(&pp.holes[k], &lp, &ring, &verts));
                }
            }
        }
    }
    let mut index = vec![usize::MAX; verts.len()];
    let mut out_v = Vec::new();
    let mut out_t = Vec::with_capacity(tris.len());
    for t in &tris {
        let mut nt = [0; 3];
        for k in 0..3 {
            let r = uf.find(t[k]);
            if index[r] == usize::MAX {
                index[r] = out_v.len();
                out_v.push(verts[r]);
            }
            nt[k] = index[r];
        }
        out_t.push(nt);
    }
    TriMesh::new(out_v, out_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{dumbbell, sphere, torus};

    #[test]
    fn single_sphere() {
        let s = CompositeSurface::single(sphere(1.0, Vec3::zeros()).unwrap());
        let m = mesh_composite(&s, 48, 0.05).unwrap();
        assert_eq!(m.euler_char, 2);
        assert!((m.area() - 4.0 * PI).abs() < 0.05);
    }

    #[test]
    fn glued_chain_and_torus() {
        let c = dumbbell(1.0, 1.0).unwrap();
        let m = mesh_composite(&c, 48, 0.05).unwrap();
        assert_eq!(m.euler_char, 2);
        let t = torus(2.0, 0.5).unwrap();
        let m = mesh_composite(&t, 48, 0.05).unwrap();
        assert_eq!(m.euler_char, 0);
    }
}
