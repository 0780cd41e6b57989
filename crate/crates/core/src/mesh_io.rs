//! ASCII OFF and OBJ reading and writing.

use std::fmt::Write as _;

use crate::error::{GeomError, Result};
use crate::geom::Vec3;
use crate::mesh::TriMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &str) -> Option<Self> {
        let lower = path.to_ascii_lowercase();
        if lower.ends_with(".off") {
            Some(Self::Off)
        } else if lower.ends_with(".obj") {
            Some(Self::Obj)
        } else {
            None
        }
    }
}

fn perr(line: usize, msg: impl Into<String>) -> GeomError {
    GeomError::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T> {
    tok.ok_or_else(|| perr(line, "missing value"))?
        .parse()
        .map_err(|_| perr(line, "malformed number"))
}

/// Fan-triangulate a polygon.
fn fan(face: &[usize], out: &mut Vec<[usize; 3]>) {
    for k in 1..face.len() - 1 {
        out.push([face[0], face[k], face[k + 1]]);
    }
}

fn parse_off(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
    let mut counts_line = None;
    if let Some(rest) = header.strip_prefix("OFF") {
        if !rest.trim().is_empty() {
            counts_line = Some((ln, rest.trim().to_string()));
        }
    } else {
        return Err(perr(ln, "missing OFF header"));
    }
    let (ln, counts) = match counts_line {
        Some(c) => c,
        None => {
            let (l, s) = lines.next().ok_or_else(|| perr(ln, "missing counts"))?;
            (l, s.to_string())
        }
    };
    let mut it = counts.split_whitespace();
    let nv: usize = num(it.next(), ln)?;
    let nf: usize = num(it.next(), ln)?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines.next().ok_or_else(|| perr(ln, "too few vertices"))?;
        let mut it = s.split_whitespace();
        verts.push(Vec3::new(num(it.next(), l)?, num(it.next(), l)?, num(it.next(), l)?));
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines.next().ok_or_else(|| perr(ln, "too few faces"))?;
        let mut it = s.split_whitespace();
        let k: usize = num(it.next(), l)?;
        if k < 3 {
            return Err(perr(l, "face with fewer than 3 vertices"));
        }
        let face: Vec<usize> = (0..k).map(|_| num(it.next(), l)).collect::<Result<_>>()?;
        if face.iter().any(|&v| v >= nv) {
            return Err(perr(l, "vertex index out of range"));
        }
        fan(&face, &mut tris);
    }
    Ok((verts, tris))
}

fn parse_obj(text: &str) -> Result<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        let mut it = s.split_whitespace();
        match it.next() {
            Some("v") => verts.push(Vec3::new(num(it.next(), l)?, num(it.next(), l)?, num(it.next(), l)?)),
            Some("f") => {
                let mut face = Vec::new();
                for tok in it {
                    let idx: i64 = num(tok.split('/').next(), l)?;
                    let v = if idx > 0 {
                        idx as usize - 1
                    } else if idx < 0 {
                        let back = (-idx) as usize;
                        if back > verts.len() {
                            return Err(perr(l, "relative index out of range"));
                        }
                        verts.len() - back
                    } else {
                        return Err(perr(l, "zero vertex index"));
                    };
                    face.push(v);
                }
                if face.len() < 3 {
                    return Err(perr(l, "face with fewer than 3 vertices"));
                }
                fan(&face, &mut tris);
            }
            _ => {}
        }
    }
    if tris.iter().any(|t: &[usize; 3]| t.iter().any(|&v| v >= verts.len())) {
        return Err(perr(0, "vertex index out of range"));
    }
    Ok((verts, tris))
}

/// Parse and validate a closed mesh.
pub fn parse_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriMesh> {
    let text = std::str::from_utf8(bytes).map_err(|_| perr(0, "not UTF-8"))?;
    let (v, t) = match format {
        MeshFormat::Off => parse_off(text)?,
        MeshFormat::Obj => parse_obj(text)?,
    };
    TriMesh::new(v, t)
}

/// Serialize with shortest round-trip float formatting.
pub fn emit_mesh(m: &TriMesh, format: MeshFormat) -> Vec<u8> {
    let mut s = String::new();
    match format {
        MeshFormat::Off => {
            let _ = writeln!(s, "OFF\n{} {} 0", m.vertices.len(), m.triangles.len());
            for v in &m.vertices {
                let _ = writeln!(s, "{:e} {:e} {:e}", v.x, v.y, v.z);
            }
            for t in &m.triangles {
                let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
            }
        }
        MeshFormat::Obj => {
            for v in &m.vertices {
                let _ = writeln!(s, "v {:e} {:e} {:e}", v.x, v.y, v.z);
            }
            for t in &m.triangles {
                let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
            }
        }
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    const OCTA: &str = "OFF\n6 8 0\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

    #[test]
    fn octahedron_off() {
        let m = parse_mesh(OCTA.as_bytes(), MeshFormat::Off).unwrap();
        assert_eq!(m.vertices.len(), 6);
        assert_eq!(m.triangles.len(), 8);
        assert_eq!(m.euler_char, 2);
    }

    #[test]
    fn round_trip_both_formats() {
        let m = parse_mesh(OCTA.as_bytes(), MeshFormat::Off).unwrap();
        for f in [MeshFormat::Off, MeshFormat::Obj] {
            let back = parse_mesh(&emit_mesh(&m, f), f).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert!(matches!(
            parse_mesh(b"OFF\n3 1 0\n0 0 0\n1 x 0\n", MeshFormat::Off),
            Err(GeomError::Parse { .. })
        ));
    }
}
