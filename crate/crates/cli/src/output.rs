//! Writers for JSON, CSV, OFF and SVG outputs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use helfrich_core::inequalities::SweepRow;
use helfrich_core::minimize::{DiscreteProfile, MinimizeTrace};
use helfrich_core::surface::{AxisymPiece, CompositeSurface, Piece};

/// Writes to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct TraceCsvRow {
    iter: usize,
    energy: f64,
    area_violation: f64,
    volume_violation: f64,
    step: f64,
    grad_norm: f64,
}

pub fn trace_csv(t: &MinimizeTrace) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &t.rows {
        w.serialize(TraceCsvRow {
            iter: r.iter,
            energy: r.energy,
            area_violation: r.area_violation,
            volume_violation: r.volume_violation,
            step: r.step,
            grad_norm: r.grad_norm,
        })?;
    }
    Ok(w.into_inner()?)
}

fn meridian(p: &AxisymPiece, theta: f64) -> Vec<[f64; 2]> {
    let prof = &p.profile;
    (0..=200)
        .map(|k| {
            let t = prof.t_min + (prof.t_max - prof.t_min) * k as f64 / 200.0;
            let x = p.point(t, theta);
            [x.x, x.z]
        })
        .collect()
}

/// Polylines in the (x, z) plane: each piece's meridian at θ = 0 and θ = π.
pub fn composite_polylines(s: &CompositeSurface) -> Vec<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for piece in &s.pieces {
        let base = match piece {
            Piece::Axisym(a) => a,
            Piece::Perforated(p) => &p.base,
        };
        out.push(meridian(base, 0.0));
        out.push(meridian(base, std::f64::consts::PI));
    }
    out
}

/// The profile and its mirror image across the axis.
pub fn profile_polylines(p: &DiscreteProfile) -> Vec<Vec<[f64; 2]>> {
    vec![p.nodes.clone(), p.nodes.iter().map(|q| [-q[0], q[1]]).collect()]
}

pub fn svg(lines: &[Vec<[f64; 2]>]) -> Vec<u8> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in lines.iter().flatten() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let size = 600.0;
    let pad = 20.0;
    let scale = (size - 2.0 * pad) / span;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for line in lines {
        let pts: Vec<String> = line
            .iter()
            .map(|p| format!("{:.3},{:.3}", pad + (p[0] - lo[0]) * scale, size - pad - (p[1] - lo[1]) * scale))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s.into_bytes()
}
