//! Subcommand implementations.

use anyhow::{anyhow, bail, Result};
use serde_json::{json, Value};

use helfrich_core::compmesh::mesh_composite;
use helfrich_core::constructions::snake_a_for_side;
use helfrich_core::functionals::{evaluate_functionals, evaluate_open, SurfaceRef};
use helfrich_core::inequalities::{
    check_diameter_bound, check_isoperimetric, diam_ratio_sweep, expansion_identity, gamma_threshold, lsc_deficit_sweep,
    total_mc_sweep, varifold_bounds, GammaInputs, InequalityReport, SnakeMeshing, SweepReport,
};
use helfrich_core::mesh::{profile_length, revolve_to_mesh};
use helfrich_core::mesh_io::{emit_mesh, MeshFormat};
use helfrich_core::minimize::{discrete_energy, minimize_helfrich, threshold_report, DiscreteProfile, MinimizeConfig};
use helfrich_core::surface::Piece;
use helfrich_core::QuadSpec;

use crate::output::{composite_polylines, emit, json, profile_polylines, svg, sweep_csv, trace_csv};
use crate::spec::{Built, SurfaceSpec};
use crate::{Cli, Command, Common, MinimizeArgs, Sweep, Verify};

pub enum Outcome {
    Pass,
    CheckFailed(String),
}

fn outcome(reports: &[InequalityReport]) -> Outcome {
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::CheckFailed(failed.join(", "))
    }
}

fn quad(c: &Common) -> Result<QuadSpec> {
    let q = QuadSpec::with_rel_tol(c.quad_tol);
    q.validate()?;
    Ok(q)
}

fn load_spec(c: &Common) -> Result<SurfaceSpec> {
    let path = c.spec.as_ref().ok_or_else(|| anyhow!("this command needs --spec"))?;
    SurfaceSpec::load(path)?.resolve(c.c0)
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Construct => "construct".into(),
        Command::Eval => "eval".into(),
        Command::Verify(v) => format!("verify {}", format!("{v:?}").to_lowercase()),
        Command::Sweep(s) => format!("sweep {}", format!("{s:?}").split([' ', '{']).next().unwrap_or("").to_lowercase()),
        Command::Minimize(_) => "minimize".into(),
    }
}

fn dry_run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let spec = match &c.spec {
        Some(_) => Some(load_spec(c)?),
        None => None,
    };
    quad(c)?;
    let mut rec = json!({
        "command": command_name(&cli.command),
        "spec": spec,
        "c0": c.c0,
        "a0": c.a0,
        "v0": c.v0,
        "c_diam": c.c_diam,
        "samples": c.samples,
        "seed": c.seed,
        "threads": c.threads,
        "quad_tol": c.quad_tol,
        "n_azimuth": c.n_azimuth,
        "edge": c.edge,
    });
    match &cli.command {
        Command::Sweep(Sweep::Lsc { b }) => rec["b"] = json!(b),
        Command::Sweep(Sweep::Totalmc { a }) => rec["a"] = json!(a),
        Command::Sweep(Sweep::Diam { a }) => rec["a"] = json!(diam_grid(a)?),
        Command::Minimize(m) => {
            let cfg = minimize_config(c, m)?;
            cfg.validate()?;
            rec["minimize"] = serde_json::to_value(cfg)?;
            rec["nodes"] = json!(m.nodes);
        }
        Command::Verify(Verify::Gamma) => gamma_inputs(c)?.validate()?,
        _ => {}
    }
    emit(None, &json(&rec)?)?;
    Ok(Outcome::Pass)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    if cli.common.dry_run {
        return dry_run(cli);
    }
    let c = &cli.common;
    match &cli.command {
        Command::Construct => construct(c),
        Command::Eval => eval(c),
        Command::Verify(v) => verify(c, v),
        Command::Sweep(s) => sweep(c, s),
        Command::Minimize(m) => minimize(c, m),
    }
}

fn write_mesh_and_svg(c: &Common, built: &Built) -> Result<()> {
    if let Some(path) = &c.mesh_out {
        let mesh = match built {
            Built::Composite { surface, .. } => match (surface.validate_closed(), surface.pieces.as_slice()) {
                (Ok(()), _) => mesh_composite(surface, c.n_azimuth.unwrap_or(64), c.edge.unwrap_or(0.05))?,
                (Err(_), [Piece::Axisym(p)]) => {
                    let n_meridian = ((profile_length(p) / c.edge.unwrap_or(0.05)).ceil() as usize).max(4);
                    revolve_to_mesh(p, n_meridian, c.n_azimuth.unwrap_or(64))?
                }
                (Err(e), _) => bail!("only closed composites and single open pieces can be meshed: {e}"),
            },
            Built::Mesh(m) => m.clone(),
            Built::Profile(p) => p.to_mesh(c.n_azimuth.unwrap_or(64))?,
        };
        emit(Some(path), &emit_mesh(&mesh, MeshFormat::Off))?;
    }
    if let Some(path) = &c.svg_out {
        let lines = match built {
            Built::Composite { surface, .. } => composite_polylines(surface),
            Built::Profile(p) => profile_polylines(p),
            Built::Mesh(_) => bail!("SVG meridian plots need an axisymmetric surface"),
        };
        emit(Some(path), &svg(&lines))?;
    }
    Ok(())
}

fn construct(c: &Common) -> Result<Outcome> {
    let spec = load_spec(c)?;
    let built = spec.build()?;
    let rec = match &built {
        Built::Composite { surface, info } => json!({
            "spec": spec,
            "label": surface.label,
            "pieces": surface.pieces.len(),
            "joints": surface.joints.len(),
            "closed": surface.validate_closed().is_ok(),
            "info": info,
        }),
        Built::Mesh(m) => json!({
            "spec": spec,
            "vertices": m.vertices.len(),
            "triangles": m.triangles.len(),
            "euler_characteristic": m.euler_char,
            "closed": m.is_closed(),
        }),
        Built::Profile(p) => json!({
            "spec": spec,
            "nodes": p.n_nodes(),
            "closed": true,
            "length": p.length(),
        }),
    };
    write_mesh_and_svg(c, &built)?;
    emit(c.out.as_deref(), &json(&rec)?)?;
    Ok(Outcome::Pass)
}

fn eval(c: &Common) -> Result<Outcome> {
    let spec = load_spec(c)?;
    let q = quad(c)?;
    let built = spec.build()?;
    let rec = match &built {
        Built::Composite { surface, info } => {
            let closed = surface.validate_closed().is_ok();
            let r = if closed {
                evaluate_functionals(surface, c.c0, &q)?
            } else {
                evaluate_open(surface, c.c0, &q)?
            };
            json!({"spec": spec, "closed": closed, "functionals": r, "info": info})
        }
        Built::Mesh(m) => json!({"spec": spec, "closed": true, "functionals": evaluate_functionals(m, c.c0, &q)?}),
        Built::Profile(p) => json!({"spec": spec, "closed": true, "functionals": discrete_energy(p, c.c0)?, "c0": c.c0}),
    };
    write_mesh_and_svg(c, &built)?;
    emit(c.out.as_deref(), &json(&rec)?)?;
    Ok(Outcome::Pass)
}

/// Meshes and profiles are checked through their triangulations.
fn with_surface<T>(c: &Common, spec: &SurfaceSpec, f: impl FnOnce(SurfaceRef<'_>) -> Result<T>) -> Result<T> {
    match spec.build()? {
        Built::Composite { surface, .. } => f((&surface).into()),
        Built::Mesh(m) => f((&m).into()),
        Built::Profile(p) => {
            let m = p.to_mesh(c.n_azimuth.unwrap_or(128))?;
            f((&m).into())
        }
    }
}

fn gamma_inputs(c: &Common) -> Result<GammaInputs> {
    Ok(GammaInputs {
        c0: c.c0,
        a0: c.a0.ok_or_else(|| anyhow!("--a0 is required"))?,
        v0: c.v0.ok_or_else(|| anyhow!("--v0 is required"))?,
        c_diam: c.c_diam.unwrap_or(1.0),
    })
}

fn verify(c: &Common, v: &Verify) -> Result<Outcome> {
    let q = quad(c)?;
    let reports: Vec<InequalityReport> = match v {
        Verify::Diameter => {
            let spec = load_spec(c)?;
            vec![with_surface(c, &spec, |s| Ok(check_diameter_bound(s, c.c0, c.c_diam, &q)?))?]
        }
        Verify::Iso => {
            let spec = load_spec(c)?;
            let body = spec.body(c.n_azimuth.unwrap_or(128))?;
            let (thm, cor) = check_isoperimetric(&body, c.c0, c.samples, c.seed, c.c_diam.unwrap_or(0.0), &q)?;
            vec![thm, cor]
        }
        Verify::Bounds => {
            let spec = load_spec(c)?;
            with_surface(c, &spec, |s| {
                let r = evaluate_functionals(s, c.c0, &q)?;
                let mut out = varifold_bounds(&r);
                out.push(expansion_identity(&r));
                Ok(out)
            })?
        }
        Verify::Gamma => {
            let g = gamma_inputs(c)?;
            let (gamma, threshold) = gamma_threshold(&g)?;
            emit(
                c.out.as_deref(),
                &json(&json!({"inputs": g, "gamma": gamma, "threshold": threshold}))?,
            )?;
            return Ok(Outcome::Pass);
        }
    };
    emit(c.out.as_deref(), &json(&reports)?)?;
    Ok(outcome(&reports))
}

/// The explicit list, or the snake sides n = 2, 3, 4.
fn diam_grid(a: &[f64]) -> Result<Vec<f64>> {
    if !a.is_empty() {
        return Ok(a.to_vec());
    }
    (2..=4).map(|n| Ok(snake_a_for_side(n)?)).collect()
}

fn sweep(c: &Common, s: &Sweep) -> Result<Outcome> {
    let q = quad(c)?;
    let report: SweepReport = match s {
        Sweep::Lsc { b } => lsc_deficit_sweep(c.c0, b, &q)?,
        Sweep::Totalmc { a } => total_mc_sweep(a, &q)?,
        Sweep::Diam { a } => {
            let mesh = SnakeMeshing {
                n_azimuth: c.n_azimuth.unwrap_or(SnakeMeshing::default().n_azimuth),
                edge: c.edge.unwrap_or(SnakeMeshing::default().edge),
            };
            diam_ratio_sweep(&diam_grid(a)?, mesh, &q)?
        }
    };
    for (p, why) in &report.skipped {
        eprintln!("skipped {p}: {why}");
    }
    if report.rows.is_empty() {
        bail!("every sweep parameter was infeasible");
    }
    emit(c.out.as_deref(), &sweep_csv(&report.rows)?)?;
    for r in &report.checks {
        eprintln!(
            "{} {}: lhs {:.6e} rhs {:.6e} residual {:.3e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.lhs,
            r.rhs,
            r.residual
        );
    }
    Ok(outcome(&report.checks))
}

fn minimize_config(c: &Common, m: &MinimizeArgs) -> Result<MinimizeConfig> {
    let a0 = c.a0.ok_or_else(|| anyhow!("--a0 is required"))?;
    let v0 = c.v0.ok_or_else(|| anyhow!("--v0 is required"))?;
    Ok(MinimizeConfig {
        max_iters: m.max_iters,
        constraint_tol: m.constraint_tol,
        multilevel: !m.single_level,
        seed: c.seed,
        ..MinimizeConfig::new(c.c0, a0, v0)
    })
}

/// Starting profile: a profile spec, the meridian of a sphere or ellipsoid
/// spec, or an ellipse of aspect 1.2 : 0.8 scaled to area a₀.
fn start_profile(c: &Common, n: usize, a0: f64) -> Result<DiscreteProfile> {
    let Some(_) = &c.spec else {
        let p = DiscreteProfile::ellipse(1.2, 0.8, n)?;
        return Ok(p.scaled((a0 / p.area()).sqrt()));
    };
    let spec = load_spec(c)?;
    Ok(match spec.kind.as_str() {
        "profile" => match spec.build()? {
            Built::Profile(p) if p.n_nodes() == n => p,
            Built::Profile(p) => p.resampled_to(n),
            _ => unreachable!(),
        },
        "sphere" => DiscreteProfile::sphere(spec.params["r"], n)?.translated(spec.params["cz"]),
        "ellipsoid" => DiscreteProfile::ellipse(spec.params["a"], spec.params["c"], n)?,
        other => bail!("minimize starts from a profile, sphere or ellipsoid spec (got '{other}')"),
    })
}

fn minimize(c: &Common, m: &MinimizeArgs) -> Result<Outcome> {
    let cfg = minimize_config(c, m)?;
    let p0 = start_profile(c, m.nodes, cfg.a0)?;
    let trace = minimize_helfrich(&p0, &cfg)?;
    let g = GammaInputs {
        c0: cfg.c0,
        a0: cfg.a0,
        v0: cfg.v0,
        c_diam: c.c_diam.unwrap_or(1.0),
    };
    let threshold: Value = match threshold_report(&trace, &g) {
        Ok(r) => serde_json::to_value(r)?,
        Err(e) => json!({"unavailable": e.to_string()}),
    };
    let last = trace.rows.last();
    let rec = json!({
        "config": cfg,
        "nodes": m.nodes,
        "converged": trace.converged,
        "iterations": trace.rows.len(),
        "monotone": trace.monotone(),
        "initial": trace.initial,
        "final": trace.final_energy,
        "area_violation": last.map(|r| r.area_violation),
        "volume_violation": last.map(|r| r.volume_violation),
        "dimpled": trace.final_profile.dimpled(),
        "threshold": threshold,
    });
    if let Some(path) = &m.trace_out {
        emit(Some(path), &trace_csv(&trace)?)?;
    }
    if let Some(path) = &m.profile_out {
        emit(Some(path), &json(&SurfaceSpec::profile(&trace.final_profile))?)?;
    }
    write_mesh_and_svg(c, &Built::Profile(trace.final_profile.clone()))?;
    emit(c.out.as_deref(), &json(&rec)?)?;
    if !trace.monotone() {
        return Ok(Outcome::CheckFailed("accepted-step objective increased".into()));
    }
    Ok(Outcome::Pass)
}
