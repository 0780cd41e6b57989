//! Numeric checks of the diameter bound, the isoperimetric inequalities,
//! the varifold bounds and the Γ-threshold, and the counterexample sweeps.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::Body;
use crate::compmesh::mesh_composite;
use crate::constructions::{
    bridged_double_sphere, bridged_immersed_sphere, dumbbell, ellipsoid, handled_sphere, pancake_sphere,
    snake_surface, sphere, torus, BridgedSurface,
};
use crate::diameter::{extrinsic_diameter, extrinsic_diameter_mesh, intrinsic_diameter};
use crate::error::{GeomError, Result};
use crate::functionals::{evaluate_functionals, FunctionalReport, SurfaceRef};
use crate::geom::Vec3;
use crate::kernels::iso_kernel_integrals;
use crate::mesh::{revolve_to_mesh, TriMesh};
use crate::quadrature::QuadSpec;
use crate::surface::CompositeSurface;

/// Relative slack granted to deterministic quadrature checks.
pub const DETERMINISTIC_REL_TOL: f64 = 1e-8;

/// Sharp isoperimetric constant in 𝒱 ≤ C𝒜^{3/2}, attained by balls.
pub fn isoperimetric_constant() -> f64 {
    1.0 / (6.0 * PI.sqrt())
}

/// One inequality lhs ≤ rhs with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
    pub err_est: f64,
    pub metadata: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, err_est: f64) -> Self {
        let residual = rhs - lhs;
        Self {
            name: name.into(),
            lhs,
            rhs,
            residual,
            pass: residual >= -err_est,
            err_est,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }
}

fn det_err(lhs: f64, rhs: f64, quad: f64) -> f64 {
    quad + DETERMINISTIC_REL_TOL * lhs.abs().max(rhs.abs())
}

/// Largest vertex or sample distance of either surface kind.
pub fn extrinsic_diameter_of(s: SurfaceRef<'_>) -> Result<f64> {
    match s {
        SurfaceRef::Composite(c) => extrinsic_diameter(c),
        SurfaceRef::Mesh(m) => Ok(extrinsic_diameter_mesh(m)),
    }
}

/// d(Σ) ≤ C∫|H − c₀n| for c₀ ≤ 0. With `c_cand` absent the surface's own
/// ratio is used, so the report only records the ratio.
pub fn check_diameter_bound(s: SurfaceRef<'_>, c0: f64, c_cand: Option<f64>, q: &QuadSpec) -> Result<InequalityReport> {
    if c0 > 0.0 {
        return Err(GeomError::Domain(
            "the diameter bound holds only for c0 ≤ 0 (it fails for c0 > 0)".into(),
        ));
    }
    let r = evaluate_functionals(s, c0, q)?;
    let d = extrinsic_diameter_of(s)?;
    if !(r.deficit_l1 > 0.0) {
        return Err(GeomError::Domain("zero curvature deficit".into()));
    }
    let ratio = d / r.deficit_l1;
    let c = c_cand.unwrap_or(ratio);
    let rhs = c * r.deficit_l1;
    Ok(InequalityReport::new("diameter_bound", d, rhs, det_err(d, rhs, c * r.err_est.deficit_l1))
        .with("c0", c0)
        .with("ratio", ratio)
        .with("c_used", c)
        .with("deficit_l1", r.deficit_l1))
}

/// Largest diameter-to-deficit ratio over a suite of surfaces.
pub fn empirical_diameter_constant(surfaces: &[SurfaceRef<'_>], c0: f64, q: &QuadSpec) -> Result<f64> {
    let mut c: f64 = 0.0;
    for s in surfaces {
        let r = check_diameter_bound(*s, c0, None, q)?;
        c = c.max(r.metadata["ratio"]);
    }
    Ok(c)
}

/// The isoperimetric theorem π𝒜 ≤ D² + c₀k₁ + 2c₀k₂ and its corollary
/// π𝒜 + 2|c₀|C⁻¹𝒱 ≤ D² + c₀k₁, with D = ∫|H − c₀n|. The corollary's constant
/// is max(`c_diam`, this body's own diameter ratio), for which it is implied
/// by the theorem.
pub fn check_isoperimetric(
    b: &Body,
    c0: f64,
    n_samples: usize,
    seed: u64,
    c_diam: f64,
    q: &QuadSpec,
) -> Result<(InequalityReport, InequalityReport)> {
    if c0 > 0.0 {
        return Err(GeomError::Domain("the isoperimetric inequalities need c0 ≤ 0".into()));
    }
    let surface: SurfaceRef<'_> = match &b.boundary {
        crate::body::BodyBoundary::Composite(s) => s.into(),
        crate::body::BodyBoundary::Mesh(m) => m.into(),
    };
    let r = evaluate_functionals(surface, c0, q)?;
    if r.volume <= 0.0 {
        return Err(GeomError::Orientation("the boundary does not enclose positive volume".into()));
    }
    let k = iso_kernel_integrals(b, c0, n_samples, seed)?;
    let d = r.deficit_l1;
    let d_err = 2.0 * d * r.err_est.deficit_l1;
    let lhs = PI * r.area;
    let rhs = d * d + c0 * k.k1 + 2.0 * c0 * k.k2;
    let mc = c0.abs() * k.k1_err + 2.0 * c0.abs() * k.k2_err;
    let thm = InequalityReport::new("isoperimetric_theorem", lhs, rhs, mc + det_err(lhs, rhs, d_err + PI * r.err_est.area))
        .with("c0", c0)
        .with("k1", k.k1)
        .with("k2", k.k2)
        .with("deficit_l1", d);
    let ratio = extrinsic_diameter_of(surface)? / d;
    let c = c_diam.max(ratio);
    let lhs_c = PI * r.area + 2.0 * c0.abs() / c * r.volume;
    let rhs_c = d * d + c0 * k.k1;
    let cor = InequalityReport::new(
        "isoperimetric_corollary",
        lhs_c,
        rhs_c,
        c0.abs() * k.k1_err + det_err(lhs_c, rhs_c, d_err + PI * r.err_est.area),
    )
    .with("c0", c0)
    .with("c_diam", c)
    .with("k1", k.k1)
    .with("volume", r.volume);
    Ok((thm, cor))
}

/// Checks on a precomputed report: 𝒱 ≤ C𝒜^{3/2}, 𝒲 ≤ 2𝓗 + (c₀²/2)𝒜 and
/// 𝓗 ≤ 2𝒲 + (c₀²/2)𝒜.
pub fn varifold_bounds(r: &FunctionalReport) -> Vec<InequalityReport> {
    let c = isoperimetric_constant();
    let e = &r.err_est;
    let c2 = 0.5 * r.c0 * r.c0;
    let iso_rhs = c * r.area.powf(1.5);
    let w_rhs = 2.0 * r.helfrich + c2 * r.area;
    let h_rhs = 2.0 * r.willmore + c2 * r.area;
    vec![
        InequalityReport::new(
            "volume_by_area",
            r.volume,
            iso_rhs,
            det_err(r.volume, iso_rhs, e.volume + 1.5 * c * r.area.sqrt() * e.area),
        )
        .with("c", c),
        InequalityReport::new(
            "willmore_by_helfrich",
            r.willmore,
            w_rhs,
            det_err(r.willmore, w_rhs, e.willmore + 2.0 * e.helfrich + c2 * e.area),
        )
        .with("c0", r.c0),
        InequalityReport::new(
            "helfrich_by_willmore",
            r.helfrich,
            h_rhs,
            det_err(r.helfrich, h_rhs, e.helfrich + 2.0 * e.willmore + c2 * e.area),
        )
        .with("c0", r.c0),
    ]
}

pub fn check_varifold_bounds(s: SurfaceRef<'_>, c0: f64, q: &QuadSpec) -> Result<Vec<InequalityReport>> {
    Ok(varifold_bounds(&evaluate_functionals(s, c0, q)?))
}

/// The expansion 𝓗 = 𝒲 − (c₀/2)∫⟨H, n⟩ + (c₀²/4)𝒜 as a two-sided check.
pub fn expansion_identity(r: &FunctionalReport) -> InequalityReport {
    let gap = (r.helfrich - r.expanded_helfrich()).abs();
    InequalityReport::new("expansion_identity", gap, 0.0, det_err(r.helfrich, r.helfrich, r.expansion_err()))
        .with("c0", r.c0)
        .with("helfrich", r.helfrich)
}

/// Inputs of the existence threshold η_G < 8π + Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaInputs {
    pub c0: f64,
    pub a0: f64,
    pub v0: f64,
    pub c_diam: f64,
}

impl GammaInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.v0 > 0.0 && self.c_diam > 0.0) {
            return Err(GeomError::Domain("a0, v0 and C_diam must be positive".into()));
        }
        let v_max = isoperimetric_constant() * self.a0.powf(1.5);
        if self.v0 > v_max * (1.0 + 1e-9) {
            return Err(GeomError::Infeasible(format!(
                "volume {} exceeds the largest volume {v_max} enclosed by area {}",
                self.v0, self.a0
            )));
        }
        Ok(())
    }
}

/// Lower bound for Γ(c₀, a₀, v₀) and the threshold 8π + Γ.
pub fn gamma_threshold(g: &GammaInputs) -> Result<(f64, f64)> {
    g.validate()?;
    let gamma = if g.c0 < 0.0 {
        let l = g.c0.abs() * g.v0 / (8.0 * PI * PI * g.c_diam * g.c_diam * g.a0);
        4.0 * PI * ((1.0 + l).sqrt() - 1.0)
    } else {
        -6.0 * g.c0 * (4.0 * PI * PI * g.v0).cbrt()
    };
    Ok((gamma, 8.0 * PI + gamma))
}

/// One row of a sweep, with the fixed columns first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub area: f64,
    pub volume: f64,
    pub total_mc: f64,
    pub willmore: f64,
    pub helfrich: f64,
    pub deficit_l1: f64,
    pub sff_l2: f64,
    pub diam_ext: Option<f64>,
    pub diam_int: Option<f64>,
    /// 𝓗(Σ_b) − 𝓗(limit) with the ¼ normalization.
    pub gap: Option<f64>,
    /// ∫|H − c₀n|² difference, four times `gap`.
    pub gap_unnormalized: Option<f64>,
    pub count: Option<usize>,
}

impl SweepRow {
    fn from_report(parameter: f64, r: &FunctionalReport) -> Self {
        Self {
            parameter,
            area: r.area,
            volume: r.volume,
            total_mc: r.total_mc,
            willmore: r.willmore,
            helfrich: r.helfrich,
            deficit_l1: r.deficit_l1,
            sff_l2: r.sff_l2,
            diam_ext: None,
            diam_int: None,
            gap: None,
            gap_unnormalized: None,
            count: None,
        }
    }
}

/// Rows in parameter order, skipped parameters with the reason, and the
/// checks the sweep asserts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<(f64, String)>,
    pub checks: Vec<InequalityReport>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check_decreasing(list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(GeomError::Domain("empty sweep".into()));
    }
    if list.iter().any(|x| !(x.is_finite() && *x > 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(GeomError::Domain("sweep parameters must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Run `f` on each parameter in parallel; infeasible parameters are skipped
/// and any other error aborts.
fn run_rows<F>(list: &[f64], f: F) -> Result<(Vec<SweepRow>, Vec<(f64, String)>)>
where
    F: Fn(f64) -> Result<SweepRow> + Sync,
{
    let out: Vec<Result<SweepRow>> = list.par_iter().map(|&p| f(p)).collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (p, r) in list.iter().zip(out) {
        match r {
            Ok(row) => rows.push(row),
            Err(GeomError::Infeasible(msg)) => skipped.push((*p, msg)),
            Err(e) => return Err(e),
        }
    }
    Ok((rows, skipped))
}

fn strictly_increasing(name: &str, rows: &[SweepRow], value: impl Fn(&SweepRow) -> f64) -> Vec<InequalityReport> {
    rows.windows(2)
        .map(|w| {
            InequalityReport::new(name, value(&w[0]), value(&w[1]), 0.0)
                .with("from", w[0].parameter)
                .with("to", w[1].parameter)
        })
        .map(|mut r| {
            r.pass = r.residual > 0.0;
            r
        })
        .collect()
}

/// Energy gaps of the bridged surfaces against their limits. The gap target
/// is −c₀²π/8 with the ¼ normalization (−c₀²π/2 unnormalized).
pub fn lsc_deficit_sweep(c0: f64, b_list: &[f64], q: &QuadSpec) -> Result<SweepReport> {
    if c0 == 0.0 || !c0.is_finite() {
        return Err(GeomError::Domain("lsc sweep needs c0 ≠ 0".into()));
    }
    check_decreasing(b_list)?;
    let build = |b: f64| -> Result<BridgedSurface> {
        if c0 < 0.0 {
            bridged_double_sphere(c0, b)
        } else {
            bridged_immersed_sphere(c0, b)
        }
    };
    let (rows, skipped) = run_rows(b_list, |b| {
        let s = build(b)?;
        let r = evaluate_functionals(&s.surface, c0, q)?;
        let l = evaluate_functionals(&s.limit, c0, q)?;
        let mut row = SweepRow::from_report(b, &r);
        let gap = r.helfrich - l.helfrich;
        row.gap = Some(gap);
        row.gap_unnormalized = Some(4.0 * gap);
        row.count = Some(s.info.genus);
        Ok(row)
    })?;
    let target = -c0 * c0 * PI / 8.0;
    let mut checks = strictly_increasing("sff_l2_increasing", &rows, |r| r.sff_l2);
    if let Some(last) = rows.last() {
        let gap = last.gap.unwrap_or(f64::NAN);
        let gu = last.gap_unnormalized.unwrap_or(f64::NAN);
        checks.push(
            InequalityReport::new("gap_within_5pct", (gap - target).abs(), 0.05 * target.abs(), 0.0)
                .with("b", last.parameter)
                .with("gap", gap)
                .with("target", target),
        );
        checks.push(
            InequalityReport::new("gap_unnormalized_within_5pct", (gu - 4.0 * target).abs(), 0.2 * target.abs(), 0.0)
                .with("b", last.parameter)
                .with("gap", gu)
                .with("target", 4.0 * target),
        );
    }
    Ok(SweepReport {
        name: format!("lsc(c0={c0})"),
        rows,
        skipped,
        checks,
    })
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Total mean curvature of the handled spheres, with the log–log slope of
/// total_mc − 8π against a.
pub fn total_mc_sweep(a_list: &[f64], q: &QuadSpec) -> Result<SweepReport> {
    check_decreasing(a_list)?;
    let (rows, skipped) = run_rows(a_list, |a| {
        let h = handled_sphere(a)?;
        let r = evaluate_functionals(&h.surface, 0.0, q)?;
        let mut row = SweepRow::from_report(a, &r);
        row.count = Some(h.n_bumps);
        Ok(row)
    })?;
    let mut checks = strictly_increasing("total_mc_increasing", &rows, |r| r.total_mc);
    for r in &rows {
        let n = r.count.unwrap_or(0) as f64;
        checks.push(
            InequalityReport::new("area_envelope", (r.area - 4.0 * PI).abs(), 20.0 * n * r.parameter, 0.0)
                .with("a", r.parameter)
                .with("n_bumps", n),
        );
    }
    if rows.len() >= 2 {
        let x: Vec<f64> = rows.iter().map(|r| r.parameter.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| (r.total_mc - 8.0 * PI).ln()).collect();
        let s = fit_slope(&x, &y);
        checks.push(InequalityReport::new("slope_at_least", -0.25, s, 0.0).with("slope", s));
        checks.push(InequalityReport::new("slope_at_most", s, -0.08, 0.0).with("slope", s));
    }
    Ok(SweepReport {
        name: "total_mc".into(),
        rows,
        skipped,
        checks,
    })
}

/// Mesh resolution for intrinsic diameters of snakes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnakeMeshing {
    pub n_azimuth: usize,
    pub edge: f64,
}

impl Default for SnakeMeshing {
    fn default() -> Self {
        Self {
            n_azimuth: 32,
            edge: 0.02,
        }
    }
}

/// Intrinsic and extrinsic diameters of snakes against their deficits at
/// c₀ = −2/√a.
pub fn diam_ratio_sweep(a_list: &[f64], mesh: SnakeMeshing, q: &QuadSpec) -> Result<SweepReport> {
    check_decreasing(a_list)?;
    let (rows, skipped) = run_rows(a_list, |a| {
        let sn = snake_surface(a)?;
        let r = evaluate_functionals(&sn.surface, sn.info.c0, q)?;
        let m = mesh_composite(&sn.surface, mesh.n_azimuth, mesh.edge)?;
        let mut row = SweepRow::from_report(a, &r);
        row.diam_ext = Some(extrinsic_diameter(&sn.surface)?);
        row.diam_int = Some(intrinsic_diameter(&m)?);
        row.count = Some(sn.info.n_cells);
        Ok(row)
    })?;
    let mut checks = Vec::new();
    if let Some(first) = rows.first() {
        let base = first.diam_int.unwrap_or(0.0) * first.parameter;
        for r in &rows {
            let v = r.diam_int.unwrap_or(0.0) * r.parameter;
            checks.push(InequalityReport::new("intrinsic_times_a_bounded_below", 0.5 * base, v, 0.0).with("a", r.parameter));
        }
        let d: Vec<f64> = rows.iter().map(|r| r.deficit_l1 * r.parameter.sqrt()).collect();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        checks.push(InequalityReport::new("deficit_sqrt_a_within_factor_3", hi, 3.0 * lo, 0.0));
        let ratio0 = first.diam_ext.unwrap_or(0.0) / first.deficit_l1;
        for r in &rows {
            let ratio = r.diam_ext.unwrap_or(0.0) / r.deficit_l1;
            checks.push(
                InequalityReport::new("extrinsic_ratio_bounded", ratio, ratio0, DETERMINISTIC_REL_TOL * ratio0)
                    .with("a", r.parameter),
            );
        }
        let e: Vec<f64> = rows.iter().filter_map(|r| r.diam_ext).collect();
        let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        checks.push(InequalityReport::new("extrinsic_constant", hi - lo, 1e-3 * hi, 0.0));
    }
    Ok(SweepReport {
        name: "diam_ratio".into(),
        rows,
        skipped,
        checks,
    })
}

/// A named fixture surface.
#[derive(Debug, Clone)]
pub enum Fixture {
    Composite(CompositeSurface),
    Mesh(TriMesh),
}

impl Fixture {
    pub fn as_ref(&self) -> SurfaceRef<'_> {
        match self {
            Fixture::Composite(c) => c.into(),
            Fixture::Mesh(m) => m.into(),
        }
    }
}

/// Closed surfaces used by the suite-wide checks.
pub fn fixture_suite() -> Result<Vec<(String, Fixture)>> {
    let single = |p| Fixture::Composite(CompositeSurface::single(p));
    Ok(vec![
        ("unit_sphere".into(), single(sphere(1.0, Vec3::zeros())?)),
        ("sphere_r2_offset".into(), single(sphere(2.0, Vec3::new(1.0, -2.0, 0.5))?)),
        ("oblate_ellipsoid".into(), single(ellipsoid(1.0, 0.6)?)),
        ("prolate_ellipsoid".into(), single(ellipsoid(0.7, 1.3)?)),
        ("torus".into(), Fixture::Composite(torus(2.0, 0.5)?)),
        ("dumbbell".into(), Fixture::Composite(dumbbell(1.0, 1.0)?)),
        ("handled_sphere".into(), Fixture::Composite(handled_sphere(0.04)?.surface)),
        ("bridged_double_sphere".into(), Fixture::Composite(bridged_double_sphere(-2.0, 0.2)?.surface)),
        ("bridged_immersed_sphere".into(), Fixture::Composite(bridged_immersed_sphere(2.0, 0.2)?.surface)),
        ("pancake_sphere".into(), Fixture::Composite(pancake_sphere(0.3)?)),
        ("ellipsoid_mesh".into(), Fixture::Mesh(revolve_to_mesh(&ellipsoid(1.0, 0.6)?, 64, 128)?)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_diameter_ratios() {
        let s = CompositeSurface::single(sphere(1.0, Vec3::zeros()).unwrap());
        let q = QuadSpec::default();
        let r = check_diameter_bound((&s).into(), 0.0, None, &q).unwrap();
        assert!((r.metadata["ratio"] - 1.0 / (4.0 * PI)).abs() < 1e-9);
        let r = check_diameter_bound((&s).into(), -1.0, None, &q).unwrap();
        assert!((r.metadata["ratio"] - 2.0 / (12.0 * PI)).abs() < 1e-9);
        assert!(check_diameter_bound((&s).into(), 1.0, None, &q).is_err());
    }

    #[test]
    fn gamma_branches() {
        let g = GammaInputs {
            c0: 0.0,
            a0: 4.0 * PI,
            v0: 1.0,
            c_diam: 1.0,
        };
        assert_eq!(gamma_threshold(&g).unwrap(), (0.0, 8.0 * PI));
        let bad = GammaInputs { v0: 10.0, ..g };
        assert!(gamma_threshold(&bad).is_err());
    }
}
