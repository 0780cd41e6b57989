//! Adaptive Gauss–Legendre quadrature.
//!
//! Every panel is integrated once on the whole interval and once on its two
//! halves; the difference is the panel error estimate. The panel with the
//! largest scaled error is bisected until the summed estimate meets the
//! tolerance. Integrands may be vector valued, in which case every component
//! must meet its own tolerance.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Tolerances and panel parameters for [`integrate_1d`] and friends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub nodes_per_panel: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_depth: 48,
            nodes_per_panel: 10,
        }
    }
}

impl QuadSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(GeomError::Domain("quadrature tolerances must be positive".into()));
        }
        if self.nodes_per_panel < 2 {
            return Err(GeomError::Domain("nodes_per_panel must be at least 2".into()));
        }
        Ok(())
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// Cached Gauss–Legendre rule with `n` nodes.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss rule cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(compute_rule(n)))
        .clone()
}

/// Pairwise (tree) summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Fixed-rule integration with the given Gauss rule on [a, b].
pub fn fixed_gauss<const N: usize, F>(f: &F, a: f64, b: f64, rule: &GaussRule) -> [f64; N]
where
    F: Fn(f64) -> [f64; N],
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; N];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * x);
        for k in 0..N {
            acc[k] += w * v[k];
        }
    }
    for a in acc.iter_mut() {
        *a *= half;
    }
    acc
}

/// Scalar convenience wrapper around [`fixed_gauss`].
pub fn gauss_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_rule(n);
    fixed_gauss(&|x| [f(x)], a, b, &rule)[0]
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    depth: u32,
    val: [f64; N],
    err: [f64; N],
}

fn make_panel<const N: usize, F>(f: &F, a: f64, b: f64, depth: u32, rule: &GaussRule) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let m = 0.5 * (a + b);
    let whole = fixed_gauss(f, a, b, rule);
    let left = fixed_gauss(f, a, m, rule);
    let right = fixed_gauss(f, m, b, rule);
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for k in 0..N {
        val[k] = left[k] + right[k];
        err[k] = (whole[k] - val[k]).abs();
    }
    Panel {
        a,
        b,
        depth,
        val,
        err,
    }
}

fn totals<const N: usize>(panels: &mut [Panel<N>]) -> ([f64; N], [f64; N]) {
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    let mut buf = Vec::with_capacity(panels.len());
    for k in 0..N {
        buf.clear();
        buf.extend(panels.iter().map(|p| p.val[k]));
        val[k] = pairwise_sum(&buf);
        buf.clear();
        buf.extend(panels.iter().map(|p| p.err[k]));
        err[k] = pairwise_sum(&buf);
    }
    (val, err)
}

/// Adaptive quadrature of a vector-valued integrand over [a, b].
///
/// Returns the componentwise value and error estimate. Each component must
/// satisfy `err ≤ max(abs_tol, rel_tol·|value|)`.
pub fn integrate_vec<const N: usize, F>(f: F, a: f64, b: f64, q: &QuadSpec) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64) -> [f64; N],
{
    q.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(GeomError::Domain(format!("invalid interval [{a}, {b}]")));
    }
    let rule = gauss_rule(q.nodes_per_panel);
    const INIT: usize = 4;
    let mut panels: Vec<Panel<N>> = (0..INIT)
        .map(|i| {
            let x0 = a + (b - a) * i as f64 / INIT as f64;
            let x1 = if i + 1 == INIT {
                b
            } else {
                a + (b - a) * (i + 1) as f64 / INIT as f64
            };
            make_panel(&f, x0, x1, 0, &rule)
        })
        .collect();
    let tol = |v: f64| q.abs_tol.max(q.rel_tol * v.abs());
    let mut run_val = [0.0; N];
    let mut run_err = [0.0; N];
    for p in &panels {
        for k in 0..N {
            run_val[k] += p.val[k];
            run_err[k] += p.err[k];
        }
    }
    let max_panels = 1 << 18;
    loop {
        let loose_ok = (0..N).all(|k| run_err[k] <= tol(run_val[k]));
        if loose_ok {
            let (val, err) = totals(&mut panels);
            if (0..N).all(|k| err[k] <= tol(val[k])) {
                return Ok((val, err));
            }
            run_val = val;
            run_err = err;
        }
        let scale: [f64; N] = std::array::from_fn(|k| tol(run_val[k]));
        let (idx, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let s = (0..N).map(|k| p.err[k] / scale[k]).fold(0.0, f64::max);
                (i, s)
            })
            .fold((0usize, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let worst = &panels[idx];
        if worst.depth >= q.max_depth || panels.len() >= max_panels || !run_val.iter().all(|v| v.is_finite()) {
            let (val, err) = totals(&mut panels);
            let k = (0..N)
                .max_by(|&i, &j| (err[i] / tol(val[i])).total_cmp(&(err[j] / tol(val[j]))))
                .unwrap_or(0);
            return Err(GeomError::NonConvergence {
                a,
                b,
                partial: val[k],
                err_est: err[k],
            });
        }
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        let l = make_panel(&f, p.a, m, p.depth + 1, &rule);
        let r = make_panel(&f, m, p.b, p.depth + 1, &rule);
        for k in 0..N {
            run_val[k] += l.val[k] + r.val[k] - p.val[k];
            run_err[k] += l.err[k] + r.err[k] - p.err[k];
        }
        panels.push(l);
        panels.push(r);
    }
}

/// Adaptive Gauss–Legendre estimate of ∫_a^b f.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadSpec) -> Result<(f64, f64)> {
    let (v, e) = integrate_vec(|x| [f(x)], a, b, q)?;
    Ok((v[0], e[0]))
}

/// Like [`integrate_vec`], with the substitution `t = a + u²` (resp. `t = b − u²`)
/// at endpoints flagged as singular.
pub fn integrate_vec_sub<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    sing_start: bool,
    sing_end: bool,
    q: &QuadSpec,
) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64) -> [f64; N],
{
    let scale = |v: [f64; N], s: f64| -> [f64; N] { std::array::from_fn(|k| v[k] * s) };
    let add = |x: ([f64; N], [f64; N]), y: ([f64; N], [f64; N])| {
        (
            std::array::from_fn(|k| x.0[k] + y.0[k]),
            std::array::from_fn(|k| x.1[k] + y.1[k]),
        )
    };
    match (sing_start, sing_end) {
        (false, false) => integrate_vec(f, a, b, q),
        (true, false) => integrate_vec(|u| scale(f(a + u * u), 2.0 * u), 0.0, (b - a).sqrt(), q),
        (false, true) => integrate_vec(|u| scale(f(b - u * u), 2.0 * u), 0.0, (b - a).sqrt(), q),
        (true, true) => {
            let m = 0.5 * (a + b);
            let half = q_half(q);
            let l = integrate_vec(|u| scale(f(a + u * u), 2.0 * u), 0.0, (m - a).sqrt(), &half)?;
            let r = integrate_vec(|u| scale(f(b - u * u), 2.0 * u), 0.0, (b - m).sqrt(), &half)?;
            Ok(add(l, r))
        }
    }
}

fn q_half(q: &QuadSpec) -> QuadSpec {
    QuadSpec {
        abs_tol: 0.5 * q.abs_tol,
        ..*q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_weights_sum_to_two() {
        for n in 2..30 {
            let r = gauss_rule(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: {s}");
        }
    }

    #[test]
    fn polynomial_exactness() {
        let n = 6;
        let rule = gauss_rule(n);
        for deg in 0..(2 * n) {
            let v = fixed_gauss(&|x: f64| [x.powi(deg as i32)], 0.0, 1.0, &rule)[0];
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((v - exact).abs() <= 1e-13 * exact, "deg {deg}");
        }
    }

    #[test]
    fn simple_integrals() {
        let q = QuadSpec::default();
        let (v, _) = integrate_1d(|x| x * x, 0.0, 1.0, &q).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        let (v, _) = integrate_1d(f64::sin, 0.0, std::f64::consts::PI, &q).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let (v, _) = integrate_1d(|x| x.cosh().powi(2), 0.0, 1.0, &q).unwrap();
        let exact = 2f64.sinh() / 4.0 + 0.5;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_substitution() {
        let q = QuadSpec::default();
        let (v, _) = integrate_vec_sub(|x: f64| [1.0 / x.sqrt()], 0.0, 1.0, true, false, &q).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-11);
        let (v, _) =
            integrate_vec_sub(|x: f64| [1.0 / (x * (1.0 - x)).sqrt()], 0.0, 1.0, true, true, &q).unwrap();
        assert!((v[0] - std::f64::consts::PI).abs() < 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        let q = QuadSpec {
            max_depth: 3,
            ..QuadSpec::default()
        };
        let r = integrate_1d(|x: f64| 1.0 / x.abs().sqrt(), -1.0, 1.0, &q);
        assert!(matches!(r, Err(GeomError::NonConvergence { .. })));
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
    }
}
