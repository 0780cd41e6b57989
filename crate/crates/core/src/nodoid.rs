//! Nodoid generating curve t ↦ (f(t), g(t)).
//!
//! With s = c cosh t, w = √(s² − a²) and D = (s + a)·w the derivatives are
//! f' = a·b·s'/D and g' = a·b²/D, which avoids the cancellation in the
//! textbook form of g. The height g is tabulated on cumulative panels so
//! repeated evaluation costs one short Gauss rule.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elliptic::elliptic_ke;
use crate::error::{GeomError, Result};
use crate::quadrature::{fixed_gauss, gauss_rule, GaussRule};

const PANEL_NODES: usize = 20;
const T_CAP: f64 = 40.0;
const T_OVERFLOW: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodoidParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t_max: f64,
}

impl NodoidParams {
    /// Parameters with the default truncation from [`default_t_max`].
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(GeomError::Domain(format!("nodoid needs a, b > 0 (got a = {a}, b = {b})")));
        }
        let c = a.hypot(b);
        Ok(Self {
            a,
            b,
            c,
            t_max: default_t_max(a, b),
        })
    }

    pub fn with_t_max(a: f64, b: f64, t_max: f64) -> Result<Self> {
        let mut p = Self::new(a, b)?;
        p.t_max = t_max;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0) {
            return Err(GeomError::Domain("nodoid needs a, b > 0".into()));
        }
        if (self.c - self.a.hypot(self.b)).abs() > 1e-12 * self.c {
            return Err(GeomError::Domain("nodoid c must equal sqrt(a² + b²)".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(GeomError::Domain("nodoid t_max must be positive".into()));
        }
        if self.t_max > T_OVERFLOW {
            return Err(GeomError::Domain(format!(
                "nodoid t_max = {} overflows cosh powers; use t_max ≤ {T_CAP}",
                self.t_max
            )));
        }
        Ok(())
    }
}

/// Smallest t where the radius is within 1e-8·b of its limit b and the
/// meridian tangent is within 1e-7 rad of horizontal, capped at 40.
pub fn default_t_max(a: f64, b: f64) -> f64 {
    let c = a.hypot(b);
    let ok = |t: f64| {
        let s = c * t.cosh();
        let sma = s_minus_a(a, b, c, t);
        let f = b * sma / (sma * (s + a)).sqrt();
        (f - b).abs() < 1e-8 * b && b / (c * t.sinh()) < 1e-7
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !ok(hi) && hi < T_CAP {
        lo = hi;
        hi *= 2.0;
    }
    if !ok(hi) {
        return T_CAP;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.min(T_CAP)
}

fn s_minus_a(a: f64, b: f64, c: f64, t: f64) -> f64 {
    let sh = (0.5 * t).sinh();
    b * b / (c + a) + 2.0 * c * sh * sh
}

/// The closure height 2|a − c[E(a/c) − (b²/c²)K(a/c)]|.
pub fn nodoid_closure_height(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(GeomError::Domain("closure height needs a, b > 0".into()));
    }
    let c = a.hypot(b);
    let p = elliptic_ke(a / c)?;
    Ok(2.0 * (a - c * (p.big_e - (b * b) / (c * c) * p.big_k)).abs())
}

/// Tabulated nodoid generator, valid on [-t_max, t_max].
#[derive(Debug)]
pub struct NodoidTable {
    pub params: NodoidParams,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    rule: Arc<GaussRule>,
}

impl NodoidTable {
    pub fn new(params: NodoidParams) -> Result<Self> {
        params.validate()?;
        let rule = gauss_rule(PANEL_NODES);
        let beta = params.b / params.c;
        let mut knots = vec![0.0];
        let mut cumulative = vec![0.0];
        let mut t = 0.0;
        let mut acc = 0.0;
        let gp = |x: f64| [derivs(&params, x).1[1]];
        while t < params.t_max {
            let h = 0.25 * t.max(beta).min(1.0);
            let t1 = (t + h).min(params.t_max);
            acc += fixed_gauss(&gp, t, t1, &rule)[0];
            knots.push(t1);
            cumulative.push(acc);
            t = t1;
        }
        Ok(Self {
            params,
            knots,
            cumulative,
            rule,
        })
    }

    pub fn shared(params: NodoidParams) -> Result<Arc<Self>> {
        Self::new(params).map(Arc::new)
    }

    /// g(t) for t ≥ 0 by table lookup plus one Gauss panel.
    fn g_pos(&self, t: f64) -> f64 {
        let k = self.knots.partition_point(|&x| x <= t).saturating_sub(1);
        let k = k.min(self.knots.len() - 1);
        let t0 = self.knots[k];
        if t <= t0 {
            return self.cumulative[k];
        }
        let gp = |x: f64| [derivs(&self.params, x).1[1]];
        self.cumulative[k] + fixed_gauss(&gp, t0, t, &self.rule)[0]
    }

    pub fn g(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.g_pos(t)
        } else {
            -self.g_pos(-t)
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        derivs(&self.params, t).0
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        [self.f(t), self.g(t)]
    }

    pub fn deriv(&self, t: f64) -> [f64; 2] {
        derivs(&self.params, t).1
    }

    pub fn deriv2(&self, t: f64) -> [f64; 2] {
        derivs(&self.params, t).2
    }
}

/// (f, (f', g'), (f'', g'')) at t.
fn derivs(p: &NodoidParams, t: f64) -> (f64, [f64; 2], [f64; 2]) {
    let (a, b, c) = (p.a, p.b, p.c);
    let s = c * t.cosh();
    let sp = c * t.sinh();
    let sma = s_minus_a(a, b, c, t);
    let w2 = sma * (s + a);
    let w = w2.sqrt();
    let f = b * sma / w;
    let d = (s + a) * w;
    let dp = sp * (w2 + s * (s + a)) / w;
    let fp = a * b * sp / d;
    let gp = a * b * b / d;
    let d2 = d * d;
    let fpp = a * b * (s * d - sp * dp) / d2;
    let gpp = -a * b * b * dp / d2;
    (f, [fp, gp], [fpp, gpp])
}
