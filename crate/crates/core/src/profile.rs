//! Planar generators t ↦ (ρ(t), z(t)) of surfaces of revolution about the z-axis.
//!
//! The stored normal of a profile is the left normal N = (−z', ρ')/|γ'| in the
//! (ρ, z) half-plane. Curvatures are signed with respect to N:
//! the meridian curvature is κ₁ = (ρ'z'' − z'ρ'')/|γ'|³ and the parallel
//! curvature is κ₂ = z'/(|γ'|ρ), so the mean curvature vector is (κ₁ + κ₂)·N.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::nodoid::NodoidTable;

#[derive(Debug, Clone)]
pub enum Generator {
    /// Straight segment from `p0` to `p1`, t ∈ [0, 1].
    Segment { p0: [f64; 2], p1: [f64; 2] },
    /// (ρc + A cos φ, zc + B sin φ).
    Ellipse {
        center: [f64; 2],
        semi_rho: f64,
        semi_z: f64,
    },
    /// (a cosh(t/a), t + z0).
    Catenary { a: f64, z0: f64 },
    Nodoid(Arc<NodoidTable>),
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub generator: Generator,
    pub t_min: f64,
    pub t_max: f64,
    /// Traverse the generator backwards (flips the left normal).
    pub reversed: bool,
    pub axis_touch_start: bool,
    pub axis_touch_end: bool,
}

fn raw(g: &Generator, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    match g {
        Generator::Segment { p0, p1 } => {
            let d = [p1[0] - p0[0], p1[1] - p0[1]];
            ([p0[0] + t * d[0], p0[1] + t * d[1]], d, [0.0, 0.0])
        }
        Generator::Ellipse {
            center,
            semi_rho,
            semi_z,
        } => {
            let (s, c) = t.sin_cos();
            (
                [center[0] + semi_rho * c, center[1] + semi_z * s],
                [-semi_rho * s, semi_z * c],
                [-semi_rho * c, -semi_z * s],
            )
        }
        Generator::Catenary { a, z0 } => {
            let u = t / a;
            ([a * u.cosh(), t + z0], [u.sinh(), 1.0], [u.cosh() / a, 0.0])
        }
        Generator::Nodoid(tab) => (tab.eval(t), tab.deriv(t), tab.deriv2(t)),
    }
}

impl ProfileCurve {
    pub fn new(generator: Generator, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min < t_max) {
            return Err(GeomError::IrregularProfile(format!(
                "empty parameter range [{t_min}, {t_max}]"
            )));
        }
        let mut p = Self {
            generator,
            t_min,
            t_max,
            reversed: false,
            axis_touch_start: false,
            axis_touch_end: false,
        };
        let scale = p.scale();
        p.axis_touch_start = p.eval(t_min)[0].abs() <= 1e-12 * scale;
        p.axis_touch_end = p.eval(t_max)[0].abs() <= 1e-12 * scale;
        Ok(p)
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        std::mem::swap(&mut self.axis_touch_start, &mut self.axis_touch_end);
        self
    }

    fn map(&self, t: f64) -> f64 {
        if self.reversed {
            self.t_min + self.t_max - t
        } else {
            t
        }
    }

    /// Typical length of the curve, used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let a = self.eval(self.t_min);
        let b = self.eval(self.t_max);
        let m = self.eval(0.5 * (self.t_min + self.t_max));
        let mut s: f64 = 0.0;
        for p in [a, b, m] {
            s = s.max(p[0].abs()).max(p[1].abs());
        }
        s.max((a[0] - b[0]).hypot(a[1] - b[1])).max(1e-300)
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        let p = raw(&self.generator, self.map(t)).0;
        if self.is_axis_point(t) {
            [0.0, p[1]]
        } else {
            p
        }
    }

    fn is_axis_point(&self, t: f64) -> bool {
        (self.axis_touch_start && t == self.t_min) || (self.axis_touch_end && t == self.t_max)
    }

    pub fn deriv(&self, t: f64) -> [f64; 2] {
        let d = raw(&self.generator, self.map(t)).1;
        if self.reversed {
            [-d[0], -d[1]]
        } else {
            d
        }
    }

    pub fn deriv2(&self, t: f64) -> [f64; 2] {
        raw(&self.generator, self.map(t)).2
    }

    pub fn speed(&self, t: f64) -> f64 {
        let d = self.deriv(t);
        d[0].hypot(d[1])
    }

    /// Left unit normal (−z', ρ')/|γ'|.
    pub fn normal(&self, t: f64) -> [f64; 2] {
        let d = self.deriv(t);
        let s = d[0].hypot(d[1]);
        [-d[1] / s, d[0] / s]
    }

    pub fn unit_tangent(&self, t: f64) -> [f64; 2] {
        let d = self.deriv(t);
        let s = d[0].hypot(d[1]);
        [d[0] / s, d[1] / s]
    }

    /// Principal curvatures (κ₁, κ₂) with respect to the left normal.
    pub fn curvatures(&self, t: f64) -> (f64, f64) {
        let (p, d, dd) = raw(&self.generator, self.map(t));
        let d = if self.reversed { [-d[0], -d[1]] } else { d };
        let s = d[0].hypot(d[1]);
        let k1 = (d[0] * dd[1] - d[1] * dd[0]) / (s * s * s);
        let k2 = d[1] / (s * p[0]);
        (k1, k2)
    }

    /// Scalar mean curvature κ₁ + κ₂ with respect to the left normal.
    pub fn mean_curvature(&self, t: f64) -> f64 {
        let (k1, k2) = self.curvatures(t);
        k1 + k2
    }

    /// Check ρ > 0 inside and a nonvanishing derivative on a sample grid.
    pub fn check_regular(&self, samples: usize) -> Result<()> {
        let scale = self.scale();
        for i in 0..=samples {
            let t = self.t_min + (self.t_max - self.t_min) * i as f64 / samples as f64;
            let d = self.deriv(t);
            if !(d[0].hypot(d[1]) > 1e-12 * scale / (self.t_max - self.t_min)) {
                return Err(GeomError::IrregularProfile(format!("vanishing derivative at t = {t}")));
            }
            if i > 0 && i < samples && !(self.eval(t)[0] > 0.0) {
                return Err(GeomError::IrregularProfile(format!("ρ ≤ 0 at t = {t}")));
            }
        }
        Ok(())
    }

    pub fn start(&self) -> [f64; 2] {
        self.eval(self.t_min)
    }

    pub fn end(&self) -> [f64; 2] {
        self.eval(self.t_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere() -> ProfileCurve {
        ProfileCurve::new(
            Generator::Ellipse {
                center: [0.0, 0.0],
                semi_rho: 1.0,
                semi_z: 1.0,
            },
            -PI / 2.0,
            PI / 2.0,
        )
        .unwrap()
    }

    #[test]
    fn sphere_curvatures_point_inward() {
        let p = sphere();
        assert!(p.axis_touch_start && p.axis_touch_end);
        for &t in &[-1.2, 0.0, 0.4, 1.5] {
            let (k1, k2) = p.curvatures(t);
            assert!((k1 - 1.0).abs() < 1e-14 && (k2 - 1.0).abs() < 1e-13);
            let n = p.normal(t);
            let x = p.eval(t);
            assert!((n[0] + x[0]).abs() < 1e-14 && (n[1] + x[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn reversal_flips_normal_and_curvature() {
        let p = sphere();
        let r = sphere().reversed();
        for &t in &[-1.0, 0.3] {
            let tr = -t;
            assert!((p.mean_curvature(t) + r.mean_curvature(tr)).abs() < 1e-13);
            let (n, m) = (p.normal(t), r.normal(tr));
            assert!((n[0] + m[0]).abs() < 1e-14 && (n[1] + m[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn catenary_is_minimal() {
        let p = ProfileCurve::new(Generator::Catenary { a: 0.7, z0: 0.0 }, -1.0, 1.0).unwrap();
        for &t in &[-0.9, 0.0, 0.5] {
            assert!(p.mean_curvature(t).abs() < 1e-14);
        }
    }
}
