//! Complete elliptic integrals K(k) and E(k) by the arithmetic–geometric mean.
//!
//! The argument is the modulus k, so K(k) = ∫₀^{π/2} (1 − k² sin²θ)^{-1/2} dθ.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticPair {
    pub k: f64,
    pub big_k: f64,
    pub big_e: f64,
}

/// K and E for 0 ≤ k < 1.
pub fn elliptic_ke(k: f64) -> Result<EllipticPair> {
    if !(0.0..1.0).contains(&k) {
        return Err(GeomError::Domain(format!("elliptic modulus {k} outside [0, 1)")));
    }
    let mut a = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    let mut c = k;
    let mut pow = 0.5;
    let mut sum = 0.5 * c * c;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
        if c.abs() <= 1e-16 * a {
            break;
        }
    }
    let big_k = std::f64::consts::FRAC_PI_2 / a;
    Ok(EllipticPair {
        k,
        big_k,
        big_e: big_k * (1.0 - sum),
    })
}

/// E(k) on the closed interval, with E(1) = 1.
pub fn elliptic_e(k: f64) -> Result<f64> {
    if k == 1.0 {
        return Ok(1.0);
    }
    elliptic_ke(k).map(|p| p.big_e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_modulus() {
        let p = elliptic_ke(0.0).unwrap();
        assert!((p.big_k - FRAC_PI_2).abs() < 1e-15);
        assert!((p.big_e - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn e_tends_to_one() {
        let e = elliptic_ke(1.0 - 1e-12).unwrap().big_e;
        assert!((e - 1.0).abs() < 1e-9);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
        assert!(elliptic_ke(1.0).is_err());
    }
}
