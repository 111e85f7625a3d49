//! Dimension-derived constants.

use crate::error::{Error, Result};
use num_rational::Ratio;

/// All constants fixed by the spatial dimension alone.
///
/// `n` is a runtime value, range-checked to 5..=9: the construction needs
/// n >= 5 and everything downstream is exercised at n = 5, 6, 7.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dim {
    pub n: usize,
    /// critical exponent (n+2)/(n-2)
    pub p: f64,
    /// conformal-Laplacian coefficient 4(n-1)/(n-2)
    pub kappa: f64,
    /// bubble amplitude (n(n-2))^((n-2)/4)
    pub alpha: f64,
    /// Green's-function normalisation 1/((n-2) |S^{n-1}|)
    pub gamma: f64,
}

/// Gamma(k/2) for positive integer k, exact recursion from Gamma(1/2) = sqrt(pi).
pub fn gamma_half_int(k: usize) -> f64 {
    let mut val = if k % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if k % 2 == 0 { 2 } else { 1 };
    while arg < k {
        val *= arg as f64 / 2.0;
        arg += 2;
    }
    val
}

/// Surface measure of the unit sphere S^{d-1} in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half_int(d)
}

impl Dim {
    pub fn new(n: usize) -> Result<Self> {
        if !(5..=9).contains(&n) {
            return Err(Error::domain(format!("dimension {n} outside supported range 5..=9")));
        }
        // p (n-2) = n+2 must hold exactly as rationals
        let p_rat = Ratio::new(n as i64 + 2, n as i64 - 2);
        debug_assert_eq!(p_rat * Ratio::from_integer(n as i64 - 2), Ratio::from_integer(n as i64 + 2));
        let nf = n as f64;
        let dim = Dim {
            n,
            p: (nf + 2.0) / (nf - 2.0),
            kappa: 4.0 * (nf - 1.0) / (nf - 2.0),
            alpha: (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0),
            gamma: 1.0 / ((nf - 2.0) * sphere_area(n)),
        };
        debug_assert!(dim.p > 0.0 && dim.kappa > 0.0 && dim.alpha > 0.0 && dim.gamma > 0.0);
        Ok(dim)
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// |S^{n-1}|, the area of the unit sphere in R^n.
    pub fn sphere_area_nm1(&self) -> f64 {
        sphere_area(self.n)
    }

    /// |S^n|, the area of the target sphere of the stereographic lift.
    pub fn sphere_area_n(&self) -> f64 {
        sphere_area(self.n + 1)
    }

    /// Scalar curvature of the unit round sphere S^n.
    pub fn sphere_scalar(&self) -> f64 {
        self.nf() * (self.nf() - 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn n5_values() {
        let d = Dim::new(5).unwrap();
        assert_relative_eq!(d.p, 7.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d.kappa, 16.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d.alpha, 15f64.powf(0.75), max_relative = 1e-15);
        // |S^4| = 8 pi^2 / 3
        assert_relative_eq!(sphere_area(5), 8.0 * std::f64::consts::PI.powi(2) / 3.0, max_relative = 1e-15);
        assert_relative_eq!(d.gamma, 1.0 / (8.0 * std::f64::consts::PI.powi(2)), max_relative = 1e-14);
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(Dim::new(4).is_err());
        assert!(Dim::new(10).is_err());
        for n in 5..=9 {
            assert!(Dim::new(n).is_ok());
        }
    }

    #[test]
    fn gamma_recursion_exact() {
        assert_relative_eq!(gamma_half_int(2), 1.0);
        assert_relative_eq!(gamma_half_int(4), 1.0);
        assert_relative_eq!(gamma_half_int(6), 2.0);
        assert_relative_eq!(gamma_half_int(5), 1.5 * 0.5 * std::f64::consts::PI.sqrt(), max_relative = 1e-15);
    }
}
