//! Quadrature of the construction's integral constants and verification of
//! the exact cancellation identities they satisfy.

use crate::bubble::{dilation_kernel, profile, profile_prime};
use crate::correction::e0_sup_on_sphere;
use crate::curvature::CurvatureData;
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quad::integrate_radial;
use num_rational::Ratio;
use serde::Serialize;

/// The five quadrature constants with error estimates, plus the three exact
/// rational coefficients of the Green's-function expansion.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    /// Per-constant quadrature error estimates (relative).
    pub err: [f64; 5],
    #[serde(skip)]
    pub hc1: Ratio<i64>,
    #[serde(skip)]
    pub hc2: Ratio<i64>,
    #[serde(skip)]
    pub hc3: Ratio<i64>,
}

/// hc1 = 1/12.
pub fn hc1_rat(_n: usize) -> Ratio<i64> {
    Ratio::new(1, 12)
}

/// hc2 = -1 / (24 (n-1)).
pub fn hc2_rat(n: usize) -> Ratio<i64> {
    Ratio::new(-1, 24 * (n as i64 - 1))
}

/// hc3 = -(n-2) / (8 (n-1) (n-4)).
pub fn hc3_rat(n: usize) -> Ratio<i64> {
    Ratio::new(-(n as i64 - 2), 8 * (n as i64 - 1) * (n as i64 - 4))
}

fn rat_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl ConstantsTable {
    pub fn hc1f(&self) -> f64 {
        rat_f64(self.hc1)
    }
    pub fn hc2f(&self) -> f64 {
        rat_f64(self.hc2)
    }
    pub fn hc3f(&self) -> f64 {
        rat_f64(self.hc3)
    }
}

fn radial_integral(dim: &Dim, tol: f64, f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let n = dim.n as i32;
    let area = dim.sphere_area_nm1();
    let coarse = integrate_radial(|r| r.powi(n - 1) * f(r), tol * 100.0)?;
    let fine = integrate_radial(|r| r.powi(n - 1) * f(r), tol)?;
    let val = area * fine;
    let err = ((fine - coarse).abs() / fine.abs().max(1e-300)).max(f64::EPSILON);
    Ok((val, err))
}

/// Compute c1..c5 by adaptive radial quadrature. The angular parts are
/// reduced analytically: with int_{S^{n-1}} w_i w_j dS = |S^{n-1}| d_ij / n,
/// all five integrands are radial.
pub fn compute_constants(dim: &Dim, tol: f64) -> Result<ConstantsTable> {
    let d = *dim;
    let nf = d.nf();
    let (c1, e1) = radial_integral(dim, tol, |r| {
        d.p * profile(&d, r).powf(d.p - 1.0) * dilation_kernel(&d, r).powi(2)
    })?;
    let (c2, e2) = radial_integral(dim, tol, |r| -profile(&d, r) * dilation_kernel(&d, r))?;
    let (c3, e3) = radial_integral(dim, tol, |r| r * profile_prime(&d, r) * dilation_kernel(&d, r))?;
    let (c4, e4) = radial_integral(dim, tol, |r| {
        r * r * profile(&d, r).powf(d.p) * dilation_kernel(&d, r)
    })?;
    // Z_1 = y_1 w'(r)/r; the angular average of y_1^2 contributes 1/n
    let (c5, e5) = radial_integral(dim, tol, |r| {
        d.p * profile(&d, r).powf(d.p - 1.0) * profile_prime(&d, r).powi(2) / nf
    })?;
    let table = ConstantsTable {
        c1,
        c2,
        c3,
        c4,
        c5,
        err: [e1, e2, e3, e4, e5],
        hc1: hc1_rat(d.n),
        hc2: hc2_rat(d.n),
        hc3: hc3_rat(d.n),
    };
    if !(table.c1 > 0.0 && table.c2 > 0.0 && table.c5 > 0.0) {
        return Err(Error::numeric(
            "constants",
            format!("sign check failed: c1={}, c2={}, c5={}", table.c1, table.c2, table.c5),
        ));
    }
    Ok(table)
}

/// Relative defect of the identity c2 = int W^2 (integration by parts).
pub fn verify_identity_c2(dim: &Dim, table: &ConstantsTable) -> Result<f64> {
    let d = *dim;
    let (w2, _) = radial_integral(dim, 1e-13, |r| profile(&d, r).powi(2))?;
    Ok((table.c2 - w2).abs() / table.c2)
}

/// The four cancellation residuals behind the dilation law: the two
/// orthogonality brackets (scalar-curvature and perturbation parts of the
/// projected leading error) and the two purely rational brackets from the
/// Green's-expansion consistency computation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CancellationResiduals {
    /// | S-bracket | / c2; the bracket must vanish.
    pub residual_s: f64,
    /// | h-bracket - c2/kappa | / c2; the bracket must equal c2/kappa.
    pub residual_h: f64,
    /// |2 hc1 + 2n hc2 - 4(n-2) hc2 - 1/kappa|, exact rational arithmetic.
    pub residual_green_s: f64,
    /// |2n hc3 - 4(n-2) hc3 - 1/kappa|, exact rational arithmetic.
    pub residual_green_h: f64,
    /// true when both rational brackets vanish identically as rationals.
    pub green_exact_zero: bool,
}

pub fn verify_cancellations(dim: &Dim, table: &ConstantsTable) -> CancellationResiduals {
    let n = dim.n as i64;
    let nf = dim.nf();
    let kinv = 1.0 / dim.kappa;
    let (hc1, hc2, hc3) = (table.hc1f(), table.hc2f(), table.hc3f());
    let (c2, c3, c4) = (table.c2, table.c3, table.c4);

    let bracket_s = -(2.0 * hc1 + 2.0 * nf * hc2 - kinv) * c2
        + (4.0 * hc1 / nf + 4.0 * hc2 - 1.0 / (3.0 * nf)) * c3
        + 4.0 / (nf - 2.0) * (hc1 / nf + hc2) * c4;
    let bracket_h = -(2.0 * nf * hc3 - kinv) * c2 + 4.0 * hc3 * c3 + 4.0 / (nf - 2.0) * hc3 * c4;

    // rational brackets, exact arithmetic
    let kinv_rat = Ratio::new(n - 2, 4 * (n - 1));
    let rat_s = Ratio::from_integer(2) * table.hc1
        + Ratio::from_integer(2 * n) * table.hc2
        - Ratio::from_integer(4 * (n - 2)) * table.hc2
        - kinv_rat;
    let rat_h = Ratio::from_integer(2 * n) * table.hc3 - Ratio::from_integer(4 * (n - 2)) * table.hc3 - kinv_rat;

    CancellationResiduals {
        residual_s: bracket_s.abs() / c2,
        residual_h: (bracket_h - kinv * c2).abs() / c2,
        residual_green_s: rat_f64(rat_s).abs(),
        residual_green_h: rat_f64(rat_h).abs(),
        green_exact_zero: rat_s == Ratio::from_integer(0) && rat_h == Ratio::from_integer(0),
    }
}

/// Least-squares slope of log(sup-size) against log(radius).
pub fn loglog_slope(radii: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.abs().max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    sxy / sxx
}

/// Fit the tail exponent of the rescaled leading error over a log grid of
/// radii. With the cancellation active the exponent is -n; with hc3 knocked
/// out (negative control) only -(n-2) survives.
pub fn verify_e0_decay(
    dim: &Dim,
    table: &ConstantsTable,
    curv: &CurvatureData,
    radii: &[f64],
    knock_out_hc3: bool,
) -> Result<f64> {
    if radii.len() < 4 {
        return Err(Error::domain("decay fit needs at least 4 radii"));
    }
    let span = radii.last().unwrap() / radii.first().unwrap();
    if span < 98.0 {
        return Err(Error::domain(format!(
            "decay fit needs radii spanning two decades, got ratio {span:.1}"
        )));
    }
    let sup: Vec<f64> = radii
        .iter()
        .map(|&r| e0_sup_on_sphere(dim, table, curv, r, knock_out_hc3))
        .collect();
    Ok(loglog_slope(radii, &sup))
}
