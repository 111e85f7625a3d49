//! Pointwise curvature data at a prospective blow-up point.

use crate::dim::Dim;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_rational::Ratio;

/// Ricci tensor, scalar curvature and perturbation value at one point.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// Ricci curvature components, symmetric n x n.
    pub ric: DMatrix<f64>,
    /// Scalar curvature.
    pub scal: f64,
    /// Perturbation value; must be positive at a blow-up point.
    pub hval: f64,
    /// Exact rational diagonal of the Ricci tensor, when the caller has one.
    /// Enables the exact arithmetic path in the stability predicate.
    pub ric_diag_exact: Option<Vec<Ratio<i64>>>,
    /// Exact rational perturbation value paired with `ric_diag_exact`.
    pub hval_exact: Option<Ratio<i64>>,
}

impl CurvatureData {
    pub fn new(ric: DMatrix<f64>, scal: f64, hval: f64) -> Result<Self> {
        if !(hval > 0.0) {
            return Err(Error::domain(format!("perturbation value must be positive, got {hval}")));
        }
        if ric.nrows() != ric.ncols() {
            return Err(Error::domain("Ricci matrix must be square"));
        }
        let sym_defect = (&ric - ric.transpose()).amax();
        if sym_defect > 1e-12 * ric.amax().max(1.0) {
            return Err(Error::domain(format!("Ricci matrix not symmetric, defect {sym_defect:.3e}")));
        }
        Ok(CurvatureData { ric, scal, hval, ric_diag_exact: None, hval_exact: None })
    }

    /// Flat model: vanishing curvature, constant perturbation.
    pub fn flat(dim: &Dim, hval: f64) -> Self {
        CurvatureData {
            ric: DMatrix::zeros(dim.n, dim.n),
            scal: 0.0,
            hval,
            ric_diag_exact: Some(vec![Ratio::from_integer(0); dim.n]),
            hval_exact: None,
        }
    }

    /// Round unit sphere: Ric = (n-1) g, S = n(n-1).
    pub fn round_sphere(dim: &Dim, hval: f64) -> Self {
        let nf = dim.nf();
        CurvatureData {
            ric: DMatrix::identity(dim.n, dim.n) * (nf - 1.0),
            scal: nf * (nf - 1.0),
            hval,
            ric_diag_exact: None,
            hval_exact: None,
        }
    }

    /// Diagonal Ricci tensor given as exact rationals (used by the exact
    /// arithmetic path of the stability predicate).
    pub fn diagonal_exact(dim: &Dim, diag: Vec<Ratio<i64>>, scal: f64, hval_exact: Ratio<i64>) -> Result<Self> {
        if diag.len() != dim.n {
            return Err(Error::domain("diagonal length does not match dimension"));
        }
        let hval = *hval_exact.numer() as f64 / *hval_exact.denom() as f64;
        let mut ric = DMatrix::zeros(dim.n, dim.n);
        for i in 0..dim.n {
            ric[(i, i)] = *diag[i].numer() as f64 / *diag[i].denom() as f64;
        }
        let mut cd = CurvatureData::new(ric, scal, hval)?;
        cd.ric_diag_exact = Some(diag);
        cd.hval_exact = Some(hval_exact);
        Ok(cd)
    }

    /// Traceless part of the Ricci tensor.
    pub fn ric_traceless(&self) -> DMatrix<f64> {
        let n = self.ric.nrows();
        let tr = self.ric.trace() / n as f64;
        &self.ric - DMatrix::identity(n, n) * tr
    }
}
