//! Closed-form and numerical dynamics of the dilation and translation
//! parameters, and the Ricci stability predicate.

use crate::constants::ConstantsTable;
use crate::curvature::CurvatureData;
use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quad::{composite_gl, integrate_tail};
use nalgebra::DMatrix;
use num_rational::Ratio;

/// Leading dilation scale mu0(t) = sqrt(2 c1 / ((n+2) c2 t)).
pub fn mu0(dim: &Dim, table: &ConstantsTable, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::domain(format!("mu0 needs t > 0, got {t}")));
    }
    Ok((2.0 * table.c1 / ((dim.nf() + 2.0) * table.c2 * t)).sqrt())
}

/// d mu0 / dt.
pub fn mu0_dot(dim: &Dim, table: &ConstantsTable, t: f64) -> Result<f64> {
    Ok(-0.5 * mu0(dim, table, t)? / t)
}

/// The dilation path mubar = mu0 / sqrt(h0) fixed by the orthogonality law.
pub fn mubar(dim: &Dim, table: &ConstantsTable, h0: f64, t: f64) -> Result<f64> {
    if h0 <= 0.0 {
        return Err(Error::domain("mubar needs h0 > 0"));
    }
    Ok(mu0(dim, table, t)? / h0.sqrt())
}

pub fn mubar_dot(dim: &Dim, table: &ConstantsTable, h0: f64, t: f64) -> Result<f64> {
    Ok(-0.5 * mubar(dim, table, h0, t)? / t)
}

/// Geometric time grid from t0 to tmax.
pub fn geometric_grid(t0: f64, tmax: f64, n: usize) -> Vec<f64> {
    let q = (tmax / t0).powf(1.0 / (n - 1) as f64);
    (0..n).map(|k| t0 * q.powi(k as i32)).collect()
}

/// Scalar parameter path with derivative channel on a time grid.
#[derive(Debug, Clone)]
pub struct ScalarPath {
    pub tgrid: Vec<f64>,
    pub value: Vec<f64>,
    pub deriv: Vec<f64>,
}

impl ScalarPath {
    pub fn zero(tgrid: &[f64]) -> Self {
        ScalarPath {
            tgrid: tgrid.to_vec(),
            value: vec![0.0; tgrid.len()],
            deriv: vec![0.0; tgrid.len()],
        }
    }

    fn locate(&self, t: f64) -> usize {
        match self.tgrid.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.tgrid.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.tgrid.len() - 2),
        }
    }

    /// Cubic-Hermite sample using the derivative channel.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let k = self.locate(t);
        let (t0, t1) = (self.tgrid[k], self.tgrid[k + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            2.0 * s * s * s - 3.0 * s * s + 1.0,
            s * s * s - 2.0 * s * s + s,
            -2.0 * s * s * s + 3.0 * s * s,
            s * s * s - s * s,
        );
        let v = h00 * self.value[k]
            + h10 * h * self.deriv[k]
            + h01 * self.value[k + 1]
            + h11 * h * self.deriv[k + 1];
        let dv = (6.0 * s * s - 6.0 * s) * (self.value[k] - self.value[k + 1]) / h
            + (3.0 * s * s - 4.0 * s + 1.0) * self.deriv[k]
            + (3.0 * s * s - 2.0 * s) * self.deriv[k + 1];
        (v, dv)
    }
}

/// Vector parameter path (one ScalarPath per component).
#[derive(Debug, Clone)]
pub struct VectorPath {
    pub comps: Vec<ScalarPath>,
}

impl VectorPath {
    pub fn zero(tgrid: &[f64], n: usize) -> Self {
        VectorPath {
            comps: (0..n).map(|_| ScalarPath::zero(tgrid)).collect(),
        }
    }

    pub fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut v = Vec::with_capacity(self.comps.len());
        let mut dv = Vec::with_capacity(self.comps.len());
        for c in &self.comps {
            let (a, b) = c.at(t);
            v.push(a);
            dv.push(b);
        }
        (v, dv)
    }
}

/// Dilation-correction and centre paths together with the grid.
#[derive(Debug, Clone)]
pub struct ParameterPath {
    pub tgrid: Vec<f64>,
    pub lambda: ScalarPath,
    pub xi: VectorPath,
    pub h0: f64,
}

impl ParameterPath {
    pub fn trivial(dim: &Dim, tgrid: &[f64], h0: f64) -> Self {
        ParameterPath {
            tgrid: tgrid.to_vec(),
            lambda: ScalarPath::zero(tgrid),
            xi: VectorPath::zero(tgrid, dim.n),
            h0,
        }
    }

    /// mu(t) = mubar(t) + lambda(t) and its rate.
    pub fn mu(&self, dim: &Dim, table: &ConstantsTable, t: f64) -> Result<(f64, f64)> {
        let mb = mubar(dim, table, self.h0, t)?;
        let mbd = mubar_dot(dim, table, self.h0, t)?;
        let (l, ld) = self.lambda.at(t);
        let mu = mb + l;
        if mu <= 0.0 {
            return Err(Error::domain(format!("parameter path leaves mu <= 0 at t={t}")));
        }
        Ok((mu, mbd + ld))
    }
}

/// Solution operator of the dilation-correction ODE
/// lambda' + 3 lambda / (2t) = f, lambda(t0) = 0, via the integral form
/// lambda(t) = t^{-3/2} int_t0^t s^{3/2} f(s) ds.
pub fn solve_lambda<F: Fn(f64) -> f64>(forcing: F, t0: f64, tgrid: &[f64]) -> Result<ScalarPath> {
    if tgrid.is_empty() || tgrid[0] < t0 {
        return Err(Error::domain("time grid must start at or after t0"));
    }
    let mut value = Vec::with_capacity(tgrid.len());
    let mut deriv = Vec::with_capacity(tgrid.len());
    let mut acc = composite_gl(|s| s.powf(1.5) * forcing(s), t0, tgrid[0], 8, 6);
    for (k, &t) in tgrid.iter().enumerate() {
        if k > 0 {
            acc += composite_gl(|s| s.powf(1.5) * forcing(s), tgrid[k - 1], t, 4, 6);
        }
        let l = t.powf(-1.5) * acc;
        value.push(l);
        deriv.push(forcing(t) - 1.5 * l / t);
    }
    Ok(ScalarPath { tgrid: tgrid.to_vec(), value, deriv })
}

/// The translation coupling matrix -(n-4)/(6 h0) Ric with its spectrum.
#[derive(Debug, Clone)]
pub struct RicciMatrix {
    pub m: DMatrix<f64>,
    pub eigvals: Vec<f64>,
    /// columns are the orthonormal eigenvectors
    pub eigvecs: DMatrix<f64>,
    /// exact eigenvalues along the diagonal path, when available
    pub eigvals_exact: Option<Vec<Ratio<i64>>>,
}

impl RicciMatrix {
    pub fn from_curvature(dim: &Dim, curv: &CurvatureData) -> Result<Self> {
        let nf = dim.nf();
        let factor = -(nf - 4.0) / (6.0 * curv.hval);
        let m = &curv.ric * factor;
        let se = m.clone().symmetric_eigen();
        let eigvals: Vec<f64> = se.eigenvalues.iter().cloned().collect();
        let eigvecs = se.eigenvectors;
        // residual of the decomposition
        let recon = &eigvecs * DMatrix::from_diagonal(&se.eigenvalues) * eigvecs.transpose();
        let defect = (&m - recon).amax();
        if defect > 1e-12 * m.amax().max(1.0) {
            return Err(Error::numeric("ricci eigendecomposition", format!("residual {defect:.3e}")));
        }
        let eigvals_exact = match (&curv.ric_diag_exact, &curv.hval_exact) {
            (Some(diag), Some(h)) => {
                let f = Ratio::new(-(dim.n as i64 - 4), 6) / *h;
                Some(diag.iter().map(|d| f * *d).collect())
            }
            _ => None,
        };
        Ok(RicciMatrix { m, eigvals, eigvecs, eigvals_exact })
    }
}

/// Solution operator of the translation system
/// xi' + (1/t) M xi = f, selecting per eigenvalue the branch that decays.
///
/// `nu` is the decay exponent of the forcing in the mu0-power sense; the
/// branch boundary sits at sigma = nu/2 - 1 and forcings whose eigenvalue
/// lands within 1e-6 of it must be shifted by the caller.
pub fn solve_xi<F: Fn(f64) -> Vec<f64>>(
    forcing: F,
    ricmat: &RicciMatrix,
    nu: f64,
    t0: f64,
    tgrid: &[f64],
) -> Result<VectorPath> {
    if nu <= 2.0 {
        return Err(Error::domain("translation solve needs decay exponent nu > 2"));
    }
    let n = ricmat.m.nrows();
    let boundary = nu / 2.0 - 1.0;
    for &s in &ricmat.eigvals {
        if (s - boundary).abs() < 1e-6 {
            return Err(Error::domain(format!(
                "eigenvalue {s} within 1e-6 of the branch boundary {boundary}; shift nu by a small epsilon"
            )));
        }
    }
    let q = &ricmat.eigvecs;
    // rotated forcing components g_i(s) = (Q^T f)_i
    let rot = |s: f64, i: usize| -> f64 {
        let f = forcing(s);
        (0..n).map(|r| q[(r, i)] * f[r]).sum()
    };
    let m = tgrid.len();
    let mut tilde = vec![vec![0.0; m]; n];
    for i in 0..n {
        let sig = ricmat.eigvals[i];
        if sig >= boundary {
            let mut acc = composite_gl(|s| s.powf(sig) * rot(s, i), t0, tgrid[0], 8, 6);
            for k in 0..m {
                if k > 0 {
                    acc += composite_gl(|s| s.powf(sig) * rot(s, i), tgrid[k - 1], tgrid[k], 4, 6);
                }
                tilde[i][k] = tgrid[k].powf(-sig) * acc;
            }
        } else {
            let tend = tgrid[m - 1];
            let tail = integrate_tail(|s| s.powf(sig) * rot(s, i), tend, 1e-12)?;
            let mut acc = tail;
            for k in (0..m).rev() {
                if k < m - 1 {
                    acc += composite_gl(|s| s.powf(sig) * rot(s, i), tgrid[k], tgrid[k + 1], 4, 6);
                }
                tilde[i][k] = -tgrid[k].powf(-sig) * acc;
            }
        }
    }
    // rotate back and fill the derivative channel from the ODE itself
    let mut comps: Vec<ScalarPath> = (0..n).map(|_| ScalarPath::zero(tgrid)).collect();
    for k in 0..m {
        let t = tgrid[k];
        let f = forcing(t);
        let mut xi_k = vec![0.0; n];
        for r in 0..n {
            for i in 0..n {
                xi_k[r] += q[(r, i)] * tilde[i][k];
            }
        }
        let mut mxi = vec![0.0; n];
        for r in 0..n {
            for c in 0..n {
                mxi[r] += ricmat.m[(r, c)] * xi_k[c];
            }
        }
        for r in 0..n {
            comps[r].value[k] = xi_k[r];
            comps[r].deriv[k] = f[r] - mxi[r] / t;
        }
    }
    Ok(VectorPath { comps })
}

/// Stability predicate of a prospective blow-up point: the largest Ricci
/// eigenvalue must not exceed -6 h / (n-4), equivalently every eigenvalue
/// of the translation matrix is at least 1.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub stable: bool,
    /// -6h/(n-4) - (largest Ricci eigenvalue); nonnegative iff stable.
    pub margin: f64,
    pub min_sigma: f64,
    /// exact rational minimum sigma along the diagonal path
    pub min_sigma_exact: Option<Ratio<i64>>,
    /// defect of the equivalence min_sigma = 1 + margin (n-4)/(6h)
    pub equivalence_defect: f64,
}

pub fn stability_predicate(dim: &Dim, curv: &CurvatureData) -> Result<StabilityReport> {
    let nf = dim.nf();
    let ricmat = RicciMatrix::from_curvature(dim, curv)?;
    let ric_max = curv
        .ric
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::MIN, f64::max);
    let threshold = -6.0 * curv.hval / (nf - 4.0);
    let margin = threshold - ric_max;
    let min_sigma = ricmat.eigvals.iter().cloned().fold(f64::MAX, f64::min);
    let min_sigma_exact = ricmat.eigvals_exact.as_ref().map(|v| {
        v.iter()
            .cloned()
            .fold(None, |acc: Option<Ratio<i64>>, x| match acc {
                None => Some(x),
                Some(a) => Some(if x < a { x } else { a }),
            })
            .unwrap()
    });
    let stable = match &min_sigma_exact {
        Some(s) => *s >= Ratio::from_integer(1),
        None => min_sigma >= 1.0 - 1e-13,
    };
    let equivalence_defect = (min_sigma - (1.0 + margin * (nf - 4.0) / (6.0 * curv.hval))).abs();
    Ok(StabilityReport { stable, margin, min_sigma, min_sigma_exact, equivalence_defect })
}

/// Context for mu0-weighted Hoelder norms of parameter paths.
pub struct Mu0Weights<'a> {
    pub dim: &'a Dim,
    pub table: &'a ConstantsTable,
}

/// The weighted Hoelder norm sup_t mu0^{-nu}(t) [|f(t)| + [f]_{C^{sigma/2}}(t)],
/// with the local seminorm approximated by the max over sampled pairs in
/// (max(t0, t-1), t). A sampled seminorm is a lower bound of the continuum one.
pub fn norm_nu_sigma(weights: &Mu0Weights, path: &ScalarPath, nu: f64, sigma: f64) -> Result<f64> {
    let tg = &path.tgrid;
    let t0 = tg[0];
    let mut sup = 0.0f64;
    for (k, &t) in tg.iter().enumerate() {
        let w = mu0(weights.dim, weights.table, t)?.powf(-nu);
        let mut semi = 0.0f64;
        let lo = (t - 1.0).max(t0);
        let samples = 12usize;
        for a in 0..samples {
            for b in (a + 1)..=samples {
                let ta = lo + (t - lo) * a as f64 / samples as f64;
                let tb = lo + (t - lo) * b as f64 / samples as f64;
                if tb > ta {
                    let (va, _) = path.at(ta);
                    let (vb, _) = path.at(tb);
                    semi = semi.max((vb - va).abs() / (tb - ta).powf(sigma / 2.0));
                }
            }
        }
        sup = sup.max(w * (path.value[k].abs() + semi));
    }
    Ok(sup)
}

/// Sum of component norms for a vector path.
pub fn norm_nu_sigma_vec(
    weights: &Mu0Weights,
    path: &VectorPath,
    nu: f64,
    sigma: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for c in &path.comps {
        acc += norm_nu_sigma(weights, c, nu, sigma)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::compute_constants;
    use approx::assert_relative_eq;

    fn setup() -> (Dim, ConstantsTable) {
        let d = Dim::new(5).unwrap();
        let t = compute_constants(&d, 1e-12).unwrap();
        (d, t)
    }

    #[test]
    fn mu0_scaling_law() {
        let (d, t) = setup();
        let a = mu0(&d, &t, 7.0).unwrap();
        let b = mu0(&d, &t, 28.0).unwrap();
        assert_relative_eq!(b, a / 2.0, max_relative = 1e-14);
        assert!(mu0(&d, &t, 0.0).is_err());
        // mu(t) sqrt(t) is the predicted constant
        let c = mubar(&d, &t, 2.0, 50.0).unwrap() * 50f64.sqrt();
        let expect = (2.0 * t.c1 / ((d.nf() + 2.0) * t.c2 * 2.0)).sqrt();
        assert_relative_eq!(c, expect, max_relative = 1e-14);
    }

    /// RK4 integration oracle for scalar ODEs.
    fn rk4<F: Fn(f64, f64) -> f64>(f: F, mut y: f64, t0: f64, t1: f64, steps: usize) -> f64 {
        let h = (t1 - t0) / steps as f64;
        let mut t = t0;
        for _ in 0..steps {
            let k1 = f(t, y);
            let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
            let k4 = f(t + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        y
    }

    #[test]
    fn mubar_closed_form_matches_rk4() {
        let (d, t) = setup();
        let h0 = 1.5;
        let t0 = 40.0;
        let rate = -(d.nf() + 2.0) * t.c2 * h0 / (4.0 * t.c1);
        let mut worst = 0.0f64;
        let mut y = mubar(&d, &t, h0, t0).unwrap();
        let mut tcur = t0;
        for &tnext in &geometric_grid(t0, 100.0 * t0, 60)[1..] {
            y = rk4(|_, m| rate * m * m * m, y, tcur, tnext, 400);
            tcur = tnext;
            let exact = mubar(&d, &t, h0, tcur).unwrap();
            worst = worst.max(((y - exact) / exact).abs());
        }
        assert!(worst < 1e-6, "RK4 vs closed form: {worst:.3e}");
    }

    #[test]
    fn lambda_operator_zero_and_closed_form() {
        let t0 = 10.0;
        let tg = geometric_grid(t0, 1000.0, 200);
        let z = solve_lambda(|_| 0.0, t0, &tg).unwrap();
        assert!(z.value.iter().all(|v| *v == 0.0));
        // f(s) = s^{-5/2}  ->  lambda(t) = t^{-3/2} ln(t/t0)
        let l = solve_lambda(|s| s.powf(-2.5), t0, &tg).unwrap();
        for (k, &t) in tg.iter().enumerate() {
            let exact = t.powf(-1.5) * (t / t0).ln();
            assert!((l.value[k] - exact).abs() <= 1e-12 * (1.0 + exact.abs()), "at t={t}");
        }
    }

    #[test]
    fn lambda_ode_residual_fd() {
        let t0 = 10.0;
        let tg = geometric_grid(t0, 1e4, 400);
        let f = |s: f64| (1.0 + (s / 30.0).sin()) * s.powf(-2.7);
        let l = solve_lambda(f, t0, &tg).unwrap();
        let mut worst = 0.0f64;
        for &t in &tg[2..tg.len() - 2] {
            let dt = 1e-4 * t;
            let (vp, _) = l.at(t + dt);
            let (vm, _) = l.at(t - dt);
            let ld = (vp - vm) / (2.0 * dt);
            let (v, _) = l.at(t);
            let res = ld + 1.5 * v / t - f(t);
            worst = worst.max(res.abs());
        }
        assert!(worst < 1e-8, "FD residual {worst:.3e}");
    }

    fn identity_ricmat(d: &Dim, scale: f64) -> RicciMatrix {
        // M = scale * I built from Ric = -(6 h0/(n-4)) * scale * I with h0 = 1
        let nf = d.nf();
        let ric = DMatrix::identity(d.n, d.n) * (-6.0 / (nf - 4.0) * scale);
        let curv = CurvatureData::new(ric, 0.0, 1.0).unwrap();
        RicciMatrix::from_curvature(d, &curv).unwrap()
    }

    #[test]
    fn xi_zero_forcing_and_log_solution() {
        let d = Dim::new(5).unwrap();
        let t0 = 10.0;
        let tg = geometric_grid(t0, 1e4, 300);
        let rm = identity_ricmat(&d, 1.0);
        let z = solve_xi(|_| vec![0.0; 5], &rm, 3.9, t0, &tg).unwrap();
        assert!(z.comps.iter().all(|c| c.value.iter().all(|v| *v == 0.0)));
        // M = I, f = t^{-2} e1, boundary nu/2-1 < 1: xi_1 = t^{-1} ln(t/t0)
        let x = solve_xi(
            |s| {
                let mut f = vec![0.0; 5];
                f[0] = s.powf(-2.0);
                f
            },
            &rm,
            3.9,
            t0,
            &tg,
        )
        .unwrap();
        for (k, &t) in tg.iter().enumerate() {
            let exact = (t / t0).ln() / t;
            assert!(
                (x.comps[0].value[k] - exact).abs() <= 1e-11 * (1.0 + exact.abs()),
                "xi_1 at t={t}: {} vs {exact}",
                x.comps[0].value[k]
            );
            assert!(x.comps[3].value[k].abs() < 1e-14);
        }
    }

    #[test]
    fn xi_backward_branch_and_residual() {
        let d = Dim::new(5).unwrap();
        let t0 = 20.0;
        let tg = geometric_grid(t0, 5e3, 300);
        // Ric = 0 so sigma_i = 0 < nu/2 - 1: pure backward branch
        let curv = CurvatureData::flat(&d, 1.0);
        let rm = RicciMatrix::from_curvature(&d, &curv).unwrap();
        let nu = 3.8;
        let f = |s: f64| {
            let mut v = vec![0.0; 5];
            v[0] = s.powf(-nu / 2.0 - 1.0);
            v[2] = 0.5 * s.powf(-nu / 2.0 - 1.0);
            v
        };
        let x = solve_xi(f, &rm, nu, t0, &tg).unwrap();
        for (k, &t) in tg.iter().enumerate() {
            let exact = -t.powf(-nu / 2.0) / (nu / 2.0);
            assert!(
                (x.comps[0].value[k] - exact).abs() < 1e-10 * exact.abs(),
                "backward branch at t={t}"
            );
        }
        let mut worst = 0.0f64;
        for &t in &tg[1..tg.len() - 2] {
            let dt = 1e-4 * t;
            for i in [0usize, 2] {
                let (vp, _) = x.comps[i].at(t + dt);
                let (vm, _) = x.comps[i].at(t - dt);
                let xd = (vp - vm) / (2.0 * dt);
                let res = xd - f(t)[i];
                worst = worst.max(res.abs());
            }
        }
        assert!(worst < 1e-8, "xi FD residual {worst:.3e}");
        let eps0 = 0.1;
        let bound = x
            .comps
            .iter()
            .flat_map(|c| c.value.iter().zip(&c.tgrid).map(|(v, t)| v.abs() * t.powf(1.0 - eps0)))
            .fold(0.0f64, f64::max);
        assert!(bound.is_finite() && bound < 1.0);
    }

    #[test]
    fn xi_linearity_exact() {
        let d = Dim::new(5).unwrap();
        let t0 = 10.0;
        let tg = geometric_grid(t0, 1e3, 100);
        let rm = identity_ricmat(&d, 1.3);
        let f = |s: f64| vec![s.powf(-2.2), 0.0, s.powf(-2.4), 0.0, 0.0];
        let x1 = solve_xi(f, &rm, 3.9, t0, &tg).unwrap();
        let x3 = solve_xi(|s| f(s).iter().map(|v| 3.0 * v).collect(), &rm, 3.9, t0, &tg).unwrap();
        for i in 0..5 {
            for k in 0..tg.len() {
                let a = 3.0 * x1.comps[i].value[k];
                let b = x3.comps[i].value[k];
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300), "linearity at ({i},{k})");
            }
        }
    }

    #[test]
    fn xi_branch_boundary_guard() {
        let d = Dim::new(5).unwrap();
        let tg = geometric_grid(10.0, 100.0, 10);
        // sigma_i = 0.95 equals nu/2-1 for nu = 3.9
        let rm = identity_ricmat(&d, 0.95);
        let out = solve_xi(|_| vec![0.0; 5], &rm, 3.9, 10.0, &tg);
        assert!(out.is_err());
    }

    #[test]
    fn stability_boundary_exact() {
        let d = Dim::new(5).unwrap();
        // Ric = -(6/(n-4)) h0 I with h0 = 1, exact rationals
        let diag = vec![Ratio::new(-6, 1); 5];
        let curv = CurvatureData::diagonal_exact(&d, diag, 0.0, Ratio::new(1, 1)).unwrap();
        let rep = stability_predicate(&d, &curv).unwrap();
        assert!(rep.stable);
        assert_eq!(rep.min_sigma_exact.unwrap(), Ratio::from_integer(1));
        assert!(rep.margin.abs() < 1e-12);
        assert!(rep.equivalence_defect < 1e-12);
    }

    #[test]
    fn stability_flat_and_scaled() {
        let d = Dim::new(5).unwrap();
        let flat = CurvatureData::flat(&d, 1.0);
        assert!(!stability_predicate(&d, &flat).unwrap().stable);
        let diag = vec![Ratio::new(-12, 1); 5];
        let curv = CurvatureData::diagonal_exact(&d, diag, 0.0, Ratio::new(1, 1)).unwrap();
        let rep = stability_predicate(&d, &curv).unwrap();
        assert!(rep.stable);
        assert_eq!(rep.min_sigma_exact.unwrap(), Ratio::from_integer(2));
    }

    #[test]
    fn holder_norm_weight_inversion() {
        let (d, t) = setup();
        let weights = Mu0Weights { dim: &d, table: &t };
        let t0 = 25.0;
        let tg = geometric_grid(t0, 2500.0, 250);
        let nu = 1.9;
        // lambda = mu0^nu exactly: the plain part contributes exactly 1
        let mut lam = ScalarPath::zero(&tg);
        for (k, &tt) in tg.iter().enumerate() {
            lam.value[k] = mu0(&d, &t, tt).unwrap().powf(nu);
            lam.deriv[k] = -0.5 * nu / tt * lam.value[k];
        }
        let v = norm_nu_sigma(&weights, &lam, nu, 0.5).unwrap();
        assert!(v >= 1.0 && v.is_finite());
        // zero path
        let z = ScalarPath::zero(&tg);
        assert_eq!(norm_nu_sigma(&weights, &z, nu, 0.5).unwrap(), 0.0);
        // lambda = mu0^{nu+1}: value decays as t0 grows
        let mut prev = f64::MAX;
        for t0x in [25.0, 100.0, 400.0] {
            let tgx = geometric_grid(t0x, 100.0 * t0x, 250);
            let mut l = ScalarPath::zero(&tgx);
            for (k, &tt) in tgx.iter().enumerate() {
                l.value[k] = mu0(&d, &t, tt).unwrap().powf(nu + 1.0);
                l.deriv[k] = -0.5 * (nu + 1.0) / tt * l.value[k];
            }
            let v = norm_nu_sigma(&weights, &l, nu, 0.5).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
