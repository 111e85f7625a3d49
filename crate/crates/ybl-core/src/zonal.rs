//! Spectral machinery for rotationally symmetric functions on the round
//! sphere S^n: Gegenbauer quadrature, normalised zonal and first-order
//! harmonics, mode transforms, and the zonal Green's function of the
//! perturbed conformal Laplacian.

use crate::dim::{gamma_half_int, sphere_area, Dim};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Gauss rule for the weight (1 - x^2)^{lambda - 1/2} on [-1, 1], built by
/// Golub-Welsch from the Gegenbauer three-term recurrence.
#[derive(Debug, Clone)]
pub struct GegenRule {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

/// Gamma(a) for a = k/2; all Gamma arguments in this module are integer or
/// half-integer.
fn gamma_doubled(twice_a: usize) -> f64 {
    gamma_half_int(twice_a)
}

impl GegenRule {
    /// `twice_lambda` keeps the argument exact for half-integer lambda.
    pub fn new(twice_lambda: usize, n_nodes: usize) -> Self {
        let lambda = twice_lambda as f64 / 2.0;
        // Jacobi matrix of the monic recurrence for ultraspherical weight:
        // b_k^2 = k (k + 2 lambda - 1) / (4 (k + lambda)(k + lambda - 1))
        let mut tri = DMatrix::<f64>::zeros(n_nodes, n_nodes);
        for k in 1..n_nodes {
            let kf = k as f64;
            let b2 = kf * (kf + 2.0 * lambda - 1.0)
                / (4.0 * (kf + lambda) * (kf + lambda - 1.0));
            let b = b2.sqrt();
            tri[(k, k - 1)] = b;
            tri[(k - 1, k)] = b;
        }
        let se = tri.symmetric_eigen();
        // mu0 = int (1-x^2)^{lambda-1/2} dx = sqrt(pi) Gamma(lambda+1/2)/Gamma(lambda+1)
        let mu0 = std::f64::consts::PI.sqrt() * gamma_doubled(twice_lambda + 1)
            / gamma_doubled(twice_lambda + 2);
        let mut pairs: Vec<(f64, f64)> = (0..n_nodes)
            .map(|i| {
                let node = se.eigenvalues[i];
                let w = mu0 * se.eigenvectors[(0, i)].powi(2);
                (node, w)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        GegenRule {
            lambda,
            x: pairs.iter().map(|p| p.0).collect(),
            w: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Gegenbauer polynomial C_l^lambda(x) by the standard recurrence.
pub fn gegenbauer(lambda: f64, ell: usize, x: f64) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * lambda * x;
    for k in 1..ell {
        let kf = k as f64;
        let c2 = (2.0 * (kf + lambda) * x * c1 - (kf + 2.0 * lambda - 1.0) * c0) / (kf + 1.0);
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// L^2 weight of C_l^lambda against (1-x^2)^{lambda-1/2}:
/// h_l = pi 2^{1-2 lambda} Gamma(l+2 lambda) / (l! (l+lambda) Gamma(lambda)^2).
pub fn gegenbauer_norm_sq(twice_lambda: usize, ell: usize) -> f64 {
    let lambda = twice_lambda as f64 / 2.0;
    // Gamma(l + 2 lambda) with 2 lambda = twice_lambda / ... integer or half-integer
    let g_num = gamma_doubled(2 * ell + 2 * twice_lambda / 2 * 2 - 0 + 2 * 0 + 2 * twice_lambda - 2 * twice_lambda + 2 * ell * 0 + 2 * twice_lambda);
    let _ = g_num;
    let gamma_l_plus_2lambda = gamma_doubled(2 * ell + 2 * twice_lambda);
    let mut l_fact = 1.0;
    for k in 2..=ell {
        l_fact *= k as f64;
    }
    let gamma_lambda = gamma_doubled(twice_lambda);
    std::f64::consts::PI * 2f64.powf(1.0 - 2.0 * lambda) * gamma_l_plus_2lambda
        / (l_fact * (ell as f64 + lambda) * gamma_lambda * gamma_lambda)
}

/// Eigenvalue of -Lap_{S^n} on degree-l spherical harmonics.
pub fn sphere_eigenvalue(n: usize, ell: usize) -> f64 {
    ell as f64 * (ell as f64 + n as f64 - 1.0)
}

/// Zonal spectral basis on S^n for functions of the polar angle alone.
#[derive(Debug, Clone)]
pub struct ZonalBasis {
    pub dim: Dim,
    pub rule: GegenRule,
    pub lmax: usize,
    /// harmonic values at the quadrature nodes, row l, column node
    pub modes: Vec<Vec<f64>>,
    /// 1/sqrt(|S^{n-1}| h_l) normalisers
    pub norms: Vec<f64>,
}

impl ZonalBasis {
    pub fn new(dim: &Dim, lmax: usize, n_nodes: usize) -> Self {
        let twice_lambda = dim.n - 1; // lambda = (n-1)/2
        let rule = GegenRule::new(twice_lambda, n_nodes);
        let area = sphere_area(dim.n);
        let lambda = twice_lambda as f64 / 2.0;
        let mut modes = Vec::with_capacity(lmax + 1);
        let mut norms = Vec::with_capacity(lmax + 1);
        for ell in 0..=lmax {
            let h = gegenbauer_norm_sq(twice_lambda, ell);
            let nrm = 1.0 / (area * h).sqrt();
            norms.push(nrm);
            modes.push(rule.x.iter().map(|&x| nrm * gegenbauer(lambda, ell, x)).collect());
        }
        ZonalBasis { dim: *dim, rule, lmax, modes, norms }
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.rule.x.iter().map(|&x| x.acos()).collect()
    }

    /// Normalised zonal harmonic value at arbitrary polar cosine.
    pub fn harmonic(&self, ell: usize, cos_theta: f64) -> f64 {
        self.norms[ell] * gegenbauer((self.dim.n as f64 - 1.0) / 2.0, ell, cos_theta)
    }

    /// Coefficients of a nodal field: a_l = int_{S^n} f Y_l.
    pub fn analyse(&self, nodal: &[f64]) -> Result<Vec<f64>> {
        if nodal.len() != self.rule.x.len() {
            return Err(Error::GridMismatch(format!(
                "zonal field has {} nodes, basis has {}",
                nodal.len(),
                self.rule.x.len()
            )));
        }
        let area = sphere_area(self.dim.n);
        Ok((0..=self.lmax)
            .map(|ell| {
                area
                    * self
                        .rule
                        .w
                        .iter()
                        .zip(nodal)
                        .zip(&self.modes[ell])
                        .map(|((w, f), y)| w * f * y)
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn synthesise(&self, coeffs: &[f64]) -> Vec<f64> {
        let nn = self.rule.x.len();
        let mut out = vec![0.0; nn];
        for (ell, a) in coeffs.iter().enumerate() {
            for k in 0..nn {
                out[k] += a * self.modes[ell][k];
            }
        }
        out
    }

    /// Spectral Laplace-Beltrami of a nodal zonal field.
    pub fn laplacian(&self, nodal: &[f64]) -> Result<Vec<f64>> {
        let coeffs = self.analyse(nodal)?;
        let scaled: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(ell, a)| -sphere_eigenvalue(self.dim.n, ell) * a)
            .collect();
        Ok(self.synthesise(&scaled))
    }

    /// Relative tail mass of the mode expansion, a truncation diagnostic.
    pub fn tail_fraction(&self, coeffs: &[f64], keep: usize) -> f64 {
        let total: f64 = coeffs.iter().map(|a| a * a).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = coeffs.iter().skip(keep).map(|a| a * a).sum();
        (tail / total).sqrt()
    }
}

/// First-order (tangential) spectral channel: fields F(theta) w_i on S^n
/// for a fixed equatorial direction index i, expanded in
/// sin(theta) C^{lambda+1}_{l-1}(cos theta).
#[derive(Debug, Clone)]
pub struct Order1Basis {
    pub dim: Dim,
    pub rule: GegenRule,
    pub lmax: usize,
    pub modes: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl Order1Basis {
    pub fn new(dim: &Dim, lmax: usize, n_nodes: usize) -> Self {
        // quadrature against the lambda+1 weight absorbs the sin^2 factor
        let twice_lambda1 = dim.n + 1; // 2 (lambda + 1)
        let rule = GegenRule::new(twice_lambda1, n_nodes);
        let area = sphere_area(dim.n);
        let lambda1 = twice_lambda1 as f64 / 2.0;
        let nf = dim.nf();
        let mut modes = Vec::new();
        let mut norms = Vec::new();
        for ell in 1..=lmax {
            let h = gegenbauer_norm_sq(twice_lambda1, ell - 1);
            // int_{S^n} (F w_i)^2 = (|S^{n-1}|/n) int F^2 sin^{n-1}
            let nrm = 1.0 / ((area / nf) * h).sqrt();
            norms.push(nrm);
            modes.push(rule.x.iter().map(|&x| nrm * gegenbauer(lambda1, ell - 1, x)).collect());
        }
        Order1Basis { dim: *dim, rule, lmax, modes, norms }
    }

    /// Coefficients of F(theta) given F at the rule's nodes; the expansion
    /// reads F(theta) = sum_l a_l sin(theta) C~_{l-1}(cos theta).
    pub fn analyse(&self, f_over_sin: &[f64]) -> Result<Vec<f64>> {
        if f_over_sin.len() != self.rule.x.len() {
            return Err(Error::GridMismatch("order-1 field node mismatch".into()));
        }
        let area = sphere_area(self.dim.n) / self.dim.nf();
        Ok((0..self.modes.len())
            .map(|j| {
                area
                    * self
                        .rule
                        .w
                        .iter()
                        .zip(f_over_sin)
                        .zip(&self.modes[j])
                        .map(|((w, f), y)| w * f * y)
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn harmonic_over_sin(&self, ell: usize, cos_theta: f64) -> f64 {
        let lambda1 = (self.dim.n as f64 + 1.0) / 2.0;
        self.norms[ell - 1] * gegenbauer(lambda1, ell - 1, cos_theta)
    }
}

/// Zonal Green's function of kappa*Lap - (S + h) on the unit sphere with
/// constant h, tabulated by backward integration from the antipode and
/// rescaled to the unit-strength pole.
#[derive(Debug, Clone)]
pub struct ZonalGreens {
    pub dim: Dim,
    pub h0: f64,
    thetas: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl ZonalGreens {
    pub fn new(dim: &Dim, h0: f64) -> Result<Self> {
        if h0 <= 0.0 {
            return Err(Error::domain("zonal Green's function needs h0 > 0"));
        }
        let nf = dim.nf();
        let kappa = dim.kappa;
        let stot = dim.sphere_scalar() + h0;
        // start just inside the antipode with the even series
        // G(pi - s) = 1 + stot s^2 / (2 n kappa) + O(s^4)
        let s0 = 1e-4;
        let mut theta = std::f64::consts::PI - s0;
        let mut g = 1.0 + stot * s0 * s0 / (2.0 * nf * kappa);
        let mut gp = stot * s0 / (nf * kappa); // dG/ds = -dG/dtheta
        let mut gp_theta = -gp;
        let rhs = |th: f64, y: (f64, f64)| -> (f64, f64) {
            let (gv, gv_p) = y;
            (gv_p, stot / kappa * gv - (nf - 1.0) / th.tan() * gv_p)
        };
        let theta_min = 1e-6;
        let mut thetas = Vec::new();
        let mut values = Vec::new();
        let mut derivs = Vec::new();
        let mut push = |th: f64, gv: f64, gd: f64| {
            thetas.push(th);
            values.push(gv);
            derivs.push(gd);
        };
        push(std::f64::consts::PI, 1.0, 0.0);
        push(theta, g, gp_theta);
        while theta > theta_min {
            let h = -(theta / 1600.0).min(1.25e-4);
            let y = (g, gp_theta);
            let k1 = rhs(theta, y);
            let k2 = rhs(theta + 0.5 * h, (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1));
            let k3 = rhs(theta + 0.5 * h, (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1));
            let k4 = rhs(theta + h, (y.0 + h * k3.0, y.1 + h * k3.1));
            g += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            gp_theta += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            theta += h;
            push(theta, g, gp_theta);
        }
        // singular strength and rescale to gamma/kappa theta^{2-n}
        let a0 = g * theta.powi(dim.n as i32 - 2);
        let scale = dim.gamma / dim.kappa / a0;
        for v in values.iter_mut() {
            *v *= scale;
        }
        for v in derivs.iter_mut() {
            *v *= scale;
        }
        thetas.reverse();
        values.reverse();
        derivs.reverse();
        gp = 0.0;
        let _ = gp;
        Ok(ZonalGreens { dim: *dim, h0, thetas, values, derivs })
    }

    /// Value and polar derivative at theta; errors at the pole itself.
    pub fn eval(&self, theta: f64) -> Result<(f64, f64)> {
        if theta <= 0.0 {
            return Err(Error::Singular("zonal Green's function pole".into()));
        }
        if theta < self.thetas[0] {
            // continue with the pure power law below the table
            let v = self.dim.gamma / self.dim.kappa * theta.powi(2 - self.dim.n as i32);
            let dv = (2.0 - self.dim.nf()) * v / theta;
            return Ok((v, dv));
        }
        let k = match self
            .thetas
            .binary_search_by(|x| x.partial_cmp(&theta).unwrap())
        {
            Ok(i) => i.min(self.thetas.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.thetas.len() - 2),
        };
        let (t0, t1) = (self.thetas[k], self.thetas[k + 1]);
        let h = t1 - t0;
        let s = (theta - t0) / h;
        let (h00, h10, h01, h11) = (
            2.0 * s * s * s - 3.0 * s * s + 1.0,
            s * s * s - 2.0 * s * s + s,
            -2.0 * s * s * s + 3.0 * s * s,
            s * s * s - s * s,
        );
        let v = h00 * self.values[k]
            + h10 * h * self.derivs[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.derivs[k + 1];
        let dv = (6.0 * s * s - 6.0 * s) * (self.values[k] - self.values[k + 1]) / h
            + (3.0 * s * s - 4.0 * s + 1.0) * self.derivs[k]
            + (3.0 * s * s - 2.0 * s) * self.derivs[k + 1];
        Ok((v, dv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_integrates_sphere_area() {
        let d = Dim::new(5).unwrap();
        let rule = GegenRule::new(d.n - 1, 64);
        // int_{S^5} 1 dS = |S^4| * sum w
        let total: f64 = rule.w.iter().sum();
        assert_relative_eq!(sphere_area(5) * total, sphere_area(6), max_relative = 1e-13);
    }

    #[test]
    fn zonal_modes_orthonormal() {
        let d = Dim::new(5).unwrap();
        let basis = ZonalBasis::new(&d, 24, 128);
        for l1 in [0usize, 1, 2, 7, 24] {
            for l2 in [0usize, 1, 5, 24] {
                let ip: f64 = sphere_area(5)
                    * basis
                        .rule
                        .w
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * basis.modes[l1][k] * basis.modes[l2][k])
                        .sum::<f64>();
                let expect = if l1 == l2 { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({l1},{l2}): {ip}");
            }
        }
    }

    #[test]
    fn analysis_synthesis_roundtrip() {
        let d = Dim::new(5).unwrap();
        let basis = ZonalBasis::new(&d, 32, 160);
        let nodal: Vec<f64> = basis
            .rule
            .x
            .iter()
            .map(|&x| (1.0 + x).powi(3) * (2.5 * x).cos())
            .collect();
        let coeffs = basis.analyse(&nodal).unwrap();
        let back = basis.synthesise(&coeffs);
        for (a, b) in nodal.iter().zip(&back) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(basis.tail_fraction(&coeffs, 28) < 1e-10);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let d = Dim::new(5).unwrap();
        let basis = ZonalBasis::new(&d, 16, 96);
        // Y_3 is an eigenfunction with eigenvalue -3(3+4)
        let nodal: Vec<f64> = basis.modes[3].clone();
        let lap = basis.laplacian(&nodal).unwrap();
        for (l, f) in lap.iter().zip(&nodal) {
            assert_relative_eq!(*l, -sphere_eigenvalue(5, 3) * f, max_relative = 1e-10);
        }
    }

    #[test]
    fn order1_modes_orthonormal() {
        let d = Dim::new(5).unwrap();
        let basis = Order1Basis::new(&d, 12, 96);
        let area = sphere_area(5) / 5.0;
        for j1 in 0..4usize {
            for j2 in 0..4usize {
                let ip: f64 = area
                    * basis
                        .rule
                        .w
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * basis.modes[j1][k] * basis.modes[j2][k])
                        .sum::<f64>();
                let expect = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "({j1},{j2}): {ip}");
            }
        }
    }

    #[test]
    fn zonal_green_near_field_and_equation() {
        let d = Dim::new(5).unwrap();
        let zg = ZonalGreens::new(&d, 1.0).unwrap();
        // normalised singularity
        for th in [1e-4, 1e-3, 1e-2] {
            let (v, _) = zg.eval(th).unwrap();
            let scaled = v * d.kappa / d.gamma * th.powi(3);
            assert!((scaled - 1.0).abs() < 2e-4, "theta={th}: {scaled}");
        }
        // interior equation residual by finite differences
        let stot = d.sphere_scalar() + 1.0;
        for th in [0.5f64, 1.2, 2.2, 3.0] {
            let dh = 1e-5;
            let (vm, _) = zg.eval(th - dh).unwrap();
            let (v0, d0) = zg.eval(th).unwrap();
            let (vp, _) = zg.eval(th + dh).unwrap();
            let second = (vp - 2.0 * v0 + vm) / (dh * dh);
            let res = d.kappa * (second + 4.0 / th.tan() * d0) - stot * v0;
            assert!(res.abs() < 1e-4 * v0.abs().max(1e-8), "res {res:.3e} at {th}");
        }
        // antipodal regularity
        let (_, dpi) = zg.eval(std::f64::consts::PI - 1e-9).unwrap();
        assert!(dpi.abs() < 1e-5);
        assert!(zg.eval(0.0).is_err());
    }
}
