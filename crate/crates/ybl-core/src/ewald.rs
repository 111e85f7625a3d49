//! Screened lattice Green's functions on flat tori by Ewald summation.
//!
//! The operator is kappa*Lap - h with constant h > 0, so the periodic
//! Green's function is (1/kappa) times the screened Poisson kernel with
//! mass m^2 = h/kappa. The kernel splits into a Gaussian-short-ranged
//! image sum (free Yukawa kernel minus its heat-smoothed part) and a
//! rapidly converging reciprocal sum; both parts are analytic in the
//! evaluation point, so gradients and Laplacians come from closed-form
//! radial recursions rather than finite differences.

use crate::dim::{gamma_half_int, Dim};
use crate::error::{Error, Result};
use crate::quad::integrate;
use std::f64::consts::PI;

/// Modified Bessel K of half-integer order nu = j + 1/2, elementary form.
fn bessel_k_half(j: usize, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut num = 1.0; // (j+k)! / (k! (j-k)!)
    for k in 0..=j {
        if k > 0 {
            num *= ((j + k) as f64) * ((j - k + 1) as f64) / k as f64;
        }
        sum += num / (2.0 * z).powi(k as i32);
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

/// Modified Bessel K of integer order by the cosh-integral representation.
fn bessel_k_int(nu: usize, z: f64) -> f64 {
    if z > 690.0 {
        return 0.0;
    }
    // e^{-z cosh t} is negligible once z (cosh t - 1) > 46
    let umax = ((z + 46.0) / z).acosh();
    integrate(
        |t| (-z * t.cosh()).exp() * (nu as f64 * t).cosh(),
        0.0,
        umax,
        1e-13,
    )
    .unwrap_or(0.0)
}

/// Free-space screened kernel of formal index n:
/// Y_n(r) = (2 pi)^{-n/2} (m/r)^{n/2-1} K_{n/2-1}(m r),
/// satisfying (-Lap_n + m^2) Y_n = delta in R^n.
pub fn yukawa_free(n: usize, m: f64, r: f64) -> f64 {
    let z = m * r;
    let halfnm1 = n as f64 / 2.0 - 1.0;
    let k = if n % 2 == 1 {
        bessel_k_half((n - 3) / 2, z)
    } else {
        bessel_k_int(n / 2 - 1, z)
    };
    (2.0 * PI).powf(-(n as f64) / 2.0) * (m / r).powf(halfnm1) * k
}

/// Smooth long-range remainder psi_n(r) = int_T^inf (4 pi s)^{-n/2}
/// exp(-r^2/(4s) - m^2 s) ds with T = 1/(4 eta^2).
fn psi_smooth(n: usize, m: f64, tcut: f64, r: f64) -> f64 {
    // substitute s = T / x^2, x in (0, 1]
    integrate(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            let s = tcut / (x * x);
            let v = (4.0 * PI * s).powf(-(n as f64) / 2.0) * (-r * r / (4.0 * s) - m * m * s).exp();
            v * 2.0 * tcut / (x * x * x)
        },
        0.0,
        1.0,
        1e-13,
    )
    .unwrap_or(0.0)
}

/// Cubic-Hermite spline on a uniform grid.
#[derive(Debug, Clone)]
struct Spline {
    x0: f64,
    dx: f64,
    val: Vec<f64>,
    der: Vec<f64>,
}

impl Spline {
    fn build<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(x0: f64, x1: f64, n: usize, f: F, df: G) -> Self {
        let dx = (x1 - x0) / (n - 1) as f64;
        let mut val = Vec::with_capacity(n);
        let mut der = Vec::with_capacity(n);
        for k in 0..n {
            let x = x0 + k as f64 * dx;
            val.push(f(x));
            der.push(df(x));
        }
        Spline { x0, dx, val, der }
    }

    fn at(&self, x: f64) -> f64 {
        let u = ((x - self.x0) / self.dx).clamp(0.0, (self.val.len() - 1) as f64);
        let k = (u as usize).min(self.val.len() - 2);
        let t = u - k as f64;
        let (h00, h10, h01, h11) = (
            2.0 * t * t * t - 3.0 * t * t + 1.0,
            t * t * t - 2.0 * t * t + t,
            -2.0 * t * t * t + 3.0 * t * t,
            t * t * t - t * t,
        );
        h00 * self.val[k]
            + h10 * self.dx * self.der[k]
            + h01 * self.val[k + 1]
            + h11 * self.dx * self.der[k + 1]
    }
}

/// Radial jet of a scalar kernel: value, d/dr, d2/dr2.
#[derive(Debug, Clone, Copy, Default)]
pub struct RadialJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Jet of the Green's function at a point: value, gradient, Laplacian.
#[derive(Debug, Clone)]
pub struct GreensJet {
    pub v: f64,
    pub grad: Vec<f64>,
    pub lap: f64,
}

/// Ewald-synthesised Green's table for one torus and one constant
/// perturbation value.
pub struct LatticeGreens {
    pub dim: Dim,
    pub periods: Vec<f64>,
    pub h0: f64,
    pub kappa: f64,
    m: f64,
    eta: f64,
    rc: f64,
    images: Vec<Vec<f64>>,
    /// reciprocal terms (k vector, amplitude)
    kterms: Vec<(Vec<f64>, f64)>,
    /// psi splines for indices n, n+2, n+4
    psi: [Spline; 3],
}

impl LatticeGreens {
    /// Build the table. `split_factor` scales the Ewald parameter around
    /// sqrt(pi)/L_min; 1.0 balances both sums near 1e4 terms in dimension 5.
    pub fn new(dim: &Dim, periods: &[f64], h0: f64, split_factor: f64) -> Result<Self> {
        if periods.len() != dim.n {
            return Err(Error::domain("periods length must equal the dimension"));
        }
        if h0 <= 0.0 {
            return Err(Error::domain(
                "the constant perturbation must be positive for an invertible operator",
            ));
        }
        let lmin = periods.iter().cloned().fold(f64::MAX, f64::min);
        let eta = split_factor * PI.sqrt() / lmin;
        let m = (h0 / dim.kappa).sqrt();
        let rc = 6.2 / eta;
        let n = dim.n;

        // lattice vectors within the real-space cutoff plus one cell diagonal
        let diag = 0.5 * periods.iter().map(|l| l * l).sum::<f64>().sqrt();
        let reach = rc + diag;
        let mut images: Vec<Vec<f64>> = Vec::new();
        let ranges: Vec<i64> = periods.iter().map(|l| (reach / l).ceil() as i64).collect();
        let mut idx = vec![-ranges[0]; n];
        'outer: loop {
            let v: Vec<f64> = (0..n).map(|i| idx[i] as f64 * periods[i]).collect();
            if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= reach {
                images.push(v);
            }
            // odometer increment
            let mut pos = 0;
            loop {
                idx[pos] += 1;
                if idx[pos] <= ranges[pos] {
                    break;
                }
                idx[pos] = -ranges[pos];
                pos += 1;
                if pos == n {
                    break 'outer;
                }
            }
        }

        // reciprocal vectors with Gaussian weight above 1e-17
        let vol: f64 = periods.iter().product();
        let kc = 2.0 * eta * 6.3;
        let kranges: Vec<i64> = periods
            .iter()
            .map(|l| (kc * l / (2.0 * PI)).ceil() as i64)
            .collect();
        let mut kterms: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut jdx = vec![-kranges[0]; n];
        'kouter: loop {
            let k: Vec<f64> = (0..n).map(|i| 2.0 * PI * jdx[i] as f64 / periods[i]).collect();
            let k2: f64 = k.iter().map(|x| x * x).sum();
            if k2.sqrt() <= kc {
                let amp = (-(k2 + m * m) / (4.0 * eta * eta)).exp() / (vol * (k2 + m * m));
                kterms.push((k, amp));
            }
            let mut pos = 0;
            loop {
                jdx[pos] += 1;
                if jdx[pos] <= kranges[pos] {
                    break;
                }
                jdx[pos] = -kranges[pos];
                pos += 1;
                if pos == n {
                    break 'kouter;
                }
            }
        }
        if images.len() + kterms.len() > 200_000 {
            return Err(Error::numeric(
                "ewald",
                format!("term budget exceeded: {} + {}", images.len(), kterms.len()),
            ));
        }

        let tcut = 1.0 / (4.0 * eta * eta);
        let nodes = 4001;
        let mk_spline = |idx_n: usize| {
            Spline::build(
                0.0,
                rc * 1.001,
                nodes,
                |r| psi_smooth(idx_n, m, tcut, r),
                |r| -2.0 * PI * r * psi_smooth(idx_n + 2, m, tcut, r),
            )
        };
        let psi = [mk_spline(n), mk_spline(n + 2), mk_spline(n + 4)];

        Ok(LatticeGreens {
            dim: *dim,
            periods: periods.to_vec(),
            h0,
            kappa: dim.kappa,
            m,
            eta,
            rc,
            images,
            kterms,
            psi,
        })
    }

    pub fn split_parameter(&self) -> f64 {
        self.eta
    }

    pub fn term_counts(&self) -> (usize, usize) {
        (self.images.len(), self.kterms.len())
    }

    /// Short-ranged radial kernel jet at the family indices (n, n+2, n+4):
    /// phi_n = Y_n - psi_n, with d/dr phi_n = -2 pi r phi_{n+2}.
    fn short_jet(&self, r: f64) -> RadialJet {
        let n = self.dim.n;
        let f2 = yukawa_free(n + 2, self.m, r) - self.psi[1].at(r);
        let f4 = yukawa_free(n + 4, self.m, r) - self.psi[2].at(r);
        RadialJet {
            v: yukawa_free(n, self.m, r) - self.psi[0].at(r),
            d1: -2.0 * PI * r * f2,
            d2: -2.0 * PI * f2 + 4.0 * PI * PI * r * r * f4,
        }
    }

    fn wrap(&self, x: &[f64], z0: &[f64]) -> Vec<f64> {
        (0..self.dim.n)
            .map(|i| {
                let l = self.periods[i];
                let mut d = (x[i] - z0[i]) % l;
                if d > 0.5 * l {
                    d -= l;
                }
                if d < -0.5 * l {
                    d += l;
                }
                d
            })
            .collect()
    }

    /// Green's function value at x for the pole at z0.
    pub fn eval(&self, x: &[f64], z0: &[f64]) -> Result<f64> {
        let d = self.wrap(x, z0);
        let mut total = 0.0;
        for img in &self.images {
            let mut r2 = 0.0;
            for i in 0..self.dim.n {
                let w = d[i] + img[i];
                r2 += w * w;
            }
            let r = r2.sqrt();
            if r > self.rc {
                continue;
            }
            if r == 0.0 {
                return Err(Error::Singular("evaluation at the Green's-function pole".into()));
            }
            total += yukawa_free(self.dim.n, self.m, r) - self.psi[0].at(r);
        }
        for (k, amp) in &self.kterms {
            let phase: f64 = (0..self.dim.n).map(|i| k[i] * d[i]).sum();
            total += amp * phase.cos();
        }
        Ok(total / self.kappa)
    }

    /// Value, gradient, and Laplacian at x, all from closed-form radial
    /// recursions of the kernel family.
    pub fn jet(&self, x: &[f64], z0: &[f64]) -> Result<GreensJet> {
        let n = self.dim.n;
        let d = self.wrap(x, z0);
        let mut v = 0.0;
        let mut grad = vec![0.0; n];
        let mut lap = 0.0;
        for img in &self.images {
            let w: Vec<f64> = (0..n).map(|i| d[i] + img[i]).collect();
            let r2: f64 = w.iter().map(|x| x * x).sum();
            let r = r2.sqrt();
            if r > self.rc {
                continue;
            }
            if r == 0.0 {
                return Err(Error::Singular("jet at the Green's-function pole".into()));
            }
            let jet = self.short_jet(r);
            v += jet.v;
            for i in 0..n {
                grad[i] += w[i] / r * jet.d1;
            }
            lap += jet.d2 + (n as f64 - 1.0) / r * jet.d1;
        }
        for (k, amp) in &self.kterms {
            let phase: f64 = (0..n).map(|i| k[i] * d[i]).sum();
            let k2: f64 = k.iter().map(|x| x * x).sum();
            let c = phase.cos();
            let s = phase.sin();
            v += amp * c;
            for i in 0..n {
                grad[i] -= amp * k[i] * s;
            }
            lap -= amp * k2 * c;
        }
        Ok(GreensJet {
            v: v / self.kappa,
            grad: grad.iter().map(|g| g / self.kappa).collect(),
            lap: lap / self.kappa,
        })
    }

    /// Pointwise operator residual kappa*Lap G - h G; vanishes away from
    /// the pole up to the truncation of both sums.
    pub fn operator_residual(&self, x: &[f64], z0: &[f64]) -> Result<f64> {
        let jet = self.jet(x, z0)?;
        Ok(self.kappa * jet.lap - self.h0 * jet.v)
    }
}

/// Small-r coefficient of the free kernel: Y_n(r) -> coeff * r^{2-n}.
pub fn free_kernel_coefficient(n: usize) -> f64 {
    gamma_half_int(n - 2) / (4.0 * PI.powf(n as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn half_integer_bessel_values() {
        // K_{3/2}(z) = sqrt(pi/2z) e^{-z} (1 + 1/z)
        let z = 1.7;
        let k32 = bessel_k_half(1, z);
        let expect = (PI / (2.0 * z)).sqrt() * (-z).exp() * (1.0 + 1.0 / z);
        assert_relative_eq!(k32, expect, max_relative = 1e-15);
        // K_{5/2}(z) = sqrt(pi/2z) e^{-z} (1 + 3/z + 3/z^2)
        let k52 = bessel_k_half(2, z);
        let expect = (PI / (2.0 * z)).sqrt() * (-z).exp() * (1.0 + 3.0 / z + 3.0 / (z * z));
        assert_relative_eq!(k52, expect, max_relative = 1e-15);
    }

    #[test]
    fn integer_bessel_matches_half_between() {
        // K_nu grows in nu: K_2 must sit between K_{3/2} and K_{5/2}
        for z in [0.3, 1.0, 3.0, 8.0] {
            let k2 = bessel_k_int(2, z);
            assert!(k2 > bessel_k_half(1, z) && k2 < bessel_k_half(2, z), "z={z}");
        }
        // and satisfy the recurrence K_3 = K_1 + (4/z) K_2
        for z in [0.5, 2.0, 6.0] {
            let lhs = bessel_k_int(3, z);
            let rhs = bessel_k_int(1, z) + 4.0 / z * bessel_k_int(2, z);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-11);
        }
    }

    #[test]
    fn free_kernel_short_distance() {
        // Y_n(r) r^{n-2} -> Gamma(n/2-1)/(4 pi^{n/2})
        for n in [5usize, 6, 7] {
            let m = 0.37;
            let c = free_kernel_coefficient(n);
            let r = 1e-6;
            assert_relative_eq!(yukawa_free(n, m, r) * r.powi(n as i32 - 2), c, max_relative = 1e-5);
        }
        // for n = 5: coefficient is 1/(8 pi^2)
        assert_relative_eq!(free_kernel_coefficient(5), 1.0 / (8.0 * PI * PI), max_relative = 1e-15);
    }

    fn table(split: f64) -> LatticeGreens {
        let d = Dim::new(5).unwrap();
        let periods = vec![2.0 * PI; 5];
        LatticeGreens::new(&d, &periods, 1.0, split).unwrap()
    }

    #[test]
    fn split_invariance() {
        let a = table(1.0);
        let b = table(1.25);
        let z0 = vec![0.0; 5];
        for x in [
            vec![0.5, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 2.0, -1.0, 0.3, 0.7],
            vec![3.1, 3.1, 3.1, 3.1, 3.1],
            vec![0.05, -0.02, 0.01, 0.0, 0.03],
        ] {
            let va = a.eval(&x, &z0).unwrap();
            let vb = b.eval(&x, &z0).unwrap();
            assert_relative_eq!(va, vb, max_relative = 1e-10);
        }
    }

    #[test]
    fn operator_annihilates_away_from_pole() {
        let g = table(1.0);
        let z0 = vec![0.0; 5];
        for x in [
            vec![1.0, 0.0, 0.0, 0.0, 0.0],
            vec![2.0, 1.0, -2.0, 0.5, 0.0],
            vec![0.2, 0.1, 0.0, 0.0, -0.1],
        ] {
            let res = g.operator_residual(&x, &z0).unwrap();
            let scale = g.eval(&x, &z0).unwrap().abs();
            assert!(res.abs() < 1e-8 * scale.max(1e-3), "residual {res:.3e} at {x:?}");
        }
    }

    #[test]
    fn positivity_symmetry_singularity() {
        let g = table(1.0);
        let z0 = vec![1.0, 2.0, 3.0, 0.5, 0.25];
        // deterministic pseudo-random sample
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let x: Vec<f64> = (0..5).map(|_| rand01() * 2.0 * PI).collect();
            if x.iter().zip(&z0).map(|(a, b)| (a - b).abs()).sum::<f64>() < 1e-6 {
                continue;
            }
            let v = g.eval(&x, &z0).unwrap();
            assert!(v > 0.0, "negative Green value {v} at {x:?}");
            // lattice symmetry through the pole
            let xm: Vec<f64> = (0..5).map(|i| 2.0 * z0[i] - x[i]).collect();
            let vm = g.eval(&xm, &z0).unwrap();
            assert_relative_eq!(v, vm, max_relative = 1e-12);
        }
        assert!(matches!(g.eval(&z0, &z0), Err(Error::Singular(_))));
    }

    #[test]
    fn near_field_normalisation() {
        let d = Dim::new(5).unwrap();
        let g = table(1.0);
        let z0 = vec![0.0; 5];
        let l = 2.0 * PI;
        let r = 1e-3 * l;
        let x = vec![r, 0.0, 0.0, 0.0, 0.0];
        let v = g.eval(&x, &z0).unwrap();
        let scaled = v * r.powi(3) * d.kappa / d.gamma;
        assert!((scaled - 1.0).abs() < 1e-4, "near field {scaled}");
    }
}
