//! Adaptive Gauss–Kronrod quadrature and Gauss–Legendre rules.
//!
//! All radial integrals in this crate are 1-D with smooth rational-power
//! integrands and algebraic tails; a 15-point Kronrod rule with interval
//! bisection plus the r -> 1/r change of variable for the tail handles
//! them to near machine precision.

use crate::error::{Error, Result};

/// Kronrod abscissae for the 7-15 pair (positive half, QUADPACK values).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights of the embedded 7-point rule (nodes XGK[1], XGK[3], ...).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        let s = f1 + f2;
        res_k += WGK[j] * s;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * s;
        }
    }
    let err = (h * (res_k - res_g)).abs();
    // scale like QUADPACK to avoid underestimating smooth-but-cancelling panels
    let scaled = if res_abs > 0.0 {
        let ratio = (200.0 * err / (h.abs() * res_abs)).powf(1.5);
        if ratio < 1.0 {
            h.abs() * res_abs * ratio
        } else {
            err
        }
    } else {
        err
    };
    (h * res_k, scaled.max(err * 1e-3))
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[derive(Clone, Copy)]
    struct Panel {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }
    let (val, err) = kronrod_15(&f, a, b);
    let mut panels = vec![Panel { a, b, val, err }];
    let mut total_err: f64 = err;
    let mut total: f64 = val;
    let mut iter = 0usize;
    while total_err > tol * total.abs().max(1e-300) + 1e-305 {
        iter += 1;
        if iter > 4000 {
            return Err(Error::numeric(
                "gauss-kronrod",
                format!("no convergence: value {total:.17e}, error {total_err:.3e}"),
            ));
        }
        // split the worst panel
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m == p.a || m == p.b {
            // interval exhausted at machine precision
            panels.push(p);
            break;
        }
        total -= p.val;
        total_err -= p.err;
        for (x0, x1) in [(p.a, m), (m, p.b)] {
            let (v, e) = kronrod_15(&f, x0, x1);
            total += v;
            total_err += e;
            panels.push(Panel {
                a: x0,
                b: x1,
                val: v,
                err: e,
            });
        }
    }
    Ok(total)
}

/// Adaptive integral of `f` over `[0, inf)`.
///
/// Splits at r = 1 and maps the tail with r -> 1/u so that algebraic decay
/// becomes a smooth integrand near u = 0.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<f64> {
    let head = integrate(&f, 0.0, 1.0, tol)?;
    // Kronrod nodes are interior, so u = 0 is never evaluated
    let tail = integrate(|u| f(1.0 / u) / (u * u), 0.0, 1.0, tol)?;
    Ok(head + tail)
}

/// Integral of `f` over `[lo, inf)` for `lo > 0`.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, lo: f64, tol: f64) -> Result<f64> {
    if lo <= 0.0 {
        return Err(Error::domain("integrate_tail needs lo > 0"));
    }
    integrate(|u| f(lo / u) * lo / (u * u), 0.0, 1.0, tol)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (p, dp) = legendre_and_deriv(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, z);
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` with `cells` panels
/// of the given per-panel order. Exact for smooth powers at modest cost;
/// used by the parameter-ODE solution operators.
pub fn composite_gl<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let lo = a + c as f64 * h;
        let mid = lo + 0.5 * h;
        for j in 0..order {
            total += w[j] * f(mid + 0.5 * h * x[j]);
        }
    }
    total * 0.5 * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-13).unwrap();
        assert_relative_eq!(v, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn algebraic_tail() {
        // int_0^inf r^4 (1+r^2)^-4 dr = pi/32
        let v = integrate_radial(|r| r.powi(4) * (1.0 + r * r).powi(-4), 1e-13).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI / 32.0, max_relative = 1e-12);
    }

    #[test]
    fn gl_nodes_integrate_high_degree() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * xi.powi(22))
            .sum();
        assert_relative_eq!(s, 2.0 / 23.0, max_relative = 1e-13);
    }

    #[test]
    fn composite_gl_matches_adaptive() {
        let a = composite_gl(|t| t.powf(1.5) * (-t / 7.0).exp(), 2.0, 40.0, 64, 5);
        let b = integrate(|t| t.powf(1.5) * (-t / 7.0).exp(), 2.0, 40.0, 1e-13).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-11);
    }
}
