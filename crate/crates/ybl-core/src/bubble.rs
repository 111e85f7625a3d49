//! The standard bubble, its translates/dilates, and the kernel of the
//! linearised operator around it.

use crate::dim::Dim;
use crate::error::{Error, Result};
use crate::quad::integrate_radial;
use std::sync::OnceLock;

/// Scaling parameters of a bubble: length scale and centre.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleParams {
    pub mu: f64,
    pub xi: Vec<f64>,
}

impl BubbleParams {
    pub fn new(mu: f64, xi: Vec<f64>) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::domain(format!("bubble scale must be positive, got {mu}")));
        }
        Ok(BubbleParams { mu, xi })
    }

    pub fn standard(n: usize) -> Self {
        BubbleParams { mu: 1.0, xi: vec![0.0; n] }
    }
}

/// Radial profile w(r) = alpha (1+r^2)^(-(n-2)/2).
pub fn profile(dim: &Dim, r: f64) -> f64 {
    dim.alpha * (1.0 + r * r).powf(-(dim.nf() - 2.0) / 2.0)
}

/// dw/dr in closed form.
pub fn profile_prime(dim: &Dim, r: f64) -> f64 {
    let nf = dim.nf();
    -(nf - 2.0) * dim.alpha * r * (1.0 + r * r).powf(-nf / 2.0)
}

/// d2w/dr2 in closed form.
pub fn profile_second(dim: &Dim, r: f64) -> f64 {
    let nf = dim.nf();
    let q = 1.0 + r * r;
    -(nf - 2.0) * dim.alpha * q.powf(-nf / 2.0 - 1.0) * (q - nf * r * r)
}

/// Radial Laplacian of the profile, Δw = w'' + (n-1) w'/r, with the r = 0 limit.
pub fn profile_laplacian(dim: &Dim, r: f64) -> f64 {
    if r == 0.0 {
        return dim.nf() * profile_second(dim, 0.0);
    }
    profile_second(dim, r) + (dim.nf() - 1.0) * profile_prime(dim, r) / r
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// W_{mu,xi}(x) = mu^{-(n-2)/2} w(|x - xi| / mu).
pub fn eval_bubble(dim: &Dim, bp: &BubbleParams, x: &[f64]) -> Result<f64> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite input coordinate"));
    }
    if bp.xi.len() != dim.n || x.len() != dim.n {
        return Err(Error::domain("point dimension does not match"));
    }
    let mut r2 = 0.0;
    for i in 0..dim.n {
        let d = (x[i] - bp.xi[i]) / bp.mu;
        r2 += d * d;
    }
    Ok(bp.mu.powf(-(dim.nf() - 2.0) / 2.0) * dim.alpha * (1.0 + r2).powf(-(dim.nf() - 2.0) / 2.0))
}

/// Translation kernels d_i W and the dilation kernel y.grad W + (n-2)/2 W.
///
/// Index convention: 0 is the normalised amplitude mode, 1..=n the
/// translations, n+1 the dilation.
pub fn eval_kernel(dim: &Dim, mode: usize, y: &[f64]) -> Result<f64> {
    let n = dim.n;
    if mode > n + 1 {
        return Err(Error::domain(format!("kernel index {mode} out of range 0..={}", n + 1)));
    }
    let r2 = norm_sq(y);
    let nf = dim.nf();
    Ok(match mode {
        0 => profile(dim, r2.sqrt()) / z0_norm(dim),
        m if m <= n => -(nf - 2.0) * dim.alpha * y[m - 1] * (1.0 + r2).powf(-nf / 2.0),
        _ => dim.alpha * (nf - 2.0) / 2.0 * (1.0 - r2) * (1.0 + r2).powf(-nf / 2.0),
    })
}

/// Radial factor of the translation kernels: z_i(y) = y_i * kernel_radial(r).
pub fn translation_kernel_radial(dim: &Dim, r: f64) -> f64 {
    -(dim.nf() - 2.0) * dim.alpha * (1.0 + r * r).powf(-dim.nf() / 2.0)
}

/// Dilation kernel as a radial function.
pub fn dilation_kernel(dim: &Dim, r: f64) -> f64 {
    dim.alpha * (dim.nf() - 2.0) / 2.0 * (1.0 - r * r) * (1.0 + r * r).powf(-dim.nf() / 2.0)
}

/// d/dr of the dilation kernel.
pub fn dilation_kernel_prime(dim: &Dim, r: f64) -> f64 {
    let nf = dim.nf();
    let q = 1.0 + r * r;
    dim.alpha * (nf - 2.0) / 2.0 * r * q.powf(-nf / 2.0 - 1.0) * ((nf - 2.0) * r * r - nf - 2.0)
}

static Z0_NORMS: [OnceLock<f64>; 5] = [
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
    OnceLock::new(),
];

/// Normalisation of the amplitude mode: sqrt(int W^{p+1}), computed once per
/// dimension by adaptive radial quadrature to 1e-12 relative tolerance.
/// With this constant, int W^{p-1} (W/z0_norm)^2 = 1.
pub fn z0_norm(dim: &Dim) -> f64 {
    *Z0_NORMS[dim.n - 5].get_or_init(|| {
        let d = *dim;
        let area = d.sphere_area_nm1();
        let total = integrate_radial(
            |r| r.powi(d.n as i32 - 1) * profile(&d, r).powf(d.p + 1.0),
            1e-13,
        )
        .expect("z0 normalisation quadrature");
        (area * total).sqrt()
    })
}

/// Eigenvalue of the amplitude mode under the linearised operator.
pub fn amplitude_eigenvalue(dim: &Dim) -> f64 {
    dim.p - 1.0
}

/// Pointwise defect of the bubble equation, Δ W + W^p, from the closed-form
/// radial Laplacian. Vanishes identically up to rounding.
pub fn residual_yamabe(dim: &Dim, y: &[f64]) -> f64 {
    let r = norm_sq(y).sqrt();
    let w = profile(dim, r);
    profile_laplacian(dim, r) + w.powf(dim.p)
}

/// A field that can report its value and Laplacian at a point, either from
/// closed-form derivatives or a finite-difference stencil.
pub trait LaplacianSampler {
    fn value(&self, y: &[f64]) -> f64;
    fn laplacian(&self, y: &[f64]) -> f64;
}

/// Wrap a plain closure with a second-order central finite-difference
/// Laplacian of step `h`.
pub struct FdSampler<F: Fn(&[f64]) -> f64> {
    pub f: F,
    pub h: f64,
}

impl<F: Fn(&[f64]) -> f64> LaplacianSampler for FdSampler<F> {
    fn value(&self, y: &[f64]) -> f64 {
        (self.f)(y)
    }

    fn laplacian(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        let f0 = (self.f)(y);
        let mut yy = y.to_vec();
        for i in 0..y.len() {
            yy[i] = y[i] + self.h;
            let fp = (self.f)(&yy);
            yy[i] = y[i] - self.h;
            let fm = (self.f)(&yy);
            yy[i] = y[i];
            acc += (fp - 2.0 * f0 + fm) / (self.h * self.h);
        }
        acc
    }
}

/// The linearised operator L0[f] = W^{1-p} (Δf + p W^{p-1} f).
pub fn linearized_apply<S: LaplacianSampler>(dim: &Dim, f: &S, y: &[f64]) -> f64 {
    let r = norm_sq(y).sqrt();
    let w = profile(dim, r);
    let wp1 = w.powf(dim.p - 1.0);
    w.powf(1.0 - dim.p) * (f.laplacian(y) + dim.p * wp1 * f.value(y))
}
