//! Gradient priors on the light field: the thresholded quadratic that
//! approaches an L0 count of non-zero differences, and a smoothed 4D TV.
//!
//! Differences are forward along each of `y, x, v, u` per channel; the
//! last sample of an axis has a zero difference (clamped boundary).

use crate::lightfield::{Dims, LightField};

/// Smoothing of the TV absolute value.
pub const TV_DELTA: f64 = 1e-4;

/// `(stride, extent)` of the four spatial and angular axes.
fn axes(d: &Dims) -> [(usize, usize); 4] {
    let su = d.nc;
    let sv = d.nu * su;
    let sx = d.nv * sv;
    let sy = d.nx * sx;
    [(sy, d.ny), (sx, d.nx), (sv, d.nv), (su, d.nu)]
}

/// Sums `phi(difference)` over every forward difference and accumulates
/// its gradient with respect to the samples.
fn accumulate(d: &Dims, lf: &[f64], phi: impl Fn(f64) -> (f64, f64)) -> (f64, Vec<f64>) {
    let mut value = 0.0;
    let mut grad = vec![0.0; lf.len()];
    for (stride, n) in axes(d) {
        if n < 2 {
            continue;
        }
        for i in 0..lf.len() {
            if (i / stride) % n == n - 1 {
                continue;
            }
            let (f, df) = phi(lf[i + stride] - lf[i]);
            value += f;
            grad[i + stride] += df;
            grad[i] -= df;
        }
    }
    (value, grad)
}

/// Per-difference cost `min(d² / ε², 1)`; gradient `2d / ε²` inside the
/// threshold and 0 outside and at the kink.
pub fn sparse_gradient_prior_raw(d: &Dims, lf: &[f64], eps: f64) -> (f64, Vec<f64>) {
    let inv = 1.0 / (eps * eps);
    accumulate(d, lf, |g| {
        if g.abs() < eps {
            (g * g * inv, 2.0 * g * inv)
        } else {
            (1.0, 0.0)
        }
    })
}

/// Anisotropic TV with `sqrt(d² + δ²) - δ` per difference.
pub fn tv_prior_raw(d: &Dims, lf: &[f64]) -> (f64, Vec<f64>) {
    accumulate(d, lf, |g| {
        let r = (g * g + TV_DELTA * TV_DELTA).sqrt();
        (r - TV_DELTA, g / r)
    })
}

pub fn sparse_gradient_prior(lf: &LightField, eps: f64) -> (f64, Vec<f64>) {
    sparse_gradient_prior_raw(&lf.dims(), &lf.to_f64(), eps)
}

pub fn tv_prior(lf: &LightField) -> (f64, Vec<f64>) {
    tv_prior_raw(&lf.dims(), &lf.to_f64())
}
