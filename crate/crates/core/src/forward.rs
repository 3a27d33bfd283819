//! Differentiable motion blur of a light field along a Bézier path.
//!
//! At time `t` the camera sees the sharp field re-parameterized as
//! `l(x, y, u + p_x - x p_z, v + p_y - y p_z)`; the observation averages
//! `T` midpoint time samples. Angular resampling is bilinear with
//! clamp-to-edge, and the adjoint splats the very same weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LfError, Result};
use crate::lightfield::{Dims, LightField};
use crate::path::MotionPath;
use crate::sampling::{centered, Taps};

pub const DEFAULT_TIME_SAMPLES: usize = 32;

/// Time discretization of the exposure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureConfig {
    pub time_samples: usize,
}

impl Default for ExposureConfig {
    fn default() -> Self {
        ExposureConfig {
            time_samples: DEFAULT_TIME_SAMPLES,
        }
    }
}

impl ExposureConfig {
    pub fn new(time_samples: usize) -> Result<ExposureConfig> {
        if time_samples == 0 {
            return Err(LfError::InvalidArgument("time_samples must be >= 1".into()));
        }
        Ok(ExposureConfig { time_samples })
    }

    /// Midpoint sample times `(k + 0.5) / T`.
    pub fn times(&self) -> Vec<f64> {
        let t = self.time_samples as f64;
        (0..self.time_samples).map(|k| (k as f64 + 0.5) / t).collect()
    }
}

/// Path positions and basis weights at every time sample.
pub(crate) struct Schedule {
    pub points: Vec<[f64; 3]>,
    pub basis: Vec<Vec<f64>>,
}

impl Schedule {
    pub fn new(path: &MotionPath, cfg: &ExposureConfig) -> Schedule {
        let times = cfg.times();
        Schedule {
            points: times.iter().map(|&t| path.eval_unchecked(t)).collect(),
            basis: times.iter().map(|&t| path.basis(t)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.points.len()
    }
}

/// Angular taps for one ray patch `(y, x)` at one time sample.
struct PatchTaps {
    u: Vec<Taps>,
    v: Vec<Taps>,
}

impl PatchTaps {
    fn new(d: &Dims, y: usize, x: usize, p: &[f64; 3]) -> PatchTaps {
        let (su, sv) = angular_offset(d, y, x, p);
        PatchTaps {
            u: (0..d.nu).map(|u| Taps::new(u as f64 + su, d.nu)).collect(),
            v: (0..d.nv).map(|v| Taps::new(v as f64 + sv, d.nv)).collect(),
        }
    }
}

/// Angular displacement `(p_x - x p_z, p_y - y p_z)` of patch `(y, x)`.
#[inline]
pub(crate) fn angular_offset(d: &Dims, y: usize, x: usize, p: &[f64; 3]) -> (f64, f64) {
    let xc = centered(x, d.nx);
    let yc = centered(y, d.ny);
    (p[0] - xc * p[2], p[1] - yc * p[2])
}

fn check_cfg(cfg: &ExposureConfig) -> Result<()> {
    if cfg.time_samples == 0 {
        return Err(LfError::InvalidArgument("time_samples must be >= 1".into()));
    }
    Ok(())
}

pub(crate) fn blur_raw<S>(d: &Dims, lf: &[S], sched: &Schedule) -> Vec<f64>
where
    S: Copy + Into<f64> + Sync,
{
    let pl = d.patch_len();
    let (nu, nc) = (d.nu, d.nc);
    let nt = sched.len() as f64;
    let mut out = vec![0f64; d.len()];
    out.par_chunks_mut(pl).enumerate().for_each(|(idx, dst)| {
        let (y, x) = (idx / d.nx, idx % d.nx);
        let src = &lf[idx * pl..(idx + 1) * pl];
        let at = |v: usize, u: usize, c: usize| -> f64 { src[(v * nu + u) * nc + c].into() };
        for p in &sched.points {
            let taps = PatchTaps::new(d, y, x, p);
            for (v, tv) in taps.v.iter().enumerate() {
                for (u, tu) in taps.u.iter().enumerate() {
                    for c in 0..nc {
                        let s = tv.sample(|vv| tu.sample(|uu| at(vv, uu, c)));
                        dst[(v * nu + u) * nc + c] += s;
                    }
                }
            }
        }
        for s in dst.iter_mut() {
            *s /= nt;
        }
    });
    out
}

pub(crate) fn blur_adjoint_raw(d: &Dims, residual: &[f64], sched: &Schedule) -> Vec<f64> {
    let pl = d.patch_len();
    let (nu, nc) = (d.nu, d.nc);
    let nt = sched.len() as f64;
    let mut out = vec![0f64; d.len()];
    // Blur never moves rays across (y, x) patches, so the scatter stays
    // inside the output patch and patches are independent.
    out.par_chunks_mut(pl).enumerate().for_each(|(idx, dst)| {
        let (y, x) = (idx / d.nx, idx % d.nx);
        let res = &residual[idx * pl..(idx + 1) * pl];
        for p in &sched.points {
            let taps = PatchTaps::new(d, y, x, p);
            for (v, tv) in taps.v.iter().enumerate() {
                for (u, tu) in taps.u.iter().enumerate() {
                    for c in 0..nc {
                        let r = res[(v * nu + u) * nc + c];
                        if r == 0.0 {
                            continue;
                        }
                        dst[(tv.i0 * nu + tu.i0) * nc + c] += tv.w0 * tu.w0 * r;
                        dst[(tv.i0 * nu + tu.i1) * nc + c] += tv.w0 * tu.w1 * r;
                        dst[(tv.i1 * nu + tu.i0) * nc + c] += tv.w1 * tu.w0 * r;
                        dst[(tv.i1 * nu + tu.i1) * nc + c] += tv.w1 * tu.w1 * r;
                    }
                }
            }
        }
        for s in dst.iter_mut() {
            *s /= nt;
        }
    });
    out
}

/// Per-time-sample derivatives of `<blur(lf), residual>` w.r.t. the path
/// position `(p_x, p_y, p_z)` at that time (before the 1/T factor).
pub(crate) fn time_gradients<S>(d: &Dims, lf: &[S], residual: &[f64], sched: &Schedule) -> Vec<[f64; 3]>
where
    S: Copy + Into<f64> + Sync,
{
    let pl = d.patch_len();
    let (nu, nc) = (d.nu, d.nc);
    let nt = sched.len();
    let rows: Vec<Vec<[f64; 3]>> = (0..d.ny)
        .into_par_iter()
        .map(|y| {
            let mut acc = vec![[0.0; 3]; nt];
            for x in 0..d.nx {
                let idx = y * d.nx + x;
                let src = &lf[idx * pl..(idx + 1) * pl];
                let res = &residual[idx * pl..(idx + 1) * pl];
                let at = |v: usize, u: usize, c: usize| -> f64 { src[(v * nu + u) * nc + c].into() };
                let xc = centered(x, d.nx);
                let yc = centered(y, d.ny);
                for (k, p) in sched.points.iter().enumerate() {
                    let taps = PatchTaps::new(d, y, x, p);
                    let (mut gu, mut gv) = (0.0, 0.0);
                    for (v, tv) in taps.v.iter().enumerate() {
                        for (u, tu) in taps.u.iter().enumerate() {
                            for c in 0..nc {
                                let r = res[(v * nu + u) * nc + c];
                                if r == 0.0 {
                                    continue;
                                }
                                gu += r * tv.sample(|vv| tu.slope(|uu| at(vv, uu, c)));
                                gv += r * tv.slope(|vv| tu.sample(|uu| at(vv, uu, c)));
                            }
                        }
                    }
                    acc[k][0] += gu;
                    acc[k][1] += gv;
                    acc[k][2] -= xc * gu + yc * gv;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![[0.0; 3]; nt];
    for row in rows {
        for (t, r) in total.iter_mut().zip(row) {
            for a in 0..3 {
                t[a] += r[a];
            }
        }
    }
    total
}

pub(crate) fn path_gradient_raw<S>(
    d: &Dims,
    lf: &[S],
    residual: &[f64],
    sched: &Schedule,
    n_ctrl: usize,
) -> Vec<[f64; 3]>
where
    S: Copy + Into<f64> + Sync,
{
    let per_time = time_gradients(d, lf, residual, sched);
    let inv_t = 1.0 / sched.len() as f64;
    let mut grad = vec![[0.0; 3]; n_ctrl];
    for (g, basis) in per_time.iter().zip(&sched.basis) {
        for (i, b) in basis.iter().enumerate() {
            for a in 0..3 {
                grad[i][a] += inv_t * b * g[a];
            }
        }
    }
    grad
}

/// Motion-blurred light field; output dims equal input dims.
pub fn blur(lf: &LightField, path: &MotionPath, cfg: &ExposureConfig) -> Result<LightField> {
    check_cfg(cfg)?;
    let d = lf.dims();
    path.check_bounds(d.nu, d.nv);
    let out = blur_raw(&d, lf.data(), &Schedule::new(path, cfg));
    Ok(LightField::from_f64(d, &out)?.with_meta_of(lf))
}

/// Exact transpose of [`blur`] at a fixed path.
pub fn blur_adjoint(residual: &LightField, path: &MotionPath, cfg: &ExposureConfig) -> Result<LightField> {
    check_cfg(cfg)?;
    let d = residual.dims();
    let out = blur_adjoint_raw(&d, &residual.to_f64(), &Schedule::new(path, cfg));
    Ok(LightField::from_f64(d, &out)?.with_meta_of(residual))
}

/// Gradient of `<blur(lf, path), residual>` w.r.t. every control point.
///
/// The entry for the pinned first point is reported; optimizers mask it.
pub fn path_gradient(
    lf: &LightField,
    path: &MotionPath,
    residual: &LightField,
    cfg: &ExposureConfig,
) -> Result<Vec<[f64; 3]>> {
    check_cfg(cfg)?;
    if lf.dims() != residual.dims() {
        return Err(LfError::ShapeMismatch(format!(
            "light field {:?} vs residual {:?}",
            lf.dims(),
            residual.dims()
        )));
    }
    let d = lf.dims();
    Ok(path_gradient_raw(
        &d,
        lf.data(),
        &residual.to_f64(),
        &Schedule::new(path, cfg),
        path.n(),
    ))
}

/// Single-time re-parameterization `l(x, y, u + p_x - x p_z, v + p_y - y p_z)`.
pub fn transform(lf: &LightField, p: [f64; 3]) -> Result<LightField> {
    let d = lf.dims();
    let sched = Schedule {
        points: vec![p],
        basis: vec![vec![1.0]],
    };
    let out = blur_raw(&d, lf.data(), &sched);
    Ok(LightField::from_f64(d, &out)?.with_meta_of(lf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dims(ny: usize, nx: usize, nv: usize, nu: usize) -> Dims {
        Dims::new(ny, nx, nv, nu, 1).unwrap()
    }

    fn random_lf(d: Dims, seed: u64) -> LightField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LightField::new(d, (0..d.len()).map(|_| rng.gen::<f32>()).collect()).unwrap()
    }

    #[test]
    fn zero_path_is_exact_identity() {
        let lf = random_lf(Dims::new(5, 4, 3, 4, 3).unwrap(), 1);
        for t in [1, 3, 7, 32] {
            let cfg = ExposureConfig::new(t).unwrap();
            let out = blur(&lf, &MotionPath::zero(2).unwrap(), &cfg).unwrap();
            assert_eq!(out, lf);
            let adj = blur_adjoint(&lf, &MotionPath::zero(4).unwrap(), &cfg).unwrap();
            assert_eq!(adj, lf);
        }
    }

    #[test]
    fn constant_field_is_preserved() {
        let lf = LightField::constant(dims(6, 6, 4, 4), 0.3).unwrap();
        let path = MotionPath::new(vec![[0.0; 3], [2.3, -1.1, 0.2], [-0.7, 0.4, -0.3]]).unwrap();
        let out = blur(&lf, &path, &ExposureConfig::default()).unwrap();
        assert!(out.data().iter().all(|&s| (s - 0.3).abs() < 1e-6));
    }

    #[test]
    fn unit_shift_adjoint_accumulates_at_edge() {
        // One time sample at t = 0.5 of a linear path to (2, 0, 0) -> shift +1.
        let d = dims(1, 1, 1, 4);
        let path = MotionPath::linear([2.0, 0.0, 0.0]).unwrap();
        let cfg = ExposureConfig::new(1).unwrap();
        let lf = LightField::new(d, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(blur(&lf, &path, &cfg).unwrap().data(), &[2.0, 3.0, 4.0, 4.0]);
        let adj = blur_adjoint(&lf, &path, &cfg).unwrap();
        assert_eq!(adj.data(), &[0.0, 1.0, 2.0, 7.0]);
    }

    #[test]
    fn linearity() {
        let d = dims(5, 6, 3, 4);
        let (a, b) = (random_lf(d, 2), random_lf(d, 3));
        let path = MotionPath::new(vec![[0.0; 3], [1.2, 0.3, 0.05], [0.4, -0.9, -0.04]]).unwrap();
        let cfg = ExposureConfig::new(8).unwrap();
        let mix = LightField::from_fn(d, |y, x, v, u, c| {
            2.0 * a.get(y, x, v, u, c) - 0.5 * b.get(y, x, v, u, c)
        })
        .unwrap();
        let (ba, bb, bm) = (
            blur(&a, &path, &cfg).unwrap(),
            blur(&b, &path, &cfg).unwrap(),
            blur(&mix, &path, &cfg).unwrap(),
        );
        for i in 0..d.len() {
            let want = 2.0 * ba.data()[i] as f64 - 0.5 * bb.data()[i] as f64;
            assert!((bm.data()[i] as f64 - want).abs() < 1e-6);
        }
    }

    #[test]
    fn shear_then_integer_shift_matches_one_step() {
        let d = dims(4, 7, 3, 6);
        let lf = random_lf(d, 4);
        let (px, py, pz) = (1.0, -2.0, 0.15);
        let one = transform(&lf, [px, py, pz]).unwrap();
        let sheared = transform(&lf, [0.0, 0.0, pz]).unwrap();
        // Integer shifts move whole samples; compare where no clamping occurs.
        for y in 0..d.ny {
            for x in 0..d.nx {
                let (su, sv) = angular_offset(&d, y, x, &[px, py, pz]);
                for v in 0..d.nv {
                    for u in 0..d.nu {
                        let (qu, qv) = (u as f64 + su, v as f64 + sv);
                        if qu < 0.0 || qv < 0.0 || qu > (d.nu - 1) as f64 || qv > (d.nv - 1) as f64 {
                            continue;
                        }
                        let us = u as i64 + px as i64;
                        let vs = v as i64 + py as i64;
                        if us < 0 || vs < 0 || us >= d.nu as i64 || vs >= d.nv as i64 {
                            continue;
                        }
                        let (us, vs) = (us as usize, vs as usize);
                        assert_eq!(one.get(y, x, v, u, 0), sheared.get(y, x, vs, us, 0));
                    }
                }
            }
        }
    }

    #[test]
    fn constant_field_has_zero_path_gradient() {
        let d = dims(5, 5, 4, 4);
        let lf = LightField::constant(d, 0.7).unwrap();
        let res = random_lf(d, 9);
        let path = MotionPath::new(vec![[0.0; 3], [0.6, 0.2, 0.03], [1.1, -0.4, 0.01]]).unwrap();
        let g = path_gradient(&lf, &path, &res, &ExposureConfig::default()).unwrap();
        assert!(g.iter().flatten().all(|&c| c == 0.0));
    }

    #[test]
    fn out_of_plane_term_vanishes_on_center_column() {
        // Field varying only along u: d/dp_z picks up -x * d/du, so with
        // a residual supported on the x = 0 column the p_z gradient is zero
        // while the p_x gradient is not.
        let d = dims(1, 5, 1, 6);
        let lf = LightField::from_fn(d, |_, _, _, u, _| (u * u) as f32 * 0.1).unwrap();
        let res = LightField::from_fn(d, |_, x, _, _, _| if x == 2 { 1.0 } else { 0.0 }).unwrap();
        let path = MotionPath::new(vec![[0.0; 3], [0.3, 0.0, 0.2], [0.7, 0.0, -0.1]]).unwrap();
        let g = path_gradient(&lf, &path, &res, &ExposureConfig::new(4).unwrap()).unwrap();
        for gi in &g[1..] {
            assert_eq!(gi[2], 0.0);
            assert!(gi[0].abs() > 1e-3);
        }
    }

    #[test]
    fn rejects_zero_time_samples() {
        assert!(ExposureConfig::new(0).is_err());
        assert_eq!(
            ExposureConfig::new(4).unwrap().times(),
            vec![0.125, 0.375, 0.625, 0.875]
        );
    }
}
