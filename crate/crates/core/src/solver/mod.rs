//! Blind deblurring: joint optimization of the sharp light field and the
//! camera path under an annealed sparse-gradient prior, then a fixed-path
//! refinement with a 4D TV prior.

pub mod adam;
pub mod prior;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LfError, Result};
use crate::forward::{blur_adjoint_raw, blur_raw, path_gradient_raw, ExposureConfig, Schedule};
use crate::lightfield::{Dims, LightField};
use crate::path::MotionPath;

pub use adam::{AdamParams, AdamState};
pub use prior::{sparse_gradient_prior, tv_prior};

/// Largest initial perturbation of the free control points.
pub const INIT_PERTURBATION: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub lambda: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay: f64,
    pub lr_lightfield: f64,
    pub lr_path: f64,
    pub iters_stage1: usize,
    pub iters_stage2: usize,
    pub lambda_tv: f64,
    #[serde(alias = "T")]
    pub time_samples: usize,
    pub n: usize,
    pub adam: AdamParams,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 2e-3,
            eps_start: 0.2,
            eps_end: 0.01,
            eps_decay: 0.995,
            lr_lightfield: 5e-3,
            lr_path: 0.03,
            iters_stage1: 1500,
            iters_stage2: 500,
            lambda_tv: 1e-2,
            time_samples: 16,
            n: 3,
            adam: AdamParams::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("eps_start", self.eps_start),
            ("eps_end", self.eps_end),
            ("eps_decay", self.eps_decay),
            ("lr_lightfield", self.lr_lightfield),
            ("lr_path", self.lr_path),
            ("lambda_tv", self.lambda_tv),
            ("adam.eps_hat", self.adam.eps_hat),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(LfError::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.eps_end > self.eps_start {
            return Err(LfError::InvalidArgument(format!(
                "eps_end {} exceeds eps_start {}",
                self.eps_end, self.eps_start
            )));
        }
        if self.eps_decay > 1.0 {
            return Err(LfError::InvalidArgument(format!("eps_decay {} > 1", self.eps_decay)));
        }
        for (name, b) in [("adam.beta1", self.adam.beta1), ("adam.beta2", self.adam.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(LfError::InvalidArgument(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if self.time_samples == 0 || self.n < 2 {
            return Err(LfError::InvalidArgument(format!(
                "need T >= 1 and n >= 2, got T = {} and n = {}",
                self.time_samples, self.n
            )));
        }
        Ok(())
    }

    pub fn exposure(&self) -> ExposureConfig {
        ExposureConfig {
            time_samples: self.time_samples,
        }
    }
}

/// One iteration of either stage. `prior` is unweighted: the sparse prior
/// at the current ε in stage 1, TV in stage 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub stage: u8,
    pub data: f64,
    pub prior: f64,
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub loss_trace: Vec<LossRecord>,
    pub eps_trace: Vec<f64>,
    #[serde(serialize_with = "serialize_path")]
    pub final_path: MotionPath,
    #[serde(skip)]
    pub final_lf: LightField,
    /// Data term plus λ times the sparse prior at the final ε, evaluated on
    /// the emitted (single precision) light field and path.
    pub final_objective: f64,
    pub final_eps: f64,
    pub config: SolverConfig,
}

fn serialize_path<S: serde::Serializer>(p: &MotionPath, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::io::json::PathJson::from(p).serialize(s)
}

impl SolverReport {
    pub fn stage1(&self) -> impl Iterator<Item = &LossRecord> {
        self.loss_trace.iter().filter(|r| r.stage == 1)
    }

    pub fn stage2(&self) -> impl Iterator<Item = &LossRecord> {
        self.loss_trace.iter().filter(|r| r.stage == 2)
    }
}

/// `||blur(lf, path) - observed||²` with its gradients.
#[derive(Clone, Debug)]
pub struct DataTerm {
    pub value: f64,
    pub grad_lf: Vec<f64>,
    pub grad_path: Vec<[f64; 3]>,
}

fn data_term_raw(d: &Dims, lf: &[f64], path: &MotionPath, observed: &[f32], cfg: &ExposureConfig) -> DataTerm {
    let sched = Schedule::new(path, cfg);
    let mut residual = blur_raw(d, lf, &sched);
    let mut value = 0.0;
    for (r, &o) in residual.iter_mut().zip(observed) {
        *r -= o as f64;
        value += *r * *r;
        *r *= 2.0;
    }
    DataTerm {
        value,
        grad_lf: blur_adjoint_raw(d, &residual, &sched),
        grad_path: path_gradient_raw(d, lf, &residual, &sched, path.n()),
    }
}

pub fn data_term(lf: &LightField, path: &MotionPath, observed: &LightField, cfg: &ExposureConfig) -> Result<DataTerm> {
    if lf.dims() != observed.dims() {
        return Err(LfError::ShapeMismatch(format!(
            "{:?} vs {:?}",
            lf.dims(),
            observed.dims()
        )));
    }
    if cfg.time_samples == 0 {
        return Err(LfError::InvalidArgument("time_samples must be >= 1".into()));
    }
    Ok(data_term_raw(&lf.dims(), &lf.to_f64(), path, observed.data(), cfg))
}

/// The full blind objective `data + λ ψ_ε(lf)`.
pub fn objective(
    lf: &LightField,
    path: &MotionPath,
    observed: &LightField,
    cfg: &SolverConfig,
    eps: f64,
) -> Result<f64> {
    let data = data_term(lf, path, observed, &cfg.exposure())?.value;
    Ok(data + cfg.lambda * sparse_gradient_prior(lf, eps).0)
}

fn flatten(points: &[[f64; 3]]) -> Vec<f64> {
    points.iter().flatten().copied().collect()
}

fn unflatten(flat: &[f64]) -> Vec<[f64; 3]> {
    flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Deterministic initial path: the origin plus a seeded perturbation of at
/// most [`INIT_PERTURBATION`] on the free points.
pub fn initial_path(n: usize, seed: u64) -> Result<MotionPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![[0.0; 3]; n];
    for p in pts.iter_mut().skip(1) {
        for c in p.iter_mut() {
            *c = rng.gen_range(-INIT_PERTURBATION..=INIT_PERTURBATION);
        }
    }
    MotionPath::new(pts)
}

struct Progress {
    trace: Vec<LossRecord>,
    eps_trace: Vec<f64>,
}

impl Progress {
    #[allow(clippy::too_many_arguments)]
    fn diverged(
        self,
        stage: u8,
        iteration: usize,
        lf: &[f64],
        d: Dims,
        path: Vec<[f64; 3]>,
        cfg: &SolverConfig,
        eps: f64,
    ) -> LfError {
        let final_lf = LightField::from_f64(d, &sanitize(lf)).expect("sanitized samples are finite");
        let final_path = MotionPath::new(unflatten(&sanitize(&flatten(&path))))
            .unwrap_or_else(|_| MotionPath::zero(cfg.n).expect("n >= 2"));
        LfError::Diverged {
            stage,
            iteration,
            report: Box::new(SolverReport {
                loss_trace: self.trace,
                eps_trace: self.eps_trace,
                final_path,
                final_lf,
                final_objective: f64::NAN,
                final_eps: eps,
                config: cfg.clone(),
            }),
        }
    }
}

/// Zeroes samples that are not finite in single precision.
fn sanitize(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| if (*x as f32).is_finite() { *x } else { 0.0 })
        .collect()
}

/// Largest ray displacement per unit `p_z`: the farthest spatial
/// coordinate from the optical axis (at least 1).
fn depth_reach(d: &Dims) -> f64 {
    ((d.nx.max(d.ny) as f64 - 1.0) / 2.0).max(1.0)
}

/// Blind deblurring of `observed`. Deterministic given the config.
pub fn blind_deblur(observed: &LightField, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let d = observed.dims();
    let exposure = cfg.exposure();
    let obs = observed.data();
    let mut lf = observed.to_f64();
    let mut path_pts = if cfg.iters_stage1 > 0 {
        initial_path(cfg.n, cfg.seed)?.control_points().to_vec()
    } else {
        vec![[0.0; 3]; cfg.n]
    };
    let mut progress = Progress {
        trace: Vec::with_capacity(cfg.iters_stage1 + cfg.iters_stage2),
        eps_trace: Vec::with_capacity(cfg.iters_stage1),
    };
    let reach = depth_reach(&d);
    let mut pinned = vec![false; cfg.n * 3];
    pinned[..3].fill(true);

    let mut eps = cfg.eps_start;
    let mut adam_lf = AdamState::new(lf.len());
    let mut adam_path = AdamState::new(cfg.n * 3);
    for it in 0..cfg.iters_stage1 {
        let path = match MotionPath::new(path_pts.clone()) {
            Ok(p) => p,
            Err(_) => return Err(progress.diverged(1, it, &lf, d, path_pts, cfg, eps)),
        };
        let dt = data_term_raw(&d, &lf, &path, obs, &exposure);
        let (prior, grad_prior) = prior::sparse_gradient_prior_raw(&d, &lf, eps);
        let total = dt.value + cfg.lambda * prior;
        progress.trace.push(LossRecord {
            stage: 1,
            data: dt.value,
            prior,
            total,
        });
        progress.eps_trace.push(eps);
        if !total.is_finite() {
            return Err(progress.diverged(1, it, &lf, d, path_pts, cfg, eps));
        }
        if it % 100 == 0 {
            debug!(
                "stage 1 iter {it}: data {:.6e} prior {:.6e} eps {eps:.4}",
                dt.value, prior
            );
        }
        let grad_lf: Vec<f64> = dt
            .grad_lf
            .iter()
            .zip(&grad_prior)
            .map(|(a, b)| a + cfg.lambda * b)
            .collect();
        adam_lf.step(&mut lf, &grad_lf, cfg.lr_lightfield, &cfg.adam, None);
        // Adam steps every coordinate by about lr_path; measuring p_z in
        // edge-ray displacement keeps that step comparable to p_x and p_y.
        let mut flat = flatten(&path_pts);
        let mut grad = flatten(&dt.grad_path);
        for i in (2..flat.len()).step_by(3) {
            flat[i] *= reach;
            grad[i] /= reach;
        }
        adam_path.step(&mut flat, &grad, cfg.lr_path, &cfg.adam, Some(&pinned));
        for i in (2..flat.len()).step_by(3) {
            flat[i] /= reach;
        }
        path_pts = unflatten(&flat);
        eps = (eps * cfg.eps_decay).max(cfg.eps_end);
    }
    let final_path = match MotionPath::new(path_pts.clone()) {
        Ok(p) => p,
        Err(_) => return Err(progress.diverged(1, cfg.iters_stage1, &lf, d, path_pts, cfg, eps)),
    };
    info!("stage 1 done; path {:?}", final_path.control_points());

    let mut adam_tv = AdamState::new(lf.len());
    for it in 0..cfg.iters_stage2 {
        let dt = data_term_raw(&d, &lf, &final_path, obs, &exposure);
        let (tv, grad_tv) = prior::tv_prior_raw(&d, &lf);
        let total = dt.value + cfg.lambda_tv * tv;
        progress.trace.push(LossRecord {
            stage: 2,
            data: dt.value,
            prior: tv,
            total,
        });
        if !total.is_finite() {
            return Err(progress.diverged(2, it, &lf, d, path_pts, cfg, eps));
        }
        if it % 100 == 0 {
            debug!("stage 2 iter {it}: data {:.6e} tv {tv:.6e}", dt.value);
        }
        let grad: Vec<f64> = dt
            .grad_lf
            .iter()
            .zip(&grad_tv)
            .map(|(a, b)| a + cfg.lambda_tv * b)
            .collect();
        adam_tv.step(&mut lf, &grad, cfg.lr_lightfield, &cfg.adam, None);
    }
    if lf.iter().any(|x| !x.is_finite()) {
        return Err(progress.diverged(2, cfg.iters_stage2, &lf, d, path_pts, cfg, eps));
    }
    let final_lf = LightField::from_f64(d, &lf)?.with_meta_of(observed);
    let final_objective = objective(&final_lf, &final_path, observed, cfg, eps)?;
    Ok(SolverReport {
        loss_trace: progress.trace,
        eps_trace: progress.eps_trace,
        final_path,
        final_lf,
        final_objective,
        final_eps: eps,
        config: cfg.clone(),
    })
}

/// Checks that the loss trend never rises: the mean of each consecutive
/// block of `window` iterations is at most the mean of the previous block
/// (plus a relative tolerance).
pub fn is_monotone_trend(values: &[f64], window: usize, rel_tol: f64) -> bool {
    if window == 0 {
        return true;
    }
    let means: Vec<f64> = values
        .chunks(window)
        .filter(|c| c.len() == window)
        .map(|c| c.iter().sum::<f64>() / window as f64)
        .collect();
    means.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::blur;

    fn random_lf(d: Dims, seed: u64) -> LightField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LightField::new(d, (0..d.len()).map(|_| rng.gen::<f32>()).collect()).unwrap()
    }

    fn random_path(seed: u64, scale: f64) -> MotionPath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = vec![[0.0; 3]];
        for _ in 0..2 {
            pts.push([
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
                rng.gen_range(-0.1..0.1),
            ]);
        }
        MotionPath::new(pts).unwrap()
    }

    #[test]
    fn data_term_vanishes_at_truth() {
        let d = Dims::new(6, 6, 4, 4, 1).unwrap();
        let lf = random_lf(d, 1);
        let path = random_path(2, 1.0);
        let cfg = ExposureConfig::new(8).unwrap();
        let obs = blur(&lf, &path, &cfg).unwrap();
        let value = data_term(&lf, &path, &obs, &cfg).unwrap().value;
        // Only the single-precision rounding of the observation remains.
        assert!(value < 1e-10, "{value}");
    }

    #[test]
    fn constant_offset_adds_c_squared_per_sample() {
        let d = Dims::new(5, 4, 3, 3, 3).unwrap();
        let lf = random_lf(d, 4);
        let path = random_path(5, 0.8);
        let cfg = ExposureConfig::new(8).unwrap();
        let b = blur(&lf, &path, &cfg).unwrap();
        let c = 0.25f32;
        let obs = LightField::new(d, b.data().iter().map(|s| s + c).collect()).unwrap();
        let value = data_term(&lf, &path, &obs, &cfg).unwrap().value;
        let want = (c as f64).powi(2) * d.len() as f64;
        assert!((value - want).abs() / want < 1e-5);
    }

    #[test]
    fn data_term_gradients_match_finite_differences() {
        let d = Dims::new(12, 12, 4, 4, 1).unwrap();
        let cfg = ExposureConfig::new(6).unwrap();
        for seed in 0..5 {
            let lf = random_lf(d, 10 + seed).to_f64();
            let truth = random_lf(d, 20 + seed);
            let path = random_path(30 + seed, 1.2);
            let obs = blur(&truth, &random_path(40 + seed, 1.2), &cfg).unwrap();
            let dt = data_term_raw(&d, &lf, &path, obs.data(), &cfg);

            // Light field gradient along a random direction.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dir: Vec<f64> = (0..lf.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = 1e-4;
            let shifted = |s: f64| -> Vec<f64> { lf.iter().zip(&dir).map(|(a, b)| a + s * b).collect() };
            let num = (data_term_raw(&d, &shifted(h), &path, obs.data(), &cfg).value
                - data_term_raw(&d, &shifted(-h), &path, obs.data(), &cfg).value)
                / (2.0 * h);
            let ana: f64 = dt.grad_lf.iter().zip(&dir).map(|(a, b)| a * b).sum();
            assert!(
                (num - ana).abs() / ana.abs().max(1e-12) < 1e-3,
                "seed {seed}: lf {num} vs {ana}"
            );

            // Path gradient, coordinate by coordinate on the free points.
            let h = 1e-6;
            let pts = path.control_points().to_vec();
            for i in 1..pts.len() {
                for a in 0..3 {
                    let eval = |s: f64| {
                        let mut q = pts.clone();
                        q[i][a] += s;
                        data_term_raw(&d, &lf, &MotionPath::new(q).unwrap(), obs.data(), &cfg).value
                    };
                    let num = (eval(h) - eval(-h)) / (2.0 * h);
                    let ana = dt.grad_path[i][a];
                    let scale = num.abs().max(ana.abs()).max(1e-3);
                    assert!(
                        (num - ana).abs() / scale < 1e-3,
                        "seed {seed} point {i} axis {a}: {num} vs {ana}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauge_offset_is_equivalent() {
        // Offsetting every control point by c in p_x (the first one
        // included, which the pin forbids) while translating the field by
        // -c in u leaves the data term unchanged. The field is piecewise
        // linear between integer knots and flat near the window edges, so
        // bilinear resampling and clamping see the same function.
        let d = Dims::new(5, 6, 1, 14, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let knots: Vec<f64> = (0..=10).map(|_| rng.gen()).collect();
        let g = |q: f64| -> f64 {
            let q = q.clamp(0.0, 10.0);
            let k = (q.floor() as usize).min(9);
            let a = q - k as f64;
            (1.0 - a) * knots[k] + a * knots[k + 1]
        };
        let c = 1.0;
        let base: Vec<f64> = (0..d.len()).map(|i| g((i % 14) as f64)).collect();
        let moved: Vec<f64> = (0..d.len()).map(|i| g((i % 14) as f64 - c)).collect();
        let path = MotionPath::new(vec![[0.0; 3], [0.7, 0.0, 0.05], [1.4, 0.0, -0.03]]).unwrap();
        let cfg = ExposureConfig::new(8).unwrap();
        let sched = Schedule::new(&path, &cfg);
        let offset = Schedule {
            points: sched.points.iter().map(|p| [p[0] + c, p[1], p[2]]).collect(),
            basis: sched.basis.clone(),
        };
        let observed = random_lf(d, 8);
        let value = |lf: &[f64], s: &Schedule| -> f64 {
            blur_raw(&d, lf, s)
                .iter()
                .zip(observed.data())
                .map(|(b, &o)| (b - o as f64).powi(2))
                .sum()
        };
        let (a, b) = (value(&base, &sched), value(&moved, &offset));
        assert!((a - b).abs() <= 1e-5 * a, "{a} vs {b}");
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = SolverConfig::default();
        cfg.validate().unwrap();
        let parsed: SolverConfig = serde_json::from_str(r#"{"lambda": 0.01, "T": 8}"#).unwrap();
        assert_eq!(parsed.lambda, 0.01);
        assert_eq!(parsed.time_samples, 8);
        assert_eq!(parsed.n, 3);
        let bad = SolverConfig {
            eps_end: 0.5,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<SolverConfig>(r#"{"lamda": 1}"#).is_err());
    }

    #[test]
    fn initial_path_is_small_and_pinned() {
        let p = initial_path(4, 9).unwrap();
        assert_eq!(p.control_points()[0], [0.0; 3]);
        assert!(p
            .control_points()
            .iter()
            .flatten()
            .all(|c| c.abs() <= INIT_PERTURBATION));
        assert_eq!(p, initial_path(4, 9).unwrap());
    }

    #[test]
    fn monotone_trend_check() {
        let falling: Vec<f64> = (0..200)
            .map(|i| 100.0 - i as f64 + if i % 2 == 0 { 3.0 } else { 0.0 })
            .collect();
        assert!(is_monotone_trend(&falling, 50, 0.0));
        let rising: Vec<f64> = (0..200).map(|i| i as f64).collect();
        assert!(!is_monotone_trend(&rising, 50, 0.0));
    }

    /// Piecewise-constant planes at integer slopes, so the sampled field
    /// carries no resampling blur of its own.
    fn blocks_scene(n: usize, cell: usize) -> LightField {
        let d = Dims::new(n, n, 4, 4, 1).unwrap();
        let kind = crate::synth::TextureKind::Blocks { cell };
        crate::synth::two_plane_lightfield(d, 1.0, 2.0, &kind, &kind, 2).unwrap()
    }

    fn small_scene() -> LightField {
        blocks_scene(12, 3)
    }

    fn short_config() -> SolverConfig {
        SolverConfig {
            iters_stage1: 60,
            iters_stage2: 20,
            time_samples: 6,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let obs = blur(&small_scene(), &random_path(3, 0.8), &ExposureConfig::new(6).unwrap()).unwrap();
        let (a, b) = (
            blind_deblur(&obs, &short_config()).unwrap(),
            blind_deblur(&obs, &short_config()).unwrap(),
        );
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.final_path, b.final_path);
        assert_eq!(a.final_lf, b.final_lf);
        let other = blind_deblur(
            &obs,
            &SolverConfig {
                seed: 5,
                ..short_config()
            },
        )
        .unwrap();
        assert_ne!(other.final_path, a.final_path);
    }

    #[test]
    fn stage_two_only_is_tv_denoising_at_zero_path() {
        let obs = small_scene();
        let cfg = SolverConfig {
            iters_stage1: 0,
            ..short_config()
        };
        let rep = blind_deblur(&obs, &cfg).unwrap();
        assert_eq!(rep.final_path, MotionPath::zero(cfg.n).unwrap());
        assert_eq!(rep.stage1().count(), 0);
        assert_eq!(rep.stage2().count(), cfg.iters_stage2);
        // At the zero path the data term is plain fidelity to the input.
        let (_, grad_tv) = prior::tv_prior_raw(&obs.dims(), &obs.to_f64());
        let first = rep.loss_trace[0];
        assert_eq!(first.data, 0.0);
        assert!(grad_tv.iter().any(|g| *g != 0.0));
        assert!(rep.loss_trace.last().unwrap().total < first.total);
    }

    #[test]
    fn unblurred_input_is_a_fixed_point() {
        let obs = blocks_scene(24, 6);
        let cfg = SolverConfig {
            iters_stage1: 300,
            iters_stage2: 100,
            time_samples: 8,
            ..SolverConfig::default()
        };
        let rep = blind_deblur(&obs, &cfg).unwrap();
        let reach = depth_reach(&obs.dims());
        for p in rep.final_path.control_points() {
            assert!(
                p[0].abs() < 0.1 && p[1].abs() < 0.1 && p[2].abs() * reach < 0.1,
                "{p:?}"
            );
        }
        let e = crate::lightfield::rmse(&rep.final_lf, &obs).unwrap();
        assert!(e < 0.01, "{e} {:?}", rep.final_path);
    }

    #[test]
    fn divergence_returns_the_trace() {
        let obs = small_scene();
        let cfg = SolverConfig {
            lr_lightfield: 1e200,
            ..short_config()
        };
        match blind_deblur(&obs, &cfg) {
            Err(LfError::Diverged {
                stage,
                iteration,
                report,
            }) => {
                assert_eq!(stage, 1);
                assert_eq!(report.loss_trace.len(), iteration + 1);
                assert!(!report.loss_trace.last().unwrap().total.is_finite());
                assert!(report.final_lf.data().iter().all(|v| v.is_finite()));
            }
            other => panic!("expected divergence, got {:?}", other.map(|r| r.final_objective)),
        }
    }

    #[test]
    fn p_z_steps_are_measured_at_the_edge() {
        assert_eq!(depth_reach(&Dims::new(48, 48, 6, 6, 1).unwrap()), 23.5);
        assert_eq!(depth_reach(&Dims::new(1, 1, 6, 6, 1).unwrap()), 1.0);
    }
}
