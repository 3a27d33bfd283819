//! Fourier-domain tools: unitary 4D/2D transforms, in-plane blur kernels
//! and Wiener deconvolution, slice extraction, and blind texture recovery
//! for purely out-of-plane motion of a single textured plane.

use log::warn;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{LfError, Result};
use crate::forward::{ExposureConfig, Schedule};
use crate::lightfield::{refocus, Dims, Image, LightField};
use crate::path::MotionPath;

/// In-place unnormalized DFT over every axis of a row-major array.
fn fft_nd(data: &mut [Complex64], shape: &[usize], dir: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    for (axis, &n) in shape.iter().enumerate() {
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft(n, dir);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, l) in line.iter().enumerate() {
                    data[base + k * stride] = *l;
                }
            }
        }
    }
}

/// Signed DFT frequency (cycles per sample) of bin `k` on `n` samples.
pub fn frequency(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k < (n_f / 2.0).ceil() {
        k / n_f
    } else {
        (k - n_f) / n_f
    }
}

/// Unitary 4D spectrum of a light field, one buffer per channel, laid out
/// `(Ω_y, Ω_x, Ω_v, Ω_u)`.
#[derive(Clone, Debug)]
pub struct Spectrum4 {
    pub dims: Dims,
    pub channels: Vec<Vec<Complex64>>,
}

impl Spectrum4 {
    fn shape(&self) -> [usize; 4] {
        [self.dims.ny, self.dims.nx, self.dims.nv, self.dims.nu]
    }

    #[inline]
    pub fn index(&self, ky: usize, kx: usize, kv: usize, ku: usize) -> usize {
        let d = &self.dims;
        ((ky * d.nx + kx) * d.nv + kv) * d.nu + ku
    }

    pub fn energy(&self) -> f64 {
        self.channels.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

pub fn fft4d(lf: &LightField) -> Spectrum4 {
    let d = lf.dims();
    let shape = [d.ny, d.nx, d.nv, d.nu];
    let n = d.ny * d.nx * d.nv * d.nu;
    let scale = 1.0 / (n as f64).sqrt();
    let channels = (0..d.nc)
        .into_par_iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(lf.data()[i * d.nc + c] as f64, 0.0))
                .collect();
            fft_nd(&mut buf, &shape, FftDirection::Forward);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        })
        .collect();
    Spectrum4 { dims: d, channels }
}

/// Inverse of [`fft4d`], keeping the real part.
pub fn ifft4d(spec: &Spectrum4) -> Result<LightField> {
    let d = spec.dims;
    let n = d.ny * d.nx * d.nv * d.nu;
    let scale = 1.0 / (n as f64).sqrt();
    let shape = spec.shape();
    let bufs: Vec<Vec<Complex64>> = spec
        .channels
        .par_iter()
        .map(|ch| {
            let mut buf = ch.clone();
            fft_nd(&mut buf, &shape, FftDirection::Inverse);
            buf
        })
        .collect();
    let mut out = vec![0f64; d.len()];
    for (c, buf) in bufs.iter().enumerate() {
        for i in 0..n {
            out[i * d.nc + c] = buf[i].re * scale;
        }
    }
    LightField::from_f64(d, &out)
}

/// Unitary 2D spectrum of an image, one buffer per channel.
#[derive(Clone, Debug)]
pub struct Spectrum2 {
    pub height: usize,
    pub width: usize,
    pub channels: Vec<Vec<Complex64>>,
}

impl Spectrum2 {
    pub fn energy(&self) -> f64 {
        self.channels.iter().flatten().map(|z| z.norm_sqr()).sum()
    }
}

pub fn fft2d(img: &Image) -> Spectrum2 {
    let n = img.height * img.width;
    let scale = 1.0 / (n as f64).sqrt();
    let channels = (0..img.channels)
        .map(|c| {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(img.data[i * img.channels + c] as f64, 0.0))
                .collect();
            fft_nd(&mut buf, &[img.height, img.width], FftDirection::Forward);
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        })
        .collect();
    Spectrum2 {
        height: img.height,
        width: img.width,
        channels,
    }
}

pub fn ifft2d(spec: &Spectrum2) -> Result<Image> {
    let n = spec.height * spec.width;
    let nc = spec.channels.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = vec![0f32; n * nc];
    for (c, ch) in spec.channels.iter().enumerate() {
        let mut buf = ch.clone();
        fft_nd(&mut buf, &[spec.height, spec.width], FftDirection::Inverse);
        for i in 0..n {
            out[i * nc + c] = (buf[i].re * scale) as f32;
        }
    }
    Image::new(spec.height, spec.width, nc, out)
}

/// A normalized 2D blur kernel with its origin at `(rows / 2, cols / 2)`.
///
/// Used both as the angular kernel `k(v, u)` of in-plane motion and as a
/// spatial kernel for single-view baselines.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl BlurKernel {
    pub fn delta(rows: usize, cols: usize) -> BlurKernel {
        let mut data = vec![0.0; rows * cols];
        data[(rows / 2) * cols + cols / 2] = 1.0;
        BlurKernel { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Adds bilinear weights for a sample displaced by `(dr, dc)` from the
    /// origin. The taps mirror [`crate::sampling::Taps`] applied to a
    /// displacement of `(-dr, -dc)`, so convolution reproduces the blur.
    fn splat(&mut self, dr: f64, dc: f64, mass: f64) -> Result<()> {
        // Reading l(q + s) with taps floor(s) (1 - a) and floor(s) + 1 (a)
        // equals convolving with weights at offsets -floor(s) and -floor(s) - 1.
        let axis = |s: f64, n: usize| -> Result<[(usize, f64); 2]> {
            let fl = s.floor();
            let a = s - fl;
            let origin = (n / 2) as i64;
            let o0 = origin - fl as i64;
            let o1 = o0 - 1;
            let inside = |o: i64| (0..n as i64).contains(&o);
            if !inside(o0) || (a != 0.0 && !inside(o1)) {
                return Err(LfError::InvalidArgument(format!(
                    "kernel displacement {s} does not fit in a window of {n} samples"
                )));
            }
            Ok([(o0 as usize, 1.0 - a), (o1.max(0) as usize, a)])
        };
        let rr = axis(dr, self.rows)?;
        let cc = axis(dc, self.cols)?;
        for (r, wr) in rr {
            for (c, wc) in cc {
                if wr * wc != 0.0 {
                    self.data[r * self.cols + c] += mass * wr * wc;
                }
            }
        }
        Ok(())
    }

    /// Unnormalized DFT with the origin at `(rows / 2, cols / 2)`.
    pub fn transfer(&self) -> Vec<Complex64> {
        let (r0, c0) = (self.rows / 2, self.cols / 2);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let rr = (r + self.rows - r0) % self.rows;
                let cc = (c + self.cols - c0) % self.cols;
                buf[rr * self.cols + cc] = Complex64::new(self.get(r, c), 0.0);
            }
        }
        fft_nd(&mut buf, &[self.rows, self.cols], FftDirection::Forward);
        buf
    }
}

/// Integrated in-plane kernel `k(v, u)` of `path` on an `nv x nu` window.
pub fn rasterize_kernel(path: &MotionPath, cfg: &ExposureConfig, nv: usize, nu: usize) -> Result<BlurKernel> {
    let sched = Schedule::new(path, cfg);
    let times = cfg.times();
    if let Some((k, p)) = sched.points.iter().enumerate().find(|(_, p)| p[2] != 0.0) {
        return Err(LfError::OutOfPlaneKernel { pz: p[2], t: times[k] });
    }
    let mut kernel = BlurKernel {
        rows: nv,
        cols: nu,
        data: vec![0.0; nv * nu],
    };
    let mass = 1.0 / sched.points.len() as f64;
    for p in &sched.points {
        kernel.splat(p[1], p[0], mass)?;
    }
    Ok(kernel)
}

/// Spatial kernel seen by a single view when the scene sits at `depth`:
/// an angular displacement `p` moves that plane by `p / depth` pixels.
pub fn project_kernel_2d(
    path: &MotionPath,
    cfg: &ExposureConfig,
    depth: f64,
    rows: usize,
    cols: usize,
) -> Result<BlurKernel> {
    if depth == 0.0 || !depth.is_finite() {
        return Err(LfError::InvalidArgument(format!("projection depth {depth}")));
    }
    if !path.is_in_plane() {
        return Err(LfError::OutOfPlaneKernel {
            pz: f64::NAN,
            t: f64::NAN,
        });
    }
    let sched = Schedule::new(path, cfg);
    let mut kernel = BlurKernel {
        rows,
        cols,
        data: vec![0.0; rows * cols],
    };
    let mass = 1.0 / sched.points.len() as f64;
    for p in &sched.points {
        kernel.splat(p[1] / depth, p[0] / depth, mass)?;
    }
    Ok(kernel)
}

fn check_kernel(kernel: &BlurKernel, d: &Dims) -> Result<()> {
    if kernel.rows != d.nv || kernel.cols != d.nu {
        return Err(LfError::ShapeMismatch(format!(
            "kernel {}x{} vs angular window {}x{}",
            kernel.rows, kernel.cols, d.nv, d.nu
        )));
    }
    Ok(())
}

/// Multiplies every `(Ω_y, Ω_x)` plane of the spectrum by `filter(Ω_v, Ω_u)`.
fn filter_angular(lf: &LightField, filter: &[Complex64]) -> Result<LightField> {
    let mut spec = fft4d(lf);
    let plane = lf.dims().nv * lf.dims().nu;
    for ch in spec.channels.iter_mut() {
        ch.par_chunks_mut(plane).for_each(|blk| {
            for (z, f) in blk.iter_mut().zip(filter) {
                *z *= f;
            }
        });
    }
    Ok(ifft4d(&spec)?.with_meta_of(lf))
}

/// Periodic convolution of the light field with `δ(x, y) k(v, u)`.
pub fn convolve_angular(lf: &LightField, kernel: &BlurKernel) -> Result<LightField> {
    check_kernel(kernel, &lf.dims())?;
    filter_angular(lf, &kernel.transfer())
}

fn wiener(kernel: &BlurKernel, eps: f64) -> Result<Vec<Complex64>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(LfError::InvalidArgument(format!("wiener_eps must be > 0, got {eps}")));
    }
    Ok(kernel
        .transfer()
        .iter()
        .map(|k| k.conj() / (k.norm_sqr() + eps))
        .collect())
}

/// 4D deconvolution of a known in-plane blur: every spatial frequency is
/// divided by `K(Ω_v, Ω_u)` through `conj(K) / (|K|² + eps)`.
pub fn deconvolve_inplane(blurred: &LightField, kernel: &BlurKernel, wiener_eps: f64) -> Result<LightField> {
    check_kernel(kernel, &blurred.dims())?;
    filter_angular(blurred, &wiener(kernel, wiener_eps)?)
}

/// Wiener deconvolution of a single image with a spatial kernel.
pub fn deconvolve_image(img: &Image, kernel: &BlurKernel, wiener_eps: f64) -> Result<Image> {
    if kernel.rows != img.height || kernel.cols != img.width {
        return Err(LfError::ShapeMismatch(format!(
            "kernel {}x{} vs image {}x{}",
            kernel.rows, kernel.cols, img.height, img.width
        )));
    }
    let filter = wiener(kernel, wiener_eps)?;
    let mut spec = fft2d(img);
    for ch in spec.channels.iter_mut() {
        for (z, f) in ch.iter_mut().zip(&filter) {
            *z *= f;
        }
    }
    ifft2d(&spec)
}

/// The 2D Fourier slice at `slope`, computed in the primal domain as the
/// spectrum of the sheared integral projection.
pub fn extract_fourier_slice(lf: &LightField, slope: f64) -> Result<Spectrum2> {
    Ok(fft2d(&refocus(lf, slope)?))
}

/// Shear `l(x, y, u - x s, v - y s)` with periodic angular wrap-around.
pub fn shear_periodic(lf: &LightField, slope: f64) -> Result<LightField> {
    let d = lf.dims();
    let wrap = |q: f64, n: usize| -> (usize, usize, f64) {
        let fl = q.floor();
        let a = q - fl;
        let i0 = (fl as i64).rem_euclid(n as i64) as usize;
        (i0, (i0 + 1) % n, a)
    };
    LightField::from_fn(d, |y, x, v, u, c| {
        let xc = crate::sampling::centered(x, d.nx);
        let yc = crate::sampling::centered(y, d.ny);
        let (u0, u1, au) = wrap(u as f64 - xc * slope, d.nu);
        let (v0, v1, av) = wrap(v as f64 - yc * slope, d.nv);
        let g = |vv: usize, uu: usize| lf.get(y, x, vv, uu, c) as f64;
        ((1.0 - av) * ((1.0 - au) * g(v0, u0) + au * g(v0, u1)) + av * ((1.0 - au) * g(v1, u0) + au * g(v1, u1))) as f32
    })
}

/// Spectrum of [`shear_periodic`] predicted by the affine theorem:
/// `H(Ω_x, Ω_u) = G(Ω_x + s Ω_u, Ω_u)` (same for `y, v`).
///
/// The repositioning must land on DFT bins, i.e. `s * Ω_u * nx` must be an
/// integer for every angular bin (and likewise for `y`).
pub fn affine_predicted_shear_spectrum(spec: &Spectrum4, slope: f64) -> Result<Spectrum4> {
    let d = spec.dims;
    // The centered spatial coordinate adds a linear phase; the shear in the
    // centered frame is u - (x_idx - cx) s.
    let bin_shift = |k: usize, n_ang: usize, n_sp: usize| -> Result<i64> {
        let f = frequency(k, n_ang) * slope * n_sp as f64;
        let r = f.round();
        if (f - r).abs() > 1e-9 {
            return Err(LfError::InvalidArgument(format!(
                "slope {slope} does not map angular bin {k} onto a spatial bin"
            )));
        }
        Ok(r as i64)
    };
    let cx = (d.nx as f64 - 1.0) / 2.0;
    let cy = (d.ny as f64 - 1.0) / 2.0;
    let mut out = Spectrum4 {
        dims: d,
        channels: vec![vec![Complex64::new(0.0, 0.0); spec.channels[0].len()]; spec.channels.len()],
    };
    for kv in 0..d.nv {
        let sy = bin_shift(kv, d.nv, d.ny)?;
        for ku in 0..d.nu {
            let sx = bin_shift(ku, d.nu, d.nx)?;
            // The centered spatial origin contributes exp(2πi s Ω_u c_x).
            let phase = 2.0 * std::f64::consts::PI * slope * (frequency(ku, d.nu) * cx + frequency(kv, d.nv) * cy);
            let rot = Complex64::from_polar(1.0, phase);
            for ky in 0..d.ny {
                let src_y = (ky as i64 + sy).rem_euclid(d.ny as i64) as usize;
                for kx in 0..d.nx {
                    let src_x = (kx as i64 + sx).rem_euclid(d.nx as i64) as usize;
                    let dst = out.index(ky, kx, kv, ku);
                    let src = spec.index(src_y, src_x, kv, ku);
                    for (o, s) in out.channels.iter_mut().zip(&spec.channels) {
                        o[dst] = s[src] * rot;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// How the `|ζΩ| + 1` slice correction extends to two spatial frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceCorrection {
    /// `(|ζΩ_x| + 1)(|ζΩ_y| + 1)`
    Separable,
    /// `ζ max(|Ω_x|, |Ω_y|) + 1`
    MaxNorm,
}

#[derive(Clone, Debug)]
pub struct TextureRecoveryOptions {
    /// Frequency band (cycles per sample, max-norm) used to compare slices.
    pub band: (f64, f64),
    /// Reference-slice modulus percentile above which bins are compared.
    pub percentile: f64,
    /// Side of the central window analysed for slope weights; `None` uses
    /// the whole slice. Off-center content is magnified differently at each
    /// depth, which decorrelates magnitudes.
    pub window: Option<usize>,
    pub correction: SliceCorrection,
}

impl Default for TextureRecoveryOptions {
    fn default() -> Self {
        TextureRecoveryOptions {
            band: (0.05, 0.5),
            percentile: 0.7,
            window: None,
            correction: SliceCorrection::Separable,
        }
    }
}

/// Result of blind out-of-plane texture recovery.
#[derive(Clone, Debug)]
pub struct TextureRecovery {
    pub texture: Image,
    pub slopes: Vec<f64>,
    /// Relative time spent at each slope, summing to 1.
    pub weights: Vec<f64>,
    pub zeta: f64,
    pub best_slope: f64,
    /// Set when slice magnitudes carried no depth information.
    pub degenerate: bool,
}

/// `count` uniform samples spanning `[z_min, z_max]`.
pub fn slope_grid(z_min: f64, z_max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !z_min.is_finite() || !z_max.is_finite() || z_min > z_max {
        return Err(LfError::InvalidArgument(format!(
            "slope grid [{z_min}, {z_max}] with {count} samples"
        )));
    }
    if count == 1 {
        return Ok(vec![0.5 * (z_min + z_max)]);
    }
    Ok((0..count)
        .map(|i| z_min + (z_max - z_min) * i as f64 / (count - 1) as f64)
        .collect())
}

fn central_window(img: &Image, side: usize) -> Image {
    let h = side.min(img.height);
    let w = side.min(img.width);
    let r0 = (img.height - h) / 2;
    let c0 = (img.width - w) / 2;
    let hann = |i: usize, n: usize| {
        if n <= 1 {
            1.0
        } else {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
        }
    };
    let crop = img.crop(r0, r0 + h, c0, c0 + w).expect("window inside image");
    let mean: Vec<f64> = (0..crop.channels)
        .map(|c| (0..h * w).map(|i| crop.data[i * crop.channels + c] as f64).sum::<f64>() / (h * w) as f64)
        .collect();
    Image::from_fn(h, w, crop.channels, |r, col, c| {
        ((crop.get(r, col, c) as f64 - mean[c]) * hann(r, h) * hann(col, w)) as f32
    })
    .expect("shape is consistent")
}

fn band_mask(height: usize, width: usize, band: (f64, f64)) -> Vec<bool> {
    let mut m = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let f = frequency(r, height).abs().max(frequency(c, width).abs());
            m.push(f >= band.0 && f <= band.1 && f > 0.0);
        }
    }
    m
}

/// Sum over channels of the spectral modulus.
fn modulus(spec: &Spectrum2) -> Vec<f64> {
    let n = spec.height * spec.width;
    (0..n)
        .map(|i| spec.channels.iter().map(|ch| ch[i].norm()).sum())
        .collect()
}

/// Blind texture recovery for a single plane under out-of-plane motion.
///
/// Fourier slices are extracted at every slope; their band-limited moduli
/// relative to the strongest slice give the relative time spent at each
/// depth. The best-supported slice is then re-weighted by `|ζΩ| + 1`, with
/// ζ derived from how little time the camera spent near that depth.
pub fn recover_texture(blurred: &LightField, slopes: &[f64], opts: &TextureRecoveryOptions) -> Result<TextureRecovery> {
    if slopes.is_empty() {
        return Err(LfError::InvalidArgument("slope grid is empty".into()));
    }
    if !(0.0..1.0).contains(&opts.percentile) {
        return Err(LfError::InvalidArgument(format!("percentile {}", opts.percentile)));
    }
    let images: Vec<Image> = slopes.par_iter().map(|&s| refocus(blurred, s)).collect::<Result<_>>()?;
    let analysed: Vec<Spectrum2> = images
        .par_iter()
        .map(|img| match opts.window {
            Some(side) => fft2d(&central_window(img, side)),
            None => fft2d(img),
        })
        .collect();
    let (h, w) = (analysed[0].height, analysed[0].width);
    let band = band_mask(h, w, opts.band);
    let mods: Vec<Vec<f64>> = analysed.iter().map(modulus).collect();
    let band_energy: Vec<f64> = mods
        .iter()
        .map(|m| m.iter().zip(&band).filter(|(_, &b)| b).map(|(v, _)| v * v).sum())
        .collect();
    let reference = argmax(&band_energy);

    let mask = reference_mask(&mods[reference], &band, opts.percentile);
    let ref_sum = masked_sum(&mods[reference], &mask);
    let mut weights = vec![1.0; slopes.len()];
    let mut degenerate = ref_sum <= 0.0;
    if !degenerate {
        weights = mods.iter().map(|m| masked_sum(m, &mask) / ref_sum).collect();
    }
    let spread = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - weights.iter().cloned().fold(f64::INFINITY, f64::min);
    if degenerate || spread <= 1e-12 {
        warn!("slice magnitudes are uniform across slopes; returning uniform weights");
        degenerate = true;
        weights = vec![1.0; slopes.len()];
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let best = argmax(&weights);
    let best_slope = slopes[best];
    let in_focus = if degenerate {
        1.0
    } else {
        in_focus_fraction(blurred, &images[best], best_slope, slopes, &weights, best, opts, &band)?
    };
    let zeta = 2.0 * (1.0 / in_focus - 1.0);

    let mut spec = fft2d(&images[best]);
    let (sh, sw) = (spec.height, spec.width);
    for ch in spec.channels.iter_mut() {
        for r in 0..sh {
            let fy = frequency(r, sh).abs();
            for c in 0..sw {
                let fx = frequency(c, sw).abs();
                let gain = match opts.correction {
                    SliceCorrection::Separable => (zeta * fx + 1.0) * (zeta * fy + 1.0),
                    SliceCorrection::MaxNorm => zeta * fx.max(fy) + 1.0,
                };
                ch[r * sw + c] *= gain;
            }
        }
    }
    let mut texture = ifft2d(&spec)?;
    texture.data.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
    Ok(TextureRecovery {
        texture,
        slopes: slopes.to_vec(),
        weights,
        zeta,
        best_slope,
        degenerate,
    })
}

/// Fraction of the slice magnitude profile explained by a sharp plane at
/// the best slope.
///
/// The best slice is re-rendered as an unblurred plane at `best_slope`
/// and analysed exactly like the input; its profile over slopes is the
/// depth-of-field spread alone. Its mass relative to the measured profile
/// is the share of the exposure spent in focus at that depth.
#[allow(clippy::too_many_arguments)]
fn in_focus_fraction(
    blurred: &LightField,
    best_image: &Image,
    best_slope: f64,
    slopes: &[f64],
    weights: &[f64],
    best: usize,
    opts: &TextureRecoveryOptions,
    band: &[bool],
) -> Result<f64> {
    let mut texture = best_image.clone();
    texture.data.iter_mut().for_each(|p| *p = p.clamp(0.0, 1.0));
    let sharp = crate::synth::plane_lightfield(&texture, best_slope, blurred.dims())?;
    let images: Vec<Image> = slopes.par_iter().map(|&s| refocus(&sharp, s)).collect::<Result<_>>()?;
    let mods: Vec<Vec<f64>> = images
        .par_iter()
        .map(|img| match opts.window {
            Some(side) => modulus(&fft2d(&central_window(img, side))),
            None => modulus(&fft2d(img)),
        })
        .collect();
    let mask = reference_mask(&mods[best], band, opts.percentile);
    let reference = masked_sum(&mods[best], &mask);
    if reference <= 0.0 {
        return Ok(1.0);
    }
    let sharp_mass: f64 = mods.iter().map(|m| masked_sum(m, &mask) / reference).sum();
    let measured_mass: f64 = weights.iter().sum::<f64>() / weights[best];
    Ok((sharp_mass / measured_mass).clamp(1e-3, 1.0))
}

fn reference_mask(reference: &[f64], band: &[bool], percentile: f64) -> Vec<bool> {
    let mut in_band: Vec<f64> = reference
        .iter()
        .zip(band)
        .filter(|(_, &b)| b)
        .map(|(&v, _)| v)
        .collect();
    if in_band.is_empty() {
        return vec![false; reference.len()];
    }
    in_band.sort_by(|a, b| a.total_cmp(b));
    let thr = in_band[((in_band.len() - 1) as f64 * percentile).round() as usize];
    reference.iter().zip(band).map(|(&v, &b)| b && v >= thr).collect()
}

fn masked_sum(v: &[f64], mask: &[bool]) -> f64 {
    v.iter().zip(mask).filter(|(_, &m)| m).map(|(x, _)| x).sum()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) },
        )
        .0
}
