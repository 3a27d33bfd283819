//! Ground-truth synthetic light fields: textured fronto-parallel planes,
//! layered scenes with alpha, and procedural textures.

use std::f64::consts::TAU;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LfError, Result};
use crate::lightfield::{Dims, Image, LightField};
use crate::sampling::{centered, uncentered, Taps};

/// Texture position hit by ray `(spatial, angular)` on a plane at `depth`.
///
/// Every module that maps rays to plane positions (synthesis, refocusing,
/// the out-of-plane shear) goes through this convention.
#[inline]
pub fn plane_hit(spatial: f64, angular: f64, depth: f64) -> f64 {
    spatial * depth + angular
}

/// A plane texture with optional coverage.
#[derive(Clone, Debug, PartialEq)]
pub struct Texture {
    pub image: Image,
    /// One value per pixel in `[0, 1]`; `None` means fully opaque.
    pub alpha: Option<Vec<f32>>,
}

impl Texture {
    pub fn opaque(image: Image) -> Texture {
        Texture { image, alpha: None }
    }

    pub fn with_alpha(image: Image, alpha: Vec<f32>) -> Result<Texture> {
        if alpha.len() != image.height * image.width {
            return Err(LfError::ShapeMismatch(format!(
                "alpha has {} values for a {}x{} texture",
                alpha.len(),
                image.height,
                image.width
            )));
        }
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(LfError::InvalidArgument("alpha outside [0, 1]".into()));
        }
        Ok(Texture {
            image,
            alpha: Some(alpha),
        })
    }

    fn validate(&self) -> Result<()> {
        if self.image.data.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(LfError::InvalidArgument("texture values outside [0, 1]".into()));
        }
        Ok(())
    }

    /// Bilinear lookup at centered texture coordinates, clamp-to-edge.
    /// Returns (color per channel via callback index, alpha).
    fn lookup_taps(&self, ty: f64, tx: f64) -> (Taps, Taps) {
        let h = self.image.height;
        let w = self.image.width;
        (Taps::new(uncentered(ty, h), h), Taps::new(uncentered(tx, w), w))
    }

    fn color(&self, ty: &Taps, tx: &Taps, c: usize) -> f64 {
        let img = &self.image;
        let c = c.min(img.channels - 1);
        ty.sample(|r| tx.sample(|col| img.get(r, col, c) as f64))
    }

    fn alpha_at(&self, ty: &Taps, tx: &Taps) -> f64 {
        match &self.alpha {
            None => 1.0,
            Some(a) => {
                let w = self.image.width;
                ty.sample(|r| tx.sample(|col| a[r * w + col] as f64))
            }
        }
    }
}

/// Fronto-parallel planes ordered front to back over a constant background.
#[derive(Clone, Debug)]
pub struct PlaneScene {
    pub planes: Vec<(Texture, f64)>,
    pub background: Vec<f32>,
}

impl PlaneScene {
    pub fn new(planes: Vec<(Texture, f64)>, background: Vec<f32>) -> Result<PlaneScene> {
        if planes.is_empty() {
            return Err(LfError::InvalidArgument("scene needs at least one plane".into()));
        }
        for w in planes.windows(2) {
            if w[0].1.partial_cmp(&w[1].1) != Some(std::cmp::Ordering::Less) {
                return Err(LfError::InvalidArgument(format!(
                    "plane depths must increase front to back ({} then {})",
                    w[0].1, w[1].1
                )));
            }
        }
        for (t, z) in &planes {
            t.validate()?;
            if !z.is_finite() {
                return Err(LfError::NonFinite(format!("plane depth {z}")));
            }
        }
        if background.is_empty() {
            return Err(LfError::InvalidArgument("background needs at least one channel".into()));
        }
        Ok(PlaneScene { planes, background })
    }
}

/// Light field of one opaque textured plane at depth `z_prime`:
/// `l(x, y, u, v) = texture(x*z' + u, y*z' + v)`.
pub fn plane_lightfield(texture: &Image, z_prime: f64, dims: Dims) -> Result<LightField> {
    let tex = Texture::opaque(texture.clone());
    tex.validate()?;
    render(dims, |y, x, v, u, c| {
        let (ty, tx) = tex.lookup_taps(plane_hit(y, v, z_prime), plane_hit(x, u, z_prime));
        tex.color(&ty, &tx, c)
    })
}

/// Front-to-back "over" compositing of every plane along each ray.
pub fn multiplane_lightfield(scene: &PlaneScene, dims: Dims) -> Result<LightField> {
    render(dims, |y, x, v, u, c| {
        let mut acc = 0.0;
        let mut transmit = 1.0;
        for (tex, z) in &scene.planes {
            let (ty, tx) = tex.lookup_taps(plane_hit(y, v, *z), plane_hit(x, u, *z));
            let a = tex.alpha_at(&ty, &tx);
            if a > 0.0 {
                acc += transmit * a * tex.color(&ty, &tx, c);
                transmit *= 1.0 - a;
            }
            if transmit <= 0.0 {
                break;
            }
        }
        let bg = scene.background[c.min(scene.background.len() - 1)] as f64;
        acc + transmit * bg
    })
}

fn render(dims: Dims, f: impl Fn(f64, f64, f64, f64, usize) -> f64) -> Result<LightField> {
    dims.validate()?;
    LightField::from_fn(dims, |y, x, v, u, c| {
        f(
            centered(y, dims.ny),
            centered(x, dims.nx),
            centered(v, dims.nv),
            centered(u, dims.nu),
            c,
        ) as f32
    })
}

/// Procedural or file-backed texture source.
#[derive(Clone, Debug, PartialEq)]
pub enum TextureKind {
    /// Square blocks of `period` pixels alternating 0 and 1.
    Checker { period: usize },
    /// Independent uniform samples.
    Noise,
    /// Piecewise-constant blocks of `cell` pixels with independent uniform
    /// values: sparse gradients without the periodicity of a checker.
    Blocks { cell: usize },
    /// Multi-octave bilinear value noise with base lattice spacing `cell`,
    /// stretched to span `[0, 1]`.
    SmoothNoise { cell: f64, octaves: usize },
    /// Grayscale PNG, center-cropped (edge-replicated when smaller). With
    /// `srgb` the stored values are decoded to linear radiance.
    ImageFile { path: PathBuf, srgb: bool },
}

impl FromStr for TextureKind {
    type Err = LfError;

    fn from_str(s: &str) -> Result<TextureKind> {
        match s {
            "checker" => Ok(TextureKind::Checker { period: 8 }),
            "noise" => Ok(TextureKind::Noise),
            "blocks" => Ok(TextureKind::Blocks { cell: 6 }),
            "smooth-noise" => Ok(TextureKind::SmoothNoise { cell: 16.0, octaves: 4 }),
            _ => match s.strip_prefix("image-file:") {
                Some(p) => Ok(TextureKind::ImageFile {
                    path: PathBuf::from(p),
                    srgb: false,
                }),
                None => Err(LfError::UnknownTextureKind(s.to_string())),
            },
        }
    }
}

/// Deterministic single-channel `size x size` texture with values in `[0, 1]`.
pub fn make_texture(kind: &TextureKind, size: usize, seed: u64) -> Result<Image> {
    if size == 0 {
        return Err(LfError::InvalidArgument("texture size must be >= 1".into()));
    }
    match kind {
        TextureKind::Checker { period } => {
            let p = (*period).max(1);
            Image::from_fn(size, size, 1, |r, c, _| ((r / p + c / p) % 2) as f32)
        }
        TextureKind::Noise => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..size * size).map(|_| rng.gen::<f32>()).collect();
            Image::new(size, size, 1, data)
        }
        TextureKind::Blocks { cell } => {
            let cell = (*cell).max(1);
            let m = size.div_ceil(cell);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<f32> = (0..m * m).map(|_| rng.gen::<f32>()).collect();
            Image::from_fn(size, size, 1, |r, c, _| values[(r / cell) * m + c / cell])
        }
        TextureKind::SmoothNoise { cell, octaves } => smooth_noise(size, *cell, *octaves, seed),
        TextureKind::ImageFile { path, srgb } => {
            let img = crate::io::png::read_gray(path, *srgb)?;
            let r0 = img.height as isize / 2 - size as isize / 2;
            let c0 = img.width as isize / 2 - size as isize / 2;
            Image::from_fn(size, size, 1, |r, c, _| {
                let rr = (r0 + r as isize).clamp(0, img.height as isize - 1) as usize;
                let cc = (c0 + c as isize).clamp(0, img.width as isize - 1) as usize;
                img.get(rr, cc, 0)
            })
        }
    }
}

fn smooth_noise(size: usize, cell: f64, octaves: usize, seed: u64) -> Result<Image> {
    if cell.is_nan() || cell < 1.0 || octaves == 0 {
        return Err(LfError::InvalidArgument(format!(
            "smooth noise needs cell >= 1 and octaves >= 1 (got {cell}, {octaves})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![0f64; size * size];
    let mut amp = 1.0;
    let mut cell = cell;
    for _ in 0..octaves {
        let m = (size as f64 / cell).ceil() as usize + 2;
        let lattice: Vec<f64> = (0..m * m).map(|_| rng.gen::<f64>()).collect();
        for r in 0..size {
            let tr = Taps::new(r as f64 / cell, m);
            for c in 0..size {
                let tc = Taps::new(c as f64 / cell, m);
                acc[r * size + c] += amp * tr.sample(|i| tc.sample(|j| lattice[i * m + j]));
            }
        }
        amp *= 0.5;
        cell = (cell / 2.0).max(1.0);
    }
    let lo = acc.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    Image::new(size, size, 1, acc.iter().map(|&a| ((a - lo) / span) as f32).collect())
}

/// Side of a square texture that covers every ray of `dims` hitting a
/// plane at depth `z`, with a small margin.
pub fn texture_size(dims: &Dims, z: f64) -> usize {
    let spatial = (dims.ny.max(dims.nx) as f64 - 1.0) / 2.0;
    let angular = (dims.nv.max(dims.nu) as f64 - 1.0) / 2.0;
    (2.0 * (spatial * z.abs() + angular)).ceil() as usize + 3
}

/// A disk-shaped occluder at `z_front` over an opaque plane at `z_back`.
///
/// The disk radius is 30% of the smaller spatial side as seen through the
/// central view; the background behind both is mid-gray.
pub fn two_plane_lightfield(
    dims: Dims,
    z_front: f64,
    z_back: f64,
    front: &TextureKind,
    back: &TextureKind,
    seed: u64,
) -> Result<LightField> {
    let fs = texture_size(&dims, z_front);
    let front = make_texture(front, fs, seed)?;
    let back = make_texture(back, texture_size(&dims, z_back), seed.wrapping_add(1))?;
    let radius = 0.3 * dims.ny.min(dims.nx) as f64 * z_front.abs().max(1e-3);
    let scene = PlaneScene::new(
        vec![
            (Texture::with_alpha(front, disk_alpha(fs, radius))?, z_front),
            (Texture::opaque(back), z_back),
        ],
        vec![0.5],
    )?;
    multiplane_lightfield(&scene, dims)
}

/// Layered scene whose light field is periodic in `u` with period `nu`
/// (and in `v` with period `nv` when `nv > 1`).
///
/// Each layer is a sum of cosines in texture coordinates with horizontal
/// frequencies that are whole multiples of `1 / nu`, up to `max_harmonic`.
/// Every layer but the last carries a soft periodic alpha. Because a whole
/// angular period maps onto a whole texture period, an in-plane blur of this
/// scene is exactly a circular convolution over the angular window.
pub fn periodic_layer_lightfield(dims: Dims, depths: &[f64], max_harmonic: usize, seed: u64) -> Result<LightField> {
    dims.validate()?;
    let scene = PeriodicScene::new(dims, depths, max_harmonic, seed)?;
    render(dims, |y, x, v, u, _| scene.radiance(y, x, v, u))
}

struct PeriodicLayer {
    depth: f64,
    /// `[amplitude, fx, fy, phase]` per cosine.
    terms: Vec<[f64; 4]>,
    /// `(phase, fy)` of the alpha pattern; `None` for the opaque back layer.
    alpha: Option<(f64, f64)>,
}

struct PeriodicScene {
    period_u: f64,
    layers: Vec<PeriodicLayer>,
}

impl PeriodicScene {
    fn new(dims: Dims, depths: &[f64], max_harmonic: usize, seed: u64) -> Result<PeriodicScene> {
        if depths.is_empty() || max_harmonic == 0 {
            return Err(LfError::InvalidArgument(
                "periodic scene needs at least one depth and max_harmonic >= 1".into(),
            ));
        }
        if let Some(z) = depths.iter().find(|z| !z.is_finite()) {
            return Err(LfError::NonFinite(format!("layer depth {z}")));
        }
        let (pu, pv) = (dims.nu as f64, dims.nv as f64);
        let snap_v = |f: f64| if dims.nv > 1 { (f * pv).round() / pv } else { f };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = depths.len() - 1;
        let layers = depths
            .iter()
            .enumerate()
            .map(|(i, &depth)| {
                let terms = (0..16)
                    .map(|_| {
                        let k = rng.gen_range(1..=max_harmonic) as f64;
                        let k = if rng.gen::<bool>() { k } else { -k };
                        let fy = snap_v(rng.gen_range(0.0..0.2));
                        [0.12 / (1.0 + 0.3 * k.abs()), k / pu, fy, rng.gen_range(0.0..TAU)]
                    })
                    .collect();
                let alpha = (i < last).then(|| (rng.gen_range(0.0..1.0), snap_v(rng.gen_range(0.03..0.08))));
                PeriodicLayer { depth, terms, alpha }
            })
            .collect();
        Ok(PeriodicScene { period_u: pu, layers })
    }

    fn radiance(&self, y: f64, x: f64, v: f64, u: f64) -> f64 {
        let mut acc = 0.0;
        let mut transmit = 1.0;
        for l in &self.layers {
            let (ty, tx) = (plane_hit(y, v, l.depth), plane_hit(x, u, l.depth));
            let value: f64 = l
                .terms
                .iter()
                .map(|&[a, fx, fy, ph]| a * (TAU * (fx * tx + fy * ty) + ph).cos())
                .sum();
            let a = match l.alpha {
                Some((ph, fy)) => {
                    (0.5 + (TAU * (tx / self.period_u + ph)).cos() * (TAU * fy * ty).cos()).clamp(0.0, 1.0)
                }
                None => 1.0,
            };
            acc += transmit * a * (0.5 + value).clamp(0.0, 1.0);
            transmit *= 1.0 - a;
        }
        acc
    }
}

/// A disk-shaped alpha mask (1 inside radius `r` around the center).
pub fn disk_alpha(size: usize, radius: f64) -> Vec<f32> {
    let mut a = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let d = centered(r, size).hypot(centered(c, size));
            a.push(if d <= radius { 1.0 } else { 0.0 });
        }
    }
    a
}
