//! Two-plane light field container and its 2D views.
//!
//! Samples are indexed `(y, x, v, u, c)`. Continuous coordinates are in
//! sample units and centered on the grid: `index = coord + (n - 1) / 2`.
//! `x, y` are ray directions relative to the aperture position `u, v`
//! (plane separation fixed to 1), so a fronto-parallel plane at depth `z`
//! is seen by ray `(x, u)` at texture position `x * z + u`.

use rayon::prelude::*;

use crate::error::{LfError, Result};
use crate::sampling::{centered, uncentered, Taps};

/// Largest |slope| accepted by [`refocus`].
pub const MAX_REFOCUS_SLOPE: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub ny: usize,
    pub nx: usize,
    pub nv: usize,
    pub nu: usize,
    pub nc: usize,
}

impl Dims {
    pub fn new(ny: usize, nx: usize, nv: usize, nu: usize, nc: usize) -> Result<Dims> {
        let d = Dims { ny, nx, nv, nu, nc };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ny == 0 || self.nx == 0 || self.nv == 0 || self.nu == 0 {
            return Err(LfError::InvalidDims(format!("{self:?}: all axes must be >= 1")));
        }
        if self.nc != 1 && self.nc != 3 {
            return Err(LfError::InvalidDims(format!("nc = {} (expected 1 or 3)", self.nc)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ny * self.nx * self.nv * self.nu * self.nc
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples in one angular patch (fixed `y, x`).
    pub fn patch_len(&self) -> usize {
        self.nv * self.nu * self.nc
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, v: usize, u: usize, c: usize) -> usize {
        (((y * self.nx + x) * self.nv + v) * self.nu + u) * self.nc + c
    }

    pub fn to_continuous(&self, y: usize, x: usize, v: usize, u: usize) -> ContinuousCoords {
        ContinuousCoords {
            x: centered(x, self.nx),
            y: centered(y, self.ny),
            u: centered(u, self.nu),
            v: centered(v, self.nv),
        }
    }

    /// Fractional grid indices `(y, x, v, u)` of a continuous position.
    pub fn to_index(&self, c: &ContinuousCoords) -> [f64; 4] {
        [
            uncentered(c.y, self.ny),
            uncentered(c.x, self.nx),
            uncentered(c.v, self.nv),
            uncentered(c.u, self.nu),
        ]
    }
}

/// Continuous ray coordinates in sample units, zero at the grid center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousCoords {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

/// A 4D sampled light field with `nc` channels.
#[derive(Clone, Debug, PartialEq)]
pub struct LightField {
    dims: Dims,
    spatial_pitch: f64,
    angular_pitch: f64,
    data: Vec<f32>,
}

impl LightField {
    pub fn new(dims: Dims, data: Vec<f32>) -> Result<LightField> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(LfError::ShapeMismatch(format!(
                "{} samples for dims {:?} (expected {})",
                data.len(),
                dims,
                dims.len()
            )));
        }
        if let Some(i) = data.iter().position(|s| !s.is_finite()) {
            return Err(LfError::NonFinite(format!("light field sample {i}")));
        }
        Ok(LightField {
            dims,
            spatial_pitch: 1.0,
            angular_pitch: 1.0,
            data,
        })
    }

    /// Builds a light field from f64 samples, rounding to f32.
    pub fn from_f64(dims: Dims, data: &[f64]) -> Result<LightField> {
        LightField::new(dims, data.iter().map(|&s| s as f32).collect())
    }

    pub fn constant(dims: Dims, value: f32) -> Result<LightField> {
        LightField::new(dims, vec![value; dims.len()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize, usize, usize) -> f32) -> Result<LightField> {
        dims.validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                for v in 0..dims.nv {
                    for u in 0..dims.nu {
                        for c in 0..dims.nc {
                            data.push(f(y, x, v, u, c));
                        }
                    }
                }
            }
        }
        LightField::new(dims, data)
    }

    pub fn with_pitches(mut self, spatial_pitch: f64, angular_pitch: f64) -> Result<LightField> {
        if !(spatial_pitch > 0.0 && angular_pitch > 0.0) || !spatial_pitch.is_finite() || !angular_pitch.is_finite() {
            return Err(LfError::InvalidArgument(format!(
                "pitches must be positive, got ({spatial_pitch}, {angular_pitch})"
            )));
        }
        self.spatial_pitch = spatial_pitch;
        self.angular_pitch = angular_pitch;
        Ok(self)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn spatial_pitch(&self) -> f64 {
        self.spatial_pitch
    }

    pub fn angular_pitch(&self) -> f64 {
        self.angular_pitch
    }

    /// Separation between the `x` and `u` planes; always 1.
    pub fn plane_separation(&self) -> f64 {
        1.0
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, v: usize, u: usize, c: usize) -> f32 {
        self.data[self.dims.index(y, x, v, u, c)]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&s| s as f64).collect()
    }

    /// Copies metadata (pitches) from `other`.
    pub(crate) fn with_meta_of(mut self, other: &LightField) -> LightField {
        self.spatial_pitch = other.spatial_pitch;
        self.angular_pitch = other.angular_pitch;
        self
    }
}

/// A 2D multi-channel image, row-major `(row, col, c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Image> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(LfError::InvalidDims(format!("image {height}x{width}x{channels}")));
        }
        if data.len() != height * width * channels {
            return Err(LfError::ShapeMismatch(format!(
                "{} samples for a {height}x{width}x{channels} image",
                data.len()
            )));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Image> {
        let mut data = Vec::with_capacity(height * width * channels);
        for r in 0..height {
            for col in 0..width {
                for c in 0..channels {
                    data.push(f(r, col, c));
                }
            }
        }
        Image::new(height, width, channels, data)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, c: usize) -> f32 {
        self.data[(row * self.width + col) * self.channels + c]
    }

    /// Copy of the `[r0, r1) x [c0, c1)` window.
    pub fn crop(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Result<Image> {
        if r0 >= r1 || c0 >= c1 || r1 > self.height || c1 > self.width {
            return Err(LfError::InvalidArgument(format!(
                "crop [{r0},{r1})x[{c0},{c1}) outside {}x{}",
                self.height, self.width
            )));
        }
        Image::from_fn(r1 - r0, c1 - c0, self.channels, |r, c, ch| self.get(r0 + r, c0 + c, ch))
    }

    /// Crops `frac` of each side away (e.g. 0.1 keeps the central 80%).
    pub fn interior(&self, frac: f64) -> Result<Image> {
        let br = (self.height as f64 * frac).round() as usize;
        let bc = (self.width as f64 * frac).round() as usize;
        self.crop(br, self.height - br, bc, self.width - bc)
    }
}

/// Anything with a flat sample buffer and a shape, for [`rmse`].
pub trait Samples {
    fn shape(&self) -> Vec<usize>;
    fn samples(&self) -> &[f32];
}

impl Samples for LightField {
    fn shape(&self) -> Vec<usize> {
        let d = self.dims;
        vec![d.ny, d.nx, d.nv, d.nu, d.nc]
    }
    fn samples(&self) -> &[f32] {
        &self.data
    }
}

impl Samples for Image {
    fn shape(&self) -> Vec<usize> {
        vec![self.height, self.width, self.channels]
    }
    fn samples(&self) -> &[f32] {
        &self.data
    }
}

/// Root mean square difference over all samples and channels.
pub fn rmse<S: Samples + ?Sized>(a: &S, b: &S) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(LfError::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let n = a.samples().len();
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&p, &q)| {
            let d = p as f64 - q as f64;
            d * d
        })
        .sum();
    Ok((sum / n as f64).sqrt())
}

fn check_index(axis: &'static str, index: usize, len: usize) -> Result<()> {
    if index >= len {
        Err(LfError::OutOfBounds { axis, index, len })
    } else {
        Ok(())
    }
}

/// The `ny x nx x nc` pinhole view at angular sample `(v_idx, u_idx)`.
pub fn subaperture(lf: &LightField, u_idx: usize, v_idx: usize) -> Result<Image> {
    let d = lf.dims();
    check_index("u", u_idx, d.nu)?;
    check_index("v", v_idx, d.nv)?;
    Image::from_fn(d.ny, d.nx, d.nc, |y, x, c| lf.get(y, x, v_idx, u_idx, c))
}

/// The central sub-aperture view (`nu / 2`, `nv / 2`).
pub fn central_view(lf: &LightField) -> Image {
    let d = lf.dims();
    subaperture(lf, d.nu / 2, d.nv / 2).expect("central indices are in range")
}

/// Epipolar slice over `(x, u)` at fixed `y` and `v`; rows are `x`.
pub fn epipolar_slice(lf: &LightField, fixed_y: usize, fixed_v: usize) -> Result<Image> {
    let d = lf.dims();
    check_index("y", fixed_y, d.ny)?;
    check_index("v", fixed_v, d.nv)?;
    Image::from_fn(d.nx, d.nu, d.nc, |x, u, c| lf.get(fixed_y, x, fixed_v, u, c))
}

/// Mean over the aperture for every `(y, x, c)`.
pub fn full_aperture(lf: &LightField) -> Image {
    let d = lf.dims();
    let na = (d.nv * d.nu) as f64;
    let mut out = vec![0f32; d.ny * d.nx * d.nc];
    out.par_chunks_mut(d.nx * d.nc).enumerate().for_each(|(y, row)| {
        for x in 0..d.nx {
            for c in 0..d.nc {
                let mut s = 0.0f64;
                for v in 0..d.nv {
                    for u in 0..d.nu {
                        s += lf.get(y, x, v, u, c) as f64;
                    }
                }
                row[x * d.nc + c] = (s / na) as f32;
            }
        }
    });
    Image::new(d.ny, d.nx, d.nc, out).expect("shape is consistent")
}

/// Per-output projection taps along one (spatial, angular) axis pair.
///
/// Output sample `o` sits at focal-plane coordinate `X = centered(o)` and
/// averages the rays `(x, X - x * slope)` whose angular coordinate lies in
/// the sampled aperture. If none do, every ray is used with clamped taps.
struct ProjectionAxis {
    taps: Vec<Vec<(usize, Taps, f64)>>,
}

impl ProjectionAxis {
    fn new(n_spatial: usize, n_angular: usize, slope: f64) -> ProjectionAxis {
        let half = (n_angular as f64 - 1.0) / 2.0;
        let taps = (0..n_spatial)
            .map(|o| {
                let xo = centered(o, n_spatial);
                let ang = |x: usize| xo - centered(x, n_spatial) * slope;
                let valid: Vec<usize> = (0..n_spatial).filter(|&x| ang(x).abs() <= half + 1e-9).collect();
                let used: Vec<usize> = if valid.is_empty() {
                    (0..n_spatial).collect()
                } else {
                    valid
                };
                let w = 1.0 / used.len() as f64;
                used.into_iter()
                    .map(|x| (x, Taps::new(uncentered(ang(x), n_angular), n_angular), w))
                    .collect()
            })
            .collect();
        ProjectionAxis { taps }
    }
}

/// Focuses the light field on the plane at depth `slope`.
///
/// Output pixel `(Y, X)` is the mean of `l(x, y, X - x*slope, Y - y*slope)`
/// over rays inside the aperture, which is the integral projection along the
/// same shear family the out-of-plane blur applies. A plane generated at
/// depth `z` (see [`crate::synth::plane_lightfield`]) comes back as its
/// texture when `slope == z`; the output is indexed in texture coordinates.
pub fn refocus(lf: &LightField, slope: f64) -> Result<Image> {
    if !slope.is_finite() || slope.abs() > MAX_REFOCUS_SLOPE {
        return Err(LfError::InvalidArgument(format!(
            "refocus slope {slope} outside [-{MAX_REFOCUS_SLOPE}, {MAX_REFOCUS_SLOPE}]"
        )));
    }
    let d = lf.dims();
    let py = ProjectionAxis::new(d.ny, d.nv, slope);
    let px = ProjectionAxis::new(d.nx, d.nu, slope);
    let row_len = d.nu * d.nc;
    let mut out = vec![0f32; d.ny * d.nx * d.nc];
    out.par_chunks_mut(d.nx * d.nc).enumerate().for_each(|(yo, orow)| {
        // Contract over (y, v) first: t1[x][u][c].
        let mut t1 = vec![0f64; d.nx * row_len];
        for &(y, tv, wy) in &py.taps[yo] {
            for x in 0..d.nx {
                let dst = &mut t1[x * row_len..(x + 1) * row_len];
                let base0 = d.index(y, x, tv.i0, 0, 0);
                let base1 = d.index(y, x, tv.i1, 0, 0);
                let a0 = wy * tv.w0;
                let a1 = wy * tv.w1;
                for (k, acc) in dst.iter_mut().enumerate() {
                    *acc += a0 * lf.data[base0 + k] as f64 + a1 * lf.data[base1 + k] as f64;
                }
            }
        }
        for xo in 0..d.nx {
            for c in 0..d.nc {
                let mut s = 0.0;
                for &(x, tu, wx) in &px.taps[xo] {
                    let r = &t1[x * row_len..];
                    s += wx * (tu.w0 * r[tu.i0 * d.nc + c] + tu.w1 * r[tu.i1 * d.nc + c]);
                }
                orow[xo * d.nc + c] = s as f32;
            }
        }
    });
    Ok(Image::new(d.ny, d.nx, d.nc, out).expect("shape is consistent"))
}
