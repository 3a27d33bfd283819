//! PNG import/export of images and sub-aperture grids.
//!
//! Values map linearly between `[0, 1]` and the full integer range of the
//! file's bit depth. Exports are always 16-bit after clamping to `[0, 1]`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use png::{BitDepth, ColorType, Transformations};

use crate::error::{LfError, Result};
use crate::lightfield::{subaperture, Dims, Image, LightField};

fn format_err(path: &Path, e: impl std::fmt::Display) -> LfError {
    LfError::Format(format!("{}: {e}", path.display()))
}

/// Inverse sRGB transfer function.
pub fn srgb_to_linear(c: f32) -> f32 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Reads an 8- or 16-bit PNG. Alpha is dropped, palettes are expanded.
pub fn read_image(path: &Path, srgb: bool) -> Result<Image> {
    let file = File::open(path).map_err(|e| format_err(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| format_err(path, e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| format_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(|e| format_err(path, e))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let (src_channels, out_channels) = match info.color_type {
        ColorType::Grayscale => (1, 1),
        ColorType::GrayscaleAlpha => (2, 1),
        ColorType::Rgb => (3, 3),
        ColorType::Rgba => (4, 3),
        ColorType::Indexed => return Err(format_err(path, "unexpanded palette")),
    };
    let values: Vec<f32> = match info.bit_depth {
        BitDepth::Sixteen => buf[..info.line_size * h]
            .chunks_exact(info.line_size)
            .flat_map(|row| row[..w * src_channels * 2].chunks_exact(2))
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0)
            .collect(),
        BitDepth::Eight => buf[..info.line_size * h]
            .chunks_exact(info.line_size)
            .flat_map(|row| row[..w * src_channels].iter())
            .map(|&b| b as f32 / 255.0)
            .collect(),
        other => return Err(format_err(path, format!("unsupported bit depth {other:?}"))),
    };
    let mut data = Vec::with_capacity(w * h * out_channels);
    for px in values.chunks_exact(src_channels) {
        for &v in &px[..out_channels] {
            data.push(if srgb { srgb_to_linear(v) } else { v });
        }
    }
    Image::new(h, w, out_channels, data)
}

/// Reads a PNG as a single linear channel (RGB is averaged after decoding
/// sRGB when `srgb` is set).
pub fn read_gray(path: &Path, srgb: bool) -> Result<Image> {
    let img = read_image(path, srgb)?;
    if img.channels == 1 {
        return Ok(img);
    }
    Image::from_fn(img.height, img.width, 1, |r, c, _| {
        (img.get(r, c, 0) + img.get(r, c, 1) + img.get(r, c, 2)) / 3.0
    })
}

fn encode16(img: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.data.len() * 2);
    for &v in &img.data {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Writes a 16-bit grayscale or RGB PNG, clamping samples to `[0, 1]`.
pub fn write_image(img: &Image, path: &Path) -> Result<()> {
    let color = match img.channels {
        1 => ColorType::Grayscale,
        3 => ColorType::Rgb,
        n => return Err(LfError::InvalidArgument(format!("cannot write {n}-channel PNG"))),
    };
    let bytes = encode16(img);
    super::write_atomic(path, |w| {
        let mut enc = png::Encoder::new(w, img.width as u32, img.height as u32);
        enc.set_color(color);
        enc.set_depth(BitDepth::Sixteen);
        let mut writer = enc.write_header().map_err(|e| format_err(path, e))?;
        writer.write_image_data(&bytes).map_err(|e| format_err(path, e))?;
        writer.finish().map_err(|e| format_err(path, e))?;
        Ok(())
    })
}

/// File name of sub-aperture view `(u, v)`.
pub fn view_file_name(u: usize, v: usize) -> String {
    format!("view_v{v:02}_u{u:02}.png")
}

/// Writes every sub-aperture view into `dir` as a 16-bit PNG.
pub fn export_png_grid(lf: &LightField, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let d = lf.dims();
    let mut written = Vec::with_capacity(d.nu * d.nv);
    for v in 0..d.nv {
        for u in 0..d.nu {
            let path = dir.join(view_file_name(u, v));
            write_image(&subaperture(lf, u, v)?, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn assemble(views: &[Image], nv: usize, nu: usize) -> Result<LightField> {
    let first = &views[0];
    let dims = Dims::new(first.height, first.width, nv, nu, first.channels)?;
    LightField::from_fn(dims, |y, x, v, u, c| views[v * nu + u].get(y, x, c))
}

fn check_same_shape(a: &Image, b: &Image, what: &str) -> Result<()> {
    if (a.height, a.width, a.channels) != (b.height, b.width, b.channels) {
        return Err(LfError::ShapeMismatch(format!(
            "{what} is {}x{}x{}, expected {}x{}x{}",
            b.height, b.width, b.channels, a.height, a.width, a.channels
        )));
    }
    Ok(())
}

/// Reads `view_vVV_uUU.png` files for a `nv x nu` grid from `dir`.
pub fn import_png_grid(dir: &Path, nu: usize, nv: usize, srgb: bool) -> Result<LightField> {
    if nu == 0 || nv == 0 {
        return Err(LfError::InvalidDims(format!("grid {nv}x{nu}")));
    }
    let mut views = Vec::with_capacity(nu * nv);
    for v in 0..nv {
        for u in 0..nu {
            let path = dir.join(view_file_name(u, v));
            if !path.exists() {
                return Err(LfError::Format(format!(
                    "missing view (u={u}, v={v}): {}",
                    path.display()
                )));
            }
            let img = read_image(&path, srgb)?;
            if let Some(first) = views.first() {
                check_same_shape(first, &img, &path.display().to_string())?;
            }
            views.push(img);
        }
    }
    assemble(&views, nv, nu)
}

/// Splits a single montage image into `nv` rows by `nu` columns of views.
pub fn import_png_montage(path: &Path, nu: usize, nv: usize, srgb: bool) -> Result<LightField> {
    if nu == 0 || nv == 0 {
        return Err(LfError::InvalidDims(format!("grid {nv}x{nu}")));
    }
    let img = read_image(path, srgb)?;
    if img.height % nv != 0 || img.width % nu != 0 {
        return Err(LfError::ShapeMismatch(format!(
            "montage {}x{} is not divisible into {nv}x{nu} views",
            img.height, img.width
        )));
    }
    let (h, w) = (img.height / nv, img.width / nu);
    let mut views = Vec::with_capacity(nu * nv);
    for v in 0..nv {
        for u in 0..nu {
            views.push(img.crop(v * h, (v + 1) * h, u * w, (u + 1) * w)?);
        }
    }
    assemble(&views, nv, nu)
}
