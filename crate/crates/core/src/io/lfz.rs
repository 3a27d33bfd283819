//! LFZ container: `"LFZ1"`, five little-endian `u32` dims `(ny, nx, nv, nu,
//! nc)`, two little-endian `f64` pitches `(spatial, angular)`, then the
//! row-major `f32` samples in `(y, x, v, u, c)` order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{LfError, Result};
use crate::lightfield::{Dims, LightField};

pub const MAGIC: &[u8; 4] = b"LFZ1";
pub const HEADER_LEN: usize = 4 + 5 * 4 + 2 * 8;

pub fn write_lfz<W: Write + ?Sized>(lf: &LightField, sink: &mut W) -> Result<()> {
    let d = lf.dims();
    let mut buf = Vec::with_capacity(HEADER_LEN + d.len() * 4);
    buf.extend_from_slice(MAGIC);
    for n in [d.ny, d.nx, d.nv, d.nu, d.nc] {
        let n = u32::try_from(n).map_err(|_| LfError::Format(format!("dimension {n} exceeds u32")))?;
        buf.extend_from_slice(&n.to_le_bytes());
    }
    buf.extend_from_slice(&lf.spatial_pitch().to_le_bytes());
    buf.extend_from_slice(&lf.angular_pitch().to_le_bytes());
    for s in lf.data() {
        buf.extend_from_slice(&s.to_le_bytes());
    }
    sink.write_all(&buf)?;
    Ok(())
}

pub fn read_lfz<R: Read + ?Sized>(source: &mut R) -> Result<LightField> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<LightField> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(LfError::Format("not an LFZ file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(LfError::Format(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    let u = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (ny, nx, nv, nu, nc) = (u(0), u(1), u(2), u(3), u(4));
    if [ny, nx, nv, nu, nc].contains(&0) {
        return Err(LfError::Format(format!(
            "zero dimension in header {ny}x{nx}x{nv}x{nu}x{nc}"
        )));
    }
    let f = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let (spatial_pitch, angular_pitch) = (f(24), f(32));
    let dims = Dims::new(ny, nx, nv, nu, nc).map_err(|e| LfError::Format(e.to_string()))?;
    let want = dims
        .len()
        .checked_mul(4)
        .ok_or_else(|| LfError::Format("payload size overflows".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != want {
        return Err(LfError::Format(format!(
            "payload size mismatch: header needs {want} bytes, found {}",
            payload.len()
        )));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let lf = LightField::new(dims, data).map_err(|e| LfError::Format(e.to_string()))?;
    lf.with_pitches(spatial_pitch, angular_pitch)
        .map_err(|e| LfError::Format(e.to_string()))
}

pub fn save(lf: &LightField, path: &Path) -> Result<()> {
    super::write_atomic(path, |w| write_lfz(lf, w))
}

pub fn load(path: &Path) -> Result<LightField> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}
