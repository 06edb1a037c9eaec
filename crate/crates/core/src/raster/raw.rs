//! The toolkit's raw tensor file: `RSRAS1\n`, `u32 c, h, w`, `u8 mask_flag`,
//! `c·h·w` little-endian `f32`, then `h·w` mask bytes when the flag is set.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{RasterError, RasterImage};

pub const RAW_MAGIC: &[u8; 7] = b"RSRAS1\n";
const HEADER_LEN: usize = RAW_MAGIC.len() + 12 + 1;

pub fn save_raster(image: &RasterImage, path: &Path) -> Result<(), RasterError> {
    let io = |source| RasterError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(RAW_MAGIC);
    for dim in [image.channels(), image.height(), image.width()] {
        header.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    header.push(u8::from(image.nodata_mask().is_some()));
    out.write_all(&header).map_err(io)?;

    let mut payload = Vec::with_capacity(image.data().len() * 4);
    for v in image.data() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&payload).map_err(io)?;
    if let Some(mask) = image.nodata_mask() {
        let bytes: Vec<u8> = mask.iter().map(|&m| u8::from(m)).collect();
        out.write_all(&bytes).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub(super) fn decode_raw(bytes: &[u8], path: &Path) -> Result<RasterImage, RasterError> {
    let corrupt = |reason: &str| RasterError::CorruptFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN || &bytes[..RAW_MAGIC.len()] != RAW_MAGIC {
        return Err(corrupt("missing RSRAS1 header"));
    }
    let dim = |i: usize| {
        let at = RAW_MAGIC.len() + 4 * i;
        u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
    };
    let (c, h, w) = (dim(0), dim(1), dim(2));
    if c == 0 {
        return Err(RasterError::BandCountZero);
    }
    let mask_flag = bytes[HEADER_LEN - 1];
    if mask_flag > 1 {
        return Err(corrupt("mask flag must be 0 or 1"));
    }
    let n = c
        .checked_mul(h)
        .and_then(|v| v.checked_mul(w))
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    let mask_len = if mask_flag == 1 { h * w } else { 0 };
    let expected = HEADER_LEN + n * 4 + mask_len;
    if bytes.len() != expected {
        return Err(corrupt(&format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let payload = &bytes[HEADER_LEN..HEADER_LEN + n * 4];
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let mask = if mask_flag == 1 {
        let raw = &bytes[HEADER_LEN + n * 4..];
        if raw.iter().any(|&b| b > 1) {
            return Err(corrupt("mask bytes must be 0 or 1"));
        }
        Some(raw.iter().map(|&b| b == 1).collect())
    } else {
        None
    };
    RasterImage::with_mask(c, h, w, data, mask)
}
