use std::io::Cursor;
use std::path::Path;

use image::DynamicImage;
use tiff::decoder::{Decoder, DecodingResult, Limits};
use tiff::tags::Tag;

use super::raw::{decode_raw, RAW_MAGIC};
use super::{RasterError, RasterImage};

/// Container formats understood by [`load_raster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    Raw,
    Tiff,
    Png,
    Jpeg,
}

impl RasterFormat {
    fn sniff(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(RAW_MAGIC) {
            Some(Self::Raw)
        } else if bytes.starts_with(b"II*\0")
            || bytes.starts_with(b"MM\0*")
            || bytes.starts_with(b"II+\0")
            || bytes.starts_with(b"MM\0+")
        {
            Some(Self::Tiff)
        } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
            Some(Self::Png)
        } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
            Some(Self::Jpeg)
        } else {
            None
        }
    }

    pub fn from_extension(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "rsr" | "rsras" => Some(Self::Raw),
            "tif" | "tiff" => Some(Self::Tiff),
            "png" => Some(Self::Png),
            "jpg" | "jpeg" => Some(Self::Jpeg),
            _ => None,
        }
    }
}

impl std::str::FromStr for RasterFormat {
    type Err = RasterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw" | "rsras1" => Ok(Self::Raw),
            "tif" | "tiff" | "geotiff" => Ok(Self::Tiff),
            "png" => Ok(Self::Png),
            "jpg" | "jpeg" => Ok(Self::Jpeg),
            other => Err(RasterError::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Decodes a raster file into raw digital numbers cast to `f32`.
///
/// The format is taken from `hint` when given, otherwise sniffed from the
/// file's magic bytes.
pub fn load_raster(path: &Path, hint: Option<RasterFormat>) -> Result<RasterImage, RasterError> {
    let bytes = std::fs::read(path).map_err(|source| RasterError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let format = match hint.or_else(|| RasterFormat::sniff(&bytes)) {
        Some(f) => f,
        None => {
            return Err(RasterError::UnsupportedFormat(format!(
                "unrecognized file signature in {}",
                path.display()
            )))
        }
    };
    match format {
        RasterFormat::Raw => decode_raw(&bytes, path),
        RasterFormat::Tiff => decode_tiff(&bytes, path),
        RasterFormat::Png => decode_image(&bytes, image::ImageFormat::Png, path),
        RasterFormat::Jpeg => decode_image(&bytes, image::ImageFormat::Jpeg, path),
    }
}

fn corrupt(path: &Path, reason: impl std::fmt::Display) -> RasterError {
    RasterError::CorruptFile {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn decode_tiff(bytes: &[u8], path: &Path) -> Result<RasterImage, RasterError> {
    let tiff_err = |e: tiff::TiffError| match e {
        tiff::TiffError::UnsupportedError(u) => RasterError::UnsupportedFormat(u.to_string()),
        other => corrupt(path, other),
    };
    let mut decoder = Decoder::new(Cursor::new(bytes))
        .map_err(tiff_err)?
        .with_limits(Limits::unlimited());
    let (width, height) = decoder.dimensions().map_err(tiff_err)?;
    let (width, height) = (width as usize, height as usize);
    let colortype = decoder.colortype().map_err(tiff_err)?;
    let channels = colortype.num_samples() as usize;
    if channels == 0 {
        return Err(RasterError::BandCountZero);
    }
    let nodata = match decoder.find_tag(Tag::GdalNodata).map_err(tiff_err)? {
        Some(value) => value
            .into_string()
            .ok()
            .and_then(|s| s.trim_matches(char::from(0)).trim().parse::<f64>().ok()),
        None => None,
    };

    // Decoded chunk by chunk: the crate's whole-image reader mishandles
    // planar tiled files.
    let planar = decoder
        .find_tag_unsigned::<u16>(Tag::PlanarConfiguration)
        .map_err(tiff_err)?
        == Some(2);
    let samples_per_chunk = if planar { 1 } else { channels };
    let (chunk_w, chunk_h) = decoder.chunk_dimensions();
    let (chunk_w, chunk_h) = (chunk_w as usize, chunk_h as usize);
    if chunk_w == 0 || chunk_h == 0 {
        return Err(corrupt(path, "zero chunk dimensions"));
    }
    let across = width.div_ceil(chunk_w);
    let per_plane = across * height.div_ceil(chunk_h);
    let plane = width * height;
    let mut data = vec![0.0f32; channels * plane];
    let chunk_planes = if planar { channels } else { 1 };
    for p in 0..chunk_planes {
        for j in 0..per_plane {
            let index = (p * per_plane + j) as u32;
            let values = decoding_to_f32(decoder.read_chunk(index).map_err(tiff_err)?);
            let (y0, x0) = ((j / across) * chunk_h, (j % across) * chunk_w);
            let (cw, ch) = (chunk_w.min(width - x0), chunk_h.min(height - y0));
            if values.len() < cw * ch * samples_per_chunk {
                return Err(corrupt(path, format!("chunk {index} decoded short")));
            }
            for (r, row) in values.chunks_exact(cw * samples_per_chunk).take(ch).enumerate() {
                for (c, px) in row.chunks_exact(samples_per_chunk).enumerate() {
                    let at = (y0 + r) * width + x0 + c;
                    for (s, &v) in px.iter().enumerate() {
                        data[(p + s) * plane + at] = v;
                    }
                }
            }
        }
    }

    let mask = nodata_mask(&data, channels, plane, nodata);
    Ok(
        RasterImage::with_mask(channels, height, width, data, mask)?
            .with_source_bit_depth(colortype.bit_depth()),
    )
}

/// A pixel is nodata when every band equals the declared nodata value, or
/// when any band is non-finite.
fn nodata_mask(data: &[f32], channels: usize, plane: usize, nodata: Option<f64>) -> Option<Vec<bool>> {
    let mask: Vec<bool> = (0..plane)
        .map(|px| {
            let mut all_nodata = nodata.is_some();
            let mut non_finite = false;
            for band in 0..channels {
                let v = data[band * plane + px];
                non_finite |= !v.is_finite();
                if let Some(nd) = nodata {
                    all_nodata &= f64::from(v) == nd || (nd.is_nan() && v.is_nan());
                }
            }
            non_finite || all_nodata
        })
        .collect();
    mask.iter().any(|&m| m).then_some(mask)
}

fn decoding_to_f32(result: DecodingResult) -> Vec<f32> {
    match result {
        DecodingResult::U8(v) => v.into_iter().map(f32::from).collect(),
        DecodingResult::U16(v) => v.into_iter().map(f32::from).collect(),
        DecodingResult::U32(v) => v.into_iter().map(|x| x as f32).collect(),
        DecodingResult::U64(v) => v.into_iter().map(|x| x as f32).collect(),
        DecodingResult::I8(v) => v.into_iter().map(f32::from).collect(),
        DecodingResult::I16(v) => v.into_iter().map(f32::from).collect(),
        DecodingResult::I32(v) => v.into_iter().map(|x| x as f32).collect(),
        DecodingResult::I64(v) => v.into_iter().map(|x| x as f32).collect(),
        DecodingResult::F16(v) => v.into_iter().map(f32::from).collect(),
        DecodingResult::F32(v) => v,
        DecodingResult::F64(v) => v.into_iter().map(|x| x as f32).collect(),
    }
}

fn decode_image(
    bytes: &[u8],
    format: image::ImageFormat,
    path: &Path,
) -> Result<RasterImage, RasterError> {
    let img = image::load_from_memory_with_format(bytes, format).map_err(|e| match e {
        image::ImageError::Unsupported(u) => RasterError::UnsupportedFormat(u.to_string()),
        other => corrupt(path, other),
    })?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let channels = img.color().channel_count() as usize;
    let (interleaved, bits): (Vec<f32>, u8) = match img {
        DynamicImage::ImageLuma8(b) => (b.into_raw().into_iter().map(f32::from).collect(), 8),
        DynamicImage::ImageLumaA8(b) => (b.into_raw().into_iter().map(f32::from).collect(), 8),
        DynamicImage::ImageRgb8(b) => (b.into_raw().into_iter().map(f32::from).collect(), 8),
        DynamicImage::ImageRgba8(b) => (b.into_raw().into_iter().map(f32::from).collect(), 8),
        DynamicImage::ImageLuma16(b) => (b.into_raw().into_iter().map(f32::from).collect(), 16),
        DynamicImage::ImageLumaA16(b) => (b.into_raw().into_iter().map(f32::from).collect(), 16),
        DynamicImage::ImageRgb16(b) => (b.into_raw().into_iter().map(f32::from).collect(), 16),
        DynamicImage::ImageRgba16(b) => (b.into_raw().into_iter().map(f32::from).collect(), 16),
        DynamicImage::ImageRgb32F(b) => (b.into_raw(), 32),
        DynamicImage::ImageRgba32F(b) => (b.into_raw(), 32),
        other => {
            return Err(RasterError::UnsupportedFormat(format!(
                "pixel layout {:?}",
                other.color()
            )))
        }
    };
    let plane = width * height;
    let mut data = vec![0.0f32; channels * plane];
    for (px, samples) in interleaved.chunks_exact(channels).enumerate() {
        for (band, &v) in samples.iter().enumerate() {
            data[band * plane + px] = v;
        }
    }
    Ok(RasterImage::new(channels, height, width, data)?.with_source_bit_depth(bits))
}
