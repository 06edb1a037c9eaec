//! A minimal little-endian TIFF writer for uint16 fixtures. It covers
//! strips and tiles, chunky and planar layouts, deflate, the horizontal
//! predictor and the GDAL nodata tag.

use std::io::Write;
use std::path::Path;

use flate2::write::ZlibEncoder;
use flate2::Compression;

#[derive(Clone, Copy)]
pub enum Chunking {
    Strips { rows: usize },
    Tiles { width: usize, height: usize },
}

#[derive(Clone, Copy)]
pub struct Layout {
    pub chunking: Chunking,
    pub planar: bool,
    pub deflate: bool,
    pub predictor: bool,
}

const SHORT: u16 = 3;
const LONG: u16 = 4;
const ASCII: u16 = 2;

struct Entry {
    tag: u16,
    kind: u16,
    count: u32,
    bytes: Vec<u8>,
}

fn shorts(tag: u16, values: &[u16]) -> Entry {
    Entry {
        tag,
        kind: SHORT,
        count: values.len() as u32,
        bytes: values.iter().flat_map(|v| v.to_le_bytes()).collect(),
    }
}

fn longs(tag: u16, values: &[u32]) -> Entry {
    Entry {
        tag,
        kind: LONG,
        count: values.len() as u32,
        bytes: values.iter().flat_map(|v| v.to_le_bytes()).collect(),
    }
}

fn ascii(tag: u16, text: &str) -> Entry {
    let mut bytes = text.as_bytes().to_vec();
    bytes.push(0);
    Entry {
        tag,
        kind: ASCII,
        count: bytes.len() as u32,
        bytes,
    }
}

/// Samples of one chunk, row-major, `spp` interleaved samples per pixel.
/// Tiles extending past the image are zero padded.
fn chunk_samples(
    value: &dyn Fn(usize, usize, usize) -> u16,
    bands: &[usize],
    (y0, x0): (usize, usize),
    (ch, cw): (usize, usize),
    (h, w): (usize, usize),
) -> Vec<u16> {
    let mut out = Vec::with_capacity(ch * cw * bands.len());
    for y in y0..y0 + ch {
        for x in x0..x0 + cw {
            for &b in bands {
                out.push(if y < h && x < w { value(b, y, x) } else { 0 });
            }
        }
    }
    out
}

fn encode_chunk(mut samples: Vec<u16>, row_len: usize, spp: usize, layout: Layout) -> Vec<u8> {
    if layout.predictor {
        for row in samples.chunks_mut(row_len * spp) {
            for i in (spp..row.len()).rev() {
                row[i] = row[i].wrapping_sub(row[i - spp]);
            }
        }
    }
    let raw: Vec<u8> = samples.iter().flat_map(|v| v.to_le_bytes()).collect();
    if layout.deflate {
        let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&raw).unwrap();
        enc.finish().unwrap()
    } else {
        raw
    }
}

pub fn write_tiff(
    path: &Path,
    channels: usize,
    (h, w): (usize, usize),
    value: &dyn Fn(usize, usize, usize) -> u16,
    layout: Layout,
    nodata: Option<&str>,
) {
    let planes: Vec<Vec<usize>> = if layout.planar {
        (0..channels).map(|b| vec![b]).collect()
    } else {
        vec![(0..channels).collect()]
    };
    let (ch, cw, tiled) = match layout.chunking {
        Chunking::Strips { rows } => (rows, w, false),
        Chunking::Tiles { width, height } => (height, width, true),
    };
    let mut chunks = Vec::new();
    for bands in &planes {
        for y0 in (0..h).step_by(ch) {
            for x0 in (0..w).step_by(cw) {
                // Strips are cut at the image bottom; tiles stay full size.
                let rows = if tiled { ch } else { ch.min(h - y0) };
                let samples = chunk_samples(value, bands, (y0, x0), (rows, cw), (h, w));
                chunks.push(encode_chunk(samples, cw, bands.len(), layout));
            }
        }
    }

    let mut file = vec![b'I', b'I', 42, 0, 0, 0, 0, 0];
    let mut offsets = Vec::new();
    for c in &chunks {
        offsets.push(file.len() as u32);
        file.extend_from_slice(c);
    }
    let counts: Vec<u32> = chunks.iter().map(|c| c.len() as u32).collect();

    let spp = channels as u16;
    let mut entries = vec![
        longs(256, &[w as u32]),
        longs(257, &[h as u32]),
        shorts(258, &vec![16; channels]),
        shorts(259, &[if layout.deflate { 8 } else { 1 }]),
        shorts(262, &[1]),
        shorts(277, &[spp]),
        shorts(284, &[if layout.planar { 2 } else { 1 }]),
        shorts(339, &vec![1; channels]),
    ];
    if layout.predictor {
        entries.push(shorts(317, &[2]));
    }
    if tiled {
        entries.push(longs(322, &[cw as u32]));
        entries.push(longs(323, &[ch as u32]));
        entries.push(longs(324, &offsets));
        entries.push(longs(325, &counts));
    } else {
        entries.push(longs(273, &offsets));
        entries.push(longs(278, &[ch as u32]));
        entries.push(longs(279, &counts));
    }
    if channels > 1 {
        entries.push(shorts(338, &vec![0; channels - 1]));
    }
    if let Some(nd) = nodata {
        entries.push(ascii(42113, nd));
    }
    entries.sort_by_key(|e| e.tag);

    // Out-of-line values go after the IFD.
    if file.len() % 2 == 1 {
        file.push(0);
    }
    let ifd = file.len();
    file[4..8].copy_from_slice(&(ifd as u32).to_le_bytes());
    let mut extra_at = ifd + 2 + 12 * entries.len() + 4;
    let mut extra = Vec::new();
    file.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    for e in &entries {
        file.extend_from_slice(&e.tag.to_le_bytes());
        file.extend_from_slice(&e.kind.to_le_bytes());
        file.extend_from_slice(&e.count.to_le_bytes());
        if e.bytes.len() <= 4 {
            let mut inline = e.bytes.clone();
            inline.resize(4, 0);
            file.extend_from_slice(&inline);
        } else {
            file.extend_from_slice(&(extra_at as u32).to_le_bytes());
            extra.extend_from_slice(&e.bytes);
            if e.bytes.len() % 2 == 1 {
                extra.push(0);
            }
            extra_at = ifd + 2 + 12 * entries.len() + 4 + extra.len();
        }
    }
    file.extend_from_slice(&0u32.to_le_bytes());
    file.extend_from_slice(&extra);
    std::fs::write(path, file).unwrap();
}

