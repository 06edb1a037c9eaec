//! TIFF decoding against fixtures from a minimal writer, so that tiled,
//! planar and predicted layouts are covered.

mod common;

use common::{write_tiff, Chunking, Layout};
use rsbench_core::raster::{load_raster, RasterError, RasterFormat};

fn dn(b: usize, y: usize, x: usize) -> u16 {
    (b * 1000 + y * 37 + x * 3) as u16
}

fn assert_decodes(layout: Layout, channels: usize, hw: (usize, usize)) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tile.tif");
    write_tiff(&path, channels, hw, &dn, layout, None);
    let img = load_raster(&path, None).unwrap();
    assert_eq!((img.channels(), img.height(), img.width()), (channels, hw.0, hw.1));
    assert_eq!(img.source_bit_depth(), Some(16));
    for b in 0..channels {
        for y in 0..hw.0 {
            for x in 0..hw.1 {
                assert_eq!(img.band(b)[y * hw.1 + x], f32::from(dn(b, y, x)), "band {b} at ({y}, {x})");
            }
        }
    }
    assert!(img.nodata_mask().is_none());
}

const STRIPS: Chunking = Chunking::Strips { rows: 3 };
const TILES: Chunking = Chunking::Tiles { width: 16, height: 16 };

#[test]
fn thirteen_band_uint16_strips() {
    let layout = Layout {
        chunking: STRIPS,
        planar: false,
        deflate: false,
        predictor: false,
    };
    assert_decodes(layout, 13, (7, 5));
}

#[test]
fn deflate_strips() {
    let layout = Layout {
        chunking: STRIPS,
        planar: false,
        deflate: true,
        predictor: false,
    };
    assert_decodes(layout, 13, (7, 5));
}

#[test]
fn planar_strips() {
    let layout = Layout {
        chunking: STRIPS,
        planar: true,
        deflate: true,
        predictor: false,
    };
    assert_decodes(layout, 4, (7, 5));
}

#[test]
fn tiles_with_partial_edges() {
    let layout = Layout {
        chunking: TILES,
        planar: false,
        deflate: true,
        predictor: false,
    };
    assert_decodes(layout, 3, (20, 24));
}

#[test]
fn planar_tiles() {
    let layout = Layout {
        chunking: TILES,
        planar: true,
        deflate: false,
        predictor: false,
    };
    assert_decodes(layout, 13, (20, 24));
}

#[test]
fn horizontal_predictor() {
    let layout = Layout {
        chunking: TILES,
        planar: false,
        deflate: true,
        predictor: true,
    };
    assert_decodes(layout, 5, (18, 17));
    let strips = Layout {
        chunking: STRIPS,
        ..layout
    };
    assert_decodes(strips, 1, (9, 11));
}

#[test]
fn gdal_nodata_masks_pixels_where_every_band_matches() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nd.tif");
    // Pixel (0, 0) is nodata in every band; (0, 1) only in band 0.
    let value = |b: usize, y: usize, x: usize| match (y, x) {
        (0, 0) => 0,
        (0, 1) if b == 0 => 0,
        _ => dn(b, y, x) + 1,
    };
    let layout = Layout {
        chunking: STRIPS,
        planar: false,
        deflate: false,
        predictor: false,
    };
    write_tiff(&path, 2, (3, 4), &value, layout, Some("0"));
    let img = load_raster(&path, None).unwrap();
    let mask = img.nodata_mask().expect("mask");
    assert!(mask[0]);
    assert!(!mask[1]);
    assert_eq!(mask.iter().filter(|&&m| m).count(), 1);
}

#[test]
fn format_is_sniffed_not_taken_from_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mislabeled.png");
    let layout = Layout {
        chunking: STRIPS,
        planar: false,
        deflate: false,
        predictor: false,
    };
    write_tiff(&path, 2, (4, 4), &dn, layout, None);
    assert_eq!(load_raster(&path, None).unwrap().channels(), 2);
    assert!(load_raster(&path, Some(RasterFormat::Png)).is_err());
}

#[test]
fn truncated_tiff_is_reported_as_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.tif");
    let layout = Layout {
        chunking: STRIPS,
        planar: false,
        deflate: true,
        predictor: false,
    };
    write_tiff(&path, 3, (8, 8), &dn, layout, None);
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    match load_raster(&path, None) {
        Err(RasterError::CorruptFile { .. }) => {}
        other => panic!("expected CorruptFile, got {other:?}"),
    }
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    match load_raster(&dir.path().join("absent.tif"), None) {
        Err(RasterError::Io { .. }) => {}
        other => panic!("expected Io, got {other:?}"),
    }
}
