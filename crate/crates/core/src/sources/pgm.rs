//! Binary PGM (P5, maxval 255) images, spin configurations and atom mosaics.

use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{read_bytes, write_file, Error, Result};
use crate::sources::ising::IsingConfig;
use crate::sources::patches::ImageGrid;

pub fn encode_pgm(pixels: ArrayView2<u8>) -> Vec<u8> {
    let (h, w) = pixels.dim();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(pixels.iter());
    out
}

pub fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<Array2<u8>> {
    let bad = |msg: &str| Error::parse(path, 0, msg);
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("bad header"))?);
    }
    if fields[0] != "P5" {
        return Err(bad("not a binary PGM (P5) file"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad PGM header number"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = bytes.get(pos..pos + w * h).ok_or_else(|| bad("truncated PGM raster"))?;
    Ok(Array2::from_shape_vec((h, w), raster.to_vec()).expect("length checked"))
}

pub fn to_bytes(pixels: ArrayView2<f64>) -> Array2<u8> {
    pixels.mapv(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
}

pub fn write_image(path: &Path, image: &ImageGrid) -> Result<()> {
    write_file(path, encode_pgm(to_bytes(image.pixels()).view()))?;
    Ok(())
}

pub fn read_image(path: &Path) -> Result<ImageGrid> {
    let bytes = read_bytes(path)?;
    let raw = decode_pgm(path, &bytes)?;
    ImageGrid::new(raw.mapv(|b| b as f64 / 255.0))
}

/// Spins as PGM with −1 ↦ 0 and +1 ↦ 255.
pub fn write_spins(path: &Path, config: &IsingConfig) -> Result<()> {
    let px = config.to_matrix().mapv(|s| if s > 0.0 { 255u8 } else { 0 });
    write_file(path, encode_pgm(px.view()))?;
    Ok(())
}

pub fn read_spins(path: &Path, temperature: f64) -> Result<IsingConfig> {
    let raw = decode_pgm(path, &read_bytes(path)?)?;
    if raw.nrows() != raw.ncols() {
        return Err(Error::parse(path, 0, "spin lattice must be square"));
    }
    let spins = raw.iter().map(|&b| if b >= 128 { 1 } else { -1 }).collect();
    IsingConfig::from_spins(raw.nrows(), temperature, spins)
}

/// Lays the columns of `w` out as `k×k` tiles, `per_row` tiles per row with a
/// one-pixel white gutter. Each tile is min-max normalized so its largest
/// entry is black (0) and its smallest white (255); constant tiles are black
/// when positive.
pub fn atom_mosaic(w: ArrayView2<f64>, k: usize, per_row: usize) -> Array2<u8> {
    assert_eq!(w.nrows(), k * k, "atoms must be k*k long");
    let r = w.ncols();
    let per_row = per_row.max(1).min(r.max(1));
    let tile_rows = r.div_ceil(per_row);
    let height = tile_rows * (k + 1) + 1;
    let width = per_row * (k + 1) + 1;
    let mut img = Array2::from_elem((height, width), 255u8);
    for j in 0..r {
        let col = w.column(j);
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (tr, tc) = (j / per_row, j % per_row);
        for a in 0..k {
            for b in 0..k {
                let v = col[a * k + b];
                let level = if hi > lo {
                    (v - lo) / (hi - lo)
                } else if hi > 0.0 {
                    1.0
                } else {
                    0.0
                };
                img[[1 + tr * (k + 1) + a, 1 + tc * (k + 1) + b]] = ((1.0 - level) * 255.0).round() as u8;
            }
        }
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pgm_round_trip_with_comment() {
        let px = array![[0u8, 10, 255], [7, 8, 9]];
        let bytes = encode_pgm(px.view());
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(decode_pgm(Path::new("x"), &bytes).unwrap(), px);

        let mut commented = b"P5\n# made by hand\n3 2\n255\n".to_vec();
        commented.extend(px.iter());
        assert_eq!(decode_pgm(Path::new("x"), &commented).unwrap(), px);
    }

    #[test]
    fn rejects_other_formats() {
        assert!(decode_pgm(Path::new("x"), b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(Path::new("x"), b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_pgm(Path::new("x"), b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn mosaic_layout() {
        let w = array![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
        let img = atom_mosaic(w.view(), 2, 2);
        assert_eq!(img.dim(), (4, 7));
        assert_eq!(img[[1, 1]], 0);
        assert_eq!(img[[1, 2]], 255);
        assert_eq!(img[[2, 2]], 0);
        // zero atom renders white
        assert_eq!(img[[1, 4]], 255);
    }
}
