//! Minimal PGM (P2 / P5) reading and writing, plus the CSV and metadata
//! exports of rendered images. All writers are byte-deterministic.

use std::io::Write;

use crate::error::{Error, Result};
use crate::imaging::ScalarImage;
use crate::mask::{PhaseMask, RasterMask};

/// An 8-bit grayscale image as stored in a PGM file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major, row 0 first (top row).
    pub pixels: Vec<u8>,
}

/// Parses a P2 (ASCII) or P5 (binary) PGM with maxval <= 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let mut cursor = 0usize;
    let magic = read_token(bytes, &mut cursor)
        .ok_or_else(|| Error::Format("PGM data is empty".to_string()))?;
    let binary = match magic.as_slice() {
        b"P2" => false,
        b"P5" => true,
        other => {
            return Err(Error::Format(format!(
                "bad PGM magic {:?}; expected P2 or P5",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = read_number(bytes, &mut cursor, "width")?;
    let height = read_number(bytes, &mut cursor, "height")?;
    let maxval = read_number(bytes, &mut cursor, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("bad PGM dimensions {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("PGM maxval {maxval} outside 1..=255")));
    }
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the data
        cursor += 1;
        if bytes.len() < cursor + count {
            return Err(Error::Format(format!(
                "P5 data truncated: need {count} bytes, have {}",
                bytes.len().saturating_sub(cursor)
            )));
        }
        pixels.extend_from_slice(&bytes[cursor..cursor + count]);
    } else {
        for _ in 0..count {
            let v = read_number(bytes, &mut cursor, "pixel")?;
            if v > maxval {
                return Err(Error::Format(format!("pixel value {v} exceeds maxval {maxval}")));
            }
            pixels.push(v as u8);
        }
    }
    if pixels.iter().any(|&p| p as usize > maxval) {
        return Err(Error::Format("pixel value exceeds maxval".to_string()));
    }
    Ok(PgmImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

fn read_token(bytes: &[u8], cursor: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    Some(bytes[start..*cursor].to_vec())
}

fn read_number(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize> {
    let token = read_token(bytes, cursor)
        .ok_or_else(|| Error::Format(format!("PGM ended before {what}")))?;
    std::str::from_utf8(&token)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| {
            Error::Format(format!(
                "bad PGM {what} token {:?}",
                String::from_utf8_lossy(&token)
            ))
        })
}

/// Encodes an ASCII P2 document with maxval 255.
pub fn encode_pgm_p2(width: usize, height: usize, pixels: &[u8]) -> String {
    let mut out = String::with_capacity(pixels.len() * 4 + 32);
    out.push_str("P2\n");
    out.push_str(&format!("{width} {height}\n255\n"));
    for row in pixels.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Encodes a binary P5 document with maxval 255.
pub fn encode_pgm_p5(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(pixels.len() + 32);
    out.extend_from_slice(format!("P5\n{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(pixels);
    out
}

/// Builds a raster phase mask from a PGM, mapping gray value v to
/// phase phi_max * v / 255.
pub fn mask_from_pgm(
    img: &PgmImage,
    phi_max: f64,
    pitch: f64,
    center: (f64, f64),
) -> Result<PhaseMask> {
    if !phi_max.is_finite() {
        return Err(Error::domain("phi_max must be finite".to_string()));
    }
    let phases: Vec<f64> = img
        .pixels
        .iter()
        .map(|&v| phi_max * v as f64 / 255.0)
        .collect();
    Ok(PhaseMask::Raster(RasterMask::new(
        img.width, img.height, phases, pitch, center,
    )?))
}

/// Quantizes a raster mask back to 8-bit gray values; exact for rasters
/// that came from 8-bit data under the same phi_max.
pub fn mask_to_pgm_p2(raster: &RasterMask, phi_max: f64) -> Result<String> {
    if !(phi_max != 0.0) || !phi_max.is_finite() {
        return Err(Error::domain("phi_max must be finite and non-zero".to_string()));
    }
    let pixels: Vec<u8> = raster
        .phases()
        .iter()
        .map(|&p| (p / phi_max * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    Ok(encode_pgm_p2(raster.width(), raster.height(), pixels.as_slice()))
}

/// CSV export: row-major, '\n' rows, ',' separator, 9 significant digits,
/// invalid pixels as the literal token `invalid`.
pub fn image_to_csv(image: &ScalarImage) -> String {
    let mut out = String::new();
    for iy in 0..image.grid.n_y {
        for ix in 0..image.grid.n_x {
            if ix > 0 {
                out.push(',');
            }
            if image.is_valid(ix, iy) {
                out.push_str(&format!("{:.8e}", image.value(ix, iy)));
            } else {
                out.push_str("invalid");
            }
        }
        out.push('\n');
    }
    out
}

/// PGM export with linear min-max scaling over the valid pixels; invalid
/// pixels map to gray 0. Returns the document and the (scale_min,
/// scale_max) actually used, which belong in the metadata sidecar.
pub fn image_to_pgm_p2(image: &ScalarImage) -> (String, f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&v, &ok) in image.values.iter().zip(&image.valid) {
        if ok {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let span = hi - lo;
    let pixels: Vec<u8> = image
        .values
        .iter()
        .zip(&image.valid)
        .map(|(&v, &ok)| {
            if !ok || span <= 0.0 {
                0
            } else {
                (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8
            }
        })
        .collect();
    (
        encode_pgm_p2(image.grid.n_x, image.grid.n_y, &pixels),
        lo,
        hi,
    )
}

/// The metadata sidecar: key=value lines in fixed order.
pub fn image_metadata(image: &ScalarImage, scale: (f64, f64)) -> String {
    let m = &image.meta;
    format!(
        "state={}\nm={}\nmask={}\nwindow={:.8e}\nfloor={:.8e}\nscale_min={:.8e}\nscale_max={:.8e}\nI1_re={:.8e}\nI1_im={:.8e}\nI2_re={:.8e}\nI2_im={:.8e}\n",
        m.state, m.m, m.mask, m.window, m.floor, scale.0, scale.1, m.i1.re, m.i1.im, m.i2.re, m.i2.im
    )
}

/// Writes the CSV, PGM, and metadata sidecar of an image under `dir`
/// with the given stem. Returns the paths written.
pub fn write_image_set(
    dir: &std::path::Path,
    stem: &str,
    image: &ScalarImage,
    csv: bool,
    pgm: bool,
) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    if csv {
        let path = dir.join(format!("{stem}.csv"));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(image_to_csv(image).as_bytes())?;
        written.push(path);
    }
    let (doc, lo, hi) = image_to_pgm_p2(image);
    if pgm {
        let path = dir.join(format!("{stem}.pgm"));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(doc.as_bytes())?;
        written.push(path);
    }
    let meta_path = dir.join(format!("{stem}.meta.txt"));
    let mut f = std::fs::File::create(&meta_path)?;
    f.write_all(image_metadata(image, (lo, hi)).as_bytes())?;
    written.push(meta_path);
    Ok(written)
}
