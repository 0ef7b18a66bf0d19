//! Binary PPM (P6, maxval 255) and PNG input.

use std::fs;
use std::io::{BufReader, Cursor, Write};
use std::path::Path;

use super::ImageBuffer;
use crate::error::{Error, Result};

fn format_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Format(msg.into()))
}

/// Parses a P6 file with maxval 255. Comments in the header are skipped.
pub fn read_ppm(bytes: &[u8]) -> Result<ImageBuffer> {
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
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return format_err("truncated PPM header");
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).unwrap_or("").to_string());
    }
    if fields[0] != "P6" {
        return format_err(format!("unsupported magic '{}'", fields[0]));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("bad header field '{s}'")));
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval != 255 {
        return format_err(format!("maxval {maxval} unsupported"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let need = w
        .checked_mul(h)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| Error::Format("image too large".into()))?;
    if bytes.len() < pos + need {
        return format_err(format!("raster has {} of {need} bytes", bytes.len().saturating_sub(pos)));
    }
    ImageBuffer::from_u8(w, h, bytes[pos..pos + need].to_vec()).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_ppm(img: &ImageBuffer, out: &mut impl Write) -> Result<()> {
    let img = img.to_u8();
    write!(out, "P6\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(img.as_u8().expect("8-bit"))?;
    Ok(())
}

/// Decodes an 8-bit or 16-bit PNG into RGB; alpha is dropped and gray is
/// replicated.
pub fn read_png(bytes: &[u8]) -> Result<ImageBuffer> {
    let mut dec = png::Decoder::new(BufReader::new(Cursor::new(bytes)));
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| Error::Format(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Format("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| Error::Format(e.to_string()))?;
    let (w, h) = (info.width as usize, info.height as usize);
    let px = &buf[..info.buffer_size()];
    let stride = info.line_size;
    let ch = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return format_err("indexed PNG not expanded"),
    };
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        let row = &px[y * stride..y * stride + w * ch];
        for p in row.chunks_exact(ch) {
            if ch < 3 {
                data.extend_from_slice(&[p[0]; 3]);
            } else {
                data.extend_from_slice(&p[..3]);
            }
        }
    }
    ImageBuffer::from_u8(w, h, data)
}

/// Reads a `.ppm` or `.png` file, choosing the decoder by extension.
pub fn read_image(path: &Path) -> Result<ImageBuffer> {
    let bytes = fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
        Some(e) if e == "png" => read_png(&bytes),
        _ => read_ppm(&bytes),
    }
}
