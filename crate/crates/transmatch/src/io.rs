//! Grayscale image files: 8-bit PGM (P5) and PNG.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ColorType, DynamicImage, GrayImage, ImageFormat, ImageReader};
use transmatch_core::Image;

#[derive(Debug, thiserror::Error)]
pub enum ImageIoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("unsupported format: expected 8-bit grayscale PGM (P5) or PNG")]
    UnsupportedFormat,
    #[error("color images are not supported ({0:?})")]
    Color(ColorType),
    #[error("malformed image")]
    Malformed,
    #[error("image has a zero dimension")]
    ZeroDimension,
}

/// Loads an 8-bit grayscale PGM (P5, maxval at most 255) or PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| ImageIoError::Read { path: path.display().to_string(), source })?;
    decode_image(&bytes)
}

pub fn decode_image(bytes: &[u8]) -> Result<Image, ImageIoError> {
    let format = match bytes {
        [b'P', b'5', ..] => ImageFormat::Pnm,
        [0x89, b'P', b'N', b'G', ..] => ImageFormat::Png,
        _ => return Err(ImageIoError::UnsupportedFormat),
    };
    if format == ImageFormat::Pnm {
        check_pgm_header(bytes)?;
    }
    let reader = ImageReader::with_format(Cursor::new(bytes), format);
    let decoded = reader.decode().map_err(|_| ImageIoError::Malformed)?;
    let gray = match decoded {
        DynamicImage::ImageLuma8(g) => g,
        other => return Err(ImageIoError::Color(other.color())),
    };
    let (w, h) = gray.dimensions();
    if w == 0 || h == 0 {
        return Err(ImageIoError::ZeroDimension);
    }
    let data = gray.into_raw().into_iter().map(f64::from).collect();
    Image::new(w as usize, h as usize, data).map_err(|_| ImageIoError::Malformed)
}

/// Rejects what the PNM decoder would otherwise accept or misreport:
/// 16-bit maxval and zero dimensions.
fn check_pgm_header(bytes: &[u8]) -> Result<(), ImageIoError> {
    let mut fields = Vec::with_capacity(3);
    let mut i = 2;
    while fields.len() < 3 {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(ImageIoError::Malformed);
        }
        let v: u64 = std::str::from_utf8(&bytes[start..i])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(ImageIoError::Malformed)?;
        fields.push(v);
    }
    match fields[..] {
        [w, h, _] if w == 0 || h == 0 => Err(ImageIoError::ZeroDimension),
        [_, _, maxval] if maxval == 0 || maxval > 255 => Err(ImageIoError::UnsupportedFormat),
        _ => Ok(()),
    }
}

fn to_gray8(img: &Image) -> GrayImage {
    let data = img.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect();
    GrayImage::from_raw(img.width() as u32, img.height() as u32, data).expect("buffer matches dimensions")
}

/// Encodes as binary PGM. Values are rounded and clamped to 0..=255.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(to_gray8(img).into_raw());
    out
}

pub fn encode_png(img: &Image) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    to_gray8(img).write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}

/// Saves as PNG when the extension is `png`, PGM otherwise.
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let is_png = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png { encode_png(img) } else { encode_pgm(img) };
    fs::write(path, bytes).map_err(|source| ImageIoError::Write { path: path.display().to_string(), source })
}
