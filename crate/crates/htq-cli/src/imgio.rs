//! Image file I/O: binary PGM (P5) and PPM (P6) handled natively, PNG via
//! the `png` crate. Everything is converted to normalized planes on load;
//! 8-bit samples only.

use crate::CliError;
use htq::ImagePlane;
use std::fs;
use std::path::Path;

pub struct LoadedImage {
    /// One plane (gray) or three (RGB).
    pub planes: Vec<ImagePlane>,
}

impl LoadedImage {
    /// Single luminance plane: the gray plane itself, or the BT.601 mix
    /// of RGB.
    pub fn luma(&self) -> ImagePlane {
        if self.planes.len() == 1 {
            return self.planes[0].clone();
        }
        let (r, g, b) = (&self.planes[0], &self.planes[1], &self.planes[2]);
        ImagePlane::from_fn(r.width(), r.height(), |x, y| {
            0.299 * r.get(x, y) + 0.587 * g.get(x, y) + 0.114 * b.get(x, y)
        })
    }
}

fn format_err(msg: impl Into<String>) -> CliError {
    CliError::Format(msg.into())
}

pub fn load(path: &Path) -> Result<LoadedImage, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match bytes.first_chunk::<2>() {
        Some(b"P5") => parse_pnm(&bytes, 1),
        Some(b"P6") => parse_pnm(&bytes, 3),
        Some([0x89, b'P']) => parse_png(&bytes),
        _ => Err(format_err(format!(
            "{}: unsupported image format (need binary PGM/PPM or PNG)",
            path.display()
        ))),
    }
}

/// Binary PNM: magic, whitespace/comment-separated width/height/maxval,
/// one whitespace byte, then samples.
fn parse_pnm(bytes: &[u8], channels: usize) -> Result<LoadedImage, CliError> {
    let mut pos = 2usize;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while !matches!(bytes.get(pos), Some(b'\n') | None) {
                        pos += 1;
                    }
                }
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while matches!(bytes.get(pos), Some(c) if c.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(format_err("malformed PNM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| format_err("malformed PNM header"))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format_err(format!("PNM maxval {maxval} unsupported (need 255)")));
    }
    if !matches!(bytes.get(pos), Some(c) if c.is_ascii_whitespace()) {
        return Err(format_err("malformed PNM header"));
    }
    pos += 1;
    let expected = width * height * channels;
    let data = bytes
        .get(pos..pos + expected)
        .ok_or_else(|| format_err("PNM pixel data truncated"))?;

    let planes = split_interleaved(data, width, height, channels)?;
    Ok(LoadedImage { planes })
}

fn parse_png(bytes: &[u8]) -> Result<LoadedImage, CliError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| format_err(format!("PNG: {e}")))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| format_err(format!("PNG: {e}")))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(format_err("PNG bit depth unsupported (need 8)"));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let (samples, keep): (usize, usize) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => {
            return Err(format_err("indexed PNG unsupported"));
        }
    };
    let mut planes = Vec::with_capacity(keep);
    for c in 0..keep {
        let chan: Vec<u8> = data.chunks_exact(samples).map(|px| px[c]).collect();
        planes.push(
            ImagePlane::from_bytes(width, height, &chan)
                .map_err(|e| format_err(e.to_string()))?,
        );
    }
    Ok(LoadedImage { planes })
}

fn split_interleaved(
    data: &[u8],
    width: usize,
    height: usize,
    channels: usize,
) -> Result<Vec<ImagePlane>, CliError> {
    let mut planes = Vec::with_capacity(channels);
    for c in 0..channels {
        let chan: Vec<u8> = data.chunks_exact(channels).map(|px| px[c]).collect();
        planes.push(
            ImagePlane::from_bytes(width, height, &chan)
                .map_err(|e| format_err(e.to_string()))?,
        );
    }
    Ok(planes)
}

/// Save planes to PGM, PPM, or PNG based on the extension.
pub fn save(path: &Path, planes: &[ImagePlane]) -> Result<(), CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match (ext.as_str(), planes.len()) {
        ("pgm", 1) => save_pnm(path, planes, b"P5"),
        ("ppm", 3) => save_pnm(path, planes, b"P6"),
        ("png", 1 | 3) => save_png(path, planes),
        ("pgm" | "ppm", n) => Err(format_err(format!(
            "{}: {n}-plane image does not fit this format",
            path.display()
        ))),
        _ => Err(format_err(format!(
            "{}: unsupported output extension (use .pgm, .ppm, or .png)",
            path.display()
        ))),
    }
}

fn interleave(planes: &[ImagePlane]) -> Vec<u8> {
    let per_plane: Vec<Vec<u8>> = planes.iter().map(|p| p.to_bytes()).collect();
    let n = planes[0].data().len();
    let mut out = Vec::with_capacity(n * planes.len());
    for i in 0..n {
        for plane in &per_plane {
            out.push(plane[i]);
        }
    }
    out
}

fn save_pnm(path: &Path, planes: &[ImagePlane], magic: &[u8; 2]) -> Result<(), CliError> {
    let mut out = Vec::new();
    out.extend_from_slice(magic);
    out.extend_from_slice(
        format!("\n{} {}\n255\n", planes[0].width(), planes[0].height()).as_bytes(),
    );
    out.extend_from_slice(&interleave(planes));
    fs::write(path, out).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn save_png(path: &Path, planes: &[ImagePlane]) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut encoder = png::Encoder::new(
        std::io::BufWriter::new(file),
        planes[0].width() as u32,
        planes[0].height() as u32,
    );
    encoder.set_color(if planes.len() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| format_err(format!("PNG: {e}")))?;
    writer
        .write_image_data(&interleave(planes))
        .map_err(|e| format_err(format!("PNG: {e}")))?;
    Ok(())
}
