//! Uniform variable-resolution quantization of channel planes, the
//! baseline LSB-truncation quantizer, and BPP accounting.
//!
//! The quantizer law is floor-indexing with midpoint reconstruction: a
//! value is clipped to its channel's declared range, mapped affinely to
//! [0, 1), and `code = min(floor(u · 2^N), 2^N − 1)`; reconstruction
//! returns the cell midpoint. The error is at most half a cell for every
//! in-range value, which the tests assert directly.

use crate::config::MAX_BITS;
use crate::error::{Error, Result};
use crate::image::ImagePlane;

/// Declared analog range of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    /// [0, 1] — the DC channel (segment mean of unit-range pixels).
    Unipolar,
    /// [−1, 1] — AC channels after gain; out-of-range values saturate
    /// like an ADC at full scale.
    Bipolar,
}

impl Range {
    pub fn lo(self) -> f64 {
        match self {
            Range::Unipolar => 0.0,
            Range::Bipolar => -1.0,
        }
    }

    pub fn hi(self) -> f64 {
        1.0
    }

    pub fn width(self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn halfwidth(self) -> f64 {
        self.width() / 2.0
    }

    /// Reconstruction value for an eliminated channel.
    pub fn zero(self) -> f64 {
        0.0
    }
}

/// Declared range of HT channel `j`: channel 0 is unipolar, the rest are
/// bipolar.
pub fn channel_range(j: usize) -> Range {
    if j == 0 { Range::Unipolar } else { Range::Bipolar }
}

fn check_bits(bits: u32) -> Result<()> {
    if bits > MAX_BITS {
        return Err(Error::BitsOutOfRange(bits));
    }
    Ok(())
}

/// Quantize one value that has already been clipped and normalized to u ∈ [0, 1].
#[inline]
fn code_of_unit(u: f64, bits: u32) -> u32 {
    let levels = 1u64 << bits;
    let idx = (u * levels as f64).floor() as u64;
    idx.min(levels - 1) as u32
}

/// Quantize a slice of analog values to `bits`-wide codes over `range`.
/// `bits == 0` marks an eliminated channel and yields no codes.
pub fn quantize_channel(values: &[f64], bits: u32, range: Range) -> Result<Vec<u32>> {
    check_bits(bits)?;
    if bits == 0 {
        return Ok(Vec::new());
    }
    let lo = range.lo();
    let w = range.width();
    Ok(values
        .iter()
        .map(|&v| {
            let clipped = v.clamp(lo, range.hi());
            code_of_unit((clipped - lo) / w, bits)
        })
        .collect())
}

/// Reconstruct analog values at cell midpoints. Codes must fit in `bits`.
pub fn dequantize_channel(codes: &[u32], bits: u32, range: Range) -> Result<Vec<f64>> {
    check_bits(bits)?;
    if bits == 0 {
        return Ok(Vec::new());
    }
    let levels = 1u64 << bits;
    if let Some(&code) = codes.iter().find(|&&c| u64::from(c) >= levels) {
        return Err(Error::CodeOverflow { code, bits });
    }
    let lo = range.lo();
    let w = range.width();
    Ok(codes
        .iter()
        .map(|&c| lo + w * ((f64::from(c) + 0.5) / levels as f64))
        .collect())
}

/// Quantize raw pixels to N bits over [0, 1] with no transform — the
/// comparison baseline. Equals keeping the top N bits of an 8-bit pixel,
/// reconstructed at the cell midpoint.
pub fn baseline_quantize(img: &ImagePlane, bits: u32) -> Result<ImagePlane> {
    if bits == 0 || bits > 8 {
        return Err(Error::BitsOutOfRange(bits));
    }
    let levels = (1u64 << bits) as f64;
    let data = img
        .data()
        .iter()
        .map(|&v| {
            let code = code_of_unit(v.clamp(0.0, 1.0), bits);
            (f64::from(code) + 0.5) / levels
        })
        .collect();
    Ok(ImagePlane::new(img.width(), img.height(), data).expect("same dimensions"))
}

/// Average bits per pixel: the arithmetic mean of the per-channel widths.
pub fn bpp(bits: &[u32]) -> f64 {
    assert!(!bits.is_empty());
    bits.iter().map(|&b| f64::from(b)).sum::<f64>() / bits.len() as f64
}
