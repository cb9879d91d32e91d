//! End-to-end encode/decode and the on-disk `.htq` container.
//!
//! Encode: forward row transform → per-channel gain → per-channel uniform
//! quantization → bit packing. Decode runs the reverse and clamps the
//! reconstruction to [0, 1]. The byte-exact container layout is documented
//! in `FORMAT.md` at the repository root.

mod bitio;

use crate::config::{HtConfig, MAX_BITS};
use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::quantize::{
    baseline_quantize, channel_range, dequantize_channel, quantize_channel,
};
use crate::transform::{ChannelPlanes, MAX_ORDER, forward_rows, gains_from_alphas, inverse_rows};
use bitio::{BitReader, BitWriter};

pub const MAGIC: [u8; 4] = *b"HTQ1";
pub const VERSION: u8 = 1;

/// Container header. `width` is the stored (clipped) width and is always a
/// positive multiple of `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub width: u32,
    pub height: u32,
    pub color_channels: u8,
    pub m: u8,
    pub n0: u8,
    pub bits: Vec<u32>,
    pub alphas: Vec<u32>,
}

impl Header {
    pub fn width_segments(&self) -> usize {
        self.width as usize / self.m as usize
    }

    /// Codes per HT channel: one per row segment.
    pub fn codes_per_channel(&self) -> usize {
        self.width_segments() * self.height as usize
    }

    /// Packed payload bytes for one HT channel (byte-aligned per channel).
    pub fn channel_payload_bytes(&self, j: usize) -> usize {
        (self.codes_per_channel() * self.bits[j] as usize).div_ceil(8)
    }

    /// Total serialized size in bytes: fixed fields, the two per-channel
    /// tables, and every color's packed channels.
    pub fn encoded_len(&self) -> usize {
        let per_color: usize = (0..self.m as usize)
            .map(|j| self.channel_payload_bytes(j))
            .sum();
        16 + 2 * self.m as usize + per_color * self.color_channels as usize
    }

    fn validate(&self) -> Result<()> {
        let m = self.m as usize;
        if m == 0 || !m.is_power_of_two() || m > MAX_ORDER {
            return Err(Error::HeaderFieldOutOfRange("m"));
        }
        if self.width == 0 || !(self.width as usize).is_multiple_of(m) {
            return Err(Error::HeaderFieldOutOfRange("width"));
        }
        if self.height == 0 {
            return Err(Error::HeaderFieldOutOfRange("height"));
        }
        if self.color_channels == 0 || self.color_channels > 4 {
            return Err(Error::HeaderFieldOutOfRange("color_channels"));
        }
        if self.n0 == 0 || u32::from(self.n0) > MAX_BITS {
            return Err(Error::HeaderFieldOutOfRange("n0"));
        }
        if self.bits.len() != m || self.alphas.len() != m {
            return Err(Error::HeaderFieldOutOfRange("channel tables"));
        }
        if self.bits.iter().any(|&b| b > MAX_BITS) {
            return Err(Error::HeaderFieldOutOfRange("bits"));
        }
        if self.alphas[0] != 0 || self.alphas.iter().any(|&a| a > 31) {
            return Err(Error::HeaderFieldOutOfRange("alphas"));
        }
        Ok(())
    }
}

/// A coded image: header plus the per-color, per-channel integer codes.
/// Eliminated channels hold no codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedImage {
    pub header: Header,
    /// `channels[color][ht_channel]` in row-major segment order.
    pub channels: Vec<Vec<Vec<u32>>>,
}

impl CodedImage {
    /// Average bits per pixel of the stored configuration.
    pub fn bpp(&self) -> f64 {
        crate::quantize::bpp(&self.header.bits)
    }

    /// Serialize to the byte-exact container layout.
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(h.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.color_channels);
        out.push(h.m);
        out.push(h.n0);
        out.extend_from_slice(&h.width.to_le_bytes());
        out.extend_from_slice(&h.height.to_le_bytes());
        for &b in &h.bits {
            out.push(b as u8);
        }
        for &a in &h.alphas {
            out.push(a as u8);
        }
        for color in &self.channels {
            for (j, codes) in color.iter().enumerate() {
                if h.bits[j] == 0 {
                    continue;
                }
                let mut w = BitWriter::new();
                for &c in codes {
                    w.write_bits(c, h.bits[j]);
                }
                out.extend_from_slice(&w.into_bytes());
            }
        }
        out
    }

    /// Parse a container, validating the header and the exact payload
    /// length.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(Error::BadMagic);
        }
        if bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if bytes.len() < 16 {
            return Err(Error::TruncatedPayload {
                expected: 16,
                found: bytes.len(),
            });
        }
        let version = bytes[4];
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let color_channels = bytes[5];
        let m = bytes[6] as usize;
        let n0 = bytes[7];
        let width = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
        if m == 0 || bytes.len() < 16 + 2 * m {
            return Err(Error::TruncatedPayload {
                expected: 16 + 2 * m.max(1),
                found: bytes.len(),
            });
        }
        let bits: Vec<u32> = bytes[16..16 + m].iter().map(|&b| u32::from(b)).collect();
        let alphas: Vec<u32> = bytes[16 + m..16 + 2 * m]
            .iter()
            .map(|&b| u32::from(b))
            .collect();
        let header = Header {
            width,
            height,
            color_channels,
            m: m as u8,
            n0,
            bits,
            alphas,
        };
        header.validate()?;

        let expected = header.encoded_len();
        if bytes.len() != expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: bytes.len(),
            });
        }

        let codes_per_channel = header.codes_per_channel();
        let mut offset = 16 + 2 * m;
        let mut channels = Vec::with_capacity(header.color_channels as usize);
        for _ in 0..header.color_channels {
            let mut color = Vec::with_capacity(m);
            for j in 0..m {
                if header.bits[j] == 0 {
                    color.push(Vec::new());
                    continue;
                }
                let nbytes = header.channel_payload_bytes(j);
                let mut r = BitReader::new(&bytes[offset..offset + nbytes]);
                let mut codes = Vec::with_capacity(codes_per_channel);
                for _ in 0..codes_per_channel {
                    codes.push(r.read_bits(header.bits[j])?);
                }
                offset += nbytes;
                color.push(codes);
            }
            channels.push(color);
        }
        Ok(Self { header, channels })
    }
}

/// Encode one or more color planes with the given configuration. All
/// planes must share dimensions; the stored width is the input width
/// clipped down to a multiple of M.
pub fn encode(planes: &[ImagePlane], cfg: &HtConfig) -> Result<CodedImage> {
    if planes.is_empty() || planes.len() > 4 {
        return Err(Error::HeaderFieldOutOfRange("color_channels"));
    }
    let (w0, h0) = (planes[0].width(), planes[0].height());
    for p in planes {
        if p.width() != w0 || p.height() != h0 {
            return Err(Error::DimensionMismatch(w0, h0, p.width(), p.height()));
        }
    }
    let m = cfg.order();
    if w0 < m {
        return Err(Error::WidthTooSmall {
            width: w0,
            order: m,
        });
    }

    let mut channels = Vec::with_capacity(planes.len());
    for plane in planes {
        let ch = forward_rows(plane, m, cfg.alphas())?;
        let mut per_channel = Vec::with_capacity(m);
        for j in 0..m {
            per_channel.push(quantize_channel(
                ch.plane(j),
                cfg.bits()[j],
                channel_range(j),
            )?);
        }
        channels.push(per_channel);
    }

    let header = Header {
        width: ((w0 / m) * m) as u32,
        height: h0 as u32,
        color_channels: planes.len() as u8,
        m: m as u8,
        n0: cfg.n0() as u8,
        bits: cfg.bits().to_vec(),
        alphas: cfg.alphas().to_vec(),
    };
    Ok(CodedImage { header, channels })
}

/// Decode a coded image back to color planes. Eliminated channels
/// reconstruct as zero; the output is clamped to [0, 1].
pub fn decode(coded: &CodedImage) -> Result<Vec<ImagePlane>> {
    let h = &coded.header;
    h.validate()?;
    if coded.channels.len() != h.color_channels as usize {
        return Err(Error::ChannelCountMismatch {
            expected: h.color_channels as usize,
            got: coded.channels.len(),
        });
    }
    let m = h.m as usize;
    let gains = gains_from_alphas(m, &h.alphas);
    let segs = h.width_segments();
    let height = h.height as usize;
    let expected_codes = h.codes_per_channel();

    let mut planes = Vec::with_capacity(coded.channels.len());
    for color in &coded.channels {
        if color.len() != m {
            return Err(Error::ChannelCountMismatch {
                expected: m,
                got: color.len(),
            });
        }
        let mut analog = Vec::with_capacity(m);
        for (j, codes) in color.iter().enumerate() {
            if h.bits[j] == 0 {
                analog.push(vec![channel_range(j).zero(); expected_codes]);
            } else {
                if codes.len() != expected_codes {
                    return Err(Error::TruncatedPayload {
                        expected: expected_codes,
                        found: codes.len(),
                    });
                }
                analog.push(dequantize_channel(codes, h.bits[j], channel_range(j))?);
            }
        }
        let ch = ChannelPlanes::from_parts(m, segs, height, gains.clone(), analog)?;
        let mut img = inverse_rows(&ch)?;
        img.clamp_unit();
        planes.push(img);
    }
    Ok(planes)
}

/// Baseline LSB-truncation path with the codec-style signature, for
/// side-by-side sweeps.
pub fn transcode_baseline(img: &ImagePlane, bits: u32) -> Result<ImagePlane> {
    baseline_quantize(img, bits)
}
