//! Hadamard matrices and the 1-D row transform with per-channel gain.
//!
//! The transform matrix is the unnormalized Sylvester construction: entries
//! are exactly ±1 and `H · Hᵀ = M·I` in integer arithmetic. Scaling lives
//! entirely in the per-channel gains `β_j = 2^{α_j} / M`, which is the
//! quantity an analog front end would actually present to its quantizer:
//! channel 0 (the segment mean) stays in [0, 1] and the AC channels are
//! boosted by powers of two chosen during calibration.

use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::par;

/// Largest supported transform order.
pub const MAX_ORDER: usize = 64;

/// Largest supported gain exponent (the container stores one byte and
/// gains are computed as `1 << alpha`).
pub const MAX_ALPHA: u32 = 31;

/// An M×M Hadamard matrix of ±1 entries (unnormalized convention).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i32>,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> i32 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[i32] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }
}

/// Build the order-M Sylvester Hadamard matrix,
/// `H_M = [[H_{M/2}, H_{M/2}], [H_{M/2}, -H_{M/2}]]` with `H_1 = [1]`.
pub fn hadamard_matrix(m: usize) -> Result<HadamardMatrix> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(m));
    }
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m, MAX_ORDER));
    }
    let mut entries = vec![0i32; m * m];
    entries[0] = 1;
    let mut size = 1;
    while size < m {
        for r in 0..size {
            for c in 0..size {
                let v = entries[r * m + c];
                entries[r * m + c + size] = v;
                entries[(r + size) * m + c] = v;
                entries[(r + size) * m + c + size] = -v;
            }
        }
        size *= 2;
    }
    Ok(HadamardMatrix { order: m, entries })
}

/// In-place fast Walsh-Hadamard butterfly. Equivalent to multiplying by the
/// Sylvester matrix of matching size (which is symmetric, so the same pass
/// serves forward and inverse up to a factor of M).
pub(crate) fn fwht(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        let step = half * 2;
        let mut base = 0;
        while base < n {
            for k in base..base + half {
                let a = data[k];
                let b = data[k + half];
                data[k] = a + b;
                data[k + half] = a - b;
            }
            base += step;
        }
        half = step;
    }
}

/// Per-channel analog values of a row-transformed image.
///
/// Plane `j` holds `a_j = β_j · (h_j · x)` for every 1×M row segment, in
/// row-major segment order; `β_j = 2^{α_j} / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlanes {
    m: usize,
    width_segments: usize,
    height: usize,
    gains: Vec<f64>,
    planes: Vec<Vec<f64>>,
}

impl ChannelPlanes {
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn width_segments(&self) -> usize {
        self.width_segments
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Per-channel gains β_j.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn plane(&self, j: usize) -> &[f64] {
        &self.planes[j]
    }

    pub fn segments_per_plane(&self) -> usize {
        self.width_segments * self.height
    }

    /// Assemble channel planes from raw parts (used by the decoder).
    pub fn from_parts(
        m: usize,
        width_segments: usize,
        height: usize,
        gains: Vec<f64>,
        planes: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if gains.len() != m || planes.len() != m {
            return Err(Error::ChannelCountMismatch {
                expected: m,
                got: gains.len().max(planes.len()),
            });
        }
        if gains.iter().any(|&g| g <= 0.0) {
            return Err(Error::ZeroGain);
        }
        let expected = width_segments * height;
        for plane in &planes {
            if plane.len() != expected {
                return Err(Error::DataLengthMismatch {
                    len: plane.len(),
                    width: width_segments,
                    height,
                });
            }
        }
        Ok(Self {
            m,
            width_segments,
            height,
            gains,
            planes,
        })
    }
}

/// Gains β_j = 2^{α_j} / M for a gain-exponent vector.
pub fn gains_from_alphas(m: usize, alphas: &[u32]) -> Vec<f64> {
    alphas
        .iter()
        .map(|&a| (1u64 << a) as f64 / m as f64)
        .collect()
}

fn validate_alphas(m: usize, alphas: &[u32]) -> Result<()> {
    if alphas.len() != m {
        return Err(Error::ChannelCountMismatch {
            expected: m,
            got: alphas.len(),
        });
    }
    if alphas[0] != 0 {
        return Err(Error::NonZeroDcAlpha(alphas[0]));
    }
    if let Some(&a) = alphas.iter().find(|&&a| a > MAX_ALPHA) {
        return Err(Error::AlphaOutOfRange(a));
    }
    Ok(())
}

/// Forward row transform with per-channel gain.
///
/// The width is clipped down to the largest multiple of `m` (columns beyond
/// are dropped, heights are never modified). Each length-M segment `x`
/// produces `a_j = β_j · (h_j · x)` on plane `j`.
pub fn forward_rows(img: &ImagePlane, m: usize, alphas: &[u32]) -> Result<ChannelPlanes> {
    let h = hadamard_matrix(m)?;
    validate_alphas(m, alphas)?;
    if img.width() < m {
        return Err(Error::WidthTooSmall {
            width: img.width(),
            order: m,
        });
    }
    let _ = &h; // order checks only; the butterfly below is the fast path

    let width_segments = img.width() / m;
    let height = img.height();
    let gains = gains_from_alphas(m, alphas);

    // Row-parallel pass: each row yields its channel-major segment values.
    let rows = par::map_indexed(height, |y| {
        let row = img.row(y);
        let mut out = vec![0.0f64; m * width_segments];
        let mut seg = vec![0.0f64; m];
        for s in 0..width_segments {
            seg.copy_from_slice(&row[s * m..(s + 1) * m]);
            fwht(&mut seg);
            for j in 0..m {
                out[j * width_segments + s] = gains[j] * seg[j];
            }
        }
        out
    });

    let mut planes = vec![vec![0.0f64; width_segments * height]; m];
    for (y, row) in rows.into_iter().enumerate() {
        for j in 0..m {
            planes[j][y * width_segments..(y + 1) * width_segments]
                .copy_from_slice(&row[j * width_segments..(j + 1) * width_segments]);
        }
    }

    Ok(ChannelPlanes {
        m,
        width_segments,
        height,
        gains,
        planes,
    })
}

/// Inverse row transform: undo the gains and apply `(1/M) · Hᵀ` per segment.
///
/// Output width is `M × width_segments`. No clamping is applied here; the
/// codec clamps after reconstruction.
pub fn inverse_rows(ch: &ChannelPlanes) -> Result<ImagePlane> {
    if ch.gains.iter().any(|&g| g <= 0.0) {
        return Err(Error::ZeroGain);
    }
    let m = ch.m;
    let width = m * ch.width_segments;
    let inv_m = 1.0 / m as f64;

    let rows = par::map_indexed(ch.height, |y| {
        let mut row = vec![0.0f64; width];
        let mut seg = vec![0.0f64; m];
        for s in 0..ch.width_segments {
            for (j, slot) in seg.iter_mut().enumerate() {
                *slot = ch.planes[j][y * ch.width_segments + s] / ch.gains[j];
            }
            // Sylvester matrices are symmetric, so Hᵀ t = H t.
            fwht(&mut seg);
            for i in 0..m {
                row[s * m + i] = seg[i] * inv_m;
            }
        }
        row
    });

    let mut data = Vec::with_capacity(width * ch.height);
    for row in rows {
        data.extend_from_slice(&row);
    }
    Ok(ImagePlane::from_raw(width, ch.height, data))
}
