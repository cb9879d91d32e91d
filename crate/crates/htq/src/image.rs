use crate::error::{Error, Result};

/// A single image plane: row-major intensities with a nominal [0, 1] range.
///
/// 8-bit sources map a pixel value `p` to `p / 255`. One plane holds one
/// color channel; color images are a slice of planes processed
/// independently.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DataLengthMismatch {
                len: data.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Plane filled with a single intensity.
    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Build a plane from 8-bit samples, normalizing to [0, 1].
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::DataLengthMismatch {
                len: bytes.len(),
                width,
                height,
            });
        }
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Quantize back to 8-bit samples (round to nearest, clamped).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width)
    }

    /// Drop columns beyond the widest multiple of `m`. Returns a borrowed
    /// clone when the width already divides evenly.
    pub fn clip_width(&self, m: usize) -> Self {
        assert!(m > 0, "segment size must be positive");
        let new_width = (self.width / m) * m;
        if new_width == self.width {
            return self.clone();
        }
        let mut data = Vec::with_capacity(new_width * self.height);
        for row in self.rows() {
            data.extend_from_slice(&row[..new_width]);
        }
        Self {
            width: new_width,
            height: self.height,
            data,
        }
    }

    /// Clamp every intensity into [0, 1] in place.
    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_is_validated() {
        assert!(ImagePlane::new(4, 4, vec![0.0; 15]).is_err());
        assert!(ImagePlane::new(4, 4, vec![0.0; 16]).is_ok());
    }

    #[test]
    fn byte_round_trip() {
        let bytes: Vec<u8> = (0..=255).collect();
        let plane = ImagePlane::from_bytes(16, 16, &bytes).unwrap();
        assert_eq!(plane.to_bytes(), bytes);
    }

    #[test]
    fn clip_width_drops_trailing_columns() {
        let plane = ImagePlane::from_fn(10, 2, |x, y| (x + 10 * y) as f64);
        let clipped = plane.clip_width(4);
        assert_eq!(clipped.width(), 8);
        assert_eq!(clipped.height(), 2);
        assert_eq!(clipped.get(7, 1), 17.0);
    }

    #[test]
    fn clip_width_noop_when_divisible() {
        let plane = ImagePlane::constant(8, 3, 0.5);
        let clipped = plane.clip_width(4);
        assert_eq!(clipped, plane);
    }
}
