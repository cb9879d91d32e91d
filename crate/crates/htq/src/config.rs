//! Channel configuration shared by the calibrator, the codec, and the ADC
//! simulator: transform order, per-channel gain exponents, and per-channel
//! bit widths.

use crate::error::{Error, Result};
use crate::transform::{MAX_ALPHA, MAX_ORDER, gains_from_alphas};

/// Widest supported quantizer.
pub const MAX_BITS: u32 = 16;

/// Transform size M, gain exponents α_j, full-scale resolution N0, and
/// per-channel bit widths N_j (0 marks an eliminated channel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HtConfig {
    m: usize,
    n0: u32,
    alphas: Vec<u32>,
    bits: Vec<u32>,
}

impl HtConfig {
    /// Standard allocation: `N_j = max(N0 - α_j, 0)`.
    pub fn from_n0(m: usize, n0: u32, alphas: Vec<u32>) -> Result<Self> {
        let bits = alphas.iter().map(|&a| n0.saturating_sub(a)).collect();
        Self::with_bits(m, n0, alphas, bits)
    }

    /// Explicit per-channel bit widths (channel elimination sets a width
    /// to zero).
    pub fn with_bits(m: usize, n0: u32, alphas: Vec<u32>, bits: Vec<u32>) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(m));
        }
        if m > MAX_ORDER {
            return Err(Error::OrderTooLarge(m, MAX_ORDER));
        }
        if alphas.len() != m {
            return Err(Error::ChannelCountMismatch {
                expected: m,
                got: alphas.len(),
            });
        }
        if bits.len() != m {
            return Err(Error::ChannelCountMismatch {
                expected: m,
                got: bits.len(),
            });
        }
        if alphas[0] != 0 {
            return Err(Error::NonZeroDcAlpha(alphas[0]));
        }
        if let Some(&a) = alphas.iter().find(|&&a| a > MAX_ALPHA) {
            return Err(Error::AlphaOutOfRange(a));
        }
        if n0 == 0 || n0 > MAX_BITS {
            return Err(Error::BitsOutOfRange(n0));
        }
        if let Some(&b) = bits.iter().find(|&&b| b > MAX_BITS) {
            return Err(Error::BitsOutOfRange(b));
        }
        Ok(Self {
            m,
            n0,
            alphas,
            bits,
        })
    }

    /// Zero out the bit widths of the listed channels.
    pub fn eliminate(mut self, channels: &[usize]) -> Self {
        for &j in channels {
            self.bits[j] = 0;
        }
        self
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn alphas(&self) -> &[u32] {
        &self.alphas
    }

    pub fn bits(&self) -> &[u32] {
        &self.bits
    }

    /// Per-channel gains β_j = 2^{α_j} / M.
    pub fn gains(&self) -> Vec<f64> {
        gains_from_alphas(self.m, &self.alphas)
    }

    /// Average bits per pixel, `(Σ N_j) / M`.
    pub fn bpp(&self) -> f64 {
        crate::quantize::bpp(&self.bits)
    }
}
