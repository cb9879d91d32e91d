//! Analytic ADC power models.
//!
//! Thermal-noise-limited sampling power `P_s = 48·k·T·f_s·2^{2N}` anchors
//! two architecture models: a pipelined ADC built from 1.5-bit stages,
//! `P_pipe = 9(1 + 2N·(V_eff/V_FS)·ln 2)·P_s
//!         + 2N·C_min·V_FS²·f_s·(1 + 6N·(V_eff/V_FS)·ln 2)`,
//! and a SAR ADC driven by its capacitive-DAC switching energy,
//! `P_sar = f_s·Σ_{i=1}^{N−1} 2^{N−2−i}·C_unit·V_ref²` (the final term of
//! the sum is fractional, 2^{−1}, and is kept literally). Normalized
//! figures divide by the same model's 8-bit power.

use crate::error::{Error, Result};

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.38e-23;

/// Reference resolution for normalized figures.
pub const NORMALIZATION_BITS: u32 = 8;

/// Physical constants and circuit parameters behind the power models.
#[derive(Debug, Clone, PartialEq)]
pub struct AdcParams {
    /// Sampling frequency [Hz].
    pub f_s: f64,
    /// Full-scale reference [V]; the ADC range is 0 → V_ref.
    pub v_ref: f64,
    /// Transistor overdrive (V_GS − V_TH)/2 [V].
    pub v_eff: f64,
    /// Input capacitance of a minimum-sized inverter [F].
    pub c_min: f64,
    /// SAR DAC unit capacitance [F].
    pub c_unit: f64,
    /// Temperature [K].
    pub t: f64,
}

impl Default for AdcParams {
    /// 90-nm-class reference point: 50 MHz, 1 V full scale, 0.1 V
    /// overdrive, 1 fF C_min, 4.8 fF C_unit, 300 K.
    fn default() -> Self {
        Self {
            f_s: 50e6,
            v_ref: 1.0,
            v_eff: 0.1,
            c_min: 1e-15,
            c_unit: 4.8e-15,
            t: 300.0,
        }
    }
}

impl AdcParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.f_s > 0.0
            && self.v_ref > 0.0
            && self.v_eff > 0.0
            && self.c_min > 0.0
            && self.c_unit > 0.0
            && self.t > 0.0;
        if !all_positive || self.v_eff >= self.v_ref {
            return Err(Error::InvalidParameter("adc params must be positive with v_eff < v_ref"));
        }
        Ok(())
    }
}

/// ADC architecture selector for the normalized figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcKind {
    Pipelined,
    Sar,
}

fn check_bits(n: u32, min: u32) -> Result<()> {
    if n < min || n > 16 {
        return Err(Error::BitsOutOfRange(n));
    }
    Ok(())
}

/// Sampling-noise-limited power, `48·k·T·f_s·2^{2N}` [W]. Quadruples per
/// added bit.
pub fn sampling_power(enob: u32, p: &AdcParams) -> Result<f64> {
    check_bits(enob, 1)?;
    Ok(48.0 * BOLTZMANN * p.t * p.f_s * f64::powi(2.0, 2 * enob as i32))
}

/// Total power of an N-bit pipelined ADC built from 1.5-bit stages [W].
pub fn pipelined_power(bits: u32, p: &AdcParams) -> Result<f64> {
    check_bits(bits, 2)?;
    let n = f64::from(bits);
    let v_fs = p.v_ref;
    let ratio = p.v_eff / v_fs;
    let ln2 = std::f64::consts::LN_2;
    let p_s = sampling_power(bits, p)?;
    let p_pn = 9.0 * (1.0 + 2.0 * n * ratio * ln2) * p_s;
    let p_proc = 2.0 * n * p.c_min * v_fs * v_fs * p.f_s * (1.0 + 6.0 * n * ratio * ln2);
    Ok(p_pn + p_proc)
}

/// Power of an N-bit SAR ADC from its capacitive-DAC switching sum [W].
pub fn sar_power(bits: u32, p: &AdcParams) -> Result<f64> {
    check_bits(bits, 2)?;
    let mut coeff = 0.0f64;
    for i in 1..=(bits - 1) {
        coeff += f64::powi(2.0, bits as i32 - 2 - i as i32);
    }
    Ok(p.f_s * coeff * p.c_unit * p.v_ref * p.v_ref)
}

fn power_of(kind: AdcKind, bits: u32, p: &AdcParams) -> Result<f64> {
    match kind {
        AdcKind::Pipelined => pipelined_power(bits, p),
        AdcKind::Sar => sar_power(bits, p),
    }
}

/// Power of one ADC at `bits`, normalized to the same architecture at
/// 8 bits.
pub fn normalized_power(kind: AdcKind, bits: u32, p: &AdcParams) -> Result<f64> {
    Ok(power_of(kind, bits, p)? / power_of(kind, NORMALIZATION_BITS, p)?)
}

/// Normalized power of an M-channel bank with per-channel resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelPower {
    /// Per-channel normalized contributions (0 for eliminated channels).
    pub channels: Vec<f64>,
    /// Sum of the contributions.
    pub total_normalized: f64,
    /// `total / M` — the per-channel average the comparison tables quote.
    pub per_channel_normalized: f64,
}

/// Aggregate normalized power of a channel bank. A zero bit width marks an
/// eliminated channel, which consumes nothing; live channels need at least
/// 2 bits.
pub fn multi_channel_power(bits: &[u32], kind: AdcKind, p: &AdcParams) -> Result<MultiChannelPower> {
    if bits.is_empty() {
        return Err(Error::ChannelCountMismatch {
            expected: 1,
            got: 0,
        });
    }
    let base = power_of(kind, NORMALIZATION_BITS, p)?;
    let mut channels = Vec::with_capacity(bits.len());
    for &b in bits {
        if b == 0 {
            channels.push(0.0);
        } else {
            channels.push(power_of(kind, b, p)? / base);
        }
    }
    let total_normalized: f64 = channels.iter().sum();
    Ok(MultiChannelPower {
        per_channel_normalized: total_normalized / bits.len() as f64,
        total_normalized,
        channels,
    })
}

/// I/O energy and memory per pixel, normalized to the 8-BPP baseline; both
/// are proportional to the stored bit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoMemory {
    pub io_energy: f64,
    pub memory: f64,
}

pub fn io_and_memory_normalized(bpp: f64) -> IoMemory {
    debug_assert!(bpp > 0.0 && bpp <= 8.0, "bpp out of the modeled range");
    IoMemory {
        io_energy: bpp / 8.0,
        memory: bpp / 8.0,
    }
}
