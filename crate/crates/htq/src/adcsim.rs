//! Behavioral simulation of the four-channel pipelined ADC whose first
//! stage performs the Hadamard transform, the per-channel gain, and a
//! 1.5-bit decision in one switched-capacitor operation.
//!
//! Each channel `j` carries a gain `β_j = 2^{α_j}/4`. Its MDAC samples the
//! four pixels onto capacitors scaled by `(1 + P_j)` with `P_j = 2β_j − 1`
//! (channel 0 instead uses unit sampling caps and a double-size feedback
//! cap), and charge conservation between the sampling and amplification
//! phases yields the residue `V_res = 2β_j·(h_j·x) − k·V_ref`. The sub-ADC
//! shares the inputs through a capacitor network scaled by
//! `Q_j = 4β_j − 1` and compares against ±V_ref/4 to produce the 1.5-bit
//! decision `k ∈ {−1, 0, +1}`. Every physical capacitor takes an
//! independent multiplicative mismatch; finite op-amp DC gain applies the
//! static closed-loop factor `A·f/(1 + A·f)` with feedback factor
//! `f = C_f/(C_f + ΣC_connected)`.
//!
//! The back-end ADC digitizing the residue is ideal, one bit narrower than
//! the channel's total resolution; recombining `v̂ = (k·V_ref + v̂_res)/2`
//! lands exactly on the channel quantizer's midpoint grid, so an ideal
//! circuit reproduces the software codec to within one code.

use crate::codec::{CodedImage, Header};
use crate::config::HtConfig;
use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::metrics;
use crate::par;
use crate::power::BOLTZMANN;
use crate::quantize::{Range, channel_range, dequantize_channel, quantize_channel};
use crate::transform::hadamard_matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// The embedded-transform stage is a four-point architecture.
pub const EHT_CHANNELS: usize = 4;

/// Mismatch draws are truncated at ±5σ.
const MISMATCH_CLAMP_SIGMAS: f64 = 5.0;

/// Behavioral parameters of one EHT channel, including its per-capacitor
/// mismatch draws (multipliers of the nominal values, 1.0 = exact).
#[derive(Debug, Clone, PartialEq)]
pub struct EhtCircuit {
    channel: usize,
    beta: f64,
    signs: [f64; 4],
    cs_nominal: f64,
    v_ref: f64,
    opamp_gain_db: f64,
    backend_bits: u32,
    mdac_sampling: [f64; 4],
    mdac_feedback: f64,
    mdac_reference: f64,
    subadc_sets: [f64; 4],
}

/// One stage evaluation: the 1.5-bit decision and the residue voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutput {
    /// Sub-ADC decision k ∈ {−1, 0, +1}.
    pub decision: i8,
    /// Residue handed to the back-end ADC [same units as V_ref].
    pub v_res: f64,
}

/// The capacitor multipliers a circuit instance was drawn with, exposed
/// for independent verification of the charge equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMultipliers {
    pub mdac_sampling: [f64; 4],
    pub mdac_feedback: f64,
    pub mdac_reference: f64,
    pub subadc_sets: [f64; 4],
}

impl EhtCircuit {
    /// Ideal channel: exact capacitors and the given op-amp gain
    /// (`f64::INFINITY` for an ideal op amp). `total_bits` is the
    /// channel's full resolution N_j ≥ 1; the back end gets N_j − 1 bits.
    pub fn ideal(channel: usize, alpha: u32, total_bits: u32, opamp_gain_db: f64) -> Result<Self> {
        if channel >= EHT_CHANNELS {
            return Err(Error::ChannelCountMismatch {
                expected: EHT_CHANNELS,
                got: channel + 1,
            });
        }
        if total_bits == 0 || total_bits > 16 {
            return Err(Error::BitsOutOfRange(total_bits));
        }
        if alpha > crate::transform::MAX_ALPHA {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let h = hadamard_matrix(EHT_CHANNELS)?;
        let mut signs = [0.0f64; 4];
        for (i, s) in signs.iter_mut().enumerate() {
            *s = f64::from(h.entry(channel, i));
        }
        Ok(Self {
            channel,
            beta: (1u64 << alpha) as f64 / EHT_CHANNELS as f64,
            signs,
            cs_nominal: 1e-12,
            v_ref: 1.0,
            opamp_gain_db,
            backend_bits: total_bits - 1,
            mdac_sampling: [1.0; 4],
            mdac_feedback: 1.0,
            mdac_reference: 1.0,
            subadc_sets: [1.0; 4],
        })
    }

    /// Redraw every capacitor with Gaussian mismatch of the given relative
    /// σ (clamped at ±5σ). Draw order is fixed — MDAC sampling 0..4, MDAC
    /// feedback, MDAC reference, sub-ADC sets 0..4 — so a seeded stream
    /// reproduces exactly. `in_subadc = false` leaves the sub-ADC network
    /// exact while still consuming its draws.
    pub fn with_mismatch(
        mut self,
        sigma: f64,
        in_subadc: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        if sigma <= 0.0 {
            return self;
        }
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        let clamp = MISMATCH_CLAMP_SIGMAS * sigma;
        let draw = |rng: &mut ChaCha8Rng| {
            1.0 + normal.sample(rng).clamp(-clamp, clamp)
        };
        for c in self.mdac_sampling.iter_mut() {
            *c = draw(rng);
        }
        self.mdac_feedback = draw(rng);
        self.mdac_reference = draw(rng);
        for c in self.subadc_sets.iter_mut() {
            let v = draw(rng);
            if in_subadc {
                *c = v;
            }
        }
        self
    }

    pub fn channel(&self) -> usize {
        self.channel
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn backend_bits(&self) -> u32 {
        self.backend_bits
    }

    pub fn total_bits(&self) -> u32 {
        self.backend_bits + 1
    }

    pub fn cs_nominal(&self) -> f64 {
        self.cs_nominal
    }

    pub fn mismatch_multipliers(&self) -> CapMultipliers {
        CapMultipliers {
            mdac_sampling: self.mdac_sampling,
            mdac_feedback: self.mdac_feedback,
            mdac_reference: self.mdac_reference,
            subadc_sets: self.subadc_sets,
        }
    }

    /// MDAC sampling-cap scale factor, P_j = 2β_j − 1 (−0.5 for channel 0,
    /// whose caps stay at C_s with C_f = 2C_s instead).
    pub fn p_factor(&self) -> f64 {
        2.0 * self.beta - 1.0
    }

    /// Sub-ADC set scale factor, Q_j = 4β_j − 1 (0 for channel 0).
    pub fn q_factor(&self) -> f64 {
        4.0 * self.beta - 1.0
    }

    fn closed_loop_factor(&self, c_f: f64, c_connected: f64) -> f64 {
        if self.opamp_gain_db.is_infinite() {
            return 1.0;
        }
        let a = 10f64.powf(self.opamp_gain_db / 20.0);
        let f = c_f / (c_f + c_connected);
        a * f / (1.0 + a * f)
    }
}

/// The mismatch-weighted transformed value the sub-ADC network forms at
/// the comparator node, `v = 4β_j · (Σ h_i x_i C_i) / (Σ C_i)`.
fn subadc_value(x4: &[f64; 4], c: &EhtCircuit) -> f64 {
    let set_scale = (1.0 + c.q_factor()) * c.cs_nominal;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&x, &sign), &mult) in x4.iter().zip(&c.signs).zip(&c.subadc_sets) {
        let cap = set_scale * mult;
        num += sign * x * cap;
        den += cap;
    }
    4.0 * c.beta * num / den
}

fn threshold_decision(v: f64, v_ref: f64) -> i8 {
    let threshold = v_ref / 4.0;
    if v > threshold {
        1
    } else if v < -threshold {
        -1
    } else {
        0
    }
}

/// Sub-ADC decision: two comparators test the network value against
/// ±V_ref/4.
pub fn subadc_decide(x4: &[f64; 4], c: &EhtCircuit) -> i8 {
    threshold_decision(subadc_value(x4, c), c.v_ref)
}

/// Full 1.5-bit EHT stage: sub-ADC decision plus the charge-conservation
/// residue with the actual (mismatched) capacitor values and the static
/// finite-gain factor.
pub fn eht_stage(x4: &[f64; 4], c: &EhtCircuit) -> StageOutput {
    eht_stage_noisy(x4, c, 0.0, 0.0)
}

/// Stage evaluation with additive kT/C noise on the comparator node and
/// the residue.
fn eht_stage_noisy(x4: &[f64; 4], c: &EhtCircuit, comp_noise: f64, res_noise: f64) -> StageOutput {
    let k = threshold_decision(subadc_value(x4, c) + comp_noise, c.v_ref);
    let kf = f64::from(k);
    let (v_raw, c_f, c_connected) = if c.channel == 0 {
        // Four unit sampling caps; the reference injects through caps 0
        // and 1 during amplification; C_f is nominally 2·C_s.
        let caps: Vec<f64> = c
            .mdac_sampling
            .iter()
            .map(|&m| c.cs_nominal * m)
            .collect();
        let q_s: f64 = caps.iter().zip(x4).map(|(&cap, &x)| cap * x).sum();
        let q_ref = kf * c.v_ref * (caps[0] + caps[1]);
        let c_f = 2.0 * c.cs_nominal * c.mdac_feedback;
        let connected: f64 = caps.iter().sum();
        ((q_s - q_ref) / c_f, c_f, connected)
    } else {
        // Sampling caps scaled by (1 + P_j); a separate unit reference
        // cap; C_f nominally C_s. Subtractions come from the differential
        // swap, i.e. the row signs.
        let scale = (1.0 + c.p_factor()) * c.cs_nominal;
        let caps: Vec<f64> = c.mdac_sampling.iter().map(|&m| scale * m).collect();
        let q_s: f64 = caps
            .iter()
            .zip(x4)
            .zip(&c.signs)
            .map(|((&cap, &x), &s)| s * cap * x)
            .sum();
        let c_ref = c.cs_nominal * c.mdac_reference;
        let q_ref = kf * c.v_ref * c_ref;
        let c_f = c.cs_nominal * c.mdac_feedback;
        let connected: f64 = caps.iter().sum::<f64>() + c_ref;
        ((q_s - q_ref) / c_f, c_f, connected)
    };
    StageOutput {
        decision: k,
        v_res: v_raw * c.closed_loop_factor(c_f, c_connected) + res_noise,
    }
}

/// Digitize one four-pixel segment on one channel: EHT stage, ideal
/// back-end quantization of the residue over ±V_ref, and recombination
/// into the channel's N_j-bit code.
pub fn pipeline_digitize(x4: &[f64; 4], c: &EhtCircuit) -> u32 {
    let v_hat = pipeline_estimate(x4, c, None);
    let bits = c.total_bits();
    quantize_channel(&[v_hat], bits, channel_range(c.channel)).expect("bits validated")[0]
}

/// Stage + back end, returning the recombined estimate of β_j(h_j·x)
/// normalized by V_ref. `noise` optionally injects kT/C samples
/// (comparator node, residue).
fn pipeline_estimate(x4: &[f64; 4], c: &EhtCircuit, noise: Option<(f64, f64)>) -> f64 {
    let (comp_noise, res_noise) = noise.unwrap_or((0.0, 0.0));
    let stage = eht_stage_noisy(x4, c, comp_noise, res_noise);
    let r_norm = stage.v_res / c.v_ref;
    let r_hat = if c.backend_bits == 0 {
        0.0
    } else {
        let code = quantize_channel(&[r_norm], c.backend_bits, Range::Bipolar)
            .expect("bits validated");
        dequantize_channel(&code, c.backend_bits, Range::Bipolar).expect("own codes")[0]
    };
    (f64::from(stage.decision) + r_hat) / 2.0
}

/// Thermal noise std-dev pair (comparator node, residue) for a circuit at
/// temperature `t`.
fn thermal_sigmas(c: &EhtCircuit, t: f64) -> (f64, f64) {
    let kt = BOLTZMANN * t;
    let sub_total = 4.0 * (1.0 + c.q_factor()) * c.cs_nominal;
    let (c_f, samp_total) = if c.channel == 0 {
        (2.0 * c.cs_nominal, 4.0 * c.cs_nominal)
    } else {
        (c.cs_nominal, 4.0 * (1.0 + c.p_factor()) * c.cs_nominal + c.cs_nominal)
    };
    let comparator = (kt / sub_total).sqrt();
    let residue = (kt * samp_total).sqrt() / c_f;
    (comparator, residue)
}

/// Push every 1×4 row segment of an image through the four channel
/// circuits; the result decodes with the ordinary codec path.
pub fn digitize_image(
    img: &ImagePlane,
    cfg: &HtConfig,
    circuits: &[EhtCircuit],
) -> Result<CodedImage> {
    digitize_image_inner(img, cfg, circuits, None)
}

struct NoiseCtx {
    seed: u64,
    trial: usize,
    temperature: f64,
}

fn digitize_image_inner(
    img: &ImagePlane,
    cfg: &HtConfig,
    circuits: &[EhtCircuit],
    noise: Option<&NoiseCtx>,
) -> Result<CodedImage> {
    if cfg.order() != EHT_CHANNELS {
        return Err(Error::ChannelCountMismatch {
            expected: EHT_CHANNELS,
            got: cfg.order(),
        });
    }
    if circuits.len() != EHT_CHANNELS {
        return Err(Error::ChannelCountMismatch {
            expected: EHT_CHANNELS,
            got: circuits.len(),
        });
    }
    if img.width() < EHT_CHANNELS {
        return Err(Error::WidthTooSmall {
            width: img.width(),
            order: EHT_CHANNELS,
        });
    }
    for (j, c) in circuits.iter().enumerate() {
        if cfg.bits()[j] > 0 && c.total_bits() != cfg.bits()[j] {
            return Err(Error::BitsOutOfRange(c.total_bits()));
        }
    }

    let m = EHT_CHANNELS;
    let segs = img.width() / m;
    let height = img.height();

    // Rows are independent; with thermal noise each row owns a seeded
    // substream so the result is identical across thread counts.
    let rows: Vec<Vec<Vec<u32>>> = par::map_indexed(height, |y| {
        let mut rng = noise.map(|ctx| {
            let mut r = ChaCha8Rng::seed_from_u64(ctx.seed);
            r.set_stream(((ctx.trial as u64) << 32) | (y as u64 + 1));
            r
        });
        let row = img.row(y);
        let mut out: Vec<Vec<u32>> = (0..m).map(|_| Vec::with_capacity(segs)).collect();
        for s in 0..segs {
            let x4: [f64; 4] = row[s * m..(s + 1) * m].try_into().unwrap();
            for j in 0..m {
                if cfg.bits()[j] == 0 {
                    continue;
                }
                let sample_noise = rng.as_mut().map(|r| {
                    let ctx = noise.unwrap();
                    let (comp_sigma, res_sigma) = thermal_sigmas(&circuits[j], ctx.temperature);
                    let n_comp = Normal::new(0.0, comp_sigma).expect("finite");
                    let n_res = Normal::new(0.0, res_sigma).expect("finite");
                    (n_comp.sample(r), n_res.sample(r))
                });
                let v_hat = pipeline_estimate(&x4, &circuits[j], sample_noise);
                out[j].push(
                    quantize_channel(&[v_hat], cfg.bits()[j], channel_range(j))
                        .expect("bits validated")[0],
                );
            }
        }
        out
    });

    let mut channels: Vec<Vec<u32>> =
        (0..m).map(|_| Vec::with_capacity(segs * height)).collect();
    for row in rows {
        for (j, mut codes) in row.into_iter().enumerate() {
            channels[j].append(&mut codes);
        }
    }

    let header = Header {
        width: (segs * m) as u32,
        height: height as u32,
        color_channels: 1,
        m: m as u8,
        n0: cfg.n0() as u8,
        bits: cfg.bits().to_vec(),
        alphas: cfg.alphas().to_vec(),
    };
    Ok(CodedImage {
        header,
        channels: vec![channels],
    })
}

/// Monte Carlo study settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: usize,
    /// Relative capacitor mismatch σ (e.g. 0.01 for 1%).
    pub mismatch_sigma: f64,
    /// Op-amp DC gain in dB; `f64::INFINITY` for ideal.
    pub opamp_gain_db: f64,
    pub seed: u64,
    /// Apply mismatch to the sub-ADC network too (default), or restrict
    /// it to the MDACs.
    pub mismatch_in_subadc: bool,
    /// Inject kT/C sampling noise (off by default; the mismatch study is
    /// mismatch + finite gain only).
    pub thermal_noise: bool,
    /// Temperature for the kT/C draw [K].
    pub temperature: f64,
}

impl MonteCarloConfig {
    pub fn new(trials: usize, mismatch_sigma: f64, opamp_gain_db: f64, seed: u64) -> Self {
        Self {
            trials,
            mismatch_sigma,
            opamp_gain_db,
            seed,
            mismatch_in_subadc: true,
            thermal_noise: false,
            temperature: 300.0,
        }
    }
}

/// Per-trial PSNR record of a mismatch study.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: usize,
    pub seed: u64,
    pub mismatch_sigma: f64,
    /// PSNR of trial i's decoded image against the (clipped) original.
    pub psnr_db: Vec<f64>,
}

/// Histogram summary of the trial PSNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges spanning [min, max].
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl MonteCarloReport {
    pub fn min_db(&self) -> f64 {
        self.psnr_db.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_db(&self) -> f64 {
        self.psnr_db
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_db(&self) -> f64 {
        self.psnr_db.iter().sum::<f64>() / self.psnr_db.len() as f64
    }

    /// max − min over the trials.
    pub fn spread_db(&self) -> f64 {
        self.max_db() - self.min_db()
    }

    pub fn histogram(&self, bins: usize) -> Histogram {
        let bins = bins.max(1);
        let lo = self.min_db();
        let hi = self.max_db();
        let span = (hi - lo).max(1e-12);
        let edges: Vec<f64> = (0..=bins)
            .map(|i| lo + span * i as f64 / bins as f64)
            .collect();
        let mut counts = vec![0usize; bins];
        for &p in &self.psnr_db {
            let idx = (((p - lo) / span) * bins as f64) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
        Histogram { edges, counts }
    }
}

fn draw_trial_circuits(cfg: &HtConfig, mc: &MonteCarloConfig, trial: usize) -> Vec<EhtCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    rng.set_stream((trial as u64) << 32);
    (0..EHT_CHANNELS)
        .map(|j| {
            // Eliminated channels keep a placeholder 1-bit circuit; they
            // are skipped during digitization but still consume their
            // mismatch draws so the stream layout is stable.
            let bits = cfg.bits()[j].max(1);
            EhtCircuit::ideal(j, cfg.alphas()[j], bits, mc.opamp_gain_db)
                .expect("validated config")
                .with_mismatch(mc.mismatch_sigma, mc.mismatch_in_subadc, &mut rng)
        })
        .collect()
}

fn run_trial(
    img: &ImagePlane,
    original: &ImagePlane,
    cfg: &HtConfig,
    mc: &MonteCarloConfig,
    trial: usize,
) -> f64 {
    let circuits = draw_trial_circuits(cfg, mc, trial);
    let noise = mc.thermal_noise.then_some(NoiseCtx {
        seed: mc.seed,
        trial,
        temperature: mc.temperature,
    });
    let coded = digitize_image_inner(img, cfg, &circuits, noise.as_ref())
        .expect("validated inputs");
    let decoded = crate::codec::decode(&coded).expect("own container");
    metrics::psnr(original, &decoded[0]).expect("matching dims")
}

/// Monte Carlo mismatch study: every trial draws fresh capacitors from its
/// own seeded substream, digitizes the image, decodes it, and records the
/// PSNR against the original. Bit-identical for a fixed seed regardless of
/// thread count or execution order.
pub fn monte_carlo(
    img: &ImagePlane,
    cfg: &HtConfig,
    mc: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    monte_carlo_impl(img, cfg, mc, false)
}

/// Sequential twin of [`monte_carlo`]; same result, one thread. Kept as a
/// verification target and benchmark baseline.
pub fn monte_carlo_seq(
    img: &ImagePlane,
    cfg: &HtConfig,
    mc: &MonteCarloConfig,
) -> Result<MonteCarloReport> {
    monte_carlo_impl(img, cfg, mc, true)
}

fn monte_carlo_impl(
    img: &ImagePlane,
    cfg: &HtConfig,
    mc: &MonteCarloConfig,
    sequential: bool,
) -> Result<MonteCarloReport> {
    if mc.trials == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=0.1).contains(&mc.mismatch_sigma) {
        return Err(Error::InvalidParameter(
            "mismatch sigma must be in [0, 0.1]",
        ));
    }
    if cfg.order() != EHT_CHANNELS {
        return Err(Error::ChannelCountMismatch {
            expected: EHT_CHANNELS,
            got: cfg.order(),
        });
    }
    if img.width() < EHT_CHANNELS {
        return Err(Error::WidthTooSmall {
            width: img.width(),
            order: EHT_CHANNELS,
        });
    }
    let clipped = img.clip_width(EHT_CHANNELS);
    let run = |t: usize| run_trial(&clipped, &clipped, cfg, mc, t);
    let psnr_db = if sequential {
        par::map_indexed_seq(mc.trials, run)
    } else {
        par::map_indexed(mc.trials, run)
    };
    Ok(MonteCarloReport {
        trials: mc.trials,
        seed: mc.seed,
        mismatch_sigma: mc.mismatch_sigma,
        psnr_db,
    })
}
