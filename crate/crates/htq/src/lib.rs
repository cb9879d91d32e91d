//! Variable-resolution pixel quantization built on the 1-D Hadamard
//! transform.
//!
//! A four-point row transform splits an image into one DC channel (the
//! segment mean, which spans most of the unit range) and three AC
//! channels that cluster tightly around zero. Boosting the AC channels by
//! calibrated power-of-two gains lets each channel be digitized at its own
//! reduced resolution — or dropped entirely — cutting the average bits per
//! pixel, and with it ADC power, I/O energy, and storage, while the
//! reconstruction stays close to the original.
//!
//! The crate provides:
//!
//! - [`transform`]: Hadamard matrices and the forward/inverse row
//!   transform with per-channel gains.
//! - [`calibrate`]: per-channel spread statistics and the gain/bit
//!   allocation derived from an image set.
//! - [`quantize`]: the uniform variable-resolution quantizer, the
//!   LSB-truncation baseline, and BPP accounting.
//! - [`codec`]: end-to-end encode/decode plus the `.htq` container
//!   (byte-exact layout in `FORMAT.md`).
//! - [`metrics`]: PSNR and SSIM.
//! - [`power`]: analytic pipelined/SAR ADC power models with normalized
//!   tables and multi-channel aggregates.
//! - [`adcsim`]: a behavioral switched-capacitor model of the pipelined
//!   ADC stage that embeds the transform, with capacitor-mismatch and
//!   finite-gain Monte Carlo studies.
//! - [`synth`]: deterministic photograph-like test images.
//!
//! Inner loops are data-parallel via rayon under the default `parallel`
//! feature; disabling it yields a sequential build with bit-identical
//! results.

pub mod adcsim;
pub mod calibrate;
pub mod codec;
pub mod config;
pub mod error;
pub mod image;
pub mod metrics;
mod par;
pub mod power;
pub mod quantize;
pub mod synth;
pub mod transform;

pub use config::HtConfig;
pub use error::{Error, Result};
pub use image::ImagePlane;
