//! Per-channel statistics of transformed images and the gain/bit
//! allocation derived from them.
//!
//! The DC channel of a transformed natural image spans most of the unit
//! range while the AC channels cluster tightly around zero. Channel `j`'s
//! gain exponent comes from the spread ratio:
//! `α_j = floor(log2(σ_0 / σ_j))`, and its quantizer then needs
//! `N_j = N_0 − α_j` bits. Over a calibration set the ratios are averaged
//! per channel before taking the floor-log2.

use crate::config::HtConfig;
use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::par;
use crate::transform::{fwht, hadamard_matrix};

/// Gain exponents are clamped to this value so a near-constant calibration
/// set cannot produce absurd gains.
pub const ALPHA_MAX: u32 = 6;

/// Per-channel population standard deviations of the gain-free channel
/// values `t_j / M`, plus the per-channel sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub sigma: Vec<f64>,
    pub count: usize,
}

/// Gain exponents estimated from one set of channel spreads.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEstimate {
    pub alphas: Vec<u32>,
    /// Set when σ_0 = 0 (no DC spread); the estimate falls back to all
    /// zeros and callers should surface a warning.
    pub degenerate_dc: bool,
}

/// Result of calibrating over an image set.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub config: HtConfig,
    /// Mean σ_0/σ_j ratio per channel (1.0 for channel 0; NaN never
    /// appears — channels with no valid contribution fall back to the
    /// clamp value).
    pub mean_ratios: Vec<f64>,
    pub degenerate_dc: bool,
}

/// Population standard deviation of each channel's `t_j / M` values over
/// every length-M row segment of the image.
pub fn channel_sigma(img: &ImagePlane, m: usize) -> Result<ChannelStats> {
    hadamard_matrix(m)?; // validates the order
    if img.width() < m {
        return Err(Error::WidthTooSmall {
            width: img.width(),
            order: m,
        });
    }
    let width_segments = img.width() / m;
    let count = width_segments * img.height();
    let inv_m = 1.0 / m as f64;

    // Welford accumulators per row, merged pairwise. Each row is
    // independent; the merge is associative on (count, mean, M2).
    struct Acc {
        n: f64,
        mean: Vec<f64>,
        m2: Vec<f64>,
    }
    let merge = |a: Acc, b: Acc| -> Acc {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let mut mean = vec![0.0; a.mean.len()];
        let mut m2 = vec![0.0; a.mean.len()];
        for j in 0..a.mean.len() {
            let delta = b.mean[j] - a.mean[j];
            mean[j] = a.mean[j] + delta * b.n / n;
            m2[j] = a.m2[j] + b.m2[j] + delta * delta * a.n * b.n / n;
        }
        Acc { n, mean, m2 }
    };

    let row_accs = par::map_indexed(img.height(), |y| {
        let row = img.row(y);
        let mut acc = Acc {
            n: 0.0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        };
        let mut seg = vec![0.0f64; m];
        for s in 0..width_segments {
            seg.copy_from_slice(&row[s * m..(s + 1) * m]);
            fwht(&mut seg);
            acc.n += 1.0;
            for (j, &t) in seg.iter().enumerate() {
                let x = t * inv_m;
                let delta = x - acc.mean[j];
                acc.mean[j] += delta / acc.n;
                acc.m2[j] += delta * (x - acc.mean[j]);
            }
        }
        acc
    });

    let total = row_accs.into_iter().fold(
        Acc {
            n: 0.0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        },
        merge,
    );

    let sigma = total
        .m2
        .iter()
        .map(|&m2| if total.n > 0.0 { (m2 / total.n).sqrt() } else { 0.0 })
        .collect();
    Ok(ChannelStats { sigma, count })
}

fn floor_log2_ratio(ratio: f64) -> u32 {
    if !ratio.is_finite() {
        return ALPHA_MAX;
    }
    if ratio <= 1.0 {
        return 0;
    }
    (ratio.log2().floor() as u32).min(ALPHA_MAX)
}

/// Gain exponents from one image's channel spreads:
/// `α_j = floor(log2(σ_0 / σ_j))`, clamped to `[0, ALPHA_MAX]`. A zero DC
/// spread yields the all-zero fallback with `degenerate_dc` set.
pub fn alpha_from_sigmas(stats: &ChannelStats) -> AlphaEstimate {
    let m = stats.sigma.len();
    if stats.sigma.is_empty() || stats.sigma[0] <= 0.0 {
        return AlphaEstimate {
            alphas: vec![0; m],
            degenerate_dc: true,
        };
    }
    let s0 = stats.sigma[0];
    let alphas = stats
        .sigma
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            if j == 0 {
                0
            } else if s <= 0.0 {
                ALPHA_MAX
            } else {
                floor_log2_ratio(s0 / s)
            }
        })
        .collect();
    AlphaEstimate {
        alphas,
        degenerate_dc: false,
    }
}

/// Calibrate over an image set: average the per-image ratios σ_0/σ_j
/// (images where σ_j = 0 contribute nothing to channel j), then take
/// floor-log2 of the mean ratio once. `n0` is the full-scale resolution
/// the returned allocation is built for.
pub fn calibrate_dataset(images: &[ImagePlane], m: usize, n0: u32) -> Result<Calibration> {
    if images.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let stats: Vec<ChannelStats> = images
        .iter()
        .map(|img| channel_sigma(img, m))
        .collect::<Result<_>>()?;

    let mut ratio_sum = vec![0.0f64; m];
    let mut ratio_n = vec![0usize; m];
    let mut any_dc = false;
    for st in &stats {
        if st.sigma[0] <= 0.0 {
            continue;
        }
        any_dc = true;
        for j in 1..m {
            if st.sigma[j] > 0.0 {
                ratio_sum[j] += st.sigma[0] / st.sigma[j];
                ratio_n[j] += 1;
            }
        }
    }

    if !any_dc {
        let config = HtConfig::from_n0(m, n0, vec![0; m])?;
        return Ok(Calibration {
            config,
            mean_ratios: vec![1.0; m],
            degenerate_dc: true,
        });
    }

    let mut mean_ratios = vec![1.0f64; m];
    let mut alphas = vec![0u32; m];
    for j in 1..m {
        if ratio_n[j] == 0 {
            // Channel never varied anywhere in the set; give it the full
            // clamp (it carries no content, so the gain is harmless).
            mean_ratios[j] = f64::INFINITY;
            alphas[j] = ALPHA_MAX;
        } else {
            let mean = ratio_sum[j] / ratio_n[j] as f64;
            mean_ratios[j] = mean;
            alphas[j] = floor_log2_ratio(mean);
        }
    }

    Ok(Calibration {
        config: HtConfig::from_n0(m, n0, alphas)?,
        mean_ratios,
        degenerate_dc: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_plane(width: usize, height: usize, seed: u64) -> ImagePlane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImagePlane::from_fn(width, height, |_, _| rng.random::<f64>())
    }

    /// Two-pass mean/variance reference, dense matrix per segment.
    fn sigma_oracle(img: &ImagePlane, m: usize) -> Vec<f64> {
        let h = hadamard_matrix(m).unwrap();
        let segs = img.width() / m;
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); m];
        for y in 0..img.height() {
            for s in 0..segs {
                let seg = &img.row(y)[s * m..(s + 1) * m];
                for j in 0..m {
                    let dot: f64 = h
                        .row(j)
                        .iter()
                        .zip(seg)
                        .map(|(&e, &x)| f64::from(e) * x)
                        .sum();
                    values[j].push(dot / m as f64);
                }
            }
        }
        values
            .iter()
            .map(|v| {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect()
    }

    #[test]
    fn constant_image_has_zero_spread() {
        let img = ImagePlane::constant(32, 8, 0.4);
        let st = channel_sigma(&img, 4).unwrap();
        assert_eq!(st.sigma, vec![0.0; 4]);
        assert_eq!(st.count, 64);
    }

    #[test]
    fn checkerboard_is_pure_ac() {
        // Alternating pixels along each row, phase flipped per row: the
        // segment sum never varies but the alternating-sign channel does.
        let img = ImagePlane::from_fn(16, 8, |x, y| ((x + y) % 2) as f64);
        let st = channel_sigma(&img, 4).unwrap();
        assert!(st.sigma[0] < 1e-12, "dc sigma = {}", st.sigma[0]);
        assert!(st.sigma[1] > 0.0, "alternating channel must vary");
    }

    #[test]
    fn matches_two_pass_oracle() {
        let img = random_plane(64, 16, 3);
        let st = channel_sigma(&img, 4).unwrap();
        let oracle = sigma_oracle(&img, 4);
        for j in 0..4 {
            let rel = (st.sigma[j] - oracle[j]).abs() / oracle[j].max(1e-30);
            assert!(rel < 1e-10, "channel {j}: {} vs {}", st.sigma[j], oracle[j]);
        }
    }

    #[test]
    fn alpha_from_published_spreads() {
        // Channel spreads of the reference transformed image.
        let st = ChannelStats {
            sigma: vec![0.2526, 0.0232, 0.0397, 0.0239],
            count: 1,
        };
        let est = alpha_from_sigmas(&st);
        assert!(!est.degenerate_dc);
        assert_eq!(est.alphas, vec![0, 3, 2, 3]);
    }

    #[test]
    fn alpha_direct_floor_log2() {
        let st = ChannelStats {
            sigma: vec![0.2526, 0.2526, 0.0397, 0.2526],
            count: 1,
        };
        assert_eq!(alpha_from_sigmas(&st).alphas, vec![0, 0, 2, 0]);
    }

    #[test]
    fn equal_spread_gives_zero_alpha() {
        let st = ChannelStats {
            sigma: vec![0.1, 0.1, 0.1, 0.1],
            count: 1,
        };
        assert_eq!(alpha_from_sigmas(&st).alphas, vec![0; 4]);
    }

    #[test]
    fn degenerate_dc_flags_and_zeroes() {
        let st = ChannelStats {
            sigma: vec![0.0, 0.1, 0.0, 0.1],
            count: 1,
        };
        let est = alpha_from_sigmas(&st);
        assert!(est.degenerate_dc);
        assert_eq!(est.alphas, vec![0; 4]);
    }

    #[test]
    fn single_image_dataset_matches_direct_estimate() {
        let img = random_plane(64, 32, 9);
        let st = channel_sigma(&img, 4).unwrap();
        let direct = alpha_from_sigmas(&st);
        let cal = calibrate_dataset(std::slice::from_ref(&img), 4, 8).unwrap();
        assert_eq!(cal.config.alphas(), &direct.alphas[..]);
    }

    #[test]
    fn identical_images_average_to_the_same_alpha() {
        let img = random_plane(64, 32, 10);
        let one = calibrate_dataset(std::slice::from_ref(&img), 4, 8).unwrap();
        let many = calibrate_dataset(&vec![img; 5], 4, 8).unwrap();
        assert_eq!(one.config, many.config);
    }

    #[test]
    fn ratio_averaging_in_ratio_space() {
        // Two images with per-channel ratios (8, 8) and (8, 32): channel 2
        // averages to 20 and floor(log2 20) = 4.
        //
        // Construct rows where segment values are controlled directly:
        // within a row, alternate segments (a,a,a,a) and (b,b,b,b) to move
        // the DC channel only, and sprinkle a channel-1 component with a
        // known spread via (c,-c,c,-c) patterns. Simpler: synthesize stats
        // by scaling one base image per channel is fiddly — instead call
        // the estimator math directly on synthetic sigma pairs.
        let imgs = [
            ChannelStats {
                sigma: vec![0.8, 0.1, 0.1, 0.1],
                count: 1,
            },
            ChannelStats {
                sigma: vec![0.8, 0.1, 0.025, 0.1],
                count: 1,
            },
        ];
        // Mean ratios: ch1 = (8+8)/2 = 8 → α=3; ch2 = (8+32)/2 = 20 → α=4.
        let mut sum = vec![0.0; 4];
        for st in &imgs {
            for j in 1..4 {
                sum[j] += st.sigma[0] / st.sigma[j];
            }
        }
        let alphas: Vec<u32> = (0..4)
            .map(|j| {
                if j == 0 {
                    0
                } else {
                    floor_log2_ratio(sum[j] / imgs.len() as f64)
                }
            })
            .collect();
        assert_eq!(alphas, vec![0, 3, 4, 3]);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert_eq!(calibrate_dataset(&[], 4, 8), Err(Error::EmptyDataset));
    }

    #[test]
    fn scale_invariance_of_alpha() {
        let img = random_plane(64, 32, 4);
        let cal = calibrate_dataset(std::slice::from_ref(&img), 4, 8).unwrap();
        for scale in [0.125, 0.5, 0.9] {
            let scaled = ImagePlane::from_fn(64, 32, |x, y| img.get(x, y) * scale);
            let cal_s = calibrate_dataset(std::slice::from_ref(&scaled), 4, 8).unwrap();
            assert_eq!(cal_s.config.alphas(), cal.config.alphas(), "scale {scale}");
        }
    }

    #[test]
    fn alpha_monotone_in_sigma() {
        // Decreasing σ_j (holding σ_0) never decreases α_j.
        let mut prev = 0;
        for s in [0.2, 0.1, 0.05, 0.01, 0.001] {
            let st = ChannelStats {
                sigma: vec![0.8, s, 0.8, 0.8],
                count: 1,
            };
            let a = alpha_from_sigmas(&st).alphas[1];
            assert!(a >= prev, "sigma {s}: alpha {a} < {prev}");
            prev = a;
        }
    }

    #[test]
    fn clamp_applies_on_extreme_ratios() {
        let st = ChannelStats {
            sigma: vec![0.9, 1e-9, 0.0, 0.9],
            count: 1,
        };
        let est = alpha_from_sigmas(&st);
        assert_eq!(est.alphas[1], ALPHA_MAX);
        assert_eq!(est.alphas[2], ALPHA_MAX);
    }
}
