//! Image quality metrics: PSNR and SSIM on normalized planes.

use crate::error::{Error, Result};
use crate::image::ImagePlane;
use crate::par;

/// SSIM window size.
pub const SSIM_WINDOW: usize = 11;
/// Gaussian window spread.
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;
/// Dynamic range of normalized planes.
pub const SSIM_L: f64 = 1.0;

/// PSNR and SSIM for an image pair, with the per-color breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Pooled PSNR over all planes; `f64::INFINITY` for identical images.
    pub psnr_db: f64,
    /// Mean SSIM over planes; 1.0 for identical images.
    pub ssim: f64,
    /// Per-plane (psnr, ssim).
    pub per_color: Vec<(f64, f64)>,
}

impl QualityReport {
    pub fn compare(a: &[ImagePlane], b: &[ImagePlane]) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::ChannelCountMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let mut per_color = Vec::with_capacity(a.len());
        let mut se_sum = 0.0f64;
        let mut n = 0usize;
        let mut ssim_sum = 0.0f64;
        for (pa, pb) in a.iter().zip(b) {
            let p = psnr(pa, pb)?;
            let s = ssim(pa, pb)?;
            per_color.push((p, s));
            se_sum += squared_error_sum(pa, pb)?;
            n += pa.data().len();
            ssim_sum += s;
        }
        let mse = se_sum / n as f64;
        let psnr_db = if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (1.0 / mse).log10()
        };
        Ok(Self {
            psnr_db,
            ssim: ssim_sum / a.len() as f64,
            per_color,
        })
    }
}

fn squared_error_sum(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum())
}

/// Peak signal-to-noise ratio in dB with peak 1.0 (the normalized-domain
/// equivalent of 255 for 8-bit sources). Identical images return the
/// `f64::INFINITY` sentinel.
pub fn psnr(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    let se = squared_error_sum(a, b)?;
    let mse = se / a.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0f64; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *v;
    }
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Horizontal pass of the separable Gaussian over the valid region.
fn filter_rows(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let out_w = w - SSIM_WINDOW + 1;
    let rows = par::map_indexed(h, |y| {
        let row = &src[y * w..(y + 1) * w];
        let mut out = Vec::with_capacity(out_w);
        for x in 0..out_w {
            let mut acc = 0.0;
            for (t, &kv) in k.iter().enumerate() {
                acc += kv * row[x + t];
            }
            out.push(acc);
        }
        out
    });
    rows.concat()
}

/// Vertical pass over the row-filtered field.
fn filter_cols(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let out_h = h - SSIM_WINDOW + 1;
    let rows = par::map_indexed(out_h, |y| {
        let mut out = Vec::with_capacity(w);
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &kv) in k.iter().enumerate() {
                acc += kv * src[(y + t) * w + x];
            }
            out.push(acc);
        }
        out
    });
    rows.concat()
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// K1 = 0.01, K2 = 0.03, L = 1, averaged over all fully-covered window
/// positions. Symmetric in its arguments and exactly 1 for identical
/// planes.
pub fn ssim(a: &ImagePlane, b: &ImagePlane) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall(w.min(h), SSIM_WINDOW));
    }

    let k = gaussian_kernel();
    let x = a.data();
    let y = b.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(u, v)| u * v).collect();

    let out_w = w - SSIM_WINDOW + 1;
    let filt = |field: &[f64]| filter_cols(&filter_rows(field, w, h, &k), out_w, h, &k);
    let mu_x = filt(x);
    let mu_y = filt(y);
    let e_xx = filt(&xx);
    let e_yy = filt(&yy);
    let e_xy = filt(&xy);

    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let mut sum = 0.0f64;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        sum += num / den;
    }
    Ok(sum / mu_x.len() as f64)
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

    #[test]
    fn identical_images_hit_the_sentinels() {
        let img = random_plane(32, 32, 1);
        assert_eq!(psnr(&img, &img).unwrap(), f64::INFINITY);
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
        let report = QualityReport::compare(
            std::slice::from_ref(&img),
            std::slice::from_ref(&img),
        )
        .unwrap();
        assert_eq!(report.psnr_db, f64::INFINITY);
        assert_eq!(report.ssim, 1.0);
    }

    #[test]
    fn constant_shift_gives_twenty_db() {
        // Interior values, so the +0.1 shift never clips: MSE = 0.01.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = ImagePlane::from_fn(64, 64, |_, _| 0.2 + 0.6 * rng.random::<f64>());
        let b = ImagePlane::from_fn(64, 64, |x, y| a.get(x, y) + 0.1);
        let p = psnr(&a, &b).unwrap();
        assert!((p - 20.0).abs() < 1e-6, "psnr = {p}");
    }

    #[test]
    fn uniform_noise_matches_analytic_mse() {
        // Error uniform in [-Δ/2, Δ/2] has MSE Δ²/12, so
        // PSNR ≈ 10·log10(12/Δ²).
        let delta = 0.05;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ImagePlane::from_fn(512, 512, |_, _| 0.1 + 0.8 * rng.random::<f64>());
        let b = ImagePlane::from_fn(512, 512, |x, y| {
            a.get(x, y) + delta * (rng.random::<f64>() - 0.5)
        });
        let expected = 10.0 * (12.0 / (delta * delta)).log10();
        let p = psnr(&a, &b).unwrap();
        assert!((p - expected).abs() < 0.2, "psnr {p} vs {expected}");
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = random_plane(16, 16, 4);
        let b = random_plane(16, 15, 5);
        assert!(psnr(&a, &b).is_err());
        assert!(ssim(&a, &b).is_err());
    }

    #[test]
    fn ssim_needs_a_full_window() {
        let a = random_plane(10, 32, 6);
        assert_eq!(ssim(&a, &a), Err(Error::ImageTooSmall(10, SSIM_WINDOW)));
    }

    #[test]
    fn inverted_binary_image_scores_strongly_negative() {
        // 4x4 checker blocks: every window sees anti-correlated structure.
        let a = ImagePlane::from_fn(64, 64, |x, y| (((x / 4) + (y / 4)) % 2) as f64);
        let b = ImagePlane::from_fn(64, 64, |x, y| 1.0 - a.get(x, y));
        let s = ssim(&a, &b).unwrap();
        assert!(s < -0.5, "ssim = {s}");
    }

    #[test]
    fn symmetry() {
        let a = random_plane(48, 40, 7);
        let b = random_plane(48, 40, 8);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
        let sa = ssim(&a, &b).unwrap();
        let sb = ssim(&b, &a).unwrap();
        assert!((sa - sb).abs() < 1e-12);
    }

    #[test]
    fn psnr_decreases_with_noise_amplitude() {
        let a = random_plane(128, 128, 9);
        let mut last = f64::INFINITY;
        for (i, amp) in [0.01, 0.05, 0.2].iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(10 + i as u64);
            let b = ImagePlane::from_fn(128, 128, |x, y| {
                (a.get(x, y) + amp * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0)
            });
            let p = psnr(&a, &b).unwrap();
            assert!(p < last, "amp {amp}: {p} !< {last}");
            last = p;
        }
    }

    /// Independent SSIM reference: direct 2-D windowed sums, no
    /// separability, no shared code with the implementation above.
    fn ssim_reference(a: &ImagePlane, b: &ImagePlane) -> f64 {
        let mut kernel = [[0.0f64; SSIM_WINDOW]; SSIM_WINDOW];
        let c = (SSIM_WINDOW / 2) as f64;
        let mut ksum = 0.0;
        for (i, row) in kernel.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - c, j as f64 - c);
                *v = (-(di * di + dj * dj) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
                ksum += *v;
            }
        }
        for row in kernel.iter_mut() {
            for v in row.iter_mut() {
                *v /= ksum;
            }
        }

        let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
        let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
        let mut total = 0.0;
        let mut count = 0usize;
        for wy in 0..=(a.height() - SSIM_WINDOW) {
            for wx in 0..=(a.width() - SSIM_WINDOW) {
                let (mut mx, mut my) = (0.0, 0.0);
                for i in 0..SSIM_WINDOW {
                    for j in 0..SSIM_WINDOW {
                        mx += kernel[i][j] * a.get(wx + j, wy + i);
                        my += kernel[i][j] * b.get(wx + j, wy + i);
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..SSIM_WINDOW {
                    for j in 0..SSIM_WINDOW {
                        let dx = a.get(wx + j, wy + i) - mx;
                        let dy = b.get(wx + j, wy + i) - my;
                        vx += kernel[i][j] * dx * dx;
                        vy += kernel[i][j] * dy * dy;
                        cov += kernel[i][j] * dx * dy;
                    }
                }
                total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn agrees_with_independent_reference() {
        let a = random_plane(48, 36, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = ImagePlane::from_fn(48, 36, |x, y| {
            (a.get(x, y) + 0.1 * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0)
        });
        let fast = ssim(&a, &b).unwrap();
        let reference = ssim_reference(&a, &b);
        assert!(
            (fast - reference).abs() < 1e-6,
            "fast {fast} vs reference {reference}"
        );
    }
}
