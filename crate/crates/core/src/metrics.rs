//! Per-frame fidelity kernels: MSE, PSNR and SSIM on the luma plane.
//!
//! SSIM follows the usual definition with an 11x11 Gaussian window
//! (sigma 1.5), stride 1, evaluated only where the window fits inside the
//! frame, and averaged over all window positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::Frame;

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

/// SSIM weighting window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimWindow {
    #[default]
    #[serde(rename = "gaussian_11x11_sigma_1.5")]
    Gaussian11x11,
}

impl SsimWindow {
    pub fn size(self) -> usize {
        match self {
            SsimWindow::Gaussian11x11 => WINDOW,
        }
    }

    /// Normalized 1-D taps; the 2-D window is their outer product.
    fn taps(self) -> Vec<f64> {
        let size = self.size();
        let center = (size / 2) as f64;
        let raw: Vec<f64> = (0..size)
            .map(|i| {
                let x = i as f64 - center;
                (-(x * x) / (2.0 * SIGMA * SIGMA)).exp()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }
}

/// Constants behind PSNR and SSIM.
///
/// The SSIM dynamic range is not stored here; it is taken from the frames'
/// bit depth (`2^bit_depth - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub psnr_cap: f64,
    pub ssim_k1: f64,
    pub ssim_k2: f64,
    pub ssim_window: SsimWindow,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            psnr_cap: 100.0,
            ssim_k1: 0.01,
            ssim_k2: 0.03,
            ssim_window: SsimWindow::Gaussian11x11,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.psnr_cap > 0.0 && self.psnr_cap.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "psnr_cap must be positive, got {}",
                self.psnr_cap
            )));
        }
        for (name, k) in [("ssim_k1", self.ssim_k1), ("ssim_k2", self.ssim_k2)] {
            if !(k > 0.0 && k < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {k}")));
            }
        }
        Ok(())
    }
}

/// Mean of squared luma differences.
pub fn mse(a: &Frame, b: &Frame) -> Result<f64> {
    a.check_comparable(b)?;
    Ok(sum_squared_error(a.luma(), b.luma()) as f64 / a.luma().len() as f64)
}

fn sum_squared_error(a: &[u8], b: &[u8]) -> u64 {
    // Row-sized blocks keep the inner accumulator in u32 range.
    a.chunks(4096)
        .zip(b.chunks(4096))
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(&p, &q)| {
                    let d = p as i32 - q as i32;
                    (d * d) as u32
                })
                .sum::<u32>() as u64
        })
        .sum()
}

/// Peak signal-to-noise ratio in dB, capped at `cfg.psnr_cap`.
pub fn psnr(a: &Frame, b: &Frame, cfg: &MetricConfig) -> Result<f64> {
    let err = mse(a, b)?;
    Ok(psnr_from_mse(err, a.max_value(), cfg.psnr_cap))
}

pub(crate) fn psnr_from_mse(mse: f64, max: f64, cap: f64) -> f64 {
    if mse == 0.0 {
        return cap;
    }
    (10.0 * (max * max / mse).log10()).min(cap)
}

/// A frame with its windowed first and second moments precomputed, so that
/// comparing it against many partners only costs the cross term.
#[derive(Debug, Clone)]
pub struct PreparedFrame<'a> {
    frame: &'a Frame,
    mean: Vec<f64>,
    mean_sq: Vec<f64>,
}

impl<'a> PreparedFrame<'a> {
    pub fn new(frame: &'a Frame, cfg: &MetricConfig) -> Result<Self> {
        let size = cfg.ssim_window.size();
        if frame.width() < size || frame.height() < size {
            return Err(Error::FrameTooSmall {
                width: frame.width(),
                height: frame.height(),
                window: size,
            });
        }
        let taps = cfg.ssim_window.taps();
        let (w, h) = (frame.width(), frame.height());
        let x: Vec<f64> = frame.luma().iter().map(|&v| v as f64).collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        Ok(Self {
            frame,
            mean: blur_valid(&x, w, h, &taps),
            mean_sq: blur_valid(&xx, w, h, &taps),
        })
    }

    pub fn frame(&self) -> &'a Frame {
        self.frame
    }
}

/// Mean SSIM of the luma planes of `a` and `b`.
pub fn ssim(a: &Frame, b: &Frame, cfg: &MetricConfig) -> Result<f64> {
    a.check_comparable(b)?;
    let pa = PreparedFrame::new(a, cfg)?;
    if a.luma() == b.luma() {
        return ssim_prepared(&pa, &pa, cfg);
    }
    let pb = PreparedFrame::new(b, cfg)?;
    ssim_prepared(&pa, &pb, cfg)
}

/// SSIM between two prepared frames.
///
/// Bit-identical luma planes short-circuit to exactly 1.0, which is also
/// what the full evaluation yields for equal inputs.
pub fn ssim_prepared(a: &PreparedFrame<'_>, b: &PreparedFrame<'_>, cfg: &MetricConfig) -> Result<f64> {
    let (fa, fb) = (a.frame, b.frame);
    fa.check_comparable(fb)?;
    if std::ptr::eq(fa, fb) || fa.luma() == fb.luma() {
        return Ok(1.0);
    }
    let taps = cfg.ssim_window.taps();
    let (w, h) = (fa.width(), fa.height());
    let xy: Vec<f64> = fa
        .luma()
        .iter()
        .zip(fb.luma())
        .map(|(&p, &q)| p as f64 * q as f64)
        .collect();
    let cross = blur_valid(&xy, w, h, &taps);

    let range = fa.max_value();
    let c1 = (cfg.ssim_k1 * range).powi(2);
    let c2 = (cfg.ssim_k2 * range).powi(2);
    let mut total = 0.0;
    for (i, &exy) in cross.iter().enumerate() {
        let (mx, my) = (a.mean[i], b.mean[i]);
        let var_x = a.mean_sq[i] - mx * mx;
        let var_y = b.mean_sq[i] - my * my;
        let cov = exy - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        total += num / den;
    }
    Ok(total / cross.len() as f64)
}

/// Separable weighted sum over every full window position; output is
/// `(w - k + 1) x (h - k + 1)`.
fn blur_valid(src: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let ow = w - k + 1;
    let oh = h - k + 1;

    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        let line = &src[y * w..(y + 1) * w];
        let out = &mut rows[y * ow..(y + 1) * ow];
        for (t, &tap) in taps.iter().enumerate() {
            for (o, &s) in out.iter_mut().zip(&line[t..t + ow]) {
                *o += tap * s;
            }
        }
    }

    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        let dst = &mut out[y * ow..(y + 1) * ow];
        for (t, &tap) in taps.iter().enumerate() {
            let line = &rows[(y + t) * ow..(y + t + 1) * ow];
            for (o, &s) in dst.iter_mut().zip(line) {
                *o += tap * s;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(w: usize, h: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::from_luma(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
    }

    fn flat(v: u8) -> Frame {
        Frame::from_luma(16, 16, vec![v; 256]).unwrap()
    }

    #[test]
    fn mse_examples() {
        let a = noise(8, 8, 1);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&flat(0), &flat(255)).unwrap(), 65025.0);
        assert_eq!(mse(&flat(10), &flat(11)).unwrap(), 1.0);
    }

    #[test]
    fn psnr_examples() {
        let cfg = MetricConfig::default();
        let a = noise(8, 8, 2);
        assert_eq!(psnr(&a, &a, &cfg).unwrap(), 100.0);
        assert_eq!(psnr(&flat(0), &flat(255), &cfg).unwrap(), 0.0);
        let p = psnr(&flat(10), &flat(11), &cfg).unwrap();
        assert!((p - 48.1308).abs() < 1e-3, "{p}");
    }

    #[test]
    fn geometry_mismatch() {
        let cfg = MetricConfig::default();
        let a = Frame::from_luma(16, 16, vec![0; 256]).unwrap();
        let b = Frame::from_luma(16, 12, vec![0; 192]).unwrap();
        assert!(matches!(mse(&a, &b), Err(Error::GeometryMismatch(_))));
        assert!(psnr(&a, &b, &cfg).is_err());
        assert!(ssim(&a, &b, &cfg).is_err());
    }

    #[test]
    fn ssim_needs_full_window() {
        let a = Frame::from_luma(10, 16, vec![0; 160]).unwrap();
        assert!(matches!(
            ssim(&a, &a, &MetricConfig::default()),
            Err(Error::FrameTooSmall { window: 11, .. })
        ));
    }

    #[test]
    fn ssim_constant_images_closed_form() {
        // mu_x = 0, mu_y = 255, no variance: SSIM = C1 / (255^2 + C1).
        let s = ssim(&flat(0), &flat(255), &MetricConfig::default()).unwrap();
        let expected = 6.5025 / 65031.5025;
        assert!((s - expected).abs() < 1e-9, "{s} vs {expected}");
    }

    #[test]
    fn ssim_identity_without_shortcut() {
        let cfg = MetricConfig::default();
        let a = noise(24, 20, 5);
        let pa = PreparedFrame::new(&a, &cfg).unwrap();
        // Evaluate the full formula by blurring the cross term directly.
        let taps = cfg.ssim_window.taps();
        let xy: Vec<f64> = a.luma().iter().map(|&p| p as f64 * p as f64).collect();
        let cross = blur_valid(&xy, 24, 20, &taps);
        let c1 = (0.01f64 * 255.0).powi(2);
        let c2 = (0.03f64 * 255.0).powi(2);
        let mut total = 0.0;
        for (i, &exy) in cross.iter().enumerate() {
            let m = pa.mean[i];
            let v = pa.mean_sq[i] - m * m;
            let cov = exy - m * m;
            total += ((2.0 * m * m + c1) * (2.0 * cov + c2)) / ((m * m + m * m + c1) * (v + v + c2));
        }
        assert!((total / cross.len() as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_taps_normalized() {
        let taps = SsimWindow::Gaussian11x11.taps();
        assert_eq!(taps.len(), 11);
        assert!((taps.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(taps[0], taps[10]);
    }

    #[test]
    fn noise_amplitude_monotonicity() {
        let cfg = MetricConfig::default();
        let base = noise(32, 32, 9);
        let mut holds = 0;
        let seeds = 20;
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let offsets: Vec<f64> = (0..base.luma().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scores: Vec<(f64, f64)> = [0.0, 2.0, 4.0, 8.0, 16.0, 32.0]
                .iter()
                .map(|amp| {
                    let luma = base
                        .luma()
                        .iter()
                        .zip(&offsets)
                        .map(|(&v, o)| (v as f64 + amp * o).round().clamp(0.0, 255.0) as u8)
                        .collect();
                    let b = base.with_luma(luma).unwrap();
                    (mse(&base, &b).unwrap(), psnr(&base, &b, &cfg).unwrap())
                })
                .collect();
            if scores.windows(2).all(|p| p[0].0 <= p[1].0 && p[0].1 >= p[1].1) {
                holds += 1;
            }
        }
        assert!(holds >= 19, "monotone in {holds}/{seeds} seeds");
    }

    #[test]
    fn config_validation() {
        assert!(MetricConfig::default().validate().is_ok());
        let bad = MetricConfig {
            ssim_k1: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = MetricConfig {
            psnr_cap: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn kernels_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>(), w in 11usize..24, h in 11usize..24) {
            let cfg = MetricConfig::default();
            let a = noise(w, h, s1);
            let b = noise(w, h, s2);
            let ab = ssim(&a, &b, &cfg).unwrap();
            prop_assert_eq!(ab, ssim(&b, &a, &cfg).unwrap());
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
            prop_assert_eq!(psnr(&a, &b, &cfg).unwrap(), psnr(&b, &a, &cfg).unwrap());
            prop_assert!(psnr(&a, &b, &cfg).unwrap() <= cfg.psnr_cap);
            prop_assert_eq!(ssim(&a, &a, &cfg).unwrap(), 1.0);
        }
    }
}
