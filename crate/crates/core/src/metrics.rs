//! Quality and timing metrics for evaluation runs.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ChannelPlane, Image};

pub const PEAK: f64 = 255.0;

/// SSIM constants, recorded in run metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

pub const SSIM_PARAMS: SsimParams = SsimParams { window: 11, sigma: 1.5, k1: 0.01, k2: 0.03, dynamic_range: PEAK };

fn check_shape(a: &Image, b: &Image) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channel_count(),
            b.width(),
            b.height(),
            b.channel_count()
        )))
    }
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_shape(a, b)?;
    let mut sum = 0u64;
    let mut n = 0u64;
    for (pa, pb) in a.channels().iter().zip(b.channels()) {
        for (&x, &y) in pa.data().iter().zip(pb.data()) {
            let d = u64::from(x.abs_diff(y));
            sum += d * d;
        }
        n += pa.data().len() as u64;
    }
    Ok(if n == 0 { 0.0 } else { sum as f64 / n as f64 })
}

/// PSNR in dB with the squared error pooled over all pixels and channels.
/// Identical images give `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 { f64::INFINITY } else { 10.0 * (PEAK * PEAK / m).log10() })
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let k: Vec<f64> = (0..size).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable 'valid' filtering: output is `(w - n + 1) x (h - n + 1)`.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let ow = w - n + 1;
    let oh = h - n + 1;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                acc += kv * tmp[(y + i) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

fn ssim_plane(a: &ChannelPlane, b: &ChannelPlane, p: &SsimParams) -> f64 {
    let (w, h) = (a.width(), a.height());
    let k = gaussian_kernel(p.window, p.sigma);
    let x: Vec<f64> = a.data().iter().map(|&v| f64::from(v)).collect();
    let y: Vec<f64> = b.data().iter().map(|&v| f64::from(v)).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let mx = filter_valid(&x, w, h, &k);
    let my = filter_valid(&y, w, h, &k);
    let sxx = filter_valid(&xx, w, h, &k);
    let syy = filter_valid(&yy, w, h, &k);
    let sxy = filter_valid(&xy, w, h, &k);
    let c1 = (p.k1 * p.dynamic_range).powi(2);
    let c2 = (p.k2 * p.dynamic_range).powi(2);
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cov = sxy[i] - ux * uy;
        total += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    total / mx.len() as f64
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), computed per
/// channel over the fully covered window positions and averaged.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_shape(a, b)?;
    let p = SSIM_PARAMS;
    if a.width() < p.window || a.height() < p.window {
        return Err(Error::TooSmallForWindow { width: a.width(), height: a.height(), window: p.window });
    }
    let sum: f64 = a.channels().iter().zip(b.channels()).map(|(x, y)| ssim_plane(x, y, &p)).sum();
    Ok(sum / a.channel_count() as f64)
}

/// Runs `f` and returns its output with the elapsed wall time in seconds.
pub fn time_op<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimingStats {
    pub runs: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
}

/// Times `runs` repetitions of `f`.
pub fn time_repeated(runs: usize, mut f: impl FnMut()) -> TimingStats {
    let samples: Vec<f64> = (0..runs.max(1)).map(|_| time_op(&mut f).1).collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    TimingStats { runs: samples.len(), mean, variance, min }
}

/// One evaluation row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub estimator: String,
    pub n_c: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub seconds: f64,
}

/// Writes records as CSV with header `estimator,n_c,psnr,ssim,seconds`.
pub fn write_records<W: Write>(w: W, records: &[EvalRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| Error::TableFormat(e.to_string()))?;
    }
    if records.is_empty() {
        wr.write_record(["estimator", "n_c", "psnr", "ssim", "seconds"])
            .map_err(|e| Error::TableFormat(e.to_string()))?;
    }
    wr.flush().map_err(|e| Error::TableFormat(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat(w: usize, h: usize, v: u8) -> Image {
        Image::gray(ChannelPlane::filled(w, h, v))
    }

    fn textured(seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::gray(ChannelPlane::from_fn(32, 32, |x, y| ((x * 7 + y * 3) as u8).wrapping_add(rng.random_range(0..20))))
    }

    #[test]
    fn psnr_closed_forms() {
        assert_eq!(psnr(&flat(4, 4, 9), &flat(4, 4, 9)).unwrap(), f64::INFINITY);
        assert_eq!(psnr(&flat(1, 1, 0), &flat(1, 1, 255)).unwrap(), 0.0);
        let p = psnr(&flat(3, 3, 0), &flat(3, 3, 1)).unwrap();
        assert!((p - 10.0 * 65025f64.log10()).abs() < 1e-12);
        assert!((p - 48.13).abs() < 0.01);
        assert!(psnr(&flat(3, 3, 0), &flat(3, 4, 0)).is_err());
    }

    #[test]
    fn psnr_symmetric() {
        let (a, b) = (textured(1), textured(2));
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn psnr_falls_with_noise() {
        let base = textured(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut last = f64::INFINITY;
        for amp in [2i32, 6, 12, 24] {
            let noisy = Image::gray(
                ChannelPlane::new(
                    32,
                    32,
                    base.channel(0).data().iter().map(|&v| (i32::from(v) + rng.random_range(-amp..=amp)).clamp(0, 255) as u8).collect(),
                )
                .unwrap(),
            );
            let p = psnr(&base, &noisy).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn ssim_identity_and_size() {
        let a = textured(4);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(ssim(&flat(10, 20, 0), &flat(10, 20, 0)), Err(Error::TooSmallForWindow { .. })));
    }

    #[test]
    fn ssim_constant_patches_luminance_only() {
        let (v1, v2) = (60.0, 90.0);
        let c1 = (0.01f64 * 255.0).powi(2);
        let expected = (2.0 * v1 * v2 + c1) / (v1 * v1 + v2 * v2 + c1);
        let got = ssim(&flat(16, 16, 60), &flat(16, 16, 90)).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn ssim_decreases_with_offset() {
        let base = textured(5);
        let shifted = |d: u8| Image::gray(ChannelPlane::new(32, 32, base.channel(0).data().iter().map(|v| v.saturating_add(d)).collect()).unwrap());
        let s1 = ssim(&base, &shifted(2)).unwrap();
        let s2 = ssim(&base, &shifted(20)).unwrap();
        assert!(0.0 < s2 && s2 < s1 && s1 < 1.0);
    }

    #[test]
    fn timing() {
        let ((), s) = time_op(|| {});
        assert!(s < 1e-3);
        let stats = time_repeated(5, || {});
        assert_eq!(stats.runs, 5);
        assert!(stats.variance >= 0.0 && stats.mean < 1e-3);
    }

    #[test]
    fn records_csv() {
        let mut buf = Vec::new();
        write_records(
            &mut buf,
            &[EvalRecord { estimator: "wha".into(), n_c: 10, psnr: f64::INFINITY, ssim: 1.0, seconds: 0.25 }],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "estimator,n_c,psnr,ssim,seconds\nwha,10,inf,1.0,0.25\n");
    }
}
