//! Simulated-misalignment evaluation of IMF estimators.
//!
//! For a pair `(src, ref)` and misalignment `n_c`, the table is estimated
//! from the shifted overlap crops, completed, applied to the full `src`
//! image, and the result is scored against the full `ref` image. Every
//! pair is evaluated in both directions.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::apply::apply_imf;
use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::image::{decode_image, simulate_overlap, Image};
use crate::metrics::{psnr, ssim, time_op, EvalRecord};

/// Misalignments swept by default.
pub const DEFAULT_NC_LIST: [usize; 9] = [0, 2, 4, 6, 8, 10, 12, 14, 16];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// First image of the pair corrected towards the second.
    AToB,
    BToA,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::AToB => "a_to_b",
            Direction::BToA => "b_to_a",
        }
    }
}

/// Estimate on the misaligned crops, apply to the whole source, score against the whole reference.
pub fn evaluate(src: &Image, reference: &Image, method: Method, n_c: usize, with_ssim: bool) -> Result<EvalRecord> {
    let (crop_src, crop_ref) = simulate_overlap(src, reference, n_c)?;
    let (mapped, seconds) = time_op(|| -> Result<Image> {
        let tables = method.estimate_total(&crop_src, &crop_ref)?;
        apply_imf(src, &tables)
    });
    let mapped = mapped?;
    Ok(EvalRecord {
        estimator: method.name().to_string(),
        n_c,
        psnr: psnr(&mapped, reference)?,
        ssim: if with_ssim { ssim(&mapped, reference)? } else { f64::NAN },
        seconds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub pair: usize,
    pub direction: Direction,
    pub record: EvalRecord,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub methods: Vec<Method>,
    pub nc_list: Vec<usize>,
    pub ssim: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { methods: Method::ALL.to_vec(), nc_list: DEFAULT_NC_LIST.to_vec(), ssim: true }
    }
}

/// One record per (pair, direction, method, n_c), in that sort order.
pub fn sweep(pairs: &[(Image, Image)], cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let per_pair: Vec<Vec<SweepRecord>> = pairs
        .par_iter()
        .enumerate()
        .map(|(pair, (a, b))| {
            let mut out = Vec::new();
            for direction in [Direction::AToB, Direction::BToA] {
                let (src, reference) = match direction {
                    Direction::AToB => (a, b),
                    Direction::BToA => (b, a),
                };
                for &method in &methods {
                    for &n_c in &cfg.nc_list {
                        let record = evaluate(src, reference, method, n_c, cfg.ssim)?;
                        out.push(SweepRecord { pair, direction, record });
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

/// Means per (method, n_c), labelled `mean:<method>`, in first-seen order.
pub fn aggregate(records: &[SweepRecord]) -> Vec<EvalRecord> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in records {
        let k = (r.record.estimator.clone(), r.record.n_c);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.sort();
    keys.into_iter()
        .map(|(estimator, n_c)| {
            let group: Vec<&EvalRecord> =
                records.iter().map(|r| &r.record).filter(|r| r.estimator == estimator && r.n_c == n_c).collect();
            let n = group.len() as f64;
            let mean = |f: fn(&EvalRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            EvalRecord {
                estimator: format!("mean:{estimator}"),
                n_c,
                psnr: mean(|r| r.psnr),
                ssim: mean(|r| r.ssim),
                seconds: mean(|r| r.seconds),
            }
        })
        .collect()
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "jpg" | "jpeg")
    )
}

/// Finds image pairs under `dir`: every subdirectory holding exactly two
/// PNG/JPEG files is one pair (file-name order gives `a` then `b`).
pub fn discover_pairs(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let dir = dir.as_ref();
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    let mut pairs = Vec::new();
    for sub in subdirs {
        let mut files: Vec<PathBuf> = fs::read_dir(&sub)
            .map_err(|e| Error::io(&sub, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        files.sort();
        match files.len() {
            2 => {
                let name = sub.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let b = files.pop().unwrap();
                let a = files.pop().unwrap();
                pairs.push((name, a, b));
            }
            0 => {}
            n => log::warn!("skipping {}: {n} images, expected 2", sub.display()),
        }
    }
    if pairs.is_empty() {
        return Err(Error::Config(format!("no image pairs found under {}", dir.display())));
    }
    Ok(pairs)
}

pub fn load_pairs(found: &[(String, PathBuf, PathBuf)]) -> Result<Vec<(Image, Image)>> {
    found.iter().map(|(_, a, b)| Ok((decode_image(a)?, decode_image(b)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{exposure_pair, rng, Curve, PairParams};

    #[test]
    fn record_count_and_order() {
        let p = PairParams { width: 40, height: 40, channels: 1, noise: 1.0 };
        let pair = exposure_pair(&mut rng(2), Curve::Gamma { gamma: 0.6 }, &p);
        let cfg = SweepConfig { methods: vec![Method::Gc, Method::Wha], nc_list: DEFAULT_NC_LIST.to_vec(), ssim: false };
        let recs = sweep(&[(pair.a, pair.b)], &cfg).unwrap();
        assert_eq!(recs.len(), 2 * 2 * 9);
        let keys: Vec<_> = recs.iter().map(|r| (r.pair, r.direction, r.record.estimator.clone(), r.record.n_c)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|a, b| (a.0, a.1, Method::from_str_lossy(&a.2), a.3).cmp(&(b.0, b.1, Method::from_str_lossy(&b.2), b.3)));
        assert_eq!(keys, sorted);
        let agg = aggregate(&recs);
        assert_eq!(agg.len(), 18);
        assert!(agg.iter().all(|r| r.estimator.starts_with("mean:")));
    }

    impl Method {
        fn from_str_lossy(s: &str) -> Method {
            s.parse().unwrap()
        }
    }

    #[test]
    fn aligned_identity_pair_is_perfect() {
        let p = PairParams { width: 32, height: 32, channels: 3, noise: 0.0 };
        let pair = exposure_pair(&mut rng(5), Curve::Shift { offset: 0.0 }, &p);
        for m in Method::ALL {
            let r = evaluate(&pair.a, &pair.b, m, 0, true).unwrap();
            assert_eq!(r.psnr, f64::INFINITY, "{m}");
            assert!((r.ssim - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover_pairs(dir.path()).is_err());
    }
}
