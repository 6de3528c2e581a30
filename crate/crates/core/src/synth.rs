//! Deterministic synthetic exposure data with known ground-truth curves.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::apply::apply_lut;
use crate::complete::quantize_value;
use crate::image::{ChannelPlane, Image, RegionRect, LEVELS};
use crate::pano::OverlapPair;
use crate::table::ImfTable;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tone curves relating two exposures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Curve {
    /// `255 * (z / 255)^gamma`; gamma below 1 brightens.
    Gamma { gamma: f64 },
    /// Logistic contrast curve rescaled to pass through 0 and 255.
    Sigmoid { gain: f64 },
    /// `z + offset`, clamped.
    Shift { offset: f64 },
    /// `gain * z + offset`, clamped.
    Affine { gain: f64, offset: f64 },
}

impl Curve {
    pub fn eval(&self, z: f64) -> f64 {
        let v = match *self {
            Curve::Gamma { gamma } => 255.0 * (z / 255.0).powf(gamma),
            Curve::Sigmoid { gain } => {
                let s = |t: f64| 1.0 / (1.0 + (-gain * (t - 0.5)).exp());
                let (lo, hi) = (s(0.0), s(1.0));
                255.0 * (s(z / 255.0) - lo) / (hi - lo)
            }
            Curve::Shift { offset } => z + offset,
            Curve::Affine { gain, offset } => gain * z + offset,
        };
        v.clamp(0.0, 255.0)
    }

    /// Integer lookup table, rounded half-up.
    pub fn lut(&self) -> [u8; LEVELS] {
        std::array::from_fn(|z| quantize_value(self.eval(z as f64)))
    }

    /// The integer curve as a total table.
    pub fn table(&self) -> ImfTable {
        let lut = self.lut();
        ImfTable::from_fn(|z| f64::from(lut[z as usize]))
    }

    pub fn apply(&self, img: &Image) -> Image {
        let lut = self.lut();
        Image::from_planes(img.channels().iter().map(|c| apply_lut(c, &lut)).collect()).expect("same shape")
    }

    pub fn kind(&self) -> CurveKind {
        match self {
            Curve::Gamma { .. } => CurveKind::Gamma,
            Curve::Sigmoid { .. } => CurveKind::Sigmoid,
            Curve::Shift { .. } => CurveKind::Shift,
            Curve::Affine { .. } => CurveKind::Affine,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveKind {
    Gamma,
    Sigmoid,
    Shift,
    Affine,
}

impl CurveKind {
    /// A random curve of this kind whose strength is drawn from a fixed range.
    pub fn sample(self, rng: &mut impl Rng) -> Curve {
        match self {
            CurveKind::Gamma => {
                let g: f64 = rng.random_range(0.35..0.75);
                Curve::Gamma { gamma: if rng.random_bool(0.5) { g } else { 1.0 / g } }
            }
            CurveKind::Sigmoid => Curve::Sigmoid { gain: rng.random_range(4.0..10.0) },
            CurveKind::Shift => Curve::Shift { offset: rng.random_range(-60.0..60.0f64).round() },
            CurveKind::Affine => Curve::Affine { gain: rng.random_range(1.5..3.0), offset: rng.random_range(-40.0..0.0) },
        }
    }

    /// A curve of this kind with its main parameter fixed: gamma, gain or
    /// offset (affine curves get `gain = p`, `offset = 0`).
    pub fn with_param(self, p: f64) -> Curve {
        match self {
            CurveKind::Gamma => Curve::Gamma { gamma: p },
            CurveKind::Sigmoid => Curve::Sigmoid { gain: p },
            CurveKind::Shift => Curve::Shift { offset: p },
            CurveKind::Affine => Curve::Affine { gain: p, offset: 0.0 },
        }
    }
}

impl FromStr for CurveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gamma" => Ok(CurveKind::Gamma),
            "sigmoid" => Ok(CurveKind::Sigmoid),
            "shift" => Ok(CurveKind::Shift),
            "affine" => Ok(CurveKind::Affine),
            other => Err(format!("unknown curve '{other}' (expected gamma, sigmoid, shift or affine)")),
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveKind::Gamma => "gamma",
            CurveKind::Sigmoid => "sigmoid",
            CurveKind::Shift => "shift",
            CurveKind::Affine => "affine",
        })
    }
}

/// Separable Gaussian blur with replicated borders.
fn blur(field: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; src.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let d = k as isize - r;
                    let (sx, sy) = if horizontal {
                        ((x as isize + d).clamp(0, w as isize - 1) as usize, y)
                    } else {
                        (x, (y as isize + d).clamp(0, h as isize - 1) as usize)
                    };
                    acc += kv * src[sy * w + sx];
                }
                out[y * w + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(field, true), false)
}

/// Band-limited noise at a few pixel scales, normalized to mean 0.5 and
/// standard deviation 0.18 (so mostly inside `[0, 1]`). Stationary, with
/// texture that decorrelates over shifts of a handful of pixels.
pub fn texture_field(rng: &mut impl Rng, w: usize, h: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = vec![0.0; w * h];
    for (sigma, weight) in [(1.0, 1.0), (2.0, 1.0)] {
        let white: Vec<f64> = (0..w * h).map(|_| normal.sample(rng)).collect();
        let smooth = blur(&white, w, h, sigma);
        for (o, v) in out.iter_mut().zip(smooth) {
            *o += weight * sigma * v;
        }
    }
    let n = out.len().max(1) as f64;
    let mean = out.iter().sum::<f64>() / n;
    let sd = (out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-12);
    out.iter_mut().for_each(|v| *v = 0.5 + 0.18 * (*v - mean) / sd);
    out
}

/// Maps a field to 8 bits by rank so that the 256 levels are equally
/// populated (every level present when there are at least 256 pixels).
pub fn equalized_plane(field: &[f64], w: usize, h: usize) -> ChannelPlane {
    let n = field.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| field[a].total_cmp(&field[b]).then(a.cmp(&b)));
    let mut data = vec![0u8; n];
    for (rank, &i) in order.iter().enumerate() {
        data[i] = (rank * LEVELS / n) as u8;
    }
    ChannelPlane::new(w, h, data).expect("field matches size")
}

/// A textured master image with every level present in every channel.
pub fn master_image(rng: &mut impl Rng, w: usize, h: usize, channels: usize) -> Image {
    let shared = texture_field(rng, w, h);
    let planes = (0..channels)
        .map(|_| {
            let own = texture_field(rng, w, h);
            let mixed: Vec<f64> = shared.iter().zip(&own).map(|(a, b)| 0.7 * a + 0.3 * b).collect();
            equalized_plane(&mixed, w, h)
        })
        .collect();
    Image::from_planes(planes).expect("valid channel count")
}

/// Adds rounded Gaussian noise of standard deviation `sigma`, clamped to 8 bits.
pub fn add_noise(img: &Image, sigma: f64, rng: &mut impl Rng) -> Image {
    if sigma <= 0.0 {
        return img.clone();
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let planes = img
        .channels()
        .iter()
        .map(|c| {
            let data = c.data().iter().map(|&v| quantize_value(f64::from(v) + normal.sample(rng))).collect();
            ChannelPlane::new(c.width(), c.height(), data).expect("same size")
        })
        .collect();
    Image::from_planes(planes).expect("same shape")
}

/// Two exposures of one scene: `a` is the noisy master, `b` the noisy
/// master passed through `curve`.
#[derive(Clone, Debug)]
pub struct SynthPair {
    pub a: Image,
    pub b: Image,
    pub curve: Curve,
}

#[derive(Clone, Copy, Debug)]
pub struct PairParams {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub noise: f64,
}

impl Default for PairParams {
    fn default() -> Self {
        Self { width: 384, height: 384, channels: 3, noise: 1.0 }
    }
}

pub fn exposure_pair(rng: &mut impl Rng, curve: Curve, p: &PairParams) -> SynthPair {
    let master = master_image(rng, p.width, p.height, p.channels);
    let b = add_noise(&curve.apply(&master), p.noise, rng);
    let a = add_noise(&master, p.noise, rng);
    SynthPair { a, b, curve }
}

/// Three overlapping crops of one radiance scene, each at its own exposure.
#[derive(Clone, Debug)]
pub struct SynthTriple {
    pub images: Vec<Image>,
    pub overlaps: Vec<OverlapPair>,
    /// Scene exposure multipliers of the three crops.
    pub exposures: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct TripleParams {
    pub tile_width: usize,
    pub height: usize,
    pub overlap: usize,
    pub channels: usize,
    pub exposures: [f64; 3],
    pub noise: f64,
}

impl Default for TripleParams {
    fn default() -> Self {
        Self { tile_width: 96, height: 96, overlap: 32, channels: 3, exposures: [0.25, 1.0, 4.0], noise: 0.5 }
    }
}

pub const DISPLAY_GAMMA: f64 = 2.2;

/// Display encoding of a linear radiance value at a given exposure.
pub fn expose(radiance: f64, exposure: f64) -> f64 {
    255.0 * (radiance * exposure).clamp(0.0, 1.0).powf(1.0 / DISPLAY_GAMMA)
}

/// A wide scene in linear radiance, log-uniform between roughly 1/32 and 2.
pub fn radiance_scene(rng: &mut impl Rng, w: usize, h: usize, channels: usize) -> Vec<Vec<f64>> {
    let shared = texture_field(rng, w, h);
    (0..channels)
        .map(|_| {
            let own = texture_field(rng, w, h);
            shared.iter().zip(&own).map(|(a, b)| (2f64).powf(-5.0 + 6.0 * (0.8 * a + 0.2 * b).clamp(0.0, 1.0))).collect()
        })
        .collect()
}

/// Renders a radiance scene into three exposure-bracketed, overlapping tiles.
pub fn bracketed_triple_from(scene: &[Vec<f64>], scene_width: usize, p: &TripleParams, rng: &mut impl Rng) -> SynthTriple {
    let stride = p.tile_width - p.overlap;
    let mut images = Vec::new();
    for (i, &e) in p.exposures.iter().enumerate() {
        let x0 = i * stride;
        let planes = scene
            .iter()
            .map(|rad| ChannelPlane::from_fn(p.tile_width, p.height, |x, y| quantize_value(expose(rad[y * scene_width + x0 + x], e))))
            .collect();
        let img = Image::from_planes(planes).expect("valid channels");
        images.push(add_noise(&img, p.noise, rng));
    }
    let overlaps = vec![
        OverlapPair {
            a_rect: RegionRect::new(stride, 0, p.overlap, p.height),
            b_rect: RegionRect::new(0, 0, p.overlap, p.height),
        };
        2
    ];
    SynthTriple { images, overlaps, exposures: p.exposures.to_vec() }
}

pub fn bracketed_triple(rng: &mut impl Rng, p: &TripleParams) -> SynthTriple {
    let width = 3 * p.tile_width - 2 * p.overlap;
    let scene = radiance_scene(rng, width, p.height, p.channels);
    bracketed_triple_from(&scene, width, p, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::histogram;

    #[test]
    fn master_has_every_level() {
        let img = master_image(&mut rng(1), 64, 64, 3);
        for c in img.channels() {
            let h = histogram(c);
            assert!(h.bins().iter().all(|&b| b == 16));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let p = PairParams::default();
        let a = exposure_pair(&mut rng(7), Curve::Gamma { gamma: 0.5 }, &p);
        let b = exposure_pair(&mut rng(7), Curve::Gamma { gamma: 0.5 }, &p);
        assert_eq!(a.a, b.a);
        assert_eq!(a.b, b.b);
    }

    #[test]
    fn gamma_below_one_brightens_midtones() {
        let c = Curve::Gamma { gamma: 0.5 };
        assert!(c.eval(64.0) > 64.0 && c.eval(128.0) > 128.0);
        assert_eq!(c.lut()[0], 0);
        assert_eq!(c.lut()[255], 255);
    }

    #[test]
    fn curves_are_monotone() {
        for curve in [
            Curve::Gamma { gamma: 2.2 },
            Curve::Sigmoid { gain: 8.0 },
            Curve::Shift { offset: -30.0 },
            Curve::Affine { gain: 2.0, offset: -20.0 },
        ] {
            assert!(curve.lut().windows(2).all(|w| w[0] <= w[1]), "{curve:?}");
            assert!(curve.table().is_total());
        }
    }

    #[test]
    fn triple_geometry() {
        let t = bracketed_triple(&mut rng(3), &TripleParams::default());
        assert_eq!(t.images.len(), 3);
        assert!(t.images.iter().all(|i| i.width() == 96 && i.height() == 96));
        assert!(t.images[0].mean() < t.images[1].mean() && t.images[1].mean() < t.images[2].mean());
    }
}
