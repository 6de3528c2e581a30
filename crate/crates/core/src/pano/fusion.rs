//! Multi-scale exposure fusion.
//!
//! Each layer gets a per-pixel weight from local contrast, colour
//! saturation and well-exposedness. Weights are normalized across layers
//! and the layers are blended band by band over Laplacian pyramids, with
//! the weights smoothed by Gaussian pyramids of the same depth.

use rayon::prelude::*;
use serde::Serialize;

use crate::complete::quantize_value;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, Image};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FusionParams {
    pub contrast_exponent: f64,
    pub saturation_exponent: f64,
    pub exposure_exponent: f64,
    /// Width of the well-exposedness Gaussian around mid-grey, on a 0..1 scale.
    pub exposure_sigma: f64,
    /// Added to contrast and saturation so flat or grey regions keep an
    /// exposure-driven weight instead of collapsing to zero.
    pub floor: f64,
    /// Pyramid depth is `floor(log2(min dimension)) - depth_offset`, at least 1.
    pub depth_offset: u32,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            contrast_exponent: 1.0,
            saturation_exponent: 1.0,
            exposure_exponent: 1.0,
            exposure_sigma: 0.2,
            floor: 1e-3,
            depth_offset: 2,
        }
    }
}

impl FusionParams {
    pub fn depth_for(&self, width: usize, height: usize) -> usize {
        let m = width.min(height).max(1);
        let log2 = usize::BITS - 1 - m.leading_zeros();
        log2.saturating_sub(self.depth_offset).max(1) as usize
    }
}

#[derive(Clone, Debug)]
struct Grid {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Grid {
    fn from_plane(p: &ChannelPlane) -> Self {
        Self { w: p.width(), h: p.height(), v: p.data().iter().map(|&x| f64::from(x) / 255.0).collect() }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.w as isize - 1) as usize;
        let y = y.clamp(0, self.h as isize - 1) as usize;
        self.v[y * self.w + x]
    }

    fn downsample(&self) -> Grid {
        const K: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let (nw, nh) = (self.w.div_ceil(2), self.h.div_ceil(2));
        // horizontal pass at even columns, then vertical pass at even rows
        let mut tmp = vec![0.0; nw * self.h];
        for y in 0..self.h {
            for nx in 0..nw {
                let x = (2 * nx) as isize;
                tmp[y * nw + nx] = K.iter().enumerate().map(|(i, k)| k * self.at(x + i as isize - 2, y as isize)).sum();
            }
        }
        let t = Grid { w: nw, h: self.h, v: tmp };
        let mut v = vec![0.0; nw * nh];
        for ny in 0..nh {
            let y = (2 * ny) as isize;
            for x in 0..nw {
                v[ny * nw + x] = K.iter().enumerate().map(|(i, k)| k * t.at(x as isize, y + i as isize - 2)).sum();
            }
        }
        Grid { w: nw, h: nh, v }
    }

    /// Expands to `w x h`: even samples take 1-6-1 of their coarse
    /// neighbourhood, odd samples the mean of the two coarse neighbours.
    fn upsample(&self, w: usize, h: usize) -> Grid {
        let expand = |i: usize, get: &dyn Fn(isize) -> f64| -> f64 {
            let c = (i / 2) as isize;
            if i.is_multiple_of(2) {
                (get(c - 1) + 6.0 * get(c) + get(c + 1)) / 8.0
            } else {
                (get(c) + get(c + 1)) / 2.0
            }
        };
        let mut tmp = vec![0.0; w * self.h];
        for y in 0..self.h {
            for x in 0..w {
                tmp[y * w + x] = expand(x, &|cx| self.at(cx, y as isize));
            }
        }
        let t = Grid { w, h: self.h, v: tmp };
        let mut v = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                v[y * w + x] = expand(y, &|cy| t.at(x as isize, cy));
            }
        }
        Grid { w, h, v }
    }
}

fn gaussian_pyramid(g: Grid, depth: usize) -> Vec<Grid> {
    let mut levels = vec![g];
    while levels.len() < depth {
        let next = levels.last().unwrap().downsample();
        levels.push(next);
    }
    levels
}

fn laplacian_pyramid(g: Grid, depth: usize) -> Vec<Grid> {
    let gauss = gaussian_pyramid(g, depth);
    let mut out = Vec::with_capacity(depth);
    for i in 0..depth - 1 {
        let up = gauss[i + 1].upsample(gauss[i].w, gauss[i].h);
        let v = gauss[i].v.iter().zip(&up.v).map(|(a, b)| a - b).collect();
        out.push(Grid { w: gauss[i].w, h: gauss[i].h, v });
    }
    out.push(gauss[depth - 1].clone());
    out
}

fn collapse(mut pyr: Vec<Grid>) -> Grid {
    let mut acc = pyr.pop().expect("non-empty pyramid");
    while let Some(band) = pyr.pop() {
        let up = acc.upsample(band.w, band.h);
        let v = band.v.iter().zip(&up.v).map(|(a, b)| a + b).collect();
        acc = Grid { w: band.w, h: band.h, v };
    }
    acc
}

fn raw_weight(layer: &Image, p: &FusionParams) -> Vec<f64> {
    let (w, h) = (layer.width(), layer.height());
    let chans: Vec<Grid> = layer.channels().iter().map(Grid::from_plane).collect();
    let n = chans.len() as f64;
    let gray = Grid { w, h, v: (0..w * h).map(|i| chans.iter().map(|c| c.v[i]).sum::<f64>() / n).collect() };
    let two_s2 = 2.0 * p.exposure_sigma * p.exposure_sigma;
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let lap = gray.at(x - 1, y) + gray.at(x + 1, y) + gray.at(x, y - 1) + gray.at(x, y + 1) - 4.0 * gray.v[i];
            let mut weight = (lap.abs() + p.floor).powf(p.contrast_exponent);
            if chans.len() > 1 {
                let mean = gray.v[i];
                let var = chans.iter().map(|c| (c.v[i] - mean).powi(2)).sum::<f64>() / n;
                weight *= (var.sqrt() + p.floor).powf(p.saturation_exponent);
            }
            let exposed: f64 = chans.iter().map(|c| (-(c.v[i] - 0.5).powi(2) / two_s2).exp()).product();
            weight *= exposed.powf(p.exposure_exponent);
            out[i] = weight;
        }
    }
    out
}

/// Per-pixel fusion weights, normalized to sum to 1 across layers.
pub fn fusion_weights(layers: &[Image], params: &FusionParams) -> Result<Vec<Vec<f64>>> {
    check_layers(layers)?;
    let mut weights: Vec<Vec<f64>> = layers.par_iter().map(|l| raw_weight(l, params)).collect();
    let k = layers.len() as f64;
    for i in 0..weights[0].len() {
        let sum: f64 = weights.iter().map(|w| w[i]).sum();
        for w in weights.iter_mut() {
            w[i] = if sum > 0.0 { w[i] / sum } else { 1.0 / k };
        }
    }
    Ok(weights)
}

fn check_layers(layers: &[Image]) -> Result<()> {
    if layers.len() < 2 {
        return Err(Error::DimensionMismatch(format!("fusion needs at least 2 layers, got {}", layers.len())));
    }
    if let Some(bad) = layers.iter().position(|l| !l.same_shape(&layers[0])) {
        return Err(Error::DimensionMismatch(format!("fusion layer {bad} differs in shape from layer 0")));
    }
    Ok(())
}

/// Fuses equally sized exposures into one 8-bit image.
pub fn fuse_exposures(layers: &[Image], params: &FusionParams) -> Result<Image> {
    let weights = fusion_weights(layers, params)?;
    let (w, h) = (layers[0].width(), layers[0].height());
    let depth = params.depth_for(w, h);
    let weight_pyrs: Vec<Vec<Grid>> = weights
        .into_par_iter()
        .map(|v| gaussian_pyramid(Grid { w, h, v }, depth))
        .collect();

    let planes: Vec<ChannelPlane> = (0..layers[0].channel_count())
        .into_par_iter()
        .map(|c| {
            let mut blended: Option<Vec<Grid>> = None;
            for (layer, wp) in layers.iter().zip(&weight_pyrs) {
                let lp = laplacian_pyramid(Grid::from_plane(layer.channel(c)), depth);
                let acc = blended.get_or_insert_with(|| {
                    lp.iter().map(|g| Grid { w: g.w, h: g.h, v: vec![0.0; g.v.len()] }).collect()
                });
                for ((a, band), weight) in acc.iter_mut().zip(&lp).zip(wp) {
                    for ((o, b), k) in a.v.iter_mut().zip(&band.v).zip(&weight.v) {
                        *o += b * k;
                    }
                }
            }
            let out = collapse(blended.expect("at least two layers"));
            let data = out.v.iter().map(|&v| quantize_value(v * 255.0)).collect();
            ChannelPlane::new(w, h, data).expect("pyramid preserves size")
        })
        .collect();
    Image::from_planes(planes)
}
