//! Differently exposed panorama synthesis and fusion.
//!
//! Adjacent inputs are related by WHA tables estimated on their shared
//! overlap, in both directions. For each benchmark input `l`, every other
//! input is corrected to `l`'s brightness by composing the adjacent-hop
//! tables along the chain, and the corrected inputs are mosaicked with a
//! linear feather. The per-benchmark panoramas are then fused.

mod fusion;
mod spec;

use rayon::prelude::*;
use serde::Serialize;

pub use fusion::{fuse_exposures, fusion_weights, FusionParams};
pub use spec::{OverlapPair, StitchSpec};

use crate::apply::{apply_imf, compose_channels};
use crate::error::{Error, Result};
use crate::estimate::Method;
use crate::image::{ChannelPlane, Image};
use crate::metrics::time_op;
use crate::table::ImfTable;

/// Overlaps smaller than this are refused: most of the 256 bins would be
/// empty and completion would dominate the estimate.
pub const MIN_OVERLAP_AREA: usize = 256;

/// Per-channel tables between each pair of adjacent inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ImfChain {
    /// `forward[l]` maps input `l` to input `l + 1`.
    pub forward: Vec<Vec<ImfTable>>,
    /// `backward[l]` maps input `l + 1` to input `l`.
    pub backward: Vec<Vec<ImfTable>>,
}

impl ImfChain {
    pub fn inputs(&self) -> usize {
        self.forward.len() + 1
    }

    /// Tables mapping input `from` to the brightness of input `to`, composed
    /// through adjacent hops only. `None` when `from == to`.
    pub fn tables_to(&self, from: usize, to: usize) -> Result<Option<Vec<ImfTable>>> {
        let n = self.inputs();
        if from >= n || to >= n || self.backward.len() != self.forward.len() {
            return Err(Error::Config(format!("chain of {n} inputs has no route {from} -> {to}")));
        }
        if from == to {
            return Ok(None);
        }
        let mut acc;
        if from < to {
            acc = self.forward[from].clone();
            for hop in from + 1..to {
                acc = compose_channels(&self.forward[hop], &acc)?;
            }
        } else {
            acc = self.backward[from - 1].clone();
            for hop in (to..from - 1).rev() {
                acc = compose_channels(&self.backward[hop], &acc)?;
            }
        }
        Ok(Some(acc))
    }

    /// Every table in the chain, labelled `<from>_to_<to>`.
    pub fn labelled(&self) -> Vec<(String, &[ImfTable])> {
        let mut out = Vec::new();
        for (l, (f, b)) in self.forward.iter().zip(&self.backward).enumerate() {
            out.push((format!("{}_to_{}", l, l + 1), f.as_slice()));
            out.push((format!("{}_to_{}", l + 1, l), b.as_slice()));
        }
        out
    }
}

fn check_inputs(images: &[Image], overlaps: &[OverlapPair]) -> Result<()> {
    spec::validate_overlaps(images.len(), overlaps)?;
    for (i, img) in images.iter().enumerate() {
        if img.channel_count() != images[0].channel_count() {
            return Err(Error::Config(format!("input {i} has {} channels, input 0 has {}", img.channel_count(), images[0].channel_count())));
        }
    }
    for (i, o) in overlaps.iter().enumerate() {
        o.a_rect
            .check_inside(images[i].width(), images[i].height())
            .map_err(|e| Error::Config(format!("overlaps[{i}].a_rect: {e}")))?;
        o.b_rect
            .check_inside(images[i + 1].width(), images[i + 1].height())
            .map_err(|e| Error::Config(format!("overlaps[{i}].b_rect: {e}")))?;
    }
    Ok(())
}

/// WHA tables, completed over the full range, for each adjacent pair in both directions.
pub fn estimate_pairwise(images: &[Image], overlaps: &[OverlapPair]) -> Result<ImfChain> {
    check_inputs(images, overlaps)?;
    let pairs: Vec<(Vec<ImfTable>, Vec<ImfTable>)> = overlaps
        .par_iter()
        .enumerate()
        .map(|(i, o)| {
            let area = o.a_rect.area();
            if area < MIN_OVERLAP_AREA {
                log::warn!("overlap {i} covers {area} pixels, below the {MIN_OVERLAP_AREA} pixel minimum");
                return Err(Error::DegenerateOverlap { index: i, area, min: MIN_OVERLAP_AREA });
            }
            let a = images[i].crop(o.a_rect)?;
            let b = images[i + 1].crop(o.b_rect)?;
            Ok((Method::Wha.estimate_total(&a, &b)?, Method::Wha.estimate_total(&b, &a)?))
        })
        .collect::<Result<_>>()?;
    let (forward, backward) = pairs.into_iter().unzip();
    Ok(ImfChain { forward, backward })
}

/// Placement of every input on the panorama canvas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub width: usize,
    pub height: usize,
    /// Top-left corner of each input on the canvas.
    pub origins: Vec<(usize, usize)>,
}

/// Chains the inputs so that each overlap's two rectangles land on the same canvas pixels.
pub fn layout(images: &[Image], overlaps: &[OverlapPair]) -> Result<Layout> {
    check_inputs(images, overlaps)?;
    let mut pos = vec![(0i64, 0i64)];
    for o in overlaps {
        let (x, y) = *pos.last().unwrap();
        pos.push((x + o.a_rect.x0 as i64 - o.b_rect.x0 as i64, y + o.a_rect.y0 as i64 - o.b_rect.y0 as i64));
    }
    let min_x = pos.iter().map(|p| p.0).min().unwrap();
    let min_y = pos.iter().map(|p| p.1).min().unwrap();
    let origins: Vec<(usize, usize)> = pos.iter().map(|&(x, y)| ((x - min_x) as usize, (y - min_y) as usize)).collect();
    let width = origins.iter().zip(images).map(|(o, i)| o.0 + i.width()).max().unwrap();
    let height = origins.iter().zip(images).map(|(o, i)| o.1 + i.height()).max().unwrap();
    Ok(Layout { width, height, origins })
}

fn ramp(i: usize, n: usize, feather: usize) -> f64 {
    let edge = (i + 1).min(n - i) as f64;
    (edge / feather as f64).min(1.0)
}

/// Mosaics images onto the layout canvas. Within `feather` pixels of an
/// image border its weight ramps linearly down, so overlaps cross-fade;
/// pixels covered by a single image are copied unchanged. With
/// `feather == 0` later inputs simply overwrite earlier ones.
pub fn mosaic(images: &[Image], layout: &Layout, feather: usize) -> Result<Image> {
    let channels = images.first().map_or(0, Image::channel_count);
    let (w, h) = (layout.width, layout.height);
    let mut acc = vec![vec![0.0f64; w * h]; channels];
    let mut wsum = vec![0.0f64; w * h];
    for (img, &(ox, oy)) in images.iter().zip(&layout.origins) {
        if img.channel_count() != channels {
            return Err(Error::ChannelMismatch { image: img.channel_count(), tables: channels });
        }
        for y in 0..img.height() {
            let wy = if feather == 0 { 1.0 } else { ramp(y, img.height(), feather) };
            for x in 0..img.width() {
                let i = (oy + y) * w + ox + x;
                if feather == 0 {
                    for (c, plane) in img.channels().iter().enumerate() {
                        acc[c][i] = f64::from(plane.get(x, y));
                    }
                    wsum[i] = 1.0;
                } else {
                    let k = wy * ramp(x, img.width(), feather);
                    for (c, plane) in img.channels().iter().enumerate() {
                        acc[c][i] += k * f64::from(plane.get(x, y));
                    }
                    wsum[i] += k;
                }
            }
        }
    }
    let planes = acc
        .into_iter()
        .map(|a| {
            let data = a
                .iter()
                .zip(&wsum)
                .map(|(v, s)| if *s > 0.0 { (v / s).round().clamp(0.0, 255.0) as u8 } else { 0 })
                .collect();
            ChannelPlane::new(w, h, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Image::from_planes(planes)
}

/// The panorama with the brightness of input `benchmark`.
pub fn synthesize_benchmark(
    images: &[Image],
    overlaps: &[OverlapPair],
    chain: &ImfChain,
    benchmark: usize,
    feather: usize,
) -> Result<Image> {
    if chain.inputs() != images.len() {
        return Err(Error::Config(format!("chain covers {} inputs, {} supplied", chain.inputs(), images.len())));
    }
    let lay = layout(images, overlaps)?;
    let corrected = images
        .iter()
        .enumerate()
        .map(|(m, img)| match chain.tables_to(m, benchmark)? {
            None => Ok(img.clone()),
            Some(tables) => apply_imf(img, &tables),
        })
        .collect::<Result<Vec<_>>>()?;
    mosaic(&corrected, &lay, feather)
}

/// One panorama per benchmark input, all on the same canvas.
#[derive(Clone, Debug, PartialEq)]
pub struct PanoSet {
    pub panos: Vec<Image>,
}

pub fn synthesize_all(images: &[Image], overlaps: &[OverlapPair], chain: &ImfChain, feather: usize) -> Result<PanoSet> {
    let panos = (0..images.len())
        .into_par_iter()
        .map(|l| synthesize_benchmark(images, overlaps, chain, l, feather))
        .collect::<Result<Vec<_>>>()?;
    Ok(PanoSet { panos })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub estimate: f64,
    pub synthesize: f64,
    pub fuse: f64,
}

#[derive(Clone, Debug)]
pub struct StitchOutput {
    pub fused: Image,
    pub panos: PanoSet,
    pub chain: ImfChain,
    pub layout: Layout,
    pub timings: StageTimings,
}

/// Estimation, per-benchmark synthesis and fusion over in-memory inputs.
pub fn stitch_images(images: &[Image], overlaps: &[OverlapPair], feather: usize, fusion: &FusionParams) -> Result<StitchOutput> {
    let (chain, estimate) = time_op(|| estimate_pairwise(images, overlaps));
    let chain = chain?;
    let (panos, synthesize) = time_op(|| synthesize_all(images, overlaps, &chain, feather));
    let panos = panos?;
    let (fused, fuse) = time_op(|| fuse_exposures(&panos.panos, fusion));
    Ok(StitchOutput {
        fused: fused?,
        layout: layout(images, overlaps)?,
        panos,
        chain,
        timings: StageTimings { estimate, synthesize, fuse },
    })
}

pub fn stitch_hdr(spec: &StitchSpec, fusion: &FusionParams) -> Result<StitchOutput> {
    spec.validate()?;
    let images = spec.load_images()?;
    stitch_images(&images, &spec.overlaps, spec.feather, fusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::RegionRect;

    fn scene(w: usize, h: usize) -> Image {
        Image::from_planes(vec![
            ChannelPlane::from_fn(w, h, |x, y| ((x * 3 + y * 5) % 250) as u8),
            ChannelPlane::from_fn(w, h, |x, y| ((x * y + 7) % 240) as u8),
            ChannelPlane::from_fn(w, h, |x, y| ((x + 2 * y) % 256) as u8),
        ])
        .unwrap()
    }

    /// 40x30 tiles of a master strip, `stride` columns apart.
    fn strip_with(images: usize, stride: usize) -> (Vec<Image>, Vec<OverlapPair>) {
        let master = scene(stride * (images - 1) + 40, 30);
        let tiles = (0..images).map(|i| master.crop(RegionRect::new(stride * i, 0, 40, 30)).unwrap()).collect();
        let shared = 40 - stride;
        let overlaps =
            vec![OverlapPair { a_rect: RegionRect::new(stride, 0, shared, 30), b_rect: RegionRect::new(0, 0, shared, 30) }; images - 1];
        (tiles, overlaps)
    }

    fn strip(images: usize) -> (Vec<Image>, Vec<OverlapPair>) {
        strip_with(images, 20)
    }

    #[test]
    fn chain_sizes() {
        let (imgs, ov) = strip(2);
        let c = estimate_pairwise(&imgs, &ov).unwrap();
        assert_eq!(c.forward.len() + c.backward.len(), 2);
        let (imgs, ov) = strip(3);
        let c = estimate_pairwise(&imgs, &ov).unwrap();
        assert_eq!(c.labelled().len(), 4);
    }

    #[test]
    fn identical_neighbours_give_identity_on_occupied_levels() {
        let (imgs, ov) = strip(3);
        let c = estimate_pairwise(&imgs, &ov).unwrap();
        let crop = imgs[0].crop(ov[0].a_rect).unwrap();
        for (ch, t) in c.forward[0].iter().enumerate() {
            for z in crate::histogram::histogram(crop.channel(ch)).non_empty() {
                assert_eq!(t.get(z), Some(f64::from(z)));
            }
        }
    }

    #[test]
    fn routes_compose_adjacent_hops() {
        let shift = |d: f64| vec![ImfTable::from_fn(|z| f64::from(z) + d)];
        let chain = ImfChain { forward: vec![shift(1.0), shift(2.0)], backward: vec![shift(-1.0), shift(-2.0)] };
        assert_eq!(chain.tables_to(1, 1).unwrap(), None);
        assert_eq!(chain.tables_to(0, 2).unwrap().unwrap()[0].get(10), Some(13.0));
        assert_eq!(chain.tables_to(2, 0).unwrap().unwrap()[0].get(10), Some(7.0));
        assert!(chain.tables_to(0, 3).is_err());
    }

    #[test]
    fn layout_places_overlaps_together() {
        let (imgs, ov) = strip(3);
        let lay = layout(&imgs, &ov).unwrap();
        assert_eq!(lay.origins, vec![(0, 0), (20, 0), (40, 0)]);
        assert_eq!((lay.width, lay.height), (80, 30));
    }

    #[test]
    fn mosaic_of_tiles_restores_master() {
        let master = scene(80, 30);
        let (imgs, ov) = strip(3);
        let lay = layout(&imgs, &ov).unwrap();
        for feather in [0, 5, 20] {
            assert_eq!(mosaic(&imgs, &lay, feather).unwrap(), master);
        }
    }

    #[test]
    fn benchmark_input_untouched_outside_overlaps() {
        let (mut imgs, ov) = strip_with(3, 30);
        imgs[1] = apply_imf(&imgs[1], &vec![ImfTable::from_fn(|z| f64::from(z) * 0.6); 3]).unwrap();
        let chain = estimate_pairwise(&imgs, &ov).unwrap();
        let pano = synthesize_benchmark(&imgs, &ov, &chain, 1, 4).unwrap();
        // tile 1 spans canvas columns 30..70 and is the only one covering 40..60
        for c in 0..3 {
            for y in 0..30 {
                for x in 40..60 {
                    assert_eq!(pano.channel(c).get(x, y), imgs[1].channel(c).get(x - 30, y));
                }
            }
        }
    }

    #[test]
    fn degenerate_overlap_refused() {
        let (imgs, _) = strip(2);
        let ov = vec![OverlapPair { a_rect: RegionRect::new(20, 0, 8, 30), b_rect: RegionRect::new(0, 0, 8, 30) }];
        assert!(matches!(estimate_pairwise(&imgs, &ov), Err(Error::DegenerateOverlap { area: 240, .. })));
    }

    #[test]
    fn out_of_bounds_overlap_is_config_error() {
        let (imgs, _) = strip(2);
        let ov = vec![OverlapPair { a_rect: RegionRect::new(30, 0, 20, 30), b_rect: RegionRect::new(0, 0, 20, 30) }];
        assert!(matches!(estimate_pairwise(&imgs, &ov), Err(Error::Config(_))));
    }
}
