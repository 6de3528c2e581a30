//! Applying tables to images and chaining tables across exposures.

use rayon::prelude::*;

use crate::complete::quantize_lut;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, Image};
use crate::table::ImfTable;

/// Maps every pixel through its channel's table. Quantization to integers
/// happens here and nowhere else.
pub fn apply_imf(img: &Image, tables: &[ImfTable]) -> Result<Image> {
    if tables.len() != img.channel_count() {
        return Err(Error::ChannelMismatch { image: img.channel_count(), tables: tables.len() });
    }
    let luts = tables.iter().map(quantize_lut).collect::<Result<Vec<_>>>()?;
    let planes = img
        .channels()
        .par_iter()
        .zip(luts.par_iter())
        .map(|(plane, lut)| apply_lut(plane, lut))
        .collect();
    Image::from_planes(planes)
}

pub fn apply_lut(plane: &ChannelPlane, lut: &[u8; 256]) -> ChannelPlane {
    let data = plane.data().iter().map(|&v| lut[v as usize]).collect();
    ChannelPlane::new(plane.width(), plane.height(), data).expect("same dimensions")
}

/// `outer(inner(z))` for every level. The outer table is evaluated at the
/// real-valued inner output by linear interpolation between its integer
/// entries, with the argument clamped to the dynamic range. The result is
/// not quantized.
pub fn compose_imf(outer: &ImfTable, inner: &ImfTable) -> Result<ImfTable> {
    outer.require_total()?;
    inner.require_total()?;
    Ok(ImfTable::from_fn(|z| outer.eval_unchecked(inner.get(z).expect("total"))))
}

/// Composes per-channel tables pairwise.
pub fn compose_channels(outer: &[ImfTable], inner: &[ImfTable]) -> Result<Vec<ImfTable>> {
    if outer.len() != inner.len() {
        return Err(Error::ChannelMismatch { image: inner.len(), tables: outer.len() });
    }
    outer.iter().zip(inner).map(|(o, i)| compose_imf(o, i)).collect()
}
