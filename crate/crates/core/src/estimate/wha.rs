use super::segment::{segment_map, sub_bin_masses};
use crate::error::Result;
use crate::histogram::Histogram;
use crate::image::{ChannelPlane, Image};
use crate::table::ImfTable;

/// Weighted histogram averaging for one channel: each non-empty source bin
/// maps to the count-weighted mean level of the target sub-bins it covers.
/// Empty source bins stay absent.
pub fn wha_channel(hi: &Histogram, hj: &Histogram) -> Result<ImfTable> {
    let ci = hi.cumulate();
    let cj = hj.cumulate();
    let psi = segment_map(&ci, &cj)?;
    let mut table = ImfTable::empty();
    for z in hi.non_empty() {
        let weighted: u64 = sub_bin_masses(&ci, &cj, hi, hj, &psi, z)?
            .into_iter()
            .map(|(k, mass)| mass * u64::from(k))
            .sum();
        table.set(z, weighted as f64 / hi.count(z) as f64);
    }
    Ok(table)
}

pub fn estimate_wha(overlap_i: &Image, overlap_j: &Image) -> Result<Vec<ImfTable>> {
    super::per_channel(overlap_i, overlap_j, |a: &ChannelPlane, b: &ChannelPlane| {
        wha_channel(&Histogram::of(a), &Histogram::of(b))
    })
}
