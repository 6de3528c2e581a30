//! Bin-level correspondence between two cumulative histograms.

use crate::error::{Error, Result};
use crate::histogram::{CumHistogram, Histogram};
use crate::image::LEVELS;

/// For each source level `z`, the last target level of the segment of
/// target bins that `z` maps onto.
///
/// Satisfies `C_j(psi(z) - 1) < C_i(z) <= C_j(psi(z))` wherever
/// `C_i(z) > 0`; `psi(-1)` is 0 and so is `psi(z)` on an all-empty prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentMap {
    psi: [u8; LEVELS],
}

impl SegmentMap {
    #[inline]
    pub fn at(&self, z: isize) -> u8 {
        if z < 0 {
            0
        } else {
            self.psi[z as usize]
        }
    }

    pub fn values(&self) -> &[u8; LEVELS] {
        &self.psi
    }
}

/// Builds the segment map with one forward sweep over both cumulative curves.
pub fn segment_map(ci: &CumHistogram, cj: &CumHistogram) -> Result<SegmentMap> {
    if ci.total() != cj.total() {
        return Err(Error::TotalMismatch { source_total: ci.total(), target_total: cj.total() });
    }
    let ci = ci.values();
    let cj = cj.values();
    let mut psi = [0u8; LEVELS];
    let mut k = 0usize;
    for z in 0..LEVELS {
        let target = ci[z];
        if target == 0 {
            continue;
        }
        // cj[255] equals the shared total, so the scan stops inside the range
        while cj[k] < target {
            k += 1;
        }
        psi[z] = k as u8;
    }
    Ok(SegmentMap { psi })
}

/// Portions of target bins attributed to the non-empty source bin `z`, as
/// `(target level, pixel count)` over `psi(z-1)..=psi(z)`. The counts sum
/// to `H_i(z)`.
pub fn sub_bin_masses(
    ci: &CumHistogram,
    cj: &CumHistogram,
    hi: &Histogram,
    hj: &Histogram,
    psi: &SegmentMap,
    z: u8,
) -> Result<Vec<(u8, u64)>> {
    let count = hi.count(z);
    if count == 0 {
        return Err(Error::EmptyBin(z));
    }
    let zi = z as isize;
    let first = psi.at(zi - 1);
    let last = psi.at(zi);
    if first == last {
        return Ok(vec![(last, count)]);
    }
    let below = ci.at(zi - 1);
    let upto = ci.at(zi);
    let masses = (first..=last)
        .map(|k| {
            let mass = if k == first {
                cj.at(k as isize) - below
            } else if k == last {
                upto - cj.at(k as isize - 1)
            } else {
                hj.count(k)
            };
            (k, mass)
        })
        .collect();
    Ok(masses)
}
