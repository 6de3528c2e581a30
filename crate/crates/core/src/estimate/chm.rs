use super::segment::{segment_map, sub_bin_masses};
use crate::error::Result;
use crate::histogram::{CumHistogram, Histogram};
use crate::image::{ChannelPlane, Image, LEVELS};
use crate::table::ImfTable;

/// Cumulative histogram matching for one channel: `z` maps to the target
/// level whose cumulative count is closest to `C_i(z)`, smallest level on
/// ties. The table is total.
pub fn chm_channel(hi: &Histogram, hj: &Histogram) -> ImfTable {
    let ci = hi.cumulate();
    let cj = hj.cumulate();
    let (ci, cj) = (ci.values(), cj.values());
    ImfTable::from_fn(|z| {
        let c = ci[z as usize];
        let mut best = 0usize;
        let mut best_dist = u64::MAX;
        for (k, &v) in cj.iter().enumerate() {
            let d = c.abs_diff(v);
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        best as f64
    })
}

pub fn estimate_chm(overlap_i: &Image, overlap_j: &Image) -> Result<Vec<ImfTable>> {
    super::per_channel(overlap_i, overlap_j, |a: &ChannelPlane, b: &ChannelPlane| {
        Ok(chm_channel(&Histogram::of(a), &Histogram::of(b)))
    })
}

/// Cumulative histogram matching rebuilt from the segment map: the selected
/// level is whichever of `psi(z) - 1` and `psi(z)` has the closer cumulative
/// count, weighted by the sub-bin masses of `z`. Only non-empty source bins
/// are filled.
///
/// Ties resolve to the lower candidate, and a candidate on a flat stretch of
/// `C_j` resolves to the first level of that stretch, matching
/// [`chm_channel`].
pub fn chm_via_segments(hi: &Histogram, hj: &Histogram) -> Result<ImfTable> {
    let ci = hi.cumulate();
    let cj = hj.cumulate();
    let psi = segment_map(&ci, &cj)?;
    let mut table = ImfTable::empty();
    for z in hi.non_empty() {
        let c = ci.at(z as isize);
        let upper = psi.at(z as isize) as usize;
        let mut pick = upper;
        if upper > 0 {
            let lower = upper - 1;
            if c.abs_diff(cj.at(lower as isize)) <= c.abs_diff(cj.at(upper as isize)) {
                pick = plateau_start(&cj, lower);
            }
        }
        let masses = sub_bin_masses(&ci, &cj, hi, hj, &psi, z)?;
        let weighted: u64 = masses.iter().map(|&(_, m)| m * pick as u64).sum();
        table.set(z, weighted as f64 / hi.count(z) as f64);
    }
    Ok(table)
}

fn plateau_start(cj: &CumHistogram, mut k: usize) -> usize {
    let v = cj.values()[k];
    while k > 0 && cj.values()[k - 1] == v {
        k -= 1;
    }
    debug_assert!(k < LEVELS);
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::segment::tests::hist;
    use proptest::prelude::*;

    #[test]
    fn tiny_world_tie_goes_low() {
        let t = chm_channel(&hist(&[(0, 3), (1, 1)]), &hist(&[(1, 2), (2, 2)]));
        assert_eq!(t.get(0), Some(1.0));
        assert!(t.is_total());
    }

    #[test]
    fn identity_where_cumulative_increases() {
        let h = hist(&[(3, 5), (10, 2), (11, 9), (250, 1)]);
        let t = chm_channel(&h, &h);
        for z in h.non_empty() {
            assert_eq!(t.get(z), Some(z as f64));
        }
    }

    #[test]
    fn constant_target_curve() {
        // C_j is 0 below 90 and 6 from 90 on; C_i is 1, 3, 6 on the three source steps
        let t = chm_channel(&hist(&[(0, 1), (40, 2), (255, 3)]), &hist(&[(90, 6)]));
        assert_eq!(t.get(0), Some(0.0));
        assert_eq!(t.get(39), Some(0.0));
        // |3 - 0| == |3 - 6| ties to the lower level
        assert_eq!(t.get(40), Some(0.0));
        assert_eq!(t.get(255), Some(90.0));
        // once the source count passes half the total, everything maps to the target level
        let t = chm_channel(&hist(&[(10, 5), (200, 1)]), &hist(&[(90, 6)]));
        assert!((10..=255).all(|z| t.get(z) == Some(90.0)));
    }

    #[test]
    fn plateau_candidate_lowered() {
        // C_j = 0,2,2,4 at levels 0..3; C_i(z) = 3 ties 1 (value 2) vs 3 (value 4)
        let hi = hist(&[(5, 3), (6, 1)]);
        let hj = hist(&[(1, 2), (3, 2)]);
        let via = chm_via_segments(&hi, &hj).unwrap();
        let direct = chm_channel(&hi, &hj);
        assert_eq!(via.get(5), Some(1.0));
        assert_eq!(direct.get(5), Some(1.0));
    }

    proptest! {
        #[test]
        fn routes_agree(src in proptest::collection::vec(any::<u8>(), 48), dst in proptest::collection::vec(0u8..40, 48)) {
            let hi = Histogram::of(&ChannelPlane::new(6, 8, src).unwrap());
            let hj = Histogram::of(&ChannelPlane::new(6, 8, dst).unwrap());
            let direct = chm_channel(&hi, &hj);
            let via = chm_via_segments(&hi, &hj).unwrap();
            for z in hi.non_empty() {
                prop_assert_eq!(via.get(z), direct.get(z));
            }
            prop_assert!(direct.is_non_decreasing());
        }
    }
}
