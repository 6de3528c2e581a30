use crate::complete::complete_table;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, Image, LEVELS};
use crate::table::ImfTable;

/// Geometric correspondence for one channel: each non-empty source level
/// maps to the mean of the co-located target pixels.
pub fn gc_channel(src: &ChannelPlane, dst: &ChannelPlane) -> ImfTable {
    let mut sums = [0u64; LEVELS];
    let mut counts = [0u64; LEVELS];
    for (&a, &b) in src.data().iter().zip(dst.data()) {
        sums[a as usize] += u64::from(b);
        counts[a as usize] += 1;
    }
    let mut table = ImfTable::empty();
    for z in 0..LEVELS {
        if counts[z] != 0 {
            table.set(z as u8, sums[z] as f64 / counts[z] as f64);
        }
    }
    table
}

pub fn estimate_gc(overlap_i: &Image, overlap_j: &Image) -> Result<Vec<ImfTable>> {
    super::per_channel(overlap_i, overlap_j, |a: &ChannelPlane, b: &ChannelPlane| Ok(gc_channel(a, b)))
}

/// Settings for the empty-value correction of GC tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GcCorrection {
    /// Median window over consecutive present entries; shrinks symmetrically near the ends.
    pub window: usize,
    /// Clamp each filtered value against its already processed neighbour so
    /// the sweep outward from the middle never reverses direction.
    pub clamp_monotone: bool,
}

impl Default for GcCorrection {
    fn default() -> Self {
        Self { window: 5, clamp_monotone: true }
    }
}

/// Two-step correction of a raw GC table: a median pass over the present
/// entries sweeping from the middle outwards, then linear fill of the
/// interior gaps and linear extension of both ends.
pub fn gc_correct(raw: &ImfTable, opts: GcCorrection) -> Result<ImfTable> {
    let present: Vec<(u8, f64)> = raw.present().collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::UnderDetermined { present: n });
    }
    let half = opts.window.max(1) / 2;
    let median_at = |i: usize| {
        let h = half.min(i).min(n - 1 - i);
        let mut w: Vec<f64> = present[i - h..=i + h].iter().map(|p| p.1).collect();
        w.sort_by(f64::total_cmp);
        w[h]
    };

    let mut filtered = vec![0.0; n];
    let mid = n / 2;
    filtered[mid] = median_at(mid);
    for i in mid + 1..n {
        let m = median_at(i);
        filtered[i] = if opts.clamp_monotone { m.max(filtered[i - 1]) } else { m };
    }
    for i in (0..mid).rev() {
        let m = median_at(i);
        filtered[i] = if opts.clamp_monotone { m.min(filtered[i + 1]) } else { m };
    }

    let mut smoothed = ImfTable::empty();
    for (&(z, _), &v) in present.iter().zip(&filtered) {
        smoothed.set(z, v);
    }
    complete_table(&smoothed)
}
