//! Filling absent table entries over the full dynamic range.
//!
//! An absent level with present entries on both sides is linearly
//! interpolated from its nearest present neighbours. A level outside the
//! present range is extrapolated along the line through the two present
//! entries nearest to it. Present entries are never modified and values are
//! kept unclamped; clamping happens in [`quantize_table`].

use crate::error::{Error, Result};
use crate::image::LEVELS;
use crate::table::ImfTable;

/// What [`complete_table_with_report`] had to fill in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompletionReport {
    pub interpolated: usize,
    pub extrapolated: usize,
    /// Slope used below the first present entry, if any level was filled there.
    pub low_end_slope: Option<f64>,
    /// Slope used above the last present entry, if any level was filled there.
    pub high_end_slope: Option<f64>,
}

impl CompletionReport {
    /// True if an end extension runs downhill and may break monotonicity.
    pub fn has_negative_end_slope(&self) -> bool {
        self.low_end_slope.is_some_and(|s| s < 0.0) || self.high_end_slope.is_some_and(|s| s < 0.0)
    }
}

pub fn complete_table(t: &ImfTable) -> Result<ImfTable> {
    complete_table_with_report(t).map(|(t, _)| t)
}

/// The two present levels used to fill absent level `z`.
///
/// Minimises `|z - z1| + |z - z2|` with `z` strictly between the picks when
/// possible (interpolation), otherwise with both picks on the same side and
/// `z1` the nearer one (extrapolation). `None` if `z` is present or fewer
/// than two entries are present.
pub fn fill_pair(t: &ImfTable, z: u8) -> Option<(u8, u8)> {
    if t.is_present(z) {
        return None;
    }
    let below = (0..z).rev().filter(|&k| t.is_present(k));
    let above = (z.saturating_add(1)..=u8::MAX).filter(|&k| t.is_present(k) && k > z);
    let mut below = below.take(2);
    let mut above = above.take(2);
    let (b1, b2) = (below.next(), below.next());
    let (a1, a2) = (above.next(), above.next());
    match (b1, a1) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, Some(hi)) => a2.map(|next| (hi, next)),
        (Some(lo), None) => b2.map(|prev| (lo, prev)),
        (None, None) => None,
    }
}

#[inline]
fn line_through(z: f64, z1: f64, v1: f64, z2: f64, v2: f64) -> f64 {
    (z - z1) * (v1 - v2) / (z1 - z2) + v1
}

pub fn complete_table_with_report(t: &ImfTable) -> Result<(ImfTable, CompletionReport)> {
    let present: Vec<(u8, f64)> = t.present().collect();
    if present.len() < 2 {
        return Err(Error::UnderDetermined { present: present.len() });
    }
    let mut out = t.clone();
    let mut report = CompletionReport::default();
    let (first, second) = (present[0], present[1]);
    let (last, penult) = (present[present.len() - 1], present[present.len() - 2]);

    // walk the gaps between consecutive present entries, then the two open ends
    for pair in present.windows(2) {
        let ((z1, v1), (z2, v2)) = (pair[0], pair[1]);
        for z in z1 + 1..z2 {
            out.set(z, line_through(f64::from(z), f64::from(z1), v1, f64::from(z2), v2));
            report.interpolated += 1;
        }
    }
    if first.0 > 0 {
        let (z1, v1) = first;
        let (z2, v2) = second;
        for z in 0..z1 {
            out.set(z, line_through(f64::from(z), f64::from(z1), v1, f64::from(z2), v2));
            report.extrapolated += 1;
        }
        report.low_end_slope = Some((v2 - v1) / f64::from(z2 - z1));
    }
    if (last.0 as usize) < LEVELS - 1 {
        let (z1, v1) = last;
        let (z2, v2) = penult;
        for z in z1 + 1..=u8::MAX {
            out.set(z, line_through(f64::from(z), f64::from(z1), v1, f64::from(z2), v2));
            report.extrapolated += 1;
        }
        report.high_end_slope = Some((v1 - v2) / f64::from(z1 - z2));
    }
    debug_assert!(out.is_total());
    if report.has_negative_end_slope() {
        log::debug!("table completion extended an end with a negative slope: {report:?}");
    }
    Ok((out, report))
}

/// Rounds half-up and clamps to `0..=255`.
#[inline]
pub fn quantize_value(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// The integer lookup table for a total table.
pub fn quantize_lut(t: &ImfTable) -> Result<[u8; LEVELS]> {
    t.require_total()?;
    let mut lut = [0u8; LEVELS];
    for (z, v) in t.present() {
        lut[z as usize] = quantize_value(v);
    }
    Ok(lut)
}

pub fn quantize_table(t: &ImfTable) -> Result<ImfTable> {
    let lut = quantize_lut(t)?;
    Ok(ImfTable::from_fn(|z| f64::from(lut[z as usize])))
}
