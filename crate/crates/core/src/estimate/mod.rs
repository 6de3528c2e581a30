//! Intensity mapping function estimators.
//!
//! All estimators operate on a pair of same-sized overlap crops and return
//! one [`ImfTable`] per channel. Channels are processed independently.

mod chm;
mod gc;
mod segment;
mod wha;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use chm::{chm_channel, chm_via_segments, estimate_chm};
pub use gc::{estimate_gc, gc_channel, gc_correct, GcCorrection};
pub use segment::{segment_map, sub_bin_masses, SegmentMap};
pub use wha::{estimate_wha, wha_channel};

use crate::complete::complete_table;
use crate::error::{Error, Result};
use crate::image::{ChannelPlane, Image};
use crate::table::ImfTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Wha,
    Chm,
    Gc,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Wha, Method::Chm, Method::Gc];

    pub fn name(self) -> &'static str {
        match self {
            Method::Wha => "wha",
            Method::Chm => "chm",
            Method::Gc => "gc",
        }
    }

    /// Raw per-channel estimate; WHA and GC tables may be partial.
    pub fn estimate(self, overlap_i: &Image, overlap_j: &Image) -> Result<Vec<ImfTable>> {
        match self {
            Method::Wha => estimate_wha(overlap_i, overlap_j),
            Method::Chm => estimate_chm(overlap_i, overlap_j),
            Method::Gc => estimate_gc(overlap_i, overlap_j),
        }
    }

    /// Turns a raw estimate into a total table using the completion
    /// procedure that belongs to the method.
    pub fn finish(self, raw: &ImfTable) -> Result<ImfTable> {
        match self {
            Method::Wha => complete_table(raw),
            Method::Chm => Ok(raw.clone()),
            Method::Gc => gc_correct(raw, GcCorrection::default()),
        }
    }

    pub fn estimate_total(self, overlap_i: &Image, overlap_j: &Image) -> Result<Vec<ImfTable>> {
        self.estimate(overlap_i, overlap_j)?.iter().map(|t| self.finish(t)).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wha" => Ok(Method::Wha),
            "chm" => Ok(Method::Chm),
            "gc" => Ok(Method::Gc),
            other => Err(format!("unknown method '{other}' (expected wha, chm or gc)")),
        }
    }
}

/// Runs a per-channel estimator over every channel pair in parallel.
pub(crate) fn per_channel<F>(overlap_i: &Image, overlap_j: &Image, f: F) -> Result<Vec<ImfTable>>
where
    F: Fn(&ChannelPlane, &ChannelPlane) -> Result<ImfTable> + Sync,
{
    if !overlap_i.same_shape(overlap_j) {
        return Err(Error::DimensionMismatch(format!(
            "overlaps are {}x{}x{} and {}x{}x{}",
            overlap_i.width(),
            overlap_i.height(),
            overlap_i.channel_count(),
            overlap_j.width(),
            overlap_j.height(),
            overlap_j.channel_count()
        )));
    }
    overlap_i
        .channels()
        .par_iter()
        .zip(overlap_j.channels().par_iter())
        .map(|(a, b)| f(a, b))
        .collect()
}
