//! Intensity mapping functions (IMFs) between differently exposed 8-bit
//! images, and HDR-style panorama synthesis built on them.
//!
//! The main estimator is weighted histogram averaging ([`estimate::estimate_wha`]);
//! cumulative histogram matching and geometric correspondence are provided
//! as baselines. Estimated tables are completed over the full dynamic range
//! ([`complete`]), applied or composed ([`apply`]), and used to synthesize one
//! panorama per exposure benchmark which are then fused ([`pano`]).

pub mod apply;
pub mod complete;
pub mod error;
pub mod estimate;
pub mod eval;
pub mod histogram;
pub mod image;
pub mod metrics;
pub mod pano;
pub mod synth;
pub mod table;

pub use crate::apply::{apply_imf, compose_imf};
pub use crate::complete::{complete_table, quantize_table};
pub use crate::error::{Error, Result};
pub use crate::estimate::{estimate_chm, estimate_gc, estimate_wha, gc_correct, Method};
pub use crate::histogram::{cumulate, histogram, CumHistogram, Histogram};
pub use crate::image::{decode_image, encode_png, simulate_overlap, ChannelPlane, Image, RegionRect, LEVELS};
pub use crate::metrics::{psnr, ssim, EvalRecord};
pub use crate::table::ImfTable;
