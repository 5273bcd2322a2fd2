//! Global gray-level thresholding.
//!
//! Five ways to pick a single threshold `t` for a whole 8-bit image, with
//! pixels strictly above `t` labelled object:
//!
//! - [`mean_threshold`]: floor of the mean gray level.
//! - [`ptile_threshold`]: the level leaving a fraction `p` of the area above it.
//! - [`hdt_threshold`]: exhaustive minimum of the within-group variance
//!   `P_low·σ²_low + P_high·σ²_high`.
//! - [`emt_threshold`]: the same minimum, restricted to the gray values of the
//!   strongest Kirsch edge pixels.
//! - [`manual_threshold`]: a value chosen by a person looking at the image.
//!
//! ```
//! use thresh_core::{apply_threshold, compute_histogram, hdt_threshold, GrayImage};
//!
//! let img = GrayImage::new(5, 2, vec![0, 0, 0, 0, 100, 100, 255, 255, 255, 255]).unwrap();
//! let result = hdt_threshold(&compute_histogram(&img)).unwrap();
//! assert_eq!(result.t, 100);
//! assert_eq!(apply_threshold(&img, result.t).count_ones(), 4);
//! ```

pub mod edge;
pub mod error;
pub mod exec;
pub mod histogram;
pub mod image;
pub mod io;
pub mod methods;

pub use edge::{emt_threshold, kirsch_edges, EdgeMap, DEFAULT_EDGE_PERCENTILE};
pub use error::{Error, Result};
pub use exec::Execution;
pub use histogram::{compute_histogram, Histogram};
pub use image::{
    apply_threshold, foreground_fraction, gray_level, pixel_disagreement, rgb_to_gray,
    BinaryImage, GrayImage,
};
pub use methods::{
    hdt_threshold, manual_threshold, mean_threshold, ptile_threshold, select_threshold,
    select_threshold_with_histogram, within_group_variance, GroupStats, Method, MethodParams,
    MethodSpec, ThresholdResult, WithinGroupVariance, DEFAULT_P,
};
