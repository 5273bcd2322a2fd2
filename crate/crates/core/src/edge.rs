//! Kirsch compass edges and the edge-maximization threshold.
//!
//! EMT keeps only the strongest edge pixels (a nearest-rank percentile of the
//! positive Kirsch magnitudes), histograms their gray values, and runs the
//! within-group variance argmin on that histogram. Segmentation therefore
//! starts from the levels found on either side of the strongest edges.

use crate::error::{Error, Result};
use crate::exec::{for_each_row, Execution};
use crate::histogram::Histogram;
use crate::image::GrayImage;
use crate::methods::{hdt_threshold, Method, MethodParams, ThresholdResult};

pub const DEFAULT_EDGE_PERCENTILE: f64 = 0.9;

/// Largest possible Kirsch response: three 5-weights over 255-valued pixels.
pub const MAX_MAGNITUDE: u16 = 5 * 3 * 255;

/// Neighbour offsets `(dy, dx)` around the centre, clockwise from top-left.
/// The east kernel puts its 5-weights on ring positions 2, 3 and 4; its
/// seven 45° rotations shift that window around the ring.
const RING: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
];

/// Per-pixel Kirsch magnitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    magnitudes: Vec<u16>,
}

impl EdgeMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn magnitudes(&self) -> &[u16] {
        &self.magnitudes
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.magnitudes[y * self.width + x]
    }
}

/// Max over the eight compass kernels of the 3×3 correlation response,
/// clamped at zero, with replicated borders.
pub fn kirsch_edges(img: &GrayImage) -> EdgeMap {
    kirsch_edges_with(img, Execution::default())
}

pub fn kirsch_edges_with(img: &GrayImage, exec: Execution) -> EdgeMap {
    let (w, h) = (img.width(), img.height());
    let px = img.pixels();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut magnitudes = vec![0u16; px.len()];
    for_each_row(exec, &mut magnitudes, w, |y, row| {
        let rows = [-1isize, 0, 1].map(|d| clamp(y as isize + d, h) * w);
        for (x, out) in row.iter_mut().enumerate() {
            let cols = [-1isize, 0, 1].map(|d| clamp(x as isize + d, w));
            let ring: [i32; 8] =
                RING.map(|(dy, dx)| i32::from(px[rows[(dy + 1) as usize] + cols[(dx + 1) as usize]]));
            let ring_sum: i32 = ring.iter().sum();
            // response = 5·window − 3·(ring − window) = 8·window − 3·ring
            let mut window = ring[2] + ring[3] + ring[4];
            let mut best = window;
            for k in 1..8 {
                window += ring[(k + 4) % 8] - ring[(k + 1) % 8];
                best = best.max(window);
            }
            *out = (8 * best - 3 * ring_sum).max(0) as u16;
        }
    });
    EdgeMap {
        width: w,
        height: h,
        magnitudes,
    }
}

/// Nearest-rank quantile: the `ceil(q·n)`-th smallest element of `sorted`.
pub fn nearest_rank(sorted: &[u16], q: f64) -> Option<u16> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Edge-maximization threshold.
///
/// Fails with [`Error::NoEdges`] when the image has no positive Kirsch
/// response; callers may fall back to another method.
pub fn emt_threshold(img: &GrayImage, edge_percentile: f64) -> Result<ThresholdResult> {
    emt_threshold_with(img, edge_percentile, Execution::default())
}

pub fn emt_threshold_with(
    img: &GrayImage,
    edge_percentile: f64,
    exec: Execution,
) -> Result<ThresholdResult> {
    if !(edge_percentile > 0.0 && edge_percentile < 1.0) {
        return Err(Error::Parameter(format!(
            "edge_percentile must lie in (0, 1), got {edge_percentile}"
        )));
    }
    let edges = kirsch_edges_with(img, exec);
    let mut positive: Vec<u16> = edges.magnitudes.iter().copied().filter(|&m| m > 0).collect();
    positive.sort_unstable();
    let cutoff = nearest_rank(&positive, edge_percentile).ok_or(Error::NoEdges)?;

    let edge_values = edges
        .magnitudes
        .iter()
        .zip(img.pixels())
        .filter(|(&m, _)| m >= cutoff)
        .map(|(_, &v)| v);
    let edge_hist = Histogram::from_values(edge_values)?;
    let hdt = hdt_threshold(&edge_hist)?;
    Ok(ThresholdResult {
        method: Method::Emt,
        t: hdt.t,
        criterion: Some(edge_hist.total() as f64),
        params: MethodParams {
            p: None,
            edge_percentile: Some(edge_percentile),
        },
    })
}
