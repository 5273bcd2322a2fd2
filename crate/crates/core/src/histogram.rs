//! 256-bin gray-level histograms and their cumulative moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const LEVELS: usize = 256;

/// Largest pixel total a histogram may hold. Keeps every exact moment
/// product used by the variance scan inside `u128`.
pub const MAX_TOTAL: u64 = 1 << 36;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "HistogramJson", try_from = "HistogramJson")]
pub struct Histogram {
    counts: [u64; LEVELS],
    total: u64,
}

#[derive(Serialize, Deserialize)]
struct HistogramJson {
    counts: Vec<u64>,
    total: u64,
}

impl From<Histogram> for HistogramJson {
    fn from(h: Histogram) -> Self {
        HistogramJson {
            counts: h.counts.to_vec(),
            total: h.total,
        }
    }
}

impl TryFrom<HistogramJson> for Histogram {
    type Error = Error;

    fn try_from(j: HistogramJson) -> Result<Self> {
        let counts: [u64; LEVELS] = j
            .counts
            .try_into()
            .map_err(|v: Vec<u64>| Error::Domain(format!("expected 256 bins, got {}", v.len())))?;
        let h = Histogram::from_counts(counts)?;
        if h.total != j.total {
            return Err(Error::Domain(format!(
                "total {} does not match bin sum {}",
                j.total, h.total
            )));
        }
        Ok(h)
    }
}

impl Histogram {
    pub fn from_counts(counts: [u64; LEVELS]) -> Result<Self> {
        let total = counts
            .iter()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .filter(|&t| t <= MAX_TOTAL)
            .ok_or_else(|| Error::Domain(format!("histogram total exceeds {MAX_TOTAL}")))?;
        Ok(Histogram { counts, total })
    }

    /// Histogram of an arbitrary multiset of gray values.
    pub fn from_values(values: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut counts = [0u64; LEVELS];
        for v in values {
            counts[v as usize] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Lowest and highest occupied levels, or `None` when empty.
    pub fn value_range(&self) -> Option<(u8, u8)> {
        let lo = self.counts.iter().position(|&c| c > 0)?;
        let hi = self.counts.iter().rposition(|&c| c > 0)?;
        Some((lo as u8, hi as u8))
    }

    /// Number of pixels with value strictly greater than `t`.
    pub fn count_above(&self, t: u8) -> u64 {
        self.counts[t as usize + 1..].iter().sum()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::Domain("histogram is empty".into()))
        } else {
            Ok(())
        }
    }
}

/// Count every gray level of `img`.
pub fn compute_histogram(img: &GrayImage) -> Histogram {
    let mut counts = [0u64; LEVELS];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    Histogram {
        counts,
        total: img.pixels().len() as u64,
    }
}

/// Zeroth, first and second raw moments of a set of pixels, in exact integers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Moments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl Moments {
    fn add_bin(self, level: usize, n: u64) -> Self {
        let l = level as u128;
        Moments {
            count: self.count + n,
            sum: self.sum + l * n as u128,
            sum_sq: self.sum_sq + l * l * n as u128,
        }
    }

    pub fn minus(self, other: Moments) -> Moments {
        Moments {
            count: self.count - other.count,
            sum: self.sum - other.sum,
            sum_sq: self.sum_sq - other.sum_sq,
        }
    }

    /// count² times the population variance: n·Σv² − (Σv)². Exact, never negative.
    pub fn scaled_variance(self) -> u128 {
        self.count as u128 * self.sum_sq - self.sum * self.sum
    }

    pub fn mean(self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum as f64 / self.count as f64
        }
    }

    pub fn variance(self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            let n = self.count as f64;
            self.scaled_variance() as f64 / (n * n)
        }
    }
}

/// Prefix moments: entry `t` covers all levels `<= t`.
#[derive(Debug, Clone)]
pub struct CumulativeMoments {
    prefix: [Moments; LEVELS],
}

impl CumulativeMoments {
    pub fn new(hist: &Histogram) -> Self {
        let mut prefix = [Moments::default(); LEVELS];
        let mut acc = Moments::default();
        for (level, &n) in hist.counts.iter().enumerate() {
            acc = acc.add_bin(level, n);
            prefix[level] = acc;
        }
        CumulativeMoments { prefix }
    }

    pub fn total(&self) -> Moments {
        self.prefix[LEVELS - 1]
    }

    /// Moments of the pixels `<= t`.
    pub fn at_most(&self, t: u8) -> Moments {
        self.prefix[t as usize]
    }

    /// Moments of the pixels `> t`.
    pub fn above(&self, t: u8) -> Moments {
        self.total().minus(self.at_most(t))
    }
}
