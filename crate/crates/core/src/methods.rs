//! Global threshold selectors.
//!
//! Every selector returns a [`ThresholdResult`]; pixels strictly above `t`
//! become object when the result is applied with [`crate::apply_threshold`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edge::{emt_threshold, DEFAULT_EDGE_PERCENTILE};
use crate::error::{Error, Result};
use crate::histogram::{compute_histogram, CumulativeMoments, Histogram, Moments};
use crate::image::{gray_level, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mean,
    Ptile,
    Hdt,
    Emt,
    Manual,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Manual,
        Method::Mean,
        Method::Ptile,
        Method::Hdt,
        Method::Emt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Ptile => "ptile",
            Method::Hdt => "hdt",
            Method::Emt => "emt",
            Method::Manual => "manual",
        }
    }

    /// Methods that pick `t` without a human in the loop.
    pub fn is_automatic(self) -> bool {
        self != Method::Manual
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Method::Mean),
            "ptile" => Ok(Method::Ptile),
            "hdt" => Ok(Method::Hdt),
            "emt" => Ok(Method::Emt),
            "manual" => Ok(Method::Manual),
            other => Err(Error::Parameter(format!("unknown method `{other}`"))),
        }
    }
}

/// Parameters echoed back with a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_percentile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub method: Method,
    pub t: u8,
    /// C(t) for hdt, achieved object fraction for ptile, edge-pixel count for emt.
    #[serde(default)]
    pub criterion: Option<f64>,
    #[serde(default)]
    pub params: MethodParams,
}

/// Probability, mean and population variance of one side of a split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub probability: f64,
    pub mean: f64,
    pub variance: f64,
}

impl GroupStats {
    fn from_moments(m: Moments, total: u64) -> Self {
        GroupStats {
            probability: m.count as f64 / total as f64,
            mean: m.mean(),
            variance: m.variance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WithinGroupVariance {
    pub criterion: f64,
    /// Pixels `<= t`.
    pub low: GroupStats,
    /// Pixels `> t`.
    pub high: GroupStats,
}

/// Floor of the mean gray level.
pub fn mean_threshold(hist: &Histogram) -> Result<ThresholdResult> {
    hist.require_nonempty()?;
    let sum: u128 = hist
        .counts()
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();
    let t = (sum / hist.total() as u128) as u8;
    Ok(ThresholdResult {
        method: Method::Mean,
        t,
        criterion: None,
        params: MethodParams::default(),
    })
}

fn check_ratio(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Fraction of pixels strictly above `t`.
pub fn ratio_above(hist: &Histogram, t: u8) -> f64 {
    hist.count_above(t) as f64 / hist.total() as f64
}

/// Smallest `t` whose above-`t` area fraction does not exceed `p`.
///
/// Objects are assumed brighter than the background. Starting with every
/// pixel counted as object, levels are peeled off from the dark end until the
/// remaining area drops to `p` of the image.
pub fn ptile_threshold(hist: &Histogram, p: f64) -> Result<ThresholdResult> {
    check_ratio("p", p)?;
    hist.require_nonempty()?;
    let total = hist.total();
    let mut remaining = total;
    let mut chosen = 255u8;
    for (level, &c) in hist.counts().iter().enumerate() {
        remaining -= c;
        if remaining as f64 / total as f64 <= p {
            chosen = level as u8;
            break;
        }
    }
    Ok(ThresholdResult {
        method: Method::Ptile,
        t: chosen,
        criterion: Some(ratio_above(hist, chosen)),
        params: MethodParams {
            p: Some(p),
            edge_percentile: None,
        },
    })
}

/// N·C(t) as the exact fraction `num / den`.
///
/// N·C = A_low / n_low + A_high / n_high with A = n·Σv² − (Σv)²;
/// an empty group contributes nothing.
fn scaled_criterion(low: Moments, high: Moments) -> (u128, u128) {
    match (low.count, high.count) {
        (0, 0) => (0, 1),
        (0, n) => (high.scaled_variance(), n as u128),
        (n, 0) => (low.scaled_variance(), n as u128),
        (nl, nh) => (
            low.scaled_variance() * nh as u128 + high.scaled_variance() * nl as u128,
            nl as u128 * nh as u128,
        ),
    }
}

/// Exact comparison of `p/q` with `r/s` (q, s > 0) by continued-fraction expansion.
fn cmp_fractions(mut p: u128, mut q: u128, mut r: u128, mut s: u128) -> Ordering {
    let mut flipped = false;
    loop {
        let (a, ra) = (p / q, p % q);
        let (b, rb) = (r / s, r % s);
        let ord = match (a.cmp(&b), ra == 0, rb == 0) {
            (Ordering::Equal, true, true) => Ordering::Equal,
            (Ordering::Equal, true, false) => Ordering::Less,
            (Ordering::Equal, false, true) => Ordering::Greater,
            (Ordering::Equal, false, false) => {
                // ra/q vs rb/s compares the same as s/rb vs q/ra
                (p, q, r, s) = (q, ra, s, rb);
                flipped = !flipped;
                continue;
            }
            (ord, _, _) => ord,
        };
        return if flipped { ord.reverse() } else { ord };
    }
}

fn criterion_value(num: u128, den: u128, total: u64) -> f64 {
    num as f64 / den as f64 / total as f64
}

/// Within-group variance C(t) = P_low·σ²_low + P_high·σ²_high for the split
/// `<= t` / `> t`.
pub fn within_group_variance(hist: &Histogram, t: u8) -> Result<WithinGroupVariance> {
    hist.require_nonempty()?;
    let moments = CumulativeMoments::new(hist);
    Ok(split_variance(&moments, t, hist.total()))
}

fn split_variance(moments: &CumulativeMoments, t: u8, total: u64) -> WithinGroupVariance {
    let low = moments.at_most(t);
    let high = moments.above(t);
    let (num, den) = scaled_criterion(low, high);
    WithinGroupVariance {
        criterion: criterion_value(num, den, total),
        low: GroupStats::from_moments(low, total),
        high: GroupStats::from_moments(high, total),
    }
}

/// Exhaustive argmin of the within-group variance over the levels that keep
/// both groups nonempty. Ties go to the smallest `t`; a constant image
/// returns its own value (everything background).
pub fn hdt_threshold(hist: &Histogram) -> Result<ThresholdResult> {
    hist.require_nonempty()?;
    let (lo, hi) = hist.value_range().expect("nonempty histogram has a range");
    let total = hist.total();
    let moments = CumulativeMoments::new(hist);
    let result = |t: u8, criterion: f64| ThresholdResult {
        method: Method::Hdt,
        t,
        criterion: Some(criterion),
        params: MethodParams::default(),
    };
    if lo == hi {
        return Ok(result(lo, 0.0));
    }

    let mut best_t = lo;
    let mut best = scaled_criterion(moments.at_most(lo), moments.above(lo));
    for t in lo + 1..hi {
        let c = scaled_criterion(moments.at_most(t), moments.above(t));
        if cmp_fractions(c.0, c.1, best.0, best.1) == Ordering::Less {
            best = c;
            best_t = t;
        }
    }
    Ok(result(best_t, criterion_value(best.0, best.1, total)))
}

/// A human-chosen threshold, validated and echoed.
pub fn manual_threshold(_hist: &Histogram, t: i64) -> Result<ThresholdResult> {
    let t = gray_level(t).map_err(|_| Error::Parameter(format!("threshold {t} outside [0, 255]")))?;
    Ok(ThresholdResult {
        method: Method::Manual,
        t,
        criterion: None,
        params: MethodParams::default(),
    })
}

/// A method together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Mean,
    Ptile { p: f64 },
    Hdt,
    Emt { edge_percentile: f64 },
    Manual { t: i64 },
}

impl MethodSpec {
    pub fn method(&self) -> Method {
        match self {
            MethodSpec::Mean => Method::Mean,
            MethodSpec::Ptile { .. } => Method::Ptile,
            MethodSpec::Hdt => Method::Hdt,
            MethodSpec::Emt { .. } => Method::Emt,
            MethodSpec::Manual { .. } => Method::Manual,
        }
    }

    /// Default-parameter spec for an automatic method.
    pub fn automatic(method: Method) -> Option<MethodSpec> {
        match method {
            Method::Mean => Some(MethodSpec::Mean),
            Method::Ptile => Some(MethodSpec::Ptile { p: DEFAULT_P }),
            Method::Hdt => Some(MethodSpec::Hdt),
            Method::Emt => Some(MethodSpec::Emt {
                edge_percentile: DEFAULT_EDGE_PERCENTILE,
            }),
            Method::Manual => None,
        }
    }
}

pub const DEFAULT_P: f64 = 0.5;

/// Run `spec` on `img`.
pub fn select_threshold(img: &GrayImage, spec: MethodSpec) -> Result<ThresholdResult> {
    select_threshold_with_histogram(img, &compute_histogram(img), spec)
}

/// Like [`select_threshold`] with a precomputed histogram of `img`.
pub fn select_threshold_with_histogram(
    img: &GrayImage,
    hist: &Histogram,
    spec: MethodSpec,
) -> Result<ThresholdResult> {
    match spec {
        MethodSpec::Mean => mean_threshold(hist),
        MethodSpec::Ptile { p } => ptile_threshold(hist, p),
        MethodSpec::Hdt => hdt_threshold(hist),
        MethodSpec::Emt { edge_percentile } => emt_threshold(img, edge_percentile),
        MethodSpec::Manual { t } => manual_threshold(hist, t),
    }
}
