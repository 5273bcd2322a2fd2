//! Reference implementations written for clarity, not speed, plus seeded
//! input generators. Nothing here calls into the selectors it is used to
//! check; only the plain data types are shared.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thresh_core::GrayImage;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-pixel "1 if f > T else 0".
pub fn naive_binarize(pixels: &[u8], t: u8) -> Vec<u8> {
    let mut out = Vec::with_capacity(pixels.len());
    for &f in pixels {
        if f > t {
            out.push(1);
        } else {
            out.push(0);
        }
    }
    out
}

/// floor(Σv / N) in arbitrary precision.
pub fn bigint_mean_floor(pixels: &[u8]) -> u8 {
    let sum = pixels.iter().fold(BigUint::zero(), |acc, &v| acc + BigUint::from(v));
    (sum / BigUint::from(pixels.len())).to_u8().expect("mean of u8 values fits")
}

/// Fraction of values strictly above `t`, counted from raw pixels.
pub fn fraction_above(pixels: &[u8], t: i32) -> f64 {
    pixels.iter().filter(|&&v| i32::from(v) > t).count() as f64 / pixels.len() as f64
}

/// Smallest t in 0..=255 with fraction_above(t) <= p, by exhaustive scan.
pub fn brute_force_ptile(pixels: &[u8], p: f64) -> u8 {
    (0..=255u8)
        .find(|&t| fraction_above(pixels, i32::from(t)) <= p)
        .expect("t = 255 always qualifies")
}

/// Group statistics computed by definition: mean first, then squared deviations.
fn direct_group(bins: &[(u8, u64)]) -> (u64, f64) {
    let n: u64 = bins.iter().map(|&(_, c)| c).sum();
    if n == 0 {
        return (0, 0.0);
    }
    let mean = bins.iter().map(|&(v, c)| f64::from(v) * c as f64).sum::<f64>() / n as f64;
    let ss = bins
        .iter()
        .map(|&(v, c)| c as f64 * (f64::from(v) - mean).powi(2))
        .sum::<f64>();
    (n, ss / n as f64)
}

fn bins_of(counts: &[u64; 256]) -> Vec<(u8, u64)> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(v, &c)| (v as u8, c))
        .collect()
}

/// C(t) by direct partition of the (value, multiplicity) multiset.
pub fn direct_within_group_variance(counts: &[u64; 256], t: u8) -> f64 {
    let bins = bins_of(counts);
    let total: u64 = bins.iter().map(|&(_, c)| c).sum();
    let (low, high): (Vec<_>, Vec<_>) = bins.iter().partition(|&&(v, _)| v <= t);
    let (nl, vl) = direct_group(&low);
    let (nh, vh) = direct_group(&high);
    nl as f64 / total as f64 * vl + nh as f64 / total as f64 * vh
}

/// Exact N·C(t)·Πn² pieces as a rational: Σ_groups Σ c·(v·n − s)² / n² over N.
/// Returned as (numerator, denominator) big integers.
fn exact_criterion(counts: &[u64; 256], t: u8) -> (BigInt, BigInt) {
    let mut num = BigInt::zero();
    let mut den = BigInt::from(1u8);
    for low in [true, false] {
        let group: Vec<(u8, u64)> = bins_of(counts)
            .into_iter()
            .filter(|&(v, _)| (v <= t) == low)
            .collect();
        let n: u64 = group.iter().map(|&(_, c)| c).sum();
        if n == 0 {
            continue;
        }
        let n_big = BigInt::from(n);
        let s: BigInt = group.iter().map(|&(v, c)| BigInt::from(v) * BigInt::from(c)).sum();
        let dev: BigInt = group
            .iter()
            .map(|&(v, c)| {
                let d = BigInt::from(v) * &n_big - &s;
                BigInt::from(c) * &d * &d
            })
            .sum();
        let g_den = &n_big * &n_big;
        num = num * &g_den + dev * &den;
        den *= g_den;
    }
    (num, den)
}

fn cmp_exact(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> Ordering {
    (&a.0 * &b.1).cmp(&(&b.0 * &a.1))
}

/// Within-group variance argmin by direct partition at every candidate.
///
/// Each candidate is scored in floating point; candidates within 1e-9
/// relative of the best are then ranked exactly in big-integer arithmetic so
/// genuine ties resolve to the smallest `t`.
pub fn brute_force_hdt(counts: &[u64; 256]) -> (u8, f64) {
    let lo = counts.iter().position(|&c| c > 0).expect("nonempty") as u8;
    let hi = counts.iter().rposition(|&c| c > 0).expect("nonempty") as u8;
    if lo == hi {
        return (lo, 0.0);
    }
    let scores: Vec<(u8, f64)> = (lo..hi)
        .map(|t| (t, direct_within_group_variance(counts, t)))
        .collect();
    let best = scores.iter().map(|&(_, c)| c).fold(f64::INFINITY, f64::min);
    let slack = 1e-9 * best.abs().max(1e-300);
    let mut near: Vec<u8> = scores
        .iter()
        .filter(|&&(_, c)| c <= best + slack)
        .map(|&(t, _)| t)
        .collect();
    if near.len() > 1 {
        let exact: Vec<_> = near.iter().map(|&t| (t, exact_criterion(counts, t))).collect();
        let min = exact
            .iter()
            .min_by(|a, b| cmp_exact(&a.1, &b.1))
            .map(|e| e.1.clone())
            .unwrap();
        near = exact
            .into_iter()
            .filter(|e| cmp_exact(&e.1, &min) == Ordering::Equal)
            .map(|e| e.0)
            .collect();
    }
    let t = near[0];
    (t, direct_within_group_variance(counts, t))
}

/// The eight Kirsch masks written out in full, east first, each a 45°
/// counter-clockwise turn of the previous one.
pub fn kirsch_masks() -> [[[i32; 3]; 3]; 8] {
    let east = [[-3, -3, 5], [-3, 0, 5], [-3, -3, 5]];
    let mut masks = [east; 8];
    for k in 1..8 {
        masks[k] = rotate45(masks[k - 1]);
    }
    masks
}

/// Shift the outer ring of a 3x3 mask one step (45°).
fn rotate45(m: [[i32; 3]; 3]) -> [[i32; 3]; 3] {
    let ring = [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0)];
    let mut out = m;
    for i in 0..8 {
        let (r, c) = ring[i];
        let (sr, sc) = ring[(i + 1) % 8];
        out[r][c] = m[sr][sc];
    }
    out
}

/// Direct 3x3 correlation with each mask, replicate padding, max clamped at 0.
pub fn direct_kirsch(img: &GrayImage) -> Vec<u16> {
    let masks = kirsch_masks();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let at = |x: i64, y: i64| i32::from(img.get(x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize));
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut best = i32::MIN;
            for m in &masks {
                let mut acc = 0;
                for (dy, row) in m.iter().enumerate() {
                    for (dx, &k) in row.iter().enumerate() {
                        acc += k * at(x + dx as i64 - 1, y + dy as i64 - 1);
                    }
                }
                best = best.max(acc);
            }
            out.push(best.max(0) as u16);
        }
    }
    out
}

/// Rotate a square-or-not raster 90° clockwise.
pub fn rot90<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    // new width = height; new(x', y') = old(x = y', y = height - 1 - x')
    let mut out = Vec::with_capacity(data.len());
    for y in 0..width {
        for x in 0..height {
            out.push(data[(height - 1 - x) * width + y]);
        }
    }
    out
}

/// Interior of a raster (one-pixel border dropped).
pub fn interior<T: Copy>(data: &[T], width: usize, height: usize) -> Vec<T> {
    let mut out = Vec::new();
    for y in 1..height.saturating_sub(1) {
        for x in 1..width.saturating_sub(1) {
            out.push(data[y * width + x]);
        }
    }
    out
}

pub fn random_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.random()).unwrap()
}

/// Random image with values confined to `[lo, hi]`.
pub fn random_image_in(rng: &mut impl Rng, width: usize, height: usize, lo: u8, hi: u8) -> GrayImage {
    GrayImage::from_fn(width, height, |_, _| rng.random_range(lo..=hi)).unwrap()
}

/// Random image made of a few flat blobs plus noise, closer to real content
/// than uniform noise.
pub fn random_blobby_image(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    let levels: Vec<u8> = (0..rng.random_range(2..=4)).map(|_| rng.random()).collect();
    let cell = rng.random_range(2..=6);
    let noise = rng.random_range(0..=20i32);
    let grid: Vec<u8> = (0..(width / cell + 1) * (height / cell + 1))
        .map(|_| levels[rng.random_range(0..levels.len())])
        .collect();
    GrayImage::from_fn(width, height, |x, y| {
        let base = i32::from(grid[(y / cell) * (width / cell + 1) + x / cell]);
        (base + rng.random_range(-noise..=noise)).clamp(0, 255) as u8
    })
    .unwrap()
}

/// Histogram counts drawn from 1–4 Gaussian-shaped bumps plus a uniform
/// floor, totalling between 10² and 10⁶ pixels.
pub fn random_mixture_counts(rng: &mut impl Rng) -> [u64; 256] {
    let total = 10f64.powf(rng.random_range(2.0..=6.0)).round() as u64;
    let bumps = rng.random_range(1..=4);
    let centers: Vec<(f64, f64, f64)> = (0..bumps)
        .map(|_| {
            (
                rng.random_range(0.0..256.0),
                rng.random_range(1.0..40.0),
                rng.random_range(0.2..1.0),
            )
        })
        .collect();
    let floor = rng.random_range(0.0..0.3);
    let weights: Vec<f64> = (0..256)
        .map(|i| {
            let x = f64::from(i);
            let bump: f64 = centers
                .iter()
                .map(|&(mu, sd, a)| a * (-(x - mu).powi(2) / (2.0 * sd * sd)).exp())
                .sum();
            bump + floor / 256.0
        })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let mut counts = [0u64; 256];
    let mut cdf = Vec::with_capacity(256);
    let mut acc = 0.0;
    for w in &weights {
        acc += w / wsum;
        cdf.push(acc);
    }
    for _ in 0..total.min(20_000) {
        let u: f64 = rng.random();
        let i = cdf.partition_point(|&c| c < u).min(255);
        counts[i] += 1;
    }
    if total > 20_000 {
        // Large totals: deterministic expected counts plus sampled jitter.
        let sampled: u64 = counts.iter().sum();
        let rest = total - sampled;
        for (c, w) in counts.iter_mut().zip(&weights) {
            *c += (rest as f64 * w / wsum).floor() as u64;
        }
    }
    counts
}
