//! Dominant colors of an image.
//!
//! Two summaries are produced. [`kmeans_palette`] clusters pixels and reports
//! the cluster centers with their pixel shares. [`ccs_top_n`] skips clustering
//! entirely and counts how many pixels fall in each color-system category.
//!
//! Clustering happens in a cone embedding of HSV rather than on raw
//! `(h, s, v)` triples, so that hues 1 and 179 are neighbors instead of
//! opposite ends of an axis:
//!
//! ```text
//! x = s·v·cos(2h°)   y = s·v·sin(2h°)   z = v
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{
    hsv_to_rgb, quantize_to_ccs, rgb_to_hsv, CcsCode, HsvPixel, PixelImage, CCS_CODE_COUNT,
    HUE_RANGE,
};
use crate::error::{Error, Result};

/// Below this many distinct points the assignment step runs sequentially.
const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ConePoint {
    fn coords(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    fn from_coords(c: [f64; 3]) -> Self {
        ConePoint {
            x: c[0],
            y: c[1],
            z: c[2],
        }
    }

    pub fn distance_sq(self, other: ConePoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    fn bits(self) -> [u64; 3] {
        self.coords().map(f64::to_bits)
    }
}

pub fn embed_cone(p: HsvPixel) -> ConePoint {
    let angle = (2.0 * p.h).to_radians();
    let chroma = p.s * p.v;
    ConePoint {
        x: chroma * angle.cos(),
        y: chroma * angle.sin(),
        z: p.v,
    }
}

/// Inverse of [`embed_cone`]. Points on the axis map to hue 0, saturation 0.
pub fn cone_to_hsv(c: ConePoint) -> HsvPixel {
    let v = c.z.clamp(0.0, 1.0);
    let chroma = c.x.hypot(c.y);
    if v <= 0.0 || chroma <= 1e-12 {
        return HsvPixel::new(0.0, 0.0, v);
    }
    let s = (chroma / v).clamp(0.0, 1.0);
    let mut h = c.y.atan2(c.x).to_degrees().rem_euclid(360.0) / 2.0;
    if h >= HUE_RANGE {
        h -= HUE_RANGE;
    }
    HsvPixel::new(h, s, v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Independent k-means++ initializations; the fit with the lowest
    /// inertia is kept.
    pub restarts: usize,
    /// Images with more pixels than this are subsampled before clustering.
    pub sample_budget: usize,
}

impl Default for KmeansConfig {
    fn default() -> Self {
        KmeansConfig {
            k: 5,
            seed: 0,
            max_iterations: 100,
            restarts: 10,
            sample_budget: 250_000,
        }
    }
}

impl KmeansConfig {
    pub fn with_k(k: usize, seed: u64) -> Self {
        KmeansConfig {
            k,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub center: HsvPixel,
    pub cone: ConePoint,
    pub proportion: f64,
    pub pixel_count: u64,
    pub ccs: CcsCode,
}

impl PaletteEntry {
    pub fn rgb_hex(&self) -> String {
        hsv_to_rgb(self.center).hex()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    /// Sorted by proportion, largest first.
    pub entries: Vec<PaletteEntry>,
    /// Set when the input had fewer distinct colors than `k`; each distinct
    /// color then becomes its own entry.
    pub degenerate: bool,
    pub iterations: usize,
    /// Within-cluster sum of squared cone distances, pixel weighted.
    pub inertia: f64,
}

impl Palette {
    /// `(hex RGB, proportion)` pairs, the form used for swatch output.
    pub fn swatches(&self) -> Vec<(String, f64)> {
        self.entries
            .iter()
            .map(|e| (e.rgb_hex(), e.proportion))
            .collect()
    }
}

/// K-means palette of an image. Pixels are deduplicated and clustered with
/// multiplicity weights, which gives the same result as clustering every
/// pixel.
pub fn kmeans_palette(img: &PixelImage, config: &KmeansConfig) -> Result<Palette> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    let mut counts: BTreeMap<_, u64> = BTreeMap::new();
    for p in subsample(img.pixels(), config.sample_budget, config.seed) {
        *counts.entry(p).or_default() += 1;
    }
    let weighted = counts
        .into_iter()
        .map(|(p, n)| (rgb_to_hsv(p), n));
    kmeans_weighted(weighted, config)
}

/// K-means over HSV pixels directly.
pub fn kmeans_hsv(pixels: &[HsvPixel], config: &KmeansConfig) -> Result<Palette> {
    if pixels.is_empty() {
        return Err(Error::EmptyImage);
    }
    kmeans_weighted(pixels.iter().map(|&p| (p, 1)), config)
}

fn subsample(
    pixels: &[crate::color::RgbPixel],
    budget: usize,
    seed: u64,
) -> Vec<crate::color::RgbPixel> {
    if budget == 0 || pixels.len() <= budget {
        return pixels.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3b_1e00_0000);
    rand::seq::index::sample(&mut rng, pixels.len(), budget)
        .into_iter()
        .map(|i| pixels[i])
        .collect()
}

fn kmeans_weighted(
    pixels: impl Iterator<Item = (HsvPixel, u64)>,
    config: &KmeansConfig,
) -> Result<Palette> {
    if config.k == 0 {
        return Err(Error::ZeroClusters);
    }
    // Merge pixels that land on the same cone point (grays of equal value).
    let mut merged: BTreeMap<[u64; 3], u64> = BTreeMap::new();
    for (p, n) in pixels {
        *merged.entry(embed_cone(p).bits()).or_default() += n;
    }
    let points: Vec<ConePoint> = merged
        .keys()
        .map(|b| ConePoint::from_coords(b.map(f64::from_bits)))
        .collect();
    let weights: Vec<u64> = merged.values().copied().collect();
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return Err(Error::EmptyImage);
    }

    if points.len() <= config.k && config.k > 1 {
        let entries = points
            .iter()
            .zip(&weights)
            .map(|(&c, &n)| entry(c, n, total))
            .collect();
        return Ok(Palette {
            entries: sorted(entries),
            degenerate: points.len() < config.k,
            iterations: 0,
            inertia: 0.0,
        });
    }

    let fit = best_fit(&points, &weights, config);
    let entries = fit
        .centers
        .iter()
        .zip(&fit.cluster_weights)
        .filter(|(_, &n)| n > 0)
        .map(|(&c, &n)| entry(c, n, total))
        .collect();
    Ok(Palette {
        entries: sorted(entries),
        degenerate: false,
        iterations: fit.iterations,
        inertia: fit.inertia,
    })
}

fn entry(cone: ConePoint, count: u64, total: u64) -> PaletteEntry {
    let center = cone_to_hsv(cone);
    PaletteEntry {
        center,
        cone,
        proportion: count as f64 / total as f64,
        pixel_count: count,
        ccs: quantize_to_ccs(center),
    }
}

fn sorted(mut entries: Vec<PaletteEntry>) -> Vec<PaletteEntry> {
    // Stable: equal shares keep cluster order.
    entries.sort_by_key(|e| std::cmp::Reverse(e.pixel_count));
    entries
}

struct LloydFit {
    centers: Vec<ConePoint>,
    cluster_weights: Vec<u64>,
    iterations: usize,
    inertia: f64,
}

fn nearest(p: ConePoint, centers: &[ConePoint]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &c) in centers.iter().enumerate() {
        let d = p.distance_sq(c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn assign(points: &[ConePoint], centers: &[ConePoint]) -> Vec<(usize, f64)> {
    if points.len() >= PARALLEL_THRESHOLD {
        points.par_iter().map(|&p| nearest(p, centers)).collect()
    } else {
        points.iter().map(|&p| nearest(p, centers)).collect()
    }
}

/// Draw an index with probability proportional to `scores`.
fn weighted_pick(rng: &mut ChaCha8Rng, scores: &[f64]) -> usize {
    let total: f64 = scores.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    let mut last_positive = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        last_positive = i;
        if target < s {
            return i;
        }
        target -= s;
    }
    last_positive
}

fn kmeans_plus_plus(
    points: &[ConePoint],
    weights: &[u64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<ConePoint> {
    let w: Vec<f64> = weights.iter().map(|&n| n as f64).collect();
    let mut centers = vec![points[weighted_pick(rng, &w)]];
    let mut dist: Vec<f64> = points.iter().map(|p| p.distance_sq(centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = dist.iter().zip(&w).map(|(d, w)| d * w).collect();
        let next = points[weighted_pick(rng, &scores)];
        centers.push(next);
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(p.distance_sq(next));
        }
    }
    centers
}

/// Run every restart and keep the lowest inertia; ties go to the earlier run.
fn best_fit(points: &[ConePoint], weights: &[u64], config: &KmeansConfig) -> LloydFit {
    let mut best: Option<LloydFit> = None;
    for run in 0..config.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(run as u64);
        let fit = lloyd(points, weights, config, &mut rng);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

fn lloyd(
    points: &[ConePoint],
    weights: &[u64],
    config: &KmeansConfig,
    rng: &mut ChaCha8Rng,
) -> LloydFit {
    let k = config.k;
    let mut centers = kmeans_plus_plus(points, weights, k, rng);
    let mut labels: Vec<usize> = vec![usize::MAX; points.len()];
    let mut iterations = 0;

    loop {
        let assignment = assign(points, &centers);
        let changed = assignment
            .iter()
            .zip(&labels)
            .filter(|((l, _), old)| l != *old)
            .count();
        for (label, (l, _)) in labels.iter_mut().zip(&assignment) {
            *label = *l;
        }
        if changed == 0 || iterations >= config.max_iterations {
            break;
        }
        iterations += 1;

        // Sums accumulate in point order so results do not depend on threads.
        let mut sums = vec![[0.0f64; 3]; k];
        let mut mass = vec![0u64; k];
        for ((p, &w), &l) in points.iter().zip(weights).zip(&labels) {
            let c = p.coords();
            for axis in 0..3 {
                sums[l][axis] += c[axis] * w as f64;
            }
            mass[l] += w;
        }
        for j in 0..k {
            if mass[j] > 0 {
                let m = mass[j] as f64;
                centers[j] = ConePoint::from_coords(sums[j].map(|s| s / m));
            }
        }
        // An empty cluster takes over the point farthest from its center.
        for j in 0..k {
            if mass[j] == 0 {
                let far = assignment
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.0.cmp(&a.0)))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                centers[j] = points[far];
            }
        }
    }

    let mut cluster_weights = vec![0u64; k];
    let mut inertia = 0.0;
    for ((p, &w), &l) in points.iter().zip(weights).zip(&labels) {
        cluster_weights[l] += w;
        inertia += w as f64 * p.distance_sq(centers[l]);
    }
    LloydFit {
        centers,
        cluster_weights,
        iterations,
        inertia,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcsFrequencyEntry {
    pub code: CcsCode,
    pub pixel_count: u64,
    pub fraction: f64,
}

/// Exact per-category pixel counts over all 1000 codes, indexed by
/// [`CcsCode::index`].
pub fn ccs_histogram(img: &PixelImage) -> Vec<u64> {
    let mut counts = vec![0u64; CCS_CODE_COUNT];
    for &p in img.pixels() {
        counts[quantize_to_ccs(rgb_to_hsv(p)).index()] += 1;
    }
    counts
}

/// The `n` most frequent categories, by count then by ascending code.
/// Never pads: codes with no pixels are left out.
pub fn ccs_top_n(img: &PixelImage, n: usize) -> Result<Vec<CcsFrequencyEntry>> {
    if img.is_empty() {
        return Err(Error::EmptyImage);
    }
    if n == 0 {
        return Err(Error::ZeroTopN);
    }
    Ok(top_n_from_counts(&ccs_histogram(img), n))
}

pub fn top_n_from_counts(counts: &[u64], n: usize) -> Vec<CcsFrequencyEntry> {
    let total: u64 = counts.iter().sum();
    let mut ranked: Vec<(usize, u64)> = counts
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(n)
        .filter_map(|(i, c)| {
            Some(CcsFrequencyEntry {
                code: CcsCode::from_index(i)?,
                pixel_count: c,
                fraction: c as f64 / total as f64,
            })
        })
        .collect()
}
