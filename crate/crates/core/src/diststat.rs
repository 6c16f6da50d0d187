//! Hue distributions and their comparison.

use serde::{Deserialize, Serialize};

use crate::color::HsvPixel;
use crate::error::{Error, Result};

pub const HUE_BINS: usize = 180;

/// Pixel counts over 180 one-unit hue bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HueHistogram {
    pub label: String,
    pub bins: Vec<u64>,
    pub total: u64,
}

impl HueHistogram {
    pub fn empty(label: impl Into<String>) -> Self {
        HueHistogram {
            label: label.into(),
            bins: vec![0; HUE_BINS],
            total: 0,
        }
    }

    /// Build from raw counts; `counts` must have 180 entries.
    pub fn from_counts(label: impl Into<String>, counts: &[u64]) -> Result<Self> {
        if counts.len() != HUE_BINS {
            return Err(Error::Config(format!(
                "hue histogram needs {HUE_BINS} bins, got {}",
                counts.len()
            )));
        }
        Ok(HueHistogram {
            label: label.into(),
            bins: counts.to_vec(),
            total: counts.iter().sum(),
        })
    }

    pub fn add(&mut self, p: HsvPixel) {
        self.bins[bin_of(p.h)] += 1;
        self.total += 1;
    }

    /// Add another histogram's counts into this one.
    pub fn merge(&mut self, other: &HueHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn fraction(&self, bin: usize) -> f64 {
        self.bins[bin] as f64 / self.total as f64
    }

    /// Share of pixels with bin index in `lo..=hi`.
    pub fn band_mass(&self, lo: usize, hi: usize) -> f64 {
        let count: u64 = self.bins[lo..=hi.min(HUE_BINS - 1)].iter().sum();
        count as f64 / self.total as f64
    }

    fn require_mass(&self) -> Result<()> {
        if self.total == 0 {
            Err(Error::ZeroTotal(self.label.clone()))
        } else {
            Ok(())
        }
    }
}

fn bin_of(h: f64) -> usize {
    (h.floor().max(0.0) as usize).min(HUE_BINS - 1)
}

pub fn build_histogram<'a>(
    pixels: impl IntoIterator<Item = &'a HsvPixel>,
    label: impl Into<String>,
) -> Result<HueHistogram> {
    let mut hist = HueHistogram::empty(label);
    for p in pixels {
        hist.add(*p);
    }
    if hist.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCurve {
    /// Density at bin centers; sums to 1 (bin width is 1).
    pub samples: Vec<f64>,
    pub bandwidth: f64,
}

/// Wrapped Gaussian kernel evaluated at circular offsets `0..180`.
fn wrapped_kernel(bandwidth: f64) -> Vec<f64> {
    let wraps = (6.0 * bandwidth / HUE_BINS as f64).ceil() as i64 + 1;
    let two_var = 2.0 * bandwidth * bandwidth;
    (0..HUE_BINS)
        .map(|d| {
            (-wraps..=wraps)
                .map(|m| {
                    let x = d as f64 + (m * HUE_BINS as i64) as f64;
                    (-x * x / two_var).exp()
                })
                .sum()
        })
        .collect()
}

/// Circular Gaussian kernel density estimate of a hue histogram.
///
/// Each sample is accumulated in offset order relative to its own bin, so
/// rotating the histogram rotates the curve without changing a single bit.
pub fn fit_curve(h: &HueHistogram, bandwidth: f64) -> Result<FittedCurve> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Bandwidth(bandwidth));
    }
    h.require_mass()?;
    let kernel = wrapped_kernel(bandwidth);
    let norm = h.total as f64 * kernel.iter().sum::<f64>();
    let samples = (0..HUE_BINS)
        .map(|j| {
            let raw: f64 = kernel
                .iter()
                .enumerate()
                .map(|(d, k)| h.bins[(j + HUE_BINS - d) % HUE_BINS] as f64 * k)
                .sum();
            raw / norm
        })
        .collect();
    Ok(FittedCurve { samples, bandwidth })
}

/// Two-sample Kolmogorov-Smirnov statistic over the linear hue axis.
pub fn ks_statistic(a: &HueHistogram, b: &HueHistogram) -> Result<f64> {
    a.require_mass()?;
    b.require_mass()?;
    let (ta, tb) = (a.total as f64, b.total as f64);
    let mut ca = 0u64;
    let mut cb = 0u64;
    let mut d = 0.0f64;
    for (x, y) in a.bins.iter().zip(&b.bins) {
        ca += x;
        cb += y;
        d = d.max((ca as f64 / ta - cb as f64 / tb).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl KsMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

pub fn ks_matrix(hs: &[HueHistogram]) -> Result<KsMatrix> {
    if hs.len() < 2 {
        return Err(Error::TooFewHistograms(hs.len()));
    }
    let n = hs.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        hs[i].require_mass()?;
        for j in (i + 1)..n {
            let d = ks_statistic(&hs[i], &hs[j])?;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    Ok(KsMatrix {
        labels: hs.iter().map(|h| h.label.clone()).collect(),
        values,
    })
}

/// Named hue bands used when comparing photo colors to street-view colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HueBand {
    Warm,
    Green,
    Blue,
}

impl HueBand {
    pub const ALL: [HueBand; 3] = [HueBand::Warm, HueBand::Green, HueBand::Blue];

    /// Inclusive bin range.
    pub fn range(self) -> (usize, usize) {
        match self {
            HueBand::Warm => (0, 30),
            HueBand::Green => (45, 75),
            HueBand::Blue => (105, 135),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HueBand::Warm => "warm",
            HueBand::Green => "green",
            HueBand::Blue => "blue",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftDirection {
    Increase,
    Decrease,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandShift {
    pub band: HueBand,
    pub photo_mass: f64,
    pub street_mass: f64,
    /// `photo_mass - street_mass`.
    pub delta: f64,
    pub direction: ShiftDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub ks: f64,
    pub bands: Vec<BandShift>,
}

impl ShiftReport {
    pub fn band(&self, band: HueBand) -> &BandShift {
        self.bands
            .iter()
            .find(|b| b.band == band)
            .expect("every band is reported")
    }
}

/// How the photo hue distribution departs from the street-view one.
pub fn facade_shift_report(photo: &HueHistogram, street: &HueHistogram) -> Result<ShiftReport> {
    let ks = ks_statistic(photo, street)?;
    let bands = HueBand::ALL
        .iter()
        .map(|&band| {
            let (lo, hi) = band.range();
            let photo_mass = photo.band_mass(lo, hi);
            let street_mass = street.band_mass(lo, hi);
            let delta = photo_mass - street_mass;
            let direction = if delta > 0.0 {
                ShiftDirection::Increase
            } else if delta < 0.0 {
                ShiftDirection::Decrease
            } else {
                ShiftDirection::Unchanged
            };
            BandShift {
                band,
                photo_mass,
                street_mass,
                delta,
                direction,
            }
        })
        .collect();
    Ok(ShiftReport { ks, bands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hist(label: &str, f: impl Fn(usize) -> u64) -> HueHistogram {
        let counts: Vec<u64> = (0..HUE_BINS).map(f).collect();
        HueHistogram::from_counts(label, &counts).unwrap()
    }

    fn hues(hs: &[f64]) -> Vec<HsvPixel> {
        hs.iter().map(|&h| HsvPixel::new(h, 0.5, 0.5)).collect()
    }

    #[test]
    fn histogram_binning() {
        let h = build_histogram(&hues(&[60.0; 10]), "a").unwrap();
        assert_eq!(h.bins[60], 10);
        assert_eq!(h.total, 10);
        assert_eq!(h.bins.iter().filter(|&&c| c > 0).count(), 1);

        let h = build_histogram(&hues(&[179.9]), "b").unwrap();
        assert_eq!(h.bins[179], 1);

        let h = build_histogram(&hues(&[0.0, 0.5, 1.0, 4.4, 4.5]), "c").unwrap();
        assert_eq!((h.bins[0], h.bins[1], h.bins[4]), (2, 1, 2));
        assert_eq!(h.total, 5);

        assert!(matches!(build_histogram(&[], "d"), Err(Error::EmptyHistogram)));
    }

    #[test]
    fn ks_examples() {
        let a = hist("a", |i| (i * 7 % 11) as u64);
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);

        let lo = hist("lo", |i| (i == 0) as u64);
        let hi = hist("hi", |i| (i == 179) as u64);
        assert_eq!(ks_statistic(&lo, &hi).unwrap(), 1.0);

        let half = hist("half", |i| (i < 90) as u64);
        let full = hist("full", |_| 1);
        assert_eq!(ks_statistic(&half, &full).unwrap(), 0.5);

        assert!(matches!(
            ks_statistic(&HueHistogram::empty("z"), &a),
            Err(Error::ZeroTotal(_))
        ));
    }

    #[test]
    fn matrix_shape() {
        let a = hist("a", |i| (i < 50) as u64);
        let m = ks_matrix(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(m.values, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);

        let b = hist("b", |i| (i > 100) as u64 * 3);
        let c = hist("c", |i| i as u64);
        let m = ks_matrix(&[a.clone(), b, c]).unwrap();
        assert_eq!(m.labels, vec!["a", "b", "c"]);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
        assert!(matches!(ks_matrix(&[a]), Err(Error::TooFewHistograms(1))));
    }

    #[test]
    fn curve_examples() {
        let spike = hist("s", |i| (i == 40) as u64 * 5);
        let c = fit_curve(&spike, 4.5).unwrap();
        let peak = (0..HUE_BINS).max_by(|&a, &b| c.samples[a].total_cmp(&c.samples[b])).unwrap();
        assert_eq!(peak, 40);
        for d in 1..90 {
            let (up, down) = ((40 + d) % HUE_BINS, (40 + HUE_BINS - d) % HUE_BINS);
            assert_abs_diff_eq!(c.samples[up], c.samples[down], epsilon = 1e-15);
        }

        let flat = fit_curve(&hist("u", |_| 2), 4.5).unwrap();
        for s in &flat.samples {
            assert_abs_diff_eq!(*s, 1.0 / 180.0, epsilon = 1e-15);
        }

        assert!(matches!(fit_curve(&spike, 0.0), Err(Error::Bandwidth(_))));
        assert!(matches!(fit_curve(&spike, f64::NAN), Err(Error::Bandwidth(_))));
    }

    #[test]
    fn wrap_spikes_merge_across_zero() {
        let two = hist("w", |i| (i == 0 || i == 179) as u64);
        let c = fit_curve(&two, 4.5).unwrap();
        let peak = (0..HUE_BINS).max_by(|&a, &b| c.samples[a].total_cmp(&c.samples[b])).unwrap();
        assert!(peak == 0 || peak == 179, "peak at {peak}");

        // Direct summation of wrapped Gaussians, independent of the kernel table.
        let bw = 4.5f64;
        let density = |x: f64| -> f64 {
            [0.0f64, 179.0]
                .iter()
                .flat_map(|&mu| (-3..=3).map(move |m| x - mu + 180.0 * m as f64))
                .map(|u| (-u * u / (2.0 * bw * bw)).exp())
                .sum()
        };
        let direct: Vec<f64> = (0..HUE_BINS).map(|j| density(j as f64)).collect();
        let total: f64 = direct.iter().sum();
        for (got, d) in c.samples.iter().zip(&direct) {
            assert_abs_diff_eq!(*got, d / total, epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_report_examples() {
        let a = hist("a", |i| i as u64 % 5);
        let r = facade_shift_report(&a, &a).unwrap();
        assert_eq!(r.ks, 0.0);
        assert!(r.bands.iter().all(|b| b.delta == 0.0 && b.direction == ShiftDirection::Unchanged));

        let photo = hist("p", |i| (i == 120) as u64);
        let street = hist("s", |i| (i == 15) as u64);
        let r = facade_shift_report(&photo, &street).unwrap();
        assert_eq!(r.ks, 1.0);
        assert_eq!(r.band(HueBand::Blue).delta, 1.0);
        assert_eq!(r.band(HueBand::Warm).delta, -1.0);
        assert_eq!(r.band(HueBand::Green).delta, 0.0);
        assert_eq!(r.band(HueBand::Warm).direction, ShiftDirection::Decrease);

        let photo = hist("p", |i| (105..=135).contains(&i) as u64);
        let street = hist("s", |i| (0..=30).contains(&i) as u64);
        let r = facade_shift_report(&photo, &street).unwrap();
        assert_eq!(r.band(HueBand::Blue).delta, 1.0);
        assert_eq!(r.band(HueBand::Warm).delta, -1.0);
        assert_eq!(r.band(HueBand::Green).delta, 0.0);
    }
}
