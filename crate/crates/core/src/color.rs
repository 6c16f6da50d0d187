//! Pixel-level color primitives.
//!
//! Hue is carried on a half-degree scale throughout the crate: the full color
//! circle spans `[0, 180)`, so pure green sits at 60 and pure blue at 120.
//! Saturation and value are fractions in `[0, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of hue units in a full turn.
pub const HUE_RANGE: f64 = 180.0;

/// Width of one Chinese-color-system hue level in hue units.
pub const CCS_HUE_STEP: f64 = HUE_RANGE / CCS_HUE_LEVELS as f64;

pub const CCS_HUE_LEVELS: u8 = 40;
pub const CCS_SAT_LEVELS: u8 = 5;
pub const CCS_VAL_LEVELS: u8 = 5;

/// Total number of distinct color-system categories.
pub const CCS_CODE_COUNT: usize =
    CCS_HUE_LEVELS as usize * CCS_SAT_LEVELS as usize * CCS_VAL_LEVELS as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RgbPixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbPixel {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        RgbPixel { r, g, b }
    }

    pub fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    /// Lowercase `#rrggbb`.
    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

impl From<[u8; 3]> for RgbPixel {
    fn from(c: [u8; 3]) -> Self {
        RgbPixel::new(c[0], c[1], c[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsvPixel {
    /// Hue in `[0, 180)`.
    pub h: f64,
    /// Saturation in `[0, 1]`.
    pub s: f64,
    /// Value in `[0, 1]`.
    pub v: f64,
}

impl HsvPixel {
    pub const fn new(h: f64, s: f64, v: f64) -> Self {
        HsvPixel { h, s, v }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..HUE_RANGE).contains(&self.h)
            && (0.0..=1.0).contains(&self.s)
            && (0.0..=1.0).contains(&self.v)
    }
}

/// A decoded raster in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelImage {
    width: u32,
    height: u32,
    pixels: Vec<RgbPixel>,
}

impl PixelImage {
    pub fn new(width: u32, height: u32, pixels: Vec<RgbPixel>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::PixelCount {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(PixelImage {
            width,
            height,
            pixels,
        })
    }

    /// An image filled with one color.
    pub fn uniform(width: u32, height: u32, color: RgbPixel) -> Result<Self> {
        PixelImage::new(
            width,
            height,
            vec![color; width as usize * height as usize],
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    /// Always false for a constructed image; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[RgbPixel] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<RgbPixel> {
        self.pixels
    }

    pub fn to_hsv(&self) -> Vec<HsvPixel> {
        self.pixels.iter().map(|&p| rgb_to_hsv(p)).collect()
    }
}

/// Hexcone RGB to HSV, hue rescaled to `[0, 180)`. Grays get hue 0.
pub fn rgb_to_hsv(p: RgbPixel) -> HsvPixel {
    let (r, g, b) = (p.r as i32, p.g as i32, p.b as i32);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let v = max as f64 / 255.0;
    if delta == 0 {
        return HsvPixel::new(0.0, 0.0, v);
    }
    let s = delta as f64 / max as f64;

    let d = delta as f64;
    let degrees = if max == r {
        let h = 60.0 * (g - b) as f64 / d;
        if h < 0.0 {
            h + 360.0
        } else {
            h
        }
    } else if max == g {
        60.0 * ((b - r) as f64 / d + 2.0)
    } else {
        60.0 * ((r - g) as f64 / d + 4.0)
    };

    let mut h = degrees / 2.0;
    if h >= HUE_RANGE {
        h -= HUE_RANGE;
    }
    HsvPixel::new(h, s, v)
}

/// Inverse of [`rgb_to_hsv`], rounding each channel to the nearest integer.
pub fn hsv_to_rgb(p: HsvPixel) -> RgbPixel {
    let s = p.s.clamp(0.0, 1.0);
    let v = p.v.clamp(0.0, 1.0);
    let h = p.h.rem_euclid(HUE_RANGE) * 2.0;

    let c = v * s;
    let sector = h / 60.0;
    let x = c * (1.0 - (sector % 2.0 - 1.0).abs());
    let (r1, g1, b1) = match sector as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let channel = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    RgbPixel::new(channel(r1), channel(g1), channel(b1))
}

/// Per-channel gains that pull the channel means toward their common mean.
///
/// A channel whose mean is zero keeps gain 1.
pub fn gray_world_gains(img: &PixelImage) -> [f64; 3] {
    let mut sums = [0u64; 3];
    for p in img.pixels() {
        sums[0] += p.r as u64;
        sums[1] += p.g as u64;
        sums[2] += p.b as u64;
    }
    let n = img.len() as f64;
    let means = sums.map(|s| s as f64 / n);
    let target = (means[0] + means[1] + means[2]) / 3.0;
    means.map(|m| if m > 0.0 { target / m } else { 1.0 })
}

/// Gray World white balance. Channels are scaled, rounded and clamped to
/// `[0, 255]`.
pub fn gray_world_correct(img: &PixelImage) -> PixelImage {
    let gains = gray_world_gains(img);
    let scale = |c: u8, gain: f64| (c as f64 * gain).round().clamp(0.0, 255.0) as u8;
    let pixels = img
        .pixels()
        .iter()
        .map(|p| {
            RgbPixel::new(
                scale(p.r, gains[0]),
                scale(p.g, gains[1]),
                scale(p.b, gains[2]),
            )
        })
        .collect();
    PixelImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// One of the 1000 Chinese-color-system categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CcsCode {
    pub hue_level: u8,
    pub sat_level: u8,
    pub val_level: u8,
}

impl CcsCode {
    pub fn new(hue_level: u8, sat_level: u8, val_level: u8) -> Option<Self> {
        (hue_level < CCS_HUE_LEVELS && sat_level < CCS_SAT_LEVELS && val_level < CCS_VAL_LEVELS)
            .then_some(CcsCode {
                hue_level,
                sat_level,
                val_level,
            })
    }

    /// Dense index in `0..1000`, ordered by (hue, saturation, value).
    pub fn index(self) -> usize {
        (self.hue_level as usize * CCS_SAT_LEVELS as usize + self.sat_level as usize)
            * CCS_VAL_LEVELS as usize
            + self.val_level as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        if index >= CCS_CODE_COUNT {
            return None;
        }
        let val = index % CCS_VAL_LEVELS as usize;
        let sat = (index / CCS_VAL_LEVELS as usize) % CCS_SAT_LEVELS as usize;
        let hue = index / (CCS_VAL_LEVELS as usize * CCS_SAT_LEVELS as usize);
        CcsCode::new(hue as u8, sat as u8, val as u8)
    }

    pub fn all() -> impl Iterator<Item = CcsCode> {
        (0..CCS_CODE_COUNT).filter_map(CcsCode::from_index)
    }

    /// Representative color at the center of the category cell.
    pub fn center(self) -> HsvPixel {
        HsvPixel::new(
            (self.hue_level as f64 + 0.5) * CCS_HUE_STEP,
            (self.sat_level as f64 + 0.5) / CCS_SAT_LEVELS as f64,
            (self.val_level as f64 + 0.5) / CCS_VAL_LEVELS as f64,
        )
    }
}

impl fmt::Display for CcsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", ccs_name(*self))
    }
}

fn level(x: f64, levels: u8) -> u8 {
    // NaN saturates to 0 through the `as` cast.
    ((x * levels as f64).floor().max(0.0) as u8).min(levels - 1)
}

/// Map an HSV pixel onto its color-system category: 40 equal hue intervals of
/// width 4.5 starting at pure red, five equal saturation and value levels.
/// The top of each axis clamps into the last level.
pub fn quantize_to_ccs(p: HsvPixel) -> CcsCode {
    let hue_level = ((p.h / CCS_HUE_STEP).floor().max(0.0) as u8).min(CCS_HUE_LEVELS - 1);
    CcsCode {
        hue_level,
        sat_level: level(p.s, CCS_SAT_LEVELS),
        val_level: level(p.v, CCS_VAL_LEVELS),
    }
}

/// The ten basic hues in circular order starting at red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasicHue {
    R,
    YR,
    Y,
    GY,
    G,
    BG,
    B,
    PB,
    P,
    RP,
}

impl BasicHue {
    pub const ALL: [BasicHue; 10] = [
        BasicHue::R,
        BasicHue::YR,
        BasicHue::Y,
        BasicHue::GY,
        BasicHue::G,
        BasicHue::BG,
        BasicHue::B,
        BasicHue::PB,
        BasicHue::P,
        BasicHue::RP,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        BasicHue::ALL.get(i as usize).copied()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BasicHue::R => "R",
            BasicHue::YR => "YR",
            BasicHue::Y => "Y",
            BasicHue::GY => "GY",
            BasicHue::G => "G",
            BasicHue::BG => "BG",
            BasicHue::B => "B",
            BasicHue::PB => "PB",
            BasicHue::P => "P",
            BasicHue::RP => "RP",
        }
    }
}

impl fmt::Display for BasicHue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Human-readable form of a [`CcsCode`]: basic hue, one of four sub-steps
/// inside it, and the saturation/value levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CcsName {
    pub basic_hue: BasicHue,
    pub sub_index: u8,
    pub sat_level: u8,
    pub val_level: u8,
}

impl CcsName {
    pub fn hue_level(&self) -> u8 {
        4 * self.basic_hue.index() + self.sub_index
    }

    pub fn to_code(&self) -> Option<CcsCode> {
        if self.sub_index > 3 {
            return None;
        }
        CcsCode::new(self.hue_level(), self.sat_level, self.val_level)
    }
}

impl fmt::Display for CcsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}-S{}-V{}",
            self.basic_hue,
            self.sub_index + 1,
            self.sat_level,
            self.val_level
        )
    }
}

pub fn ccs_name(c: CcsCode) -> CcsName {
    CcsName {
        basic_hue: BasicHue::ALL[(c.hue_level / 4) as usize],
        sub_index: c.hue_level % 4,
        sat_level: c.sat_level,
        val_level: c.val_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rgb_to_hsv_axis_cases() {
        let red = rgb_to_hsv(RgbPixel::new(255, 0, 0));
        assert_eq!((red.h, red.s, red.v), (0.0, 1.0, 1.0));

        let gray = rgb_to_hsv(RgbPixel::new(128, 128, 128));
        assert_eq!((gray.h, gray.s), (0.0, 0.0));
        assert_abs_diff_eq!(gray.v, 0.502, epsilon = 1e-3);

        let blue = rgb_to_hsv(RgbPixel::new(0, 0, 255));
        assert_eq!((blue.h, blue.s, blue.v), (120.0, 1.0, 1.0));

        let green = rgb_to_hsv(RgbPixel::new(0, 255, 0));
        assert_eq!(green.h, 60.0);
    }

    #[test]
    fn hue_just_below_red_stays_in_range() {
        let p = rgb_to_hsv(RgbPixel::new(255, 0, 1));
        assert!(p.h < 180.0 && p.h > 179.0, "{p:?}");
    }

    #[test]
    fn hsv_to_rgb_cases() {
        assert_eq!(hsv_to_rgb(HsvPixel::new(0.0, 1.0, 1.0)), RgbPixel::new(255, 0, 0));
        assert_eq!(hsv_to_rgb(HsvPixel::new(0.0, 0.0, 0.0)), RgbPixel::new(0, 0, 0));
        assert_eq!(hsv_to_rgb(HsvPixel::new(90.0, 1.0, 1.0)), RgbPixel::new(0, 255, 255));
    }

    #[test]
    fn round_trip_exhaustive_on_a_lattice() {
        for r in (0..=255).step_by(5) {
            for g in (0..=255).step_by(3) {
                for b in (0..=255).step_by(7) {
                    let p = RgbPixel::new(r as u8, g as u8, b as u8);
                    let q = hsv_to_rgb(rgb_to_hsv(p));
                    for (a, b) in p.channels().iter().zip(q.channels()) {
                        assert!(a.abs_diff(b) <= 1, "{p:?} -> {q:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn gray_world_cases() {
        let gray = PixelImage::uniform(3, 2, RgbPixel::new(128, 128, 128)).unwrap();
        assert_eq!(gray_world_correct(&gray), gray);

        // Means 200/100/100, target 400/3. 200 * (400/3)/200 and
        // 100 * (400/3)/100 both round to 133.
        let warm = PixelImage::uniform(4, 4, RgbPixel::new(200, 100, 100)).unwrap();
        let out = gray_world_correct(&warm);
        assert!(out.pixels().iter().all(|&p| p == RgbPixel::new(133, 133, 133)));

        let black = PixelImage::uniform(1, 1, RgbPixel::new(0, 0, 0)).unwrap();
        assert_eq!(gray_world_correct(&black), black);
    }

    #[test]
    fn gray_world_zero_channel_keeps_unit_gain() {
        let img = PixelImage::uniform(2, 2, RgbPixel::new(100, 50, 0)).unwrap();
        let gains = gray_world_gains(&img);
        assert_eq!(gains[2], 1.0);
        assert_abs_diff_eq!(gains[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(gains[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn image_shape_is_checked() {
        assert!(matches!(PixelImage::new(0, 3, vec![]), Err(Error::EmptyImage)));
        assert!(matches!(
            PixelImage::new(2, 2, vec![RgbPixel::new(0, 0, 0); 3]),
            Err(Error::PixelCount { expected: 4, actual: 3, .. })
        ));
    }

    #[test]
    fn quantize_boundaries() {
        assert_eq!(
            quantize_to_ccs(HsvPixel::new(0.0, 0.0, 0.0)),
            CcsCode::new(0, 0, 0).unwrap()
        );
        assert_eq!(
            quantize_to_ccs(HsvPixel::new(179.9, 1.0, 1.0)),
            CcsCode::new(39, 4, 4).unwrap()
        );
        assert_eq!(
            quantize_to_ccs(HsvPixel::new(60.0, 0.5, 0.5)),
            CcsCode::new(13, 2, 2).unwrap()
        );
        // Level edges: 4.5 starts level 1, 0.2 starts level 1.
        assert_eq!(quantize_to_ccs(HsvPixel::new(4.5, 0.2, 0.2)), CcsCode::new(1, 1, 1).unwrap());
        assert_eq!(quantize_to_ccs(HsvPixel::new(4.49, 0.19, 0.19)), CcsCode::new(0, 0, 0).unwrap());
    }

    #[test]
    fn code_index_round_trips() {
        for (i, code) in CcsCode::all().enumerate() {
            assert_eq!(code.index(), i);
            assert_eq!(quantize_to_ccs(code.center()), code);
        }
        assert_eq!(CcsCode::all().count(), CCS_CODE_COUNT);
        assert!(CcsCode::from_index(1000).is_none());
        assert!(CcsCode::new(40, 0, 0).is_none());
    }

    #[test]
    fn names() {
        let name = |h| ccs_name(CcsCode::new(h, 0, 0).unwrap());
        assert_eq!((name(0).basic_hue, name(0).sub_index), (BasicHue::R, 0));
        assert_eq!((name(39).basic_hue, name(39).sub_index), (BasicHue::RP, 3));
        assert_eq!((name(13).basic_hue, name(13).sub_index), (BasicHue::GY, 1));
        assert_eq!(name(13).to_string(), "GY2-S0-V0");
    }

    #[test]
    fn name_inverse_is_identity_on_every_hue_level() {
        // Independent table: ten hues, four steps each, in order.
        let table: Vec<(BasicHue, u8)> = BasicHue::ALL
            .iter()
            .flat_map(|&h| (0..4).map(move |s| (h, s)))
            .collect();
        assert_eq!(table.len(), 40);
        for hue_level in 0..40u8 {
            let code = CcsCode::new(hue_level, 2, 3).unwrap();
            let name = ccs_name(code);
            assert_eq!((name.basic_hue, name.sub_index), table[hue_level as usize]);
            assert_eq!(name.to_code(), Some(code));
        }
    }
}
