//! Statistics over semantic class masks produced by an external segmenter.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::color::{rgb_to_hsv, HsvPixel, PixelImage};
use crate::error::{Error, Result};

/// Class names by mask index. Index 0 is background.
pub const CLASS_NAMES: [&str; 23] = [
    "Background",
    "Human",
    "Door",
    "Wall",
    "Building",
    "Stairs",
    "Sign",
    "Advertisement",
    "Light",
    "Tree",
    "Flower",
    "Plant",
    "Animal",
    "Toy",
    "Food",
    "Drink",
    "Vehicle",
    "Bench",
    "Fence",
    "Fountain",
    "Statue",
    "Vendor",
    "Artwork",
];

pub const CLASS_COUNT: usize = CLASS_NAMES.len();
pub const MAX_CLASS_INDEX: u8 = (CLASS_COUNT - 1) as u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassId(u8);

impl ClassId {
    pub const BACKGROUND: ClassId = ClassId(0);
    pub const DOOR: ClassId = ClassId(2);
    pub const WALL: ClassId = ClassId(3);
    pub const BUILDING: ClassId = ClassId(4);
    pub const TREE: ClassId = ClassId(9);
    pub const VEHICLE: ClassId = ClassId(16);
    pub const ARTWORK: ClassId = ClassId(22);

    pub fn new(index: u8) -> Option<Self> {
        (index <= MAX_CLASS_INDEX).then_some(ClassId(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        CLASS_NAMES[self.0 as usize]
    }

    /// The 22 foreground classes in taxonomy order.
    pub fn foreground() -> impl Iterator<Item = ClassId> {
        (1..=MAX_CLASS_INDEX).map(ClassId)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CLASS_NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(s.trim()))
            .map(|i| ClassId(i as u8))
            .ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

impl TryFrom<String> for ClassId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ClassId> for String {
    fn from(c: ClassId) -> String {
        c.name().to_string()
    }
}

pub fn default_facade_classes() -> BTreeSet<ClassId> {
    [ClassId::WALL, ClassId::BUILDING].into_iter().collect()
}

/// Per-pixel class indices, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMask {
    width: u32,
    height: u32,
    indices: Vec<u8>,
}

impl ClassMask {
    pub fn new(width: u32, height: u32, indices: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width as usize * height as usize;
        if indices.len() != expected {
            return Err(Error::PixelCount {
                width,
                height,
                expected,
                actual: indices.len(),
            });
        }
        if let Some((position, &index)) = indices
            .iter()
            .enumerate()
            .find(|(_, &i)| i > MAX_CLASS_INDEX)
        {
            return Err(Error::ClassIndex {
                index,
                position,
                max: MAX_CLASS_INDEX,
            });
        }
        Ok(ClassMask {
            width,
            height,
            indices,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }

    pub fn class_counts(&self) -> [u64; CLASS_COUNT] {
        let mut counts = [0u64; CLASS_COUNT];
        for &i in &self.indices {
            counts[i as usize] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProportions {
    pub quarter: String,
    /// Pixel counts by class index, background included at index 0.
    pub counts: Vec<u64>,
    pub total_pixels: u64,
    /// Fractions of non-background pixels for classes 1..=22, or `None` when
    /// every pixel is background.
    pub fractions: Option<Vec<f64>>,
    /// Fractions of all pixels for classes 1..=22.
    pub fractions_of_total: Vec<f64>,
}

impl ClassProportions {
    pub fn background(&self) -> u64 {
        self.counts[0]
    }

    pub fn foreground_pixels(&self) -> u64 {
        self.total_pixels - self.background()
    }

    pub fn fraction(&self, class: ClassId) -> Option<f64> {
        let i = class.index() as usize;
        if i == 0 {
            return None;
        }
        self.fractions.as_ref().map(|f| f[i - 1])
    }

    fn from_counts(quarter: String, counts: [u64; CLASS_COUNT]) -> Self {
        let total: u64 = counts.iter().sum();
        let foreground = total - counts[0];
        let fractions = (foreground > 0)
            .then(|| counts[1..].iter().map(|&c| c as f64 / foreground as f64).collect());
        let fractions_of_total = counts[1..]
            .iter()
            .map(|&c| if total > 0 { c as f64 / total as f64 } else { 0.0 })
            .collect();
        ClassProportions {
            quarter,
            counts: counts.to_vec(),
            total_pixels: total,
            fractions,
            fractions_of_total,
        }
    }
}

pub fn class_proportions(masks: &[ClassMask], quarter: impl Into<String>) -> Result<ClassProportions> {
    if masks.is_empty() {
        return Err(Error::NoMasks);
    }
    let mut counts = [0u64; CLASS_COUNT];
    for m in masks {
        for (acc, c) in counts.iter_mut().zip(m.class_counts()) {
            *acc += c;
        }
    }
    Ok(ClassProportions::from_counts(quarter.into(), counts))
}

/// Combine per-mask (or per-batch) results into one quarter summary.
pub fn merge_proportions<'a>(
    parts: impl IntoIterator<Item = &'a ClassProportions>,
    quarter: impl Into<String>,
) -> ClassProportions {
    let mut counts = [0u64; CLASS_COUNT];
    for p in parts {
        for (acc, c) in counts.iter_mut().zip(&p.counts) {
            *acc += c;
        }
    }
    ClassProportions::from_counts(quarter.into(), counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapTable {
    pub quarters: Vec<String>,
    pub classes: Vec<String>,
    /// `values[q][c]`, fraction of non-background pixels; 0 when undefined.
    pub values: Vec<Vec<f64>>,
    pub threshold: f64,
}

impl HeatmapTable {
    /// Cells strictly above the threshold; the rest are hidden.
    pub fn filtered(&self) -> Vec<Vec<Option<f64>>> {
        self.values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| (v > self.threshold).then_some(v))
                    .collect()
            })
            .collect()
    }
}

pub fn heatmap_table(props: &[ClassProportions], threshold: f64) -> Result<HeatmapTable> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Config(format!(
            "heatmap threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let classes = ClassId::foreground().map(|c| c.name().to_string()).collect();
    let values = props
        .iter()
        .map(|p| {
            p.fractions
                .clone()
                .unwrap_or_else(|| vec![0.0; CLASS_COUNT - 1])
        })
        .collect();
    Ok(HeatmapTable {
        quarters: props.iter().map(|p| p.quarter.clone()).collect(),
        classes,
        values,
        threshold,
    })
}

/// HSV pixels at mask positions whose class is in `facade_classes`, row-major.
pub fn facade_pixels(
    img: &PixelImage,
    mask: &ClassMask,
    facade_classes: &BTreeSet<ClassId>,
) -> Result<Vec<HsvPixel>> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::ShapeMismatch {
            image_width: img.width(),
            image_height: img.height(),
            mask_width: mask.width(),
            mask_height: mask.height(),
        });
    }
    let mut keep = [false; CLASS_COUNT];
    for c in facade_classes {
        keep[c.index() as usize] = true;
    }
    Ok(img
        .pixels()
        .iter()
        .zip(mask.indices())
        .filter(|(_, &i)| keep[i as usize])
        .map(|(&p, _)| rgb_to_hsv(p))
        .collect())
}
