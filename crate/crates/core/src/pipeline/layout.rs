//! Dataset discovery.
//!
//! ```text
//! <root>/
//!   <quarter>/
//!     photos/         social-media images (PNG/JPEG)
//!     streetviews/    street-view images
//!     masks/          <image stem>.mask.png index rasters
//!     reviews.jsonl   {"id", "quarter", "text"} per line
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::io::{dimensions, image_format, is_mask_file, mask_stem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Photos,
    Streetviews,
}

impl Source {
    pub fn dir_name(self) -> &'static str {
        match self {
            Source::Photos => "photos",
            Source::Streetviews => "streetviews",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaskPair {
    pub mask: PathBuf,
    pub image: PathBuf,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuarterInputs {
    pub name: String,
    pub dir: PathBuf,
    pub photos: Vec<PathBuf>,
    pub streetviews: Vec<PathBuf>,
    pub masks: Vec<MaskPair>,
    pub reviews: Option<PathBuf>,
    /// Analyses disabled for this quarter and why.
    pub notes: Vec<String>,
}

impl QuarterInputs {
    pub fn images(&self, source: Source) -> &[PathBuf] {
        match source {
            Source::Photos => &self.photos,
            Source::Streetviews => &self.streetviews,
        }
    }

    pub fn mask_for(&self, image: &Path) -> Option<&MaskPair> {
        self.masks.iter().find(|m| m.image == image)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetLayout {
    pub root: PathBuf,
    /// Sorted by name.
    pub quarters: Vec<QuarterInputs>,
    pub warnings: Vec<String>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| !n.starts_with('.'))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn image_files(dir: &Path, warnings: &mut Vec<String>) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for p in sorted_entries(dir)? {
        if !p.is_file() {
            continue;
        }
        if image_format(&p).is_some() {
            out.push(p);
        } else {
            warnings.push(format!(
                "{}: unsupported image format (expected PNG or JPEG), skipped",
                p.display()
            ));
        }
    }
    Ok(out)
}

fn stem(p: &Path) -> Option<&str> {
    p.file_stem().and_then(|s| s.to_str())
}

/// Scan a dataset root. Problems with individual files become warnings;
/// only a missing root is an error.
pub fn discover(root: &Path) -> Result<DatasetLayout> {
    if !root.is_dir() {
        return Err(Error::MissingRoot(root.to_path_buf()));
    }
    let mut warnings = Vec::new();
    let mut quarters = Vec::new();

    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let Some(name) = dir.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            warnings.push(format!("{}: quarter name is not valid UTF-8, skipped", dir.display()));
            continue;
        };
        let photos = image_files(&dir.join("photos"), &mut warnings)?;
        let streetviews = image_files(&dir.join("streetviews"), &mut warnings)?;
        let reviews = Some(dir.join("reviews.jsonl")).filter(|p| p.is_file());

        if photos.is_empty() && streetviews.is_empty() && reviews.is_none() {
            warnings.push(format!("quarter `{name}` has no readable inputs, skipped"));
            continue;
        }

        let mut by_stem: BTreeMap<&str, Vec<(Source, &PathBuf)>> = BTreeMap::new();
        for p in &photos {
            if let Some(s) = stem(p) {
                by_stem.entry(s).or_default().push((Source::Photos, p));
            }
        }
        for p in &streetviews {
            if let Some(s) = stem(p) {
                by_stem.entry(s).or_default().push((Source::Streetviews, p));
            }
        }

        let mut masks = Vec::new();
        let mask_dir = dir.join("masks");
        if mask_dir.is_dir() {
            for m in sorted_entries(&mask_dir)? {
                if !m.is_file() {
                    continue;
                }
                if !is_mask_file(&m) {
                    warnings.push(format!(
                        "{}: not a `.mask.png` file, ignored",
                        m.display()
                    ));
                    continue;
                }
                let candidates = mask_stem(&m).and_then(|s| by_stem.get(s));
                let (source, image) = match candidates.map(Vec::as_slice) {
                    Some([only]) => *only,
                    Some(many) if many.len() > 1 => {
                        warnings.push(format!(
                            "{}: stem matches more than one image, mask ignored",
                            m.display()
                        ));
                        continue;
                    }
                    _ => {
                        warnings.push(format!("{}: orphan mask with no paired image", m.display()));
                        continue;
                    }
                };
                match (dimensions(&m), dimensions(image)) {
                    (Ok(md), Ok(id)) if md == id => masks.push(MaskPair {
                        mask: m,
                        image: image.clone(),
                        source,
                    }),
                    (Ok(md), Ok(id)) => warnings.push(format!(
                        "mask {} is {}x{} but image {} is {}x{}; pair excluded",
                        m.display(),
                        md.0,
                        md.1,
                        image.display(),
                        id.0,
                        id.1
                    )),
                    (Err(e), _) | (_, Err(e)) => {
                        warnings.push(format!("{e}; mask {} excluded", m.display()))
                    }
                }
            }
        }

        let mut notes = Vec::new();
        if photos.is_empty() {
            notes.push("no photos: palette and photo histograms disabled".to_string());
        }
        if streetviews.is_empty() {
            notes.push("no street views: street-view histograms disabled".to_string());
        }
        if !masks.iter().any(|m| m.source == Source::Photos) {
            notes.push("no photo masks: segstat disabled".to_string());
        }
        let has_both = [Source::Photos, Source::Streetviews]
            .iter()
            .all(|s| masks.iter().any(|m| m.source == *s));
        if !has_both {
            notes.push("masks missing for photos or street views: facade comparison disabled".to_string());
        }
        if reviews.is_none() {
            notes.push("no reviews.jsonl: sentiment disabled".to_string());
        }

        quarters.push(QuarterInputs {
            name,
            dir,
            photos,
            streetviews,
            masks,
            reviews,
            notes,
        });
    }

    if quarters.is_empty() {
        warnings.push(format!("no quarters found under {}", root.display()));
    }
    Ok(DatasetLayout {
        root: root.to_path_buf(),
        quarters,
        warnings,
    })
}
