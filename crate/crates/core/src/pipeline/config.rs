use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::palette::KmeansConfig;
use crate::segstat::{default_facade_classes, ClassId};

/// One of the analyses a run can perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Palette,
    Histogram,
    Ks,
    Segstat,
    Facade,
    Sentiment,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Palette,
        Analysis::Histogram,
        Analysis::Ks,
        Analysis::Segstat,
        Analysis::Facade,
        Analysis::Sentiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Palette => "palette",
            Analysis::Histogram => "histogram",
            Analysis::Ks => "ks",
            Analysis::Segstat => "segstat",
            Analysis::Facade => "facade",
            Analysis::Sentiment => "sentiment",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown analysis `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analyses {
    pub palette: bool,
    pub histogram: bool,
    pub ks: bool,
    pub segstat: bool,
    pub facade: bool,
    pub sentiment: bool,
}

impl Default for Analyses {
    fn default() -> Self {
        Analyses::all()
    }
}

impl Analyses {
    pub fn all() -> Self {
        Analyses {
            palette: true,
            histogram: true,
            ks: true,
            segstat: true,
            facade: true,
            sentiment: true,
        }
    }

    pub fn none() -> Self {
        Analyses {
            palette: false,
            histogram: false,
            ks: false,
            segstat: false,
            facade: false,
            sentiment: false,
        }
    }

    pub fn only(analyses: &[Analysis]) -> Self {
        let mut a = Analyses::none();
        for &x in analyses {
            a.set(x, true);
        }
        a
    }

    pub fn enabled(&self, a: Analysis) -> bool {
        match a {
            Analysis::Palette => self.palette,
            Analysis::Histogram => self.histogram,
            Analysis::Ks => self.ks,
            Analysis::Segstat => self.segstat,
            Analysis::Facade => self.facade,
            Analysis::Sentiment => self.sentiment,
        }
    }

    pub fn set(&mut self, a: Analysis, on: bool) {
        let slot = match a {
            Analysis::Palette => &mut self.palette,
            Analysis::Histogram => &mut self.histogram,
            Analysis::Ks => &mut self.ks,
            Analysis::Segstat => &mut self.segstat,
            Analysis::Facade => &mut self.facade,
            Analysis::Sentiment => &mut self.sentiment,
        };
        *slot = on;
    }

    /// Whether any analysis needs decoded images.
    pub(crate) fn needs_images(&self) -> bool {
        self.palette || self.histogram || self.ks || self.facade
    }
}

/// Gray World correction per image source. Deserializes from either a bool
/// (both sources) or `{"photos": .., "streetviews": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "WhiteBalanceRepr")]
pub struct WhiteBalance {
    pub photos: bool,
    pub streetviews: bool,
}

impl Default for WhiteBalance {
    fn default() -> Self {
        WhiteBalance {
            photos: true,
            streetviews: true,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WhiteBalanceRepr {
    Both(bool),
    Split {
        #[serde(default = "yes")]
        photos: bool,
        #[serde(default = "yes")]
        streetviews: bool,
    },
}

fn yes() -> bool {
    true
}

impl From<WhiteBalanceRepr> for WhiteBalance {
    fn from(r: WhiteBalanceRepr) -> Self {
        match r {
            WhiteBalanceRepr::Both(b) => WhiteBalance {
                photos: b,
                streetviews: b,
            },
            WhiteBalanceRepr::Split {
                photos,
                streetviews,
            } => WhiteBalance {
                photos,
                streetviews,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub analyses: Analyses,
    /// Palette size.
    pub k: usize,
    pub top_n: usize,
    /// Density-curve bandwidth in hue units.
    pub bandwidth: f64,
    pub heatmap_threshold: f64,
    pub facade_classes: BTreeSet<ClassId>,
    pub seed: u64,
    pub white_balance: WhiteBalance,
    /// Lexicon JSON; the bundled demonstration lexicon when absent.
    pub lexicon: Option<PathBuf>,
    pub max_iterations: usize,
    /// k-means++ initializations per image.
    pub restarts: usize,
    pub sample_budget: usize,
    /// Worker threads for per-image work; all cores when absent.
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            analyses: Analyses::all(),
            k: 5,
            top_n: 20,
            bandwidth: 4.5,
            heatmap_threshold: 0.01,
            facade_classes: default_facade_classes(),
            seed: 0,
            white_balance: WhiteBalance::default(),
            lexicon: None,
            max_iterations: 100,
            restarts: 10,
            sample_budget: 250_000,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Load a config file. A relative lexicon path is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = RunConfig::from_json(&text)?;
        if let (Some(lex), Some(dir)) = (config.lexicon.as_mut(), path.parent()) {
            if lex.is_relative() {
                *lex = dir.join(&*lex);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.top_n == 0 || self.top_n > crate::color::CCS_CODE_COUNT {
            return fail(format!("top_n must lie in 1..=1000, got {}", self.top_n));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return fail(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if !(self.heatmap_threshold > 0.0 && self.heatmap_threshold < 1.0) {
            return fail(format!(
                "heatmap_threshold must lie in (0, 1), got {}",
                self.heatmap_threshold
            ));
        }
        if self.facade_classes.is_empty() {
            return fail("facade_classes must not be empty".into());
        }
        if self.facade_classes.contains(&ClassId::BACKGROUND) {
            return fail("facade_classes may not include Background".into());
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn kmeans(&self, seed: u64) -> KmeansConfig {
        KmeansConfig {
            k: self.k,
            seed,
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            sample_budget: self.sample_budget,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.k, 5);
        assert_eq!(c.top_n, 20);
        assert_eq!(c.bandwidth, 4.5);
        assert_eq!(c.heatmap_threshold, 0.01);
        assert!(c.white_balance.photos && c.white_balance.streetviews);
        assert_eq!(
            c.facade_classes.iter().map(|c| c.name()).collect::<Vec<_>>(),
            vec!["Wall", "Building"]
        );
    }

    #[test]
    fn partial_documents() {
        let c = RunConfig::from_json(
            r#"{"analyses": {"sentiment": false}, "white_balance": false,
                "facade_classes": ["Building", "Door"], "seed": 9}"#,
        )
        .unwrap();
        assert!(!c.analyses.sentiment && c.analyses.palette);
        assert!(!c.white_balance.photos && !c.white_balance.streetviews);
        assert!(c.facade_classes.contains(&ClassId::DOOR));
        assert_eq!(c.seed, 9);

        let c = RunConfig::from_json(r#"{"white_balance": {"streetviews": false}}"#).unwrap();
        assert!(c.white_balance.photos && !c.white_balance.streetviews);
    }

    #[test]
    fn rejects_bad_values() {
        for doc in [
            r#"{"k": 0}"#,
            r#"{"bandwidth": -1}"#,
            r#"{"heatmap_threshold": 1.0}"#,
            r#"{"facade_classes": []}"#,
            r#"{"facade_classes": ["Sky"]}"#,
            r#"{"facade_classes": ["Background"]}"#,
            r#"{"top_n": 1001}"#,
            r#"{"colour": 1}"#,
        ] {
            assert!(RunConfig::from_json(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn only() {
        let a = Analyses::only(&[Analysis::Palette]);
        assert!(a.palette && !a.histogram && !a.sentiment);
        assert_eq!("ks".parse::<Analysis>().unwrap(), Analysis::Ks);
    }
}
