//! Dataset ingestion, orchestration and report output.
//!
//! [`discover`] scans a directory of quarters, [`analyze`] runs the enabled
//! analyses into an in-memory [`Report`], and [`write_report`] renders CSV,
//! JSON plot data and palette swatches plus a digest manifest. [`run`] does
//! all three.

mod analyze;
mod config;
pub mod io;
mod layout;
mod output;

use std::path::Path;

pub use analyze::{
    analyze, analyze_images, analyze_reviews, hue_label, image_seed, prepare_image,
    CrossQuarterReport, FacadeComparison, HueSummary, ImagePalette, QuarterReport, Report,
    SentimentSummary,
};
pub use config::{Analyses, Analysis, RunConfig, WhiteBalance};
pub use layout::{discover, DatasetLayout, MaskPair, QuarterInputs, Source};
pub use output::{render_swatch, write_report, Manifest, ManifestEntry, MANIFEST};

use crate::error::Result;

/// Process exit status for a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// Configuration or IO failure.
    Failure,
    /// Completed, but some inputs produced warnings.
    Warnings,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Warnings => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub manifest: Manifest,
    pub status: ExitStatus,
}

/// Write a finished report and derive the exit status from its warnings.
pub fn finish(report: Report, out_dir: &Path) -> Result<RunOutcome> {
    let manifest = write_report(&report, out_dir)?;
    let status = if report.warnings.is_empty() {
        ExitStatus::Success
    } else {
        ExitStatus::Warnings
    };
    Ok(RunOutcome {
        report,
        manifest,
        status,
    })
}

/// Discover, analyze and write in one call.
pub fn run(root: &Path, config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    let layout = discover(root)?;
    for w in &layout.warnings {
        log::warn!("{w}");
    }
    finish(analyze(&layout, config)?, out_dir)
}
