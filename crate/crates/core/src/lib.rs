//! Color, segmentation and review-text statistics for comparing urban quarters.
//!
//! The crate takes photo collections (tourist photos and street views),
//! per-pixel class masks from any segmenter, and review texts, and turns them
//! into tables and plot data:
//!
//! - [`color`]: RGB/HSV conversion, Gray World white balance and the
//!   1000-category Chinese color system.
//! - [`palette`]: k-means dominant colors and top-N color-system summaries.
//! - [`diststat`]: hue histograms, circular density curves and
//!   Kolmogorov-Smirnov comparison.
//! - [`segstat`]: class proportions per quarter and façade isolation.
//! - [`sentiment`]: lexicon-driven four-dimension satisfaction scores.
//! - [`pipeline`]: dataset discovery, run configuration and report output.
//!
//! ```
//! use urbanlens::color::{rgb_to_hsv, quantize_to_ccs, ccs_name, RgbPixel};
//!
//! let hsv = rgb_to_hsv(RgbPixel::new(0, 0, 255));
//! assert_eq!(hsv.h, 120.0);
//! let code = quantize_to_ccs(hsv);
//! assert_eq!(ccs_name(code).to_string(), "B3-S4-V4");
//! ```

pub mod color;
pub mod diststat;
pub mod error;
pub mod palette;
pub mod pipeline;
pub mod segstat;
pub mod sentiment;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/color.md")]
    mod color {}
    #[doc = include_str!("../../../book/src/palette.md")]
    mod palette {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/sentiment.md")]
    mod sentiment {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
