use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Analysis, RunConfig};
use super::io::{load_image, load_mask};
use super::layout::{DatasetLayout, QuarterInputs, Source};
use crate::color::{gray_world_correct, PixelImage, CCS_CODE_COUNT};
use crate::diststat::{
    facade_shift_report, fit_curve, ks_matrix, FittedCurve, HueHistogram, KsMatrix, ShiftReport,
};
use crate::error::{Error, Result};
use crate::palette::{ccs_histogram, kmeans_palette, top_n_from_counts, CcsFrequencyEntry, Palette};
use crate::segstat::{
    class_proportions, facade_pixels, heatmap_table, merge_proportions, ClassProportions,
    HeatmapTable,
};
use crate::sentiment::{
    parse_reviews_jsonl, score_batch, BatchScores, LexiconSet, QuarterSentiment, ReviewRecord,
    ReviewScore,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImagePalette {
    pub image: String,
    pub seed: u64,
    pub palette: Palette,
    pub top_colors: Vec<CcsFrequencyEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HueSummary {
    pub histogram: HueHistogram,
    pub curve: FittedCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacadeComparison {
    pub photo: HueHistogram,
    pub street: HueHistogram,
    pub shift: ShiftReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentimentSummary {
    pub reviews: Vec<ReviewScore>,
    pub summary: QuarterSentiment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarterReport {
    pub name: String,
    pub palettes: Vec<ImagePalette>,
    /// Top-N color-system categories over all photos of the quarter.
    pub top_colors: Vec<CcsFrequencyEntry>,
    pub photo_hues: Option<HueSummary>,
    pub street_hues: Option<HueSummary>,
    pub proportions: Option<ClassProportions>,
    pub facade: Option<FacadeComparison>,
    pub sentiment: Option<SentimentSummary>,
    pub notes: Vec<String>,
}

impl QuarterReport {
    pub fn new(name: impl Into<String>) -> Self {
        QuarterReport {
            name: name.into(),
            palettes: Vec::new(),
            top_colors: Vec::new(),
            photo_hues: None,
            street_hues: None,
            proportions: None,
            facade: None,
            sentiment: None,
            notes: Vec::new(),
        }
    }

    pub fn hues(&self, source: Source) -> Option<&HueSummary> {
        match source {
            Source::Photos => self.photo_hues.as_ref(),
            Source::Streetviews => self.street_hues.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CrossQuarterReport {
    pub ks_photos: Option<KsMatrix>,
    pub ks_streetviews: Option<KsMatrix>,
    pub heatmap: Option<HeatmapTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub quarters: Vec<QuarterReport>,
    pub cross: CrossQuarterReport,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn quarter(&self, name: &str) -> Option<&QuarterReport> {
        self.quarters.iter().find(|q| q.name == name)
    }
}

/// Histogram label for a quarter and image source.
pub fn hue_label(quarter: &str, source: Source) -> String {
    format!("{quarter}/{}", source.dir_name())
}

/// Per-image k-means seed: the run seed mixed with an FNV-1a hash of
/// `quarter/file name`, so adding or removing other files leaves it alone.
pub fn image_seed(run_seed: u64, quarter: &str, file_name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in quarter.bytes().chain(*b"/").chain(file_name.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    run_seed ^ h
}

/// Decode an image and apply the configured white balance for its source.
pub fn prepare_image(path: &Path, source: Source, config: &RunConfig) -> Result<PixelImage> {
    let img = load_image(path)?;
    let balance = match source {
        Source::Photos => config.white_balance.photos,
        Source::Streetviews => config.white_balance.streetviews,
    };
    Ok(if balance { gray_world_correct(&img) } else { img })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Everything computed from one decoded image.
struct ImageResult {
    source: Source,
    palette: Option<ImagePalette>,
    ccs_counts: Option<Vec<u64>>,
    hues: HueHistogram,
    facade: Option<HueHistogram>,
    mask_stats: Option<ClassProportions>,
}

struct ImageJob<'a> {
    path: &'a PathBuf,
    source: Source,
    mask: Option<&'a PathBuf>,
}

fn process_image(
    job: &ImageJob<'_>,
    quarter: &str,
    config: &RunConfig,
) -> std::result::Result<ImageResult, String> {
    let name = file_name(job.path);
    let img = prepare_image(job.path, job.source, config).map_err(|e| e.to_string())?;
    let a = &config.analyses;
    let is_photo = job.source == Source::Photos;

    let palette = if a.palette && is_photo {
        let seed = image_seed(config.seed, quarter, &name);
        let palette = kmeans_palette(&img, &config.kmeans(seed)).map_err(|e| e.to_string())?;
        let counts = ccs_histogram(&img);
        Some((
            ImagePalette {
                image: name.clone(),
                seed,
                palette,
                top_colors: top_n_from_counts(&counts, config.top_n),
            },
            counts,
        ))
    } else {
        None
    };

    let mut hues = HueHistogram::empty(hue_label(quarter, job.source));
    for p in img.to_hsv() {
        hues.add(p);
    }

    let (mut facade, mut mask_stats) = (None, None);
    if let Some(mask_path) = job.mask {
        let want_facade = a.facade;
        let want_stats = a.segstat && is_photo;
        if want_facade || want_stats {
            let mask = load_mask(mask_path).map_err(|e| e.to_string())?;
            if want_facade {
                let px = facade_pixels(&img, &mask, &config.facade_classes)
                    .map_err(|e| format!("{}: {e}", mask_path.display()))?;
                let mut h = HueHistogram::empty(format!("{quarter}/facade"));
                for p in &px {
                    h.add(*p);
                }
                facade = Some(h);
            }
            if want_stats {
                mask_stats = Some(
                    class_proportions(std::slice::from_ref(&mask), quarter)
                        .map_err(|e| e.to_string())?,
                );
            }
        }
    }

    let (palette, ccs_counts) = match palette {
        Some((p, c)) => (Some(p), Some(c)),
        None => (None, None),
    };
    Ok(ImageResult {
        source: job.source,
        palette,
        ccs_counts,
        hues,
        facade,
        mask_stats,
    })
}

fn image_jobs<'a>(q: &'a QuarterInputs, config: &RunConfig) -> Vec<ImageJob<'a>> {
    let a = &config.analyses;
    let mut jobs = Vec::new();
    let photos_needed = a.palette || a.histogram || a.ks || a.facade || a.segstat;
    let streets_needed = a.histogram || a.ks || a.facade;
    for source in [Source::Photos, Source::Streetviews] {
        let needed = match source {
            Source::Photos => photos_needed,
            Source::Streetviews => streets_needed,
        };
        if !needed {
            continue;
        }
        for path in q.images(source) {
            jobs.push(ImageJob {
                path,
                source,
                mask: q.mask_for(path).map(|m| &m.mask),
            });
        }
    }
    jobs
}

fn analyze_quarter(
    q: &QuarterInputs,
    config: &RunConfig,
    lexicon: Option<&LexiconSet>,
    warnings: &mut Vec<String>,
) -> QuarterReport {
    let a = &config.analyses;
    let mut report = QuarterReport::new(&q.name);
    report.notes = q.notes.clone();

    let jobs = if a.needs_images() || a.segstat {
        image_jobs(q, config)
    } else {
        Vec::new()
    };
    let results: Vec<_> = jobs
        .par_iter()
        .map(|job| (job, process_image(job, &q.name, config)))
        .collect();

    let mut photo_hist = HueHistogram::empty(hue_label(&q.name, Source::Photos));
    let mut street_hist = HueHistogram::empty(hue_label(&q.name, Source::Streetviews));
    let mut facade_photo = HueHistogram::empty(format!("{}/facade/photos", q.name));
    let mut facade_street = HueHistogram::empty(format!("{}/facade/streetviews", q.name));
    let mut quarter_ccs = vec![0u64; CCS_CODE_COUNT];
    let mut mask_parts = Vec::new();

    for (job, result) in results {
        let r = match result {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("{}: {e}; skipped", job.path.display()));
                continue;
            }
        };
        match r.source {
            Source::Photos => photo_hist.merge(&r.hues),
            Source::Streetviews => street_hist.merge(&r.hues),
        }
        if let Some(p) = r.palette {
            report.palettes.push(p);
        }
        if let Some(c) = r.ccs_counts {
            for (acc, n) in quarter_ccs.iter_mut().zip(c) {
                *acc += n;
            }
        }
        if let Some(f) = r.facade {
            match r.source {
                Source::Photos => facade_photo.merge(&f),
                Source::Streetviews => facade_street.merge(&f),
            }
        }
        if let Some(m) = r.mask_stats {
            mask_parts.push(m);
        }
    }

    if a.palette && !report.palettes.is_empty() {
        report.top_colors = top_n_from_counts(&quarter_ccs, config.top_n);
    }
    if a.histogram || a.ks {
        let summarize = |h: HueHistogram| {
            (h.total > 0).then(|| {
                let curve = fit_curve(&h, config.bandwidth).expect("validated bandwidth");
                HueSummary { histogram: h, curve }
            })
        };
        report.photo_hues = summarize(photo_hist);
        report.street_hues = summarize(street_hist);
    }
    if a.segstat && !mask_parts.is_empty() {
        report.proportions = Some(merge_proportions(&mask_parts, &q.name));
    }
    if a.facade {
        match facade_shift_report(&facade_photo, &facade_street) {
            Ok(shift) => {
                report.facade = Some(FacadeComparison {
                    photo: facade_photo,
                    street: facade_street,
                    shift,
                })
            }
            Err(_) if facade_photo.total + facade_street.total > 0 => report.notes.push(
                "facade comparison needs facade pixels in both photos and street views".into(),
            ),
            Err(_) => {}
        }
    }
    if a.sentiment {
        if let (Some(path), Some(lex)) = (&q.reviews, lexicon) {
            let records = read_reviews(path, &q.name, warnings);
            if !records.is_empty() {
                let batch = score_batch(&records, lex);
                report.sentiment = Some(sentiment_summary(batch, &q.name));
            }
        }
    }
    report
}

fn sentiment_summary(batch: BatchScores, quarter: &str) -> SentimentSummary {
    let summary = batch
        .quarters
        .into_iter()
        .find(|s| s.quarter == quarter)
        .expect("records carry the quarter name");
    SentimentSummary {
        reviews: batch.reviews,
        summary,
    }
}

/// Read a quarter's reviews; the quarter directory decides the grouping.
fn read_reviews(path: &Path, quarter: &str, warnings: &mut Vec<String>) -> Vec<ReviewRecord> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            warnings.push(format!("{}: {e}; reviews skipped", path.display()));
            return Vec::new();
        }
    };
    let mut out = Vec::new();
    for r in parse_reviews_jsonl(&text, path) {
        match r {
            Ok(mut rec) => {
                if rec.quarter != quarter {
                    warnings.push(format!(
                        "{}: review `{}` names quarter `{}`, counted under `{quarter}`",
                        path.display(),
                        rec.id,
                        rec.quarter
                    ));
                    rec.quarter = quarter.to_string();
                }
                out.push(rec);
            }
            Err(e) => warnings.push(format!("{e}; line skipped")),
        }
    }
    out
}

fn load_lexicon(config: &RunConfig) -> Result<LexiconSet> {
    match &config.lexicon {
        Some(p) => LexiconSet::load(p),
        None => Ok(LexiconSet::demo()),
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run every enabled analysis over a discovered dataset.
///
/// Per-file failures become warnings. The run fails when an enabled analysis
/// ends up with no valid input at all.
pub fn analyze(layout: &DatasetLayout, config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let a = config.analyses;
    let lexicon = if a.sentiment {
        Some(load_lexicon(config)?)
    } else {
        None
    };

    let mut warnings = layout.warnings.clone();
    let quarters = in_pool(config.workers, || {
        let mut w = Vec::new();
        let qs: Vec<QuarterReport> = layout
            .quarters
            .iter()
            .map(|q| analyze_quarter(q, config, lexicon.as_ref(), &mut w))
            .collect();
        (qs, w)
    })?;
    let (quarters, quarter_warnings) = quarters;
    warnings.extend(quarter_warnings);

    let mut cross = CrossQuarterReport::default();
    if a.ks {
        let matrix = |source: Source| -> Option<KsMatrix> {
            let hs: Vec<HueHistogram> = quarters
                .iter()
                .filter_map(|q| q.hues(source).map(|s| (q, s)))
                .map(|(q, s)| {
                    let mut h = s.histogram.clone();
                    h.label = q.name.clone();
                    h
                })
                .collect();
            ks_matrix(&hs).ok()
        };
        cross.ks_photos = matrix(Source::Photos);
        cross.ks_streetviews = matrix(Source::Streetviews);
    }
    if a.segstat {
        let props: Vec<ClassProportions> =
            quarters.iter().filter_map(|q| q.proportions.clone()).collect();
        if !props.is_empty() {
            cross.heatmap = Some(heatmap_table(&props, config.heatmap_threshold)?);
        }
    }

    let report = Report {
        config: config.clone(),
        quarters,
        cross,
        warnings,
    };
    check_inputs(&report)?;
    Ok(report)
}

fn check_inputs(report: &Report) -> Result<()> {
    let a = &report.config.analyses;
    let qs = &report.quarters;
    let checks = [
        (Analysis::Palette, qs.iter().any(|q| !q.palettes.is_empty())),
        (
            Analysis::Histogram,
            qs.iter().any(|q| q.photo_hues.is_some() || q.street_hues.is_some()),
        ),
        (
            Analysis::Ks,
            report.cross.ks_photos.is_some() || report.cross.ks_streetviews.is_some(),
        ),
        (Analysis::Segstat, qs.iter().any(|q| q.proportions.is_some())),
        (Analysis::Facade, qs.iter().any(|q| q.facade.is_some())),
        (Analysis::Sentiment, qs.iter().any(|q| q.sentiment.is_some())),
    ];
    for (analysis, ok) in checks {
        if a.enabled(analysis) && !ok {
            return Err(Error::NoInputs(analysis.name()));
        }
    }
    Ok(())
}

/// Treat a loose list of image files as one quarter.
pub fn analyze_images(
    label: &str,
    paths: &[PathBuf],
    source: Source,
    config: &RunConfig,
) -> Result<Report> {
    config.validate()?;
    let (photos, streetviews) = match source {
        Source::Photos => (paths.to_vec(), Vec::new()),
        Source::Streetviews => (Vec::new(), paths.to_vec()),
    };
    let layout = DatasetLayout {
        root: PathBuf::new(),
        quarters: vec![QuarterInputs {
            name: label.to_string(),
            dir: PathBuf::new(),
            photos,
            streetviews,
            masks: Vec::new(),
            reviews: None,
            notes: Vec::new(),
        }],
        warnings: Vec::new(),
    };
    analyze(&layout, config)
}

/// Score a review file on its own, grouping by each record's quarter field.
pub fn analyze_reviews(path: &Path, config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let lex = load_lexicon(config)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut warnings = Vec::new();
    let mut by_quarter: BTreeMap<String, Vec<ReviewRecord>> = BTreeMap::new();
    for r in parse_reviews_jsonl(&text, path) {
        match r {
            Ok(rec) => by_quarter.entry(rec.quarter.clone()).or_default().push(rec),
            Err(e) => warnings.push(format!("{e}; line skipped")),
        }
    }
    if by_quarter.is_empty() {
        return Err(Error::NoInputs(Analysis::Sentiment.name()));
    }
    let quarters = by_quarter
        .into_iter()
        .map(|(name, records)| {
            let mut q = QuarterReport::new(&name);
            q.sentiment = Some(sentiment_summary(score_batch(&records, &lex), &name));
            q
        })
        .collect();
    let mut config = config.clone();
    config.analyses = super::config::Analyses::only(&[Analysis::Sentiment]);
    Ok(Report {
        config,
        quarters,
        cross: CrossQuarterReport::default(),
        warnings,
    })
}
