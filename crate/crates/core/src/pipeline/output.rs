//! Report files and the run manifest.
//!
//! Every file is rendered in memory, hashed, then written. The manifest lists
//! each artifact with its SHA-256 digest, sorted by path. Nothing in the
//! output depends on wall-clock time or thread scheduling.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::analyze::{QuarterReport, Report};
use super::io::encode_png;
use crate::color::{ccs_name, hsv_to_rgb, PixelImage, RgbPixel};
use crate::diststat::{HueHistogram, KsMatrix, HUE_BINS};
use crate::error::{Error, Result};
use crate::palette::Palette;
use crate::segstat::CLASS_NAMES;
use crate::sentiment::Dimension;

pub const MANIFEST: &str = "manifest.json";

const SWATCH_WIDTH: u32 = 200;
const SWATCH_HEIGHT: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

/// Collects rendered files before they hit the disk.
#[derive(Default)]
struct Sink {
    files: BTreeMap<String, Vec<u8>>,
}

impl Sink {
    fn put(&mut self, path: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(path.into(), bytes);
    }

    fn json(&mut self, path: &str, value: &impl Serialize) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Json {
            path: PathBuf::from(path),
            line: 0,
            source: e,
        })?;
        bytes.push(b'\n');
        self.put(path, bytes);
        Ok(())
    }

    fn csv(&mut self, path: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut write = |rec: &[String]| {
            w.write_record(rec)
                .map_err(|e| Error::Config(format!("{path}: {e}")))
        };
        write(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
        for r in &rows {
            write(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("{path}: {e}")))?;
        self.put(path, bytes);
        Ok(())
    }
}

fn s(x: impl ToString) -> String {
    x.to_string()
}

/// Proportional color blocks, left to right in palette order.
pub fn render_swatch(palette: &Palette) -> PixelImage {
    let mut columns = Vec::with_capacity(SWATCH_WIDTH as usize);
    let mut acc = 0.0;
    for e in &palette.entries {
        let color = hsv_to_rgb(e.center);
        acc += e.proportion;
        let until = ((acc * SWATCH_WIDTH as f64).round() as usize).min(SWATCH_WIDTH as usize);
        while columns.len() < until {
            columns.push(color);
        }
    }
    let fill = palette
        .entries
        .last()
        .map_or(RgbPixel::new(0, 0, 0), |e| hsv_to_rgb(e.center));
    columns.resize(SWATCH_WIDTH as usize, fill);
    let pixels = (0..SWATCH_HEIGHT).flat_map(|_| columns.iter().copied()).collect();
    PixelImage::new(SWATCH_WIDTH, SWATCH_HEIGHT, pixels).expect("fixed swatch size")
}

fn swatch_path(quarter: &str, image: &str) -> String {
    let stem = Path::new(image)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| image.to_string());
    format!("swatches/{quarter}/{stem}.png")
}

fn palettes(sink: &mut Sink, quarters: &[QuarterReport]) -> Result<()> {
    let mut rows = Vec::new();
    let mut top_rows = Vec::new();
    let mut doc = Vec::new();
    for q in quarters {
        for ip in &q.palettes {
            for (rank, e) in ip.palette.entries.iter().enumerate() {
                rows.push(vec![
                    s(&q.name),
                    s(&ip.image),
                    s(rank + 1),
                    e.rgb_hex(),
                    s(e.proportion),
                    s(e.pixel_count),
                    s(e.center.h),
                    s(e.center.s),
                    s(e.center.v),
                    s(e.ccs.index()),
                    s(ccs_name(e.ccs)),
                    s(ip.palette.degenerate),
                ]);
            }
            for (rank, e) in ip.top_colors.iter().enumerate() {
                top_rows.push(vec![
                    s(&q.name),
                    s(&ip.image),
                    s(rank + 1),
                    s(e.code.index()),
                    s(ccs_name(e.code)),
                    s(e.pixel_count),
                    s(e.fraction),
                ]);
            }
            let swatches: Vec<_> = ip
                .palette
                .swatches()
                .into_iter()
                .map(|(hex, p)| json!({"hex": hex, "proportion": p}))
                .collect();
            doc.push(json!({
                "quarter": q.name,
                "image": ip.image,
                "seed": ip.seed,
                "degenerate": ip.palette.degenerate,
                "swatches": swatches,
            }));
            sink.put(
                swatch_path(&q.name, &ip.image),
                encode_png(&render_swatch(&ip.palette))?,
            );
        }
        for (rank, e) in q.top_colors.iter().enumerate() {
            top_rows.push(vec![
                s(&q.name),
                s("*"),
                s(rank + 1),
                s(e.code.index()),
                s(ccs_name(e.code)),
                s(e.pixel_count),
                s(e.fraction),
            ]);
        }
    }
    sink.csv(
        "palettes.csv",
        &[
            "quarter", "image", "rank", "hex", "proportion", "pixels", "h", "s", "v", "ccs_index",
            "ccs_name", "degenerate",
        ],
        rows,
    )?;
    sink.csv(
        "ccs_top.csv",
        &["quarter", "image", "rank", "ccs_index", "ccs_name", "pixels", "fraction"],
        top_rows,
    )?;
    sink.json("palettes.json", &doc)
}

fn histograms(sink: &mut Sink, quarters: &[QuarterReport]) -> Result<()> {
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for q in quarters {
        for (source, summary) in [("photos", &q.photo_hues), ("streetviews", &q.street_hues)] {
            let Some(sum) = summary else { continue };
            for bin in 0..HUE_BINS {
                rows.push(vec![
                    s(&q.name),
                    s(source),
                    s(bin),
                    s(sum.histogram.bins[bin]),
                    s(sum.histogram.fraction(bin)),
                    s(sum.curve.samples[bin]),
                ]);
            }
            series.push(json!({
                "quarter": q.name,
                "source": source,
                "total": sum.histogram.total,
                "bandwidth": sum.curve.bandwidth,
                "x": (0..HUE_BINS).collect::<Vec<_>>(),
                "counts": sum.histogram.bins,
                "density": sum.curve.samples,
            }));
        }
    }
    sink.csv(
        "hue_histograms.csv",
        &["quarter", "source", "bin", "count", "fraction", "density"],
        rows,
    )?;
    sink.json("hue_curves.json", &json!({ "series": series }))
}

fn ks_rows(m: &KsMatrix, source: &str, rows: &mut Vec<Vec<String>>) {
    for i in 0..m.labels.len() {
        for j in (i + 1)..m.labels.len() {
            rows.push(vec![
                s(source),
                s(&m.labels[i]),
                s(&m.labels[j]),
                s(m.values[i][j]),
            ]);
        }
    }
}

fn ks(sink: &mut Sink, report: &Report) -> Result<()> {
    let mut rows = Vec::new();
    let mut doc = serde_json::Map::new();
    for (source, m) in [
        ("photos", &report.cross.ks_photos),
        ("streetviews", &report.cross.ks_streetviews),
    ] {
        if let Some(m) = m {
            ks_rows(m, source, &mut rows);
            doc.insert(source.to_string(), serde_json::to_value(m).expect("plain data"));
        }
    }
    sink.csv("ks_pairs.csv", &["source", "a", "b", "ks"], rows)?;
    sink.json("ks_matrix.json", &doc)
}

fn segstats(sink: &mut Sink, report: &Report) -> Result<()> {
    let mut rows = Vec::new();
    for q in &report.quarters {
        let Some(p) = &q.proportions else { continue };
        for (i, name) in CLASS_NAMES.iter().enumerate() {
            let (of_fg, of_total) = if i == 0 {
                (String::new(), s(p.background() as f64 / p.total_pixels as f64))
            } else {
                (
                    p.fractions.as_ref().map_or(String::new(), |f| s(f[i - 1])),
                    s(p.fractions_of_total[i - 1]),
                )
            };
            rows.push(vec![s(&q.name), s(i), s(name), s(p.counts[i]), of_fg, of_total]);
        }
    }
    sink.csv(
        "class_proportions.csv",
        &[
            "quarter",
            "class_index",
            "class",
            "pixels",
            "fraction_of_foreground",
            "fraction_of_total",
        ],
        rows,
    )?;

    if let Some(t) = &report.cross.heatmap {
        let mut header = vec!["quarter"];
        header.extend(t.classes.iter().map(String::as_str));
        let rows = t
            .quarters
            .iter()
            .zip(&t.values)
            .map(|(q, row)| std::iter::once(s(q)).chain(row.iter().map(s)).collect())
            .collect();
        sink.csv("heatmap.csv", &header, rows)?;
        sink.json(
            "heatmap.json",
            &json!({
                "quarters": t.quarters,
                "classes": t.classes,
                "values": t.values,
                "threshold": t.threshold,
                "filtered": t.filtered(),
            }),
        )?;
    }
    Ok(())
}

fn facade(sink: &mut Sink, quarters: &[QuarterReport]) -> Result<()> {
    let mut rows = Vec::new();
    let mut doc = Vec::new();
    for q in quarters {
        let Some(f) = &q.facade else { continue };
        for b in &f.shift.bands {
            rows.push(vec![
                s(&q.name),
                s(b.band.name()),
                s(b.photo_mass),
                s(b.street_mass),
                s(b.delta),
                serde_json::to_value(b.direction)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                s(f.shift.ks),
            ]);
        }
        let fractions = |h: &HueHistogram| (0..HUE_BINS).map(|i| h.fraction(i)).collect::<Vec<_>>();
        doc.push(json!({
            "quarter": q.name,
            "ks": f.shift.ks,
            "bands": f.shift.bands,
            "x": (0..HUE_BINS).collect::<Vec<_>>(),
            "photo_fraction": fractions(&f.photo),
            "street_fraction": fractions(&f.street),
            "photo_pixels": f.photo.total,
            "street_pixels": f.street.total,
        }));
    }
    sink.csv(
        "facade_shift.csv",
        &["quarter", "band", "photo_mass", "street_mass", "delta", "direction", "ks"],
        rows,
    )?;
    sink.json("facade.json", &doc)
}

fn sentiment(sink: &mut Sink, quarters: &[QuarterReport]) -> Result<()> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for q in quarters {
        let Some(sent) = &q.sentiment else { continue };
        for r in &sent.reviews {
            let mut row = vec![s(&r.id), s(&r.quarter)];
            row.extend(r.scores.as_array().iter().map(s));
            rows.push(row);
        }
        let means: serde_json::Map<_, _> = Dimension::ALL
            .iter()
            .zip(sent.summary.means)
            .map(|(d, m)| (d.name().to_string(), json!(m)))
            .collect();
        summary.push(json!({
            "quarter": q.name,
            "reviews": sent.summary.reviews,
            "means": means,
        }));
    }
    sink.csv(
        "sentiment_scores.csv",
        &[
            "id",
            "quarter",
            "activities",
            "built_environment",
            "service_facilities",
            "business_formats",
        ],
        rows,
    )?;
    sink.json("sentiment_summary.json", &summary)
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Render every output of an enabled analysis into `out_dir` and write the
/// manifest last.
pub fn write_report(report: &Report, out_dir: &Path) -> Result<Manifest> {
    let a = &report.config.analyses;
    let mut sink = Sink::default();
    if a.palette {
        palettes(&mut sink, &report.quarters)?;
    }
    if a.histogram {
        histograms(&mut sink, &report.quarters)?;
    }
    if a.ks {
        ks(&mut sink, report)?;
    }
    if a.segstat {
        segstats(&mut sink, report)?;
    }
    if a.facade {
        facade(&mut sink, &report.quarters)?;
    }
    if a.sentiment {
        sentiment(&mut sink, &report.quarters)?;
    }
    sink.json("report.json", report)?;
    sink.json("warnings.json", &report.warnings)?;

    let mut files = Vec::new();
    for (rel, bytes) in &sink.files {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry {
            path: rel.clone(),
            bytes: bytes.len() as u64,
            sha256: digest(bytes),
        });
    }
    let manifest = Manifest { files };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("plain data");
    bytes.push(b'\n');
    let path = out_dir.join(MANIFEST);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
