//! Command-line front end for the urbanlens analyses.
//!
//! Every subcommand writes the same artifact set (CSV, JSON, swatches and a
//! digest manifest) under `--out`, and prints a short summary to stdout.
//! Exit status: 0 on success, 1 on configuration or IO failure, 2 when the
//! run completed but some inputs were skipped with warnings.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use urbanlens::pipeline::{
    self, analyze, analyze_images, analyze_reviews, discover, Analyses, Analysis, ExitStatus,
    Report, RunConfig, RunOutcome, Source,
};
use urbanlens::sentiment::Dimension;

#[derive(Debug, Parser)]
#[command(name = "urbanlens", version, about = "Color, segmentation and review analytics for urban quarters")]
struct Cli {
    /// JSON run configuration; unspecified fields take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for reports.
    #[arg(long, global = true, value_name = "DIR", default_value = "urbanlens-out")]
    out: PathBuf,

    /// Run seed; overrides the configuration file.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Photos,
    Streetviews,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Photos => Source::Photos,
            SourceArg::Streetviews => Source::Streetviews,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dominant-color palettes and top color-system categories per image.
    Palette {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Label used as the quarter name in the outputs.
        #[arg(long, default_value = "images")]
        label: String,
        /// Palette size; overrides the configuration file.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Pooled hue histogram and density curve over a set of images.
    Histogram {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, default_value = "images")]
        label: String,
        /// White-balance setting to apply to the images.
        #[arg(long, value_enum, default_value = "photos")]
        source: SourceArg,
    },
    /// Pairwise KS statistics between the quarters of a dataset.
    KsMatrix { root: PathBuf },
    /// Segmentation class proportions per quarter and the heatmap table.
    Segstats { root: PathBuf },
    /// Façade hue shift between photos and street views per quarter.
    FacadeCompare { root: PathBuf },
    /// Score a JSON Lines review file on the four satisfaction dimensions.
    Sentiment {
        reviews: PathBuf,
        /// Lexicon JSON; overrides the configuration file.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Run every analysis enabled in the configuration over a dataset.
    Report { root: PathBuf },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)
            .with_context(|| format!("cannot load config {}", path.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn only(config: &mut RunConfig, analyses: &[Analysis]) {
    config.analyses = Analyses::only(analyses);
}

fn dataset(root: &Path, config: &RunConfig) -> Result<Report> {
    let layout = discover(root)?;
    Ok(analyze(&layout, config)?)
}

fn run(cli: Cli) -> Result<ExitStatus> {
    let mut config = load_config(&cli)?;
    let report = match &cli.command {
        Command::Palette { images, label, k } => {
            if let Some(k) = k {
                config.k = *k;
            }
            only(&mut config, &[Analysis::Palette]);
            analyze_images(label, images, Source::Photos, &config)?
        }
        Command::Histogram {
            images,
            label,
            source,
        } => {
            only(&mut config, &[Analysis::Histogram]);
            analyze_images(label, images, (*source).into(), &config)?
        }
        Command::KsMatrix { root } => {
            only(&mut config, &[Analysis::Ks]);
            dataset(root, &config)?
        }
        Command::Segstats { root } => {
            only(&mut config, &[Analysis::Segstat]);
            dataset(root, &config)?
        }
        Command::FacadeCompare { root } => {
            only(&mut config, &[Analysis::Facade]);
            dataset(root, &config)?
        }
        Command::Sentiment { reviews, lexicon } => {
            if lexicon.is_some() {
                config.lexicon = lexicon.clone();
            }
            analyze_reviews(reviews, &config)?
        }
        Command::Report { root } => dataset(root, &config)?,
    };

    for w in &report.warnings {
        log::warn!("{w}");
    }
    let outcome = pipeline::finish(report, &cli.out)
        .with_context(|| format!("cannot write report to {}", cli.out.display()))?;
    summarize(&cli.command, &outcome);
    println!(
        "wrote {} files to {}",
        outcome.manifest.files.len() + 1,
        cli.out.display()
    );
    Ok(outcome.status)
}

fn summarize(command: &Command, outcome: &RunOutcome) {
    let report = &outcome.report;
    match command {
        Command::Palette { .. } => {
            for q in &report.quarters {
                for p in &q.palettes {
                    let colors: Vec<String> = p
                        .palette
                        .entries
                        .iter()
                        .map(|e| format!("{} {:.3}", e.rgb_hex(), e.proportion))
                        .collect();
                    println!("{}: {}", p.image, colors.join(", "));
                }
            }
        }
        Command::Histogram { .. } => {
            for q in &report.quarters {
                for h in [&q.photo_hues, &q.street_hues].into_iter().flatten() {
                    let curve = &h.curve.samples;
                    let peak = (0..curve.len())
                        .max_by(|&a, &b| curve[a].total_cmp(&curve[b]))
                        .unwrap_or(0);
                    println!(
                        "{}: {} pixels, density peak at hue {peak}",
                        h.histogram.label, h.histogram.total
                    );
                }
            }
        }
        Command::KsMatrix { .. } | Command::Report { .. } => {
            let matrices = [
                ("photos", &report.cross.ks_photos),
                ("streetviews", &report.cross.ks_streetviews),
            ];
            for (name, m) in matrices {
                let Some(m) = m else { continue };
                println!("KS ({name})");
                println!("{:>12} {}", "", m.labels.iter().map(|l| format!("{l:>12}")).collect::<String>());
                for (label, row) in m.labels.iter().zip(&m.values) {
                    let cells: String = row.iter().map(|v| format!("{v:>12.4}")).collect();
                    println!("{label:>12} {cells}");
                }
            }
        }
        Command::Segstats { .. } => {
            if let Some(heat) = &report.cross.heatmap {
                // Cells at or below the threshold print as "-".
                println!("{:>12} {}", "", heat.classes.iter().map(|c| format!("{c:>14}")).collect::<String>());
                for (q, row) in heat.quarters.iter().zip(heat.filtered()) {
                    let cells: String = row
                        .iter()
                        .map(|v| match v {
                            Some(v) => format!("{v:>14.4}"),
                            None => format!("{:>14}", "-"),
                        })
                        .collect();
                    println!("{q:>12} {cells}");
                }
            }
        }
        Command::FacadeCompare { .. } => {
            for q in &report.quarters {
                let Some(f) = &q.facade else { continue };
                let bands: Vec<String> = f
                    .shift
                    .bands
                    .iter()
                    .map(|b| format!("{} {:+.4} ({:?})", b.band.name(), b.delta, b.direction))
                    .collect();
                println!("{}: KS {:.4}; {}", q.name, f.shift.ks, bands.join(", "));
            }
        }
        Command::Sentiment { .. } => {
            let header: Vec<&str> = Dimension::ALL.iter().map(|d| d.name()).collect();
            println!("quarter  reviews  {}", header.join("  "));
            for q in &report.quarters {
                let Some(s) = &q.sentiment else { continue };
                let means: Vec<String> = s.summary.means.iter().map(|m| format!("{m:+.3}")).collect();
                println!("{}  {}  {}", q.name, s.summary.reviews, means.join("  "));
            }
        }
    }
    if matches!(command, Command::Report { .. }) {
        for q in &report.quarters {
            println!("{}: {} palettes", q.name, q.palettes.len());
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ExitStatus::Failure.code() as u8)
        }
    }
}
