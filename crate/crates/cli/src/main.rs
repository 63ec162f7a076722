mod config;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use domseg::clustering::{cluster, Algorithm};
use domseg::coordinates::{compose_vectors, compute_coordinates, Component};
use domseg::corpus::{Corpus, PageBundle};
use domseg::evaluation::{cluster_count_diff, cluster_size_diff, rand_score, GroundTruth};
use domseg::pipeline::{read_labels_csv, run_matrix, write_labels_csv};
use domseg::select_clusterable;
use domseg::stats::{corpus_stats, write_stats_csv};
use domseg::synth::generate_ambiguity_page;
use domseg::EvalError;

use config::{parse_single_vector, InvalidConfig, SettingsArgs};

#[derive(Debug, Parser)]
#[command(name = "domseg", version, about = "Cluster DOM nodes into page segments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write per-node coordinates of one page as CSV
    Extract {
        /// Page directory holding page.html and optionally layout.ndjson
        page: PathBuf,
        /// Write the composed (and possibly scaled) matrix of this vector instead
        #[arg(long)]
        vector: Option<String>,
        /// Output file, stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Cluster one page with one vector and one algorithm and write labels CSV
    Cluster {
        page: PathBuf,
        #[arg(long)]
        vector: String,
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Score a labels CSV against annotations
    Evaluate {
        /// Labels CSV as written by `cluster`
        #[arg(long)]
        labels: PathBuf,
        /// Annotation JSON mapping node index to cluster id
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every page x vector x algorithm cell of a corpus
    Matrix {
        corpus: PathBuf,
        /// Output directory for the report files
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Element and text-length statistics of a corpus
    Stats {
        corpus: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a label/datum grid page with layout and annotations
    Synth {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Page directory to create
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<InvalidConfig>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn open_page(dir: &Path) -> Result<PageBundle> {
    PageBundle::from_dir(dir).with_context(|| format!("{} holds no page.html", dir.display()))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Extract {
            page,
            vector,
            out,
            settings,
        } => {
            let settings = settings.resolve(None)?;
            let vector = vector.as_deref().map(parse_single_vector).transpose()?;
            let doc = open_page(&page)?.load_document()?;
            let clusterable = select_clusterable(&doc);
            let sink = output(out.as_deref())?;
            if let Some(spec) = vector {
                let fm = compose_vectors(&doc, &clusterable, &spec, &settings.compose_options())?;
                fm.write_csv(sink)?;
                return Ok(ExitCode::SUCCESS);
            }
            let coords = compute_coordinates(&doc, &clusterable, &settings.compose_options().coordinates);
            let mut w = csv::Writer::from_writer(sink);
            let mut header = vec!["node", "tag"];
            header.extend(Component::ALL.iter().map(|c| c.name()));
            w.write_record(&header)?;
            for &i in clusterable.indices() {
                let mut row = vec![i.to_string(), doc.nodes[i].tag_name.clone()];
                row.extend(
                    Component::ALL
                        .iter()
                        .map(|&c| coords[i].get(c).map(|v| v.to_string()).unwrap_or_default()),
                );
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        Command::Cluster {
            page,
            vector,
            algorithm,
            out,
            settings,
        } => {
            let settings = settings.resolve(None)?;
            let spec = parse_single_vector(&vector)?;
            let doc = open_page(&page)?.load_document()?;
            let clusterable = select_clusterable(&doc);
            let fm = compose_vectors(&doc, &clusterable, &spec, &settings.compose_options())?;
            let labels = cluster(&fm.rows, algorithm, &settings.params)?;
            log::info!(
                "{}: {} clusters, {} noise",
                page.display(),
                labels.cluster_count(),
                labels.noise_count()
            );
            write_labels_csv(&fm.node_ids, &labels, output(out.as_deref())?)?;
        }
        Command::Evaluate {
            labels,
            annotations,
            out,
        } => {
            let file = File::open(&labels).with_context(|| format!("opening {}", labels.display()))?;
            let (nodes, pred) = read_labels_csv(BufReader::new(file))?;
            let file = File::open(&annotations)
                .with_context(|| format!("opening {}", annotations.display()))?;
            let truth = GroundTruth::from_json(BufReader::new(file))?;
            let rand = rand_score(&pred, &nodes, &truth)?;
            let count = cluster_count_diff(&pred, &truth)?;
            let size = match cluster_size_diff(&pred, &truth) {
                Ok(v) => format!("{v:.6}"),
                Err(EvalError::NoClusters("prediction")) => String::new(),
                Err(e) => return Err(e.into()),
            };
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            w.write_record(["rand", "count_diff_pct", "size_diff_pct"])?;
            w.write_record([format!("{rand:.6}"), format!("{count:.6}"), size])?;
            w.flush()?;
        }
        Command::Matrix {
            corpus,
            out,
            settings,
        } => {
            let settings = settings.resolve(out.as_deref())?;
            let corpus = Corpus::open(&corpus)?;
            if corpus.is_empty() {
                bail!("no pages found");
            }
            let result = run_matrix(&corpus, &settings)?;
            eprintln!(
                "{} reports, {} of {} cells without a report, written to {}",
                result.reports.len(),
                result.failures.len(),
                result.total_cells,
                settings.out_dir.display()
            );
            if result.exceeds_failure_threshold() {
                eprintln!(
                    "error: {:.1}% of cells failed",
                    result.failure_ratio() * 100.0
                );
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Stats { corpus, out } => {
            let corpus = Corpus::open(&corpus)?;
            let stats = corpus_stats(&corpus);
            write_stats_csv(&stats.pages, output(out.as_deref())?)?;
            for (page, reason) in &stats.failures {
                eprintln!("unparseable page {page}: {reason}");
            }
            if let Some(share) = stats.short_band_share() {
                log::info!("{:.1}% of text nodes are 1-30 characters", share * 100.0);
            }
        }
        Command::Synth {
            rows,
            cols,
            seed,
            out,
        } => {
            if rows < 2 || cols < 2 {
                return Err(InvalidConfig("rows and cols must be at least 2".into()).into());
            }
            generate_ambiguity_page(rows, cols, seed)
                .write_bundle(&out)
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
