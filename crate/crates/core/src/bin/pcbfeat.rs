use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pcbfeat::pipeline::{
    render_report, run_extract, run_rank, synth_dataset, with_jobs, ComponentTexture, PipelineConfig,
    SyntheticBoardSpec,
};
use pcbfeat::Family;

/// Interpretable feature extraction and importance ranking for PCB images.
#[derive(Parser)]
#[command(name = "pcbfeat", version)]
struct Cli {
    /// Log per-family timings and progress.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one feature CSV per (image, ksize).
    Extract(RunArgs),
    /// Fit forests on extracted CSVs and write importance summaries.
    Rank(RunArgs),
    /// Print a digest of a finished rank run.
    Report {
        /// Output directory of the run.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate synthetic boards with masks and a dataset manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// JSON board spec; defaults are used for missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Stripe period for component texture.
        #[arg(long)]
        striped: Option<usize>,
        /// Uniform noise amplitude per channel.
        #[arg(long)]
        noise: Option<u8>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON pipeline config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset manifest, overriding the config.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated window sizes, e.g. 5,10,25.
    #[arg(long, value_delimiter = ',')]
    ksizes: Option<Vec<usize>>,
    /// Comma-separated families: color, shape, texture.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<Family>>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;

impl RunArgs {
    fn resolve(self) -> anyhow::Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.dataset {
            c.dataset = v;
        }
        if let Some(v) = self.out {
            c.output_dir = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.ksizes {
            c.ksizes = v;
        }
        if let Some(v) = self.families {
            c.families = v;
        }
        if self.jobs.is_some() {
            c.jobs = self.jobs;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Extract(args) => {
            let c = args.resolve()?;
            let summary = with_jobs(c.jobs, || run_extract(&c))??;
            report_failures("extract", &summary.failed);
            eprintln!("extract: {} image(s) ok, output in {}", summary.succeeded, c.output_dir.display());
            Ok(summary.exit_code() as u8)
        }
        Command::Rank(args) => {
            let c = args.resolve()?;
            let summary = with_jobs(c.jobs, || run_rank(&c))??;
            report_failures("rank", &summary.failed);
            print!("{}", render_report(&c.output_dir)?);
            Ok(summary.exit_code() as u8)
        }
        Command::Report { out, config } => {
            let dir = match (out, config) {
                (Some(d), _) => d,
                (None, Some(p)) => PipelineConfig::load(p)?.output_dir,
                (None, None) => PipelineConfig::default().output_dir,
            };
            let text = render_report(&dir).with_context(|| format!("no rank output in {}", dir.display()))?;
            print!("{text}");
            Ok(0)
        }
        Command::Synth {
            out,
            count,
            spec,
            seed,
            striped,
            noise,
        } => {
            let mut s: SyntheticBoardSpec = match spec {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(&p)?)
                    .with_context(|| format!("board spec {}", p.display()))?,
                None => SyntheticBoardSpec::default(),
            };
            if let Some(v) = seed {
                s.seed = v;
            }
            if let Some(period) = striped {
                s.texture = ComponentTexture::Striped { period };
            }
            if let Some(v) = noise {
                s.noise = v;
            }
            let m = synth_dataset(&s, count, &out)?;
            eprintln!("synth: {} board(s), manifest {}", m.images.len(), out.join("dataset.json").display());
            Ok(0)
        }
    }
}

fn report_failures(stage: &str, failed: &[(String, String)]) {
    for (id, err) in failed {
        eprintln!("{stage}: {id} failed: {err}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
