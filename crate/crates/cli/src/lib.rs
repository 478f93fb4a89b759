//! Command-line front end: synthesis, dataset builds, color analysis,
//! metric evaluation and timing.

pub mod commands;
pub mod config;
pub mod timing;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

pub const CONFIG_ENV: &str = "DUSTSYNTH_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "dustsynth", version, about = "Sand-dust image synthesis and evaluation")]
pub struct Cli {
    /// Master seed; overrides the config value.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Run directory; overrides the config value.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one clear image through dust and print a JSON line.
    Synthesize(SynthesizeArgs),
    /// Build a dataset from the configured corpus and subsets.
    Build(BuildArgs),
    /// Histograms, prior checks and LAB clustering of an image or dataset.
    Analyze(AnalyzeArgs),
    /// Quality metrics over a pair list or dataset manifest.
    Evaluate(EvaluateArgs),
    /// Time synthesis and evaluation on generated images.
    Time(TimeArgs),
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub clear: PathBuf,
    #[arg(long)]
    pub depth: PathBuf,
    /// Dust tint as #RRGGBB with R > G > B.
    #[arg(long = "a-s", alias = "tint")]
    pub a_s: String,
    /// Attenuation coefficient, 0 < beta <= 1.
    #[arg(long)]
    pub beta: f64,
    /// Output image; defaults to `<out>/<stem>_dust.png`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Use depth values as stored instead of rescaling them to [0, 1].
    #[arg(long)]
    pub raw_depth: bool,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Re-render the entries of an existing manifest instead of sampling anew.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// An image, or a dataset manifest whose outputs are analyzed.
    pub input: PathBuf,
    /// Number of clusters; overrides the config value.
    #[arg(long, short)]
    pub k: Option<usize>,
    /// Quantize each channel to this many levels before clustering.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Pair list `{"pairs": [...]}` or a dataset manifest.
    pub input: PathBuf,
    /// Comma-separated metric names; overrides the config value.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Square image side lengths.
    #[arg(long, value_delimiter = ',', default_values_t = [256, 512, 1024])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
}

impl Cli {
    /// Loads the config file if any, then applies command-line overrides.
    pub fn resolve_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = Some(out.clone());
        }
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = cli.resolve_config()?;
    let log = commands::Log { quiet: cli.quiet };
    match &cli.command {
        Command::Synthesize(a) => commands::synthesize(&cfg, a, &log),
        Command::Build(a) => commands::build(&cfg, a, &log),
        Command::Analyze(a) => commands::analyze(&cfg, a, &log),
        Command::Evaluate(a) => commands::evaluate(&cfg, a, &log),
        Command::Time(a) => commands::time(&cfg, a, &log),
    }
}
