use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dfvqm_core::alignment::GaConfig;
use dfvqm_core::correction::ConcealmentStrategy;
use dfvqm_core::harness::RawGeometry;
use dfvqm_core::index::TdVariant;
use dfvqm_core::metrics::MetricConfig;
use dfvqm_core::video_io::RawLayout;

#[derive(Debug, Parser)]
#[command(
    name = "dfvqm",
    version,
    about = "Full-reference quality scoring for videos with dropped frames"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-frame PSNR and SSIM of a pair, frame i against frame i.
    Metrics(PairArgs),
    /// Which reference frame each distorted frame came from.
    Align(AnalyzeArgs),
    /// Full quality report.
    Analyze(AnalyzeArgs),
    /// Drop frames (and optionally add bitplane noise) from a reference.
    Distort(DistortArgs),
    /// Run an experiment grid and write its CSV.
    Experiment(ExperimentArgs),
    /// Correlate scores with subjective ratings.
    Correlate(CorrelateArgs),
    /// Render a procedural test clip.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RawArgs {
    /// Frame width for .yuv inputs.
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height for .yuv inputs.
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long, value_enum, default_value_t = LayoutArg::I420)]
    pub layout: LayoutArg,
}

impl RawArgs {
    pub fn geometry(&self) -> Option<RawGeometry> {
        match (self.width, self.height) {
            (Some(width), Some(height)) => Some(RawGeometry {
                width,
                height,
                layout: self.layout.into(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Reference video (.y4m or .yuv).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Distorted video (.y4m or .yuv).
    #[arg(long = "dist")]
    pub distorted: PathBuf,
    #[command(flatten)]
    pub raw: RawArgs,
    /// Upper bound on PSNR in dB.
    #[arg(long, default_value_t = 100.0)]
    pub psnr_cap: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl PairArgs {
    pub fn metric_config(&self) -> MetricConfig {
        MetricConfig {
            psnr_cap: self.psnr_cap,
            ..MetricConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct GaArgs {
    #[arg(long, default_value_t = GaConfig::default().population_size)]
    pub population: usize,
    #[arg(long, default_value_t = GaConfig::default().generations)]
    pub generations: usize,
    #[arg(long, default_value_t = GaConfig::default().mutation_rate)]
    pub mutation_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub ga_seed: u64,
}

impl GaArgs {
    pub fn config(&self) -> GaConfig {
        GaConfig {
            population_size: self.population,
            generations: self.generations,
            mutation_rate: self.mutation_rate,
            seed: self.ga_seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::RepeatLast)]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value_t = VariantArg::FullChunk)]
    pub td_variant: VariantArg,
    /// Also write the concealed, reference-length video as Y4M.
    #[arg(long)]
    pub emit_corrected: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistortArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[command(flatten)]
    pub raw: RawArgs,
    /// Distorted Y4M to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the plan JSON; defaults to `<out>.plan.json`.
    #[arg(long)]
    pub plan_out: Option<PathBuf>,
    /// Apply this plan JSON instead of generating one.
    #[arg(long, conflicts_with_all = ["case", "possibility"])]
    pub plan: Option<PathBuf>,
    /// Case label: 2.1, 2.2, 2.3 or 2.4.
    #[arg(long, required_unless_present = "plan")]
    pub case: Option<String>,
    /// Possibility 1-4; unconstrained when absent.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub possibility: Option<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// SSIM at or above which two frames count as similar.
    #[arg(long, default_value_t = 0.9)]
    pub sim_threshold: f64,
    /// Luma bit to replace with noise (0 or 3).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["0", "3"]))]
    pub bitplane: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// CSV path; overrides the config's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drop placements per cell; overrides the config.
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Experiment CSV or two-column label,value CSV.
    #[arg(long)]
    pub scores: PathBuf,
    /// Two-column label,value CSV of subjective scores.
    #[arg(long)]
    pub mos: PathBuf,
    /// Column to read from an experiment CSV.
    #[arg(long, default_value = "dfvqmi")]
    pub metric: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 176)]
    pub width: usize,
    #[arg(long, default_value_t = 144)]
    pub height: usize,
    #[arg(long, default_value_t = 250)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LayoutArg {
    I420,
    LumaOnly,
}

impl From<LayoutArg> for RawLayout {
    fn from(v: LayoutArg) -> Self {
        match v {
            LayoutArg::I420 => RawLayout::I420,
            LayoutArg::LumaOnly => RawLayout::LumaOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    RepeatLast,
    AdjacentAverage,
    ContiguousAverage,
}

impl From<StrategyArg> for ConcealmentStrategy {
    fn from(v: StrategyArg) -> Self {
        match v {
            StrategyArg::RepeatLast => ConcealmentStrategy::RepeatLast,
            StrategyArg::AdjacentAverage => ConcealmentStrategy::AdjacentAverage,
            StrategyArg::ContiguousAverage => ConcealmentStrategy::ContiguousAverage,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    FullChunk,
    Literal,
}

impl From<VariantArg> for TdVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::FullChunk => TdVariant::FullChunk,
            VariantArg::Literal => TdVariant::Literal,
        }
    }
}
