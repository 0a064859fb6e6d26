use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use trajsign::classify::Protocol;
use trajsign::gmm::CovarianceKind;
use trajsign::hmm::{Topology, TrainConfig};
use trajsign::imaging::TrackConfig;
use trajsign::FeatureSet;

#[derive(Parser, Debug)]
#[command(
    name = "trajsign",
    version,
    about = "Trajectory-based dynamic sign recognition"
)]
pub struct Cli {
    /// Seed for splits, training and data generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write a machine-readable CSV report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub report_csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Extract feature files from `sNN_pNN_rNN` frame directories.
    Extract(ExtractArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Split a corpus and train one model per sign.
    Train(TrainArgs),
    /// Evaluate a model bank on a split.
    Eval(EvalArgs),
    /// Accuracy as a function of the training fraction.
    Curve(CurveArgs),
    /// Repeated runs of the three evaluation protocols.
    Table(TableArgs),
    /// Re-run the command recorded in an artifact's run header.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract(_) => "extract",
            Command::Synth(_) => "synth",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Curve(_) => "curve",
            Command::Table(_) => "table",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ExtractArgs {
    /// A video directory, or a directory of video directories.
    pub input: PathBuf,
    /// Directory for feature files.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest to create or update (default: OUT/manifest.csv).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Per-video error log (default: OUT/errors.log).
    #[arg(long)]
    pub error_log: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    pub diff_threshold: u8,
    /// Changed-pixel count for the start frame (default: 0.1% of the frame).
    #[arg(long)]
    pub area_threshold: Option<usize>,
    #[arg(long, default_value_t = 60)]
    pub tolerance: u8,
    #[arg(long, default_value_t = 3)]
    pub max_gap: usize,
    #[arg(long, default_value_t = 180)]
    pub glove_floor: u8,
    #[arg(long, default_value_t = FeatureSet::TrajectoryShape)]
    #[serde(serialize_with = "display")]
    pub feature_set: FeatureSet,
    /// Interpolated sequence length.
    #[arg(long, default_value_t = 30)]
    pub length: usize,
}

impl ExtractArgs {
    pub fn track_config(&self) -> TrackConfig {
        TrackConfig {
            diff_threshold: self.diff_threshold,
            area_threshold: self.area_threshold,
            tolerance: self.tolerance,
            max_gap: self.max_gap,
            glove_floor: self.glove_floor,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub classes: u32,
    #[arg(long, default_value_t = 12)]
    pub subjects: u32,
    #[arg(long, default_value_t = 5)]
    pub reps: u32,
    #[arg(long, default_value_t = 40)]
    pub min_frames: usize,
    #[arg(long, default_value_t = 80)]
    pub max_frames: usize,
    /// Per-frame jitter as a fraction of the frame.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.02)]
    pub subject_offset: f64,
    #[arg(long, default_value_t = 0.9)]
    pub scale_min: f64,
    #[arg(long, default_value_t = 1.1)]
    pub scale_max: f64,
    /// Knot amplitude of each subject's speed profile.
    #[arg(long, default_value_t = 0.08)]
    pub time_warp: f64,
    /// Knot amplitude of per-repetition speed variation.
    #[arg(long, default_value_t = 0.02)]
    pub rep_time_warp: f64,
    /// Largest fraction of a sign a subject holds still at each end.
    #[arg(long, default_value_t = 0.0)]
    pub subject_pause: f64,
    #[arg(long, default_value_t = FeatureSet::TrajectoryShape)]
    #[serde(serialize_with = "display")]
    pub feature_set: FeatureSet,
    /// Also render frame sequences for this many samples under OUT/videos.
    #[arg(long, value_name = "N")]
    pub frames: Option<usize>,
    #[arg(long, default_value_t = 160)]
    pub frame_width: usize,
    #[arg(long, default_value_t = 120)]
    pub frame_height: usize,
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    Random,
    SubjectDependent,
    SubjectIndependent,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SplitArgs {
    #[arg(long = "split", value_enum, default_value_t = SplitKind::Random)]
    pub kind: SplitKind,
    /// Per-class training fraction for random splits.
    #[arg(long, default_value_t = 0.2)]
    pub train_fraction: f64,
    /// Training samples per (class, subject) for subject-dependent splits.
    #[arg(long, default_value_t = 1)]
    pub per_subject: usize,
    /// Training subjects for subject-independent splits.
    #[arg(long, default_value_t = 2)]
    pub train_subjects: usize,
}

impl SplitArgs {
    pub fn protocol(&self) -> Protocol {
        self.protocol_of(self.kind)
    }

    pub fn protocol_of(&self, kind: SplitKind) -> Protocol {
        match kind {
            SplitKind::Random => Protocol::Random {
                fraction: self.train_fraction,
            },
            SplitKind::SubjectDependent => Protocol::SubjectDependent {
                per_subject: self.per_subject,
            },
            SplitKind::SubjectIndependent => Protocol::SubjectIndependent {
                train_subjects: self.train_subjects,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyArg {
    Ergodic,
    LeftRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovarianceArg {
    Full,
    Diagonal,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 12)]
    pub states: usize,
    #[arg(long, default_value_t = 3)]
    pub mixtures: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
    /// Relative log-likelihood improvement that ends training.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tolerance: f64,
    #[arg(long, value_enum, default_value_t = TopologyArg::Ergodic)]
    pub topology: TopologyArg,
    #[arg(long, value_enum, default_value_t = CovarianceArg::Full)]
    pub covariance: CovarianceArg,
}

impl ModelArgs {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            num_states: self.states,
            num_mixtures: self.mixtures,
            max_iterations: self.max_iterations,
            rel_tolerance: self.rel_tolerance,
            seed,
            topology: match self.topology {
                TopologyArg::Ergodic => Topology::Ergodic,
                TopologyArg::LeftRight => Topology::LeftRight,
            },
            covariance: match self.covariance {
                CovarianceArg::Full => CovarianceKind::Full,
                CovarianceArg::Diagonal => CovarianceKind::Diagonal,
            },
            ..TrainConfig::default()
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    pub manifest: PathBuf,
    #[arg(long, short = 'o')]
    pub model_out: PathBuf,
    /// Split record (default: MODEL_OUT with a `.split.csv` suffix).
    #[arg(long)]
    pub split_out: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    Test,
    Train,
    All,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Split record written by `train`; without it every sample is used.
    #[arg(long = "split")]
    pub split_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Partition::Test)]
    pub partition: Partition,
    /// Directory for summary.txt, per_class.csv and confusion.csv.
    #[arg(long, default_value = "report")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    pub manifest: PathBuf,
    /// Comma-separated training fractions.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5"
    )]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Curve CSV (default: standard output only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct TableArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Protocols to run (default: all three).
    #[arg(long = "protocol", value_enum, value_delimiter = ',')]
    pub protocols: Vec<SplitKind>,
    /// Also score the 1-nearest-neighbour baseline on the same splits.
    #[arg(long)]
    pub baseline: bool,
    /// Table text file (default: standard output only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    /// Any artifact written by this tool.
    pub artifact: PathBuf,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}
