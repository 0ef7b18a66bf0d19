//! Command-line surface. Every parsed invocation is also the run
//! configuration embedded in reports, so the types derive both clap and
//! serde.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrmark::rscodec::Profile;
use qrmark::tiling::TileStrategy;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Parser, Serialize, Deserialize)]
#[command(name = "qrmark", version, about = "Tile-based image watermarking with Reed-Solomon correction and pipeline scheduling")]
pub struct Cli {
    /// Seed for every random choice (tile placement, synthetic data, attacks).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Omit timestamps and wall-clock measurements from reports.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Write a synthetic image corpus as PPM files.
    Synth(SynthArgs),
    /// Watermark one image or every image in a directory.
    Embed(EmbedArgs),
    /// Apply an attack suite to one image or a directory.
    Attack(AttackArgs),
    /// Detect and verify watermarks.
    Detect(DetectArgs),
    /// Reed-Solomon encode or decode a bit string.
    Rs(RsArgs),
    /// Measure per-stage times and memory of the detection pipeline.
    Profile(ProfileArgs),
    /// Allocate streams and mini-batches from a stage profile.
    Schedule(ScheduleArgs),
    /// Simulate a stream plan on a discrete-event clock.
    Simulate(SimulateArgs),
    /// Measure detection latency and throughput across batch sizes.
    Bench(BenchArgs),
    /// Re-execute the configuration embedded in a report.
    Rerun(RerunArgs),
}

/// Watermark key, code and tiling shared by embed, detect, profile and bench.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct CodecArgs {
    /// Seed of the watermark key.
    #[arg(long, default_value_t = 0)]
    pub key_seed: u64,

    /// Message as hex (or 0b-prefixed binary).
    #[arg(long, default_value = "0123456789ab")]
    pub msg: String,

    /// Code profile: gf16-15-12, gf256-dynamic[-parity] or gf<q>-<n>-<k>.
    #[arg(long, default_value = "gf16-15-12")]
    pub profile: Profile,

    #[arg(long, default_value_t = 64)]
    pub tile_size: usize,

    /// random, random_grid or fixed.
    #[arg(long, default_value = "random_grid")]
    pub tile_strategy: TileStrategy,

    /// Embedding strength.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Switch {
    On,
    Off,
}

/// Detector knobs beyond the codec.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct DetectorArgs {
    /// Correction-stage workers.
    #[arg(long, env = "QRMARK_THREADS", default_value_t = 32)]
    pub rs_workers: usize,

    /// Target false-positive rate of verification.
    #[arg(long, default_value_t = 1e-6)]
    pub fpr: f64,

    /// Memoize correction results by raw bits.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub cache: Switch,

    /// Reject undecodable words instead of comparing raw bits with the
    /// reference codeword.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 16)]
    pub count: usize,

    #[arg(long, default_value_t = 256)]
    pub width: usize,

    #[arg(long, default_value_t = 256)]
    pub height: usize,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    /// Image file or directory.
    #[arg(long)]
    pub input: PathBuf,

    /// Output file, or directory when the input is a directory.
    #[arg(long)]
    pub output: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub codec: CodecArgs,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct AttackArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Output directory; files are named `<stem>__<label>.ppm`.
    #[arg(long)]
    pub output: PathBuf,

    /// JSON list of `{op, param | params}` entries; the robustness table
    /// columns when absent.
    #[arg(long)]
    pub suite: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub codec: CodecArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub detector: DetectorArgs,

    /// Unwatermarked originals, matched by file stem, for PSNR.
    #[arg(long)]
    pub originals: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct RsArgs {
    #[command(subcommand)]
    pub op: RsOp,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum RsOp {
    /// Message bits to codeword.
    Encode {
        #[arg(long, default_value = "gf16-15-12")]
        profile: Profile,
        /// Message as hex or binary.
        #[arg(long)]
        msg: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Received word to corrected message.
    Decode {
        #[arg(long, default_value = "gf16-15-12")]
        profile: Profile,
        /// Received word as hex or binary.
        #[arg(long)]
        word: String,
        /// Information bits when the profile does not fix them.
        #[arg(long)]
        payload_bits: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ProfileArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Timed warm-up iterations.
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,

    #[command(flatten)]
    #[serde(flatten)]
    pub codec: CodecArgs,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Stream-allocation knobs.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct PlanKnobs {
    /// Global batch B.
    #[arg(long, default_value_t = 256)]
    pub batch: usize,

    /// Stream budget P.
    #[arg(long, default_value_t = 16)]
    pub streams: usize,

    /// Memory cap M_cap in the profile's memory unit.
    #[arg(long, default_value_t = 8.0 * 1024.0 * 1024.0 * 1024.0)]
    pub mem_cap: f64,

    /// Minimum bottleneck improvement ε for an accepted stream.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,

    /// Non-improving rounds τ_stall before the search stops.
    #[arg(long, default_value_t = 3)]
    pub tau_stall: usize,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct ScheduleArgs {
    /// Stage profile JSON (`t`, `u`, `b0`) or a profile report.
    #[arg(long)]
    pub profile: PathBuf,

    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: PlanKnobs,

    /// Tasks to place with the LPT scheduler; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub tasks: usize,

    /// Tile sizes assigned to tasks in turn.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    pub tile_sizes: Vec<usize>,

    /// Tile size the profile was measured at.
    #[arg(long, default_value_t = 64)]
    pub reference_tile: usize,

    /// LPT balance slack λ; negative disables the balance test.
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    pub lambda: f64,

    /// Smallest shard b_min.
    #[arg(long, default_value_t = 1)]
    pub b_min: usize,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Stream plan JSON or a schedule report.
    #[arg(long)]
    pub plan: PathBuf,

    /// Stage profile JSON or a profile report.
    #[arg(long)]
    pub profile: PathBuf,

    /// Samples in the simulated batch.
    #[arg(long, default_value_t = 256)]
    pub batch: usize,

    /// Nanoseconds per profile time unit.
    #[arg(long, default_value_t = 1_000_000)]
    pub unit_ns: u64,

    /// Host cost per sub-batch launch, in nanoseconds.
    #[arg(long, default_value_t = 0)]
    pub launch_ns: u64,

    /// Host preparation per stage-0 sample, in nanoseconds.
    #[arg(long, default_value_t = 0)]
    pub prep_ns: u64,

    /// Overlap host preparation with kernels.
    #[arg(long)]
    pub interleave: bool,

    /// Event trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Image directory; a synthetic corpus of the largest batch size when
    /// absent.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub batch_sizes: Vec<usize>,

    /// Stream plan to compare against the one-worker-per-stage baseline.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub codec: CodecArgs,

    /// Latency/throughput table.
    #[arg(long)]
    pub csv: Option<PathBuf>,

    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// Report whose embedded configuration is re-executed.
    pub from: PathBuf,

    /// Where to write the new report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

impl Command {
    pub fn report_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Synth(a) => a.report.as_ref(),
            Command::Embed(a) => a.report.as_ref(),
            Command::Attack(a) => a.report.as_ref(),
            Command::Detect(a) => a.report.as_ref(),
            Command::Rs(a) => match &a.op {
                RsOp::Encode { report, .. } | RsOp::Decode { report, .. } => report.as_ref(),
            },
            Command::Profile(a) => a.report.as_ref(),
            Command::Schedule(a) => a.report.as_ref(),
            Command::Simulate(a) => a.report.as_ref(),
            Command::Bench(a) => a.report.as_ref(),
            Command::Rerun(a) => a.report.as_ref(),
        }
    }

    pub fn set_report_path(&mut self, path: Option<PathBuf>) {
        let slot = match self {
            Command::Synth(a) => &mut a.report,
            Command::Embed(a) => &mut a.report,
            Command::Attack(a) => &mut a.report,
            Command::Detect(a) => &mut a.report,
            Command::Rs(a) => match &mut a.op {
                RsOp::Encode { report, .. } | RsOp::Decode { report, .. } => report,
            },
            Command::Profile(a) => &mut a.report,
            Command::Schedule(a) => &mut a.report,
            Command::Simulate(a) => &mut a.report,
            Command::Bench(a) => &mut a.report,
            Command::Rerun(a) => &mut a.report,
        };
        *slot = path;
    }
}
