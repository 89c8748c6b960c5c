use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "repdiag",
    version,
    about = "Diagnostics for latent representations and evaluation protocols"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every stochastic step; sub-seeds are derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Representation matrix (CSV with header, or LDM1 binary).
    #[arg(long)]
    pub repr: PathBuf,
    /// Factor matrix, row-aligned with --repr.
    #[arg(long)]
    pub factors: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    AxisAligned,
    Rotated,
    Null,
    Lowrank,
    GaussianPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeKindArg {
    Linear,
    Mlp,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MiModeArg {
    MaxDim,
    Joint,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    /// Ridge penalty on standardized features.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub hidden: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub patience: u64,
    #[arg(long, value_enum, default_value_t = ActivationArg::Tanh)]
    pub activation: ActivationArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with known metric values.
    Synth {
        #[arg(long, value_enum)]
        kind: SynthKind,
        #[arg(long, default_value_t = 10_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 5)]
        n_factors: usize,
        #[arg(long, default_value_t = 24)]
        n_dims: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        noise: f64,
        /// Rank for --kind lowrank.
        #[arg(long, default_value_t = 5)]
        rank: usize,
        /// Correlation for --kind gaussian-pair.
        #[arg(long, default_value_t = 0.9, allow_negative_numbers = true)]
        rho: f64,
        /// Output path; `.bin` selects the binary format, anything else CSV.
        #[arg(long)]
        out_repr: PathBuf,
        #[arg(long)]
        out_factors: Option<PathBuf>,
    },
    /// Cross-validated linear and MLP probes.
    Probe {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = ProbeKindArg::Both)]
        kind: ProbeKindArg,
        #[command(flatten)]
        probe: ProbeArgs,
    },
    /// KSG mutual information per factor.
    Mi {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value_t = MiModeArg::MaxDim)]
        mode: MiModeArg,
    },
    /// Mutual information gap.
    Mig {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
        bins: u64,
    },
    /// DCI disentanglement, completeness and informativeness.
    Dci {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
        folds: u64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Separated attribute predictability.
    Sap {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Within-factor correlation ratio against a dimension partition.
    Alignment {
        #[command(flatten)]
        data: DataArgs,
        /// Lines `name,start,end_exclusive`; defaults to the 24-d layout.
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// SVD geometry of a representation.
    Geometry {
        #[arg(long)]
        repr: PathBuf,
        /// Skip column-mean centering.
        #[arg(long)]
        no_center: bool,
        #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
        rel_tol: f64,
    },
    /// Cosine similarity and norm fraction of gradient series.
    Gradients {
        /// CSV with a `step` column, one row per checkpoint.
        #[arg(long)]
        steps: PathBuf,
        /// Auxiliary-loss gradients, LDM1 binary.
        #[arg(long)]
        grads: PathBuf,
        /// Reference gradients compared against --grads.
        #[arg(long)]
        reference: PathBuf,
        /// Total gradients; adds the per-step norm fraction of --grads.
        #[arg(long)]
        total: Option<PathBuf>,
    },
    /// Sensitivity, severe-level mean, worst case and degradation of sweep curves.
    Sweep {
        /// CSV with columns model,seed,level,mean_reward.
        #[arg(long)]
        input: PathBuf,
        /// In-distribution reward as MODEL=VALUE; repeatable.
        #[arg(long = "id-reward", allow_hyphen_values = true)]
        id_reward: Vec<String>,
        /// Model whose curve the others are compared against for crossover.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Recovery time and peak error of push traces.
    Recovery {
        /// CSV with columns episode_id,step,tracking_error,push_step.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
        threshold: f64,
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
        window: u64,
        /// Count the push step itself as a candidate recovery step.
        #[arg(long)]
        include_push_step: bool,
    },
    /// Intervention deltas, and optionally clamp one factor subspace of a representation.
    Intervene {
        /// CSV with columns factor,dr_level,seed,baseline_reward,clamped_reward.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        repr: Option<PathBuf>,
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Factor whose subspace is clamped.
        #[arg(long)]
        clamp: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        value: Option<f64>,
        #[arg(long)]
        out_repr: Option<PathBuf>,
    },
    /// Paired t-test.
    Ttest {
        /// CSV with columns label,a,b.
        #[arg(long)]
        input: PathBuf,
    },
    /// Holm-Bonferroni adjustment.
    Holm {
        /// Comma-separated p-values.
        #[arg(long)]
        p: Option<String>,
        /// CSV with a `p` column.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Main effects and interaction of a paired 2x2 design.
    Factorial {
        /// CSV with columns seed,level_a,level_b,value.
        #[arg(long)]
        input: PathBuf,
    },
    /// Probes, MI, MIG, DCI, SAP, alignment and geometry in one pass.
    Report {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value_t = MiModeArg::MaxDim)]
        mode: MiModeArg,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
        bins: u64,
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long)]
        no_center: bool,
        #[arg(long, default_value_t = 1e-10, allow_negative_numbers = true)]
        rel_tol: f64,
    },
}
