use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ionet", version, about = "Contract, validate and simulate quantum input-output networks")]
pub struct Cli {
    /// Max-abs deviation from unitarity accepted for scattering blocks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_unitary: f64,

    /// Weight above which a delayed path violates the weak-loop criterion.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub weight_threshold: f64,

    /// Shortest relevant system timescale in seconds [default: 1/κ_max].
    #[arg(long, global = true)]
    pub tau_min: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and report the weak-loop validity table.
    Validate(ValidateArgs),
    /// Contract a network into its effective model (JSON).
    Contract(ContractArgs),
    /// List scattering paths with weights and delays (CSV).
    Paths(PathsArgs),
    /// Integrate the master equation of a contracted network (CSV).
    Simulate(SimulateArgs),
    /// Synthesize and simulate the dark-state transfer protocol.
    Transfer(TransferArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub net: PathBuf,

    /// Longest paths considered, in loop traversals.
    #[arg(long, default_value_t = 16)]
    pub max_order: usize,

    /// Paths down to this weight are listed.
    #[arg(long, default_value_t = 1e-3)]
    pub min_weight: f64,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    pub net: PathBuf,

    /// Write `effective_model.json` and a manifest here instead of stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PathsArgs {
    pub net: PathBuf,

    #[arg(long, default_value_t = 8)]
    pub max_order: usize,

    #[arg(long, default_value_t = 1e-4)]
    pub min_weight: f64,

    /// Write `paths.csv` and a manifest here instead of stdout.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub net: PathBuf,

    #[arg(long)]
    pub t_final: f64,

    /// Step size [default: 1e-3/κ_max].
    #[arg(long)]
    pub dt: Option<f64>,

    /// Comma-separated observables: Pauli strings (`ZI`, `XX`) or
    /// projectors onto qubit basis states (`P:ud`).
    #[arg(long, value_delimiter = ',', default_value = "Z")]
    pub observables: Vec<String>,

    /// `ground`, `excited`, a qubit label such as `ud`, or a JSON file with
    /// a density matrix as rows of `[re, im]` pairs.
    #[arg(long, default_value = "excited")]
    pub initial: String,

    /// Keep every n-th step in the output.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,

    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    /// |r_ii|² ∈ [0.04, 0.15] with dark residual < 0.01.
    Low,
    /// |r_ii|² ∈ [0.04, 0.15], any dark residual.
    LowAny,
    /// |r_ii|² ∈ [0.42, 0.84] with cos(δ₊ − δ₋) ≈ −0.15.
    High,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    /// Two-qubit network file.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub net: Option<PathBuf>,

    /// Use a seeded two-circulator channel with perturbed circulators.
    #[arg(long)]
    pub random: bool,

    /// Circulator perturbation strength ε ∈ [0, 2].
    #[arg(long, default_value_t = 0.5, requires = "random", conflicts_with = "class")]
    pub eps: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Interconnect phase of the random channel.
    #[arg(long, default_value_t = 0.0, requires = "random", conflicts_with = "class")]
    pub phase: f64,

    /// Rejection-sample the random channel from a reflectance class instead
    /// of using `--eps`/`--phase` directly.
    #[arg(long, value_enum, requires = "random")]
    pub class: Option<ClassArg>,

    /// Sender rate κ₀ (sets the time unit).
    #[arg(long, default_value_t = 1.0)]
    pub kappa0: f64,

    /// Initial receiver-to-sender rate ratio κ_b(0)/κ₀ in dB.
    #[arg(long, default_value_t = 25.0)]
    pub ratio_db: f64,

    /// Protocol duration [default: 20/κ₀].
    #[arg(long = "T")]
    pub t_final: Option<f64>,

    /// Step size [default: 1e-4/κ₀].
    #[arg(long)]
    pub dt: Option<f64>,

    /// Constant sender detuning h_az.
    #[arg(long, default_value_t = 0.0)]
    pub h_az: f64,

    /// Keep every n-th step in the trajectory CSV.
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,

    /// Run seeds `seed .. seed+N` in parallel and write `sweep.csv` only.
    #[arg(long, requires = "random")]
    pub sweep: Option<u64>,

    #[arg(short, long, default_value = ".")]
    pub out: PathBuf,
}
