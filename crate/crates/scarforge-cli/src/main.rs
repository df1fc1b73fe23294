mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "scarforge", version, about = "Scarred Hamiltonians from Floquet permutation automata")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "SCARFORGE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rank all phase-free 3-qubit permutation gates by satisfied type I rules.
    Search(SearchArgs),
    /// Count local rules on the protected orbit.
    Rules(RulesArgs),
    /// PR and fidelity traces of a time-evolved basis state.
    Revivals(RevivalArgs),
    /// IPR against energy with Néel-overlap flags.
    Ipr(IprArgs),
    /// Gap-ratio statistics in a symmetry sector.
    Rstat(RstatArgs),
    /// Norm profile of the BCH terms.
    Bch(BchArgs),
    /// Spectrum-generating-algebra residual for QMBS-C.
    SgaCheck(SgaArgs),
    /// Compare h₀ (or U₀) with its spin-operator form.
    SpinrepCheck(SpinrepArgs),
    /// Orbit of a seed under the Floquet unitary.
    Orbit(OrbitArgs),
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Required gate order (its divisors are admitted).
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    #[arg(short = 'L', long = "len", default_value_t = 8)]
    pub len: usize,
    /// Also require U_F to map the Néel pair onto itself.
    #[arg(long)]
    pub require_orbit: bool,
    /// Keep only the best `top` hits in the output.
    #[arg(long)]
    pub top: Option<usize>,
    /// `.json` writes loadable model files, anything else CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleType {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

#[derive(Args, Debug)]
pub struct RulesArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 8)]
    pub len: usize,
    #[arg(long = "type")]
    pub kind: Option<RuleType>,
    /// Powers run below this bound (defaults to the model's reference value).
    #[arg(long)]
    pub powers: Option<usize>,
    #[arg(long, default_value_t = scarforge::rules::TYPE2_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dense,
    Taylor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Krylov,
    Full,
}

#[derive(Args, Debug)]
pub struct RevivalArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 12)]
    pub len: usize,
    /// `neel`, `generic`, `seed` or an explicit bit string.
    #[arg(long, default_value = "neel")]
    pub state: String,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 300.0)]
    pub tmax: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Dense)]
    pub method: MethodArg,
    /// Step-doubling tolerance of the Taylor method.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Space::Krylov)]
    pub space: Space,
    /// Sites whose ⟨Z⟩ is traced.
    #[arg(long, value_delimiter = ',')]
    pub z_sites: Vec<usize>,
    /// Add BCH terms up to this order to A + B.
    #[arg(long, default_value_t = 0)]
    pub augment: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IprArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 12)]
    pub len: usize,
    /// Defaults to the full space for qmbs-c and the Krylov subspace otherwise.
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    #[arg(long, default_value_t = scarforge::spectral::FLAG_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RstatArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 12)]
    pub len: usize,
    #[arg(long, default_value = "s2+1,usm+1")]
    pub sector: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BchArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 12)]
    pub len: usize,
    #[arg(long, default_value_t = 8)]
    pub orders: usize,
    /// Defaults to the full space for qmbs-c and the Krylov subspace otherwise.
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    /// Normalization dimension for the leakage and generic norms.
    #[arg(long)]
    pub neff: Option<usize>,
    /// Also print the golden-rule decay estimate from C₂.
    #[arg(long)]
    pub fgr: bool,
    /// Bandwidth for the decay estimate (computed from A + B if omitted).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SgaArgs {
    #[arg(short = 'L', long = "len", default_value_t = 8)]
    pub len: usize,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub eps: f64,
}

#[derive(Args, Debug)]
pub struct SpinrepArgs {
    #[arg(long)]
    pub model: String,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long)]
    pub model: String,
    #[arg(short = 'L', long = "len", default_value_t = 8)]
    pub len: usize,
    /// Bit string; defaults to the model's first seed.
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
