use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Optimal orthogonal low-rank approximation of symmetric tensors.
///
/// Tensors are read as JSON from --input or stdin. Mode indices on the
/// command line are 1-based.
#[derive(Debug, Parser)]
#[command(name = "symortho", version, about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a named or random tensor as JSON.
    Gen(GenArgs),
    /// Best rank-r approximation under an orthogonality notion.
    Approx(ApproxArgs),
    /// Certified bracket on the optimum from the angle-grid oracle.
    Oracle(OracleArgs),
    /// Spectral norm and the A_r norm chain.
    Norms(NormsArgs),
    /// Greedy rank-one deflation.
    Deflate(DeflateArgs),
    /// Audit a decomposition against a notion.
    Check(CheckArgs),
    /// Reproduce the named cases.
    Paper {
        #[command(subcommand)]
        command: PaperCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum PaperCommand {
    /// Run the checks of one case, or of every case.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NotionArg {
    On,
    Son,
    Con,
    Pcon,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, short, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct Search {
    /// Random starts per parametrization.
    #[arg(long, default_value_t = 64)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Tensor JSON; stdin when absent.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub notion: NotionArg,
    #[arg(long, short)]
    pub rank: usize,
    /// Orthogonal modes for pcon, 1-based and comma separated.
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<usize>,
    /// Restrict to symmetric terms σ v⊗…⊗v.
    #[arg(long)]
    pub symmetric: bool,
    /// Tie the factors inside the pcon mode set and inside its complement.
    #[arg(long)]
    pub structured: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// A library case; its main tensor is written.
    #[arg(long, conflicts_with = "dims")]
    pub case: Option<String>,
    /// Dimensions of a random Gaussian tensor, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "case")]
    pub dims: Vec<usize>,
    /// Symmetrize the random tensor (needs equal dims).
    #[arg(long, requires = "dims")]
    pub symmetric: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Also solve the symmetric problem and compare the two optima.
    #[arg(long, conflicts_with = "symmetric")]
    pub cross: bool,
    #[command(flatten)]
    pub search: Search,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Required bracket width on the objective.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Largest rank in the chain.
    #[arg(long, default_value_t = 2)]
    pub max_rank: usize,
    /// Certify entries with the oracle where the shape allows it.
    #[arg(long)]
    pub certify: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(flatten)]
    pub search: Search,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DeflateArgs {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub rank: usize,
    /// Search each step in the orthogonal complement of the earlier factors.
    #[arg(long)]
    pub constrained: bool,
    #[command(flatten)]
    pub search: Search,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// A decomposition, or a report holding one under "decomposition";
    /// stdin when absent.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub notion: NotionArg,
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<usize>,
    #[arg(long, default_value_t = symortho::ORTHO_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, required_unless_present = "all")]
    pub case: Option<String>,
    #[arg(long, conflicts_with = "case")]
    pub all: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[command(flatten)]
    pub search: Search,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, short, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}
