use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nnapprox::regression::Lambda;
use nnapprox::{ActivationKind, MultVariant};

#[derive(Debug, Parser)]
#[command(name = "nnapprox", version, about = "Constructive absolute-value networks, path norms and entropy bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a construction's network as JSON.
    Build {
        #[command(subcommand)]
        which: BuildCmd,
    },
    /// Evaluate a network on one input vector (including the leading 1).
    Eval {
        net: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        input: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Path norm, path matrix and per-layer l1 norms of a network.
    PathNorm {
        net: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-check a construction against its error bound; exits 1 on failure.
    Verify {
        #[command(subcommand)]
        which: VerifyCmd,
    },
    /// Covering-number bounds and the empirical greedy cover.
    Entropy {
        #[command(subcommand)]
        which: EntropyCmd,
    },
    /// Approximation networks with certificates.
    Approx {
        #[command(subcommand)]
        which: ApproxCmd,
    },
    /// Fit a path-norm penalized network to synthetic data.
    Regress(RegressArgs),
    /// Chebyshev polynomial coefficients and fits.
    Cheb {
        #[command(subcommand)]
        which: ChebCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum BuildCmd {
    Sq {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mult {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Multr {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mon {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        gamma: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    Sq {
        #[arg(long)]
        m: u32,
        /// Equispaced points on [0, 1].
        #[arg(long, default_value_t = 10_001)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mult {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Multr {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Mon {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        gamma: u32,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        /// Points per axis.
        #[arg(long, default_value_t = 51)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum EntropyCmd {
    /// log2 covering-number bound of the capped network class.
    Bound {
        #[arg(long)]
        eps: f64,
        /// Number of hidden layers.
        #[arg(long = "L")]
        depth: usize,
        /// Widths p_0, ..., p_{L+1}.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<usize>,
        /// Path-norm cap.
        #[arg(long = "B")]
        b_cap: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy cover of sampled networks against the bound; exits 1 if it exceeds it.
    Empirical {
        /// JSON file with eps, depth, widths, b_cap, r and n.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 5000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Activation::Abs)]
        activation: Activation,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Activation {
    Abs,
    Relu,
    Identity,
}

impl From<Activation> for ActivationKind {
    fn from(a: Activation) -> Self {
        match a {
            Activation::Abs => ActivationKind::Abs,
            Activation::Relu => ActivationKind::Relu,
            Activation::Identity => ActivationKind::Identity,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum ApproxCmd {
    /// Partial power sum read off the all-monomials network.
    PowerSeries {
        /// Builtin series (inv2mx, exp) or a polynomial JSON file.
        #[arg(long)]
        series: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Bound F for a polynomial file; defaults to its coefficient l1 sum.
        #[arg(long = "F")]
        f_bound: Option<f64>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        /// Points per axis of the measurement grid on the claimed domain.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(long)]
        net_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chebyshev fit converted to monomials on the all-monomials network.
    Cheb {
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "rescaled")]
        variant: MultVariant,
        #[arg(long)]
        net_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    /// Standard deviation of the Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// `L,p_1,...,p_L`.
    #[arg(long)]
    pub arch: Arch,
    /// `auto` or a fixed value.
    #[arg(long, default_value = "auto")]
    pub lambda: Lambda,
    /// Scale of the automatic lambda.
    #[arg(long, default_value_t = 1.0)]
    pub lambda_c: f64,
    /// Constant of the remainder term in the oracle report.
    #[arg(long, default_value_t = 1.0)]
    pub remainder_c: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the fitted network here instead of embedding it in the report.
    #[arg(long)]
    pub net_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Arch {
    pub hidden: Vec<usize>,
}

impl FromStr for Arch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let (&depth, hidden) = parts.split_first().ok_or("empty architecture")?;
        if hidden.len() != depth {
            return Err(format!("L = {depth} needs {depth} widths, got {}", hidden.len()));
        }
        if hidden.contains(&0) {
            return Err("widths must be >= 1".into());
        }
        Ok(Arch {
            hidden: hidden.to_vec(),
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum ChebCmd {
    /// Exact monomial coefficients of T_n, lowest power first.
    Poly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chebyshev-Gauss-Lobatto tensor fit of a builtin target on [0, 1]^d.
    Fit {
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Per-axis degree.
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
