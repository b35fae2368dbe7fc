use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chandiv::divisibility::SearchConfig;
use chandiv::factorization::FactorConfig;
use chandiv::Tolerance;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "chandiv", version, about = "Divisibility checks and factorizations for quantum channels")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Entrywise equality tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub psd_eps: f64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub rank_eps: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Starting points for the heuristic candidate search.
    #[arg(long, global = true, default_value_t = 64)]
    pub starts: usize,
    /// Defaults to n².
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Threads for the candidate search; output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl GlobalOpts {
    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        Tolerance::new(self.rank_eps, self.psd_eps, self.tol).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn search(&self) -> Result<SearchConfig, CliError> {
        if self.starts == 0 {
            return Err(CliError::Usage("--starts must be positive".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        Ok(SearchConfig {
            seed: self.seed,
            starts: self.starts,
            workers: self.workers,
            ..SearchConfig::default()
        })
    }

    pub fn factor(&self) -> Result<FactorConfig, CliError> {
        Ok(FactorConfig {
            search: self.search()?,
            max_steps: self.max_steps,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CPTP status, Kraus complement and certified candidate pairs.
    Check { input: PathBuf },
    /// Repeated division into elementary channels.
    Factor {
        #[arg(required_unless_present = "random")]
        input: Option<PathBuf>,
        /// Factor a seeded random channel of dimension N and Kraus rank R.
        #[arg(long, num_args = 2, value_names = ["N", "R"], conflicts_with = "input")]
        random: Option<Vec<usize>>,
        /// Also write the JSON trace here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Reload the serialized trace and check its recomposition.
        #[arg(long)]
        verify: bool,
    },
    /// Sign-domination test against the embedded-channel criterion.
    Classical {
        #[arg(required_unless_present = "trials")]
        input: Option<PathBuf>,
        /// Run a seeded batch of random matrices instead of reading a file.
        #[arg(long, conflicts_with = "input")]
        trials: Option<usize>,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Probability that an entry of a random matrix is zero.
        #[arg(long, default_value_t = 0.45)]
        zero_prob: f64,
    },
    /// Built-in worked examples.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        /// Completions sampled by example 2.
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Pairs sampled per completion by example 2.
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
    /// Print a seeded random channel as a Kraus document.
    Random { n: usize, r: usize },
}
