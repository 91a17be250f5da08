mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact checks of inductive-confirmation rules over finite universes.
#[derive(Debug, Parser)]
#[command(name = "ravenlab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Universe size N.
    #[arg(long = "n", global = true)]
    pub n: Option<usize>,
    /// Measure spec, e.g. `uniform`, `carnap:l=2,g=uniform`,
    /// `maher:l=2,pi=1/2,pf=1/1000,pg=1/10`, `exch:seed=3`, `file:m.json`.
    #[arg(long, global = true, default_value = "uniform")]
    pub measure: String,
    /// Default seed for seeded measures and mixtures.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Nc,
    Pj,
    Ra,
    Xi,
    Thm1,
    Thm2,
    Thm4,
    Thm5,
    Prop1,
    Ex7,
}

#[derive(Debug, Args)]
pub struct MixtureArgs {
    /// Mixture file (JSON with alpha, beta, q and components).
    #[arg(long)]
    pub mixture: Option<PathBuf>,
    /// Smallest universe size; components are built from --measure.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Largest universe size.
    #[arg(long)]
    pub beta: Option<usize>,
    /// Size prior as `2=1/2,3=1/2`; uniform when omitted.
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print pr(A) or pr(A | B).
    Eval {
        prop: String,
        #[arg(long)]
        given: Option<String>,
        /// Object permutation as images of 1..N, e.g. `1,3,2`.
        #[arg(long)]
        permute: Option<String>,
        /// Also print the proposition with Exact(k) atoms expanded.
        #[arg(long)]
        expand: bool,
    },
    /// Evaluate one rule or guarded theorem.
    Check {
        rule: Rule,
        /// Background D (default T).
        #[arg(long, short = 'd')]
        given: Option<String>,
        #[arg(long, default_value_t = 1)]
        a: usize,
        #[arg(long, default_value_t = 2)]
        b: usize,
        /// Predicate for PJ.
        #[arg(long, default_value = "G")]
        psi: String,
        /// Strict PJ.
        #[arg(long)]
        strong: bool,
        /// Number of F-objects for thm4/thm5.
        #[arg(long)]
        k: Option<usize>,
        /// Evidence E for prop1.
        #[arg(long, default_value = "FG_1")]
        evidence: String,
        #[command(flatten)]
        mixture: MixtureArgs,
    },
    /// The observation × known-count matrix.
    Table1 {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        a: usize,
    },
    /// Run a parameter grid from a sweep spec.
    Sweep {
        /// Sweep spec file (JSON).
        #[arg(long, conflicts_with = "spec")]
        config: Option<PathBuf>,
        /// Inline sweep spec (JSON).
        #[arg(long)]
        spec: Option<String>,
    },
    /// Bracket the value of a parameter at which a flag flips.
    Bisect {
        /// lambda, pri, pf or pg.
        #[arg(long)]
        param: String,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
        /// nc, thm1, thm2-i, thm2-ii or below:<x>.
        #[arg(long, default_value = "nc")]
        predicate: String,
        #[arg(long, short = 'd')]
        given: Option<String>,
        #[arg(long, default_value_t = 1)]
        a: usize,
        /// Stop once the bracket is at most this wide (default 2^-20).
        #[arg(long)]
        width: Option<String>,
        /// Threshold to compare the bracket against.
        #[arg(long)]
        claim: Option<String>,
    },
    /// Probabilities and size posteriors over an unknown universe size.
    Mixture {
        /// Proposition over objects 1..alpha (default H).
        #[arg(default_value = "H")]
        prop: String,
        #[arg(long, short = 'd')]
        given: Option<String>,
        /// Evidence E for the size-posterior assumption check.
        #[arg(long)]
        evidence: Option<String>,
        #[command(flatten)]
        mixture: MixtureArgs,
    },
    /// Run the acceptance criteria (and optionally the random-trial harness).
    Selftest {
        /// Run only these criteria.
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
        /// Also run this many random trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Largest N for random trials.
        #[arg(long, default_value_t = 4)]
        trial_n_max: usize,
        /// Add a deliberately false property to the trials.
        #[arg(long)]
        plant_broken: bool,
    },
}

/// A command's rendered report and whether a guarded implication failed.
pub struct Report {
    pub body: String,
    pub violation: bool,
}

pub struct Failure(pub String);

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("RAVENLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Failure(format!("RAVENLAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli.global, &cli.command));
    let report = match result {
        Ok(r) => r,
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let mut body = report.body;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if report.violation {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
