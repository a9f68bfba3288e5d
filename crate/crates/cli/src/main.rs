use std::process::ExitCode;

use chatelet_core::chatelet::classify_cubic;
use chatelet_core::chi::{classify_confirmed, classify_cubic_confirmed, SearchGrid};
use chatelet_core::global::{classify_all_places_with, GlobalOptions};
use chatelet_core::hilbert::{hilbert, hilbert_oracle};
use chatelet_core::padic::{check_precision, check_prime, default_precision, parse_rational};
use chatelet_core::verify::{run_suite, Suite, VerifyConfig};
use chatelet_core::{classify_pair, Cubic, Error, Outcome, PAdic};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

mod render;

use render::Format;

const EXIT_OUT_OF_SCOPE: u8 = 3;
const EXIT_INPUT: u8 = 2;
const EXIT_FAILURE: u8 = 1;

/// Degree-zero Chow groups of Châtelet surfaces y^2 - d z^2 = f(x) over Q_p.
#[derive(Parser, Debug)]
#[command(name = "chatelet", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Human, global = true)]
    format: FormatArg,

    /// p-adic digits carried by every input (default: 24 for p = 2, 12 otherwise).
    #[arg(long, env = "CHATELET_PRECISION", global = true)]
    precision: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Human,
    Json,
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    /// Valuation window [-m, m] of the witness grid.
    #[arg(long, default_value_t = SearchGrid::DEFAULT_WINDOW)]
    window: u32,
    /// Unit residues are taken modulo p^k (default 5 for p = 2, 2 otherwise).
    #[arg(long)]
    depth: Option<u32>,
    /// At most this many unit residues per valuation.
    #[arg(long, default_value_t = SearchGrid::DEFAULT_MAX_UNITS)]
    max_units: u64,
}

impl GridArgs {
    fn grid(&self, p: u64) -> SearchGrid {
        let mut g = SearchGrid::with_window(p, self.window);
        g.max_units = self.max_units;
        if let Some(k) = self.depth {
            g.depth = k;
        }
        g
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify A_0(X)_0 for y^2 - d z^2 = x(x^2 - e) or y^2 - d z^2 = f(x).
    Classify {
        #[arg(short)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "cubic", required_unless_present = "cubic")]
        e: Option<String>,
        /// Coefficients a,b,c of the monic cubic x^3 + a x^2 + b x + c.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        cubic: Option<Vec<String>>,
        /// Attach a chi witness to Z/2Z answers.
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// The Hilbert symbol (a, b)_p.
    #[command(allow_negative_numbers = true)]
    Hilbert {
        #[arg(short)]
        p: u64,
        a: String,
        b: String,
        /// Also decide the symbol by conic search and report the certificate.
        #[arg(long)]
        oracle: bool,
    },
    /// Search for x in M with chi(x) = (1, 1).
    Witness {
        #[arg(short)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Local groups at every place of Q for rational d, e.
    Global {
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, allow_hyphen_values = true)]
        e: String,
    },
    /// Run the built-in consistency suites.
    Verify {
        /// Run only this suite.
        #[arg(long)]
        suite: Option<String>,
        /// Restrict prime sweeps to these primes.
        #[arg(long = "p", short = 'p')]
        primes: Vec<u64>,
        /// Valuation window of the witness grid.
        #[arg(long)]
        grid: Option<u32>,
    },
}

/// Failure of a command, mapped onto the exit-code contract.
enum Failure {
    Input(String),
    Internal(String),
    OutOfScope(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Inconsistency(_) | Error::Inconclusive(_) => Failure::Internal(e.to_string()),
            Error::RationalSquare => Failure::OutOfScope(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CmdResult = Result<u8, Failure>;

struct Ctx {
    format: Format,
    precision: Option<u32>,
}

impl Ctx {
    fn precision_for(&self, p: u64) -> Result<u32, Error> {
        match self.precision {
            Some(n) => {
                check_precision(p, n)?;
                Ok(n)
            }
            None => Ok(default_precision(p)),
        }
    }

    fn local(&self, p: u64, s: &str) -> Result<PAdic, Error> {
        check_prime(p)?;
        let q = parse_rational(s)?;
        PAdic::from_rational(p, &q, self.precision_for(p)?)
    }
}

fn outcome_code(o: Outcome) -> u8 {
    if o == Outcome::OutOfScope {
        EXIT_OUT_OF_SCOPE
    } else {
        0
    }
}

fn cmd_classify(
    ctx: &Ctx,
    p: u64,
    d: &str,
    e: Option<&str>,
    cubic: Option<&[String]>,
    witness: bool,
    grid: &GridArgs,
) -> CmdResult {
    let dp = ctx.local(p, d)?;
    if dp.is_zero() {
        return Err(Failure::Input("d must be nonzero".into()));
    }
    let result = match (e, cubic) {
        (Some(e), _) => {
            let ep = ctx.local(p, e)?;
            if ep.is_zero() {
                return Err(Failure::Input("e must be nonzero".into()));
            }
            if witness {
                classify_confirmed(&dp, &ep, &grid.grid(p))?
            } else {
                classify_pair(&dp, &ep)?
            }
        }
        (None, Some(coeffs)) => {
            let parsed: Vec<BigRational> = coeffs
                .iter()
                .map(|c| parse_rational(c))
                .collect::<Result<_, _>>()?;
            let arr: [BigRational; 3] = parsed
                .try_into()
                .map_err(|_| Failure::Input("--cubic takes three coefficients".into()))?;
            let f = Cubic::from_rationals(p, &arr, ctx.precision_for(p)?)?;
            if witness {
                classify_cubic_confirmed(&dp, &f, &grid.grid(p))?
            } else {
                classify_cubic(&dp, &f)?
            }
        }
        (None, None) => return Err(Failure::Input("one of --e or --cubic is required".into())),
    };
    render::classification(ctx.format, &result);
    Ok(outcome_code(result.outcome))
}

fn cmd_hilbert(ctx: &Ctx, p: u64, a: &str, b: &str, oracle: bool) -> CmdResult {
    let (x, y) = (ctx.local(p, a)?, ctx.local(p, b)?);
    let (value, route) = hilbert(&x, &y)?;
    let cert = if oracle {
        let c = hilbert_oracle(&x, &y)?;
        if c.value != value {
            return Err(Failure::Internal(format!(
                "formula gives {value}, conic search gives {}",
                c.value
            )));
        }
        Some(c)
    } else {
        None
    };
    render::hilbert(ctx.format, p, a, b, value, route, cert.as_ref());
    Ok(0)
}

fn cmd_witness(ctx: &Ctx, p: u64, d: &str, e: &str, grid: &GridArgs) -> CmdResult {
    let (dp, ep) = (ctx.local(p, d)?, ctx.local(p, e)?);
    if dp.is_zero() || ep.is_zero() {
        return Err(Failure::Input("d and e must be nonzero".into()));
    }
    let result = classify_confirmed(&dp, &ep, &grid.grid(p))?;
    render::witness(ctx.format, &result);
    Ok(outcome_code(result.outcome))
}

fn cmd_global(ctx: &Ctx, d: &str, e: &str) -> CmdResult {
    let (dq, eq) = (parse_rational(d)?, parse_rational(e)?);
    let opts = GlobalOptions {
        precision: ctx.precision,
        confirm: true,
    };
    let report = classify_all_places_with(&dq, &eq, &opts)?;
    render::global(ctx.format, &report);
    Ok(0)
}

fn cmd_verify(ctx: &Ctx, suite: Option<&str>, primes: Vec<u64>, grid: Option<u32>) -> CmdResult {
    let suites = match suite {
        Some(s) => vec![s.parse::<Suite>().map_err(|_| {
            let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
            Failure::Input(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })?],
        None => Suite::ALL.to_vec(),
    };
    for &p in &primes {
        check_prime(p)?;
    }
    let cfg = VerifyConfig {
        primes: (!primes.is_empty()).then_some(primes),
        window: grid,
        ..VerifyConfig::default()
    };
    let reports: Vec<_> = suites.iter().map(|&s| run_suite(s, &cfg)).collect();
    render::verify(ctx.format, &reports);
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { EXIT_FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        format: match cli.format {
            FormatArg::Human => Format::Human,
            FormatArg::Json => Format::Json,
        },
        precision: cli.precision,
    };
    let r = match &cli.command {
        Command::Classify {
            p,
            d,
            e,
            cubic,
            witness,
            grid,
        } => cmd_classify(&ctx, *p, d, e.as_deref(), cubic.as_deref(), *witness, grid),
        Command::Hilbert { p, a, b, oracle } => cmd_hilbert(&ctx, *p, a, b, *oracle),
        Command::Witness { p, d, e, grid } => cmd_witness(&ctx, *p, d, e, grid),
        Command::Global { d, e } => cmd_global(&ctx, d, e),
        Command::Verify {
            suite,
            primes,
            grid,
        } => cmd_verify(&ctx, suite.as_deref(), primes.clone(), *grid),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::OutOfScope(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_OUT_OF_SCOPE)
        }
    }
}
