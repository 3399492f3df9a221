use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod render;

use commands::Report;

#[derive(Parser, Debug)]
#[command(name = "qws", version, about = "Exact q-difference Drinfeld-Sokolov reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct TypeArgs {
    /// Root system type, one of A, B, C, D, E, F, G.
    #[arg(long = "type")]
    pub kind: String,
    #[arg(long)]
    pub rank: usize,
}

impl TypeArgs {
    pub fn label(&self) -> String {
        format!("{}{}", self.kind.trim().to_ascii_uppercase(), self.rank)
    }
}

/// Inclusive mode window written as `lo..hi`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Modes {
    pub lo: i64,
    pub hi: i64,
}

fn parse_modes(s: &str) -> Result<Modes, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got {:?}", s))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo = a.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<i64>().map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("empty window {}..{}", lo, hi));
    }
    Ok(Modes { lo, hi })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cartan matrix, positive roots, Coxeter number, exponents, R_s and orbits.
    Rootsys(TypeArgs),

    /// Per-mode θ, both constructions of r₀ and the tangency residual.
    Rmatrix {
        #[command(flatten)]
        ty: TypeArgs,
        #[arg(long, value_parser = parse_modes, allow_hyphen_values = true,
              env = "QWS_WINDOW_DEFAULT", default_value = "-5..5")]
        modes: Modes,
    },

    /// Reduce a q-connection in M^s to companion form.
    GaugeFix {
        /// JSON matrix of Laurent series.
        #[arg(long)]
        input: PathBuf,
        /// Require the canonical form to be certified through this window.
        #[arg(long, value_parser = parse_modes, allow_hyphen_values = true)]
        modes: Option<Modes>,
        #[arg(long, value_enum, default_value_t = commands::Algorithm::Elimination)]
        algorithm: commands::Algorithm,
        /// Conductor of ζ in coefficient strings.
        #[arg(long, default_value_t = 1)]
        conductor: u32,
    },

    /// Canonical coefficients from the q-Miura transformation.
    Miura {
        #[arg(long)]
        n: Option<usize>,
        /// JSON array of Λ series; random data from --seed when absent.
        #[arg(long)]
        lambda: Option<PathBuf>,
        /// Cross-check against gauge fixing of the Λ matrix.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        conductor: u32,
    },

    /// Bracket coefficient c_{ps}(m) of the reduced structure, as a function of q.
    FrCoeff {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        s: usize,
        /// Mode; the symbol in t = q^m is printed when absent.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
    },

    /// Check the ω-sum collapsing identity over a window of modes.
    FractionCheck {
        #[arg(long)]
        n: usize,
        /// Single d; all of 0..n−1 when absent.
        #[arg(long)]
        d: Option<i64>,
        #[arg(long, value_parser = parse_modes, allow_hyphen_values = true,
              env = "QWS_WINDOW_DEFAULT", default_value = "-5..5")]
        modes: Modes,
    },

    /// Finite-lattice checks.
    Lattice {
        #[command(flatten)]
        ty: TypeArgs,
        /// Number of lattice sites.
        #[arg(long = "N")]
        sites: usize,
        #[arg(long, value_enum)]
        check: commands::LatticeCheck,
        /// JSON array of rational matrices; random from --seed when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Membership test for M^s.
    McellCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        conductor: u32,
    },

    /// Scalar q-difference operator of a companion matrix.
    ScalarOp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        conductor: u32,
    },

    /// Run every acceptance criterion.
    VerifyAll {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(command: Command) -> qws::Result<Report> {
    match command {
        Command::Rootsys(ty) => commands::rootsys(&ty),
        Command::Rmatrix { ty, modes } => commands::rmatrix(&ty, modes),
        Command::GaugeFix { input, modes, algorithm, conductor } => {
            commands::gauge_fix(&input, modes, algorithm, conductor)
        }
        Command::Miura { n, lambda, check, seed, conductor } => {
            commands::miura(n, lambda.as_deref(), check, seed, conductor)
        }
        Command::FrCoeff { n, p, s, m } => commands::fr_coeff(n, p, s, m),
        Command::FractionCheck { n, d, modes } => commands::fraction_check(n, d, modes),
        Command::Lattice { ty, sites, check, input, seed } => {
            commands::lattice(&ty, sites, check, input.as_deref(), seed)
        }
        Command::McellCheck { input, conductor } => commands::mcell_check(&input, conductor),
        Command::ScalarOp { input, conductor } => commands::scalar_op(&input, conductor),
        Command::VerifyAll { seed } => Ok(commands::verify_all(seed)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let report = match dispatch(cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report.value).expect("reports are valid JSON") + "\n",
        Format::Table => render::table(&report),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &text).map_err(qws::Error::from),
        None => {
            print!("{}", text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {}", e);
        return ExitCode::from(e.exit_code() as u8);
    }
    // Timing goes to stderr so that reports are byte-identical across runs.
    eprintln!("elapsed: {:.2?}", start.elapsed());
    if report.passed == Some(false) {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
