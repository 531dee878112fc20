use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use quatgenus_cli::kernel::{self, FormCommand};
use quatgenus_cli::selftest::{self, Suite};
use quatgenus_cli::{script, CliError, Outcome, OutputMode, RunConfig};

#[derive(Parser)]
#[command(
    name = "quatgenus",
    version,
    about = "Quadratic forms, quaternion algebras and field towers over the rationals"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Search bound for isotropic vectors and square-class witnesses.
    #[arg(long, global = true, default_value_t = 200)]
    height: u64,
    /// Witness window: square-free c with |c| up to this bound.
    #[arg(long, global = true, default_value_t = 10)]
    window: u64,
    /// Maximum number of pushing rounds per iteration.
    #[arg(long, global = true, default_value_t = 3)]
    max_levels: usize,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    /// Shorthand for --output json.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for the randomized self-tests.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Hilbert symbol (a,b) at a place ("inf" or a prime).
    Symbol {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        place: String,
    },
    /// Diagonal quadratic forms given as comma-separated coefficients.
    Form {
        #[arg(value_enum)]
        action: FormAction,
        #[arg(allow_hyphen_values = true)]
        coefficients: String,
    },
    /// Quaternion algebras given as "a,b".
    #[command(subcommand)]
    Quat(QuatCommand),
    /// Field-tower construction scripts.
    #[command(subcommand)]
    Tower(TowerCommand),
    /// Seeded property suites.
    Selftest {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormAction {
    Analyze,
    Isotropic,
    Witt,
}

#[derive(Subcommand)]
enum QuatCommand {
    /// Isomorphism, linkage and a distinguishing subfield.
    Compare {
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
    },
    /// Whether Q(sqrt c) embeds in the algebra.
    Embeds {
        #[arg(allow_hyphen_values = true)]
        algebra: String,
        #[arg(allow_hyphen_values = true)]
        class: String,
    },
    /// First quadratic subfield contained in exactly one of the algebras.
    Witness {
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
    },
    /// Pairwise witness table for a family. Options go before the list.
    Genus {
        #[arg(allow_hyphen_values = true, required = true)]
        algebras: Vec<String>,
    },
}

#[derive(Subcommand)]
enum TowerCommand {
    /// Runs a JSON construction script.
    Run { script: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    ProductFormula,
    IsotropyOracle,
    LinkageQ,
    GenusQ,
    Certificates,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::ProductFormula => Suite::ProductFormula,
            SuiteArg::IsotropyOracle => Suite::IsotropyOracle,
            SuiteArg::LinkageQ => Suite::LinkageQ,
            SuiteArg::GenusQ => Suite::GenusQ,
            SuiteArg::Certificates => Suite::Certificates,
        }
    }
}

fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match command {
        Command::Symbol { a, b, place } => kernel::symbol(&a, &b, &place),
        Command::Form {
            action,
            coefficients,
        } => {
            let cmd = match action {
                FormAction::Analyze => FormCommand::Analyze,
                FormAction::Isotropic => FormCommand::Isotropic,
                FormAction::Witt => FormCommand::Witt,
            };
            kernel::form(cmd, &coefficients, cfg)
        }
        Command::Quat(q) => match q {
            QuatCommand::Compare { first, second } => kernel::quat_compare(&first, &second, cfg),
            QuatCommand::Embeds { algebra, class } => kernel::quat_embeds(&algebra, &class),
            QuatCommand::Witness { first, second } => kernel::quat_witness(&first, &second, cfg),
            QuatCommand::Genus { algebras } => kernel::quat_genus(&algebras, cfg),
        },
        Command::Tower(TowerCommand::Run { script: path }) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            script::run_text(&text, cfg)
        }
        Command::Selftest { suite, trials } => Ok(selftest::selftest(suite.into(), trials, cfg)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.config;
    let output = match (c.json, c.output) {
        (true, _) | (_, Output::Json) => OutputMode::Json,
        _ => OutputMode::Text,
    };
    let cfg = RunConfig {
        height_bound: c.height,
        witness_window: c.window,
        max_levels: c.max_levels,
        output,
        seed: c.seed,
    };
    let code = match execute(cli.command, &cfg) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            // A closed pipe is not an error worth reporting.
            let _ = out.write_all(outcome.render(output).as_bytes());
            outcome.exit.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit().code()
        }
    };
    ExitCode::from(code as u8)
}
