use std::process::ExitCode;

use clap::{Parser, Subcommand};
use intnum::verify::Suite;
use intnum_cli::commands::{self, parse_eps_grid, CliError, Report};

/// Exact intersection numbers of finite forcing notions, with certificates.
///
/// Exit status: 0 success, 1 a checked property fails, 2 parse or usage
/// error, 3 invalid input, 4 capability guard. FW_MAX_GROUND overrides the
/// ground-set cap.
#[derive(Parser)]
#[command(name = "intnum", version)]
struct Cli {
    /// Print one `key: value` block instead of prose.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// int(Q) with an optimal measure and a witness sequence.
    Int {
        /// POSET or FIELD document.
        file: String,
        /// Elements of Q, comma-separated; defaults to everything.
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<String>>,
        /// Also search sequences up to this length.
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Checks a FAMILY document for intersection-linkedness.
    Linked {
        file: String,
        family: String,
        /// Also read off an m-linked cover.
        #[arg(long)]
        cover: Option<usize>,
    },
    /// Builds Q_{s,eps} from a measure with the density property.
    Density {
        field: String,
        measure: String,
        /// Density family: set names, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<String>,
        #[arg(long, default_value = "1/4,1/2,3/4")]
        eps_grid: String,
    },
    /// Measures of the named sets of a field.
    Measure { field: String, measure: String },
    /// Runs a randomized property suite.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Tree forcing: growth constants, norms and conditions.
    Etree {
        #[command(subcommand)]
        command: Etree,
    },
}

#[derive(Subcommand)]
enum Etree {
    /// rho(h), pi(h), a(h), M(h).
    Consts { h: usize },
    /// Compares mu_h(n) with u/v; n may be written b^e or b^e-c.
    Norm {
        h: usize,
        n: String,
        threshold: String,
        /// PROFILE document; defaults to the fast-growing profile.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Checks n = M(1 - a^-mu(n)) over the counts of level h.
    Identity {
        h: usize,
        #[arg(long)]
        profile: Option<String>,
    },
    /// Whether a CONDITION document is a condition.
    Check { file: String },
    /// The loss of a condition.
    Loss { file: String },
    /// Lebesgue ratio of a condition against 1 - loss/2.
    Leb { file: String },
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Int { file, q, max_n } => commands::cmd_int(&file, q, max_n),
        Command::Linked { file, family, cover } => commands::cmd_linked(&file, &family, cover),
        Command::Density { field, measure, s, eps_grid } => {
            commands::cmd_density(&field, &measure, s, parse_eps_grid(&eps_grid)?)
        }
        Command::Measure { field, measure } => commands::cmd_measure(&field, &measure),
        Command::Verify { suite, seed, count } => Ok(commands::cmd_verify(suite, seed, count)),
        Command::Etree { command } => match command {
            Etree::Consts { h } => commands::cmd_consts(h),
            Etree::Norm { h, n, threshold, profile } => commands::cmd_norm(h, &n, &threshold, profile.as_deref()),
            Etree::Identity { h, profile } => commands::cmd_identity(h, profile.as_deref()),
            Etree::Check { file } => commands::cmd_check(&file),
            Etree::Loss { file } => commands::cmd_loss(&file),
            Etree::Leb { file } => commands::cmd_leb(&file),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let machine = cli.machine;
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render(machine));
            ExitCode::from(report.status)
        }
        Err(e) => {
            if machine {
                println!("error: {e}\nstatus: {}", e.code());
            }
            eprintln!("intnum: {e}");
            ExitCode::from(e.code())
        }
    }
}
