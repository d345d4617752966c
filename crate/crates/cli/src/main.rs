use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vcg_cli::{cmd_check, cmd_enumerate, cmd_run, CheckOptions, Enumerate};
use vcg_core::{Solver, TieBreakSeed};

#[derive(Parser)]
#[command(name = "vcg", version, about = "Exact VCG combinatorial auctions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one auction from a bid file
    Run {
        bids: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "dp")]
        solver: Solver,
        /// Output path; stdout when omitted or "-"
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the soundness checks over a fuzzed corpus
    Check {
        #[arg(long, default_value_t = 3)]
        max_goods: usize,
        #[arg(long, default_value_t = 3)]
        max_bidders: usize,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// List the partitions of a set of goods, or its allocations to bidders
    Enumerate {
        #[arg(long, value_delimiter = ',', required = true)]
        goods: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        bidders: Vec<u64>,
        #[arg(long, default_value = "allocations")]
        what: Enumerate,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = match cli.command {
        Command::Run {
            bids,
            seed,
            solver,
            output,
        } => {
            let output = output.filter(|p| p.as_os_str() != "-");
            cmd_run(
                &bids,
                TieBreakSeed(seed),
                solver,
                output.as_deref(),
                &mut out,
                &mut err,
            )
        }
        Command::Check {
            max_goods,
            max_bidders,
            instances,
            seed,
            json,
            inject_fault,
        } => cmd_check(
            &CheckOptions {
                max_goods,
                max_bidders,
                instances,
                seed,
                json,
                inject_fault,
            },
            &mut out,
            &mut err,
        ),
        Command::Enumerate {
            goods,
            bidders,
            what,
        } => cmd_enumerate(&goods, &bidders, what, &mut out, &mut err),
    };
    ExitCode::from(code as u8)
}
