use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trotterbench::{output, run_to_dir, Command};

#[derive(Parser)]
#[command(name = "trotterbench", version, about = "Trotter product convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the assumption constants of a family
    Check(Args),
    /// Measure sup-norm convergence rates of both products
    Converge(Args),
    /// Verify the evolution-semigroup correspondence and lemma bounds
    Semigroup(Args),
    /// Scan the Beta-sum bound and evaluate the closed-form constants
    Bounds(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and table.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also print the JSON report on stdout
    #[arg(long)]
    stdout: bool,
    /// Accepted for compatibility; computation is sequential
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { trotterbench::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Converge(a) => (Command::Converge, a),
        Cmd::Semigroup(a) => (Command::Semigroup, a),
        Cmd::Bounds(a) => (Command::Bounds, a),
    };
    let _ = args.threads;
    match run_to_dir(command, &args.config, &args.out) {
        Ok(outcome) => {
            if args.stdout {
                print!("{}", output::to_json(&outcome.report));
            }
            eprintln!("trotterbench: wrote {} (exit {})", args.out.display(), outcome.exit_code);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("trotterbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
