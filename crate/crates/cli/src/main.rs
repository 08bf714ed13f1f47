use clap::Parser;
use heavytraffic_cli::{configure_workers, execute, Command, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Heavy-traffic limit experiments for maxima of stable random walks.
///
/// Exit status: 0 when every pass flag holds, 1 when any fails, 2 on a
/// configuration error. Set HEAVYTRAFFIC_WORKERS to fix the thread count.
#[derive(Debug, Parser)]
#[command(name = "heavytraffic", version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Jump-evaluation budget for the whole command.
    #[arg(long = "max-steps")]
    max_steps: Option<u128>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let opts = RunOptions {
        command: args.command,
        config: args.config,
        out: args.out,
        seed: args.seed,
        svg: args.svg,
        max_steps: args.max_steps,
    };
    match execute(&opts) {
        Ok(report) => {
            for (flag, ok) in &report.manifest.pass {
                println!("{} {flag}", if *ok { "PASS" } else { "FAIL" });
            }
            println!("wrote {}", report.out_dir.display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
