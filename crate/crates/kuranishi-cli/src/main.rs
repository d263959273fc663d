use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kuranishi_cli::report::{explain, RunReport};
use kuranishi_cli::scenario::Task;
use kuranishi_cli::{exit, run_text, Failure, RunFlags, PAPER_EXAMPLE};

#[derive(Parser)]
#[command(name = "kuranishi", version, about = "Deformations of bundles and connections on curves, computed exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        /// Scenario file; optional for --task paper-example.
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        task: Option<Task>,
        /// Order K of the Kuranishi induction (default 4).
        #[arg(long)]
        order: Option<u32>,
        /// Fixed pole bound instead of the adaptive default.
        #[arg(long)]
        pole_bound: Option<i64>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Include the family matrices in Kuranishi reports.
        #[arg(long)]
        emit_family: bool,
    },
    /// Summarize a JSON report.
    Explain { report: PathBuf },
}

fn emit(rep: &RunReport, format: Format, path: &Option<PathBuf>) -> Result<(), std::io::Error> {
    let body = match format {
        Format::Json => rep.to_json() + "\n",
        Format::Text => rep.render_text(true),
    };
    match path {
        Some(p) => std::fs::write(p, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, task, order, pole_bound, report, format, emit_family } => {
            let text = match (&scenario, &task) {
                (Some(p), _) => match std::fs::read_to_string(p) {
                    Ok(t) => t,
                    Err(e) => {
                        eprintln!("error: cannot read {}: {e}", p.display());
                        return code(exit::IO);
                    }
                },
                (None, Some(Task::PaperExample)) => PAPER_EXAMPLE.to_string(),
                (None, _) => {
                    eprintln!("error: a scenario file is required unless --task paper-example");
                    return code(exit::USAGE);
                }
            };
            let flags = RunFlags { task, order, pole_bound, emit_family };
            let (rep, c) = match run_text(&text, &flags) {
                Ok(r) => (r, exit::OK),
                Err(Failure::Parse(e)) => {
                    let name = scenario.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<built-in>".into());
                    eprintln!("parse error: {name}:{e}");
                    return code(exit::PARSE);
                }
                Err(f) => {
                    let c = f.code();
                    let rep = f.report().cloned().expect("report for non-parse failures");
                    if let Some(e) = &rep.error {
                        eprintln!("error: {e}");
                    } else {
                        eprintln!("error: verification failed");
                    }
                    (rep, c)
                }
            };
            if let Err(e) = emit(&rep, format, &report) {
                eprintln!("error: cannot write report: {e}");
                return code(exit::IO);
            }
            code(c)
        }
        Command::Explain { report } => {
            let text = match std::fs::read_to_string(&report) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", report.display());
                    return code(exit::IO);
                }
            };
            match explain(&text) {
                Ok((s, warning)) => {
                    if let Some(w) = warning {
                        eprintln!("warning: {w}");
                    }
                    println!("{s}");
                    code(exit::OK)
                }
                Err(e) => {
                    eprintln!("parse error: {}: {e}", report.display());
                    code(exit::PARSE)
                }
            }
        }
    }
}
