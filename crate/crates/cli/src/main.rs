use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use exactgeom::report::{self, RunConfig};
use exactgeom::scroll;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "exactgeom", version, about = "Exact verification of lattice, incidence, elimination and scroll computations")]
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
    /// Run the selected checks and print a report.
    Verify {
        #[arg(long, conflicts_with = "range")]
        n: Option<usize>,
        /// Inclusive range such as 4..10.
        #[arg(long)]
        range: Option<String>,
        /// Glob over check ids.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        fail_fast: bool,
        /// Random scroll instances per n.
        #[arg(long, default_value_t = 100)]
        instances: usize,
        /// Smoothness sample points per root.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random quartic instance as JSON.
    EmitInstance {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the check catalogue.
    ListChecks,
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once("..")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::ListChecks => {
            let mut text = String::new();
            for d in report::list_checks() {
                let group = format!("{:?}", d.group).to_lowercase();
                text.push_str(&format!("{:<36} {group:<12} {}\n", d.id, d.anchor));
            }
            write_stdout(&text);
            ExitCode::SUCCESS
        }
        Command::EmitInstance { n, seed, out } => {
            if n < 4 {
                return usage(format!("n = {n} must be at least 4"));
            }
            match emit_instance(n, seed, &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
        Command::Verify {
            n,
            range,
            filter,
            seed,
            format,
            fail_fast,
            instances,
            samples,
            out,
        } => {
            let (lo, hi) = match (n, range) {
                (Some(n), None) => (n, n),
                (None, Some(r)) => match parse_range(&r) {
                    Some(p) => p,
                    None => return usage(format!("bad range {r:?}, expected A..B")),
                },
                (None, None) => return usage("one of --n or --range is required"),
                (Some(_), Some(_)) => unreachable!("clap rejects both"),
            };
            let mut cfg = RunConfig::new(lo, hi);
            cfg.filter = filter;
            cfg.seed = seed;
            cfg.fail_fast = fail_fast;
            cfg.instances = instances;
            cfg.samples = samples;
            if let Err(e) = cfg.validate() {
                return usage(e);
            }
            match verify(&cfg, format, out.as_deref()) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(EXIT_FAIL),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(EXIT_FAIL)
                }
            }
        }
    }
}

/// Writes to stdout, tolerating a closed pipe.
fn write_stdout(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn emit_instance(n: usize, seed: u64, out: &std::path::Path) -> anyhow::Result<()> {
    let inst = scroll::instance_from_seed(n, seed)?;
    let text = serde_json::to_string_pretty(&inst.to_json())?;
    std::fs::write(out, text + "\n").with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn verify(cfg: &RunConfig, format: Format, out: Option<&std::path::Path>) -> anyhow::Result<bool> {
    let rep = report::run(cfg)?;
    let text = match format {
        Format::Json => rep.to_json() + "\n",
        Format::Text => rep.to_text(),
    };
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => write_stdout(&text),
    }
    Ok(rep.ok())
}
