use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use turbhd::config::KEYS;
use turbhd::{header, run, validate, Diagnostic, RawConfig, RunError};

/// Thread-count override; unset means one worker per core.
const THREADS_VAR: &str = "TURBHD_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "turbhd",
    version,
    about = "Photocount, quadrature and Fock statistics of light detected through turbulent channels",
    after_help = "Any configuration key can be overridden with --section.key=value, e.g. --channel.sigma=0.5.\n\
                  Commands: pdtc-moments, counts, quad-dist, fock-dist, pfunc-grid, monitor-budget, uncertainty-scan."
)]
struct Cli {
    /// Command to run; overrides run.command.
    command: Option<String>,
    /// Configuration file with [section] headers and key = value lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output path, '-' for stdout; overrides run.output.
    #[arg(short, long)]
    output: Option<String>,
    /// Only validate the configuration.
    #[arg(long)]
    check: bool,
    /// Print every configuration key with its default and exit.
    #[arg(long)]
    list_keys: bool,
}

fn is_override(arg: &OsString) -> bool {
    arg.to_str()
        .and_then(|s| s.strip_prefix("--"))
        .map(|s| s.split('=').next().unwrap_or("").contains('.'))
        .unwrap_or(false)
}

fn fail(diags: &[Diagnostic]) -> ExitCode {
    eprintln!("{}", RunError::Config(diags.to_vec()));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let (overrides, rest): (Vec<OsString>, Vec<OsString>) = std::env::args_os().partition(is_override);
    let cli = Cli::parse_from(rest);

    if cli.list_keys {
        for k in KEYS {
            println!("{} = {}    # {}", k.key, k.default, k.help);
        }
        return ExitCode::SUCCESS;
    }

    if let Ok(v) = std::env::var(THREADS_VAR) {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("cannot configure thread pool: {e}");
                }
            }
            _ => return fail(&[Diagnostic::new(THREADS_VAR, format!("expected a positive integer, got '{v}'"))]),
        }
    }

    let mut raw = RawConfig::default();
    if let Some(path) = &cli.config {
        if let Err(d) = raw.merge_file(path) {
            return fail(&d);
        }
    }
    let mut diags = Vec::new();
    for o in &overrides {
        if let Err(d) = raw.apply_override(&o.to_string_lossy()) {
            diags.push(d);
        }
    }
    if let Some(c) = &cli.command {
        raw.set("run.command", c).expect("run.command is a known key");
    }
    if let Some(o) = &cli.output {
        raw.set("run.output", o).expect("run.output is a known key");
    }
    if !diags.is_empty() {
        return fail(&diags);
    }

    if cli.check {
        let diags = validate(&raw);
        return if diags.is_empty() {
            println!("configuration ok");
            ExitCode::SUCCESS
        } else {
            fail(&diags)
        };
    }

    let result = run(&raw).and_then(|(sc, table)| {
        let head = header(&sc, &raw);
        if sc.output == "-" {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(&head, &mut lock)?;
            lock.flush()?;
        } else {
            let file = std::fs::File::create(&sc.output)?;
            table.write(&head, file)?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
