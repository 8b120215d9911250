//! Command-line front end.
//!
//! Exit codes: 0 on success (including `--help`/`--version`), 1 for bad
//! arguments or failed computations (nothing is written), 2 when the run
//! completed but a checked bound was violated; the offending rows go to
//! stderr and the full table is still written.

mod commands;
pub mod config;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches};

pub use commands::Outcome;
pub use config::{command, parse_config_file, ExperimentConfig, COMMANDS};
pub use table::{Cell, Format, Table};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

fn cli() -> clap::Command {
    let global = [
        Arg::new("seed")
            .long("seed")
            .global(true)
            .value_parser(clap::value_parser!(u64))
            .help("RNG seed (default: $RWLAB_SEED, else 0)"),
        Arg::new("output").long("output").short('o').global(true).value_parser(clap::value_parser!(PathBuf)).help("write the table here instead of stdout"),
        Arg::new("format").long("format").global(true).value_parser(["csv", "json"]).default_value("csv"),
        Arg::new("threads").long("threads").global(true).value_parser(clap::value_parser!(usize)).help("worker threads for parallel sections"),
        Arg::new("config").long("config").global(true).value_parser(clap::value_parser!(PathBuf)).help("key = value file; flags override it"),
    ];
    let mut app = clap::Command::new("rwlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Experiments on long-range walks, rewired networks and random connection models")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .args(global);
    for c in COMMANDS {
        let mut sub = clap::Command::new(c.name).about(c.about);
        for p in c.params {
            let mut help = p.help.to_string();
            if let Some(d) = p.default {
                if !d.is_empty() {
                    help = format!("{help} [default: {d}]");
                }
            } else {
                help.push_str(" [required]");
            }
            if let config::Kind::Choice(options) = p.kind {
                help = format!("{help} ({})", options.join("|"));
            }
            sub = sub.arg(Arg::new(p.name).long(p.name).action(ArgAction::Set).allow_hyphen_values(true).help(help));
        }
        app = app.subcommand(sub);
    }
    app
}

fn config_from(matches: &ArgMatches) -> Result<ExperimentConfig> {
    let (name, sub) = matches.subcommand().ok_or_else(|| Error::invalid("missing subcommand"))?;
    let cmd = command(name).ok_or_else(|| Error::invalid(format!("unknown command '{name}'")))?;
    let file = match sub.get_one::<PathBuf>("config") {
        Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    let flags: Vec<(&'static str, String)> = cmd
        .params
        .iter()
        .filter_map(|p| sub.get_one::<String>(p.name).map(|v| (p.name, v.clone())))
        .collect();
    let seed = match sub.get_one::<u64>("seed") {
        Some(&s) => s,
        None => match std::env::var("RWLAB_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| Error::invalid(format!("RWLAB_SEED='{v}' is not a u64")))?,
            Err(_) => 0,
        },
    };
    let format = match sub.get_one::<String>("format").map(String::as_str) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    };
    let threads = sub.get_one::<usize>("threads").copied();
    if threads == Some(0) {
        return Err(Error::invalid("--threads must be positive"));
    }
    ExperimentConfig::resolve(cmd, &file, &flags, seed, sub.get_one::<PathBuf>("output").cloned(), format, threads)
}

/// Runs one configured experiment and renders the table with its preamble.
pub fn execute(cfg: &ExperimentConfig) -> Result<(String, Vec<String>)> {
    let outcome = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(|| commands::execute(cfg))?,
        None => commands::execute(cfg)?,
    };
    let mut table = Table::new(&[]);
    table.meta("tool", "rwlab");
    table.meta("version", env!("CARGO_PKG_VERSION"));
    table.meta("command", cfg.command);
    table.meta("seed", cfg.seed);
    for (k, v) in &cfg.params {
        table.meta(k, v.echo());
    }
    table.meta.extend(outcome.table.meta);
    table.columns = outcome.table.columns;
    table.rows = outcome.table.rows;
    Ok((table.render(cfg.format), outcome.violations))
}

/// Testable entry point: parses `args` (program name first), writes the
/// table to `--output` or `stdout` and diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let report = |stderr: &mut dyn Write, e: &dyn std::fmt::Display| {
        let _ = writeln!(stderr, "error: {e}");
        EXIT_ERROR
    };
    let cfg = match config_from(&matches) {
        Ok(c) => c,
        Err(e) => return report(stderr, &e),
    };
    let (text, violations) = match execute(&cfg) {
        Ok(r) => r,
        Err(e) => return report(stderr, &e),
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, &text),
        None => stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()),
    };
    if let Err(e) = written {
        return report(stderr, &e);
    }
    if violations.is_empty() {
        return EXIT_OK;
    }
    let _ = writeln!(stderr, "bound violated in {} row(s):", violations.len());
    for v in &violations {
        let _ = writeln!(stderr, "{v}");
    }
    EXIT_VIOLATION
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
