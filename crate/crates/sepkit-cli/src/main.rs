//! `sepkit` — command-line driver.
//!
//! One instance file per invocation, or a directory of instances with
//! `--suite`. Reports go to stdout by default; `--out` writes them
//! atomically (temp file plus rename) instead. Exit codes: 0 the property
//! was verified, 1 the property is absent or nothing surfaced within the
//! budget, 2 the run failed.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use sepkit_cli::report::{Format, Outcome, Report};
use sepkit_cli::run::{execute, Command as RunCommand, RunOpts};
use sepkit_cli::schema;

#[derive(Parser)]
#[command(
    name = "sepkit",
    version,
    about = "Separation toolkit driver: instance files in, certificate reports out"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Seed override (defaults to the instance's [search] table, then 17).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search-budget override (defaults to the instance, then the command).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Scales every internal tolerance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,
    /// Treat the path as a directory and run every *.toml inside it.
    #[arg(long, global = true)]
    suite: bool,
    /// Write reports here (a file, or a directory under --suite) instead
    /// of stdout; writes are atomic per report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Measure compatibility constants of the declared norms and check
    /// their relations; counterexamples for non-monotone combiners.
    NormsCheck { path: PathBuf },
    /// Run the global separation pipeline and verify the certificate.
    Separate { path: PathBuf },
    /// Run the localized pipeline around `x_bar`.
    SeparateLocal { path: PathBuf },
    /// Run the localized pipeline on translated sets.
    SeparateShifted { path: PathBuf },
    /// Re-express a certificate through a named profile.
    Specialize {
        path: PathBuf,
        /// Profile label: EP, unified, eta_delta, or p_weighted.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Primal stationarity checkers, plus the dual certificate when the
    /// instance carries alpha, beta, and tau.
    Stationarity { path: PathBuf },
    /// Exact transversality constant, plus an adversarial scan at
    /// params.alpha when present.
    Transversality { path: PathBuf },
    /// Cross-check the equivalent formulations on one instance.
    EquivalenceSuite { path: PathBuf },
    /// Print the canonical form of an instance file (loading it
    /// reproduces the digest).
    Emit { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let (command, path, profile) = match &cli.command {
        Cmd::NormsCheck { path } => (RunCommand::NormsCheck, path, None),
        Cmd::Separate { path } => (RunCommand::Separate, path, None),
        Cmd::SeparateLocal { path } => (RunCommand::SeparateLocal, path, None),
        Cmd::SeparateShifted { path } => (RunCommand::SeparateShifted, path, None),
        Cmd::Specialize { path, profile } => (RunCommand::Specialize, path, profile.clone()),
        Cmd::Stationarity { path } => (RunCommand::Stationarity, path, None),
        Cmd::Transversality { path } => (RunCommand::Transversality, path, None),
        Cmd::EquivalenceSuite { path } => (RunCommand::EquivalenceSuite, path, None),
        Cmd::Emit { path } => {
            let inst = schema::load_path(path)?;
            print!("{}", inst.canonical()?);
            return Ok(ExitCode::SUCCESS);
        }
    };
    let opts = RunOpts {
        seed: cli.seed,
        budget: cli.budget,
        tol_scale: cli.tol_scale,
        profile,
    };

    if cli.suite {
        run_suite(command, path, &opts, cli.format, cli.out.as_deref())
    } else {
        let inst = schema::load_path(path)?;
        let report = execute(command, &inst, &opts);
        let text = report.render(cli.format);
        match &cli.out {
            Some(target) => write_atomic(target, text.as_bytes())
                .with_context(|| format!("writing {}", target.display()))?,
            None => print!("{text}"),
        }
        Ok(exit_code(report.outcome.exit_code()))
    }
}

/// Outcome of one suite entry, kept small for the aggregate listing.
#[derive(serde::Serialize)]
struct SuiteEntry {
    file: String,
    instance: String,
    outcome: Outcome,
    exit_code: i32,
    failed_checks: Vec<String>,
}

/// Aggregate over a directory: per-file outcomes plus a pass/fail matrix
/// keyed by residual-table row labels.
#[derive(serde::Serialize)]
struct SuiteReport {
    schema: u32,
    toolkit: String,
    command: String,
    entries: Vec<SuiteEntry>,
    matrix: BTreeMap<String, PassFail>,
    verified: usize,
    none_found: usize,
    errors: usize,
}

#[derive(Default, serde::Serialize)]
struct PassFail {
    pass: usize,
    fail: usize,
}

fn run_suite(
    command: RunCommand,
    dir: &Path,
    opts: &RunOpts,
    format: Format,
    out: Option<&Path>,
) -> Result<ExitCode> {
    if !dir.is_dir() {
        bail!("--suite expects a directory, got {}", dir.display());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no *.toml instances in {}", dir.display());
    }
    if let Some(target) = out {
        std::fs::create_dir_all(target)
            .with_context(|| format!("creating {}", target.display()))?;
    }

    let mut entries = Vec::new();
    let mut matrix: BTreeMap<String, PassFail> = BTreeMap::new();
    let mut worst = 0;
    let (mut verified, mut none_found, mut errors) = (0usize, 0usize, 0usize);
    for file in &files {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
        let report = match schema::load_path(file) {
            Ok(inst) => execute(command, &inst, opts),
            Err(err) => {
                // A file that fails to load still occupies a suite row.
                let mut r = Report::new(command.label(), stem, "-", 0, 0, 1.0);
                r.outcome = Outcome::Error;
                r.warn(format!("{err:#}"));
                r
            }
        };
        match report.outcome {
            Outcome::Verified => verified += 1,
            Outcome::NoneFound => none_found += 1,
            Outcome::Error => errors += 1,
        }
        for check in &report.checks {
            let cell = matrix.entry(check.key.clone()).or_default();
            if check.ok {
                cell.pass += 1;
            } else {
                cell.fail += 1;
            }
        }
        let code = report.outcome.exit_code();
        worst = worst.max(code);
        entries.push(SuiteEntry {
            file: stem.to_string(),
            instance: report.instance.clone(),
            outcome: report.outcome,
            exit_code: code,
            failed_checks: report
                .checks
                .iter()
                .filter(|c| !c.ok)
                .map(|c| c.key.clone())
                .collect(),
        });
        let text = report.render(format);
        match out {
            Some(target) => {
                let dest = target.join(format!("{stem}.report.json"));
                write_atomic(&dest, text.as_bytes())
                    .with_context(|| format!("writing {}", dest.display()))?;
            }
            None => print!("{text}"),
        }
    }

    let suite = SuiteReport {
        schema: 1,
        toolkit: format!("sepkit {}", env!("CARGO_PKG_VERSION")),
        command: command.label().to_string(),
        entries,
        matrix,
        verified,
        none_found,
        errors,
    };
    let summary = match format {
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(&suite).expect("suite serialization");
            s.push('\n');
            s
        }
        Format::Table => render_suite_table(&suite),
    };
    match out {
        Some(target) => {
            let dest = target.join("suite.json");
            write_atomic(&dest, summary.as_bytes())
                .with_context(|| format!("writing {}", dest.display()))?;
        }
        None => print!("{summary}"),
    }
    Ok(exit_code(worst))
}

fn render_suite_table(suite: &SuiteReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "{} :: suite of {} :: {} files", suite.toolkit, suite.command,
        suite.entries.len());
    let width = suite.entries.iter().map(|e| e.file.len()).max().unwrap_or(4).max(4);
    for e in &suite.entries {
        let label = match e.outcome {
            Outcome::Verified => "verified",
            Outcome::NoneFound => "none_found",
            Outcome::Error => "ERROR",
        };
        let _ = write!(out, "  {:<width$}  {label}", e.file);
        if e.failed_checks.is_empty() {
            let _ = writeln!(out);
        } else {
            let _ = writeln!(out, "  failed: {}", e.failed_checks.join(", "));
        }
    }
    let _ = writeln!(out, "\npass/fail matrix");
    let kwidth = suite.matrix.keys().map(String::len).max().unwrap_or(5).max(5);
    for (key, cell) in &suite.matrix {
        let _ = writeln!(out, "  {key:<kwidth$}  pass {:>3}  fail {:>3}", cell.pass, cell.fail);
    }
    let _ = writeln!(
        out,
        "\nverified {}  none_found {}  errors {}",
        suite.verified, suite.none_found, suite.errors
    );
    out
}

/// Writes bytes atomically: a temp file in the destination directory,
/// flushed, then renamed over the target.
fn write_atomic(target: &Path, bytes: &[u8]) -> Result<()> {
    let dir = target.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(parent) => parent.join(format!(
            ".{}.tmp",
            target.file_name().and_then(|s| s.to_str()).unwrap_or("report")
        )),
        None => PathBuf::from(format!(
            ".{}.tmp",
            target.file_name().and_then(|s| s.to_str()).unwrap_or("report")
        )),
    };
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, target)?;
    Ok(())
}

fn exit_code(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(2))
}
