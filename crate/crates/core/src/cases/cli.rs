//! Command-line driver: `run`, `mesh-only`, `verify` and `list-cases`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::{builtin_case, builtin_cases, mesh_document, run_case, verify_trace, CaseConfig, CaseError, FieldOutput, RunOptions};

/// Exit status when a verification comparison misses its tolerance.
pub const EXIT_VERIFY_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "isodelam", version, about = "Isogeometric cohesive-zone delamination analysis")]
pub struct Cli {
    /// Worker threads for element assembly (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CaseSelection {
    /// Built-in case name (see `list-cases`).
    pub case: Option<String>,
    /// Case configuration file (TOML); replaces the built-in name.
    #[arg(long, value_name = "PATH", conflicts_with = "case")]
    pub config: Option<PathBuf>,
    /// Output directory (default: out/<case name>).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveFlags {
    /// Override the maximum number of increments.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Recorded in the manifest; the solve itself uses no random numbers.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and solve a case; writes the trace, fields and a run manifest.
    Run {
        #[command(flatten)]
        sel: CaseSelection,
        #[command(flatten)]
        solve: SolveFlags,
        #[arg(long, value_enum)]
        write_fields: Option<FieldOutput>,
    },
    /// Export the five-block mesh file without solving.
    MeshOnly {
        #[command(flatten)]
        sel: CaseSelection,
    },
    /// Solve and compare against the analytic reference (mmb, dcb3d).
    /// Without a case, both built-in reference cases are checked.
    Verify {
        #[command(flatten)]
        sel: CaseSelection,
        #[command(flatten)]
        solve: SolveFlags,
        /// Relative tolerance replacing the default load tolerance.
        #[arg(long, value_name = "REL")]
        verify_tol: Option<f64>,
    },
    /// List the built-in cases.
    ListCases,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    category: &'a str,
    message: String,
    exit_code: i32,
}

fn load(sel: &CaseSelection) -> Result<(CaseConfig, String), CaseError> {
    match (&sel.config, &sel.case) {
        (Some(path), _) => CaseConfig::load(path),
        (None, Some(name)) => builtin_case(name).map(|(c, t)| (c, t.to_string())),
        (None, None) => Err(CaseError::Config("give a built-in case name or --config PATH".into())),
    }
}

fn out_dir(sel: &CaseSelection, cfg: &CaseConfig) -> PathBuf {
    sel.out.clone().unwrap_or_else(|| Path::new("out").join(&cfg.case.name))
}

fn write_file(path: &Path, text: &str) -> Result<(), CaseError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CaseError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CaseError::io(path, e))
}

fn verify_one(
    cfg: &CaseConfig,
    text: &str,
    dir: PathBuf,
    solve: &SolveFlags,
    tol: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<bool, CaseError> {
    let opts = RunOptions { out_dir: dir.clone(), steps: solve.steps, write_fields: Some(FieldOutput::None), seed: solve.seed };
    let run = run_case(cfg, text, &opts)?;
    let (report, oracle) = verify_trace(cfg, &run.trace, tol)?;
    write_file(&dir.join("oracle.csv"), &oracle.to_csv())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CaseError::Config(e.to_string()))?;
    write_file(&dir.join("verification.json"), &(json + "\n"))?;
    let _ = writeln!(stdout, "{}\n{}", report.case, report.to_table());
    Ok(report.passed())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CaseError> {
    if let Some(n) = cli.threads {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::ListCases => {
            for (name, _) in builtin_cases() {
                let (cfg, _) = builtin_case(name)?;
                let _ = writeln!(stdout, "{name:<20} {:<8} {}", cfg.geometry.kind(), cfg.case.description);
            }
            Ok(0)
        }
        Command::MeshOnly { sel } => {
            let (cfg, _) = load(&sel)?;
            let path = out_dir(&sel, &cfg).join(&cfg.output.mesh_file);
            write_file(&path, &mesh_document(&cfg)?)?;
            let _ = writeln!(stdout, "{}", path.display());
            Ok(0)
        }
        Command::Run { sel, solve, write_fields } => {
            let (cfg, text) = load(&sel)?;
            let opts = RunOptions { out_dir: out_dir(&sel, &cfg), steps: solve.steps, write_fields, seed: solve.seed };
            let run = run_case(&cfg, &text, &opts)?;
            let m = &run.manifest;
            let _ = writeln!(
                stdout,
                "{}: {} increments, peak load {:.4} N, dissipated {:.4} N*mm, {:.1} s\n{}",
                m.case,
                m.increments,
                m.peak_load_n,
                m.final_dissipated_nmm,
                m.wall_time_s,
                run.trace_path.display()
            );
            Ok(0)
        }
        Command::Verify { sel, solve, verify_tol } => {
            let mut passed = true;
            if sel.case.is_none() && sel.config.is_none() {
                let root = sel.out.clone().unwrap_or_else(|| PathBuf::from("out"));
                for name in ["dcb3d", "mmb"] {
                    let (cfg, text) = builtin_case(name)?;
                    passed &= verify_one(&cfg, text, root.join(name), &solve, verify_tol, stdout)?;
                }
            } else {
                let (cfg, text) = load(&sel)?;
                let dir = out_dir(&sel, &cfg);
                passed = verify_one(&cfg, &text, dir, &solve, verify_tol, stdout)?;
            }
            Ok(if passed { 0 } else { EXIT_VERIFY_FAILED })
        }
    }
}

/// Parses `args` (program name first) and runs the command. Errors are
/// printed to `stderr` as one JSON object carrying the category; the
/// returned value is the process exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CaseError::Config(String::new()).exit_code() } else { 0 };
            if code == 0 {
                let _ = write!(stdout, "{e}");
            } else {
                let report = ErrorReport { category: "config", message: e.to_string().trim_end().to_string(), exit_code: code };
                let _ = writeln!(stderr, "{}", serde_json::to_string(&report).unwrap_or_default());
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let report = ErrorReport { category: e.category(), message: e.to_string(), exit_code: e.exit_code() };
            let _ = writeln!(stderr, "{}", serde_json::to_string(&report).unwrap_or_default());
            e.exit_code()
        }
    }
}
