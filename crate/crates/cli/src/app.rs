//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use xychain::fidelity::EnergyConvention;

use crate::config::{RawConfig, SweepConfig};
use crate::error::{CliError, CliResult, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use crate::grid::Grid;
use crate::output::write_rows;
use crate::reproduce::{reproduce, Figure};
use crate::sweep::run_sweep;
use crate::verify::verify;

#[derive(Debug, Parser)]
#[command(
    name = "xychain",
    version,
    about = "Thermal fidelity of the transverse-field XY chain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a quantity over a parameter grid.
    Sweep(SweepArgs),
    /// Compare the closed forms with exact diagonalization.
    Verify(VerifyArgs),
    /// Write the data table and gnuplot script of a figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// fidelity, chi_field, xi_thermal, cv or z.
    #[arg(long)]
    pub quantity: Option<String>,
    /// Chain sizes: `50`, `50,100` or `start:stop:count`.
    #[arg(long)]
    pub n: Option<String>,
    /// Anisotropy grid (default 1).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Field grid: value, comma list or `start:stop:count[:log]`.
    #[arg(long)]
    pub g: Option<String>,
    /// Inverse-temperature grid: value, comma list or `start:stop:count[:log]`.
    #[arg(long)]
    pub beta: Option<String>,
    /// Comma-separated subset of exact, ppa, tla, ground, oracle.
    #[arg(long = "method")]
    pub method: Option<String>,
    /// Finite-difference step; forces the stencil where a closed form exists.
    #[arg(long)]
    pub step: Option<f64>,
    /// Field of the fidelity reference state (default: the row's g).
    #[arg(long)]
    pub ref_g: Option<f64>,
    /// Inverse temperature of the fidelity reference state (default: the row's beta).
    #[arg(long)]
    pub ref_beta: Option<f64>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest chain size; sizes 6, 8, ..., max-n are checked.
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
    /// Largest admissible residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Test hook: use bare single-particle energies in the fidelity.
    #[arg(long, hide = true)]
    pub corrupt_energy_convention: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Figure to reproduce.
    #[arg(value_enum)]
    pub figure: Figure,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl SweepArgs {
    fn raw(&self) -> RawConfig {
        let grid = |s: &Option<String>| s.clone().map(Grid::Spec);
        RawConfig {
            quantity: self.quantity.clone(),
            methods: self
                .method
                .as_ref()
                .map(|m| m.split(',').map(str::to_string).collect()),
            n: grid(&self.n),
            gamma: grid(&self.gamma),
            g: grid(&self.g),
            beta: grid(&self.beta),
            step: self.step,
            ref_g: self.ref_g,
            ref_beta: self.ref_beta,
            out: self.out.clone(),
            format: self.format.clone(),
            workers: self.workers,
        }
    }

    /// Merges the optional TOML file with the flags and validates the result.
    pub fn resolve(&self) -> CliResult<SweepConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::io(path.display().to_string(), e))?;
                RawConfig::from_toml(&text)?
            }
            None => RawConfig::default(),
        };
        SweepConfig::try_from(base.overridden_by(self.raw()))
    }
}

fn run_sweep_command(
    args: &SweepArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<u8> {
    let config = args.resolve()?;
    let rows = run_sweep(&config)?;
    match &config.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
            let mut w = BufWriter::new(file);
            write_rows(&config, &rows, &mut w)?;
            w.flush()
                .map_err(|e| CliError::io(path.display().to_string(), e))?;
        }
        None => write_rows(&config, &rows, &mut *stdout)?,
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    if failed > 0 {
        let _ = writeln!(
            stderr,
            "xychain: {failed} of {} rows failed; see the error column",
            rows.len()
        );
        return Ok(EXIT_NUMERIC);
    }
    Ok(EXIT_OK)
}

fn run_verify_command(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<u8> {
    let convention = if args.corrupt_energy_convention {
        EnergyConvention::Bare
    } else {
        EnergyConvention::Quasiparticle
    };
    if args.workers == Some(0) {
        return Err(CliError::usage("workers", "must be at least 1"));
    }
    let report =
        crate::sweep::with_workers(args.workers, || verify(args.max_n, args.tol, convention))??;
    let _ = write!(stdout, "{}", report.render());
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        Err(CliError::Verification(format!(
            "a residual exceeds the tolerance {:e}",
            args.tol
        )))
    }
}

fn run_reproduce_command(args: &ReproduceArgs, stdout: &mut dyn Write) -> CliResult<u8> {
    if args.workers == Some(0) {
        return Err(CliError::usage("workers", "must be at least 1"));
    }
    let (data, script) =
        crate::sweep::with_workers(args.workers, || reproduce(args.figure, &args.out_dir))??;
    let _ = writeln!(stdout, "{}", data.display());
    let _ = writeln!(stdout, "{}", script.display());
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Sweep(a) => run_sweep_command(a, stdout, stderr),
        Command::Verify(a) => run_verify_command(a, stdout),
        Command::Reproduce(a) => run_reproduce_command(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "xychain: {e}");
            let code = e.exit_code();
            debug_assert!(code == EXIT_USAGE || code == EXIT_NUMERIC || code == EXIT_VERIFY);
            code
        }
    }
}
