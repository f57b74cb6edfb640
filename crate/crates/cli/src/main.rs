use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magrotor_cli::commands::*;
use magrotor_cli::suites::SUITES;
use magrotor_core::hamiltonian::{compute_frequencies, FrequencySet, PipelineOptions};
use magrotor_core::spectra::{LanczosOptions, ReducedModel};
use magrotor_core::HalfInt;

#[derive(Parser)]
#[command(name = "magrotor", version, about = "Quantum magnetic rotor in a magnetic trap: frequencies, bosonization, spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Material config (`key = value`); defaults to a 10 nm cobalt sphere.
    #[arg(long)]
    material: Option<PathBuf>,
    /// Trap config (`B0_T`, `Bp_T_per_m`, `Bpp_T_per_m2`); defaults to the reference trap.
    #[arg(long)]
    trap: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = LanczosOptions::default().seed)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Frequencies and validity flags over a log-spaced radius sweep (CSV).
    Frequencies {
        #[command(flatten)]
        common: Common,
        /// Smallest radius (m).
        #[arg(long, requires = "r_max")]
        r_min: Option<f64>,
        /// Largest radius (m).
        #[arg(long, requires = "r_min")]
        r_max: Option<f64>,
        /// Number of radii; 0 writes only the header.
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Run validation suites and write a JSON report; exit 1 if any check fails.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Suites to run (repeatable or comma separated); all by default.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Rotor cutoff for the commutator suite.
        #[arg(long, default_value = "8")]
        jmax: HalfInt,
        /// Spins for the commutator suite.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        spins: Vec<HalfInt>,
    },
    /// Run the bosonization pipeline at the configured parameters (JSON).
    Bosonize {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = PipelineOptions::default().lamb_dicke_order)]
        lamb_dicke_order: u32,
        #[arg(long, default_value_t = PipelineOptions::default().max_degree)]
        max_degree: u32,
    },
    /// Lowest exact levels next to the normal modes (JSON). Without
    /// `--material` the dimensionless reduced model is used.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Macrospin S of the model (overrides the material's).
        #[arg(long)]
        smax: HalfInt,
        /// Rotor cutoff; S + 6 by default.
        #[arg(long)]
        jmax: Option<HalfInt>,
        /// Fock levels per centre-of-mass mode; 1 drops the centre of mass.
        #[arg(long, default_value_t = 1)]
        fock_cutoff: usize,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4096)]
        max_memory_mb: u64,
    },
    /// Exact versus quadratic excitation gaps of the reduced model (CSV).
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        spins: Vec<HalfInt>,
        /// Absolute rotor cutoff; S + `--jmax-offset` by default.
        #[arg(long)]
        jmax: Option<HalfInt>,
        #[arg(long, default_value_t = ReducedModel::default().jmax_offset)]
        jmax_offset: i32,
        /// Number of gaps compared per spin.
        #[arg(long, default_value_t = ReducedModel::default().gaps)]
        count: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 4096)]
        max_memory_mb: u64,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = ReducedModel::default().omega_i, allow_negative_numbers = true)]
    omega_i: f64,
    #[arg(long, default_value_t = ReducedModel::default().omega_d, allow_negative_numbers = true)]
    omega_d: f64,
    #[arg(long, default_value_t = ReducedModel::default().omega_l, allow_negative_numbers = true)]
    omega_l: f64,
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MAGROTOR_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("MAGROTOR_THREADS={v:?} is not a count")))?;
        if n == 0 {
            return Err(CliError::Usage("MAGROTOR_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Failure(e.to_string()))?;
    }
    Ok(())
}

fn lanczos(seed: u64) -> LanczosOptions {
    LanczosOptions { seed, ..LanczosOptions::default() }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Frequencies { common, r_min, r_max, points } => {
            let (magnet, trap) = load_params(common.material.as_deref(), common.trap.as_deref())?;
            let radii = match (r_min, r_max) {
                (Some(lo), Some(hi)) => {
                    if !(lo > 0.0 && hi >= lo) {
                        return Err(CliError::Usage(format!("need 0 < r-min ≤ r-max, got {lo} and {hi}")));
                    }
                    log_space(lo, hi, points)
                }
                _ => vec![magnet.radius_m],
            };
            let flagged = frequencies_csv(&magnet, &trap, &radii, writer(common.out.as_deref())?)?;
            if flagged > 0 {
                eprintln!("{flagged} of {} rows flagged (see the note column)", radii.len());
            }
            Ok(())
        }
        Command::Validate { common, suite, jmax, spins } => {
            let (magnet, trap) = load_params(common.material.as_deref(), common.trap.as_deref())?;
            let names: Vec<String> = if suite.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { suite };
            let opts = ValidateOptions { seed: common.seed, jmax, spins, magnet, trap };
            let report = validate_report(&names, &opts)?;
            writer(common.out.as_deref())?.write_all(json_text(&report).as_bytes())?;
            let failed = report["failed"].as_u64().unwrap_or(0);
            if failed > 0 {
                return Err(CliError::Failure(format!("{failed} check(s) failed")));
            }
            Ok(())
        }
        Command::Bosonize { common, lamb_dicke_order, max_degree } => {
            let (magnet, trap) = load_params(common.material.as_deref(), common.trap.as_deref())?;
            let f = compute_frequencies(&magnet, &trap, None).map_err(|e| CliError::Usage(e.to_string()))?;
            let report = bosonize_report(&f, &PipelineOptions { lamb_dicke_order, max_degree })?;
            writer(common.out.as_deref())?.write_all(json_text(&report).as_bytes())?;
            Ok(())
        }
        Command::Spectrum { common, smax, jmax, fock_cutoff, count, model, max_memory_mb } => {
            let f = if common.material.is_some() || common.trap.is_some() {
                let (magnet, trap) = load_params(common.material.as_deref(), common.trap.as_deref())?;
                let g = compute_frequencies(&magnet, &trap, None).map_err(|e| CliError::Usage(e.to_string()))?;
                FrequencySet::from_base(
                    smax,
                    smax,
                    [g.omega_l, g.omega_i, g.omega_d, g.omega_t, g.omega_z],
                    g.eta,
                    g.eta_prime,
                    [g.z_pm, g.z_pm_z],
                    g.mass_kg,
                )
            } else {
                FrequencySet::reduced(smax, smax, model.omega_i, model.omega_d, model.omega_l)
            };
            let opts = SpectrumOptions {
                spin: smax,
                jmax: jmax.unwrap_or(smax + HalfInt::int(6)),
                fock_levels: fock_cutoff,
                count,
                k_window: 3,
                lanczos: lanczos(common.seed),
                max_memory_mb,
            };
            let report = spectrum_report(&f, &opts)?;
            writer(common.out.as_deref())?.write_all(json_text(&report).as_bytes())?;
            Ok(())
        }
        Command::Compare { common, spins, jmax, jmax_offset, count, model, max_memory_mb } => {
            if count == 0 || jmax_offset < 0 {
                return Err(CliError::Usage("--count must be positive and --jmax-offset non-negative".into()));
            }
            let opts = CompareOptions {
                spins,
                jmax,
                model: ReducedModel {
                    omega_i: model.omega_i,
                    omega_d: model.omega_d,
                    omega_l: model.omega_l,
                    jmax_offset,
                    gaps: count,
                    ..ReducedModel::default()
                },
                lanczos: lanczos(common.seed),
                max_memory_mb,
            };
            let runs = compare_runs(&opts)?;
            compare_csv(&runs, writer(common.out.as_deref())?)?;
            let (errs, decreasing) = error_trend(&runs);
            for (s, e) in errs {
                eprintln!("S = {s}: max relative error {e:.3e} (bound {:.3e})", 3.0 / s.value().sqrt());
            }
            eprintln!("error decreases with S: {decreasing}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
