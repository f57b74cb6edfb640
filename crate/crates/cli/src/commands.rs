//! The data products behind each subcommand, written to any `io::Write`.

use std::io::Write;
use std::path::Path;

use magrotor_core::boson::ModeId;
use magrotor_core::config::parse_kv;
use magrotor_core::hamiltonian::{
    expansion_coefficient_residuals, build_exact_hamiltonian, build_quadratic_hg, compute_frequencies, run_bosonization_pipeline,
    reference_entry_residuals, validity_report, ExactSpec, FrequencySet, Include, MagnetParams, PipelineOptions, HG_MODES,
};
use magrotor_core::rotor::Rep2Basis;
use magrotor_core::spectra::{
    bogoliubov_diagonalize, lowest_by_k_sector, reduced_model_comparison, LanczosOptions, ReducedComparison, ReducedModel,
};
use magrotor_core::trap::TrapParams;
use magrotor_core::HalfInt;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::suites::{self, Check};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid configuration, infeasible request.
    #[error("{0}")]
    Usage(String),
    /// A computation failed or a check did not pass.
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_kv(path: &Path) -> Result<std::collections::BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_kv(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Material and trap from config files, defaulting to cobalt (R = 10 nm) in
/// the reference Ioffe–Pritchard trap.
pub fn load_params(material: Option<&Path>, trap: Option<&Path>) -> Result<(MagnetParams, TrapParams), CliError> {
    let (m0, t0) = suites::reference_point();
    let m = match material {
        Some(p) => MagnetParams::from_config(&read_kv(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => m0,
    };
    let t = match trap {
        Some(p) => TrapParams::from_config(&read_kv(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => t0,
    };
    Ok((m, t))
}

// ---- frequencies ---------------------------------------------------------------

pub const FREQUENCY_COLUMNS: [&str; 17] = [
    "radius_m",
    "spin",
    "omega_l",
    "omega_i",
    "omega_d",
    "omega_t",
    "omega_z",
    "eta",
    "eta_prime",
    "delta",
    "eta_threshold",
    "omega_l_ge_omega_i",
    "hierarchy_holds",
    "non_gaussian_negligible",
    "lamb_dicke_ordered",
    "confining",
    "note",
];

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = hi / lo;
            let mut v: Vec<f64> = (0..n).map(|i| lo * ratio.powf(i as f64 / (n - 1) as f64)).collect();
            v[n - 1] = hi;
            v
        }
    }
}

fn frequency_row(magnet: &MagnetParams, trap: &TrapParams, radius: f64) -> Vec<String> {
    let m = MagnetParams { radius_m: radius, ..*magnet };
    let mut row = vec![fmt_f64(radius)];
    match compute_frequencies(&m, trap, None) {
        Ok(f) => {
            let v = validity_report(&f, Some(trap));
            row.push(f.spin.to_string());
            for x in [f.omega_l, f.omega_i, f.omega_d, f.omega_t, f.omega_z, f.eta, f.eta_prime, f.coupling("delta"), v.eta_threshold] {
                row.push(fmt_f64(x));
            }
            for b in [v.omega_l_ge_omega_i, v.hierarchy_holds, v.non_gaussian_negligible, v.lamb_dicke_ordered, true] {
                row.push(b.to_string());
            }
            row.push(String::new());
        }
        Err(e) => {
            let confining = trap.validate().is_ok();
            row.extend(std::iter::repeat_n(String::new(), 14));
            row.push(confining.to_string());
            row.push(e.to_string());
        }
    }
    row
}

/// One CSV row per radius, in input order; failing rows are flagged and kept.
pub fn frequencies_csv<W: Write>(magnet: &MagnetParams, trap: &TrapParams, radii: &[f64], out: W) -> Result<usize, CliError> {
    let rows: Vec<Vec<String>> = radii.par_iter().map(|&r| frequency_row(magnet, trap, r)).collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FREQUENCY_COLUMNS).map_err(failure)?;
    let mut flagged = 0;
    for row in &rows {
        if row[15] != "true" {
            flagged += 1;
        }
        w.write_record(row).map_err(failure)?;
    }
    w.flush()?;
    Ok(flagged)
}

// ---- validate --------------------------------------------------------------------

pub struct ValidateOptions {
    pub seed: u64,
    pub jmax: HalfInt,
    pub spins: Vec<HalfInt>,
    pub magnet: MagnetParams,
    pub trap: TrapParams,
}

pub fn run_suite(name: &str, o: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    Ok(match name {
        "algebra" => suites::algebra(o.seed),
        "commutators" => suites::commutators(o.jmax, &o.spins),
        "bosonization" => {
            let f = compute_frequencies(&o.magnet, &o.trap, None).map_err(usage)?;
            suites::bosonization(&f)
        }
        "field" => suites::field(&o.magnet, &o.trap, o.seed),
        other => return Err(usage(format!("unknown suite {other:?}; expected one of {:?}", suites::SUITES))),
    })
}

pub fn validate_report(names: &[String], o: &ValidateOptions) -> Result<Value, CliError> {
    let mut checks = Vec::new();
    for n in names {
        checks.extend(run_suite(n, o)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "validate",
        "seed": o.seed,
        "suites": names,
        "passed": passed,
        "failed": checks.iter().filter(|c| !c.passed).count(),
        "checks": checks,
    }))
}

// ---- bosonize ----------------------------------------------------------------------

pub fn bosonize_report(f: &FrequencySet, opts: &PipelineOptions) -> Result<Value, CliError> {
    let out = run_bosonization_pipeline(f, opts).map_err(failure)?;
    let modes = bogoliubov_diagonalize(&out.form).map_err(failure)?;
    let table: Vec<Value> = reference_entry_residuals(&out)
        .iter()
        .map(|r| json!({ "name": r.name, "expected": r.expected.to_string(), "found": r.found.to_string(), "matches": r.matches() }))
        .collect();
    let coefficients: Vec<Value> = expansion_coefficient_residuals(&out)
        .iter()
        .map(|r| json!({ "name": r.name, "expected": r.expected.to_string(), "found": r.found.to_string(), "matches": r.matches() }))
        .collect();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "bosonize",
        "options": opts,
        "frequencies": f.to_json(),
        "hamiltonian": out.hg.to_text(),
        "modes": HG_MODES.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "table": table,
        "expansion_coefficients": coefficients,
        "length_symbol_cancels": out.length_symbol_cancels,
        "ledger": out.ledger,
        "normal_modes": {
            "stability": modes.stability,
            "frequencies_rad_s": modes.frequencies,
        },
    }))
}

// ---- spectrum and compare ------------------------------------------------------------

/// Rough peak memory of a blocked exact solve: sparse matrix plus Krylov basis.
pub fn estimated_bytes(dim: usize) -> u64 {
    const NNZ_PER_ROW: u64 = 64;
    const ENTRY: u64 = 24;
    const KRYLOV: u64 = 120 * 16;
    dim as u64 * (NNZ_PER_ROW * ENTRY + KRYLOV)
}

fn check_feasible(dim: usize, max_memory_mb: u64) -> Result<(), CliError> {
    let need = estimated_bytes(dim);
    if need > max_memory_mb * 1024 * 1024 {
        return Err(usage(format!(
            "refusing a {dim}-dimensional solve: estimated {:.1} MiB exceeds the {max_memory_mb} MiB limit (raise --max-memory-mb)",
            need as f64 / (1024.0 * 1024.0)
        )));
    }
    Ok(())
}

pub struct CompareOptions {
    pub spins: Vec<HalfInt>,
    /// Absolute cutoff; otherwise `S + model.jmax_offset`.
    pub jmax: Option<HalfInt>,
    pub model: ReducedModel,
    pub lanczos: LanczosOptions,
    pub max_memory_mb: u64,
}

pub const COMPARE_COLUMNS: [&str; 11] = [
    "spin",
    "jmax",
    "dimension",
    "gap_index",
    "exact_gap",
    "predicted_gap",
    "label",
    "relative_error",
    "error_bound",
    "within_bound",
    "stable",
];

pub fn compare_runs(o: &CompareOptions) -> Result<Vec<ReducedComparison>, CliError> {
    for &s in &o.spins {
        if s < HalfInt::ONE {
            return Err(usage(format!("spin {s} is below 1")));
        }
        let jmax = o.jmax.unwrap_or(s + HalfInt::int(o.model.jmax_offset));
        if jmax < s || !jmax.same_parity(s) {
            return Err(usage(format!("Jmax = {jmax} must be ≥ S = {s} and differ from it by an integer")));
        }
        check_feasible(Rep2Basis::blocked_dimension(s, jmax, -s), o.max_memory_mb)?;
    }
    o.spins
        .iter()
        .map(|&s| {
            let model = match o.jmax {
                Some(j) => ReducedModel { jmax_offset: (j - s).to_int(), ..o.model },
                None => o.model,
            };
            reduced_model_comparison(s, &model, &o.lanczos).map_err(failure)
        })
        .collect()
}

pub fn compare_csv<W: Write>(runs: &[ReducedComparison], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS).map_err(failure)?;
    for r in runs {
        let bound = 3.0 / r.spin.value().sqrt();
        for (i, m) in r.comparison.matches.iter().enumerate() {
            let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
            let within = m.relative_error.is_some_and(|e| e <= bound);
            w.write_record([
                r.spin.to_string(),
                r.jmax.to_string(),
                r.dimension.to_string(),
                (i + 1).to_string(),
                fmt_f64(m.exact),
                opt(m.predicted),
                m.label.clone(),
                opt(m.relative_error),
                fmt_f64(bound),
                within.to_string(),
                r.stable.to_string(),
            ])
            .map_err(failure)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `(S, max relative error)` per run and whether the error falls with `S`.
pub fn error_trend(runs: &[ReducedComparison]) -> (Vec<(HalfInt, f64)>, bool) {
    let errs: Vec<(HalfInt, f64)> = runs.iter().map(|r| (r.spin, r.comparison.max_relative_error)).collect();
    let mut sorted = errs.clone();
    sorted.sort_by_key(|e| e.0);
    let decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);
    (errs, decreasing)
}

pub struct SpectrumOptions {
    pub spin: HalfInt,
    pub jmax: HalfInt,
    pub fock_levels: usize,
    pub count: usize,
    pub k_window: i32,
    pub lanczos: LanczosOptions,
    pub max_memory_mb: u64,
}

/// Lowest exact levels of the `mJ = −S` block near the polarized `K` sector,
/// next to the normal modes of the quadratic Hamiltonian.
pub fn spectrum_report(f: &FrequencySet, o: &SpectrumOptions) -> Result<Value, CliError> {
    let s = o.spin;
    if o.jmax < s || !o.jmax.same_parity(s) {
        return Err(usage(format!("Jmax = {} must be ≥ S = {s} and differ from it by an integer", o.jmax)));
    }
    if o.fock_levels == 0 || o.count == 0 {
        return Err(usage("--fock-cutoff and --count must be positive"));
    }
    let dim = Rep2Basis::blocked_dimension(s, o.jmax, -s) * o.fock_levels.pow(3);
    check_feasible(dim, o.max_memory_mb)?;
    let with_cm = o.fock_levels > 1;
    let spec = ExactSpec {
        jmax: o.jmax,
        mj_block: Some(-s),
        k_sector: None,
        fock_levels: [o.fock_levels; 3],
        lamb_dicke_order: u32::from(with_cm),
        include: Include { vp: with_cm, ..Include::ALL },
    };
    let exact = build_exact_hamiltonian(f, &spec).map_err(failure)?;
    let k_ref = s - f.j_ref;
    let sectors: Vec<HalfInt> = (-o.k_window..=o.k_window).map(|d| k_ref + HalfInt::int(d)).collect();
    let levels = lowest_by_k_sector(&exact, &sectors, o.count, &o.lanczos).map_err(failure)?;
    let mut merged: Vec<f64> = levels.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    merged.sort_by(f64::total_cmp);
    merged.truncate(o.count);
    let keep: Vec<ModeId> = if with_cm { HG_MODES.to_vec() } else { vec![ModeId::S, ModeId::K, ModeId::M] };
    let form = build_quadratic_hg(f).restrict(&keep).map_err(failure)?;
    let modes = bogoliubov_diagonalize(&form).map_err(failure)?;
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "command": "spectrum",
        "spin": s,
        "jmax": o.jmax,
        "fock_levels": o.fock_levels,
        "dimension": exact.dim(),
        "lanczos": o.lanczos,
        "sectors": levels.iter().map(|(k, v)| json!({ "k": k, "levels": v })).collect::<Vec<_>>(),
        "lowest_levels": merged,
        "gaps": merged.iter().map(|e| e - merged[0]).collect::<Vec<_>>(),
        "normal_modes": {
            "modes": keep.iter().map(|m| m.name()).collect::<Vec<_>>(),
            "stability": modes.stability,
            "frequencies": modes.frequencies,
            "vacuum_energy": modes.vacuum_energy,
        },
    }))
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
