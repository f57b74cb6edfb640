//! Physical frequencies, the exact truncated Hamiltonian, the quadratic
//! bosonic Hamiltonian and the symbolic bosonization pipeline.

mod exact;
mod pipeline;
mod quadratic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boson::{Sym, SymValues};
use crate::rotor::RotorError;
use crate::trap::{adiabatic_report, magnitude_expansion, AdiabaticReport, LambDickeParams, TrapError, TrapParams};
use crate::HalfInt;

pub use exact::{build_exact_hamiltonian, ExactHamiltonian, ExactSpec, Include, ProductState};
pub use pipeline::{
    expansion_coefficient_residuals, reference_v_jkm, run_bosonization_pipeline, reference_entry_residuals, v_jkm_monomials, LedgerEntry,
    PipelineOptions, PipelineOutput, TermResidual,
};
pub use quadratic::{
    build_quadratic_hg, quadratic_hg_polynomial, reference_couplings, QuadraticBosonForm, HG_MODES,
};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
/// Electron-like gyromagnetic ratio (rad s⁻¹ T⁻¹).
pub const DEFAULT_GAMMA: f64 = 1.761e11;
/// Cobalt atomic mass (kg).
pub const DEFAULT_ATOMIC_MASS: f64 = 9.786e-26;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    Trap(#[from] TrapError),
    #[error(transparent)]
    Rotor(#[from] RotorError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("inconsistent truncation: {0}")]
    Truncation(String),
    #[error("assembled operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("pipeline order too low: {0}")]
    OrderTooLow(String),
    #[error("quadratic form: {0}")]
    Form(String),
}

/// Material and size of the magnet (SI units).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnetParams {
    pub radius_m: f64,
    pub density_kg_m3: f64,
    pub spin_per_atom: f64,
    pub blocking_temperature_k: f64,
    pub gamma_rad_per_s_t: f64,
    pub atomic_mass_kg: f64,
}

impl MagnetParams {
    /// Cobalt (ρ = 8.9e3 kg/m³, S/N = 1.7, T_b = 30 K) of the given radius.
    pub fn cobalt(radius_m: f64) -> Self {
        MagnetParams {
            radius_m,
            density_kg_m3: 8.9e3,
            spin_per_atom: 1.7,
            blocking_temperature_k: 30.0,
            gamma_rad_per_s_t: DEFAULT_GAMMA,
            atomic_mass_kg: DEFAULT_ATOMIC_MASS,
        }
    }

    /// Keys `radius_m`, `density_kg_m3`, `spin_per_atom`, `T_b_K`, and the
    /// optional `gamma_rad_sT`, `atomic_mass_kg`.
    pub fn from_config(kv: &BTreeMap<String, String>) -> Result<Self, HamiltonianError> {
        let num = |k: &str| -> Result<Option<f64>, HamiltonianError> {
            kv.get(k)
                .map(|v| v.trim().parse::<f64>().map_err(|e| HamiltonianError::Parameter(format!("{k}: {e}"))))
                .transpose()
        };
        let need = |k: &str| num(k)?.ok_or_else(|| HamiltonianError::Parameter(format!("missing key {k}")));
        let m = MagnetParams {
            radius_m: need("radius_m")?,
            density_kg_m3: need("density_kg_m3")?,
            spin_per_atom: need("spin_per_atom")?,
            blocking_temperature_k: need("T_b_K")?,
            gamma_rad_per_s_t: num("gamma_rad_sT")?.unwrap_or(DEFAULT_GAMMA),
            atomic_mass_kg: num("atomic_mass_kg")?.unwrap_or(DEFAULT_ATOMIC_MASS),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let fields = [
            ("radius_m", self.radius_m),
            ("density_kg_m3", self.density_kg_m3),
            ("spin_per_atom", self.spin_per_atom),
            ("T_b_K", self.blocking_temperature_k),
            ("gamma_rad_sT", self.gamma_rad_per_s_t),
            ("atomic_mass_kg", self.atomic_mass_kg),
        ];
        for (k, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HamiltonianError::Parameter(format!("{k} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.density_kg_m3 * 4.0 / 3.0 * std::f64::consts::PI * self.radius_m.powi(3)
    }

    pub fn moment_of_inertia(&self) -> f64 {
        0.4 * self.mass() * self.radius_m * self.radius_m
    }

    pub fn atom_count(&self) -> f64 {
        self.mass() / self.atomic_mass_kg
    }

    /// Macrospin `S = (S/N)·N`, rounded to the nearest half-integer.
    pub fn spin(&self) -> HalfInt {
        HalfInt::round_from(self.spin_per_atom * self.atom_count())
    }
}

/// Base frequencies, Lamb–Dicke data and the quadratic-Hamiltonian
/// coefficients (all frequencies in rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub spin: HalfInt,
    pub j_ref: HalfInt,
    pub omega_l: f64,
    pub omega_i: f64,
    pub omega_d: f64,
    pub omega_t: f64,
    pub omega_z: f64,
    pub eta: f64,
    pub eta_prime: f64,
    /// Transverse zero-point length `[ħ/(2 M_s ω_T)]^{1/2}` (m).
    pub z_pm: f64,
    /// Axial zero-point length (m).
    pub z_pm_z: f64,
    pub mass_kg: f64,
    /// Reference couplings keyed by name (`delta`, `omega_k`, …).
    pub couplings: BTreeMap<String, f64>,
}

impl FrequencySet {
    /// Builds the set from base frequencies; couplings follow the reference quadratic Hamiltonian.
    pub fn from_base(
        spin: HalfInt,
        j_ref: HalfInt,
        base: [f64; 5],
        eta: f64,
        eta_prime: f64,
        z_pm: [f64; 2],
        mass_kg: f64,
    ) -> Self {
        let [omega_l, omega_i, omega_d, omega_t, omega_z] = base;
        let mut f = FrequencySet {
            spin,
            j_ref,
            omega_l,
            omega_i,
            omega_d,
            omega_t,
            omega_z,
            eta,
            eta_prime,
            z_pm: z_pm[0],
            z_pm_z: z_pm[1],
            mass_kg,
            couplings: BTreeMap::new(),
        };
        let v = f.sym_values();
        f.couplings = reference_couplings().into_iter().map(|(k, c)| (k.to_string(), c.eval(&v).re)).collect();
        f
    }

    /// Reduced angular model: only `ω_I`, `ω_D`, `ω_L` (η = 0, no trap).
    pub fn reduced(spin: HalfInt, j_ref: HalfInt, omega_i: f64, omega_d: f64, omega_l: f64) -> Self {
        Self::from_base(spin, j_ref, [omega_l, omega_i, omega_d, 0.0, 0.0], 0.0, 0.0, [0.0, 0.0], 0.0)
    }

    pub fn coupling(&self, name: &str) -> f64 {
        self.couplings.get(name).copied().unwrap_or(f64::NAN)
    }

    /// Numeric values for every coefficient symbol.
    pub fn sym_values(&self) -> SymValues {
        SymValues::new()
            .with(Sym::WI, self.omega_i)
            .with(Sym::WD, self.omega_d)
            .with(Sym::WL, self.omega_l)
            .with(Sym::WT, self.omega_t)
            .with(Sym::WZ, self.omega_z)
            .with(Sym::S, self.spin.value())
            .with(Sym::J, self.j_ref.value())
            .with(Sym::Eta, self.eta)
            .with(Sym::EtaP, self.eta_prime)
            .with(Sym::Z, self.z_pm)
    }

    /// JSON object with units annotated.
    pub fn to_json(&self) -> serde_json::Value {
        let mut units = BTreeMap::new();
        for k in ["omega_l", "omega_i", "omega_d", "omega_t", "omega_z"] {
            units.insert(k.to_string(), "rad/s");
        }
        units.insert("couplings".into(), "rad/s");
        units.insert("z_pm".into(), "m");
        units.insert("z_pm_z".into(), "m");
        units.insert("mass_kg".into(), "kg");
        units.insert("eta".into(), "1");
        units.insert("eta_prime".into(), "1");
        units.insert("spin".into(), "hbar");
        units.insert("j_ref".into(), "hbar");
        serde_json::json!({ "values": self, "units": units })
    }
}

/// Frequencies for a magnet in an Ioffe–Pritchard trap.
pub fn compute_frequencies(m: &MagnetParams, trap: &TrapParams, j_ref: Option<HalfInt>) -> Result<FrequencySet, HamiltonianError> {
    m.validate()?;
    let expansion = magnitude_expansion(trap)?;
    let s = m.spin();
    if s < HalfInt::ONE {
        return Err(HamiltonianError::Parameter(format!("macrospin S = {s} is below 1")));
    }
    let j_ref = j_ref.unwrap_or(s);
    if j_ref < HalfInt::ONE {
        return Err(HamiltonianError::Parameter(format!("J_ref = {j_ref} is below 1")));
    }
    let sv = s.value();
    let mass = m.mass();
    let m_s = mass / sv;
    let hg = HBAR * m.gamma_rad_per_s_t;
    let omega_t = (hg * expansion.bbar_x / m_s).sqrt();
    let omega_z = (hg * expansion.bbar_z / m_s).sqrt();
    let omega_i = HBAR * sv / m.moment_of_inertia();
    let omega_d = K_B * m.blocking_temperature_k / (HBAR * sv);
    let omega_l = m.gamma_rad_per_s_t * trap.b0;
    let z_pm = (HBAR / (2.0 * m_s * omega_t)).sqrt();
    let z_pm_z = (HBAR / (2.0 * m_s * omega_z)).sqrt();
    let ld = LambDickeParams::new(trap, z_pm);
    Ok(FrequencySet::from_base(
        s,
        j_ref,
        [omega_l, omega_i, omega_d, omega_t, omega_z],
        ld.eta,
        ld.eta_prime,
        [z_pm, z_pm_z],
        mass,
    ))
}

/// "≫" is read as a factor of at least this much.
pub const MUCH_GREATER: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub omega_l_ge_omega_i: bool,
    pub omega_i_over_omega_d: f64,
    pub omega_i_over_omega_t: f64,
    pub omega_i_over_omega_z: f64,
    pub hierarchy_holds: bool,
    /// `ω_I/(2√(2S))`, the strongest non-quadratic term (rad/s).
    pub v_jkm_rad_s: f64,
    /// `min{ω_I/(ω_D√S), ω_I/(ω_T√S)}`.
    pub eta_threshold: f64,
    pub eta: f64,
    pub eta_margin: f64,
    pub non_gaussian_negligible: bool,
    pub lamb_dicke_ordered: bool,
    /// Ratios `⟨r²⟩B̄_ν/B0` of the harmonic-expansion condition.
    pub expansion_ratios: [f64; 3],
    pub adiabatic: Option<AdiabaticReport>,
    pub delta_rad_s: f64,
}

pub fn validity_report(f: &FrequencySet, trap: Option<&TrapParams>) -> ValidityReport {
    let root_s = f.spin.value().sqrt();
    let thr = (f.omega_i / (f.omega_d * root_s)).min(f.omega_i / (f.omega_t * root_s));
    let (ratios, adiabatic) = match trap.map(|t| (t, magnitude_expansion(t))) {
        Some((t, Ok(e))) => {
            let sv = f.spin.value();
            let (x2, z2) = (f.z_pm * f.z_pm / sv, f.z_pm_z * f.z_pm_z / sv);
            let r = [x2 * e.bbar_x / e.b0, x2 * e.bbar_y / e.b0, z2 * e.bbar_z / e.b0];
            (r, Some(adiabatic_report(t, x2.sqrt(), z2.sqrt())))
        }
        _ => ([f64::NAN; 3], None),
    };
    let rid = f.omega_i / f.omega_d;
    let rit = f.omega_i / f.omega_t;
    let riz = f.omega_i / f.omega_z;
    ValidityReport {
        omega_l_ge_omega_i: f.omega_l >= f.omega_i,
        omega_i_over_omega_d: rid,
        omega_i_over_omega_t: rit,
        omega_i_over_omega_z: riz,
        hierarchy_holds: f.omega_l >= f.omega_i && rid >= MUCH_GREATER && rit >= MUCH_GREATER && riz >= MUCH_GREATER,
        v_jkm_rad_s: f.omega_i / (2.0 * (2.0 * f.spin.value()).sqrt()),
        eta_threshold: thr,
        eta: f.eta,
        eta_margin: f.eta / thr,
        non_gaussian_negligible: f.eta > thr,
        lamb_dicke_ordered: f.eta_prime < f.eta && f.eta < 1.0,
        expansion_ratios: ratios,
        adiabatic,
        delta_rad_s: f.coupling("delta"),
    }
}
