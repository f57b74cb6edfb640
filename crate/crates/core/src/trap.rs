//! Ioffe–Pritchard trap field, its magnitude expansion, the bisector field
//! ñ(r) with its Taylor jet at the origin, and Lamb–Dicke parameters.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boson::{Sym, SymCoeff, SymValues};

#[derive(Debug, Error, PartialEq)]
pub enum TrapError {
    #[error("bias field B0 must be positive, got {0} T")]
    NonPositiveBias(f64),
    #[error("no transverse confinement: B'^2 - B0*B''/2 = {0} T^2/m^2 is not positive")]
    NoTransverseConfinement(f64),
    #[error("no axial confinement: B'' = {0} T/m^2 is not positive")]
    NoAxialConfinement(f64),
    #[error("bisector undefined where the field points along -z")]
    AntiAligned,
    #[error("derivative order {0} not supported (0, 1 or 2)")]
    UnsupportedOrder(u32),
    #[error("configuration: {0}")]
    Config(String),
}

/// Bias `b0` (T), gradient `bp` (T/m) and curvature `bpp` (T/m²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub b0: f64,
    pub bp: f64,
    pub bpp: f64,
}

impl TrapParams {
    pub fn new(b0: f64, bp: f64, bpp: f64) -> Self {
        TrapParams { b0, bp, bpp }
    }

    /// Reads `B0_T`, `Bp_T_per_m`, `Bpp_T_per_m2` from key-value pairs.
    pub fn from_config(kv: &BTreeMap<String, String>) -> Result<Self, TrapError> {
        let get = |k: &str| -> Result<f64, TrapError> {
            let v = kv.get(k).ok_or_else(|| TrapError::Config(format!("missing key {k}")))?;
            v.trim().parse::<f64>().map_err(|e| TrapError::Config(format!("{k}: {e}")))
        };
        Ok(TrapParams { b0: get("B0_T")?, bp: get("Bp_T_per_m")?, bpp: get("Bpp_T_per_m2")? })
    }

    /// Transverse curvature numerator `B′² − B0·B″/2`.
    pub fn transverse_numerator(&self) -> f64 {
        self.bp * self.bp - 0.5 * self.b0 * self.bpp
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        if self.b0 <= 0.0 || self.b0.is_nan() {
            return Err(TrapError::NonPositiveBias(self.b0));
        }
        if self.bpp <= 0.0 || self.bpp.is_nan() {
            return Err(TrapError::NoAxialConfinement(self.bpp));
        }
        let t = self.transverse_numerator();
        if t <= 0.0 || t.is_nan() {
            return Err(TrapError::NoTransverseConfinement(t));
        }
        Ok(())
    }

    /// Shortest field length scale `min(B0/B′, √(B0/B″))`.
    pub fn length_scale(&self) -> f64 {
        let a = if self.bp != 0.0 { (self.b0 / self.bp).abs() } else { f64::INFINITY };
        let b = if self.bpp != 0.0 { (self.b0 / self.bpp).abs().sqrt() } else { f64::INFINITY };
        a.min(b)
    }
}

/// The Ioffe–Pritchard field at `r` (metres), in tesla.
pub fn field_at(p: &TrapParams, r: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = r;
    [
        p.bp * x - 0.5 * p.bpp * x * z,
        -(p.bp * y + 0.5 * p.bpp * z * y),
        p.b0 + 0.5 * p.bpp * (z * z - 0.5 * (x * x + y * y)),
    ]
}

pub fn field_magnitude(p: &TrapParams, r: [f64; 3]) -> f64 {
    let b = field_at(p, r);
    (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt()
}

/// Harmonic expansion `|B| ≈ B0 + Σ_ν B̄_ν r_ν²/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeExpansion {
    pub b0: f64,
    pub bbar_x: f64,
    pub bbar_y: f64,
    pub bbar_z: f64,
}

impl MagnitudeExpansion {
    pub fn magnitude(&self, r: [f64; 3]) -> f64 {
        let [x, y, z] = r;
        self.b0 + 0.5 * (self.bbar_x * x * x + self.bbar_y * y * y + self.bbar_z * z * z)
    }
}

pub fn magnitude_expansion(p: &TrapParams) -> Result<MagnitudeExpansion, TrapError> {
    p.validate()?;
    let t = p.transverse_numerator() / p.b0;
    Ok(MagnitudeExpansion { b0: p.b0, bbar_x: t, bbar_y: t, bbar_z: p.bpp })
}

/// The two inequalities under which the particle sits at the trap centre and
/// the harmonic expansion holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticReport {
    pub axial_extent_m: f64,
    /// `√(B0/B″)`
    pub axial_bound_m: f64,
    pub transverse_extent_m: f64,
    /// `√(B0²/(B′² − B0B″))`; infinite when the denominator is not positive.
    pub transverse_bound_m: f64,
    /// The simplified `B0/B′` form of the transverse bound.
    pub transverse_bound_simplified_m: f64,
    pub axial_ratio: f64,
    pub transverse_ratio: f64,
}

/// Compares the zero-point extents (metres) against both bounds.
pub fn adiabatic_report(p: &TrapParams, transverse_extent: f64, axial_extent: f64) -> AdiabaticReport {
    let axial_bound = (p.b0 / p.bpp).sqrt();
    let den = p.bp * p.bp - p.b0 * p.bpp;
    let transverse_bound = if den > 0.0 { (p.b0 * p.b0 / den).sqrt() } else { f64::INFINITY };
    AdiabaticReport {
        axial_extent_m: axial_extent,
        axial_bound_m: axial_bound,
        transverse_extent_m: transverse_extent,
        transverse_bound_m: transverse_bound,
        transverse_bound_simplified_m: (p.b0 / p.bp).abs(),
        axial_ratio: axial_extent / axial_bound,
        transverse_ratio: transverse_extent / transverse_bound,
    }
}

/// Unit bisector of `e_z` and `B̂(r)`.
pub fn n_tilde(p: &TrapParams, r: [f64; 3]) -> Result<[f64; 3], TrapError> {
    let b = field_at(p, r);
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    let v = [b[0] / nb, b[1] / nb, b[2] / nb + 1.0];
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(nv > 1e-8) {
        return Err(TrapError::AntiAligned);
    }
    Ok([v[0] / nv, v[1] / nv, v[2] / nv])
}

/// Lamb–Dicke parameters `η = B′z/(2B0)`, `η′ = B″z²/(4B0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambDickeParams {
    pub eta: f64,
    pub eta_prime: f64,
    pub z_pm: f64,
}

impl LambDickeParams {
    pub fn new(p: &TrapParams, z_pm: f64) -> Self {
        LambDickeParams { eta: p.bp * z_pm / (2.0 * p.b0), eta_prime: p.bpp * z_pm * z_pm / (4.0 * p.b0), z_pm }
    }

    /// Whether `η′ < η < 1`.
    pub fn ordered(&self) -> bool {
        self.eta_prime.abs() < self.eta.abs() && self.eta.abs() < 1.0
    }

    /// Symbol values that make the symbolic jet numeric.
    pub fn sym_values(&self) -> SymValues {
        SymValues::new().with(Sym::Eta, self.eta).with(Sym::EtaP, self.eta_prime).with(Sym::Z, self.z_pm)
    }
}

/// Symbol values for the jet of `p` in SI units (`z = 1 m`).
pub fn jet_values(p: &TrapParams) -> SymValues {
    LambDickeParams::new(p, 1.0).sym_values()
}

/// Lab components `n_z`, `n₊ = n_x + i n_y`, `n₋ = n_x − i n_y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabComp {
    Z,
    Plus,
    Minus,
}

/// Body components `n₃`, `n↑ = n₁ − i n₂`, `n↓ = n₁ + i n₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BodyComp {
    Three,
    Up,
    Down,
}

/// Which derivative at `r = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Deriv {
    Value,
    X,
    Y,
    Z,
    XX,
    YY,
    ZZ,
    XY,
    XZ,
    YZ,
}

impl Deriv {
    pub fn order(self) -> u32 {
        match self {
            Deriv::Value => 0,
            Deriv::X | Deriv::Y | Deriv::Z => 1,
            _ => 2,
        }
    }

    pub fn of_order(order: u32) -> Result<&'static [Deriv], TrapError> {
        match order {
            0 => Ok(&[Deriv::Value]),
            1 => Ok(&[Deriv::X, Deriv::Y, Deriv::Z]),
            2 => Ok(&[Deriv::XX, Deriv::YY, Deriv::ZZ, Deriv::XY, Deriv::XZ, Deriv::YZ]),
            o => Err(TrapError::UnsupportedOrder(o)),
        }
    }

    /// First derivative along axis `nu` (0, 1, 2).
    pub fn first(nu: usize) -> Deriv {
        [Deriv::X, Deriv::Y, Deriv::Z][nu]
    }

    pub fn second(nu: usize, mu: usize) -> Deriv {
        match (nu.min(mu), nu.max(mu)) {
            (0, 0) => Deriv::XX,
            (1, 1) => Deriv::YY,
            (2, 2) => Deriv::ZZ,
            (0, 1) => Deriv::XY,
            (0, 2) => Deriv::XZ,
            _ => Deriv::YZ,
        }
    }
}

/// Taylor jet of the lab components of ñ at the origin, in units where
/// `B′/(2B0) = η/z` and `B″/(4B0) = η′/z²`. Entries not stored vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldJet {
    entries: BTreeMap<(Deriv, LabComp), SymCoeff>,
}

impl FieldJet {
    pub fn get(&self, d: Deriv, c: LabComp) -> SymCoeff {
        self.entries.get(&(d, c)).cloned().unwrap_or_default()
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&(Deriv, LabComp), &SymCoeff)> {
        self.entries.iter()
    }
}

fn a_sym() -> SymCoeff {
    SymCoeff::pows(&[(Sym::Eta, 1), (Sym::Z, -1)])
}

fn b_sym() -> SymCoeff {
    SymCoeff::pows(&[(Sym::EtaP, 1), (Sym::Z, -2)])
}

/// The non-vanishing jet entries of the Ioffe–Pritchard bisector field.
pub fn n_jet() -> FieldJet {
    use Deriv::{Value, X, XX, XZ, Y, YY, YZ};
    use LabComp::{Minus, Plus};
    let (a, b) = (a_sym(), b_sym());
    let i = SymCoeff::imag(1, 1);
    let mut e = BTreeMap::new();
    e.insert((Value, LabComp::Z), SymCoeff::one());
    e.insert((X, Plus), a.clone());
    e.insert((X, Minus), a.clone());
    e.insert((Y, Plus), a.mul(&i).neg());
    e.insert((Y, Minus), a.mul(&i));
    let a2 = a.mul(&a).neg();
    e.insert((XX, LabComp::Z), a2.clone());
    e.insert((YY, LabComp::Z), a2);
    e.insert((XZ, Plus), b.neg());
    e.insert((XZ, Minus), b.neg());
    e.insert((YZ, Plus), b.mul(&i).neg());
    e.insert((YZ, Minus), b.mul(&i));
    FieldJet { entries: e }
}

/// `Σ c · D¹_{mk}` with symbolic weights.
pub type DCombination = Vec<(i32, i32, SymCoeff)>;

fn t_row(c: BodyComp) -> [(LabComp, Vec<(i32, i32, SymCoeff)>); 3] {
    let r2 = SymCoeff::sqrt(2);
    let ir2 = SymCoeff::sqrt(2).mul(&SymCoeff::ratio(1, 2));
    let one = SymCoeff::one();
    match c {
        BodyComp::Three => [
            (LabComp::Z, vec![(0, 0, one)]),
            (LabComp::Plus, vec![(-1, 0, ir2.clone())]),
            (LabComp::Minus, vec![(1, 0, ir2.neg())]),
        ],
        BodyComp::Up => [
            (LabComp::Z, vec![(0, 1, r2.neg())]),
            (LabComp::Plus, vec![(-1, 1, one.neg())]),
            (LabComp::Minus, vec![(1, 1, one)]),
        ],
        BodyComp::Down => [
            (LabComp::Z, vec![(0, -1, r2)]),
            (LabComp::Plus, vec![(-1, -1, one.clone())]),
            (LabComp::Minus, vec![(1, -1, one.neg())]),
        ],
    }
}

/// Body component `c` of the derivative `d` of ñ at the origin, as a
/// combination of rank-1 D functions: `T(Ω)` applied to the jet column.
pub fn body_frame_n(jet: &FieldJet, d: Deriv, c: BodyComp) -> DCombination {
    let mut acc: BTreeMap<(i32, i32), SymCoeff> = BTreeMap::new();
    for (lab, ds) in t_row(c) {
        let v = jet.get(d, lab);
        if v.is_zero() {
            continue;
        }
        for (m, k, w) in ds {
            let e = acc.entry((m, k)).or_default();
            *e = e.add(&w.mul(&v));
        }
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((m, k), v)| (m, k, v)).collect()
}

/// All body-frame tables of a given derivative order.
pub fn body_frame_n_coefficients(order: u32) -> Result<Vec<(Deriv, BodyComp, DCombination)>, TrapError> {
    let jet = n_jet();
    let mut out = Vec::new();
    for &d in Deriv::of_order(order)? {
        for c in [BodyComp::Three, BodyComp::Up, BodyComp::Down] {
            out.push((d, c, body_frame_n(&jet, d, c)));
        }
    }
    Ok(out)
}

/// Evaluates a combination at numeric D¹ values `d1(m, k)`.
pub fn eval_combination(comb: &DCombination, v: &SymValues, d1: impl Fn(i32, i32) -> Complex64) -> Complex64 {
    comb.iter().map(|(m, k, c)| c.eval(v) * d1(*m, *k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_axis() {
        let p = TrapParams::new(1e-3, 1e4, 1e6);
        assert_eq!(field_at(&p, [0.0; 3]), [0.0, 0.0, 1e-3]);
        let x = 2e-8;
        let b = field_at(&p, [x, 0.0, 3e-8]);
        assert_eq!(b[0], p.bp * x - 0.5 * p.bpp * x * 3e-8);
    }

    #[test]
    fn fig2_curvature() {
        let p = TrapParams::new(1e-3, 1e4, 1e6);
        let e = magnitude_expansion(&p).unwrap();
        assert!(((e.bbar_x - (1e8 - 500.0) / 1e-3) / e.bbar_x).abs() < 1e-12);
        assert!((e.bbar_x / 1.0e11 - 1.0).abs() < 5e-3);
        let z = 1e-6;
        assert!((e.magnitude([0.0, 0.0, z]) - (p.b0 + 0.5 * p.bpp * z * z)).abs() < 1e-18);
    }

    #[test]
    fn non_confining() {
        let p = TrapParams::new(1e-3, 0.0, 1e6);
        assert!(matches!(magnitude_expansion(&p), Err(TrapError::NoTransverseConfinement(_))));
        let p = TrapParams::new(-1e-3, 1.0, 1e6);
        assert!(matches!(magnitude_expansion(&p), Err(TrapError::NonPositiveBias(_))));
    }
}
