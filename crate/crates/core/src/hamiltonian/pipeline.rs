//! Symbolic bosonization of the full Hamiltonian.
//!
//! Every operator is written as a sum of products of "atoms" (bosonized
//! spin, rotor, D-matrix, position and momentum operators, and the
//! body-frame field direction with its gradients). Products are expanded in
//! the written order and normal-ordered exactly. A term's weight is its
//! doubled `S`+`J` exponent plus its operator degree; the full Hamiltonian
//! has weight ≤ 2 and each contraction lowers it by 2, so partial products
//! that can no longer reach weight 2 are discarded without loss.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::quadratic::{quadratic_hg_polynomial, reference_couplings, QuadraticBosonForm, HG_MODES};
use super::{FrequencySet, HamiltonianError};
use crate::boson::{
    bosonize_d, hp_map_j, hp_map_spin, BosonPolynomial, JOp, ModeId, Monomial, OpExpr, Prune, SpinOp, Sym, SymCoeff,
    SymMono, SymValues,
};
use crate::trap::{body_frame_n, n_jet, BodyComp, Deriv};
use crate::HalfInt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineOptions {
    /// Highest Lamb–Dicke tag kept (power of η plus twice that of η′).
    pub lamb_dicke_order: u32,
    /// Highest operator degree kept (≥ 3 to see the cubic terms).
    pub max_degree: u32,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { lamb_dicke_order: 2, max_degree: 3 }
    }
}

/// Terms left out of the quadratic Hamiltonian, grouped by source,
/// degree and Lamb–Dicke tag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub source: String,
    pub degree: u32,
    pub ld_tag: i32,
    pub count: usize,
    #[serde(serialize_with = "display")]
    pub dominant: Monomial,
    #[serde(serialize_with = "display")]
    pub coefficient: SymCoeff,
    /// Frequency and Lamb–Dicke content of the dominant coefficient.
    pub order: String,
    /// `|coefficient|` at the run's parameter values (rad/s).
    pub magnitude: f64,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Weight-2 terms by source: `H0+V_I`, `CM`, `V_D0`, `V_D1`, `V_D2`, `V_P1`, `V_P2`.
    pub pieces: BTreeMap<String, BosonPolynomial>,
    /// Degree 1–2, Lamb–Dicke tag ≤ 1.
    pub hg: BosonPolynomial,
    pub form: QuadraticBosonForm,
    pub ledger: Vec<LedgerEntry>,
    /// The internal length symbol cancels from every kept coefficient.
    pub length_symbol_cancels: bool,
}

impl PipelineOutput {
    pub fn piece(&self, name: &str) -> BosonPolynomial {
        self.pieces.get(name).cloned().unwrap_or_default()
    }

    /// The largest term of degree ≥ 3.
    pub fn leading_non_quadratic(&self) -> Option<&LedgerEntry> {
        self.ledger.iter().filter(|e| e.degree >= 3).max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
    }

    pub fn ledger_entry(&self, source: &str, degree: u32, ld_tag: i32) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.source == source && e.degree == degree && e.ld_tag == ld_tag)
    }
}

#[derive(Clone, Debug, Default)]
struct Expr(Vec<(SymCoeff, Vec<usize>)>);

impl Expr {
    fn scalar(c: SymCoeff) -> Self {
        Expr(vec![(c, vec![])])
    }

    fn add(&self, o: &Expr) -> Expr {
        Expr(self.0.iter().chain(&o.0).cloned().collect())
    }

    fn sub(&self, o: &Expr) -> Expr {
        self.add(&o.scale(&SymCoeff::int(-1)))
    }

    fn scale(&self, c: &SymCoeff) -> Expr {
        Expr(self.0.iter().map(|(k, f)| (k.mul(c), f.clone())).collect())
    }

    fn mul(&self, o: &Expr) -> Expr {
        let mut out = Vec::with_capacity(self.0.len() * o.0.len());
        for (c1, f1) in &self.0 {
            for (c2, f2) in &o.0 {
                let c = c1.mul(c2);
                if !c.is_zero() {
                    out.push((c, f1.iter().chain(f2).copied().collect()));
                }
            }
        }
        Expr(out)
    }
}

#[derive(Default)]
struct Atoms {
    polys: Vec<BosonPolynomial>,
    weight: Vec<Option<i32>>,
    degree: Vec<u32>,
}

#[derive(Clone, Copy)]
struct Bounds {
    min_weight: i32,
    max_tag: i32,
    max_degree: u32,
}

impl Atoms {
    fn push(&mut self, p: BosonPolynomial) -> Expr {
        self.weight.push(p.max_weight());
        self.degree.push(p.max_degree());
        self.polys.push(p);
        Expr(vec![(SymCoeff::one(), vec![self.polys.len() - 1])])
    }

    fn eval(&self, e: &Expr, b: Bounds) -> BosonPolynomial {
        e.0.par_iter().map(|(c, f)| self.eval_product(c, f, b)).reduce(BosonPolynomial::zero, |x, y| x.add(&y))
    }

    fn eval_product(&self, c: &SymCoeff, factors: &[usize], b: Bounds) -> BosonPolynomial {
        let n = factors.len();
        let mut suffix_w = vec![0i32; n + 1];
        let mut suffix_d = vec![0u32; n + 1];
        for i in (0..n).rev() {
            let Some(w) = self.weight[factors[i]] else {
                return BosonPolynomial::zero();
            };
            suffix_w[i] = suffix_w[i + 1] + w;
            suffix_d[i] = suffix_d[i + 1] + self.degree[factors[i]];
        }
        let c = c.filter(|s| s.sj2() + suffix_w[0] >= b.min_weight && s.ld_tag() <= b.max_tag);
        let mut acc = BosonPolynomial::constant(c);
        for (pos, &i) in factors.iter().enumerate() {
            if acc.is_zero() {
                break;
            }
            let prune = Prune {
                min_sj2: None,
                max_ld_tag: Some(b.max_tag),
                max_degree: Some(b.max_degree + suffix_d[pos + 1]),
                min_weight: Some(b.min_weight - suffix_w[pos + 1]),
            };
            acc = acc.mul_pruned(&self.polys[i], &prune);
        }
        acc
    }
}

fn sc(list: &[(Sym, i16)]) -> SymCoeff {
    SymCoeff::pows(list)
}

/// Centre-of-mass quadratures `(c+c†, c†−c)` for x, y, z in terms of the
/// circular modes `c_x = (b_r+b_l)/√2`, `c_y = i(b_r−b_l)/√2`.
fn quadratures() -> [(BosonPolynomial, BosonPolynomial); 3] {
    let a = BosonPolynomial::annihilator;
    let inv_r2 = SymCoeff::sqrt(2).mul(&SymCoeff::ratio(1, 2));
    let cx = a(ModeId::Br).add(&a(ModeId::Bl)).scale(&inv_r2);
    let cy = a(ModeId::Br).sub(&a(ModeId::Bl)).scale(&inv_r2.mul(&SymCoeff::imag(1, 1)));
    let cz = a(ModeId::Cz);
    [cx, cy, cz].map(|c| (c.add(&c.dagger()), c.dagger().sub(&c)))
}

/// Zero-point length of axis `nu` over the transverse one, times `z`.
fn z_axis(nu: usize) -> SymCoeff {
    if nu < 2 {
        sc(&[(Sym::Z, 1)])
    } else {
        sc(&[(Sym::Z, 1), (Sym::WT, 1), (Sym::WZ, -1)])
    }
}

fn axis_frequency(nu: usize) -> SymCoeff {
    if nu < 2 {
        sc(&[(Sym::WT, 2)])
    } else {
        sc(&[(Sym::WZ, 2)])
    }
}

struct Ingredients {
    atoms: Atoms,
    s3: Expr,
    sup: Expr,
    sdn: Expr,
    j3: Expr,
    jup: Expr,
    jdn: Expr,
    j2: Expr,
    x: [Expr; 3],
    pm: [Expr; 3],
    p: [Expr; 3],
    /// Body components `(3, ↑, ↓)` of ñ(r).
    n: [Expr; 3],
    /// Body components of `∂_ν ñ(r)`.
    dn: [[Expr; 3]; 3],
}

fn ingredients(opts: &PipelineOptions) -> Result<Ingredients, HamiltonianError> {
    let bos = |e: crate::boson::BosonError| HamiltonianError::Truncation(e.to_string());
    let mut atoms = Atoms::default();
    let max_tag = opts.lamb_dicke_order as i32;
    let tag_only = Prune { max_ld_tag: Some(max_tag), ..Prune::NONE };

    // series orders: the n-th correction of S↑ has degree 2n+1, that of J↑
    // degree ≥ n+1, so these cutoffs are exact up to `max_degree`
    let spin_cut = HalfInt::HALF - HalfInt::int(((opts.max_degree.max(1) - 1) / 2) as i32);
    let j_cut = HalfInt::from_twice(2 - opts.max_degree as i32);
    let spin = |op| hp_map_spin(&OpExpr::letter(op), spin_cut).map_err(bos);
    let rot = |op| hp_map_j(&OpExpr::letter(op), j_cut).map_err(bos);
    let s3 = atoms.push(spin(SpinOp::S3)?);
    let sup = atoms.push(spin(SpinOp::SUp)?);
    let sdn = atoms.push(spin(SpinOp::SDown)?);
    let j3 = atoms.push(rot(JOp::J3)?);
    let jup = atoms.push(rot(JOp::JUp)?);
    let jdn = atoms.push(rot(JOp::JDown)?);
    let j2 = atoms.push(rot(JOp::JSquared)?);

    let mut d1 = BTreeMap::new();
    for m in -1..=1 {
        for k in -1..=1 {
            d1.insert((m, k), bosonize_d(HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), 2).map_err(bos)?);
        }
    }

    let q = quadratures();
    let inv_root_s = sc(&[(Sym::S, -1)]);
    // r_ν = (z_ν/√S)(c+c†),  p_ν/ħ = i√S/(2 z_ν)(c†−c)
    let r_poly: Vec<BosonPolynomial> = (0..3).map(|nu| q[nu].0.scale(&z_axis(nu).mul(&inv_root_s))).collect();
    let p_poly: Vec<BosonPolynomial> = (0..3)
        .map(|nu| {
            let inv_z = if nu < 2 { sc(&[(Sym::Z, -1)]) } else { sc(&[(Sym::Z, -1), (Sym::WT, -1), (Sym::WZ, 1)]) };
            q[nu].1.scale(&SymCoeff::imag(1, 2).mul(&sc(&[(Sym::S, 1)])).mul(&inv_z))
        })
        .collect();

    let jet = n_jet();
    let comps = [BodyComp::Three, BodyComp::Up, BodyComp::Down];
    let body = |d: Deriv, c: BodyComp| -> BosonPolynomial {
        let mut acc = BosonPolynomial::zero();
        for (m, k, w) in body_frame_n(&jet, d, c) {
            acc = acc.add(&d1[&(m, k)].scale(&w));
        }
        acc
    };
    // Taylor monomial of each derivative: r_ν, ½ r_ν², r_ν r_μ
    let taylor = |d: Deriv| -> BosonPolynomial {
        let r = |i: usize| &r_poly[i];
        let half = SymCoeff::ratio(1, 2);
        match d {
            Deriv::Value => BosonPolynomial::one(),
            Deriv::X => r(0).clone(),
            Deriv::Y => r(1).clone(),
            Deriv::Z => r(2).clone(),
            Deriv::XX => r(0).mul(r(0)).scale(&half),
            Deriv::YY => r(1).mul(r(1)).scale(&half),
            Deriv::ZZ => r(2).mul(r(2)).scale(&half),
            Deriv::XY => r(0).mul(r(1)),
            Deriv::XZ => r(0).mul(r(2)),
            Deriv::YZ => r(1).mul(r(2)),
        }
    };
    let mut derivs: Vec<Deriv> = Vec::new();
    for order in 0..=2 {
        derivs.extend_from_slice(Deriv::of_order(order)?);
    }
    let n: Vec<Expr> = comps
        .iter()
        .map(|&c| {
            let mut acc = BosonPolynomial::zero();
            for &d in &derivs {
                acc = acc.add(&body(d, c).mul_pruned(&taylor(d), &tag_only));
            }
            atoms.push(acc)
        })
        .collect();
    let dn: Vec<[Expr; 3]> = (0..3)
        .map(|nu| {
            let v: Vec<Expr> = comps
                .iter()
                .map(|&c| {
                    let mut acc = body(Deriv::first(nu), c).filter(|_, s| s.ld_tag() <= max_tag);
                    for mu in 0..3 {
                        acc = acc.add(&body(Deriv::second(nu, mu), c).mul_pruned(&r_poly[mu], &tag_only));
                    }
                    atoms.push(acc)
                })
                .collect();
            v.try_into().expect("three components")
        })
        .collect();

    let x: Vec<Expr> = q.iter().map(|(x, _)| atoms.push(x.clone())).collect();
    let pm: Vec<Expr> = q.iter().map(|(_, pm)| atoms.push(pm.clone())).collect();
    let p: Vec<Expr> = p_poly.into_iter().map(|pp| atoms.push(pp)).collect();
    let arr = |v: Vec<Expr>| -> [Expr; 3] { v.try_into().expect("three") };
    Ok(Ingredients {
        atoms,
        s3,
        sup,
        sdn,
        j3,
        jup,
        jdn,
        j2,
        x: arr(x),
        pm: arr(pm),
        p: arr(p),
        n: arr(n),
        dn: dn.try_into().map_err(|_| HamiltonianError::Truncation("gradient table".into()))?,
    })
}

/// `(u × v)·S` in body components `(3, ↑, ↓)`.
fn cross_dot(u: &[Expr; 3], v: &[Expr; 3], ing: &Ingredients) -> Expr {
    let [u3, uu, ud] = u;
    let [v3, vu, vd] = v;
    let half_i = Expr::scalar(SymCoeff::imag(1, 2));
    let t1 = uu.mul(v3).sub(&u3.mul(vu)).mul(&ing.sdn);
    let t2 = ud.mul(v3).sub(&u3.mul(vd)).mul(&ing.sup);
    let t3 = ud.mul(vu).sub(&uu.mul(vd)).mul(&ing.s3);
    half_i.mul(&t1.sub(&t2).add(&t3))
}

fn split_by_tag(p: &BosonPolynomial, tag: i32) -> BosonPolynomial {
    p.filter(|_, s| s.ld_tag() == tag)
}

/// Frequency and Lamb–Dicke symbols of the largest coefficient term.
fn order_label(c: &SymCoeff, v: &SymValues) -> String {
    let best = c.terms().max_by(|a, b| {
        let ma = a.0.eval(v) * num_abs(a.1);
        let mb = b.0.eval(v) * num_abs(b.1);
        ma.total_cmp(&mb)
    });
    let Some((m, _)) = best else {
        return "0".into();
    };
    label_of(m)
}

fn num_abs(c: &crate::boson::CRat) -> f64 {
    use crate::exact::ratio_to_f64;
    ratio_to_f64(&c.re).hypot(ratio_to_f64(&c.im))
}

fn label_of(m: &SymMono) -> String {
    let mut parts = Vec::new();
    for s in [Sym::WI, Sym::WD, Sym::WL, Sym::WT, Sym::WZ, Sym::Eta, Sym::EtaP] {
        let e = m.exponent(s);
        if e == 0.0 {
            continue;
        }
        if e == 1.0 {
            parts.push(s.name().to_string());
        } else {
            parts.push(format!("{}^{}", s.name(), e));
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn ledger_for(source: &str, p: &BosonPolynomial, v: &SymValues, max_tag_in_hg: i32) -> Vec<LedgerEntry> {
    let mut groups: BTreeMap<(u32, i32), Vec<(Monomial, SymCoeff)>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let deg = m.degree();
        if deg == 0 {
            continue;
        }
        let mut by_tag: BTreeMap<i32, SymCoeff> = BTreeMap::new();
        for (s, q) in c.terms() {
            let mut one = SymCoeff::zero();
            one.add_term(*s, q.clone());
            let e = by_tag.entry(s.ld_tag()).or_default();
            *e = e.add(&one);
        }
        for (tag, part) in by_tag {
            if deg <= 2 && tag <= max_tag_in_hg {
                continue;
            }
            groups.entry((deg, tag)).or_default().push((*m, part));
        }
    }
    groups
        .into_iter()
        .map(|((degree, ld_tag), terms)| {
            let count = terms.len();
            let (dominant, coefficient) = terms
                .into_iter()
                .max_by(|a, b| a.1.eval(v).norm().total_cmp(&b.1.eval(v).norm()))
                .expect("non-empty group");
            LedgerEntry {
                source: source.to_string(),
                degree,
                ld_tag,
                count,
                order: order_label(&coefficient, v),
                magnitude: coefficient.eval(v).norm(),
                dominant,
                coefficient,
            }
        })
        .collect()
}

/// Bosonizes `H0 + V_I + V_D + V_P` plus the centre-of-mass terms, keeping
/// every weight-2 term up to the requested degree and Lamb–Dicke order.
/// `freqs` supplies the numeric values for the quadratic form and the ledger.
pub fn run_bosonization_pipeline(freqs: &FrequencySet, opts: &PipelineOptions) -> Result<PipelineOutput, HamiltonianError> {
    if opts.lamb_dicke_order < 1 {
        return Err(HamiltonianError::OrderTooLow(
            "Lamb-Dicke order 1 is needed for the centre-of-mass couplings g_r, g_l, g_s".into(),
        ));
    }
    if opts.max_degree < 2 {
        return Err(HamiltonianError::OrderTooLow("boson degree 2 is needed for a quadratic Hamiltonian".into()));
    }
    let ing = ingredients(opts)?;
    let bounds = Bounds { min_weight: 2, max_tag: opts.lamb_dicke_order as i32, max_degree: opts.max_degree };
    let one = |c: SymCoeff| Expr::scalar(c);
    let wi_2s = sc(&[(Sym::WI, 2), (Sym::S, -2)]).mul(&SymCoeff::ratio(1, 2));

    // H0 + V_I without the ω_D S3²/S term, which cancels against V_D
    let h0 = one(wi_2s.clone())
        .mul(&ing.j2.add(&ing.j3.mul(&ing.s3).scale(&SymCoeff::int(2))))
        .add(&ing.s3.scale(&sc(&[(Sym::WL, 2)])));
    let hi = one(wi_2s).mul(&ing.jup.mul(&ing.sdn).add(&ing.jdn.mul(&ing.sup)));

    // p²/(2Mħ) = −(ω_ν/4)(c†−c)²; trap (S3/S)(ω_ν/4)(c+c†)²
    let mut cm = Expr::default();
    for nu in 0..3 {
        let w4 = axis_frequency(nu).mul(&SymCoeff::ratio(1, 4));
        cm = cm.sub(&ing.pm[nu].mul(&ing.pm[nu]).scale(&w4));
        cm = cm.add(&ing.s3.mul(&ing.x[nu]).mul(&ing.x[nu]).scale(&w4.mul(&sc(&[(Sym::S, -2)]))));
    }

    // V_D = −(ω_D/S) B², B = S3(1 − 2 n3²) − n3 (n↑ S↓ + n↓ S↑)
    let [n3, nu_, nd] = &ing.n;
    let bracket = ing
        .s3
        .sub(&ing.s3.mul(n3).mul(n3).scale(&SymCoeff::int(2)))
        .sub(&n3.mul(&nu_.mul(&ing.sdn).add(&nd.mul(&ing.sup))));
    let vd = bracket.mul(&bracket).scale(&sc(&[(Sym::WD, 2), (Sym::S, -2)]).neg());

    // V_P with 𝒜_ν = (ñ × ∂_ν ñ)·S and ħ/M = 2 z² ω_T / S
    let hbar_m = sc(&[(Sym::Z, 2), (Sym::WT, 2), (Sym::S, -2)]).scale_int(2);
    let mut vp1 = Expr::default();
    let mut vp2 = Expr::default();
    for nu in 0..3 {
        let a = cross_dot(&ing.n, &ing.dn[nu], &ing);
        vp1 = vp1.sub(&ing.p[nu].mul(&a).add(&a.mul(&ing.p[nu])).scale(&hbar_m));
        vp2 = vp2.add(&a.mul(&a).scale(&hbar_m.scale_int(2)));
    }

    let eval = |e: &Expr| ing.atoms.eval(e, bounds);
    let h0hi = eval(&h0.add(&hi));
    let cm = eval(&cm);
    let vd = eval(&vd);
    let vp1 = eval(&vp1);
    let vp2 = eval(&vp2);

    let mut pieces = BTreeMap::new();
    pieces.insert("H0+V_I".to_string(), h0hi);
    pieces.insert("CM".to_string(), cm);
    for t in 0..=bounds.max_tag {
        pieces.insert(format!("V_D{t}"), split_by_tag(&vd, t));
    }
    pieces.insert("V_P1".to_string(), vp1);
    pieces.insert("V_P2".to_string(), vp2);

    let length_symbol_cancels =
        pieces.values().all(|p| p.terms().all(|(_, c)| c.terms().all(|(s, _)| s.e[Sym::Z.index()] == 0)));

    let mut hg = BosonPolynomial::zero();
    for p in pieces.values() {
        hg = hg.add(&p.filter(|m, s| (1..=2).contains(&m.degree()) && s.ld_tag() <= 1));
    }
    let v = freqs.sym_values();
    let form = QuadraticBosonForm::from_polynomial(&hg, &HG_MODES, &v)?;
    let mut ledger = Vec::new();
    for (name, p) in &pieces {
        ledger.extend(ledger_for(name, p, &v, 1));
    }
    Ok(PipelineOutput { pieces, hg, form, ledger, length_symbol_cancels })
}

/// Expected versus pipeline coefficient for one reference quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermResidual {
    pub name: String,
    #[serde(serialize_with = "display")]
    pub expected: SymCoeff,
    #[serde(serialize_with = "display")]
    pub found: SymCoeff,
}

impl TermResidual {
    fn new(name: impl Into<String>, expected: SymCoeff, found: SymCoeff) -> Self {
        TermResidual { name: name.into(), expected, found }
    }

    pub fn matches(&self) -> bool {
        self.expected == self.found
    }

    pub fn difference(&self) -> SymCoeff {
        self.found.sub(&self.expected)
    }
}

fn m(list: &[(ModeId, u8, u8)]) -> Monomial {
    Monomial::from_powers(list)
}

/// Each reference coupling read back from the pipeline's quadratic Hamiltonian,
/// followed by every monomial where the pipeline and the reference form differ
/// (named `residual <monomial>`, expected 0).
pub fn reference_entry_residuals(out: &PipelineOutput) -> Vec<TermResidual> {
    use ModeId::{Bl, Br, Cz, J, K, M, S};
    let hg = &out.hg;
    let c = |list: &[(ModeId, u8, u8)]| hg.coefficient(&m(list));
    let half = SymCoeff::ratio(1, 2);
    let found: BTreeMap<&str, SymCoeff> = [
        ("delta", c(&[(S, 1, 1)]).neg()),
        ("omega_k", c(&[(K, 1, 1)])),
        ("omega_m", c(&[(M, 1, 1)])),
        ("omega_j", c(&[(J, 1, 1)]).sub(&c(&[(J, 2, 0)]).scale_int(2))),
        ("xi1", c(&[(J, 1, 0)])),
        ("xi2", c(&[(J, 2, 0)])),
        ("g_k", c(&[(S, 1, 0), (K, 1, 0)])),
        ("g_m", c(&[(S, 1, 0), (M, 0, 1)]).neg()),
        ("g_r", c(&[(Br, 1, 0), (M, 1, 0)])),
        ("g_l", c(&[(Bl, 0, 1), (M, 1, 0)])),
        // antisymmetric channel s†(b_r† − b_l)
        ("g_s", c(&[(S, 1, 0), (Br, 1, 0)]).sub(&c(&[(S, 1, 0), (Bl, 0, 1)])).mul(&half).neg()),
        ("omega_r", c(&[(Br, 1, 1)])),
        ("omega_l", c(&[(Bl, 1, 1)])),
        ("omega_z", c(&[(Cz, 1, 1)])),
    ]
    .into_iter()
    .collect();
    let mut rows: Vec<TermResidual> =
        reference_couplings().into_iter().map(|(name, exp)| TermResidual::new(name, exp, found[name].clone())).collect();
    let diff = hg.sub(&quadratic_hg_polynomial());
    for (mono, coef) in diff.terms() {
        if mono.degree() > 0 {
            rows.push(TermResidual::new(
                format!("residual {mono}"),
                SymCoeff::zero(),
                coef.clone(),
            ));
        }
    }
    rows
}

/// The individually quoted coefficients of the `V_D` and `V_P`
/// expansions, compared with the corresponding pipeline pieces.
pub fn expansion_coefficient_residuals(out: &PipelineOutput) -> Vec<TermResidual> {
    use ModeId::{Bl, Br, J, K, M, S};
    let vd0 = out.piece("V_D0");
    let vd1 = out.piece("V_D1");
    let vp1 = out.piece("V_P1").filter(|_, s| s.ld_tag() == 1);
    let wd = sc(&[(Sym::WD, 2)]);
    let s_over_j = sc(&[(Sym::S, 2), (Sym::J, -2)]);
    let root = sc(&[(Sym::S, 1), (Sym::J, -1)]);
    let eta = sc(&[(Sym::Eta, 1)]);
    let wt_eta = sc(&[(Sym::WT, 2)]).mul(&eta);
    let c = |p: &BosonPolynomial, list: &[(ModeId, u8, u8)]| p.coefficient(&m(list));
    // a ĵ†ĵ + b (ĵ†+ĵ)²  ⇒  a = c(ĵ†ĵ) − 2 c(ĵ†²),  b = c(ĵ†²)
    let jj = c(&vd0, &[(J, 1, 1)]).sub(&c(&vd0, &[(J, 2, 0)]).scale_int(2));
    vec![
        TermResidual::new("V_D0 j†j (32)", wd.mul(&s_over_j).scale_int(32), jj),
        TermResidual::new("V_D0 (j†+j)² (-56/5)", wd.mul(&s_over_j).mul(&SymCoeff::ratio(-56, 5)), c(&vd0, &[(J, 2, 0)])),
        TermResidual::new("V_D0 k†k (8)", wd.mul(&s_over_j).scale_int(8), c(&vd0, &[(K, 1, 1)])),
        TermResidual::new("V_D0 m†m (8)", wd.mul(&s_over_j).scale_int(8), c(&vd0, &[(M, 1, 1)])),
        TermResidual::new("V_D0 k†m† (-8)", wd.mul(&s_over_j).mul(&SymCoeff::int(-8)), c(&vd0, &[(K, 1, 0), (M, 1, 0)])),
        TermResidual::new("V_D0 s†k† (4)", wd.mul(&root).scale_int(4), c(&vd0, &[(S, 1, 0), (K, 1, 0)])),
        TermResidual::new("V_D0 s†m (-4)", wd.mul(&root).mul(&SymCoeff::int(-4)), c(&vd0, &[(S, 1, 0), (M, 0, 1)])),
        TermResidual::new("V_D1 b_r†m† (8 eta)", wd.mul(&eta).mul(&root).scale_int(8), c(&vd1, &[(Br, 1, 0), (M, 1, 0)])),
        TermResidual::new("V_D1 m†b_l (8 eta)", wd.mul(&eta).mul(&root).scale_int(8), c(&vd1, &[(Bl, 0, 1), (M, 1, 0)])),
        TermResidual::new("V_D1 b_r†k (-8 eta)", wd.mul(&eta).mul(&root).mul(&SymCoeff::int(-8)), c(&vd1, &[(Br, 1, 0), (K, 0, 1)])),
        TermResidual::new("V_P1 b_r†m† (2 eta)", wt_eta.mul(&root).scale_int(2), c(&vp1, &[(Br, 1, 0), (M, 1, 0)])),
        TermResidual::new("V_P1 m†b_l (-2 eta)", wt_eta.mul(&root).mul(&SymCoeff::int(-2)), c(&vp1, &[(Bl, 0, 1), (M, 1, 0)])),
        TermResidual::new("V_P1 b_r†k (-2 eta)", wt_eta.mul(&root).mul(&SymCoeff::int(-2)), c(&vp1, &[(Br, 1, 0), (K, 0, 1)])),
    ]
}

/// `ω_I/(2√(2S))`, the reference size of the leading cubic term.
pub fn reference_v_jkm() -> SymCoeff {
    sc(&[(Sym::WI, 2), (Sym::S, -1)]).mul(&SymCoeff::sqrt(2)).mul(&SymCoeff::ratio(1, 4))
}

/// `(ĵ†+ĵ)(k̂†ŝ† + k̂ŝ)` monomials of the reference cubic term.
pub fn v_jkm_monomials() -> [Monomial; 4] {
    use ModeId::{J, K, S};
    [
        m(&[(J, 1, 0), (K, 1, 0), (S, 1, 0)]),
        m(&[(J, 0, 1), (K, 1, 0), (S, 1, 0)]),
        m(&[(J, 1, 0), (K, 0, 1), (S, 0, 1)]),
        m(&[(J, 0, 1), (K, 0, 1), (S, 0, 1)]),
    ]
}
