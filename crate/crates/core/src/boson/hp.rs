//! Holstein–Primakoff maps for spin and rotor angular momenta, the bosonized
//! D-matrix dictionary, and order truncation.

use std::fmt;

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::coeff::{Sym, SymCoeff, SymMono};
use super::poly::{BosonPolynomial, ModeId, Monomial};
use crate::HalfInt;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BosonError {
    #[error("order cutoff {0} lies above the leading order 1/2")]
    CutoffAboveLeading(HalfInt),
    #[error("no bosonized form for D^{j}_{{{m},{k}}}")]
    Unsupported { j: HalfInt, m: HalfInt, k: HalfInt },
    #[error("requested order J^-{0}/2 exceeds the dictionary's O(1/J)")]
    BeyondTable(u32),
}

/// Spin letters of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinOp {
    S3,
    SUp,
    SDown,
}

/// Rotor letters of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JOp {
    J3,
    JUp,
    JDown,
    Jz,
    JPlus,
    JMinus,
    JSquared,
}

/// Polynomial in non-commuting letters: `Σ coefficient · word`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpExpr<T> {
    pub terms: Vec<(SymCoeff, Vec<T>)>,
}

impl<T: Copy> OpExpr<T> {
    pub fn word(letters: &[T]) -> Self {
        OpExpr { terms: vec![(SymCoeff::one(), letters.to_vec())] }
    }

    pub fn letter(x: T) -> Self {
        Self::word(&[x])
    }

    pub fn plus(mut self, c: SymCoeff, letters: &[T]) -> Self {
        self.terms.push((c, letters.to_vec()));
        self
    }
}

fn a(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::annihilator(m)
}
fn ad(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::creator(m)
}
fn n(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::number(m)
}
fn c(x: SymCoeff) -> BosonPolynomial {
    BosonPolynomial::constant(x)
}

/// `binom(1/2, n)` as an exact rational.
fn half_binom(n: u32) -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    (0..n).fold(BigRational::one(), |acc, i| {
        acc * (&half - BigRational::from_integer(i.into())) / BigRational::from_integer((i + 1).into())
    })
}

fn rat_coeff(q: &BigRational) -> SymCoeff {
    SymCoeff::from_crat(num_complex::Complex::new(q.clone(), BigRational::zero()))
}

fn check_cutoff(min_power: HalfInt) -> Result<(), BosonError> {
    if min_power > HalfInt::HALF {
        Err(BosonError::CutoffAboveLeading(min_power))
    } else {
        Ok(())
    }
}

/// `√(2X)·Σ_{n ≤ nmax} binom(1/2,n)·u^n` with `u` supplied.
fn sqrt_series(sym: Sym, u: &BosonPolynomial, nmax: u32) -> BosonPolynomial {
    let lead = SymCoeff::sqrt(2).mul(&SymCoeff::pow(sym, 1));
    let mut acc = BosonPolynomial::zero();
    let mut power = BosonPolynomial::one();
    for k in 0..=nmax {
        if k > 0 {
            power = power.mul(u);
        }
        acc = acc.add(&power.scale(&rat_coeff(&half_binom(k))));
    }
    acc.scale(&lead)
}

fn exponent_at_least(sym: Sym, min_power: HalfInt) -> impl Fn(&Monomial, &SymMono) -> bool {
    move |_, s| s.e[sym.index()] as i32 >= min_power.twice()
}

/// Maps a spin expression to `s` bosons: `S3 → S − s†s`,
/// `S↑ → (2S − s†s)^{1/2} s` expanded in `s†s/(2S)`. Terms whose `S`
/// exponent falls below `min_s_power` are dropped.
pub fn hp_map_spin(expr: &OpExpr<SpinOp>, min_s_power: HalfInt) -> Result<BosonPolynomial, BosonError> {
    check_cutoff(min_s_power)?;
    let nmax = (HalfInt::HALF - min_s_power).value().floor() as u32;
    let s3 = c(SymCoeff::pow(Sym::S, 2)).sub(&n(ModeId::S));
    let u = n(ModeId::S).scale(&SymCoeff::ratio(-1, 2).mul(&SymCoeff::pow(Sym::S, -2)));
    let sup = sqrt_series(Sym::S, &u, nmax).mul(&a(ModeId::S));
    let sdn = sup.dagger();
    let keep = exponent_at_least(Sym::S, min_s_power);
    let mut out = BosonPolynomial::zero();
    for (coef, word) in &expr.terms {
        let mut p = c(coef.clone());
        for l in word {
            p = p.mul(match l {
                SpinOp::S3 => &s3,
                SpinOp::SUp => &sup,
                SpinOp::SDown => &sdn,
            });
        }
        out = out.add(&p);
    }
    Ok(out.filter(keep))
}

/// `d†d` with `d = √(2J) + ĵ`.
fn d_number() -> BosonPolynomial {
    let xj = ad(ModeId::J).add(&a(ModeId::J));
    c(SymCoeff::pows(&[(Sym::J, 2)]).scale_int(2))
        .add(&xj.scale(&SymCoeff::sqrt(2).mul(&SymCoeff::pow(Sym::J, 1))))
        .add(&n(ModeId::J))
}

/// Maps a rotor expression through `d = √(2J) + ĵ`: `J3 = −d†d/2 + k†k`,
/// `J↑ = k†(d†d − k†k)^{1/2}` (series in `1/√J`), likewise `Jz`, `J+` with
/// `m`, and `J² = (d†d/2)(d†d/2 + 1)`. Terms whose `J` exponent falls below
/// `min_j_power` are dropped.
pub fn hp_map_j(expr: &OpExpr<JOp>, min_j_power: HalfInt) -> Result<BosonPolynomial, BosonError> {
    check_cutoff(min_j_power)?;
    let nmax = (1 - min_j_power.twice()).max(0) as u32;
    let dd = d_number();
    let half_dd = dd.scale(&SymCoeff::ratio(1, 2));
    let j3 = n(ModeId::K).sub(&half_dd);
    let jz = n(ModeId::M).sub(&half_dd);
    let ladder = |mode: ModeId| {
        // d†d − n = 2J(1 + u), u = (√(2J) X + n_j − n)/(2J)
        let u = dd.sub(&n(mode)).sub(&c(SymCoeff::pows(&[(Sym::J, 2)]).scale_int(2)));
        let u = u.scale(&SymCoeff::ratio(1, 2).mul(&SymCoeff::pow(Sym::J, -2)));
        ad(mode).mul(&sqrt_series(Sym::J, &u, nmax))
    };
    let jup = ladder(ModeId::K);
    let jdn = jup.dagger();
    let jp = ladder(ModeId::M);
    let jm = jp.dagger();
    let jsq = half_dd.mul(&half_dd.add(&BosonPolynomial::one()));
    let keep = exponent_at_least(Sym::J, min_j_power);
    let mut out = BosonPolynomial::zero();
    for (coef, word) in &expr.terms {
        let mut p = c(coef.clone());
        for l in word {
            p = p.mul(match l {
                JOp::J3 => &j3,
                JOp::JUp => &jup,
                JOp::JDown => &jdn,
                JOp::Jz => &jz,
                JOp::JPlus => &jp,
                JOp::JMinus => &jm,
                JOp::JSquared => &jsq,
            });
        }
        out = out.add(&p.filter(&keep));
    }
    Ok(out)
}

/// Exact spin HP operators `(S3, S↑, S↓)` on the Fock space `0..=2S` of `s`,
/// with the square root evaluated as a diagonal function of `s†s`.
pub fn hp_spin_fock(s: HalfInt) -> [DMatrix<f64>; 3] {
    let dim = (s.twice() + 1) as usize;
    let sv = s.value();
    let mut s3 = DMatrix::zeros(dim, dim);
    let mut sup = DMatrix::zeros(dim, dim);
    for nocc in 0..dim {
        s3[(nocc, nocc)] = sv - nocc as f64;
        if nocc + 1 < dim {
            // √(2S − n) s |n+1⟩ = √(2S − n)·√(n+1) |n⟩
            let n = nocc as f64;
            sup[(nocc, nocc + 1)] = (2.0 * sv - n).max(0.0).sqrt() * (n + 1.0).sqrt();
        }
    }
    let sdn = sup.transpose();
    [s3, sup, sdn]
}

/// Dictionary weight `j(j+1)/2` of the D-matrix expansions.
fn table_weight(j: i32) -> i64 {
    (j * (j + 1) / 2) as i64
}

fn d_table(j: i32, m: i32, k: i32) -> Option<BosonPolynomial> {
    use ModeId::{J as Mj, K as Mk, M as Mm};
    let w = table_weight(j);
    let inv_j = SymCoeff::pow(Sym::J, -2);
    let inv_sqrt_j = SymCoeff::pow(Sym::J, -1);
    let xj = ad(Mj).add(&a(Mj));
    let bracket00 = BosonPolynomial::one().add(&n(Mk)).add(&n(Mm)).sub(&ad(Mk).mul(&ad(Mm))).sub(&a(Mk).mul(&a(Mm)));
    let d00 = BosonPolynomial::one().sub(&bracket00.scale(&inv_j.mul(&SymCoeff::int(w))));
    // √w/√J (x† − y) − √w/(2√2 J)[(ĵ†+ĵ) x† + (ĵ − 3ĵ†) y]
    let d_one = |x: ModeId, y: ModeId| {
        let lead = ad(x).sub(&a(y)).scale(&SymCoeff::sqrt(w as u32).mul(&inv_sqrt_j));
        let j_minus_3jd = a(Mj).sub(&ad(Mj).scale(&SymCoeff::int(3)));
        let sub = xj.mul(&ad(x)).add(&j_minus_3jd.mul(&a(y)));
        let f = SymCoeff::sqrt(2 * w as u32).mul(&SymCoeff::ratio(1, 4)).mul(&inv_j);
        lead.sub(&sub.scale(&f))
    };
    let d01 = d_one(Mk, Mm);
    let d10 = d_one(Mm, Mk);
    let neg_dag = |p: &BosonPolynomial| p.dagger().neg();
    let p = match (j, m, k) {
        (_, 0, 0) => d00,
        (_, 0, 1) => d01,
        (_, 0, -1) => neg_dag(&d01),
        (_, 1, 0) => d10,
        (_, -1, 0) => neg_dag(&d10),
        (1, _, _) => {
            let xm = ad(Mj).sub(&a(Mj));
            let d11 = {
                let br = n(Mj)
                    .add(&BosonPolynomial::one())
                    .scale(&SymCoeff::int(2))
                    .add(&n(Mk))
                    .add(&n(Mm))
                    .sub(&ad(Mm).mul(&ad(Mk)).scale(&SymCoeff::int(2)))
                    .add(&a(Mj).mul(&a(Mj)))
                    .sub(&xj.mul(&xj).scale(&SymCoeff::ratio(3, 4)))
                    .sub(&xm.mul(&xm).scale(&SymCoeff::ratio(1, 4)));
                BosonPolynomial::one()
                    .sub(&xm.scale(&SymCoeff::sqrt(2).mul(&SymCoeff::ratio(1, 2)).mul(&inv_sqrt_j)))
                    .sub(&br.scale(&SymCoeff::ratio(1, 2).mul(&inv_j)))
            };
            let d1m1 = a(Mk)
                .mul(&a(Mk))
                .sub(&ad(Mm).mul(&a(Mk)).scale(&SymCoeff::int(2)))
                .add(&ad(Mm).mul(&ad(Mm)))
                .scale(&SymCoeff::ratio(1, 2).mul(&inv_j));
            match (m, k) {
                (1, 1) => d11,
                (-1, -1) => d11.dagger(),
                (1, -1) => d1m1,
                (-1, 1) => d1m1.dagger(),
                _ => return None,
            }
        }
        _ => return None,
    };
    Some(p)
}

/// Bosonized `D^j_{mk}` to `O(1/J)`, keeping terms whose `J` exponent is at
/// least `−max_inv_sqrt_j_power/2`.
pub fn bosonize_d(j: HalfInt, m: HalfInt, k: HalfInt, max_inv_sqrt_j_power: u32) -> Result<BosonPolynomial, BosonError> {
    let unsupported = BosonError::Unsupported { j, m, k };
    if max_inv_sqrt_j_power > 2 {
        return Err(BosonError::BeyondTable(max_inv_sqrt_j_power));
    }
    if !(j.is_integer() && m.is_integer() && k.is_integer()) {
        return Err(unsupported);
    }
    let (ji, mi, ki) = (j.to_int(), m.to_int(), k.to_int());
    if ![1, 2, 4].contains(&ji) || mi.abs() > 1 || ki.abs() > 1 {
        return Err(unsupported);
    }
    let p = d_table(ji, mi, ki).ok_or(unsupported)?;
    let lo = -(max_inv_sqrt_j_power as i32);
    Ok(p.filter(|_, s| s.j2() >= lo))
}

/// Terms removed by [`truncate`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DroppedSummary {
    pub count: usize,
    /// The least suppressed dropped term: highest `S`+`J` power, then lowest degree.
    pub dominant: Option<(Monomial, SymCoeff)>,
}

impl fmt::Display for DroppedSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.dominant {
            None => write!(f, "dropped 0 terms"),
            Some((m, c)) => write!(f, "dropped {} terms; dominant {m} : {c}", self.count),
        }
    }
}

/// Drops monomials of degree above `max_degree` and coefficient terms whose
/// `J` exponent is below `−max_inv_sqrt_j_power/2`.
pub fn truncate(expr: &BosonPolynomial, max_degree: u32, max_inv_sqrt_j_power: u32) -> (BosonPolynomial, DroppedSummary) {
    let lo = -(max_inv_sqrt_j_power as i32);
    let mut kept = BosonPolynomial::zero();
    let mut summary = DroppedSummary::default();
    let mut best: Option<(i32, u32)> = None;
    for (m, coeff) in expr.terms() {
        for (s, q) in coeff.terms() {
            let mut single = SymCoeff::zero();
            single.add_term(*s, q.clone());
            if m.degree() <= max_degree && s.j2() >= lo {
                kept.add_term(*m, single);
                continue;
            }
            summary.count += 1;
            let key = (s.sj2(), m.degree());
            let better = match best {
                None => true,
                Some((p, d)) => key.0 > p || (key.0 == p && key.1 < d),
            };
            if better {
                best = Some(key);
                summary.dominant = Some((*m, single));
            }
        }
    }
    (kept, summary)
}
