//! Exact symbolic coefficients: sums of `q · √r · Π symbolᵉ` with Gaussian
//! rational `q` and squarefree integer radicand `r`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::ratio_to_f64;

pub type CRat = Complex<BigRational>;

pub fn crat(re: (i64, i64), im: (i64, i64)) -> CRat {
    Complex::new(BigRational::new(re.0.into(), re.1.into()), BigRational::new(im.0.into(), im.1.into()))
}

pub fn crat_int(n: i64) -> CRat {
    crat((n, 1), (0, 1))
}

/// Coefficient symbols. Frequencies, `S` and `J` carry half-integer
/// exponents (stored doubled); `η`, `η′` and the internal length `z` carry
/// integer exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sym {
    WI,
    WD,
    WL,
    WT,
    WZ,
    S,
    J,
    Eta,
    EtaP,
    Z,
}

pub const NSYM: usize = 10;

impl Sym {
    pub const ALL: [Sym; NSYM] = [Sym::WI, Sym::WD, Sym::WL, Sym::WT, Sym::WZ, Sym::S, Sym::J, Sym::Eta, Sym::EtaP, Sym::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// True when the stored exponent is twice the actual exponent.
    pub fn doubled(self) -> bool {
        !matches!(self, Sym::Eta | Sym::EtaP | Sym::Z)
    }

    pub fn name(self) -> &'static str {
        match self {
            Sym::WI => "wI",
            Sym::WD => "wD",
            Sym::WL => "wL",
            Sym::WT => "wT",
            Sym::WZ => "wz",
            Sym::S => "S",
            Sym::J => "J",
            Sym::Eta => "eta",
            Sym::EtaP => "etap",
            Sym::Z => "z",
        }
    }
}

/// Symbol exponents plus a squarefree radicand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymMono {
    pub e: [i16; NSYM],
    pub rad: u32,
}

impl SymMono {
    pub const ONE: SymMono = SymMono { e: [0; NSYM], rad: 1 };

    /// Exponent in natural units (`S^{1/2}` gives 0.5).
    pub fn exponent(&self, s: Sym) -> f64 {
        let v = self.e[s.index()] as f64;
        if s.doubled() {
            v / 2.0
        } else {
            v
        }
    }

    /// Doubled sum of the `S` and `J` exponents.
    pub fn sj2(&self) -> i32 {
        (self.e[Sym::S.index()] + self.e[Sym::J.index()]) as i32
    }

    pub fn j2(&self) -> i32 {
        self.e[Sym::J.index()] as i32
    }

    /// Lamb–Dicke order tag `pow(η) + 2·pow(η′)`.
    pub fn ld_tag(&self) -> i32 {
        (self.e[Sym::Eta.index()] + 2 * self.e[Sym::EtaP.index()]) as i32
    }

    /// Product; returns the new monomial and the integer pulled out of the radical.
    pub fn mul(&self, o: &SymMono) -> (SymMono, u32) {
        let mut e = [0i16; NSYM];
        for (k, v) in e.iter_mut().enumerate() {
            *v = self.e[k] + o.e[k];
        }
        let g = self.rad.gcd(&o.rad);
        (SymMono { e, rad: (self.rad / g) * (o.rad / g) }, g)
    }

    pub fn eval(&self, v: &SymValues) -> f64 {
        let mut x = (self.rad as f64).sqrt();
        for s in Sym::ALL {
            let e = self.exponent(s);
            if e != 0.0 {
                x *= v.get(s).powf(e);
            }
        }
        x
    }
}

/// Numeric values for every symbol (rad/s for frequencies).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymValues {
    pub v: [f64; NSYM],
}

impl SymValues {
    pub fn new() -> Self {
        SymValues { v: [1.0; NSYM] }
    }

    pub fn with(mut self, s: Sym, x: f64) -> Self {
        self.v[s.index()] = x;
        self
    }

    pub fn get(&self, s: Sym) -> f64 {
        self.v[s.index()]
    }
}

impl Default for SymValues {
    fn default() -> Self {
        Self::new()
    }
}

/// Sum of symbolic monomials with exact Gaussian-rational weights.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymCoeff {
    terms: BTreeMap<SymMono, CRat>,
}

fn squarefree(n: u32) -> (u32, u32) {
    let (mut n, mut out, mut rad, mut p) = (n, 1u32, 1u32, 2u32);
    while p * p <= n {
        while n % (p * p) == 0 {
            n /= p * p;
            out *= p;
        }
        if n % p == 0 {
            n /= p;
            rad *= p;
        }
        p += 1;
    }
    (out, rad * n)
}

impl SymCoeff {
    pub fn zero() -> Self {
        SymCoeff::default()
    }

    pub fn one() -> Self {
        Self::from_crat(crat_int(1))
    }

    pub fn from_crat(c: CRat) -> Self {
        let mut s = SymCoeff::zero();
        s.add_term(SymMono::ONE, c);
        s
    }

    pub fn int(n: i64) -> Self {
        Self::from_crat(crat_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_crat(crat((n, d), (0, 1)))
    }

    /// `i·q`.
    pub fn imag(n: i64, d: i64) -> Self {
        Self::from_crat(crat((0, 1), (n, d)))
    }

    /// `√n` (any positive integer; squares are pulled out).
    pub fn sqrt(n: u32) -> Self {
        let (out, rad) = squarefree(n);
        let mut s = SymCoeff::zero();
        s.add_term(SymMono { rad, ..SymMono::ONE }, crat_int(out as i64));
        s
    }

    /// `symbol^(twice/2)` for doubled symbols, `symbol^twice` otherwise.
    pub fn pow(s: Sym, stored: i16) -> Self {
        let mut m = SymMono::ONE;
        m.e[s.index()] = stored;
        let mut c = SymCoeff::zero();
        c.add_term(m, crat_int(1));
        c
    }

    /// Product of several symbol powers (stored units).
    pub fn pows(list: &[(Sym, i16)]) -> Self {
        list.iter().fold(SymCoeff::one(), |acc, &(s, e)| acc.mul(&SymCoeff::pow(s, e)))
    }

    pub fn add_term(&mut self, m: SymMono, c: CRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = &*v + c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SymMono, &CRat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &SymCoeff) -> SymCoeff {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &SymCoeff) -> SymCoeff {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SymCoeff {
        SymCoeff { terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect() }
    }

    pub fn conj(&self) -> SymCoeff {
        SymCoeff { terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect() }
    }

    pub fn mul(&self, o: &SymCoeff) -> SymCoeff {
        self.mul_filtered(o, &|_| true)
    }

    /// Product keeping only result monomials accepted by `keep`.
    pub fn mul_filtered(&self, o: &SymCoeff, keep: &dyn Fn(&SymMono) -> bool) -> SymCoeff {
        let mut r = SymCoeff::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let (m, g) = ma.mul(mb);
                if !keep(&m) {
                    continue;
                }
                let mut c = ca * cb;
                if g != 1 {
                    let gi = BigRational::from_integer(BigInt::from(g));
                    c = Complex::new(&c.re * &gi, &c.im * &gi);
                }
                r.add_term(m, c);
            }
        }
        r
    }

    pub fn scale_int(&self, k: u64) -> SymCoeff {
        if k == 1 {
            return self.clone();
        }
        let f = BigRational::from_integer(BigInt::from(k));
        SymCoeff { terms: self.terms.iter().map(|(m, c)| (*m, Complex::new(&c.re * &f, &c.im * &f))).collect() }
    }

    pub fn filter(&self, keep: impl Fn(&SymMono) -> bool) -> SymCoeff {
        SymCoeff { terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (*m, c.clone())).collect() }
    }

    pub fn eval(&self, v: &SymValues) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| Complex64::new(ratio_to_f64(&c.re), ratio_to_f64(&c.im)) * m.eval(v))
            .sum()
    }

    /// Largest doubled `S`+`J` exponent among the terms.
    pub fn max_sj2(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.sj2()).max()
    }

    /// The single term, if the coefficient is a monomial.
    pub fn as_monomial(&self) -> Option<(&SymMono, &CRat)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }
}

fn render_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn render_crat(c: &CRat) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => render_rat(&c.re),
        (true, false) => format!("{}i", render_rat(&c.im)),
        _ => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({}{}{}i)", render_rat(&c.re), sign, render_rat(&c.im.abs()))
        }
    }
}

impl fmt::Display for SymMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                f.write_char('*')?;
            }
            first = false;
            Ok(())
        };
        if self.rad > 1 {
            sep(f)?;
            write!(f, "sqrt({})", self.rad)?;
        }
        for s in Sym::ALL {
            let e = self.e[s.index()] as i32;
            if e == 0 {
                continue;
            }
            sep(f)?;
            f.write_str(s.name())?;
            if s.doubled() {
                match e {
                    2 => {}
                    e if e % 2 == 0 => write!(f, "^{}", e / 2)?,
                    e => write!(f, "^{e}/2")?,
                }
            } else if e != 1 {
                write!(f, "^{e}")?;
            }
        }
        if first {
            f.write_char('1')?;
        }
        Ok(())
    }
}

impl fmt::Display for SymCoeff {
    /// `q1*mono1 + q2*mono2 …` in monomial order; `0` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*{}", render_crat(c), m)?;
        }
        Ok(())
    }
}
