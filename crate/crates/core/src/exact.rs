//! Exact signed square roots of rationals and their linear combinations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `sign · √rational_square`; the zero coefficient has `sign == 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCoeff {
    pub sign: i8,
    pub rational_square: BigRational,
}

impl ExactCoeff {
    pub fn zero() -> Self {
        ExactCoeff { sign: 0, rational_square: BigRational::zero() }
    }

    pub fn one() -> Self {
        ExactCoeff { sign: 1, rational_square: BigRational::one() }
    }

    /// `sign · √square`; `square` must be non-negative.
    pub fn new(sign: i8, square: BigRational) -> Self {
        assert!(!square.is_negative(), "negative square");
        if sign == 0 || square.is_zero() {
            return Self::zero();
        }
        ExactCoeff { sign: sign.signum(), rational_square: square }
    }

    /// The rational `q`, stored as `sign(q)·√(q²)`.
    pub fn from_rational(q: BigRational) -> Self {
        let s = if q.is_negative() { -1 } else { 1 };
        let sq = &q * &q;
        Self::new(s, sq)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * ratio_to_f64(&self.rational_square).sqrt()
    }

    /// The exact square, a rational.
    pub fn squared(&self) -> BigRational {
        self.rational_square.clone()
    }

    pub fn to_surd(&self) -> Surd {
        if self.is_zero() {
            return Surd::zero();
        }
        let (out, rad) = sqrt_split(&self.rational_square);
        let mut s = Surd::zero();
        let c = if self.sign < 0 { -out } else { out };
        s.add_term(rad, c);
        s
    }
}

impl Mul for &ExactCoeff {
    type Output = ExactCoeff;
    fn mul(self, o: &ExactCoeff) -> ExactCoeff {
        ExactCoeff::new(self.sign * o.sign, &self.rational_square * &o.rational_square)
    }
}

impl fmt::Display for ExactCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}sqrt({})", if s < 0 { "-" } else { "" }, self.rational_square),
        }
    }
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    // Keep the top 64 bits of each operand and carry the binary exponent.
    let ns = (q.numer().bits() as i64 - 64).max(0);
    let ds = (q.denom().bits() as i64 - 64).max(0);
    let n = (q.numer() >> ns as usize).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> ds as usize).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi((ns - ds) as i32)
}

/// Squarefree decomposition `√q = outside · √radicand` for `q ≥ 0`.
pub fn sqrt_split(q: &BigRational) -> (BigRational, BigUint) {
    assert!(!q.is_negative());
    if q.is_zero() {
        return (BigRational::zero(), BigUint::one());
    }
    // √(n/d) = √(n·d)/d
    let n = q.numer().magnitude().clone();
    let d = q.denom().magnitude().clone();
    let (sq, rad) = squarefree_uint(&(&n * &d));
    let out = BigRational::new(BigInt::from(sq), BigInt::from(d));
    (out, rad)
}

/// Writes `n = a² · r` with `r` squarefree over primes below the trial bound.
fn squarefree_uint(n: &BigUint) -> (BigUint, BigUint) {
    let mut rem = n.clone();
    let mut outside = BigUint::one();
    let mut rad = BigUint::one();
    let mut p = 2u32;
    while p < 20_000 {
        let bp = BigUint::from(p);
        if &bp * &bp > rem {
            break;
        }
        let mut e = 0u32;
        loop {
            let (qq, r) = rem.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rem = qq;
            e += 1;
        }
        if e > 0 {
            outside *= bp.pow(e / 2);
            if e % 2 == 1 {
                rad *= &bp;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rem > BigUint::one() {
        let s = rem.sqrt();
        if &s * &s == rem {
            outside *= s;
        } else {
            rad *= rem;
        }
    }
    (outside, rad)
}

/// Exact linear combination `Σ q_r √r` over squarefree radicands `r`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<BigUint, BigRational>,
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn rational(q: BigRational) -> Self {
        let mut s = Surd::zero();
        s.add_term(BigUint::one(), q);
        s
    }

    fn add_term(&mut self, rad: BigUint, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(rad.clone()).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&rad);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value, if the combination has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| ratio_to_f64(c) * r.to_f64().unwrap().sqrt())
            .sum()
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        let mut s = self.clone();
        for (r, c) in &o.terms {
            s.add_term(r.clone(), c.clone());
        }
        s
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { terms: self.terms.iter().map(|(r, c)| (r.clone(), -c)).collect() }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        let mut s = Surd::zero();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &o.terms {
                let g = ra.gcd(rb);
                let rad = (ra / &g) * (rb / &g);
                let c = ca * cb * BigRational::from_integer(BigInt::from(g));
                s.add_term(rad, c);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn split_of_eight_thirds() {
        // √(8/3) = (2/3)√6
        let (o, r) = sqrt_split(&q(8, 3));
        assert_eq!(o, q(2, 3));
        assert_eq!(r, BigUint::from(6u32));
    }

    #[test]
    fn surd_products_reduce() {
        let a = ExactCoeff::new(1, q(2, 3)).to_surd();
        let b = ExactCoeff::new(-1, q(3, 2)).to_surd();
        assert_eq!((&a * &b).as_rational(), Some(q(-1, 1)));
    }

    #[test]
    fn huge_ratio_to_float() {
        let big = BigRational::new(BigInt::from(10).pow(400u32), BigInt::from(3) * BigInt::from(10).pow(399u32));
        assert!((ratio_to_f64(&big) - 10.0 / 3.0).abs() < 1e-12);
    }
}
