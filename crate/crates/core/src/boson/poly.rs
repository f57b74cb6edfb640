//! Normal-ordered multi-mode boson polynomials.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coeff::{SymCoeff, SymMono, SymValues};

/// Boson modes in canonical key order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeId {
    Cx,
    Cy,
    Cz,
    Br,
    Bl,
    J,
    S,
    K,
    M,
    D,
}

pub const NMODES: usize = 10;

impl ModeId {
    pub const ALL: [ModeId; NMODES] =
        [ModeId::Cx, ModeId::Cy, ModeId::Cz, ModeId::Br, ModeId::Bl, ModeId::J, ModeId::S, ModeId::K, ModeId::M, ModeId::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["c_x", "c_y", "c_z", "b_r", "b_l", "j", "s", "k", "m", "d"][self as usize]
    }
}

/// `Π_mode (a†)^p a^q` in normal order; `ex[2i]` creation, `ex[2i+1]` annihilation powers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub ex: [u8; 2 * NMODES],
}

impl Monomial {
    pub const ONE: Monomial = Monomial { ex: [0; 2 * NMODES] };

    pub fn cre(mode: ModeId, p: u8) -> Self {
        let mut m = Monomial::ONE;
        m.ex[2 * mode.index()] = p;
        m
    }

    pub fn ann(mode: ModeId, q: u8) -> Self {
        let mut m = Monomial::ONE;
        m.ex[2 * mode.index() + 1] = q;
        m
    }

    /// Builds a normal-ordered monomial from `(mode, creation power, annihilation power)`.
    pub fn from_powers(list: &[(ModeId, u8, u8)]) -> Self {
        let mut m = Monomial::ONE;
        for &(mode, p, q) in list {
            m.ex[2 * mode.index()] += p;
            m.ex[2 * mode.index() + 1] += q;
        }
        m
    }

    pub fn creations(&self, mode: ModeId) -> u8 {
        self.ex[2 * mode.index()]
    }

    pub fn annihilations(&self, mode: ModeId) -> u8 {
        self.ex[2 * mode.index() + 1]
    }

    pub fn degree(&self) -> u32 {
        self.ex.iter().map(|&x| x as u32).sum()
    }

    pub fn dagger(&self) -> Monomial {
        let mut m = Monomial::ONE;
        for i in 0..NMODES {
            m.ex[2 * i] = self.ex[2 * i + 1];
            m.ex[2 * i + 1] = self.ex[2 * i];
        }
        m
    }

    pub fn involves(&self, mode: ModeId) -> bool {
        self.creations(mode) + self.annihilations(mode) > 0
    }
}

impl fmt::Display for Monomial {
    /// `b_r† k m^2`: creations first, then annihilations, each in mode order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (off, mark) in [(0, "†"), (1, "")] {
            for mode in ModeId::ALL {
                let p = self.ex[2 * mode.index() + off];
                match p {
                    0 => {}
                    1 => parts.push(format!("{}{}", mode.name(), mark)),
                    p => parts.push(format!("{}{}^{}", mode.name(), mark, p)),
                }
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Filters applied to each product term as it is generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Prune {
    /// Keep coefficient monomials with doubled `S`+`J` exponent ≥ this.
    pub min_sj2: Option<i32>,
    /// Keep coefficient monomials with Lamb–Dicke tag ≤ this.
    pub max_ld_tag: Option<i32>,
    /// Keep operator monomials with degree ≤ this.
    pub max_degree: Option<u32>,
    /// Keep terms whose doubled `S`+`J` exponent plus operator degree is ≥
    /// this. Contractions lower that weight by 2, so it bounds what a term
    /// can still contribute to a leading-order result.
    pub min_weight: Option<i32>,
}

impl Prune {
    pub const NONE: Prune = Prune { min_sj2: None, max_ld_tag: None, max_degree: None, min_weight: None };

    fn keeps_coeff(&self, m: &SymMono) -> bool {
        self.min_sj2.is_none_or(|lo| m.sj2() >= lo) && self.max_ld_tag.is_none_or(|hi| m.ld_tag() <= hi)
    }
}

/// Map from normal-ordered monomials to exact symbolic coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BosonPolynomial {
    terms: BTreeMap<Monomial, SymCoeff>,
}

fn binom(n: u32, k: u32) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn factorial(k: u32) -> u64 {
    (1..=k as u64).product()
}

/// All normal-ordered monomials in `m1·m2`, with their integer multiplicities.
fn reorder(m1: &Monomial, m2: &Monomial) -> Vec<(Monomial, u64)> {
    let mut out = vec![(Monomial::ONE, 1u64)];
    for i in 0..NMODES {
        let (c1, a1) = (m1.ex[2 * i], m1.ex[2 * i + 1]);
        let (c2, a2) = (m2.ex[2 * i], m2.ex[2 * i + 1]);
        if a1 == 0 || c2 == 0 {
            for (m, _) in out.iter_mut() {
                m.ex[2 * i] = c1 + c2;
                m.ex[2 * i + 1] = a1 + a2;
            }
            continue;
        }
        // a^p (a†)^q = Σ_k C(p,k) C(q,k) k! (a†)^{q-k} a^{p-k}
        let mut next = Vec::with_capacity(out.len() * (a1.min(c2) as usize + 1));
        for k in 0..=a1.min(c2) {
            let f = binom(a1 as u32, k as u32) * binom(c2 as u32, k as u32) * factorial(k as u32);
            for (m, w) in &out {
                let mut m = *m;
                m.ex[2 * i] = c1 + c2 - k;
                m.ex[2 * i + 1] = a1 + a2 - k;
                next.push((m, w * f));
            }
        }
        out = next;
    }
    out
}

impl BosonPolynomial {
    pub fn zero() -> Self {
        BosonPolynomial::default()
    }

    pub fn constant(c: SymCoeff) -> Self {
        Self::term(Monomial::ONE, c)
    }

    pub fn one() -> Self {
        Self::constant(SymCoeff::one())
    }

    pub fn term(m: Monomial, c: SymCoeff) -> Self {
        let mut p = BosonPolynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn annihilator(mode: ModeId) -> Self {
        Self::term(Monomial::ann(mode, 1), SymCoeff::one())
    }

    pub fn creator(mode: ModeId) -> Self {
        Self::term(Monomial::cre(mode, 1), SymCoeff::one())
    }

    pub fn number(mode: ModeId) -> Self {
        Self::term(Monomial::from_powers(&[(mode, 1, 1)]), SymCoeff::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: SymCoeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v = v.add(&c);
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

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &SymCoeff)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> SymCoeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add(&self, o: &BosonPolynomial) -> BosonPolynomial {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &BosonPolynomial) -> BosonPolynomial {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> BosonPolynomial {
        BosonPolynomial { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn scale(&self, c: &SymCoeff) -> BosonPolynomial {
        let mut r = BosonPolynomial::zero();
        for (m, v) in &self.terms {
            r.add_term(*m, v.mul(c));
        }
        r
    }

    /// Exact normal-ordered product.
    pub fn mul(&self, o: &BosonPolynomial) -> BosonPolynomial {
        self.mul_pruned(o, &Prune::NONE)
    }

    /// Normal-ordered product keeping only terms accepted by `prune`.
    pub fn mul_pruned(&self, o: &BosonPolynomial, prune: &Prune) -> BosonPolynomial {
        let mut acc: BTreeMap<Monomial, SymCoeff> = BTreeMap::new();
        let keep = |m: &SymMono| prune.keeps_coeff(m);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let reordered = reorder(m1, m2);
                let live: Vec<_> =
                    reordered.into_iter().filter(|(m, _)| prune.max_degree.is_none_or(|d| m.degree() <= d)).collect();
                if live.is_empty() {
                    continue;
                }
                let c = c1.mul_filtered(c2, &keep);
                if c.is_zero() {
                    continue;
                }
                for (m, w) in live {
                    let add = match prune.min_weight {
                        Some(lo) => {
                            let d = m.degree() as i32;
                            let kept = c.filter(|s| s.sj2() + d >= lo);
                            if kept.is_zero() {
                                continue;
                            }
                            kept.scale_int(w)
                        }
                        None => c.scale_int(w),
                    };
                    match acc.get_mut(&m) {
                        Some(v) => *v = v.add(&add),
                        None => {
                            acc.insert(m, add);
                        }
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        BosonPolynomial { terms: acc }
    }

    /// Product of several factors in the written order.
    pub fn product(factors: &[&BosonPolynomial], prune: &Prune) -> BosonPolynomial {
        let mut out = BosonPolynomial::one();
        for f in factors {
            out = out.mul_pruned(f, prune);
        }
        out
    }

    pub fn commutator(&self, o: &BosonPolynomial) -> BosonPolynomial {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn dagger(&self) -> BosonPolynomial {
        BosonPolynomial { terms: self.terms.iter().map(|(m, c)| (m.dagger(), c.conj())).collect() }
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.dagger()
    }

    /// Keeps coefficient terms accepted by `keep(monomial, coefficient monomial)`.
    pub fn filter(&self, keep: impl Fn(&Monomial, &SymMono) -> bool) -> BosonPolynomial {
        let mut r = BosonPolynomial::zero();
        for (m, c) in &self.terms {
            r.add_term(*m, c.filter(|s| keep(m, s)));
        }
        r
    }

    /// Largest doubled `S`+`J` exponent plus degree over all terms.
    pub fn max_weight(&self) -> Option<i32> {
        self.terms.iter().filter_map(|(m, c)| c.max_sj2().map(|w| w + m.degree() as i32)).max()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Numeric coefficients at the given symbol values.
    pub fn eval(&self, v: &SymValues) -> BTreeMap<Monomial, Complex64> {
        self.terms.iter().map(|(m, c)| (*m, c.eval(v))).collect()
    }

    /// Dense matrix on the truncated Fock space of `modes` (each with its
    /// number of levels; first mode slowest). Other modes must not appear.
    pub fn to_fock_matrix(&self, modes: &[(ModeId, usize)], v: &SymValues) -> Option<DMatrix<Complex64>> {
        let dim: usize = modes.iter().map(|&(_, d)| d).product();
        let mut out = DMatrix::zeros(dim, dim);
        for (m, c) in &self.terms {
            if ModeId::ALL.iter().any(|&x| m.involves(x) && !modes.iter().any(|&(y, _)| y == x)) {
                return None;
            }
            let c = c.eval(v);
            'col: for col in 0..dim {
                let mut rest = col;
                let mut occ = vec![0usize; modes.len()];
                for (slot, &(_, d)) in modes.iter().enumerate().rev() {
                    occ[slot] = rest % d;
                    rest /= d;
                }
                let mut amp = 1.0f64;
                for (slot, &(mode, d)) in modes.iter().enumerate() {
                    let (p, q) = (m.creations(mode) as usize, m.annihilations(mode) as usize);
                    let n = occ[slot];
                    if q > n || n - q + p >= d {
                        continue 'col;
                    }
                    for x in (n - q + 1)..=n {
                        amp *= (x as f64).sqrt();
                    }
                    for x in (n - q + 1)..=(n - q + p) {
                        amp *= (x as f64).sqrt();
                    }
                    occ[slot] = n - q + p;
                }
                let row = modes.iter().zip(&occ).fold(0, |acc, (&(_, d), &o)| acc * d + o);
                out[(row, col)] += c * amp;
            }
        }
        Some(out)
    }

    /// Documented text form: one line `monomial : coefficient` per term, in
    /// canonical monomial order (mode order c_x … d, creations before
    /// annihilations). Coefficients are `q*mono` sums with exact rationals,
    /// `sqrt(r)` radicals and `sym^e` powers.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            let _ = writeln!(s, "{m} : {c}");
        }
        s
    }
}

impl fmt::Display for BosonPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModeId::*;

    fn a(m: ModeId) -> BosonPolynomial {
        BosonPolynomial::annihilator(m)
    }
    fn ad(m: ModeId) -> BosonPolynomial {
        BosonPolynomial::creator(m)
    }

    #[test]
    fn single_mode_commutator() {
        let p = a(Cx).mul(&ad(Cx));
        let want = BosonPolynomial::number(Cx).add(&BosonPolynomial::one());
        assert_eq!(p, want);
    }

    #[test]
    fn number_squared() {
        let n = BosonPolynomial::number(S);
        let want = BosonPolynomial::term(Monomial::from_powers(&[(S, 2, 2)]), SymCoeff::one()).add(&n);
        assert_eq!(n.mul(&n), want);
    }

    #[test]
    fn distinct_modes_commute() {
        let p = a(K).mul(&ad(M));
        assert_eq!(p, BosonPolynomial::term(Monomial::from_powers(&[(M, 1, 0), (K, 0, 1)]), SymCoeff::one()));
        assert_eq!(p.to_text(), "m† k : 1*1\n");
    }

    #[test]
    fn triple_reordering() {
        // a a a† a† = a†² a² + 4 a† a + 2
        let p = BosonPolynomial::product(&[&a(J), &a(J), &ad(J), &ad(J)], &Prune::NONE);
        let want = BosonPolynomial::term(Monomial::from_powers(&[(J, 2, 2)]), SymCoeff::one())
            .add(&BosonPolynomial::number(J).scale(&SymCoeff::int(4)))
            .add(&BosonPolynomial::constant(SymCoeff::int(2)));
        assert_eq!(p, want);
    }

    #[test]
    fn dagger_is_involution() {
        let p = a(K).mul(&ad(M)).scale(&SymCoeff::imag(1, 3)).add(&ad(S).mul(&ad(S)));
        assert_eq!(p.dagger().dagger(), p);
        assert!(!p.is_hermitian());
        assert!(p.add(&p.dagger()).is_hermitian());
    }
}
