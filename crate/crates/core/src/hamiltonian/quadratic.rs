use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{FrequencySet, HamiltonianError};
use crate::boson::{BosonPolynomial, ModeId, Monomial, Sym, SymCoeff, SymValues};

/// Mode order of the quadratic Hamiltonian.
pub const HG_MODES: [ModeId; 7] = [ModeId::Br, ModeId::Bl, ModeId::Cz, ModeId::S, ModeId::J, ModeId::K, ModeId::M];

fn p(list: &[(Sym, i16)]) -> SymCoeff {
    SymCoeff::pows(list)
}

/// Symbolic couplings of the reference quadratic Hamiltonian, keyed by name.
pub fn reference_couplings() -> Vec<(&'static str, SymCoeff)> {
    use Sym::*;
    let j_over_s = p(&[(J, 2), (S, -2)]);
    let s_over_j = p(&[(S, 2), (J, -2)]);
    let root_s_over_j = p(&[(S, 1), (J, -1)]);
    let wi = p(&[(WI, 2)]);
    let wd = p(&[(WD, 2)]);
    let wt = p(&[(WT, 2)]);
    let eta = p(&[(Eta, 1)]);
    let j_over_s_minus_1 = j_over_s.sub(&SymCoeff::one());
    let omega_m = wd.mul(&s_over_j).scale_int(8);
    let g_m = wd.mul(&root_s_over_j).scale_int(4);
    let eight_wd = wd.scale_int(8);
    let two_wt = wt.scale_int(2);
    vec![
        ("delta", p(&[(WL, 2)]).sub(&wd.scale_int(2)).sub(&wi.mul(&j_over_s))),
        ("omega_k", wi.add(&omega_m)),
        ("omega_m", omega_m.clone()),
        ("omega_j", wi.mul(&j_over_s_minus_1).mul(&SymCoeff::ratio(1, 2))),
        ("xi1", SymCoeff::sqrt(2).mul(&p(&[(J, 1)])).mul(&SymCoeff::ratio(1, 2)).mul(&wi).mul(&j_over_s_minus_1)),
        ("xi2", wi.mul(&j_over_s).mul(&SymCoeff::ratio(1, 4))),
        ("g_k", wi.mul(&p(&[(J, 1), (S, -1)])).add(&g_m)),
        ("g_m", g_m),
        ("g_r", eta.mul(&eight_wd.add(&two_wt)).mul(&root_s_over_j)),
        ("g_l", eta.mul(&eight_wd.sub(&two_wt)).mul(&root_s_over_j)),
        ("g_s", wt.mul(&eta).scale_int(2)),
        ("omega_r", wt.clone()),
        ("omega_l", wt),
        ("omega_z", p(&[(WZ, 2)])),
    ]
}

fn mono(list: &[(ModeId, u8, u8)]) -> Monomial {
    Monomial::from_powers(list)
}

/// The reference quadratic Hamiltonian as `(monomial, coupling name, factor)`.
fn hg_structure() -> Vec<(Monomial, &'static str, SymCoeff)> {
    use ModeId::{Bl, Br, Cz, J, K, M, S};
    let one = SymCoeff::one;
    let neg = || SymCoeff::int(-1);
    let mut t = vec![
        (mono(&[(Br, 1, 1)]), "omega_r", one()),
        (mono(&[(Bl, 1, 1)]), "omega_l", one()),
        (mono(&[(Cz, 1, 1)]), "omega_z", one()),
        (mono(&[(S, 1, 1)]), "delta", neg()),
        (mono(&[(J, 1, 1)]), "omega_j", one()),
        (mono(&[(J, 1, 0)]), "xi1", one()),
        (mono(&[(J, 0, 1)]), "xi1", one()),
        // ξ2 (ĵ† + ĵ)² = ξ2 (ĵ†² + ĵ² + 2ĵ†ĵ + 1)
        (mono(&[(J, 2, 0)]), "xi2", one()),
        (mono(&[(J, 0, 2)]), "xi2", one()),
        (mono(&[(J, 1, 1)]), "xi2", SymCoeff::int(2)),
        (Monomial::ONE, "xi2", one()),
        (mono(&[(M, 1, 1)]), "omega_m", one()),
        (mono(&[(K, 1, 1)]), "omega_k", one()),
        (mono(&[(K, 1, 0), (M, 1, 0)]), "omega_m", neg()),
        (mono(&[(K, 0, 1), (M, 0, 1)]), "omega_m", neg()),
        (mono(&[(S, 1, 0), (K, 1, 0)]), "g_k", one()),
        (mono(&[(S, 0, 1), (K, 0, 1)]), "g_k", one()),
        (mono(&[(S, 1, 0), (M, 0, 1)]), "g_m", neg()),
        (mono(&[(S, 0, 1), (M, 1, 0)]), "g_m", neg()),
    ];
    // g_l b_l (m† − k) + g_r b_r† (m† − k) − g_s s† (b_r† − b_l), plus h.c.
    let vb = [
        (mono(&[(Bl, 0, 1), (M, 1, 0)]), "g_l", one()),
        (mono(&[(Bl, 0, 1), (K, 0, 1)]), "g_l", neg()),
        (mono(&[(Br, 1, 0), (M, 1, 0)]), "g_r", one()),
        (mono(&[(Br, 1, 0), (K, 0, 1)]), "g_r", neg()),
        (mono(&[(S, 1, 0), (Br, 1, 0)]), "g_s", neg()),
        (mono(&[(S, 1, 0), (Bl, 0, 1)]), "g_s", one()),
    ];
    for (m, name, c) in vb {
        t.push((m.dagger(), name, c.conj()));
        t.push((m, name, c));
    }
    t
}

/// The quadratic Hamiltonian (in rad/s) with symbolic reference couplings.
pub fn quadratic_hg_polynomial() -> BosonPolynomial {
    let table: std::collections::BTreeMap<_, _> = reference_couplings().into_iter().collect();
    let mut out = BosonPolynomial::zero();
    for (m, name, f) in hg_structure() {
        out.add_term(m, f.mul(&table[name]));
    }
    out
}

/// Quadratic form `H = Σ A_ij a_i† a_j + ½ Σ (B_ij a_i† a_j† + h.c.)
/// + Σ (f_i a_i† + h.c.) + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBosonForm {
    pub modes: Vec<ModeId>,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
    pub f: DVector<Complex64>,
    pub constant: Complex64,
}

impl QuadraticBosonForm {
    pub fn zeros(modes: &[ModeId]) -> Self {
        let n = modes.len();
        QuadraticBosonForm {
            modes: modes.to_vec(),
            a: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            f: DVector::zeros(n),
            constant: Complex64::new(0.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Reads a polynomial of degree ≤ 2 in the given modes.
    pub fn from_polynomial(poly: &BosonPolynomial, modes: &[ModeId], v: &SymValues) -> Result<Self, HamiltonianError> {
        let mut q = Self::zeros(modes);
        for (mono, coef) in poly.terms() {
            q.add_monomial(mono, coef.eval(v))?;
        }
        // annihilation-only terms are the conjugates of the ones read above
        let herm = QuadraticBosonForm::hermiticity_of(poly, v);
        if herm > 1e-9 * (1.0 + q.scale()) {
            return Err(HamiltonianError::Form(format!("polynomial is not Hermitian (residual {herm:e})")));
        }
        Ok(q)
    }

    /// Adds `c · mono`; annihilation-only monomials are skipped because the
    /// form stores them implicitly as conjugates.
    fn add_monomial(&mut self, mono: &Monomial, c: Complex64) -> Result<(), HamiltonianError> {
        let mut cre = Vec::new();
        let mut ann = Vec::new();
        for mode in ModeId::ALL {
            let (pc, pa) = (mono.creations(mode), mono.annihilations(mode));
            if pc + pa == 0 {
                continue;
            }
            let i = self
                .modes
                .iter()
                .position(|&x| x == mode)
                .ok_or_else(|| HamiltonianError::Form(format!("mode {} not in the form", mode.name())))?;
            cre.extend(std::iter::repeat_n(i, pc as usize));
            ann.extend(std::iter::repeat_n(i, pa as usize));
        }
        match (cre.as_slice(), ann.as_slice()) {
            ([], []) => self.constant += c,
            ([i], []) => self.f[*i] += c,
            ([i], [j]) => self.a[(*i, *j)] += c,
            ([i, j], []) if i == j => self.b[(*i, *i)] += 2.0 * c,
            ([i, j], []) => {
                self.b[(*i, *j)] += c;
                self.b[(*j, *i)] += c;
            }
            ([], [_]) | ([], [_, _]) => {}
            _ => return Err(HamiltonianError::Form(format!("term {mono} is beyond quadratic"))),
        }
        Ok(())
    }

    fn hermiticity_of(poly: &BosonPolynomial, v: &SymValues) -> f64 {
        let dag = poly.dagger();
        let mut worst: f64 = 0.0;
        for (m, c) in poly.terms() {
            worst = worst.max((c.eval(v) - dag.coefficient(m).eval(v)).norm());
        }
        for (m, c) in dag.terms() {
            worst = worst.max((c.eval(v) - poly.coefficient(m).eval(v)).norm());
        }
        worst
    }

    fn scale(&self) -> f64 {
        let m = |x: &DMatrix<Complex64>| x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        m(&self.a).max(m(&self.b))
    }

    /// Doubled Hermitian matrix `[[A, B], [B*, A*]]` over `(a, a†)`.
    pub fn doubled_matrix(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.a);
        h.view_mut((0, n), (n, n)).copy_from(&self.b);
        h.view_mut((n, 0), (n, n)).copy_from(&self.b.conjugate());
        h.view_mut((n, n), (n, n)).copy_from(&self.a.conjugate());
        h
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let h = self.doubled_matrix();
        (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Same Hamiltonian with the modes listed in a different order.
    pub fn relabel(&self, order: &[usize]) -> Self {
        let n = order.len();
        QuadraticBosonForm {
            modes: order.iter().map(|&i| self.modes[i]).collect(),
            a: DMatrix::from_fn(n, n, |i, j| self.a[(order[i], order[j])]),
            b: DMatrix::from_fn(n, n, |i, j| self.b[(order[i], order[j])]),
            f: DVector::from_fn(n, |i, _| self.f[order[i]]),
            constant: self.constant,
        }
    }

    /// Sub-form on `keep`; fails when a dropped mode is coupled to a kept one.
    pub fn restrict(&self, keep: &[ModeId]) -> Result<Self, HamiltonianError> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|m| self.modes.iter().position(|x| x == m).ok_or_else(|| HamiltonianError::Form(format!("mode {} absent", m.name()))))
            .collect::<Result<_, _>>()?;
        for &i in &idx {
            for j in 0..self.dim() {
                if idx.contains(&j) {
                    continue;
                }
                if self.a[(i, j)].norm() > 0.0 || self.b[(i, j)].norm() > 0.0 {
                    return Err(HamiltonianError::Form(format!(
                        "mode {} couples to dropped mode {}",
                        self.modes[i].name(),
                        self.modes[j].name()
                    )));
                }
            }
        }
        Ok(self.relabel(&idx))
    }
}

/// The reference quadratic Hamiltonian evaluated at the numeric couplings of
/// `freqs` (so individual couplings may be overridden in `freqs.couplings`).
pub fn build_quadratic_hg(freqs: &FrequencySet) -> QuadraticBosonForm {
    let mut q = QuadraticBosonForm::zeros(&HG_MODES);
    let unit = SymValues::new();
    for (m, name, f) in hg_structure() {
        let v = freqs.coupling(name);
        let v = if v.is_nan() { 0.0 } else { v };
        q.add_monomial(&m, f.eval(&unit) * v).expect("reference form is quadratic in its own modes");
    }
    q
}
