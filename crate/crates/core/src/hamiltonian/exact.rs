//! The Hamiltonian on the truncated rotor ⊗ macrospin ⊗ centre-of-mass
//! space, exact in angular momentum and expanded in Lamb–Dicke order.
//!
//! Products of D-operators are formed in a basis padded by two `J` shells
//! (and centre-of-mass Fock levels) and projected afterwards, so matrix
//! elements inside the kept space are those of the untruncated operators.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{FrequencySet, HamiltonianError};
use crate::boson::{Sym, SymCoeff, SymValues};
use crate::rotor::{build_angular_operator, build_d_operator_cached, AngularOp, CgCache, Rep2Basis, Rep2State};
use crate::sparse::SparseOp;
use crate::trap::{body_frame_n, n_jet, BodyComp, Deriv, FieldJet};
use crate::HalfInt;

/// Which parts of the Hamiltonian to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Include {
    pub h0: bool,
    pub hi: bool,
    pub vd: bool,
    pub vp: bool,
}

impl Include {
    pub const ALL: Include = Include { h0: true, hi: true, vd: true, vp: true };
    pub const NONE: Include = Include { h0: false, hi: false, vd: false, vp: false };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSpec {
    pub jmax: HalfInt,
    pub mj_block: Option<HalfInt>,
    /// Restrict to `kJ + kS = K` (conserved by every term).
    pub k_sector: Option<HalfInt>,
    /// Fock levels kept for `c_x, c_y, c_z`; 1 removes the mode.
    pub fock_levels: [usize; 3],
    pub lamb_dicke_order: u32,
    pub include: Include,
}

impl ExactSpec {
    /// Angular-only model (no centre-of-mass modes) at Lamb–Dicke order 0.
    pub fn angular(jmax: HalfInt, mj_block: Option<HalfInt>, include: Include) -> Self {
        ExactSpec { jmax, mj_block, k_sector: None, fock_levels: [1; 3], lamb_dicke_order: 0, include }
    }

    fn has_cm(&self) -> bool {
        self.fock_levels.iter().any(|&n| n > 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductState {
    pub angular: Rep2State,
    pub fock: [usize; 3],
}

impl ProductState {
    /// Conserved body projection `kJ + kS`.
    pub fn k_total(&self) -> HalfInt {
        self.angular.kj + self.angular.ks
    }
}

impl fmt::Display for ProductState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |{} {} {}>", self.angular, self.fock[0], self.fock[1], self.fock[2])
    }
}

/// Hermitian operator in rad/s with its basis labels.
#[derive(Clone, Debug)]
pub struct ExactHamiltonian {
    pub op: SparseOp,
    pub states: Vec<ProductState>,
    pub basis_hash: String,
    /// `max |H − H†|` before symmetrization.
    pub hermiticity_residual: f64,
}

impl ExactHamiltonian {
    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// Operator split by Lamb–Dicke tag; products drop tags above the order.
#[derive(Clone, Debug)]
struct Graded(Vec<SparseOp>);

impl Graded {
    fn zero(dim: usize, order: usize) -> Self {
        Graded(vec![SparseOp::zeros(dim); order + 1])
    }

    fn tag0(op: SparseOp, order: usize) -> Self {
        let dim = op.dim();
        let mut g = Graded::zero(dim, order);
        g.0[0] = op;
        g
    }

    fn add(&self, o: &Graded) -> Graded {
        Graded(self.0.iter().zip(&o.0).map(|(a, b)| a.add(b)).collect())
    }

    fn sub(&self, o: &Graded) -> Graded {
        Graded(self.0.iter().zip(&o.0).map(|(a, b)| a.sub(b)).collect())
    }

    fn scale(&self, c: Complex64) -> Graded {
        Graded(self.0.iter().map(|a| a.scale(c)).collect())
    }

    fn mul(&self, o: &Graded) -> Graded {
        let order = self.0.len() - 1;
        let mut out = Graded::zero(self.0[0].dim(), order);
        for (i, a) in self.0.iter().enumerate() {
            if a.nnz() == 0 {
                continue;
            }
            for (j, b) in o.0.iter().enumerate().take(order + 1 - i) {
                if b.nnz() > 0 {
                    out.0[i + j] = out.0[i + j].add(&a.mul(b));
                }
            }
        }
        out
    }

    fn restrict(&self, idx: &[usize]) -> Graded {
        Graded(self.0.iter().map(|a| a.restrict(idx)).collect())
    }

    fn total(&self) -> SparseOp {
        self.0.iter().skip(1).fold(self.0[0].clone(), |acc, a| acc.add(a))
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ladder_matrix(levels: usize) -> SparseOp {
    let t = (1..levels).map(|n| (n - 1, n, re((n as f64).sqrt()))).collect();
    SparseOp::from_triplets(levels, t)
}

/// Padded spaces and the operators living on them.
struct Space {
    basis: Rep2Basis,
    cm_levels: [usize; 3],
    cm_dim: usize,
    order: usize,
    values: SymValues,
    spin: f64,
    cache: CgCache,
    d_ops: BTreeMap<(i32, i32), SparseOp>,
}

impl Space {
    fn dim(&self) -> usize {
        self.basis.dim() * self.cm_dim
    }

    fn lift_angular(&self, a: &SparseOp) -> SparseOp {
        if self.cm_dim == 1 {
            a.clone()
        } else {
            a.kron(&SparseOp::identity(self.cm_dim))
        }
    }

    fn angular(&self, op: AngularOp) -> Result<SparseOp, HamiltonianError> {
        Ok(self.lift_angular(&build_angular_operator(&self.basis, op)?))
    }

    fn d(&mut self, m: i32, k: i32) -> Result<SparseOp, HamiltonianError> {
        if let Some(op) = self.d_ops.get(&(m, k)) {
            return Ok(op.clone());
        }
        if self.basis.mj_block().is_some() && m != 0 {
            return Err(HamiltonianError::Truncation(format!(
                "D^1_{{{m},{k}}} leaves the mJ block; drop the centre-of-mass modes or the block"
            )));
        }
        let raw = build_d_operator_cached(&self.basis, HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), &mut self.cache)?;
        let op = self.lift_angular(&raw);
        self.d_ops.insert((m, k), op.clone());
        Ok(op)
    }

    /// `c_ν` on the full padded space (zero when the mode is absent).
    fn cm_lowering(&self, nu: usize) -> SparseOp {
        if self.cm_levels[nu] <= 1 {
            return SparseOp::zeros(self.dim());
        }
        let mut op = SparseOp::identity(self.basis.dim());
        for mu in 0..3 {
            let f = if mu == nu { ladder_matrix(self.cm_levels[mu]) } else { SparseOp::identity(self.cm_levels[mu]) };
            op = op.kron(&f);
        }
        op
    }

    /// `(c+c†, c†−c)` for axis `nu`.
    fn quadratures(&self, nu: usize) -> (SparseOp, SparseOp) {
        let c = self.cm_lowering(nu);
        let cd = c.adjoint();
        (c.add(&cd), cd.sub(&c))
    }

    /// Position `r_ν` in units of the transverse length `z` (set to 1).
    fn position(&self, nu: usize) -> SparseOp {
        let zr = if nu < 2 { 1.0 } else { (self.values.get(Sym::WT) / self.values.get(Sym::WZ)).sqrt() };
        self.quadratures(nu).0.scale_re(zr / self.spin.sqrt())
    }

    /// Splits a symbolic weight by Lamb–Dicke tag and multiplies `op` in.
    fn graded_term(&self, w: &SymCoeff, op: &SparseOp) -> Graded {
        let mut g = Graded::zero(self.dim(), self.order);
        for (mono, q) in w.terms() {
            let tag = mono.ld_tag() as usize;
            if tag > self.order {
                continue;
            }
            let mut one = SymCoeff::zero();
            one.add_term(*mono, q.clone());
            g.0[tag] = g.0[tag].axpby(re(1.0), op, one.eval(&self.values));
        }
        g
    }

    fn taylor(&self, d: Deriv) -> Option<SparseOp> {
        let r: Vec<SparseOp> = (0..3).map(|nu| self.position(nu)).collect();
        let live = |nu: usize| self.cm_levels[nu] > 1;
        let (a, b) = match d {
            Deriv::Value => return Some(SparseOp::identity(self.dim())),
            Deriv::X => return live(0).then(|| r[0].clone()),
            Deriv::Y => return live(1).then(|| r[1].clone()),
            Deriv::Z => return live(2).then(|| r[2].clone()),
            Deriv::XX => (0, 0),
            Deriv::YY => (1, 1),
            Deriv::ZZ => (2, 2),
            Deriv::XY => (0, 1),
            Deriv::XZ => (0, 2),
            Deriv::YZ => (1, 2),
        };
        if !(live(a) && live(b)) {
            return None;
        }
        let p = r[a].mul(&r[b]);
        Some(if a == b { p.scale_re(0.5) } else { p })
    }

    /// Body components of `Σ_d (∂_d ñ)(0) · taylor(d)` for the given derivatives.
    fn field(&mut self, jet: &FieldJet, terms: &[(Deriv, Option<SparseOp>)]) -> Result<[Graded; 3], HamiltonianError> {
        let mut out = Vec::new();
        for c in [BodyComp::Three, BodyComp::Up, BodyComp::Down] {
            let mut acc = Graded::zero(self.dim(), self.order);
            for (d, factor) in terms {
                let Some(factor) = factor else { continue };
                for (m, k, w) in body_frame_n(jet, *d, c) {
                    if w.terms().all(|(s, _)| s.ld_tag() as usize > self.order) {
                        continue;
                    }
                    let dop = self.d(m, k)?;
                    let op = if d.order() == 0 { dop } else { dop.mul(factor) };
                    acc = acc.add(&self.graded_term(&w, &op));
                }
            }
            out.push(acc);
        }
        Ok(out.try_into().expect("three components"))
    }
}

/// `(u × v)·S` with body components `(3, ↑, ↓)`.
fn cross_dot(u: &[Graded; 3], v: &[Graded; 3], s: &[Graded; 3]) -> Graded {
    let [u3, uu, ud] = u;
    let [v3, vu, vd] = v;
    let [s3, sup, sdn] = s;
    let t1 = uu.mul(v3).sub(&u3.mul(vu)).mul(sdn);
    let t2 = ud.mul(v3).sub(&u3.mul(vd)).mul(sup);
    let t3 = ud.mul(vu).sub(&uu.mul(vd)).mul(s3);
    t1.sub(&t2).add(&t3).scale(Complex64::new(0.0, 0.5))
}

fn hash_states(states: &[ProductState], spec: &ExactSpec, spin: HalfInt) -> String {
    let mut h = Sha256::new();
    h.update(format!(
        "exact;S={spin};Jmax={};block={:?};K={:?};fock={:?};dim={}",
        spec.jmax,
        spec.mj_block.map(|b| b.twice()),
        spec.k_sector.map(|k| k.twice()),
        spec.fock_levels,
        states.len()
    ));
    h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
}

/// Assembles the selected terms (rad/s):
/// `H0 = ω_I/(2S)(J² + 2J3S3) − (ω_D/S)S3² + ω_L S3` plus the harmonic
/// centre-of-mass terms `−(ω_ν/4)(c†−c)² + (S3/S)(ω_ν/4)(c+c†)²`;
/// `V_I = ω_I/(2S)(J↑S↓ + J↓S↑)`; `V_D = (ω_D/S)(S3² − B²)` with
/// `B = S3(1 − 2n3²) − n3(n↑S↓ + n↓S↑)`; `V_P = −(ħ/M)Σ(p𝒜 + 𝒜p) + 2(ħ/M)Σ𝒜²`
/// with `𝒜_ν = (ñ × ∂_ν ñ)·S`. The spin is `freqs.spin`.
pub fn build_exact_hamiltonian(freqs: &FrequencySet, spec: &ExactSpec) -> Result<ExactHamiltonian, HamiltonianError> {
    let spin = freqs.spin;
    if spec.fock_levels.contains(&0) {
        return Err(HamiltonianError::Truncation("Fock cutoffs must keep at least the vacuum".into()));
    }
    if spec.lamb_dicke_order > 2 {
        return Err(HamiltonianError::Truncation(format!(
            "Lamb-Dicke order {} is beyond the field jet (max 2)",
            spec.lamb_dicke_order
        )));
    }
    if spec.include.vp && !spec.has_cm() {
        return Err(HamiltonianError::Truncation("V_P needs at least one centre-of-mass mode".into()));
    }
    if spec.jmax < spin.abs() && spec.mj_block.is_none() {
        return Err(HamiltonianError::Truncation(format!("Jmax = {} is below S = {spin}", spec.jmax)));
    }
    let order = spec.lamb_dicke_order as usize;
    let j_pad = HalfInt::int(2);
    let basis = Rep2Basis::new(spin, spec.jmax + j_pad, spec.mj_block)?;
    let cm_pad = 2 * order.max(1);
    let cm_levels = spec.fock_levels.map(|n| if n > 1 { n + cm_pad } else { 1 });
    let cm_dim = cm_levels.iter().product();
    let values = freqs.sym_values().with(Sym::Z, 1.0);
    let sv = spin.value();
    let mut sp = Space {
        basis,
        cm_levels,
        cm_dim,
        order,
        values,
        spin: sv,
        cache: CgCache::default(),
        d_ops: BTreeMap::new(),
    };
    let dim = sp.dim();
    let v = |s: Sym| freqs.sym_values().get(s);
    let (wi, wd, wl) = (v(Sym::WI), v(Sym::WD), v(Sym::WL));
    let freq_axis = [v(Sym::WT), v(Sym::WT), v(Sym::WZ)];

    let s3 = sp.angular(AngularOp::S3)?;
    let sup = sp.angular(AngularOp::SUp)?;
    let sdn = sp.angular(AngularOp::SDown)?;

    // kept states and, optionally, the K sector
    let mut keep = Vec::new();
    let mut sector = Vec::new();
    let mut states = Vec::new();
    let cm_strides = [cm_levels[1] * cm_levels[2], cm_levels[2], 1];
    for (ia, st) in sp.basis.states().iter().enumerate() {
        if spec.k_sector.is_some_and(|k| st.kj + st.ks != k) {
            continue;
        }
        for ic in 0..cm_dim {
            let fock = [ic / cm_strides[0], (ic / cm_strides[1]) % cm_levels[1], ic % cm_levels[2]];
            let idx = ia * cm_dim + ic;
            sector.push(idx);
            if st.j <= spec.jmax && (0..3).all(|nu| fock[nu] < spec.fock_levels[nu]) {
                keep.push(sector.len() - 1);
                states.push(ProductState { angular: *st, fock });
            }
        }
    }
    let in_sector = |g: &Graded| g.restrict(&sector);
    let sector_dim = sector.len();
    let mut h = Graded::zero(sector_dim, order);

    if spec.include.h0 {
        let j2 = sp.angular(AngularOp::JSquared)?;
        let j3 = sp.angular(AngularOp::J3)?;
        let mut h0 = j2.add(&j3.mul(&s3).scale_re(2.0)).scale_re(wi / (2.0 * sv));
        h0 = h0.add(&s3.mul(&s3).scale_re(-wd / sv)).add(&s3.scale_re(wl));
        for nu in 0..3 {
            if cm_levels[nu] > 1 {
                let (x, pm) = sp.quadratures(nu);
                let w4 = freq_axis[nu] / 4.0;
                h0 = h0.add(&pm.mul(&pm).scale_re(-w4)).add(&s3.mul(&x).mul(&x).scale_re(w4 / sv));
            }
        }
        h = h.add(&in_sector(&Graded::tag0(h0, order)));
    }
    if spec.include.hi {
        let jup = sp.angular(AngularOp::JUp)?;
        let jdn = sp.angular(AngularOp::JDown)?;
        let hi = jup.mul(&sdn).add(&jdn.mul(&sup)).scale_re(wi / (2.0 * sv));
        h = h.add(&in_sector(&Graded::tag0(hi, order)));
    }

    let needs_field = spec.include.vd || spec.include.vp;
    if needs_field {
        let jet = n_jet();
        let mut derivs: Vec<(Deriv, Option<SparseOp>)> = Vec::new();
        for o in 0..=order.min(2) {
            for &d in Deriv::of_order(o as u32)? {
                derivs.push((d, sp.taylor(d)));
            }
        }
        let n = sp.field(&jet, &derivs)?;
        let spin_ops = [s3.clone(), sup.clone(), sdn.clone()].map(|o| Graded::tag0(o, order));
        let [s3g, supg, sdng] = &spin_ops;
        if spec.include.vd {
            let [n3, nu_, nd] = &n;
            let one = Graded::tag0(SparseOp::identity(dim), order);
            let b = s3g
                .mul(&one.sub(&n3.mul(n3).scale(re(2.0))))
                .sub(&n3.mul(&nu_.mul(sdng).add(&nd.mul(supg))));
            let b = in_sector(&b);
            let s3s = in_sector(s3g);
            let vd = s3s.mul(&s3s).sub(&b.mul(&b)).scale(re(wd / sv));
            h = h.add(&vd);
        }
        if spec.include.vp {
            // ħ/M = 2 z² ω_T / S with z = 1
            let hbar_m = 2.0 * v(Sym::WT) / sv;
            for nu in 0..3 {
                let mut grad: Vec<(Deriv, Option<SparseOp>)> = vec![(Deriv::first(nu), Some(SparseOp::identity(dim)))];
                if order >= 1 {
                    for mu in 0..3 {
                        let r = (sp.cm_levels[mu] > 1).then(|| sp.position(mu));
                        grad.push((Deriv::second(nu, mu), r));
                    }
                }
                // first derivatives carry no position factor
                let dn = sp.field_gradient(&jet, &grad)?;
                let a = in_sector(&cross_dot(&n, &dn, &spin_ops));
                let zr = if nu < 2 { 1.0 } else { (v(Sym::WZ) / v(Sym::WT)).sqrt() };
                // p_ν/ħ = i √S/(2 z_ν) (c†−c)
                let p = sp.quadratures(nu).1.scale(Complex64::new(0.0, sv.sqrt() / 2.0 * zr));
                let p = in_sector(&Graded::tag0(p, order));
                let vp1 = p.mul(&a).add(&a.mul(&p)).scale(re(-hbar_m));
                let vp2 = a.mul(&a).scale(re(2.0 * hbar_m));
                h = h.add(&vp1).add(&vp2);
            }
        }
    }

    let full = h.total().restrict(&keep);
    let residual = full.hermiticity_residual();
    let scale = 1.0 + full.max_abs();
    if residual > 1e-12 * scale {
        return Err(HamiltonianError::NotHermitian(residual));
    }
    let mut op = full.hermitian_part();
    op.lossy = false;
    let basis_hash = hash_states(&states, spec, spin);
    Ok(ExactHamiltonian { op, states, basis_hash, hermiticity_residual: residual })
}

impl Space {
    /// Like [`Space::field`] but every derivative multiplies its factor,
    /// including first derivatives (used for `∂_ν ñ(r)`).
    fn field_gradient(&mut self, jet: &FieldJet, terms: &[(Deriv, Option<SparseOp>)]) -> Result<[Graded; 3], HamiltonianError> {
        let mut out = Vec::new();
        for c in [BodyComp::Three, BodyComp::Up, BodyComp::Down] {
            let mut acc = Graded::zero(self.dim(), self.order);
            for (d, factor) in terms {
                let Some(factor) = factor else { continue };
                for (m, k, w) in body_frame_n(jet, *d, c) {
                    if w.terms().all(|(s, _)| s.ld_tag() as usize > self.order) {
                        continue;
                    }
                    let op = self.d(m, k)?.mul(factor);
                    acc = acc.add(&self.graded_term(&w, &op));
                }
            }
            out.push(acc);
        }
        Ok(out.try_into().expect("three components"))
    }
}
