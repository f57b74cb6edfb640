//! Truncated body-frame uncoupled basis `|J mJ kJ; S kS⟩` and the angular
//! momentum and D-matrix operators acting on it.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::angular::{clebsch_gordan, rotation_in_d, AngularError};
use crate::exact::ExactCoeff;
use crate::half::HalfInt;
use crate::sparse::SparseOp;

#[derive(Debug, Error)]
pub enum RotorError {
    #[error(transparent)]
    Angular(#[from] AngularError),
    #[error("invalid basis: {0}")]
    Basis(String),
    #[error("operator {0} does not preserve the mJ block")]
    LeavesBlock(String),
    #[error("unknown operator tag `{0}`")]
    UnknownOperator(String),
    #[error("D-operator rank {0} must be an integer on this basis")]
    HalfIntegerRank(HalfInt),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rep2State {
    pub j: HalfInt,
    pub mj: HalfInt,
    pub kj: HalfInt,
    pub s: HalfInt,
    pub ks: HalfInt,
}

impl fmt::Display for Rep2State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{} {} {}; {} {}>", self.j, self.mj, self.kj, self.s, self.ks)
    }
}

/// Enumeration of `|J mJ kJ; S kS⟩` with `J ≤ Jmax`, ordered
/// lexicographically in `(J, mJ, kJ, kS)`.
#[derive(Clone, Debug)]
pub struct Rep2Basis {
    s: HalfInt,
    jmax: HalfInt,
    mj_block: Option<HalfInt>,
    states: Vec<Rep2State>,
    index: HashMap<Rep2State, usize>,
}

impl Rep2Basis {
    pub fn new(s: HalfInt, jmax: HalfInt, mj_block: Option<HalfInt>) -> Result<Self, RotorError> {
        if s.twice() < 0 {
            return Err(RotorError::Basis(format!("negative spin {s}")));
        }
        if !jmax.same_parity(s) {
            return Err(RotorError::Basis(format!("Jmax={jmax} and S={s} must differ by an integer")));
        }
        if let Some(mb) = mj_block {
            if !mb.same_parity(s) {
                return Err(RotorError::Basis(format!("mJ block {mb} has the wrong parity")));
            }
        }
        let jmin = if s.is_integer() { HalfInt::ZERO } else { HalfInt::HALF };
        let mut states = Vec::new();
        let mut j = jmin;
        while j <= jmax {
            for mj in j.projections() {
                if mj_block.is_some_and(|b| b != mj) {
                    continue;
                }
                for kj in j.projections() {
                    for ks in s.projections() {
                        states.push(Rep2State { j, mj, kj, s, ks });
                    }
                }
            }
            j = j + HalfInt::ONE;
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Rep2Basis { s, jmax, mj_block, states, index })
    }

    pub fn spin(&self) -> HalfInt {
        self.s
    }

    pub fn jmax(&self) -> HalfInt {
        self.jmax
    }

    pub fn jmin(&self) -> HalfInt {
        if self.s.is_integer() {
            HalfInt::ZERO
        } else {
            HalfInt::HALF
        }
    }

    pub fn mj_block(&self) -> Option<HalfInt> {
        self.mj_block
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Rep2State] {
        &self.states
    }

    pub fn state(&self, i: usize) -> Rep2State {
        self.states[i]
    }

    pub fn index_of(&self, s: &Rep2State) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Unblocked dimension `(2S+1) Σ_{J ≤ Jmax} (2J+1)²`.
    pub fn full_dimension(s: HalfInt, jmax: HalfInt) -> usize {
        let jmin = if s.is_integer() { 0 } else { 1 };
        let n: usize = (jmin..=jmax.twice()).step_by(2).map(|t| ((t + 1) * (t + 1)) as usize).sum();
        n * (s.twice() + 1) as usize
    }

    /// Dimension of the `mJ` block: `(2S+1) Σ_{|mJ| ≤ J ≤ Jmax} (2J+1)`.
    pub fn blocked_dimension(s: HalfInt, jmax: HalfInt, mj: HalfInt) -> usize {
        let jmin = if s.is_integer() { 0 } else { 1 };
        let n: usize = (jmin..=jmax.twice()).step_by(2).filter(|&t| t >= mj.abs().twice()).map(|t| (t + 1) as usize).sum();
        n * (s.twice() + 1) as usize
    }

    /// States with `J ≤ Jmax − depth`.
    pub fn interior_mask(&self, depth: HalfInt) -> Vec<bool> {
        let cut = self.jmax - depth;
        self.states.iter().map(|s| s.j <= cut).collect()
    }

    /// Indices of states with `J ≤ jcut`; a prefix because `J` varies slowest.
    pub fn indices_up_to(&self, jcut: HalfInt) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.states[i].j <= jcut).collect()
    }

    /// Content hash used in triplet-file headers.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("rep2;S={};Jmax={};block={:?};dim={}", self.s, self.jmax, self.mj_block.map(|b| b.twice()), self.dim()));
        h.finalize().iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AngularOp {
    J3,
    JUp,
    JDown,
    Jz,
    JPlus,
    JMinus,
    JSquared,
    S3,
    SUp,
    SDown,
}

impl std::str::FromStr for AngularOp {
    type Err = RotorError;
    fn from_str(s: &str) -> Result<Self, RotorError> {
        Ok(match s {
            "J3" => AngularOp::J3,
            "Jup" => AngularOp::JUp,
            "Jdown" => AngularOp::JDown,
            "Jz" => AngularOp::Jz,
            "J+" | "Jplus" => AngularOp::JPlus,
            "J-" | "Jminus" => AngularOp::JMinus,
            "J2" | "J^2" => AngularOp::JSquared,
            "S3" => AngularOp::S3,
            "Sup" => AngularOp::SUp,
            "Sdown" => AngularOp::SDown,
            other => return Err(RotorError::UnknownOperator(other.to_string())),
        })
    }
}

fn ladder(j: HalfInt, m: HalfInt, up: bool) -> f64 {
    let (jv, mv) = (j.value(), m.value());
    if up {
        (jv * (jv + 1.0) - mv * (mv + 1.0)).max(0.0).sqrt()
    } else {
        (jv * (jv + 1.0) - mv * (mv - 1.0)).max(0.0).sqrt()
    }
}

/// Angular-momentum operators. Body ladders raise (`Jup`, `Sup`) or lower the
/// body projection with standard matrix elements; the body components obey
/// `[J1, J2] = −i J3` with `J1 = (J↑+J↓)/2`, `J2 = i(J↑−J↓)/2`.
pub fn build_angular_operator(basis: &Rep2Basis, which: AngularOp) -> Result<SparseOp, RotorError> {
    use AngularOp::*;
    if basis.mj_block.is_some() && matches!(which, JPlus | JMinus) {
        return Err(RotorError::LeavesBlock(format!("{which:?}")));
    }
    let mut t = Vec::new();
    for (i, st) in basis.states.iter().enumerate() {
        let mut push = |target: Rep2State, v: f64| {
            if v != 0.0 {
                if let Some(r) = basis.index_of(&target) {
                    t.push((r, i, Complex64::new(v, 0.0)));
                }
            }
        };
        match which {
            J3 => push(*st, st.kj.value()),
            Jz => push(*st, st.mj.value()),
            JSquared => push(*st, st.j.casimir()),
            S3 => push(*st, st.ks.value()),
            JUp => push(Rep2State { kj: st.kj + HalfInt::ONE, ..*st }, ladder(st.j, st.kj, true)),
            JDown => push(Rep2State { kj: st.kj - HalfInt::ONE, ..*st }, ladder(st.j, st.kj, false)),
            JPlus => push(Rep2State { mj: st.mj + HalfInt::ONE, ..*st }, ladder(st.j, st.mj, true)),
            JMinus => push(Rep2State { mj: st.mj - HalfInt::ONE, ..*st }, ladder(st.j, st.mj, false)),
            SUp => push(Rep2State { ks: st.ks + HalfInt::ONE, ..*st }, ladder(st.s, st.ks, true)),
            SDown => push(Rep2State { ks: st.ks - HalfInt::ONE, ..*st }, ladder(st.s, st.ks, false)),
        }
    }
    let mut op = SparseOp::from_triplets(basis.dim(), t);
    op.hermitian = matches!(which, J3 | Jz | JSquared | S3);
    Ok(op)
}

/// Memoized float Clebsch–Gordan values from the exact Racah sum.
#[derive(Default)]
pub struct CgCache {
    map: HashMap<[i32; 6], f64>,
}

impl CgCache {
    pub fn get(&mut self, j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
        if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j || m1 + m2 != m {
            return 0.0;
        }
        let key = [j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice()];
        *self
            .map
            .entry(key)
            .or_insert_with(|| clebsch_gordan(j1, m1, j2, m2, j, m).map(|c| c.to_f64()).unwrap_or(0.0))
    }
}

/// `D^j_{mk}` on the basis: `√((2J+1)/(2J'+1)) ⟨jm,J mJ|J' mJ'⟩⟨jk,J kJ|J' kJ'⟩`.
/// Rows with `J' > Jmax` are dropped and the result is marked lossy.
pub fn build_d_operator(basis: &Rep2Basis, j: HalfInt, m: HalfInt, k: HalfInt) -> Result<SparseOp, RotorError> {
    build_d_operator_cached(basis, j, m, k, &mut CgCache::default())
}

pub fn build_d_operator_cached(
    basis: &Rep2Basis,
    j: HalfInt,
    m: HalfInt,
    k: HalfInt,
    cache: &mut CgCache,
) -> Result<SparseOp, RotorError> {
    if m.abs() > j || k.abs() > j || !j.same_parity(m) || !j.same_parity(k) {
        return Err(AngularError::Domain { j, m: if m.abs() > j { m } else { k } }.into());
    }
    if !j.is_integer() {
        return Err(RotorError::HalfIntegerRank(j));
    }
    if basis.mj_block.is_some() && m != HalfInt::ZERO {
        return Err(RotorError::LeavesBlock(format!("D^{j}_{{{m},{k}}}")));
    }
    let mut t = Vec::new();
    let mut lossy = false;
    for (i, st) in basis.states.iter().enumerate() {
        let (mjp, kjp) = (st.mj + m, st.kj + k);
        let lo = (st.j - j).abs().max(mjp.abs()).max(kjp.abs());
        let mut jp = lo;
        // keep J' in the same integer ladder as J
        if !jp.same_parity(st.j) {
            jp = jp + HalfInt::HALF + HalfInt::HALF;
        }
        while jp <= st.j + j {
            if jp > basis.jmax {
                let c1 = cache.get(j, m, st.j, st.mj, jp, mjp);
                let c2 = cache.get(j, k, st.j, st.kj, jp, kjp);
                if c1 * c2 != 0.0 {
                    lossy = true;
                }
            } else {
                let v = ((2.0 * st.j.value() + 1.0) / (2.0 * jp.value() + 1.0)).sqrt()
                    * cache.get(j, m, st.j, st.mj, jp, mjp)
                    * cache.get(j, k, st.j, st.kj, jp, kjp);
                if v != 0.0 {
                    let r = basis.index_of(&Rep2State { j: jp, mj: mjp, kj: kjp, ..*st }).expect("target in basis");
                    t.push((r, i, Complex64::new(v, 0.0)));
                }
            }
            jp = jp + HalfInt::ONE;
        }
    }
    let mut op = SparseOp::from_triplets(basis.dim(), t);
    op.hermitian = false;
    op.lossy = lossy;
    Ok(op)
}

/// Rank-1 D-operators indexed by `(m+1, k+1)`.
pub fn d1_operators(basis: &Rep2Basis) -> Result<[[SparseOp; 3]; 3], RotorError> {
    let mut cache = CgCache::default();
    let mut build = |m: i32, k: i32| build_d_operator_cached(basis, HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), &mut cache);
    Ok([
        [build(-1, -1)?, build(-1, 0)?, build(-1, 1)?],
        [build(0, -1)?, build(0, 0)?, build(0, 1)?],
        [build(1, -1)?, build(1, 0)?, build(1, 1)?],
    ])
}

/// `R_{iμ}` as a sparse operator from its D¹ expansion.
pub fn rotation_element(d1: &[[SparseOp; 3]; 3], i: usize, mu: usize) -> SparseOp {
    let dim = d1[0][0].dim();
    let mut acc = SparseOp::zeros(dim);
    for (m, k, c) in rotation_in_d(i, mu) {
        acc = acc.axpby(Complex64::new(1.0, 0.0), &d1[(m + 1) as usize][(k + 1) as usize], c);
    }
    acc.hermitian = false;
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rep1State {
    pub f: HalfInt,
    pub mf: HalfInt,
    pub l: HalfInt,
    pub ml: HalfInt,
    pub kl: HalfInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rep3State {
    pub j: HalfInt,
    pub mj: HalfInt,
    pub s: HalfInt,
    pub l: HalfInt,
    pub kl: HalfInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceState {
    Rep1(Rep1State),
    Rep2(Rep2State),
}

/// Expansion of a representation-1 or -2 state on representation 3.
pub fn basis_change_coefficients(src: SourceState) -> Result<Vec<(Rep3State, ExactCoeff)>, RotorError> {
    let mut out = Vec::new();
    match src {
        SourceState::Rep1(s) => {
            let mj = s.mf + s.ml;
            let mut j = (s.l - s.f).abs();
            while j <= s.l + s.f {
                if mj.abs() <= j {
                    let c = clebsch_gordan(s.f, s.mf, s.l, s.ml, j, mj)?;
                    if !c.is_zero() {
                        out.push((Rep3State { j, mj, s: s.f, l: s.l, kl: s.kl }, c));
                    }
                }
                j = j + HalfInt::ONE;
            }
        }
        SourceState::Rep2(s) => {
            let kl = s.kj + s.ks;
            let mut l = (s.j - s.s).abs();
            while l <= s.j + s.s {
                if kl.abs() <= l {
                    let c = clebsch_gordan(s.j, s.kj, s.s, s.ks, l, kl)?;
                    if !c.is_zero() {
                        out.push((Rep3State { j: s.j, mj: s.mj, s: s.s, l, kl }, c));
                    }
                }
                l = l + HalfInt::ONE;
            }
        }
    }
    Ok(out)
}

/// `max |U†U − 1|` of the 2→3 change restricted to one `(J, mJ)` shell.
pub fn basis_change_unitarity_2to3(j: HalfInt, mj: HalfInt, s: HalfInt) -> Result<f64, RotorError> {
    let mut cols: Vec<HashMap<Rep3State, f64>> = Vec::new();
    for kj in j.projections() {
        for ks in s.projections() {
            let c = basis_change_coefficients(SourceState::Rep2(Rep2State { j, mj, kj, s, ks }))?;
            cols.push(c.into_iter().map(|(t, v)| (t, v.to_f64())).collect());
        }
    }
    Ok(gram_residual(&cols))
}

/// `max |U†U − 1|` of the 1→3 change for fixed `(L, kL)` and `F`.
pub fn basis_change_unitarity_1to3(f: HalfInt, l: HalfInt, kl: HalfInt) -> Result<f64, RotorError> {
    let mut cols: Vec<HashMap<Rep3State, f64>> = Vec::new();
    for mf in f.projections() {
        for ml in l.projections() {
            let c = basis_change_coefficients(SourceState::Rep1(Rep1State { f, mf, l, ml, kl }))?;
            cols.push(c.into_iter().map(|(t, v)| (t, v.to_f64())).collect());
        }
    }
    Ok(gram_residual(&cols))
}

fn gram_residual(cols: &[HashMap<Rep3State, f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, ca) in cols.iter().enumerate() {
        for (b, cb) in cols.iter().enumerate() {
            let dot: f64 = ca.iter().map(|(t, v)| v * cb.get(t).copied().unwrap_or(0.0)).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub identity: String,
    /// Rotor-shell depth excluded from the check (`J ≤ Jmax − depth`).
    pub depth: i32,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub spin: HalfInt,
    pub jmax: HalfInt,
    pub entries: Vec<IdentityResidual>,
}

impl CommutationReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}

const EPS: [[[f64; 3]; 3]; 3] = {
    let mut e = [[[0.0; 3]; 3]; 3];
    e[0][1][2] = 1.0;
    e[1][2][0] = 1.0;
    e[2][0][1] = 1.0;
    e[1][0][2] = -1.0;
    e[2][1][0] = -1.0;
    e[0][2][1] = -1.0;
    e
};

struct Frame {
    c: [SparseOp; 3],
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Components from ladders: body `(L↑+L↓)/2, i(L↑−L↓)/2`, lab `(L₊+L₋)/2, (L₊−L₋)/2i`.
fn body_components(up: &SparseOp, down: &SparseOp, three: &SparseOp) -> Frame {
    Frame {
        c: [up.axpby(c(0.5, 0.0), down, c(0.5, 0.0)), up.axpby(c(0.0, 0.5), down, c(0.0, -0.5)), three.clone()],
    }
}

fn lab_components(plus: &SparseOp, minus: &SparseOp, z: &SparseOp) -> Frame {
    Frame {
        c: [plus.axpby(c(0.5, 0.0), minus, c(0.5, 0.0)), plus.axpby(c(0.0, -0.5), minus, c(0.0, 0.5)), z.clone()],
    }
}

fn frame_sum(a: &Frame, b: &Frame) -> Frame {
    Frame { c: [a.c[0].add(&b.c[0]), a.c[1].add(&b.c[1]), a.c[2].add(&b.c[2])] }
}

/// Evaluates every commutator identity of the body and lab frames and the
/// D-matrix/angular-momentum relations as interior residuals.
pub fn verify_commutation_table(basis: &Rep2Basis) -> Result<CommutationReport, RotorError> {
    if basis.mj_block.is_some() {
        return Err(RotorError::Basis("commutation table needs an unblocked basis".into()));
    }
    if basis.jmax < basis.s + HalfInt::int(2) {
        return Err(RotorError::Basis(format!("need Jmax ≥ S+2, got Jmax={} S={}", basis.jmax, basis.s)));
    }
    use AngularOp::*;
    let op = |w| build_angular_operator(basis, w);
    let (j3, jup, jdn) = (op(J3)?, op(JUp)?, op(JDown)?);
    let (jz, jp, jm) = (op(Jz)?, op(JPlus)?, op(JMinus)?);
    let (s3, sup, sdn) = (op(S3)?, op(SUp)?, op(SDown)?);
    let d1 = d1_operators(basis)?;
    let r: Vec<Vec<SparseOp>> = (0..3).map(|i| (0..3).map(|mu| rotation_element(&d1, i, mu)).collect()).collect();

    let jb = body_components(&jup, &jdn, &j3);
    let sb = body_components(&sup, &sdn, &s3);
    let lb = frame_sum(&jb, &sb);
    let jl = lab_components(&jp, &jm, &jz);
    // lab spin S_μ = Σ_i R_iμ S_i
    let sl = Frame {
        c: std::array::from_fn(|mu| {
            (0..3).fold(SparseOp::zeros(basis.dim()), |acc, i| acc.add(&r[i][mu].mul(&sb.c[i])))
        }),
    };
    let fl = Frame { c: std::array::from_fn(|mu| sl.c[mu].scale_re(-1.0)) };
    let ll = frame_sum(&jl, &sl);

    let mut entries = Vec::new();
    let mut record = |name: &str, depth: i32, res: f64| {
        entries.push(IdentityResidual { identity: name.to_string(), depth, residual: res });
    };
    let masks: Vec<Vec<bool>> = (0..=2).map(|d| basis.interior_mask(HalfInt::int(d))).collect();
    let res = |a: &SparseOp, depth: i32| a.max_abs_within(&masks[depth as usize]);

    // [A_i, B_j] = sign·i ε_ijk C_k
    let eps_check = |a: &Frame, b: &Frame, cc: Option<&Frame>, sign: f64, depth: i32| {
        let mut w = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut lhs = a.c[i].commutator(&b.c[j]);
                if let Some(cf) = cc {
                    for k in 0..3 {
                        if EPS[i][j][k] != 0.0 {
                            lhs = lhs.axpby(c(1.0, 0.0), &cf.c[k], c(0.0, -sign * EPS[i][j][k]));
                        }
                    }
                }
                w = w.max(res(&lhs, depth));
            }
        }
        w
    };
    // ladder relations [X3, X↑] = X↑, [X3, X↓] = −X↓, [X↑, X↓] = 2 X3
    let ladder_check = |up: &SparseOp, dn: &SparseOp, three: &SparseOp, depth: i32| {
        let a = three.commutator(up).sub(up);
        let b = three.commutator(dn).add(dn);
        let cc = up.commutator(dn).sub(&three.scale_re(2.0));
        res(&a, depth).max(res(&b, depth)).max(res(&cc, depth))
    };
    // rotation-matrix relations: [A_i, R_jμ] = sign·i ε_ijk R_kμ (body, first index)
    let r_body = |a: &Frame, sign: f64, zero: bool, depth: i32| {
        let mut w = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for mu in 0..3 {
                    let mut lhs = a.c[i].commutator(&r[j][mu]);
                    if !zero {
                        for k in 0..3 {
                            if EPS[i][j][k] != 0.0 {
                                lhs = lhs.axpby(c(1.0, 0.0), &r[k][mu], c(0.0, -sign * EPS[i][j][k]));
                            }
                        }
                    }
                    w = w.max(res(&lhs, depth));
                }
            }
        }
        w
    };
    // lab: [A_μ, R_iν] = i ε_μνλ R_iλ (second index)
    let r_lab = |a: &Frame, zero: bool, depth: i32| {
        let mut w = 0.0f64;
        for mu in 0..3 {
            for i in 0..3 {
                for nu in 0..3 {
                    let mut lhs = a.c[mu].commutator(&r[i][nu]);
                    if !zero {
                        for l in 0..3 {
                            if EPS[mu][nu][l] != 0.0 {
                                lhs = lhs.axpby(c(1.0, 0.0), &r[i][l], c(0.0, -EPS[mu][nu][l]));
                            }
                        }
                    }
                    w = w.max(res(&lhs, depth));
                }
            }
        }
        w
    };

    // body frame
    record("body [J_i,J_j] = -i eps_ijk J_k", 0, eps_check(&jb, &jb, Some(&jb), -1.0, 0));
    record("body [J3,J_up/down] = +/-J_up/down, [J_up,J_down] = 2J3", 0, ladder_check(&jup, &jdn, &j3, 0));
    record("body [S_i,S_j] = -i eps_ijk S_k", 0, eps_check(&sb, &sb, Some(&sb), -1.0, 0));
    record("body [S3,S_up/down] = +/-S_up/down, [S_up,S_down] = 2S3", 0, ladder_check(&sup, &sdn, &s3, 0));
    record("body [L_i,L_j] = -i eps_ijk L_k", 0, eps_check(&lb, &lb, Some(&lb), -1.0, 0));
    {
        let lup = jup.add(&sup);
        let ldn = jdn.add(&sdn);
        let l3 = j3.add(&s3);
        record("body [L3,L_up/down] = +/-L_up/down, [L_up,L_down] = 2L3", 0, ladder_check(&lup, &ldn, &l3, 0));
    }
    record("body [L_i,S_j] = -i eps_ijk S_k", 0, eps_check(&lb, &sb, Some(&sb), -1.0, 0));
    record("body [J_i,S_j] = 0", 0, eps_check(&jb, &sb, None, -1.0, 0));
    record("body [J_i,L_j] = -i eps_ijk J_k", 0, eps_check(&jb, &lb, Some(&jb), -1.0, 0));
    record("body [L_i,R_jmu] = -i eps_ijk R_kmu", 1, r_body(&lb, -1.0, false, 1));
    record("body [J_i,R_jmu] = -i eps_ijk R_kmu", 1, r_body(&jb, -1.0, false, 1));
    record("body [S_i,R_jmu] = 0", 1, r_body(&sb, -1.0, true, 1));

    // lab frame
    record("lab [L_mu,L_nu] = i eps L_lambda", 2, eps_check(&ll, &ll, Some(&ll), 1.0, 2));
    {
        let lp = ll.c[0].axpby(c(1.0, 0.0), &ll.c[1], c(0.0, 1.0));
        let lm = ll.c[0].axpby(c(1.0, 0.0), &ll.c[1], c(0.0, -1.0));
        record("lab [L_z,L_+/-] = +/-L_+/-, [L_+,L_-] = 2L_z", 2, ladder_check(&lp, &lm, &ll.c[2], 2));
    }
    record("lab [F_mu,F_nu] = i eps F_lambda (F = -S)", 2, eps_check(&fl, &fl, Some(&fl), 1.0, 2));
    {
        let fp = fl.c[0].axpby(c(1.0, 0.0), &fl.c[1], c(0.0, 1.0));
        let fm = fl.c[0].axpby(c(1.0, 0.0), &fl.c[1], c(0.0, -1.0));
        record("lab [F_z,F_+/-] = +/-F_+/-, [F_+,F_-] = 2F_z (F = -S)", 2, ladder_check(&fp, &fm, &fl.c[2], 2));
    }
    record("lab [J_mu,J_nu] = i eps J_lambda", 0, eps_check(&jl, &jl, Some(&jl), 1.0, 0));
    record("lab [J_z,J_+/-] = +/-J_+/-, [J_+,J_-] = 2J_z", 0, ladder_check(&jp, &jm, &jz, 0));
    record("lab [L_mu,S_nu] = 0", 2, eps_check(&ll, &sl, None, 1.0, 2));
    record("lab [J_mu,S_nu] = i eps S_lambda", 1, eps_check(&jl, &sl, Some(&sl), 1.0, 1));
    record("lab [J_mu,L_nu] = i eps L_lambda", 1, eps_check(&jl, &ll, Some(&ll), 1.0, 1));
    record("lab [L_mu,R_inu] = i eps R_ilambda", 2, r_lab(&ll, false, 2));
    record("lab [J_mu,R_inu] = i eps R_ilambda", 1, r_lab(&jl, false, 1));
    record("lab [S_mu,R_inu] = 0", 2, r_lab(&sl, true, 2));
    {
        let mut w = 0.0f64;
        let mut wo = 0.0f64;
        let id = SparseOp::identity(basis.dim());
        for i in 0..3 {
            for mu in 0..3 {
                for j in 0..3 {
                    for nu in 0..3 {
                        w = w.max(res(&r[i][mu].commutator(&r[j][nu]), 2));
                    }
                }
            }
            for j in 0..3 {
                let s = (0..3).fold(SparseOp::zeros(basis.dim()), |a, mu| a.add(&r[i][mu].mul(&r[j][mu])));
                let s = if i == j { s.sub(&id) } else { s };
                wo = wo.max(res(&s, 2));
            }
        }
        record("[R_imu,R_jnu] = 0", 2, w);
        record("sum_mu R_imu R_jmu = delta_ij", 2, wo);
    }

    // D-matrix relations for rank 1
    let mut wz = 0.0f64;
    let mut wpm = 0.0f64;
    let mut w3 = 0.0f64;
    let mut wud = 0.0f64;
    let mut ws = 0.0f64;
    let coef = |q: f64, a: f64, up: bool| if up { ((q - a) * (q + a + 1.0)).max(0.0).sqrt() } else { ((q + a) * (q - a + 1.0)).max(0.0).sqrt() };
    for m in -1..=1 {
        for k in -1..=1 {
            let d = &d1[(m + 1) as usize][(k + 1) as usize];
            let get = |mm: i32, kk: i32| {
                if mm.abs() <= 1 && kk.abs() <= 1 {
                    d1[(mm + 1) as usize][(kk + 1) as usize].clone()
                } else {
                    SparseOp::zeros(basis.dim())
                }
            };
            let (mf, kf) = (m as f64, k as f64);
            wz = wz.max(res(&jz.commutator(d).sub(&d.scale_re(mf)), 1));
            w3 = w3.max(res(&j3.commutator(d).sub(&d.scale_re(kf)), 1));
            wpm = wpm.max(res(&jp.commutator(d).sub(&get(m + 1, k).scale_re(coef(1.0, mf, true))), 1));
            wpm = wpm.max(res(&jm.commutator(d).sub(&get(m - 1, k).scale_re(coef(1.0, mf, false))), 1));
            wud = wud.max(res(&jup.commutator(d).sub(&get(m, k + 1).scale_re(coef(1.0, kf, true))), 1));
            wud = wud.max(res(&jdn.commutator(d).sub(&get(m, k - 1).scale_re(coef(1.0, kf, false))), 1));
            for s in [&s3, &sup, &sdn] {
                ws = ws.max(res(&s.commutator(d), 1));
            }
        }
    }
    record("[J_z,D_mk] = m D_mk", 1, wz);
    record("[J_+/-,D_mk] = sqrt((q-/+m)(q+/-m+1)) D_m+/-1,k", 1, wpm);
    record("[J3,D_mk] = k D_mk", 1, w3);
    record("[J_up/down,D_mk] = sqrt((q-/+k)(q+/-k+1)) D_m,k+/-1", 1, wud);
    record("[S_i,D_mk] = 0", 1, ws);

    Ok(CommutationReport { spin: basis.s, jmax: basis.jmax, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula() {
        for (s2, jm2) in [(2, 6), (1, 5), (0, 4), (4, 8)] {
            let (s, jm) = (HalfInt::from_twice(s2), HalfInt::from_twice(jm2));
            let b = Rep2Basis::new(s, jm, None).unwrap();
            assert_eq!(b.dim(), Rep2Basis::full_dimension(s, jm));
            for (i, st) in b.states().iter().enumerate() {
                assert_eq!(b.index_of(st), Some(i));
            }
        }
    }

    #[test]
    fn d00_on_ground_rotor() {
        let b = Rep2Basis::new(HalfInt::ONE, HalfInt::int(3), None).unwrap();
        let d = build_d_operator(&b, HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO).unwrap();
        let z = HalfInt::ZERO;
        let src = b.index_of(&Rep2State { j: z, mj: z, kj: z, s: HalfInt::ONE, ks: HalfInt::ONE }).unwrap();
        let dst = b.index_of(&Rep2State { j: HalfInt::ONE, mj: z, kj: z, s: HalfInt::ONE, ks: HalfInt::ONE }).unwrap();
        let col: Vec<_> = (0..b.dim()).filter(|&r| d.get(r, src).norm() > 0.0).collect();
        assert_eq!(col, vec![dst]);
        assert!((d.get(dst, src).re - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(d.lossy);
    }

    #[test]
    fn rank_zero_is_identity() {
        let b = Rep2Basis::new(HalfInt::HALF, HalfInt::from_twice(5), None).unwrap();
        let d = build_d_operator(&b, HalfInt::ZERO, HalfInt::ZERO, HalfInt::ZERO).unwrap();
        assert_eq!(d.sub(&SparseOp::identity(b.dim())).max_abs(), 0.0);
        assert!(!d.lossy);
    }

    #[test]
    fn blocked_basis_rejects_lab_ladders() {
        let b = Rep2Basis::new(HalfInt::ONE, HalfInt::int(3), Some(HalfInt::ZERO)).unwrap();
        assert!(build_angular_operator(&b, AngularOp::JPlus).is_err());
        assert!(build_d_operator(&b, HalfInt::ONE, HalfInt::ONE, HalfInt::ZERO).is_err());
        assert!(build_d_operator(&b, HalfInt::ONE, HalfInt::ZERO, HalfInt::ONE).is_ok());
    }

    #[test]
    fn unknown_tag() {
        assert!("Jq".parse::<AngularOp>().is_err());
    }
}
