//! Complex sparse operators in compressed-row layout.
//!
//! Rows keep their column indices sorted, and sums are accumulated in a
//! fixed order, so every operation is bit-for-bit deterministic.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dim(usize, usize),
    #[error("triplet parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Complex sparse operator; `hermitian` records a build-time guarantee and
/// `lossy` marks operators truncated at the outermost shell.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    pub hermitian: bool,
    pub lossy: bool,
}

pub type SparseHermitianOp = SparseOp;

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        SparseOp { dim, indptr: vec![0; dim + 1], indices: vec![], values: vec![], hermitian: true, lossy: false }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(d: &[Complex64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let mut op = Self::from_triplets(d.len(), t);
        op.hermitian = d.iter().all(|v| v.im == 0.0);
        op
    }

    pub fn diagonal_real(d: &[f64]) -> Self {
        Self::diagonal(&d.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Builds from `(row, col, value)`; duplicates are summed in input order,
    /// exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut t: Vec<(usize, usize, Complex64)>) -> Self {
        t.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            assert!(i < dim && j < dim, "triplet out of range");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            indptr[i + 1] += indptr[i];
        }
        let mut op = SparseOp { dim, indptr, indices, values, hermitian: false, lossy: false };
        op.prune();
        op
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.dim {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.values[p] != Complex64::zero() {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr[i + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match r.binary_search(&j) {
            Ok(p) => self.values[self.indptr[i] + p],
            Err(_) => Complex64::zero(),
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.dim).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn adjoint(&self) -> SparseOp {
        let t = self.triplets().into_iter().map(|(i, j, v)| (j, i, v.conj())).collect();
        let mut op = Self::from_triplets(self.dim, t);
        op.hermitian = self.hermitian;
        op.lossy = self.lossy;
        op
    }

    pub fn scale(&self, c: Complex64) -> SparseOp {
        let mut op = self.clone();
        for v in &mut op.values {
            *v *= c;
        }
        op.hermitian = self.hermitian && c.im == 0.0;
        op.prune();
        op
    }

    pub fn scale_re(&self, c: f64) -> SparseOp {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: Complex64, other: &SparseOp, b: Complex64) -> SparseOp {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.dim {
            let (mut p, pe) = (self.indptr[i], self.indptr[i + 1]);
            let (mut q, qe) = (other.indptr[i], other.indptr[i + 1]);
            while p < pe || q < qe {
                let cp = if p < pe { self.indices[p] } else { usize::MAX };
                let cq = if q < qe { other.indices[q] } else { usize::MAX };
                let (c, v) = if cp < cq {
                    p += 1;
                    (cp, a * self.values[p - 1])
                } else if cq < cp {
                    q += 1;
                    (cq, b * other.values[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (cp, a * self.values[p - 1] + b * other.values[q - 1])
                };
                if v != Complex64::zero() {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr[i + 1] = indices.len();
        }
        SparseOp {
            dim: self.dim,
            indptr,
            indices,
            values,
            hermitian: self.hermitian && other.hermitian && a.im == 0.0 && b.im == 0.0,
            lossy: self.lossy || other.lossy,
        }
    }

    pub fn add(&self, other: &SparseOp) -> SparseOp {
        let one = Complex64::new(1.0, 0.0);
        self.axpby(one, other, one)
    }

    pub fn sub(&self, other: &SparseOp) -> SparseOp {
        let one = Complex64::new(1.0, 0.0);
        self.axpby(one, other, -one)
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = vec![Complex64::zero(); n];
        let mut mark = vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            cols.clear();
            for p in self.indptr[i]..self.indptr[i + 1] {
                let (k, a) = (self.indices[p], self.values[p]);
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let j = other.indices[q];
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = Complex64::zero();
                        cols.push(j);
                    }
                    acc[j] += a * other.values[q];
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                if acc[j] != Complex64::zero() {
                    indices.push(j);
                    values.push(acc[j]);
                }
            }
            indptr[i + 1] = indices.len();
        }
        SparseOp { dim: n, indptr, indices, values, hermitian: false, lossy: self.lossy || other.lossy }
    }

    pub fn commutator(&self, other: &SparseOp) -> SparseOp {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut s = Complex64::zero();
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[p] * x[self.indices[p]];
            }
            *yi = s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entry among rows and columns both in `keep`.
    pub fn max_abs_within(&self, keep: &[bool]) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.dim {
            if !keep[i] {
                continue;
            }
            for (j, v) in self.row(i) {
                if keep[j] {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    /// `max |A − A†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// `(A + A†)/2`, flagged Hermitian.
    pub fn hermitian_part(&self) -> SparseOp {
        let mut h = self.add(&self.adjoint()).scale_re(0.5);
        h.hermitian = true;
        h
    }

    /// Principal submatrix on the listed indices (in the given order).
    pub fn restrict(&self, idx: &[usize]) -> SparseOp {
        let mut pos = vec![usize::MAX; self.dim];
        for (a, &i) in idx.iter().enumerate() {
            pos[i] = a;
        }
        let mut t = Vec::new();
        for (a, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    t.push((a, pos[j], v));
                }
            }
        }
        let mut op = Self::from_triplets(idx.len(), t);
        op.hermitian = self.hermitian;
        op.lossy = self.lossy;
        op
    }

    /// Kronecker product `self ⊗ other` (row index `i·dim_b + j`).
    pub fn kron(&self, other: &SparseOp) -> SparseOp {
        let db = other.dim;
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.triplets() {
            for (k, l, b) in other.triplets() {
                t.push((i * db + k, j * db + l, a * b));
            }
        }
        let mut op = Self::from_triplets(self.dim * db, t);
        op.hermitian = self.hermitian && other.hermitian;
        op.lossy = self.lossy || other.lossy;
        op
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Triplet text: a header with the dimension and basis hash, then
    /// one `i j re im` row per stored entry.
    pub fn to_triplet_text(&self, basis_hash: &str) -> String {
        let mut s = String::new();
        writeln!(s, "# magrotor sparse triplets").unwrap();
        writeln!(s, "dim {}", self.dim).unwrap();
        writeln!(s, "basis {basis_hash}").unwrap();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i} {j} {:.17e} {:.17e}", v.re, v.im).unwrap();
        }
        s
    }

    /// Parses [`Self::to_triplet_text`] output, returning the operator and basis hash.
    pub fn from_triplet_text(text: &str) -> Result<(SparseOp, String), SparseError> {
        let mut dim = None;
        let mut hash = String::new();
        let mut t = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| SparseError::Parse { line: n + 1, msg: msg.to_string() };
            if let Some(d) = line.strip_prefix("dim ") {
                dim = Some(d.trim().parse::<usize>().map_err(|_| err("bad dim"))?);
                continue;
            }
            if let Some(h) = line.strip_prefix("basis ") {
                hash = h.trim().to_string();
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(err("expected `i j re im`"));
            }
            let i = f[0].parse::<usize>().map_err(|_| err("bad row"))?;
            let j = f[1].parse::<usize>().map_err(|_| err("bad col"))?;
            let re = f[2].parse::<f64>().map_err(|_| err("bad re"))?;
            let im = f[3].parse::<f64>().map_err(|_| err("bad im"))?;
            t.push((i, j, Complex64::new(re, im)));
        }
        let dim = dim.ok_or(SparseError::Parse { line: 0, msg: "missing dim".into() })?;
        if let Some(&(i, j, _)) = t.iter().find(|&&(i, j, _)| i >= dim || j >= dim) {
            return Err(SparseError::Parse { line: 0, msg: format!("entry ({i},{j}) out of range") });
        }
        let op = Self::from_triplets(dim, t);
        Ok((op, hash))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseOp::from_triplets(3, vec![(0, 1, c(1.0, 2.0)), (2, 0, c(-1.0, 0.0)), (1, 1, c(0.5, 0.0))]);
        let b = SparseOp::from_triplets(3, vec![(1, 2, c(3.0, 0.0)), (0, 0, c(0.0, 1.0)), (1, 0, c(1.0, 0.0))]);
        let d = a.to_dense() * b.to_dense();
        assert_eq!(a.mul(&b).to_dense(), d);
    }

    #[test]
    fn triplet_roundtrip() {
        let a = SparseOp::from_triplets(4, vec![(0, 3, c(1.0 / 3.0, -2.0)), (3, 0, c(1e-300, 0.0))]);
        let (b, h) = SparseOp::from_triplet_text(&a.to_triplet_text("abc")).unwrap();
        assert_eq!(h, "abc");
        assert_eq!(a.triplets(), b.triplets());
    }

    #[test]
    fn duplicates_cancel_to_nothing() {
        let a = SparseOp::from_triplets(2, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0))]);
        assert_eq!(a.nnz(), 0);
    }
}
