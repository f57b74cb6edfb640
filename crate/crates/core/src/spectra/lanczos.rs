//! Lowest eigenvalues of a sparse Hermitian operator: Lanczos with full
//! reorthogonalization, explicit restarts, and locking of converged pairs so
//! that degenerate levels are found one copy at a time.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpectraError;
use crate::hamiltonian::ExactHamiltonian;
use crate::sparse::SparseOp;
use crate::HalfInt;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    pub seed: u64,
    /// Residual bound relative to the spectral scale.
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { seed: 0x6d61_6772, tol: 1e-9, max_krylov: 120, max_restarts: 60 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    /// `‖H x − λ x‖` per pair.
    pub residuals: Vec<f64>,
}

type Vector = Vec<Complex64>;

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scale(x: &mut [Complex64], a: f64) {
    for v in x {
        *v *= a;
    }
}

/// Two passes of classical Gram–Schmidt against each basis.
fn orthogonalize(w: &mut [Complex64], bases: &[&[Vector]]) {
    for _ in 0..2 {
        for basis in bases {
            for v in basis.iter() {
                let c = dot(v, w);
                axpy(w, -c, v);
            }
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    (0..dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
}

fn matvec(h: &SparseOp, x: &[Complex64]) -> Vector {
    let mut y = vec![Complex64::new(0.0, 0.0); h.dim()];
    h.matvec(x, &mut y);
    y
}

enum Run {
    /// Pairs with small residual (all Ritz pairs if the Krylov space closed).
    Converged(Vec<(f64, Vector, f64)>),
    NotConverged { restart: Vector, residuals: Vec<f64> },
}

/// One Lanczos run in the orthogonal complement of `locked`.
fn run(h: &SparseOp, start: Vector, locked: &[Vector], need: usize, opts: &LanczosOptions, anorm: &mut f64) -> Run {
    let mut v0 = start;
    orthogonalize(&mut v0, &[locked]);
    let n0 = norm(&v0);
    if n0 == 0.0 {
        return Run::Converged(Vec::new());
    }
    scale(&mut v0, 1.0 / n0);
    let mut basis: Vec<Vector> = vec![v0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let room = h.dim() - locked.len();
    let cap = opts.max_krylov.min(room);
    loop {
        let j = basis.len() - 1;
        let mut w = matvec(h, &basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        axpy(&mut w, Complex64::new(-a, 0.0), &basis[j]);
        if j > 0 {
            axpy(&mut w, Complex64::new(-beta[j - 1], 0.0), &basis[j - 1]);
        }
        orthogonalize(&mut w, &[locked, &basis]);
        let b = norm(&w);
        let m = alpha.len();
        let closed = b <= 1e-13 * anorm.max(a.abs()).max(f64::MIN_POSITIVE) || m == room;
        if closed || m == cap || (m >= need && m % 10 == 0) {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c || c + 1 == r {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let se = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| se.eigenvalues[x].total_cmp(&se.eigenvalues[y]));
            for &i in &order {
                *anorm = anorm.max(se.eigenvalues[i].abs());
            }
            let take = if closed { m } else { need.min(m) };
            let ritz = |i: usize| {
                let mut x = vec![Complex64::new(0.0, 0.0); h.dim()];
                for (k, v) in basis.iter().enumerate() {
                    axpy(&mut x, Complex64::new(se.eigenvectors[(k, i)], 0.0), v);
                }
                x
            };
            let res: Vec<f64> = order.iter().take(take).map(|&i| (b * se.eigenvectors[(m - 1, i)]).abs()).collect();
            let bound = opts.tol * anorm.max(f64::MIN_POSITIVE);
            if closed || (m >= need && res.iter().all(|&r| r <= bound)) {
                return Run::Converged(order.iter().take(take).zip(&res).map(|(&i, &r)| (se.eigenvalues[i], ritz(i), r)).collect());
            }
            if m == cap {
                let mut restart = vec![Complex64::new(0.0, 0.0); h.dim()];
                for &i in order.iter().take(need) {
                    axpy(&mut restart, Complex64::new(1.0, 0.0), &ritz(i));
                }
                return Run::NotConverged { restart, residuals: res };
            }
        }
        beta.push(b);
        scale(&mut w, 1.0 / b);
        basis.push(w);
    }
}

/// Lowest `count` eigenpairs, deterministic for a fixed seed.
pub fn lowest_eigenpairs(h: &SparseOp, count: usize, opts: &LanczosOptions) -> Result<Eigenpairs, SpectraError> {
    let dim = h.dim();
    if count > dim {
        return Err(SpectraError::Input(format!("requested {count} eigenvalues of a {dim}-dimensional operator")));
    }
    if h.hermiticity_residual() > 1e-10 * h.max_abs().max(1e-300) {
        return Err(SpectraError::Input("operator is not Hermitian".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut anorm = h.max_abs();
    let mut vals: Vec<f64> = Vec::new();
    let mut vecs: Vec<Vector> = Vec::new();
    let mut res: Vec<f64> = Vec::new();
    let mut restarts = 0;
    let mut iterations = 0;
    let mut start = random_vector(&mut rng, dim);
    let mut verified = false;
    while !verified {
        let need = if vals.len() < count { count - vals.len() } else { 1 };
        if vals.len() == dim {
            break;
        }
        match run(h, start, &vecs, need, opts, &mut anorm) {
            Run::Converged(pairs) => {
                iterations += 1;
                start = random_vector(&mut rng, dim);
                if vals.len() >= count {
                    // Verification pass: anything below the current `count`-th value was missed.
                    let mut sorted = vals.clone();
                    sorted.sort_by(f64::total_cmp);
                    let cut = sorted[count - 1];
                    let below: Vec<_> = pairs.into_iter().filter(|p| p.0 < cut - opts.tol * anorm).collect();
                    if below.is_empty() {
                        verified = true;
                    }
                    for (l, x, r) in below {
                        vals.push(l);
                        vecs.push(x);
                        res.push(r);
                    }
                } else {
                    for (l, x, r) in pairs {
                        vals.push(l);
                        vecs.push(x);
                        res.push(r);
                    }
                }
            }
            Run::NotConverged { restart, residuals } => {
                restarts += 1;
                iterations += 1;
                if restarts > opts.max_restarts {
                    return Err(SpectraError::NotConverged { iterations: iterations * opts.max_krylov, residuals });
                }
                start = restart;
            }
        }
    }
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    order.truncate(count);
    Ok(Eigenpairs {
        values: order.iter().map(|&i| vals[i]).collect(),
        residuals: order.iter().map(|&i| res[i]).collect(),
        vectors: order.into_iter().map(|i| vecs[i].clone()).collect(),
    })
}

pub fn sparse_lowest_eigs(h: &SparseOp, count: usize, opts: &LanczosOptions) -> Result<Vec<f64>, SpectraError> {
    lowest_eigenpairs(h, count, opts).map(|p| p.values)
}

/// State indices grouped by the conserved body projection `kJ + kS`.
pub fn k_sectors(h: &ExactHamiltonian) -> BTreeMap<HalfInt, Vec<usize>> {
    let mut out: BTreeMap<HalfInt, Vec<usize>> = BTreeMap::new();
    for (i, s) in h.states.iter().enumerate() {
        out.entry(s.k_total()).or_default().push(i);
    }
    out
}

/// Lowest `count` levels in each listed `K` sector (absent sectors are
/// skipped), solved in parallel with per-sector seeds.
pub fn lowest_by_k_sector(
    h: &ExactHamiltonian,
    sectors: &[HalfInt],
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<(HalfInt, Vec<f64>)>, SpectraError> {
    let all = k_sectors(h);
    let jobs: Vec<(HalfInt, &Vec<usize>)> = sectors.iter().filter_map(|k| all.get(k).map(|idx| (*k, idx))).collect();
    jobs.par_iter()
        .map(|&(k, idx)| {
            let block = h.op.restrict(idx);
            let o = LanczosOptions { seed: opts.seed ^ (k.twice() as i64 as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15), ..*opts };
            sparse_lowest_eigs(&block, count.min(idx.len()), &o).map(|v| (k, v))
        })
        .collect()
}
