//! Symplectic diagonalization of `H = Σ A a†a + ½(B a†a† + h.c.) + (f a† + h.c.) + c`.
//!
//! With `α = (a, a†)` the Heisenberg equations read `i α̇ = M α`,
//! `M = η [[A, B], [B*, A*]]`, `η = diag(1, −1)`. Normal modes are the
//! eigenvectors of `M` with positive Krein norm `x†ηx`; their eigenvalues are
//! the mode frequencies (negative for inverted modes). Modes are first split
//! into uncoupled components, so a decoupled zero mode cannot spoil the rest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::SpectraError;
use crate::boson::ModeId;
use crate::hamiltonian::QuadraticBosonForm;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Stability {
    /// Real spectrum, diagonalizable.
    Stable,
    /// Real spectrum but defective (e.g. a free `(a + a†)²` mode).
    Marginal { zero_modes: usize },
    /// Complex symplectic eigenvalues; `growth_rates` are their imaginary parts.
    Unstable { growth_rates: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct NormalModes {
    pub modes: Vec<ModeId>,
    /// Frequencies of diagonalizable modes (defective ones count as 0), ascending.
    pub frequencies: Vec<f64>,
    /// All `2n` eigenvalues of `M`, ordered by real then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// `(a; a†) = T (b; b†)` when stable, columns ordered as `frequencies`.
    pub transformation: Option<DMatrix<Complex64>>,
    /// Shift `a → a + d` removing the linear term.
    pub displacement: DVector<Complex64>,
    pub stability: Stability,
    /// Energy of the normal-mode vacuum (stable forms only).
    pub vacuum_energy: Option<f64>,
}

impl NormalModes {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    /// The normal-mode vacuum is the ground state.
    pub fn positive_definite(&self) -> bool {
        self.is_stable() && self.frequencies.iter().all(|&w| w > 0.0)
    }
}

fn metric(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            Complex64::new(0.0, 0.0)
        } else if i < n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        }
    })
}

/// `max |T†ηT − η|`.
pub fn symplectic_residual(t: &DMatrix<Complex64>) -> f64 {
    let eta = metric(t.nrows() / 2);
    (t.adjoint() * &eta * t - eta).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Connected components of the coupling graph, each sorted.
fn components(form: &QuadraticBosonForm) -> Vec<Vec<usize>> {
    let n = form.dim();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            let i = comp[k];
            for j in 0..n {
                if !seen[j] && (form.a[(i, j)].norm() > 0.0 || form.b[(i, j)].norm() > 0.0) {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

struct Component {
    eigenvalues: Vec<Complex64>,
    /// `(frequency, [u; v])` for positive-norm modes.
    modes: Vec<(f64, DVector<Complex64>)>,
    zero_modes: usize,
    growth: Vec<f64>,
}

fn diagonalize_component(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Component {
    let n = a.nrows();
    let mut hd = DMatrix::zeros(2 * n, 2 * n);
    hd.view_mut((0, 0), (n, n)).copy_from(a);
    hd.view_mut((0, n), (n, n)).copy_from(b);
    hd.view_mut((n, 0), (n, n)).copy_from(&b.conjugate());
    hd.view_mut((n, n), (n, n)).copy_from(&a.conjugate());
    let eta = metric(n);
    let m = &eta * &hd;
    let scale = max_abs(&m).max(f64::MIN_POSITIVE);

    let mut eig: Vec<Complex64> = m.clone().schur().eigenvalues().expect("complex Schur form is triangular").iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));

    // Cluster numerically equal eigenvalues (defective blocks split by ~√ε).
    let tol = 1e-6 * scale;
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for &l in &eig {
        match clusters.iter_mut().find(|c| c.iter().any(|x| (x - l).norm() <= tol)) {
            Some(c) => c.push(l),
            None => clusters.push(vec![l]),
        }
    }

    let mut out = Component { eigenvalues: eig.clone(), modes: Vec::new(), zero_modes: 0, growth: Vec::new() };
    for c in &clusters {
        let mean = c.iter().sum::<Complex64>() / c.len() as f64;
        let spread = c.iter().map(|x| (x - mean).norm()).fold(0.0, f64::max);
        if mean.im.abs() > tol {
            if mean.im > 0.0 {
                out.growth.extend(std::iter::repeat_n(mean.im, c.len()));
            }
            continue;
        }
        let shifted = &m - DMatrix::from_diagonal_element(2 * n, 2 * n, Complex64::new(mean.re, 0.0));
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let thr = 1e-8 * scale + 2.0 * spread;
        let null: Vec<DVector<Complex64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= thr)
            .map(|(i, _)| v_t.row(i).adjoint())
            .collect();
        if null.len() < c.len() {
            // Defective: no normal mode; each Jordan pair is one marginal mode.
            if mean.re >= -tol {
                out.zero_modes += c.len().div_ceil(2);
            }
            continue;
        }
        let v = DMatrix::from_columns(&null);
        let gram = v.adjoint() * &eta * &v;
        let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
        let se = gram.symmetric_eigen();
        for (k, &g) in se.eigenvalues.iter().enumerate() {
            if g.abs() < 1e-8 {
                out.zero_modes += 1;
                continue;
            }
            if g > 0.0 {
                let x = &v * se.eigenvectors.column(k) / Complex64::new(g.sqrt(), 0.0);
                let w = (x.adjoint() * &hd * &x)[(0, 0)].re;
                out.modes.push((w, x));
            }
        }
    }
    out
}

/// Normal modes of a Hermitian quadratic form.
pub fn bogoliubov_diagonalize(form: &QuadraticBosonForm) -> Result<NormalModes, SpectraError> {
    let n = form.dim();
    let scale = form.a.iter().chain(form.b.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    if form.hermiticity_residual() > 1e-9 * scale.max(1.0) {
        return Err(SpectraError::Input(format!("form is not Hermitian (residual {:.3e})", form.hermiticity_residual())));
    }
    let hd = form.doubled_matrix();

    // Displacement: H_d (d; d*) = −(f; f*).
    let mut rhs = DVector::zeros(2 * n);
    for i in 0..n {
        rhs[i] = -form.f[i];
        rhs[n + i] = -form.f[i].conj();
    }
    let fnorm = rhs.norm();
    let x = if fnorm == 0.0 {
        DVector::zeros(2 * n)
    } else {
        let svd = hd.clone().svd(true, true);
        let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let x = svd.solve(&rhs, eps).map_err(|e| SpectraError::Input(e.to_string()))?;
        let res = (&hd * &x - &rhs).norm() / fnorm;
        if res > 1e-8 {
            return Err(SpectraError::NoDisplacement(res));
        }
        x
    };
    let displacement = x.rows(0, n).into_owned();

    let mut eigenvalues = Vec::new();
    let mut modes: Vec<(f64, Vec<usize>, DVector<Complex64>)> = Vec::new();
    let mut zero_modes = 0;
    let mut growth = Vec::new();
    for comp in components(form) {
        let k = comp.len();
        let sub = |m: &DMatrix<Complex64>| DMatrix::from_fn(k, k, |i, j| m[(comp[i], comp[j])]);
        let c = diagonalize_component(&sub(&form.a), &sub(&form.b));
        eigenvalues.extend(c.eigenvalues);
        zero_modes += c.zero_modes;
        growth.extend(c.growth);
        for (w, v) in c.modes {
            modes.push((w, comp.clone(), v));
        }
        if c.zero_modes > 0 {
            modes.extend(std::iter::repeat_n((0.0, Vec::new(), DVector::zeros(0)), c.zero_modes));
        }
    }
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    modes.sort_by(|x, y| x.0.total_cmp(&y.0));
    growth.sort_by(|x, y| y.total_cmp(x));

    let stability = if !growth.is_empty() {
        Stability::Unstable { growth_rates: growth }
    } else if zero_modes > 0 {
        Stability::Marginal { zero_modes }
    } else {
        Stability::Stable
    };
    let frequencies: Vec<f64> = modes.iter().map(|m| m.0).collect();

    let (transformation, vacuum_energy) = if stability == Stability::Stable && modes.len() == n {
        let mut t = DMatrix::zeros(2 * n, 2 * n);
        for (col, (_, comp, v)) in modes.iter().enumerate() {
            let k = comp.len();
            for (r, &g) in comp.iter().enumerate() {
                let (u, w) = (v[r], v[k + r]);
                t[(g, col)] = u;
                t[(n + g, col)] = w;
                t[(g, n + col)] = w.conj();
                t[(n + g, n + col)] = u.conj();
            }
        }
        let trace_a: f64 = (0..n).map(|i| form.a[(i, i)].re).sum();
        let shift = 0.5 * (rhs.adjoint() * &x)[(0, 0)].re;
        let e0 = form.constant.re - 0.5 * trace_a + 0.5 * frequencies.iter().sum::<f64>() - shift;
        (Some(t), Some(e0))
    } else {
        (None, None)
    };

    Ok(NormalModes { modes: form.modes.clone(), frequencies, eigenvalues, transformation, displacement, stability, vacuum_energy })
}
