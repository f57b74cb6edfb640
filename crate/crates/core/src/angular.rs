//! Clebsch–Gordan coefficients, Wigner d/D functions, Euler rotations and
//! quadrature checks of the D-function integrals.
//!
//! Convention: `D^j_{mk}(α,β,γ) = ⟨j k| e^{iγJz} e^{iβJy} e^{iαJz} |j m⟩
//! = e^{i(mα + kγ)} d^j_{mk}(β)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::exact::ExactCoeff;
use crate::half::HalfInt;

#[derive(Debug, Error, PartialEq)]
pub enum AngularError {
    #[error("invalid angular momentum: |{m}| > {j} or inconsistent parity")]
    Domain { j: HalfInt, m: HalfInt },
}

fn check(j: HalfInt, m: HalfInt) -> Result<(), AngularError> {
    if j.twice() < 0 || m.abs() > j || !j.same_parity(m) {
        return Err(AngularError::Domain { j, m });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        EulerAngles { alpha, beta, gamma }
    }

    /// Uniformly distributed in the parameter box (not Haar-uniform).
    pub fn random<R: rand::Rng>(rng: &mut R) -> Self {
        EulerAngles {
            alpha: rng.gen_range(0.0..2.0 * PI),
            beta: rng.gen_range(0.0..PI),
            gamma: rng.gen_range(0.0..2.0 * PI),
        }
    }
}

fn fact(n: i32) -> BigInt {
    (1..=n.max(0) as u32).fold(BigInt::one(), |a, k| a * k)
}

/// Exact Condon–Shortley coefficient `⟨j1 m1, j2 m2 | J M⟩` from the Racah sum.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<ExactCoeff, AngularError> {
    check(j1, m1)?;
    check(j2, m2)?;
    check(j, m)?;
    if m1 + m2 != m {
        return Ok(ExactCoeff::zero());
    }
    let (a, b, c) = (j1.twice(), j2.twice(), j.twice());
    if c < (a - b).abs() || c > a + b || (a + b + c) % 2 != 0 {
        return Ok(ExactCoeff::zero());
    }
    // Every factorial argument below is an integer because of the parity checks.
    let h = |t: i32| t / 2;
    let (ma, mb, mc) = (m1.twice(), m2.twice(), m.twice());
    let tri = BigRational::new(
        BigInt::from(c + 1) * fact(h(c + a - b)) * fact(h(c - a + b)) * fact(h(a + b - c)),
        fact(h(a + b + c) + 1),
    );
    let proj = fact(h(c + mc)) * fact(h(c - mc)) * fact(h(a - ma)) * fact(h(a + ma)) * fact(h(b - mb)) * fact(h(b + mb));
    let kmin = 0.max(h(b - c - ma)).max(h(a - c + mb));
    let kmax = h(a + b - c).min(h(a - ma)).min(h(b + mb));
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact(k)
            * fact(h(a + b - c) - k)
            * fact(h(a - ma) - k)
            * fact(h(b + mb) - k)
            * fact(h(c - b + ma) + k)
            * fact(h(c - a - mb) + k);
        let t = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    if sum.is_zero() {
        return Ok(ExactCoeff::zero());
    }
    let sign = if sum.is_negative() { -1 } else { 1 };
    Ok(ExactCoeff::new(sign, tri * BigRational::from_integer(proj) * &sum * &sum))
}

/// Exact orthogonality sums for one `(j1, j2)` pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CgOrthogonality {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub sums: usize,
    /// Sums whose exact value differs from the Kronecker delta.
    pub failures: usize,
}

/// `Σ_{m1} ⟨m1 m2|J M⟩⟨m1 m2|J' M⟩ = δ_{JJ'}` and
/// `Σ_J ⟨m1 m2|J M⟩⟨m1' m2'|J M⟩ = δ_{m1m1'}`, summed in exact surd arithmetic.
pub fn check_cg_orthogonality(j1: HalfInt, j2: HalfInt) -> Result<CgOrthogonality, AngularError> {
    use crate::exact::Surd;
    check(j1, j1)?;
    check(j2, j2)?;
    let js: Vec<HalfInt> = {
        let lo = (j1 - j2).abs();
        let mut v = Vec::new();
        let mut j = lo;
        while j <= j1 + j2 {
            v.push(j);
            j = j + HalfInt::ONE;
        }
        v
    };
    let one = Surd::rational(BigRational::one());
    let delta = |eq: bool| if eq { one.clone() } else { Surd::zero() };
    let (mut sums, mut failures) = (0, 0);
    let mut tally = |s: Surd| {
        sums += 1;
        if !s.is_zero() {
            failures += 1;
        }
    };
    for m in (j1 + j2).projections() {
        let pairs: Vec<(HalfInt, HalfInt)> =
            j1.projections().map(|m1| (m1, m - m1)).filter(|(_, m2)| m2.abs() <= j2).collect();
        let allowed: Vec<HalfInt> = js.iter().copied().filter(|j| m.abs() <= *j).collect();
        let table: Vec<Vec<ExactCoeff>> = pairs
            .iter()
            .map(|&(m1, m2)| allowed.iter().map(|&j| clebsch_gordan(j1, m1, j2, m2, j, m)).collect())
            .collect::<Result<_, _>>()?;
        for a in 0..allowed.len() {
            for b in a..allowed.len() {
                let s = table.iter().fold(Surd::zero(), |acc, row| &acc + &(&row[a] * &row[b]).to_surd());
                tally(&s + &(-&delta(a == b)));
            }
        }
        for p in 0..pairs.len() {
            for q in p..pairs.len() {
                let s = (0..allowed.len()).fold(Surd::zero(), |acc, c| &acc + &(&table[p][c] * &table[q][c]).to_surd());
                tally(&s + &(-&delta(p == q)));
            }
        }
    }
    Ok(CgOrthogonality { j1, j2, sums, failures })
}

/// Float convenience wrapper; out-of-range projections give 0.
pub fn cg_f64(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    clebsch_gordan(j1, m1, j2, m2, j, m).map(|c| c.to_f64()).unwrap_or(0.0)
}

fn ffact(n: i32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Small-d function `d^j_{mk}(β) = ⟨j k|e^{iβJy}|j m⟩`.
pub fn wigner_d(j: HalfInt, m: HalfInt, k: HalfInt, beta: f64) -> Result<f64, AngularError> {
    check(j, m)?;
    check(j, k)?;
    let (jj, mm, kk) = (j.twice(), m.twice(), k.twice());
    let h = |t: i32| t / 2;
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pref = (ffact(h(jj + mm)) * ffact(h(jj - mm)) * ffact(h(jj + kk)) * ffact(h(jj - kk))).sqrt();
    let smin = 0.max(h(kk - mm));
    let smax = h(jj + kk).min(h(jj - mm));
    let mut acc = 0.0;
    for t in smin..=smax {
        let sign = if (h(mm - kk) + t) % 2 == 0 { 1.0 } else { -1.0 };
        let den = ffact(h(jj + kk) - t) * ffact(t) * ffact(h(mm - kk) + t) * ffact(h(jj - mm) - t);
        acc += sign * c.powi(h(2 * jj + kk - mm) - 2 * t) * s.powi(h(mm - kk) + 2 * t) / den;
    }
    Ok(pref * acc)
}

/// Wigner D function `e^{i(mα+kγ)} d^j_{mk}(β)`.
pub fn wigner_big_d(j: HalfInt, m: HalfInt, k: HalfInt, a: &EulerAngles) -> Result<Complex64, AngularError> {
    let d = wigner_d(j, m, k, a.beta)?;
    let phase = m.value() * a.alpha + k.value() * a.gamma;
    Ok(Complex64::from_polar(d, phase))
}

fn d1(m: i32, k: i32, a: &EulerAngles) -> Complex64 {
    wigner_big_d(HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), a).unwrap()
}

/// The body←lab rotation `R = R_z(γ) R_y(β) R_z(α)` with passive sign pattern.
pub fn euler_rotation_matrix(a: &EulerAngles) -> [[f64; 3]; 3] {
    let rz = |t: f64| [[t.cos(), t.sin(), 0.0], [-t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let b = a.beta;
    let ry = [[b.cos(), 0.0, -b.sin()], [0.0, 1.0, 0.0], [b.sin(), 0.0, b.cos()]];
    mat3(&mat3(&rz(a.gamma), &ry), &rz(a.alpha))
}

fn mat3(x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    r
}

/// Coefficients of `R_{iμ}` as a combination of rank-1 D functions:
/// `R_{iμ} = Σ c · D¹_{mk}` returned as `(m, k, c)` triples.
pub fn rotation_in_d(i: usize, mu: usize) -> Vec<(i32, i32, Complex64)> {
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ir = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    match (i, mu) {
        (0, 0) => vec![(1, 1, h), (-1, -1, h), (1, -1, -h), (-1, 1, -h)],
        (0, 1) => vec![(1, 1, -ih), (-1, -1, ih), (-1, 1, -ih), (1, -1, ih)],
        (0, 2) => vec![(0, -1, r), (0, 1, -r)],
        (1, 0) => vec![(1, 1, ih), (-1, -1, -ih), (-1, 1, -ih), (1, -1, ih)],
        (1, 1) => vec![(1, 1, h), (-1, -1, h), (1, -1, h), (-1, 1, h)],
        (1, 2) => vec![(0, -1, -ir), (0, 1, -ir)],
        (2, 0) => vec![(-1, 0, r), (1, 0, -r)],
        (2, 1) => vec![(1, 0, ir), (-1, 0, ir)],
        (2, 2) => vec![(0, 0, Complex64::new(1.0, 0.0))],
        _ => panic!("rotation index out of range"),
    }
}

/// `R(Ω)` rebuilt from its D-function expansion.
pub fn rotation_from_d(a: &EulerAngles) -> [[Complex64; 3]; 3] {
    let mut r = [[Complex64::zero(); 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (mu, e) in row.iter_mut().enumerate() {
            *e = rotation_in_d(i, mu).into_iter().map(|(m, k, c)| c * d1(m, k, a)).sum();
        }
    }
    r
}

/// Largest entrywise deviation of the D-function reconstruction from `R(Ω)`.
pub fn rotation_identity_residual(a: &EulerAngles) -> f64 {
    let r = euler_rotation_matrix(a);
    let d = rotation_from_d(a);
    let mut worst = 0.0f64;
    for i in 0..3 {
        for mu in 0..3 {
            worst = worst.max((d[i][mu] - r[i][mu]).norm());
        }
    }
    worst
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for l in 2..=n {
                let p2 = ((2 * l - 1) as f64 * x * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integrates `f(Ω)` over SO(3) with measure `dα sinβ dβ dγ`.
pub fn integrate_so3<F: Fn(&EulerAngles) -> Complex64>(order: usize, f: F) -> Complex64 {
    let gl = gauss_legendre(order);
    let step = 2.0 * PI / order as f64;
    let mut acc = Complex64::zero();
    for &(x, w) in &gl {
        let beta = x.acos();
        for ia in 0..order {
            for ig in 0..order {
                let a = EulerAngles::new(ia as f64 * step, beta, ig as f64 * step);
                acc += f(&a) * w;
            }
        }
    }
    acc * step * step
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureCheck {
    pub integral: Complex64,
    pub expected: f64,
    pub residual: f64,
    /// False when the order is below the exactness bound for the integrand.
    pub converged: bool,
}

/// Default quadrature order for integrands of total rank `q`.
pub fn default_order(total_rank: i32) -> usize {
    (4 * (total_rank + 1)) as usize
}

/// `∫ D^{q1*}_{m1k1} D^{q2}_{m2k2} dΩ` against `8π²/(2q1+1) δδδ`.
#[allow(clippy::too_many_arguments)]
pub fn check_d_orthogonality(
    q1: HalfInt,
    m1: HalfInt,
    k1: HalfInt,
    q2: HalfInt,
    m2: HalfInt,
    k2: HalfInt,
    order: usize,
) -> Result<QuadratureCheck, AngularError> {
    check(q1, m1)?;
    check(q1, k1)?;
    check(q2, m2)?;
    check(q2, k2)?;
    let integral = integrate_so3(order, |a| {
        wigner_big_d(q1, m1, k1, a).unwrap().conj() * wigner_big_d(q2, m2, k2, a).unwrap()
    });
    let expected = if (q1, m1, k1) == (q2, m2, k2) { 8.0 * PI * PI / (q1.value() * 2.0 + 1.0) } else { 0.0 };
    let bound = ((q1 + q2).value().ceil() as usize) + 1;
    Ok(QuadratureCheck { integral, expected, residual: (integral - expected).norm(), converged: order >= bound })
}

/// `∫ D^{L'*}_{M'K'} D^q_{mk} D^L_{MK} dΩ` against `8π²/(2L'+1)·CG·CG`.
pub fn check_triple_integral(
    lp: (HalfInt, HalfInt, HalfInt),
    q: (HalfInt, HalfInt, HalfInt),
    l: (HalfInt, HalfInt, HalfInt),
    order: usize,
) -> Result<QuadratureCheck, AngularError> {
    let integral = integrate_so3(order, |a| {
        wigner_big_d(lp.0, lp.1, lp.2, a).unwrap().conj()
            * wigner_big_d(q.0, q.1, q.2, a).unwrap()
            * wigner_big_d(l.0, l.1, l.2, a).unwrap()
    });
    let cg1 = clebsch_gordan(q.0, q.1, l.0, l.1, lp.0, lp.1)?.to_f64();
    let cg2 = clebsch_gordan(q.0, q.2, l.0, l.2, lp.0, lp.2)?.to_f64();
    let expected = 8.0 * PI * PI / (2.0 * lp.0.value() + 1.0) * cg1 * cg2;
    let bound = ((lp.0 + q.0 + l.0).value().ceil() as usize) + 1;
    Ok(QuadratureCheck { integral, expected, residual: (integral - expected).norm(), converged: order >= bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn cg_examples() {
        let one = HalfInt::ONE;
        let z = HalfInt::ZERO;
        assert_eq!(clebsch_gordan(one, z, z, z, one, z).unwrap(), ExactCoeff::one());
        assert!(clebsch_gordan(one, one, one, one, h(4), one).unwrap().is_zero());
        let c = clebsch_gordan(one, z, one, z, h(4), z).unwrap();
        assert_eq!(c.sign, 1);
        assert_eq!(c.rational_square, BigRational::new(2.into(), 3.into()));
    }

    #[test]
    fn cg_rejects_bad_projection() {
        assert!(clebsch_gordan(HalfInt::ONE, h(4), HalfInt::ONE, HalfInt::ZERO, h(4), h(4)).is_err());
    }

    #[test]
    fn small_d_examples() {
        let b = 0.73;
        assert!((wigner_d(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO, b).unwrap() - b.cos()).abs() < 1e-15);
        let v = wigner_d(h(1), h(1), h(1), PI / 2.0).unwrap();
        assert!((v - (PI / 4.0).cos()).abs() < 1e-15);
        for m in h(3).projections() {
            for k in h(3).projections() {
                let d = wigner_d(h(3), m, k, 0.0).unwrap();
                assert_eq!(d, if m == k { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_x4() {
        let s: f64 = gauss_legendre(3).iter().map(|(x, w)| w * x.powi(4)).sum();
        assert!((s - 0.4).abs() < 1e-14);
    }
}
