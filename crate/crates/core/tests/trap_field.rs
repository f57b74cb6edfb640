use magrotor_core::angular::{euler_rotation_matrix, wigner_big_d, EulerAngles};
use magrotor_core::boson::{Sym, SymCoeff};
use magrotor_core::trap::*;
use magrotor_core::HalfInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fig2() -> TrapParams {
    TrapParams::new(1e-3, 1e4, 1e6)
}

/// A trap with unit length scale, so finite differences are well conditioned.
fn unit_trap() -> TrapParams {
    TrapParams::new(1.0, 0.3, 0.1)
}

#[test]
fn maxwell_constraints_by_finite_differences() {
    let p = fig2();
    let ell = p.length_scale();
    let h = 1e-6 * ell;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.3..0.3) * ell);
        let mut jac = [[0.0; 3]; 3]; // jac[i][j] = ∂_j B_i
        for j in 0..3 {
            let (mut rp, mut rm) = (r, r);
            rp[j] += h;
            rm[j] -= h;
            let (bp, bm) = (field_at(&p, rp), field_at(&p, rm));
            for i in 0..3 {
                jac[i][j] = (bp[i] - bm[i]) / (2.0 * h);
            }
        }
        let div = jac[0][0] + jac[1][1] + jac[2][2];
        let curl = [jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]];
        let scale = field_magnitude(&p, r) / ell;
        assert!(div.abs() < 1e-6 * scale, "div {div} at {r:?}");
        for c in curl {
            assert!(c.abs() < 1e-6 * scale, "curl {c} at {r:?}");
        }
    }
}

#[test]
fn harmonic_expansion_matches_magnitude_near_centre() {
    let p = fig2();
    let e = magnitude_expansion(&p).unwrap();
    for r in [[1e-9, 0.0, 0.0], [0.0, 2e-9, 0.0], [0.0, 0.0, 3e-8], [1e-9, -1e-9, 1e-8]] {
        let exact = field_magnitude(&p, r);
        let quad = e.magnitude(r);
        let dev = quad - p.b0;
        assert!((exact - quad).abs() < 1e-3 * dev.abs().max(1e-30), "{r:?}: {exact} vs {quad}");
    }
}

#[test]
fn bisector_is_unit() {
    let p = fig2();
    let ell = p.length_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * ell);
        let n = n_tilde(&p, r).unwrap();
        assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs() < 1e-12);
    }
}

fn lab(n: [f64; 3], c: LabComp) -> Complex64 {
    match c {
        LabComp::Z => Complex64::new(n[2], 0.0),
        LabComp::Plus => Complex64::new(n[0], n[1]),
        LabComp::Minus => Complex64::new(n[0], -n[1]),
    }
}

fn nt(p: &TrapParams, r: [f64; 3]) -> [f64; 3] {
    n_tilde(p, r).unwrap()
}

fn shifted(r: [f64; 3], axis: usize, h: f64) -> [f64; 3] {
    let mut r = r;
    r[axis] += h;
    r
}

/// Finite-difference derivative of a vector field at the origin.
fn fd(f: &dyn Fn([f64; 3]) -> [f64; 3], d: Deriv) -> [f64; 3] {
    let o = [0.0; 3];
    let comb = |a: [f64; 3], b: [f64; 3], c: [f64; 3], e: [f64; 3], s: f64| -> [f64; 3] {
        std::array::from_fn(|i| (a[i] - b[i] - c[i] + e[i]) / s)
    };
    let first = |axis: usize| {
        let h = 1e-5;
        let (p, m) = (f(shifted(o, axis, h)), f(shifted(o, axis, -h)));
        std::array::from_fn(|i| (p[i] - m[i]) / (2.0 * h))
    };
    let h = 1e-3;
    let pure = |axis: usize| {
        let (p, m, z) = (f(shifted(o, axis, h)), f(shifted(o, axis, -h)), f(o));
        std::array::from_fn(|i| (p[i] + m[i] - 2.0 * z[i]) / (h * h))
    };
    let mixed = |u: usize, v: usize| {
        let pp = f(shifted(shifted(o, u, h), v, h));
        let mm = f(shifted(shifted(o, u, -h), v, -h));
        let pm = f(shifted(shifted(o, u, h), v, -h));
        let mp = f(shifted(shifted(o, u, -h), v, h));
        comb(pp, pm, mp, mm, 4.0 * h * h)
    };
    match d {
        Deriv::Value => f(o),
        Deriv::X => first(0),
        Deriv::Y => first(1),
        Deriv::Z => first(2),
        Deriv::XX => pure(0),
        Deriv::YY => pure(1),
        Deriv::ZZ => pure(2),
        Deriv::XY => mixed(0, 1),
        Deriv::XZ => mixed(0, 2),
        Deriv::YZ => mixed(1, 2),
    }
}

const ALL_DERIVS: [Deriv; 10] =
    [Deriv::Value, Deriv::X, Deriv::Y, Deriv::Z, Deriv::XX, Deriv::YY, Deriv::ZZ, Deriv::XY, Deriv::XZ, Deriv::YZ];

#[test]
fn jet_matches_finite_differences() {
    let p = unit_trap();
    let jet = n_jet();
    let v = jet_values(&p);
    let f = |r: [f64; 3]| nt(&p, r);
    for d in ALL_DERIVS {
        let num = fd(&f, d);
        for c in [LabComp::Z, LabComp::Plus, LabComp::Minus] {
            let want = lab(num, c);
            let got = jet.get(d, c).eval(&v);
            let tol = if d.order() == 2 { 1e-5 } else { 1e-8 };
            assert!((got - want).norm() < tol, "{d:?} {c:?}: jet {got} vs fd {want}");
        }
    }
}

#[test]
fn jet_examples() {
    let jet = n_jet();
    let p = fig2();
    let v = jet_values(&p);
    let a = p.bp / (2.0 * p.b0);
    assert_eq!(jet.get(Deriv::Value, LabComp::Z), SymCoeff::one());
    assert!((jet.get(Deriv::Y, LabComp::Plus).eval(&v) - Complex64::new(0.0, -a)).norm() < 1e-9 * a);
    assert!((jet.get(Deriv::XX, LabComp::Z).eval(&v).re + a * a).abs() < 1e-9 * a * a);
    assert!((jet.get(Deriv::XZ, LabComp::Plus).eval(&v).re + p.bpp / (4.0 * p.b0)).abs() < 1e-6);
    assert_eq!(jet.nonzero().count(), 11);
}

#[test]
fn lamb_dicke_symbols_match_definitions() {
    // ∂ₓn₊ = B′/(2B0) must equal η/z, and ∂ₓ∂_z n₊ = −B″/(4B0) must equal −η′/z².
    let jet = n_jet();
    assert_eq!(jet.get(Deriv::X, LabComp::Plus), SymCoeff::pows(&[(Sym::Eta, 1), (Sym::Z, -1)]));
    assert_eq!(jet.get(Deriv::XZ, LabComp::Plus), SymCoeff::pows(&[(Sym::EtaP, 1), (Sym::Z, -2)]).neg());
    let p = fig2();
    let z = 3.3e-9;
    let ld = LambDickeParams::new(&p, z);
    assert!((ld.eta - p.bp * z / (2.0 * p.b0)).abs() < 1e-18);
    assert!((ld.eta_prime - p.bpp * z * z / (4.0 * p.b0)).abs() < 1e-24);
    let v = ld.sym_values();
    assert!((jet.get(Deriv::X, LabComp::Plus).eval(&v).re - p.bp / (2.0 * p.b0)).abs() < 1e-6);
    assert!(ld.ordered());
}

fn d1(m: i32, k: i32, a: &EulerAngles) -> Complex64 {
    wigner_big_d(HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), a).unwrap()
}

fn body(rot: &[[f64; 3]; 3], n: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|mu| rot[i][mu] * n[mu]).sum())
}

fn body_comp(b: [f64; 3], c: BodyComp) -> Complex64 {
    match c {
        BodyComp::Three => Complex64::new(b[2], 0.0),
        BodyComp::Up => Complex64::new(b[0], -b[1]),
        BodyComp::Down => Complex64::new(b[0], b[1]),
    }
}

#[test]
fn body_tables_reproduce_rotated_field() {
    let p = unit_trap();
    let v = jet_values(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let ang = EulerAngles::random(&mut rng);
        let rot = euler_rotation_matrix(&ang);
        let f = |r: [f64; 3]| body(&rot, nt(&p, r));
        for order in 0..=2 {
            for (d, c, comb) in body_frame_n_coefficients(order).unwrap() {
                let got = eval_combination(&comb, &v, |m, k| d1(m, k, &ang));
                let want = body_comp(fd(&f, d), c);
                let tol = if order == 2 { 1e-5 } else { 1e-8 };
                assert!((got - want).norm() < tol, "{d:?} {c:?}: {got} vs {want}");
            }
        }
    }
}

fn table(d: Deriv, c: BodyComp) -> Vec<(i32, i32, SymCoeff)> {
    body_frame_n(&n_jet(), d, c)
}

fn a_over(twice_den: u32) -> SymCoeff {
    // (η/z)/√twice_den ... helper for B′/(2B0) · 1/√n
    SymCoeff::pows(&[(Sym::Eta, 1), (Sym::Z, -1)]).mul(&SymCoeff::sqrt(twice_den).mul(&SymCoeff::ratio(1, twice_den as i64)))
}

#[test]
fn reference_body_tables() {
    let a = SymCoeff::pows(&[(Sym::Eta, 1), (Sym::Z, -1)]);
    // order 0
    assert_eq!(table(Deriv::Value, BodyComp::Three), vec![(0, 0, SymCoeff::one())]);
    assert_eq!(table(Deriv::Value, BodyComp::Up), vec![(0, 1, SymCoeff::sqrt(2).neg())]);
    assert_eq!(table(Deriv::Value, BodyComp::Down), vec![(0, -1, SymCoeff::sqrt(2))]);
    // x: −(B′/(2√2B0))(D10 − D−10), −(B′/2B0)(D−11 − D11), −(B′/2B0)(D1−1 − D−1−1)
    let s = a_over(2);
    assert_eq!(table(Deriv::X, BodyComp::Three), vec![(-1, 0, s.clone()), (1, 0, s.neg())]);
    assert_eq!(table(Deriv::X, BodyComp::Up), vec![(-1, 1, a.neg()), (1, 1, a.clone())]);
    assert_eq!(table(Deriv::X, BodyComp::Down), vec![(-1, -1, a.clone()), (1, -1, a.neg())]);
    // z: all vanish
    for c in [BodyComp::Three, BodyComp::Up, BodyComp::Down] {
        assert!(table(Deriv::Z, c).is_empty());
    }
}

#[test]
fn reference_y_derivatives_differ_from_rotated_jet() {
    // As reference: ∂_y n₃ = −i(B′/(2√2B0))(D10 − D−10); applying T(Ω) to the
    // jet column instead gives −i(B′/(2√2B0))(D10 + D−10).
    let ia = SymCoeff::imag(1, 1).mul(&a_over(2));
    let reference = vec![(-1, 0, ia.clone()), (1, 0, ia.neg())];
    let derived = table(Deriv::Y, BodyComp::Three);
    assert_ne!(derived, reference);
    assert_eq!(derived, vec![(-1, 0, ia.neg()), (1, 0, ia.neg())]);
    let ia1 = SymCoeff::imag(1, 1).mul(&SymCoeff::pows(&[(Sym::Eta, 1), (Sym::Z, -1)]));
    assert_eq!(table(Deriv::Y, BodyComp::Up), vec![(-1, 1, ia1.clone()), (1, 1, ia1.clone())]);
}

#[test]
fn adiabatic_report_both_bounds() {
    let p = fig2();
    let rep = adiabatic_report(&p, 1e-9, 2e-9);
    assert!((rep.axial_bound_m - (1e-3f64 / 1e6).sqrt()).abs() < 1e-15);
    assert!((rep.transverse_bound_simplified_m - 1e-7).abs() < 1e-20);
    assert!(rep.transverse_bound_m > rep.transverse_bound_simplified_m);
    assert!(rep.axial_ratio < 1.0 && rep.transverse_ratio < 1.0);
}

#[test]
fn unsupported_order() {
    assert_eq!(body_frame_n_coefficients(3).unwrap_err(), TrapError::UnsupportedOrder(3));
}
