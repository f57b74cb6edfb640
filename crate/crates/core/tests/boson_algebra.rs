use magrotor_core::boson::*;
use magrotor_core::HalfInt;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use ModeId::*;

fn a(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::annihilator(m)
}
fn ad(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::creator(m)
}
fn n(m: ModeId) -> BosonPolynomial {
    BosonPolynomial::number(m)
}
fn k(c: SymCoeff) -> BosonPolynomial {
    BosonPolynomial::constant(c)
}
fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}
fn jpow(stored: i16) -> SymCoeff {
    SymCoeff::pow(Sym::J, stored)
}
fn spow(stored: i16) -> SymCoeff {
    SymCoeff::pow(Sym::S, stored)
}

/// Largest doubled J exponent present, if any.
fn max_j2(p: &BosonPolynomial) -> Option<i32> {
    p.terms().flat_map(|(_, c)| c.terms().map(|(s, _)| s.j2()).collect::<Vec<_>>()).max()
}

#[test]
fn spin_map_examples() {
    let s3 = hp_map_spin(&OpExpr::letter(SpinOp::S3), h(-8)).unwrap();
    assert_eq!(s3, k(spow(2)).sub(&n(S)));

    let lead = hp_map_spin(&OpExpr::letter(SpinOp::SUp), h(1)).unwrap();
    assert_eq!(lead, a(S).scale(&SymCoeff::sqrt(2).mul(&spow(1))));

    // √(2S)(s − s†s s/(4S))
    let next = hp_map_spin(&OpExpr::letter(SpinOp::SUp), h(-1)).unwrap();
    let want = a(S).sub(&n(S).mul(&a(S)).scale(&SymCoeff::ratio(1, 4).mul(&spow(-2)))).scale(&SymCoeff::sqrt(2).mul(&spow(1)));
    assert_eq!(next, want);
    assert_eq!(next.to_text(), "s : 1*sqrt(2)*S^1/2\ns† s^2 : -1/4*sqrt(2)*S^-1/2\n");

    assert_eq!(hp_map_spin(&OpExpr::letter(SpinOp::S3), h(3)), Err(BosonError::CutoffAboveLeading(h(3))));
}

#[test]
fn spin_words_multiply_in_order() {
    // [S↑, S↓] = 2 S3 holds exactly at leading order up to the dropped S^0 terms.
    let e = OpExpr::word(&[SpinOp::SUp, SpinOp::SDown]).plus(SymCoeff::int(-1), &[SpinOp::SDown, SpinOp::SUp]);
    let lead = hp_map_spin(&e, h(1)).unwrap();
    // leading order: 2S(s s† − s† s) = 2S
    assert_eq!(lead, k(SymCoeff::int(2).mul(&spow(2))));
}

#[test]
fn exact_spin_fock_reproduces_spin_matrices() {
    for twice in 1..=8 {
        let s = h(twice);
        let [s3, sup, sdn] = hp_spin_fock(s);
        let dim = (twice + 1) as usize;
        let sv = s.value();
        for row in 0..dim {
            for col in 0..dim {
                // occupation n ↔ k_S = S − n
                let (kr, kc) = (sv - row as f64, sv - col as f64);
                let want3 = if row == col { kc } else { 0.0 };
                let want_up = if kr == kc + 1.0 { ((sv - kc) * (sv + kc + 1.0)).sqrt() } else { 0.0 };
                let want_dn = if kr == kc - 1.0 { ((sv + kc) * (sv - kc + 1.0)).sqrt() } else { 0.0 };
                assert!((s3[(row, col)] - want3).abs() < 1e-14);
                assert!((sup[(row, col)] - want_up).abs() < 1e-12, "S={s} ({row},{col})");
                assert!((sdn[(row, col)] - want_dn).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn spin_series_converges_to_exact_root() {
    let s = h(40);
    let values = SymValues::new().with(Sym::S, s.value());
    let [_, exact, _] = hp_spin_fock(s);
    let exact = exact.map(|x| Complex64::new(x, 0.0));
    let levels = 6;
    let window = exact.view((0, 0), (levels - 1, levels - 1)).into_owned();
    let mut last = f64::INFINITY;
    for order in [1, -1, -3, -5] {
        let p = hp_map_spin(&OpExpr::letter(SpinOp::SUp), h(order)).unwrap();
        let m = p.to_fock_matrix(&[(S, levels)], &values).unwrap();
        let err = (m.view((0, 0), (levels - 1, levels - 1)) - &window).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < last, "order {order}: {err} vs {last}");
        last = err;
    }
    assert!(last < 1e-3, "{last}");
}

#[test]
fn rotor_map_examples() {
    let xj = ad(J).add(&a(J));
    let j3 = hp_map_j(&OpExpr::letter(JOp::J3), h(-8)).unwrap();
    let want = k(jpow(2).neg())
        .sub(&xj.scale(&SymCoeff::sqrt(2).mul(&SymCoeff::ratio(1, 2)).mul(&jpow(1))))
        .sub(&n(J).scale(&SymCoeff::ratio(1, 2)))
        .add(&n(K));
    assert_eq!(j3, want);

    let jz = hp_map_j(&OpExpr::letter(JOp::Jz), h(-8)).unwrap();
    assert_eq!(jz, want.sub(&n(K)).add(&n(M)));

    let lead = hp_map_j(&OpExpr::letter(JOp::JUp), h(1)).unwrap();
    assert_eq!(lead, ad(K).scale(&SymCoeff::sqrt(2).mul(&jpow(1))));
    let next = hp_map_j(&OpExpr::letter(JOp::JUp), h(0)).unwrap();
    assert_eq!(next, lead.add(&xj.mul(&ad(K)).scale(&SymCoeff::ratio(1, 2))));
    let plus = hp_map_j(&OpExpr::letter(JOp::JPlus), h(0)).unwrap();
    assert_eq!(plus, ad(M).scale(&SymCoeff::sqrt(2).mul(&jpow(1))).add(&xj.mul(&ad(M)).scale(&SymCoeff::ratio(1, 2))));
    let minus = hp_map_j(&OpExpr::letter(JOp::JMinus), h(0)).unwrap();
    assert_eq!(minus, plus.dagger());
}

/// The total angular momentum written out line by line in reference form.
fn jsq_reference() -> BosonPolynomial {
    let xj = ad(J).add(&a(J));
    let nj = n(J);
    let line1 = k(jpow(2).mul(&jpow(2)).add(&jpow(2)));
    let line1b = xj.scale(&jpow(2).mul(&SymCoeff::sqrt(2)).mul(&jpow(1)));
    let line2 = xj.mul(&xj).scale(&SymCoeff::ratio(1, 2)).add(&nj).scale(&jpow(2));
    let anti = xj.mul(&nj).add(&nj.mul(&xj)).scale(&SymCoeff::ratio(1, 2));
    let line3 = anti.add(&xj).scale(&SymCoeff::sqrt(2).mul(&SymCoeff::ratio(1, 2)).mul(&jpow(1)));
    let half_n = nj.scale(&SymCoeff::ratio(1, 2));
    let line4 = half_n.mul(&half_n.add(&BosonPolynomial::one()));
    line1.add(&line1b).add(&line2).add(&line3).add(&line4)
}

#[test]
fn total_angular_momentum_term_by_term() {
    let jsq = hp_map_j(&OpExpr::letter(JOp::JSquared), h(-8)).unwrap();
    assert_eq!(jsq, jsq_reference());
    // The reference leading constant is J(J+1); normal ordering J(ĵ+ĵ†)²/2 adds J/2.
    let reference_constant = jpow(4).add(&jpow(2));
    assert_eq!(jsq.coefficient(&Monomial::ONE), reference_constant.add(&jpow(2).mul(&SymCoeff::ratio(1, 2))));
    let (quad, dropped) = truncate(&jsq, 2, 8);
    let (want, _) = truncate(&jsq_reference(), 2, 8);
    assert_eq!(quad, want);
    assert!(quad.max_degree() == 2 && dropped.count > 0);
}

#[test]
fn exact_rotor_map_on_bosonic_states() {
    // |J mJ kJ⟩ ↔ d†^{2J} m†^{J+mJ} k†^{J+kJ}|0⟩: J↑ = k†(d†d − k†k)^{1/2} has
    // ⟨kJ+1|J↑|kJ⟩ = √(2J − (J+kJ) − 1 + 1)·√(J+kJ+1) = √((J−kJ)(J+kJ+1)).
    for twice_j in 0..8 {
        let j = twice_j as f64 / 2.0;
        for t in 0..twice_j {
            let kj = -j + t as f64;
            let nk = j + kj;
            let amp = (nk + 1.0).sqrt() * (2.0 * j - nk).sqrt();
            assert!((amp - ((j - kj) * (j + kj + 1.0)).sqrt()).abs() < 1e-12);
        }
        // J² = (d†d/2)(d†d/2 + 1)
        let dd = 2.0 * j;
        assert_eq!((dd / 2.0) * (dd / 2.0 + 1.0), j * (j + 1.0));
    }
}

#[test]
fn dictionary_examples() {
    let one = HalfInt::ONE;
    let zero = HalfInt::ZERO;
    let bracket = BosonPolynomial::one().add(&n(K)).add(&n(M)).sub(&ad(K).mul(&ad(M))).sub(&a(K).mul(&a(M)));
    let d100 = bosonize_d(one, zero, zero, 2).unwrap();
    assert_eq!(d100, BosonPolynomial::one().sub(&bracket.scale(&jpow(-2))));
    let d400 = bosonize_d(HalfInt::int(4), zero, zero, 2).unwrap();
    assert_eq!(d400, BosonPolynomial::one().sub(&bracket.scale(&jpow(-2).mul(&SymCoeff::int(10)))));
    let d200 = bosonize_d(HalfInt::int(2), zero, zero, 2).unwrap();
    assert_eq!(d200, BosonPolynomial::one().sub(&bracket.scale(&jpow(-2).mul(&SymCoeff::int(3)))));

    let d1m1 = bosonize_d(one, one, -one, 2).unwrap();
    let want = a(K).mul(&a(K)).sub(&ad(M).mul(&a(K)).scale(&SymCoeff::int(2))).add(&ad(M).mul(&ad(M)));
    assert_eq!(d1m1, want.scale(&SymCoeff::ratio(1, 2).mul(&jpow(-2))));

    // Cross-term coefficient −1/(2√2) on the 1/J part of D¹₀₁.
    let d101 = bosonize_d(one, zero, one, 2).unwrap();
    let jdk = Monomial::from_powers(&[(J, 1, 0), (K, 1, 0)]);
    assert_eq!(d101.coefficient(&jdk), SymCoeff::sqrt(2).mul(&SymCoeff::ratio(-1, 4)).mul(&jpow(-2)));
    let jdm = Monomial::from_powers(&[(J, 1, 0), (M, 0, 1)]);
    assert_eq!(d101.coefficient(&jdm), SymCoeff::sqrt(2).mul(&SymCoeff::ratio(3, 4)).mul(&jpow(-2)));

    // Order filter at J^{-1/2}: only √(1/J)(k† − m) survives.
    let lead = bosonize_d(one, zero, one, 1).unwrap();
    assert_eq!(lead, ad(K).sub(&a(M)).scale(&jpow(-1)));
    let (t, dropped) = truncate(&d101, 2, 1);
    assert_eq!(t, lead);
    assert_eq!(dropped.count, 4);

    // D^4_{01} leading √(10/J)
    let d401 = bosonize_d(HalfInt::int(4), zero, one, 1).unwrap();
    assert_eq!(d401, ad(K).sub(&a(M)).scale(&SymCoeff::sqrt(10).mul(&jpow(-1))));

    // Conjugation relations in reference form.
    let d10m1 = bosonize_d(one, zero, -one, 2).unwrap();
    assert_eq!(d10m1, d101.dagger().neg());
    let d1mm = bosonize_d(one, -one, -one, 2).unwrap();
    assert_eq!(d1mm, bosonize_d(one, one, one, 2).unwrap().dagger());
}

#[test]
fn dictionary_rejects_unlisted_components() {
    let e = bosonize_d(HalfInt::int(2), HalfInt::ONE, HalfInt::ONE, 2);
    assert!(matches!(e, Err(BosonError::Unsupported { .. })));
    assert!(bosonize_d(HalfInt::int(3), HalfInt::ZERO, HalfInt::ZERO, 2).is_err());
    assert!(bosonize_d(HalfInt::HALF, HalfInt::HALF, HalfInt::HALF, 2).is_err());
    assert_eq!(bosonize_d(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO, 3), Err(BosonError::BeyondTable(3)));
}

/// Σ_k D¹_{mk} (D¹_{mk})† − 1 for a row m.
fn unitarity_row(m: i32) -> BosonPolynomial {
    let mut acc = BosonPolynomial::one().neg();
    for kk in -1..=1 {
        let d = bosonize_d(HalfInt::ONE, HalfInt::int(m), HalfInt::int(kk), 2).unwrap();
        acc = acc.add(&d.mul(&d.dagger()));
    }
    acc
}

#[test]
fn bosonized_unitarity_to_stated_order() {
    let r = unitarity_row(0);
    assert!(!r.is_zero());
    // every surviving coefficient is O(J^{-3/2}) or smaller
    assert!(max_j2(&r).unwrap() <= -3, "{}", r.to_text());
}

#[test]
fn lab_commutator_with_d00() {
    let jz = hp_map_j(&OpExpr::letter(JOp::Jz), h(-8)).unwrap();
    let d = bosonize_d(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO, 2).unwrap();
    let comm = jz.commutator(&d);
    // Nothing survives through O(J^{-1/2}); at O(1/J) the dictionary's missing
    // O(J^{-3/2}) ĵ-dependence leaves (1/J)(k†m† − k m).
    assert!(max_j2(&comm).unwrap() <= -2);
    let residual = ad(K).mul(&ad(M)).sub(&a(K).mul(&a(M))).scale(&jpow(-2));
    assert_eq!(comm, residual);
}

#[test]
fn truncation_reports_dropped_quartic() {
    let nn = n(S).mul(&n(S));
    let (kept, dropped) = truncate(&nn, 2, 8);
    assert_eq!(kept, n(S));
    assert_eq!(dropped.count, 1);
    let (m, _) = dropped.dominant.unwrap();
    assert_eq!(m, Monomial::from_powers(&[(S, 2, 2)]));
}

// ---- random polynomials -------------------------------------------------

fn poly_strategy() -> impl Strategy<Value = BosonPolynomial> {
    let modes = [K, M, S];
    let term = (0usize..3, 0u8..3, 0u8..3, 0usize..3, 0u8..2, 0u8..2, -3i64..4, 1i64..4, -2i64..3);
    prop::collection::vec(term, 1..4).prop_map(move |ts| {
        let mut p = BosonPolynomial::zero();
        for (m1, p1, q1, m2, p2, q2, re, den, im) in ts {
            let mono = Monomial::from_powers(&[(modes[m1], p1, q1), (modes[m2], p2, q2)]);
            let c = SymCoeff::ratio(re, den).add(&SymCoeff::imag(im, 1)).mul(&SymCoeff::pow(Sym::WI, (re.rem_euclid(3)) as i16));
            p.add_term(mono, c);
        }
        p
    })
}

fn fock(p: &BosonPolynomial, levels: usize) -> DMatrix<Complex64> {
    let v = SymValues::new().with(Sym::WI, 1.3);
    p.to_fock_matrix(&[(K, levels), (M, levels), (S, levels)], &v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_is_associative(x in poly_strategy(), y in poly_strategy(), z in poly_strategy()) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
    }

    #[test]
    fn dagger_reverses_products(x in poly_strategy(), y in poly_strategy()) {
        prop_assert_eq!(x.mul(&y).dagger(), y.dagger().mul(&x.dagger()));
        prop_assert_eq!(x.dagger().dagger(), x);
    }

    #[test]
    fn product_matches_fock_matrices(x in poly_strategy(), y in poly_strategy()) {
        // A factor raises any occupation by at most 3, so entries between
        // states with all occupations < levels − 3 are free of truncation.
        let levels = 7;
        let (fx, fy, fxy) = (fock(&x, levels), fock(&y, levels), fock(&x.mul(&y), levels));
        let prod = |r: usize, c: usize| -> Complex64 { (0..fx.ncols()).map(|t| fx[(r, t)] * fy[(t, c)]).sum() };
        let safe = |i: usize| {
            let occ = [i / (levels * levels), (i / levels) % levels, i % levels];
            occ.iter().all(|&o| o + 3 < levels)
        };
        let safe_idx: Vec<usize> = (0..fx.nrows()).filter(|&i| safe(i)).collect();
        for &r in &safe_idx {
            for &c in &safe_idx {
                let want = prod(r, c);
                prop_assert!((fxy[(r, c)] - want).norm() < 1e-9 * (1.0 + want.norm()));
            }
        }
    }
}
