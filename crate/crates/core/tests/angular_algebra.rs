use magrotor_core::angular::*;
use magrotor_core::HalfInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

#[test]
fn rotation_matrix_from_d_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let worst = (0..100).map(|_| rotation_identity_residual(&EulerAngles::random(&mut rng))).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn rotation_matrix_is_orthogonal() {
    let r = euler_rotation_matrix(&EulerAngles::new(0.3, 1.1, -2.0));
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[i][k] * r[j][k]).sum();
            assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }
}

#[test]
fn cg_orthogonality_exact_up_to_six() {
    let mut total = 0;
    for a in 0..=12 {
        for b in 0..=12 {
            let r = check_cg_orthogonality(h(a), h(b)).unwrap();
            assert_eq!(r.failures, 0, "j1={} j2={}", r.j1, r.j2);
            total += r.sums;
        }
    }
    assert!(total > 10_000, "{total}");
}

/// Every (q, m, k) with 2q ≤ `max_twice`.
fn labels(max_twice: i32) -> Vec<(HalfInt, HalfInt, HalfInt)> {
    let mut v = Vec::new();
    for t in 0..=max_twice {
        let q = h(t);
        for m in q.projections() {
            for k in q.projections() {
                v.push((q, m, k));
            }
        }
    }
    v
}

#[test]
fn d_function_normalization_and_orthogonality() {
    let all = labels(6);
    let mut worst = 0.0f64;
    for &(q1, m1, k1) in &all {
        for &(q2, m2, k2) in &all {
            // Different projections vanish by the azimuthal integrals; check those on the diagonal only.
            if (m1, k1) != (m2, k2) || q2 < q1 {
                continue;
            }
            let c = check_d_orthogonality(q1, m1, k1, q2, m2, k2, default_order((q1 + q2).value().ceil() as i32)).unwrap();
            assert!(c.converged);
            worst = worst.max(c.residual);
        }
    }
    assert!(worst < 1e-8, "{worst}");
    let c = check_d_orthogonality(h(2), h(2), h(0), h(2), h(0), h(0), default_order(2)).unwrap();
    assert!(c.residual < 1e-8 && c.expected == 0.0);
}

fn triple(lp: (HalfInt, HalfInt, HalfInt), q: (HalfInt, HalfInt, HalfInt), l: (HalfInt, HalfInt, HalfInt)) -> QuadratureCheck {
    let rank = (lp.0 + q.0 + l.0).value().ceil() as i32;
    check_triple_integral(lp, q, l, default_order(rank)).unwrap()
}

#[test]
fn triple_integral_all_rank_one() {
    let one = labels(2).into_iter().filter(|x| x.0 == HalfInt::ONE).collect::<Vec<_>>();
    let mut worst = 0.0f64;
    for &q in &one {
        for &l in &one {
            for lpt in 0..=2 {
                let lp = HalfInt::int(lpt);
                let (mp, kp) = (q.1 + l.1, q.2 + l.2);
                if mp.abs() > lp || kp.abs() > lp {
                    continue;
                }
                let c = triple((lp, mp, kp), q, l);
                worst = worst.max(c.residual);
            }
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn triple_integral_sampled_up_to_rank_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut nonzero = 0;
    for _ in 0..150 {
        let pick = |rng: &mut ChaCha8Rng, twice: i32| {
            let q = h(twice);
            let m = h(-twice + 2 * rng.gen_range(0..=twice));
            let k = h(-twice + 2 * rng.gen_range(0..=twice));
            (q, m, k)
        };
        let qt = rng.gen_range(0..=6);
        let lt = rng.gen_range(0..=6);
        let q = pick(&mut rng, qt);
        let l = pick(&mut rng, lt);
        let (mp, kp) = (q.1 + l.1, q.2 + l.2);
        // L' in the coupling range with |M'|, |K'| allowed.
        let lo = (q.0 - l.0).abs().max(mp.abs()).max(kp.abs());
        let hi = q.0 + l.0;
        if lo > hi {
            continue;
        }
        let steps = (hi - lo).to_int();
        let lp = lo + HalfInt::int(rng.gen_range(0..=steps));
        let c = triple((lp, mp, kp), q, l);
        assert!(c.converged);
        if c.expected.abs() > 1e-6 {
            nonzero += 1;
        }
        worst = worst.max(c.residual);
    }
    assert!(worst < 1e-8, "{worst}");
    assert!(nonzero > 30, "{nonzero}");
}

#[test]
fn out_of_range_labels_are_rejected() {
    assert!(wigner_big_d(h(2), h(4), h(0), &EulerAngles::new(0.0, 0.0, 0.0)).is_err());
    assert!(check_cg_orthogonality(h(-2), h(2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_identity_holds(a in 0.0..6.3f64, b in 0.0..3.15f64, g in 0.0..6.3f64) {
        prop_assert!(rotation_identity_residual(&EulerAngles::new(a, b, g)) < 1e-12);
    }

    #[test]
    fn d_matrix_is_unitary(t in 0i32..7, a in 0.0..6.3f64, b in 0.0..3.15f64, g in 0.0..6.3f64) {
        let j = h(t);
        let e = EulerAngles::new(a, b, g);
        for m in j.projections() {
            for m2 in j.projections() {
                let s: num_complex::Complex64 = j
                    .projections()
                    .map(|k| wigner_big_d(j, m, k, &e).unwrap() * wigner_big_d(j, m2, k, &e).unwrap().conj())
                    .sum();
                let want = if m == m2 { 1.0 } else { 0.0 };
                prop_assert!((s - want).norm() < 1e-12);
            }
        }
    }
}
