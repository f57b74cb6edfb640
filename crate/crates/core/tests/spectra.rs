use magrotor_core::boson::ModeId;
use magrotor_core::hamiltonian::*;
use magrotor_core::spectra::*;
use magrotor_core::trap::TrapParams;
use magrotor_core::HalfInt;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn h(n: i32) -> HalfInt {
    HalfInt::int(n)
}

fn form(a: &[&[f64]], b: &[&[f64]], f: &[f64]) -> QuadraticBosonForm {
    let modes = [ModeId::S, ModeId::K, ModeId::M, ModeId::J][..a.len()].to_vec();
    let mut q = QuadraticBosonForm::zeros(&modes);
    let n = a.len();
    q.a = DMatrix::from_fn(n, n, |i, j| c(a[i][j]));
    q.b = DMatrix::from_fn(n, n, |i, j| c(b[i][j]));
    q.f = DVector::from_fn(n, |i, _| c(f[i]));
    q
}

#[test]
fn decoupled_mode_is_identity() {
    let m = bogoliubov_diagonalize(&form(&[&[0.7]], &[&[0.0]], &[0.0])).unwrap();
    assert_eq!(m.stability, Stability::Stable);
    assert!((m.frequencies[0] - 0.7).abs() < 1e-14);
    let t = m.transformation.unwrap();
    assert!((t[(0, 0)].norm() - 1.0).abs() < 1e-14);
    assert!(t[(1, 0)].norm() < 1e-14);
    assert!((m.vacuum_energy.unwrap()).abs() < 1e-14);
}

#[test]
fn two_mode_squeezing() {
    let (w, g) = (1.3, 0.5);
    let m = bogoliubov_diagonalize(&form(&[&[w, 0.0], &[0.0, w]], &[&[0.0, g], &[g, 0.0]], &[0.0, 0.0])).unwrap();
    let want = (w * w - g * g).sqrt();
    assert_eq!(m.frequencies.len(), 2);
    for x in &m.frequencies {
        assert!((x - want).abs() < 1e-12, "{x} vs {want}");
    }
    let t = m.transformation.unwrap();
    assert!(symplectic_residual(&t) < 1e-10);
    // Vacuum energy of the squeezed pair: √(ω² − g²) − ω.
    assert!((m.vacuum_energy.unwrap() - (want - w)).abs() < 1e-12);
}

#[test]
fn single_mode_squeeze_with_drive() {
    // ξ1(j + j†) + ω_j j†j + ξ2(j + j†)²
    let (wj, xi1, xi2) = (0.8, 0.3, 0.25);
    let mut q = form(&[&[wj + 2.0 * xi2]], &[&[2.0 * xi2]], &[xi1]);
    q.constant = c(xi2);
    let m = bogoliubov_diagonalize(&q).unwrap();
    assert!((m.frequencies[0] - (wj * (wj + 4.0 * xi2)).sqrt()).abs() < 1e-12);
    assert!((m.displacement[0] - c(-xi1 / (wj + 4.0 * xi2))).norm() < 1e-12);
    assert!(symplectic_residual(m.transformation.as_ref().unwrap()) < 1e-10);
}

/// Dense Fock-space oracle for the normal-mode spectrum including the vacuum energy.
#[test]
fn normal_modes_reproduce_truncated_fock_spectrum() {
    let mut q = form(&[&[1.0, 0.2], &[0.2, 1.6]], &[&[0.1, 0.15], &[0.15, -0.05]], &[0.05, -0.1]);
    q.constant = c(0.3);
    let m = bogoliubov_diagonalize(&q).unwrap();
    let e0 = m.vacuum_energy.unwrap();
    let (w0, w1) = (m.frequencies[0], m.frequencies[1]);
    let mut predicted = vec![e0, e0 + w0, e0 + w1, e0 + 2.0 * w0, e0 + w0 + w1];
    predicted.sort_by(f64::total_cmp);

    let nc = 20;
    let dim = nc * nc;
    let ann = DMatrix::from_fn(nc, nc, |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) });
    let id = DMatrix::<Complex64>::identity(nc, nc);
    let ops = [ann.kronecker(&id), id.kronecker(&ann)];
    let mut hm = DMatrix::<Complex64>::identity(dim, dim) * q.constant;
    for i in 0..2 {
        hm += ops[i].adjoint() * q.f[i] + &ops[i] * q.f[i].conj();
        for j in 0..2 {
            hm += ops[i].adjoint() * &ops[j] * q.a[(i, j)];
            let pair = ops[i].adjoint() * ops[j].adjoint() * q.b[(i, j)] * c(0.5);
            hm += &pair + pair.adjoint();
        }
    }
    let mut ev: Vec<f64> = hm.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    for (e, p) in ev.iter().zip(&predicted) {
        assert!(((e - p) / p.abs().max(1.0)).abs() < 1e-8, "{e} vs {p}");
    }
}

#[test]
fn singular_form_with_drive_has_no_displacement() {
    let r = bogoliubov_diagonalize(&form(&[&[0.0]], &[&[0.0]], &[1.0]));
    assert!(matches!(r, Err(SpectraError::NoDisplacement(_))));
}

#[test]
fn free_quadrature_is_a_marginal_zero_mode() {
    // ξ2 (ĵ + ĵ†)² alone: no restoring force for the conjugate quadrature.
    let xi2 = 0.4;
    let m = bogoliubov_diagonalize(&form(&[&[2.0 * xi2]], &[&[2.0 * xi2]], &[0.0])).unwrap();
    assert_eq!(m.stability, Stability::Marginal { zero_modes: 1 });
    assert_eq!(m.frequencies, vec![0.0]);
    assert!(m.transformation.is_none());
    // Alongside an ordinary mode, the ordinary one is still found.
    let q = form(&[&[2.0 * xi2, 0.0], &[0.0, 1.1]], &[&[2.0 * xi2, 0.0], &[0.0, 0.0]], &[0.0, 0.0]);
    let m = bogoliubov_diagonalize(&q).unwrap();
    assert_eq!(m.frequencies.len(), 2);
    assert!((m.frequencies[1] - 1.1).abs() < 1e-12);
}

#[test]
fn inverted_mode_has_negative_frequency() {
    let m = bogoliubov_diagonalize(&form(&[&[-0.9, 0.0], &[0.0, 0.4]], &[&[0.0, 0.0], &[0.0, 0.0]], &[0.0, 0.0])).unwrap();
    assert_eq!(m.stability, Stability::Stable);
    assert!((m.frequencies[0] + 0.9).abs() < 1e-14);
    assert!(!m.positive_definite());
}

#[test]
fn parametric_resonance_is_unstable() {
    // −ŝ†ŝ + k̂†k̂ + g(ŝ†k̂† + h.c.): eigenvalues −1 ± i g, 1 ± i g.
    let g = 0.3;
    let m = bogoliubov_diagonalize(&form(&[&[-1.0, 0.0], &[0.0, 1.0]], &[&[0.0, g], &[g, 0.0]], &[0.0, 0.0])).unwrap();
    match &m.stability {
        Stability::Unstable { growth_rates } => {
            assert_eq!(growth_rates.len(), 2);
            for r in growth_rates {
                assert!((r - g).abs() < 1e-10, "{r}");
            }
        }
        other => panic!("expected instability, got {other:?}"),
    }
    assert!(m.transformation.is_none());
}

#[test]
fn fig2_quadratic_hamiltonian_is_dynamically_unstable() {
    let f = compute_frequencies(&MagnetParams::cobalt(1e-8), &TrapParams::new(1e-3, 1e4, 1e6), None).unwrap();
    let m = bogoliubov_diagonalize(&build_quadratic_hg(&f)).unwrap();
    assert!(matches!(m.stability, Stability::Unstable { .. }), "{:?}", m.stability);
    assert_eq!(m.eigenvalues.len(), 14);
}

fn positive_form(seed: &[f64]) -> QuadraticBosonForm {
    let n = 3;
    let mut a = DMatrix::from_fn(n, n, |i, j| if i == j { c(2.0 + seed[i]) } else { c(0.0) });
    let mut b = DMatrix::zeros(n, n);
    let mut k = 3;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(seed[k] * 0.3, seed[k + 1] * 0.3);
            a[(i, j)] = z;
            a[(j, i)] = z.conj();
            k += 2;
        }
    }
    for i in 0..n {
        for j in i..n {
            let z = Complex64::new(seed[k] * 0.3, seed[k + 1] * 0.3);
            b[(i, j)] = z;
            b[(j, i)] = z;
            k += 2;
        }
    }
    let mut q = QuadraticBosonForm::zeros(&[ModeId::S, ModeId::K, ModeId::M]);
    q.a = a;
    q.b = b;
    q.f = DVector::from_fn(n, |i, _| Complex64::new(seed[k + i], -seed[k + i] * 0.5));
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bogoliubov_invariants(seed in proptest::collection::vec(-1.0f64..1.0, 24), perm in Just([2usize, 0, 1])) {
        let q = positive_form(&seed);
        let m = bogoliubov_diagonalize(&q).unwrap();
        prop_assert_eq!(&m.stability, &Stability::Stable);
        let t = m.transformation.as_ref().unwrap();
        prop_assert!(symplectic_residual(t) < 1e-10);
        // T† H_d T is diag(ω, ω).
        let d = t.adjoint() * q.doubled_matrix() * t;
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { m.frequencies[i % 3] } else { 0.0 };
                prop_assert!((d[(i, j)] - c(want)).norm() < 1e-9);
            }
        }
        let r = bogoliubov_diagonalize(&q.relabel(&perm)).unwrap();
        for (x, y) in m.frequencies.iter().zip(&r.frequencies) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert!((m.vacuum_energy.unwrap() - r.vacuum_energy.unwrap()).abs() < 1e-10);
    }
}

// ---- Lanczos ----

#[test]
fn lanczos_diagonal_with_degeneracies() {
    let d: Vec<f64> = (0..400).map(|i| ((i * 37) % 50) as f64 * 0.25 - 3.0).collect();
    let op = magrotor_core::sparse::SparseOp::diagonal_real(&d);
    let got = sparse_lowest_eigs(&op, 12, &LanczosOptions::default()).unwrap();
    let mut want = d.clone();
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{got:?}");
    }
}

#[test]
fn lanczos_matches_dense_on_small_rotor() {
    let spin = h(1);
    let f = FrequencySet::reduced(spin, spin, 1.0, 0.0, 0.7);
    let inc = Include { h0: true, hi: true, ..Include::NONE };
    let hx = build_exact_hamiltonian(&f, &ExactSpec::angular(h(4), None, inc)).unwrap();
    let mut dense: Vec<f64> = hx.op.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    let opts = LanczosOptions::default();
    let pairs = lowest_eigenpairs(&hx.op, 10, &opts).unwrap();
    for (g, w) in pairs.values.iter().zip(&dense) {
        assert!((g - w).abs() < 1e-9 * w.abs().max(1.0), "{:?} vs {:?}", pairs.values, &dense[..10]);
    }
    let spread = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(pairs.residuals.iter().all(|&r| r < 1e-8 * spread), "{:?}", pairs.residuals);
    // Deterministic for a fixed seed.
    let again = lowest_eigenpairs(&hx.op, 10, &opts).unwrap();
    assert_eq!(pairs.values, again.values);
}

#[test]
fn lanczos_with_dipolar_term_matches_dense() {
    let spin = h(1);
    let f = FrequencySet::reduced(spin, spin, 1.0, 0.3, -0.4);
    let inc = Include { vp: false, ..Include::ALL };
    let hx = build_exact_hamiltonian(&f, &ExactSpec::angular(h(4), Some(h(-1)), inc)).unwrap();
    let mut dense: Vec<f64> = hx.op.to_dense().symmetric_eigen().eigenvalues.iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    let got = sparse_lowest_eigs(&hx.op, 6, &LanczosOptions::default()).unwrap();
    for (g, w) in got.iter().zip(&dense) {
        assert!((g - w).abs() < 1e-9 * w.abs().max(1.0));
    }
    // Per-sector solves merge into the same low spectrum.
    let sectors: Vec<HalfInt> = k_sectors(&hx).into_keys().collect();
    let mut merged: Vec<f64> = lowest_by_k_sector(&hx, &sectors, 6, &LanczosOptions::default()).unwrap().into_iter().flat_map(|x| x.1).collect();
    merged.sort_by(f64::total_cmp);
    for (g, w) in merged.iter().zip(&dense).take(6) {
        assert!((g - w).abs() < 1e-9 * w.abs().max(1.0));
    }
}

#[test]
fn polarized_block_converged_in_jmax() {
    let spin = h(2);
    let f = FrequencySet::reduced(spin, spin, 1.0, 0.0, -0.5);
    let inc = Include { h0: true, hi: true, ..Include::NONE };
    let lo = |jmax: i32| {
        let hx = build_exact_hamiltonian(&f, &ExactSpec::angular(h(jmax), Some(-spin), inc)).unwrap();
        sparse_lowest_eigs(&hx.op, 5, &LanczosOptions::default()).unwrap()
    };
    let (a, b) = (lo(4), lo(8));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
    }
}

#[test]
fn lanczos_errors() {
    let op = magrotor_core::sparse::SparseOp::diagonal_real(&[1.0, 2.0]);
    assert!(sparse_lowest_eigs(&op, 3, &LanczosOptions::default()).is_err());
    let d: Vec<f64> = (0..2000).map(|i| (i as f64).sqrt()).collect();
    let op = magrotor_core::sparse::SparseOp::diagonal_real(&d);
    let tight = LanczosOptions { max_krylov: 3, max_restarts: 0, tol: 1e-14, ..LanczosOptions::default() };
    match sparse_lowest_eigs(&op, 4, &tight) {
        Err(SpectraError::NotConverged { residuals, .. }) => assert!(!residuals.is_empty()),
        other => panic!("{other:?}"),
    }
}

// ---- comparison ----

#[test]
fn greedy_matching() {
    let preds = predicted_gaps(&[0.5, 0.8, -0.1]);
    let values: Vec<f64> = preds.iter().map(|p| p.0).collect();
    assert_eq!(values, vec![0.5, 0.8, 1.0, 1.3, 1.6]);
    let modes = NormalModes {
        modes: vec![],
        frequencies: vec![0.5, 0.8],
        eigenvalues: vec![],
        transformation: None,
        displacement: DVector::zeros(0),
        stability: Stability::Stable,
        vacuum_energy: None,
    };
    let cmp = compare_spectra(&[0.45, 0.52, 3.0], &modes);
    assert_eq!(cmp.matches[0].predicted, Some(0.5));
    // 0.52 cannot reuse 0.5; nearest unused is 0.8.
    assert_eq!(cmp.matches[1].predicted, Some(0.8));
    assert_eq!(cmp.matches[2].predicted, None);
    assert_eq!(cmp.unmatched, 1);
    assert!(cmp.max_relative_error.is_infinite());
}

#[test]
fn reduced_model_spin_ten_matches_independent_construction() {
    let r = reduced_model_comparison(h(10), &ReducedModel::default(), &LanczosOptions::default()).unwrap();
    assert!(r.stable);
    for (x, y) in r.predicted_frequencies.iter().zip([0.5, 0.8, 1.0]) {
        assert!((x - y).abs() < 1e-12, "{:?}", r.predicted_frequencies);
    }
    // Independent dense/ARPACK construction of the same block.
    for (x, y) in r.exact_gaps.iter().zip([0.40668314, 0.74517627, 0.78208356]) {
        assert!((x - y).abs() < 1e-7, "{:?}", r.exact_gaps);
    }
    assert_eq!(r.comparison.unmatched, 0);
    assert!(r.comparison.max_relative_error <= 3.0 / 10f64.sqrt());
}

#[test]
fn decoupled_limit_gaps_are_larmor_quanta() {
    // Only the Larmor term: exact gaps are |ω_L| n, and the spin mode predicts |ω_L|.
    let model = ReducedModel { omega_i: 0.0, omega_d: 0.0, omega_l: -0.5, gaps: 1, ..ReducedModel::default() };
    let f = FrequencySet::reduced(h(3), h(3), 0.0, 0.0, -0.5);
    let form = build_quadratic_hg(&f).restrict(&[ModeId::S]).unwrap();
    let m = bogoliubov_diagonalize(&form).unwrap();
    assert!((m.frequencies[0] - 0.5).abs() < 1e-14);
    let r = reduced_model_comparison(h(3), &ReducedModel { k_window: 0, gaps: 1, ..model }, &LanczosOptions::default());
    // With ω_I = 0 the ground level is degenerate, so the first gap is zero.
    let r = r.unwrap();
    assert!(r.exact_gaps[0].abs() < 1e-9);
}
