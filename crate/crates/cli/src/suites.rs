//! Validation suites: each check reports a residual against a tolerance, or an
//! exact comparison, and never aborts the remaining checks.

use std::fmt::Write as _;

use magrotor_core::angular::{
    cg_f64, check_cg_orthogonality, check_d_orthogonality, check_triple_integral, default_order,
    rotation_identity_residual, EulerAngles,
};
use magrotor_core::boson::{bosonize_d, hp_map_j, BosonPolynomial, JOp, OpExpr};
use magrotor_core::hamiltonian::{
    expansion_coefficient_residuals, compute_frequencies, reference_v_jkm, run_bosonization_pipeline, reference_entry_residuals,
    v_jkm_monomials, validity_report, FrequencySet, MagnetParams, PipelineOptions, PipelineOutput,
};
use magrotor_core::rotor::{basis_change_unitarity_2to3, build_d_operator, verify_commutation_table, Rep2Basis};
use magrotor_core::sparse::SparseOp;
use magrotor_core::trap::{field_at, field_magnitude, magnitude_expansion, n_tilde, TrapParams};
use magrotor_core::HalfInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub passed: bool,
    /// Largest residual found (absent for exact comparisons).
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn tolerance(suite: &str, name: impl Into<String>, residual: f64, tol: f64, detail: impl Into<String>) -> Self {
        Check {
            suite: suite.into(),
            name: name.into(),
            passed: residual < tol,
            residual: Some(residual),
            tolerance: Some(tol),
            detail: detail.into(),
        }
    }

    fn exact(suite: &str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { suite: suite.into(), name: name.into(), passed, residual: None, tolerance: None, detail: detail.into() }
    }
}

pub const SUITES: [&str; 4] = ["algebra", "commutators", "bosonization", "field"];

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

// ---- algebra ---------------------------------------------------------------

pub fn rotation_identity(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let worst = (0..100).map(|_| rotation_identity_residual(&EulerAngles::random(&mut rng))).fold(0.0, f64::max);
    Check::tolerance("algebra", "rotation matrix from rank-1 D functions (100 random triples)", worst, 1e-12, "")
}

pub fn cg_orthogonality(max_twice: i32) -> Check {
    let results: Vec<_> = (0..=max_twice)
        .into_par_iter()
        .flat_map_iter(|a| (0..=max_twice).map(move |b| check_cg_orthogonality(h(a), h(b)).expect("valid labels")))
        .collect();
    let sums: usize = results.iter().map(|r| r.sums).sum();
    let bad: Vec<String> = results.iter().filter(|r| r.failures > 0).map(|r| format!("({}, {})", r.j1, r.j2)).collect();
    Check::exact(
        "algebra",
        format!("Clebsch–Gordan orthogonality, exact, j1, j2 ≤ {}", HalfInt::from_twice(max_twice)),
        bad.is_empty(),
        format!("{sums} exact sums; failing pairs: [{}]", bad.join(", ")),
    )
}

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

pub fn d_normalization(max_twice: i32) -> Check {
    let all = labels(max_twice);
    let pairs: Vec<_> = all
        .iter()
        .flat_map(|a| all.iter().filter(move |b| (a.1, a.2) == (b.1, b.2) && b.0 >= a.0).map(move |b| (*a, *b)))
        .collect();
    let worst = pairs
        .par_iter()
        .map(|&(a, b)| {
            let order = default_order((a.0 + b.0).value().ceil() as i32);
            check_d_orthogonality(a.0, a.1, a.2, b.0, b.1, b.2, order).expect("valid labels").residual
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Check::tolerance(
        "algebra",
        format!("D-function normalization and orthogonality, q ≤ {}", h(max_twice)),
        worst,
        1e-8,
        format!("{} integrals", pairs.len()),
    )
}

type Label = (HalfInt, HalfInt, HalfInt);

/// Every rank-1 ⊗ rank-1 triple, plus `samples` random triples with `q, L ≤ max`.
fn triple_labels(seed: u64, max_twice: i32, samples: usize) -> Vec<(Label, Label, Label)> {
    let mut out = Vec::new();
    let one: Vec<_> = labels(2).into_iter().filter(|x| x.0 == HalfInt::ONE).collect();
    for &q in &one {
        for &l in &one {
            for lp in 0..=2 {
                let lp = HalfInt::int(lp);
                let (mp, kp) = (q.1 + l.1, q.2 + l.2);
                if mp.abs() <= lp && kp.abs() <= lp {
                    out.push(((lp, mp, kp), q, l));
                }
            }
        }
    }
    let base = out.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, t: i32| (h(t), h(-t + 2 * rng.gen_range(0..=t)), h(-t + 2 * rng.gen_range(0..=t)));
    while out.len() < base + samples {
        let (qt, lt) = (rng.gen_range(0..=max_twice), rng.gen_range(0..=max_twice));
        let (q, l) = (pick(&mut rng, qt), pick(&mut rng, lt));
        let (mp, kp) = (q.1 + l.1, q.2 + l.2);
        let lo = (q.0 - l.0).abs().max(mp.abs()).max(kp.abs());
        let hi = q.0 + l.0;
        if lo > hi {
            continue;
        }
        let lp = lo + HalfInt::int(rng.gen_range(0..=(hi - lo).to_int()));
        out.push(((lp, mp, kp), q, l));
    }
    out
}

pub fn triple_integral(seed: u64, max_twice: i32, samples: usize) -> Check {
    let triples = triple_labels(seed, max_twice, samples);
    let worst = triples
        .par_iter()
        .map(|&(lp, q, l)| {
            let order = default_order((lp.0 + q.0 + l.0).value().ceil() as i32);
            check_triple_integral(lp, q, l, order).expect("valid labels").residual
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Check::tolerance(
        "algebra",
        format!("triple D integral against Clebsch–Gordan products, q ≤ {}", h(max_twice)),
        worst,
        1e-8,
        format!("{} integrals (all rank-1 pairs + {samples} seeded samples)", triples.len()),
    )
}

pub fn algebra(seed: u64) -> Vec<Check> {
    vec![rotation_identity(seed), cg_orthogonality(12), d_normalization(6), triple_integral(seed, 6, 120)]
}

// ---- commutators -------------------------------------------------------------

pub fn commutation_table(spin: HalfInt, jmax: HalfInt) -> Check {
    let name = format!("body/lab commutation table and [J, D] relations, S = {spin}, Jmax = {jmax}");
    let basis = match Rep2Basis::new(spin, jmax, None) {
        Ok(b) => b,
        Err(e) => return Check::exact("commutators", name, false, e.to_string()),
    };
    match verify_commutation_table(&basis) {
        Ok(rep) => {
            let worst = rep.entries.iter().max_by(|a, b| a.residual.total_cmp(&b.residual));
            let detail = worst.map(|e| format!("{} identities; worst: {} ({:.3e})", rep.entries.len(), e.identity, e.residual));
            Check::tolerance("commutators", name, rep.max_residual(), 1e-10, detail.unwrap_or_default())
        }
        Err(e) => Check::exact("commutators", name, false, e.to_string()),
    }
}

/// `D¹_{m1k1} D¹_{m2k2} = Σ_Q ⟨1m1 1m2|QM⟩⟨1k1 1k2|QK⟩ D^Q_{MK}` on the depth-2 interior.
pub fn product_rule(spin: HalfInt, jmax: HalfInt) -> Check {
    let name = format!("rank-1 D-operator product rule, S = {spin}, Jmax = {jmax}");
    let basis = match Rep2Basis::new(spin, jmax, None) {
        Ok(b) => b,
        Err(e) => return Check::exact("commutators", name, false, e.to_string()),
    };
    let mask = basis.interior_mask(HalfInt::int(2));
    let one = HalfInt::ONE;
    let d = |q: i32, m: i32, k: i32| build_d_operator(&basis, HalfInt::int(q), HalfInt::int(m), HalfInt::int(k)).expect("valid D");
    let rank1: Vec<Vec<SparseOp>> = (-1..=1).map(|m| (-1..=1).map(|k| d(1, m, k)).collect()).collect();
    let combos: Vec<(i32, i32, i32, i32)> = (0..81).map(|i| (i / 27 - 1, (i / 9) % 3 - 1, (i / 3) % 3 - 1, i % 3 - 1)).collect();
    let worst = combos
        .par_iter()
        .map(|&(m1, k1, m2, k2)| {
            let lhs = rank1[(m1 + 1) as usize][(k1 + 1) as usize].mul(&rank1[(m2 + 1) as usize][(k2 + 1) as usize]);
            let (mm, kk) = (m1 + m2, k1 + k2);
            let mut rhs = SparseOp::zeros(basis.dim());
            for q in mm.abs().max(kk.abs())..=2 {
                let w = cg_f64(one, h(2 * m1), one, h(2 * m2), HalfInt::int(q), HalfInt::int(mm))
                    * cg_f64(one, h(2 * k1), one, h(2 * k2), HalfInt::int(q), HalfInt::int(kk));
                rhs = rhs.axpby(Complex64::new(1.0, 0.0), &d(q, mm, kk), Complex64::new(w, 0.0));
            }
            lhs.sub(&rhs).max_abs_within(&mask)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Check::tolerance("commutators", name, worst, 1e-10, "81 (m, k) combinations")
}

pub fn basis_change(spin: HalfInt, jmax: HalfInt) -> Check {
    let mut worst = 0.0f64;
    let mut j = if spin.is_integer() { HalfInt::ZERO } else { HalfInt::HALF };
    while j <= jmax {
        for mj in j.projections() {
            worst = worst.max(basis_change_unitarity_2to3(j, mj, spin).unwrap_or(f64::INFINITY));
        }
        j = j + HalfInt::ONE;
    }
    Check::tolerance("commutators", format!("spin–rotor coupling basis change is unitary, S = {spin}, J ≤ {jmax}"), worst, 1e-12, "")
}

pub fn commutators(jmax: HalfInt, spins: &[HalfInt]) -> Vec<Check> {
    let mut out: Vec<Check> = spins.par_iter().map(|&s| commutation_table(s, jmax)).collect();
    let s0 = spins.first().copied().unwrap_or(HalfInt::ONE);
    out.push(product_rule(s0, jmax));
    out.push(basis_change(s0, HalfInt::int(4)));
    out
}

// ---- bosonization ------------------------------------------------------------

/// Largest doubled `J` exponent over all coefficients.
pub fn max_j2(p: &BosonPolynomial) -> Option<i32> {
    p.terms().flat_map(|(_, c)| c.terms().map(|(s, _)| s.j2()).collect::<Vec<_>>()).max()
}

/// `Σ_k D¹_{mk}(D¹_{mk})† − 1` for each row; passes when every surviving
/// coefficient is `O(J^{-3/2})` or smaller.
pub fn unitarity_order() -> Check {
    let mut worst: Option<i32> = None;
    let mut detail = String::new();
    for m in -1..=1 {
        let mut acc = BosonPolynomial::one().neg();
        for k in -1..=1 {
            match bosonize_d(HalfInt::ONE, HalfInt::int(m), HalfInt::int(k), 2) {
                Ok(d) => acc = acc.add(&d.mul(&d.dagger())),
                Err(e) => {
                    return Check::exact("bosonization", "bosonized D¹ unitarity beyond O(1/J)", false, e.to_string())
                }
            }
        }
        let w = max_j2(&acc);
        let _ = write!(detail, "row {m}: max J power {}; ", w.map_or("none".into(), |x| h(x).to_string()));
        worst = worst.max(w);
    }
    Check::exact("bosonization", "bosonized D¹ unitarity has no term of order J^-1 or larger", worst.is_none_or(|w| w <= -3), detail)
}

pub fn jz_d00_order() -> Check {
    let name = "[Jz, D¹₀₀] has no term of order J^-1 or larger";
    let jz = match hp_map_j(&OpExpr::letter(JOp::Jz), h(-8)) {
        Ok(p) => p,
        Err(e) => return Check::exact("bosonization", name, false, e.to_string()),
    };
    let d = match bosonize_d(HalfInt::ONE, HalfInt::ZERO, HalfInt::ZERO, 2) {
        Ok(p) => p,
        Err(e) => return Check::exact("bosonization", name, false, e.to_string()),
    };
    let comm = jz.commutator(&d);
    let w = max_j2(&comm);
    let detail = match w {
        None => "commutator vanishes".to_string(),
        Some(x) => format!("max J power {}; residual = {}", h(x), comm.to_text().trim().replace('\n', "; ")),
    };
    Check::exact("bosonization", name, w.is_none_or(|x| x <= -3), detail)
}

/// Reference couplings, the two sets of individually quoted coefficients, the
/// leading cubic term and the dropped-term ledger.
pub fn pipeline_checks(out: &PipelineOutput, freqs: &FrequencySet) -> Vec<Check> {
    let s = "bosonization";
    let mut v = Vec::new();
    let table = reference_entry_residuals(out);
    let (named, extra): (Vec<_>, Vec<_>) = table.iter().partition(|r| !r.name.starts_with("residual"));
    for r in &named {
        v.push(Check::exact(s, format!("quadratic Hamiltonian entry {}", r.name), r.matches(), format!("expected {} found {}", r.expected, r.found)));
    }
    let extras: Vec<String> = extra.iter().map(|r| format!("{} = {}", r.name.trim_start_matches("residual "), r.found)).collect();
    v.push(Check::exact(s, "no quadratic terms beyond the reference Hamiltonian", extras.is_empty(), extras.join("; ")));
    for r in expansion_coefficient_residuals(out) {
        v.push(Check::exact(s, format!("expansion coefficient {}", r.name), r.matches(), format!("expected {} found {}", r.expected, r.found)));
    }
    v.push(Check::exact(s, "zero-point length cancels from every coefficient", out.length_symbol_cancels, ""));

    let cubic = out.piece("H0+V_I");
    let want = reference_v_jkm();
    let bad: Vec<String> =
        v_jkm_monomials().iter().filter(|m| cubic.coefficient(m) != want).map(|m| format!("{m}: {}", cubic.coefficient(m))).collect();
    v.push(Check::exact(s, "cubic (j†+j)(k†s†+ks) coefficient is ω_I/(2√(2S))", bad.is_empty(), format!("expected {want}; {}", bad.join("; "))));

    for (source, reference) in [("V_P2", "wT*eta^2"), ("V_D2", "wT*eta^2")] {
        let e = out.ledger_entry(source, 2, 2);
        let found = e.map(|e| e.order.clone()).unwrap_or_else(|| "absent".into());
        let detail = e.map(|e| format!("dominant {} with {}", e.dominant, e.coefficient)).unwrap_or_default();
        v.push(Check::exact(s, format!("dropped {source} quadratic is O({reference})"), found == reference, format!("found O({found}); {detail}")));
    }
    let reference_size = freqs.omega_i / (2.0 * (2.0 * freqs.spin.value()).sqrt());
    match out.leading_non_quadratic() {
        Some(lead) => {
            let ratio = lead.magnitude / reference_size;
            v.push(Check::exact(
                s,
                "leading non-quadratic term has size ω_I/(2√(2S))",
                (ratio - 1.0).abs() < 1e-9,
                format!(
                    "largest: {} {} from {} = {:.6e} rad/s; reference size {:.6e} rad/s (ratio {ratio:.6})",
                    lead.coefficient, lead.dominant, lead.source, lead.magnitude, reference_size
                ),
            ));
        }
        None => v.push(Check::exact(s, "leading non-quadratic term has size ω_I/(2√(2S))", false, "no cubic term recorded")),
    }
    v
}

pub fn bosonization(freqs: &FrequencySet) -> Vec<Check> {
    let mut v = vec![unitarity_order(), jz_d00_order()];
    match run_bosonization_pipeline(freqs, &PipelineOptions::default()) {
        Ok(out) => v.extend(pipeline_checks(&out, freqs)),
        Err(e) => v.push(Check::exact("bosonization", "bosonization pipeline", false, e.to_string())),
    }
    v
}

// ---- field -------------------------------------------------------------------

/// Published values for cobalt at R = 10 nm in the reference trap.
pub const REFERENCE_VALUES: [(&str, f64); 4] = [("omega_l", 1.76e8), ("omega_i", 4.6e7), ("omega_d", 6.1e6), ("omega_t", 5.7e6)];

pub fn reference_point() -> (MagnetParams, TrapParams) {
    (MagnetParams::cobalt(1e-8), TrapParams::new(1e-3, 1e4, 1e6))
}

fn maxwell(p: &TrapParams, seed: u64) -> Check {
    let ell = p.length_scale();
    let step = 1e-6 * ell;
    let scale = p.bp.abs().max(p.bpp.abs() * ell);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.3..0.3) * ell);
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let (mut rp, mut rm) = (r, r);
            rp[j] += step;
            rm[j] -= step;
            let (bp, bm) = (field_at(p, rp), field_at(p, rm));
            for i in 0..3 {
                jac[i][j] = (bp[i] - bm[i]) / (2.0 * step);
            }
        }
        let div = jac[0][0] + jac[1][1] + jac[2][2];
        let curl = [jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]];
        worst = worst.max(div.abs()).max(curl.iter().fold(0.0f64, |a, c| a.max(c.abs())));
    }
    Check::tolerance("field", "trap field is divergence- and curl-free (finite differences)", worst / scale, 1e-6, "relative to B′")
}

fn expansion(p: &TrapParams) -> Check {
    let name = "harmonic expansion of |B| near the centre";
    let e = match magnitude_expansion(p) {
        Ok(e) => e,
        Err(e) => return Check::exact("field", name, false, e.to_string()),
    };
    // Quartic corrections are O((r/ℓ)²) relative to the quadratic deviation.
    let a = 1e-2 * p.length_scale();
    let mut worst = 0.0f64;
    for r in [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a], [a, -a, a]] {
        let dev = e.magnitude(r) - p.b0;
        worst = worst.max((field_magnitude(p, r) - e.magnitude(r)).abs() / dev.abs().max(f64::MIN_POSITIVE));
    }
    Check::tolerance("field", name, worst, 1e-3, "relative to the quadratic deviation, at 1% of the field length scale")
}

fn bisector(p: &TrapParams, seed: u64) -> Check {
    let ell = p.length_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let r: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * ell);
        worst = match n_tilde(p, r) {
            Ok(n) => worst.max(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() - 1.0).abs()),
            Err(_) => f64::INFINITY,
        };
    }
    Check::tolerance("field", "field bisector is a unit vector", worst, 1e-12, "")
}

pub fn field(magnet: &MagnetParams, trap: &TrapParams, seed: u64) -> Vec<Check> {
    let s = "field";
    let mut v = Vec::new();
    if let Err(e) = trap.validate() {
        v.push(Check::exact(s, "trap confines in all directions", false, e.to_string()));
        return v;
    }
    v.push(Check::exact(s, "trap confines in all directions", true, ""));
    v.push(maxwell(trap, seed));
    v.push(bisector(trap, seed ^ 1));
    let f = match compute_frequencies(magnet, trap, None) {
        Ok(f) => f,
        Err(e) => {
            v.push(Check::exact(s, "frequencies", false, e.to_string()));
            return v;
        }
    };
    v.push(expansion(trap));
    let rep = validity_report(&f, Some(trap));
    v.push(Check::exact(
        s,
        "hierarchy ω_L ≥ ω_I ≫ ω_D, ω_T, ω_z",
        rep.hierarchy_holds,
        format!(
            "ω_L/ω_I = {:.4}, ω_I/ω_D = {:.4}, ω_I/ω_T = {:.4}, ω_I/ω_z = {:.4}",
            f.omega_l / f.omega_i,
            rep.omega_i_over_omega_d,
            rep.omega_i_over_omega_t,
            rep.omega_i_over_omega_z
        ),
    ));
    v.push(Check::exact(s, "Lamb–Dicke ordering η′ < η < 1", rep.lamb_dicke_ordered, format!("η = {:.6e}, η′ = {:.6e}", f.eta, f.eta_prime)));
    let (m0, t0) = reference_point();
    if *magnet == m0 && *trap == t0 {
        let got = |k: &str| match k {
            "omega_l" => f.omega_l,
            "omega_i" => f.omega_i,
            "omega_d" => f.omega_d,
            _ => f.omega_t,
        };
        let worst = REFERENCE_VALUES.iter().map(|(k, w)| ((got(k) - w) / w).abs()).fold(0.0, f64::max);
        let detail = REFERENCE_VALUES.iter().map(|(k, w)| format!("{k} = {:.4e} (ref {w:.2e})", got(k))).collect::<Vec<_>>().join(", ");
        v.push(Check::tolerance(s, "reference frequencies within 5%", worst, 0.05, detail));
    }
    v
}
