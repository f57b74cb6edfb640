//! Exact excitation gaps against normal-mode predictions.

use serde::Serialize;

use super::{bogoliubov_diagonalize, lowest_by_k_sector, LanczosOptions, NormalModes, SpectraError};
use crate::boson::ModeId;
use crate::hamiltonian::{build_exact_hamiltonian, build_quadratic_hg, ExactSpec, FrequencySet, Include};
use crate::HalfInt;

/// Largest relative error accepted as a match.
pub const MATCH_WINDOW: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapMatch {
    pub exact: f64,
    pub predicted: Option<f64>,
    /// Which quanta make up the prediction, e.g. `ω0+ω2`.
    pub label: String,
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumComparison {
    pub matches: Vec<GapMatch>,
    pub unmatched: usize,
    /// Over matched gaps; infinite when any gap is unmatched.
    pub max_relative_error: f64,
}

/// Single-mode frequencies and all sums of two quanta, ascending (ties keep
/// generation order). Non-positive frequencies are excluded.
pub fn predicted_gaps(frequencies: &[f64]) -> Vec<(f64, String)> {
    let w: Vec<(usize, f64)> = frequencies.iter().copied().enumerate().filter(|&(_, x)| x > 0.0).collect();
    let mut out: Vec<(f64, String)> = w.iter().map(|&(i, x)| (x, format!("ω{i}"))).collect();
    for (a, &(i, x)) in w.iter().enumerate() {
        for &(j, y) in &w[a..] {
            let label = if i == j { format!("2ω{i}") } else { format!("ω{i}+ω{j}") };
            out.push((x + y, label));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Greedy injective matching of ascending exact gaps to the nearest unused
/// prediction (ties go to the lower prediction).
pub fn compare_spectra(exact_gaps: &[f64], modes: &NormalModes) -> SpectrumComparison {
    let preds = predicted_gaps(&modes.frequencies);
    let mut used = vec![false; preds.len()];
    let mut gaps = exact_gaps.to_vec();
    gaps.sort_by(f64::total_cmp);
    let mut matches = Vec::new();
    let mut unmatched = 0;
    let mut worst = 0.0f64;
    for g in gaps {
        let best = preds
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|(_, a), (_, b)| (a.0 - g).abs().total_cmp(&(b.0 - g).abs()).then(a.0.total_cmp(&b.0)));
        match best {
            Some((i, (p, label))) if ((g - p) / p).abs() <= MATCH_WINDOW => {
                used[i] = true;
                let e = ((g - p) / p).abs();
                worst = worst.max(e);
                matches.push(GapMatch { exact: g, predicted: Some(*p), label: label.clone(), relative_error: Some(e) });
            }
            _ => {
                unmatched += 1;
                matches.push(GapMatch { exact: g, predicted: None, label: "unmatched".into(), relative_error: None });
            }
        }
    }
    let max_relative_error = if unmatched > 0 { f64::INFINITY } else { worst };
    SpectrumComparison { matches, unmatched, max_relative_error }
}

/// Angular model without the centre of mass: `(ω_I, ω_D, ω_L)` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedModel {
    pub omega_i: f64,
    pub omega_d: f64,
    pub omega_l: f64,
    /// `Jmax − S`.
    pub jmax_offset: i32,
    /// Solve `K = K_ref − window ..= K_ref + window`.
    pub k_window: i32,
    pub gaps: usize,
}

impl Default for ReducedModel {
    fn default() -> Self {
        ReducedModel { omega_i: 1.0, omega_d: 0.1, omega_l: -0.5, jmax_offset: 6, k_window: 3, gaps: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedComparison {
    pub spin: HalfInt,
    pub jmax: HalfInt,
    pub dimension: usize,
    pub predicted_frequencies: Vec<f64>,
    pub stable: bool,
    pub ground_energy: f64,
    pub exact_gaps: Vec<f64>,
    pub comparison: SpectrumComparison,
}

/// Exact lowest gaps of the `mJ = −S` block against the normal modes of the
/// `ŝ, k̂, m̂` part of the quadratic Hamiltonian, with `J_ref = S`.
pub fn reduced_model_comparison(spin: HalfInt, model: &ReducedModel, opts: &LanczosOptions) -> Result<ReducedComparison, SpectraError> {
    if model.jmax_offset < 0 || model.gaps == 0 {
        return Err(SpectraError::Input("Jmax offset must be ≥ 0 and at least one gap requested".into()));
    }
    let f = FrequencySet::reduced(spin, spin, model.omega_i, model.omega_d, model.omega_l);
    let form = build_quadratic_hg(&f).restrict(&[ModeId::S, ModeId::K, ModeId::M])?;
    let modes = bogoliubov_diagonalize(&form)?;

    let jmax = spin + HalfInt::int(model.jmax_offset);
    let include = Include { vp: false, ..Include::ALL };
    let exact = build_exact_hamiltonian(&f, &ExactSpec::angular(jmax, Some(-spin), include))?;
    // The boson vacuum is kJ = −J_ref, kS = S.
    let k_ref = spin - f.j_ref;
    let sectors: Vec<HalfInt> = (-model.k_window..=model.k_window).map(|d| k_ref + HalfInt::int(d)).collect();
    let per_sector = model.gaps + 1;
    let levels = lowest_by_k_sector(&exact, &sectors, per_sector, opts)?;
    let mut all: Vec<f64> = levels.into_iter().flat_map(|(_, v)| v).collect();
    all.sort_by(f64::total_cmp);
    let e0 = all[0];
    let exact_gaps: Vec<f64> = all.iter().skip(1).take(model.gaps).map(|e| e - e0).collect();
    let comparison = compare_spectra(&exact_gaps, &modes);
    Ok(ReducedComparison {
        spin,
        jmax,
        dimension: exact.dim(),
        stable: modes.positive_definite(),
        predicted_frequencies: modes.frequencies.clone(),
        ground_energy: e0,
        exact_gaps,
        comparison,
    })
}
