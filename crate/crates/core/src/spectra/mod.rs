//! Normal modes of quadratic boson forms, lowest eigenvalues of the exact
//! Hamiltonian, and the comparison between the two.

mod bogoliubov;
mod compare;
mod lanczos;

use thiserror::Error;

use crate::hamiltonian::HamiltonianError;

pub use bogoliubov::{bogoliubov_diagonalize, symplectic_residual, NormalModes, Stability};
pub use compare::{
    compare_spectra, predicted_gaps, reduced_model_comparison, GapMatch, ReducedComparison, ReducedModel, SpectrumComparison,
    MATCH_WINDOW,
};
pub use lanczos::{k_sectors, lowest_by_k_sector, lowest_eigenpairs, sparse_lowest_eigs, Eigenpairs, LanczosOptions};

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("quadratic part is singular and the linear term has a component outside its range (residual {0:.3e})")]
    NoDisplacement(f64),
    #[error("Lanczos did not converge after {iterations} iterations; residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}
