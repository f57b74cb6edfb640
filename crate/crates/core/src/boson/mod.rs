//! Exact boson algebra: symbolic coefficients, normal-ordered polynomials,
//! Holstein–Primakoff maps and the bosonized D-matrix dictionary.

mod coeff;
mod hp;
mod poly;

pub use coeff::{crat, crat_int, CRat, Sym, SymCoeff, SymMono, SymValues, NSYM};
pub use hp::{
    bosonize_d, hp_map_j, hp_map_spin, hp_spin_fock, truncate, BosonError, DroppedSummary, JOp, OpExpr,
    SpinOp,
};
pub use poly::{BosonPolynomial, ModeId, Monomial, Prune, NMODES};
