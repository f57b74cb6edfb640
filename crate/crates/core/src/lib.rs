//! Operator algebra for a levitated magnetic rigid rotor: exact angular
//! momentum kernels, the truncated rotor ⊗ macrospin Hilbert space,
//! boson normal ordering with Holstein–Primakoff maps, the Ioffe–Pritchard
//! trap, Hamiltonian assembly and normal-mode spectra.

pub mod angular;
pub mod boson;
pub mod config;
pub mod exact;
pub mod half;
pub mod hamiltonian;
pub mod rotor;
pub mod sparse;
pub mod spectra;
pub mod trap;

pub use half::HalfInt;
