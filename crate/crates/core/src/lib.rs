//! Entanglement measures, Bell-diagonal filtering normal forms and the
//! maximal singlet fraction reachable by trace-preserving LOCC for a single
//! copy of a two-qubit mixed state.
//!
//! The central quantity is F*, the largest fidelity with a maximally
//! entangled state that local operations with classical communication can
//! produce without post-selection. It is obtained from a small semidefinite
//! program over 4×4 Hermitian matrices (see [`fstar`]), whose optimizer
//! encodes a one-sided local filter, and whose dual gives the minimal mixing
//! weight that renders the state separable.

pub mod error;
pub mod fstar;
pub mod measures;
pub mod normal_form;
pub mod qmat;
pub mod random;
pub mod teleport;

pub use error::{Error, Result};
pub use qmat::{CMat, DensityMatrix, LocalOperator, PureState};
