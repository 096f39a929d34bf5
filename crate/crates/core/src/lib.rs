//! Simulator for a single electron spin hyperfine-coupled to a nuclear spin
//! (donor qubits in silicon and relatives).
//!
//! The crate covers, at desk scale:
//! - exact per-m block diagonalization of the static Hamiltonian at any
//!   magnetic field ([`system`]),
//! - EPR transition tables, continuous-wave spectra, and the cancellation
//!   resonance / optimal working point structure ([`spectra`]),
//! - time-domain microwave pulse propagation without the rotating-wave
//!   approximation, two-level reductions, and selective pulse design
//!   ([`drive`]),
//! - two-qubit gate sequence algebra on the four-state logical subspace
//!   ([`gates`]),
//! - Born-Markov master equations for Gaussian magnetic-field noise with
//!   adiabaticity-weighted rates, Liouvillian spectra, and T1/T2 extraction
//!   ([`lindblad`]).

pub mod drive;
pub mod fit;
pub mod gates;
pub mod half;
pub mod io;
pub mod linalg;
pub mod lindblad;
pub mod operators;
pub mod roots;
pub mod spectra;
pub mod system;
pub mod units;

pub use half::HalfInt;
pub use system::{Branch, EigenLevel, LabelMap, SpinSystem, SubspaceBlock, SystemError};
