//! Numerical laboratory for the single-mode Dicke model.
//!
//! * [`hilbert`]: truncated |n, m⟩ basis and the Hamiltonian with co- and
//!   counter-rotating couplings G, G′.
//! * [`spectra`]: ground states, with excitation-block and parity shortcuts.
//! * [`entanglement`]: atomic reduced state and linear entropy scans.
//! * [`classical`]: mean-field Hamiltonian, fixed points, stability and
//!   trajectories.
//! * [`wigner`]: spin Wigner function on the planar (q₁, p₁) disk.

// `!(x > 0.0)` is the NaN-rejecting form used throughout input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod classical;
pub mod entanglement;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod lanczos;
pub mod spectra;
pub mod wigner;

pub use error::{Error, Result};
pub use exec::Exec;
pub use hilbert::{CouplingMode, ModelParams};
