//! q²-calculus on the geometric lattice {±q^{2m}}: special functions,
//! Jackson integration, the q²-Fourier pair, the q²-shift and convolution,
//! fractional q-derivatives, and an exact engine for the braided algebra.

pub mod braided;
pub mod error;
pub mod fourier;
pub mod fracdiff;
pub mod lattice;
pub mod qcore;
pub mod shiftconv;
pub mod verify;

pub use error::{QError, QResult};
