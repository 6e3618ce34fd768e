//! Wave-packet treatment in a truncated `|J K M⟩` basis.

pub mod basis;
pub mod expm;
pub mod fourier;
pub mod harmonics;
pub mod linear;
pub mod ode;
pub mod operator;
pub mod pulse;
pub mod symtop;
pub mod thermal;
pub mod wigner;

pub use basis::{Basis, RotState};
pub use thermal::SpinWeights;
