//! Classical and quantum simulation of molecules set spinning by two
//! delayed, cross-polarized laser pulses.
//!
//! The classical side kicks Monte Carlo ensembles of linear rotors
//! ([`linear`]) and symmetric tops ([`symtop`]) and follows them through
//! free motion ([`ensemble`]). [`density`] turns ensembles into angular
//! densities. The quantum side ([`quantum`]) propagates thermal wave packets
//! in a truncated rotational basis. [`compare`] lines the two up.
//!
//! Times are in units of the revival period `T_rev = 2πI/ħ` unless a
//! function says otherwise; see [`units`].
//!
//! ```
//! use nalgebra::Vector3;
//! use propeller::ensemble::{run_protocol, EnsembleConfig, ScheduledPulse};
//! use propeller::units::MoleculeParams;
//!
//! let cfg = EnsembleConfig::new(MoleculeParams::benzene(), 0.9, 1_000, 1)
//!     .with_pulse(ScheduledPulse::at(-3.0, Vector3::z(), 0.0))
//!     .with_grid(0.05, 1e-3);
//! let s = run_protocol(&cfg)?;
//! assert!(s.channel("cos2_theta").unwrap().iter().any(|c| *c < 0.2));
//! # Ok::<(), propeller::Error>(())
//! ```

pub mod compare;
pub mod density;
pub mod ensemble;
pub mod error;
pub mod linear;
pub mod quadrature;
pub mod quantum;
pub mod sampling;
pub mod series;
pub mod symtop;
pub mod units;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/classical.md")]
    mod classical {}
    #[doc = include_str!("../../../book/src/symtop.md")]
    mod symtop {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
    #[doc = include_str!("../../../book/src/quantum.md")]
    mod quantum {}
    #[doc = include_str!("../../../book/src/quantum-symtop.md")]
    mod quantum_symtop {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
