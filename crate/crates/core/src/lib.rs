//! Simulation and analytics for entanglement distillation between
//! atomic-ensemble quantum memories coupled to single-sided optical cavities.
//!
//! The crate is organised bottom-up:
//!
//! * [`qstate`]: sparse labelled tensor-product states and linear operators.
//! * [`cavity`]: cavity reflection coefficients and the conditional
//!   reflection operator a probe photon picks up at each node.
//! * [`optics`]: the linear-optical elements (PBS, half-wave plate,
//!   Hadamard plate, unbalanced beam splitter) as operators.
//! * [`pcd`]: the nondestructive two-ensemble parity check built from one
//!   reflected probe photon.
//! * [`protocols`]: single-photon optimal concentration, the two-outcome
//!   cascade variant, iterated purification of bit-flip-type mixtures, and
//!   the multipartite extension.
//! * [`analytics`]: closed-form efficiency and fidelity expressions for the
//!   finite-coupling regime, used to cross-check the simulations.
//!
//! Everything is deterministic: states keep their amplitudes in ordered maps
//! so summation order never depends on hashing, and no Monte Carlo enters
//! unless a caller samples explicitly.

pub mod analytics;
pub mod cavity;
pub mod optics;
pub mod pcd;
pub mod protocols;
pub mod qstate;

pub use cavity::{CavityParams, Mode, ReflectionPair};
pub use qstate::{LinearOp, MixedEnsemble, PureState, SubsystemKind, SubsystemLabel};
