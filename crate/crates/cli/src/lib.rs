//! Command-line front end for the distillation toolkit: single-point runs,
//! parameter sweeps with paired analytic columns, and the acceptance checks.

pub mod engine;
pub mod output;
pub mod spec;
pub mod verify;
