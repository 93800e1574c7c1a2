//! Generation expansion planning at hourly resolution: co-optimizes
//! annualized investment in thermal, storage and renewable candidates with
//! the operation of the whole fleet over a DC power-flow network, including
//! load shifting, reserve provision and load shedding.
//!
//! The pipeline is `ingest` (files to [`model::SystemModel`]), `formulation`
//! (system to sparse LP), the bundled `linprog` simplex (or any MPS-speaking
//! external solver), `scenarios` (experiment matrices and sweeps) and
//! `report` (investment tables, dispatch stacks, storage levels, cost
//! breakdowns).
//!
//! Everything numeric is generic over the scalar type through [`Real`]
//! (f32 or f64); `f64` is the default type parameter everywhere, so the
//! concrete types at this crate root are the double-precision ones.

pub mod formulation;
pub mod ingest;
pub mod model;
mod real;
pub mod report;
pub mod scenarios;
pub(crate) mod text;

pub use real::Real;

pub use linprog::{LinearProgram, MpsFormat, SolveOptions, Status};
