//! A small linear-programming toolkit: sparse problem container, a
//! bounded-variable revised simplex solver, and MPS import/export for
//! handing problems to external solvers.
//!
//! The solver keeps variables at their bounds explicitly rather than
//! splitting them, which suits bound-dense problems. Everything is generic
//! over the floating-point scalar ([`Scalar`], implemented for `f32` and
//! `f64`); `f64` is the default type parameter throughout.
//!
//! ```
//! use linprog::{LinearProgram, RowKind, SolveOptions, Status, solve};
//!
//! // min -x - 2y  s.t.  x + y <= 4,  2x + y <= 6,  x,y >= 0
//! let mut lp = LinearProgram::new("example");
//! let x = lp.add_col("x", -1.0, 0.0, f64::INFINITY);
//! let y = lp.add_col("y", -2.0, 0.0, f64::INFINITY);
//! let r1 = lp.add_row("r1", RowKind::Le, 4.0);
//! lp.put(r1, x, 1.0);
//! lp.put(r1, y, 1.0);
//! let r2 = lp.add_row("r2", RowKind::Le, 6.0);
//! lp.put(r2, x, 2.0);
//! lp.put(r2, y, 1.0);
//! let sol = solve(&lp, &SolveOptions::default());
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.objective + 8.0).abs() < 1e-9);
//! ```

mod dense;
mod mps;
mod problem;
pub mod reference;
mod scalar;
mod simplex;

pub use mps::{format_mps, parse_mps, read_mps, write_mps, MpsError, MpsFormat};
pub use problem::{Col, LinearProgram, Row, RowDef, RowKind};
pub use scalar::Scalar;
pub use simplex::{solve, Solution, SolveOptions, Status};
