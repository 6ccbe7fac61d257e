//! Symbolic dynamics toolkit for quantitative recurrence on one-sided shift
//! spaces.
//!
//! The crate computes Hausdorff dimensions of two families of recurrence sets
//! over a shift space `X` on the alphabet `{0, .., p-1}`:
//!
//! * `R(psi)`: points `x` with `d(sigma^n x, x) < psi(n)` infinitely often,
//!   whose dimension is `h / (1 + b)` with `h` the topological entropy and
//!   `b` the lower exponential order of `psi`;
//! * `R(f)`: the potential-weighted variant `d(sigma^n x, x) < e^{-S_n f(x)}`,
//!   whose dimension solves the Bowen equation `P(-s(f+1)) = 0`.
//!
//! Everything is computed from the language of the shift: cylinder counts,
//! Birkhoff extrema over cylinders, level-`n` partition sums, and per-level
//! Bowen solutions with bracketed bisection. A Moran-set builder materializes
//! inner constructions (cylinder trees, supporting measures, recurrence
//! witnesses) for both set families.
//!
//! Module map:
//!
//! * [`words`]: finite words, the shift metric, edit distance, edit-ball
//!   censuses with growth-bound fitting;
//! * [`shifts`]: full shifts, beta-shifts (exact expansion arithmetic),
//!   S-gap shifts, forbidden-word shifts; enumeration and counting;
//! * [`structure`]: specification certificates, free-concatenation checks,
//!   mistake (edit-approachability) profiles;
//! * [`thermo`]: potentials, Birkhoff bounds, partition sums, entropy and
//!   pressure estimates, per-level Bowen solutions;
//! * [`recurrence`]: dimension reports for `R(psi)` and `R(f)`, cover-sum
//!   audits;
//! * [`moran`]: Moran schedules, level trees, supporting measures, Holder
//!   and mass-distribution audits, point materialization;
//! * [`config`]: serde-facing declarations shared by the CLI and tests.

pub mod beta;
pub mod config;
pub mod error;
pub mod moran;
pub mod numerics;
pub mod recurrence;
pub mod shifts;
pub mod structure;
pub mod thermo;
pub mod words;

pub use error::Error;
pub use shifts::ShiftSpace;
pub use words::{Symbol, Word};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
