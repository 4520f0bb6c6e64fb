//! Grand Lebesgue Space norms on probability spaces.
//!
//! Given a generating function `psi` on `[1, inf)`, the classical norm of a
//! random variable is `sup_p |f|_p / psi(p)`. This crate computes that norm,
//! its restricted variant (supremum over a subset `S` of exponents) and its
//! discrete variant (supremum over a grid `q(1) = 1 < q(2) < ...`), the
//! constants `Z`, `W` and `W-hat` that bound the full norm by the smaller
//! ones, the Chebyshev-Markov tail envelope built from the discrete norm, and
//! convolution on finite groups with normalized Haar measure.
//!
//! Modules:
//! - [`psi`]: generating functions.
//! - [`rv`]: random variable models exposing `L^p` moments and sampling.
//! - [`pgrid`]: restricted sets, grids, partitions, equivalence constants.
//! - [`norms`]: the three norms and the sandwich checks.
//! - [`tails`]: the discrete transform `h`, tail envelopes, `K` estimation.
//! - [`group`]: finite groups, convolution, Young and algebra checks.
//! - [`suites`]: seeded randomized verification suites.
//! - [`cli`]: the `gls` command-line front end.

// `!(x >= lo)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod report;
mod error;
pub mod group;
pub mod norms;
pub mod numeric;
pub mod pgrid;
pub mod psi;
pub mod rv;
pub mod suites;
pub mod tails;

pub use error::{GlsError, Result};
pub use group::{FiniteGroup, GroupFunction, GroupKind, YoungTriple};
pub use norms::NormResult;
pub use pgrid::{GridSequence, PartitionCell, RestrictedSet};
pub use psi::{GeneratingFunction, Monotonicity, PowerSlowVaryParams};
pub use rv::{RandomVariableModel, SampleBatch};
pub use tails::{MembershipEstimate, TailEnvelope};
