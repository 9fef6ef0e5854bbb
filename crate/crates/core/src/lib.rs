//! Linear feedback Nash equilibria of scalar discrete-time linear-quadratic
//! dynamic games.
//!
//! The game: `n` players steer the scalar system
//! `x(k+1) = a x(k) + sum_i b_i u_i(k)` through stationary feedbacks
//! `u_i = k_i x`, each minimizing its own infinite-horizon cost
//! `J_i = sum_k (q_i x(k)^2 + r_i u_i(k)^2)` with `r_i > 0` and `b_i != 0`.
//! An equilibrium is a gain vector that stabilizes the closed loop
//! (`|a + sum_i b_i k_i| < 1`) and is simultaneously optimal for every
//! player against the others' fixed gains.
//!
//! Everything reduces to a single scalar unknown: after normalizing each
//! player to the weight `sigma_i = b_i^2 q_i / r_i`, every equilibrium is a
//! root of one of `2^n` explicit branch functions of a reduced variable, and
//! every admissible root maps back to gains and costs in closed form. The
//! crate computes all roots ([`fne_solver`]), predicts how many exist in
//! regimes with a known answer ([`classifier`]), and re-derives each reported
//! equilibrium from first principles as an independent check
//! ([`verify_oracle`]).
//!
//! Module map:
//! - [`game_model`]: game description, validation, weight normalization.
//! - [`aux_functions`]: the branch function family, domains, limits, sampling.
//! - [`fne_solver`]: root scanning and equilibrium assembly.
//! - [`classifier`]: count predictions from the weight profile.
//! - [`verify_oracle`]: independent verification and exhaustive search.

// Negated comparisons (`!(x < y)`) are kept where NaN must land in the
// rejecting branch; rewriting them as `>=` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aux_functions;
pub mod classifier;
pub mod fne_solver;
pub mod game_model;
pub mod verify_oracle;

pub use aux_functions::{all_branches, branch_tuple, BranchCurve, BranchTuple};
pub use classifier::{classify, Classification};
pub use fne_solver::{solve_all_fne, FneSolution, SolverOptions};
pub use game_model::{validate_game, GameSpec, NormalizedGame};
pub use verify_oracle::{verify_equilibrium, VerificationReport};
