//! Discrete optimal transport at desk scale: exact linear OT, Gromov-Wasserstein
//! solvers, and structural verifiers for the transportation polytope.
//!
//! Every verifier here is paired with a brute-force route (vertex enumeration,
//! permutation search, eigen-certificates) so results can be cross-checked.

pub mod cli;
pub mod cnd;
pub mod error;
pub mod gw;
pub mod io;
pub mod linear_ot;
pub mod loss;
pub mod polytope;
pub mod sample;
pub mod tensor;
pub mod types;

pub use error::{Error, Result};
pub use loss::{LossPreset, SeparableLoss};
pub use tensor::{QuadCost, QuadTensor, SeparableCost};
pub use types::{
    make_histogram, product_coupling, support, CostMatrix, Coupling, DiffPlan, Histogram,
    Permutation, DEFAULT_SUPPORT_TOL,
};
