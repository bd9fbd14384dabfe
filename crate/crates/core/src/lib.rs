//! Compound-return estimation for temporal-difference learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`returns`]: weight vectors over n-step lengths, sampled n-step and
//!   compound returns, TD errors.
//! * [`variance`]: closed-form variance and covariance of return estimators
//!   under a uniform-variance, uniform-correlation TD-error model.
//! * [`pairing`]: contraction modulus, center of mass, effective n-step and
//!   effective λ, used to pair return families with equal worst-case bias.
//! * [`pilar`]: search for the two-bootstrap return that best tracks the
//!   TD(λ) weight profile at a target effective n-step.
//! * [`env`]: tabular Markov reward processes, exact evaluation, sampling
//!   and stationary distributions.
//! * [`td`]: offline tabular backups, linear compound TD, projected
//!   fixed points and the finite-time bound check.

pub mod env;
pub mod error;
pub mod pairing;
pub mod pilar;
pub mod returns;
pub mod seed;
pub mod td;
pub mod variance;

pub use error::{Error, Result};
pub use returns::{CumulativeWeights, StateValuator, TargetKernel, Trajectory, WeightVector};
pub use variance::VarianceParams;
