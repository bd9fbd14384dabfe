//! Finite Markov reward processes: construction, exact evaluation,
//! sampling and stationary distributions.

mod format;
mod grid;
mod mrp;
mod sample;
mod stationary;

pub use format::{parse_mrp, write_mrp, FORMAT_HEADER};
pub use grid::{gridworld_10x8, gridworld_4x3, random_walk_19, Cell, GridLayout, RANDOM_WALK_STATES};
pub use mrp::{exact_values, TabularMRP, STOCHASTIC_TOL};
pub use sample::{random_ergodic_mrp, sample_episode, EpisodeSampler};
pub use stationary::{visit_distribution, StationaryModel};
