use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mrp::TabularMRP;
use crate::error::{Error, Result};
use crate::returns::Trajectory;

/// Precomputed per-row samplers for drawing episodes from one MRP.
#[derive(Clone, Debug)]
pub struct EpisodeSampler<'a> {
    mrp: &'a TabularMRP,
    rows: Vec<WeightedIndex<f64>>,
    start: WeightedIndex<f64>,
}

impl<'a> EpisodeSampler<'a> {
    pub fn new(mrp: &'a TabularMRP) -> Self {
        let p = mrp.transition();
        let rows = (0..mrp.n_states())
            .map(|s| WeightedIndex::new(p.row(s).iter().copied()).expect("rows are stochastic"))
            .collect();
        let start = WeightedIndex::new(mrp.start_dist().iter().copied()).expect("start distribution is stochastic");
        EpisodeSampler { mrp, rows, start }
    }

    pub fn mrp(&self) -> &TabularMRP {
        self.mrp
    }

    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.start.sample(rng)
    }

    /// Episode from the start distribution, cut after `max_steps` transitions.
    pub fn episode<R: Rng + ?Sized>(&self, rng: &mut R, max_steps: usize) -> Trajectory {
        let s0 = self.sample_start(rng);
        self.rollout(s0, rng, max_steps)
    }

    /// Rollout from `root` until a terminal state or `max_steps` transitions.
    pub fn rollout<R: Rng + ?Sized>(&self, root: usize, rng: &mut R, max_steps: usize) -> Trajectory {
        let mut states = vec![root];
        let mut rewards = Vec::new();
        let mut s = root;
        while rewards.len() < max_steps && !self.mrp.is_terminal(s) {
            let next = self.rows[s].sample(rng);
            rewards.push(self.mrp.reward()[(s, next)]);
            states.push(next);
            s = next;
        }
        let terminated = self.mrp.is_terminal(s);
        Trajectory::new(states, rewards, terminated).expect("rollout keeps states and rewards aligned")
    }
}

/// One episode drawn with a generator seeded from `seed`.
pub fn sample_episode(mrp: &TabularMRP, seed: u64, max_steps: usize) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::param("max_steps", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(EpisodeSampler::new(mrp).episode(&mut rng, max_steps))
}

/// Dense random MRP without terminals: every transition has positive
/// probability, so the chain is ergodic. Rewards are uniform on [−1, 1].
pub fn random_ergodic_mrp<R: Rng + ?Sized>(n_states: usize, rng: &mut R) -> TabularMRP {
    assert!(n_states > 0, "need at least one state");
    let mut p = DMatrix::from_fn(n_states, n_states, |_, _| rng.gen_range(0.05..1.0));
    for mut row in p.row_iter_mut() {
        let sum = row.sum();
        row /= sum;
    }
    let r = DMatrix::from_fn(n_states, n_states, |_, _| rng.gen_range(-1.0..1.0));
    let start = DVector::from_element(n_states, 1.0 / n_states as f64);
    // Renormalisation can leave rows a few ulps off one; fix the last entry.
    for s in 0..n_states {
        let rest: f64 = (0..n_states - 1).map(|t| p[(s, t)]).sum();
        p[(s, n_states - 1)] = 1.0 - rest;
    }
    TabularMRP::new(p, r, vec![false; n_states], start).expect("random MRP is well formed")
}
