use nalgebra::{DMatrix, DVector};

use crate::error::{check_gamma, Error, Result};

/// Row-sum tolerance for stochastic rows.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Finite Markov reward process.
///
/// Terminal states absorb with zero reward: their rows are replaced by a
/// self-loop on construction, and their value is 0 by definition.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMRP {
    transition: DMatrix<f64>,
    reward: DMatrix<f64>,
    terminal: Vec<bool>,
    start: DVector<f64>,
}

impl TabularMRP {
    pub fn new(
        mut transition: DMatrix<f64>,
        mut reward: DMatrix<f64>,
        terminal: Vec<bool>,
        start: DVector<f64>,
    ) -> Result<Self> {
        let n = transition.nrows();
        if n == 0 {
            return Err(Error::InvalidMrp("no states".into()));
        }
        if transition.ncols() != n || reward.shape() != (n, n) || terminal.len() != n || start.len() != n {
            return Err(Error::InvalidMrp("dimension mismatch".into()));
        }
        if transition
            .iter()
            .chain(reward.iter())
            .chain(start.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidMrp("non-finite entry".into()));
        }
        if transition.iter().chain(start.iter()).any(|&p| p < 0.0) {
            return Err(Error::InvalidMrp("negative probability".into()));
        }
        for s in 0..n {
            if terminal[s] {
                transition.row_mut(s).fill(0.0);
                transition[(s, s)] = 1.0;
                reward.row_mut(s).fill(0.0);
            } else {
                let sum = transition.row(s).sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidMrp(format!("row {s} sums to {sum}")));
                }
            }
        }
        let start_sum = start.sum();
        if (start_sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidMrp(format!("start distribution sums to {start_sum}")));
        }
        Ok(TabularMRP {
            transition,
            reward,
            terminal,
            start,
        })
    }

    pub fn n_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    /// Expected reward of each transition `s → s'`.
    pub fn reward(&self) -> &DMatrix<f64> {
        &self.reward
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states()).filter(|&s| self.terminal[s])
    }

    pub fn has_terminals(&self) -> bool {
        self.terminal.iter().any(|&t| t)
    }

    pub fn start_dist(&self) -> &DVector<f64> {
        &self.start
    }

    /// `r̄(s) = Σ_{s'} P(s, s') r(s, s')`.
    pub fn expected_rewards(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n_states(),
            (0..self.n_states()).map(|s| self.transition.row(s).dot(&self.reward.row(s))),
        )
    }

    /// Transition matrix with terminal rows zeroed, so that `r̄ + γP̃v`
    /// is the Bellman backup with terminal values pinned at 0.
    pub fn value_dynamics(&self) -> DMatrix<f64> {
        let mut p = self.transition.clone();
        for s in self.terminals().collect::<Vec<_>>() {
            p.row_mut(s).fill(0.0);
        }
        p
    }

    /// Chain that restarts from the start distribution after termination.
    pub fn restart_chain(&self) -> DMatrix<f64> {
        let mut p = self.transition.clone();
        for s in self.terminals().collect::<Vec<_>>() {
            p.row_mut(s).copy_from(&self.start.transpose());
        }
        p
    }

    pub fn max_abs_reward(&self) -> f64 {
        let mut m: f64 = 0.0;
        for s in 0..self.n_states() {
            for t in 0..self.n_states() {
                if self.transition[(s, t)] > 0.0 {
                    m = m.max(self.reward[(s, t)].abs());
                }
            }
        }
        m
    }

    /// States reachable in one step from `s`.
    pub(crate) fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states()).filter(move |&t| self.transition[(s, t)] > 0.0)
    }
}

/// Solves `(I − γP̃)v = r̄`; terminal values are 0.
///
/// For `γ = 1` every non-terminal state must be able to reach a terminal,
/// otherwise the system is singular.
pub fn exact_values(mrp: &TabularMRP, gamma: f64) -> Result<DVector<f64>> {
    check_gamma(gamma)?;
    let n = mrp.n_states();
    if gamma == 1.0 {
        let reaches = states_reaching_terminal(mrp);
        if let Some(s) = (0..n).find(|&s| !reaches[s]) {
            return Err(Error::Singular(format!(
                "state {s} never terminates, so the undiscounted values are undefined"
            )));
        }
    }
    let a = DMatrix::identity(n, n) - mrp.value_dynamics() * gamma;
    let mut v = a
        .lu()
        .solve(&mrp.expected_rewards())
        .ok_or_else(|| Error::Singular("I − γP is not invertible".into()))?;
    for s in mrp.terminals().collect::<Vec<_>>() {
        v[s] = 0.0;
    }
    Ok(v)
}

fn states_reaching_terminal(mrp: &TabularMRP) -> Vec<bool> {
    let n = mrp.n_states();
    let mut reaches: Vec<bool> = (0..n).map(|s| mrp.is_terminal(s)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !reaches[s] && mrp.successors(s).any(|t| reaches[t]) {
                reaches[s] = true;
                changed = true;
            }
        }
    }
    reaches
}
