//! Return weightings and sampled return targets.
//!
//! A compound return is a convex combination of n-step returns,
//!
//! ```text
//! G^c_t = Σ_n c_n G^(n)_t,    c_n ≥ 0,  Σ_n c_n = 1
//! ```
//!
//! and its error against the bootstrap decomposes into discounted TD errors
//! weighted by the tail sums `h_i = Σ_{n>i} c_n`:
//!
//! ```text
//! G^c_t − v(S_t) = Σ_i γ^i h_i δ_{t+i}
//! ```
//!
//! Episodes that terminate before step `n` truncate: the remaining n-step
//! returns all equal the Monte Carlo return and the terminal value is 0.

use crate::error::{check_gamma, Error, Result};

/// Tolerance on `Σ c_n = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Nonnegative weights over n-step lengths `1..=max_len`, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    // weights[k] is the weight of the (k + 1)-step return; the last entry is nonzero.
    weights: Vec<f64>,
}

impl WeightVector {
    /// Builds a weight vector from `(length, weight)` pairs. Repeated lengths
    /// accumulate.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut weights: Vec<f64> = Vec::new();
        for (n, c) in pairs {
            if n == 0 {
                return Err(Error::InvalidWeights("n-step length must be positive".into()));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {c} on length {n} is not a finite nonnegative number"
                )));
            }
            if weights.len() < n {
                weights.resize(n, 0.0);
            }
            weights[n - 1] += c;
        }
        while weights.last() == Some(&0.0) {
            weights.pop();
        }
        if weights.is_empty() {
            return Err(Error::InvalidWeights("support is empty".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(WeightVector { weights })
    }

    /// The plain n-step return.
    pub fn nstep(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        Self::from_pairs([(n, 1.0)])
    }

    /// The λ-return truncated at `horizon`: `c_n = (1−λ)λ^{n−1}` for
    /// `n < horizon` and the residual mass `λ^{horizon−1}` on `horizon`.
    pub fn lambda(lambda: f64, horizon: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::param("lambda", format!("{lambda} is not in [0, 1)")));
        }
        if horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        let mut weights = Vec::with_capacity(horizon);
        let mut power = 1.0; // λ^{n-1}
        for _ in 1..horizon {
            weights.push((1.0 - lambda) * power);
            power *= lambda;
        }
        weights.push(power);
        Self::from_pairs(weights.into_iter().enumerate().map(|(k, c)| (k + 1, c)))
    }

    /// `(1−c) G^(n1) + c G^(n2)`.
    pub fn two_bootstrap(n1: usize, n2: usize, c: f64) -> Result<Self> {
        if n1 == 0 || n1 >= n2 {
            return Err(Error::param(
                "n1",
                format!("need 1 <= n1 < n2, got n1 = {n1}, n2 = {n2}"),
            ));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::param("c", format!("{c} is not in (0, 1)")));
        }
        Self::from_pairs([(n1, 1.0 - c), (n2, c)])
    }

    /// Weight on the `n`-step return (0 outside the support).
    pub fn weight(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.weights.get(n - 1).copied().unwrap_or(0.0)
    }

    /// Longest n-step length with nonzero weight.
    pub fn max_len(&self) -> usize {
        self.weights.len()
    }

    /// Nonzero `(length, weight)` pairs in increasing length.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, &c)| (k + 1, c))
    }

    /// Dense weights, index `k` holding the weight of the `(k+1)`-step return.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_compound(&self) -> bool {
        self.iter().nth(1).is_some()
    }

    pub fn cumulative(&self) -> CumulativeWeights {
        CumulativeWeights::from_weights(self)
    }
}

/// Per-TD-error weights `h_i = Σ_{n>i} c_n`, for `i` in `0..max_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativeWeights {
    h: Vec<f64>,
}

impl CumulativeWeights {
    pub fn from_weights(w: &WeightVector) -> Self {
        let c = w.as_slice();
        let mut h = vec![0.0; c.len()];
        let mut tail = 0.0;
        for i in (0..c.len()).rev() {
            tail += c[i];
            h[i] = tail.min(1.0);
        }
        // h_0 is the total mass.
        h[0] = 1.0;
        CumulativeWeights { h }
    }

    /// Wraps an explicit sequence, e.g. the untruncated λ profile `λ^i`.
    pub fn from_raw(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidWeights("cumulative weights are empty".into()));
        }
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidWeights("cumulative weights must be finite".into()));
        }
        Ok(CumulativeWeights { h })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// `h_i`, zero beyond the stored length.
    pub fn get(&self, i: usize) -> f64 {
        self.h.get(i).copied().unwrap_or(0.0)
    }
}

/// Maps a state id to a value estimate. Implementations must be
/// deterministic for the duration of one batch of target computations.
pub trait StateValuator {
    fn value(&self, state: usize) -> f64;
}

impl StateValuator for [f64] {
    fn value(&self, state: usize) -> f64 {
        self[state]
    }
}

impl StateValuator for Vec<f64> {
    fn value(&self, state: usize) -> f64 {
        self[state]
    }
}

impl<T: StateValuator + ?Sized> StateValuator for &T {
    fn value(&self, state: usize) -> f64 {
        (**self).value(state)
    }
}

/// One sampled episode or rollout. `rewards[i]` is earned on the transition
/// `states[i] → states[i+1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<usize>,
    rewards: Vec<f64>,
    terminated: bool,
}

impl Trajectory {
    pub fn new(states: Vec<usize>, rewards: Vec<f64>, terminated: bool) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidTrajectory("no states".into()));
        }
        if rewards.len() + 1 != states.len() {
            return Err(Error::InvalidTrajectory(format!(
                "{} states but {} rewards",
                states.len(),
                rewards.len()
            )));
        }
        Ok(Trajectory {
            states,
            rewards,
            terminated,
        })
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Value of `states[idx]`, with the final state of a terminated episode
    /// valued at zero.
    fn state_value<V: StateValuator + ?Sized>(&self, idx: usize, v: &V) -> f64 {
        if self.terminated && idx + 1 == self.states.len() {
            0.0
        } else {
            v.value(self.states[idx])
        }
    }

    fn check_index(&self, t: usize) -> Result<()> {
        if t < self.len() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                index: t,
                len: self.len(),
            })
        }
    }
}

/// `Σ_{i<m} γ^i R_{t+1+i} + γ^m v(S_{t+m})` with `m = min(n, len − t)`.
pub fn nstep_return<V: StateValuator + ?Sized>(
    traj: &Trajectory,
    t: usize,
    n: usize,
    gamma: f64,
    v: &V,
) -> Result<f64> {
    traj.check_index(t)?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let m = n.min(traj.len() - t);
    let mut ret = 0.0;
    let mut discount = 1.0;
    for &r in &traj.rewards[t..t + m] {
        ret += discount * r;
        discount *= gamma;
    }
    Ok(ret + discount * traj.state_value(t + m, v))
}

/// Weighted average of n-step returns, evaluated term by term.
pub fn compound_return<V: StateValuator + ?Sized>(
    traj: &Trajectory,
    t: usize,
    w: &WeightVector,
    gamma: f64,
    v: &V,
) -> Result<f64> {
    traj.check_index(t)?;
    let mut ret = 0.0;
    for (n, c) in w.iter() {
        ret += c * nstep_return(traj, t, n, gamma, v)?;
    }
    Ok(ret)
}

/// `δ_i = R_{i+1} + γ v(S_{i+1}) − v(S_i)` for every transition.
pub fn td_errors<V: StateValuator + ?Sized>(traj: &Trajectory, gamma: f64, v: &V) -> Vec<f64> {
    (0..traj.len())
        .map(|i| traj.rewards[i] + gamma * traj.state_value(i + 1, v) - traj.state_value(i, v))
        .collect()
}

/// Precomputed `γ^i h_i` coefficients for evaluating compound targets
/// through the TD-error decomposition in `O(max_len)` per target.
#[derive(Clone, Debug)]
pub struct TargetKernel {
    gamma: f64,
    coef: Vec<f64>,
}

impl TargetKernel {
    pub fn new(w: &WeightVector, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let h = w.cumulative();
        let mut discount = 1.0;
        let coef = h
            .as_slice()
            .iter()
            .map(|&hi| {
                let k = discount * hi;
                discount *= gamma;
                k
            })
            .collect();
        Ok(TargetKernel { gamma, coef })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Target at time `t`.
    pub fn target_at<V: StateValuator + ?Sized>(&self, traj: &Trajectory, t: usize, v: &V) -> Result<f64> {
        traj.check_index(t)?;
        let span = self.coef.len().min(traj.len() - t);
        let mut ret = traj.state_value(t, v);
        let mut value_here = ret;
        for (i, k) in self.coef[..span].iter().enumerate() {
            let value_next = traj.state_value(t + i + 1, v);
            let delta = traj.rewards[t + i] + self.gamma * value_next - value_here;
            ret += k * delta;
            value_here = value_next;
        }
        Ok(ret)
    }

    /// Targets for every time step, sharing one pass of TD errors.
    pub fn targets<V: StateValuator + ?Sized>(&self, traj: &Trajectory, v: &V) -> Vec<f64> {
        let deltas = td_errors(traj, self.gamma, v);
        (0..traj.len())
            .map(|t| {
                let span = self.coef.len().min(deltas.len() - t);
                let correction: f64 = self.coef[..span]
                    .iter()
                    .zip(&deltas[t..t + span])
                    .map(|(k, d)| k * d)
                    .sum();
                traj.state_value(t, v) + correction
            })
            .collect()
    }
}

/// Compound-return targets for every time step of `traj` via the TD-error
/// decomposition.
pub fn compound_targets<V: StateValuator + ?Sized>(
    traj: &Trajectory,
    w: &WeightVector,
    gamma: f64,
    v: &V,
) -> Result<Vec<f64>> {
    Ok(TargetKernel::new(w, gamma)?.targets(traj, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense(w: &WeightVector) -> Vec<(usize, f64)> {
        w.iter().collect()
    }

    #[test]
    fn nstep_weights_are_degenerate() {
        assert_eq!(dense(&WeightVector::nstep(1).unwrap()), vec![(1, 1.0)]);
        let w5 = WeightVector::nstep(5).unwrap();
        assert_eq!(dense(&w5), vec![(5, 1.0)]);
        assert!(!w5.is_compound());
        assert!(WeightVector::nstep(0).is_err());
    }

    #[test]
    fn lambda_weights_small_cases() {
        assert_eq!(dense(&WeightVector::lambda(0.0, 10).unwrap()), vec![(1, 1.0)]);
        let w = WeightVector::lambda(0.5, 3).unwrap();
        assert_eq!(dense(&w), vec![(1, 0.5), (2, 0.25), (3, 0.25)]);
        assert!(w.is_compound());
        assert!(WeightVector::lambda(1.0, 10).is_err());
        assert!(WeightVector::lambda(-0.1, 10).is_err());
        assert!(WeightVector::lambda(0.5, 0).is_err());
    }

    #[test]
    fn lambda_weights_sum_to_one_at_long_horizons() {
        for &lam in &[0.1, 0.5, 0.9, 0.99, 0.999] {
            let w = WeightVector::lambda(lam, 5000).unwrap();
            let s: f64 = w.as_slice().iter().sum();
            assert!((s - 1.0).abs() <= WEIGHT_SUM_TOL, "λ={lam}: {s}");
        }
    }

    #[test]
    fn two_bootstrap_weights_and_errors() {
        let w = WeightVector::two_bootstrap(1, 6, 0.406).unwrap();
        assert_abs_diff_eq!(w.weight(1), 0.594, epsilon = 1e-15);
        assert_eq!(w.weight(6), 0.406);
        let w = WeightVector::two_bootstrap(2, 9, 0.437).unwrap();
        assert_abs_diff_eq!(w.weight(2), 0.563, epsilon = 1e-15);
        assert_eq!(w.weight(9), 0.437);
        assert!(WeightVector::two_bootstrap(3, 3, 0.5).is_err());
        assert!(WeightVector::two_bootstrap(4, 2, 0.5).is_err());
        assert!(WeightVector::two_bootstrap(1, 2, 0.0).is_err());
        assert!(WeightVector::two_bootstrap(1, 2, 1.0).is_err());
    }

    #[test]
    fn from_pairs_rejects_bad_input() {
        assert!(WeightVector::from_pairs([(1, 0.5)]).is_err());
        assert!(WeightVector::from_pairs([(0, 1.0)]).is_err());
        assert!(WeightVector::from_pairs([(1, 1.5), (2, -0.5)]).is_err());
        assert!(WeightVector::from_pairs(Vec::<(usize, f64)>::new()).is_err());
        assert!(WeightVector::from_pairs([(1, f64::NAN)]).is_err());
        // trailing zeros are trimmed
        let w = WeightVector::from_pairs([(2, 1.0), (7, 0.0)]).unwrap();
        assert_eq!(w.max_len(), 2);
    }

    #[test]
    fn cumulative_weight_examples() {
        let h = WeightVector::nstep(3).unwrap().cumulative();
        assert_eq!(h.as_slice(), &[1.0, 1.0, 1.0]);

        let h = WeightVector::two_bootstrap(1, 6, 0.406).unwrap().cumulative();
        let expect = [1.0, 0.406, 0.406, 0.406, 0.406, 0.406];
        for (a, b) in h.as_slice().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let h = WeightVector::lambda(0.5, 4).unwrap().cumulative();
        for (a, b) in h.as_slice().iter().zip([1.0, 0.5, 0.25, 0.125]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn nstep_return_examples() {
        // one transition into a terminal state
        let traj = Trajectory::new(vec![0, 1], vec![1.0], true).unwrap();
        let v = vec![5.0, 7.0];
        assert_eq!(nstep_return(&traj, 0, 5, 0.9, &v).unwrap(), 1.0);

        // pure bootstrap
        let traj = Trajectory::new(vec![0, 1, 2], vec![0.0, 0.0], false).unwrap();
        let v = vec![0.0, 0.0, 0.3];
        assert_eq!(nstep_return(&traj, 0, 2, 1.0, &v).unwrap(), 0.3);

        // 1 + 0.5·2 + 0.25·3 + 0.125·10
        let traj = Trajectory::new(vec![0, 1, 2, 3], vec![1.0, 2.0, 3.0], false).unwrap();
        let v = vec![0.0, 0.0, 0.0, 10.0];
        assert_abs_diff_eq!(nstep_return(&traj, 0, 3, 0.5, &v).unwrap(), 4.0, epsilon = 1e-15);

        assert!(matches!(
            nstep_return(&traj, 3, 1, 0.5, &v),
            Err(Error::OutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn compound_return_examples() {
        let traj = Trajectory::new(vec![0, 1, 2], vec![1.0, 1.0], false).unwrap();
        let v = vec![0.0; 3];
        let w = WeightVector::from_pairs([(1, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(compound_return(&traj, 0, &w, 1.0, &v).unwrap(), 1.5);

        let traj = Trajectory::new(vec![3, 1, 4, 1, 5], vec![0.2, -1.0, 0.7, 2.5], false).unwrap();
        let v = vec![0.1, -0.4, 0.9, 1.3, 0.05, 2.0];
        for n in 1..6 {
            let w = WeightVector::nstep(n).unwrap();
            for t in 0..traj.len() {
                let a = compound_return(&traj, t, &w, 0.93, &v).unwrap();
                let b = nstep_return(&traj, t, n, 0.93, &v).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn td_error_examples() {
        let traj = Trajectory::new(vec![0, 1], vec![1.0], false).unwrap();
        let v = vec![0.0, 0.5];
        assert_abs_diff_eq!(td_errors(&traj, 0.9, &v)[0], 1.45, epsilon = 1e-15);

        let traj = Trajectory::new(vec![0, 1, 2, 3], vec![1.0, -2.0, 3.0], true).unwrap();
        assert_eq!(td_errors(&traj, 1.0, &vec![0.0; 4]), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn td_errors_vanish_at_true_values() {
        // deterministic chain 0 → 1 → 2 (terminal), rewards 1 and 2, γ = 0.5
        let traj = Trajectory::new(vec![0, 1, 2], vec![1.0, 2.0], true).unwrap();
        let v = vec![2.0, 2.0, 123.0];
        assert!(td_errors(&traj, 0.5, &v).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn fast_targets_agree_with_direct_average() {
        let traj = Trajectory::new(vec![2, 0, 1, 2, 1, 3], vec![0.5, -0.25, 1.0, 0.0, 2.0], true).unwrap();
        let v = vec![0.3, -0.2, 1.1, 9.0];
        let w = WeightVector::from_pairs([(1, 0.2), (3, 0.3), (7, 0.5)]).unwrap();
        let fast = compound_targets(&traj, &w, 0.9, &v).unwrap();
        assert_eq!(fast.len(), traj.len());
        for (t, &target) in fast.iter().enumerate() {
            let direct = compound_return(&traj, t, &w, 0.9, &v).unwrap();
            let single = TargetKernel::new(&w, 0.9).unwrap().target_at(&traj, t, &v).unwrap();
            assert_abs_diff_eq!(target, direct, epsilon = 1e-12);
            assert_abs_diff_eq!(single, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn trajectory_length_invariant() {
        assert!(Trajectory::new(vec![0, 1], vec![], false).is_err());
        assert!(Trajectory::new(vec![], vec![], false).is_err());
        assert!(Trajectory::new(vec![0], vec![], false).is_ok());
    }
}
