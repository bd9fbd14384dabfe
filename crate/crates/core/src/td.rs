//! TD learning with compound-return targets.
//!
//! * Offline tabular backups: every target of an episode is computed from
//!   the value table frozen at the start of the episode, then all
//!   increments are applied together.
//! * Linear function approximation `v_θ(s) = φ(s)ᵀθ` with the update
//!   `θ ← θ + α (G^c − φ(S₀)ᵀθ) φ(S₀)`, bootstrapping on the current θ.
//! * The projected fixed point `Π T^c (Φθ*) = Φθ*`, its solution-quality
//!   bound, and an empirical check of the finite-time bound under the
//!   i.i.d. state model.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use crate::env::{EpisodeSampler, StationaryModel, TabularMRP};
use crate::error::{check_gamma, Error, Result};
use crate::pairing::contraction_modulus;
use crate::returns::{StateValuator, TargetKernel, Trajectory, WeightVector};
use crate::seed::{derive_seed, rng_for};

/// Feature rows may exceed unit squared norm by this much.
pub const FEATURE_NORM_TOL: f64 = 1e-12;

/// Feature matrix `Φ` (one row per state) with `‖φ(s)‖² ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFeatures {
    phi: DMatrix<f64>,
    // row-major copy for the per-sample inner loops
    rows: Vec<f64>,
}

impl LinearFeatures {
    pub fn new(phi: DMatrix<f64>) -> Result<Self> {
        if phi.nrows() == 0 || phi.ncols() == 0 {
            return Err(Error::param("features", "feature matrix is empty"));
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("features", "non-finite feature"));
        }
        for (s, row) in phi.row_iter().enumerate() {
            let sq = row.norm_squared();
            if sq > 1.0 + FEATURE_NORM_TOL {
                return Err(Error::param("features", format!("row {s} has squared norm {sq} > 1")));
            }
        }
        let rows = phi.transpose().as_slice().to_vec();
        Ok(LinearFeatures { phi, rows })
    }

    pub fn one_hot(n_states: usize) -> Self {
        Self::new(DMatrix::identity(n_states, n_states)).expect("identity rows have unit norm")
    }

    pub fn n_states(&self) -> usize {
        self.phi.nrows()
    }

    pub fn dim(&self) -> usize {
        self.phi.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn row(&self, s: usize) -> &[f64] {
        let d = self.dim();
        &self.rows[s * d..(s + 1) * d]
    }

    pub fn value(&self, s: usize, theta: &[f64]) -> f64 {
        self.row(s).iter().zip(theta).map(|(f, t)| f * t).sum()
    }

    /// `Φθ`.
    pub fn values(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.phi * theta
    }
}

/// Weight vector `θ` of a linear value function.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    pub theta: DVector<f64>,
}

impl Parameters {
    pub fn zeros(dim: usize) -> Self {
        Parameters {
            theta: DVector::zeros(dim),
        }
    }
}

/// `s ↦ φ(s)ᵀθ`.
pub struct LinearValuator<'a> {
    pub features: &'a LinearFeatures,
    pub theta: &'a [f64],
}

impl StateValuator for LinearValuator<'_> {
    fn value(&self, state: usize) -> f64 {
        self.features.value(state, self.theta)
    }
}

fn check_step_size(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::param("alpha", format!("{alpha} is not in [0, 1]")))
    }
}

/// Applies one episode of offline backups in place.
///
/// Every target is computed first, from the table as it was before the
/// episode. The updates `v(S_t) ← v(S_t) + α(G_t − v(S_t))` are then applied
/// in time order, each against the current entry, so a state visited `k`
/// times moves by a convex combination of its targets when `α ≤ 1`.
pub fn apply_offline_backup(kernel: &TargetKernel, values: &mut [f64], traj: &Trajectory, alpha: f64) {
    let targets = kernel.targets(traj, &*values);
    for (&s, g) in traj.states()[..traj.len()].iter().zip(targets) {
        values[s] += alpha * (g - values[s]);
    }
}

/// Offline episode backup returning the updated table.
pub fn offline_episode_backup(
    values: &[f64],
    traj: &Trajectory,
    w: &WeightVector,
    gamma: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_step_size(alpha)?;
    let kernel = TargetKernel::new(w, gamma)?;
    let mut out = values.to_vec();
    apply_offline_backup(&kernel, &mut out, traj, alpha);
    Ok(out)
}

/// Compound target for the root of `traj`; a rollout that starts in a
/// terminal state has target 0.
fn root_target(kernel: &TargetKernel, traj: &Trajectory, v: &LinearValuator<'_>) -> f64 {
    if traj.is_empty() {
        if traj.terminated() {
            0.0
        } else {
            v.value(traj.states()[0])
        }
    } else {
        kernel.target_at(traj, 0, v).expect("index 0 is in range")
    }
}

/// In-place linear compound TD update from the root of `traj`.
pub fn linear_td_update(
    kernel: &TargetKernel,
    features: &LinearFeatures,
    theta: &mut [f64],
    traj: &Trajectory,
    alpha: f64,
) {
    let root = traj.states()[0];
    let target = root_target(kernel, traj, &LinearValuator { features, theta });
    let err = target - features.value(root, theta);
    for (t, f) in theta.iter_mut().zip(features.row(root)) {
        *t += alpha * err * f;
    }
}

pub fn linear_td_step(
    params: &Parameters,
    features: &LinearFeatures,
    traj: &Trajectory,
    w: &WeightVector,
    gamma: f64,
    alpha: f64,
) -> Result<Parameters> {
    check_step_size(alpha)?;
    if params.theta.len() != features.dim() {
        return Err(Error::param("theta", "dimension does not match the features"));
    }
    let kernel = TargetKernel::new(w, gamma)?;
    let mut theta = params.theta.clone();
    linear_td_update(&kernel, features, theta.as_mut_slice(), traj, alpha);
    Ok(Parameters { theta })
}

/// Affine compound Bellman operator `T^c v = b + M v`, with
/// `M = Σ_n c_n (γP̃)^n` and `b = Σ_i h_i (γP̃)^i r̄`.
pub fn compound_operator(mrp: &TabularMRP, w: &WeightVector, gamma: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_gamma(gamma)?;
    let n = mrp.n_states();
    let step = mrp.value_dynamics() * gamma;
    let h = w.cumulative();
    let mut power = DMatrix::identity(n, n); // (γP̃)^i
    let mut m = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let r = mrp.expected_rewards();
    for i in 0..w.max_len() {
        b += &power * &r * h.get(i);
        power = &power * &step;
        let c = w.weight(i + 1);
        if c != 0.0 {
            m += &power * c;
        }
    }
    Ok((m, b))
}

fn check_dims(model: &StationaryModel, features: &LinearFeatures) -> Result<()> {
    if features.n_states() != model.mrp().n_states() {
        return Err(Error::param(
            "features",
            "row count does not match the number of states",
        ));
    }
    Ok(())
}

fn gram(model: &StationaryModel, features: &LinearFeatures) -> DMatrix<f64> {
    let phi = features.matrix();
    phi.transpose() * model.weighting() * phi
}

/// `Π x = Φ (ΦᵀDΦ)⁻¹ ΦᵀD x`.
pub fn project(model: &StationaryModel, features: &LinearFeatures, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_dims(model, features)?;
    let phi = features.matrix();
    let rhs = phi.transpose() * model.weighting() * x;
    let coef = gram(model, features)
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("ΦᵀDΦ is not invertible".into()))?;
    Ok(phi * coef)
}

/// Smallest relative singular value of `D^{1/2}Φ` accepted as full rank.
const RANK_TOL: f64 = 1e-10;

/// Solves `ΦᵀD(I − M)Φ θ = ΦᵀD b`, the projected compound Bellman equation.
pub fn compound_fixed_point(
    model: &StationaryModel,
    features: &LinearFeatures,
    w: &WeightVector,
    gamma: f64,
) -> Result<Parameters> {
    check_dims(model, features)?;
    let beta = contraction_modulus(w, gamma);
    if beta >= 1.0 {
        return Err(Error::param(
            "gamma",
            format!("contraction modulus {beta} is not below 1"),
        ));
    }
    let sqrt_d = DMatrix::from_diagonal(&model.d().map(f64::sqrt));
    let sv = (sqrt_d * features.matrix()).singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0 && lo / hi > RANK_TOL) {
        return Err(Error::Singular(format!(
            "features are rank deficient under d (singular values {lo:e}..{hi:e})"
        )));
    }
    let (m, b) = compound_operator(model.mrp(), w, gamma)?;
    let n = model.mrp().n_states();
    let phi = features.matrix();
    let phi_t_d = phi.transpose() * model.weighting();
    let a = &phi_t_d * (DMatrix::identity(n, n) - m) * phi;
    let theta = a
        .lu()
        .solve(&(phi_t_d * b))
        .ok_or_else(|| Error::Singular("projected Bellman system is not invertible".into()))?;
    Ok(Parameters { theta })
}

/// `‖Π T^c(Φθ) − Φθ‖_D`.
pub fn projected_bellman_residual(
    model: &StationaryModel,
    features: &LinearFeatures,
    w: &WeightVector,
    gamma: f64,
    params: &Parameters,
) -> Result<f64> {
    let (m, b) = compound_operator(model.mrp(), w, gamma)?;
    let v = features.values(&params.theta);
    let backed_up = b + m * &v;
    Ok(model.norm(&(project(model, features, &backed_up)? - v)))
}

/// Both sides of `‖Φθ* − v_π‖_D ≤ ‖Πv_π − v_π‖_D / (1 − β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub beta: f64,
}

pub fn solution_quality_gap(
    model: &StationaryModel,
    features: &LinearFeatures,
    w: &WeightVector,
    gamma: f64,
) -> Result<QualityGap> {
    let theta = compound_fixed_point(model, features, w, gamma)?;
    let beta = contraction_modulus(w, gamma);
    let v_pi = crate::env::exact_values(model.mrp(), gamma)?;
    let lhs = model.norm(&(features.values(&theta.theta) - &v_pi));
    let best = model.norm(&(project(model, features, &v_pi)? - &v_pi));
    Ok(QualityGap {
        lhs,
        rhs: best / (1.0 - beta),
        beta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteTimeConfig {
    /// Number of updates `T`; the step size is `1/√T`.
    pub horizon: usize,
    pub trials: usize,
    /// Total Monte Carlo samples for the variance estimate, split evenly
    /// across states.
    pub sigma_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteTimeReport {
    /// Mean over trials of `‖v_θ* − v_θ̄_T‖²_D`.
    pub empirical: f64,
    pub empirical_se: f64,
    pub bound: f64,
    pub beta: f64,
    pub sigma2: f64,
    pub sigma2_se: f64,
    pub c_const: f64,
    pub theta_star: Parameters,
}

/// d-weighted conditional variance of the compound error `G^c − φ(S₀)ᵀθ`
/// at `theta`, estimated by Monte Carlo. Returns the estimate and its
/// standard error.
///
/// Sample `k` from root `s` uses its own seeded stream, so different
/// weight vectors evaluated with the same seed see the same rollouts.
pub fn estimate_error_variance(
    model: &StationaryModel,
    features: &LinearFeatures,
    w: &WeightVector,
    gamma: f64,
    theta: &Parameters,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_dims(model, features)?;
    let kernel = TargetKernel::new(w, gamma)?;
    let sampler = EpisodeSampler::new(model.mrp());
    let n = model.mrp().n_states();
    let per_state = samples.div_ceil(n).max(2);
    let theta = theta.theta.as_slice();
    let valuator = LinearValuator { features, theta };

    let per_root: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|s| {
            if model.d()[s] == 0.0 {
                return (0.0, 0.0);
            }
            let stream = derive_seed(seed, s as u64);
            let errors: Vec<f64> = (0..per_state)
                .map(|k| {
                    let mut rng = rng_for(stream, k as u64);
                    let traj = sampler.rollout(s, &mut rng, w.max_len());
                    root_target(&kernel, &traj, &valuator) - features.value(s, theta)
                })
                .collect();
            let count = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / count;
            let m2 = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / count;
            let m4 = errors.iter().map(|e| (e - mean).powi(4)).sum::<f64>() / count;
            let var = m2 * count / (count - 1.0);
            let se2 = ((m4 - m2 * m2) / count).max(0.0);
            (var, se2)
        })
        .collect();

    let sigma2 = per_root.iter().zip(model.d().iter()).map(|((v, _), d)| d * v).sum();
    let se = per_root
        .iter()
        .zip(model.d().iter())
        .map(|((_, se2), d)| d * d * se2)
        .sum::<f64>()
        .sqrt();
    Ok((sigma2, se))
}

/// Runs compound TD under the i.i.d. state model from `θ₀ = 0` and
/// compares the averaged iterate's error with the finite-time bound
///
/// ```text
/// (‖θ* − θ₀‖² + 2(1−β)²C² + 2σ²) / ((1−β)√T)
/// ```
pub fn finite_time_check(
    model: &StationaryModel,
    features: &LinearFeatures,
    w: &WeightVector,
    gamma: f64,
    cfg: &FiniteTimeConfig,
) -> Result<FiniteTimeReport> {
    check_dims(model, features)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", format!("{gamma} is not in (0, 1)")));
    }
    if cfg.trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let beta = contraction_modulus(w, gamma);
    let min_horizon = (4.0 / (1.0 - beta)).powi(2);
    if (cfg.horizon as f64) < min_horizon {
        return Err(Error::param(
            "horizon",
            format!("T = {} is below (4/(1−β))² = {min_horizon:.1}", cfg.horizon),
        ));
    }

    let theta_star = compound_fixed_point(model, features, w, gamma)?;
    let (sigma2, sigma2_se) = estimate_error_variance(
        model,
        features,
        w,
        gamma,
        &theta_star,
        cfg.sigma_samples,
        derive_seed(cfg.seed, u64::MAX),
    )?;
    let theta_inf = theta_star.theta.amax();
    let c_const = (model.mrp().max_abs_reward() + (1.0 + gamma) * theta_inf) / (1.0 - gamma);
    let t = cfg.horizon as f64;
    let bound = (theta_star.theta.norm_squared() + 2.0 * (1.0 - beta).powi(2) * c_const * c_const + 2.0 * sigma2)
        / ((1.0 - beta) * t.sqrt());

    let kernel = TargetKernel::new(w, gamma)?;
    let sampler = EpisodeSampler::new(model.mrp());
    let roots = WeightedIndex::new(model.d().iter().copied())
        .map_err(|e| Error::param("d", format!("cannot sample roots: {e}")))?;
    let alpha = 1.0 / t.sqrt();
    let dim = features.dim();

    let errors: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(cfg.seed, trial as u64);
            let mut theta = vec![0.0; dim];
            let mut sum = vec![0.0; dim];
            for _ in 0..cfg.horizon {
                for (acc, x) in sum.iter_mut().zip(&theta) {
                    *acc += x;
                }
                let root = roots.sample(&mut rng);
                let traj = sampler.rollout(root, &mut rng, w.max_len());
                linear_td_update(&kernel, features, &mut theta, &traj, alpha);
            }
            let avg = DVector::from_iterator(dim, sum.into_iter().map(|x| x / t));
            let gap = features.values(&(&theta_star.theta - avg));
            let norm = model.norm(&gap);
            norm * norm
        })
        .collect();

    let (empirical, empirical_se) = mean_and_se(&errors);
    Ok(FiniteTimeReport {
        empirical,
        empirical_se,
        bound,
        beta,
        sigma2,
        sigma2_se,
        c_const,
        theta_star,
    })
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Draws a rollout root from `d`; exposed for samplers outside this module.
pub fn sample_root<R: Rng + ?Sized>(model: &StationaryModel, rng: &mut R) -> usize {
    WeightedIndex::new(model.d().iter().copied())
        .expect("d is a probability vector")
        .sample(rng)
}
