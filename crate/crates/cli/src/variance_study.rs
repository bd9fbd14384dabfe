//! Empirical variance of n-step returns from the start state, compared with
//! the uncorrelated (ρ = 0) and fully correlated (ρ = 1) TD-error models.
//!
//! TD errors use the true values, so `G^(n) − v_π(S₀)` is the discounted
//! sum of the first `n` TD errors and its variance is the return variance.
//! `κ` is the sample variance of the first TD error.

use compound_returns::env::{exact_values, EpisodeSampler};
use compound_returns::returns::td_errors;
use compound_returns::seed::rng_for;
use compound_returns::variance::{nstep_variance, VarianceParams};
use rayon::prelude::*;

use crate::config::{EnvName, VarianceConfig};
use crate::error::{ExperimentError, Result};
use crate::table::{fmt_float, CsvTable};

pub const VARIANCE_HEADER: [&str; 5] = ["n", "empirical", "std_error", "model_rho0", "model_rho1"];

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRow {
    pub n: usize,
    pub empirical: f64,
    /// Monte Carlo standard error of `empirical`.
    pub std_error: f64,
    pub model_rho0: f64,
    pub model_rho1: f64,
}

impl VarianceRow {
    /// Whether the estimate lies within the model bounds widened by
    /// `k` standard errors.
    pub fn within_bounds(&self, k: f64) -> bool {
        self.empirical >= self.model_rho0 - k * self.std_error && self.empirical <= self.model_rho1 + k * self.std_error
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceStudy {
    pub env: EnvName,
    pub gamma: f64,
    pub kappa: f64,
    pub episodes: usize,
    pub rows: Vec<VarianceRow>,
}

impl VarianceStudy {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&VARIANCE_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                fmt_float(r.empirical),
                fmt_float(r.std_error),
                fmt_float(r.model_rho0),
                fmt_float(r.model_rho1),
            ]);
        }
        t
    }
}

/// Sample variance (unbiased) and its standard error
/// `sqrt((m₄ − m₂²) / N)` from central moments.
fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (m2 * n / (n - 1.0), ((m4 - m2 * m2).max(0.0) / n).sqrt())
}

pub fn run_variance_study(cfg: &VarianceConfig) -> Result<VarianceStudy> {
    cfg.validate()?;
    let mrp = cfg.env.mrp();
    let gamma = cfg.env.study_gamma();
    let v_pi: Vec<f64> = exact_values(&mrp, gamma)?.iter().copied().collect();
    let sampler = EpisodeSampler::new(&mrp);
    let n_max = cfg.n_max;

    // partial[k][n-1] = Σ_{i<n} γ^i δ_i for episode k
    let partial: Vec<Vec<f64>> = (0..cfg.episodes)
        .into_par_iter()
        .map(|k| {
            let traj = sampler.episode(&mut rng_for(cfg.seed, k as u64), n_max);
            let deltas = td_errors(&traj, gamma, &v_pi);
            let mut sums = Vec::with_capacity(n_max);
            let (mut acc, mut discount) = (0.0, 1.0);
            for i in 0..n_max {
                // after termination every TD error is zero
                if let Some(d) = deltas.get(i) {
                    acc += discount * d;
                }
                discount *= gamma;
                sums.push(acc);
            }
            sums
        })
        .collect();

    let column = |i: usize| partial.iter().map(|p| p[i]).collect::<Vec<_>>();
    let (kappa, _) = variance_with_se(&column(0));
    let lower = VarianceParams::new(kappa, 0.0, gamma).map_err(ExperimentError::from)?;
    let upper = VarianceParams::new(kappa, 1.0, gamma)?;
    let rows = (1..=n_max)
        .map(|n| {
            let (empirical, std_error) = variance_with_se(&column(n - 1));
            VarianceRow {
                n,
                empirical,
                std_error,
                model_rho0: nstep_variance(n, &lower),
                model_rho1: nstep_variance(n, &upper),
            }
        })
        .collect();
    Ok(VarianceStudy {
        env: cfg.env,
        gamma,
        kappa,
        episodes: cfg.episodes,
        rows,
    })
}
