//! Step-size sweep on the 19-state random walk.
//!
//! Each trial starts from zero values, draws its episodes once and replays
//! the same episodes for every estimator and step size, so paired
//! comparisons share their noise. The error after each episode is the RMS
//! over the non-terminal states of `v − v_π`; a trial's score is the mean
//! of those per-episode errors.

use compound_returns::env::{exact_values, random_walk_19, EpisodeSampler};
use compound_returns::seed::rng_for;
use compound_returns::td::apply_offline_backup;
use compound_returns::{TargetKernel, Trajectory};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::error::{ExperimentError, Result};
use crate::table::{fmt_float, CsvTable};

/// Episodes longer than this are cut (random-walk episodes average 100 steps).
pub const MAX_EPISODE_STEPS: usize = 1_000_000;

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

pub const SWEEP_HEADER: [&str; 5] = ["estimator", "alpha", "mean_rms", "ci_half_width", "trials"];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub estimator: String,
    pub alpha: f64,
    pub mean_rms: f64,
    pub ci_half_width: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for<'a>(&'a self, estimator: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.estimator == estimator)
    }

    /// Lowest mean error of `estimator` over the step-size grid.
    pub fn min_error<'a>(&'a self, estimator: &'a str) -> Option<&'a SweepRow> {
        self.rows_for(estimator)
            .min_by(|a, b| a.mean_rms.total_cmp(&b.mean_rms))
    }

    pub fn at<'a>(&'a self, estimator: &'a str, alpha: f64) -> Option<&'a SweepRow> {
        self.rows_for(estimator).find(|r| r.alpha == alpha)
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(&SWEEP_HEADER);
        for r in &self.rows {
            t.push(vec![
                r.estimator.clone(),
                fmt_float(r.alpha),
                fmt_float(r.mean_rms),
                fmt_float(r.ci_half_width),
                r.trials.to_string(),
            ]);
        }
        t
    }
}

/// Mean and 95% half-width `1.96·s/√m` of per-trial scores.
pub fn mean_and_half_width(scores: &[f64]) -> (f64, f64) {
    let m = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / m;
    if scores.len() < 2 {
        return (mean, 0.0);
    }
    let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, Z_95 * var.sqrt() / m.sqrt())
}

fn rms_error(values: &[f64], truth: &[f64], states: &[usize]) -> f64 {
    let sq: f64 = states.iter().map(|&s| (values[s] - truth[s]).powi(2)).sum();
    (sq / states.len() as f64).sqrt()
}

pub fn run_random_walk_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mrp = random_walk_19();
    let truth: Vec<f64> = exact_values(&mrp, cfg.gamma)?.iter().copied().collect();
    let states: Vec<usize> = (0..mrp.n_states()).filter(|&s| !mrp.is_terminal(s)).collect();
    let kernels = cfg
        .estimators
        .iter()
        .map(|e| {
            Ok(TargetKernel::new(
                &e.weights(cfg.gamma, cfg.lambda_horizon)?,
                cfg.gamma,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let sampler = EpisodeSampler::new(&mrp);

    // scores[trial][estimator][alpha]
    let scores: Vec<Vec<Vec<f64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng_for(cfg.seed, trial as u64);
            let episodes: Vec<Trajectory> = (0..cfg.episodes)
                .map(|_| sampler.episode(&mut rng, MAX_EPISODE_STEPS))
                .collect();
            kernels
                .iter()
                .map(|kernel| {
                    cfg.alphas
                        .iter()
                        .map(|&alpha| {
                            let mut values = vec![0.0; mrp.n_states()];
                            let mut total = 0.0;
                            for traj in &episodes {
                                apply_offline_backup(kernel, &mut values, traj, alpha);
                                total += rms_error(&values, &truth, &states);
                            }
                            total / episodes.len() as f64
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.estimators.len() * cfg.alphas.len());
    for (e, spec) in cfg.estimators.iter().enumerate() {
        for (a, &alpha) in cfg.alphas.iter().enumerate() {
            let per_trial: Vec<f64> = scores.iter().map(|t| t[e][a]).collect();
            let (mean_rms, ci_half_width) = mean_and_half_width(&per_trial);
            rows.push(SweepRow {
                estimator: spec.to_string(),
                alpha,
                mean_rms,
                ci_half_width,
                trials: cfg.trials,
            });
        }
    }
    if rows.iter().any(|r| !r.mean_rms.is_finite()) {
        return Err(ExperimentError::config(
            "the sweep produced non-finite errors; lower the step sizes",
        ));
    }
    Ok(SweepResult { rows })
}
