//! Variance of return estimators under a TD-error model with uniform
//! variance `κ` and uniform pairwise correlation `ρ`:
//!
//! ```text
//! Cov[δ_{t+i}, δ_{t+j} | S_t] = ((1 − ρ)·1{i = j} + ρ)·κ
//! ```
//!
//! All results are in units of `κ` times whatever `κ` carries (squared
//! reward units).

use crate::error::{check_gamma, Error, Result};
use crate::returns::{CumulativeWeights, WeightVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceParams {
    kappa: f64,
    rho: f64,
    gamma: f64,
}

impl VarianceParams {
    pub fn new(kappa: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::param("kappa", format!("{kappa} must be finite and nonnegative")));
        }
        // Infinitely many TD errors cannot all be negatively correlated.
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::param("rho", format!("{rho} is not in [0, 1]")));
        }
        check_gamma(gamma)?;
        Ok(VarianceParams { kappa, rho, gamma })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Partial geometric sum `Γ_k(n) = Σ_{i<n} γ^{ki} = (1 − γ^{kn}) / (1 − γ^k)`,
/// and `n` when `γ = 1`. `n` may be fractional.
pub fn gamma_sum(k: u32, n: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        return n;
    }
    // expm1 keeps both differences accurate when γ^k is close to 1
    let log_ratio = k as f64 * gamma.ln();
    (n * log_ratio).exp_m1() / log_ratio.exp_m1()
}

pub fn nstep_variance(n: usize, p: &VarianceParams) -> f64 {
    nstep_covariance(n, n, p)
}

/// `Cov[G^(n1), G^(n2)] = (1−ρ)Γ₂(min(n1, n2))κ + ρΓ₁(n1)Γ₁(n2)κ`.
pub fn nstep_covariance(n1: usize, n2: usize, p: &VarianceParams) -> f64 {
    let g = p.gamma;
    let shared = gamma_sum(2, n1.min(n2) as f64, g);
    let correlated = gamma_sum(1, n1 as f64, g) * gamma_sum(1, n2 as f64, g);
    ((1.0 - p.rho) * shared + p.rho * correlated) * p.kappa
}

/// `(1−ρ)κ Σ γ^{2i} h_i² + ρκ (Σ γ^i h_i)²`.
pub fn compound_variance(h: &CumulativeWeights, p: &VarianceParams) -> f64 {
    let mut diag = 0.0;
    let mut linear = 0.0;
    let mut discount = 1.0;
    for &hi in h.as_slice() {
        let term = discount * hi;
        diag += term * term;
        linear += term;
        discount *= p.gamma;
    }
    ((1.0 - p.rho) * diag + p.rho * linear * linear) * p.kappa
}

/// `Var[G^(n)] − Var[G^c]`, evaluated from the differences
/// `d_i = 1{i < n} − h_i` rather than by subtracting two variances.
///
/// When both estimators put all their weight far out at small `γ`, the
/// two variances agree to more digits than an `f64` holds. The difference
/// form keeps its relative precision there.
pub fn variance_reduction(w: &WeightVector, n: usize, p: &VarianceParams) -> f64 {
    let c = w.as_slice();
    let len = n.max(c.len());
    // h_i sums the weights of lengths above i; slice index j holds length j + 1
    let mut d = vec![0.0; len];
    let mut below = 0.0;
    for (i, di) in d.iter_mut().enumerate().take(n) {
        *di = below;
        below += c.get(i).copied().unwrap_or(0.0);
    }
    let mut above = 0.0;
    for i in (n..len).rev() {
        above += c.get(i).copied().unwrap_or(0.0);
        d[i] = -above;
    }
    let mut diag = 0.0;
    let mut linear = 0.0;
    let mut discount = 1.0;
    for (i, &di) in d.iter().enumerate() {
        let e = if i < n { 1.0 } else { 0.0 };
        diag += discount * discount * di * (2.0 * e - di);
        linear += discount * di;
        discount *= p.gamma;
    }
    let full = gamma_sum(1, n as f64, p.gamma);
    ((1.0 - p.rho) * diag + p.rho * linear * (2.0 * full - linear)) * p.kappa
}

/// Closed-form variance of the untruncated λ-return,
/// `(1−ρ)κ / (1 − (γλ)²) + ρκ / (1 − γλ)²`.
pub fn lambda_variance(lambda: f64, p: &VarianceParams) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::param("lambda", format!("{lambda} is negative")));
    }
    let x = p.gamma * lambda;
    if x >= 1.0 {
        return Err(Error::param("lambda", format!("γλ = {x} must be below 1")));
    }
    Ok((1.0 - p.rho) * p.kappa / (1.0 - x * x) + p.rho * p.kappa / ((1.0 - x) * (1.0 - x)))
}

/// Upper bound `(1−ρ) λ / (1 − λ²) κ` on `Var[G^n] − Var[G^λ]` for a
/// bias-matched pair; attained at `γ = 1`.
pub fn lambda_reduction_bound(lambda: f64, p: &VarianceParams) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::param("lambda", format!("{lambda} is not in [0, 1)")));
    }
    Ok((1.0 - p.rho) * lambda / (1.0 - lambda * lambda) * p.kappa)
}
