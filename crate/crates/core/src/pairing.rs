//! Pairing return families by worst-case bias.
//!
//! A compound return shrinks the worst-case value error by its contraction
//! modulus `β = Σ c_k γ^k`. Two returns with equal `β` (or, undiscounted,
//! equal center of mass `Σ c_k k`) share the same error-reduction bound.

use crate::error::{check_gamma, Error, Result};
use crate::returns::WeightVector;

pub fn contraction_modulus(w: &WeightVector, gamma: f64) -> f64 {
    w.iter().map(|(k, c)| c * gamma.powi(k as i32)).sum()
}

/// First moment `Σ c_k k` of the length distribution.
pub fn center_of_mass(w: &WeightVector) -> f64 {
    w.iter().map(|(k, c)| c * k as f64).sum()
}

/// Length of the n-step return with the same error-reduction bound:
/// `log_γ β` for `γ < 1`, the center of mass at `γ = 1`.
pub fn effective_nstep(w: &WeightVector, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 1.0 {
        return Ok(center_of_mass(w));
    }
    Ok(contraction_modulus(w, gamma).ln() / gamma.ln())
}

/// λ whose λ-return is bias-matched to the `n`-step return:
/// `(1 − γ^{n−1}) / (1 − γ^n)`, or `(n − 1) / n` at `γ = 1`.
pub fn effective_lambda(n: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::param("n", format!("{n} must be a finite number >= 1")));
    }
    if gamma == 1.0 {
        return Ok((n - 1.0) / n);
    }
    Ok((1.0 - gamma.powf(n - 1.0)) / (1.0 - gamma.powf(n)))
}

/// Mixes `short` and `long` as `(1 − c)·short + c·long`, choosing `c` so the
/// mixture's effective n-step equals `n`. The target must lie strictly
/// between the effective lengths of the two parts.
pub fn matched_mixture(short: &WeightVector, long: &WeightVector, n: f64, gamma: f64) -> Result<WeightVector> {
    check_gamma(gamma)?;
    let (lo, hi, target) = if gamma == 1.0 {
        (center_of_mass(short), center_of_mass(long), n)
    } else {
        // the modulus decreases with length, so compare negated moduli
        (
            -contraction_modulus(short, gamma),
            -contraction_modulus(long, gamma),
            -gamma.powf(n),
        )
    };
    if !(lo < target && target < hi) {
        return Err(Error::param(
            "n",
            format!("{n} is not strictly between the two effective lengths"),
        ));
    }
    let c = (target - lo) / (hi - lo);
    WeightVector::from_pairs(
        short
            .iter()
            .map(|(k, w)| (k, (1.0 - c) * w))
            .chain(long.iter().map(|(k, w)| (k, c * w))),
    )
}

/// Lengths of the standard center-of-mass pairing table.
pub const COM_PAIR_LENGTHS: [usize; 8] = [2, 3, 4, 5, 10, 20, 50, 100];

/// `(n, λ)` rows with equal centers of mass, `λ = (n − 1) / n`.
pub fn com_pair_table() -> Vec<(usize, f64)> {
    COM_PAIR_LENGTHS
        .iter()
        .map(|&n| (n, (n as f64 - 1.0) / n as f64))
        .collect()
}
