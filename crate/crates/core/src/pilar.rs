//! Piecewise λ-returns: two-bootstrap averages `(1−c)G^(n1) + c G^(n2)`
//! whose TD-error weights track the TD(λ) profile at a target effective
//! n-step.
//!
//! For a target `n`, `λ` is the bias-matched effective λ and `c` is fixed
//! by matching the contraction modulus (`γ < 1`) or the center of mass
//! (`γ = 1`). The search scans `n1 ∈ 1..=⌊n⌋` and, for each, increases `n2`
//! from `⌊n⌋ + 1` until the weight error stops strictly decreasing.

use crate::error::{check_gamma, Error, Result};
use crate::pairing::effective_lambda;
use crate::returns::WeightVector;

/// Upper limit on `n2` in the inner scan; the error sequence converges long
/// before this for any target the search is meant for.
pub const MAX_SECOND_LENGTH: usize = 1 << 20;

/// Targets of the standard γ = 0.99 reference table.
pub const REFERENCE_TARGETS: [f64; 9] = [2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 25.0, 50.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PilarResult {
    pub n1: usize,
    pub n2: usize,
    pub c: f64,
    /// Max absolute deviation from the TD(λ) weights.
    pub error: f64,
}

impl PilarResult {
    pub fn weights(&self) -> Result<WeightVector> {
        WeightVector::two_bootstrap(self.n1, self.n2, self.c)
    }
}

/// `max_i |γ^i h_i − (γλ)^i|` with `h_i = 1` below `n1`, `c` on
/// `[n1, n2)` and 0 after. Terms beyond `n2` only decrease, so the scan
/// stops at `i = n2`.
pub fn pilar_weight_error(lambda: f64, n1: usize, n2: usize, c: f64, gamma: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut g_pow = 1.0;
    let mut gl_pow = 1.0;
    for i in 0..=n2 {
        let h = if i < n1 {
            1.0
        } else if i < n2 {
            c
        } else {
            0.0
        };
        worst = worst.max((g_pow * h - gl_pow).abs());
        g_pow *= gamma;
        gl_pow *= gamma * lambda;
    }
    worst
}

/// Mixing weight on `G^(n2)` that preserves the target's bias.
fn matching_weight(n: f64, n1: usize, n2: usize, gamma: f64) -> f64 {
    if gamma == 1.0 {
        (n - n1 as f64) / (n2 - n1) as f64
    } else {
        (gamma.powf(n) - gamma.powi(n1 as i32)) / (gamma.powi(n2 as i32) - gamma.powi(n1 as i32))
    }
}

pub fn pilar_search(n: f64, gamma: f64) -> Result<PilarResult> {
    check_gamma(gamma)?;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::param("n", format!("{n} must be a finite number >= 1")));
    }
    let lambda = effective_lambda(n, gamma)?;
    let floor = n.floor() as usize;

    let mut best: Option<PilarResult> = None;
    for n1 in 1..=floor {
        let mut n2 = floor;
        let mut error = f64::INFINITY;
        loop {
            n2 += 1;
            if n2 > MAX_SECOND_LENGTH {
                break;
            }
            let c = matching_weight(n, n1, n2, gamma);
            // c = 0 when n1 already equals the target; nothing to average.
            if !(c > 0.0 && c < 1.0) {
                break;
            }
            let prev_error = error;
            error = pilar_weight_error(lambda, n1, n2, c, gamma);
            if best.is_none_or(|b| error < b.error) {
                best = Some(PilarResult { n1, n2, c, error });
            }
            if error >= prev_error {
                break;
            }
        }
    }
    best.ok_or(Error::NoFeasiblePair(n))
}

pub fn pilar_table(gamma: f64, targets: &[f64]) -> Result<Vec<PilarResult>> {
    if targets.is_empty() {
        return Err(Error::param("targets", "at least one target is required"));
    }
    targets.iter().map(|&n| pilar_search(n, gamma)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::{center_of_mass, effective_nstep};
    use approx::assert_abs_diff_eq;

    // (n, n1, n2, c) at γ = 0.99
    const REFERENCE: [(f64, usize, usize, f64); 9] = [
        (2.0, 1, 4, 0.337),
        (3.0, 1, 6, 0.406),
        (4.0, 2, 7, 0.406),
        (5.0, 2, 9, 0.437),
        (10.0, 4, 16, 0.515),
        (20.0, 6, 35, 0.519),
        (25.0, 8, 43, 0.530),
        (50.0, 13, 79, 0.640),
        (100.0, 22, 147, 0.760),
    ];

    #[test]
    fn reference_rows() {
        let rows = pilar_table(0.99, &REFERENCE_TARGETS).unwrap();
        for (got, &(n, n1, n2, c)) in rows.iter().zip(REFERENCE.iter()) {
            assert_eq!((got.n1, got.n2), (n1, n2), "n = {n}");
            assert!((got.c - c).abs() <= 1e-3, "n = {n}: c = {}", got.c);
        }
    }

    #[test]
    fn modulus_is_preserved() {
        for &n in &[2.0, 2.5, 3.0, 7.25, 10.0, 33.0] {
            let r = pilar_search(n, 0.99).unwrap();
            let w = r.weights().unwrap();
            assert!((effective_nstep(&w, 0.99).unwrap() - n).abs() < 1e-6);
        }
    }

    #[test]
    fn undiscounted_search_matches_com() {
        let r = pilar_search(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.c, (2.0 - r.n1 as f64) / (r.n2 - r.n1) as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(center_of_mass(&r.weights().unwrap()), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_lag_term_never_contributes() {
        // i = 0: |1·1 − 1| = 0, so a perfect tail would give zero error.
        assert_eq!(pilar_weight_error(0.0, 1, 2, 0.5, 0.9), 0.5 * 0.9);
        assert!(pilar_weight_error(0.904, 4, 16, 0.515, 0.99) > 0.0);
    }

    #[test]
    fn error_scan_limit_is_exact() {
        let (lam, n1, n2, c, g) = (0.904, 4, 16, 0.515, 0.99);
        let truncated = pilar_weight_error(lam, n1, n2, c, g);
        let mut full: f64 = 0.0;
        for i in 0..=200 {
            let h = if i < n1 {
                1.0
            } else if i < n2 {
                c
            } else {
                0.0
            };
            full = full.max((f64::powi(g, i as i32) * h - f64::powi(g * lam, i as i32)).abs());
        }
        assert_abs_diff_eq!(truncated, full, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(pilar_search(0.5, 0.99).is_err());
        assert!(matches!(pilar_search(1.0, 0.99), Err(Error::NoFeasiblePair(_))));
        assert!(pilar_table(0.99, &[]).is_err());
    }
}
