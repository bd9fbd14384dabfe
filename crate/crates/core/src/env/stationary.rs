use nalgebra::{DMatrix, DVector};

use super::mrp::TabularMRP;
use crate::error::{Error, Result};

/// An MRP paired with the stationary distribution `d` of its
/// restart-augmented chain.
#[derive(Clone, Debug)]
pub struct StationaryModel {
    mrp: TabularMRP,
    d: DVector<f64>,
}

impl StationaryModel {
    pub fn mrp(&self) -> &TabularMRP {
        &self.mrp
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// `diag(d)`.
    pub fn weighting(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.d)
    }

    /// `‖x‖_D = sqrt(Σ_s d(s) x(s)²)`.
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.d.iter().zip(x.iter()).map(|(d, x)| d * x * x).sum::<f64>().sqrt()
    }
}

/// Stationary distribution of the chain that restarts from the start
/// distribution on termination. Fails for reducible chains.
pub fn visit_distribution(mrp: &TabularMRP) -> Result<StationaryModel> {
    let p = mrp.restart_chain();
    let n = p.nrows();
    if !strongly_connected(&p) {
        return Err(Error::Reducible("the restart chain is not irreducible".into()));
    }
    // dᵀ(P − I) = 0 with the last equation replaced by Σ d = 1.
    let mut a = p.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let mut d = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular("stationary system is singular".into()))?;
    d.iter_mut().for_each(|x| *x = x.max(0.0));
    let total = d.sum();
    d /= total;
    Ok(StationaryModel { mrp: mrp.clone(), d })
}

fn strongly_connected(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in 0..n {
                let edge = if forward { p[(s, t)] } else { p[(t, s)] };
                if edge > 0.0 && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.into_iter().all(|x| x)
    };
    reach(true) && reach(false)
}
