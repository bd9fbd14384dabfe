//! Benchmark environments: the 19-state random walk and slippery
//! gridworlds under a uniform-random policy, folded into MRPs.

use nalgebra::{DMatrix, DVector};

use super::mrp::TabularMRP;
use crate::error::{Error, Result};

/// Number of non-terminal states in the random walk.
pub const RANDOM_WALK_STATES: usize = 19;

/// Linear chain of 19 states between two terminals (ids 0 and 20). Each
/// step moves left or right with equal probability; entering the left end
/// pays −1 and the right end +1. Episodes start in the center (id 10).
pub fn random_walk_19() -> TabularMRP {
    let n = RANDOM_WALK_STATES + 2;
    let mut p = DMatrix::zeros(n, n);
    let mut r = DMatrix::zeros(n, n);
    for s in 1..n - 1 {
        p[(s, s - 1)] = 0.5;
        p[(s, s + 1)] = 0.5;
    }
    r[(1, 0)] = -1.0;
    r[(n - 2, n - 1)] = 1.0;
    let mut terminal = vec![false; n];
    terminal[0] = true;
    terminal[n - 1] = true;
    let mut start = DVector::zeros(n);
    start[n / 2] = 1.0;
    TabularMRP::new(p, r, terminal, start).expect("random walk is well formed")
}

/// Cell coordinates `(x, y)`, `y = 0` is the bottom row.
pub type Cell = (usize, usize);

/// Gridworld description. Moves succeed with `success_prob` and otherwise
/// slip to either perpendicular direction with equal probability; moves
/// into a wall or the border leave the agent in place. Entering a terminal
/// cell pays its reward; every other transition pays 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub walls: Vec<Cell>,
    pub terminals: Vec<(Cell, f64)>,
    pub start: Cell,
    pub success_prob: f64,
}

impl GridLayout {
    /// 4×3 layout with one interior wall and ±1 terminals on the right.
    pub fn classic_4x3() -> Self {
        GridLayout {
            width: 4,
            height: 3,
            walls: vec![(1, 1)],
            terminals: vec![((3, 2), 1.0), ((3, 1), -1.0)],
            start: (0, 0),
            success_prob: 0.8,
        }
    }

    /// Open 10×8 layout with a single +1 goal.
    pub fn sparse_10x8() -> Self {
        GridLayout {
            width: 10,
            height: 8,
            walls: vec![],
            terminals: vec![((7, 5), 1.0)],
            start: (1, 2),
            success_prob: 0.8,
        }
    }

    fn cell_ids(&self) -> Vec<Option<usize>> {
        let mut ids = vec![None; self.width * self.height];
        let mut next = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                if !self.walls.contains(&(x, y)) {
                    ids[y * self.width + x] = Some(next);
                    next += 1;
                }
            }
        }
        ids
    }

    /// State id of `cell`, if it is on the grid and not a wall.
    pub fn state_of(&self, cell: Cell) -> Option<usize> {
        if cell.0 >= self.width || cell.1 >= self.height {
            return None;
        }
        self.cell_ids()[cell.1 * self.width + cell.0]
    }

    pub fn build(&self) -> Result<TabularMRP> {
        if !(0.0..=1.0).contains(&self.success_prob) {
            return Err(Error::InvalidMrp(format!(
                "success probability {} not in [0, 1]",
                self.success_prob
            )));
        }
        let ids = self.cell_ids();
        let id = |c: Cell| ids[c.1 * self.width + c.0];
        let n = ids.iter().flatten().count();
        if n == 0 {
            return Err(Error::InvalidMrp("grid has no open cells".into()));
        }
        let start = self
            .state_of(self.start)
            .ok_or_else(|| Error::InvalidMrp(format!("start {:?} is not an open cell", self.start)))?;

        let mut terminal = vec![false; n];
        let mut payoff = vec![0.0; n];
        for &(cell, reward) in &self.terminals {
            let s = self
                .state_of(cell)
                .ok_or_else(|| Error::InvalidMrp(format!("terminal {cell:?} is not an open cell")))?;
            terminal[s] = true;
            payoff[s] = reward;
        }

        // up, right, down, left
        const MOVES: [(isize, isize); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];
        let slip = (1.0 - self.success_prob) / 2.0;
        let step = |cell: Cell, dir: usize| -> Cell {
            let (dx, dy) = MOVES[dir];
            let x = cell.0 as isize + dx;
            let y = cell.1 as isize + dy;
            if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
                return cell;
            }
            let to = (x as usize, y as usize);
            if id(to).is_none() {
                cell
            } else {
                to
            }
        };

        let mut p = DMatrix::zeros(n, n);
        let mut r = DMatrix::zeros(n, n);
        for y in 0..self.height {
            for x in 0..self.width {
                let Some(s) = id((x, y)) else { continue };
                if terminal[s] {
                    continue;
                }
                for action in 0..4 {
                    for (dir, prob) in [
                        (action, self.success_prob),
                        ((action + 1) % 4, slip),
                        ((action + 3) % 4, slip),
                    ] {
                        let t = id(step((x, y), dir)).expect("moves land on open cells");
                        p[(s, t)] += 0.25 * prob;
                        if terminal[t] {
                            r[(s, t)] = payoff[t];
                        }
                    }
                }
            }
        }
        let mut start_dist = DVector::zeros(n);
        start_dist[start] = 1.0;
        TabularMRP::new(p, r, terminal, start_dist)
    }
}

pub fn gridworld_4x3() -> TabularMRP {
    GridLayout::classic_4x3().build().expect("4x3 layout is well formed")
}

pub fn gridworld_10x8() -> TabularMRP {
    GridLayout::sparse_10x8().build().expect("10x8 layout is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::exact_values;

    #[test]
    fn random_walk_shape() {
        let mrp = random_walk_19();
        assert_eq!(mrp.n_states(), 21);
        assert_eq!(mrp.terminals().collect::<Vec<_>>(), vec![0, 20]);
        assert_eq!(mrp.start_dist()[10], 1.0);
        let v = exact_values(&mrp, 1.0).unwrap();
        assert!(v[10].abs() < 1e-12);
    }

    #[test]
    fn grid_rows_are_stochastic() {
        for mrp in [gridworld_4x3(), gridworld_10x8()] {
            for s in 0..mrp.n_states() {
                assert!((mrp.transition().row(s).sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classic_grid_layout() {
        let layout = GridLayout::classic_4x3();
        let mrp = layout.build().unwrap();
        assert_eq!(mrp.n_states(), 11);
        // corner (0,0): "down" and "left" bump the border
        let s = layout.state_of((0, 0)).unwrap();
        let up = layout.state_of((0, 1)).unwrap();
        let right = layout.state_of((1, 0)).unwrap();
        // up: 0.8 up, 0.1 right, 0.1 left(stay); right: 0.8 right, 0.1 down(stay), 0.1 up;
        // down: 0.8 stay, 0.1 left(stay), 0.1 right; left: 0.8 stay, 0.1 up, 0.1 down(stay)
        let stay = 0.25 * (0.1 + 0.1 + 0.9 + 0.9);
        assert!((mrp.transition()[(s, s)] - stay).abs() < 1e-15);
        assert!((mrp.transition()[(s, up)] - 0.25).abs() < 1e-15);
        assert!((mrp.transition()[(s, right)] - 0.25).abs() < 1e-15);
        // the cell below the wall: every push into the wall stays put
        let below = layout.state_of((1, 0)).unwrap();
        assert!(layout.state_of((1, 1)).is_none());
        let row = mrp.transition().row(below);
        assert!((row[below] - 0.5).abs() < 1e-15);
        assert!((row[layout.state_of((0, 0)).unwrap()] - 0.25).abs() < 1e-15);
        assert!((row[layout.state_of((2, 0)).unwrap()] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sparse_grid_has_single_reward() {
        let mrp = gridworld_10x8();
        assert_eq!(mrp.n_states(), 80);
        // the only nonzero reward is the goal payoff, earned on entering it
        let goal = GridLayout::sparse_10x8().state_of((7, 5)).unwrap();
        for s in 0..mrp.n_states() {
            for t in 0..mrp.n_states() {
                let r = mrp.reward()[(s, t)];
                assert!(r == 0.0 || (r == 1.0 && t == goal));
            }
        }
        assert_eq!(mrp.expected_rewards().iter().filter(|&&r| r != 0.0).count(), 4);
        let v = exact_values(&mrp, 0.99).unwrap();
        for s in 0..mrp.n_states() {
            if !mrp.is_terminal(s) {
                assert!(v[s] > 0.0);
            }
        }
    }

    #[test]
    fn bad_layouts_are_rejected() {
        let mut layout = GridLayout::classic_4x3();
        layout.start = (1, 1);
        assert!(layout.build().is_err());
        let mut layout = GridLayout::classic_4x3();
        layout.terminals.push(((9, 9), 1.0));
        assert!(layout.build().is_err());
    }
}
