//! The 0/1 matrix game behind the intersection number.
//!
//! Rows are atoms of the ambient field, columns are members of `Q`, and the
//! payoff is 1 when the atom lies below the member. The row player picks a
//! probability measure on atoms and receives `min_j Ξ(q_j)`; the column
//! player picks a distribution over `Q` and concedes the heaviest atom load.
//! Both optimal strategies are recovered from a single simplex run on
//! `max Σ z subject to A z <= 1`.

use num_traits::{One, Zero};

use super::simplex::{is_optimal_pair, maximize, LpError};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameLp {
    payoff: Vec<Vec<bool>>,
    cols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSolution {
    pub value: Rational,
    /// Optimal measure on the rows.
    pub row_strategy: Vec<Rational>,
    /// Optimal distribution over the columns.
    pub col_strategy: Vec<Rational>,
}

impl GameLp {
    /// Every column needs at least one 1, otherwise the game is trivial.
    pub fn new(payoff: Vec<Vec<bool>>, cols: usize) -> Option<Self> {
        if payoff.iter().any(|r| r.len() != cols) || cols == 0 {
            return None;
        }
        if (0..cols).any(|j| payoff.iter().all(|r| !r[j])) {
            return None;
        }
        Some(GameLp { payoff, cols })
    }

    pub fn rows(&self) -> usize {
        self.payoff.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn payoff(&self) -> &[Vec<bool>] {
        &self.payoff
    }

    /// Value of the row player's strategy: its worst column.
    pub fn row_guarantee(&self, w: &[Rational]) -> Rational {
        (0..self.cols)
            .map(|j| {
                self.payoff
                    .iter()
                    .zip(w)
                    .filter(|(r, _)| r[j])
                    .map(|(_, wi)| wi.clone())
                    .sum::<Rational>()
            })
            .min()
            .expect("at least one column")
    }

    /// Value conceded by the column strategy: its heaviest row.
    pub fn col_guarantee(&self, y: &[Rational]) -> Rational {
        self.payoff
            .iter()
            .map(|r| {
                r.iter()
                    .zip(y)
                    .filter(|(hit, _)| **hit)
                    .map(|(_, yj)| yj.clone())
                    .sum::<Rational>()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn solve(&self) -> Result<GameSolution, LpError> {
        let one = Rational::one();
        let a: Vec<Vec<Rational>> = self
            .payoff
            .iter()
            .map(|r| r.iter().map(|&h| if h { one.clone() } else { Rational::zero() }).collect())
            .collect();
        let c = vec![one.clone(); self.cols];
        let b = vec![one.clone(); self.payoff.len()];
        let sol = maximize(&c, &a, &b)?;
        if !is_optimal_pair(&c, &a, &b, &sol) {
            return Err(LpError::CertificateMismatch);
        }
        // The objective is 1/value.
        let value = &one / &sol.objective;
        let row_strategy: Vec<Rational> = sol.y.iter().map(|u| u * &value).collect();
        let col_strategy: Vec<Rational> = sol.x.iter().map(|z| z * &value).collect();

        let total_rows: Rational = row_strategy.iter().sum();
        let total_cols: Rational = col_strategy.iter().sum();
        if !total_rows.is_one()
            || !total_cols.is_one()
            || self.row_guarantee(&row_strategy) != value
            || self.col_guarantee(&col_strategy) != value
        {
            return Err(LpError::CertificateMismatch);
        }
        Ok(GameSolution { value, row_strategy, col_strategy })
    }
}
