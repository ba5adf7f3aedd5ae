//! Dense-tableau primal simplex over exact rationals.
//!
//! Solves `maximize c·x subject to A x <= b, x >= 0` with `b >= 0`, so the
//! slack basis is feasible and no phase one is needed. Entering and leaving
//! variables follow Bland's rule, which rules out cycling.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint matrix shape does not match the objective or bounds")]
    Shape,
    #[error("right-hand side {0} is negative; the origin must be feasible")]
    NegativeBound(usize),
    #[error("objective is unbounded")]
    Unbounded,
    #[error("primal and dual certificates disagree")]
    CertificateMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    /// Optimal primal point.
    pub x: Vec<Rational>,
    /// Optimal dual multipliers, one per constraint row.
    pub y: Vec<Rational>,
    pub objective: Rational,
    pub pivots: usize,
}

pub fn maximize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> Result<LpSolution, LpError> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(LpError::Shape);
    }
    if let Some(i) = b.iter().position(|v| v.is_negative()) {
        return Err(LpError::NegativeBound(i));
    }

    let width = n + m;
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut t = row.clone();
            t.extend((0..m).map(|k| if k == i { Rational::from_integer(1.into()) } else { Rational::zero() }));
            t
        })
        .collect();
    let mut rhs: Vec<Rational> = b.to_vec();
    let mut cost: Vec<Rational> = c.iter().map(|v| -v).chain((0..m).map(|_| Rational::zero())).collect();
    let mut value = Rational::zero();
    let mut basis: Vec<usize> = (n..width).collect();
    let mut pivots = 0;

    loop {
        let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !rows[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((pr, _)) = leave else {
            return Err(LpError::Unbounded);
        };

        let piv = rows[pr][enter].clone();
        for v in rows[pr].iter_mut() {
            *v /= &piv;
        }
        rhs[pr] /= &piv;
        let pivot_row = rows[pr].clone();
        let pivot_rhs = rhs[pr].clone();
        for i in 0..m {
            if i == pr || rows[i][enter].is_zero() {
                continue;
            }
            let f = rows[i][enter].clone();
            for (v, p) in rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            rhs[i] -= &f * &pivot_rhs;
        }
        if !cost[enter].is_zero() {
            let f = cost[enter].clone();
            for (v, p) in cost.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            value -= &f * &pivot_rhs;
        }
        basis[pr] = enter;
        pivots += 1;
    }

    let mut x = vec![Rational::zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = rhs[i].clone();
        }
    }
    let y = cost[n..].to_vec();
    Ok(LpSolution { x, y, objective: value, pivots })
}

/// Checks primal feasibility, dual feasibility and equal objectives.
pub fn is_optimal_pair(c: &[Rational], a: &[Vec<Rational>], b: &[Rational], sol: &LpSolution) -> bool {
    let primal_ok = sol.x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, bi)| {
            row.iter().zip(&sol.x).map(|(aij, xj)| aij * xj).sum::<Rational>() <= *bi
        });
    let dual_ok = sol.y.iter().all(|v| !v.is_negative())
        && (0..c.len()).all(|j| {
            a.iter().zip(&sol.y).map(|(row, yi)| &row[j] * yi).sum::<Rational>() >= c[j]
        });
    let primal_obj: Rational = c.iter().zip(&sol.x).map(|(cj, xj)| cj * xj).sum();
    let dual_obj: Rational = b.iter().zip(&sol.y).map(|(bi, yi)| bi * yi).sum();
    primal_ok && dual_ok && primal_obj == dual_obj && primal_obj == sol.objective
}
