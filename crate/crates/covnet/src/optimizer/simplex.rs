//! Dense simplex solver for the per-cycle LP.
//!
//! The instances here are small (a few hundred rows at typical helper
//! counts) and already in the friendly form `max c.x, Ax <= b, x >= 0` with
//! `b >= 0`, so the slack basis is feasible and a single phase suffices.
//! Pricing is steepest-coefficient with a switch to Bland's rule after a
//! run of degenerate pivots; the interval rows make ties common.

use super::{LpInstance, OptimizerError, Schedule};

const TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

/// Solves the per-cycle LP to optimality and returns the vertex solution as
/// a [`Schedule`]. Infeasibility cannot arise (the all-zero schedule is
/// always feasible), so any `Unbounded` or `IterationLimit` error indicates
/// an internal bug rather than a bad instance.
pub fn solve_cycle_lp(lp: &LpInstance) -> Result<Schedule, OptimizerError> {
    let x = solve_tableau(lp)?;
    let n = lp.n_helpers;
    Ok(Schedule {
        received: x[..n].to_vec(),
        delivered: x[n..].to_vec(),
    })
}

/// Runs the tableau and returns the 2n structural variable values.
fn solve_tableau(lp: &LpInstance) -> Result<Vec<f64>, OptimizerError> {
    let nv = lp.n_vars();
    let m = lp.n_rows();
    if nv == 0 || m == 0 {
        return Ok(vec![0.0; nv]);
    }
    let cols = nv + m + 1;
    // Normalize the right-hand side so tableau entries stay O(1) and the
    // absolute tolerances mean something; x and the objective scale back
    // linearly at the end.
    let b_scale = lp.rows.iter().map(|r| r.rhs.abs()).fold(1.0f64, f64::max);
    let mut t = vec![vec![0.0f64; cols]; m];
    for (r, row) in lp.rows.iter().enumerate() {
        debug_assert!(row.rhs >= 0.0, "rows must have nonnegative bounds");
        for &(j, c) in &row.coeffs {
            t[r][j] += c;
        }
        t[r][nv + r] = 1.0;
        t[r][cols - 1] = row.rhs / b_scale;
    }
    let mut obj = vec![0.0f64; cols];
    for j in 0..nv {
        obj[j] = -lp.objective[j];
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let max_iter = 2_000 + 20 * (m + nv);
    let mut degen = 0usize;
    let mut bland = false;
    for _ in 0..max_iter {
        let enter = if bland {
            (0..cols - 1).find(|&j| obj[j] < -TOL)
        } else {
            let mut best = None;
            let mut best_v = -TOL;
            for (j, &v) in obj[..cols - 1].iter().enumerate() {
                if v < best_v {
                    best_v = v;
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = enter else {
            let mut x = vec![0.0; nv];
            for (r, &bv) in basis.iter().enumerate() {
                if bv < nv {
                    x[bv] = (t[r][cols - 1] * b_scale).max(0.0);
                }
            }
            return Ok(x);
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let a = t[r][e];
            if a <= TOL {
                continue;
            }
            let ratio = t[r][cols - 1] / a;
            match leave {
                None => {
                    leave = Some(r);
                    best_ratio = ratio;
                }
                Some(l) => {
                    if ratio < best_ratio - TOL {
                        leave = Some(r);
                        best_ratio = ratio;
                    } else if ratio < best_ratio + TOL && bland && basis[r] < basis[l] {
                        leave = Some(r);
                    }
                }
            }
        }
        let Some(l) = leave else {
            return Err(OptimizerError::Unbounded);
        };
        if best_ratio <= TOL {
            degen += 1;
            if degen >= DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            degen = 0;
            bland = false;
        }
        let piv = t[l][e];
        for v in t[l].iter_mut() {
            *v /= piv;
        }
        for r in 0..m {
            if r == l {
                continue;
            }
            let f = t[r][e];
            if f != 0.0 {
                let (pivot_row, other) = if r < l {
                    let (a, b) = t.split_at_mut(l);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = t.split_at_mut(r);
                    (&a[l], &mut b[0])
                };
                for (o, p) in other.iter_mut().zip(pivot_row.iter()) {
                    *o -= f * p;
                }
            }
        }
        let f = obj[e];
        if f != 0.0 {
            for (o, p) in obj.iter_mut().zip(t[l].iter()) {
                *o -= f * p;
            }
        }
        basis[l] = e;
    }
    Err(OptimizerError::IterationLimit(max_iter))
}
