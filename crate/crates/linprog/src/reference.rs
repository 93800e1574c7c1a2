//! Exhaustive reference solver for differential testing.
//!
//! Enumerates every basic solution (each choice of n active constraints
//! among rows-at-equality and finite variable bounds), keeps the feasible
//! ones, and returns the best objective. Exponential in problem size, so it
//! is only usable for problems with a handful of columns — which is exactly
//! what makes it a trustworthy cross-check for the simplex implementation:
//! the two share no code path beyond the problem container.
//!
//! Requires every column to carry finite lower and upper bounds; with a
//! bounded feasible region the optimum (when one exists) is attained at an
//! enumerated point.

use crate::problem::{LinearProgram, RowKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceOutcome<S> {
    Optimal { objective: S, point: Vec<S> },
    Infeasible,
}

const FEAS_TOL: f64 = 1e-7;

/// Solves a small, fully box-bounded program by enumerating basic solutions.
///
/// Panics if any column has an infinite bound or the problem has more than
/// 16 columns (the enumeration would be astronomically large anyway).
pub fn enumerate_solve<S: Scalar>(lp: &LinearProgram<S>) -> ReferenceOutcome<S> {
    let n = lp.num_cols();
    let m = lp.num_rows();
    assert!(n <= 16, "reference solver is for tiny problems");
    for j in 0..n {
        assert!(
            lp.col_lower[j].is_finite() && lp.col_upper[j].is_finite(),
            "reference solver needs box-bounded columns"
        );
        if lp.col_lower[j] > lp.col_upper[j] {
            return ReferenceOutcome::Infeasible;
        }
    }

    // dense row-major copy of the constraint matrix
    let mut dense = vec![S::zero(); m * n];
    for &(r, c, v) in &lp.entries {
        dense[r * n + c] += v;
    }

    // candidate active constraints: (normal vector index, rhs)
    // 0..m            -> row i tight
    // m + j           -> x_j at lower
    // m + n + j       -> x_j at upper
    let total = m + 2 * n;
    let feas = S::from_f64_lossy(FEAS_TOL);

    let mut best: Option<(S, Vec<S>)> = None;
    let mut combo: Vec<usize> = (0..n).collect();

    loop {
        if let Some(x) = solve_active_set(lp, &dense, &combo) {
            if is_feasible(lp, &dense, &x, feas) {
                let obj = lp.objective_value(&x);
                if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                    best = Some((obj, x));
                }
            }
        }
        if !next_combination(&mut combo, total) {
            break;
        }
    }

    match best {
        Some((objective, point)) => ReferenceOutcome::Optimal { objective, point },
        None => ReferenceOutcome::Infeasible,
    }
}

/// Advances `combo` to the next k-combination of 0..total; false when done.
fn next_combination(combo: &mut [usize], total: usize) -> bool {
    let k = combo.len();
    if k == 0 || total < k {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < total - (k - i) {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the n x n system defined by the chosen active constraints.
/// Returns None when the system is singular to working precision.
fn solve_active_set<S: Scalar>(
    lp: &LinearProgram<S>,
    dense: &[S],
    combo: &[usize],
) -> Option<Vec<S>> {
    let n = lp.num_cols();
    let m = lp.num_rows();
    let mut a = vec![S::zero(); n * n];
    let mut b = vec![S::zero(); n];
    for (k, &pick) in combo.iter().enumerate() {
        if pick < m {
            a[k * n..(k + 1) * n].copy_from_slice(&dense[pick * n..(pick + 1) * n]);
            b[k] = lp.rows[pick].rhs;
        } else if pick < m + n {
            let j = pick - m;
            a[k * n + j] = S::one();
            b[k] = lp.col_lower[j];
        } else {
            let j = pick - m - n;
            a[k * n + j] = S::one();
            b[k] = lp.col_upper[j];
        }
    }
    gaussian_solve(&mut a, &mut b, n)
}

fn gaussian_solve<S: Scalar>(a: &mut [S], b: &mut [S], n: usize) -> Option<Vec<S>> {
    for k in 0..n {
        let mut piv = k;
        let mut mag = a[k * n + k].abs();
        for r in (k + 1)..n {
            if a[r * n + k].abs() > mag {
                mag = a[r * n + k].abs();
                piv = r;
            }
        }
        if mag < S::from_f64_lossy(1e-10) {
            return None;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        for r in (k + 1)..n {
            let f = a[r * n + k] / a[k * n + k];
            if f != S::zero() {
                for c in k..n {
                    let v = a[k * n + c];
                    a[r * n + c] -= f * v;
                }
                let bk = b[k];
                b[r] -= f * bk;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in (r + 1)..n {
            acc -= a[r * n + c] * x[c];
        }
        x[r] = acc / a[r * n + r];
    }
    Some(x)
}

fn is_feasible<S: Scalar>(lp: &LinearProgram<S>, dense: &[S], x: &[S], tol: S) -> bool {
    let n = lp.num_cols();
    for j in 0..n {
        if x[j] < lp.col_lower[j] - tol || x[j] > lp.col_upper[j] + tol {
            return false;
        }
    }
    for (i, row) in lp.rows.iter().enumerate() {
        let mut act = S::zero();
        for (c, xj) in x.iter().enumerate() {
            act += dense[i * n + c] * *xj;
        }
        match row.kind {
            RowKind::Eq => {
                if (act - row.rhs).abs() > tol {
                    return false;
                }
            }
            RowKind::Le => {
                if act > row.rhs + tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Deterministic SplitMix64 stream, so the random-problem tests need no
/// external RNG dependency and reproduce exactly.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, bound).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// Uniform multiple of 0.5 in [-limit, limit].
    pub fn half_int<S: Scalar>(&mut self, limit: i64) -> S {
        let steps = (4 * limit + 1) as u64;
        let v = (self.next_u64() % steps) as i64 - 2 * limit;
        S::from_f64_lossy(v as f64 / 2.0)
    }
}

/// Generates a random box-bounded program with at most `max_cols` columns
/// and `max_rows` rows. Roughly two thirds are built around a known interior
/// point (hence feasible); the rest may be infeasible.
pub fn random_lp<S: Scalar>(rng: &mut SplitMix64, max_cols: usize, max_rows: usize) -> LinearProgram<S> {
    let n = 2 + rng.below(max_cols.saturating_sub(1));
    let m = 1 + rng.below(max_rows);
    let mut lp = LinearProgram::new("random");
    for j in 0..n {
        let lower: S = rng.half_int(4);
        let width = S::from_f64_lossy(0.5) + rng.half_int::<S>(6).abs();
        lp.add_col(format!("x{j}"), rng.half_int(10), lower, lower + width);
    }
    // anchor point inside the box
    let anchor: Vec<S> = (0..n)
        .map(|j| {
            let lo = lp.col_lower[j];
            let hi = lp.col_upper[j];
            let f = S::from_f64_lossy(rng.below(5) as f64 / 4.0);
            lo + (hi - lo) * f
        })
        .collect();
    let skew_infeasible = rng.below(3) == 0;
    for i in 0..m {
        let kind = if rng.below(10) < 3 {
            RowKind::Eq
        } else {
            RowKind::Le
        };
        let row = lp.add_row(format!("r{i}"), kind, S::zero());
        let mut act = S::zero();
        let mut nonzero = false;
        for j in 0..n {
            if rng.below(10) < 7 {
                let coeff: S = rng.half_int(6);
                if coeff != S::zero() {
                    lp.put(row, crate::problem::Col(j), coeff);
                    act += coeff * anchor[j];
                    nonzero = true;
                }
            }
        }
        let rhs = if skew_infeasible {
            rng.half_int(8)
        } else if kind == RowKind::Eq || !nonzero {
            act
        } else {
            act + S::from_f64_lossy(rng.below(4) as f64) // slack room
        };
        lp.rows[row.0].rhs = rhs;
    }
    lp
}
