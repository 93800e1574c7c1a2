//! Two-phase revised simplex for linear programs with general column bounds.
//!
//! Variables are kept at bounds directly (no splitting into positive parts),
//! the basis is held as a dense LU factorization with product-form updates,
//! and a refactorization is performed every [`REFACTOR_EVERY`] pivots.
//! Anti-cycling falls back to Bland's rule after a streak of degenerate
//! pivots.

use crate::dense::DenseLu;
use crate::problem::{LinearProgram, RowKind};
use crate::scalar::Scalar;

const REFACTOR_EVERY: usize = 100;
const BLAND_AFTER: usize = 50;

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solver controls; defaults match desk-scale problems.
#[derive(Debug, Clone)]
pub struct SolveOptions<S> {
    pub feas_tol: S,
    pub opt_tol: S,
    pub max_iterations: usize,
    /// Geometric row/column scaling before solving.
    pub scaling: bool,
}

impl<S: Scalar> Default for SolveOptions<S> {
    fn default() -> Self {
        Self {
            feas_tol: S::from_f64_lossy(1e-7),
            opt_tol: S::from_f64_lossy(1e-7),
            max_iterations: 1_000_000,
            scaling: true,
        }
    }
}

/// Result of [`solve`]. `values` and `duals` are populated only when
/// `status == Optimal`; duals are row-aligned sensitivities d(obj)/d(rhs).
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub status: Status,
    pub objective: S,
    pub values: Vec<S>,
    pub duals: Option<Vec<S>>,
    pub iterations: usize,
}

impl<S: Scalar> Solution<S> {
    fn non_optimal(status: Status, iterations: usize) -> Self {
        Self {
            status,
            objective: S::nan(),
            values: Vec::new(),
            duals: None,
            iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable resting at zero; has no bound to sit on.
    FreeAtZero,
}

struct Eta<S> {
    row: usize,
    col: Vec<S>,
}

enum PhaseEnd {
    Done,
    Unbounded,
    IterationLimit,
}

struct Worker<S> {
    m: usize,
    n_struct: usize,
    n_total: usize,
    art_start: usize,
    // expanded constraint matrix (structural + slack + artificial), CSC
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
    lower: Vec<S>,
    upper: Vec<S>,
    cost: Vec<S>,
    rhs: Vec<S>,
    row_scale: Vec<S>,
    col_scale: Vec<S>,

    state: Vec<VarState>,
    basic: Vec<usize>,
    x_basic: Vec<S>,
    lu: DenseLu<S>,
    etas: Vec<Eta<S>>,

    opts: SolveOptions<S>,
    iterations: usize,
    degenerate_streak: usize,
    bland: bool,
}

/// Solves the program, minimizing its objective.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>, opts: &SolveOptions<S>) -> Solution<S> {
    for j in 0..lp.num_cols() {
        if lp.col_lower[j] > lp.col_upper[j] {
            return Solution::non_optimal(Status::Infeasible, 0);
        }
    }
    lp.validate().expect("structurally valid problem");

    let mut w = Worker::build(lp, opts.clone());

    // Phase 1: minimize the sum of artificial infeasibilities.
    let end = w.run_phase();
    match end {
        PhaseEnd::IterationLimit => {
            return Solution::non_optimal(Status::IterationLimit, w.iterations)
        }
        // The phase-1 objective is bounded below by zero; an unbounded ray
        // here means the factorization went bad beyond recovery.
        PhaseEnd::Unbounded => panic!("phase-1 objective reported unbounded"),
        PhaseEnd::Done => {}
    }
    let infeasibility: S = (0..w.m)
        .filter(|&i| w.basic[i] >= w.art_start)
        .map(|i| w.x_basic[i].max(S::zero()))
        .sum();
    let rhs_mag = w
        .rhs
        .iter()
        .fold(S::zero(), |acc, b| acc.max(b.abs()));
    if infeasibility > w.opts.feas_tol * (S::one() + rhs_mag) {
        return Solution::non_optimal(Status::Infeasible, w.iterations);
    }

    // Phase 2: pin artificials at zero and restore the true costs.
    w.enter_phase2(lp);
    let end = w.run_phase();
    match end {
        PhaseEnd::IterationLimit => {
            return Solution::non_optimal(Status::IterationLimit, w.iterations)
        }
        PhaseEnd::Unbounded => return Solution::non_optimal(Status::Unbounded, w.iterations),
        PhaseEnd::Done => {}
    }

    w.refactorize(); // wash accumulated drift before extraction
    let x = w.extract_primal();
    let duals = w.extract_duals();
    w.audit_residuals(lp, &x);

    Solution {
        status: Status::Optimal,
        objective: lp.objective_value(&x),
        values: x,
        duals: Some(duals),
        iterations: w.iterations,
    }
}

impl<S: Scalar> Worker<S> {
    fn build(lp: &LinearProgram<S>, opts: SolveOptions<S>) -> Self {
        let m = lp.num_rows();
        let n_struct = lp.num_cols();

        // Merge duplicate triplets into per-column sorted entries.
        let mut triplets: Vec<(usize, usize, S)> =
            lp.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, S)> = Vec::with_capacity(triplets.len());
        for (c, r, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == c && last.1 == r => last.2 += v,
                _ => merged.push((c, r, v)),
            }
        }
        merged.retain(|e| e.2 != S::zero());

        // Scaling factors computed on the structural matrix.
        let mut row_scale = vec![S::one(); m];
        let mut col_scale = vec![S::one(); n_struct];
        if opts.scaling {
            for _ in 0..2 {
                geometric_pass(&merged, &col_scale, &mut row_scale, true);
                geometric_pass(&merged, &row_scale, &mut col_scale, false);
            }
        }

        let n_slack: usize = lp.rows.iter().filter(|r| r.kind == RowKind::Le).count();
        let art_start = n_struct + n_slack;

        // Assemble CSC for structural columns with scaling applied.
        let mut col_ptr = Vec::with_capacity(art_start + m + 1);
        let mut row_idx = Vec::new();
        let mut values: Vec<S> = Vec::new();
        col_ptr.push(0);
        let mut cursor = 0;
        for j in 0..n_struct {
            while cursor < merged.len() && merged[cursor].0 == j {
                let (_, r, v) = merged[cursor];
                row_idx.push(r);
                values.push(v * row_scale[r] * col_scale[j]);
                cursor += 1;
            }
            col_ptr.push(row_idx.len());
        }

        let mut lower: Vec<S> = (0..n_struct)
            .map(|j| lp.col_lower[j] / col_scale[j])
            .collect();
        let mut upper: Vec<S> = (0..n_struct)
            .map(|j| lp.col_upper[j] / col_scale[j])
            .collect();
        let mut cost = vec![S::zero(); n_struct];
        let rhs: Vec<S> = lp
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.rhs * row_scale[i])
            .collect();

        // One slack per Le row: a'x + s = b with s >= 0.
        for (i, row) in lp.rows.iter().enumerate() {
            if row.kind == RowKind::Le {
                row_idx.push(i);
                values.push(S::one());
                col_ptr.push(row_idx.len());
                lower.push(S::zero());
                upper.push(S::infinity());
                cost.push(S::zero());
            }
        }

        // Initial nonbasic placement.
        let mut state: Vec<VarState> = (0..art_start)
            .map(|j| {
                if lower[j].is_finite() {
                    VarState::AtLower
                } else if upper[j].is_finite() {
                    VarState::AtUpper
                } else {
                    VarState::FreeAtZero
                }
            })
            .collect();

        // Row residuals at the initial point decide the starting basis:
        // the slack where it is feasible, an artificial otherwise.
        let mut residual = rhs.clone();
        for j in 0..art_start {
            let v = nb_value(state[j], lower[j], upper[j]);
            if v != S::zero() {
                for k in col_ptr[j]..col_ptr[j + 1] {
                    residual[row_idx[k]] -= values[k] * v;
                }
            }
        }

        let mut slack_of_row = vec![usize::MAX; m];
        {
            let mut s = n_struct;
            for (i, row) in lp.rows.iter().enumerate() {
                if row.kind == RowKind::Le {
                    slack_of_row[i] = s;
                    s += 1;
                }
            }
        }

        let mut basic = Vec::with_capacity(m);
        let mut x_basic = Vec::with_capacity(m);
        let mut n_total = art_start;
        for i in 0..m {
            let s = slack_of_row[i];
            if s != usize::MAX && residual[i] >= S::zero() {
                state[s] = VarState::Basic(i);
                basic.push(s);
                x_basic.push(residual[i]);
            } else {
                let sign = if residual[i] >= S::zero() {
                    S::one()
                } else {
                    -S::one()
                };
                row_idx.push(i);
                values.push(sign);
                col_ptr.push(row_idx.len());
                lower.push(S::zero());
                upper.push(S::infinity());
                cost.push(S::one()); // phase-1 cost
                state.push(VarState::Basic(i));
                basic.push(n_total);
                x_basic.push(residual[i].abs());
                n_total += 1;
            }
        }

        let mut worker = Self {
            m,
            n_struct,
            n_total,
            art_start,
            col_ptr,
            row_idx,
            values,
            lower,
            upper,
            cost,
            rhs,
            row_scale,
            col_scale,
            state,
            basic,
            x_basic,
            lu: DenseLu::factorize(Vec::new(), 0).expect("empty LU"),
            etas: Vec::new(),
            opts,
            iterations: 0,
            degenerate_streak: 0,
            bland: false,
        };
        worker.refactorize();
        worker
    }

    fn enter_phase2(&mut self, lp: &LinearProgram<S>) {
        for j in self.art_start..self.n_total {
            self.lower[j] = S::zero();
            self.upper[j] = S::zero();
            self.cost[j] = S::zero();
        }
        for j in 0..self.n_struct {
            self.cost[j] = lp.objective[j] * self.col_scale[j];
        }
        self.bland = false;
        self.degenerate_streak = 0;
    }

    fn col_entries(&self, j: usize) -> impl Iterator<Item = (usize, S)> + '_ {
        (self.col_ptr[j]..self.col_ptr[j + 1]).map(|k| (self.row_idx[k], self.values[k]))
    }

    fn refactorize(&mut self) {
        let m = self.m;
        let mut mat = vec![S::zero(); m * m];
        for (pos, &j) in self.basic.iter().enumerate() {
            for (r, v) in self.col_entries(j) {
                mat[r * m + pos] = v;
            }
        }
        self.lu = DenseLu::factorize(mat, m).expect("nonsingular simplex basis");
        self.etas.clear();
        self.recompute_basic_values();
    }

    /// Recomputes x_B = B^-1 (b - N x_N) from scratch.
    fn recompute_basic_values(&mut self) {
        let mut resid = self.rhs.clone();
        for j in 0..self.n_total {
            if let VarState::Basic(_) = self.state[j] {
                continue;
            }
            let v = nb_value(self.state[j], self.lower[j], self.upper[j]);
            if v != S::zero() {
                for (r, a) in self.col_entries(j) {
                    resid[r] -= a * v;
                }
            }
        }
        self.lu.solve(&mut resid);
        self.x_basic = resid;
    }

    fn ftran(&self, col: usize) -> Vec<S> {
        let mut w = vec![S::zero(); self.m];
        for (r, v) in self.col_entries(col) {
            w[r] = v;
        }
        self.lu.solve(&mut w);
        for eta in &self.etas {
            let t = w[eta.row] / eta.col[eta.row];
            if t != S::zero() {
                for (wi, ei) in w.iter_mut().zip(&eta.col) {
                    *wi -= *ei * t;
                }
                w[eta.row] = t;
            } else {
                w[eta.row] = t;
            }
        }
        w
    }

    fn btran_costs(&self) -> Vec<S> {
        let mut y: Vec<S> = self.basic.iter().map(|&j| self.cost[j]).collect();
        for eta in self.etas.iter().rev() {
            let mut dot = S::zero();
            for (i, (ei, yi)) in eta.col.iter().zip(&y).enumerate() {
                if i != eta.row {
                    dot += *ei * *yi;
                }
            }
            y[eta.row] = (y[eta.row] - dot) / eta.col[eta.row];
        }
        self.lu.solve_transposed(&mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[S]) -> S {
        let mut d = self.cost[j];
        for (r, v) in self.col_entries(j) {
            d -= v * y[r];
        }
        d
    }

    /// Runs simplex iterations until the current phase's objective is optimal.
    fn run_phase(&mut self) -> PhaseEnd {
        loop {
            if self.iterations >= self.opts.max_iterations {
                return PhaseEnd::IterationLimit;
            }
            let y = self.btran_costs();

            // entering variable
            let mut entering: Option<(usize, S, S)> = None; // (col, direction, score)
            for j in 0..self.n_total {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let dir = match self.state[j] {
                    VarState::AtLower if d < -self.opts.opt_tol => S::one(),
                    VarState::AtUpper if d > self.opts.opt_tol => -S::one(),
                    VarState::FreeAtZero if d < -self.opts.opt_tol => S::one(),
                    VarState::FreeAtZero if d > self.opts.opt_tol => -S::one(),
                    _ => continue,
                };
                let score = -d.abs();
                if self.bland {
                    entering = Some((j, dir, score));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| score < best) {
                    entering = Some((j, dir, score));
                }
            }
            let Some((q, dir, _)) = entering else {
                return PhaseEnd::Done;
            };

            let w = self.ftran(q);
            let step = self.ratio_test(q, dir, &w);
            match step {
                None => return PhaseEnd::Unbounded,
                Some((delta, blocking)) => {
                    self.apply_step(q, dir, delta, blocking, w);
                }
            }
            self.iterations += 1;
        }
    }

    /// Largest step for entering column q in direction `dir`, and the basic
    /// position that blocks it (None = the entering variable's own bound).
    fn ratio_test(&self, q: usize, dir: S, w: &[S]) -> Option<(S, Option<usize>)> {
        let pivot_tol = S::from_f64_lossy(1e-9);
        let span = self.upper[q] - self.lower[q];
        let mut best = span; // may be infinite
        let mut blocking: Option<usize> = None;
        let mut blocking_weight = S::zero();

        for (i, &wi) in w.iter().enumerate() {
            if wi.abs() <= pivot_tol {
                continue;
            }
            let rate = -dir * wi; // change of x_basic[i] per unit step
            let var = self.basic[i];
            let cand = if rate < S::zero() {
                let room = (self.x_basic[i] - self.lower[var]).max(S::zero());
                if self.lower[var].is_infinite() {
                    continue;
                }
                room / -rate
            } else {
                let room = (self.upper[var] - self.x_basic[i]).max(S::zero());
                if self.upper[var].is_infinite() {
                    continue;
                }
                room / rate
            };
            let tie = if best.is_finite() {
                S::from_f64_lossy(1e-10) * (S::one() + best.abs())
            } else {
                S::zero()
            };
            if cand < best - tie {
                best = cand;
                blocking = Some(i);
                blocking_weight = wi.abs();
            } else if cand <= best + tie && blocking.is_some() {
                // stability: prefer the larger pivot element among ties;
                // under Bland, prefer the lowest variable index.
                let better = if self.bland {
                    var < self.basic[blocking.unwrap()]
                } else {
                    wi.abs() > blocking_weight
                };
                if better && cand <= best {
                    best = cand;
                    blocking = Some(i);
                    blocking_weight = wi.abs();
                }
            }
        }

        if best.is_infinite() {
            return None;
        }
        Some((best.max(S::zero()), blocking))
    }

    fn apply_step(&mut self, q: usize, dir: S, delta: S, blocking: Option<usize>, w: Vec<S>) {
        let degen_tol = S::from_f64_lossy(1e-11);
        if delta <= degen_tol {
            self.degenerate_streak += 1;
            if self.degenerate_streak > BLAND_AFTER {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
            self.bland = false;
        }

        if delta != S::zero() {
            for (xb, wi) in self.x_basic.iter_mut().zip(&w) {
                *xb -= dir * delta * *wi;
            }
        }

        match blocking {
            None => {
                // bound flip: the entering variable runs to its other bound
                self.state[q] = match self.state[q] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    other => other, // free variable cannot flip; unreachable
                };
            }
            Some(r) => {
                let leaving = self.basic[r];
                let rate = -dir * w[r];
                self.state[leaving] = if rate < S::zero() {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let enter_val = nb_value(self.state[q], self.lower[q], self.upper[q]) + dir * delta;
                self.state[q] = VarState::Basic(r);
                self.basic[r] = q;
                self.x_basic[r] = enter_val;
                self.etas.push(Eta { row: r, col: w });
                if self.etas.len() >= REFACTOR_EVERY {
                    self.refactorize();
                }
            }
        }
    }

    fn extract_primal(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.n_struct];
        for (j, xj) in x.iter_mut().enumerate() {
            let scaled = match self.state[j] {
                VarState::Basic(_) => continue,
                s => nb_value(s, self.lower[j], self.upper[j]),
            };
            *xj = scaled * self.col_scale[j];
        }
        for (pos, &j) in self.basic.iter().enumerate() {
            if j < self.n_struct {
                x[j] = self.x_basic[pos] * self.col_scale[j];
            }
        }
        x
    }

    fn extract_duals(&self) -> Vec<S> {
        let y = self.btran_costs();
        y.iter()
            .zip(&self.row_scale)
            .map(|(yi, ri)| *yi * *ri)
            .collect()
    }

    /// Independent feasibility audit on the original, unscaled problem.
    /// A violation here would mean the solver lied about optimality.
    fn audit_residuals(&self, lp: &LinearProgram<S>, x: &[S]) {
        let act = lp.row_activity(x);
        let mut absdot = vec![S::zero(); lp.num_rows()];
        for &(r, c, v) in &lp.entries {
            absdot[r] += v.abs() * x[c].abs();
        }
        for (i, row) in lp.rows.iter().enumerate() {
            let viol = match row.kind {
                RowKind::Eq => (act[i] - row.rhs).abs(),
                RowKind::Le => (act[i] - row.rhs).max(S::zero()),
            };
            let tol = self.opts.feas_tol * (S::one() + row.rhs.abs() + absdot[i]);
            assert!(
                viol <= tol,
                "row {} ({}) residual {} exceeds tolerance {}",
                i,
                row.name,
                viol,
                tol
            );
        }
    }
}

fn nb_value<S: Scalar>(state: VarState, lower: S, upper: S) -> S {
    match state {
        VarState::AtLower => lower,
        VarState::AtUpper => upper,
        VarState::FreeAtZero => S::zero(),
        VarState::Basic(_) => unreachable!("nonbasic value of a basic variable"),
    }
}

/// One geometric-mean equilibration pass. With `rowwise` the row scales are
/// updated from the column-scaled entries, otherwise vice versa.
fn geometric_pass<S: Scalar>(
    entries: &[(usize, usize, S)],
    other: &[S],
    target: &mut [S],
    rowwise: bool,
) {
    let mut lo = vec![S::infinity(); target.len()];
    let mut hi = vec![S::zero(); target.len()];
    for &(c, r, v) in entries {
        let (t, o) = if rowwise { (r, c) } else { (c, r) };
        let mag = (v * other[o]).abs();
        if mag > S::zero() {
            lo[t] = lo[t].min(mag);
            hi[t] = hi[t].max(mag);
        }
    }
    for (t, scale) in target.iter_mut().enumerate() {
        if hi[t] > S::zero() {
            *scale = S::one() / (lo[t] * hi[t]).sqrt();
        }
    }
}
