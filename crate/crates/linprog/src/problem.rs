use crate::scalar::Scalar;

/// Relation between a row's left-hand side and its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// a'x = rhs
    Eq,
    /// a'x <= rhs
    Le,
}

/// Handle to a column of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Col(pub usize);

/// Handle to a row of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Row(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct RowDef<S> {
    pub kind: RowKind,
    pub rhs: S,
    pub name: String,
}

/// A sparse linear program: minimize c'x subject to equality and
/// upper-bounded rows plus per-column bounds.
///
/// Coefficients are stored as (row, col, value) triplets; duplicate entries
/// for the same cell are summed when the problem is solved or exported.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S = f64> {
    pub name: String,
    pub objective: Vec<S>,
    pub objective_offset: S,
    pub col_lower: Vec<S>,
    pub col_upper: Vec<S>,
    pub col_names: Vec<String>,
    pub rows: Vec<RowDef<S>>,
    pub entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            objective: Vec::new(),
            objective_offset: S::zero(),
            col_lower: Vec::new(),
            col_upper: Vec::new(),
            col_names: Vec::new(),
            rows: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a column with the given objective coefficient and bounds.
    pub fn add_col(&mut self, name: impl Into<String>, cost: S, lower: S, upper: S) -> Col {
        self.objective.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.col_names.push(name.into());
        Col(self.num_cols() - 1)
    }

    /// Adds an empty row; populate it with [`LinearProgram::put`].
    pub fn add_row(&mut self, name: impl Into<String>, kind: RowKind, rhs: S) -> Row {
        self.rows.push(RowDef {
            kind,
            rhs,
            name: name.into(),
        });
        Row(self.num_rows() - 1)
    }

    /// Sets (accumulates) a coefficient. Zero coefficients are dropped.
    pub fn put(&mut self, row: Row, col: Col, value: S) {
        debug_assert!(row.0 < self.num_rows() && col.0 < self.num_cols());
        if value != S::zero() {
            self.entries.push((row.0, col.0, value));
        }
    }

    /// Pins a column to a single value (used e.g. to freeze investment
    /// decisions for an operations-only re-solve).
    pub fn fix_col(&mut self, col: Col, value: S) {
        self.col_lower[col.0] = value;
        self.col_upper[col.0] = value;
    }

    /// Structural validity: entry indices in range and lb <= ub everywhere.
    pub fn validate(&self) -> Result<(), String> {
        for (r, c, _) in &self.entries {
            if *r >= self.num_rows() {
                return Err(format!("entry references row {r} of {}", self.num_rows()));
            }
            if *c >= self.num_cols() {
                return Err(format!("entry references col {c} of {}", self.num_cols()));
            }
        }
        for j in 0..self.num_cols() {
            if !(self.col_lower[j] <= self.col_upper[j]) {
                return Err(format!(
                    "column {} ({}) has lower {} > upper {}",
                    j, self.col_names[j], self.col_lower[j], self.col_upper[j]
                ));
            }
        }
        Ok(())
    }

    /// Dense per-row activity a_i'x for a candidate point.
    pub fn row_activity(&self, x: &[S]) -> Vec<S> {
        let mut act = vec![S::zero(); self.num_rows()];
        for &(r, c, v) in &self.entries {
            act[r] += v * x[c];
        }
        act
    }

    /// Objective value c'x (+ offset) for a candidate point.
    pub fn objective_value(&self, x: &[S]) -> S {
        let mut obj = self.objective_offset;
        for (c, xj) in self.objective.iter().zip(x) {
            obj += *c * *xj;
        }
        obj
    }

    /// Independent feasibility pass: largest violation of any row or bound.
    ///
    /// Works directly off the stored triplets so it shares no state with the
    /// solver's internal (scaled, factorized) representation.
    pub fn max_violation(&self, x: &[S]) -> S {
        let act = self.row_activity(x);
        let mut worst = S::zero();
        for (row, a) in self.rows.iter().zip(&act) {
            let v = match row.kind {
                RowKind::Eq => (*a - row.rhs).abs(),
                RowKind::Le => (*a - row.rhs).max(S::zero()),
            };
            worst = worst.max(v);
        }
        for j in 0..self.num_cols() {
            worst = worst.max(self.col_lower[j] - x[j]);
            worst = worst.max(x[j] - self.col_upper[j]);
        }
        worst
    }
}
