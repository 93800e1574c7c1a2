//! MPS interchange: ROWS / COLUMNS / RHS / RANGES / BOUNDS sections.
//!
//! The fixed format mangles row and column names to `R#######` / `C#######`
//! (8 characters); the free format keeps the problem's own name tags.
//! Values are written with shortest round-trip precision, so an
//! export/import cycle reproduces coefficients bit-exactly. Parsing is
//! whitespace-tokenizing for both formats.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::problem::{LinearProgram, RowKind};
use crate::scalar::Scalar;

/// Output flavor for [`write_mps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpsFormat {
    /// Mangled 8-character names, classic section layout.
    Fixed,
    /// Original name tags, whitespace separated.
    Free,
}

#[derive(Debug)]
pub enum MpsError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
}

impl std::fmt::Display for MpsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MpsError::Io(e) => write!(f, "i/o error: {e}"),
            MpsError::Parse { line, message } => write!(f, "mps line {line}: {message}"),
        }
    }
}

impl std::error::Error for MpsError {}

impl From<std::io::Error> for MpsError {
    fn from(e: std::io::Error) -> Self {
        MpsError::Io(e)
    }
}

const OBJ_NAME: &str = "COST";

fn fixed_row_name(i: usize) -> String {
    format!("R{i:07}")
}

fn fixed_col_name(j: usize) -> String {
    format!("C{j:07}")
}

/// Renders the program as MPS text.
pub fn format_mps<S: Scalar>(lp: &LinearProgram<S>, format: MpsFormat) -> String {
    let row_name = |i: usize| match format {
        MpsFormat::Fixed => fixed_row_name(i),
        MpsFormat::Free => lp.rows[i].name.clone(),
    };
    let col_name = |j: usize| match format {
        MpsFormat::Fixed => fixed_col_name(j),
        MpsFormat::Free => lp.col_names[j].clone(),
    };

    let mut out = String::new();
    let name = if lp.name.is_empty() { "LP" } else { &lp.name };
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_NAME}");
    for i in 0..lp.num_rows() {
        let tag = match lp.rows[i].kind {
            RowKind::Eq => 'E',
            RowKind::Le => 'L',
        };
        let _ = writeln!(out, " {}  {}", tag, row_name(i));
    }

    // gather per-column entries (duplicates merged) in row order
    let mut per_col: Vec<Vec<(usize, S)>> = vec![Vec::new(); lp.num_cols()];
    {
        let mut sorted: Vec<(usize, usize, S)> =
            lp.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        sorted.sort_by_key(|a| (a.0, a.1));
        for (c, r, v) in sorted {
            match per_col[c].last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => per_col[c].push((r, v)),
            }
        }
    }

    out.push_str("COLUMNS\n");
    for j in 0..lp.num_cols() {
        let cname = col_name(j);
        if lp.objective[j] != S::zero() {
            let _ = writeln!(out, "    {:<8}  {:<8}  {}", cname, OBJ_NAME, lp.objective[j]);
        }
        for &(r, v) in &per_col[j] {
            if v != S::zero() {
                let _ = writeln!(out, "    {:<8}  {:<8}  {}", cname, row_name(r), v);
            }
        }
    }

    out.push_str("RHS\n");
    if lp.objective_offset != S::zero() {
        // convention: objective constant stored as negated RHS of the N row
        let _ = writeln!(
            out,
            "    RHS       {:<8}  {}",
            OBJ_NAME,
            -lp.objective_offset
        );
    }
    for i in 0..lp.num_rows() {
        if lp.rows[i].rhs != S::zero() {
            let _ = writeln!(out, "    RHS       {:<8}  {}", row_name(i), lp.rows[i].rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..lp.num_cols() {
        let lb = lp.col_lower[j];
        let ub = lp.col_upper[j];
        let cname = col_name(j);
        if lb == ub {
            let _ = writeln!(out, " FX BND       {:<8}  {}", cname, lb);
            continue;
        }
        match (lb.is_finite(), ub.is_finite()) {
            (true, true) => {
                if lb != S::zero() {
                    let _ = writeln!(out, " LO BND       {:<8}  {}", cname, lb);
                }
                let _ = writeln!(out, " UP BND       {:<8}  {}", cname, ub);
            }
            (true, false) => {
                if lb != S::zero() {
                    let _ = writeln!(out, " LO BND       {:<8}  {}", cname, lb);
                }
                // default [0, +inf) needs no record
            }
            (false, true) => {
                let _ = writeln!(out, " MI BND       {:<8}", cname);
                let _ = writeln!(out, " UP BND       {:<8}  {}", cname, ub);
            }
            (false, false) => {
                let _ = writeln!(out, " FR BND       {:<8}", cname);
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

/// Writes the program to a file; see [`format_mps`].
pub fn write_mps<S: Scalar>(
    lp: &LinearProgram<S>,
    path: impl AsRef<Path>,
    format: MpsFormat,
) -> Result<(), MpsError> {
    fs::write(path, format_mps(lp, format))?;
    Ok(())
}

/// Reads an MPS file produced by this module or by other tools.
pub fn read_mps<S: Scalar + FromStr>(path: impl AsRef<Path>) -> Result<LinearProgram<S>, MpsError> {
    parse_mps(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

/// Parses MPS text into a program.
pub fn parse_mps<S: Scalar + FromStr>(text: &str) -> Result<LinearProgram<S>, MpsError> {
    let mut lp = LinearProgram::new("");
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_ids: HashMap<String, usize> = HashMap::new();
    let mut col_ids: HashMap<String, usize> = HashMap::new();
    // ranges recorded and applied at the end (they split rows in two)
    let mut ranges: Vec<(usize, S)> = Vec::new();

    let err = |line: usize, message: String| MpsError::Parse { line, message };
    let parse_num = |line: usize, tok: &str| -> Result<S, MpsError> {
        tok.parse::<S>()
            .map_err(|_| err(line, format!("bad number {tok:?}")))
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let indented = raw.starts_with(' ') || raw.starts_with('\t');
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if !indented {
            match tokens[0] {
                "NAME" => {
                    lp.name = tokens.get(1).unwrap_or(&"").to_string();
                    continue;
                }
                "ROWS" => {
                    section = Section::Rows;
                    continue;
                }
                "COLUMNS" => {
                    section = Section::Columns;
                    continue;
                }
                "RHS" => {
                    section = Section::Rhs;
                    continue;
                }
                "RANGES" => {
                    section = Section::Ranges;
                    continue;
                }
                "BOUNDS" => {
                    section = Section::Bounds;
                    continue;
                }
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => return Err(err(line, format!("unknown section {other:?}"))),
            }
        }
        match section {
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(line, "expected <type> <name>".into()));
                }
                let name = tokens[1].to_string();
                match tokens[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(name);
                        }
                    }
                    "E" => {
                        row_ids.insert(name.clone(), lp.num_rows());
                        lp.add_row(name, RowKind::Eq, S::zero());
                    }
                    "L" => {
                        row_ids.insert(name.clone(), lp.num_rows());
                        lp.add_row(name, RowKind::Le, S::zero());
                    }
                    "G" => {
                        // a'x >= b stored as -a'x <= -b; negation tracked per row
                        row_ids.insert(name.clone(), lp.num_rows());
                        let r = lp.add_row(name, RowKind::Le, S::zero());
                        ranges.push((r.0, S::nan())); // marker, replaced below
                    }
                    other => return Err(err(line, format!("unknown row type {other:?}"))),
                }
            }
            Section::Columns => {
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(err(line, "expected <col> (<row> <value>)+".into()));
                }
                let cname = tokens[0];
                let col = *col_ids.entry(cname.to_string()).or_insert_with(|| {
                    lp.add_col(cname.to_string(), S::zero(), S::zero(), S::infinity())
                        .0
                });
                for pair in tokens[1..].chunks(2) {
                    let value = parse_num(line, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        lp.objective[col] = value;
                    } else {
                        let &row = row_ids
                            .get(pair[0])
                            .ok_or_else(|| err(line, format!("unknown row {:?}", pair[0])))?;
                        lp.entries.push((row, col, value));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(err(line, "expected <set> (<row> <value>)+".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let value = parse_num(line, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        lp.objective_offset = -value;
                    } else {
                        let &row = row_ids
                            .get(pair[0])
                            .ok_or_else(|| err(line, format!("unknown row {:?}", pair[0])))?;
                        lp.rows[row].rhs = value;
                    }
                }
            }
            Section::Ranges => {
                if tokens.len() < 3 || tokens.len().is_multiple_of(2) {
                    return Err(err(line, "expected <set> (<row> <value>)+".into()));
                }
                for pair in tokens[1..].chunks(2) {
                    let value = parse_num(line, pair[1])?;
                    let &row = row_ids
                        .get(pair[0])
                        .ok_or_else(|| err(line, format!("unknown row {:?}", pair[0])))?;
                    ranges.push((row, value));
                }
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(err(line, "expected <type> <set> <col> [value]".into()));
                }
                let &col = col_ids
                    .get(tokens[2])
                    .ok_or_else(|| err(line, format!("unknown column {:?}", tokens[2])))?;
                let value = if tokens.len() > 3 {
                    Some(parse_num(line, tokens[3])?)
                } else {
                    None
                };
                let need = |v: Option<S>| v.ok_or_else(|| err(line, "bound needs a value".into()));
                match tokens[0] {
                    "LO" => lp.col_lower[col] = need(value)?,
                    "UP" => {
                        let v = need(value)?;
                        lp.col_upper[col] = v;
                        // classic quirk: a negative upper bound on a column
                        // with the default lower of 0 frees the lower bound
                        if v < S::zero() && lp.col_lower[col] == S::zero() {
                            lp.col_lower[col] = S::neg_infinity();
                        }
                    }
                    "FX" => {
                        let v = need(value)?;
                        lp.col_lower[col] = v;
                        lp.col_upper[col] = v;
                    }
                    "FR" => {
                        lp.col_lower[col] = S::neg_infinity();
                        lp.col_upper[col] = S::infinity();
                    }
                    "MI" => lp.col_lower[col] = S::neg_infinity(),
                    "PL" => lp.col_upper[col] = S::infinity(),
                    other => {
                        return Err(err(line, format!("unsupported bound type {other:?}")))
                    }
                }
            }
            Section::None | Section::Done => {
                return Err(err(line, "data outside any section".into()))
            }
        }
    }
    if section != Section::Done {
        return Err(err(text.lines().count(), "missing ENDATA".into()));
    }

    apply_g_rows_and_ranges(&mut lp, ranges);
    Ok(lp)
}

/// Post-processing: G rows were recorded as Le rows plus a NaN marker and
/// must be negated; RANGES entries expand a row into a two-sided pair.
fn apply_g_rows_and_ranges<S: Scalar>(lp: &mut LinearProgram<S>, marks: Vec<(usize, S)>) {
    let mut negate: Vec<bool> = vec![false; lp.num_rows()];
    let mut real_ranges: Vec<(usize, S)> = Vec::new();
    for (row, v) in marks {
        if v.is_nan() {
            negate[row] = true;
        } else {
            real_ranges.push((row, v));
        }
    }
    if negate.iter().any(|&n| n) {
        for row in 0..lp.num_rows() {
            if negate[row] {
                lp.rows[row].rhs = -lp.rows[row].rhs;
            }
        }
        for entry in &mut lp.entries {
            if negate[entry.0] {
                entry.2 = -entry.2;
            }
        }
    }
    for (row, range) in real_ranges {
        // For an L row with rhs b and range r: b - |r| <= a'x <= b.
        // For an E row: b <= a'x <= b + |r| (r >= 0) or b - |r| <= a'x <= b.
        // G rows arrive here already negated into L form.
        let (low, high) = match lp.rows[row].kind {
            RowKind::Le => (lp.rows[row].rhs - range.abs(), lp.rows[row].rhs),
            RowKind::Eq => {
                if range >= S::zero() {
                    (lp.rows[row].rhs, lp.rows[row].rhs + range)
                } else {
                    (lp.rows[row].rhs - range.abs(), lp.rows[row].rhs)
                }
            }
        };
        lp.rows[row].kind = RowKind::Le;
        lp.rows[row].rhs = high;
        let name = format!("{}_lo", lp.rows[row].name);
        let extra = lp.add_row(name, RowKind::Le, -low);
        let mirrored: Vec<(usize, usize, S)> = lp
            .entries
            .iter()
            .filter(|e| e.0 == row)
            .map(|&(_, c, v)| (extra.0, c, -v))
            .collect();
        lp.entries.extend(mirrored);
    }
}
