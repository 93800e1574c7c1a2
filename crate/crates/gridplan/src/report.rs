//! Result extraction: investment tables, production/consumption stacks,
//! storage levels and the objective cost breakdown, plus CSV/JSON export.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use thiserror::Error;

use crate::formulation::{UnitClass, VariableIndex};
use crate::model::{ScenarioConfig, StorageKind, SystemModel};
use crate::real::Real;
use crate::text::fmt_sig9;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("window {start}..{end} outside horizon {horizon}")]
    WindowOutOfRange {
        start: usize,
        end: usize,
        horizon: usize,
    },
    #[error("no node belongs to country {0:?}")]
    UnknownCountry(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Recomputes the five objective terms from variable values and input
/// costs: investment annuities, thermal, storage and renewable operation,
/// and shedding. Their sum must reproduce the solver objective.
pub fn objective_terms<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
    index: &VariableIndex,
    values: &[S],
) -> [S; 5] {
    let mut terms = [S::zero(); 5];
    for cand in &index.candidates {
        let (alpha, inv, capacity) = match cand.class {
            UnitClass::Thermal => {
                let u = &system.thermal_units[index.thermal_order[cand.order_pos]];
                (u.annuity_alpha, u.inv_cost_annual, u.p_max)
            }
            UnitClass::Storage => {
                let u = &system.storage_units[index.storage_order[cand.order_pos]];
                (u.annuity_alpha, u.inv_cost_annual, u.p_discharge_max)
            }
            UnitClass::Renewable => {
                let u = &system.renewable_units[index.renewable_order[cand.order_pos]];
                (u.annuity_alpha, u.inv_cost_annual, u.capacity)
            }
        };
        terms[0] += alpha * inv * capacity * values[cand.col];
    }
    for (jo, &j) in index.thermal_order.iter().enumerate() {
        let marginal = system.thermal_units[j].marginal_cost();
        for t in 0..index.horizon {
            terms[1] += marginal * values[index.thermal_p(jo, t)];
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let voc = system.storage_units[k].cost_voc;
        for t in 0..index.horizon {
            terms[2] += voc * values[index.storage_discharge(ko, t)];
        }
    }
    for (ro, &r) in index.renewable_order.iter().enumerate() {
        let voc = system.renewable_units[r].cost_voc;
        for t in 0..index.horizon {
            terms[3] += voc * values[index.renewable_p(ro, t)];
        }
    }
    for no in 0..index.node_order.len() {
        for t in 0..index.horizon {
            terms[4] += config.cost_load_shed * values[index.shed(no, t)];
        }
    }
    terms
}

/// New capacity per technology token: build fraction times unit size,
/// candidates only.
pub fn investments_table<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    values: &[S],
) -> BTreeMap<String, S> {
    let mut out: BTreeMap<String, S> = BTreeMap::new();
    for cand in &index.candidates {
        let (token, capacity) = match cand.class {
            UnitClass::Thermal => {
                let u = &system.thermal_units[index.thermal_order[cand.order_pos]];
                (u.technology.token(), u.p_max)
            }
            UnitClass::Storage => {
                let u = &system.storage_units[index.storage_order[cand.order_pos]];
                (u.kind.token(), u.p_discharge_max)
            }
            UnitClass::Renewable => {
                let u = &system.renewable_units[index.renewable_order[cand.order_pos]];
                (u.technology.token(), u.capacity)
            }
        };
        // clamp solver dust so reported capacity is never negative
        *out.entry(token.to_string()).or_insert_with(S::zero) +=
            (values[cand.col] * capacity).max(S::zero());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Hourly,
    Daily,
    Weekly,
}

impl Aggregation {
    pub fn period_hours(self) -> usize {
        match self {
            Aggregation::Hourly => 1,
            Aggregation::Daily => 24,
            Aggregation::Weekly => 168,
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "hourly" => Aggregation::Hourly,
            "daily" => Aggregation::Daily,
            "weekly" => Aggregation::Weekly,
            _ => return None,
        })
    }
}

/// Production and consumption per category and period. In every period the
/// two sides balance: supply equals demand plus the consumption-side
/// variables.
#[derive(Debug, Clone)]
pub struct DispatchStack<S = f64> {
    pub aggregation: Aggregation,
    pub window: Range<usize>,
    pub periods: usize,
    pub production: BTreeMap<String, Vec<S>>,
    pub consumption: BTreeMap<String, Vec<S>>,
}

impl<S: Real> DispatchStack<S> {
    pub fn production_total(&self, period: usize) -> S {
        self.production
            .values()
            .map(|series| series[period])
            .sum()
    }

    pub fn consumption_total(&self, period: usize) -> S {
        self.consumption
            .values()
            .map(|series| series[period])
            .sum()
    }

    /// Net shifted energy per period (up minus down). The gross categories
    /// stay in the stack because simultaneous up and down shifting is
    /// allowed; over any full day the net is zero.
    pub fn net_shift(&self, period: usize) -> S {
        let up = self
            .consumption
            .get("shift_up")
            .map_or(S::zero(), |s| s[period]);
        let down = self
            .production
            .get("shift_down")
            .map_or(S::zero(), |s| s[period]);
        up - down
    }
}

/// Aggregates the dispatch of one country (or the whole system) over a
/// window. Periods are full blocks from the window start; a partial tail is
/// dropped for daily/weekly aggregation. Cross-border flows into the
/// selected country count as imports, outbound as exports; exogenous
/// injections join the same categories by sign.
pub fn dispatch_stack<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    values: &[S],
    aggregation: Aggregation,
    window: Range<usize>,
    country: Option<&str>,
) -> Result<DispatchStack<S>, ReportError> {
    if window.start >= window.end || window.end > index.horizon {
        return Err(ReportError::WindowOutOfRange {
            start: window.start,
            end: window.end,
            horizon: index.horizon,
        });
    }
    if let Some(c) = country {
        if !system.nodes.iter().any(|n| n.country == c) {
            return Err(ReportError::UnknownCountry(c.to_string()));
        }
    }
    let len = aggregation.period_hours();
    let periods = (window.end - window.start) / len;

    let mut production: BTreeMap<String, Vec<S>> = BTreeMap::new();
    let mut consumption: BTreeMap<String, Vec<S>> = BTreeMap::new();
    let prod = |cat: &str, period: usize, v: S, map: &mut BTreeMap<String, Vec<S>>| {
        map.entry(cat.to_string())
            .or_insert_with(|| vec![S::zero(); periods])[period] += v;
    };

    let in_region = |node_id: &str| -> bool {
        match country {
            None => true,
            Some(c) => {
                let n = system.node_index(node_id).expect("validated reference");
                system.nodes[n].country == c
            }
        }
    };
    let node_pos = |node_id: &str| -> usize {
        let n = system.node_index(node_id).expect("validated reference");
        index.node_order.iter().position(|&x| x == n).unwrap()
    };

    for t in window.clone() {
        let period = (t - window.start) / len;
        if period >= periods {
            break; // partial tail
        }
        for (no, &n) in index.node_order.iter().enumerate() {
            let node = &system.nodes[n];
            if !in_region(&node.id) {
                continue;
            }
            prod("demand", period, node.demand.total_at(t), &mut consumption);
            prod("shed", period, values[index.shed(no, t)], &mut production);
            prod(
                "shift_down",
                period,
                values[index.emob_down(no, t)] + values[index.other_down(no, t)],
                &mut production,
            );
            prod(
                "shift_up",
                period,
                values[index.emob_up(no, t)] + values[index.other_up(no, t)],
                &mut consumption,
            );
            if let Some(exo) = &node.exogenous_injection {
                if exo[t] >= S::zero() {
                    prod("imports", period, exo[t], &mut production);
                } else {
                    prod("exports", period, -exo[t], &mut consumption);
                }
            }
        }
        for (jo, &j) in index.thermal_order.iter().enumerate() {
            let unit = &system.thermal_units[j];
            if in_region(&unit.node) {
                prod(
                    unit.technology.token(),
                    period,
                    values[index.thermal_p(jo, t)],
                    &mut production,
                );
            }
        }
        for (ro, &r) in index.renewable_order.iter().enumerate() {
            let unit = &system.renewable_units[r];
            if in_region(&unit.node) {
                prod(
                    unit.technology.token(),
                    period,
                    values[index.renewable_p(ro, t)],
                    &mut production,
                );
            }
        }
        for (ko, &k) in index.storage_order.iter().enumerate() {
            let unit = &system.storage_units[k];
            if in_region(&unit.node) {
                prod(
                    unit.kind.token(),
                    period,
                    values[index.storage_discharge(ko, t)],
                    &mut production,
                );
                if unit.kind != StorageKind::Dam {
                    prod(
                        &format!("{}_charge", unit.kind.token()),
                        period,
                        values[index.storage_charge(ko, t)],
                        &mut consumption,
                    );
                }
            }
        }
        if country.is_some() {
            for line in &system.lines {
                let from_in = in_region(&line.from_node);
                let to_in = in_region(&line.to_node);
                if from_in == to_in {
                    continue; // internal or fully external
                }
                let flow = line.susceptance_b
                    * (values[index.theta(node_pos(&line.from_node), t)]
                        - values[index.theta(node_pos(&line.to_node), t)]);
                // flow is oriented from -> to
                let inbound = if to_in { flow } else { -flow };
                if inbound >= S::zero() {
                    prod("imports", period, inbound, &mut production);
                } else {
                    prod("exports", period, -inbound, &mut consumption);
                }
            }
        }
    }

    Ok(DispatchStack {
        aggregation,
        window,
        periods,
        production,
        consumption,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleRate {
    EndOfMonth,
    Hourly,
}

impl SampleRate {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "end_of_month" => SampleRate::EndOfMonth,
            "hourly" => SampleRate::Hourly,
            _ => return None,
        })
    }
}

/// Total state of charge over all units of one kind, either hourly (MWh) or
/// sampled at the end of each 730-hour block (TWh), with a final sample for
/// a partial last block.
pub fn storage_levels<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    values: &[S],
    kind: StorageKind,
    sample: SampleRate,
) -> Vec<S> {
    let horizon = index.horizon;
    let mut hourly = vec![S::zero(); horizon];
    for (ko, &k) in index.storage_order.iter().enumerate() {
        if system.storage_units[k].kind == kind {
            for (t, total) in hourly.iter_mut().enumerate() {
                *total += values[index.storage_soc(ko, t)];
            }
        }
    }
    match sample {
        SampleRate::Hourly => hourly,
        SampleRate::EndOfMonth => {
            const MONTH: usize = 730;
            let to_twh = S::from_f64_lossy(1e-6);
            let mut out = Vec::new();
            let mut t = MONTH - 1;
            while t < horizon {
                out.push(hourly[t] * to_twh);
                t += MONTH;
            }
            if !horizon.is_multiple_of(MONTH) {
                out.push(hourly[horizon - 1] * to_twh);
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// tabular export

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
}

/// A rectangular, column-ordered table ready for emission.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl EmitFormat {
    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "csv" => EmitFormat::Csv,
            "json" => EmitFormat::Json,
            _ => return None,
        })
    }
}

/// Writes a table with deterministic column order; numbers carry nine
/// significant digits, so re-reading reproduces them bit-exactly at that
/// precision.
pub fn emit(table: &Table, path: impl AsRef<Path>, format: EmitFormat) -> Result<(), ReportError> {
    let mut file = std::fs::File::create(path)?;
    let text = render(table, format);
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// See [`emit`]; returns the rendered text instead of writing a file.
pub fn render(table: &Table, format: EmitFormat) -> String {
    match format {
        EmitFormat::Csv => {
            let mut out = table.columns.join(",");
            out.push('\n');
            for row in &table.rows {
                let line: Vec<String> = row
                    .iter()
                    .map(|cell| match cell {
                        Cell::Text(s) => s.clone(),
                        Cell::Num(v) => fmt_sig9(*v),
                    })
                    .collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            out
        }
        EmitFormat::Json => {
            let rows: Vec<Vec<serde_json::Value>> = table
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cell| match cell {
                            Cell::Text(s) => serde_json::Value::String(s.clone()),
                            Cell::Num(v) => {
                                let rounded: f64 = fmt_sig9(*v).parse().unwrap_or(f64::NAN);
                                serde_json::Number::from_f64(rounded)
                                    .map(serde_json::Value::Number)
                                    .unwrap_or(serde_json::Value::Null)
                            }
                        })
                        .collect()
                })
                .collect();
            let doc = serde_json::json!({
                "table": table.name,
                "columns": table.columns,
                "rows": rows,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
            text.push('\n');
            text
        }
    }
}

pub fn investments_to_table<S: Real>(investments: &BTreeMap<String, S>) -> Table {
    Table {
        name: "investments".into(),
        columns: vec!["technology".into(), "built_mw".into()],
        rows: investments
            .iter()
            .map(|(tech, mw)| {
                vec![
                    Cell::Text(tech.clone()),
                    Cell::Num(mw.to_f64().unwrap_or(f64::NAN)),
                ]
            })
            .collect(),
    }
}

pub fn stack_to_table<S: Real>(stack: &DispatchStack<S>) -> Table {
    let mut columns = vec!["period".to_string()];
    columns.extend(stack.production.keys().map(|c| format!("prod:{c}")));
    columns.extend(stack.consumption.keys().map(|c| format!("cons:{c}")));
    let mut rows = Vec::with_capacity(stack.periods);
    for p in 0..stack.periods {
        let mut row = vec![Cell::Num(p as f64)];
        for series in stack.production.values() {
            row.push(Cell::Num(series[p].to_f64().unwrap_or(f64::NAN)));
        }
        for series in stack.consumption.values() {
            row.push(Cell::Num(series[p].to_f64().unwrap_or(f64::NAN)));
        }
        rows.push(row);
    }
    Table {
        name: "dispatch_stack".into(),
        columns,
        rows,
    }
}

pub fn levels_to_table<S: Real>(kind: StorageKind, levels: &[S], sample: SampleRate) -> Table {
    let unit = match sample {
        SampleRate::EndOfMonth => "twh",
        SampleRate::Hourly => "mwh",
    };
    Table {
        name: "storage_levels".into(),
        columns: vec!["sample".into(), format!("{}_{unit}", kind.token())],
        rows: levels
            .iter()
            .enumerate()
            .map(|(i, v)| {
                vec![
                    Cell::Num(i as f64),
                    Cell::Num(v.to_f64().unwrap_or(f64::NAN)),
                ]
            })
            .collect(),
    }
}

pub fn breakdown_to_table<S: Real>(terms: &[S; 5]) -> Table {
    let names = [
        "investment",
        "thermal_operation",
        "storage_operation",
        "renewable_operation",
        "load_shedding",
    ];
    Table {
        name: "objective_breakdown".into(),
        columns: vec!["term".into(), "eur".into()],
        rows: names
            .iter()
            .zip(terms)
            .map(|(name, value)| {
                vec![
                    Cell::Text(name.to_string()),
                    Cell::Num(value.to_f64().unwrap_or(f64::NAN)),
                ]
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::build_lp;
    use crate::model::testutil::{battery, single_node_system, thermal};
    use crate::model::{
        BusNode, DemandProfile, ScenarioConfig, ShiftSpec, StorageUnit, SystemModel,
        ThermalTech, TransmissionLine,
    };
    use linprog::{solve, SolveOptions, Status};

    fn cfg(horizon: usize) -> ScenarioConfig<f64> {
        ScenarioConfig::neutral("report-test", horizon)
    }

    fn solved(system: &SystemModel<f64>) -> (Vec<f64>, crate::formulation::VariableIndex, f64) {
        let (lp, index) = build_lp(system, &cfg(system.horizon));
        let sol = solve(&lp, &SolveOptions::default());
        assert_eq!(sol.status, Status::Optimal);
        (sol.values, index, sol.objective)
    }

    #[test]
    fn breakdown_matches_objective_and_isolates_shedding() {
        // demand 20 against 15 MW of capacity: 5 MWh shed per hour
        let mut system = single_node_system(vec![20.0; 2]);
        system.thermal_units.push(thermal("gen", "n1", 15.0, 10.0));
        let (values, index, objective) = solved(&system);
        let terms = objective_terms(&system, &cfg(2), &index, &values);
        assert_eq!(terms[0], 0.0, "no candidates, no investment cost");
        assert!((terms[4] - 2.0 * 5.0 * 10_000.0).abs() < 1e-6);
        let total: f64 = terms.iter().sum();
        assert!((total - objective).abs() <= 1e-6 * (1.0 + objective.abs()));
    }

    #[test]
    fn investments_from_build_fractions() {
        let mut system = single_node_system(vec![0.0; 2]);
        let mut bio = thermal("bio", "n1", 240.0, 1.0);
        bio.technology = ThermalTech::Biomass;
        bio.is_candidate = true;
        bio.inv_cost_annual = 1.0;
        system.thermal_units.push(bio);
        let mut gas = thermal("gas", "n1", 500.0, 1.0);
        gas.technology = ThermalTech::GasCcs;
        gas.is_candidate = true;
        gas.inv_cost_annual = 1.0;
        system.thermal_units.push(gas);
        let (_, index) = build_lp(&system, &cfg(2));
        let mut values = vec![0.0; index.num_cols];
        values[index.thermal_invest(0).unwrap()] = 1.0; // bio sorts first
        values[index.thermal_invest(1).unwrap()] = 0.51;
        let table = investments_table(&system, &index, &values);
        assert_eq!(table["biomass"], 240.0);
        assert_eq!(table["gas_ccs"], 255.0);
    }

    #[test]
    fn no_candidates_means_empty_investments() {
        let mut system = single_node_system(vec![5.0; 2]);
        system.thermal_units.push(thermal("gen", "n1", 10.0, 1.0));
        let (values, index, _) = solved(&system);
        assert!(investments_table(&system, &index, &values).is_empty());
    }

    #[test]
    fn stack_of_zero_demand_system_is_all_zero() {
        let system = single_node_system(vec![0.0; 4]);
        let (values, index, _) = solved(&system);
        let stack =
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..4, None).unwrap();
        for p in 0..stack.periods {
            assert_eq!(stack.production_total(p), 0.0);
            assert_eq!(stack.consumption_total(p), 0.0);
        }
    }

    #[test]
    fn single_node_production_tracks_demand() {
        let demand = vec![3.0, 7.0, 5.0, 1.0];
        let mut system = single_node_system(demand.clone());
        system.thermal_units.push(thermal("gen", "n1", 10.0, 2.0));
        let (values, index, _) = solved(&system);
        let stack =
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..4, None).unwrap();
        for (t, want) in demand.iter().enumerate() {
            assert!((stack.production["other"][t] - want).abs() < 1e-7);
            assert!((stack.consumption["demand"][t] - want).abs() < 1e-7);
        }
    }

    #[test]
    fn stack_balances_and_aggregations_are_consistent() {
        let mut base = vec![6.0; 48];
        base[20] = 14.0;
        let mut system = single_node_system(base);
        system.thermal_units.push(thermal("gen", "n1", 20.0, 3.0));
        system.storage_units.push(battery("b", "n1", 5.0, 20.0, 0.9, 48));
        let (values, index, _) = solved(&system);
        let hourly =
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..48, None).unwrap();
        let daily =
            dispatch_stack(&system, &index, &values, Aggregation::Daily, 0..48, None).unwrap();
        for p in 0..hourly.periods {
            let gap = (hourly.production_total(p) - hourly.consumption_total(p)).abs();
            assert!(gap < 1e-6, "hour {p} imbalance {gap}");
        }
        for d in 0..daily.periods {
            let from_hours: f64 = (d * 24..(d + 1) * 24)
                .map(|t| hourly.production_total(t))
                .sum();
            assert!((daily.production_total(d) - from_hours).abs() < 1e-6);
        }
    }

    #[test]
    fn net_shift_cancels_over_a_day() {
        let mut base = vec![0.0; 24];
        base[12] = 10.0;
        let mut system = single_node_system(base);
        system.nodes[0].demand.e_mobility = vec![10.0; 24];
        system.nodes[0].shift = ShiftSpec {
            e_hr_max: 5.0,
            e_day_max: 10.0,
            l_hr_max: 0.0,
            l_day_max: 0.0,
        };
        system.thermal_units.push(thermal("gen", "n1", 15.0, 10.0));
        let (values, index, _) = solved(&system);
        let hourly =
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..24, None).unwrap();
        let gross: f64 = (0..24)
            .map(|t| hourly.production.get("shift_down").map_or(0.0, |s| s[t]))
            .sum();
        assert!(gross > 1.0, "the peak forces real shifting");
        let daily =
            dispatch_stack(&system, &index, &values, Aggregation::Daily, 0..24, None).unwrap();
        assert!(daily.net_shift(0).abs() < 1e-6, "{}", daily.net_shift(0));
    }

    #[test]
    fn importer_stack_reports_cross_border_inflow() {
        let mut system = single_node_system(vec![10.0; 2]);
        system.nodes[0].country = "CH".into();
        system.nodes.push(BusNode {
            id: "de1".into(),
            country: "DE".into(),
            is_slack: false,
            demand: DemandProfile::zeros(2),
            shift: ShiftSpec::zero(),
            exogenous_injection: None,
        });
        system.lines.push(TransmissionLine {
            id: "x".into(),
            from_node: "de1".into(),
            to_node: "n1".into(),
            susceptance_b: 100.0,
            flow_limit_pmax: 50.0,
            cross_border: true,
        });
        system.thermal_units.push(thermal("de_gen", "de1", 30.0, 1.0));
        let (values, index, _) = solved(&system);
        let stack = dispatch_stack(
            &system,
            &index,
            &values,
            Aggregation::Hourly,
            0..2,
            Some("CH"),
        )
        .unwrap();
        for t in 0..2 {
            assert!((stack.production["imports"][t] - 10.0).abs() < 1e-6);
            let gap = (stack.production_total(t) - stack.consumption_total(t)).abs();
            assert!(gap < 1e-6);
        }
        assert!(
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..2, Some("FR"))
                .is_err()
        );
        assert!(
            dispatch_stack(&system, &index, &values, Aggregation::Hourly, 0..99, None).is_err()
        );
    }

    #[test]
    fn idle_battery_holds_its_initial_level() {
        let mut system = single_node_system(vec![0.0; 48]);
        let mut b = battery("b", "n1", 5.0, 20.0, 1.0, 48);
        b.soc_initial = 5.0;
        system.storage_units.push(b);
        let (values, index, _) = solved(&system);
        let hourly = storage_levels(&system, &index, &values, StorageKind::Battery, SampleRate::Hourly);
        assert!(hourly.iter().all(|v| (v - 5.0).abs() < 1e-7), "{hourly:?}");
        let monthly =
            storage_levels(&system, &index, &values, StorageKind::Battery, SampleRate::EndOfMonth);
        assert_eq!(monthly.len(), 1, "short horizon yields one final sample");
        assert!((monthly[0] - 5.0e-6).abs() < 1e-12, "TWh conversion");
    }

    #[test]
    fn dam_with_pure_inflow_ramps_linearly() {
        let mut system = single_node_system(vec![0.0; 6]);
        system.storage_units.push(StorageUnit {
            id: "dam".into(),
            node: "n1".into(),
            kind: StorageKind::Dam,
            p_charge_max: 0.0,
            p_discharge_max: 10.0,
            energy_max: 100.0,
            eta_charge: 1.0,
            eta_discharge: 1.0,
            soc_initial: 0.0,
            soc_final_min: 12.0,
            inflow: vec![2.0; 6],
            cost_voc: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: crate::model::ReserveEligibility::none(),
        });
        let (values, index, _) = solved(&system);
        let levels = storage_levels(&system, &index, &values, StorageKind::Dam, SampleRate::Hourly);
        for (t, level) in levels.iter().enumerate() {
            assert!((level - 2.0 * (t + 1) as f64).abs() < 1e-7);
        }
    }

    #[test]
    fn binding_final_level_shows_in_sample_and_dual() {
        // the end-of-horizon requirement forces the dam to keep water that
        // dispatching would otherwise sell
        let mut system = single_node_system(vec![8.0; 48]);
        system.thermal_units.push(thermal("gen", "n1", 10.0, 50.0));
        system.storage_units.push(StorageUnit {
            id: "dam".into(),
            node: "n1".into(),
            kind: StorageKind::Dam,
            p_charge_max: 0.0,
            p_discharge_max: 10.0,
            energy_max: 500.0,
            eta_charge: 1.0,
            eta_discharge: 1.0,
            soc_initial: 100.0,
            soc_final_min: 80.0,
            inflow: vec![1.0; 48],
            cost_voc: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: crate::model::ReserveEligibility::none(),
        });
        let (lp, index) = build_lp(&system, &cfg(48));
        let sol = solve(&lp, &SolveOptions::default());
        assert_eq!(sol.status, Status::Optimal);
        let levels =
            storage_levels(&system, &index, &sol.values, StorageKind::Dam, SampleRate::EndOfMonth);
        assert!((levels.last().unwrap() - 80.0e-6).abs() < 1e-10, "{levels:?}");
        let row = lp.rows.iter().position(|r| r.name == "sfin_0").unwrap();
        let dual = sol.duals.as_ref().unwrap()[row];
        assert!(
            -dual > 1e-9,
            "requirement shadow price should be positive, dual {dual}"
        );
    }

    #[test]
    fn empty_table_renders_header_only_csv() {
        let table = investments_to_table::<f64>(&BTreeMap::new());
        assert_eq!(render(&table, EmitFormat::Csv), "technology,built_mw\n");
    }

    #[test]
    fn weekly_stack_row_count_is_floor_of_weeks() {
        let system = single_node_system(vec![0.0; 400]);
        let (_, index) = build_lp(&system, &cfg(400));
        let values = vec![0.0; index.num_cols];
        let stack =
            dispatch_stack(&system, &index, &values, Aggregation::Weekly, 0..400, None).unwrap();
        assert_eq!(stack.periods, 400 / 168);
        let table = stack_to_table(&stack);
        assert_eq!(table.rows.len(), 2);
    }

    #[test]
    fn emitted_numbers_survive_reparsing() {
        let mut investments = BTreeMap::new();
        investments.insert("pv".to_string(), 8328.767123287671f64);
        investments.insert("wind".to_string(), 103.0);
        let table = investments_to_table(&investments);
        let csv = render(&table, EmitFormat::Csv);
        assert!(csv.contains("pv,8328.76712\n"), "{csv}");
        assert!(csv.contains("wind,103\n"), "{csv}");
        let json = render(&table, EmitFormat::Json);
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["columns"][0], "technology");
        assert_eq!(doc["rows"][0][1], 8328.76712);
    }
}
