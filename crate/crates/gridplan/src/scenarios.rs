//! Experiment execution: single scenario runs, comparison matrices against
//! a baseline, and parameter sweeps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{build_lp, VariableIndex};
use crate::ingest::apply_scenario;
use crate::model::{
    validate_system, ScenarioConfig, Solution, SolveStatus, SystemModel, Violation,
};
use crate::real::Real;
use crate::report;
use linprog::{solve, SolveOptions, Status};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario {scenario} ended {status}{}", completed_note(.completed))]
    NonOptimal {
        scenario: String,
        status: SolveStatus,
        /// Scenarios that had already finished when the run aborted.
        completed: Vec<String>,
    },
    #[error("invalid system: {0:?}")]
    InvalidSystem(Vec<Violation>),
    #[error("invalid configuration: {0:?}")]
    InvalidConfig(Vec<Violation>),
    #[error("{0}")]
    BadArgument(String),
}

fn completed_note(completed: &[String]) -> String {
    if completed.is_empty() {
        String::new()
    } else {
        format!(" (completed before abort: {})", completed.join(", "))
    }
}

/// One solved scenario with its headline metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real", deserialize = "S: Real"))]
pub struct ScenarioResult<S = f64> {
    pub config: ScenarioConfig<S>,
    pub solution: Solution<S>,
    /// New capacity per technology token, MW (candidates only).
    pub investments: BTreeMap<String, S>,
    /// Unserved energy per country, GWh over the horizon.
    pub load_shed_total: BTreeMap<String, S>,
    /// Percent change of the objective against the matrix baseline; absent
    /// for standalone runs.
    pub objective_delta_vs_baseline: Option<S>,
}

/// A scenario run keeping the transformed system and variable index around
/// for reporting.
#[derive(Debug, Clone)]
pub struct ScenarioRun<S = f64> {
    pub system: SystemModel<S>,
    pub index: VariableIndex,
    pub result: ScenarioResult<S>,
}

/// Applies the scenario, builds and solves the program, and extracts the
/// result metrics. Any non-optimal status is an error: comparison metrics
/// over partial solves would be meaningless.
pub fn run_scenario_full<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
) -> Result<ScenarioRun<S>, ScenarioError> {
    let config_violations = config.validate();
    if !config_violations.is_empty() {
        return Err(ScenarioError::InvalidConfig(config_violations));
    }
    let violations = validate_system(system);
    if !violations.is_empty() {
        return Err(ScenarioError::InvalidSystem(violations));
    }

    let applied = apply_scenario(system, config);
    let (lp, index) = build_lp(&applied, config);
    let raw = solve(&lp, &SolveOptions::default());
    if raw.status != Status::Optimal {
        return Err(ScenarioError::NonOptimal {
            scenario: config.name.clone(),
            status: raw.status.into(),
            completed: Vec::new(),
        });
    }

    let term_breakdown = report::objective_terms(&applied, config, &index, &raw.values);
    let solution = Solution {
        status: raw.status.into(),
        objective: raw.objective,
        term_breakdown,
        values: raw.values,
        duals: raw.duals,
    };
    let investments = report::investments_table(&applied, &index, &solution.values);
    let load_shed_total = shed_by_country(&applied, &index, &solution.values);
    Ok(ScenarioRun {
        system: applied,
        index,
        result: ScenarioResult {
            config: config.clone(),
            solution,
            investments,
            load_shed_total,
            objective_delta_vs_baseline: None,
        },
    })
}

/// See [`run_scenario_full`]; drops the run context.
pub fn run_scenario<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
) -> Result<ScenarioResult<S>, ScenarioError> {
    run_scenario_full(system, config).map(|run| run.result)
}

/// Unserved energy aggregated per country, in GWh.
fn shed_by_country<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    values: &[S],
) -> BTreeMap<String, S> {
    let mut out: BTreeMap<String, S> = BTreeMap::new();
    let gwh = S::from_f64_lossy(1e-3);
    for (no, &n) in index.node_order.iter().enumerate() {
        let node = &system.nodes[n];
        let mut total = S::zero();
        for t in 0..index.horizon {
            total += values[index.shed(no, t)];
        }
        // clamp solver dust below the shedding lower bound
        *out.entry(node.country.clone()).or_insert_with(S::zero) +=
            (total * gwh).max(S::zero());
    }
    out
}

/// Runs an ordered list of scenarios; the first is the baseline the percent
/// deltas are computed against.
pub fn run_matrix<S: Real>(
    system: &SystemModel<S>,
    configs: &[ScenarioConfig<S>],
) -> Result<Vec<ScenarioResult<S>>, ScenarioError> {
    if configs.is_empty() {
        return Err(ScenarioError::BadArgument(
            "matrix needs at least the baseline scenario".into(),
        ));
    }
    let mut results: Vec<ScenarioResult<S>> = Vec::with_capacity(configs.len());
    for config in configs {
        match run_scenario(system, config) {
            Ok(result) => results.push(result),
            Err(ScenarioError::NonOptimal {
                scenario, status, ..
            }) => {
                return Err(ScenarioError::NonOptimal {
                    scenario,
                    status,
                    completed: results.iter().map(|r| r.config.name.clone()).collect(),
                })
            }
            Err(other) => return Err(other),
        }
    }
    let baseline = results[0].solution.objective;
    let hundred = S::from_f64_lossy(100.0);
    for result in &mut results {
        let delta = (result.solution.objective - baseline) / baseline.abs() * hundred;
        result.objective_delta_vs_baseline = Some(delta);
    }
    Ok(results)
}

/// One row of a gas-price sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real", deserialize = "S: Real"))]
pub struct SweepRow<S = f64> {
    pub multiplier: S,
    pub objective: S,
    /// New gas capacity per technology token, MW.
    pub gas_investments: BTreeMap<String, S>,
    /// Total gas-fired generation over the horizon, MWh.
    pub gas_energy_mwh: S,
    pub load_shed_total: BTreeMap<String, S>,
}

/// Re-runs `base_config` under increasing gas-price multipliers.
/// Multipliers must be >= 1 and sorted ascending.
pub fn gas_price_sweep<S: Real>(
    system: &SystemModel<S>,
    base_config: &ScenarioConfig<S>,
    multipliers: &[S],
) -> Result<Vec<SweepRow<S>>, ScenarioError> {
    if multipliers.is_empty() {
        return Err(ScenarioError::BadArgument("empty multiplier list".into()));
    }
    for pair in multipliers.windows(2) {
        if pair[1] < pair[0] {
            return Err(ScenarioError::BadArgument(
                "multipliers must be sorted ascending".into(),
            ));
        }
    }
    if multipliers[0] < S::one() {
        return Err(ScenarioError::BadArgument(
            "multipliers must be at least 1".into(),
        ));
    }

    let mut rows = Vec::with_capacity(multipliers.len());
    for &multiplier in multipliers {
        let mut config = base_config.clone();
        config.name = format!("{}@x{}", base_config.name, multiplier);
        config.gas_price_multiplier = base_config.gas_price_multiplier * multiplier;
        let run = run_scenario_full(system, &config)?;
        let gas_investments: BTreeMap<String, S> = run
            .result
            .investments
            .iter()
            .filter(|(tech, _)| tech.starts_with("gas_"))
            .map(|(tech, mw)| (tech.clone(), *mw))
            .collect();
        let mut gas_energy = S::zero();
        for (jo, &j) in run.index.thermal_order.iter().enumerate() {
            if run.system.thermal_units[j].technology.is_gas() {
                for t in 0..run.index.horizon {
                    gas_energy += run.result.solution.values[run.index.thermal_p(jo, t)];
                }
            }
        }
        rows.push(SweepRow {
            multiplier,
            objective: run.result.solution.objective,
            gas_investments,
            gas_energy_mwh: gas_energy,
            load_shed_total: run.result.load_shed_total,
        });
    }
    Ok(rows)
}
