//! Independent residual audit of a solved system.
//!
//! Recomputes the physics straight from the system data and the variable
//! values — nodal balance, line loadings, daily shift balance, the
//! state-of-charge recursion and the renewable target — without touching
//! the assembled LP, so it cross-checks the formulation as well as the
//! solver.

use crate::formulation::VariableIndex;
use crate::model::{ScenarioConfig, SystemModel};
use crate::real::Real;

#[derive(Debug, Clone)]
pub struct ResidualReport<S> {
    /// Largest |generation-side minus consumption-side| over nodes and hours.
    pub max_nodal_imbalance: S,
    /// Largest flow excess |B (th_n - th_i)| - limit, clamped at zero.
    pub max_line_overflow: S,
    /// Largest |sum over a day of (up - down)| across nodes, days, families.
    pub max_daily_shift_imbalance: S,
    /// Largest per-hour violation of the state-of-charge recursion.
    pub max_soc_error: S,
    /// Produced target-eligible energy minus the required minimum (may be
    /// negative only by a tolerance when the target row binds).
    pub res_target_surplus: S,
    /// Largest nodal demand, for scaling nodal tolerance.
    pub max_demand: S,
}

impl<S: Real> ResidualReport<S> {
    /// Worst structural violation (excludes the target surplus, which has
    /// its own sign convention).
    pub fn worst(&self) -> S {
        self.max_nodal_imbalance
            .max(self.max_line_overflow)
            .max(self.max_daily_shift_imbalance)
            .max(self.max_soc_error)
    }
}

pub fn audit_solution<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
    index: &VariableIndex,
    values: &[S],
) -> ResidualReport<S> {
    let horizon = index.horizon;
    let zero = S::zero();

    let mut max_demand = zero;
    let mut max_nodal = zero;
    for (no, &n) in index.node_order.iter().enumerate() {
        let node = &system.nodes[n];
        for t in 0..horizon {
            let demand = node.demand.total_at(t);
            max_demand = max_demand.max(demand.abs());

            let mut supply = values[index.shed(no, t)]
                + values[index.emob_down(no, t)]
                + values[index.other_down(no, t)];
            if let Some(exo) = &node.exogenous_injection {
                supply += exo[t];
            }
            let mut consumption = demand
                + values[index.emob_up(no, t)]
                + values[index.other_up(no, t)];

            for (jo, &j) in index.thermal_order.iter().enumerate() {
                if system.thermal_units[j].node == node.id {
                    supply += values[index.thermal_p(jo, t)];
                }
            }
            for (ro, &r) in index.renewable_order.iter().enumerate() {
                if system.renewable_units[r].node == node.id {
                    supply += values[index.renewable_p(ro, t)];
                }
            }
            for (ko, &k) in index.storage_order.iter().enumerate() {
                if system.storage_units[k].node == node.id {
                    supply += values[index.storage_discharge(ko, t)];
                    consumption += values[index.storage_charge(ko, t)];
                }
            }
            // line flows leaving the node count as consumption
            for line in &system.lines {
                let (this, other, sign) = if line.from_node == node.id {
                    (no, system.node_index(&line.to_node).unwrap(), S::one())
                } else if line.to_node == node.id {
                    (no, system.node_index(&line.from_node).unwrap(), S::one())
                } else {
                    continue;
                };
                let other_pos = index
                    .node_order
                    .iter()
                    .position(|&x| x == other)
                    .unwrap();
                let flow = line.susceptance_b
                    * (values[index.theta(this, t)] - values[index.theta(other_pos, t)]);
                consumption += sign * flow;
            }

            max_nodal = max_nodal.max((supply - consumption).abs());
        }
    }

    let mut max_line = zero;
    for &l in &index.line_order {
        let line = &system.lines[l];
        let from = index
            .node_order
            .iter()
            .position(|&x| x == system.node_index(&line.from_node).unwrap())
            .unwrap();
        let to = index
            .node_order
            .iter()
            .position(|&x| x == system.node_index(&line.to_node).unwrap())
            .unwrap();
        for t in 0..horizon {
            let flow = line.susceptance_b
                * (values[index.theta(from, t)] - values[index.theta(to, t)]);
            max_line = max_line.max(flow.abs() - line.flow_limit_pmax);
        }
    }
    max_line = max_line.max(zero);

    let mut max_shift = zero;
    for no in 0..index.node_order.len() {
        for hours in index.day_blocks() {
            let mut e_net = zero;
            let mut l_net = zero;
            for t in hours {
                e_net += values[index.emob_up(no, t)] - values[index.emob_down(no, t)];
                l_net += values[index.other_up(no, t)] - values[index.other_down(no, t)];
            }
            max_shift = max_shift.max(e_net.abs()).max(l_net.abs());
        }
    }

    let mut max_soc = zero;
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        let initial = match index.storage_invest(ko) {
            Some(u) => unit.soc_initial * values[u],
            None => unit.soc_initial,
        };
        let mut prev = initial;
        for t in 0..horizon {
            let spill = index.spill(ko, t).map_or(zero, |c| values[c]);
            let expected = prev + unit.eta_charge * values[index.storage_charge(ko, t)]
                - values[index.storage_discharge(ko, t)] / unit.eta_discharge
                + unit.inflow[t]
                - spill;
            let actual = values[index.storage_soc(ko, t)];
            max_soc = max_soc.max((actual - expected).abs());
            prev = actual;
        }
    }

    let mut res_energy = zero;
    for (ro, &r) in index.renewable_order.iter().enumerate() {
        if system.renewable_units[r].counts_toward_res_target {
            for t in 0..horizon {
                res_energy += values[index.renewable_p(ro, t)];
            }
        }
    }
    for (jo, &j) in index.thermal_order.iter().enumerate() {
        if system.thermal_units[j].counts_toward_res_target {
            for t in 0..horizon {
                res_energy += values[index.thermal_p(jo, t)];
            }
        }
    }

    ResidualReport {
        max_nodal_imbalance: max_nodal,
        max_line_overflow: max_line,
        max_daily_shift_imbalance: max_shift,
        max_soc_error: max_soc,
        res_target_surplus: res_energy - config.res_target_b,
        max_demand,
    }
}
