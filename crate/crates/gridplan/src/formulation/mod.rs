//! Translates a (scenario-applied) system into a sparse linear program:
//! annualized investment plus operating cost, subject to unit capability,
//! storage balance, renewable availability and target, DC network, load
//! shifting and reserve constraints.
//!
//! Sign conventions: every inequality is stored as `a'x <= rhs`; the nodal
//! balance is an equality with generation-side terms negative, so that
//! net line outflow plus consumption-side variables equals exogenous
//! injection minus demand. Candidate units couple their dispatch to a
//! continuous build fraction `u` in [0, 1]; existing units fold `u = 1`
//! into bounds and right-hand sides.

pub mod audit;
mod index;

pub use index::{Candidate, UnitClass, VariableIndex};

use linprog::{Col, LinearProgram, RowKind};

use crate::model::{ReserveProduct, ScenarioConfig, StorageKind, SystemModel};
use crate::real::Real;

/// Builds the full program: columns, objective and every constraint family,
/// in a deterministic order (entities sorted by id, then hour).
pub fn build_lp<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
) -> (LinearProgram<S>, VariableIndex) {
    let index = VariableIndex::new(system);
    let mut lp = LinearProgram::new("gep");
    add_columns(system, &index, &mut lp);
    debug_assert_eq!(lp.num_cols(), index.num_cols);
    lp.objective = build_objective(system, config, &index);
    add_thermal_constraints(system, &index, &mut lp);
    add_storage_constraints(system, &index, &mut lp);
    add_renewable_constraints(system, config, &index, &mut lp);
    add_network_constraints(system, &index, &mut lp);
    add_shifting_constraints(system, config, &index, &mut lp);
    add_reserve_constraints(system, &index, &mut lp);
    debug_assert!(lp.validate().is_ok(), "{:?}", lp.validate());
    (lp, index)
}

/// Objective coefficients per column: investment annuities on the build
/// fractions, marginal costs on dispatch, the shedding penalty on unserved
/// load; zero elsewhere.
pub fn build_objective<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
    index: &VariableIndex,
) -> Vec<S> {
    let horizon = index.horizon;
    let mut cost = vec![S::zero(); index.num_cols];
    for (jo, &j) in index.thermal_order.iter().enumerate() {
        let unit = &system.thermal_units[j];
        for t in 0..horizon {
            cost[index.thermal_p(jo, t)] = unit.marginal_cost();
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        for t in 0..horizon {
            cost[index.storage_discharge(ko, t)] = unit.cost_voc;
        }
    }
    for (ro, &r) in index.renewable_order.iter().enumerate() {
        let unit = &system.renewable_units[r];
        for t in 0..horizon {
            cost[index.renewable_p(ro, t)] = unit.cost_voc;
        }
    }
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
        cost[cand.col] = alpha * inv * capacity;
    }
    for no in 0..index.node_order.len() {
        for t in 0..horizon {
            cost[index.shed(no, t)] = config.cost_load_shed;
        }
    }
    cost
}

/// Creates all columns with their bounds, in index layout order.
fn add_columns<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    let horizon = index.horizon;
    let inf = S::infinity();
    let zero = S::zero();

    for (jo, &j) in index.thermal_order.iter().enumerate() {
        let unit = &system.thermal_units[j];
        for t in 0..horizon {
            let (lb, ub) = match unit.initial_dispatch {
                Some(p0) if t == 0 => (p0, p0),
                _ => (zero, unit.p_max),
            };
            lp.add_col(format!("p_{jo}_{t}"), zero, lb, ub);
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        for t in 0..horizon {
            lp.add_col(format!("sd_{ko}_{t}"), zero, zero, unit.p_discharge_max);
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        for t in 0..horizon {
            lp.add_col(format!("sc_{ko}_{t}"), zero, zero, unit.p_charge_max);
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        for t in 0..horizon {
            lp.add_col(format!("ss_{ko}_{t}"), zero, zero, unit.energy_max);
        }
    }
    for (ko, &k) in index.storage_order.iter().enumerate() {
        if system.storage_units[k].kind == StorageKind::Dam {
            for t in 0..horizon {
                lp.add_col(format!("sp_{ko}_{t}"), zero, zero, inf);
            }
        }
    }
    for (ro, &r) in index.renewable_order.iter().enumerate() {
        let unit = &system.renewable_units[r];
        for t in 0..horizon {
            let avail = unit.capacity * unit.profile[t];
            lp.add_col(format!("pr_{ro}_{t}"), zero, zero, avail);
        }
    }
    for cand in &index.candidates {
        let tag = match cand.class {
            UnitClass::Thermal => "ut",
            UnitClass::Storage => "us",
            UnitClass::Renewable => "ur",
        };
        lp.add_col(format!("{tag}_{}", cand.order_pos), zero, zero, S::one());
    }
    for (no, &n) in index.node_order.iter().enumerate() {
        let node = &system.nodes[n];
        for t in 0..horizon {
            let cap = node.demand.total_at(t).max(zero);
            lp.add_col(format!("ls_{no}_{t}"), zero, zero, cap);
        }
    }
    // shifting variables; an all-zero spec pins them at zero
    for (no, &n) in index.node_order.iter().enumerate() {
        let spec = &system.nodes[n].shift;
        for t in 0..horizon {
            lp.add_col(format!("eu_{no}_{t}"), zero, zero, spec.e_hr_max);
        }
    }
    for (no, &n) in index.node_order.iter().enumerate() {
        let node = &system.nodes[n];
        for t in 0..horizon {
            let cap = node
                .shift
                .e_hr_max
                .min(node.demand.e_mobility[t])
                .max(zero);
            lp.add_col(format!("ed_{no}_{t}"), zero, zero, cap);
        }
    }
    for (no, &n) in index.node_order.iter().enumerate() {
        let spec = &system.nodes[n].shift;
        for t in 0..horizon {
            lp.add_col(format!("lu_{no}_{t}"), zero, zero, spec.l_hr_max);
        }
    }
    for (no, &n) in index.node_order.iter().enumerate() {
        let spec = &system.nodes[n].shift;
        for t in 0..horizon {
            lp.add_col(format!("ld_{no}_{t}"), zero, zero, spec.l_hr_max);
        }
    }
    for product in &index.active_products {
        let tag = product.token();
        for jo in 0..index.thermal_order.len() {
            if index.thermal_reserve(*product, jo, 0).is_some() {
                for t in 0..horizon {
                    lp.add_col(format!("{tag}_t{jo}_{t}"), zero, zero, inf);
                }
            }
        }
        for ko in 0..index.storage_order.len() {
            if index.storage_reserve(*product, ko, 0).is_some() {
                for t in 0..horizon {
                    lp.add_col(format!("{tag}_s{ko}_{t}"), zero, zero, inf);
                }
            }
        }
    }
    let slack = system.slack_index().expect("validated system has a slack");
    for (no, &n) in index.node_order.iter().enumerate() {
        let bounds = if n == slack { (zero, zero) } else { (-inf, inf) };
        for t in 0..horizon {
            lp.add_col(format!("th_{no}_{t}"), zero, bounds.0, bounds.1);
        }
    }
}

/// Capacity and ramping of thermal units. Candidates couple to their build
/// fraction; the hour before the horizon is taken as the first hour's
/// output, so the ramp rows at t = 0 reduce to their reserve terms.
pub fn add_thermal_constraints<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    let up = [ReserveProduct::ScrUp, ReserveProduct::TcrUp];
    let down = [ReserveProduct::ScrDown, ReserveProduct::TcrDown];
    for (jo, &j) in index.thermal_order.iter().enumerate() {
        let unit = &system.thermal_units[j];
        let u_col = index.thermal_invest(jo);
        for t in 0..index.horizon {
            let p_t = Col(index.thermal_p(jo, t));
            if let Some(u) = u_col {
                let row = lp.add_row(format!("cap_{jo}_{t}"), RowKind::Le, S::zero());
                lp.put(row, p_t, S::one());
                lp.put(row, Col(u), -unit.p_max);
            }

            let ramp = |name: String,
                            limit: S,
                            sign: S,
                            products: &[ReserveProduct],
                            lp: &mut LinearProgram<S>| {
                let rhs = if u_col.is_some() { S::zero() } else { limit };
                let row = lp.add_row(name, RowKind::Le, rhs);
                if t > 0 {
                    // sign = +1: p_t - p_{t-1}; sign = -1: p_{t-1} - p_t
                    lp.put(row, p_t, sign);
                    lp.put(row, Col(index.thermal_p(jo, t - 1)), -sign);
                }
                for &product in products {
                    if let Some(col) = index.thermal_reserve(product, jo, t) {
                        lp.put(row, Col(col), S::one());
                    }
                }
                if let Some(u) = u_col {
                    lp.put(row, Col(u), -limit);
                }
            };
            ramp(
                format!("rdn_{jo}_{t}"),
                unit.ramp_down,
                -S::one(),
                &down,
                lp,
            );
            ramp(format!("rup_{jo}_{t}"), unit.ramp_up, S::one(), &up, lp);
        }
    }
}

/// Storage operation: power limits (coupled to the build fraction for
/// candidates), the hourly state-of-charge balance with dam spill, capacity
/// of the reservoir, and the end-of-horizon requirement. Candidate initial
/// and final state scale with the build fraction.
pub fn add_storage_constraints<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        let u_col = index.storage_invest(ko);
        for t in 0..index.horizon {
            let dis = Col(index.storage_discharge(ko, t));
            let ch = Col(index.storage_charge(ko, t));
            let soc = Col(index.storage_soc(ko, t));

            if let Some(u) = u_col {
                if unit.p_charge_max > S::zero() {
                    let row = lp.add_row(format!("sch_{ko}_{t}"), RowKind::Le, S::zero());
                    lp.put(row, ch, S::one());
                    lp.put(row, Col(u), -unit.p_charge_max);
                }
                if unit.p_discharge_max > S::zero() {
                    let row = lp.add_row(format!("sdis_{ko}_{t}"), RowKind::Le, S::zero());
                    lp.put(row, dis, S::one());
                    lp.put(row, Col(u), -unit.p_discharge_max);
                }
                let row = lp.add_row(format!("scap_{ko}_{t}"), RowKind::Le, S::zero());
                lp.put(row, soc, S::one());
                lp.put(row, Col(u), -unit.energy_max);
            }

            // soc_t - soc_{t-1} - eta_ch * ch_t + dis_t / eta_dis + spill_t
            //   = inflow_t            (soc_{-1} is the initial fill)
            let mut rhs = unit.inflow[t];
            let row = lp.add_row(format!("soc_{ko}_{t}"), RowKind::Eq, S::zero());
            lp.put(row, soc, S::one());
            if t > 0 {
                lp.put(row, Col(index.storage_soc(ko, t - 1)), -S::one());
            } else {
                match u_col {
                    Some(u) => lp.put(row, Col(u), -unit.soc_initial),
                    None => rhs += unit.soc_initial,
                }
            }
            lp.put(row, ch, -unit.eta_charge);
            lp.put(row, dis, S::one() / unit.eta_discharge);
            if let Some(spill) = index.spill(ko, t) {
                lp.put(row, Col(spill), S::one());
            }
            lp.rows[row.0].rhs = rhs;
        }

        if unit.soc_final_min > S::zero() {
            // soc_{T-1} >= soc_final_min (times u for candidates)
            let last = Col(index.storage_soc(ko, index.horizon - 1));
            let row = lp.add_row(format!("sfin_{ko}"), RowKind::Le, S::zero());
            lp.put(row, last, -S::one());
            match u_col {
                Some(u) => lp.put(row, Col(u), unit.soc_final_min),
                None => lp.rows[row.0].rhs = -unit.soc_final_min,
            }
        }
    }
}

/// Availability caps for candidate renewables and the system-wide minimum
/// produced by target-eligible renewables and thermal units.
pub fn add_renewable_constraints<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    for (ro, &r) in index.renewable_order.iter().enumerate() {
        let unit = &system.renewable_units[r];
        let Some(u) = index.renewable_invest(ro) else {
            continue;
        };
        for t in 0..index.horizon {
            let row = lp.add_row(format!("ravl_{ro}_{t}"), RowKind::Le, S::zero());
            lp.put(row, Col(index.renewable_p(ro, t)), S::one());
            lp.put(row, Col(u), -unit.capacity * unit.profile[t]);
        }
    }

    if config.res_target_b > S::zero() {
        let row = lp.add_row("res", RowKind::Le, -config.res_target_b);
        for (ro, &r) in index.renewable_order.iter().enumerate() {
            if system.renewable_units[r].counts_toward_res_target {
                for t in 0..index.horizon {
                    lp.put(row, Col(index.renewable_p(ro, t)), -S::one());
                }
            }
        }
        for (jo, &j) in index.thermal_order.iter().enumerate() {
            if system.thermal_units[j].counts_toward_res_target {
                for t in 0..index.horizon {
                    lp.put(row, Col(index.thermal_p(jo, t)), -S::one());
                }
            }
        }
    }
}

/// DC network: one balance equality per node and hour (line flows expressed
/// through voltage angles), two flow-limit rows per line and hour. The
/// slack angle is pinned by its column bounds.
pub fn add_network_constraints<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    let horizon = index.horizon;
    // node position lookup: system index -> order position
    let mut node_pos = vec![usize::MAX; system.nodes.len()];
    for (no, &n) in index.node_order.iter().enumerate() {
        node_pos[n] = no;
    }

    for (no, &n) in index.node_order.iter().enumerate() {
        let node = &system.nodes[n];
        for t in 0..horizon {
            let mut rhs = -node.demand.total_at(t);
            if let Some(exo) = &node.exogenous_injection {
                rhs += exo[t];
            }
            let row = lp.add_row(format!("bal_{no}_{t}"), RowKind::Eq, rhs);

            // net outflow over incident lines: B_l (theta_n - theta_other)
            for line in &system.lines {
                let from = node_pos[system.node_index(&line.from_node).expect("validated")];
                let to = node_pos[system.node_index(&line.to_node).expect("validated")];
                let other = if from == no {
                    to
                } else if to == no {
                    from
                } else {
                    continue;
                };
                lp.put(row, Col(index.theta(no, t)), line.susceptance_b);
                lp.put(row, Col(index.theta(other, t)), -line.susceptance_b);
            }

            lp.put(row, Col(index.emob_up(no, t)), S::one());
            lp.put(row, Col(index.other_up(no, t)), S::one());
            lp.put(row, Col(index.emob_down(no, t)), -S::one());
            lp.put(row, Col(index.other_down(no, t)), -S::one());
            lp.put(row, Col(index.shed(no, t)), -S::one());

            for (ko, &k) in index.storage_order.iter().enumerate() {
                if system.storage_units[k].node == node.id {
                    lp.put(row, Col(index.storage_charge(ko, t)), S::one());
                    lp.put(row, Col(index.storage_discharge(ko, t)), -S::one());
                }
            }
            for (jo, &j) in index.thermal_order.iter().enumerate() {
                if system.thermal_units[j].node == node.id {
                    lp.put(row, Col(index.thermal_p(jo, t)), -S::one());
                }
            }
            for (ro, &r) in index.renewable_order.iter().enumerate() {
                if system.renewable_units[r].node == node.id {
                    lp.put(row, Col(index.renewable_p(ro, t)), -S::one());
                }
            }
        }
    }

    for (lo, &l) in index.line_order.iter().enumerate() {
        let line = &system.lines[l];
        let from = node_pos[system.node_index(&line.from_node).expect("validated")];
        let to = node_pos[system.node_index(&line.to_node).expect("validated")];
        for t in 0..horizon {
            let fwd = lp.add_row(format!("lfw_{lo}_{t}"), RowKind::Le, line.flow_limit_pmax);
            lp.put(fwd, Col(index.theta(from, t)), line.susceptance_b);
            lp.put(fwd, Col(index.theta(to, t)), -line.susceptance_b);
            let bwd = lp.add_row(format!("lbw_{lo}_{t}"), RowKind::Le, line.flow_limit_pmax);
            lp.put(bwd, Col(index.theta(from, t)), -line.susceptance_b);
            lp.put(bwd, Col(index.theta(to, t)), line.susceptance_b);
        }
    }
}

/// Daily energy caps and up/down balance for both shifting families. The
/// hourly bounds live on the columns; days are fixed 24-hour blocks from
/// hour zero.
pub fn add_shifting_constraints<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    for (no, &n) in index.node_order.iter().enumerate() {
        let spec = &system.nodes[n].shift;
        if spec.is_zero() || !config.allow_shifting {
            continue;
        }
        for (d, hours) in index.day_blocks().enumerate() {
            let eday = lp.add_row(format!("eday_{no}_{d}"), RowKind::Le, spec.e_day_max);
            let ebal = lp.add_row(format!("ebal_{no}_{d}"), RowKind::Eq, S::zero());
            let lday = lp.add_row(format!("lday_{no}_{d}"), RowKind::Le, spec.l_day_max);
            let lbal = lp.add_row(format!("lbal_{no}_{d}"), RowKind::Eq, S::zero());
            for t in hours {
                lp.put(eday, Col(index.emob_up(no, t)), S::one());
                lp.put(eday, Col(index.emob_down(no, t)), S::one());
                lp.put(ebal, Col(index.emob_up(no, t)), S::one());
                lp.put(ebal, Col(index.emob_down(no, t)), -S::one());
                lp.put(lday, Col(index.other_up(no, t)), S::one());
                lp.put(lday, Col(index.other_down(no, t)), S::one());
                lp.put(lbal, Col(index.other_up(no, t)), S::one());
                lp.put(lbal, Col(index.other_down(no, t)), -S::one());
            }
        }
    }
}

/// System-wide requirement per product and hour, plus the headroom and
/// footroom coupling on every participating unit. Products with an all-zero
/// requirement contribute no columns or rows (their reserves would be
/// optimally zero anyway).
pub fn add_reserve_constraints<S: Real>(
    system: &SystemModel<S>,
    index: &VariableIndex,
    lp: &mut LinearProgram<S>,
) {
    for &product in &index.active_products {
        let req = system.reserve.requirement(product);
        for t in 0..index.horizon {
            // sum of provisions >= requirement
            let row = lp.add_row(
                format!("q{}_{t}", product.token()),
                RowKind::Le,
                -req[t],
            );
            for jo in 0..index.thermal_order.len() {
                if let Some(col) = index.thermal_reserve(product, jo, t) {
                    lp.put(row, Col(col), -S::one());
                }
            }
            for ko in 0..index.storage_order.len() {
                if let Some(col) = index.storage_reserve(product, ko, t) {
                    lp.put(row, Col(col), -S::one());
                }
            }
        }
    }

    let up = [ReserveProduct::ScrUp, ReserveProduct::TcrUp];
    let down = [ReserveProduct::ScrDown, ReserveProduct::TcrDown];

    for (jo, &j) in index.thermal_order.iter().enumerate() {
        let unit = &system.thermal_units[j];
        let u_col = index.thermal_invest(jo);
        for t in 0..index.horizon {
            let up_cols: Vec<usize> = up
                .iter()
                .filter_map(|&p| index.thermal_reserve(p, jo, t))
                .collect();
            if !up_cols.is_empty() {
                // headroom: p + upward reserves <= Pmax (u)
                let rhs = if u_col.is_some() { S::zero() } else { unit.p_max };
                let row = lp.add_row(format!("hthr_{jo}_{t}"), RowKind::Le, rhs);
                lp.put(row, Col(index.thermal_p(jo, t)), S::one());
                for col in up_cols {
                    lp.put(row, Col(col), S::one());
                }
                if let Some(u) = u_col {
                    lp.put(row, Col(u), -unit.p_max);
                }
            }
            let down_cols: Vec<usize> = down
                .iter()
                .filter_map(|&p| index.thermal_reserve(p, jo, t))
                .collect();
            if !down_cols.is_empty() {
                // footroom: downward reserves <= p
                let row = lp.add_row(format!("fthr_{jo}_{t}"), RowKind::Le, S::zero());
                for col in down_cols {
                    lp.put(row, Col(col), S::one());
                }
                lp.put(row, Col(index.thermal_p(jo, t)), -S::one());
            }
        }
    }

    for (ko, &k) in index.storage_order.iter().enumerate() {
        let unit = &system.storage_units[k];
        let u_col = index.storage_invest(ko);
        for t in 0..index.horizon {
            let up_cols: Vec<usize> = up
                .iter()
                .filter_map(|&p| index.storage_reserve(p, ko, t))
                .collect();
            if !up_cols.is_empty() {
                let rhs = if u_col.is_some() {
                    S::zero()
                } else {
                    unit.p_discharge_max
                };
                let row = lp.add_row(format!("hsto_{ko}_{t}"), RowKind::Le, rhs);
                lp.put(row, Col(index.storage_discharge(ko, t)), S::one());
                for col in up_cols {
                    lp.put(row, Col(col), S::one());
                }
                if let Some(u) = u_col {
                    lp.put(row, Col(u), -unit.p_discharge_max);
                }
            }
            let down_cols: Vec<usize> = down
                .iter()
                .filter_map(|&p| index.storage_reserve(p, ko, t))
                .collect();
            if !down_cols.is_empty() {
                let row = lp.add_row(format!("fsto_{ko}_{t}"), RowKind::Le, S::zero());
                for col in down_cols {
                    lp.put(row, Col(col), S::one());
                }
                lp.put(row, Col(index.storage_discharge(ko, t)), -S::one());
            }
        }
    }
}

/// Pins every build fraction to the given values (for an operations-only
/// re-solve at a frozen investment decision).
pub fn fix_investments<S: Real>(
    lp: &mut LinearProgram<S>,
    index: &VariableIndex,
    values: &[S],
) {
    for cand in &index.candidates {
        lp.fix_col(Col(cand.col), values[cand.col]);
    }
}
