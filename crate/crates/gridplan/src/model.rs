//! Domain types: the network, units, profiles and run configuration, plus
//! the structural validation that every downstream stage relies on.
//!
//! All types are immutable after load and safe to share across concurrent
//! scenario runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalTech {
    GasSyn,
    GasCcs,
    Biomass,
    Nuclear,
    Other,
}

impl ThermalTech {
    pub fn is_gas(self) -> bool {
        matches!(self, ThermalTech::GasSyn | ThermalTech::GasCcs)
    }

    pub fn token(self) -> &'static str {
        match self {
            ThermalTech::GasSyn => "gas_syn",
            ThermalTech::GasCcs => "gas_ccs",
            ThermalTech::Biomass => "biomass",
            ThermalTech::Nuclear => "nuclear",
            ThermalTech::Other => "other",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "gas_syn" => ThermalTech::GasSyn,
            "gas_ccs" => ThermalTech::GasCcs,
            "biomass" => ThermalTech::Biomass,
            "nuclear" => ThermalTech::Nuclear,
            "other" => ThermalTech::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageKind {
    Dam,
    Pump,
    Battery,
}

impl StorageKind {
    pub fn token(self) -> &'static str {
        match self {
            StorageKind::Dam => "dam",
            StorageKind::Pump => "pump",
            StorageKind::Battery => "battery",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "dam" => StorageKind::Dam,
            "pump" => StorageKind::Pump,
            "battery" => StorageKind::Battery,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewableTech {
    Pv,
    Wind,
    Ror,
}

impl RenewableTech {
    pub fn token(self) -> &'static str {
        match self {
            RenewableTech::Pv => "pv",
            RenewableTech::Wind => "wind",
            RenewableTech::Ror => "ror",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "pv" => RenewableTech::Pv,
            "wind" => RenewableTech::Wind,
            "ror" => RenewableTech::Ror,
            _ => return None,
        })
    }
}

/// The four reserve products, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReserveProduct {
    ScrUp,
    ScrDown,
    TcrUp,
    TcrDown,
}

pub const RESERVE_PRODUCTS: [ReserveProduct; 4] = [
    ReserveProduct::ScrUp,
    ReserveProduct::ScrDown,
    ReserveProduct::TcrUp,
    ReserveProduct::TcrDown,
];

impl ReserveProduct {
    pub fn token(self) -> &'static str {
        match self {
            ReserveProduct::ScrUp => "scr_up",
            ReserveProduct::ScrDown => "scr_dn",
            ReserveProduct::TcrUp => "tcr_up",
            ReserveProduct::TcrDown => "tcr_dn",
        }
    }

    pub fn is_upward(self) -> bool {
        matches!(self, ReserveProduct::ScrUp | ReserveProduct::TcrUp)
    }
}

/// Per-product participation flags for a unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReserveEligibility {
    pub scr_up: bool,
    pub scr_down: bool,
    pub tcr_up: bool,
    pub tcr_down: bool,
}

impl ReserveEligibility {
    pub fn all() -> Self {
        Self {
            scr_up: true,
            scr_down: true,
            tcr_up: true,
            tcr_down: true,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn has(&self, product: ReserveProduct) -> bool {
        match product {
            ReserveProduct::ScrUp => self.scr_up,
            ReserveProduct::ScrDown => self.scr_down,
            ReserveProduct::TcrUp => self.tcr_up,
            ReserveProduct::TcrDown => self.tcr_down,
        }
    }

    pub fn any_upward(&self) -> bool {
        self.scr_up || self.tcr_up
    }

    pub fn any_downward(&self) -> bool {
        self.scr_down || self.tcr_down
    }
}

/// Hourly nodal demand, decomposed into the four driver profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile<S = f64> {
    pub heat_pump: Vec<S>,
    pub e_mobility: Vec<S>,
    pub hydrogen: Vec<S>,
    pub base: Vec<S>,
}

impl<S: Real> DemandProfile<S> {
    pub fn zeros(horizon: usize) -> Self {
        Self {
            heat_pump: vec![S::zero(); horizon],
            e_mobility: vec![S::zero(); horizon],
            hydrogen: vec![S::zero(); horizon],
            base: vec![S::zero(); horizon],
        }
    }

    /// Total demand at hour t (sum of the four components).
    pub fn total_at(&self, t: usize) -> S {
        self.heat_pump[t] + self.e_mobility[t] + self.hydrogen[t] + self.base[t]
    }
}

/// Hourly power and daily energy limits for load shifting at one node.
/// An all-zero spec disables shifting there.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShiftSpec<S = f64> {
    pub e_hr_max: S,
    pub e_day_max: S,
    pub l_hr_max: S,
    pub l_day_max: S,
}

impl<S: Real> ShiftSpec<S> {
    pub fn zero() -> Self {
        Self {
            e_hr_max: S::zero(),
            e_day_max: S::zero(),
            l_hr_max: S::zero(),
            l_day_max: S::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.e_hr_max == S::zero()
            && self.e_day_max == S::zero()
            && self.l_hr_max == S::zero()
            && self.l_day_max == S::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BusNode<S = f64> {
    pub id: String,
    pub country: String,
    pub is_slack: bool,
    pub demand: DemandProfile<S>,
    pub shift: ShiftSpec<S>,
    /// Fixed hourly injection (MW, positive into the node), e.g. exchanges
    /// with regions outside the modeled system.
    pub exogenous_injection: Option<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionLine<S = f64> {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    /// MW per radian of angle difference.
    pub susceptance_b: S,
    pub flow_limit_pmax: S,
    pub cross_border: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalUnit<S = f64> {
    pub id: String,
    pub node: String,
    pub technology: ThermalTech,
    pub p_max: S,
    pub ramp_up: S,
    pub ramp_down: S,
    pub cost_voc: S,
    pub cost_fuel: S,
    pub cost_emi: S,
    pub is_candidate: bool,
    /// EUR per MW per year; zero for existing units.
    pub inv_cost_annual: S,
    pub annuity_alpha: S,
    pub reserve_eligible: ReserveEligibility,
    pub counts_toward_res_target: bool,
    /// Optional known dispatch for the hour before the horizon; pins the
    /// first-hour output instead of leaving the initial ramp unconstrained.
    pub initial_dispatch: Option<S>,
}

impl<S: Real> ThermalUnit<S> {
    /// Per-MWh dispatch cost: variable + fuel + emission components.
    pub fn marginal_cost(&self) -> S {
        self.cost_voc + self.cost_fuel + self.cost_emi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageUnit<S = f64> {
    pub id: String,
    pub node: String,
    pub kind: StorageKind,
    pub p_charge_max: S,
    pub p_discharge_max: S,
    pub energy_max: S,
    pub eta_charge: S,
    pub eta_discharge: S,
    pub soc_initial: S,
    pub soc_final_min: S,
    /// Natural inflow per hour (MWh/h); zero series for batteries.
    pub inflow: Vec<S>,
    pub cost_voc: S,
    pub is_candidate: bool,
    pub inv_cost_annual: S,
    pub annuity_alpha: S,
    pub reserve_eligible: ReserveEligibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewableUnit<S = f64> {
    pub id: String,
    pub node: String,
    pub technology: RenewableTech,
    pub capacity: S,
    /// Per-MW availability in [0, 1], hourly.
    pub profile: Vec<S>,
    pub cost_voc: S,
    pub is_candidate: bool,
    pub inv_cost_annual: S,
    pub annuity_alpha: S,
    pub counts_toward_res_target: bool,
}

/// System-wide reserve requirements per product, hourly.
#[derive(Debug, Clone, PartialEq)]
pub struct ReserveSpec<S = f64> {
    pub req_scr_up: Vec<S>,
    pub req_scr_down: Vec<S>,
    pub req_tcr_up: Vec<S>,
    pub req_tcr_down: Vec<S>,
}

impl<S: Real> ReserveSpec<S> {
    pub fn zeros(horizon: usize) -> Self {
        Self {
            req_scr_up: vec![S::zero(); horizon],
            req_scr_down: vec![S::zero(); horizon],
            req_tcr_up: vec![S::zero(); horizon],
            req_tcr_down: vec![S::zero(); horizon],
        }
    }

    pub fn requirement(&self, product: ReserveProduct) -> &[S] {
        match product {
            ReserveProduct::ScrUp => &self.req_scr_up,
            ReserveProduct::ScrDown => &self.req_scr_down,
            ReserveProduct::TcrUp => &self.req_tcr_up,
            ReserveProduct::TcrDown => &self.req_tcr_down,
        }
    }
}

/// The immutable input world for one planning run.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel<S = f64> {
    pub nodes: Vec<BusNode<S>>,
    pub lines: Vec<TransmissionLine<S>>,
    pub thermal_units: Vec<ThermalUnit<S>>,
    pub storage_units: Vec<StorageUnit<S>>,
    pub renewable_units: Vec<RenewableUnit<S>>,
    pub reserve: ReserveSpec<S>,
    pub horizon: usize,
}

impl<S: Real> SystemModel<S> {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn slack_index(&self) -> Option<usize> {
        self.nodes.iter().position(|n| n.is_slack)
    }

    /// Distinct country tokens, sorted.
    pub fn countries(&self) -> Vec<String> {
        let mut c: Vec<String> = self.nodes.iter().map(|n| n.country.clone()).collect();
        c.sort();
        c.dedup();
        c
    }
}

/// Flags and multipliers selecting one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Real", deserialize = "S: Real"))]
pub struct ScenarioConfig<S = f64> {
    pub name: String,
    #[serde(default = "default_true")]
    pub allow_gas_candidates: bool,
    #[serde(default = "default_true")]
    pub allow_shifting: bool,
    #[serde(default = "one")]
    pub xborder_scale: S,
    #[serde(default = "one")]
    pub gas_price_multiplier: S,
    #[serde(rename = "res_target_B", default = "zero")]
    pub res_target_b: S,
    #[serde(rename = "horizon_T")]
    pub horizon_t: usize,
    #[serde(default = "default_voll")]
    pub cost_load_shed: S,
}

fn default_true() -> bool {
    true
}

fn one<S: Real>() -> S {
    S::one()
}

fn zero<S: Real>() -> S {
    S::zero()
}

fn default_voll<S: Real>() -> S {
    S::from_f64_lossy(10_000.0)
}

impl<S: Real> ScenarioConfig<S> {
    /// A neutral configuration: everything allowed, nothing rescaled.
    pub fn neutral(name: &str, horizon_t: usize) -> Self {
        Self {
            name: name.to_string(),
            allow_gas_candidates: true,
            allow_shifting: true,
            xborder_scale: S::one(),
            gas_price_multiplier: S::one(),
            res_target_b: S::zero(),
            horizon_t,
            cost_load_shed: default_voll(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |what: &str| {
            out.push(Violation::new(format!("scenario {}", self.name), what));
        };
        if self.xborder_scale < S::zero() || self.xborder_scale > S::one() {
            bad("xborder_scale must lie in [0, 1]");
        }
        if self.gas_price_multiplier < S::zero() {
            bad("gas_price_multiplier must be nonnegative");
        }
        if self.res_target_b < S::zero() {
            bad("res_target_B must be nonnegative");
        }
        if self.horizon_t == 0 || !self.horizon_t.is_multiple_of(24) {
            bad("horizon_T must be a positive multiple of 24");
        }
        if self.cost_load_shed < S::zero() {
            bad("cost_load_shed must be nonnegative");
        }
        out
    }
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl From<linprog::Status> for SolveStatus {
    fn from(s: linprog::Status) -> Self {
        match s {
            linprog::Status::Optimal => SolveStatus::Optimal,
            linprog::Status::Infeasible => SolveStatus::Infeasible,
            linprog::Status::Unbounded => SolveStatus::Unbounded,
            linprog::Status::IterationLimit => SolveStatus::IterationLimit,
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
        };
        f.write_str(s)
    }
}

/// A solved planning run: objective, its five cost terms (investment,
/// thermal, storage, renewable, shedding) and the full variable vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution<S = f64> {
    pub status: SolveStatus,
    pub objective: S,
    pub term_breakdown: [S; 5],
    pub values: Vec<S>,
    pub duals: Option<Vec<S>>,
}

/// A broken invariant, identified by the entity that carries it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub problem: String,
}

impl Violation {
    pub fn new(entity: impl Into<String>, problem: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            problem: problem.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.problem)
    }
}

/// Checks every structural invariant and cross-reference of the system.
/// Violations are data, not failures; an empty list means the system is
/// ready for formulation.
pub fn validate_system<S: Real>(system: &SystemModel<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    let horizon = system.horizon;
    let check_len = |entity: &str, what: &str, len: usize, out: &mut Vec<Violation>| {
        if len != horizon {
            out.push(Violation::new(
                entity,
                format!("{what} has {len} rows, expected horizon {horizon}"),
            ));
        }
    };

    if horizon == 0 {
        out.push(Violation::new("system", "horizon must be positive"));
    }

    let slack_count = system.nodes.iter().filter(|n| n.is_slack).count();
    if slack_count != 1 {
        out.push(Violation::new(
            "system",
            format!("expected exactly one slack node, found {slack_count}"),
        ));
    }

    let mut seen = std::collections::HashSet::new();
    for node in &system.nodes {
        if !seen.insert(&node.id) {
            out.push(Violation::new(&node.id, "duplicate node id"));
        }
        check_len(&node.id, "heat_pump demand", node.demand.heat_pump.len(), &mut out);
        check_len(&node.id, "e_mobility demand", node.demand.e_mobility.len(), &mut out);
        check_len(&node.id, "hydrogen demand", node.demand.hydrogen.len(), &mut out);
        check_len(&node.id, "base demand", node.demand.base.len(), &mut out);
        if let Some(exo) = &node.exogenous_injection {
            check_len(&node.id, "exogenous injection", exo.len(), &mut out);
        }
        let sh = &node.shift;
        if sh.e_hr_max < S::zero()
            || sh.e_day_max < S::zero()
            || sh.l_hr_max < S::zero()
            || sh.l_day_max < S::zero()
        {
            out.push(Violation::new(&node.id, "shift limits must be nonnegative"));
        }
    }

    for line in &system.lines {
        if line.from_node == line.to_node {
            out.push(Violation::new(&line.id, "line connects a node to itself"));
        }
        let from = system.node_index(&line.from_node);
        let to = system.node_index(&line.to_node);
        if from.is_none() {
            out.push(Violation::new(
                &line.id,
                format!("unknown from node {:?}", line.from_node),
            ));
        }
        if to.is_none() {
            out.push(Violation::new(
                &line.id,
                format!("unknown to node {:?}", line.to_node),
            ));
        }
        if !(line.susceptance_b > S::zero()) {
            out.push(Violation::new(&line.id, "susceptance must be positive"));
        }
        if line.flow_limit_pmax < S::zero() {
            out.push(Violation::new(&line.id, "flow limit must be nonnegative"));
        }
        if let (Some(f), Some(t)) = (from, to) {
            let crosses = system.nodes[f].country != system.nodes[t].country;
            if crosses != line.cross_border {
                out.push(Violation::new(
                    &line.id,
                    "cross_border flag disagrees with endpoint countries",
                ));
            }
        }
    }

    for unit in &system.thermal_units {
        if system.node_index(&unit.node).is_none() {
            out.push(Violation::new(&unit.id, format!("unknown node {:?}", unit.node)));
        }
        if !(unit.p_max > S::zero()) {
            out.push(Violation::new(&unit.id, "p_max must be positive"));
        }
        if unit.ramp_up < S::zero() || unit.ramp_down < S::zero() {
            out.push(Violation::new(&unit.id, "ramp limits must be nonnegative"));
        }
        if unit.cost_voc < S::zero() || unit.cost_fuel < S::zero() || unit.cost_emi < S::zero() {
            out.push(Violation::new(&unit.id, "costs must be nonnegative"));
        }
        if !unit.is_candidate && unit.inv_cost_annual != S::zero() {
            out.push(Violation::new(
                &unit.id,
                "existing units must have zero investment cost",
            ));
        }
    }

    for unit in &system.storage_units {
        if system.node_index(&unit.node).is_none() {
            out.push(Violation::new(&unit.id, format!("unknown node {:?}", unit.node)));
        }
        if unit.energy_max < S::zero() {
            out.push(Violation::new(&unit.id, "energy_max must be nonnegative"));
        }
        if unit.soc_initial < S::zero() || unit.soc_initial > unit.energy_max {
            out.push(Violation::new(
                &unit.id,
                "soc_initial must lie within [0, energy_max]",
            ));
        }
        if unit.kind == StorageKind::Dam && unit.p_charge_max != S::zero() {
            out.push(Violation::new(&unit.id, "dams cannot charge"));
        }
        for (name, eta) in [("eta_charge", unit.eta_charge), ("eta_discharge", unit.eta_discharge)]
        {
            if !(eta > S::zero()) || eta > S::one() {
                out.push(Violation::new(&unit.id, format!("{name} must lie in (0, 1]")));
            }
        }
        if unit.p_charge_max < S::zero() || unit.p_discharge_max < S::zero() {
            out.push(Violation::new(&unit.id, "power limits must be nonnegative"));
        }
        check_len(&unit.id, "inflow", unit.inflow.len(), &mut out);
        if !unit.is_candidate && unit.inv_cost_annual != S::zero() {
            out.push(Violation::new(
                &unit.id,
                "existing units must have zero investment cost",
            ));
        }
    }

    for unit in &system.renewable_units {
        if system.node_index(&unit.node).is_none() {
            out.push(Violation::new(&unit.id, format!("unknown node {:?}", unit.node)));
        }
        if !(unit.capacity > S::zero()) {
            out.push(Violation::new(&unit.id, "capacity must be positive"));
        }
        check_len(&unit.id, "availability profile", unit.profile.len(), &mut out);
        if unit
            .profile
            .iter()
            .any(|&v| v < S::zero() || v > S::one())
        {
            out.push(Violation::new(&unit.id, "profile values must lie in [0, 1]"));
        }
        if !unit.is_candidate && unit.inv_cost_annual != S::zero() {
            out.push(Violation::new(
                &unit.id,
                "existing units must have zero investment cost",
            ));
        }
    }

    for product in RESERVE_PRODUCTS {
        let req = system.reserve.requirement(product);
        check_len("reserve", product.token(), req.len(), &mut out);
        if req.iter().any(|&v| v < S::zero()) {
            out.push(Violation::new(
                "reserve",
                format!("{} requirement must be nonnegative", product.token()),
            ));
        }
    }

    out
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Single slack node with a given base-demand series and nothing else.
    pub fn single_node_system(base: Vec<f64>) -> SystemModel<f64> {
        let horizon = base.len();
        SystemModel {
            nodes: vec![BusNode {
                id: "n1".into(),
                country: "CH".into(),
                is_slack: true,
                demand: DemandProfile {
                    base,
                    ..DemandProfile::zeros(horizon)
                },
                shift: ShiftSpec::zero(),
                exogenous_injection: None,
            }],
            lines: vec![],
            thermal_units: vec![],
            storage_units: vec![],
            renewable_units: vec![],
            reserve: ReserveSpec::zeros(horizon),
            horizon,
        }
    }

    /// Existing thermal unit with unconstraining ramps and no extras.
    pub fn thermal(id: &str, node: &str, p_max: f64, marginal: f64) -> ThermalUnit<f64> {
        ThermalUnit {
            id: id.into(),
            node: node.into(),
            technology: ThermalTech::Other,
            p_max,
            ramp_up: p_max,
            ramp_down: p_max,
            cost_voc: marginal,
            cost_fuel: 0.0,
            cost_emi: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: ReserveEligibility::none(),
            counts_toward_res_target: false,
            initial_dispatch: None,
        }
    }

    /// Existing battery with symmetric power and given efficiencies.
    pub fn battery(
        id: &str,
        node: &str,
        power: f64,
        energy: f64,
        eta: f64,
        horizon: usize,
    ) -> StorageUnit<f64> {
        StorageUnit {
            id: id.into(),
            node: node.into(),
            kind: StorageKind::Battery,
            p_charge_max: power,
            p_discharge_max: power,
            energy_max: energy,
            eta_charge: eta,
            eta_discharge: eta,
            soc_initial: 0.0,
            soc_final_min: 0.0,
            inflow: vec![0.0; horizon],
            cost_voc: 1.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: ReserveEligibility::none(),
        }
    }

    /// Existing renewable with an explicit availability profile.
    pub fn renewable(
        id: &str,
        node: &str,
        tech: RenewableTech,
        capacity: f64,
        profile: Vec<f64>,
    ) -> RenewableUnit<f64> {
        RenewableUnit {
            id: id.into(),
            node: node.into(),
            technology: tech,
            capacity,
            profile,
            cost_voc: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            counts_toward_res_target: matches!(tech, RenewableTech::Pv | RenewableTech::Wind),
        }
    }

    /// A well-formed 2-bus, 1-line, 1-thermal system used across unit tests.
    pub fn two_bus_system(horizon: usize) -> SystemModel<f64> {
        let demand = DemandProfile {
            heat_pump: vec![0.0; horizon],
            e_mobility: vec![2.0; horizon],
            hydrogen: vec![0.0; horizon],
            base: vec![8.0; horizon],
        };
        SystemModel {
            nodes: vec![
                BusNode {
                    id: "a".into(),
                    country: "CH".into(),
                    is_slack: true,
                    demand: demand.clone(),
                    shift: ShiftSpec::zero(),
                    exogenous_injection: None,
                },
                BusNode {
                    id: "b".into(),
                    country: "CH".into(),
                    is_slack: false,
                    demand,
                    shift: ShiftSpec::zero(),
                    exogenous_injection: None,
                },
            ],
            lines: vec![TransmissionLine {
                id: "ab".into(),
                from_node: "a".into(),
                to_node: "b".into(),
                susceptance_b: 100.0,
                flow_limit_pmax: 50.0,
                cross_border: false,
            }],
            thermal_units: vec![ThermalUnit {
                id: "gen".into(),
                node: "a".into(),
                technology: ThermalTech::Other,
                p_max: 40.0,
                ramp_up: 40.0,
                ramp_down: 40.0,
                cost_voc: 5.0,
                cost_fuel: 0.0,
                cost_emi: 0.0,
                is_candidate: false,
                inv_cost_annual: 0.0,
                annuity_alpha: 1.0,
                reserve_eligible: ReserveEligibility::none(),
                counts_toward_res_target: false,
                initial_dispatch: None,
            }],
            storage_units: vec![],
            renewable_units: vec![],
            reserve: ReserveSpec::zeros(horizon),
            horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::two_bus_system;
    use super::*;

    #[test]
    fn well_formed_fixture_has_no_violations() {
        let system = two_bus_system(24);
        assert_eq!(validate_system(&system), vec![]);
    }

    #[test]
    fn self_loop_line_is_reported() {
        let mut system = two_bus_system(24);
        system.lines[0].to_node = "a".into();
        let violations = validate_system(&system);
        assert!(
            violations.iter().any(|v| v.entity == "ab" && v.problem.contains("itself")),
            "{violations:?}"
        );
    }

    #[test]
    fn short_profile_is_reported() {
        let mut system = two_bus_system(24);
        system.nodes[1].demand.base.pop();
        let violations = validate_system(&system);
        assert!(
            violations
                .iter()
                .any(|v| v.entity == "b" && v.problem.contains("base demand")),
            "{violations:?}"
        );
    }

    #[test]
    fn missing_slack_is_reported() {
        let mut system = two_bus_system(24);
        system.nodes[0].is_slack = false;
        let violations = validate_system(&system);
        assert!(violations.iter().any(|v| v.problem.contains("slack")));
    }

    #[test]
    fn charging_dam_is_reported() {
        let mut system = two_bus_system(24);
        system.storage_units.push(StorageUnit {
            id: "dam".into(),
            node: "a".into(),
            kind: StorageKind::Dam,
            p_charge_max: 5.0,
            p_discharge_max: 10.0,
            energy_max: 100.0,
            eta_charge: 1.0,
            eta_discharge: 1.0,
            soc_initial: 0.0,
            soc_final_min: 0.0,
            inflow: vec![0.0; 24],
            cost_voc: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: ReserveEligibility::all(),
        });
        let violations = validate_system(&system);
        assert!(violations.iter().any(|v| v.entity == "dam" && v.problem.contains("charge")));
    }

    #[test]
    fn cross_border_flag_must_match_countries() {
        let mut system = two_bus_system(24);
        system.lines[0].cross_border = true; // both endpoints are CH
        let violations = validate_system(&system);
        assert!(violations.iter().any(|v| v.problem.contains("cross_border")));
    }

    #[test]
    fn scenario_config_serde_uses_spec_field_names() {
        let json = r#"{
            "name": "smoke",
            "allow_gas_candidates": false,
            "allow_shifting": true,
            "xborder_scale": 0.3,
            "gas_price_multiplier": 1.5,
            "res_target_B": 100.0,
            "horizon_T": 48,
            "cost_load_shed": 10000.0
        }"#;
        let config: ScenarioConfig<f64> = serde_json::from_str(json).unwrap();
        assert!(!config.allow_gas_candidates);
        assert_eq!(config.horizon_t, 48);
        assert_eq!(config.res_target_b, 100.0);
        assert!(config.validate().is_empty());
    }

    #[test]
    fn scenario_config_defaults_apply() {
        let config: ScenarioConfig<f64> =
            serde_json::from_str(r#"{"name": "d", "horizon_T": 24}"#).unwrap();
        assert!(config.allow_gas_candidates);
        assert_eq!(config.cost_load_shed, 10_000.0);
        assert_eq!(config.xborder_scale, 1.0);
    }

    #[test]
    fn scenario_config_invariants_enforced() {
        let mut config = ScenarioConfig::<f64>::neutral("bad", 24);
        config.xborder_scale = 1.5;
        config.horizon_t = 25;
        let violations = config.validate();
        assert_eq!(violations.len(), 2, "{violations:?}");
    }
}
