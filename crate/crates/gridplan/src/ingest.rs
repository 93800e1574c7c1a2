//! Loading systems and scenario configurations from an input directory,
//! deriving per-node shifting limits from demand data, and applying
//! scenario transformations.
//!
//! Directory layout (CSV with header rows, '.' decimal separator, UTF-8):
//!
//! ```text
//! nodes.csv      id,country,is_slack
//! lines.csv      id,from,to,susceptance_mw_per_rad,limit_mw,cross_border
//! thermal.csv    id,node,tech,pmax_mw,ramp_up_mw_h,ramp_down_mw_h,voc,fuel,emi,
//!                candidate,inv_eur_mw_a,alpha,scr_up,scr_dn,tcr_up,tcr_dn,res_target
//! storage.csv    id,node,kind,pch_mw,pdis_mw,emax_mwh,eta_ch,eta_dis,soc0_mwh,
//!                socmin_end_mwh,voc,candidate,inv_eur_mw_a,alpha
//! renewable.csv  id,node,tech,cap_mw,voc,candidate,inv_eur_mw_a,alpha,res_target
//! scenario.json  baseline ScenarioConfig (also fixes the horizon for length checks)
//! dsm.csv        node,dsm_mw                 (optional; shiftable capacity of other loads)
//! shift.csv      node,e_hr_max,e_day_max,l_hr_max,l_day_max
//!                (optional; overrides the derived shifting limits verbatim)
//! series/        one single-column CSV per hourly series, horizon_T rows:
//!                <node>.base / <node>.heat_pump / <node>.e_mobility / <node>.hydrogen
//!                <node>.exogenous (optional), <renewable>.profile,
//!                <storage>.inflow (optional), reserve.scr_up / .scr_dn /
//!                .tcr_up / .tcr_dn (optional)
//! ```
//!
//! Missing demand-component and requirement series default to zeros; missing
//! availability profiles are errors. Shifting limits default to the derived
//! values: the e-mobility limits from each node's own series (10% of the
//! horizon total, spread over 10 hours) and the other-load limits from
//! `dsm.csv` (up to 3 hours per day).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{
    validate_system, BusNode, DemandProfile, RenewableTech, RenewableUnit, ReserveEligibility,
    ReserveSpec, ScenarioConfig, ShiftSpec, StorageKind, StorageUnit, SystemModel, ThermalTech,
    ThermalUnit, TransmissionLine, Violation,
};
use crate::real::Real;
use crate::text::fmt_sig9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("i/o failure on {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario config {file}: {message}")]
    BadScenario { file: String, message: String },
    #[error("system validation failed:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Daily and hourly e-mobility shifting limits from an annual total.
///
/// The shiftable energy is `share` of the annual demand, distributed evenly
/// over `days`; the hourly limit spreads one day's allowance over
/// `spread_hours`. Returns `(e_day_max, e_hr_max)`.
pub fn derive_emob_shift_limits<S: Real>(
    annual_em_demand: S,
    share: S,
    spread_hours: S,
    days: S,
) -> Result<(S, S), IngestError> {
    if annual_em_demand < S::zero() {
        return Err(IngestError::BadArgument(
            "annual e-mobility demand must be nonnegative".into(),
        ));
    }
    let e_day = share * annual_em_demand / days;
    let e_hr = e_day / spread_hours;
    Ok((e_day, e_hr))
}

/// Default parameters of [`derive_emob_shift_limits`]: 10% of the annual
/// total, spread over 10 hours, 365 days.
pub fn emob_defaults<S: Real>() -> (S, S, S) {
    (
        S::from_f64_lossy(0.10),
        S::from_f64_lossy(10.0),
        S::from_f64_lossy(365.0),
    )
}

/// Hourly and daily limits for shifting the other loads: the hourly limit
/// equals the shiftable capacity, the daily energy allows `hours_per_day`
/// hours of it. Returns `(l_hr_max, l_day_max)`.
pub fn derive_dsm_shift_limits<S: Real>(
    dsm_capacity: S,
    hours_per_day: S,
) -> Result<(S, S), IngestError> {
    if dsm_capacity < S::zero() {
        return Err(IngestError::BadArgument(
            "shiftable capacity must be nonnegative".into(),
        ));
    }
    Ok((dsm_capacity, hours_per_day * dsm_capacity))
}

/// Total nodal demand at hour `t`: heat pump + e-mobility + hydrogen + base.
pub fn compose_demand<S: Real>(profile: &DemandProfile<S>, t: usize) -> Result<S, IngestError> {
    if t >= profile.base.len() {
        return Err(IngestError::BadArgument(format!(
            "hour {t} outside horizon {}",
            profile.base.len()
        )));
    }
    Ok(profile.total_at(t))
}

/// Capital-recovery factor turning a total investment cost into an annual
/// one: `rate = 0` degenerates to straight-line `1/lifetime`.
pub fn annuity_factor<S: Real>(rate: S, lifetime: u32) -> Result<S, IngestError> {
    if lifetime < 1 {
        return Err(IngestError::BadArgument(
            "lifetime must be at least one year".into(),
        ));
    }
    if rate < S::zero() {
        return Err(IngestError::BadArgument("rate must be nonnegative".into()));
    }
    if rate == S::zero() {
        return Ok(S::one() / S::from_f64_lossy(lifetime as f64));
    }
    let growth = (S::one() + rate).powi(lifetime as i32);
    Ok(rate * growth / (growth - S::one()))
}

/// Applies one scenario's transformations, leaving the input untouched:
/// drops gas candidates, zeroes shifting limits, rescales cross-border line
/// limits and multiplies gas fuel prices.
pub fn apply_scenario<S: Real>(
    system: &SystemModel<S>,
    config: &ScenarioConfig<S>,
) -> SystemModel<S> {
    let mut out = system.clone();
    if !config.allow_gas_candidates {
        out.thermal_units
            .retain(|u| !(u.is_candidate && u.technology.is_gas()));
    }
    if !config.allow_shifting {
        for node in &mut out.nodes {
            node.shift = ShiftSpec::zero();
        }
    }
    for line in &mut out.lines {
        if line.cross_border {
            line.flow_limit_pmax *= config.xborder_scale;
        }
    }
    for unit in &mut out.thermal_units {
        if unit.technology.is_gas() {
            unit.cost_fuel *= config.gas_price_multiplier;
        }
    }
    out
}

/// Loads the baseline scenario config of an input directory.
pub fn load_scenario<S: Real>(path: impl AsRef<Path>) -> Result<ScenarioConfig<S>, IngestError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let config: ScenarioConfig<S> =
        serde_json::from_str(&text).map_err(|e| IngestError::BadScenario {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(IngestError::BadScenario {
            file: path.display().to_string(),
            message: format_violations(&violations),
        });
    }
    Ok(config)
}

/// Loads an ordered scenario list (`scenario-matrix.json`).
pub fn load_scenario_list<S: Real>(
    path: impl AsRef<Path>,
) -> Result<Vec<ScenarioConfig<S>>, IngestError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let configs: Vec<ScenarioConfig<S>> =
        serde_json::from_str(&text).map_err(|e| IngestError::BadScenario {
            file: path.display().to_string(),
            message: e.to_string(),
        })?;
    for config in &configs {
        let violations = config.validate();
        if !violations.is_empty() {
            return Err(IngestError::BadScenario {
                file: path.display().to_string(),
                message: format!("{}: {}", config.name, format_violations(&violations)),
            });
        }
    }
    Ok(configs)
}

/// Loads and validates a full system from `dir`.
pub fn load_system<S: Real>(dir: impl AsRef<Path>) -> Result<SystemModel<S>, IngestError> {
    let dir = dir.as_ref();
    let scenario: ScenarioConfig<S> = load_scenario(dir.join("scenario.json"))?;
    let horizon = scenario.horizon_t;
    let series_dir = dir.join("series");

    let nodes_raw = read_table(&dir.join("nodes.csv"), &["id", "country", "is_slack"])?;
    let mut node_ids: HashSet<String> = HashSet::new();
    let mut nodes: Vec<BusNode<S>> = Vec::new();
    for row in nodes_raw.rows() {
        let id = row.str("id")?.to_string();
        if !node_ids.insert(id.clone()) {
            return Err(row.error(format!("duplicate node id {id:?}")));
        }
        nodes.push(BusNode {
            id: id.clone(),
            country: row.str("country")?.to_string(),
            is_slack: row.flag("is_slack")?,
            demand: DemandProfile::zeros(0), // filled below from series
            shift: ShiftSpec::zero(),
            exogenous_injection: None,
        });
    }

    let check_node = |row: &Row<'_>, field: &str| -> Result<String, IngestError> {
        let id = row.str(field)?.to_string();
        if node_ids.contains(&id) {
            Ok(id)
        } else {
            Err(row.error(format!("unknown node id {id:?} in column {field}")))
        }
    };

    let lines_raw = read_table(
        &dir.join("lines.csv"),
        &["id", "from", "to", "susceptance_mw_per_rad", "limit_mw", "cross_border"],
    )?;
    let mut lines = Vec::new();
    for row in lines_raw.rows() {
        lines.push(TransmissionLine {
            id: row.str("id")?.to_string(),
            from_node: check_node(&row, "from")?,
            to_node: check_node(&row, "to")?,
            susceptance_b: row.scalar("susceptance_mw_per_rad")?,
            flow_limit_pmax: row.scalar("limit_mw")?,
            cross_border: row.flag("cross_border")?,
        });
    }

    let thermal_raw = read_table(
        &dir.join("thermal.csv"),
        &[
            "id", "node", "tech", "pmax_mw", "ramp_up_mw_h", "ramp_down_mw_h", "voc", "fuel",
            "emi", "candidate", "inv_eur_mw_a", "alpha", "scr_up", "scr_dn", "tcr_up", "tcr_dn",
            "res_target",
        ],
    )?;
    let mut thermal_units = Vec::new();
    for row in thermal_raw.rows() {
        let tech_token = row.str("tech")?;
        let technology = ThermalTech::parse(tech_token)
            .ok_or_else(|| row.error(format!("unknown thermal tech {tech_token:?}")))?;
        thermal_units.push(ThermalUnit {
            id: row.str("id")?.to_string(),
            node: check_node(&row, "node")?,
            technology,
            p_max: row.scalar("pmax_mw")?,
            ramp_up: row.scalar("ramp_up_mw_h")?,
            ramp_down: row.scalar("ramp_down_mw_h")?,
            cost_voc: row.scalar("voc")?,
            cost_fuel: row.scalar("fuel")?,
            cost_emi: row.scalar("emi")?,
            is_candidate: row.flag("candidate")?,
            inv_cost_annual: row.scalar("inv_eur_mw_a")?,
            annuity_alpha: row.scalar("alpha")?,
            reserve_eligible: ReserveEligibility {
                scr_up: row.flag("scr_up")?,
                scr_down: row.flag("scr_dn")?,
                tcr_up: row.flag("tcr_up")?,
                tcr_down: row.flag("tcr_dn")?,
            },
            counts_toward_res_target: row.flag("res_target")?,
            initial_dispatch: None,
        });
    }

    let storage_raw = read_table(
        &dir.join("storage.csv"),
        &[
            "id", "node", "kind", "pch_mw", "pdis_mw", "emax_mwh", "eta_ch", "eta_dis",
            "soc0_mwh", "socmin_end_mwh", "voc", "candidate", "inv_eur_mw_a", "alpha",
        ],
    )?;
    let mut storage_units: Vec<StorageUnit<S>> = Vec::new();
    for row in storage_raw.rows() {
        let kind_token = row.str("kind")?;
        let kind = StorageKind::parse(kind_token)
            .ok_or_else(|| row.error(format!("unknown storage kind {kind_token:?}")))?;
        let id = row.str("id")?.to_string();
        let inflow = load_optional_series(&series_dir, &format!("{id}.inflow"), horizon)?
            .unwrap_or_else(|| vec![S::zero(); horizon]);
        storage_units.push(StorageUnit {
            id,
            node: check_node(&row, "node")?,
            kind,
            p_charge_max: row.scalar("pch_mw")?,
            p_discharge_max: row.scalar("pdis_mw")?,
            energy_max: row.scalar("emax_mwh")?,
            eta_charge: row.scalar("eta_ch")?,
            eta_discharge: row.scalar("eta_dis")?,
            soc_initial: row.scalar("soc0_mwh")?,
            soc_final_min: row.scalar("socmin_end_mwh")?,
            inflow,
            cost_voc: row.scalar("voc")?,
            is_candidate: row.flag("candidate")?,
            inv_cost_annual: row.scalar("inv_eur_mw_a")?,
            annuity_alpha: row.scalar("alpha")?,
            // participation is not part of the file schema; storages join
            // all products unless configured otherwise in code
            reserve_eligible: ReserveEligibility::all(),
        });
    }

    let renewable_raw = read_table(
        &dir.join("renewable.csv"),
        &["id", "node", "tech", "cap_mw", "voc", "candidate", "inv_eur_mw_a", "alpha", "res_target"],
    )?;
    let mut renewable_units = Vec::new();
    for row in renewable_raw.rows() {
        let tech_token = row.str("tech")?;
        let technology = RenewableTech::parse(tech_token)
            .ok_or_else(|| row.error(format!("unknown renewable tech {tech_token:?}")))?;
        let id = row.str("id")?.to_string();
        let profile = load_series(&series_dir, &format!("{id}.profile"), horizon)?;
        renewable_units.push(RenewableUnit {
            id,
            node: check_node(&row, "node")?,
            technology,
            capacity: row.scalar("cap_mw")?,
            profile,
            cost_voc: row.scalar("voc")?,
            is_candidate: row.flag("candidate")?,
            inv_cost_annual: row.scalar("inv_eur_mw_a")?,
            annuity_alpha: row.scalar("alpha")?,
            counts_toward_res_target: row.flag("res_target")?,
        });
    }

    // demand components and exogenous injections per node
    for node in &mut nodes {
        let comp = |name: &str| -> Result<Vec<S>, IngestError> {
            Ok(
                load_optional_series(&series_dir, &format!("{}.{name}", node.id), horizon)?
                    .unwrap_or_else(|| vec![S::zero(); horizon]),
            )
        };
        node.demand = DemandProfile {
            heat_pump: comp("heat_pump")?,
            e_mobility: comp("e_mobility")?,
            hydrogen: comp("hydrogen")?,
            base: comp("base")?,
        };
        node.exogenous_injection =
            load_optional_series(&series_dir, &format!("{}.exogenous", node.id), horizon)?;
    }

    let reserve = ReserveSpec {
        req_scr_up: load_optional_series(&series_dir, "reserve.scr_up", horizon)?
            .unwrap_or_else(|| vec![S::zero(); horizon]),
        req_scr_down: load_optional_series(&series_dir, "reserve.scr_dn", horizon)?
            .unwrap_or_else(|| vec![S::zero(); horizon]),
        req_tcr_up: load_optional_series(&series_dir, "reserve.tcr_up", horizon)?
            .unwrap_or_else(|| vec![S::zero(); horizon]),
        req_tcr_down: load_optional_series(&series_dir, "reserve.tcr_dn", horizon)?
            .unwrap_or_else(|| vec![S::zero(); horizon]),
    };

    // shifting limits: explicit shift.csv wins, otherwise derived
    let shift_path = dir.join("shift.csv");
    if shift_path.exists() {
        let shift_raw = read_table(
            &shift_path,
            &["node", "e_hr_max", "e_day_max", "l_hr_max", "l_day_max"],
        )?;
        let mut by_node: HashMap<String, ShiftSpec<S>> = HashMap::new();
        for row in shift_raw.rows() {
            let node = check_node(&row, "node")?;
            by_node.insert(
                node,
                ShiftSpec {
                    e_hr_max: row.scalar("e_hr_max")?,
                    e_day_max: row.scalar("e_day_max")?,
                    l_hr_max: row.scalar("l_hr_max")?,
                    l_day_max: row.scalar("l_day_max")?,
                },
            );
        }
        for node in &mut nodes {
            if let Some(spec) = by_node.get(&node.id) {
                node.shift = *spec;
            }
        }
    } else {
        let mut dsm_by_node: HashMap<String, S> = HashMap::new();
        let dsm_path = dir.join("dsm.csv");
        if dsm_path.exists() {
            for row in read_table(&dsm_path, &["node", "dsm_mw"])?.rows() {
                dsm_by_node.insert(check_node(&row, "node")?, row.scalar("dsm_mw")?);
            }
        }
        let days = S::from_f64_lossy((horizon as f64 / 24.0).max(1.0));
        let (share, spread, _) = emob_defaults::<S>();
        for node in &mut nodes {
            let em_total: S = node.demand.e_mobility.iter().copied().sum();
            let (e_day, e_hr) =
                derive_emob_shift_limits(em_total.max(S::zero()), share, spread, days)?;
            let dsm = dsm_by_node.get(&node.id).copied().unwrap_or_else(S::zero);
            let (l_hr, l_day) = derive_dsm_shift_limits(dsm, S::from_f64_lossy(3.0))?;
            node.shift = ShiftSpec {
                e_hr_max: e_hr,
                e_day_max: e_day,
                l_hr_max: l_hr,
                l_day_max: l_day,
            };
        }
    }

    let system = SystemModel {
        nodes,
        lines,
        thermal_units,
        storage_units,
        renewable_units,
        reserve,
        horizon,
    };
    let violations = validate_system(&system);
    if !violations.is_empty() {
        return Err(IngestError::Validation(violations));
    }
    Ok(system)
}

/// Writes a system (plus a neutral `scenario.json`) into `dir` using the
/// same layout [`load_system`] reads. Numbers are written with nine
/// significant digits.
pub fn write_system<S: Real>(
    dir: impl AsRef<Path>,
    system: &SystemModel<S>,
) -> Result<(), IngestError> {
    let dir = dir.as_ref();
    let series_dir = dir.join("series");
    fs::create_dir_all(&series_dir).map_err(|e| IngestError::Io {
        file: series_dir.display().to_string(),
        source: e,
    })?;

    let n = |v: S| fmt_sig9(v.to_f64().unwrap_or(f64::NAN));
    let b = |v: bool| if v { "true" } else { "false" };

    let mut nodes = String::from("id,country,is_slack\n");
    for node in &system.nodes {
        nodes.push_str(&format!("{},{},{}\n", node.id, node.country, b(node.is_slack)));
    }
    write_file(&dir.join("nodes.csv"), &nodes)?;

    let mut lines = String::from("id,from,to,susceptance_mw_per_rad,limit_mw,cross_border\n");
    for line in &system.lines {
        lines.push_str(&format!(
            "{},{},{},{},{},{}\n",
            line.id,
            line.from_node,
            line.to_node,
            n(line.susceptance_b),
            n(line.flow_limit_pmax),
            b(line.cross_border)
        ));
    }
    write_file(&dir.join("lines.csv"), &lines)?;

    let mut thermal = String::from(
        "id,node,tech,pmax_mw,ramp_up_mw_h,ramp_down_mw_h,voc,fuel,emi,candidate,inv_eur_mw_a,alpha,scr_up,scr_dn,tcr_up,tcr_dn,res_target\n",
    );
    for u in &system.thermal_units {
        thermal.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            u.id,
            u.node,
            u.technology.token(),
            n(u.p_max),
            n(u.ramp_up),
            n(u.ramp_down),
            n(u.cost_voc),
            n(u.cost_fuel),
            n(u.cost_emi),
            b(u.is_candidate),
            n(u.inv_cost_annual),
            n(u.annuity_alpha),
            b(u.reserve_eligible.scr_up),
            b(u.reserve_eligible.scr_down),
            b(u.reserve_eligible.tcr_up),
            b(u.reserve_eligible.tcr_down),
            b(u.counts_toward_res_target)
        ));
    }
    write_file(&dir.join("thermal.csv"), &thermal)?;

    let mut storage = String::from(
        "id,node,kind,pch_mw,pdis_mw,emax_mwh,eta_ch,eta_dis,soc0_mwh,socmin_end_mwh,voc,candidate,inv_eur_mw_a,alpha\n",
    );
    for u in &system.storage_units {
        storage.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            u.id,
            u.node,
            u.kind.token(),
            n(u.p_charge_max),
            n(u.p_discharge_max),
            n(u.energy_max),
            n(u.eta_charge),
            n(u.eta_discharge),
            n(u.soc_initial),
            n(u.soc_final_min),
            n(u.cost_voc),
            b(u.is_candidate),
            n(u.inv_cost_annual),
            n(u.annuity_alpha)
        ));
        write_series(&series_dir, &format!("{}.inflow", u.id), &u.inflow)?;
    }
    write_file(&dir.join("storage.csv"), &storage)?;

    let mut renewable =
        String::from("id,node,tech,cap_mw,voc,candidate,inv_eur_mw_a,alpha,res_target\n");
    for u in &system.renewable_units {
        renewable.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            u.id,
            u.node,
            u.technology.token(),
            n(u.capacity),
            n(u.cost_voc),
            b(u.is_candidate),
            n(u.inv_cost_annual),
            n(u.annuity_alpha),
            b(u.counts_toward_res_target)
        ));
        write_series(&series_dir, &format!("{}.profile", u.id), &u.profile)?;
    }
    write_file(&dir.join("renewable.csv"), &renewable)?;

    let mut shift = String::from("node,e_hr_max,e_day_max,l_hr_max,l_day_max\n");
    for node in &system.nodes {
        write_series(&series_dir, &format!("{}.heat_pump", node.id), &node.demand.heat_pump)?;
        write_series(&series_dir, &format!("{}.e_mobility", node.id), &node.demand.e_mobility)?;
        write_series(&series_dir, &format!("{}.hydrogen", node.id), &node.demand.hydrogen)?;
        write_series(&series_dir, &format!("{}.base", node.id), &node.demand.base)?;
        if let Some(exo) = &node.exogenous_injection {
            write_series(&series_dir, &format!("{}.exogenous", node.id), exo)?;
        }
        shift.push_str(&format!(
            "{},{},{},{},{}\n",
            node.id,
            n(node.shift.e_hr_max),
            n(node.shift.e_day_max),
            n(node.shift.l_hr_max),
            n(node.shift.l_day_max)
        ));
    }
    write_file(&dir.join("shift.csv"), &shift)?;

    write_series(&series_dir, "reserve.scr_up", &system.reserve.req_scr_up)?;
    write_series(&series_dir, "reserve.scr_dn", &system.reserve.req_scr_down)?;
    write_series(&series_dir, "reserve.tcr_up", &system.reserve.req_tcr_up)?;
    write_series(&series_dir, "reserve.tcr_dn", &system.reserve.req_tcr_down)?;

    let scenario = ScenarioConfig::<S>::neutral("written", system.horizon);
    let text = serde_json::to_string_pretty(&scenario).expect("config serializes");
    write_file(&dir.join("scenario.json"), &text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV plumbing

struct Table {
    file: String,
    header_index: HashMap<String, usize>,
    records: Vec<(usize, csv::StringRecord)>,
}

struct Row<'a> {
    table: &'a Table,
    line: usize,
    record: &'a csv::StringRecord,
}

impl Table {
    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.records.iter().map(move |(line, record)| Row {
            table: self,
            line: *line,
            record,
        })
    }
}

impl<'a> Row<'a> {
    fn error(&self, message: impl Into<String>) -> IngestError {
        IngestError::Malformed {
            file: self.table.file.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn str(&self, field: &str) -> Result<&'a str, IngestError> {
        let &idx = self
            .table
            .header_index
            .get(field)
            .ok_or_else(|| self.error(format!("missing column {field:?}")))?;
        self.record
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| self.error(format!("row too short for column {field:?}")))
    }

    fn scalar<S: Real>(&self, field: &str) -> Result<S, IngestError> {
        let raw = self.str(field)?;
        raw.parse::<f64>()
            .map(S::from_f64_lossy)
            .map_err(|_| self.error(format!("bad number {raw:?} in column {field:?}")))
    }

    fn flag(&self, field: &str) -> Result<bool, IngestError> {
        let raw = self.str(field)?;
        match raw.to_ascii_lowercase().as_str() {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            _ => Err(self.error(format!("bad flag {raw:?} in column {field:?}"))),
        }
    }
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    if !path.exists() {
        return Err(IngestError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| IngestError::Io {
        file: path.display().to_string(),
        source: e,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), IngestError> {
    fs::write(path, text).map_err(|e| IngestError::Io {
        file: path.display().to_string(),
        source: e,
    })
}

fn read_table(path: &Path, required: &[&str]) -> Result<Table, IngestError> {
    let text = read_file(path)?;
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Malformed {
            file: file.clone(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut header_index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        header_index.insert(h.trim().to_string(), i);
    }
    for field in required {
        if !header_index.contains_key(*field) {
            return Err(IngestError::Malformed {
                file,
                line: 1,
                message: format!("missing required column {field:?}"),
            });
        }
    }
    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| IngestError::Malformed {
            file: file.clone(),
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or_default(),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        records.push((line, record));
    }
    Ok(Table {
        file,
        header_index,
        records,
    })
}

fn load_series<S: Real>(
    series_dir: &Path,
    name: &str,
    horizon: usize,
) -> Result<Vec<S>, IngestError> {
    load_optional_series(series_dir, name, horizon)?
        .ok_or_else(|| IngestError::MissingFile(series_dir.join(format!("{name}.csv"))))
}

fn load_optional_series<S: Real>(
    series_dir: &Path,
    name: &str,
    horizon: usize,
) -> Result<Option<Vec<S>>, IngestError> {
    let path = series_dir.join(format!("{name}.csv"));
    if !path.exists() {
        return Ok(None);
    }
    let table = read_table(&path, &[])?;
    let mut out = Vec::with_capacity(horizon);
    for (line, record) in &table.records {
        let raw = record.get(0).unwrap_or("").trim();
        let value = raw.parse::<f64>().map(S::from_f64_lossy).map_err(|_| {
            IngestError::Malformed {
                file: table.file.clone(),
                line: *line,
                message: format!("bad number {raw:?}"),
            }
        })?;
        out.push(value);
    }
    Ok(Some(out))
}

fn write_series<S: Real>(series_dir: &Path, name: &str, values: &[S]) -> Result<(), IngestError> {
    let mut text = String::from("value\n");
    for v in values {
        text.push_str(&fmt_sig9(v.to_f64().unwrap_or(f64::NAN)));
        text.push('\n');
    }
    write_file(&series_dir.join(format!("{name}.csv")), &text)
}
