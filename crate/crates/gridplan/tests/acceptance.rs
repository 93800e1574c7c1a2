//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured figures. Run with `cargo test --test acceptance`
//! (`-- --nocapture` to see the lines).

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gridplan::formulation::{audit::audit_solution, build_lp};
use gridplan::ingest::{
    apply_scenario, derive_emob_shift_limits, emob_defaults, load_scenario_list, load_system,
};
use gridplan::model::{
    BusNode, DemandProfile, ReserveSpec, ScenarioConfig, ShiftSpec, SystemModel, ThermalTech,
    ThermalUnit, TransmissionLine,
};
use gridplan::scenarios::{gas_price_sweep, run_scenario_full, ScenarioRun};
use linprog::reference::{enumerate_solve, random_lp, ReferenceOutcome, SplitMix64};
use linprog::{solve, SolveOptions, Status};

fn desk_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/desk")
}

/// The four-scenario desk matrix, solved once and shared by criteria 4/7/8.
fn desk_matrix() -> &'static (Vec<ScenarioRun<f64>>, Duration) {
    static RUNS: OnceLock<(Vec<ScenarioRun<f64>>, Duration)> = OnceLock::new();
    RUNS.get_or_init(|| {
        let system = load_system::<f64>(desk_dir()).expect("desk fixture loads");
        let configs =
            load_scenario_list::<f64>(desk_dir().join("scenario-matrix.json")).expect("configs");
        let started = Instant::now();
        let runs: Vec<ScenarioRun<f64>> = configs
            .iter()
            .map(|c| run_scenario_full(&system, c).expect("scenario solves"))
            .collect();
        (runs, started.elapsed())
    })
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[test]
fn criterion_01_simplex_matches_enumeration_oracle() {
    let started = Instant::now();
    let mut optimal = 0;
    let mut infeasible = 0;
    for seed in 0..40u64 {
        let mut rng = SplitMix64(seed.wrapping_mul(0x9E37_79B9) + 7);
        let lp = random_lp::<f64>(&mut rng, 8, 6);
        let reference = enumerate_solve(&lp);
        let sol = solve(&lp, &SolveOptions::default());
        match reference {
            ReferenceOutcome::Infeasible => {
                assert_eq!(sol.status, Status::Infeasible, "seed {seed}");
                infeasible += 1;
            }
            ReferenceOutcome::Optimal { objective, .. } => {
                assert_eq!(sol.status, Status::Optimal, "seed {seed}");
                let tol = 1e-6 * (1.0 + objective.abs());
                assert!(
                    (sol.objective - objective).abs() <= tol,
                    "seed {seed}: {} vs oracle {objective}",
                    sol.objective
                );
                optimal += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(optimal + infeasible >= 20, "need at least 20 problems");
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "PASS criterion 1: oracle equivalence on {optimal} optimal + {infeasible} infeasible random LPs in {elapsed:?}"
    );
}

/// 1 node, 24 h, 10 MW base plus one 20 MW hour against a 15 MW unit at
/// 10 EUR/MWh and shedding at 10'000 EUR/MWh.
fn micro_instance(shifting: bool) -> (SystemModel<f64>, ScenarioConfig<f64>) {
    let horizon = 24;
    let mut base = vec![0.0; horizon];
    base[12] = 10.0;
    let shift = if shifting {
        ShiftSpec {
            e_hr_max: 5.0,
            e_day_max: 10.0,
            l_hr_max: 0.0,
            l_day_max: 0.0,
        }
    } else {
        ShiftSpec::zero()
    };
    let system = SystemModel {
        nodes: vec![BusNode {
            id: "n1".into(),
            country: "CH".into(),
            is_slack: true,
            demand: DemandProfile {
                heat_pump: vec![0.0; horizon],
                e_mobility: vec![10.0; horizon],
                hydrogen: vec![0.0; horizon],
                base,
            },
            shift,
            exogenous_injection: None,
        }],
        lines: vec![],
        thermal_units: vec![ThermalUnit {
            id: "gen".into(),
            node: "n1".into(),
            technology: ThermalTech::Other,
            p_max: 15.0,
            ramp_up: 15.0,
            ramp_down: 15.0,
            cost_voc: 10.0,
            cost_fuel: 0.0,
            cost_emi: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: Default::default(),
            counts_toward_res_target: false,
            initial_dispatch: None,
        }],
        storage_units: vec![],
        renewable_units: vec![],
        reserve: ReserveSpec::zeros(horizon),
        horizon,
    };
    let config = ScenarioConfig::neutral("micro", horizon);
    (system, config)
}

#[test]
fn criterion_02_hand_solved_expansion_micro_instance() {
    let (unshifted, config) = micro_instance(false);
    let run = run_scenario_full(&unshifted, &config).unwrap();
    let expected = 10.0 * (23.0 * 10.0 + 15.0) + 10_000.0 * 5.0;
    assert!(
        rel_gap(run.result.solution.objective, expected) <= 1e-6,
        "{} vs {expected}",
        run.result.solution.objective
    );

    let (shifted, config) = micro_instance(true);
    let run = run_scenario_full(&shifted, &config).unwrap();
    let expected_shifted = 10.0 * 250.0;
    assert!(
        rel_gap(run.result.solution.objective, expected_shifted) <= 1e-6,
        "{} vs {expected_shifted}",
        run.result.solution.objective
    );
    let shed: f64 = run.result.load_shed_total.values().sum();
    assert!(shed < 1e-9, "shifting must eliminate shedding");
    println!(
        "PASS criterion 2: micro instance objectives {expected} (no shift) and {expected_shifted} (shift) reproduced"
    );
}

#[test]
fn criterion_03_dc_flow_triangle_split() {
    let horizon = 1;
    let node = |id: &str, slack: bool, base: f64| BusNode {
        id: id.into(),
        country: "CH".into(),
        is_slack: slack,
        demand: DemandProfile {
            heat_pump: vec![0.0],
            e_mobility: vec![0.0],
            hydrogen: vec![0.0],
            base: vec![base],
        },
        shift: ShiftSpec::zero(),
        exogenous_injection: None,
    };
    let line = |id: &str, from: &str, to: &str| TransmissionLine {
        id: id.into(),
        from_node: from.into(),
        to_node: to.into(),
        susceptance_b: 100.0,
        flow_limit_pmax: 100.0,
        cross_border: false,
    };
    let system = SystemModel {
        nodes: vec![node("n1", true, 0.0), node("n2", false, 0.0), node("n3", false, 30.0)],
        lines: vec![line("l12", "n1", "n2"), line("l13", "n1", "n3"), line("l23", "n2", "n3")],
        thermal_units: vec![ThermalUnit {
            id: "gen".into(),
            node: "n1".into(),
            technology: ThermalTech::Other,
            p_max: 30.0,
            ramp_up: 30.0,
            ramp_down: 30.0,
            cost_voc: 1.0,
            cost_fuel: 0.0,
            cost_emi: 0.0,
            is_candidate: false,
            inv_cost_annual: 0.0,
            annuity_alpha: 1.0,
            reserve_eligible: Default::default(),
            counts_toward_res_target: false,
            initial_dispatch: None,
        }],
        storage_units: vec![],
        renewable_units: vec![],
        reserve: ReserveSpec::zeros(horizon),
        horizon,
    };
    let config = ScenarioConfig::neutral("triangle", 24);
    let (lp, index) = build_lp(&system, &config);
    let sol = solve(&lp, &SolveOptions::default());
    assert_eq!(sol.status, Status::Optimal);
    let theta = |id: &str| {
        let n = system.node_index(id).unwrap();
        let no = index.node_order.iter().position(|&x| x == n).unwrap();
        sol.values[index.theta(no, 0)]
    };
    let direct = 100.0 * (theta("n1") - theta("n3"));
    let around = 100.0 * (theta("n1") - theta("n2"));
    assert!((direct - 20.0).abs() <= 1e-6, "direct flow {direct}");
    assert!((around - 10.0).abs() <= 1e-6, "detour flow {around}");
    println!("PASS criterion 3: 30 MW transfer splits {direct:.6}/{around:.6} over the triangle");
}

#[test]
fn criterion_04_flexibility_monotonicity_on_desk_matrix() {
    let (runs, elapsed) = desk_matrix();
    let objective = |name: &str| {
        runs.iter()
            .find(|r| r.result.config.name == name)
            .unwrap_or_else(|| panic!("scenario {name} in matrix"))
            .result
            .solution
            .objective
    };
    let (ngns, ngws, wgns, wgws) = (
        objective("NGNS"),
        objective("NGWS"),
        objective("WGNS"),
        objective("WGWS"),
    );
    let slack = |a: f64| 1e-6 * (1.0 + a.abs());
    assert!(ngns >= ngws - slack(ngns), "NGNS {ngns} >= NGWS {ngws}");
    assert!(ngws >= wgws - slack(ngws), "NGWS {ngws} >= WGWS {wgws}");
    assert!(ngns >= wgns - slack(ngns), "NGNS {ngns} >= WGNS {wgns}");
    assert!(
        *elapsed < Duration::from_secs(30),
        "matrix took {elapsed:?}"
    );
    println!(
        "PASS criterion 4: objectives NGNS {ngns:.0} >= NGWS {ngws:.0} >= WGWS {wgws:.0}, NGNS >= WGNS {wgns:.0} in {elapsed:?}"
    );
}

#[test]
fn criterion_05_reduced_cross_border_raises_cost_and_shedding() {
    let system = load_system::<f64>(desk_dir()).unwrap();
    let mut full = ScenarioConfig::neutral("NGNS-full", system.horizon);
    full.allow_gas_candidates = false;
    full.allow_shifting = false;
    full.res_target_b = 1700.0;
    let mut reduced = full.clone();
    reduced.name = "NGNS-reduced".into();
    reduced.xborder_scale = 0.3;

    let full_run = run_scenario_full(&system, &full).unwrap();
    let reduced_run = run_scenario_full(&system, &reduced).unwrap();
    let obj_full = full_run.result.solution.objective;
    let obj_reduced = reduced_run.result.solution.objective;
    assert!(
        obj_reduced >= obj_full - 1e-6 * (1.0 + obj_full.abs()),
        "{obj_reduced} vs {obj_full}"
    );
    let shed = |run: &ScenarioRun<f64>| run.result.load_shed_total.get("CH").copied().unwrap_or(0.0);
    assert!(
        shed(&reduced_run) >= shed(&full_run) - 1e-9,
        "CH shed {} vs {}",
        shed(&reduced_run),
        shed(&full_run)
    );
    println!(
        "PASS criterion 5: xborder 0.3 raises objective {obj_full:.0} -> {obj_reduced:.0}, CH shed {:.3} -> {:.3} GWh",
        shed(&full_run),
        shed(&reduced_run)
    );
}

#[test]
fn criterion_06_gas_price_sweep_directions() {
    let system = load_system::<f64>(desk_dir()).unwrap();
    let mut config = ScenarioConfig::neutral("WGWS-sweep", system.horizon);
    config.res_target_b = 1700.0;
    let rows = gas_price_sweep(&system, &config, &[1.0, 1.25, 1.5, 1.75, 2.0]).unwrap();
    assert_eq!(rows.len(), 5);
    for pair in rows.windows(2) {
        assert!(
            pair[1].objective >= pair[0].objective - 1e-6 * (1.0 + pair[0].objective.abs()),
            "objective fell: {} -> {}",
            pair[0].objective,
            pair[1].objective
        );
        assert!(
            pair[1].gas_energy_mwh <= pair[0].gas_energy_mwh + 1e-6,
            "gas energy rose: {} -> {}",
            pair[0].gas_energy_mwh,
            pair[1].gas_energy_mwh
        );
    }
    println!(
        "PASS criterion 6: objective {:.0} -> {:.0} nondecreasing, gas energy {:.0} -> {:.0} MWh nonincreasing",
        rows[0].objective,
        rows[4].objective,
        rows[0].gas_energy_mwh,
        rows[4].gas_energy_mwh
    );
}

#[test]
fn criterion_07_constraint_residual_audit() {
    let (runs, _) = desk_matrix();
    for run in runs {
        let report = audit_solution(
            &run.system,
            &run.result.config,
            &run.index,
            &run.result.solution.values,
        );
        let nodal_tol = 1e-6 * report.max_demand.max(1.0);
        assert!(
            report.max_nodal_imbalance <= nodal_tol,
            "{}: nodal {report:?}",
            run.result.config.name
        );
        assert!(report.max_line_overflow <= 1e-6, "{report:?}");
        assert!(report.max_daily_shift_imbalance <= 1e-6, "{report:?}");
        assert!(report.max_soc_error <= 1e-6, "{report:?}");
        assert!(
            report.res_target_surplus >= -1e-6,
            "target missed: {report:?}"
        );
    }
    println!(
        "PASS criterion 7: residual audit clean on {} scenario solutions",
        runs.len()
    );
}

#[test]
fn criterion_08_objective_decomposition() {
    let (runs, _) = desk_matrix();
    for run in runs {
        let total: f64 = run.result.solution.term_breakdown.iter().sum();
        let objective = run.result.solution.objective;
        assert!(
            rel_gap(total, objective) <= 1e-6,
            "{}: terms {total} vs objective {objective}",
            run.result.config.name
        );
    }
    // and on the micro fixtures
    for shifting in [false, true] {
        let (system, config) = micro_instance(shifting);
        let run = run_scenario_full(&system, &config).unwrap();
        let total: f64 = run.result.solution.term_breakdown.iter().sum();
        assert!(rel_gap(total, run.result.solution.objective) <= 1e-6);
    }
    println!(
        "PASS criterion 8: five-term breakdown reproduces the objective on {} solves",
        runs.len() + 2
    );
}

#[test]
fn criterion_09_mps_round_trip_on_desk_fixture() {
    let system = load_system::<f64>(desk_dir()).unwrap();
    let config = ScenarioConfig::neutral("mps", system.horizon);
    let applied = apply_scenario(&system, &config);
    let (lp, _) = build_lp(&applied, &config);
    let direct = solve(&lp, &SolveOptions::default());
    assert_eq!(direct.status, Status::Optimal);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desk.mps");
    linprog::write_mps(&lp, &path, linprog::MpsFormat::Fixed).unwrap();
    let imported: linprog::LinearProgram<f64> = linprog::read_mps(&path).unwrap();
    let again = solve(&imported, &SolveOptions::default());
    assert_eq!(again.status, Status::Optimal);
    let gap = (again.objective - direct.objective).abs() / (1.0 + direct.objective.abs());
    assert!(gap <= 1e-9, "round trip drifted by {gap}");
    println!(
        "PASS criterion 9: MPS round trip objective {:.6} matches direct solve within {gap:.2e}",
        again.objective
    );
}

#[test]
fn criterion_10_shift_limit_derivation_scale() {
    let (share, spread, days) = emob_defaults::<f64>();
    let (e_day, e_hr) = derive_emob_shift_limits(30_400_000.0, share, spread, days).unwrap();
    assert!((e_day - 8328.767).abs() < 5e-4, "E_day {e_day}");
    assert!((e_hr - 832.877).abs() < 5e-4, "E_hr {e_hr}");
    println!("PASS criterion 10: 30.4 TWh/a of e-mobility -> {e_day:.3} MWh/day, {e_hr:.3} MW");
}
