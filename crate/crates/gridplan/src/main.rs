use std::collections::BTreeSet;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use gridplan::formulation::{build_lp, VariableIndex};
use gridplan::ingest::{apply_scenario, load_scenario, load_scenario_list, load_system};
use gridplan::model::{validate_system, ScenarioConfig, StorageKind, SystemModel};
use gridplan::report::{
    self, breakdown_to_table, investments_to_table, levels_to_table, stack_to_table, Aggregation,
    Cell, EmitFormat, SampleRate, Table,
};
use gridplan::scenarios::{gas_price_sweep, run_matrix, run_scenario_full, ScenarioError};
use gridplan::MpsFormat;

#[derive(Parser)]
#[command(
    name = "gridplan",
    about = "Generation expansion planning over a DC network",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an input directory against all structural invariants.
    Validate { dir: PathBuf },
    /// Solve one scenario and print its headline results.
    Solve {
        dir: PathBuf,
        /// Scenario config file (defaults to <dir>/scenario.json).
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Export the assembled program as MPS before solving.
        #[arg(long)]
        mps_out: Option<PathBuf>,
        /// MPS flavor: fixed (mangled 8-char names) or free.
        #[arg(long, default_value = "fixed")]
        mps_format: String,
        /// Write the full result (config, metrics, variable values) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ordered scenario list; the first entry is the baseline.
    Matrix {
        dir: PathBuf,
        /// JSON array of scenario configs.
        #[arg(long)]
        scenarios: PathBuf,
        /// Output directory for comparison.csv and per-scenario results.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sensitivity sweep over a scalar parameter.
    Sweep {
        dir: PathBuf,
        /// Swept parameter; only gas_price is defined.
        #[arg(long)]
        param: String,
        /// Comma-separated multipliers, ascending, each >= 1.
        #[arg(long)]
        values: String,
        /// Base scenario config (defaults to <dir>/scenario.json).
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the sweep table as CSV instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract a table from a solved result file.
    Report {
        /// Result JSON produced by solve/matrix --out.
        result: PathBuf,
        /// investments | stack | levels | breakdown
        #[arg(long)]
        table: String,
        #[arg(long, default_value = "csv")]
        format: String,
        /// System directory override (defaults to the one recorded in the
        /// result file).
        #[arg(long)]
        system: Option<PathBuf>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// stack: hourly | daily | weekly
        #[arg(long, default_value = "hourly")]
        aggregation: String,
        /// stack: hour window start:end (defaults to the full horizon)
        #[arg(long)]
        window: Option<String>,
        /// stack: restrict to one country's nodes
        #[arg(long)]
        country: Option<String>,
        /// levels: dam | pump | battery
        #[arg(long, default_value = "dam")]
        kind: String,
        /// levels: end_of_month | hourly
        #[arg(long, default_value = "end_of_month")]
        sample: String,
    },
}

/// Self-contained record of one solved scenario.
#[derive(Serialize, Deserialize)]
struct ResultFile {
    system_dir: String,
    result: gridplan::scenarios::ScenarioResult<f64>,
}

fn main() -> ExitCode {
    // die quietly when the output pipe closes (e.g. piping into `head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

const EXIT_INFEASIBLE: u8 = 2;

fn run(cli: Cli) -> Result<ExitCode, Box<dyn Error>> {
    match cli.command {
        Command::Validate { dir } => {
            // load_system validates internally; surface violations verbatim
            match load_system::<f64>(&dir) {
                Ok(system) => {
                    println!(
                        "ok: {} nodes, {} lines, {} thermal, {} storage, {} renewable, horizon {}",
                        system.nodes.len(),
                        system.lines.len(),
                        system.thermal_units.len(),
                        system.storage_units.len(),
                        system.renewable_units.len(),
                        system.horizon
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Solve {
            dir,
            scenario,
            mps_out,
            mps_format,
            out,
        } => {
            let system = load_system::<f64>(&dir)?;
            let config = load_config(&dir, scenario.as_deref())?;
            if let Some(path) = mps_out {
                let format = match mps_format.as_str() {
                    "fixed" => MpsFormat::Fixed,
                    "free" => MpsFormat::Free,
                    other => return Err(format!("unknown mps format {other:?}").into()),
                };
                let applied = apply_scenario(&system, &config);
                let (lp, _) = build_lp(&applied, &config);
                linprog::write_mps(&lp, &path, format)?;
                println!("wrote MPS to {}", path.display());
            }
            match run_scenario_full(&system, &config) {
                Ok(run) => {
                    // persist before printing so a closed pipe cannot lose it
                    if let Some(path) = &out {
                        let file = ResultFile {
                            system_dir: dir.display().to_string(),
                            result: run.result.clone(),
                        };
                        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
                    }
                    print_result_summary(&run.result);
                    if let Some(path) = &out {
                        println!("wrote result to {}", path.display());
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => infeasible_or_error(e),
            }
        }
        Command::Matrix {
            dir,
            scenarios,
            out,
        } => {
            let system = load_system::<f64>(&dir)?;
            let configs = load_scenario_list::<f64>(&scenarios)?;
            check_horizons(&system, &configs)?;
            match run_matrix(&system, &configs) {
                Ok(results) => {
                    std::fs::create_dir_all(&out)?;
                    let table = comparison_table(&results);
                    report::emit(&table, out.join("comparison.csv"), EmitFormat::Csv)?;
                    for result in &results {
                        let file = ResultFile {
                            system_dir: dir.display().to_string(),
                            result: result.clone(),
                        };
                        let path = out.join(format!("{}.json", result.config.name));
                        std::fs::write(&path, serde_json::to_string_pretty(&file)?)?;
                    }
                    println!("{}", report::render(&table, EmitFormat::Csv));
                    println!("wrote {} results to {}", results.len(), out.display());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => infeasible_or_error(e),
            }
        }
        Command::Sweep {
            dir,
            param,
            values,
            scenario,
            out,
        } => {
            if param != "gas_price" {
                return Err(format!("unknown sweep parameter {param:?}").into());
            }
            let system = load_system::<f64>(&dir)?;
            let config = load_config(&dir, scenario.as_deref())?;
            let multipliers: Vec<f64> = values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| format!("bad multiplier list: {e}"))?;
            match gas_price_sweep(&system, &config, &multipliers) {
                Ok(rows) => {
                    let table = sweep_table(&rows);
                    let text = report::render(&table, EmitFormat::Csv);
                    match out {
                        Some(path) => std::fs::write(&path, text)?,
                        None => print!("{text}"),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => infeasible_or_error(e),
            }
        }
        Command::Report {
            result,
            table,
            format,
            system,
            out,
            aggregation,
            window,
            country,
            kind,
            sample,
        } => {
            let text = std::fs::read_to_string(&result)?;
            let file: ResultFile = serde_json::from_str(&text)?;
            let format = EmitFormat::parse(&format)
                .ok_or_else(|| format!("unknown format {format:?}"))?;

            let rendered = match table.as_str() {
                "investments" => investments_to_table(&file.result.investments),
                "breakdown" => breakdown_to_table(&file.result.solution.term_breakdown),
                "stack" | "levels" => {
                    let dir = system
                        .unwrap_or_else(|| PathBuf::from(&file.system_dir));
                    let (applied, index) = rebuild_context(&dir, &file)?;
                    let values = &file.result.solution.values;
                    if table == "stack" {
                        let aggregation = Aggregation::parse(&aggregation)
                            .ok_or_else(|| format!("unknown aggregation {aggregation:?}"))?;
                        let window = match window {
                            None => 0..index.horizon,
                            Some(spec) => parse_window(&spec)?,
                        };
                        let stack = report::dispatch_stack(
                            &applied,
                            &index,
                            values,
                            aggregation,
                            window,
                            country.as_deref(),
                        )?;
                        stack_to_table(&stack)
                    } else {
                        let kind = StorageKind::parse(&kind)
                            .ok_or_else(|| format!("unknown storage kind {kind:?}"))?;
                        let sample = SampleRate::parse(&sample)
                            .ok_or_else(|| format!("unknown sample rate {sample:?}"))?;
                        let levels = report::storage_levels(&applied, &index, values, kind, sample);
                        levels_to_table(kind, &levels, sample)
                    }
                }
                other => return Err(format!("unknown table {other:?}").into()),
            };
            match out {
                Some(path) => report::emit(&rendered, path, format)?,
                None => print!("{}", report::render(&rendered, format)),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(dir: &Path, explicit: Option<&Path>) -> Result<ScenarioConfig<f64>, Box<dyn Error>> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => dir.join("scenario.json"),
    };
    Ok(load_scenario(path)?)
}

fn check_horizons(
    system: &SystemModel<f64>,
    configs: &[ScenarioConfig<f64>],
) -> Result<(), Box<dyn Error>> {
    for config in configs {
        if config.horizon_t != system.horizon {
            return Err(format!(
                "scenario {} has horizon {} but the system has {}",
                config.name, config.horizon_t, system.horizon
            )
            .into());
        }
    }
    Ok(())
}

/// Re-derives the applied system and variable index a result was produced
/// with; build determinism makes the stored values line up again.
fn rebuild_context(
    dir: &Path,
    file: &ResultFile,
) -> Result<(SystemModel<f64>, VariableIndex), Box<dyn Error>> {
    let system = load_system::<f64>(dir)?;
    let violations = validate_system(&system);
    if !violations.is_empty() {
        return Err(format!("system in {} is no longer valid", dir.display()).into());
    }
    let applied = apply_scenario(&system, &file.result.config);
    let index = VariableIndex::new(&applied);
    if index.num_cols != file.result.solution.values.len() {
        return Err(format!(
            "result file does not match the system in {} ({} variables vs {})",
            dir.display(),
            file.result.solution.values.len(),
            index.num_cols
        )
        .into());
    }
    Ok((applied, index))
}

fn parse_window(spec: &str) -> Result<std::ops::Range<usize>, Box<dyn Error>> {
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| format!("window must be start:end, got {spec:?}"))?;
    Ok(a.trim().parse()?..b.trim().parse()?)
}

fn infeasible_or_error(e: ScenarioError) -> Result<ExitCode, Box<dyn Error>> {
    if let ScenarioError::NonOptimal { ref status, .. } = e {
        if *status == gridplan::model::SolveStatus::Infeasible {
            eprintln!("{e}");
            return Ok(ExitCode::from(EXIT_INFEASIBLE));
        }
    }
    Err(e.into())
}

fn print_result_summary(result: &gridplan::scenarios::ScenarioResult<f64>) {
    println!("scenario: {}", result.config.name);
    println!("status: {}", result.solution.status);
    println!("objective_eur: {}", result.solution.objective);
    let [inv, thermal, storage, renewable, shed] = result.solution.term_breakdown;
    println!("  investment: {inv}");
    println!("  thermal_operation: {thermal}");
    println!("  storage_operation: {storage}");
    println!("  renewable_operation: {renewable}");
    println!("  load_shedding: {shed}");
    for (tech, mw) in &result.investments {
        println!("built_mw {tech}: {mw}");
    }
    for (country, gwh) in &result.load_shed_total {
        println!("shed_gwh {country}: {gwh}");
    }
}

fn comparison_table(results: &[gridplan::scenarios::ScenarioResult<f64>]) -> Table {
    let techs: BTreeSet<&String> = results.iter().flat_map(|r| r.investments.keys()).collect();
    let countries: BTreeSet<&String> =
        results.iter().flat_map(|r| r.load_shed_total.keys()).collect();
    let mut columns = vec![
        "scenario".to_string(),
        "objective_eur".to_string(),
        "delta_vs_baseline_pct".to_string(),
    ];
    columns.extend(techs.iter().map(|t| format!("built_mw:{t}")));
    columns.extend(countries.iter().map(|c| format!("shed_gwh:{c}")));
    let rows = results
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Text(r.config.name.clone()),
                Cell::Num(r.solution.objective),
                Cell::Num(r.objective_delta_vs_baseline.unwrap_or(f64::NAN)),
            ];
            for &tech in &techs {
                row.push(Cell::Num(r.investments.get(tech).copied().unwrap_or(0.0)));
            }
            for &country in &countries {
                row.push(Cell::Num(
                    r.load_shed_total.get(country).copied().unwrap_or(0.0),
                ));
            }
            row
        })
        .collect();
    Table {
        name: "comparison".into(),
        columns,
        rows,
    }
}

fn sweep_table(rows: &[gridplan::scenarios::SweepRow<f64>]) -> Table {
    let techs: BTreeSet<&String> = rows.iter().flat_map(|r| r.gas_investments.keys()).collect();
    let mut columns = vec![
        "multiplier".to_string(),
        "objective_eur".to_string(),
        "gas_energy_mwh".to_string(),
    ];
    columns.extend(techs.iter().map(|t| format!("built_mw:{t}")));
    let rows = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Num(r.multiplier),
                Cell::Num(r.objective),
                Cell::Num(r.gas_energy_mwh),
            ];
            for &tech in &techs {
                row.push(Cell::Num(
                    r.gas_investments.get(tech).copied().unwrap_or(0.0),
                ));
            }
            row
        })
        .collect();
    Table {
        name: "gas_price_sweep".into(),
        columns,
        rows,
    }
}
