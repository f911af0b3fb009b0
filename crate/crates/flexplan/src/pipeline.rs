//! Orchestrates validate -> build -> solve -> analyze runs and emits
//! machine-readable artifacts under a single output directory.
//!
//! Exit codes are a stable contract: 0 ok, 1 validation, 2 usage/IO,
//! 3 infeasible, 4 solver limit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis;
use crate::artifacts;
use crate::builder::build_lp;
use crate::model::FlexClass;
use crate::plan::SolvedPlan;
use crate::scenario::{load_scenario, LoadedScenario};
use crate::solver::{solve, verify_solution, SolveOptions, SolveStatus};
use crate::validate::{has_errors, validate_model, Diagnostic, Severity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER_LIMIT: i32 = 4;

/// Flags accepted by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    /// Attribution order; default is the reference order
    /// space/process heat -> district heat -> BEV -> PtX.
    pub order: Vec<FlexClass>,
    pub no_grid_expansion: bool,
    pub time_limit: Option<f64>,
    pub tol: Option<f64>,
    pub export_lp: bool,
}

impl RunConfig {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            order: FlexClass::ALL.to_vec(),
            no_grid_expansion: false,
            time_limit: None,
            tol: None,
            export_lp: false,
        }
    }
}

/// Recorded before the solve starts; hashes cover every scenario input file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_path: String,
    pub scenario_name: String,
    pub out_dir: String,
    pub created_unix: u64,
    pub no_grid_expansion: bool,
    pub order: Vec<String>,
    pub solver: ManifestSolverOptions,
    pub input_hashes: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
pub struct ManifestSolverOptions {
    pub time_limit: Option<f64>,
    pub iteration_limit: Option<u64>,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
}

fn hash_inputs(dir: &Path) -> std::io::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        let mut entries: Vec<_> = fs::read_dir(&current)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.path());
        for entry in entries {
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let data = fs::read(&path)?;
                let digest = Sha256::digest(&data);
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                let rel = path
                    .strip_prefix(dir)
                    .unwrap_or(&path)
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, hex);
            }
        }
    }
    Ok(out)
}

fn write_diagnostics(path: &Path, diagnostics: &[Diagnostic]) {
    if let Ok(json) = serde_json::to_string_pretty(diagnostics) {
        let _ = fs::write(path, json);
    }
}

fn print_diagnostics(diagnostics: &[Diagnostic]) {
    for diagnostic in diagnostics {
        eprintln!("{diagnostic}");
    }
}

/// Validates a scenario directory. Exit 0 iff no error-severity
/// diagnostics; diagnostics go to stderr as text and to a JSON file.
pub fn cmd_validate(scenario: &Path, json_out: Option<&Path>) -> i32 {
    if !scenario.exists() {
        eprintln!(
            "error: scenario path '{}' does not exist",
            scenario.display()
        );
        return EXIT_USAGE;
    }
    let loaded = match load_scenario(scenario) {
        Ok(loaded) => loaded,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    let mut diagnostics = loaded.warnings.clone();
    diagnostics.extend(validate_model(&loaded.model));
    print_diagnostics(&diagnostics);
    let json_path = json_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("diagnostics.json"));
    write_diagnostics(&json_path, &diagnostics);
    if has_errors(&diagnostics) {
        EXIT_VALIDATION
    } else {
        println!(
            "ok: {} ({} warning(s))",
            loaded.settings.name,
            diagnostics
                .iter()
                .filter(|d| d.severity == Severity::Warning)
                .count()
        );
        EXIT_OK
    }
}

#[derive(Serialize)]
struct RegionMetrics {
    curves: Vec<analysis::LabeledCurve>,
    trade: analysis::TradeSummary,
}

#[derive(Serialize)]
struct Metrics<'a> {
    scenario: &'a str,
    electricity_carrier: &'a str,
    objective: crate::plan::ObjectiveBreakdown,
    regions: BTreeMap<String, RegionMetrics>,
}

/// Full pipeline over one scenario directory.
pub fn cmd_run(scenario: &Path, config: &RunConfig) -> i32 {
    if !scenario.is_dir() {
        eprintln!(
            "error: scenario path '{}' is not a directory",
            scenario.display()
        );
        return EXIT_USAGE;
    }
    for (i, class) in config.order.iter().enumerate() {
        if config.order[..i].contains(class) {
            eprintln!("error: flexibility class '{class}' listed twice in the order");
            return EXIT_USAGE;
        }
    }
    let LoadedScenario {
        model,
        settings,
        warnings,
    } = match load_scenario(scenario) {
        Ok(loaded) => loaded,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };

    if fs::create_dir_all(&config.out_dir).is_err() {
        eprintln!(
            "error: cannot create output directory '{}'",
            config.out_dir.display()
        );
        return EXIT_USAGE;
    }

    let mut diagnostics = warnings;
    diagnostics.extend(validate_model(&model));
    write_diagnostics(&config.out_dir.join("diagnostics.json"), &diagnostics);
    print_diagnostics(&diagnostics);
    if has_errors(&diagnostics) {
        return EXIT_VALIDATION;
    }

    let options = SolveOptions {
        time_limit: config.time_limit.or(settings.solver.time_limit),
        iteration_limit: settings.solver.iteration_limit,
        feasibility_tol: config
            .tol
            .or(settings.solver.feasibility_tol)
            .unwrap_or(1e-9),
        optimality_tol: config
            .tol
            .or(settings.solver.optimality_tol)
            .unwrap_or(1e-9),
    };

    // Manifest goes to disk before the solve starts.
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_path: scenario.display().to_string(),
        scenario_name: settings.name.clone(),
        out_dir: config.out_dir.display().to_string(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        no_grid_expansion: config.no_grid_expansion,
        order: config.order.iter().map(|c| c.to_string()).collect(),
        solver: ManifestSolverOptions {
            time_limit: options.time_limit,
            iteration_limit: options.iteration_limit,
            feasibility_tol: options.feasibility_tol,
            optimality_tol: options.optimality_tol,
        },
        input_hashes: match hash_inputs(scenario) {
            Ok(hashes) => hashes,
            Err(err) => {
                eprintln!("error: cannot hash scenario inputs: {err}");
                return EXIT_USAGE;
            }
        },
    };
    if let Ok(json) = serde_json::to_string_pretty(&manifest) {
        let _ = fs::write(config.out_dir.join("manifest.json"), json);
    }

    let model = if config.no_grid_expansion {
        model.without_grid_expansion()
    } else {
        model
    };

    let built = match build_lp(&model) {
        Ok(built) => built,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_VALIDATION;
        }
    };
    if config.export_lp {
        let _ = fs::write(
            config.out_dir.join("model.mps"),
            built.lp.to_mps(&settings.name),
        );
        let _ = fs::write(config.out_dir.join("name_map.csv"), built.lp.name_map_csv());
    }

    let solution = solve(&built.lp, &options);
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible | SolveStatus::Unbounded => {
            eprintln!(
                "error: no finite optimum: {} ({})",
                solution.message.as_deref().unwrap_or("no further detail"),
                if solution.status == SolveStatus::Infeasible {
                    "infeasible"
                } else {
                    "unbounded"
                }
            );
            return EXIT_INFEASIBLE;
        }
        SolveStatus::Limit => {
            eprintln!(
                "error: solver limit: {}",
                solution.message.as_deref().unwrap_or("no further detail")
            );
            return EXIT_SOLVER_LIMIT;
        }
    }

    let report = match verify_solution(&built.lp, &solution) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: verification impossible: {err}");
            return EXIT_SOLVER_LIMIT;
        }
    };
    if let Ok(json) = serde_json::to_string_pretty(&report) {
        let _ = fs::write(config.out_dir.join("verify.json"), json);
    }
    if !report.pass {
        eprintln!(
            "error: independent verification failed (max relative violation {:.3e} on {:?})",
            report.max_rel_violation, report.worst_constraint
        );
        return EXIT_SOLVER_LIMIT;
    }

    let plan = match SolvedPlan::new(model, built, solution) {
        Ok(plan) => plan,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_SOLVER_LIMIT;
        }
    };
    if let Err(err) = artifacts::write_solution(&plan, &config.out_dir) {
        eprintln!("error: cannot write solution artifacts: {err}");
        return EXIT_USAGE;
    }
    if let Err(err) = write_analysis(&plan, &settings, config) {
        eprintln!("error: cannot write analysis artifacts: {err}");
        return EXIT_USAGE;
    }

    println!(
        "ok: {} solved; objective {:.6} Mil.€; artifacts in {}",
        settings.name,
        plan.objective_breakdown().total,
        config.out_dir.display()
    );
    EXIT_OK
}

fn write_analysis(
    plan: &SolvedPlan,
    settings: &crate::scenario::Settings,
    config: &RunConfig,
) -> std::io::Result<()> {
    let elec = &settings.electricity_carrier;
    let dir = config.out_dir.join("residual");
    fs::create_dir_all(&dir)?;

    let mut regions = plan.model.regions.clone();
    regions.sort();
    let mut metrics_regions = BTreeMap::new();
    for region in &regions {
        let curves = analysis::attribute_flexibility(plan, elec, region, &config.order)
            .expect("order checked at cmd_run entry");
        // curves.<region>.csv: rank plus one column per attribution step.
        let mut out = String::from("rank");
        for curve in &curves {
            out.push(',');
            out.push_str(&curve.label);
        }
        out.push('\n');
        let horizon = plan.horizon();
        for rank in 0..horizon {
            out.push_str(&format!("{rank}"));
            for curve in &curves {
                out.push(',');
                out.push_str(&format!("{}", curve.curve.sorted[rank]));
            }
            out.push('\n');
        }
        fs::write(dir.join(format!("curves.{region}.csv")), out)?;

        let decomposition = analysis::supply_decomposition(plan, elec, region);
        let mut out =
            String::from("rank,hour,residual,net_imports,thermal,storage_net,curtailment\n");
        for rank in 0..horizon {
            out.push_str(&format!(
                "{rank},{},{},{},{},{},{}\n",
                decomposition.hour[rank],
                decomposition.residual[rank],
                decomposition.net_imports[rank],
                decomposition.thermal[rank],
                decomposition.storage_net[rank],
                decomposition.curtailment[rank],
            ));
        }
        fs::write(dir.join(format!("decomposition.{region}.csv")), out)?;

        metrics_regions.insert(
            region.to_string(),
            RegionMetrics {
                curves,
                trade: analysis::trade_summary(plan, elec, region),
            },
        );
    }

    let metrics = Metrics {
        scenario: &settings.name,
        electricity_carrier: elec.as_str(),
        objective: plan.objective_breakdown(),
        regions: metrics_regions,
    };
    fs::write(
        config.out_dir.join("metrics.json"),
        serde_json::to_string_pretty(&metrics).expect("metrics serialize"),
    )?;

    let flows = analysis::aggregate_flows(plan);
    let mut out = String::from("source,target,annual_quantity\n");
    for edge in &flows.edges {
        out.push_str(&format!(
            "{},{},{}\n",
            edge.source, edge.target, edge.quantity
        ));
    }
    fs::write(config.out_dir.join("flows.csv"), out)?;
    Ok(())
}

/// Prints the objective breakdown and per-region residual metrics of one
/// run; with a second directory, prints deltas (run minus baseline).
pub fn cmd_report(run_dir: &Path, baseline: Option<&Path>) -> i32 {
    let main = match load_report(run_dir) {
        Ok(data) => data,
        Err(err) => {
            eprintln!(
                "error: malformed run directory '{}': {err}",
                run_dir.display()
            );
            return EXIT_USAGE;
        }
    };
    println!("run: {}", run_dir.display());
    println!("objective breakdown [Mil.€]:");
    for key in [
        "fixed_cost",
        "variable_cost",
        "import_cost",
        "objective",
        "preexisting_fixed_cost",
        "grand_total",
    ] {
        if let Some(v) = main.objective.get(key) {
            println!("  {key:<24} {v:>14.6}");
        }
    }
    println!();
    println!(
        "{:<12} {:>10} {:>14} {:>12} {:>10}",
        "region", "peak[GW]", "residual[GWh]", "excess[GWh]", "hours<0"
    );
    for (region, metrics) in &main.regions {
        if let Some(last) = metrics.last() {
            println!(
                "{:<12} {:>10.3} {:>14.3} {:>12.3} {:>10}",
                region, last.0, last.1, last.2, last.3
            );
        }
    }

    if let Some(baseline_dir) = baseline {
        let base = match load_report(baseline_dir) {
            Ok(data) => data,
            Err(err) => {
                eprintln!(
                    "error: malformed run directory '{}': {err}",
                    baseline_dir.display()
                );
                return EXIT_USAGE;
            }
        };
        println!();
        println!("deltas vs {}:", baseline_dir.display());
        let main_obj = main.objective.get("objective").copied().unwrap_or(0.0);
        let base_obj = base.objective.get("objective").copied().unwrap_or(0.0);
        println!(
            "  objective                {:>14.6} ({:+.2}%)",
            main_obj - base_obj,
            if base_obj != 0.0 {
                (main_obj - base_obj) / base_obj * 100.0
            } else {
                0.0
            }
        );
        for (region, metrics) in &main.regions {
            if let (Some(a), Some(b)) = (
                metrics.last(),
                base.regions.get(region).and_then(|m| m.last()),
            ) {
                println!(
                    "  {:<12} peak {:+.3} GW, residual {:+.3} GWh, excess {:+.3} GWh",
                    region,
                    a.0 - b.0,
                    a.1 - b.1,
                    a.2 - b.2
                );
            }
        }
    }
    EXIT_OK
}

struct ReportData {
    objective: BTreeMap<String, f64>,
    /// Per region: (peak, residual_demand, excess, hours_negative) per curve.
    regions: BTreeMap<String, Vec<(f64, f64, f64, u64)>>,
}

fn load_report(dir: &Path) -> Result<ReportData, String> {
    let objective =
        artifacts::read_objective(dir.join("objective.csv")).map_err(|e| e.to_string())?;
    let metrics_raw = fs::read_to_string(dir.join("metrics.json")).map_err(|e| e.to_string())?;
    let metrics: serde_json::Value =
        serde_json::from_str(&metrics_raw).map_err(|e| e.to_string())?;
    let mut regions = BTreeMap::new();
    if let Some(map) = metrics.get("regions").and_then(|v| v.as_object()) {
        for (region, value) in map {
            let mut list = Vec::new();
            if let Some(curves) = value.get("curves").and_then(|v| v.as_array()) {
                for curve in curves {
                    list.push((
                        curve.get("peak").and_then(|v| v.as_f64()).unwrap_or(0.0),
                        curve
                            .get("residual_demand")
                            .and_then(|v| v.as_f64())
                            .unwrap_or(0.0),
                        curve
                            .get("excess_generation")
                            .and_then(|v| v.as_f64())
                            .unwrap_or(0.0),
                        curve
                            .get("hours_negative")
                            .and_then(|v| v.as_u64())
                            .unwrap_or(0),
                    ));
                }
            }
            regions.insert(region.clone(), list);
        }
    }
    if regions.is_empty() && objective.is_empty() {
        return Err("no objective.csv/metrics.json content".to_string());
    }
    Ok(ReportData { objective, regions })
}
