//! Thin command-line front end over the library pipeline.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flexplan::model::FlexClass;
use flexplan::pipeline::{self, RunConfig, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "flexplan",
    version,
    about = "Capacity-expansion and dispatch planning for multi-carrier energy systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario directory; exit 0 iff no error diagnostics.
    Validate {
        /// Scenario directory.
        scenario: PathBuf,
        /// Where to write the diagnostics JSON (default: diagnostics.json).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Solve one or more scenarios and write all artifacts.
    Run(RunArgs),
    /// Summarize a run directory; with a second directory, print deltas.
    Report {
        /// Run directory produced by `flexplan run`.
        run_dir: PathBuf,
        /// Baseline run directory to diff against.
        baseline: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario directories; several run as independent pipelines.
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    /// Output directory (per-scenario subdirectories when several).
    /// Default: out/run-<unix-timestamp>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated attribution order, e.g. "district-heat,ptx".
    /// Default: space-process-heat,district-heat,bev,ptx.
    #[arg(long)]
    order: Option<String>,
    /// Zero all corridor expansion segments before building.
    #[arg(long)]
    no_grid_expansion: bool,
    /// Solver time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Solver feasibility/optimality tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Export the LP in fixed-form MPS plus the name map.
    #[arg(long)]
    export_lp: bool,
    /// Max scenarios solved concurrently (separate pipelines, shared nothing).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_order(raw: &str) -> Result<Vec<FlexClass>, String> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let class =
            FlexClass::parse(item).ok_or_else(|| format!("unknown flexibility class '{item}'"))?;
        if out.contains(&class) {
            return Err(format!("flexibility class '{item}' listed twice"));
        }
        out.push(class);
    }
    Ok(out)
}

fn run(args: RunArgs) -> i32 {
    let order = match args.order.as_deref() {
        None => FlexClass::ALL.to_vec(),
        Some(raw) => match parse_order(raw) {
            Ok(order) => order,
            Err(message) => {
                eprintln!("error: {message}");
                return EXIT_USAGE;
            }
        },
    };
    let out_root = args.out.clone().unwrap_or_else(|| {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        PathBuf::from("out").join(format!("run-{stamp}"))
    });
    let single = args.scenarios.len() == 1;
    let config_for = |scenario: &PathBuf| {
        let out_dir = if single {
            out_root.clone()
        } else {
            let name = scenario
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_else(|| "scenario".to_string());
            out_root.join(name)
        };
        RunConfig {
            out_dir,
            order: order.clone(),
            no_grid_expansion: args.no_grid_expansion,
            time_limit: args.time_limit,
            tol: args.tol,
            export_lp: args.export_lp,
        }
    };

    let jobs = args.jobs.max(1);
    let mut worst = 0;
    for chunk in args.scenarios.chunks(jobs) {
        let codes: Vec<i32> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|scenario| {
                    let config = config_for(scenario);
                    scope.spawn(move || pipeline::cmd_run(scenario, &config))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap_or(1)).collect()
        });
        worst = worst.max(codes.into_iter().max().unwrap_or(0));
    }
    worst
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { scenario, json } => pipeline::cmd_validate(&scenario, json.as_deref()),
        Command::Run(args) => run(args),
        Command::Report { run_dir, baseline } => {
            pipeline::cmd_report(&run_dir, baseline.as_deref())
        }
    };
    ExitCode::from(code.clamp(0, 255) as u8)
}
