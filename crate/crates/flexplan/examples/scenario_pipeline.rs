//! The file-based path: load the bundled de-nl-minimal scenario, validate
//! it, and run the full pipeline into a temporary directory - the same
//! steps `flexplan validate` and `flexplan run` perform.
//!
//!     cargo run --example scenario_pipeline

use std::path::Path;

use flexplan::pipeline::{cmd_run, cmd_validate, RunConfig};

fn main() {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/de-nl-minimal");
    let out = std::env::temp_dir().join("flexplan-de-nl-demo");

    let code = cmd_validate(&scenario, Some(&out.join("diagnostics.json")));
    println!("validate exit code: {code}");

    let config = RunConfig::new(&out);
    let code = cmd_run(&scenario, &config);
    println!("run exit code: {code}");

    for file in [
        "manifest.json",
        "capacities.csv",
        "dispatch.csv",
        "objective.csv",
        "metrics.json",
        "residual/curves.de.csv",
    ] {
        println!(
            "  {} {}",
            if out.join(file).exists() {
                "wrote"
            } else {
                "MISSING"
            },
            out.join(file).display()
        );
    }
}
