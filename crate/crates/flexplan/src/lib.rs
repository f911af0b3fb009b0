//! Cost-minimizing capacity-expansion and dispatch planning for
//! multi-carrier energy systems.
//!
//! The crate builds linear programs from a carrier/technology/region graph,
//! supports demand-side flexibility (coarse carrier resolutions, must-run
//! local heating with embedded storage, availability-capped BEV charging,
//! piecewise transmission expansion), solves them with a pluggable backend,
//! and post-processes solutions into residual-load analytics.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod analysis;
pub mod artifacts;
pub mod builder;
pub mod flex;
pub mod lp;
pub mod model;
pub mod pipeline;
pub mod plan;
pub mod sample;
pub mod scenario;
pub mod solver;
pub mod time;
pub mod validate;

pub use builder::{build_lp, BuiltLp, LpIndex};
pub use model::{
    annuitize, BalanceKind, CapacityFactor, Carrier, CarrierId, DispatchMode, EmbeddedStorageSpec,
    EnergyModel, ExchangeCorridor, ExpansionSegment, FlexClass, ImportOption, RegionId, StorageId,
    StorageTechnology, TechId, Technology,
};
pub use solver::{solve, LpBackend, SimplexBackend, Solution, SolveOptions, SolveStatus};
pub use time::TimeHierarchy;
pub use validate::{has_errors, validate_model, Diagnostic, Severity};
