//! Loads and writes scenario directories: settings, entity tables as CSV,
//! and wide per-entity time-series files. Schemas are documented in
//! `docs/format.md`. All outputs are deterministic byte-for-byte.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::model::{
    BalanceKind, CapacityFactor, Carrier, CarrierId, DispatchMode, EmbeddedStorageSpec,
    EnergyModel, ExchangeCorridor, FlexClass, ImportOption, RegionId, StorageTechnology, TechId,
    Technology,
};
use crate::validate::Diagnostic;

/// Load error located at file, row (1-based, counting the header), column.
#[derive(Debug)]
pub struct ScenarioError {
    pub file: String,
    pub row: Option<usize>,
    pub column: Option<String>,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(row) = self.row {
            write!(f, ":{row}")?;
        }
        if let Some(column) = &self.column {
            write!(f, ":{column}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ScenarioError {}

impl ScenarioError {
    fn file(file: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            file: file.into(),
            row: None,
            column: None,
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

/// Solver-related settings keys, mirrored by CLI flags.
#[derive(Debug, Clone, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub time_limit: Option<f64>,
    pub iteration_limit: Option<u64>,
    pub feasibility_tol: Option<f64>,
    pub optimality_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    name: String,
    horizon_hours: u32,
    #[serde(default = "default_interest")]
    interest_rate: f64,
    #[serde(default = "default_true")]
    charge_om_on_preexisting: bool,
}

fn default_interest() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

fn default_electricity() -> String {
    "electricity".to_string()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct AnalysisSection {
    #[serde(default = "default_electricity")]
    electricity_carrier: String,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            electricity_carrier: default_electricity(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct SettingsFile {
    scenario: ScenarioSection,
    #[serde(default)]
    analysis: AnalysisSection,
    #[serde(default)]
    solver: SolverSettings,
}

/// Parsed settings exposed to the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub name: String,
    pub horizon_hours: u32,
    pub interest_rate: f64,
    pub charge_om_on_preexisting: bool,
    pub electricity_carrier: CarrierId,
    pub solver: SolverSettings,
}

/// A fully loaded scenario: the model, its settings, and load warnings
/// (for example clamped capacity-factor values).
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub model: EnergyModel,
    pub settings: Settings,
    pub warnings: Vec<Diagnostic>,
}

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

struct Sheet {
    file: String,
    headers: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

impl Sheet {
    fn load(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(name);
        let data = fs::read_to_string(&path)
            .map_err(|e| ScenarioError::file(name, format!("missing file ({e})")))?;
        Self::parse(name, &data)
    }

    fn load_optional(dir: &Path, name: &str) -> Result<Option<Self>> {
        if dir.join(name).exists() {
            Ok(Some(Self::load(dir, name)?))
        } else {
            Ok(None)
        }
    }

    fn parse(name: &str, data: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(data.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| ScenarioError::file(name, format!("cannot read header: {e}")))?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| ScenarioError {
                file: name.to_string(),
                row: Some(i + 2),
                column: None,
                message: format!("malformed row: {e}"),
            })?;
            rows.push(record);
        }
        Ok(Self {
            file: name.to_string(),
            headers,
            rows,
        })
    }

    fn check_columns(&self, required: &[&str], optional: &[&str]) -> Result<()> {
        for col in required {
            if !self.headers.iter().any(|h| h == col) {
                return Err(ScenarioError {
                    file: self.file.clone(),
                    row: Some(1),
                    column: Some((*col).to_string()),
                    message: "missing required column".to_string(),
                });
            }
        }
        for header in &self.headers {
            if !required.contains(&header.as_str()) && !optional.contains(&header.as_str()) {
                return Err(ScenarioError {
                    file: self.file.clone(),
                    row: Some(1),
                    column: Some(header.clone()),
                    message: "unknown column".to_string(),
                });
            }
        }
        Ok(())
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn cell(&self, row: usize, column: &str) -> &str {
        self.column(column)
            .and_then(|c| self.rows[row].get(c))
            .unwrap_or("")
    }

    fn err(&self, row: usize, column: &str, message: impl Into<String>) -> ScenarioError {
        ScenarioError {
            file: self.file.clone(),
            row: Some(row + 2),
            column: Some(column.to_string()),
            message: message.into(),
        }
    }

    fn required(&self, row: usize, column: &str) -> Result<&str> {
        let v = self.cell(row, column);
        if v.is_empty() {
            Err(self.err(row, column, "empty cell"))
        } else {
            Ok(v)
        }
    }

    fn f64_or(&self, row: usize, column: &str, default: f64) -> Result<f64> {
        let v = self.cell(row, column);
        if v.is_empty() {
            return Ok(default);
        }
        v.parse()
            .map_err(|_| self.err(row, column, format!("non-numeric cell '{v}'")))
    }

    fn f64_opt(&self, row: usize, column: &str) -> Result<Option<f64>> {
        let v = self.cell(row, column);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| self.err(row, column, format!("non-numeric cell '{v}'")))
    }

    fn bool_or(&self, row: usize, column: &str, default: bool) -> Result<bool> {
        let v = self.cell(row, column);
        match v {
            "" => Ok(default),
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(self.err(row, column, format!("expected a boolean, got '{other}'"))),
        }
    }
}

/// Wide series file: `hour` column plus one column per key (region id or
/// `value`). Values are returned keyed by column name.
fn load_series(
    dir: &Path,
    name: &str,
    horizon: usize,
) -> Result<Option<BTreeMap<String, Vec<f64>>>> {
    let Some(sheet) = Sheet::load_optional(dir, name)? else {
        return Ok(None);
    };
    if sheet.column("hour").is_none() {
        return Err(ScenarioError {
            file: name.to_string(),
            row: Some(1),
            column: Some("hour".to_string()),
            message: "missing required column".to_string(),
        });
    }
    if sheet.rows.len() != horizon {
        return Err(ScenarioError::file(
            name,
            format!(
                "horizon mismatch: {} rows but the scenario horizon is {horizon} hours",
                sheet.rows.len()
            ),
        ));
    }
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (row, _) in sheet.rows.iter().enumerate() {
        let hour: usize = sheet
            .required(row, "hour")?
            .parse()
            .map_err(|_| sheet.err(row, "hour", "non-numeric hour index"))?;
        if hour != row {
            return Err(sheet.err(row, "hour", format!("expected hour {row}, got {hour}")));
        }
        for (c, header) in sheet.headers.iter().enumerate() {
            if header == "hour" {
                continue;
            }
            let raw = sheet.rows[row].get(c).unwrap_or("");
            let value: f64 = raw
                .parse()
                .map_err(|_| sheet.err(row, header, format!("non-numeric cell '{raw}'")))?;
            out.entry(header.clone())
                .or_insert_with(|| Vec::with_capacity(horizon))
                .push(value);
        }
    }
    Ok(Some(out))
}

fn clamp_unit_series(
    series: &mut BTreeMap<String, Vec<f64>>,
    entity: &str,
    file: &str,
    warnings: &mut Vec<Diagnostic>,
) {
    for (key, values) in series.iter_mut() {
        let mut clamped = 0usize;
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                clamped += 1;
            } else if *v > 1.0 {
                *v = 1.0;
                clamped += 1;
            }
        }
        if clamped > 0 {
            warnings.push(Diagnostic::warning(
                entity,
                format!("{file}: {clamped} value(s) in column '{key}' clamped to [0, 1]"),
            ));
        }
    }
}

fn parse_share_list(sheet: &Sheet, row: usize, column: &str) -> Result<Vec<(CarrierId, f64)>> {
    let raw = sheet.cell(row, column);
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    let items: Vec<&str> = raw.split(';').filter(|s| !s.is_empty()).collect();
    let mut out = Vec::with_capacity(items.len());
    for item in &items {
        match item.split_once(':') {
            Some((carrier, share)) => {
                let share: f64 = share.parse().map_err(|_| {
                    sheet.err(row, column, format!("non-numeric share in '{item}'"))
                })?;
                out.push((CarrierId::new(carrier), share));
            }
            None => {
                if items.len() > 1 {
                    return Err(sheet.err(
                        row,
                        column,
                        "multi-carrier lists need explicit shares ('carrier:share;...')",
                    ));
                }
                out.push((CarrierId::new(*item), 1.0));
            }
        }
    }
    Ok(out)
}

fn parse_regions_cell(
    sheet: &Sheet,
    row: usize,
    column: &str,
    all_regions: &[RegionId],
) -> Result<Vec<RegionId>> {
    let raw = sheet.required(row, column)?;
    if raw == "*" {
        let mut out = all_regions.to_vec();
        out.sort();
        return Ok(out);
    }
    Ok(raw
        .split(';')
        .filter(|s| !s.is_empty())
        .map(RegionId::new)
        .collect())
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Loads a scenario directory into an [`EnergyModel`]. Structural problems
/// (missing files, unknown columns, non-numeric cells, horizon mismatches)
/// fail with file/row/column context; content problems surface later via
/// `validate_model`.
pub fn load_scenario(dir: impl AsRef<Path>) -> Result<LoadedScenario> {
    let dir = dir.as_ref();
    let settings = load_settings(dir)?;
    let horizon = settings.horizon_hours as usize;
    let mut warnings = Vec::new();

    // regions.csv
    let regions_sheet = Sheet::load(dir, "regions.csv")?;
    regions_sheet.check_columns(&["id"], &[])?;
    let mut regions: Vec<RegionId> = (0..regions_sheet.rows.len())
        .map(|row| regions_sheet.required(row, "id").map(RegionId::new))
        .collect::<Result<_>>()?;
    regions.sort();

    // carriers.csv
    let carriers_sheet = Sheet::load(dir, "carriers.csv")?;
    carriers_sheet.check_columns(&["id", "resolution"], &["balance_kind"])?;
    let mut carriers = Vec::with_capacity(carriers_sheet.rows.len());
    for row in 0..carriers_sheet.rows.len() {
        let id = carriers_sheet.required(row, "id")?;
        let resolution: u32 = carriers_sheet
            .required(row, "resolution")?
            .parse()
            .map_err(|_| carriers_sheet.err(row, "resolution", "non-numeric cell"))?;
        let balance_kind = match carriers_sheet.cell(row, "balance_kind") {
            "" | "network" => BalanceKind::Network,
            "induced-demand" => BalanceKind::InducedDemand,
            other => {
                return Err(carriers_sheet.err(
                    row,
                    "balance_kind",
                    format!("expected 'network' or 'induced-demand', got '{other}'"),
                ))
            }
        };
        let mut carrier = Carrier::new(id, resolution);
        carrier.balance_kind = balance_kind;
        // series/demand.<carrier>.csv
        if let Some(series) = load_series(dir, &format!("series/demand.{id}.csv"), horizon)? {
            for (region, values) in series {
                carrier
                    .exogenous_demand
                    .insert(RegionId::new(region), values);
            }
        }
        carriers.push(carrier);
    }
    carriers.sort_by(|a, b| a.id.cmp(&b.id));

    // technologies.csv
    let tech_sheet = Sheet::load(dir, "technologies.csv")?;
    tech_sheet.check_columns(
        &["id", "regions"],
        &[
            "inputs",
            "outputs",
            "efficiency",
            "dispatch",
            "capacity_factor",
            "investment_cost",
            "fixed_om",
            "variable_cost",
            "lifetime",
            "cost_basis",
            "fluctuating",
            "flex_class",
            "group",
            "storage_power_cost",
            "storage_energy_cost",
            "storage_charge_eff",
            "storage_discharge_eff",
            "storage_self_discharge",
            "storage_max_duration",
        ],
    )?;
    if tech_sheet.rows.is_empty() {
        warnings.push(Diagnostic::warning(
            "technologies.csv",
            "no technologies defined",
        ));
    }
    let mut technologies = Vec::with_capacity(tech_sheet.rows.len());
    for row in 0..tech_sheet.rows.len() {
        technologies.push(load_technology(
            &tech_sheet,
            row,
            dir,
            horizon,
            &regions,
            &mut warnings,
        )?);
    }
    technologies.sort_by(|a, b| a.id.cmp(&b.id));

    // technology_capacity.csv (optional)
    if let Some(sheet) = Sheet::load_optional(dir, "technology_capacity.csv")? {
        sheet.check_columns(&["technology", "region"], &["min", "max", "preexisting"])?;
        for row in 0..sheet.rows.len() {
            let tech_id = TechId::new(sheet.required(row, "technology")?);
            let region = RegionId::new(sheet.required(row, "region")?);
            let tech = technologies
                .iter_mut()
                .find(|t| t.id == tech_id)
                .ok_or_else(|| {
                    sheet.err(row, "technology", format!("unknown technology '{tech_id}'"))
                })?;
            let min = sheet.f64_or(row, "min", 0.0)?;
            let max = match sheet.cell(row, "max") {
                "" | "inf" => f64::INFINITY,
                _ => sheet.f64_or(row, "max", f64::INFINITY)?,
            };
            tech.capacity_bounds.insert(region.clone(), (min, max));
            let preexisting = sheet.f64_or(row, "preexisting", 0.0)?;
            if preexisting != 0.0 {
                tech.preexisting.insert(region, preexisting);
            }
        }
    }

    // storages.csv (optional)
    let mut storages = Vec::new();
    if let Some(sheet) = Sheet::load_optional(dir, "storages.csv")? {
        sheet.check_columns(
            &["id", "carrier", "regions"],
            &[
                "power_investment",
                "power_fixed_om",
                "energy_investment",
                "energy_fixed_om",
                "lifetime",
                "charge_efficiency",
                "discharge_efficiency",
                "self_discharge",
                "e2p_min",
                "e2p_max",
            ],
        )?;
        for row in 0..sheet.rows.len() {
            let id = sheet.required(row, "id")?;
            let mut storage = StorageTechnology::new(id, sheet.required(row, "carrier")?);
            storage.regions = parse_regions_cell(&sheet, row, "regions", &regions)?;
            storage.power_investment = sheet.f64_or(row, "power_investment", 0.0)?;
            storage.power_fixed_om = sheet.f64_or(row, "power_fixed_om", 0.0)?;
            storage.energy_investment = sheet.f64_or(row, "energy_investment", 0.0)?;
            storage.energy_fixed_om = sheet.f64_or(row, "energy_fixed_om", 0.0)?;
            storage.lifetime = sheet.f64_or(row, "lifetime", 25.0)?;
            storage.charge_efficiency = sheet.f64_or(row, "charge_efficiency", 1.0)?;
            storage.discharge_efficiency = sheet.f64_or(row, "discharge_efficiency", 1.0)?;
            storage.self_discharge = sheet.f64_or(row, "self_discharge", 1.0)?;
            let min = sheet.f64_or(row, "e2p_min", 0.0)?;
            let max = match sheet.cell(row, "e2p_max") {
                "" | "inf" => f64::INFINITY,
                _ => sheet.f64_or(row, "e2p_max", f64::INFINITY)?,
            };
            storage.energy_to_power_bounds = (min, max);
            if let Some(series) = load_series(dir, &format!("series/inflow.{id}.csv"), horizon)? {
                for (region, values) in series {
                    storage
                        .exogenous_inflow
                        .insert(RegionId::new(region), values);
                }
            }
            storages.push(storage);
        }
    }
    storages.sort_by(|a, b| a.id.cmp(&b.id));

    // storage_capacity.csv (optional)
    if let Some(sheet) = Sheet::load_optional(dir, "storage_capacity.csv")? {
        sheet.check_columns(&["storage", "region"], &["power", "energy"])?;
        for row in 0..sheet.rows.len() {
            let id = crate::model::StorageId::new(sheet.required(row, "storage")?);
            let region = RegionId::new(sheet.required(row, "region")?);
            let storage = storages
                .iter_mut()
                .find(|s| s.id == id)
                .ok_or_else(|| sheet.err(row, "storage", format!("unknown storage '{id}'")))?;
            let power = sheet.f64_or(row, "power", 0.0)?;
            let energy = sheet.f64_or(row, "energy", 0.0)?;
            storage.preexisting.insert(region, (power, energy));
        }
    }

    // corridors.csv (optional)
    let mut corridors = Vec::new();
    if let Some(sheet) = Sheet::load_optional(dir, "corridors.csv")? {
        sheet.check_columns(
            &["id", "from", "to", "carrier"],
            &[
                "distance_km",
                "loss_per_1000km",
                "preexisting",
                "segments",
                "lifetime",
                "fixed_om",
            ],
        )?;
        for row in 0..sheet.rows.len() {
            let mut corridor = ExchangeCorridor::new(
                sheet.required(row, "id")?,
                sheet.required(row, "from")?,
                sheet.required(row, "to")?,
                sheet.required(row, "carrier")?,
            );
            corridor.distance_km = sheet.f64_or(row, "distance_km", 0.0)?;
            corridor.loss_per_1000km = sheet.f64_or(row, "loss_per_1000km", 0.0)?;
            corridor.preexisting = sheet.f64_or(row, "preexisting", 0.0)?;
            corridor.lifetime = sheet.f64_or(row, "lifetime", 40.0)?;
            corridor.fixed_om = sheet.f64_or(row, "fixed_om", 0.0)?;
            let raw = sheet.cell(row, "segments");
            for item in raw.split(';').filter(|s| !s.is_empty()) {
                let (capacity, cost) = item.split_once('@').ok_or_else(|| {
                    sheet.err(
                        row,
                        "segments",
                        format!("expected 'capacity@cost', got '{item}'"),
                    )
                })?;
                let capacity: f64 = capacity.parse().map_err(|_| {
                    sheet.err(row, "segments", format!("non-numeric capacity in '{item}'"))
                })?;
                let cost: f64 = cost.parse().map_err(|_| {
                    sheet.err(row, "segments", format!("non-numeric cost in '{item}'"))
                })?;
                corridor = corridor.segment(capacity, cost);
            }
            corridors.push(corridor);
        }
    }
    corridors.sort_by(|a, b| a.id.cmp(&b.id));

    // imports.csv (optional)
    let mut imports = Vec::new();
    if let Some(sheet) = Sheet::load_optional(dir, "imports.csv")? {
        sheet.check_columns(&["carrier", "region", "price_eur_per_mwh"], &["limit_gw"])?;
        for row in 0..sheet.rows.len() {
            imports.push(ImportOption {
                carrier: CarrierId::new(sheet.required(row, "carrier")?),
                region: RegionId::new(sheet.required(row, "region")?),
                price_eur_per_mwh: sheet.f64_or(row, "price_eur_per_mwh", 0.0)?,
                limit_gw: sheet.f64_opt(row, "limit_gw")?,
            });
        }
    }
    imports.sort_by(|a, b| {
        (&a.carrier, &a.region, a.price_eur_per_mwh)
            .partial_cmp(&(&b.carrier, &b.region, b.price_eur_per_mwh))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let model = EnergyModel::assemble(
        settings.name.clone(),
        settings.horizon_hours,
        regions,
        carriers,
        technologies,
        storages,
        corridors,
        imports,
    )
    .with_interest(settings.interest_rate);
    let mut model = model;
    model.charge_om_on_preexisting = settings.charge_om_on_preexisting;

    Ok(LoadedScenario {
        model,
        settings,
        warnings,
    })
}

fn load_settings(dir: &Path) -> Result<Settings> {
    let path = dir.join("settings.toml");
    let raw = fs::read_to_string(&path)
        .map_err(|e| ScenarioError::file("settings.toml", format!("missing file ({e})")))?;
    let parsed: SettingsFile =
        toml::from_str(&raw).map_err(|e| ScenarioError::file("settings.toml", e.to_string()))?;
    Ok(Settings {
        name: parsed.scenario.name,
        horizon_hours: parsed.scenario.horizon_hours,
        interest_rate: parsed.scenario.interest_rate,
        charge_om_on_preexisting: parsed.scenario.charge_om_on_preexisting,
        electricity_carrier: CarrierId::new(parsed.analysis.electricity_carrier),
        solver: parsed.solver,
    })
}

fn load_technology(
    sheet: &Sheet,
    row: usize,
    dir: &Path,
    horizon: usize,
    all_regions: &[RegionId],
    warnings: &mut Vec<Diagnostic>,
) -> Result<Technology> {
    let id = sheet.required(row, "id")?;
    let mut tech = Technology::new(id);
    tech.regions = parse_regions_cell(sheet, row, "regions", all_regions)?;
    tech.inputs = parse_share_list(sheet, row, "inputs")?;
    tech.outputs = parse_share_list(sheet, row, "outputs")?;
    tech.efficiency = sheet.f64_or(row, "efficiency", 1.0)?;
    tech.dispatch = match sheet.cell(row, "dispatch") {
        "" | "merit-order" => DispatchMode::MeritOrder,
        "must-run" => DispatchMode::MustRun,
        other => {
            return Err(sheet.err(
                row,
                "dispatch",
                format!("expected 'merit-order' or 'must-run', got '{other}'"),
            ))
        }
    };
    tech.variable_cost = sheet.f64_or(row, "variable_cost", 0.0)?;
    tech.lifetime = sheet.f64_or(row, "lifetime", 25.0)?;
    tech.fluctuating = sheet.bool_or(row, "fluctuating", false)?;
    tech.flex_class = match sheet.cell(row, "flex_class") {
        "" => None,
        other => Some(FlexClass::parse(other).ok_or_else(|| {
            sheet.err(
                row,
                "flex_class",
                format!("unknown flexibility class '{other}'"),
            )
        })?),
    };
    let group = sheet.cell(row, "group");
    if !group.is_empty() {
        tech.group = Some(group.to_string());
    }

    // Availability profile: series/availability.<tech>.csv with one column.
    if let Some(mut series) = load_series(dir, &format!("series/availability.{id}.csv"), horizon)? {
        clamp_unit_series(
            &mut series,
            id,
            &format!("series/availability.{id}.csv"),
            warnings,
        );
        let profile = series.remove("value").ok_or_else(|| {
            ScenarioError::file(
                format!("series/availability.{id}.csv"),
                "expected a single 'value' column",
            )
        })?;
        tech.availability_profile = Some(profile);
    }

    // Capacity factor: scalar cell and/or per-region series file.
    let scalar = sheet.f64_or(row, "capacity_factor", 1.0)?;
    if let Some(mut series) =
        load_series(dir, &format!("series/capacity_factor.{id}.csv"), horizon)?
    {
        clamp_unit_series(
            &mut series,
            id,
            &format!("series/capacity_factor.{id}.csv"),
            warnings,
        );
        tech.capacity_factor = CapacityFactor::Series(
            series
                .into_iter()
                .map(|(region, values)| (RegionId::new(region), values))
                .collect(),
        );
    } else {
        tech.capacity_factor = CapacityFactor::Constant(scalar.clamp(0.0, 1.0));
        if !(0.0..=1.0).contains(&scalar) {
            warnings.push(Diagnostic::warning(
                id,
                format!("scalar capacity factor {scalar} clamped to [0, 1]"),
            ));
        }
    }

    // Investment basis: 'input' cost tables (Mil.€/GW_in) are converted to
    // the output-denominated capacity variable by dividing by efficiency,
    // except when an availability profile makes the variable input-side.
    let investment = sheet.f64_or(row, "investment_cost", 0.0)?;
    let fixed_om = sheet.f64_or(row, "fixed_om", 0.0)?;
    let basis = sheet.cell(row, "cost_basis");
    let divide = match basis {
        "" | "output" => false,
        "input" => tech.availability_profile.is_none(),
        other => {
            return Err(sheet.err(
                row,
                "cost_basis",
                format!("expected 'output' or 'input', got '{other}'"),
            ))
        }
    };
    if divide {
        if tech.efficiency <= 0.0 {
            return Err(sheet.err(row, "cost_basis", "input basis needs efficiency > 0"));
        }
        tech.investment_cost = investment / tech.efficiency;
        tech.fixed_om = fixed_om / tech.efficiency;
    } else {
        tech.investment_cost = investment;
        tech.fixed_om = fixed_om;
    }

    // Embedded storage block.
    let power_cost = sheet.f64_opt(row, "storage_power_cost")?;
    let energy_cost = sheet.f64_opt(row, "storage_energy_cost")?;
    let duration = sheet.f64_opt(row, "storage_max_duration")?;
    if power_cost.is_some() || energy_cost.is_some() || duration.is_some() {
        tech.embedded_storage = Some(EmbeddedStorageSpec {
            power_cost: power_cost.unwrap_or(0.0),
            energy_cost: energy_cost.unwrap_or(0.0),
            charge_efficiency: sheet.f64_or(row, "storage_charge_eff", 1.0)?,
            discharge_efficiency: sheet.f64_or(row, "storage_discharge_eff", 1.0)?,
            self_discharge: sheet.f64_or(row, "storage_self_discharge", 1.0)?,
            max_duration: duration.unwrap_or(f64::INFINITY),
        });
    }
    Ok(tech)
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Writes a model back to a scenario directory in the documented schema.
/// `load(write(load(x)))` reproduces `load(x)` field for field.
pub fn write_scenario(
    model: &EnergyModel,
    settings: &Settings,
    dir: impl AsRef<Path>,
) -> std::io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join("series"))?;

    let solver = &settings.solver;
    let mut toml_out = String::new();
    toml_out.push_str("[scenario]\n");
    toml_out.push_str(&format!("name = {:?}\n", settings.name));
    toml_out.push_str(&format!("horizon_hours = {}\n", settings.horizon_hours));
    toml_out.push_str(&format!(
        "interest_rate = {}\n",
        fmt_f64(settings.interest_rate)
    ));
    toml_out.push_str(&format!(
        "charge_om_on_preexisting = {}\n",
        settings.charge_om_on_preexisting
    ));
    toml_out.push_str("\n[analysis]\n");
    toml_out.push_str(&format!(
        "electricity_carrier = {:?}\n",
        settings.electricity_carrier.as_str()
    ));
    toml_out.push_str("\n[solver]\n");
    if let Some(v) = solver.time_limit {
        toml_out.push_str(&format!("time_limit = {}\n", fmt_f64(v)));
    }
    if let Some(v) = solver.iteration_limit {
        toml_out.push_str(&format!("iteration_limit = {v}\n"));
    }
    if let Some(v) = solver.feasibility_tol {
        toml_out.push_str(&format!("feasibility_tol = {}\n", fmt_f64(v)));
    }
    if let Some(v) = solver.optimality_tol {
        toml_out.push_str(&format!("optimality_tol = {}\n", fmt_f64(v)));
    }
    fs::write(dir.join("settings.toml"), toml_out)?;

    let mut regions = model.regions.clone();
    regions.sort();
    let mut out = String::from("id\n");
    for region in &regions {
        out.push_str(region.as_str());
        out.push('\n');
    }
    fs::write(dir.join("regions.csv"), out)?;

    let mut carriers: Vec<_> = model.carriers.iter().collect();
    carriers.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::from("id,resolution,balance_kind\n");
    for carrier in &carriers {
        let kind = match carrier.balance_kind {
            BalanceKind::Network => "network",
            BalanceKind::InducedDemand => "induced-demand",
        };
        out.push_str(&format!("{},{},{}\n", carrier.id, carrier.resolution, kind));
        if !carrier.exogenous_demand.is_empty() {
            write_series(
                dir,
                &format!("series/demand.{}.csv", carrier.id),
                carrier
                    .exogenous_demand
                    .iter()
                    .map(|(r, v)| (r.as_str().to_string(), v.clone()))
                    .collect(),
                model.horizon() as usize,
            )?;
        }
    }
    fs::write(dir.join("carriers.csv"), out)?;

    let mut techs: Vec<_> = model.technologies.iter().collect();
    techs.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = String::from(
        "id,regions,inputs,outputs,efficiency,dispatch,capacity_factor,investment_cost,\
         fixed_om,variable_cost,lifetime,fluctuating,flex_class,group,storage_power_cost,\
         storage_energy_cost,storage_charge_eff,storage_discharge_eff,storage_self_discharge,\
         storage_max_duration\n",
    );
    let mut capacity_rows = Vec::new();
    for tech in &techs {
        let mut regions_sorted = tech.regions.clone();
        regions_sorted.sort();
        let regions_cell = regions_sorted
            .iter()
            .map(|r| r.as_str())
            .collect::<Vec<_>>()
            .join(";");
        let shares = |list: &[(CarrierId, f64)]| {
            list.iter()
                .map(|(c, s)| format!("{c}:{}", fmt_f64(*s)))
                .collect::<Vec<_>>()
                .join(";")
        };
        let dispatch = match tech.dispatch {
            DispatchMode::MeritOrder => "merit-order",
            DispatchMode::MustRun => "must-run",
        };
        let cf_scalar = match &tech.capacity_factor {
            CapacityFactor::Constant(v) => fmt_f64(*v),
            CapacityFactor::Series(map) => {
                write_series(
                    dir,
                    &format!("series/capacity_factor.{}.csv", tech.id),
                    map.iter()
                        .map(|(r, v)| (r.as_str().to_string(), v.clone()))
                        .collect(),
                    model.horizon() as usize,
                )?;
                String::new()
            }
        };
        if let Some(profile) = &tech.availability_profile {
            write_series(
                dir,
                &format!("series/availability.{}.csv", tech.id),
                BTreeMap::from([("value".to_string(), profile.clone())]),
                model.horizon() as usize,
            )?;
        }
        let emb = tech.embedded_storage.as_ref();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            tech.id,
            regions_cell,
            shares(&tech.inputs),
            shares(&tech.outputs),
            fmt_f64(tech.efficiency),
            dispatch,
            cf_scalar,
            fmt_f64(tech.investment_cost),
            fmt_f64(tech.fixed_om),
            fmt_f64(tech.variable_cost),
            fmt_f64(tech.lifetime),
            tech.fluctuating,
            tech.flex_class.map(|c| c.as_str()).unwrap_or(""),
            tech.group.as_deref().unwrap_or(""),
            emb.map(|s| fmt_f64(s.power_cost)).unwrap_or_default(),
            emb.map(|s| fmt_f64(s.energy_cost)).unwrap_or_default(),
            emb.map(|s| fmt_f64(s.charge_efficiency))
                .unwrap_or_default(),
            emb.map(|s| fmt_f64(s.discharge_efficiency))
                .unwrap_or_default(),
            emb.map(|s| fmt_f64(s.self_discharge)).unwrap_or_default(),
            emb.map(|s| fmt_f64(s.max_duration)).unwrap_or_default(),
        ));
        for region in &regions_sorted {
            let (min, max) = tech.bounds_in(region);
            let pre = tech.preexisting_in(region);
            if min != 0.0 || max.is_finite() || pre != 0.0 {
                capacity_rows.push(format!(
                    "{},{},{},{},{}\n",
                    tech.id,
                    region,
                    fmt_f64(min),
                    fmt_f64(max),
                    fmt_f64(pre)
                ));
            }
        }
    }
    fs::write(dir.join("technologies.csv"), out)?;
    if !capacity_rows.is_empty() {
        let mut out = String::from("technology,region,min,max,preexisting\n");
        for row in capacity_rows {
            out.push_str(&row);
        }
        fs::write(dir.join("technology_capacity.csv"), out)?;
    }

    if !model.storages.is_empty() {
        let mut storages: Vec<_> = model.storages.iter().collect();
        storages.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = String::from(
            "id,carrier,regions,power_investment,power_fixed_om,energy_investment,\
             energy_fixed_om,lifetime,charge_efficiency,discharge_efficiency,self_discharge,\
             e2p_min,e2p_max\n",
        );
        let mut pre_rows = Vec::new();
        for storage in &storages {
            let mut regions_sorted = storage.regions.clone();
            regions_sorted.sort();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                storage.id,
                storage.carrier,
                regions_sorted
                    .iter()
                    .map(|r| r.as_str())
                    .collect::<Vec<_>>()
                    .join(";"),
                fmt_f64(storage.power_investment),
                fmt_f64(storage.power_fixed_om),
                fmt_f64(storage.energy_investment),
                fmt_f64(storage.energy_fixed_om),
                fmt_f64(storage.lifetime),
                fmt_f64(storage.charge_efficiency),
                fmt_f64(storage.discharge_efficiency),
                fmt_f64(storage.self_discharge),
                fmt_f64(storage.energy_to_power_bounds.0),
                fmt_f64(storage.energy_to_power_bounds.1),
            ));
            for (region, (p, e)) in &storage.preexisting {
                pre_rows.push(format!(
                    "{},{},{},{}\n",
                    storage.id,
                    region,
                    fmt_f64(*p),
                    fmt_f64(*e)
                ));
            }
            if !storage.exogenous_inflow.is_empty() {
                write_series(
                    dir,
                    &format!("series/inflow.{}.csv", storage.id),
                    storage
                        .exogenous_inflow
                        .iter()
                        .map(|(r, v)| (r.as_str().to_string(), v.clone()))
                        .collect(),
                    model.horizon() as usize,
                )?;
            }
        }
        fs::write(dir.join("storages.csv"), out)?;
        if !pre_rows.is_empty() {
            let mut out = String::from("storage,region,power,energy\n");
            for row in pre_rows {
                out.push_str(&row);
            }
            fs::write(dir.join("storage_capacity.csv"), out)?;
        }
    }

    if !model.corridors.is_empty() {
        let mut corridors: Vec<_> = model.corridors.iter().collect();
        corridors.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = String::from(
            "id,from,to,carrier,distance_km,loss_per_1000km,preexisting,segments,lifetime,fixed_om\n",
        );
        for corridor in &corridors {
            let segments = corridor
                .segments
                .iter()
                .map(|s| format!("{}@{}", fmt_f64(s.capacity), fmt_f64(s.unit_cost)))
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                corridor.id,
                corridor.from,
                corridor.to,
                corridor.carrier,
                fmt_f64(corridor.distance_km),
                fmt_f64(corridor.loss_per_1000km),
                fmt_f64(corridor.preexisting),
                segments,
                fmt_f64(corridor.lifetime),
                fmt_f64(corridor.fixed_om),
            ));
        }
        fs::write(dir.join("corridors.csv"), out)?;
    }

    if !model.imports.is_empty() {
        let mut out = String::from("carrier,region,price_eur_per_mwh,limit_gw\n");
        let mut imports: Vec<_> = model.imports.iter().collect();
        imports.sort_by(|a, b| {
            (&a.carrier, &a.region, a.price_eur_per_mwh)
                .partial_cmp(&(&b.carrier, &b.region, b.price_eur_per_mwh))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for import in imports {
            out.push_str(&format!(
                "{},{},{},{}\n",
                import.carrier,
                import.region,
                fmt_f64(import.price_eur_per_mwh),
                import.limit_gw.map(fmt_f64).unwrap_or_default(),
            ));
        }
        fs::write(dir.join("imports.csv"), out)?;
    }

    Ok(())
}

fn write_series(
    dir: &Path,
    name: &str,
    columns: BTreeMap<String, Vec<f64>>,
    horizon: usize,
) -> std::io::Result<()> {
    let path: PathBuf = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::from("hour");
    for key in columns.keys() {
        out.push(',');
        out.push_str(key);
    }
    out.push('\n');
    for t in 0..horizon {
        out.push_str(&format!("{t}"));
        for values in columns.values() {
            out.push(',');
            out.push_str(&fmt_f64(values.get(t).copied().unwrap_or(0.0)));
        }
        out.push('\n');
    }
    fs::write(path, out)
}
