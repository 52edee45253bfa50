//! Case file (JSON) and profile CSV reading/writing.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CaseData, CaseError, CoalPlantSpec, GeneratorSpec, Network, Scenario, StorageSpec, Violation};
use crate::emission::{DynamicEmissionParams, StaticEmissionParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default)]
    name: String,
    #[serde(default = "default_base_mva")]
    base_mva: f64,
    network: Network,
    generators: Vec<GeneratorSpec>,
    #[serde(default)]
    coal_plants: Vec<CoalPlantEntry>,
    #[serde(default)]
    storages: Vec<StorageSpec>,
    profiles: Profiles,
    horizon: usize,
    #[serde(default)]
    slice_hours: Option<SliceHours>,
    #[serde(default)]
    scenarios: Vec<Scenario>,
    #[serde(default)]
    allow_curtailment: bool,
}

fn default_base_mva() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoalPlantEntry {
    generator: String,
    eol: f64,
    #[serde(default = "reference_static")]
    static_emission: StaticEmissionParams,
    #[serde(default = "reference_dynamic")]
    dynamic_emission: DynamicEmissionParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    emission_breakpoints: Vec<f64>,
}

fn reference_static() -> StaticEmissionParams {
    StaticEmissionParams::REFERENCE
}

fn reference_dynamic() -> DynamicEmissionParams {
    DynamicEmissionParams::REFERENCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Profiles {
    load: Vec<Vec<f64>>,
    #[serde(default)]
    wind: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SliceHours {
    Uniform(f64),
    PerSlice(Vec<f64>),
}

/// Reads and validates a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<CaseData, CaseError> {
    let path = path.as_ref();
    let mut text = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CaseError::Io(format!("{}: {e}", path.display())))?;
    parse_case(&text)
}

/// Parses and validates case JSON.
pub fn parse_case(text: &str) -> Result<CaseData, CaseError> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| CaseError::Parse(e.to_string()))?;
    let case = resolve(file)?;
    let violations = case.validate();
    if violations.is_empty() {
        Ok(case)
    } else {
        Err(CaseError::Invalid(violations))
    }
}

fn resolve(file: CaseFile) -> Result<CaseData, CaseError> {
    let mut coal_plants = Vec::with_capacity(file.coal_plants.len());
    let mut missing = Vec::new();
    for (i, entry) in file.coal_plants.into_iter().enumerate() {
        match file.generators.iter().find(|g| g.id == entry.generator) {
            Some(g) => coal_plants.push(CoalPlantSpec {
                base: g.clone(),
                eol: entry.eol,
                static_params: entry.static_emission,
                dynamic_params: entry.dynamic_emission,
                emission_breakpoints: entry.emission_breakpoints,
            }),
            None => missing.push(Violation {
                path: format!("coal_plants[{i}].generator"),
                message: format!("unknown generator {}", entry.generator),
            }),
        }
    }
    if !missing.is_empty() {
        return Err(CaseError::Invalid(missing));
    }
    let slice_hours = match file.slice_hours {
        None => vec![1.0; file.horizon],
        Some(SliceHours::Uniform(h)) => vec![h; file.horizon],
        Some(SliceHours::PerSlice(v)) => v,
    };
    let scenarios = if file.scenarios.is_empty() {
        vec![Scenario::default()]
    } else {
        file.scenarios
    };
    Ok(CaseData {
        name: file.name,
        base_mva: file.base_mva,
        network: file.network,
        generators: file.generators,
        coal_plants,
        storages: file.storages,
        load: file.profiles.load,
        wind: file.profiles.wind,
        horizon: file.horizon,
        slice_hours,
        scenarios,
        allow_curtailment: file.allow_curtailment,
    })
}

/// Serializes a case back to the case-file JSON schema.
pub fn case_to_json(case: &CaseData) -> String {
    let file = CaseFile {
        name: case.name.clone(),
        base_mva: case.base_mva,
        network: case.network.clone(),
        generators: case.generators.clone(),
        coal_plants: case
            .coal_plants
            .iter()
            .map(|c| CoalPlantEntry {
                generator: c.base.id.clone(),
                eol: c.eol,
                static_emission: c.static_params,
                dynamic_emission: c.dynamic_params,
                emission_breakpoints: c.emission_breakpoints.clone(),
            })
            .collect(),
        storages: case.storages.clone(),
        profiles: Profiles {
            load: case.load.clone(),
            wind: case.wind.clone(),
        },
        horizon: case.horizon,
        slice_hours: Some(SliceHours::PerSlice(case.slice_hours.clone())),
        scenarios: case.scenarios.clone(),
        allow_curtailment: case.allow_curtailment,
    };
    serde_json::to_string_pretty(&file).expect("case data serializes")
}

/// Reads an hourly profile CSV.
///
/// The header names one column per entity (bus ids for load, wind generator
/// ids for wind); an optional leading `hour` column is ignored. Each
/// following row is one hour. Entities missing from the file get zero.
pub fn read_profile_csv<R: Read>(reader: R, columns: &[String]) -> Result<Vec<Vec<f64>>, CaseError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CaseError::Parse(e.to_string()))?
        .clone();
    let mut mapping = Vec::with_capacity(header.len());
    for h in header.iter() {
        if h.eq_ignore_ascii_case("hour") || h.eq_ignore_ascii_case("t") {
            mapping.push(None);
            continue;
        }
        match columns.iter().position(|c| c == h) {
            Some(p) => mapping.push(Some(p)),
            None => return Err(CaseError::Parse(format!("profile column {h:?} matches no entity"))),
        }
    }
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CaseError::Parse(e.to_string()))?;
        let mut row = vec![0.0; columns.len()];
        for (field, slot) in rec.iter().zip(&mapping) {
            if let Some(p) = slot {
                row[*p] = field
                    .parse()
                    .map_err(|_| CaseError::Parse(format!("row {}: bad number {field:?}", r + 1)))?;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

impl CaseData {
    /// Replaces the load profile with one read from CSV (columns = bus ids)
    /// and adjusts the horizon to the number of rows.
    pub fn with_load_csv<R: Read>(mut self, reader: R) -> Result<CaseData, CaseError> {
        let cols: Vec<String> = self.network.buses.iter().map(|b| b.id.to_string()).collect();
        self.load = read_profile_csv(reader, &cols)?;
        self.horizon = self.load.len();
        self.slice_hours.resize(self.horizon, 1.0);
        self.revalidate()
    }

    /// Replaces the wind profile with one read from CSV (columns = wind
    /// generator ids).
    pub fn with_wind_csv<R: Read>(mut self, reader: R) -> Result<CaseData, CaseError> {
        let cols: Vec<String> = self.wind_generators().map(|(_, g)| g.id.clone()).collect();
        self.wind = read_profile_csv(reader, &cols)?;
        self.revalidate()
    }

    fn revalidate(self) -> Result<CaseData, CaseError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(CaseError::Invalid(v))
        }
    }
}
