//! Case data model: network, generators, coal plants, storage and profiles.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::emission::{DynamicEmissionParams, StaticEmissionParams};

/// A network node. `id` is the external bus number used in case files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    #[serde(default)]
    pub reference: bool,
}

/// A transmission line under the DC approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub from: u32,
    pub to: u32,
    /// Per-unit susceptance (1 / reactance).
    pub susceptance: f64,
    /// Symmetric flow limit, MW.
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
}

impl Network {
    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    /// Map from external bus id to dense index (position in `buses`).
    pub fn bus_index(&self) -> HashMap<u32, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect()
    }

    pub fn reference_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.reference)
    }

    /// True when every bus can reach every other bus through the lines.
    pub fn is_connected(&self) -> bool {
        let n = self.buses.len();
        if n == 0 {
            return false;
        }
        let index = self.bus_index();
        let mut adj = vec![Vec::new(); n];
        for line in &self.lines {
            if let (Some(&i), Some(&j)) = (index.get(&line.from), index.get(&line.to)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// One block of a stepwise offer: `quantity` MW at `price` $/MWh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfferBlock {
    pub quantity: f64,
    pub price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    Coal,
    Gas,
    Nuclear,
    Wind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub id: String,
    pub bus: u32,
    pub kind: GenKind,
    pub g_min: f64,
    pub g_max: f64,
    /// Maximum change in output between consecutive slices, MW.
    pub ramp_limit: f64,
    #[serde(default)]
    pub no_load_cost: f64,
    #[serde(default)]
    pub startup_cost: f64,
    #[serde(default)]
    pub shutdown_cost: f64,
    #[serde(default = "one_hour")]
    pub min_uptime: u32,
    #[serde(default = "one_hour")]
    pub min_downtime: u32,
    #[serde(default)]
    pub offer_blocks: Vec<OfferBlock>,
    #[serde(default)]
    pub initial_commitment: bool,
    #[serde(default)]
    pub initial_output: f64,
    /// Hours the unit has been in its initial on/off state.
    #[serde(default = "one_hour")]
    pub hours_in_initial_state: u32,
}

fn one_hour() -> u32 {
    1
}

impl GeneratorSpec {
    pub fn is_wind(&self) -> bool {
        self.kind == GenKind::Wind
    }

    /// Units that can reach full output within one slice.
    pub fn is_peaker(&self) -> bool {
        !self.is_wind() && self.ramp_limit >= self.g_max
    }

    /// Offer cost of producing `g` MW for one hour.
    pub fn offer_cost(&self, g: f64) -> f64 {
        offer_cost(&self.offer_blocks, g)
    }
}

/// Stepwise offer cost, $/h at output `g`. Output beyond the offered
/// quantity is priced at the last block.
pub fn offer_cost(blocks: &[OfferBlock], g: f64) -> f64 {
    let mut remaining = g.max(0.0);
    let mut cost = 0.0;
    for (i, b) in blocks.iter().enumerate() {
        let take = if i + 1 == blocks.len() {
            remaining
        } else {
            remaining.min(b.quantity)
        };
        cost += take * b.price;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    cost
}

/// A coal plant modelled as Unit I (below the economic operation level) and
/// Unit II (above it).
#[derive(Debug, Clone, PartialEq)]
pub struct CoalPlantSpec {
    pub base: GeneratorSpec,
    /// Economic operation level, MW.
    pub eol: f64,
    pub static_params: StaticEmissionParams,
    pub dynamic_params: DynamicEmissionParams,
    /// Ramp-magnitude breakpoints for the emission step function, MW. Empty
    /// means four equal blocks up to the ramp limit.
    pub emission_breakpoints: Vec<f64>,
}

impl CoalPlantSpec {
    pub fn breakpoints(&self) -> Vec<f64> {
        if !self.emission_breakpoints.is_empty() {
            return self.emission_breakpoints.clone();
        }
        let top = self.base.ramp_limit.min(self.base.g_max);
        (0..=4).map(|i| top * i as f64 / 4.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageSpec {
    pub id: String,
    pub bus: u32,
    /// MW
    pub power_rating: f64,
    /// MWh
    pub energy_rating: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    /// MWh at the start of the horizon.
    pub initial_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub probability: f64,
    #[serde(default = "unit_scale")]
    pub load_scale: f64,
    #[serde(default = "unit_scale")]
    pub wind_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "base".into(),
            probability: 1.0,
            load_scale: 1.0,
            wind_scale: 1.0,
        }
    }
}

/// The full study input.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseData {
    pub name: String,
    /// MVA base used to convert per-unit susceptances to MW/rad.
    pub base_mva: f64,
    pub network: Network,
    pub generators: Vec<GeneratorSpec>,
    pub coal_plants: Vec<CoalPlantSpec>,
    pub storages: Vec<StorageSpec>,
    /// `load[t][n]`: MW at slice `t`, bus position `n`.
    pub load: Vec<Vec<f64>>,
    /// `wind[t][w]`: available MW of the `w`-th wind generator.
    pub wind: Vec<Vec<f64>>,
    pub horizon: usize,
    pub slice_hours: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub allow_curtailment: bool,
}

/// A single invariant violation with the path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl CaseData {
    pub fn wind_generators(&self) -> impl Iterator<Item = (usize, &GeneratorSpec)> {
        self.generators.iter().enumerate().filter(|(_, g)| g.is_wind())
    }

    /// Generator position of each coal plant's parent unit.
    pub fn coal_generator_positions(&self) -> Vec<usize> {
        self.coal_plants
            .iter()
            .map(|c| {
                self.generators
                    .iter()
                    .position(|g| g.id == c.base.id)
                    .expect("coal plant references a listed generator")
            })
            .collect()
    }

    /// Total system load per slice (unscaled).
    pub fn total_load(&self) -> Vec<f64> {
        self.load.iter().map(|row| row.iter().sum()).collect()
    }

    /// Available wind MW of generator `gen` at slice `t` under scenario `k`.
    pub fn wind_available(&self, gen: usize, t: usize, k: usize) -> f64 {
        let w = self
            .wind_generators()
            .position(|(i, _)| i == gen)
            .expect("generator is a wind unit");
        self.wind[t][w] * self.scenarios[k].wind_scale
    }

    pub fn load_at(&self, t: usize, bus: usize, k: usize) -> f64 {
        self.load[t][bus] * self.scenarios[k].load_scale
    }

    /// Copy of this case with every wind profile set to zero.
    pub fn without_wind(&self) -> CaseData {
        let mut c = self.clone();
        for row in &mut c.wind {
            for v in row.iter_mut() {
                *v = 0.0;
            }
        }
        c
    }

    /// Checks every invariant of the case and returns the violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |path: String, message: String| out.push(Violation { path, message });

        // network
        let net = &self.network;
        if net.buses.is_empty() {
            push("network.buses".into(), "no buses".into());
        }
        let mut ids = HashSet::new();
        for (i, b) in net.buses.iter().enumerate() {
            if !ids.insert(b.id) {
                push(format!("network.buses[{i}].id"), format!("duplicate bus id {}", b.id));
            }
        }
        let refs = net.buses.iter().filter(|b| b.reference).count();
        if refs != 1 {
            push(
                "network.buses".into(),
                format!("expected exactly one reference bus, found {refs}"),
            );
        }
        for (i, l) in net.lines.iter().enumerate() {
            let p = format!("network.lines[{i}]");
            if !ids.contains(&l.from) {
                push(format!("{p}.from"), format!("unknown bus {}", l.from));
            }
            if !ids.contains(&l.to) {
                push(format!("{p}.to"), format!("unknown bus {}", l.to));
            }
            if l.from == l.to {
                push(p.clone(), "line connects a bus to itself".into());
            }
            if !(l.susceptance > 0.0) {
                push(format!("{p}.susceptance"), "must be positive".into());
            }
            if !(l.capacity > 0.0) {
                push(format!("{p}.capacity"), "must be positive".into());
            }
        }
        if !net.buses.is_empty() && !net.is_connected() {
            push("network".into(), "network is not connected".into());
        }

        // generators
        if self.generators.is_empty() {
            push("generators".into(), "no generators".into());
        }
        let mut gen_ids = HashSet::new();
        for (i, g) in self.generators.iter().enumerate() {
            let p = format!("generators[{i}] ({})", g.id);
            if !gen_ids.insert(g.id.as_str()) {
                push(p.clone(), "duplicate generator id".into());
            }
            if !ids.contains(&g.bus) {
                push(format!("{p}.bus"), format!("unknown bus {}", g.bus));
            }
            if !(0.0 <= g.g_min && g.g_min <= g.g_max) {
                push(format!("{p}.g_min"), "need 0 <= g_min <= g_max".into());
            }
            if !(g.ramp_limit > 0.0) {
                push(format!("{p}.ramp_limit"), "must be positive".into());
            }
            if g.min_uptime < 1 || g.min_downtime < 1 {
                push(format!("{p}.min_uptime"), "minimum up/down times must be >= 1".into());
            }
            if g.no_load_cost < 0.0 || g.startup_cost < 0.0 || g.shutdown_cost < 0.0 {
                push(format!("{p}"), "commitment costs must be nonnegative".into());
            }
            if !(0.0..=g.g_max).contains(&g.initial_output) {
                push(format!("{p}.initial_output"), "outside [0, g_max]".into());
            }
            if !g.initial_commitment && g.initial_output != 0.0 && !g.is_wind() {
                push(
                    format!("{p}.initial_output"),
                    "uncommitted unit must start at 0 MW".into(),
                );
            }
            if !g.is_wind() {
                let offered: f64 = g.offer_blocks.iter().map(|b| b.quantity).sum();
                if offered + 1e-9 < g.g_max {
                    push(
                        format!("{p}.offer_blocks"),
                        format!("offered {offered} MW is below g_max {}", g.g_max),
                    );
                }
            }
            for (j, b) in g.offer_blocks.iter().enumerate() {
                if !(b.quantity > 0.0) {
                    push(format!("{p}.offer_blocks[{j}].quantity"), "must be positive".into());
                }
                if j > 0 && b.price < g.offer_blocks[j - 1].price {
                    push(
                        format!("{p}.offer_blocks[{j}].price"),
                        "offer prices must be non-decreasing".into(),
                    );
                }
            }
        }

        // coal plants
        let mut coal_ids = HashSet::new();
        for (i, c) in self.coal_plants.iter().enumerate() {
            let p = format!("coal_plants[{i}] ({})", c.base.id);
            if !coal_ids.insert(c.base.id.as_str()) {
                push(p.clone(), "generator split twice".into());
            }
            match self.generators.iter().find(|g| g.id == c.base.id) {
                None => push(format!("{p}.generator"), "unknown generator".into()),
                Some(g) if g.kind != GenKind::Coal => {
                    push(format!("{p}.generator"), "referenced generator is not coal".into())
                }
                _ => {}
            }
            if !(c.base.g_min < c.eol && c.eol < c.base.g_max) {
                push(format!("{p}.eol"), "eol must lie strictly inside (g_min, g_max)".into());
            }
            if let Err(e) = c.static_params.check() {
                push(format!("{p}.static_emission"), e.to_string());
            }
            if let Err(e) = c.dynamic_params.check() {
                push(format!("{p}.dynamic_emission"), e.to_string());
            }
            let bp = c.breakpoints();
            if bp.first().copied() != Some(0.0) || bp.windows(2).any(|w| w[1] <= w[0]) {
                push(
                    format!("{p}.emission_breakpoints"),
                    "must start at 0 and increase strictly".into(),
                );
            }
        }

        // storage
        for (i, s) in self.storages.iter().enumerate() {
            let p = format!("storages[{i}] ({})", s.id);
            if !ids.contains(&s.bus) {
                push(format!("{p}.bus"), format!("storage {} at unknown bus {}", s.id, s.bus));
            }
            if s.power_rating < 0.0 || s.energy_rating < 0.0 {
                push(p.clone(), "ratings must be nonnegative".into());
            }
            for (name, e) in [
                ("charge_efficiency", s.charge_efficiency),
                ("discharge_efficiency", s.discharge_efficiency),
            ] {
                if !(e > 0.0 && e <= 1.0) {
                    push(format!("{p}.{name}"), "must lie in (0, 1]".into());
                }
            }
            if !(0.0 <= s.initial_energy && s.initial_energy <= s.energy_rating) {
                push(format!("{p}.initial_energy"), "outside [0, energy_rating]".into());
            }
        }

        // profiles
        if self.horizon == 0 {
            push("horizon".into(), "horizon must be at least one slice".into());
        }
        if self.load.len() != self.horizon {
            push(
                "profiles.load".into(),
                format!("{} rows for a horizon of {}", self.load.len(), self.horizon),
            );
        }
        for (t, row) in self.load.iter().enumerate() {
            if row.len() != net.buses.len() {
                push(format!("profiles.load[{t}]"), format!("expected {} columns", net.buses.len()));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                push(format!("profiles.load[{t}]"), "loads must be finite and nonnegative".into());
            }
        }
        let n_wind = self.wind_generators().count();
        if self.wind.len() != self.horizon && (n_wind > 0 || !self.wind.is_empty()) {
            push(
                "profiles.wind".into(),
                format!("{} rows for a horizon of {}", self.wind.len(), self.horizon),
            );
        }
        for (t, row) in self.wind.iter().enumerate() {
            if row.len() != n_wind {
                push(format!("profiles.wind[{t}]"), format!("expected {n_wind} columns"));
            }
            for (w, (_, g)) in row.iter().zip(self.wind_generators()) {
                if *w < 0.0 || *w > g.g_max + 1e-9 {
                    push(
                        format!("profiles.wind[{t}]"),
                        format!("{} outside [0, g_max] for {}", w, g.id),
                    );
                }
            }
        }
        if self.slice_hours.len() != self.horizon || self.slice_hours.iter().any(|h| !(*h > 0.0)) {
            push("slice_hours".into(), "need one positive duration per slice".into());
        }

        // scenarios
        if self.scenarios.is_empty() {
            push("scenarios".into(), "no scenarios".into());
        }
        let total: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            push(
                "scenarios".into(),
                format!("probabilities sum to {total}, expected 1"),
            );
        }
        for (k, s) in self.scenarios.iter().enumerate() {
            if s.probability < 0.0 || s.load_scale < 0.0 || s.wind_scale < 0.0 {
                push(format!("scenarios[{k}]"), "negative probability or scale".into());
            }
        }

        // hourly adequacy
        let shape_ok = self.load.len() == self.horizon
            && self.load.iter().all(|r| r.len() == net.buses.len())
            && (n_wind == 0 || self.wind.len() == self.horizon);
        if shape_ok {
            let thermal: f64 = self
                .generators
                .iter()
                .filter(|g| !g.is_wind())
                .map(|g| g.g_max)
                .sum();
            let storage: f64 = self.storages.iter().map(|s| s.power_rating).sum();
            for (k, sc) in self.scenarios.iter().enumerate() {
                for t in 0..self.horizon {
                    let load: f64 = self.load[t].iter().sum::<f64>() * sc.load_scale;
                    let wind: f64 = if n_wind > 0 {
                        self.wind[t].iter().sum::<f64>() * sc.wind_scale
                    } else {
                        0.0
                    };
                    if thermal + wind + storage + 1e-9 < load {
                        push(
                            format!("profiles.load[{t}]"),
                            format!(
                                "scenario {k}: load {load:.3} MW exceeds available capacity {:.3} MW",
                                thermal + wind + storage
                            ),
                        );
                    }
                }
            }
        }
        out
    }
}
