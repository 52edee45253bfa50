use serde::Serialize;

use crate::grid::CaseData;

/// Variable kinds in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    /// Bus voltage angle, rad.
    Theta,
    /// Generator output, MW (every generator, wind included).
    Dispatch,
    /// Coal Unit I output, MW.
    UnitI,
    /// Coal Unit II output, MW.
    UnitII,
    Commit,
    Startup,
    Shutdown,
    CommitI,
    CommitII,
    /// Unit I ramp up, MW.
    Alpha,
    /// Unit I ramp down, MW.
    Beta,
    /// Offer cost epigraph, $/h.
    Cost,
    AlphaCost,
    BetaCost,
    /// Storage charge rate, MW.
    Charge,
    /// Storage discharge rate, MW.
    Discharge,
    /// Stored energy at the end of a slice, MWh.
    Energy,
}

impl VarKind {
    pub const ALL: [VarKind; 17] = [
        VarKind::Theta,
        VarKind::Dispatch,
        VarKind::UnitI,
        VarKind::UnitII,
        VarKind::Commit,
        VarKind::Startup,
        VarKind::Shutdown,
        VarKind::CommitI,
        VarKind::CommitII,
        VarKind::Alpha,
        VarKind::Beta,
        VarKind::Cost,
        VarKind::AlphaCost,
        VarKind::BetaCost,
        VarKind::Charge,
        VarKind::Discharge,
        VarKind::Energy,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            VarKind::Theta => "theta",
            VarKind::Dispatch => "g",
            VarKind::UnitI => "gI",
            VarKind::UnitII => "gII",
            VarKind::Commit => "u",
            VarKind::Startup => "s",
            VarKind::Shutdown => "h",
            VarKind::CommitI => "uI",
            VarKind::CommitII => "uII",
            VarKind::Alpha => "alpha",
            VarKind::Beta => "beta",
            VarKind::Cost => "y",
            VarKind::AlphaCost => "ya",
            VarKind::BetaCost => "yb",
            VarKind::Charge => "gamma",
            VarKind::Discharge => "nu",
            VarKind::Energy => "delta",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(
            self,
            VarKind::Commit | VarKind::Startup | VarKind::Shutdown | VarKind::CommitI | VarKind::CommitII
        )
    }

    /// Which entity list the kind ranges over.
    pub fn entity_class(self) -> EntityClass {
        match self {
            VarKind::Theta => EntityClass::Bus,
            VarKind::Dispatch => EntityClass::Generator,
            VarKind::Commit | VarKind::Startup | VarKind::Shutdown | VarKind::Cost => EntityClass::Thermal,
            VarKind::UnitI
            | VarKind::UnitII
            | VarKind::CommitI
            | VarKind::CommitII
            | VarKind::Alpha
            | VarKind::Beta
            | VarKind::AlphaCost
            | VarKind::BetaCost => EntityClass::Coal,
            VarKind::Charge | VarKind::Discharge | VarKind::Energy => EntityClass::Storage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityClass {
    Bus,
    Generator,
    /// Non-wind generators, which carry commitment and offer costs.
    Thermal,
    Coal,
    Storage,
}

/// A decoded column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VarRef {
    pub kind: VarKind,
    /// Position within the kind's entity list.
    pub entity: usize,
    pub t: usize,
    pub k: usize,
}

/// Dense column map ordered by kind, then entity, then slice, then scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableIndex {
    pub horizon: usize,
    pub scenarios: usize,
    pub buses: Vec<String>,
    pub generators: Vec<String>,
    /// Generator positions of the thermal (non-wind) units.
    pub thermal: Vec<usize>,
    /// Generator positions of the coal plants.
    pub coal: Vec<usize>,
    pub storages: Vec<String>,
    starts: Vec<usize>,
    total: usize,
}

impl VariableIndex {
    pub fn new(case: &CaseData) -> Self {
        let thermal: Vec<usize> = (0..case.generators.len()).filter(|&i| !case.generators[i].is_wind()).collect();
        let mut idx = VariableIndex {
            horizon: case.horizon,
            scenarios: case.scenarios.len(),
            buses: case.network.buses.iter().map(|b| b.id.to_string()).collect(),
            generators: case.generators.iter().map(|g| g.id.clone()).collect(),
            thermal,
            coal: case.coal_generator_positions(),
            storages: case.storages.iter().map(|s| s.id.clone()).collect(),
            starts: Vec::new(),
            total: 0,
        };
        let mut at = 0;
        for kind in VarKind::ALL {
            idx.starts.push(at);
            at += idx.entity_count(kind.entity_class()) * idx.horizon * idx.scenarios;
        }
        idx.total = at;
        idx
    }

    pub fn entity_count(&self, class: EntityClass) -> usize {
        match class {
            EntityClass::Bus => self.buses.len(),
            EntityClass::Generator => self.generators.len(),
            EntityClass::Thermal => self.thermal.len(),
            EntityClass::Coal => self.coal.len(),
            EntityClass::Storage => self.storages.len(),
        }
    }

    pub fn num_columns(&self) -> usize {
        self.total
    }

    /// Column count from the case dimensions alone:
    /// `T K (N_bus + N_gen + 4 N_thermal + 8 N_coal + 3 N_storage)`.
    pub fn closed_form_count(buses: usize, generators: usize, thermal: usize, coal: usize, storages: usize, horizon: usize, scenarios: usize) -> usize {
        horizon * scenarios * (buses + generators + 4 * thermal + 8 * coal + 3 * storages)
    }

    pub fn col(&self, kind: VarKind, entity: usize, t: usize, k: usize) -> usize {
        let n = self.entity_count(kind.entity_class());
        assert!(entity < n && t < self.horizon && k < self.scenarios, "{kind:?}[{entity}] t={t} k={k} out of range");
        self.starts[kind as usize] + (entity * self.horizon + t) * self.scenarios + k
    }

    pub fn decode(&self, col: usize) -> Option<VarRef> {
        if col >= self.total {
            return None;
        }
        let kind = VarKind::ALL
            .iter()
            .copied()
            .rev()
            .find(|&k| self.starts[k as usize] <= col && self.entity_count(k.entity_class()) > 0)?;
        let rel = col - self.starts[kind as usize];
        let k = rel % self.scenarios;
        let t = (rel / self.scenarios) % self.horizon;
        let entity = rel / (self.scenarios * self.horizon);
        Some(VarRef { kind, entity, t, k })
    }

    /// Position of generator `gen` within the thermal list.
    pub fn thermal_pos(&self, gen: usize) -> Option<usize> {
        self.thermal.iter().position(|&g| g == gen)
    }

    pub fn entity_name(&self, kind: VarKind, entity: usize) -> &str {
        match kind.entity_class() {
            EntityClass::Bus => &self.buses[entity],
            EntityClass::Generator => &self.generators[entity],
            EntityClass::Thermal => &self.generators[self.thermal[entity]],
            EntityClass::Coal => &self.generators[self.coal[entity]],
            EntityClass::Storage => &self.storages[entity],
        }
    }

    /// Column name such as `g_G1_t3_k0` (slices counted from 1).
    pub fn name(&self, col: usize) -> String {
        let v = self.decode(col).expect("column in range");
        format!("{}_{}_t{}_k{}", v.kind.symbol(), self.entity_name(v.kind, v.entity), v.t + 1, v.k)
    }

    pub fn theta(&self, bus: usize, t: usize, k: usize) -> usize {
        self.col(VarKind::Theta, bus, t, k)
    }

    pub fn g(&self, gen: usize, t: usize, k: usize) -> usize {
        self.col(VarKind::Dispatch, gen, t, k)
    }

    /// Commitment column of a thermal generator (by generator position).
    pub fn u(&self, gen: usize, t: usize, k: usize) -> Option<usize> {
        self.thermal_pos(gen).map(|e| self.col(VarKind::Commit, e, t, k))
    }
}
