#![allow(dead_code)]

use deepcycle::grid::{parse_case, CaseData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn case_from(v: Value) -> CaseData {
    parse_case(&v.to_string()).expect("test case is valid")
}

fn offers(rng: &mut ChaCha8Rng, g_max: f64, base: std::ops::RangeInclusive<u32>) -> Value {
    let n = rng.random_range(1..=3);
    let mut price = rng.random_range(base) as f64;
    let mut left = g_max;
    let mut blocks = Vec::new();
    for i in 0..n {
        let q = if i + 1 == n { left } else { (left * rng.random_range(0.3..0.6)).round() };
        left -= q;
        blocks.push(json!({"quantity": q, "price": price}));
        price += rng.random_range(0.5..20.0_f64).round();
    }
    json!(blocks)
}

/// A small random UC case: one coal plant plus either a gas unit
/// (at most 2 slices) or a wind unit (at most 4 slices), on one or two
/// buses. At most 20 binary columns. The load follows a walk the coal plant
/// can track on its own, so every instance is feasible.
pub fn tiny_case(seed: u64) -> CaseData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let with_gas = rng.random_bool(0.5);
    let horizon = if with_gas { rng.random_range(1..=2) } else { rng.random_range(1..=4) };
    let two_buses = rng.random_bool(0.5);

    let g_max: f64 = rng.random_range(40..=80) as f64;
    let g_min: f64 = rng.random_range(5..=15) as f64;
    let eol = (g_min + (g_max - g_min) * rng.random_range(0.3..0.7)).round();
    let ramp: f64 = rng.random_range(20..=40) as f64;
    let on0 = rng.random_bool(0.7);
    let init = if on0 { rng.random_range(g_min..=g_max).round() } else { 0.0 };
    let min_down = rng.random_range(1..=2);
    let coal = json!({
        "id": "C1", "bus": 1, "kind": "coal",
        "g_min": g_min, "g_max": g_max,
        "ramp_limit": ramp,
        "no_load_cost": rng.random_range(0..=50) as f64,
        "startup_cost": rng.random_range(0..=300) as f64,
        "shutdown_cost": rng.random_range(0..=20) as f64,
        "min_uptime": rng.random_range(1..=3),
        "min_downtime": min_down,
        "offer_blocks": offers(&mut rng, g_max, 5..=15),
        "initial_commitment": on0,
        "initial_output": init,
        "hours_in_initial_state": if on0 { rng.random_range(1..=3) } else { 3 },
    });
    let second_bus = if two_buses { 2 } else { 1 };
    let mut generators = vec![coal];
    let mut wind = Vec::new();
    if with_gas {
        let gmax: f64 = rng.random_range(40..=90) as f64;
        generators.push(json!({
            "id": "P1", "bus": second_bus, "kind": "gas",
            "g_min": rng.random_range(0..=10) as f64, "g_max": gmax, "ramp_limit": gmax,
            "no_load_cost": rng.random_range(0..=30) as f64,
            "startup_cost": rng.random_range(0..=100) as f64,
            "offer_blocks": offers(&mut rng, gmax, 10..=60),
            "initial_commitment": false, "initial_output": 0.0,
            "hours_in_initial_state": 2,
        }));
    } else {
        generators.push(json!({
            "id": "W1", "bus": second_bus, "kind": "wind",
            "g_min": 0.0, "g_max": 40.0, "ramp_limit": 40.0,
        }));
        wind = (0..horizon).map(|_| vec![rng.random_range(0..=25) as f64]).collect();
    }
    let mut buses = vec![json!({"id": 1, "reference": true})];
    let mut lines = Vec::new();
    let mut load = Vec::new();
    let mut level = if on0 { init } else { g_min + 5.0 };
    for _ in 0..horizon {
        level = (level + rng.random_range(-0.5 * ramp..0.5 * ramp)).clamp(g_min + 5.0, g_max).round();
        if two_buses {
            let share = (level * rng.random_range(0.2..0.8)).round();
            load.push(vec![level - share, share]);
        } else {
            load.push(vec![level]);
        }
    }
    if two_buses {
        buses.push(json!({"id": 2}));
        lines.push(json!({"from": 1, "to": 2, "susceptance": 10.0, "capacity": (g_max * rng.random_range(0.8..1.2)).round()}));
    }
    case_from(json!({
        "name": format!("tiny{seed}"),
        "network": {"buses": buses, "lines": lines},
        "generators": generators,
        "coal_plants": [{"generator": "C1", "eol": eol}],
        "profiles": {"load": load, "wind": wind},
        "horizon": horizon,
        "allow_curtailment": true,
    }))
}

/// One bus, one gas unit, one slice with 50 MW of load.
pub fn single_gen_case() -> CaseData {
    case_from(json!({
        "name": "single",
        "network": {"buses": [{"id": 1, "reference": true}], "lines": []},
        "generators": [{
            "id": "G1", "bus": 1, "kind": "gas", "g_min": 0.0, "g_max": 100.0, "ramp_limit": 100.0,
            "offer_blocks": [{"quantity": 100.0, "price": 10.0}],
            "initial_commitment": true, "initial_output": 50.0
        }],
        "profiles": {"load": [[50.0]]},
        "horizon": 1
    }))
}

/// One bus, a gas unit and a storage device under a two-level price
/// spread: cheap energy in the first half of the horizon, dear energy in
/// the second.
pub fn storage_case(charge_eff: f64, discharge_eff: f64) -> CaseData {
    case_from(json!({
        "name": "storage",
        "network": {"buses": [{"id": 1, "reference": true}], "lines": []},
        "generators": [
            {
                "id": "B1", "bus": 1, "kind": "gas", "g_min": 0.0, "g_max": 60.0, "ramp_limit": 60.0,
                "offer_blocks": [{"quantity": 40.0, "price": 10.0}, {"quantity": 20.0, "price": 80.0}],
                "initial_commitment": true, "initial_output": 30.0, "hours_in_initial_state": 4
            }
        ],
        "storages": [{
            "id": "S1", "bus": 1, "power_rating": 10.0, "energy_rating": 25.0,
            "charge_efficiency": charge_eff, "discharge_efficiency": discharge_eff, "initial_energy": 5.0
        }],
        "profiles": {"load": [[20.0], [25.0], [30.0], [45.0], [50.0], [48.0]]},
        "horizon": 6
    }))
}

/// One bus with a single coal plant (10–60 MW, ceiling 30 MW) serving
/// the given load profile.
pub fn coal_only_case(load: &[f64]) -> CaseData {
    let rows: Vec<Vec<f64>> = load.iter().map(|&l| vec![l]).collect();
    case_from(json!({
        "name": "coal",
        "network": {"buses": [{"id": 1, "reference": true}], "lines": []},
        "generators": [{
            "id": "C1", "bus": 1, "kind": "coal", "g_min": 10.0, "g_max": 60.0, "ramp_limit": 60.0,
            "no_load_cost": 10.0,
            "offer_blocks": [{"quantity": 30.0, "price": 5.0}, {"quantity": 30.0, "price": 9.0}],
            "initial_commitment": true, "initial_output": load[0], "hours_in_initial_state": 4
        }],
        "coal_plants": [{"generator": "C1", "eol": 30.0}],
        "profiles": {"load": rows},
        "horizon": load.len()
    }))
}
