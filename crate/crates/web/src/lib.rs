//! Browser bindings for the demo page. Every entry point takes and returns
//! JSON text so the page needs no generated type definitions.

use deepcycle::analysis::{deep_cycle_metrics, emission_accounting, extract_schedule, AccountingOptions};
use deepcycle::emission::{
    build_emission_blocks, dynamic_hourly_emission, ramp_power_sum, transition_profile, transition_static_emission,
    DynamicEmissionParams, StaticEmissionParams,
};
use deepcycle::grid::parse_case;
use deepcycle::milp::{solve_milp, SolverOptions};
use deepcycle::uc::{assemble, AssembleOptions, RampCostLevel};
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// A two-bus, four-hour case that solves in well under a second.
pub const DEMO_CASE: &str = include_str!("demo_case.json");

const PROFILE_POINTS: usize = 121;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionQuery {
    #[serde(rename = "static")]
    pub static_params: StaticEmissionParams,
    pub dynamic: DynamicEmissionParams,
    pub g_prev: f64,
    pub g: f64,
    pub g_next: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockQuery {
    pub dynamic: DynamicEmissionParams,
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveQuery {
    pub case: Value,
    #[serde(default)]
    pub ru: f64,
    #[serde(default)]
    pub rd: f64,
    #[serde(default)]
    pub carbon_price: f64,
    #[serde(default)]
    pub node_limit: Option<usize>,
}

fn parse<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("bad request: {e}"))
}

/// Hourly emission split into its parts, plus the output and emission-rate
/// trajectory over the hour.
pub fn emission_breakdown(q: &EmissionQuery) -> Result<Value, String> {
    let (ps, pd) = (&q.static_params, &q.dynamic);
    let total = dynamic_hourly_emission(ps, pd, q.g_prev, q.g, q.g_next).map_err(|e| e.to_string())?;
    let profile = transition_profile(q.g_prev, q.g, q.g_next, pd.tau).map_err(|e| e.to_string())?;
    let hold = ps.f0 + ps.f1 * q.g.powf(ps.n1);
    let with_transition = transition_static_emission(ps, q.g_prev, q.g, q.g_next, pd.tau);
    let points: Vec<Value> = (0..PROFILE_POINTS)
        .map(|i| {
            let t = i as f64 / (PROFILE_POINTS - 1) as f64;
            json!({"t": t, "output": profile.output_at(t), "rate": profile.emission_rate(ps, pd, t)})
        })
        .collect();
    Ok(json!({
        "static": hold,
        "transition": with_transition - hold,
        "dynamic": pd.b * pd.tau * ramp_power_sum(q.g_prev, q.g, q.g_next, pd.n2),
        "total": total,
        "profile": points,
    }))
}

/// Step approximation of the ramp emission curve.
pub fn emission_block_table(q: &BlockQuery) -> Result<Value, String> {
    let blocks = build_emission_blocks(&q.dynamic, &q.breakpoints).map_err(|e| e.to_string())?;
    let p = q.dynamic.n2 + 1.0;
    let curve = |x: f64| q.dynamic.b * q.dynamic.tau * x.powf(q.dynamic.n2);
    let rows: Vec<Value> = blocks
        .iter()
        .map(|b| {
            json!({
                "lo": b.lo,
                "hi": b.hi,
                "rate": b.rate,
                "area": b.rate * b.width(),
                "curve_area": q.dynamic.b * q.dynamic.tau * (b.hi.powf(p) - b.lo.powf(p)) / p,
            })
        })
        .collect();
    let top = q.breakpoints.last().copied().unwrap_or(0.0);
    let samples: Vec<Value> = (0..=60).map(|i| top * i as f64 / 60.0).map(|x| json!([x, curve(x)])).collect();
    Ok(json!({"blocks": rows, "curve": samples}))
}

/// Solves a case at one ramp-cost level and returns the schedule summary.
pub fn solve_schedule(q: &SolveQuery) -> Result<Value, String> {
    let case = parse_case(&q.case.to_string()).map_err(|e| e.to_string())?;
    let blocks = if q.carbon_price > 0.0 {
        case.coal_plants
            .iter()
            .map(|c| build_emission_blocks(&c.dynamic_params, &c.breakpoints()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
    } else {
        Vec::new()
    };
    let level = RampCostLevel::new("demo", q.ru, q.rd);
    let opts = AssembleOptions { carbon_price: q.carbon_price, ..AssembleOptions::default() };
    let (problem, idx) = assemble(&case, &blocks, &level, &opts).map_err(|e| e.to_string())?;
    let solver = SolverOptions { node_limit: q.node_limit.or(Some(20_000)), ..SolverOptions::default() };
    let sol = solve_milp(&problem, &solver).map_err(|e| e.to_string())?;
    if !sol.has_solution() {
        return Ok(json!({"status": sol.status, "nodes": sol.nodes}));
    }
    let sched = extract_schedule(&sol, &idx, &case).map_err(|e| e.to_string())?;
    let params: Vec<_> = case.coal_plants.iter().map(|c| (c.static_params, c.dynamic_params)).collect();
    let acc = AccountingOptions { carbon_price: q.carbon_price, ..AccountingOptions::default() };
    let emissions = emission_accounting(&sched, &params, &acc).map_err(|e| e.to_string())?;
    let metrics = deep_cycle_metrics(&sched);
    Ok(json!({
        "status": sol.status,
        "objective": sol.objective,
        "gap": sol.gap,
        "nodes": sol.nodes,
        "generators": sched.generators,
        "load": sched.load,
        "dispatch": sched.dispatch[0],
        "commitment": sched.commitment[0],
        "coal_plants": sched.coal_plants,
        "unit_i": sched.unit_i[0],
        "unit_ii": sched.unit_ii[0],
        "ramp_total_mw": metrics.ramp_total(),
        "deep_cycle_slices": metrics.deep_cycle_slices(),
        "co2_t": {
            "static": emissions.static_total,
            "transition": emissions.transition_total,
            "dynamic": emissions.dynamic_total,
            "total": emissions.total,
        },
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn demo_case() -> String {
    DEMO_CASE.to_string()
}

#[wasm_bindgen]
pub fn emission(request: &str) -> Result<String, JsError> {
    to_js(parse(request).and_then(|q| emission_breakdown(&q)))
}

#[wasm_bindgen]
pub fn blocks(request: &str) -> Result<String, JsError> {
    to_js(parse(request).and_then(|q| emission_block_table(&q)))
}

#[wasm_bindgen]
pub fn solve(request: &str) -> Result<String, JsError> {
    to_js(parse(request).and_then(|q| solve_schedule(&q)))
}
