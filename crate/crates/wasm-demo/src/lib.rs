//! Browser demo over the UAV victim search instance.
//!
//! Build with `cargo build --target wasm32-unknown-unknown --release -p ipp-wasm-demo`,
//! then run `wasm-bindgen --target web --out-dir www/pkg` on the produced
//! `.wasm` and serve `www/`.

use ipp_core::gen::{default_occlusion_mask, gen_uav, parse_occlusions, UavConfig};
use ipp_core::harness::{k_label, parse_k_label, parse_k_list, simulate};
use ipp_core::instance::{IppInstance, NO_OBS};
use ipp_core::planner::{ExecMode, PlannerConfig, Policy, Status};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_SIDE: usize = 10;

fn instance(n: usize, occluded: &str) -> Result<IppInstance, String> {
    if n > MAX_SIDE {
        return Err(format!("grid side is capped at {MAX_SIDE} in the browser"));
    }
    let cells = parse_occlusions(occluded).map_err(|e| e.to_string())?;
    gen_uav(&UavConfig::new(n).with_occlusions(cells)).map_err(|e| e.to_string())
}

fn config(mode: &str) -> Result<PlannerConfig, String> {
    let mode: ExecMode = mode.parse().map_err(|e: ipp_core::Error| e.to_string())?;
    Ok(PlannerConfig::with_mode(mode))
}

/// `L3_4` -> ("L", 3, 4); the root has no cell.
fn cell(label: &str) -> Value {
    let Some((alt, rest)) = label.split_at_checked(1) else { return Value::Null };
    match rest.split_once('_').and_then(|(r, c)| Some((r.parse::<usize>().ok()?, c.parse::<usize>().ok()?))) {
        Some((r, c)) => json!({ "alt": alt, "row": r, "col": c }),
        None => Value::Null,
    }
}

/// Size of the instance built from a grid side and an occlusion list, plus
/// the shipped mask for that side if there is one.
pub fn describe(n: usize, occluded: &str) -> Result<Value, String> {
    let inst = instance(n, occluded)?;
    let cells = parse_occlusions(occluded).map_err(|e| e.to_string())?;
    Ok(json!({
        "side": n,
        "scenarios": inst.m(),
        "locations": inst.n(),
        "occluded": cells.iter().map(|&(r, c)| [r, c]).collect::<Vec<_>>(),
        "default_mask": default_occlusion_mask(n).map(|m| m.iter().map(|&(r, c)| [r, c]).collect::<Vec<_>>()),
    }))
}

/// One policy run with the victim in cell `victim` (row-major).
pub fn run(n: usize, occluded: &str, k: &str, victim: usize, mode: &str, seed: u64) -> Result<Value, String> {
    let inst = instance(n, occluded)?;
    if victim >= inst.m() {
        return Err(format!("victim cell {victim} outside the grid"));
    }
    let policy = parse_k_label(k).map_err(|e| e.to_string())?;
    let (cost, t) = simulate(&inst, policy, &config(mode)?, victim, seed).map_err(|e| e.to_string())?;
    let metric = inst.metric();
    let steps: Vec<Value> = t
        .steps
        .iter()
        .map(|s| {
            let label = metric.label(s.location);
            json!({
                "round": s.round,
                "label": label,
                "cell": cell(label),
                "obs": if s.observation == NO_OBS { Value::Null } else { inst.alphabet()[s.observation as usize].clone().into() },
                "cum_cost": s.cum_cost,
            })
        })
        .collect();
    Ok(json!({
        "policy": k_label(policy),
        "cost": cost,
        "rounds": t.recompute_count,
        "covered": t.status == Status::Covered,
        "steps": steps,
    }))
}

/// Expected cost over all victim cells for each policy in `ks` (e.g. `1..4,inf`).
pub fn compare(n: usize, occluded: &str, ks: &str, mode: &str, seed: u64) -> Result<Value, String> {
    let inst = instance(n, occluded)?;
    let cfg = config(mode)?;
    let policies = parse_k_list(ks).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for p in policies {
        let mut total = 0.0;
        let mut failed = 0;
        let mut worst_rounds = 0;
        for victim in 0..inst.m() {
            match simulate(&inst, p, &cfg, victim, seed) {
                Ok((cost, t)) if t.status == Status::Covered => {
                    total += inst.prob(victim) * cost;
                    worst_rounds = worst_rounds.max(t.recompute_count);
                }
                _ => failed += 1,
            }
        }
        let avg = if failed == 0 { json!(total) } else { Value::Null };
        let rounds = if p == Policy::FullyAdaptive { Value::Null } else { json!(worst_rounds) };
        rows.push(json!({ "policy": k_label(p), "avg_cost": avg, "max_rounds": rounds, "failed": failed }));
    }
    Ok(json!(rows))
}

fn js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = describeGrid)]
pub fn describe_grid(n: usize, occluded: &str) -> Result<String, JsError> {
    js(describe(n, occluded))
}

#[wasm_bindgen(js_name = runPolicy)]
pub fn run_policy(n: usize, occluded: &str, k: &str, victim: usize, mode: &str, seed: u64) -> Result<String, JsError> {
    js(run(n, occluded, k, victim, mode, seed))
}

#[wasm_bindgen(js_name = comparePolicies)]
pub fn compare_policies(n: usize, occluded: &str, ks: &str, mode: &str, seed: u64) -> Result<String, JsError> {
    js(compare(n, occluded, ks, mode, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_finds_the_victim() {
        let v = run(4, "1 1\n", "2", 5, "path", 0).unwrap();
        assert_eq!(v["covered"], true);
        let last = v["steps"].as_array().unwrap().iter().rev().find(|s| !s["obs"].is_null()).unwrap();
        assert!(v["cost"].as_f64().unwrap() > 0.0);
        assert!(last["cell"].is_object());
    }

    #[test]
    fn compare_orders_rows() {
        let v = compare(3, "", "1,2,inf", "tour", 1).unwrap();
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2]["policy"], "inf");
        assert!(rows.iter().all(|r| r["failed"] == 0));
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(describe(3, "7 7").is_err());
        assert!(describe(8, "").unwrap()["default_mask"].is_array());
        assert!(run(3, "", "0", 0, "path", 0).is_err());
        assert!(run(3, "", "2", 9, "path", 0).is_err());
        assert_eq!(cell("r"), Value::Null);
    }
}
