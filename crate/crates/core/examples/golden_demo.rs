//! Regenerates `data/demo_golden.json` from `data/demo.json` using only the
//! brute-force oracle:
//!
//!     cargo run --example golden_demo

use std::path::Path;

use fcnf_failure::network::FlowNetwork;
use fcnf_failure::oracle::{brute_force_front, brute_force_optimum, DEFAULT_EDGE_CAP};
use serde_json::json;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let text = std::fs::read_to_string(data.join("demo.json")).expect("read demo.json");
    let net = FlowNetwork::from_json_str(&text).expect("valid demo network");
    let front = brute_force_front(&net).expect("demo is within the oracle cap");
    let base = brute_force_optimum(&net, false, DEFAULT_EDGE_CAP).expect("within cap");
    let terminal = brute_force_optimum(&net, true, DEFAULT_EDGE_CAP).expect("within cap");
    let golden = json!({
        "instance": "demo.json",
        "generator": "examples/golden_demo.rs (brute-force oracle)",
        "base_optimum": base,
        "failure_free_optimum": terminal,
        "min_repaired_gap": front.min_repaired_gap(),
        "front": front.costs().iter().map(|(i, r)| json!({"initial_cost": i, "repaired_cost": r})).collect::<Vec<_>>(),
    });
    let out = serde_json::to_string_pretty(&golden).expect("json") + "\n";
    std::fs::write(data.join("demo_golden.json"), &out).expect("write golden");
    print!("{out}");
}
