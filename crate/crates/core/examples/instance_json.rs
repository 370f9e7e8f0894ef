//! Instance files: parse, validate, and write back in canonical form.
//!
//! Run with `cargo run --example instance_json [FILE]`.

use care::model::{parse_instance, serialize_instance, validate};

const SAMPLE: &str = r#"{
  "workers": [
    {"id": 1, "group": 1, "cost": "2.5", "bid": "2.5", "reputation": "1.0"},
    {"id": 2, "group": 1, "bid": "7/2", "reputation": "0.8"},
    {"id": 3, "group": 2, "bid": "50", "reputation": "2"}
  ],
  "requesters": [{"id": 1, "budget": "40"}, {"id": 2, "budget": "12.75"}],
  "tau": [[2, 5], [1, 0]],
  "epsilon": "10",
  "seed": 42
}"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).expect("readable file"),
        None => SAMPLE.to_string(),
    };
    let inst = match parse_instance(&text) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("rejected: {}", e);
            std::process::exit(2);
        }
    };
    println!(
        "{} workers, {} requesters, {} groups",
        inst.n(),
        inst.m(),
        inst.num_groups()
    );
    for v in validate(&inst) {
        let kind = if v.is_warning() { "warning" } else { "error" };
        println!("{}: {}", kind, serde_json::to_string(&v).unwrap());
    }
    println!("{}", serialize_instance(&inst));
}
