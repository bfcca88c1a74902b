//! Report assembly and emission: a deterministic JSON body (artifact
//! version, case echo, per-check records, seed, precision) with wall-clock
//! timing isolated in a sibling field so that identical configurations and
//! seeds reproduce byte-identical bodies.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

/// Aggregate verdict over a list of check records.
/// A record counts as degenerate when it passes only in a degenerate sense
/// (verdict "trivial", or an explicitly flagged degenerate instance).
pub fn overall_verdict(records: &[Value]) -> &'static str {
    let mut any_real_pass = false;
    let mut any_degenerate = false;
    for r in records {
        match r["verdict"].as_str() {
            Some("pass") => {
                if r["instance"]["degenerate_modulus"] == Value::Bool(true)
                    || r["instance"]["degenerate_classes"] == Value::Bool(true)
                {
                    any_degenerate = true;
                } else {
                    any_real_pass = true;
                }
            }
            Some("trivial") => any_degenerate = true,
            _ => return "fail",
        }
    }
    if any_real_pass {
        "pass"
    } else if any_degenerate {
        "degenerate"
    } else {
        "pass"
    }
}

/// Process exit code for an aggregate verdict: 0 pass, 2 fail,
/// 3 degenerate-only. (1 is reserved for configuration errors.)
pub fn exit_code(verdict: &str) -> i32 {
    match verdict {
        "pass" => 0,
        "degenerate" => 3,
        _ => 2,
    }
}

/// Deterministic report body.
pub fn assemble(case: Value, records: Vec<Value>, seed: u64, precision_bits: usize) -> Value {
    let verdict = overall_verdict(&records).to_string();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "case": case,
        "records": records,
        "seed": seed,
        "precision_bits": precision_bits,
        "verdict": verdict,
    })
}

/// Canonical serialization of the body alone; used for determinism checks.
pub fn body_string(body: &Value) -> String {
    serde_json::to_string_pretty(body).expect("serializable body")
}

/// Wrap a body with the volatile timing field.
pub fn finalize(body: Value, wall_ms: u128) -> Value {
    json!({"body": body, "wall_ms": wall_ms})
}

pub fn write(path: &Path, report: &Value) -> Result<()> {
    std::fs::write(path, body_string(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_aggregation() {
        let pass = json!({"verdict": "pass", "instance": {}});
        let fail = json!({"verdict": "fail", "instance": {}});
        let trivial = json!({"verdict": "trivial", "instance": {}});
        let degen = json!({"verdict": "pass", "instance": {"degenerate_modulus": true}});
        assert_eq!(overall_verdict(&[pass.clone()]), "pass");
        assert_eq!(overall_verdict(&[pass.clone(), fail.clone()]), "fail");
        assert_eq!(overall_verdict(&[trivial.clone()]), "degenerate");
        assert_eq!(overall_verdict(&[degen.clone()]), "degenerate");
        assert_eq!(overall_verdict(&[degen, pass]), "pass");
        assert_eq!(overall_verdict(&[]), "pass");
        assert_eq!(exit_code("pass"), 0);
        assert_eq!(exit_code("fail"), 2);
        assert_eq!(exit_code("degenerate"), 3);
    }

    #[test]
    fn body_is_deterministic() {
        let a = assemble(json!({"kind": "x"}), vec![json!({"verdict": "pass", "instance": {}})], 7, 128);
        let b = assemble(json!({"kind": "x"}), vec![json!({"verdict": "pass", "instance": {}})], 7, 128);
        assert_eq!(body_string(&a), body_string(&b));
        let fin = finalize(a, 123);
        assert_eq!(fin["wall_ms"], 123);
        assert_eq!(fin["body"]["seed"], 7);
    }
}
