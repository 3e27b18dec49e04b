use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 9] = [
    "fig2", "fig3a", "fig5", "fig6", "fig8", "fig9", "fig10", "fig11", "fig12",
];

/// Parameter set of the engine cross-validation: strong drive and a
/// 2.5-fold coupling so that both engines relax within 200 ps.
fn strong_single() -> Value {
    json!({
        "drive": {"rabi": 0.5},
        "bath": {"coupling_scale": 2.5},
        "numerics": {"dt": 0.01, "t_end": 200.0}
    })
}

/// Config document for a named figure preset.
pub fn preset(name: &str) -> Result<Value> {
    let v = match name {
        "fig3a" => json!({"scenario": "single"}),
        "fig2" => json!({"scenario": "spectrum"}),
        "fig5" => json!({
            "scenario": "chain_dexter_single",
            "chain": {"n_sites": 4, "f": 0.1}
        }),
        "fig6" => json!({
            "scenario": "chain_dexter_single",
            "chain": {"n_sites": 4, "f": 0.1},
            "decay": {"gamma_r": 0.1}
        }),
        "fig8" => merge(strong_single(), json!({"scenario": "compare_engines"})),
        "fig9" => json!({
            "scenario": "chain_dexter_all",
            "chain": {"n_sites": 4, "f": 0.1},
            "drive": {"rabi": 0.5, "delta_eps": -1.0}
        }),
        "fig10" => json!({
            "scenario": "chain_dexter_all",
            "chain": {"n_sites": 4, "f": 0.1},
            "drive": {"rabi": 0.5, "delta_eps": 0.0}
        }),
        "fig11" => merge(
            strong_single(),
            json!({"scenario": "single", "engine": "heisenberg", "flags": {"intraband_ratio": 0.1}}),
        ),
        "fig12" => json!({
            "scenario": "chain_foerster",
            "chain": {"n_sites": 2, "f": 0.1}
        }),
        _ => {
            return Err(Error::config(
                "--preset",
                format!("unknown preset {name:?}; expected one of {}", PRESET_NAMES.join(", ")),
            ))
        }
    };
    Ok(v)
}

/// Deep merge: objects merge key by key, anything else in `top` replaces `base`.
pub fn merge(mut base: Value, top: Value) -> Value {
    merge_into(&mut base, top);
    base
}

fn merge_into(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge_into(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, t) => *slot = t,
    }
}

/// Sets `value` at a dotted path, creating intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::config(path, "empty path segment"));
        }
        if !cur.is_object() {
            if cur.is_null() {
                *cur = Value::Object(Default::default());
            } else {
                return Err(Error::config(path, format!("`{}` is not an object", parts[..i].join("."))));
            }
        }
        let obj = cur.as_object_mut().unwrap();
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("split yields at least one segment")
}
