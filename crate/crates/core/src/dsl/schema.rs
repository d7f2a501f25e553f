//! Machine-readable description of the DSL, consumed by editors and the
//! remote planner's system prompt.

use std::sync::OnceLock;

use serde::Serialize;

use super::table::{keys_for, ModValue, PrimitiveKind};

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Serialize)]
pub struct Schema {
    pub version: &'static str,
    pub tag_delimiter: &'static str,
    pub max_tags: usize,
    pub primitives: Vec<PrimitiveSchema>,
    pub roles: Vec<RoleSchema>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveSchema {
    pub name: &'static str,
    pub keys: Vec<KeySchema>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KeySchema {
    pub key: &'static str,
    pub description: &'static str,
    pub values: Vec<String>,
    pub default: String,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub extension: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoleSchema {
    pub role: &'static str,
    pub primitives: Vec<&'static str>,
    pub keys: Option<Vec<&'static str>>,
}

fn value_str(v: &ModValue) -> String {
    v.to_string()
}

pub fn schema() -> Schema {
    let primitives = PrimitiveKind::ALL
        .into_iter()
        .map(|p| PrimitiveSchema {
            name: p.as_str(),
            keys: keys_for(p)
                .map(|k| {
                    let spec = k.spec();
                    KeySchema {
                        key: k.as_str(),
                        description: spec.description,
                        values: spec.allowed.iter().map(value_str).collect(),
                        default: value_str(&spec.default),
                        extension: spec.extension_for.contains(&p),
                    }
                })
                .collect(),
        })
        .collect();
    Schema {
        version: SCHEMA_VERSION,
        tag_delimiter: "|",
        max_tags: super::MAX_TAGS,
        primitives,
        roles: vec![
            RoleSchema {
                role: "object",
                primitives: vec!["free_form"],
                keys: Some(vec!["t_x", "t_y", "t_z", "yaw", "pitch"]),
            },
            RoleSchema {
                role: "camera",
                primitives: PrimitiveKind::ALL.iter().map(|p| p.as_str()).collect(),
                keys: None,
            },
        ],
    }
}

/// The schema as compact JSON; computed once, identical bytes every call.
pub fn schema_json() -> &'static str {
    static JSON: OnceLock<String> = OnceLock::new();
    JSON.get_or_init(|| serde_json::to_string(&schema()).expect("schema serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_primitives() {
        assert_eq!(schema().primitives.len(), 4);
    }

    #[test]
    fn tail_lead_entry() {
        let s = schema();
        let tail = s.primitives.iter().find(|p| p.name == "tail_track").unwrap();
        let lead = tail.keys.iter().find(|k| k.key == "lead").unwrap();
        assert_eq!(lead.values, ["lead", "none"]);
        assert_eq!(lead.default, "none");
    }

    #[test]
    fn stable_bytes() {
        let a = serde_json::to_string(&schema()).unwrap();
        let b = serde_json::to_string(&schema()).unwrap();
        assert_eq!(a, b);
        assert_eq!(schema_json(), a);
    }
}
