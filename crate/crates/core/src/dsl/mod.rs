//! Motion DSL: value tables, parser, serializer and schema document.
//!
//! A program is a `|`-separated list of at most four tags. Each tag is a
//! primitive followed by `key_value` modifier tokens:
//!
//! ```text
//! orbit_track deg_360 dir_ccw | tail_track follow_style_lazy
//! ```
//!
//! Keys contain underscores themselves, so a token is split at the
//! longest registered key that prefixes it.

mod parse;
mod schema;
mod table;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse_program, parse_tag};
pub use schema::{schema, schema_json, Schema, SCHEMA_VERSION};
pub use table::{
    angle_values, keys_for, specs, split_modifier, ModValue, ModifierKey, ModifierSpec,
    PrimitiveKind,
};

/// Maximum number of tags in a program.
pub const MAX_TAGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Object,
    Camera,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Object => "object",
            Role::Camera => "camera",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("program is empty")]
    Empty,
    #[error("empty tag between delimiters")]
    EmptyTag,
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("unknown modifier key in `{0}`")]
    UnknownModifierKey(String),
    #[error("value `{value}` is not allowed for `{key}`")]
    ValueNotAllowed { key: ModifierKey, value: String },
    #[error("modifier `{key}` does not apply to `{primitive}`")]
    ModifierNotApplicable { primitive: PrimitiveKind, key: ModifierKey },
    #[error("program has {0} tags, at most 4 are allowed")]
    TooManyTags(usize),
    #[error("{0}")]
    RoleViolation(String),
    #[error("modifier `{0}` given twice in one tag")]
    DuplicateKey(ModifierKey),
    #[error("unknown role `{0}`")]
    UnknownRole(String),
}

impl ParseErrorKind {
    /// Stable machine name used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::Empty => "Empty",
            ParseErrorKind::EmptyTag => "EmptyTag",
            ParseErrorKind::UnknownPrimitive(_) => "UnknownPrimitive",
            ParseErrorKind::UnknownModifierKey(_) => "UnknownModifierKey",
            ParseErrorKind::ValueNotAllowed { .. } => "ValueNotAllowed",
            ParseErrorKind::ModifierNotApplicable { .. } => "ModifierNotApplicable",
            ParseErrorKind::TooManyTags(_) => "TooManyTags",
            ParseErrorKind::RoleViolation(_) => "RoleViolation",
            ParseErrorKind::DuplicateKey(_) => "DuplicateKey",
            ParseErrorKind::UnknownRole(_) => "UnknownRole",
        }
    }
}

/// A parse or validation failure. `span` is a byte range into the source
/// text when the program came from DSL text, and `tag` the offending tag
/// index when known.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Option<(usize, usize)>,
    pub tag: Option<usize>,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind) -> Self {
        Self { kind, span: None, tag: None }
    }

    pub(crate) fn at(mut self, span: (usize, usize)) -> Self {
        self.span.get_or_insert(span);
        self
    }

    pub(crate) fn in_tag(mut self, tag: usize) -> Self {
        self.tag.get_or_insert(tag);
        self
    }

    /// Structured payload for API responses.
    pub fn detail(&self) -> serde_json::Value {
        let mut detail = serde_json::json!({ "kind": self.kind.code() });
        match &self.kind {
            ParseErrorKind::ValueNotAllowed { key, value } => {
                detail["key"] = key.as_str().into();
                detail["value"] = value.as_str().into();
            }
            ParseErrorKind::ModifierNotApplicable { primitive, key } => {
                detail["primitive"] = primitive.as_str().into();
                detail["key"] = key.as_str().into();
            }
            ParseErrorKind::DuplicateKey(key) => detail["key"] = key.as_str().into(),
            ParseErrorKind::UnknownPrimitive(t)
            | ParseErrorKind::UnknownModifierKey(t)
            | ParseErrorKind::UnknownRole(t) => detail["token"] = t.as_str().into(),
            _ => {}
        }
        if let Some((start, end)) = self.span {
            detail["span"] = serde_json::json!([start, end]);
        }
        if let Some(tag) = self.tag {
            detail["tag"] = tag.into();
        }
        detail
    }
}

/// One primitive with its explicitly written modifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MotionTag {
    primitive: PrimitiveKind,
    modifiers: BTreeMap<ModifierKey, ModValue>,
}

impl MotionTag {
    pub fn new(primitive: PrimitiveKind) -> Self {
        Self { primitive, modifiers: BTreeMap::new() }
    }

    /// Builds a tag from `(key, value token)` pairs, validating each.
    pub fn from_tokens<'a>(
        primitive: PrimitiveKind,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, ParseError> {
        let mut tag = Self::new(primitive);
        for (key, value) in pairs {
            let key = ModifierKey::from_name(key)
                .ok_or_else(|| ParseError::new(ParseErrorKind::UnknownModifierKey(key.to_string())))?;
            if tag.modifiers.contains_key(&key) {
                return Err(ParseError::new(ParseErrorKind::DuplicateKey(key)));
            }
            tag.set_token(key, value)?;
        }
        Ok(tag)
    }

    pub fn primitive(&self) -> PrimitiveKind {
        self.primitive
    }

    /// Explicitly written modifiers in canonical order.
    pub fn explicit(&self) -> &BTreeMap<ModifierKey, ModValue> {
        &self.modifiers
    }

    /// Resolved value: explicit if written, else the default. `None` when
    /// the key does not apply to this primitive.
    pub fn get(&self, key: ModifierKey) -> Option<ModValue> {
        let spec = key.spec();
        if !spec.applies_to(self.primitive) {
            return None;
        }
        Some(self.modifiers.get(&key).copied().unwrap_or(spec.default))
    }

    pub fn sym(&self, key: ModifierKey) -> &'static str {
        self.get(key).and_then(ModValue::as_sym).unwrap_or("none")
    }

    pub fn int(&self, key: ModifierKey) -> i32 {
        self.get(key).and_then(ModValue::as_int).unwrap_or(0)
    }

    /// Sets a value token, validating applicability and membership.
    pub fn set_token(&mut self, key: ModifierKey, token: &str) -> Result<(), ParseError> {
        let spec = key.spec();
        if !spec.applies_to(self.primitive) {
            return Err(ParseError::new(ParseErrorKind::ModifierNotApplicable {
                primitive: self.primitive,
                key,
            }));
        }
        let value = spec.lookup(token).ok_or_else(|| {
            ParseError::new(ParseErrorKind::ValueNotAllowed { key, value: token.to_string() })
        })?;
        self.modifiers.insert(key, value);
        Ok(())
    }

    pub fn set(&mut self, key: ModifierKey, value: ModValue) -> Result<(), ParseError> {
        self.set_token(key, &value.to_string())
    }

    /// Drops an explicit modifier so the key resolves to its default.
    pub fn clear(&mut self, key: ModifierKey) {
        self.modifiers.remove(&key);
    }

    /// Sets a value, storing it implicitly when it equals the default.
    pub fn assign(&mut self, key: ModifierKey, value: ModValue) -> Result<(), ParseError> {
        if key.spec().default == value && key.spec().applies_to(self.primitive) {
            self.clear(key);
            Ok(())
        } else {
            self.set(key, value)
        }
    }

    fn check_role(&self, role: Role) -> Result<(), ParseError> {
        if role == Role::Camera {
            return Ok(());
        }
        if self.primitive != PrimitiveKind::FreeForm {
            return Err(ParseError::new(ParseErrorKind::RoleViolation(format!(
                "object programs only use free_form, found {}",
                self.primitive
            ))));
        }
        if let Some(key) = self.modifiers.keys().find(|k| !k.allowed_for_object()) {
            return Err(ParseError::new(ParseErrorKind::RoleViolation(format!(
                "object programs only use t_x, t_y, t_z, yaw and pitch, found {key}"
            ))));
        }
        Ok(())
    }

    /// Serializes this tag alone.
    pub fn to_dsl(&self, include_defaults: bool, role: Role) -> String {
        let mut out = String::from(self.primitive.as_str());
        for key in keys_for(self.primitive) {
            if role == Role::Object && !key.allowed_for_object() {
                continue;
            }
            let value = match self.modifiers.get(&key) {
                Some(v) => *v,
                None if include_defaults => key.spec().default,
                None => continue,
            };
            out.push(' ');
            out.push_str(key.as_str());
            out.push('_');
            out.push_str(&value.to_string());
        }
        out
    }

    pub fn is_static(&self) -> bool {
        self.primitive == PrimitiveKind::FreeForm
            && self.modifiers.iter().all(|(k, v)| {
                matches!(k, ModifierKey::Ease | ModifierKey::Jitter) || *v == k.spec().default
            })
    }
}

/// An ordered list of 1..=4 tags with a role.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MotionProgram {
    role: Role,
    tags: Vec<MotionTag>,
}

impl MotionProgram {
    pub fn new(role: Role, tags: Vec<MotionTag>) -> Result<Self, ParseError> {
        if tags.is_empty() {
            return Err(ParseError::new(ParseErrorKind::Empty));
        }
        if tags.len() > MAX_TAGS {
            return Err(ParseError::new(ParseErrorKind::TooManyTags(tags.len())));
        }
        for (i, tag) in tags.iter().enumerate() {
            tag.check_role(role).map_err(|e| e.in_tag(i))?;
        }
        Ok(Self { role, tags })
    }

    /// A single default free_form tag.
    pub fn static_program(role: Role) -> Self {
        Self { role, tags: vec![MotionTag::new(PrimitiveKind::FreeForm)] }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn tags(&self) -> &[MotionTag] {
        &self.tags
    }

    /// Mutable access for editors; callers re-validate with [`Self::validate`].
    pub fn tags_mut(&mut self) -> &mut Vec<MotionTag> {
        &mut self.tags
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        Self::new(self.role, self.tags.clone()).map(|_| ())
    }

    pub fn is_static(&self) -> bool {
        self.tags.iter().all(MotionTag::is_static)
    }

    pub fn to_dsl(&self, include_defaults: bool) -> String {
        self.tags
            .iter()
            .map(|t| t.to_dsl(include_defaults, self.role))
            .collect::<Vec<_>>()
            .join(" | ")
    }

    pub fn to_raw(&self) -> RawProgram {
        RawProgram {
            role: self.role.as_str().to_string(),
            tags: self
                .tags
                .iter()
                .map(|t| RawTag {
                    primitive: t.primitive.as_str().to_string(),
                    modifiers: t
                        .modifiers
                        .iter()
                        .map(|(k, v)| (k.as_str().to_string(), v.to_string()))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Validates the wire form with the same error kinds as the text parser.
    pub fn from_raw(raw: &RawProgram) -> Result<Self, ParseError> {
        let role = match raw.role.as_str() {
            "object" => Role::Object,
            "camera" => Role::Camera,
            other => return Err(ParseError::new(ParseErrorKind::UnknownRole(other.to_string()))),
        };
        if raw.tags.len() > MAX_TAGS {
            return Err(ParseError::new(ParseErrorKind::TooManyTags(raw.tags.len())));
        }
        let tags = raw
            .tags
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let primitive = PrimitiveKind::from_token(&t.primitive).ok_or_else(|| {
                    ParseError::new(ParseErrorKind::UnknownPrimitive(t.primitive.clone())).in_tag(i)
                })?;
                let mut tag = MotionTag::new(primitive);
                for (k, v) in &t.modifiers {
                    let key = ModifierKey::from_name(k).ok_or_else(|| {
                        ParseError::new(ParseErrorKind::UnknownModifierKey(k.clone())).in_tag(i)
                    })?;
                    tag.set_token(key, v).map_err(|e| e.in_tag(i))?;
                }
                Ok(tag)
            })
            .collect::<Result<Vec<_>, ParseError>>()?;
        Self::new(role, tags)
    }
}

impl fmt::Display for MotionProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_dsl(false))
    }
}

/// Serializes a program without default-valued modifiers.
pub fn serialize_program(p: &MotionProgram, include_defaults: bool) -> String {
    p.to_dsl(include_defaults)
}

/// Unvalidated wire form of a program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProgram {
    pub role: String,
    pub tags: Vec<RawTag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTag {
    pub primitive: String,
    #[serde(default)]
    pub modifiers: BTreeMap<String, String>,
}

impl Serialize for MotionProgram {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::{SerializeMap, SerializeStruct};

        struct Mods<'a>(&'a BTreeMap<ModifierKey, ModValue>);
        impl Serialize for Mods<'_> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(k.as_str(), &v.to_string())?;
                }
                map.end()
            }
        }
        struct Tag<'a>(&'a MotionTag);
        impl Serialize for Tag<'_> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut st = s.serialize_struct("MotionTag", 2)?;
                st.serialize_field("primitive", self.0.primitive.as_str())?;
                st.serialize_field("modifiers", &Mods(&self.0.modifiers))?;
                st.end()
            }
        }

        let tags: Vec<Tag<'_>> = self.tags.iter().map(Tag).collect();
        let mut st = serializer.serialize_struct("MotionProgram", 2)?;
        st.serialize_field("role", self.role.as_str())?;
        st.serialize_field("tags", &tags)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for MotionProgram {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawProgram::deserialize(deserializer)?;
        MotionProgram::from_raw(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_view_falls_back_to_defaults() {
        let tag = MotionTag::new(PrimitiveKind::OrbitTrack);
        assert_eq!(tag.get(ModifierKey::Deg), Some(ModValue::Int(90)));
        assert_eq!(tag.get(ModifierKey::Ease), Some(ModValue::Sym("linear")));
        assert_eq!(tag.get(ModifierKey::TX), None);
        for key in keys_for(PrimitiveKind::TailTrack) {
            assert!(MotionTag::new(PrimitiveKind::TailTrack).get(key).is_some());
        }
    }

    #[test]
    fn program_json_form() {
        let p = parse_program("orbit_track deg_360", Role::Camera).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"role":"camera","tags":[{"primitive":"orbit_track","modifiers":{"deg":"360"}}]}"#
        );
        let back: MotionProgram = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn wire_form_reports_typed_errors() {
        let raw: RawProgram = serde_json::from_str(
            r#"{"role":"camera","tags":[{"primitive":"orbit_track","modifiers":{"deg":"999"}}]}"#,
        )
        .unwrap();
        let err = MotionProgram::from_raw(&raw).unwrap_err();
        assert_eq!(err.kind.code(), "ValueNotAllowed");
        assert_eq!(err.tag, Some(0));
        assert!(serde_json::from_str::<MotionProgram>(
            r#"{"role":"object","tags":[{"primitive":"tail_track"}]}"#
        )
        .is_err());
    }

    #[test]
    fn serialize_examples() {
        let mut tag = MotionTag::new(PrimitiveKind::FreeForm);
        tag.set_token(ModifierKey::TX, "left").unwrap();
        let p = MotionProgram::new(Role::Camera, vec![tag]).unwrap();
        assert_eq!(serialize_program(&p, false), "free_form t_x_left");

        let orbit = MotionProgram::new(Role::Camera, vec![MotionTag::new(PrimitiveKind::OrbitTrack)])
            .unwrap();
        let full = serialize_program(&orbit, true);
        assert!(full.contains("ease_linear") && full.contains("deg_90"), "{full}");
        assert_eq!(parse_program(&full, Role::Camera).unwrap().to_dsl(true), full);
    }

    #[test]
    fn object_defaults_serialization_stays_in_role() {
        let p = MotionProgram::static_program(Role::Object);
        let s = serialize_program(&p, true);
        assert_eq!(s, "free_form t_x_no t_y_no t_z_no yaw_0 pitch_0");
        assert!(parse_program(&s, Role::Object).is_ok());
    }
}
