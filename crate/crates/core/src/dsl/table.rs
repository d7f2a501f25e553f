//! Static value tables for every primitive and modifier key.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// The four motion primitives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    FreeForm,
    OrbitTrack,
    TailTrack,
    RotationTrack,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 4] = [
        PrimitiveKind::FreeForm,
        PrimitiveKind::OrbitTrack,
        PrimitiveKind::TailTrack,
        PrimitiveKind::RotationTrack,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrimitiveKind::FreeForm => "free_form",
            PrimitiveKind::OrbitTrack => "orbit_track",
            PrimitiveKind::TailTrack => "tail_track",
            PrimitiveKind::RotationTrack => "rotation_track",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == token)
    }

    pub fn is_tracking(self) -> bool {
        self != PrimitiveKind::FreeForm
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every registered modifier key. Variant order is the canonical
/// serialization order; it agrees with the column order of each
/// primitive's table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModifierKey {
    TX,
    TY,
    TZ,
    Yaw,
    Pitch,
    Roll,
    Dutch,
    Ease,
    Jitter,
    Ver,
    Object,
    PlaneAxis,
    Deg,
    Dir,
    Spiral,
    FollowStyle,
    FollowAxis,
    Amp,
    Dolly,
    MirrorAxis,
    DontLook,
    Lead,
    RotAxis,
    Push,
    LocalOffset,
    WorldMove1,
    WorldMove2,
}

impl ModifierKey {
    pub const ALL: [ModifierKey; 27] = [
        ModifierKey::TX,
        ModifierKey::TY,
        ModifierKey::TZ,
        ModifierKey::Yaw,
        ModifierKey::Pitch,
        ModifierKey::Roll,
        ModifierKey::Dutch,
        ModifierKey::Ease,
        ModifierKey::Jitter,
        ModifierKey::Ver,
        ModifierKey::Object,
        ModifierKey::PlaneAxis,
        ModifierKey::Deg,
        ModifierKey::Dir,
        ModifierKey::Spiral,
        ModifierKey::FollowStyle,
        ModifierKey::FollowAxis,
        ModifierKey::Amp,
        ModifierKey::Dolly,
        ModifierKey::MirrorAxis,
        ModifierKey::DontLook,
        ModifierKey::Lead,
        ModifierKey::RotAxis,
        ModifierKey::Push,
        ModifierKey::LocalOffset,
        ModifierKey::WorldMove1,
        ModifierKey::WorldMove2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModifierKey::TX => "t_x",
            ModifierKey::TY => "t_y",
            ModifierKey::TZ => "t_z",
            ModifierKey::Yaw => "yaw",
            ModifierKey::Pitch => "pitch",
            ModifierKey::Roll => "roll",
            ModifierKey::Dutch => "dutch",
            ModifierKey::Ease => "ease",
            ModifierKey::Jitter => "jitter",
            ModifierKey::Ver => "ver",
            ModifierKey::Object => "object",
            ModifierKey::PlaneAxis => "plane_axis",
            ModifierKey::Deg => "deg",
            ModifierKey::Dir => "dir",
            ModifierKey::Spiral => "spiral",
            ModifierKey::FollowStyle => "follow_style",
            ModifierKey::FollowAxis => "follow_axis",
            ModifierKey::Amp => "amp",
            ModifierKey::Dolly => "dolly",
            ModifierKey::MirrorAxis => "mirror_axis",
            ModifierKey::DontLook => "dont_look",
            ModifierKey::Lead => "lead",
            ModifierKey::RotAxis => "rot_axis",
            ModifierKey::Push => "push",
            ModifierKey::LocalOffset => "local_offset",
            ModifierKey::WorldMove1 => "world_move_1",
            ModifierKey::WorldMove2 => "world_move_2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == name)
    }

    pub fn spec(self) -> &'static ModifierSpec {
        &specs()[self as usize]
    }

    /// Keys an object program may use.
    pub fn allowed_for_object(self) -> bool {
        matches!(
            self,
            ModifierKey::TX | ModifierKey::TY | ModifierKey::TZ | ModifierKey::Yaw | ModifierKey::Pitch
        )
    }
}

impl fmt::Display for ModifierKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A modifier value: integer degrees for angle-valued keys, otherwise a
/// token interned in the static table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModValue {
    Int(i32),
    Sym(&'static str),
}

impl ModValue {
    pub fn as_int(self) -> Option<i32> {
        match self {
            ModValue::Int(v) => Some(v),
            ModValue::Sym(_) => None,
        }
    }

    pub fn as_sym(self) -> Option<&'static str> {
        match self {
            ModValue::Sym(s) => Some(s),
            ModValue::Int(_) => None,
        }
    }
}

impl fmt::Display for ModValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModValue::Int(v) => write!(f, "{v}"),
            ModValue::Sym(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModifierSpec {
    pub key: ModifierKey,
    pub description: &'static str,
    pub allowed: Vec<ModValue>,
    pub default: ModValue,
    pub applicable_to: Vec<PrimitiveKind>,
    /// Extension keys are not part of the published tables for a primitive
    /// but accepted on it (ease and jitter on free_form).
    pub extension_for: Vec<PrimitiveKind>,
}

impl ModifierSpec {
    pub fn applies_to(&self, primitive: PrimitiveKind) -> bool {
        self.applicable_to.contains(&primitive)
    }

    /// Looks up a value token; integer keys only accept the canonical
    /// decimal form.
    pub fn lookup(&self, token: &str) -> Option<ModValue> {
        self.allowed.iter().copied().find(|v| match v {
            ModValue::Int(i) => i.to_string() == token,
            ModValue::Sym(s) => *s == token,
        })
    }

    pub fn contains(&self, value: ModValue) -> bool {
        self.allowed.contains(&value)
    }
}

/// Degree values accepted by yaw, pitch and roll.
pub fn angle_values() -> Vec<i32> {
    let mut v: Vec<i32> = (-180..=-100).step_by(10).collect();
    v.extend((-90..=90).step_by(5));
    v.extend((100..=180).step_by(10));
    v
}

const LEVELS_X: [&str; 7] = ["far_left", "left", "near_left", "no", "near_right", "right", "far_right"];
const LEVELS_Y: [&str; 7] = ["far_down", "down", "near_down", "no", "near_up", "up", "far_up"];
const LEVELS_Z: [&str; 7] = ["far_in", "in", "near_in", "no", "near_out", "out", "far_out"];
const EASE: [&str; 5] = ["in", "out", "in_out", "out_in", "linear"];
const JITTER: [&str; 3] = ["low", "high", "none"];
const VER: [&str; 3] = ["aerial", "low-angle", "none"];
const FRAMING: [&str; 3] = ["left", "right", "none"];
const DOLLY: [&str; 7] = ["in_0.1", "in_0.3", "in_0.5", "out_0.1", "out_0.3", "out_0.5", "no"];
const AMP: [&str; 17] = [
    "x_0.5", "x_0.8", "x_1.2", "x_1.5", "y_0.5", "y_0.8", "y_1.2", "y_1.5", "z_0.5", "z_0.8", "z_1.2",
    "z_1.5", "all_0.5", "all_0.8", "all_1.2", "all_1.5", "no",
];
const LOCAL_OFFSET: [&str; 9] = [
    "x_-0.3", "x_-0.1", "x_0.1", "x_0.3", "y_-0.3", "y_-0.1", "y_0.1", "y_0.3", "no",
];
const WORLD_MOVES: [&str; 19] = [
    "truck_right_0.5",
    "truck_right_1.0",
    "truck_right_2.0",
    "truck_left_0.5",
    "truck_left_1.0",
    "truck_left_2.0",
    "pedestal_up_0.5",
    "pedestal_up_1.0",
    "pedestal_up_2.0",
    "pedestal_down_0.5",
    "pedestal_down_1.0",
    "pedestal_down_2.0",
    "goes_in_0.5",
    "goes_in_1.0",
    "goes_in_2.0",
    "goes_out_0.5",
    "goes_out_1.0",
    "goes_out_2.0",
    "none",
];

fn syms(tokens: &[&'static str]) -> Vec<ModValue> {
    tokens.iter().map(|t| ModValue::Sym(t)).collect()
}

fn ints(values: &[i32]) -> Vec<ModValue> {
    values.iter().map(|v| ModValue::Int(*v)).collect()
}

pub fn specs() -> &'static [ModifierSpec] {
    static SPECS: OnceLock<Vec<ModifierSpec>> = OnceLock::new();
    SPECS.get_or_init(build_specs)
}

fn build_specs() -> Vec<ModifierSpec> {
    use ModifierKey as K;
    use PrimitiveKind::*;
    let tracking = vec![OrbitTrack, TailTrack, RotationTrack];
    let with_free = vec![FreeForm, OrbitTrack, TailTrack, RotationTrack];
    let angles = ints(&angle_values());

    let spec = |key: ModifierKey,
                description: &'static str,
                allowed: Vec<ModValue>,
                default: ModValue,
                applicable_to: Vec<PrimitiveKind>| ModifierSpec {
        key,
        description,
        allowed,
        default,
        applicable_to,
        extension_for: Vec::new(),
    };

    let mut out = vec![
        spec(K::TX, "Lateral translation", syms(&LEVELS_X), ModValue::Sym("no"), vec![FreeForm]),
        spec(K::TY, "Vertical translation", syms(&LEVELS_Y), ModValue::Sym("no"), vec![FreeForm]),
        spec(K::TZ, "Depth translation", syms(&LEVELS_Z), ModValue::Sym("no"), vec![FreeForm]),
        spec(K::Yaw, "Yaw in degrees", angles.clone(), ModValue::Int(0), vec![FreeForm]),
        spec(K::Pitch, "Pitch in degrees", angles.clone(), ModValue::Int(0), vec![FreeForm]),
        spec(K::Roll, "Roll in degrees", angles, ModValue::Int(0), vec![FreeForm]),
        spec(
            K::Dutch,
            "Camera roll angle",
            ints(&[-45, -30, -15, 0, 15, 30, 45]),
            ModValue::Int(0),
            tracking.clone(),
        ),
        spec(
            K::Ease,
            "Acceleration curve",
            syms(&EASE),
            ModValue::Sym("linear"),
            with_free.clone(),
        ),
        spec(
            K::Jitter,
            "Handheld vibration",
            syms(&JITTER),
            ModValue::Sym("none"),
            with_free,
        ),
        spec(
            K::Ver,
            "Vertical angle relative to the object",
            syms(&VER),
            ModValue::Sym("none"),
            tracking.clone(),
        ),
        spec(
            K::Object,
            "Object position within the frame",
            syms(&FRAMING),
            ModValue::Sym("none"),
            tracking,
        ),
        spec(
            K::PlaneAxis,
            "Orbit axis",
            syms(&["x", "y", "z"]),
            ModValue::Sym("y"),
            vec![OrbitTrack],
        ),
        spec(
            K::Deg,
            "Total orbit angle",
            ints(&[30, 45, 60, 90, 180, 270, 360]),
            ModValue::Int(90),
            vec![OrbitTrack],
        ),
        spec(K::Dir, "Orbit direction", syms(&["cw", "ccw"]), ModValue::Sym("cw"), vec![OrbitTrack]),
        spec(K::Spiral, "Spiral dolly", syms(&DOLLY), ModValue::Sym("no"), vec![OrbitTrack]),
        spec(
            K::FollowStyle,
            "Follow responsiveness",
            syms(&["hard", "soft", "lazy"]),
            ModValue::Sym("hard"),
            vec![TailTrack],
        ),
        spec(
            K::FollowAxis,
            "Followed world axes",
            syms(&["x", "y", "z", "full"]),
            ModValue::Sym("full"),
            vec![TailTrack],
        ),
        spec(K::Amp, "Travel amplitude", syms(&AMP), ModValue::Sym("no"), vec![TailTrack]),
        spec(K::Dolly, "Static dolly", syms(&DOLLY), ModValue::Sym("no"), vec![TailTrack]),
        spec(
            K::MirrorAxis,
            "Mirrored motion",
            syms(&["x", "y", "no"]),
            ModValue::Sym("no"),
            vec![TailTrack],
        ),
        spec(
            K::DontLook,
            "Disable look-at",
            syms(&["dont_look", "none"]),
            ModValue::Sym("none"),
            vec![TailTrack],
        ),
        spec(
            K::Lead,
            "Camera ahead of the object",
            syms(&["lead", "none"]),
            ModValue::Sym("none"),
            vec![TailTrack],
        ),
        spec(
            K::RotAxis,
            "Rotation axes",
            syms(&["pan", "tilt", "full"]),
            ModValue::Sym("full"),
            vec![RotationTrack],
        ),
        spec(K::Push, "Local dolly", syms(&DOLLY), ModValue::Sym("no"), vec![RotationTrack]),
        spec(
            K::LocalOffset,
            "Look-at point offset",
            syms(&LOCAL_OFFSET),
            ModValue::Sym("no"),
            vec![RotationTrack],
        ),
        spec(
            K::WorldMove1,
            "Compensated world motion",
            syms(&WORLD_MOVES),
            ModValue::Sym("none"),
            vec![RotationTrack],
        ),
        spec(
            K::WorldMove2,
            "Compensated world motion, second half",
            syms(&WORLD_MOVES),
            ModValue::Sym("none"),
            vec![RotationTrack],
        ),
    ];
    out[K::Ease as usize].extension_for = vec![FreeForm];
    out[K::Jitter as usize].extension_for = vec![FreeForm];
    debug_assert!(out.iter().enumerate().all(|(i, s)| s.key as usize == i));
    out
}

/// Applicable keys of a primitive in canonical order.
pub fn keys_for(primitive: PrimitiveKind) -> impl Iterator<Item = ModifierKey> {
    ModifierKey::ALL
        .into_iter()
        .filter(move |k| k.spec().applies_to(primitive))
}

/// Finds the longest registered key that prefixes `token` followed by `_`
/// or that equals `token` exactly. Returns the key and the remainder
/// after the separator (empty for an exact match).
pub fn split_modifier(token: &str) -> Option<(ModifierKey, &str)> {
    let mut best: Option<(ModifierKey, &str)> = None;
    for key in ModifierKey::ALL {
        let name = key.as_str();
        let rest = if token == name {
            Some("")
        } else {
            token
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix('_'))
                .filter(|r| !r.is_empty())
        };
        if let Some(rest) = rest {
            if best.is_none_or(|(b, _)| b.as_str().len() < name.len()) {
                best = Some((key, rest));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_members() {
        for spec in specs() {
            assert!(spec.contains(spec.default), "{}", spec.key);
        }
    }

    #[test]
    fn per_primitive_key_sets() {
        let names = |p| keys_for(p).map(|k| k.as_str()).collect::<Vec<_>>();
        assert_eq!(
            names(PrimitiveKind::FreeForm),
            ["t_x", "t_y", "t_z", "yaw", "pitch", "roll", "ease", "jitter"]
        );
        assert_eq!(
            names(PrimitiveKind::OrbitTrack),
            ["dutch", "ease", "jitter", "ver", "object", "plane_axis", "deg", "dir", "spiral"]
        );
        assert_eq!(
            names(PrimitiveKind::TailTrack),
            [
                "dutch",
                "ease",
                "jitter",
                "ver",
                "object",
                "follow_style",
                "follow_axis",
                "amp",
                "dolly",
                "mirror_axis",
                "dont_look",
                "lead"
            ]
        );
        assert_eq!(
            names(PrimitiveKind::RotationTrack),
            [
                "dutch",
                "ease",
                "jitter",
                "ver",
                "object",
                "rot_axis",
                "push",
                "local_offset",
                "world_move_1",
                "world_move_2"
            ]
        );
    }

    #[test]
    fn angle_set_matches_table() {
        let v = angle_values();
        assert_eq!(v.len(), 9 + 37 + 9);
        assert!(v.contains(&-180) && v.contains(&-100) && v.contains(&-85) && v.contains(&5));
        assert!(!v.contains(&-95) && !v.contains(&95) && !v.contains(&105) && !v.contains(&3));
    }

    #[test]
    fn longest_prefix_split() {
        assert_eq!(split_modifier("t_x_far_left"), Some((ModifierKey::TX, "far_left")));
        assert_eq!(
            split_modifier("follow_style_lazy"),
            Some((ModifierKey::FollowStyle, "lazy"))
        );
        assert_eq!(
            split_modifier("world_move_1_truck_right_0.5"),
            Some((ModifierKey::WorldMove1, "truck_right_0.5"))
        );
        assert_eq!(split_modifier("dont_look"), Some((ModifierKey::DontLook, "")));
        assert_eq!(split_modifier("dont_look_none"), Some((ModifierKey::DontLook, "none")));
        assert_eq!(split_modifier("speed_fast"), None);
        assert_eq!(split_modifier("t_x_"), None);
    }
}
