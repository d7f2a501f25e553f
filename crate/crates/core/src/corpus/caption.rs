//! Template captions. The phrase bank lives in `data/templates.json` so it
//! can be revised without touching the realization logic.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dsl::{ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptionStyle {
    /// Camera motion described on its own.
    CameraFree,
    /// Camera motion described against the object.
    CameraRelative,
    Object,
}

#[derive(Debug, Deserialize)]
struct Signed {
    pos: String,
    neg: String,
}

#[derive(Debug, Deserialize)]
struct OrbitBank {
    verb: String,
    plane: BTreeMap<String, String>,
    dir: BTreeMap<String, String>,
    extent: BTreeMap<String, String>,
    extent_default: String,
    spiral: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct TailBank {
    verb: String,
    style: BTreeMap<String, String>,
    axis: String,
    amp_up: String,
    amp_down: String,
    amp_all: String,
    dolly: BTreeMap<String, String>,
    mirror: String,
    dont_look: String,
    lead: String,
}

#[derive(Debug, Deserialize)]
struct RotationBank {
    hold: String,
    verb: BTreeMap<String, String>,
    push: BTreeMap<String, String>,
    offset: String,
    move_lead: String,
    move_then: String,
    moves: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct Bank {
    join: String,
    and: String,
    subjects: BTreeMap<String, String>,
    #[serde(rename = "static")]
    still: String,
    translate: String,
    intensity: BTreeMap<String, String>,
    directions: BTreeMap<String, Signed>,
    rotate: BTreeMap<String, BTreeMap<String, Signed>>,
    rotate_amount: String,
    relative_suffix: String,
    ease: BTreeMap<String, String>,
    jitter: BTreeMap<String, String>,
    ver: BTreeMap<String, String>,
    framing: BTreeMap<String, String>,
    dutch: String,
    orbit: OrbitBank,
    tail: TailBank,
    rotation: RotationBank,
}

fn bank() -> &'static Bank {
    static BANK: OnceLock<Bank> = OnceLock::new();
    BANK.get_or_init(|| {
        serde_json::from_str(include_str!("../../data/templates.json")).expect("template bank parses")
    })
}

fn lookup<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Option<&'a str> {
    map.get(key).map(String::as_str).filter(|s| !s.is_empty())
}

fn translation_phrase(tag: &MotionTag, b: &Bank) -> Option<String> {
    let parts: Vec<String> = [ModifierKey::TX, ModifierKey::TY, ModifierKey::TZ]
        .into_iter()
        .filter_map(|key| {
            let token = tag.sym(key);
            if token == "no" {
                return None;
            }
            let negative = crate::compiler::level_magnitude(token) < 0.0;
            let dirs = &b.directions[key.as_str()];
            let dir = if negative { &dirs.neg } else { &dirs.pos };
            let level = if token.starts_with("near_") {
                "near"
            } else if token.starts_with("far_") {
                "far"
            } else {
                "plain"
            };
            Some(match lookup(&b.intensity, level) {
                Some(adverb) => format!("{adverb} {dir}"),
                None => dir.clone(),
            })
        })
        .collect();
    (!parts.is_empty()).then(|| b.translate.replace("{parts}", &parts.join(&b.and)))
}

fn rotation_phrases(tag: &MotionTag, role: Role, b: &Bank) -> Vec<String> {
    let table = &b.rotate[role.as_str()];
    [ModifierKey::Yaw, ModifierKey::Pitch, ModifierKey::Roll]
        .into_iter()
        .filter_map(|key| {
            let deg = tag.get(key)?.as_int()?;
            let verbs = table.get(key.as_str())?;
            if deg == 0 {
                return None;
            }
            let verb = if deg > 0 { &verbs.pos } else { &verbs.neg };
            Some(b.rotate_amount.replace("{verb}", verb).replace("{deg}", &deg.abs().to_string()))
        })
        .collect()
}

fn axis_and_scale(token: &str) -> Option<(&str, f64)> {
    let (axis, s) = token.split_once('_')?;
    Some((axis, s.parse().ok()?))
}

fn direction_of(token: &str) -> Option<&str> {
    token.split('_').next().filter(|d| *d == "in" || *d == "out")
}

/// Qualifiers shared by the tracking primitives.
fn tracking_qualifiers(tag: &MotionTag, b: &Bank, out: &mut Vec<String>) {
    if let Some(s) = lookup(&b.ver, tag.sym(ModifierKey::Ver)) {
        out.push(s.to_string());
    }
    if let Some(s) = lookup(&b.framing, tag.sym(ModifierKey::Object)) {
        out.push(s.to_string());
    }
    let dutch = tag.int(ModifierKey::Dutch);
    if dutch != 0 {
        out.push(b.dutch.replace("{deg}", &dutch.abs().to_string()));
    }
}

fn timing_qualifiers(tag: &MotionTag, b: &Bank, out: &mut Vec<String>) {
    if let Some(s) = lookup(&b.ease, tag.sym(ModifierKey::Ease)) {
        out.push(s.to_string());
    }
    if let Some(s) = lookup(&b.jitter, tag.sym(ModifierKey::Jitter)) {
        out.push(s.to_string());
    }
}

fn clause(tag: &MotionTag, style: CaptionStyle, b: &Bank) -> String {
    let role = if style == CaptionStyle::Object { Role::Object } else { Role::Camera };
    let mut words: Vec<String> = Vec::new();
    match tag.primitive() {
        PrimitiveKind::FreeForm => {
            let mut parts: Vec<String> = translation_phrase(tag, b).into_iter().collect();
            if style == CaptionStyle::CameraRelative {
                if let Some(first) = parts.first_mut() {
                    first.push_str(&b.relative_suffix);
                }
            }
            parts.extend(rotation_phrases(tag, role, b));
            if parts.is_empty() {
                words.push(b.still.clone());
            } else {
                words.push(parts.join(&b.and));
            }
        }
        PrimitiveKind::OrbitTrack => {
            let o = &b.orbit;
            let plane = lookup(&o.plane, tag.sym(ModifierKey::PlaneAxis)).unwrap_or_default();
            words.push(o.verb.replace("{plane}", plane).trim_end().to_string());
            if let Some(d) = lookup(&o.dir, tag.sym(ModifierKey::Dir)) {
                words.push(d.to_string());
            }
            let deg = tag.int(ModifierKey::Deg);
            words.push(
                lookup(&o.extent, &deg.to_string())
                    .map(str::to_string)
                    .unwrap_or_else(|| o.extent_default.replace("{deg}", &deg.to_string())),
            );
            if let Some(s) = direction_of(tag.sym(ModifierKey::Spiral)).and_then(|d| lookup(&o.spiral, d)) {
                words.push(s.to_string());
            }
            tracking_qualifiers(tag, b, &mut words);
        }
        PrimitiveKind::TailTrack => {
            let t = &b.tail;
            words.push(t.verb.clone());
            if let Some(s) = lookup(&t.style, tag.sym(ModifierKey::FollowStyle)) {
                words.push(s.to_string());
            }
            let axis = tag.sym(ModifierKey::FollowAxis);
            if axis != "full" {
                words.push(t.axis.replace("{axis}", axis));
            }
            if let Some((axis, s)) = axis_and_scale(tag.sym(ModifierKey::Amp)) {
                let axis = if axis == "all" { t.amp_all.as_str() } else { axis };
                let template = if s > 1.0 { &t.amp_up } else { &t.amp_down };
                words.push(template.replace("{axis}", axis));
            }
            if let Some(s) = direction_of(tag.sym(ModifierKey::Dolly)).and_then(|d| lookup(&t.dolly, d)) {
                words.push(s.to_string());
            }
            let mirror = tag.sym(ModifierKey::MirrorAxis);
            if mirror != "no" {
                words.push(t.mirror.replace("{axis}", mirror));
            }
            if tag.sym(ModifierKey::DontLook) == "dont_look" {
                words.push(t.dont_look.clone());
            }
            if tag.sym(ModifierKey::Lead) == "lead" {
                words.push(t.lead.clone());
            }
            tracking_qualifiers(tag, b, &mut words);
        }
        PrimitiveKind::RotationTrack => {
            let r = &b.rotation;
            let moves: Vec<&str> = [ModifierKey::WorldMove1, ModifierKey::WorldMove2]
                .into_iter()
                .filter_map(|k| {
                    let token = tag.sym(k);
                    let dir = token.rsplit_once('_').map(|(d, _)| d)?;
                    lookup(&r.moves, dir)
                })
                .collect();
            if moves.is_empty() {
                words.push(r.hold.clone());
            }
            words.push(lookup(&r.verb, tag.sym(ModifierKey::RotAxis)).unwrap_or_default().to_string());
            if moves.is_empty() {
                if let Some(s) = direction_of(tag.sym(ModifierKey::Push)).and_then(|d| lookup(&r.push, d)) {
                    words.push(s.to_string());
                }
                if tag.sym(ModifierKey::LocalOffset) != "no" {
                    words.push(r.offset.clone());
                }
            } else {
                let joined = moves.join(&format!(" {} ", r.move_then));
                words.push(format!("{} {joined}", r.move_lead));
            }
            tracking_qualifiers(tag, b, &mut words);
        }
    }
    timing_qualifiers(tag, b, &mut words);
    words.retain(|w| !w.is_empty());
    words.join(" ")
}

/// Deterministic caption: one clause per tag joined with ", then ", the
/// subject named once at the start.
pub fn caption(p: &MotionProgram, style: CaptionStyle) -> String {
    let b = bank();
    let subject = match style {
        CaptionStyle::Object => &b.subjects["object"],
        _ => &b.subjects["camera"],
    };
    let clauses: Vec<String> = p.tags().iter().map(|t| clause(t, style, b)).collect();
    format!("{subject} {}", clauses.join(&b.join))
}
