//! Keyword-table planner. Each description segment (split on "then")
//! becomes one tag; phrases inside a segment (split on "and" and commas)
//! each contribute modifiers to that tag.

use crate::dsl::{angle_values, ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};

use super::{words, PlanError};

const SEGMENT_BREAKS: &[&str] = &[", and then ", ", then ", " and then ", " then ", ", afterwards "];
const PHRASE_BREAKS: &[&str] = &[" and ", ", ", " while ", " as "];

const NEAR_WORDS: &[&str] = &["slightly", "little", "bit", "gently", "subtly", "barely", "small", "slowly", "touch"];
const FAR_WORDS: &[&str] = &["far", "lot", "dramatically", "significantly", "much", "greatly", "way", "huge", "big", "sharply"];

const MOTION_VERBS: &[&str] = &[
    "move", "moves", "moving", "dolly", "dollies", "dollying", "push", "pushes", "pushing", "pull", "pulls", "pulling",
    "zoom", "zooms", "zooming", "go", "goes", "going", "come", "comes", "coming", "creep", "creeps", "creeping",
    "fly", "flies", "flying", "drift", "drifts", "drifting", "glide", "glides", "gliding", "spiral", "spirals",
    "spiraling", "spiralling",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Level {
    Near,
    Plain,
    Far,
}

fn level_of(ws: &[String]) -> Level {
    if ws.iter().any(|w| NEAR_WORDS.contains(&w.as_str())) {
        Level::Near
    } else if ws.iter().any(|w| FAR_WORDS.contains(&w.as_str())) {
        Level::Far
    } else {
        Level::Plain
    }
}

fn any(ws: &[String], options: &[&str]) -> bool {
    ws.iter().any(|w| options.contains(&w.as_str()))
}

fn starts(ws: &[String], prefixes: &[&str]) -> bool {
    ws.iter().any(|w| prefixes.iter().any(|p| w.starts_with(p)))
}

fn split_all(text: &str, seps: &[&str]) -> Vec<String> {
    let mut parts = vec![text.to_string()];
    for sep in seps {
        parts = parts.iter().flat_map(|p| p.split(sep).map(str::to_string).collect::<Vec<_>>()).collect();
    }
    parts.into_iter().map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect()
}

/// An explicit "N degrees" amount, if any.
fn degrees(ws: &[String]) -> Option<i32> {
    let amount = |n: &str| n.parse::<f64>().ok().filter(|v| v.is_finite()).map(|v| v.clamp(-720.0, 720.0).round() as i32);
    ws.iter().enumerate().find_map(|(i, w)| match w.strip_suffix('°') {
        Some(n) => amount(n),
        None => ws.get(i + 1).filter(|u| u.starts_with("degree") || *u == "deg").and_then(|_| amount(w)),
    })
}

fn nearest(values: &[i32], target: i32) -> i32 {
    *values.iter().min_by_key(|v| ((**v - target).abs(), -**v)).expect("non-empty table")
}

fn put(tag: &mut MotionTag, key: ModifierKey, token: &str) {
    let value = key.spec().lookup(token).expect("rule tables only emit valid tokens");
    tag.assign(key, value).expect("rule tables only emit applicable keys");
}

fn level_token(negative: bool, level: Level, key: ModifierKey) -> &'static str {
    let table: [&str; 6] = match key {
        ModifierKey::TX => ["near_left", "left", "far_left", "near_right", "right", "far_right"],
        ModifierKey::TY => ["near_down", "down", "far_down", "near_up", "up", "far_up"],
        _ => ["near_in", "in", "far_in", "near_out", "out", "far_out"],
    };
    let i = match level {
        Level::Near => 0,
        Level::Plain => 1,
        Level::Far => 2,
    };
    table[if negative { i } else { 3 + i }]
}

fn fraction_token(negative: bool, level: Level) -> &'static str {
    match (negative, level) {
        (true, Level::Near) => "in_0.1",
        (true, Level::Plain) => "in_0.3",
        (true, Level::Far) => "in_0.5",
        (false, Level::Near) => "out_0.1",
        (false, Level::Plain) => "out_0.3",
        (false, Level::Far) => "out_0.5",
    }
}

/// Translation directions named in a phrase, as (axis, negative).
fn translations(ws: &[String], role: Role) -> Vec<(ModifierKey, bool)> {
    let mut out: Vec<(ModifierKey, bool)> = Vec::new();
    let mut add = |k, neg| {
        if !out.iter().any(|(existing, _)| *existing == k) {
            out.push((k, neg));
        }
    };
    let joined = ws.join(" ");
    for (i, w) in ws.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| ws[j].as_str()).unwrap_or("");
        match w.as_str() {
            "left" | "leftward" | "leftwards" => add(ModifierKey::TX, true),
            "right" | "rightward" | "rightwards" => add(ModifierKey::TX, false),
            "up" | "upward" | "upwards" | "rises" | "rising" | "rise" | "raises" | "ascends" | "ascending" | "climbs"
            | "jumps" | "lifts" => add(ModifierKey::TY, false),
            "down" | "downward" | "downwards" | "descends" | "descending" | "lowers" | "drops" | "falls" | "sinks" => {
                add(ModifierKey::TY, true)
            }
            "forward" | "forwards" | "ahead" | "closer" | "advances" | "approaches" => {
                let toward_camera = role == Role::Object && joined.contains("camera");
                add(ModifierKey::TZ, !toward_camera)
            }
            "toward" | "towards" if role == Role::Object && joined.contains("camera") => add(ModifierKey::TZ, false),
            "backward" | "backwards" | "back" | "away" | "retreats" | "reverses" => {
                let from_camera = role == Role::Object && joined.contains("camera") && w == "away";
                add(ModifierKey::TZ, from_camera)
            }
            "in" | "inward" if MOTION_VERBS.contains(&prev) => add(ModifierKey::TZ, true),
            "out" | "outward" if MOTION_VERBS.contains(&prev) => add(ModifierKey::TZ, false),
            _ => {}
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Turn {
    Yaw,
    Pitch,
    Roll,
}

fn turn_kind(ws: &[String], role: Role) -> Option<Turn> {
    if starts(ws, &["pan", "yaw", "turn", "rotat", "spin", "swivel"]) {
        Some(Turn::Yaw)
    } else if starts(ws, &["tilt", "pitch"]) {
        Some(Turn::Pitch)
    } else if role == Role::Camera && starts(ws, &["roll", "bank"]) {
        Some(Turn::Roll)
    } else {
        None
    }
}

/// Signed angle for a rotation phrase.
fn turn_angle(ws: &[String], kind: Turn) -> Option<i32> {
    let negative = match kind {
        Turn::Yaw => any(ws, &["right", "rightward", "clockwise"]) && !any(ws, &["counterclockwise"]),
        Turn::Pitch => any(ws, &["down", "downward", "downwards"]),
        Turn::Roll => any(ws, &["counterclockwise", "counter-clockwise", "anticlockwise", "left"]),
    };
    let around = kind == Turn::Yaw && any(ws, &["around", "round"]);
    let named = any(ws, &["left", "right", "up", "down", "clockwise", "counterclockwise", "anticlockwise", "around", "round"]);
    let magnitude = match degrees(ws) {
        Some(d) => d.abs(),
        None if around => 180,
        None if !named && kind != Turn::Roll => return None,
        None => match level_of(ws) {
            Level::Near => 15,
            Level::Plain => 30,
            Level::Far => 90,
        },
    };
    let angle = if negative { -magnitude } else { magnitude };
    Some(nearest(&angle_values(), angle.clamp(-180, 180)))
}

fn common_modifiers(tag: &mut MotionTag, ws: &[String], text: &str) {
    if starts(ws, &["accelerat"]) || text.contains("speeds up") || text.contains("ease in") || text.contains("eases in") {
        put(tag, ModifierKey::Ease, "in");
    } else if starts(ws, &["decelerat"]) || text.contains("slows down") || text.contains("ease out") || text.contains("eases out") {
        put(tag, ModifierKey::Ease, "out");
    } else if any(ws, &["smoothly", "smooth"]) && tag.primitive() == PrimitiveKind::FreeForm {
        put(tag, ModifierKey::Ease, "in_out");
    }
    if tag.primitive().is_tracking() || tag.primitive() == PrimitiveKind::FreeForm {
        if text.contains("very shaky") || any(ws, &["violently", "violent", "chaotic"]) {
            put(tag, ModifierKey::Jitter, "high");
        } else if starts(ws, &["handheld", "hand-held", "shaky", "shaking", "wobbl"]) {
            put(tag, ModifierKey::Jitter, "low");
        }
    }
}

fn tracking_modifiers(tag: &mut MotionTag, ws: &[String], text: &str) {
    if any(ws, &["aerial", "overhead", "above", "high-angle", "bird's-eye"]) || text.contains("high angle") {
        put(tag, ModifierKey::Ver, "aerial");
    } else if any(ws, &["low-angle", "below", "beneath"]) || text.contains("low angle") {
        put(tag, ModifierKey::Ver, "low-angle");
    }
    for side in ["left", "right"] {
        let cues = [format!("{side} of frame"), format!("{side} of the frame"), format!("frame {side}"), format!("{side} side of the frame"), format!("{side} third")];
        if cues.iter().any(|c| text.contains(c.as_str())) {
            put(tag, ModifierKey::Object, side);
        }
    }
    if any(ws, &["dutch", "canted", "tilted-horizon"]) {
        let d = degrees(ws).map_or(15, |d| nearest(&[15, 30, 45], d.abs()));
        let d = if any(ws, &["left", "counterclockwise"]) { -d } else { d };
        put(tag, ModifierKey::Dutch, &d.to_string());
    }
}

fn free_form_tag(segment: &str, role: Role) -> MotionTag {
    let mut tag = MotionTag::new(PrimitiveKind::FreeForm);
    for phrase in split_all(segment, PHRASE_BREAKS) {
        let ws = words(&phrase);
        if let Some(kind) = turn_kind(&ws, role) {
            let key = match kind {
                Turn::Yaw => ModifierKey::Yaw,
                Turn::Pitch => ModifierKey::Pitch,
                Turn::Roll => ModifierKey::Roll,
            };
            if let Some(angle) = turn_angle(&ws, kind) {
                put(&mut tag, key, &angle.to_string());
            }
            continue;
        }
        let level = level_of(&ws);
        for (key, negative) in translations(&ws, role) {
            put(&mut tag, key, level_token(negative, level, key));
        }
    }
    if role == Role::Camera {
        let ws = words(segment);
        common_modifiers(&mut tag, &ws, &segment.to_lowercase());
    }
    tag
}

fn orbit_tag(segment: &str) -> MotionTag {
    let mut tag = MotionTag::new(PrimitiveKind::OrbitTrack);
    let text = segment.to_lowercase();
    let ws = words(segment);
    let deg = if ["full circle", "all the way around", "complete circle", "full orbit", "full revolution", "360"]
        .iter()
        .any(|c| text.contains(c))
    {
        Some(360)
    } else if text.contains("three-quarter") || text.contains("three quarter") {
        Some(270)
    } else if any(&ws, &["half", "halfway", "semicircle", "semi-circle"]) {
        Some(180)
    } else if any(&ws, &["quarter"]) {
        Some(90)
    } else {
        degrees(&ws).map(|d| nearest(&[30, 45, 60, 90, 180, 270, 360], d.abs()))
    };
    if let Some(d) = deg {
        put(&mut tag, ModifierKey::Deg, &d.to_string());
    }
    if any(&ws, &["counterclockwise", "counter-clockwise", "anticlockwise", "anti-clockwise", "ccw"]) {
        put(&mut tag, ModifierKey::Dir, "ccw");
    } else if any(&ws, &["clockwise", "cw"]) {
        put(&mut tag, ModifierKey::Dir, "cw");
    }
    if any(&ws, &["vertically", "vertical"]) || text.contains("over the top") {
        put(&mut tag, ModifierKey::PlaneAxis, "x");
    }
    let level = level_of(&ws);
    if starts(&ws, &["spiral"]) || text.contains("closing in") || text.contains("moving closer") {
        let out = any(&ws, &["out", "outward", "away", "widening"]);
        put(&mut tag, ModifierKey::Spiral, fraction_token(!out, level));
    }
    tracking_modifiers(&mut tag, &ws, &text);
    common_modifiers(&mut tag, &ws, &text);
    tag
}

fn tail_tag(segment: &str) -> MotionTag {
    let mut tag = MotionTag::new(PrimitiveKind::TailTrack);
    let text = segment.to_lowercase();
    let ws = words(segment);
    if starts(&ws, &["loose", "lazy", "lazily", "lag", "delay"]) {
        put(&mut tag, ModifierKey::FollowStyle, "lazy");
    } else if any(&ws, &["softly", "smoothly", "gently", "soft", "smooth"]) {
        put(&mut tag, ModifierKey::FollowStyle, "soft");
    }
    if text.contains("ahead of") || text.contains("in front of") || any(&ws, &["leads", "leading"]) {
        put(&mut tag, ModifierKey::Lead, "lead");
    }
    if ["without looking", "not looking", "doesn't look", "don't look", "without turning"].iter().any(|c| text.contains(c)) {
        put(&mut tag, ModifierKey::DontLook, "dont_look");
    }
    if text.contains("mirror") {
        put(&mut tag, ModifierKey::MirrorAxis, "x");
    }
    if starts(&ws, &["exaggerat", "amplif"]) {
        put(&mut tag, ModifierKey::Amp, "all_1.5");
    }
    let level = level_of(&ws);
    if any(&ws, &["closer"]) || text.contains("moving in") || text.contains("pushing in") {
        put(&mut tag, ModifierKey::Dolly, fraction_token(true, level));
    } else if any(&ws, &["further", "farther"]) || text.contains("pulling back") || text.contains("backing off") {
        put(&mut tag, ModifierKey::Dolly, fraction_token(false, level));
    }
    tracking_modifiers(&mut tag, &ws, &text);
    common_modifiers(&mut tag, &ws, &text);
    tag
}

fn world_move(key: ModifierKey, negative: bool, level: Level) -> &'static str {
    let i = match level {
        Level::Near => 0,
        Level::Plain => 1,
        Level::Far => 2,
    };
    let table: [&str; 3] = match (key, negative) {
        (ModifierKey::TX, false) => ["truck_right_0.5", "truck_right_1.0", "truck_right_2.0"],
        (ModifierKey::TX, true) => ["truck_left_0.5", "truck_left_1.0", "truck_left_2.0"],
        (ModifierKey::TY, false) => ["pedestal_up_0.5", "pedestal_up_1.0", "pedestal_up_2.0"],
        (ModifierKey::TY, true) => ["pedestal_down_0.5", "pedestal_down_1.0", "pedestal_down_2.0"],
        (_, true) => ["goes_in_0.5", "goes_in_1.0", "goes_in_2.0"],
        (_, false) => ["goes_out_0.5", "goes_out_1.0", "goes_out_2.0"],
    };
    table[i]
}

fn rotation_tag(segment: &str) -> MotionTag {
    let mut tag = MotionTag::new(PrimitiveKind::RotationTrack);
    let text = segment.to_lowercase();
    let ws = words(segment);
    let pans = starts(&ws, &["pan", "yaw", "swivel"]);
    let tilts = starts(&ws, &["tilt"]);
    match (pans, tilts) {
        (true, false) => put(&mut tag, ModifierKey::RotAxis, "pan"),
        (false, true) => put(&mut tag, ModifierKey::RotAxis, "tilt"),
        _ => {}
    }
    let mut moves = Vec::new();
    for phrase in split_all(segment, PHRASE_BREAKS) {
        let pws = words(&phrase);
        if turn_kind(&pws, Role::Camera).is_some() {
            continue;
        }
        let level = level_of(&pws);
        for (key, negative) in translations(&pws, Role::Camera) {
            if key == ModifierKey::TZ && starts(&pws, &["push", "pull", "dolly", "zoom"]) {
                put(&mut tag, ModifierKey::Push, fraction_token(negative, level));
            } else {
                moves.push(world_move(key, negative, level));
            }
        }
    }
    for (key, mv) in [ModifierKey::WorldMove1, ModifierKey::WorldMove2].into_iter().zip(moves) {
        put(&mut tag, key, mv);
    }
    tracking_modifiers(&mut tag, &ws, &text);
    common_modifiers(&mut tag, &ws, &text);
    tag
}

const RETARGET_CUES: &[&str] = &[
    "follow", "following", "keep", "keeping", "keeps", "track", "tracking", "it", "them", "him", "her", "subject",
    "object", "framed", "centered", "centred", "watch", "watching", "watches",
];

fn camera_tag(segment: &str, has_object: bool) -> MotionTag {
    let ws = words(segment);
    let text = segment.to_lowercase();
    let turns = starts(&ws, &["pan", "tilt", "swivel"]);
    if starts(&ws, &["orbit", "circl", "revolv"]) || text.contains("around the") || text.contains("around it") {
        orbit_tag(segment)
    } else if (turns && (any(&ws, RETARGET_CUES) || has_object))
        || (starts(&ws, &["turn", "rotat"]) && any(&ws, RETARGET_CUES))
    {
        rotation_tag(segment)
    } else if starts(&ws, &["follow", "tail", "chase", "trail", "shadow"]) || text.contains("from behind") {
        tail_tag(segment)
    } else if text.contains("looks at") || text.contains("keeps the") || text.contains("stays on") || any(&ws, &["watches"]) {
        rotation_tag(segment)
    } else {
        free_form_tag(segment, Role::Camera)
    }
}

pub(crate) fn plan_role(text: &str, role: Role, object: Option<&MotionProgram>) -> Result<MotionProgram, PlanError> {
    let segments = split_all(text.trim().trim_end_matches('.'), SEGMENT_BREAKS);
    if segments.is_empty() {
        return Ok(MotionProgram::static_program(role));
    }
    if segments.len() > 4 {
        return Err(PlanError::PlanRejected(format!("{} motion segments; at most 4 are supported", segments.len())));
    }
    let has_object = object.is_some_and(|o| !o.is_static());
    let tags = segments
        .iter()
        .map(|s| match role {
            Role::Object => free_form_tag(s, Role::Object),
            Role::Camera => camera_tag(s, has_object),
        })
        .collect();
    MotionProgram::new(role, tags).map_err(|e| PlanError::PlanRejected(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(text: &str) -> String {
        plan_role(text, Role::Camera, None).unwrap().to_dsl(false)
    }

    fn obj(text: &str) -> String {
        plan_role(text, Role::Object, None).unwrap().to_dsl(false)
    }

    #[test]
    fn camera_table() {
        assert_eq!(cam("the camera pans left"), "free_form yaw_30");
        assert_eq!(cam("the camera slightly tilts down"), "free_form pitch_-15");
        assert_eq!(cam("the camera pushes in slightly, then pans right by 45 degrees"), "free_form t_z_near_in | free_form yaw_-45");
        assert_eq!(cam("the camera rises far and moves left"), "free_form t_x_left t_y_far_up");
        assert_eq!(cam("the camera orbits the subject counterclockwise from above"), "orbit_track ver_aerial dir_ccw");
        assert_eq!(cam("the camera follows it from behind, loosely"), "tail_track follow_style_lazy");
        assert_eq!(cam("the camera stays in place and pans to follow it"), "rotation_track rot_axis_pan");
        assert_eq!(cam("the camera stays in place and turns to keep him centered"), "rotation_track");
        assert_eq!(cam("the camera trucks left while panning to keep the car centered"), "rotation_track rot_axis_pan world_move_1_truck_left_1.0");
        assert_eq!(cam("the camera is static"), "free_form");
        assert_eq!(cam("handheld, the camera moves forward"), "free_form t_z_in jitter_low");
    }

    #[test]
    fn object_table() {
        assert_eq!(obj("the car drives forward"), "free_form t_z_in");
        assert_eq!(obj("the dog runs toward the camera"), "free_form t_z_out");
        assert_eq!(obj("the car turns left"), "free_form yaw_30");
        assert_eq!(obj("the person turns around"), "free_form yaw_180");
        assert_eq!(obj("the ball jumps"), "free_form t_y_up");
        assert_eq!(obj("the car rolls left"), "free_form t_x_left");
    }

    #[test]
    fn pan_with_moving_object_retargets() {
        let o = plan_role("the car drives right", Role::Object, None).unwrap();
        let c = plan_role("the camera pans", Role::Camera, Some(&o)).unwrap();
        assert_eq!(c.tags()[0].primitive(), PrimitiveKind::RotationTrack);
    }

    #[test]
    fn too_many_segments() {
        let err = plan_role("up, then down, then left, then right, then up", Role::Camera, None).unwrap_err();
        assert!(matches!(err, PlanError::PlanRejected(_)));
    }

    #[test]
    fn deterministic() {
        let text = "the camera orbits in a half circle, then follows it";
        assert_eq!(cam(text), cam(text));
        assert_eq!(cam(text), "orbit_track deg_180 | tail_track");
    }
}
