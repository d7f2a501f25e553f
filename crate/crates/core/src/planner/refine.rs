//! Relative edits ("make it counterclockwise", "zoom out slightly").
//!
//! The rule table touches only these keys:
//!
//! | instruction              | free_form   | orbit_track | tail_track | rotation_track |
//! |--------------------------|-------------|-------------|------------|----------------|
//! | clockwise / counter...   |             | dir         |            |                |
//! | higher / lower           | t_y         | ver         | ver        | ver            |
//! | zoom in / out, closer... | t_z         | spiral      | dolly      | push           |
//! | faster / slower          | t_x t_y t_z | deg spiral  | dolly      | push           |

use serde::Serialize;

use crate::dsl::{keys_for, ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};

use super::words;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldChange {
    pub role: Role,
    pub tag: usize,
    /// A modifier key, or `tag` when a whole tag was added, removed or
    /// changed primitive.
    pub field: String,
    pub from: Option<String>,
    pub to: Option<String>,
}

/// Field-level differences between two programs of one role.
pub fn diff_programs(role: Role, before: &MotionProgram, after: &MotionProgram) -> Vec<FieldChange> {
    let mut out = Vec::new();
    let n = before.tags().len().max(after.tags().len());
    for i in 0..n {
        match (before.tags().get(i), after.tags().get(i)) {
            (Some(a), Some(b)) if a.primitive() == b.primitive() => {
                for key in keys_for(a.primitive()).filter(|k| role == Role::Camera || k.allowed_for_object()) {
                    let (va, vb) = (a.get(key), b.get(key));
                    if va != vb {
                        out.push(FieldChange {
                            role,
                            tag: i,
                            field: key.as_str().into(),
                            from: va.map(|v| v.to_string()),
                            to: vb.map(|v| v.to_string()),
                        });
                    }
                }
            }
            (a, b) => out.push(FieldChange {
                role,
                tag: i,
                field: "tag".into(),
                from: a.map(|t| t.to_dsl(false, role)),
                to: b.map(|t| t.to_dsl(false, role)),
            }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub object: MotionProgram,
    pub camera: MotionProgram,
    /// True when nothing could be applied and the input came back as is.
    pub noop: bool,
    /// `rules`, `remote` or `none`.
    pub backend: &'static str,
    pub reason: Option<String>,
    pub diff: Vec<FieldChange>,
}

impl Refinement {
    pub(crate) fn new(
        obj_before: &MotionProgram,
        cam_before: &MotionProgram,
        object: MotionProgram,
        camera: MotionProgram,
        backend: &'static str,
        reason: Option<String>,
    ) -> Self {
        let mut diff = diff_programs(Role::Object, obj_before, &object);
        diff.extend(diff_programs(Role::Camera, cam_before, &camera));
        Self { object, camera, noop: false, backend, reason, diff }
    }

    pub(crate) fn noop(object: &MotionProgram, camera: &MotionProgram, reason: String) -> Self {
        Self {
            object: object.clone(),
            camera: camera.clone(),
            noop: true,
            backend: "none",
            reason: Some(reason),
            diff: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Dir(&'static str),
    Vertical(i8),
    /// Toward (`true`) or away from the subject, with magnitude 1..=3.
    Depth(bool, u8),
    Speed(i8),
}

fn parse_edits(instruction: &str) -> Vec<Edit> {
    let text = instruction.to_lowercase();
    let ws = words(instruction);
    let has = |opts: &[&str]| ws.iter().any(|w| opts.contains(&w.as_str()));
    let phrase = |opts: &[&str]| opts.iter().any(|p| text.contains(p));
    let mut edits = Vec::new();
    // Counterclockwise first: "clockwise" is a substring of it.
    if has(&["counterclockwise", "counter-clockwise", "anticlockwise", "anti-clockwise", "ccw"]) {
        edits.push(Edit::Dir("ccw"));
    } else if has(&["clockwise", "cw"]) {
        edits.push(Edit::Dir("cw"));
    }
    if has(&["higher", "raise", "raised"]) {
        edits.push(Edit::Vertical(1));
    } else if has(&["lower"]) {
        edits.push(Edit::Vertical(-1));
    }
    let magnitude = if has(&["slightly", "bit", "little", "touch"]) {
        1
    } else if has(&["lot", "much", "way", "far"]) {
        3
    } else {
        2
    };
    if phrase(&["zoom in", "push in", "move in", "closer", "tighter", "nearer"]) {
        edits.push(Edit::Depth(true, magnitude));
    } else if phrase(&["zoom out", "pull back", "pull out", "back off", "further", "farther", "wider", "move out"]) {
        edits.push(Edit::Depth(false, magnitude));
    }
    if has(&["slower"]) || phrase(&["slow down", "slow it down"]) {
        edits.push(Edit::Speed(-1));
    } else if has(&["faster", "quicker"]) || phrase(&["speed up", "speed it up"]) {
        edits.push(Edit::Speed(1));
    }
    edits
}

/// (sign, magnitude 0..=3) of a level or fraction token, with `true` for
/// the negative (left / down / in) side.
fn signed_level(token: &str) -> (bool, u8) {
    if token == "no" {
        return (false, 0);
    }
    if let Some((dir, f)) = token.split_once('_').filter(|(d, _)| *d == "in" || *d == "out") {
        let m = match f {
            "0.1" => 1,
            "0.3" => 2,
            _ => 3,
        };
        return (dir == "in", m);
    }
    let (m, dir) = if let Some(d) = token.strip_prefix("near_") {
        (1, d)
    } else if let Some(d) = token.strip_prefix("far_") {
        (3, d)
    } else {
        (2, token)
    };
    (matches!(dir, "left" | "down" | "in"), m)
}

fn level_token(key: ModifierKey, negative: bool, m: u8) -> String {
    if m == 0 {
        return "no".into();
    }
    let dir = match (key, negative) {
        (ModifierKey::TX, true) => "left",
        (ModifierKey::TX, false) => "right",
        (ModifierKey::TY, true) => "down",
        (ModifierKey::TY, false) => "up",
        (_, true) => "in",
        (_, false) => "out",
    };
    match m {
        1 => format!("near_{dir}"),
        2 => dir.to_string(),
        _ => format!("far_{dir}"),
    }
}

fn fraction_token(negative: bool, m: u8) -> String {
    if m == 0 {
        return "no".into();
    }
    let f = ["0.1", "0.3", "0.5"][usize::from(m.min(3)) - 1];
    format!("{}_{f}", if negative { "in" } else { "out" })
}

fn render_level(key: ModifierKey, negative: bool, m: u8) -> String {
    match key {
        ModifierKey::TX | ModifierKey::TY | ModifierKey::TZ => level_token(key, negative, m),
        _ => fraction_token(negative, m),
    }
}

fn write(tag: &mut MotionTag, key: ModifierKey, token: &str) -> bool {
    let value = key.spec().lookup(token).expect("edit tables emit valid tokens");
    let before = tag.get(key);
    tag.assign(key, value).expect("edit tables emit applicable keys");
    before != Some(value)
}

/// Direction-aware depth edit: an opposite or empty motion is replaced by
/// the requested one; a motion already going that way grows one step.
fn depth(tag: &mut MotionTag, key: ModifierKey, toward: bool, magnitude: u8) {
    let (neg, m) = signed_level(tag.sym(key));
    let token = if m > 0 && neg == toward {
        render_level(key, neg, (m + 1).min(3))
    } else {
        render_level(key, toward, magnitude)
    };
    write(tag, key, &token);
}

fn speed(tag: &mut MotionTag, key: ModifierKey, step: i8) {
    let (neg, m) = signed_level(tag.sym(key));
    if m == 0 {
        return;
    }
    let m = (m as i8 + step).clamp(1, 3) as u8;
    write(tag, key, &render_level(key, neg, m));
}

fn step_in(order: &[&str], current: &str, step: i8) -> Option<String> {
    let i = order.iter().position(|v| *v == current)? as i32 + i32::from(step);
    Some(order[i.clamp(0, order.len() as i32 - 1) as usize].to_string())
}

const Y_LEVELS: [&str; 7] = ["far_down", "down", "near_down", "no", "near_up", "up", "far_up"];
const VER_ORDER: [&str; 3] = ["low-angle", "none", "aerial"];
const DEG_ORDER: [&str; 7] = ["30", "45", "60", "90", "180", "270", "360"];

/// Applies one edit; false when no key of the tag is covered by it.
fn apply(tag: &mut MotionTag, edit: Edit) -> bool {
    use ModifierKey as K;
    use PrimitiveKind as P;
    let primitive = tag.primitive();
    match edit {
        Edit::Dir(d) if primitive == P::OrbitTrack => {
            write(tag, K::Dir, d);
        }
        Edit::Vertical(s) => {
            let (key, order): (K, &[&str]) = if primitive == P::FreeForm { (K::TY, &Y_LEVELS) } else { (K::Ver, &VER_ORDER) };
            let next = step_in(order, tag.sym(key), s).expect("current value is in the table");
            write(tag, key, &next);
        }
        Edit::Depth(toward, m) => {
            let key = match primitive {
                P::FreeForm => K::TZ,
                P::OrbitTrack => K::Spiral,
                P::TailTrack => K::Dolly,
                P::RotationTrack => K::Push,
            };
            depth(tag, key, toward, m);
        }
        Edit::Speed(s) => {
            let keys: &[K] = match primitive {
                P::FreeForm => &[K::TX, K::TY, K::TZ],
                P::OrbitTrack => &[K::Spiral],
                P::TailTrack => &[K::Dolly],
                P::RotationTrack => &[K::Push],
            };
            for key in keys {
                speed(tag, *key, s);
            }
            if primitive == P::OrbitTrack {
                let next = step_in(&DEG_ORDER, &tag.int(K::Deg).to_string(), s).expect("deg is in the table");
                write(tag, K::Deg, &next);
            }
        }
        _ => return false,
    }
    true
}

const OBJECT_CUES: &[&str] = &["object", "subject", "car", "person", "actor"];

/// Rule-table refinement. `None` when the instruction names no known
/// edit or no tag has a key the edit covers.
pub(crate) fn apply_rules(
    object: &MotionProgram,
    camera: &MotionProgram,
    instruction: &str,
) -> Option<(MotionProgram, MotionProgram)> {
    let edits = parse_edits(instruction);
    if edits.is_empty() {
        return None;
    }
    let ws = words(instruction);
    let to_object = ws.iter().any(|w| OBJECT_CUES.contains(&w.as_str())) && !ws.iter().any(|w| w == "camera");
    let (mut obj, mut cam) = (object.clone(), camera.clone());
    let target = if to_object { &mut obj } else { &mut cam };
    let role = target.role();
    let mut touched = false;
    for tag in target.tags_mut().iter_mut() {
        for edit in &edits {
            // Object programs carry no depth-dolly or orbit keys.
            if role == Role::Object && matches!(edit, Edit::Dir(_)) {
                continue;
            }
            touched |= apply(tag, *edit);
        }
    }
    if !touched {
        return None;
    }
    target.validate().ok()?;
    Some((obj, cam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::llm::{OfflineTransport, RemoteBackendConfig, ScriptedTransport};
    use crate::planner::Planner;

    fn cam(s: &str) -> MotionProgram {
        parse_program(s, Role::Camera).unwrap()
    }

    fn still() -> MotionProgram {
        MotionProgram::static_program(Role::Object)
    }

    #[test]
    fn counterclockwise_is_a_single_field_edit() {
        let r = Planner::default().refine(&still(), &cam("orbit_track dir_cw"), "make it counterclockwise");
        assert!(!r.noop);
        assert_eq!(r.camera.to_dsl(false), "orbit_track dir_ccw");
        assert_eq!(
            r.diff,
            vec![FieldChange { role: Role::Camera, tag: 0, field: "dir".into(), from: Some("cw".into()), to: Some("ccw".into()) }]
        );
        let back = Planner::default().refine(&still(), &r.camera, "clockwise please");
        assert_eq!(back.camera.to_dsl(false), "orbit_track");
    }

    #[test]
    fn zoom_out_reverses_direction() {
        let r = Planner::default().refine(&still(), &cam("free_form t_z_in"), "zoom out slightly");
        assert_eq!(r.camera.to_dsl(false), "free_form t_z_near_out");
        let r = Planner::default().refine(&still(), &cam("free_form t_z_in"), "closer");
        assert_eq!(r.camera.to_dsl(false), "free_form t_z_far_in");
    }

    #[test]
    fn tracking_depth_and_height() {
        let r = Planner::default().refine(&still(), &cam("tail_track"), "get closer");
        assert_eq!(r.camera.to_dsl(false), "tail_track dolly_in_0.3");
        let r = Planner::default().refine(&still(), &cam("orbit_track ver_low-angle"), "higher");
        assert_eq!(r.camera.to_dsl(false), "orbit_track");
        let r = Planner::default().refine(&still(), &cam("free_form t_y_up"), "a bit lower");
        assert_eq!(r.camera.to_dsl(false), "free_form t_y_near_up");
    }

    #[test]
    fn speed_steps() {
        let r = Planner::default().refine(&still(), &cam("free_form t_x_left t_z_near_in"), "faster");
        assert_eq!(r.camera.to_dsl(false), "free_form t_x_far_left t_z_in");
        let r = Planner::default().refine(&still(), &cam("orbit_track deg_90"), "slower");
        assert_eq!(r.camera.to_dsl(false), "orbit_track deg_60");
    }

    #[test]
    fn object_target() {
        let obj = parse_program("free_form t_z_in", Role::Object).unwrap();
        let r = Planner::default().refine(&obj, &cam("orbit_track"), "make the object faster");
        assert_eq!(r.object.to_dsl(false), "free_form t_z_far_in");
        assert_eq!(r.camera, cam("orbit_track"));
    }

    #[test]
    fn unknown_instruction_offline_is_noop() {
        let c = cam("orbit_track");
        let r = Planner::default().refine(&still(), &c, "make it more dramatic");
        assert!(r.noop);
        assert_eq!(r.camera, c);
        let r = Planner::with_remote(OfflineTransport, RemoteBackendConfig::default()).refine(&still(), &c, "make it moody");
        assert!(r.noop && r.diff.is_empty());
        // Counterclockwise on a program without an orbit has nothing to edit.
        assert!(Planner::default().refine(&still(), &cam("free_form"), "counterclockwise").noop);
    }

    #[test]
    fn remote_refine() {
        let t = ScriptedTransport::new(["nonsense", "object: free_form\ncamera: tail_track follow_style_soft"]);
        let r = Planner::with_remote(t, RemoteBackendConfig::default()).refine(&still(), &cam("orbit_track"), "follow instead");
        assert!(!r.noop);
        assert_eq!(r.backend, "remote");
        assert_eq!(r.camera.to_dsl(false), "tail_track follow_style_soft");
        assert_eq!(r.diff.len(), 1);
        assert_eq!(r.diff[0].field, "tag");
    }

    #[test]
    fn edits_stay_local() {
        let c = cam("free_form t_x_left yaw_30 | orbit_track deg_180 dir_cw ver_aerial | tail_track follow_style_soft");
        for instruction in ["counterclockwise", "lower", "zoom in", "faster", "slower", "further"] {
            let r = Planner::default().refine(&still(), &c, instruction);
            for change in &r.diff {
                assert!(
                    ["dir", "t_y", "ver", "t_z", "spiral", "dolly", "push", "t_x", "deg"].contains(&change.field.as_str()),
                    "{instruction}: {change:?}"
                );
                assert_ne!(change.field, "yaw");
            }
        }
    }
}
