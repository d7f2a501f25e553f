//! Camera rules for the four primitives.
//!
//! Every segment starts from the previous segment's final pose. Tracking
//! rules recompute their relative quantities (orbit radius, tail offset)
//! at segment entry. Jitter is added afterwards in camera-local axes.

use nalgebra::Unit;

use super::{
    easing_of, free_form_steps, jitter_of, segmentize, BoxTrack, CompileError, Trajectory,
};
use crate::dsl::{ModifierKey, MotionProgram, MotionTag, PrimitiveKind, Role};
use crate::kinematics::{
    compose_local_rotation, ease_step, jitter_offsets, look_at_with_fallback, EasingKind, Pose,
    Quat, Vec3,
};
use crate::rng::derive_seed;

/// Radius used when the camera starts on top of the orbit target.
pub const ORBIT_FALLBACK_RADIUS: f64 = 4.0;
/// Elevation offsets for `ver_aerial` / `ver_low-angle`, degrees.
pub const AERIAL_DEG: f64 = 35.0;
pub const LOW_ANGLE_DEG: f64 = -20.0;
/// Per-frame approach rates for soft and lazy follow.
pub const SOFT_ALPHA: f64 = 0.35;
pub const LAZY_ALPHA: f64 = 0.12;
/// Look-point shift for `object_left` / `object_right`.
pub const FRAMING_SHIFT: f64 = 0.5;
const MAX_ELEVATION_DEG: f64 = 85.0;
const LEAD_WINDOW: usize = 3;
const JITTER_STREAM: u64 = 0x6a69_7474;

/// Running state threaded from segment to segment.
#[derive(Debug, Clone, Copy)]
struct Cursor {
    pose: Pose,
    /// Orientation with the current dutch roll removed.
    level: Quat,
    roll: f64,
}

impl Cursor {
    fn level_up(&self) -> Vec3 {
        self.level * Vec3::y()
    }
}

/// A segment's easing evaluated at every step `k = 0..=n`.
struct Ramp {
    w: Vec<f64>,
}

impl Ramp {
    fn new(kind: EasingKind, n: usize) -> Self {
        Self { w: (0..=n).map(|k| ease_step(kind, k, n)).collect() }
    }

    fn steps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.w.iter().copied().enumerate().skip(1)
    }
}

/// Parses `in_0.3` / `out_0.1` / `no` into a signed fraction; `in` is
/// negative (shrinks a distance).
fn dolly_fraction(token: &str) -> f64 {
    if let Some(f) = token.strip_prefix("in_") {
        -f.parse::<f64>().unwrap_or(0.0)
    } else if let Some(f) = token.strip_prefix("out_") {
        f.parse::<f64>().unwrap_or(0.0)
    } else {
        0.0
    }
}

fn elevation_offset(tag: &MotionTag) -> f64 {
    match tag.sym(ModifierKey::Ver) {
        "aerial" => AERIAL_DEG,
        "low-angle" => LOW_ANGLE_DEG,
        _ => 0.0,
    }
}

/// Shift of the look point along camera-right so the object sits on the
/// requested side of the frame.
fn framing_sign(tag: &MotionTag) -> f64 {
    match tag.sym(ModifierKey::Object) {
        "left" => 1.0,
        "right" => -1.0,
        _ => 0.0,
    }
}

/// World-frame camera translation for one `world_move_*` token.
pub fn world_move_vector(token: &str) -> Option<Vec3> {
    let (dir, amount) = token.rsplit_once('_')?;
    let amount: f64 = amount.parse().ok()?;
    let unit = match dir {
        "truck_right" => Vec3::x(),
        "truck_left" => -Vec3::x(),
        "pedestal_up" => Vec3::y(),
        "pedestal_down" => -Vec3::y(),
        "goes_in" => -Vec3::z(),
        "goes_out" => Vec3::z(),
        _ => return None,
    };
    Some(unit * amount)
}

/// Changes the elevation of `v` relative to the plane orthogonal to
/// `axis` by `delta_deg`, clamped to ±85°. Vectors along the axis are
/// returned unchanged.
fn raise(v: Vec3, axis: &Vec3, delta_deg: f64) -> Vec3 {
    if delta_deg == 0.0 {
        return v;
    }
    let along = v.dot(axis);
    let perp = v - axis * along;
    let pn = perp.norm();
    if pn < 1e-9 {
        return v;
    }
    let r = v.norm();
    let elev = along.atan2(pn).to_degrees();
    let target = (elev + delta_deg).clamp(-MAX_ELEVATION_DEG, MAX_ELEVATION_DEG).to_radians();
    (perp / pn * target.cos() + axis * target.sin()) * r
}

/// Part of `delta_deg` that `raise` can apply to `v` before the elevation
/// clamp, so a ramped raise keeps moving until its last frame.
fn reachable(v: Vec3, axis: &Vec3, delta_deg: f64) -> f64 {
    let along = v.dot(axis);
    let pn = (v - axis * along).norm();
    if delta_deg == 0.0 || pn < 1e-9 {
        return 0.0;
    }
    let elev = along.atan2(pn).to_degrees();
    (elev + delta_deg).clamp(-MAX_ELEVATION_DEG, MAX_ELEVATION_DEG) - elev
}

const ARC_SAMPLES: usize = 256;

/// Inverse arc-length table of a path parameterized over [0, 1].
struct ArcWarp {
    cumulative: Vec<f64>,
}

impl ArcWarp {
    fn new(path: &dyn Fn(f64) -> Vec3) -> Self {
        let mut cumulative = Vec::with_capacity(ARC_SAMPLES + 1);
        let mut total = 0.0;
        let mut last = path(0.0);
        cumulative.push(0.0);
        for j in 1..=ARC_SAMPLES {
            let p = path(j as f64 / ARC_SAMPLES as f64);
            total += (p - last).norm();
            cumulative.push(total);
            last = p;
        }
        Self { cumulative }
    }

    /// Parameter at which the path has covered fraction `w` of its length.
    /// Endpoints map to themselves exactly.
    fn param(&self, w: f64) -> f64 {
        let total = *self.cumulative.last().expect("non-empty table");
        if total < 1e-12 || w <= 0.0 || w >= 1.0 {
            return w;
        }
        let s = w * total;
        let j = self.cumulative.partition_point(|&c| c < s).clamp(1, ARC_SAMPLES);
        let (c0, c1) = (self.cumulative[j - 1], self.cumulative[j]);
        let f = if c1 > c0 { (s - c0) / (c1 - c0) } else { 0.0 };
        (j as f64 - 1.0 + f) / ARC_SAMPLES as f64
    }
}

/// Rotates `from` toward `to` by fraction `t` of the angle between them,
/// interpolating the length linearly.
fn turn_toward(from: Vec3, to: Vec3, t: f64) -> Vec3 {
    let (a, b) = (from.norm(), to.norm());
    if a < 1e-12 || b < 1e-12 {
        return from.lerp(&to, t);
    }
    let (ua, ub) = (from / a, to / b);
    let len = a + (b - a) * t;
    let angle = ua.dot(&ub).clamp(-1.0, 1.0).acos();
    if angle < 1e-9 {
        return ua * len;
    }
    let cross = ua.cross(&ub);
    let axis = if cross.norm() > 1e-9 {
        cross
    } else {
        // Antiparallel: swing over the top when possible.
        let side = ua.cross(&Vec3::y());
        if side.norm() > 1e-9 { side } else { ua.cross(&Vec3::x()) }
    };
    Quat::from_axis_angle(&Unit::new_normalize(axis), angle * t) * ua * len
}

fn rolled(level: Quat, roll_deg: f64) -> Quat {
    crate::kinematics::renormalize(level * Quat::from_axis_angle(&Vec3::z_axis(), roll_deg.to_radians()))
}

/// Aims at `target`; returns the rolled and the level orientation. A
/// degenerate aim (eye on the target) keeps the previous orientation.
fn aim(eye: &Vec3, target: &Vec3, prev: &Cursor, roll_deg: f64) -> (Quat, Quat) {
    let level = look_at_with_fallback(eye, target, &prev.level_up(), &Vec3::y(), 0.0)
        .unwrap_or(prev.level);
    (rolled(level, roll_deg), level)
}

/// Orientation whose forward is `dir`, keeping image-up close to `prev`.
fn face(eye: &Vec3, dir: &Vec3, prev: &Cursor, roll_deg: f64) -> (Quat, Quat) {
    aim(eye, &(eye + dir), prev, roll_deg)
}

fn dutch_at(tag: &MotionTag, entry_roll: f64, w: f64) -> f64 {
    let target = f64::from(tag.int(ModifierKey::Dutch));
    entry_roll + (target - entry_roll) * w
}

fn push(out: &mut Vec<Cursor>, position: Vec3, (orientation, level): (Quat, Quat), roll: f64) {
    out.push(Cursor { pose: Pose::new(position, orientation), level, roll });
}

fn free_form(tag: &MotionTag, entry: &Cursor, n: usize) -> Vec<Cursor> {
    let mut q = entry.pose.orientation;
    let mut p = entry.pose.position;
    free_form_steps(tag, n)
        .into_iter()
        .map(|(local, [dy, dp, dr])| {
            q = compose_local_rotation(&q, dy, dp, dr);
            p += q * local;
            Cursor { pose: Pose::new(p, q), level: q, roll: 0.0 }
        })
        .collect()
}

fn orbit(
    tag: &MotionTag,
    entry: &Cursor,
    object: &BoxTrack,
    a: usize,
    n: usize,
) -> Vec<Cursor> {
    let ramp = Ramp::new(easing_of(tag), n);
    let axis = match tag.sym(ModifierKey::PlaneAxis) {
        "x" => Vec3::x(),
        "z" => Vec3::z(),
        _ => Vec3::y(),
    };
    let sense = if tag.sym(ModifierKey::Dir) == "ccw" { 1.0 } else { -1.0 };
    let deg = f64::from(tag.int(ModifierKey::Deg));
    let spiral = dolly_fraction(tag.sym(ModifierKey::Spiral));
    let framing = framing_sign(tag);

    let mut v0 = entry.pose.position - object.centers()[a];
    if v0.norm() < 1e-6 {
        v0 = entry.pose.orientation * Vec3::z() * ORBIT_FALLBACK_RADIUS;
    }
    let ver = reachable(v0, &axis, elevation_offset(tag));
    let axis_unit = Unit::new_unchecked(axis);
    let offset_at = |w: f64| {
        let swept = Quat::from_axis_angle(&axis_unit, (sense * deg * w).to_radians()) * v0;
        raise(swept * (1.0 + spiral * w), &axis, ver * w)
    };
    let warp = (ver != 0.0).then(|| ArcWarp::new(&offset_at));
    let mut out = Vec::with_capacity(n);
    let mut prev = *entry;
    for (k, w) in ramp.steps() {
        let target = object.centers()[a + k];
        let eye = target + offset_at(warp.as_ref().map_or(w, |t| t.param(w)));
        let look = shifted_look(&eye, &target, &prev, framing * FRAMING_SHIFT * w);
        let roll = dutch_at(tag, entry.roll, w);
        push(&mut out, eye, aim(&eye, &look, &prev, roll), roll);
        prev = *out.last().unwrap();
    }
    out
}

/// Look point displaced along the camera-right of a pose aimed at `target`.
fn shifted_look(eye: &Vec3, target: &Vec3, prev: &Cursor, shift: f64) -> Vec3 {
    if shift == 0.0 {
        return *target;
    }
    let right = look_at_with_fallback(eye, target, &prev.level_up(), &Vec3::y(), 0.0)
        .map(|q| q * Vec3::x())
        .unwrap_or_else(|_| prev.level * Vec3::x());
    target + right * shift
}

fn tail(
    tag: &MotionTag,
    entry: &Cursor,
    object: &BoxTrack,
    a: usize,
    n: usize,
) -> Vec<Cursor> {
    let ramp = Ramp::new(easing_of(tag), n);
    let c = object.centers();
    let p_a = entry.pose.position;
    let o = p_a - c[a];

    let lead_target = if tag.sym(ModifierKey::Lead) == "lead" {
        let vel = c[a + LEAD_WINDOW.min(n)] - c[a];
        let vn = vel.norm();
        if vn > 1e-9 && o.dot(&vel) < 0.0 {
            let u = vel / vn;
            Some(o - u * (2.0 * o.dot(&u)))
        } else {
            None
        }
    } else {
        None
    };
    let dolly = dolly_fraction(tag.sym(ModifierKey::Dolly));
    let end = lead_target.unwrap_or(o) * (1.0 + dolly);
    let final_offset = raise(end, &Vec3::y(), reachable(end, &Vec3::y(), elevation_offset(tag)));
    let (amp_axes, amp) = match tag.sym(ModifierKey::Amp) {
        "no" => ([true; 3], 1.0),
        token => {
            let (axis, s) = token.split_once('_').expect("table token");
            let s: f64 = s.parse().expect("table token");
            (axis_mask(axis), s)
        }
    };
    let mirror = match tag.sym(ModifierKey::MirrorAxis) {
        "x" => Some(0),
        "y" => Some(1),
        _ => None,
    };
    let follow = axis_mask(tag.sym(ModifierKey::FollowAxis));
    let alpha = match tag.sym(ModifierKey::FollowStyle) {
        "soft" => Some(SOFT_ALPHA),
        "lazy" => Some(LAZY_ALPHA),
        _ => None,
    };
    let dont_look = tag.sym(ModifierKey::DontLook) == "dont_look";
    let framing = framing_sign(tag);

    let mut out = Vec::with_capacity(n);
    let mut prev = *entry;
    for (k, w) in ramp.steps() {
        // Straight blend unless leading: per-frame steps then stay
        // proportional to the ramp even on axes frozen by follow_axis.
        let offset = match lead_target {
            Some(_) => turn_toward(o, final_offset, w),
            None => o + (final_offset - o) * w,
        };

        let mut d = c[a + k] - c[a];
        for i in 0..3 {
            if amp_axes[i] {
                d[i] *= amp;
            }
        }
        if let Some(i) = mirror {
            d[i] = -d[i];
        }
        let mut desired = c[a] + offset + d;
        for i in 0..3 {
            if !follow[i] {
                desired[i] = p_a[i];
            }
        }
        let eye = match alpha {
            None => desired,
            Some(alpha) => prev.pose.position + (desired - prev.pose.position) * alpha,
        };
        let roll = dutch_at(tag, entry.roll, w);
        let frame = if dont_look {
            (rolled(entry.level, roll), entry.level)
        } else {
            let look = shifted_look(&eye, &c[a + k], &prev, framing * FRAMING_SHIFT * w);
            aim(&eye, &look, &prev, roll)
        };
        push(&mut out, eye, frame, roll);
        prev = *out.last().unwrap();
    }
    out
}

fn axis_mask(axis: &str) -> [bool; 3] {
    match axis {
        "x" => [true, false, false],
        "y" => [false, true, false],
        "z" => [false, false, true],
        _ => [true; 3],
    }
}

fn rotation(
    tag: &MotionTag,
    entry: &Cursor,
    object: &BoxTrack,
    a: usize,
    n: usize,
) -> Vec<Cursor> {
    let kind = easing_of(tag);
    let ramp = Ramp::new(kind, n);
    let c = object.centers();
    let p_a = entry.pose.position;

    let move_1 = world_move_vector(tag.sym(ModifierKey::WorldMove1));
    let move_2 = world_move_vector(tag.sym(ModifierKey::WorldMove2));
    let world_mode = move_1.is_some() || move_2.is_some();
    let push_f = if world_mode { 0.0 } else { dolly_fraction(tag.sym(ModifierKey::Push)) };
    let local_offset = if world_mode {
        Vec3::zeros()
    } else {
        match tag.sym(ModifierKey::LocalOffset).split_once('_') {
            Some(("x", v)) => entry.level * Vec3::x() * v.parse::<f64>().unwrap_or(0.0),
            Some(("y", v)) => entry.level * Vec3::y() * v.parse::<f64>().unwrap_or(0.0),
            _ => Vec3::zeros(),
        }
    };
    let to_object = c[a] - p_a;
    let d0 = to_object.norm();
    let toward = if d0 > 1e-9 { to_object / d0 } else { entry.pose.forward() };
    let ver = reachable(-to_object, &Vec3::y(), elevation_offset(tag));
    let framing = framing_sign(tag);
    let entry_fwd = entry.level * Vec3::new(0.0, 0.0, -1.0);
    let entry_elev = entry_fwd.y.clamp(-1.0, 1.0).asin();
    let entry_az = (-entry_fwd.x).atan2(-entry_fwd.z);
    let rot_axis = tag.sym(ModifierKey::RotAxis);

    let eye_at = |w: f64| {
        let shift = match (move_1, move_2) {
            (None, None) => toward * (-push_f * d0 * w),
            (Some(m), None) | (None, Some(m)) => m * w,
            (Some(m1), Some(m2)) => {
                let (l1, l2) = (m1.norm(), m2.norm());
                let s = w * (l1 + l2);
                m1 * (s / l1).clamp(0.0, 1.0) + m2 * ((s - l1) / l2).clamp(0.0, 1.0)
            }
        };
        c[a] + raise(p_a + shift - c[a], &Vec3::y(), ver * w)
    };
    // Moves are constant-speed already. An elevation change bends the
    // path, so the ramp then drives arc length instead.
    let warp = (ver != 0.0).then(|| ArcWarp::new(&eye_at));

    let mut out = Vec::with_capacity(n);
    let mut prev = *entry;
    for (k, w) in ramp.steps() {
        let eye = eye_at(warp.as_ref().map_or(w, |t| t.param(w)));
        let target = c[a + k];
        let look = shifted_look(&eye, &target, &prev, framing * FRAMING_SHIFT * w) + local_offset * w;
        let roll = dutch_at(tag, entry.roll, w);
        let frame = match rot_axis {
            "pan" | "tilt" => {
                let d = look - eye;
                let horiz = (d.x * d.x + d.z * d.z).sqrt();
                let (elev, az) = if rot_axis == "pan" {
                    (entry_elev, (-d.x).atan2(-d.z))
                } else {
                    (d.y.atan2(horiz), entry_az)
                };
                let dir = Vec3::new(-az.sin() * elev.cos(), elev.sin(), -az.cos() * elev.cos());
                face(&eye, &dir, &prev, roll)
            }
            _ => aim(&eye, &look, &prev, roll),
        };
        push(&mut out, eye, frame, roll);
        prev = *out.last().unwrap();
    }
    out
}

/// Compiles a camera program. Frame 0 is the identity pose at the origin.
pub fn compile_camera(
    p: &MotionProgram,
    object: Option<&BoxTrack>,
    seed: u64,
) -> Result<Trajectory, CompileError> {
    if p.role() != Role::Camera {
        return Err(CompileError::WrongRole { expected: Role::Camera, got: p.role() });
    }
    p.validate()?;
    let bounds = segmentize(p.tags().len());
    let mut cursors = vec![Cursor { pose: Pose::identity(), level: Quat::identity(), roll: 0.0 }];
    let mut poses = vec![Pose::identity()];
    for (i, (tag, seg)) in p.tags().iter().zip(bounds.windows(2)).enumerate() {
        let (a, b) = (seg[0], seg[1]);
        let n = b - a;
        let entry = *cursors.last().unwrap();
        let primitive = tag.primitive();
        let needs = || object.ok_or(CompileError::MissingTarget(primitive));
        let segment = match primitive {
            PrimitiveKind::FreeForm => free_form(tag, &entry, n),
            PrimitiveKind::OrbitTrack => orbit(tag, &entry, needs()?, a, n),
            PrimitiveKind::TailTrack => tail(tag, &entry, needs()?, a, n),
            PrimitiveKind::RotationTrack => rotation(tag, &entry, needs()?, a, n),
        };
        let jitter = jitter_offsets(jitter_of(tag), derive_seed(seed, &[JITTER_STREAM, i as u64]), n + 1);
        for (k, cur) in segment.iter().enumerate() {
            let mut pose = cur.pose;
            pose.position += pose.orientation * jitter[k + 1];
            poses.push(pose);
        }
        cursors.extend(segment);
    }
    Trajectory::new(poses, bounds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile_object, compile_scene, CompileConfig};
    use crate::dsl::parse_program;
    use approx::assert_relative_eq;

    fn cam(text: &str) -> MotionProgram {
        parse_program(text, Role::Camera).unwrap()
    }

    fn still_object() -> BoxTrack {
        BoxTrack::stationary(Vec3::new(0.0, 0.0, -5.0), Vec3::repeat(0.5)).unwrap()
    }

    fn moving_object(text: &str) -> BoxTrack {
        let p = parse_program(text, Role::Object).unwrap();
        compile_object(&p, Vec3::new(0.0, 0.0, -5.0), Vec3::repeat(0.5), 0).unwrap()
    }

    #[test]
    fn static_camera() {
        let t = compile_camera(&cam("free_form"), None, 1).unwrap();
        assert!(t.poses().iter().all(|p| *p == Pose::identity()));
    }

    #[test]
    fn free_form_translation_is_local() {
        let t = compile_camera(&cam("free_form t_x_right t_z_far_in"), None, 0).unwrap();
        assert_relative_eq!(t.poses()[20].position, Vec3::new(1.0, 0.0, -2.0), epsilon = 1e-12);
    }

    #[test]
    fn orbit_closes_with_constant_radius() {
        let obj = still_object();
        let t = compile_camera(&cam("orbit_track deg_360"), Some(&obj), 0).unwrap();
        assert!((t.poses()[20].position - t.poses()[0].position).norm() < 1e-6);
        for pose in t.poses() {
            let r = (pose.position - obj.centers()[0]).norm();
            assert!((r - 5.0).abs() < 1e-6, "radius {r}");
            let to = (obj.centers()[0] - pose.position).normalize();
            assert!(pose.forward().dot(&to) > 1.0 - 1e-9);
        }
    }

    #[test]
    fn orbit_direction_sign() {
        let obj = still_object();
        let cw = compile_camera(&cam("orbit_track deg_90"), Some(&obj), 0).unwrap();
        // Seen from above, clockwise about the target moves the camera to -x.
        assert_relative_eq!(cw.poses()[20].position, Vec3::new(-5.0, 0.0, -5.0), epsilon = 1e-9);
        let ccw = compile_camera(&cam("orbit_track deg_90 dir_ccw"), Some(&obj), 0).unwrap();
        assert_relative_eq!(ccw.poses()[20].position, Vec3::new(5.0, 0.0, -5.0), epsilon = 1e-9);
    }

    #[test]
    fn orbit_fallback_radius() {
        let obj = BoxTrack::stationary(Vec3::zeros(), Vec3::repeat(0.5)).unwrap();
        let t = compile_camera(&cam("orbit_track deg_90"), Some(&obj), 0).unwrap();
        assert_relative_eq!(t.poses()[20].position.norm(), ORBIT_FALLBACK_RADIUS, epsilon = 1e-9);
    }

    #[test]
    fn tail_hard_follow_keeps_offset() {
        let obj = moving_object("free_form t_x_right yaw_30");
        let t = compile_camera(&cam("tail_track"), Some(&obj), 0).unwrap();
        let o = t.poses()[0].position - obj.centers()[0];
        for (pose, c) in t.poses().iter().zip(obj.centers()) {
            assert_relative_eq!(pose.position - c, o, epsilon = 1e-9);
        }
    }

    #[test]
    fn tail_scene_example() {
        let o = parse_program("free_form t_x_right", Role::Object).unwrap();
        let s = compile_scene(&o, &cam("tail_track"), &CompileConfig::default(), 3).unwrap();
        let dx = s.camera.poses()[20].position.x - s.camera.poses()[0].position.x;
        assert_relative_eq!(dx, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lazy_follow_lags() {
        let obj = moving_object("free_form t_x_far_right");
        let hard = compile_camera(&cam("tail_track"), Some(&obj), 0).unwrap();
        let lazy = compile_camera(&cam("tail_track follow_style_lazy"), Some(&obj), 0).unwrap();
        let soft = compile_camera(&cam("tail_track follow_style_soft"), Some(&obj), 0).unwrap();
        let x = |t: &Trajectory| t.poses()[20].position.x;
        assert!(x(&lazy) < x(&soft) && x(&soft) < x(&hard));
    }

    #[test]
    fn tail_follow_axis_freezes_other_axes() {
        let obj = moving_object("free_form t_x_right t_y_up");
        let t = compile_camera(&cam("tail_track follow_axis_y"), Some(&obj), 0).unwrap();
        let end = t.poses()[20].position;
        assert_relative_eq!(end.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(end.y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tail_mirror_and_amp() {
        let obj = moving_object("free_form t_x_right");
        let m = compile_camera(&cam("tail_track mirror_axis_x"), Some(&obj), 0).unwrap();
        assert_relative_eq!(m.poses()[20].position.x, -1.0, epsilon = 1e-12);
        let a = compile_camera(&cam("tail_track amp_x_1.5"), Some(&obj), 0).unwrap();
        assert_relative_eq!(a.poses()[20].position.x, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn tail_lead_moves_camera_in_front() {
        // Object walks toward the camera (+z): camera starts in front already.
        let obj = moving_object("free_form t_z_far_in");
        let t = compile_camera(&cam("tail_track lead"), Some(&obj), 0).unwrap();
        let vel = obj.centers()[3] - obj.centers()[0];
        let end_offset = t.poses()[20].position - obj.centers()[20];
        assert!(end_offset.dot(&vel) > 0.0, "{end_offset:?}");
        assert_relative_eq!(end_offset.norm(), 5.0, epsilon = 1e-9);
    }

    #[test]
    fn tail_dont_look_holds_orientation() {
        let obj = moving_object("free_form t_x_right");
        let t = compile_camera(&cam("tail_track dont_look"), Some(&obj), 0).unwrap();
        assert!(t.poses().iter().all(|p| p.orientation.angle_to(&Quat::identity()) < 1e-12));
    }

    #[test]
    fn rotation_track_frames_object() {
        let obj = moving_object("free_form t_x_far_right t_y_up");
        let t = compile_camera(&cam("rotation_track"), Some(&obj), 0).unwrap();
        for (pose, c) in t.poses().iter().zip(obj.centers()) {
            assert_eq!(pose.position, Vec3::zeros());
            let to = (c - pose.position).normalize();
            assert!(pose.forward().angle(&to) < 1e-6);
        }
    }

    #[test]
    fn rotation_track_pan_keeps_elevation() {
        let obj = moving_object("free_form t_x_right t_y_up");
        let t = compile_camera(&cam("rotation_track rot_axis_pan"), Some(&obj), 0).unwrap();
        assert!(t.poses().iter().all(|p| p.forward().y.abs() < 1e-9));
        assert!(t.poses()[20].forward().x > 0.1);
    }

    #[test]
    fn rotation_track_push_and_world_moves() {
        let obj = still_object();
        let t = compile_camera(&cam("rotation_track push_in_0.5"), Some(&obj), 0).unwrap();
        assert_relative_eq!(t.poses()[20].position, Vec3::new(0.0, 0.0, -2.5), epsilon = 1e-12);
        let t = compile_camera(
            &cam("rotation_track world_move_1_truck_right_1.0 world_move_2_pedestal_up_0.5 push_in_0.5"),
            Some(&obj),
            0,
        )
        .unwrap();
        // Legs share the ramp by length: the first covers 2/3 of it.
        assert_relative_eq!(t.poses()[10].position, Vec3::new(0.75, 0.0, 0.0), epsilon = 1e-12);
        assert_relative_eq!(t.poses()[20].position, Vec3::new(1.0, 0.5, 0.0), epsilon = 1e-12);
        let to = (obj.centers()[20] - t.poses()[20].position).normalize();
        assert!(t.poses()[20].forward().angle(&to) < 1e-6);
    }

    #[test]
    fn dutch_ramps_to_value() {
        let obj = still_object();
        let t = compile_camera(&cam("rotation_track dutch_30"), Some(&obj), 0).unwrap();
        let up = t.poses()[20].up();
        assert_relative_eq!(up.y, 30f64.to_radians().cos(), epsilon = 1e-9);
        assert!(up.x < 0.0);
    }

    #[test]
    fn ver_aerial_raises_camera() {
        let obj = still_object();
        let t = compile_camera(&cam("orbit_track deg_30 ver_aerial"), Some(&obj), 0).unwrap();
        let v = t.poses()[20].position - obj.centers()[0];
        assert_relative_eq!(v.y.atan2((v.x * v.x + v.z * v.z).sqrt()).to_degrees(), 35.0, epsilon = 1e-9);
    }

    #[test]
    fn tracking_needs_object() {
        assert_eq!(
            compile_camera(&cam("orbit_track"), None, 0),
            Err(CompileError::MissingTarget(PrimitiveKind::OrbitTrack))
        );
    }

    #[test]
    fn jitter_perturbs_interior_only() {
        let clean = compile_camera(&cam("free_form t_x_right"), None, 5).unwrap();
        let noisy = compile_camera(&cam("free_form t_x_right jitter_high"), None, 5).unwrap();
        assert_eq!(clean.poses()[0], noisy.poses()[0]);
        assert_relative_eq!(clean.poses()[20].position, noisy.poses()[20].position, epsilon = 1e-15);
        assert!((clean.poses()[10].position - noisy.poses()[10].position).norm() > 1e-6);
        let again = compile_camera(&cam("free_form t_x_right jitter_high"), None, 5).unwrap();
        assert_eq!(noisy, again);
    }

    #[test]
    fn segments_chain_continuously() {
        let obj = still_object();
        let t = compile_camera(
            &cam("free_form t_x_right | orbit_track deg_90 | rotation_track push_in_0.3"),
            Some(&obj),
            0,
        )
        .unwrap();
        assert_eq!(t.segment_bounds(), [0, 7, 14, 20]);
        let steps: Vec<f64> = t.poses().windows(2).map(|w| (w[1].position - w[0].position).norm()).collect();
        for seg in t.segment_bounds().windows(2) {
            let mut s = steps[seg[0]..seg[1]].to_vec();
            s.sort_by(f64::total_cmp);
            assert!(s[s.len() - 1] <= 3.0 * s[s.len() / 2] + 1e-12, "{s:?}");
        }
    }

    #[test]
    fn world_move_tokens() {
        assert_eq!(world_move_vector("goes_in_2.0"), Some(Vec3::new(0.0, 0.0, -2.0)));
        assert_eq!(world_move_vector("truck_left_0.5"), Some(Vec3::new(-0.5, 0.0, 0.0)));
        assert_eq!(world_move_vector("none"), None);
    }
}
