//! Deterministic conversion of motion programs into 21-frame trajectories.
//!
//! The object track is compiled first. The camera is then compiled
//! against it, starting from the identity pose at the world origin, so the
//! world frame is the camera's first frame.

mod camera;
mod json;

use serde::{Deserialize, Serialize};

use crate::dsl::{ModifierKey, MotionProgram, MotionTag, Role};
use crate::kinematics::{ease_step, yaw_pitch_rotation, EasingKind, JitterKind, Pose, Vec3};

pub use camera::compile_camera;
pub use json::{BoxFrameJson, BoxTrackJson, FrameJson, SceneJson, TrajectoryJson};

/// Frames per compiled trajectory.
pub const FRAME_COUNT: usize = 21;
/// Inter-frame intervals.
pub const INTERVALS: usize = FRAME_COUNT - 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("expected a {expected} program, got {got}")]
    WrongRole { expected: Role, got: Role },
    #[error("program rejected: {0}")]
    Invalid(#[from] crate::dsl::ParseError),
    #[error("tracking primitive `{0}` needs an object track")]
    MissingTarget(crate::dsl::PrimitiveKind),
    #[error("object extents must be strictly positive")]
    NonPositiveExtents,
    #[error("trajectory must have {FRAME_COUNT} frames, got {0}")]
    FrameCount(usize),
    #[error("invalid segment bounds {0:?}")]
    SegmentBounds(Vec<usize>),
    #[error("orientation is not a unit quaternion")]
    NotUnit,
}

/// Frame boundaries for `tag_count` segments. The 20 intervals are split
/// as evenly as possible with the remainder going to earlier segments;
/// adjacent segments share their boundary frame.
pub fn segmentize(tag_count: usize) -> Vec<usize> {
    let n = tag_count.clamp(1, crate::dsl::MAX_TAGS);
    let base = INTERVALS / n;
    let extra = INTERVALS % n;
    let mut bounds = vec![0];
    let mut at = 0;
    for i in 0..n {
        at += base + usize::from(i < extra);
        bounds.push(at);
    }
    bounds
}

fn check_bounds(bounds: &[usize]) -> Result<(), CompileError> {
    let ok = bounds.len() >= 2
        && bounds[0] == 0
        && *bounds.last().unwrap() == INTERVALS
        && bounds.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(CompileError::SegmentBounds(bounds.to_vec()))
    }
}

/// A camera path: one pose per frame plus the segment partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    poses: Vec<Pose>,
    segment_bounds: Vec<usize>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>, segment_bounds: Vec<usize>) -> Result<Self, CompileError> {
        if poses.len() != FRAME_COUNT {
            return Err(CompileError::FrameCount(poses.len()));
        }
        check_bounds(&segment_bounds)?;
        Ok(Self { poses, segment_bounds })
    }

    pub fn static_identity() -> Self {
        Self { poses: vec![Pose::identity(); FRAME_COUNT], segment_bounds: segmentize(1) }
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn segment_bounds(&self) -> &[usize] {
        &self.segment_bounds
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.poses.iter().map(|p| p.position)
    }

    pub fn path_length(&self) -> f64 {
        self.poses.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum()
    }

    /// Re-expresses every pose relative to frame 0.
    pub fn anchored(&self) -> Self {
        let first = self.poses[0];
        Self {
            poses: self.poses.iter().map(|p| first.relative(p)).collect(),
            segment_bounds: self.segment_bounds.clone(),
        }
    }

    pub fn with_segment_bounds(mut self, bounds: Vec<usize>) -> Result<Self, CompileError> {
        check_bounds(&bounds)?;
        self.segment_bounds = bounds;
        Ok(self)
    }
}

/// Per-frame oriented box of the subject.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxTrack {
    centers: Vec<Vec3>,
    /// Half-sizes along the box's local axes.
    extents: Vec3,
    /// Cumulative (yaw, pitch) in degrees per frame.
    yaw_pitch: Vec<[f64; 2]>,
    segment_bounds: Vec<usize>,
}

impl BoxTrack {
    pub fn new(
        centers: Vec<Vec3>,
        extents: Vec3,
        yaw_pitch: Vec<[f64; 2]>,
        segment_bounds: Vec<usize>,
    ) -> Result<Self, CompileError> {
        if centers.len() != FRAME_COUNT || yaw_pitch.len() != FRAME_COUNT {
            return Err(CompileError::FrameCount(centers.len().min(yaw_pitch.len())));
        }
        if extents.iter().any(|e| e.is_nan() || *e <= 0.0) {
            return Err(CompileError::NonPositiveExtents);
        }
        check_bounds(&segment_bounds)?;
        Ok(Self { centers, extents, yaw_pitch, segment_bounds })
    }

    pub fn stationary(center: Vec3, extents: Vec3) -> Result<Self, CompileError> {
        Self::new(vec![center; FRAME_COUNT], extents, vec![[0.0, 0.0]; FRAME_COUNT], segmentize(1))
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn extents(&self) -> Vec3 {
        self.extents
    }

    pub fn yaw_pitch(&self) -> &[[f64; 2]] {
        &self.yaw_pitch
    }

    pub fn segment_bounds(&self) -> &[usize] {
        &self.segment_bounds
    }

    /// Box pose at `frame` (heading-pitch orientation).
    pub fn pose(&self, frame: usize) -> Pose {
        let [yaw, pitch] = self.yaw_pitch[frame];
        Pose::new(self.centers[frame], yaw_pitch_rotation(yaw, pitch))
    }

    pub fn path_length(&self) -> f64 {
        self.centers.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Object box track and camera trajectory sharing one world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneMotion {
    pub object: BoxTrack,
    pub camera: Trajectory,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileConfig {
    pub object_start: [f64; 3],
    pub object_extents: [f64; 3],
}

impl Default for CompileConfig {
    fn default() -> Self {
        Self { object_start: [0.0, 0.0, -5.0], object_extents: [0.5, 0.5, 0.5] }
    }
}

/// Net translation of one free_form level token, world units.
pub fn level_magnitude(token: &str) -> f64 {
    let sign = if token.ends_with("left") || token.ends_with("down") || token.ends_with("in") {
        -1.0
    } else {
        1.0
    };
    let scale = if token == "no" {
        0.0
    } else if token.starts_with("far_") {
        2.0
    } else if token.starts_with("near_") {
        0.5
    } else {
        1.0
    };
    sign * scale
}

/// Local-frame translation of a free_form tag. `t_z` "in" is forward,
/// i.e. along local -z.
pub(crate) fn free_form_translation(tag: &MotionTag) -> Vec3 {
    let x = level_magnitude(tag.sym(ModifierKey::TX));
    let y = level_magnitude(tag.sym(ModifierKey::TY));
    let z = level_magnitude(tag.sym(ModifierKey::TZ));
    Vec3::new(x, y, z)
}

pub(crate) fn easing_of(tag: &MotionTag) -> EasingKind {
    EasingKind::from_token(tag.sym(ModifierKey::Ease)).unwrap_or_default()
}

pub(crate) fn jitter_of(tag: &MotionTag) -> JitterKind {
    tag.get(ModifierKey::Jitter)
        .and_then(|v| v.as_sym())
        .and_then(JitterKind::from_token)
        .unwrap_or_default()
}

/// Per-step increments of a free_form tag over `n` steps: the local
/// translation and the (yaw, pitch, roll) rotation, each scaled by the
/// step's easing-weight difference.
pub(crate) fn free_form_steps(tag: &MotionTag, n: usize) -> Vec<(Vec3, [f64; 3])> {
    let kind = easing_of(tag);
    let translation = free_form_translation(tag);
    let angles = [
        f64::from(tag.int(ModifierKey::Yaw)),
        f64::from(tag.int(ModifierKey::Pitch)),
        f64::from(tag.int(ModifierKey::Roll)),
    ];
    (1..=n)
        .map(|k| {
            let dw = ease_step(kind, k, n) - ease_step(kind, k - 1, n);
            (translation * dw, angles.map(|a| a * dw))
        })
        .collect()
}

fn expect_role(p: &MotionProgram, role: Role) -> Result<(), CompileError> {
    if p.role() != role {
        return Err(CompileError::WrongRole { expected: role, got: p.role() });
    }
    Ok(())
}

/// Compiles an object program. Each step first advances the heading and
/// pitch, then translates along the box's updated local axes, so turning
/// while moving curves the path.
pub fn compile_object(
    p: &MotionProgram,
    start_center: Vec3,
    extents: Vec3,
    _seed: u64,
) -> Result<BoxTrack, CompileError> {
    expect_role(p, Role::Object)?;
    p.validate()?;
    let bounds = segmentize(p.tags().len());
    let mut centers = vec![start_center];
    let mut yaw_pitch = vec![[0.0, 0.0]];
    for (tag, seg) in p.tags().iter().zip(bounds.windows(2)) {
        for (local, [dyaw, dpitch, _]) in free_form_steps(tag, seg[1] - seg[0]) {
            let [yaw, pitch] = *yaw_pitch.last().unwrap();
            let next = [yaw + dyaw, pitch + dpitch];
            let c = *centers.last().unwrap() + yaw_pitch_rotation(next[0], next[1]) * local;
            yaw_pitch.push(next);
            centers.push(c);
        }
    }
    BoxTrack::new(centers, extents, yaw_pitch, bounds)
}

/// Compiles the object first, then the camera conditioned on it.
pub fn compile_scene(
    object_program: &MotionProgram,
    camera_program: &MotionProgram,
    config: &CompileConfig,
    seed: u64,
) -> Result<SceneMotion, CompileError> {
    let object = compile_object(
        object_program,
        Vec3::from(config.object_start),
        Vec3::from(config.object_extents),
        seed,
    )?;
    let camera = compile_camera(camera_program, Some(&object), seed)?;
    Ok(SceneMotion { object, camera, seed })
}
