//! Geometry kernel shared by the compiler, tagger and renderer.
//!
//! Conventions: right-handed world, +y up. A camera looks along its local
//! -z axis with +x to the right. Intrinsic Euler order is yaw (local +y),
//! then pitch (local +x), then roll (local -z).

use nalgebra::{Matrix3, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("normalized time {0} is outside [0, 1]")]
    Domain(f64),
    #[error("look-at is degenerate")]
    DegenerateLookAt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

impl Pose {
    pub fn identity() -> Self {
        Self { position: Vec3::zeros(), orientation: Quat::identity() }
    }

    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self { position, orientation }
    }

    pub fn forward(&self) -> Vec3 {
        self.orientation * Vec3::new(0.0, 0.0, -1.0)
    }

    pub fn up(&self) -> Vec3 {
        self.orientation * Vec3::y()
    }

    pub fn right(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    /// World point expressed in this pose's local frame.
    pub fn to_local(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse() * (world - self.position)
    }

    /// `other` expressed relative to this pose.
    pub fn relative(&self, other: &Pose) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: inv * (other.position - self.position),
            orientation: inv * other.orientation,
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EasingKind {
    #[default]
    Linear,
    In,
    Out,
    InOut,
    OutIn,
}

impl EasingKind {
    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token {
            "linear" => EasingKind::Linear,
            "in" => EasingKind::In,
            "out" => EasingKind::Out,
            "in_out" => EasingKind::InOut,
            "out_in" => EasingKind::OutIn,
            _ => return None,
        })
    }

    fn eval(self, u: f64) -> f64 {
        match self {
            EasingKind::Linear => u,
            EasingKind::In => u * u,
            EasingKind::Out => 1.0 - (1.0 - u) * (1.0 - u),
            EasingKind::InOut => u * u * (3.0 - 2.0 * u),
            EasingKind::OutIn => {
                if u <= 0.5 {
                    0.5 * EasingKind::Out.eval(2.0 * u)
                } else {
                    0.5 + 0.5 * EasingKind::In.eval(2.0 * u - 1.0)
                }
            }
        }
    }
}

/// Easing weight for normalized time `u`. Inputs within 1e-12 of the
/// unit interval are clamped; endpoints are exact.
pub fn ease(kind: EasingKind, u: f64) -> Result<f64, KinematicsError> {
    const TOL: f64 = 1e-12;
    if !(-TOL..=1.0 + TOL).contains(&u) || u.is_nan() {
        return Err(KinematicsError::Domain(u));
    }
    let u = u.clamp(0.0, 1.0);
    if u == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(1.0);
    }
    Ok(kind.eval(u))
}

/// Easing weight at step `k` of `n` (exact rational time).
pub(crate) fn ease_step(kind: EasingKind, k: usize, n: usize) -> f64 {
    ease(kind, k as f64 / n as f64).expect("step within segment")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JitterKind {
    #[default]
    None,
    Low,
    High,
}

impl JitterKind {
    pub fn from_token(token: &str) -> Option<Self> {
        Some(match token {
            "none" => JitterKind::None,
            "low" => JitterKind::Low,
            "high" => JitterKind::High,
            _ => return None,
        })
    }

    /// Per-axis standard deviation of the smoothed offsets, world units.
    pub fn sigma(self) -> f64 {
        match self {
            JitterKind::None => 0.0,
            JitterKind::Low => 0.015,
            JitterKind::High => 0.05,
        }
    }
}

/// Handheld-style offsets: Gaussian per axis, 3-frame moving average,
/// first and last offsets zero. Raw samples are drawn with σ·√3 so the
/// smoothed interior has standard deviation σ.
pub fn jitter_offsets(kind: JitterKind, seed: u64, frame_count: usize) -> Vec<Vec3> {
    let mut out = vec![Vec3::zeros(); frame_count];
    if kind == JitterKind::None || frame_count < 3 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, kind.sigma() * 3f64.sqrt()).expect("finite sigma");
    let raw: Vec<Vec3> = (0..frame_count)
        .map(|_| {
            Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng))
        })
        .collect();
    for i in 1..frame_count - 1 {
        out[i] = (raw[i - 1] + raw[i] + raw[i + 1]) / 3.0;
    }
    out
}

fn basis_quat(right: Vec3, up: Vec3, back: Vec3) -> Quat {
    let m = Matrix3::from_columns(&[right, up, back]);
    Quat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

/// Orientation whose -z axis points from `eye` to `target`, with image up
/// the projection of `up_hint`, then rolled by `roll_deg` about the
/// camera's +z axis (positive tips the image top toward -x).
pub fn look_at(eye: &Vec3, target: &Vec3, up_hint: &Vec3, roll_deg: f64) -> Result<Quat, KinematicsError> {
    let dir = target - eye;
    let dist = dir.norm();
    if dist <= 1e-9 {
        return Err(KinematicsError::DegenerateLookAt);
    }
    let forward = dir / dist;
    let hint_norm = up_hint.norm();
    if hint_norm <= 1e-12 {
        return Err(KinematicsError::DegenerateLookAt);
    }
    let right = forward.cross(&(up_hint / hint_norm));
    let rn = right.norm();
    if rn <= 1e-9 {
        return Err(KinematicsError::DegenerateLookAt);
    }
    let right = right / rn;
    let up = right.cross(&forward);
    let base = basis_quat(right, up, -forward);
    let roll = Quat::from_axis_angle(&Vec3::z_axis(), roll_deg.to_radians());
    Ok(renormalize(base * roll))
}

/// Look-at that falls back to alternative up vectors when the hint is
/// parallel to the view direction: `fallback_up` (typically the previous
/// frame's up), then world -z, then world +x.
pub fn look_at_with_fallback(
    eye: &Vec3,
    target: &Vec3,
    up_hint: &Vec3,
    fallback_up: &Vec3,
    roll_deg: f64,
) -> Result<Quat, KinematicsError> {
    for up in [*up_hint, *fallback_up, Vec3::new(0.0, 0.0, -1.0), Vec3::x()] {
        match look_at(eye, target, &up, roll_deg) {
            Ok(q) => return Ok(q),
            Err(_) if (target - eye).norm() > 1e-9 => continue,
            Err(e) => return Err(e),
        }
    }
    Err(KinematicsError::DegenerateLookAt)
}

pub fn renormalize(q: Quat) -> Quat {
    Quat::new_normalize(q.into_inner())
}

/// Rotation by intrinsic yaw, pitch, roll (degrees).
pub fn euler_rotation(yaw: f64, pitch: f64, roll: f64) -> Quat {
    let y = Quat::from_axis_angle(&Vec3::y_axis(), yaw.to_radians());
    let p = Quat::from_axis_angle(&Vec3::x_axis(), pitch.to_radians());
    let r = Quat::from_axis_angle(&Unit::new_unchecked(Vec3::new(0.0, 0.0, -1.0)), roll.to_radians());
    y * p * r
}

/// Right-multiplies `base` by intrinsic yaw, pitch, roll increments.
pub fn compose_local_rotation(base: &Quat, dyaw: f64, dpitch: f64, droll: f64) -> Quat {
    renormalize(base * euler_rotation(dyaw, dpitch, droll))
}

/// Inverse of [`euler_rotation`]: (yaw, pitch, roll) in degrees with
/// pitch in [-90, 90].
pub fn euler_angles(q: &Quat) -> (f64, f64, f64) {
    let m = q.to_rotation_matrix();
    let m = m.matrix();
    let pitch = (-m[(1, 2)]).clamp(-1.0, 1.0).asin();
    let yaw = m[(0, 2)].atan2(m[(2, 2)]);
    let gamma = m[(1, 0)].atan2(m[(1, 1)]);
    (yaw.to_degrees(), pitch.to_degrees(), (-gamma).to_degrees())
}

/// Heading-pitch orientation used for object boxes: yaw about world +y,
/// then pitch about the local +x axis.
pub fn yaw_pitch_rotation(yaw_deg: f64, pitch_deg: f64) -> Quat {
    euler_rotation(yaw_deg, pitch_deg, 0.0)
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_degrees(a: f64) -> f64 {
    let mut r = a % 360.0;
    if r <= -180.0 {
        r += 360.0;
    } else if r > 180.0 {
        r -= 360.0;
    }
    r
}
