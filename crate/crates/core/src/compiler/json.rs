//! Wire forms of compiled tracks. Floats print as shortest round-trip
//! decimals; quaternions are `[w, x, y, z]`.

use serde::{Deserialize, Serialize};

use super::{BoxTrack, CompileError, SceneMotion, Trajectory};
use crate::kinematics::{Pose, Quat, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameJson {
    pub p: [f64; 3],
    pub q: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryJson {
    pub frames: Vec<FrameJson>,
    pub segments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxFrameJson {
    pub c: [f64; 3],
    pub yp: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxTrackJson {
    pub e: [f64; 3],
    pub frames: Vec<BoxFrameJson>,
    pub segments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneJson {
    pub object: BoxTrackJson,
    pub camera: TrajectoryJson,
    pub seed: u64,
}

fn quat_array(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

impl From<&Trajectory> for TrajectoryJson {
    fn from(t: &Trajectory) -> Self {
        Self {
            frames: t
                .poses()
                .iter()
                .map(|p| FrameJson { p: p.position.into(), q: quat_array(&p.orientation) })
                .collect(),
            segments: t.segment_bounds().to_vec(),
        }
    }
}

impl TryFrom<TrajectoryJson> for Trajectory {
    type Error = CompileError;

    fn try_from(j: TrajectoryJson) -> Result<Self, CompileError> {
        let poses = j
            .frames
            .iter()
            .map(|f| {
                let [w, x, y, z] = f.q;
                let raw = nalgebra::Quaternion::new(w, x, y, z);
                if (raw.norm() - 1.0).abs() > 1e-6 {
                    return Err(CompileError::NotUnit);
                }
                // Written quaternions are already unit; keep their bits.
                let q = if (raw.norm() - 1.0).abs() < 1e-12 {
                    Quat::new_unchecked(raw)
                } else {
                    Quat::new_normalize(raw)
                };
                Ok(Pose::new(Vec3::from(f.p), q))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Trajectory::new(poses, j.segments)
    }
}

impl From<&BoxTrack> for BoxTrackJson {
    fn from(b: &BoxTrack) -> Self {
        Self {
            e: b.extents().into(),
            frames: b
                .centers()
                .iter()
                .zip(b.yaw_pitch())
                .map(|(c, yp)| BoxFrameJson { c: (*c).into(), yp: *yp })
                .collect(),
            segments: b.segment_bounds().to_vec(),
        }
    }
}

impl TryFrom<BoxTrackJson> for BoxTrack {
    type Error = CompileError;

    fn try_from(j: BoxTrackJson) -> Result<Self, CompileError> {
        BoxTrack::new(
            j.frames.iter().map(|f| Vec3::from(f.c)).collect(),
            Vec3::from(j.e),
            j.frames.iter().map(|f| f.yp).collect(),
            j.segments,
        )
    }
}

impl From<&SceneMotion> for SceneJson {
    fn from(s: &SceneMotion) -> Self {
        Self { object: (&s.object).into(), camera: (&s.camera).into(), seed: s.seed }
    }
}

impl TryFrom<SceneJson> for SceneMotion {
    type Error = CompileError;

    fn try_from(j: SceneJson) -> Result<Self, CompileError> {
        Ok(Self { object: j.object.try_into()?, camera: j.camera.try_into()?, seed: j.seed })
    }
}

macro_rules! serde_via {
    ($ty:ty, $wire:ty) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                <$wire>::from(self).serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                <$wire>::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via!(Trajectory, TrajectoryJson);
serde_via!(BoxTrack, BoxTrackJson);
serde_via!(SceneMotion, SceneJson);
