//! Motion-program toolkit: a small DSL for camera and object motion, a
//! deterministic trajectory compiler, a motion tagger with evaluation
//! metrics, a synthetic corpus generator, a wireframe renderer and a
//! natural-language planner.

pub mod compiler;
pub mod corpus;
pub mod dsl;
pub mod kinematics;
pub mod llm;
pub mod planner;
pub mod render;
pub mod rng;
pub mod tagger;

pub use compiler::{
    compile_camera, compile_object, compile_scene, segmentize, BoxTrack, CompileConfig, CompileError,
    SceneMotion, Trajectory, FRAME_COUNT,
};
pub use dsl::{
    parse_program, schema, schema_json, serialize_program, ModValue, ModifierKey, MotionProgram,
    MotionTag, ParseError, ParseErrorKind, PrimitiveKind, Role,
};
pub use kinematics::{Pose, Quat, Vec3};
