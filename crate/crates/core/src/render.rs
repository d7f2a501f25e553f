//! Wireframe control frames: the object box and a fixed world cube seen
//! from each camera pose.
//!
//! Projection is a plain pinhole with square pixels. With vertical field
//! of view `fov` and image size `w x h`, the focal length in pixels is
//! `f = (h / 2) / tan(fov / 2)`, and a camera-frame point `(x, y, z)` with
//! `z < -near_clip` maps to
//!
//! ```text
//! u = w / 2 + f * x / -z
//! v = h / 2 - f * y / -z
//! ```
//!
//! so `v` grows downward. Rasterization rounds endpoints to the nearest
//! pixel and walks integer Bresenham lines, plotting only in-bounds
//! pixels. Everything is integer or IEEE-exact, so output bytes are
//! stable across platforms.
//!
//! Bundle files:
//!
//! - `frame_NNN.ppm` / `frame_NNN.png`: one RGB image per frame.
//! - `camera.json`: `{"intrinsics": {...}, "trajectory": {"frames": [{"p": [x,y,z], "q": [w,x,y,z]}], "segments": [..]}}`.
//! - `boxes.json`: `{"extents": [x,y,z], "segments": [..], "frames": [{"c": [x,y,z], "yp": [yaw,pitch], "corners": [[x,y,z]; 8]}]}`.

use std::io::{Cursor, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compiler::{BoxTrack, SceneMotion, Trajectory, FRAME_COUNT};
use crate::kinematics::{Pose, Vec3};

pub const CUBE_HALF_SIZE: f64 = 10.0;
pub const CUBE_COLOR: [u8; 3] = [128, 128, 128];
pub const BBOX_COLOR: [u8; 3] = [0, 255, 0];

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("frame {0} is out of range")]
    FrameOutOfRange(usize),
    #[error("invalid intrinsics: {0}")]
    Intrinsics(String),
    #[error("frame {frame}: {source}")]
    Io { frame: usize, source: std::io::Error },
    #[error("{file}: {source}")]
    File { file: String, source: std::io::Error },
    #[error("frame {frame}: png encoding failed: {message}")]
    Encode { frame: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraIntrinsics {
    /// Vertical field of view in degrees.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
    pub near_clip: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self { vertical_fov: 60.0, width: 640, height: 360, near_clip: 0.05 }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::Intrinsics(m.into()));
        if !(self.vertical_fov > 0.0 && self.vertical_fov < 180.0) {
            return bad("vertical_fov must lie in (0, 180)");
        }
        if self.width < 16 || self.height < 16 {
            return bad("width and height must be at least 16");
        }
        if !(self.near_clip > 0.0 && self.near_clip.is_finite()) {
            return bad("near_clip must be positive");
        }
        Ok(())
    }

    pub fn focal(&self) -> f64 {
        (f64::from(self.height) / 2.0) / (self.vertical_fov.to_radians() / 2.0).tan()
    }

    fn center(&self) -> (f64, f64) {
        (f64::from(self.width) / 2.0, f64::from(self.height) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Pixel([f64; 2]),
    Behind,
}

fn project_local(local: &Vec3, k: &CameraIntrinsics) -> [f64; 2] {
    let (cx, cy) = k.center();
    let f = k.focal();
    let depth = -local.z;
    [cx + f * local.x / depth, cy - f * local.y / depth]
}

pub fn project_point(p: &Vec3, cam: &Pose, k: &CameraIntrinsics) -> Projection {
    let local = cam.to_local(p);
    if local.z >= -k.near_clip {
        Projection::Behind
    } else {
        Projection::Pixel(project_local(&local, k))
    }
}

/// World point on the ray through `pixel` at camera-frame depth `depth`
/// (distance along the viewing axis).
pub fn unproject(pixel: [f64; 2], depth: f64, cam: &Pose, k: &CameraIntrinsics) -> Vec3 {
    let (cx, cy) = k.center();
    let f = k.focal();
    let local = Vec3::new((pixel[0] - cx) * depth / f, (cy - pixel[1]) * depth / f, -depth);
    cam.position + cam.orientation * local
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolylineLabel {
    Bbox,
    Cube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub label: PolylineLabel,
    pub points: Vec<[f64; 2]>,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFrame {
    pub width: u32,
    pub height: u32,
    pub polylines: Vec<Polyline>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub bbox: bool,
    pub cube: bool,
    pub cube_half_size: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self { bbox: true, cube: true, cube_half_size: CUBE_HALF_SIZE }
    }
}

/// Corner `i` has bit 0 -> +x, bit 1 -> +y, bit 2 -> +z.
const EDGES: [(usize, usize); 12] = [
    (0, 1), (2, 3), (4, 5), (6, 7),
    (0, 2), (1, 3), (4, 6), (5, 7),
    (0, 4), (1, 5), (2, 6), (3, 7),
];

fn unit_corner(i: usize) -> Vec3 {
    let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
    Vec3::new(s(1), s(2), s(4))
}

/// World corners of the object box at `frame`.
pub fn box_corners(track: &BoxTrack, frame: usize) -> [Vec3; 8] {
    let pose = track.pose(frame);
    let e = track.extents();
    std::array::from_fn(|i| pose.position + pose.orientation * unit_corner(i).component_mul(&e))
}

pub fn cube_corners(half_size: f64) -> [Vec3; 8] {
    std::array::from_fn(|i| unit_corner(i) * half_size)
}

/// Clips a camera-frame segment to `z <= -near`.
fn clip_near(a: Vec3, b: Vec3, near: f64) -> Option<(Vec3, Vec3)> {
    let plane = -near;
    let (ina, inb) = (a.z < plane, b.z < plane);
    match (ina, inb) {
        (true, true) => Some((a, b)),
        (false, false) => None,
        _ => {
            let t = (plane - a.z) / (b.z - a.z);
            let mut hit = a + (b - a) * t;
            hit.z = plane;
            Some(if ina { (a, hit) } else { (hit, b) })
        }
    }
}

/// Liang-Barsky clip of a 2D segment to an axis-aligned box.
fn clip_rect(a: [f64; 2], b: [f64; 2], min: [f64; 2], max: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for axis in 0..2 {
        for (p, q) in [(-d[axis], a[axis] - min[axis]), (d[axis], max[axis] - a[axis])] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let at = |t: f64| [a[0] + d[0] * t, a[1] + d[1] * t];
    Some((if t0 > 0.0 { at(t0) } else { a }, if t1 < 1.0 { at(t1) } else { b }))
}

fn edge_polylines(
    corners: &[Vec3; 8],
    cam: &Pose,
    k: &CameraIntrinsics,
    label: PolylineLabel,
    color: [u8; 3],
    out: &mut Vec<Polyline>,
) {
    let local = corners.map(|c| cam.to_local(&c));
    let (w, h) = (f64::from(k.width), f64::from(k.height));
    for (i, j) in EDGES {
        let Some((a, b)) = clip_near(local[i], local[j], k.near_clip) else { continue };
        let Some((pa, pb)) = clip_rect(project_local(&a, k), project_local(&b, k), [-4.0 * w, -4.0 * h], [4.0 * w, 4.0 * h])
        else {
            continue;
        };
        out.push(Polyline { label, points: vec![pa, pb], color });
    }
}

pub fn render_frame(
    scene: &SceneMotion,
    frame: usize,
    k: &CameraIntrinsics,
    style: &RenderStyle,
) -> Result<ControlFrame, RenderError> {
    if frame >= FRAME_COUNT {
        return Err(RenderError::FrameOutOfRange(frame));
    }
    k.validate()?;
    let cam = scene.camera.poses()[frame];
    let mut polylines = Vec::new();
    if style.cube {
        edge_polylines(&cube_corners(style.cube_half_size), &cam, k, PolylineLabel::Cube, CUBE_COLOR, &mut polylines);
    }
    if style.bbox {
        edge_polylines(&box_corners(&scene.object, frame), &cam, k, PolylineLabel::Bbox, BBOX_COLOR, &mut polylines);
    }
    Ok(ControlFrame { width: k.width, height: k.height, polylines })
}

pub fn render_scene(scene: &SceneMotion, k: &CameraIntrinsics, style: &RenderStyle) -> Result<Vec<ControlFrame>, RenderError> {
    (0..FRAME_COUNT).map(|i| render_frame(scene, i, k, style)).collect()
}

/// 8-bit RGB image, row-major, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Raster {
    pub fn black(width: u32, height: u32) -> Self {
        Self { width, height, pixels: vec![0; width as usize * height as usize * 3] }
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    fn plot(&mut self, x: i64, y: i64, color: [u8; 3]) {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            return;
        }
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&color);
    }

    /// Integer Bresenham between rounded endpoints, inclusive.
    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], color: [u8; 3]) {
        let (mut x0, mut y0) = (a[0].round() as i64, a[1].round() as i64);
        let (x1, y1) = (b[0].round() as i64, b[1].round() as i64);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.plot(x0, y0, color);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }

    pub fn lit_pixels(&self) -> usize {
        self.pixels.chunks_exact(3).filter(|p| p.iter().any(|c| *c != 0)).count()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn to_png(&self) -> Result<Vec<u8>, image::ImageError> {
        let img = image::RgbImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }
}

/// Draws cube edges first so box edges win where they overlap.
pub fn rasterize(frame: &ControlFrame) -> Raster {
    let mut r = Raster::black(frame.width, frame.height);
    for label in [PolylineLabel::Cube, PolylineLabel::Bbox] {
        for poly in frame.polylines.iter().filter(|p| p.label == label) {
            for seg in poly.points.windows(2) {
                r.line(seg[0], seg[1], poly.color);
            }
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameFormat {
    #[default]
    Ppm,
    Png,
}

impl FrameFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FrameFormat::Ppm => "ppm",
            FrameFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraFile {
    pub intrinsics: CameraIntrinsics,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxFrame {
    pub c: [f64; 3],
    pub yp: [f64; 2],
    pub corners: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxesFile {
    pub extents: [f64; 3],
    pub segments: Vec<usize>,
    pub frames: Vec<BoxFrame>,
}

impl BoxesFile {
    pub fn new(track: &BoxTrack) -> Self {
        let frames = (0..FRAME_COUNT)
            .map(|i| BoxFrame {
                c: track.centers()[i].into(),
                yp: track.yaw_pitch()[i],
                corners: box_corners(track, i).iter().map(|c| [c.x, c.y, c.z]).collect(),
            })
            .collect();
        Self { extents: track.extents().into(), segments: track.segment_bounds().to_vec(), frames }
    }
}

/// Every file of an export bundle as `(name, bytes)`, frames first.
pub fn bundle(scene: &SceneMotion, k: &CameraIntrinsics, format: FrameFormat) -> Result<Vec<(String, Vec<u8>)>, RenderError> {
    let frames = render_scene(scene, k, &RenderStyle::default())?;
    let images: Vec<Result<(String, Vec<u8>), RenderError>> = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let raster = rasterize(f);
            let bytes = match format {
                FrameFormat::Ppm => raster.to_ppm(),
                FrameFormat::Png => {
                    raster.to_png().map_err(|e| RenderError::Encode { frame: i, message: e.to_string() })?
                }
            };
            Ok((format!("frame_{i:03}.{}", format.extension()), bytes))
        })
        .collect();
    let mut files = images.into_iter().collect::<Result<Vec<_>, _>>()?;
    let camera = CameraFile { intrinsics: *k, trajectory: scene.camera.clone() };
    files.push(("camera.json".into(), serde_json::to_vec_pretty(&camera).expect("serializes")));
    files.push(("boxes.json".into(), serde_json::to_vec_pretty(&BoxesFile::new(&scene.object)).expect("serializes")));
    Ok(files)
}

fn file_error(name: &str, source: std::io::Error) -> RenderError {
    match name.strip_prefix("frame_").and_then(|s| s.get(..3)).and_then(|s| s.parse().ok()) {
        Some(frame) => RenderError::Io { frame, source },
        None => RenderError::File { file: name.to_string(), source },
    }
}

/// Writes the bundle into `dir`, creating it if needed. Returns file names.
pub fn export_scene(scene: &SceneMotion, k: &CameraIntrinsics, format: FrameFormat, dir: &Path) -> Result<Vec<String>, RenderError> {
    std::fs::create_dir_all(dir).map_err(|e| file_error(&dir.to_string_lossy(), e))?;
    let files = bundle(scene, k, format)?;
    for (name, bytes) in &files {
        std::fs::write(dir.join(name), bytes).map_err(|e| file_error(name, e))?;
    }
    Ok(files.into_iter().map(|(n, _)| n).collect())
}

/// Writes the bundle as an uncompressed tar stream with fixed metadata.
pub fn export_archive<W: Write>(scene: &SceneMotion, k: &CameraIntrinsics, format: FrameFormat, sink: W) -> Result<W, RenderError> {
    let mut tar = tar::Builder::new(sink);
    for (name, bytes) in bundle(scene, k, format)? {
        let mut header = tar::Header::new_gnu();
        header.set_size(bytes.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_cksum();
        tar.append_data(&mut header, &name, bytes.as_slice()).map_err(|e| file_error(&name, e))?;
    }
    tar.into_inner().map_err(|e| file_error("archive", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile_scene, CompileConfig};
    use crate::dsl::{parse_program, MotionProgram, Role};
    use approx::assert_abs_diff_eq;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::default()
    }

    fn still_scene() -> SceneMotion {
        let p = MotionProgram::static_program(Role::Object);
        let c = MotionProgram::static_program(Role::Camera);
        compile_scene(&p, &c, &CompileConfig::default(), 0).unwrap()
    }

    #[test]
    fn projection_goldens() {
        let cam = Pose::identity();
        assert_eq!(project_point(&Vec3::new(0.0, 0.0, -5.0), &cam, &k()), Projection::Pixel([320.0, 180.0]));
        assert_eq!(project_point(&Vec3::new(0.0, 0.0, 1.0), &cam, &k()), Projection::Behind);
        let x = 30f64.to_radians().tan() * 5.0;
        let Projection::Pixel([u, v]) = project_point(&Vec3::new(x, 0.0, -5.0), &cam, &k()) else { panic!() };
        assert_abs_diff_eq!(u, 500.0, epsilon = 1e-9);
        assert_eq!(v, 180.0);
    }

    #[test]
    fn up_is_image_up() {
        let Projection::Pixel([_, v]) = project_point(&Vec3::new(0.0, 1.0, -5.0), &Pose::identity(), &k()) else { panic!() };
        assert!(v < 180.0);
    }

    #[test]
    fn unprojection_recovers_point() {
        let cam = Pose::new(Vec3::new(1.0, 2.0, 3.0), crate::kinematics::euler_rotation(20.0, -10.0, 5.0));
        let p = cam.position + cam.forward() * 4.0 + cam.right() * 0.7;
        let Projection::Pixel(px) = project_point(&p, &cam, &k()) else { panic!() };
        let depth = -cam.to_local(&p).z;
        assert!((unproject(px, depth, &cam, &k()) - p).norm() < 1e-9);
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics { vertical_fov: 180.0, ..k() }.validate().is_err());
        assert!(CameraIntrinsics { width: 8, ..k() }.validate().is_err());
        assert!(CameraIntrinsics { near_clip: 0.0, ..k() }.validate().is_err());
    }

    #[test]
    fn box_ahead_is_centered() {
        let f = render_frame(&still_scene(), 0, &k(), &RenderStyle::default()).unwrap();
        let pts: Vec<[f64; 2]> = f.polylines.iter().filter(|p| p.label == PolylineLabel::Bbox).flat_map(|p| p.points.clone()).collect();
        assert_eq!(pts.len(), 24);
        let n = pts.len() as f64;
        let (cx, cy) = pts.iter().fold((0.0, 0.0), |(x, y), p| (x + p[0] / n, y + p[1] / n));
        assert!((cx - 320.0).abs() < 1.0 && (cy - 180.0).abs() < 1.0);
    }

    #[test]
    fn box_behind_is_culled() {
        let obj = parse_program("free_form t_z_far_out | free_form t_z_far_out | free_form t_z_far_out", Role::Object).unwrap();
        let scene = compile_scene(&obj, &MotionProgram::static_program(Role::Camera), &CompileConfig::default(), 0).unwrap();
        let f = render_frame(&scene, 20, &k(), &RenderStyle::default()).unwrap();
        assert!(f.polylines.iter().all(|p| p.label == PolylineLabel::Cube));
        assert!(!f.polylines.is_empty());
    }

    #[test]
    fn frame_range() {
        assert!(matches!(render_frame(&still_scene(), 21, &k(), &RenderStyle::default()), Err(RenderError::FrameOutOfRange(21))));
    }

    #[test]
    fn near_plane_clipping() {
        let (a, b) = clip_near(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -3.0), 0.05).unwrap();
        assert_eq!(a.z, -0.05);
        assert_eq!(b.z, -3.0);
        assert!(clip_near(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 2.0), 0.05).is_none());
    }

    #[test]
    fn rect_clipping() {
        let (a, b) = clip_rect([-10.0, 5.0], [10.0, 5.0], [0.0, 0.0], [4.0, 8.0]).unwrap();
        assert_eq!((a, b), ([0.0, 5.0], [4.0, 5.0]));
        assert!(clip_rect([-10.0, 20.0], [10.0, 20.0], [0.0, 0.0], [4.0, 8.0]).is_none());
    }

    #[test]
    fn bresenham_counts() {
        let mut r = Raster::black(32, 32);
        assert_eq!(r.lit_pixels(), 0);
        r.line([0.0, 10.0], [9.0, 10.0], BBOX_COLOR);
        assert_eq!(r.lit_pixels(), 10);
        let mut r = Raster::black(32, 32);
        r.line([0.0, 0.0], [9.0, 9.0], BBOX_COLOR);
        assert_eq!(r.lit_pixels(), 10);
        let mut r = Raster::black(32, 32);
        r.line([0.0, 0.0], [9.0, 3.0], BBOX_COLOR);
        assert_eq!(r.lit_pixels(), 10);
        let mut r = Raster::black(16, 16);
        r.line([-100.0, 5.0], [100.0, 5.0], CUBE_COLOR);
        assert_eq!(r.lit_pixels(), 16);
        assert_eq!(r.get(3, 5), CUBE_COLOR);
    }

    #[test]
    fn empty_frame_is_black() {
        let r = rasterize(&ControlFrame { width: 16, height: 16, polylines: vec![] });
        assert!(r.pixels.iter().all(|b| *b == 0));
        assert!(r.to_ppm().starts_with(b"P6\n16 16\n255\n"));
        assert_eq!(r.to_ppm().len(), 13 + 16 * 16 * 3);
    }

    #[test]
    fn png_matches_ppm() {
        let r = rasterize(&render_frame(&still_scene(), 0, &k(), &RenderStyle::default()).unwrap());
        let decoded = image::load_from_memory(&r.to_png().unwrap()).unwrap().to_rgb8();
        assert_eq!(decoded.into_raw(), r.pixels);
    }

    #[test]
    fn bundle_contents() {
        let files = bundle(&still_scene(), &k(), FrameFormat::Ppm).unwrap();
        assert_eq!(files.len(), 23);
        assert_eq!(files[0].0, "frame_000.ppm");
        assert_eq!(files[20].0, "frame_020.ppm");
        let cam: CameraFile = serde_json::from_slice(&files[21].1).unwrap();
        assert_eq!(cam.trajectory, still_scene().camera);
        let boxes: BoxesFile = serde_json::from_slice(&files[22].1).unwrap();
        assert_eq!(boxes.frames.len(), 21);
        assert_eq!(boxes.frames[0].corners.len(), 8);
    }
}
