//! Request and response bodies shared by the HTTP service and the command
//! line, plus the operations behind them. Both front ends go through these
//! functions, so the same payload yields the same JSON either way.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cinemotion_core::compiler::CompileConfig;
use cinemotion_core::planner::{Backend, FieldChange, PlanError, PlanRequest, Planner};
use cinemotion_core::render::{self, CameraIntrinsics, ControlFrame, FrameFormat, RenderError, RenderStyle};
use cinemotion_core::tagger::{TagError, TagReport};
use cinemotion_core::{compile_scene, parse_program, CompileError, ParseError, Role, SceneMotion, Trajectory};

/// Closed set of machine-readable error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Body is not valid JSON or misses required fields.
    InvalidRequest,
    /// A DSL program failed to parse or validate.
    InvalidProgram,
    /// Well-formed input the toolkit cannot use (bad intrinsics, wrong
    /// frame count and the like).
    InvalidInput,
    PlanRejected,
    BackendUnavailable,
    BackendTimeout,
    NotFound,
    Internal,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 8] = [
        ErrorCode::InvalidRequest,
        ErrorCode::InvalidProgram,
        ErrorCode::InvalidInput,
        ErrorCode::PlanRejected,
        ErrorCode::BackendUnavailable,
        ErrorCode::BackendTimeout,
        ErrorCode::NotFound,
        ErrorCode::Internal,
    ];

    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::InvalidRequest | ErrorCode::InvalidProgram | ErrorCode::InvalidInput => 400,
            ErrorCode::PlanRejected => 422,
            ErrorCode::BackendUnavailable | ErrorCode::BackendTimeout => 502,
            ErrorCode::NotFound => 404,
            ErrorCode::Internal => 500,
        }
    }

    /// Process exit status for the command line: 2 for bad input, 3 for
    /// everything that went wrong while running.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::InvalidRequest | ErrorCode::InvalidProgram | ErrorCode::InvalidInput => 2,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), detail: None }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn invalid_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::InvalidRequest, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    fn program(field: &str, e: ParseError) -> Self {
        let mut detail = e.detail();
        detail["field"] = field.into();
        Self::new(ErrorCode::InvalidProgram, format!("{field}: {e}")).with_detail(detail)
    }
}

impl From<CompileError> for ApiError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Invalid(p) => Self::new(ErrorCode::InvalidProgram, p.to_string()).with_detail(p.detail()),
            other => Self::new(ErrorCode::InvalidInput, other.to_string()),
        }
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        let code = match e {
            PlanError::EmptyText => ErrorCode::InvalidRequest,
            PlanError::PlanRejected(_) => ErrorCode::PlanRejected,
            PlanError::BackendUnavailable(_) => ErrorCode::BackendUnavailable,
            PlanError::Timeout => ErrorCode::BackendTimeout,
        };
        Self::new(code, e.to_string())
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        let code = match e {
            RenderError::FrameOutOfRange(_) | RenderError::Intrinsics(_) => ErrorCode::InvalidInput,
            _ => ErrorCode::Internal,
        };
        Self::new(code, e.to_string())
    }
}

impl From<TagError> for ApiError {
    fn from(e: TagError) -> Self {
        Self::new(ErrorCode::InvalidInput, e.to_string())
    }
}

/// Decodes a JSON body, reporting the failure position.
pub fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| {
        ApiError::invalid_request(format!("invalid request body: {e}"))
            .with_detail(serde_json::json!({ "line": e.line(), "column": e.column() }))
    })
}

fn program(text: &str, role: Role, field: &str) -> Result<cinemotion_core::MotionProgram, ApiError> {
    parse_program(text, role).map_err(|e| ApiError::program(field, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileRequest {
    pub program_obj: String,
    pub program_cam: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: CompileConfig,
}

pub fn compile(req: &CompileRequest) -> Result<SceneMotion, ApiError> {
    let obj = program(&req.program_obj, Role::Object, "program_obj")?;
    let cam = program(&req.program_cam, Role::Camera, "program_cam")?;
    Ok(compile_scene(&obj, &cam, &req.config, req.seed)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub object: String,
    pub camera: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBody {
    pub text: String,
    #[serde(default)]
    pub backend: Option<Backend>,
    #[serde(default)]
    pub decomposed: Option<Decomposition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub program_obj: String,
    pub program_cam: String,
    pub decomposition: Decomposition,
    pub backend: Backend,
}

pub fn plan(planner: &Planner, body: &PlanBody, default_backend: Backend) -> Result<PlanResponse, ApiError> {
    let backend = body.backend.unwrap_or(default_backend);
    let req = PlanRequest {
        text: body.text.clone(),
        decomposed: body.decomposed.as_ref().map(|d| (d.object.clone(), d.camera.clone())),
        backend,
    };
    let plan = planner.plan(&req)?;
    Ok(PlanResponse {
        program_obj: plan.object.to_dsl(false),
        program_cam: plan.camera.to_dsl(false),
        decomposition: Decomposition { object: plan.object_text, camera: plan.camera_text },
        backend,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineBody {
    pub program_obj: String,
    pub program_cam: String,
    pub instruction: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefineResponse {
    pub program_obj: String,
    pub program_cam: String,
    pub noop: bool,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub diff: Vec<FieldChange>,
}

pub fn refine(planner: &Planner, body: &RefineBody) -> Result<RefineResponse, ApiError> {
    let obj = program(&body.program_obj, Role::Object, "program_obj")?;
    let cam = program(&body.program_cam, Role::Camera, "program_cam")?;
    let r = planner.refine(&obj, &cam, &body.instruction);
    Ok(RefineResponse {
        program_obj: r.object.to_dsl(false),
        program_cam: r.camera.to_dsl(false),
        noop: r.noop,
        backend: r.backend.to_string(),
        reason: r.reason,
        diff: r.diff,
    })
}

/// Either a bare camera trajectory or a whole scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagBody {
    #[serde(default)]
    pub trajectory: Option<Trajectory>,
    #[serde(default)]
    pub scene: Option<SceneMotion>,
}

pub fn tag(body: &TagBody) -> Result<TagReport, ApiError> {
    match (&body.trajectory, &body.scene) {
        (Some(t), None) => Ok(TagReport::for_trajectory(t)?),
        (None, Some(s)) => Ok(TagReport::for_scene(s)?),
        _ => Err(ApiError::invalid_request("give exactly one of `trajectory` and `scene`")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderBody {
    pub scene: SceneMotion,
    #[serde(default)]
    pub intrinsics: Option<CameraIntrinsics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderResponse {
    pub intrinsics: CameraIntrinsics,
    pub frames: Vec<ControlFrame>,
}

fn intrinsics(body: &RenderBody, default: &CameraIntrinsics) -> Result<CameraIntrinsics, ApiError> {
    let k = body.intrinsics.unwrap_or(*default);
    k.validate()?;
    Ok(k)
}

pub fn render(body: &RenderBody, default: &CameraIntrinsics) -> Result<RenderResponse, ApiError> {
    let k = intrinsics(body, default)?;
    let frames = render::render_scene(&body.scene, &k, &RenderStyle::default())?;
    Ok(RenderResponse { intrinsics: k, frames })
}

/// Tar archive of rasterized frames plus `camera.json` and `boxes.json`.
pub fn render_archive(body: &RenderBody, default: &CameraIntrinsics, format: FrameFormat) -> Result<Vec<u8>, ApiError> {
    let k = intrinsics(body, default)?;
    Ok(render::export_archive(&body.scene, &k, format, Vec::new())?)
}

/// Strong validator for the schema document.
pub fn schema_etag() -> String {
    use sha2::{Digest, Sha256};
    format!("\"{}\"", hex::encode(Sha256::digest(cinemotion_core::schema_json().as_bytes())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub name: String,
    pub version: String,
    pub schema_etag: String,
    pub fewshot_version: u32,
    pub remote_backend: bool,
}

pub fn health(planner: &Planner) -> HealthResponse {
    HealthResponse {
        status: "ok".into(),
        name: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_etag: schema_etag(),
        fewshot_version: cinemotion_core::planner::fewshot_version(),
        remote_backend: planner.has_remote(),
    }
}
