//! Service configuration: a TOML file with environment overrides on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cinemotion_core::llm::{HttpTransport, RemoteBackendConfig};
use cinemotion_core::planner::{Backend, Planner};
use cinemotion_core::render::CameraIntrinsics;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("{var}={value:?}: {message}")]
    Env { var: &'static str, value: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    /// Allowed browser origins; `*` allows any.
    pub cors_origins: Vec<String>,
    pub intrinsics: CameraIntrinsics,
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub default_backend: Backend,
    /// Present means the remote backend is enabled.
    pub remote: Option<RemoteBackendConfig>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            cors_origins: vec!["http://localhost:5173".into()],
            intrinsics: CameraIntrinsics::default(),
            planner: PlannerConfig::default(),
        }
    }
}

/// Environment variables read by [`ServiceConfig::load`].
pub const ENV_VARS: &[&str] = &[
    "CINEMOTION_BIND",
    "CINEMOTION_CORS_ORIGINS",
    "CINEMOTION_FOV",
    "CINEMOTION_WIDTH",
    "CINEMOTION_HEIGHT",
    "CINEMOTION_NEAR_CLIP",
    "CINEMOTION_BACKEND",
    "CINEMOTION_REMOTE_ENDPOINT",
    "CINEMOTION_REMOTE_MODEL",
    "CINEMOTION_REMOTE_TIMEOUT_MS",
];

fn parsed<T: std::str::FromStr>(var: &'static str, value: String) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Env { var, message: e.to_string(), value })
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads `path` when given, applies overrides from `env`, validates.
    pub fn load(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read { path: p.into(), source })?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        config.apply_env(env)?;
        config.validate()?;
        Ok(config)
    }

    fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = env("CINEMOTION_BIND") {
            self.bind = v;
        }
        if let Some(v) = env("CINEMOTION_CORS_ORIGINS") {
            self.cors_origins = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
        }
        if let Some(v) = env("CINEMOTION_FOV") {
            self.intrinsics.vertical_fov = parsed("CINEMOTION_FOV", v)?;
        }
        if let Some(v) = env("CINEMOTION_WIDTH") {
            self.intrinsics.width = parsed("CINEMOTION_WIDTH", v)?;
        }
        if let Some(v) = env("CINEMOTION_HEIGHT") {
            self.intrinsics.height = parsed("CINEMOTION_HEIGHT", v)?;
        }
        if let Some(v) = env("CINEMOTION_NEAR_CLIP") {
            self.intrinsics.near_clip = parsed("CINEMOTION_NEAR_CLIP", v)?;
        }
        if let Some(v) = env("CINEMOTION_BACKEND") {
            self.planner.default_backend = match v.trim() {
                "rules" => Backend::Rules,
                "remote" => Backend::Remote,
                _ => {
                    return Err(ConfigError::Env {
                        var: "CINEMOTION_BACKEND",
                        value: v,
                        message: "expected `rules` or `remote`".into(),
                    })
                }
            };
        }
        if let Some(v) = env("CINEMOTION_REMOTE_ENDPOINT") {
            self.planner.remote.get_or_insert_with(Default::default).endpoint = v;
        }
        if let Some(v) = env("CINEMOTION_REMOTE_MODEL") {
            self.planner.remote.get_or_insert_with(Default::default).model = v;
        }
        if let Some(v) = env("CINEMOTION_REMOTE_TIMEOUT_MS") {
            let ms = parsed("CINEMOTION_REMOTE_TIMEOUT_MS", v)?;
            self.planner.remote.get_or_insert_with(Default::default).timeout_ms = ms;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.intrinsics.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(r) = &self.planner.remote {
            if r.timeout_ms == 0 {
                return Err(ConfigError::Invalid("planner.remote.timeout_ms must be positive".into()));
            }
            if r.endpoint.is_empty() {
                return Err(ConfigError::Invalid("planner.remote.endpoint is empty".into()));
            }
        }
        if self.planner.default_backend == Backend::Remote && self.planner.remote.is_none() {
            return Err(ConfigError::Invalid("default backend is remote but no [planner.remote] is configured".into()));
        }
        Ok(())
    }

    /// Builds the planner. Call outside an async runtime: the HTTP client
    /// is a blocking one.
    pub fn planner(&self) -> Result<Planner, ConfigError> {
        match &self.planner.remote {
            None => Ok(Planner::rules_only()),
            Some(r) => {
                let transport = HttpTransport::new(r.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(Planner::with_remote(transport, r.clone()))
            }
        }
    }
}
