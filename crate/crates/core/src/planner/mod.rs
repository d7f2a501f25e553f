//! Natural language to motion programs.
//!
//! Planning is factorized: the object program is produced first, and the
//! camera program is produced with the object program in context. Two
//! backends exist. The rule backend is a deterministic keyword table. The
//! remote backend prompts a chat model with the DSL schema and few-shot
//! exemplars, validates the reply with the DSL parser and retries once
//! with the parse error appended. Whatever a backend says, a returned
//! program has passed the parser.

mod refine;
mod rules;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dsl::{parse_program, MotionProgram, ParseError, Role};
use crate::llm::{ChatMessage, ChatTransport, RemoteBackendConfig, TransportError};

pub use refine::{diff_programs, FieldChange, Refinement};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("prompt text is empty")]
    EmptyText,
    #[error("plan rejected: {0}")]
    PlanRejected(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend timed out")]
    Timeout,
}

impl From<TransportError> for PlanError {
    fn from(e: TransportError) -> Self {
        match e {
            TransportError::Timeout => PlanError::Timeout,
            other => PlanError::BackendUnavailable(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Rules,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub text: String,
    /// Pre-split `(object, camera)` descriptions; skips decomposition.
    #[serde(default)]
    pub decomposed: Option<(String, String)>,
    #[serde(default)]
    pub backend: Backend,
}

impl PlanRequest {
    pub fn rules(text: impl Into<String>) -> Self {
        Self { text: text.into(), decomposed: None, backend: Backend::Rules }
    }

    pub fn remote(text: impl Into<String>) -> Self {
        Self { text: text.into(), decomposed: None, backend: Backend::Remote }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub object_text: String,
    pub camera_text: String,
    pub object: MotionProgram,
    pub camera: MotionProgram,
}

const CAMERA_WORDS: &[&str] = &[
    "camera", "cameras", "shot", "view", "lens", "frame", "we", "viewer", "cinematographer", "operator", "drone",
];
const DETERMINERS: &[&str] = &["the", "a", "an", "this", "that", "our", "his", "her", "their", "its", "my"];
const PRONOUNS: &[&str] = &["it", "they", "he", "she", "we", "you", "i", "them", "then"];

/// Separators in priority order. The flag marks sequential ones.
const SEPARATORS: &[(&str, bool)] = &[
    (", and then ", true),
    (", then ", true),
    (" and then ", true),
    (". ", true),
    ("; ", false),
    (" while ", false),
    (" whilst ", false),
    (" as ", false),
];

pub(crate) fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '-' || c == '\'' || c == '.'))
        .map(|w| w.trim_matches('.').to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

fn mentions_camera(clause: &str) -> bool {
    words(clause).iter().any(|w| CAMERA_WORDS.contains(&w.as_str()))
}

/// An object clause opens with a non-camera subject: a determiner and a
/// noun, or a capitalized name.
fn has_object_subject(clause: &str) -> bool {
    let raw: Vec<&str> = clause.split_whitespace().collect();
    let Some(first) = raw.first() else { return false };
    let lower = first.to_lowercase();
    if DETERMINERS.contains(&lower.as_str()) {
        return raw.get(1).is_some_and(|w| !CAMERA_WORDS.contains(&w.to_lowercase().as_str()));
    }
    first.chars().next().is_some_and(char::is_uppercase) && !PRONOUNS.contains(&lower.as_str())
}

/// Splits on " and " only where a new subject starts.
fn split_and(clause: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut from = 0;
    while let Some(rel) = clause[from..].find(" and ") {
        let pos = from + rel;
        let next = clause[pos + 5..].split_whitespace().next().unwrap_or("").to_lowercase();
        if DETERMINERS.contains(&next.as_str()) || CAMERA_WORDS.contains(&next.as_str()) {
            out.push(clause[start..pos].to_string());
            start = pos + 5;
        }
        from = pos + 5;
    }
    out.push(clause[start..].to_string());
    out
}

/// Clauses with the kind of separator that preceded each (true when
/// sequential).
fn clauses(text: &str) -> Vec<(String, bool)> {
    let mut parts = vec![(text.trim().trim_end_matches('.').to_string(), false)];
    for (sep, sequential) in SEPARATORS {
        parts = parts
            .into_iter()
            .flat_map(|(part, seq)| {
                let pieces: Vec<String> = part.split(sep).map(str::to_string).collect();
                pieces.into_iter().enumerate().map(move |(i, p)| (p, if i == 0 { seq } else { *sequential }))
            })
            .collect();
    }
    parts
        .into_iter()
        .flat_map(|(part, seq)| {
            split_and(&part).into_iter().enumerate().map(move |(i, p)| (p, if i == 0 { seq } else { false }))
        })
        .map(|(p, seq)| (p.trim().trim_matches(',').trim().to_string(), seq))
        .filter(|(p, _)| !p.is_empty())
        .collect()
}

/// Splits a description into its object part and its camera part.
/// Clauses naming the camera go to the camera; clauses led by another
/// subject go to the object; anything else defaults to the camera. An
/// empty half means that role has no described motion.
pub fn decompose(text: &str) -> (String, String) {
    let mut obj: Vec<(String, bool)> = Vec::new();
    let mut cam: Vec<(String, bool)> = Vec::new();
    let mut pending_seq = false;
    let mut last_role: Option<Role> = None;
    for (clause, seq) in clauses(text) {
        let seq = seq || pending_seq;
        let role = if mentions_camera(&clause) {
            Role::Camera
        } else if has_object_subject(&clause) {
            Role::Object
        } else {
            Role::Camera
        };
        // A sequential break carries to the next clause of the same role.
        pending_seq = seq && last_role.is_some_and(|r| r != role);
        let target = if role == Role::Camera { &mut cam } else { &mut obj };
        target.push((clause, seq));
        last_role = Some(role);
    }
    let join = |parts: Vec<(String, bool)>| {
        let mut out = String::new();
        for (i, (clause, seq)) in parts.into_iter().enumerate() {
            if i > 0 {
                out.push_str(if seq { ", then " } else { " and " });
            }
            out.push_str(&clause);
        }
        out
    };
    (join(obj), join(cam))
}

#[derive(Debug, Deserialize)]
struct FewShotFile {
    version: u32,
    exemplars: Vec<Exemplar>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Exemplar {
    pub role: Role,
    pub text: String,
    pub program: String,
}

fn fewshot() -> &'static FewShotFile {
    static FILE: OnceLock<FewShotFile> = OnceLock::new();
    FILE.get_or_init(|| serde_json::from_str(include_str!("../../data/fewshot.json")).expect("few-shot file parses"))
}

pub fn fewshot_version() -> u32 {
    fewshot().version
}

pub fn exemplars() -> &'static [Exemplar] {
    &fewshot().exemplars
}

/// Pulls a program out of a reply: drops code fences and a leading
/// `program:` label.
fn extract_program(reply: &str) -> &str {
    let mut s = reply.trim();
    if let Some(inner) = s.strip_prefix("```") {
        s = inner.split_once('\n').map_or("", |(_, body)| body);
        s = s.trim_end().strip_suffix("```").unwrap_or(s).trim();
    }
    s.strip_prefix("program:").map_or(s, str::trim)
}

/// Plans with the rule backend and, when configured, a remote model.
pub struct Planner {
    remote: Option<(Box<dyn ChatTransport>, RemoteBackendConfig)>,
}

impl Default for Planner {
    fn default() -> Self {
        Self::rules_only()
    }
}

impl Planner {
    pub fn rules_only() -> Self {
        Self { remote: None }
    }

    pub fn with_remote(transport: impl ChatTransport + 'static, config: RemoteBackendConfig) -> Self {
        Self { remote: Some((Box::new(transport), config)) }
    }

    pub fn has_remote(&self) -> bool {
        self.remote.is_some()
    }

    pub fn plan(&self, req: &PlanRequest) -> Result<Plan, PlanError> {
        if req.text.trim().is_empty() {
            return Err(PlanError::EmptyText);
        }
        let (object_text, camera_text) = req.decomposed.clone().unwrap_or_else(|| decompose(&req.text));
        let (object, camera) = match req.backend {
            Backend::Rules => {
                let object = rules::plan_role(&object_text, Role::Object, None)?;
                let camera = rules::plan_role(&camera_text, Role::Camera, Some(&object))?;
                (object, camera)
            }
            Backend::Remote => {
                let object = self.remote_plan_role(&object_text, Role::Object, None)?;
                let camera = self.remote_plan_role(&camera_text, Role::Camera, Some((&object_text, &object)))?;
                (object, camera)
            }
        };
        Ok(Plan { object_text, camera_text, object, camera })
    }

    fn transport(&self) -> Result<(&dyn ChatTransport, &RemoteBackendConfig), PlanError> {
        self.remote
            .as_ref()
            .map(|(t, c)| (t.as_ref(), c))
            .ok_or_else(|| PlanError::BackendUnavailable("no remote backend configured".into()))
    }

    /// One validated exchange: ask, parse, and on failure ask once more
    /// with the parse error.
    fn ask<T>(
        &self,
        mut messages: Vec<ChatMessage>,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, PlanError> {
        let (transport, config) = self.transport()?;
        let mut last_error = String::new();
        for attempt in 0..2 {
            let reply = transport.complete(&config.request(messages.clone()))?;
            match parse(&reply) {
                Ok(v) => return Ok(v),
                Err(e) => {
                    last_error = e;
                    if attempt == 0 {
                        messages.push(ChatMessage::assistant(reply));
                        messages.push(ChatMessage::user(format!(
                            "That reply is not a valid program: {last_error}. Reply with a corrected program only."
                        )));
                    }
                }
            }
        }
        Err(PlanError::PlanRejected(last_error))
    }

    fn preamble(&self, role: Role) -> Result<Vec<ChatMessage>, PlanError> {
        let (_, config) = self.transport()?;
        let mut messages = vec![ChatMessage::system(config.system_message())];
        for ex in exemplars().iter().filter(|e| e.role == role) {
            messages.push(ChatMessage::user(format!("Role: {}\nDescription: {}", role, ex.text)));
            messages.push(ChatMessage::assistant(ex.program.clone()));
        }
        Ok(messages)
    }

    fn remote_plan_role(
        &self,
        text: &str,
        role: Role,
        object: Option<(&str, &MotionProgram)>,
    ) -> Result<MotionProgram, PlanError> {
        self.transport()?;
        if text.trim().is_empty() {
            return Ok(MotionProgram::static_program(role));
        }
        let mut messages = self.preamble(role)?;
        let mut prompt = format!("Role: {role}\n");
        if let Some((obj_text, obj)) = object {
            prompt.push_str(&format!("Object description: {obj_text}\nObject program: {obj}\n"));
        }
        prompt.push_str(&format!("Description: {text}"));
        messages.push(ChatMessage::user(prompt));
        self.ask(messages, |reply| parse_program(extract_program(reply), role).map_err(|e| e.to_string()))
    }

    /// Edits a program pair with a relative instruction. The rule table
    /// is tried first; unmatched instructions go to the remote backend
    /// when one is configured. Any failure returns the input unchanged
    /// with `noop` set.
    pub fn refine(&self, object: &MotionProgram, camera: &MotionProgram, instruction: &str) -> Refinement {
        if let Some((o, c)) = refine::apply_rules(object, camera, instruction) {
            return Refinement::new(object, camera, o, c, "rules", None);
        }
        match self.remote_refine(object, camera, instruction) {
            Ok((o, c)) => Refinement::new(object, camera, o, c, "remote", None),
            Err(e) => Refinement::noop(object, camera, e.to_string()),
        }
    }

    fn remote_refine(
        &self,
        object: &MotionProgram,
        camera: &MotionProgram,
        instruction: &str,
    ) -> Result<(MotionProgram, MotionProgram), PlanError> {
        if instruction.trim().is_empty() {
            return Err(PlanError::EmptyText);
        }
        let (_, config) = self.transport()?;
        let messages = vec![
            ChatMessage::system(config.system_message()),
            ChatMessage::user(format!(
                "Current object program: {object}\nCurrent camera program: {camera}\nInstruction: {instruction}\n\
                 Reply with exactly two lines:\nobject: <program>\ncamera: <program>"
            )),
        ];
        self.ask(messages, parse_pair)
    }
}

fn parse_pair(reply: &str) -> Result<(MotionProgram, MotionProgram), String> {
    let mut object = None;
    let mut camera = None;
    for line in extract_program(reply).lines() {
        let line = line.trim();
        if let Some(p) = line.strip_prefix("object:") {
            object = Some(parse_program(p.trim(), Role::Object).map_err(|e: ParseError| format!("object: {e}"))?);
        } else if let Some(p) = line.strip_prefix("camera:") {
            camera = Some(parse_program(p.trim(), Role::Camera).map_err(|e: ParseError| format!("camera: {e}"))?);
        }
    }
    match (object, camera) {
        (Some(o), Some(c)) => Ok((o, c)),
        _ => Err("expected `object:` and `camera:` lines".into()),
    }
}
