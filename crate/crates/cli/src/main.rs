use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use cinemotion_cli::api::{self, ApiError};
use cinemotion_cli::config::{ConfigError, ServiceConfig};
use cinemotion_cli::server;
use cinemotion_core::compiler::CompileConfig;
use cinemotion_core::corpus::{generate_corpus, GenerateOptions, Paraphraser, RemoteParaphraser, RuleParaphraser, SamplingConfig};
use cinemotion_core::llm::HttpTransport;
use cinemotion_core::planner::Backend;
use cinemotion_core::render::{self, FrameFormat};
use cinemotion_core::tagger::{dsl_round_trip_filter, evaluate, FilterOutcome, DEFAULT_FILTER_THRESHOLD};
use cinemotion_core::{MotionProgram, Role, SceneMotion, Trajectory};

#[derive(Parser)]
#[command(name = "cinemotion", version, about = "Compile, tag, render and plan camera and object motion programs")]
struct Cli {
    /// Seed for commands that draw randomness; overrides config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Camera,
    Object,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Rules,
    Remote,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Rules => Backend::Rules,
            BackendArg::Remote => Backend::Remote,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageArg {
    Ppm,
    Png,
}

impl From<ImageArg> for FrameFormat {
    fn from(f: ImageArg) -> Self {
        match f {
            ImageArg::Ppm => FrameFormat::Ppm,
            ImageArg::Png => FrameFormat::Png,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DSL program to trajectory JSON.
    Compile {
        /// Program text; `-` or absent reads standard input.
        program: Option<String>,
        #[arg(long, value_enum, default_value = "camera")]
        role: RoleArg,
        /// Object program the camera tracks (default: static).
        #[arg(long)]
        object: Option<String>,
        /// Print the whole scene instead of one track.
        #[arg(long)]
        scene: bool,
        /// Compile config JSON (object start and extents).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Read a full compile request body from this JSON file (`-` for stdin).
        #[arg(long, conflicts_with_all = ["program", "object", "config"])]
        request: Option<String>,
    },
    /// Turn a shot description into object and camera programs.
    Plan {
        text: String,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Service config providing the remote backend.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Apply a natural-language edit to a pair of programs.
    Refine {
        instruction: String,
        #[arg(long, default_value = "free_form")]
        object: String,
        #[arg(long)]
        camera: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a JSONL corpus of programs, captions and trajectories.
    GenCorpus {
        /// Sampling config, JSON or TOML by extension.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        /// Output JSONL file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the manifest JSON here.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Store scenes as separate files in this directory.
        #[arg(long)]
        traj_dir: Option<PathBuf>,
        /// First record index to write.
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, value_enum, default_value = "rules")]
        paraphrase: BackendArg,
        /// Service config providing the remote paraphrase backend.
        #[arg(long)]
        service_config: Option<PathBuf>,
    },
    /// Tag a trajectory or scene JSON file with motion classes.
    Tag {
        /// Input file; `-` reads standard input.
        #[arg(default_value = "-")]
        input: String,
    },
    /// Score predicted tracks against references, matched by file name.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Emit JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// Sort external trajectories into accepted and rejected lists.
    Filter {
        /// Trajectory or scene files, or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FILTER_THRESHOLD)]
        threshold: f64,
    },
    /// Render a scene to polylines, image files or a tar archive.
    Render {
        /// Scene JSON; `-` reads standard input.
        #[arg(default_value = "-")]
        input: String,
        /// Write frames into this directory.
        #[arg(long, conflicts_with = "archive")]
        out: Option<PathBuf>,
        /// Write a tar archive of frames to this file.
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "ppm")]
        format: ImageArg,
        /// Service config supplying default intrinsics.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        height: Option<u32>,
        #[arg(long)]
        fov: Option<f64>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
    },
}

/// A failure with its exit status: 2 for invalid input, 3 at runtime.
struct Failure {
    status: u8,
    message: String,
    detail: Option<Value>,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self { status: 2, message: message.into(), detail: None }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { status: 3, message: message.into(), detail: None }
    }
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        Self { status: e.code.exit_code() as u8, message: e.message, detail: e.detail }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => Failure::runtime(e.to_string()),
            other => Failure::invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::runtime(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::runtime(format!("{arg}: {e}")))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::invalid(format!("{origin}: {e}")))
}

fn print_json(value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string(value).map_err(|e| Failure::runtime(e.to_string()))?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

/// A camera track from a trajectory file or from the camera of a scene file.
fn load_track(path: &Path) -> Result<Trajectory, Failure> {
    let origin = path.display().to_string();
    let value: Value = parse_json(&read_source(&origin)?, &origin)?;
    if value.get("camera").is_some() {
        let scene: SceneMotion = serde_json::from_value(value).map_err(|e| Failure::invalid(format!("{origin}: {e}")))?;
        Ok(scene.camera)
    } else {
        serde_json::from_value(value).map_err(|e| Failure::invalid(format!("{origin}: {e}")))
    }
}

fn json_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
    let mut files = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect::<Vec<_>>();
    files.sort();
    Ok(files)
}

fn service_config(path: Option<&Path>) -> Result<ServiceConfig, Failure> {
    Ok(ServiceConfig::load(path, |k| std::env::var(k).ok())?)
}

fn compile_cmd(
    program: Option<String>,
    role: RoleArg,
    object: Option<String>,
    scene: bool,
    config: Option<PathBuf>,
    request: Option<String>,
    seed: u64,
) -> Outcome {
    if let Some(source) = request {
        let req: api::CompileRequest = parse_json(&read_source(&source)?, &source)?;
        return print_json(&api::compile(&req)?);
    }
    let text = match program.as_deref() {
        None | Some("-") => read_source("-")?,
        Some(t) => t.to_string(),
    };
    let config: CompileConfig = match config {
        Some(p) => parse_json(&read_source(&p.display().to_string())?, &p.display().to_string())?,
        None => CompileConfig::default(),
    };
    let still = |role| MotionProgram::static_program(role).to_dsl(false);
    let req = match role {
        RoleArg::Object => {
            if object.is_some() {
                return Err(Failure::invalid("--object only applies to camera programs"));
            }
            api::CompileRequest { program_obj: text.trim().into(), program_cam: still(Role::Camera), seed, config }
        }
        RoleArg::Camera => api::CompileRequest {
            program_obj: object.unwrap_or_else(|| still(Role::Object)),
            program_cam: text.trim().into(),
            seed,
            config,
        },
    };
    let s = api::compile(&req)?;
    match (scene, role) {
        (true, _) => print_json(&s),
        (false, RoleArg::Camera) => print_json(&s.camera),
        (false, RoleArg::Object) => print_json(&s.object),
    }
}

#[allow(clippy::too_many_arguments)]
fn gen_corpus_cmd(
    config: Option<PathBuf>,
    count: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    opts: GenerateOptions,
    paraphrase: BackendArg,
    service: Option<PathBuf>,
) -> Outcome {
    let mut sampling = match &config {
        None => SamplingConfig::default(),
        Some(p) => {
            let origin = p.display().to_string();
            let text = read_source(&origin)?;
            if p.extension().is_some_and(|x| x == "toml") {
                toml::from_str(&text).map_err(|e| Failure::invalid(format!("{origin}: {e}")))?
            } else {
                parse_json(&text, &origin)?
            }
        }
    };
    if let Some(n) = count {
        sampling.record_count = n;
    }
    if let Some(s) = seed {
        sampling.seed = s;
    }
    let paraphraser: Box<dyn Paraphraser> = match paraphrase {
        BackendArg::Rules => Box::new(RuleParaphraser::default()),
        BackendArg::Remote => {
            let remote = service_config(service.as_deref())?
                .planner
                .remote
                .ok_or_else(|| Failure::invalid("remote paraphrasing needs [planner.remote] in the service config"))?;
            let transport = HttpTransport::new(remote.clone()).map_err(|e| Failure::invalid(e.to_string()))?;
            Box::new(RemoteParaphraser { transport, config: remote })
        }
    };
    let mut sink: Box<dyn Write> = match &out {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| Failure::runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let m = generate_corpus(&sampling, &opts, paraphraser.as_ref(), &mut sink).map_err(|e| match e {
        cinemotion_core::corpus::CorpusError::Config(_) => Failure::invalid(e.to_string()),
        other => Failure::runtime(other.to_string()),
    })?;
    sink.flush().map_err(|e| Failure::runtime(e.to_string()))?;
    if let Some(path) = manifest {
        let text = serde_json::to_string_pretty(&m).map_err(|e| Failure::runtime(e.to_string()))?;
        write_file(&path, text.as_bytes())?;
    }
    Ok(())
}

fn tag_cmd(input: &str) -> Outcome {
    let value: Value = parse_json(&read_source(input)?, input)?;
    let body = if value.get("trajectory").is_some() || value.get("scene").is_some() {
        parse_json::<api::TagBody>(&value.to_string(), input)?
    } else if value.get("camera").is_some() {
        api::TagBody { trajectory: None, scene: Some(parse_json(&value.to_string(), input)?) }
    } else {
        api::TagBody { trajectory: Some(parse_json(&value.to_string(), input)?), scene: None }
    };
    print_json(&api::tag(&body)?)
}

fn eval_cmd(pred: &Path, reference: &Path, json: bool) -> Outcome {
    let refs = json_files(reference)?;
    if refs.is_empty() {
        return Err(Failure::invalid(format!("{}: no .json files", reference.display())));
    }
    let (mut p, mut r) = (Vec::new(), Vec::new());
    for file in &refs {
        let name = file.file_name().expect("listed files have names");
        let counterpart = pred.join(name);
        if !counterpart.exists() {
            return Err(Failure::invalid(format!("{}: no prediction for this reference", counterpart.display())));
        }
        p.push(load_track(&counterpart)?);
        r.push(load_track(file)?);
    }
    let report = evaluate(&p, &r).map_err(ApiError::from)?;
    if json {
        print_json(&report)
    } else {
        print!("{}", report.to_table());
        Ok(())
    }
}

#[derive(Serialize)]
struct FilterEntry {
    file: String,
    /// Accepted program in DSL form.
    #[serde(skip_serializing_if = "Option::is_none")]
    dsl: Option<String>,
    #[serde(flatten)]
    outcome: FilterOutcome,
}

#[derive(Serialize)]
struct FilterLists {
    threshold: f64,
    accepted: Vec<FilterEntry>,
    rejected: Vec<FilterEntry>,
}

fn filter_cmd(inputs: &[PathBuf], threshold: f64) -> Outcome {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Failure::invalid("--threshold must lie in [0, 1]"));
    }
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            files.extend(json_files(input)?);
        } else {
            files.push(input.clone());
        }
    }
    let mut lists = FilterLists { threshold, accepted: Vec::new(), rejected: Vec::new() };
    for file in files {
        let outcome = dsl_round_trip_filter(&load_track(&file)?, threshold);
        let dsl = match &outcome {
            FilterOutcome::Accepted { program, .. } => Some(program.to_dsl(false)),
            FilterOutcome::Rejected { .. } => None,
        };
        let entry = FilterEntry { file: file.display().to_string(), dsl, outcome };
        match entry.outcome {
            FilterOutcome::Accepted { .. } => lists.accepted.push(entry),
            FilterOutcome::Rejected { .. } => lists.rejected.push(entry),
        }
    }
    print_json(&lists)
}

#[allow(clippy::too_many_arguments)]
fn render_cmd(
    input: &str,
    out: Option<PathBuf>,
    archive: Option<PathBuf>,
    format: FrameFormat,
    config: Option<PathBuf>,
    width: Option<u32>,
    height: Option<u32>,
    fov: Option<f64>,
) -> Outcome {
    let mut k = service_config(config.as_deref())?.intrinsics;
    k.width = width.unwrap_or(k.width);
    k.height = height.unwrap_or(k.height);
    k.vertical_fov = fov.unwrap_or(k.vertical_fov);
    let scene: SceneMotion = parse_json(&read_source(input)?, input)?;
    let body = api::RenderBody { scene, intrinsics: Some(k) };
    match (out, archive) {
        (Some(dir), _) => {
            k.validate().map_err(ApiError::from)?;
            render::export_scene(&body.scene, &k, format, &dir).map_err(ApiError::from)?;
            Ok(())
        }
        (None, Some(path)) => write_file(&path, &api::render_archive(&body, &k, format)?),
        (None, None) => print_json(&api::render(&body, &k)?),
    }
}

fn serve_cmd(config: Option<PathBuf>, bind: Option<String>) -> Outcome {
    let mut config = service_config(config.as_deref())?;
    if let Some(b) = bind {
        config.bind = b;
    }
    // The blocking HTTP client must be built before the runtime starts.
    let planner = config.planner()?;
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::runtime(e.to_string()))?;
    runtime.block_on(server::serve(config, planner)).map_err(|e| Failure::runtime(e.to_string()))
}

fn run(cli: Cli) -> Outcome {
    let seed = cli.seed;
    match cli.command {
        Command::Compile { program, role, object, scene, config, request } => {
            compile_cmd(program, role, object, scene, config, request, seed.unwrap_or(0))
        }
        Command::Plan { text, backend, config } => {
            let c = service_config(config.as_deref())?;
            let planner = c.planner()?;
            let body = api::PlanBody { text, backend: backend.map(Into::into), decomposed: None };
            print_json(&api::plan(&planner, &body, c.planner.default_backend)?)
        }
        Command::Refine { instruction, object, camera, config } => {
            let planner = service_config(config.as_deref())?.planner()?;
            let body = api::RefineBody { program_obj: object, program_cam: camera, instruction };
            print_json(&api::refine(&planner, &body)?)
        }
        Command::GenCorpus { config, count, out, manifest, traj_dir, start, paraphrase, service_config } => {
            let opts = GenerateOptions { start, traj_dir };
            gen_corpus_cmd(config, count, seed, out, manifest, opts, paraphrase, service_config)
        }
        Command::Tag { input } => tag_cmd(&input),
        Command::Eval { pred, reference, json } => eval_cmd(&pred, &reference, json),
        Command::Filter { inputs, threshold } => filter_cmd(&inputs, threshold),
        Command::Render { input, out, archive, format, config, width, height, fov } => {
            render_cmd(&input, out, archive, format.into(), config, width, height, fov)
        }
        Command::Serve { config, bind } => serve_cmd(config, bind),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(d) = f.detail {
                eprintln!("detail: {d}");
            }
            ExitCode::from(f.status)
        }
    }
}
