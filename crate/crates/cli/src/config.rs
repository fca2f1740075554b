//! Run configuration: TOML text → validated models, forms and tasks.
//!
//! Validation never stops at the first problem; every issue found is
//! returned together.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use contact_pairs::catalog::{example, Example};
use contact_pairs::contact::{darboux_model, ContactPair, Settings};
use contact_pairs::deformation::{check_converse_grid, DeformationFamily};
use contact_pairs::expr::{parse, Expr};
use contact_pairs::jacobi::{LeafGrid, Side};
use contact_pairs::manifold::{
    ChartAxis, ChartModel, Domain, FormField, LieGroupModel, ManifoldModel, Sampling, DEFAULT_RANDOM_SAMPLES,
    DEFAULT_RESOLUTION,
};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// One validation problem, located by a dotted path into the config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("TOML syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{} validation error(s):\n{}", .0.len(), .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
}

impl ConfigError {
    pub fn issues(&self) -> Vec<Issue> {
        match self {
            ConfigError::Invalid(v) => v.clone(),
            other => vec![Issue {
                location: "config".into(),
                message: other.to_string(),
            }],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    #[serde(default)]
    seed: u64,
    tol: Option<f64>,
    t_grid: Option<Vec<f64>>,
    sampling: Option<RawSampling>,
    #[serde(default)]
    model: Vec<RawModel>,
    #[serde(default)]
    form: Vec<RawForm>,
    #[serde(default)]
    task: Vec<RawTask>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    kind: String,
    count: Option<usize>,
    resolution: Option<usize>,
    max_grid: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    kind: String,
    /// `builtin`: `heisenberg3` or `torus`.
    builtin: Option<String>,
    dim: Option<usize>,
    /// `lie`: `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
    constants: Option<Vec<Vec<Vec<f64>>>>,
    /// `chart`: one entry per axis.
    axes: Option<Vec<RawAxis>>,
    /// `product`: names of two earlier models.
    factors: Option<Vec<String>>,
    coarse_resolution: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    domain: String,
    lo: Option<f64>,
    hi: Option<f64>,
    resolution: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCoeff {
    Num(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    name: String,
    model: String,
    #[serde(default = "one")]
    degree: usize,
    coeffs: Vec<RawCoeff>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    kind: String,
    label: Option<String>,
    example: Option<String>,
    model: Option<String>,
    alpha: Option<String>,
    beta: Option<String>,
    alpha0: Option<String>,
    beta0: Option<String>,
    k: Option<usize>,
    l: Option<usize>,
    t_grid: Option<Vec<f64>>,
    output: Option<PathBuf>,
    side: Option<String>,
    leaf_axes: Option<Vec<usize>>,
    base: Option<Vec<f64>>,
    resolutions: Option<Vec<usize>>,
    functions: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Classify,
    VerifyPair,
    DeformForward,
    DeformConverse,
    SingleDeform,
    Jacobi,
    Sweep,
}

impl TaskKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "classify" => TaskKind::Classify,
            "verify-pair" => TaskKind::VerifyPair,
            "deform-forward" => TaskKind::DeformForward,
            "deform-converse" => TaskKind::DeformConverse,
            "single-deform" => TaskKind::SingleDeform,
            "jacobi" => TaskKind::Jacobi,
            "sweep" => TaskKind::Sweep,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Classify => "classify",
            TaskKind::VerifyPair => "verify-pair",
            TaskKind::DeformForward => "deform-forward",
            TaskKind::DeformConverse => "deform-converse",
            TaskKind::SingleDeform => "single-deform",
            TaskKind::Jacobi => "jacobi",
            TaskKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone)]
pub struct JacobiTask {
    pub model: ManifoldModel,
    pub pair: ContactPair,
    pub side: Side,
    pub leaf_axes: Vec<usize>,
    pub base: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub functions: [Expr; 3],
}

#[derive(Debug, Clone)]
pub enum TaskInput {
    Classify {
        model: ManifoldModel,
        alpha: FormField,
    },
    Pair {
        model: ManifoldModel,
        alpha: FormField,
        beta: FormField,
        k: usize,
        l: usize,
    },
    Family(Box<DeformationFamily>),
    Single {
        model: ManifoldModel,
        alpha0: FormField,
        alpha: FormField,
    },
    Jacobi(Box<JacobiTask>),
}

#[derive(Debug, Clone)]
pub struct Task {
    pub kind: TaskKind,
    pub label: String,
    pub input: TaskInput,
    pub t_grid: Vec<f64>,
    pub output: Option<PathBuf>,
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: Option<f64>,
    pub sampling: Sampling,
    pub tasks: Vec<Task>,
}

impl RunConfig {
    /// Settings for a model: its default tolerance unless overridden.
    pub fn settings(&self, model: &ManifoldModel) -> Settings {
        let s = Settings::for_model(model).with_sampling(self.sampling);
        match self.tol {
            Some(t) => s.with_tol(t),
            None => s,
        }
    }
}

impl RunConfig {
    /// Applies command-line overrides; a new seed also reseeds random sampling.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        tol: Option<f64>,
        t_grid: Option<&[f64]>,
    ) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        if let Some(s) = seed {
            self.seed = s;
            self.sampling = match self.sampling {
                Sampling::Random { count, .. } => Sampling::Random { count, seed: s },
                Sampling::Auto { max_grid, count, .. } => Sampling::Auto {
                    max_grid,
                    count,
                    seed: s,
                },
                other => other,
            };
        }
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                issues.push(Issue {
                    location: "--tol".into(),
                    message: format!("must be positive, got {t}"),
                });
            }
            self.tol = Some(t);
        }
        if let Some(grid) = t_grid {
            if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
                issues.push(Issue {
                    location: "--t-grid".into(),
                    message: "must be a non-empty list of finite numbers".into(),
                });
            }
            for (i, task) in self.tasks.iter_mut().enumerate() {
                if task.kind == TaskKind::DeformConverse {
                    if let Err(e) = check_converse_grid(grid) {
                        issues.push(Issue {
                            location: format!("--t-grid (task[{i}])"),
                            message: e.to_string(),
                        });
                    }
                }
                task.t_grid = grid.to_vec();
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(issues))
        }
    }

    /// Keeps only tasks accepted by `keep`.
    pub fn retain_tasks(&mut self, keep: impl Fn(TaskKind) -> bool) {
        self.tasks.retain(|t| keep(t.kind));
    }
}

/// A one-task run on a registry example.
pub fn example_config(kind: TaskKind, name: &str, output: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let mut text = format!(
        "schema_version = {SCHEMA_VERSION}\n[[task]]\nkind = \"{}\"\nexample = {}\n",
        kind.name(),
        toml::Value::String(name.to_string())
    );
    if let Some(p) = output {
        text.push_str(&format!("output = {}\n", toml::Value::String(p.display().to_string())));
    }
    parse_config(&text)
}

pub const DEFAULT_FORWARD_GRID: [f64; 10] = [2.0, -2.0, 1.0, -1.0, 0.5, -0.5, 0.1, -0.1, 0.01, -0.01];
pub const DEFAULT_CONVERSE_GRID: [f64; 5] = [0.05, 0.2, 1.0, 3.0, 10.0];

fn default_grid(kind: TaskKind) -> Vec<f64> {
    match kind {
        TaskKind::DeformConverse => DEFAULT_CONVERSE_GRID.to_vec(),
        TaskKind::SingleDeform => vec![0.01, 0.1, 0.5, 1.0, 2.0],
        _ => DEFAULT_FORWARD_GRID.to_vec(),
    }
}

struct Validator {
    issues: Vec<Issue>,
}

impl Validator {
    fn push(&mut self, location: impl Into<String>, message: impl ToString) {
        self.issues.push(Issue {
            location: location.into(),
            message: message.to_string(),
        });
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    // sweep outputs are relative to the config file
    let dir = path.parent().unwrap_or(Path::new(""));
    for task in &mut config.tasks {
        if let Some(out) = &mut task.output {
            if out.is_relative() {
                *out = dir.join(&*out);
            }
        }
    }
    Ok(config)
}

/// Parses and validates config text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut v = Validator { issues: Vec::new() };
    if raw.schema_version != SCHEMA_VERSION {
        v.push(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.schema_version),
        );
    }
    if let Some(t) = raw.tol {
        if !(t > 0.0 && t.is_finite()) {
            v.push("tol", format!("must be positive, got {t}"));
        }
    }
    let sampling = resolve_sampling(raw.sampling.as_ref(), raw.seed, &mut v);

    let mut models: HashMap<String, ManifoldModel> = HashMap::new();
    for (i, m) in raw.model.iter().enumerate() {
        let loc = format!("model[{i}] `{}`", m.name);
        if models.contains_key(&m.name) {
            v.push(&loc, "duplicate model name");
            continue;
        }
        if let Some(model) = resolve_model(m, &models, &loc, &mut v) {
            models.insert(m.name.clone(), model);
        }
    }

    let mut forms: HashMap<String, (String, FormField)> = HashMap::new();
    for (i, f) in raw.form.iter().enumerate() {
        let loc = format!("form[{i}] `{}`", f.name);
        if forms.contains_key(&f.name) {
            v.push(&loc, "duplicate form name");
            continue;
        }
        if let Some(form) = resolve_form(f, &models, &loc, &mut v) {
            forms.insert(f.name.clone(), (f.model.clone(), form));
        }
    }

    let mut tasks = Vec::new();
    for (i, t) in raw.task.iter().enumerate() {
        let loc = format!("task[{i}]");
        let ctx = Context {
            models: &models,
            forms: &forms,
            tol: raw.tol,
            sampling,
            global_grid: raw.t_grid.as_deref(),
        };
        if let Some(task) = resolve_task(t, &ctx, &loc, &mut v) {
            tasks.push(task);
        }
    }
    if raw.task.is_empty() {
        v.push("task", "no tasks declared");
    }
    if v.issues.is_empty() {
        Ok(RunConfig {
            seed: raw.seed,
            tol: raw.tol,
            sampling,
            tasks,
        })
    } else {
        Err(ConfigError::Invalid(v.issues))
    }
}

fn resolve_sampling(raw: Option<&RawSampling>, seed: u64, v: &mut Validator) -> Sampling {
    let Some(s) = raw else {
        return Sampling::Auto {
            max_grid: 100_000,
            count: DEFAULT_RANDOM_SAMPLES,
            seed,
        };
    };
    let count = s.count.unwrap_or(DEFAULT_RANDOM_SAMPLES);
    if count == 0 {
        v.push("sampling.count", "must be positive");
    }
    match s.kind.as_str() {
        "auto" => Sampling::Auto {
            max_grid: s.max_grid.unwrap_or(100_000),
            count,
            seed,
        },
        "grid" => match s.resolution {
            Some(r) if r < 4 => {
                v.push("sampling.resolution", format!("at least 4 is required, got {r}"));
                Sampling::Grid
            }
            Some(r) => Sampling::GridResolution(r),
            None => Sampling::Grid,
        },
        "random" => Sampling::Random { count, seed },
        other => {
            v.push("sampling.kind", format!("unknown kind `{other}` (auto, grid, random)"));
            Sampling::Grid
        }
    }
}

fn resolve_model(
    m: &RawModel,
    known: &HashMap<String, ManifoldModel>,
    loc: &str,
    v: &mut Validator,
) -> Option<ManifoldModel> {
    let built = match m.kind.as_str() {
        "builtin" => match m.builtin.as_deref() {
            Some("heisenberg3") => Ok(ManifoldModel::heisenberg3()),
            Some("torus") => match m.dim {
                Some(n) => ManifoldModel::torus(n).map_err(|e| e.to_string()),
                None => Err("builtin torus needs `dim`".to_string()),
            },
            Some("darboux") => match m.dim {
                Some(n) if n % 2 == 1 => darboux_model((n - 1) / 2)
                    .map(|(model, _)| model)
                    .map_err(|e| e.to_string()),
                _ => Err("builtin darboux needs an odd `dim`".to_string()),
            },
            Some(other) => Err(format!("unknown builtin model `{other}` (heisenberg3, torus, darboux)")),
            None => Err("missing `builtin`".to_string()),
        },
        "lie" => match &m.constants {
            Some(c) => LieGroupModel::new(c.clone())
                .map(ManifoldModel::lie)
                .map_err(|e| e.to_string()),
            None => Err("lie model needs `constants`".to_string()),
        },
        "chart" => match &m.axes {
            Some(axes) => {
                let mut out = Vec::new();
                let mut ok = true;
                for (a, ax) in axes.iter().enumerate() {
                    let domain = match ax.domain.as_str() {
                        "periodic" => Domain::Periodic,
                        "interval" => match (ax.lo, ax.hi) {
                            (Some(lo), Some(hi)) => Domain::Interval { lo, hi },
                            _ => {
                                v.push(format!("{loc}.axes[{a}]"), "interval needs `lo` and `hi`");
                                ok = false;
                                continue;
                            }
                        },
                        other => {
                            v.push(format!("{loc}.axes[{a}]"), format!("unknown domain `{other}` (periodic, interval)"));
                            ok = false;
                            continue;
                        }
                    };
                    out.push(ChartAxis {
                        domain,
                        resolution: ax.resolution.unwrap_or(DEFAULT_RESOLUTION),
                    });
                }
                if !ok {
                    return None;
                }
                ChartModel::new(out).map(ManifoldModel::chart).map_err(|e| e.to_string())
            }
            None => Err("chart model needs `axes`".to_string()),
        },
        "product" => match m.factors.as_deref() {
            Some([a, b]) => match (known.get(a), known.get(b)) {
                (Some(l), Some(r)) => match m.coarse_resolution {
                    Some(c) => ManifoldModel::product_with_resolution(l.clone(), r.clone(), c),
                    None => ManifoldModel::product(l.clone(), r.clone()),
                }
                .map_err(|e| e.to_string()),
                _ => Err(format!("factors must name earlier models, got `{a}`, `{b}`")),
            },
            _ => Err("product model needs exactly two `factors`".to_string()),
        },
        other => Err(format!("unknown model kind `{other}` (builtin, lie, chart, product)")),
    };
    match built {
        Ok(m) => Some(m),
        Err(e) => {
            v.push(loc, e);
            None
        }
    }
}

fn resolve_form(
    f: &RawForm,
    models: &HashMap<String, ManifoldModel>,
    loc: &str,
    v: &mut Validator,
) -> Option<FormField> {
    let Some(model) = models.get(&f.model) else {
        v.push(loc, format!("unknown model `{}`", f.model));
        return None;
    };
    let n = model.dim();
    let mut coeffs = Vec::with_capacity(f.coeffs.len());
    let mut ok = true;
    for (i, c) in f.coeffs.iter().enumerate() {
        match c {
            RawCoeff::Num(x) => coeffs.push(Expr::num(*x)),
            RawCoeff::Text(s) => match parse(s, n) {
                Ok(e) => coeffs.push(e),
                Err(e) => {
                    v.push(format!("{loc}.coeffs[{i}]"), e);
                    ok = false;
                }
            },
        }
    }
    if !ok {
        return None;
    }
    let field = match FormField::from_exprs(n, f.degree, coeffs) {
        Ok(field) => field,
        Err(e) => {
            v.push(loc, e);
            return None;
        }
    };
    if let Err(e) = model.check_field(n, field.coeffs()) {
        v.push(loc, e);
        return None;
    }
    Some(field)
}

struct Context<'a> {
    models: &'a HashMap<String, ManifoldModel>,
    forms: &'a HashMap<String, (String, FormField)>,
    tol: Option<f64>,
    sampling: Sampling,
    global_grid: Option<&'a [f64]>,
}

impl Context<'_> {
    fn settings(&self, model: &ManifoldModel) -> Settings {
        let s = Settings::for_model(model).with_sampling(self.sampling);
        match self.tol {
            Some(t) => s.with_tol(t),
            None => s,
        }
    }
}

/// The explicit model plus named forms of a task, all on that model.
struct Explicit {
    model: ManifoldModel,
    forms: HashMap<&'static str, FormField>,
}

fn explicit(t: &RawTask, needed: &[&'static str], ctx: &Context, loc: &str, v: &mut Validator) -> Option<Explicit> {
    let Some(model_name) = &t.model else {
        v.push(loc, "needs `example` or `model` with form names");
        return None;
    };
    let Some(model) = ctx.models.get(model_name) else {
        v.push(loc, format!("unknown model `{model_name}`"));
        return None;
    };
    let mut forms = HashMap::new();
    let mut ok = true;
    for &key in needed {
        let name = match key {
            "alpha" => &t.alpha,
            "beta" => &t.beta,
            "alpha0" => &t.alpha0,
            _ => &t.beta0,
        };
        match name {
            None => {
                v.push(loc, format!("missing `{key}`"));
                ok = false;
            }
            Some(n) => match ctx.forms.get(n) {
                None => {
                    v.push(loc, format!("`{key}` refers to unknown form `{n}`"));
                    ok = false;
                }
                Some((m, _)) if m != model_name => {
                    v.push(loc, format!("form `{n}` lives on model `{m}`, not `{model_name}`"));
                    ok = false;
                }
                Some((_, f)) => {
                    forms.insert(key, f.clone());
                }
            },
        }
    }
    ok.then(|| Explicit {
        model: model.clone(),
        forms,
    })
}

fn pair_type(t: &RawTask, n: usize, loc: &str, v: &mut Validator) -> Option<(usize, usize)> {
    let (Some(k), Some(l)) = (t.k, t.l) else {
        v.push(loc, "missing `k` and `l`");
        return None;
    };
    if 2 * k + 2 * l + 2 != n {
        v.push(
            loc,
            format!("type ({k},{l}) needs dimension 2k+2l+2 = {}, model has {n}", 2 * k + 2 * l + 2),
        );
        return None;
    }
    Some((k, l))
}

fn resolve_task(t: &RawTask, ctx: &Context, loc: &str, v: &mut Validator) -> Option<Task> {
    let Some(kind) = TaskKind::parse(&t.kind) else {
        v.push(
            loc,
            format!(
                "unknown task kind `{}` (classify, verify-pair, deform-forward, deform-converse, single-deform, jacobi, sweep)",
                t.kind
            ),
        );
        return None;
    };
    let t_grid = t
        .t_grid
        .clone()
        .or_else(|| ctx.global_grid.map(<[f64]>::to_vec))
        .unwrap_or_else(|| default_grid(kind));
    if t_grid.is_empty() || t_grid.iter().any(|x| !x.is_finite()) {
        v.push(loc, "t_grid must be a non-empty list of finite numbers");
    }
    if kind == TaskKind::DeformConverse {
        if let Err(e) = check_converse_grid(&t_grid) {
            v.push(loc, e);
        }
    }
    let input = match &t.example {
        Some(name) => from_example(kind, name, t, loc, v)?,
        None => from_explicit(kind, t, ctx, loc, v)?,
    };
    let label = t.label.clone().unwrap_or_else(|| match &t.example {
        Some(e) => format!("{} {e}", kind.name()),
        None => format!("{} {}", kind.name(), t.model.as_deref().unwrap_or("")),
    });
    Some(Task {
        kind,
        label,
        input,
        t_grid,
        output: t.output.clone(),
    })
}

fn from_example(kind: TaskKind, name: &str, t: &RawTask, loc: &str, v: &mut Validator) -> Option<TaskInput> {
    let ex = match example(name) {
        Ok(ex) => ex,
        Err(e) => {
            v.push(loc, e);
            return None;
        }
    };
    let mismatch = |v: &mut Validator, what: &str| {
        v.push(loc, format!("example `{name}` is {what}; it cannot run `{}`", kind.name()));
        None
    };
    match (kind, ex) {
        (TaskKind::Classify, Example::Form { model, alpha }) => Some(TaskInput::Classify { model, alpha }),
        (TaskKind::Classify, Example::SingleDeformation { model, alpha, .. }) => {
            Some(TaskInput::Classify { model, alpha })
        }
        (TaskKind::SingleDeform, Example::SingleDeformation { model, alpha0, alpha }) => {
            Some(TaskInput::Single { model, alpha0, alpha })
        }
        (TaskKind::VerifyPair, Example::Pair { model, alpha, beta, k, l }) => {
            Some(TaskInput::Pair { model, alpha, beta, k, l })
        }
        (TaskKind::VerifyPair, Example::Family(f)) => Some(TaskInput::Pair {
            model: f.model.clone(),
            alpha: f.alpha.clone(),
            beta: f.beta.clone(),
            k: f.k,
            l: f.l,
        }),
        (TaskKind::DeformForward | TaskKind::DeformConverse | TaskKind::Sweep, Example::Family(f)) => {
            Some(TaskInput::Family(f))
        }
        (TaskKind::Jacobi, Example::Pair { model, alpha, beta, k, l }) => {
            jacobi_input(t, model, alpha, beta, k, l, loc, v)
        }
        (TaskKind::Jacobi, Example::Family(f)) => {
            let f = *f;
            jacobi_input(t, f.model, f.alpha, f.beta, f.k, f.l, loc, v)
        }
        (_, Example::Form { .. }) => mismatch(v, "a single contact form"),
        (_, Example::SingleDeformation { .. }) => mismatch(v, "a single-form deformation"),
        (_, Example::Pair { .. }) => mismatch(v, "a contact pair without a deformation"),
        (_, Example::Family(_)) => mismatch(v, "a deformation family"),
    }
}

fn from_explicit(kind: TaskKind, t: &RawTask, ctx: &Context, loc: &str, v: &mut Validator) -> Option<TaskInput> {
    match kind {
        TaskKind::Classify => {
            let mut e = explicit(t, &["alpha"], ctx, loc, v)?;
            Some(TaskInput::Classify {
                alpha: e.forms.remove("alpha")?,
                model: e.model,
            })
        }
        TaskKind::SingleDeform => {
            let mut e = explicit(t, &["alpha0", "alpha"], ctx, loc, v)?;
            Some(TaskInput::Single {
                alpha0: e.forms.remove("alpha0")?,
                alpha: e.forms.remove("alpha")?,
                model: e.model,
            })
        }
        TaskKind::VerifyPair | TaskKind::Jacobi => {
            let mut e = explicit(t, &["alpha", "beta"], ctx, loc, v)?;
            let (k, l) = pair_type(t, e.model.dim(), loc, v)?;
            let (alpha, beta) = (e.forms.remove("alpha")?, e.forms.remove("beta")?);
            if kind == TaskKind::Jacobi {
                jacobi_input(t, e.model, alpha, beta, k, l, loc, v)
            } else {
                Some(TaskInput::Pair {
                    model: e.model,
                    alpha,
                    beta,
                    k,
                    l,
                })
            }
        }
        TaskKind::DeformForward | TaskKind::DeformConverse | TaskKind::Sweep => {
            let mut e = explicit(t, &["alpha0", "beta0", "alpha", "beta"], ctx, loc, v)?;
            let (k, l) = pair_type(t, e.model.dim(), loc, v)?;
            let settings = ctx.settings(&e.model);
            let f = |e: &mut Explicit, key| e.forms.remove(key);
            let (a0, b0, a, b) = (f(&mut e, "alpha0")?, f(&mut e, "beta0")?, f(&mut e, "alpha")?, f(&mut e, "beta")?);
            match DeformationFamily::new(e.model, a0, b0, a, b, k, l, &settings) {
                Ok(fam) => Some(TaskInput::Family(Box::new(fam))),
                Err(err) => {
                    v.push(loc, err);
                    None
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn jacobi_input(
    t: &RawTask,
    model: ManifoldModel,
    alpha: FormField,
    beta: FormField,
    k: usize,
    l: usize,
    loc: &str,
    v: &mut Validator,
) -> Option<TaskInput> {
    let n = model.dim();
    let side = match t.side.as_deref().unwrap_or("alpha") {
        "alpha" => Side::Alpha,
        "beta" => Side::Beta,
        other => {
            v.push(loc, format!("unknown side `{other}` (alpha, beta)"));
            return None;
        }
    };
    // product pairs: the α side lives on the first 2k+1 axes, β on the rest
    let leaf_axes = t.leaf_axes.clone().unwrap_or_else(|| match side {
        Side::Alpha => (0..2 * k + 1).collect(),
        Side::Beta => (n - 2 * l - 1..n).collect(),
    });
    let base = t.base.clone().unwrap_or_else(|| vec![0.0; n]);
    let resolutions = t.resolutions.clone().unwrap_or_else(|| vec![16, 32]);
    let mut ok = true;
    if base.len() != n {
        v.push(loc, format!("`base` needs {n} coordinates"));
        ok = false;
    }
    if resolutions.is_empty() || resolutions.iter().any(|r| *r < 4) {
        v.push(loc, "`resolutions` must be non-empty with every entry at least 4");
        ok = false;
    }
    if let Some(a) = leaf_axes.iter().find(|a| **a >= n || !model.axes()[**a].is_chart()) {
        v.push(loc, format!("leaf axis {a} is not a chart axis of the model"));
        ok = false;
    }
    let var = |i: usize| leaf_axes.get(i).copied().unwrap_or(0);
    let defaults = [
        format!("sin(x{})", var(0)),
        format!("cos(x{}) + sin(x{})", var(1), var(2)),
        format!("sin(x{} + x{})", var(0), var(2)),
    ];
    let texts = t.functions.clone().unwrap_or_else(|| defaults.to_vec());
    if texts.len() != 3 {
        v.push(loc, "`functions` needs exactly three expressions");
        return None;
    }
    let mut parsed = Vec::new();
    for (i, s) in texts.iter().enumerate() {
        match parse(s, n) {
            Ok(e) => parsed.push(e),
            Err(e) => {
                v.push(format!("{loc}.functions[{i}]"), e);
                ok = false;
            }
        }
    }
    let pair = match ContactPair::new(&model, alpha, beta, k, l) {
        Ok(p) => p,
        Err(e) => {
            v.push(loc, e);
            return None;
        }
    };
    if !ok {
        return None;
    }
    let functions: [Expr; 3] = parsed.try_into().ok()?;
    Some(TaskInput::Jacobi(Box::new(JacobiTask {
        model,
        pair,
        side,
        leaf_axes,
        base,
        resolutions,
        functions,
    })))
}

impl JacobiTask {
    pub fn grid(&self, resolution: usize) -> LeafGrid {
        LeafGrid {
            axes: self.leaf_axes.clone(),
            base: self.base.clone(),
            resolution,
        }
    }
}
