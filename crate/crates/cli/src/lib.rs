//! Pipeline commands and the read-only HTTP service behind `aspkb`.

pub mod server;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use aspkb_core::eval::{evaluate_batch, EvalConfig, EvalError, FactSet, ViolationReport};
use aspkb_core::export::{to_json, LayoutDocument, ModelDocument, ReportList, ReportsDocument, Versioned};
use aspkb_core::features::{extract_features, FeatureKinds};
use aspkb_core::layout::{render_svg, LayoutConfig, LayoutError, LayoutModel, SvgOptions};
use aspkb_core::model::{extract_constraints, extract_weights, scan_weight_declarations, ConstraintKind};
use aspkb_core::parser::{ast_to_json, parse_program, ParseDiagnostic};
use sha2::{Digest, Sha256};

pub const PORT_ENV: &str = "ASPKB_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// Exit status: 1 for invalid input, 2 for I/O failures.
#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Invalid(_) => 1,
        }
    }

    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.to_path_buf(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(CliError::io(path)).map(|s| s.replace("\r\n", "\n"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn source_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

pub fn render_diagnostic(source: &str, d: &ParseDiagnostic) -> String {
    let kind = if d.is_error() { "error" } else { "warning" };
    format!("{source}: {kind}: {d}")
}

/// Output of `parse`: the AST document plus diagnostics for standard error.
pub struct ParseRun {
    pub json: String,
    pub diagnostics: Vec<String>,
    pub has_errors: bool,
}

pub fn run_parse(kb_path: &Path) -> Result<ParseRun, CliError> {
    let text = read_text(kb_path)?;
    let name = source_name(kb_path);
    let out = parse_program(&text, &name);
    let mut json = ast_to_json(&out.program);
    json.push('\n');
    Ok(ParseRun {
        json,
        diagnostics: out.diagnostics.iter().map(|d| render_diagnostic(&name, d)).collect(),
        has_errors: out.has_errors(),
    })
}

/// Builds the model from knowledge-base text and optional weights text.
/// Without a weights file, `#const` declarations in the KB itself are used.
pub fn build_model(
    kb_name: &str,
    kb_text: &str,
    weights: Option<(&str, &str)>,
) -> Result<(ModelDocument, Vec<String>), CliError> {
    let parsed = parse_program(kb_text, kb_name);
    let mut warnings: Vec<String> = parsed.diagnostics.iter().map(|d| render_diagnostic(kb_name, d)).collect();
    if parsed.has_errors() {
        return Err(CliError::Invalid(warnings.join("\n")));
    }
    let mut inputs = BTreeMap::from([(kb_name.to_string(), sha256_hex(kb_text.as_bytes()))]);
    let set = extract_constraints(&parsed);
    let set = match weights {
        Some((name, text)) => {
            inputs.insert(name.to_string(), sha256_hex(text.as_bytes()));
            let wp = parse_program(text, name);
            let program = if wp.has_errors() { scan_weight_declarations(text, name) } else { wp.program };
            extract_weights(&program, set)
        }
        None => extract_weights(&parsed.program, set),
    };
    warnings.extend(set.diagnostics.iter().map(|d| format!("{kb_name}: warning: {d}")));
    let incidences = extract_features(&set, FeatureKinds::ALL);
    Ok((ModelDocument::new(set, incidences, inputs), warnings))
}

pub fn load_model(kb_path: &Path, weights_path: Option<&Path>) -> Result<(ModelDocument, Vec<String>), CliError> {
    let kb_text = read_text(kb_path)?;
    let weights = match weights_path {
        Some(p) => Some((source_name(p), read_text(p)?)),
        None => None,
    };
    build_model(&source_name(kb_path), &kb_text, weights.as_ref().map(|(n, t)| (n.as_str(), t.as_str())))
}

pub fn read_model_json(path: &Path) -> Result<ModelDocument, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: not a model document: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayoutFormat {
    Json,
    Svg,
}

impl std::str::FromStr for LayoutFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(LayoutFormat::Json),
            "svg" => Ok(LayoutFormat::Svg),
            other => Err(format!("unknown format {other:?} (expected json or svg)")),
        }
    }
}

/// View parameters shared by `layout`, `/api/hypergraph` and `/api/layout`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ViewParams {
    pub kind: ConstraintKind,
    pub features: FeatureKinds,
    pub min_degree: usize,
}

impl Default for ViewParams {
    fn default() -> Self {
        ViewParams { kind: ConstraintKind::Soft, features: FeatureKinds::ALL, min_degree: 2 }
    }
}

pub fn layout_of(model: &ModelDocument, view: ViewParams) -> Result<LayoutModel, CliError> {
    model
        .layout(view.kind, view.features, view.min_degree, &LayoutConfig::default())
        .map_err(|e: LayoutError| CliError::Invalid(e.to_string()))
}

pub fn render_layout(model: &ModelDocument, view: ViewParams, format: LayoutFormat) -> Result<String, CliError> {
    let layout = layout_of(model, view)?;
    Ok(match format {
        LayoutFormat::Json => to_json(&LayoutDocument::new(layout)),
        LayoutFormat::Svg => render_svg(&layout, &SvgOptions::default()),
    })
}

/// Reads every `*.lp` file of `dir` as one specification named after the
/// file stem, in name order.
pub fn read_specs(dir: &Path) -> Result<Vec<FactSet>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(CliError::io(dir))?
        .map(|e| e.map(|e| e.path()).map_err(CliError::io(dir)))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "lp") && p.is_file());
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            FactSet::parse(&name, &read_text(p)?).map_err(|e| CliError::Invalid(describe_eval_error(&e)))
        })
        .collect()
}

pub fn describe_eval_error(e: &EvalError) -> String {
    match e {
        EvalError::InvalidFacts { spec, diagnostics } => {
            let mut lines = vec![e.to_string()];
            lines.extend(diagnostics.iter().map(|d| render_diagnostic(spec, d)));
            lines.join("\n")
        }
        other => other.to_string(),
    }
}

pub fn evaluate_dir(
    model: &ModelDocument,
    specs_dir: &Path,
    config: &EvalConfig,
) -> Result<Vec<ViolationReport>, CliError> {
    let specs = read_specs(specs_dir)?;
    evaluate_batch(&model.set, &specs, config).map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn reports_json(reports: Vec<ViolationReport>) -> String {
    let doc: ReportsDocument = Versioned::new(ReportList { reports });
    to_json(&doc)
}
