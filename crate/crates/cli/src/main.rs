use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use aspkb_cli::server::{router, Workspace};
use aspkb_cli::{
    evaluate_dir, load_model, read_model_json, render_layout, reports_json, run_parse, write_text, CliError,
    LayoutFormat, ViewParams, DEFAULT_PORT, PORT_ENV,
};
use aspkb_core::eval::EvalConfig;
use aspkb_core::export::to_json;
use aspkb_core::features::FeatureKinds;
use aspkb_core::model::ConstraintKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aspkb", version, about = "Explore ASP visualization knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a knowledge base and write its AST as JSON.
    Parse {
        kb: PathBuf,
        #[arg(short = 'o', long = "output")]
        out: Option<PathBuf>,
    },
    /// Extract constraints, weights, hierarchy and features.
    Model {
        kb: PathBuf,
        /// `#const <id>_weight = n.` declarations; defaults to the KB's own.
        #[arg(short, long)]
        weights: Option<PathBuf>,
        #[arg(short = 'o', long = "output")]
        out: Option<PathBuf>,
    },
    /// Lay out one constraint view of a model as JSON or SVG.
    Layout {
        model: PathBuf,
        #[arg(long = "type", default_value = "soft")]
        kind: ConstraintKind,
        #[arg(long, default_value = "predicates,variables")]
        features: FeatureKinds,
        #[arg(long, default_value_t = 2)]
        min_degree: usize,
        #[arg(long, alias = "out", default_value = "json")]
        format: LayoutFormat,
        #[arg(short = 'o', long = "output")]
        out: Option<PathBuf>,
    },
    /// Score every `*.lp` spec in a directory and write ranked reports.
    Eval {
        model: PathBuf,
        specs: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_witnesses: usize,
        #[arg(short = 'o', long = "output")]
        out: Option<PathBuf>,
    },
    /// Serve the model, layouts and reports over HTTP.
    Serve {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        specs: Option<PathBuf>,
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn warn_all(lines: &[String]) {
    for l in lines {
        eprintln!("{l}");
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Parse { kb, out } => {
            let run = run_parse(&kb)?;
            warn_all(&run.diagnostics);
            emit(out.as_deref(), &run.json)?;
            return Ok(if run.has_errors { ExitCode::from(1) } else { ExitCode::SUCCESS });
        }
        Command::Model { kb, weights, out } => {
            let (doc, warnings) = load_model(&kb, weights.as_deref())?;
            warn_all(&warnings);
            emit(out.as_deref(), &to_json(&doc))?;
            let summary = doc.counts.summary_line();
            // keep stdout pure JSON when the document goes there
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
        Command::Layout { model, kind, features, min_degree, format, out } => {
            let doc = read_model_json(&model)?;
            let view = ViewParams { kind, features, min_degree };
            emit(out.as_deref(), &render_layout(&doc, view, format)?)?;
        }
        Command::Eval { model, specs, max_witnesses, out } => {
            let doc = read_model_json(&model)?;
            let reports = evaluate_dir(&doc, &specs, &EvalConfig { max_witnesses })?;
            emit(out.as_deref(), &reports_json(reports))?;
        }
        Command::Serve { kb, weights, specs, port, host } => {
            let (model, warnings) = load_model(&kb, weights.as_deref())?;
            warn_all(&warnings);
            let eval_config = EvalConfig::default();
            let reports = match &specs {
                Some(dir) => evaluate_dir(&model, dir, &eval_config)?,
                None => Vec::new(),
            };
            let ws = Arc::new(Workspace { model, reports, eval_config });
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Invalid(e.to_string()))?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|source| CliError::Io { path: PathBuf::from(addr.to_string()), source })?;
                eprintln!("listening on http://{addr}");
                axum::serve(listener, router(ws)).await.map_err(|e| CliError::Invalid(e.to_string()))
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad arguments are invalid input, like a bad file; 2 stays reserved for I/O
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("aspkb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
