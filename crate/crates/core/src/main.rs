//! `deckforge generate` (batch) and `deckforge serve` (HTTP).

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use deckforge::lm::{BackendKind, LmConfig, LmGateway};
use deckforge::service::{run_batch, serve, BatchJob};
use deckforge::session::{SessionConfig, Store};
use deckforge::slides::{DetailLevel, GenerationParams, MAX_TOP_K};

#[derive(Parser)]
#[command(name = "deckforge", version, about = "Outline-driven slide decks from Jupyter notebooks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Backend {
    /// Language model backend.
    #[arg(long, default_value = "heuristic")]
    backend: BackendKind,
    /// Replay fixture file (JSON Lines) for `--backend replay`.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// TOML file with language model settings; the backend flags win.
    #[arg(long)]
    lm_config: Option<PathBuf>,
}

impl Backend {
    fn config(&self) -> Result<LmConfig, String> {
        let mut config = match &self.lm_config {
            Some(path) => LmConfig::from_toml_file(path).map_err(|e| e.to_string())?,
            None => LmConfig::default(),
        };
        config.apply_env();
        config.backend_kind = self.backend;
        if self.replay.is_some() {
            config.replay_path = self.replay.clone();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a deck from a notebook and a plain-text outline.
    Generate {
        #[arg(long)]
        notebook: PathBuf,
        /// Topics unindented, sub-topics indented by exactly two spaces.
        #[arg(long)]
        outline: PathBuf,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=MAX_TOP_K as i64))]
        top_k: u8,
        #[arg(long, default_value = "concise")]
        detail: DetailLevel,
        #[arg(long)]
        page_numbers: bool,
        /// Retrieve code cells only.
        #[arg(long)]
        exclude_markdown: bool,
        #[command(flatten)]
        backend: Backend,
        #[arg(long)]
        out_pptx: PathBuf,
        #[arg(long)]
        out_html: Option<PathBuf>,
        /// Write the HTML in present mode.
        #[arg(long)]
        present: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory for session logs; sessions found there are restored.
        #[arg(long)]
        log_dir: Option<PathBuf>,
        #[command(flatten)]
        backend: Backend,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    match cli.command {
        Command::Generate {
            notebook,
            outline,
            top_k,
            detail,
            page_numbers,
            exclude_markdown,
            backend,
            out_pptx,
            out_html,
            present,
        } => {
            let lm = match backend.config() {
                Ok(lm) => lm,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(4);
                }
            };
            let job = BatchJob {
                notebook_path: notebook,
                outline_path: outline,
                params: GenerationParams {
                    top_k: top_k as usize,
                    detail_level: detail,
                    page_numbers,
                    include_markdown: !exclude_markdown,
                },
                lm,
                out_pptx: Some(out_pptx),
                out_html,
                present,
            };
            match run_batch(&job) {
                Ok(report) => {
                    let json = serde_json::to_string_pretty(&report).expect("report serializes");
                    // A closed stdout is not a generation failure.
                    let _ = writeln!(std::io::stdout(), "{json}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Serve { addr, log_dir, backend } => {
            let gateway = backend.config().map_err(|e| e.to_string()).and_then(|c| LmGateway::new(c).map_err(|e| e.to_string()));
            let gateway = match gateway {
                Ok(gw) => Arc::new(gw),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(4);
                }
            };
            let store = match Store::new(gateway, SessionConfig { log_dir, ..SessionConfig::default() }) {
                Ok(store) => Arc::new(store),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
            match runtime.block_on(serve(addr, store)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
