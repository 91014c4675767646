use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;
use vpsim_core::engine::build_bundle;
use vpsim_core::gateway::request_body;
use vpsim_core::prompt::assemble;
use vpsim_core::script::{load_script, CasePrompt, CategoryManifest, ScriptError};
use vpsim_core::study::write_bundle;
use vpsim_service::config::SAMPLE_CONFIG;
use vpsim_service::{analytics, build_state, router, ApiConfig, FileStore, Overrides};

#[derive(Parser)]
#[command(name = "vpsim", version, about = "Virtual-patient simulation service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(short, long, default_value = "vpsim.toml")]
        config: PathBuf,
    },
    /// Write a sample config and seed the storage directory.
    Init {
        #[arg(default_value = ".")]
        dir: PathBuf,
    },
    /// Validate illness script files.
    CheckScript {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Category manifest; the bundled one if omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Print the prompt plan for the first turn with a script.
    RenderPlan {
        script: PathBuf,
        #[arg(short, long)]
        message: String,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Print the provider request body instead of the plan.
        #[arg(long)]
        request_body: bool,
        /// Config providing model settings for --request-body.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the export bundle from stored sessions.
    Export {
        #[arg(short, long, default_value = "vpsim.toml")]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn manifest(path: Option<&PathBuf>) -> anyhow::Result<CategoryManifest> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            CategoryManifest::from_toml(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
        }
        None => Ok(CategoryManifest::bundled()),
    }
}

async fn serve(config: PathBuf) -> anyhow::Result<()> {
    let config = ApiConfig::load(&config)?;
    let state = Arc::new(build_state(&config, Overrides::default())?);
    if state.admin_token.is_none() {
        tracing::warn!(var = %config.admin_token_ref, "admin token not set; admin routes disabled");
    }
    let listener = tokio::net::TcpListener::bind(&config.bind_address)
        .await
        .with_context(|| format!("cannot bind {}", config.bind_address))?;
    tracing::info!(address = %listener.local_addr()?, model = %config.provider.model_id, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn init(dir: PathBuf) -> anyhow::Result<()> {
    std::fs::create_dir_all(&dir)?;
    let config_path = dir.join("vpsim.toml");
    if config_path.exists() {
        println!("kept {}", config_path.display());
    } else {
        std::fs::write(&config_path, SAMPLE_CONFIG)?;
        println!("wrote {}", config_path.display());
    }
    let config = ApiConfig::load(&config_path)?;
    let store = FileStore::open(&config.storage_path)?;
    for path in store.seed_data_files()? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn check_scripts(files: &[PathBuf], manifest_path: Option<&PathBuf>) -> anyhow::Result<bool> {
    let manifest = manifest(manifest_path)?;
    let mut ok = true;
    for file in files {
        let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
        match load_script(&text, &manifest) {
            Ok(script) => println!("{}: ok ({}, {})", file.display(), script.style, script.locale),
            Err(ScriptError::Invalid(report)) => {
                ok = false;
                for violation in report.violations() {
                    println!("{}: {}: {}", file.display(), violation.key, violation.message);
                }
            }
            Err(e) => {
                ok = false;
                println!("{}: {e}", file.display());
            }
        }
    }
    Ok(ok)
}

fn render_plan(
    script: PathBuf,
    message: String,
    manifest_path: Option<&PathBuf>,
    body: bool,
    config: Option<PathBuf>,
) -> anyhow::Result<()> {
    let manifest = manifest(manifest_path)?;
    let text = std::fs::read_to_string(&script).with_context(|| format!("cannot read {}", script.display()))?;
    let script = load_script(&text, &manifest)?;
    let case = CasePrompt::new(&script, &manifest);
    let plan = assemble(&case, &[], &message)?;
    if body {
        let provider = match config {
            Some(path) => ApiConfig::load(&path)?.provider,
            None => ApiConfig::from_toml(SAMPLE_CONFIG)?.provider,
        };
        println!("{}", request_body(&plan, &provider));
    } else {
        println!("{}", plan.canonical_json());
    }
    Ok(())
}

fn export(config: PathBuf, out: PathBuf) -> anyhow::Result<()> {
    let config = ApiConfig::load(&config)?;
    let state = build_state(&config, Overrides::default())?;
    let questionnaire = state
        .hub
        .questionnaire(config.locales[0])
        .context("no questionnaire for the first locale")?;
    let sessions = state.hub.list();
    let metrics = analytics::study_metrics(&sessions, &questionnaire, &state.adjectives)?;
    let bundle = build_bundle(&sessions, serde_json::to_value(metrics)?);
    write_bundle(&bundle, &out)?;
    println!("exported {} sessions to {}", bundle.sessions.len(), out.display());
    Ok(())
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve { config } => serve(config).await,
        Command::Init { dir } => init(dir),
        Command::CheckScript { files, manifest } => match check_scripts(&files, manifest.as_ref()) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::RenderPlan {
            script,
            message,
            manifest,
            request_body,
            config,
        } => render_plan(script, message, manifest.as_ref(), request_body, config),
        Command::Export { config, out } => export(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
