use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use graphlf::tactics::{Outcome, DEFAULT_FUEL};
use graphlf_server::cli::{check_document, load_registry, prove};
use graphlf_server::session::SessionStore;
use graphlf_server::{router, AppState, Users};

#[derive(Parser)]
#[command(name = "graphlf", version, about = "Graph-based logical framework")]
struct Cli {
    /// Directory of extra system files (*.glf)
    #[arg(long, global = true, env = "GRAPHLF_SYSTEMS_DIR")]
    systems_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API
    Serve {
        #[arg(long, env = "GRAPHLF_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "GRAPHLF_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Where sessions are saved; in memory if absent
        #[arg(long, env = "GRAPHLF_DATA_DIR")]
        data_dir: Option<PathBuf>,
        /// JSON object of user ids to bearer tokens; no auth if absent
        #[arg(long, env = "GRAPHLF_USERS")]
        users: Option<PathBuf>,
    },
    /// Check a proof document; exits nonzero unless it is a complete proof
    Check { document: PathBuf },
    /// Run a strategy on a goal
    Prove {
        #[arg(long, env = "GRAPHLF_SYSTEM")]
        system: String,
        #[arg(long, env = "GRAPHLF_GOAL")]
        goal: String,
        #[arg(long, env = "GRAPHLF_STRATEGY", default_value = "auto")]
        strategy: String,
        #[arg(long, env = "GRAPHLF_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Write the proof document here on success
        #[arg(long, env = "GRAPHLF_EXPORT")]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let reg = match load_registry(cli.systems_dir.as_deref()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match cli.command {
        Command::Serve {
            port,
            host,
            data_dir,
            users,
        } => serve(reg, &host, port, data_dir, users),
        Command::Check { document } => {
            let text = match std::fs::read_to_string(&document) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {}: {e}", document.display());
                    return ExitCode::from(2);
                }
            };
            match check_document(&reg, &text) {
                Ok(p) if p.is_complete() => {
                    println!("valid: {}", p.report());
                    ExitCode::SUCCESS
                }
                Ok(p) => {
                    println!("incomplete: {}", p.report());
                    ExitCode::FAILURE
                }
                Err(e) => {
                    println!("invalid: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Prove {
            system,
            goal,
            strategy,
            fuel,
            export,
        } => match prove(&reg, &system, &goal, &strategy, fuel) {
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Ok((proof, run)) => {
                println!("{} after {} applications", run.outcome.name(), run.fuel_used);
                let Outcome::Success { trace } = &run.outcome else {
                    return ExitCode::FAILURE;
                };
                for s in trace {
                    println!("  {}", serde_json::to_string(s).expect("steps serialize"));
                }
                if let Some(path) = export {
                    if let Err(e) = std::fs::write(&path, proof.export().to_json()) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                ExitCode::SUCCESS
            }
        },
    }
}

fn serve(
    reg: graphlf::systems::Registry,
    host: &str,
    port: u16,
    data_dir: Option<PathBuf>,
    users: Option<PathBuf>,
) -> ExitCode {
    let setup = || -> Result<AppState, graphlf_server::ServerError> {
        let users = users.as_deref().map(Users::load).transpose()?;
        let sessions = match &data_dir {
            Some(d) => SessionStore::open(d, &reg)?,
            None => SessionStore::in_memory(),
        };
        Ok(AppState::new(reg.clone(), users, sessions))
    };
    let state = match setup() {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    rt.block_on(async move {
        let listener = match tokio::net::TcpListener::bind((host, port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind {host}:{port}: {e}");
                return ExitCode::from(2);
            }
        };
        eprintln!(
            "listening on http://{} ({} sessions loaded)",
            listener.local_addr().expect("bound"),
            state.sessions.len()
        );
        match axum::serve(listener, router(state)).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        }
    })
}
