use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use newsduel_cli::{
    analyze_command, load_config, make_backend, replay_command, run_simulation, serve_command, BotPolicy, CliError,
    ServeOptions,
};
use newsduel_core::game::Role;
use newsduel_core::log::DEFAULT_LOG_DIR;
use newsduel_server::{BackendChoice, DEFAULT_MAX_ROOMS};
use tracing_subscriber::EnvFilter;

/// Two-player misinformation game: host, simulate, replay and analyze.
#[derive(Parser)]
#[command(name = "newsduel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Host matches over WebSocket at /ws.
    Serve {
        /// Address to listen on.
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: String,
        /// Default opinion backend for new rooms (heuristic or llm).
        #[arg(long, default_value = "heuristic")]
        backend: BackendChoice,
        /// Game content JSON; the bundled story when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for match logs.
        #[arg(long, default_value = DEFAULT_LOG_DIR)]
        log_dir: PathBuf,
        /// Most rooms open at once.
        #[arg(long, default_value_t = DEFAULT_MAX_ROOMS)]
        max_rooms: usize,
    },
    /// Play one headless match between two bots.
    Simulate {
        /// Game content JSON; the bundled story when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Player 1 policy: scripted, scripted:<path>, template, template:<seed> or llm.
        #[arg(long, default_value = "scripted")]
        p1: String,
        /// Player 2 policy, same forms as --p1.
        #[arg(long, default_value = "scripted")]
        p2: String,
        /// Opinion backend (heuristic or llm).
        #[arg(long, default_value = "heuristic")]
        backend: BackendChoice,
        /// Seed for the room code and template players.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the match log.
        #[arg(long, default_value = DEFAULT_LOG_DIR)]
        log_dir: PathBuf,
    },
    /// Rebuild a match from its log and print a summary.
    Replay {
        /// Match log to read.
        path: PathBuf,
        /// Game content the match was played with; the bundled story when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the pre/post Wilcoxon tests on survey responses.
    Analyze {
        /// Wide CSV of responses, one row per participant and phase.
        #[arg(long)]
        input: PathBuf,
        /// Report file; .md for a Markdown table, .csv for CSV.
        #[arg(long)]
        out: PathBuf,
        /// Scoring key JSON; the bundled key when omitted.
        #[arg(long)]
        instruments: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Serve { listen, backend, config, log_dir, max_rooms } => {
            let config = load_config(config.as_deref())?;
            let mut opts = ServeOptions::new(listen, backend, config, log_dir);
            opts.max_rooms = max_rooms;
            let rt = tokio::runtime::Runtime::new()
                .map_err(|source| CliError::Io { context: "starting runtime".into(), source })?;
            rt.block_on(serve_command(opts))
        }
        Command::Simulate { config, p1, p2, backend, seed, log_dir } => {
            let config = Arc::new(load_config(config.as_deref())?);
            let p1 = BotPolicy::parse(&p1, Role::Influencer, seed)?;
            let p2 = BotPolicy::parse(&p2, Role::Debunker, seed)?;
            std::fs::create_dir_all(&log_dir)
                .map_err(|source| CliError::Io { context: format!("creating {}", log_dir.display()), source })?;
            let sim = run_simulation(config, p1, p2, make_backend(backend), seed, &log_dir)?;
            let o = &sim.outcome;
            println!("room: {}", sim.room_code);
            println!("log: {}", sim.log_path.display());
            println!(
                "outcome: {:?} (final trust sum {}, currency {}/{})",
                o.winner, o.final_trust_sum, o.final_currency.influencer, o.final_currency.debunker
            );
            Ok(())
        }
        Command::Replay { path, config } => {
            let summary = replay_command(&path, load_config(config.as_deref())?)?;
            print!("{}", summary.render());
            Ok(())
        }
        Command::Analyze { input, out, instruments } => {
            let report = analyze_command(&input, &out, instruments.as_deref())?;
            println!("{} participants, {} measures -> {}", report.participants, report.rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
