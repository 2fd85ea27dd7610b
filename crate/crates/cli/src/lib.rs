//! Operator entry points behind the `newsduel` binary.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use newsduel_core::analysis::{pre_post_report, AnalysisError, Dataset, Instruments, Report};
use newsduel_core::game::{GameConfig, GameError, GameState, Outcome, Role, Winner};
use newsduel_core::log::{read_records, replay_records, LogError, MatchLog};
use newsduel_core::opinion::{HeuristicBackend, OpinionBackend};
use newsduel_core::default_config;
use newsduel_llm::{LlmBackend, LlmSettings};
use newsduel_server::hub::{generate_code, DEFAULT_MAX_ROOMS};
use newsduel_server::{BackendChoice, ClientMessage, ErrorCode, Hub, HubConfig, Room, ServerMessage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use tracing::info;

mod policy;

pub use policy::{BotPolicy, ScriptedTurn};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("{role} policy has no message for round {round}")]
    PolicyExhausted { role: Role, round: u32 },
    #[error("opinion backend failed: {0}")]
    BackendFailure(String),
    #[error("player model failed: {0}")]
    Player(newsduel_llm::LlmError),
    #[error("{role} move refused ({code:?}): {detail}")]
    Refused { role: Role, code: ErrorCode, detail: String },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("bad game config: {0}")]
    Config(#[from] GameError),
}

/// A finished in-process match.
#[derive(Debug)]
pub struct Simulation {
    pub outcome: Outcome,
    pub log_path: PathBuf,
    pub room_code: String,
    pub state: GameState,
}

/// Plays a whole match between two bots without a network, logging to
/// `log_dir` like the server does. Same seed, deterministic policies and the
/// heuristic backend give the same log apart from wall times.
pub fn run_simulation(
    config: Arc<GameConfig>,
    p1: BotPolicy,
    p2: BotPolicy,
    backend: Arc<dyn OpinionBackend>,
    seed: u64,
    log_dir: &Path,
) -> Result<Simulation, SimError> {
    config.validate()?;
    p1.validate(&config, Role::Influencer)?;
    p2.validate(&config, Role::Debunker)?;

    let code = generate_code(&mut ChaCha8Rng::seed_from_u64(seed));
    let log = MatchLog::create(log_dir, &code)?;
    let log_path = log.path().to_path_buf();
    let mut room = Room::new(code.clone(), Arc::clone(&config), backend, Some(log))
        .map_err(|e| SimError::InvalidPolicy(e.to_string()))?;
    let mut bots = [policy::Bot::new(Role::Influencer, p1), policy::Bot::new(Role::Debunker, p2)];

    while let Some(role) = room.state().actor() {
        let bot = &mut bots[match role {
            Role::Influencer => 0,
            Role::Debunker => 1,
        }];
        let turn = bot.next_turn(room.state())?;
        for hint_id in turn.hints {
            refused(role, room.handle(role, ClientMessage::PurchaseHint { hint_id }))?;
        }
        refused(role, room.handle(role, ClientMessage::PublishMessage { text: turn.message }))?;
    }

    let state = room.state().clone();
    let outcome = state.winner()?.clone();
    info!(room = %code, winner = ?outcome.winner, "simulation finished");
    Ok(Simulation { outcome, log_path, room_code: code, state })
}

fn refused(role: Role, out: Vec<newsduel_server::room::Outbound>) -> Result<(), SimError> {
    for o in out {
        if let ServerMessage::Error { code, detail } = o.msg {
            return Err(match code {
                ErrorCode::BackendFailure => SimError::BackendFailure(detail),
                code => SimError::Refused { role, code, detail },
            });
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("bad game config in {path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error("{0}")]
    Usage(String),
}

/// The bundled config, or the JSON file at `path`.
pub fn load_config(path: Option<&Path>) -> Result<GameConfig, CliError> {
    let Some(path) = path else {
        return Ok(default_config());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { context: format!("reading {}", path.display()), source })?;
    GameConfig::from_json(&text).map_err(|e| CliError::Config { path: path.into(), reason: e.to_string() })
}

/// Builds the backend the operator asked for.
pub fn make_backend(choice: BackendChoice) -> Arc<dyn OpinionBackend> {
    match choice {
        BackendChoice::Heuristic => Arc::new(HeuristicBackend),
        BackendChoice::Llm => Arc::new(LlmBackend::new(LlmSettings::from_env())),
    }
}

pub struct ServeOptions {
    pub listen: String,
    pub backend: BackendChoice,
    pub config: GameConfig,
    pub log_dir: PathBuf,
    pub max_rooms: usize,
}

impl ServeOptions {
    pub fn new(listen: impl Into<String>, backend: BackendChoice, config: GameConfig, log_dir: PathBuf) -> Self {
        ServeOptions { listen: listen.into(), backend, config, log_dir, max_rooms: DEFAULT_MAX_ROOMS }
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve_command(opts: ServeOptions) -> Result<(), CliError> {
    std::fs::create_dir_all(&opts.log_dir)
        .map_err(|source| CliError::Io { context: format!("creating {}", opts.log_dir.display()), source })?;
    let listener = tokio::net::TcpListener::bind(&opts.listen)
        .await
        .map_err(|source| CliError::Io { context: format!("binding {}", opts.listen), source })?;
    let mut backends: HashMap<BackendChoice, Arc<dyn OpinionBackend>> = HashMap::new();
    backends.insert(BackendChoice::Heuristic, make_backend(BackendChoice::Heuristic));
    let settings = LlmSettings::from_env();
    if opts.backend == BackendChoice::Llm || settings.api_key.is_some() {
        backends.insert(BackendChoice::Llm, Arc::new(LlmBackend::new(settings)));
    }
    let hub = Hub::new(HubConfig {
        game: Arc::new(opts.config),
        backends,
        default_backend: opts.backend,
        log_dir: Some(opts.log_dir),
        max_rooms: opts.max_rooms,
    });
    newsduel_server::serve(listener, hub)
        .await
        .map_err(|source| CliError::Io { context: "serving".into(), source })
}

/// What `replay` prints.
#[derive(Debug)]
pub struct ReplaySummary {
    pub path: PathBuf,
    pub records: usize,
    pub state: GameState,
}

pub fn replay_command(path: &Path, config: GameConfig) -> Result<ReplaySummary, CliError> {
    let records = read_records(path).map_err(|e| match e {
        LogError::Io(source) => CliError::Io { context: format!("reading {}", path.display()), source },
        other => other.into(),
    })?;
    let state = replay_records(&records, config)?;
    Ok(ReplaySummary { path: path.into(), records: records.len(), state })
}

fn winner_label(w: Winner) -> &'static str {
    match w {
        Winner::Player1 => "Player 1 (influencer) wins",
        Winner::Player2 => "Player 2 (debunker) wins",
        Winner::Draw => "draw",
    }
}

impl ReplaySummary {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let st = &self.state;
        let _ = writeln!(s, "log: {}", self.path.display());
        let _ = writeln!(s, "records: {}", self.records);
        for t in st.turns() {
            let trusts: Vec<String> = t.resulting_opinion.trusts().map(|x| x.to_string()).collect();
            let _ = writeln!(
                s,
                "round {} {}: {:?} -> trust [{}] sum {}",
                t.round,
                t.role.player_label(),
                t.message,
                trusts.join(", "),
                t.resulting_opinion.trust_sum()
            );
        }
        for h in st.purchased_hints() {
            let _ = writeln!(s, "hint: round {} {} bought {}", h.round, h.role.player_label(), h.hint_id);
        }
        let c = st.currency();
        let _ = writeln!(s, "currency: influencer {}, debunker {}", c.influencer, c.debunker);
        match st.outcome() {
            Some(o) => {
                let _ = writeln!(
                    s,
                    "outcome: {} (final trust sum {}, currency {}/{})",
                    winner_label(o.winner),
                    o.final_trust_sum,
                    o.final_currency.influencer,
                    o.final_currency.debunker
                );
            }
            None => {
                let _ = writeln!(s, "outcome: unfinished (round {} of {})", st.round(), st.config().rounds_total);
            }
        }
        s
    }

    /// True if the log ends with its finish record.
    pub fn has_finish_record(&self) -> bool {
        self.state.finish_announced()
    }
}

/// Report format picked from the output extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn for_path(path: &Path) -> Result<Self, CliError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("md" | "markdown") => Ok(ReportFormat::Markdown),
            Some("csv") => Ok(ReportFormat::Csv),
            _ => Err(CliError::Usage(format!("cannot tell report format of {}; use .md or .csv", path.display()))),
        }
    }
}

/// Reads responses, runs every pre/post test and writes the report.
pub fn analyze_command(input: &Path, out: &Path, instruments: Option<&Path>) -> Result<Report, CliError> {
    let format = ReportFormat::for_path(out)?;
    let instruments = match instruments {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|source| CliError::Io { context: format!("reading {}", p.display()), source })?;
            Instruments::from_json(&text)?
        }
        None => Instruments::default(),
    };
    let file = std::fs::File::open(input)
        .map_err(|source| CliError::Io { context: format!("reading {}", input.display()), source })?;
    let data = Dataset::from_reader(file)?;
    let report = pre_post_report(&data, &instruments)?;
    let text = match format {
        ReportFormat::Markdown => report.to_markdown(),
        ReportFormat::Csv => report.to_csv(),
    };
    std::fs::write(out, text).map_err(|source| CliError::Io { context: format!("writing {}", out.display()), source })?;
    Ok(report)
}
