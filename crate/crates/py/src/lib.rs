//! Python bindings. Structured results cross the boundary as JSON text or
//! plain tuples so the Python side needs nothing beyond the stdlib.

use std::path::PathBuf;
use std::sync::Arc;

use newsduel_cli::{analyze_command, run_simulation, BotPolicy, CliError};
use newsduel_core::analysis::wilcoxon_signed_rank;
use newsduel_core::game::{determine_winner, GameConfig, PerRole, PersonaOpinion, PublicOpinion, Role, Trust, Winner};
use newsduel_core::log::replay;
use newsduel_core::opinion::{
    assemble_system_prompt, parse_opinion_response, render_opinion_response, HeuristicBackend,
};
use newsduel_core::default_config;
use newsduel_server::{ClientMessage, Room, ServerMessage};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_from(json: Option<&str>) -> PyResult<GameConfig> {
    match json {
        Some(text) => GameConfig::from_json(text).map_err(value_err),
        None => Ok(default_config()),
    }
}

fn role_from(name: &str) -> PyResult<Role> {
    name.parse().map_err(value_err)
}

fn winner_name(w: Winner) -> &'static str {
    match w {
        Winner::Player1 => "player1",
        Winner::Player2 => "player2",
        Winner::Draw => "draw",
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// The bundled game content as JSON.
#[pyfunction]
fn default_config_json() -> String {
    to_json(&default_config())
}

/// The opinion model's system prompt for `config_json` (or the bundled story).
#[pyfunction]
#[pyo3(signature = (config_json=None))]
fn system_prompt(config_json: Option<&str>) -> PyResult<String> {
    assemble_system_prompt(&config_from(config_json)?).map_err(value_err)
}

/// Winner for a final panel: "player1", "player2" or "draw".
#[pyfunction]
fn winner(trusts: Vec<u8>, influencer_currency: u32, debunker_currency: u32) -> PyResult<&'static str> {
    let opinions = trusts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            Ok(PersonaOpinion { persona_id: format!("p{}", i + 1), reaction: String::new(), trust: Trust::new(t).map_err(value_err)? })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let panel = PublicOpinion::new(opinions).map_err(value_err)?;
    Ok(winner_name(determine_winner(&panel, PerRole::new(influencer_currency, debunker_currency)).winner))
}

/// Signed-rank test on `post - pre`:
/// `(n_effective, w_plus, w_minus, z, p_two_sided, method)`.
#[pyfunction]
fn wilcoxon(pre: Vec<f64>, post: Vec<f64>) -> PyResult<(usize, f64, f64, f64, f64, String)> {
    let r = wilcoxon_signed_rank(&pre, &post).map_err(value_err)?;
    let method = match r.method {
        newsduel_core::analysis::Method::Exact => "exact",
        newsduel_core::analysis::Method::NormalApprox => "normal",
    };
    Ok((r.n_effective, r.w_plus, r.w_minus, r.z, r.p_two_sided, method.into()))
}

/// Renders a panel in the opinion reply layout. One trust and one reaction per persona.
#[pyfunction]
fn render_opinion(trusts: Vec<u8>, reactions: Vec<String>) -> PyResult<String> {
    let config = default_config();
    if trusts.len() != config.personas.len() || reactions.len() != trusts.len() {
        return Err(PyValueError::new_err(format!("need {} trusts and reactions", config.personas.len())));
    }
    let opinions = config
        .personas
        .iter()
        .zip(trusts)
        .zip(reactions)
        .map(|((p, t), reaction)| {
            Ok(PersonaOpinion { persona_id: p.id.clone(), reaction, trust: Trust::new(t).map_err(value_err)? })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let panel = PublicOpinion::for_config(opinions, &config).map_err(value_err)?;
    Ok(render_opinion_response(&panel, &config))
}

/// Parses a reply into `[(persona_id, trust, reaction), ...]`.
#[pyfunction]
fn parse_opinion(text: &str) -> PyResult<Vec<(String, u8, String)>> {
    let panel = parse_opinion_response(text, &default_config()).map_err(value_err)?;
    Ok(panel.opinions().iter().map(|o| (o.persona_id.clone(), o.trust.value(), o.reaction.clone())).collect())
}

/// Final snapshot JSON of the match logged at `path`.
#[pyfunction]
fn replay_log(path: PathBuf) -> PyResult<String> {
    let state = replay(&path, default_config()).map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(to_json(&state.snapshot()))
}

/// Plays a bot match under the heuristic backend:
/// `(winner, final_trust_sum, log_path)`.
#[pyfunction]
#[pyo3(signature = (log_dir, seed=0, p1="scripted", p2="scripted"))]
fn simulate(log_dir: PathBuf, seed: u64, p1: &str, p2: &str) -> PyResult<(String, u32, String)> {
    let p1 = BotPolicy::parse(p1, Role::Influencer, seed).map_err(value_err)?;
    let p2 = BotPolicy::parse(p2, Role::Debunker, seed).map_err(value_err)?;
    std::fs::create_dir_all(&log_dir).map_err(|e| PyIOError::new_err(e.to_string()))?;
    let sim = run_simulation(Arc::new(default_config()), p1, p2, Arc::new(HeuristicBackend), seed, &log_dir)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((winner_name(sim.outcome.winner).into(), sim.outcome.final_trust_sum, sim.log_path.display().to_string()))
}

/// Runs the pre/post report on a response CSV and writes it to `out` (.md or .csv).
#[pyfunction]
fn analyze(input: PathBuf, out: PathBuf) -> PyResult<String> {
    let report = analyze_command(&input, &out, None).map_err(|e| match e {
        CliError::Io { .. } => PyIOError::new_err(e.to_string()),
        other => value_err(other),
    })?;
    Ok(report.to_markdown())
}

/// A local match scored by the heuristic backend, without logging.
#[pyclass]
struct Game {
    room: Room,
}

#[pymethods]
impl Game {
    #[new]
    #[pyo3(signature = (config_json=None))]
    fn new(config_json: Option<&str>) -> PyResult<Self> {
        let config = Arc::new(config_from(config_json)?);
        let room = Room::new("LOCAL", config, Arc::new(HeuristicBackend), None).map_err(value_err)?;
        Ok(Game { room })
    }

    #[getter]
    fn round(&self) -> u32 {
        self.room.state().round()
    }

    #[getter]
    fn finished(&self) -> bool {
        self.room.state().is_finished()
    }

    /// "influencer", "debunker", or None once finished.
    #[getter]
    fn actor(&self) -> Option<String> {
        self.room.state().actor().map(|r| r.to_string())
    }

    /// `(influencer, debunker)`.
    #[getter]
    fn currency(&self) -> (u32, u32) {
        let c = self.room.state().currency();
        (c.influencer, c.debunker)
    }

    #[getter]
    fn trusts(&self) -> Vec<u8> {
        let state = self.room.state();
        match state.latest_opinion() {
            Some(o) => o.trusts().map(|t| t.value()).collect(),
            None => PublicOpinion::neutral(state.config()).trusts().map(|t| t.value()).collect(),
        }
    }

    #[getter]
    fn winner(&self) -> Option<&'static str> {
        self.room.state().outcome().map(|o| winner_name(o.winner))
    }

    fn snapshot_json(&self) -> String {
        to_json(&self.room.snapshot())
    }

    /// Buys a hint and returns its text.
    fn purchase_hint(&mut self, role: &str, hint_id: &str) -> PyResult<String> {
        let role = role_from(role)?;
        let out = self.room.handle(role, ClientMessage::PurchaseHint { hint_id: hint_id.into() });
        let mut text = None;
        for o in out {
            match o.msg {
                ServerMessage::Error { detail, .. } => return Err(PyValueError::new_err(detail)),
                ServerMessage::HintRevealed { text: t, .. } => text = Some(t),
                _ => {}
            }
        }
        text.ok_or_else(|| PyRuntimeError::new_err("hint was not revealed"))
    }

    /// Publishes for `role` and returns the panel's trusts afterwards.
    fn publish(&mut self, role: &str, text: &str) -> PyResult<Vec<u8>> {
        let role = role_from(role)?;
        for o in self.room.handle(role, ClientMessage::PublishMessage { text: text.into() }) {
            if let ServerMessage::Error { detail, .. } = o.msg {
                return Err(PyValueError::new_err(detail));
            }
        }
        Ok(self.trusts())
    }
}

#[pymodule]
fn newsduel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(default_config_json, m)?)?;
    m.add_function(wrap_pyfunction!(system_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(winner, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(render_opinion, m)?)?;
    m.add_function(wrap_pyfunction!(parse_opinion, m)?)?;
    m.add_function(wrap_pyfunction!(replay_log, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
