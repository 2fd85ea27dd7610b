//! One match and its two seats, driven synchronously.
//!
//! [`Room::handle`] does everything inline. The networked host instead uses
//! [`Room::prepare`] and [`Room::complete`] so the backend call can run off
//! the async executor between the two halves.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use chrono::{DateTime, Utc};
use newsduel_core::game::{GameConfig, GameEvent, GameState, PerRole, Role, StateSnapshot};
use newsduel_core::log::MatchLog;
use newsduel_core::opinion::{BackendError, Evaluation, EvaluationContext, OpinionBackend};
use serde_json::Value;
use tracing::{info, warn};

use crate::protocol::{ClientMessage, ErrorCode, ServerMessage, WireError};

pub type ConnId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipient {
    Seat(Role),
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: Recipient,
    pub msg: ServerMessage,
}

impl Outbound {
    fn both(msg: ServerMessage) -> Self {
        Outbound { to: Recipient::Both, msg }
    }

    fn seat(role: Role, msg: ServerMessage) -> Self {
        Outbound { to: Recipient::Seat(role), msg }
    }
}

/// A publish that passed validation and now needs the backend's verdict.
pub struct PendingEvaluation {
    pub role: Role,
    pub text: String,
    pub ctx: EvaluationContext,
    published: GameEvent,
    staged: GameState,
}

pub enum Step {
    Done(Vec<Outbound>),
    Evaluate(Box<PendingEvaluation>),
}

pub struct Room {
    code: String,
    state: GameState,
    seats: PerRole<Option<ConnId>>,
    backend: Arc<dyn OpinionBackend>,
    log: Option<MatchLog>,
    broken: bool,
}

impl Room {
    pub fn new(
        code: impl Into<String>,
        config: Arc<GameConfig>,
        backend: Arc<dyn OpinionBackend>,
        log: Option<MatchLog>,
    ) -> Result<Self, WireError> {
        let state = GameState::new(config).map_err(WireError::from)?;
        Ok(Room { code: code.into(), state, seats: PerRole::default(), backend, log, broken: false })
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn snapshot(&self) -> StateSnapshot {
        self.state.snapshot()
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn log_path(&self) -> Option<&std::path::Path> {
        self.log.as_ref().map(|l| l.path())
    }

    pub fn seat(&self, role: Role) -> Option<ConnId> {
        *self.seats.get(role)
    }

    pub fn seat_of(&self, conn: ConnId) -> Option<Role> {
        Role::ALL.into_iter().find(|r| *self.seats.get(*r) == Some(conn))
    }

    pub fn is_empty(&self) -> bool {
        self.seats.influencer.is_none() && self.seats.debunker.is_none()
    }

    /// Seats `conn` as `role`; first come, first served.
    pub fn join(&mut self, conn: ConnId, role: Role) -> Result<ServerMessage, WireError> {
        if let Some(current) = self.seat_of(conn) {
            return Err(WireError::new(ErrorCode::AlreadySeated, format!("already seated as {current}")));
        }
        let seat = self.seats.get_mut(role);
        if seat.is_some() {
            return Err(WireError::new(ErrorCode::RoomFull, format!("the {role} seat is taken")));
        }
        *seat = Some(conn);
        info!(room = %self.code, %role, conn, "seat taken");
        Ok(ServerMessage::Joined { role, state: self.snapshot() })
    }

    /// Frees whatever seat `conn` held. The match waits for a rejoin.
    pub fn leave(&mut self, conn: ConnId) -> Option<Role> {
        let role = self.seat_of(conn)?;
        *self.seats.get_mut(role) = None;
        info!(room = %self.code, %role, conn, "seat freed");
        Some(role)
    }

    /// Handles one message from the player in `role`, evaluating inline.
    pub fn handle(&mut self, role: Role, msg: ClientMessage) -> Vec<Outbound> {
        match self.prepare(role, msg) {
            Step::Done(out) => out,
            Step::Evaluate(job) => {
                let result = self.backend.evaluate(&job.ctx, &job.text);
                self.complete(*job, result, None)
            }
        }
    }

    pub fn backend(&self) -> Arc<dyn OpinionBackend> {
        Arc::clone(&self.backend)
    }

    /// Validates `msg`. Anything that needs no backend call is finished here.
    pub fn prepare(&mut self, role: Role, msg: ClientMessage) -> Step {
        let refuse = |e: WireError| Step::Done(vec![Outbound::seat(role, e.into())]);
        if self.broken {
            return refuse(WireError::new(ErrorCode::LogFailure, "match log failed; room is read-only"));
        }
        match msg {
            ClientMessage::Resync => {
                Step::Done(vec![Outbound::seat(role, ServerMessage::Joined { role, state: self.snapshot() })])
            }
            ClientMessage::PurchaseHint { hint_id } => match self.state.purchase_hint(role, &hint_id) {
                Ok(purchase) => {
                    let mut out = Vec::new();
                    if let Err(e) = self.commit(&purchase.event, None, &mut out) {
                        return refuse(e);
                    }
                    out.insert(0, Outbound::seat(role, ServerMessage::HintRevealed { hint_id, text: purchase.hint_text }));
                    Step::Done(out)
                }
                Err(e) => refuse(e.into()),
            },
            ClientMessage::PublishMessage { text } => {
                let published = GameEvent::MessagePublished { round: self.state.round(), role, text: text.clone() };
                match self.state.apply_event(&published) {
                    Ok(staged) => {
                        let ctx = EvaluationContext::for_turn(&staged, role);
                        Step::Evaluate(Box::new(PendingEvaluation { role, text, ctx, published, staged }))
                    }
                    Err(e) => refuse(e.into()),
                }
            }
            ClientMessage::CreateRoom { .. } | ClientMessage::JoinRoom { .. } => {
                refuse(WireError::new(ErrorCode::AlreadySeated, "already in a room"))
            }
        }
    }

    /// Commits a scored publish, or reports the backend failure to the author
    /// and leaves the match exactly as it was.
    pub fn complete(
        &mut self,
        job: PendingEvaluation,
        result: Result<Evaluation, BackendError>,
        latency_ms: Option<u64>,
    ) -> Vec<Outbound> {
        let role = job.role;
        let refuse = |e: WireError| vec![Outbound::seat(role, e.into())];
        if self.broken {
            return refuse(WireError::new(ErrorCode::LogFailure, "match log failed; room is read-only"));
        }
        let eval = match result {
            Ok(e) => e,
            Err(e) => {
                warn!(room = %self.code, %role, error = %e, "backend failed; publish not committed");
                return refuse(WireError::new(ErrorCode::BackendFailure, format!("{e}; publish again to retry")));
            }
        };
        let recorded = GameEvent::OpinionRecorded { round: job.staged.round(), role, opinion: eval.opinion };
        if let Err(e) = job.staged.check(&recorded) {
            return refuse(WireError::new(ErrorCode::BackendFailure, format!("backend returned an unusable panel: {e}")));
        }
        // a concurrent change would make the staged state stale
        if self.state.apply_event(&job.published).ok().as_ref() != Some(&job.staged) {
            return refuse(WireError::new(ErrorCode::OutOfTurn, "match moved on while evaluating"));
        }

        let mut aux = BTreeMap::new();
        aux.insert("backend".to_string(), Value::String(self.backend.name().to_string()));
        if let Some(raw) = eval.raw_reply {
            aux.insert("raw_reply".to_string(), Value::String(raw));
        }
        if let Some(ms) = latency_ms {
            aux.insert("latency_ms".to_string(), Value::from(ms));
        }

        let mut out = Vec::new();
        let steps = (|| {
            self.commit(&job.published, None, &mut out)?;
            self.commit(&recorded, Some(aux), &mut out)?;
            if let Ok(close) = self.state.close_round_event() {
                self.commit(&close, None, &mut out)?;
            }
            if let Some(outcome) = self.state.outcome().cloned() {
                self.commit(&GameEvent::GameFinished { outcome }, None, &mut out)?;
                if let Some(log) = &mut self.log {
                    let _ = log.close();
                }
                info!(room = %self.code, "match finished");
            }
            Ok::<(), WireError>(())
        })();
        if let Err(e) = steps {
            out.push(Outbound::seat(role, e.into()));
        }
        out
    }

    /// Logs `event`, applies it and queues the broadcast, in that order.
    fn commit(
        &mut self,
        event: &GameEvent,
        aux: Option<BTreeMap<String, Value>>,
        out: &mut Vec<Outbound>,
    ) -> Result<(), WireError> {
        self.state.check(event).map_err(WireError::from)?;
        let at: Option<DateTime<Utc>> = match &mut self.log {
            Some(log) => match log.append_event(event.clone(), aux) {
                Ok(record) => record.wall_time(),
                Err(e) => {
                    self.broken = true;
                    warn!(room = %self.code, error = %e, "log append failed");
                    return Err(WireError::new(ErrorCode::LogFailure, e.to_string()));
                }
            },
            None => Some(Utc::now()),
        };
        self.state.apply_mut(event, at).expect("checked above");
        out.push(Outbound::both(ServerMessage::StateUpdate { event: event.clone(), state: self.snapshot() }));
        Ok(())
    }
}

/// Measures a backend call for the log's `latency_ms`.
pub fn timed_evaluate(
    backend: &dyn OpinionBackend,
    job: &PendingEvaluation,
) -> (Result<Evaluation, BackendError>, u64) {
    let started = Instant::now();
    let result = backend.evaluate(&job.ctx, &job.text);
    (result, started.elapsed().as_millis() as u64)
}
