use std::collections::BTreeSet;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::rules::{determine_winner, round_rewards, Outcome};
use super::{GameConfig, GameError, PerRole, PublicOpinion, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitingP1,
    AwaitingP2,
    RoundComplete,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PurchasedHint {
    pub round: u32,
    pub role: Role,
    pub hint_id: String,
}

/// A completed turn. `timestamp` is informational and ignored by equality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurnRecord {
    pub round: u32,
    pub role: Role,
    pub message: String,
    pub resulting_opinion: PublicOpinion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
}

impl PartialEq for TurnRecord {
    fn eq(&self, other: &Self) -> bool {
        self.round == other.round
            && self.role == other.role
            && self.message == other.message
            && self.resulting_opinion == other.resulting_opinion
    }
}

impl Eq for TurnRecord {}

/// A message that has been published but not yet scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingMessage {
    pub role: Role,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    HintPurchased { round: u32, role: Role, hint_id: String, cost: u32 },
    MessagePublished { round: u32, role: Role, text: String },
    OpinionRecorded { round: u32, role: Role, opinion: PublicOpinion },
    RoundClosed { round: u32, rewards: PerRole<u32> },
    GameFinished { outcome: Outcome },
}

impl GameEvent {
    pub fn round(&self) -> Option<u32> {
        match self {
            GameEvent::HintPurchased { round, .. }
            | GameEvent::MessagePublished { round, .. }
            | GameEvent::OpinionRecorded { round, .. }
            | GameEvent::RoundClosed { round, .. } => Some(*round),
            GameEvent::GameFinished { .. } => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GameEvent::HintPurchased { .. } => "hint_purchased",
            GameEvent::MessagePublished { .. } => "message_published",
            GameEvent::OpinionRecorded { .. } => "opinion_recorded",
            GameEvent::RoundClosed { .. } => "round_closed",
            GameEvent::GameFinished { .. } => "game_finished",
        }
    }
}

/// Result of a successful hint purchase.
#[derive(Debug, Clone)]
pub struct HintPurchase {
    pub state: GameState,
    pub event: GameEvent,
    pub hint_text: String,
}

/// Authoritative state of one match. Only changes by folding [`GameEvent`]s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    config: Arc<GameConfig>,
    round: u32,
    phase: Phase,
    currency: PerRole<u32>,
    spent: PerRole<u32>,
    awarded: PerRole<u32>,
    purchased_hints: BTreeSet<PurchasedHint>,
    turns: Vec<TurnRecord>,
    latest_opinion: Option<PublicOpinion>,
    pending: Option<PendingMessage>,
    outcome: Option<Outcome>,
    finish_announced: bool,
}

/// Starts a match in round 1 with Player 1 to move.
pub fn new_game(config: impl Into<Arc<GameConfig>>) -> Result<GameState, GameError> {
    GameState::new(config)
}

impl GameState {
    pub fn new(config: impl Into<Arc<GameConfig>>) -> Result<Self, GameError> {
        let config = config.into();
        config.validate()?;
        let start = config.starting_currency;
        Ok(Self {
            config,
            round: 1,
            phase: Phase::AwaitingP1,
            currency: PerRole::new(start, start),
            spent: PerRole::default(),
            awarded: PerRole::default(),
            purchased_hints: BTreeSet::new(),
            turns: Vec::new(),
            latest_opinion: None,
            pending: None,
            outcome: None,
            finish_announced: false,
        })
    }

    pub fn config(&self) -> &Arc<GameConfig> {
        &self.config
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn currency(&self) -> PerRole<u32> {
        self.currency
    }

    /// Total hint spending per role so far.
    pub fn spent(&self) -> PerRole<u32> {
        self.spent
    }

    /// Total round rewards per role so far.
    pub fn awarded(&self) -> PerRole<u32> {
        self.awarded
    }

    pub fn purchased_hints(&self) -> &BTreeSet<PurchasedHint> {
        &self.purchased_hints
    }

    pub fn turns(&self) -> &[TurnRecord] {
        &self.turns
    }

    pub fn latest_opinion(&self) -> Option<&PublicOpinion> {
        self.latest_opinion.as_ref()
    }

    pub fn pending(&self) -> Option<&PendingMessage> {
        self.pending.as_ref()
    }

    pub fn outcome(&self) -> Option<&Outcome> {
        self.outcome.as_ref()
    }

    /// Whether the closing `GameFinished` event has been applied.
    pub fn finish_announced(&self) -> bool {
        self.finish_announced
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    /// The role expected to act next, if any.
    pub fn actor(&self) -> Option<Role> {
        match self.phase {
            Phase::AwaitingP1 => Some(Role::Influencer),
            Phase::AwaitingP2 => Some(Role::Debunker),
            Phase::RoundComplete | Phase::Finished => None,
        }
    }

    /// The outcome of a finished match.
    pub fn winner(&self) -> Result<&Outcome, GameError> {
        self.outcome.as_ref().ok_or(GameError::GameNotFinished)
    }

    pub fn apply_event(&self, event: &GameEvent) -> Result<GameState, GameError> {
        self.apply_event_at(event, None)
    }

    /// Like [`apply_event`](Self::apply_event), stamping any turn record it
    /// completes with `at`.
    pub fn apply_event_at(
        &self,
        event: &GameEvent,
        at: Option<DateTime<Utc>>,
    ) -> Result<GameState, GameError> {
        self.check(event)?;
        let mut next = self.clone();
        next.commit(event, at);
        Ok(next)
    }

    /// In-place variant; `self` is untouched when the event is rejected.
    pub fn apply_mut(&mut self, event: &GameEvent, at: Option<DateTime<Utc>>) -> Result<(), GameError> {
        self.check(event)?;
        self.commit(event, at);
        Ok(())
    }

    /// Validates `event` against the current state without applying it.
    pub fn check(&self, event: &GameEvent) -> Result<(), GameError> {
        if self.phase == Phase::Finished {
            return match event {
                GameEvent::GameFinished { outcome } if !self.finish_announced => {
                    if Some(outcome) == self.outcome.as_ref() {
                        Ok(())
                    } else {
                        Err(GameError::InconsistentEvent(
                            "announced outcome differs from computed outcome".into(),
                        ))
                    }
                }
                _ => Err(GameError::GameAlreadyFinished),
            };
        }
        if let Some(round) = event.round() {
            if round != self.round {
                return Err(GameError::RoundMismatch { event: round, current: self.round });
            }
        }
        match event {
            GameEvent::HintPurchased { role, hint_id, cost, .. } => {
                self.check_actor(*role)?;
                let hint = self
                    .config
                    .hint(hint_id)
                    .filter(|h| h.round == self.round && h.role == *role)
                    .ok_or_else(|| GameError::UnknownHint(hint_id.clone()))?;
                if hint.cost != *cost {
                    return Err(GameError::InconsistentEvent(format!(
                        "hint `{hint_id}` costs {}, event says {cost}",
                        hint.cost
                    )));
                }
                if self.purchased_hints.contains(&PurchasedHint {
                    round: self.round,
                    role: *role,
                    hint_id: hint_id.clone(),
                }) {
                    return Err(GameError::AlreadyPurchased(hint_id.clone()));
                }
                let available = *self.currency.get(*role);
                if available < *cost {
                    return Err(GameError::InsufficientFunds { cost: *cost, available });
                }
                Ok(())
            }
            GameEvent::MessagePublished { role, text, .. } => {
                self.check_actor(*role)?;
                if text.trim().is_empty() {
                    return Err(GameError::EmptyMessage);
                }
                Ok(())
            }
            GameEvent::OpinionRecorded { role, opinion, .. } => {
                match &self.pending {
                    Some(p) if p.role == *role => {}
                    Some(_) | None => {
                        return Err(GameError::InconsistentEvent(format!(
                            "no pending message from {role} to score"
                        )))
                    }
                }
                opinion.check_against(&self.config)
            }
            GameEvent::RoundClosed { rewards, .. } => {
                if self.phase != Phase::RoundComplete {
                    return Err(GameError::WrongPhase {
                        expected: Phase::RoundComplete,
                        actual: self.phase,
                    });
                }
                let latest = self
                    .latest_opinion
                    .as_ref()
                    .ok_or_else(|| GameError::InconsistentEvent("no opinion recorded".into()))?;
                let expected = round_rewards(latest);
                if *rewards != expected {
                    return Err(GameError::InconsistentEvent(format!(
                        "rewards {rewards:?} differ from earned {expected:?}"
                    )));
                }
                Ok(())
            }
            GameEvent::GameFinished { .. } => Err(GameError::GameNotFinished),
        }
    }

    fn check_actor(&self, role: Role) -> Result<(), GameError> {
        if self.actor() != Some(role) || self.pending.is_some() {
            return Err(GameError::OutOfTurn { role, phase: self.phase });
        }
        Ok(())
    }

    fn commit(&mut self, event: &GameEvent, at: Option<DateTime<Utc>>) {
        match event {
            GameEvent::HintPurchased { round, role, hint_id, cost } => {
                *self.currency.get_mut(*role) -= cost;
                *self.spent.get_mut(*role) += cost;
                self.purchased_hints.insert(PurchasedHint {
                    round: *round,
                    role: *role,
                    hint_id: hint_id.clone(),
                });
            }
            GameEvent::MessagePublished { role, text, .. } => {
                self.pending = Some(PendingMessage { role: *role, text: text.clone() });
            }
            GameEvent::OpinionRecorded { round, role, opinion } => {
                let pending = self.pending.take().expect("checked pending message");
                self.turns.push(TurnRecord {
                    round: *round,
                    role: *role,
                    message: pending.text,
                    resulting_opinion: opinion.clone(),
                    timestamp: at,
                });
                self.latest_opinion = Some(opinion.clone());
                self.phase = match role {
                    Role::Influencer => Phase::AwaitingP2,
                    Role::Debunker => Phase::RoundComplete,
                };
            }
            GameEvent::RoundClosed { rewards, .. } => {
                for role in Role::ALL {
                    *self.currency.get_mut(role) += rewards.get(role);
                    *self.awarded.get_mut(role) += rewards.get(role);
                }
                if self.round >= self.config.rounds_total {
                    let latest = self.latest_opinion.as_ref().expect("checked opinion");
                    self.outcome = Some(determine_winner(latest, self.currency));
                    self.phase = Phase::Finished;
                } else {
                    self.round += 1;
                    self.phase = Phase::AwaitingP1;
                }
            }
            GameEvent::GameFinished { .. } => {
                self.finish_announced = true;
            }
        }
    }

    /// Buys `hint_id` for `role`, returning the successor state and the hint text.
    pub fn purchase_hint(&self, role: Role, hint_id: &str) -> Result<HintPurchase, GameError> {
        if self.phase == Phase::Finished {
            return Err(GameError::GameAlreadyFinished);
        }
        if self.actor() != Some(role) || self.pending.is_some() {
            return Err(GameError::WrongTurn(role));
        }
        let hint = self
            .config
            .hint(hint_id)
            .filter(|h| h.round == self.round && h.role == role)
            .ok_or_else(|| GameError::UnknownHint(hint_id.to_string()))?;
        let event = GameEvent::HintPurchased {
            round: self.round,
            role,
            hint_id: hint.id.clone(),
            cost: hint.cost,
        };
        let hint_text = hint.text.clone();
        let state = self.apply_event(&event)?;
        Ok(HintPurchase { state, event, hint_text })
    }

    /// Builds the `RoundClosed` event for a completed round.
    pub fn close_round_event(&self) -> Result<GameEvent, GameError> {
        if self.phase != Phase::RoundComplete {
            return Err(GameError::WrongPhase { expected: Phase::RoundComplete, actual: self.phase });
        }
        let latest = self
            .latest_opinion
            .as_ref()
            .ok_or_else(|| GameError::InconsistentEvent("no opinion recorded".into()))?;
        Ok(GameEvent::RoundClosed { round: self.round, rewards: round_rewards(latest) })
    }

    /// Pays out the round's rewards derived from `opinion` and advances the match.
    pub fn award_round_currency(&self, opinion: &PublicOpinion) -> Result<GameState, GameError> {
        if self.phase != Phase::RoundComplete {
            return Err(GameError::WrongPhase { expected: Phase::RoundComplete, actual: self.phase });
        }
        self.apply_event(&GameEvent::RoundClosed { round: self.round, rewards: round_rewards(opinion) })
    }
}

/// Folds a sequence of events over a fresh match.
pub fn replay_events<'a>(
    config: impl Into<Arc<GameConfig>>,
    events: impl IntoIterator<Item = &'a GameEvent>,
) -> Result<GameState, GameError> {
    let mut state = GameState::new(config)?;
    for event in events {
        state.apply_mut(event, None)?;
    }
    Ok(state)
}
