//! Public-opinion simulation: prompt assembly, the reply format, the backend
//! contract and a deterministic offline backend.

mod heuristic;
mod prompt;
mod response;

use std::sync::Arc;

use thiserror::Error;

use crate::game::{GameConfig, GameState, NewsItem, PublicOpinion, Role, TurnRecord};

pub use heuristic::{heuristic_evaluate, FeatureHits, HeuristicBackend};
pub use prompt::{
    assemble_system_prompt, assemble_turn_prompt, render_persona, SystemPrompt, SECTION_TITLES,
};
pub use response::{parse_opinion_response, render_opinion_response};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpinionError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("message is empty")]
    EmptyMessage,
    #[error("reply contains {found} persona blocks, expected {expected}")]
    MissingPersona { found: usize, expected: usize },
    #[error("persona {persona} trust score {value} is outside 0..=10")]
    ScoreOutOfRange { persona: usize, value: i64 },
    #[error("persona block {block} is malformed: {reason}")]
    MalformedBlock { block: usize, reason: String },
}

/// Everything a backend may look at when scoring a new message.
#[derive(Debug, Clone)]
pub struct EvaluationContext {
    pub config: Arc<GameConfig>,
    pub round: u32,
    /// Prior completed turns, oldest first.
    pub history: Vec<TurnRecord>,
    /// Panel before this message; all-neutral before the first evaluation.
    pub prior: PublicOpinion,
    pub author: Role,
}

impl EvaluationContext {
    /// Context for `author`'s next message in `state`.
    pub fn for_turn(state: &GameState, author: Role) -> Self {
        let config = Arc::clone(state.config());
        let prior = state
            .latest_opinion()
            .cloned()
            .unwrap_or_else(|| PublicOpinion::neutral(&config));
        EvaluationContext {
            round: state.round(),
            history: state.turns().to_vec(),
            prior,
            author,
            config,
        }
    }

    pub fn news(&self) -> Option<&NewsItem> {
        self.config.news_for(self.round)
    }

    pub fn validate(&self) -> Result<(), OpinionError> {
        self.config
            .validate()
            .map_err(|e| OpinionError::ConfigInvalid(e.to_string()))?;
        if self.news().is_none() {
            return Err(OpinionError::ConfigInvalid(format!("no news for round {}", self.round)));
        }
        self.prior
            .check_against(&self.config)
            .map_err(|e| OpinionError::ConfigInvalid(e.to_string()))
    }
}

/// A scored panel plus the backend's raw reply, if it had one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub opinion: PublicOpinion,
    pub raw_reply: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("opinion backend failed: {0}")]
pub struct BackendError(pub String);

impl From<OpinionError> for BackendError {
    fn from(e: OpinionError) -> Self {
        BackendError(e.to_string())
    }
}

/// Something that turns a published message into an updated public opinion.
///
/// Implementations are shared between matches, so they must be callable
/// concurrently.
pub trait OpinionBackend: Send + Sync {
    fn name(&self) -> &str;

    fn evaluate(&self, ctx: &EvaluationContext, message: &str) -> Result<Evaluation, BackendError>;
}

impl<T: OpinionBackend + ?Sized> OpinionBackend for Arc<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn evaluate(&self, ctx: &EvaluationContext, message: &str) -> Result<Evaluation, BackendError> {
        (**self).evaluate(ctx, message)
    }
}
