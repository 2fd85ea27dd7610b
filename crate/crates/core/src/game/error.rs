use thiserror::Error;

use super::{Phase, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game config: {0}")]
    ConfigInvalid(String),
    #[error("trust score {0} outside 0..=10")]
    TrustOutOfRange(i64),
    #[error("public opinion panel is empty")]
    EmptyPanel,
    #[error("public opinion does not match configured personas: {0}")]
    PanelMismatch(String),
    #[error("{role} may not act while the match is in phase {phase:?}")]
    OutOfTurn { role: Role, phase: Phase },
    #[error("event targets round {event} but the match is in round {current}")]
    RoundMismatch { event: u32, current: u32 },
    #[error("the match has already finished")]
    GameAlreadyFinished,
    #[error("the match has not finished")]
    GameNotFinished,
    #[error("operation requires phase {expected:?}, match is in {actual:?}")]
    WrongPhase { expected: Phase, actual: Phase },
    #[error("it is not {0}'s turn")]
    WrongTurn(Role),
    #[error("need {cost} currency, have {available}")]
    InsufficientFunds { cost: u32, available: u32 },
    #[error("hint `{0}` already purchased this round")]
    AlreadyPurchased(String),
    #[error("hint `{0}` is not available")]
    UnknownHint(String),
    #[error("message is empty")]
    EmptyMessage,
    #[error("event does not follow from the current state: {0}")]
    InconsistentEvent(String),
}
