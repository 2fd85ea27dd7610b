//! Deterministic rules engine for a single match.
//!
//! A match is a fold of [`GameEvent`]s over [`GameState`]. Nothing here does
//! I/O; the opinion backend, the session host and the log drive it from
//! outside.

mod error;
mod rules;
mod snapshot;
mod state;
mod types;

pub use error::GameError;
pub use rules::{
    compare_to_neutral, determine_winner, mean_trust, round_half_up, round_rewards, Outcome, Winner,
};
pub use snapshot::StateSnapshot;
pub use state::{
    new_game, replay_events, GameEvent, GameState, HintPurchase, PendingMessage, Phase,
    PurchasedHint, TurnRecord,
};
pub use types::{
    GameConfig, HintKind, HintSpec, Instructions, MisinformationFeature, NewsItem, PerRole,
    PersonaOpinion, PersonaSpec, PublicOpinion, Role, StoryContext, Susceptibility, Trust,
};
