use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GameState, NewsItem, Outcome, Phase, PerRole, PublicOpinion, PurchasedHint, Role, TurnRecord};

/// Client-facing view of a match, enough to re-render either seat.
///
/// Hint texts are deliberately absent; only the purchaser sees those.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub round: u32,
    pub rounds_total: u32,
    pub phase: Phase,
    pub actor: Option<Role>,
    pub currency: PerRole<u32>,
    pub purchased_hints: BTreeSet<PurchasedHint>,
    pub turns: Vec<TurnRecord>,
    pub latest_opinion: Option<PublicOpinion>,
    pub news: Option<NewsItem>,
    pub outcome: Option<Outcome>,
}

impl From<&GameState> for StateSnapshot {
    fn from(state: &GameState) -> Self {
        StateSnapshot {
            round: state.round(),
            rounds_total: state.config().rounds_total,
            phase: state.phase(),
            actor: state.actor(),
            currency: state.currency(),
            purchased_hints: state.purchased_hints().clone(),
            turns: state.turns().to_vec(),
            latest_opinion: state.latest_opinion().cloned(),
            news: state.config().news_for(state.round()).cloned(),
            outcome: state.outcome().cloned(),
        }
    }
}

impl GameState {
    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot::from(self)
    }
}
