//! Rules, opinion panel, match logs and analysis toolkit for a two-player
//! misinformation duel played over a simulated public.

pub mod analysis;
pub mod content;
pub mod game;
pub mod log;
pub mod opinion;

pub use content::default_config;
pub use game::{new_game, GameConfig, GameError, GameEvent, GameState, PublicOpinion, Role, Trust};
