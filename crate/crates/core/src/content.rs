//! The bundled game content: Southland narrative, four rounds of news, five
//! personas and the per-round hint shop.

use crate::game::GameConfig;

/// The default content bundle as shipped, in the JSON config format.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../content/default_config.json");

pub fn default_config() -> GameConfig {
    GameConfig::from_json(DEFAULT_CONFIG_JSON).expect("bundled config is valid")
}
