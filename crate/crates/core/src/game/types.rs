use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::GameError;

/// The two seats of a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Player 1, publishes misinformation about Product R.
    Influencer,
    /// Player 2, the journalist who debunks it.
    Debunker,
}

impl Role {
    pub const ALL: [Role; 2] = [Role::Influencer, Role::Debunker];

    pub fn other(self) -> Role {
        match self {
            Role::Influencer => Role::Debunker,
            Role::Debunker => Role::Influencer,
        }
    }

    /// "Player 1" / "Player 2".
    pub fn player_label(self) -> &'static str {
        match self {
            Role::Influencer => "Player 1",
            Role::Debunker => "Player 2",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Role::Influencer => "Influencer",
            Role::Debunker => "Journalist-debunker",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Influencer => "influencer",
            Role::Debunker => "debunker",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "influencer" | "p1" | "player1" | "1" => Ok(Role::Influencer),
            "debunker" | "p2" | "player2" | "2" => Ok(Role::Debunker),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// Per-role amounts, used for currency balances and round rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PerRole<T> {
    pub influencer: T,
    pub debunker: T,
}

impl<T> PerRole<T> {
    pub fn new(influencer: T, debunker: T) -> Self {
        Self { influencer, debunker }
    }

    pub fn get(&self, role: Role) -> &T {
        match role {
            Role::Influencer => &self.influencer,
            Role::Debunker => &self.debunker,
        }
    }

    pub fn get_mut(&mut self, role: Role) -> &mut T {
        match role {
            Role::Influencer => &mut self.influencer,
            Role::Debunker => &mut self.debunker,
        }
    }

    /// Exchanges the two entries.
    pub fn swapped(self) -> Self {
        Self { influencer: self.debunker, debunker: self.influencer }
    }
}

/// A persona's trust level, 10 = trusts Player 1, 0 = trusts Player 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Trust(u8);

impl Trust {
    pub const MIN: Trust = Trust(0);
    pub const MAX: Trust = Trust(10);
    pub const NEUTRAL: Trust = Trust(5);

    pub fn new(value: u8) -> Result<Self, GameError> {
        if value <= 10 {
            Ok(Trust(value))
        } else {
            Err(GameError::TrustOutOfRange(i64::from(value)))
        }
    }

    /// Saturating construction from an arbitrary signed value.
    pub fn clamped(value: i32) -> Self {
        Trust(value.clamp(0, 10) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// The mirrored score `10 - t`.
    pub fn flipped(self) -> Self {
        Trust(10 - self.0)
    }
}

impl TryFrom<u8> for Trust {
    type Error = GameError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Trust::new(value)
    }
}

impl From<Trust> for u8 {
    fn from(t: Trust) -> u8 {
        t.0
    }
}

impl fmt::Display for Trust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The kind of misinformation technique a round's news embodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MisinformationFeature {
    /// Partisan outlet lending credibility to a claim.
    BiasedSource,
    /// Personal, negative, emotionally charged testimony.
    EmotionalPersonalStory,
    /// Claims fabricated or amplified for financial gain.
    ProfitMotive,
    /// A rumor that re-emerges in a more extreme form.
    EscalatingRumor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsItem {
    /// 1-based.
    pub round_index: u32,
    pub headline: String,
    pub body: String,
    pub misinformation_feature: MisinformationFeature,
}

/// Flags the offline heuristic backend reads; the LLM backend ignores them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Susceptibility {
    #[serde(default)]
    pub emotion_susceptible: bool,
    #[serde(default)]
    pub evidence_preferring: bool,
    #[serde(default)]
    pub tradition_oriented: bool,
}

/// A simulated citizen. Text blocks are rendered verbatim into the system prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaSpec {
    pub id: String,
    pub name: String,
    pub age: u32,
    pub gender: String,
    pub occupation: String,
    pub education: String,
    pub political_affiliation: String,
    pub personality: String,
    pub behavioral_features: String,
    pub psychological_traits: String,
    #[serde(default)]
    pub susceptibility: Susceptibility,
}

impl PersonaSpec {
    /// "36, Male, Project Manager"
    pub fn basic_details(&self) -> String {
        format!("{}, {}, {}", self.age, self.gender, self.occupation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintKind {
    Detailed,
    Simple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintSpec {
    pub id: String,
    pub round: u32,
    pub role: Role,
    pub kind: HintKind,
    pub cost: u32,
    pub text: String,
}

/// Background text blocks shared with the players and the opinion model.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StoryContext {
    pub setting: String,
    /// Evaluation rules for the opinion model.
    pub role_rules: String,
    #[serde(default)]
    pub additional_notes: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Instructions {
    pub influencer: String,
    pub debunker: String,
}

impl Instructions {
    pub fn for_role(&self, role: Role) -> &str {
        match role {
            Role::Influencer => &self.influencer,
            Role::Debunker => &self.debunker,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub rounds_total: u32,
    pub news: Vec<NewsItem>,
    pub personas: Vec<PersonaSpec>,
    #[serde(default)]
    pub hint_catalog: Vec<HintSpec>,
    pub starting_currency: u32,
    pub narrative: StoryContext,
    #[serde(default)]
    pub instructions: Instructions,
}

impl GameConfig {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let config: GameConfig =
            serde_json::from_str(text).map_err(|e| GameError::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let invalid = |msg: String| Err(GameError::ConfigInvalid(msg));
        if self.rounds_total == 0 {
            return invalid("rounds_total must be at least 1".into());
        }
        if self.news.len() != self.rounds_total as usize {
            return invalid(format!(
                "{} news items for {} rounds",
                self.news.len(),
                self.rounds_total
            ));
        }
        for (i, item) in self.news.iter().enumerate() {
            if item.round_index as usize != i + 1 {
                return invalid(format!(
                    "news item {} declares round {}",
                    i + 1,
                    item.round_index
                ));
            }
        }
        if self.personas.is_empty() {
            return invalid("no personas configured".into());
        }
        let mut ids = BTreeSet::new();
        for p in &self.personas {
            if !ids.insert(p.id.as_str()) {
                return invalid(format!("duplicate persona id `{}`", p.id));
            }
            let groups = [
                &p.name,
                &p.personality,
                &p.behavioral_features,
                &p.psychological_traits,
            ];
            if groups.iter().any(|g| g.trim().is_empty()) {
                return invalid(format!("persona `{}` has an empty factor group", p.id));
            }
        }
        let mut hint_ids = BTreeSet::new();
        for h in &self.hint_catalog {
            if h.round == 0 || h.round > self.rounds_total {
                return invalid(format!("hint `{}` refers to round {}", h.id, h.round));
            }
            if !hint_ids.insert(h.id.as_str()) {
                return invalid(format!("duplicate hint id `{}`", h.id));
            }
        }
        Ok(())
    }

    pub fn persona_count(&self) -> usize {
        self.personas.len()
    }

    /// News for a 1-based round.
    pub fn news_for(&self, round: u32) -> Option<&NewsItem> {
        round.checked_sub(1).and_then(|i| self.news.get(i as usize))
    }

    pub fn hint(&self, id: &str) -> Option<&HintSpec> {
        self.hint_catalog.iter().find(|h| h.id == id)
    }

    pub fn hints_for(&self, round: u32, role: Role) -> impl Iterator<Item = &HintSpec> {
        self.hint_catalog
            .iter()
            .filter(move |h| h.round == round && h.role == role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaOpinion {
    pub persona_id: String,
    pub reaction: String,
    pub trust: Trust,
}

/// One panel result: exactly one opinion per configured persona.
///
/// Serialized with derived `trust_sum` and `average` fields for display; those
/// are recomputed on load and must agree if present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PublicOpinionRepr", into = "PublicOpinionRepr")]
pub struct PublicOpinion {
    opinions: Vec<PersonaOpinion>,
}

impl PublicOpinion {
    pub fn new(opinions: Vec<PersonaOpinion>) -> Result<Self, GameError> {
        if opinions.is_empty() {
            return Err(GameError::EmptyPanel);
        }
        Ok(Self { opinions })
    }

    /// Builds a panel and checks it lines up one-to-one with `config.personas`.
    pub fn for_config(opinions: Vec<PersonaOpinion>, config: &GameConfig) -> Result<Self, GameError> {
        let panel = Self::new(opinions)?;
        panel.check_against(config)?;
        Ok(panel)
    }

    /// Every persona at trust 5.
    pub fn neutral(config: &GameConfig) -> Self {
        Self {
            opinions: config
                .personas
                .iter()
                .map(|p| PersonaOpinion {
                    persona_id: p.id.clone(),
                    reaction: "No information published yet.".into(),
                    trust: Trust::NEUTRAL,
                })
                .collect(),
        }
    }

    pub fn check_against(&self, config: &GameConfig) -> Result<(), GameError> {
        if self.opinions.len() != config.personas.len() {
            return Err(GameError::PanelMismatch(format!(
                "{} opinions for {} personas",
                self.opinions.len(),
                config.personas.len()
            )));
        }
        for (o, p) in self.opinions.iter().zip(&config.personas) {
            if o.persona_id != p.id {
                return Err(GameError::PanelMismatch(format!(
                    "expected persona `{}`, found `{}`",
                    p.id, o.persona_id
                )));
            }
        }
        Ok(())
    }

    pub fn opinions(&self) -> &[PersonaOpinion] {
        &self.opinions
    }

    pub fn trusts(&self) -> impl Iterator<Item = Trust> + '_ {
        self.opinions.iter().map(|o| o.trust)
    }

    pub fn trust_sum(&self) -> u32 {
        self.trusts().map(|t| u32::from(t.value())).sum()
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    /// Exact mean trust.
    pub fn average(&self) -> Ratio<u32> {
        Ratio::new(self.trust_sum(), self.opinions.len() as u32)
    }

    /// Mirror image: every trust `t` becomes `10 - t`.
    pub fn flipped(&self) -> Self {
        Self {
            opinions: self
                .opinions
                .iter()
                .map(|o| PersonaOpinion { trust: o.trust.flipped(), ..o.clone() })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PublicOpinionRepr {
    opinions: Vec<PersonaOpinion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trust_sum: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    average: Option<f64>,
}

impl TryFrom<PublicOpinionRepr> for PublicOpinion {
    type Error = GameError;

    fn try_from(repr: PublicOpinionRepr) -> Result<Self, Self::Error> {
        let panel = PublicOpinion::new(repr.opinions)?;
        if let Some(sum) = repr.trust_sum {
            if sum != panel.trust_sum() {
                return Err(GameError::PanelMismatch(format!(
                    "stored trust_sum {sum} disagrees with member trusts ({})",
                    panel.trust_sum()
                )));
            }
        }
        Ok(panel)
    }
}

impl From<PublicOpinion> for PublicOpinionRepr {
    fn from(p: PublicOpinion) -> Self {
        let sum = p.trust_sum();
        let average = f64::from(sum) / p.opinions.len() as f64;
        PublicOpinionRepr { opinions: p.opinions, trust_sum: Some(sum), average: Some(average) }
    }
}
