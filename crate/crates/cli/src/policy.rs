//! Headless players for simulations.

use std::path::Path;

use newsduel_core::game::{GameConfig, GameState, HintKind, Role};
use newsduel_core::opinion::EvaluationContext;
use newsduel_llm::{player_message, LlmSettings};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::SimError;

/// One scripted round: optional hint purchases, then the message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedTurn {
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hints: Vec<String>,
}

impl ScriptedTurn {
    pub fn say(message: impl Into<String>) -> Self {
        ScriptedTurn { message: message.into(), hints: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub enum BotPolicy {
    /// One entry per round.
    Scripted(Vec<ScriptedTurn>),
    /// Fills message templates from marker word lists; same seed, same match.
    TemplateRandom { seed: u64 },
    /// Asks the chat endpoint to write each message.
    LlmPlayer(LlmSettings),
}

const DEFAULT_INFLUENCER: [&str; 4] = [
    "Dr. Amy's research proves our tradition works. Proud heritage!",
    "A widow lost her husband to Max. Protect your family!",
    "Big companies fear the truth about traditional medicine.",
    "They killed a doctor to silence him. Be afraid.",
];

const DEFAULT_DEBUNKER: [&str; 4] = [
    "The trial data show no evidence for Product R.",
    "Her story is tragic, but the published studies do not link Max to kidney failure.",
    "An investigation found billionaire Jack funds the institute. Follow the money.",
    "Police reports and verified sources contradict the viral video.",
];

impl BotPolicy {
    /// The bundled four-round script for `role`.
    pub fn default_script(role: Role) -> Self {
        let lines = match role {
            Role::Influencer => DEFAULT_INFLUENCER,
            Role::Debunker => DEFAULT_DEBUNKER,
        };
        BotPolicy::Scripted(lines.iter().map(|l| ScriptedTurn::say(*l)).collect())
    }

    /// Reads a script: a JSON array of strings or `{message, hints}` objects,
    /// or plain text with one message per non-empty line.
    pub fn load_script(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::InvalidPolicy(format!("{}: {e}", path.display())))?;
        if text.trim_start().starts_with('[') {
            #[derive(Deserialize)]
            #[serde(untagged)]
            enum Entry {
                Text(String),
                Turn(ScriptedTurn),
            }
            let entries: Vec<Entry> = serde_json::from_str(&text)
                .map_err(|e| SimError::InvalidPolicy(format!("{}: {e}", path.display())))?;
            let turns = entries
                .into_iter()
                .map(|e| match e {
                    Entry::Text(t) => ScriptedTurn::say(t),
                    Entry::Turn(t) => t,
                })
                .collect();
            return Ok(BotPolicy::Scripted(turns));
        }
        Ok(BotPolicy::Scripted(
            text.lines().map(str::trim).filter(|l| !l.is_empty()).map(ScriptedTurn::say).collect(),
        ))
    }

    /// Parses a `--p1`/`--p2` value: `scripted`, `scripted:<path>`,
    /// `template`, `template:<seed>` or `llm`. A bare `template` derives its
    /// seed from `seed` and the seat.
    pub fn parse(spec: &str, role: Role, seed: u64) -> Result<Self, SimError> {
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (spec, None),
        };
        match (kind, arg) {
            ("scripted", None) => Ok(BotPolicy::default_script(role)),
            ("scripted", Some(path)) => BotPolicy::load_script(Path::new(path)),
            ("template", None) => Ok(BotPolicy::TemplateRandom { seed: seat_seed(seed, role) }),
            ("template", Some(s)) => s
                .parse()
                .map(|seed| BotPolicy::TemplateRandom { seed })
                .map_err(|_| SimError::InvalidPolicy(format!("bad template seed `{s}`"))),
            ("llm", None) => Ok(BotPolicy::LlmPlayer(LlmSettings::from_env())),
            _ => Err(SimError::InvalidPolicy(format!(
                "unknown policy `{spec}`; expected scripted[:path], template[:seed] or llm"
            ))),
        }
    }

    pub fn validate(&self, config: &GameConfig, role: Role) -> Result<(), SimError> {
        match self {
            BotPolicy::Scripted(turns) => {
                let want = config.rounds_total as usize;
                if turns.len() < want {
                    return Err(SimError::PolicyExhausted { role, round: turns.len() as u32 + 1 });
                }
                if turns.len() > want {
                    return Err(SimError::InvalidPolicy(format!(
                        "{role} script has {} rounds, the match has {want}",
                        turns.len()
                    )));
                }
                Ok(())
            }
            BotPolicy::TemplateRandom { .. } => Ok(()),
            BotPolicy::LlmPlayer(s) => s.validate().map_err(|e| SimError::InvalidPolicy(e.to_string())),
        }
    }
}

fn seat_seed(seed: u64, role: Role) -> u64 {
    match role {
        Role::Influencer => seed,
        Role::Debunker => seed ^ 0x9e37_79b9_7f4a_7c15,
    }
}

const INFLUENCER_OPENERS: &[&str] = &[
    "My mother swears by Product R.",
    "Families everywhere are desperate for hope.",
    "Our ancestors knew what modern medicine forgets.",
    "I was scared for my children until I found Product R.",
    "Proud of our tradition of healing.",
];

const INFLUENCER_CLAIMS: &[&str] = &[
    "Dr. Amy has spent twenty years protecting patients.",
    "The big drug companies are terrified of this cure.",
    "Max hurt real people and nobody will admit it.",
    "Every bottle helps fund research against the Zinc Virus.",
    "Generations of healers cannot all be wrong.",
];

const INFLUENCER_CLOSERS: &[&str] = &[
    "Protect your family today.",
    "Do not wait until it is too late.",
    "Share this before they delete it.",
    "Trust our heritage.",
];

const DEBUNKER_OPENERS: &[&str] = &[
    "Let's look at the facts.",
    "Here is what the published evidence says.",
    "This claim has been fact checked.",
    "Before you share that post, check the source.",
];

const DEBUNKER_CLAIMS: &[&str] = &[
    "No clinical trial shows Product R works against the Zinc Virus.",
    "The story relies on emotion, not data.",
    "An investigation traced the campaign to people who profit from it.",
    "Health authorities report no link between Max and the deaths described.",
    "The expert quoted has a financial stake in the product.",
];

const DEBUNKER_CLOSERS: &[&str] = &[
    "Stick to verified sources.",
    "Ask who benefits before you believe it.",
    "Talk to your doctor, not a viral post.",
];

/// Drives one seat.
pub(crate) struct Bot {
    role: Role,
    policy: BotPolicy,
    rng: ChaCha8Rng,
}

impl Bot {
    pub(crate) fn new(role: Role, policy: BotPolicy) -> Self {
        let seed = match &policy {
            BotPolicy::TemplateRandom { seed } => *seed,
            _ => 0,
        };
        Bot { role, policy, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub(crate) fn next_turn(&mut self, state: &GameState) -> Result<ScriptedTurn, SimError> {
        let round = state.round();
        match &self.policy {
            BotPolicy::Scripted(turns) => turns
                .get(round as usize - 1)
                .cloned()
                .ok_or(SimError::PolicyExhausted { role: self.role, round }),
            BotPolicy::TemplateRandom { .. } => Ok(self.template_turn(state)),
            BotPolicy::LlmPlayer(settings) => {
                let ctx = EvaluationContext::for_turn(state, self.role);
                let message = player_message(settings, &ctx, self.role).map_err(SimError::Player)?;
                Ok(ScriptedTurn::say(message))
            }
        }
    }

    fn template_turn(&mut self, state: &GameState) -> ScriptedTurn {
        let (openers, claims, closers) = match self.role {
            Role::Influencer => (INFLUENCER_OPENERS, INFLUENCER_CLAIMS, INFLUENCER_CLOSERS),
            Role::Debunker => (DEBUNKER_OPENERS, DEBUNKER_CLAIMS, DEBUNKER_CLOSERS),
        };
        let rng = &mut self.rng;
        let message = format!(
            "{} {} {}",
            openers.choose(rng).expect("non-empty"),
            claims.choose(rng).expect("non-empty"),
            closers.choose(rng).expect("non-empty"),
        );
        // now and then buy this round's cheap hint if it is affordable
        let mut hints = Vec::new();
        if rng.random_bool(0.3) {
            let config = state.config();
            if let Some(hint) = config.hints_for(state.round(), self.role).find(|h| h.kind == HintKind::Simple) {
                if *state.currency().get(self.role) >= hint.cost {
                    hints.push(hint.id.clone());
                }
            }
        }
        ScriptedTurn { message, hints }
    }
}
