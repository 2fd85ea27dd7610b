//! Keyword-driven stand-in for the LLM panel.
//!
//! Each persona starts from its prior trust. Three marker families are
//! detected in the message: evidence, emotional appeal and cultural pride.
//! A persona whose susceptibility matches a detected family moves 2 points
//! toward the author; every other persona moves 1 point if anything was
//! detected at all. Cultural pride only counts as a matching family when the
//! Influencer uses it. Influencer messages push toward 10, Debunker messages
//! toward 0, and results are clamped to 0..=10.

use super::{BackendError, Evaluation, EvaluationContext, OpinionBackend};
use crate::game::{PersonaOpinion, PersonaSpec, PublicOpinion, Role, Trust};

const EVIDENCE_MARKERS: &[&str] = &[
    "evidence", "study", "studies", "data", "research", "researchers", "trial", "trials",
    "clinical", "peer reviewed", "journal", "statistics", "statistically", "source", "sources",
    "according to", "published", "scientific", "science", "scientists", "experiment",
    "controlled", "fact", "facts", "verified", "fact check", "investigation", "report",
];

const EMOTIONAL_MARKERS: &[&str] = &[
    "fear", "afraid", "scared", "terrified", "terrifying", "panic", "death", "dead", "die",
    "dying", "died", "killed", "murdered", "tragic", "tragedy", "heartbreaking", "heartbroken",
    "grief", "suffering", "danger", "dangerous", "children", "family", "families", "mother",
    "husband", "widow", "hope", "desperate", "shocking", "outrage", "loved ones", "save lives",
];

const CULTURAL_MARKERS: &[&str] = &[
    "tradition", "traditions", "heritage", "culture", "cultural", "ancestors", "ancestral",
    "pride", "proud", "generations", "patriotic", "patriot", "homeland", "our roots",
];

/// Which marker families fired for a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureHits {
    pub evidence: bool,
    pub emotional: bool,
    pub cultural: bool,
}

impl FeatureHits {
    pub fn detect(message: &str) -> Self {
        let text = normalize(message);
        let any = |markers: &[&str]| markers.iter().any(|m| text.contains(&format!(" {m} ")));
        FeatureHits {
            evidence: any(EVIDENCE_MARKERS),
            emotional: any(EMOTIONAL_MARKERS),
            cultural: any(CULTURAL_MARKERS),
        }
    }

    pub fn any(&self) -> bool {
        self.evidence || self.emotional || self.cultural
    }
}

/// Lowercase words separated by single spaces, padded with a space each side.
fn normalize(message: &str) -> String {
    let mut out = String::with_capacity(message.len() + 2);
    out.push(' ');
    let mut gap = false;
    for c in message.chars() {
        if c.is_alphanumeric() {
            if gap && !out.ends_with(' ') {
                out.push(' ');
            }
            gap = false;
            out.extend(c.to_lowercase());
        } else {
            gap = true;
        }
    }
    if !out.ends_with(' ') {
        out.push(' ');
    }
    out
}

enum Reason {
    Evidence,
    Emotion,
    Culture,
    General,
    Unmoved,
}

fn persona_shift(persona: &PersonaSpec, hits: FeatureHits, author: Role) -> (u8, Reason) {
    let s = persona.susceptibility;
    if hits.evidence && s.evidence_preferring {
        (2, Reason::Evidence)
    } else if hits.emotional && s.emotion_susceptible {
        (2, Reason::Emotion)
    } else if hits.cultural && s.tradition_oriented && author == Role::Influencer {
        (2, Reason::Culture)
    } else if hits.any() {
        (1, Reason::General)
    } else {
        (0, Reason::Unmoved)
    }
}

fn reaction_text(persona: &PersonaSpec, reason: Reason, author: Role, from: Trust, to: Trust) -> String {
    let who = author.player_label();
    let lead = match reason {
        Reason::Evidence => format!("{} finds the evidence cited by {who} convincing.", persona.name),
        Reason::Emotion => format!("{} is stirred by the emotional appeal from {who}.", persona.name),
        Reason::Culture => format!("{} responds to the appeal to tradition and heritage.", persona.name),
        Reason::General => format!("{} is somewhat influenced by {who}'s message.", persona.name),
        Reason::Unmoved => format!("{} is not moved by {who}'s message.", persona.name),
    };
    if from == to {
        format!("{lead} Trust stays at {to}.")
    } else {
        format!("{lead} Trust moves from {from} to {to}.")
    }
}

/// Scores `message` with the keyword rule table. Deterministic and total.
pub fn heuristic_evaluate(ctx: &EvaluationContext, message: &str) -> Result<PublicOpinion, BackendError> {
    ctx.prior
        .check_against(&ctx.config)
        .map_err(|e| BackendError(e.to_string()))?;
    let hits = FeatureHits::detect(message);
    let sign = match ctx.author {
        Role::Influencer => 1,
        Role::Debunker => -1,
    };
    let opinions = ctx
        .config
        .personas
        .iter()
        .zip(ctx.prior.opinions())
        .map(|(persona, prior)| {
            let (magnitude, reason) = persona_shift(persona, hits, ctx.author);
            let from = prior.trust;
            let to = Trust::clamped(i32::from(from.value()) + sign * i32::from(magnitude));
            PersonaOpinion {
                persona_id: persona.id.clone(),
                reaction: reaction_text(persona, reason, ctx.author, from, to),
                trust: to,
            }
        })
        .collect();
    PublicOpinion::new(opinions).map_err(|e| BackendError(e.to_string()))
}

/// [`OpinionBackend`] wrapper around [`heuristic_evaluate`].
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicBackend;

impl OpinionBackend for HeuristicBackend {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn evaluate(&self, ctx: &EvaluationContext, message: &str) -> Result<Evaluation, BackendError> {
        Ok(Evaluation { opinion: heuristic_evaluate(ctx, message)?, raw_reply: None })
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::content::default_config;
    use crate::game::GameConfig;

    fn ctx(config: &Arc<GameConfig>, author: Role, prior: &[u8]) -> EvaluationContext {
        let prior = PublicOpinion::new(
            config
                .personas
                .iter()
                .zip(prior)
                .map(|(p, &t)| PersonaOpinion {
                    persona_id: p.id.clone(),
                    reaction: String::new(),
                    trust: Trust::new(t).unwrap(),
                })
                .collect(),
        )
        .unwrap();
        EvaluationContext { config: Arc::clone(config), round: 1, history: vec![], prior, author }
    }

    fn trusts(p: &PublicOpinion) -> Vec<u8> {
        p.trusts().map(Trust::value).collect()
    }

    #[test]
    fn detection() {
        let h = FeatureHits::detect("A peer-reviewed STUDY shows... my husband died!");
        assert!(h.evidence && h.emotional && !h.cultural);
        assert!(!FeatureHits::detect("Nothing to see here").any());
        // substring of a longer word is not a marker
        assert!(!FeatureHits::detect("datastore undiet").any());
        assert!(FeatureHits::detect("According   to\nofficials").evidence);
    }

    #[test]
    fn emotional_influencer_moves_susceptible_by_two() {
        let config = Arc::new(default_config());
        // alex is emotion-susceptible
        let out = heuristic_evaluate(&ctx(&config, Role::Influencer, &[5; 5]), "I live in fear.").unwrap();
        assert_eq!(out.opinions()[0].trust.value(), 7);
        // daniel, rachel are not
        assert_eq!(trusts(&out), [7, 7, 6, 6, 7]);
    }

    #[test]
    fn upper_clamp() {
        let config = Arc::new(default_config());
        let out = heuristic_evaluate(&ctx(&config, Role::Influencer, &[10; 5]), "fear and tradition").unwrap();
        assert_eq!(trusts(&out), [10; 5]);
    }

    #[test]
    fn debunker_evidence_example() {
        let config = Arc::new(default_config());
        let out = heuristic_evaluate(&ctx(&config, Role::Debunker, &[5; 5]), "The trial data disagree.").unwrap();
        // evidence-preferring daniel and rachel drop by 2, everyone else by 1
        assert_eq!(trusts(&out), [4, 4, 3, 3, 4]);
        assert_eq!(out.trust_sum(), 18);
    }

    #[test]
    fn cultural_pride_targets_tradition_persona() {
        let config = Arc::new(default_config());
        let out = heuristic_evaluate(&ctx(&config, Role::Influencer, &[5; 5]), "Our heritage matters.").unwrap();
        assert_eq!(trusts(&out), [6, 7, 6, 6, 6]);
        // for the debunker it is an ordinary feature
        let out = heuristic_evaluate(&ctx(&config, Role::Debunker, &[5; 5]), "Our heritage matters.").unwrap();
        assert_eq!(trusts(&out), [4, 4, 4, 4, 4]);
    }

    #[test]
    fn featureless_message_changes_nothing() {
        let config = Arc::new(default_config());
        let out = heuristic_evaluate(&ctx(&config, Role::Debunker, &[3, 8, 2, 9, 5]), "ok").unwrap();
        assert_eq!(trusts(&out), [3, 8, 2, 9, 5]);
        assert!(out.opinions()[0].reaction.contains("stays at 3"));
    }
}
