use std::fmt::Write as _;
use std::sync::LazyLock;

use regex::Regex;

use super::OpinionError;
use crate::game::{GameConfig, PersonaOpinion, PublicOpinion, Trust};

static HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[\s>#*_-]*persona\s*(\d+)\b").unwrap());
static REACTION: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(\*\*|__)?\s*(?:persona\s+)?reaction\s*(?:\*\*|__)?\s*[:：]\s?(.*)$").unwrap()
});
static TRUST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:\*\*|__)?\s*trust(?:\s+level)?(?:\s+score)?\s*(?:\*\*|__)?\s*[:：]\s*(.*)$")
        .unwrap()
});
static SCORE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[\s*_]*([+-]?\d+)(\.\d+)?\s*(?:/\s*10)?[\s*_.]*$").unwrap());

fn escape_line(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_line(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.peek() {
                Some('\\') => {
                    chars.next();
                    out.push('\\');
                }
                Some('n') => {
                    chars.next();
                    out.push('\n');
                }
                Some('r') => {
                    chars.next();
                    out.push('\r');
                }
                _ => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Writes a panel in the reply layout the opinion model is asked to use.
pub fn render_opinion_response(opinion: &PublicOpinion, config: &GameConfig) -> String {
    let mut out = String::new();
    for (i, (o, p)) in opinion.opinions().iter().zip(&config.personas).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "Persona {}: {} ({})", i + 1, p.name, p.basic_details()).unwrap();
        writeln!(out, "Reaction: {}", escape_line(&o.reaction)).unwrap();
        writeln!(out, "Trust Level Score: {}", o.trust).unwrap();
    }
    out
}

#[derive(Default)]
struct RawBlock {
    number: usize,
    reaction: Option<Vec<String>>,
    bold_reaction: bool,
    trust: Option<String>,
}

/// Extracts one opinion per configured persona from a model reply.
///
/// Blocks are matched to personas by position. Scores outside 0..=10 are
/// rejected, never clamped.
pub fn parse_opinion_response(raw: &str, config: &GameConfig) -> Result<PublicOpinion, OpinionError> {
    let expected = config.personas.len();
    let mut blocks: Vec<RawBlock> = Vec::new();

    for line in raw.lines() {
        if let Some(caps) = HEADER.captures(line) {
            if !REACTION.is_match(line) && !TRUST.is_match(line) {
                let number = caps[1].parse().unwrap_or(0);
                blocks.push(RawBlock { number, ..Default::default() });
                continue;
            }
        }
        let Some(block) = blocks.last_mut() else { continue };
        if block.trust.is_some() {
            // after the score only a late Reaction field is still picked up
            if block.reaction.is_none() {
                if let Some(caps) = REACTION.captures(line) {
                    block.bold_reaction = caps.get(1).is_some();
                    block.reaction = Some(vec![caps[2].to_string()]);
                }
            }
            continue;
        }
        if let Some(caps) = TRUST.captures(line) {
            block.trust = Some(caps[1].to_string());
        } else if let Some(caps) = REACTION.captures(line) {
            if block.reaction.is_none() {
                block.bold_reaction = caps.get(1).is_some();
                block.reaction = Some(vec![caps[2].to_string()]);
            } else if let Some(lines) = &mut block.reaction {
                lines.push(line.to_string());
            }
        } else if let Some(lines) = &mut block.reaction {
            lines.push(line.to_string());
        }
    }

    if blocks.len() < expected {
        return Err(OpinionError::MissingPersona { found: blocks.len(), expected });
    }
    if blocks.len() > expected {
        return Err(OpinionError::MalformedBlock {
            block: expected + 1,
            reason: format!("reply has {} persona blocks, only {expected} personas exist", blocks.len()),
        });
    }

    let mut opinions = Vec::with_capacity(expected);
    for (i, (block, persona)) in blocks.into_iter().zip(&config.personas).enumerate() {
        let index = i + 1;
        let malformed = |reason: String| OpinionError::MalformedBlock { block: index, reason };
        if block.number != index {
            return Err(malformed(format!("numbered {} where {index} was expected", block.number)));
        }
        let lines = block.reaction.ok_or_else(|| malformed("no Reaction field".into()))?;
        let mut reaction = lines.join("\n");
        if block.bold_reaction {
            let stripped = reaction.trim_start();
            if let Some(rest) = stripped.strip_prefix("**").or_else(|| stripped.strip_prefix("__")) {
                reaction = rest.to_string();
            }
        }
        let reaction = unescape_line(reaction.trim());
        if reaction.trim().is_empty() {
            return Err(malformed("empty Reaction".into()));
        }
        let score_text = block.trust.ok_or_else(|| malformed("no Trust Level Score field".into()))?;
        let caps = SCORE
            .captures(&score_text)
            .ok_or_else(|| malformed(format!("unreadable score `{}`", score_text.trim())))?;
        if caps.get(2).is_some() {
            return Err(malformed(format!("score `{}` is not a whole number", score_text.trim())));
        }
        let value: i64 = caps[1]
            .parse()
            .map_err(|_| malformed(format!("unreadable score `{}`", score_text.trim())))?;
        if !(0..=10).contains(&value) {
            return Err(OpinionError::ScoreOutOfRange { persona: index, value });
        }
        opinions.push(PersonaOpinion {
            persona_id: persona.id.clone(),
            reaction,
            trust: Trust::new(value as u8).expect("range checked"),
        });
    }
    PublicOpinion::for_config(opinions, config).map_err(|e| OpinionError::ConfigInvalid(e.to_string()))
}
