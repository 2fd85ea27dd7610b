use std::fmt::Write as _;

use super::{EvaluationContext, OpinionError};
use crate::game::{GameConfig, PersonaSpec, PublicOpinion, Role};

/// Section titles of the system message, in rendering order.
pub const SECTION_TITLES: [&str; 5] = [
    "Story Context",
    "Role Descriptions and Rules",
    "Personas",
    "Response Format",
    "Additional Notes",
];

/// The five blocks of the opinion model's system message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemPrompt {
    pub story_context: String,
    pub role_rules: String,
    pub personas: String,
    pub response_format: String,
    pub additional_notes: String,
}

impl SystemPrompt {
    pub fn from_config(config: &GameConfig) -> Result<Self, OpinionError> {
        config
            .validate()
            .map_err(|e| OpinionError::ConfigInvalid(e.to_string()))?;

        let mut story = config.narrative.setting.trim_end().to_string();
        for item in &config.news {
            write!(
                story,
                "\n\nRound {} news: {}\n{}",
                item.round_index,
                item.headline.trim(),
                item.body.trim()
            )
            .unwrap();
        }

        let personas = config
            .personas
            .iter()
            .enumerate()
            .map(|(i, p)| format!("Persona {}: {}", i + 1, render_persona(p)))
            .collect::<Vec<_>>()
            .join("\n\n");

        Ok(SystemPrompt {
            story_context: story,
            role_rules: config.narrative.role_rules.trim_end().to_string(),
            personas,
            response_format: response_format_text(config.personas.len()),
            additional_notes: config.narrative.additional_notes.trim_end().to_string(),
        })
    }

    pub fn sections(&self) -> [&str; 5] {
        [
            &self.story_context,
            &self.role_rules,
            &self.personas,
            &self.response_format,
            &self.additional_notes,
        ]
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (title, body)) in SECTION_TITLES.iter().zip(self.sections()).enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            write!(out, "# {}. {}\n\n{}", i + 1, title, body).unwrap();
        }
        out.push('\n');
        out
    }
}

/// Renders the system message for `config`. Byte-stable for a fixed config.
pub fn assemble_system_prompt(config: &GameConfig) -> Result<String, OpinionError> {
    Ok(SystemPrompt::from_config(config)?.render())
}

/// One narrative paragraph: demographics, personality, news habits, then
/// cognitive traits.
pub fn render_persona(p: &PersonaSpec) -> String {
    format!(
        "{}. Age: {}. Gender: {}. {}. Education Level: {}. Political party affiliation: {}. {} {} {}",
        p.name.trim(),
        p.age,
        p.gender.trim(),
        p.occupation.trim(),
        p.education.trim(),
        p.political_affiliation.trim(),
        p.personality.trim(),
        p.behavioral_features.trim(),
        p.psychological_traits.trim(),
    )
}

fn response_format_text(count: usize) -> String {
    format!(
        "Reply with exactly {count} persona blocks, one per persona, in the order listed above, and nothing else. \
Use this layout for every block and separate blocks with a blank line:\n\n\
Persona <number>: <name> (<age>, <gender>, <occupation>)\n\
Reaction: <the persona's reaction to the latest message, in their own voice, on one line>\n\
Trust Level Score: <integer from 0 to 10>\n\n\
The trust level score is a whole number. Do not add commentary before, between or after the blocks."
    )
}

fn role_line(role: Role) -> String {
    format!("{} ({})", role.player_label(), role.title())
}

fn write_panel(out: &mut String, config: &GameConfig, panel: &PublicOpinion) {
    for (i, (o, p)) in panel.opinions().iter().zip(&config.personas).enumerate() {
        writeln!(out, "Persona {} ({}): {}", i + 1, p.name, o.trust).unwrap();
    }
}

/// The user message for one evaluation: the round's news, prior panel
/// scores, the published history and the new message verbatim.
pub fn assemble_turn_prompt(ctx: &EvaluationContext, message: &str) -> Result<String, OpinionError> {
    if message.trim().is_empty() {
        return Err(OpinionError::EmptyMessage);
    }
    ctx.validate()?;
    let config = &ctx.config;
    let news = ctx.news().expect("validated");
    let mut out = String::new();
    writeln!(out, "Round {} of {}.", ctx.round, config.rounds_total).unwrap();
    writeln!(out, "\nCurrent news: {}\n{}", news.headline.trim(), news.body.trim()).unwrap();

    out.push_str("\nPublic opinion before this message (trust level scores):\n");
    write_panel(&mut out, config, &ctx.prior);

    if !ctx.history.is_empty() {
        out.push_str("\nMessages published so far:\n");
        for turn in &ctx.history {
            writeln!(
                out,
                "[Round {}] {}: {}",
                turn.round,
                role_line(turn.role),
                turn.message.trim()
            )
            .unwrap();
        }
    }

    writeln!(out, "\nNew message published by {}:\n{}", role_line(ctx.author), message).unwrap();
    write!(
        out,
        "\nUpdate every persona's reaction and trust level score, starting from the scores above, \
and answer in the Response Format."
    )
    .unwrap();
    Ok(out)
}
