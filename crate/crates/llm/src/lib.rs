//! Remote opinion backend over an OpenAI-style chat-completion endpoint.
//!
//! Transport failures, timeouts, 5xx and 429 are retried with exponential
//! backoff; 401/403 fail at once. A reply the opinion parser rejects gets up
//! to two repair follow-ups restating the format before the call gives up.

pub mod stub;

use std::fmt;
use std::time::{Duration, Instant};

use newsduel_core::game::Role;
use newsduel_core::opinion::{
    assemble_system_prompt, assemble_turn_prompt, parse_opinion_response, BackendError, Evaluation,
    EvaluationContext, OpinionBackend, OpinionError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::{debug, info, warn};

pub const API_KEY_ENV: &str = "OPINION_API_KEY";
pub const API_URL_ENV: &str = "OPINION_API_URL";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Clone)]
pub struct LlmSettings {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub temperature: f32,
    /// First backoff delay; doubles on each retry.
    pub backoff_base: Duration,
    pub repair_attempts: u32,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings {
            endpoint: DEFAULT_ENDPOINT.into(),
            model: DEFAULT_MODEL.into(),
            api_key: None,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            temperature: 0.7,
            backoff_base: Duration::from_millis(500),
            repair_attempts: 2,
        }
    }
}

impl fmt::Debug for LlmSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmSettings")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("timeout", &self.timeout)
            .field("max_retries", &self.max_retries)
            .field("temperature", &self.temperature)
            .field("backoff_base", &self.backoff_base)
            .field("repair_attempts", &self.repair_attempts)
            .finish()
    }
}

impl LlmSettings {
    /// Defaults, with the key and endpoint taken from the environment.
    pub fn from_env() -> Self {
        let mut s = LlmSettings {
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            ..LlmSettings::default()
        };
        if let Ok(url) = std::env::var(API_URL_ENV) {
            if !url.is_empty() {
                s.endpoint = url;
            }
        }
        s
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.timeout.is_zero() {
            return Err(LlmError::InvalidSettings("timeout must be positive".into()));
        }
        if self.endpoint.is_empty() {
            return Err(LlmError::InvalidSettings("endpoint is empty".into()));
        }
        Ok(())
    }

    /// Removes the api key from text that may be shown or logged.
    fn scrub(&self, text: &str) -> String {
        match &self.api_key {
            Some(k) if !k.is_empty() => text.replace(k.as_str(), "<redacted>"),
            _ => text.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

/// A system message, alternating user/assistant history, and the newest user turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatExchange {
    pub system: String,
    pub history: Vec<ChatMessage>,
    pub user: String,
}

impl ChatExchange {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        ChatExchange { system: system.into(), history: Vec::new(), user: user.into() }
    }

    /// Moves the pending user turn and `reply` into history and asks `next`.
    pub fn follow_up(&mut self, reply: String, next: String) {
        let user = std::mem::replace(&mut self.user, next);
        self.history.push(ChatMessage { role: ChatRole::User, content: user });
        self.history.push(ChatMessage { role: ChatRole::Assistant, content: reply });
    }

    pub fn messages(&self) -> Vec<ChatMessage> {
        let mut out = Vec::with_capacity(self.history.len() + 2);
        out.push(ChatMessage { role: ChatRole::System, content: self.system.clone() });
        out.extend(self.history.iter().filter(|m| m.role != ChatRole::System).cloned());
        out.push(ChatMessage { role: ChatRole::User, content: self.user.clone() });
        out
    }
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("endpoint rejected credentials (HTTP {status})")]
    AuthFailed { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("gave up after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },
    #[error("endpoint answered HTTP {status}: {detail}")]
    Rejected { status: u16, detail: String },
    #[error("unreadable completion: {0}")]
    InvalidResponse(String),
    #[error("reply still unreadable after {attempts} attempts: {last}")]
    UnparseableAfterRepair { attempts: u32, last: OpinionError },
    #[error(transparent)]
    Opinion(#[from] OpinionError),
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage>,
    temperature: f32,
}

#[derive(Deserialize)]
struct CompletionReply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

enum Failure {
    Retry(RetryReason, String),
    Fatal(LlmError),
}

enum RetryReason {
    Transport,
    Timeout,
    Server,
    RateLimited,
}

fn agent(settings: &LlmSettings) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(settings.timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

const DETAIL_LIMIT: usize = 200;

fn attempt(agent: &ureq::Agent, settings: &LlmSettings, body: &str) -> Result<String, Failure> {
    let mut req = agent.post(&settings.endpoint).content_type("application/json");
    if let Some(key) = &settings.api_key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let mut resp = match req.send(body) {
        Ok(r) => r,
        Err(ureq::Error::Timeout(_)) => return Err(Failure::Retry(RetryReason::Timeout, "timeout".into())),
        Err(e) => return Err(Failure::Retry(RetryReason::Transport, settings.scrub(&e.to_string()))),
    };
    let status = resp.status().as_u16();
    let text = match resp.body_mut().read_to_string() {
        Ok(t) => t,
        Err(ureq::Error::Timeout(_)) => return Err(Failure::Retry(RetryReason::Timeout, "timeout".into())),
        Err(e) => return Err(Failure::Retry(RetryReason::Transport, settings.scrub(&e.to_string()))),
    };
    let detail = || {
        let t = settings.scrub(&text);
        t.chars().take(DETAIL_LIMIT).collect::<String>()
    };
    match status {
        200..=299 => {
            let reply: CompletionReply =
                serde_json::from_str(&text).map_err(|e| Failure::Fatal(LlmError::InvalidResponse(e.to_string())))?;
            reply
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| Failure::Fatal(LlmError::InvalidResponse("no choices in reply".into())))
        }
        401 | 403 => Err(Failure::Fatal(LlmError::AuthFailed { status })),
        429 => Err(Failure::Retry(RetryReason::RateLimited, format!("HTTP 429: {}", detail()))),
        500..=599 => Err(Failure::Retry(RetryReason::Server, format!("HTTP {status}: {}", detail()))),
        _ => Err(Failure::Fatal(LlmError::Rejected { status, detail: detail() })),
    }
}

/// Sends `exchange` and returns the first choice's text.
pub fn chat_complete(settings: &LlmSettings, exchange: &ChatExchange) -> Result<String, LlmError> {
    settings.validate()?;
    let body = serde_json::to_string(&CompletionRequest {
        model: &settings.model,
        messages: exchange.messages(),
        temperature: settings.temperature,
    })
    .map_err(|e| LlmError::InvalidResponse(e.to_string()))?;
    let agent = agent(settings);
    let attempts = settings.max_retries + 1;
    let mut delay = settings.backoff_base;
    for n in 1..=attempts {
        let started = Instant::now();
        match attempt(&agent, settings, &body) {
            Ok(text) => {
                info!(attempt = n, latency_ms = started.elapsed().as_millis() as u64, reply_len = text.len(), "completion received");
                return Ok(text);
            }
            Err(Failure::Fatal(e)) => {
                warn!(attempt = n, error = %e, "completion failed");
                return Err(e);
            }
            Err(Failure::Retry(reason, detail)) => {
                warn!(attempt = n, of = attempts, %detail, "completion attempt failed");
                if n == attempts {
                    return Err(match reason {
                        RetryReason::Timeout => LlmError::Timeout { attempts },
                        RetryReason::RateLimited => LlmError::RateLimited { attempts },
                        RetryReason::Transport | RetryReason::Server => {
                            LlmError::ExhaustedRetries { attempts, last: detail }
                        }
                    });
                }
                debug!(delay_ms = delay.as_millis() as u64, "backing off");
                std::thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
        }
    }
    unreachable!("loop returns on the last attempt")
}

fn repair_prompt(error: &OpinionError, persona_count: usize) -> String {
    format!(
        "Your previous reply could not be read ({error}). Reply again with exactly {persona_count} persona blocks \
         in the response format from the instructions: a `Persona <number>: <name> (<details>)` line, a \
         `Reaction: ...` line and a `Trust Level Score: <integer 0-10>` line for each persona, and nothing else."
    )
}

/// Scores `message` with the remote model, repairing unreadable replies.
pub fn llm_evaluate(
    settings: &LlmSettings,
    ctx: &EvaluationContext,
    message: &str,
) -> Result<Evaluation, LlmError> {
    ctx.validate()?;
    let system = assemble_system_prompt(&ctx.config)?;
    let user = assemble_turn_prompt(ctx, message)?;
    let mut exchange = ChatExchange::new(system, user);
    let mut tries = 0;
    loop {
        tries += 1;
        let reply = chat_complete(settings, &exchange)?;
        match parse_opinion_response(&reply, &ctx.config) {
            Ok(opinion) => return Ok(Evaluation { opinion, raw_reply: Some(reply) }),
            Err(e) if tries > settings.repair_attempts => {
                warn!(attempts = tries, error = %e, "reply unreadable, giving up");
                return Err(LlmError::UnparseableAfterRepair { attempts: tries, last: e });
            }
            Err(e) => {
                warn!(attempt = tries, error = %e, "reply unreadable, asking for a repair");
                let next = repair_prompt(&e, ctx.config.persona_count());
                exchange.follow_up(reply, next);
            }
        }
    }
}

/// [`OpinionBackend`] that asks the remote model.
#[derive(Debug, Clone)]
pub struct LlmBackend {
    settings: LlmSettings,
}

impl LlmBackend {
    pub fn new(settings: LlmSettings) -> Self {
        LlmBackend { settings }
    }

    pub fn settings(&self) -> &LlmSettings {
        &self.settings
    }
}

impl OpinionBackend for LlmBackend {
    fn name(&self) -> &str {
        "llm"
    }

    fn evaluate(&self, ctx: &EvaluationContext, message: &str) -> Result<Evaluation, BackendError> {
        llm_evaluate(&self.settings, ctx, message).map_err(|e| BackendError(e.to_string()))
    }
}

/// Asks the model to write `role`'s next public message.
pub fn player_message(settings: &LlmSettings, ctx: &EvaluationContext, role: Role) -> Result<String, LlmError> {
    let config = &ctx.config;
    let system = format!(
        "{}\n\nYou are {} ({}). {}\nWrite only the text of your next public post, at most 80 words.",
        config.narrative.setting,
        role.player_label(),
        role.title(),
        config.instructions.for_role(role)
    );
    let news = ctx
        .news()
        .map(|n| format!("{}\n{}", n.headline, n.body))
        .unwrap_or_default();
    let mut user = format!("Round {} news:\n{news}\n\nCurrent trust scores:", ctx.round);
    for (p, o) in config.personas.iter().zip(ctx.prior.opinions()) {
        user.push_str(&format!("\n{}: {}", p.name, o.trust));
    }
    for t in &ctx.history {
        user.push_str(&format!("\n[Round {}] {}: {}", t.round, t.role.player_label(), t.message));
    }
    let text = chat_complete(settings, &ChatExchange::new(system, user))?;
    let text = text.trim().to_string();
    if text.is_empty() {
        return Err(LlmError::InvalidResponse("empty player message".into()));
    }
    Ok(text)
}
