//! Wire messages. Each WebSocket text frame carries one single-line JSON
//! envelope `{"type": ..., "seq": n, "payload": {...}}`.

use newsduel_core::game::{GameError, GameEvent, Role, StateSnapshot};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(rename = "type")]
    pub kind: String,
    pub seq: u64,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Heuristic,
    Llm,
}

impl std::str::FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heuristic" => Ok(BackendChoice::Heuristic),
            "llm" => Ok(BackendChoice::Llm),
            other => Err(format!("unknown backend `{other}`, expected heuristic or llm")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ClientMessage {
    CreateRoom {
        #[serde(default)]
        backend: Option<BackendChoice>,
    },
    JoinRoom { code: String, role: Role },
    PurchaseHint { hint_id: String },
    PublishMessage { text: String },
    Resync,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum ServerMessage {
    RoomCreated { code: String },
    Joined { role: Role, state: StateSnapshot },
    StateUpdate { event: GameEvent, state: StateSnapshot },
    /// Sent to the purchaser only.
    HintRevealed { hint_id: String, text: String },
    Error { code: ErrorCode, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    BadMessage,
    BadSequence,
    NotSeated,
    AlreadySeated,
    UnknownRoom,
    RoomFull,
    CapacityExceeded,
    BackendUnavailable,
    OutOfTurn,
    GameFinished,
    InsufficientFunds,
    UnknownHint,
    AlreadyPurchased,
    EmptyMessage,
    BackendFailure,
    LogFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{code:?}: {detail}")]
pub struct WireError {
    pub code: ErrorCode,
    pub detail: String,
}

impl WireError {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        WireError { code, detail: detail.into() }
    }
}

impl From<WireError> for ServerMessage {
    fn from(e: WireError) -> Self {
        ServerMessage::Error { code: e.code, detail: e.detail }
    }
}

impl From<GameError> for WireError {
    fn from(e: GameError) -> Self {
        let code = match &e {
            GameError::OutOfTurn { .. } | GameError::WrongTurn(_) | GameError::WrongPhase { .. } => {
                ErrorCode::OutOfTurn
            }
            GameError::RoundMismatch { .. } => ErrorCode::OutOfTurn,
            GameError::GameAlreadyFinished => ErrorCode::GameFinished,
            GameError::InsufficientFunds { .. } => ErrorCode::InsufficientFunds,
            GameError::UnknownHint(_) => ErrorCode::UnknownHint,
            GameError::AlreadyPurchased(_) => ErrorCode::AlreadyPurchased,
            GameError::EmptyMessage => ErrorCode::EmptyMessage,
            _ => ErrorCode::BadMessage,
        };
        WireError::new(code, e.to_string())
    }
}

impl ClientMessage {
    pub fn to_envelope(&self, seq: u64) -> Envelope {
        envelope(self, seq)
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self, WireError> {
        from_envelope(env)
    }
}

impl ServerMessage {
    pub fn to_envelope(&self, seq: u64) -> Envelope {
        envelope(self, seq)
    }

    pub fn from_envelope(env: &Envelope) -> Result<Self, WireError> {
        from_envelope(env)
    }
}

fn envelope<T: Serialize>(msg: &T, seq: u64) -> Envelope {
    let mut v = serde_json::to_value(msg).expect("wire messages serialize");
    let obj = v.as_object_mut().expect("tagged enum serializes to an object");
    let kind = obj.remove("type").and_then(|t| t.as_str().map(str::to_string)).unwrap_or_default();
    let payload = obj.remove("payload").unwrap_or_else(|| Value::Object(Default::default()));
    Envelope { kind, seq, payload }
}

fn from_envelope<T: for<'de> Deserialize<'de>>(env: &Envelope) -> Result<T, WireError> {
    let mut obj = serde_json::Map::new();
    obj.insert("type".into(), Value::String(env.kind.clone()));
    // unit variants reject a payload; accept `{}` or null for them
    let empty = match &env.payload {
        Value::Null => true,
        Value::Object(m) => m.is_empty(),
        _ => false,
    };
    if !empty {
        obj.insert("payload".into(), env.payload.clone());
    }
    match serde_json::from_value(Value::Object(obj.clone())) {
        Ok(m) => Ok(m),
        Err(first) => {
            // a struct variant whose fields are all optional may arrive with no payload
            obj.insert("payload".into(), Value::Object(Default::default()));
            serde_json::from_value(Value::Object(obj)).map_err(|_| WireError::new(ErrorCode::BadMessage, first.to_string()))
        }
    }
}

/// Encodes one frame.
pub fn encode(env: &Envelope) -> String {
    serde_json::to_string(env).expect("envelopes serialize")
}

pub fn decode(frame: &str) -> Result<Envelope, WireError> {
    serde_json::from_str(frame).map_err(|e| WireError::new(ErrorCode::BadMessage, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_round_trip() {
        for m in [
            ClientMessage::CreateRoom { backend: Some(BackendChoice::Heuristic) },
            ClientMessage::CreateRoom { backend: None },
            ClientMessage::JoinRoom { code: "AB12CD".into(), role: Role::Debunker },
            ClientMessage::PurchaseHint { hint_id: "r1-influencer-simple".into() },
            ClientMessage::PublishMessage { text: "line\nbreak".into() },
            ClientMessage::Resync,
        ] {
            let frame = encode(&m.to_envelope(7));
            assert!(!frame.contains('\n'));
            let env = decode(&frame).unwrap();
            assert_eq!(env.seq, 7);
            assert_eq!(ClientMessage::from_envelope(&env).unwrap(), m);
        }
    }

    #[test]
    fn bare_resync_and_create() {
        let env = decode(r#"{"type":"Resync","seq":1}"#).unwrap();
        assert_eq!(ClientMessage::from_envelope(&env).unwrap(), ClientMessage::Resync);
        let env = decode(r#"{"type":"CreateRoom","seq":1}"#).unwrap();
        assert_eq!(ClientMessage::from_envelope(&env).unwrap(), ClientMessage::CreateRoom { backend: None });
    }

    #[test]
    fn junk_is_bad_message() {
        assert_eq!(decode("hello").unwrap_err().code, ErrorCode::BadMessage);
        let env = decode(r#"{"type":"Teleport","seq":1,"payload":{}}"#).unwrap();
        assert_eq!(ClientMessage::from_envelope(&env).unwrap_err().code, ErrorCode::BadMessage);
    }
}
