//! Freezes the wire format the browser client is written against. Set
//! `NEWSDUEL_BLESS=1` to rewrite the fixtures after an intended change.

use std::path::PathBuf;

use newsduel_core::default_config;
use newsduel_core::game::{GameEvent, GameState, Role};
use newsduel_server::{
    BackendChoice, ClientMessage, Envelope, ErrorCode, ServerMessage,
};
use newsduel_server::protocol::{decode, encode};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/protocol").join(name)
}

fn client_samples() -> Vec<ClientMessage> {
    vec![
        ClientMessage::CreateRoom { backend: Some(BackendChoice::Heuristic) },
        ClientMessage::JoinRoom { code: "K7Q2ZD".into(), role: Role::Influencer },
        ClientMessage::PurchaseHint { hint_id: "r1-influencer-simple".into() },
        ClientMessage::PublishMessage { text: "Product R saved my family.".into() },
        ClientMessage::Resync,
    ]
}

fn server_samples() -> Vec<ServerMessage> {
    let config = default_config();
    let fresh = GameState::new(config.clone()).unwrap();
    let purchase = fresh.purchase_hint(Role::Influencer, "r1-influencer-simple").unwrap();
    let after = fresh.apply_event(&purchase.event).unwrap();
    vec![
        ServerMessage::RoomCreated { code: "K7Q2ZD".into() },
        ServerMessage::Joined { role: Role::Debunker, state: fresh.snapshot() },
        ServerMessage::HintRevealed { hint_id: "r1-influencer-simple".into(), text: purchase.hint_text },
        ServerMessage::StateUpdate { event: purchase.event, state: after.snapshot() },
        ServerMessage::Error { code: ErrorCode::OutOfTurn, detail: "it is the influencer's turn".into() },
    ]
}

fn frames<T>(msgs: &[T], envelope: impl Fn(&T, u64) -> Envelope) -> String {
    msgs.iter().enumerate().map(|(i, m)| encode(&envelope(m, i as u64 + 1)) + "\n").collect()
}

fn check(name: &str, rendered: String) {
    if std::env::var_os("NEWSDUEL_BLESS").is_some() {
        std::fs::create_dir_all(fixture("")).unwrap();
        std::fs::write(fixture(name), &rendered).unwrap();
    }
    let expected = std::fs::read_to_string(fixture(name)).unwrap();
    assert!(rendered == expected, "wire format drifted from fixtures/protocol/{name}");
}

#[test]
fn client_frames_match_fixture() {
    check("client_frames.jsonl", frames(&client_samples(), ClientMessage::to_envelope));
}

#[test]
fn server_frames_match_fixture() {
    check("server_frames.jsonl", frames(&server_samples(), ServerMessage::to_envelope));
}

#[test]
fn fixture_frames_decode() {
    let text = std::fs::read_to_string(fixture("client_frames.jsonl")).unwrap();
    let decoded: Vec<ClientMessage> =
        text.lines().map(|l| ClientMessage::from_envelope(&decode(l).unwrap()).unwrap()).collect();
    assert_eq!(decoded, client_samples());
    let text = std::fs::read_to_string(fixture("server_frames.jsonl")).unwrap();
    let decoded: Vec<ServerMessage> =
        text.lines().map(|l| ServerMessage::from_envelope(&decode(l).unwrap()).unwrap()).collect();
    assert_eq!(decoded, server_samples());
}

#[test]
fn snapshot_field_names_are_frozen() {
    let text = std::fs::read_to_string(fixture("server_frames.jsonl")).unwrap();
    let joined: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert_eq!(joined["type"], "Joined");
    let state = joined["payload"]["state"].as_object().unwrap();
    let mut keys: Vec<&str> = state.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "actor",
            "currency",
            "latest_opinion",
            "news",
            "outcome",
            "phase",
            "purchased_hints",
            "round",
            "rounds_total",
            "turns"
        ]
    );
    let update: serde_json::Value = serde_json::from_str(text.lines().nth(3).unwrap()).unwrap();
    assert_eq!(update["payload"]["event"]["type"], "hint_purchased");
    assert_eq!(update["payload"]["state"]["currency"]["influencer"], 90);
    assert!(matches!(
        serde_json::from_value::<GameEvent>(update["payload"]["event"].clone()).unwrap(),
        GameEvent::HintPurchased { cost: 10, .. }
    ));
}
