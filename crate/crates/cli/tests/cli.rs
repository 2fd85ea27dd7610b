use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use newsduel_cli::{run_simulation, BotPolicy, ScriptedTurn, SimError};
use newsduel_core::default_config;
use newsduel_core::game::{GameEvent, Outcome, Role, Winner};
use newsduel_core::log::read_records;
use newsduel_core::opinion::{BackendError, Evaluation, EvaluationContext, HeuristicBackend, OpinionBackend};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_newsduel"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scripted(lines: [&str; 4]) -> BotPolicy {
    BotPolicy::Scripted(lines.iter().map(|l| ScriptedTurn::say(*l)).collect())
}

/// Log records as JSON with the wall time removed.
fn timeless(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_time");
            v
        })
        .collect()
}

#[test]
fn scripted_runs_are_identical_modulo_time() {
    let dir = tempfile::tempdir().unwrap();
    let play = || {
        run_simulation(
            Arc::new(default_config()),
            BotPolicy::default_script(Role::Influencer),
            BotPolicy::default_script(Role::Debunker),
            Arc::new(HeuristicBackend),
            42,
            dir.path(),
        )
        .unwrap()
    };
    let a = play();
    let b = play();
    assert_ne!(a.log_path, b.log_path);
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(timeless(&a.log_path), timeless(&b.log_path));
}

#[test]
fn template_players_are_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let play = |seed| {
        let sim = run_simulation(
            Arc::new(default_config()),
            BotPolicy::TemplateRandom { seed },
            BotPolicy::TemplateRandom { seed: seed + 1 },
            Arc::new(HeuristicBackend),
            seed,
            dir.path(),
        )
        .unwrap();
        timeless(&sim.log_path)
    };
    assert_eq!(play(5), play(5));
    assert_ne!(play(5), play(6));
}

#[test]
fn emotional_influencer_beats_silent_debunker() {
    let dir = tempfile::tempdir().unwrap();
    let sim = run_simulation(
        Arc::new(default_config()),
        scripted([
            "Think of your children. Families are dying.",
            "A widow is heartbroken and afraid.",
            "Shocking death toll, protect your loved ones.",
            "Desperate mothers need hope.",
        ]),
        scripted(["ok", "hmm", "no comment", "fine"]),
        Arc::new(HeuristicBackend),
        1,
        dir.path(),
    )
    .unwrap();
    // emotion-susceptible personas gain 2 a round and cap at 10; the two
    // evidence-minded ones gain 1 a round; the replies move nobody
    let trusts: Vec<u8> = sim.state.latest_opinion().unwrap().trusts().map(|t| t.value()).collect();
    assert_eq!(trusts, [10, 10, 9, 9, 10]);
    assert_eq!(sim.outcome.winner, Winner::Player1);
    assert_eq!(sim.outcome.final_trust_sum, 48);
}

#[test]
fn four_rounds_log_eight_publishes() {
    let dir = tempfile::tempdir().unwrap();
    let sim = run_simulation(
        Arc::new(default_config()),
        BotPolicy::default_script(Role::Influencer),
        BotPolicy::default_script(Role::Debunker),
        Arc::new(HeuristicBackend),
        0,
        dir.path(),
    )
    .unwrap();
    let records = read_records(&sim.log_path).unwrap();
    let publishes = records.iter().filter(|r| matches!(r.event, GameEvent::MessagePublished { .. })).count();
    assert_eq!(publishes, 8);
    assert!(matches!(records.last().unwrap().event, GameEvent::GameFinished { .. }));
}

#[test]
fn short_script_is_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_simulation(
        Arc::new(default_config()),
        BotPolicy::Scripted(vec![ScriptedTurn::say("only one")]),
        BotPolicy::default_script(Role::Debunker),
        Arc::new(HeuristicBackend),
        0,
        dir.path(),
    )
    .unwrap_err();
    assert!(matches!(err, SimError::PolicyExhausted { role: Role::Influencer, round: 2 }), "{err}");
}

struct Broken;

impl OpinionBackend for Broken {
    fn name(&self) -> &str {
        "broken"
    }
    fn evaluate(&self, _: &EvaluationContext, _: &str) -> Result<Evaluation, BackendError> {
        Err(BackendError("offline".into()))
    }
}

#[test]
fn backend_failure_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_simulation(
        Arc::new(default_config()),
        BotPolicy::default_script(Role::Influencer),
        BotPolicy::default_script(Role::Debunker),
        Arc::new(Broken),
        0,
        dir.path(),
    )
    .unwrap_err();
    assert!(matches!(err, SimError::BackendFailure(_)), "{err}");
}

#[test]
fn script_files_load() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("p1.json");
    std::fs::write(&json, r#"["a", {"message": "b", "hints": ["r2-influencer-simple"]}, "c", "d"]"#).unwrap();
    match BotPolicy::parse(&format!("scripted:{}", json.display()), Role::Influencer, 0).unwrap() {
        BotPolicy::Scripted(turns) => {
            assert_eq!(turns.len(), 4);
            assert_eq!(turns[1].hints, ["r2-influencer-simple"]);
        }
        other => panic!("{other:?}"),
    }
    let txt = dir.path().join("p2.txt");
    std::fs::write(&txt, "one\n\ntwo\nthree\nfour\n").unwrap();
    match BotPolicy::parse(&format!("scripted:{}", txt.display()), Role::Debunker, 0).unwrap() {
        BotPolicy::Scripted(turns) => assert_eq!(turns[1].message, "two"),
        other => panic!("{other:?}"),
    }
    assert!(BotPolicy::parse("mystery", Role::Debunker, 0).is_err());
}

#[test]
fn replay_of_fixture_prints_its_outcome() {
    let log = fixtures().join("sample_match.log");
    let expected: Outcome =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("sample_match.outcome.json")).unwrap()).unwrap();
    let out = run(&["replay", log.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("outcome:")).unwrap();
    assert_eq!(expected.winner, Winner::Player1);
    assert!(line.contains("Player 1 (influencer) wins"), "{line}");
    assert!(line.contains(&format!("final trust sum {}", expected.final_trust_sum)), "{line}");
    assert!(
        line.contains(&format!(
            "currency {}/{}",
            expected.final_currency.influencer, expected.final_currency.debunker
        )),
        "{line}"
    );
}

#[test]
fn every_help_lists_its_flags() {
    let cases: [(&str, &[&str]); 4] = [
        ("serve", &["--listen", "--backend", "--config", "--log-dir", "--max-rooms"]),
        ("simulate", &["--config", "--p1", "--p2", "--backend", "--seed", "--log-dir"]),
        ("replay", &["--config", "<PATH>"]),
        ("analyze", &["--input", "--out", "--instruments"]),
    ];
    for (cmd, flags) in cases {
        let out = run(&[cmd, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for flag in flags {
            assert!(text.contains(flag), "{cmd} --help is missing {flag}:\n{text}");
        }
    }
    let top = String::from_utf8(run(&["--help"]).stdout).unwrap();
    for cmd in ["serve", "simulate", "replay", "analyze"] {
        assert!(top.contains(cmd));
    }
}

#[test]
fn analyze_missing_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "analyze",
        "--input",
        dir.path().join("absent.csv").to_str().unwrap(),
        "--out",
        dir.path().join("r.md").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

#[test]
fn serve_on_busy_port_fails() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["serve", "--listen", &addr, "--log-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&addr));
}

#[test]
fn replay_missing_file_fails() {
    let out = run(&["replay", "/nonexistent/match.log"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/match.log"));
}

#[test]
fn bad_flag_values_are_usage_errors() {
    assert_eq!(run(&["simulate", "--backend", "oracle"]).status.code(), Some(2));
    let out = run(&["simulate", "--p1", "mystery", "--log-dir", tempfile::tempdir().unwrap().path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_then_analyze_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--seed", "3", "--log-dir", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("outcome: Player1"), "{text}");

    // a tiny dataset: four participants, everyone's VOI up by ten points
    let mut data = newsduel_core::analysis::Dataset { rows: Vec::new() };
    for p in 0..4 {
        for (phase, bump) in [(newsduel_core::analysis::Phase::Pre, 0.0), (newsduel_core::analysis::Phase::Post, 10.0)] {
            data.rows.push(newsduel_core::analysis::ResponseRow {
                participant: format!("p{p}"),
                phase,
                mist: Some(vec![newsduel_core::analysis::Veracity::Fake; 20]),
                nmls: Some(vec![3; 35]),
                voi: Some(vec![40.0 + bump + p as f64; 7]),
                self_efficacy: Some(vec![4; 3]),
            });
        }
    }
    let input = dir.path().join("responses.csv");
    std::fs::write(&input, data.to_csv()).unwrap();
    for ext in ["md", "csv"] {
        let report = dir.path().join(format!("report.{ext}"));
        let out = run(&["analyze", "--input", input.to_str().unwrap(), "--out", report.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let body = std::fs::read_to_string(&report).unwrap();
        assert!(body.contains("voi"));
    }
}
