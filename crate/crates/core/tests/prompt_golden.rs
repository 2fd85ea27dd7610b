use std::path::PathBuf;

use newsduel_core::default_config;
use newsduel_core::opinion::{assemble_system_prompt, SECTION_TITLES};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/system_prompt.txt")
}

/// Set `NEWSDUEL_BLESS=1` to rewrite the fixture after an intentional content change.
#[test]
fn default_system_prompt_matches_fixture() {
    let rendered = assemble_system_prompt(&default_config()).unwrap();
    if std::env::var_os("NEWSDUEL_BLESS").is_some() {
        std::fs::write(fixture(), &rendered).unwrap();
    }
    let expected = std::fs::read_to_string(fixture()).unwrap();
    assert!(rendered == expected, "system prompt drifted from fixtures/system_prompt.txt");
}

#[test]
fn sections_in_order_with_alex_block() {
    let rendered = assemble_system_prompt(&default_config()).unwrap();
    let offsets: Vec<usize> = SECTION_TITLES
        .iter()
        .enumerate()
        .map(|(i, t)| rendered.find(&format!("# {}. {t}\n", i + 1)).unwrap())
        .collect();
    assert!(offsets.windows(2).all(|w| w[0] < w[1]));
    assert!(rendered.contains("Project Manager"));
    assert!(rendered.contains("Strongly support Liberal"));
}
