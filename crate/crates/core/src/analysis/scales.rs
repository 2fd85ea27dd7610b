use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

pub const MIST_ITEMS: usize = 20;
pub const NMLS_ITEMS: usize = 35;
pub const VOI_ITEMS: usize = 7;
pub const SELF_EFFICACY_ITEMS: usize = 3;

/// A MIST headline judgement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Veracity {
    Fake,
    Real,
}

impl Veracity {
    pub fn negated(self) -> Self {
        match self {
            Veracity::Fake => Veracity::Real,
            Veracity::Real => Veracity::Fake,
        }
    }
}

impl std::str::FromStr for Veracity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" | "f" => Ok(Veracity::Fake),
            "real" | "r" => Ok(Veracity::Real),
            other => Err(format!("`{other}` is neither fake nor real")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmlsSubscale {
    FunctionalConsuming,
    CriticalConsuming,
    FunctionalProsuming,
    CriticalProsuming,
}

impl NmlsSubscale {
    pub const ALL: [NmlsSubscale; 4] = [
        NmlsSubscale::FunctionalConsuming,
        NmlsSubscale::CriticalConsuming,
        NmlsSubscale::FunctionalProsuming,
        NmlsSubscale::CriticalProsuming,
    ];

    pub fn label(self) -> &'static str {
        match self {
            NmlsSubscale::FunctionalConsuming => "functional_consuming",
            NmlsSubscale::CriticalConsuming => "critical_consuming",
            NmlsSubscale::FunctionalProsuming => "functional_prosuming",
            NmlsSubscale::CriticalProsuming => "critical_prosuming",
        }
    }
}

/// Which subscale each NMLS item (in questionnaire order) belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NmlsItemMap(pub Vec<NmlsSubscale>);

impl NmlsItemMap {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.0.len() != NMLS_ITEMS {
            return Err(AnalysisError::BadItemMap(format!(
                "{} items mapped, expected {NMLS_ITEMS}",
                self.0.len()
            )));
        }
        for sub in NmlsSubscale::ALL {
            if !self.0.contains(&sub) {
                return Err(AnalysisError::BadItemMap(format!("no items for {}", sub.label())));
            }
        }
        Ok(())
    }

    pub fn item_count(&self, sub: NmlsSubscale) -> usize {
        self.0.iter().filter(|s| **s == sub).count()
    }
}

/// Answer key and item map for the bundled questionnaires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruments {
    pub mist_key: Vec<Veracity>,
    pub nmls_items: NmlsItemMap,
}

const DEFAULT_INSTRUMENTS: &str = include_str!("../../content/instruments.json");

impl Instruments {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let inst: Instruments =
            serde_json::from_str(text).map_err(|e| AnalysisError::BadItemMap(e.to_string()))?;
        if inst.mist_key.len() != MIST_ITEMS {
            return Err(AnalysisError::LengthMismatch { expected: MIST_ITEMS, got: inst.mist_key.len() });
        }
        inst.nmls_items.validate()?;
        Ok(inst)
    }
}

impl Default for Instruments {
    fn default() -> Self {
        Instruments::from_json(DEFAULT_INSTRUMENTS).expect("bundled instruments are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NmlsScores {
    pub subscales: BTreeMap<NmlsSubscale, u32>,
    pub total: u32,
}

/// Per-participant, per-phase scores; `None` where items were left blank.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaleScores {
    pub mist: Option<u32>,
    pub nmls: Option<NmlsScores>,
    pub voi: Option<f64>,
    pub self_efficacy: Option<f64>,
}

fn check_len(got: usize, expected: usize) -> Result<(), AnalysisError> {
    if got != expected {
        return Err(AnalysisError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Number of headlines classified as in `key`.
pub fn score_mist(answers: &[Veracity], key: &[Veracity]) -> Result<u32, AnalysisError> {
    check_len(key.len(), MIST_ITEMS)?;
    check_len(answers.len(), MIST_ITEMS)?;
    Ok(answers.iter().zip(key).filter(|(a, k)| a == k).count() as u32)
}

/// Sums of the 1..=5 Likert responses per subscale, and overall.
pub fn score_nmls(responses: &[u8], item_map: &NmlsItemMap) -> Result<NmlsScores, AnalysisError> {
    item_map.validate()?;
    check_len(responses.len(), NMLS_ITEMS)?;
    let mut subscales: BTreeMap<NmlsSubscale, u32> =
        NmlsSubscale::ALL.iter().map(|s| (*s, 0)).collect();
    for (i, (&r, sub)) in responses.iter().zip(&item_map.0).enumerate() {
        if !(1..=5).contains(&r) {
            return Err(AnalysisError::OutOfRange { item: i + 1, value: f64::from(r) });
        }
        *subscales.get_mut(sub).expect("all subscales present") += u32::from(r);
    }
    let total = subscales.values().sum();
    Ok(NmlsScores { subscales, total })
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Mean of the seven 0..=100 sliders.
pub fn score_voi(responses: &[f64]) -> Result<f64, AnalysisError> {
    check_len(responses.len(), VOI_ITEMS)?;
    for (i, &r) in responses.iter().enumerate() {
        if !(0.0..=100.0).contains(&r) {
            return Err(AnalysisError::OutOfRange { item: i + 1, value: r });
        }
    }
    Ok(mean(responses.iter().copied(), VOI_ITEMS))
}

/// Mean of the three 1..=7 agreement items.
pub fn score_selfefficacy(responses: &[u8]) -> Result<f64, AnalysisError> {
    check_len(responses.len(), SELF_EFFICACY_ITEMS)?;
    for (i, &r) in responses.iter().enumerate() {
        if !(1..=7).contains(&r) {
            return Err(AnalysisError::OutOfRange { item: i + 1, value: f64::from(r) });
        }
    }
    Ok(mean(responses.iter().map(|&r| f64::from(r)), SELF_EFFICACY_ITEMS))
}
