use std::cmp::Ordering;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{GameError, PerRole, PublicOpinion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Player1,
    Player2,
    Draw,
}

impl Winner {
    /// Player1 <-> Player2, Draw unchanged.
    pub fn mirrored(self) -> Self {
        match self {
            Winner::Player1 => Winner::Player2,
            Winner::Player2 => Winner::Player1,
            Winner::Draw => Winner::Draw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub winner: Winner,
    pub final_trust_sum: u32,
    pub final_currency: PerRole<u32>,
}

/// Exact mean trust of a panel.
pub fn mean_trust(opinion: &PublicOpinion) -> Result<Ratio<u32>, GameError> {
    if opinion.is_empty() {
        return Err(GameError::EmptyPanel);
    }
    Ok(opinion.average())
}

/// Rounds a non-negative rational to the nearest integer, halves going up.
pub fn round_half_up(value: Ratio<u32>) -> u32 {
    let (n, d) = (*value.numer(), *value.denom());
    (2 * n + d) / (2 * d)
}

/// Currency earned at the end of a round: Player 1 gets the rounded mean
/// trust, Player 2 gets ten minus it.
pub fn round_rewards(opinion: &PublicOpinion) -> PerRole<u32> {
    let rounded = round_half_up(opinion.average()).min(10);
    PerRole::new(rounded, 10 - rounded)
}

/// Compares the panel mean against the neutral midpoint 5 using integers only.
pub fn compare_to_neutral(opinion: &PublicOpinion) -> Ordering {
    let doubled_sum = 2 * opinion.trust_sum();
    let midpoint = 10 * opinion.len() as u32;
    doubled_sum.cmp(&midpoint)
}

/// Mean above 5 wins for Player 1, below 5 for Player 2. At exactly 5 the
/// player holding strictly more currency wins; equal holdings draw.
pub fn determine_winner(final_opinion: &PublicOpinion, currency: PerRole<u32>) -> Outcome {
    let winner = match compare_to_neutral(final_opinion) {
        Ordering::Greater => Winner::Player1,
        Ordering::Less => Winner::Player2,
        Ordering::Equal => match currency.influencer.cmp(&currency.debunker) {
            Ordering::Greater => Winner::Player1,
            Ordering::Less => Winner::Player2,
            Ordering::Equal => Winner::Draw,
        },
    };
    Outcome { winner, final_trust_sum: final_opinion.trust_sum(), final_currency: currency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{PersonaOpinion, Trust};

    fn panel(trusts: &[u8]) -> PublicOpinion {
        PublicOpinion::new(
            trusts
                .iter()
                .enumerate()
                .map(|(i, &t)| PersonaOpinion {
                    persona_id: format!("p{i}"),
                    reaction: String::new(),
                    trust: Trust::new(t).unwrap(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mean_trust_examples() {
        assert_eq!(mean_trust(&panel(&[7, 7, 7, 7, 7])).unwrap(), Ratio::from_integer(7));
        assert_eq!(mean_trust(&panel(&[10, 0, 10, 0, 5])).unwrap(), Ratio::from_integer(5));
        // 7 + 8 + 6 + 7 + 7 = 35, 35 / 5 = 7
        assert_eq!(mean_trust(&panel(&[7, 8, 6, 7, 7])).unwrap(), Ratio::new(35, 5));
        assert_eq!(mean_trust(&panel(&[7, 8])).unwrap(), Ratio::new(15, 2));
    }

    #[test]
    fn rewards_follow_rounded_mean() {
        assert_eq!(round_rewards(&panel(&[7, 7, 7, 7, 7])), PerRole::new(7, 3));
        assert_eq!(round_rewards(&panel(&[5, 5, 5, 5, 5])), PerRole::new(5, 5));
        // 26 / 5 = 5.2
        assert_eq!(round_rewards(&panel(&[6, 5, 5, 5, 5])), PerRole::new(5, 5));
        // 5.5 rounds up
        assert_eq!(round_rewards(&panel(&[5, 6])), PerRole::new(6, 4));
        assert_eq!(round_rewards(&panel(&[0, 0, 0, 0, 0])), PerRole::new(0, 10));
        assert_eq!(round_rewards(&panel(&[10, 10, 10, 10, 10])), PerRole::new(10, 0));
    }

    #[test]
    fn winner_examples() {
        let o = determine_winner(&panel(&[6, 6, 6, 5, 5]), PerRole::new(0, 0));
        assert_eq!(o.winner, Winner::Player1);
        assert_eq!(o.final_trust_sum, 28);
        let o = determine_winner(&panel(&[5, 5, 5, 5, 5]), PerRole::new(30, 40));
        assert_eq!(o.winner, Winner::Player2);
        let o = determine_winner(&panel(&[5, 5, 5, 5, 5]), PerRole::new(30, 30));
        assert_eq!(o.winner, Winner::Draw);
        let o = determine_winner(&panel(&[4, 5, 5, 5, 5]), PerRole::new(99, 0));
        assert_eq!(o.winner, Winner::Player2);
    }

    #[test]
    fn four_persona_midpoint_is_exact() {
        let o = determine_winner(&panel(&[10, 0, 5, 5]), PerRole::new(1, 2));
        assert_eq!(o.winner, Winner::Player2);
        let o = determine_winner(&panel(&[10, 1, 5, 5]), PerRole::new(1, 2));
        assert_eq!(o.winner, Winner::Player1);
    }
}
