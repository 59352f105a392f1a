//! System Usability Scale scoring.
//!
//! `Printed` scores even items as Q−1 and odd items as 5−Q and combines them
//! as 2.5·(Sum_E − 5·|E| + 25 − Sum_O); it can leave [0, 100]. `Standard` is
//! the conventional scale (odd Q−1, even 5−Q, total × 2.5).

use serde::{Deserialize, Serialize};

use crate::error::BenchmarkError;

pub const SCORED_ITEMS: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SusMode {
    #[default]
    Printed,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusScore {
    pub score: f64,
    pub mode: SusMode,
    /// Number of answers beyond the ten scored items, which are ignored.
    pub ignored_answers: usize,
    /// Set when the printed formula is used, whose range is not [0, 100].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn sus_score(answers: &[u8], mode: SusMode) -> Result<SusScore, BenchmarkError> {
    if answers.len() < SCORED_ITEMS {
        return Err(BenchmarkError::TooFewAnswers(answers.len()));
    }
    for (i, &q) in answers.iter().enumerate() {
        if !(1..=5).contains(&q) {
            return Err(BenchmarkError::OutOfRange { position: i + 1, value: q });
        }
    }
    let scored = &answers[..SCORED_ITEMS];
    // Items are numbered from 1, so index 0 is item 1 (odd).
    let (odd, even): (Vec<(usize, &u8)>, Vec<(usize, &u8)>) = scored.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let odd: Vec<f64> = odd.into_iter().map(|(_, q)| f64::from(*q)).collect();
    let even: Vec<f64> = even.into_iter().map(|(_, q)| f64::from(*q)).collect();
    let score = match mode {
        SusMode::Printed => {
            let sum_e: f64 = even.iter().map(|q| q - 1.0).sum();
            let sum_o: f64 = odd.iter().map(|q| 5.0 - q).sum();
            2.5 * (sum_e - 5.0 * even.len() as f64 + 25.0 - sum_o)
        }
        SusMode::Standard => {
            let s: f64 = odd.iter().map(|q| q - 1.0).sum::<f64>() + even.iter().map(|q| 5.0 - q).sum::<f64>();
            2.5 * s
        }
    };
    Ok(SusScore {
        score,
        mode,
        ignored_answers: answers.len() - SCORED_ITEMS,
        note: (mode == SusMode::Printed)
            .then(|| "printed formula; even/odd roles are swapped relative to the conventional scale".to_string()),
    })
}

/// Usability band: below 50 poor, 50 to 69 acceptable, 70 to 84 good, above 84 excellent.
pub fn sus_band(score: f64) -> &'static str {
    if score < 50.0 {
        "poor"
    } else if score < 70.0 {
        "acceptable"
    } else if score <= 84.0 {
        "good"
    } else {
        "excellent"
    }
}
