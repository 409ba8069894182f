use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawScore {
    pub method: String,
    pub game: String,
    pub scale: String,
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub method: String,
    pub game: String,
    pub scale: String,
    pub raw: f64,
    pub normalized: f64,
}

/// Raw and min-max normalized scores, one entry per (method, column).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub entries: Vec<ScoreEntry>,
}

/// Rescales each (game, scale) column so its lowest raw score maps to 0
/// and its highest to 1. A column whose scores are all equal maps to 0.
pub fn normalize_scores(raw: &[RawScore]) -> Result<ScoreTable> {
    if raw.iter().any(|r| !r.raw.is_finite()) {
        return contract("raw scores must be finite");
    }
    let mut entries = Vec::with_capacity(raw.len());
    for r in raw {
        let column: Vec<f64> = raw
            .iter()
            .filter(|o| o.game == r.game && o.scale == r.scale)
            .map(|o| o.raw)
            .collect();
        if column.len() < 2 {
            return contract(format!(
                "column {} at {} needs at least two methods",
                r.game, r.scale
            ));
        }
        let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let normalized = if hi > lo { (r.raw - lo) / (hi - lo) } else { 0.0 };
        entries.push(ScoreEntry {
            method: r.method.clone(),
            game: r.game.clone(),
            scale: r.scale.clone(),
            raw: r.raw,
            normalized,
        });
    }
    Ok(ScoreTable { entries })
}

impl ScoreTable {
    pub fn get(&self, method: &str, game: &str, scale: &str) -> Option<&ScoreEntry> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.game == game && e.scale == scale)
    }

    /// Columns `method,game,scale,raw,normalized`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e).map_err(|e| Error::Io(e.into()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
