//! Threshold parameters for the graded belief operators.
//!
//! Each operator name maps to a probability threshold in [0, 1]; the
//! superlative strength modifier `alpha_most` scales a threshold up or down.
//! Two presets ship with the crate: the calibrated defaults used for scoring,
//! and the neutral starting point used when fitting thresholds to ratings.

use std::collections::BTreeMap;

use thiserror::Error;

/// Operator words that carry a tunable probability threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThresholdName {
    Believes,
    Certain,
    Uncertain,
    Likely,
    Unlikely,
    Could,
    Might,
    May,
    Should,
    Must,
}

impl ThresholdName {
    /// All threshold names in declaration order (the order coordinate
    /// ascent visits them during fitting).
    pub const ALL: [ThresholdName; 10] = [
        ThresholdName::Believes,
        ThresholdName::Certain,
        ThresholdName::Uncertain,
        ThresholdName::Likely,
        ThresholdName::Unlikely,
        ThresholdName::Could,
        ThresholdName::Might,
        ThresholdName::May,
        ThresholdName::Should,
        ThresholdName::Must,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdName::Believes => "believes",
            ThresholdName::Certain => "certain",
            ThresholdName::Uncertain => "uncertain",
            ThresholdName::Likely => "likely",
            ThresholdName::Unlikely => "unlikely",
            ThresholdName::Could => "could",
            ThresholdName::Might => "might",
            ThresholdName::May => "may",
            ThresholdName::Should => "should",
            ThresholdName::Must => "must",
        }
    }

    pub fn parse(s: &str) -> Option<ThresholdName> {
        ThresholdName::ALL.iter().copied().find(|n| n.as_str() == s)
    }
}

impl std::fmt::Display for ThresholdName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ThresholdError {
    #[error("unknown threshold name `{0}`")]
    UnknownName(String),
    #[error("threshold `{name}` out of range: {value} (want 0..=1)")]
    OutOfRange { name: String, value: f64 },
    #[error("alpha_most must be positive, got {0}")]
    BadAlpha(f64),
    #[error("malformed threshold line {line}: `{text}` (want `name value`)")]
    BadLine { line: usize, text: String },
    #[error("unparseable threshold value on line {line}: `{text}`")]
    BadValue { line: usize, text: String },
}

/// A complete assignment of thresholds plus the superlative strength factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    values: [f64; 10],
    /// Multiplier for strength superlatives ("the most likely", "the least
    /// certain"): raises a threshold to min(1, alpha * theta) or lowers it
    /// to theta / alpha.
    pub alpha_most: f64,
}

impl ThresholdTable {
    /// Calibrated defaults used for statement scoring.
    pub fn defaults() -> ThresholdTable {
        ThresholdTable {
            values: [0.75, 0.95, 0.70, 0.70, 0.40, 0.20, 0.20, 0.30, 0.80, 0.95],
            alpha_most: 1.5,
        }
    }

    /// Neutral starting point for threshold fitting. Differs from
    /// [`ThresholdTable::defaults`] in `uncertain` (0.50) and `likely` (0.60).
    pub fn fitting_initial() -> ThresholdTable {
        ThresholdTable {
            values: [0.75, 0.95, 0.50, 0.60, 0.40, 0.20, 0.20, 0.30, 0.80, 0.95],
            alpha_most: 1.5,
        }
    }

    pub fn get(&self, name: ThresholdName) -> f64 {
        self.values[name as usize]
    }

    pub fn set(&mut self, name: ThresholdName, value: f64) -> Result<(), ThresholdError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(ThresholdError::OutOfRange {
                name: name.as_str().to_owned(),
                value,
            });
        }
        self.values[name as usize] = value;
        Ok(())
    }

    /// Threshold for a strength superlative: `most` direction saturates at 1.
    pub fn most_threshold(&self, name: ThresholdName) -> f64 {
        (self.alpha_most * self.get(name)).min(1.0)
    }

    /// Threshold for a `least` strength superlative.
    pub fn least_threshold(&self, name: ThresholdName) -> f64 {
        self.get(name) / self.alpha_most
    }

    /// Parses override lines of the form `name value`, one per line. Blank
    /// lines and lines starting with `#` are skipped. `alpha_most` may be
    /// overridden by name alongside the ten operator thresholds.
    pub fn apply_overrides(&mut self, text: &str) -> Result<(), ThresholdError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(ThresholdError::BadLine {
                    line: idx + 1,
                    text: raw.to_owned(),
                });
            };
            let value: f64 = value.parse().map_err(|_| ThresholdError::BadValue {
                line: idx + 1,
                text: raw.to_owned(),
            })?;
            if name == "alpha_most" {
                if value <= 0.0 {
                    return Err(ThresholdError::BadAlpha(value));
                }
                self.alpha_most = value;
            } else {
                let name = ThresholdName::parse(name)
                    .ok_or_else(|| ThresholdError::UnknownName(name.to_owned()))?;
                self.set(name, value)?;
            }
        }
        Ok(())
    }

    /// Name/value view in declaration order, for config echoes.
    pub fn entries(&self) -> BTreeMap<&'static str, f64> {
        let mut map: BTreeMap<&'static str, f64> = ThresholdName::ALL
            .iter()
            .map(|&n| (n.as_str(), self.get(n)))
            .collect();
        map.insert("alpha_most", self.alpha_most);
        map
    }
}

impl Default for ThresholdTable {
    fn default() -> ThresholdTable {
        ThresholdTable::defaults()
    }
}
