use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HullError, Result};

/// Environment variable overriding the calibration file path.
pub const TOLERANCES_ENV: &str = "HULLSPEC_TOLERANCES";
/// Thresholds never drop below this.
pub const THRESHOLD_FLOOR: f64 = 1e-12;
/// Safety factor applied to calibrated measurements.
pub const SAFETY_FACTOR: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceEntry {
    pub measured: f64,
    pub floor: f64,
    pub threshold: f64,
}

impl ToleranceEntry {
    /// threshold = max(1.5·measured, floor, 10⁻¹²).
    pub fn from_measurement(measured: f64, floor: f64) -> Self {
        ToleranceEntry {
            measured,
            floor,
            threshold: (SAFETY_FACTOR * measured).max(floor).max(THRESHOLD_FLOOR),
        }
    }
}

/// Calibrated pass thresholds, keyed `<scenario key>.<quantity>`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub tool_version: String,
    pub entries: BTreeMap<String, ToleranceEntry>,
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

impl Tolerances {
    pub fn new() -> Self {
        Tolerances { tool_version: env!("CARGO_PKG_VERSION").to_string(), ..Default::default() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HullError::Io(format!("{}: {e}", path.display())))?;
        let mut t: Tolerances = serde_json::from_str(&text)
            .map_err(|e| HullError::Config { line: e.line(), column: e.column(), message: e.to_string() })?;
        t.source = Some(path.to_path_buf());
        Ok(t)
    }

    /// The file named by HULLSPEC_TOLERANCES if set, else `configured`.
    /// A missing file yields an empty set (nothing is checked).
    pub fn locate(configured: Option<PathBuf>) -> Result<Self> {
        let path = std::env::var_os(TOLERANCES_ENV).map(PathBuf::from).or(configured);
        match path {
            Some(p) if p.exists() => Self::load(&p),
            Some(p) => Ok(Tolerances { source: Some(p), ..Self::new() }),
            None => Ok(Self::new()),
        }
    }

    pub fn threshold(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.threshold)
    }

    pub fn record(&mut self, key: &str, measured: f64, floor: f64) {
        self.entries.insert(key.to_string(), ToleranceEntry::from_measurement(measured, floor));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tolerances serialize") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_and_round_trip() {
        let mut t = Tolerances::new();
        t.record("identity_grid.grid", 0.0, 0.0);
        t.record("floquet_q2", 3e-15, 1e-8);
        t.record("fib.spectral", 0.004, 0.0);
        assert_eq!(t.threshold("identity_grid.grid"), Some(1e-12));
        assert_eq!(t.threshold("floquet_q2"), Some(1e-8));
        assert!((t.threshold("fib.spectral").unwrap() - 0.006).abs() < 1e-18);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tolerances.json");
        std::fs::write(&p, t.to_json()).unwrap();
        let back = Tolerances::load(&p).unwrap();
        assert_eq!(back.entries, t.entries);
        assert!(Tolerances::locate(Some(dir.path().join("absent.json"))).unwrap().entries.is_empty());
    }
}
