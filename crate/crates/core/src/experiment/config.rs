use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{catalog, Configuration, SubshiftSpec};
use crate::error::{HullError, Result};
use crate::operators::{self, Boundary, CoefficientScheme};
use crate::spectral::{CertifySpec, GridSpec, PersistenceSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullConfig {
    /// One of the catalog names.
    pub name: String,
    /// Period for `period_q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    /// Lattice rank for `full_pm1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub name: String,
    #[serde(default = "one")]
    pub block_dim: usize,
    /// Letter values, overriding the hull alphabet's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

/// A configuration of the hull, as in `{"rule": "explicit", "seed": 42}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConfigSpec {
    /// The hull's reference point, optionally shifted.
    Reference {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<Vec<i64>>,
    },
    /// A seeded hull point (see `SubshiftSpec::sample`).
    Sample { seed: u64 },
    /// Letters drawn site by site from the pinned hash.
    Explicit { seed: u64 },
    Constant { letter: String },
    Periodic { periods: Vec<i64>, cell: Vec<String> },
    HalfSpace { axis: usize, upper: String, lower: String },
}

impl ConfigSpec {
    pub fn build(&self, hull: &SubshiftSpec) -> Result<Configuration> {
        let alphabet = hull.alphabet().clone();
        let letter = |name: &str| {
            alphabet
                .letter(name)
                .ok_or_else(|| HullError::Domain(format!("letter {name:?} not in alphabet {:?}", alphabet.names())))
        };
        match self {
            ConfigSpec::Reference { shift } => {
                let r = hull.reference()?;
                match shift {
                    Some(by) => r.shift(&hull.group().element(by)?),
                    None => Ok(r),
                }
            }
            ConfigSpec::Sample { seed } => hull.sample(*seed),
            ConfigSpec::Explicit { seed } => Ok(Configuration::hashed(hull.group(), alphabet.clone(), *seed)),
            ConfigSpec::Constant { letter: l } => Configuration::constant(hull.group(), alphabet.clone(), letter(l)?),
            ConfigSpec::Periodic { periods, cell } => {
                let cell = cell.iter().map(|l| letter(l)).collect::<Result<Vec<_>>>()?;
                Configuration::periodic(hull.group(), alphabet.clone(), periods.clone(), cell)
            }
            ConfigSpec::HalfSpace { axis, upper, lower } => {
                Configuration::half_space(hull.group(), alphabet.clone(), *axis, letter(upper)?, letter(lower)?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSchedule {
    pub sizes: Vec<u64>,
    #[serde(default = "truncate")]
    pub boundary: Boundary,
}

fn truncate() -> Boundary {
    Boundary::Truncate
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub resolution: [usize; 2],
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Deviations are compared only where both grids exceed this value.
    #[serde(default = "default_floor")]
    pub sigma_floor: f64,
    /// Window for the grid; defaults to the last scheduled size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_size: Option<u64>,
    /// Hard bound on |area difference| / node count, checked besides the
    /// calibrated threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_fraction_limit: Option<f64>,
}

fn default_floor() -> f64 {
    0.05
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::new((self.re[0], self.re[1]), (self.im[0], self.im[1]), self.resolution[0], self.resolution[1])
    }
}

/// How escape sequences for limit-operator probes are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeConfig {
    /// g_n = F_{2n+2} + c for c in [offsets[0], offsets[1]).
    Fibonacci { offsets: [i64; 2], count: usize, m: u32 },
    /// One recurrence sequence per legal pattern on ball(pattern_radius),
    /// searched in ball(radius). Probes stabilize only if pattern_radius
    /// covers their observation ball.
    Patterns { pattern_radius: u32, radius: u32, count: usize, m: u32 },
    /// g_n = n·step for n = start..start+count, one sequence per step, each
    /// tagged with the direction of its step (lattices only).
    Arithmetic {
        steps: Vec<Vec<i64>>,
        start: u64,
        count: usize,
        m: u32,
    },
}

impl ProbeConfig {
    pub fn m(&self) -> u32 {
        match self {
            ProbeConfig::Fibonacci { m, .. } | ProbeConfig::Patterns { m, .. } | ProbeConfig::Arithmetic { m, .. } => *m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionConfig {
    pub reference_radius: u32,
    pub persistence: PersistenceSpec,
    /// Fixed tolerance, used when the calibration file has no entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    pub theta_samples: usize,
}

/// Where pass thresholds come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceRef {
    /// Path of the calibration file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Entry prefix in the calibration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub scenario: String,
    /// Path relative to the calibration config file.
    pub config: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Runs whose measurements become tolerance entries.
    pub runs: Vec<CalibrationTarget>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull: Option<HullConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub configurations: Vec<ConfigSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<WindowSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persistence: Option<PersistenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclusion: Option<InclusionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Directory of the file this config was read from; not serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// 1-based (line, column) of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            HullError::Config { line, column, message: e.message().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HullError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HullError::Domain(format!("cannot serialize config: {e}")))
    }

    /// A path from the config, resolved against the config's directory.
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn hull(&self) -> Result<SubshiftSpec> {
        let h = self.hull.as_ref().ok_or_else(|| missing("hull"))?;
        catalog::by_name(&h.name, h.q.unwrap_or(2), h.rank.unwrap_or(1))
    }

    pub fn scheme(&self, hull: &SubshiftSpec) -> Result<CoefficientScheme> {
        let s = self.scheme.as_ref().ok_or_else(|| missing("scheme"))?;
        let alphabet = match &s.values {
            Some(v) => Arc::new(hull.alphabet().with_values(v.clone())?),
            None => hull.alphabet().clone(),
        };
        operators::by_name(&s.name, hull.group(), alphabet, s.block_dim)
    }

    pub fn configurations(&self, hull: &SubshiftSpec) -> Result<Vec<Configuration>> {
        if self.configurations.is_empty() {
            return Err(missing("configurations"));
        }
        self.configurations.iter().map(|c| c.build(hull)).collect()
    }

    pub fn windows(&self) -> Result<&WindowSchedule> {
        let w = self.windows.as_ref().ok_or_else(|| missing("windows"))?;
        if w.sizes.is_empty() {
            return Err(HullError::Domain("[windows] sizes must not be empty".into()));
        }
        Ok(w)
    }

    pub fn tolerance_key(&self) -> Option<&str> {
        self.tolerances.as_ref().and_then(|t| t.key.as_deref())
    }
}

fn missing(section: &str) -> HullError {
    HullError::Domain(format!("config is missing [{section}]"))
}
