//! Run configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::analysis::EpsGrid;
use crate::cantor::{geometric_sequence, harmonic_sequence, SequencePack};
use crate::gauge::{thm1_sequence, thm2_sequence, GaugeSpec, DEFAULT_SAFETY};
use crate::mapping::Provenance;

pub const DEFAULT_DEPTH: usize = 40;
pub const DEFAULT_RESOLUTION: usize = 256;
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Root sequence `a_k = t_{2^{-k}}`; needs a gauge with `tau`.
    Thm1,
    /// Vanishing-sum sequence `h(c_n 2^{-k} a_k) ≤ safety · 2^{-2nk}`.
    Thm2,
    /// Sequences given in `sequence`.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Harmonic,
    Geometric,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    /// Use `b = a`, giving the identity map.
    #[serde(default)]
    pub identity: bool,
}

fn default_theorem() -> Theorem {
    Theorem::Thm1
}
fn default_depth() -> usize {
    DEFAULT_DEPTH
}
fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}
fn default_safety() -> f64 {
    DEFAULT_SAFETY
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    /// Gauge JSON file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge_path: Option<PathBuf>,
    #[serde(default = "default_theorem")]
    pub theorem: Theorem,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
    /// Random points per sampled check in `verify`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// The map inputs a config resolves to.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub gauge: GaugeSpec,
    pub pack: SequencePack,
    pub provenance: Provenance,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Reads a config file and inlines a `gauge_path` gauge.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(rel) = cfg.gauge_path.take() {
            if cfg.gauge.is_some() {
                return Err(CliError::Config("give either gauge or gauge_path".into()));
            }
            let full = path.parent().unwrap_or(Path::new(".")).join(&rel);
            let g = fs::read_to_string(&full)
                .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            cfg.gauge = Some(GaugeSpec::from_json(&g).map_err(|e| CliError::Config(e.to_string()))?);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.gauge_path.is_some() {
            return Err(CliError::Config("gauge_path must be resolved with RunConfig::load".into()));
        }
        if self.depth < 1 {
            return Err(CliError::Config("depth must be >= 1".into()));
        }
        if self.resolution < 2 {
            return Err(CliError::Config("resolution must be >= 2".into()));
        }
        if self.resolution > 8192 {
            return Err(CliError::Config("resolution must be <= 8192".into()));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(CliError::Config(format!("safety must be in (0, 1), got {}", self.safety)));
        }
        self.grid()?;
        match self.theorem {
            Theorem::Thm1 | Theorem::Thm2 if self.gauge.is_none() => {
                Err(CliError::Config("thm1 and thm2 need a gauge".into()))
            }
            Theorem::Thm1 if self.gauge.as_ref().and_then(|g| g.tau()).is_none() => {
                Err(CliError::Config("thm1 needs a gauge with a tau factor".into()))
            }
            Theorem::Custom if self.sequence.is_none() => {
                Err(CliError::Config("custom theorem needs a sequence block".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> usize {
        self.gauge
            .as_ref()
            .map(GaugeSpec::dimension)
            .or_else(|| self.sequence.as_ref().and_then(|s| s.dimension))
            .unwrap_or(2)
    }

    /// Configured ε-grid, or the default for the dimension.
    pub fn grid(&self) -> Result<EpsGrid, CliError> {
        match &self.eps_grid {
            Some(s) => s.parse().map_err(|e| CliError::Config(format!("eps_grid: {e}"))),
            None => Ok(EpsGrid::default_for(self.dimension())),
        }
    }

    /// Hex SHA-256 of the canonical JSON of everything except `out`.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        self.validate()?;
        let n = self.dimension();
        let gauge = match &self.gauge {
            Some(g) => g.clone(),
            None => GaugeSpec::from_json(&format!("{{\"n\":{n}}}")).map_err(|e| CliError::Config(e.to_string()))?,
        };
        let (pack, provenance) = match self.theorem {
            Theorem::Thm1 => {
                let tau = gauge.tau().expect("validated");
                let a = thm1_sequence(tau, n, self.depth).map_err(|e| CliError::Numeric(e.to_string()))?;
                let pack = SequencePack::standard(n, a).map_err(|e| CliError::Numeric(e.to_string()))?;
                (pack, Provenance::PositiveMeasure { gauge: gauge.clone() })
            }
            Theorem::Thm2 => {
                let a = thm2_sequence(&gauge, self.depth, self.safety)
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
                let pack = SequencePack::standard(n, a).map_err(|e| CliError::Numeric(e.to_string()))?;
                (
                    pack,
                    Provenance::NullMeasure {
                        gauge: gauge.clone(),
                        safety: self.safety,
                    },
                )
            }
            Theorem::Custom => {
                let seq = self.sequence.as_ref().expect("validated");
                let pack = custom_pack(seq, n, self.depth)?;
                let label = format!("{:?}", seq.family).to_lowercase();
                (pack, Provenance::Custom { label })
            }
        };
        Ok(Resolved {
            gauge,
            pack,
            provenance,
        })
    }
}

fn custom_pack(seq: &SequenceConfig, n: usize, depth: usize) -> Result<SequencePack, CliError> {
    let bad = |e: crate::cantor::CantorError| CliError::Config(e.to_string());
    let a = match seq.family {
        Family::Harmonic => harmonic_sequence(depth),
        Family::Geometric => {
            let ratio = seq.ratio.unwrap_or(0.5);
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(CliError::Config(format!("geometric ratio must be in (0, 1), got {ratio}")));
            }
            geometric_sequence(depth, ratio)
        }
        Family::Explicit => seq
            .a
            .clone()
            .ok_or_else(|| CliError::Config("explicit family needs a".into()))?,
    };
    if seq.identity {
        return SequencePack::identity(n, a).map_err(bad);
    }
    match (&seq.b, &seq.alpha, &seq.beta) {
        (None, None, None) => SequencePack::standard(n, a).map_err(bad),
        (Some(b), None, None) => SequencePack::with_targets(n, a, b.clone()).map_err(bad),
        (Some(b), Some(al), Some(be)) => {
            SequencePack::from_parts(n, a, b.clone(), al.clone(), be.clone()).map_err(bad)
        }
        _ => Err(CliError::Config("alpha and beta need b and each other".into())),
    }
}
