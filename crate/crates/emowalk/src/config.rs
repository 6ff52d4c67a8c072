//! Run configuration: a TOML file with one table per concern, overridable
//! by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use emowalk_core::eval::{Protocol, Task};
use emowalk_core::features::WindowingConfig;
use emowalk_core::ingest::PrefixMap;
use emowalk_core::learners::{HyperParams, LogisticConfig};
use emowalk_core::synth::SynthSpec;
use emowalk_core::tuning::{FoldMode, SearchSpace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TaskChoice {
    #[default]
    Binary,
    Ternary,
    Both,
}

impl TaskChoice {
    pub fn tasks(self) -> &'static [Task] {
        match self {
            TaskChoice::Binary => &[Task::Binary],
            TaskChoice::Ternary => &[Task::Ternary],
            TaskChoice::Both => &[Task::Binary, Task::Ternary],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub encoding: Option<PathBuf>,
    pub raw_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    /// Field separator of encoding and raw files.
    pub delimiter: String,
    /// Reject malformed raw rows and missing raw files instead of skipping them.
    pub strict: bool,
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            delimiter: ",".into(),
            strict: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub k: usize,
    pub n_iter: usize,
    pub seed: u64,
    pub fold_mode: FoldMode,
    pub task: TaskChoice,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        let p = Protocol::default();
        Self {
            k: p.k,
            n_iter: p.n_iter,
            seed: p.seed,
            fold_mode: p.fold_mode,
            task: TaskChoice::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub io: IoConfig,
    pub windowing: WindowingConfig,
    pub protocol: ProtocolConfig,
    pub forest: HyperParams,
    pub logistic: LogisticConfig,
    pub search: SearchSpace,
    /// Condition-code prefix to condition number.
    pub prefixes: BTreeMap<String, u8>,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            io: IoConfig::default(),
            windowing: WindowingConfig::default(),
            protocol: ProtocolConfig::default(),
            forest: HyperParams::default(),
            logistic: LogisticConfig::default(),
            search: SearchSpace::default(),
            prefixes: PrefixMap::default()
                .entries()
                .iter()
                .map(|(p, c)| (p.clone(), *c))
                .collect(),
            synth: SynthSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::usage(format!("config {}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<RunConfig> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    pub fn validate(&self) -> Result<()> {
        self.delimiter()?;
        if self.protocol.seed > i64::MAX as u64 || self.synth.seed > i64::MAX as u64 {
            return Err(Error::usage("seeds must not exceed 9223372036854775807"));
        }
        if self.protocol.k < 2 {
            return Err(Error::usage("protocol.k must be at least 2"));
        }
        if self.protocol.n_iter == 0 {
            return Err(Error::usage("protocol.n_iter must be at least 1"));
        }
        self.windowing.stride().map_err(Error::usage)?;
        self.forest
            .validate()
            .map_err(|e| Error::usage(format!("forest: {e}")))?;
        self.search
            .validate()
            .map_err(|e| Error::usage(format!("search: {e}")))?;
        self.prefix_map()?;
        Ok(())
    }

    pub fn delimiter(&self) -> Result<u8> {
        match self.io.delimiter.as_bytes() {
            [b] if b.is_ascii() && *b != b'"' && *b != b'\n' && *b != b'\r' => Ok(*b),
            _ if self.io.delimiter == "\\t" => Ok(b'\t'),
            _ => Err(Error::usage(format!(
                "delimiter must be a single ASCII character, got {:?}",
                self.io.delimiter
            ))),
        }
    }

    pub fn prefix_map(&self) -> Result<PrefixMap> {
        self.prefixes.iter().try_fold(PrefixMap::empty(), |map, (p, &c)| {
            map.with(p, c)
                .ok_or_else(|| Error::usage(format!("prefix {p:?} maps to unknown condition {c}")))
        })
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            k: self.protocol.k,
            n_iter: self.protocol.n_iter,
            seed: self.protocol.seed,
            fold_mode: self.protocol.fold_mode,
            space: self.search.clone(),
            logistic: self.logistic,
            forest: self.forest,
        }
    }

    /// The configuration with input and output locations removed, as TOML.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.paths = Paths::default();
        toml::to_string(&c).expect("configuration serializes")
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
