use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{build_office_nmdp, Cell, GridMap, Nmdp};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::prm::{parse_prm, Prm};

fn default_waypoints() -> Vec<String> {
    vec!["c".into(), "o".into()]
}

/// Environment configuration. Paths are relative to the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub map: PathBuf,
    pub truth_prm: PathBuf,
    pub n_episode: usize,
    #[serde(default)]
    pub terminal_labels: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    /// Cells the built-in shortest-path policy visits, by proposition.
    #[serde(default = "default_waypoints")]
    pub waypoints: Vec<String>,
}

impl EnvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: EnvConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        if cfg.n_episode == 0 {
            return Err(Error::Config("n_episode must be positive".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub config: EnvConfig,
    pub map: GridMap,
    pub truth: Prm,
    pub nmdp: Nmdp,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

impl Environment {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let config = EnvConfig::parse(&read(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let map = GridMap::parse(&read(&base.join(&config.map))?)?;
        let truth = parse_prm(&read(&base.join(&config.truth_prm))?)?;
        Self::assemble(config, map, truth)
    }

    pub fn assemble(config: EnvConfig, map: GridMap, truth: Prm) -> Result<Self> {
        let terminal = config
            .terminal_labels
            .iter()
            .map(|t| truth.ap().parse_label(t))
            .collect::<Result<Vec<Label>>>()
            .map_err(|e| Error::Config(format!("terminal_labels: {e}")))?;
        let nmdp = build_office_nmdp(&map, &truth)?.with_terminal_labels(terminal);
        Ok(Self { config, map, truth, nmdp })
    }

    pub fn waypoints(&self) -> Result<Vec<Cell>> {
        self.config
            .waypoints
            .iter()
            .map(|w| match w.as_str() {
                "c" => Ok(Cell::Coffee),
                "o" => Ok(Cell::Office),
                "*" => Ok(Cell::Decoration),
                _ => Err(Error::Config(format!("unknown waypoint `{w}`"))),
            })
            .collect()
    }
}
