//! TOML configurations, one table layout per subcommand.

use std::path::{Path, PathBuf};

use paseed::growth::{read_parent_array, tree_from_parent_array, PARENT_MAGIC};
use paseed::harness::{Statistic, ThresholdGrid, DEFAULT_BOOTSTRAP_ROUNDS};
use paseed::{parse_tree, parse_tree_spec, Tree};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Resolves tree references relative to the config file's directory.
#[derive(Debug, Clone)]
pub struct TreeResolver {
    base: PathBuf,
}

impl TreeResolver {
    pub fn new(config_path: Option<&Path>) -> Self {
        let base = config_path
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        TreeResolver { base }
    }

    /// A compact spec (`star:5`, `edges:1-2,2-3`, ...), otherwise a file
    /// holding an edge list or a binary parent array.
    pub fn resolve(&self, spec: &str) -> paseed::Result<Tree> {
        let spec_error = match parse_tree_spec(spec) {
            Ok(t) => return Ok(t),
            Err(e) => e,
        };
        let path = self.base.join(spec.trim());
        if !path.is_file() {
            return Err(paseed::Error::Config(format!(
                "`{spec}` is neither a tree spec ({spec_error}) nor a readable file"
            )));
        }
        let bytes = std::fs::read(&path)?;
        if bytes.starts_with(&PARENT_MAGIC) {
            let parents = read_parent_array(bytes.as_slice())?;
            return Ok(tree_from_parent_array(&parents)?);
        }
        let text = String::from_utf8(bytes)
            .map_err(|_| paseed::Error::Config(format!("{} is not UTF-8 text", path.display())))?;
        Ok(parse_tree(&text)?)
    }

    pub fn statistic(&self, text: &str) -> CliResult<Statistic> {
        Ok(Statistic::parse_with(text, |s| self.resolve(s))?)
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn one() -> usize {
    1
}

fn default_radius() -> u32 {
    1
}

fn default_shape_limit() -> usize {
    16
}

fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP_ROUNDS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowConfig {
    pub seed: String,
    pub n: usize,
    #[serde(default = "one")]
    pub replicas: usize,
    /// Extra sizes at which watched degrees are recorded; `n` is always one.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    /// 1-based labels in the canonical seed labeling.
    #[serde(default)]
    pub watch: Vec<usize>,
    /// Shape histograms are written only up to this `n`.
    #[serde(default = "default_shape_limit")]
    pub shape_histogram_max_n: usize,
    /// Number of leading replicas whose parent arrays are saved.
    #[serde(default)]
    pub save_parents: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailConfig {
    pub tree_size: usize,
    /// Total seed degree of the subset; defaults to the whole seed.
    pub d: Option<u32>,
    #[serde(default)]
    pub t: Vec<f64>,
    pub t_range: Option<TRange>,
}

impl TailConfig {
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        let mut grid = self.t.clone();
        if let Some(r) = &self.t_range {
            if !(r.step > 0.0) || !(r.stop >= r.start) {
                return Err(CliError::Config(format!(
                    "t_range needs step > 0 and stop >= start, got {r:?}"
                )));
            }
            let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
            grid.extend((0..=count).map(|k| r.start + k as f64 * r.step));
        }
        if grid.is_empty() {
            return Err(CliError::Config("tail needs `t` or `t_range`".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub seed: String,
    pub n: usize,
    pub replicas: usize,
    pub statistic: String,
    /// Draws from the limit law for the KS comparison; defaults to `replicas`.
    pub limit_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UmaxConfig {
    pub pattern: String,
    pub hosts: Vec<String>,
    /// Also run exhaustive search (exponential; small hosts only).
    #[serde(default)]
    pub bruteforce: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UmaxSweepConfig {
    pub pattern: String,
    pub seed: String,
    pub checkpoints: Vec<usize>,
    #[serde(default = "one")]
    pub replicas: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalLimitConfig {
    pub seed: String,
    pub n: usize,
    #[serde(default = "default_radius")]
    pub radius: u32,
    pub roots: usize,
    #[serde(default = "one")]
    pub replicas: usize,
    pub polya_samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallDistConfig {
    pub seeds: Vec<String>,
    pub n: usize,
    #[serde(default = "default_radius")]
    pub radius: u32,
    pub roots: usize,
    #[serde(default = "one")]
    pub replicas: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Named(String),
    Values(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Named("auto".into())
    }
}

impl GridSpec {
    pub fn to_grid(&self) -> CliResult<ThresholdGrid> {
        match self {
            GridSpec::Named(s) if s == "auto" => Ok(ThresholdGrid::Auto),
            GridSpec::Named(s) => Err(CliError::Config(format!(
                "thresholds must be \"auto\" or a list of numbers, got \"{s}\""
            ))),
            GridSpec::Values(v) => Ok(ThresholdGrid::Values(v.clone())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvConfig {
    pub seeds: Vec<String>,
    pub n: usize,
    pub replicas: usize,
    pub statistic: String,
    #[serde(default)]
    pub thresholds: GridSpec,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_rounds: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    /// Random cases per randomized check.
    pub cases: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_grid_from_range() {
        let c: TailConfig = parse("tree_size = 2\nd = 1\nt_range = { start = 0.5, stop = 8.0, step = 0.5 }").unwrap();
        let g = c.grid().unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[3], 2.0);
        assert_eq!(*g.last().unwrap(), 8.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse::<GrowConfig>("seed = \"star:3\"\nn = 10\nreplica = 3").is_err());
    }

    #[test]
    fn threshold_specs() {
        let c: TvConfig = parse("seeds = [\"star:3\", \"path:3\"]\nn = 10\nreplicas = 8\nstatistic = \"max_degree_scaled\"").unwrap();
        assert_eq!(c.thresholds.to_grid().unwrap(), ThresholdGrid::Auto);
        let c: TvConfig = parse(
            "seeds = [\"star:3\", \"path:3\"]\nn = 10\nreplicas = 8\nstatistic = \"max_degree_scaled\"\nthresholds = [1.0, 2]",
        )
        .unwrap();
        assert_eq!(c.thresholds.to_grid().unwrap(), ThresholdGrid::Values(vec![1.0, 2.0]));
    }

    #[test]
    fn resolver_reads_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.txt"), "1 2\n2 3\n").unwrap();
        let r = TreeResolver::new(Some(&dir.path().join("c.toml")));
        assert_eq!(r.resolve("t.txt").unwrap().vertex_count(), 3);
        assert_eq!(r.resolve("star:4").unwrap().vertex_count(), 4);
        assert!(r.resolve("missing.txt").is_err());
    }
}
