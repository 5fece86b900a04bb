//! Experiment configuration: everything that determines a run's outputs.
//!
//! A config plus the code version determines every output byte, so the
//! output directory deliberately lives outside it — running the same config
//! into two directories must produce identical artifacts.

use std::path::PathBuf;
use std::str::FromStr;

use coreset_consensus::Kernel;
use serde::{Deserialize, Serialize};

/// What the nodes are trying to cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Seeded synthetic points in explicit coordinates, one per node.
    Random {
        nodes: usize,
        dim: usize,
        #[serde(default)]
        distribution: PointDistribution,
        /// Separate dataset seed; defaults to the experiment's root seed, so
        /// set it when sweeping network randomness over a fixed problem.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Two-class training set from a CSV file (label column last, ±1).
    Svm {
        dataset: PathBuf,
        kernel: Kernel,
        #[serde(rename = "C")]
        c: f64,
        /// Number of nodes to spread the points over (round-robin);
        /// default is one point per node.
        #[serde(default)]
        nodes: Option<usize>,
    },
    /// Unlabeled data description (smallest kernel-space sphere).
    Svdd {
        dataset: PathBuf,
        kernel: Kernel,
        #[serde(default)]
        nodes: Option<usize>,
    },
    /// One-class classifier with 2-norm slacks.
    Oneclass {
        dataset: PathBuf,
        kernel: Kernel,
        #[serde(rename = "C")]
        c: f64,
        #[serde(default)]
        nodes: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointDistribution {
    /// Independent standard-normal coordinates.
    #[default]
    Normal,
    /// Independent uniform coordinates on [-1, 1).
    Uniform,
}

/// The communication topology per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphSpec {
    ErdosRenyi { p: f64 },
    Ring,
    /// JSON schedule: a list of rounds, each a list of `[from, to]` pairs,
    /// repeated cyclically.
    File { path: PathBuf },
}

impl FromStr for GraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "ring" {
            return Ok(GraphSpec::Ring);
        }
        if let Some(p) = s.strip_prefix("er:") {
            let p: f64 = p
                .parse()
                .map_err(|_| format!("bad edge probability in {s:?}"))?;
            return Ok(GraphSpec::ErdosRenyi { p });
        }
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GraphSpec::File {
                path: PathBuf::from(path),
            });
        }
        Err(format!(
            "unknown graph spec {s:?}; expected er:P, ring, or file:PATH"
        ))
    }
}

/// Which nodes wake up each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActivitySpec {
    On,
    Bernoulli { q: f64 },
}

impl FromStr for ActivitySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "on" {
            return Ok(ActivitySpec::On);
        }
        if let Some(q) = s.strip_prefix("bernoulli:") {
            let q: f64 = q
                .parse()
                .map_err(|_| format!("bad activity probability in {s:?}"))?;
            return Ok(ActivitySpec::Bernoulli { q });
        }
        Err(format!(
            "unknown activity spec {s:?}; expected on or bernoulli:Q"
        ))
    }
}

/// `linear` or `gaussian:GAMMA`.
pub fn parse_kernel(s: &str) -> Result<Kernel, String> {
    if s == "linear" {
        return Ok(Kernel::Linear);
    }
    if let Some(gamma) = s.strip_prefix("gaussian:") {
        let gamma: f64 = gamma.parse().map_err(|_| format!("bad gamma in {s:?}"))?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(format!("gamma must be positive, got {gamma}"));
        }
        return Ok(Kernel::Gaussian { gamma });
    }
    Err(format!(
        "unknown kernel {s:?}; expected linear or gaussian:GAMMA"
    ))
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub epsilon: f64,
    pub graph: GraphSpec,
    pub activity: ActivitySpec,
    /// Root seed: graph, activity, candidate initialization, and (unless
    /// overridden) the synthetic dataset all derive from it through
    /// purpose-separated streams.
    pub seed: u64,
    pub max_rounds: u64,
    #[serde(default)]
    pub quiet_rounds: Option<u64>,
}
