//! Run configuration and input specifications.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use qrdm_core::{Algorithm, DenseMatrix, DmParams, StopCriterion};

use crate::gen::{kahan_matrix_c, random_rank_deficient};
use crate::mm::read_matrix_market;

/// A generated input. Random matrices take their seed from the run.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Identity { n: usize },
    Kahan { n: usize, c: f64 },
    Random { m: usize, n: usize, r: usize, gap: f64 },
}

impl GenSpec {
    pub fn generate(&self, seed: u64) -> qrdm_core::Result<DenseMatrix> {
        match *self {
            GenSpec::Identity { n } => Ok(DenseMatrix::identity(n)),
            GenSpec::Kahan { n, c } => kahan_matrix_c(n, c),
            GenSpec::Random { m, n, r, gap } => random_rank_deficient(m, n, r, gap, seed),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Identity { n } => write!(f, "identity:{n}"),
            GenSpec::Kahan { n, c } => write!(f, "kahan:{n}:{c}"),
            GenSpec::Random { m, n, r, gap } => write!(f, "random:{m}:{n}:{r}:{gap:e}"),
        }
    }
}

impl FromStr for GenSpec {
    type Err = anyhow::Error;

    /// `identity:N`, `kahan:N:C` or `random:M:N:R:GAP`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> anyhow::Result<usize> {
            parts[i].parse().with_context(|| format!("bad count {:?} in {s:?}", parts[i]))
        };
        let real = |i: usize| -> anyhow::Result<f64> {
            parts[i].parse().with_context(|| format!("bad number {:?} in {s:?}", parts[i]))
        };
        Ok(match (parts[0], parts.len()) {
            ("identity", 2) => GenSpec::Identity { n: num(1)? },
            ("kahan", 3) => GenSpec::Kahan { n: num(1)?, c: real(2)? },
            ("random", 5) => GenSpec::Random {
                m: num(1)?,
                n: num(2)?,
                r: num(3)?,
                gap: real(4)?,
            },
            _ => bail!("unrecognized generator spec {s:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Path(PathBuf),
    Gen(GenSpec),
}

impl Input {
    /// Generator specs are recognized by their prefix; anything else is a
    /// file path.
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        let prefix = s.split(':').next().unwrap_or("");
        if matches!(prefix, "identity" | "kahan" | "random") && s.contains(':') {
            Ok(Input::Gen(s.parse()?))
        } else {
            Ok(Input::Path(PathBuf::from(s)))
        }
    }

    /// Short label used as the matrix id in reports.
    pub fn label(&self) -> String {
        match self {
            Input::Path(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            Input::Gen(g) => g.to_string(),
        }
    }

    pub fn load(&self, seed: u64) -> anyhow::Result<DenseMatrix> {
        match self {
            Input::Path(p) => read_matrix_market(p).with_context(|| format!("reading {}", p.display())),
            Input::Gen(g) => Ok(g.generate(seed)?),
        }
    }
}

pub fn parse_stop(s: &str) -> anyhow::Result<StopCriterion> {
    match s {
        "n" => Ok(StopCriterion::EpsTimesN),
        "sqrt-n" => Ok(StopCriterion::EpsTimesSqrtN),
        "none" => Ok(StopCriterion::None),
        other => bail!("unknown stop criterion {other:?} (expected n, sqrt-n or none)"),
    }
}

pub fn stop_name(stop: StopCriterion) -> &'static str {
    match stop {
        StopCriterion::EpsTimesN => "n",
        StopCriterion::EpsTimesSqrtN => "sqrt-n",
        StopCriterion::None => "none",
    }
}

/// Everything that determines a run's numeric output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algo: Algorithm,
    pub params: DmParams,
    pub stop: StopCriterion,
    pub seed: u64,
    pub input: Input,
}

impl RunConfig {
    pub fn new(algo: Algorithm, input: Input) -> Self {
        Self {
            algo,
            params: DmParams::default(),
            stop: StopCriterion::default(),
            seed: 0,
            input,
        }
    }

    pub fn load(&self) -> anyhow::Result<DenseMatrix> {
        self.input.load(self.seed)
    }
}
