//! Benchmark generators and the `⟨bench, isol, strategy⟩` run harness.

pub mod dna;
pub mod mmult;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{ParamsError, SimConfig, SimError, SimOutput, Simulation, TimingParams};
use crate::runtime::PlanSource;
use crate::strategies::Strategy;
use crate::toolchain::shipped_table;

pub use dna::{gen_dna_workload, DnaModel, DnaParams, DnaPlan};
pub use mmult::gen_mmult_workload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bench {
    Mmult,
    Dna,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Isol {
    Isolation,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {what} `{value}`")]
pub struct ParseNameError {
    pub what: &'static str,
    pub value: String,
}

macro_rules! named {
    ($ty:ident, $what:literal, $($variant:ident => $name:literal),+) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = ParseNameError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    _ => Err(ParseNameError { what: $what, value: s.to_owned() }),
                }
            }
        }
    };
}

named!(Bench, "benchmark", Mmult => "mmult", Dna => "dna");
named!(Isol, "isolation mode", Isolation => "isolation", Parallel => "parallel");

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("invalid run configuration: {0}")]
    Config(String),
}

/// One benchmark configuration plus everything needed to reproduce it.
///
/// `warmup` and `sample` are in measurement intervals of `interval_cycles`
/// and only apply to open-ended runs; a run with `max_inferences`, and every
/// mmult run, goes to completion and is measured whole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub bench: Bench,
    pub isol: Isol,
    /// Mirrored instances in parallel mode.
    pub instances: u32,
    pub strategy: Strategy,
    pub seed: u64,
    pub warmup: f64,
    pub sample: f64,
    pub interval_cycles: u64,
    pub max_inferences: Option<u32>,
    pub event_budget: u64,
    pub timing: TimingParams,
    pub dna: DnaParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bench: Bench::Mmult,
            isol: Isol::Isolation,
            instances: 2,
            strategy: Strategy::None,
            seed: 1,
            warmup: 5.0,
            sample: 10.0,
            interval_cycles: 1_000_000,
            max_inferences: None,
            event_budget: 50_000_000,
            timing: TimingParams::default(),
            dna: DnaParams::default(),
        }
    }
}

/// Key-value configuration file; every key is optional and `[timing]` may
/// override any subset of the timing parameters.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    bench: Option<Bench>,
    isol: Option<Isol>,
    instances: Option<u32>,
    strategy: Option<Strategy>,
    seed: Option<u64>,
    warmup: Option<f64>,
    sample: Option<f64>,
    interval_cycles: Option<u64>,
    max_inferences: Option<u32>,
    event_budget: Option<u64>,
    timing: Option<toml::Table>,
    dna: Option<DnaParams>,
}

impl RunConfig {
    pub fn new(bench: Bench, isol: Isol, strategy: Strategy, seed: u64) -> Self {
        Self {
            bench,
            isol,
            strategy,
            seed,
            ..Self::default()
        }
    }

    /// Applies a configuration file on top of `self`.
    pub fn with_toml(mut self, text: &str) -> Result<Self, RunError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        macro_rules! set {
            ($($f:ident),+) => { $(if let Some(v) = file.$f { self.$f = v; })+ };
        }
        set!(
            bench,
            isol,
            instances,
            strategy,
            seed,
            warmup,
            sample,
            interval_cycles,
            event_budget,
            dna
        );
        if file.max_inferences.is_some() {
            self.max_inferences = file.max_inferences;
        }
        if let Some(t) = file.timing {
            let text = toml::to_string(&t).map_err(|e| RunError::Config(e.to_string()))?;
            self.timing = self.timing.overridden_by(&text)?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        self.timing.validate()?;
        let bad = |m: &str| Err(RunError::Config(m.to_owned()));
        if self.isol == Isol::Parallel && self.instances < 2 {
            return bad("parallel runs need at least 2 instances");
        }
        if self.interval_cycles == 0 {
            return bad("interval_cycles must be positive");
        }
        if !(0.0..).contains(&self.warmup) || self.sample.is_nan() || self.sample <= 0.0 {
            return bad("warmup must be non-negative and sample positive");
        }
        Ok(())
    }

    pub fn app_count(&self) -> u32 {
        match self.isol {
            Isol::Isolation => 1,
            Isol::Parallel => self.instances,
        }
    }

    /// Short `bench-isol-strategy` label.
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.bench, self.isol, self.strategy)
    }

    /// Measurement window of an open-ended run.
    pub fn window(&self) -> Option<Window> {
        if self.bench == Bench::Mmult || self.max_inferences.is_some() {
            return None;
        }
        let unit = self.interval_cycles as f64;
        let start = (self.warmup * unit).round() as u64;
        let intervals = self.sample.ceil().max(1.0) as u32;
        Some(Window {
            start,
            interval: self.interval_cycles,
            intervals,
        })
    }
}

/// Sampling period: `intervals` consecutive intervals after the warmup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: u64,
    pub interval: u64,
    pub intervals: u32,
}

impl Window {
    pub fn end(&self) -> u64 {
        self.start + self.interval * u64::from(self.intervals)
    }

    pub fn contains(&self, t: u64) -> bool {
        (self.start..self.end()).contains(&t)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub window: Option<Window>,
    pub output: SimOutput,
}

/// Instantiates the applications, activates the strategy's hook table and
/// drives the simulator through warmup and sampling.
pub fn run_configuration(config: &RunConfig) -> Result<RunResult, RunError> {
    config.validate()?;
    let plans: Vec<Box<dyn PlanSource>> = (0..config.app_count())
        .map(|i| -> Box<dyn PlanSource> {
            match config.bench {
                Bench::Mmult => Box::new(gen_mmult_workload(config.seed)),
                Bench::Dna => Box::new(gen_dna_workload(
                    config.seed,
                    i,
                    &config.dna,
                    config.max_inferences,
                )),
            }
        })
        .collect();
    let window = config.window();
    let mut sim = SimConfig::new(
        config.timing.clone(),
        shipped_table(config.strategy),
        config.seed,
    );
    sim.horizon = window.map(|w| w.end());
    sim.event_budget = config.event_budget;
    let output = Simulation::new(sim, plans)?.run()?;
    Ok(RunResult {
        config: config.clone(),
        window,
        output,
    })
}
