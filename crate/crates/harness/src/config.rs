use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlact_core::channels::DecoherenceKind;

use crate::error::{HarnessError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CENSUS_STATES: usize = 100_000;
pub const DEFAULT_SWEEP_STATES: usize = 2000;
pub const DEFAULT_SWEEP_STEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Census,
    DecoherenceSweep,
    ProtocolVerify,
    ExtensionVerify,
    IsoCurve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Census => "census",
            Experiment::DecoherenceSweep => "decoherence_sweep",
            Experiment::ProtocolVerify => "protocol_verify",
            Experiment::ExtensionVerify => "extension_verify",
            Experiment::IsoCurve => "iso_curve",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(HarnessError::Config(format!("unknown output format '{other}' (csv, json)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_states: usize,
    pub n_time_steps: usize,
    pub channel: DecoherenceKind,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    /// Worker count; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Erased-state / extension parameter.
    pub k: Option<f64>,
    /// Isotropic weight for the targeted teleport check.
    pub p: Option<f64>,
    /// Local dimension for the targeted teleport check.
    pub d: Option<usize>,
    /// Keep every `(t, Classification)` of a sweep and write them out.
    pub record_steps: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let n_states = match experiment {
            Experiment::Census => DEFAULT_CENSUS_STATES,
            Experiment::DecoherenceSweep => DEFAULT_SWEEP_STATES,
            _ => 20,
        };
        Self {
            experiment,
            n_states,
            n_time_steps: DEFAULT_SWEEP_STEPS,
            channel: DecoherenceKind::AmplitudeDamping,
            seed: DEFAULT_SEED,
            output_path: None,
            output_format: OutputFormat::Csv,
            threads: None,
            k: None,
            p: None,
            d: None,
            record_steps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_states < 1 {
            return Err(HarnessError::Config("n_states must be at least 1".into()));
        }
        if self.experiment == Experiment::DecoherenceSweep && self.n_time_steps < 2 {
            return Err(HarnessError::Config("a sweep needs at least 2 time steps".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be at least 1".into()));
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::Config(format!("p = {p} outside [0, 1]")));
            }
        }
        if let Some(k) = self.k {
            if !(k >= 1.0 && k.is_finite()) {
                return Err(HarnessError::Config(format!("k = {k} must be a finite number >= 1")));
            }
        }
        Ok(())
    }

    pub(crate) fn expect(&self, experiment: Experiment) -> Result<()> {
        self.validate()?;
        if self.experiment != experiment {
            return Err(HarnessError::Config(format!(
                "configuration is for '{}', expected '{experiment}'",
                self.experiment
            )));
        }
        Ok(())
    }

    /// Sets one option by its flag name (`n-states`, `steps`, ...); `_` and
    /// `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| HarnessError::Config(format!("invalid value '{value}' for '{key}'")))
        }
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "n-states" => self.n_states = parse(key, value)?,
            "steps" | "n-time-steps" => self.n_time_steps = parse(key, value)?,
            "channel" => {
                self.channel = value
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("unknown channel '{value}' (ad, pd, pd-verbatim, d)")))?
            }
            "seed" => self.seed = parse(key, value)?,
            "out" | "output-path" => self.output_path = Some(PathBuf::from(value)),
            "format" | "output-format" => self.output_format = value.parse()?,
            "threads" => self.threads = Some(parse(key, value)?),
            "k" => self.k = Some(parse(key, value)?),
            "p" => self.p = Some(parse(key, value)?),
            "d" => self.d = Some(parse(key, value)?),
            "per-step" | "record-steps" => self.record_steps = parse(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown option '{other}'"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and `#` comments are skipped.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            self.set(key, value)
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        self.apply_str(&text)
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub(crate) fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
