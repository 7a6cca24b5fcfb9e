use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use exchange_lab::dynamics::{HopPulse, Schedule};
use exchange_lab::fock::{FockBasisState, RegisterLayout, StatisticsMatrix};
use exchange_lab::protocols::{EvaluationMode, RingTurn};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    FullSwap,
    HalfSwap,
    Ring,
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statistics {
    Fermion,
    Boson,
    Mixed(StatisticsMatrix),
}

impl std::str::FromStr for Statistics {
    type Err = String;

    /// `fermion`, `boson`, or `mixed:<rows>` with rows separated by `;` and
    /// entries by `,`, e.g. `mixed:-1,-1;-1,-1`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fermion" | "fermions" => Ok(Statistics::Fermion),
            "boson" | "bosons" => Ok(Statistics::Boson),
            _ => {
                let body = s
                    .strip_prefix("mixed:")
                    .ok_or_else(|| format!("expected fermion, boson or mixed:<matrix>, got {s:?}"))?;
                let rows = body
                    .split(';')
                    .map(|row| {
                        row.split(',')
                            .map(|v| v.trim().parse::<i8>().map_err(|_| format!("bad matrix entry {v:?}")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                StatisticsMatrix::new(rows).map(Statistics::Mixed).map_err(|e| e.to_string())
            }
        }
    }
}

/// Flags shared by `run` and `attribute`.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(value_enum)]
    pub experiment: Experiment,
    /// Register size; defaults to 4, or 2n for the ring.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Particle count of the ring.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "fermion")]
    pub statistics: Statistics,
    #[arg(long, default_value = "sequential")]
    pub mode: EvaluationMode,
    /// Ring rotation: one site (`step`) or a full `revolution`.
    #[arg(long, default_value = "step")]
    pub turn: RingTurn,
    /// Pulse area of the built-in pulse schedules.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub theta: f64,
    /// JSON file with `branch0`/`branch1` pulse lists (and optional `initial` ket).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub branch0: Vec<HopPulse>,
    pub branch1: Vec<HopPulse>,
    #[serde(default)]
    pub initial: Option<String>,
}

/// A validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub layout: Arc<RegisterLayout>,
    pub n: usize,
    pub mode: EvaluationMode,
    pub turn: RingTurn,
    pub pulses: Option<(Schedule, Schedule, FockBasisState)>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub format: Format,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadInput(msg.into())
}

impl RunArgs {
    pub fn validate(&self) -> Result<RunConfig, CliError> {
        let default_modes = match self.experiment {
            Experiment::Ring => 2 * self.n,
            _ => 4,
        };
        let modes = self.modes.unwrap_or(default_modes);
        let layout = match &self.statistics {
            Statistics::Fermion => RegisterLayout::fermions(modes),
            Statistics::Boson => RegisterLayout::hardcore_bosons(modes),
            Statistics::Mixed(m) => RegisterLayout::blocks(modes, m.clone()),
        }?;
        if self.shots.is_some() && self.seed.is_none() {
            return Err(bad("--shots requires --seed"));
        }
        if self.schedule.is_some() && self.experiment != Experiment::Pulse {
            return Err(bad("--schedule only applies to the pulse experiment"));
        }
        if !self.theta.is_finite() {
            return Err(bad("--theta must be finite"));
        }
        let pulses = match self.experiment {
            Experiment::Pulse => {
                if self.mode == EvaluationMode::Literal {
                    return Err(bad("pulse schedules have no literal operator-string form"));
                }
                Some(self.pulses(modes)?)
            }
            _ => None,
        };
        Ok(RunConfig {
            experiment: self.experiment,
            layout: Arc::new(layout),
            n: self.n,
            mode: self.mode,
            turn: self.turn,
            pulses,
            shots: self.shots,
            seed: self.seed,
            format: self.format,
        })
    }

    fn pulses(&self, modes: usize) -> Result<(Schedule, Schedule, FockBasisState), CliError> {
        let check = |s: &Schedule| -> Result<(), CliError> {
            for p in &s.pulses {
                for m in [p.from, p.to] {
                    if m.value() as usize > modes {
                        return Err(bad(format!("pulse touches mode {m} of a {modes}-mode register")));
                    }
                }
            }
            Ok(())
        };
        let (s0, s1, initial) = match &self.schedule {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
                let file: ScheduleFile =
                    serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
                let initial = match file.initial {
                    Some(k) => k.parse::<FockBasisState>()?,
                    None => FockBasisState::from_occupied(modes, &[1, 3])?,
                };
                if initial.modes() != modes {
                    return Err(bad(format!("initial ket {initial} does not have {modes} modes")));
                }
                (Schedule::new(file.branch0), Schedule::new(file.branch1), initial)
            }
            None => {
                let t = self.theta;
                let s0 = Schedule::new(vec![HopPulse::between(1, 2, t)?, HopPulse::between(3, 4, t)?]);
                let s1 = Schedule::new(vec![HopPulse::between(1, 4, t)?, HopPulse::between(3, 2, t)?]);
                (s0, s1, FockBasisState::from_occupied(modes, &[1, 3])?)
            }
        };
        check(&s0)?;
        check(&s1)?;
        Ok((s0, s1, initial))
    }
}
