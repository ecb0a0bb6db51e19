//! Cumulative fatigue scoring.
//!
//! [`FatigueSession`] accumulates the NICER score over active frames and
//! decays it exponentially during rest. The Consumed Endurance (CE)
//! baseline is derived from the same running exertion mean and active
//! time, using Rohmert's endurance-time curve.

use thiserror::Error;

use crate::exertion::ExertionSample;
use crate::kinematics::JointFrame;

/// Exponent of the shoulder endurance-time law.
pub const NICER_EXPONENT: f64 = 1.83;
/// Multiplier of the shoulder endurance-time law.
pub const NICER_COEFFICIENT: f64 = 0.000218;
/// Scale of the shoulder endurance-time law.
pub const NICER_SCALE: f64 = 14.86;
/// Default rest recovery factor, s⁻¹.
pub const DEFAULT_RECOVERY_RATE: f64 = 0.04;

/// Rohmert's curve treats exertion at or below this %MVC as sustainable forever.
pub const ROHMERT_THRESHOLD: f64 = 15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FatigueError {
    #[error("timestamp {timestamp} does not advance past {last}")]
    NonMonotonicTime { timestamp: f64, last: f64 },
    #[error("{op} called during {phase:?} phase")]
    PhaseMismatch { op: &'static str, phase: Phase },
    #[error("mean exertion must be > 0 %MVC, got {0}")]
    Domain(f64),
    #[error("phase window spans {span} s, shorter than the {dwell} s dwell")]
    InsufficientWindow { span: f64, dwell: f64 },
    #[error("invalid recovery rate {0}")]
    InvalidRecoveryRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Nicer,
    Ce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Active,
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    ActiveToRest,
    RestToActive,
}

impl Transition {
    pub fn as_str(self) -> &'static str {
        match self {
            Transition::ActiveToRest => "active->rest",
            Transition::RestToActive => "rest->active",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEvent {
    pub timestamp: f64,
    pub transition: Transition,
    /// Score of the session's selected model; `None` when CE is undefined.
    pub score_at_transition: Option<f64>,
}

/// Maximum holding time predicted by an endurance-time curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endurance {
    Finite(f64),
    Unbounded,
}

/// Rohmert's endurance time (s) at a mean exertion in %MVC.
pub fn rohmert_et(mean_exertion: f64) -> Endurance {
    if !(mean_exertion > ROHMERT_THRESHOLD) {
        return Endurance::Unbounded;
    }
    let et = 1236.5 / (mean_exertion - ROHMERT_THRESHOLD).powf(0.618) - 72.5;
    Endurance::Finite(et.max(0.0))
}

/// CE score in percent, or `None` where Rohmert's curve yields no finite
/// positive endurance time.
pub fn ce_score(active_duration: f64, mean_exertion: f64) -> Option<f64> {
    match rohmert_et(mean_exertion) {
        Endurance::Finite(et) if et > 0.0 => Some(active_duration / et * 100.0),
        _ => None,
    }
}

/// Duration (s) at which a constant exertion drives the NICER score to 100.
pub fn nicer_endurance_time(mean_exertion: f64) -> Result<f64, FatigueError> {
    if !(mean_exertion > 0.0 && mean_exertion.is_finite()) {
        return Err(FatigueError::Domain(mean_exertion));
    }
    Ok(NICER_SCALE / (mean_exertion.powf(NICER_EXPONENT) * NICER_COEFFICIENT))
}

/// Active-phase NICER score for a duration at a mean exertion.
pub fn nicer_active_score(duration: f64, mean_exertion: f64) -> f64 {
    duration * mean_exertion.powf(NICER_EXPONENT) * NICER_COEFFICIENT / NICER_SCALE * 100.0
}

/// Single-writer fatigue accumulator fed in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct FatigueSession {
    model: Model,
    phase: Phase,
    /// Wall-clock active time; never decreases.
    active_duration: f64,
    rest_duration: f64,
    /// Duration that, with the current mean, reproduces the NICER score.
    /// Back-solved after each rest step.
    effective_duration: f64,
    exertion_mean: f64,
    nicer_score: f64,
    last_timestamp: Option<f64>,
    recovery_rate: f64,
    event_log: Vec<PhaseEvent>,
}

impl FatigueSession {
    pub fn new(model: Model, recovery_rate: f64) -> Result<Self, FatigueError> {
        if !(recovery_rate.is_finite() && recovery_rate >= 0.0) {
            return Err(FatigueError::InvalidRecoveryRate(recovery_rate));
        }
        Ok(Self {
            model,
            phase: Phase::Active,
            active_duration: 0.0,
            rest_duration: 0.0,
            effective_duration: 0.0,
            exertion_mean: 0.0,
            nicer_score: 0.0,
            last_timestamp: None,
            recovery_rate,
            event_log: Vec::new(),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn active_duration(&self) -> f64 {
        self.active_duration
    }

    pub fn rest_duration(&self) -> f64 {
        self.rest_duration
    }

    pub fn exertion_mean(&self) -> f64 {
        self.exertion_mean
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        self.last_timestamp
    }

    pub fn recovery_rate(&self) -> f64 {
        self.recovery_rate
    }

    pub fn events(&self) -> &[PhaseEvent] {
        &self.event_log
    }

    pub fn nicer_score(&self) -> f64 {
        self.nicer_score
    }

    pub fn ce_score(&self) -> Option<f64> {
        ce_score(self.active_duration, self.exertion_mean)
    }

    pub fn current_score(&self) -> Option<f64> {
        match self.model {
            Model::Nicer => Some(self.nicer_score),
            Model::Ce => self.ce_score(),
        }
    }

    /// Elapsed time since the previous step; `None` for the first step.
    fn advance(&mut self, timestamp: f64) -> Result<Option<f64>, FatigueError> {
        match self.last_timestamp {
            Some(last) if !(timestamp > last) => {
                Err(FatigueError::NonMonotonicTime { timestamp, last })
            }
            Some(last) => {
                self.last_timestamp = Some(timestamp);
                Ok(Some(timestamp - last))
            }
            None if !timestamp.is_finite() => {
                Err(FatigueError::NonMonotonicTime { timestamp, last: f64::NEG_INFINITY })
            }
            None => {
                self.last_timestamp = Some(timestamp);
                Ok(None)
            }
        }
    }

    /// Accumulate one active frame. The interval since the previous step
    /// weighs this sample's exertion in the running mean.
    pub fn nicer_active_step(&mut self, sample: &ExertionSample) -> Result<(), FatigueError> {
        if self.phase != Phase::Active {
            return Err(FatigueError::PhaseMismatch { op: "nicer_active_step", phase: self.phase });
        }
        let Some(dt) = self.advance(sample.timestamp)? else {
            return Ok(());
        };
        let weight = self.active_duration + dt;
        self.exertion_mean += (sample.relative_exertion - self.exertion_mean) * dt / weight;
        self.active_duration = weight;
        self.effective_duration += dt;
        self.nicer_score = nicer_active_score(self.effective_duration, self.exertion_mean);
        Ok(())
    }

    /// Decay the score over the interval since the previous step.
    pub fn nicer_rest_step(&mut self, timestamp: f64) -> Result<(), FatigueError> {
        if self.phase != Phase::Rest {
            return Err(FatigueError::PhaseMismatch { op: "nicer_rest_step", phase: self.phase });
        }
        let Some(dt) = self.advance(timestamp)? else {
            return Ok(());
        };
        self.rest_duration += dt;
        self.nicer_score *= (-self.recovery_rate * dt).exp();
        self.effective_duration = match nicer_endurance_time(self.exertion_mean) {
            Ok(et) => self.nicer_score / 100.0 * et,
            Err(_) => 0.0,
        };
        Ok(())
    }

    /// Switch phase, logging a transition when it changes. Time between the
    /// previous step and the next one is attributed to the new phase.
    pub fn set_phase(&mut self, phase: Phase, timestamp: f64) {
        if phase == self.phase {
            return;
        }
        let transition = match phase {
            Phase::Rest => Transition::ActiveToRest,
            Phase::Active => Transition::RestToActive,
        };
        self.event_log.push(PhaseEvent {
            timestamp,
            transition,
            score_at_transition: self.current_score(),
        });
        self.phase = phase;
    }
}

/// Rest detection heuristic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDetector {
    pub speed_threshold: f64,
    pub rest_angle: f64,
    pub dwell: f64,
}

impl Default for PhaseDetector {
    fn default() -> Self {
        Self { speed_threshold: 0.03, rest_angle: 30.0, dwell: 2.0 }
    }
}

impl PhaseDetector {
    /// Classify the newest frame of a trailing window. `frames` and
    /// `samples` are aligned, oldest first.
    ///
    /// An explicit activity flag on the newest frame wins. Otherwise the
    /// arm counts as resting when the end effector stayed slower than the
    /// speed threshold and below the rest angle over the whole dwell time.
    pub fn detect_phase(&self, samples: &[ExertionSample], frames: &[JointFrame]) -> Result<Phase, FatigueError> {
        use crate::kinematics::ActivityFlag;

        let Some(newest) = frames.last() else {
            return Err(FatigueError::InsufficientWindow { span: 0.0, dwell: self.dwell });
        };
        match newest.activity {
            Some(ActivityFlag::Rest) => return Ok(Phase::Rest),
            Some(ActivityFlag::Active) => return Ok(Phase::Active),
            _ => {}
        }
        let span = newest.timestamp - frames[0].timestamp;
        if span < self.dwell {
            return Err(FatigueError::InsufficientWindow { span, dwell: self.dwell });
        }
        let cutoff = newest.timestamp - self.dwell;
        // first frame at or before the cutoff anchors the dwell interval
        let start = frames.iter().rposition(|f| f.timestamp <= cutoff).unwrap_or(0);

        let still = frames[start..].windows(2).all(|w| {
            let dt = w[1].timestamp - w[0].timestamp;
            dt > 0.0 && (w[1].end_effector() - w[0].end_effector()).norm() / dt < self.speed_threshold
        });
        let lowered = samples
            .iter()
            .filter(|s| s.timestamp >= frames[start].timestamp)
            .all(|s| s.angles.shoulder_abduction < self.rest_angle);
        Ok(if still && lowered { Phase::Rest } else { Phase::Active })
    }
}
