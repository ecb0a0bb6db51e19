//! Session orchestration: frames flow through kinematics, exertion and
//! fatigue accumulation, producing a [`SessionReport`].

pub mod config;
pub mod ingest;
pub mod report;
pub mod synth;

use std::collections::VecDeque;

use thiserror::Error;

use crate::exertion::{ExertionError, ExertionModel, ExertionSample};
use crate::fatigue::{nicer_endurance_time, rohmert_et, Endurance, FatigueError, FatigueSession, Model, Phase};
use crate::kinematics::{
    compute_arm_angles, compute_arm_state, compute_shoulder_torque, static_arm_state, ActivityFlag, JointFrame,
    KinematicsError,
};

pub use config::{InputFormat, PhaseSource, ReportFormat, SessionConfig};
pub use report::{emit_report, EventRecord, FrameRecord, SessionReport, Summary};
pub use synth::InvalidParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("timestamp {timestamp} does not advance past the previous frame")]
    NonMonotonicTime { timestamp: f64 },
    #[error("frame at t={timestamp}: {source}")]
    Kinematics { timestamp: f64, source: KinematicsError },
    #[error("frame at t={timestamp}: {source}")]
    Exertion { timestamp: f64, source: ExertionError },
    #[error(transparent)]
    Fatigue(#[from] FatigueError),
    #[error(transparent)]
    InvalidParams(#[from] InvalidParams),
    #[error("i/o error: {0}")]
    Io(String),
}

impl SessionError {
    /// Process exit status: 2 for malformed input or configuration, 3 for
    /// invariant violations, 1 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SessionError::Parse { .. } | SessionError::Config { .. } | SessionError::InvalidParams(_) => 2,
            SessionError::NonMonotonicTime { .. }
            | SessionError::Kinematics { .. }
            | SessionError::Exertion { .. }
            | SessionError::Fatigue(_) => 3,
            SessionError::Io(_) => 1,
        }
    }
}

/// Incremental session pipeline. Feed frames in timestamp order with
/// [`push`](Self::push) and collect the report with
/// [`finish`](Self::finish).
pub struct SessionRunner {
    config: SessionConfig,
    exertion: ExertionModel,
    fatigue: FatigueSession,
    history: VecDeque<JointFrame>,
    phase_frames: VecDeque<JointFrame>,
    phase_samples: VecDeque<ExertionSample>,
    records: Vec<FrameRecord>,
    frame_count: usize,
    over_mvc: usize,
    last_timestamp: Option<f64>,
}

impl SessionRunner {
    pub fn new(config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let fatigue = FatigueSession::new(Model::Nicer, config.recovery_rate)?;
        Ok(Self {
            exertion: ExertionModel { coefficients: config.coefficients, elbow_convention: config.elbow_convention },
            fatigue,
            history: VecDeque::new(),
            phase_frames: VecDeque::new(),
            phase_samples: VecDeque::new(),
            records: Vec::new(),
            frame_count: 0,
            over_mvc: 0,
            last_timestamp: None,
            config,
        })
    }

    pub fn fatigue(&self) -> &FatigueSession {
        &self.fatigue
    }

    fn decide_phase(&mut self, frame: &JointFrame, sample: &ExertionSample) -> Phase {
        let current = self.fatigue.phase();
        match self.config.phase_source {
            PhaseSource::Flag => match frame.activity {
                Some(ActivityFlag::Active) => Phase::Active,
                Some(ActivityFlag::Rest) => Phase::Rest,
                _ => current,
            },
            PhaseSource::Heuristic => {
                let dwell = self.config.phase_detector.dwell;
                self.phase_frames.push_back(frame.clone());
                self.phase_samples.push_back(*sample);
                let cutoff = frame.timestamp - dwell;
                while self.phase_frames.len() > 1 && self.phase_frames[1].timestamp <= cutoff {
                    self.phase_frames.pop_front();
                    self.phase_samples.pop_front();
                }
                let frames = self.phase_frames.make_contiguous();
                let samples = self.phase_samples.make_contiguous();
                self.config.phase_detector.detect_phase(samples, frames).unwrap_or(current)
            }
        }
    }

    pub fn push(&mut self, frame: JointFrame) -> Result<FrameRecord, SessionError> {
        let t = frame.timestamp;
        if let Some(last) = self.last_timestamp {
            if !(t > last) {
                return Err(SessionError::NonMonotonicTime { timestamp: t });
            }
        }
        let kin = |source| SessionError::Kinematics { timestamp: t, source };
        frame.validate().map_err(kin)?;
        let profile = &self.config.subject;
        let angles = compute_arm_angles(&frame, profile).map_err(kin)?;

        let needed = self.config.accel.required_frames();
        self.history.push_back(frame.clone());
        while self.history.len() > needed {
            self.history.pop_front();
        }
        // too little or too sparse history: treat the arm as momentarily static
        let state = match compute_arm_state(self.history.make_contiguous(), profile, &self.config.accel) {
            Ok(state) => state,
            Err(KinematicsError::InsufficientHistory { .. } | KinematicsError::WindowTooLong(_)) => {
                static_arm_state(&frame, profile)
            }
            Err(e) => return Err(kin(e)),
        };
        let torque = compute_shoulder_torque(&state, self.config.gravity);
        let sample = self
            .exertion
            .relative_exertion(t, torque, angles, profile.sex)
            .map_err(|source| SessionError::Exertion { timestamp: t, source })?;

        let phase = self.decide_phase(&frame, &sample);
        self.fatigue.set_phase(phase, t);
        match phase {
            Phase::Active => self.fatigue.nicer_active_step(&sample)?,
            Phase::Rest => self.fatigue.nicer_rest_step(t)?,
        }
        self.last_timestamp = Some(t);
        self.frame_count += 1;
        if sample.exceeds_mvc() {
            self.over_mvc += 1;
        }

        let record = FrameRecord {
            timestamp: t,
            shoulder_abduction: angles.shoulder_abduction,
            elbow_flexion: angles.elbow_flexion,
            raw_torque: sample.raw_torque,
            correction: sample.correction,
            max_torque: sample.max_torque,
            relative_exertion: sample.relative_exertion,
            phase,
            nicer: self.fatigue.nicer_score(),
            ce: self.fatigue.ce_score(),
        };
        if self.config.emit_per_frame {
            self.records.push(record.clone());
        }
        Ok(record)
    }

    pub fn finish(self) -> SessionReport {
        let f = &self.fatigue;
        let mean = f.exertion_mean();
        let summary = Summary {
            frames: self.frame_count,
            nicer_final: f.nicer_score(),
            ce_final: f.ce_score(),
            mean_exertion: mean,
            nicer_et: nicer_endurance_time(mean).ok(),
            rohmert_et: match rohmert_et(mean) {
                Endurance::Finite(et) => Some(et),
                Endurance::Unbounded => None,
            },
            active_time: f.active_duration(),
            rest_time: f.rest_duration(),
            frames_over_mvc: self.over_mvc,
        };
        SessionReport {
            summary,
            events: f.events().iter().map(EventRecord::from).collect(),
            frames: self.config.emit_per_frame.then_some(self.records),
        }
    }
}

/// Run a whole frame stream through a fresh session.
pub fn run_session<I>(config: SessionConfig, frames: I) -> Result<SessionReport, SessionError>
where
    I: IntoIterator<Item = Result<JointFrame, SessionError>>,
{
    let mut runner = SessionRunner::new(config)?;
    for frame in frames {
        runner.push(frame?)?;
    }
    Ok(runner.finish())
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryKind {
    StaticHold(synth::StaticHoldParams),
    ReachSequence(synth::ReachSequenceParams),
}

pub fn generate_trajectory(kind: &TrajectoryKind) -> Result<Vec<JointFrame>, InvalidParams> {
    match kind {
        TrajectoryKind::StaticHold(p) => synth::static_hold(p),
        TrajectoryKind::ReachSequence(p) => synth::reach_sequence(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fatigue::nicer_active_score;
    use synth::{static_hold, StaticHoldParams};

    #[test]
    fn empty_input_gives_empty_report() {
        let report = run_session(SessionConfig::default(), std::iter::empty()).unwrap();
        assert_eq!(report.summary.frames, 0);
        assert_eq!(report.summary.nicer_final, 0.0);
        assert_eq!(report.summary.ce_final, None);
        assert_eq!(report.frames, Some(vec![]));
    }

    #[test]
    fn static_hold_matches_closed_form() {
        let frames = static_hold(&StaticHoldParams { duration_s: 60.0, ..Default::default() }).unwrap();
        let duration = frames.last().unwrap().timestamp;
        let report = run_session(SessionConfig::default(), frames.into_iter().map(Ok)).unwrap();
        let exertion = report.frames.as_ref().unwrap()[5].relative_exertion;
        let expected = nicer_active_score(duration, exertion);
        assert!((report.summary.nicer_final - expected).abs() <= 1e-6 * expected);
    }

    #[test]
    fn non_monotonic_time_rejected() {
        let mut frames = static_hold(&StaticHoldParams { duration_s: 1.0, ..Default::default() }).unwrap();
        frames[10].timestamp = frames[9].timestamp;
        let err = run_session(SessionConfig::default(), frames.into_iter().map(Ok)).unwrap_err();
        assert!(matches!(err, SessionError::NonMonotonicTime { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn degenerate_frame_is_invariant_violation() {
        let mut frames = static_hold(&StaticHoldParams { duration_s: 1.0, ..Default::default() }).unwrap();
        frames[3].elbow = frames[3].shoulder;
        let err = run_session(SessionConfig::default(), frames.into_iter().map(Ok)).unwrap_err();
        assert!(matches!(err, SessionError::Kinematics { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn parse_errors_propagate() {
        let frames = vec![Err(SessionError::Parse { line: 4, message: "bad".into() })];
        let err = run_session(SessionConfig::default(), frames).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn heuristic_detects_lowered_still_arm() {
        let mut frames = static_hold(&StaticHoldParams { duration_s: 10.0, flag: None, ..Default::default() }).unwrap();
        let t0 = frames.len() as f64 / 50.0;
        let down = static_hold(&StaticHoldParams {
            abduction_deg: 3.0,
            duration_s: 10.0,
            flag: None,
            ..Default::default()
        })
        .unwrap();
        frames.extend(down.into_iter().map(|mut f| {
            f.timestamp += t0;
            f
        }));
        let config = SessionConfig { phase_source: PhaseSource::Heuristic, ..Default::default() };
        let report = run_session(config, frames.into_iter().map(Ok)).unwrap();
        assert_eq!(report.events.len(), 1);
        assert_eq!(report.events[0].transition, "active->rest");
        // transition fires once the 2 s dwell has elapsed after lowering
        assert!((report.events[0].timestamp - (t0 + 2.0)).abs() < 0.05);
        let recs = report.frames.unwrap();
        assert!(recs.last().unwrap().nicer < recs[recs.len() / 2].nicer);
    }
}
