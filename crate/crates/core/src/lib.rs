//! Shoulder fatigue modeling for mid-air interaction.
//!
//! Frames of tracked arm joints become shoulder torque
//! ([`kinematics`]), corrected relative exertion in %MVC ([`exertion`]) and
//! cumulative fatigue scores ([`fatigue`]): the NICER model with rest
//! recovery, plus the Consumed Endurance baseline. [`analysis`] holds the
//! EMG and rating utilities used to validate such models, and
//! [`session`] wires everything into a streaming pipeline with file I/O.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod exertion;
pub mod fatigue;
pub mod kinematics;
pub mod session;

pub use exertion::{ElbowConvention, ExertionModel, ExertionSample, ModelCoefficients};
pub use fatigue::{FatigueSession, Model, Phase, PhaseDetector, PhaseEvent};
pub use kinematics::{ArmAngles, ArmState, JointFrame, Sex, SubjectProfile};
pub use session::{run_session, SessionConfig, SessionReport, SessionRunner};
