//! Key-value session configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys carry
//! their units, e.g. `body_mass_kg` or `recovery_rate_per_s`.

use std::path::PathBuf;

use nalgebra::Vector3;

use crate::exertion::{ElbowConvention, ModelCoefficients};
use crate::fatigue::{PhaseDetector, DEFAULT_RECOVERY_RATE};
use crate::kinematics::{AccelEstimator, Sex, SubjectProfile, STANDARD_GRAVITY};

use super::SessionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSource {
    /// Use per-frame activity flags; unknown frames keep the current phase.
    Flag,
    /// Flags when present, otherwise the stillness heuristic.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub subject: SubjectProfile,
    pub coefficients: ModelCoefficients,
    pub elbow_convention: ElbowConvention,
    pub recovery_rate: f64,
    pub phase_source: PhaseSource,
    pub phase_detector: PhaseDetector,
    pub accel: AccelEstimator,
    pub gravity: f64,
    pub input_format: InputFormat,
    pub report_format: ReportFormat,
    pub output_path: Option<PathBuf>,
    pub emit_per_frame: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            subject: SubjectProfile::new(Sex::Female, 70.0).expect("default profile is valid"),
            coefficients: ModelCoefficients::default(),
            elbow_convention: ElbowConvention::default(),
            recovery_rate: DEFAULT_RECOVERY_RATE,
            phase_source: PhaseSource::Flag,
            phase_detector: PhaseDetector::default(),
            accel: AccelEstimator::default(),
            gravity: STANDARD_GRAVITY,
            input_format: InputFormat::Csv,
            report_format: ReportFormat::Json,
            output_path: None,
            emit_per_frame: true,
        }
    }
}

pub fn parse_sex(s: &str) -> Option<Sex> {
    match s.trim().to_ascii_lowercase().as_str() {
        "female" | "f" => Some(Sex::Female),
        "male" | "m" => Some(Sex::Male),
        _ => None,
    }
}

pub fn parse_phase_source(s: &str) -> Option<PhaseSource> {
    match s.trim() {
        "flag" => Some(PhaseSource::Flag),
        "heuristic" => Some(PhaseSource::Heuristic),
        _ => None,
    }
}

pub fn parse_input_format(s: &str) -> Option<InputFormat> {
    match s.trim() {
        "csv" => Some(InputFormat::Csv),
        "jsonl" => Some(InputFormat::Jsonl),
        _ => None,
    }
}

pub fn parse_report_format(s: &str) -> Option<ReportFormat> {
    match s.trim() {
        "json" => Some(ReportFormat::Json),
        "csv" => Some(ReportFormat::Csv),
        _ => None,
    }
}

impl SessionConfig {
    pub fn parse(text: &str) -> Result<Self, SessionError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SessionError::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| SessionError::Config { line: line_no, message })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one setting by key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = || -> Result<f64, String> {
            let v: f64 = value.parse().map_err(|_| format!("{key}: `{value}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("{key}: value must be finite"));
            }
            Ok(v)
        };
        let c = &mut self.coefficients;
        let seg = &mut self.subject.segments;
        match key {
            "sex" => self.subject.sex = parse_sex(value).ok_or(format!("unknown sex `{value}`"))?,
            "body_mass_kg" => self.subject.body_mass_kg = num()?,
            "torso_up" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| format!("torso_up: `{value}` is not x,y,z"))?;
                let [x, y, z] = parts[..] else {
                    return Err("torso_up needs three components".into());
                };
                self.subject.torso_up = Vector3::new(x, y, z);
            }
            "upper_arm_mass_fraction" => seg.upper_arm_mass = num()?,
            "forearm_mass_fraction" => seg.forearm_mass = num()?,
            "hand_mass_fraction" => seg.hand_mass = num()?,
            "upper_arm_com_fraction" => seg.upper_arm_com = num()?,
            "forearm_com_fraction" => seg.forearm_com = num()?,
            "hand_com_fraction" => seg.hand_com = num()?,
            "recovery_rate_per_s" => self.recovery_rate = num()?,
            "phase_source" => {
                self.phase_source = parse_phase_source(value).ok_or(format!("unknown phase source `{value}`"))?
            }
            "input_format" => {
                self.input_format = parse_input_format(value).ok_or(format!("unknown input format `{value}`"))?
            }
            "report_format" => {
                self.report_format = parse_report_format(value).ok_or(format!("unknown report format `{value}`"))?
            }
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            "emit_per_frame" => {
                self.emit_per_frame = value.parse().map_err(|_| format!("emit_per_frame: `{value}` is not a bool"))?
            }
            "gravity_m_per_s2" => self.gravity = num()?,
            "accel_smoothing_frames" => {
                self.accel.smoothing_width = value
                    .parse()
                    .ok()
                    .filter(|w| *w >= 1)
                    .ok_or(format!("accel_smoothing_frames: `{value}` must be an integer >= 1"))?
            }
            "rest_speed_threshold_m_per_s" => self.phase_detector.speed_threshold = num()?,
            "rest_angle_deg" => self.phase_detector.rest_angle = num()?,
            "rest_dwell_s" => self.phase_detector.dwell = num()?,
            "elbow_convention" => {
                self.elbow_convention = match value {
                    "interior_angle" => ElbowConvention::InteriorAngle,
                    "extension_from_straight" => ElbowConvention::ExtensionFromStraight,
                    _ => return Err(format!("unknown elbow convention `{value}`")),
                }
            }
            "sigmoid_amp" => c.sigmoid_amp = num()?,
            "sigmoid_center_deg" => c.sigmoid_center = num()?,
            "sigmoid_width_deg" => c.sigmoid_width = num()?,
            "sine_denominator_female" => c.sine_denominator_female = num()?,
            "sine_denominator_male" => c.sine_denominator_male = num()?,
            "beta_female" => c.beta_female = num()?,
            "beta_male" => c.beta_male = num()?,
            "chaffin_intercept" => c.chaffin_intercept = num()?,
            "chaffin_elbow_coef" => c.chaffin_elbow_coef = num()?,
            "chaffin_shoulder_coef" => c.chaffin_shoulder_coef = num()?,
            "g_female" => c.g_female = num()?,
            "g_male" => c.g_male = num()?,
            "elbow_extended_max_deg" => c.elbow_extended_max = num()?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let invalid = |message: String| SessionError::Config { line: 0, message };
        self.subject.validate().map_err(|e| invalid(e.to_string()))?;
        self.coefficients.validate().map_err(invalid)?;
        if !(self.recovery_rate.is_finite() && self.recovery_rate >= 0.0) {
            return Err(invalid(format!("recovery rate must be >= 0, got {}", self.recovery_rate)));
        }
        if !(self.gravity.is_finite() && self.gravity > 0.0) {
            return Err(invalid("gravity must be positive".into()));
        }
        let d = &self.phase_detector;
        if !(d.dwell >= 0.0 && d.speed_threshold >= 0.0 && d.rest_angle.is_finite()) {
            return Err(invalid("rest detection parameters must be nonnegative".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides() {
        let text = "\
# subject
sex = male
body_mass_kg = 82.5   # kg
recovery_rate_per_s = 0.05
phase_source = heuristic
emit_per_frame = false
beta_male = 1227
elbow_convention = extension_from_straight
torso_up = 0, 0, 1
";
        let cfg = SessionConfig::parse(text).unwrap();
        assert_eq!(cfg.subject.sex, Sex::Male);
        assert_eq!(cfg.subject.body_mass_kg, 82.5);
        assert_eq!(cfg.recovery_rate, 0.05);
        assert_eq!(cfg.phase_source, PhaseSource::Heuristic);
        assert!(!cfg.emit_per_frame);
        assert_eq!(cfg.coefficients.beta_male, 1227.0);
        assert_eq!(cfg.coefficients.beta_female, 1005.0);
        assert_eq!(cfg.elbow_convention, ElbowConvention::ExtensionFromStraight);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(SessionConfig::parse("sex female"), Err(SessionError::Config { line: 1, .. })));
        assert!(matches!(SessionConfig::parse("\nfoo = 1"), Err(SessionError::Config { line: 2, .. })));
        assert!(SessionConfig::parse("recovery_rate_per_s = -1").is_err());
        assert!(SessionConfig::parse("beta_male = inf").is_err());
        assert!(SessionConfig::parse("torso_up = 0,0,2").is_err());
        assert!(SessionConfig::parse("body_mass_kg = 0").is_err());
    }
}
