//! Relative exertion (%MVC): raw shoulder torque plus the above-shoulder
//! correction term, normalized by gesture-dependent maximum strength.

use std::f64::consts::PI;

use thiserror::Error;

use crate::kinematics::{ArmAngles, Sex};

/// Shoulder angles at exactly 0° or 180° are pulled inside the open
/// interval by this many degrees before curve evaluation.
const ANGLE_EDGE_EPS_DEG: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExertionError {
    #[error("{name} = {value} outside [{lo}, {hi}] degrees")]
    Domain { name: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("maximum strength {0} N·m is not positive")]
    NonPositiveStrength(f64),
    #[error("raw torque must be finite and nonnegative, got {0}")]
    NegativeTorque(f64),
}

/// Fitted curve and strength constants. Defaults are the published values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelCoefficients {
    pub sigmoid_amp: f64,
    pub sigmoid_center: f64,
    pub sigmoid_width: f64,
    pub sine_denominator_female: f64,
    pub sine_denominator_male: f64,
    pub beta_female: f64,
    pub beta_male: f64,
    pub chaffin_intercept: f64,
    pub chaffin_elbow_coef: f64,
    pub chaffin_shoulder_coef: f64,
    pub g_female: f64,
    pub g_male: f64,
    /// Largest elbow flexion (degrees) still counted as an extended arm.
    pub elbow_extended_max: f64,
}

impl Default for ModelCoefficients {
    fn default() -> Self {
        Self {
            sigmoid_amp: 0.0095,
            sigmoid_center: 66.40,
            sigmoid_width: 7.83,
            sine_denominator_female: 0.11,
            sine_denominator_male: 0.09,
            beta_female: 1005.0,
            beta_male: 1230.0,
            chaffin_intercept: 227.338,
            chaffin_elbow_coef: 0.525,
            chaffin_shoulder_coef: -0.296,
            g_female: 0.1495,
            g_male: 0.2845,
            elbow_extended_max: 35.0,
        }
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), ExertionError> {
    if value.is_nan() || value < lo || value > hi {
        return Err(ExertionError::Domain { name, value, lo, hi });
    }
    Ok(())
}

fn shoulder_angle(theta: f64) -> Result<f64, ExertionError> {
    check_range("shoulder angle", theta, 0.0, 180.0)?;
    Ok(theta.clamp(ANGLE_EDGE_EPS_DEG, 180.0 - ANGLE_EDGE_EPS_DEG))
}

impl ModelCoefficients {
    pub fn sine_denominator(&self, sex: Sex) -> f64 {
        match sex {
            Sex::Female => self.sine_denominator_female,
            Sex::Male => self.sine_denominator_male,
        }
    }

    pub fn beta(&self, sex: Sex) -> f64 {
        match sex {
            Sex::Female => self.beta_female,
            Sex::Male => self.beta_male,
        }
    }

    pub fn strength_factor(&self, sex: Sex) -> f64 {
        match sex {
            Sex::Female => self.g_female,
            Sex::Male => self.g_male,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.sigmoid_amp,
            self.sigmoid_center,
            self.sigmoid_width,
            self.sine_denominator_female,
            self.sine_denominator_male,
            self.beta_female,
            self.beta_male,
            self.chaffin_intercept,
            self.chaffin_elbow_coef,
            self.chaffin_shoulder_coef,
            self.g_female,
            self.g_male,
            self.elbow_extended_max,
        ];
        if all.iter().any(|c| !c.is_finite()) {
            return Err("model coefficients must be finite".into());
        }
        if self.sigmoid_width == 0.0 || self.sine_denominator_female == 0.0 || self.sine_denominator_male == 0.0 {
            return Err("sigmoid width and sine denominators must be nonzero".into());
        }
        Ok(())
    }

    /// Muscle-fatigue development rate versus shoulder angle (degrees).
    pub fn sigmoid_fatigue_curve(&self, theta: f64) -> Result<f64, ExertionError> {
        let theta = shoulder_angle(theta)?;
        Ok(self.sigmoid_amp / (1.0 + ((self.sigmoid_center - theta) / self.sigmoid_width).exp()))
    }

    /// Sine fit of raw extended-arm shoulder torque, N·m.
    pub fn torque_fit(&self, theta: f64, sex: Sex) -> Result<f64, ExertionError> {
        let theta = shoulder_angle(theta)?;
        Ok((theta * 2.0 * PI / 360.0).sin() / self.sine_denominator(sex))
    }

    /// Torque surcharge for above-shoulder extended-arm poses, N·m.
    ///
    /// Zero at or below the shoulder line and for bent elbows; floored at
    /// zero elsewhere.
    pub fn correction_term(&self, theta: f64, elbow_flexion: f64, sex: Sex) -> Result<f64, ExertionError> {
        check_range("elbow flexion", elbow_flexion, 0.0, 180.0)?;
        let clamped = shoulder_angle(theta)?;
        if theta <= 90.0 || elbow_flexion > self.elbow_extended_max {
            return Ok(0.0);
        }
        let scaled = self.beta(sex) * self.sigmoid_fatigue_curve(clamped)?;
        Ok((scaled - self.torque_fit(clamped, sex)?).max(0.0))
    }

    /// Gesture-dependent maximum shoulder torque, N·m. Both angles in degrees.
    pub fn chaffin_max_torque(&self, elbow_angle: f64, shoulder_abduction: f64, sex: Sex) -> Result<f64, ExertionError> {
        let strength = (self.chaffin_intercept
            + self.chaffin_elbow_coef * elbow_angle
            + self.chaffin_shoulder_coef * shoulder_abduction)
            * self.strength_factor(sex);
        if !(strength > 0.0) {
            return Err(ExertionError::NonPositiveStrength(strength));
        }
        Ok(strength)
    }
}

/// How the elbow angle fed to the strength model is derived from flexion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElbowConvention {
    /// Interior elbow angle: 180° − flexion, so a straight arm is 180°.
    #[default]
    InteriorAngle,
    /// Degrees of bend away from straight, i.e. the flexion itself.
    ExtensionFromStraight,
}

impl ElbowConvention {
    pub fn elbow_angle(self, elbow_flexion: f64) -> f64 {
        match self {
            ElbowConvention::InteriorAngle => 180.0 - elbow_flexion,
            ElbowConvention::ExtensionFromStraight => elbow_flexion,
        }
    }
}

/// Per-frame exertion breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExertionSample {
    pub timestamp: f64,
    pub angles: ArmAngles,
    pub raw_torque: f64,
    pub correction: f64,
    pub corrected_torque: f64,
    pub max_torque: f64,
    /// %MVC. Not clamped at 100.
    pub relative_exertion: f64,
}

impl ExertionSample {
    pub fn exceeds_mvc(&self) -> bool {
        self.relative_exertion > 100.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExertionModel {
    pub coefficients: ModelCoefficients,
    pub elbow_convention: ElbowConvention,
}

impl ExertionModel {
    pub fn chaffin_max_torque(&self, angles: &ArmAngles, sex: Sex) -> Result<f64, ExertionError> {
        let elbow = self.elbow_convention.elbow_angle(angles.elbow_flexion);
        self.coefficients.chaffin_max_torque(elbow, angles.shoulder_abduction, sex)
    }

    pub fn relative_exertion(
        &self,
        timestamp: f64,
        raw_torque: f64,
        angles: ArmAngles,
        sex: Sex,
    ) -> Result<ExertionSample, ExertionError> {
        if !(raw_torque.is_finite() && raw_torque >= 0.0) {
            return Err(ExertionError::NegativeTorque(raw_torque));
        }
        let correction = self
            .coefficients
            .correction_term(angles.shoulder_abduction, angles.elbow_flexion, sex)?;
        let max_torque = self.chaffin_max_torque(&angles, sex)?;
        let corrected_torque = raw_torque + correction;
        Ok(ExertionSample {
            timestamp,
            angles,
            raw_torque,
            correction,
            corrected_torque,
            max_torque,
            relative_exertion: corrected_torque / max_torque * 100.0,
        })
    }
}
