//! Arm kinematics: joint angles, whole-arm center of mass and shoulder torque.
//!
//! Positions are meters in a right-handed world frame with gravity along -Z.

use nalgebra::Vector3;
use thiserror::Error;

/// Conventional gravitational acceleration, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Joints closer than this are treated as coincident.
const COINCIDENT_EPS: f64 = 1e-9;

/// Longest time span a differencing window may cover.
pub const MAX_WINDOW_SPAN_S: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("degenerate {0} segment: joints coincide")]
    DegenerateSegment(&'static str),
    #[error("non-finite joint position at t={0}")]
    NonFinitePosition(f64),
    #[error("insufficient history: need at least {needed} frames, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("timestamps not strictly increasing at t={0}")]
    NonMonotonicTime(f64),
    #[error("history window spans {0} s, more than the allowed 0.5 s")]
    WindowTooLong(f64),
    #[error("invalid subject profile: {0}")]
    InvalidProfile(String),
}

/// Activity annotation carried by a frame, when the source provides one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityFlag {
    Active,
    Rest,
    Unknown,
}

/// One timestamped sample of tracked right-arm joints.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFrame {
    pub timestamp: f64,
    pub shoulder: Vector3<f64>,
    pub elbow: Vector3<f64>,
    pub wrist: Vector3<f64>,
    /// Missing for three-joint trackers.
    pub hand: Option<Vector3<f64>>,
    pub activity: Option<ActivityFlag>,
}

impl JointFrame {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let finite = |v: &Vector3<f64>| v.iter().all(|c| c.is_finite());
        if !self.timestamp.is_finite()
            || !finite(&self.shoulder)
            || !finite(&self.elbow)
            || !finite(&self.wrist)
            || !self.hand.as_ref().is_none_or(finite)
        {
            return Err(KinematicsError::NonFinitePosition(self.timestamp));
        }
        if (self.elbow - self.shoulder).norm() <= COINCIDENT_EPS {
            return Err(KinematicsError::DegenerateSegment("upper arm"));
        }
        if (self.wrist - self.elbow).norm() <= COINCIDENT_EPS {
            return Err(KinematicsError::DegenerateSegment("forearm"));
        }
        Ok(())
    }

    /// Distal-most tracked point: hand if present, otherwise wrist.
    pub fn end_effector(&self) -> Vector3<f64> {
        self.hand.unwrap_or(self.wrist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sex {
    Female,
    Male,
}

/// Segment mass fractions (of body mass) and COM positions (fraction of
/// segment length from the proximal joint).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentTable {
    pub upper_arm_mass: f64,
    pub forearm_mass: f64,
    pub hand_mass: f64,
    pub upper_arm_com: f64,
    pub forearm_com: f64,
    pub hand_com: f64,
}

impl Default for SegmentTable {
    fn default() -> Self {
        Self {
            upper_arm_mass: 0.028,
            forearm_mass: 0.016,
            hand_mass: 0.006,
            upper_arm_com: 0.436,
            forearm_com: 0.430,
            hand_com: 0.506,
        }
    }
}

impl SegmentTable {
    pub fn total_mass_fraction(&self) -> f64 {
        self.upper_arm_mass + self.forearm_mass + self.hand_mass
    }

    fn validate(&self) -> Result<(), KinematicsError> {
        let masses = [self.upper_arm_mass, self.forearm_mass, self.hand_mass];
        let coms = [self.upper_arm_com, self.forearm_com, self.hand_com];
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) || self.total_mass_fraction() <= 0.0 {
            return Err(KinematicsError::InvalidProfile(
                "segment mass fractions must be finite, nonnegative and sum > 0".into(),
            ));
        }
        if coms.iter().any(|c| !c.is_finite() || !(0.0..=1.0).contains(c)) {
            return Err(KinematicsError::InvalidProfile(
                "segment COM fractions must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub sex: Sex,
    pub body_mass_kg: f64,
    /// Unit vector along the torso's upward axis.
    pub torso_up: Vector3<f64>,
    pub segments: SegmentTable,
}

impl SubjectProfile {
    pub fn new(sex: Sex, body_mass_kg: f64) -> Result<Self, KinematicsError> {
        let profile = Self {
            sex,
            body_mass_kg,
            torso_up: Vector3::z(),
            segments: SegmentTable::default(),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.body_mass_kg.is_finite() && self.body_mass_kg > 0.0) {
            return Err(KinematicsError::InvalidProfile(format!(
                "body mass must be > 0 kg, got {}",
                self.body_mass_kg
            )));
        }
        if !((self.torso_up.norm() - 1.0).abs() <= 1e-9) {
            return Err(KinematicsError::InvalidProfile(
                "torso_up must have unit norm".into(),
            ));
        }
        self.segments.validate()
    }

    pub fn arm_mass_kg(&self) -> f64 {
        self.segments.total_mass_fraction() * self.body_mass_kg
    }
}

/// Shoulder abduction (0° arm at side, 90° horizontal, 180° overhead) and
/// elbow flexion (0° straight arm), both in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmAngles {
    pub shoulder_abduction: f64,
    pub elbow_flexion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    pub com_pos: Vector3<f64>,
    pub com_acc: Vector3<f64>,
    pub arm_mass: f64,
    /// Shoulder to center of mass.
    pub lever: Vector3<f64>,
}

fn angle_between_deg(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    // atan2 form stays accurate near 0° and 180°.
    let angle = a.cross(b).norm().atan2(a.dot(b)).to_degrees();
    angle.clamp(0.0, 180.0)
}

pub fn compute_arm_angles(
    frame: &JointFrame,
    profile: &SubjectProfile,
) -> Result<ArmAngles, KinematicsError> {
    frame.validate()?;
    let upper = frame.elbow - frame.shoulder;
    let fore = frame.wrist - frame.elbow;
    let torso_down = -profile.torso_up;
    Ok(ArmAngles {
        shoulder_abduction: angle_between_deg(&upper, &torso_down),
        // 180° minus the interior elbow angle equals the angle between the
        // upper-arm and forearm directions.
        elbow_flexion: angle_between_deg(&upper, &fore),
    })
}

/// Whole-arm center of mass for one frame.
pub fn arm_com(frame: &JointFrame, segments: &SegmentTable) -> Vector3<f64> {
    let upper = frame.shoulder + (frame.elbow - frame.shoulder) * segments.upper_arm_com;
    let fore = frame.elbow + (frame.wrist - frame.elbow) * segments.forearm_com;
    let mut weighted = upper * segments.upper_arm_mass + fore * segments.forearm_mass;
    let mut total = segments.upper_arm_mass + segments.forearm_mass;
    if let Some(hand) = frame.hand {
        weighted += (frame.wrist + (hand - frame.wrist) * segments.hand_com) * segments.hand_mass;
        total += segments.hand_mass;
    }
    weighted / total
}

/// Options for the acceleration estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccelEstimator {
    /// Moving-average width applied to COM positions before differencing.
    /// 1 disables smoothing.
    pub smoothing_width: usize,
}

impl Default for AccelEstimator {
    fn default() -> Self {
        Self { smoothing_width: 1 }
    }
}

impl AccelEstimator {
    pub fn required_frames(&self) -> usize {
        self.smoothing_width.max(1) + 2
    }
}

/// Arm state at the newest frame of `history` (oldest first).
///
/// The acceleration is the three-point second difference over the window
/// tail, valid for irregular spacing and exact for quadratic motion.
pub fn compute_arm_state(
    history: &[JointFrame],
    profile: &SubjectProfile,
    estimator: &AccelEstimator,
) -> Result<ArmState, KinematicsError> {
    let needed = estimator.required_frames();
    if history.len() < needed {
        return Err(KinematicsError::InsufficientHistory { needed, got: history.len() });
    }
    let window = &history[history.len() - needed..];
    for pair in window.windows(2) {
        if !(pair[1].timestamp > pair[0].timestamp) {
            return Err(KinematicsError::NonMonotonicTime(pair[1].timestamp));
        }
    }
    let span = window[needed - 1].timestamp - window[0].timestamp;
    if span > MAX_WINDOW_SPAN_S {
        return Err(KinematicsError::WindowTooLong(span));
    }
    for f in window {
        f.validate()?;
    }

    let coms: Vec<(f64, Vector3<f64>)> = window
        .iter()
        .map(|f| (f.timestamp, arm_com(f, &profile.segments)))
        .collect();
    let width = estimator.smoothing_width.max(1);
    let smoothed: Vec<(f64, Vector3<f64>)> = coms
        .windows(width)
        .map(|w| {
            let n = w.len() as f64;
            let t = w.iter().map(|(t, _)| t).sum::<f64>() / n;
            let p = w.iter().fold(Vector3::zeros(), |acc, (_, p)| acc + p) / n;
            (t, p)
        })
        .collect();
    let [(t0, p0), (t1, p1), (t2, p2)] = [smoothed[0], smoothed[1], smoothed[2]];
    let h1 = t1 - t0;
    let h2 = t2 - t1;
    let com_acc = ((p2 - p1) / h2 - (p1 - p0) / h1) * (2.0 / (h1 + h2));

    let newest = &window[needed - 1];
    let com_pos = coms[needed - 1].1;
    Ok(ArmState {
        com_pos,
        com_acc,
        arm_mass: profile.arm_mass_kg(),
        lever: com_pos - newest.shoulder,
    })
}

/// Arm state for a single frame assuming no acceleration.
pub fn static_arm_state(frame: &JointFrame, profile: &SubjectProfile) -> ArmState {
    let com_pos = arm_com(frame, &profile.segments);
    ArmState {
        com_pos,
        com_acc: Vector3::zeros(),
        arm_mass: profile.arm_mass_kg(),
        lever: com_pos - frame.shoulder,
    }
}

/// Magnitude of the shoulder moment `lever × m(g - a)`, in N·m.
pub fn compute_shoulder_torque(state: &ArmState, gravity: f64) -> f64 {
    let g = Vector3::new(0.0, 0.0, -gravity);
    let force = (g - state.com_acc) * state.arm_mass;
    state.lever.cross(&force).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn frame(t: f64, s: [f64; 3], e: [f64; 3], w: [f64; 3], h: Option<[f64; 3]>) -> JointFrame {
        JointFrame {
            timestamp: t,
            shoulder: Vector3::from(s),
            elbow: Vector3::from(e),
            wrist: Vector3::from(w),
            hand: h.map(Vector3::from),
            activity: None,
        }
    }

    fn straight_arm(t: f64, abduction_deg: f64) -> JointFrame {
        let a = abduction_deg.to_radians();
        let d = Vector3::new(a.sin(), 0.0, -a.cos());
        let s = Vector3::new(0.0, 0.0, 1.4);
        JointFrame {
            timestamp: t,
            shoulder: s,
            elbow: s + d * 0.3,
            wrist: s + d * 0.57,
            hand: Some(s + d * 0.65),
            activity: None,
        }
    }

    fn profile() -> SubjectProfile {
        SubjectProfile::new(Sex::Female, 70.0).unwrap()
    }

    #[test]
    fn arm_down_is_zero_zero() {
        let f = frame(0.0, [0., 0., 1.4], [0., 0., 1.1], [0., 0., 0.83], None);
        let a = compute_arm_angles(&f, &profile()).unwrap();
        assert_eq!(a.shoulder_abduction, 0.0);
        assert_eq!(a.elbow_flexion, 0.0);
    }

    #[test]
    fn horizontal_arm_is_ninety() {
        let f = frame(0.0, [0., 0., 1.4], [0.3, 0., 1.4], [0.57, 0., 1.4], None);
        let a = compute_arm_angles(&f, &profile()).unwrap();
        assert_relative_eq!(a.shoulder_abduction, 90.0, epsilon = 1e-12);
        assert_relative_eq!(a.elbow_flexion, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn raised_forty_five_above_horizontal() {
        let f = straight_arm(0.0, 135.0);
        // independent check: acos of the normalized dot product with -Z
        let u = (f.elbow - f.shoulder).normalize();
        let oracle = (-u.z).acos().to_degrees();
        let a = compute_arm_angles(&f, &profile()).unwrap();
        assert_relative_eq!(a.shoulder_abduction, 135.0, epsilon = 1e-9);
        assert_relative_eq!(a.shoulder_abduction, oracle, epsilon = 1e-9);
        assert!(a.elbow_flexion.abs() < 1e-6);
    }

    #[test]
    fn right_angle_elbow() {
        let f = frame(0.0, [0., 0., 1.4], [0.3, 0., 1.4], [0.3, 0., 1.67], None);
        let a = compute_arm_angles(&f, &profile()).unwrap();
        assert_relative_eq!(a.elbow_flexion, 90.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_joints_rejected() {
        let f = frame(0.0, [0., 0., 1.4], [0., 0., 1.4], [0.3, 0., 1.4], None);
        assert_eq!(
            compute_arm_angles(&f, &profile()),
            Err(KinematicsError::DegenerateSegment("upper arm"))
        );
        let f = frame(0.0, [0., 0., 1.4], [0.3, 0., 1.4], [0.3, 0., 1.4], None);
        assert_eq!(
            compute_arm_angles(&f, &profile()),
            Err(KinematicsError::DegenerateSegment("forearm"))
        );
    }

    #[test]
    fn default_arm_mass() {
        // 0.028 + 0.016 + 0.006 = 0.050
        let p = profile();
        assert_relative_eq!(p.arm_mass_kg(), 3.5, epsilon = 1e-12);
        let hist: Vec<_> = (0..3).map(|i| straight_arm(i as f64 * 0.02, 90.0)).collect();
        let st = compute_arm_state(&hist, &p, &AccelEstimator::default()).unwrap();
        assert_relative_eq!(st.arm_mass, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn static_pose_has_no_acceleration() {
        let hist: Vec<_> = (0..3).map(|i| straight_arm(i as f64 * 0.02, 70.0)).collect();
        let st = compute_arm_state(&hist, &profile(), &AccelEstimator::default()).unwrap();
        assert_eq!(st.com_acc, Vector3::zeros());
    }

    #[test]
    fn constant_velocity_has_no_acceleration() {
        let v = Vector3::new(0.4, -0.1, 0.25);
        let hist: Vec<_> = [0.0, 0.013, 0.031]
            .iter()
            .map(|&t| {
                let mut f = straight_arm(t, 60.0);
                let off = v * t;
                f.shoulder += off;
                f.elbow += off;
                f.wrist += off;
                f.hand = f.hand.map(|h| h + off);
                f
            })
            .collect();
        let st = compute_arm_state(&hist, &profile(), &AccelEstimator::default()).unwrap();
        assert!(st.com_acc.norm() < 1e-9);
    }

    #[test]
    fn quadratic_trajectory_matches_analytic_acceleration() {
        let acc = Vector3::new(1.5, -0.7, 3.2);
        let vel = Vector3::new(0.2, 0.1, -0.3);
        let times = [1.0, 1.017, 1.041, 1.06, 1.078];
        let hist: Vec<_> = times
            .iter()
            .map(|&t| {
                let mut f = straight_arm(t, 100.0);
                let tt = t - 1.0;
                let off = vel * tt + acc * (0.5 * tt * tt);
                f.shoulder += off;
                f.elbow += off;
                f.wrist += off;
                f.hand = f.hand.map(|h| h + off);
                f
            })
            .collect();
        let st = compute_arm_state(&hist, &profile(), &AccelEstimator::default()).unwrap();
        assert!((st.com_acc - acc).norm() < 1e-6);
    }

    #[test]
    fn smoothing_needs_wider_window() {
        let est = AccelEstimator { smoothing_width: 3 };
        let hist: Vec<_> = (0..4).map(|i| straight_arm(i as f64 * 0.02, 90.0)).collect();
        assert_eq!(
            compute_arm_state(&hist, &profile(), &est),
            Err(KinematicsError::InsufficientHistory { needed: 5, got: 4 })
        );
        let hist: Vec<_> = (0..5).map(|i| straight_arm(i as f64 * 0.02, 90.0)).collect();
        let st = compute_arm_state(&hist, &profile(), &est).unwrap();
        assert!(st.com_acc.norm() < 1e-12);
    }

    #[test]
    fn history_errors() {
        let p = profile();
        let est = AccelEstimator::default();
        let two: Vec<_> = (0..2).map(|i| straight_arm(i as f64 * 0.02, 90.0)).collect();
        assert!(matches!(
            compute_arm_state(&two, &p, &est),
            Err(KinematicsError::InsufficientHistory { .. })
        ));
        let dup = vec![straight_arm(0.0, 90.0), straight_arm(0.02, 90.0), straight_arm(0.02, 90.0)];
        assert_eq!(compute_arm_state(&dup, &p, &est), Err(KinematicsError::NonMonotonicTime(0.02)));
        let long = vec![straight_arm(0.0, 90.0), straight_arm(0.3, 90.0), straight_arm(0.6, 90.0)];
        assert!(matches!(compute_arm_state(&long, &p, &est), Err(KinematicsError::WindowTooLong(_))));
    }

    #[test]
    fn missing_hand_renormalizes_weights() {
        let mut f = straight_arm(0.0, 90.0);
        f.hand = None;
        let seg = SegmentTable::default();
        let com = arm_com(&f, &seg);
        let expected = (0.028 * 0.3 * 0.436 + 0.016 * (0.3 + 0.27 * 0.43)) / 0.044;
        assert_relative_eq!(com.x, expected, epsilon = 1e-12);
    }

    #[test]
    fn torque_examples() {
        let down = ArmState {
            com_pos: Vector3::new(0.0, 0.0, 1.1),
            com_acc: Vector3::zeros(),
            arm_mass: 3.5,
            lever: Vector3::new(0.0, 0.0, -0.3),
        };
        assert_eq!(compute_shoulder_torque(&down, STANDARD_GRAVITY), 0.0);

        let horizontal = ArmState { lever: Vector3::new(0.3, 0.0, 0.0), ..down };
        assert_relative_eq!(
            compute_shoulder_torque(&horizontal, STANDARD_GRAVITY),
            0.3 * 3.5 * 9.81,
            max_relative = 1e-12
        );

        let a = 135f64.to_radians();
        let raised = ArmState { lever: Vector3::new(0.3 * a.sin(), 0.0, -0.3 * a.cos()), ..down };
        // explicit cross product: |r_x * F_z| with F = (0, 0, -m g)
        let oracle = (0.3 * a.sin() * 3.5 * 9.81).abs();
        let torque = compute_shoulder_torque(&raised, STANDARD_GRAVITY);
        assert_relative_eq!(torque, oracle, max_relative = 1e-12);
        assert_relative_eq!(torque, 7.283553399612033, max_relative = 1e-12);
    }

    #[test]
    fn profile_validation() {
        assert!(SubjectProfile::new(Sex::Male, 0.0).is_err());
        let mut p = profile();
        p.torso_up = Vector3::new(0.0, 0.0, 1.1);
        assert!(p.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn posed(abduction: f64, azimuth: f64, flexion: f64) -> JointFrame {
            let (a, z, fl) = (abduction.to_radians(), azimuth.to_radians(), flexion.to_radians());
            let d = Vector3::new(a.sin() * z.cos(), a.sin() * z.sin(), -a.cos());
            let perp = Vector3::new(-z.sin(), z.cos(), 0.0);
            let fd = d * fl.cos() + perp * fl.sin();
            let s = Vector3::new(0.1, -0.2, 1.4);
            JointFrame {
                timestamp: 0.0,
                shoulder: s,
                elbow: s + d * 0.3,
                wrist: s + d * 0.3 + fd * 0.27,
                hand: Some(s + d * 0.3 + fd * 0.35),
                activity: None,
            }
        }

        proptest! {
            #[test]
            fn raw_torque_symmetric_about_horizontal(theta in 0.0f64..90.0) {
                let p = profile();
                let lo = compute_shoulder_torque(&static_arm_state(&straight_arm(0.0, theta), &p), STANDARD_GRAVITY);
                let hi = compute_shoulder_torque(&static_arm_state(&straight_arm(0.0, 180.0 - theta), &p), STANDARD_GRAVITY);
                prop_assert!((lo - hi).abs() <= 1e-9 * lo.max(hi).max(1e-300));
            }

            #[test]
            fn torque_invariant_under_vertical_rotation(
                theta in 1.0f64..179.0, flex in 0.0f64..120.0, yaw in -180.0f64..180.0,
            ) {
                let p = profile();
                let f = posed(theta, 0.0, flex);
                let g = posed(theta, yaw, flex);
                let tf = compute_shoulder_torque(&static_arm_state(&f, &p), STANDARD_GRAVITY);
                let tg = compute_shoulder_torque(&static_arm_state(&g, &p), STANDARD_GRAVITY);
                prop_assert!((tf - tg).abs() < 1e-9);
            }

            #[test]
            fn angles_invariant_under_translation(
                theta in 0.0f64..180.0, flex in 0.0f64..170.0,
                dx in -5.0f64..5.0, dy in -5.0f64..5.0, dz in -5.0f64..5.0,
            ) {
                let p = profile();
                let f = posed(theta, 30.0, flex);
                let off = Vector3::new(dx, dy, dz);
                let mut g = f.clone();
                g.shoulder += off;
                g.elbow += off;
                g.wrist += off;
                g.hand = g.hand.map(|h| h + off);
                let a = compute_arm_angles(&f, &p).unwrap();
                let b = compute_arm_angles(&g, &p).unwrap();
                prop_assert!((a.shoulder_abduction - b.shoulder_abduction).abs() < 1e-6);
                prop_assert!((a.elbow_flexion - b.elbow_flexion).abs() < 1e-6);
                prop_assert!((a.shoulder_abduction - theta).abs() < 1e-6);
                prop_assert!((a.elbow_flexion - flex).abs() < 1e-6);
            }
        }
    }
}
