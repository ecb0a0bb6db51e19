//! Synthetic right-arm trajectories: static holds and block-structured
//! reach sequences with minimum-jerk point-to-point motion.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::kinematics::{ActivityFlag, JointFrame};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid trajectory parameters: {0}")]
pub struct InvalidParams(pub String);

/// Segment lengths (m) and shoulder placement of the synthetic arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmGeometry {
    pub shoulder: Vector3<f64>,
    pub upper_arm: f64,
    pub forearm: f64,
    pub hand: f64,
}

impl Default for ArmGeometry {
    fn default() -> Self {
        Self { shoulder: Vector3::new(0.0, 0.0, 1.45), upper_arm: 0.30, forearm: 0.27, hand: 0.08 }
    }
}

/// Arm pose: shoulder abduction from the side, heading of the arm plane
/// about the vertical (0° lateral, 90° forward), and elbow flexion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPose {
    pub abduction: f64,
    pub azimuth: f64,
    pub elbow_flexion: f64,
}

impl ArmGeometry {
    pub fn frame(&self, t: f64, pose: ArmPose, activity: Option<ActivityFlag>) -> JointFrame {
        let (a, z, fl) = (pose.abduction.to_radians(), pose.azimuth.to_radians(), pose.elbow_flexion.to_radians());
        let upper = Vector3::new(a.sin() * z.cos(), a.sin() * z.sin(), -a.cos());
        // forearm bends upward within the vertical plane of the upper arm
        let bend = Vector3::new(a.cos() * z.cos(), a.cos() * z.sin(), a.sin());
        let fore = upper * fl.cos() + bend * fl.sin();
        let elbow = self.shoulder + upper * self.upper_arm;
        let wrist = elbow + fore * self.forearm;
        JointFrame {
            timestamp: t,
            shoulder: self.shoulder,
            elbow,
            wrist,
            hand: Some(wrist + fore * self.hand),
            activity,
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<(), InvalidParams> {
    if cond {
        Ok(())
    } else {
        Err(InvalidParams(msg.into()))
    }
}

fn jitter(frames: &mut [JointFrame], sd: f64, seed: u64) -> Result<(), InvalidParams> {
    if sd == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sd).map_err(|e| InvalidParams(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = |v: &mut Vector3<f64>| {
        for c in v.iter_mut() {
            *c += normal.sample(&mut rng);
        }
    };
    for f in frames {
        noise(&mut f.shoulder);
        noise(&mut f.elbow);
        noise(&mut f.wrist);
        if let Some(h) = f.hand.as_mut() {
            noise(h);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticHoldParams {
    pub abduction_deg: f64,
    pub elbow_flexion_deg: f64,
    pub azimuth_deg: f64,
    pub duration_s: f64,
    pub rate_hz: f64,
    /// Standard deviation of per-coordinate Gaussian noise, m.
    pub jitter_m: f64,
    pub seed: u64,
    pub flag: Option<ActivityFlag>,
    pub geometry: ArmGeometry,
}

impl Default for StaticHoldParams {
    fn default() -> Self {
        Self {
            abduction_deg: 90.0,
            elbow_flexion_deg: 0.0,
            azimuth_deg: 0.0,
            duration_s: 600.0,
            rate_hz: 50.0,
            jitter_m: 0.0,
            seed: 0,
            flag: Some(ActivityFlag::Active),
            geometry: ArmGeometry::default(),
        }
    }
}

/// Fixed pose sampled at `rate_hz` for `duration_s` (`duration * rate`
/// frames starting at t = 0).
pub fn static_hold(p: &StaticHoldParams) -> Result<Vec<JointFrame>, InvalidParams> {
    check(p.abduction_deg > 0.0 && p.abduction_deg < 180.0, "abduction must lie in (0, 180)")?;
    check((0.0..180.0).contains(&p.elbow_flexion_deg), "elbow flexion must lie in [0, 180)")?;
    check(p.duration_s > 0.0 && p.duration_s.is_finite(), "duration must be > 0")?;
    check(p.rate_hz > 0.0 && p.rate_hz.is_finite(), "rate must be > 0")?;
    check(p.jitter_m >= 0.0 && p.jitter_m.is_finite(), "jitter must be >= 0")?;
    let pose = ArmPose { abduction: p.abduction_deg, azimuth: p.azimuth_deg, elbow_flexion: p.elbow_flexion_deg };
    let n = (p.duration_s * p.rate_hz).round() as usize;
    let mut frames: Vec<_> = (0..n).map(|i| p.geometry.frame(i as f64 / p.rate_hz, pose, p.flag)).collect();
    jitter(&mut frames, p.jitter_m, p.seed)?;
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachSequenceParams {
    pub targets: usize,
    pub targets_per_block: usize,
    pub break_s: f64,
    pub reach_s: f64,
    /// Hold time at each target.
    pub dwell_s: f64,
    pub rate_hz: f64,
    /// Target abduction range, degrees.
    pub min_abduction: f64,
    pub max_abduction: f64,
    /// Target heading range, degrees.
    pub min_azimuth: f64,
    pub max_azimuth: f64,
    /// Arm pose held during breaks.
    pub rest_abduction: f64,
    pub jitter_m: f64,
    pub seed: u64,
    pub geometry: ArmGeometry,
}

impl Default for ReachSequenceParams {
    fn default() -> Self {
        Self {
            targets: 30,
            targets_per_block: 6,
            break_s: 15.0,
            reach_s: 1.2,
            dwell_s: 0.8,
            rate_hz: 50.0,
            min_abduction: 60.0,
            max_abduction: 150.0,
            min_azimuth: 0.0,
            max_azimuth: 90.0,
            rest_abduction: 5.0,
            jitter_m: 0.0,
            seed: 7,
            geometry: ArmGeometry::default(),
        }
    }
}

/// Minimum-jerk position profile on [0, 1].
pub fn minimum_jerk(tau: f64) -> f64 {
    let t = tau.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

struct Segment {
    start: f64,
    duration: f64,
    from: ArmPose,
    to: ArmPose,
    flag: ActivityFlag,
}

impl Segment {
    fn pose_at(&self, t: f64) -> ArmPose {
        let s = if self.duration > 0.0 { minimum_jerk((t - self.start) / self.duration) } else { 1.0 };
        let lerp = |a: f64, b: f64| a + (b - a) * s;
        ArmPose {
            abduction: lerp(self.from.abduction, self.to.abduction),
            azimuth: lerp(self.from.azimuth, self.to.azimuth),
            elbow_flexion: lerp(self.from.elbow_flexion, self.to.elbow_flexion),
        }
    }
}

/// Blocks of reaches to random extended-arm targets, each block followed
/// by a rest break (flagged `rest`) with the arm lowered.
pub fn reach_sequence(p: &ReachSequenceParams) -> Result<Vec<JointFrame>, InvalidParams> {
    check(p.targets > 0, "target count must be > 0")?;
    check(p.targets_per_block > 0, "targets per block must be > 0")?;
    check(p.break_s > 0.0 && p.reach_s > 0.0 && p.dwell_s >= 0.0, "durations must be > 0")?;
    check(p.rate_hz > 0.0 && p.rate_hz.is_finite(), "rate must be > 0")?;
    check(
        0.0 < p.min_abduction && p.min_abduction <= p.max_abduction && p.max_abduction < 180.0,
        "abduction range must lie in (0, 180)",
    )?;
    check(p.min_azimuth <= p.max_azimuth, "azimuth range is empty")?;
    check(p.rest_abduction > 0.0 && p.rest_abduction < 180.0, "rest abduction must lie in (0, 180)")?;
    check(p.jitter_m >= 0.0, "jitter must be >= 0")?;

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rest = ArmPose { abduction: p.rest_abduction, azimuth: 0.0, elbow_flexion: 0.0 };
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut current = rest;
    let push = |segments: &mut Vec<Segment>, t: &mut f64, duration: f64, from: ArmPose, to: ArmPose, flag| {
        segments.push(Segment { start: *t, duration, from, to, flag });
        *t += duration;
    };
    for i in 0..p.targets {
        let target = ArmPose {
            abduction: rng.random_range(p.min_abduction..=p.max_abduction),
            azimuth: rng.random_range(p.min_azimuth..=p.max_azimuth),
            elbow_flexion: 0.0,
        };
        push(&mut segments, &mut t, p.reach_s, current, target, ActivityFlag::Active);
        push(&mut segments, &mut t, p.dwell_s, target, target, ActivityFlag::Active);
        current = target;
        let block_done = (i + 1) % p.targets_per_block == 0 || i + 1 == p.targets;
        if block_done {
            let lower = (p.break_s / 2.0).min(1.0);
            push(&mut segments, &mut t, lower, current, rest, ActivityFlag::Rest);
            push(&mut segments, &mut t, p.break_s - lower, rest, rest, ActivityFlag::Rest);
            current = rest;
        }
    }

    let total = t;
    let n = (total * p.rate_hz).round() as usize;
    let mut idx = 0;
    let mut frames = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let ti = i as f64 / p.rate_hz;
        while idx + 1 < segments.len() && ti >= segments[idx + 1].start - 1e-9 {
            idx += 1;
        }
        let seg = &segments[idx];
        frames.push(p.geometry.frame(ti, seg.pose_at(ti), Some(seg.flag)));
    }
    jitter(&mut frames, p.jitter_m, p.seed.wrapping_add(1))?;
    Ok(frames)
}
