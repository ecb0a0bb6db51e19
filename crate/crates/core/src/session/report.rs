//! Session report records and their JSON / CSV encodings.
//!
//! Floats are rounded to 9 significant digits before encoding, so equal
//! reports always produce identical bytes. Undefined CE scores and
//! unbounded endurance times encode as `null` in JSON and `undefined` in
//! CSV.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::fatigue::{Phase, PhaseEvent};

use super::config::ReportFormat;
use super::SessionError;

/// Round to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn sig9<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig9(*x))
}

fn opt_sig9<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_finite() => s.serialize_f64(round_sig9(*v)),
        _ => s.serialize_none(),
    }
}

fn phase_str(phase: Phase) -> &'static str {
    match phase {
        Phase::Active => "active",
        Phase::Rest => "rest",
    }
}

fn ser_phase<S: Serializer>(p: &Phase, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(phase_str(*p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameRecord {
    #[serde(rename = "t", serialize_with = "sig9")]
    pub timestamp: f64,
    #[serde(rename = "theta_deg", serialize_with = "sig9")]
    pub shoulder_abduction: f64,
    #[serde(rename = "elbow_flexion_deg", serialize_with = "sig9")]
    pub elbow_flexion: f64,
    #[serde(rename = "raw_torque_nm", serialize_with = "sig9")]
    pub raw_torque: f64,
    #[serde(rename = "correction_nm", serialize_with = "sig9")]
    pub correction: f64,
    #[serde(rename = "max_torque_nm", serialize_with = "sig9")]
    pub max_torque: f64,
    #[serde(rename = "mvc_pct", serialize_with = "sig9")]
    pub relative_exertion: f64,
    #[serde(serialize_with = "ser_phase")]
    pub phase: Phase,
    #[serde(rename = "nicer_pct", serialize_with = "sig9")]
    pub nicer: f64,
    #[serde(rename = "ce_pct", serialize_with = "opt_sig9")]
    pub ce: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventRecord {
    #[serde(rename = "t", serialize_with = "sig9")]
    pub timestamp: f64,
    pub transition: &'static str,
    #[serde(rename = "score_pct", serialize_with = "opt_sig9")]
    pub score: Option<f64>,
}

impl From<&PhaseEvent> for EventRecord {
    fn from(e: &PhaseEvent) -> Self {
        Self { timestamp: e.timestamp, transition: e.transition.as_str(), score: e.score_at_transition }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub frames: usize,
    #[serde(rename = "nicer_final_pct", serialize_with = "sig9")]
    pub nicer_final: f64,
    #[serde(rename = "ce_final_pct", serialize_with = "opt_sig9")]
    pub ce_final: Option<f64>,
    #[serde(rename = "mean_exertion_pct", serialize_with = "sig9")]
    pub mean_exertion: f64,
    /// NICER endurance time at the mean exertion; `None` at zero exertion.
    #[serde(rename = "nicer_et_s", serialize_with = "opt_sig9")]
    pub nicer_et: Option<f64>,
    /// Rohmert endurance time; `None` when unbounded.
    #[serde(rename = "rohmert_et_s", serialize_with = "opt_sig9")]
    pub rohmert_et: Option<f64>,
    #[serde(rename = "active_time_s", serialize_with = "sig9")]
    pub active_time: f64,
    #[serde(rename = "rest_time_s", serialize_with = "sig9")]
    pub rest_time: f64,
    pub frames_over_mvc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub summary: Summary,
    pub events: Vec<EventRecord>,
    /// Absent when per-frame output is disabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<FrameRecord>>,
}

fn csv_num(x: f64) -> String {
    round_sig9(x).to_string()
}

fn csv_opt(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => csv_num(v),
        _ => "undefined".into(),
    }
}

impl SessionReport {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }

    /// Summary `key,value` table, a blank line, the event table and, when
    /// present, a blank line and the per-frame table.
    pub fn to_csv(&self) -> Vec<u8> {
        let s = &self.summary;
        let mut out = String::from("key,value\n");
        let rows = [
            ("frames", s.frames.to_string()),
            ("nicer_final_pct", csv_num(s.nicer_final)),
            ("ce_final_pct", csv_opt(s.ce_final)),
            ("mean_exertion_pct", csv_num(s.mean_exertion)),
            ("nicer_et_s", csv_opt(s.nicer_et)),
            ("rohmert_et_s", csv_opt(s.rohmert_et)),
            ("active_time_s", csv_num(s.active_time)),
            ("rest_time_s", csv_num(s.rest_time)),
            ("frames_over_mvc", s.frames_over_mvc.to_string()),
        ];
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out.push_str("\nt,transition,score_pct\n");
        for e in &self.events {
            out.push_str(&format!("{},{},{}\n", csv_num(e.timestamp), e.transition, csv_opt(e.score)));
        }
        if let Some(frames) = &self.frames {
            out.push_str(
                "\nt,theta_deg,elbow_flexion_deg,raw_torque_nm,correction_nm,max_torque_nm,mvc_pct,phase,nicer_pct,ce_pct\n",
            );
            for f in frames {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    csv_num(f.timestamp),
                    csv_num(f.shoulder_abduction),
                    csv_num(f.elbow_flexion),
                    csv_num(f.raw_torque),
                    csv_num(f.correction),
                    csv_num(f.max_torque),
                    csv_num(f.relative_exertion),
                    phase_str(f.phase),
                    csv_num(f.nicer),
                    csv_opt(f.ce),
                ));
            }
        }
        out.into_bytes()
    }

    pub fn encode(&self, format: ReportFormat) -> Vec<u8> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

pub fn emit_report<W: Write>(report: &SessionReport, format: ReportFormat, mut out: W) -> Result<(), SessionError> {
    out.write_all(&report.encode(format)).map_err(|e| SessionError::Io(e.to_string()))?;
    out.flush().map_err(|e| SessionError::Io(e.to_string()))
}
