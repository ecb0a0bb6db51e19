//! Frame readers for the CSV and JSONL interchange formats.
//!
//! CSV header: `t,sx,sy,sz,ex,ey,ez,wx,wy,wz,hx,hy,hz,flag`. Hand columns
//! may be empty for three-joint trackers; `flag` is `active`, `rest`,
//! `unknown` or empty.
//!
//! JSONL: one object per line with `t`, `shoulder`, `elbow`, `wrist`,
//! optional `hand` (each `[x, y, z]`) and optional `flag`.

use std::io::{BufRead, Write};

use nalgebra::Vector3;
use serde::Deserialize;

use crate::kinematics::{ActivityFlag, JointFrame};

use super::config::InputFormat;
use super::SessionError;

pub const CSV_HEADER: [&str; 14] = [
    "t", "sx", "sy", "sz", "ex", "ey", "ez", "wx", "wy", "wz", "hx", "hy", "hz", "flag",
];

fn parse_flag(s: &str) -> Result<Option<ActivityFlag>, String> {
    match s.trim() {
        "" => Ok(None),
        "active" => Ok(Some(ActivityFlag::Active)),
        "rest" => Ok(Some(ActivityFlag::Rest)),
        "unknown" => Ok(Some(ActivityFlag::Unknown)),
        other => Err(format!("unknown flag `{other}`")),
    }
}

pub fn flag_str(flag: Option<ActivityFlag>) -> &'static str {
    match flag {
        None => "",
        Some(ActivityFlag::Active) => "active",
        Some(ActivityFlag::Rest) => "rest",
        Some(ActivityFlag::Unknown) => "unknown",
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> SessionError {
    SessionError::Parse { line, message: message.into() }
}

/// Streaming CSV frame reader.
pub struct CsvFrames<R: BufRead> {
    reader: csv::Reader<R>,
    record: csv::StringRecord,
    header_checked: bool,
}

impl<R: BufRead> CsvFrames<R> {
    pub fn new(input: R) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(input);
        Self { reader, record: csv::StringRecord::new(), header_checked: false }
    }

    fn parse_record(&self, line: usize) -> Result<JointFrame, SessionError> {
        let rec = &self.record;
        if rec.len() != CSV_HEADER.len() {
            return Err(parse_err(line, format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        let field = |i: usize| -> Result<f64, SessionError> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("column `{}`: `{}` is not a number", CSV_HEADER[i], &rec[i])))
        };
        let vec3 = |i: usize| -> Result<Vector3<f64>, SessionError> { Ok(Vector3::new(field(i)?, field(i + 1)?, field(i + 2)?)) };
        let hand_empty = (10..13).map(|i| rec[i].is_empty()).collect::<Vec<_>>();
        let hand = match hand_empty.as_slice() {
            [true, true, true] => None,
            [false, false, false] => Some(vec3(10)?),
            _ => return Err(parse_err(line, "hand columns must be all present or all empty")),
        };
        Ok(JointFrame {
            timestamp: field(0)?,
            shoulder: vec3(1)?,
            elbow: vec3(4)?,
            wrist: vec3(7)?,
            hand,
            activity: parse_flag(&rec[13]).map_err(|m| parse_err(line, m))?,
        })
    }
}

impl<R: BufRead> Iterator for CsvFrames<R> {
    type Item = Result<JointFrame, SessionError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.reader.read_record(&mut self.record) {
                Ok(false) => return None,
                Ok(true) => {}
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    return Some(Err(parse_err(line, e.to_string())));
                }
            }
            let line = self.record.position().map_or(0, |p| p.line() as usize);
            if !self.header_checked {
                self.header_checked = true;
                let found: Vec<&str> = self.record.iter().collect();
                if found != CSV_HEADER {
                    return Some(Err(parse_err(line, format!("expected header `{}`", CSV_HEADER.join(",")))));
                }
                continue;
            }
            if self.record.iter().all(str::is_empty) {
                continue;
            }
            return Some(self.parse_record(line));
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonFrame {
    t: f64,
    shoulder: [f64; 3],
    elbow: [f64; 3],
    wrist: [f64; 3],
    #[serde(default)]
    hand: Option<[f64; 3]>,
    #[serde(default)]
    flag: Option<String>,
}

/// Streaming JSONL frame reader.
pub struct JsonlFrames<R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> JsonlFrames<R> {
    pub fn new(input: R) -> Self {
        Self { lines: input.lines(), line_no: 0 }
    }
}

impl<R: BufRead> Iterator for JsonlFrames<R> {
    type Item = Result<JointFrame, SessionError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(SessionError::Io(e.to_string()))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let line_no = self.line_no;
            let parsed = serde_json::from_str::<JsonFrame>(&line)
                .map_err(|e| parse_err(line_no, e.to_string()))
                .and_then(|f| {
                    let activity = parse_flag(f.flag.as_deref().unwrap_or("")).map_err(|m| parse_err(line_no, m))?;
                    Ok(JointFrame {
                        timestamp: f.t,
                        shoulder: Vector3::from(f.shoulder),
                        elbow: Vector3::from(f.elbow),
                        wrist: Vector3::from(f.wrist),
                        hand: f.hand.map(Vector3::from),
                        activity,
                    })
                });
            return Some(parsed);
        }
    }
}

/// Boxed frame stream for either input format.
pub fn read_frames<'a, R: BufRead + 'a>(
    input: R,
    format: InputFormat,
) -> Box<dyn Iterator<Item = Result<JointFrame, SessionError>> + 'a> {
    match format {
        InputFormat::Csv => Box::new(CsvFrames::new(input)),
        InputFormat::Jsonl => Box::new(JsonlFrames::new(input)),
    }
}

/// Write frames as CSV using the same header the reader expects.
pub fn write_frames_csv<W: Write>(out: W, frames: &[JointFrame]) -> Result<(), SessionError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| SessionError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for f in frames {
        let mut row: Vec<String> = Vec::with_capacity(14);
        row.push(f.timestamp.to_string());
        for v in [f.shoulder, f.elbow, f.wrist] {
            row.extend(v.iter().map(|c| c.to_string()));
        }
        match f.hand {
            Some(h) => row.extend(h.iter().map(|c| c.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        }
        row.push(flag_str(f.activity).to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| SessionError::Io(e.to_string()))?;
    Ok(())
}

/// Write frames as JSONL.
pub fn write_frames_jsonl<W: Write>(mut out: W, frames: &[JointFrame]) -> Result<(), SessionError> {
    for f in frames {
        let mut obj = serde_json::Map::new();
        obj.insert("t".into(), f.timestamp.into());
        for (name, v) in [("shoulder", f.shoulder), ("elbow", f.elbow), ("wrist", f.wrist)] {
            obj.insert(name.into(), serde_json::json!([v.x, v.y, v.z]));
        }
        if let Some(h) = f.hand {
            obj.insert("hand".into(), serde_json::json!([h.x, h.y, h.z]));
        }
        if f.activity.is_some() {
            obj.insert("flag".into(), flag_str(f.activity).into());
        }
        writeln!(out, "{}", serde_json::Value::Object(obj)).map_err(|e| SessionError::Io(e.to_string()))?;
    }
    Ok(())
}
