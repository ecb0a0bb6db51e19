//! Offline EMG and rating analysis: bandpass filtering, RMS envelopes,
//! regression-slope fatigue indices and Pearson correlation.

mod filter;
mod stats;

pub use filter::{Biquad, SosFilter};
pub use stats::{borg_slope, fatigue_index, linear_fit, pearson_correlation, Correlation, LinearFit};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("upper band edge {high} Hz must be below Nyquist {nyquist} Hz")]
    NyquistViolation { high: f64, nyquist: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("RMS window holds no samples")]
    EmptyWindow,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("invalid trace: {0}")]
    InvalidTrace(&'static str),
}

/// Uniformly sampled single-channel EMG signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EmgTrace {
    pub sample_rate: f64,
    pub samples: Vec<f64>,
    /// Amplitude corresponding to 100 %MVC.
    pub mvc_reference: f64,
    pub muscle_label: String,
}

impl EmgTrace {
    pub fn new(sample_rate: f64, samples: Vec<f64>, mvc_reference: f64, muscle_label: impl Into<String>) -> Result<Self, AnalysisError> {
        let trace = Self { sample_rate, samples, mvc_reference, muscle_label: muscle_label.into() };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(AnalysisError::InvalidTrace("sample rate must be positive"));
        }
        if self.samples.is_empty() {
            return Err(AnalysisError::InvalidTrace("no samples"));
        }
        if self.samples.iter().any(|s| !s.is_finite()) {
            return Err(AnalysisError::InvalidTrace("non-finite sample"));
        }
        Ok(())
    }

    pub fn time_of(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Butterworth bandpass settings; defaults are 50–250 Hz, 4th order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandpassConfig {
    pub low: f64,
    pub high: f64,
    pub order: usize,
}

impl Default for BandpassConfig {
    fn default() -> Self {
        Self { low: 50.0, high: 250.0, order: 4 }
    }
}

/// Zero-phase Butterworth bandpass of a trace.
pub fn bandpass_filter(trace: &EmgTrace, config: &BandpassConfig) -> Result<EmgTrace, AnalysisError> {
    trace.validate()?;
    let filter = SosFilter::butterworth_bandpass(config.order, config.low, config.high, trace.sample_rate)?;
    Ok(EmgTrace { samples: filter.filtfilt(&trace.samples), ..trace.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConfig {
    /// RMS window length, seconds.
    pub window: f64,
    /// Envelope sample rate, Hz.
    pub output_rate: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { window: 0.5, output_rate: 50.0 }
    }
}

/// Sliding-window RMS evaluated on an `output_rate` grid and expressed in
/// %MVC.
///
/// Output sample `k` sits at `k / output_rate` and covers the input samples
/// within half a window on either side, truncated at the trace edges. The
/// returned trace has `mvc_reference = 100` since its values are already
/// %MVC.
pub fn rms_envelope(trace: &EmgTrace, config: &EnvelopeConfig) -> Result<EmgTrace, AnalysisError> {
    trace.validate()?;
    if !(config.window > 0.0 && config.window.is_finite()) {
        return Err(AnalysisError::InvalidParameter(format!("window {} s", config.window)));
    }
    if !(config.output_rate > 0.0 && config.output_rate <= trace.sample_rate) {
        return Err(AnalysisError::InvalidParameter(format!(
            "output rate {} Hz must lie in (0, {}]",
            config.output_rate, trace.sample_rate
        )));
    }
    if !(trace.mvc_reference > 0.0 && trace.mvc_reference.is_finite()) {
        return Err(AnalysisError::InvalidParameter("mvc_reference must be positive".into()));
    }

    let n = trace.samples.len();
    // prefix sums of squares make each window O(1)
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for s in &trace.samples {
        acc += s * s;
        prefix.push(acc);
    }

    // window bounds in sample units; the small slack keeps exact grid
    // points from rounding up a sample
    let half = config.window * trace.sample_rate / 2.0;
    let step = trace.sample_rate / config.output_rate;
    let outputs = (trace.duration() * config.output_rate).floor() as usize;
    let mut envelope = Vec::with_capacity(outputs.max(1));
    for k in 0..outputs.max(1) {
        let center = k as f64 * step;
        let lo = ((center - half - 1e-9).ceil().max(0.0) as usize).min(n);
        let hi = ((center + half - 1e-9).ceil().max(0.0) as usize).min(n);
        if hi <= lo {
            return Err(AnalysisError::EmptyWindow);
        }
        let mean_sq = ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).max(0.0);
        envelope.push(mean_sq.sqrt() / trace.mvc_reference * 100.0);
    }
    Ok(EmgTrace {
        sample_rate: config.output_rate,
        samples: envelope,
        mvc_reference: 100.0,
        muscle_label: trace.muscle_label.clone(),
    })
}

/// Fatigue index of an EMG trace: bandpass, RMS envelope, then slope.
pub fn emg_fatigue_index(
    trace: &EmgTrace,
    bandpass: &BandpassConfig,
    envelope: &EnvelopeConfig,
) -> Result<FatigueIndexReport, AnalysisError> {
    let filtered = bandpass_filter(trace, bandpass)?;
    let env = rms_envelope(&filtered, envelope)?;
    let mut report = fatigue_index(&env)?;
    report.window_seconds = envelope.window;
    Ok(report)
}

/// Linear trend of an envelope in %MVC per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatigueIndexReport {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Time span covered by the fitted envelope unless set by the caller.
    pub window_seconds: f64,
}
