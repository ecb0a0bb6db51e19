//! Digital Butterworth bandpass design and zero-phase filtering.
//!
//! Design follows the usual analog-prototype route: Butterworth lowpass
//! poles, lowpass-to-bandpass transform at prewarped edges, bilinear
//! transform, then grouping into second-order sections.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::AnalysisError;

/// Direct-form II transposed biquad with `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + z_inv * self.a[1] + z2 * self.a[2];
        num / den
    }

    /// Internal state after an infinitely long constant unit input.
    fn steady_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let rhs0 = b1 - a1 * b0;
        let rhs1 = b2 - a2 * b0;
        let z0 = (rhs0 + rhs1) / (1.0 + a1 + a2);
        [z0, rhs1 - a2 * z0]
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn run(&self, state: &mut [f64; 2], x: f64) -> f64 {
        let y = self.b[0] * x + state[0];
        state[0] = self.b[1] * x - self.a[1] * y + state[1];
        state[1] = self.b[2] * x - self.a[2] * y;
        y
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    /// `order`-th order Butterworth bandpass between `low` and `high` Hz.
    /// The resulting filter has `2 * order` poles.
    pub fn butterworth_bandpass(order: usize, low: f64, high: f64, sample_rate: f64) -> Result<Self, AnalysisError> {
        if order == 0 {
            return Err(AnalysisError::InvalidParameter("filter order must be >= 1".into()));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(AnalysisError::InvalidParameter(format!("sample rate {sample_rate}")));
        }
        let nyquist = sample_rate / 2.0;
        if !(high < nyquist) {
            return Err(AnalysisError::NyquistViolation { high, nyquist });
        }
        if !(low > 0.0 && low < high) {
            return Err(AnalysisError::InvalidParameter(format!(
                "band edges must satisfy 0 < low < high, got {low}..{high}"
            )));
        }

        // bilinear transform with T = 1/2, so s = 4 (z - 1) / (z + 1)
        let k = 4.0;
        let w_low = k * (PI * low / sample_rate).tan();
        let w_high = k * (PI * high / sample_rate).tan();
        let bandwidth = w_high - w_low;
        let center_sq = w_low * w_high;

        let n = order as i64;
        let mut analog = Vec::with_capacity(2 * order);
        for m in (-n + 1..n).step_by(2) {
            let proto = -Complex64::from_polar(1.0, PI * m as f64 / (2 * n) as f64);
            let p = proto * (bandwidth / 2.0);
            let root = (p * p - center_sq).sqrt();
            analog.push(p + root);
            analog.push(p - root);
        }
        let poles: Vec<Complex64> = analog.iter().map(|s| (k + s) / (k - s)).collect();

        // Analog gain bw^n with n zeros at s = 0; each maps to z = 1 and
        // the n excess poles add zeros at z = -1.
        let mut gain = Complex64::new((bandwidth * k).powi(order as i32), 0.0);
        for s in &analog {
            gain /= k - s;
        }

        let sections = pair_poles(&poles)
            .into_iter()
            .enumerate()
            .map(|(i, (a1, a2))| {
                let g = if i == 0 { gain.re } else { 1.0 };
                Biquad { b: [g, 0.0, -g], a: [1.0, a1, a2] }
            })
            .collect();
        Ok(Self { sections })
    }

    /// Complex response at `freq` Hz.
    pub fn frequency_response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / sample_rate);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    /// Causal single pass with the given initial section states.
    fn run(&self, signal: &mut [f64], mut states: Vec<[f64; 2]>) {
        for x in signal.iter_mut() {
            let mut v = *x;
            for (sec, st) in self.sections.iter().zip(states.iter_mut()) {
                v = sec.run(st, v);
            }
            *x = v;
        }
    }

    /// Causal filtering from rest.
    pub fn filter(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        self.run(&mut out, vec![[0.0; 2]; self.sections.len()]);
        out
    }

    /// Per-section steady states for a unit step, scaled by upstream DC gain.
    fn step_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let [z0, z1] = s.steady_state();
                let st = [z0 * scale, z1 * scale];
                scale *= s.dc_gain();
                st
            })
            .collect()
    }

    /// Forward-backward (zero-phase) filtering with odd reflection padding
    /// and steady-state initial conditions at both ends. Output length
    /// equals input length.
    pub fn filtfilt(&self, signal: &[f64]) -> Vec<f64> {
        let n = signal.len();
        if n == 0 {
            return Vec::new();
        }
        // three times the effective number of taps; zeros in every section
        // are nonzero so no taps are trimmed
        let pad = (3 * (2 * self.sections.len() + 1)).min(n - 1);

        let first = signal[0];
        let last = signal[n - 1];
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
        ext.extend_from_slice(signal);
        ext.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

        let unit = self.step_states();
        let scaled = |x0: f64| unit.iter().map(|[a, b]| [a * x0, b * x0]).collect::<Vec<_>>();

        let x0 = ext[0];
        self.run(&mut ext, scaled(x0));
        ext.reverse();
        let y0 = ext[0];
        self.run(&mut ext, scaled(y0));
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Group z-plane poles into `(a1, a2)` denominators: conjugate pairs
/// first, then remaining real poles two at a time.
fn pair_poles(poles: &[Complex64]) -> Vec<(f64, f64)> {
    const IMAG_EPS: f64 = 1e-12;
    let mut out = Vec::new();
    let mut reals = Vec::new();
    for p in poles {
        if p.im > IMAG_EPS {
            out.push((-2.0 * p.re, p.norm_sqr()));
        } else if p.im.abs() <= IMAG_EPS {
            reals.push(p.re);
        }
    }
    reals.sort_by(|a, b| a.total_cmp(b));
    for pair in reals.chunks(2) {
        match pair {
            [r1, r2] => out.push((-(r1 + r2), r1 * r2)),
            [r] => out.push((-r, 0.0)),
            _ => unreachable!(),
        }
    }
    out
}
