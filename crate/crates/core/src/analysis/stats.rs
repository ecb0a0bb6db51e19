use super::{AnalysisError, EmgTrace, FatigueIndexReport};

/// Two-sided 95% standard normal quantile.
const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::InvalidParameter(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(AnalysisError::DegenerateInput("need at least two points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateInput("all abscissae equal"));
    }
    let slope = sxy / sxx;
    // a flat response is fit perfectly
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

/// Slope of an RMS envelope (%MVC) against time, in %MVC per second.
pub fn fatigue_index(envelope: &EmgTrace) -> Result<FatigueIndexReport, AnalysisError> {
    if envelope.samples.len() < 2 {
        return Err(AnalysisError::DegenerateInput("envelope needs at least two samples"));
    }
    if !(envelope.sample_rate > 0.0 && envelope.sample_rate.is_finite()) {
        return Err(AnalysisError::DegenerateInput("all timestamps equal"));
    }
    let t: Vec<f64> = (0..envelope.samples.len()).map(|i| envelope.time_of(i)).collect();
    let fit = linear_fit(&t, &envelope.samples)?;
    Ok(FatigueIndexReport {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        window_seconds: t[t.len() - 1] - t[0],
    })
}

/// Slope of subjective ratings (0–10) over time, per second.
pub fn borg_slope(ratings: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if ratings.len() < 2 {
        return Err(AnalysisError::DegenerateInput("need at least two ratings"));
    }
    if ratings.iter().any(|(t, r)| !t.is_finite() || !(0.0..=10.0).contains(r)) {
        return Err(AnalysisError::InvalidParameter("ratings must lie in [0, 10] at finite times".into()));
    }
    let (t, r): (Vec<f64>, Vec<f64>) = ratings.iter().copied().unzip();
    Ok(linear_fit(&t, &r)?.slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub rho: f64,
    pub n: usize,
    /// 95% Fisher-z interval; needs at least four pairs.
    pub ci95: Option<(f64, f64)>,
}

pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<Correlation, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::InvalidParameter(format!("length mismatch {} vs {}", a.len(), b.len())));
    }
    if a.len() < 3 {
        return Err(AnalysisError::DegenerateInput("need at least three pairs"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidParameter("non-finite value".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        saa += dx * dx;
        sbb += dy * dy;
        sab += dx * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(AnalysisError::DegenerateInput("zero variance"));
    }
    let rho = (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0);
    let ci95 = (a.len() > 3).then(|| {
        let z = rho.atanh();
        let half = Z_975 / (n - 3.0).sqrt();
        ((z - half).tanh(), (z + half).tanh())
    });
    Ok(Correlation { rho, n: a.len(), ci95 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_envelope_has_zero_slope() {
        let env = EmgTrace { sample_rate: 50.0, samples: vec![3.0; 100], mvc_reference: 100.0, muscle_label: String::new() };
        let r = fatigue_index(&env).unwrap();
        assert_eq!(r.slope, 0.0);
        assert_relative_eq!(r.intercept, 3.0);
    }

    #[test]
    fn planted_slope_recovered() {
        let samples: Vec<f64> = (0..15000).map(|i| 0.002 * (i as f64 / 50.0) + 5.0).collect();
        let env = EmgTrace { sample_rate: 50.0, samples, mvc_reference: 100.0, muscle_label: String::new() };
        let r = fatigue_index(&env).unwrap();
        assert_relative_eq!(r.slope, 0.002, max_relative = 1e-9);
        assert_relative_eq!(r.intercept, 5.0, max_relative = 1e-9);
        assert!(r.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn short_envelope_rejected() {
        let env = EmgTrace { sample_rate: 50.0, samples: vec![1.0], mvc_reference: 100.0, muscle_label: String::new() };
        assert!(matches!(fatigue_index(&env), Err(AnalysisError::DegenerateInput(_))));
    }

    #[test]
    fn borg_examples() {
        assert_eq!(borg_slope(&[(0.0, 3.0), (60.0, 3.0), (120.0, 3.0)]).unwrap(), 0.0);
        let ramp: Vec<(f64, f64)> = (0..=10).map(|i| (60.0 * i as f64, i as f64)).collect();
        assert_relative_eq!(borg_slope(&ramp).unwrap(), 1.0 / 60.0, max_relative = 1e-12);
        assert!(borg_slope(&[(0.0, 2.0)]).is_err());
        assert!(borg_slope(&[(0.0, 2.0), (0.0, 3.0)]).is_err());
        assert!(borg_slope(&[(0.0, 2.0), (1.0, 11.0)]).is_err());
    }

    #[test]
    fn perfect_correlations() {
        let a = [1.0, 2.0, 4.0, 7.0, 11.0];
        let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
        assert_relative_eq!(pearson_correlation(&a, &b).unwrap().rho, 1.0, max_relative = 1e-15);
        let c: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_relative_eq!(pearson_correlation(&a, &c).unwrap().rho, -1.0, max_relative = 1e-15);
    }

    #[test]
    fn correlation_errors() {
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        let three = pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_eq!(three.ci95, None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (4usize..40).prop_flat_map(|n| {
                (proptest::collection::vec(-100.0f64..100.0, n), proptest::collection::vec(-100.0f64..100.0, n))
            })
        }

        proptest! {
            #[test]
            fn pearson_affine_invariance((a, b) in series(), scale in 0.1f64..10.0, shift in -50.0f64..50.0) {
                let Ok(base) = pearson_correlation(&a, &b) else { return Ok(()) };
                let a2: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
                let moved = pearson_correlation(&a2, &b).unwrap();
                prop_assert!((moved.rho - base.rho).abs() < 1e-12);
                let neg: Vec<f64> = b.iter().map(|y| -scale * y).collect();
                let flipped = pearson_correlation(&a, &neg).unwrap();
                prop_assert!((flipped.rho + base.rho).abs() < 1e-12);
            }

            #[test]
            fn slope_invariant_under_offset(
                ys in proptest::collection::vec(-10.0f64..10.0, 2..200), offset in -100.0f64..100.0,
            ) {
                let env = EmgTrace { sample_rate: 50.0, samples: ys.clone(), mvc_reference: 100.0, muscle_label: String::new() };
                let shifted = EmgTrace { samples: ys.iter().map(|y| y + offset).collect(), ..env.clone() };
                let a = fatigue_index(&env).unwrap().slope;
                let b = fatigue_index(&shifted).unwrap().slope;
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
