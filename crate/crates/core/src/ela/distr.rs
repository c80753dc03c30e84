//! Objective-value distribution features: skewness, kurtosis, peak count.

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::sample_sd;

/// Moment-based skewness, excess kurtosis and a kernel-density peak count.
pub fn ela_distr(values: &[f64]) -> Result<Vec<FeatureValue>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::invalid_argument(format!(
            "ela_distr needs >= 4 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;

    let constant = values.iter().all(|&v| v == values[0]);
    let (skewness, kurtosis) = if constant || m2 <= 0.0 {
        (None, None)
    } else {
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    };

    Ok(vec![
        ("ela_distr.skewness", skewness),
        ("ela_distr.kurtosis", kurtosis),
        ("ela_distr.number_of_peaks", Some(number_of_peaks(values))),
    ])
}

/// Count modes of a Gaussian KDE: strict local maxima on a 512-point grid
/// exceeding 0.1 of the global density maximum. Bandwidth is Silverman's rule.
fn number_of_peaks(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let sd = sample_sd(values);
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    let bandwidth = 0.9 * spread * n.powf(-0.2);
    if bandwidth <= 0.0 {
        return 1.0;
    }

    const GRID: usize = 512;
    let lo = sorted[0] - 3.0 * bandwidth;
    let hi = sorted[sorted.len() - 1] + 3.0 * bandwidth;
    let step = (hi - lo) / (GRID - 1) as f64;
    let mut density = [0.0f64; GRID];
    for (k, d) in density.iter_mut().enumerate() {
        let x = lo + k as f64 * step;
        let mut acc = 0.0;
        for &v in values {
            let z = (x - v) / bandwidth;
            acc += (-0.5 * z * z).exp();
        }
        *d = acc;
    }
    let max = density.iter().cloned().fold(0.0f64, f64::max);
    let threshold = 0.1 * max;
    let mut peaks = 0usize;
    for k in 1..GRID - 1 {
        if density[k] > density[k - 1] && density[k] > density[k + 1] && density[k] > threshold {
            peaks += 1;
        }
    }
    peaks.max(1) as f64
}

/// Type-7 quantile of an already sorted slice.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
