//! Dispersion features: spread of the best-quantile points vs. the full
//! sample. Value ties are broken by sample index so the best-q subset is
//! deterministic.

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{euclidean, mean, median};

pub const QUANTILES: [f64; 4] = [0.02, 0.05, 0.10, 0.25];

/// Dispersion features at the standard quantiles.
pub fn disp(points: &[Vec<f64>], values: &[f64]) -> Result<Vec<FeatureValue>> {
    let stats = disp_stats(points, values, &QUANTILES)?;
    let names: [&'static str; 16] = [
        "disp.ratio_mean_02",
        "disp.ratio_mean_05",
        "disp.ratio_mean_10",
        "disp.ratio_mean_25",
        "disp.ratio_median_02",
        "disp.ratio_median_05",
        "disp.ratio_median_10",
        "disp.ratio_median_25",
        "disp.diff_mean_02",
        "disp.diff_mean_05",
        "disp.diff_mean_10",
        "disp.diff_mean_25",
        "disp.diff_median_02",
        "disp.diff_median_05",
        "disp.diff_median_10",
        "disp.diff_median_25",
    ];
    Ok(names.into_iter().zip(stats).collect())
}

/// Raw dispersion statistics at arbitrary quantiles, laid out as
/// `[ratio_mean..., ratio_median..., diff_mean..., diff_median...]`.
pub fn disp_stats(
    points: &[Vec<f64>],
    values: &[f64],
    quantiles: &[f64],
) -> Result<Vec<Option<f64>>> {
    let n = points.len();
    if n != values.len() || n < 2 {
        return Err(Error::invalid_argument("disp needs >= 2 aligned points"));
    }
    for &q in quantiles {
        if (q * n as f64).ceil() < 2.0 {
            return Err(Error::invalid_argument(format!(
                "disp quantile {q} selects fewer than 2 of {n} points"
            )));
        }
    }

    // Order by (value, index); the prefix of this order is the best-q subset.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let all = pairwise_distances(points, &(0..n).collect::<Vec<_>>());
    let all_mean = mean(&all);
    let all_median = median(&all);

    let mut ratio_mean = Vec::new();
    let mut ratio_median = Vec::new();
    let mut diff_mean = Vec::new();
    let mut diff_median = Vec::new();
    for &q in quantiles {
        let k = ((q * n as f64).ceil() as usize).min(n);
        let subset: Vec<usize> = order[..k].to_vec();
        let sub = pairwise_distances(points, &subset);
        let sub_mean = mean(&sub);
        let sub_median = median(&sub);
        ratio_mean.push((all_mean > 0.0).then(|| sub_mean / all_mean));
        ratio_median.push((all_median > 0.0).then(|| sub_median / all_median));
        diff_mean.push(Some(sub_mean - all_mean));
        diff_median.push(Some(sub_median - all_median));
    }
    let mut out = ratio_mean;
    out.extend(ratio_median);
    out.extend(diff_mean);
    out.extend(diff_median);
    Ok(out)
}

fn pairwise_distances(points: &[Vec<f64>], subset: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(subset.len() * (subset.len() - 1) / 2);
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            out.push(euclidean(&points[i], &points[j]));
        }
    }
    out
}
