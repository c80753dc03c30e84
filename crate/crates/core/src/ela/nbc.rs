//! Nearest-better-clustering features.
//!
//! For every point the nearest neighbor and the nearest strictly-better
//! neighbor are found; points without a better neighbor (the sample best)
//! get the maximum pairwise distance so the statistic stays finite.

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{euclidean, mean, pearson, sample_sd};

pub fn nbc(points: &[Vec<f64>], values: &[f64]) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n < 3 || n != values.len() {
        return Err(Error::invalid_argument("nbc needs >= 3 aligned points"));
    }
    let missing = |name| (name, None);
    let names = [
        "nbc.nn_nb.sd_ratio",
        "nbc.nn_nb.mean_ratio",
        "nbc.nn_nb.cor",
        "nbc.dist_ratio.coeff_var",
        "nbc.nb_fitness.cor",
    ];
    if values.iter().all(|&v| v == values[0]) {
        return Ok(names.into_iter().map(missing).collect());
    }

    let mut max_dist = 0.0f64;
    let mut nn = vec![f64::INFINITY; n];
    let mut nb = vec![f64::INFINITY; n];
    let mut nb_target = vec![None::<usize>; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = euclidean(&points[i], &points[j]);
            if d > max_dist {
                max_dist = d;
            }
            if d < nn[i] {
                nn[i] = d;
            }
            if values[j] < values[i] && d < nb[i] {
                nb[i] = d;
                nb_target[i] = Some(j);
            }
        }
    }
    for i in 0..n {
        if nb_target[i].is_none() {
            nb[i] = max_dist;
        }
    }

    let mut indegree = vec![0.0f64; n];
    for target in nb_target.iter().flatten() {
        indegree[*target] += 1.0;
    }

    let sd_nn = sample_sd(&nn);
    let sd_nb = sample_sd(&nb);
    let mean_nn = mean(&nn);
    let mean_nb = mean(&nb);
    let ratios: Vec<f64> = nn
        .iter()
        .zip(&nb)
        .map(|(a, b)| if *b > 0.0 { a / b } else { f64::NAN })
        .collect();
    let ratios_ok = ratios.iter().all(|r| r.is_finite());
    let mean_ratio = if ratios_ok { Some(mean(&ratios)) } else { None };
    let coeff_var = match mean_ratio {
        Some(m) if m > 0.0 => Some(sample_sd(&ratios) / m),
        _ => None,
    };

    Ok(vec![
        (names[0], (sd_nb > 0.0).then(|| sd_nn / sd_nb)),
        (names[1], (mean_nb > 0.0).then(|| mean_nn / mean_nb)),
        (names[2], pearson(&nn, &nb)),
        (names[3], coeff_var),
        (names[4], pearson(values, &indegree)),
    ])
}
