//! Information-content features.
//!
//! A greedy nearest-neighbor tour (seeded start) turns the sample into a
//! sequence; slopes along the tour are quantized into symbols {-1, 0, 1} at
//! a threshold eps, and the entropy of adjacent symbol pairs is scanned over
//! a logarithmic eps grid.

use rand::Rng;

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::euclidean;
use crate::seed;

const GRID_POINTS: usize = 1000;
const GRID_LOG_MIN: f64 = -5.0;
const GRID_LOG_MAX: f64 = 15.0;
/// Settling threshold for eps_s, relative to the maximum entropy.
const SETTLE: f64 = 0.05;

/// Greedy nearest-neighbor tour over the sample, starting at a seeded index.
/// Distance ties go to the lowest index.
pub fn tour(points: &[Vec<f64>], seed_value: u64) -> Vec<usize> {
    let n = points.len();
    let mut rng = seed::rng(0x70u64, &[seed_value]);
    let start = rng.random_range(0..n);
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    visited[current] = true;
    order.push(current);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for (j, was) in visited.iter().enumerate() {
            if *was {
                continue;
            }
            let d = euclidean(&points[current], &points[j]);
            if d < best_dist {
                best_dist = d;
                best = j;
            }
        }
        visited[best] = true;
        order.push(best);
        current = best;
    }
    order
}

/// Slope symbols at threshold eps: 1 uphill, -1 downhill, 0 flat.
fn symbols(ratios: &[f64], eps: f64) -> Vec<i8> {
    ratios
        .iter()
        .map(|&r| {
            if r > eps {
                1
            } else if r < -eps {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Entropy over the six ordered pairs of differing adjacent symbols,
/// log base 6, so H is always in [0, 1].
fn pair_entropy(symbols: &[i8]) -> f64 {
    if symbols.len() < 2 {
        return 0.0;
    }
    let mut counts = [0usize; 9];
    for w in symbols.windows(2) {
        let idx = (w[0] + 1) as usize * 3 + (w[1] + 1) as usize;
        counts[idx] += 1;
    }
    let total = (symbols.len() - 1) as f64;
    let mut h = 0.0;
    for (idx, &c) in counts.iter().enumerate() {
        let a = idx / 3;
        let b = idx % 3;
        if a == b || c == 0 {
            continue;
        }
        let p = c as f64 / total;
        h -= p * p.log(6.0);
    }
    h
}

/// Partial information: length of the symbol sequence with zeros removed and
/// consecutive repeats collapsed, relative to the full length.
fn partial_information(symbols: &[i8]) -> f64 {
    let mut len = 0usize;
    let mut last = 0i8;
    for &s in symbols {
        if s != 0 && s != last {
            len += 1;
            last = s;
        }
    }
    len as f64 / symbols.len() as f64
}

pub fn ic(points: &[Vec<f64>], values: &[f64], seed_value: u64) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n < 10 {
        return Err(Error::invalid_argument(format!(
            "ic needs >= 10 points, got {n}"
        )));
    }
    if n != values.len() {
        return Err(Error::invalid_argument("points/values length mismatch"));
    }

    let order = tour(points, seed_value);
    let mut ratios = Vec::with_capacity(n - 1);
    for w in order.windows(2) {
        let dist = euclidean(&points[w[0]], &points[w[1]]);
        if dist <= 0.0 {
            continue; // zero-length step
        }
        ratios.push((values[w[1]] - values[w[0]]) / dist);
    }
    let names = ["ic.h.max", "ic.eps.s", "ic.eps.max", "ic.eps.ratio", "ic.m0"];
    if ratios.len() < 2 {
        return Ok(names.into_iter().map(|n| (n, None)).collect());
    }

    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|j| {
            10f64.powf(
                GRID_LOG_MIN
                    + (GRID_LOG_MAX - GRID_LOG_MIN) * j as f64 / (GRID_POINTS - 1) as f64,
            )
        })
        .collect();

    let m0 = partial_information(&symbols(&ratios, 0.0));
    let h_at = |eps: f64| pair_entropy(&symbols(&ratios, eps));

    let mut h_max = h_at(0.0);
    let mut eps_max = 0.0;
    for &eps in &grid {
        let h = h_at(eps);
        if h > h_max {
            h_max = h;
            eps_max = eps;
        }
    }

    let (eps_s, eps_max_value, eps_ratio) = if h_max > 0.0 {
        let mut eps_s = None;
        if h_at(0.0) < SETTLE * h_max {
            eps_s = Some(0.0);
        } else {
            for &eps in &grid {
                if h_at(eps) < SETTLE * h_max {
                    eps_s = Some(eps);
                    break;
                }
            }
        }
        let eps_ratio = if m0 > 0.0 {
            grid.iter()
                .rev()
                .find(|&&eps| partial_information(&symbols(&ratios, eps)) > 0.5 * m0)
                .map(|eps| eps.log10())
        } else {
            None
        };
        (eps_s, Some(eps_max), eps_ratio)
    } else {
        (None, None, None)
    };

    Ok(vec![
        ("ic.h.max", Some(h_max)),
        ("ic.eps.s", eps_s),
        ("ic.eps.max", eps_max_value),
        ("ic.eps.ratio", eps_ratio),
        ("ic.m0", Some(m0)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(out: &[FeatureValue], name: &str) -> Option<f64> {
        out.iter().find(|(n, _)| *n == name).unwrap().1
    }

    fn line_points(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64]).collect()
    }

    /// First seed whose tour starts at an index satisfying `pred`.
    fn seed_with_start(points: &[Vec<f64>], pred: impl Fn(usize) -> bool) -> u64 {
        (0..200u64)
            .find(|&s| pred(tour(points, s)[0]))
            .expect("no suitable tour start found")
    }

    #[test]
    fn constant_values_give_zero_entropy_and_information() {
        let points = line_points(12);
        let values = vec![3.0; 12];
        let out = ic(&points, &values, 1).unwrap();
        assert_eq!(get(&out, "ic.h.max"), Some(0.0));
        assert_eq!(get(&out, "ic.m0"), Some(0.0));
    }

    #[test]
    fn monotone_tour_has_zero_pair_entropy() {
        let points = line_points(12);
        let values: Vec<f64> = (0..12).map(|i| i as f64).collect();
        // A tour starting at the left end walks the line monotonically, so
        // all symbols are +1 and no differing adjacent pair exists.
        let seed = seed_with_start(&points, |s| s == 0);
        let out = ic(&points, &values, seed).unwrap();
        assert_eq!(get(&out, "ic.h.max"), Some(0.0));
    }

    #[test]
    fn alternating_slopes_reach_log6_two() {
        let points = line_points(12);
        let values: Vec<f64> = (0..12).map(|i| (i % 2) as f64).collect();
        // A tour from the left end walks the line with unit steps, so every
        // slope has magnitude 1 and alternates sign: the adjacent pairs are
        // (1,-1) and (-1,1) with probability 1/2 each at every eps below 1.
        let seed = seed_with_start(&points, |s| s == 0);
        let out = ic(&points, &values, seed).unwrap();
        let expected = 2f64.log(6.0);
        assert!((get(&out, "ic.h.max").unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_bounded_by_one() {
        use rand::Rng;
        let mut rng = crate::seed::rng(77, &[]);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
            .collect();
        let values: Vec<f64> = (0..40).map(|_| rng.random_range(-10.0..10.0)).collect();
        for seed in 0..10 {
            let out = ic(&points, &values, seed).unwrap();
            let h = get(&out, "ic.h.max").unwrap();
            assert!((0.0..=1.0).contains(&h), "h_max = {h}");
        }
    }

    #[test]
    fn too_few_points_is_an_error() {
        let points = line_points(5);
        let values = vec![0.0; 5];
        assert!(ic(&points, &values, 0).is_err());
    }
}
