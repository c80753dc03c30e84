//! Seeded Latin hypercube designs with maximin improvement.
//!
//! The improved-LHS scheme is realized as a plain Latin hypercube followed by
//! swap-based maximin local search: each sweep proposes swapping two entries
//! within one column (which preserves the Latin property) and keeps the swap
//! iff the minimum pairwise distance does not decrease.

use rand::Rng;

use crate::bbob::ProblemInstance;
use crate::error::{Error, Result};
use crate::seed;
use crate::table::{self, Csv};

/// Default number of maximin improvement sweeps.
pub const DEFAULT_SWEEPS: usize = 1000;

/// A design matrix with (optionally) evaluated objective values.
#[derive(Debug, Clone)]
pub struct SampleSet {
    /// Points in row-major order, `n` rows of `dim` coordinates.
    pub points: Vec<Vec<f64>>,
    /// Objective values aligned with `points`; empty until evaluated.
    pub values: Vec<f64>,
    pub bounds: (f64, f64),
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    /// Minimum pairwise Euclidean distance of the design.
    pub fn min_distance(&self) -> f64 {
        min_pairwise_distance(&self.points)
    }

    /// CSV with columns `x1..xD,y`; `y` empty when values are unset.
    pub fn to_csv(&self) -> String {
        let dim = self.dim();
        let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        header.push("y".to_string());
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut row: Vec<String> = p.iter().map(|v| table::fmt_f64(*v)).collect();
                row.push(if self.values.is_empty() {
                    String::new()
                } else {
                    table::fmt_f64(self.values[i])
                });
                row
            })
            .collect();
        table::write_csv(&header, &rows)
    }

    pub fn from_csv(text: &str, bounds: (f64, f64), seed: u64) -> Result<SampleSet> {
        let csv = Csv::parse(text)?;
        let dim = csv.header.len() - 1;
        if csv.header.last().map(String::as_str) != Some("y") {
            return Err(Error::parse("sample CSV must end with a y column"));
        }
        let mut points = Vec::with_capacity(csv.rows.len());
        let mut values = Vec::new();
        for row in &csv.rows {
            let p: Result<Vec<f64>> = row[..dim].iter().map(|f| table::parse_f64(f)).collect();
            points.push(p?);
            if let Some(v) = table::parse_f64_opt(&row[dim])? {
                values.push(v);
            }
        }
        if !values.is_empty() && values.len() != points.len() {
            return Err(Error::parse("partially evaluated sample CSV"));
        }
        Ok(SampleSet {
            points,
            values,
            bounds,
            seed,
        })
    }
}

/// Seeded Latin hypercube design; one point per 1/n stratum in every column.
pub fn lhs(n: usize, dim: usize, bounds: (f64, f64), seed_value: u64) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::invalid_argument(format!("n {n} must be >= 2")));
    }
    if dim < 1 {
        return Err(Error::invalid_argument("dim must be >= 1"));
    }
    let (lower, upper) = bounds;
    if !lower.is_finite() || !upper.is_finite() || lower >= upper {
        return Err(Error::invalid_argument(format!(
            "bounds ({lower}, {upper}) must satisfy lower < upper"
        )));
    }
    let mut rng = seed::rng(0x1b5, &[seed_value, n as u64, dim as u64]);
    let mut points = vec![vec![0.0; dim]; n];
    let width = (upper - lower) / n as f64;
    for j in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            let r = rng.random_range(0..=k);
            strata.swap(k, r);
        }
        for (i, point) in points.iter_mut().enumerate() {
            let u: f64 = rng.random_range(0.0..1.0);
            point[j] = lower + (strata[i] as f64 + u) * width;
        }
    }
    Ok(SampleSet {
        points,
        values: Vec::new(),
        bounds,
        seed: seed_value,
    })
}

/// Swap-based maximin improvement; the Latin property is preserved and the
/// minimum pairwise distance never decreases.
pub fn improve_maximin(design: &SampleSet, sweeps: usize, seed_value: u64) -> SampleSet {
    let n = design.len();
    let dim = design.dim();
    let mut out = design.clone();
    if n < 3 || dim == 0 || sweeps == 0 {
        return out;
    }
    let mut rng = seed::rng(0x3a7, &[seed_value, sweeps as u64]);

    // Squared-distance matrix, refreshed incrementally per accepted swap.
    let mut dist2 = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = sq_dist(&out.points[i], &out.points[j]);
            dist2[i * n + j] = d2;
            dist2[j * n + i] = d2;
        }
    }
    let global_min = |m: &[f64]| -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                if m[i * n + j] < best {
                    best = m[i * n + j];
                }
            }
        }
        best
    };
    let mut current_min = global_min(&dist2);

    for _ in 0..sweeps {
        let col = rng.random_range(0..dim);
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let old_a = out.points[a][col];
        let old_b = out.points[b][col];
        out.points[a][col] = old_b;
        out.points[b][col] = old_a;

        let mut touched = Vec::with_capacity(2 * n);
        for &r in &[a, b] {
            for other in 0..n {
                if other == r || (r == b && other == a) {
                    continue;
                }
                touched.push((r, other, sq_dist(&out.points[r], &out.points[other])));
            }
        }
        let old_values: Vec<f64> = touched.iter().map(|&(r, o, _)| dist2[r * n + o]).collect();
        for &(r, o, d2) in &touched {
            dist2[r * n + o] = d2;
            dist2[o * n + r] = d2;
        }
        let new_min = global_min(&dist2);
        if new_min >= current_min {
            current_min = new_min;
        } else {
            out.points[a][col] = old_a;
            out.points[b][col] = old_b;
            for (&(r, o, _), &old) in touched.iter().zip(&old_values) {
                dist2[r * n + o] = old;
                dist2[o * n + r] = old;
            }
        }
    }
    out
}

/// Build the maximin-improved design for a problem and evaluate every point.
pub fn sample_and_evaluate(
    problem: &ProblemInstance,
    multiplier: usize,
    seed_value: u64,
) -> Result<SampleSet> {
    sample_and_evaluate_with(problem, multiplier, DEFAULT_SWEEPS, seed_value)
}

pub fn sample_and_evaluate_with(
    problem: &ProblemInstance,
    multiplier: usize,
    sweeps: usize,
    seed_value: u64,
) -> Result<SampleSet> {
    if multiplier < 1 {
        return Err(Error::invalid_argument("multiplier must be >= 1"));
    }
    let n = multiplier * problem.dim;
    let design = lhs(n, problem.dim, crate::bbob::DOMAIN, seed_value)?;
    let mut design = improve_maximin(&design, sweeps, seed_value);
    design.values = design.points.iter().map(|p| problem.value(p)).collect();
    Ok(design)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Minimum pairwise Euclidean distance among a set of points.
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = sq_dist(&points[i], &points[j]);
            if d < best {
                best = d;
            }
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbob::make_problem;

    fn latin_property_holds(set: &SampleSet) -> bool {
        let n = set.len();
        let (lower, upper) = set.bounds;
        let width = (upper - lower) / n as f64;
        for j in 0..set.dim() {
            let mut strata: Vec<usize> = set
                .points
                .iter()
                .map(|p| {
                    let k = ((p[j] - lower) / width).floor() as isize;
                    k.clamp(0, n as isize - 1) as usize
                })
                .collect();
            strata.sort_unstable();
            if strata.iter().enumerate().any(|(i, &s)| i != s) {
                return false;
            }
        }
        true
    }

    #[test]
    fn lhs_shape_at_full_scale() {
        let set = lhs(250, 5, (-5.0, 5.0), 9).unwrap();
        assert_eq!(set.len(), 250);
        assert_eq!(set.dim(), 5);
    }

    #[test]
    fn lhs_columns_are_stratified() {
        let set = lhs(10, 2, (0.0, 1.0), 4).unwrap();
        assert!(latin_property_holds(&set));
    }

    #[test]
    fn lhs_is_deterministic() {
        let a = lhs(20, 3, (-5.0, 5.0), 123).unwrap();
        let b = lhs(20, 3, (-5.0, 5.0), 123).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn lhs_rejects_tiny_designs() {
        assert!(lhs(1, 2, (0.0, 1.0), 0).is_err());
        assert!(lhs(4, 2, (1.0, 1.0), 0).is_err());
    }

    #[test]
    fn maximin_zero_sweeps_is_identity() {
        let set = lhs(12, 2, (0.0, 1.0), 5).unwrap();
        let out = improve_maximin(&set, 0, 5);
        assert_eq!(out.points, set.points);
    }

    #[test]
    fn maximin_never_decreases_min_distance() {
        for seed in 0..5u64 {
            let set = lhs(15, 3, (-5.0, 5.0), seed).unwrap();
            let before = set.min_distance();
            let out = improve_maximin(&set, 200, seed);
            assert!(out.min_distance() >= before - 1e-12);
            assert!(latin_property_holds(&out));
        }
    }

    #[test]
    fn maximin_improves_a_clustered_design() {
        // Strata picked in the same order for both columns puts all points on
        // the diagonal, which a few swaps improve strictly.
        let n = 10;
        let points: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let c = (i as f64 + 0.5) / n as f64;
                vec![c, c]
            })
            .collect();
        let set = SampleSet {
            points,
            values: Vec::new(),
            bounds: (0.0, 1.0),
            seed: 0,
        };
        let before = set.min_distance();
        let out = improve_maximin(&set, 50, 3);
        assert!(
            out.min_distance() > before,
            "min distance did not strictly increase: {} vs {}",
            out.min_distance(),
            before
        );
    }

    #[test]
    fn sample_and_evaluate_matches_problem() {
        let problem = make_problem(1, 5, 5).unwrap();
        let set = sample_and_evaluate_with(&problem, 50, 20, 7).unwrap();
        assert_eq!(set.len(), 250);
        for (p, &v) in set.points.iter().zip(&set.values) {
            assert_eq!(v, problem.value(p));
        }
        // Sphere: the best sampled value sits at the point nearest x_opt.
        let argmin_value = set
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let argmin_dist = set
            .points
            .iter()
            .enumerate()
            .min_by(|a, b| {
                crate::linalg::euclidean(a.1, &problem.x_opt)
                    .total_cmp(&crate::linalg::euclidean(b.1, &problem.x_opt))
            })
            .unwrap()
            .0;
        assert_eq!(argmin_value, argmin_dist);
    }

    #[test]
    fn sample_and_evaluate_is_deterministic() {
        let problem = make_problem(3, 2, 2).unwrap();
        let a = sample_and_evaluate_with(&problem, 10, 50, 11).unwrap();
        let b = sample_and_evaluate_with(&problem, 10, 50, 11).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let problem = make_problem(2, 8, 3).unwrap();
        let set = sample_and_evaluate_with(&problem, 5, 10, 2).unwrap();
        let text = set.to_csv();
        let back = SampleSet::from_csv(&text, set.bounds, set.seed).unwrap();
        assert_eq!(back.points, set.points);
        assert_eq!(back.values, set.values);
    }
}
