//! Meta-model features: linear and quadratic least-squares fits.

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};

struct Fit {
    adj_r2: Option<f64>,
    coefficients: Option<Vec<f64>>,
}

/// Fit `y ~ design` and report adjusted R^2 plus the slope coefficients
/// (intercept first). Rank-deficient designs yield missing features.
fn fit(design: Vec<Vec<f64>>, values: &[f64]) -> Fit {
    let n = design.len();
    let p = design[0].len() - 1; // predictors excluding the intercept column
    if n <= p + 1 {
        return Fit {
            adj_r2: None,
            coefficients: None,
        };
    }
    let x = Matrix::from_rows(&design);
    let beta = match least_squares(&x, values) {
        Ok(b) => b,
        Err(_) => {
            return Fit {
                adj_r2: None,
                coefficients: None,
            }
        }
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (row, &y) in design.iter().zip(values) {
        let pred: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean) * (y - mean);
    }
    let adj_r2 = if ss_tot <= 0.0 {
        None
    } else {
        let r2 = 1.0 - ss_res / ss_tot;
        Some(1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - p as f64 - 1.0))
    };
    Fit {
        adj_r2,
        coefficients: Some(beta),
    }
}

/// Linear/quadratic model features over the sampled points.
pub fn ela_meta(points: &[Vec<f64>], values: &[f64]) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n == 0 || n != values.len() {
        return Err(Error::invalid_argument("ela_meta needs aligned points and values"));
    }
    let dim = points[0].len();

    let lin: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(1 + dim);
            row.push(1.0);
            row.extend_from_slice(p);
            row
        })
        .collect();
    let lin_interact: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(1 + dim + dim * (dim - 1) / 2);
            row.push(1.0);
            row.extend_from_slice(p);
            for i in 0..dim {
                for j in (i + 1)..dim {
                    row.push(p[i] * p[j]);
                }
            }
            row
        })
        .collect();
    let quad: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(1 + 2 * dim);
            row.push(1.0);
            row.extend_from_slice(p);
            row.extend(p.iter().map(|v| v * v));
            row
        })
        .collect();
    let quad_interact: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut row = Vec::with_capacity(1 + 2 * dim + dim * (dim - 1) / 2);
            row.push(1.0);
            row.extend_from_slice(p);
            row.extend(p.iter().map(|v| v * v));
            for i in 0..dim {
                for j in (i + 1)..dim {
                    row.push(p[i] * p[j]);
                }
            }
            row
        })
        .collect();

    let lin_fit = fit(lin, values);
    let lin_interact_fit = fit(lin_interact, values);
    let quad_fit = fit(quad, values);
    let quad_interact_fit = fit(quad_interact, values);

    let (intercept, coef_min, coef_max, coef_ratio) = match &lin_fit.coefficients {
        Some(beta) => {
            let slopes: Vec<f64> = beta[1..=dim].iter().map(|c| c.abs()).collect();
            let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = slopes.iter().cloned().fold(0.0f64, f64::max);
            let ratio = if min > 0.0 { Some(max / min) } else { None };
            (Some(beta[0]), Some(min), Some(max), ratio)
        }
        None => (None, None, None, None),
    };

    let quad_cond = match &quad_fit.coefficients {
        Some(beta) => {
            let quads: Vec<f64> = beta[1 + dim..1 + 2 * dim].iter().map(|c| c.abs()).collect();
            let min = quads.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = quads.iter().cloned().fold(0.0f64, f64::max);
            if min > 0.0 {
                Some(max / min)
            } else {
                None
            }
        }
        None => None,
    };

    Ok(vec![
        ("ela_meta.lin_simple.adj_r2", lin_fit.adj_r2),
        ("ela_meta.lin_simple.intercept", intercept),
        ("ela_meta.lin_simple.coef.min", coef_min),
        ("ela_meta.lin_simple.coef.max", coef_max),
        ("ela_meta.lin_simple.coef.max_by_min", coef_ratio),
        ("ela_meta.lin_w_interact.adj_r2", lin_interact_fit.adj_r2),
        ("ela_meta.quad_simple.adj_r2", quad_fit.adj_r2),
        ("ela_meta.quad_simple.cond", quad_cond),
        ("ela_meta.quad_w_interact.adj_r2", quad_interact_fit.adj_r2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(out: &[FeatureValue], name: &str) -> Option<f64> {
        out.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn exact_line_in_one_dimension() {
        let points: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let values: Vec<f64> = points.iter().map(|p| 2.0 * p[0] + 1.0).collect();
        let out = ela_meta(&points, &values).unwrap();
        assert!((get(&out, "ela_meta.lin_simple.intercept").unwrap() - 1.0).abs() < 1e-9);
        assert!((get(&out, "ela_meta.lin_simple.coef.max").unwrap() - 2.0).abs() < 1e-9);
        assert!((get(&out, "ela_meta.lin_simple.adj_r2").unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn isotropic_quadratic_has_unit_cond() {
        let mut points = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                points.push(vec![i as f64 * 0.7, j as f64 * 0.7]);
            }
        }
        let values: Vec<f64> = points.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        let out = ela_meta(&points, &values).unwrap();
        assert!((get(&out, "ela_meta.quad_simple.adj_r2").unwrap() - 1.0).abs() < 1e-8);
        assert!((get(&out, "ela_meta.quad_simple.cond").unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn slope_ratio_of_a_plane() {
        let mut points = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                points.push(vec![i as f64, j as f64]);
            }
        }
        let values: Vec<f64> = points.iter().map(|p| 3.0 * p[0] + p[1]).collect();
        let out = ela_meta(&points, &values).unwrap();
        assert!((get(&out, "ela_meta.lin_simple.coef.max_by_min").unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_objective_flags_r2_missing() {
        let points: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let values = vec![1.0; 10];
        let out = ela_meta(&points, &values).unwrap();
        assert_eq!(get(&out, "ela_meta.lin_simple.adj_r2"), None);
    }

    #[test]
    fn rank_deficient_design_flags_missing() {
        // A single repeated point cannot identify any slope.
        let points: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0, 1.0]).collect();
        let values: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let out = ela_meta(&points, &values).unwrap();
        assert_eq!(get(&out, "ela_meta.lin_simple.adj_r2"), None);
        assert_eq!(get(&out, "ela_meta.quad_simple.cond"), None);
    }

    #[test]
    fn adjusted_r2_never_exceeds_one() {
        use rand::Rng;
        let mut rng = crate::seed::rng(55, &[]);
        for _ in 0..10 {
            let points: Vec<Vec<f64>> = (0..40)
                .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect();
            let values: Vec<f64> = (0..40).map(|_| rng.random_range(-10.0..10.0)).collect();
            for (name, v) in ela_meta(&points, &values).unwrap() {
                if name.ends_with("adj_r2") {
                    assert!(v.unwrap() <= 1.0 + 1e-12, "{name} above 1");
                }
            }
        }
    }
}
