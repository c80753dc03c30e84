//! Evaluator-backed features: convexity probing and finite-difference
//! curvature. Both consume objective evaluations beyond the initial design,
//! which is why the catalog flags them.

use rand::Rng;

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd, symmetric_eigenvalues, Matrix};
use crate::seed;

pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_SUBSET: usize = 100;
pub const DEFAULT_STEP: f64 = 1e-3;
const LINEARITY_TOL: f64 = 1e-10;

/// Convexity features: evaluate the midpoint of random sample pairs and
/// compare against the average of the endpoint values.
pub fn ela_conv<F: Fn(&[f64]) -> f64>(
    f: F,
    points: &[Vec<f64>],
    values: &[f64],
    n_pairs: usize,
    seed_value: u64,
) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n < 2 || n != values.len() {
        return Err(Error::invalid_argument("ela_conv needs >= 2 aligned points"));
    }
    let mut rng = seed::rng(0xC04u64, &[seed_value]);
    let mut convex = 0usize;
    let mut linear = 0usize;
    let mut dev_sum = 0.0;
    for _ in 0..n_pairs {
        let i = rng.random_range(0..n);
        let j = loop {
            let j = rng.random_range(0..n);
            if j != i {
                break j;
            }
        };
        let mid: Vec<f64> = points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let delta = f(&mid) - 0.5 * (values[i] + values[j]);
        if delta < -LINEARITY_TOL {
            convex += 1;
        }
        if delta.abs() <= LINEARITY_TOL {
            linear += 1;
        }
        dev_sum += delta;
    }
    let np = n_pairs as f64;
    Ok(vec![
        ("ela_conv.conv_prob", Some(convex as f64 / np)),
        ("ela_conv.lin_prob", Some(linear as f64 / np)),
        ("ela_conv.lin_dev.orig", Some(dev_sum / np)),
    ])
}

/// Curvature features from central finite differences at a seeded subset of
/// the sample points. Per point: gradient norm, gradient scale
/// (max/min absolute partial) and Hessian condition (max/min absolute
/// eigenvalue); points where a denominator vanishes drop out of the affected
/// aggregation.
pub fn ela_curv<F: Fn(&[f64]) -> f64>(
    f: F,
    points: &[Vec<f64>],
    subset_size: usize,
    step: f64,
    seed_value: u64,
) -> Result<Vec<FeatureValue>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid_argument("ela_curv needs points"));
    }
    if step <= 0.0 {
        return Err(Error::invalid_argument("ela_curv step must be positive"));
    }
    let dim = points[0].len();

    let subset: Vec<usize> = if subset_size >= n {
        (0..n).collect()
    } else {
        let mut rng = seed::rng(0xC06u64, &[seed_value]);
        let mut indices: Vec<usize> = (0..n).collect();
        for k in (1..n).rev() {
            let j = rng.random_range(0..=k);
            indices.swap(k, j);
        }
        let mut chosen = indices[..subset_size].to_vec();
        chosen.sort_unstable();
        chosen
    };

    let mut grad_norms = Vec::with_capacity(subset.len());
    let mut grad_scales = Vec::new();
    let mut hessian_conds = Vec::new();
    for &idx in &subset {
        let x = &points[idx];
        let f0 = f(x);
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        let mut grad = vec![0.0; dim];
        for i in 0..dim {
            let mut xp = x.clone();
            xp[i] += step;
            let mut xm = x.clone();
            xm[i] -= step;
            plus[i] = f(&xp);
            minus[i] = f(&xm);
            grad[i] = (plus[i] - minus[i]) / (2.0 * step);
        }
        grad_norms.push(grad.iter().map(|g| g * g).sum::<f64>().sqrt());

        let abs_min = grad.iter().map(|g| g.abs()).fold(f64::INFINITY, f64::min);
        let abs_max = grad.iter().map(|g| g.abs()).fold(0.0f64, f64::max);
        if abs_min > 0.0 {
            grad_scales.push(abs_max / abs_min);
        }

        let mut hess = Matrix::zeros(dim, dim);
        for i in 0..dim {
            hess.set(i, i, (plus[i] - 2.0 * f0 + minus[i]) / (step * step));
            for j in (i + 1)..dim {
                let mut xpp = x.clone();
                xpp[i] += step;
                xpp[j] += step;
                let mut xpm = x.clone();
                xpm[i] += step;
                xpm[j] -= step;
                let mut xmp = x.clone();
                xmp[i] -= step;
                xmp[j] += step;
                let mut xmm = x.clone();
                xmm[i] -= step;
                xmm[j] -= step;
                let v = (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * step * step);
                hess.set(i, j, v);
                hess.set(j, i, v);
            }
        }
        let eigs = symmetric_eigenvalues(&hess);
        let abs_min = eigs.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
        let abs_max = eigs.iter().map(|e| e.abs()).fold(0.0f64, f64::max);
        if abs_min > 0.0 {
            hessian_conds.push(abs_max / abs_min);
        }
    }

    let stat = |name_base: &'static str, values: &[f64]| -> [FeatureValue; 4] {
        let names = curv_names(name_base);
        if values.is_empty() {
            [(names[0], None), (names[1], None), (names[2], None), (names[3], None)]
        } else {
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            [
                (names[0], Some(min)),
                (names[1], Some(max)),
                (names[2], Some(mean(values))),
                (names[3], Some(sample_sd(values))),
            ]
        }
    };
    let mut out = Vec::with_capacity(12);
    out.extend(stat("grad_norm", &grad_norms));
    out.extend(stat("grad_scale", &grad_scales));
    out.extend(stat("hessian_cond", &hessian_conds));
    Ok(out)
}

fn curv_names(base: &str) -> [&'static str; 4] {
    match base {
        "grad_norm" => [
            "ela_curv.grad_norm.min",
            "ela_curv.grad_norm.max",
            "ela_curv.grad_norm.mean",
            "ela_curv.grad_norm.sd",
        ],
        "grad_scale" => [
            "ela_curv.grad_scale.min",
            "ela_curv.grad_scale.max",
            "ela_curv.grad_scale.mean",
            "ela_curv.grad_scale.sd",
        ],
        "hessian_cond" => [
            "ela_curv.hessian_cond.min",
            "ela_curv.hessian_cond.max",
            "ela_curv.hessian_cond.mean",
            "ela_curv.hessian_cond.sd",
        ],
        _ => panic!("unknown curvature stat {base}"),
    }
}
