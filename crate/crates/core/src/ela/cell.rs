//! Cell-mapping features: the domain is cut into `blocks` blocks per
//! dimension and per-cell geometry is aggregated across populated cells.

use std::collections::BTreeMap;

use crate::ela::FeatureValue;
use crate::error::{Error, Result};
use crate::linalg::{euclidean, mean, sample_sd};

pub const DEFAULT_BLOCKS: usize = 2;

/// Group sample indices by cell id; cells iterate in id order.
fn cells(
    points: &[Vec<f64>],
    bounds: (f64, f64),
    blocks: usize,
) -> BTreeMap<usize, Vec<usize>> {
    let (lower, upper) = bounds;
    let width = upper - lower;
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let mut id = 0usize;
        let mut stride = 1usize;
        for &x in p {
            let b = (((x - lower) / width * blocks as f64).floor() as isize)
                .clamp(0, blocks as isize - 1) as usize;
            id += b * stride;
            stride *= blocks;
        }
        map.entry(id).or_default().push(i);
    }
    map
}

fn cell_center(id: usize, dim: usize, bounds: (f64, f64), blocks: usize) -> Vec<f64> {
    let (lower, upper) = bounds;
    let width = (upper - lower) / blocks as f64;
    let mut center = Vec::with_capacity(dim);
    let mut rest = id;
    for _ in 0..dim {
        let b = rest % blocks;
        rest /= blocks;
        center.push(lower + (b as f64 + 0.5) * width);
    }
    center
}

fn aggregate(name_mean: &'static str, name_sd: &'static str, values: &[f64]) -> [FeatureValue; 2] {
    if values.is_empty() {
        [(name_mean, None), (name_sd, None)]
    } else {
        [
            (name_mean, Some(mean(values))),
            (name_sd, Some(sample_sd(values))),
        ]
    }
}

/// Angle features: distances from the cell center to the cell's best and
/// worst point, the angle between them, and the best-to-worst value span
/// relative to the global span.
pub fn cm_angle(
    points: &[Vec<f64>],
    values: &[f64],
    bounds: (f64, f64),
    blocks: usize,
) -> Result<Vec<FeatureValue>> {
    if points.is_empty() || points.len() != values.len() {
        return Err(Error::invalid_argument("cm_angle needs aligned points and values"));
    }
    let dim = points[0].len();
    let global_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let global_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let global_span = global_max - global_min;

    let mut d_best = Vec::new();
    let mut d_worst = Vec::new();
    let mut angles = Vec::new();
    let mut ratios = Vec::new();
    for (id, members) in cells(points, bounds, blocks) {
        if members.len() < 2 {
            continue;
        }
        let center = cell_center(id, dim, bounds, blocks);
        let best = *members
            .iter()
            .min_by(|&&a, &&b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
            .unwrap();
        let worst = *members
            .iter()
            .min_by(|&&a, &&b| values[b].total_cmp(&values[a]).then(a.cmp(&b)))
            .unwrap();
        let vb: Vec<f64> = points[best].iter().zip(&center).map(|(a, c)| a - c).collect();
        let vw: Vec<f64> = points[worst].iter().zip(&center).map(|(a, c)| a - c).collect();
        let nb = vb.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nw = vw.iter().map(|v| v * v).sum::<f64>().sqrt();
        d_best.push(euclidean(&points[best], &center));
        d_worst.push(euclidean(&points[worst], &center));
        if nb > 1e-12 && nw > 1e-12 {
            let cos = (vb.iter().zip(&vw).map(|(a, b)| a * b).sum::<f64>() / (nb * nw))
                .clamp(-1.0, 1.0);
            angles.push(cos.acos().to_degrees());
        }
        if global_span > 0.0 {
            ratios.push((values[worst] - values[best]) / global_span);
        }
    }

    let mut out = Vec::with_capacity(8);
    out.extend(aggregate(
        "cm_angle.dist_ctr2best.mean",
        "cm_angle.dist_ctr2best.sd",
        &d_best,
    ));
    out.extend(aggregate(
        "cm_angle.dist_ctr2worst.mean",
        "cm_angle.dist_ctr2worst.sd",
        &d_worst,
    ));
    out.extend(aggregate("cm_angle.angle.mean", "cm_angle.angle.sd", &angles));
    out.extend(aggregate(
        "cm_angle.y_ratio_best2worst.mean",
        "cm_angle.y_ratio_best2worst.sd",
        &ratios,
    ));
    Ok(out)
}

/// Gradient-homogeneity features: per cell, unit vectors point downhill from
/// each point to(wards) its nearest neighbor; their normalized resultant
/// length measures how aligned local improvement directions are.
pub fn cm_grad(
    points: &[Vec<f64>],
    values: &[f64],
    bounds: (f64, f64),
    blocks: usize,
) -> Result<Vec<FeatureValue>> {
    if points.is_empty() || points.len() != values.len() {
        return Err(Error::invalid_argument("cm_grad needs aligned points and values"));
    }
    let dim = points[0].len();
    let mut homogeneity = Vec::new();
    for (_id, members) in cells(points, bounds, blocks) {
        if members.len() < 2 {
            continue;
        }
        let mut sum = vec![0.0f64; dim];
        let mut count = 0usize;
        for &i in &members {
            let mut nearest = usize::MAX;
            let mut nearest_dist = f64::INFINITY;
            for &j in &members {
                if i == j {
                    continue;
                }
                let d = euclidean(&points[i], &points[j]);
                if d < nearest_dist {
                    nearest_dist = d;
                    nearest = j;
                }
            }
            if nearest_dist <= 0.0 || values[i] == values[nearest] {
                continue;
            }
            // Unit vector from the worse to the better of the pair.
            let (from, to) = if values[nearest] < values[i] {
                (i, nearest)
            } else {
                (nearest, i)
            };
            for k in 0..dim {
                sum[k] += (points[to][k] - points[from][k]) / nearest_dist;
            }
            count += 1;
        }
        if count == 0 {
            continue;
        }
        let norm = sum.iter().map(|v| v * v).sum::<f64>().sqrt();
        homogeneity.push(norm / count as f64);
    }
    Ok(aggregate("cm_grad.grad_homo.mean", "cm_grad.grad_homo.sd", &homogeneity).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(out: &[FeatureValue], name: &str) -> Option<f64> {
        out.iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn diametrically_opposed_best_and_worst_form_a_straight_angle() {
        // One cell over [0,1]^2 with center (0.5, 0.5).
        let points = vec![vec![0.2, 0.5], vec![0.8, 0.5], vec![0.5, 0.6]];
        let values = vec![0.0, 2.0, 1.0];
        let out = cm_angle(&points, &values, (0.0, 1.0), 1).unwrap();
        assert!((get(&out, "cm_angle.angle.mean").unwrap() - 180.0).abs() < 1e-9);
        assert_eq!(get(&out, "cm_angle.angle.sd"), Some(0.0));
    }

    #[test]
    fn hand_computed_single_cell() {
        let points = vec![vec![0.5, 0.75], vec![0.75, 0.5], vec![0.25, 0.25]];
        let values = vec![3.0, 1.0, 5.0];
        let out = cm_angle(&points, &values, (0.0, 1.0), 1).unwrap();
        // best = (0.75, 0.5), worst = (0.25, 0.25), center = (0.5, 0.5)
        let d_best = 0.25;
        let d_worst = (0.25f64 * 0.25 + 0.25 * 0.25).sqrt();
        assert!((get(&out, "cm_angle.dist_ctr2best.mean").unwrap() - d_best).abs() < 1e-12);
        assert!((get(&out, "cm_angle.dist_ctr2worst.mean").unwrap() - d_worst).abs() < 1e-12);
        // angle between (0.25, 0) and (-0.25, -0.25) is 135 degrees
        assert!((get(&out, "cm_angle.angle.mean").unwrap() - 135.0).abs() < 1e-9);
        // the cell spans the full global value range
        assert_eq!(get(&out, "cm_angle.y_ratio_best2worst.mean"), Some(1.0));
    }

    #[test]
    fn single_cell_aggregation_has_zero_sd() {
        let points = vec![vec![0.1, 0.1], vec![0.9, 0.9], vec![0.4, 0.6]];
        let values = vec![1.0, 2.0, 3.0];
        let out = cm_angle(&points, &values, (0.0, 1.0), 1).unwrap();
        assert_eq!(get(&out, "cm_angle.dist_ctr2best.sd"), Some(0.0));
        assert_eq!(get(&out, "cm_angle.y_ratio_best2worst.sd"), Some(0.0));
    }

    #[test]
    fn underpopulated_cells_are_skipped() {
        // Every point in its own cell: nothing to aggregate.
        let points = vec![vec![0.1, 0.1], vec![0.9, 0.9]];
        let values = vec![1.0, 2.0];
        let out = cm_angle(&points, &values, (0.0, 1.0), 2).unwrap();
        assert_eq!(get(&out, "cm_angle.angle.mean"), None);
    }

    #[test]
    fn aligned_improvement_has_unit_homogeneity() {
        // y increases along the first axis; all downhill vectors align.
        let points: Vec<Vec<f64>> = (0..6).map(|i| vec![0.1 * i as f64 + 0.2, 0.5]).collect();
        let values: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let out = cm_grad(&points, &values, (0.0, 1.0), 1).unwrap();
        assert!((get(&out, "cm_grad.grad_homo.mean").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(get(&out, "cm_grad.grad_homo.sd"), Some(0.0));
    }

    #[test]
    fn opposed_improvement_directions_cancel() {
        // Two tight pairs improving in opposite directions.
        let points = vec![
            vec![0.10, 0.5],
            vec![0.12, 0.5],
            vec![0.90, 0.5],
            vec![0.88, 0.5],
        ];
        let values = vec![0.0, 1.0, 0.0, 1.0];
        let out = cm_grad(&points, &values, (0.0, 1.0), 1).unwrap();
        assert!(get(&out, "cm_grad.grad_homo.mean").unwrap().abs() < 1e-12);
    }
}
