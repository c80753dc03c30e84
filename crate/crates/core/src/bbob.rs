//! The 24 single-objective continuous benchmark functions with seeded
//! instance transformations.
//!
//! Instances are generated from a counter-based seeded RNG rather than from
//! the reference suite's instance tables: each instance applies the published
//! structure (optimum shift, orthogonal rotations, objective offset) with
//! seeded parameters. Same `(function_id, instance_seed, dim)` always yields
//! the bitwise-identical instance.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, Matrix};
use crate::seed;

/// Number of functions in the suite.
pub const FUNCTION_COUNT: usize = 24;

/// Default box domain for every function.
pub const DOMAIN: (f64, f64) = (-5.0, 5.0);

/// Gaussian peak for the two peak-landscape functions (ids 21, 22).
#[derive(Debug, Clone)]
struct Peak {
    /// Peak center, already rotated into the evaluation frame.
    center_rot: Vec<f64>,
    weight: f64,
    /// Conditioning of the peak's quadratic form.
    alpha: f64,
    /// Axis permutation of the conditioning diagonal.
    perm: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Extras {
    None,
    Peaks(Vec<Peak>),
}

/// One seeded instance of a benchmark function.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub function_id: usize,
    pub dim: usize,
    pub instance_seed: u64,
    pub x_opt: Vec<f64>,
    pub f_opt: f64,
    pub rotation_a: Option<Matrix>,
    pub rotation_b: Option<Matrix>,
    extras: Extras,
}

/// Serializable instance-catalog record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub function_id: usize,
    pub instance_seed: u64,
    pub dim: usize,
    pub f_opt: f64,
    pub x_opt: Vec<f64>,
}

/// Build a seeded problem instance.
pub fn make_problem(function_id: usize, instance_seed: u64, dim: usize) -> Result<ProblemInstance> {
    if !(1..=FUNCTION_COUNT).contains(&function_id) {
        return Err(Error::invalid_argument(format!(
            "function_id {function_id} out of range 1..={FUNCTION_COUNT}"
        )));
    }
    if dim < 2 {
        return Err(Error::invalid_argument(format!("dim {dim} must be >= 2")));
    }
    let tags = [function_id as u64, instance_seed, dim as u64];

    let f_opt = {
        let mut rng = seed::rng(0xF0, &tags);
        let raw: f64 = rng.random_range(-100.0..100.0);
        (raw * 100.0).round() / 100.0
    };

    let uniform_x_opt = |scale: f64| -> Vec<f64> {
        let mut rng = seed::rng(0x07, &tags);
        (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
    };
    let sign_pattern = || -> Vec<f64> {
        let mut rng = seed::rng(0x05, &tags);
        (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect()
    };
    let rotation = |tag: u64| -> Matrix {
        let mut rng = seed::rng(tag, &tags);
        loop {
            let mut m = Matrix::zeros(dim, dim);
            for v in m.data.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            if orthonormalize(&mut m).is_ok() {
                return m;
            }
        }
    };

    let uses_a = matches!(
        function_id,
        6..=19 | 21..=24
    );
    let uses_b = matches!(function_id, 6 | 7 | 13 | 15..=18 | 23 | 24);
    let rotation_a = uses_a.then(|| rotation(0x0A));
    let rotation_b = uses_b.then(|| rotation(0x0B));

    let x_opt = match function_id {
        5 => sign_pattern().iter().map(|s| 5.0 * s).collect(),
        9 | 19 => {
            // Optimum of the shifted long-valley functions is where the
            // internal variable equals 1 in every coordinate.
            let r = rotation_a.as_ref().unwrap();
            let s = (dim as f64).sqrt() / 8.0;
            let s = s.max(1.0);
            let target = vec![1.0 / (2.0 * s); dim];
            r.transpose().matvec(&target)
        }
        20 => sign_pattern()
            .iter()
            .map(|s| s * 4.2096874633 / 2.0)
            .collect(),
        21 | 22 => uniform_x_opt(3.92),
        24 => sign_pattern().iter().map(|s| 1.25 * s).collect(),
        _ => uniform_x_opt(4.0),
    };

    let extras = match function_id {
        21 | 22 => {
            let n_peaks = if function_id == 21 { 101 } else { 21 };
            let alpha_base: f64 = 1000.0;
            let first_alpha = if function_id == 21 { 1000.0 } else { 1_000_000.0 };
            let rot = rotation_a.as_ref().unwrap();
            let mut rng = seed::rng(0x15, &tags);
            let mut peaks = Vec::with_capacity(n_peaks);
            for i in 0..n_peaks {
                let (center, weight, alpha) = if i == 0 {
                    (x_opt.clone(), 10.0, first_alpha)
                } else {
                    let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.9..4.9)).collect();
                    let w = 1.1 + 8.0 * (i as f64 - 1.0) / (n_peaks as f64 - 2.0);
                    let j: f64 = rng.random_range(0.0..1.0);
                    (c, w, alpha_base.powf(2.0 * j))
                };
                let mut perm: Vec<usize> = (0..dim).collect();
                for k in (1..dim).rev() {
                    let j = rng.random_range(0..=k);
                    perm.swap(k, j);
                }
                peaks.push(Peak {
                    center_rot: rot.matvec(&center),
                    weight,
                    alpha,
                    perm,
                });
            }
            Extras::Peaks(peaks)
        }
        _ => Extras::None,
    };

    Ok(ProblemInstance {
        function_id,
        dim,
        instance_seed,
        x_opt,
        f_opt,
        rotation_a,
        rotation_b,
        extras,
    })
}

impl ProblemInstance {
    /// Objective value at `x`; checks the dimension.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid_argument(format!(
                "point has dim {}, problem has dim {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self.value(x))
    }

    /// Objective value at `x`; panics on dimension mismatch.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.raw(x) + self.f_opt
    }

    /// Error-to-optimum of a best-reached objective value, clamped at zero.
    pub fn precision(&self, y_best: f64) -> f64 {
        (y_best - self.f_opt).max(0.0)
    }

    pub fn record(&self) -> InstanceRecord {
        InstanceRecord {
            function_id: self.function_id,
            instance_seed: self.instance_seed,
            dim: self.dim,
            f_opt: self.f_opt,
            x_opt: self.x_opt.clone(),
        }
    }

    fn shift(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.x_opt).map(|(a, b)| a - b).collect()
    }

    fn rot_a(&self, v: &[f64]) -> Vec<f64> {
        self.rotation_a.as_ref().unwrap().matvec(v)
    }

    fn rot_b(&self, v: &[f64]) -> Vec<f64> {
        self.rotation_b.as_ref().unwrap().matvec(v)
    }

    /// Shifted objective (zero at the optimum).
    #[allow(clippy::needless_range_loop)]
    fn raw(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let df = d as f64;
        match self.function_id {
            1 => sum_sq(&self.shift(x)),
            2 => {
                let z = t_osz(&self.shift(x));
                weighted_sq(&z, 1e6)
            }
            3 => {
                let z = lambda(&t_asy(&t_osz(&self.shift(x)), 0.2), 10.0);
                rastrigin_core(&z)
            }
            4 => {
                let y = t_osz(&self.shift(x));
                let mut z = Vec::with_capacity(d);
                for (i, &yi) in y.iter().enumerate() {
                    let base = 10f64.powf(0.5 * i as f64 / (df - 1.0));
                    let s = if yi > 0.0 && i % 2 == 0 { 10.0 * base } else { base };
                    z.push(s * yi);
                }
                rastrigin_core(&z) + 100.0 * penalty(x)
            }
            5 => {
                let mut total = 0.0;
                for i in 0..d {
                    let s = self.x_opt[i].signum() * 10f64.powf(i as f64 / (df - 1.0));
                    let z = if x[i] * self.x_opt[i] < 25.0 { x[i] } else { self.x_opt[i] };
                    total += 5.0 * s.abs() - s * z;
                }
                total
            }
            6 => {
                let z = self.rot_b(&lambda(&self.rot_a(&self.shift(x)), 10.0));
                let mut total = 0.0;
                for i in 0..d {
                    let s = if z[i] * self.x_opt[i] > 0.0 { 100.0 } else { 1.0 };
                    total += (s * z[i]) * (s * z[i]);
                }
                t_osz_scalar(total).powf(0.9)
            }
            7 => {
                let zhat = lambda(&self.rot_a(&self.shift(x)), 10.0);
                let ztilde: Vec<f64> = zhat
                    .iter()
                    .map(|&v| {
                        if v.abs() > 0.5 {
                            (0.5 + v).floor()
                        } else {
                            (0.5 + 10.0 * v).floor() / 10.0
                        }
                    })
                    .collect();
                let z = self.rot_b(&ztilde);
                let mut s = 0.0;
                for i in 0..d {
                    s += 10f64.powf(2.0 * i as f64 / (df - 1.0)) * z[i] * z[i];
                }
                0.1 * (zhat[0].abs() / 1e4).max(s) + penalty(x)
            }
            8 => {
                let scale = ((df).sqrt() / 8.0).max(1.0);
                let mut z = self.rot_a(&self.shift(x));
                for v in z.iter_mut() {
                    *v = scale * *v + 1.0;
                }
                rosenbrock_core(&z)
            }
            9 => {
                let scale = ((df).sqrt() / 8.0).max(1.0);
                let mut z = self.rot_a(x);
                for v in z.iter_mut() {
                    *v = scale * *v + 0.5;
                }
                rosenbrock_core(&z)
            }
            10 => {
                let z = t_osz(&self.rot_a(&self.shift(x)));
                weighted_sq(&z, 1e6)
            }
            11 => {
                let z = t_osz(&self.rot_a(&self.shift(x)));
                1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            12 => {
                let z = self.rot_a(&t_asy(&self.rot_a(&self.shift(x)), 0.5));
                z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            13 => {
                let z = self.rot_b(&lambda(&self.rot_a(&self.shift(x)), 10.0));
                z[0] * z[0] + 100.0 * z[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            14 => {
                let z = self.rot_a(&self.shift(x));
                let mut total = 0.0;
                for (i, &zi) in z.iter().enumerate() {
                    total += zi.abs().powf(2.0 + 4.0 * i as f64 / (df - 1.0));
                }
                total.sqrt()
            }
            15 => {
                let y = t_asy(&t_osz(&self.rot_a(&self.shift(x))), 0.2);
                let z = self.rot_a(&lambda(&self.rot_b(&y), 10.0));
                rastrigin_core(&z)
            }
            16 => {
                let y = t_osz(&self.rot_a(&self.shift(x)));
                let z = self.rot_a(&lambda(&self.rot_b(&y), 0.01));
                let f0: f64 = (0..12)
                    .map(|k| 0.5f64.powi(k) * (std::f64::consts::PI * 3f64.powi(k)).cos())
                    .sum();
                let mut outer = 0.0;
                for &zi in &z {
                    let mut inner = 0.0;
                    for k in 0..12 {
                        inner += 0.5f64.powi(k)
                            * (2.0 * std::f64::consts::PI * 3f64.powi(k) * (zi + 0.5)).cos();
                    }
                    outer += inner;
                }
                10.0 * (outer / df - f0).powi(3) + 10.0 / df * penalty(x)
            }
            17 | 18 => {
                let cond = if self.function_id == 17 { 10.0 } else { 1000.0 };
                let z = lambda(&self.rot_b(&t_asy(&self.rot_a(&self.shift(x)), 0.5)), cond);
                let mut total = 0.0;
                for i in 0..d - 1 {
                    let s = (z[i] * z[i] + z[i + 1] * z[i + 1]).sqrt();
                    total += s.sqrt() + s.sqrt() * (50.0 * s.powf(0.2)).sin().powi(2);
                }
                (total / (df - 1.0)).powi(2) + 10.0 * penalty(x)
            }
            19 => {
                let scale = ((df).sqrt() / 8.0).max(1.0);
                let mut z = self.rot_a(x);
                for v in z.iter_mut() {
                    *v = scale * *v + 0.5;
                }
                let mut total = 0.0;
                for i in 0..d - 1 {
                    let s = 100.0 * (z[i] * z[i] - z[i + 1]).powi(2) + (z[i] - 1.0).powi(2);
                    total += s / 4000.0 - s.cos();
                }
                10.0 / (df - 1.0) * total + 10.0
            }
            20 => {
                let two_abs_opt: Vec<f64> = self.x_opt.iter().map(|v| 2.0 * v.abs()).collect();
                let xhat: Vec<f64> = x
                    .iter()
                    .zip(&self.x_opt)
                    .map(|(xi, oi)| 2.0 * oi.signum() * xi)
                    .collect();
                let mut zhat = vec![0.0; d];
                zhat[0] = xhat[0];
                for i in 1..d {
                    zhat[i] = xhat[i] + 0.25 * (xhat[i - 1] - two_abs_opt[i - 1]);
                }
                let centered: Vec<f64> = zhat
                    .iter()
                    .zip(&two_abs_opt)
                    .map(|(z, o)| z - o)
                    .collect();
                let scaled = lambda(&centered, 10.0);
                let z: Vec<f64> = scaled
                    .iter()
                    .zip(&two_abs_opt)
                    .map(|(s, o)| 100.0 * (s + o))
                    .collect();
                let mut total = 0.0;
                for &zi in &z {
                    total += zi * zi.abs().sqrt().sin();
                }
                let z100: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
                -total / (100.0 * df) + 4.189828872724339 + 100.0 * penalty(&z100)
            }
            21 | 22 => {
                let peaks = match &self.extras {
                    Extras::Peaks(p) => p,
                    Extras::None => unreachable!(),
                };
                let rx = self.rot_a(x);
                let mut best = f64::NEG_INFINITY;
                for peak in peaks {
                    let mut q = 0.0;
                    for i in 0..d {
                        let c = peak.alpha.powf(0.5 * peak.perm[i] as f64 / (df - 1.0))
                            / peak.alpha.powf(0.25);
                        let diff = rx[i] - peak.center_rot[i];
                        q += c * diff * diff;
                    }
                    let v = peak.weight * (-q / (2.0 * df)).exp();
                    if v > best {
                        best = v;
                    }
                }
                t_osz_scalar(10.0 - best).powi(2) + penalty(x)
            }
            23 => {
                let z = self.rot_b(&lambda(&self.rot_a(&self.shift(x)), 100.0));
                let mut prod = 1.0;
                for (i, &zi) in z.iter().enumerate() {
                    let mut s = 0.0;
                    for j in 1..=32 {
                        let p = 2f64.powi(j) * zi;
                        s += (p - p.round()).abs() / 2f64.powi(j);
                    }
                    prod *= (1.0 + (i as f64 + 1.0) * s).powf(10.0 / df.powf(1.2));
                }
                10.0 / (df * df) * prod - 10.0 / (df * df) + penalty(x)
            }
            24 => {
                let mu0 = 2.5;
                let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
                let mu1 = -((mu0 * mu0 - 1.0) / s).sqrt();
                let xhat: Vec<f64> = x
                    .iter()
                    .zip(&self.x_opt)
                    .map(|(xi, oi)| 2.0 * oi.signum() * xi)
                    .collect();
                let centered: Vec<f64> = xhat.iter().map(|v| v - mu0).collect();
                let z = self.rot_b(&lambda(&self.rot_a(&centered), 100.0));
                let sum0: f64 = xhat.iter().map(|v| (v - mu0) * (v - mu0)).sum();
                let sum1: f64 = xhat.iter().map(|v| (v - mu1) * (v - mu1)).sum();
                let cos_sum: f64 = z
                    .iter()
                    .map(|v| (2.0 * std::f64::consts::PI * v).cos())
                    .sum();
                sum0.min(df + s * sum1) + 10.0 * (df - cos_sum) + 1e4 * penalty(x)
            }
            _ => unreachable!(),
        }
    }
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Sum of 10^(6 i/(D-1)) v_i^2 style conditioning.
fn weighted_sq(v: &[f64], cond: f64) -> f64 {
    let d = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, x)| cond.powf(i as f64 / (d - 1.0)) * x * x)
        .sum()
}

fn rastrigin_core(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let cos_sum: f64 = z
        .iter()
        .map(|v| (2.0 * std::f64::consts::PI * v).cos())
        .sum();
    10.0 * (d - cos_sum) + sum_sq(z)
}

fn rosenbrock_core(z: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..z.len() - 1 {
        total += 100.0 * (z[i] * z[i] - z[i + 1]).powi(2) + (z[i] - 1.0).powi(2);
    }
    total
}

/// Oscillation transform applied elementwise.
fn t_osz(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| t_osz_scalar(x)).collect()
}

fn t_osz_scalar(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xhat = x.abs().ln();
    let (c1, c2) = if x > 0.0 { (10.0, 7.9) } else { (5.5, 3.1) };
    x.signum() * (xhat + 0.049 * ((c1 * xhat).sin() + (c2 * xhat).sin())).exp()
}

/// Asymmetry transform applied elementwise.
fn t_asy(v: &[f64], beta: f64) -> Vec<f64> {
    let d = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 {
                x.powf(1.0 + beta * i as f64 / (d - 1.0) * x.sqrt())
            } else {
                x
            }
        })
        .collect()
}

/// Diagonal conditioning matrix Lambda^alpha applied to a vector.
fn lambda(v: &[f64], alpha: f64) -> Vec<f64> {
    let d = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| alpha.powf(0.5 * i as f64 / (d - 1.0)) * x)
        .collect()
}

/// Boundary penalty: zero inside [-5, 5]^D.
fn penalty(x: &[f64]) -> f64 {
    x.iter()
        .map(|v| (v.abs() - 5.0).max(0.0).powi(2))
        .sum()
}
