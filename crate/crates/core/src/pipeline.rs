//! Dataset assembly, instance-stratified cross validation and the MAE
//! report; plus ingestion of external performance data and a synthetic
//! (1+1)-ES generator for desk-scale runs.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bbob::{make_problem, FUNCTION_COUNT};
use crate::ela::FeatureMatrix;
use crate::error::{Error, Result};
use crate::forest::{Forest, ForestParams};
use crate::seed;
use crate::table::{self, Csv};

/// Learning scenario: one forest per target, or one multi-output forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "STR")]
    Str,
    #[serde(rename = "MTR")]
    Mtr,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Str => "STR",
            Mode::Mtr => "MTR",
        }
    }
}

/// Floor on precisions inside the optional log10 target transform.
pub const LOG_EPSILON: f64 = 1e-12;

// --- performance data ----------------------------------------------------

/// Median best-reached precision per (problem, instance) row and algorithm
/// column; a complete rectangular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceTable {
    pub rows: Vec<(usize, usize)>,
    pub algorithms: Vec<String>,
    /// `values[row][algorithm]`.
    pub values: Vec<Vec<f64>>,
    pub runs_per_cell: usize,
    pub budget: Option<usize>,
}

impl PerformanceTable {
    /// Wide CSV: `problem_id,instance_id,<algorithm...>`.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["problem_id".to_string(), "instance_id".to_string()];
        header.extend(self.algorithms.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .zip(&self.values)
            .map(|(&(p, i), vals)| {
                let mut row = vec![p.to_string(), i.to_string()];
                row.extend(vals.iter().map(|v| table::fmt_f64(*v)));
                row
            })
            .collect();
        table::write_csv(&header, &rows)
    }
}

/// Parse the per-run CSV (`problem_id,instance_id,algorithm,run_id,precision`)
/// and reduce each cell to its run median.
pub fn ingest_performance(text: &str) -> Result<PerformanceTable> {
    let csv = Csv::parse(text)?;
    let col_problem = csv.column("problem_id")?;
    let col_instance = csv.column("instance_id")?;
    let col_algorithm = csv.column("algorithm")?;
    let col_run = csv.column("run_id")?;
    let col_precision = csv.column("precision")?;

    let mut cells: BTreeMap<(usize, usize, String), Vec<f64>> = BTreeMap::new();
    for (line, row) in csv.rows.iter().enumerate() {
        let problem = table::parse_usize(&row[col_problem])?;
        let instance = table::parse_usize(&row[col_instance])?;
        let algorithm = row[col_algorithm].clone();
        table::parse_usize(&row[col_run])?;
        let precision = table::parse_f64(&row[col_precision])?;
        if !precision.is_finite() || precision < 0.0 {
            return Err(Error::validation(format!(
                "row {}: precision {precision} must be finite and >= 0",
                line + 2
            )));
        }
        cells
            .entry((problem, instance, algorithm))
            .or_default()
            .push(precision);
    }
    if cells.is_empty() {
        return Err(Error::validation("performance CSV has no data rows"));
    }

    let mut problems: Vec<usize> = cells.keys().map(|k| k.0).collect();
    problems.sort_unstable();
    problems.dedup();
    let mut instances: Vec<usize> = cells.keys().map(|k| k.1).collect();
    instances.sort_unstable();
    instances.dedup();
    let mut algorithms: Vec<String> = cells.keys().map(|k| k.2.clone()).collect();
    algorithms.sort();
    algorithms.dedup();

    // The grid must be complete before training.
    let mut missing = Vec::new();
    for &p in &problems {
        for &i in &instances {
            for a in &algorithms {
                if !cells.contains_key(&(p, i, a.clone())) {
                    missing.push(format!("(f{p}, i{i}, {a})"));
                }
            }
        }
    }
    if !missing.is_empty() {
        missing.truncate(10);
        return Err(Error::validation(format!(
            "incomplete performance grid; missing cells: {}",
            missing.join(", ")
        )));
    }
    let runs_per_cell = cells.values().next().unwrap().len();
    if cells.values().any(|runs| runs.len() != runs_per_cell) {
        return Err(Error::validation("cells have unequal run counts"));
    }

    let mut rows = Vec::new();
    let mut values = Vec::new();
    for &p in &problems {
        for &i in &instances {
            rows.push((p, i));
            values.push(
                algorithms
                    .iter()
                    .map(|a| crate::linalg::median(&cells[&(p, i, a.clone())]))
                    .collect(),
            );
        }
    }
    Ok(PerformanceTable {
        rows,
        algorithms,
        values,
        runs_per_cell,
        budget: None,
    })
}

// --- synthetic performance data ------------------------------------------

/// A named (1+1)-ES parameterization standing in for a real optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticAlgorithm {
    pub name: String,
    pub initial_step: f64,
}

/// Default synthetic portfolio: three step-size regimes.
pub fn default_algorithms() -> Vec<SyntheticAlgorithm> {
    vec![
        SyntheticAlgorithm {
            name: "ES_1".into(),
            initial_step: 2.0,
        },
        SyntheticAlgorithm {
            name: "ES_2".into(),
            initial_step: 0.5,
        },
        SyntheticAlgorithm {
            name: "ES_3".into(),
            initial_step: 0.05,
        },
    ]
}

/// Instance seed convention shared by the feature and performance pipelines.
pub fn instance_seed(master: u64, problem_id: usize, instance_id: usize) -> u64 {
    seed::derive(master, &[0x5017E, problem_id as u64, instance_id as u64])
}

/// One (1+1)-ES run with 1/5 success-rule step adaptation; returns the best
/// reached precision after `budget` evaluations.
pub fn es_run(
    problem: &crate::bbob::ProblemInstance,
    initial_step: f64,
    budget: usize,
    seed_value: u64,
) -> f64 {
    let mut rng = seed::rng(seed_value, &[0xE5]);
    let (lo, hi) = crate::bbob::DOMAIN;
    let dim = problem.dim;
    let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..hi)).collect();
    let mut y = problem.value(&x);
    let mut sigma = initial_step;
    let damping = ((dim + 1) as f64).sqrt();
    for _ in 1..budget {
        let child: Vec<f64> = x
            .iter()
            .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let yc = problem.value(&child);
        let success = yc <= y;
        if success {
            x = child;
            y = yc;
        }
        let indicator = if success { 1.0 } else { 0.0 };
        sigma *= ((indicator - 0.2) / damping).exp();
    }
    problem.precision(y)
}

/// Run every synthetic algorithm on every (problem, instance) cell and take
/// the per-cell run median.
pub fn simulate_performance(
    dim: usize,
    instances_per_problem: usize,
    algorithms: &[SyntheticAlgorithm],
    budget: usize,
    runs: usize,
    master_seed: u64,
) -> Result<PerformanceTable> {
    if budget < 1 {
        return Err(Error::invalid_argument("budget must be >= 1"));
    }
    if runs < 1 || instances_per_problem < 1 || algorithms.is_empty() {
        return Err(Error::invalid_argument(
            "simulate needs runs >= 1, instances >= 1 and at least one algorithm",
        ));
    }
    let cells: Vec<(usize, usize)> = (1..=FUNCTION_COUNT)
        .flat_map(|p| (1..=instances_per_problem).map(move |i| (p, i)))
        .collect();
    let values: Result<Vec<Vec<f64>>> = cells
        .par_iter()
        .map(|&(p, i)| {
            let problem = make_problem(p, instance_seed(master_seed, p, i), dim)?;
            let row: Vec<f64> = algorithms
                .iter()
                .enumerate()
                .map(|(a, alg)| {
                    let precisions: Vec<f64> = (0..runs)
                        .map(|r| {
                            let run_seed = seed::derive(
                                master_seed,
                                &[0x0E5, p as u64, i as u64, a as u64, r as u64],
                            );
                            es_run(&problem, alg.initial_step, budget, run_seed)
                        })
                        .collect();
                    crate::linalg::median(&precisions)
                })
                .collect();
            Ok(row)
        })
        .collect();
    Ok(PerformanceTable {
        rows: cells,
        algorithms: algorithms.iter().map(|a| a.name.clone()).collect(),
        values: values?,
        runs_per_cell: runs,
        budget: Some(budget),
    })
}

/// Per-run CSV in the ingestion schema, for the simulate command.
pub fn simulate_runs_csv(
    dim: usize,
    instances_per_problem: usize,
    algorithms: &[SyntheticAlgorithm],
    budget: usize,
    runs: usize,
    master_seed: u64,
) -> Result<String> {
    if budget < 1 {
        return Err(Error::invalid_argument("budget must be >= 1"));
    }
    let header: Vec<String> = [
        "problem_id",
        "instance_id",
        "algorithm",
        "run_id",
        "precision",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let cells: Vec<(usize, usize)> = (1..=FUNCTION_COUNT)
        .flat_map(|p| (1..=instances_per_problem).map(move |i| (p, i)))
        .collect();
    let blocks: Result<Vec<Vec<Vec<String>>>> = cells
        .par_iter()
        .map(|&(p, i)| {
            let problem = make_problem(p, instance_seed(master_seed, p, i), dim)?;
            let mut block = Vec::with_capacity(algorithms.len() * runs);
            for (a, alg) in algorithms.iter().enumerate() {
                for r in 0..runs {
                    let run_seed = seed::derive(
                        master_seed,
                        &[0x0E5, p as u64, i as u64, a as u64, r as u64],
                    );
                    let precision = es_run(&problem, alg.initial_step, budget, run_seed);
                    block.push(vec![
                        p.to_string(),
                        i.to_string(),
                        alg.name.clone(),
                        (r + 1).to_string(),
                        table::fmt_f64(precision),
                    ]);
                }
            }
            Ok(block)
        })
        .collect();
    let rows: Vec<Vec<String>> = blocks?.into_iter().flatten().collect();
    Ok(table::write_csv(&header, &rows))
}

// --- algorithm metadata ----------------------------------------------------

/// One optimizer-module setting, e.g. "Elitism" -> "TRUE".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSetting {
    pub module: String,
    pub setting: String,
}

/// Configuration metadata for one algorithm column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmMetadata {
    pub name: String,
    pub modules: Vec<ModuleSetting>,
}

pub fn metadata_to_json(metadata: &[AlgorithmMetadata]) -> String {
    serde_json::to_string_pretty(metadata).expect("metadata serializes")
}

pub fn metadata_from_json(text: &str) -> Result<Vec<AlgorithmMetadata>> {
    serde_json::from_str(text).map_err(|e| Error::parse(format!("algorithm metadata: {e}")))
}

// --- dataset and folds -----------------------------------------------------

/// Feature matrix rows aligned with performance targets plus a
/// leave-one-instance-out fold label per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<(usize, usize)>,
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub target_names: Vec<String>,
    pub targets: Vec<Vec<f64>>,
    /// 1-based fold label per row; fold k holds the k-th instance of every
    /// problem.
    pub fold_of: Vec<usize>,
    pub n_folds: usize,
    /// Catalog features dropped because some row missed them.
    pub dropped_features: Vec<String>,
}

/// Build the learning dataset from computed features and performance
/// targets. Feature columns with any missing value are dropped, mirroring
/// the convention that the learning portfolio holds only features defined
/// on every instance.
pub fn build_dataset(
    features: &FeatureMatrix,
    performance: &PerformanceTable,
    log_targets: bool,
) -> Result<Dataset> {
    if features.rows != performance.rows {
        return Err(Error::validation(format!(
            "feature rows and performance rows differ ({} vs {} rows)",
            features.rows.len(),
            performance.rows.len()
        )));
    }
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (c, name) in features.feature_names.iter().enumerate() {
        if features.data.iter().all(|row| row[c].is_some()) {
            keep.push(c);
        } else {
            dropped.push(name.clone());
        }
    }
    if keep.is_empty() {
        return Err(Error::validation("every feature column has missing values"));
    }
    let matrix: Vec<Vec<f64>> = features
        .data
        .iter()
        .map(|row| keep.iter().map(|&c| row[c].unwrap()).collect())
        .collect();
    let targets: Vec<Vec<f64>> = performance
        .values
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    if log_targets {
                        (v + LOG_EPSILON).log10()
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();

    let plan = make_folds(&features.rows)?;
    Ok(Dataset {
        rows: features.rows.clone(),
        feature_names: keep
            .iter()
            .map(|&c| features.feature_names[c].clone())
            .collect(),
        features: matrix,
        target_names: performance.algorithms.clone(),
        targets,
        fold_of: plan.fold_of,
        n_folds: plan.n_folds,
        dropped_features: dropped,
    })
}

/// Leave-one-instance-out fold plan over (problem, instance) row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    /// 1-based fold label per row.
    pub fold_of: Vec<usize>,
    pub n_folds: usize,
}

impl FoldPlan {
    /// Row indices of one fold (1-based label).
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Fold k collects the k-th instance of every problem. Every problem must
/// carry the identical instance set.
pub fn make_folds(rows: &[(usize, usize)]) -> Result<FoldPlan> {
    let mut per_problem: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(p, i) in rows {
        per_problem.entry(p).or_default().push(i);
    }
    let mut reference: Option<Vec<usize>> = None;
    for (p, instances) in &mut per_problem {
        instances.sort_unstable();
        match &reference {
            None => reference = Some(instances.clone()),
            Some(r) if r == instances => {}
            Some(_) => {
                return Err(Error::invalid_argument(format!(
                    "problem {p} has a different instance set; folds need a rectangular grid"
                )))
            }
        }
    }
    let reference = reference.ok_or_else(|| Error::invalid_argument("no rows"))?;
    let position: BTreeMap<usize, usize> = reference
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, k + 1))
        .collect();
    Ok(FoldPlan {
        fold_of: rows.iter().map(|&(_, i)| position[&i]).collect(),
        n_folds: reference.len(),
    })
}

// --- cross validation ------------------------------------------------------

/// Row index paired with its out-of-fold prediction vector.
type RowPrediction = (usize, Vec<f64>);

/// Out-of-fold predictions, aligned with the dataset rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    pub rows: Vec<(usize, usize)>,
    pub target_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

/// Seed stream for one fold's model (per target in STR mode).
pub fn fold_seed(master: u64, mode: Mode, fold: usize, target: Option<usize>) -> u64 {
    let mode_tag = match mode {
        Mode::Str => 0x57,
        Mode::Mtr => 0x47,
    };
    match target {
        Some(t) => seed::derive(master, &[mode_tag, fold as u64, t as u64]),
        None => seed::derive(master, &[mode_tag, fold as u64]),
    }
}

/// Fit the models that predict one held-out fold.
pub fn fit_fold_models(
    dataset: &Dataset,
    mode: Mode,
    params: &ForestParams,
    master_seed: u64,
    fold: usize,
) -> Result<Vec<Forest>> {
    let train: Vec<usize> = (0..dataset.rows.len())
        .filter(|&r| dataset.fold_of[r] != fold)
        .collect();
    if train.is_empty() {
        return Err(Error::invalid_state(format!(
            "fold {fold} has no training rows"
        )));
    }
    let x: Vec<Vec<f64>> = train.iter().map(|&r| dataset.features[r].clone()).collect();
    match mode {
        Mode::Mtr => {
            let y: Vec<Vec<f64>> = train.iter().map(|&r| dataset.targets[r].clone()).collect();
            let p = ForestParams {
                seed: fold_seed(master_seed, mode, fold, None),
                ..params.clone()
            };
            Ok(vec![Forest::fit(&x, &y, &p)?.with_names(
                dataset.feature_names.clone(),
                dataset.target_names.clone(),
            )])
        }
        Mode::Str => {
            let m = dataset.target_names.len();
            (0..m)
                .map(|t| {
                    let y: Vec<Vec<f64>> =
                        train.iter().map(|&r| vec![dataset.targets[r][t]]).collect();
                    let p = ForestParams {
                        seed: fold_seed(master_seed, mode, fold, Some(t)),
                        ..params.clone()
                    };
                    Ok(Forest::fit(&x, &y, &p)?.with_names(
                        dataset.feature_names.clone(),
                        vec![dataset.target_names[t].clone()],
                    ))
                })
                .collect()
        }
    }
}

/// Predict all targets for one feature row with a fold's model set.
pub fn predict_with_models(models: &[Forest], x: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for model in models {
        out.extend(model.predict(x)?);
    }
    Ok(out)
}

/// Leave-one-instance-out cross validation: every row is predicted by the
/// model set that never saw its fold.
pub fn run_cv(
    dataset: &Dataset,
    mode: Mode,
    params: &ForestParams,
    master_seed: u64,
) -> Result<PredictionTable> {
    params.validate()?;
    let folds: Vec<usize> = (1..=dataset.n_folds).collect();
    let per_fold: Result<Vec<Vec<RowPrediction>>> = folds
        .par_iter()
        .map(|&fold| {
            let models = fit_fold_models(dataset, mode, params, master_seed, fold)?;
            let mut out = Vec::new();
            for r in 0..dataset.rows.len() {
                if dataset.fold_of[r] != fold {
                    continue;
                }
                out.push((r, predict_with_models(&models, &dataset.features[r])?));
            }
            Ok(out)
        })
        .collect();
    let mut values = vec![Vec::new(); dataset.rows.len()];
    for fold_block in per_fold? {
        for (r, pred) in fold_block {
            values[r] = pred;
        }
    }
    Ok(PredictionTable {
        rows: dataset.rows.clone(),
        target_names: dataset.target_names.clone(),
        values,
    })
}

// --- MAE report -------------------------------------------------------------

/// Mean absolute error per problem, target and mode, plus per-target grand
/// means and per-cell winner flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaeReport {
    pub targets: Vec<String>,
    pub modes: Vec<Mode>,
    pub problems: Vec<usize>,
    /// `mae[problem_idx][target_idx][mode_idx]`.
    pub mae: Vec<Vec<Vec<f64>>>,
    /// `mean[target_idx][mode_idx]` — mean of the per-problem values.
    pub mean: Vec<Vec<f64>>,
    /// Winner mode index per (problem, target); `None` when only one mode ran.
    pub winners: Vec<Vec<Option<usize>>>,
}

#[allow(clippy::needless_range_loop)]
pub fn mae_report(predictions: &[(Mode, PredictionTable)], truth: &Dataset) -> Result<MaeReport> {
    if predictions.is_empty() {
        return Err(Error::invalid_argument("no predictions supplied"));
    }
    for (mode, table) in predictions {
        if table.rows != truth.rows {
            return Err(Error::invalid_argument(format!(
                "{} predictions are not aligned with the dataset rows",
                mode.name()
            )));
        }
        if table
            .values
            .iter()
            .any(|v| v.len() != truth.target_names.len())
        {
            return Err(Error::invalid_argument(
                "missing predictions for some targets",
            ));
        }
    }
    let mut problems: Vec<usize> = truth.rows.iter().map(|&(p, _)| p).collect();
    problems.sort_unstable();
    problems.dedup();

    let modes: Vec<Mode> = predictions.iter().map(|(m, _)| *m).collect();
    let n_targets = truth.target_names.len();

    let mut mae = vec![vec![vec![0.0; modes.len()]; n_targets]; problems.len()];
    for (pi, &problem) in problems.iter().enumerate() {
        let rows: Vec<usize> = (0..truth.rows.len())
            .filter(|&r| truth.rows[r].0 == problem)
            .collect();
        for (mi, (_, table)) in predictions.iter().enumerate() {
            for t in 0..n_targets {
                let total: f64 = rows
                    .iter()
                    .map(|&r| (table.values[r][t] - truth.targets[r][t]).abs())
                    .sum();
                mae[pi][t][mi] = total / rows.len() as f64;
            }
        }
    }
    let mean: Vec<Vec<f64>> = (0..n_targets)
        .map(|t| {
            (0..modes.len())
                .map(|mi| {
                    problems
                        .iter()
                        .enumerate()
                        .map(|(pi, _)| mae[pi][t][mi])
                        .sum::<f64>()
                        / problems.len() as f64
                })
                .collect()
        })
        .collect();
    let winners: Vec<Vec<Option<usize>>> = (0..problems.len())
        .map(|pi| {
            (0..n_targets)
                .map(|t| {
                    if modes.len() < 2 {
                        None
                    } else {
                        let mut best = 0;
                        for mi in 1..modes.len() {
                            if mae[pi][t][mi] < mae[pi][t][best] {
                                best = mi;
                            }
                        }
                        Some(best)
                    }
                })
                .collect()
        })
        .collect();
    Ok(MaeReport {
        targets: truth.target_names.clone(),
        modes,
        problems,
        mae,
        mean,
        winners,
    })
}

impl MaeReport {
    /// Table-shaped CSV: one row per problem plus a final Mean row; one
    /// column per (target, mode) pair.
    pub fn to_csv(&self) -> String {
        let mut header = vec!["f_id".to_string()];
        for target in &self.targets {
            for mode in &self.modes {
                header.push(format!("{target}_{}", mode.name()));
            }
        }
        let mut rows = Vec::with_capacity(self.problems.len() + 1);
        for (pi, problem) in self.problems.iter().enumerate() {
            let mut row = vec![problem.to_string()];
            for t in 0..self.targets.len() {
                for mi in 0..self.modes.len() {
                    row.push(table::fmt_f64(self.mae[pi][t][mi]));
                }
            }
            rows.push(row);
        }
        let mut mean_row = vec!["Mean".to_string()];
        for t in 0..self.targets.len() {
            for mi in 0..self.modes.len() {
                mean_row.push(table::fmt_f64(self.mean[t][mi]));
            }
        }
        rows.push(mean_row);
        table::write_csv(&header, &rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ela::FeatureMatrix;

    fn toy_features(problems: usize, instances: usize, n_features: usize) -> FeatureMatrix {
        let mut rows = Vec::new();
        let mut data = Vec::new();
        for p in 1..=problems {
            for i in 1..=instances {
                rows.push((p, i));
                data.push(
                    (0..n_features)
                        .map(|c| Some((p * 7 + i * 3 + c) as f64 * 0.1))
                        .collect(),
                );
            }
        }
        FeatureMatrix {
            rows,
            feature_names: (0..n_features).map(|c| format!("f.{c}")).collect(),
            data,
        }
    }

    fn toy_performance(problems: usize, instances: usize, algorithms: usize) -> PerformanceTable {
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for p in 1..=problems {
            for i in 1..=instances {
                rows.push((p, i));
                values.push((0..algorithms).map(|a| (p + i + a) as f64).collect());
            }
        }
        PerformanceTable {
            rows,
            algorithms: (0..algorithms).map(|a| format!("A{a}")).collect(),
            values,
            runs_per_cell: 1,
            budget: None,
        }
    }

    #[test]
    fn ingest_takes_the_run_median() {
        let mut text = String::from("problem_id,instance_id,algorithm,run_id,precision\n");
        for (r, v) in [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 100.0]
            .iter()
            .enumerate()
        {
            text.push_str(&format!("1,1,ES_1,{},{}\n", r + 1, v));
        }
        let table = ingest_performance(&text).unwrap();
        assert_eq!(table.values[0][0], 5.5);
        assert_eq!(table.runs_per_cell, 10);
    }

    #[test]
    fn ingest_names_missing_cells() {
        let text = "problem_id,instance_id,algorithm,run_id,precision\n\
                    1,1,ES_1,1,1.0\n\
                    1,1,ES_2,1,1.0\n\
                    1,2,ES_1,1,1.0\n";
        let err = ingest_performance(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(f1, i2, ES_2)"), "unhelpful error: {msg}");
    }

    #[test]
    fn ingest_rejects_negative_precision() {
        let text = "problem_id,instance_id,algorithm,run_id,precision\n1,1,A,1,-0.5\n";
        assert!(ingest_performance(text).is_err());
    }

    #[test]
    fn sphere_is_easy_for_the_es() {
        let problem = make_problem(1, instance_seed(7, 1, 1), 2).unwrap();
        let precisions: Vec<f64> = (0..5)
            .map(|r| es_run(&problem, 2.0, 10_000, seed::derive(7, &[r])))
            .collect();
        let median = crate::linalg::median(&precisions);
        assert!(median < 1e-6, "median sphere precision {median}");
    }

    #[test]
    fn simulate_is_deterministic_and_complete() {
        let algorithms = default_algorithms();
        let a = simulate_performance(2, 2, &algorithms, 200, 3, 11).unwrap();
        let b = simulate_performance(2, 2, &algorithms, 200, 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), FUNCTION_COUNT * 2);
        assert_eq!(a.algorithms.len(), 3);
        assert!(a.values.iter().flatten().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn single_run_median_is_that_run() {
        let algorithms = vec![SyntheticAlgorithm {
            name: "only".into(),
            initial_step: 1.0,
        }];
        let table = simulate_performance(2, 1, &algorithms, 50, 1, 3).unwrap();
        assert_eq!(table.runs_per_cell, 1);
    }

    #[test]
    fn runs_csv_round_trips_through_ingest() {
        let algorithms = default_algorithms();
        let csv = simulate_runs_csv(2, 2, &algorithms, 100, 4, 5).unwrap();
        let ingested = ingest_performance(&csv).unwrap();
        let direct = simulate_performance(2, 2, &algorithms, 100, 4, 5).unwrap();
        assert_eq!(ingested.rows, direct.rows);
        for (a, b) in ingested.values.iter().zip(&direct.values) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn fold_plan_partitions_by_instance() {
        let rows: Vec<(usize, usize)> = (1..=24)
            .flat_map(|p| (1..=50).map(move |i| (p, i)))
            .collect();
        let plan = make_folds(&rows).unwrap();
        assert_eq!(plan.n_folds, 50);
        for fold in 1..=50 {
            let members = plan.fold_rows(fold);
            assert_eq!(members.len(), 24);
            for r in members {
                assert_eq!(rows[r].1, fold);
            }
        }
        // Folds partition all rows.
        let total: usize = (1..=50).map(|f| plan.fold_rows(f).len()).sum();
        assert_eq!(total, rows.len());
    }

    #[test]
    fn ragged_instance_sets_are_rejected() {
        let rows = vec![(1, 1), (1, 2), (2, 1)];
        assert!(make_folds(&rows).is_err());
    }

    #[test]
    fn dataset_drops_incomplete_feature_columns() {
        let mut features = toy_features(3, 2, 3);
        features.data[2][1] = None;
        let performance = toy_performance(3, 2, 2);
        let ds = build_dataset(&features, &performance, false).unwrap();
        assert_eq!(ds.feature_names, vec!["f.0", "f.2"]);
        assert_eq!(ds.dropped_features, vec!["f.1"]);
        assert_eq!(ds.n_folds, 2);
    }

    #[test]
    fn dataset_rejects_misaligned_rows() {
        let features = toy_features(3, 2, 2);
        let performance = toy_performance(2, 2, 2);
        assert!(build_dataset(&features, &performance, false).is_err());
    }

    #[test]
    fn log_transform_applies_to_targets() {
        let features = toy_features(2, 2, 2);
        let performance = toy_performance(2, 2, 1);
        let ds = build_dataset(&features, &performance, true).unwrap();
        let expect = (2.0f64 + LOG_EPSILON).log10();
        assert_eq!(ds.targets[0][0], expect);
    }

    #[test]
    fn cv_predicts_every_row_out_of_fold() {
        let features = toy_features(4, 3, 3);
        let performance = toy_performance(4, 3, 2);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let params = ForestParams {
            n_estimators: 3,
            ..ForestParams::default()
        };
        let preds = run_cv(&ds, Mode::Mtr, &params, 5).unwrap();
        assert_eq!(preds.values.len(), 12);
        assert!(preds.values.iter().all(|v| v.len() == 2));
    }

    #[test]
    fn refitting_a_fold_reproduces_its_predictions_bitwise() {
        let features = toy_features(4, 3, 3);
        let performance = toy_performance(4, 3, 2);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let params = ForestParams {
            n_estimators: 4,
            ..ForestParams::default()
        };
        for mode in [Mode::Str, Mode::Mtr] {
            let preds = run_cv(&ds, mode, &params, 9).unwrap();
            for fold in 1..=ds.n_folds {
                let models = fit_fold_models(&ds, mode, &params, 9, fold).unwrap();
                for r in 0..ds.rows.len() {
                    if ds.fold_of[r] != fold {
                        continue;
                    }
                    let again = predict_with_models(&models, &ds.features[r]).unwrap();
                    for (a, b) in again.iter().zip(&preds.values[r]) {
                        assert_eq!(a.to_bits(), b.to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn mae_arithmetic() {
        let features = toy_features(2, 2, 2);
        let performance = toy_performance(2, 2, 1);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let preds = PredictionTable {
            rows: ds.rows.clone(),
            target_names: ds.target_names.clone(),
            values: ds
                .targets
                .iter()
                .enumerate()
                .map(|(r, t)| vec![t[0] + if r % 2 == 0 { 1.0 } else { 2.0 }])
                .collect(),
        };
        let report = mae_report(&[(Mode::Str, preds)], &ds).unwrap();
        assert_eq!(report.mae[0][0][0], 1.5);
        assert_eq!(report.mae[1][0][0], 1.5);
        assert_eq!(report.mean[0][0], 1.5);
    }

    #[test]
    fn perfect_predictions_score_zero() {
        let features = toy_features(2, 2, 2);
        let performance = toy_performance(2, 2, 2);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let preds = PredictionTable {
            rows: ds.rows.clone(),
            target_names: ds.target_names.clone(),
            values: ds.targets.clone(),
        };
        let report = mae_report(&[(Mode::Str, preds)], &ds).unwrap();
        assert!(report.mae.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn report_csv_shape_matches_table_layout() {
        let features = toy_features(24, 2, 2);
        let performance = toy_performance(24, 2, 3);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let preds = PredictionTable {
            rows: ds.rows.clone(),
            target_names: ds.target_names.clone(),
            values: ds.targets.clone(),
        };
        let report = mae_report(&[(Mode::Str, preds.clone()), (Mode::Mtr, preds)], &ds).unwrap();
        let csv = report.to_csv();
        let parsed = Csv::parse(&csv).unwrap();
        assert_eq!(parsed.header.len(), 1 + 3 * 2);
        assert_eq!(parsed.rows.len(), 24 + 1);
        assert_eq!(parsed.rows.last().unwrap()[0], "Mean");
    }

    #[test]
    fn winner_flags_mark_the_smaller_mae() {
        let features = toy_features(2, 2, 2);
        let performance = toy_performance(2, 2, 1);
        let ds = build_dataset(&features, &performance, false).unwrap();
        let exact = PredictionTable {
            rows: ds.rows.clone(),
            target_names: ds.target_names.clone(),
            values: ds.targets.clone(),
        };
        let off = PredictionTable {
            rows: ds.rows.clone(),
            target_names: ds.target_names.clone(),
            values: ds.targets.iter().map(|t| vec![t[0] + 1.0]).collect(),
        };
        let report = mae_report(&[(Mode::Str, off), (Mode::Mtr, exact)], &ds).unwrap();
        assert_eq!(report.winners[0][0], Some(1));
    }

    #[test]
    fn metadata_round_trips() {
        let metadata = vec![AlgorithmMetadata {
            name: "CMA-ES_1".into(),
            modules: vec![
                ModuleSetting {
                    module: "Active update".into(),
                    setting: "FALSE".into(),
                },
                ModuleSetting {
                    module: "Elitism".into(),
                    setting: "TRUE".into(),
                },
                ModuleSetting {
                    module: "Step Size Adaptation".into(),
                    setting: "tpa".into(),
                },
            ],
        }];
        let json = metadata_to_json(&metadata);
        assert_eq!(metadata_from_json(&json).unwrap(), metadata);
    }
}
