//! The five batch commands: features, simulate, ingest, evaluate, explain.
//!
//! Every command is deterministic given (config, seed) and writes its
//! artifacts atomically (temp file + rename), so a rerun with the same seed
//! produces byte-identical outputs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use ela_predict::analytics::{
    beeswarm_csv, beeswarm_export, global_importance, intersect, local_explanation,
    mean_importance, representation_csv, shapley_representation, top_k, tsne, tsne_csv,
    BeeswarmRow, GlobalImportance, LocalExplanation, RepresentationVector, TsneResult,
    VennReport,
};
use ela_predict::bbob::{make_problem, InstanceRecord, FUNCTION_COUNT};
use ela_predict::ela::{aggregate_median, catalog_manifest_json, compute_features, FeatureMatrix};
use ela_predict::error::{Error, Result};
use ela_predict::pipeline::{
    build_dataset, fit_fold_models, ingest_performance, instance_seed, mae_report,
    metadata_to_json, predict_with_models, run_cv, simulate_runs_csv, AlgorithmMetadata,
    Dataset, Mode, ModuleSetting, PredictionTable,
};
use ela_predict::sampling::sample_and_evaluate_with;
use ela_predict::seed;
use ela_predict::shap::{shap_models, ShapExplanation};
use ela_predict::table;

use crate::config::RunConfig;

/// Local-accuracy gate applied to every explanation the pipeline emits.
const ACCURACY_TOL: f64 = 1e-9;

/// Write atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

/// Compute the feature matrix: per (problem, instance), `repetitions` seeded
/// samples reduced by the per-feature median. Writes the matrix CSV, the
/// catalog manifest and the instance catalog.
pub fn cmd_features(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let matrix = compute_feature_matrix(cfg)?;
    let instances = instance_catalog(cfg)?;

    let features_path = out_path(cfg, "features.csv");
    atomic_write(&features_path, &matrix.to_csv())?;
    let catalog_path = out_path(cfg, "catalog.json");
    atomic_write(&catalog_path, &catalog_manifest_json())?;
    let instances_path = out_path(cfg, "instances.json");
    atomic_write(
        &instances_path,
        &serde_json::to_string_pretty(&instances).expect("instance catalog serializes"),
    )?;
    Ok(vec![features_path, catalog_path, instances_path])
}

pub fn compute_feature_matrix(cfg: &RunConfig) -> Result<FeatureMatrix> {
    let cells: Vec<(usize, usize)> = (1..=FUNCTION_COUNT)
        .flat_map(|p| (1..=cfg.instances_per_problem).map(move |i| (p, i)))
        .collect();
    let rows: Result<Vec<Vec<Option<f64>>>> = cells
        .par_iter()
        .map(|&(p, i)| {
            let problem = make_problem(p, instance_seed(cfg.seed, p, i), cfg.dim)?;
            let repetitions: Result<Vec<_>> = (1..=cfg.repetitions)
                .map(|rep| {
                    let sample_seed = seed::derive(cfg.seed, &[0x5A, p as u64, i as u64, rep as u64]);
                    let sample = sample_and_evaluate_with(
                        &problem,
                        cfg.sample_multiplier,
                        cfg.maximin_sweeps,
                        sample_seed,
                    )?;
                    compute_features(&problem, &sample, &cfg.feature_groups)
                })
                .collect();
            let median = aggregate_median(&repetitions?)?;
            Ok(median.entries.iter().map(|(_, v)| *v).collect())
        })
        .collect();
    let rows = rows?;

    // Column names come from one computation; all rows share them.
    let reference = {
        let problem = make_problem(1, instance_seed(cfg.seed, 1, 1), cfg.dim)?;
        let sample_seed = seed::derive(cfg.seed, &[0x5A, 1, 1, 1]);
        let sample = sample_and_evaluate_with(
            &problem,
            cfg.sample_multiplier,
            cfg.maximin_sweeps,
            sample_seed,
        )?;
        compute_features(&problem, &sample, &cfg.feature_groups)?
    };
    Ok(FeatureMatrix {
        rows: cells,
        feature_names: reference.names().iter().map(|s| s.to_string()).collect(),
        data: rows,
    })
}

fn instance_catalog(cfg: &RunConfig) -> Result<Vec<InstanceRecord>> {
    let mut out = Vec::new();
    for p in 1..=FUNCTION_COUNT {
        for i in 1..=cfg.instances_per_problem {
            out.push(make_problem(p, instance_seed(cfg.seed, p, i), cfg.dim)?.record());
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct PerformanceMeta {
    budget: usize,
    runs_per_cell: usize,
    algorithms: Vec<ela_predict::pipeline::SyntheticAlgorithm>,
}

/// Run the synthetic optimizer portfolio and write the per-run CSV plus
/// metadata and Table-style algorithm descriptions.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let csv = simulate_runs_csv(
        cfg.dim,
        cfg.instances_per_problem,
        &cfg.algorithms,
        cfg.budget,
        cfg.runs_per_cell,
        cfg.seed,
    )?;
    let runs_path = out_path(cfg, "performance_runs.csv");
    atomic_write(&runs_path, &csv)?;

    let meta = PerformanceMeta {
        budget: cfg.budget,
        runs_per_cell: cfg.runs_per_cell,
        algorithms: cfg.algorithms.clone(),
    };
    let meta_path = out_path(cfg, "performance_meta.json");
    atomic_write(
        &meta_path,
        &serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )?;

    let metadata: Vec<AlgorithmMetadata> = cfg
        .algorithms
        .iter()
        .map(|a| AlgorithmMetadata {
            name: a.name.clone(),
            modules: vec![
                ModuleSetting {
                    module: "Optimizer".into(),
                    setting: "(1+1)-ES".into(),
                },
                ModuleSetting {
                    module: "Step Size Adaptation".into(),
                    setting: "1/5 success rule".into(),
                },
                ModuleSetting {
                    module: "Initial Step Size".into(),
                    setting: format!("{}", a.initial_step),
                },
            ],
        })
        .collect();
    let metadata_path = out_path(cfg, "algorithms.json");
    atomic_write(&metadata_path, &metadata_to_json(&metadata))?;
    Ok(vec![runs_path, meta_path, metadata_path])
}

/// Validate a per-run performance CSV and write the medianized table.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&cfg.performance_path)?;
    let table = ingest_performance(&text)?;
    let table_path = out_path(cfg, "performance_table.csv");
    atomic_write(&table_path, &table.to_csv())?;
    Ok(vec![table_path])
}

fn load_dataset(cfg: &RunConfig) -> Result<(FeatureMatrix, Dataset)> {
    let features_text = std::fs::read_to_string(&cfg.features_path).map_err(|e| {
        Error::validation(format!(
            "cannot read features {}: {e}",
            cfg.features_path.display()
        ))
    })?;
    let features = FeatureMatrix::from_csv(&features_text)?;
    let runs_text = std::fs::read_to_string(&cfg.performance_path).map_err(|e| {
        Error::validation(format!(
            "cannot read performance {}: {e}",
            cfg.performance_path.display()
        ))
    })?;
    let performance = ingest_performance(&runs_text)?;
    let dataset = build_dataset(&features, &performance, cfg.log_targets)?;
    Ok((features, dataset))
}

fn predictions_csv(table: &PredictionTable) -> String {
    let mut header = vec!["problem_id".to_string(), "instance_id".to_string()];
    header.extend(table.target_names.iter().cloned());
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .zip(&table.values)
        .map(|(&(p, i), vals)| {
            let mut row = vec![p.to_string(), i.to_string()];
            row.extend(vals.iter().map(|v| table::fmt_f64(*v)));
            row
        })
        .collect();
    table::write_csv(&header, &rows)
}

#[derive(Serialize)]
struct DatasetInfo {
    rows: usize,
    retained_features: usize,
    dropped_features: Vec<String>,
    targets: Vec<String>,
    folds: usize,
}

/// Run cross validation in every configured mode and emit the MAE report.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (_, dataset) = load_dataset(cfg)?;
    let mut paths = Vec::new();
    let mut predictions = Vec::new();
    for &mode in &cfg.modes {
        let table = run_cv(&dataset, mode, cfg.params_for(mode), cfg.seed)?;
        let path = out_path(cfg, &format!("predictions_{}.csv", mode.name().to_lowercase()));
        atomic_write(&path, &predictions_csv(&table))?;
        paths.push(path);
        predictions.push((mode, table));
    }
    let report = mae_report(&predictions, &dataset)?;
    let csv_path = out_path(cfg, "mae_report.csv");
    atomic_write(&csv_path, &report.to_csv())?;
    let json_path = out_path(cfg, "mae_report.json");
    atomic_write(&json_path, &report.to_json())?;
    let info = DatasetInfo {
        rows: dataset.rows.len(),
        retained_features: dataset.feature_names.len(),
        dropped_features: dataset.dropped_features.clone(),
        targets: dataset.target_names.clone(),
        folds: dataset.n_folds,
    };
    let info_path = out_path(cfg, "dataset_info.json");
    atomic_write(
        &info_path,
        &serde_json::to_string_pretty(&info).expect("info serializes"),
    )?;
    paths.extend([csv_path, json_path, info_path]);
    Ok(paths)
}

/// Everything the explain command derives for one learning mode.
pub struct ModeArtifacts {
    pub mode: Mode,
    pub mean_importance: GlobalImportance,
    pub top_sets: Vec<(String, Vec<String>)>,
    pub venn: Option<VennReport>,
    /// Representation vectors expanded to the full feature catalog of the
    /// run (zeros for dropped features), ordered by (algorithm, fold).
    pub representations: Vec<RepresentationVector>,
    pub tsne_labels: Vec<(String, usize)>,
    pub tsne: TsneResult,
    pub beeswarm: Vec<BeeswarmRow>,
    pub local: LocalExplanation,
    pub local_row: (usize, usize),
    /// Largest local-accuracy violation across every explanation produced.
    pub max_accuracy_gap: f64,
}

struct FoldOutput {
    importance: GlobalImportance,
    representations: Vec<RepresentationVector>,
    first_fold_explanations: Option<(Vec<usize>, Vec<ShapExplanation>)>,
    local: Option<ShapExplanation>,
    max_gap: f64,
}

/// Build the full explanation artifact set for one mode.
pub fn explain_mode(
    cfg: &RunConfig,
    dataset: &Dataset,
    catalog_names: &[String],
    mode: Mode,
) -> Result<ModeArtifacts> {
    let params = cfg.params_for(mode);
    let local_row_idx = dataset
        .rows
        .iter()
        .position(|&(p, i)| p == cfg.local_problem && i == cfg.local_instance)
        .ok_or_else(|| {
            Error::invalid_argument(format!(
                "problem {} instance {} is not in the dataset",
                cfg.local_problem, cfg.local_instance
            ))
        })?;
    let local_fold = dataset.fold_of[local_row_idx];

    let folds: Vec<usize> = (1..=dataset.n_folds).collect();
    let per_fold: Result<Vec<FoldOutput>> = folds
        .par_iter()
        .map(|&fold| {
            let models = fit_fold_models(dataset, mode, params, cfg.seed, fold)?;
            let train_rows: Vec<usize> = (0..dataset.rows.len())
                .filter(|&r| dataset.fold_of[r] != fold)
                .collect();
            let mut max_gap = 0.0f64;
            let mut explanations = Vec::with_capacity(train_rows.len());
            for &r in &train_rows {
                let exp = shap_models(&models, &dataset.features[r])?;
                let prediction = predict_with_models(&models, &dataset.features[r])?;
                max_gap = max_gap.max(exp.accuracy_gap(&prediction));
                explanations.push(exp);
            }
            if max_gap > ACCURACY_TOL {
                return Err(Error::invalid_state(format!(
                    "local accuracy violated in fold {fold}: gap {max_gap}"
                )));
            }
            let importance = global_importance(&explanations, &dataset.feature_names)?;
            let representations: Result<Vec<RepresentationVector>> = dataset
                .target_names
                .iter()
                .enumerate()
                .map(|(t, name)| shapley_representation(&explanations, t, name, fold))
                .collect();
            let local = if fold == local_fold {
                let exp = shap_models(&models, &dataset.features[local_row_idx])?;
                let prediction = predict_with_models(&models, &dataset.features[local_row_idx])?;
                if exp.accuracy_gap(&prediction) > ACCURACY_TOL {
                    return Err(Error::invalid_state(
                        "local accuracy violated on the local-explanation row",
                    ));
                }
                Some(exp)
            } else {
                None
            };
            Ok(FoldOutput {
                importance,
                representations: representations?,
                first_fold_explanations: (fold == 1).then_some((train_rows, explanations)),
                local,
                max_gap,
            })
        })
        .collect();
    let per_fold = per_fold?;

    let max_accuracy_gap = per_fold.iter().map(|f| f.max_gap).fold(0.0, f64::max);
    let fold_importances: Vec<GlobalImportance> =
        per_fold.iter().map(|f| f.importance.clone()).collect();
    let mean_imp = mean_importance(&fold_importances)?;
    let k = cfg.top_k.min(dataset.feature_names.len());
    let tops = top_k(&mean_imp, k)?;
    let top_sets: Vec<(String, Vec<String>)> = dataset
        .target_names
        .iter()
        .cloned()
        .zip(tops)
        .collect();
    let venn = if (2..=3).contains(&top_sets.len()) {
        Some(intersect(&top_sets)?)
    } else {
        None
    };

    // Expand representation vectors from retained columns to the full
    // catalog: dropped features get an exact zero attribution.
    let col_of: Vec<usize> = dataset
        .feature_names
        .iter()
        .map(|name| {
            catalog_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::invalid_state(format!("feature {name} not in catalog")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut representations = Vec::new();
    let mut tsne_labels = Vec::new();
    for (t, name) in dataset.target_names.iter().enumerate() {
        for fold_out in &per_fold {
            let rep = &fold_out.representations[t];
            let mut expanded = vec![0.0; catalog_names.len()];
            for (i, &c) in col_of.iter().enumerate() {
                expanded[c] = rep.values[i];
            }
            representations.push(RepresentationVector {
                algorithm: name.clone(),
                fold: rep.fold,
                values: expanded,
            });
            tsne_labels.push((name.clone(), rep.fold));
        }
    }
    let vectors: Vec<Vec<f64>> = representations.iter().map(|r| r.values.clone()).collect();
    let n = vectors.len();
    let perplexity = cfg.tsne_perplexity.min((n as f64 - 1.0) / 3.0 - 1e-9);
    let embedding = tsne(&vectors, perplexity, cfg.tsne_iterations, cfg.seed)?;

    let (beeswarm_rows, beeswarm_exps) = per_fold
        .iter()
        .find_map(|f| f.first_fold_explanations.as_ref())
        .map(|(rows, exps)| (rows.clone(), exps))
        .ok_or_else(|| Error::invalid_state("fold 1 produced no explanations"))?;
    let feature_values: Vec<Vec<f64>> = beeswarm_rows
        .iter()
        .map(|&r| dataset.features[r].clone())
        .collect();
    let beeswarm = beeswarm_export(
        beeswarm_exps,
        &feature_values,
        &dataset.feature_names,
        cfg.beeswarm_top,
    )?;

    let local_exp = per_fold
        .iter()
        .find_map(|f| f.local.clone())
        .ok_or_else(|| Error::invalid_state("local explanation fold missing"))?;
    let local = local_explanation(&local_exp, k)?;

    Ok(ModeArtifacts {
        mode,
        mean_importance: mean_imp,
        top_sets,
        venn,
        representations,
        tsne_labels,
        tsne: embedding,
        beeswarm,
        local,
        local_row: (cfg.local_problem, cfg.local_instance),
        max_accuracy_gap,
    })
}

#[derive(Serialize)]
struct LocalExport<'a> {
    problem_id: usize,
    instance_id: usize,
    target_names: &'a [String],
    base: &'a [f64],
    contributions: Vec<Vec<(String, f64)>>,
    rest: &'a [f64],
}

/// Emit every explanation artifact for every configured mode.
pub fn cmd_explain(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let (features, dataset) = load_dataset(cfg)?;
    let mut paths = Vec::new();
    for &mode in &cfg.modes {
        let artifacts = explain_mode(cfg, &dataset, &features.feature_names, mode)?;
        let tag = mode.name().to_lowercase();

        let importance_path = out_path(cfg, &format!("importance_{tag}.csv"));
        atomic_write(&importance_path, &artifacts.mean_importance.to_csv())?;
        paths.push(importance_path);

        let top_path = out_path(cfg, &format!("top_features_{tag}.json"));
        atomic_write(
            &top_path,
            &serde_json::to_string_pretty(&artifacts.top_sets).expect("top sets serialize"),
        )?;
        paths.push(top_path);

        if let Some(venn) = &artifacts.venn {
            let venn_path = out_path(cfg, &format!("venn_{tag}.json"));
            atomic_write(&venn_path, &venn.to_json())?;
            paths.push(venn_path);
        }

        let rep_path = out_path(cfg, &format!("representation_{tag}.csv"));
        atomic_write(
            &rep_path,
            &representation_csv(&artifacts.representations, &features.feature_names),
        )?;
        paths.push(rep_path);

        let tsne_path = out_path(cfg, &format!("tsne_{tag}.csv"));
        atomic_write(&tsne_path, &tsne_csv(&artifacts.tsne_labels, &artifacts.tsne))?;
        paths.push(tsne_path);

        let beeswarm_path = out_path(cfg, &format!("beeswarm_{tag}.csv"));
        atomic_write(&beeswarm_path, &beeswarm_csv(&artifacts.beeswarm))?;
        paths.push(beeswarm_path);

        let local_csv_path = out_path(cfg, &format!("local_{tag}.csv"));
        atomic_write(
            &local_csv_path,
            &artifacts.local.to_csv(&dataset.feature_names),
        )?;
        paths.push(local_csv_path);

        let local_export = LocalExport {
            problem_id: artifacts.local_row.0,
            instance_id: artifacts.local_row.1,
            target_names: &artifacts.local.target_names,
            base: &artifacts.local.base,
            contributions: artifacts
                .local
                .contributions
                .iter()
                .map(|per_target| {
                    per_target
                        .iter()
                        .map(|(f, phi)| (dataset.feature_names[*f].clone(), *phi))
                        .collect()
                })
                .collect(),
            rest: &artifacts.local.rest,
        };
        let local_json_path = out_path(cfg, &format!("local_{tag}.json"));
        atomic_write(
            &local_json_path,
            &serde_json::to_string_pretty(&local_export).expect("local serializes"),
        )?;
        paths.push(local_json_path);
    }
    Ok(paths)
}
