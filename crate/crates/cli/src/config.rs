//! Run configuration: profile defaults, config-file overrides, flag
//! overrides. One committed JSON config reproduces one experiment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use ela_predict::ela::Group;
use ela_predict::error::{Error, Result};
use ela_predict::forest::{ForestParams, MaxFeatures};
use ela_predict::pipeline::{default_algorithms, Mode, SyntheticAlgorithm};

/// Built-in experiment scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Minutes-scale: D=2, 10 instances per problem, 30*D samples,
    /// 3 repetitions, 10 folds.
    Desk,
    /// Full-scale protocol: D=5, 50 instances, 50*D samples,
    /// 10 repetitions, 50 folds.
    Paper,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Profile> {
        match name {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::invalid_argument(format!(
                "unknown profile {other:?}; expected desk or paper"
            ))),
        }
    }
}

/// Forest hyper-parameters as they appear in config files; the RNG seed is
/// always derived from the master seed.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    pub n_estimators: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub max_features: Option<MaxFeatures>,
    pub bootstrap: Option<bool>,
}

impl ForestConfig {
    fn apply(&self, base: ForestParams) -> ForestParams {
        ForestParams {
            n_estimators: self.n_estimators.unwrap_or(base.n_estimators),
            max_depth: self.max_depth.unwrap_or(base.max_depth),
            min_samples_leaf: self.min_samples_leaf.unwrap_or(base.min_samples_leaf),
            max_features: self.max_features.unwrap_or(base.max_features),
            bootstrap: self.bootstrap.unwrap_or(base.bootstrap),
            seed: base.seed,
        }
    }
}

/// Raw config file; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub profile: Option<String>,
    pub dim: Option<usize>,
    pub instances_per_problem: Option<usize>,
    pub sample_multiplier: Option<usize>,
    pub repetitions: Option<usize>,
    pub maximin_sweeps: Option<usize>,
    pub feature_groups: Option<Vec<String>>,
    pub fold_count: Option<usize>,
    pub modes: Option<Vec<Mode>>,
    pub str_params: Option<ForestConfig>,
    pub mtr_params: Option<ForestConfig>,
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<SyntheticAlgorithm>>,
    pub budget: Option<usize>,
    pub runs_per_cell: Option<usize>,
    pub log_targets: Option<bool>,
    pub local_problem: Option<usize>,
    pub local_instance: Option<usize>,
    pub top_k: Option<usize>,
    pub beeswarm_top: Option<usize>,
    pub tsne_perplexity: Option<f64>,
    pub tsne_iterations: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub features_path: Option<PathBuf>,
    pub performance_path: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::validation(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved configuration every command runs from.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dim: usize,
    pub instances_per_problem: usize,
    pub sample_multiplier: usize,
    pub repetitions: usize,
    pub maximin_sweeps: usize,
    pub feature_groups: Vec<Group>,
    pub fold_count: usize,
    pub modes: Vec<Mode>,
    pub str_params: ForestParams,
    pub mtr_params: ForestParams,
    pub seed: u64,
    pub algorithms: Vec<SyntheticAlgorithm>,
    pub budget: usize,
    pub runs_per_cell: usize,
    pub log_targets: bool,
    pub local_problem: usize,
    pub local_instance: usize,
    pub top_k: usize,
    pub beeswarm_top: usize,
    pub tsne_perplexity: f64,
    pub tsne_iterations: usize,
    pub out_dir: PathBuf,
    pub features_path: PathBuf,
    pub performance_path: PathBuf,
}

impl RunConfig {
    fn profile_base(profile: Profile) -> RunConfig {
        let str_params = ForestParams {
            n_estimators: 25,
            max_depth: 25,
            ..ForestParams::default()
        };
        let mtr_params = ForestParams {
            n_estimators: 75,
            max_depth: 25,
            ..ForestParams::default()
        };
        let common = RunConfig {
            dim: 2,
            instances_per_problem: 10,
            sample_multiplier: 30,
            repetitions: 3,
            maximin_sweeps: 1000,
            feature_groups: Group::ALL.to_vec(),
            fold_count: 10,
            modes: vec![Mode::Str, Mode::Mtr],
            str_params,
            mtr_params,
            seed: 42,
            algorithms: default_algorithms(),
            budget: 2000,
            runs_per_cell: 10,
            log_targets: false,
            local_problem: 4,
            local_instance: 1,
            top_k: 10,
            beeswarm_top: 20,
            tsne_perplexity: 30.0,
            tsne_iterations: 1000,
            out_dir: PathBuf::from("out"),
            features_path: PathBuf::new(),
            performance_path: PathBuf::new(),
        };
        match profile {
            Profile::Desk => common,
            Profile::Paper => RunConfig {
                dim: 5,
                instances_per_problem: 50,
                sample_multiplier: 50,
                repetitions: 10,
                fold_count: 50,
                budget: 50_000,
                ..common
            },
        }
    }

    /// Resolve profile defaults, then config-file values, then flag values.
    pub fn resolve(
        file: &ConfigFile,
        flag_profile: Option<Profile>,
        flag_seed: Option<u64>,
        flag_out_dir: Option<PathBuf>,
    ) -> Result<RunConfig> {
        let profile = match (flag_profile, &file.profile) {
            (Some(p), _) => p,
            (None, Some(name)) => Profile::parse(name)?,
            (None, None) => Profile::Desk,
        };
        let mut cfg = RunConfig::profile_base(profile);

        if let Some(v) = file.dim {
            cfg.dim = v;
        }
        if let Some(v) = file.instances_per_problem {
            cfg.instances_per_problem = v;
        }
        if let Some(v) = file.sample_multiplier {
            cfg.sample_multiplier = v;
        }
        if let Some(v) = file.repetitions {
            cfg.repetitions = v;
        }
        if let Some(v) = file.maximin_sweeps {
            cfg.maximin_sweeps = v;
        }
        if let Some(groups) = &file.feature_groups {
            cfg.feature_groups = groups
                .iter()
                .map(|g| Group::parse(g))
                .collect::<Result<Vec<Group>>>()?;
        }
        if let Some(v) = file.fold_count {
            cfg.fold_count = v;
        }
        if let Some(modes) = &file.modes {
            cfg.modes = modes.clone();
        }
        if let Some(p) = &file.str_params {
            cfg.str_params = p.apply(cfg.str_params);
        }
        if let Some(p) = &file.mtr_params {
            cfg.mtr_params = p.apply(cfg.mtr_params);
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(a) = &file.algorithms {
            cfg.algorithms = a.clone();
        }
        if let Some(v) = file.budget {
            cfg.budget = v;
        }
        if let Some(v) = file.runs_per_cell {
            cfg.runs_per_cell = v;
        }
        if let Some(v) = file.log_targets {
            cfg.log_targets = v;
        }
        if let Some(v) = file.local_problem {
            cfg.local_problem = v;
        }
        if let Some(v) = file.local_instance {
            cfg.local_instance = v;
        }
        if let Some(v) = file.top_k {
            cfg.top_k = v;
        }
        if let Some(v) = file.beeswarm_top {
            cfg.beeswarm_top = v;
        }
        if let Some(v) = file.tsne_perplexity {
            cfg.tsne_perplexity = v;
        }
        if let Some(v) = file.tsne_iterations {
            cfg.tsne_iterations = v;
        }
        if let Some(v) = &file.out_dir {
            cfg.out_dir = v.clone();
        }

        if let Some(v) = flag_seed {
            cfg.seed = v;
        }
        if let Some(v) = flag_out_dir {
            cfg.out_dir = v;
        }

        cfg.features_path = file
            .features_path
            .clone()
            .unwrap_or_else(|| cfg.out_dir.join("features.csv"));
        cfg.performance_path = file
            .performance_path
            .clone()
            .unwrap_or_else(|| cfg.out_dir.join("performance_runs.csv"));

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::validation("dim must be >= 2"));
        }
        if self.instances_per_problem < 1 {
            return Err(Error::validation("instances_per_problem must be >= 1"));
        }
        if self.fold_count != self.instances_per_problem {
            return Err(Error::validation(format!(
                "fold_count {} must equal instances_per_problem {} (leave-one-instance-out)",
                self.fold_count, self.instances_per_problem
            )));
        }
        if self.sample_multiplier < 1 || self.repetitions < 1 {
            return Err(Error::validation(
                "sample_multiplier and repetitions must be >= 1",
            ));
        }
        if self.feature_groups.is_empty() {
            return Err(Error::validation("feature_groups must not be empty"));
        }
        if self.modes.is_empty() {
            return Err(Error::validation("modes must not be empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::validation("algorithms must not be empty"));
        }
        if !(1..=24).contains(&self.local_problem) {
            return Err(Error::validation("local_problem must be in 1..=24"));
        }
        if !(1..=self.instances_per_problem).contains(&self.local_instance) {
            return Err(Error::validation(format!(
                "local_instance must be in 1..={}",
                self.instances_per_problem
            )));
        }
        self.str_params.validate()?;
        self.mtr_params.validate()?;
        if self.budget < 1 || self.runs_per_cell < 1 {
            return Err(Error::validation("budget and runs_per_cell must be >= 1"));
        }
        Ok(())
    }

    /// Forest parameters for a learning mode.
    pub fn params_for(&self, mode: Mode) -> &ForestParams {
        match mode {
            Mode::Str => &self.str_params,
            Mode::Mtr => &self.mtr_params,
        }
    }
}
