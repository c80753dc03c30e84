//! Exploratory landscape analysis features.
//!
//! Ten feature groups are implemented: `cm_angle`, `cm_grad`, `disp`,
//! `ela_conv`, `ela_curv`, `ela_distr`, `ela_level`, `ela_meta`, `ic` and
//! `nbc`. Two of them (`ela_conv`, `ela_curv`) need extra objective
//! evaluations beyond the initial design and are flagged evaluator-backed in
//! the catalog. The catalog below is the frozen manifest: feature names,
//! group membership and ordering are fixed by it.
//!
//! `ela_local` is intentionally absent: it requires batches of local-search
//! runs, which puts it outside the cheap, one-design budget the rest of the
//! catalog works with.

pub mod cell;
pub mod disp;
pub mod distr;
pub mod evaluator;
pub mod ic;
pub mod level;
pub mod meta;
pub mod nbc;

use serde::{Deserialize, Serialize};

use crate::bbob::ProblemInstance;
use crate::error::{Error, Result};
use crate::sampling::SampleSet;
use crate::seed;
use crate::table::{self, Csv};

/// Feature group identifiers, in catalog order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    CmAngle,
    CmGrad,
    Disp,
    ElaConv,
    ElaCurv,
    ElaDistr,
    ElaLevel,
    ElaMeta,
    Ic,
    Nbc,
}

impl Group {
    pub const ALL: [Group; 10] = [
        Group::CmAngle,
        Group::CmGrad,
        Group::Disp,
        Group::ElaConv,
        Group::ElaCurv,
        Group::ElaDistr,
        Group::ElaLevel,
        Group::ElaMeta,
        Group::Ic,
        Group::Nbc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::CmAngle => "cm_angle",
            Group::CmGrad => "cm_grad",
            Group::Disp => "disp",
            Group::ElaConv => "ela_conv",
            Group::ElaCurv => "ela_curv",
            Group::ElaDistr => "ela_distr",
            Group::ElaLevel => "ela_level",
            Group::ElaMeta => "ela_meta",
            Group::Ic => "ic",
            Group::Nbc => "nbc",
        }
    }

    pub fn parse(name: &str) -> Result<Group> {
        Group::ALL
            .into_iter()
            .find(|g| g.name() == name)
            .ok_or_else(|| Error::invalid_argument(format!("unknown feature group {name:?}")))
    }

    /// True for groups that evaluate extra points beyond the initial design.
    pub fn needs_evaluator(self) -> bool {
        matches!(self, Group::ElaConv | Group::ElaCurv)
    }
}

/// One catalog slot: a feature name and its group.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub group: Group,
    pub needs_evaluator: bool,
}

macro_rules! entries {
    ($group:expr, [$($name:literal),+ $(,)?]) => {
        [$(CatalogEntry { name: $name, group: $group, needs_evaluator: $group.needs_evaluator() }),+]
    };
}

/// The frozen feature catalog, in output order.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut all = Vec::new();
    all.extend(entries!(
        Group::CmAngle,
        [
            "cm_angle.dist_ctr2best.mean",
            "cm_angle.dist_ctr2best.sd",
            "cm_angle.dist_ctr2worst.mean",
            "cm_angle.dist_ctr2worst.sd",
            "cm_angle.angle.mean",
            "cm_angle.angle.sd",
            "cm_angle.y_ratio_best2worst.mean",
            "cm_angle.y_ratio_best2worst.sd",
        ]
    ));
    all.extend(entries!(
        Group::CmGrad,
        ["cm_grad.grad_homo.mean", "cm_grad.grad_homo.sd"]
    ));
    all.extend(entries!(
        Group::Disp,
        [
            "disp.ratio_mean_02",
            "disp.ratio_mean_05",
            "disp.ratio_mean_10",
            "disp.ratio_mean_25",
            "disp.ratio_median_02",
            "disp.ratio_median_05",
            "disp.ratio_median_10",
            "disp.ratio_median_25",
            "disp.diff_mean_02",
            "disp.diff_mean_05",
            "disp.diff_mean_10",
            "disp.diff_mean_25",
            "disp.diff_median_02",
            "disp.diff_median_05",
            "disp.diff_median_10",
            "disp.diff_median_25",
        ]
    ));
    all.extend(entries!(
        Group::ElaConv,
        ["ela_conv.conv_prob", "ela_conv.lin_prob", "ela_conv.lin_dev.orig"]
    ));
    all.extend(entries!(
        Group::ElaCurv,
        [
            "ela_curv.grad_norm.min",
            "ela_curv.grad_norm.max",
            "ela_curv.grad_norm.mean",
            "ela_curv.grad_norm.sd",
            "ela_curv.grad_scale.min",
            "ela_curv.grad_scale.max",
            "ela_curv.grad_scale.mean",
            "ela_curv.grad_scale.sd",
            "ela_curv.hessian_cond.min",
            "ela_curv.hessian_cond.max",
            "ela_curv.hessian_cond.mean",
            "ela_curv.hessian_cond.sd",
        ]
    ));
    all.extend(entries!(
        Group::ElaDistr,
        [
            "ela_distr.skewness",
            "ela_distr.kurtosis",
            "ela_distr.number_of_peaks",
        ]
    ));
    all.extend(entries!(
        Group::ElaLevel,
        [
            "ela_level.mmce_lda_10",
            "ela_level.mmce_qda_10",
            "ela_level.lda_qda_10",
            "ela_level.mmce_lda_25",
            "ela_level.mmce_qda_25",
            "ela_level.lda_qda_25",
            "ela_level.mmce_lda_50",
            "ela_level.mmce_qda_50",
            "ela_level.lda_qda_50",
        ]
    ));
    all.extend(entries!(
        Group::ElaMeta,
        [
            "ela_meta.lin_simple.adj_r2",
            "ela_meta.lin_simple.intercept",
            "ela_meta.lin_simple.coef.min",
            "ela_meta.lin_simple.coef.max",
            "ela_meta.lin_simple.coef.max_by_min",
            "ela_meta.lin_w_interact.adj_r2",
            "ela_meta.quad_simple.adj_r2",
            "ela_meta.quad_simple.cond",
            "ela_meta.quad_w_interact.adj_r2",
        ]
    ));
    all.extend(entries!(
        Group::Ic,
        ["ic.h.max", "ic.eps.s", "ic.eps.max", "ic.eps.ratio", "ic.m0"]
    ));
    all.extend(entries!(
        Group::Nbc,
        [
            "nbc.nn_nb.sd_ratio",
            "nbc.nn_nb.mean_ratio",
            "nbc.nn_nb.cor",
            "nbc.dist_ratio.coeff_var",
            "nbc.nb_fitness.cor",
        ]
    ));
    all
}

/// Catalog manifest as a JSON string.
pub fn catalog_manifest_json() -> String {
    serde_json::to_string_pretty(&catalog()).expect("catalog serializes")
}

/// A named feature value; `None` marks a degenerate (missing) computation.
pub type FeatureValue = (&'static str, Option<f64>);

/// Ordered named feature values for one computation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<FeatureValue>,
}

impl FeatureVector {
    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Compute the requested groups for one evaluated sample, in catalog order.
///
/// Deterministic given the problem and the sample's seed; group-internal
/// randomness (information-content tour start, convexity pairs, curvature
/// subset) derives from `sample.seed`.
pub fn compute_features(
    problem: &ProblemInstance,
    sample: &SampleSet,
    groups: &[Group],
) -> Result<FeatureVector> {
    if sample.values.len() != sample.points.len() {
        return Err(Error::invalid_state("sample has no objective values"));
    }
    let mut requested = groups.to_vec();
    requested.sort();
    requested.dedup();

    let mut entries = Vec::new();
    for group in Group::ALL {
        if !requested.contains(&group) {
            continue;
        }
        let values = compute_group(problem, sample, group)?;
        entries.extend(values);
    }
    Ok(FeatureVector { entries })
}

fn compute_group(
    problem: &ProblemInstance,
    sample: &SampleSet,
    group: Group,
) -> Result<Vec<FeatureValue>> {
    let points = &sample.points;
    let values = &sample.values;
    match group {
        Group::CmAngle => cell::cm_angle(points, values, sample.bounds, cell::DEFAULT_BLOCKS),
        Group::CmGrad => cell::cm_grad(points, values, sample.bounds, cell::DEFAULT_BLOCKS),
        Group::Disp => disp::disp(points, values),
        Group::ElaConv => evaluator::ela_conv(
            |x| problem.value(x),
            points,
            values,
            evaluator::DEFAULT_PAIRS,
            seed::derive(sample.seed, &[0xC0]),
        ),
        Group::ElaCurv => evaluator::ela_curv(
            |x| problem.value(x),
            points,
            evaluator::DEFAULT_SUBSET,
            evaluator::DEFAULT_STEP,
            seed::derive(sample.seed, &[0xC1]),
        ),
        Group::ElaDistr => distr::ela_distr(values),
        Group::ElaLevel => level::ela_level(points, values),
        Group::ElaMeta => meta::ela_meta(points, values),
        Group::Ic => ic::ic(points, values, seed::derive(sample.seed, &[0x1C])),
        Group::Nbc => nbc::nbc(points, values),
    }
}

/// Per-feature median over repeated computations. Missing values are
/// excluded; a feature stays missing only when every repetition missed it.
pub fn aggregate_median(repetitions: &[FeatureVector]) -> Result<FeatureVector> {
    let first = repetitions
        .first()
        .ok_or_else(|| Error::invalid_argument("aggregate_median needs >= 1 repetition"))?;
    let names = first.names();
    for rep in repetitions.iter().skip(1) {
        if rep.names() != names {
            return Err(Error::invalid_argument(
                "repetitions have inconsistent feature names",
            ));
        }
    }
    let entries = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let present: Vec<f64> = repetitions
                .iter()
                .filter_map(|rep| rep.entries[i].1)
                .collect();
            let value = if present.is_empty() {
                None
            } else {
                Some(crate::linalg::median(&present))
            };
            (*name, value)
        })
        .collect();
    Ok(FeatureVector { entries })
}

/// Feature matrix: one row per (problem, instance), columns in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    /// Row labels `(problem_id, instance_id)`.
    pub rows: Vec<(usize, usize)>,
    pub feature_names: Vec<String>,
    /// `data[row][col]`, `None` for missing cells.
    pub data: Vec<Vec<Option<f64>>>,
}

impl FeatureMatrix {
    pub fn to_csv(&self) -> String {
        let mut header = vec!["problem_id".to_string(), "instance_id".to_string()];
        header.extend(self.feature_names.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .zip(&self.data)
            .map(|(&(p, i), row)| {
                let mut fields = vec![p.to_string(), i.to_string()];
                fields.extend(
                    row.iter()
                        .map(|v| v.map(table::fmt_f64).unwrap_or_default()),
                );
                fields
            })
            .collect();
        table::write_csv(&header, &rows)
    }

    pub fn from_csv(text: &str) -> Result<FeatureMatrix> {
        let csv = Csv::parse(text)?;
        if csv.header.len() < 3
            || csv.header[0] != "problem_id"
            || csv.header[1] != "instance_id"
        {
            return Err(Error::parse(
                "feature CSV must start with problem_id,instance_id",
            ));
        }
        let feature_names = csv.header[2..].to_vec();
        let mut rows = Vec::with_capacity(csv.rows.len());
        let mut data = Vec::with_capacity(csv.rows.len());
        for fields in &csv.rows {
            rows.push((table::parse_usize(&fields[0])?, table::parse_usize(&fields[1])?));
            let vals: Result<Vec<Option<f64>>> =
                fields[2..].iter().map(|f| table::parse_f64_opt(f)).collect();
            data.push(vals?);
        }
        Ok(FeatureMatrix {
            rows,
            feature_names,
            data,
        })
    }
}
