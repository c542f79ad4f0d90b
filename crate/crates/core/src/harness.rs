//! Leave-one-out evaluation of the selection stack against routing
//! baselines, plus a synthetic-population generator with known ground truth.
//!
//! Each fold deletes one task, rebuilds the taxonomy, matrices, and
//! predictor from what remains, infers the held-out task's requirements from
//! its own profiles re-encoded against the training taxonomy
//! (nearest-centroid assignment for unseen phrases), and scores every policy
//! on the held-out outcomes. The oracle is the budget-matched optimum found
//! by exhaustive enumeration, so selection precision is meaningful rather
//! than trivially won by the most expensive model.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrices::{build_matrices, CapabilityMatrices, MatrixError};
use crate::predictor::{
    cosine_similarity, impute, nmf_factorize, predict, requirement_row, train_predictor,
    FeatureScheme, LatentFactors, PredictorError, PredictorModel, TrainingConfig, TrainingPair,
};
use crate::records::{
    Dataset, InstanceOutcome, InstanceProfile, MentionStatus, ModelSpec, SkillMention, TaskSpec,
};
use crate::selector::{select, SelectError, SelectionConfig, SelectionMode, SelectionPool};
use crate::taxonomy::{
    build_taxonomy, CentroidIndex, Embedder, PhraseResolver, SkillTaxonomy, TaxonomyError,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("leave-one-out needs at least 2 tasks, got {0}")]
    NotEnoughTasks(usize),
    #[error("observed-score predictions would leak held-out data into the fold")]
    ObservedPredictorInLoocv,
    #[error("no non-degenerate folds to aggregate")]
    NoUsableFolds,
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Where per-model performance estimates come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorSource {
    /// Logistic predictor trained on the fold's training pairs.
    Trained,
    /// Cosine similarity between capability row and requirement row.
    Similarity,
    /// Observed mean task score; unavailable inside leave-one-out folds.
    Observed,
}

impl PredictorSource {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "trained" => Some(Self::Trained),
            "similarity" => Some(Self::Similarity),
            "observed" => Some(Self::Observed),
            _ => None,
        }
    }
}

/// Everything a fold build needs; mirrors the engine-wide defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub delta: f64,
    pub dim: usize,
    pub kappa: f64,
    pub rho: f64,
    pub tau: f64,
    pub budget: Option<f64>,
    pub latency_budget: Option<f64>,
    pub use_imputed: bool,
    pub nmf_rank: usize,
    pub nmf_iterations: usize,
    pub scheme: FeatureScheme,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub cascade_threshold: f64,
    pub predictor: PredictorSource,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            dim: 256,
            kappa: 0.0,
            rho: 0.5,
            tau: 0.5,
            budget: None,
            latency_budget: None,
            use_imputed: false,
            nmf_rank: 3,
            nmf_iterations: 200,
            scheme: FeatureScheme::Elementwise,
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-3,
            seed: 42,
            cascade_threshold: 0.8,
            predictor: PredictorSource::Trained,
        }
    }
}

/// Artifacts built from a fold's training split.
#[derive(Debug, Clone)]
pub struct FoldArtifacts {
    pub taxonomy: SkillTaxonomy,
    pub matrices: CapabilityMatrices,
    pub imputed: Option<Vec<Vec<f64>>>,
    pub factors: Option<LatentFactors>,
    pub predictor_model: Option<PredictorModel>,
}

/// Build taxonomy, matrices, optional NMF imputation, and the trained
/// predictor from a training dataset. This is exactly what each fold runs,
/// so the no-leakage property can be checked by calling it directly on a
/// delete-one-task copy and comparing bytes.
pub fn build_fold_artifacts(train: &Dataset, cfg: &EvalConfig) -> Result<FoldArtifacts, HarnessError> {
    let embedder = Embedder::trigram(cfg.dim);
    let taxonomy = build_taxonomy(&train.profiles, cfg.delta, &embedder)?;
    let matrices = build_matrices(train, &taxonomy, cfg.kappa, cfg.rho, &PhraseResolver::Strict)?;

    let (imputed, factors) = if cfg.use_imputed {
        let max_rank = matrices.model_ids.len().min(matrices.skill_count());
        let rank = cfg.nmf_rank.clamp(1, max_rank.max(1));
        let factors = nmf_factorize(
            &matrices.capability,
            &matrices.observed,
            rank,
            cfg.nmf_iterations,
            cfg.seed,
        )?;
        let imputed = impute(&matrices.capability, &matrices.observed, &factors);
        (Some(imputed), Some(factors))
    } else {
        (None, None)
    };

    let predictor_model = if cfg.predictor == PredictorSource::Trained {
        let mut pairs = Vec::new();
        for (t_row, task) in matrices.task_ids.iter().enumerate() {
            let requirement = requirement_row(&matrices.requirement[t_row]);
            for (m_row, model) in matrices.model_ids.iter().enumerate() {
                if let Some(label) = train.mean_score(model, task) {
                    let capability = effective_row(&matrices, imputed.as_ref(), m_row);
                    pairs.push(TrainingPair {
                        requirement: requirement.clone(),
                        capability,
                        label,
                    });
                }
            }
        }
        let config = TrainingConfig {
            learning_rate: cfg.learning_rate,
            epochs: cfg.epochs,
            seed: cfg.seed,
            l2: cfg.l2,
        };
        Some(train_predictor(&pairs, cfg.scheme, config)?)
    } else {
        None
    };

    Ok(FoldArtifacts {
        taxonomy,
        matrices,
        imputed,
        factors,
        predictor_model,
    })
}

/// Capability row with unobserved cells replaced by imputed values when
/// available (zeros otherwise).
fn effective_row(
    matrices: &CapabilityMatrices,
    imputed: Option<&Vec<Vec<f64>>>,
    row: usize,
) -> Vec<f64> {
    match imputed {
        Some(matrix) => matrix[row].clone(),
        None => matrices.capability[row].clone(),
    }
}

/// Outcome of one policy on one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub selected: Option<String>,
    pub cost: f64,
    pub achieved_score: f64,
    pub matched_oracle: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub infeasible: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub held_out_task: String,
    pub instance_count: usize,
    pub degenerate: bool,
    pub oracle_model: Option<String>,
    pub policies: BTreeMap<String, PolicyOutcome>,
}

pub const POLICY_SKILL_BASED: &str = "skill_based";
pub const POLICY_RANDOM: &str = "random_under_budget";
pub const POLICY_CHEAPEST: &str = "cheapest";
pub const POLICY_BEST_UNDER_BUDGET: &str = "best_under_budget_proxy";
pub const POLICY_CASCADE: &str = "cascade_proxy";

/// Cheapest model whose estimate clears the confidence threshold; if none
/// does, the highest-estimate model under budget. Pool rows must already be
/// budget-feasible.
pub fn policy_cascade(
    feasible: &[usize],
    matrices: &CapabilityMatrices,
    predicted: &[f64],
    threshold: f64,
) -> Option<usize> {
    let mut by_cost: Vec<usize> = feasible.to_vec();
    by_cost.sort_by(|&a, &b| {
        matrices.cost[a]
            .partial_cmp(&matrices.cost[b])
            .unwrap()
            .then_with(|| matrices.model_ids[a].cmp(&matrices.model_ids[b]))
    });
    by_cost
        .iter()
        .copied()
        .find(|&m| predicted[m] >= threshold)
        .or_else(|| argmax_predicted(feasible, matrices, predicted))
}

fn argmax_predicted(
    rows: &[usize],
    matrices: &CapabilityMatrices,
    predicted: &[f64],
) -> Option<usize> {
    rows.iter().copied().reduce(|best, m| {
        if predicted[m] > predicted[best]
            || (predicted[m] == predicted[best]
                && (matrices.cost[m] < matrices.cost[best]
                    || (matrices.cost[m] == matrices.cost[best]
                        && matrices.model_ids[m] < matrices.model_ids[best])))
        {
            m
        } else {
            best
        }
    })
}

fn cheapest_row(rows: &[usize], matrices: &CapabilityMatrices) -> Option<usize> {
    rows.iter().copied().reduce(|best, m| {
        if matrices.cost[m] < matrices.cost[best]
            || (matrices.cost[m] == matrices.cost[best]
                && matrices.model_ids[m] < matrices.model_ids[best])
        {
            m
        } else {
            best
        }
    })
}

/// Run every policy over one pool: the seeded random baseline, cheapest,
/// the skill-blind argmax proxy, the cascade proxy, and the full skill-based
/// selector. Returns the selected model row per policy name, with the
/// infeasibility reason when a policy found nothing.
pub fn baseline_policies(
    pool: &SelectionPool,
    cfg: &EvalConfig,
    fold_salt: u64,
) -> Result<BTreeMap<String, (Option<usize>, Option<String>)>, HarnessError> {
    let matrices = pool.matrices;
    let feasible: Vec<usize> = (0..matrices.model_ids.len())
        .filter(|&m| {
            cfg.budget.is_none_or(|b| matrices.cost[m] <= b)
                && cfg.latency_budget.is_none_or(|l| matrices.latency[m] <= l)
        })
        .collect();
    let infeasible_note = || {
        feasible
            .is_empty()
            .then(|| "empty feasible set".to_string())
    };

    let mut out: BTreeMap<String, (Option<usize>, Option<String>)> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ fold_salt.wrapping_mul(0x9E37_79B9));
    let random_choice = if feasible.is_empty() {
        None
    } else {
        Some(feasible[rng.gen_range(0..feasible.len())])
    };
    out.insert(POLICY_RANDOM.to_string(), (random_choice, infeasible_note()));
    out.insert(
        POLICY_CHEAPEST.to_string(),
        (cheapest_row(&feasible, matrices), infeasible_note()),
    );
    out.insert(
        POLICY_BEST_UNDER_BUDGET.to_string(),
        (argmax_predicted(&feasible, matrices, &pool.predicted), infeasible_note()),
    );
    out.insert(
        POLICY_CASCADE.to_string(),
        (
            policy_cascade(&feasible, matrices, &pool.predicted, cfg.cascade_threshold),
            infeasible_note(),
        ),
    );

    // An evaluation without budgets is treated as unbounded.
    let budget = cfg
        .budget
        .or_else(|| cfg.latency_budget.is_none().then_some(f64::INFINITY));
    let selection_config = SelectionConfig {
        tau: cfg.tau,
        budget,
        latency_budget: cfg.latency_budget,
        mode: SelectionMode::SingleBudget,
        weights: [0.5, 0.25, 0.25],
        use_imputed: cfg.use_imputed,
    };
    match select(pool, &selection_config) {
        Ok(rec) => {
            let row = matrices.model_row(&rec.model_id)?;
            out.insert(POLICY_SKILL_BASED.to_string(), (Some(row), None));
        }
        Err(err @ SelectError::Infeasible { .. }) => {
            out.insert(POLICY_SKILL_BASED.to_string(), (None, Some(err.to_string())));
        }
        Err(other) => return Err(other.into()),
    }
    Ok(out)
}

/// Requirement row for a held-out task, inferred from its own profiles
/// re-encoded against the training taxonomy. Phrases unknown to the taxonomy
/// map to the nearest cluster within the cut distance; phrases beyond it are
/// skipped. Returns `None` when nothing resolves (degenerate fold).
fn heldout_requirement(
    dataset: &Dataset,
    task_id: &str,
    taxonomy: &SkillTaxonomy,
    embedder: &Embedder,
    cfg: &EvalConfig,
) -> Result<Option<Vec<u8>>, HarnessError> {
    let centroids = CentroidIndex::build(taxonomy, embedder)?;
    let resolver = PhraseResolver::Nearest {
        embedder,
        centroids: &centroids,
        skip_unresolved: true,
    };

    let mut per_instance: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    let mut resolved_any = false;
    for profile in dataset.profiles.iter().filter(|p| p.task_id == task_id) {
        let entry = per_instance.entry(profile.instance_id.as_str()).or_default();
        for mention in &profile.mentions {
            if mention.criticality < cfg.kappa {
                continue;
            }
            if let Some(skill) = resolver.resolve(&mention.phrase, taxonomy)? {
                entry.insert(skill);
                resolved_any = true;
            }
        }
    }
    if per_instance.is_empty() || !resolved_any {
        return Ok(None);
    }
    let total = per_instance.len() as f64;
    let mut row = vec![0u8; taxonomy.skill_count()];
    for (s, bit) in row.iter_mut().enumerate() {
        let requiring = per_instance.values().filter(|set| set.contains(&s)).count();
        if requiring as f64 / total >= cfg.rho {
            *bit = 1;
        }
    }
    Ok(Some(row))
}

fn predictions_for(
    artifacts: &FoldArtifacts,
    requirement: &[u8],
    cfg: &EvalConfig,
) -> Result<Vec<f64>, HarnessError> {
    let matrices = &artifacts.matrices;
    let req = requirement_row(requirement);
    let mut predicted = Vec::with_capacity(matrices.model_ids.len());
    for row in 0..matrices.model_ids.len() {
        let capability = effective_row(matrices, artifacts.imputed.as_ref(), row);
        let value = match cfg.predictor {
            PredictorSource::Trained => {
                let model = artifacts
                    .predictor_model
                    .as_ref()
                    .expect("trained predictor built for Trained source");
                predict(model, &req, &capability)?
            }
            PredictorSource::Similarity => {
                // Zero rows make cosine undefined; score them 0 rather than
                // failing the whole fold.
                cosine_similarity(&capability, &req).unwrap_or(0.0)
            }
            PredictorSource::Observed => return Err(HarnessError::ObservedPredictorInLoocv),
        };
        predicted.push(value);
    }
    Ok(predicted)
}

/// Leave-one-out cross-validation over tasks.
pub fn loocv(dataset: &Dataset, cfg: &EvalConfig) -> Result<Vec<FoldReport>, HarnessError> {
    if dataset.tasks.len() < 2 {
        return Err(HarnessError::NotEnoughTasks(dataset.tasks.len()));
    }
    if cfg.predictor == PredictorSource::Observed {
        return Err(HarnessError::ObservedPredictorInLoocv);
    }
    let embedder = Embedder::trigram(cfg.dim);
    let mut reports = Vec::with_capacity(dataset.tasks.len());
    for (fold_idx, task) in dataset.tasks.iter().enumerate() {
        let train = dataset.without_task(&task.task_id);
        let artifacts = build_fold_artifacts(&train, cfg)?;
        let report = run_fold(
            dataset,
            &task.task_id,
            fold_idx,
            &artifacts,
            &embedder,
            cfg,
        )?;
        reports.push(report);
    }
    Ok(reports)
}

fn run_fold(
    dataset: &Dataset,
    task_id: &str,
    fold_idx: usize,
    artifacts: &FoldArtifacts,
    embedder: &Embedder,
    cfg: &EvalConfig,
) -> Result<FoldReport, HarnessError> {
    let matrices = &artifacts.matrices;
    let instance_count = dataset.instance_count(task_id);
    let heldout_score = |model_id: &str| dataset.mean_score(model_id, task_id).unwrap_or(0.0);

    let Some(requirement) = heldout_requirement(dataset, task_id, &artifacts.taxonomy, embedder, cfg)?
    else {
        return Ok(FoldReport {
            held_out_task: task_id.to_string(),
            instance_count,
            degenerate: true,
            oracle_model: None,
            policies: BTreeMap::new(),
        });
    };
    let predicted = predictions_for(artifacts, &requirement, cfg)?;

    let all_rows: Vec<usize> = (0..matrices.model_ids.len()).collect();
    let feasible: Vec<usize> = all_rows
        .iter()
        .copied()
        .filter(|&m| {
            cfg.budget.is_none_or(|b| matrices.cost[m] <= b)
                && cfg
                    .latency_budget
                    .is_none_or(|l| matrices.latency[m] <= l)
        })
        .collect();

    // Oracle: the budget-feasible model with the best held-out score, found
    // by exhaustive enumeration (ties: cheaper, then id).
    let oracle_row = feasible.iter().copied().reduce(|best, m| {
        let (sm, sb) = (
            heldout_score(&matrices.model_ids[m]),
            heldout_score(&matrices.model_ids[best]),
        );
        if sm > sb
            || (sm == sb
                && (matrices.cost[m] < matrices.cost[best]
                    || (matrices.cost[m] == matrices.cost[best]
                        && matrices.model_ids[m] < matrices.model_ids[best])))
        {
            m
        } else {
            best
        }
    });
    let oracle_model = oracle_row.map(|m| matrices.model_ids[m].clone());

    let pool = SelectionPool {
        matrices,
        imputed: artifacts.imputed.as_ref(),
        requirement,
        predicted,
    };
    let selections = baseline_policies(&pool, cfg, fold_idx as u64)?;
    let mut policies = BTreeMap::new();
    for (name, (selected, infeasible)) in selections {
        let outcome = match selected {
            Some(row) => {
                let model_id = matrices.model_ids[row].clone();
                PolicyOutcome {
                    cost: matrices.cost[row] * instance_count as f64,
                    achieved_score: heldout_score(&model_id),
                    matched_oracle: oracle_model.as_deref() == Some(model_id.as_str()),
                    selected: Some(model_id),
                    infeasible: None,
                }
            }
            None => PolicyOutcome {
                selected: None,
                cost: 0.0,
                achieved_score: 0.0,
                matched_oracle: false,
                infeasible: infeasible.or_else(|| Some("empty feasible set".to_string())),
            },
        };
        policies.insert(name, outcome);
    }

    Ok(FoldReport {
        held_out_task: task_id.to_string(),
        instance_count,
        degenerate: false,
        oracle_model,
        policies,
    })
}

/// Aggregate metrics for one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyMetrics {
    /// Sum over folds of selected-model cost times held-out instance count.
    pub total_cost: f64,
    /// Mean over folds of (most expensive model's score - selected score).
    pub accuracy_gap: f64,
    /// Fraction of non-degenerate folds where the policy picked the oracle.
    pub selection_precision: f64,
    pub folds_selected: usize,
    pub folds_infeasible: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub folds: usize,
    pub degenerate_folds: usize,
    pub per_policy: BTreeMap<String, PolicyMetrics>,
}

/// Summarize fold reports. Degenerate folds are excluded; a fold where a
/// policy found nothing feasible counts against its precision and
/// contributes no cost or gap.
pub fn metrics(reports: &[FoldReport], dataset: &Dataset) -> Result<MetricsSummary, HarnessError> {
    let usable: Vec<&FoldReport> = reports.iter().filter(|r| !r.degenerate).collect();
    if usable.is_empty() {
        return Err(HarnessError::NoUsableFolds);
    }
    // "Most expensive pool model" reference score per fold.
    let most_expensive = dataset
        .models
        .iter()
        .max_by(|a, b| {
            a.cost_per_query
                .partial_cmp(&b.cost_per_query)
                .unwrap()
                .then_with(|| b.model_id.cmp(&a.model_id))
        })
        .map(|m| m.model_id.clone());

    let mut per_policy: BTreeMap<String, PolicyMetrics> = BTreeMap::new();
    let policy_names: BTreeSet<String> = usable
        .iter()
        .flat_map(|r| r.policies.keys().cloned())
        .collect();
    for name in policy_names {
        let mut total_cost = 0.0;
        let mut gaps = Vec::new();
        let mut matches = 0usize;
        let mut selected_folds = 0usize;
        let mut infeasible_folds = 0usize;
        for report in &usable {
            let Some(outcome) = report.policies.get(&name) else {
                continue;
            };
            if outcome.selected.is_some() {
                selected_folds += 1;
                total_cost += outcome.cost;
                if let Some(expensive) = &most_expensive {
                    let reference = dataset
                        .mean_score(expensive, &report.held_out_task)
                        .unwrap_or(0.0);
                    gaps.push(reference - outcome.achieved_score);
                }
            } else {
                infeasible_folds += 1;
            }
            if outcome.matched_oracle {
                matches += 1;
            }
        }
        let accuracy_gap = if gaps.is_empty() {
            0.0
        } else {
            gaps.iter().sum::<f64>() / gaps.len() as f64
        };
        per_policy.insert(
            name,
            PolicyMetrics {
                total_cost,
                accuracy_gap,
                selection_precision: matches as f64 / usable.len() as f64,
                folds_selected: selected_folds,
                folds_infeasible: infeasible_folds,
            },
        );
    }
    Ok(MetricsSummary {
        folds: usable.len(),
        degenerate_folds: reports.len() - usable.len(),
        per_policy,
    })
}

/// One row of the cost/score frontier: a model's per-query cost against its
/// mean score over every outcome in the dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub model_id: String,
    pub cost_per_query: f64,
    pub mean_score: f64,
}

/// Per-model (cost, mean score) rows sorted by ascending cost. Every model
/// appears exactly once; a model with no outcomes scores 0.
pub fn frontier(dataset: &Dataset) -> Vec<FrontierRow> {
    let mut rows: Vec<FrontierRow> = dataset
        .models
        .iter()
        .map(|model| {
            let (mut sum, mut n) = (0.0, 0usize);
            for outcome in &dataset.outcomes {
                if outcome.model_id == model.model_id {
                    sum += outcome.score;
                    n += 1;
                }
            }
            FrontierRow {
                model_id: model.model_id.clone(),
                cost_per_query: model.cost_per_query,
                mean_score: if n > 0 { sum / n as f64 } else { 0.0 },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.cost_per_query
            .partial_cmp(&b.cost_per_query)
            .unwrap()
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    rows
}

pub fn write_frontier_csv(rows: &[FrontierRow], path: &Path) -> Result<(), HarnessError> {
    let mut out = String::from("model_id,cost_per_query,mean_score\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.model_id, row.cost_per_query, row.mean_score
        ));
    }
    std::fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Ground-truth population: per-model true skill proficiencies, per-task
/// requirement rows, and the dataset sampled from them.
#[derive(Debug, Clone)]
pub struct SyntheticPopulation {
    pub true_proficiency: Vec<Vec<f64>>,
    pub requirements: Vec<Vec<u8>>,
    pub skill_names: Vec<String>,
    pub dataset: Dataset,
    pub seed: u64,
}

/// Distinct, trigram-separated phrases for synthetic skills.
const SKILL_NAME_POOL: &[&str] = &[
    "numerical calculation",
    "temporal reasoning",
    "fact verification",
    "logical inference",
    "data extraction",
    "unit conversion",
    "causal analysis",
    "spatial layout",
    "ratio comparison",
    "trend detection",
    "policy lookup",
    "graph traversal",
    "schema matching",
    "currency handling",
    "percentage growth",
    "bounds checking",
    "anomaly spotting",
    "citation grounding",
    "formula rewriting",
    "table joining",
    "rounding control",
    "scenario weighing",
    "definition recall",
    "context tracking",
];

#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub models: usize,
    pub skills: usize,
    pub tasks: usize,
    pub instances_per_task: usize,
    pub cost_spread: f64,
    pub seed: u64,
}

fn synthetic_skill_names(count: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut names: Vec<String> = SKILL_NAME_POOL
        .iter()
        .take(count)
        .map(|s| s.to_string())
        .collect();
    while names.len() < count {
        let word: String = (0..8)
            .map(|_| (b'a' + rng.gen_range(0..26u8)) as char)
            .collect();
        names.push(format!("aptitude {word}"));
    }
    names
}

/// Sample a dataset from explicit ground truth: outcomes succeed exactly
/// when every required skill fires (each firing independently with the
/// model's true proficiency), and the critic profile reports the firings
/// truthfully at criticality 1.0.
pub fn synthesize(
    true_proficiency: &[Vec<f64>],
    requirements: &[Vec<u8>],
    skill_names: &[String],
    instances_per_task: usize,
    costs: &[f64],
    latencies: &[f64],
    seed: u64,
) -> SyntheticPopulation {
    let model_count = true_proficiency.len();
    let task_count = requirements.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5EED));

    let models: Vec<ModelSpec> = (0..model_count)
        .map(|m| ModelSpec {
            model_id: format!("model-{:02}", m),
            cost_per_query: costs[m],
            latency_ms: latencies[m],
            display_name: None,
        })
        .collect();
    let tasks: Vec<TaskSpec> = (0..task_count)
        .map(|t| TaskSpec {
            task_id: format!("task-{:02}", t),
            metric_name: "accuracy".to_string(),
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut profiles = Vec::new();
    for (t, requirement) in requirements.iter().enumerate() {
        let required: Vec<usize> = requirement
            .iter()
            .enumerate()
            .filter_map(|(s, &bit)| (bit == 1).then_some(s))
            .collect();
        for i in 0..instances_per_task {
            let instance_id = format!("i{:03}", i);
            for (m, model) in models.iter().enumerate() {
                let mut all_fired = true;
                let mut mentions = Vec::new();
                for &s in &required {
                    let fired = rng.gen_range(0.0..1.0) < true_proficiency[m][s];
                    all_fired &= fired;
                    mentions.push(SkillMention {
                        phrase: skill_names[s].clone(),
                        status: if fired {
                            MentionStatus::Demonstrated
                        } else {
                            MentionStatus::Missing
                        },
                        criticality: 1.0,
                    });
                }
                outcomes.push(InstanceOutcome {
                    model_id: model.model_id.clone(),
                    task_id: tasks[t].task_id.clone(),
                    instance_id: instance_id.clone(),
                    correct: all_fired,
                    score: if all_fired { 1.0 } else { 0.0 },
                });
                profiles.push(InstanceProfile {
                    model_id: model.model_id.clone(),
                    task_id: tasks[t].task_id.clone(),
                    instance_id: instance_id.clone(),
                    mentions,
                });
            }
        }
    }

    SyntheticPopulation {
        true_proficiency: true_proficiency.to_vec(),
        requirements: requirements.to_vec(),
        skill_names: skill_names.to_vec(),
        dataset: Dataset {
            models,
            tasks,
            outcomes,
            profiles,
        },
        seed,
    }
}

/// Draw a full synthetic population: proficiencies uniform in [0.3, 0.95],
/// 1-3 required skills per task, and costs increasing in mean proficiency
/// with seeded noise.
pub fn generate_synthetic(spec: &SyntheticSpec) -> SyntheticPopulation {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let skill_names = synthetic_skill_names(spec.skills, &mut rng);

    let true_proficiency: Vec<Vec<f64>> = (0..spec.models)
        .map(|_| (0..spec.skills).map(|_| rng.gen_range(0.3..0.95)).collect())
        .collect();

    let requirements: Vec<Vec<u8>> = (0..spec.tasks)
        .map(|_| {
            let count = rng.gen_range(1..=3usize.min(spec.skills));
            let mut row = vec![0u8; spec.skills];
            let mut available: Vec<usize> = (0..spec.skills).collect();
            for _ in 0..count {
                let pick = rng.gen_range(0..available.len());
                row[available.swap_remove(pick)] = 1;
            }
            row
        })
        .collect();

    let costs: Vec<f64> = true_proficiency
        .iter()
        .map(|row| {
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            let base = 0.05 + spec.cost_spread * (mean - 0.3) / 0.65;
            base + rng.gen_range(0.0..0.05 * spec.cost_spread.max(0.1))
        })
        .collect();
    let latencies: Vec<f64> = (0..spec.models)
        .map(|_| rng.gen_range(20.0..500.0))
        .collect();

    synthesize(
        &true_proficiency,
        &requirements,
        &skill_names,
        spec.instances_per_task,
        &costs,
        &latencies,
        spec.seed,
    )
}
