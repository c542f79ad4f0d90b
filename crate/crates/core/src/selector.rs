//! Skill-aware model selection with interpretable rationale.
//!
//! Given a task's requirement row, the pool is filtered to models meeting
//! the proficiency threshold on every required skill, then the winner
//! maximizes predicted performance subject to the budget. Multi-constraint
//! queries extend to Pareto fronts or weighted scalarization. Every
//! recommendation accounts for the whole pool: each non-selected model
//! carries an explicit rejection reason, and per-skill margins show how the
//! winner compares to the best alternative.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrices::CapabilityMatrices;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("tau {0} outside [0, 1]")]
    TauRange(f64),
    #[error("scalarization weights must be non-negative and sum to 1, got {0:?}")]
    BadWeights([f64; 3]),
    #[error("selection needs a budget, a latency budget, or pareto mode")]
    NoConstraint,
    #[error("unknown skill \"{0}\"")]
    UnknownSkill(String),
    #[error("unknown task \"{0}\" and no explicit skill list")]
    UnknownTask(String),
    #[error("requirement length {got} does not match skill count {expected}")]
    RequirementLength { expected: usize, got: usize },
    #[error("predicted performance missing for model row {0}")]
    MissingPrediction(usize),
    #[error("empty model pool")]
    EmptyPool,
    #[error("no feasible model: nearest miss {nearest_miss} ({violated})")]
    Infeasible {
        nearest_miss: String,
        violated: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    SingleBudget,
    Pareto,
    Scalarized,
}

impl SelectionMode {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "single_budget" => Some(Self::SingleBudget),
            "pareto" => Some(Self::Pareto),
            "scalarized" => Some(Self::Scalarized),
            _ => None,
        }
    }
}

/// Scalarization weights over (performance, cheapness, speed); non-negative,
/// summing to 1.
pub type ObjectiveWeights = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub tau: f64,
    pub budget: Option<f64>,
    pub latency_budget: Option<f64>,
    pub mode: SelectionMode,
    pub weights: ObjectiveWeights,
    pub use_imputed: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            budget: None,
            latency_budget: None,
            mode: SelectionMode::SingleBudget,
            weights: [0.5, 0.25, 0.25],
            use_imputed: false,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), SelectError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(SelectError::TauRange(self.tau));
        }
        if self.mode == SelectionMode::Scalarized {
            let sum: f64 = self.weights.iter().sum();
            if self.weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(SelectError::BadWeights(self.weights));
            }
        }
        if self.mode != SelectionMode::Pareto
            && self.budget.is_none()
            && self.latency_budget.is_none()
        {
            return Err(SelectError::NoConstraint);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectionReason {
    /// Effective capability below tau (or unobserved) on a required skill.
    FailedSkill { skill: String },
    /// Cost or latency above the corresponding budget.
    OverBudget,
    /// Feasible, but another model scored at least as well.
    Dominated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub model_id: String,
    #[serde(flatten)]
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub model_id: String,
    pub predicted_performance: f64,
    pub cost: f64,
    pub qualifying_skills: Vec<String>,
    /// Per-qualifying-skill capability margin over the best other pool model.
    pub margins: BTreeMap<String, f64>,
    pub rejected: Vec<Rejection>,
    pub mode: SelectionMode,
    pub rationale: String,
}

/// One candidate row: the capability matrices plus (optionally) an imputed
/// matrix and the per-model performance estimates for the target task.
#[derive(Debug, Clone)]
pub struct SelectionPool<'a> {
    pub matrices: &'a CapabilityMatrices,
    pub imputed: Option<&'a Vec<Vec<f64>>>,
    pub requirement: Vec<u8>,
    pub predicted: Vec<f64>,
}

impl SelectionPool<'_> {
    /// Effective capability entry: observed value, imputed value when
    /// enabled, or `None` when unobserved and unimputed (which fails any
    /// threshold test).
    pub fn effective_entry(&self, model: usize, skill: usize, use_imputed: bool) -> Option<f64> {
        if self.matrices.observed[model][skill] {
            Some(self.matrices.capability[model][skill])
        } else if use_imputed {
            self.imputed.map(|m| m[model][skill])
        } else {
            None
        }
    }

    fn validate(&self) -> Result<(), SelectError> {
        let models = self.matrices.model_ids.len();
        if models == 0 {
            return Err(SelectError::EmptyPool);
        }
        if self.requirement.len() != self.matrices.skill_count() {
            return Err(SelectError::RequirementLength {
                expected: self.matrices.skill_count(),
                got: self.requirement.len(),
            });
        }
        if self.predicted.len() != models {
            return Err(SelectError::MissingPrediction(self.predicted.len()));
        }
        Ok(())
    }
}

/// Requirement row for a task id, or for an explicit skill list.
pub fn infer_requirements(
    matrices: &CapabilityMatrices,
    task_id: Option<&str>,
    explicit_skills: Option<&[String]>,
) -> Result<Vec<u8>, SelectError> {
    if let Some(skills) = explicit_skills {
        let mut row = vec![0u8; matrices.skill_count()];
        for skill in skills {
            let idx = matrices
                .skills
                .iter()
                .position(|s| s == skill)
                .ok_or_else(|| SelectError::UnknownSkill(skill.clone()))?;
            row[idx] = 1;
        }
        return Ok(row);
    }
    let task_id = task_id.ok_or_else(|| SelectError::UnknownTask("<none>".to_string()))?;
    let row = matrices
        .task_ids
        .iter()
        .position(|t| t == task_id)
        .ok_or_else(|| SelectError::UnknownTask(task_id.to_string()))?;
    Ok(matrices.requirement[row].clone())
}

/// First required skill on which the model fails the tau test, if any.
fn failing_skill(pool: &SelectionPool, model: usize, tau: f64, use_imputed: bool) -> Option<usize> {
    pool.requirement.iter().enumerate().find_map(|(s, &bit)| {
        if bit == 0 {
            return None;
        }
        match pool.effective_entry(model, s, use_imputed) {
            Some(value) if value >= tau => None,
            _ => Some(s),
        }
    })
}

/// Models meeting the proficiency threshold on every required skill.
/// Unobserved-and-unimputed entries fail the test.
pub fn filter_capable(pool: &SelectionPool, tau: f64, use_imputed: bool) -> Vec<usize> {
    (0..pool.matrices.model_ids.len())
        .filter(|&m| failing_skill(pool, m, tau, use_imputed).is_none())
        .collect()
}

fn within_budget(pool: &SelectionPool, model: usize, config: &SelectionConfig) -> bool {
    let cost_ok = config.budget.is_none_or(|b| pool.matrices.cost[model] <= b);
    let latency_ok = config
        .latency_budget
        .is_none_or(|b| pool.matrices.latency[model] <= b);
    cost_ok && latency_ok
}

/// Tie-break comparator shared by selection and ranking: higher score first,
/// then lower cost, then lexicographically smaller model id.
fn better(pool: &SelectionPool, a: usize, score_a: f64, b: usize, score_b: f64) -> bool {
    if score_a != score_b {
        return score_a > score_b;
    }
    let (cost_a, cost_b) = (pool.matrices.cost[a], pool.matrices.cost[b]);
    if cost_a != cost_b {
        return cost_a < cost_b;
    }
    pool.matrices.model_ids[a] < pool.matrices.model_ids[b]
}

/// Margins over the rest of the pool: `C[m][s] - max_{m'≠m} C[m'][s]` for
/// each required skill, using effective entries (unobserved ones count 0).
/// A pool of one defines the margin against 0.
pub fn skill_margins(
    pool: &SelectionPool,
    selected: usize,
    use_imputed: bool,
) -> BTreeMap<String, f64> {
    let mut margins = BTreeMap::new();
    for (s, &bit) in pool.requirement.iter().enumerate() {
        if bit == 0 {
            continue;
        }
        let own = pool.effective_entry(selected, s, use_imputed).unwrap_or(0.0);
        let best_other = (0..pool.matrices.model_ids.len())
            .filter(|&m| m != selected)
            .map(|m| pool.effective_entry(m, s, use_imputed).unwrap_or(0.0))
            .fold(None::<f64>, |acc, v| Some(acc.map_or(v, |a| a.max(v))))
            .unwrap_or(0.0);
        margins.insert(pool.matrices.skills[s].clone(), own - best_other);
    }
    margins
}

fn qualifying_skills(pool: &SelectionPool, model: usize, tau: f64, use_imputed: bool) -> Vec<String> {
    pool.requirement
        .iter()
        .enumerate()
        .filter_map(|(s, &bit)| {
            if bit == 1
                && pool
                    .effective_entry(model, s, use_imputed)
                    .is_some_and(|v| v >= tau)
            {
                Some(pool.matrices.skills[s].clone())
            } else {
                None
            }
        })
        .collect()
}

/// Human-readable rationale, a pure function of the structured fields.
fn render_rationale(
    pool: &SelectionPool,
    selected: usize,
    config: &SelectionConfig,
    qualifying: &[String],
    margins: &BTreeMap<String, f64>,
    rejected: &[Rejection],
) -> String {
    let matrices = pool.matrices;
    let mut lines = Vec::new();
    lines.push(format!(
        "selected {}: predicted performance {:.4}, cost {} USD/query",
        matrices.model_ids[selected], pool.predicted[selected], matrices.cost[selected]
    ));
    if qualifying.is_empty() {
        lines.push(format!(
            "no skills required at threshold tau={}; selection fell back to performance and cost",
            config.tau
        ));
    } else {
        let parts: Vec<String> = qualifying
            .iter()
            .map(|skill| {
                let margin = margins.get(skill).copied().unwrap_or(0.0);
                format!("{skill} (margin {margin:+.4})")
            })
            .collect();
        lines.push(format!(
            "qualifying skills at tau={}: {}",
            config.tau,
            parts.join(", ")
        ));
    }
    let binding = if rejected
        .iter()
        .any(|r| matches!(r.reason, RejectionReason::OverBudget))
    {
        match (config.budget, config.latency_budget) {
            (Some(b), Some(l)) => format!("budget {b} USD/query, latency {l} ms"),
            (Some(b), None) => format!("budget {b} USD/query"),
            (None, Some(l)) => format!("latency budget {l} ms"),
            (None, None) => "none".to_string(),
        }
    } else if rejected
        .iter()
        .any(|r| matches!(r.reason, RejectionReason::FailedSkill { .. }))
    {
        format!("proficiency threshold tau={}", config.tau)
    } else {
        "none".to_string()
    };
    lines.push(format!("binding constraint: {binding}"));
    for rejection in rejected {
        let why = match &rejection.reason {
            RejectionReason::FailedSkill { skill } => {
                format!("below tau={} on required skill \"{skill}\"", config.tau)
            }
            RejectionReason::OverBudget => "over budget".to_string(),
            RejectionReason::Dominated => "feasible but outscored".to_string(),
        };
        lines.push(format!("rejected {}: {why}", rejection.model_id));
    }
    lines.join("\n")
}

/// Structured explanation for a (possibly hypothetical) selection: margins
/// for every required skill, the qualifying subset, rejection reasons for
/// the rest of the pool, and the rendered text.
#[derive(Debug, Clone, PartialEq)]
pub struct Rationale {
    pub qualifying_skills: Vec<String>,
    /// Margin for every required skill, qualifying or not.
    pub margins: BTreeMap<String, f64>,
    pub rejected: Vec<Rejection>,
    pub text: String,
}

/// Explain how `selected` compares to the rest of the pool under the given
/// thresholds. The text is a pure function of the structured fields.
pub fn explain(pool: &SelectionPool, selected: usize, config: &SelectionConfig) -> Rationale {
    let use_imputed = config.use_imputed;
    let mut rejected = Vec::new();
    for m in 0..pool.matrices.model_ids.len() {
        if m == selected {
            continue;
        }
        let reason = if let Some(s) = failing_skill(pool, m, config.tau, use_imputed) {
            RejectionReason::FailedSkill {
                skill: pool.matrices.skills[s].clone(),
            }
        } else if !within_budget(pool, m, config) {
            RejectionReason::OverBudget
        } else {
            RejectionReason::Dominated
        };
        rejected.push(Rejection {
            model_id: pool.matrices.model_ids[m].clone(),
            reason,
        });
    }
    let qualifying_skills = qualifying_skills(pool, selected, config.tau, use_imputed);
    let margins = skill_margins(pool, selected, use_imputed);
    let text = render_rationale(pool, selected, config, &qualifying_skills, &margins, &rejected);
    Rationale {
        qualifying_skills,
        margins,
        rejected,
        text,
    }
}

fn build_recommendation(
    pool: &SelectionPool,
    selected: usize,
    config: &SelectionConfig,
) -> Recommendation {
    let rationale = explain(pool, selected, config);
    let margins: BTreeMap<String, f64> = rationale
        .margins
        .iter()
        .filter(|(skill, _)| rationale.qualifying_skills.contains(skill))
        .map(|(skill, margin)| (skill.clone(), *margin))
        .collect();
    Recommendation {
        model_id: pool.matrices.model_ids[selected].clone(),
        predicted_performance: pool.predicted[selected],
        cost: pool.matrices.cost[selected],
        qualifying_skills: rationale.qualifying_skills,
        margins,
        rejected: rationale.rejected,
        mode: config.mode,
        rationale: rationale.text,
    }
}

fn infeasible_error(pool: &SelectionPool, config: &SelectionConfig, capable: &[usize]) -> SelectError {
    if capable.is_empty() {
        // Nearest miss: fewest failing required skills, ties by smaller cost
        // then id; report its first failing skill.
        let fail_count = |m: usize| {
            pool.requirement
                .iter()
                .enumerate()
                .filter(|(s, &bit)| {
                    bit == 1
                        && !pool
                            .effective_entry(m, *s, config.use_imputed)
                            .is_some_and(|v| v >= config.tau)
                })
                .count()
        };
        let mut best = 0usize;
        for m in 1..pool.matrices.model_ids.len() {
            let (fa, fb) = (fail_count(m), fail_count(best));
            let swap = fa < fb
                || (fa == fb
                    && (pool.matrices.cost[m] < pool.matrices.cost[best]
                        || (pool.matrices.cost[m] == pool.matrices.cost[best]
                            && pool.matrices.model_ids[m] < pool.matrices.model_ids[best])));
            if swap {
                best = m;
            }
        }
        let skill = failing_skill(pool, best, config.tau, config.use_imputed)
            .map(|s| pool.matrices.skills[s].clone())
            .unwrap_or_default();
        SelectError::Infeasible {
            nearest_miss: pool.matrices.model_ids[best].clone(),
            violated: format!("capability on \"{skill}\" below tau={}", config.tau),
        }
    } else {
        // Capable models exist but none fit the budget: report the cheapest.
        let cheapest = *capable
            .iter()
            .min_by(|&&a, &&b| {
                pool.matrices.cost[a]
                    .partial_cmp(&pool.matrices.cost[b])
                    .unwrap()
                    .then_with(|| pool.matrices.model_ids[a].cmp(&pool.matrices.model_ids[b]))
            })
            .expect("capable set non-empty");
        let violated = match (config.budget, config.latency_budget) {
            (Some(b), _) if pool.matrices.cost[cheapest] > b => {
                format!("cost {} exceeds budget {b}", pool.matrices.cost[cheapest])
            }
            (_, Some(l)) => format!(
                "latency {} exceeds budget {l}",
                pool.matrices.latency[cheapest]
            ),
            _ => "budget".to_string(),
        };
        SelectError::Infeasible {
            nearest_miss: pool.matrices.model_ids[cheapest].clone(),
            violated,
        }
    }
}

/// Budget-constrained selection: the capable, in-budget model maximizing
/// predicted performance (scalarized score in scalarized mode). Ties prefer
/// the cheaper model, then the lexicographically smaller id.
pub fn select(pool: &SelectionPool, config: &SelectionConfig) -> Result<Recommendation, SelectError> {
    config.validate()?;
    pool.validate()?;

    let capable = filter_capable(pool, config.tau, config.use_imputed);
    let feasible: Vec<usize> = capable
        .iter()
        .copied()
        .filter(|&m| within_budget(pool, m, config))
        .collect();
    if feasible.is_empty() {
        return Err(infeasible_error(pool, config, &capable));
    }

    let scores: Vec<f64> = match config.mode {
        SelectionMode::Scalarized => {
            let ranked = scalarize(pool, &feasible, &config.weights);
            let mut by_row = vec![0.0; pool.matrices.model_ids.len()];
            for (row, score) in ranked {
                by_row[row] = score;
            }
            by_row
        }
        _ => pool.predicted.clone(),
    };

    let mut winner = feasible[0];
    for &m in &feasible[1..] {
        if better(pool, m, scores[m], winner, scores[winner]) {
            winner = m;
        }
    }
    Ok(build_recommendation(pool, winner, config))
}

/// Candidate point for Pareto analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub model_id: String,
    pub cost: f64,
    pub latency: f64,
    pub performance: f64,
}

/// Non-dominated subset: a point survives unless some other point is no
/// worse on every objective (cost down, latency down when included,
/// performance up) and strictly better on at least one. Duplicates survive.
/// Output is sorted by ascending cost.
pub fn pareto_front(points: &[ParetoPoint], include_latency: bool) -> Vec<ParetoPoint> {
    let dominates = |a: &ParetoPoint, b: &ParetoPoint| {
        let no_worse = a.cost <= b.cost
            && a.performance >= b.performance
            && (!include_latency || a.latency <= b.latency);
        let strictly_better = a.cost < b.cost
            || a.performance > b.performance
            || (include_latency && a.latency < b.latency);
        no_worse && strictly_better
    };
    let mut front: Vec<ParetoPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect();
    front.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .unwrap()
            .then_with(|| b.performance.partial_cmp(&a.performance).unwrap())
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    front
}

/// Rank the given model rows by the weighted sum of min-max normalized
/// objectives (performance up, cost down, latency down). Objectives constant
/// over the set normalize to 0. Returns (row, score) sorted best-first with
/// the usual tie-breaks.
pub fn scalarize(
    pool: &SelectionPool,
    rows: &[usize],
    weights: &ObjectiveWeights,
) -> Vec<(usize, f64)> {
    let normalize = |values: &[f64], invert: bool| -> Vec<f64> {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values
            .iter()
            .map(|&v| {
                if max > min {
                    let n = (v - min) / (max - min);
                    if invert {
                        1.0 - n
                    } else {
                        n
                    }
                } else {
                    0.0
                }
            })
            .collect()
    };
    let perf: Vec<f64> = rows.iter().map(|&m| pool.predicted[m]).collect();
    let cost: Vec<f64> = rows.iter().map(|&m| pool.matrices.cost[m]).collect();
    let latency: Vec<f64> = rows.iter().map(|&m| pool.matrices.latency[m]).collect();
    let perf_n = normalize(&perf, false);
    let cost_n = normalize(&cost, true);
    let latency_n = normalize(&latency, true);

    let mut scored: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            (
                m,
                weights[0] * perf_n[i] + weights[1] * cost_n[i] + weights[2] * latency_n[i],
            )
        })
        .collect();
    scored.sort_by(|(ma, sa), (mb, sb)| {
        sb.partial_cmp(sa)
            .unwrap()
            .then_with(|| {
                pool.matrices.cost[*ma]
                    .partial_cmp(&pool.matrices.cost[*mb])
                    .unwrap()
            })
            .then_with(|| pool.matrices.model_ids[*ma].cmp(&pool.matrices.model_ids[*mb]))
    });
    scored
}
