//! Capability matrices: the three structured representations built from a
//! dataset and a taxonomy.
//!
//! `C[m][s]` is model `m`'s proficiency at skill `s` — the fraction of
//! skill-requiring instances (among those the model was profiled on) where
//! the model demonstrated the skill. `R[t][s]` marks whether task `t`
//! requires skill `s`, and `c[m]` carries the per-query cost (or latency)
//! used by the selection budget.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{Dataset, MentionStatus};
use crate::taxonomy::{PhraseResolver, SkillTaxonomy, TaxonomyError};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("task \"{0}\" has no profiled instances")]
    TaskWithoutProfiles(String),
    #[error("unknown model \"{0}\"")]
    UnknownModel(String),
    #[error("unknown task \"{0}\"")]
    UnknownTask(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

/// Which per-model scalar feeds the cost vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    Monetary,
    Latency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityMatrices {
    pub model_ids: Vec<String>,
    pub task_ids: Vec<String>,
    pub skills: Vec<String>,
    #[serde(rename = "C")]
    pub capability: Vec<Vec<f64>>,
    pub observed: Vec<Vec<bool>>,
    #[serde(rename = "R")]
    pub requirement: Vec<Vec<u8>>,
    #[serde(rename = "c")]
    pub cost: Vec<f64>,
    pub latency: Vec<f64>,
}

impl CapabilityMatrices {
    pub fn model_row(&self, model_id: &str) -> Result<usize, MatrixError> {
        self.model_ids
            .iter()
            .position(|m| m == model_id)
            .ok_or_else(|| MatrixError::UnknownModel(model_id.to_string()))
    }

    pub fn task_row(&self, task_id: &str) -> Result<usize, MatrixError> {
        self.task_ids
            .iter()
            .position(|t| t == task_id)
            .ok_or_else(|| MatrixError::UnknownTask(task_id.to_string()))
    }

    pub fn skill_count(&self) -> usize {
        self.skills.len()
    }

    pub fn save(&self, path: &Path) -> Result<(), MatrixError> {
        let json = serde_json::to_string_pretty(self).expect("matrix serialization");
        std::fs::write(path, json).map_err(|source| MatrixError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, MatrixError> {
        let text = std::fs::read_to_string(path).map_err(|source| MatrixError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| MatrixError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Instance key: (task_id, instance_id).
pub type InstanceKey = (String, String);

/// Skills each instance requires: the union over all models' profiles of
/// mentions (either status) with criticality >= `kappa`.
pub fn instance_requirements(
    dataset: &Dataset,
    taxonomy: &SkillTaxonomy,
    kappa: f64,
    resolver: &PhraseResolver,
) -> Result<BTreeMap<InstanceKey, BTreeSet<usize>>, MatrixError> {
    let mut requirements: BTreeMap<InstanceKey, BTreeSet<usize>> = BTreeMap::new();
    for profile in &dataset.profiles {
        let key = (profile.task_id.clone(), profile.instance_id.clone());
        let entry = requirements.entry(key).or_default();
        for mention in &profile.mentions {
            if mention.criticality < kappa {
                continue;
            }
            if let Some(skill) = resolver.resolve(&mention.phrase, taxonomy)? {
                entry.insert(skill);
            }
        }
    }
    Ok(requirements)
}

/// The model capability matrix with its observedness mask.
///
/// `observed[m][s]` is false when model `m` was never profiled on an
/// instance requiring `s`; the matching `C` entry is stored as 0.
pub fn build_capability(
    dataset: &Dataset,
    taxonomy: &SkillTaxonomy,
    kappa: f64,
    resolver: &PhraseResolver,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<bool>>), MatrixError> {
    let requirements = instance_requirements(dataset, taxonomy, kappa, resolver)?;
    let skill_count = taxonomy.skill_count();
    let mut capability = vec![vec![0.0; skill_count]; dataset.models.len()];
    let mut observed = vec![vec![false; skill_count]; dataset.models.len()];

    let model_rows: BTreeMap<&str, usize> = dataset
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| (m.model_id.as_str(), i))
        .collect();

    let mut demonstrated_counts = vec![vec![0usize; skill_count]; dataset.models.len()];
    let mut required_counts = vec![vec![0usize; skill_count]; dataset.models.len()];

    for profile in &dataset.profiles {
        let Some(&row) = model_rows.get(profile.model_id.as_str()) else {
            return Err(MatrixError::UnknownModel(profile.model_id.clone()));
        };
        let key = (profile.task_id.clone(), profile.instance_id.clone());
        let required = &requirements[&key];

        let mut demonstrated = BTreeSet::new();
        for mention in &profile.mentions {
            if mention.status != MentionStatus::Demonstrated || mention.criticality < kappa {
                continue;
            }
            if let Some(skill) = resolver.resolve(&mention.phrase, taxonomy)? {
                demonstrated.insert(skill);
            }
        }
        for &skill in required {
            required_counts[row][skill] += 1;
            if demonstrated.contains(&skill) {
                demonstrated_counts[row][skill] += 1;
            }
        }
    }

    for m in 0..dataset.models.len() {
        for s in 0..skill_count {
            if required_counts[m][s] > 0 {
                capability[m][s] = demonstrated_counts[m][s] as f64 / required_counts[m][s] as f64;
                observed[m][s] = true;
            }
        }
    }
    Ok((capability, observed))
}

/// The task requirement matrix: `R[t][s] = 1` when at least a `rho` fraction
/// of the task's profiled instances require skill `s`.
pub fn build_requirement(
    dataset: &Dataset,
    taxonomy: &SkillTaxonomy,
    kappa: f64,
    rho: f64,
    resolver: &PhraseResolver,
) -> Result<Vec<Vec<u8>>, MatrixError> {
    let requirements = instance_requirements(dataset, taxonomy, kappa, resolver)?;
    let skill_count = taxonomy.skill_count();
    let mut rows = Vec::with_capacity(dataset.tasks.len());
    for task in &dataset.tasks {
        let task_instances: Vec<&BTreeSet<usize>> = requirements
            .iter()
            .filter(|((task_id, _), _)| task_id == &task.task_id)
            .map(|(_, skills)| skills)
            .collect();
        if task_instances.is_empty() {
            return Err(MatrixError::TaskWithoutProfiles(task.task_id.clone()));
        }
        let total = task_instances.len() as f64;
        let mut row = vec![0u8; skill_count];
        for (s, bit) in row.iter_mut().enumerate() {
            let requiring = task_instances.iter().filter(|set| set.contains(&s)).count();
            if requiring as f64 / total >= rho {
                *bit = 1;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Cost vector in model-row order, under the monetary or latency lens.
pub fn build_cost_vector(dataset: &Dataset, mode: CostMode) -> Vec<f64> {
    dataset
        .models
        .iter()
        .map(|m| match mode {
            CostMode::Monetary => m.cost_per_query,
            CostMode::Latency => m.latency_ms,
        })
        .collect()
}

/// Build all three representations at once.
pub fn build_matrices(
    dataset: &Dataset,
    taxonomy: &SkillTaxonomy,
    kappa: f64,
    rho: f64,
    resolver: &PhraseResolver,
) -> Result<CapabilityMatrices, MatrixError> {
    let (capability, observed) = build_capability(dataset, taxonomy, kappa, resolver)?;
    let requirement = build_requirement(dataset, taxonomy, kappa, rho, resolver)?;
    Ok(CapabilityMatrices {
        model_ids: dataset.models.iter().map(|m| m.model_id.clone()).collect(),
        task_ids: dataset.tasks.iter().map(|t| t.task_id.clone()).collect(),
        skills: taxonomy.skills.clone(),
        capability,
        observed,
        requirement,
        cost: build_cost_vector(dataset, CostMode::Monetary),
        latency: build_cost_vector(dataset, CostMode::Latency),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::records::{InstanceOutcome, InstanceProfile, ModelSpec, SkillMention, TaskSpec};
    use crate::taxonomy::{build_taxonomy, Embedder};

    fn mention(phrase: &str, status: MentionStatus, criticality: f64) -> SkillMention {
        SkillMention {
            phrase: phrase.to_string(),
            status,
            criticality,
        }
    }

    fn profile(
        model: &str,
        task: &str,
        instance: &str,
        mentions: Vec<SkillMention>,
    ) -> InstanceProfile {
        InstanceProfile {
            model_id: model.to_string(),
            task_id: task.to_string(),
            instance_id: instance.to_string(),
            mentions,
        }
    }

    fn outcome(model: &str, task: &str, instance: &str, correct: bool) -> InstanceOutcome {
        InstanceOutcome {
            model_id: model.to_string(),
            task_id: task.to_string(),
            instance_id: instance.to_string(),
            correct,
            score: if correct { 1.0 } else { 0.0 },
        }
    }

    /// Two models, one task, four instances. Skill "numerical calculation"
    /// is required on every instance; model a demonstrates it on 3 of 4.
    fn four_instance_dataset() -> Dataset {
        let demo = |m: &str, i: &str| {
            profile(
                m,
                "t1",
                i,
                vec![mention(
                    "numerical calculation",
                    MentionStatus::Demonstrated,
                    1.0,
                )],
            )
        };
        let miss = |m: &str, i: &str| {
            profile(
                m,
                "t1",
                i,
                vec![mention("numerical calculation", MentionStatus::Missing, 1.0)],
            )
        };
        Dataset {
            models: vec![
                ModelSpec {
                    model_id: "a".into(),
                    cost_per_query: 10.0,
                    latency_ms: 200.0,
                    display_name: None,
                },
                ModelSpec {
                    model_id: "b".into(),
                    cost_per_query: 0.88,
                    latency_ms: 50.0,
                    display_name: None,
                },
            ],
            tasks: vec![TaskSpec {
                task_id: "t1".into(),
                metric_name: "accuracy".into(),
            }],
            outcomes: ["i1", "i2", "i3", "i4"]
                .iter()
                .flat_map(|i| {
                    vec![outcome("a", "t1", i, true), outcome("b", "t1", i, false)]
                })
                .collect(),
            profiles: vec![
                demo("a", "i1"),
                demo("a", "i2"),
                demo("a", "i3"),
                miss("a", "i4"),
                miss("b", "i1"),
                miss("b", "i2"),
                miss("b", "i3"),
                miss("b", "i4"),
            ],
        }
    }

    #[test]
    fn capability_counts_demonstrated_fraction() {
        let dataset = four_instance_dataset();
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        assert_eq!(taxonomy.skill_count(), 1);
        let (c, observed) =
            build_capability(&dataset, &taxonomy, 0.0, &PhraseResolver::Strict).unwrap();
        assert_eq!(c[0][0], 0.75); // 3 of 4
        assert_eq!(c[1][0], 0.0);
        assert!(observed[0][0] && observed[1][0]);
    }

    #[test]
    fn unprofiled_model_skill_cell_is_unobserved_zero() {
        let mut dataset = four_instance_dataset();
        // Model b loses all profiles: nothing observed for it.
        dataset.profiles.retain(|p| p.model_id != "b");
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let (c, observed) =
            build_capability(&dataset, &taxonomy, 0.0, &PhraseResolver::Strict).unwrap();
        assert_eq!(c[1][0], 0.0);
        assert!(!observed[1][0]);
        assert!(observed[0][0]);
    }

    #[test]
    fn full_demonstration_gives_capability_one() {
        let mut dataset = four_instance_dataset();
        for p in &mut dataset.profiles {
            if p.model_id == "a" {
                for m in &mut p.mentions {
                    m.status = MentionStatus::Demonstrated;
                }
            }
        }
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let (c, _) = build_capability(&dataset, &taxonomy, 0.0, &PhraseResolver::Strict).unwrap();
        assert_eq!(c[0][0], 1.0);
    }

    #[test]
    fn requirements_take_union_across_models() {
        // Model a demonstrates the skill, model b misses it, same instance:
        // the instance requires it either way.
        let dataset = four_instance_dataset();
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let reqs =
            instance_requirements(&dataset, &taxonomy, 0.0, &PhraseResolver::Strict).unwrap();
        let key = ("t1".to_string(), "i1".to_string());
        assert_eq!(reqs[&key].len(), 1);
    }

    #[test]
    fn mentions_below_kappa_do_not_create_requirements() {
        let mut dataset = four_instance_dataset();
        for p in &mut dataset.profiles {
            for m in &mut p.mentions {
                m.criticality = 0.2;
            }
        }
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let reqs =
            instance_requirements(&dataset, &taxonomy, 0.5, &PhraseResolver::Strict).unwrap();
        assert!(reqs.values().all(|set| set.is_empty()));
    }

    #[test]
    fn requirement_matrix_thresholds_on_fraction() {
        // 6 of 10 instances require the skill: R = 1 at rho 0.5.
        // A second skill on 4 of 10 instances stays 0.
        let mut dataset = four_instance_dataset();
        dataset.outcomes.clear();
        dataset.profiles.clear();
        for i in 0..10 {
            let id = format!("i{i}");
            dataset.outcomes.push(outcome("a", "t1", &id, true));
            let mut mentions = Vec::new();
            if i < 6 {
                mentions.push(mention(
                    "numerical calculation",
                    MentionStatus::Demonstrated,
                    1.0,
                ));
            }
            if i < 4 {
                mentions.push(mention(
                    "temporal reasoning",
                    MentionStatus::Missing,
                    1.0,
                ));
            }
            dataset.profiles.push(profile("a", "t1", &id, mentions));
        }
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let r = build_requirement(&dataset, &taxonomy, 0.0, 0.5, &PhraseResolver::Strict).unwrap();
        let numeric = taxonomy.phrase_map["numerical calculation"];
        let temporal = taxonomy.phrase_map["temporal reasoning"];
        assert_eq!(r[0][numeric], 1);
        assert_eq!(r[0][temporal], 0);

        // rho = 0 marks any skill mentioned at least once.
        let r0 = build_requirement(&dataset, &taxonomy, 0.0, 0.0, &PhraseResolver::Strict).unwrap();
        assert_eq!(r0[0][numeric], 1);
        assert_eq!(r0[0][temporal], 1);
    }

    #[test]
    fn requirement_matrix_errors_on_unprofiled_task() {
        let mut dataset = four_instance_dataset();
        dataset.tasks.push(TaskSpec {
            task_id: "ghost-task".into(),
            metric_name: "accuracy".into(),
        });
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let err =
            build_requirement(&dataset, &taxonomy, 0.0, 0.5, &PhraseResolver::Strict).unwrap_err();
        assert!(matches!(err, MatrixError::TaskWithoutProfiles(t) if t == "ghost-task"));
    }

    #[test]
    fn cost_vector_follows_mode_and_order() {
        let dataset = four_instance_dataset();
        assert_eq!(
            build_cost_vector(&dataset, CostMode::Monetary),
            vec![10.0, 0.88]
        );
        assert_eq!(
            build_cost_vector(&dataset, CostMode::Latency),
            vec![200.0, 50.0]
        );
        let empty = Dataset::default();
        assert!(build_cost_vector(&empty, CostMode::Monetary).is_empty());
    }

    #[test]
    fn matrices_round_trip_through_json() {
        let dataset = four_instance_dataset();
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let matrices =
            build_matrices(&dataset, &taxonomy, 0.0, 0.5, &PhraseResolver::Strict).unwrap();
        let json = serde_json::to_string(&matrices).unwrap();
        for key in ["\"C\"", "\"R\"", "\"c\"", "\"observed\"", "\"latency\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let back: CapabilityMatrices = serde_json::from_str(&json).unwrap();
        assert_eq!(back, matrices);
    }

    /// Naive recomputation of C and R directly from the definitions, used to
    /// cross-check the builder on small datasets.
    fn naive_c_and_r(
        dataset: &Dataset,
        taxonomy: &SkillTaxonomy,
        kappa: f64,
        rho: f64,
    ) -> (Vec<Vec<f64>>, Vec<Vec<u8>>) {
        let s_count = taxonomy.skill_count();
        let instances: BTreeSet<InstanceKey> = dataset
            .profiles
            .iter()
            .map(|p| (p.task_id.clone(), p.instance_id.clone()))
            .collect();
        let requires = |key: &InstanceKey, s: usize| -> bool {
            dataset.profiles.iter().any(|p| {
                (p.task_id.clone(), p.instance_id.clone()) == *key
                    && p.mentions.iter().any(|m| {
                        m.criticality >= kappa && taxonomy.phrase_map.get(&m.phrase) == Some(&s)
                    })
            })
        };
        let mut c = vec![vec![0.0; s_count]; dataset.models.len()];
        for (mi, model) in dataset.models.iter().enumerate() {
            for s in 0..s_count {
                let mut denom = 0;
                let mut numer = 0;
                for key in &instances {
                    if !requires(key, s) {
                        continue;
                    }
                    let profile = dataset.profiles.iter().find(|p| {
                        p.model_id == model.model_id
                            && (p.task_id.clone(), p.instance_id.clone()) == *key
                    });
                    if let Some(p) = profile {
                        denom += 1;
                        if p.mentions.iter().any(|m| {
                            m.status == MentionStatus::Demonstrated
                                && m.criticality >= kappa
                                && taxonomy.phrase_map.get(&m.phrase) == Some(&s)
                        }) {
                            numer += 1;
                        }
                    }
                }
                if denom > 0 {
                    c[mi][s] = numer as f64 / denom as f64;
                }
            }
        }
        let mut r = vec![vec![0u8; s_count]; dataset.tasks.len()];
        for (ti, task) in dataset.tasks.iter().enumerate() {
            let task_instances: Vec<&InstanceKey> = instances
                .iter()
                .filter(|(t, _)| t == &task.task_id)
                .collect();
            for s in 0..s_count {
                let requiring = task_instances.iter().filter(|k| requires(k, s)).count();
                if !task_instances.is_empty()
                    && requiring as f64 / task_instances.len() as f64 >= rho
                {
                    r[ti][s] = 1;
                }
            }
        }
        (c, r)
    }

    #[test]
    fn builder_matches_naive_reference_on_small_dataset() {
        let mut dataset = four_instance_dataset();
        // Add a second task with mixed mentions for a denser check.
        dataset.tasks.push(TaskSpec {
            task_id: "t2".into(),
            metric_name: "accuracy".into(),
        });
        for i in ["j1", "j2"] {
            dataset.outcomes.push(outcome("a", "t2", i, true));
            dataset.outcomes.push(outcome("b", "t2", i, true));
            dataset.profiles.push(profile(
                "a",
                "t2",
                i,
                vec![mention("temporal reasoning", MentionStatus::Demonstrated, 0.8)],
            ));
        }
        dataset.profiles.push(profile(
            "b",
            "t2",
            "j1",
            vec![mention("temporal reasoning", MentionStatus::Missing, 0.9)],
        ));
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        for kappa in [0.0, 0.5, 0.85] {
            for rho in [0.0, 0.5, 1.0] {
                let matrices =
                    build_matrices(&dataset, &taxonomy, kappa, rho, &PhraseResolver::Strict)
                        .unwrap();
                let (c, r) = naive_c_and_r(&dataset, &taxonomy, kappa, rho);
                assert_eq!(matrices.capability, c, "kappa={kappa} rho={rho}");
                assert_eq!(matrices.requirement, r, "kappa={kappa} rho={rho}");
            }
        }
    }

    #[test]
    fn raising_kappa_never_grows_requirement_sets() {
        let dataset = four_instance_dataset();
        let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
        let mut last: Option<BTreeMap<InstanceKey, BTreeSet<usize>>> = None;
        for kappa in [0.0, 0.3, 0.6, 0.9, 1.0] {
            let reqs =
                instance_requirements(&dataset, &taxonomy, kappa, &PhraseResolver::Strict).unwrap();
            if let Some(prev) = &last {
                for (key, set) in &reqs {
                    assert!(set.is_subset(&prev[key]));
                }
            }
            last = Some(reqs);
        }
    }
}
