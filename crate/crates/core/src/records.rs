//! Evaluation-data model and JSONL fixture ingestion.
//!
//! A [`Dataset`] joins four record kinds: model specs (with per-query cost),
//! task specs, per-instance outcomes, and critic skill profiles. Each kind
//! lives in its own JSONL file, one object per line. Parsing validates
//! referential integrity and primary-key uniqueness up front; softer range
//! checks are reported by [`validate_dataset`] as diagnostics instead of
//! failures so hand-built datasets can be inspected.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// One model in the selection pool. `cost_per_query` is USD per query; unit
/// conversion from per-token pricing happens at fixture-authoring time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub cost_per_query: f64,
    #[serde(default)]
    pub latency_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub metric_name: String,
}

/// Observed performance of one model on one task instance. `score` defaults
/// to 1.0 when `correct` is true and 0.0 otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub model_id: String,
    pub task_id: String,
    pub instance_id: String,
    pub correct: bool,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionStatus {
    Demonstrated,
    Missing,
}

impl fmt::Display for MentionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Demonstrated => f.write_str("demonstrated"),
            Self::Missing => f.write_str("missing"),
        }
    }
}

/// One skill judgment inside a critic profile. Phrases are stored
/// whitespace-normalized and lowercased.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillMention {
    pub phrase: String,
    pub status: MentionStatus,
    pub criticality: f64,
}

/// Critic judgment for one (model, task, instance) triplet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceProfile {
    pub model_id: String,
    pub task_id: String,
    pub instance_id: String,
    pub mentions: Vec<SkillMention>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub models: Vec<ModelSpec>,
    pub tasks: Vec<TaskSpec>,
    pub outcomes: Vec<InstanceOutcome>,
    pub profiles: Vec<InstanceProfile>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: malformed record: {message}")]
    MalformedLine {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: unresolved reference to {key}")]
    ReferentialIntegrity {
        file: String,
        line: usize,
        key: String,
    },
    #[error("{file}:{line}: duplicate key {key}")]
    DuplicateKey {
        file: String,
        line: usize,
        key: String,
    },
}

/// Non-fatal finding attached to a record locator, e.g. an out-of-range
/// criticality or an unknown JSON field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub locator: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locator, self.message)
    }
}

/// Paths to the four JSONL files making up a dataset.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub models: PathBuf,
    pub tasks: PathBuf,
    pub outcomes: PathBuf,
    pub profiles: PathBuf,
}

impl DatasetPaths {
    /// Conventional layout: `models.jsonl`, `tasks.jsonl`, `outcomes.jsonl`,
    /// `profiles.jsonl` inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            models: dir.join("models.jsonl"),
            tasks: dir.join("tasks.jsonl"),
            outcomes: dir.join("outcomes.jsonl"),
            profiles: dir.join("profiles.jsonl"),
        }
    }
}

/// A parsed dataset plus any unknown-field warnings collected along the way.
#[derive(Debug)]
pub struct ParsedDataset {
    pub dataset: Dataset,
    pub warnings: Vec<Diagnostic>,
}

/// Trim, collapse internal whitespace runs to a single space, lowercase.
pub fn normalize_phrase(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn categorical_criticality(label: &str) -> Option<f64> {
    match label {
        "critical" => Some(1.0),
        "major" => Some(0.6),
        "minor" => Some(0.3),
        _ => None,
    }
}

struct LineReader {
    file: String,
    lines: Vec<(usize, Value)>,
}

fn read_jsonl(path: &Path) -> Result<LineReader, DatasetError> {
    let file_label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: Value =
            serde_json::from_str(trimmed).map_err(|e| DatasetError::MalformedLine {
                file: file_label.clone(),
                line: line_no,
                message: e.to_string(),
            })?;
        lines.push((line_no, value));
    }
    Ok(LineReader {
        file: file_label,
        lines,
    })
}

fn object<'v>(
    value: &'v Value,
    file: &str,
    line: usize,
) -> Result<&'v serde_json::Map<String, Value>, DatasetError> {
    value.as_object().ok_or_else(|| DatasetError::MalformedLine {
        file: file.to_string(),
        line,
        message: "record must be a JSON object".to_string(),
    })
}

fn warn_unknown_fields(
    obj: &serde_json::Map<String, Value>,
    known: &[&str],
    file: &str,
    line: usize,
    warnings: &mut Vec<Diagnostic>,
) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            warnings.push(Diagnostic {
                locator: format!("{file}:{line}"),
                message: format!("unknown field \"{key}\" ignored"),
            });
        }
    }
}

fn field<'v>(
    obj: &'v serde_json::Map<String, Value>,
    name: &str,
    file: &str,
    line: usize,
) -> Result<&'v Value, DatasetError> {
    obj.get(name).ok_or_else(|| DatasetError::MalformedLine {
        file: file.to_string(),
        line,
        message: format!("missing required field \"{name}\""),
    })
}

fn string_field(
    obj: &serde_json::Map<String, Value>,
    name: &str,
    file: &str,
    line: usize,
) -> Result<String, DatasetError> {
    field(obj, name, file, line)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: format!("field \"{name}\" must be a string"),
        })
}

fn number_field(
    obj: &serde_json::Map<String, Value>,
    name: &str,
    file: &str,
    line: usize,
) -> Result<f64, DatasetError> {
    field(obj, name, file, line)?
        .as_f64()
        .ok_or_else(|| DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: format!("field \"{name}\" must be a number"),
        })
}

fn bool_field(
    obj: &serde_json::Map<String, Value>,
    name: &str,
    file: &str,
    line: usize,
) -> Result<bool, DatasetError> {
    field(obj, name, file, line)?
        .as_bool()
        .ok_or_else(|| DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: format!("field \"{name}\" must be a boolean"),
        })
}

/// Criticality accepts either a number or the categorical labels
/// critical / major / minor (mapped to 1.0 / 0.6 / 0.3 at ingestion).
fn criticality_field(
    value: &Value,
    file: &str,
    line: usize,
) -> Result<f64, DatasetError> {
    match value {
        Value::Number(n) => n.as_f64().ok_or_else(|| DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: "criticality number out of f64 range".to_string(),
        }),
        Value::String(label) => {
            categorical_criticality(label).ok_or_else(|| DatasetError::MalformedLine {
                file: file.to_string(),
                line,
                message: format!(
                    "unknown criticality label \"{label}\" (expected critical, major, or minor)"
                ),
            })
        }
        _ => Err(DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: "criticality must be a number or label".to_string(),
        }),
    }
}

/// Parse and join the four JSONL files into a validated [`Dataset`].
///
/// Hard failures: malformed JSON (with file and line), duplicate primary
/// keys, and unresolved foreign keys. Unknown fields are ignored with a
/// warning diagnostic. Mention phrases come out whitespace-normalized and
/// lowercased; missing outcome scores default from `correct`.
pub fn parse_dataset(paths: &DatasetPaths) -> Result<ParsedDataset, DatasetError> {
    let mut warnings = Vec::new();
    let mut dataset = Dataset::default();

    let reader = read_jsonl(&paths.models)?;
    let mut model_ids = HashSet::new();
    for (line, value) in &reader.lines {
        let obj = object(value, &reader.file, *line)?;
        warn_unknown_fields(
            obj,
            &["model_id", "cost_per_query", "latency_ms", "display_name"],
            &reader.file,
            *line,
            &mut warnings,
        );
        let spec = ModelSpec {
            model_id: string_field(obj, "model_id", &reader.file, *line)?,
            cost_per_query: number_field(obj, "cost_per_query", &reader.file, *line)?,
            latency_ms: match obj.get("latency_ms") {
                Some(_) => number_field(obj, "latency_ms", &reader.file, *line)?,
                None => 0.0,
            },
            display_name: match obj.get("display_name") {
                Some(Value::String(s)) => Some(s.clone()),
                Some(Value::Null) | None => None,
                Some(_) => {
                    return Err(DatasetError::MalformedLine {
                        file: reader.file.clone(),
                        line: *line,
                        message: "field \"display_name\" must be a string".to_string(),
                    })
                }
            },
        };
        if !model_ids.insert(spec.model_id.clone()) {
            return Err(DatasetError::DuplicateKey {
                file: reader.file.clone(),
                line: *line,
                key: format!("model_id \"{}\"", spec.model_id),
            });
        }
        dataset.models.push(spec);
    }

    let reader = read_jsonl(&paths.tasks)?;
    let mut task_ids = HashSet::new();
    for (line, value) in &reader.lines {
        let obj = object(value, &reader.file, *line)?;
        warn_unknown_fields(
            obj,
            &["task_id", "metric_name"],
            &reader.file,
            *line,
            &mut warnings,
        );
        let spec = TaskSpec {
            task_id: string_field(obj, "task_id", &reader.file, *line)?,
            metric_name: string_field(obj, "metric_name", &reader.file, *line)?,
        };
        if !task_ids.insert(spec.task_id.clone()) {
            return Err(DatasetError::DuplicateKey {
                file: reader.file.clone(),
                line: *line,
                key: format!("task_id \"{}\"", spec.task_id),
            });
        }
        dataset.tasks.push(spec);
    }

    let reader = read_jsonl(&paths.outcomes)?;
    let mut outcome_keys = HashSet::new();
    for (line, value) in &reader.lines {
        let obj = object(value, &reader.file, *line)?;
        warn_unknown_fields(
            obj,
            &["model_id", "task_id", "instance_id", "correct", "score"],
            &reader.file,
            *line,
            &mut warnings,
        );
        let model_id = string_field(obj, "model_id", &reader.file, *line)?;
        let task_id = string_field(obj, "task_id", &reader.file, *line)?;
        let instance_id = string_field(obj, "instance_id", &reader.file, *line)?;
        let correct = bool_field(obj, "correct", &reader.file, *line)?;
        if !model_ids.contains(&model_id) {
            return Err(DatasetError::ReferentialIntegrity {
                file: reader.file.clone(),
                line: *line,
                key: format!("model_id \"{model_id}\""),
            });
        }
        if !task_ids.contains(&task_id) {
            return Err(DatasetError::ReferentialIntegrity {
                file: reader.file.clone(),
                line: *line,
                key: format!("task_id \"{task_id}\""),
            });
        }
        let score = match obj.get("score") {
            Some(Value::Null) | None => {
                if correct {
                    1.0
                } else {
                    0.0
                }
            }
            Some(_) => number_field(obj, "score", &reader.file, *line)?,
        };
        let key = (model_id.clone(), task_id.clone(), instance_id.clone());
        if !outcome_keys.insert(key) {
            return Err(DatasetError::DuplicateKey {
                file: reader.file.clone(),
                line: *line,
                key: format!("(\"{model_id}\", \"{task_id}\", \"{instance_id}\")"),
            });
        }
        dataset.outcomes.push(InstanceOutcome {
            model_id,
            task_id,
            instance_id,
            correct,
            score,
        });
    }

    let reader = read_jsonl(&paths.profiles)?;
    let mut profile_keys = HashSet::new();
    for (line, value) in &reader.lines {
        let profile = parse_profile_value(value, &reader.file, *line, &mut warnings)?;
        let triplet = (
            profile.model_id.clone(),
            profile.task_id.clone(),
            profile.instance_id.clone(),
        );
        if !outcome_keys.contains(&triplet) {
            return Err(DatasetError::ReferentialIntegrity {
                file: reader.file.clone(),
                line: *line,
                key: format!(
                    "outcome (\"{}\", \"{}\", \"{}\")",
                    profile.model_id, profile.task_id, profile.instance_id
                ),
            });
        }
        if !profile_keys.insert(triplet) {
            return Err(DatasetError::DuplicateKey {
                file: reader.file.clone(),
                line: *line,
                key: format!(
                    "(\"{}\", \"{}\", \"{}\")",
                    profile.model_id, profile.task_id, profile.instance_id
                ),
            });
        }
        dataset.profiles.push(profile);
    }

    Ok(ParsedDataset { dataset, warnings })
}

fn parse_profile_value(
    value: &Value,
    file: &str,
    line: usize,
    warnings: &mut Vec<Diagnostic>,
) -> Result<InstanceProfile, DatasetError> {
    let obj = object(value, file, line)?;
    warn_unknown_fields(
        obj,
        &["model_id", "task_id", "instance_id", "mentions"],
        file,
        line,
        warnings,
    );
    let model_id = string_field(obj, "model_id", file, line)?;
    let task_id = string_field(obj, "task_id", file, line)?;
    let instance_id = string_field(obj, "instance_id", file, line)?;
    let raw_mentions = field(obj, "mentions", file, line)?
        .as_array()
        .ok_or_else(|| DatasetError::MalformedLine {
            file: file.to_string(),
            line,
            message: "field \"mentions\" must be an array".to_string(),
        })?;
    let mut mentions = Vec::with_capacity(raw_mentions.len());
    for raw in raw_mentions {
        let mobj = object(raw, file, line)?;
        warn_unknown_fields(
            mobj,
            &["phrase", "status", "criticality"],
            file,
            line,
            warnings,
        );
        let phrase = normalize_phrase(&string_field(mobj, "phrase", file, line)?);
        let status: MentionStatus =
            serde_json::from_value(field(mobj, "status", file, line)?.clone()).map_err(|_| {
                DatasetError::MalformedLine {
                    file: file.to_string(),
                    line,
                    message: "status must be \"demonstrated\" or \"missing\"".to_string(),
                }
            })?;
        let criticality = criticality_field(field(mobj, "criticality", file, line)?, file, line)?;
        mentions.push(SkillMention {
            phrase,
            status,
            criticality,
        });
    }
    Ok(InstanceProfile {
        model_id,
        task_id,
        instance_id,
        mentions,
    })
}

/// Read a standalone profiles.jsonl (no cross-file referential checks).
pub fn read_profiles(path: &Path) -> Result<(Vec<InstanceProfile>, Vec<Diagnostic>), DatasetError> {
    let reader = read_jsonl(path)?;
    let mut warnings = Vec::new();
    let mut profiles = Vec::with_capacity(reader.lines.len());
    for (line, value) in &reader.lines {
        profiles.push(parse_profile_value(value, &reader.file, *line, &mut warnings)?);
    }
    Ok((profiles, warnings))
}

/// Check every type invariant on an already-constructed dataset. Returns one
/// diagnostic per violation; an empty list means the dataset is well-formed.
pub fn validate_dataset(dataset: &Dataset) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut model_ids = HashSet::new();
    for (i, m) in dataset.models.iter().enumerate() {
        let loc = format!("models[{i}] model_id=\"{}\"", m.model_id);
        if !model_ids.insert(m.model_id.clone()) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: "duplicate model_id".to_string(),
            });
        }
        if !(m.cost_per_query >= 0.0) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: format!("cost_per_query {} must be >= 0", m.cost_per_query),
            });
        }
        if !(m.latency_ms >= 0.0) {
            diags.push(Diagnostic {
                locator: loc,
                message: format!("latency_ms {} must be >= 0", m.latency_ms),
            });
        }
    }

    let mut task_ids = HashSet::new();
    for (i, t) in dataset.tasks.iter().enumerate() {
        if !task_ids.insert(t.task_id.clone()) {
            diags.push(Diagnostic {
                locator: format!("tasks[{i}] task_id=\"{}\"", t.task_id),
                message: "duplicate task_id".to_string(),
            });
        }
    }

    let mut outcome_keys = HashSet::new();
    for (i, o) in dataset.outcomes.iter().enumerate() {
        let loc = format!(
            "outcomes[{i}] (\"{}\", \"{}\", \"{}\")",
            o.model_id, o.task_id, o.instance_id
        );
        if !model_ids.contains(&o.model_id) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: format!("unresolved model_id \"{}\"", o.model_id),
            });
        }
        if !task_ids.contains(&o.task_id) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: format!("unresolved task_id \"{}\"", o.task_id),
            });
        }
        if !(0.0..=1.0).contains(&o.score) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: format!("score {} outside [0, 1]", o.score),
            });
        }
        if !outcome_keys.insert((o.model_id.clone(), o.task_id.clone(), o.instance_id.clone())) {
            diags.push(Diagnostic {
                locator: loc,
                message: "duplicate (model_id, task_id, instance_id)".to_string(),
            });
        }
    }

    let mut profile_keys = HashSet::new();
    for (i, p) in dataset.profiles.iter().enumerate() {
        let loc = format!(
            "profiles[{i}] (\"{}\", \"{}\", \"{}\")",
            p.model_id, p.task_id, p.instance_id
        );
        let triplet = (p.model_id.clone(), p.task_id.clone(), p.instance_id.clone());
        if !outcome_keys.contains(&triplet) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: "profile has no matching outcome".to_string(),
            });
        }
        if !profile_keys.insert(triplet) {
            diags.push(Diagnostic {
                locator: loc.clone(),
                message: "duplicate (model_id, task_id, instance_id)".to_string(),
            });
        }
        let mut seen_mentions = HashSet::new();
        for m in &p.mentions {
            if m.phrase.is_empty() {
                diags.push(Diagnostic {
                    locator: loc.clone(),
                    message: "mention phrase empty after normalization".to_string(),
                });
            }
            if m.phrase != normalize_phrase(&m.phrase) {
                diags.push(Diagnostic {
                    locator: loc.clone(),
                    message: format!("mention phrase \"{}\" is not normalized", m.phrase),
                });
            }
            if !(0.0..=1.0).contains(&m.criticality) {
                diags.push(Diagnostic {
                    locator: loc.clone(),
                    message: format!(
                        "mention \"{}\" criticality {} outside [0, 1]",
                        m.phrase, m.criticality
                    ),
                });
            }
            if !seen_mentions.insert((m.phrase.clone(), m.status)) {
                diags.push(Diagnostic {
                    locator: loc.clone(),
                    message: format!("duplicate mention (\"{}\", {})", m.phrase, m.status),
                });
            }
        }
    }

    diags
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), DatasetError> {
    let mut file = File::create(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    for record in records {
        let line = serde_json::to_string(record).expect("record serialization cannot fail");
        writeln!(file, "{line}").map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

/// Serialize a dataset back into the four-file JSONL layout, preserving
/// record order. Round-trips through [`parse_dataset`] field-for-field.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), DatasetError> {
    std::fs::create_dir_all(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let paths = DatasetPaths::in_dir(dir);
    write_jsonl(&paths.models, &dataset.models)?;
    write_jsonl(&paths.tasks, &dataset.tasks)?;
    write_jsonl(&paths.outcomes, &dataset.outcomes)?;
    write_jsonl(&paths.profiles, &dataset.profiles)?;
    Ok(())
}

impl Dataset {
    /// Mean outcome score of `model_id` on `task_id`, if any outcome exists.
    pub fn mean_score(&self, model_id: &str, task_id: &str) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for o in &self.outcomes {
            if o.model_id == model_id && o.task_id == task_id {
                sum += o.score;
                n += 1;
            }
        }
        (n > 0).then(|| sum / n as f64)
    }

    /// Number of outcome instances recorded for `task_id` (distinct
    /// instance ids).
    pub fn instance_count(&self, task_id: &str) -> usize {
        let mut seen = HashSet::new();
        for o in &self.outcomes {
            if o.task_id == task_id {
                seen.insert(o.instance_id.as_str());
            }
        }
        seen.len()
    }

    /// Copy of this dataset with one task (its spec, outcomes, and profiles)
    /// removed. Models are kept.
    pub fn without_task(&self, task_id: &str) -> Dataset {
        Dataset {
            models: self.models.clone(),
            tasks: self
                .tasks
                .iter()
                .filter(|t| t.task_id != task_id)
                .cloned()
                .collect(),
            outcomes: self
                .outcomes
                .iter()
                .filter(|o| o.task_id != task_id)
                .cloned()
                .collect(),
            profiles: self
                .profiles
                .iter()
                .filter(|p| p.task_id != task_id)
                .cloned()
                .collect(),
        }
    }

    /// Profiles grouped by (task_id, instance_id), in first-seen order.
    pub fn profiles_by_instance(&self) -> Vec<((String, String), Vec<&InstanceProfile>)> {
        let mut order = Vec::new();
        let mut map: HashMap<(String, String), Vec<&InstanceProfile>> = HashMap::new();
        for p in &self.profiles {
            let key = (p.task_id.clone(), p.instance_id.clone());
            if !map.contains_key(&key) {
                order.push(key.clone());
            }
            map.entry(key).or_default().push(p);
        }
        order
            .into_iter()
            .map(|key| {
                let v = map.remove(&key).unwrap_or_default();
                (key, v)
            })
            .collect()
    }
}
