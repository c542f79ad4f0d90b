//! Critic-based skill profiling.
//!
//! A critic receives the task input, reference solution, and model output,
//! and replies with a JSON assessment of demonstrated and missing skills.
//! The adapter boundary is a plain text-in/text-out callable so live LLM
//! backends can be plugged in, while the bundled [`MockCritic`] keeps every
//! test and acceptance run offline and deterministic.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::records::{normalize_phrase, InstanceProfile, MentionStatus, SkillMention};

/// Everything the critic needs to judge one (model, task, instance) triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct CritiqueRequest {
    pub task_input: String,
    pub reference_solution: String,
    pub model_output: String,
    pub model_id: String,
    pub task_id: String,
    pub instance_id: String,
}

impl CritiqueRequest {
    pub fn validate(&self) -> Result<(), CriticError> {
        for (name, text) in [
            ("task_input", &self.task_input),
            ("reference_solution", &self.reference_solution),
            ("model_output", &self.model_output),
        ] {
            if text.trim().is_empty() {
                return Err(CriticError::EmptyField(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CriticError {
    #[error("critique request field \"{0}\" is empty")]
    EmptyField(&'static str),
    #[error("no JSON object found in critic response: {raw}")]
    NoJsonObject { raw: String },
    #[error("malformed critic JSON: {0}")]
    MalformedJson(String),
    #[error("criticality {value} for skill \"{skill}\" outside [0, 1]")]
    CriticalityRange { skill: String, value: f64 },
    #[error("malformed critic prompt: {0}")]
    MalformedPrompt(String),
    #[error("critic backend error: {0}")]
    Backend(String),
}

/// Abstract critic: prompt text in, response text out. Implementations must
/// not share mutable state between calls; the mock adapter is additionally
/// required to be deterministic.
pub trait CriticAdapter {
    fn complete(&self, prompt: &str) -> Result<String, CriticError>;
    /// Identity label recorded for provenance (e.g. "mock", an endpoint URL).
    fn identity(&self) -> String;
}

const SECTION_TASK_INPUT: &str = "### TASK INPUT";
const SECTION_REFERENCE: &str = "### REFERENCE SOLUTION";
const SECTION_MODEL_OUTPUT: &str = "### MODEL OUTPUT";
const SECTION_INSTRUCTIONS: &str = "### INSTRUCTIONS";

const INSTRUCTIONS: &str = "Compare the model output against the reference solution for the \
task above. Reply with a single JSON object and nothing else, using exactly this shape: \
{\"demonstrated\": [{\"skill\": \"...\", \"criticality\": 0.0}], \"missing\": [{\"skill\": \
\"...\", \"criticality\": 0.0}]}. List under \"demonstrated\" the skills the model output \
successfully exhibited, and under \"missing\" the skills the reference required but the model \
failed to demonstrate. Criticality is how critical the skill was to the outcome, from 0 to 1.";

/// Escape embedded text so no content line can be mistaken for a section
/// delimiter. Lines starting with `###` or `\` gain a leading backslash;
/// [`unescape_section`] inverts this exactly.
fn escape_section(text: &str) -> String {
    text.split('\n')
        .map(|line| {
            if line.starts_with("###") || line.starts_with('\\') {
                format!("\\{line}")
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn unescape_section(text: &str) -> String {
    text.split('\n')
        .map(|line| line.strip_prefix('\\').unwrap_or(line))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Build the critic prompt: the three texts in labeled sections followed by
/// the response-format instructions. Pure function of the request.
pub fn build_critic_prompt(req: &CritiqueRequest) -> String {
    format!(
        "{SECTION_TASK_INPUT}\n{}\n{SECTION_REFERENCE}\n{}\n{SECTION_MODEL_OUTPUT}\n{}\n{SECTION_INSTRUCTIONS}\n{INSTRUCTIONS}",
        escape_section(&req.task_input),
        escape_section(&req.reference_solution),
        escape_section(&req.model_output),
    )
}

/// The three texts recovered from a prompt built by [`build_critic_prompt`].
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSections {
    pub task_input: String,
    pub reference_solution: String,
    pub model_output: String,
}

/// Parse a prompt back into its sections. Used by the mock adapter and by
/// tests asserting that delimiter escaping keeps the structure unambiguous.
pub fn parse_prompt(prompt: &str) -> Result<PromptSections, CriticError> {
    let mut sections: Vec<(usize, &str)> = Vec::new();
    let mut current: Option<(&str, Vec<&str>)> = None;
    let mut collected: BTreeMap<&str, String> = BTreeMap::new();
    for line in prompt.split('\n') {
        let delim = matches!(
            line,
            SECTION_TASK_INPUT | SECTION_REFERENCE | SECTION_MODEL_OUTPUT | SECTION_INSTRUCTIONS
        );
        if delim {
            if let Some((name, lines)) = current.take() {
                collected.insert(name, unescape_section(&lines.join("\n")));
            }
            sections.push((sections.len(), line));
            current = Some((line, Vec::new()));
        } else if let Some((_, lines)) = current.as_mut() {
            lines.push(line);
        } else {
            return Err(CriticError::MalformedPrompt(
                "content before first section delimiter".to_string(),
            ));
        }
    }
    if let Some((name, lines)) = current.take() {
        collected.insert(name, unescape_section(&lines.join("\n")));
    }
    if sections.len() != 4 {
        return Err(CriticError::MalformedPrompt(format!(
            "expected 4 section delimiters, found {}",
            sections.len()
        )));
    }
    Ok(PromptSections {
        task_input: collected.remove(SECTION_TASK_INPUT).unwrap_or_default(),
        reference_solution: collected.remove(SECTION_REFERENCE).unwrap_or_default(),
        model_output: collected.remove(SECTION_MODEL_OUTPUT).unwrap_or_default(),
    })
}

/// First balanced JSON object in `text`, honoring string literals and
/// escapes. This is what lets the parser tolerate chatty critics that wrap
/// their JSON in prose.
pub fn extract_first_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

#[derive(Debug, Deserialize)]
struct RawAssessment {
    #[serde(default)]
    demonstrated: Vec<RawSkill>,
    #[serde(default)]
    missing: Vec<RawSkill>,
}

#[derive(Debug, Deserialize)]
struct RawSkill {
    skill: String,
    criticality: Option<f64>,
}

/// Extract the first JSON object from a critic response and map it onto an
/// [`InstanceProfile`] for the given triplet.
///
/// Criticality defaults to 0.5 when the critic omits it. Skill phrases are
/// normalized; mentions whose phrase normalizes to empty are dropped, and
/// repeated (phrase, status) pairs keep their first occurrence.
pub fn parse_critic_response(
    text: &str,
    model_id: &str,
    task_id: &str,
    instance_id: &str,
) -> Result<InstanceProfile, CriticError> {
    let object = extract_first_json_object(text).ok_or_else(|| CriticError::NoJsonObject {
        raw: text.to_string(),
    })?;
    let raw: RawAssessment =
        serde_json::from_str(object).map_err(|e| CriticError::MalformedJson(e.to_string()))?;

    let mut mentions = Vec::new();
    let mut seen = BTreeSet::new();
    for (status, skills) in [
        (MentionStatus::Demonstrated, &raw.demonstrated),
        (MentionStatus::Missing, &raw.missing),
    ] {
        for s in skills {
            let phrase = normalize_phrase(&s.skill);
            if phrase.is_empty() {
                continue;
            }
            let criticality = s.criticality.unwrap_or(0.5);
            if !(0.0..=1.0).contains(&criticality) {
                return Err(CriticError::CriticalityRange {
                    skill: phrase,
                    value: criticality,
                });
            }
            if seen.insert((phrase.clone(), status)) {
                mentions.push(SkillMention {
                    phrase,
                    status,
                    criticality,
                });
            }
        }
    }
    Ok(InstanceProfile {
        model_id: model_id.to_string(),
        task_id: task_id.to_string(),
        instance_id: instance_id.to_string(),
        mentions,
    })
}

/// Keyword-to-skill rulebook driving the mock critic.
pub type Rulebook = BTreeMap<String, String>;

fn contains_keyword(text: &str, keyword: &str) -> bool {
    text.to_lowercase().contains(&keyword.to_lowercase())
}

/// Deterministic critic double. A skill counts as demonstrated when one of
/// its keywords appears in both the reference solution and the model output,
/// and as missing when a keyword appears in the reference only. All
/// criticalities are 1.0; the output always matches the schema expected by
/// [`parse_critic_response`].
pub fn mock_critic_response(
    reference_solution: &str,
    model_output: &str,
    rulebook: &Rulebook,
) -> String {
    let mut demonstrated = BTreeSet::new();
    let mut missing = BTreeSet::new();
    for (keyword, skill) in rulebook {
        let skill = normalize_phrase(skill);
        if skill.is_empty() {
            continue;
        }
        let in_reference = contains_keyword(reference_solution, keyword);
        let in_output = contains_keyword(model_output, keyword);
        if in_reference && in_output {
            demonstrated.insert(skill);
        } else if in_reference {
            missing.insert(skill);
        }
    }
    missing.retain(|s| !demonstrated.contains(s));

    let entry = |skill: &String| {
        serde_json::json!({ "skill": skill, "criticality": 1.0 })
    };
    serde_json::json!({
        "demonstrated": demonstrated.iter().map(entry).collect::<Vec<_>>(),
        "missing": missing.iter().map(entry).collect::<Vec<_>>(),
    })
    .to_string()
}

/// Convenience form of [`mock_critic_response`] taking a full request.
pub fn mock_critic(req: &CritiqueRequest, rulebook: &Rulebook) -> String {
    mock_critic_response(&req.reference_solution, &req.model_output, rulebook)
}

/// [`CriticAdapter`] wrapping the mock rules. Recovers the reference and
/// output texts from the prompt itself, so it honors the same text-in /
/// text-out contract as a live adapter.
#[derive(Debug, Clone)]
pub struct MockCritic {
    pub rulebook: Rulebook,
}

impl MockCritic {
    pub fn new(rulebook: Rulebook) -> Self {
        Self { rulebook }
    }
}

impl CriticAdapter for MockCritic {
    fn complete(&self, prompt: &str) -> Result<String, CriticError> {
        let sections = parse_prompt(prompt)?;
        Ok(mock_critic_response(
            &sections.reference_solution,
            &sections.model_output,
            &self.rulebook,
        ))
    }

    fn identity(&self) -> String {
        "mock".to_string()
    }
}

/// Full profiling step: validate the request, build the prompt, call the
/// adapter, parse the response.
pub fn critique(
    adapter: &dyn CriticAdapter,
    req: &CritiqueRequest,
) -> Result<InstanceProfile, CriticError> {
    req.validate()?;
    let prompt = build_critic_prompt(req);
    let response = adapter.complete(&prompt)?;
    parse_critic_response(&response, &req.model_id, &req.task_id, &req.instance_id)
}
