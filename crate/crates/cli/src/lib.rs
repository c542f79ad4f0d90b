//! Command-line front end: profile, taxonomy, matrices, train, select,
//! evaluate, frontier, and synth subcommands over one shared configuration.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 when a selection
//! query has no feasible model. Runtime errors go to standard error as
//! single-line JSON diagnostics; argument errors print the usual usage text.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use serde::Deserialize;

use skillpick_core::harness::{
    build_fold_artifacts, frontier, generate_synthetic, loocv, metrics, write_frontier_csv,
    FoldArtifacts, HarnessError, PredictorSource, SyntheticSpec,
};
use skillpick_core::matrices::MatrixError;
use skillpick_core::predictor::{
    cosine_similarity, predict, requirement_row, PredictorError,
};
use skillpick_core::profiling::{critique, CriticAdapter, CriticError, MockCritic, Rulebook};
use skillpick_core::records::{
    normalize_phrase, parse_dataset, read_profiles, write_dataset, Dataset, DatasetError,
    DatasetPaths,
};
use skillpick_core::selector::{
    filter_capable, infer_requirements, pareto_front, select, ParetoPoint, SelectError,
    SelectionConfig, SelectionPool,
};
use skillpick_core::taxonomy::{build_taxonomy, Embedder, SkillTaxonomy, TaxonomyError};

pub mod config;
mod live;

pub use config::{ConfigArgs, EngineConfig};
pub use live::LiveCritic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ErrorKind {
    Validation,
    Infeasible,
}

/// Error carrying its exit code and rendered as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    kind: ErrorKind,
    message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Infeasible,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Infeasible => 2,
        }
    }

    pub fn to_json_line(&self) -> String {
        let kind = match self.kind {
            ErrorKind::Validation => "validation",
            ErrorKind::Infeasible => "infeasible",
        };
        serde_json::json!({ "error": kind, "message": self.message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

macro_rules! validation_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(err: $ty) -> Self {
                CliError::validation(err.to_string())
            }
        })*
    };
}
validation_from!(DatasetError, TaxonomyError, MatrixError, PredictorError, CriticError);

impl From<SelectError> for CliError {
    fn from(err: SelectError) -> Self {
        match err {
            SelectError::Infeasible { .. } => CliError::infeasible(err.to_string()),
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        match err {
            HarnessError::Select(inner) => inner.into(),
            other => CliError::validation(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "skillpick",
    version,
    about = "Skill-profile capability matrices and budget-aware model selection"
)]
struct Cli {
    /// Flat key = value config file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Turn (task, reference, output) triples into skill profiles
    Profile {
        /// Triples JSONL: task_input, reference_solution, model_output + ids
        #[arg(long)]
        triples: PathBuf,
        /// Output profiles.jsonl
        #[arg(long)]
        out: PathBuf,
        /// Critic backend: mock (offline) or live (CRITIC_* env vars)
        #[arg(long, default_value = "mock")]
        critic: String,
        /// Keyword-to-skill JSON object driving the mock critic
        #[arg(long)]
        rulebook: Option<PathBuf>,
    },
    /// Induce a skill taxonomy from profiles
    Taxonomy {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Precomputed embeddings JSONL ({"phrase", "vector": [...]})
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Build capability matrices from a dataset directory
    Matrices {
        /// Directory holding models/tasks/outcomes/profiles .jsonl files
        #[arg(long)]
        dataset: PathBuf,
        /// Reuse a saved taxonomy instead of rebuilding
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the logistic performance predictor
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recommend a model for a task or explicit skill list
    Select {
        #[arg(long)]
        dataset: PathBuf,
        /// Task id whose requirement row drives selection
        #[arg(long)]
        task: Option<String>,
        /// Comma-separated explicit skill labels (overrides --task)
        #[arg(long)]
        skills: Option<String>,
        /// Also write the recommendation JSON here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-out evaluation against routing baselines
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-model (cost, mean score) frontier CSV
    Frontier {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset with known ground truth
    Synth {
        /// Model count
        #[arg(long = "M")]
        models: usize,
        /// Skill count
        #[arg(long = "S")]
        skills: usize,
        /// Task count
        #[arg(long = "T")]
        tasks: usize,
        /// Instances per task
        #[arg(long = "n")]
        instances: usize,
        /// Spread of the cost range
        #[arg(long, default_value_t = 5.0)]
        cost_spread: f64,
        /// Output dataset directory
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(
                err.kind(),
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion
            ) {
                print!("{err}");
                return 0;
            }
            eprint!("{err}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json_line());
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let config = EngineConfig::resolve(cli.config.as_deref(), &cli.overrides)?;
    match cli.command {
        Command::Profile {
            triples,
            out,
            critic,
            rulebook,
        } => cmd_profile(&triples, &out, &critic, rulebook.as_deref()),
        Command::Taxonomy {
            profiles,
            out,
            embeddings,
        } => cmd_taxonomy(&config, &profiles, &out, embeddings.as_deref()),
        Command::Matrices {
            dataset,
            taxonomy,
            out,
        } => cmd_matrices(&config, &dataset, taxonomy.as_deref(), &out),
        Command::Train { dataset, out } => cmd_train(&config, &dataset, &out),
        Command::Select {
            dataset,
            task,
            skills,
            out,
        } => cmd_select(&config, &dataset, task.as_deref(), skills.as_deref(), out.as_deref()),
        Command::Evaluate { dataset, out } => cmd_evaluate(&config, &dataset, &out),
        Command::Frontier { dataset, out } => cmd_frontier(&dataset, &out),
        Command::Synth {
            models,
            skills,
            tasks,
            instances,
            cost_spread,
            out,
        } => cmd_synth(&config, models, skills, tasks, instances, cost_spread, &out),
    }
}

fn load_dataset(dir: &Path) -> Result<Dataset, CliError> {
    let parsed = parse_dataset(&DatasetPaths::in_dir(dir))?;
    for warning in &parsed.warnings {
        eprintln!(
            "{}",
            serde_json::json!({ "warning": warning.message, "at": warning.locator })
        );
    }
    Ok(parsed.dataset)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::validation(e.to_string()))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
struct Triple {
    task_input: String,
    reference_solution: String,
    model_output: String,
    model_id: String,
    task_id: String,
    instance_id: String,
}

fn cmd_profile(
    triples_path: &Path,
    out: &Path,
    critic: &str,
    rulebook: Option<&Path>,
) -> Result<(), CliError> {
    let adapter: Box<dyn CriticAdapter> = match critic {
        "mock" => {
            let path = rulebook
                .ok_or_else(|| CliError::validation("the mock critic needs --rulebook"))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            let rulebook: Rulebook = serde_json::from_str(&text)
                .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
            Box::new(MockCritic::new(rulebook))
        }
        "live" => Box::new(LiveCritic::from_env()?),
        other => {
            return Err(CliError::validation(format!(
                "unknown critic \"{other}\" (expected mock or live)"
            )))
        }
    };

    let text = std::fs::read_to_string(triples_path)
        .map_err(|e| CliError::validation(format!("{}: {e}", triples_path.display())))?;
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let triple: Triple = serde_json::from_str(line).map_err(|e| {
            CliError::validation(format!("{}:{}: {e}", triples_path.display(), idx + 1))
        })?;
        let request = skillpick_core::profiling::CritiqueRequest {
            task_input: triple.task_input,
            reference_solution: triple.reference_solution,
            model_output: triple.model_output,
            model_id: triple.model_id,
            task_id: triple.task_id,
            instance_id: triple.instance_id,
        };
        let profile = critique(adapter.as_ref(), &request)?;
        lines.push(serde_json::to_string(&profile).expect("profile serialization"));
    }
    std::fs::write(out, lines.join("\n") + "\n")
        .map_err(|e| CliError::validation(format!("{}: {e}", out.display())))?;
    println!(
        "{}",
        serde_json::json!({ "profiles": lines.len(), "critic": adapter.identity(), "out": out })
    );
    Ok(())
}

fn cmd_taxonomy(
    config: &EngineConfig,
    profiles_path: &Path,
    out: &Path,
    embeddings: Option<&Path>,
) -> Result<(), CliError> {
    let (profiles, warnings) = read_profiles(profiles_path)?;
    for warning in &warnings {
        eprintln!(
            "{}",
            serde_json::json!({ "warning": warning.message, "at": warning.locator })
        );
    }
    let embedder = match embeddings {
        Some(path) => Embedder::from_vectors_file(path)?,
        None => Embedder::trigram(config.dim),
    };
    let taxonomy = build_taxonomy(&profiles, config.delta, &embedder)?;
    taxonomy.save(out)?;
    println!(
        "{}",
        serde_json::json!({
            "skills": taxonomy.skill_count(),
            "phrases": taxonomy.phrase_map.len(),
            "embedder": taxonomy.embedder_id,
            "out": out,
        })
    );
    Ok(())
}

fn cmd_matrices(
    config: &EngineConfig,
    dataset_dir: &Path,
    taxonomy_path: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let dataset = load_dataset(dataset_dir)?;
    let taxonomy = match taxonomy_path {
        Some(path) => SkillTaxonomy::load(path)?,
        None => build_taxonomy(
            &dataset.profiles,
            config.delta,
            &Embedder::trigram(config.dim),
        )?,
    };
    let matrices = skillpick_core::matrices::build_matrices(
        &dataset,
        &taxonomy,
        config.kappa,
        config.rho,
        &skillpick_core::taxonomy::PhraseResolver::Strict,
    )?;
    matrices.save(out)?;
    println!(
        "{}",
        serde_json::json!({
            "models": matrices.model_ids.len(),
            "tasks": matrices.task_ids.len(),
            "skills": matrices.skill_count(),
            "out": out,
        })
    );
    Ok(())
}

fn cmd_train(config: &EngineConfig, dataset_dir: &Path, out: &Path) -> Result<(), CliError> {
    let dataset = load_dataset(dataset_dir)?;
    let mut eval = config.eval_config();
    eval.predictor = PredictorSource::Trained;
    let artifacts = build_fold_artifacts(&dataset, &eval)?;
    let model = artifacts
        .predictor_model
        .expect("trained predictor requested");
    write_json(out, &model)?;
    println!(
        "{}",
        serde_json::json!({
            "scheme": model.scheme.name(),
            "features": model.weights.len(),
            "out": out,
        })
    );
    Ok(())
}

/// Per-model performance estimates for one requirement row.
fn predictions(
    config: &EngineConfig,
    dataset: &Dataset,
    artifacts: &FoldArtifacts,
    requirement: &[u8],
    task: Option<&str>,
) -> Result<Vec<f64>, CliError> {
    let matrices = &artifacts.matrices;
    let req = requirement_row(requirement);
    let mut predicted = Vec::with_capacity(matrices.model_ids.len());
    for (row, model_id) in matrices.model_ids.iter().enumerate() {
        let capability = match &artifacts.imputed {
            Some(matrix) => matrix[row].clone(),
            None => matrices.capability[row].clone(),
        };
        let value = match config.predictor {
            PredictorSource::Trained => {
                let model = artifacts
                    .predictor_model
                    .as_ref()
                    .expect("trained predictor built");
                predict(model, &req, &capability)?
            }
            PredictorSource::Similarity => cosine_similarity(&capability, &req).unwrap_or(0.0),
            PredictorSource::Observed => {
                let task = task.ok_or_else(|| {
                    CliError::validation("--predictor observed needs --task (no scores to observe)")
                })?;
                dataset.mean_score(model_id, task).unwrap_or(0.0)
            }
        };
        predicted.push(value);
    }
    Ok(predicted)
}

fn cmd_select(
    config: &EngineConfig,
    dataset_dir: &Path,
    task: Option<&str>,
    skills: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if task.is_none() && skills.is_none() {
        return Err(CliError::validation("select needs --task or --skills"));
    }
    let dataset = load_dataset(dataset_dir)?;
    let artifacts = build_fold_artifacts(&dataset, &config.eval_config())?;
    let skill_list: Option<Vec<String>> = skills.map(|s| {
        s.split(',')
            .map(normalize_phrase)
            .filter(|p| !p.is_empty())
            .collect()
    });
    let requirement = infer_requirements(
        &artifacts.matrices,
        task,
        skill_list.as_deref(),
    )?;
    let predicted = predictions(config, &dataset, &artifacts, &requirement, task)?;
    let pool = SelectionPool {
        matrices: &artifacts.matrices,
        imputed: artifacts.imputed.as_ref(),
        requirement,
        predicted,
    };
    let selection_config = SelectionConfig {
        tau: config.tau,
        budget: config.budget,
        latency_budget: config.latency_budget,
        mode: config.mode,
        weights: config.weights,
        use_imputed: config.use_imputed,
    };

    if config.mode == skillpick_core::selector::SelectionMode::Pareto {
        selection_config.validate()?;
        let capable = filter_capable(&pool, config.tau, config.use_imputed);
        let points: Vec<ParetoPoint> = capable
            .iter()
            .map(|&m| ParetoPoint {
                model_id: pool.matrices.model_ids[m].clone(),
                cost: pool.matrices.cost[m],
                latency: pool.matrices.latency[m],
                performance: pool.predicted[m],
            })
            .collect();
        if points.is_empty() {
            return Err(CliError::infeasible(
                "no capable model to build a front from",
            ));
        }
        let front = pareto_front(&points, config.latency_budget.is_some());
        let payload = serde_json::json!({ "mode": "pareto", "front": front });
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        if let Some(path) = out {
            write_json(path, &payload)?;
        }
        return Ok(());
    }

    let recommendation = select(&pool, &selection_config)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&recommendation).expect("recommendation serialization")
    );
    println!();
    println!("{}", recommendation.rationale);
    if let Some(path) = out {
        write_json(path, &recommendation)?;
    }
    Ok(())
}

fn cmd_evaluate(config: &EngineConfig, dataset_dir: &Path, out: &Path) -> Result<(), CliError> {
    let dataset = load_dataset(dataset_dir)?;
    let reports = loocv(&dataset, &config.eval_config())?;
    let summary = metrics(&reports, &dataset)?;
    let payload = serde_json::json!({ "summary": summary, "folds": reports });
    write_json(out, &payload)?;
    for (name, pm) in &summary.per_policy {
        println!(
            "{}",
            serde_json::json!({
                "policy": name,
                "selection_precision": pm.selection_precision,
                "accuracy_gap": pm.accuracy_gap,
                "total_cost": pm.total_cost,
            })
        );
    }
    Ok(())
}

fn cmd_frontier(dataset_dir: &Path, out: &Path) -> Result<(), CliError> {
    let dataset = load_dataset(dataset_dir)?;
    let rows = frontier(&dataset);
    write_frontier_csv(&rows, out).map_err(CliError::from)?;
    println!("{}", serde_json::json!({ "models": rows.len(), "out": out }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    config: &EngineConfig,
    models: usize,
    skills: usize,
    tasks: usize,
    instances: usize,
    cost_spread: f64,
    out: &Path,
) -> Result<(), CliError> {
    for (name, value) in [
        ("M", models),
        ("S", skills),
        ("T", tasks),
        ("n", instances),
    ] {
        if value == 0 {
            return Err(CliError::validation(format!("--{name} must be >= 1")));
        }
    }
    let population = generate_synthetic(&SyntheticSpec {
        models,
        skills,
        tasks,
        instances_per_task: instances,
        cost_spread,
        seed: config.seed,
    });
    write_dataset(&population.dataset, out)?;
    let truth = serde_json::json!({
        "true_proficiency": population.true_proficiency,
        "requirements": population.requirements,
        "skills": population.skill_names,
        "seed": population.seed,
    });
    write_json(&out.join("truth.json"), &truth)?;
    println!(
        "{}",
        serde_json::json!({
            "models": models,
            "skills": skills,
            "tasks": tasks,
            "instances_per_task": instances,
            "out": out,
        })
    );
    Ok(())
}
