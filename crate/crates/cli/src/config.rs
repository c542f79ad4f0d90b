//! Engine configuration shared by all subcommands.
//!
//! Resolution order per field: command-line flag, then config file, then the
//! built-in default. The config file is flat `key = value` text, one pair
//! per line, `#` comments allowed; keys match the flag names.

use std::path::Path;

use skillpick_core::harness::{EvalConfig, PredictorSource};
use skillpick_core::predictor::FeatureScheme;
use skillpick_core::selector::SelectionMode;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub delta: f64,
    pub dim: usize,
    pub kappa: f64,
    pub rho: f64,
    pub tau: f64,
    pub k: usize,
    pub nmf_iterations: usize,
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
    pub scheme: FeatureScheme,
    pub predictor: PredictorSource,
    pub budget: Option<f64>,
    pub latency_budget: Option<f64>,
    pub mode: SelectionMode,
    pub weights: [f64; 3],
    pub use_imputed: bool,
    pub cascade_theta: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            delta: 0.5,
            dim: 256,
            kappa: 0.0,
            rho: 0.5,
            tau: 0.5,
            k: 3,
            nmf_iterations: 200,
            lr: 0.1,
            epochs: 500,
            l2: 1e-3,
            seed: 42,
            scheme: FeatureScheme::Elementwise,
            predictor: PredictorSource::Trained,
            budget: None,
            latency_budget: None,
            mode: SelectionMode::SingleBudget,
            weights: [0.5, 0.25, 0.25],
            use_imputed: false,
            cascade_theta: 0.8,
        }
    }
}

/// Per-field overrides collected from the command line.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigArgs {
    /// Clustering cut distance in (0, 2]
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Embedding dimension for the trigram hasher
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Criticality floor for skill mentions
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Fraction of instances required to mark a task-level requirement
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Proficiency threshold for capability filtering
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Factorization rank
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Factorization iterations
    #[arg(long, global = true)]
    pub nmf_iterations: Option<usize>,
    /// Predictor learning rate
    #[arg(long, global = true)]
    pub lr: Option<f64>,
    /// Predictor training epochs
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    /// Predictor L2 penalty
    #[arg(long, global = true)]
    pub l2: Option<f64>,
    /// Seed for every randomized step
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Featurization scheme: inner, concat, elementwise, poly2
    #[arg(long, global = true)]
    pub scheme: Option<String>,
    /// Performance estimate source: trained, similarity, observed
    #[arg(long, global = true)]
    pub predictor: Option<String>,
    /// Budget in USD per query
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Latency budget in milliseconds
    #[arg(long, global = true)]
    pub latency_budget: Option<f64>,
    /// Selection mode: single_budget, pareto, scalarized
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Scalarization weights over performance,cheapness,speed (sum to 1)
    #[arg(long, global = true)]
    pub weights: Option<String>,
    /// Let imputed capability entries satisfy threshold tests
    #[arg(long, global = true)]
    pub use_imputed: Option<bool>,
    /// Cascade confidence threshold
    #[arg(long, global = true)]
    pub cascade_theta: Option<f64>,
}

fn parse_weights(raw: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::validation(format!(
            "weights must be three comma-separated numbers, got \"{raw}\""
        )));
    }
    let mut weights = [0.0; 3];
    for (slot, part) in weights.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| CliError::validation(format!("weight \"{part}\" is not a number")))?;
    }
    Ok(weights)
}

impl EngineConfig {
    /// Defaults, overlaid by the config file (if any), overlaid by flags.
    pub fn resolve(config_file: Option<&Path>, args: &ConfigArgs) -> Result<Self, CliError> {
        let mut config = EngineConfig::default();
        if let Some(path) = config_file {
            config.apply_file(path)?;
        }
        config.apply_args(args)?;
        config.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::validation(format!("{key}: {what}: \"{value}\""));
        match key {
            "delta" => self.delta = value.parse().map_err(|_| bad("not a number"))?,
            "dim" => self.dim = value.parse().map_err(|_| bad("not an integer"))?,
            "kappa" => self.kappa = value.parse().map_err(|_| bad("not a number"))?,
            "rho" => self.rho = value.parse().map_err(|_| bad("not a number"))?,
            "tau" => self.tau = value.parse().map_err(|_| bad("not a number"))?,
            "k" => self.k = value.parse().map_err(|_| bad("not an integer"))?,
            "nmf_iterations" => {
                self.nmf_iterations = value.parse().map_err(|_| bad("not an integer"))?
            }
            "lr" => self.lr = value.parse().map_err(|_| bad("not a number"))?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("not an integer"))?,
            "l2" => self.l2 = value.parse().map_err(|_| bad("not a number"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("not an integer"))?,
            "scheme" => {
                self.scheme =
                    FeatureScheme::parse(value).ok_or_else(|| bad("unknown scheme"))?
            }
            "predictor" => {
                self.predictor =
                    PredictorSource::parse(value).ok_or_else(|| bad("unknown predictor"))?
            }
            "budget" => self.budget = Some(value.parse().map_err(|_| bad("not a number"))?),
            "latency_budget" => {
                self.latency_budget = Some(value.parse().map_err(|_| bad("not a number"))?)
            }
            "mode" => {
                self.mode = SelectionMode::parse(value).ok_or_else(|| bad("unknown mode"))?
            }
            "weights" => self.weights = parse_weights(value)?,
            "use_imputed" => {
                self.use_imputed = value.parse().map_err(|_| bad("not a boolean"))?
            }
            "cascade_theta" => {
                self.cascade_theta = value.parse().map_err(|_| bad("not a number"))?
            }
            _ => return Err(CliError::validation(format!("unknown config key \"{key}\""))),
        }
        Ok(())
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    idx + 1
                )));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    fn apply_args(&mut self, args: &ConfigArgs) -> Result<(), CliError> {
        macro_rules! copy {
            ($($field:ident),*) => {
                $(if let Some(v) = args.$field { self.$field = v; })*
            };
        }
        copy!(delta, dim, kappa, rho, tau, k, nmf_iterations, lr, epochs, l2, seed, use_imputed, cascade_theta);
        if let Some(v) = args.budget {
            self.budget = Some(v);
        }
        if let Some(v) = args.latency_budget {
            self.latency_budget = Some(v);
        }
        if let Some(s) = &args.scheme {
            self.scheme = FeatureScheme::parse(s)
                .ok_or_else(|| CliError::validation(format!("unknown scheme \"{s}\"")))?;
        }
        if let Some(s) = &args.predictor {
            self.predictor = PredictorSource::parse(s)
                .ok_or_else(|| CliError::validation(format!("unknown predictor \"{s}\"")))?;
        }
        if let Some(s) = &args.mode {
            self.mode = SelectionMode::parse(s)
                .ok_or_else(|| CliError::validation(format!("unknown mode \"{s}\"")))?;
        }
        if let Some(s) = &args.weights {
            self.weights = parse_weights(s)?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let check = |ok: bool, message: String| if ok { Ok(()) } else { Err(CliError::validation(message)) };
        check(
            self.delta > 0.0 && self.delta <= 2.0,
            format!("delta {} outside (0, 2]", self.delta),
        )?;
        check(self.dim >= 1, format!("dim {} must be >= 1", self.dim))?;
        check(
            (0.0..=1.0).contains(&self.kappa),
            format!("kappa {} outside [0, 1]", self.kappa),
        )?;
        check(
            (0.0..=1.0).contains(&self.rho),
            format!("rho {} outside [0, 1]", self.rho),
        )?;
        check(
            (0.0..=1.0).contains(&self.tau),
            format!("tau {} outside [0, 1]", self.tau),
        )?;
        check(self.k >= 1, format!("k {} must be >= 1", self.k))?;
        check(
            self.nmf_iterations >= 1,
            format!("nmf_iterations {} must be >= 1", self.nmf_iterations),
        )?;
        check(self.lr > 0.0, format!("lr {} must be > 0", self.lr))?;
        check(self.epochs >= 1, format!("epochs {} must be >= 1", self.epochs))?;
        check(self.l2 >= 0.0, format!("l2 {} must be >= 0", self.l2))?;
        if let Some(b) = self.budget {
            check(b >= 0.0, format!("budget {b} must be >= 0"))?;
        }
        if let Some(l) = self.latency_budget {
            check(l >= 0.0, format!("latency_budget {l} must be >= 0"))?;
        }
        let weight_sum: f64 = self.weights.iter().sum();
        check(
            self.weights.iter().all(|w| *w >= 0.0) && (weight_sum - 1.0).abs() <= 1e-9,
            format!("weights {:?} must be non-negative and sum to 1", self.weights),
        )?;
        check(
            (0.0..=1.0).contains(&self.cascade_theta),
            format!("cascade_theta {} outside [0, 1]", self.cascade_theta),
        )?;
        Ok(())
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            delta: self.delta,
            dim: self.dim,
            kappa: self.kappa,
            rho: self.rho,
            tau: self.tau,
            budget: self.budget,
            latency_budget: self.latency_budget,
            use_imputed: self.use_imputed,
            nmf_rank: self.k,
            nmf_iterations: self.nmf_iterations,
            scheme: self.scheme,
            learning_rate: self.lr,
            epochs: self.epochs,
            l2: self.l2,
            seed: self.seed,
            cascade_threshold: self.cascade_theta,
            predictor: self.predictor,
        }
    }
}
