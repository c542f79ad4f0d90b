//! Model-task fit estimation over the capability matrices.
//!
//! Three routes are implemented: cosine-similarity retrieval over skill
//! space, masked non-negative matrix factorization for imputing unobserved
//! capability cells, and a logistic performance predictor trained on
//! skill-based features of (requirement, capability) pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrices::CapabilityMatrices;

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,
    #[error("factorization rank {k} outside 1..={max}")]
    RankOutOfRange { k: usize, max: usize },
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("no training pairs supplied")]
    NoTrainingPairs,
    #[error("training label {0} outside [0, 1]")]
    LabelRange(f64),
    #[error("training diverged (non-finite loss at epoch {epoch}); try a smaller learning rate")]
    Diverged { epoch: usize },
    #[error("predictor expects feature length {expected}, got {got}")]
    FeatureLength { expected: usize, got: usize },
}

/// Cosine similarity between a capability row and a requirement row. For the
/// non-negative vectors used here the result lands in [0, 1].
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, PredictorError> {
    if a.len() != b.len() {
        return Err(PredictorError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(PredictorError::ZeroVector);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (norm_a * norm_b))
}

/// Models ranked by descending similarity to the requirement row. Ties break
/// by ascending cost, then lexicographic model id.
pub fn similarity_rank(
    matrices: &CapabilityMatrices,
    requirement: &[f64],
) -> Result<Vec<(String, f64)>, PredictorError> {
    let mut ranked: Vec<(usize, f64)> = Vec::with_capacity(matrices.model_ids.len());
    for (row, capability) in matrices.capability.iter().enumerate() {
        ranked.push((row, cosine_similarity(capability, requirement)?));
    }
    ranked.sort_by(|(ra, sa), (rb, sb)| {
        sb.partial_cmp(sa)
            .unwrap()
            .then_with(|| matrices.cost[*ra].partial_cmp(&matrices.cost[*rb]).unwrap())
            .then_with(|| matrices.model_ids[*ra].cmp(&matrices.model_ids[*rb]))
    });
    Ok(ranked
        .into_iter()
        .map(|(row, sim)| (matrices.model_ids[row].clone(), sim))
        .collect())
}

/// Non-negative factors `C ~ U Vᵀ` fitted on observed cells only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentFactors {
    #[serde(rename = "U")]
    pub u: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    pub v: Vec<Vec<f64>>,
    pub k: usize,
    pub final_objective: f64,
    /// Objective after each iteration; not persisted.
    #[serde(skip)]
    pub objective_history: Vec<f64>,
}

fn masked_objective(c: &[Vec<f64>], observed: &[Vec<bool>], u: &[Vec<f64>], v: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if observed[i][j] {
                let approx: f64 = u[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                let diff = value - approx;
                total += diff * diff;
            }
        }
    }
    total
}

const NMF_EPS: f64 = 1e-12;

/// Masked multiplicative-update NMF.
///
/// Unobserved cells are excluded from both the objective and the updates, so
/// the factors explain only what was measured. Factors initialize uniformly
/// in (0, 1) from the seed; the recorded objective is non-increasing across
/// iterations (to within floating-point slack).
pub fn nmf_factorize(
    c: &[Vec<f64>],
    observed: &[Vec<bool>],
    k: usize,
    iterations: usize,
    seed: u64,
) -> Result<LatentFactors, PredictorError> {
    let rows = c.len();
    let cols = c.first().map_or(0, |r| r.len());
    let max_rank = rows.min(cols);
    if k == 0 || k > max_rank {
        return Err(PredictorError::RankOutOfRange { k, max: max_rank });
    }
    if iterations == 0 {
        return Err(PredictorError::NoIterations);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, m: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..m).map(|_| rng.gen_range(1e-3..1.0)).collect())
            .collect()
    };
    let mut u = draw(rows, k);
    let mut v = draw(cols, k);

    let product = |u: &[Vec<f64>], v: &[Vec<f64>], i: usize, j: usize| -> f64 {
        u[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum()
    };

    let mut history = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        // U update with V held fixed.
        let mut u_next = u.clone();
        for i in 0..rows {
            for f in 0..k {
                let mut numer = 0.0;
                let mut denom = 0.0;
                for j in 0..cols {
                    if observed[i][j] {
                        numer += c[i][j] * v[j][f];
                        denom += product(&u, &v, i, j) * v[j][f];
                    }
                }
                u_next[i][f] = u[i][f] * numer / denom.max(NMF_EPS);
            }
        }
        u = u_next;

        // V update with the fresh U.
        let mut v_next = v.clone();
        for j in 0..cols {
            for f in 0..k {
                let mut numer = 0.0;
                let mut denom = 0.0;
                for i in 0..rows {
                    if observed[i][j] {
                        numer += c[i][j] * u[i][f];
                        denom += product(&u, &v, i, j) * u[i][f];
                    }
                }
                v_next[j][f] = v[j][f] * numer / denom.max(NMF_EPS);
            }
        }
        v = v_next;

        history.push(masked_objective(c, observed, &u, &v));
    }

    Ok(LatentFactors {
        final_objective: *history.last().expect("iterations >= 1"),
        u,
        v,
        k,
        objective_history: history,
    })
}

/// Fill unobserved cells from the factorization: observed cells keep their
/// measured value, everything else gets `clamp(UVᵀ, 0, 1)`.
pub fn impute(c: &[Vec<f64>], observed: &[Vec<bool>], factors: &LatentFactors) -> Vec<Vec<f64>> {
    c.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &value)| {
                    if observed[i][j] {
                        value
                    } else {
                        let approx: f64 =
                            factors.u[i].iter().zip(&factors.v[j]).map(|(a, b)| a * b).sum();
                        approx.clamp(0.0, 1.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Featurization of a (requirement row, capability row) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScheme {
    /// Single inner-product feature `[r·c]`.
    Inner,
    /// Concatenation `[r ; c]`.
    Concat,
    /// Element-wise product `r ⊙ c`.
    Elementwise,
    /// Element-wise features plus all their pairwise products.
    Poly2,
}

impl FeatureScheme {
    pub fn feature_len(self, skill_count: usize) -> usize {
        match self {
            FeatureScheme::Inner => 1,
            FeatureScheme::Concat => 2 * skill_count,
            FeatureScheme::Elementwise => skill_count,
            FeatureScheme::Poly2 => skill_count + skill_count * (skill_count + 1) / 2,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "inner" => Some(FeatureScheme::Inner),
            "concat" => Some(FeatureScheme::Concat),
            "elementwise" => Some(FeatureScheme::Elementwise),
            "poly2" => Some(FeatureScheme::Poly2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureScheme::Inner => "inner",
            FeatureScheme::Concat => "concat",
            FeatureScheme::Elementwise => "elementwise",
            FeatureScheme::Poly2 => "poly2",
        }
    }
}

pub fn featurize(
    requirement: &[f64],
    capability: &[f64],
    scheme: FeatureScheme,
) -> Result<Vec<f64>, PredictorError> {
    if requirement.len() != capability.len() {
        return Err(PredictorError::LengthMismatch {
            expected: requirement.len(),
            got: capability.len(),
        });
    }
    let elementwise: Vec<f64> = requirement
        .iter()
        .zip(capability)
        .map(|(r, c)| r * c)
        .collect();
    Ok(match scheme {
        FeatureScheme::Inner => vec![elementwise.iter().sum()],
        FeatureScheme::Concat => requirement
            .iter()
            .chain(capability)
            .copied()
            .collect(),
        FeatureScheme::Elementwise => elementwise,
        FeatureScheme::Poly2 => {
            let mut features = elementwise.clone();
            for i in 0..elementwise.len() {
                for j in i..elementwise.len() {
                    features.push(elementwise[i] * elementwise[j]);
                }
            }
            features
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub l2: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            seed: 42,
            l2: 1e-3,
        }
    }
}

/// Logistic performance predictor: `p̂ = sigmoid(w·features + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorModel {
    pub scheme: FeatureScheme,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainingConfig,
}

/// One supervised example: requirement row, capability row, observed score.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub requirement: Vec<f64>,
    pub capability: Vec<f64>,
    pub label: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Binary cross-entropy (fractional labels allowed) with L2 penalty on all
/// parameters, plus its analytic gradient. Exposed so the finite-difference
/// check can drive the exact training objective.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[f64],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        // -y ln σ(z) - (1-y) ln(1-σ(z)) in a numerically stable form.
        loss += y * softplus(-z) + (1.0 - y) * softplus(z);
        let residual = sigmoid(z) - y;
        for (g, v) in grad_w.iter_mut().zip(x) {
            *g += residual * v;
        }
        grad_b += residual;
    }
    loss /= n;
    for g in &mut grad_w {
        *g /= n;
    }
    grad_b /= n;

    let penalty: f64 = weights.iter().map(|w| w * w).sum::<f64>() + bias * bias;
    loss += 0.5 * l2 * penalty;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g += l2 * w;
    }
    grad_b += l2 * bias;

    (loss, grad_w, grad_b)
}

/// Fit logistic weights by full-batch gradient descent from a zero start.
/// Deterministic given the config; errors if the loss goes non-finite or
/// fails to improve on the first epoch's value.
pub fn train_predictor(
    pairs: &[TrainingPair],
    scheme: FeatureScheme,
    config: TrainingConfig,
) -> Result<PredictorModel, PredictorError> {
    if pairs.is_empty() {
        return Err(PredictorError::NoTrainingPairs);
    }
    for pair in pairs {
        if !(0.0..=1.0).contains(&pair.label) {
            return Err(PredictorError::LabelRange(pair.label));
        }
    }
    let features: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| featurize(&p.requirement, &p.capability, scheme))
        .collect::<Result<_, _>>()?;
    let labels: Vec<f64> = pairs.iter().map(|p| p.label).collect();

    let mut weights = vec![0.0; features[0].len()];
    let mut bias = 0.0;
    let mut first_loss = None;
    let mut last_loss = f64::INFINITY;
    for epoch in 0..config.epochs {
        let (loss, grad_w, grad_b) = loss_and_gradient(&weights, bias, &features, &labels, config.l2);
        if !loss.is_finite() {
            return Err(PredictorError::Diverged { epoch });
        }
        first_loss.get_or_insert(loss);
        last_loss = loss;
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= config.learning_rate * g;
        }
        bias -= config.learning_rate * grad_b;
    }
    if let Some(first) = first_loss {
        if !last_loss.is_finite() || last_loss > first + 1e-12 {
            return Err(PredictorError::Diverged {
                epoch: config.epochs,
            });
        }
    }
    Ok(PredictorModel {
        scheme,
        weights,
        bias,
        config,
    })
}

/// Estimated probability that the model performs well on the task.
pub fn predict(
    model: &PredictorModel,
    requirement: &[f64],
    capability: &[f64],
) -> Result<f64, PredictorError> {
    let features = featurize(requirement, capability, model.scheme)?;
    if features.len() != model.weights.len() {
        return Err(PredictorError::FeatureLength {
            expected: model.weights.len(),
            got: features.len(),
        });
    }
    let z: f64 = model
        .weights
        .iter()
        .zip(&features)
        .map(|(w, x)| w * x)
        .sum::<f64>()
        + model.bias;
    Ok(sigmoid(z))
}

/// Requirement row as f64s, for featurization.
pub fn requirement_row(requirement: &[u8]) -> Vec<f64> {
    requirement.iter().map(|&b| f64::from(b)).collect()
}
