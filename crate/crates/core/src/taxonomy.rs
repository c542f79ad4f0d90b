//! Skill taxonomy induction: canonicalize raw critic phrases into a compact
//! skill vocabulary.
//!
//! Phrases are embedded (character-trigram hashing by default, or a
//! precomputed-vectors table), grouped by average-linkage agglomerative
//! clustering under cosine distance, and labeled by majority vote. Profiles
//! are then re-encoded as binary skill vectors against the taxonomy.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{normalize_phrase, InstanceProfile, MentionStatus};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("phrase is empty after normalization")]
    EmptyPhrase,
    #[error("cut distance {0} outside (0, 2]")]
    InvalidCutDistance(f64),
    #[error("no phrases to cluster")]
    NoPhrases,
    #[error("profiles contain no mentions")]
    NoMentions,
    #[error("unknown phrase \"{0}\" (not in taxonomy)")]
    UnknownPhrase(String),
    #[error("phrase \"{0}\" missing from precomputed embeddings")]
    MissingEmbedding(String),
    #[error("precomputed embedding for \"{0}\" has zero norm")]
    ZeroNormEmbedding(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

/// Canonical skill vocabulary. Skill ids are dense `0..S-1`; `phrase_map`
/// sends every normalized phrase seen at build time to its skill id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillTaxonomy {
    pub skills: Vec<String>,
    pub phrase_map: BTreeMap<String, usize>,
    pub cut_distance: f64,
    pub embedder_id: String,
}

impl SkillTaxonomy {
    pub fn skill_count(&self) -> usize {
        self.skills.len()
    }

    pub fn skill_id(&self, label: &str) -> Option<usize> {
        self.skills.iter().position(|s| s == label)
    }

    pub fn save(&self, path: &Path) -> Result<(), TaxonomyError> {
        let json = serde_json::to_string_pretty(self).expect("taxonomy serialization");
        std::fs::write(path, json).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| TaxonomyError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Binary skill vector over a taxonomy's skill ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillVector {
    pub bits: Vec<u8>,
}

impl SkillVector {
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x1000_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Character trigrams of a phrase; phrases shorter than three characters
/// contribute themselves as a single gram.
fn trigrams(phrase: &str) -> Vec<String> {
    let chars: Vec<char> = phrase.chars().collect();
    if chars.len() < 3 {
        return vec![phrase.to_string()];
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Deterministic default embedder: trigram occurrence counts hashed (FNV-1a)
/// into `dim` buckets, then L2-normalized.
pub fn embed_phrase(phrase: &str, dim: usize) -> Result<Vec<f64>, TaxonomyError> {
    if phrase.trim().is_empty() {
        return Err(TaxonomyError::EmptyPhrase);
    }
    let mut vector = vec![0.0; dim];
    for gram in trigrams(phrase) {
        let bucket = (fnv1a(gram.as_bytes()) % dim as u64) as usize;
        vector[bucket] += 1.0;
    }
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut vector {
        *x /= norm;
    }
    Ok(vector)
}

/// Embedding backend. The trigram hasher is fully deterministic and
/// dependency-free; a sentence-transformer (or any other) embedding can be
/// supplied through a precomputed phrase-to-vector table instead.
#[derive(Debug, Clone)]
pub enum Embedder {
    TrigramHash { dim: usize },
    Precomputed { id: String, table: BTreeMap<String, Vec<f64>> },
}

impl Embedder {
    pub fn trigram(dim: usize) -> Self {
        Embedder::TrigramHash { dim }
    }

    /// Load a JSONL file of `{"phrase": ..., "vector": [...]}` lines. The
    /// recorded embedder id is `precomputed:<file name>`.
    pub fn from_vectors_file(path: &Path) -> Result<Self, TaxonomyError> {
        #[derive(Deserialize)]
        struct Line {
            phrase: String,
            vector: Vec<f64>,
        }
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut table = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(line).map_err(|e| TaxonomyError::Format {
                    path: path.display().to_string(),
                    message: format!("line {}: {e}", i + 1),
                })?;
            table.insert(normalize_phrase(&parsed.phrase), parsed.vector);
        }
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Ok(Embedder::Precomputed {
            id: format!("precomputed:{name}"),
            table,
        })
    }

    pub fn id(&self) -> String {
        match self {
            Embedder::TrigramHash { dim } => format!("trigram-{dim}"),
            Embedder::Precomputed { id, .. } => id.clone(),
        }
    }

    /// Unit-norm embedding of a normalized phrase.
    pub fn embed(&self, phrase: &str) -> Result<Vec<f64>, TaxonomyError> {
        match self {
            Embedder::TrigramHash { dim } => embed_phrase(phrase, *dim),
            Embedder::Precomputed { table, .. } => {
                let raw = table
                    .get(phrase)
                    .ok_or_else(|| TaxonomyError::MissingEmbedding(phrase.to_string()))?;
                let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return Err(TaxonomyError::ZeroNormEmbedding(phrase.to_string()));
                }
                Ok(raw.iter().map(|x| x / norm).collect())
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine distance between two unit vectors.
fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    1.0 - dot(a, b)
}

/// Average-linkage agglomerative clustering under cosine distance.
///
/// Merging stops once the minimum inter-cluster average distance exceeds
/// `delta`. Ties pick the lexicographically smallest cluster index pair, so
/// the assignment is deterministic given input order. Returned cluster ids
/// are dense and ordered by each cluster's earliest member.
pub fn cluster_phrases(
    phrases: &[String],
    delta: f64,
    embedder: &Embedder,
) -> Result<Vec<usize>, TaxonomyError> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(TaxonomyError::InvalidCutDistance(delta));
    }
    if phrases.is_empty() {
        return Err(TaxonomyError::NoPhrases);
    }
    let vectors = phrases
        .iter()
        .map(|p| embedder.embed(p))
        .collect::<Result<Vec<_>, _>>()?;

    let n = phrases.len();
    // members[c] holds original phrase indices; clusters stay ordered by
    // their smallest member because merges always fold j into i < j.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| cosine_distance(&vectors[i], &vectors[j]))
                .collect()
        })
        .collect();

    while members.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                if dist[i][j] < best.0 {
                    best = (dist[i][j], i, j);
                }
            }
        }
        let (min_dist, i, j) = best;
        if min_dist > delta {
            break;
        }
        // Lance-Williams update for average linkage: the new average distance
        // is the size-weighted mean of the two merged clusters' distances.
        let (ni, nj) = (members[i].len() as f64, members[j].len() as f64);
        for k in 0..members.len() {
            if k == i || k == j {
                continue;
            }
            let d = (ni * dist[i][k] + nj * dist[j][k]) / (ni + nj);
            dist[i][k] = d;
            dist[k][i] = d;
        }
        let absorbed = members.remove(j);
        members[i].extend(absorbed);
        dist.remove(j);
        for row in &mut dist {
            row.remove(j);
        }
    }

    let mut assignment = vec![0usize; n];
    for (cluster_id, cluster) in members.iter().enumerate() {
        for &phrase_idx in cluster {
            assignment[phrase_idx] = cluster_id;
        }
    }
    Ok(assignment)
}

/// Majority-vote canonical label: the most frequent phrase by total
/// occurrence count, ties broken by the lexicographically smallest phrase.
pub fn canonical_label(cluster: &[(String, usize)]) -> String {
    cluster
        .iter()
        .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
        .map(|(p, _)| p.clone())
        .expect("canonical_label requires a non-empty cluster")
}

/// Build a taxonomy from profiles: collect distinct normalized phrases in
/// first-occurrence order with occurrence counts, cluster them, and label
/// each cluster by majority vote.
pub fn build_taxonomy(
    profiles: &[InstanceProfile],
    delta: f64,
    embedder: &Embedder,
) -> Result<SkillTaxonomy, TaxonomyError> {
    let mut phrases: Vec<String> = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for profile in profiles {
        for mention in &profile.mentions {
            let phrase = normalize_phrase(&mention.phrase);
            if phrase.is_empty() {
                return Err(TaxonomyError::EmptyPhrase);
            }
            if !counts.contains_key(&phrase) {
                phrases.push(phrase.clone());
            }
            *counts.entry(phrase).or_insert(0) += 1;
        }
    }
    if phrases.is_empty() {
        return Err(TaxonomyError::NoMentions);
    }

    let assignment = cluster_phrases(&phrases, delta, embedder)?;
    let cluster_count = assignment.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut clusters: Vec<Vec<(String, usize)>> = vec![Vec::new(); cluster_count];
    for (idx, &cluster_id) in assignment.iter().enumerate() {
        let phrase = &phrases[idx];
        clusters[cluster_id].push((phrase.clone(), counts[phrase]));
    }

    let skills: Vec<String> = clusters.iter().map(|c| canonical_label(c)).collect();
    let mut phrase_map = BTreeMap::new();
    for (idx, &cluster_id) in assignment.iter().enumerate() {
        phrase_map.insert(phrases[idx].clone(), cluster_id);
    }

    Ok(SkillTaxonomy {
        skills,
        phrase_map,
        cut_distance: delta,
        embedder_id: embedder.id(),
    })
}

/// Per-skill centroids of member-phrase embeddings, for nearest-cluster
/// assignment of phrases unseen at build time.
#[derive(Debug, Clone)]
pub struct CentroidIndex {
    centroids: Vec<Vec<f64>>,
}

impl CentroidIndex {
    pub fn build(taxonomy: &SkillTaxonomy, embedder: &Embedder) -> Result<Self, TaxonomyError> {
        let mut sums: Vec<Vec<f64>> = Vec::new();
        let mut sizes: Vec<usize> = vec![0; taxonomy.skill_count()];
        for (phrase, &skill) in &taxonomy.phrase_map {
            let v = embedder.embed(phrase)?;
            if sums.is_empty() {
                sums = vec![vec![0.0; v.len()]; taxonomy.skill_count()];
            }
            for (acc, x) in sums[skill].iter_mut().zip(&v) {
                *acc += x;
            }
            sizes[skill] += 1;
        }
        let centroids = sums
            .into_iter()
            .zip(&sizes)
            .map(|(sum, &size)| {
                let mean: Vec<f64> = sum.iter().map(|x| x / size.max(1) as f64).collect();
                let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    mean.iter().map(|x| x / norm).collect()
                } else {
                    mean
                }
            })
            .collect();
        Ok(Self { centroids })
    }

    /// Nearest skill by cosine distance to the centroid, with the distance.
    pub fn nearest(&self, vector: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (skill, centroid) in self.centroids.iter().enumerate() {
            let d = cosine_distance(vector, centroid);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((skill, d));
            }
        }
        best
    }
}

/// How to resolve phrases that are not in the taxonomy's phrase map.
#[derive(Clone, Copy)]
pub enum PhraseResolver<'a> {
    /// Unknown phrases are an error.
    Strict,
    /// Map an unknown phrase to the cluster with the nearest centroid when
    /// the distance is within the taxonomy's cut distance; otherwise either
    /// skip the mention (`skip_unresolved`) or error.
    Nearest {
        embedder: &'a Embedder,
        centroids: &'a CentroidIndex,
        skip_unresolved: bool,
    },
}

impl PhraseResolver<'_> {
    /// Skill id for a normalized phrase, `Ok(None)` when the mention should
    /// be skipped under a lenient resolver.
    pub fn resolve(
        &self,
        phrase: &str,
        taxonomy: &SkillTaxonomy,
    ) -> Result<Option<usize>, TaxonomyError> {
        if let Some(&skill) = taxonomy.phrase_map.get(phrase) {
            return Ok(Some(skill));
        }
        match self {
            PhraseResolver::Strict => Err(TaxonomyError::UnknownPhrase(phrase.to_string())),
            PhraseResolver::Nearest {
                embedder,
                centroids,
                skip_unresolved,
            } => {
                let vector = embedder.embed(phrase)?;
                if let Some((skill, distance)) = centroids.nearest(&vector) {
                    if distance <= taxonomy.cut_distance {
                        return Ok(Some(skill));
                    }
                }
                if *skip_unresolved {
                    Ok(None)
                } else {
                    Err(TaxonomyError::UnknownPhrase(phrase.to_string()))
                }
            }
        }
    }
}

/// Which mention statuses participate in an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusFilter {
    Demonstrated,
    Missing,
    Any,
}

impl StatusFilter {
    pub fn matches(self, status: MentionStatus) -> bool {
        match self {
            StatusFilter::Demonstrated => status == MentionStatus::Demonstrated,
            StatusFilter::Missing => status == MentionStatus::Missing,
            StatusFilter::Any => true,
        }
    }
}

/// Re-encode a profile as a binary skill vector: bit `s` is set when some
/// mention with a matching status and criticality >= `kappa` maps to `s`.
pub fn encode_profile(
    profile: &InstanceProfile,
    taxonomy: &SkillTaxonomy,
    filter: StatusFilter,
    kappa: f64,
    resolver: &PhraseResolver,
) -> Result<SkillVector, TaxonomyError> {
    let mut vector = SkillVector::zeros(taxonomy.skill_count());
    for mention in &profile.mentions {
        if !filter.matches(mention.status) || mention.criticality < kappa {
            continue;
        }
        let phrase = normalize_phrase(&mention.phrase);
        if let Some(skill) = resolver.resolve(&phrase, taxonomy)? {
            vector.bits[skill] = 1;
        }
    }
    Ok(vector)
}
