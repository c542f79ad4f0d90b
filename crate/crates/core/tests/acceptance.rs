//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every expected value is either hand-derived, checked against an
//! independent in-test oracle (exhaustive enumeration, brute-force
//! dominance, finite differences, definitional clustering), or pinned to the
//! bundled fixture.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skillpick_core::harness::{
    build_fold_artifacts, frontier, generate_synthetic, loocv, metrics, write_frontier_csv,
    EvalConfig, PredictorSource, SyntheticSpec, POLICY_RANDOM, POLICY_SKILL_BASED,
};
use skillpick_core::matrices::{build_matrices, CapabilityMatrices};
use skillpick_core::predictor::{
    featurize, impute, loss_and_gradient, nmf_factorize, FeatureScheme,
};
use skillpick_core::records::{parse_dataset, Dataset, DatasetPaths};
use skillpick_core::selector::{
    pareto_front, select, ParetoPoint, RejectionReason, SelectError, SelectionConfig, SelectionPool,
};
use skillpick_core::taxonomy::{build_taxonomy, cluster_phrases, Embedder, PhraseResolver};

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/dataset")
}

fn load_fixture() -> Dataset {
    parse_dataset(&DatasetPaths::in_dir(&fixture_dir()))
        .expect("bundled fixture parses")
        .dataset
}

fn pool_matrices(
    capability: Vec<Vec<f64>>,
    observed: Vec<Vec<bool>>,
    cost: Vec<f64>,
) -> CapabilityMatrices {
    let models = capability.len();
    let skills = capability.first().map_or(0, |r| r.len());
    CapabilityMatrices {
        model_ids: (0..models).map(|i| format!("m{i:02}")).collect(),
        task_ids: vec!["t".into()],
        skills: (0..skills).map(|s| format!("s{s:02}")).collect(),
        requirement: vec![vec![0; skills]],
        latency: vec![0.0; models],
        capability,
        observed,
        cost,
    }
}

/// Criterion 1: `select` equals exhaustive enumeration of the budgeted
/// argmax on 200 seeded random instances; zero mismatches, under 10 s.
#[test]
fn c1_selection_matches_exhaustive_enumeration() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let taus = [0.5, 0.7, 0.9];
    for case in 0..200 {
        let models = rng.gen_range(1..=6);
        let skills = rng.gen_range(1..=8);
        let capability: Vec<Vec<f64>> = (0..models)
            .map(|_| (0..skills).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let observed: Vec<Vec<bool>> = (0..models)
            .map(|_| (0..skills).map(|_| rng.gen_range(0.0..1.0) < 0.85).collect())
            .collect();
        let cost: Vec<f64> = (0..models).map(|_| rng.gen_range(0.1..12.0)).collect();
        let requirement: Vec<u8> = (0..skills)
            .map(|_| u8::from(rng.gen_range(0.0..1.0) < 0.5))
            .collect();
        let predicted: Vec<f64> = (0..models).map(|_| rng.gen_range(0.0..1.0)).collect();
        let tau = taus[rng.gen_range(0..taus.len())];
        let budget = rng.gen_range(0.0..13.0);

        let matrices = pool_matrices(capability.clone(), observed.clone(), cost.clone());
        let pool = SelectionPool {
            matrices: &matrices,
            imputed: None,
            requirement: requirement.clone(),
            predicted: predicted.clone(),
        };
        let config = SelectionConfig {
            tau,
            budget: Some(budget),
            ..SelectionConfig::default()
        };

        // Independent oracle: enumerate every model against the definition.
        let mut oracle: Option<usize> = None;
        for m in 0..models {
            let capable = (0..skills).all(|s| {
                requirement[s] == 0 || (observed[m][s] && capability[m][s] >= tau)
            });
            if !capable || cost[m] > budget {
                continue;
            }
            oracle = Some(match oracle {
                None => m,
                Some(best) => {
                    if predicted[m] > predicted[best]
                        || (predicted[m] == predicted[best] && cost[m] < cost[best])
                        || (predicted[m] == predicted[best]
                            && cost[m] == cost[best]
                            && matrices.model_ids[m] < matrices.model_ids[best])
                    {
                        m
                    } else {
                        best
                    }
                }
            });
        }

        match (select(&pool, &config), oracle) {
            (Ok(rec), Some(best)) => assert_eq!(
                rec.model_id, matrices.model_ids[best],
                "case {case}: selection disagrees with enumeration"
            ),
            (Err(SelectError::Infeasible { .. }), None) => {}
            (got, want) => panic!("case {case}: select={got:?} oracle={want:?}"),
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("acceptance c1 selection oracle equivalence (200 cases, {elapsed:?}): PASS");
}

/// Criterion 2: the worked budget example on the 10.0 / 0.88 cost pair.
#[test]
fn c2_worked_budget_example() {
    let matrices = pool_matrices(
        vec![vec![0.95], vec![0.85]],
        vec![vec![true], vec![true]],
        vec![10.0, 0.88],
    );
    let pool = SelectionPool {
        matrices: &matrices,
        imputed: None,
        requirement: vec![1],
        predicted: vec![0.90, 0.82],
    };

    let tight = select(
        &pool,
        &SelectionConfig {
            tau: 0.5,
            budget: Some(1.0),
            ..SelectionConfig::default()
        },
    )
    .unwrap();
    assert_eq!(tight.model_id, "m01");
    assert_eq!(tight.cost, 0.88);
    assert_eq!(tight.rejected.len(), 1);
    assert_eq!(tight.rejected[0].model_id, "m00");
    assert!(matches!(tight.rejected[0].reason, RejectionReason::OverBudget));
    assert!(tight.rationale.contains("over budget"));

    let loose = select(
        &pool,
        &SelectionConfig {
            tau: 0.5,
            budget: Some(20.0),
            ..SelectionConfig::default()
        },
    )
    .unwrap();
    assert_eq!(loose.model_id, "m00");
    println!("acceptance c2 worked budget example: PASS");
}

/// Criterion 3: pareto_front equals O(n^2) brute force on 100 seeded pools.
#[test]
fn c3_pareto_front_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF407);
    for case in 0..100 {
        let n = rng.gen_range(1..=20);
        let include_latency = rng.gen_range(0.0..1.0) < 0.5;
        let points: Vec<ParetoPoint> = (0..n)
            .map(|i| ParetoPoint {
                model_id: format!("p{i:02}"),
                cost: rng.gen_range(0.1..10.0),
                latency: rng.gen_range(10.0..500.0),
                performance: rng.gen_range(0.0..1.0),
            })
            .collect();

        // Brute force dominance, written from the definition.
        let mut expected: Vec<&ParetoPoint> = Vec::new();
        for p in &points {
            let mut dominated = false;
            for q in &points {
                let no_worse = q.cost <= p.cost
                    && q.performance >= p.performance
                    && (!include_latency || q.latency <= p.latency);
                let strict = q.cost < p.cost
                    || q.performance > p.performance
                    || (include_latency && q.latency < p.latency);
                if no_worse && strict {
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                expected.push(p);
            }
        }
        let expected_ids: BTreeSet<&str> =
            expected.iter().map(|p| p.model_id.as_str()).collect();

        let front = pareto_front(&points, include_latency);
        let got_ids: BTreeSet<&str> = front.iter().map(|p| p.model_id.as_str()).collect();
        assert_eq!(got_ids, expected_ids, "case {case}");
        for pair in front.windows(2) {
            assert!(pair[0].cost <= pair[1].cost, "front not sorted by cost");
        }
    }
    println!("acceptance c3 pareto brute-force agreement (100 pools): PASS");
}

/// Criterion 4: NMF monotonicity over 5 seeds, exact rank-1 recovery, and
/// masked-cell imputation within 0.05.
#[test]
fn c4_nmf_objective_recovery_and_imputation() {
    // Monotone objective on a mixed observed/unobserved matrix.
    let c = vec![
        vec![0.9, 0.1, 0.5, 0.3],
        vec![0.2, 0.8, 0.4, 0.9],
        vec![0.6, 0.6, 0.1, 0.2],
    ];
    let mut observed = vec![vec![true; 4]; 3];
    observed[0][2] = false;
    observed[2][3] = false;
    for seed in [1, 2, 3, 4, 5] {
        let factors = nmf_factorize(&c, &observed, 2, 300, seed).unwrap();
        for (i, pair) in factors.objective_history.windows(2).enumerate() {
            assert!(
                pair[1] <= pair[0] + 1e-10,
                "seed {seed} iteration {i}: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    // Exact rank-1 structure: outer([1, 2], [0.2, 0.4]).
    let rank1 = vec![vec![0.2, 0.4], vec![0.4, 0.8]];
    let full = vec![vec![true; 2]; 2];
    let factors = nmf_factorize(&rank1, &full, 1, 500, 42).unwrap();
    assert!(
        factors.final_objective < 1e-6,
        "rank-1 reconstruction error {}",
        factors.final_objective
    );

    // Hide one cell and recover it through the factorization.
    let mut masked = full.clone();
    masked[1][1] = false;
    let factors = nmf_factorize(&rank1, &masked, 1, 500, 42).unwrap();
    let imputed = impute(&rank1, &masked, &factors);
    assert!(
        (imputed[1][1] - 0.8).abs() < 0.05,
        "imputed {} for true 0.8",
        imputed[1][1]
    );
    println!("acceptance c4 nmf monotonicity, rank-1 recovery, imputation: PASS");
}

/// Criterion 5: analytic gradient matches central finite differences
/// (h = 1e-5) within 1e-4 relative error at 10 random points per scheme.
#[test]
fn c5_gradient_matches_finite_differences() {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(0x60AD);
    for scheme in [
        FeatureScheme::Inner,
        FeatureScheme::Concat,
        FeatureScheme::Elementwise,
        FeatureScheme::Poly2,
    ] {
        let skills = 4;
        let features: Vec<Vec<f64>> = (0..8)
            .map(|_| {
                let requirement: Vec<f64> =
                    (0..skills).map(|_| f64::from(rng.gen_range(0..2u8))).collect();
                let capability: Vec<f64> =
                    (0..skills).map(|_| rng.gen_range(0.0..1.0)).collect();
                featurize(&requirement, &capability, scheme).unwrap()
            })
            .collect();
        let labels: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
        let dim = features[0].len();

        for point in 0..10 {
            let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let bias = rng.gen_range(-1.5..1.5);
            let (_, grad_w, grad_b) = loss_and_gradient(&weights, bias, &features, &labels, 1e-3);
            for idx in 0..=dim {
                let perturb = |delta: f64| {
                    let mut w = weights.clone();
                    let mut b = bias;
                    if idx < dim {
                        w[idx] += delta;
                    } else {
                        b += delta;
                    }
                    loss_and_gradient(&w, b, &features, &labels, 1e-3).0
                };
                let numeric = (perturb(h) - perturb(-h)) / (2.0 * h);
                let analytic = if idx < dim { grad_w[idx] } else { grad_b };
                let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
                assert!(
                    rel < 1e-4,
                    "{} point {point} idx {idx}: analytic {analytic} numeric {numeric} rel {rel}",
                    scheme.name()
                );
            }
        }
    }
    println!("acceptance c5 gradient finite-difference check (4 schemes x 10 points): PASS");
}

/// Criterion 6: clustering determinism, partition property, monotone
/// cluster count in the cut distance on a 20-phrase fixture, and agreement
/// with a definitional reference for up to 8 phrases.
#[test]
fn c6_clustering_properties() {
    let embedder = Embedder::trigram(256);
    let twenty: Vec<String> = [
        "accurate arithmetic",
        "arithmetic accuracy",
        "numerical precision",
        "numerical calculation",
        "numerical calculations",
        "temporal reasoning",
        "time ordering",
        "event sequencing",
        "fact verification",
        "source checking",
        "data extraction",
        "table parsing",
        "logical inference",
        "deductive steps",
        "unit conversion",
        "currency handling",
        "percentage growth",
        "ratio comparison",
        "trend detection",
        "context tracking",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    // Determinism across reruns.
    let first = cluster_phrases(&twenty, 0.5, &embedder).unwrap();
    let second = cluster_phrases(&twenty, 0.5, &embedder).unwrap();
    assert_eq!(first, second);

    // Partition: every phrase in exactly one dense cluster id.
    let max = *first.iter().max().unwrap();
    assert_eq!(first.len(), twenty.len());
    for id in 0..=max {
        assert!(first.contains(&id), "cluster id {id} unused");
    }

    // Monotone cluster count in delta.
    let mut last = usize::MAX;
    for delta in [0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.1, 1.4, 1.7, 2.0] {
        let assignment = cluster_phrases(&twenty, delta, &embedder).unwrap();
        let count = assignment.iter().max().unwrap() + 1;
        assert!(count <= last, "count rose from {last} to {count} at delta {delta}");
        last = count;
    }

    // Definitional average-linkage reference on every prefix up to 8 phrases.
    let reference = |phrases: &[String], delta: f64| -> Vec<usize> {
        let vectors: Vec<Vec<f64>> = phrases
            .iter()
            .map(|p| embedder.embed(p).unwrap())
            .collect();
        let n = phrases.len();
        let base: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| 1.0 - vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum::<f64>())
                    .collect()
            })
            .collect();
        let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while clusters.len() > 1 {
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..clusters.len() {
                for j in (i + 1)..clusters.len() {
                    let mut sum = 0.0;
                    for &a in &clusters[i] {
                        for &b in &clusters[j] {
                            sum += base[a][b];
                        }
                    }
                    let avg = sum / (clusters[i].len() * clusters[j].len()) as f64;
                    if best.is_none_or(|(d, _, _)| avg < d) {
                        best = Some((avg, i, j));
                    }
                }
            }
            let (d, i, j) = best.unwrap();
            if d > delta {
                break;
            }
            let absorbed = clusters.remove(j);
            clusters[i].extend(absorbed);
        }
        let mut assignment = vec![0; n];
        for (id, cluster) in clusters.iter().enumerate() {
            for &p in cluster {
                assignment[p] = id;
            }
        }
        assignment
    };
    for len in 1..=8 {
        for delta in [0.2, 0.4, 0.5, 0.8, 1.2, 2.0] {
            let phrases = twenty[..len].to_vec();
            assert_eq!(
                cluster_phrases(&phrases, delta, &embedder).unwrap(),
                reference(&phrases, delta),
                "len {len} delta {delta}"
            );
        }
    }
    println!("acceptance c6 clustering determinism, partition, monotonicity, reference agreement: PASS");
}

/// Criterion 7: C and R on a hand-built 2-model / 2-task / 6-instance
/// dataset match hand-computed values exactly.
#[test]
fn c7_matrices_match_hand_computation() {
    use skillpick_core::records::{
        InstanceOutcome, InstanceProfile, MentionStatus, ModelSpec, SkillMention, TaskSpec,
    };
    let mention = |phrase: &str, status: MentionStatus| SkillMention {
        phrase: phrase.to_string(),
        status,
        criticality: 1.0,
    };
    let profile = |model: &str, task: &str, instance: &str, mentions: Vec<SkillMention>| {
        InstanceProfile {
            model_id: model.into(),
            task_id: task.into(),
            instance_id: instance.into(),
            mentions,
        }
    };
    let outcome = |model: &str, task: &str, instance: &str| InstanceOutcome {
        model_id: model.into(),
        task_id: task.into(),
        instance_id: instance.into(),
        correct: true,
        score: 1.0,
    };

    // Task t1 has 4 instances (i1..i4), all requiring "numerical
    // calculation" via model a's mentions; a demonstrates on i1-i3 and
    // misses i4, so C[a][numeric] = 3/4. Model b is profiled on t1 but
    // never demonstrates, so C[b][numeric] = 0/4. Task t2 has 2 instances
    // requiring "temporal reasoning", profiled for model a only: model b
    // has no profile there, leaving C[b][temporal] unobserved (stored 0).
    // R at rho 0.5: t1 -> numeric only, t2 -> temporal only.
    let d = MentionStatus::Demonstrated;
    let m = MentionStatus::Missing;
    let dataset = Dataset {
        models: vec![
            ModelSpec {
                model_id: "a".into(),
                cost_per_query: 10.0,
                latency_ms: 0.0,
                display_name: None,
            },
            ModelSpec {
                model_id: "b".into(),
                cost_per_query: 0.88,
                latency_ms: 0.0,
                display_name: None,
            },
        ],
        tasks: vec![
            TaskSpec {
                task_id: "t1".into(),
                metric_name: "accuracy".into(),
            },
            TaskSpec {
                task_id: "t2".into(),
                metric_name: "accuracy".into(),
            },
        ],
        outcomes: vec![
            outcome("a", "t1", "i1"),
            outcome("a", "t1", "i2"),
            outcome("a", "t1", "i3"),
            outcome("a", "t1", "i4"),
            outcome("b", "t1", "i1"),
            outcome("b", "t1", "i2"),
            outcome("b", "t1", "i3"),
            outcome("b", "t1", "i4"),
            outcome("a", "t2", "j1"),
            outcome("a", "t2", "j2"),
        ],
        profiles: vec![
            profile("a", "t1", "i1", vec![mention("numerical calculation", d)]),
            profile("a", "t1", "i2", vec![mention("numerical calculation", d)]),
            profile("a", "t1", "i3", vec![mention("numerical calculation", d)]),
            profile("a", "t1", "i4", vec![mention("numerical calculation", m)]),
            profile("b", "t1", "i1", vec![mention("numerical calculation", m)]),
            profile("b", "t1", "i2", vec![mention("numerical calculation", m)]),
            profile("b", "t1", "i3", vec![mention("numerical calculation", m)]),
            profile("b", "t1", "i4", vec![mention("numerical calculation", m)]),
            profile("a", "t2", "j1", vec![mention("temporal reasoning", d)]),
            profile("a", "t2", "j2", vec![mention("temporal reasoning", d)]),
        ],
    };

    let taxonomy = build_taxonomy(&dataset.profiles, 0.5, &Embedder::trigram(256)).unwrap();
    assert_eq!(taxonomy.skill_count(), 2);
    let numeric = taxonomy.phrase_map["numerical calculation"];
    let temporal = taxonomy.phrase_map["temporal reasoning"];

    let matrices = build_matrices(&dataset, &taxonomy, 0.0, 0.5, &PhraseResolver::Strict).unwrap();
    assert_eq!(matrices.capability[0][numeric], 0.75);
    assert!(matrices.observed[0][numeric]);
    assert_eq!(matrices.capability[1][numeric], 0.0);
    assert!(matrices.observed[1][numeric]);
    assert_eq!(matrices.capability[0][temporal], 1.0);
    assert!(matrices.observed[0][temporal]);
    // Unobserved cell: model b never profiled on a temporal instance.
    assert_eq!(matrices.capability[1][temporal], 0.0);
    assert!(!matrices.observed[1][temporal]);

    let t1 = matrices.task_row("t1").unwrap();
    let t2 = matrices.task_row("t2").unwrap();
    assert_eq!(matrices.requirement[t1][numeric], 1);
    assert_eq!(matrices.requirement[t1][temporal], 0);
    assert_eq!(matrices.requirement[t2][numeric], 0);
    assert_eq!(matrices.requirement[t2][temporal], 1);
    assert_eq!(matrices.cost, vec![10.0, 0.88]);
    println!("acceptance c7 hand-computed matrices fixture: PASS");
}

/// Criterion 8: leave-one-out on the seeded synthetic population. The skill
/// policy's selection precision beats random-under-budget by at least 0.2,
/// fold artifacts are bit-identical to delete-then-rebuild, and the whole
/// run stays under 60 s.
#[test]
fn c8_loocv_beats_random_and_leaks_nothing() {
    let started = Instant::now();
    let population = generate_synthetic(&SyntheticSpec {
        models: 4,
        skills: 3,
        tasks: 5,
        instances_per_task: 50,
        cost_spread: 5.0,
        seed: 42,
    });
    let dataset = &population.dataset;

    // Budget admitting the two cheapest models keeps the query non-trivial.
    let mut costs: Vec<f64> = dataset.models.iter().map(|m| m.cost_per_query).collect();
    costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let budget = (costs[1] + costs[2]) / 2.0;

    let cfg = EvalConfig {
        budget: Some(budget),
        tau: 0.5,
        predictor: PredictorSource::Similarity,
        ..EvalConfig::default()
    };
    let reports = loocv(dataset, &cfg).unwrap();
    assert_eq!(reports.len(), 5);
    let summary = metrics(&reports, dataset).unwrap();
    let skill = summary.per_policy[POLICY_SKILL_BASED].selection_precision;
    let random = summary.per_policy[POLICY_RANDOM].selection_precision;
    assert!(
        skill >= random + 0.2,
        "skill precision {skill} vs random {random}"
    );

    // No leakage: what the fold used equals a from-scratch rebuild on a
    // manually filtered copy, byte for byte.
    for task in &dataset.tasks {
        let via_fold = build_fold_artifacts(&dataset.without_task(&task.task_id), &cfg).unwrap();
        let manual = Dataset {
            models: dataset.models.clone(),
            tasks: dataset
                .tasks
                .iter()
                .filter(|t| t.task_id != task.task_id)
                .cloned()
                .collect(),
            outcomes: dataset
                .outcomes
                .iter()
                .filter(|o| o.task_id != task.task_id)
                .cloned()
                .collect(),
            profiles: dataset
                .profiles
                .iter()
                .filter(|p| p.task_id != task.task_id)
                .cloned()
                .collect(),
        };
        let rebuilt = build_fold_artifacts(&manual, &cfg).unwrap();
        assert_eq!(
            serde_json::to_vec(&via_fold.taxonomy).unwrap(),
            serde_json::to_vec(&rebuilt.taxonomy).unwrap(),
            "taxonomy differs for fold {}",
            task.task_id
        );
        assert_eq!(
            serde_json::to_vec(&via_fold.matrices).unwrap(),
            serde_json::to_vec(&rebuilt.matrices).unwrap(),
            "matrices differ for fold {}",
            task.task_id
        );
        assert_eq!(
            serde_json::to_vec(&via_fold.predictor_model).unwrap(),
            serde_json::to_vec(&rebuilt.predictor_model).unwrap(),
            "predictor differs for fold {}",
            task.task_id
        );
        assert!(!via_fold.matrices.task_ids.contains(&task.task_id));
    }

    // And the whole evaluation is reproducible.
    let rerun = loocv(dataset, &cfg).unwrap();
    assert_eq!(reports, rerun);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "acceptance c8 loocv precision {skill:.2} vs random {random:.2}, no leakage ({elapsed:?}): PASS"
    );
}

/// Criterion 9: the frontier CSV from the bundled fixture lists every model
/// exactly once with positive cost and in-range score, and re-running
/// produces a byte-identical file.
#[test]
fn c9_frontier_csv_is_complete_and_stable() {
    let dataset = load_fixture();
    let rows = frontier(&dataset);
    assert_eq!(rows.len(), dataset.models.len());
    let ids: BTreeSet<&str> = rows.iter().map(|r| r.model_id.as_str()).collect();
    assert_eq!(ids.len(), dataset.models.len(), "duplicate model in frontier");
    for row in &rows {
        assert!(row.cost_per_query > 0.0);
        assert!((0.0..=1.0).contains(&row.mean_score));
    }
    for pair in rows.windows(2) {
        assert!(pair[0].cost_per_query <= pair[1].cost_per_query);
    }
    // The fixture's hand-authored means.
    assert_eq!(rows[0].model_id, "beta-lite");
    assert!((rows[0].mean_score - 0.82).abs() < 1e-12);
    assert_eq!(rows[1].model_id, "alpha-xl");
    assert!((rows[1].mean_score - 0.90).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("frontier-1.csv");
    let second = dir.path().join("frontier-2.csv");
    write_frontier_csv(&rows, &first).unwrap();
    write_frontier_csv(&frontier(&load_fixture()), &second).unwrap();
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "frontier CSV not byte-stable"
    );
    println!("acceptance c9 frontier csv completeness and stability: PASS");
}
