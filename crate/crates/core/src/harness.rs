//! Nested cross-validation benchmark harness: run any registered selector
//! over shared outer folds, evaluate each fold's panel with the common
//! logistic classifier on the untouched test split, and summarise with
//! consensus panels and paired comparisons.
//!
//! Selectors receive training slices only; the outer test fold is
//! reachable solely by the evaluation step, so leakage is ruled out by
//! the interface rather than by discipline.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{fit_logreg, roc_auc};
use crate::dataset::ExpressionDataset;
use crate::error::Result;
use crate::folds::{derive_seed, make_folds, purpose};
use crate::linalg::standardize_train_apply;
use crate::stats::student_t_two_sided_p;
use crate::Real;

/// What a selector returns for one training slice.
#[derive(Debug, Clone)]
pub struct Selection {
    /// Feature indices into the training slice's columns.
    pub panel: Vec<usize>,
    /// Elastic-net fits burned: (single fits, cv fits).
    pub fits: (u64, u64),
    /// Selector-specific extras carried into reports.
    pub detail: Option<serde_json::Value>,
}

/// A panel-producing procedure runnable under the harness.
pub trait Selector: Sync {
    fn name(&self) -> &str;
    fn select(&self, train: &ExpressionDataset, seed: u64) -> Result<Selection>;
}

/// Evaluation settings for the shared classifier.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub l2_strength: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            l2_strength: 1.0,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// One outer fold's record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub auc: f64,
    pub panel: Vec<String>,
    pub runtime_seconds: f64,
    pub fit_single: u64,
    pub fit_cv: u64,
    /// Set when the fold was scored at chance for an empty panel.
    pub flagged_empty: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

/// A selector's full nested-CV outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorOutcome {
    pub method_name: String,
    pub per_fold: Vec<FoldOutcome>,
    pub consensus_panel: Vec<String>,
}

/// Paired comparison of two methods' per-fold AUCs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comparison {
    pub method_a: String,
    pub method_b: String,
    pub mean_diff: f64,
    pub t_statistic: f64,
    pub p_value: f64,
}

/// Summary statistics of a selector outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub mean_auc: f64,
    pub std_auc: f64,
    pub median_auc: f64,
    pub mean_genes: f64,
    pub n_folds: usize,
}

/// The shared outer fold plan of a benchmark run: a pure function of
/// (labels, F, seed), so every selector in a run sees identical splits.
pub fn outer_plan(dataset: &ExpressionDataset, f: usize, seed: u64) -> Result<crate::FoldPlan> {
    make_folds(
        dataset.labels(),
        f,
        derive_seed(seed, &[purpose::OUTER_FOLDS]),
        true,
    )
}

/// Train a logistic model on the panel columns of the training slice and
/// score the held-out rows.
pub fn evaluate_panel(
    dataset: &ExpressionDataset,
    train_idx: &[usize],
    test_idx: &[usize],
    panel: &[usize],
    eval: &EvalConfig,
) -> Result<f64> {
    let x_panel = dataset.matrix().select_cols(panel);
    let xtr = x_panel.select_rows(train_idx);
    let xte = x_panel.select_rows(test_idx);
    let (xtr_s, xte_s, _, _) = standardize_train_apply(&xtr, &xte)?;
    let ytr: Vec<u8> = train_idx.iter().map(|&i| dataset.labels()[i]).collect();
    let yte: Vec<u8> = test_idx.iter().map(|&i| dataset.labels()[i]).collect();
    let model = fit_logreg(&xtr_s, &ytr, eval.l2_strength, eval.tol, eval.max_iter)?;
    roc_auc(&model.decision_scores(&xte_s), &yte)
}

/// Run one selector under F outer folds. The selector sees only the
/// training slice of each fold; panels are evaluated on the untouched
/// test split. An empty panel scores 0.5 and is flagged.
pub fn nested_cv(
    dataset: &ExpressionDataset,
    selector: &dyn Selector,
    f: usize,
    seed: u64,
    eval: &EvalConfig,
    consensus: (usize, usize),
) -> Result<SelectorOutcome> {
    dataset.validate_for_selection()?;
    let plan = outer_plan(dataset, f, seed)?;

    let folds: Vec<Result<FoldOutcome>> = (0..f)
        .into_par_iter()
        .map(|fold| {
            let (train_idx, test_idx) = plan.split(fold);
            let train = dataset.subset_rows(&train_idx);
            let started = Instant::now();
            let selection =
                selector.select(&train, derive_seed(seed, &[purpose::SELECTOR, fold as u64]))?;
            let runtime_seconds = started.elapsed().as_secs_f64();
            let (auc, flagged_empty) = if selection.panel.is_empty() {
                (0.5, true)
            } else {
                (
                    evaluate_panel(dataset, &train_idx, &test_idx, &selection.panel, eval)?,
                    false,
                )
            };
            Ok(FoldOutcome {
                fold,
                auc,
                panel: selection
                    .panel
                    .iter()
                    .map(|&j| dataset.feature_name(j).to_string())
                    .collect(),
                runtime_seconds,
                fit_single: selection.fits.0,
                fit_cv: selection.fits.1,
                flagged_empty,
                detail: selection.detail,
            })
        })
        .collect();

    let mut per_fold = Vec::with_capacity(f);
    for fold in folds {
        per_fold.push(fold?);
    }
    let panels: Vec<BTreeSet<String>> = per_fold
        .iter()
        .map(|o| o.panel.iter().cloned().collect())
        .collect();
    let consensus_panel = consensus_panel(&panels, consensus.0, consensus.1);

    Ok(SelectorOutcome {
        method_name: selector.name().to_string(),
        per_fold,
        consensus_panel,
    })
}

/// Features present in at least ceil(F * num / den) of the per-fold
/// panels, sorted by name.
pub fn consensus_panel(
    per_fold_panels: &[BTreeSet<String>],
    threshold_num: usize,
    threshold_den: usize,
) -> Vec<String> {
    let f = per_fold_panels.len();
    if f == 0 {
        return Vec::new();
    }
    let needed = (f * threshold_num).div_ceil(threshold_den);
    let mut counts: std::collections::BTreeMap<&String, usize> = std::collections::BTreeMap::new();
    for panel in per_fold_panels {
        for name in panel {
            *counts.entry(name).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= needed)
        .map(|(name, _)| name.clone())
        .collect()
}

/// Two-sided paired t-test on per-fold scores. Zero-variance differences
/// follow the degenerate conventions: all-zero differences give p = 1,
/// a nonzero mean with zero variance gives p = 0.
pub fn paired_t_test(name_a: &str, name_b: &str, a: &[f64], b: &[f64]) -> Result<Comparison> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(crate::Error::Invalid(format!(
            "paired test needs equal lengths >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    let (t, p) = if var == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (var.sqrt() / n.sqrt());
        (t, student_t_two_sided_p(t, n - 1.0))
    };
    Ok(Comparison {
        method_a: name_a.to_string(),
        method_b: name_b.to_string(),
        mean_diff: mean,
        t_statistic: t,
        p_value: p,
    })
}

/// Jaccard similarity |a and b| / |a or b|; two empty sets count as 1.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Overlap coefficient |a and b| / min(|a|, |b|); a companion measure
/// that reads higher than Jaccard on nested sets. Two empty sets count
/// as 1.
pub fn overlap_coefficient(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let smaller = a.len().min(b.len());
    if smaller == 0 {
        return if a.is_empty() && b.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    a.intersection(b).count() as f64 / smaller as f64
}

/// Mean/std/median AUC and mean panel size of an outcome. Standard
/// deviation uses the n-1 denominator; a single fold reports 0.
pub fn summarize(outcome: &SelectorOutcome) -> Summary {
    let aucs: Vec<f64> = outcome.per_fold.iter().map(|o| o.auc).collect();
    let n = aucs.len();
    let mean = aucs.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (aucs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = aucs.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median = if n.is_multiple_of(2) {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    let mean_genes = outcome
        .per_fold
        .iter()
        .map(|o| o.panel.len() as f64)
        .sum::<f64>()
        / n as f64;
    Summary {
        mean_auc: mean,
        std_auc: std,
        median_auc: median,
        mean_genes,
        n_folds: n,
    }
}

/// All pairwise comparisons among a run's outcomes, in registration
/// order.
pub fn comparison_matrix(outcomes: &[SelectorOutcome]) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for i in 0..outcomes.len() {
        for j in i + 1..outcomes.len() {
            let a: Vec<f64> = outcomes[i].per_fold.iter().map(|o| o.auc).collect();
            let b: Vec<f64> = outcomes[j].per_fold.iter().map(|o| o.auc).collect();
            out.push(paired_t_test(
                &outcomes[i].method_name,
                &outcomes[j].method_name,
                &a,
                &b,
            )?);
        }
    }
    Ok(out)
}

/// Mean panel size of an outcome, for gene-budget matching.
pub fn mean_panel_size(outcome: &SelectorOutcome) -> Real {
    outcome
        .per_fold
        .iter()
        .map(|o| o.panel.len() as Real)
        .sum::<Real>()
        / outcome.per_fold.len() as Real
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folds::standard_normal;
    use crate::Matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy_dataset(seed: u64, n: usize, p: usize) -> ExpressionDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; n * p];
        let mut latent = vec![0.0; n];
        for i in 0..n {
            for j in 0..p {
                data[i * p + j] = standard_normal(&mut rng);
            }
            latent[i] = 2.0 * data[i * p] + data[i * p + 1] + 0.5 * standard_normal(&mut rng);
        }
        let mut sorted = latent.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = sorted[n / 2];
        let labels: Vec<u8> = latent.iter().map(|&v| (v > med) as u8).collect();
        ExpressionDataset::new(
            Matrix::from_vec(n, p, data).unwrap(),
            labels,
            (0..p).map(|j| format!("g{j}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
        )
        .unwrap()
    }

    struct FixedSelector {
        panel: Vec<usize>,
    }

    impl Selector for FixedSelector {
        fn name(&self) -> &str {
            "fixed"
        }
        fn select(&self, _train: &ExpressionDataset, _seed: u64) -> Result<Selection> {
            Ok(Selection {
                panel: self.panel.clone(),
                fits: (0, 0),
                detail: None,
            })
        }
    }

    /// Remembers nothing, returns everything: equals a plain logistic
    /// baseline fold for fold.
    struct IdentitySelector {
        p: usize,
    }

    impl Selector for IdentitySelector {
        fn name(&self) -> &str {
            "identity"
        }
        fn select(&self, _train: &ExpressionDataset, _seed: u64) -> Result<Selection> {
            Ok(Selection {
                panel: (0..self.p).collect(),
                fits: (0, 0),
                detail: None,
            })
        }
    }

    #[test]
    fn nested_cv_produces_f_records() {
        let ds = toy_dataset(1, 120, 6);
        let sel = FixedSelector { panel: vec![0, 1] };
        let out = nested_cv(&ds, &sel, 10, 7, &EvalConfig::default(), (6, 10)).unwrap();
        assert_eq!(out.per_fold.len(), 10);
        assert_eq!(out.method_name, "fixed");
        // an informative fixed panel should evaluate well
        let s = summarize(&out);
        assert!(s.mean_auc > 0.8, "mean auc {}", s.mean_auc);
        // the same panel every fold makes it the consensus
        assert_eq!(
            out.consensus_panel,
            vec!["g0".to_string(), "g1".to_string()]
        );
    }

    #[test]
    fn identity_selector_equals_plain_logistic_baseline() {
        let ds = toy_dataset(2, 100, 4);
        let sel = IdentitySelector { p: 4 };
        let out = nested_cv(&ds, &sel, 5, 3, &EvalConfig::default(), (6, 10)).unwrap();
        let plan = outer_plan(&ds, 5, 3).unwrap();
        for fold in 0..5 {
            let (tr, te) = plan.split(fold);
            let auc = evaluate_panel(&ds, &tr, &te, &[0, 1, 2, 3], &EvalConfig::default()).unwrap();
            assert_eq!(out.per_fold[fold].auc, auc);
        }
    }

    #[test]
    fn empty_panel_scores_at_chance_and_is_flagged() {
        let ds = toy_dataset(3, 60, 4);
        let sel = FixedSelector { panel: vec![] };
        let out = nested_cv(&ds, &sel, 5, 3, &EvalConfig::default(), (6, 10)).unwrap();
        for fold in &out.per_fold {
            assert_eq!(fold.auc, 0.5);
            assert!(fold.flagged_empty);
        }
    }

    /// Panels derived from everything the selector can see: its training
    /// slice, labels included.
    struct RecordingSelector;

    impl Selector for RecordingSelector {
        fn name(&self) -> &str {
            "recording"
        }
        fn select(&self, train: &ExpressionDataset, _seed: u64) -> Result<Selection> {
            let digest: u64 = train
                .labels()
                .iter()
                .map(|&l| l as u64 + 1)
                .chain(train.sample_ids().iter().map(|s| s.len() as u64))
                .sum();
            Ok(Selection {
                panel: vec![0, (digest % 3 + 1) as usize],
                fits: (0, 0),
                detail: None,
            })
        }
    }

    #[test]
    fn leakage_canary_test_labels_never_reach_selectors() {
        let ds = toy_dataset(4, 80, 4);
        let plan = outer_plan(&ds, 4, 9).unwrap();
        let (tr, te) = plan.split(0);
        // the training slice handed to selectors contains no test rows
        let train = ds.subset_rows(&tr);
        for id in train.sample_ids() {
            assert!(!te.iter().any(|&i| ds.sample_ids()[i] == *id));
        }
        // the panel is a function of the training slice alone
        let sel = RecordingSelector;
        let p1 = sel.select(&train, 1).unwrap().panel;
        let p2 = sel.select(&train, 1).unwrap().panel;
        assert_eq!(p1, p2);
        // permuting test labels moves the evaluation but cannot move the
        // panel, because selection already happened upstream of it
        let auc = evaluate_panel(&ds, &tr, &te, &p1, &EvalConfig::default()).unwrap();
        let mut permuted = ds.labels().to_vec();
        for &i in &te {
            permuted[i] = 1 - permuted[i];
        }
        let moved = ExpressionDataset::new(
            ds.matrix().clone(),
            permuted,
            ds.feature_names().to_vec(),
            ds.sample_ids().to_vec(),
        )
        .unwrap();
        let auc_moved = evaluate_panel(&moved, &tr, &te, &p1, &EvalConfig::default()).unwrap();
        assert_ne!(auc, auc_moved);
    }

    #[test]
    fn shared_plan_is_byte_identical_across_calls() {
        let ds = toy_dataset(5, 50, 3);
        let a = outer_plan(&ds, 5, 42).unwrap();
        let b = outer_plan(&ds, 5, 42).unwrap();
        assert_eq!(a, b);
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn consensus_thresholds() {
        let mut panels = vec![set(&["a", "b"]); 6];
        panels.extend(vec![set(&["b"]); 4]);
        // a appears 6/10, b 10/10
        let c = consensus_panel(&panels, 6, 10);
        assert_eq!(c, vec!["a".to_string(), "b".to_string()]);
        // a at 5/10 is excluded
        let mut panels = vec![set(&["a", "b"]); 5];
        panels.extend(vec![set(&["b"]); 5]);
        let c = consensus_panel(&panels, 6, 10);
        assert_eq!(c, vec!["b".to_string()]);
    }

    #[test]
    fn unanimous_panels_are_their_own_consensus() {
        let panels = vec![set(&["x", "y", "z"]); 7];
        let c = consensus_panel(&panels, 6, 10);
        assert_eq!(c, vec!["x".to_string(), "y".to_string(), "z".to_string()]);
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [0.8, 0.9, 0.7, 0.85];
        let cmp = paired_t_test("a", "b", &a, &a).unwrap();
        assert_eq!(cmp.t_statistic, 0.0);
        assert_eq!(cmp.p_value, 1.0);
    }

    #[test]
    fn t_test_degenerate_constant_difference() {
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = [0.0, 0.0, 0.0, 0.0];
        let cmp = paired_t_test("a", "b", &a, &b).unwrap();
        assert_eq!(cmp.p_value, 0.0);
        assert!(cmp.t_statistic.is_infinite());
    }

    #[test]
    fn t_test_hand_computed_case() {
        // diffs [0.1, 0.2, 0.05, 0.15, 0.1]: mean 0.12, sd 0.057008771,
        // t = mean / (sd / sqrt(5))
        let a = [0.5, 0.6, 0.55, 0.7, 0.62];
        let b = [0.4, 0.4, 0.5, 0.55, 0.52];
        let cmp = paired_t_test("a", "b", &a, &b).unwrap();
        assert!((cmp.mean_diff - 0.12).abs() < 1e-12);
        let sd = 0.057008771254956896_f64;
        let t_expect = 0.12 / (sd / 5.0_f64.sqrt());
        assert!((cmp.t_statistic - t_expect).abs() < 1e-9);
    }

    #[test]
    fn t_test_is_antisymmetric() {
        let a = [0.9, 0.85, 0.8, 0.95, 0.7];
        let b = [0.8, 0.8, 0.75, 0.9, 0.72];
        let ab = paired_t_test("a", "b", &a, &b).unwrap();
        let ba = paired_t_test("b", "a", &b, &a).unwrap();
        assert_eq!(ab.t_statistic, -ba.t_statistic);
        assert_eq!(ab.p_value, ba.p_value);
    }

    #[test]
    fn jaccard_cases() {
        assert_eq!(jaccard(&set(&["a", "b"]), &set(&["a", "b"])), 1.0);
        assert_eq!(jaccard(&set(&["a"]), &set(&["b"])), 0.0);
        assert_eq!(jaccard(&set(&[]), &set(&[])), 1.0);
        // 4 shared between 33 and 35 members: 4 / 64
        let p1: BTreeSet<String> = (0..33).map(|i| format!("x{i}")).collect();
        let p2: BTreeSet<String> = (29..64).map(|i| format!("x{i}")).collect();
        assert_eq!(p1.intersection(&p2).count(), 4);
        assert!((jaccard(&p1, &p2) - 0.0625).abs() < 1e-15);
        // the overlap coefficient reads 4 / 33 on the same pair
        assert!((overlap_coefficient(&p1, &p2) - 4.0 / 33.0).abs() < 1e-15);
    }

    #[test]
    fn summary_conventions() {
        let fold = |fold: usize, auc: f64, panel: Vec<String>| FoldOutcome {
            fold,
            auc,
            panel,
            runtime_seconds: 0.0,
            fit_single: 0,
            fit_cv: 0,
            flagged_empty: false,
            detail: None,
        };
        let outcome = SelectorOutcome {
            method_name: "m".into(),
            per_fold: vec![
                fold(0, 0.9, vec!["a".into()]),
                fold(1, 1.0, vec!["a".into(), "b".into(), "c".into()]),
            ],
            consensus_panel: vec![],
        };
        let s = summarize(&outcome);
        assert!((s.mean_auc - 0.95).abs() < 1e-15);
        assert!((s.median_auc - 0.95).abs() < 1e-15);
        assert!((s.mean_genes - 2.0).abs() < 1e-15);
        let single = SelectorOutcome {
            per_fold: outcome.per_fold[..1].to_vec(),
            ..outcome.clone()
        };
        assert_eq!(summarize(&single).std_auc, 0.0);
    }

    #[test]
    fn summary_matches_hand_computation() {
        let aucs = [0.91, 0.84, 0.88, 0.95, 0.79, 0.9, 0.86, 0.93, 0.82, 0.87];
        let outcome = SelectorOutcome {
            method_name: "m".into(),
            per_fold: aucs
                .iter()
                .enumerate()
                .map(|(i, &auc)| FoldOutcome {
                    fold: i,
                    auc,
                    panel: vec![],
                    runtime_seconds: 0.0,
                    fit_single: 0,
                    fit_cv: 0,
                    flagged_empty: false,
                    detail: None,
                })
                .collect(),
            consensus_panel: vec![],
        };
        let s = summarize(&outcome);
        assert!((s.mean_auc - 0.875).abs() < 1e-12);
        assert!((s.std_auc - 0.0497214).abs() < 1e-6);
        assert!((s.median_auc - 0.875).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn consensus_is_monotone_in_threshold(
            flags in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 4), 3..12)
        ) {
            let names = ["a", "b", "c", "d"];
            let panels: Vec<BTreeSet<String>> = flags
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(names.iter())
                        .filter(|(keep, _)| **keep)
                        .map(|(_, n)| n.to_string())
                        .collect()
                })
                .collect();
            let lower = consensus_panel(&panels, 5, 10);
            let higher = consensus_panel(&panels, 8, 10);
            for name in &higher {
                prop_assert!(lower.contains(name));
            }
        }

        #[test]
        fn jaccard_symmetric_and_bounded(
            xs in proptest::collection::btree_set(0u8..20, 0..12),
            ys in proptest::collection::btree_set(0u8..20, 0..12),
        ) {
            let a: BTreeSet<String> = xs.iter().map(|v| v.to_string()).collect();
            let b: BTreeSet<String> = ys.iter().map(|v| v.to_string()).collect();
            let j = jaccard(&a, &b);
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(j, jaccard(&b, &a));
        }
    }
}
