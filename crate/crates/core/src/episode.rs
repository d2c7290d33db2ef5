//! The per-outer-fold selection driver: anchor the regularisation
//! strength once, then run K episodes of warmup plus policy-guided
//! iterations, dual-criterion selection, reward and policy update.
//!
//! Episode `e` draws its fold seeds from `(run seed, e, t)` so iterations
//! use independent reshuffles while the whole run stays reproducible.
//! Episodes chain through the policy update and run sequentially by
//! default; `batch_episodes > 1` enables a variant that runs batches at a
//! frozen policy and applies the mean update, which changes the learning
//! dynamics and is reported as such.

use rayon::prelude::*;

use crate::accumulator::{Accumulator, AccumulatorSnapshot};
use crate::classifier::{panel_cv_auc, roc_auc};
use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::folds::{derive_seed, make_folds, purpose, standard_normal, FoldPlan};
use crate::linalg::standardize_train_apply;
use crate::network::InteractionNetwork;
use crate::policy::{
    gene_penalties, grad_log_prob, m_frac, policy_score, state_vector, update_policy,
    GradientAccumulator, PolicyParams, THETA5_CLIP, THETA_DIM,
};
use crate::solver::{cv_select_alpha, EnetProblem, EnetSettings, PenaltyVector};
use crate::types::{FitCounter, FitResult};
use crate::Real;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How policy-loop penalties are formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyMode {
    /// Per-gene penalties `alpha * sigmoid(z_i)` from the policy scores.
    Policy,
    /// Uniform penalties `alpha * scale` for every policy-loop iteration;
    /// `scale = 1.0` reproduces the fixed dual-criterion baseline.
    UniformScaled(f64),
}

/// How the retention parameter receives its gradient. Both routes are
/// design choices of this implementation; the score itself does not
/// involve the retention parameter unless the bias entry carries it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta5Route {
    /// Constant bias entry in each state vector feeds the score, so the
    /// standard score-function gradient covers the fifth component.
    BiasFeature,
    /// Gaussian perturbation of the retention parameter per episode with
    /// the score `eps / sigma^2`.
    Perturbation { sigma: f64 },
}

/// Driver configuration. Defaults carry the reference hyperparameters:
/// learning rate 0.5, baseline decay 0.9, tolerance 0.02, sparsity weight
/// 0.001, 15 episodes, 5 inner folds, minimum panel of 3.
#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub episodes: usize,
    pub inner_folds: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub sparsity_weight: f64,
    pub learning_rate: f64,
    pub baseline_decay: f64,
    pub min_genes: usize,
    pub seed: u64,
    pub enet: EnetSettings,
    pub penalty_mode: PenaltyMode,
    /// Fixed retention fraction instead of the policy-driven mapping.
    pub m_frac_override: Option<f64>,
    pub theta5_route: Theta5Route,
    /// 1 runs episodes sequentially; larger values run batches at a
    /// frozen policy and apply the mean update.
    pub batch_episodes: usize,
    /// Folds and ridge strength of the reward cross-validation.
    pub reward_folds: usize,
    pub reward_l2: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            episodes: 15,
            inner_folds: 5,
            max_iterations: 10,
            tolerance: 0.02,
            sparsity_weight: 0.001,
            learning_rate: 0.5,
            baseline_decay: 0.9,
            min_genes: 3,
            seed: 0,
            enet: EnetSettings::default(),
            penalty_mode: PenaltyMode::Policy,
            m_frac_override: None,
            theta5_route: Theta5Route::BiasFeature,
            batch_episodes: 1,
            reward_folds: 5,
            reward_l2: 1.0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes < 1
            || self.inner_folds < 2
            || self.max_iterations < 2
            || self.tolerance < 0.0
            || self.min_genes < 1
            || self.batch_episodes < 1
        {
            return Err(Error::Invalid(
                "episode config out of range: need episodes >= 1, inner_folds >= 2, \
                 max_iterations >= 2, tolerance >= 0, min_genes >= 1, batch_episodes >= 1"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one episode.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub panel: Vec<usize>,
    pub reward: f64,
    /// Reward-side AUC; zero when the dual intersection came up empty.
    pub auc: f64,
    /// Warmup AUC followed by the policy-loop AUCs.
    pub auc_history: Vec<f64>,
    /// Iterations actually run, warmup included.
    pub iterations_run: usize,
    pub theta_after: [Real; THETA_DIM],
    /// Normalised gradient handed to the policy update.
    pub gradient: [Real; THETA_DIM],
    pub snapshot: AccumulatorSnapshot,
    pub fit_single: u64,
    pub fit_cv: u64,
}

/// Result of a full per-fold run.
#[derive(Debug, Clone)]
pub struct FoldRunResult {
    pub alpha: Real,
    pub cv_curve: Vec<Real>,
    pub final_panel: Vec<usize>,
    pub theta: [Real; THETA_DIM],
    pub snapshot: AccumulatorSnapshot,
    pub episodes: Vec<EpisodeResult>,
    pub fit_single: u64,
    pub fit_cv: u64,
}

/// Anchor the regularisation strength with one cross-validated search
/// (5 folds over the settings' grid) on the training data; the value is
/// held fixed for every episode of the fold.
pub fn anchor_alpha(
    train: &ExpressionDataset,
    settings: &EnetSettings,
    seed: u64,
    counter: &FitCounter,
) -> Result<(Real, Vec<Real>)> {
    cv_select_alpha(
        train.matrix(),
        &train.labels_as_real(),
        5,
        settings,
        seed,
        counter,
    )
}

/// Run the k fold fits of one iteration: fit on each training split at
/// the shared penalties, absorb the fits in fold order, and return the
/// mean held-out AUC together with the union of the fold active sets.
pub fn run_iteration(
    train: &ExpressionDataset,
    plan: &FoldPlan,
    penalties: &PenaltyVector<Real>,
    acc: &mut Accumulator<Real>,
    settings: &EnetSettings,
    counter: &FitCounter,
) -> Result<(f64, Vec<bool>)> {
    let y = train.labels_as_real();
    let fold_runs: Vec<Result<(FitResult<Real>, f64)>> = (0..plan.k())
        .into_par_iter()
        .map(|fold| {
            let (tr, te) = plan.split(fold);
            let xtr = train.matrix().select_rows(&tr);
            let xte = train.matrix().select_rows(&te);
            let (xtr_s, xte_s, _, _) = standardize_train_apply(&xtr, &xte)?;
            let ytr: Vec<Real> = tr.iter().map(|&i| y[i]).collect();
            let yte: Vec<u8> = te.iter().map(|&i| train.labels()[i]).collect();
            let prob = EnetProblem::new(&xtr_s, &ytr)?;
            let scratch = FitCounter::new();
            let fit = prob.solve(penalties, settings.tol, settings.max_iter, None, &scratch)?;
            let scores = fit.predict(&xte_s);
            let auc = roc_auc(&scores, &yte)?;
            Ok((fit, auc))
        })
        .collect();

    let mut union = vec![false; train.n_features()];
    let mut auc_sum = 0.0;
    let k = plan.k();
    for run in fold_runs {
        let (fit, auc) = run?;
        for &j in &fit.selected {
            union[j] = true;
        }
        acc.absorb_fit(&fit)?;
        auc_sum += auc;
    }
    counter.add_single(k as u64);
    Ok((auc_sum / k as f64, union))
}

/// True once the last two consecutive absolute differences of the AUC
/// sequence both fall below the tolerance. Sequences shorter than three
/// never converge.
pub fn check_convergence(auc_history: &[f64], tolerance: f64) -> bool {
    let n = auc_history.len();
    if n < 3 {
        return false;
    }
    let d1 = (auc_history[n - 1] - auc_history[n - 2]).abs();
    let d2 = (auc_history[n - 2] - auc_history[n - 3]).abs();
    d1 < tolerance && d2 < tolerance
}

/// Pool width for the dual criterion: the retention fraction applied to
/// the mean active-set size, floored and clamped from below.
pub fn compute_m(genes_per_fold: &[usize], m_frac: f64, min_genes: usize) -> usize {
    if genes_per_fold.is_empty() {
        return min_genes;
    }
    let mean = genes_per_fold.iter().sum::<usize>() as f64 / genes_per_fold.len() as f64;
    // the nudge keeps products like 40 * 0.575 from flooring one short
    let m = (mean * m_frac + 1e-9).floor() as usize;
    m.max(min_genes)
}

/// Run one episode at frozen policy parameters. The caller applies the
/// update.
pub fn run_episode(
    train: &ExpressionDataset,
    alpha: Real,
    params: &PolicyParams<Real>,
    cfg: &EpisodeConfig,
    episode_idx: usize,
    prior: Option<&InteractionNetwork>,
    counter: &FitCounter,
) -> Result<EpisodeResult> {
    let p = train.n_features();
    let labels = train.labels();
    let ep_counter = FitCounter::new();
    let mut acc = Accumulator::<Real>::new(p);

    // effective retention parameter for this episode
    let (theta_eff, perturbation) = match cfg.theta5_route {
        Theta5Route::BiasFeature => (params.theta, None),
        Theta5Route::Perturbation { sigma } => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                cfg.seed,
                &[purpose::PERTURB, episode_idx as u64],
            ));
            let eps = sigma * standard_normal(&mut rng);
            let mut theta = params.theta;
            theta[4] = (theta[4] + eps).clamp(THETA5_CLIP.0, THETA5_CLIP.1);
            (theta, Some((eps, sigma)))
        }
    };
    let frac = cfg.m_frac_override.unwrap_or_else(|| m_frac(theta_eff[4]));
    let bias = match cfg.theta5_route {
        Theta5Route::BiasFeature => 1.0,
        Theta5Route::Perturbation { .. } => 0.0,
    };

    // warmup: uniform penalties at the raw anchored strength, no gradient
    let plan = make_folds(
        labels,
        cfg.inner_folds,
        derive_seed(cfg.seed, &[purpose::EPISODE, episode_idx as u64, 1]),
        true,
    )?;
    let warm_pen = PenaltyVector::uniform(alpha, p, cfg.enet.l1_ratio)?;
    let (warm_auc, _) = run_iteration(train, &plan, &warm_pen, &mut acc, &cfg.enet, &ep_counter)?;
    let mut auc_history = vec![warm_auc];
    let mut gradient = GradientAccumulator::<Real>::new();
    let mut iterations_run = 1usize;

    for t in 2..=cfg.max_iterations {
        let m = compute_m(acc.genes_per_fold(), frac, cfg.min_genes);
        let reference = acc.dual_select(m);
        acc.set_last_selection(reference);

        let feats = acc.state_matrix(prior)?;
        let states: Vec<[Real; THETA_DIM]> = feats.iter().map(|f| state_vector(f, bias)).collect();
        let scores: Vec<Real> = states.iter().map(|s| policy_score(s, &theta_eff)).collect();

        let pen = match cfg.penalty_mode {
            PenaltyMode::Policy => gene_penalties(alpha, &scores, cfg.enet.l1_ratio)?,
            PenaltyMode::UniformScaled(scale) => {
                PenaltyVector::uniform(alpha * scale, p, cfg.enet.l1_ratio)?
            }
        };
        let plan_t = make_folds(
            labels,
            cfg.inner_folds,
            derive_seed(cfg.seed, &[purpose::EPISODE, episode_idx as u64, t as u64]),
            true,
        )?;
        let (auc_t, union) = run_iteration(train, &plan_t, &pen, &mut acc, &cfg.enet, &ep_counter)?;

        gradient.add(&grad_log_prob(&union, &scores, &states));
        auc_history.push(auc_t);
        iterations_run = t;

        // the stopping rule watches the policy-loop AUCs only
        if check_convergence(&auc_history[1..], cfg.tolerance) {
            break;
        }
    }

    let mut g = gradient.normalized(p, iterations_run);
    if let Some((eps, sigma)) = perturbation {
        g[4] = eps / (sigma * sigma);
    }

    let m = compute_m(acc.genes_per_fold(), frac, cfg.min_genes);
    let panel = acc.dual_select(m);
    let (auc, reward) = if panel.is_empty() {
        (0.0, 0.0)
    } else {
        let a = panel_cv_auc(
            train,
            &panel,
            cfg.reward_folds,
            derive_seed(cfg.seed, &[purpose::REWARD, episode_idx as u64]),
            cfg.reward_l2,
        )?;
        (a, a - cfg.sparsity_weight * panel.len() as f64)
    };

    counter.merge(&ep_counter);
    Ok(EpisodeResult {
        panel,
        reward,
        auc,
        auc_history,
        iterations_run,
        theta_after: params.theta,
        gradient: g,
        snapshot: acc.snapshot(),
        fit_single: ep_counter.single_fits(),
        fit_cv: ep_counter.cv_fits(),
    })
}

/// Run the full driver on one outer-fold training set: anchor once, run K
/// episodes with policy updates in between, and return the final
/// episode's panel, the learned parameters, the final co-selection
/// snapshot and the complete episode log.
pub fn run_fold(
    train: &ExpressionDataset,
    cfg: &EpisodeConfig,
    prior: Option<&InteractionNetwork>,
) -> Result<FoldRunResult> {
    cfg.validate()?;
    train.validate_for_selection()?;
    let counter = FitCounter::new();
    let (alpha, cv_curve) = anchor_alpha(
        train,
        &cfg.enet,
        derive_seed(cfg.seed, &[purpose::ANCHOR_CV]),
        &counter,
    )?;

    let mut params = PolicyParams::<Real>::default();
    let mut episodes: Vec<EpisodeResult> = Vec::with_capacity(cfg.episodes);

    if cfg.batch_episodes <= 1 {
        for e in 1..=cfg.episodes {
            let mut ep = run_episode(train, alpha, &params, cfg, e, prior, &counter)?;
            update_policy(
                &mut params,
                &ep.gradient,
                ep.reward,
                cfg.learning_rate,
                cfg.baseline_decay,
            );
            ep.theta_after = params.theta;
            episodes.push(ep);
        }
    } else {
        // batched variant: episodes inside a batch share frozen
        // parameters; the batch applies one mean update
        let mut start = 1usize;
        while start <= cfg.episodes {
            let end = (start + cfg.batch_episodes - 1).min(cfg.episodes);
            let frozen = params;
            let batch: Vec<Result<EpisodeResult>> = (start..=end)
                .into_par_iter()
                .map(|e| run_episode(train, alpha, &frozen, cfg, e, prior, &counter))
                .collect();
            let mut results = Vec::with_capacity(batch.len());
            for r in batch {
                results.push(r?);
            }
            let n = results.len() as f64;
            let mean_reward = results.iter().map(|r| r.reward).sum::<f64>() / n;
            params.baseline =
                cfg.baseline_decay * params.baseline + (1.0 - cfg.baseline_decay) * mean_reward;
            let mut step = [0.0; THETA_DIM];
            for r in &results {
                let adv = r.reward - params.baseline;
                for (s, g) in step.iter_mut().zip(&r.gradient) {
                    *s += adv * *g / n;
                }
            }
            for (t, s) in params.theta.iter_mut().zip(&step) {
                *t += cfg.learning_rate * *s;
            }
            params.theta[4] = params.theta[4].clamp(THETA5_CLIP.0, THETA5_CLIP.1);
            for mut r in results {
                r.theta_after = params.theta;
                episodes.push(r);
            }
            start = end + 1;
        }
    }

    let last = episodes.last().expect("at least one episode");
    Ok(FoldRunResult {
        alpha,
        cv_curve,
        final_panel: last.panel.clone(),
        theta: params.theta,
        snapshot: last.snapshot.clone(),
        episodes,
        fit_single: counter.single_fits(),
        fit_cv: counter.cv_fits(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn planted_dataset(seed: u64, n: usize, p: usize, planted: &[usize]) -> ExpressionDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![0.0; n * p];
        let mut latent = vec![0.0; n];
        for i in 0..n {
            for j in 0..p {
                data[i * p + j] = standard_normal(&mut rng);
            }
            latent[i] = planted.iter().map(|&j| data[i * p + j]).sum::<f64>()
                + 0.4 * standard_normal(&mut rng);
        }
        let mut sorted = latent.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[n / 2];
        let labels: Vec<u8> = latent.iter().map(|&v| (v > median) as u8).collect();
        ExpressionDataset::new(
            Matrix::from_vec(n, p, data).unwrap(),
            labels,
            (0..p).map(|j| format!("g{j}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn convergence_rule_examples() {
        assert!(check_convergence(&[0.80, 0.81, 0.815], 0.02));
        assert!(!check_convergence(&[0.6, 0.9, 0.91], 0.02));
        assert!(!check_convergence(&[0.8, 0.81], 0.02));
        assert!(!check_convergence(&[], 0.02));
    }

    #[test]
    fn compute_m_examples() {
        let frac = m_frac(0.0f64);
        assert_eq!(compute_m(&[40; 5], frac, 3), 23);
        assert_eq!(compute_m(&[4; 5], 0.25, 3), 3);
        assert_eq!(compute_m(&[0; 5], 0.25, 3), 3);
        assert_eq!(compute_m(&[], 0.5, 3), 3);
    }

    #[test]
    fn anchoring_counts_500_cv_fits() {
        let ds = planted_dataset(1, 60, 12, &[0, 1]);
        let counter = FitCounter::new();
        let (alpha, curve) = anchor_alpha(&ds, &EnetSettings::default(), 9, &counter).unwrap();
        assert_eq!(counter.cv_fits(), 500);
        assert_eq!(counter.single_fits(), 0);
        assert!(alpha > 0.0);
        assert_eq!(curve.len(), 100);
        // deterministic per (data, seed)
        let counter2 = FitCounter::new();
        let (alpha2, _) = anchor_alpha(&ds, &EnetSettings::default(), 9, &counter2).unwrap();
        assert_eq!(alpha, alpha2);
    }

    #[test]
    fn iteration_counts_k_fits_and_scores_sanely() {
        let ds = planted_dataset(2, 80, 10, &[0, 1, 2]);
        let plan = make_folds(ds.labels(), 5, 7, true).unwrap();
        let counter = FitCounter::new();
        let mut acc = Accumulator::new(10);
        let pen = PenaltyVector::uniform(0.02, 10, 0.5).unwrap();
        let (auc, union) = run_iteration(
            &ds,
            &plan,
            &pen,
            &mut acc,
            &EnetSettings::default(),
            &counter,
        )
        .unwrap();
        assert_eq!(counter.single_fits(), 5);
        assert_eq!(acc.fold_fits(), 5);
        assert!(auc > 0.9, "planted-signal iteration auc {auc}");
        assert!(union[0] && union[1] && union[2]);
    }

    #[test]
    fn iteration_with_full_shrinkage_scores_at_chance() {
        let ds = planted_dataset(3, 40, 6, &[0]);
        let plan = make_folds(ds.labels(), 4, 7, true).unwrap();
        let counter = FitCounter::new();
        let mut acc = Accumulator::new(6);
        // a penalty far above alpha_max zeroes every fold fit
        let pen = PenaltyVector::uniform(1e6, 6, 0.5).unwrap();
        let (auc, union) = run_iteration(
            &ds,
            &plan,
            &pen,
            &mut acc,
            &EnetSettings::default(),
            &counter,
        )
        .unwrap();
        assert_eq!(auc, 0.5);
        assert!(union.iter().all(|&u| !u));
    }

    fn quick_cfg(seed: u64) -> EpisodeConfig {
        EpisodeConfig {
            episodes: 3,
            max_iterations: 4,
            seed,
            enet: EnetSettings {
                n_alphas: 20,
                ..EnetSettings::default()
            },
            ..EpisodeConfig::default()
        }
    }

    #[test]
    fn reward_decomposes_exactly() {
        let ds = planted_dataset(5, 70, 8, &[0, 1]);
        let fold = run_fold(&ds, &quick_cfg(11), None).unwrap();
        for ep in &fold.episodes {
            let expect = if ep.panel.is_empty() {
                0.0
            } else {
                ep.auc - 0.001 * ep.panel.len() as f64
            };
            assert_eq!(ep.reward, expect);
        }
    }

    #[test]
    fn run_fold_is_deterministic() {
        let ds = planted_dataset(6, 70, 8, &[0, 1]);
        let a = run_fold(&ds, &quick_cfg(21), None).unwrap();
        let b = run_fold(&ds, &quick_cfg(21), None).unwrap();
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.final_panel, b.final_panel);
        assert_eq!(a.theta, b.theta);
        for (x, y) in a.episodes.iter().zip(&b.episodes) {
            assert_eq!(x.panel, y.panel);
            assert_eq!(x.reward, y.reward);
            assert_eq!(x.auc_history, y.auc_history);
        }
    }

    #[test]
    fn early_stopping_needs_two_policy_diffs() {
        // a huge tolerance makes the rule fire at the first opportunity,
        // which is iteration 4 (three policy AUCs, two diffs)
        let ds = planted_dataset(7, 70, 8, &[0, 1]);
        let cfg = EpisodeConfig {
            episodes: 2,
            max_iterations: 8,
            tolerance: 1e9,
            seed: 3,
            enet: EnetSettings {
                n_alphas: 20,
                ..EnetSettings::default()
            },
            ..EpisodeConfig::default()
        };
        let fold = run_fold(&ds, &cfg, None).unwrap();
        for ep in &fold.episodes {
            assert_eq!(ep.iterations_run, 4);
        }
    }

    #[test]
    fn zero_tolerance_forces_max_iterations() {
        let ds = planted_dataset(8, 70, 8, &[0, 1]);
        let cfg = EpisodeConfig {
            episodes: 2,
            max_iterations: 3,
            tolerance: 0.0,
            seed: 5,
            enet: EnetSettings {
                n_alphas: 20,
                ..EnetSettings::default()
            },
            ..EpisodeConfig::default()
        };
        let fold = run_fold(&ds, &cfg, None).unwrap();
        for ep in &fold.episodes {
            assert_eq!(ep.iterations_run, 3);
            assert_eq!(ep.fit_single, 15); // 3 iterations x 5 folds
        }
    }

    #[test]
    fn zero_theta_policy_equals_uniform_half_alpha() {
        // frozen zero parameters score every gene at sigmoid(0) = 1/2, so
        // the policy path must match uniform penalties at alpha/2 with the
        // same retention fraction
        let ds = planted_dataset(9, 70, 8, &[0, 1]);
        let base = EpisodeConfig {
            episodes: 3,
            learning_rate: 0.0,
            max_iterations: 4,
            seed: 17,
            enet: EnetSettings {
                n_alphas: 20,
                ..EnetSettings::default()
            },
            ..EpisodeConfig::default()
        };
        let policy = run_fold(&ds, &base, None).unwrap();
        let uniform_cfg = EpisodeConfig {
            penalty_mode: PenaltyMode::UniformScaled(0.5),
            m_frac_override: Some(m_frac(0.0)),
            ..base
        };
        let uniform = run_fold(&ds, &uniform_cfg, None).unwrap();
        for (a, b) in policy.episodes.iter().zip(&uniform.episodes) {
            assert_eq!(a.panel, b.panel);
        }
        assert_eq!(policy.final_panel, uniform.final_panel);
    }

    #[test]
    fn batched_mode_is_deterministic_and_labelled_variant() {
        let ds = planted_dataset(10, 70, 8, &[0, 1]);
        let cfg = EpisodeConfig {
            batch_episodes: 3,
            ..quick_cfg(31)
        };
        let a = run_fold(&ds, &cfg, None).unwrap();
        let b = run_fold(&ds, &cfg, None).unwrap();
        assert_eq!(a.final_panel, b.final_panel);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.episodes.len(), 3);
    }

    #[test]
    fn theta5_drifts_negative_more_often_than_positive() {
        // directional check: with the sparsity-weighted reward the
        // retention parameter should mostly move below its zero start
        let mut negative = 0;
        let mut positive = 0;
        for seed in 0..10u64 {
            let ds = planted_dataset(40 + seed, 100, 20, &[0, 5, 11]);
            let cfg = EpisodeConfig {
                episodes: 6,
                max_iterations: 4,
                seed,
                enet: EnetSettings {
                    n_alphas: 25,
                    ..EnetSettings::default()
                },
                ..EpisodeConfig::default()
            };
            let fold = run_fold(&ds, &cfg, None).unwrap();
            if fold.theta[4] < 0.0 {
                negative += 1;
            } else if fold.theta[4] > 0.0 {
                positive += 1;
            }
        }
        assert!(
            negative > positive,
            "negative {negative}, positive {positive}"
        );
    }

    #[test]
    fn perturbation_route_runs_and_learns_theta5_only_via_noise() {
        let ds = planted_dataset(12, 70, 8, &[0, 1]);
        let cfg = EpisodeConfig {
            theta5_route: Theta5Route::Perturbation { sigma: 0.3 },
            ..quick_cfg(41)
        };
        let fold = run_fold(&ds, &cfg, None).unwrap();
        assert_eq!(fold.episodes.len(), 3);
        // retention parameter stays within the clip range
        assert!(fold.theta[4] >= THETA5_CLIP.0 && fold.theta[4] <= THETA5_CLIP.1);
    }
}
