//! Comparison selectors run under the identical harness: stability
//! selection, an mRMR filter, a plain cross-validated elastic net, and
//! the policy-free dual-criterion baseline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::ExpressionDataset;
use crate::episode::{run_fold, EpisodeConfig, PenaltyMode};
use crate::error::{Error, Result};
use crate::folds::{derive_seed, purpose};
use crate::harness::{Selection, Selector};
use crate::linalg::standardize_train_apply;
use crate::network::InteractionNetwork;
use crate::solver::{cv_select_alpha, EnetProblem, EnetSettings, PenaltyVector};
use crate::types::FitCounter;
use crate::{Matrix, Real};

/// Stability-selection configuration. Subsamples are drawn without
/// replacement at the given fraction of the data.
#[derive(Debug, Clone)]
pub struct StabilityConfig {
    pub n_lambdas: usize,
    pub lambda_range: (f64, f64),
    pub n_subsamples: usize,
    pub threshold: f64,
    pub subsample_fraction: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            n_lambdas: 25,
            lambda_range: (1e-3, 1e-1),
            n_subsamples: 100,
            threshold: 0.9,
            subsample_fraction: 0.5,
            tol: 1e-4,
            max_iter: 1000,
        }
    }
}

impl StabilityConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lambda_range;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::Invalid(format!(
                "lambda range must satisfy 0 < low < high, got ({lo}, {hi})"
            )));
        }
        if self.n_subsamples < 1 || self.n_lambdas < 1 {
            return Err(Error::Invalid(
                "need at least 1 subsample and 1 lambda".into(),
            ));
        }
        if !(0.0 < self.threshold && self.threshold <= 1.0) {
            return Err(Error::Invalid(format!(
                "threshold must lie in (0, 1], got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Geometric grid, strongest first.
    fn lambdas(&self) -> Vec<f64> {
        let (lo, hi) = self.lambda_range;
        if self.n_lambdas == 1 {
            return vec![hi];
        }
        let step = (lo / hi).ln() / (self.n_lambdas - 1) as f64;
        (0..self.n_lambdas)
            .map(|i| hi * (step * i as f64).exp())
            .collect()
    }
}

/// Per-feature stability scores: the maximum over the lambda grid of the
/// lasso selection frequency across subsamples.
pub fn stability_scores(
    train: &ExpressionDataset,
    config: &StabilityConfig,
    seed: u64,
    counter: &FitCounter,
) -> Result<Vec<f64>> {
    config.validate()?;
    let n = train.n_samples();
    let p = train.n_features();
    let m = (n as f64 * config.subsample_fraction).floor() as usize;
    if m < 4 {
        return Err(Error::Invalid(format!(
            "subsample of {m} rows is too small to fit"
        )));
    }
    let y = train.labels_as_real();
    let lambdas = config.lambdas();

    let counts: Vec<Result<Vec<Vec<bool>>>> = (0..config.n_subsamples)
        .into_par_iter()
        .map(|b| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(seed, &[purpose::SUBSAMPLE, b as u64]));
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order.truncate(m);
            let xs = train.matrix().select_rows(&order);
            let (xs_std, _, _, _) = standardize_train_apply(&xs, &Matrix::zeros(0, p))?;
            let ys: Vec<Real> = order.iter().map(|&i| y[i]).collect();
            let prob = EnetProblem::new(&xs_std, &ys)?;
            let scratch = FitCounter::new();
            let mut warm: Option<Vec<Real>> = None;
            let mut active = Vec::with_capacity(lambdas.len());
            for &lambda in &lambdas {
                let pen = PenaltyVector::uniform(lambda, p, 1.0)?;
                let fit =
                    prob.solve(&pen, config.tol, config.max_iter, warm.as_deref(), &scratch)?;
                let mut row = vec![false; p];
                for &j in &fit.selected {
                    row[j] = true;
                }
                active.push(row);
                warm = Some(fit.coefficients);
            }
            Ok(active)
        })
        .collect();

    let mut freq = vec![vec![0usize; p]; lambdas.len()];
    for per_subsample in counts {
        let per_subsample = per_subsample?;
        for (l, row) in per_subsample.into_iter().enumerate() {
            for (j, hit) in row.into_iter().enumerate() {
                if hit {
                    freq[l][j] += 1;
                }
            }
        }
    }
    counter.add_single((config.n_lambdas * config.n_subsamples) as u64);

    let b = config.n_subsamples as f64;
    let scores = (0..p)
        .map(|j| {
            freq.iter()
                .map(|row| row[j] as f64 / b)
                .fold(0.0f64, f64::max)
        })
        .collect();
    Ok(scores)
}

/// Meinshausen-Buhlmann stability selection: features whose maximal
/// selection frequency reaches the threshold.
pub fn stability_selection(
    train: &ExpressionDataset,
    config: &StabilityConfig,
    seed: u64,
    counter: &FitCounter,
) -> Result<Vec<usize>> {
    let scores = stability_scores(train, config, seed, counter)?;
    Ok((0..train.n_features())
        .filter(|&j| scores[j] >= config.threshold)
        .collect())
}

/// Equal-frequency bin assignment with tie-safe edges: equal values land
/// in the same bin, so duplicate columns bin identically.
fn bin_column(values: &[f64], n_bins: usize) -> Vec<usize> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let edges: Vec<f64> = (1..n_bins).map(|b| sorted[b * n / n_bins]).collect();
    values
        .iter()
        .map(|&v| edges.iter().filter(|&&e| v > e).count())
        .collect()
}

/// Plug-in mutual information between two discrete sequences, in nats.
fn mutual_information(a: &[usize], a_card: usize, b: &[usize], b_card: usize) -> f64 {
    let n = a.len() as f64;
    let mut joint = vec![0.0; a_card * b_card];
    let mut pa = vec![0.0; a_card];
    let mut pb = vec![0.0; b_card];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * b_card + y] += 1.0;
        pa[x] += 1.0;
        pb[y] += 1.0;
    }
    let mut mi = 0.0;
    for x in 0..a_card {
        for y in 0..b_card {
            let j = joint[x * b_card + y] / n;
            if j > 0.0 {
                mi += j * (j * n * n / (pa[x] * pb[y])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Greedy maximum-relevance minimum-redundancy filter on binned features:
/// each step adds the feature maximising MI(feature; label) minus the
/// mean MI with the already-selected set. Deterministic with smaller
/// indices winning ties; panels for k are prefixes of panels for k+1.
pub fn mrmr(train: &ExpressionDataset, k: usize, n_bins: usize) -> Result<Vec<usize>> {
    let p = train.n_features();
    if k < 1 || k > p {
        return Err(Error::Invalid(format!(
            "mrmr k must lie in [1, {p}], got {k}"
        )));
    }
    if n_bins < 2 {
        return Err(Error::Invalid("mrmr needs at least 2 bins".into()));
    }
    train.validate_for_selection()?;
    let labels: Vec<usize> = train.labels().iter().map(|&l| l as usize).collect();
    let binned: Vec<Vec<usize>> = (0..p)
        .map(|j| bin_column(&train.matrix().col_to_vec(j), n_bins))
        .collect();
    let relevance: Vec<f64> = binned
        .iter()
        .map(|col| mutual_information(col, n_bins, &labels, 2))
        .collect();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut redundancy_sum = vec![0.0; p];
    let mut in_panel = vec![false; p];
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..p {
            if in_panel[j] {
                continue;
            }
            let red = if selected.is_empty() {
                0.0
            } else {
                redundancy_sum[j] / selected.len() as f64
            };
            let score = relevance[j] - red;
            let better = match best {
                None => true,
                Some((_, s)) => score > s,
            };
            if better {
                best = Some((j, score));
            }
        }
        let (j, _) = best.expect("k <= p leaves a candidate");
        in_panel[j] = true;
        for other in 0..p {
            if !in_panel[other] {
                redundancy_sum[other] +=
                    mutual_information(&binned[other], n_bins, &binned[j], n_bins);
            }
        }
        selected.push(j);
    }
    Ok(selected)
}

/// Cross-validated elastic net: anchor the strength, refit once, return
/// the active set.
pub fn enet_select(
    train: &ExpressionDataset,
    settings: &EnetSettings,
    seed: u64,
    counter: &FitCounter,
) -> Result<Vec<usize>> {
    train.validate_for_selection()?;
    let y = train.labels_as_real();
    let (alpha, _) = cv_select_alpha(train.matrix(), &y, 5, settings, seed, counter)?;
    let p = train.n_features();
    let (x_std, _, _, _) = standardize_train_apply(train.matrix(), &Matrix::zeros(0, p))?;
    let pen = PenaltyVector::uniform(alpha, p, settings.l1_ratio)?;
    let fit = crate::solver::fit_weighted_enet(
        &x_std,
        &y,
        &pen,
        settings.tol,
        settings.max_iter,
        counter,
    )?;
    Ok(fit.selected)
}

/// The policy-free dual-criterion baseline: one episode, frozen zero
/// parameters, uniform penalties at the anchored strength and a fixed
/// retention fraction of 0.25.
pub fn dual_fixed(
    train: &ExpressionDataset,
    base: &EpisodeConfig,
    seed: u64,
) -> Result<crate::episode::FoldRunResult> {
    let cfg = EpisodeConfig {
        episodes: 1,
        learning_rate: 0.0,
        penalty_mode: PenaltyMode::UniformScaled(1.0),
        m_frac_override: Some(0.25),
        seed,
        ..base.clone()
    };
    run_fold(train, &cfg, None)
}

// Selector registrations for the harness.

/// Policy-gradient dual-criterion selector.
#[derive(Default)]
pub struct RlSelector {
    pub config: EpisodeConfig,
    pub prior: Option<std::sync::Arc<InteractionNetwork>>,
    /// Carry the anchoring curve into the detail record.
    pub keep_cv_curve: bool,
}

impl Selector for RlSelector {
    fn name(&self) -> &str {
        "rl"
    }

    fn select(&self, train: &ExpressionDataset, seed: u64) -> Result<Selection> {
        let cfg = EpisodeConfig {
            seed,
            ..self.config.clone()
        };
        let fold = run_fold(train, &cfg, self.prior.as_deref())?;
        let mut detail = crate::report::RlFoldDetail::from_run(&fold);
        if self.keep_cv_curve {
            let alphas =
                crate::solver::cv_alpha_grid(train.matrix(), &train.labels_as_real(), &cfg.enet)?;
            detail.cv_curve = Some(alphas.into_iter().zip(fold.cv_curve.clone()).collect());
        }
        Ok(Selection {
            panel: fold.final_panel,
            fits: (fold.fit_single, fold.fit_cv),
            detail: Some(serde_json::to_value(detail)?),
        })
    }
}

/// Policy-free dual-criterion baseline.
pub struct DualFixedSelector {
    pub config: EpisodeConfig,
}

impl Selector for DualFixedSelector {
    fn name(&self) -> &str {
        "dual"
    }

    fn select(&self, train: &ExpressionDataset, seed: u64) -> Result<Selection> {
        let fold = dual_fixed(train, &self.config, seed)?;
        Ok(Selection {
            panel: fold.final_panel,
            fits: (fold.fit_single, fold.fit_cv),
            detail: None,
        })
    }
}

/// Cross-validated elastic net baseline.
pub struct EnetSelector {
    pub settings: EnetSettings,
}

impl Selector for EnetSelector {
    fn name(&self) -> &str {
        "enet"
    }

    fn select(&self, train: &ExpressionDataset, seed: u64) -> Result<Selection> {
        let counter = FitCounter::new();
        let panel = enet_select(train, &self.settings, seed, &counter)?;
        Ok(Selection {
            panel,
            fits: (counter.single_fits(), counter.cv_fits()),
            detail: None,
        })
    }
}

/// mRMR filter at a fixed gene budget.
pub struct MrmrSelector {
    pub k: usize,
    pub n_bins: usize,
}

impl Selector for MrmrSelector {
    fn name(&self) -> &str {
        "mrmr"
    }

    fn select(&self, train: &ExpressionDataset, _seed: u64) -> Result<Selection> {
        let panel = mrmr(train, self.k.min(train.n_features()), self.n_bins)?;
        Ok(Selection {
            panel,
            fits: (0, 0),
            detail: None,
        })
    }
}

/// Stability-selection baseline.
pub struct StabilitySelector {
    pub config: StabilityConfig,
}

impl Selector for StabilitySelector {
    fn name(&self) -> &str {
        "stability"
    }

    fn select(&self, train: &ExpressionDataset, seed: u64) -> Result<Selection> {
        let counter = FitCounter::new();
        let panel = stability_selection(train, &self.config, seed, &counter)?;
        Ok(Selection {
            panel,
            fits: (counter.single_fits(), counter.cv_fits()),
            detail: None,
        })
    }
}
