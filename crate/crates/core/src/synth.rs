//! Synthetic datasets with known ground truth: planted linear signals,
//! correlated blocks, and engineered instances of the two selection
//! failure modes (sign-inconsistent features and correlated shadows).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::accumulator::Accumulator;
use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::folds::{derive_seed, make_folds, purpose, standard_normal};
use crate::linalg::standardize_train_apply;
use crate::solver::{EnetProblem, PenaltyVector};
use crate::types::FitCounter;
use crate::{Matrix, Real};

/// Specification of a synthetic dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_samples: usize,
    pub n_features: usize,
    /// (feature index, signed effect size) pairs.
    pub true_support: Vec<(usize, f64)>,
    pub noise_sd: f64,
    /// Feature groups sharing a latent factor at pairwise correlation rho.
    pub correlated_blocks: Vec<(Vec<usize>, f64)>,
    /// Column rebuilt as a half-sample sign-flipped copy of the first
    /// support feature.
    pub flip_feature: Option<usize>,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n_samples < 4 || self.n_features == 0 {
            return Err(Error::Invalid(
                "need at least 4 samples and 1 feature".into(),
            ));
        }
        for &(idx, effect) in &self.true_support {
            if idx >= self.n_features {
                return Err(Error::Invalid(format!(
                    "support index {idx} exceeds feature count"
                )));
            }
            if effect == 0.0 {
                return Err(Error::Invalid("support effects must be nonzero".into()));
            }
        }
        for (block, rho) in &self.correlated_blocks {
            if !(0.0..1.0).contains(rho) {
                return Err(Error::Invalid(format!(
                    "block correlation {rho} outside [0,1)"
                )));
            }
            if block.iter().any(|&i| i >= self.n_features) {
                return Err(Error::Invalid("block index exceeds feature count".into()));
            }
        }
        if let Some(f) = self.flip_feature {
            if f >= self.n_features {
                return Err(Error::Invalid("flip index exceeds feature count".into()));
            }
            if self.true_support.is_empty() {
                return Err(Error::Invalid(
                    "flip feature needs a source support feature".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Ground truth emitted next to every generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
    pub flip_feature: Option<usize>,
    pub shadow_feature: Option<usize>,
    pub seed: u64,
}

fn feature_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j:04}")).collect()
}

fn sample_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i:04}")).collect()
}

/// Base draw: block-correlated standard-normal columns and the latent
/// score before labelling.
fn gen_base(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> (Matrix, Vec<f64>) {
    let n = spec.n_samples;
    let p = spec.n_features;
    let mut x = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x.set(i, j, standard_normal(rng));
        }
    }
    for (block, rho) in &spec.correlated_blocks {
        let load = rho.sqrt();
        let resid = (1.0 - rho).sqrt();
        for i in 0..n {
            let z = standard_normal(rng);
            for &j in block {
                x.set(i, j, load * z + resid * x.get(i, j));
            }
        }
    }
    let latent: Vec<f64> = (0..n)
        .map(|i| {
            spec.true_support
                .iter()
                .map(|&(j, beta)| beta * x.get(i, j))
                .sum::<f64>()
                + spec.noise_sd * standard_normal(rng)
        })
        .collect();
    (x, latent)
}

fn labels_by_median_split(latent: &[f64]) -> Vec<u8> {
    let mut sorted = latent.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n.is_multiple_of(2) {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    };
    latent.iter().map(|&v| (v > median) as u8).collect()
}

fn truth_of(spec: &SynthSpec, shadow: Option<usize>) -> GroundTruth {
    let mut beta = vec![0.0; spec.n_features];
    for &(j, b) in &spec.true_support {
        beta[j] = b;
    }
    let mut support: Vec<usize> = spec.true_support.iter().map(|&(j, _)| j).collect();
    support.sort_unstable();
    GroundTruth {
        beta,
        support,
        flip_feature: spec.flip_feature,
        shadow_feature: shadow,
        seed: spec.seed,
    }
}

/// Planted linear signal: block-correlated normal columns, latent score
/// `X beta + noise`, labels by median split of the latent score (which
/// guarantees class balance).
pub fn gen_linear(spec: &SynthSpec) -> Result<(ExpressionDataset, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[purpose::SYNTH]));
    let (x, latent) = gen_base(spec, &mut rng);
    let labels = labels_by_median_split(&latent);
    let ds = ExpressionDataset::new(
        x,
        labels,
        feature_names(spec.n_features),
        sample_ids(spec.n_samples),
    )?;
    Ok((ds, truth_of(spec, None)))
}

/// Sign-inconsistent instance: the flip column carries the first support
/// feature's values with the sign flipped on a random half of the
/// samples, plus small noise. Pooled over any balanced subsample its
/// association cancels, so fitted coefficients fluctuate around zero in
/// sign while the column keeps entering fits at weak regularisation.
pub fn gen_sign_inconsistent(spec: &SynthSpec) -> Result<(ExpressionDataset, usize)> {
    spec.validate()?;
    let flip = spec
        .flip_feature
        .ok_or_else(|| Error::Invalid("flip_feature must be set".into()))?;
    let src = spec.true_support[0].0;
    if flip == src {
        return Err(Error::Invalid(
            "flip feature cannot be its own source".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[purpose::SYNTH]));
    let (mut x, latent) = gen_base(spec, &mut rng);
    let n = spec.n_samples;
    let mut signs = vec![1.0; n];
    for s in signs.iter_mut().skip(n / 2) {
        *s = -1.0;
    }
    signs.shuffle(&mut rng);
    for (i, &sign) in signs.iter().enumerate() {
        let v = sign * x.get(i, src) + 0.05 * standard_normal(&mut rng);
        x.set(i, flip, v);
    }
    let labels = labels_by_median_split(&latent);
    let ds = ExpressionDataset::new(x, labels, feature_names(spec.n_features), sample_ids(n))?;
    Ok((ds, flip))
}

/// Correlated-shadow instance: the first correlated block must pair one
/// support feature with one non-support feature at high correlation; the
/// non-support member is the shadow. Under an L1 fit the twin usually
/// displaces it, so the shadow is selected rarely but with a consistent
/// sign.
pub fn gen_correlated_shadow(spec: &SynthSpec) -> Result<(ExpressionDataset, usize)> {
    spec.validate()?;
    let support: Vec<usize> = spec.true_support.iter().map(|&(j, _)| j).collect();
    let (block, rho) = spec
        .correlated_blocks
        .first()
        .ok_or_else(|| Error::Invalid("shadow instance needs a correlated block".into()))?;
    if *rho < 0.95 {
        return Err(Error::Invalid(format!(
            "shadow block correlation must be >= 0.95, got {rho}"
        )));
    }
    if block.len() != 2 {
        return Err(Error::Invalid(
            "shadow block must have exactly 2 members".into(),
        ));
    }
    let in_support: Vec<bool> = block.iter().map(|j| support.contains(j)).collect();
    let shadow = match (in_support[0], in_support[1]) {
        (true, false) => block[1],
        (false, true) => block[0],
        _ => {
            return Err(Error::Invalid(
                "shadow block must pair one support feature with one non-support feature".into(),
            ))
        }
    };
    let (ds, _) = gen_linear(spec)?;
    Ok((ds, shadow))
}

/// Absorb `iterations * k` fold-fits at fixed uniform penalties over
/// independently reshuffled stratified splits; the Monte Carlo driver
/// behind the failure-mode checks.
pub fn accumulate_uniform_fits(
    ds: &ExpressionDataset,
    alpha: Real,
    l1_ratio: Real,
    iterations: usize,
    k: usize,
    seed: u64,
) -> Result<Accumulator<Real>> {
    let p = ds.n_features();
    let y = ds.labels_as_real();
    let pen = PenaltyVector::uniform(alpha, p, l1_ratio)?;
    let counter = FitCounter::new();
    let mut acc = Accumulator::new(p);
    for it in 0..iterations {
        let plan = make_folds(
            ds.labels(),
            k,
            derive_seed(seed, &[purpose::SYNTH, it as u64]),
            true,
        )?;
        for fold in 0..k {
            let (tr, _) = plan.split(fold);
            let xtr = ds.matrix().select_rows(&tr);
            let (xtr_s, _, _, _) = standardize_train_apply(&xtr, &Matrix::zeros(0, p))?;
            let ytr: Vec<Real> = tr.iter().map(|&i| y[i]).collect();
            let prob = EnetProblem::new(&xtr_s, &ytr)?;
            let fit = prob.solve(&pen, 1e-4, 1000, None, &counter)?;
            acc.absorb_fit(&fit)?;
        }
    }
    Ok(acc)
}

/// Reference strength for the failure-mode Monte Carlos: a fraction of
/// the smallest fully-shrinking penalty of the standardized data. Small
/// fractions put every feature in the frequently-selected regime; larger
/// ones put correlated twins in the displacement regime.
pub fn scaled_alpha_max(ds: &ExpressionDataset, l1_ratio: Real, fraction: Real) -> Result<Real> {
    let p = ds.n_features();
    let (x_std, _, _, _) = standardize_train_apply(ds.matrix(), &Matrix::zeros(0, p))?;
    let grid = crate::solver::make_alpha_grid(&x_std, &ds.labels_as_real(), 1, 0.5, l1_ratio)?;
    Ok(grid.alpha_max() * fraction)
}

/// The stock sign-inconsistent instance used by the failure-mode checks:
/// three planted effects, a near-duplicate of the first support feature
/// as a control, and the flipped copy.
pub fn sign_inconsistent_instance(seed: u64) -> SynthSpec {
    SynthSpec {
        n_samples: 200,
        n_features: 12,
        true_support: vec![(0, 1.0), (1, 1.0), (2, 0.8)],
        noise_sd: 0.3,
        correlated_blocks: vec![(vec![0, 3], 0.999)],
        flip_feature: Some(4),
        seed,
    }
}

/// The stock correlated-shadow instance: the twin of feature 0 sits at
/// index 3 and carries no effect of its own. Displacement needs the
/// penalty margin lambda * (1 - rho) to clear the sampling noise of the
/// partial correlation, hence the larger sample count.
pub fn shadow_instance(seed: u64) -> SynthSpec {
    SynthSpec {
        n_samples: 400,
        n_features: 12,
        true_support: vec![(0, 1.5), (1, 1.0), (2, 0.8)],
        noise_sd: 0.5,
        correlated_blocks: vec![(vec![0, 3], 0.95)],
        flip_feature: None,
        seed,
    }
}
