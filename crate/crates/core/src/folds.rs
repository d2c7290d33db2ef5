//! Deterministic seeded k-fold plans, optionally stratified on a binary
//! label, plus the per-purpose seed derivation that every randomised
//! component draws from.
//!
//! All randomness in a run flows from one 64-bit seed. Sub-seeds are
//! derived with [`derive_seed`] and a purpose tag from [`purpose`], so
//! that outer folds, per-iteration inner folds, reward splits and
//! subsamples each get an independent, reproducible stream.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Purpose tags for seed derivation. Keeping them distinct guarantees the
/// random streams never alias across components.
pub mod purpose {
    /// Outer cross-validation fold assignment.
    pub const OUTER_FOLDS: u64 = 1;
    /// Regularisation-strength selection inside the anchoring call.
    pub const ANCHOR_CV: u64 = 2;
    /// Inner folds of iteration `t` in episode `e`: tags `[EPISODE, e, t]`.
    pub const EPISODE: u64 = 3;
    /// Reward cross-validation of episode `e`: tags `[REWARD, e]`.
    pub const REWARD: u64 = 4;
    /// Subsample `b` of stability selection: tags `[SUBSAMPLE, b]`.
    pub const SUBSAMPLE: u64 = 5;
    /// Per-outer-fold selector seed: tags `[SELECTOR, fold]`.
    pub const SELECTOR: u64 = 6;
    /// Synthetic data generation.
    pub const SYNTH: u64 = 7;
    /// Retention-parameter perturbation of episode `e`: tags `[PERTURB, e]`.
    pub const PERTURB: u64 = 8;
}

/// Standard normal draw via Box-Muller.
pub fn standard_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a base seed and a list of purpose/index tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(base);
    for &t in tags {
        s = splitmix64(s ^ splitmix64(t));
    }
    s
}

/// A k-fold assignment of samples, reproducible from its seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    assignments: Vec<usize>,
    k: usize,
    seed: u64,
    stratified: bool,
}

impl FoldPlan {
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stratified(&self) -> bool {
        self.stratified
    }

    /// Indices held out by `fold` and the complementary training indices.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Build a deterministic k-fold plan over `labels`.
///
/// Stratified plans shuffle each class separately and deal samples onto a
/// fold cursor shared across classes, which keeps fold sizes equal within
/// one sample and per-fold class counts within one sample of the
/// proportional share. Stratification requires at least 2 samples per
/// class so that every training split still sees both classes.
pub fn make_folds(labels: &[u8], k: usize, seed: u64, stratified: bool) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::Invalid(format!("k must be >= 2, got {}", k)));
    }
    if n < k {
        return Err(Error::Invalid(format!(
            "cannot split {} samples into {} non-empty folds",
            n, k
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::Invalid(format!(
            "labels must be 0 or 1, got {}",
            bad
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; n];

    if stratified {
        for class in [0u8, 1u8] {
            let count = labels.iter().filter(|&&l| l == class).count();
            if count < 2 {
                return Err(Error::Stratification {
                    label: class,
                    count,
                    needed: 2,
                });
            }
        }
        let mut cursor = 0usize;
        for class in [0u8, 1u8] {
            let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            members.shuffle(&mut rng);
            for i in members {
                assignments[i] = cursor % k;
                cursor += 1;
            }
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        for (cursor, i) in order.into_iter().enumerate() {
            assignments[i] = cursor % k;
        }
    }

    Ok(FoldPlan {
        assignments,
        k,
        seed,
        stratified,
    })
}

/// Unstratified fold assignment over `n` unlabeled rows, used for
/// regression-style cross-validation.
pub fn make_plain_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    make_folds(&vec![0u8; n], k, seed, false)
}
