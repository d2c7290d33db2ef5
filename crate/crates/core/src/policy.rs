//! Five-parameter selection policy: per-gene penalty scores, the
//! retention fraction, the score-function gradient under an
//! independent-Bernoulli exclusion model, and the baseline-corrected
//! update rule.
//!
//! The fifth parameter steers the retention fraction rather than a state
//! feature. By default it still receives a score-function gradient
//! through a constant bias entry appended to every gene's state vector;
//! a Gaussian-perturbation estimator is available as an alternative
//! route (see the episode driver). Both are design choices of this
//! implementation, switchable in configuration.

use serde::{Deserialize, Serialize};

use crate::accumulator::StateFeatures;
use crate::error::Result;
use crate::num::{sigmoid, Scalar};
use crate::solver::PenaltyVector;

/// Number of policy parameters.
pub const THETA_DIM: usize = 5;

/// Clip bounds for the retention parameter.
pub const THETA5_CLIP: (f64, f64) = (-4.0, 4.0);

/// Policy parameters plus the moving reward baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams<S> {
    pub theta: [S; THETA_DIM],
    pub baseline: S,
}

impl<S: Scalar> Default for PolicyParams<S> {
    fn default() -> Self {
        PolicyParams {
            theta: [S::zero(); THETA_DIM],
            baseline: S::zero(),
        }
    }
}

/// A gene's state vector: the four bounded accumulation features plus a
/// constant bias slot. The bias entry is 1 when the fifth parameter takes
/// its gradient through the score and 0 otherwise.
pub fn state_vector<S: Scalar>(features: &StateFeatures<S>, bias: S) -> [S; THETA_DIM] {
    [
        features.p_hat,
        features.mu_abs,
        features.n_net,
        features.d_cosel,
        bias,
    ]
}

/// Policy score z = theta . s.
pub fn policy_score<S: Scalar>(state: &[S; THETA_DIM], theta: &[S; THETA_DIM]) -> S {
    let mut z = S::zero();
    for (t, s) in theta.iter().zip(state) {
        z = z + *t * *s;
    }
    z
}

/// Per-gene penalties lambda_i = alpha * sigmoid(z_i); every entry lies
/// strictly inside (0, alpha).
pub fn gene_penalties<S: Scalar>(alpha: S, scores: &[S], l1_ratio: S) -> Result<PenaltyVector<S>> {
    let per_feature = scores.iter().map(|&z| alpha * sigmoid(z)).collect();
    PenaltyVector::new(per_feature, l1_ratio)
}

/// Retention fraction 0.25 + 0.65 * sigmoid(theta5), mapping the clipped
/// parameter range into a pool width between a quarter and nine tenths.
pub fn m_frac<S: Scalar>(theta5: S) -> S {
    S::of_f64(0.25) + S::of_f64(0.65) * sigmoid(theta5)
}

/// Score-function gradient of the independent-Bernoulli exclusion model:
/// sum_i (1[i not selected] - sigmoid(z_i)) * s_i.
pub fn grad_log_prob<S: Scalar>(
    selected: &[bool],
    scores: &[S],
    state_vectors: &[[S; THETA_DIM]],
) -> [S; THETA_DIM] {
    debug_assert_eq!(selected.len(), scores.len());
    debug_assert_eq!(selected.len(), state_vectors.len());
    let mut g = [S::zero(); THETA_DIM];
    for ((&is_sel, &z), s) in selected.iter().zip(scores).zip(state_vectors) {
        let outcome = if is_sel { S::zero() } else { S::one() };
        let coef = outcome - sigmoid(z);
        for (gk, sk) in g.iter_mut().zip(s) {
            *gk = *gk + coef * *sk;
        }
    }
    g
}

/// Accumulates per-iteration gradient terms and normalises the total by
/// `p * (T - 1)` so the update magnitude is comparable across datasets of
/// different width and episodes of different length.
#[derive(Debug, Clone, Default)]
pub struct GradientAccumulator<S> {
    g: [S; THETA_DIM],
    terms_absorbed: usize,
}

impl<S: Scalar> GradientAccumulator<S> {
    pub fn new() -> Self {
        GradientAccumulator {
            g: [S::zero(); THETA_DIM],
            terms_absorbed: 0,
        }
    }

    pub fn add(&mut self, term: &[S; THETA_DIM]) {
        for (acc, t) in self.g.iter_mut().zip(term) {
            *acc = *acc + *t;
        }
        self.terms_absorbed += 1;
    }

    pub fn terms_absorbed(&self) -> usize {
        self.terms_absorbed
    }

    /// Normalised gradient; `iterations_total` counts the warmup, so the
    /// divisor is `p * (iterations_total - 1)`.
    pub fn normalized(&self, n_features: usize, iterations_total: usize) -> [S; THETA_DIM] {
        let denom = S::of_usize(n_features * iterations_total.saturating_sub(1).max(1));
        let mut out = [S::zero(); THETA_DIM];
        for (o, g) in out.iter_mut().zip(&self.g) {
            *o = *g / denom;
        }
        out
    }
}

/// One policy update: the baseline moves first (exponential average of
/// rewards), then the parameters step along the advantage-weighted
/// gradient, and the retention parameter is clipped.
pub fn update_policy<S: Scalar>(
    params: &mut PolicyParams<S>,
    grad: &[S; THETA_DIM],
    reward: S,
    learning_rate: S,
    baseline_decay: S,
) {
    params.baseline = baseline_decay * params.baseline + (S::one() - baseline_decay) * reward;
    let advantage = reward - params.baseline;
    for (t, g) in params.theta.iter_mut().zip(grad) {
        *t = *t + learning_rate * advantage * *g;
    }
    let (lo, hi) = THETA5_CLIP;
    params.theta[4] = params.theta[4].max(S::of_f64(lo)).min(S::of_f64(hi));
}
