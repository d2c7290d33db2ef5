//! L2-regularised logistic regression and ROC-AUC, the shared evaluation
//! stack for rewards and nested-CV benchmarking.
//!
//! The logistic fit uses Newton steps with a Cholesky solve and falls back
//! to damped gradient steps when the Hessian is ill-conditioned. Panels
//! are small, so second order is cheap and robust. The intercept is never
//! penalised.

use crate::dataset::ExpressionDataset;
use crate::error::{Error, Result};
use crate::folds::make_folds;
use crate::linalg::{standardize_train_apply, Matrix};
use crate::num::{sigmoid, Scalar};

/// Fitted logistic model. `converged` is advisory: a non-converged model
/// is returned flagged and the caller decides.
#[derive(Debug, Clone)]
pub struct LogisticModel<S> {
    pub weights: Vec<S>,
    pub intercept: S,
    pub l2_strength: S,
    pub converged: bool,
    pub n_iterations: usize,
}

impl<S: Scalar> LogisticModel<S> {
    /// Linear scores; monotone in predicted probability.
    pub fn decision_scores(&self, x: &Matrix<S>) -> Vec<S> {
        (0..x.n_rows())
            .map(|i| {
                let row = x.row(i);
                let mut z = self.intercept;
                for (w, v) in self.weights.iter().zip(row) {
                    z = z + *w * *v;
                }
                z
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &Matrix<S>) -> Vec<S> {
        self.decision_scores(x).into_iter().map(sigmoid).collect()
    }
}

/// Penalised negative log-likelihood: sum of per-sample NLL plus
/// (l2/2)*||w||^2, intercept excluded from the penalty.
pub fn logistic_loss<S: Scalar>(x: &Matrix<S>, y: &[u8], weights: &[S], intercept: S, l2: S) -> S {
    let mut loss = S::zero();
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let mut z = intercept;
        for (w, v) in weights.iter().zip(row) {
            z = z + *w * *v;
        }
        // -log sigma(z) = ln(1 + e^-z), stable on both tails
        let nll = if y[i] == 1 {
            if z > S::zero() {
                (S::one() + (-z).exp()).ln()
            } else {
                -z + (S::one() + z.exp()).ln()
            }
        } else if z > S::zero() {
            z + (S::one() + (-z).exp()).ln()
        } else {
            (S::one() + z.exp()).ln()
        };
        loss = loss + nll;
    }
    let half = S::of_f64(0.5);
    let sq = weights.iter().map(|&w| w * w).sum::<S>();
    loss + half * l2 * sq
}

/// Gradient of the penalised loss over (weights, intercept).
pub fn logistic_gradient<S: Scalar>(
    x: &Matrix<S>,
    y: &[u8],
    weights: &[S],
    intercept: S,
    l2: S,
) -> (Vec<S>, S) {
    let d = x.n_cols();
    let mut gw = vec![S::zero(); d];
    let mut gb = S::zero();
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let mut z = intercept;
        for (w, v) in weights.iter().zip(row) {
            z = z + *w * *v;
        }
        let err = sigmoid(z) - S::of_usize(y[i] as usize);
        for (g, v) in gw.iter_mut().zip(row) {
            *g = *g + err * *v;
        }
        gb = gb + err;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g + l2 * *w;
    }
    (gw, gb)
}

/// Cholesky solve of `a x = b` for a symmetric positive-definite `a`
/// stored dense row-major. Returns None when a pivot collapses.
fn cholesky_solve<S: Scalar>(a: &mut [Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag = diag - a[j][k] * a[j][k];
        }
        if diag <= S::zero() || !diag.is_finite() {
            return None;
        }
        let root = diag.sqrt();
        a[j][j] = root;
        for i in j + 1..n {
            let mut v = a[i][j];
            for k in 0..j {
                v = v - a[i][k] * a[j][k];
            }
            a[i][j] = v / root;
        }
    }
    // forward then back substitution
    let mut y = vec![S::zero(); n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v = v - a[i][k] * y[k];
        }
        y[i] = v / a[i][i];
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in i + 1..n {
            v = v - a[k][i] * x[k];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}

/// Fit an L2-penalised logistic regression on standardized features.
pub fn fit_logreg<S: Scalar>(
    x: &Matrix<S>,
    y: &[u8],
    l2_strength: S,
    tol: S,
    max_iter: usize,
) -> Result<LogisticModel<S>> {
    let n = x.n_rows();
    let d = x.n_cols();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "y has {} entries, X has {} rows",
            y.len(),
            n
        )));
    }
    let ones = y.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(Error::SingleClass);
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("logistic design matrix".into()));
    }

    let mut w = vec![S::zero(); d];
    let mut b = S::zero();
    let mut loss = logistic_loss(x, y, &w, b, l2_strength);
    let mut converged = false;
    let mut iters = 0usize;

    for _ in 0..max_iter {
        iters += 1;
        let (gw, gb) = logistic_gradient(x, y, &w, b, l2_strength);
        let gmax = gw
            .iter()
            .chain(std::iter::once(&gb))
            .fold(S::zero(), |m, g| m.max(g.abs()));
        if gmax < tol {
            converged = true;
            break;
        }

        // Newton system over (w, b): H = [X'WX + l2 I, X'W1; ., sum W]
        let m = d + 1;
        let mut h = vec![vec![S::zero(); m]; m];
        for i in 0..n {
            let row = x.row(i);
            let mut z = b;
            for (wj, v) in w.iter().zip(row) {
                z = z + *wj * *v;
            }
            let p = sigmoid(z);
            let wt = p * (S::one() - p);
            for j in 0..d {
                let xj = row[j] * wt;
                for k in 0..=j {
                    h[j][k] = h[j][k] + xj * row[k];
                }
                h[j][d] = h[j][d] + xj;
            }
            h[d][d] = h[d][d] + wt;
        }
        for j in 0..d {
            h[j][j] = h[j][j] + l2_strength;
            for k in 0..j {
                h[k][j] = h[j][k];
            }
            h[d][j] = h[j][d];
        }
        for j in 0..d {
            h[j][d] = h[d][j];
        }

        let mut grad = gw.clone();
        grad.push(gb);
        let step = cholesky_solve(&mut h, &grad);

        let (dir_w, dir_b): (Vec<S>, S) = match step {
            Some(s) => {
                let (sw, sb) = s.split_at(d);
                (sw.to_vec(), sb[0])
            }
            None => {
                // ill-conditioned Hessian: fall back to the raw gradient
                let scale = S::one() / (S::one() + gmax);
                (
                    gw.iter().map(|&g| g * scale).collect(),
                    gb / (S::one() + gmax),
                )
            }
        };

        // backtracking so the penalised loss never increases
        let mut t = S::one();
        let mut accepted = false;
        for _ in 0..40 {
            let cand_w: Vec<S> = w.iter().zip(&dir_w).map(|(wi, di)| *wi - t * *di).collect();
            let cand_b = b - t * dir_b;
            let cand_loss = logistic_loss(x, y, &cand_w, cand_b, l2_strength);
            if cand_loss <= loss {
                w = cand_w;
                b = cand_b;
                loss = cand_loss;
                accepted = true;
                break;
            }
            t = t * S::of_f64(0.5);
        }
        if !accepted {
            break; // no descent direction left at this precision
        }
    }

    Ok(LogisticModel {
        weights: w,
        intercept: b,
        l2_strength,
        converged,
        n_iterations: iters,
    })
}

/// ROC-AUC as normalised pairwise concordance, ties counting one half.
///
/// Computed by exact pair counting so the value equals the brute-force
/// Mann-Whitney statistic bit for bit.
pub fn roc_auc<S: Scalar>(scores: &[S], labels: &[u8]) -> Result<S> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("classifier scores".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    let mut concordant = 0u64;
    let mut tied = 0u64;
    let mut neg_below = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let mut pos_here = 0u64;
        let mut neg_here = 0u64;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                pos_here += 1;
            } else {
                neg_here += 1;
            }
            j += 1;
        }
        concordant += pos_here * neg_below;
        tied += pos_here * neg_here;
        neg_below += neg_here;
        i = j;
    }

    let num = S::of_f64(concordant as f64) + S::of_f64(0.5) * S::of_f64(tied as f64);
    Ok(num / S::of_f64((n_pos * n_neg) as f64))
}

/// Mean out-of-fold AUC of a logistic model trained on `panel` columns
/// under a stratified k-fold split.
pub fn panel_cv_auc(
    dataset: &ExpressionDataset,
    panel: &[usize],
    k: usize,
    seed: u64,
    l2_strength: f64,
) -> Result<f64> {
    if panel.is_empty() {
        return Err(Error::Invalid("panel must be non-empty".into()));
    }
    dataset.validate_for_selection()?;
    let plan = make_folds(dataset.labels(), k, seed, true)?;
    let x_panel = dataset.matrix().select_cols(panel);
    let mut total = 0.0;
    for fold in 0..k {
        let (tr, te) = plan.split(fold);
        let xtr = x_panel.select_rows(&tr);
        let xte = x_panel.select_rows(&te);
        let (xtr_s, xte_s, _, _) = standardize_train_apply(&xtr, &xte)?;
        let ytr: Vec<u8> = tr.iter().map(|&i| dataset.labels()[i]).collect();
        let yte: Vec<u8> = te.iter().map(|&i| dataset.labels()[i]).collect();
        let model = fit_logreg(&xtr_s, &ytr, l2_strength, 1e-8, 100)?;
        let scores = model.decision_scores(&xte_s);
        total += roc_auc(&scores, &yte)?;
    }
    Ok(total / k as f64)
}
