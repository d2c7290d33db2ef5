//! Weighted elastic-net regression by cyclic coordinate descent.
//!
//! Minimises, over coefficients `b` with the intercept handled by
//! centering,
//!
//! ```text
//! (1/2n) * ||y - X b - b0||^2  +  sum_j lambda_j * ( r*|b_j| + ((1-r)/2)*b_j^2 )
//! ```
//!
//! where `r` is the l1 ratio and `lambda_j` is a per-feature penalty. A
//! uniform penalty vector at strength `alpha` reproduces the standard
//! elastic net. The module also builds geometric regularisation grids and
//! selects the strength by k-fold cross-validation with warm starts along
//! the descending path.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::folds::make_plain_folds;
use crate::linalg::{standardize_train_apply, Matrix};
use crate::num::Scalar;
use crate::types::{FitCounter, FitResult};

/// Per-feature penalty strengths plus the shared l1 mixing ratio.
#[derive(Debug, Clone)]
pub struct PenaltyVector<S> {
    per_feature: Vec<S>,
    l1_ratio: S,
}

impl<S: Scalar> PenaltyVector<S> {
    pub fn new(per_feature: Vec<S>, l1_ratio: S) -> Result<Self> {
        if l1_ratio <= S::zero() || l1_ratio > S::one() {
            return Err(Error::Invalid(format!(
                "l1_ratio must lie in (0, 1], got {}",
                l1_ratio
            )));
        }
        if per_feature.iter().any(|l| !l.is_finite() || *l < S::zero()) {
            return Err(Error::Invalid(
                "penalties must be finite and non-negative".into(),
            ));
        }
        Ok(PenaltyVector {
            per_feature,
            l1_ratio,
        })
    }

    /// Uniform penalties at strength `alpha`, the unweighted special case.
    pub fn uniform(alpha: S, n_features: usize, l1_ratio: S) -> Result<Self> {
        Self::new(vec![alpha; n_features], l1_ratio)
    }

    pub fn per_feature(&self) -> &[S] {
        &self.per_feature
    }

    pub fn l1_ratio(&self) -> S {
        self.l1_ratio
    }

    pub fn len(&self) -> usize {
        self.per_feature.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_feature.is_empty()
    }
}

/// Solver settings shared by the fit, grid and cross-validation paths.
#[derive(Debug, Clone)]
pub struct EnetSettings {
    pub l1_ratio: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub n_alphas: usize,
    pub eps_ratio: f64,
}

impl Default for EnetSettings {
    fn default() -> Self {
        EnetSettings {
            l1_ratio: 0.5,
            tol: 1e-4,
            max_iter: 1000,
            n_alphas: 100,
            eps_ratio: 1e-3,
        }
    }
}

/// Sign(x) * max(|x| - t, 0).
#[inline]
pub fn soft_threshold<S: Scalar>(x: S, t: S) -> S {
    debug_assert!(t >= S::zero());
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        S::zero()
    }
}

/// A regression problem prepared for repeated penalised fits: columns are
/// centered once so regularisation paths and subsample loops avoid
/// re-doing the O(np) setup per fit.
pub struct EnetProblem<S> {
    cols: Vec<Vec<S>>,
    col_mean: Vec<S>,
    /// Per-column mean of squares after centering, (1/n) sum x^2.
    col_sq: Vec<S>,
    y_centered: Vec<S>,
    y_mean: S,
    n: usize,
    p: usize,
}

impl<S: Scalar> EnetProblem<S> {
    pub fn new(x: &Matrix<S>, y: &[S]) -> Result<Self> {
        let n = x.n_rows();
        let p = x.n_cols();
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "y has {} entries, X has {} rows",
                y.len(),
                n
            )));
        }
        if n == 0 || p == 0 {
            return Err(Error::Invalid("empty design matrix".into()));
        }
        if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("regression input".into()));
        }
        let n_s = S::of_usize(n);
        let mut cols = x.columns();
        let mut col_mean = Vec::with_capacity(p);
        let mut col_sq = Vec::with_capacity(p);
        for col in cols.iter_mut() {
            let mu = col.iter().copied().sum::<S>() / n_s;
            let mut sq = S::zero();
            for v in col.iter_mut() {
                *v = *v - mu;
                sq = sq + *v * *v;
            }
            col_mean.push(mu);
            col_sq.push(sq / n_s);
        }
        let y_mean = y.iter().copied().sum::<S>() / n_s;
        let y_centered = y.iter().map(|&v| v - y_mean).collect();
        Ok(EnetProblem {
            cols,
            col_mean,
            col_sq,
            y_centered,
            y_mean,
            n,
            p,
        })
    }

    pub fn n_features(&self) -> usize {
        self.p
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// Penalised objective at `beta`, given the maintained residual;
    /// drives the per-sweep descent assertion in debug builds.
    #[cfg(debug_assertions)]
    fn objective(&self, residual: &[S], beta: &[S], pen: &PenaltyVector<S>) -> S {
        let n_s = S::of_usize(self.n);
        let half = S::of_f64(0.5);
        let rss = residual.iter().map(|&r| r * r).sum::<S>();
        let l1r = pen.l1_ratio();
        let l2r = S::one() - l1r;
        let mut penalty = S::zero();
        for (b, &lam) in beta.iter().zip(pen.per_feature()) {
            penalty = penalty + lam * (l1r * b.abs() + half * l2r * *b * *b);
        }
        half * rss / n_s + penalty
    }

    /// One pass of coordinate updates over `coords`; returns the largest
    /// absolute coefficient change.
    fn sweep(
        &self,
        coords: &[usize],
        beta: &mut [S],
        residual: &mut [S],
        pen: &PenaltyVector<S>,
    ) -> S {
        let n_s = S::of_usize(self.n);
        let l1r = pen.l1_ratio();
        let l2r = S::one() - l1r;
        let lambdas = pen.per_feature();
        let mut max_delta = S::zero();
        for &j in coords {
            let v = self.col_sq[j];
            if v == S::zero() {
                continue; // constant column stays out of the model
            }
            let col = &self.cols[j];
            let old = beta[j];
            let mut dot = S::zero();
            for (c, r) in col.iter().zip(residual.iter()) {
                dot = dot + *c * *r;
            }
            let rho = dot / n_s + v * old;
            let lam = lambdas[j];
            let new = soft_threshold(rho, lam * l1r) / (v + lam * l2r);
            if new != old {
                let delta = new - old;
                for (r, c) in residual.iter_mut().zip(col.iter()) {
                    *r = *r - delta * *c;
                }
                beta[j] = new;
                let mag = delta.abs();
                if mag > max_delta {
                    max_delta = mag;
                }
            }
        }
        max_delta
    }

    /// Solve at one penalty vector, optionally warm-started. Counts one
    /// single fit.
    pub fn solve(
        &self,
        pen: &PenaltyVector<S>,
        tol: S,
        max_iter: usize,
        warm: Option<&[S]>,
        counter: &FitCounter,
    ) -> Result<FitResult<S>> {
        if pen.len() != self.p {
            return Err(Error::Dimension(format!(
                "penalty vector has {} entries, X has {} columns",
                pen.len(),
                self.p
            )));
        }
        let mut beta = match warm {
            Some(w) if w.len() == self.p => w.to_vec(),
            Some(w) => {
                return Err(Error::Dimension(format!(
                    "warm start has {} entries, X has {} columns",
                    w.len(),
                    self.p
                )))
            }
            None => vec![S::zero(); self.p],
        };
        let mut residual = self.y_centered.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != S::zero() {
                for (r, c) in residual.iter_mut().zip(self.cols[j].iter()) {
                    *r = *r - b * *c;
                }
            }
        }

        let all: Vec<usize> = (0..self.p).collect();
        let mut sweeps = 0usize;
        let mut converged = false;

        #[cfg(debug_assertions)]
        let mut prev_obj = self.objective(&residual, &beta, pen);

        while sweeps < max_iter {
            let delta = self.sweep(&all, &mut beta, &mut residual, pen);
            sweeps += 1;

            #[cfg(debug_assertions)]
            {
                let obj = self.objective(&residual, &beta, pen);
                debug_assert!(
                    obj <= prev_obj + S::of_f64(1e-10) * (S::one() + prev_obj.abs()),
                    "objective increased across a sweep: {} -> {}",
                    prev_obj,
                    obj
                );
                prev_obj = obj;
            }

            if delta < tol {
                converged = true;
                break;
            }
            // refine the active set before the next full pass
            loop {
                if sweeps >= max_iter {
                    break;
                }
                let active: Vec<usize> = beta
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b != S::zero())
                    .map(|(j, _)| j)
                    .collect();
                if active.is_empty() {
                    break;
                }
                let d = self.sweep(&active, &mut beta, &mut residual, pen);
                sweeps += 1;
                if d < tol {
                    break;
                }
            }
        }

        let mut intercept = self.y_mean;
        for (b, &mu) in beta.iter().zip(&self.col_mean) {
            intercept = intercept - *b * mu;
        }
        counter.add_single(1);
        Ok(FitResult::new(beta, intercept, sweeps, converged))
    }
}

/// Fit a weighted elastic net at one penalty vector.
pub fn fit_weighted_enet<S: Scalar>(
    x: &Matrix<S>,
    y: &[S],
    pen: &PenaltyVector<S>,
    tol: S,
    max_iter: usize,
    counter: &FitCounter,
) -> Result<FitResult<S>> {
    EnetProblem::new(x, y)?.solve(pen, tol, max_iter, None, counter)
}

/// Maximum violations of the stationarity conditions at a solution.
#[derive(Debug, Clone, Copy)]
pub struct KktCheck<S> {
    /// Active coordinates: |grad_j + lam*r*sign(b_j) + lam*(1-r)*b_j|.
    pub max_active: S,
    /// Inactive coordinates: max(0, |grad_j| - lam*r).
    pub max_inactive: S,
}

/// Evaluate the subgradient optimality conditions for a fit.
pub fn kkt_check<S: Scalar>(
    x: &Matrix<S>,
    y: &[S],
    fit: &FitResult<S>,
    pen: &PenaltyVector<S>,
) -> Result<KktCheck<S>> {
    let prob = EnetProblem::new(x, y)?;
    let n_s = S::of_usize(prob.n);
    let mut residual = prob.y_centered.clone();
    for (j, &b) in fit.coefficients.iter().enumerate() {
        if b != S::zero() {
            for (r, c) in residual.iter_mut().zip(prob.cols[j].iter()) {
                *r = *r - b * *c;
            }
        }
    }
    let l1r = pen.l1_ratio();
    let l2r = S::one() - l1r;
    let mut max_active = S::zero();
    let mut max_inactive = S::zero();
    for j in 0..prob.p {
        if prob.col_sq[j] == S::zero() {
            continue;
        }
        let mut dot = S::zero();
        for (c, r) in prob.cols[j].iter().zip(residual.iter()) {
            dot = dot + *c * *r;
        }
        let grad = -dot / n_s;
        let lam = pen.per_feature()[j];
        let b = fit.coefficients[j];
        if b != S::zero() {
            let v = (grad + lam * l1r * b.signum() + lam * l2r * b).abs();
            if v > max_active {
                max_active = v;
            }
        } else {
            let v = grad.abs() - lam * l1r;
            if v > max_inactive {
                max_inactive = v;
            }
        }
    }
    Ok(KktCheck {
        max_active,
        max_inactive,
    })
}

/// Geometrically spaced regularisation strengths, strongest first.
#[derive(Debug, Clone)]
pub struct AlphaGrid<S> {
    values: Vec<S>,
    alpha_max: S,
    eps_ratio: S,
}

impl<S: Scalar> AlphaGrid<S> {
    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn alpha_max(&self) -> S {
        self.alpha_max
    }

    pub fn eps_ratio(&self) -> S {
        self.eps_ratio
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Build the grid from data: the top value is the smallest strength at
/// which the fitted model is exactly zero, `max_j |x_j . (y - mean(y))| /
/// (n * l1_ratio)`.
pub fn make_alpha_grid<S: Scalar>(
    x: &Matrix<S>,
    y: &[S],
    n_alphas: usize,
    eps_ratio: S,
    l1_ratio: S,
) -> Result<AlphaGrid<S>> {
    if l1_ratio <= S::zero() || l1_ratio > S::one() {
        return Err(Error::Invalid(format!(
            "l1_ratio must lie in (0, 1], got {}",
            l1_ratio
        )));
    }
    if n_alphas < 1 {
        return Err(Error::Invalid("n_alphas must be >= 1".into()));
    }
    if eps_ratio <= S::zero() || eps_ratio >= S::one() {
        return Err(Error::Invalid(format!(
            "eps_ratio must lie in (0, 1), got {}",
            eps_ratio
        )));
    }
    let prob = EnetProblem::new(x, y)?;
    let n_s = S::of_usize(prob.n);
    let mut max_dot = S::zero();
    for col in &prob.cols {
        let mut dot = S::zero();
        for (c, r) in col.iter().zip(prob.y_centered.iter()) {
            dot = dot + *c * *r;
        }
        let mag = dot.abs();
        if mag > max_dot {
            max_dot = mag;
        }
    }
    let alpha_max = max_dot / (n_s * l1_ratio);
    if alpha_max == S::zero() {
        return Err(Error::Invalid(
            "all-zero design or response, no usable regularisation grid".into(),
        ));
    }
    let values = if n_alphas == 1 {
        vec![alpha_max]
    } else {
        let step = eps_ratio.ln() / S::of_usize(n_alphas - 1);
        (0..n_alphas)
            .map(|i| alpha_max * (step * S::of_usize(i)).exp())
            .collect()
    };
    Ok(AlphaGrid {
        values,
        alpha_max,
        eps_ratio,
    })
}

/// The grid a cross-validated selection walks for this data, built on the
/// fully standardized matrix; exposed so curve dumps can pair mean MSE
/// values with their strengths.
pub fn cv_alpha_grid<S: Scalar>(x: &Matrix<S>, y: &[S], settings: &EnetSettings) -> Result<Vec<S>> {
    let (x_std, _, _, _) = standardize_train_apply(x, &Matrix::zeros(0, x.n_cols()))?;
    let grid = make_alpha_grid(
        &x_std,
        y,
        settings.n_alphas,
        S::of_f64(settings.eps_ratio),
        S::of_f64(settings.l1_ratio),
    )?;
    Ok(grid.values().to_vec())
}

/// Select the strength minimising mean validation MSE over a k-fold split,
/// warm-starting along the descending grid. Ties prefer the larger
/// (sparser) alpha. Counts `k_cv * n_alphas` cross-validation fits.
pub fn cv_select_alpha<S: Scalar>(
    x: &Matrix<S>,
    y: &[S],
    k_cv: usize,
    settings: &EnetSettings,
    seed: u64,
    counter: &FitCounter,
) -> Result<(S, Vec<S>)> {
    if k_cv < 2 {
        return Err(Error::Invalid("k_cv must be >= 2".into()));
    }
    let n = x.n_rows();
    let (x_std, _, _, _) = standardize_train_apply(x, &Matrix::zeros(0, x.n_cols()))?;
    let grid = make_alpha_grid(
        &x_std,
        y,
        settings.n_alphas,
        S::of_f64(settings.eps_ratio),
        S::of_f64(settings.l1_ratio),
    )?;
    let plan = make_plain_folds(n, k_cv, seed)?;

    let fold_curves: Vec<Result<Vec<S>>> = (0..k_cv)
        .into_par_iter()
        .map(|fold| {
            let (tr, va) = plan.split(fold);
            if tr.len() < 2 {
                return Err(Error::Invalid(format!(
                    "fold {} training split too small to fit",
                    fold
                )));
            }
            let xtr = x.select_rows(&tr);
            let xva = x.select_rows(&va);
            let (xtr_s, xva_s, _, _) = standardize_train_apply(&xtr, &xva)?;
            let ytr: Vec<S> = tr.iter().map(|&i| y[i]).collect();
            let yva: Vec<S> = va.iter().map(|&i| y[i]).collect();
            let prob = EnetProblem::new(&xtr_s, &ytr)?;
            let scratch = FitCounter::new();
            let mut warm: Option<Vec<S>> = None;
            let mut mses = Vec::with_capacity(grid.len());
            for &alpha in grid.values() {
                let pen = PenaltyVector::uniform(alpha, x.n_cols(), S::of_f64(settings.l1_ratio))?;
                let fit = prob.solve(
                    &pen,
                    S::of_f64(settings.tol),
                    settings.max_iter,
                    warm.as_deref(),
                    &scratch,
                )?;
                let pred = fit.predict(&xva_s);
                let mse = pred
                    .iter()
                    .zip(yva.iter())
                    .map(|(&p, &t)| (p - t) * (p - t))
                    .sum::<S>()
                    / S::of_usize(va.len());
                mses.push(mse);
                warm = Some(fit.coefficients);
            }
            Ok(mses)
        })
        .collect();

    let mut curve = vec![S::zero(); grid.len()];
    for fold_curve in fold_curves {
        let fold_curve = fold_curve?;
        for (acc, v) in curve.iter_mut().zip(fold_curve) {
            *acc = *acc + v;
        }
    }
    let k_s = S::of_usize(k_cv);
    for v in curve.iter_mut() {
        *v = *v / k_s;
    }
    counter.add_cv((k_cv * settings.n_alphas) as u64);

    let mut best = 0usize;
    for (i, &v) in curve.iter().enumerate() {
        if v < curve[best] {
            best = i;
        }
    }
    Ok((grid.values()[best], curve))
}
