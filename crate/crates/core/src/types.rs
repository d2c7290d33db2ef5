//! Fit-result records and the fit counter shared by every solver path.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::num::Scalar;

/// Outcome of one elastic-net fit.
#[derive(Debug, Clone)]
pub struct FitResult<S> {
    /// Signed regression weights, one per feature.
    pub coefficients: Vec<S>,
    pub intercept: S,
    /// Coordinate sweeps performed.
    pub n_iterations: usize,
    /// Whether the final sweep's largest coefficient update fell below the
    /// solver tolerance.
    pub converged: bool,
    /// Indices of exactly the nonzero coefficients, ascending.
    pub selected: Vec<usize>,
}

impl<S: Scalar> FitResult<S> {
    pub fn new(coefficients: Vec<S>, intercept: S, n_iterations: usize, converged: bool) -> Self {
        let selected = coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != S::zero())
            .map(|(i, _)| i)
            .collect();
        FitResult {
            coefficients,
            intercept,
            n_iterations,
            converged,
            selected,
        }
    }

    /// Linear predictions `intercept + x . beta` for each row.
    pub fn predict(&self, x: &crate::linalg::Matrix<S>) -> Vec<S> {
        (0..x.n_rows())
            .map(|i| {
                let row = x.row(i);
                let mut acc = self.intercept;
                for &j in &self.selected {
                    acc = acc + row[j] * self.coefficients[j];
                }
                acc
            })
            .collect()
    }
}

/// Counts elastic-net fits, split into single fits at one penalty and
/// fits burned inside a regularisation search.
///
/// Increments are atomic so concurrent fold workers can share one counter.
#[derive(Debug, Default)]
pub struct FitCounter {
    single: AtomicU64,
    cv: AtomicU64,
}

impl FitCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_single(&self, n: u64) {
        self.single.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_cv(&self, n: u64) {
        self.cv.fetch_add(n, Ordering::Relaxed);
    }

    pub fn single_fits(&self) -> u64 {
        self.single.load(Ordering::Relaxed)
    }

    pub fn cv_fits(&self) -> u64 {
        self.cv.load(Ordering::Relaxed)
    }

    pub fn total(&self) -> u64 {
        self.single_fits() + self.cv_fits()
    }

    /// Fold another counter's totals into this one.
    pub fn merge(&self, other: &FitCounter) {
        self.add_single(other.single_fits());
        self.add_cv(other.cv_fits());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selected_matches_nonzeros_exactly() {
        let fit = FitResult::new(vec![0.0, 1.5, 0.0, -0.2], 0.1, 3, true);
        assert_eq!(fit.selected, vec![1, 3]);
    }

    #[test]
    fn counter_is_monotone_and_merges() {
        let c = FitCounter::new();
        c.add_single(3);
        c.add_cv(10);
        assert_eq!(c.total(), 13);
        let d = FitCounter::new();
        d.add_single(2);
        c.merge(&d);
        assert_eq!(c.single_fits(), 5);
        assert_eq!(c.total(), 15);
    }
}
