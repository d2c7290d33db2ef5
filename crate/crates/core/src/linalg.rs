//! Dense row-major matrix and the train/apply standardization used ahead
//! of every regularised fit.

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Dense row-major matrix. Rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    c
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_to_vec(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Column copies, handy for coordinate-wise solvers.
    pub fn columns(&self) -> Vec<Vec<S>> {
        let mut cols = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(row[j]);
            }
        }
        cols
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix<S> {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix<S> {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let row = self.row(i);
            for &j in idx {
                data.push(row[j]);
            }
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Column means and population (divide-by-n) standard deviations.
pub fn column_stats<S: Scalar>(m: &Matrix<S>) -> (Vec<S>, Vec<S>) {
    let n = S::of_usize(m.n_rows());
    let mut means = vec![S::zero(); m.n_cols()];
    let mut vars = vec![S::zero(); m.n_cols()];
    for i in 0..m.n_rows() {
        let row = m.row(i);
        for (j, &v) in row.iter().enumerate() {
            means[j] = means[j] + v;
        }
    }
    for mu in means.iter_mut() {
        *mu = *mu / n;
    }
    for i in 0..m.n_rows() {
        let row = m.row(i);
        for (j, &v) in row.iter().enumerate() {
            let d = v - means[j];
            vars[j] = vars[j] + d * d;
        }
    }
    let stds = vars.into_iter().map(|v| (v / n).sqrt()).collect();
    (means, stds)
}

/// Standardize `train` by its own column statistics and transform `apply`
/// with the same statistics.
///
/// Standardized (train, apply) pair plus the training means and scales.
pub type Standardized<S> = (Matrix<S>, Matrix<S>, Vec<S>, Vec<S>);

/// Uses population standard deviation. Zero-variance columns are centered
/// but left unscaled (scale 1), which keeps them inert under an L1 penalty.
pub fn standardize_train_apply<S: Scalar>(
    train: &Matrix<S>,
    apply: &Matrix<S>,
) -> Result<Standardized<S>> {
    if train.n_rows() < 2 {
        return Err(Error::Invalid(
            "standardization needs at least 2 training rows".into(),
        ));
    }
    if apply.n_rows() > 0 && apply.n_cols() != train.n_cols() {
        return Err(Error::Dimension(format!(
            "apply has {} columns, train has {}",
            apply.n_cols(),
            train.n_cols()
        )));
    }
    if !train.is_finite() || !apply.is_finite() {
        return Err(Error::NonFinite("standardization input".into()));
    }
    let (means, mut scales) = column_stats(train);
    for s in scales.iter_mut() {
        if *s == S::zero() {
            *s = S::one();
        }
    }
    let transform = |m: &Matrix<S>| {
        let mut out = m.clone();
        for i in 0..m.n_rows() {
            for j in 0..m.n_cols() {
                out.set(i, j, (m.get(i, j) - means[j]) / scales[j]);
            }
        }
        out
    };
    Ok((transform(train), transform(apply), means, scales))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn standardize_two_point_column() {
        // mean 2, population std 1
        let train = m(&[&[1.0], &[3.0]]);
        let (std_train, _, means, scales) =
            standardize_train_apply(&train, &Matrix::zeros(0, 1)).unwrap();
        assert_eq!(means, vec![2.0]);
        assert_eq!(scales, vec![1.0]);
        assert_eq!(std_train.get(0, 0), -1.0);
        assert_eq!(std_train.get(1, 0), 1.0);
    }

    #[test]
    fn standardize_constant_column() {
        let train = m(&[&[5.0], &[5.0], &[5.0]]);
        let (std_train, _, _, scales) =
            standardize_train_apply(&train, &Matrix::zeros(0, 1)).unwrap();
        assert_eq!(scales, vec![1.0]);
        for i in 0..3 {
            assert_eq!(std_train.get(i, 0), 0.0);
        }
    }

    #[test]
    fn apply_row_at_train_mean_is_zero() {
        let train = m(&[&[1.0, 10.0], &[3.0, 30.0], &[5.0, 20.0]]);
        let apply = m(&[&[3.0, 20.0]]);
        let (_, std_apply, _, _) = standardize_train_apply(&train, &apply).unwrap();
        assert!(std_apply.row(0).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn standardize_is_idempotent_on_standardized_data() {
        let train = m(&[&[1.0, 2.0], &[3.0, 5.0], &[-2.0, 0.5], &[4.0, -1.0]]);
        let (once, _, _, _) = standardize_train_apply(&train, &Matrix::zeros(0, 2)).unwrap();
        let (twice, _, means, scales) =
            standardize_train_apply(&once, &Matrix::zeros(0, 2)).unwrap();
        for mu in means {
            assert!(mu.abs() < 1e-12);
        }
        for s in scales {
            assert!((s - 1.0).abs() < 1e-12);
        }
        for i in 0..once.n_rows() {
            for j in 0..once.n_cols() {
                assert!((once.get(i, j) - twice.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let train = m(&[&[1.0], &[f64::NAN]]);
        assert!(standardize_train_apply(&train, &Matrix::zeros(0, 1)).is_err());
    }

    #[test]
    fn select_rows_and_cols() {
        let a = m(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        let r = a.select_rows(&[2, 0]);
        assert_eq!(r.row(0), &[7.0, 8.0, 9.0]);
        assert_eq!(r.row(1), &[1.0, 2.0, 3.0]);
        let c = a.select_cols(&[1]);
        assert_eq!(c.col_to_vec(0), vec![2.0, 5.0, 8.0]);
    }
}
