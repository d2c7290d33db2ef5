//! Cross-iteration selection statistics: signed coefficient sums,
//! selection counts, sparse co-selection counts, and the dual-criterion
//! selection they drive.
//!
//! Normalised by the number of absorbed fold-fits, the running sums
//! converge to the expected coefficient and the selection probability of
//! each feature, which is what makes the dual criterion consistent: a
//! feature must rank highly both by accumulated |w| (sign-consistent
//! effect) and by selection count (stable support) to survive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::InteractionNetwork;
use crate::num::Scalar;
use crate::types::FitResult;

/// Running statistics for one episode.
#[derive(Debug, Clone)]
pub struct Accumulator<S> {
    /// Signed coefficient sums per feature.
    w: Vec<S>,
    /// Nonzero-selection counts per feature.
    c: Vec<u32>,
    /// Co-selection counts for ordered pairs (i < j).
    coselect: BTreeMap<(u32, u32), u32>,
    /// Fold-fits absorbed so far.
    fold_fits: u32,
    /// Active-set size of each absorbed fit, in absorption order.
    genes_per_fold: Vec<usize>,
    /// Most recent dual-criterion selection, used as the reference set for
    /// the network and co-selection state features.
    last_selection: Vec<usize>,
}

/// Bounded per-gene state: selection frequency, absolute mean coefficient,
/// mean prior interaction with the reference set, and mean co-selection
/// frequency with the reference set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFeatures<S> {
    pub p_hat: S,
    pub mu_abs: S,
    pub n_net: S,
    pub d_cosel: S,
}

/// Serializable snapshot of an accumulator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AccumulatorSnapshot {
    pub n_features: usize,
    pub fold_fits: u32,
    pub w: Vec<f64>,
    pub c: Vec<u32>,
    /// Sparse co-selection triples (i, j, count) with i < j.
    pub coselect: Vec<(u32, u32, u32)>,
    pub genes_per_fold: Vec<usize>,
}

impl<S: Scalar> Accumulator<S> {
    pub fn new(n_features: usize) -> Self {
        Accumulator {
            w: vec![S::zero(); n_features],
            c: vec![0; n_features],
            coselect: BTreeMap::new(),
            fold_fits: 0,
            genes_per_fold: Vec::new(),
            last_selection: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.w.len()
    }

    pub fn fold_fits(&self) -> u32 {
        self.fold_fits
    }

    pub fn w(&self) -> &[S] {
        &self.w
    }

    pub fn counts(&self) -> &[u32] {
        &self.c
    }

    pub fn genes_per_fold(&self) -> &[usize] {
        &self.genes_per_fold
    }

    pub fn last_selection(&self) -> &[usize] {
        &self.last_selection
    }

    pub fn set_last_selection(&mut self, selection: Vec<usize>) {
        self.last_selection = selection;
    }

    /// Fold one fit into the running statistics.
    pub fn absorb_fit(&mut self, fit: &FitResult<S>) -> Result<()> {
        if fit.coefficients.len() != self.w.len() {
            return Err(Error::Dimension(format!(
                "fit has {} coefficients, accumulator tracks {}",
                fit.coefficients.len(),
                self.w.len()
            )));
        }
        for (acc, &coef) in self.w.iter_mut().zip(&fit.coefficients) {
            *acc = *acc + coef;
        }
        for &j in &fit.selected {
            self.c[j] += 1;
        }
        for (a, &i) in fit.selected.iter().enumerate() {
            for &j in &fit.selected[a + 1..] {
                *self.coselect.entry((i as u32, j as u32)).or_insert(0) += 1;
            }
        }
        self.fold_fits += 1;
        self.genes_per_fold.push(fit.selected.len());
        Ok(())
    }

    /// Co-selection frequency of a pair, normalised by fits absorbed so
    /// far.
    pub fn psi(&self, i: usize, j: usize) -> S {
        if self.fold_fits == 0 || i == j {
            return S::zero();
        }
        let key = if i < j {
            (i as u32, j as u32)
        } else {
            (j as u32, i as u32)
        };
        let count = *self.coselect.get(&key).unwrap_or(&0);
        S::of_usize(count as usize) / S::of_usize(self.fold_fits as usize)
    }

    pub fn coselect_triples(&self) -> Vec<(u32, u32, u32)> {
        self.coselect
            .iter()
            .map(|(&(a, b), &c)| (a, b, c))
            .collect()
    }

    /// State features of one gene against the stored reference selection.
    /// Errors before any fit has been absorbed (the warmup iteration has
    /// no state).
    pub fn state_features(
        &self,
        prior: Option<&InteractionNetwork>,
        gene: usize,
    ) -> Result<StateFeatures<S>> {
        if self.fold_fits == 0 {
            return Err(Error::Invalid(
                "state features are undefined before any fit is absorbed".into(),
            ));
        }
        let fits = S::of_usize(self.fold_fits as usize);
        let p_hat = S::of_usize(self.c[gene] as usize) / fits;
        let mu_abs = (self.w[gene] / fits).abs();
        let (n_net, d_cosel) = if self.last_selection.is_empty() {
            (S::zero(), S::zero())
        } else {
            let len = S::of_usize(self.last_selection.len());
            let mut net = S::zero();
            let mut cos = S::zero();
            for &j in &self.last_selection {
                if let Some(p) = prior {
                    net = net + S::of_f64(p.weight(gene, j));
                }
                cos = cos + self.psi(gene, j);
            }
            (net / len, cos / len)
        };
        Ok(StateFeatures {
            p_hat,
            mu_abs,
            n_net,
            d_cosel,
        })
    }

    /// State features for every gene in one pass.
    pub fn state_matrix(
        &self,
        prior: Option<&InteractionNetwork>,
    ) -> Result<Vec<StateFeatures<S>>> {
        (0..self.n_features())
            .map(|g| self.state_features(prior, g))
            .collect()
    }

    /// Dual-criterion selection: the intersection of the top-m features by
    /// accumulated |w| and the top-m by selection count. Only features
    /// with nonzero statistics qualify for a ranking; ties break toward
    /// the smaller index.
    pub fn dual_select(&self, m: usize) -> Vec<usize> {
        let top_w = top_m_by(
            &self.w.iter().map(|v| v.abs()).collect::<Vec<_>>(),
            m,
            |v| *v > S::zero(),
        );
        let top_c = top_m_by(&self.c, m, |v| *v > 0);
        let c_set: std::collections::BTreeSet<usize> = top_c.into_iter().collect();
        let mut out: Vec<usize> = top_w.into_iter().filter(|j| c_set.contains(j)).collect();
        out.sort_unstable();
        out
    }

    /// Running means (w, c) over absorbed fits; these converge to the
    /// expected coefficient and the selection probability.
    pub fn normalized_estimates(&self) -> (Vec<S>, Vec<S>) {
        if self.fold_fits == 0 {
            return (vec![S::zero(); self.w.len()], vec![S::zero(); self.w.len()]);
        }
        let fits = S::of_usize(self.fold_fits as usize);
        let mu = self.w.iter().map(|&v| v / fits).collect();
        let p = self
            .c
            .iter()
            .map(|&v| S::of_usize(v as usize) / fits)
            .collect();
        (mu, p)
    }

    pub fn snapshot(&self) -> AccumulatorSnapshot {
        AccumulatorSnapshot {
            n_features: self.n_features(),
            fold_fits: self.fold_fits,
            w: self.w.iter().map(|v| v.as_f64()).collect(),
            c: self.c.clone(),
            coselect: self.coselect_triples(),
            genes_per_fold: self.genes_per_fold.clone(),
        }
    }

    /// Rebuild an accumulator from a serialized snapshot.
    pub fn from_snapshot(snapshot: &AccumulatorSnapshot) -> Result<Self> {
        if snapshot.w.len() != snapshot.n_features || snapshot.c.len() != snapshot.n_features {
            return Err(Error::Dimension(format!(
                "snapshot arrays do not match n_features = {}",
                snapshot.n_features
            )));
        }
        let mut coselect = BTreeMap::new();
        for &(a, b, count) in &snapshot.coselect {
            if a >= b || b as usize >= snapshot.n_features {
                return Err(Error::Invalid(format!(
                    "snapshot pair ({a}, {b}) is not an ordered feature pair"
                )));
            }
            coselect.insert((a, b), count);
        }
        Ok(Accumulator {
            w: snapshot.w.iter().map(|&v| S::of_f64(v)).collect(),
            c: snapshot.c.clone(),
            coselect,
            fold_fits: snapshot.fold_fits,
            genes_per_fold: snapshot.genes_per_fold.clone(),
            last_selection: Vec::new(),
        })
    }
}

/// Indices of the m largest values, ordered by value descending with
/// smaller indices winning ties; entries failing `qualifies` never rank.
fn top_m_by<T: PartialOrd + Copy>(
    values: &[T],
    m: usize,
    qualifies: impl Fn(&T) -> bool,
) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len())
        .filter(|&i| qualifies(&values[i]))
        .collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(m);
    idx
}
