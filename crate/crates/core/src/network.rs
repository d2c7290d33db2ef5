//! Weighted feature-feature interaction prior, the posterior network
//! filtered by co-selection evidence, and connected-module extraction.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use crate::accumulator::Accumulator;
use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::Real;

/// Symmetric weighted prior over feature pairs, weights in [0, 1].
/// Absent edges read as 0, so running without a prior file simply makes
/// the network state feature vanish.
#[derive(Debug, Clone, Default)]
pub struct InteractionNetwork {
    edges: BTreeMap<(u32, u32), Real>,
    n_features: usize,
    score_threshold: u32,
    /// Input rows whose endpoints were not in the feature list.
    pub dropped_rows: usize,
}

impl InteractionNetwork {
    /// Empty prior: every lookup returns 0.
    pub fn empty(n_features: usize) -> Self {
        InteractionNetwork {
            edges: BTreeMap::new(),
            n_features,
            score_threshold: 0,
            dropped_rows: 0,
        }
    }

    /// Build a prior from explicit (i, j, weight) edges. Pairs are
    /// symmetrised, self edges dropped, duplicates keep the maximum.
    pub fn from_edges(n_features: usize, edges: &[(usize, usize, Real)]) -> Result<Self> {
        let mut map: BTreeMap<(u32, u32), Real> = BTreeMap::new();
        for &(i, j, w) in edges {
            if i >= n_features || j >= n_features {
                return Err(Error::Invalid(format!(
                    "edge ({i}, {j}) exceeds feature count {n_features}"
                )));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Invalid(format!("edge weight {w} outside [0, 1]")));
            }
            if i == j {
                continue;
            }
            let key = ordered(i as u32, j as u32);
            let entry = map.entry(key).or_insert(0.0);
            if w > *entry {
                *entry = w;
            }
        }
        Ok(InteractionNetwork {
            edges: map,
            n_features,
            score_threshold: 0,
            dropped_rows: 0,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn score_threshold(&self) -> u32 {
        self.score_threshold
    }

    /// Prior weight of (i, j); symmetric, zero on the diagonal and for
    /// absent edges.
    pub fn weight(&self, i: usize, j: usize) -> Real {
        if i == j {
            return 0.0;
        }
        let key = ordered(i as u32, j as u32);
        *self.edges.get(&key).unwrap_or(&0.0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, Real)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Collapse weights to 1.0, treating the prior as edge/no-edge.
    pub fn binarized(&self) -> InteractionNetwork {
        InteractionNetwork {
            edges: self.edges.keys().map(|&k| (k, 1.0)).collect(),
            n_features: self.n_features,
            score_threshold: self.score_threshold,
            dropped_rows: self.dropped_rows,
        }
    }
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Load a three-column (name_a, name_b, combined score on a 0..1000 scale)
/// interaction file, keeping edges with score strictly above
/// `raw_threshold` and normalising weights to score/1000.
///
/// Delimiter is tab or comma, a header row is auto-detected, duplicate
/// edges keep the maximum score, and endpoints missing from
/// `feature_names` are dropped with a count.
pub fn load_network<P: AsRef<Path>>(
    path: P,
    feature_names: &[String],
    raw_threshold: u32,
) -> Result<InteractionNetwork> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);

    let index: HashMap<&str, u32> = feature_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();

    let mut edges: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    let mut dropped = 0usize;

    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = line_no + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').collect()
        } else {
            trimmed.split(',').collect()
        };
        if fields.len() < 3 {
            return Err(Error::Parse {
                path: path_str,
                line: line_no,
                msg: format!("expected 3 columns, found {}", fields.len()),
            });
        }
        let score: u32 = match fields[2].trim().parse() {
            Ok(s) => s,
            Err(_) if line_no == 1 => continue, // header row
            Err(_) => {
                return Err(Error::Parse {
                    path: path_str,
                    line: line_no,
                    msg: format!("score '{}' is not an integer", fields[2].trim()),
                })
            }
        };
        if score > 1000 {
            return Err(Error::Parse {
                path: path_str,
                line: line_no,
                msg: format!("score {} exceeds the 0..1000 scale", score),
            });
        }
        if score <= raw_threshold {
            continue;
        }
        let a = fields[0].trim();
        let b = fields[1].trim();
        match (index.get(a), index.get(b)) {
            (Some(&ia), Some(&ib)) if ia != ib => {
                let key = ordered(ia, ib);
                let entry = edges.entry(key).or_insert(0);
                *entry = (*entry).max(score);
            }
            (Some(_), Some(_)) => {} // self edge, skip
            _ => dropped += 1,
        }
    }

    Ok(InteractionNetwork {
        edges: edges
            .into_iter()
            .map(|(k, s)| (k, s as Real / 1000.0))
            .collect(),
        n_features: feature_names.len(),
        score_threshold: raw_threshold,
        dropped_rows: dropped,
    })
}

/// One edge of the posterior network: prior weight times co-selection
/// frequency.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PosteriorEdge {
    pub a: u32,
    pub b: u32,
    pub prior: Real,
    pub psi: Real,
    pub product: Real,
}

/// The prior filtered by co-selection: an edge survives only if both
/// endpoints were co-selected at least once.
#[derive(Debug, Clone, Default)]
pub struct PosteriorNetwork {
    pub edges: Vec<PosteriorEdge>,
}

/// Elementwise product of the prior and the accumulator's co-selection
/// frequencies.
pub fn posterior<S: Scalar>(prior: &InteractionNetwork, acc: &Accumulator<S>) -> PosteriorNetwork {
    let mut edges = Vec::new();
    for (a, b, w) in prior.edges() {
        let psi = acc.psi(a as usize, b as usize).as_f64();
        if psi > 0.0 {
            edges.push(PosteriorEdge {
                a,
                b,
                prior: w,
                psi,
                product: w * psi,
            });
        }
    }
    PosteriorNetwork { edges }
}

/// A connected module of the filtered posterior network.
#[derive(Debug, Clone, Serialize)]
pub struct Module {
    pub features: Vec<String>,
    pub edges: Vec<(String, String, Real)>,
}

/// Connected components of the posterior after dropping edges with
/// co-selection frequency below `min_psi`. Components of size >= 2 are
/// returned sorted by size descending, then by their name lists.
pub fn extract_modules(
    posterior: &PosteriorNetwork,
    feature_names: &[String],
    min_psi: Real,
) -> Vec<Module> {
    let kept: Vec<&PosteriorEdge> = posterior
        .edges
        .iter()
        .filter(|e| e.psi >= min_psi)
        .collect();

    // union-find over the touched vertices
    let mut parent: HashMap<u32, u32> = HashMap::new();
    fn find(parent: &mut HashMap<u32, u32>, x: u32) -> u32 {
        let p = *parent.get(&x).unwrap_or(&x);
        if p == x {
            x
        } else {
            let root = find(parent, p);
            parent.insert(x, root);
            root
        }
    }
    for e in &kept {
        parent.entry(e.a).or_insert(e.a);
        parent.entry(e.b).or_insert(e.b);
        let ra = find(&mut parent, e.a);
        let rb = find(&mut parent, e.b);
        if ra != rb {
            parent.insert(ra, rb);
        }
    }

    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let keys: Vec<u32> = parent.keys().copied().collect();
    for v in keys {
        let root = find(&mut parent, v);
        groups.entry(root).or_default().push(v);
    }

    let mut modules: Vec<Module> = groups
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|mut members| {
            members.sort_unstable();
            let name_of = |i: u32| feature_names[i as usize].clone();
            let mut names: Vec<String> = members.iter().map(|&i| name_of(i)).collect();
            names.sort();
            let member_set: std::collections::BTreeSet<u32> = members.iter().copied().collect();
            let mut edges: Vec<(String, String, Real)> = kept
                .iter()
                .filter(|e| member_set.contains(&e.a) && member_set.contains(&e.b))
                .map(|e| (name_of(e.a), name_of(e.b), e.psi))
                .collect();
            edges.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
            Module {
                features: names,
                edges,
            }
        })
        .collect();

    modules.sort_by(|a, b| {
        b.features
            .len()
            .cmp(&a.features.len())
            .then_with(|| a.features.cmp(&b.features))
    });
    modules
}
