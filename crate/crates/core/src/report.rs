//! Report structures written by the CLI: per-fold selection records,
//! benchmark outcomes with comparisons, and the plain-text table view.

use serde::{Deserialize, Serialize};

use crate::accumulator::AccumulatorSnapshot;
use crate::episode::{EpisodeResult, FoldRunResult};
use crate::harness::{Comparison, SelectorOutcome, Summary};
use crate::policy::THETA_DIM;

/// One episode's log line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub reward: f64,
    pub auc: f64,
    pub panel_size: usize,
    pub panel: Vec<usize>,
    pub iterations: usize,
    pub theta_after: [f64; THETA_DIM],
    pub auc_history: Vec<f64>,
}

impl EpisodeRecord {
    pub fn from_result(episode: usize, r: &EpisodeResult) -> Self {
        EpisodeRecord {
            episode,
            reward: r.reward,
            auc: r.auc,
            panel_size: r.panel.len(),
            panel: r.panel.clone(),
            iterations: r.iterations_run,
            theta_after: r.theta_after,
            auc_history: r.auc_history.clone(),
        }
    }
}

/// Detailed per-fold record of the policy-gradient selector, carried
/// through the harness as selector detail and into the run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RlFoldDetail {
    pub alpha: f64,
    pub theta: [f64; THETA_DIM],
    pub episodes: Vec<EpisodeRecord>,
    pub accumulator: AccumulatorSnapshot,
    pub fit_single: u64,
    pub fit_cv: u64,
    /// (alpha, mean validation MSE) pairs of the anchoring search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_curve: Option<Vec<(f64, f64)>>,
}

impl RlFoldDetail {
    pub fn from_run(run: &FoldRunResult) -> Self {
        RlFoldDetail {
            alpha: run.alpha,
            theta: run.theta,
            episodes: run
                .episodes
                .iter()
                .enumerate()
                .map(|(i, ep)| EpisodeRecord::from_result(i + 1, ep))
                .collect(),
            accumulator: run.snapshot.clone(),
            fit_single: run.fit_single,
            fit_cv: run.fit_cv,
            cv_curve: None,
        }
    }
}

/// The `select` command's output: one method under nested CV with full
/// episode logs per fold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub outcome: SelectorOutcome,
    pub summary: Summary,
}

/// One method's entry in a benchmark report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodReport {
    pub outcome: SelectorOutcome,
    pub summary: Summary,
}

/// The `bench` command's output: shared-split outcomes plus the pairwise
/// comparison matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub kind: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
    pub comparisons: Vec<Comparison>,
}

/// Render a benchmark (or single-method) report as a plain-text table.
pub fn render_table(methods: &[MethodReport], comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>9} {:>8} {:>8} {:>10} {:>10}\n",
        "method", "mean_auc", "std", "median", "avg_genes", "consensus"
    ));
    out.push_str(&"-".repeat(62));
    out.push('\n');
    for m in methods {
        out.push_str(&format!(
            "{:<12} {:>9.3} {:>8.3} {:>8.3} {:>10.1} {:>10}\n",
            m.outcome.method_name,
            m.summary.mean_auc,
            m.summary.std_auc,
            m.summary.median_auc,
            m.summary.mean_genes,
            m.outcome.consensus_panel.len()
        ));
    }
    if !comparisons.is_empty() {
        out.push('\n');
        out.push_str("paired t-tests (two-sided)\n");
        out.push_str(&format!(
            "{:<12} {:<12} {:>10} {:>9} {:>10}\n",
            "a", "b", "mean_diff", "t", "p"
        ));
        out.push_str(&"-".repeat(57));
        out.push('\n');
        for c in comparisons {
            out.push_str(&format!(
                "{:<12} {:<12} {:>10.4} {:>9.3} {:>10.5}\n",
                c.method_a, c.method_b, c.mean_diff, c.t_statistic, c.p_value
            ));
        }
    }
    out
}
