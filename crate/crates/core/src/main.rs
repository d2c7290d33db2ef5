//! Command-line entry point: reproducible selection runs, shared-split
//! benchmarks, synthetic-data generation, posterior-network analysis and
//! report rendering.

use std::collections::BTreeSet;
use std::fs;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use panelsel::accumulator::{Accumulator, AccumulatorSnapshot};
use panelsel::baselines::{
    DualFixedSelector, EnetSelector, MrmrSelector, RlSelector, StabilitySelector,
};
use panelsel::config::{
    parse_config_file, parse_mrmr_budget, parse_penalty_mode, parse_theta5_route, MrmrBudget,
    RunConfig,
};
use panelsel::harness::{
    comparison_matrix, mean_panel_size, nested_cv, summarize, EvalConfig, Selector, SelectorOutcome,
};
use panelsel::io::{load_dataset, write_dataset};
use panelsel::network::{extract_modules, load_network, posterior, InteractionNetwork};
use panelsel::report::{BenchReport, MethodReport, RlFoldDetail, RunReport};
use panelsel::synth::{gen_correlated_shadow, gen_linear, gen_sign_inconsistent, SynthSpec};
use panelsel::{Error, ExpressionDataset, Result};

#[derive(Parser)]
#[command(
    name = "panelsel",
    about = "Biomarker panel selection: dual-criterion selector with a policy-gradient tuner, baselines, and a nested-CV benchmark harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the policy-gradient selector under nested cross-validation.
    Select(SelectArgs),
    /// Benchmark several selectors on identical outer folds.
    Bench(BenchArgs),
    /// Generate a synthetic dataset with ground truth.
    Synth(SynthArgs),
    /// Filter an interaction prior by co-selection evidence.
    Network(NetworkArgs),
    /// Render a saved report as a plain-text table.
    Report(ReportArgs),
}

/// Data, run and selector options shared by `select` and `bench`. Flags
/// override values from `--config`.
#[derive(Args, Clone)]
struct CommonArgs {
    /// Expression matrix CSV/TSV (header row of feature names, one row
    /// per sample).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Two-column labels file (sample_id, 0/1).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Interaction prior TSV (name_a, name_b, score 0..1000).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Matrix rows are features and columns are samples.
    #[arg(long)]
    transposed: bool,
    /// Keep prior edges with score strictly above this value.
    #[arg(long)]
    network_threshold: Option<u32>,
    /// Treat prior edges as unweighted.
    #[arg(long)]
    network_binary: bool,
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    outer_folds: Option<usize>,
    /// Worker threads (0 = library default).
    #[arg(long)]
    parallelism: Option<usize>,
    /// Consensus threshold as NUM/DEN of outer folds.
    #[arg(long)]
    consensus: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    inner_folds: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    sparsity_weight: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    baseline_decay: Option<f64>,
    #[arg(long)]
    min_genes: Option<usize>,
    #[arg(long)]
    l1_ratio: Option<f64>,
    #[arg(long)]
    n_alphas: Option<usize>,
    /// Retention-parameter gradient route: 'bias' or 'perturb:<sigma>'.
    #[arg(long)]
    theta5_route: Option<String>,
    /// Penalty mode: 'policy' or 'uniform:<scale>'.
    #[arg(long)]
    penalty_mode: Option<String>,
    /// Fixed retention fraction override.
    #[arg(long)]
    m_frac: Option<f64>,
    /// Episodes per frozen-parameter batch (1 = sequential).
    #[arg(long)]
    batch_episodes: Option<usize>,
    /// Ridge strength of the evaluation classifier.
    #[arg(long)]
    eval_l2: Option<f64>,
    /// Write per-fold regularisation curves.
    #[arg(long)]
    dump_cv_curves: bool,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated method list: rl, dual, enet, mrmr, stability.
    #[arg(long)]
    methods: Option<String>,
    /// mRMR gene budget: a count or 'matched:<method>'.
    #[arg(long)]
    mrmr_k: Option<String>,
    #[arg(long)]
    mrmr_bins: Option<usize>,
    #[arg(long)]
    stability_subsamples: Option<usize>,
    #[arg(long)]
    stability_threshold: Option<f64>,
    #[arg(long)]
    stability_lambdas: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Dataset variant: linear, sign-flip or shadow.
    #[arg(long, default_value = "linear")]
    variant: String,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 100)]
    features: usize,
    /// Planted support size (linear variant).
    #[arg(long, default_value_t = 5)]
    planted: usize,
    /// Base effect magnitude.
    #[arg(long, default_value_t = 1.5)]
    effect: f64,
    #[arg(long, default_value_t = 0.5)]
    noise_sd: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct NetworkArgs {
    /// Interaction prior TSV (name_a, name_b, score 0..1000).
    #[arg(long)]
    prior: PathBuf,
    /// Accumulator snapshot JSON from a select run.
    #[arg(long)]
    psi: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    min_psi: f64,
    #[arg(long, default_value_t = 700)]
    raw_threshold: u32,
    /// Treat prior edges as unweighted.
    #[arg(long)]
    binary: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A report JSON written by `select` or `bench`.
    #[arg(long)]
    input: PathBuf,
}

/// Accumulator snapshot plus the feature names it indexes; the psi
/// artifact consumed by the `network` command.
#[derive(Serialize, Deserialize)]
struct PsiFile {
    config: serde_json::Value,
    seed: u64,
    fold: usize,
    feature_names: Vec<String>,
    accumulator: AccumulatorSnapshot,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Select(args) => cmd_select(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Network(args) => cmd_network(args),
        Command::Report(args) => cmd_report(args),
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn resolve_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let file = parse_config_file(path)?;
        cfg.apply_file(&file)?;
    }
    if let Some(v) = &common.matrix {
        cfg.matrix = v.clone();
    }
    if let Some(v) = &common.labels {
        cfg.labels = v.clone();
    }
    if let Some(v) = &common.network {
        cfg.network = Some(v.clone());
    }
    if common.transposed {
        cfg.transposed = true;
    }
    if let Some(v) = common.network_threshold {
        cfg.network_threshold = v;
    }
    if common.network_binary {
        cfg.network_binary = true;
    }
    if let Some(v) = &common.out {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.outer_folds {
        cfg.outer_folds = v;
    }
    if let Some(v) = common.parallelism {
        cfg.parallelism = v;
    }
    if let Some(v) = &common.consensus {
        cfg.apply("run", "consensus", v)?;
    }
    if let Some(v) = common.episodes {
        cfg.episode.episodes = v;
    }
    if let Some(v) = common.inner_folds {
        cfg.episode.inner_folds = v;
    }
    if let Some(v) = common.max_iterations {
        cfg.episode.max_iterations = v;
    }
    if let Some(v) = common.tolerance {
        cfg.episode.tolerance = v;
    }
    if let Some(v) = common.sparsity_weight {
        cfg.episode.sparsity_weight = v;
    }
    if let Some(v) = common.learning_rate {
        cfg.episode.learning_rate = v;
    }
    if let Some(v) = common.baseline_decay {
        cfg.episode.baseline_decay = v;
    }
    if let Some(v) = common.min_genes {
        cfg.episode.min_genes = v;
    }
    if let Some(v) = common.l1_ratio {
        cfg.episode.enet.l1_ratio = v;
    }
    if let Some(v) = common.n_alphas {
        cfg.episode.enet.n_alphas = v;
    }
    if let Some(v) = &common.theta5_route {
        cfg.episode.theta5_route = parse_theta5_route(v)?;
    }
    if let Some(v) = &common.penalty_mode {
        cfg.episode.penalty_mode = parse_penalty_mode(v)?;
    }
    if let Some(v) = common.m_frac {
        cfg.episode.m_frac_override = Some(v);
    }
    if let Some(v) = common.batch_episodes {
        cfg.episode.batch_episodes = v;
    }
    if let Some(v) = common.eval_l2 {
        cfg.eval_l2 = v;
    }
    if common.dump_cv_curves {
        cfg.dump_cv_curves = true;
    }
    if cfg.matrix.as_os_str().is_empty() || cfg.labels.as_os_str().is_empty() {
        return Err(Error::Invalid(
            "matrix and labels paths are required (flags or config file)".into(),
        ));
    }
    if cfg.parallelism > 0 {
        // ignore failure when a pool already exists in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build_global();
    }
    Ok(cfg)
}

fn load_inputs(cfg: &RunConfig) -> Result<(ExpressionDataset, Option<Arc<InteractionNetwork>>)> {
    let ds = load_dataset(&cfg.matrix, &cfg.labels, cfg.transposed)?;
    ds.validate_for_selection()?;
    let prior = match &cfg.network {
        Some(path) => {
            let net = load_network(path, ds.feature_names(), cfg.network_threshold)?;
            if net.dropped_rows > 0 {
                eprintln!(
                    "warning: {} prior rows referenced unknown features and were dropped",
                    net.dropped_rows
                );
            }
            let net = if cfg.network_binary {
                net.binarized()
            } else {
                net
            };
            Some(Arc::new(net))
        }
        None => None,
    };
    Ok((ds, prior))
}

fn write_json<T: Serialize, P: AsRef<Path>>(value: &T, path: P) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn config_comment(cfg: &RunConfig) -> String {
    format!("# config = {}\n# seed = {}\n", cfg.echo(), cfg.seed)
}

fn build_selector(
    name: &str,
    cfg: &RunConfig,
    prior: &Option<Arc<InteractionNetwork>>,
    mrmr_k: usize,
) -> Result<Box<dyn Selector>> {
    match name {
        "rl" => Ok(Box::new(RlSelector {
            config: cfg.episode.clone(),
            prior: prior.clone(),
            keep_cv_curve: cfg.dump_cv_curves,
        })),
        "dual" => Ok(Box::new(DualFixedSelector {
            config: cfg.episode.clone(),
        })),
        "enet" => Ok(Box::new(EnetSelector {
            settings: cfg.episode.enet.clone(),
        })),
        "mrmr" => Ok(Box::new(MrmrSelector {
            k: mrmr_k,
            n_bins: cfg.mrmr_bins,
        })),
        "stability" => Ok(Box::new(StabilitySelector {
            config: cfg.stability.clone(),
        })),
        other => Err(Error::UnknownMethod {
            name: other.to_string(),
            known: "rl, dual, enet, mrmr, stability".into(),
        }),
    }
}

fn run_method(
    name: &str,
    cfg: &RunConfig,
    ds: &ExpressionDataset,
    prior: &Option<Arc<InteractionNetwork>>,
    mrmr_k: usize,
) -> Result<SelectorOutcome> {
    let selector = build_selector(name, cfg, prior, mrmr_k)?;
    nested_cv(
        ds,
        selector.as_ref(),
        cfg.outer_folds,
        cfg.seed,
        &EvalConfig {
            l2_strength: cfg.eval_l2,
            ..EvalConfig::default()
        },
        (cfg.consensus_num, cfg.consensus_den),
    )
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let cfg = resolve_config(&args.common)?;
    let (ds, prior) = load_inputs(&cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;

    let selector = RlSelector {
        config: cfg.episode.clone(),
        prior: prior.clone(),
        keep_cv_curve: cfg.dump_cv_curves,
    };
    let mut outcome = nested_cv(
        &ds,
        &selector,
        cfg.outer_folds,
        cfg.seed,
        &EvalConfig {
            l2_strength: cfg.eval_l2,
            ..EvalConfig::default()
        },
        (cfg.consensus_num, cfg.consensus_den),
    )?;
    // select artifacts are byte-reproducible; wall-clock timings are
    // recorded by bench outputs only
    for fold in &mut outcome.per_fold {
        fold.runtime_seconds = 0.0;
    }
    let summary = summarize(&outcome);

    // per-fold selector details: accumulator snapshots, theta
    // trajectories, optional regularisation curves
    let mut theta_rows = String::from("fold,episode,reward,auc,iterations,t1,t2,t3,t4,t5\n");
    for fold in &outcome.per_fold {
        let detail_value = fold
            .detail
            .clone()
            .ok_or_else(|| Error::Invalid("selector returned no per-fold detail".into()))?;
        let detail: RlFoldDetail = serde_json::from_value(detail_value)?;
        let psi = PsiFile {
            config: cfg.echo(),
            seed: cfg.seed,
            fold: fold.fold,
            feature_names: ds.feature_names().to_vec(),
            accumulator: detail.accumulator.clone(),
        };
        write_json(
            &psi,
            cfg.out_dir
                .join(format!("accumulator_fold_{}.json", fold.fold)),
        )?;
        for ep in &detail.episodes {
            theta_rows.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                fold.fold,
                ep.episode,
                ep.reward,
                ep.auc,
                ep.iterations,
                ep.theta_after[0],
                ep.theta_after[1],
                ep.theta_after[2],
                ep.theta_after[3],
                ep.theta_after[4]
            ));
        }
        if cfg.dump_cv_curves {
            if let Some(curve) = &detail.cv_curve {
                let mut text = config_comment(&cfg);
                text.push_str("alpha,mean_mse\n");
                for (alpha, mse) in curve {
                    text.push_str(&format!("{alpha},{mse}\n"));
                }
                fs::write(
                    cfg.out_dir.join(format!("cv_curve_fold_{}.csv", fold.fold)),
                    text,
                )?;
            }
        }
    }

    let report = RunReport {
        kind: "select".into(),
        config: cfg.echo(),
        seed: cfg.seed,
        outcome,
        summary,
    };
    write_json(&report, cfg.out_dir.join("report.json"))?;

    let mut panels = config_comment(&cfg);
    panels.push_str("fold,feature\n");
    for fold in &report.outcome.per_fold {
        for name in &fold.panel {
            panels.push_str(&format!("{},{}\n", fold.fold, name));
        }
    }
    fs::write(cfg.out_dir.join("panels.csv"), panels)?;

    let mut thetas = config_comment(&cfg);
    thetas.push_str(&theta_rows);
    fs::write(cfg.out_dir.join("theta_trajectory.csv"), thetas)?;

    println!(
        "select: mean auc {:.3}, median {:.3}, mean genes {:.1}, consensus {} features",
        report.summary.mean_auc,
        report.summary.median_auc,
        report.summary.mean_genes,
        report.outcome.consensus_panel.len()
    );
    println!("wrote {}", cfg.out_dir.display());
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut cfg = resolve_config(&args.common)?;
    if let Some(methods) = &args.methods {
        cfg.methods = methods.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(k) = &args.mrmr_k {
        cfg.mrmr_budget = parse_mrmr_budget(k)?;
    }
    if let Some(bins) = args.mrmr_bins {
        cfg.mrmr_bins = bins;
    }
    if let Some(v) = args.stability_subsamples {
        cfg.stability.n_subsamples = v;
    }
    if let Some(v) = args.stability_threshold {
        cfg.stability.threshold = v;
    }
    if let Some(v) = args.stability_lambdas {
        cfg.stability.n_lambdas = v;
    }
    if cfg.methods.is_empty() {
        return Err(Error::Invalid("no methods named".into()));
    }
    for name in &cfg.methods {
        if !["rl", "dual", "enet", "mrmr", "stability"].contains(&name.as_str()) {
            return Err(Error::UnknownMethod {
                name: name.clone(),
                known: "rl, dual, enet, mrmr, stability".into(),
            });
        }
    }
    let (ds, prior) = load_inputs(&cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;

    // a matched mRMR budget requires its reference method to run first
    let mut order = cfg.methods.clone();
    let reference = match &cfg.mrmr_budget {
        MrmrBudget::Matched(name) if order.contains(&"mrmr".to_string()) => {
            if !order.contains(name) {
                return Err(Error::Invalid(format!(
                    "mrmr budget is matched to '{name}' which is not among the methods"
                )));
            }
            order.retain(|m| m != name);
            order.insert(0, name.clone());
            Some(name.clone())
        }
        _ => None,
    };

    let mut outcomes: Vec<SelectorOutcome> = Vec::new();
    let mut mrmr_k = match cfg.mrmr_budget {
        MrmrBudget::Fixed(k) => k,
        MrmrBudget::Matched(_) => 1,
    };
    for name in &order {
        let outcome = run_method(name, &cfg, &ds, &prior, mrmr_k)?;
        if let Some(reference) = &reference {
            if name == reference {
                mrmr_k = mean_panel_size(&outcome).round().max(1.0) as usize;
            }
        }
        outcomes.push(outcome);
    }
    // restore registration order for reporting
    outcomes.sort_by_key(|o| {
        cfg.methods
            .iter()
            .position(|m| *m == o.method_name)
            .unwrap_or(usize::MAX)
    });

    let comparisons = comparison_matrix(&outcomes)?;
    let methods: Vec<MethodReport> = outcomes
        .into_iter()
        .map(|outcome| {
            let summary = summarize(&outcome);
            MethodReport { outcome, summary }
        })
        .collect();

    let report = BenchReport {
        kind: "bench".into(),
        config: cfg.echo(),
        seed: cfg.seed,
        methods,
        comparisons,
    };
    write_json(&report, cfg.out_dir.join("bench.json"))?;

    let mut flat = config_comment(&cfg);
    flat.push_str("method,fold,auc,n_genes,runtime_seconds,fit_single,fit_cv\n");
    for m in &report.methods {
        for fold in &m.outcome.per_fold {
            flat.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                m.outcome.method_name,
                fold.fold,
                fold.auc,
                fold.panel.len(),
                fold.runtime_seconds,
                fold.fit_single,
                fold.fit_cv
            ));
        }
    }
    fs::write(cfg.out_dir.join("bench.csv"), flat)?;

    let table = panelsel::report::render_table(&report.methods, &report.comparisons);
    fs::write(cfg.out_dir.join("bench.txt"), &table)?;
    print!("{table}");
    println!("wrote {}", cfg.out_dir.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec = match args.variant.as_str() {
        "linear" => {
            if args.planted == 0 || args.planted > args.features {
                return Err(Error::Invalid(format!(
                    "planted support {} must lie in [1, {}]",
                    args.planted, args.features
                )));
            }
            let stride = (args.features / args.planted).max(1);
            let support = (0..args.planted)
                .map(|i| {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    (i * stride, sign * args.effect)
                })
                .collect();
            SynthSpec {
                n_samples: args.samples,
                n_features: args.features,
                true_support: support,
                noise_sd: args.noise_sd,
                correlated_blocks: vec![],
                flip_feature: None,
                seed: args.seed,
            }
        }
        "sign-flip" => {
            if args.features < 6 {
                return Err(Error::Invalid(
                    "sign-flip variant needs >= 6 features".into(),
                ));
            }
            SynthSpec {
                n_samples: args.samples,
                n_features: args.features,
                true_support: vec![(0, args.effect), (1, args.effect), (2, 0.8 * args.effect)],
                noise_sd: args.noise_sd,
                correlated_blocks: vec![(vec![0, 3], 0.999)],
                flip_feature: Some(4),
                seed: args.seed,
            }
        }
        "shadow" => {
            if args.features < 5 {
                return Err(Error::Invalid("shadow variant needs >= 5 features".into()));
            }
            SynthSpec {
                n_samples: args.samples,
                n_features: args.features,
                true_support: vec![
                    (0, 1.5 * args.effect),
                    (1, args.effect),
                    (2, 0.8 * args.effect),
                ],
                noise_sd: args.noise_sd,
                correlated_blocks: vec![(vec![0, 3], 0.95)],
                flip_feature: None,
                seed: args.seed,
            }
        }
        other => {
            return Err(Error::Invalid(format!(
                "unknown variant '{other}' (linear, sign-flip, shadow)"
            )))
        }
    };

    let (ds, mut truth) = match args.variant.as_str() {
        "sign-flip" => {
            let (ds, flip) = gen_sign_inconsistent(&spec)?;
            let mut truth = panelsel::synth::GroundTruth {
                beta: vec![0.0; spec.n_features],
                support: spec.true_support.iter().map(|&(j, _)| j).collect(),
                flip_feature: Some(flip),
                shadow_feature: None,
                seed: spec.seed,
            };
            for &(j, b) in &spec.true_support {
                truth.beta[j] = b;
            }
            (ds, truth)
        }
        "shadow" => {
            let (ds, shadow) = gen_correlated_shadow(&spec)?;
            let mut truth = panelsel::synth::GroundTruth {
                beta: vec![0.0; spec.n_features],
                support: spec.true_support.iter().map(|&(j, _)| j).collect(),
                flip_feature: None,
                shadow_feature: Some(shadow),
                seed: spec.seed,
            };
            for &(j, b) in &spec.true_support {
                truth.beta[j] = b;
            }
            (ds, truth)
        }
        _ => gen_linear(&spec)?,
    };
    truth.support.sort_unstable();

    fs::create_dir_all(&args.out)?;
    let matrix_path = args.out.join("matrix.csv");
    let labels_path = args.out.join("labels.csv");
    write_dataset(&ds, &matrix_path, &labels_path)?;

    #[derive(Serialize)]
    struct TruthFile<'a> {
        spec: &'a SynthSpec,
        truth: &'a panelsel::synth::GroundTruth,
    }
    write_json(
        &TruthFile {
            spec: &spec,
            truth: &truth,
        },
        args.out.join("truth.json"),
    )?;

    println!(
        "synth: wrote {} samples x {} features to {}",
        ds.n_samples(),
        ds.n_features(),
        args.out.display()
    );
    Ok(())
}

fn cmd_network(args: NetworkArgs) -> Result<()> {
    let psi_text = fs::read_to_string(&args.psi).map_err(|e| {
        Error::Invalid(format!(
            "cannot read psi snapshot '{}' ({e}); run `panelsel select` first, it writes accumulator_fold_N.json",
            args.psi.display()
        ))
    })?;
    let psi: PsiFile = serde_json::from_str(&psi_text)?;
    let acc: Accumulator<f64> = Accumulator::from_snapshot(&psi.accumulator)?;

    let prior = load_network(&args.prior, &psi.feature_names, args.raw_threshold)?;
    if prior.dropped_rows > 0 {
        eprintln!(
            "warning: {} prior rows referenced unknown features and were dropped",
            prior.dropped_rows
        );
    }
    let prior = if args.binary {
        prior.binarized()
    } else {
        prior
    };

    let post = posterior(&prior, &acc);
    if post.edges.is_empty() {
        eprintln!("warning: no prior edge had co-selection evidence; the posterior is empty");
    }
    let modules = extract_modules(&post, &psi.feature_names, args.min_psi);

    fs::create_dir_all(&args.out)?;
    let mut tsv = format!(
        "# prior = {}, psi = {}, raw_threshold = {}, min_psi = {}, seed = {}\n",
        args.prior.display(),
        args.psi.display(),
        args.raw_threshold,
        args.min_psi,
        psi.seed
    );
    tsv.push_str("name_a\tname_b\tprior\tpsi\tproduct\n");
    for e in &post.edges {
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            psi.feature_names[e.a as usize],
            psi.feature_names[e.b as usize],
            e.prior,
            e.psi,
            e.product
        ));
    }
    fs::write(args.out.join("posterior.tsv"), tsv)?;

    #[derive(Serialize)]
    struct ModuleFile<'a> {
        min_psi: f64,
        seed: u64,
        n_posterior_edges: usize,
        modules: &'a [panelsel::network::Module],
    }
    write_json(
        &ModuleFile {
            min_psi: args.min_psi,
            seed: psi.seed,
            n_posterior_edges: post.edges.len(),
            modules: &modules,
        },
        args.out.join("modules.json"),
    )?;

    println!(
        "network: {} posterior edges, {} modules at min_psi {}",
        post.edges.len(),
        modules.len(),
        args.min_psi
    );
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("bench") => {
            let report: BenchReport = serde_json::from_value(value)?;
            print!(
                "{}",
                panelsel::report::render_table(&report.methods, &report.comparisons)
            );
        }
        Some("select") => {
            let report: RunReport = serde_json::from_value(value)?;
            let methods = vec![MethodReport {
                summary: report.summary.clone(),
                outcome: report.outcome,
            }];
            print!("{}", panelsel::report::render_table(&methods, &[]));
            let consensus: BTreeSet<&String> = methods[0].outcome.consensus_panel.iter().collect();
            println!("\nconsensus panel ({}):", consensus.len());
            for name in consensus {
                println!("  {name}");
            }
        }
        _ => {
            return Err(Error::Invalid(
                "input is not a report written by select or bench".into(),
            ))
        }
    }
    Ok(())
}
