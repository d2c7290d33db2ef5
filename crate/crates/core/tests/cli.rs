//! End-to-end runs of the installed binary: generate data, select,
//! filter a network prior, benchmark, render, and check the error paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_panelsel")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).to_string()
}

struct Workspace {
    dir: PathBuf,
}

impl Workspace {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("panelsel_cli_{}_{tag}", std::process::id()));
        std::fs::remove_dir_all(&dir).ok();
        std::fs::create_dir_all(&dir).unwrap();
        Workspace { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    fn arg(&self, rel: &str) -> String {
        self.path(rel).display().to_string()
    }
}

impl Drop for Workspace {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.dir).ok();
    }
}

fn synth(ws: &Workspace, out: &str, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "--variant",
        "linear",
        "--samples",
        "120",
        "--features",
        "20",
        "--planted",
        "3",
        "--effect",
        "1.8",
        "--noise-sd",
        "0.5",
        "--seed",
        "5",
        "--out",
    ];
    let out_arg = ws.arg(out);
    args.push(&out_arg);
    args.extend_from_slice(extra);
    ok(&args);
    assert!(ws.path(&format!("{out}/matrix.csv")).exists());
    assert!(ws.path(&format!("{out}/labels.csv")).exists());
    assert!(ws.path(&format!("{out}/truth.json")).exists());
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn select_writes_reproducible_artifacts() {
    let ws = Workspace::new("select");
    synth(&ws, "data", &[]);
    let make_args = |out: String| -> Vec<String> {
        vec![
            "select".into(),
            "--matrix".into(),
            ws.arg("data/matrix.csv"),
            "--labels".into(),
            ws.arg("data/labels.csv"),
            "--out".into(),
            out,
            "--seed".into(),
            "11".into(),
            "--outer-folds".into(),
            "5".into(),
            "--episodes".into(),
            "3".into(),
            "--max-iterations".into(),
            "4".into(),
            "--n-alphas".into(),
            "25".into(),
        ]
    };
    let args_a: Vec<String> = make_args(ws.arg("sel"));
    let args_ref: Vec<&str> = args_a.iter().map(String::as_str).collect();
    ok(&args_ref);

    for artifact in [
        "sel/report.json",
        "sel/panels.csv",
        "sel/theta_trajectory.csv",
        "sel/accumulator_fold_0.json",
        "sel/accumulator_fold_4.json",
    ] {
        assert!(ws.path(artifact).exists(), "missing {artifact}");
    }
    let report = read_json(&ws.path("sel/report.json"));
    assert_eq!(report["kind"], "select");
    assert_eq!(report["seed"], 11);
    assert_eq!(report["config"]["episode"]["episodes"], 3);
    assert_eq!(report["outcome"]["per_fold"].as_array().unwrap().len(), 5);

    // identical config and seed give byte-identical reports
    let first = std::fs::read(ws.path("sel/report.json")).unwrap();
    std::fs::remove_dir_all(ws.path("sel")).unwrap();
    ok(&args_ref);
    let second = std::fs::read(ws.path("sel/report.json")).unwrap();
    assert_eq!(first, second);

    // panels and theta files carry the config echo
    let panels = std::fs::read_to_string(ws.path("sel/panels.csv")).unwrap();
    assert!(panels.starts_with("# config"));
    assert!(panels.contains("\n# seed = 11\n"));
}

#[test]
fn default_hyperparameters_match_the_documented_values() {
    let ws = Workspace::new("defaults");
    synth(&ws, "data", &[]);
    ok(&[
        "select",
        "--matrix",
        &ws.arg("data/matrix.csv"),
        "--labels",
        &ws.arg("data/labels.csv"),
        "--out",
        &ws.arg("sel"),
        "--outer-folds",
        "4",
        "--episodes",
        "2",
        "--max-iterations",
        "3",
        "--n-alphas",
        "15",
    ]);
    let report = read_json(&ws.path("sel/report.json"));
    let ep = &report["config"]["episode"];
    assert_eq!(ep["learning_rate"], 0.5);
    assert_eq!(ep["baseline_decay"], 0.9);
    assert_eq!(ep["tolerance"], 0.02);
    assert_eq!(ep["sparsity_weight"], 0.001);
    assert_eq!(ep["inner_folds"], 5);
    assert_eq!(ep["min_genes"], 3);
    assert_eq!(report["config"]["seed"], 42);
    assert_eq!(report["config"]["consensus_num"], 6);
    assert_eq!(report["config"]["consensus_den"], 10);
}

#[test]
fn network_command_consumes_select_output() {
    let ws = Workspace::new("network");
    synth(&ws, "data", &[]);
    ok(&[
        "select",
        "--matrix",
        &ws.arg("data/matrix.csv"),
        "--labels",
        &ws.arg("data/labels.csv"),
        "--out",
        &ws.arg("sel"),
        "--seed",
        "3",
        "--outer-folds",
        "4",
        "--episodes",
        "2",
        "--max-iterations",
        "3",
        "--n-alphas",
        "15",
    ]);
    // a small prior over the synthetic feature names
    std::fs::write(
        ws.path("prior.tsv"),
        "protein_a\tprotein_b\tcombined_score\nf0000\tf0001\t900\nf0000\tf0002\t800\nf0001\tf0002\t750\nf0005\tf0006\t950\nf0000\tf0019\t650\nzzz\tf0000\t990\n",
    )
    .unwrap();
    let stdout = ok(&[
        "network",
        "--prior",
        &ws.arg("prior.tsv"),
        "--psi",
        &ws.arg("sel/accumulator_fold_0.json"),
        "--min-psi",
        "0.1",
        "--out",
        &ws.arg("net"),
    ]);
    assert!(stdout.contains("posterior edges"));
    let tsv = std::fs::read_to_string(ws.path("net/posterior.tsv")).unwrap();
    assert!(tsv.contains("name_a\tname_b\tprior\tpsi\tproduct"));
    // the 650-score row sits below the default threshold of 700
    assert!(!tsv.contains("f0019"));
    let modules = read_json(&ws.path("net/modules.json"));
    assert!(modules["modules"].is_array());

    // a missing psi snapshot points at the select requirement
    let out = run(&[
        "network",
        "--prior",
        &ws.arg("prior.tsv"),
        "--psi",
        &ws.arg("missing.json"),
        "--out",
        &ws.arg("net2"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("panelsel select"));
}

#[test]
fn bench_compares_methods_on_shared_splits() {
    let ws = Workspace::new("bench");
    synth(&ws, "data", &[]);
    let stdout = ok(&[
        "bench",
        "--matrix",
        &ws.arg("data/matrix.csv"),
        "--labels",
        &ws.arg("data/labels.csv"),
        "--out",
        &ws.arg("bench"),
        "--seed",
        "7",
        "--outer-folds",
        "4",
        "--episodes",
        "2",
        "--max-iterations",
        "3",
        "--n-alphas",
        "15",
        "--methods",
        "rl,enet,mrmr",
        "--mrmr-k",
        "matched:rl",
        "--stability-subsamples",
        "10",
    ]);
    assert!(stdout.contains("paired t-tests"));
    let report = read_json(&ws.path("bench/bench.json"));
    let methods = report["methods"].as_array().unwrap();
    assert_eq!(methods.len(), 3);
    // registration order is preserved in the report
    assert_eq!(methods[0]["outcome"]["method_name"], "rl");
    assert_eq!(methods[1]["outcome"]["method_name"], "enet");
    assert_eq!(methods[2]["outcome"]["method_name"], "mrmr");
    // matched budget: mrmr panel size equals the rounded rl mean
    let rl_mean: f64 = methods[0]["outcome"]["per_fold"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["panel"].as_array().unwrap().len() as f64)
        .sum::<f64>()
        / 4.0;
    let mrmr_sizes: Vec<usize> = methods[2]["outcome"]["per_fold"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["panel"].as_array().unwrap().len())
        .collect();
    for size in mrmr_sizes {
        assert_eq!(size, rl_mean.round() as usize);
    }
    // flat csv exists with the config echo
    let csv = std::fs::read_to_string(ws.path("bench/bench.csv")).unwrap();
    assert!(csv.starts_with("# config"));
    assert!(csv.contains("method,fold,auc,n_genes,runtime_seconds,fit_single,fit_cv"));

    // report command renders the same table
    let rendered = ok(&["report", "--input", &ws.arg("bench/bench.json")]);
    assert!(rendered.contains("mean_auc"));
    assert!(rendered.contains("rl"));
}

#[test]
fn unknown_method_lists_the_registry() {
    let ws = Workspace::new("unknown");
    synth(&ws, "data", &[]);
    let out = run(&[
        "bench",
        "--matrix",
        &ws.arg("data/matrix.csv"),
        "--labels",
        &ws.arg("data/labels.csv"),
        "--out",
        &ws.arg("bench"),
        "--methods",
        "rl,boruta",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("boruta"));
    assert!(stderr.contains("stability"));
}

#[test]
fn ingestion_failures_exit_nonzero_with_line_numbers() {
    let ws = Workspace::new("badinput");
    std::fs::write(
        ws.path("m.csv"),
        "sample_id,g1,g2\ns1,1.0,2.0\ns2,oops,1.0\ns3,0.5,0.5\ns4,1.5,0.1\n",
    )
    .unwrap();
    std::fs::write(ws.path("l.csv"), "s1,0\ns2,1\ns3,0\ns4,1\n").unwrap();
    let out = run(&[
        "select",
        "--matrix",
        &ws.arg("m.csv"),
        "--labels",
        &ws.arg("l.csv"),
        "--out",
        &ws.arg("sel"),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":3:"), "stderr was: {stderr}");

    // a label file missing one sample id names the sample
    std::fs::write(
        ws.path("m2.csv"),
        "sample_id,g1\ns1,1.0\ns2,2.0\ns3,0.5\ns4,1.5\n",
    )
    .unwrap();
    std::fs::write(ws.path("l2.csv"), "s1,0\ns2,1\ns3,0\n").unwrap();
    let out = run(&[
        "select",
        "--matrix",
        &ws.arg("m2.csv"),
        "--labels",
        &ws.arg("l2.csv"),
        "--out",
        &ws.arg("sel"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("s4"));
}

#[test]
fn config_file_drives_a_run_and_flags_override() {
    let ws = Workspace::new("config");
    synth(&ws, "data", &[]);
    std::fs::write(
        ws.path("run.ini"),
        format!(
            "[data]\nmatrix = {}\nlabels = {}\n\n[run]\nseed = 9\nouter_folds = 4\nout_dir = {}\n\n[rl]\nepisodes = 2\nmax_iterations = 3\nn_alphas = 15\n",
            ws.arg("data/matrix.csv"),
            ws.arg("data/labels.csv"),
            ws.arg("from_file")
        ),
    )
    .unwrap();
    ok(&["select", "--config", &ws.arg("run.ini")]);
    let report = read_json(&ws.path("from_file/report.json"));
    assert_eq!(report["seed"], 9);

    // a flag beats the file value
    ok(&[
        "select",
        "--config",
        &ws.arg("run.ini"),
        "--seed",
        "21",
        "--out",
        &ws.arg("overridden"),
    ]);
    let report = read_json(&ws.path("overridden/report.json"));
    assert_eq!(report["seed"], 21);
}

#[test]
fn transposed_matrices_load_via_flag() {
    let ws = Workspace::new("transposed");
    // features on rows, samples on columns
    let n = 24;
    let ids: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    let mut row_a = String::from("gA");
    let mut row_b = String::from("gB");
    let mut labels = String::new();
    for (i, id) in ids.iter().enumerate() {
        let label = i % 2;
        let a = label as f64 * 1.6 + (i % 5) as f64 * 0.11;
        let b = (i % 7) as f64 * 0.2 - 0.6;
        row_a.push_str(&format!(",{a}"));
        row_b.push_str(&format!(",{b}"));
        labels.push_str(&format!("{id},{label}\n"));
    }
    std::fs::write(
        ws.path("mt.csv"),
        format!("gene,{}\n{row_a}\n{row_b}\n", ids.join(",")),
    )
    .unwrap();
    std::fs::write(ws.path("lt.csv"), labels).unwrap();
    ok(&[
        "select",
        "--matrix",
        &ws.arg("mt.csv"),
        "--labels",
        &ws.arg("lt.csv"),
        "--transposed",
        "--out",
        &ws.arg("sel"),
        "--outer-folds",
        "2",
        "--episodes",
        "1",
        "--max-iterations",
        "2",
        "--inner-folds",
        "2",
        "--n-alphas",
        "10",
    ]);
    let report = read_json(&ws.path("sel/report.json"));
    assert_eq!(report["outcome"]["per_fold"].as_array().unwrap().len(), 2);
}

#[test]
fn sign_flip_and_shadow_variants_emit_ground_truth() {
    let ws = Workspace::new("variants");
    ok(&[
        "synth",
        "--variant",
        "sign-flip",
        "--samples",
        "60",
        "--features",
        "10",
        "--seed",
        "4",
        "--out",
        &ws.arg("flip"),
    ]);
    let truth = read_json(&ws.path("flip/truth.json"));
    assert_eq!(truth["truth"]["flip_feature"], 4);

    ok(&[
        "synth",
        "--variant",
        "shadow",
        "--samples",
        "60",
        "--features",
        "10",
        "--seed",
        "4",
        "--out",
        &ws.arg("shadow"),
    ]);
    let truth = read_json(&ws.path("shadow/truth.json"));
    assert_eq!(truth["truth"]["shadow_feature"], 3);
}
