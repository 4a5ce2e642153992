mod common;

use std::process::{Command, Output};

use common::{s, Fixture};
use vlawe::codebook_file::load_codebook;
use vlawe::dump::read_dump;
use vlawe::report::Report;

fn vlawe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlawe"))
        .args(args)
        .env_remove("VLAWE_EMBEDDINGS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = vlawe(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn base<'a>(f: &'a Fixture, cmd: &'a str) -> Vec<&'a str> {
    vec![cmd, "--embeddings", s(&f.table), "--corpus", s(&f.corpus)]
}

#[test]
fn eval_reports_defaults_and_separates_toy_corpus() {
    let f = Fixture::new(60);
    let mut args = base(&f, "eval");
    args.extend(["--k", "2", "--folds", "5"]);
    let r = Report::parse(&ok(&args));
    for (k, v) in [
        ("spec.alpha", "0.5"),
        ("spec.c", "1"),
        ("spec.folds", "5"),
        ("spec.seed", "0"),
        ("spec.encoder", "vlawe"),
        ("spec.codebook_scope", "per-fold"),
        ("spec.task", "binary"),
        ("result.metric", "accuracy"),
        ("result.feature_dim", "6"),
    ] {
        assert_eq!(r.get(k), Some(v), "{k}");
    }
    assert_eq!(r.get("result.value"), Some("1"));
    let per_fold: Vec<f64> = r
        .get("result.per_fold")
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(per_fold.len(), 5);
    let mean = per_fold.iter().sum::<f64>() / 5.0;
    let value: f64 = r.get("result.value").unwrap().parse().unwrap();
    assert!((mean - value).abs() <= 1e-9);
    assert!(r.get("timing.run_seconds").is_none());
}

#[test]
fn report_is_byte_identical_across_runs_and_worker_counts() {
    let f = Fixture::new(40);
    let mut a = base(&f, "eval");
    a.extend(["--k", "3", "--folds", "4", "--seed", "9", "--jobs", "1"]);
    let first = ok(&a);
    assert_eq!(first, ok(&a));
    *a.last_mut().unwrap() = "4";
    assert_eq!(first, ok(&a));

    let rep = f.path("r.txt");
    let mut b = base(&f, "eval");
    b.extend([
        "--k",
        "3",
        "--folds",
        "4",
        "--seed",
        "9",
        "--report",
        s(&rep),
    ]);
    let printed = ok(&b);
    assert_eq!(printed, std::fs::read_to_string(&rep).unwrap());
    assert_eq!(printed, first);
}

#[test]
fn timings_only_on_request() {
    let f = Fixture::new(20);
    let mut a = base(&f, "eval");
    a.extend(["--k", "2", "--folds", "2", "--timings"]);
    let r = Report::parse(&ok(&a));
    assert!(r.get("timing.run_seconds").is_some());
}

#[test]
fn environment_supplies_embedding_path() {
    let f = Fixture::new(20);
    let out = Command::new(env!("CARGO_BIN_EXE_vlawe"))
        .args(["eval", "--corpus", s(&f.corpus), "--k", "2", "--folds", "2"])
        .env("VLAWE_EMBEDDINGS", &f.table)
        .output()
        .unwrap();
    assert!(out.status.success());
    let r = Report::parse(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(r.get("spec.embeddings"), Some(s(&f.table)));
}

#[test]
fn codebook_then_encode() {
    let f = Fixture::new(30);
    let cb_path = f.path("cb.bin");
    let mut a = base(&f, "codebook");
    a.extend(["--k", "2", "--out", s(&cb_path)]);
    let r = Report::parse(&ok(&a));
    assert_eq!(r.get("codebook.k"), Some("2"));
    assert_eq!(r.get("codebook.d"), Some("3"));
    assert_eq!(r.get("codebook.embedding_dim"), Some("6"));
    let cb = load_codebook(&cb_path).unwrap();
    assert_eq!(
        r.get("codebook.inertia").unwrap().parse::<f64>().unwrap(),
        cb.inertia
    );

    let dump_path = f.path("d.txt");
    let mut e = base(&f, "encode");
    e.extend(["--codebook", s(&cb_path), "--out", s(&dump_path)]);
    let r = Report::parse(&ok(&e));
    assert_eq!(r.get("encode.rows"), Some("30"));
    assert_eq!(r.get("encode.zero_rows"), Some("0"));
    assert_eq!(r.get("coverage.oov_tokens"), Some("30"));
    let dump = read_dump(&dump_path).unwrap();
    assert_eq!(dump.rows.len(), 30);
    assert_eq!(dump.dim(), Some(6));
    assert_eq!(dump.rows[0].0, "doc0");
    for (_, v) in &dump.rows {
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-9);
    }

    let first = std::fs::read(&dump_path).unwrap();
    ok(&e);
    assert_eq!(first, std::fs::read(&dump_path).unwrap());

    let mut m = base(&f, "encode");
    m.extend(["--encoder", "mean", "--out", s(&dump_path)]);
    ok(&m);
    assert_eq!(read_dump(&dump_path).unwrap().dim(), Some(3));
}

#[test]
fn sweep_writes_one_row_per_k_and_matches_eval() {
    let f = Fixture::new(40);
    let csv = f.path("s.csv");
    let mut a = base(&f, "sweep-k");
    a.extend(["--ks", "1-3,5", "--folds", "4", "--out", s(&csv)]);
    ok(&a);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,metric,stddev");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("5,"));

    let mut one = base(&f, "sweep-k");
    one.extend(["--ks", "3", "--folds", "4", "--out", s(&csv)]);
    ok(&one);
    let row = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .to_string();
    let mut e = base(&f, "eval");
    e.extend(["--k", "3", "--folds", "4"]);
    let r = Report::parse(&ok(&e));
    assert_eq!(
        row,
        format!(
            "3,{},{}",
            r.get("result.value").unwrap(),
            r.get("result.stddev").unwrap()
        )
    );

    let before = std::fs::read(&csv).unwrap();
    ok(&one);
    assert_eq!(before, std::fs::read(&csv).unwrap());
}

#[test]
fn predefined_split_has_no_folds() {
    let f = Fixture::new(0);
    let mut text = String::new();
    for (i, line) in common::corpus_text(24, 3).lines().enumerate() {
        let hint = if i < 16 { "train" } else { "test" };
        text.push_str(&line.replacen("\t-\t", &format!("\t{hint}\t"), 1));
        text.push('\n');
    }
    let corpus = f.write("split.tsv", &text);
    let r = Report::parse(&ok(&[
        "eval",
        "--embeddings",
        s(&f.table),
        "--corpus",
        s(&corpus),
        "--k",
        "2",
    ]));
    assert_eq!(r.get("result.per_fold"), Some("none"));
    assert_eq!(r.get("result.protocol"), Some("predefined-split"));
    assert_eq!(r.get("fold.0.test"), Some("8"));
    assert!(r.get("fold.1.test").is_none());
}

#[test]
fn multilabel_corpus_reports_micro_f1() {
    let f = Fixture::new(0);
    let mut text = String::new();
    for i in 0..24 {
        let labels = match i % 3 {
            0 => "pos",
            1 => "neg",
            _ => "neg,pos",
        };
        let words = match i % 3 {
            0 => "good the film great",
            1 => "bad the movie awful",
            _ => "good bad the plot",
        };
        text.push_str(&format!("m{i}\t{labels}\t-\t{words}\n"));
    }
    let corpus = f.write("ml.tsv", &text);
    let r = Report::parse(&ok(&[
        "eval",
        "--embeddings",
        s(&f.table),
        "--corpus",
        s(&corpus),
        "--k",
        "2",
        "--folds",
        "3",
    ]));
    assert_eq!(r.get("spec.task"), Some("multilabel"));
    assert_eq!(r.get("result.metric"), Some("micro_f1"));
}

#[test]
fn baselines_and_pca_run() {
    let f = Fixture::new(40);
    for extra in [
        &["--encoder", "mean"][..],
        &["--encoder", "bow"],
        &["--encoder", "histogram", "--k", "3"],
        &["--k", "4", "--pca-dim", "5"],
        &["--codebook-scope", "shared", "--k", "2"],
        &["--shared-codebook", "--dedup", "tokens", "--k", "2"],
    ] {
        let mut a = base(&f, "eval");
        a.extend(["--folds", "4"]);
        a.extend(extra);
        let r = Report::parse(&ok(&a));
        let v: f64 = r.get("result.value").unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&v), "{extra:?}");
    }
}

#[test]
fn exit_codes() {
    let f = Fixture::new(20);
    assert_eq!(vlawe(&["--help"]).status.code(), Some(0));
    assert_eq!(vlawe(&["--version"]).status.code(), Some(0));
    assert_eq!(vlawe(&[]).status.code(), Some(1));
    assert_eq!(
        vlawe(&["eval", "--corpus", s(&f.corpus)]).status.code(),
        Some(1)
    );
    assert_eq!(vlawe(&["frobnicate"]).status.code(), Some(1));

    let usage: &[&[&str]] = &[
        &["--k", "0"],
        &["--alpha", "1.5"],
        &["--c", "-1"],
        &["--folds", "1"],
        &["--encoder", "nope"],
        &["--pca-dim", "7", "--k", "2"],
        &["--jobs", "0"],
    ];
    for extra in usage {
        let mut a = base(&f, "eval");
        a.extend(*extra);
        assert_eq!(vlawe(&a).status.code(), Some(1), "{extra:?}");
    }
    let mut bow = base(&f, "encode");
    let x = f.path("x");
    bow.extend(["--encoder", "bow", "--out", s(&x)]);
    assert_eq!(vlawe(&bow).status.code(), Some(1));

    let missing = f.path("missing.tsv");
    assert_eq!(
        vlawe(&["eval", "--embeddings", s(&f.table), "--corpus", s(&missing)])
            .status
            .code(),
        Some(2)
    );
    let bad = f.write("bad.tsv", "a\tpos\t-\tgood\nb only two\n");
    let out = vlawe(&["eval", "--embeddings", s(&f.table), "--corpus", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let mut dim = base(&f, "eval");
    dim.extend(["--expected-dim", "300"]);
    assert_eq!(vlawe(&dim).status.code(), Some(2));

    // more clusters than distinct in-vocabulary words
    let mut big = base(&f, "codebook");
    let cb = f.path("cb");
    big.extend(["--k", "500", "--out", s(&cb)]);
    assert_eq!(vlawe(&big).status.code(), Some(2));
}
