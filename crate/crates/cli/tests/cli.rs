use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lextopic_core::corpus::synth::{generate_synthetic_corpus, generate_typed_corpus, SynthConfig, TypeYearCount};
use lextopic_core::corpus::{Corpus, CorpusFormat, LawRecord, LawType, RecordDate};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lextopic"));
    cmd.env_remove("LEXTOPIC_CONFIG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "lextopic {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn record(id: &str, law_type: LawType, date: &str, text: &str) -> LawRecord {
    LawRecord {
        id: id.into(),
        title: format!("title {id}"),
        content: text.into(),
        lead: String::new(),
        tags: vec!["t".into()],
        classes: vec![],
        law_type,
        category: "general".into(),
        date: RecordDate::parse(date).unwrap(),
    }
}

fn save(corpus: &Corpus, dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    corpus.save(&path, CorpusFormat::from_path(&path)).unwrap();
    path
}

/// Synthetic regulations with three planted topics.
fn synthetic(dir: &Path, docs: usize) -> PathBuf {
    let cfg = SynthConfig {
        docs,
        ..SynthConfig::default()
    };
    let (corpus, _) = generate_synthetic_corpus(&cfg).unwrap();
    save(&corpus, dir, "synthetic.jsonl")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_three_records() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = Corpus::new(
        vec![
            record("a", LawType::Regulation, "1400/05/01", "one two three"),
            record("b", LawType::Law, "1401/05/01", "four five"),
            record("c", LawType::Regulation, "1401/05/02", "six"),
        ],
        "fixture",
    )
    .unwrap();
    let path = save(&corpus, dir.path(), "three.csv");
    let out = dir.path().join("out");
    let stdout = ok(&["ingest", "--corpus", s(&path), "--out", s(&out)]);
    assert!(stdout.contains("records\t3"));
    let stats = fs::read_to_string(out.join("stats.csv")).unwrap();
    assert_eq!(stats, "type,2021,2022\nLaw,0,1\nRegulation,1,1\n");
    let ratios = fs::read_to_string(out.join("ratios.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 4);
    assert!(ratios.starts_with("id,length_ratio\na,"));
}

#[test]
fn ingest_eight_year_span() {
    let dir = tempfile::tempdir().unwrap();
    let records = (1395..=1402)
        .map(|y| record(&format!("r{y}"), LawType::Regulation, &format!("{y}/06/01"), "text here"))
        .collect();
    let path = save(&Corpus::new(records, "span").unwrap(), dir.path(), "span.jsonl");
    let out = dir.path().join("out");
    ok(&["ingest", "--corpus", s(&path), "--out", s(&out)]);
    let stats = fs::read_to_string(out.join("stats.csv")).unwrap();
    assert_eq!(
        stats.lines().next().unwrap(),
        "type,2016,2017,2018,2019,2020,2021,2022,2023"
    );
}

#[test]
fn ingest_full_size_typed_corpus() {
    // 11760 records, 6599 of them regulations.
    let mut plan = Vec::new();
    let others = [
        (LawType::Law, 1500),
        (LawType::Opinion, 1200),
        (LawType::Vote, 900),
        (LawType::Bill, 561),
        (LawType::News, 500),
        (LawType::Plan, 300),
        (LawType::Draft, 100),
        (LawType::ParliamentDeliberation, 100),
    ];
    plan.push(TypeYearCount {
        law_type: LawType::Regulation,
        jalali_year: 1400,
        count: 6599,
    });
    for (law_type, count) in others {
        plan.push(TypeYearCount {
            law_type,
            jalali_year: 1399,
            count,
        });
    }
    let corpus = generate_typed_corpus(&plan, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = save(&corpus, dir.path(), "typed.jsonl");
    let out = dir.path().join("out");
    let stdout = ok(&["ingest", "--corpus", s(&path), "--out", s(&out)]);
    assert!(stdout.contains("records\t11760"));
    assert!(stdout.contains("Regulation\t6599"));
}

#[test]
fn bad_corpus_fails_with_module_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, "{\"id\": \"x\"}\n").unwrap();
    let out = run(&["ingest", "--corpus", s(&path), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: corpus:"));

    let out = run(&["fit", "--corpus", "/nonexistent/c.jsonl"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("config:"));
}

fn fit_args<'a>(corpus: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "fit", "--corpus", corpus, "--out", out, "--topics", "3", "--sweeps", "40", "--burn-in", "20",
    ]
}

#[test]
fn fit_and_analyze_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 60);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&fit_args(s(&corpus), s(&a)));
    ok(&fit_args(s(&corpus), s(&b)));
    for f in ["model.json", "loglik.csv", "vocab.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    // The echoed configs differ only in out_dir.
    let echo = |dir: &Path| fs::read_to_string(dir.join("config.toml")).unwrap().replace(s(dir), "OUT");
    assert_eq!(echo(&a), echo(&b));

    let labels = dir.path().join("labels.tsv");
    fs::write(&labels, "0\tEconomic\n").unwrap();
    for out in [&a, &b] {
        ok(&["analyze", "--corpus", s(&corpus), "--out", s(out), "--labels", s(&labels), "--top-m", "5"]);
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"wordcloud_2.csv".to_string()));
    for f in names.iter().filter(|f| *f != "config.toml") {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    let topics = fs::read_to_string(a.join("topics.json")).unwrap();
    assert!(topics.contains("\"Economic\""));
    let shares = fs::read_to_string(a.join("shares.csv")).unwrap();
    let total: f64 = shares
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 100.0).abs() < 0.1);
}

#[test]
fn default_topics_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 20);
    let out = dir.path().join("out");
    ok(&["fit", "--corpus", s(&corpus), "--out", s(&out), "--sweeps", "4", "--burn-in", "2"]);
    let echo = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.contains("topics = 10"));
    assert!(echo.contains("seed = 42"));
}

#[test]
fn mode_is_recorded_in_model() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 20);
    let out = dir.path().join("out");
    let mut args = fit_args(s(&corpus), s(&out));
    args.extend(["--mode", "tfidf-pseudo"]);
    ok(&args);
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["config"]["input_mode"], "tfidf-pseudo");
}

#[test]
fn analyze_rejects_other_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 30);
    let out = dir.path().join("out");
    ok(&fit_args(s(&corpus), s(&out)));
    let res = run(&["analyze", "--corpus", s(&corpus), "--out", s(&out), "--min-df", "25"]);
    assert!(!res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("lda: vocabulary"), "{err}");
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 20);
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "corpus_path = {:?}\nout_dir = {:?}\n[lda]\ntopics = 2\nsweeps = 6\nburn_in = 3\nseed = 11\n",
            s(&corpus),
            s(&out)
        ),
    )
    .unwrap();
    let res = bin()
        .args(["fit", "--seed", "12"])
        .env("LEXTOPIC_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let echo = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.contains("topics = 2"));
    assert!(echo.contains("seed = 12"));
}

#[test]
fn chains_write_separate_models() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 20);
    let out = dir.path().join("out");
    let mut args = fit_args(s(&corpus), s(&out));
    args.extend(["--chains", "2"]);
    ok(&args);
    assert!(out.join("model_chain1.json").exists());
    assert_ne!(
        fs::read(out.join("model.json")).unwrap(),
        fs::read(out.join("model_chain1.json")).unwrap()
    );
}

#[test]
fn sweep_rows_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 30);
    let out = dir.path().join("out");
    let base = ["sweep", "--corpus", s(&corpus), "--out", s(&out), "--sweeps", "20", "--burn-in", "10"];

    ok(&[&base[..], &["--ks", "2"]].concat());
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.starts_with("k,mean_coherence,perplexity\n2,"));

    ok(&[&base[..], &["--ks", "5,2,3"]].concat());
    let ks: Vec<String> = fs::read_to_string(out.join("sweep.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_owned())
        .collect();
    assert_eq!(ks, ["2", "3", "5"]);
}

#[test]
fn sweep_prefers_true_topic_count() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synthetic(dir.path(), 200);
    let out = dir.path().join("out");
    ok(&[
        "sweep", "--corpus", s(&corpus), "--out", s(&out), "--ks", "3,30", "--sweeps", "300",
        "--burn-in", "150", "--alpha", "0.5", "--beta", "0.1",
    ]);
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let coherence: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(coherence[0] >= coherence[1], "{table}");
}
