use std::path::Path;
use std::process::{Command, Output};

use mdsts_cli::ingest::parse_stacked;
use mdsts_core::synth::{generate, CorpusSpec, Generator};

fn mdsts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdsts")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn error_record(o: &Output) -> serde_json::Value {
    let line = stderr(o).lines().last().unwrap_or_default().to_owned();
    serde_json::from_str(&line).unwrap_or_else(|_| panic!("not a JSON record: {line}"))
}

fn data_rows(path: &Path) -> usize {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    rdr.records().count()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> std::path::PathBuf {
    let out = dir.join(name);
    let mut full = vec!["generate", "-o", p(&out)];
    full.extend_from_slice(args);
    let o = mdsts(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

const PROTOCOL: &[&str] = &[
    "--entities",
    "42",
    "--components",
    "3",
    "--length",
    "585",
    "--generator",
    "markov:0.95",
    "--generator",
    "bursty_sparse:0.6",
    "--generator",
    "markov:0.85",
    "--seed",
    "11",
];

#[test]
fn constant_spec_writes_thirty_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--entities", "1", "--components", "3", "--length", "10", "--generator", "constant", "--seed", "7"];
    let a = std::fs::read_to_string(gen(dir.path(), "a.csv", &args)).unwrap();
    let b = std::fs::read_to_string(gen(dir.path(), "b.csv", &args)).unwrap();
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.ends_with(",1")));
}

#[test]
fn generated_corpus_ingests_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "c.csv", PROTOCOL);
    let spec = CorpusSpec {
        entity_count: 42,
        component_count: 3,
        length: 585,
        generators: vec![
            Generator::Markov { bias: 0.95 },
            Generator::BurstySparse { zero_density: 0.6 },
            Generator::Markov { bias: 0.85 },
        ],
        seed: 11,
    };
    let ingested = parse_stacked(&std::fs::read_to_string(&path).unwrap(), "c.csv").unwrap();
    assert!(ingested.warnings.is_empty());
    assert_eq!(ingested.entities.len(), 42);
    assert!(ingested.entities.iter().all(|m| m.len() == 585));
    assert_eq!(ingested.entities, generate(&spec).unwrap());
}

#[test]
fn markers_on_protocol_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen(dir.path(), "c.csv", PROTOCOL);
    let out = dir.path().join("out");
    let o = mdsts(&["markers", "-i", p(&corpus), "--set", "holdout_tail=52", "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("summary.csv")), 42);
    assert_eq!(data_rows(&out.join("entropy_vs_total.csv")), 42);
    assert_eq!(std::fs::read_dir(out.join("walks")).unwrap().count(), 42);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("reports.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["config_echo"]["holdout_tail"], 52);
    assert_eq!(summary["reports"].as_array().unwrap().len(), 42);
    assert_eq!(summary["attributed_count"], 42);
    let config = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(std::fs::read_to_string(out.join("simplex.svg")).unwrap().contains(&config));
}

#[test]
fn walk_and_zipf_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen(
        dir.path(),
        "c.csv",
        &["--entities", "3", "--components", "3", "--length", "600", "--generator", "markov:0.9", "--seed", "3"],
    );
    let out = dir.path().join("walk");
    let o = mdsts(&["walk", "-i", p(&corpus), "-o", p(&out), "--execution", "sequential"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // k = (599 - 350) / 52 + 1 = 5 windows per entity.
    assert_eq!(data_rows(&out.join("walk.csv")), 15);
    assert_eq!(data_rows(&out.join("trend.csv")), 3);
    assert!(out.join("walks.svg").exists());

    let out = dir.path().join("zipf");
    let o = mdsts(&["zipf", "-i", p(&corpus), "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("diversification.csv")), 3);
    let census = out.join("census").join("e01__c1.csv");
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&census).unwrap();
    let counts: Vec<usize> = rdr.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    // 599 differenced symbols, words of length 12.
    assert_eq!(counts.iter().sum::<usize>(), 588);
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn wide_layout_single_entity() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("brand7.csv");
    let mut text = String::from("time,tv,radio,press\n");
    for t in 0..80 {
        text.push_str(&format!("{t},{},{},{}\n", (t * 7) % 13, (t * t) % 17, if t % 5 == 0 { 0 } else { t % 3 }));
    }
    std::fs::write(&wide, text).unwrap();
    let out = dir.path().join("out");
    let o = mdsts(&["markers", "-i", p(&wide), "--layout", "wide", "--set", "window_length=40", "--set", "window_step=10", "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(out.join("summary.csv")).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "brand7");
}

#[test]
fn simplex_plot_needs_three_components() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen(
        dir.path(),
        "n4.csv",
        &["--entities", "2", "--components", "4", "--length", "100", "--generator", "iid_uniform"],
    );
    let o = mdsts(&["simplex-plot", "-i", p(&corpus), "-o", p(&dir.path().join("x.svg"))]);
    assert_eq!(o.status.code(), Some(3));
    let rec = error_record(&o);
    assert!(rec["message"].as_str().unwrap().contains("plotting supports N = 3 only"), "{rec}");
    assert!(!dir.path().join("x.svg").exists());

    let ok = gen(dir.path(), "n3.csv", &["--entities", "2", "--components", "3", "--length", "100", "--generator", "iid_uniform"]);
    let o = mdsts(&["simplex-plot", "-i", p(&ok), "-o", p(&dir.path().join("x.svg"))]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn attribute_checks_holdout_length() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = gen(
        dir.path(),
        "c.csv",
        &["--entities", "2", "--components", "3", "--length", "600", "--generator", "markov:0.95", "--seed", "5"],
    );
    let short = gen(
        dir.path(),
        "q.csv",
        &["--entities", "2", "--components", "3", "--length", "52", "--generator", "markov:0.95", "--seed", "6"],
    );
    let o = mdsts(&["attribute", "-i", p(&corpus), "--holdout", p(&short), "-o", p(&dir.path().join("a"))]);
    assert_eq!(o.status.code(), Some(3));
    let rec = error_record(&o);
    let msg = rec["message"].as_str().unwrap();
    assert!(msg.contains("length 52") && msg.contains("length 351"), "{msg}");
    assert_eq!(rec["entity_id"], "e01");

    let good = gen(
        dir.path(),
        "q2.csv",
        &["--entities", "2", "--components", "3", "--length", "351", "--generator", "markov:0.95", "--seed", "6"],
    );
    let out = dir.path().join("a");
    let o = mdsts(&["attribute", "-i", p(&corpus), "--holdout", p(&good), "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&out.join("verdicts.csv")), 2);
}

#[test]
fn exit_codes_and_error_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = mdsts(&["markers", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"], "usage");

    let missing = dir.path().join("nope.csv");
    let o = mdsts(&["markers", "-i", p(&missing), "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"], "data");

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "entity_id,time,component,value\na,0,x,1\na,0,y,oops\n").unwrap();
    let o = mdsts(&["markers", "-i", p(&bad), "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_record(&o)["message"].as_str().unwrap().contains("bad.csv:3"));

    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "alphabet_size = 4\nwindow_lenght = 10\n").unwrap();
    let o = mdsts(&["config", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_record(&o)["message"].as_str().unwrap().contains("window_lenght"));

    let o = mdsts(&["config", "--set", "alphabet_size=6"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("alphabet_size = 6\n"));
}

#[test]
fn failing_entities_are_reported_but_others_written() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mixed.csv");
    let mut text = String::from("entity_id,time,component,value\n");
    for t in 0..400 {
        text.push_str(&format!("good,{t},a,{}\ngood,{t},b,{}\n", (t * 37) % 11, (t * t) % 7));
    }
    text.push_str("tiny,0,a,1\ntiny,0,b,2\ntiny,1,a,3\n");
    std::fs::write(&input, text).unwrap();
    let out = dir.path().join("out");
    let o = mdsts(&["markers", "-i", p(&input), "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_record(&o)["entity_id"], "tiny");
    assert!(stderr(&o).contains("1 missing cells set to 0.0"));
    assert_eq!(data_rows(&out.join("summary.csv")), 1);
}
