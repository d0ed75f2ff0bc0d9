use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn newsgrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsgrid"))
        .args(args)
        .env_remove("NEWSGRID_CACHE")
        .output()
        .expect("binary runs")
}

fn corpus() -> String {
    fixtures().join("mini_corpus").display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap()
}

#[test]
fn help_lists_every_command() {
    let o = newsgrid(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in ["validate", "stats", "featurize", "train", "extract", "evaluate", "crossval", "translate"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn stats_json_matches_expected_file() {
    let o = newsgrid(&["stats", "--dataset", &corpus(), "--format", "json"]);
    assert!(o.status.success());
    let expected = std::fs::read_to_string(fixtures().join("expected_stats.json")).unwrap();
    assert_eq!(json(&stdout(&o)), json(&expected));
}

#[test]
fn stats_language_filter() {
    let o = newsgrid(&["stats", "--dataset", &corpus(), "--format", "json", "--lang", "ru"]);
    let v = json(&stdout(&o));
    let langs: Vec<_> = v["languages"].as_object().unwrap().keys().cloned().collect();
    assert_eq!(langs, ["ru"]);
}

#[test]
fn missing_dataset_exits_2_naming_the_path() {
    let o = newsgrid(&["stats", "--dataset", "/no/such/dataset"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/dataset"));
}

#[test]
fn mini_corpus_validates_clean() {
    let o = newsgrid(&["validate", "--dataset", &corpus()]);
    assert_eq!(o.status.code(), Some(0));
    // A strict text length turns every page into a finding.
    let strict = newsgrid(&["validate", "--dataset", &corpus(), "--min-text-chars", "100000"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn heuristic_extract_matches_the_fixture_article() {
    let tmp = tempfile::tempdir().unwrap();
    let input = fixtures().join("en_simple.html");
    let o = newsgrid(&["extract", "--input", input.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1 pages, 0 failed");
    let got = std::fs::read_to_string(tmp.path().join("en_simple.json")).unwrap();
    let expected = std::fs::read_to_string(fixtures().join("en_simple.article.json")).unwrap();
    assert_eq!(json(&got), json(&expected));
}

#[test]
fn extract_mirrors_the_input_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let o = newsgrid(&["extract", "--input", &corpus(), "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "12 pages, 0 failed");
    let a = json(&std::fs::read_to_string(tmp.path().join("vestnik.ru/page_1.json")).unwrap());
    assert_eq!(a["url"], "https://www.vestnik.ru/news/1");
}

#[test]
fn unknown_method_exits_2() {
    let o = newsgrid(&["extract", "--input", &corpus(), "--method", "bert"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_input_directory_is_not_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = newsgrid(&["extract", "--input", tmp.path().to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0 pages, 0 failed");
}

#[test]
fn crossval_reproduces_the_frozen_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = newsgrid(&["crossval", "--dataset", &corpus(), "--k", "3", "--design", "mixed", "--method", "heuristic", "--out", out]);
    assert!(o.status.success());
    let got = std::fs::read_to_string(tmp.path().join("report.json")).unwrap();
    let frozen = std::fs::read_to_string(fixtures().join("heuristic_mixed_k3.json")).unwrap();
    assert_eq!(got, frozen);
    let txt = std::fs::read_to_string(tmp.path().join("report.txt")).unwrap();
    assert_eq!(txt, stdout(&o));
    assert!(txt.starts_with("design mixed | k 3 | method heuristic"));
}

#[test]
fn crossval_is_byte_identical_across_runs_and_threads() {
    let run = |threads: &str| {
        let o = newsgrid(&["crossval", "--dataset", &corpus(), "--k", "3", "--method", "softmax", "--format", "json", "--threads", threads]);
        assert!(o.status.success());
        o.stdout
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("3"));
}

#[test]
fn more_folds_than_sites_exits_2() {
    let o = newsgrid(&["crossval", "--dataset", &corpus(), "--k", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_rejects_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("run.json");
    std::fs::write(&good, format!(r#"{{"dataset": {:?}, "k": 3, "design": "lolo:zh"}}"#, corpus())).unwrap();
    let o = newsgrid(&["--config", good.to_str().unwrap(), "crossval"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("design lolo:zh | k 3"));

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"folds": 3}"#).unwrap();
    let o = newsgrid(&["--config", bad.to_str().unwrap(), "stats", "--dataset", &corpus()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("folds"));
}

#[test]
fn identity_translation_keeps_scores() {
    let plain = newsgrid(&["crossval", "--dataset", &corpus(), "--k", "3", "--format", "json"]);
    let en = newsgrid(&["crossval", "--dataset", &corpus(), "--k", "3", "--format", "json", "--translate"]);
    assert!(en.status.success());
    let (p, e) = (json(&stdout(&plain)), json(&stdout(&en)));
    assert_eq!(e["method"], "heuristic-en(identity)");
    assert_eq!(p["overall"], e["overall"]);
    assert_eq!(p["by_language"], e["by_language"]);
}

#[test]
fn train_then_extract_with_the_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let ckpt = tmp.path().join("model.json");
    let o = newsgrid(&["train", "--dataset", &corpus(), "--out", ckpt.to_str().unwrap(), "--epochs", "3"]);
    assert!(o.status.success());
    let out = tmp.path().join("articles");
    let method = format!("softmax:{}", ckpt.display());
    let o = newsgrid(&["extract", "--input", &corpus(), "--method", &method, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "12 pages, 0 failed");
    // Articles written by extract can be scored directly.
    let lookup = format!("articles:{}", out.display());
    let o = newsgrid(&["evaluate", "--dataset", &corpus(), "--method", &lookup, "--format", "json"]);
    assert!(o.status.success());
    assert_eq!(json(&stdout(&o))["design"], "all");
}

#[test]
fn featurize_writes_one_chunk_per_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("chunks.jsonl");
    let o = newsgrid(&["featurize", "--dataset", &corpus(), "--lang", "en", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let raw = std::fs::read_to_string(&path).unwrap();
    assert!(raw.lines().count() >= 4);
    for line in raw.lines() {
        let c = json(line);
        assert!(c["page_id"].as_str().unwrap().contains("thebugle.com") || c["page_id"].as_str().unwrap().contains("harbourtimes"));
    }
}

#[test]
fn glossary_translation_writes_page_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    let glossary = tmp.path().join("glossary.json");
    std::fs::write(&glossary, r#"{"новости": "news"}"#).unwrap();
    let out = tmp.path().join("en");
    let translator = format!("glossary:{}", glossary.display());
    let o = newsgrid(&["translate", "--dataset", &corpus(), "--lang", "ru", "--translator", &translator, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("vestnik.ru/page_1.html").is_file());
    let copied = std::fs::read_to_string(out.join("vestnik.ru/page_1.json")).unwrap();
    let original = std::fs::read_to_string(fixtures().join("mini_corpus/vestnik.ru/page_1.json")).unwrap();
    assert_eq!(copied, original);
    // The translated pair is itself a loadable dataset.
    let o = newsgrid(&["stats", "--dataset", out.to_str().unwrap()]);
    assert!(o.status.success());
}
