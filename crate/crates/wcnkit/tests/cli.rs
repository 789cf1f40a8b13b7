//! End-to-end tests of the command-line surface: report shapes, file
//! formats, determinism, exit codes, and config precedence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wcnkit"))
}

fn write_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    let mut lines = Vec::new();
    for i in 0..30 {
        lines.push(format!(
            "{{\"id\":\"s{i}\",\"text\":\"team alpha scores goal\"}}"
        ));
    }
    lines.push("{\"id\":\"echo\",\"text\":\"goal team\"}".to_string());
    for i in 0..5 {
        lines.push(format!(
            "{{\"id\":\"n{i}\",\"text\":\"filler{i}a filler{i}b filler{i}c\"}}"
        ));
    }
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("spawn wcnkit");
    assert!(
        output.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn parse_report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_reports_graph_shape_and_dumps_edges() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let report_path = dir.path().join("build.json");
    let edges_path = dir.path().join("edges.tsv");
    run_ok(bin()
        .arg("build")
        .arg("--input")
        .arg(&corpus)
        .arg("--dump-edges")
        .arg(&edges_path)
        .arg("--output")
        .arg(&report_path)
        .arg("--no-timestamp"));
    let report = parse_report(&report_path);
    assert_eq!(report["command"], "build");
    assert_eq!(report["result"]["documents"], 36);
    assert!(report["result"]["nodes"].as_u64().unwrap() >= 5);
    assert!(report.get("generated_at_unix").is_none());

    let edges = fs::read_to_string(&edges_path).unwrap();
    let lines: Vec<&str> = edges.lines().collect();
    assert!(lines.contains(&"team\talpha\t30"));
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted, "edge list must be sorted by (tail, head)");
}

#[test]
fn analyze_reports_structural_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let report_path = dir.path().join("analyze.json");
    run_ok(bin()
        .arg("analyze")
        .arg("--input")
        .arg(&corpus)
        .arg("--seed")
        .arg("7")
        .arg("--output")
        .arg(&report_path)
        .arg("--no-timestamp"));
    let report = parse_report(&report_path);
    assert!(report["result"]["distributions"]["degree"].is_object());
    assert!(report["result"]["assortativity"]["tau"].is_number());
    assert!(report["result"]["small_world"]["cc"].is_number());
}

#[test]
fn keywords_report_is_ordered_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let report_path = dir.path().join("kw.json");
    run_ok(bin()
        .arg("keywords")
        .arg("--input")
        .arg(&corpus)
        .arg("--metric")
        .arg("strength")
        .arg("--top")
        .arg("3")
        .arg("--output")
        .arg(&report_path)
        .arg("--no-timestamp"));
    let report = parse_report(&report_path);
    let pairs = report["result"]["keywords"]["strength"].as_array().unwrap();
    assert_eq!(pairs.len(), 3);
    // the chain interior words carry the highest strength
    let first = pairs[0][0].as_str().unwrap();
    assert!(["alpha", "scores", "goal", "team"].contains(&first));
}

#[test]
fn keyphrase_then_rank_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let phrases_path = dir.path().join("phrases.json");
    run_ok(bin()
        .arg("keyphrase")
        .arg("--input")
        .arg(&corpus)
        .arg("--method")
        .arg("barank")
        .arg("--top")
        .arg("10")
        .arg("--output")
        .arg(&phrases_path)
        .arg("--no-timestamp"));
    let report = parse_report(&phrases_path);
    let phrases = report["result"]["phrases"].as_array().unwrap();
    assert!(!phrases.is_empty());

    let ranked_path = dir.path().join("ranked.json");
    run_ok(bin()
        .arg("rank")
        .arg("--input")
        .arg(&corpus)
        .arg("--phrases")
        .arg(&phrases_path)
        .arg("--pcm")
        .arg("default")
        .arg("--output")
        .arg(&ranked_path)
        .arg("--no-timestamp"));
    let ranked = parse_report(&ranked_path);
    let entries = ranked["result"]["ranked"].as_array().unwrap();
    assert_eq!(entries.len(), phrases.len());
    assert_eq!(entries[0]["rank"], 1);
    assert!(entries[0]["score"].as_f64().unwrap() > 0.0);
    assert!(entries[0]["slot"].is_string());
    assert!(ranked["result"]["consistency"]["cr"].as_f64().unwrap() < 0.1);
}

#[test]
fn detect_writes_jsonl_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let run_detect = |out: &Path| {
        run_ok(bin()
            .arg("detect")
            .arg("--input")
            .arg(&corpus)
            .arg("--window")
            .arg("200")
            .arg("--m")
            .arg("2")
            .arg("--mg")
            .arg("2")
            .arg("--ts")
            .arg("0")
            .arg("--top")
            .arg("3")
            .arg("--output")
            .arg(out)
            .arg("--no-timestamp"));
    };
    let out1 = dir.path().join("events1.jsonl");
    let out2 = dir.path().join("events2.jsonl");
    run_detect(&out1);
    run_detect(&out2);
    assert_eq!(
        fs::read(&out1).unwrap(),
        fs::read(&out2).unwrap(),
        "repeated runs must be byte-identical"
    );
    let text = fs::read_to_string(&out1).unwrap();
    let events: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!events.is_empty());
    assert_eq!(events[0]["rank"], 1);
    assert_eq!(events[0]["window"], 0);
    let words: Vec<String> = events[0]["words"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap().to_string())
        .collect();
    assert_eq!(words, ["team", "alpha", "scores", "goal"]);
}

#[test]
fn eval_scores_a_run_against_topics() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let events_path = dir.path().join("events.jsonl");
    run_ok(bin()
        .arg("detect")
        .arg("--input")
        .arg(&corpus)
        .arg("--ts")
        .arg("0")
        .arg("--output")
        .arg(&events_path)
        .arg("--no-timestamp"));

    let truth_path = dir.path().join("topics.jsonl");
    fs::write(
        &truth_path,
        "{\"topic_id\":\"t1\",\"title\":\"goal\",\"keywords\":[\"team\",\"alpha\",\"scores\",\"goal\"]}\n\
         {\"topic_id\":\"t2\",\"title\":\"other\",\"keywords\":[\"moon\",\"landing\"]}\n",
    )
    .unwrap();
    let relevance_path = dir.path().join("relevance.tsv");
    fs::write(&relevance_path, "s0\tt1\ns1\tt1\n").unwrap();

    let report_path = dir.path().join("eval.json");
    run_ok(bin()
        .arg("eval")
        .arg("--truth")
        .arg(&truth_path)
        .arg("--relevance")
        .arg(&relevance_path)
        .arg("--run")
        .arg(&events_path)
        .arg("--output")
        .arg(&report_path)
        .arg("--no-timestamp"));
    let report = parse_report(&report_path);
    let result = &report["result"];
    assert_eq!(result["t_rec"], 0.5);
    assert_eq!(result["detected_topics"], 1);
    for key in [
        "recall", "precision", "f_measure", "rouge_1", "rouge_2", "rouge_l", "bpref", "k_rec",
        "k_prec", "redundancy",
    ] {
        let v = result[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
}

#[test]
fn reports_are_byte_identical_without_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out1 = dir.path().join("r1.json");
    let out2 = dir.path().join("r2.json");
    for out in [&out1, &out2] {
        run_ok(bin()
            .arg("keyphrase")
            .arg("--input")
            .arg(&corpus)
            .arg("--method")
            .arg("mls")
            .arg("--output")
            .arg(out)
            .arg("--no-timestamp"));
    }
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let config_path = dir.path().join("run.conf");
    fs::write(&config_path, "metric = degree\ntop = 1\n").unwrap();

    let out = dir.path().join("kw.json");
    run_ok(bin()
        .arg("keywords")
        .arg("--input")
        .arg(&corpus)
        .arg("--config")
        .arg(&config_path)
        .arg("--output")
        .arg(&out)
        .arg("--no-timestamp"));
    let report = parse_report(&out);
    assert_eq!(report["config"]["top"], 1);
    assert_eq!(report["config"]["metric"], "degree");

    run_ok(bin()
        .arg("keywords")
        .arg("--input")
        .arg(&corpus)
        .arg("--config")
        .arg(&config_path)
        .arg("--top")
        .arg("2")
        .arg("--output")
        .arg(&out)
        .arg("--no-timestamp"));
    let report = parse_report(&out);
    assert_eq!(report["config"]["top"], 2, "flag must override config");
}

#[test]
fn bad_flags_exit_two() {
    let output = bin()
        .arg("keywords")
        .arg("--definitely-not-a-flag")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let config_path = dir.path().join("bad.conf");
    fs::write(&config_path, "no_such_key = 1\n").unwrap();
    let output = bin()
        .arg("keywords")
        .arg("--input")
        .arg(&corpus)
        .arg("--config")
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn data_errors_exit_one_with_json() {
    let output = bin()
        .arg("build")
        .arg("--input")
        .arg("/nonexistent/corpus.jsonl")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: Value = serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    assert_eq!(parsed["error"]["kind"], "io");
}

#[test]
fn malformed_record_exits_one_and_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(&path, "{\"id\":\"a\",\"text\":\"fine\"}\n{\"id\":\"b\"}\n").unwrap();
    let output = bin().arg("build").arg("--input").arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    let parsed: Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(parsed["error"]["kind"], "malformed_record");
    assert!(parsed["error"]["message"]
        .as_str()
        .unwrap()
        .contains("line 2"));
}

#[test]
fn custom_pcm_file_is_accepted_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let phrases_path = dir.path().join("phrases.json");
    run_ok(bin()
        .arg("keyphrase")
        .arg("--input")
        .arg(&corpus)
        .arg("--method")
        .arg("topo")
        .arg("--output")
        .arg(&phrases_path)
        .arg("--no-timestamp"));

    let pcm_path = dir.path().join("pcm.txt");
    fs::write(
        &pcm_path,
        "1.00 5.00 3.00 5.00\n0.20 1.00 0.33 1.00\n0.33 3.00 1.00 3.00\n0.20 1.00 0.33 1.00\n",
    )
    .unwrap();
    run_ok(bin()
        .arg("rank")
        .arg("--input")
        .arg(&corpus)
        .arg("--phrases")
        .arg(&phrases_path)
        .arg("--pcm")
        .arg(pcm_path.to_str().unwrap())
        .arg("--output")
        .arg(dir.path().join("ranked.json"))
        .arg("--no-timestamp"));

    // An inconsistent matrix must be rejected.
    let bad_pcm = dir.path().join("bad_pcm.txt");
    fs::write(
        &bad_pcm,
        "1 9 0.111111 9\n0.111111 1 9 0.111111\n9 0.111111 1 9\n0.111111 9 0.111111 1\n",
    )
    .unwrap();
    let output = bin()
        .arg("rank")
        .arg("--input")
        .arg(&corpus)
        .arg("--phrases")
        .arg(&phrases_path)
        .arg("--pcm")
        .arg(bad_pcm.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("inconsistent_matrix"), "stderr: {stderr}");
}

#[test]
fn tsv_corpus_and_stopword_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.tsv");
    fs::write(&path, "a\tcustom words here\nb\tcustom words again\n").unwrap();
    let stop_path = dir.path().join("stops.txt");
    fs::write(&stop_path, "custom\n").unwrap();
    let out = dir.path().join("build.json");
    run_ok(bin()
        .arg("build")
        .arg("--input")
        .arg(&path)
        .arg("--format")
        .arg("tsv")
        .arg("--stopwords")
        .arg(&stop_path)
        .arg("--output")
        .arg(&out)
        .arg("--no-timestamp"));
    let report = parse_report(&out);
    // vocabulary: words, here, again ("custom" removed by the override list)
    assert_eq!(report["result"]["nodes"], 3);
}
