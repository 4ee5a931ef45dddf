use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

const CORPUS: &str = "the lower newest widest\nlow lower lowest new\nnewer wider west wind\n\nwe went west\n";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_subvocab"));
    cmd.env_remove("SUBVOCAB_SEED");
    cmd
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    let text = stdin.to_string();
    let writer = std::thread::spawn(move || {
        let _ = pipe.write_all(text.as_bytes());
    });
    let out = child.wait_with_output().unwrap();
    writer.join().unwrap();
    out
}

fn ok(args: &[&str], stdin: &str) -> String {
    let out = run(args, stdin);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn bleu_of_identical_files_is_100() {
    let dir = TempDir::new().unwrap();
    let hyp = write(&dir, "hyp.txt", CORPUS);
    let report: Value = serde_json::from_str(&ok(&["bleu", "--hyp", &hyp, "--ref", &hyp], "")).unwrap();
    assert_eq!(report["score"], 100.0);
    assert_eq!(report["brevity_penalty"], 1.0);
}

#[test]
fn segment_is_line_isomorphic_and_reversible() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "train.txt", CORPUS);
    let vocab = path(&dir, "vocab.txt");
    ok(&["vocab-train", "--input", &input, "--size", "20", "--tolerance", "0.5", "--output", &vocab], "");
    let segmented = ok(&["segment", "--vocab", &vocab], CORPUS);
    assert_eq!(segmented.lines().count(), CORPUS.lines().count());
    assert_eq!(segmented.lines().nth(3), Some(""));
    assert_eq!(ok(&["detok", "--vocab", &vocab], &segmented), CORPUS);
}

#[test]
fn bpe_apply_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "train.txt", CORPUS);
    let merges = path(&dir, "merges.txt");
    ok(&["bpe-train", "--input", &input, "--merges", "10", "--output-merges", &merges], "");
    let segmented = ok(&["bpe-apply", "--merges", &merges], CORPUS);
    assert!(segmented.contains("@@ "));
    assert_eq!(ok(&["detok", "--convention", "continuation_suffix"], &segmented), CORPUS);
}

#[test]
fn levenshtein_transform_keeps_shared_tokens_in_place() {
    let dir = TempDir::new().unwrap();
    let parent = write(&dir, "parent.txt", "#subvocab convention=word_end\nthe_\nand_\ns\ncat_\ning_\n");
    let child = write(&dir, "child.txt", "#subvocab convention=word_end\nthe_\ncap_\nin_\n");
    let out = path(&dir, "out.txt");
    let mapping = ok(
        &["vocab-transform", "--parent", &parent, "--child-vocab", &child, "--strategy", "levenshtein", "--output", &out],
        "",
    );
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "#subvocab convention=word_end\nthe_\nand_\ns\ncap_\nin_\n"
    );
    let rows: Vec<Value> = mapping.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["kind"], "shared");
    assert_eq!(rows[3]["assigned"], "cap_");
    assert_eq!(rows[4]["assigned"], "in_");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["bleu", "--bogus"], "").status.code(), Some(2));
    assert_eq!(run(&["no-such-command"], "").status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1_with_message() {
    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.txt");
    let out = run(&["bleu", "--hyp", &missing, "--ref", &missing], "");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));

    let a = write(&dir, "a.txt", "one line\n");
    let b = write(&dir, "b.txt", "one\ntwo\n");
    assert_eq!(run(&["bleu", "--hyp", &a, "--ref", &b], "").status.code(), Some(1));
}

fn significance(dir: &TempDir, threads: &str, seed: Option<&str>) -> Value {
    let a = write(dir, "a.txt", "the cat sat\na dog ran off\nbirds fly high\nfish swim\n");
    let b = write(dir, "b.txt", "the cat sat down\ndog ran\nbirds fly\nfish swim fast\n");
    let r = write(dir, "r.txt", "the cat sat\nthe dog ran off\nbirds fly high\nfish swim\n");
    let mut cmd = bin();
    cmd.args(["--threads", threads, "significance", "--hyp-a", &a, "--hyp-b", &b, "--ref", &r, "--resamples", "200"]);
    if let Some(s) = seed {
        cmd.env("SUBVOCAB_SEED", s);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let one = significance(&dir, "1", None);
    assert_eq!(one, significance(&dir, "4", None));
    assert_eq!(one["seed"], 1234);

    let seeded = significance(&dir, "2", Some("99"));
    assert_eq!(seeded["seed"], 99);

    let input = write(&dir, "train.txt", &CORPUS.repeat(50));
    let vocab = path(&dir, "vocab.txt");
    ok(&["vocab-train", "--input", &input, "--size", "20", "--tolerance", "0.5", "--output", &vocab], "");
    let text = CORPUS.repeat(3000);
    let single = ok(&["--threads", "1", "segment", "--vocab", &vocab], &text);
    let many = ok(&["--threads", "4", "segment", "--vocab", &vocab], &text);
    assert_eq!(single, many);
}

#[test]
fn tsv_reports() {
    let dir = TempDir::new().unwrap();
    let hyp = write(&dir, "hyp.txt", CORPUS);
    let out = ok(&["--format", "tsv", "bleu", "--hyp", &hyp, "--ref", &hyp], "");
    assert!(out.lines().any(|l| l == "score\t100.0"));
}

#[test]
fn stop_check_reads_curve_from_stdin() {
    let report: Value = serde_json::from_str(&ok(&["stop-check"], "1\t10\n2\t20\n3\t20.5\n4\t20.4\n5\t20.45\n6\t20.3\n7\t20.4\n8\t20.45\n")).unwrap();
    assert_eq!(report["stop"], true);
    assert_eq!(report["best_step"], 3);
}

#[test]
fn relate_restores_exactly() {
    let dir = TempDir::new().unwrap();
    let key = path(&dir, "key.txt");
    let report = path(&dir, "report.json");
    let changed = ok(
        &["relate", "--keep-ratio", "0.3", "--seed", "7", "--key-file", &key, "--report", &report],
        CORPUS,
    );
    assert_ne!(changed, CORPUS);
    assert!(Path::new(&key).exists());
    assert_eq!(ok(&["relate", "--restore", &report, "--key-file", &key], &changed), CORPUS);
}

#[test]
fn parallel_commands_write_both_sides() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "src.txt", "a b c\nd e f\ng h i\nj k l\n");
    let tgt = write(&dir, "tgt.txt", "A B C\nD E F\nG H I\nJ K L\n");
    let (os, ot) = (path(&dir, "os.txt"), path(&dir, "ot.txt"));
    let report: Value = serde_json::from_str(&ok(
        &["sample", "--source", &src, "--target", &tgt, "--out-source", &os, "--out-target", &ot, "-n", "2"],
        "",
    ))
    .unwrap();
    assert_eq!(report["lines"], 2);
    let s = std::fs::read_to_string(&os).unwrap();
    let t = std::fs::read_to_string(&ot).unwrap();
    for (a, b) in s.lines().zip(t.lines()) {
        assert_eq!(a.to_uppercase(), b);
    }

    ok(
        &["corrupt", "--mode", "sort-target", "--source", &src, "--target", &tgt, "--out-source", &os, "--out-target", &ot],
        "",
    );
    assert_eq!(std::fs::read_to_string(&os).unwrap(), std::fs::read_to_string(&src).unwrap());
}

#[test]
fn embed_prints_one_vector_per_word() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "train.txt", CORPUS);
    let subs = path(&dir, "subs.txt");
    ok(&["substrings", "--input", &input, "--size", "50", "--output", &subs], "");
    let out = ok(&["embed", "--substrings", &subs, "--dim", "4"], "lower\nwest\n");
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].split('\t').nth(1).unwrap().split(' ').count(), 4);
}
