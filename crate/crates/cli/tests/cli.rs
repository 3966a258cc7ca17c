//! End-to-end tests that spawn the actual `mact` binary and pin its exact
//! output and exit codes.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn mact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mact"))
        .args(args)
        .output()
        .expect("spawning mact")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn assert_success(output: &Output) {
    assert!(
        output.status.success(),
        "exit {:?}, stderr: {}",
        output.status.code(),
        stderr(output)
    );
}

fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn segment_prints_one_line_per_input() {
    let out = mact(&["segment", "mmmrml", "lml", "i", "lrr"]);
    assert_success(&out);
    assert_eq!(
        stdout(&out),
        "mmmrml\t2\tMove Forward[0,3) Step Right[3,6)\n\
         lml\t1\tTurn Around[0,3)\n\
         i\t1\tInteraction[0,1)\n\
         lrr\t2\tTurn Left[0,1) Turn Around[1,3)\n"
    );
}

#[test]
fn segment_emits_json_when_asked() {
    let out = mact(&["--format", "json", "segment", "lml"]);
    assert_success(&out);
    assert_eq!(
        stdout(&out),
        "[{\"input\":\"lml\",\"count\":1,\"segments\":\
         [{\"meta\":6,\"name\":\"Turn Around\",\"start\":0,\"end\":3}]}]\n"
    );
}

#[test]
fn table_lists_intervals_in_canonical_order() {
    let out = mact(&["table", "mm"]);
    assert_success(&out);
    assert_eq!(
        stdout(&out),
        "2\tMove Forward\t0\t1\n2\tMove Forward\t0\t2\n2\tMove Forward\t1\t2\n"
    );
}

#[test]
fn invalid_action_string_exits_1() {
    let out = mact(&["segment", "mxq"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not an action letter"), "{}", stderr(&out));
    assert_eq!(stdout(&out), "");
}

#[test]
fn missing_arguments_exit_2() {
    let out = mact(&["segment"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = mact(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_0() {
    let help = mact(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("segment"));
    let version = mact(&["--version"]);
    assert_eq!(version.status.code(), Some(0));
}

#[test]
fn custom_grammar_file_changes_the_segmentation() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = write_file(
        dir.path(),
        "moves.grammar",
        "Dash\tm+\nTurn\t(l|r)\nTilt\t(u|d)\nAct\ti\n",
    );
    let out = mact(&["--grammar", grammar.to_str().unwrap(), "segment", "mmludi"]);
    assert_success(&out);
    assert_eq!(
        stdout(&out),
        "mmludi\t5\tDash[0,2) Turn[2,3) Tilt[3,4) Tilt[4,5) Act[5,6)\n"
    );
}

#[test]
fn uncoverable_string_reports_the_stuck_prefix_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = write_file(dir.path(), "only-m.grammar", "OnlyM\tm+\n");
    let out = mact(&["--grammar", grammar.to_str().unwrap(), "segment", "mml"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("no covering segmentation"), "{err}");
    assert!(err.contains("length 3"), "{err}");
}

#[test]
fn broken_grammar_file_reports_line_and_offset() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = write_file(dir.path(), "bad.grammar", "Go\tm\nBroken\tm**\n");
    let out = mact(&["--grammar", grammar.to_str().unwrap(), "segment", "m"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn gumbel_is_seed_deterministic_and_reports_frequencies() {
    let args = ["--seed", "42", "gumbel", "--draws", "500"];
    let first = mact(&args);
    let second = mact(&args);
    assert_success(&first);
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4); // three default logits + max_sum_err
    assert!(lines[0].starts_with("freq[0]: "));
    assert!(lines[3].starts_with("max_sum_err: "));
    let freqs: f64 = lines[..3]
        .iter()
        .map(|l| l.split(": ").nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((freqs - 1.0).abs() < 1.5e-3); // rounded to 4 decimals each
    let changed = mact(&["--seed", "43", "gumbel", "--draws", "500"]);
    assert_ne!(first.stdout, changed.stdout);
}

#[test]
fn gradcheck_passes_and_reports_both_losses() {
    let out = mact(&["--seed", "5", "gradcheck", "--cases", "25"]);
    assert_success(&out);
    let text = stdout(&out);
    let mut worst = 0.0f64;
    for (line, name) in text
        .lines()
        .zip(["contrastive_max_rel_err", "cross_entropy_max_rel_err"])
    {
        let (key, value) = line.split_once(": ").unwrap();
        assert_eq!(key, name);
        worst = worst.max(value.parse::<f64>().unwrap());
    }
    assert!(worst < 1e-5, "worst relative error {worst}");
}

#[test]
fn oracle_check_reports_zero_mismatches() {
    let out = mact(&["--seed", "3", "oracle-check", "--max-len", "3", "--random", "40"]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("check: table+segment\n"), "{text}");
    // 1 + 6 + 36 + 216 exhaustive strings, plus the random trajectories.
    assert!(text.contains("cases: 299\n"), "{text}");
    assert!(text.contains("mismatches: 0\n"), "{text}");
}

#[test]
fn gen_stats_metrics_pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.json");
    let gen = mact(&[
        "--seed", "7", "gen", "--episodes", "40", "--mean-len", "12",
        "--out", corpus.to_str().unwrap(),
    ]);
    assert_success(&gen);
    assert_eq!(stdout(&gen), "", "corpus goes to the file, not stdout");

    let stats = mact(&["stats", corpus.to_str().unwrap()]);
    assert_success(&stats);
    let text = stdout(&stats);
    assert!(text.starts_with("trajectories: 40\n"), "{text}");
    assert!(text.contains("meta[Interaction]: "), "{text}");

    let metrics = mact(&["metrics", corpus.to_str().unwrap()]);
    assert_success(&metrics);
    let metrics_text = stdout(&metrics);
    let names: Vec<&str> = metrics_text
        .lines()
        .map(|l| l.split(':').next().unwrap())
        .collect();
    assert_eq!(names, ["sr", "gc", "plw_sr", "plw_gc", "pc", "ls", "cls"]);

    // The whole pipeline repeats byte-for-byte.
    let corpus2 = dir.path().join("corpus2.json");
    let gen2 = mact(&[
        "--seed", "7", "gen", "--episodes", "40", "--mean-len", "12",
        "--out", corpus2.to_str().unwrap(),
    ]);
    assert_success(&gen2);
    assert_eq!(
        std::fs::read(&corpus).unwrap(),
        std::fs::read(&corpus2).unwrap()
    );
}

#[test]
fn gen_without_out_writes_the_corpus_to_stdout() {
    let out = mact(&["--seed", "1", "gen", "--episodes", "2", "--mean-len", "6"]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.starts_with("{\n  \"version\": \"1\""), "{text}");
    assert!(text.contains("\"ep-0001\""));
}

#[test]
fn metrics_without_outcomes_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_file(
        dir.path(),
        "bare.json",
        r#"{
  "version": "1",
  "episodes": [
    {
      "id": "ep-0000",
      "goal": "noop",
      "sub_goals": ["only"],
      "actions": ["MoveAhead"],
      "subgoal_index": [0]
    }
  ]
}"#,
    );
    let out = mact(&["metrics", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("goal_conditions"), "{}", stderr(&out));
}

#[test]
fn stats_reports_the_failing_episode() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = write_file(dir.path(), "only-m.grammar", "OnlyM\tm+\n");
    let corpus = write_file(
        dir.path(),
        "mixed.json",
        r#"{
  "version": "1",
  "episodes": [
    {
      "id": "ep-0000",
      "goal": "fine",
      "sub_goals": ["only"],
      "actions": ["MoveAhead", "MoveAhead"],
      "subgoal_index": [0, 0]
    },
    {
      "id": "ep-0001",
      "goal": "stuck",
      "sub_goals": ["only"],
      "actions": ["MoveAhead", "RotateLeft"],
      "subgoal_index": [0, 0]
    }
  ]
}"#,
    );
    let out = mact(&[
        "--grammar",
        grammar.to_str().unwrap(),
        "stats",
        corpus.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("episode 1 (ep-0001)"), "{err}");
}

#[test]
fn corrupt_corpus_json_exits_1_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_file(dir.path(), "broken.json", "{\"version\": \"1\"");
    let out = mact(&["stats", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("parsing"), "{}", stderr(&out));
}
