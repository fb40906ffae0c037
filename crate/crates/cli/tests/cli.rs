use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy").join(name)
}

fn funql(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_funql"))
        .args(args)
        .env_remove("FUNQL_CONFIG")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const QUICK: [&str; 4] = [
    "--set",
    "dropout=0",
    "--set",
    "target_accuracy=1",
];

fn train_obama(out: &Path) -> Output {
    let mut args = vec![
        "train",
        "--regime",
        "full",
        "--data",
        toy("obama_train.jsonl").to_str().unwrap(),
        "--kb",
        toy("kb.tsv").to_str().unwrap(),
        "--linker",
        toy("linker.tsv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--epochs",
        "150",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    args.extend(QUICK.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    funql(&refs, None)
}

/// One trained checkpoint shared by the tests below.
fn checkpoint() -> &'static Path {
    static CKPT: OnceLock<PathBuf> = OnceLock::new();
    CKPT.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap().keep().join("ckpt");
        let o = train_obama(&dir);
        assert!(o.status.success(), "train failed: {}", stderr(&o));
        dir
    })
}

#[test]
fn every_subcommand_documents_its_flags() {
    let cases: &[(&[&str], &[&str])] = &[
        (&["kb", "validate"], &["<KB>"]),
        (
            &["train"],
            &[
                "--regime", "--config", "--data", "--kb", "--out", "--dev", "--linker", "--distant", "--set", "--mode",
                "--attention", "--seed", "--epochs", "FUNQL_CONFIG",
            ],
        ),
        (&["synth-distant"], &["--corpus", "--kb", "--out"]),
        (&["parse"], &["--ckpt", "--beam"]),
        (&["answer"], &["--ckpt", "--beam"]),
        (&["eval"], &["--ckpt", "--data", "--metric", "--beam", "--beam-sweep"]),
        (&["repl"], &["--ckpt", "--beam"]),
    ];
    for (sub, flags) in cases {
        let mut args = sub.to_vec();
        args.push("--help");
        let o = funql(&args, None);
        assert!(o.status.success(), "{sub:?}");
        let text = stdout(&o);
        for f in *flags {
            assert!(text.contains(f), "{sub:?} --help lacks {f}:\n{text}");
        }
    }
}

#[test]
fn usage_errors_exit_2_with_flag_documentation() {
    let o = funql(&["frobnicate"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = funql(&["parse"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--ckpt"));
    let o = funql(
        &[
            "train", "--regime", "full", "--data", "x", "--kb", "y", "--out", "z", "--set", "bogus=1",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("--regime"));
}

#[test]
fn kb_validate_accepts_the_toy_kb() {
    let o = funql(&["kb", "validate", toy("kb.tsv").to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok:"));
}

#[test]
fn kb_validate_reports_the_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let kb = dir.path().join("bad.tsv");
    std::fs::write(&kb, "Barack_Obama\tdaughterOf\tMalia_Obama\nMalia_Obama\tage\t18\nbroken line without tabs\n").unwrap();
    let o = funql(&["kb", "validate", kb.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn data_errors_cite_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.jsonl");
    std::fs::write(
        &data,
        "{\"utterance\": \"how old is sasha\", \"lf\": \"age(Sasha_Obama)\"}\n{\"utterance\": \"x\", \"lf\": \"age(\"}\n",
    )
    .unwrap();
    let o = funql(
        &[
            "train",
            "--regime",
            "full",
            "--data",
            data.to_str().unwrap(),
            "--kb",
            toy("kb.tsv").to_str().unwrap(),
            "--out",
            dir.path().join("ckpt").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("train.jsonl:2:"), "{}", stderr(&o));
}

#[test]
fn parse_heads_the_beam_with_the_gold_query() {
    let o = funql(
        &["parse", "--ckpt", checkpoint().to_str().unwrap(), "--beam", "10"],
        Some("how many daughters does obama have\nwho is the wife of barack obama\n"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(
        lines[0].contains("\"candidates\":[{\"lf\":\"count(daughterOf(Barack_Obama))\""),
        "{}",
        lines[0]
    );
    assert!(lines[0].contains("\"denotation\":[\"2\"]"), "{}", lines[0]);
    assert!(lines[1].contains("\"candidates\":[{\"lf\":\"spouseOf(Barack_Obama)\""), "{}", lines[1]);
}

#[test]
fn answer_prints_the_denotation() {
    let o = funql(
        &["answer", "--ckpt", checkpoint().to_str().unwrap(), "--beam", "10", "how", "old", "is", "sasha"],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "15");
}

#[test]
fn repl_prints_lf_and_answer() {
    let o = funql(
        &["repl", "--ckpt", checkpoint().to_str().unwrap(), "--beam", "10"],
        Some("how many daughters does obama have\n:q\n"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("lf: count(daughterOf(Barack_Obama))"), "{out}");
    assert!(out.contains("answer: 2"), "{out}");
}

#[test]
fn eval_reports_exact_match_and_a_beam_sweep() {
    let ckpt = checkpoint().to_str().unwrap();
    let data = toy("obama_train.jsonl");
    let o = funql(
        &["eval", "--ckpt", ckpt, "--data", data.to_str().unwrap(), "--metric", "em", "--beam", "10"],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("em 1.0000"), "{}", stdout(&o));

    let o = funql(
        &[
            "eval",
            "--ckpt",
            ckpt,
            "--data",
            data.to_str().unwrap(),
            "--metric",
            "f1",
            "--beam-sweep",
            "1,5,20",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    let rows: Vec<Vec<&str>> = table.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows[0], ["width", "answerable", "correct"]);
    assert_eq!(rows.iter().skip(1).map(|r| r[0]).collect::<Vec<_>>(), ["1", "5", "20"]);
    let answerable: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(answerable.windows(2).all(|w| w[0] <= w[1]), "{table}");
}

#[test]
fn eval_em_needs_logical_forms() {
    let o = funql(
        &[
            "eval",
            "--ckpt",
            checkpoint().to_str().unwrap(),
            "--data",
            toy("weak_dev.jsonl").to_str().unwrap(),
            "--metric",
            "em",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synth_distant_writes_blanked_questions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("distant.jsonl");
    let o = funql(
        &[
            "synth-distant",
            "--corpus",
            toy("distant_corpus.jsonl").to_str().unwrap(),
            "--kb",
            toy("kb.tsv").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains(
        "{\"utterance\":\"NVIDIA was founded by Jen-Hsun_Huang and _blank_\",\"denotation\":[\"Chris_Malachowsky\"]"
    ), "{text}");
    assert!(stderr(&o).contains("skipped"));
}

#[test]
fn training_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = train_obama(&a);
    assert!(o.status.success(), "{}", stderr(&o));
    let params = |p: &Path| std::fs::read(p.join("params.bin")).unwrap();
    assert_eq!(params(&a), params(checkpoint()));
}
