use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn pyloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pyloc")).args(args).output().expect("spawn pyloc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&pyloc(&["--help"])), 0);
    assert_eq!(code(&pyloc(&["--version"])), 0);
    assert_eq!(code(&pyloc(&["frobnicate"])), 1);
    assert_eq!(code(&pyloc(&["translate-code", "--lexicon", "x.tsv"])), 1);
}

#[test]
fn translate_then_restore_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let lex = data("toy_fr.tsv");
    for name in ["corpus/fstring_simple.py", "corpus/unicode_identifiers.py", "corpus/crlf_endings.py", "programs/exit_code.py"] {
        let src = data(name);
        let fwd = dir.path().join("fwd.py");
        let back = dir.path().join("back.py");
        let out = pyloc(&["translate-code", "--lexicon", s(&lex), "--in", s(&src), "--out", s(&fwd)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = pyloc(&["restore-code", "--lexicon", s(&lex), "--in", s(&fwd), "--out", s(&back)]);
        assert_eq!(code(&out), 0);
        assert_eq!(fs::read(&src).unwrap(), fs::read(&back).unwrap(), "{name}");
    }
}

#[test]
fn translate_code_refuses_unrestorable_input() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("clash.py");
    fs::write(&src, "parent = 1\nprint(parent, super)\n").unwrap();
    let out = pyloc(&[
        "translate-code",
        "--lexicon",
        s(&data("toy_fr.tsv")),
        "--in",
        s(&src),
        "--out",
        s(&dir.path().join("out.py")),
    ]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("parent"));
}

#[test]
fn bad_lexicon_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let lex = dir.path().join("bad.tsv");
    fs::write(&lex, "this is not a lexicon\n").unwrap();
    let src = data("programs/exit_code.py");
    let out = pyloc(&["translate-code", "--lexicon", s(&lex), "--in", s(&src), "--out", s(&dir.path().join("o.py"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exec_check_reports_equivalence_and_mismatch() {
    let lex = data("toy_fr.tsv");
    let out = pyloc(&[
        "exec-check",
        "--lexicon",
        s(&lex),
        "--interpreter",
        "python3",
        "--in",
        s(&data("programs/exit_code.py")),
        s(&data("programs/uncaught.py")),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("ok\t") && text.contains("exit 3/3") && text.contains("exit 1/1"), "{text}");

    let dir = tempfile::tempdir().unwrap();
    let clash = dir.path().join("clash.py");
    fs::write(&clash, "parent = 1\nprint(parent, super)\n").unwrap();
    let out = pyloc(&["exec-check", "--lexicon", s(&lex), "--interpreter", "python3", "--in", s(&clash)]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).starts_with("MISMATCH\t"));
}

#[test]
fn build_lexicon_from_fixtures_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut digests = Vec::new();
    for i in 0..2 {
        let lex = dir.path().join(format!("el{i}.tsv"));
        let report = dir.path().join(format!("el{i}.json"));
        let out = pyloc(&[
            "build-lexicon",
            "--terms",
            s(&data("greek_terms.txt")),
            "--lang",
            "el",
            "--fixtures",
            s(&data("greek_fixtures.json")),
            "--out",
            s(&lex),
            "--report",
            s(&report),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let text = stdout(&out);
        assert!(text.contains("sentinels\t1\n"), "{text}");
        let digest = text.lines().find_map(|l| l.strip_prefix("output_digest\t")).unwrap().to_owned();
        digests.push((digest, fs::read(&lex).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn missing_fixture_is_a_backend_failure() {
    let dir = tempfile::tempdir().unwrap();
    let terms = dir.path().join("terms.txt");
    fs::write(&terms, "abs\nnever_recorded_term\n").unwrap();
    let out = pyloc(&[
        "build-lexicon",
        "--terms",
        s(&terms),
        "--lang",
        "el",
        "--fixtures",
        s(&data("greek_fixtures.json")),
        "--out",
        s(&dir.path().join("el.tsv")),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("el.tsv").exists());
}

#[test]
fn evaluate_writes_scores() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.tsv");
    fs::write(&pairs, "term\thypothesis\treference\nabs\tvaleur_absolue\tvaleur_absolue\nmax\tmaxi\tmaximum\n").unwrap();
    let out = pyloc(&["evaluate", "--pairs", s(&pairs)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "term\texact\tchrf");
    assert!(rows[1].starts_with("abs\t1\t100.00"), "{text}");
    assert!(rows[2].starts_with("max\t0\t"), "{text}");
}

#[test]
fn expand_split_only_needs_no_backend() {
    let dir = tempfile::tempdir().unwrap();
    let terms = dir.path().join("terms.txt");
    fs::write(&terms, "print\nmax_value\nreadLine\n").unwrap();
    let out = pyloc(&["expand", "--terms", s(&terms), "--split-only"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("max_value\tmax value\n"), "{text}");
    assert!(text.contains("readLine\tread Line\n"), "{text}");
}

#[test]
fn abbreviate_and_merge() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    fs::write(&a, "english\texpansion\tlanguage\ttranslation\tabbreviation\tprovenance\tconfidence\nabs\t-\tfr\tvaleur_absolue\t\thuman\t1\n").unwrap();
    fs::write(&b, "english\texpansion\tlanguage\ttranslation\tabbreviation\tprovenance\tconfidence\nlen\t-\tfr\tlongueur\t\thuman\t1\n").unwrap();
    let merged = dir.path().join("m.tsv");
    let out = pyloc(&["merge-lexicons", "--lexicon", s(&a), s(&b), "--out", s(&merged)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let short = dir.path().join("short.tsv");
    let out = pyloc(&["abbreviate", "--lexicon", s(&merged), "--out", s(&short)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&short).unwrap();
    assert!(text.contains("abs\t-\tfr\tvaleur_absolue\tvale_absol\t"), "{text}");
    assert!(text.contains("len\t-\tfr\tlongueur\tlongu\t"), "{text}");
}
