use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pengu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pengu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn kb(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../kb")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Replace every timing value with 0 so runs compare byte for byte.
fn mask_timings(json: &str) -> String {
    json.lines()
        .map(|line| match line.split_once("_ms\": ") {
            Some((key, rest)) => {
                let comma = if rest.ends_with(',') { "," } else { "" };
                format!("{key}_ms\": 0{comma}")
            }
            None => line.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

fn golden(name: &str, actual: &str) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name]
        .iter()
        .collect();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(actual, expected, "{name} differs from its golden file");
}

const GOLDEN: [(&str, &str, &str); 6] = [
    (
        "penguins-1.kb",
        "ClassAssertion(Bird, pingu)",
        "penguins-1-bird.json",
    ),
    (
        "penguins-3.kb",
        "ClassAssertion(Not(Fly), pingu)",
        "penguins-3-not-fly.json",
    ),
    (
        "penguins-4.kb",
        "ClassAssertion(Fly, pingu)",
        "penguins-4-fly.json",
    ),
    (
        "university.kb",
        "ClassAssertion(PhD, alice)",
        "university-phd.json",
    ),
    (
        "university.kb",
        "ClassAssertion(UniversityEmployee, alice)",
        "university-employee.json",
    ),
    (
        "university.kb",
        "ClassAssertion(Person, alice)",
        "university-person.json",
    ),
];

#[test]
fn query_json_matches_golden_files() {
    for (file, q, name) in GOLDEN {
        let out = stdout(&pengu(&["query", &kb(file), "-q", q, "--format", "json"]));
        golden(name, &mask_timings(&out));
    }
}

#[test]
fn check_json_matches_golden_file() {
    let out = stdout(&pengu(&["check", &kb("university.kb"), "--format", "json"]));
    golden("university-check.json", &out);
}

#[test]
fn query_agrees_with_oracle_on_bundled_examples() {
    let cases = [
        (
            "penguins-1.kb",
            vec![
                "ClassAssertion(Bird, pingu)",
                "SubClassOf(Penguin, Not(Fly))",
                "Consistent()",
            ],
        ),
        ("penguins-1-1.kb", vec!["ClassAssertion(Bird, pingu)"]),
        (
            "penguins-3.kb",
            vec![
                "ClassAssertion(Not(Fly), pingu)",
                "ClassAssertion(Fly, pingu)",
            ],
        ),
        (
            "penguins-4.kb",
            vec!["ClassAssertion(Fly, pingu)", "Consistent()"],
        ),
        (
            "university.kb",
            vec![
                "ClassAssertion(Lecturer, alice)",
                "ClassAssertion(PhD, alice)",
                "ClassAssertion(UniversityEmployee, alice)",
                "ClassAssertion(Person, alice)",
            ],
        ),
        (
            "university-consistent.kb",
            vec![
                "ClassAssertion(Lecturer, alice)",
                "ClassAssertion(UniversityEmployee, alice)",
            ],
        ),
    ];
    for (file, queries) in cases {
        for q in queries {
            for removable in ["prob", "abox"] {
                let args = |cmd: &'static str| {
                    vec![
                        cmd.to_string(),
                        kb(file),
                        "-q".into(),
                        q.into(),
                        "--format".into(),
                        "json".into(),
                        "--removable".into(),
                        removable.into(),
                    ]
                };
                let parse = |cmd| -> Value {
                    let a = args(cmd);
                    let a: Vec<&str> = a.iter().map(String::as_str).collect();
                    serde_json::from_str(&stdout(&pengu(&a))).unwrap()
                };
                let (r, o) = (parse("query"), parse("oracle"));
                assert_eq!(o["oracle"], true);
                for key in [
                    "consistent",
                    "verdict",
                    "no_repair",
                    "query_justifications",
                    "incons_justifications",
                ] {
                    assert_eq!(r[key], o[key], "{file} {q} {removable}: {key}");
                }
                for key in ["p_incons", "p_cons", "p_q_and_cons", "p_c"] {
                    match (r[key].as_f64(), o[key].as_f64()) {
                        (Some(a), Some(b)) => {
                            assert!((a - b).abs() <= 1e-9, "{file} {q}: {key} {a} vs {b}")
                        }
                        _ => assert_eq!(r[key], o[key], "{file} {q}: {key}"),
                    }
                }
            }
        }
    }
}

#[test]
fn text_output_lists_justified_axioms() {
    let out = stdout(&pengu(&[
        "query",
        &kb("university.kb"),
        "-q",
        "ClassAssertion(UniversityEmployee, alice)",
    ]));
    assert!(out.contains("P_C(Q) = 0.809523809523"), "{out}");
    assert!(out.contains("verdict: ar"), "{out}");
    assert!(
        out.contains("6: ClassAssertion(Tutor, alice) [p=0.8]"),
        "{out}"
    );
    let out = stdout(&pengu(&[
        "query",
        &kb("penguins-4.kb"),
        "-q",
        "ClassAssertion(Fly, pingu)",
    ]));
    assert!(
        out.contains("P_C(Q) undefined (certainly inconsistent)"),
        "{out}"
    );
}

#[test]
fn check_reports_consistency() {
    let out = stdout(&pengu(&["check", &kb("penguins-1.kb")]));
    assert!(out.starts_with("consistent: true\n"), "{out}");
    let v: Value = serde_json::from_str(&stdout(&pengu(&[
        "check",
        &kb("penguins-3.kb"),
        "--format",
        "json",
    ])))
    .unwrap();
    assert_eq!(v["consistent"], false);
    assert!((v["p_incons"].as_f64().unwrap() - 0.81).abs() < 1e-9);
    assert_eq!(
        v["incons_justifications"],
        serde_json::json!([[0, 1, 2, 3]])
    );
}

#[test]
fn parse_errors_exit_with_2_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.kb");
    std::fs::write(&path, "ClassAssertion(A, a)\nSubClassOf(A,, B)\n").unwrap();
    let o = pengu(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":2:"), "{err}");

    let o = pengu(&["query", &kb("penguins-1.kb"), "-q", "ClassAssertion(Bird"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exits_with_2() {
    let o = pengu(&["check", "/nonexistent/kb.kb"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_refuses_large_kbs_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("large.kb");
    let text: String = (0..25)
        .map(|i| format!("0.5 :: ClassAssertion(A{i}, a)\n"))
        .collect();
    std::fs::write(&path, text).unwrap();
    let o = pengu(&[
        "oracle",
        path.to_str().unwrap(),
        "-q",
        "ClassAssertion(A0, a)",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    // The regular pipeline handles it.
    let out = stdout(&pengu(&[
        "query",
        path.to_str().unwrap(),
        "-q",
        "ClassAssertion(A0, a)",
    ]));
    assert!(out.contains("P_C(Q) = 0.5"), "{out}");
}

#[test]
fn step_limit_exits_with_3() {
    let o = pengu(&[
        "query",
        &kb("university.kb"),
        "-q",
        "ClassAssertion(PhD, alice)",
        "--max-steps",
        "1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn bench_gen_writes_a_parsable_kb() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.kb");
    let out = stdout(&pengu(&[
        "bench",
        "gen",
        "--n",
        "3",
        "--setting",
        "S3",
        "--prob-mode",
        "all",
        "-o",
        path.to_str().unwrap(),
    ]));
    let q = out.strip_prefix("query: ").unwrap().trim();
    let v: Value = serde_json::from_str(&stdout(&pengu(&[
        "query",
        path.to_str().unwrap(),
        "-q",
        q,
        "--format",
        "json",
    ])))
    .unwrap();
    assert_eq!(v["query_justifications"].as_array().unwrap().len(), 8);
    assert_eq!(v["incons_justifications"].as_array().unwrap().len(), 8);
    assert_eq!(v["verdict"], "brave");

    let text = stdout(&pengu(&["bench", "gen", "--n", "2", "--setting", "s1"]));
    let kb = pengu_core::parse_kb(&text).unwrap();
    assert_eq!(
        kb,
        pengu_core::bench::generate(
            2,
            pengu_core::bench::Setting::S1,
            pengu_core::bench::ProbMode::None,
            0.5
        )
        .unwrap()
    );
    let bad = pengu(&["bench", "gen", "--n", "40", "--setting", "S1"]);
    assert_eq!(bad.status.code(), Some(2));
}
