#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use circle_pattern::commands::verify_result;
use circle_pattern::{parse_problem, print_problem};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_circle-pattern"))
        .args(args)
        .env("CIRCLE_PATTERN_LOG", "warn")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub const VALID_PROBLEMS: &[&str] = &[
    "torus2x2_110.json",
    "torus2x2_110_infeasible.json",
    "torus2x2_110_beyond.json",
    "torus2x2_110_asym.json",
    "torus2x2_000.json",
    "torus2x2_cone_radii.json",
];

pub const GOLDEN_RESULTS: &[&str] = &["solve_110", "solve_000", "flow_calabi_asym"];

/// `parse(print(p)) == p` for every shipped problem; returns the failures.
pub fn round_trip_failures() -> Vec<String> {
    let mut bad = Vec::new();
    for name in VALID_PROBLEMS {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        match parse_problem(&text) {
            Ok(p) => match parse_problem(&print_problem(&p)) {
                Ok(q) if q == p => {}
                _ => bad.push(format!("{name}: reprinted problem differs")),
            },
            Err(d) => bad.push(format!("{name}: {d:?}")),
        }
    }
    bad
}

/// `(description, expected, actual)` for each row of the exit-code table.
/// Result files are written into `dir` and returned for consistency checks.
pub fn exit_code_table(dir: &Path) -> (Vec<(String, i32, i32)>, Vec<PathBuf>) {
    let f = |n: &str| fixture(n);
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut row = |desc: &str, expected: i32, args: Vec<String>| {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        rows.push((desc.to_string(), expected, run(&args).code));
    };
    let s = |p: PathBuf| path(&p).to_string();

    row(
        "validate fixture",
        0,
        vec!["validate".into(), s(f("torus2x2_110.json"))],
    );
    row(
        "validate broken",
        1,
        vec!["validate".into(), s(f("broken.json"))],
    );
    row(
        "validate malformed",
        1,
        vec!["validate".into(), s(f("malformed.json"))],
    );
    row(
        "validate missing",
        2,
        vec!["validate".into(), s(f("does_not_exist.json"))],
    );
    row(
        "check feasible",
        0,
        vec!["check".into(), s(f("torus2x2_110.json"))],
    );
    row(
        "check tight",
        1,
        vec!["check".into(), s(f("torus2x2_110_infeasible.json"))],
    );
    row(
        "check tight exhaustive",
        1,
        vec![
            "check".into(),
            s(f("torus2x2_110_infeasible.json")),
            "--method".into(),
            "exhaustive".into(),
        ],
    );
    row(
        "check (0,0,0)",
        0,
        vec!["check".into(), s(f("torus2x2_000.json"))],
    );
    row("check broken", 2, vec!["check".into(), s(f("broken.json"))]);
    row(
        "check missing",
        2,
        vec!["check".into(), s(f("does_not_exist.json"))],
    );

    let mut out = |name: &str| {
        let p = dir.join(name);
        results.push(p.clone());
        s(p)
    };
    row(
        "solve (1,1,0)",
        0,
        vec![
            "solve".into(),
            s(f("torus2x2_110.json")),
            "--out".into(),
            out("s110.json"),
        ],
    );
    row(
        "solve (0,0,0)",
        0,
        vec![
            "solve".into(),
            s(f("torus2x2_000.json")),
            "--out".into(),
            out("s000.json"),
        ],
    );
    row(
        "solve (0,0,1) from radii",
        0,
        vec![
            "solve".into(),
            s(f("torus2x2_cone_radii.json")),
            "--out".into(),
            out("s001.json"),
        ],
    );
    row(
        "solve asymmetric",
        0,
        vec![
            "solve".into(),
            s(f("torus2x2_110_asym.json")),
            "--out".into(),
            out("sasym.json"),
        ],
    );
    row(
        "solve infeasible",
        1,
        vec![
            "solve".into(),
            s(f("torus2x2_110_beyond.json")),
            "--out".into(),
            out("sbeyond.json"),
        ],
    );
    row(
        "solve bad tol",
        2,
        vec![
            "solve".into(),
            s(f("torus2x2_110.json")),
            "--tol".into(),
            "-1".into(),
        ],
    );
    row(
        "flow ricci",
        0,
        vec![
            "flow".into(),
            s(f("torus2x2_110_asym.json")),
            "--method".into(),
            "ricci".into(),
            "--out".into(),
            out("fricci.json"),
        ],
    );
    row(
        "flow calabi",
        0,
        vec![
            "flow".into(),
            s(f("torus2x2_110_asym.json")),
            "--method".into(),
            "calabi".into(),
            "--out".into(),
            out("fcalabi.json"),
        ],
    );
    row(
        "flow euler",
        0,
        vec![
            "flow".into(),
            s(f("torus2x2_110_asym.json")),
            "--integrator".into(),
            "euler".into(),
            "--dt".into(),
            "0.01".into(),
            "--out".into(),
            out("feuler.json"),
        ],
    );
    row(
        "flow infeasible",
        1,
        vec![
            "flow".into(),
            s(f("torus2x2_110_beyond.json")),
            "--method".into(),
            "ricci".into(),
            "--t-max".into(),
            "50".into(),
            "--out".into(),
            out("fbeyond.json"),
        ],
    );
    row(
        "flow unwritable out",
        2,
        vec![
            "flow".into(),
            s(f("torus2x2_110.json")),
            "--out".into(),
            s(dir.join("no/such/dir.json")),
        ],
    );
    row(
        "report result",
        0,
        vec!["report".into(), s(fixture("results/solve_110.json"))],
    );
    row(
        "report problem file",
        2,
        vec!["report".into(), s(f("torus2x2_110.json"))],
    );
    row(
        "report missing",
        2,
        vec!["report".into(), s(f("does_not_exist.json"))],
    );
    row(
        "unknown flag",
        2,
        vec!["solve".into(), s(f("torus2x2_110.json")), "--bogus".into()],
    );
    (rows, results)
}

/// Re-verifies emitted result files: recomputed K matches, hash matches.
pub fn consistency_failures(results: &[PathBuf]) -> Vec<String> {
    results
        .iter()
        .filter(|p| p.exists())
        .filter_map(|p| {
            let text = std::fs::read_to_string(p).unwrap();
            verify_result(&text)
                .err()
                .map(|e| format!("{}: {e}", p.display()))
        })
        .collect()
}

/// Compares `report` output on the shipped result fixtures with the golden
/// text; `UPDATE_GOLDEN=1` rewrites the golden files instead.
pub fn golden_failures() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1");
    let mut bad = Vec::new();
    for name in GOLDEN_RESULTS {
        let result = fixture(&format!("results/{name}.json"));
        let golden = fixture(&format!("results/{name}.report.txt"));
        let r = run(&["report", path(&result)]);
        if r.code != 0 {
            bad.push(format!("{name}: report exited {}: {}", r.code, r.stderr));
            continue;
        }
        if update {
            std::fs::write(&golden, &r.stdout).unwrap();
        } else if std::fs::read_to_string(&golden).unwrap() != r.stdout {
            bad.push(format!("{name}: report differs from golden file"));
        }
    }
    bad
}
