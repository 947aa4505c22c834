mod common;

use std::f64::consts::PI;

use circle_pattern::format::{
    parse_result, validate_doc, EdgeDoc, FacesDoc, FlowDoc, FlowMethodDoc, ProblemDoc, SolverDoc,
    TypeDoc, PROBLEM_FORMAT,
};
use circle_pattern::{parse_problem, print_problem};
use common::{fixture, run};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (rows, _) = common::exit_code_table(dir.path());
    let wrong: Vec<_> = rows.iter().filter(|(_, want, got)| want != got).collect();
    assert!(wrong.is_empty(), "{wrong:?}");
}

#[test]
fn emitted_results_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let (_, results) = common::exit_code_table(dir.path());
    assert!(results.iter().filter(|p| p.exists()).count() >= 8);
    assert_eq!(common::consistency_failures(&results), Vec::<String>::new());
}

#[test]
fn fixtures_round_trip() {
    assert_eq!(common::round_trip_failures(), Vec::<String>::new());
}

#[test]
fn golden_reports() {
    assert_eq!(common::golden_failures(), Vec::<String>::new());
}

fn random_doc(rng: &mut StdRng) -> ProblemDoc {
    let faces = rng.gen_range(1..6);
    let edges: Vec<EdgeDoc> = (0..faces + rng.gen_range(0..4))
        .map(|id| EdgeDoc {
            id,
            face_a: if id < faces {
                id
            } else {
                rng.gen_range(0..faces)
            },
            face_b: rng.gen_range(0..faces),
            theta: rng.gen::<f64>() * 3.0 + f64::MIN_POSITIVE,
            label: None,
        })
        .collect();
    ProblemDoc {
        format: PROBLEM_FORMAT.into(),
        pattern_type: TypeDoc {
            epsilon: 1,
            delta: 0,
        },
        faces: FacesDoc {
            count: faces,
            labels: rng
                .gen_bool(0.5)
                .then(|| (0..faces).map(|i| format!("face {i} \"q\"")).collect()),
        },
        targets: (0..faces)
            .map(|_| rng.gen::<f64>() * 20.0 + 1e-300)
            .collect(),
        initial_u: rng.gen_bool(0.5).then(|| {
            (0..faces)
                .map(|_| -rng.gen::<f64>() * 1e6 - 1e-300)
                .collect()
        }),
        initial_r: None,
        solver: rng.gen_bool(0.5).then_some(SolverDoc {
            tol: Some(rng.gen::<f64>() + 1e-300),
            max_iter: Some(7),
        }),
        flow: rng.gen_bool(0.5).then_some(FlowDoc {
            method: Some(FlowMethodDoc::Calabi),
            dt: Some(rng.gen::<f64>() + 1e-3),
            ..FlowDoc::default()
        }),
        edges,
    }
}

#[test]
fn random_documents_round_trip_bit_for_bit() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let p = validate_doc(random_doc(&mut rng)).unwrap();
        let printed = print_problem(&p);
        let q = parse_problem(&printed).unwrap();
        assert_eq!(q, p);
        assert_eq!(print_problem(&q), printed);
        for (a, b) in p.doc.targets.iter().zip(&q.doc.targets) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn check_prints_witness_for_tight_target() {
    let r = run(&[
        "check",
        fixture("torus2x2_110_infeasible.json").to_str().unwrap(),
    ]);
    assert_eq!(r.code, 1);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["verdict"], "infeasible");
    assert_eq!(v["witness"]["faces"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(v["witness"]["edges"].as_array().unwrap().len(), 8);
}

#[test]
fn validate_reports_locations() {
    let r = run(&["validate", fixture("broken.json").to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("edges[2].theta"), "{}", r.stderr);
    assert!(
        r.stderr.contains("theta must lie in (0, π)"),
        "{}",
        r.stderr
    );
    assert!(r.stderr.contains("targets[1]"), "{}", r.stderr);
    let r = run(&["validate", fixture("malformed.json").to_str().unwrap()]);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
}

#[test]
fn solve_known_solutions() {
    for (name, expected) in [
        ("torus2x2_110.json", -1.0),
        ("torus2x2_000.json", -PI / 2.0),
    ] {
        let r = run(&["solve", fixture(name).to_str().unwrap()]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let doc = parse_result(&r.stdout).unwrap();
        assert!(doc.converged);
        for u in doc.u {
            assert!((u - expected).abs() < 1e-12, "{name}: {u}");
        }
    }
}

#[test]
fn solve_failure_carries_diagnosis() {
    let r = run(&[
        "solve",
        fixture("torus2x2_110_beyond.json").to_str().unwrap(),
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("drifting to u = -inf"), "{}", r.stderr);
    let doc = parse_result(&r.stdout).unwrap();
    assert!(!doc.converged);
    assert_eq!(doc.diagnosis.unwrap().toward_neg_infinity, vec![0, 1, 2, 3]);
}

#[test]
fn flow_trajectories_are_monotone() {
    for (method, energy) in [("ricci", 0usize), ("calabi", 1)] {
        let r = run(&[
            "flow",
            fixture("torus2x2_110_asym.json").to_str().unwrap(),
            "--method",
            method,
            "--sample-every",
            "1",
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let traj = parse_result(&r.stdout).unwrap().trajectory.unwrap();
        for w in traj.windows(2) {
            let (a, b) = if energy == 0 {
                (w[0].ricci_energy, w[1].ricci_energy)
            } else {
                (w[0].calabi_energy, w[1].calabi_energy)
            };
            assert!(b <= a + 1e-12 * (1.0 + a.abs()), "{method}: {a} -> {b}");
            assert!(w[1].t > w[0].t);
        }
    }
}

#[test]
fn report_columns_parse_as_numbers() {
    let r = run(&[
        "report",
        fixture("results/flow_calabi_asym.json").to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    let columns = r.stdout.split("t log_C\n").nth(1).unwrap();
    let rows: Vec<(f64, f64)> = columns
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert!(rows.len() > 3);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 <= w[0].1));
}

#[test]
fn tampered_results_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("results/solve_000.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["problem"]["targets"][0] = serde_json::json!(1.0);
    let p = dir.path().join("t.json");
    std::fs::write(&p, doc.to_string()).unwrap();
    let r = run(&["report", p.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("problem_hash"), "{}", r.stderr);
}
