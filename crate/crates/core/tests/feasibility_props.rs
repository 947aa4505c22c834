use circle_pattern_core::feasibility::{band, Verdict, Witness};
use circle_pattern_core::{check_exhaustive, check_maxflow, Edge, PatternComplex};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Random incidence on `n` faces where every face has at least one edge.
fn complex_and_target() -> impl Strategy<Value = (PatternComplex, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|n| {
        let extra = prop::collection::vec((0..n, 0..n), 0..2 * n);
        let partners = prop::collection::vec(0..n, n);
        let khat = prop::collection::vec(0.01f64..6.0 * PI, n);
        (Just(n), partners, extra, khat).prop_map(|(n, partners, extra, khat)| {
            let mut pairs: Vec<(usize, usize)> = partners.into_iter().enumerate().collect();
            pairs.extend(extra);
            let edges = pairs
                .into_iter()
                .enumerate()
                .map(|(id, (a, b))| Edge::new(id, a, b))
                .collect();
            (PatternComplex::new(n, edges), khat)
        })
    })
}

fn subset_slack(w: &Option<Witness>) -> Option<f64> {
    match w {
        Some(Witness::Subset { lhs, rhs, .. }) => Some(lhs - rhs),
        _ => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn maxflow_agrees_with_enumeration((c, khat) in complex_and_target()) {
        let ex = check_exhaustive(&c, &khat).unwrap();
        let mf = check_maxflow(&c, &khat).unwrap();
        if ex.verdict != Verdict::Marginal && mf.verdict != Verdict::Marginal {
            prop_assert_eq!(ex.verdict, mf.verdict);
        }
        if ex.verdict != mf.verdict {
            let worst = subset_slack(&ex.witness).or(subset_slack(&mf.witness)).unwrap();
            prop_assert!(worst.abs() <= band(&khat) + 1e-12);
        }
    }

    #[test]
    fn infeasible_witness_violates_its_bound((c, khat) in complex_and_target()) {
        for report in [check_exhaustive(&c, &khat).unwrap(), check_maxflow(&c, &khat).unwrap()] {
            match report.verdict {
                Verdict::Feasible => prop_assert!(report.witness.is_none()),
                Verdict::Infeasible => {
                    let Some(Witness::Subset { faces, edges, lhs, rhs }) = &report.witness else {
                        panic!("missing witness");
                    };
                    prop_assert!(!faces.is_empty());
                    prop_assert_eq!(*rhs, 2.0 * PI * edges.len() as f64);
                    prop_assert!(*lhs >= *rhs - 1e-12 * (1.0 + rhs));
                }
                Verdict::Marginal => prop_assert!(report.witness.is_some()),
            }
        }
    }

    #[test]
    fn lowering_a_target_keeps_feasibility(
        (c, khat) in complex_and_target(),
        pick in any::<prop::sample::Index>(),
        factor in 0.01f64..1.0,
    ) {
        let mut lower = khat.clone();
        let i = pick.index(lower.len());
        lower[i] *= factor;
        for check in [check_exhaustive, check_maxflow] {
            if check(&c, &khat).unwrap().is_feasible() {
                prop_assert!(check(&c, &lower).unwrap().is_feasible());
            }
        }
    }
}
