use amoebot::engine::Rule;
use amoebot::files::{read_trace, trace_to_string, Configuration, Orientations};
use amoebot::generate::{generate, Shape};
use amoebot::geometry::{Dim, NodePos};
use amoebot::scheduler::{run, AdversaryPolicy, Limits, Mode, PolicyKind};
use amoebot::topology::{betti, build_dual_complex, component_count, euler_betti};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn box_nodes(dim: Dim, r: i32) -> Vec<NodePos> {
    let mut v = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let p = NodePos::new(x, y, z);
                if dim.validate(p).is_ok() {
                    v.push(p);
                }
            }
        }
    }
    v
}

fn subset(dim: Dim, r: i32) -> impl Strategy<Value = Vec<NodePos>> {
    let all = box_nodes(dim, r);
    let n = all.len();
    proptest::collection::vec(any::<bool>(), n).prop_map(move |keep| {
        let v: Vec<NodePos> = all.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| *p).collect();
        if v.is_empty() {
            vec![NodePos::ORIGIN]
        } else {
            v
        }
    })
}

fn shape_3d() -> impl Strategy<Value = Shape> {
    prop::sample::select(Shape::ALL.to_vec())
}

fn shape_2d() -> impl Strategy<Value = Shape> {
    prop::sample::select(vec![Shape::Blob, Shape::Line, Shape::PlaneDisk, Shape::SphereIsh, Shape::Accretion])
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop::sample::select(vec![PolicyKind::UniformRandom, PolicyKind::FixedPriority, PolicyKind::RoundStretcher])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn betti_routes_agree_3d(cells in subset(Dim::Three, 2)) {
        let c = build_dual_complex(Dim::Three, &cells).unwrap();
        let by_rank = betti(&c);
        prop_assert_eq!(by_rank, euler_betti(Dim::Three, &cells).unwrap());
        prop_assert_eq!(by_rank.b0, component_count(Dim::Three, &cells));
        prop_assert_eq!(by_rank.euler_characteristic(), c.euler_characteristic());
    }

    #[test]
    fn betti_routes_agree_2d(cells in subset(Dim::Two, 3)) {
        let c = build_dual_complex(Dim::Two, &cells).unwrap();
        let by_rank = betti(&c);
        prop_assert_eq!(by_rank, euler_betti(Dim::Two, &cells).unwrap());
        prop_assert_eq!(by_rank.b0, component_count(Dim::Two, &cells));
        prop_assert_eq!(by_rank.b2, 0);
    }

    #[test]
    fn config_files_round_trip(shape in shape_3d(), size in 1usize..60, seed in any::<u64>(), two in any::<bool>()) {
        let dim = if two && shape != Shape::SquareGadget { Dim::Two } else { Dim::Three };
        let c = generate(shape, size, seed, dim).unwrap();
        let back = Configuration::from_json(&c.to_json(), false).unwrap();
        prop_assert_eq!(&back, &c);
        let explicit = Configuration::new(
            c.dim,
            c.nodes.clone(),
            Orientations::Explicit(c.to_system().unwrap().states().iter().map(|s| s.orientation.index() as u8).collect()),
        );
        prop_assert_eq!(Configuration::from_json(&explicit.to_json(), false).unwrap(), explicit);
    }

    #[test]
    fn sequential_runs_meet_the_invariants(shape in shape_3d(), size in 1usize..60, seed in 0u64..1000, kind in policy()) {
        let c = generate(shape, size, seed, Dim::Three).unwrap();
        let t = run(c.to_system().unwrap(), Mode::Sequential, &AdversaryPolicy::new(kind, seed), Limits::default()).unwrap();
        prop_assert!(t.succeeded(), "{:?}", t.summary.violations);
        prop_assert_eq!(t.summary.erosions as usize, size - 1);
        prop_assert!(t.summary.rounds <= size as u64 + 1);
        prop_assert!(t.events.windows(2).all(|w| w[0].step < w[1].step && w[0].round <= w[1].round));
    }

    #[test]
    fn async_runs_elect_one_leader(shape in shape_3d(), size in 1usize..40, seed in 0u64..1000, kind in policy()) {
        let c = generate(shape, size, seed, Dim::Three).unwrap();
        let t = run(c.to_system().unwrap(), Mode::Async, &AdversaryPolicy::new(kind, seed), Limits::default()).unwrap();
        prop_assert!(t.succeeded(), "{:?}", t.summary.violations);
        prop_assert_eq!(t.summary.erosions as usize, size - 1);
    }

    #[test]
    fn rule_three_never_fires_in_2d(shape in shape_2d(), size in 1usize..80, seed in 0u64..1000, kind in policy(), async_mode in any::<bool>()) {
        let c = generate(shape, size, seed, Dim::Two).unwrap();
        let mode = if async_mode { Mode::Async } else { Mode::Sequential };
        let t = run(c.to_system().unwrap(), mode, &AdversaryPolicy::new(kind, seed), Limits::default()).unwrap();
        prop_assert!(t.succeeded());
        prop_assert_eq!(t.rule_count(Rule::Three), 0);
    }

    #[test]
    fn orientation_does_not_change_decisions(size in 2usize..40, seed in 0u64..1000, o1 in any::<u64>(), o2 in any::<u64>(), kind in policy()) {
        let base = generate(Shape::Accretion, size, seed, Dim::Three).unwrap();
        let triples = |o: u64| {
            let c = Configuration::new(Dim::Three, base.nodes.clone(), Orientations::Randomize { seed: o });
            let t = run(c.to_system().unwrap(), Mode::Sequential, &AdversaryPolicy::new(kind, seed), Limits::default()).unwrap();
            t.events.iter().map(|e| (e.amoebot, e.action, e.rule)).collect::<Vec<_>>()
        };
        prop_assert_eq!(triples(o1), triples(o2));
    }

    #[test]
    fn traces_round_trip_and_are_deterministic(size in 1usize..30, seed in 0u64..1000, async_mode in any::<bool>()) {
        let c = generate(Shape::Blob, size, seed, Dim::Three).unwrap();
        let mode = if async_mode { Mode::Async } else { Mode::Sequential };
        let policy = AdversaryPolicy::new(PolicyKind::UniformRandom, seed);
        let a = run(c.to_system().unwrap(), mode, &policy, Limits::default()).unwrap();
        let b = run(c.to_system().unwrap(), mode, &policy, Limits::default()).unwrap();
        let text = trace_to_string(&a);
        prop_assert_eq!(&text, &trace_to_string(&b));
        prop_assert_eq!(read_trace(text.as_bytes()).unwrap(), a);
    }

    #[test]
    fn generated_nodes_are_distinct(shape in shape_3d(), size in 1usize..100, seed in any::<u64>()) {
        let c = generate(shape, size, seed, Dim::Three).unwrap();
        let set: BTreeSet<_> = c.nodes.iter().collect();
        prop_assert_eq!(set.len(), size);
    }
}
