use hmatch::augment::augment_to_optimal;
use hmatch::flow::{gap_bound, greedy_fill, near_optimal};
use hmatch::oracle::{brute_force_max, DEFAULT_BUDGET};
use hmatch::repr::{build_repr, extract_hmatching, repr_matching, ReprLimits};
use hmatch::{generate, solve, verify_certificate, Algorithm, Certificate, GeneratorConfig, HMatching, Instance, SolveOptions};
use proptest::prelude::*;

fn small_instance() -> impl Strategy<Value = Instance> {
    (2usize..=8, 0.1f64..0.9, 1u64..=4, 1u64..=3, 0usize..=3, any::<u64>()).prop_map(
        |(n, density, max_b, max_c, depth, seed)| {
            generate(&GeneratorConfig {
                n,
                density,
                max_b,
                max_c,
                depth,
                branching: (2, 3),
                max_edges: Some(9),
                seed,
            })
        },
    )
}

fn optimum(inst: &Instance) -> u64 {
    brute_force_max(inst, DEFAULT_BUDGET).unwrap().best_size
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_keeps_feasible_set(
        base in small_instance(),
        extra_b in prop::collection::vec(0u64..=3, 32),
        extra_c in prop::collection::vec(0u64..=3, 9),
        raw in prop::collection::vec(0u64..=4, 0..=9),
    ) {
        // Loosen every bound so normalization has something to tighten.
        let b = base.bounds().iter().zip(extra_b.iter().cycle()).map(|(b, d)| b + d).collect();
        let c = base.capacities().iter().zip(&extra_c).map(|(c, d)| c + d).collect();
        let inst = Instance::new(base.graph().clone(), base.family().clone(), b, c).unwrap();
        let norm = inst.normalized();
        prop_assert!(norm.is_normalized());
        prop_assert_eq!(norm.normalized(), norm.clone());
        let x: Vec<u64> = (0..inst.edge_count()).map(|e| raw.get(e).copied().unwrap_or(0)).collect();
        let x = HMatching::from_vec(x);
        prop_assert_eq!(inst.is_feasible(&x), norm.is_feasible(&x));
    }

    #[test]
    fn every_exact_algorithm_reaches_the_optimum(inst in small_instance()) {
        let opt = optimum(&inst);
        for algo in [Algorithm::Poly, Algorithm::Pseudo, Algorithm::Oracle] {
            let r = solve(&inst, algo, &SolveOptions::default()).unwrap();
            prop_assert!(inst.is_feasible(&r.x));
            prop_assert_eq!(r.cardinality, opt, "{}", algo);
        }
        let r = solve(&inst, Algorithm::Poly, &SolveOptions::default()).unwrap();
        prop_assert_eq!(verify_certificate(&inst, &r.x, DEFAULT_BUDGET), Certificate::Optimal);
    }

    #[test]
    fn rounding_loses_at_most_the_gap_bound(inst in small_instance()) {
        let near = near_optimal(&inst);
        prop_assert!(inst.is_feasible(&near.x));
        prop_assert!(near.fractional.is_feasible(&inst));
        prop_assert_eq!(near.fractional.halves(), 2 * near.x.cardinality() + near.round.loss_halves);
        let opt = optimum(&inst);
        prop_assert!(2 * opt <= near.fractional.halves());
        prop_assert!(opt - near.x.cardinality() <= gap_bound(inst.vertex_count()));
    }

    #[test]
    fn augmenting_from_greedy_reaches_the_optimum(inst in small_instance()) {
        let start = greedy_fill(&inst, &HMatching::empty(inst.edge_count()));
        prop_assert!(inst.is_feasible(&start));
        let (x, steps) = augment_to_optimal(&inst, start.clone()).unwrap();
        prop_assert_eq!(x.cardinality(), optimum(&inst));
        prop_assert_eq!(x.cardinality(), start.cardinality() + steps);
    }

    #[test]
    fn representation_round_trips(inst in small_instance(), raw in prop::collection::vec(0u64..=3, 0..=9)) {
        prop_assume!(inst.edge_count() > 0);
        let x: Vec<u64> = (0..inst.edge_count()).map(|e| raw.get(e).copied().unwrap_or(0)).collect();
        // Shrink a random vector until it is feasible, then round-trip it.
        let mut x = HMatching::from_vec(x);
        for e in 0..x.len() {
            while !inst.is_feasible(&x) && x.get(e) > 0 {
                x.set(e, x.get(e) - 1);
            }
        }
        prop_assume!(inst.is_feasible(&x));
        let repr = build_repr(&inst, ReprLimits::default()).unwrap();
        let m = repr_matching(&inst, &repr, &x).unwrap();
        prop_assert!(m.validate(repr.graph()).is_ok());
        prop_assert_eq!(extract_hmatching(&inst, &repr, &m).unwrap(), x);
    }
}
