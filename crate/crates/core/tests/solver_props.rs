use ksc_core::exact::{check_bicriteria, exact_cover, max_utility, theorem_factors, Algorithm};
use ksc_core::harness::{generate_coverage, generate_nonmonotone_tabular, permutation, Instance};
use ksc_core::kset::ElementId;
use ksc_core::solver::{
    algorithm1_with_trace, algorithm2, algorithm3, ladder_length, max_live_instances_bound,
    ProblemConfig, Selection, Step,
};
use proptest::prelude::*;

fn instance(seed: u64, monotone: bool) -> Instance {
    if monotone {
        generate_coverage(seed, 6, 2, 8, 0.3)
            .unwrap()
            .build()
            .unwrap()
    } else {
        generate_nonmonotone_tabular(seed, 4, 2, 20_000)
            .unwrap()
            .build()
            .unwrap()
    }
}

fn stream(inst: &Instance, seed: u64) -> Vec<ElementId> {
    permutation(seed, inst.ground_size())
        .into_iter()
        .map(ElementId::from)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn threshold_trace_invariants(
        seed in 0u64..1000,
        order in any::<u64>(),
        eps in 0.05f64..0.95,
        frac in 0.1f64..1.0,
        slack in 1.0f64..3.0,
        monotone in any::<bool>(),
    ) {
        let inst = instance(seed, monotone);
        let tau = frac * max_utility(&inst.oracle).unwrap();
        prop_assume!(tau > 0.0);
        let opt = exact_cover(&inst.oracle, &inst.weights, tau).unwrap();
        let guess = opt.weight * slack;
        let cfg = ProblemConfig::new(tau, eps, monotone).unwrap().with_guess(guess).unwrap();
        let out = algorithm1_with_trace(stream(&inst, order), &cfg, &inst.oracle, &inst.weights).unwrap();
        prop_assert_eq!(out.trace.len(), inst.ground_size());
        for rec in &out.trace {
            prop_assert!(rec.running_weight <= out.budget + 1e-9);
            let w = inst.weights.weight(rec.element).unwrap();
            match rec.step {
                Step::Inserted { gain, .. } => prop_assert!(gain / w >= out.theta),
                Step::Big { value, .. } => {
                    prop_assert!(value >= tau);
                    prop_assert_eq!(rec.running_weight, w);
                }
                Step::Rejected { .. } => {}
            }
        }
        let last = out.trace.last().unwrap();
        prop_assert_eq!(last.running_weight, out.weight);
        prop_assert_eq!(out.utility, inst.oracle.value(&out.solution));

        // a guess no smaller than the optimum guarantees the bicriteria bounds
        let factors = theorem_factors(eps, monotone, Algorithm::KnownGuess).unwrap();
        let verdict = check_bicriteria(&out.solution, &opt, factors, Some(guess), tau, &inst.oracle, &inst.weights).unwrap();
        prop_assert!(verdict.pass, "{:?}", verdict);
    }

    #[test]
    fn ladder_solvers_meet_their_bounds(
        seed in 0u64..1000,
        order in any::<u64>(),
        eps in 0.05f64..0.95,
        frac in 0.1f64..1.0,
        monotone in any::<bool>(),
    ) {
        let inst = instance(seed, monotone);
        let tau = frac * max_utility(&inst.oracle).unwrap();
        prop_assume!(tau > 0.0);
        let opt = exact_cover(&inst.oracle, &inst.weights, tau).unwrap();
        let cfg = ProblemConfig::new(tau, eps, monotone).unwrap();
        let s = stream(&inst, order);

        let two = algorithm2(|| s.iter().copied(), &cfg, &inst.oracle, &inst.weights).unwrap();
        let factors = theorem_factors(eps, monotone, Algorithm::TwoPass).unwrap();
        prop_assert!(check_bicriteria(&two.solution, &opt, factors, None, tau, &inst.oracle, &inst.weights).unwrap().pass);
        let w = inst.weights.as_slice();
        let (w_min, w_max) = (
            w.iter().copied().fold(f64::INFINITY, f64::min),
            w.iter().copied().fold(0.0, f64::max),
        );
        prop_assert_eq!(two.guesses.len(), ladder_length(w_min, w_max, w.len(), eps));

        let b = w.len() as f64 * w_max;
        let cfg3 = cfg.with_upper_bound(b).unwrap();
        let three = algorithm3(s.iter().copied(), &cfg3, Selection::Default, &inst.oracle, &inst.weights).unwrap();
        prop_assert!(check_bicriteria(&three.solution, &opt, factors, None, tau, &inst.oracle, &inst.weights).unwrap().pass);
        prop_assert!(three.stats.live_instances_max <= max_live_instances_bound(eps, tau, b, three.stats.kappa));
        let literal = algorithm3(s.iter().copied(), &cfg3, Selection::PaperLiteral, &inst.oracle, &inst.weights).unwrap();
        prop_assert!(literal.utility >= cfg3.utility_target() - 1e-9);
        prop_assert!(literal.utility >= three.utility);
    }

    #[test]
    fn solvers_are_deterministic(seed in 0u64..1000, order in any::<u64>()) {
        let inst = instance(seed, true);
        let tau = 0.7 * max_utility(&inst.oracle).unwrap();
        let cfg = ProblemConfig::new(tau, 0.3, true).unwrap().with_upper_bound(100.0).unwrap();
        let s = stream(&inst, order);
        let a = algorithm3(s.iter().copied(), &cfg, Selection::Default, &inst.oracle, &inst.weights).unwrap();
        let b = algorithm3(s.iter().copied(), &cfg, Selection::Default, &inst.oracle, &inst.weights).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn ladder_length_examples() {
    // γ/n = 1/4 and (1-ε) = 1/2: l = 2 exactly, so rungs j = 0, 1, 2
    assert_eq!(ladder_length(1.0, 2.0, 2, 0.5), 3);
    // equal weights, one element: a single rung
    assert_eq!(ladder_length(3.0, 3.0, 1, 0.5), 1);
}

#[test]
fn duplicate_stream_elements_are_rejected() {
    let inst = instance(1, true);
    let cfg = ProblemConfig::new(1.0, 0.3, true)
        .unwrap()
        .with_upper_bound(10.0)
        .unwrap();
    let s = [ElementId(0), ElementId(0)];
    assert!(algorithm3(s, &cfg, Selection::Default, &inst.oracle, &inst.weights).is_err());
}
