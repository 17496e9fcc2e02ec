use num_complex::Complex64;
use proptest::prelude::*;
use taylor_ego::testbed::{instance, Resonance};
use taylor_ego::{
    driver, DesignEvaluation, DoeConfig, FrequencyGrid, GlobalSurrogate, ObjectiveSpec,
    OptimizerConfig, Origin, ParameterSpace, ResonatorModel,
};

fn config(doe: DoeConfig, iters: usize, seed: u64) -> OptimizerConfig {
    let mut c = OptimizerConfig::new(doe);
    c.max_iterations = iters;
    c.doe_seed = seed;
    c.ei_seed = seed.wrapping_mul(31).wrapping_add(1);
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn history_accounting_and_monotone_best(seed in 0u64..1000, size in 3usize..8, iters in 1usize..6) {
        let inst = instance("dual-band-2d").unwrap();
        let spec = inst.objective_spec();
        let c = config(DoeConfig::Lhs { size }, iters, seed);
        let (h, best) = driver::run(&c, inst.model.space(), &inst.model, &spec).unwrap();

        prop_assert!(h.len() <= size + 2 * iters);
        let entries = h.entries();
        prop_assert!(entries[..size].iter().all(|e| e.origin == Origin::Doe && e.iteration == 0));
        prop_assert!(entries[size..].iter().all(|e| e.origin != Origin::Doe && e.iteration >= 1));
        prop_assert!(entries.windows(2).all(|w| w[0].iteration <= w[1].iteration));

        let trace = h.best_so_far();
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        let min = h.evaluations().map(|e| e.objective_value()).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(best.objective_value(), min);
        prop_assert_eq!(*trace.last().unwrap(), min);
    }

    #[test]
    fn surrogate_weights_sum_to_one(seed in 0u64..1000) {
        let inst = instance("dual-band-2d").unwrap();
        let spec = inst.objective_spec();
        let space = inst.model.space();
        let anchors: Vec<DesignEvaluation> = space
            .latin_hypercube(7, seed)
            .unwrap()
            .into_iter()
            .map(|x| DesignEvaluation::evaluate(&inst.model, x, &spec).unwrap())
            .collect();
        let s = GlobalSurrogate::new(anchors.clone(), space.clone()).unwrap();
        for probe in space.latin_hypercube(200, seed + 1).unwrap() {
            let w = s.weights(&probe);
            prop_assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        for (k, a) in anchors.iter().enumerate() {
            let p = s.global_predict(a.x()).unwrap();
            // other anchors keep a regularized, tiny but nonzero weight
            let dev = p.re().iter().zip(a.spectrum().re())
                .chain(p.im().iter().zip(a.spectrum().im()))
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            prop_assert!(dev < 1e-9, "anchor {k} off by {dev}");
            prop_assert!(s.weights(a.x())[k] >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn latin_hypercube_fills_every_bin(n in 1usize..40, d in 1usize..10, seed in any::<u64>()) {
        let space = ParameterSpace::from_bounds(&vec![(-3.0, 5.0); d]).unwrap();
        let pts = space.latin_hypercube(n, seed).unwrap();
        prop_assert_eq!(pts.len(), n);
        for i in 0..d {
            let mut bins: Vec<usize> = pts
                .iter()
                .map(|p| ((space.normalize(p).unwrap()[i] * n as f64).floor() as usize).min(n - 1))
                .collect();
            bins.sort_unstable();
            prop_assert_eq!(bins, (0..n).collect::<Vec<_>>());
        }
    }
}

#[test]
fn flat_response_stops_after_one_stagnant_iteration() {
    let space = ParameterSpace::from_bounds(&[(0.0, 1.0), (0.0, 1.0)]).unwrap();
    let grid = FrequencyGrid::uniform(1.0, 2.0, 11).unwrap();
    let model = ResonatorModel::new(
        space.clone(),
        grid.clone(),
        vec![Resonance::new(
            1.5,
            10.0,
            Complex64::new(0.5, 0.0),
            vec![0.0; 2],
            vec![0.0; 2],
        )],
    )
    .unwrap();
    let spec = ObjectiveSpec::new(vec![1.5], &grid).unwrap();
    let mut c = config(DoeConfig::FullFactorial { levels: vec![2, 2] }, 10, 0);
    c.stagnation_limit = 1;
    let (h, _) = driver::run(&c, &space, &model, &spec).unwrap();
    let last = h.entries().last().unwrap().iteration;
    assert!(last <= 1, "refinement went on to iteration {last}");
}

#[test]
fn factorial_doe_sizes_match_the_design() {
    let inst = instance("dual-band-2d").unwrap();
    let spec = inst.objective_spec();
    let c = config(DoeConfig::FullFactorial { levels: vec![3, 3] }, 1, 0);
    let (h, _) = driver::run(&c, inst.model.space(), &inst.model, &spec).unwrap();
    assert_eq!(
        h.entries()
            .iter()
            .filter(|e| e.origin == Origin::Doe)
            .count(),
        9
    );

    let inst = instance("dual-band-9d").unwrap();
    let c = config(DoeConfig::Lhs { size: 20 }, 1, 3);
    let (h, _) = driver::run(&c, inst.model.space(), &inst.model, &inst.objective_spec()).unwrap();
    assert_eq!(
        h.entries()
            .iter()
            .filter(|e| e.origin == Origin::Doe)
            .count(),
        20
    );
}

#[test]
fn parallel_and_serial_runs_agree() {
    let inst = instance("dual-band-9d").unwrap();
    let spec = inst.objective_spec();
    let mut c = config(DoeConfig::Lhs { size: 12 }, 4, 9);
    let (serial, _) = driver::run(&c, inst.model.space(), &inst.model, &spec).unwrap();
    c.parallel_evals = true;
    let (parallel, _) = driver::run(&c, inst.model.space(), &inst.model, &spec).unwrap();
    assert_eq!(serial.len(), parallel.len());
    for (a, b) in serial.entries().iter().zip(parallel.entries()) {
        assert_eq!(a.origin, b.origin);
        assert_eq!(a.evaluation.x(), b.evaluation.x());
        assert_eq!(
            a.evaluation.objective_value(),
            b.evaluation.objective_value()
        );
    }
}
