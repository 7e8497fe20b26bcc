//! Frozen behavior of convergence testing and the data/performance
//! profile computations.

use proptest::prelude::*;
use stomads::profiles::{
    evals_to_convergence, evals_to_convergence_from_trace, ConvergenceTest, CostMatrix,
    ProblemCosts, ProfileError,
};
use stomads::problems::{instance, NoiseSpec, NoisyBlackbox};
use stomads::solver::{solve, SolverConfig};

#[test]
fn threshold_interpolates_between_best_and_start() {
    // f* = 0, f(x0) = 24.2, tau = 0.1 -> accept at or below 2.42.
    let test = ConvergenceTest::new(0.1, 0.0, 24.2).unwrap();
    assert!((test.threshold() - 2.42).abs() < 1e-15);
    let exact = ConvergenceTest::new(0.0, 1.0, 5.0).unwrap();
    assert_eq!(exact.threshold(), 1.0);
    let trivial = ConvergenceTest::new(1.0, 1.0, 5.0).unwrap();
    assert_eq!(trivial.threshold(), 5.0);
}

#[test]
fn threshold_rejects_bad_inputs() {
    assert!(ConvergenceTest::new(-0.1, 0.0, 1.0).is_err());
    assert!(ConvergenceTest::new(1.5, 0.0, 1.0).is_err());
    assert!(ConvergenceTest::new(0.1, 2.0, 1.0).is_err(), "start below best");
    assert!(ConvergenceTest::new(f64::NAN, 0.0, 1.0).is_err());
}

#[test]
fn convergence_index_is_one_based_on_the_running_minimum() {
    let test = ConvergenceTest::new(0.1, 0.0, 10.0).unwrap(); // threshold 1.0
    assert_eq!(
        evals_to_convergence_from_trace([10.0, 5.0, 0.9, 2.0], &test),
        Some(3)
    );
    assert_eq!(
        evals_to_convergence_from_trace([1.0, 5.0], &test),
        Some(1),
        "threshold is inclusive"
    );
    assert_eq!(evals_to_convergence_from_trace([10.0, 1.5], &test), None);
    assert_eq!(evals_to_convergence_from_trace([], &test), None);
    // Only the running minimum matters: later regressions are ignored.
    assert_eq!(
        evals_to_convergence_from_trace([0.5, 100.0, 100.0], &test),
        Some(1)
    );
}

#[test]
fn run_records_expose_their_true_trace() {
    let spec = instance("rosenbrock-x1").unwrap();
    let mut bb = NoisyBlackbox::new(spec.clone(), NoiseSpec::for_instance(&spec, 0.01), 5);
    let config = SolverConfig {
        seed: 5,
        budget: Some(600),
        ..SolverConfig::default()
    };
    let record = solve(&mut bb, &config).unwrap();
    let loose = ConvergenceTest::new(0.9, spec.f_star(), spec.start_value()).unwrap();
    let t = evals_to_convergence(&record, &loose).unwrap();
    assert!(t.is_some(), "90% gap closure should happen fast");
    let strict = ConvergenceTest::new(0.0, spec.f_star(), spec.start_value()).unwrap();
    // Reaching the exact optimum under noise within 600 evaluations is not
    // expected; the point is that None is a valid, non-error answer.
    let _ = evals_to_convergence(&record, &strict).unwrap();
}

fn costs(name: &str, dimension: usize, evals: Vec<Option<u64>>) -> ProblemCosts {
    ProblemCosts {
        name: name.to_string(),
        dimension,
        evals,
    }
}

#[test]
fn data_profile_counts_budget_groups() {
    // Two problems in dimension 2: simplex-gradient budget alpha means
    // alpha * 3 evaluations. Costs 30 and 45 flip at alpha 10 and 15.
    let matrix = CostMatrix::new(
        vec!["s".to_string()],
        vec![
            costs("p1", 2, vec![Some(30)]),
            costs("p2", 2, vec![Some(45)]),
        ],
    )
    .unwrap();
    let table = matrix.data_profile().unwrap();
    assert_eq!(table.alphas().len(), 1001);
    assert_eq!(table.alphas()[0], 0.0);
    assert_eq!(table.alphas()[1000], 1000.0);
    let f = &table.fractions()[0];
    assert_eq!(f[9], 0.0);
    assert_eq!(f[10], 0.5);
    assert_eq!(f[14], 0.5);
    assert_eq!(f[15], 1.0);
    assert_eq!(f[1000], 1.0);
}

#[test]
fn data_profile_keeps_unsolved_problems_in_the_denominator() {
    let matrix = CostMatrix::new(
        vec!["s".to_string()],
        vec![
            costs("p1", 2, vec![Some(3)]),
            costs("p2", 2, vec![None]),
            costs("p3", 2, vec![None]),
        ],
    )
    .unwrap();
    let table = matrix.data_profile().unwrap();
    let f = &table.fractions()[0];
    assert_eq!(f[1000], 1.0 / 3.0);
}

#[test]
fn performance_profile_ratios_are_relative_to_the_row_best() {
    let matrix = CostMatrix::new(
        vec!["fast".to_string(), "slow".to_string()],
        vec![costs("p", 2, vec![Some(10), Some(20)])],
    )
    .unwrap();
    let table = matrix.performance_profile().unwrap();
    assert_eq!(table.alphas().len(), 512);
    assert_eq!(table.alphas()[0], 1.0);
    assert_eq!(table.alphas()[511], 2.0);
    let fast = &table.fractions()[0];
    let slow = &table.fractions()[1];
    assert_eq!(fast[0], 1.0);
    assert_eq!(slow[0], 0.0);
    assert_eq!(slow[511], 1.0);
    // The slow solver's curve jumps exactly at ratio 2.
    assert_eq!(slow[510], 0.0);
}

#[test]
fn performance_profile_handles_ties_and_failures() {
    let matrix = CostMatrix::new(
        vec!["a".to_string(), "b".to_string()],
        vec![
            costs("tied", 2, vec![Some(7), Some(7)]),
            costs("only_a", 3, vec![Some(5), None]),
            costs("neither", 4, vec![None, None]),
        ],
    )
    .unwrap();
    let table = matrix.performance_profile().unwrap();
    let a = &table.fractions()[0];
    let b = &table.fractions()[1];
    // a solves 2 of 3 at ratio 1; b solves 1 of 3 and never the second.
    assert_eq!(a[0], 2.0 / 3.0);
    assert_eq!(b[0], 1.0 / 3.0);
    assert_eq!(a[511], 2.0 / 3.0);
    assert_eq!(b[511], 1.0 / 3.0);
    // All finite ratios are 1, so the axis still spans [1, 2].
    assert_eq!(table.alphas()[511], 2.0);
}

#[test]
fn identical_solvers_share_one_curve() {
    let matrix = CostMatrix::new(
        vec!["x".to_string(), "y".to_string()],
        vec![
            costs("p1", 2, vec![Some(12), Some(12)]),
            costs("p2", 5, vec![Some(99), Some(99)]),
        ],
    )
    .unwrap();
    let table = matrix.performance_profile().unwrap();
    assert_eq!(table.fractions()[0], table.fractions()[1]);
    assert!(table.fractions()[0].iter().all(|&v| v == 1.0));
}

#[test]
fn profile_errors_are_typed() {
    let empty = CostMatrix::new(vec!["s".to_string()], vec![]).unwrap();
    assert!(matches!(
        empty.data_profile(),
        Err(ProfileError::EmptyProblemSet)
    ));
    let single = CostMatrix::new(
        vec!["s".to_string()],
        vec![costs("p", 2, vec![Some(1)])],
    )
    .unwrap();
    assert!(matches!(
        single.performance_profile(),
        Err(ProfileError::SingleSolver(1))
    ));
    assert!(matches!(
        CostMatrix::new(
            vec!["a".to_string(), "b".to_string()],
            vec![costs("p", 2, vec![Some(1)])],
        ),
        Err(ProfileError::RaggedRow { .. })
    ));
}

#[test]
fn csv_output_has_stable_shape() {
    let matrix = CostMatrix::new(
        vec!["nk1".to_string(), "mads".to_string()],
        vec![costs("p", 2, vec![Some(10), Some(20)])],
    )
    .unwrap();
    let data = matrix.data_profile().unwrap().to_csv();
    let mut lines = data.lines();
    assert_eq!(lines.next(), Some("alpha,nk1,mads"));
    assert_eq!(data.lines().count(), 1002);
    assert!(data.ends_with('\n'));
    let perf = matrix.performance_profile().unwrap().to_csv();
    assert_eq!(perf.lines().next(), Some("alpha,nk1,mads"));
    assert_eq!(perf.lines().count(), 513);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profiles_are_monotone_and_bounded(
        cost_rows in proptest::collection::vec(
            (2usize..8, proptest::collection::vec(proptest::option::of(1u64..5000), 3),),
            1..12
        )
    ) {
        let problems: Vec<ProblemCosts> = cost_rows
            .into_iter()
            .enumerate()
            .map(|(i, (dim, evals))| costs(&format!("p{i}"), dim, evals))
            .collect();
        let matrix = CostMatrix::new(
            vec!["a".to_string(), "b".to_string(), "c".to_string()],
            problems,
        ).unwrap();
        for table in [matrix.data_profile().unwrap(), matrix.performance_profile().unwrap()] {
            for s in 0..3 {
                let f = &table.fractions()[s];
                for pair in f.windows(2) {
                    prop_assert!(pair[1] >= pair[0]);
                }
                for &v in f {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            for pair in table.alphas().windows(2) {
                prop_assert!(pair[1] >= pair[0]);
            }
        }
    }
}
