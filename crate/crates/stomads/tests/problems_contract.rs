//! Frozen behavior of the problem suite, the noise model, and the external
//! evaluator protocol.

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use stomads::problems::{
    evaluate_noisy, instance, suite, EvalError, FStarProvenance, NoiseSpec, NoisyBlackbox,
    Objective, SubprocessBlackbox,
};

/// Start values recomputed with an independent implementation of every
/// residual formula; any drift here means a formula changed meaning.
const START_VALUES: &[(&str, f64)] = &[
    ("rosenbrock-x1", 24.199999999999996),
    ("rosenbrock-x10", 1795769.0),
    ("rosenbrock-x100", 20449014641.0),
    ("freudenstein_roth-x1", 400.5),
    ("freudenstein_roth-x10", 154575360.0),
    ("freudenstein_roth-x100", 130563864629010.0),
    ("powell_badly_scaled-x1", 1.1352617173483783),
    ("powell_badly_scaled-x10", 1.0000000029811678),
    ("powell_badly_scaled-x100", 1.00000001),
    ("brown_badly_scaled-x1", 999998000003.0),
    ("brown_badly_scaled-x10", 999980009804.0),
    ("brown_badly_scaled-x100", 999899980003.9996),
    ("beale-x1", 14.203125),
    ("beale-x10", 100845486.703125),
    ("beale-x100", 1.000098042755874e16),
    ("jennrich_sampson-x1", 4171.306161960493),
    ("jennrich_sampson-x5", 2.4305895286460538e17),
    ("jennrich_sampson-x10", 5.542985238220917e34),
    ("helical_valley-x1", 2500.0),
    ("helical_valley-x10", 10600.0),
    ("helical_valley-x100", 982600.0),
    ("bard-x1", 41.68169586167801),
    ("bard-x10", 1306.2335498157597),
    ("bard-x100", 147544.0863447124),
    ("gaussian-x1", 3.888106991166684e-6),
    ("gaussian-x10", 14.361026421857625),
    ("gaussian-x100", 1568.6520134697084),
    ("box_3d-x1", 1031.1538106093983),
    ("box_3d-x10", 120398.85282466326),
    ("box_3d-x100", 12234318.941798469),
    ("powell_singular-x1", 215.00000000000003),
    ("powell_singular-x10", 1615400.0000000002),
    ("powell_singular-x100", 16100540000.000002),
    ("wood-x1", 19192.0),
    ("wood-x10", 157345762.0),
    ("wood-x100", 1542422489242.0),
    ("penalty_i-x1", 885.06264),
    ("penalty_i-x10", 8998500.09054),
    ("penalty_i-x100", 89999850003.04254),
    ("extended_rosenbrock-x1", 72.6),
    ("extended_rosenbrock-x10", 5387307.0),
    ("extended_rosenbrock-x100", 61347043923.0),
    ("chebyquad-x1", 0.033770638463718826),
    ("chebyquad-x10", 1.8227163167814126e19),
    ("chebyquad-x100", 4.1143457674185875e33),
    ("linear_rank1-x1", 11654195.0),
    ("linear_rank1-x10", 1168591235.0),
    ("linear_rank1-x100", 116890872035.0),
    ("variably_dimensioned-x1", 423478.5),
    ("variably_dimensioned-x10", 22672038.75),
    ("variably_dimensioned-x100", 1057188063795.0),
    ("discrete_boundary_value-x1", 0.0013749917331919125),
    ("discrete_boundary_value-x10", 0.49426330809201724),
    ("discrete_boundary_value-x100", 20736.488157500746),
    ("broyden_tridiagonal-x1", 19.0),
    ("broyden_tridiagonal-x10", 329248.0),
    ("broyden_tridiagonal-x100", 3211729408.0),
    ("broyden_banded-x1", 288.0),
    ("broyden_banded-x10", 231663528.0),
    ("broyden_banded-x100", 203198943923208.0),
    ("linear_full_rank-x1", 71.99999999999999),
    ("linear_full_rank-x10", 1125.0),
    ("linear_full_rank-x100", 91845.0),
    ("brown_almost_linear-x1", 273.2480478286743),
    ("brown_almost_linear-x10", 95367412126800.0),
    ("brown_almost_linear-x100", 9.5367431640625e33),
    ("trigonometric-x1", 0.006071392083194975),
    ("trigonometric-x10", 354.99977085340777),
    ("trigonometric-x100", 8508.04190309997),
];

#[test]
fn suite_has_at_least_sixty_six_instances_with_sane_shapes() {
    let all = suite(None).unwrap();
    assert!(all.len() >= 66, "suite has only {} instances", all.len());
    let mut names: Vec<&str> = all.iter().map(|p| p.name()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), all.len(), "instance names must be unique");
    for p in &all {
        assert!((2..=12).contains(&p.dimension()), "{}", p.name());
        assert!(p.component_count() >= p.dimension(), "{}", p.name());
        assert_eq!(p.start().len(), p.dimension(), "{}", p.name());
        assert!(p.start_value().is_finite(), "{}", p.name());
        assert!(
            p.start_value() > p.f_star(),
            "{}: start {} does not dominate best {}",
            p.name(),
            p.start_value(),
            p.f_star()
        );
    }
}

#[test]
fn start_values_match_the_independent_recomputation() {
    let all = suite(None).unwrap();
    assert_eq!(all.len(), START_VALUES.len());
    for (name, expected) in START_VALUES {
        let p = instance(name).unwrap();
        let rel = (p.start_value() - expected).abs() / expected.abs().max(1e-300);
        assert!(
            rel <= 1e-12,
            "{name}: start value {} differs from {expected} (rel {rel:e})",
            p.start_value()
        );
        // The stored value and a fresh evaluation at the stored start agree.
        assert_eq!(p.value(p.start()), p.start_value(), "{name}");
    }
}

#[test]
fn best_known_values_have_consistent_provenance() {
    let all = suite(None).unwrap();
    for p in &all {
        match p.f_star_provenance() {
            FStarProvenance::Analytic => {}
            FStarProvenance::Empirical => {
                assert!(
                    p.f_star() > 0.0,
                    "{}: empirical best values here are all positive",
                    p.name()
                );
            }
        }
        assert!(p.f_star().is_finite());
        assert!(p.f_star() >= 0.0, "{}: sum of squares", p.name());
    }
    assert_eq!(
        instance("bard-x1").unwrap().f_star_provenance(),
        FStarProvenance::Empirical
    );
    assert_eq!(
        instance("rosenbrock-x1").unwrap().f_star_provenance(),
        FStarProvenance::Analytic
    );
}

#[test]
fn zero_noise_reproduces_exact_values() {
    let spec = instance("wood-x1").unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let v = evaluate_noisy(&spec, &NoiseSpec::noiseless(), spec.start(), &mut rng).unwrap();
    assert_eq!(v, spec.start_value());
}

#[test]
fn noise_perturbation_is_bounded_by_component_arithmetic() {
    // |Σ(c+θ)² − Σc²| ≤ 2a·Σ|c| + m·a² when every |θ| < a.
    let spec = instance("rosenbrock-x1").unwrap();
    let noise = NoiseSpec::for_instance(&spec, 0.01);
    let a = noise.half_width();
    let mut components = Vec::new();
    spec.components_into(spec.start(), &mut components);
    let bound = 2.0 * a * components.iter().map(|c| c.abs()).sum::<f64>()
        + a * a * components.len() as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let v = evaluate_noisy(&spec, &noise, spec.start(), &mut rng).unwrap();
        assert!((v - spec.start_value()).abs() <= bound);
    }
}

#[test]
fn noisy_mean_carries_the_analytic_bias() {
    // E[f_Θ(x)] = f(x) + m·a²/3; check the empirical mean against it to
    // three standard errors.
    let spec = instance("rosenbrock-x1").unwrap();
    let noise = NoiseSpec::for_instance(&spec, 0.03);
    let mut bb = NoisyBlackbox::new(spec.clone(), noise, 99);
    let x = spec.start().to_vec();
    let n = 100_000;
    let mean = (0..n)
        .map(|_| bb.eval_noisy(&x).unwrap())
        .sum::<f64>()
        / n as f64;
    let expected = spec.start_value() + noise.bias(spec.component_count());
    let a = noise.half_width();
    let mut components = Vec::new();
    spec.components_into(&x, &mut components);
    // Var(f_Θ) = (4/3)a²·Σc² + m·(4/45)a⁴ for uniform component noise.
    let var = 4.0 / 3.0 * a * a * spec.start_value()
        + components.len() as f64 * 4.0 / 45.0 * a.powi(4);
    let se = (var / n as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * se,
        "mean {mean} vs expected {expected} (3se = {})",
        3.0 * se
    );
}

#[test]
fn evaluation_streams_are_keyed_by_call_index() {
    let spec = instance("beale-x1").unwrap();
    let noise = NoiseSpec::for_instance(&spec, 0.05);
    let x = spec.start().to_vec();
    let y = vec![2.0, 2.0];
    // Two runs with the same seed but different query orders still see the
    // same perturbation stream position by position.
    let mut first = NoisyBlackbox::new(spec.clone(), noise, 5);
    let _ = first.eval_noisy(&x).unwrap();
    let second_at_y = {
        let mut bb = NoisyBlackbox::new(spec.clone(), noise, 5);
        let _ = bb.eval_noisy(&y).unwrap();
        bb.eval_noisy(&y).unwrap()
    };
    let also_second_at_y = first.eval_noisy(&y).unwrap();
    assert_eq!(second_at_y, also_second_at_y);
}

#[test]
fn filter_errors_are_loud() {
    assert!(suite(Some("no_such_family")).is_err());
    assert!(instance("rosenbrock-x7").is_err());
}

// ---- external evaluator protocol ----

fn spawn_shell(script: &str, start: Vec<f64>, timeout_ms: u64) -> SubprocessBlackbox {
    SubprocessBlackbox::spawn(
        "sh",
        &["-c".to_string(), script.to_string()],
        start,
        Duration::from_millis(timeout_ms),
    )
    .unwrap()
}

#[test]
fn subprocess_round_trip_with_a_constant_responder() {
    let mut bb = spawn_shell(
        "while read line; do echo 3.5; done",
        vec![0.0, 0.0],
        5000,
    );
    assert_eq!(bb.dimension(), 2);
    for _ in 0..5 {
        assert_eq!(bb.eval_noisy(&[1.0, -2.0]).unwrap(), 3.5);
    }
}

#[test]
fn subprocess_requests_use_full_precision_plain_decimals() {
    // `cat` reflects the request line back; it fails to parse as a number,
    // and the error carries the exact bytes that went over the wire.
    let mut bb = spawn_shell("cat", vec![0.0, 0.0], 5000);
    let err = bb.eval_noisy(&[0.1, -2.0]).unwrap_err();
    match err {
        EvalError::MalformedReply { reply } => {
            assert_eq!(reply, "0.10000000000000001 -2.0000000000000000");
        }
        other => panic!("expected a malformed-reply error, got {other:?}"),
    }
    // A single coordinate echoed back parses cleanly and round-trips.
    let mut bb = spawn_shell("cat", vec![0.0], 5000);
    assert_eq!(bb.eval_noisy(&[0.1]).unwrap(), 0.1);
    assert_eq!(bb.eval_noisy(&[1.0 / 3.0]).unwrap(), 1.0 / 3.0);
}

#[test]
fn subprocess_nan_reply_is_an_error() {
    let mut bb = spawn_shell("while read line; do echo nan; done", vec![0.0], 5000);
    assert!(matches!(
        bb.eval_noisy(&[1.0]),
        Err(EvalError::MalformedReply { .. })
    ));
}

#[test]
fn subprocess_exit_is_reported() {
    let mut bb = spawn_shell("read line; exit 3", vec![0.0], 5000);
    // First request consumes the child's only read; it replies nothing and
    // exits, which surfaces on this or the next call.
    let first = bb.eval_noisy(&[1.0]);
    let second = bb.eval_noisy(&[1.0]);
    assert!(
        matches!(first, Err(EvalError::ChildExited { .. }))
            || matches!(second, Err(EvalError::ChildExited { .. })),
        "got {first:?} then {second:?}"
    );
}

#[test]
fn subprocess_timeout_is_reported() {
    let mut bb = spawn_shell("sleep 30", vec![0.0], 100);
    assert!(matches!(
        bb.eval_noisy(&[1.0]),
        Err(EvalError::Timeout { .. })
    ));
}

#[test]
fn subprocess_dimension_mismatch_is_checked_locally() {
    let mut bb = spawn_shell("while read line; do echo 1; done", vec![0.0, 0.0], 5000);
    assert!(matches!(
        bb.eval_noisy(&[1.0]),
        Err(EvalError::DimensionMismatch {
            expected: 2,
            got: 1
        })
    ));
}
