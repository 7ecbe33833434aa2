use rydberg_cz::optimizer::{
    dcrab_optimize, direct_search, DcrabOptions, Objective, OptimizationProblem,
};
use rydberg_cz::pulses::PulseShape;

fn gaussian_problem() -> OptimizationProblem {
    let pulse = PulseShape::gaussian(7.69, 1.2, -1.85, 1.7);
    let mut p = OptimizationProblem::new(Objective::MinDurationFeasible, pulse, 21.1);
    p.seed = 3;
    p
}

#[test]
fn same_seed_same_result() {
    let mut p = gaussian_problem();
    p.restarts = 2;
    let a = direct_search(&p).unwrap();
    let b = direct_search(&p).unwrap();
    assert_eq!(a.pulse, b.pulse);
    assert_eq!(a.evaluations, b.evaluations);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn best_duration_trace_never_increases() {
    let r = direct_search(&gaussian_problem()).unwrap();
    assert!(r.feasible);
    for w in r.trace.windows(2) {
        assert!(w[1].best_tau <= w[0].best_tau);
    }
    assert!(r.gate.phase_condition_error().abs() < 1e-5);
    assert!(r.gate.max_leakage() < 1e-6);
}

#[test]
fn dcrab_without_rounds_returns_baseline() {
    let p = gaussian_problem();
    let base = direct_search(&p).unwrap();
    let opts = DcrabOptions {
        super_iterations: 0,
        ..DcrabOptions::default()
    };
    let out = dcrab_optimize(&base, &p, &opts).unwrap();
    assert_eq!(out.result, base);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn dcrab_rounds_keep_duration_monotone() {
    let p = gaussian_problem();
    let base = direct_search(&p).unwrap();
    let opts = DcrabOptions {
        super_iterations: 2,
        seed: 5,
        ..DcrabOptions::default()
    };
    let out = dcrab_optimize(&base, &p, &opts).unwrap();
    assert_eq!(out.trace.len(), 3);
    for w in out.trace.windows(2) {
        assert!(w[1].tau <= w[0].tau);
    }
    assert!(out.result.feasible);
    assert!(out.result.tau() <= base.tau());
    let rel = out.result.tau() / base.tau();
    assert!(
        rel > 0.99,
        "dCRAB {} vs Gaussian {}",
        out.result.tau(),
        base.tau()
    );
}

#[test]
fn infeasible_baseline_is_rejected() {
    let mut p = gaussian_problem();
    p.interaction = 0.5;
    p.max_evals = 200;
    p.restarts = 0;
    let base = direct_search(&p).unwrap();
    if !base.feasible {
        assert!(dcrab_optimize(&base, &p, &DcrabOptions::default()).is_err());
    }
}
