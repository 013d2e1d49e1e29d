//! Integration checks for the experiments that are not part of the
//! verification suite, and for their recorded diagnostics.

use laguerre_riesz::lab::experiments::{
    convergence_sweep, projection_growth, trace_lower, weighted_eigen, WeightSign,
};
use laguerre_riesz::lab::fit::half_octave_range;
use laguerre_riesz::lab::report::Verdict;
use laguerre_riesz::AlphaVector;

#[test]
fn projection_growth_matches_predicted_exponent() {
    // d = 1, type 0.5, p = 12: expected slope 1.5 (1/2 - 1/12) - 1/4 = 0.375
    let alpha = AlphaVector::scalar(0.5).unwrap();
    let ns = half_octave_range(64, 1024);
    let rep = projection_growth(&alpha, 12.0, &ns, 7).unwrap();
    assert!((rep.expected_slope - 0.375).abs() < 1e-12);
    assert_eq!(
        rep.verdict,
        Verdict::Pass,
        "slope {} vs 0.375",
        rep.fitted_slope
    );
}

#[test]
fn convergence_sweep_smooth_profile() {
    // smooth compactly supported profile at band 256: the ladder-end error
    // is below 1e-3 for every summability order, including lambda = 0
    let alpha = AlphaVector::scalar(0.0).unwrap();
    let rep = convergence_sweep(&alpha, 6.0, &[0.0, 0.5, 1.0], 256, 7).unwrap();
    assert_eq!(
        rep.verdict,
        Verdict::Pass,
        "final errors {}",
        rep.params["final_errors"]
    );
    // every shipped order is above the a.e. threshold except lambda = 0 at p = 6
    assert_eq!(rep.params["supercritical"], "no,yes,yes");
    // error curves decay along the ladder: last value far below the first
    let first = rep.samples.first().unwrap().1;
    let last = rep.samples.last().unwrap().1;
    assert!(
        last < 1e-3 && last < first * 1e-2,
        "no decay: {first} -> {last}"
    );
}

#[test]
fn trace_lower_diagnostics() {
    let alpha = AlphaVector::scalar(0.0).unwrap();
    let ns = half_octave_range(64, 512);
    let rep = trace_lower(&alpha, &ns, None, 7).unwrap();
    // ladder refinement moves the sup estimate by < 5% at the top degree
    let shift: f64 = rep.params["ladder_refinement_shift"].parse().unwrap();
    assert!(shift < 0.05, "refinement shift {shift}");
    // the maximizing rung tracks the n^{-1/4} scale
    for tok in rep.params["argmax_delta_times_n_quarter"].split(',') {
        let v: f64 = tok.parse().unwrap();
        assert!((0.25..=10.0).contains(&v), "argmax delta scale {v}");
    }
}

#[test]
fn weighted_eigen_reports_lower_envelope() {
    let alpha = AlphaVector::scalar(0.5).unwrap();
    let ns = half_octave_range(64, 512);
    let rep = weighted_eigen(&alpha, 2.0, &ns, WeightSign::Minus, 7).unwrap();
    let c: f64 = rep.params["lower_envelope_constant"].parse().unwrap();
    assert!(c > 0.0 && c.is_finite());
}
