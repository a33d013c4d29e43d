use std::f64::consts::{PI, TAU};

use irho_core::measurement::{joint_probabilities, EntangledPair};
use irho_core::qstate::{
    basis_from_axis, density_from_bloch, mix, partial_trace_first_kept, partial_trace_second_kept,
    projector, trace_distance, Basis, BlochVector, DensityMatrix, PureState, TwoQubitState,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn angles() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=PI, 0.0..TAU)
}

fn basis() -> impl Strategy<Value = Basis> {
    angles().prop_map(|(t, p)| basis_from_axis(t, p).unwrap())
}

fn pure_state() -> impl Strategy<Value = PureState> {
    (angles(), 0.0..TAU)
        .prop_map(|((t, p), g)| basis_from_axis(t, p).unwrap().plus().with_global_phase(g))
}

fn ball_vector() -> impl Strategy<Value = BlochVector> {
    (angles(), 0.0..=1.0f64).prop_map(|((t, p), r)| {
        BlochVector::new(r * t.sin() * p.cos(), r * t.sin() * p.sin(), r * t.cos())
    })
}

fn two_qubit_state() -> impl Strategy<Value = TwoQubitState> {
    prop::array::uniform4((-1.0..1.0f64, -1.0..1.0f64)).prop_filter_map("non-zero", |raw| {
        let amps = raw.map(|(re, im)| Complex64::new(re, im));
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| TwoQubitState::new(amps.map(|a| a / norm)).unwrap())
    })
}

proptest! {
    #[test]
    fn bloch_round_trip(r in ball_vector()) {
        let back = density_from_bloch(r).unwrap().bloch().unwrap();
        prop_assert!((back - r).norm() <= 1e-12);
    }

    #[test]
    fn pure_states_sit_on_the_sphere(psi in pure_state()) {
        prop_assert!((psi.bloch().norm() - 1.0).abs() <= 1e-12);
        let rho = projector(&psi);
        prop_assert!((rho.purity() - 1.0).abs() <= 1e-12);
        prop_assert!(rho.validate().is_ok());
    }

    #[test]
    fn equal_mix_of_any_basis_is_half_identity(b in basis()) {
        let rho = mix(&[(0.5, *b.plus()), (0.5, *b.minus())]).unwrap();
        prop_assert!(rho.max_entry_diff(&DensityMatrix::half_identity()).unwrap() <= 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(a in ball_vector(), b in ball_vector(), c in ball_vector()) {
        let (ra, rb, rc) = (density_from_bloch(a).unwrap(), density_from_bloch(b).unwrap(), density_from_bloch(c).unwrap());
        let ab = trace_distance(&ra, &rb).unwrap();
        prop_assert!((ab - trace_distance(&rb, &ra).unwrap()).abs() <= 1e-12);
        prop_assert!(ab <= trace_distance(&ra, &rc).unwrap() + trace_distance(&rc, &rb).unwrap() + 1e-12);
        // For qubits the trace distance is half the Bloch distance.
        prop_assert!((ab - 0.5 * (a - b).norm()).abs() <= 1e-12);
    }

    #[test]
    fn partial_traces_are_states(psi in two_qubit_state()) {
        for rho in [partial_trace_first_kept(&psi), partial_trace_second_kept(&psi)] {
            prop_assert!(rho.validate().is_ok());
        }
    }

    #[test]
    fn product_states_trace_back_to_factors(a in pure_state(), b in pure_state()) {
        let joint = a.tensor(&b);
        prop_assert!(partial_trace_first_kept(&joint).max_entry_diff(&projector(&a)).unwrap() <= 1e-12);
        prop_assert!(partial_trace_second_kept(&joint).max_entry_diff(&projector(&b)).unwrap() <= 1e-12);
    }

    #[test]
    fn singlet_statistics(a in basis(), b in basis()) {
        let joint = joint_probabilities(&TwoQubitState::singlet(), &a, &b);
        let sequential = EntangledPair::singlet(0).sequential_probabilities(&a, &b).unwrap();
        prop_assert!(joint.max_abs_diff(&sequential) <= 1e-12);
        for m in [joint.first_marginal(), joint.second_marginal()] {
            prop_assert!((m[0] - 0.5).abs() <= 1e-12 && (m[1] - 0.5).abs() <= 1e-12);
        }
        // Independent oracle: E(a, b) = −â·b̂ for the singlet.
        prop_assert!((joint.correlator() + a.axis().dot(&b.axis())).abs() <= 1e-12);
    }
}
