use num_complex::Complex64;
use proptest::prelude::*;

use tempocorr::channels::{self, random_channel, to_choi};
use tempocorr::entanglement::{concurrence_2q, eof_2q, eof_upper_bound};
use tempocorr::protocol::{analytic_joint, run_protocol};
use tempocorr::qmath::{self, CMat, Subsystem};
use tempocorr::states::{haar_random_pure, haar_random_unitary, BasisPair, DensityMatrix};
use tempocorr::tomography::project_to_simplex;

fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| CMat::new(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn hermitian(n: usize) -> impl Strategy<Value = CMat> {
    cmat(n, n).prop_map(|m| m.hermitian_part())
}

fn random_state(d: usize, seed: u64) -> DensityMatrix {
    let a = haar_random_pure(d, seed);
    let b = haar_random_pure(d, seed.wrapping_add(1));
    let m = &CMat::projector(a.vec()).scale_real(0.6) + &CMat::projector(b.vec()).scale_real(0.4);
    DensityMatrix::new(m, vec![d]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative(a in cmat(2, 3), b in cmat(3, 2), c in cmat(2, 2)) {
        let left = qmath::kron(&qmath::kron(&a, &b), &c);
        let right = qmath::kron(&a, &qmath::kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-13);
    }

    #[test]
    fn kron_mixed_product(a in cmat(2, 2), b in cmat(3, 3), c in cmat(2, 2), d in cmat(3, 3)) {
        let lhs = &qmath::kron(&a, &b) * &qmath::kron(&c, &d);
        let rhs = qmath::kron(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(s1 in 0u64..1000, s2 in 0u64..1000) {
        let a = random_state(2, s1);
        let b = random_state(3, s2);
        let ab = qmath::kron(a.mat(), b.mat());
        let ta = qmath::partial_trace(&ab, (2, 3), Subsystem::First).unwrap();
        let tb = qmath::partial_trace(&ab, (2, 3), Subsystem::Second).unwrap();
        prop_assert!(ta.max_abs_diff(a.mat()) < 1e-13);
        prop_assert!(tb.max_abs_diff(b.mat()) < 1e-13);
    }

    #[test]
    fn eigh_reconstructs(m in (1usize..=16).prop_flat_map(hermitian)) {
        let e = qmath::eigh(&m).unwrap();
        let back = e.map(qmath::r);
        prop_assert!(back.max_abs_diff(&m) < 1e-10 * (1.0 + m.max_abs()));
        prop_assert!(e.vectors.unitarity_deviation() < 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_norm_unitary_invariance(m in cmat(3, 3), s in 0u64..500) {
        let u = haar_random_unitary(3, s);
        let v = haar_random_unitary(3, s + 1);
        let rotated = &(&u * &m) * &v;
        prop_assert!((qmath::trace_norm(&rotated) - qmath::trace_norm(&m)).abs() < 1e-10);
    }

    #[test]
    fn trace_norm_triangle(a in cmat(3, 3), b in cmat(3, 3)) {
        let sum = &a + &b;
        prop_assert!(qmath::trace_norm(&sum) <= qmath::trace_norm(&a) + qmath::trace_norm(&b) + 1e-10);
    }

    #[test]
    fn random_channels_are_cptp(d_in in 2usize..=3, d_out in 2usize..=3, n in 2usize..=4, s in any::<u64>()) {
        let ch = random_channel(d_in, d_out, n, s).unwrap();
        let rep = channels::is_cptp_kraus(ch.kraus()).unwrap();
        prop_assert!(rep.cptp);
        let back = channels::from_choi(&to_choi(&ch)).unwrap();
        prop_assert!(channels::extensional_distance(&ch, &back).unwrap() < 1e-9);
    }

    #[test]
    fn protocol_matches_closed_form(d in 2usize..=3, s in 0u64..10_000) {
        let ch = random_channel(d, d, 2, s).unwrap();
        let bases = BasisPair::random(d, d, s + 1);
        let rho = random_state(d, s + 2);
        let run = run_protocol(&rho, &ch, &bases).unwrap();
        let closed = analytic_joint(&rho, &ch, &bases).unwrap();
        prop_assert!(run.joint.mat().max_abs_diff(closed.mat()) < 1e-10);
        prop_assert!((run.success_prob - 1.0 / d as f64).abs() < 1e-10);
    }

    #[test]
    fn concurrence_in_unit_interval(s in any::<u64>()) {
        let ch = random_channel(2, 2, 3, s).unwrap();
        let c = concurrence_2q(to_choi(&ch).state()).unwrap();
        prop_assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn simplex_projection_is_a_distribution(v in prop::collection::vec(-2.0f64..2.0, 1..12)) {
        let p = project_to_simplex(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn convex_roof_never_undercuts_wootters(s in any::<u64>()) {
        let ch = random_channel(2, 2, 2, s).unwrap();
        let rho = to_choi(&ch).state().clone();
        let exact = eof_2q(&rho).unwrap().value;
        let bound = eof_upper_bound(&rho, 4, s).unwrap().value;
        prop_assert!(bound >= exact - 1e-6);
    }
}
