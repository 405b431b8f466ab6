use tempocorr::channels::{
    self, amplitude_damping, depolarized_unitary, from_choi, random_channel, to_choi, unitary_channel,
};
use tempocorr::entanglement::{BoundKind, ConvexRoofOptions};
use tempocorr::qmath::CMat;
use tempocorr::quantifier::{independent_basis_min, q_fixed_basis, q_inf, QOptions};
use tempocorr::states::{haar_random_unitary, BasisPair};

#[test]
fn maximal_value_implies_unitary() {
    let mut candidates: Vec<_> = (0..10)
        .map(|s| unitary_channel(&haar_random_unitary(2, s)).unwrap())
        .collect();
    candidates.extend((0..10).map(|s| random_channel(2, 2, 2, 100 + s).unwrap()));
    candidates.push(amplitude_damping(0.05).unwrap());
    let mut maximal = 0;
    for ch in &candidates {
        let q = q_fixed_basis(ch, &BasisPair::random(2, 2, 7)).unwrap().q_value;
        if (q - 1.0).abs() < 1e-8 {
            maximal += 1;
            let choi = to_choi(ch);
            assert!((choi.state().purity() - 1.0).abs() < 1e-6);
            let back = from_choi(&choi).unwrap();
            assert_eq!(back.kraus().len(), 1);
            assert!(back.kraus()[0].unitarity_deviation() < 1e-6);
        } else {
            assert!(q < 1.0 - 1e-8);
        }
    }
    assert_eq!(maximal, 10);
}

#[test]
fn infimum_is_below_every_fixed_basis() {
    let opts = QOptions {
        restarts: 8,
        ..QOptions::default()
    };
    for s in 0..4u64 {
        let ch = random_channel(2, 2, 2, 300 + s).unwrap();
        let q = q_inf(&ch, &opts, s).unwrap();
        assert!(q.q_value >= 0.0 && q.q_value <= 1.0 + 1e-9);
        for (_, sample) in &q.landscape_samples {
            assert!(q.q_value <= *sample);
        }
        for b in 0..5 {
            let fixed = q_fixed_basis(&ch, &BasisPair::random(2, 2, 40 + b)).unwrap().q_value;
            assert!(q.q_value <= fixed + 1e-9);
        }
        let independent = independent_basis_min(&ch, 10, &ConvexRoofOptions::default(), s).unwrap();
        assert!(independent >= q.q_value - 1e-6);
    }
}

#[test]
fn qutrit_channels_report_upper_bounds() {
    let dep = depolarized_unitary(&CMat::identity(3), 0.3).unwrap();
    let opts = QOptions {
        restarts: 2,
        max_iterations: 10,
        ..QOptions::default()
    };
    let q = q_inf(&dep, &opts, 1).unwrap();
    assert_eq!(q.kind, BoundKind::UpperBound);
    assert!(q.q_value > 0.0 && q.q_value < 3f64.log2());

    let u = unitary_channel(&haar_random_unitary(3, 2)).unwrap();
    let q = q_inf(&u, &opts, 1).unwrap();
    assert_eq!(q.kind, BoundKind::Exact);
    assert!((q.q_value - 3f64.log2()).abs() < 1e-10);

    let deph = channels::dephasing(3);
    let q = q_inf(&deph, &opts, 1).unwrap();
    assert_eq!(q.kind, BoundKind::Exact);
    assert_eq!(q.q_value, 0.0);
}
