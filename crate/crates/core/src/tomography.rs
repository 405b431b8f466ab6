//! Simulated state tomography of a Choi state and recovery of the channel.
//!
//! Observables are tensor products of single-system Hermitian operator bases
//! (Paulis for qubits, generalized Gell-Mann matrices otherwise), ordered
//! output ⊗ input like the Choi state. Estimation is linear inversion followed
//! by projection of the spectrum onto the probability simplex.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::channels::{self, KrausChannel, PhiMatrix};
use crate::error::{dim_err, Error, Result};
use crate::qmath::{self, c, r, CMat, Subsystem};
use crate::rng;
use crate::states::DensityMatrix;

/// Tolerance for treating a reconstructed state as a Choi state.
pub const CHOI_RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ObservableBasis {
    labels: Vec<String>,
    ops: Vec<CMat>,
    dims: (usize, usize),
}

impl ObservableBasis {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    /// (d_out, d_in) of the bipartite space the observables act on.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Hermitian operator basis of a single d-level system, identity first.
fn single_system_basis(d: usize) -> Vec<(String, CMat)> {
    if d == 2 {
        return vec![
            ("I".into(), CMat::identity(2)),
            ("X".into(), qmath::gates::pauli_x()),
            ("Y".into(), qmath::gates::pauli_y()),
            ("Z".into(), qmath::gates::pauli_z()),
        ];
    }
    let mut basis = vec![("I".to_string(), CMat::identity(d))];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut s = CMat::zeros(d, d);
            s[(j, k)] = r(1.0);
            s[(k, j)] = r(1.0);
            basis.push((format!("S{j}{k}"), s));
            let mut a = CMat::zeros(d, d);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            basis.push((format!("A{j}{k}"), a));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -(l as f64) * norm;
        basis.push((format!("D{l}"), CMat::real_diag(&diag)));
    }
    basis
}

/// Products O_out ⊗ O_in; (d₁d₀)² elements, pairwise Hilbert–Schmidt
/// orthogonal.
pub fn product_observable_basis(d0: usize, d1: usize) -> Result<ObservableBasis> {
    for d in [d0, d1] {
        if !(2..=4).contains(&d) {
            return Err(dim_err(format!("observable bases support d in 2..=4, got {d}")));
        }
    }
    let outs = single_system_basis(d1);
    let ins = single_system_basis(d0);
    let compact = d0 == 2 && d1 == 2;
    let mut labels = Vec::with_capacity(outs.len() * ins.len());
    let mut ops = Vec::with_capacity(outs.len() * ins.len());
    for (lo, o) in &outs {
        for (li, i) in &ins {
            labels.push(if compact {
                format!("{lo}{li}")
            } else {
                format!("{lo}*{li}")
            });
            ops.push(qmath::kron(o, i));
        }
    }
    Ok(ObservableBasis {
        labels,
        ops,
        dims: (d1, d0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyRecord {
    pub labels: Vec<String>,
    pub estimates: Vec<f64>,
    pub shots: Shots,
    /// Present for finite-shot records.
    pub seed: Option<u64>,
}

/// Expectation values Tr(ρ O) for every observable, exact or as sample means
/// of `shots` projective measurements per observable.
pub fn measure(rho: &DensityMatrix, basis: &ObservableBasis, shots: Shots, seed: u64) -> Result<TomographyRecord> {
    let side = basis.dims.0 * basis.dims.1;
    if rho.side() != side {
        return Err(dim_err(format!("state side {} vs observable side {side}", rho.side())));
    }
    let estimates: Vec<f64> = match shots {
        Shots::Exact => basis
            .ops
            .iter()
            .map(|o| qmath::frob_inner(o, rho.mat()).map(|z| z.re))
            .collect::<Result<_>>()?,
        Shots::Finite(n) => basis
            .ops
            .par_iter()
            .enumerate()
            .map(|(idx, o)| sample_mean(rho.mat(), o, n, seed, idx as u64))
            .collect::<Result<_>>()?,
    };
    Ok(TomographyRecord {
        labels: basis.labels.clone(),
        estimates,
        shots,
        seed: matches!(shots, Shots::Finite(_)).then_some(seed),
    })
}

fn sample_mean(rho: &CMat, obs: &CMat, shots: u64, seed: u64, stream: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Range {
            value: 0.0,
            min: 1.0,
            max: f64::INFINITY,
        });
    }
    let e = qmath::eigh(obs)?;
    let probs: Vec<f64> = (0..e.values.len())
        .map(|k| {
            let v = e.vector(k);
            qmath::vdot(&v, &rho.matvec(&v)).re.max(0.0)
        })
        .collect();
    let total: f64 = probs.iter().sum();
    let mut g = rng::stream(seed, stream);
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut sum = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p / total;
        let count = if k + 1 == probs.len() || mass <= p {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(remaining, q).expect("valid binomial").sample(&mut g)
        };
        sum += count as f64 * e.values[k];
        remaining -= count;
        mass -= p;
    }
    Ok(sum / shots as f64)
}

/// Linear inversion followed by projection onto the set of density matrices.
pub fn reconstruct(record: &TomographyRecord, basis: &ObservableBasis) -> Result<DensityMatrix> {
    if record.estimates.len() != basis.ops.len() {
        return Err(dim_err(format!(
            "{} estimates for {} observables",
            record.estimates.len(),
            basis.ops.len()
        )));
    }
    let side = basis.dims.0 * basis.dims.1;
    let mut raw = CMat::zeros(side, side);
    for (est, o) in record.estimates.iter().zip(&basis.ops) {
        let norm = qmath::frob_inner(o, o)?.re;
        raw = &raw + &o.scale_real(est / norm);
    }
    let projected = project_to_density(&raw)?;
    Ok(DensityMatrix::new_unchecked(
        projected,
        vec![basis.dims.0, basis.dims.1],
    ))
}

/// Hermitize, then replace the spectrum by its Euclidean projection onto the
/// probability simplex (clip negatives, water-fill the remainder).
pub fn project_to_density(m: &CMat) -> Result<CMat> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let h = m.hermitian_part();
    let e = qmath::eigh(&h)?;
    let projected = project_to_simplex(&e.values);
    let mut out = CMat::zeros(h.rows(), h.cols());
    for (k, &p) in projected.iter().enumerate() {
        if p > 0.0 {
            out = &out + &CMat::projector(&e.vector(k)).scale_real(p);
        }
    }
    Ok(out.hermitian_part())
}

/// Euclidean projection of `values` (any order) onto {p ≥ 0, Σp = 1}.
pub fn project_to_simplex(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    values.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Reads Φ_{kl,ij} = d₀ ⟨k i|ρ|l j⟩ off a (noisy) Choi state and rebuilds a
/// CPTP channel from it.
///
/// The state is first made positive (eigenvalues clipped), then its input
/// marginal M is restored to I/d₀ by conjugation with I ⊗ M^{-1/2}/√d₀. The
/// returned table is read from the repaired state so it matches the channel.
pub fn channel_from_choi_state(rho: &DensityMatrix) -> Result<(PhiMatrix, KrausChannel)> {
    let (d_out, d_in) = rho.bipartite_dims()?;
    let min = qmath::eigh(rho.mat())?.min_value();
    if min < -CHOI_RECOVERY_TOL {
        return Err(Error::Positivity { min_eigenvalue: min });
    }
    let trace = rho.mat().trace().re;
    if (trace - 1.0).abs() > CHOI_RECOVERY_TOL {
        return Err(Error::Trace { trace });
    }
    let psd = project_to_density(rho.mat())?;
    let marginal = qmath::partial_trace(&psd, (d_out, d_in), Subsystem::Second)?;
    let repaired = if marginal.scale_real(d_in as f64).max_abs_diff(&CMat::identity(d_in)) > 1e-14 {
        let fix = qmath::inv_sqrt_pd(&marginal).map_err(|_| Error::Positivity {
            min_eigenvalue: qmath::eigh(&marginal).map(|e| e.min_value()).unwrap_or(0.0),
        })?;
        let fix = qmath::kron(&CMat::identity(d_out), &fix.scale_real(1.0 / (d_in as f64).sqrt()));
        (&(&fix * &psd) * &fix.dagger()).hermitian_part()
    } else {
        psd
    };

    let d2 = d_in as f64;
    let entries = CMat::from_fn(d_out * d_out, d_in * d_in, |row, col| {
        let (k, l) = (row / d_out, row % d_out);
        let (i, j) = (col / d_in, col % d_in);
        repaired[(k * d_in + i, l * d_in + j)] * d2
    });
    let phi = PhiMatrix::from_entries(d_out, d_in, entries);
    let channel = channels::kraus_from_choi_matrix(&repaired, d_out, d_in)?;
    Ok((phi, channel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, extensional_distance, identity_channel, random_channel, to_choi};

    fn bell() -> DensityMatrix {
        to_choi(&identity_channel(2)).state().clone()
    }

    #[test]
    fn pauli_basis_has_sixteen_orthogonal_elements() {
        let b = product_observable_basis(2, 2).unwrap();
        assert_eq!(b.len(), 16);
        assert_eq!(b.labels()[0], "II");
        assert_eq!(b.labels()[15], "ZZ");
        for (a, oa) in b.ops().iter().enumerate() {
            assert!(oa.hermitian_deviation() == 0.0);
            for ob in &b.ops()[a + 1..] {
                assert!(qmath::frob_inner(oa, ob).unwrap().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gell_mann_bases() {
        let b = product_observable_basis(3, 3).unwrap();
        assert_eq!(b.len(), 81);
        let b = product_observable_basis(2, 4).unwrap();
        assert_eq!(b.len(), 64);
        for (a, oa) in b.ops().iter().enumerate() {
            for ob in &b.ops()[a + 1..] {
                assert!(qmath::frob_inner(oa, ob).unwrap().norm() < 1e-12);
            }
        }
        assert!(matches!(product_observable_basis(5, 2), Err(Error::Dimension(_))));
    }

    fn estimate(record: &TomographyRecord, label: &str) -> f64 {
        let idx = record.labels.iter().position(|l| l == label).unwrap();
        record.estimates[idx]
    }

    #[test]
    fn exact_bell_expectations() {
        let b = product_observable_basis(2, 2).unwrap();
        let rec = measure(&bell(), &b, Shots::Exact, 0).unwrap();
        assert!((estimate(&rec, "XX") - 1.0).abs() < 1e-14);
        assert!((estimate(&rec, "ZZ") - 1.0).abs() < 1e-14);
        assert!((estimate(&rec, "YY") + 1.0).abs() < 1e-14);
        assert!(estimate(&rec, "XY").abs() < 1e-14);
        assert_eq!(rec.seed, None);

        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]);
        let rec = measure(&mixed, &b, Shots::Exact, 0).unwrap();
        for (label, est) in rec.labels.iter().zip(&rec.estimates) {
            if label != "II" {
                assert!(est.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_reconstruction() {
        let b = product_observable_basis(2, 2).unwrap();
        for rho in [bell(), DensityMatrix::maximally_mixed(vec![2, 2])] {
            let rec = measure(&rho, &b, Shots::Exact, 0).unwrap();
            let back = reconstruct(&rec, &b).unwrap();
            assert!(qmath::trace_distance(back.mat(), rho.mat()) < 1e-9);
        }
    }

    #[test]
    fn finite_shot_reconstruction_of_bell() {
        let b = product_observable_basis(2, 2).unwrap();
        let rec = measure(&bell(), &b, Shots::Finite(100_000), 7).unwrap();
        assert_eq!(rec.seed, Some(7));
        let again = measure(&bell(), &b, Shots::Finite(100_000), 7).unwrap();
        assert_eq!(rec, again);
        for (est, o) in rec.estimates.iter().zip(b.ops()) {
            let lmax = qmath::eigvalsh(o).unwrap()[0];
            assert!(est.abs() <= lmax + 1e-12);
        }
        let back = reconstruct(&rec, &b).unwrap();
        let td = qmath::trace_distance(back.mat(), bell().mat());
        assert!(td < 0.02, "trace distance {td}");
    }

    #[test]
    fn corrupted_record_still_gives_a_state() {
        let b = product_observable_basis(2, 2).unwrap();
        let rec = TomographyRecord {
            labels: b.labels().to_vec(),
            estimates: (0..16).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.9).collect(),
            shots: Shots::Finite(10),
            seed: Some(1),
        };
        let rho = reconstruct(&rec, &b).unwrap();
        assert!(DensityMatrix::new(rho.mat().clone(), vec![2, 2]).is_ok());
    }

    #[test]
    fn simplex_projection() {
        let p = project_to_simplex(&[0.7, 0.5, -0.2]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15 && p[2] == 0.0);
        assert_eq!(project_to_simplex(&[0.25; 4]), vec![0.25; 4]);
    }

    #[test]
    fn channel_from_choi_examples() {
        let (phi, ch) = channel_from_choi_state(&bell()).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        let expected = if k == i && l == j { 1.0 } else { 0.0 };
                        assert!((phi.get(k, l, i, j) - r(expected)).norm() < 1e-12);
                    }
                }
            }
        }
        assert!(extensional_distance(&ch, &identity_channel(2)).unwrap() < 1e-12);

        let deph = DensityMatrix::new(CMat::real_diag(&[0.5, 0.0, 0.0, 0.5]), vec![2, 2]).unwrap();
        let (phi, ch) = channel_from_choi_state(&deph).unwrap();
        assert!((phi.get(0, 0, 0, 0) - r(1.0)).norm() < 1e-12);
        assert!((phi.get(1, 1, 1, 1) - r(1.0)).norm() < 1e-12);
        assert!(phi.get(0, 1, 0, 1).norm() < 1e-12);
        assert!(extensional_distance(&ch, &dephasing(2)).unwrap() < 1e-12);

        let orig = random_channel(2, 3, 3, 13).unwrap();
        let (_, back) = channel_from_choi_state(to_choi(&orig).state()).unwrap();
        assert!(extensional_distance(&back, &orig).unwrap() < 1e-9);
    }

    #[test]
    fn channel_from_choi_repairs_marginal() {
        // product state with a non-uniform input marginal
        let m = qmath::kron(&CMat::real_diag(&[0.5, 0.5]), &CMat::real_diag(&[0.6, 0.4]));
        let st = DensityMatrix::new(m, vec![2, 2]).unwrap();
        let (_, ch) = channel_from_choi_state(&st).unwrap();
        assert!(channels::is_cptp_kraus(ch.kraus()).unwrap().cptp);
    }
}
