//! The temporal-correlation measure Q.
//!
//! For fixed bases, Q is the entanglement of formation of the joint state the
//! protocol prepares from the maximally coherent input. Minimizing over bases
//! is done through the family σ_U = (U ⊗ U)|Φ⁺⟩: Q(Φ) = inf_U E((Φ ⊗ id)(σ_U)).

use rayon::prelude::*;

use crate::channels::{self, KrausChannel};
use crate::entanglement::{self, BoundKind, ConvexRoofOptions};
use crate::error::{dim_err, Error, Result};
use crate::protocol;
use crate::qmath::{self, c, r, CMat};
use crate::rng;
use crate::simplex::NelderMead;
use crate::states::{self, BasisPair, DensityMatrix, PureState};

/// Values at or below this are reported as an exact zero.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QReport {
    /// Bits.
    pub q_value: f64,
    pub kind: BoundKind,
    pub best_u: CMat,
    /// (seed, value at the restart's starting unitary).
    pub landscape_samples: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct QOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Used for d > 2 only; two qubits are evaluated in closed form.
    pub eof: ConvexRoofOptions,
}

impl Default for QOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 300,
            tolerance: 1e-9,
            eof: ConvexRoofOptions {
                restarts: 4,
                max_iterations: 100,
                tolerance: 1e-8,
            },
        }
    }
}

/// (u ⊗ u)|Φ⁺⟩, a maximally entangled state for every unitary u.
pub fn sigma_u(u: &CMat) -> Result<PureState> {
    if !u.is_square() {
        return Err(dim_err(format!("σ_U needs a square matrix, got {:?}", u.shape())));
    }
    let deviation = u.unitarity_deviation();
    if deviation > channels::UNITARY_TOL {
        return Err(Error::Unitarity { deviation });
    }
    let d = u.rows();
    let v = qmath::kron(u, u).matvec(states::max_entangled_unchecked(d).vec());
    PureState::normalized(v, vec![d, d])
}

fn square(ch: &KrausChannel) -> Result<usize> {
    if ch.d_in() != ch.d_out() {
        return Err(dim_err(format!(
            "Q needs a square channel, got {}→{}",
            ch.d_in(),
            ch.d_out()
        )));
    }
    Ok(ch.d_in())
}

fn measure(rho: &DensityMatrix, opts: &ConvexRoofOptions, seed: u64) -> Result<(f64, BoundKind)> {
    let rep = entanglement::entanglement_of_formation(rho, opts, seed)?;
    Ok((rep.value, rep.kind))
}

/// The joint state prepared from the maximally coherent input in `bases`.
pub fn joint_state(ch: &KrausChannel, bases: &BasisPair) -> Result<DensityMatrix> {
    let d = square(ch)?;
    let mu = states::max_coherent(d, bases.b0())?.to_density();
    protocol::analytic_joint(&mu, ch, bases)
}

pub fn q_fixed_basis(ch: &KrausChannel, bases: &BasisPair) -> Result<QReport> {
    q_fixed_basis_with(ch, bases, &ConvexRoofOptions::default(), 0)
}

/// Q in fixed bases. `best_u` is the input basis.
pub fn q_fixed_basis_with(
    ch: &KrausChannel,
    bases: &BasisPair,
    opts: &ConvexRoofOptions,
    seed: u64,
) -> Result<QReport> {
    let joint = joint_state(ch, bases)?;
    let (q_value, kind) = measure(&joint, opts, seed)?;
    Ok(QReport {
        q_value,
        kind,
        best_u: bases.b0().clone(),
        landscape_samples: Vec::new(),
    })
}

/// Hermitian matrix from d² real parameters: diagonal, then real and
/// imaginary parts of the upper triangle.
fn hermitian_from_params(x: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = r(x[i]);
    }
    let mut idx = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(x[idx], x[idx + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            idx += 2;
        }
    }
    h
}

struct Landscape<'a> {
    ch: &'a KrausChannel,
    d: usize,
    eof: ConvexRoofOptions,
}

impl Landscape<'_> {
    fn state(&self, u: &CMat) -> Result<DensityMatrix> {
        let sigma = sigma_u(u)?.to_density();
        let id = CMat::identity(self.d);
        let mut out = CMat::zeros(self.d * self.d, self.d * self.d);
        for k in self.ch.kraus() {
            let kk = qmath::kron(k, &id);
            out = &out + &(&(&kk * sigma.mat()) * &kk.dagger());
        }
        DensityMatrix::new(out.hermitian_part(), vec![self.d, self.d])
    }

    fn value(&self, u: &CMat, seed: u64) -> Result<(f64, BoundKind)> {
        measure(&self.state(u)?, &self.eof, seed)
    }
}

/// Upper bound on Q(Φ) = inf_U E((Φ ⊗ id)(σ_U)).
///
/// U = U₀·exp(iH) with H built from d² parameters, minimized by simplex
/// descent from U₀ = I (restart 0) and Haar-random U₀ (other restarts).
/// Unitary channels have a constant landscape at log₂d and are not optimized.
/// If restart 0 already reaches zero the search stops there.
pub fn q_inf(ch: &KrausChannel, opts: &QOptions, seed: u64) -> Result<QReport> {
    let d = square(ch)?;
    let land = Landscape { ch, d, eof: opts.eof };
    let start_for = |k: usize| -> (u64, CMat) {
        let s = rng::derive_seed(seed, k as u64);
        let u = if k == 0 {
            CMat::identity(d)
        } else {
            states::haar_random_unitary(d, s)
        };
        (s, u)
    };
    let restarts = opts.restarts.max(1);

    let purity = channels::to_choi(ch).state().purity();
    if (purity - 1.0).abs() < 1e-10 {
        let samples: Vec<(u64, f64)> = (0..restarts)
            .into_par_iter()
            .map(|k| {
                let (s, u) = start_for(k);
                land.value(&u, s).map(|(v, _)| (s, v))
            })
            .collect::<Result<_>>()?;
        let (best_idx, q_value) = argmin(samples.iter().map(|s| s.1));
        return Ok(QReport {
            q_value,
            kind: BoundKind::Exact,
            best_u: start_for(best_idx).1,
            landscape_samples: samples,
        });
    }

    let nm = NelderMead {
        max_iterations: opts.max_iterations,
        tolerance: opts.tolerance,
        initial_step: 0.25,
    };
    let run = |k: usize| -> Result<(u64, f64, f64, CMat, BoundKind)> {
        let (s, u0) = start_for(k);
        let inner_seed = rng::derive_seed(s, 1);
        let (v0, kind0) = land.value(&u0, inner_seed)?;
        if v0 <= ZERO_TOL {
            return Ok((s, v0, v0, u0, kind0));
        }
        let rotate = |x: &[f64]| -> Result<CMat> {
            let w = qmath::expm_i_hermitian(&hermitian_from_params(x, d))?;
            Ok(&u0 * &w)
        };
        let found = nm.minimize(&vec![0.0; d * d], |x| {
            match rotate(x).and_then(|u| land.value(&u, inner_seed)) {
                Ok((v, _)) => v,
                Err(_) => f64::INFINITY,
            }
        });
        let u = rotate(&found.x)?;
        let (v, kind) = land.value(&u, inner_seed)?;
        Ok((s, v0, v, u, kind))
    };

    let first = run(0)?;
    let mut results = vec![first];
    if results[0].2 > ZERO_TOL {
        let rest: Vec<_> = (1..restarts).into_par_iter().map(run).collect::<Result<_>>()?;
        results.extend(rest);
    }
    let (best_idx, q_value) = argmin(results.iter().map(|t| t.2));
    let (_, _, _, best_u, inner_kind) = results[best_idx].clone();
    let kind = if q_value <= ZERO_TOL && inner_kind == BoundKind::Exact {
        BoundKind::Exact
    } else {
        BoundKind::UpperBound
    };
    Ok(QReport {
        q_value: if q_value <= ZERO_TOL { 0.0 } else { q_value },
        kind,
        best_u,
        landscape_samples: results.iter().map(|t| (t.0, t.1)).collect(),
    })
}

/// First index of the minimum.
fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values.enumerate().fold(
        (0, f64::INFINITY),
        |best, (i, v)| if v < best.1 { (i, v) } else { best },
    )
}

/// q_inf over depolarized_unitary(v, ε) for each ε in the grid.
pub fn q_sweep(v: &CMat, eps_grid: &[f64], opts: &QOptions, seed: u64) -> Result<Vec<(f64, QReport)>> {
    for &eps in eps_grid {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Range {
                value: eps,
                min: 0.0,
                max: 1.0,
            });
        }
    }
    eps_grid
        .iter()
        .map(|&eps| {
            let ch = channels::depolarized_unitary(v, eps)?;
            Ok((eps, q_inf(&ch, opts, seed)?))
        })
        .collect()
}

/// Smallest q_fixed_basis over `pairs` independent random basis pairs. Used to
/// check that no choice of separate input and output bases beats q_inf.
pub fn independent_basis_min(ch: &KrausChannel, pairs: usize, opts: &ConvexRoofOptions, seed: u64) -> Result<f64> {
    let d = square(ch)?;
    let values: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|k| {
            let s = rng::derive_seed(seed, k as u64);
            let bases = BasisPair::random(d, d, s);
            q_fixed_basis_with(ch, &bases, opts, s).map(|q| q.q_value)
        })
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{coherence_destroying, compose, depolarized_unitary, unitary_channel};

    #[test]
    fn sigma_u_examples() {
        let bell = states::max_entangled(2).unwrap();
        let s = sigma_u(&CMat::identity(2)).unwrap();
        assert!(qmath::vdot(s.vec(), bell.vec()).norm() > 1.0 - 1e-12);
        let s = sigma_u(&qmath::gates::pauli_x()).unwrap();
        for (a, b) in s.vec().iter().zip(bell.vec()) {
            assert!((a - b).norm() < 1e-15);
        }
        for seed in 0..5 {
            let u = states::haar_random_unitary(3, seed);
            let s = sigma_u(&u).unwrap().to_density();
            let red = qmath::partial_trace(s.mat(), (3, 3), qmath::Subsystem::First).unwrap();
            assert!(red.max_abs_diff(&CMat::identity(3).scale_real(1.0 / 3.0)) < 1e-10);
        }
        let not_unitary = CMat::identity(2).scale_real(2.0);
        assert!(matches!(sigma_u(&not_unitary), Err(Error::Unitarity { .. })));
    }

    #[test]
    fn q_fixed_basis_examples() {
        for seed in 0..3 {
            let u = states::haar_random_unitary(2, seed);
            let q = q_fixed_basis(&unitary_channel(&u).unwrap(), &BasisPair::random(2, 2, seed + 10)).unwrap();
            assert!((q.q_value - 1.0).abs() < 1e-8);
        }
        let psi = coherence_destroying(&[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let q = q_fixed_basis(&psi, &BasisPair::computational(2, 2)).unwrap();
        assert!(q.q_value.abs() < 1e-12);
        let dep = depolarized_unitary(&CMat::identity(2), 0.1).unwrap();
        let q = q_fixed_basis(&dep, &BasisPair::computational(2, 2)).unwrap();
        assert!((q.q_value - 0.7894).abs() < 1e-4);
        assert_eq!(q.kind, BoundKind::Exact);
    }

    #[test]
    fn q_fixed_basis_qutrit_unitary() {
        let u = states::haar_random_unitary(3, 4);
        let q = q_fixed_basis(&unitary_channel(&u).unwrap(), &BasisPair::random(3, 3, 5)).unwrap();
        assert!((q.q_value - 3f64.log2()).abs() < 1e-8);
        assert_eq!(q.kind, BoundKind::Exact);
    }

    #[test]
    fn output_unitary_invariance() {
        for seed in 0..3 {
            let phi = channels::random_channel(2, 2, 2, seed).unwrap();
            let v = unitary_channel(&states::haar_random_unitary(2, seed + 7)).unwrap();
            let bases = BasisPair::random(2, 2, seed + 20);
            let a = q_fixed_basis(&compose(&v, &phi).unwrap(), &bases).unwrap().q_value;
            let b = q_fixed_basis(&phi, &bases).unwrap().q_value;
            assert!((a - b).abs() < 1e-8);
        }
    }

    fn quick() -> QOptions {
        QOptions {
            restarts: 6,
            ..QOptions::default()
        }
    }

    #[test]
    fn q_inf_unitary_is_constant() {
        let ch = unitary_channel(&states::haar_random_unitary(2, 1)).unwrap();
        let q = q_inf(&ch, &quick(), 3).unwrap();
        assert_eq!(q.kind, BoundKind::Exact);
        assert!((q.q_value - 1.0).abs() < 1e-10);
        let vals: Vec<f64> = q.landscape_samples.iter().map(|s| s.1).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        assert!(var < 1e-9);
    }

    #[test]
    fn q_inf_coherence_destroying_is_zero() {
        let psi = coherence_destroying(&[vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8], vec![0.6, 0.2, 0.2]]).unwrap();
        let q = q_inf(&psi, &quick(), 0).unwrap();
        assert!(q.q_value < 1e-9);
        assert_eq!(q.kind, BoundKind::Exact);
    }

    #[test]
    fn q_inf_depolarized_is_werner() {
        let v = states::haar_random_unitary(2, 8);
        let q = q_inf(&depolarized_unitary(&v, 0.1).unwrap(), &quick(), 1).unwrap();
        assert!((q.q_value - 0.7894).abs() < 1e-4);
        for (_, s) in &q.landscape_samples {
            assert!((s - q.q_value).abs() < 1e-9);
            assert!(q.q_value <= *s);
        }
    }

    #[test]
    fn q_inf_below_fixed_basis() {
        let ch = channels::amplitude_damping(0.3).unwrap();
        let q = q_inf(&ch, &quick(), 2).unwrap().q_value;
        for s in 0..4 {
            let fixed = q_fixed_basis(&ch, &BasisPair::random(2, 2, s)).unwrap().q_value;
            assert!(q <= fixed + 1e-9);
        }
        assert!(independent_basis_min(&ch, 8, &ConvexRoofOptions::default(), 4).unwrap() >= q - 1e-6);
    }

    #[test]
    fn sweep_endpoints_and_monotonicity() {
        let v = states::haar_random_unitary(2, 12);
        let grid = [0.0, 0.1, 0.3, 0.5, 2.0 / 3.0, 0.8, 1.0];
        let out = q_sweep(&v, &grid, &quick(), 0).unwrap();
        assert!((out[0].1.q_value - 1.0).abs() < 1e-10);
        for w in out.windows(2) {
            assert!(w[1].1.q_value <= w[0].1.q_value + 1e-6);
        }
        for (eps, q) in &out {
            if *eps >= 2.0 / 3.0 {
                assert!(q.q_value < 1e-6, "eps {eps} q {}", q.q_value);
            } else if *eps > 0.0 {
                assert!(q.q_value > 0.0 && q.q_value < 1.0);
            }
        }
        assert!(matches!(q_sweep(&v, &[1.5], &quick(), 0), Err(Error::Range { .. })));
    }

    #[test]
    fn rejects_rectangular_channels() {
        let ch = channels::random_channel(2, 3, 2, 0).unwrap();
        assert!(q_inf(&ch, &quick(), 0).is_err());
        assert!(q_fixed_basis(&ch, &BasisPair::random(2, 3, 0)).is_err());
    }
}
