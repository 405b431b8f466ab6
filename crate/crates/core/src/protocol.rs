//! The ancilla protocol that moves a temporal correlation into a spatial
//! bipartite state.
//!
//! Factor ordering is fixed to (system, B, A) for the whole run, with
//! dimensions (d₀, d₁, d₀) before the channel acts and (d₁, d₁, d₀) after:
//!
//! 1. ρ̃₀ = ρ ⊗ |0⟩⟨0|_B ⊗ |0⟩⟨0|_A
//! 2. ρ̃₁ = U₀ ρ̃₀ U₀†, U₀ copying the {|α_i⟩} basis from the system into A
//! 3. ρ̃₂ = (Φ ⊗ id_B ⊗ id_A)(ρ̃₁)
//! 4. ρ̃₃ = U₁ ρ̃₂ U₁†, U₁ copying the {|β_k⟩} basis from the system into B
//! 5. project the system onto |γ₀⟩ = (1/√d₁) Σ_j |β_j⟩, trace it out and
//!    renormalize; the normalization is the success probability 1/d₁.

use num_complex::Complex64;

use crate::channels::{self, KrausChannel};
use crate::error::{dim_err, Result};
use crate::qmath::{self, r, CMat, Subsystem};
use crate::states::{self, BasisPair, DensityMatrix};

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    /// Probability of the |γ₀⟩ projection.
    pub success_prob: f64,
    /// Conditional state on B ⊗ A, dims (d₁, d₀).
    pub joint: DensityMatrix,
    /// ρ̃₀ … ρ̃₃ on (system, B, A).
    pub trace_log: Vec<(&'static str, DensityMatrix)>,
}

/// A d²×d² unitary with U(|α_i⟩ ⊗ |0⟩) = |α_i⟩ ⊗ |α_i⟩.
///
/// Built as (B ⊗ B) · S · (B† ⊗ I) with S|i⟩|j⟩ = |i⟩|j + i mod d⟩, so the
/// ancilla's |0⟩ is the computational zero whatever the basis.
pub fn copy_unitary(d: usize, basis: &CMat) -> Result<CMat> {
    if basis.shape() != (d, d) {
        return Err(dim_err(format!("basis is {:?}, expected {d}x{d}", basis.shape())));
    }
    states::check_basis(basis)?;
    let mut shift = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            shift[(i * d + (j + i) % d, i * d + j)] = r(1.0);
        }
    }
    let pre = qmath::kron(&basis.dagger(), &CMat::identity(d));
    let post = qmath::kron(basis, basis);
    Ok(&(&post * &shift) * &pre)
}

/// Embeds an operator on (system, A) into (system, B, A) as op ⊗ id_B.
fn lift_system_ancilla_a(op: &CMat, d_sys: usize, d_b: usize, d_a: usize) -> CMat {
    let n = d_sys * d_b * d_a;
    let mut out = CMat::zeros(n, n);
    for s in 0..d_sys {
        for a in 0..d_a {
            for s2 in 0..d_sys {
                for a2 in 0..d_a {
                    let z = op[(s * d_a + a, s2 * d_a + a2)];
                    if z == qmath::ZERO {
                        continue;
                    }
                    for b in 0..d_b {
                        out[((s * d_b + b) * d_a + a, (s2 * d_b + b) * d_a + a2)] = z;
                    }
                }
            }
        }
    }
    out
}

fn conjugate(u: &CMat, rho: &CMat) -> CMat {
    &(u * rho) * &u.dagger()
}

fn check_dims(rho0: &DensityMatrix, ch: &KrausChannel, bases: &BasisPair) -> Result<()> {
    if rho0.side() != ch.d_in() || bases.d0() != ch.d_in() || bases.d1() != ch.d_out() {
        return Err(dim_err(format!(
            "state side {}, channel {}→{}, bases ({}, {})",
            rho0.side(),
            ch.d_in(),
            ch.d_out(),
            bases.d0(),
            bases.d1()
        )));
    }
    Ok(())
}

pub fn run_protocol(rho0: &DensityMatrix, ch: &KrausChannel, bases: &BasisPair) -> Result<ProtocolResult> {
    check_dims(rho0, ch, bases)?;
    let (d0, d1) = (ch.d_in(), ch.d_out());

    let zero_b = CMat::unit(d1, d1, 0, 0);
    let zero_a = CMat::unit(d0, d0, 0, 0);
    let rho_0 = qmath::kron(&qmath::kron(rho0.mat(), &zero_b), &zero_a);

    let u0 = lift_system_ancilla_a(&copy_unitary(d0, bases.b0())?, d0, d1, d0);
    let rho_1 = conjugate(&u0, &rho_0);

    let id_rest = CMat::identity(d1 * d0);
    let rho_2 = ch
        .kraus()
        .iter()
        .fold(CMat::zeros(d1 * d1 * d0, d1 * d1 * d0), |acc, k| {
            &acc + &conjugate(&qmath::kron(k, &id_rest), &rho_1)
        });

    let u1 = qmath::kron(&copy_unitary(d1, bases.b1())?, &CMat::identity(d0));
    let rho_3 = conjugate(&u1, &rho_2);

    let s = 1.0 / (d1 as f64).sqrt();
    let gamma0: Vec<Complex64> = (0..d1)
        .map(|i| bases.b1().row(i).iter().sum::<Complex64>() * s)
        .collect();
    let proj = qmath::kron(&CMat::projector(&gamma0), &id_rest);
    let projected = conjugate(&proj, &rho_3);
    let success_prob = projected.trace().re;
    let reduced = qmath::partial_trace(&projected, (d1, d1 * d0), Subsystem::Second)?;
    let joint = reduced.scale_real(1.0 / success_prob).hermitian_part();

    let before = vec![d0, d1, d0];
    let after = vec![d1, d1, d0];
    Ok(ProtocolResult {
        success_prob,
        joint: DensityMatrix::new_unchecked(joint, vec![d1, d0]),
        trace_log: vec![
            ("rho0", DensityMatrix::new_unchecked(rho_0, before.clone())),
            ("rho1", DensityMatrix::new_unchecked(rho_1, before)),
            ("rho2", DensityMatrix::new_unchecked(rho_2, after.clone())),
            ("rho3", DensityMatrix::new_unchecked(rho_3, after)),
        ],
    })
}

/// Σ_{i,j} Σ_{k,l} ρ_ij Φ_{kl,ij} F_kl ⊗ E_ij evaluated directly from the
/// matrix elements, independent of the protocol simulation.
pub fn analytic_joint(rho0: &DensityMatrix, ch: &KrausChannel, bases: &BasisPair) -> Result<DensityMatrix> {
    check_dims(rho0, ch, bases)?;
    let (d0, d1) = (ch.d_in(), ch.d_out());
    let (b0, b1) = (bases.b0(), bases.b1());
    let rho_ab = &(&b0.dagger() * rho0.mat()) * b0;
    let phi = channels::phi_matrix(ch, bases)?;
    // coordinates in the (β, α) product basis
    let coords = CMat::from_fn(d1 * d0, d1 * d0, |row, col| {
        let (k, i) = (row / d0, row % d0);
        let (l, j) = (col / d0, col % d0);
        rho_ab[(i, j)] * phi.get(k, l, i, j)
    });
    let frame = qmath::kron(b1, b0);
    let joint = conjugate(&frame, &coords).hermitian_part();
    Ok(DensityMatrix::new_unchecked(joint, vec![d1, d0]))
}
