//! Quantum channels in Kraus form, their Choi states, and the named channels
//! used throughout the crate.
//!
//! Choi convention: output ⊗ input, normalized to a state,
//!
//! ```text
//! ρ_Φ = (Φ ⊗ id)(|Ω⟩⟨Ω|),   |Ω⟩ = (1/√d₀) Σ_i |i⟩|i⟩,
//! ```
//!
//! so the entry at row (k, i), column (l, j) is Φ_{kl,ij}/d₀ with
//! Φ_{kl,ij} = ⟨k|Φ(|i⟩⟨j|)|l⟩. Channels are compared extensionally, by their
//! action on every |i⟩⟨j|; Kraus sets are never compared directly.

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::qmath::{self, CMat, Subsystem};
use crate::states::{self, BasisPair, DensityMatrix, PROB_TOL};

/// Trace-preservation tolerance for Kraus sets and Choi marginals.
pub const CHANNEL_TOL: f64 = 1e-9;
/// Eigenvalues of d₀·ρ_Φ below this are dropped when extracting Kraus operators.
pub const KRAUS_RANK_CUTOFF: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;

/// A CPTP map given by Kraus operators K_k of shape d_out × d_in with
/// Σ K_k† K_k = I.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMat>,
    d_in: usize,
    d_out: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let (d_out, d_in) = kraus_shape(&kraus)?;
        let defect = tp_defect(&kraus, d_in);
        if defect > CHANNEL_TOL || defect.is_nan() {
            return Err(Error::TracePreservation { defect });
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// Φ(X) = Σ K X K† for an arbitrary d_in × d_in operator.
    pub fn apply_operator(&self, x: &CMat) -> Result<CMat> {
        if x.shape() != (self.d_in, self.d_in) {
            return Err(dim_err(format!(
                "channel input is {0}x{0}, got {1:?}",
                self.d_in,
                x.shape()
            )));
        }
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out = &out + &(&(k * x) * &k.dagger());
        }
        Ok(out)
    }
}

fn kraus_shape(kraus: &[CMat]) -> Result<(usize, usize)> {
    let first = kraus
        .first()
        .ok_or_else(|| dim_err("a channel needs at least one Kraus operator"))?;
    let shape = first.shape();
    if shape.0 == 0 || shape.1 == 0 {
        return Err(dim_err("empty Kraus operator"));
    }
    if kraus.iter().any(|k| k.shape() != shape) {
        return Err(dim_err("Kraus operators have different shapes"));
    }
    Ok(shape)
}

fn kraus_gram(kraus: &[CMat], d_in: usize) -> CMat {
    kraus
        .iter()
        .fold(CMat::zeros(d_in, d_in), |acc, k| &acc + &(&k.dagger() * k))
}

/// max |(Σ K†K − I)_ij|
fn tp_defect(kraus: &[CMat], d_in: usize) -> f64 {
    kraus_gram(kraus, d_in).max_abs_diff(&CMat::identity(d_in))
}

/// The Choi state of a channel; dims (d_out, d_in).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    state: DensityMatrix,
}

impl ChoiState {
    /// Validates density-matrix invariants and Tr_out ρ = I/d_in.
    pub fn new(state: DensityMatrix) -> Result<Self> {
        let (d_out, d_in) = state.bipartite_dims()?;
        let defect = marginal_defect(state.mat(), d_out, d_in)?;
        if defect > CHANNEL_TOL {
            return Err(Error::TracePreservation { defect });
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn mat(&self) -> &CMat {
        self.state.mat()
    }

    pub fn d_out(&self) -> usize {
        self.state.dims()[0]
    }

    pub fn d_in(&self) -> usize {
        self.state.dims()[1]
    }
}

/// max |(d_in · Tr_out ρ − I)_ij|, i.e. the Kraus trace-preservation defect
/// expressed through the Choi marginal.
fn marginal_defect(m: &CMat, d_out: usize, d_in: usize) -> Result<f64> {
    let marginal = qmath::partial_trace(m, (d_out, d_in), Subsystem::Second)?;
    Ok(marginal.scale_real(d_in as f64).max_abs_diff(&CMat::identity(d_in)))
}

pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_operator(rho.mat())?;
    DensityMatrix::new(out, vec![ch.d_out])
}

/// Row-major flattening of a Kraus operator: index k·d_in + i.
fn flatten(k: &CMat) -> &[Complex64] {
    k.data()
}

pub fn choi_matrix(ch: &KrausChannel) -> CMat {
    choi_from_kraus(&ch.kraus, ch.d_in)
}

fn choi_from_kraus(kraus: &[CMat], d_in: usize) -> CMat {
    let n = kraus[0].rows() * d_in;
    let mut out = CMat::zeros(n, n);
    for k in kraus {
        out = &out + &CMat::projector(flatten(k));
    }
    out.scale_real(1.0 / d_in as f64)
}

/// ρ_Φ = (Φ ⊗ id)(|Ω⟩⟨Ω|) with output ⊗ input ordering.
pub fn to_choi(ch: &KrausChannel) -> ChoiState {
    let m = choi_matrix(ch).hermitian_part();
    ChoiState {
        state: DensityMatrix::new_unchecked(m, vec![ch.d_out, ch.d_in]),
    }
}

/// Kraus operators from the spectral decomposition of d_in·ρ_Φ.
pub fn from_choi(c: &ChoiState) -> Result<KrausChannel> {
    kraus_from_choi_matrix(c.mat(), c.d_out(), c.d_in())
}

pub(crate) fn kraus_from_choi_matrix(m: &CMat, d_out: usize, d_in: usize) -> Result<KrausChannel> {
    let e = qmath::eigh(&m.scale_real(d_in as f64))?;
    let min = e.min_value();
    if min < -CHANNEL_TOL {
        return Err(Error::Positivity { min_eigenvalue: min });
    }
    let kraus: Vec<CMat> = e
        .values
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| lambda > KRAUS_RANK_CUTOFF)
        .map(|(idx, &lambda)| {
            let v = e.vector(idx);
            let s = lambda.sqrt();
            CMat::from_fn(d_out, d_in, |k, i| v[k * d_in + i] * s)
        })
        .collect();
    KrausChannel::new(kraus)
}

/// CPTP verdict with the two numbers it is based on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub cptp: bool,
    /// Smallest eigenvalue of the (normalized) Choi matrix.
    pub min_choi_eigenvalue: f64,
    /// max |(d_in·Tr_out ρ − I)_ij|; equals max |(Σ K†K − I)_ij| for Kraus input.
    pub tp_defect: f64,
}

/// Checks complete positivity and trace preservation of a raw Kraus set.
/// Choi matrix (output ⊗ input, unit trace when trace preserving) of an
/// arbitrary Kraus set, CPTP or not.
pub fn choi_of_kraus(kraus: &[CMat]) -> Result<CMat> {
    let (_, d_in) = kraus_shape(kraus)?;
    Ok(choi_from_kraus(kraus, d_in))
}

pub fn is_cptp_kraus(kraus: &[CMat]) -> Result<CptpReport> {
    let (d_out, d_in) = kraus_shape(kraus)?;
    is_cptp_choi(&choi_from_kraus(kraus, d_in), d_out, d_in)
}

/// Checks a normalized Choi matrix with dims (d_out, d_in).
pub fn is_cptp_choi(choi: &CMat, d_out: usize, d_in: usize) -> Result<CptpReport> {
    if choi.shape() != (d_out * d_in, d_out * d_in) {
        return Err(dim_err(format!(
            "Choi matrix is {:?}, expected side {}",
            choi.shape(),
            d_out * d_in
        )));
    }
    let min_choi_eigenvalue = qmath::eigh(choi)?.min_value();
    let tp_defect = marginal_defect(choi, d_out, d_in)?;
    Ok(CptpReport {
        cptp: min_choi_eigenvalue >= -CHANNEL_TOL && tp_defect <= CHANNEL_TOL,
        min_choi_eigenvalue,
        tp_defect,
    })
}

/// `after ∘ before`: Kraus set {A_i B_j}.
pub fn compose(after: &KrausChannel, before: &KrausChannel) -> Result<KrausChannel> {
    if after.d_in != before.d_out {
        return Err(dim_err(format!(
            "cannot compose: outer input {} vs inner output {}",
            after.d_in, before.d_out
        )));
    }
    let kraus = after
        .kraus
        .iter()
        .flat_map(|a| before.kraus.iter().map(move |b| a * b))
        .collect();
    Ok(KrausChannel {
        kraus,
        d_in: before.d_in,
        d_out: after.d_out,
    })
}

fn check_unitary(u: &CMat) -> Result<()> {
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL || deviation.is_nan() {
        return Err(Error::Unitarity { deviation });
    }
    Ok(())
}

pub fn unitary_channel(u: &CMat) -> Result<KrausChannel> {
    check_unitary(u)?;
    Ok(KrausChannel {
        kraus: vec![u.clone()],
        d_in: u.cols(),
        d_out: u.rows(),
    })
}

pub fn identity_channel(d: usize) -> KrausChannel {
    KrausChannel {
        kraus: vec![CMat::identity(d)],
        d_in: d,
        d_out: d,
    }
}

/// Ψ(|i⟩⟨j|) = 0 for i ≠ j and Ψ(|i⟩⟨i|) = Σ_j p[i][j] |j⟩⟨j|, realized by the
/// Kraus set {√p[i][j] |j⟩⟨i|}.
pub fn coherence_destroying(p: &[Vec<f64>]) -> Result<KrausChannel> {
    let d_in = p.len();
    let d_out = p.first().map_or(0, Vec::len);
    if d_in == 0 || d_out == 0 || p.iter().any(|row| row.len() != d_out) {
        return Err(Error::Probability("table must be rectangular and non-empty".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Probability(format!("row {i} has a negative entry")));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Probability(format!("row {i} sums to {total}")));
        }
    }
    let mut kraus = Vec::with_capacity(d_in * d_out);
    for (i, row) in p.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            kraus.push(CMat::unit(d_out, d_in, j, i).scale_real(pij.sqrt()));
        }
    }
    Ok(KrausChannel { kraus, d_in, d_out })
}

/// Completely dephasing channel in the computational basis.
pub fn dephasing(d: usize) -> KrausChannel {
    let p: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    coherence_destroying(&p).expect("identity table is stochastic")
}

/// V_ε(ρ) = (1−ε) VρV† + ε I/d, with Kraus set {√(1−ε) V} ∪ {√(ε/d) |j⟩⟨i|}.
pub fn depolarized_unitary(v: &CMat, eps: f64) -> Result<KrausChannel> {
    check_unitary(v)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Range {
            value: eps,
            min: 0.0,
            max: 1.0,
        });
    }
    let d = v.rows();
    let mut kraus = vec![v.scale_real((1.0 - eps).sqrt())];
    let w = (eps / d as f64).sqrt();
    for i in 0..d {
        for j in 0..d {
            kraus.push(CMat::unit(d, d, j, i).scale_real(w));
        }
    }
    Ok(KrausChannel {
        kraus,
        d_in: d,
        d_out: d,
    })
}

/// Qubit amplitude damping {diag(1, √(1−γ)), √γ |0⟩⟨1|}.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Range {
            value: gamma,
            min: 0.0,
            max: 1.0,
        });
    }
    let k0 = CMat::real_diag(&[1.0, (1.0 - gamma).sqrt()]);
    let k1 = CMat::unit(2, 2, 0, 1).scale_real(gamma.sqrt());
    KrausChannel::new(vec![k0, k1])
}

/// Random CPTP map from the row blocks of a Haar-random isometry
/// C^{d_in} → C^{n_kraus·d_out}.
pub fn random_channel(d_in: usize, d_out: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    let big = n_kraus * d_out;
    if n_kraus == 0 || big < d_in {
        return Err(dim_err(format!(
            "{n_kraus} Kraus operators of {d_out}x{d_in} cannot form an isometry"
        )));
    }
    let u = states::haar_random_unitary(big, seed);
    let kraus = (0..n_kraus).map(|k| u.block(k * d_out, 0, d_out, d_in)).collect();
    KrausChannel::new(kraus)
}

/// Largest entrywise deviation between a(|i⟩⟨j|) and b(|i⟩⟨j|) over all i, j.
pub fn extensional_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    if a.d_in != b.d_in || a.d_out != b.d_out {
        return Err(dim_err("channels act between different spaces"));
    }
    let mut worst = 0.0f64;
    for i in 0..a.d_in {
        for j in 0..a.d_in {
            let e = CMat::unit(a.d_in, a.d_in, i, j);
            worst = worst.max(a.apply_operator(&e)?.max_abs_diff(&b.apply_operator(&e)?));
        }
    }
    Ok(worst)
}

/// The table Φ_{kl,ij} = Tr(F_kl† Φ(E_ij)), E_ij = |α_i⟩⟨α_j|, F_kl = |β_k⟩⟨β_l|.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    d_in: usize,
    d_out: usize,
    /// row (k·d_out + l), column (i·d_in + j)
    entries: CMat,
}

impl PhiMatrix {
    pub(crate) fn from_entries(d_out: usize, d_in: usize, entries: CMat) -> Self {
        Self { d_in, d_out, entries }
    }

    pub fn get(&self, k: usize, l: usize, i: usize, j: usize) -> Complex64 {
        self.entries[(k * self.d_out + l, i * self.d_in + j)]
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    /// (d_out², d_in²) matrix, rows (k,l), columns (i,j).
    pub fn as_matrix(&self) -> &CMat {
        &self.entries
    }
}

pub fn phi_matrix(ch: &KrausChannel, bases: &BasisPair) -> Result<PhiMatrix> {
    let (d_in, d_out) = (ch.d_in, ch.d_out);
    if bases.d0() != d_in || bases.d1() != d_out {
        return Err(dim_err("bases do not match channel dimensions"));
    }
    let (b0, b1) = (bases.b0(), bases.b1());
    let mut entries = CMat::zeros(d_out * d_out, d_in * d_in);
    for i in 0..d_in {
        for j in 0..d_in {
            let e_ij = CMat::outer(&b0.col(i), &b0.col(j));
            let out = ch.apply_operator(&e_ij)?;
            // Tr(F_kl† X) = ⟨β_k|X|β_l⟩
            let rotated = &(&b1.dagger() * &out) * b1;
            for k in 0..d_out {
                for l in 0..d_out {
                    entries[(k * d_out + l, i * d_in + j)] = rotated[(k, l)];
                }
            }
        }
    }
    Ok(PhiMatrix { d_in, d_out, entries })
}

/// ρ ↦ (V ⊗ I) ρ (V ⊗ I)† for a unitary V on the output factor.
pub fn rotate_output(choi: &CMat, v: &CMat, d_in: usize) -> CMat {
    let big = qmath::kron(v, &CMat::identity(d_in));
    &(&big * choi) * &big.dagger()
}
