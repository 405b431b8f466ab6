//! State constructors and validators.

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::qmath::{self, c, r, CMat, ZERO};
use crate::rng;

pub const STATE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;
pub const PROB_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix with subsystem
/// dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant at [`STATE_TOL`].
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        validate_density(&mat, &dims).map(|()| Self { mat, dims })
    }

    /// Skips validation; callers must guarantee the invariants.
    pub(crate) fn new_unchecked(mat: CMat, dims: Vec<usize>) -> Self {
        debug_assert_eq!(mat.rows(), dims.iter().product::<usize>());
        Self { mat, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self::new_unchecked(CMat::identity(n).scale_real(1.0 / n as f64), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::new_unchecked(CMat::projector(&psi.vec), psi.dims.clone())
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.rows()
    }

    /// The two factor dimensions, or an error for non-bipartite states.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(dim_err(format!("expected a bipartite state, got dims {:?}", self.dims))),
        }
    }

    /// Tr(ρ²)
    pub fn purity(&self) -> f64 {
        self.mat.data().iter().map(Complex64::norm_sqr).sum()
    }
}

/// Checks Hermiticity, unit trace, then positivity, reporting the first
/// failed invariant.
pub fn validate_density(m: &CMat, dims: &[usize]) -> Result<()> {
    if !m.is_square() {
        return Err(dim_err(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    let product: usize = dims.iter().product();
    if dims.is_empty() || product != m.rows() {
        return Err(dim_err(format!("dims {dims:?} do not match side {}", m.rows())));
    }
    let deviation = m.hermitian_deviation();
    if deviation > STATE_TOL || deviation.is_nan() {
        return Err(Error::Hermiticity { deviation });
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > STATE_TOL {
        return Err(Error::Trace { trace });
    }
    let min_eigenvalue = qmath::eigh(m)?.min_value();
    if min_eigenvalue < -STATE_TOL {
        return Err(Error::Positivity { min_eigenvalue });
    }
    Ok(())
}

/// Unit vector with subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(vec: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().product::<usize>() != vec.len() {
            return Err(dim_err(format!("dims {dims:?} do not match length {}", vec.len())));
        }
        let norm = qmath::vnorm(&vec);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(dim_err(format!("state vector has norm {norm}")));
        }
        Ok(Self { vec, dims })
    }

    /// Rescales `vec` to unit norm.
    pub fn normalized(vec: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let norm = qmath::vnorm(&vec);
        if norm == 0.0 || !norm.is_finite() {
            return Err(dim_err("cannot normalize a zero or non-finite vector"));
        }
        Self::new(vec.iter().map(|z| z / norm).collect(), dims)
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut vec = vec![ZERO; d];
        vec[k] = r(1.0);
        Self { vec, dims: vec![d] }
    }

    pub fn vec(&self) -> &[Complex64] {
        &self.vec
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Columns of `b0` are the basis {|α_i⟩} of the input space, columns of `b1`
/// the basis {|β_j⟩} of the output space.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    b0: CMat,
    b1: CMat,
}

impl BasisPair {
    pub fn new(b0: CMat, b1: CMat) -> Result<Self> {
        check_basis(&b0)?;
        check_basis(&b1)?;
        Ok(Self { b0, b1 })
    }

    pub fn computational(d0: usize, d1: usize) -> Self {
        Self {
            b0: CMat::identity(d0),
            b1: CMat::identity(d1),
        }
    }

    /// Independent Haar-random bases for both spaces.
    pub fn random(d0: usize, d1: usize, seed: u64) -> Self {
        Self {
            b0: haar_random_unitary(d0, rng::derive_seed(seed, 0)),
            b1: haar_random_unitary(d1, rng::derive_seed(seed, 1)),
        }
    }

    pub fn b0(&self) -> &CMat {
        &self.b0
    }

    pub fn b1(&self) -> &CMat {
        &self.b1
    }

    pub fn d0(&self) -> usize {
        self.b0.rows()
    }

    pub fn d1(&self) -> usize {
        self.b1.rows()
    }
}

pub(crate) fn check_basis(b: &CMat) -> Result<()> {
    let deviation = b.unitarity_deviation();
    if deviation > STATE_TOL || deviation.is_nan() {
        return Err(Error::Basis { deviation });
    }
    Ok(())
}

/// (1/√d) Σ_i |α_i⟩ for the basis given by the columns of `basis`.
pub fn max_coherent(d: usize, basis: &CMat) -> Result<PureState> {
    if basis.shape() != (d, d) {
        return Err(dim_err(format!("basis is {:?}, expected {d}x{d}", basis.shape())));
    }
    check_basis(basis)?;
    let s = 1.0 / (d as f64).sqrt();
    let vec = (0..d).map(|i| basis.row(i).iter().sum::<Complex64>() * s).collect();
    PureState::normalized(vec, vec![d])
}

/// (1/√d) Σ_i |i⟩⊗|i⟩ on dims (d, d).
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(dim_err(format!("maximally entangled state needs d >= 2, got {d}")));
    }
    Ok(max_entangled_unchecked(d))
}

pub(crate) fn max_entangled_unchecked(d: usize) -> PureState {
    let s = 1.0 / (d as f64).sqrt();
    let mut vec = vec![ZERO; d * d];
    for i in 0..d {
        vec[i * d + i] = r(s);
    }
    PureState { vec, dims: vec![d, d] }
}

/// Classical-classical state Σ p(j,i) |j⟩⟨j| ⊗ |i⟩⟨i| in the computational
/// product basis; `p[j][i]`, dims (rows of p, columns of p).
pub fn cc_state(p: &[Vec<f64>]) -> Result<DensityMatrix> {
    let d1 = p.len();
    let d0 = p.first().map_or(0, Vec::len);
    if d1 == 0 || d0 == 0 || p.iter().any(|row| row.len() != d0) {
        return Err(Error::Probability("table must be rectangular and non-empty".into()));
    }
    let mut total = 0.0;
    for &x in p.iter().flatten() {
        if !(x >= 0.0) {
            return Err(Error::Probability(format!("negative or NaN entry {x}")));
        }
        total += x;
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::Probability(format!("entries sum to {total}")));
    }
    let diag: Vec<f64> = p.iter().flatten().copied().collect();
    Ok(DensityMatrix::new_unchecked(CMat::real_diag(&diag), vec![d1, d0]))
}

/// Haar-distributed d×d unitary: QR of a complex Gaussian matrix with the
/// phases of R's diagonal moved into Q.
pub fn haar_random_unitary(d: usize, seed: u64) -> CMat {
    let mut g = rng::seeded(seed);
    haar_from_rng(d, &mut g)
}

pub(crate) fn haar_from_rng(d: usize, g: &mut rng::SeededRng) -> CMat {
    let z = CMat::from_fn(d, d, |_, _| rng::complex_gaussian(g));
    let (mut q, rr) = qmath::qr(&z).expect("square by construction");
    for j in 0..d {
        let rjj = rr[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random pure state: first column of a Haar unitary.
pub fn haar_random_pure(d: usize, seed: u64) -> PureState {
    let u = haar_random_unitary(d, seed);
    PureState::normalized(u.col(0), vec![d]).expect("unit column")
}
