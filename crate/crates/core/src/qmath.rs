//! Dense complex linear algebra for small dimensions.
//!
//! Everything here works on [`CMat`], a row-major matrix of `Complex64`.
//! Sizes in this crate stay below ~64, so the algorithms favour clarity and
//! determinism over blocking or SIMD: a cyclic Jacobi eigensolver for
//! Hermitian matrices, Householder QR, and matrix functions built from the
//! eigendecomposition.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};

/// Maximum entrywise |m - m†| accepted by [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_REL_TOL: f64 = 1e-15;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Which factor of a bipartite space to keep or act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

impl CMat {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != m) {
            return Err(dim_err("ragged rows"));
        }
        Self::new(n, m, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| r(rows[i][j]))
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = r(x);
        }
        m
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Projector |u⟩⟨u| (no normalization applied).
    pub fn projector(u: &[Complex64]) -> Self {
        Self::outer(u, u)
    }

    /// |i⟩⟨j| in dimension `rows x cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Complex64::conj).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(r(s))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`. Shapes must agree.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest entrywise modulus of `self† self - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.dagger() * self).max_abs_diff(&CMat::identity(self.cols))
    }

    /// Hermitian part (m + m†)/2.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.dagger()).scale_real(0.5)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Sub-block starting at (r0, c0).
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator impls panic on shape mismatch; use `mul` for a checked product.

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "add: shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.shape(), rhs.shape(), "sub: shape mismatch");
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimension mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[p * m..(p + 1) * m];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        CMat {
            rows: n,
            cols: m,
            data: out,
        }
    }
}

pub fn dagger(m: &CMat) -> CMat {
    m.dagger()
}

/// Checked matrix product.
pub fn mul(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.cols != b.rows {
        return Err(dim_err(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a * b)
}

/// Hilbert-Schmidt inner product Tr(a† b).
pub fn frob_inner(a: &CMat, b: &CMat) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(dim_err(format!("inner product of {:?} and {:?}", a.shape(), b.shape())));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Kronecker product; entry (i·b.rows + k, j·b.cols + l) = a(i,j)·b(k,l).
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = CMat::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Partial trace of a bipartite operator with factor dimensions `dims`,
/// returning the reduced operator on the `keep` factor.
pub fn partial_trace(m: &CMat, dims: (usize, usize), keep: Subsystem) -> Result<CMat> {
    let (da, db) = dims;
    if !m.is_square() || m.rows != da * db {
        return Err(dim_err(format!(
            "partial trace of {}x{} with dims ({da},{db})",
            m.rows, m.cols
        )));
    }
    Ok(match keep {
        Subsystem::First => CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::Second => CMat::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    })
}

/// Partial transpose on one factor of a bipartite operator.
pub fn partial_transpose(m: &CMat, dims: (usize, usize), on: Subsystem) -> Result<CMat> {
    let (da, db) = dims;
    if !m.is_square() || m.rows != da * db {
        return Err(dim_err(format!(
            "partial transpose of {}x{} with dims ({da},{db})",
            m.rows, m.cols
        )));
    }
    let mut out = CMat::zeros(m.rows, m.cols);
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    let (src_r, src_c) = match on {
                        Subsystem::First => (j * db + k, i * db + l),
                        Subsystem::Second => (i * db + l, j * db + k),
                    };
                    out[(i * db + k, j * db + l)] = m[(src_r, src_c)];
                }
            }
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMat,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col(k)
    }

    /// V · diag(f(λ)) · V†
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMat {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<Complex64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = CMat::zeros(n, n);
        for (k, &w) in fl.iter().enumerate() {
            if w == ZERO {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Rejects inputs whose Hermitian deviation exceeds [`HERMITIAN_TOL`]; inputs
/// inside the tolerance are diagonalized through their Hermitian part.
pub fn eigh(m: &CMat) -> Result<Eigh> {
    if !m.is_square() {
        return Err(dim_err(format!("eigh of {}x{} matrix", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL || deviation.is_nan() {
        return Err(Error::Hermiticity { deviation });
    }
    Ok(jacobi(m.hermitian_part()))
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    eigh(m).map(|e| e.values)
}

fn jacobi(mut a: CMat) -> Eigh {
    let n = a.rows;
    let mut v = CMat::identity(n);
    for i in 0..n {
        a[(i, i)] = r(a[(i, i)].re);
    }
    let scale = a.frob_norm();
    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
                .map(|(p, q)| a[(p, q)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= JACOBI_REL_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Eigh { values, vectors }
}

/// One complex Jacobi rotation zeroing a[p][q]; accumulates into `v`.
fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = a.rows;
    let phase = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    // W = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
    let w_qp = -phase.conj() * sn;
    let w_qq = phase.conj() * cs;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * cs + akq * w_qp;
        a[(k, q)] = akp * sn + akq * w_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * cs + aqk * w_qp.conj();
        a[(q, k)] = apk * sn + aqk * w_qq.conj();
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = r(a[(p, p)].re);
    a[(q, q)] = r(a[(q, q)].re);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cs + vkq * w_qp;
        v[(k, q)] = vkp * sn + vkq * w_qq;
    }
}

/// Singular values, descending, via the Hermitian dilation [[0, m], [m†, 0]].
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (n, k) = m.shape();
    let mut dil = CMat::zeros(n + k, n + k);
    for i in 0..n {
        for j in 0..k {
            dil[(i, n + j)] = m[(i, j)];
            dil[(n + j, i)] = m[(i, j)].conj();
        }
    }
    let e = jacobi(dil);
    e.values.into_iter().take(n.min(k)).map(|x| x.max(0.0)).collect()
}

/// Trace norm ‖m‖₁ = Tr √(m†m).
pub fn trace_norm(m: &CMat) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    if m.is_square() && m.hermitian_deviation() <= 1e-14 * scale {
        jacobi(m.hermitian_part()).values.iter().map(|x| x.abs()).sum()
    } else {
        singular_values(m).iter().sum()
    }
}

/// ½‖a − b‖₁
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// exp(i·h) for Hermitian `h`.
pub fn expm_i_hermitian(h: &CMat) -> Result<CMat> {
    Ok(eigh(h)?.map(|x| Complex64::from_polar(1.0, x)))
}

/// Principal square root of a positive semidefinite matrix; small negative
/// eigenvalues are clipped to zero.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    Ok(eigh(m)?.map(|x| r(x.max(0.0).sqrt())))
}

/// Inverse square root of a positive definite matrix.
pub fn inv_sqrt_pd(m: &CMat) -> Result<CMat> {
    let e = eigh(m)?;
    let min = e.min_value();
    if min <= 0.0 {
        return Err(Error::Positivity { min_eigenvalue: min });
    }
    Ok(e.map(|x| r(1.0 / x.sqrt())))
}

/// Householder QR of a square matrix: m = q · r with q unitary and r upper
/// triangular.
pub fn qr(m: &CMat) -> Result<(CMat, CMat)> {
    if !m.is_square() {
        return Err(dim_err("qr expects a square matrix"));
    }
    let n = m.rows;
    let mut rmat = m.clone();
    let mut q = CMat::identity(n);
    for k in 0..n.saturating_sub(1) {
        let x: Vec<Complex64> = (k..n).map(|i| rmat[(i, k)]).collect();
        let norm_x = x.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(Complex64::norm_sqr).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // rmat <- (I - 2 v v†/|v|²) rmat on rows k..n
        for j in 0..n {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * rmat[(i, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k..n {
                rmat[(i, j)] -= v[i - k] * f;
            }
        }
        // q <- q (I - 2 v v†/|v|²) on columns k..n
        for i in 0..n {
            let dot: Complex64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            let f = dot * (2.0 / vnorm2);
            for j in k..n {
                q[(i, j)] -= f * v[j - k].conj();
            }
        }
        for i in (k + 1)..n {
            rmat[(i, k)] = ZERO;
        }
    }
    Ok((q, rmat))
}

pub fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Shannon entropy in bits of a (possibly unnormalized-by-noise) spectrum;
/// entries at or below 1e-300 contribute nothing.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Standard single-qubit matrices.
pub mod gates {
    use super::*;

    pub fn pauli_x() -> CMat {
        CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> CMat {
        CMat::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn pauli_z() -> CMat {
        CMat::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub fn hadamard() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMat::from_real_rows(&[&[s, s], &[s, -s]])
    }
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;

    fn bell_projector() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMat::projector(&[r(s), ZERO, ZERO, r(s)])
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&CMat::identity(2), &CMat::identity(2));
        assert_eq!(i4, CMat::identity(4));
        let d = kron(&CMat::real_diag(&[1.0, 0.0]), &CMat::identity(2));
        assert_eq!(d, CMat::real_diag(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&pauli_x(), &pauli_x());
        let out = xx.matvec(&[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_handles_rectangular_factors() {
        let col = CMat::new(2, 1, vec![r(1.0), r(2.0)]).unwrap();
        let row = CMat::new(1, 3, vec![r(1.0), r(0.0), r(-1.0)]).unwrap();
        let k = kron(&col, &row);
        assert_eq!(k.shape(), (2, 3));
        assert_eq!(k[(1, 2)], r(-2.0));
    }

    #[test]
    fn partial_trace_examples() {
        let half = partial_trace(&bell_projector(), (2, 2), Subsystem::First).unwrap();
        assert!(half.max_abs_diff(&CMat::real_diag(&[0.5, 0.5])) < 1e-15);

        let m = CMat::real_diag(&[0.5, 0.0, 0.0, 0.5]);
        let kept = partial_trace(&m, (2, 2), Subsystem::Second).unwrap();
        assert!(kept.max_abs_diff(&CMat::real_diag(&[0.5, 0.5])) < 1e-15);

        let rho = CMat::real_diag(&[0.25, 0.75]);
        let sigma = CMat::from_real_rows(&[&[0.2, 0.1, 0.0], &[0.1, 0.3, 0.0], &[0.0, 0.0, 0.5]]);
        let joint = kron(&rho, &sigma);
        let back = partial_trace(&joint, (2, 3), Subsystem::First).unwrap();
        assert!(back.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = CMat::identity(4);
        assert!(matches!(
            partial_trace(&m, (3, 2), Subsystem::First),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn eigh_diagonal_and_pauli_x() {
        let e = eigh(&CMat::real_diag(&[1.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);

        let e = eigh(&pauli_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        // Hadamard columns up to phase.
        let h = hadamard();
        for k in 0..2 {
            let overlap = vdot(&e.vector(k), &h.col(k)).norm();
            assert!((overlap - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_rank_one_projector() {
        let e = eigh(&bell_projector()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        for &x in &e.values[1..] {
            assert!(x.abs() < 1e-14);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let overlap = vdot(&e.vector(0), &[r(s), ZERO, ZERO, r(s)]).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMat::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eigh(&m), Err(Error::Hermiticity { .. })));
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&CMat::real_diag(&[1.0, -1.0])) - 2.0).abs() < 1e-15);
        let m = &bell_projector() - &CMat::identity(4).scale_real(0.25);
        assert!((trace_norm(&m) - 1.5).abs() < 1e-13);
        assert_eq!(trace_norm(&CMat::zeros(3, 3)), 0.0);
    }

    #[test]
    fn trace_norm_non_hermitian() {
        // singular values of [[1, 2], [0, 0]] are √5 and 0
        let m = CMat::from_real_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        assert!((trace_norm(&m) - 5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn products_and_inner() {
        assert_eq!(frob_inner(&CMat::identity(2), &CMat::identity(2)).unwrap(), r(2.0));
        assert_eq!(frob_inner(&pauli_x(), &pauli_z()).unwrap(), ZERO);
        assert_eq!(mul(&pauli_x(), &pauli_x()).unwrap(), CMat::identity(2));
        assert!(matches!(
            mul(&CMat::zeros(2, 3), &CMat::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(frob_inner(&CMat::zeros(2, 2), &CMat::zeros(3, 3)).is_err());
    }

    #[test]
    fn partial_transpose_of_bell() {
        let pt = partial_transpose(&bell_projector(), (2, 2), Subsystem::Second).unwrap();
        let vals = eigvalsh(&pt).unwrap();
        assert!((vals[3] + 0.5).abs() < 1e-14);
        let pt_first = partial_transpose(&bell_projector(), (2, 2), Subsystem::First).unwrap();
        assert!(pt.max_abs_diff(&pt_first) < 1e-15);
    }

    #[test]
    fn qr_reconstructs() {
        let m = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 + 0.5, (i as f64) - (j as f64)));
        let (q, rr) = qr(&m).unwrap();
        assert!(q.unitarity_deviation() < 1e-13);
        assert!((&q * &rr).max_abs_diff(&m) < 1e-12);
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(rr[(i, j)], ZERO);
            }
        }
    }

    #[test]
    fn expm_of_pauli() {
        // exp(i·π/2·X) = i·X
        let u = expm_i_hermitian(&pauli_x().scale_real(std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(u.max_abs_diff(&pauli_x().scale(I)) < 1e-14);
    }
}
