//! Entanglement measures and norm bounds.
//!
//! Exact values are only available for pure states and two qubits. Everything
//! else is a certified one-sided bound, and [`BoundKind`] says which side.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::KrausChannel;
use crate::error::{dim_err, Result};
use crate::qmath::{self, gates, r, CMat, Subsystem, ZERO};
use crate::quantifier::sigma_u;
use crate::rng;
use crate::simplex::NelderMead;
use crate::states::{self, DensityMatrix, PureState};
use crate::tomography::project_to_simplex;

/// Partial-transpose eigenvalues at or above this count as non-negative.
pub const PPT_TOL: f64 = 1e-10;

/// Eigenvalues below this are dropped from decompositions.
const RANK_CUTOFF: f64 = 1e-12;

/// Eigenvalues at or below this are treated as round-off in the concurrence.
const SUPPORT_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    UpperBound,
    LowerBound,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::UpperBound => "upper_bound",
            BoundKind::LowerBound => "lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    /// Bits.
    pub value: f64,
    pub kind: BoundKind,
    pub method: &'static str,
    pub iterations: usize,
}

/// Settings for the convex-roof search.
#[derive(Debug, Clone, Copy)]
pub struct ConvexRoofOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for ConvexRoofOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 200,
            tolerance: 1e-8,
        }
    }
}

fn bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(dim_err(format!("expected a bipartite state, got dims {dims:?}"))),
    }
}

/// Reshapes a vector on C^{da} ⊗ C^{db} into its da × db coefficient matrix.
fn coefficient_matrix(v: &[Complex64], da: usize, db: usize) -> CMat {
    CMat::from_fn(da, db, |i, j| v[i * db + j])
}

fn reduced_first(v: &[Complex64], da: usize, db: usize) -> CMat {
    let m = coefficient_matrix(v, da, db);
    (&m * &m.dagger()).hermitian_part()
}

/// Entropy of either marginal of a pure bipartite state, in bits.
pub fn entropy_of_entanglement(psi: &PureState) -> Result<f64> {
    let (da, db) = bipartite(psi.dims())?;
    let spectrum = qmath::eigvalsh(&reduced_first(psi.vec(), da, db))?;
    Ok(qmath::entropy_bits(&spectrum))
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    qmath::entropy_bits(&[x, 1.0 - x])
}

fn two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(dim_err(format!("two-qubit state required, got dims {:?}", rho.dims())));
    }
    Ok(())
}

/// Wootters concurrence of a two-qubit state.
///
/// With ρ = WW† over the numerical support, the square roots of the spectrum
/// of ρ(Y⊗Y)ρ*(Y⊗Y) are the singular values of Wᵀ(Y⊗Y)W. Computing them this
/// way avoids square roots of round-off eigenvalues.
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    two_qubit(rho)?;
    let yy = qmath::kron(&gates::pauli_y(), &gates::pauli_y());
    let e = qmath::eigh(rho.mat())?;
    let support: Vec<usize> = (0..4).filter(|&k| e.values[k] > SUPPORT_CUTOFF).collect();
    let w = CMat::from_fn(4, support.len(), |i, j| {
        let k = support[j];
        e.vectors[(i, k)] * e.values[k].sqrt()
    });
    let tau = &(&w.transpose() * &yy) * &w;
    let mut lam = qmath::singular_values(&tau);
    lam.sort_by(|a, b| b.total_cmp(a));
    lam.resize(4, 0.0);
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).clamp(0.0, 1.0))
}

/// Entanglement of formation as a function of the concurrence.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// The state vector when ρ has rank one.
fn pure_vector(rho: &DensityMatrix) -> Result<Option<Vec<Complex64>>> {
    let e = qmath::eigh(rho.mat())?;
    if e.values.iter().skip(1).all(|v| v.abs() <= RANK_CUTOFF) {
        let v = e.vector(0);
        let n = qmath::vnorm(&v);
        return Ok(Some(v.into_iter().map(|z| z / n).collect()));
    }
    Ok(None)
}

pub fn eof_2q(rho: &DensityMatrix) -> Result<EntanglementReport> {
    two_qubit(rho)?;
    if let Some(psi) = pure_vector(rho)? {
        return Ok(EntanglementReport {
            value: entropy_of_entanglement(&PureState::new(psi, vec![2, 2])?)?,
            kind: BoundKind::Exact,
            method: "pure_state",
            iterations: 0,
        });
    }
    Ok(EntanglementReport {
        value: eof_from_concurrence(concurrence_2q(rho)?),
        kind: BoundKind::Exact,
        method: "wootters",
        iterations: 0,
    })
}

/// Exact for two qubits, a convex-roof upper bound otherwise.
pub fn entanglement_of_formation(
    rho: &DensityMatrix,
    opts: &ConvexRoofOptions,
    seed: u64,
) -> Result<EntanglementReport> {
    if rho.dims() == [2, 2] {
        eof_2q(rho)
    } else {
        eof_upper_bound_with(rho, opts, seed)
    }
}

pub fn eof_upper_bound(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<EntanglementReport> {
    let opts = ConvexRoofOptions {
        restarts,
        ..ConvexRoofOptions::default()
    };
    eof_upper_bound_with(rho, &opts, seed)
}

/// Convex-roof upper bound on the entanglement of formation.
///
/// A decomposition into m = 2r pure states (r = rank) is ψ_i = Σ_k U_ik w_k,
/// where w_k = √λ_k v_k come from the spectral decomposition and U is an m × r
/// isometry. Restart 0 starts from the spectral decomposition itself, the
/// others from Haar-random isometries. Each start is refined by gradient
/// descent on the isometry manifold.
///
/// The report is `Exact` when the state is pure or the bound reaches zero.
pub fn eof_upper_bound_with(rho: &DensityMatrix, opts: &ConvexRoofOptions, seed: u64) -> Result<EntanglementReport> {
    let (da, db) = bipartite(rho.dims())?;
    if da.min(db) < 2 {
        return Err(dim_err(format!("both factors need dimension ≥ 2, got ({da}, {db})")));
    }
    let e = qmath::eigh(rho.mat())?;
    let weighted: Vec<Vec<Complex64>> = (0..e.values.len())
        .filter(|&k| e.values[k] > RANK_CUTOFF)
        .map(|k| {
            let s = e.values[k].sqrt();
            e.vector(k).into_iter().map(|z| z * s).collect()
        })
        .collect();
    let rank = weighted.len();

    if rank == 1 {
        let psi = PureState::normalized(weighted[0].clone(), vec![da, db])?;
        return Ok(EntanglementReport {
            value: entropy_of_entanglement(&psi)?,
            kind: BoundKind::Exact,
            method: "pure_state",
            iterations: 0,
        });
    }

    let roof = ConvexRoof {
        w: CMat::from_fn(rank, da * db, |k, x| weighted[k][x]),
        da,
        db,
    };
    let m = 2 * rank;
    let start_for = |restart: usize| -> CMat {
        if restart == 0 {
            CMat::from_fn(m, rank, |i, k| if i == k { r(1.0) } else { ZERO })
        } else {
            let u = states::haar_random_unitary(m, rng::derive_seed(seed, restart as u64));
            u.block(0, 0, m, rank)
        }
    };

    let first = roof.descend(start_for(0), opts);
    if first.0 <= 1e-14 {
        return Ok(zero_report(first.1));
    }
    let rest: Vec<(f64, usize)> = (1..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| roof.descend(start_for(k), opts))
        .collect();
    let mut best = first;
    for cand in rest {
        if cand.0 < best.0 {
            best.0 = cand.0;
        }
        best.1 += cand.1;
    }
    if best.0 <= 1e-14 {
        return Ok(zero_report(best.1));
    }
    Ok(EntanglementReport {
        value: best.0.min((da.min(db) as f64).log2()),
        kind: BoundKind::UpperBound,
        method: "convex_roof",
        iterations: best.1,
    })
}

fn zero_report(iterations: usize) -> EntanglementReport {
    EntanglementReport {
        value: 0.0,
        kind: BoundKind::Exact,
        method: "convex_roof",
        iterations,
    }
}

struct ConvexRoof {
    /// Rows are the weighted eigenvectors.
    w: CMat,
    da: usize,
    db: usize,
}

impl ConvexRoof {
    /// Average marginal entropy (bits) of the decomposition given by `u`, and
    /// optionally its Euclidean gradient with respect to `u`.
    fn evaluate(&self, u: &CMat, with_grad: bool) -> (f64, Option<CMat>) {
        let psi = u * &self.w;
        let dim = self.da * self.db;
        let mut total = 0.0;
        let mut grad_rows = if with_grad {
            Some(CMat::zeros(psi.rows(), dim))
        } else {
            None
        };
        for i in 0..psi.rows() {
            let row = psi.row(i);
            let p: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            if p <= 1e-300 {
                continue;
            }
            let m = coefficient_matrix(row, self.da, self.db);
            let sigma = (&m * &m.dagger()).hermitian_part();
            let e = qmath::eigh(&sigma).expect("hermitian by construction");
            let mut s = 0.0;
            for &mu in &e.values {
                if mu > 0.0 {
                    s -= mu * mu.ln();
                }
            }
            total += (s + p * p.ln()) / std::f64::consts::LN_2;
            if let Some(g) = grad_rows.as_mut() {
                let l = e.map(|mu| r(mu.max(1e-300).ln() - p.ln()));
                let gm = (&l * &m).scale_real(-2.0 / std::f64::consts::LN_2);
                for a in 0..self.da {
                    for b in 0..self.db {
                        g[(i, a * self.db + b)] = gm[(a, b)];
                    }
                }
            }
        }
        (total, grad_rows.map(|g| &g * &self.w.dagger()))
    }

    /// Armijo gradient descent on the Stiefel manifold with a QR retraction.
    fn descend(&self, mut u: CMat, opts: &ConvexRoofOptions) -> (f64, usize) {
        let (mut f, mut g) = self.evaluate(&u, true);
        let mut step = 0.5;
        let mut iterations = 0;
        while iterations < opts.max_iterations {
            iterations += 1;
            let e = g.take().expect("gradient requested");
            let ue = &u.dagger() * &e;
            let sym = (&ue + &ue.dagger()).scale_real(0.5);
            let riem = &e - &(&u * &sym);
            let gnorm2 = riem.frob_norm().powi(2);
            if gnorm2 < 1e-24 {
                break;
            }
            let mut accepted = None;
            for _ in 0..40 {
                let trial = retract(&(&u - &riem.scale_real(step)));
                let (ft, _) = self.evaluate(&trial, false);
                if ft <= f - 1e-4 * step * gnorm2 {
                    accepted = Some((trial, ft));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, fnext)) = accepted else { break };
            let gain = f - fnext;
            u = next;
            let (fv, gv) = self.evaluate(&u, true);
            f = fv;
            g = gv;
            step *= 2.0;
            if gain <= opts.tolerance * 1e-3 || f <= 1e-14 {
                break;
            }
        }
        (f.max(0.0), iterations)
    }
}

/// Thin QR retraction: Gram–Schmidt on the columns (run twice for
/// stability), which yields the Q factor with positive diagonal R.
fn retract(m: &CMat) -> CMat {
    let mut out = m.clone();
    for _ in 0..2 {
        for j in 0..out.cols() {
            let mut v = out.col(j);
            for k in 0..j {
                let q = out.col(k);
                let overlap = qmath::vdot(&q, &v);
                for (vi, qi) in v.iter_mut().zip(&q) {
                    *vi -= overlap * qi;
                }
            }
            let n = qmath::vnorm(&v);
            let v: Vec<Complex64> = v.into_iter().map(|z| z / n).collect();
            out.set_col(j, &v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptVerdict {
    pub ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn is_ppt(rho: &DensityMatrix) -> Result<PptVerdict> {
    let dims = bipartite(rho.dims())?;
    let pt = qmath::partial_transpose(rho.mat(), dims, Subsystem::Second)?;
    let min_eigenvalue = qmath::eigh(&pt)?.min_value();
    Ok(PptVerdict {
        ppt: min_eigenvalue >= -PPT_TOL,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone)]
pub struct SeparableDistance {
    /// Trace norm ‖ρ − ω‖₁.
    pub value: f64,
    /// A separable state achieving `value`.
    pub omega: CMat,
    pub method: &'static str,
}

/// Upper bound on min over separable ω of ‖ρ − ω‖₁.
///
/// Candidates, all separable:
/// - ρ itself when it is PPT and d₀d₁ ≤ 6;
/// - the furthest point towards ρ on the segment from I/D that stays inside
///   the separable ball ‖ω − I/D‖₂ ≤ 1/√(D(D−1));
/// - ρ dephased in the eigenbases of its marginals;
/// - per restart, an optimized mixture of D² product pure states.
///
/// The mixture search is skipped once a candidate reaches zero.
pub fn distance_to_separable_upper(rho: &DensityMatrix, restarts: usize, seed: u64) -> Result<SeparableDistance> {
    let (da, db) = bipartite(rho.dims())?;
    let dim = da * db;
    let mut best = SeparableDistance {
        value: f64::INFINITY,
        omega: CMat::identity(dim).scale_real(1.0 / dim as f64),
        method: "maximally_mixed",
    };
    let offer = |value: f64, omega: CMat, method: &'static str, best: &mut SeparableDistance| {
        if value < best.value {
            *best = SeparableDistance { value, omega, method };
        }
    };

    if dim <= 6 && is_ppt(rho)?.ppt {
        offer(0.0, rho.mat().clone(), "ppt_low_dimension", &mut best);
    }

    let mixed = CMat::identity(dim).scale_real(1.0 / dim as f64);
    let offset = rho.mat() - &mixed;
    let radius = 1.0 / ((dim * (dim - 1)) as f64).sqrt();
    let t = if offset.frob_norm() > 0.0 {
        (radius / offset.frob_norm()).min(1.0)
    } else {
        1.0
    };
    let ball = &mixed.scale_real(1.0 - t) + &rho.mat().scale_real(t);
    offer(
        qmath::trace_norm(&(rho.mat() - &ball)),
        ball,
        "separable_ball",
        &mut best,
    );

    let (local_a, local_b) = marginal_product_basis(rho, da, db)?;
    let mut dephased = CMat::zeros(dim, dim);
    for a in &local_a {
        for b in &local_b {
            let v = qmath::kron_vec(a, b);
            let p = qmath::vdot(&v, &rho.mat().matvec(&v)).re.max(0.0);
            dephased = &dephased + &CMat::projector(&v).scale_real(p);
        }
    }
    offer(
        qmath::trace_norm(&(rho.mat() - &dephased)),
        dephased,
        "local_dephasing",
        &mut best,
    );

    if best.value <= 1e-12 {
        return Ok(best);
    }
    let mixtures: Vec<(f64, CMat)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut mix = ProductMixture::start(rho, &local_a, &local_b, k, seed);
            mix.optimize(rho.mat(), 20, 40);
            let omega = mix.state();
            (qmath::trace_norm(&(rho.mat() - &omega)), omega)
        })
        .collect();
    for (value, omega) in mixtures {
        offer(value, omega, "product_mixture", &mut best);
    }
    Ok(best)
}

/// Eigenbases of the two marginals.
type ProductBasis = (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>);

fn marginal_product_basis(
    rho: &DensityMatrix,
    da: usize,
    db: usize,
) -> Result<ProductBasis> {
    let ea = qmath::eigh(&qmath::partial_trace(rho.mat(), (da, db), Subsystem::First)?)?;
    let eb = qmath::eigh(&qmath::partial_trace(rho.mat(), (da, db), Subsystem::Second)?)?;
    Ok((
        (0..da).map(|k| ea.vector(k)).collect(),
        (0..db).map(|k| eb.vector(k)).collect(),
    ))
}

struct ProductMixture {
    weights: Vec<f64>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
}

impl ProductMixture {
    /// Restart 0 starts from the local-dephasing mixture, padded with random
    /// zero-weight product states; other restarts are random with equal weights.
    fn start(
        rho: &DensityMatrix,
        local_a: &[Vec<Complex64>],
        local_b: &[Vec<Complex64>],
        restart: usize,
        seed: u64,
    ) -> Self {
        let (da, db) = (local_a.len(), local_b.len());
        let count = (da * db) * (da * db);
        let mut g = rng::stream(seed, restart as u64);
        let mut random_vec = |d: usize| -> Vec<Complex64> {
            let v: Vec<Complex64> = (0..d).map(|_| rng::complex_gaussian(&mut g)).collect();
            let n = qmath::vnorm(&v);
            v.into_iter().map(|z| z / n).collect()
        };
        let mut a = Vec::with_capacity(count);
        let mut b = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        if restart == 0 {
            for x in local_a {
                for y in local_b {
                    let v = qmath::kron_vec(x, y);
                    weights.push(qmath::vdot(&v, &rho.mat().matvec(&v)).re.max(0.0));
                    a.push(x.clone());
                    b.push(y.clone());
                }
            }
        }
        while a.len() < count {
            a.push(random_vec(da));
            b.push(random_vec(db));
            weights.push(if restart == 0 { 0.0 } else { 1.0 / count as f64 });
        }
        let weights = project_to_simplex(&weights);
        Self { weights, a, b }
    }

    fn projector(&self, k: usize) -> CMat {
        CMat::projector(&qmath::kron_vec(&self.a[k], &self.b[k]))
    }

    fn state(&self) -> CMat {
        let dim = self.a[0].len() * self.b[0].len();
        let mut out = CMat::zeros(dim, dim);
        for (k, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                out = &out + &self.projector(k).scale_real(w);
            }
        }
        out
    }

    /// Alternates projected subgradient steps on the weights with simplex
    /// descent on each product state that carries weight.
    fn optimize(&mut self, rho: &CMat, rounds: usize, local_iterations: usize) {
        let mut projectors: Vec<CMat> = (0..self.weights.len()).map(|k| self.projector(k)).collect();
        let objective = |w: &[f64], ps: &[CMat]| -> f64 {
            let mut omega = rho.clone();
            for (p, &wk) in ps.iter().zip(w) {
                if wk > 0.0 {
                    omega = &omega - &p.scale_real(wk);
                }
            }
            qmath::trace_norm(&omega)
        };
        let mut value = objective(&self.weights, &projectors);
        let mut step = 0.1;
        for _ in 0..rounds {
            // weights
            let mut diff = rho.clone();
            for (p, &wk) in projectors.iter().zip(&self.weights) {
                if wk > 0.0 {
                    diff = &diff - &p.scale_real(wk);
                }
            }
            let sign = qmath::eigh(&diff.hermitian_part()).expect("hermitian").map(|x| {
                r(if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                })
            });
            let grad: Vec<f64> = projectors
                .iter()
                .map(|p| -qmath::frob_inner(&sign, p).expect("shape").re)
                .collect();
            for _ in 0..20 {
                let trial: Vec<f64> = self.weights.iter().zip(&grad).map(|(w, g)| w - step * g).collect();
                let trial = project_to_simplex(&trial);
                let v = objective(&trial, &projectors);
                if v < value {
                    self.weights = trial;
                    value = v;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }

            // local states
            let (da, db) = (self.a[0].len(), self.b[0].len());
            let nm = NelderMead {
                max_iterations: local_iterations,
                tolerance: 1e-12,
                initial_step: 0.1,
            };
            for k in 0..projectors.len() {
                let wk = self.weights[k];
                if wk <= 0.0 {
                    continue;
                }
                let mut rest = rho.clone();
                for (j, (p, &wj)) in projectors.iter().zip(&self.weights).enumerate() {
                    if j != k && wj > 0.0 {
                        rest = &rest - &p.scale_real(wj);
                    }
                }
                let x0: Vec<f64> = self.a[k].iter().chain(&self.b[k]).flat_map(|z| [z.re, z.im]).collect();
                let unpack = |x: &[f64]| -> Option<(Vec<Complex64>, Vec<Complex64>)> {
                    let zs: Vec<Complex64> = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
                    let (za, zb) = zs.split_at(da);
                    let (na, nb) = (qmath::vnorm(za), qmath::vnorm(zb));
                    if na < 1e-12 || nb < 1e-12 {
                        return None;
                    }
                    Some((za.iter().map(|z| z / na).collect(), zb.iter().map(|z| z / nb).collect()))
                };
                let found = nm.minimize(&x0, |x| match unpack(x) {
                    Some((va, vb)) => {
                        let p = CMat::projector(&qmath::kron_vec(&va, &vb));
                        qmath::trace_norm(&(&rest - &p.scale_real(wk)))
                    }
                    None => f64::INFINITY,
                });
                if found.value < value {
                    if let Some((va, vb)) = unpack(&found.x) {
                        debug_assert_eq!(vb.len(), db);
                        projectors[k] = CMat::projector(&qmath::kron_vec(&va, &vb));
                        self.a[k] = va;
                        self.b[k] = vb;
                        value = found.value;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiamondBound {
    pub value: f64,
    /// Pure input on system ⊗ ancilla attaining `value`.
    pub input: PureState,
    pub kind: BoundKind,
}

fn apply_on_system(ch: &KrausChannel, v: &[Complex64]) -> CMat {
    let d_anc = v.len() / ch.d_in();
    let id = CMat::identity(d_anc);
    let outer = CMat::projector(v);
    let mut out = CMat::zeros(ch.d_out() * d_anc, ch.d_out() * d_anc);
    for k in ch.kraus() {
        let kk = qmath::kron(k, &id);
        out = &out + &(&(&kk * &outer) * &kk.dagger());
    }
    out
}

/// Trace norm of ((a − b) ⊗ id)(|ζ⟩⟨ζ|) for a unit vector ζ on system ⊗ ancilla
/// with ancilla dimension d_in.
pub fn channel_difference_norm(a: &KrausChannel, b: &KrausChannel, zeta: &[Complex64]) -> f64 {
    qmath::trace_norm(&(&apply_on_system(a, zeta) - &apply_on_system(b, zeta)))
}

/// Lower bound on the diamond norm ‖a − b‖⋄ by maximizing over pure inputs.
///
/// Starts are the maximally entangled state, σ_U for Haar U on even restarts
/// and Haar-random pure states on odd ones; each is refined by simplex ascent.
pub fn diamond_lower(a: &KrausChannel, b: &KrausChannel, restarts: usize, seed: u64) -> Result<DiamondBound> {
    if a.d_in() != b.d_in() || a.d_out() != b.d_out() {
        return Err(dim_err(format!(
            "channel shapes differ: {}→{} vs {}→{}",
            a.d_in(),
            a.d_out(),
            b.d_in(),
            b.d_out()
        )));
    }
    let d = a.d_in();
    let dim = d * d;
    let start_for = |k: usize| -> Vec<Complex64> {
        if k == 0 {
            return states::max_entangled_unchecked(d).vec().to_vec();
        }
        let s = rng::derive_seed(seed, k as u64);
        if k % 2 == 1 {
            let u = states::haar_random_unitary(d, s);
            sigma_u(&u).expect("haar unitary").vec().to_vec()
        } else {
            states::haar_random_pure(dim, s).vec().to_vec()
        }
    };
    let nm = NelderMead {
        max_iterations: 200,
        tolerance: 1e-12,
        initial_step: 0.1,
    };
    let unpack = |x: &[f64]| -> Option<Vec<Complex64>> {
        let v: Vec<Complex64> = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let n = qmath::vnorm(&v);
        (n > 1e-12).then(|| v.into_iter().map(|z| z / n).collect())
    };
    let found: Vec<(f64, Vec<Complex64>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let v0 = start_for(k);
            let f0 = channel_difference_norm(a, b, &v0);
            let x0: Vec<f64> = v0.iter().flat_map(|z| [z.re, z.im]).collect();
            let m = nm.minimize(&x0, |x| match unpack(x) {
                Some(v) => -channel_difference_norm(a, b, &v),
                None => f64::INFINITY,
            });
            match unpack(&m.x) {
                Some(v) if -m.value > f0 => (-m.value, v),
                _ => (f0, v0),
            }
        })
        .collect();
    let (value, v) = found
        .into_iter()
        .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
        .expect("at least one restart");
    Ok(DiamondBound {
        value,
        input: PureState::normalized(v, vec![d, d])?,
        kind: BoundKind::LowerBound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarized_unitary, identity_channel, unitary_channel};

    fn werner(p: f64) -> DensityMatrix {
        let bell = states::max_entangled(2).unwrap().to_density();
        let m = &bell.mat().scale_real(p) + &CMat::identity(4).scale_real((1.0 - p) / 4.0);
        DensityMatrix::new(m, vec![2, 2]).unwrap()
    }

    fn bell() -> DensityMatrix {
        werner(1.0)
    }

    #[test]
    fn entropy_of_entanglement_examples() {
        let b = states::max_entangled(2).unwrap();
        assert!((entropy_of_entanglement(&b).unwrap() - 1.0).abs() < 1e-12);
        let plus = [r(1.0 / 2f64.sqrt()), r(1.0 / 2f64.sqrt())];
        let prod = PureState::new(qmath::kron_vec(&[r(1.0), ZERO], &plus), vec![2, 2]).unwrap();
        assert!(entropy_of_entanglement(&prod).unwrap().abs() < 1e-12);
        let m3 = states::max_entangled(3).unwrap();
        assert!((entropy_of_entanglement(&m3).unwrap() - 3f64.log2()).abs() < 1e-10);
        let flat = PureState::basis(4, 0);
        assert!(entropy_of_entanglement(&flat).is_err());
    }

    #[test]
    fn entropy_equal_on_both_marginals() {
        let psi = states::haar_random_pure(6, 3);
        let (da, db) = (2, 3);
        let m = coefficient_matrix(psi.vec(), da, db);
        let ea = qmath::entropy_bits(&qmath::eigvalsh(&(&m * &m.dagger())).unwrap());
        let eb = qmath::entropy_bits(&qmath::eigvalsh(&(&m.dagger() * &m).hermitian_part()).unwrap());
        assert!((ea - eb).abs() < 1e-10);
        let psi = PureState::new(psi.vec().to_vec(), vec![2, 3]).unwrap();
        assert!((entropy_of_entanglement(&psi).unwrap() - ea).abs() < 1e-10);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence_2q(&bell()).unwrap() - 1.0).abs() < 1e-10);
        let prod = DensityMatrix::from_pure(&states::haar_random_pure(2, 1)).mat().clone();
        let prod = qmath::kron(&prod, DensityMatrix::from_pure(&states::haar_random_pure(2, 2)).mat());
        let prod = DensityMatrix::new(prod, vec![2, 2]).unwrap();
        assert!(concurrence_2q(&prod).unwrap() < 1e-7);
        for p in [0.0_f64, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            let expected = ((3.0 * p - 1.0) / 2.0_f64).max(0.0);
            assert!((concurrence_2q(&werner(p)).unwrap() - expected).abs() < 1e-9, "p={p}");
        }
        let qutrits = DensityMatrix::maximally_mixed(vec![3, 3]);
        assert!(concurrence_2q(&qutrits).is_err());
    }

    #[test]
    fn eof_examples() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        assert!((eof_from_concurrence(0.85) - 0.7894).abs() < 1e-4);
        let rep = eof_2q(&werner(0.9)).unwrap();
        assert_eq!(rep.kind, BoundKind::Exact);
        assert!((rep.value - 0.7894).abs() < 1e-4);
    }

    #[test]
    fn eof_monotone_in_concurrence() {
        let mut last = -1.0;
        for k in 0..=100 {
            let v = eof_from_concurrence(k as f64 / 100.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn eof_local_unitary_invariance() {
        let rho = werner(0.8);
        for s in 0..5 {
            let u = qmath::kron(
                &states::haar_random_unitary(2, s),
                &states::haar_random_unitary(2, s + 100),
            );
            let rotated = DensityMatrix::new((&(&u * rho.mat()) * &u.dagger()).hermitian_part(), vec![2, 2]).unwrap();
            let a = eof_2q(&rho).unwrap().value;
            let b = eof_2q(&rotated).unwrap().value;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn eof_upper_bound_pure_and_separable() {
        let psi = states::haar_random_pure(9, 4);
        let psi = PureState::new(psi.vec().to_vec(), vec![3, 3]).unwrap();
        let rep = eof_upper_bound(&psi.to_density(), 4, 0).unwrap();
        assert_eq!(rep.kind, BoundKind::Exact);
        assert!((rep.value - entropy_of_entanglement(&psi).unwrap()).abs() < 1e-12);

        let cc = DensityMatrix::new(CMat::real_diag(&[0.5, 0.0, 0.0, 0.5]), vec![2, 2]).unwrap();
        let rep = eof_upper_bound(&cc, 4, 0).unwrap();
        assert!(rep.value <= 1e-9);
    }

    #[test]
    fn eof_upper_bound_matches_wootters_on_werner() {
        let rep = eof_upper_bound(&werner(0.9), 32, 11).unwrap();
        assert_eq!(rep.kind, BoundKind::UpperBound);
        assert!((rep.value - 0.7894).abs() < 1e-4, "value {}", rep.value);
    }

    #[test]
    fn eof_upper_bound_is_sound_on_random_states() {
        for s in 0..4 {
            let ch = crate::channels::random_channel(2, 2, 2, s).unwrap();
            let rho = crate::channels::to_choi(&ch).state().clone();
            let exact = eof_2q(&rho).unwrap().value;
            let bound = eof_upper_bound(&rho, 8, s).unwrap().value;
            assert!(bound >= exact - 1e-6, "bound {bound} below exact {exact}");
        }
    }

    #[test]
    fn ppt_examples() {
        let v = is_ppt(&bell()).unwrap();
        assert!(!v.ppt);
        assert!((v.min_eigenvalue + 0.5).abs() < 1e-10);
        assert!(is_ppt(&DensityMatrix::maximally_mixed(vec![2, 2])).unwrap().ppt);
        let v = is_ppt(&werner(1.0 / 3.0)).unwrap();
        assert!(v.min_eigenvalue.abs() < 1e-10);
    }

    #[test]
    fn separable_distance_examples() {
        let d = distance_to_separable_upper(&DensityMatrix::maximally_mixed(vec![2, 2]), 2, 0).unwrap();
        assert!(d.value <= 1e-6);
        let d = distance_to_separable_upper(&bell(), 4, 0).unwrap();
        assert!(d.value <= 1.0 + 1e-6 && d.value > 0.5, "value {}", d.value);
        assert!(
            is_ppt(&DensityMatrix::new(d.omega.clone(), vec![2, 2]).unwrap())
                .unwrap()
                .ppt
        );

        let cc = states::cc_state(&[vec![0.1, 0.2, 0.0], vec![0.3, 0.0, 0.1], vec![0.05, 0.05, 0.2]]).unwrap();
        assert!(distance_to_separable_upper(&cc, 2, 0).unwrap().value <= 1e-6);
    }

    #[test]
    fn separable_distance_monotone_in_restarts() {
        let rho = werner(0.7);
        let mut last = f64::INFINITY;
        for n in [0, 1, 3] {
            let v = distance_to_separable_upper(&rho, n, 5).unwrap().value;
            assert!(v <= last + 1e-15);
            last = v;
        }
    }

    #[test]
    fn diamond_examples() {
        let id = identity_channel(2);
        assert!(diamond_lower(&id, &id, 4, 0).unwrap().value.abs() < 1e-12);
        let dep = depolarized_unitary(&CMat::identity(2), 0.1).unwrap();
        let dl = diamond_lower(&dep, &id, 8, 0).unwrap();
        assert!((dl.value - 0.15).abs() < 1e-3);
        let x = unitary_channel(&gates::pauli_x()).unwrap();
        assert!((diamond_lower(&id, &x, 4, 0).unwrap().value - 2.0).abs() < 1e-6);
        let qutrit = identity_channel(3);
        assert!(diamond_lower(&id, &qutrit, 1, 0).is_err());
    }

    #[test]
    fn diamond_dominates_sigma_u_certificates() {
        let v = states::haar_random_unitary(2, 9);
        let a = depolarized_unitary(&v, 0.2).unwrap();
        let b = unitary_channel(&v).unwrap();
        let bound = diamond_lower(&a, &b, 8, 3).unwrap().value;
        for s in 0..10 {
            let zeta = sigma_u(&states::haar_random_unitary(2, 50 + s)).unwrap();
            assert!(bound >= channel_difference_norm(&a, &b, zeta.vec()) - 1e-12);
        }
    }
}
