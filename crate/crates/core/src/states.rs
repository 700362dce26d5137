//! Density matrices in contraction coordinates.
//!
//! A state on `C^d` is expanded in the self-adjoint basis
//!
//! ```text
//! h_1 = I,  h_k = h_k^{(d-1)} (+) 0  (1 < k < d),
//! h_d = sqrt(2 / (d (d-1))) (I_{d-1} (+) (1 - d)),
//! f_kj = E_kj + E_jk,  f_jk = -i (E_kj - E_jk)   for k < j,
//! ```
//!
//! as `rho = (1/d) (I + sum beta_l h_l + sum gamma_kj f_kj)`. The state
//! parameters `g_kj` are the contractions of `d * rho`, whose off-diagonal
//! entries are `gamma_kj - i gamma_jk`. Since every non-identity element has
//! Hilbert-Schmidt norm `sqrt(2)`, the coefficients are
//! `beta_l = (d/2) tr(rho h_l)` and `gamma_kj = (d/2) tr(rho f_kj)`.
//!
//! Tensor products use [`kron`]: the first factor indexes the outer blocks.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::matcore::{
    is_hermitian, kron, reference_eigenvalues, ComplexMatrix, Tolerance, C64, ONE, ZERO,
};
use crate::schur::{self, defect, defect_sq, SchurParams};

/// Which element of [`HermBasis`] a matrix is. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    Identity,
    /// `h_{k+1}` for `k` in `1..d`.
    Diagonal(usize),
    /// `f_kj = E_kj + E_jk`, `k < j`.
    Symmetric(usize, usize),
    /// `f_jk = -i (E_kj - E_jk)`, stored under the pair `k < j`.
    Antisymmetric(usize, usize),
}

/// Hilbert-Schmidt orthogonal Hermitian basis of `d x d` matrices.
#[derive(Debug, Clone)]
pub struct HermBasis {
    dim: usize,
    elements: Vec<(BasisLabel, ComplexMatrix)>,
}

impl HermBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `I`, the diagonal elements in order, then `f_kj, f_jk` for each `k < j`.
    pub fn elements(&self) -> &[(BasisLabel, ComplexMatrix)] {
        &self.elements
    }

    pub fn get(&self, label: BasisLabel) -> Option<&ComplexMatrix> {
        self.elements
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, m)| m)
    }
}

pub fn build_basis(d: usize) -> Result<HermBasis> {
    if d < 2 {
        return Err(Error::Domain(format!("basis needs d >= 2, got {d}")));
    }
    let mut elements = vec![(BasisLabel::Identity, ComplexMatrix::identity(d))];
    for k in 1..d {
        // h_{k+1} restricted to its leading (k+1) x (k+1) block
        let n = (k + 1) as f64;
        let scale = (2.0 / (n * (n - 1.0))).sqrt();
        let diag: Vec<f64> = (0..d)
            .map(|i| match i.cmp(&k) {
                std::cmp::Ordering::Less => scale,
                std::cmp::Ordering::Equal => scale * (1.0 - n),
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        elements.push((BasisLabel::Diagonal(k), ComplexMatrix::diag_real(&diag)));
    }
    for k in 0..d {
        for j in k + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(k, j)] = ONE;
            sym[(j, k)] = ONE;
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(k, j)] = C64::new(0.0, -1.0);
            anti[(j, k)] = C64::new(0.0, 1.0);
            elements.push((BasisLabel::Symmetric(k, j), sym));
            elements.push((BasisLabel::Antisymmetric(k, j), anti));
        }
    }
    Ok(HermBasis { dim: d, elements })
}

/// Expansion coefficients of a trace-one Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    /// `beta[l]` multiplies `h_{l+2}`; length `d - 1`.
    pub beta: Vec<f64>,
    /// Row-major `d x d`; entry `(k, j)`, `k != j`, multiplies `f_kj`.
    /// The diagonal is unused and zero.
    pub gamma: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(d: usize) -> Self {
        Self {
            beta: vec![0.0; d.saturating_sub(1)],
            gamma: vec![0.0; d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.len() + 1
    }

    /// `d * rho_kk`.
    fn scaled_diag(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                1.0 + (1..d)
                    .map(|k| {
                        let n = (k + 1) as f64;
                        let scale = (2.0 / (n * (n - 1.0))).sqrt();
                        let h = match i.cmp(&k) {
                            std::cmp::Ordering::Less => scale,
                            std::cmp::Ordering::Equal => scale * (1.0 - n),
                            std::cmp::Ordering::Greater => 0.0,
                        };
                        self.beta[k - 1] * h
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    /// `d * rho_kj = gamma_kj - i gamma_jk` for `k < j`.
    fn scaled_offdiag(&self, k: usize, j: usize) -> C64 {
        let d = self.dim();
        C64::new(self.gamma[k * d + j], -self.gamma[j * d + k])
    }
}

fn coefficients_of(rho: &ComplexMatrix) -> Coefficients {
    let d = rho.rows();
    let basis = build_basis(d).expect("d >= 2");
    let mut out = Coefficients::zeros(d);
    for (label, m) in basis.elements() {
        let value = (&(rho * m)).trace().re * d as f64 / 2.0;
        match *label {
            BasisLabel::Identity => {}
            BasisLabel::Diagonal(k) => out.beta[k - 1] = value,
            BasisLabel::Symmetric(k, j) => out.gamma[k * d + j] = value,
            BasisLabel::Antisymmetric(k, j) => out.gamma[j * d + k] = value,
        }
    }
    out
}

/// `(1/d)(I + sum beta h + sum gamma f)`.
pub fn matrix_from_coeffs(coeffs: &Coefficients) -> Result<ComplexMatrix> {
    let d = coeffs.dim();
    if coeffs.gamma.len() != d * d {
        return Err(Error::Dimension(format!(
            "{} gamma coefficients for dimension {d}",
            coeffs.gamma.len()
        )));
    }
    if coeffs
        .beta
        .iter()
        .chain(&coeffs.gamma)
        .any(|x| !x.is_finite())
    {
        return Err(Error::NonFinite("coefficients"));
    }
    let diag = coeffs.scaled_diag();
    let inv = 1.0 / d as f64;
    Ok(ComplexMatrix::from_fn(d, d, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Equal => C64::new(diag[r] * inv, 0.0),
        std::cmp::Ordering::Less => coeffs.scaled_offdiag(r, c) * inv,
        std::cmp::Ordering::Greater => coeffs.scaled_offdiag(c, r).conj() * inv,
    }))
}

/// A density matrix with its coefficients and the parameters of `d * rho`.
#[derive(Debug, Clone)]
pub struct DensityState {
    rho: ComplexMatrix,
    coeffs: Coefficients,
    params: SchurParams,
}

impl DensityState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        if !rho.is_square() || rho.rows() < 2 {
            return Err(Error::Dimension(format!(
                "a state needs a square matrix of size >= 2, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        if !is_hermitian(&rho, tol)? {
            return Err(Error::Precondition(
                "density matrix is not Hermitian".into(),
            ));
        }
        let tr = rho.trace().re;
        if (tr - 1.0).abs() > tol.abs_eps.max(1e-12) {
            return Err(Error::Precondition(format!("trace {tr} differs from 1")));
        }
        let d = rho.rows();
        let params = schur::inverse(&rho.scale_real(d as f64), tol)?;
        let coeffs = coefficients_of(&rho);
        Ok(Self {
            rho,
            coeffs,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn coeffs(&self) -> &Coefficients {
        &self.coeffs
    }

    /// Parameters of `d * rho`; the `g_kj` are its contractions.
    pub fn params(&self) -> &SchurParams {
        &self.params
    }

    /// `rho_kk`, the diagonal of the density matrix itself, with entries
    /// below the tolerance reported as exactly zero.
    pub fn populations(&self) -> Vec<f64> {
        self.params
            .diag()
            .iter()
            .enumerate()
            .map(|(k, &l)| if l > 0.0 { self.rho[(k, k)].re } else { 0.0 })
            .collect()
    }

    pub fn tensor(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        Self::new(kron(&self.rho, &other.rho), tol)
    }
}

pub fn state_from_coeffs(coeffs: &Coefficients, tol: Tolerance) -> Result<DensityState> {
    DensityState::new(matrix_from_coeffs(coeffs)?, tol)
}

fn settle(value: C64, divisor: f64, tol: Tolerance, k: usize, j: usize) -> Result<Option<C64>> {
    if divisor <= tol.abs_eps {
        if value.norm() > tol.abs_eps.sqrt() {
            return Err(Error::not_psd(
                k,
                j,
                "degenerate entry with nonzero residual",
            ));
        }
        return Ok(None);
    }
    let g = value / divisor;
    let m = g.norm();
    if m > 1.0 + tol.rel_eps && value.norm() - divisor > tol.abs_eps {
        return Err(Error::not_psd(k, j, format!("|g| = {m} exceeds 1")));
    }
    Ok(Some(if m > 1.0 || 1.0 - m * m <= tol.abs_eps {
        g / m
    } else {
        g
    }))
}

fn store(p: &mut SchurParams, k: usize, j: usize, g: Option<C64>) -> Result<()> {
    match g {
        Some(g) => p.set_gamma(k, j, g),
        None => {
            p.mask(k, j);
            Ok(())
        }
    }
}

fn checked_scales(scaled_diag: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    let thr = tol.threshold(scaled_diag.iter().fold(0.0, |a: f64, &b| a.max(b.abs())));
    scaled_diag
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if x < -thr {
                Err(Error::not_psd(k, k, format!("negative diagonal {x:e}")))
            } else if x <= thr {
                Ok(0.0)
            } else {
                Ok(x.sqrt())
            }
        })
        .collect()
}

/// Qubit parameters from the Bloch vector: `d * rho` has diagonal
/// `1 +- beta_3` and `g = (beta_1 - i beta_2) / sqrt(1 - beta_3^2)`, with
/// `g = 0` (undefined) on the poles `|beta_3| = 1`.
pub fn qubit_params(bloch: [f64; 3], tol: Tolerance) -> Result<SchurParams> {
    let [b1, b2, b3] = bloch;
    let scales = checked_scales(&[1.0 + b3, 1.0 - b3], tol)?;
    let mut p = SchurParams::with_diag(&scales)?;
    if scales.iter().all(|&l| l > 0.0) {
        let g = settle(C64::new(b1, -b2), (1.0 - b3 * b3).sqrt(), tol, 0, 1)?;
        store(&mut p, 0, 1, g)?;
    } else if C64::new(b1, b2).norm() > tol.abs_eps.sqrt() {
        return Err(Error::not_psd(
            0,
            1,
            "coherence on a pole of the Bloch ball",
        ));
    }
    Ok(p)
}

/// Qutrit parameters from the Gell-Mann coefficients, written out:
///
/// ```text
/// d rho_11 = 1 + beta_2 + beta_3/sqrt3,  d rho_22 = 1 - beta_2 + beta_3/sqrt3,
/// d rho_33 = 1 - 2 beta_3/sqrt3,
/// gamma_kj - i gamma_jk = sqrt(d rho_kk d rho_jj) g_kj           (j = k + 1)
/// gamma_13 - i gamma_31 = sqrt(d rho_11 d rho_33) (g_12 g_23 + d_12 d_23 g_13)
/// ```
pub fn qutrit_params(coeffs: &Coefficients, tol: Tolerance) -> Result<SchurParams> {
    if coeffs.dim() != 3 || coeffs.gamma.len() != 9 {
        return Err(Error::Dimension("qutrit coefficients expected".into()));
    }
    let (b2, b3) = (coeffs.beta[0], coeffs.beta[1] / 3f64.sqrt());
    let scales = checked_scales(&[1.0 + b2 + b3, 1.0 - b2 + b3, 1.0 - 2.0 * b3], tol)?;
    let mut p = SchurParams::with_diag(&scales)?;
    let zero_residual = |k: usize, j: usize| -> Result<()> {
        if coeffs.scaled_offdiag(k, j).norm() > tol.abs_eps.sqrt() {
            return Err(Error::not_psd(k, j, "coherence with an empty level"));
        }
        Ok(())
    };
    for (k, j) in [(0, 1), (1, 2)] {
        if scales[k] > 0.0 && scales[j] > 0.0 {
            let g = settle(
                coeffs.scaled_offdiag(k, j),
                scales[k] * scales[j],
                tol,
                k,
                j,
            )?;
            store(&mut p, k, j, g)?;
        } else {
            zero_residual(k, j)?;
        }
    }
    if scales[0] > 0.0 && scales[2] > 0.0 {
        let (g12, g23) = (p.gamma(0, 1), p.gamma(1, 2));
        let num = coeffs.scaled_offdiag(0, 2) / (scales[0] * scales[2]) - g12 * g23;
        let g = settle(num, defect(g12) * defect(g23), tol, 0, 2)?;
        store(&mut p, 0, 2, g)?;
    } else {
        zero_residual(0, 2)?;
    }
    Ok(p)
}

/// Pure iff every defined `g_kj` is unimodular: only consecutive indices of
/// the support carry defined parameters, and each must have `|g| = 1`.
pub fn is_pure(state: &DensityState, tol: Tolerance) -> bool {
    let p = state.params();
    let support = p.diag().iter().filter(|&&l| l > 0.0).count();
    support >= 1
        && p.entries()
            .filter(|e| e.3)
            .all(|(_, _, g, _)| defect_sq(g) <= tol.abs_eps)
}

/// The unit vector `v` with `rho = v v*`:
/// `v_{i_m} = sqrt(rho_{i_m i_m}) conj(g_{i_1 i_2}) ... conj(g_{i_{m-1} i_m})`
/// over the support `i_1 < i_2 < ...`, zero elsewhere.
pub fn pure_vector(state: &DensityState, tol: Tolerance) -> Result<Vec<C64>> {
    if !is_pure(state, tol) {
        return Err(Error::Precondition("state is not pure".into()));
    }
    let pops = state.populations();
    let p = state.params();
    let mut v = vec![ZERO; state.dim()];
    let mut phase = ONE;
    let mut prev: Option<usize> = None;
    for (i, &r) in pops.iter().enumerate() {
        if p.diag()[i] == 0.0 {
            continue;
        }
        if let Some(k) = prev {
            phase *= p.gamma(k, i).conj();
        }
        v[i] = phase * r.sqrt();
        prev = Some(i);
    }
    Ok(v)
}

/// `(1/d) log det rho` from the parameters:
/// `(1/d) (sum log rho_kk + sum log(1 - |g_kj|^2))`, `-inf` on singular states.
pub fn entropy_e(state: &DensityState) -> f64 {
    let d = state.dim() as f64;
    let diag: f64 = state.populations().iter().map(|r| r.ln()).sum();
    let contr: f64 = state
        .params()
        .entries()
        .map(|(_, _, g, _)| defect_sq(g).ln())
        .sum();
    let e = (diag + contr) / d;
    if e.is_nan() {
        f64::NEG_INFINITY
    } else {
        e
    }
}

/// `(1/d) sum log lambda` over the eigenvalues above the tolerance.
pub fn entropy_e0(state: &DensityState, tol: Tolerance) -> f64 {
    let ev = reference_eigenvalues(state.rho()).expect("Hermitian state");
    let thr = tol.threshold(1.0);
    ev.iter().filter(|&&l| l > thr).map(|l| l.ln()).sum::<f64>() / state.dim() as f64
}

/// Block data of the parameters of `S1 (x) S2`.
#[derive(Debug, Clone)]
pub struct TensorParams {
    /// `L_kk = L1_kk * A2` with `A2 = G2 diag(L2)` the scaled factor of `S2`.
    pub block_diag: Vec<ComplexMatrix>,
    /// `Gamma_kj = Gamma1_kj * I`, so each block is a scalar multiple of the
    /// identity; stored as the scalar.
    pub block_gamma: SchurParams,
    /// Scalar parameters of the flattened product.
    pub flattened: SchurParams,
}

/// Parameters of `S1 (x) S2` from those of `S1` and the factor of `S2`.
///
/// Writing `A2` for the scaled factor, `S1 (x) S2 = (A2^(+d))* [S1_kj I] A2^(+d)`,
/// and `[S1_kj I]` has block contractions `Gamma1_kj I`.
pub fn tensor_params(
    p1: &SchurParams,
    chol2: &ComplexMatrix,
    diag2: &[f64],
    tol: Tolerance,
) -> Result<TensorParams> {
    let d2 = diag2.len();
    if chol2.rows() != d2 || chol2.cols() != d2 {
        return Err(Error::Dimension(format!(
            "factor is {}x{}, diagonal has {d2} entries",
            chol2.rows(),
            chol2.cols()
        )));
    }
    let a2 = ComplexMatrix::from_fn(d2, d2, |r, c| chol2[(r, c)] * diag2[c]);
    let block_diag = p1.diag().iter().map(|&l| a2.scale_real(l)).collect();
    let s1 = schur::forward(p1);
    let s2 = &a2.adjoint() * &a2;
    let flattened = schur::inverse(&kron(&s1, &s2), tol)?;
    Ok(TensorParams {
        block_diag,
        block_gamma: p1.clone(),
        flattened,
    })
}

fn check_dims(n: usize, dims: (usize, usize)) -> Result<()> {
    if dims.0 * dims.1 != n || dims.0 == 0 {
        return Err(Error::Dimension(format!(
            "{}x{} does not factor a dimension of {n}",
            dims.0, dims.1
        )));
    }
    Ok(())
}

/// Transpose of the second tensor factor:
/// `out[(a,b),(a',b')] = rho[(a,b'),(a',b)]` with `(a,b) -> a * d2 + b`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: (usize, usize)) -> Result<ComplexMatrix> {
    if !rho.is_square() {
        return Err(Error::Dimension("square matrix expected".into()));
    }
    check_dims(rho.rows(), dims)?;
    let d2 = dims.1;
    Ok(ComplexMatrix::from_fn(rho.rows(), rho.cols(), |r, c| {
        let (a, b) = (r / d2, r % d2);
        let (ap, bp) = (c / d2, c % d2);
        rho[(a * d2 + bp, ap * d2 + b)]
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparabilityMethod {
    Ppt,
    ParamInequalities,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Smallest eigenvalue of the partial transpose.
    MinEigenvalue(f64),
    /// Solution `(h14, h13, h24)` of the parametric system, with the last
    /// contraction of the partial transpose.
    Parameters {
        h14: C64,
        h13: C64,
        h24: C64,
        last: C64,
    },
    /// Why the parametric system has no solution.
    Infeasible(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityVerdict {
    pub separable: bool,
    pub method: SeparabilityMethod,
    pub witness: Option<Witness>,
}

/// Positive-partial-transpose test; exact for `2x2`, `2x3` and `3x2`.
pub fn is_separable_ppt(
    state: &DensityState,
    dims: (usize, usize),
    tol: Tolerance,
) -> Result<SeparabilityVerdict> {
    if !matches!(dims, (2, 2) | (2, 3) | (3, 2)) {
        return Err(Error::Domain(format!(
            "the partial transpose test is only exact for 2x2 and 2x3, got {}x{}",
            dims.0, dims.1
        )));
    }
    let pt = partial_transpose(state.rho(), dims)?;
    let separable = schur::is_psd_via_params(&pt, tol);
    let min = reference_eigenvalues(&pt)?[0];
    Ok(SeparabilityVerdict {
        separable,
        method: SeparabilityMethod::Ppt,
        witness: Some(Witness::MinEigenvalue(min)),
    })
}

/// The left-hand minus right-hand side of the first parametric inequality
/// for two-qubit states (necessary for separability):
///
/// ```text
/// sqrt(r22 r33) + sqrt(r11 r44) d12 d13 d24 d34
///     >= sqrt(r11 r44) |g12 g23 g34 + d12 g13 d23 g34 + g12 d23 g24 d34 - d12 g13 conj(g23) g24 d34|
/// ```
pub fn first_inequality_margin(state: &DensityState) -> Result<f64> {
    if state.dim() != 4 {
        return Err(Error::Dimension("two-qubit state expected".into()));
    }
    let r = state.populations();
    let p = state.params();
    let g = |k: usize, j: usize| p.gamma(k - 1, j - 1);
    let dd = |k: usize, j: usize| defect(g(k, j));
    let known = g(1, 2) * g(2, 3) * g(3, 4)
        + dd(1, 2) * g(1, 3) * dd(2, 3) * g(3, 4)
        + g(1, 2) * dd(2, 3) * g(2, 4) * dd(3, 4)
        - dd(1, 2) * g(1, 3) * g(2, 3).conj() * g(2, 4) * dd(3, 4);
    let outer = (r[0] * r[3]).sqrt();
    Ok(
        (r[1] * r[2]).sqrt() + outer * dd(1, 2) * dd(1, 3) * dd(2, 4) * dd(3, 4)
            - outer * known.norm(),
    )
}

/// Separability of a two-qubit state from its parameters.
///
/// The partial transpose `sigma` has the same diagonal as `rho`, and its
/// contractions are `conj(g12)`, `h14`, `conj(g34)` on the first band and
/// `h13`, `h24`, `last` beyond it, where
///
/// ```text
/// h14  = rho_14 / sqrt(r22 r33)
/// h13  = (g12 g23 + d12 g13 d23 - conj(g12) h14) / (d12 e14)
/// h24  = (g23 g34 + d23 g24 d34 - h14 conj(g34)) / (e14 d34)
/// last = (rho_23 / sqrt(r11 r44) - K) / (d12 e13 e24 d34)
/// K    = conj(g12) h14 conj(g34) + d12 h13 e14 conj(g34)
///        + conj(g12) e14 h24 d34 - d12 h13 conj(h14) h24 d34
/// ```
///
/// with `e = sqrt(1 - |h|^2)`. The state is separable iff all four lie in
/// the closed unit disc. Degenerate divisors are resolved by running the
/// generic parametrization on `sigma`.
pub fn is_separable_params(state: &DensityState, tol: Tolerance) -> Result<SeparabilityVerdict> {
    let margin = first_inequality_margin(state)?;
    let verdict = |separable, witness| SeparabilityVerdict {
        separable,
        method: SeparabilityMethod::ParamInequalities,
        witness: Some(witness),
    };
    if margin < -tol.threshold(1.0) {
        return Ok(verdict(
            false,
            Witness::Infeasible(format!("first inequality violated by {:e}", -margin)),
        ));
    }
    match closed_form_pt(state, tol) {
        Some(Ok(w)) => Ok(verdict(true, w)),
        Some(Err(msg)) => Ok(verdict(false, Witness::Infeasible(msg))),
        None => {
            let pt = partial_transpose(state.rho(), (2, 2))?;
            Ok(match schur::inverse(&pt, tol) {
                Ok(q) => verdict(
                    true,
                    Witness::Parameters {
                        h14: q.gamma(1, 2),
                        h13: q.gamma(0, 2),
                        h24: q.gamma(1, 3),
                        last: q.gamma(0, 3),
                    },
                ),
                Err(e) => verdict(false, Witness::Infeasible(e.to_string())),
            })
        }
    }
}

/// `None` when a divisor vanishes and the closed forms do not apply.
fn closed_form_pt(
    state: &DensityState,
    tol: Tolerance,
) -> Option<std::result::Result<Witness, String>> {
    let r = state.populations();
    let p = state.params();
    let eps = tol.abs_eps;
    if r.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let g = |k: usize, j: usize| p.gamma(k - 1, j - 1);
    let dd = |k: usize, j: usize| defect(g(k, j));
    let rho = state.rho();
    let admit = |name: &str, num: C64, div: f64| -> std::result::Result<C64, String> {
        let h = num / div;
        let m = h.norm();
        if m > 1.0 + tol.rel_eps && num.norm() - div > eps {
            return Err(format!("|{name}| = {m} exceeds 1"));
        }
        Ok(if m > 1.0 { h / m } else { h })
    };
    let run = || -> std::result::Result<Witness, String> {
        let h14 = admit("h14", rho[(0, 3)], (r[1] * r[2]).sqrt())?;
        let e14 = defect(h14);
        let (d12, d34) = (dd(1, 2), dd(3, 4));
        if d12 * e14 <= eps || e14 * d34 <= eps {
            return Err(String::new());
        }
        let n13 = g(1, 2) * g(2, 3) + d12 * g(1, 3) * dd(2, 3) - g(1, 2).conj() * h14;
        let h13 = admit("h13", n13, d12 * e14)?;
        let n24 = g(2, 3) * g(3, 4) + dd(2, 3) * g(2, 4) * d34 - h14 * g(3, 4).conj();
        let h24 = admit("h24", n24, e14 * d34)?;
        let div = d12 * defect(h13) * defect(h24) * d34;
        if div <= eps {
            return Err(String::new());
        }
        let k = g(1, 2).conj() * h14 * g(3, 4).conj()
            + d12 * h13 * e14 * g(3, 4).conj()
            + g(1, 2).conj() * e14 * h24 * d34
            - d12 * h13 * h14.conj() * h24 * d34;
        let last = admit("last", rho[(1, 2)] / (r[0] * r[3]).sqrt() - k, div)?;
        Ok(Witness::Parameters {
            h14,
            h13,
            h24,
            last,
        })
    };
    match run() {
        Err(msg) if msg.is_empty() => None,
        other => Some(other),
    }
}

/// `(|00> + |11>) / sqrt 2` as a density matrix.
pub fn bell_state() -> ComplexMatrix {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::outer(&[s, ZERO, ZERO, s])
}

/// `p * Bell + (1 - p) I / 4`.
pub fn werner_state(p: f64) -> ComplexMatrix {
    &bell_state().scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0)
}

pub fn maximally_mixed(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d).scale_real(1.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{self, SplitMix64};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn state(m: ComplexMatrix) -> DensityState {
        DensityState::new(m, tol()).unwrap()
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = build_basis(2).unwrap();
        let i = C64::new(0.0, 1.0);
        let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let sy = ComplexMatrix::from_complex_rows(&[&[ZERO, -i], &[i, ZERO]]).unwrap();
        let sz = ComplexMatrix::diag_real(&[1.0, -1.0]);
        assert_eq!(b.get(BasisLabel::Symmetric(0, 1)).unwrap(), &sx);
        assert_eq!(b.get(BasisLabel::Antisymmetric(0, 1)).unwrap(), &sy);
        assert_eq!(b.get(BasisLabel::Diagonal(1)).unwrap(), &sz);
        assert_eq!(b.elements().len(), 4);
    }

    #[test]
    fn gell_mann_diagonals() {
        let b = build_basis(3).unwrap();
        assert_eq!(
            b.get(BasisLabel::Diagonal(1)).unwrap(),
            &ComplexMatrix::diag_real(&[1.0, -1.0, 0.0])
        );
        let s = 1.0 / 3f64.sqrt();
        let want = ComplexMatrix::diag_real(&[s, s, -2.0 * s]);
        assert!(b.get(BasisLabel::Diagonal(2)).unwrap().max_abs_diff(&want) < 1e-15);
        assert!(matches!(build_basis(1), Err(Error::Domain(_))));
    }

    #[test]
    fn basis_orthogonal() {
        for d in 2..=6 {
            let b = build_basis(d).unwrap();
            assert_eq!(b.elements().len(), d * d);
            for (x, (_, m)) in b.elements().iter().enumerate() {
                assert!(is_hermitian(m, tol()).unwrap());
                for (_, n) in &b.elements()[x + 1..] {
                    assert!((m * n).trace().norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..50 {
            let d = rng.int_in(2, 5);
            let s = state(random::density(&mut rng, d, d));
            let back = matrix_from_coeffs(s.coeffs()).unwrap();
            assert!(back.max_abs_diff(s.rho()) < 1e-13);
            let again = coefficients_of(&back);
            for (a, b) in again.beta.iter().zip(&s.coeffs().beta) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_examples() {
        let s = state_from_coeffs(&Coefficients::zeros(2), tol()).unwrap();
        assert!(s.rho().max_abs_diff(&maximally_mixed(2)) < 1e-16);
        assert!(s.params().is_defined(0, 1) && s.params().gamma(0, 1) == ZERO);

        let mut c = Coefficients::zeros(2);
        c.beta[0] = 1.0;
        let s = state_from_coeffs(&c, tol()).unwrap();
        assert!(s.rho().max_abs_diff(&ComplexMatrix::diag_real(&[1.0, 0.0])) < 1e-16);
        assert!(!s.params().is_defined(0, 1));
        assert!(!qubit_params([0.0, 0.0, 1.0], tol())
            .unwrap()
            .is_defined(0, 1));
    }

    #[test]
    fn qubit_cylinder_matches_generic() {
        let mut rng = SplitMix64::new(21);
        for _ in 0..200 {
            let rank = rng.int_in(1, 2);
            let s = state(random::density(&mut rng, 2, rank));
            let c = s.coeffs();
            let bloch = [c.gamma[1], c.gamma[2], c.beta[0]];
            let p = qubit_params(bloch, tol()).unwrap();
            assert_eq!(p.is_defined(0, 1), s.params().is_defined(0, 1));
            assert!((p.gamma(0, 1) - s.params().gamma(0, 1)).norm() < 1e-9);
        }
    }

    #[test]
    fn qutrit_closed_form_matches_generic() {
        let mut rng = SplitMix64::new(22);
        for _ in 0..200 {
            let rank = rng.int_in(2, 3);
            let s = state(random::density(&mut rng, 3, rank));
            let p = qutrit_params(s.coeffs(), tol()).unwrap();
            for (k, j, g, def) in s.params().entries() {
                assert_eq!(def, p.is_defined(k, j));
                assert!((g - p.gamma(k, j)).norm() < 1e-9);
            }
            for (a, b) in p.diag().iter().zip(s.params().diag()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        // only the 1-2 coherence: g12 = 0.5 / sqrt(1 * 1)
        let mut c = Coefficients::zeros(3);
        c.gamma[1] = 0.3;
        c.gamma[3] = 0.4;
        let p = qutrit_params(&c, tol()).unwrap();
        assert!((p.gamma(0, 1) - C64::new(0.3, -0.4)).norm() < 1e-15);
        assert_eq!(p.gamma(1, 2), ZERO);
    }

    #[test]
    fn purity_examples() {
        let t = tol();
        assert!(is_pure(
            &state(ComplexMatrix::diag_real(&[1.0, 0.0, 0.0])),
            t
        ));
        assert!(!is_pure(&state(maximally_mixed(3)), t));
        let bell = state(bell_state());
        assert!(is_pure(&bell, t));
        let defined: Vec<_> = bell.params().entries().filter(|e| e.3).collect();
        assert_eq!(defined.len(), 1);
        assert_eq!((defined[0].0, defined[0].1), (0, 3));
        assert!((defined[0].2.norm() - 1.0).abs() < 1e-15);
        let v = pure_vector(&bell, t).unwrap();
        assert!((v[0] - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((v[3] - bell.params().gamma(0, 3).conj() * FRAC_1_SQRT_2).norm() < 1e-15);
        assert_eq!(
            pure_vector(&state(ComplexMatrix::diag_real(&[0.0, 1.0, 0.0])), t).unwrap(),
            vec![ZERO, ONE, ZERO]
        );
        assert!(matches!(
            pure_vector(&state(maximally_mixed(2)), t),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn entropy_examples() {
        let t = tol();
        for d in 2..=5 {
            let s = state(maximally_mixed(d));
            let want = (1.0 / d as f64).ln();
            assert!((entropy_e(&s) - want).abs() < 1e-14);
            assert!((entropy_e0(&s, t) - want).abs() < 1e-12);
        }
        let s = state(ComplexMatrix::diag_real(&[0.75, 0.25]));
        assert!((entropy_e(&s) - 0.5 * (0.75f64.ln() + 0.25f64.ln())).abs() < 1e-15);
        let bell = state(bell_state());
        assert_eq!(entropy_e(&bell), f64::NEG_INFINITY);
        assert!(entropy_e0(&bell, t).abs() < 1e-10);
        let s = state(ComplexMatrix::diag_real(&[0.5, 0.5, 0.0]));
        assert!((entropy_e0(&s, t) - 2.0 * 0.5f64.ln() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn partial_transpose_examples() {
        let pt = partial_transpose(&bell_state(), (2, 2)).unwrap();
        let ev = reference_eigenvalues(&pt).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
        assert!(ev[1..].iter().all(|x| (x - 0.5).abs() < 1e-12));
        let mm = maximally_mixed(4);
        assert_eq!(partial_transpose(&mm, (2, 2)).unwrap(), mm);
        assert!(partial_transpose(&mm, (3, 2)).is_err());
    }

    #[test]
    fn werner_verdicts() {
        let t = tol();
        for (p, sep) in [(0.5, false), (0.25, true), (0.9, false), (0.0, true)] {
            let s = state(werner_state(p));
            assert_eq!(is_separable_ppt(&s, (2, 2), t).unwrap().separable, sep);
            assert_eq!(
                is_separable_params(&s, t).unwrap().separable,
                sep,
                "p = {p}"
            );
        }
        let s = state(werner_state(0.5));
        match is_separable_ppt(&s, (2, 2), t).unwrap().witness {
            Some(Witness::MinEigenvalue(x)) => assert!((x - (1.0 - 1.5) / 4.0).abs() < 1e-12),
            w => panic!("unexpected witness {w:?}"),
        }
        assert!(matches!(
            is_separable_ppt(&state(maximally_mixed(9)), (3, 3), t),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn product_and_diagonal_states_separable() {
        let mut rng = SplitMix64::new(4);
        for _ in 0..20 {
            let a = random::density(&mut rng, 2, 2);
            let b = random::density(&mut rng, 2, 1);
            let s = state(kron(&a, &b));
            assert!(is_separable_params(&s, tol()).unwrap().separable);
            assert!(is_separable_ppt(&s, (2, 2), tol()).unwrap().separable);
        }
        let s = state(ComplexMatrix::diag_real(&[0.1, 0.2, 0.3, 0.4]));
        let v = is_separable_params(&s, tol()).unwrap();
        assert!(v.separable);
        match v.witness {
            Some(Witness::Parameters { h14, h13, h24, .. }) => {
                assert_eq!((h14, h13, h24), (ZERO, ZERO, ZERO))
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn tensor_with_identity_spreads_parameters() {
        let mut rng = SplitMix64::new(8);
        let p1 = random::params(&mut rng, 3, 0.9);
        let t = tensor_params(&p1, &ComplexMatrix::identity(2), &[1.0, 1.0], tol()).unwrap();
        let f = &t.flattened;
        for (k, j, g, _) in p1.entries() {
            for l in 0..2 {
                assert!((f.gamma(2 * k + l, 2 * j + l) - g).norm() < 1e-12);
            }
            assert!(f.gamma(2 * k, 2 * j + 1).norm() < 1e-12);
        }
    }
}
