//! The map between a positive semidefinite matrix and its contraction
//! parameters.
//!
//! A PSD matrix `S` with diagonal `S_kk = L_kk^2` is written as
//! `S = diag(L) G* G diag(L)` where `G` is upper triangular with columns of
//! unit length. The contraction `Gamma_kj` (`k < j`) is the normalized inner
//! product of the parts of columns `k` and `j` of `G` orthogonal to columns
//! `k+1 .. j-1`. Its modulus is at most one, and the moduli of the
//! orthogonal parts are the defect products
//!
//! ```text
//! left(k, j)  = prod_{m=k+1}^{j-1} sqrt(1 - |Gamma_km|^2)
//! right(k, j) = prod_{m=k+1}^{j-1} sqrt(1 - |Gamma_mj|^2)
//! ```
//!
//! so that `S_kj = L_kk (known_kj + left * Gamma_kj * right) L_jj`, where
//! `known_kj` depends only on contractions of shorter bands.
//!
//! Degenerate directions (a zero diagonal entry, or a contraction of modulus
//! one) leave later contractions without a space to live in. Those are stored
//! as `0` with `defined = false`. A zero diagonal entry behaves like a column
//! orthogonal to every other column, which leaves all projections unchanged.
//!
//! All indices are 0-based.

use crate::error::{Error, Result};
use crate::matcore::{is_hermitian, ComplexMatrix, Tolerance, C64, ONE, ZERO};

/// `1 - |g|^2` at or below this is treated as exactly zero.
const UNIMODULAR_SLACK: f64 = 1e-14;

/// `1 - |g|^2`, flushed to zero within rounding of the unit circle.
pub fn defect_sq(g: C64) -> f64 {
    let s = 1.0 - g.norm_sqr();
    if s <= UNIMODULAR_SLACK {
        0.0
    } else {
        s
    }
}

/// `sqrt(1 - |g|^2)`; the scalar defect of `g`, equal for `g` and `conj(g)`.
pub fn defect(g: C64) -> f64 {
    defect_sq(g).sqrt()
}

/// Diagonal scales plus strictly upper triangular contractions.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurParams {
    dim: usize,
    diag: Vec<f64>,
    gamma: Vec<C64>,
    defined: Vec<bool>,
}

impl SchurParams {
    /// Unit diagonal, all contractions defined and zero.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            diag: vec![1.0; dim],
            gamma: vec![ZERO; dim * dim],
            defined: vec![true; dim * dim],
        }
    }

    /// All contractions zero; those touching a zero diagonal entry are marked
    /// undefined.
    pub fn with_diag(diag: &[f64]) -> Result<Self> {
        let mut p = Self::identity(diag.len());
        p.set_diag(diag)?;
        for k in 0..p.dim {
            for j in k + 1..p.dim {
                if diag[k] == 0.0 || diag[j] == 0.0 {
                    p.mask(k, j);
                }
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `L_kk`, the square roots of the diagonal of the matrix.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn set_diag(&mut self, diag: &[f64]) -> Result<()> {
        if diag.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{} diagonal entries for dimension {}",
                diag.len(),
                self.dim
            )));
        }
        if let Some(x) = diag.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("diagonal entry {x}")));
        }
        if diag.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParams("negative diagonal entry".into()));
        }
        self.diag.copy_from_slice(diag);
        Ok(())
    }

    fn idx(&self, k: usize, j: usize) -> usize {
        assert!(
            k < j && j < self.dim,
            "contraction index ({k}, {j}) outside the strict upper triangle of {}",
            self.dim
        );
        k * self.dim + j
    }

    pub fn gamma(&self, k: usize, j: usize) -> C64 {
        self.gamma[self.idx(k, j)]
    }

    pub fn is_defined(&self, k: usize, j: usize) -> bool {
        self.defined[self.idx(k, j)]
    }

    /// Sets a defined contraction. Values within rounding of the unit circle
    /// are pulled onto it.
    pub fn set_gamma(&mut self, k: usize, j: usize, value: C64) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite("contraction"));
        }
        if value.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidParams(format!(
                "|Gamma[{k}][{j}]| = {} exceeds 1",
                value.norm()
            )));
        }
        let i = self.idx(k, j);
        self.gamma[i] = if defect_sq(value) == 0.0 && value != ZERO {
            value / value.norm()
        } else {
            value
        };
        self.defined[i] = true;
        Ok(())
    }

    /// Marks a contraction as undefined (value 0).
    pub fn mask(&mut self, k: usize, j: usize) {
        let i = self.idx(k, j);
        self.gamma[i] = ZERO;
        self.defined[i] = false;
    }

    /// `(k, j, Gamma_kj, defined)` in row-major order of the upper triangle.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64, bool)> + '_ {
        let d = self.dim;
        (0..d).flat_map(move |k| {
            (k + 1..d).map(move |j| (k, j, self.gamma(k, j), self.is_defined(k, j)))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.diag.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParams(
                "diagonal must be finite and >= 0".into(),
            ));
        }
        for (k, j, g, def) in self.entries() {
            if !def && g != ZERO {
                return Err(Error::InvalidParams(format!(
                    "undefined Gamma[{k}][{j}] must be 0"
                )));
            }
            if g.norm() > 1.0 + 1e-12 {
                return Err(Error::InvalidParams(format!("|Gamma[{k}][{j}]| > 1")));
            }
        }
        Ok(())
    }

    pub fn defects(&self) -> DefectCache {
        let d = self.dim;
        let mut values = vec![1.0; d * d];
        for (k, j, g, _) in self.entries() {
            values[k * d + j] = defect(g);
        }
        DefectCache { dim: d, values }
    }

    /// `(left^2, right^2)` defect products for entry `(k, j)`.
    fn defect_products_sq(&self, k: usize, j: usize) -> (f64, f64) {
        let left = (k + 1..j).map(|m| defect_sq(self.gamma(k, m))).product();
        let right = (k + 1..j).map(|m| defect_sq(self.gamma(m, j))).product();
        (left, right)
    }
}

/// Scalar defects `sqrt(1 - |Gamma_kj|^2)`. For scalars the left and right
/// defect operators coincide, so one table serves both.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectCache {
    dim: usize,
    values: Vec<f64>,
}

impl DefectCache {
    pub fn get(&self, k: usize, j: usize) -> f64 {
        assert!(k < j && j < self.dim);
        self.values[k * self.dim + j]
    }

    pub fn left(&self, k: usize, j: usize) -> f64 {
        self.get(k, j)
    }

    pub fn right(&self, k: usize, j: usize) -> f64 {
        self.get(k, j)
    }
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Unit-column factor `G` for contractions supplied by `gamma(k, j)`, `k < j < d`.
///
/// Column `j` is assembled from the unit vector `e_j` by walking `k` upwards:
/// `b <- defect(Gamma_kj) b + Gamma_kj a_k`, where `a_k` is the normalized part
/// of column `k` orthogonal to columns `k+1 .. j-1`. Afterwards the `a_k` are
/// advanced to include column `j`. Directions with zero defect become zero
/// vectors, which silences every contraction that would depend on them.
fn lattice_factor(d: usize, gamma: impl Fn(usize, usize) -> C64) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(d, d);
    // fwd[k]: normalized residual of column k against columns k+1 .. current j-1
    let mut fwd: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut b = vec![ZERO; d];
        b[j] = ONE;
        // back[k] = residual of column j against columns k .. j-1
        let mut back: Vec<Vec<C64>> = Vec::with_capacity(j + 1);
        back.push(b.clone());
        for (k, a) in fwd.iter().enumerate() {
            let gkj = gamma(k, j);
            let dk = defect(gkj);
            for bi in b.iter_mut() {
                *bi *= dk;
            }
            axpy(&mut b, gkj, a);
            back.push(b.clone());
        }
        for (r, &z) in b.iter().enumerate() {
            g[(r, j)] = z;
        }
        for (k, a) in fwd.iter_mut().enumerate() {
            let gkj = gamma(k, j);
            let dk = defect(gkj);
            if dk == 0.0 {
                a.iter_mut().for_each(|z| *z = ZERO);
            } else {
                axpy(a, -gkj.conj(), &back[k + 1]);
                a.iter_mut().for_each(|z| *z /= dk);
            }
        }
        fwd.push(b);
    }
    g
}

/// Upper triangular factor `G` with `diag(L) G* G diag(L) = forward(params)`.
///
/// `G` depends only on the contractions; its diagonal is
/// `G_jj = prod_{k<j} sqrt(1 - |Gamma_kj|^2)` and its first row is the first
/// row of the unit-diagonal normalization of `S`.
pub fn cholesky_factor(params: &SchurParams) -> ComplexMatrix {
    lattice_factor(params.dim(), |k, j| params.gamma(k, j))
}

/// `G diag(L)`, a factor `A` with `A* A = forward(params)`.
pub fn scaled_cholesky_factor(params: &SchurParams) -> ComplexMatrix {
    let g = cholesky_factor(params);
    let l = params.diag();
    ComplexMatrix::from_fn(g.rows(), g.cols(), |r, c| g[(r, c)] * l[c])
}

/// The PSD matrix with the given parameters.
pub fn forward(params: &SchurParams) -> ComplexMatrix {
    let a = scaled_cholesky_factor(params);
    let s = &a.adjoint() * &a;
    // exact Hermitian symmetry and real diagonal
    let d = s.rows();
    ComplexMatrix::from_fn(d, d, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Less => s[(r, c)],
        std::cmp::Ordering::Equal => C64::new(s[(r, r)].re, 0.0),
        std::cmp::Ordering::Greater => s[(c, r)].conj(),
    })
}

/// `prod L_kk^2 * prod_{k<j} (1 - |Gamma_kj|^2)`.
pub fn det_from_params(params: &SchurParams) -> f64 {
    let diag: f64 = params.diag().iter().map(|l| l * l).product();
    let contr: f64 = params.entries().map(|(_, _, g, _)| defect_sq(g)).product();
    diag * contr
}

/// Hermitian check, diagonal scales, and the unit-diagonal normalization
/// (rows with a zero scale are left at zero).
struct Normalized {
    scales: Vec<f64>,
    unit: ComplexMatrix,
}

fn normalize(s: &ComplexMatrix, tol: Tolerance) -> Result<Normalized> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !is_hermitian(s, tol)? {
        return Err(Error::Precondition("matrix is not Hermitian".into()));
    }
    let d = s.rows();
    let thr = tol.threshold(s.max_norm());
    let mut scales = vec![0.0; d];
    for (k, l) in scales.iter_mut().enumerate() {
        let x = s[(k, k)].re;
        if x < -thr {
            return Err(Error::not_psd(k, k, format!("negative diagonal {x:e}")));
        }
        if x > thr {
            *l = x.sqrt();
        }
    }
    // an entry in a zero row/column must itself vanish
    for k in 0..d {
        for j in k + 1..d {
            if scales[k] == 0.0 || scales[j] == 0.0 {
                let bound = (s[(k, k)].re.max(0.0) + thr) * (s[(j, j)].re.max(0.0) + thr);
                if s[(k, j)].norm_sqr() > bound {
                    return Err(Error::not_psd(
                        k,
                        j,
                        format!(
                            "entry {:e} couples to a zero diagonal entry",
                            s[(k, j)].norm()
                        ),
                    ));
                }
            }
        }
    }
    let unit = ComplexMatrix::from_fn(d, d, |r, c| {
        if scales[r] == 0.0 || scales[c] == 0.0 {
            ZERO
        } else if r == c {
            ONE
        } else {
            s[(r, c)] / (scales[r] * scales[c])
        }
    });
    Ok(Normalized { scales, unit })
}

/// Turns the unnormalized contraction `num / (left * right)` into a stored
/// value, applying the degenerate-entry convention, the admissibility test
/// and the clamp onto the unit disc.
fn settle_entry(
    params: &mut SchurParams,
    k: usize,
    j: usize,
    num: C64,
    tol: Tolerance,
) -> Result<()> {
    let (left_sq, right_sq) = params.defect_products_sq(k, j);
    let divisor = (left_sq * right_sq).sqrt();
    if divisor <= tol.abs_eps {
        // consistent only if the residual respects Cauchy-Schwarz
        let bound = (left_sq + tol.abs_eps) * (right_sq + tol.abs_eps);
        if num.norm_sqr() > bound {
            return Err(Error::not_psd(
                k,
                j,
                format!(
                    "degenerate entry with residual {:e} (defect product {divisor:e})",
                    num.norm()
                ),
            ));
        }
        params.mask(k, j);
        return Ok(());
    }
    let mut g = num / divisor;
    let modulus = g.norm();
    if modulus > 1.0 + tol.rel_eps && num.norm() - divisor > tol.abs_eps {
        return Err(Error::not_psd(
            k,
            j,
            format!("contraction of modulus {modulus} lies outside the unit disc"),
        ));
    }
    if modulus > 1.0 || 1.0 - modulus * modulus <= tol.abs_eps {
        g /= modulus;
    }
    params.set_gamma(k, j, g)
}

/// Parameters of a Hermitian PSD matrix, solved band by band.
///
/// For each `(k, j)` the part of `S_kj` fixed by shorter bands is obtained by
/// running the lattice on the principal block `k..=j` with `Gamma_kj = 0`; the
/// remainder divided by the defect products is `Gamma_kj`.
pub fn inverse(s: &ComplexMatrix, tol: Tolerance) -> Result<SchurParams> {
    let Normalized { scales, unit } = normalize(s, tol)?;
    let d = scales.len();
    let mut params = SchurParams::identity(d);
    params.set_diag(&scales)?;
    for band in 1..d {
        for k in 0..d - band {
            let j = k + band;
            if scales[k] == 0.0 || scales[j] == 0.0 {
                params.mask(k, j);
                continue;
            }
            let known = lattice_factor(band + 1, |p, q| {
                if p == 0 && q == band {
                    ZERO
                } else {
                    params.gamma(k + p, k + q)
                }
            })[(0, band)];
            settle_entry(&mut params, k, j, unit[(k, j)] - known, tol)?;
        }
    }
    Ok(params)
}

/// `true` iff [`inverse`] succeeds.
pub fn is_psd_via_params(s: &ComplexMatrix, tol: Tolerance) -> bool {
    inverse(s, tol).is_ok()
}

/// Output of [`displacement_inverse`].
#[derive(Debug, Clone)]
pub struct DisplacementResult {
    pub params: SchurParams,
    /// Upper triangular `G` with `G* G` equal to the unit-diagonal
    /// normalization of the input, assembled from the generator columns.
    pub factor: ComplexMatrix,
    /// `gammas[m][t]`: the reflection coefficient at Schur step `m` on the
    /// block starting at row `t`. Step 0 is trivial.
    pub gammas: Vec<Vec<C64>>,
}

/// One step of generator state: the two columns `(u | v)` of `G_m(t)` with
/// signature `J = diag(1, -1)`.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    pub step: usize,
    pub time: usize,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl GeneratorState {
    /// `|u_0|^2 - |v_0|^2`, the current Schur-complement pivot.
    pub fn pivot(&self) -> f64 {
        self.u[0].norm_sqr() - self.v[0].norm_sqr()
    }
}

/// Parameters via the generator recursion for the displacement structure of
/// a positive matrix.
///
/// For each block start `t`, the unit-diagonal block `R(t) = S[t.., t..]`
/// padded by an identity satisfies `R(t) - F R(t+1) F* = G J G*` with `F`
/// the down-shift and `G = [u | v]`, `u = (1, conj S[t][t+1..])`,
/// `v = (0, conj S[t][t+1..])`. Each step rotates the top row of `G_m(t)`
/// to `(., 0)` with the hyperbolic rotation built from
/// `gamma_m(t) = v_0 / u_0`, then forms
/// `G_{m+1}(t) = [F a_m(t+1) | b_m(t)]` from the rotated columns. The
/// contraction of the matrix is `Gamma[k][j] = conj(gamma_{j-k}(k))`.
pub fn displacement_inverse(s: &ComplexMatrix, tol: Tolerance) -> Result<DisplacementResult> {
    let Normalized { scales, unit } = normalize(s, tol)?;
    let d = scales.len();
    let mut params = SchurParams::identity(d);
    params.set_diag(&scales)?;
    let mut factor = ComplexMatrix::zeros(d, d);
    let mut gammas = vec![vec![ZERO; d]; d];

    // zero-scale rows become isolated unit vectors
    let row = |t: usize, i: usize| -> C64 {
        if scales[t] == 0.0 || scales[t + i] == 0.0 {
            ZERO
        } else {
            unit[(t, t + i)].conj()
        }
    };
    let mut states: Vec<GeneratorState> = (0..d)
        .map(|t| {
            let len = d - t;
            let mut u: Vec<C64> = (0..len).map(|i| row(t, i)).collect();
            u[0] = ONE;
            let mut v = u.clone();
            v[0] = ZERO;
            GeneratorState {
                step: 0,
                time: t,
                u,
                v,
            }
        })
        .collect();

    for m in 0..d {
        // rotated columns (a, b) for every live block start t = 0 ..= d-1-m
        let mut rotated: Vec<(Vec<C64>, Vec<C64>)> = Vec::with_capacity(d - m);
        for st in &states {
            let t = st.time;
            let gamma = if m == 0 {
                ZERO
            } else {
                let j = t + m;
                if scales[t] == 0.0 || scales[j] == 0.0 {
                    params.mask(t, j);
                } else {
                    let (left_sq, right_sq) = params.defect_products_sq(t, j);
                    let divisor = (left_sq * right_sq).sqrt();
                    let num = if st.u[0] != ZERO {
                        (st.v[0] / st.u[0]).conj() * divisor
                    } else {
                        st.v[0].conj()
                    };
                    settle_entry(&mut params, t, j, num, tol)?;
                }
                params.gamma(t, j).conj()
            };
            gammas[m][t] = gamma;
            rotated.push(rotate(&st.u, &st.v, gamma));
        }
        // column m of the lower factor of R(0) is a_m(0)
        for (i, z) in rotated[0].0.iter().enumerate() {
            factor[(m, m + i)] = z.conj();
        }
        states = (0..d - m - 1)
            .map(|t| GeneratorState {
                step: m + 1,
                time: t,
                u: rotated[t + 1].0.clone(),
                v: rotated[t].1[1..].to_vec(),
            })
            .collect();
    }
    Ok(DisplacementResult {
        params,
        factor,
        gammas,
    })
}

/// Applies `Theta(gamma)` to the generator columns. A unimodular `gamma`
/// kills both directions.
fn rotate(u: &[C64], v: &[C64], gamma: C64) -> (Vec<C64>, Vec<C64>) {
    if gamma == ZERO {
        return (u.to_vec(), v.to_vec());
    }
    let s = defect(gamma);
    if s == 0.0 {
        return (vec![ZERO; u.len()], vec![ZERO; v.len()]);
    }
    let a = u
        .iter()
        .zip(v)
        .map(|(&ui, &vi)| (ui - vi * gamma.conj()) / s)
        .collect();
    let b = u
        .iter()
        .zip(v)
        .map(|(&ui, &vi)| (vi - ui * gamma) / s)
        .collect();
    (a, b)
}
