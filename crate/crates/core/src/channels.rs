//! Linear maps between matrix algebras, their Choi matrices, and channel
//! quantities read off the contraction parameters of the Choi matrix.
//!
//! Index conventions (0-based):
//!
//! * Choi matrix: `S[k * d_out + a, j * d_out + b] = Phi(E_kj)[a, b]`, i.e.
//!   block `(k, j)` is `Phi(E_kj)`.
//! * Action matrix: `action[a * d_out + b, k * d_in + j] = Phi(E_kj)[a, b]`,
//!   so the row-major vectorization satisfies `vec(Phi(X)) = action vec(X)`.
//!
//! Kraus generators follow [`KrausConvention`].

use crate::error::{Error, Result};
use crate::matcore::{is_hermitian, ComplexMatrix, Tolerance, C64, ONE, ZERO};
use crate::schur::{self, defect, defect_sq, SchurParams};

fn unit(d: usize, k: usize, j: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(d, d);
    e[(k, j)] = ONE;
    e
}

/// A linear map `M_{d_in} -> M_{d_out}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    d_in: usize,
    d_out: usize,
    action: ComplexMatrix,
}

impl LinearMap {
    pub fn new(d_in: usize, d_out: usize, action: ComplexMatrix) -> Result<Self> {
        if action.rows() != d_out * d_out || action.cols() != d_in * d_in {
            return Err(Error::Dimension(format!(
                "action is {}x{}, expected {}x{}",
                action.rows(),
                action.cols(),
                d_out * d_out,
                d_in * d_in
            )));
        }
        Ok(Self {
            d_in,
            d_out,
            action,
        })
    }

    /// Tabulates `f` on the matrix units.
    pub fn from_fn(d_in: usize, d_out: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let mut action = ComplexMatrix::zeros(d_out * d_out, d_in * d_in);
        for k in 0..d_in {
            for j in 0..d_in {
                let y = f(&unit(d_in, k, j));
                assert_eq!((y.rows(), y.cols()), (d_out, d_out), "map output shape");
                for (i, &z) in y.data().iter().enumerate() {
                    action[(i, k * d_in + j)] = z;
                }
            }
        }
        Self {
            d_in,
            d_out,
            action,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |x| x.clone())
    }

    pub fn zero(d_in: usize, d_out: usize) -> Self {
        Self::from_fn(d_in, d_out, |_| ComplexMatrix::zeros(d_out, d_out))
    }

    /// `X -> tr(X) I / d`.
    pub fn depolarizing(d: usize) -> Self {
        Self::from_fn(d, d, |x| {
            ComplexMatrix::identity(d).scale(x.trace() / d as f64)
        })
    }

    pub fn transpose(d: usize) -> Self {
        Self::from_fn(d, d, |x| x.transpose())
    }

    /// `X -> U X U*`.
    pub fn unitary_conjugation(u: &ComplexMatrix) -> Self {
        let (d_out, d_in) = (u.rows(), u.cols());
        let ua = u.adjoint();
        Self::from_fn(d_in, d_out, |x| &(u * x) * &ua)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn action(&self) -> &ComplexMatrix {
        &self.action
    }

    /// `Phi(E_kj)`.
    pub fn image_of_unit(&self, k: usize, j: usize) -> ComplexMatrix {
        let col = k * self.d_in + j;
        ComplexMatrix::from_fn(self.d_out, self.d_out, |a, b| {
            self.action[(a * self.d_out + b, col)]
        })
    }

    /// `Y_ab = sum_kj Phi(E_kj)_ab X_kj`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.d_in || x.cols() != self.d_in {
            return Err(Error::Dimension(format!(
                "input is {}x{}, map expects {}x{}",
                x.rows(),
                x.cols(),
                self.d_in,
                self.d_in
            )));
        }
        let v = ComplexMatrix::new(self.d_in * self.d_in, 1, x.data().to_vec())?;
        let y = self.action.matmul(&v)?;
        ComplexMatrix::new(self.d_out, self.d_out, y.data().to_vec())
    }

    /// The Hilbert-Schmidt adjoint: `tr(A* Phi(B)) = tr(adjoint(A)* B)`.
    pub fn adjoint(&self) -> Self {
        Self {
            d_in: self.d_out,
            d_out: self.d_in,
            action: self.action.adjoint(),
        }
    }

    /// `Phi (x) Psi` acting on `M_{d_in} (x) M_{d_in'}` under [`crate::matcore::kron`].
    pub fn tensor(&self, other: &Self) -> Self {
        let (p, q) = (self.d_in, other.d_in);
        let (r, s) = (self.d_out, other.d_out);
        let mut action = ComplexMatrix::zeros(r * s * r * s, p * q * p * q);
        for row in 0..action.rows() {
            let (a, b) = (row / (r * s), row % (r * s));
            let (a1, a2, b1, b2) = (a / s, a % s, b / s, b % s);
            for col in 0..action.cols() {
                let (k, j) = (col / (p * q), col % (p * q));
                let (k1, k2, j1, j2) = (k / q, k % q, j / q, j % q);
                action[(row, col)] = self.action[(a1 * r + b1, k1 * p + j1)]
                    * other.action[(a2 * s + b2, k2 * q + j2)];
            }
        }
        Self {
            d_in: p * q,
            d_out: r * s,
            action,
        }
    }
}

/// Block matrix `[Phi(E_kj)]` of size `d_in d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    s: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, s: ComplexMatrix) -> Result<Self> {
        let n = d_in * d_out;
        if s.rows() != n || s.cols() != n {
            return Err(Error::Dimension(format!(
                "Choi matrix is {}x{}, expected {n}x{n} for d_in = {d_in}, d_out = {d_out}",
                s.rows(),
                s.cols()
            )));
        }
        Ok(Self { d_in, d_out, s })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.s
    }

    /// `Tr_out S`, the `d_in x d_in` matrix `Phi^(I)` transposed; the identity
    /// iff the map is trace preserving.
    pub fn partial_trace_out(&self) -> ComplexMatrix {
        let m = self.d_out;
        ComplexMatrix::from_fn(self.d_in, self.d_in, |k, j| {
            (0..m).map(|a| self.s[(k * m + a, j * m + a)]).sum()
        })
    }
}

pub fn choi_from_map(map: &LinearMap) -> ChoiMatrix {
    let (p, m) = (map.d_in, map.d_out);
    let s = ComplexMatrix::from_fn(p * m, p * m, |r, c| {
        let (k, a, j, b) = (r / m, r % m, c / m, c % m);
        map.action[(a * m + b, k * p + j)]
    });
    ChoiMatrix {
        d_in: p,
        d_out: m,
        s,
    }
}

pub fn map_from_choi(choi: &ChoiMatrix) -> LinearMap {
    let (p, m) = (choi.d_in, choi.d_out);
    let action = ComplexMatrix::from_fn(m * m, p * p, |r, c| {
        let (a, b, k, j) = (r / m, r % m, c / p, c % p);
        choi.s[(k * m + a, j * m + b)]
    });
    LinearMap {
        d_in: p,
        d_out: m,
        action,
    }
}

/// `tr Phi(X) = tr X` for all `X`; equivalently the adjoint is unital.
pub fn is_trace_preserving(map: &LinearMap, tol: Tolerance) -> bool {
    let adj = map.adjoint();
    let id = adj
        .apply(&ComplexMatrix::identity(map.d_out))
        .expect("shape fixed by construction");
    id.max_abs_diff(&ComplexMatrix::identity(map.d_in)) <= tol.threshold(1.0)
}

pub fn is_unital(map: &LinearMap, tol: Tolerance) -> bool {
    let y = map
        .apply(&ComplexMatrix::identity(map.d_in))
        .expect("shape fixed by construction");
    y.max_abs_diff(&ComplexMatrix::identity(map.d_out)) <= tol.threshold(1.0)
}

/// Choi matrix positive, tested through its parameters. Non-Hermitian input
/// is not completely positive.
pub fn is_completely_positive(choi: &ChoiMatrix, tol: Tolerance) -> bool {
    matches!(is_hermitian(&choi.s, tol), Ok(true)) && schur::is_psd_via_params(&choi.s, tol)
}

/// How the generators relate to the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausConvention {
    /// Generators `A_n` are `d_in x d_out`, the rows of `A` with `S = A* A`
    /// reshaped row-major (`A_n[k, a]` sits at column `k * d_out + a`).
    /// The channel is `Phi(X) = sum A_n* X A_n`, and it is trace preserving
    /// iff `sum A_n A_n* = I`. The usual operators are `K_n = A_n*`.
    AdjointSandwich,
}

impl KrausConvention {
    pub fn describe(self) -> &'static str {
        match self {
            KrausConvention::AdjointSandwich => {
                "Phi(X) = sum_n A_n* X A_n; S_Phi = A* A with row n of A = row-major A_n; \
                 trace preserving iff sum_n A_n A_n* = I"
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrausSet {
    d_in: usize,
    d_out: usize,
    generators: Vec<ComplexMatrix>,
    convention: KrausConvention,
}

impl KrausSet {
    pub fn convention(&self) -> KrausConvention {
        self.convention
    }

    /// `A_n`, `d_in x d_out`.
    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// `K_n = A_n*`, `d_out x d_in`, with `Phi(X) = sum K_n X K_n*`.
    pub fn operators(&self) -> Vec<ComplexMatrix> {
        self.generators.iter().map(ComplexMatrix::adjoint).collect()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.d_in || x.cols() != self.d_in {
            return Err(Error::Dimension("input shape".into()));
        }
        let mut y = ComplexMatrix::zeros(self.d_out, self.d_out);
        for a in &self.generators {
            y = &y + &(&(&a.adjoint() * x) * a);
        }
        Ok(y)
    }

    /// `A`, the generators stacked as rows.
    pub fn stacked(&self) -> ComplexMatrix {
        let n = self.d_in * self.d_out;
        ComplexMatrix::from_fn(self.generators.len(), n, |r, c| {
            self.generators[r].data()[c]
        })
    }

    /// `sum A_n A_n*`, the identity for trace-preserving channels.
    pub fn completeness(&self) -> ComplexMatrix {
        self.generators
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, a| {
                &acc + &(a * &a.adjoint())
            })
    }
}

/// Generators from the parameter-driven Cholesky factor of the Choi matrix.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol: Tolerance) -> Result<KrausSet> {
    let params = schur::inverse(&choi.s, tol)?;
    let a = schur::scaled_cholesky_factor(&params);
    let (p, m) = (choi.d_in, choi.d_out);
    let generators: Vec<ComplexMatrix> = (0..a.rows())
        .filter(|&r| a.row(r).iter().any(|z| *z != ZERO))
        .map(|r| ComplexMatrix::new(p, m, a.row(r).to_vec()).expect("row length d_in d_out"))
        .collect();
    let set = KrausSet {
        d_in: p,
        d_out: m,
        generators,
        convention: KrausConvention::AdjointSandwich,
    };
    let stacked = set.stacked();
    let err = (&stacked.adjoint() * &stacked).max_abs_diff(&choi.s);
    if err > tol.threshold(choi.s.max_norm()) {
        return Err(Error::Consistency(format!(
            "generators reproduce the Choi matrix only to {err:e}"
        )));
    }
    Ok(set)
}

/// `-(1/N) log det S`, `N = d_in d_out`, from the parameters:
/// `-(1/N) (sum log S_kk + sum log(1 - |Gamma_kj|^2))`; `+inf` when singular.
pub fn capacity_d(choi: &ChoiMatrix, tol: Tolerance) -> Result<f64> {
    let p = schur::inverse(&choi.s, tol)?;
    Ok(log_det_capacity(&p))
}

fn log_det_capacity(p: &SchurParams) -> f64 {
    let n = p.dim() as f64;
    let diag: f64 = p.diag().iter().map(|l| 2.0 * l.ln()).sum();
    let contr: f64 = p.entries().map(|(_, _, g, _)| defect_sq(g).ln()).sum();
    let d = -(diag + contr) / n;
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Choi matrix of `Phi (x) Psi`:
/// `S[(k1 k2, a1 a2), (j1 j2, b1 b2)] = S1[(k1 a1), (j1 b1)] S2[(k2 a2), (j2 b2)]`.
pub fn tensor_choi(c1: &ChoiMatrix, c2: &ChoiMatrix) -> ChoiMatrix {
    let (p1, m1, p2, m2) = (c1.d_in, c1.d_out, c2.d_in, c2.d_out);
    let m = m1 * m2;
    let n = p1 * p2 * m;
    let split = |i: usize| {
        let (k, a) = (i / m, i % m);
        (k / p2, a / m2, k % p2, a % m2)
    };
    let s = ComplexMatrix::from_fn(n, n, |r, c| {
        let (k1, a1, k2, a2) = split(r);
        let (j1, b1, j2, b2) = split(c);
        c1.s[(k1 * m1 + a1, j1 * m1 + b1)] * c2.s[(k2 * m2 + a2, j2 * m2 + b2)]
    });
    ChoiMatrix {
        d_in: p1 * p2,
        d_out: m,
        s,
    }
}

fn upper_triangular_inverse(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = u.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        for r in (0..=c).rev() {
            if u[(r, r)] == ZERO {
                return Err(Error::Domain("singular triangular factor".into()));
            }
            let rhs = if r == c { ONE } else { ZERO };
            let acc: C64 = (r + 1..=c).map(|i| u[(r, i)] * inv[(i, c)]).sum();
            inv[(r, c)] = (rhs - acc) / u[(r, r)];
        }
    }
    Ok(inv)
}

/// Rescales a completely positive map to be trace preserving:
/// with `Tr_out S = U* U`, returns `(U^{-*} (x) I) S (U^{-1} (x) I)`.
pub fn normalize_trace_preserving(choi: &ChoiMatrix, tol: Tolerance) -> Result<ChoiMatrix> {
    let ptr = choi.partial_trace_out();
    let u = schur::scaled_cholesky_factor(&schur::inverse(&ptr, tol)?);
    let w = upper_triangular_inverse(&u)?;
    let m = choi.d_out;
    let lift = ComplexMatrix::from_fn(choi.s.rows(), choi.s.cols(), |r, c| {
        if r % m == c % m {
            w[(r / m, c / m)]
        } else {
            ZERO
        }
    });
    let s = &(&lift.adjoint() * &choi.s) * &lift;
    ChoiMatrix::new(choi.d_in, m, s)
}

/// Qubit channel in normal form: `Phi(I) = I + t . sigma`,
/// `Phi(sigma_i) = lambda_i sigma_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitChannelNF {
    pub t: [f64; 3],
    pub lambda: [f64; 3],
}

fn pauli() -> [ComplexMatrix; 3] {
    let i = C64::new(0.0, 1.0);
    [
        ComplexMatrix::from_complex_rows(&[&[ZERO, ONE], &[ONE, ZERO]]).unwrap(),
        ComplexMatrix::from_complex_rows(&[&[ZERO, -i], &[i, ZERO]]).unwrap(),
        ComplexMatrix::diag_real(&[1.0, -1.0]),
    ]
}

impl QubitChannelNF {
    pub fn map(&self) -> LinearMap {
        let s = pauli();
        LinearMap::from_fn(2, 2, |x| {
            let x0 = x.trace();
            let mut y = ComplexMatrix::identity(2).scale(x0);
            for i in 0..3 {
                let xi = (&s[i] * x).trace();
                y = &y + &s[i].scale(x0 * self.t[i] + xi * self.lambda[i]);
            }
            y.scale_real(0.5)
        })
    }
}

/// `(S_Phi, S_Phi^)` for the normal form, entry by entry:
///
/// ```text
/// S_Phi  = 1/2 [1+t3+l3, t1-it2, 0, l1+l2; t1+it2, 1-t3-l3, l1-l2, 0;
///               0, l1-l2, 1+t3-l3, t1-it2; l1+l2, 0, t1+it2, 1-t3+l3]
/// S_Phi^ = 1/2 [1+t3+l3, 0, t1+it2, l1+l2; 0, 1+t3-l3, l1-l2, t1+it2;
///               t1-it2, l1-l2, 1-t3-l3, 0; l1+l2, t1-it2, 0, 1-t3+l3]
/// ```
pub fn qubit_nf_choi(nf: &QubitChannelNF) -> (ChoiMatrix, ChoiMatrix) {
    let [t1, t2, t3] = nf.t;
    let [l1, l2, l3] = nf.lambda;
    let r = |x: f64| C64::new(x, 0.0);
    let tp = C64::new(t1, t2);
    let tm = tp.conj();
    let z = ZERO;
    let phi = [
        [r(1.0 + t3 + l3), tm, z, r(l1 + l2)],
        [tp, r(1.0 - t3 - l3), r(l1 - l2), z],
        [z, r(l1 - l2), r(1.0 + t3 - l3), tm],
        [r(l1 + l2), z, tp, r(1.0 - t3 + l3)],
    ];
    let hat = [
        [r(1.0 + t3 + l3), z, tp, r(l1 + l2)],
        [z, r(1.0 + t3 - l3), r(l1 - l2), tp],
        [tm, r(l1 - l2), r(1.0 - t3 - l3), z],
        [r(l1 + l2), tm, z, r(1.0 - t3 + l3)],
    ];
    let build = |m: [[C64; 4]; 4]| ChoiMatrix {
        d_in: 2,
        d_out: 2,
        s: ComplexMatrix::from_fn(4, 4, |a, b| m[a][b] * 0.5),
    };
    (build(phi), build(hat))
}

/// Closed-form parameters of `S = 2 S_Phi^` and the eight conditions
/// `S_kk >= 0`, `|Gamma_23|, |Gamma_13|, |Gamma_24|, |Gamma_14| <= 1`.
#[derive(Debug, Clone)]
pub struct QubitNfReport {
    /// `S_11 .. S_44`.
    pub diag: [f64; 4],
    /// `Gamma_23, Gamma_13, Gamma_24, Gamma_14` before clamping; `None` when
    /// undefined or not computable.
    pub raw: [Option<C64>; 4],
    /// The eight conditions in the order listed above.
    pub holds: [bool; 8],
    /// Parameters of `S` (present when all eight conditions hold).
    pub params: Option<SchurParams>,
}

impl QubitNfReport {
    pub fn completely_positive(&self) -> bool {
        self.holds.iter().all(|&h| h)
    }
}

/// Evaluates the closed forms of the normal form on `S = 2 S_Phi^`:
///
/// ```text
/// Gamma_12 = Gamma_34 = 0
/// Gamma_23 = (l1 - l2) / sqrt(S22 S33)
/// Gamma_13 = (t1 + it2) sqrt(S22) / (sqrt(S22 S33 - (l1 - l2)^2) sqrt(S11))
/// Gamma_24 = (t1 + it2) sqrt(S33) / (sqrt(S22 S33 - (l1 - l2)^2) sqrt(S44))
/// Gamma_14 = ((l1 + l2) / sqrt(S11 S44) + Gamma_13 conj(Gamma_23) Gamma_24) / (D_13 D_24)
/// ```
///
/// When a denominator vanishes the entry is undefined, and the numerator it
/// multiplies must vanish too.
pub fn qubit_nf_params(nf: &QubitChannelNF, tol: Tolerance) -> QubitNfReport {
    let [t1, t2, t3] = nf.t;
    let [l1, l2, l3] = nf.lambda;
    let s = [1.0 + t3 + l3, 1.0 + t3 - l3, 1.0 - t3 - l3, 1.0 - t3 + l3];
    let scale = s.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let thr = tol.threshold(scale);
    let mut holds = [false; 8];
    for k in 0..4 {
        holds[k] = s[k] >= -thr;
    }
    let mut raw = [None; 4];
    if !holds[..4].iter().all(|&h| h) {
        return QubitNfReport {
            diag: s,
            raw,
            holds,
            params: None,
        };
    }
    let l: Vec<f64> = s
        .iter()
        .map(|&x| if x > thr { x.sqrt() } else { 0.0 })
        .collect();
    let tc = C64::new(t1, t2);
    // value, or None with a consistency verdict, for num / (L_k L_j divisor)
    let solve = |num: C64, lk: f64, lj: f64, divisor: f64| -> (Option<C64>, bool) {
        let scaled = lk * lj * divisor;
        if lk == 0.0 || lj == 0.0 || divisor <= tol.abs_eps {
            (None, num.norm() <= tol.abs_eps.sqrt() * (1.0 + lk * lj))
        } else {
            let g = num / scaled;
            let ok = g.norm() <= 1.0 + tol.rel_eps || num.norm() - scaled <= tol.abs_eps;
            (Some(g), ok)
        }
    };
    let (g23, ok23) = solve(C64::new(l1 - l2, 0.0), l[1], l[2], 1.0);
    let d23 = g23.map_or(1.0, defect);
    let (g13, ok13) = solve(tc, l[0], l[2], d23);
    let (g24, ok24) = solve(tc, l[1], l[3], d23);
    let (d13, d24) = (g13.map_or(1.0, defect), g24.map_or(1.0, defect));
    let known = g13.unwrap_or(ZERO) * g23.unwrap_or(ZERO).conj() * g24.unwrap_or(ZERO);
    let num14 = C64::new(l1 + l2, 0.0) + known * l[0] * l[3];
    let (g14, ok14) = solve(num14, l[0], l[3], d13 * d24);
    raw = [g23, g13, g24, g14];
    holds[4] = ok23;
    holds[5] = ok13;
    holds[6] = ok24;
    holds[7] = ok14;
    let params = if holds.iter().all(|&h| h) {
        let mut p = SchurParams::with_diag(&l).expect("nonnegative scales");
        let clamp = |g: C64| if g.norm() > 1.0 { g / g.norm() } else { g };
        let mut put = |k: usize, j: usize, g: Option<C64>| match g {
            Some(g) => p.set_gamma(k, j, clamp(g)).expect("clamped"),
            None => p.mask(k, j),
        };
        if l[0] > 0.0 && l[1] > 0.0 {
            put(0, 1, Some(ZERO));
        }
        if l[2] > 0.0 && l[3] > 0.0 {
            put(2, 3, Some(ZERO));
        }
        put(1, 2, g23);
        put(0, 2, g13);
        put(1, 3, g24);
        put(0, 3, g14);
        Some(p)
    } else {
        None
    };
    QubitNfReport {
        diag: s,
        raw,
        holds,
        params,
    }
}
