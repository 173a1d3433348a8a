//! Matrix Lie algebras `sl_n`: adjoint operators, Jordan splitting of flow
//! generators, ad-nilpotency and growth of `Ad(exp tX)`.
//!
//! The basis of `sl_n` used for every adjoint matrix is fixed:
//!
//! 1. `E_ij` for `i < j`, row-major;
//! 2. `H_k = E_kk - E_(k+1)(k+1)` for `k = 1..n-1`;
//! 3. `E_ij` for `i > j`, row-major.
//!
//! For `sl_2` this is `{E_12, H, E_21}`. Coordinates in this basis are
//! integral whenever the matrix is, so integer generators keep exact
//! adjoint matrices.
//!
//! Unless stated otherwise tolerances are relative to the Frobenius norm of
//! the input and default to [`DEFAULT_TOL`].

mod jordan;

pub use jordan::{jordan_split, JordanSplit};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Largest magnitude at which an `f64` still represents every integer.
const EXACT_INT_LIMIT: f64 = 9_007_199_254_740_992.0;

const SCHUR_MAX_ITER: usize = 2_000;

/// An element of `sl_n` given by its `n × n` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct AlgebraElement {
    entries: DMatrix<f64>,
}

impl AlgebraElement {
    /// Checks squareness, finiteness and `|tr X| <= 1e-8 · max(1, ‖X‖)`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "expected a square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() < 2 {
            return Err(Error::InvalidMatrix("sl_n needs n >= 2".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        let tr = entries.trace();
        if tr.abs() > DEFAULT_TOL * entries.norm().max(1.0) {
            return Err(Error::InvalidMatrix(format!("trace {tr} is not zero")));
        }
        Ok(AlgebraElement { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows must all have length n".into()));
        }
        AlgebraElement::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zero(n: usize) -> Self {
        AlgebraElement { entries: DMatrix::zeros(n, n) }
    }

    /// The elementary matrix `E_ij` (0-based indices, `i != j`).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        assert!(i != j && i < n && j < n, "E_ij needs distinct indices below n");
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        AlgebraElement { entries: m }
    }

    /// `Σ E_(i,i+1)`, the principal nilpotent of `sl_n`.
    pub fn principal_nilpotent(n: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = 1.0;
        }
        AlgebraElement { entries: m }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn is_integral(&self) -> bool {
        is_integral(&self.entries)
    }

    pub fn scale(&self, k: f64) -> Self {
        AlgebraElement { entries: &self.entries * k }
    }

    pub fn add(&self, other: &AlgebraElement) -> Self {
        AlgebraElement { entries: &self.entries + &other.entries }
    }

    pub fn sub(&self, other: &AlgebraElement) -> Self {
        AlgebraElement { entries: &self.entries - &other.entries }
    }

    pub fn bracket(&self, other: &AlgebraElement) -> Self {
        AlgebraElement { entries: commutator(&self.entries, &other.entries) }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Skips the trace check; callers guarantee the matrix is traceless.
    pub(crate) fn from_matrix_unchecked(entries: DMatrix<f64>) -> Self {
        AlgebraElement { entries }
    }
}

impl TryFrom<Vec<Vec<f64>>> for AlgebraElement {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        AlgebraElement::from_rows(&rows)
    }
}

impl From<AlgebraElement> for Vec<Vec<f64>> {
    fn from(x: AlgebraElement) -> Self {
        x.to_rows()
    }
}

pub(crate) fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Eigenvalues through a real Schur form with a bounded iteration count.
///
/// The Schur deflation test is relative to neighbouring diagonal entries and
/// stalls on zero eigenvalues, so the spectrum is shifted away from zero
/// first.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let shift = m.norm() + 1.0;
    let shifted = m + DMatrix::identity(n, n) * shift;
    // QR sweeps can stall on roundoff-sized subdiagonals; retry with looser
    // deflation before giving up
    for eps in [4.0 * f64::EPSILON, 1e-14, 1e-12] {
        if let Some(schur) = Schur::try_new(shifted.clone(), eps, SCHUR_MAX_ITER) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| z - shift).collect());
        }
    }
    Err(Error::IllConditioned {
        condition: f64::INFINITY,
        detail: "Schur iteration did not converge".into(),
    })
}

pub(crate) fn is_integral(m: &DMatrix<f64>) -> bool {
    m.iter().all(|x| x.fract() == 0.0 && x.abs() < EXACT_INT_LIMIT)
}

/// Dimension `n² - 1` of `sl_n`.
pub fn sl_dim(n: usize) -> usize {
    n * n - 1
}

/// The `k`-th basis matrix of `sl_n` in the documented order.
pub fn basis_element(n: usize, k: usize) -> DMatrix<f64> {
    let upper = n * (n - 1) / 2;
    let mut m = DMatrix::zeros(n, n);
    if k < upper {
        let (i, j) = upper_pair(n, k);
        m[(i, j)] = 1.0;
    } else if k < upper + n - 1 {
        let h = k - upper;
        m[(h, h)] = 1.0;
        m[(h + 1, h + 1)] = -1.0;
    } else {
        let (j, i) = upper_pair(n, k - upper - (n - 1));
        m[(i, j)] = 1.0;
    }
    m
}

fn upper_pair(n: usize, mut k: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("basis index out of range")
}

/// Coordinates of a traceless matrix in the documented basis.
///
/// The diagonal part `diag(d_1..d_n)` has `H_k` coordinate `d_1 + ... + d_k`.
pub fn coordinates(y: &DMatrix<f64>) -> Vec<f64> {
    let n = y.nrows();
    let mut out = Vec::with_capacity(sl_dim(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push(y[(i, j)]);
        }
    }
    let mut acc = 0.0;
    for k in 0..n - 1 {
        acc += y[(k, k)];
        out.push(acc);
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(y[(j, i)]);
        }
    }
    out
}

/// Inverse of [`coordinates`].
pub fn from_coordinates(n: usize, c: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (k, &v) in c.iter().enumerate() {
        if v != 0.0 {
            m += basis_element(n, k) * v;
        }
    }
    m
}

/// Matrix of a linear map on `sl_n` in the documented basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AdOperator {
    entries: DMatrix<f64>,
}

impl AdOperator {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidMatrix("operator must be square".into()));
        }
        Ok(AdOperator { entries })
    }

    pub fn identity(dim: usize) -> Self {
        AdOperator { entries: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn pow(&self, k: u32) -> AdOperator {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.entries;
        }
        AdOperator { entries: out }
    }
}

/// `ad(X)`: the matrix of `Y ↦ XY - YX`.
pub fn ad_matrix(x: &AlgebraElement) -> AdOperator {
    let n = x.n();
    let dim = sl_dim(n);
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let col = coordinates(&commutator(x.matrix(), &basis_element(n, k)));
        for (r, v) in col.into_iter().enumerate() {
            m[(r, k)] = v;
        }
    }
    AdOperator { entries: m }
}

/// Hilbert-Schmidt norm `sqrt(tr(AᵗA))`.
pub fn hs_norm(a: &AdOperator) -> f64 {
    a.entries.norm()
}

/// The `l` with `A^l != 0` and `A^(l+1) = 0`.
///
/// Integral operators are handled in exact `i128` arithmetic. Otherwise
/// `A^k` counts as nonzero iff `‖A^k‖ > tol · ‖A‖^k`, and `A` must satisfy
/// `‖A^N‖ <= tol · ‖A‖^N` with `N = dim A` to be accepted as nilpotent.
pub fn nilpotency_degree(a: &AdOperator, tol: f64) -> Result<usize> {
    let norm = hs_norm(a);
    if norm == 0.0 {
        return Err(Error::ZeroOperator);
    }
    if is_integral(&a.entries) {
        if let Some(res) = exact_degree(a) {
            return res;
        }
    }
    let dim = a.dim();
    let b = &a.entries / norm;
    // p runs through b^1 .. b^dim
    let mut p = b.clone();
    let mut degree = None;
    for k in 1..dim {
        p = &p * &b;
        if degree.is_none() && p.norm() <= tol {
            degree = Some(k);
        }
    }
    let residual = p.norm();
    match degree {
        Some(l) if residual <= tol => Ok(l),
        _ => Err(Error::NotNilpotent { residual }),
    }
}

/// `None` when an intermediate power overflows `i128`.
fn exact_degree(a: &AdOperator) -> Option<Result<usize>> {
    let dim = a.dim();
    let m: Vec<Vec<i128>> = (0..dim)
        .map(|i| (0..dim).map(|j| a.entries[(i, j)] as i128).collect())
        .collect();
    let mut p = m.clone();
    for k in 1..=dim {
        if p.iter().all(|r| r.iter().all(|&v| v == 0)) {
            return Some(Ok(k - 1));
        }
        let mut next = vec![vec![0i128; dim]; dim];
        for i in 0..dim {
            for l in 0..dim {
                let pil = p[i][l];
                if pil == 0 {
                    continue;
                }
                for j in 0..dim {
                    let term = pil.checked_mul(m[l][j])?;
                    next[i][j] = next[i][j].checked_add(term)?;
                }
            }
        }
        p = next;
    }
    let residual = p.iter().flatten().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
    Some(Err(Error::NotNilpotent { residual }))
}

/// Class of a one-parameter flow `exp(tX)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowKind {
    QuasiUnipotent { l: usize },
    QuasiDiagonalizable,
    Bounded,
}

/// A flow generator with its split and classification.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowDescriptor {
    pub generator: AlgebraElement,
    #[serde(flatten)]
    pub kind: FlowKind,
    pub split: JordanSplit,
}

/// Quasi-diagonalizable iff `‖X_hyp‖ > tol·‖X‖`; otherwise quasi-unipotent
/// iff `‖X_nil‖ > tol·‖X‖`, with `l` the nilpotency degree of `ad(X_nil)`;
/// otherwise bounded.
pub fn classify_flow(x: &AlgebraElement, tol: f64) -> Result<FlowDescriptor> {
    let split = jordan_split(x, tol)?;
    let scale = tol * x.norm();
    let kind = if split.hyperbolic.norm() > scale {
        FlowKind::QuasiDiagonalizable
    } else if split.nilpotent.norm() > scale {
        FlowKind::QuasiUnipotent { l: nilpotency_degree(&ad_matrix(&split.nilpotent), tol)? }
    } else {
        FlowKind::Bounded
    };
    Ok(FlowDescriptor { generator: x.clone(), kind, split })
}

/// `exp(t·ad X)`, which equals `Ad(exp tX)`.
pub fn adjoint_exp(x: &AlgebraElement, t: f64) -> AdOperator {
    AdOperator { entries: (ad_matrix(x).entries * t).exp() }
}

/// `(t, λ₁(X(t)))` with `λ₁ = log σ_max(exp(t·ad X))`, one entry per grid point.
///
/// Nilpotent `ad X` is exponentiated by its finite series. Otherwise
/// `exp(t·ad X / 2^k)` with `‖t·ad X‖ / 2^k <= ½` is squared `k` times, the
/// running logarithm of the norm being split off at every squaring, so `λ₁`
/// stays finite long after `exp(t·ad X)` itself would overflow.
pub fn lambda1_profile(x: &AlgebraElement, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidSchedule("empty t grid".into()));
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite()))
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidSchedule("t grid must be positive and increasing".into()));
    }
    let ad = ad_matrix(x);
    let dim = ad.dim();
    let powers = match nilpotency_degree(&ad, DEFAULT_TOL) {
        Ok(l) => Some((0..=l as u32).map(|k| ad.pow(k).entries).collect::<Vec<_>>()),
        Err(Error::ZeroOperator) => Some(vec![DMatrix::identity(dim, dim)]),
        Err(_) => None,
    };
    let values: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| match &powers {
            Some(p) => {
                let mut acc = DMatrix::zeros(dim, dim);
                let mut coef = 1.0;
                for (k, pk) in p.iter().enumerate() {
                    if k > 0 {
                        coef *= t / k as f64;
                    }
                    acc += pk * coef;
                }
                acc.singular_values().max().ln()
            }
            None => log_top_singular_exp(&ad.entries, t),
        })
        .collect();
    let mut out = Vec::with_capacity(t_grid.len());
    let mut max_t = 0.0;
    for (&t, v) in t_grid.iter().zip(values) {
        if !v.is_finite() {
            return Err(Error::Overflow { t, max_t });
        }
        max_t = t;
        out.push((t, v));
    }
    Ok(out)
}

/// `log σ_max(exp(tA))` by normalized scaling and squaring.
fn log_top_singular_exp(a: &DMatrix<f64>, t: f64) -> f64 {
    let size = a.norm() * t;
    let k = if size > 0.5 { (size / 0.5).log2().ceil() as u32 } else { 0 };
    let mut m = (a * (t / 2f64.powi(k as i32))).exp();
    let mut log_scale = 0.0;
    for _ in 0..k {
        let s = m.norm();
        m /= s;
        log_scale = 2.0 * (log_scale + s.ln());
        m = &m * &m;
    }
    m.singular_values().max().ln() + log_scale
}

/// Least-squares slope of `λ₁` against `log t`.
pub fn log_log_slope(profile: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = profile.iter().map(|&(t, v)| (t.ln(), v)).collect();
    least_squares_slope(&pts)
}

/// Least-squares slope of `λ₁` against `t`.
pub fn linear_rate(profile: &[(f64, f64)]) -> f64 {
    least_squares_slope(profile)
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
