//! Additive Jordan decomposition `X = X_nil + X_hyp + X_ell`.
//!
//! The semisimple part `S` is the limit of the Newton iteration
//! `S ← S - P(S)·P'(S)⁻¹` started at `X`, where `P` is the square-free
//! polynomial vanishing on the spectrum of `X`. For integer matrices `P` is
//! `χ / gcd(χ, χ')` and the iteration runs in exact rationals. Otherwise `P`
//! is built from numerically clustered eigenvalues. `S` is then split into
//! the parts with real and with imaginary eigenvalues through the spectral
//! projectors of `S`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{commutator, eigenvalues, AlgebraElement};
use crate::error::{Error, Result};

/// The three commuting parts of a generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanSplit {
    pub nilpotent: AlgebraElement,
    pub hyperbolic: AlgebraElement,
    pub elliptic: AlgebraElement,
    /// Largest Frobenius norm of a spectral projector of the semisimple
    /// part; 1 when no projectors were needed.
    pub condition: f64,
    /// True when the semisimple part was computed in exact arithmetic.
    pub exact: bool,
}

/// Largest `n` for which the exact rational path is attempted.
const EXACT_MAX_N: usize = 8;

/// Splits `x` and verifies that the three parts commute to within
/// `tol · ‖X‖²`. Fails with the projector condition number otherwise.
pub fn jordan_split(x: &AlgebraElement, tol: f64) -> Result<JordanSplit> {
    let n = x.n();
    let norm = x.norm();
    if norm == 0.0 {
        let z = AlgebraElement::zero(n);
        return Ok(JordanSplit {
            nilpotent: z.clone(),
            hyperbolic: z.clone(),
            elliptic: z,
            condition: 1.0,
            exact: true,
        });
    }
    let exact_s = if x.is_integral() && n <= EXACT_MAX_N { exact_semisimple(x.matrix()) } else { None };
    let exact = exact_s.is_some();
    let (semisimple, hyp, condition) = match exact_s {
        Some(s) if s.norm() == 0.0 => (s, DMatrix::zeros(n, n), 1.0),
        Some(s) => {
            let s_norm = s.norm();
            let spec = spectral_data(&(&s / s_norm), tol)?;
            let hyp = hyperbolic_part(&(&s / s_norm), &spec) * s_norm;
            (s, hyp, spec.condition)
        }
        None => {
            let xs = x.matrix() / norm;
            let spec = spectral_data(&xs, tol)?;
            let hyp = hyperbolic_part(&spec.semisimple, &spec) * norm;
            (&spec.semisimple * norm, hyp, spec.condition)
        }
    };
    let mut parts = [x.matrix() - &semisimple, hyp.clone(), &semisimple - &hyp];
    if !exact {
        flush_roundoff(&mut parts, 64.0 * n as f64 * f64::EPSILON * norm);
    }
    let bound = tol * norm * norm;
    for (a, b, name) in [(0, 1, "nil/hyp"), (0, 2, "nil/ell"), (1, 2, "hyp/ell")] {
        let c = commutator(&parts[a], &parts[b]).norm();
        if c > bound {
            return Err(Error::IllConditioned {
                condition,
                detail: format!("{name} commutator norm {c:e} exceeds {bound:e}"),
            });
        }
    }
    let [nil, hyp, ell] = parts;
    Ok(JordanSplit {
        nilpotent: AlgebraElement::from_matrix_unchecked(nil),
        hyperbolic: AlgebraElement::from_matrix_unchecked(hyp),
        elliptic: AlgebraElement::from_matrix_unchecked(ell),
        condition,
        exact,
    })
}

/// Eigenvalues of a unit-norm matrix closer than this are always one group.
const MIN_RADIUS: f64 = 1e-10;

/// Upper limit for grouping: a Jordan block of size `n` scatters its
/// eigenvalue by about `(n·eps)^(1/n)`.
fn max_radius(n: usize) -> f64 {
    10.0 * (n as f64 * f64::EPSILON).powf(1.0 / n as f64)
}

struct Spectral {
    semisimple: DMatrix<f64>,
    centers: Vec<Complex64>,
    projectors: Vec<DMatrix<Complex64>>,
    condition: f64,
}

/// Semisimple part and spectral projectors of a unit-norm matrix.
///
/// Eigenvalue groups are coarsened along the single-linkage hierarchy until
/// the resulting semisimple part commutes with the input to within `tol`
/// and all its spectral projectors have norm at most `1/√tol`. A defective
/// eigenvalue left split into several groups fails one of the two: Newton
/// either leaves the commutant of `X` or produces projectors of norm about
/// `1/δ`, with `δ` the numerical scatter.
fn spectral_data(xs: &DMatrix<f64>, tol: f64) -> Result<Spectral> {
    let kappa_max = 1.0 / tol.sqrt();
    let n = xs.nrows();
    let eigs = eigenvalues(xs)?;
    let mut radii = vec![MIN_RADIUS];
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            let d = (eigs[i] - eigs[j]).norm();
            if d > MIN_RADIUS && d <= max_radius(n) {
                radii.push(d);
            }
        }
    }
    radii.sort_by(f64::total_cmp);
    let mut best: Option<Spectral> = None;
    let mut last_len = usize::MAX;
    for r in radii {
        let centers = cluster(&eigs, r);
        if centers.len() == last_len {
            continue;
        }
        last_len = centers.len();
        let Ok(s) = float_semisimple(xs, &centers) else { continue };
        if commutator(&s, xs).norm() > tol {
            continue;
        }
        let projectors = projectors(&s, &centers);
        let condition = projectors.iter().map(|e| e.norm()).fold(1.0, f64::max);
        let cand = Spectral { semisimple: s, centers, projectors, condition };
        if cand.condition <= kappa_max {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| cand.condition < b.condition) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| Error::IllConditioned {
        condition: f64::INFINITY,
        detail: "semisimple-part iteration did not converge at any grouping".into(),
    })
}

/// Single-linkage clusters within `radius`, replaced by their means. Real
/// and imaginary parts within `radius` of zero are snapped first.
fn cluster(eigs: &[Complex64], radius: f64) -> Vec<Complex64> {
    let snapped: Vec<Complex64> = eigs
        .iter()
        .map(|&z| {
            let mut z = z;
            if z.im.abs() <= radius {
                z.im = 0.0;
            }
            if z.re.abs() <= radius {
                z.re = 0.0;
            }
            z
        })
        .collect();
    let n = snapped.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (snapped[i] - snapped[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out = Vec::new();
    for root in 0..n {
        let members: Vec<Complex64> =
            (0..n).filter(|&i| find(&mut parent, i) == root).map(|i| snapped[i]).collect();
        if !members.is_empty() {
            out.push(members.iter().sum::<Complex64>() / members.len() as f64);
        }
    }
    out
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

fn eval_poly(coeffs: &[f64], m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * m + DMatrix::identity(n, n) * c;
    }
    acc
}

fn float_semisimple(xs: &DMatrix<f64>, centers: &[Complex64]) -> Result<DMatrix<f64>> {
    let p = poly_from_roots(centers);
    let dp: Vec<f64> = p.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
    let mut s = xs.clone();
    let mut prev = f64::INFINITY;
    for _ in 0..100 {
        let r = eval_poly(&p, &s);
        let d = eval_poly(&dp, &s);
        let step = d.lu().solve(&r).ok_or_else(|| Error::IllConditioned {
            condition: f64::INFINITY,
            detail: "derivative of the spectral polynomial is singular".into(),
        })?;
        let size = step.norm();
        if !size.is_finite() {
            break;
        }
        // quadratic convergence ends in roundoff-level steps that stop shrinking
        if size >= 0.5 * prev && size <= 1e-8 {
            return Ok(s);
        }
        s -= &step;
        if size <= 1e-14 {
            return Ok(s);
        }
        prev = size;
    }
    Err(Error::IllConditioned {
        condition: f64::INFINITY,
        detail: "semisimple-part iteration did not converge".into(),
    })
}

/// Lagrange projectors `Π_{i≠j} (S - c_i)/(c_j - c_i)`.
fn projectors(s: &DMatrix<f64>, centers: &[Complex64]) -> Vec<DMatrix<Complex64>> {
    let n = s.nrows();
    let sc = s.map(|v| Complex64::new(v, 0.0));
    let id = DMatrix::<Complex64>::identity(n, n);
    centers
        .iter()
        .enumerate()
        .map(|(j, &cj)| {
            let mut e = id.clone();
            for (i, &ci) in centers.iter().enumerate() {
                if i != j {
                    e = e * (&sc - &id * ci) / (cj - ci);
                }
            }
            e
        })
        .collect()
}

/// `Σ Re(c_j) E_j`; exact shortcuts when the spectrum is all real or all
/// imaginary.
fn hyperbolic_part(s: &DMatrix<f64>, spec: &Spectral) -> DMatrix<f64> {
    let n = s.nrows();
    if spec.centers.iter().all(|c| c.im == 0.0) {
        return s.clone();
    }
    if spec.centers.iter().all(|c| c.re == 0.0) {
        return DMatrix::zeros(n, n);
    }
    let mut hyp = DMatrix::<Complex64>::zeros(n, n);
    for (e, c) in spec.projectors.iter().zip(&spec.centers) {
        hyp += e * Complex64::new(c.re, 0.0);
    }
    hyp.map(|z| z.re)
}

/// Moves parts of roundoff size into the largest part.
fn flush_roundoff(parts: &mut [DMatrix<f64>; 3], threshold: f64) {
    for k in 0..3 {
        let nk = parts[k].norm();
        if nk == 0.0 || nk > threshold {
            continue;
        }
        let target = (0..3)
            .filter(|&i| i != k)
            .max_by(|&a, &b| parts[a].norm().total_cmp(&parts[b].norm()))
            .unwrap();
        let (r, c) = parts[k].shape();
        let moved = std::mem::replace(&mut parts[k], DMatrix::zeros(r, c));
        parts[target] += moved;
    }
}

type Q = BigRational;
type QMat = Vec<Vec<Q>>;

fn q_identity(n: usize) -> QMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

fn q_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for i in 0..n {
        for l in 0..n {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

fn q_is_zero(a: &QMat) -> bool {
    a.iter().flatten().all(Zero::is_zero)
}

fn q_inverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.clone();
    let mut inv = q_identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] = &m[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let a = &m[col][j] * &f;
                    m[r][j] -= a;
                    let b = &inv[col][j] * &f;
                    inv[r][j] -= b;
                }
            }
        }
    }
    Some(inv)
}

/// Coefficients low to high, trailing zeros trimmed.
fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Faddeev-LeVerrier characteristic polynomial.
fn charpoly(a: &QMat) -> Vec<Q> {
    let n = a.len();
    let mut c = vec![Q::zero(); n + 1];
    c[n] = Q::one();
    let mut m = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        m = q_mul(a, &m);
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        let am = q_mul(a, &m);
        let tr: Q = (0..n).map(|i| am[i][i].clone()).sum();
        c[n - k] = -tr / Q::from_integer(BigInt::from(k));
    }
    c
}

fn derivative(p: &[Q]) -> Vec<Q> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer(BigInt::from(k))).collect()
}

fn divrem(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead = b.last().expect("division by the zero polynomial").clone();
    let mut q = vec![Q::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (k, bk) in b.iter().enumerate() {
            r[k + shift] -= &f * bk;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    (q, r)
}

fn gcd(a: &[Q], b: &[Q]) -> Vec<Q> {
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    let lead = a.last().cloned().unwrap_or_else(Q::one);
    a.into_iter().map(|c| c / &lead).collect()
}

fn q_eval(p: &[Q], m: &QMat) -> QMat {
    let n = m.len();
    let mut acc = vec![vec![Q::zero(); n]; n];
    for c in p.iter().rev() {
        acc = q_mul(&acc, m);
        for (i, row) in acc.iter_mut().enumerate() {
            row[i] += c;
        }
    }
    acc
}

/// Exact semisimple part of an integer matrix, or `None` if the iteration
/// fails to terminate (it cannot in exact arithmetic, so this is a guard).
fn exact_semisimple(x: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = x.nrows();
    let a: QMat = (0..n)
        .map(|i| (0..n).map(|j| Q::from_integer(BigInt::from(x[(i, j)] as i64))).collect())
        .collect();
    let chi = charpoly(&a);
    let (p, _) = divrem(&chi, &gcd(&chi, &derivative(&chi)));
    let dp = derivative(&p);
    let mut s = a;
    for _ in 0..=2 * n {
        let r = q_eval(&p, &s);
        if q_is_zero(&r) {
            return Some(DMatrix::from_fn(n, n, |i, j| s[i][j].to_f64().unwrap_or(f64::NAN)));
        }
        let dinv = q_inverse(&q_eval(&dp, &s))?;
        let step = q_mul(&r, &dinv);
        for i in 0..n {
            for j in 0..n {
                s[i][j] -= &step[i][j];
            }
        }
    }
    None
}
