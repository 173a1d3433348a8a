//! Adjoint, Jordan-split and growth checks against independent oracles.

use homflow_core::liealg::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

/// Flattened basis matrices of sl_n, each as a column; coordinates of a
/// traceless matrix are recovered by least squares against this.
fn basis_columns(n: usize) -> DMatrix<f64> {
    let dim = n * n - 1;
    let mut cols = DMatrix::zeros(n * n, dim);
    for k in 0..dim {
        let b = basis_element(n, k);
        for i in 0..n {
            for j in 0..n {
                cols[(i * n + j, k)] = b[(i, j)];
            }
        }
    }
    cols
}

fn coords_lsq(n: usize, y: &DMatrix<f64>) -> Vec<f64> {
    let b = basis_columns(n);
    let v = DMatrix::from_fn(n * n, 1, |r, _| y[(r / n, r % n)]);
    let sol = (b.transpose() * &b).lu().solve(&(b.transpose() * v)).unwrap();
    sol.iter().copied().collect()
}

fn random_sl(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AlgebraElement {
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0) * scale);
    let tr = m.trace() / n as f64;
    for i in 0..n {
        m[(i, i)] -= tr;
    }
    AlgebraElement::new(m).unwrap()
}

/// Random unimodular integer matrix as a product of elementary moves.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(n, n);
    for _ in 0..3 * n {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let k = rng.random_range(-1..=1) as f64;
        let mut e = DMatrix::identity(n, n);
        e[(i, j)] = k;
        p *= e;
    }
    p
}

fn conj(p: &DMatrix<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    p * x * p.clone().try_inverse().unwrap()
}

#[test]
fn ad_reproduces_brackets_on_basis_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=4 {
        for _ in 0..20 {
            let x = random_sl(&mut rng, n, 1.0);
            let ad = ad_matrix(&x);
            for k in 0..n * n - 1 {
                let y = basis_element(n, k);
                let want = coords_lsq(n, &(x.matrix() * &y - &y * x.matrix()));
                for (r, w) in want.iter().enumerate() {
                    assert!((ad.matrix()[(r, k)] - w).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn ad_squared_never_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 2..=4 {
        for _ in 0..200 {
            let x = random_sl(&mut rng, n, 1.0);
            let ad = ad_matrix(&x);
            let sq = ad.matrix() * ad.matrix();
            let top = sq.singular_values().max();
            assert!(top > TOL * hs_norm(&ad).powi(2), "n={n}");
        }
    }
}

#[test]
fn sl3_e13_ad_cube_vanishes() {
    let ad = ad_matrix(&AlgebraElement::unit(3, 0, 2));
    assert!(ad.pow(2).matrix().norm() > 0.0);
    assert_eq!(ad.pow(3).matrix().norm(), 0.0);
}

#[test]
fn adjoint_exp_matches_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=4 {
        for _ in 0..20 {
            let x = random_sl(&mut rng, n, 1.0);
            let x = x.scale(0.5 / x.norm());
            let t = rng.random_range(-5.0..5.0);
            let g = (x.matrix() * t).exp();
            let ginv = (x.matrix() * -t).exp();
            let ad_exp = adjoint_exp(&x, t);
            for k in 0..n * n - 1 {
                let y = basis_element(n, k);
                let want = coords_lsq(n, &(&g * y * &ginv));
                for (r, w) in want.iter().enumerate() {
                    assert!((ad_exp.matrix()[(r, k)] - w).abs() < 1e-8);
                }
            }
        }
    }
}

/// Known parts: `X = P (N + D_re + D_im) P⁻¹` with commuting blocks.
fn structured(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, [DMatrix<f64>; 3]) {
    let mut nil = DMatrix::zeros(n, n);
    let mut hyp = DMatrix::zeros(n, n);
    let mut ell = DMatrix::zeros(n, n);
    // blocks: a 2x2 rotation-plus-real block, then a Jordan block of equal
    // real eigenvalues, then a trailing scalar fixing the trace
    let mut i = 0;
    let mut trace = 0.0;
    if n >= 4 {
        let a = rng.random_range(-2..=2) as f64;
        let b = rng.random_range(1..=2) as f64;
        hyp[(0, 0)] = a;
        hyp[(1, 1)] = a;
        ell[(0, 1)] = b;
        ell[(1, 0)] = -b;
        trace += 2.0 * a;
        i = 2;
    }
    let size = n - i - 1;
    let lam = rng.random_range(-2..=2) as f64;
    for k in 0..size {
        hyp[(i + k, i + k)] = lam;
        if k + 1 < size {
            nil[(i + k, i + k + 1)] = rng.random_range(1..=2) as f64;
        }
    }
    trace += lam * size as f64;
    hyp[(n - 1, n - 1)] = -trace;
    let p = random_unimodular(rng, n);
    let r = |m: DMatrix<f64>| m.map(f64::round);
    let parts = [r(conj(&p, &nil)), r(conj(&p, &hyp)), r(conj(&p, &ell))];
    let x = &parts[0] + &parts[1] + &parts[2];
    (x, parts)
}

#[test]
fn split_recovers_constructed_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in 3..=5 {
        for trial in 0..20 {
            let (x, want) = structured(&mut rng, n);
            for scale in [1.0, 0.37] {
                let xe = AlgebraElement::new(&x * scale).unwrap();
                let s = jordan_split(&xe, TOL).unwrap();
                let got = [&s.nilpotent, &s.hyperbolic, &s.elliptic];
                for (g, w) in got.iter().zip(&want) {
                    let err = (g.matrix() - w * scale).norm();
                    assert!(err <= 1e-6 * xe.norm(), "n={n} trial={trial} scale={scale} err={err}");
                }
            }
        }
    }
}

fn check_split(x: &AlgebraElement) {
    let s = jordan_split(x, TOL).unwrap();
    let sum = s.nilpotent.add(&s.hyperbolic).add(&s.elliptic);
    let nx = x.norm();
    assert!(x.sub(&sum).norm() <= 1e-8 * nx);
    for (a, b) in [(&s.nilpotent, &s.hyperbolic), (&s.nilpotent, &s.elliptic), (&s.hyperbolic, &s.elliptic)] {
        assert!(a.bracket(b).norm() <= 1e-8 * nx * nx);
    }
    for z in eigenvalues(s.nilpotent.matrix()).unwrap() {
        assert!(z.norm() <= 1e-4 * nx, "nil eigenvalue {z}");
    }
    for z in eigenvalues(s.hyperbolic.matrix()).unwrap() {
        assert!(z.im.abs() <= 1e-6 * nx);
    }
    for z in eigenvalues(s.elliptic.matrix()).unwrap() {
        assert!(z.re.abs() <= 1e-6 * nx);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn split_invariants_on_random_inputs(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        check_split(&random_sl(&mut rng, n, 3.0));
    }

    #[test]
    fn split_invariants_on_structured_inputs(seed in any::<u64>(), n in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, _) = structured(&mut rng, n);
        check_split(&AlgebraElement::new(x * 0.61).unwrap());
    }
}

fn geometric_grid(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64)).collect()
}

#[test]
fn slope_equals_nilpotency_degree() {
    let grid = geometric_grid(1e2, 1e4, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = vec![
        AlgebraElement::unit(2, 0, 1),
        AlgebraElement::unit(3, 0, 2),
        AlgebraElement::principal_nilpotent(3),
        AlgebraElement::principal_nilpotent(3).scale(2.0),
        AlgebraElement::principal_nilpotent(4),
    ];
    for n in 2..=4 {
        let p = random_unimodular(&mut rng, n);
        cases.push(AlgebraElement::new(conj(&p, AlgebraElement::principal_nilpotent(n).matrix())).unwrap());
    }
    for x in cases {
        let l = nilpotency_degree(&ad_matrix(&x), TOL).unwrap() as f64;
        let slope = log_log_slope(&lambda1_profile(&x, &grid).unwrap());
        assert!((slope - l).abs() < 0.05, "l={l} slope={slope}");
    }
}

#[test]
fn hs_norm_grows_like_t_squared_for_e12() {
    let x = AlgebraElement::unit(2, 0, 1);
    let pts: Vec<(f64, f64)> = geometric_grid(1e2, 1e4, 7)
        .into_iter()
        .map(|t| (t.ln(), hs_norm(&adjoint_exp(&x, t)).ln()))
        .collect();
    assert!((least_squares_slope(&pts) - 2.0).abs() < 0.05);
}

#[test]
fn diagonalizable_growth_ratio_stabilizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 2..=4 {
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { i as f64 - (n - 1) as f64 / 2.0 } else { 0.0 });
        let p = random_unimodular(&mut rng, n);
        let x = AlgebraElement::new(conj(&p, &d)).unwrap();
        let x = AlgebraElement::new(x.matrix().map(f64::round)).unwrap();
        let prof = lambda1_profile(&x, &[100.0, 1000.0]).unwrap();
        let (r1, r2) = (prof[0].1 / 100.0, prof[1].1 / 1000.0);
        assert!(r1 > 0.0 && ((r1 - r2) / r2).abs() < 0.01, "{r1} {r2}");
    }
}

#[test]
fn large_t_does_not_overflow() {
    let h = AlgebraElement::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
    let prof = lambda1_profile(&h, &[1e3, 1e5]).unwrap();
    assert!((prof[1].1 - 2e5).abs() < 1e-6 * 2e5);
}
