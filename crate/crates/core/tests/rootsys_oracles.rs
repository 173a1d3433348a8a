//! Root-system properties checked against independent oracles.

use homflow_core::rootsys::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Membership by height descent: a nonnegative vector is a root iff simple
/// reflections with positive pairing bring it down to a simple root while
/// staying nonnegative.
fn is_root_by_descent(rs: &RootSystem, v: &[i32]) -> bool {
    let n = v.len();
    let mut v = v.to_vec();
    loop {
        if v.iter().any(|&c| c < 0) || v.iter().all(|&c| c == 0) {
            return false;
        }
        if v.iter().sum::<i32>() == 1 {
            return true;
        }
        let root = Root::new(v.clone());
        let step = (0..n).find(|&i| rs.inner(&root, &Root::simple(n, i)) > 0);
        let Some(i) = step else { return false };
        let pairing: i32 = (0..n).map(|j| v[j] * rs.cartan_matrix()[i][j]).sum();
        v[i] -= pairing;
    }
}

fn all_sos(rs: &RootSystem) -> Vec<Vec<Root>> {
    let roots = rs.positive_roots();
    let mut out = Vec::new();
    fn rec(rs: &RootSystem, roots: &[Root], start: usize, cur: &mut Vec<Root>, out: &mut Vec<Vec<Root>>) {
        out.push(cur.clone());
        for i in start..roots.len() {
            if cur.iter().all(|c| strongly_orthogonal(rs, c, &roots[i])) {
                cur.push(roots[i].clone());
                rec(rs, roots, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(rs, roots, 0, &mut Vec::new(), &mut out);
    out
}

fn rho(rank: usize, roots: &[Root]) -> WeightVector {
    let mut acc = vec![0i64; rank];
    for r in roots {
        for (a, &c) in acc.iter_mut().zip(r.coeffs()) {
            *a += c as i64;
        }
    }
    WeightVector::new(acc.into_iter().map(Rational::from_integer).collect())
}

#[test]
fn counts_match_classical_formulas_up_to_rank_8() {
    for (t, n) in RootType::all_up_to(8) {
        let rs = build_root_system(t, n).unwrap();
        assert_eq!(
            rs.positive_roots().len(),
            classical_positive_root_count(t, n).unwrap(),
            "{t}{n}"
        );
        for s in rs.simple_roots() {
            assert!(rs.positive_roots().contains(&s));
        }
        for r in rs.positive_roots() {
            assert!(is_root_by_descent(&rs, r.coeffs()), "{t}{n}: {r}");
        }
    }
}

#[test]
fn exhaustive_membership_up_to_rank_4() {
    for (t, n) in RootType::all_up_to(4) {
        let rs = build_root_system(t, n).unwrap();
        let top = rs.highest_root();
        let bound: Vec<i32> = top.coeffs().iter().map(|c| c + 1).collect();
        let mut v = vec![0i32; n];
        loop {
            let listed = rs.positive_roots().iter().any(|r| r.coeffs() == v.as_slice());
            assert_eq!(listed, is_root_by_descent(&rs, &v), "{t}{n}: {v:?}");
            let mut k = 0;
            while k < n {
                v[k] += 1;
                if v[k] <= bound[k] {
                    break;
                }
                v[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
}

#[test]
fn positive_roots_sorted_by_height_then_lex() {
    let rs = build_root_system(RootType::E, 7).unwrap();
    for w in rs.positive_roots().windows(2) {
        assert!((w[0].height(), &w[0]) < (w[1].height(), &w[1]));
    }
}

#[test]
fn highest_root_dominates_every_positive_root() {
    for (t, n) in RootType::all_up_to(8) {
        let rs = build_root_system(t, n).unwrap();
        let top = rs.highest_root();
        assert!(rs.positive_roots().iter().all(|r| top.dominates(r)), "{t}{n}");
    }
}

#[test]
fn maximal_system_dominates_every_system_up_to_rank_4() {
    for (t, n) in RootType::all_up_to(4) {
        let rs = build_root_system(t, n).unwrap();
        let best = rho_of(n, &maximal_strongly_orthogonal_system(&rs));
        let cascade = rho_of(n, &kostant_cascade(&rs));
        assert!(dominates_on_chamber(&best, &cascade).unwrap());
        for sos in all_sos(&rs) {
            assert!(dominates_on_chamber(&best, &rho(n, &sos)).unwrap(), "{t}{n}: {sos:?}");
        }
    }
}

#[test]
fn b2_exhaustive_search_matches_cascade() {
    let rs = build_root_system(RootType::B, 2).unwrap();
    let best = all_sos(&rs)
        .into_iter()
        .max_by_key(|s| s.iter().map(|r| r.height()).sum::<i32>())
        .unwrap();
    assert_eq!(rho(2, &best), rho_of(2, &kostant_cascade(&rs)));
}

#[test]
fn cascade_is_strongly_orthogonal_everywhere() {
    for (t, n) in RootType::all_up_to(8) {
        let rs = build_root_system(t, n).unwrap();
        let c = kostant_cascade(&rs);
        assert!(StrongOrthSystem::new(&rs, c.roots().to_vec()).is_ok());
        assert!(c.len() <= n);
    }
}

#[test]
fn maximal_system_beats_random_greedy_systems_rank_5_to_8() {
    for (t, n) in RootType::all_up_to(8).into_iter().filter(|(_, n)| *n >= 5) {
        let rs = build_root_system(t, n).unwrap();
        let best = rho_of(n, &maximal_strongly_orthogonal_system(&rs));
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut roots = rs.positive_roots().to_vec();
        for _ in 0..1000 {
            roots.shuffle(&mut rng);
            let mut chosen: Vec<Root> = Vec::new();
            for r in &roots {
                if chosen.iter().all(|c| strongly_orthogonal(&rs, c, r)) {
                    chosen.push(r.clone());
                }
            }
            assert!(dominates_on_chamber(&best, &rho(n, &chosen)).unwrap(), "{t}{n}");
        }
    }
}

#[test]
fn good_type_agrees_with_xi_dominance() {
    for (t, n) in RootType::all_up_to(8) {
        let rs = build_root_system(t, n).unwrap();
        let lam = WeightVector::from(&rs.highest_root());
        let dom = dominates_on_chamber(&xi(&rs), &lam).unwrap();
        assert_eq!(dom, good_type(t, n).unwrap(), "{t}{n}");
    }
}

fn weight(v: &[i64]) -> WeightVector {
    WeightVector::new(v.iter().map(|&x| Rational::new(x, 2)).collect())
}

proptest! {
    #[test]
    fn dominance_is_a_partial_order(
        a in proptest::collection::vec(-4i64..4, 3),
        b in proptest::collection::vec(-4i64..4, 3),
        c in proptest::collection::vec(-4i64..4, 3),
    ) {
        let (a, b, c) = (weight(&a), weight(&b), weight(&c));
        prop_assert!(dominates_on_chamber(&a, &a).unwrap());
        if dominates_on_chamber(&a, &b).unwrap() && dominates_on_chamber(&b, &a).unwrap() {
            prop_assert_eq!(&a, &b);
        }
        if dominates_on_chamber(&a, &b).unwrap() && dominates_on_chamber(&b, &c).unwrap() {
            prop_assert!(dominates_on_chamber(&a, &c).unwrap());
        }
    }
}
