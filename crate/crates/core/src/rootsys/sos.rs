//! Strongly orthogonal systems, the maximal system `Q(Φ)` and `ξ`.

use std::collections::BTreeSet;

use super::{highest_of, Rational, Root, RootSystem, RootType, WeightVector};
use crate::error::{Error, Result};

/// A set of pairwise strongly orthogonal positive roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongOrthSystem {
    roots: Vec<Root>,
}

impl StrongOrthSystem {
    /// Validates pairwise strong orthogonality inside `rs`.
    pub fn new(rs: &RootSystem, roots: impl IntoIterator<Item = Root>) -> Result<Self> {
        let set: BTreeSet<Root> = roots.into_iter().collect();
        let roots: Vec<Root> = set.into_iter().collect();
        for r in &roots {
            if !rs.is_root(r) {
                return Err(Error::InvalidRootSystem(format!("{r} is not a root")));
            }
        }
        for (i, a) in roots.iter().enumerate() {
            for b in &roots[i + 1..] {
                if !strongly_orthogonal(rs, a, b) {
                    return Err(Error::InvalidRootSystem(format!(
                        "{a} and {b} are not strongly orthogonal"
                    )));
                }
            }
        }
        Ok(StrongOrthSystem { roots })
    }

    pub fn empty() -> Self {
        StrongOrthSystem { roots: Vec::new() }
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Neither `a + b` nor `a - b` is a root. A root is never strongly
/// orthogonal to itself.
pub fn strongly_orthogonal(rs: &RootSystem, a: &Root, b: &Root) -> bool {
    if a == b {
        return false;
    }
    !rs.is_root(&a.add(b)) && !rs.is_root(&a.sub(b))
}

/// `ϱ(𝒪)`, the coefficientwise sum of the system.
pub fn rho_of(rank: usize, sos: &StrongOrthSystem) -> WeightVector {
    let mut acc = vec![0i64; rank];
    for r in sos.roots() {
        for (a, &c) in acc.iter_mut().zip(r.coeffs()) {
            *a += c as i64;
        }
    }
    WeightVector::new(acc.into_iter().map(Rational::from_integer).collect())
}

/// The classical cascade: take the highest root, keep the roots strongly
/// orthogonal to it, and recurse on each irreducible component.
///
/// The result is a maximal-cardinality strongly orthogonal system, but its
/// `ϱ` is not coefficientwise maximal in every type (it falls short in
/// `B_n` for `n >= 3`, `D_n` and `F_4`); use
/// [`maximal_strongly_orthogonal_system`] for `Q(Φ)`.
pub fn kostant_cascade(rs: &RootSystem) -> StrongOrthSystem {
    let mut out = Vec::new();
    cascade_into(rs, rs.positive_roots(), &mut out);
    StrongOrthSystem::new(rs, out).expect("cascade output is strongly orthogonal")
}

fn cascade_into(rs: &RootSystem, roots: &[Root], out: &mut Vec<Root>) {
    for comp in rs.components(roots) {
        let top = highest_of(&comp).expect("irreducible components have a highest root");
        let rest: Vec<Root> = comp
            .iter()
            .filter(|r| strongly_orthogonal(rs, &top, r))
            .cloned()
            .collect();
        out.push(top);
        cascade_into(rs, &rest, out);
    }
}

/// `Q(Φ)`: the strongly orthogonal system whose `ϱ` dominates `ϱ(𝒪)`
/// coefficientwise for every strongly orthogonal `𝒪`.
///
/// Computed by branch and bound on the total height of `ϱ`. When a
/// coefficientwise maximum exists, every height maximizer attains it, so the
/// search returns `Q(Φ)`. Strongly orthogonal roots are orthogonal, hence
/// linearly independent, which caps the system size at the rank.
pub fn maximal_strongly_orthogonal_system(rs: &RootSystem) -> StrongOrthSystem {
    let mut roots: Vec<Root> = rs.positive_roots().to_vec();
    roots.sort_by(|a, b| (b.height(), b).cmp(&(a.height(), a)));
    let n = roots.len();
    assert!(n <= 128, "positive roots must fit a 128-bit mask");

    let heights: Vec<i64> = roots.iter().map(|r| r.height() as i64).collect();
    let adj: Vec<u128> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| strongly_orthogonal(rs, &roots[i], &roots[j]))
                .fold(0u128, |m, j| m | (1u128 << j))
        })
        .collect();

    let mut search = MaxSearch {
        heights: &heights,
        adj: &adj,
        cap: rs.rank(),
        best: -1,
        best_set: 0,
    };
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    search.run(0, 0, 0, all);

    let chosen = (0..n)
        .filter(|&i| search.best_set & (1u128 << i) != 0)
        .map(|i| roots[i].clone());
    StrongOrthSystem::new(rs, chosen).expect("search only combines strongly orthogonal roots")
}

struct MaxSearch<'a> {
    heights: &'a [i64],
    adj: &'a [u128],
    cap: usize,
    best: i64,
    best_set: u128,
}

impl MaxSearch<'_> {
    fn run(&mut self, chosen: u128, size: usize, total: i64, cand: u128) {
        if cand == 0 || size == self.cap {
            if total > self.best {
                self.best = total;
                self.best_set = chosen;
            }
            return;
        }
        // Candidates are ordered by decreasing height, so the first free
        // slots give an upper bound.
        let mut bound = total;
        let mut bits = cand;
        for _ in size..self.cap {
            if bits == 0 {
                break;
            }
            let i = bits.trailing_zeros() as usize;
            bound += self.heights[i];
            bits &= bits - 1;
        }
        if bound <= self.best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let rest = cand & !(1u128 << v);
        self.run(
            chosen | (1u128 << v),
            size + 1,
            total + self.heights[v],
            rest & self.adj[v],
        );
        self.run(chosen, size, total, rest);
    }
}

/// `ξ = ½ ϱ(Q(Φ))`.
pub fn xi(rs: &RootSystem) -> WeightVector {
    rho_of(rs.rank(), &maximal_strongly_orthogonal_system(rs)).scale(Rational::new(1, 2))
}

/// `f(X) >= g(X)` on the closed positive chamber, i.e. `f - g` is a
/// nonnegative combination of simple roots.
pub fn dominates_on_chamber(f: &WeightVector, g: &WeightVector) -> Result<bool> {
    let diff = f.sub(g)?;
    Ok(diff.coeffs().iter().all(|c| *c >= Rational::from_integer(0)))
}

/// Restricted root types for which every unbounded one-parameter flow has
/// summable decay: `B_n (n >= 4)`, `D_n (n >= 4)`, `E_6`, `E_7`, `E_8`, `F_4`.
pub fn good_type(label: RootType, rank: usize) -> Result<bool> {
    label.validate_rank(rank)?;
    Ok(match label {
        RootType::B | RootType::D => rank >= 4,
        RootType::E | RootType::F => true,
        RootType::A | RootType::C | RootType::G => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::build_root_system;

    fn r(v: &[i32]) -> Root {
        Root::new(v.to_vec())
    }

    fn ints(w: &WeightVector) -> Vec<Rational> {
        w.coeffs().to_vec()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn strong_orthogonality_examples() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        assert!(!strongly_orthogonal(&a2, &r(&[1, 0]), &r(&[0, 1])));
        let a3 = build_root_system(RootType::A, 3).unwrap();
        assert!(strongly_orthogonal(&a3, &r(&[1, 0, 0]), &r(&[0, 0, 1])));
        for root in a3.positive_roots() {
            assert!(!strongly_orthogonal(&a3, root, root));
        }
    }

    #[test]
    fn cascade_small_cases() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        assert_eq!(kostant_cascade(&a2).roots(), &[r(&[1, 1])]);
        let a1 = build_root_system(RootType::A, 1).unwrap();
        assert_eq!(kostant_cascade(&a1).roots(), &[r(&[1])]);
        let b2 = build_root_system(RootType::B, 2).unwrap();
        let c = kostant_cascade(&b2);
        assert_eq!(c.roots(), &[r(&[1, 0]), r(&[1, 2])]);
        assert_eq!(ints(&rho_of(2, &c)), vec![q(2, 1), q(2, 1)]);
    }

    #[test]
    fn cascade_falls_short_in_b4() {
        // {e1±e2, e3±e4} from the cascade versus {e1±e3, e2±e4}.
        let b4 = build_root_system(RootType::B, 4).unwrap();
        let cascade = rho_of(4, &kostant_cascade(&b4));
        let maximal = rho_of(4, &maximal_strongly_orthogonal_system(&b4));
        assert!(dominates_on_chamber(&maximal, &cascade).unwrap());
        assert!(!dominates_on_chamber(&cascade, &maximal).unwrap());
    }

    #[test]
    fn rho_and_xi_examples() {
        assert_eq!(rho_of(3, &StrongOrthSystem::empty()), WeightVector::zero(3));
        let a2 = build_root_system(RootType::A, 2).unwrap();
        assert_eq!(ints(&rho_of(2, &kostant_cascade(&a2))), vec![q(1, 1), q(1, 1)]);
        assert_eq!(ints(&xi(&a2)), vec![q(1, 2), q(1, 2)]);
        let a1 = build_root_system(RootType::A, 1).unwrap();
        assert_eq!(ints(&xi(&a1)), vec![q(1, 2)]);
        let b2 = build_root_system(RootType::B, 2).unwrap();
        assert_eq!(ints(&xi(&b2)), vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn f4_xi_dominates_highest_root() {
        let f4 = build_root_system(RootType::F, 4).unwrap();
        let lam = WeightVector::from(&f4.highest_root());
        assert!(dominates_on_chamber(&xi(&f4), &lam).unwrap());
    }

    #[test]
    fn a2_xi_does_not_dominate() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        let lam = WeightVector::from(&a2.highest_root());
        let diff = xi(&a2).sub(&lam).unwrap();
        assert_eq!(ints(&diff), vec![q(-1, 2), q(-1, 2)]);
        assert!(!dominates_on_chamber(&xi(&a2), &lam).unwrap());
    }

    #[test]
    fn dominance_rank_mismatch() {
        let err = dominates_on_chamber(&WeightVector::zero(2), &WeightVector::zero(3)).unwrap_err();
        assert_eq!(err, Error::RankMismatch { left: 2, right: 3 });
    }

    #[test]
    fn good_type_list() {
        assert!(good_type(RootType::B, 4).unwrap());
        assert!(!good_type(RootType::B, 3).unwrap());
        assert!(!good_type(RootType::A, 2).unwrap());
        assert!(good_type(RootType::F, 4).unwrap());
        assert!(good_type(RootType::E, 6).unwrap());
        assert!(!good_type(RootType::C, 5).unwrap());
        assert!(good_type(RootType::G, 3).is_err());
    }

    #[test]
    fn new_rejects_non_orthogonal_pairs() {
        let a2 = build_root_system(RootType::A, 2).unwrap();
        assert!(StrongOrthSystem::new(&a2, [r(&[1, 0]), r(&[0, 1])]).is_err());
        assert!(StrongOrthSystem::new(&a2, [r(&[2, 0])]).is_err());
    }
}
