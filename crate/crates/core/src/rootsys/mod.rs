//! Reduced root systems in the simple-root basis.
//!
//! Every root is stored as an integer coefficient vector over the simple
//! roots, so dominance, sums of roots and membership tests are exact.
//!
//! Simple roots follow Bourbaki numbering:
//!
//! | type | diagram | notes |
//! |------|---------|-------|
//! | `A_n` | `1 - 2 - ... - n` | simply laced |
//! | `B_n` | `1 - ... - (n-1) => n` | `α_n` short |
//! | `C_n` | `1 - ... - (n-1) <= n` | `α_n` long |
//! | `D_n` | `1 - ... - (n-2) - {n-1, n}` | fork at `n-2` |
//! | `E_n` | `1 - 3 - 4 - 5 - ... - n`, `2 - 4` | `n ∈ {6,7,8}` |
//! | `F_4` | `1 - 2 => 3 - 4` | `α_1, α_2` long |
//! | `G_2` | `1 <= 2` | `α_1` short |
//!
//! The Cartan matrix entry `a[i][j]` is `⟨α_j, α_i^∨⟩ = 2(α_i, α_j)/(α_i, α_i)`,
//! so the simple reflection is `s_i(v) = v - (Σ_j v_j a[i][j]) α_i`.

mod sos;

pub use sos::{
    dominates_on_chamber, good_type, kostant_cascade, maximal_strongly_orthogonal_system, rho_of,
    strongly_orthogonal, xi, StrongOrthSystem,
};

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for weight coefficients.
pub type Rational = Ratio<i64>;

/// Cartan type of an irreducible reduced root system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl RootType {
    pub const ALL: [RootType; 7] = [
        RootType::A,
        RootType::B,
        RootType::C,
        RootType::D,
        RootType::E,
        RootType::F,
        RootType::G,
    ];

    /// Checks that `(self, rank)` names an irreducible system, without
    /// duplicating low-rank coincidences (`B_2 = C_2`, `D_3 = A_3`).
    pub fn validate_rank(self, rank: usize) -> Result<()> {
        let ok = match self {
            RootType::A => rank >= 1,
            RootType::B => rank >= 2,
            RootType::C => rank >= 3,
            RootType::D => rank >= 4,
            RootType::E => (6..=8).contains(&rank),
            RootType::F => rank == 4,
            RootType::G => rank == 2,
        };
        if ok {
            Ok(())
        } else {
            let allowed = match self {
                RootType::A => "n >= 1",
                RootType::B => "n >= 2",
                RootType::C => "n >= 3",
                RootType::D => "n >= 4",
                RootType::E => "n in {6, 7, 8}",
                RootType::F => "n = 4",
                RootType::G => "n = 2",
            };
            Err(Error::InvalidRootSystem(format!(
                "type {self} does not exist in rank {rank} (allowed: {allowed})"
            )))
        }
    }

    /// Every valid `(type, rank)` pair with `rank <= max_rank`.
    pub fn all_up_to(max_rank: usize) -> Vec<(RootType, usize)> {
        let mut out = Vec::new();
        for t in RootType::ALL {
            for n in 1..=max_rank {
                if t.validate_rank(n).is_ok() {
                    out.push((t, n));
                }
            }
        }
        out
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RootType::A => "A",
            RootType::B => "B",
            RootType::C => "C",
            RootType::D => "D",
            RootType::E => "E",
            RootType::F => "F",
            RootType::G => "G",
        };
        f.write_str(s)
    }
}

impl FromStr for RootType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(RootType::A),
            "B" => Ok(RootType::B),
            "C" => Ok(RootType::C),
            "D" => Ok(RootType::D),
            "E" => Ok(RootType::E),
            "F" => Ok(RootType::F),
            "G" => Ok(RootType::G),
            "BC" => Err(Error::InvalidRootSystem(
                "type BC is non-reduced; only reduced systems are supported".into(),
            )),
            other => Err(Error::InvalidRootSystem(format!(
                "unknown root system type {other:?} (expected one of A, B, C, D, E, F, G)"
            ))),
        }
    }
}

/// A root, as integer coefficients over the simple roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Root(Vec<i32>);

impl Root {
    pub fn new(coeffs: Vec<i32>) -> Self {
        Root(coeffs)
    }

    pub fn simple(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Root(v)
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn height(&self) -> i32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.0.iter().all(|&c| c >= 0)
    }

    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self - other` has no negative coefficient.
    pub fn dominates(&self, other: &Root) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(if c > 0 { "+" } else { "-" })?;
            } else if c < 0 {
                f.write_str("-")?;
            }
            first = false;
            if c.abs() != 1 {
                write!(f, "{}", c.abs())?;
            }
            write!(f, "a{}", i + 1)?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Rational coefficient vector over the simple roots.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(Vec<Rational>);

impl WeightVector {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        WeightVector(coeffs)
    }

    pub fn zero(rank: usize) -> Self {
        WeightVector(vec![Rational::from_integer(0); rank])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn scale(&self, k: Rational) -> WeightVector {
        WeightVector(self.0.iter().map(|c| c * k).collect())
    }

    pub fn sub(&self, other: &WeightVector) -> Result<WeightVector> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                left: self.rank(),
                right: other.rank(),
            });
        }
        Ok(WeightVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Coefficients rendered as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.to_string()).collect()
    }
}

impl From<&Root> for WeightVector {
    fn from(r: &Root) -> Self {
        WeightVector(
            r.coeffs()
                .iter()
                .map(|&c| Rational::from_integer(c as i64))
                .collect(),
        )
    }
}

/// An irreducible reduced root system with its positive roots.
#[derive(Clone, Debug)]
pub struct RootSystem {
    label: RootType,
    rank: usize,
    cartan: Vec<Vec<i32>>,
    /// `(α_i, α_i) / 2`, scaled to coprime positive integers.
    half_norms: Vec<i64>,
    positive_roots: Vec<Root>,
    members: HashSet<Root>,
}

/// JSON shape: `{"type":"F","rank":4,"positive_roots":[[...],...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSystemJson {
    #[serde(rename = "type")]
    pub type_label: RootType,
    pub rank: usize,
    pub positive_roots: Vec<Root>,
}

/// Bourbaki Cartan matrix, `a[i][j] = ⟨α_j, α_i^∨⟩`.
pub fn cartan_matrix(label: RootType, rank: usize) -> Result<Vec<Vec<i32>>> {
    label.validate_rank(rank)?;
    let n = rank;
    let mut a = vec![vec![0i32; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match label {
        RootType::A | RootType::B | RootType::C => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
        }
        RootType::D => {
            for i in 0..n - 2 {
                link(i, i + 1);
            }
            link(n - 3, n - 1);
        }
        RootType::E => {
            link(0, 2);
            link(2, 3);
            link(1, 3);
            for i in 3..n - 1 {
                link(i, i + 1);
            }
        }
        RootType::F => {
            link(0, 1);
            link(1, 2);
            link(2, 3);
        }
        RootType::G => link(0, 1),
    }
    match label {
        // α_n short: ⟨α_{n-1}, α_n^∨⟩ = -2
        RootType::B => a[n - 1][n - 2] = -2,
        // α_n long
        RootType::C => a[n - 2][n - 1] = -2,
        // α_3 short, α_2 long
        RootType::F => a[2][1] = -2,
        // α_1 short
        RootType::G => a[0][1] = -3,
        _ => {}
    }
    Ok(a)
}

/// Symmetrizer `d` with `d_i a[i][j] = d_j a[j][i]`, as coprime integers.
fn symmetrizer(cartan: &[Vec<i32>]) -> Vec<i64> {
    let n = cartan.len();
    let mut d: Vec<Option<Rational>> = vec![None; n];
    d[0] = Some(Rational::from_integer(1));
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let di = d[i].expect("queued nodes are assigned");
        for j in 0..n {
            if i != j && cartan[i][j] != 0 && d[j].is_none() {
                d[j] = Some(di * Rational::from_integer(cartan[i][j] as i64)
                    / Rational::from_integer(cartan[j][i] as i64));
                queue.push_back(j);
            }
        }
    }
    let d: Vec<Rational> = d.into_iter().map(|x| x.expect("diagram is connected")).collect();
    let lcm = d
        .iter()
        .fold(1i64, |acc, x| num_integer_lcm(acc, *x.denom()));
    let ints: Vec<i64> = d.iter().map(|x| (x * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, &x| num_integer_gcd(acc, x));
    ints.into_iter().map(|x| x / g).collect()
}

fn num_integer_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_integer_gcd(b, a % b)
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    a / num_integer_gcd(a, b) * b
}

/// Builds the positive system of `(label, rank)` by closing the simple
/// roots under simple reflections that keep them positive.
pub fn build_root_system(label: RootType, rank: usize) -> Result<RootSystem> {
    let cartan = cartan_matrix(label, rank)?;
    let half_norms = symmetrizer(&cartan);

    let mut members: HashSet<Root> = HashSet::new();
    let mut queue: VecDeque<Root> = VecDeque::new();
    for i in 0..rank {
        let r = Root::simple(rank, i);
        members.insert(r.clone());
        queue.push_back(r);
    }
    while let Some(v) = queue.pop_front() {
        for (i, row) in cartan.iter().enumerate() {
            let pairing: i32 = v.coeffs().iter().zip(row).map(|(c, a)| c * a).sum();
            if pairing == 0 {
                continue;
            }
            let mut w = v.coeffs().to_vec();
            w[i] -= pairing;
            let w = Root(w);
            if w.is_positive() && !members.contains(&w) {
                members.insert(w.clone());
                queue.push_back(w);
            }
        }
    }

    let mut positive_roots: Vec<Root> = members.iter().cloned().collect();
    positive_roots.sort_by(|a, b| (a.height(), a).cmp(&(b.height(), b)));

    Ok(RootSystem {
        label,
        rank,
        cartan,
        half_norms,
        positive_roots,
        members,
    })
}

impl RootSystem {
    pub fn type_label(&self) -> RootType {
        self.label
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cartan_matrix(&self) -> &[Vec<i32>] {
        &self.cartan
    }

    /// Positive roots, sorted by height and then lexicographically.
    pub fn positive_roots(&self) -> &[Root] {
        &self.positive_roots
    }

    pub fn simple_roots(&self) -> Vec<Root> {
        (0..self.rank).map(|i| Root::simple(self.rank, i)).collect()
    }

    /// Whether `v` is a root (of either sign).
    pub fn is_root(&self, v: &Root) -> bool {
        if v.rank() != self.rank || v.is_zero() {
            return false;
        }
        if v.coeffs().iter().all(|&c| c >= 0) {
            self.members.contains(v)
        } else if v.coeffs().iter().all(|&c| c <= 0) {
            self.members.contains(&v.neg())
        } else {
            false
        }
    }

    /// Invariant inner product, normalized so that the shortest simple root
    /// has `(α, α) = 2`.
    pub fn inner(&self, a: &Root, b: &Root) -> i64 {
        let mut s = 0i64;
        for (i, &ai) in a.coeffs().iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.coeffs().iter().enumerate() {
                if bj != 0 {
                    s += ai as i64 * bj as i64 * self.half_norms[i] * self.cartan[i][j] as i64;
                }
            }
        }
        s
    }

    /// The highest root: the unique positive root dominating every other
    /// coefficientwise.
    pub fn highest_root(&self) -> Root {
        highest_of(&self.positive_roots)
            .expect("irreducible systems built by build_root_system have a highest root")
    }

    pub fn to_json(&self) -> RootSystemJson {
        RootSystemJson {
            type_label: self.label,
            rank: self.rank,
            positive_roots: self.positive_roots.clone(),
        }
    }

    /// Splits a set of roots into classes connected by non-orthogonality.
    pub fn components(&self, roots: &[Root]) -> Vec<Vec<Root>> {
        let n = roots.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                for j in 0..n {
                    if !seen[j] && self.inner(&roots[i], &roots[j]) != 0 {
                        seen[j] = true;
                        comp.push(j);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp.into_iter().map(|i| roots[i].clone()).collect());
        }
        out
    }
}

/// The highest root of the positive system, from the pair `(label, rank)`.
pub fn highest_root(rs: &RootSystem) -> Root {
    rs.highest_root()
}

/// The element of `roots` dominating all others coefficientwise.
///
/// Fails when no such element exists, which is the case for reducible sets.
pub fn highest_of(roots: &[Root]) -> Result<Root> {
    let candidate = roots
        .iter()
        .max_by_key(|r| r.height())
        .ok_or_else(|| Error::Reducible("empty root set has no highest root".into()))?;
    if roots.iter().all(|r| candidate.dominates(r)) {
        Ok(candidate.clone())
    } else {
        Err(Error::Reducible(
            "no root dominates every other root coefficientwise".into(),
        ))
    }
}

/// Number of positive roots by the classical formulas.
pub fn classical_positive_root_count(label: RootType, rank: usize) -> Result<usize> {
    label.validate_rank(rank)?;
    let n = rank;
    Ok(match label {
        RootType::A => n * (n + 1) / 2,
        RootType::B | RootType::C => n * n,
        RootType::D => n * (n - 1),
        RootType::E => match n {
            6 => 36,
            7 => 63,
            _ => 120,
        },
        RootType::F => 24,
        RootType::G => 6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots_of(label: RootType, rank: usize) -> Vec<Vec<i32>> {
        build_root_system(label, rank)
            .unwrap()
            .positive_roots()
            .iter()
            .map(|r| r.coeffs().to_vec())
            .collect()
    }

    #[test]
    fn a2_has_three_positive_roots() {
        assert_eq!(roots_of(RootType::A, 2), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn a1_is_a_single_root() {
        assert_eq!(roots_of(RootType::A, 1), vec![vec![1]]);
    }

    #[test]
    fn g2_has_six_positive_roots() {
        let roots = roots_of(RootType::G, 2);
        assert_eq!(roots.len(), 6);
        assert_eq!(roots.last().unwrap(), &vec![3, 2]);
    }

    #[test]
    fn highest_roots_match_bourbaki() {
        let cases: &[(RootType, usize, &[i32])] = &[
            (RootType::A, 1, &[1]),
            (RootType::A, 2, &[1, 1]),
            (RootType::B, 3, &[1, 2, 2]),
            (RootType::C, 3, &[2, 2, 1]),
            (RootType::D, 5, &[1, 2, 2, 1, 1]),
            (RootType::E, 6, &[1, 2, 2, 3, 2, 1]),
            (RootType::E, 8, &[2, 3, 4, 6, 5, 4, 3, 2]),
            (RootType::F, 4, &[2, 3, 4, 2]),
            (RootType::G, 2, &[3, 2]),
        ];
        for (t, n, expect) in cases {
            let rs = build_root_system(*t, *n).unwrap();
            assert_eq!(rs.highest_root().coeffs(), *expect, "{t}{n}");
        }
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        for (t, n) in [
            (RootType::B, 1),
            (RootType::C, 2),
            (RootType::D, 3),
            (RootType::E, 5),
            (RootType::E, 9),
            (RootType::F, 3),
            (RootType::G, 3),
            (RootType::A, 0),
        ] {
            let err = build_root_system(t, n).unwrap_err();
            assert!(matches!(err, Error::InvalidRootSystem(_)), "{t}{n}");
        }
    }

    #[test]
    fn bc_is_rejected_as_non_reduced() {
        let err = "BC".parse::<RootType>().unwrap_err();
        assert!(err.to_string().contains("non-reduced"));
        assert!("Q".parse::<RootType>().is_err());
    }

    #[test]
    fn symmetrized_form_gives_expected_lengths() {
        let rs = build_root_system(RootType::B, 3).unwrap();
        let long = Root::simple(3, 0);
        let short = Root::simple(3, 2);
        assert_eq!(rs.inner(&long, &long), 2 * rs.inner(&short, &short));
        let g2 = build_root_system(RootType::G, 2).unwrap();
        let (a1, a2) = (Root::simple(2, 0), Root::simple(2, 1));
        assert_eq!(g2.inner(&a2, &a2), 3 * g2.inner(&a1, &a1));
    }

    #[test]
    fn highest_of_rejects_reducible_sets() {
        let set = vec![Root::new(vec![1, 0, 0]), Root::new(vec![0, 0, 1])];
        assert!(matches!(highest_of(&set), Err(Error::Reducible(_))));
    }

    #[test]
    fn json_shape() {
        let rs = build_root_system(RootType::A, 2).unwrap();
        let json = serde_json::to_string(&rs.to_json()).unwrap();
        assert_eq!(json, r#"{"type":"A","rank":2,"positive_roots":[[0,1],[1,0],[1,1]]}"#);
        let back: RootSystemJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rs.to_json());
    }

    #[test]
    fn root_display() {
        assert_eq!(Root::new(vec![2, 3, 4, 2]).to_string(), "2a1+3a2+4a3+2a4");
        assert_eq!(Root::new(vec![1, -1]).to_string(), "a1-a2");
    }
}
