//! Summable-decay (SD) verdicts for one-parameter flows on `Γ\G`.
//!
//! A flow is SD when spherical matrix coefficients decay like `|t|^(-η)`
//! with `η > 1`. Exponents carry their `(1-ε)` factor symbolically and are
//! compared at `ε = 0`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{classify_flow, AlgebraElement, FlowKind, DEFAULT_TOL};
use crate::rootsys::{good_type, Rational, RootType};

mod rational_str {
    use super::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn parse(s: &str) -> Option<Rational> {
        let s = s.trim();
        match s.split_once('/') {
            Some((a, b)) => {
                let (a, b) = (a.trim().parse().ok()?, b.trim().parse::<i64>().ok()?);
                (b != 0).then(|| Rational::new(a, b))
            }
            None => Some(Rational::from_integer(s.parse().ok()?)),
        }
    }

    pub fn to_string(r: &Rational) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Text(String),
    }

    fn from_raw(raw: Raw) -> Option<Rational> {
        match raw {
            Raw::Int(i) => Some(Rational::from_integer(i)),
            // floats are accepted only when they are short decimals
            Raw::Float(f) => {
                let scaled = f * 1e6;
                (scaled.fract() == 0.0 && scaled.abs() < 1e15)
                    .then(|| Rational::new(scaled as i64, 1_000_000))
            }
            Raw::Text(s) => parse(&s),
        }
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(r))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_str(&to_string(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            match Option::<Raw>::deserialize(d)? {
                None => Ok(None),
                Some(raw) => from_raw(raw)
                    .map(Some)
                    .ok_or_else(|| D::Error::custom("expected a rational such as 3/2")),
            }
        }
    }
}

pub use rational_str::parse as parse_rational;

/// Rank-one families up to local isomorphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankOneFamily {
    #[serde(rename = "SO")]
    So,
    #[serde(rename = "SU")]
    Su,
    #[serde(rename = "Sp")]
    Sp,
    #[serde(rename = "F4")]
    F4,
}

impl fmt::Display for RankOneFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankOneFamily::So => "SO",
            RankOneFamily::Su => "SU",
            RankOneFamily::Sp => "Sp",
            RankOneFamily::F4 => "F4",
        })
    }
}

impl std::str::FromStr for RankOneFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "SO" | "so" => Ok(RankOneFamily::So),
            "SU" | "su" => Ok(RankOneFamily::Su),
            "Sp" | "SP" | "sp" => Ok(RankOneFamily::Sp),
            "F4" | "f4" | "F4m20" => Ok(RankOneFamily::F4),
            other => Err(Error::InvalidFamily(format!("unknown family {other:?}"))),
        }
    }
}

/// Root-space dimensions and spectral constants of a rank-one group.
/// `rho` and `rho0` are multiples of the short restricted root `α`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankOneData {
    pub family: RankOneFamily,
    pub d: Option<u32>,
    pub p: u32,
    pub q: u32,
    #[serde(with = "rational_str")]
    pub rho: Rational,
    #[serde(with = "rational_str")]
    pub rho0: Rational,
    pub kappa: u8,
    /// `SO(2,1)`, locally `SL_2(ℝ)`.
    pub locally_sl2: bool,
}

/// Table values for `SO(d,1)`, `SU(d,1)`, `Sp(d,1)` (`d >= 2`) and
/// `F_4^(-20)` (no `d`).
pub fn rank_one_data(family: RankOneFamily, d: Option<u32>) -> Result<RankOneData> {
    let d = match (family, d) {
        (RankOneFamily::F4, None) => None,
        (RankOneFamily::F4, Some(d)) => {
            return Err(Error::InvalidFamily(format!("F4 takes no parameter, got d = {d}")))
        }
        (_, Some(d)) if d >= 2 => Some(d),
        (_, Some(d)) => {
            return Err(Error::InvalidFamily(format!("{family}(d,1) needs d >= 2, got {d}")))
        }
        (_, None) => return Err(Error::InvalidFamily(format!("{family}(d,1) needs d"))),
    };
    let di = d.map(i64::from).unwrap_or(0);
    let (p, q, rho, rho0_shift) = match family {
        RankOneFamily::So => (di - 1, 0, Rational::new(di - 1, 2), 0),
        RankOneFamily::Su => (2 * (di - 1), 1, Rational::from_integer(di), 0),
        RankOneFamily::Sp => (4 * (di - 1), 3, Rational::from_integer(2 * di + 1), 2),
        RankOneFamily::F4 => (8, 7, Rational::from_integer(11), 6),
    };
    Ok(RankOneData {
        family,
        d,
        p: p as u32,
        q: q as u32,
        rho,
        rho0: rho - Rational::from_integer(rho0_shift),
        kappa: if family == RankOneFamily::So { 2 } else { 1 },
        locally_sl2: family == RankOneFamily::So && d == Some(2),
    })
}

/// Where a spectral-gap value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapProvenance {
    UserSupplied,
    CongruencePreset,
}

/// The spectral-gap parameter `τ(Γ)`, possibly unknown.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralGapParam {
    #[serde(with = "rational_str::option")]
    pub tau: Option<Rational>,
    pub provenance: Option<GapProvenance>,
}

impl SpectralGapParam {
    pub fn unknown() -> Self {
        SpectralGapParam { tau: None, provenance: None }
    }

    pub fn user(tau: Rational) -> Result<Self> {
        if tau <= Rational::from_integer(0) {
            return Err(Error::InvalidSpec(format!("τ must be positive, got {tau}")));
        }
        Ok(SpectralGapParam { tau: Some(tau), provenance: Some(GapProvenance::UserSupplied) })
    }
}

/// Known lower bounds for `τ(Γ)` at congruence lattices. `d` is the group
/// parameter of `SO(d,1)` or `SU(d,1)`.
pub fn congruence_tau_preset(family: RankOneFamily, d: u32) -> Result<SpectralGapParam> {
    let tau = match (family, d) {
        (RankOneFamily::So, 2) => Rational::new(25, 64),
        (RankOneFamily::So, 3) => Rational::new(25, 32),
        (RankOneFamily::So, d) if d >= 4 => Rational::from_integer(1),
        (RankOneFamily::Su, 2) => Rational::new(6, 5),
        (RankOneFamily::Su, d) if d >= 3 => Rational::from_integer(2),
        (RankOneFamily::Sp | RankOneFamily::F4, _) => {
            return Err(Error::InvalidFamily(format!(
                "{family} flows are SD for every lattice; no congruence preset is needed"
            )))
        }
        (f, d) => return Err(Error::InvalidFamily(format!("{f}({d},1) needs d >= 2"))),
    };
    Ok(SpectralGapParam { tau: Some(tau), provenance: Some(GapProvenance::CongruencePreset) })
}

/// A decay exponent `η` in `|t|^(-η)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Exponent {
    /// `coeff·(1-ε)` or plain `coeff`.
    Polynomial {
        #[serde(with = "rational_str")]
        coeff: Rational,
        uses_epsilon: bool,
    },
    /// Faster than any power.
    Exponential,
    /// `κ·τ(Γ)·(1-ε)` with `τ(Γ)` unknown.
    GapDependent { kappa: u8 },
    /// No bound is available.
    Undetermined,
}

impl Exponent {
    pub fn poly(coeff: Rational) -> Self {
        Exponent::Polynomial { coeff, uses_epsilon: true }
    }

    pub fn poly_int(coeff: i64) -> Self {
        Exponent::poly(Rational::from_integer(coeff))
    }

    /// Value at `ε = 0`, `None` when not a number.
    pub fn at_zero(&self) -> Option<Rational> {
        match self {
            Exponent::Polynomial { coeff, .. } => Some(*coeff),
            _ => None,
        }
    }

    /// Strictly greater than 1 at `ε = 0`.
    pub fn is_summable(&self) -> bool {
        match self {
            Exponent::Exponential => true,
            Exponent::Polynomial { coeff, .. } => *coeff > Rational::from_integer(1),
            _ => false,
        }
    }

    /// Partial order: polynomial by coefficient, exponential above all.
    pub fn compare(&self, other: &Exponent) -> Option<Ordering> {
        use Exponent::*;
        match (self, other) {
            (Exponential, Exponential) => Some(Ordering::Equal),
            (Exponential, Polynomial { .. }) => Some(Ordering::Greater),
            (Polynomial { .. }, Exponential) => Some(Ordering::Less),
            (Polynomial { coeff: a, .. }, Polynomial { coeff: b, .. }) => Some(a.cmp(b)),
            _ => None,
        }
    }

    fn max(self, other: Exponent) -> Exponent {
        match self.compare(&other) {
            Some(Ordering::Less) => other,
            _ => self,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Polynomial { coeff, uses_epsilon: true } if *coeff == Rational::from_integer(1) => {
                write!(f, "1-ε")
            }
            Exponent::Polynomial { coeff, uses_epsilon: true } => {
                write!(f, "{}(1-ε)", rational_str::to_string(coeff))
            }
            Exponent::Polynomial { coeff, uses_epsilon: false } => {
                write!(f, "{}", rational_str::to_string(coeff))
            }
            Exponent::Exponential => write!(f, "exponential"),
            Exponent::GapDependent { kappa } => write!(f, "{kappa}τ(Γ)(1-ε)"),
            Exponent::Undetermined => write!(f, "undetermined"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sd {
    Yes,
    No,
    Conditional,
}

impl Sd {
    /// Exit-code protocol: 0 yes, 1 no, 2 conditional.
    pub fn exit_code(self) -> i32 {
        match self {
            Sd::Yes => 0,
            Sd::No => 1,
            Sd::Conditional => 2,
        }
    }
}

/// Verdict with the exponent and the rules that produced it, in order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SDVerdict {
    pub is_sd: Sd,
    pub exponent: Exponent,
    pub exponent_display: String,
    pub rationale: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
}

impl SDVerdict {
    fn new(is_sd: Sd, exponent: Exponent, rationale: Vec<String>) -> Self {
        SDVerdict { is_sd, exponent_display: exponent.to_string(), exponent, rationale, criterion: None }
    }

    fn with_criterion(mut self, c: impl Into<String>) -> Self {
        self.criterion = Some(c.into());
        self
    }
}

const GOOD_LIST: &str = "B_n (n>=4), D_n (n>=4), E_6, E_7, E_8, F_4";

/// Verdict for a simple group of real rank at least 2.
pub fn classify_higher_rank_simple(root_type: RootType, rank: usize, flow: FlowKind) -> Result<SDVerdict> {
    if rank < 2 {
        return Err(Error::InvalidSpec(
            "real rank one: classify with the rank-one family (SO, SU, Sp, F4)".into(),
        ));
    }
    let good = good_type(root_type, rank)?;
    let mut why = vec![if good {
        format!(
            "restricted root system {root_type}{rank} is in the list {GOOD_LIST}, where ξ dominates \
             the highest root: decay |t|^-l(1-ε)"
        )
    } else {
        format!(
            "restricted root system {root_type}{rank} is outside the list {GOOD_LIST}: the uniform \
             bound only gives |t|^-(l/2)(1-ε)"
        )
    }];
    let verdict = match flow {
        FlowKind::Bounded => {
            return Err(Error::InvalidSpec("flow is bounded; SD is defined for unbounded flows".into()))
        }
        FlowKind::QuasiDiagonalizable => {
            why.push("quasi-diagonalizable flow: matrix coefficients decay exponentially".into());
            SDVerdict::new(Sd::Yes, Exponent::Exponential, why)
        }
        FlowKind::QuasiUnipotent { l } => {
            if l < 2 {
                return Err(Error::InvalidSpec(format!("ad-nilpotency degree {l} < 2 is impossible")));
            }
            let coeff = if good {
                Rational::from_integer(l as i64)
            } else {
                Rational::new(l as i64, 2)
            };
            let exponent = Exponent::poly(coeff);
            why.push(format!("quasi-unipotent flow with ad-nilpotency degree l = {l}: exponent {exponent}"));
            if exponent.is_summable() {
                why.push("exponent exceeds 1 at ε = 0: summable".into());
                SDVerdict::new(Sd::Yes, exponent, why)
            } else {
                why.push(
                    "exponent 1-ε is not summable; the flow (e.g. E_13 in sl_3) is classified not SD".into(),
                );
                SDVerdict::new(Sd::No, exponent, why)
            }
        }
    };
    Ok(verdict)
}

/// Verdict for a simple group of real rank one.
pub fn classify_rank_one(family: RankOneFamily, d: Option<u32>, tau: &SpectralGapParam) -> Result<SDVerdict> {
    let data = rank_one_data(family, d)?;
    let kappa = Rational::from_integer(data.kappa as i64);
    if let Some(t) = tau.tau {
        if t <= Rational::from_integer(0) || t > data.rho {
            return Err(Error::InvalidSpec(format!(
                "τ(Γ) = {t} must lie in (0, ρ] with ρ = {}",
                data.rho
            )));
        }
    }
    let gap_line = |t: Rational| {
        let src = match tau.provenance {
            Some(GapProvenance::CongruencePreset) => "congruence preset",
            _ => "supplied",
        };
        format!("spectral gap τ(Γ) = {t} ({src}), κ = {}: exponent κτ(1-ε) = {}(1-ε)", data.kappa, kappa * t)
    };
    let mut why = Vec::new();
    match family {
        RankOneFamily::Sp | RankOneFamily::F4 => {
            why.push(format!(
                "{family} has property (T): complementary series stop at ρ₀ = {}, so τ(Γ) >= ρ - ρ₀ = {} for every lattice",
                data.rho0,
                data.rho - data.rho0
            ));
            let exponent = match tau.tau {
                Some(t) => {
                    why.push(gap_line(t));
                    Exponent::poly(kappa * t)
                }
                None => Exponent::poly(kappa * (data.rho - data.rho0)),
            };
            why.push(format!("every unbounded flow is SD with exponent {exponent}"));
            Ok(SDVerdict::new(Sd::Yes, exponent, why))
        }
        RankOneFamily::So | RankOneFamily::Su => {
            let threshold = Rational::new(1, data.kappa as i64);
            let criterion = format!("SD if κτ(Γ) > 1, i.e. τ(Γ) > {threshold}");
            if data.locally_sl2 {
                why.push(
                    "SO(2,1) is locally SL_2(R): the rank-one spectral-gap criterion is not available".into(),
                );
                let exponent = match tau.tau {
                    Some(t) => Exponent::poly(kappa * t),
                    None => Exponent::GapDependent { kappa: data.kappa },
                };
                return Ok(SDVerdict::new(Sd::Conditional, exponent, why).with_criterion(criterion));
            }
            match tau.tau {
                None => {
                    why.push(format!("{family}({},1) lacks property (T) and τ(Γ) is unknown", data.d.unwrap_or(0)));
                    Ok(SDVerdict::new(Sd::Conditional, Exponent::GapDependent { kappa: data.kappa }, why)
                        .with_criterion(criterion))
                }
                Some(t) => {
                    why.push(gap_line(t));
                    let exponent = Exponent::poly(kappa * t);
                    if exponent.is_summable() {
                        why.push("κτ(Γ) > 1: every unbounded flow is SD".into());
                        Ok(SDVerdict::new(Sd::Yes, exponent, why))
                    } else {
                        why.push("κτ(Γ) <= 1: SD is not established by the spectral-gap bound".into());
                        Ok(SDVerdict::new(Sd::Conditional, exponent, why).with_criterion(criterion))
                    }
                }
            }
        }
    }
}

/// A flow component given either as an `sl_n` matrix or by its class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlowInput {
    Matrix { matrix: AlgebraElement },
    Symbolic(FlowKind),
}

/// One simple factor of a semisimple group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factor", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    HigherRank {
        root_type: RootType,
        rank: usize,
    },
    RankOne {
        family: RankOneFamily,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<u32>,
        /// Spectral gap `τ(Γ)`.
        #[serde(default, with = "rational_str::option", skip_serializing_if = "Option::is_none")]
        tau: Option<Rational>,
        /// Use the congruence-lattice bound for `τ(Γ)`.
        #[serde(default)]
        congruence: bool,
    },
}

impl Factor {
    fn has_property_t(&self) -> bool {
        match self {
            Factor::HigherRank { .. } => true,
            Factor::RankOne { family, .. } => matches!(family, RankOneFamily::Sp | RankOneFamily::F4),
        }
    }

    fn label(&self) -> String {
        match self {
            Factor::HigherRank { root_type, rank } => format!("{root_type}{rank}"),
            Factor::RankOne { family: RankOneFamily::F4, .. } => "F4(-20)".into(),
            Factor::RankOne { family, d, .. } => format!("{family}({},1)", d.unwrap_or(0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    #[serde(flatten)]
    pub factor: Factor,
    pub flow: FlowInput,
}

/// `G = G_1 × ... × G_m` with the flow's component in each factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub factors: Vec<FactorSpec>,
}

impl GroupSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Resolves a flow component to its class, classifying matrices.
pub fn resolve_flow(factor: &Factor, flow: &FlowInput) -> Result<FlowKind> {
    match flow {
        FlowInput::Symbolic(k) => Ok(*k),
        FlowInput::Matrix { matrix } => {
            let n = matrix.n();
            let ok = match factor {
                Factor::HigherRank { root_type: RootType::A, rank } => *rank + 1 == n,
                Factor::RankOne { family: RankOneFamily::So, d: Some(2), .. } => n == 2,
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidSpec(format!(
                    "a {n}x{n} matrix flow does not fit factor {}; only sl_n matrices are built in, \
                     give other flows symbolically",
                    factor.label()
                )));
            }
            Ok(classify_flow(matrix, DEFAULT_TOL)?.kind)
        }
    }
}

fn tau_param(factor: &Factor) -> Result<SpectralGapParam> {
    match factor {
        Factor::RankOne { tau: Some(t), .. } => SpectralGapParam::user(*t),
        Factor::RankOne { family, d, congruence: true, .. } => {
            congruence_tau_preset(*family, d.ok_or_else(|| Error::InvalidFamily("missing d".into()))?)
        }
        _ => Ok(SpectralGapParam::unknown()),
    }
}

fn classify_factor(factor: &Factor, flow: FlowKind) -> Result<SDVerdict> {
    match factor {
        Factor::HigherRank { root_type, rank } => {
            root_type.validate_rank(*rank)?;
            classify_higher_rank_simple(*root_type, *rank, flow)
        }
        Factor::RankOne { family, d, .. } => {
            if flow == FlowKind::Bounded {
                return Err(Error::InvalidSpec("flow is bounded; SD is defined for unbounded flows".into()));
            }
            classify_rank_one(*family, *d, &tau_param(factor)?)
        }
    }
}

struct Resolved<'a> {
    factor: &'a Factor,
    flow: FlowKind,
}

fn resolve(spec: &GroupSpec) -> Result<Vec<Resolved<'_>>> {
    if spec.factors.is_empty() {
        return Err(Error::InvalidSpec("at least one factor is required".into()));
    }
    let out: Vec<Resolved> = spec
        .factors
        .iter()
        .map(|f| Ok(Resolved { factor: &f.factor, flow: resolve_flow(&f.factor, &f.flow)? }))
        .collect::<Result<_>>()?;
    if out.iter().all(|r| r.flow == FlowKind::Bounded) {
        return Err(Error::InvalidSpec("every factor flow is bounded; the flow must be unbounded".into()));
    }
    Ok(out)
}

/// Verdict for a semisimple group given factor by factor.
pub fn classify_semisimple(spec: &GroupSpec) -> Result<SDVerdict> {
    let factors = resolve(spec)?;
    if factors.len() == 1 {
        return classify_factor(factors[0].factor, factors[0].flow);
    }
    if let Some(bad) = factors.iter().find(|r| !r.factor.has_property_t()) {
        let why = vec![format!(
            "factor {} lacks property (T): the product decay bound is not available",
            bad.factor.label()
        )];
        return Ok(SDVerdict::new(Sd::Conditional, Exponent::Undetermined, why)
            .with_criterion("SD of the product depends on the spectral gap of the rank-one factor"));
    }
    let essential: Vec<&Resolved> = factors.iter().filter(|r| r.flow != FlowKind::Bounded).collect();
    let k = essential.len();
    if k == 1 {
        let only = essential[0];
        let mut v = classify_factor(only.factor, only.flow)?;
        v.rationale.insert(
            0,
            format!("only one essential factor ({}): the verdict is that factor's verdict", only.factor.label()),
        );
        return Ok(v);
    }
    let exponent = Exponent::poly_int(k as i64);
    let why = vec![
        "every factor has property (T)".into(),
        format!("k = {k} essential factors: decay |t|^-k(1-ε) = {exponent}"),
    ];
    Ok(SDVerdict::new(Sd::Yes, exponent, why))
}

/// `max(k(1-ε), per-factor exponents)`, never below `1-ε`.
pub fn uniform_decay_exponent(spec: &GroupSpec) -> Result<Exponent> {
    let factors = resolve(spec)?;
    if let Some(bad) = factors.iter().find(|r| !r.factor.has_property_t()) {
        return Err(Error::InvalidSpec(format!(
            "uniform decay needs property (T); factor {} lacks it",
            bad.factor.label()
        )));
    }
    let mut best = Exponent::poly_int(1);
    let mut k = 0;
    for r in factors.iter().filter(|r| r.flow != FlowKind::Bounded) {
        k += 1;
        best = best.max(classify_factor(r.factor, r.flow)?.exponent);
    }
    Ok(best.max(Exponent::poly_int(k)))
}
