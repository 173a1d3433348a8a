//! The unit tangent bundle of the modular surface, `SL₂(ℤ)\SL₂(ℝ)`.
//!
//! A point is stored as its reduced representative `n(x)a(y)k(θ)` with
//! `z = x + iy` in the standard fundamental domain and `θ ∈ [0, π)` (the
//! `±I` quotient). Flows act on the right, so `z(xh) = g·(h·i)`.

mod target;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{classify_flow, AlgebraElement, FlowKind, DEFAULT_TOL};

pub use target::{hit, hitting_time, HittingTime, MeasureEstimate, Region, TargetFamily, MAX_BALL_RADIUS};

/// Determinant tolerance for [`GroupElement::new`].
pub const DET_TOL: f64 = 1e-10;
/// Orbit steps between determinant corrections.
pub const RENORM_EVERY: u64 = 1000;
/// Longest orbit segment supported by [`flow_step`].
pub const MAX_STEPS: u64 = 1_000_000_000;
/// Relative tolerance deciding that a point lies on the unit arc.
const ARC_TOL: f64 = 1e-12;
const MAX_REDUCE_ITERS: usize = 400;
/// Largest entry allowed in one power of the step matrix.
const CHUNK_NORM: f64 = 1e4;

/// Lowest point of the fundamental domain, `Im ρ = √3/2`.
pub const Y_MIN: f64 = 0.866_025_403_784_438_6;

/// An element `[[a, b], [c, d]]` of `SL₂(ℝ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GroupElement {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let g = GroupElement { a, b, c, d };
        let det = g.det();
        if !det.is_finite() || (det - 1.0).abs() > DET_TOL {
            return Err(Error::NotUnimodular { det });
        }
        Ok(g)
    }

    pub fn identity() -> Self {
        GroupElement { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `n(x) a(y) k(θ)` with `k(θ) = [[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn from_coset(z: Complex64, theta: f64) -> Self {
        let s = z.im.sqrt();
        let (sn, cs) = theta.sin_cos();
        let (a0, b0, d0) = (s, z.re / s, 1.0 / s);
        GroupElement { a: a0 * cs + b0 * sn, b: -a0 * sn + b0 * cs, c: d0 * sn, d: d0 * cs }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        GroupElement {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Möbius action on the upper half-plane.
    pub fn act(&self, z: Complex64) -> Complex64 {
        (z * self.a + self.b) / (z * self.c + self.d)
    }

    /// `g·i`.
    pub fn base_point(&self) -> Complex64 {
        let den = self.c * self.c + self.d * self.d;
        Complex64::new((self.a * self.c + self.b * self.d) / den, 1.0 / den)
    }

    /// Frame angle in `[0, π)`.
    pub fn theta(&self) -> f64 {
        let t = self.c.atan2(self.d).rem_euclid(PI);
        if t >= PI { 0.0 } else { t }
    }

    fn renormalize(&mut self) {
        let s = self.det().sqrt().recip();
        self.a *= s;
        self.b *= s;
        self.c *= s;
        self.d *= s;
    }

    fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }
}

/// An element of `SL₂(ℤ)`, stored row-major.
pub type Witness = [[i64; 2]; 2];

const IDENTITY: Witness = [[1, 0], [0, 1]];

fn witness_mul(p: &Witness, q: &Witness) -> Option<Witness> {
    let e = |i: usize, j: usize| p[i][0].checked_mul(q[0][j])?.checked_add(p[i][1].checked_mul(q[1][j])?);
    Some([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

/// A point of `SL₂(ℤ)\SL₂(ℝ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointJson", try_from = "PointJson")]
pub struct CosetPoint {
    z: Complex64,
    theta: f64,
    witness: Option<Witness>,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    z_re: f64,
    z_im: f64,
    theta: f64,
    witness: Option<Witness>,
}

impl From<CosetPoint> for PointJson {
    fn from(p: CosetPoint) -> Self {
        PointJson { z_re: p.z.re, z_im: p.z.im, theta: p.theta, witness: p.witness }
    }
}

impl TryFrom<PointJson> for CosetPoint {
    type Error = Error;
    fn try_from(j: PointJson) -> Result<Self> {
        let z = Complex64::new(j.z_re, j.z_im);
        if !in_domain(z) || !(0.0..PI).contains(&j.theta) {
            return Err(Error::Reduction(format!("({z}, θ = {}) is not a reduced point", j.theta)));
        }
        Ok(CosetPoint { z, theta: j.theta, witness: j.witness })
    }
}

impl CosetPoint {
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `γ` with `γ·g` equal to the lift up to sign; `None` once it no longer
    /// fits in `i64`.
    pub fn witness(&self) -> Option<Witness> {
        self.witness
    }

    /// The reduced representative.
    pub fn lift(&self) -> GroupElement {
        GroupElement::from_coset(self.z, self.theta)
    }

    /// The base point `i` with the identity frame.
    pub fn origin() -> Self {
        CosetPoint { z: Complex64::new(0.0, 1.0), theta: 0.0, witness: Some(IDENTITY) }
    }

    fn from_reduced(g: &GroupElement, witness: Option<Witness>) -> Self {
        CosetPoint { z: g.base_point(), theta: g.theta(), witness }
    }
}

/// Whether `z` lies in the fundamental domain under the boundary convention
/// (left edge and left half of the arc kept), up to rounding.
pub fn in_domain(z: Complex64) -> bool {
    z.im > 0.0 && z.re >= -0.5 - 1e-12 && z.re < 0.5 && z.norm_sqr() >= 1.0 - 1e-9
}

/// Reduces `g` in place by left multiplication with `SL₂(ℤ)`, updating the
/// witness when one is tracked and dropping it on `i64` overflow.
#[inline]
fn reduce_core(g: &mut GroupElement, witness: &mut Option<Witness>) -> Result<()> {
    for _ in 0..MAX_REDUCE_ITERS {
        let den = g.c * g.c + g.d * g.d;
        let x = (g.a * g.c + g.b * g.d) / den;
        let n = (x + 0.5).floor();
        if n != 0.0 {
            g.a -= n * g.c;
            g.b -= n * g.d;
            if let Some(w) = witness {
                *witness = (n.abs() < 9.0e18)
                    .then(|| witness_mul(&[[1, -(n as i64)], [0, 1]], w))
                    .flatten();
            }
        }
        let r2 = g.a * g.a + g.b * g.b;
        let on_arc = (r2 - den).abs() <= ARC_TOL * den;
        let flip = if on_arc {
            g.a * g.c + g.b * g.d > 0.0
        } else {
            r2 < den
        };
        if !flip {
            return Ok(());
        }
        *g = GroupElement { a: -g.c, b: -g.d, c: g.a, d: g.b };
        if let Some(w) = witness {
            *witness = Some([[-w[1][0], -w[1][1]], [w[0][0], w[0][1]]]);
        }
        if on_arc {
            return Ok(());
        }
    }
    if g.max_abs().is_finite() {
        Err(Error::Reduction(format!("no reduction after {MAX_REDUCE_ITERS} steps")))
    } else {
        Err(Error::Reduction("non-finite matrix entries".into()))
    }
}

/// Reduces `g` to the fundamental domain.
pub fn reduce(g: &GroupElement) -> Result<CosetPoint> {
    let det = g.det();
    if !det.is_finite() || (det - 1.0).abs() > DET_TOL {
        return Err(Error::NotUnimodular { det });
    }
    let mut h = *g;
    let mut w = Some(IDENTITY);
    reduce_core(&mut h, &mut w)?;
    Ok(CosetPoint::from_reduced(&h, w))
}

/// Draws a point from the normalized Haar measure.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> CosetPoint {
    loop {
        let x = rng.random::<f64>() - 0.5;
        let y = Y_MIN / (1.0 - rng.random::<f64>());
        if x * x + y * y >= 1.0 {
            let theta = rng.random::<f64>() * PI;
            return CosetPoint { z: Complex64::new(x, y), theta, witness: Some(IDENTITY) };
        }
    }
}

/// Log-height distance to the compact part, `max(0, log Im z)`.
pub fn cusp_distance(x: &CosetPoint) -> f64 {
    x.z.im.ln().max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowKindSpec {
    /// `diag(e^{t/2}, e^{-t/2})`.
    Geodesic,
    /// `[[1, t], [0, 1]]`.
    Horocycle,
    Custom { generator: AlgebraElement },
}

/// A one-parameter flow `h_t = exp(tX₀)` with its step matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FlowKindSpec", into = "FlowKindSpec")]
pub struct FlowSpec {
    kind: FlowKindSpec,
    x0: [f64; 4],
    step: GroupElement,
    chunk: u64,
}

impl From<FlowSpec> for FlowKindSpec {
    fn from(f: FlowSpec) -> Self {
        f.kind
    }
}

impl TryFrom<FlowKindSpec> for FlowSpec {
    type Error = Error;
    fn try_from(k: FlowKindSpec) -> Result<Self> {
        FlowSpec::new(k)
    }
}

impl FlowSpec {
    pub fn new(kind: FlowKindSpec) -> Result<Self> {
        let x0 = match &kind {
            FlowKindSpec::Geodesic => [0.5, 0.0, 0.0, -0.5],
            FlowKindSpec::Horocycle => [0.0, 1.0, 0.0, 0.0],
            FlowKindSpec::Custom { generator } => {
                if generator.n() != 2 {
                    return Err(Error::InvalidSpec(format!(
                        "custom flow generator must be in sl_2, got {0}x{0}",
                        generator.n()
                    )));
                }
                if classify_flow(generator, DEFAULT_TOL)?.kind == FlowKind::Bounded {
                    return Err(Error::InvalidSpec("custom flow is bounded".into()));
                }
                let m = generator.matrix();
                [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
            }
        };
        let mut f = FlowSpec { kind, x0, step: GroupElement::identity(), chunk: 1 };
        f.step = f.exp(1.0);
        while f.chunk < MAX_STEPS && f.exp(2.0 * f.chunk as f64).max_abs() <= CHUNK_NORM {
            f.chunk *= 2;
        }
        Ok(f)
    }

    pub fn geodesic() -> Self {
        FlowSpec::new(FlowKindSpec::Geodesic).expect("geodesic flow is valid")
    }

    pub fn horocycle() -> Self {
        FlowSpec::new(FlowKindSpec::Horocycle).expect("horocycle flow is valid")
    }

    pub fn kind(&self) -> &FlowKindSpec {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FlowKindSpec::Geodesic => "geodesic",
            FlowKindSpec::Horocycle => "horocycle",
            FlowKindSpec::Custom { .. } => "custom",
        }
    }

    /// `h_1`.
    pub fn step_matrix(&self) -> GroupElement {
        self.step
    }

    /// `exp(tX₀)` in closed form, using `X₀² = -det(X₀)·I`.
    pub fn exp(&self, t: f64) -> GroupElement {
        let [p, q, r, s] = self.x0;
        let delta = -(p * s - q * r);
        let (c0, c1) = if delta > 0.0 {
            let w = delta.sqrt();
            ((t * w).cosh(), (t * w).sinh() / w)
        } else if delta < 0.0 {
            let w = (-delta).sqrt();
            ((t * w).cos(), (t * w).sin() / w)
        } else {
            (1.0, t)
        };
        let mut g = GroupElement { a: c0 + c1 * p, b: c1 * q, c: c1 * r, d: c0 + c1 * s };
        g.renormalize();
        g
    }
}

/// `x·h_m`, reduced, with `m` split into chunks of bounded norm.
pub fn flow_step(x: &CosetPoint, flow: &FlowSpec, m: u64) -> Result<CosetPoint> {
    if m > MAX_STEPS {
        return Err(Error::Overflow { t: m as f64, max_t: MAX_STEPS as f64 });
    }
    if m == 0 {
        return Ok(x.clone());
    }
    let mut g = x.lift();
    let mut w = Some(IDENTITY);
    let mut left = m;
    while left > 0 {
        let k = left.min(flow.chunk);
        g = g.mul(&flow.exp(k as f64));
        reduce_core(&mut g, &mut w)?;
        g.renormalize();
        left -= k;
    }
    Ok(CosetPoint::from_reduced(&g, w))
}

/// Unit-step orbit `x h_1, x h_2, ...` without witness tracking.
#[derive(Clone, Debug)]
pub struct Orbit {
    g: GroupElement,
    step: GroupElement,
    m: u64,
}

impl Orbit {
    pub fn new(x: &CosetPoint, flow: &FlowSpec) -> Self {
        Orbit { g: x.lift(), step: flow.step, m: 0 }
    }

    /// Advances one step and returns the new height `Im z`.
    #[inline]
    pub fn advance(&mut self) -> Result<f64> {
        self.g = self.g.mul(&self.step);
        let mut none = None;
        reduce_core(&mut self.g, &mut none)?;
        self.m += 1;
        if self.m.is_multiple_of(RENORM_EVERY) {
            self.g.renormalize();
        }
        Ok(self.height())
    }

    pub fn steps(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn height(&self) -> f64 {
        1.0 / (self.g.c * self.g.c + self.g.d * self.g.d)
    }

    pub fn z(&self) -> Complex64 {
        self.g.base_point()
    }

    pub fn point(&self) -> CosetPoint {
        CosetPoint::from_reduced(&self.g, None)
    }
}

/// Writes `m,z_re,z_im,cusp_distance` rows for `m = 0, every, 2·every, ...`.
pub fn write_orbit_csv<W: Write>(
    out: &mut W,
    x: &CosetPoint,
    flow: &FlowSpec,
    m_max: u64,
    every: u64,
) -> std::io::Result<()> {
    let every = every.max(1);
    writeln!(out, "m,z_re,z_im,cusp_distance")?;
    let mut orbit = Orbit::new(x, flow);
    let row = |out: &mut W, m: u64, z: Complex64| {
        writeln!(out, "{m},{:.12e},{:.12e},{:.12e}", z.re, z.im, z.im.ln().max(0.0))
    };
    row(out, 0, x.z)?;
    while orbit.steps() < m_max {
        orbit.advance().map_err(std::io::Error::other)?;
        if orbit.steps().is_multiple_of(every) {
            row(out, orbit.steps(), orbit.z())?;
        }
    }
    Ok(())
}
