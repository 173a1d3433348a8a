use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{flow_step, haar_sample, in_domain, CosetPoint, FlowSpec, GroupElement, Orbit};
use crate::error::{Error, Result};

/// Largest ball radius accepted; keeps neighbor-translate checks complete.
pub const MAX_BALL_RADIUS: f64 = 0.25;

/// A monotone family of spherical targets `B_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetFamily {
    /// `{x : d(x) > t}`, measure `(3/π)e^{-t}`.
    CuspNeighborhood,
    /// Hyperbolic ball of radius `radius·e^{-t}` about `center`.
    ShrinkingBall { center_re: f64, center_im: f64, radius: f64 },
}

/// A measure value with its Monte Carlo standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// A target at a fixed parameter, ready for membership tests.
#[derive(Clone, Debug)]
pub enum Region {
    Cusp { min_height: f64 },
    Ball { center: Complex64, cosh_r: f64, translates: Vec<GroupElement> },
}

impl Region {
    #[inline]
    pub fn contains_orbit(&self, orbit: &Orbit) -> bool {
        match self {
            Region::Cusp { min_height } => orbit.height() > *min_height,
            Region::Ball { .. } => self.contains(orbit.z()),
        }
    }

    /// Membership of the reduced point `z`.
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Region::Cusp { min_height } => z.im > *min_height,
            Region::Ball { center, cosh_r, translates } => {
                let near = |w: Complex64| 1.0 + (w - center).norm_sqr() / (2.0 * w.im * center.im) <= *cosh_r;
                near(z) || translates.iter().any(|g| near(g.act(z)))
            }
        }
    }
}

fn sinh_dist_to_boundary(w: Complex64) -> f64 {
    let left = (w.re + 0.5).abs() / w.im;
    let right = (0.5 - w.re).abs() / w.im;
    let arc = (w.norm_sqr() - 1.0).abs() / (2.0 * w.im);
    left.min(right).min(arc)
}

/// Translates `γ` (words of length at most 4 in `S`, `T^{±1}`) whose images
/// of the domain can meet a small ball around a domain point.
fn neighbor_translates() -> Vec<GroupElement> {
    let gens = [
        GroupElement { a: 0.0, b: -1.0, c: 1.0, d: 0.0 },
        GroupElement { a: 1.0, b: 1.0, c: 0.0, d: 1.0 },
        GroupElement { a: 1.0, b: -1.0, c: 0.0, d: 1.0 },
    ];
    let key = |g: &GroupElement| {
        let s = if g.c < 0.0 || (g.c == 0.0 && g.d < 0.0) { -1.0 } else { 1.0 };
        [g.a * s, g.b * s, g.c * s, g.d * s].map(|v| v as i64)
    };
    let mut seen = vec![key(&GroupElement::identity())];
    let mut out = Vec::new();
    let mut frontier = vec![GroupElement::identity()];
    for _ in 0..4 {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &gens {
                let h = s.mul(g);
                let k = key(&h);
                if !seen.contains(&k) {
                    seen.push(k);
                    out.push(h);
                    next.push(h);
                }
            }
        }
        frontier = next;
    }
    out
}

impl TargetFamily {
    pub fn validate(&self) -> Result<()> {
        if let TargetFamily::ShrinkingBall { center_re, center_im, radius } = *self {
            let c = Complex64::new(center_re, center_im);
            if !in_domain(c) {
                return Err(Error::InvalidTarget(format!("ball center {c} is not in the fundamental domain")));
            }
            if !(radius > 0.0 && radius <= MAX_BALL_RADIUS) {
                return Err(Error::InvalidTarget(format!("ball radius must lie in (0, {MAX_BALL_RADIUS}]")));
            }
        }
        Ok(())
    }

    /// Exponential decay rate of `μ(B_t)`.
    pub fn varkappa(&self) -> f64 {
        match self {
            TargetFamily::CuspNeighborhood => 1.0,
            TargetFamily::ShrinkingBall { .. } => 2.0,
        }
    }

    fn check_t(t: f64) -> Result<()> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidTarget(format!("target parameter t = {t} must be finite and >= 0")));
        }
        Ok(())
    }

    fn ball_radius(&self, t: f64) -> Option<(Complex64, f64)> {
        match *self {
            TargetFamily::ShrinkingBall { center_re, center_im, radius } => {
                Some((Complex64::new(center_re, center_im), radius * (-t).exp()))
            }
            TargetFamily::CuspNeighborhood => None,
        }
    }

    fn ball_is_interior(center: Complex64, r: f64) -> bool {
        sinh_dist_to_boundary(center) > r.sinh()
    }

    pub fn region(&self, t: f64) -> Result<Region> {
        Self::check_t(t)?;
        self.validate()?;
        Ok(match self.ball_radius(t) {
            None => Region::Cusp { min_height: t.exp() },
            Some((center, r)) => Region::Ball {
                center,
                cosh_r: r.cosh(),
                translates: if Self::ball_is_interior(center, r) { Vec::new() } else { neighbor_translates() },
            },
        })
    }

    /// Closed-form `μ(B_t)`; balls crossing the domain boundary need
    /// [`TargetFamily::measure_mc`].
    pub fn measure(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        self.validate()?;
        match self.ball_radius(t) {
            None => Ok(3.0 / PI * (-t).exp()),
            Some((center, r)) => {
                if !Self::ball_is_interior(center, r) {
                    return Err(Error::InvalidTarget(format!(
                        "ball of radius {r:.4} at {center} crosses the domain boundary; \
                         its measure needs a Monte Carlo budget"
                    )));
                }
                // area 4π sinh²(r/2) over the domain area π/3
                Ok(12.0 * (r / 2.0).sinh().powi(2))
            }
        }
    }

    /// Closed form when available, otherwise a Haar Monte Carlo estimate.
    pub fn measure_mc<R: Rng + ?Sized>(&self, t: f64, samples: usize, rng: &mut R) -> Result<MeasureEstimate> {
        if let Ok(value) = self.measure(t) {
            return Ok(MeasureEstimate { value, stderr: 0.0 });
        }
        if samples == 0 {
            return Err(Error::InvalidTarget("Monte Carlo budget is zero".into()));
        }
        let region = self.region(t)?;
        let hits = (0..samples).filter(|_| region.contains(haar_sample(rng).z())).count();
        let p = hits as f64 / samples as f64;
        Ok(MeasureEstimate { value: p, stderr: (p * (1.0 - p) / samples as f64).sqrt() })
    }

    /// The parameter `t` with `μ(B_t) = mu`.
    pub fn threshold_for_measure(&self, mu: f64) -> Result<f64> {
        let bad = || Error::InvalidTarget(format!("measure {mu} is not attained by this family"));
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(bad());
        }
        let t = match *self {
            TargetFamily::CuspNeighborhood => (3.0 / (PI * mu)).ln(),
            TargetFamily::ShrinkingBall { radius, .. } => (radius / (2.0 * (mu / 12.0).sqrt().asinh())).ln(),
        };
        // the largest member sits at t = 0 up to rounding
        let t = if t < 0.0 && t > -1e-12 { 0.0 } else { t };
        if t < 0.0 {
            return Err(bad());
        }
        self.measure(t).map_err(|_| bad())?;
        Ok(t)
    }
}

/// First hitting time of the `i`-th visit, or budget exhaustion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HittingTime {
    Hit(u64),
    Exceeded,
}

/// Whether `x h_m` lies in `B_t`.
pub fn hit(x: &CosetPoint, fam: &TargetFamily, t: f64, flow: &FlowSpec, m: u64) -> Result<bool> {
    let region = fam.region(t)?;
    Ok(region.contains(flow_step(x, flow, m)?.z()))
}

/// Smallest `m <= m_max` with exactly `i` visits to `B_t` among
/// `x h_1, ..., x h_m`.
pub fn hitting_time(
    x: &CosetPoint,
    fam: &TargetFamily,
    t: f64,
    flow: &FlowSpec,
    i: u64,
    m_max: u64,
) -> Result<HittingTime> {
    if i == 0 {
        return Err(Error::InvalidTarget("visit index i must be >= 1".into()));
    }
    let region = fam.region(t)?;
    let mut orbit = Orbit::new(x, flow);
    let mut count = 0;
    while orbit.steps() < m_max {
        orbit.advance()?;
        if region.contains_orbit(&orbit) {
            count += 1;
            if count == i {
                return Ok(HittingTime::Hit(orbit.steps()));
            }
        }
    }
    Ok(HittingTime::Exceeded)
}
