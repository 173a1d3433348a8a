use serde::Serialize;

use super::stats::mean_stderr;
use super::{dyadic_checkpoints, par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::modsurface::{Orbit, Region, TargetFamily};

/// Smallest expected hit count `E_{m_max}` accepted as evidence of divergence.
pub const MIN_EXPECTED_HITS: f64 = 10.0;

/// `μ_m = min(cap, c·m^{-eta})`, `cap` being the largest target measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureSchedule {
    pub c: f64,
    pub eta: f64,
    pub cap: f64,
}

impl MeasureSchedule {
    pub fn new(c: f64, eta: f64, fam: &TargetFamily) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidSchedule(format!("schedule constant c = {c} must be positive")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidSchedule(format!("schedule exponent eta = {eta} must be >= 0")));
        }
        Ok(MeasureSchedule { c, eta, cap: fam.measure(0.0)? })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        MeasureSchedule::new(cfg.schedule_c, cfg.schedule_eta, &cfg.target_family()?)
    }

    pub fn mu(&self, m: u64) -> f64 {
        (self.c * (m as f64).powf(-self.eta)).min(self.cap)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SBCCheckpoint {
    pub m: u64,
    /// `E_m = Σ_{j<=m} μ_j`.
    pub e_m: f64,
    pub mean_s: f64,
    pub mean_ratio: f64,
    pub ratio_stderr: f64,
    /// Points with `|S_m - E_m|` above the envelope.
    pub violations: usize,
}

/// Shrinking-target Borel–Cantelli ratios `S_m / E_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SBCResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub m_max: u64,
    pub schedule: MeasureSchedule,
    pub band_c: f64,
    pub band_log_power: f64,
    pub checkpoints: Vec<SBCCheckpoint>,
    pub error_band_violations: usize,
    /// Violations over `n_points × checkpoints`.
    pub violation_fraction: f64,
    /// `s_curves[point][checkpoint]` is `S_m`.
    #[serde(skip)]
    pub s_curves: Vec<Vec<u64>>,
}

impl SBCResult {
    pub fn final_mean_ratio(&self) -> f64 {
        self.checkpoints.last().map_or(f64::NAN, |c| c.mean_ratio)
    }

    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::Sbc;
        let mut rows = Vec::new();
        for c in &self.checkpoints {
            let m = c.m as f64;
            rows.push(CsvRow::new(k, m, "E_m", c.e_m, 0.0));
            rows.push(CsvRow::new(k, m, "mean_S_m", c.mean_s, f64::NAN));
            rows.push(CsvRow::new(k, m, "mean_ratio", c.mean_ratio, c.ratio_stderr));
            rows.push(CsvRow::new(k, m, "envelope_violations", c.violations as f64, 0.0));
        }
        rows
    }
}

/// The envelope `C·√E·max(1, log E)^p`.
pub fn schmidt_envelope(e: f64, c: f64, p: f64) -> f64 {
    c * e.sqrt() * e.ln().max(1.0).powf(p)
}

/// Per-step targets for `j = 1..=m_max`.
pub(crate) enum Targets {
    Cusp(Vec<f64>),
    General(Vec<Region>),
}

impl Targets {
    pub(crate) fn build(fam: &TargetFamily, mus: impl Iterator<Item = f64>) -> Result<Self> {
        let mut heights = Vec::new();
        let mut regions = Vec::new();
        for mu in mus {
            let t = fam.threshold_for_measure(mu)?;
            match fam.region(t)? {
                Region::Cusp { min_height } => heights.push(min_height),
                r => regions.push(r),
            }
        }
        Ok(if regions.is_empty() { Targets::Cusp(heights) } else { Targets::General(regions) })
    }

    /// Membership of the orbit point in target `j` (0-based).
    #[inline]
    pub(crate) fn contains(&self, j: usize, orbit: &Orbit) -> bool {
        match self {
            Targets::Cusp(h) => orbit.height() > h[j],
            Targets::General(r) => r[j].contains_orbit(orbit),
        }
    }
}

pub fn run_sbc(cfg: &ExperimentConfig, schedule: &MeasureSchedule) -> Result<SBCResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    let m_max = cfg.m_max();
    let mus: Vec<f64> = (1..=m_max).map(|m| schedule.mu(m)).collect();
    let total: f64 = mus.iter().sum();
    if schedule.eta > 1.0 || total < MIN_EXPECTED_HITS {
        return Err(Error::ConvergentSchedule { total });
    }
    let targets = Targets::build(&fam, mus.iter().copied())?;
    let checkpoints = dyadic_checkpoints(1, m_max);
    let mut e = Vec::with_capacity(checkpoints.len());
    let mut acc = 0.0;
    let mut j = 0;
    for &m in &checkpoints {
        while (j as u64) < m {
            acc += mus[j];
            j += 1;
        }
        e.push(acc);
    }

    let s_curves = par_points(cfg, |_, x| {
        let mut orbit = Orbit::new(&x, &flow);
        let mut s = 0u64;
        let mut curve = Vec::with_capacity(checkpoints.len());
        for &m in &checkpoints {
            while orbit.steps() < m {
                orbit.advance()?;
                s += targets.contains(orbit.steps() as usize - 1, &orbit) as u64;
            }
            curve.push(s);
        }
        Ok(curve)
    })?;

    let mut out = Vec::with_capacity(checkpoints.len());
    let mut total_violations = 0;
    for (k, (&m, &e_m)) in checkpoints.iter().zip(&e).enumerate() {
        let ratios: Vec<f64> = s_curves.iter().map(|c| c[k] as f64 / e_m).collect();
        let (mean_ratio, ratio_stderr) = mean_stderr(&ratios);
        let envelope = schmidt_envelope(e_m, cfg.band_c, cfg.band_log_power);
        let violations = s_curves.iter().filter(|c| (c[k] as f64 - e_m).abs() > envelope).count();
        total_violations += violations;
        out.push(SBCCheckpoint {
            m,
            e_m,
            mean_s: mean_ratio * e_m,
            mean_ratio,
            ratio_stderr,
            violations,
        });
    }
    Ok(SBCResult {
        flow: flow.name(),
        n_points: cfg.n_points(),
        m_max,
        schedule: *schedule,
        band_c: cfg.band_c,
        band_log_power: cfg.band_log_power,
        violation_fraction: total_violations as f64 / (s_curves.len() * checkpoints.len()) as f64,
        error_band_violations: total_violations,
        checkpoints: out,
        s_curves,
    })
}
