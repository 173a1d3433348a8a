use serde::Serialize;

use super::sbc::{MeasureSchedule, Targets};
use super::stats::Quartiles;
use super::{dyadic_checkpoints, par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::modsurface::Orbit;

/// Count ratios inside `[BAND_LO, BAND_HI]` are reported as concentrated.
pub const BAND_LO: f64 = 0.3;
pub const BAND_HI: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EAHCheckpoint {
    pub m: u64,
    pub mu: f64,
    /// Fraction of points with `x H_m⁺ ∩ B_m` nonempty.
    pub hit_fraction: f64,
    /// Quantiles of `#(x H_m⁺ ∩ B_m) / (m μ(B_m))`.
    pub count_ratio: Quartiles,
    pub in_band_fraction: f64,
}

/// Eventually-always-hitting statistics at dyadic checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EAHResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub m_max: u64,
    pub schedule: MeasureSchedule,
    pub checkpoints: Vec<EAHCheckpoint>,
    /// `counts[point][checkpoint]`.
    #[serde(skip)]
    pub counts: Vec<Vec<u64>>,
}

impl EAHResult {
    pub fn final_hit_fraction(&self) -> f64 {
        self.checkpoints.last().map_or(f64::NAN, |c| c.hit_fraction)
    }

    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::Eah;
        let mut rows = Vec::new();
        for c in &self.checkpoints {
            let m = c.m as f64;
            let n = self.n_points as f64;
            let se = (c.hit_fraction * (1.0 - c.hit_fraction) / n).sqrt();
            rows.push(CsvRow::new(k, m, "mu", c.mu, 0.0));
            rows.push(CsvRow::new(k, m, "hit_fraction", c.hit_fraction, se));
            rows.push(CsvRow::new(k, m, "count_ratio_median", c.count_ratio.median, f64::NAN));
            rows.push(CsvRow::new(k, m, "count_ratio_in_band", c.in_band_fraction, f64::NAN));
        }
        rows
    }
}

/// Targets `μ(B_m) = min(cap, c·m^{-eta})` with `c = schedule_c`.
pub fn run_eah(cfg: &ExperimentConfig, eta: f64) -> Result<EAHResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    let schedule = MeasureSchedule::new(cfg.schedule_c, eta, &fam)?;
    let m_max = cfg.m_max();
    let checkpoints = dyadic_checkpoints(1, m_max);
    let mus: Vec<f64> = checkpoints.iter().map(|&m| schedule.mu(m)).collect();
    // B_{m_k} shrink with k, so membership fails for every later checkpoint
    // once it fails for one
    let targets = Targets::build(&fam, mus.iter().copied())?;

    let counts = par_points(cfg, |_, x| {
        let mut orbit = Orbit::new(&x, &flow);
        let mut counts = vec![0u64; checkpoints.len()];
        let mut first = 0;
        while orbit.steps() < m_max {
            orbit.advance()?;
            if orbit.steps() > checkpoints[first] {
                first += 1;
            }
            for (k, c) in counts.iter_mut().enumerate().skip(first) {
                if !targets.contains(k, &orbit) {
                    break;
                }
                *c += 1;
            }
        }
        Ok(counts)
    })?;

    let n = counts.len() as f64;
    let out = checkpoints
        .iter()
        .zip(&mus)
        .enumerate()
        .map(|(k, (&m, &mu))| {
            let ratios: Vec<f64> = counts.iter().map(|c| c[k] as f64 / (m as f64 * mu)).collect();
            EAHCheckpoint {
                m,
                mu,
                hit_fraction: counts.iter().filter(|c| c[k] > 0).count() as f64 / n,
                count_ratio: Quartiles::of(&ratios, 0),
                in_band_fraction: ratios.iter().filter(|r| (BAND_LO..=BAND_HI).contains(*r)).count() as f64 / n,
            }
        })
        .collect();
    Ok(EAHResult { flow: flow.name(), n_points: cfg.n_points(), m_max, schedule, checkpoints: out, counts })
}
