use serde::Serialize;

use super::stats::Quartiles;
use super::{par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::modsurface::Orbit;

/// Budgets below this are reported as pre-asymptotic.
pub const ASYMPTOTIC_BUDGET: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLawCheckpoint {
    pub m: u64,
    /// Quantiles of `max_{m' <= m} d(x h_{m'}) / log m`.
    pub ratio: Quartiles,
    /// Median of the running maximum of `d` itself.
    pub median_running_max: f64,
}

/// Cusp-excursion log law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLawResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub m_max: u64,
    /// Target value `1/ϰ`.
    pub target: f64,
    pub pre_asymptotic: bool,
    pub checkpoints: Vec<LogLawCheckpoint>,
    /// `running_max[point][checkpoint]`, nondecreasing in the checkpoint.
    #[serde(skip)]
    pub running_max: Vec<Vec<f64>>,
}

impl LogLawResult {
    pub fn final_median(&self) -> f64 {
        self.checkpoints.last().map_or(f64::NAN, |c| c.ratio.median)
    }

    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::CuspLoglaw;
        let mut rows = Vec::new();
        for c in &self.checkpoints {
            let m = c.m as f64;
            let q = &c.ratio;
            for (name, v) in [("q05", q.q05), ("q25", q.q25), ("median", q.median), ("q75", q.q75)] {
                rows.push(CsvRow::new(k, m, format!("ratio_{name}"), v, f64::NAN));
            }
            rows.push(CsvRow::new(k, m, "running_max_median", c.median_running_max, f64::NAN));
        }
        rows
    }
}

/// Powers of ten from `10^3` (or `10` for small budgets) up to `m_max`.
fn decade_checkpoints(m_max: u64) -> Vec<u64> {
    let start = if m_max >= 1000 { 1000 } else { 10 };
    let mut out = Vec::new();
    let mut m = start;
    while m <= m_max {
        out.push(m);
        m = m.saturating_mul(10);
    }
    if out.last() != Some(&m_max) && m_max >= 2 {
        out.push(m_max);
    }
    out
}

pub fn run_cusp_loglaw(cfg: &ExperimentConfig) -> Result<LogLawResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    if fam != crate::modsurface::TargetFamily::CuspNeighborhood {
        return Err(Error::InvalidConfig("cusp_loglaw needs target = cusp".into()));
    }
    let m_max = cfg.m_max();
    let checkpoints = decade_checkpoints(m_max);
    if checkpoints.is_empty() {
        return Err(Error::InvalidConfig("cusp_loglaw needs m_max >= 2".into()));
    }

    let running_max = par_points(cfg, |_, x| {
        let mut orbit = Orbit::new(&x, &flow);
        let mut best = 0.0f64;
        let mut curve = Vec::with_capacity(checkpoints.len());
        for &m in &checkpoints {
            while orbit.steps() < m {
                best = best.max(orbit.advance()?);
            }
            curve.push(best.ln().max(0.0));
        }
        Ok(curve)
    })?;

    let out = checkpoints
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let ratios: Vec<f64> = running_max.iter().map(|c| c[j] / (m as f64).ln()).collect();
            let maxes: Vec<f64> = running_max.iter().map(|c| c[j]).collect();
            LogLawCheckpoint { m, ratio: Quartiles::of(&ratios, 0), median_running_max: Quartiles::of(&maxes, 0).median }
        })
        .collect();
    Ok(LogLawResult {
        flow: flow.name(),
        n_points: cfg.n_points(),
        m_max,
        target: 1.0 / fam.varkappa(),
        pre_asymptotic: m_max < ASYMPTOTIC_BUDGET,
        checkpoints: out,
        running_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decades() {
        assert_eq!(decade_checkpoints(10_000_000), vec![1000, 10_000, 100_000, 1_000_000, 10_000_000]);
        assert_eq!(decade_checkpoints(10), vec![10]);
        assert_eq!(decade_checkpoints(2500), vec![1000, 2500]);
        assert_eq!(decade_checkpoints(5), vec![5]);
    }
}
