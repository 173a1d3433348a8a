use serde::Serialize;

use super::stats::Quartiles;
use super::{par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::modsurface::{HittingTime, Orbit};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingLevel {
    pub mu: f64,
    pub t: f64,
    /// Quantiles of `log τ / (-log μ)`, censored values counted as `+∞`.
    pub quartiles: Quartiles,
    pub n_censored: usize,
    /// Every point exhausted the budget.
    pub inconclusive: bool,
}

/// Hitting-time log law: `log τ_{B_t}(x) / (-log μ(B_t))` per point and level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingLawResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub m_max: u64,
    pub levels: Vec<HittingLevel>,
    /// `times[point][level]`, levels in the order of `levels`.
    #[serde(skip)]
    pub times: Vec<Vec<HittingTime>>,
}

impl HittingLawResult {
    /// Observed ratios of one level, censored points omitted.
    pub fn ratios(&self, level: usize) -> Vec<f64> {
        observed_ratios(&self.times, level, self.levels[level].mu)
    }

    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::HittingTime;
        let mut rows = Vec::new();
        for l in &self.levels {
            let c = l.n_censored as u64;
            let q = &l.quartiles;
            for (name, v) in [("q05", q.q05), ("q25", q.q25), ("median", q.median), ("q75", q.q75)] {
                rows.push(CsvRow::new(k, l.t, format!("ratio_{name}_mu={}", l.mu), v, f64::NAN).censored(c));
            }
        }
        rows
    }
}

fn observed_ratios(times: &[Vec<HittingTime>], level: usize, mu: f64) -> Vec<f64> {
    times
        .iter()
        .filter_map(|row| match row[level] {
            HittingTime::Hit(m) => Some((m as f64).ln() / -mu.ln()),
            HittingTime::Exceeded => None,
        })
        .collect()
}

pub fn run_hitting_time_law(cfg: &ExperimentConfig) -> Result<HittingLawResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    if cfg.measures.is_empty() {
        return Err(Error::InvalidSchedule("measures must not be empty".into()));
    }
    let mut order: Vec<usize> = (0..cfg.measures.len()).collect();
    for &mu in &cfg.measures {
        if !(mu > 0.0 && mu < 0.5) {
            return Err(Error::InvalidSchedule(format!(
                "target measure {mu} must lie in (0, 1/2); larger targets make the ratio degenerate"
            )));
        }
    }
    // nested targets: visit levels from the largest measure down
    order.sort_by(|&a, &b| cfg.measures[b].total_cmp(&cfg.measures[a]));
    let ts: Vec<f64> = cfg.measures.iter().map(|&mu| fam.threshold_for_measure(mu)).collect::<Result<_>>()?;
    let regions: Vec<_> = order.iter().map(|&i| fam.region(ts[i])).collect::<Result<_>>()?;
    let m_max = cfg.m_max();

    let times = par_points(cfg, |_, x| {
        let mut sorted_times = vec![HittingTime::Exceeded; regions.len()];
        let mut next = 0;
        let mut orbit = Orbit::new(&x, &flow);
        while next < regions.len() && orbit.steps() < m_max {
            orbit.advance()?;
            while next < regions.len() && regions[next].contains_orbit(&orbit) {
                sorted_times[next] = HittingTime::Hit(orbit.steps());
                next += 1;
            }
        }
        let mut row = vec![HittingTime::Exceeded; regions.len()];
        for (slot, &i) in order.iter().enumerate() {
            row[i] = sorted_times[slot];
        }
        Ok(row)
    })?;

    let mut result = HittingLawResult {
        flow: flow.name(),
        n_points: cfg.n_points(),
        m_max,
        levels: Vec::new(),
        times,
    };
    for (i, (&mu, &t)) in cfg.measures.iter().zip(&ts).enumerate() {
        let observed = observed_ratios(&result.times, i, mu);
        let n_censored = result.times.len() - observed.len();
        result.levels.push(HittingLevel {
            mu,
            t,
            quartiles: Quartiles::of(&observed, n_censored),
            n_censored,
            inconclusive: observed.is_empty(),
        });
    }
    Ok(result)
}
