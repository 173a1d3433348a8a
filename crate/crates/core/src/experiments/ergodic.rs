use serde::Serialize;

use super::stats::mean_stderr;
use super::{dyadic_checkpoints, par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::liealg::least_squares_slope;
use crate::modsurface::Orbit;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicCheckpoint {
    pub m: u64,
    /// Monte Carlo estimate of `‖β_m⁺(f) - μ(f)‖₂`.
    pub norm: f64,
    pub stderr: f64,
}

/// Decay of ergodic averages of a target indicator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanErgodicResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub mu_f: f64,
    pub checkpoints: Vec<ErgodicCheckpoint>,
    /// Least-squares slope of `log norm` against `log m`.
    pub slope: f64,
}

impl MeanErgodicResult {
    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::MeanErgodic;
        let mut rows: Vec<CsvRow> =
            self.checkpoints.iter().map(|c| CsvRow::new(k, c.m as f64, "l2_deviation", c.norm, c.stderr)).collect();
        rows.push(CsvRow::new(k, f64::NAN, "fitted_slope", self.slope, f64::NAN));
        rows
    }
}

pub fn run_mean_ergodic(cfg: &ExperimentConfig) -> Result<MeanErgodicResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    let cap = fam.measure(0.0)?;
    let mu = cfg.mu_f;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::DegenerateFunction(format!("indicator with μ(f) = {mu} is constant almost everywhere")));
    }
    if mu > cap {
        return Err(Error::DegenerateFunction(format!("μ(f) = {mu} exceeds the largest target measure {cap:.4}")));
    }
    if !cfg.m_min.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("m_min = {} must be a power of two", cfg.m_min)));
    }
    let region = fam.region(fam.threshold_for_measure(mu)?)?;
    let m_max = cfg.m_max();
    let checkpoints: Vec<u64> = dyadic_checkpoints(cfg.m_min, m_max).into_iter().filter(|m| m.is_power_of_two()).collect();
    if checkpoints.len() < 2 {
        return Err(Error::InvalidConfig("mean_ergodic needs at least two dyadic lengths in [m_min, m_max]".into()));
    }

    let sums = par_points(cfg, |_, x| {
        let mut orbit = Orbit::new(&x, &flow);
        let mut s = 0u64;
        let mut out = Vec::with_capacity(checkpoints.len());
        for &m in &checkpoints {
            while orbit.steps() < m {
                orbit.advance()?;
                s += region.contains_orbit(&orbit) as u64;
            }
            out.push(s);
        }
        Ok(out)
    })?;

    let mut out = Vec::with_capacity(checkpoints.len());
    for (k, &m) in checkpoints.iter().enumerate() {
        let sq: Vec<f64> = sums.iter().map(|s| (s[k] as f64 / m as f64 - mu).powi(2)).collect();
        let (ms, se) = mean_stderr(&sq);
        let norm = ms.sqrt();
        out.push(ErgodicCheckpoint { m, norm, stderr: se / (2.0 * norm) });
    }
    let pts: Vec<(f64, f64)> = out.iter().map(|c| ((c.m as f64).ln(), c.norm.ln())).collect();
    Ok(MeanErgodicResult {
        flow: flow.name(),
        n_points: cfg.n_points(),
        mu_f: mu,
        slope: least_squares_slope(&pts),
        checkpoints: out,
    })
}
