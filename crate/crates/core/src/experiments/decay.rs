use serde::Serialize;

use super::stats::mean_stderr;
use super::{par_points, CsvRow, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::liealg::least_squares_slope;
use crate::modsurface::Orbit;

/// Largest time accepted in the grid.
pub const MAX_T: u64 = 1000;
/// Signal-to-noise ratio required for a grid point to enter the fit.
pub const MIN_SNR: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub t: u64,
    pub value: f64,
    pub stderr: f64,
}

/// Fits over the leading run of grid points with `|C(t)| > 3·stderr`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub n_fit_points: usize,
    /// `-d log|C| / d log t`.
    pub power_exponent: f64,
    /// `d log|C| / dt`.
    pub exponential_rate: f64,
    /// Largest standard error on the grid.
    pub noise_floor: f64,
    pub inconclusive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixDecayResult {
    pub flow: &'static str,
    pub n_points: usize,
    pub mu_f: f64,
    /// `⟨φ, ψ⟩` at `t = 0`, equal to `μ(1 - μ)` up to sampling error.
    pub at_zero: CorrelationPoint,
    pub correlations: Vec<CorrelationPoint>,
    pub fit: DecayFit,
}

impl MatrixDecayResult {
    pub(crate) fn csv_rows(&self) -> Vec<CsvRow> {
        let k = ExperimentKind::MatrixDecay;
        let mut rows = vec![CsvRow::new(k, 0.0, "correlation", self.at_zero.value, self.at_zero.stderr)];
        rows.extend(self.correlations.iter().map(|c| CsvRow::new(k, c.t as f64, "correlation", c.value, c.stderr)));
        rows.push(CsvRow::new(k, f64::NAN, "power_exponent", self.fit.power_exponent, f64::NAN));
        rows.push(CsvRow::new(k, f64::NAN, "exponential_rate", self.fit.exponential_rate, f64::NAN));
        rows
    }
}

/// Correlations of `φ = ψ = 1_B - μ(B)` for a target `B` with `μ(B) = mu_f`.
pub fn run_matrix_decay(cfg: &ExperimentConfig) -> Result<MatrixDecayResult> {
    let flow = cfg.flow_spec()?;
    let fam = cfg.target_family()?;
    let mu = cfg.mu_f;
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::DegenerateFunction(format!("indicator with μ = {mu} has no mean-zero part")));
    }
    let region = fam.region(fam.threshold_for_measure(mu)?)?;
    let mut grid = match &cfg.t_grid {
        Some(g) => g.clone(),
        None => (1..=cfg.m_max()).collect(),
    };
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() || grid[0] == 0 || *grid.last().unwrap() > MAX_T {
        return Err(Error::InvalidSchedule(format!("t_grid must be a nonempty subset of [1, {MAX_T}]")));
    }
    let t_end = *grid.last().unwrap();

    let samples = par_points(cfg, |_, x| {
        let phi0 = region.contains(x.z()) as u8 as f64 - mu;
        let mut orbit = Orbit::new(&x, &flow);
        let mut out = Vec::with_capacity(grid.len() + 1);
        out.push(phi0 * phi0);
        let mut next = 0;
        while orbit.steps() < t_end {
            orbit.advance()?;
            if orbit.steps() == grid[next] {
                out.push((region.contains_orbit(&orbit) as u8 as f64 - mu) * phi0);
                next += 1;
            }
        }
        Ok(out)
    })?;

    let column = |k: usize| -> (f64, f64) { mean_stderr(&samples.iter().map(|s| s[k]).collect::<Vec<_>>()) };
    let (v0, s0) = column(0);
    let correlations: Vec<CorrelationPoint> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (value, stderr) = column(i + 1);
            CorrelationPoint { t, value, stderr }
        })
        .collect();
    let fit_pts: Vec<&CorrelationPoint> =
        correlations.iter().take_while(|c| c.value.abs() > MIN_SNR * c.stderr).collect();
    let noise_floor = correlations.iter().map(|c| c.stderr).fold(0.0, f64::max);
    let fit = if fit_pts.len() < 2 {
        DecayFit { n_fit_points: fit_pts.len(), power_exponent: f64::NAN, exponential_rate: f64::NAN, noise_floor, inconclusive: true }
    } else {
        let logs: Vec<(f64, f64)> = fit_pts.iter().map(|c| ((c.t as f64).ln(), c.value.abs().ln())).collect();
        let lin: Vec<(f64, f64)> = fit_pts.iter().map(|c| (c.t as f64, c.value.abs().ln())).collect();
        DecayFit {
            n_fit_points: fit_pts.len(),
            power_exponent: -least_squares_slope(&logs),
            exponential_rate: least_squares_slope(&lin),
            noise_floor,
            inconclusive: false,
        }
    };
    Ok(MatrixDecayResult {
        flow: flow.name(),
        n_points: cfg.n_points(),
        mu_f: mu,
        at_zero: CorrelationPoint { t: 0, value: v0, stderr: s0 },
        correlations,
        fit,
    })
}
