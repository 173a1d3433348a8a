//! Monte Carlo harnesses for shrinking-target laws on the modular surface.
//!
//! Every sample point draws from its own ChaCha8 stream (stream id = point
//! index), per-point work runs on a rayon pool and results are folded in
//! index order, so outputs do not depend on the worker count.

mod decay;
mod eah;
mod ergodic;
mod hitting;
mod loglaw;
mod sbc;
mod stats;

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::AlgebraElement;
use crate::modsurface::{haar_sample, CosetPoint, FlowKindSpec, FlowSpec, TargetFamily};

pub use decay::{run_matrix_decay, CorrelationPoint, DecayFit, MatrixDecayResult};
pub use eah::{run_eah, EAHCheckpoint, EAHResult};
pub use ergodic::{run_mean_ergodic, ErgodicCheckpoint, MeanErgodicResult};
pub use hitting::{run_hitting_time_law, HittingLawResult, HittingLevel};
pub use loglaw::{run_cusp_loglaw, LogLawCheckpoint, LogLawResult};
pub use sbc::{run_sbc, MeasureSchedule, SBCCheckpoint, SBCResult};
pub use stats::{censored_quantile, quantile, Quartiles};

/// Column order of result CSV files.
pub const CSV_HEADER: &str = "experiment,m_or_t,statistic,value,stderr,n_censored";
/// Version of the CSV and JSON result schema.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HittingTime,
    CuspLoglaw,
    Sbc,
    Eah,
    MeanErgodic,
    MatrixDecay,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::HittingTime => "hitting_time",
            ExperimentKind::CuspLoglaw => "cusp_loglaw",
            ExperimentKind::Sbc => "sbc",
            ExperimentKind::Eah => "eah",
            ExperimentKind::MeanErgodic => "mean_ergodic",
            ExperimentKind::MatrixDecay => "matrix_decay",
        }
    }

    fn default_points(self) -> usize {
        match self {
            ExperimentKind::HittingTime => 500,
            ExperimentKind::MeanErgodic => 10_000,
            ExperimentKind::MatrixDecay => 200_000,
            _ => 200,
        }
    }

    fn default_m_max(self) -> u64 {
        match self {
            ExperimentKind::HittingTime | ExperimentKind::CuspLoglaw => 10_000_000,
            ExperimentKind::Sbc | ExperimentKind::Eah => 1_000_000,
            ExperimentKind::MeanErgodic => 1 << 16,
            ExperimentKind::MatrixDecay => 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowName {
    Geodesic,
    Horocycle,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetName {
    Cusp,
    Ball,
}

/// Flat experiment configuration; every key is documented in [`CONFIG_KEYS`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub flow: FlowName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_target")]
    pub target: TargetName,
    #[serde(default)]
    pub ball_center_re: f64,
    #[serde(default = "default_ball_im")]
    pub ball_center_im: f64,
    #[serde(default = "default_ball_radius")]
    pub ball_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_measures")]
    pub measures: Vec<f64>,
    #[serde(default = "default_one")]
    pub schedule_c: f64,
    #[serde(default = "default_one")]
    pub schedule_eta: f64,
    #[serde(default = "default_band_c")]
    pub band_c: f64,
    #[serde(default = "default_band_power")]
    pub band_log_power: f64,
    #[serde(default = "default_mu_f")]
    pub mu_f: f64,
    #[serde(default = "default_m_min")]
    pub m_min: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<u64>>,
}

fn default_target() -> TargetName {
    TargetName::Cusp
}
fn default_ball_im() -> f64 {
    1.5
}
fn default_ball_radius() -> f64 {
    0.25
}
fn default_measures() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}
fn default_one() -> f64 {
    1.0
}
fn default_band_c() -> f64 {
    10.0
}
fn default_band_power() -> f64 {
    2.0
}
fn default_mu_f() -> f64 {
    0.1
}
fn default_m_min() -> u64 {
    16
}

/// `(key, description)` for every configuration key.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("experiment", "hitting_time | cusp_loglaw | sbc | eah | mean_ergodic | matrix_decay (required)"),
    ("flow", "geodesic | horocycle | custom (required)"),
    ("generator", "sl2 matrix [[a,b],[c,-a]] for flow = custom"),
    ("target", "cusp | ball (default cusp)"),
    ("ball_center_re", "ball center, real part (default 0)"),
    ("ball_center_im", "ball center, imaginary part (default 1.5)"),
    ("ball_radius", "ball radius at t = 0, at most 0.25 (default 0.25)"),
    ("n_points", "number of Haar sample points (default depends on experiment)"),
    ("m_max", "orbit budget in steps (default depends on experiment)"),
    ("seed", "64-bit seed (--seed overrides; if absent, HOMFLOW_SEED, else 0)"),
    ("workers", "worker threads (default: all cores)"),
    ("measures", "hitting_time: target measures, each below 1/2 (default 1e-2,1e-3,1e-4)"),
    ("schedule_c", "sbc/eah: schedule constant c in min(cap, c m^-eta) (default 1)"),
    ("schedule_eta", "sbc/eah: schedule exponent eta (default 1)"),
    ("band_c", "sbc: envelope constant C in C sqrt(E)(log E)^p (default 10)"),
    ("band_log_power", "sbc: envelope log power p (default 2)"),
    ("mu_f", "mean_ergodic/matrix_decay: measure of the indicator target (default 0.1)"),
    ("m_min", "mean_ergodic: smallest averaging length, a power of two (default 16)"),
    ("t_grid", "matrix_decay: integer times in [1, 1000] (default 1..=m_max)"),
];

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, flow: FlowName) -> Self {
        ExperimentConfig {
            experiment,
            flow,
            generator: None,
            target: TargetName::Cusp,
            ball_center_re: 0.0,
            ball_center_im: default_ball_im(),
            ball_radius: default_ball_radius(),
            n_points: None,
            m_max: None,
            seed: 0,
            workers: None,
            measures: default_measures(),
            schedule_c: 1.0,
            schedule_eta: 1.0,
            band_c: default_band_c(),
            band_log_power: default_band_power(),
            mu_f: default_mu_f(),
            m_min: default_m_min(),
            t_grid: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn n_points(&self) -> usize {
        self.n_points.unwrap_or_else(|| self.experiment.default_points())
    }

    pub fn m_max(&self) -> u64 {
        self.m_max.unwrap_or_else(|| self.experiment.default_m_max())
    }

    pub fn flow_spec(&self) -> Result<FlowSpec> {
        let kind = match (self.flow, &self.generator) {
            (FlowName::Geodesic, None) => FlowKindSpec::Geodesic,
            (FlowName::Horocycle, None) => FlowKindSpec::Horocycle,
            (FlowName::Custom, Some(rows)) => FlowKindSpec::Custom { generator: AlgebraElement::from_rows(rows)? },
            (FlowName::Custom, None) => {
                return Err(Error::InvalidConfig("flow = custom needs the key `generator`".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidConfig("`generator` is only used with flow = custom".into()))
            }
        };
        FlowSpec::new(kind)
    }

    pub fn target_family(&self) -> Result<TargetFamily> {
        let fam = match self.target {
            TargetName::Cusp => TargetFamily::CuspNeighborhood,
            TargetName::Ball => TargetFamily::ShrinkingBall {
                center_re: self.ball_center_re,
                center_im: self.ball_center_im,
                radius: self.ball_radius,
            },
        };
        fam.validate()?;
        Ok(fam)
    }

    /// Checks every key relevant to the chosen experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_points() == 0 {
            return bad("n_points must be >= 1".into());
        }
        if self.m_max() == 0 {
            return bad("m_max must be >= 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        self.flow_spec()?;
        self.target_family()?;
        Ok(())
    }
}

/// One CSV row: `experiment,m_or_t,statistic,value,stderr,n_censored`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment: &'static str,
    pub m_or_t: f64,
    pub statistic: String,
    pub value: f64,
    pub stderr: f64,
    pub n_censored: u64,
}

impl CsvRow {
    fn new(experiment: ExperimentKind, m_or_t: f64, statistic: impl Into<String>, value: f64, stderr: f64) -> Self {
        CsvRow { experiment: experiment.name(), m_or_t, statistic: statistic.into(), value, stderr, n_censored: 0 }
    }

    fn censored(mut self, n: u64) -> Self {
        self.n_censored = n;
        self
    }
}

/// Result of any experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentResult {
    HittingTime(HittingLawResult),
    CuspLoglaw(LogLawResult),
    Sbc(SBCResult),
    Eah(EAHResult),
    MeanErgodic(MeanErgodicResult),
    MatrixDecay(MatrixDecayResult),
}

impl ExperimentResult {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        match self {
            ExperimentResult::HittingTime(r) => r.csv_rows(),
            ExperimentResult::CuspLoglaw(r) => r.csv_rows(),
            ExperimentResult::Sbc(r) => r.csv_rows(),
            ExperimentResult::Eah(r) => r.csv_rows(),
            ExperimentResult::MeanErgodic(r) => r.csv_rows(),
            ExperimentResult::MatrixDecay(r) => r.csv_rows(),
        }
    }

    /// CSV text with `extra` columns appended to every row.
    pub fn to_csv(&self, extra: &[(&str, &str)]) -> String {
        let mut out = String::from(CSV_HEADER);
        for (k, _) in extra {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for r in self.csv_rows() {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.experiment, r.m_or_t, r.statistic, r.value, r.stderr, r.n_censored
            );
            for (_, v) in extra {
                out.push(',');
                out.push_str(v);
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::HittingTime => ExperimentResult::HittingTime(run_hitting_time_law(cfg)?),
        ExperimentKind::CuspLoglaw => ExperimentResult::CuspLoglaw(run_cusp_loglaw(cfg)?),
        ExperimentKind::Sbc => ExperimentResult::Sbc(run_sbc(cfg, &MeasureSchedule::from_config(cfg)?)?),
        ExperimentKind::Eah => ExperimentResult::Eah(run_eah(cfg, cfg.schedule_eta)?),
        ExperimentKind::MeanErgodic => ExperimentResult::MeanErgodic(run_mean_ergodic(cfg)?),
        ExperimentKind::MatrixDecay => ExperimentResult::MatrixDecay(run_matrix_decay(cfg)?),
    })
}

/// The random stream of sample point `index`.
pub fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Haar point number `index` of a run with `seed`.
pub fn sample_point(seed: u64, index: usize) -> CosetPoint {
    haar_sample(&mut point_rng(seed, index))
}

/// Maps `f` over point indices on a pool of `workers` threads, in order.
pub(crate) fn par_points<T, F>(cfg: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, CosetPoint) -> Result<T> + Sync + Send,
{
    let n = cfg.n_points();
    let work = || (0..n).into_par_iter().map(|i| f(i, sample_point(cfg.seed, i))).collect::<Result<Vec<T>>>();
    match cfg.workers {
        None => work(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {w} workers: {e}")))?
            .install(work),
    }
}

/// Powers of two up to `m_max`, with `m_max` appended if it is not one.
pub fn dyadic_checkpoints(m_min: u64, m_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|k| 1u64 << k).filter(|&m| m >= m_min && m <= m_max).collect();
    if out.last() != Some(&m_max) && m_max >= m_min {
        out.push(m_max);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoints() {
        assert_eq!(dyadic_checkpoints(1, 10), vec![1, 2, 4, 8, 10]);
        assert_eq!(dyadic_checkpoints(16, 64), vec![16, 32, 64]);
    }

    #[test]
    fn config_json() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"sbc","flow":"horocycle","m_max":1000}"#).unwrap();
        assert_eq!(c.n_points(), 200);
        assert_eq!(c.m_max(), 1000);
        let e = ExperimentConfig::from_json(r#"{"experiment":"sbc","flow":"horocycle","m_mx":1000}"#).unwrap_err();
        assert!(e.to_string().contains("m_mx"));
        let e = ExperimentConfig::from_json(r#"{"experiment":"sbc"}"#).unwrap_err();
        assert!(e.to_string().contains("flow"));
    }

    #[test]
    fn keys_documented() {
        let c = ExperimentConfig::new(ExperimentKind::Sbc, FlowName::Custom);
        let mut v = serde_json::to_value(&c).unwrap();
        let obj = v.as_object_mut().unwrap();
        for k in ["generator", "n_points", "m_max", "workers", "t_grid"] {
            obj.insert(k.into(), serde_json::Value::Null);
        }
        for k in obj.keys() {
            assert!(CONFIG_KEYS.iter().any(|(n, _)| n == k), "{k} undocumented");
        }
        assert_eq!(obj.len(), CONFIG_KEYS.len());
    }

    #[test]
    fn streams_are_independent_of_order() {
        assert_eq!(sample_point(5, 3), sample_point(5, 3));
        assert_ne!(sample_point(5, 3), sample_point(5, 4));
        assert_ne!(sample_point(5, 3), sample_point(6, 3));
    }
}
