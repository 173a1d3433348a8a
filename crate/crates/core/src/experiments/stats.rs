use serde::Serialize;

/// Linear-interpolation quantile of sorted data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Quantile of observed values plus `n_censored` right-censored ones that
/// exceed every observation. `NaN` when the quantile falls among the
/// censored values.
pub fn censored_quantile(observed: &[f64], n_censored: usize, q: f64) -> f64 {
    let mut v = observed.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() + n_censored;
    if n == 0 {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (n - 1) as f64;
    if pos.ceil() as usize >= v.len() {
        return f64::NAN;
    }
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quartiles {
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

impl Quartiles {
    pub fn of(observed: &[f64], n_censored: usize) -> Self {
        let q = |p| censored_quantile(observed, n_censored, p);
        Quartiles { q05: q(0.05), q25: q(0.25), median: q(0.5), q75: q(0.75) }
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&v, 0.1), 1.4);
        assert_eq!(censored_quantile(&[3.0, 1.0, 2.0], 2, 0.5), 3.0);
        assert!(censored_quantile(&[1.0, 2.0], 3, 0.5).is_nan());
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
