use serde::Serialize;

/// Mean of a stationary series with its batch-means standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BatchMeans {
    pub mean: f64,
    pub std_error: f64,
    pub batches: usize,
}

/// Means of consecutive equal-length batches; a trailing remainder shorter
/// than one batch is dropped.
pub fn batch_averages(series: &[f64], batches: usize) -> Vec<f64> {
    let size = series.len() / batches.max(1);
    if size == 0 {
        return Vec::new();
    }
    series.chunks_exact(size).take(batches).map(|c| c.iter().sum::<f64>() / size as f64).collect()
}

/// Treats the given batch averages as independent draws.
pub fn pooled(averages: &[f64]) -> BatchMeans {
    let b = averages.len();
    if b == 0 {
        return BatchMeans { mean: f64::NAN, std_error: f64::NAN, batches: 0 };
    }
    let mean = averages.iter().sum::<f64>() / b as f64;
    let std_error = if b > 1 {
        let var = averages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    } else {
        f64::INFINITY
    };
    BatchMeans { mean, std_error, batches: b }
}

pub fn batch_means(series: &[f64], batches: usize) -> BatchMeans {
    pooled(&batch_averages(series, batches))
}

/// Binomial proportion with a 95% Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        const Z: f64 = 1.959963984540054;
        if trials == 0 {
            return Self { successes, trials, estimate: f64::NAN, lower: 0.0, upper: 1.0 };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let denom = 1.0 + Z * Z / n;
        let centre = (p + Z * Z / (2.0 * n)) / denom;
        let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
        let lower = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
        let upper = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
        Self { successes, trials, estimate: p, lower, upper }
    }
}
