//! Least-squares power-law fits used by the sweep reports.

use serde::Serialize;

/// `log₁₀ y = slope·log₁₀ x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub slope: f64,
    pub intercept: f64,
}

impl PowerLaw {
    /// Prefactor `c` in `y ≈ c·x^slope`.
    pub fn coefficient(&self) -> f64 {
        10f64.powf(self.intercept)
    }
}

/// Ordinary least squares on `(log₁₀ x, log₁₀ |y|)`. `None` when fewer than
/// two usable points remain after dropping zero or non-finite entries.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<PowerLaw> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.abs().log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(PowerLaw { slope, intercept: my - slope * mx })
}

/// `count` points from `start` to `stop`, evenly spaced in `log₁₀`.
pub fn log_space(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.log10(), stop.log10());
            (0..count)
                .map(|i| if i + 1 == count { stop } else { 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64) })
                .collect()
        }
    }
}
