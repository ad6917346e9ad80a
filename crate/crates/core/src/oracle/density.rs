use statrs::distribution::{Beta, Continuous, Normal};

use crate::error::{Error, Result};

/// Gaussian supports are truncated at this many standard deviations.
pub const GAUSSIAN_TAIL: f64 = 10.0;

/// A density with a closed-form pdf, used as ground truth for estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KnownDensity {
    Gaussian1D { mean: f64, std: f64 },
    Gaussian2D { mean: [f64; 2], cov: [[f64; 2]; 2] },
    Uniform1D { low: f64, high: f64 },
    Beta1D { a: f64, b: f64 },
}

impl KnownDensity {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            KnownDensity::Gaussian1D { mean, std } => mean.is_finite() && std > 0.0 && std.is_finite(),
            KnownDensity::Gaussian2D { mean, cov } => {
                mean.iter().all(|m| m.is_finite())
                    && cov.iter().flatten().all(|c| c.is_finite())
                    && cov[0][1] == cov[1][0]
                    && cov[0][0] > 0.0
                    && cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0] > 0.0
            }
            KnownDensity::Uniform1D { low, high } => low.is_finite() && high.is_finite() && low < high,
            KnownDensity::Beta1D { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid density parameters: {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            KnownDensity::Gaussian2D { .. } => 2,
            _ => 1,
        }
    }

    /// Log-density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        match *self {
            KnownDensity::Gaussian1D { mean, std } => Normal::new(mean, std).expect("validated").ln_pdf(x[0]),
            KnownDensity::Gaussian2D { mean, cov } => {
                let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                let (dx, dy) = (x[0] - mean[0], x[1] - mean[1]);
                let quad = (cov[1][1] * dx * dx - 2.0 * cov[0][1] * dx * dy + cov[0][0] * dy * dy) / det;
                -0.5 * quad - (2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln()
            }
            KnownDensity::Uniform1D { low, high } => {
                if x[0] >= low && x[0] <= high {
                    -(high - low).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            KnownDensity::Beta1D { a, b } => {
                if x[0] > 0.0 && x[0] < 1.0 {
                    Beta::new(a, b).expect("validated").ln_pdf(x[0])
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Per-axis integration bounds.
    pub fn support(&self) -> Vec<(f64, f64)> {
        match *self {
            KnownDensity::Gaussian1D { mean, std } => {
                vec![(mean - GAUSSIAN_TAIL * std, mean + GAUSSIAN_TAIL * std)]
            }
            KnownDensity::Gaussian2D { mean, cov } => (0..2)
                .map(|a| {
                    let s = GAUSSIAN_TAIL * cov[a][a].sqrt();
                    (mean[a] - s, mean[a] + s)
                })
                .collect(),
            KnownDensity::Uniform1D { low, high } => vec![(low, high)],
            KnownDensity::Beta1D { .. } => vec![(0.0, 1.0)],
        }
    }

    pub(crate) fn mean(&self) -> Vec<f64> {
        match *self {
            KnownDensity::Gaussian1D { mean, .. } => vec![mean],
            KnownDensity::Gaussian2D { mean, .. } => mean.to_vec(),
            KnownDensity::Uniform1D { low, high } => vec![0.5 * (low + high)],
            KnownDensity::Beta1D { a, b } => vec![a / (a + b)],
        }
    }

    /// Precision matrix of a Gaussian density (1×1 or 2×2, row-major).
    pub(crate) fn precision(&self) -> Option<Vec<f64>> {
        match *self {
            KnownDensity::Gaussian1D { std, .. } => Some(vec![1.0 / (std * std)]),
            KnownDensity::Gaussian2D { cov, .. } => {
                let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
                Some(vec![cov[1][1] / det, -cov[0][1] / det, -cov[1][0] / det, cov[0][0] / det])
            }
            _ => None,
        }
    }
}
