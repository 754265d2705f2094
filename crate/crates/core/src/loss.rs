//! Robust error functionals and their half-quadratic weight maps.
//!
//! Each variant defines a penalty `g` on residual entries and the matching
//! weight `w(e) = g'(e)/e` (up to a positive constant), which the solver uses
//! as a soft outlier mask: weights live in (0, 1] and shrink as |e| grows.

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Floor applied to every resolved scale so a perfect fit cannot divide by zero.
pub const EPS_SCALE: f64 = 1e-8;

/// How a variant's scale parameter is obtained each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalePolicy {
    /// Fixed user-supplied value.
    Fixed(f64),
    /// Data-driven: mean-square based for the Gaussian kernel, median of |e|
    /// for Huber and Cauchy.
    Adaptive,
}

/// Robust loss variant with its scale policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobustLoss {
    /// Plain squared error; weights identically 1 (the plain NTD special case).
    Quadratic,
    /// Correntropy-induced metric with Gaussian kernel width `sigma`.
    Cim { sigma: ScalePolicy },
    /// Huber penalty with cutoff `c`.
    Huber { c: ScalePolicy },
    /// Cauchy penalty `ln(1 + (e/gamma)^2)`.
    Cauchy { gamma: ScalePolicy },
}

impl RobustLoss {
    pub fn name(&self) -> &'static str {
        match self {
            RobustLoss::Quadratic => "quadratic",
            RobustLoss::Cim { .. } => "cim",
            RobustLoss::Huber { .. } => "huber",
            RobustLoss::Cauchy { .. } => "cauchy",
        }
    }
}

/// Scale parameter resolved for the current iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleState {
    /// sigma for CIM, c for Huber, gamma for Cauchy; unused for Quadratic.
    pub value: f64,
    /// Whether the value came from the data or was fixed by the caller.
    pub adaptive: bool,
}

impl ScaleState {
    pub fn fixed(value: f64) -> Self {
        Self {
            value,
            adaptive: false,
        }
    }
}

fn median_abs(data: &[f64]) -> f64 {
    let mut v: Vec<f64> = data.iter().map(|x| x.abs()).collect();
    let n = v.len();
    let mid = n / 2;
    v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let hi = v[mid];
    if n % 2 == 1 {
        hi
    } else {
        // even count: average the two middle order statistics
        let lo = v[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// Resolves the variant's scale from the residual tensor.
///
/// Adaptive rules: CIM takes `sigma^2 = max(mean(e^2)/2, EPS_SCALE)`; Huber
/// and Cauchy take the median of |e| floored at `EPS_SCALE`. Fixed values
/// pass through after a positivity check.
pub fn resolve_scale(loss: &RobustLoss, residual: &DenseTensor) -> Result<ScaleState> {
    if residual.is_empty() {
        return Err(Error::InvalidArgument("empty residual".into()));
    }
    let policy = match loss {
        RobustLoss::Quadratic => return Ok(ScaleState::fixed(1.0)),
        RobustLoss::Cim { sigma } => sigma,
        RobustLoss::Huber { c } => c,
        RobustLoss::Cauchy { gamma } => gamma,
    };
    match *policy {
        ScalePolicy::Fixed(v) => {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "scale must be positive and finite, got {v}"
                )));
            }
            Ok(ScaleState::fixed(v))
        }
        ScalePolicy::Adaptive => {
            let value = match loss {
                RobustLoss::Cim { .. } => {
                    let ms = residual.sum_squares() / residual.len() as f64;
                    (ms / 2.0).max(EPS_SCALE).sqrt()
                }
                _ => median_abs(residual.data()).max(EPS_SCALE),
            };
            Ok(ScaleState {
                value,
                adaptive: true,
            })
        }
    }
}

/// Total penalty of a residual tensor under the variant.
pub fn loss_value(loss: &RobustLoss, residual: &DenseTensor, scale: &ScaleState) -> Result<f64> {
    if !residual.all_finite() {
        return Err(Error::NonFinite {
            context: "residual".into(),
            iteration: None,
        });
    }
    let v = match loss {
        RobustLoss::Quadratic => residual.sum_squares(),
        RobustLoss::Cim { .. } => {
            let sigma = scale.value;
            let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
            let mean_kernel: f64 = residual
                .iter()
                .map(|&e| norm * (-e * e / (2.0 * sigma * sigma)).exp())
                .sum::<f64>()
                / residual.len() as f64;
            1.0 - mean_kernel
        }
        RobustLoss::Huber { .. } => {
            let c = scale.value;
            residual
                .iter()
                .map(|&e| {
                    let a = e.abs();
                    if a <= c {
                        e * e
                    } else {
                        2.0 * c * a - c * c
                    }
                })
                .sum()
        }
        RobustLoss::Cauchy { .. } => {
            let g = scale.value;
            residual.iter().map(|&e| (1.0 + (e / g) * (e / g)).ln()).sum()
        }
    };
    Ok(v)
}

/// Per-entry half-quadratic weight of a single residual value.
pub fn weight_of(loss: &RobustLoss, e: f64, scale: &ScaleState) -> f64 {
    match loss {
        RobustLoss::Quadratic => 1.0,
        RobustLoss::Cim { .. } => {
            let s = scale.value;
            (-e * e / (2.0 * s * s)).exp()
        }
        RobustLoss::Huber { .. } => {
            let c = scale.value;
            let a = e.abs();
            if a <= c {
                1.0
            } else {
                c / a
            }
        }
        RobustLoss::Cauchy { .. } => {
            let g = scale.value;
            1.0 / (1.0 + (e / g) * (e / g))
        }
    }
}

/// Elementwise half-quadratic weights of a residual tensor; values in (0, 1].
pub fn weight_map(
    loss: &RobustLoss,
    residual: &DenseTensor,
    scale: &ScaleState,
) -> DenseTensor {
    residual.map(|e| weight_of(loss, e, scale))
}
