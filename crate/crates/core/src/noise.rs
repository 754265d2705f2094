//! Corruption generators for nonnegative tensor data.
//!
//! Outputs are clamped to `[0, value_max]` so corrupted tensors stay valid
//! factorization inputs, and every generator is bit-reproducible per seed.

use crate::error::{Error, Result};
use crate::rng::{self, ChaCha8Rng};
use crate::tensor::DenseTensor;

/// Which corruption to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Laplace,
    SaltPepper,
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Laplace => "laplace",
            NoiseKind::SaltPepper => "salt_pepper",
        }
    }
}

/// A corruption protocol: `level` is the Laplace scale delta or the
/// salt & pepper corrupted fraction.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: f64,
    pub value_max: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        match self.kind {
            NoiseKind::Laplace => add_laplace(x, self.level, self.value_max, self.seed),
            NoiseKind::SaltPepper => add_salt_pepper(x, self.level, self.value_max, self.seed),
        }
    }
}

/// One draw from Laplace(0, delta) by inverse-CDF sampling:
/// `eta = -delta * sgn(u - 1/2) * ln(1 - 2|u - 1/2|)` with u uniform on (0, 1).
fn sample_laplace(rng: &mut ChaCha8Rng, delta: f64) -> f64 {
    let u = rng::open01(rng) - 0.5;
    -delta * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Adds i.i.d. Laplace(0, delta) noise to every entry, clamped to
/// `[0, value_max]`.
pub fn add_laplace(x: &DenseTensor, delta: f64, value_max: f64, seed: u64) -> Result<DenseTensor> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "laplace scale must be > 0, got {delta}"
        )));
    }
    if !value_max.is_finite() || value_max <= 0.0 {
        return Err(Error::InvalidArgument("value_max must be > 0".into()));
    }
    let mut rng = rng::stream(seed, "laplace", 0);
    let mut out = x.clone();
    for v in out.data_mut() {
        *v = (*v + sample_laplace(&mut rng, delta)).clamp(0.0, value_max);
    }
    Ok(out)
}

/// Sets exactly `round(fraction * len)` distinct entries to 0 or `value_max`
/// with equal probability. Positions are drawn uniformly without replacement
/// by a partial Fisher-Yates shuffle.
pub fn add_salt_pepper(
    x: &DenseTensor,
    fraction: f64,
    value_max: f64,
    seed: u64,
) -> Result<DenseTensor> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "fraction must be in [0, 1], got {fraction}"
        )));
    }
    if !value_max.is_finite() || value_max <= 0.0 {
        return Err(Error::InvalidArgument("value_max must be > 0".into()));
    }
    let len = x.len();
    let m = (fraction * len as f64).round() as usize;
    let mut rng = rng::stream(seed, "salt_pepper", 0);
    let mut positions: Vec<usize> = (0..len).collect();
    let mut out = x.clone();
    for i in 0..m {
        let j = i + rng::index(&mut rng, len - i);
        positions.swap(i, j);
        out.data_mut()[positions[i]] = if rng::coin(&mut rng) { value_max } else { 0.0 };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(values: Vec<f64>) -> DenseTensor {
        DenseTensor::new(vec![values.len()], values).unwrap()
    }

    #[test]
    fn vanishing_delta_leaves_data_unchanged() {
        let x = flat(vec![0.3, 0.5, 0.9, 120.0]);
        let y = add_laplace(&x, 1e-300, 255.0, 5).unwrap();
        for (a, b) in x.data().iter().zip(y.data()) {
            assert!((a - b).abs() <= 1e-290);
        }
    }

    #[test]
    fn laplace_rejects_nonpositive_delta() {
        let x = flat(vec![1.0]);
        assert!(add_laplace(&x, 0.0, 255.0, 1).is_err());
        assert!(add_laplace(&x, -3.0, 255.0, 1).is_err());
    }

    #[test]
    fn laplace_mean_absolute_deviation_matches_scale() {
        let mut rng = rng::stream(9, "laplace-mc", 0);
        let delta = 40.0;
        let n = 1_000_000;
        let mean_abs: f64 = (0..n)
            .map(|_| sample_laplace(&mut rng, delta).abs())
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean_abs - delta).abs() <= 0.5,
            "mean |eta| = {mean_abs}, expected {delta} +- 0.5"
        );
    }

    #[test]
    fn laplace_sweep_stays_in_range() {
        let x = flat((0..64).map(|i| (i * 4) as f64).collect());
        for delta in [40.0, 80.0, 120.0, 160.0, 200.0, 240.0, 280.0] {
            let y = add_laplace(&x, delta, 255.0, 77).unwrap();
            assert!(y.data().iter().all(|&v| (0.0..=255.0).contains(&v)));
            assert!(y.data() != x.data(), "delta {delta} changed nothing");
        }
    }

    #[test]
    fn laplace_is_deterministic_per_seed() {
        let x = flat((0..100).map(|i| i as f64).collect());
        let a = add_laplace(&x, 20.0, 255.0, 123).unwrap();
        let b = add_laplace(&x, 20.0, 255.0, 123).unwrap();
        let c = add_laplace(&x, 20.0, 255.0, 124).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn salt_pepper_extremes() {
        let x = flat(vec![0.5; 40]);
        let none = add_salt_pepper(&x, 0.0, 1.0, 3).unwrap();
        assert_eq!(none.data(), x.data());

        let all = add_salt_pepper(&x, 1.0, 1.0, 3).unwrap();
        assert!(all.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn salt_pepper_corrupts_exact_count() {
        // interior values so every corruption is visible
        let x = DenseTensor::new(vec![10, 10], vec![0.5; 100]).unwrap();
        let y = add_salt_pepper(&x, 0.2, 1.0, 9).unwrap();
        let differing = x
            .data()
            .iter()
            .zip(y.data())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(differing, 20);
        assert!(y
            .data()
            .iter()
            .zip(x.data())
            .all(|(y, x)| y == x || *y == 0.0 || *y == 1.0));
    }

    #[test]
    fn salt_pepper_is_deterministic_per_seed() {
        let x = flat((0..50).map(|i| 0.3 + 0.01 * i as f64).collect());
        let a = add_salt_pepper(&x, 0.3, 1.0, 21).unwrap();
        let b = add_salt_pepper(&x, 0.3, 1.0, 21).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn salt_pepper_rejects_bad_fraction() {
        let x = flat(vec![0.5]);
        assert!(add_salt_pepper(&x, -0.1, 1.0, 1).is_err());
        assert!(add_salt_pepper(&x, 1.5, 1.0, 1).is_err());
    }
}
