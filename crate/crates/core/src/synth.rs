//! Planted clustered tensors for desk-scale experiments.
//!
//! Samples are generated inside a shared low-rank nonnegative subspace: each
//! cluster owns a prototype core, each sample jitters that core, and the slab
//! `core x_1 U_1 .. x_{N-1} U_{N-1}` becomes one last-mode slice. The result
//! is exactly representable at the generating ranks, so factorization quality
//! on clean data is limited only by optimization, and cluster identity lives
//! in the last-mode representation.

use crate::error::Result;
use crate::rng::{self};
use crate::tensor::{DenseTensor, Matrix};

/// Recipe for a planted clustered tensor.
#[derive(Debug, Clone)]
pub struct ClusterSpec {
    /// Extents of one sample, e.g. `[12, 12]`.
    pub sample_dims: Vec<usize>,
    /// Shared subspace ranks, one per sample mode, e.g. `[3, 3]`.
    pub ranks: Vec<usize>,
    pub clusters: usize,
    pub per_cluster: usize,
    /// Relative strength of the cluster-specific core stripe over the shared
    /// base core; small values give nearly overlapping clusters.
    pub cluster_contrast: f64,
    /// Relative within-cluster jitter of the prototype cores, in [0, 1).
    pub core_jitter: f64,
    pub seed: u64,
}

impl ClusterSpec {
    pub fn n_samples(&self) -> usize {
        self.clusters * self.per_cluster
    }
}

/// Generates the data tensor of shape `(sample_dims.., n_samples)` scaled to
/// `[0, 1]`, together with the planted labels.
pub fn clustered_tensor(spec: &ClusterSpec) -> Result<(DenseTensor, Vec<usize>)> {
    let mut r = rng::stream(spec.seed, "synth", 0);
    let n_modes = spec.sample_dims.len();

    // shared nonnegative bases with near-disjoint row blocks, so the planted
    // factorization is well conditioned and identifiable
    let bases: Vec<Matrix> = spec
        .sample_dims
        .iter()
        .zip(&spec.ranks)
        .map(|(&d, &k)| {
            let mut m = Matrix::zeros(d, k);
            for row in 0..d {
                let block = (row * k) / d;
                for col in 0..k {
                    let v = if col == block {
                        rng::uniform(&mut r, 0.8, 1.2)
                    } else {
                        rng::uniform(&mut r, 0.0, 0.1)
                    };
                    m.set(row, col, v);
                }
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    // prototype cores share a common base; cluster c boosts the entries of
    // its diagonal stripe of the core index grid by (1 + contrast)
    let core_len: usize = spec.ranks.iter().product();
    let base: Vec<f64> = (0..core_len)
        .map(|_| rng::uniform(&mut r, 0.5, 1.0))
        .collect();
    let prototypes: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|c| {
            let mut g = vec![0.0; core_len];
            let mut idx = vec![0usize; spec.ranks.len()];
            for (slot, &b) in g.iter_mut().zip(&base) {
                let stripe: usize = idx.iter().sum::<usize>() % spec.clusters;
                *slot = if stripe == c {
                    b * (1.0 + spec.cluster_contrast)
                } else {
                    b
                };
                for (k, i) in idx.iter_mut().enumerate() {
                    *i += 1;
                    if *i < spec.ranks[k] {
                        break;
                    }
                    *i = 0;
                }
            }
            g
        })
        .collect();

    let slab_len: usize = spec.sample_dims.iter().product();
    let n = spec.n_samples();
    let mut data = vec![0.0; slab_len * n];
    let mut labels = Vec::with_capacity(n);

    for s in 0..n {
        let c = s / spec.per_cluster;
        labels.push(c);
        let jittered: Vec<f64> = prototypes[c]
            .iter()
            .map(|&g| g * (1.0 + spec.core_jitter * rng::uniform(&mut r, -1.0, 1.0)))
            .collect();
        let mut slab = DenseTensor::new(spec.ranks.clone(), jittered)?;
        for (mode, basis) in bases.iter().enumerate().take(n_modes) {
            slab = slab.mode_product(basis, mode)?;
        }
        data[s * slab_len..(s + 1) * slab_len].copy_from_slice(slab.data());
    }

    let peak = data.iter().fold(0.0f64, |m, &v| m.max(v));
    if peak > 0.0 {
        for v in &mut data {
            *v /= peak;
        }
    }

    let mut shape = spec.sample_dims.clone();
    shape.push(n);
    // the last mode is the sample mode and its stride is the slab size
    Ok((DenseTensor::new(shape, data)?, labels))
}
