//! The Tucker model: a core tensor with one factor matrix per mode.

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, Matrix};

/// Core tensor `S` of shape `(r_1, .., r_N)` plus factors `A^(n)` of shape
/// `I_n x r_n`. All entries are kept nonnegative by the solver.
#[derive(Debug, Clone)]
pub struct TuckerModel {
    pub core: DenseTensor,
    pub factors: Vec<Matrix>,
}

impl TuckerModel {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} factors for an order-{} core",
                factors.len(),
                core.order()
            )));
        }
        for (n, f) in factors.iter().enumerate() {
            if f.cols() != core.shape()[n] {
                return Err(Error::ShapeMismatch(format!(
                    "factor {} has {} columns, core extent is {}",
                    n,
                    f.cols(),
                    core.shape()[n]
                )));
            }
            if f.rows() < f.cols() {
                return Err(Error::RankExceedsDim {
                    mode: n,
                    rank: f.cols(),
                    dim: f.rows(),
                });
            }
        }
        Ok(Self { core, factors })
    }

    pub fn order(&self) -> usize {
        self.core.order()
    }

    pub fn ranks(&self) -> &[usize] {
        self.core.shape()
    }

    /// Data-space extents `(I_1, .., I_N)`.
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }

    /// Full reconstruction `S x_1 A^(1) .. x_N A^(N)`.
    pub fn reconstruct(&self) -> DenseTensor {
        let mut t = self.core.clone();
        for (n, f) in self.factors.iter().enumerate() {
            t = t
                .mode_product(f, n)
                .expect("model factors consistent with core");
        }
        t
    }

    /// The factor context `B^(n)T`: the mode-n unfolding of the core
    /// contracted with every factor except `A^(n)`. Shaped `r_n x prod_{k!=n} I_k`
    /// and satisfying `fold_n(A^(n) B^(n)T) = reconstruct()`. Avoids forming
    /// the explicit Kronecker product of the other factors.
    pub fn factor_context(&self, mode: usize) -> Result<Matrix> {
        if mode >= self.order() {
            return Err(Error::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        let mut t = self.core.clone();
        for (n, f) in self.factors.iter().enumerate() {
            if n == mode {
                continue;
            }
            t = t.mode_product(f, n)?;
        }
        t.unfold(mode)
    }

    pub fn all_finite(&self) -> bool {
        self.core.all_finite() && self.factors.iter().all(|f| f.data().iter().all(|x| x.is_finite()))
    }

    pub fn min_entry(&self) -> f64 {
        let mut m = self.core.min();
        for f in &self.factors {
            m = f.data().iter().copied().fold(m, f64::min);
        }
        m
    }
}

/// The Kronecker factor `A^(N) ⊗ .. ⊗ A^(1)` mapping `vec(S)` to the
/// vectorized reconstruction under the first-fastest linearization.
/// Exponential in size; meant for oracle checks on small models.
pub fn explicit_kronecker_factor(model: &TuckerModel) -> Matrix {
    let mut f = Matrix::identity(1);
    for a in model.factors.iter().rev() {
        f = f.kronecker(a);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_model(dims: &[usize], ranks: &[usize], seed: u64) -> TuckerModel {
        let mut r = rng::stream(seed, "model-test", 0);
        let core_len: usize = ranks.iter().product();
        let core = DenseTensor::new(
            ranks.to_vec(),
            (0..core_len).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect(),
        )
        .unwrap();
        let factors = dims
            .iter()
            .zip(ranks)
            .map(|(&d, &k)| {
                Matrix::new(d, k, (0..d * k).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect())
                    .unwrap()
            })
            .collect();
        TuckerModel::new(core, factors).unwrap()
    }

    #[test]
    fn identity_factors_reconstruct_the_core() {
        let mut r = rng::stream(3, "model-test", 1);
        let core = DenseTensor::new(
            vec![2, 3, 2],
            (0..12).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect(),
        )
        .unwrap();
        let factors = vec![Matrix::identity(2), Matrix::identity(3), Matrix::identity(2)];
        let m = TuckerModel::new(core.clone(), factors).unwrap();
        assert_eq!(m.reconstruct().data(), core.data());
        // with identity factors the context is the plain unfolding
        for mode in 0..3 {
            let b = m.factor_context(mode).unwrap();
            assert_eq!(b.data(), core.unfold(mode).unwrap().data());
        }
    }

    #[test]
    fn zero_core_reconstructs_to_zero() {
        let core = DenseTensor::zeros(vec![2, 2]).unwrap();
        let f0 = Matrix::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let f1 = Matrix::new(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let m = TuckerModel::new(core, vec![f0, f1]).unwrap();
        assert!(m.reconstruct().data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_way_context_is_core_times_other_factor() {
        let m = random_model(&[4, 5], &[2, 3], 7);
        let b = m.factor_context(0).unwrap();
        let expect = m.core.unfold(0).unwrap().matmul(&m.factors[1].transpose());
        assert!(b.max_abs_diff(&expect) <= 1e-12);
    }

    #[test]
    fn context_matches_explicit_kronecker_construction() {
        let m = random_model(&[3, 4, 2], &[2, 2, 2], 9);
        for mode in 0..3 {
            let b = m.factor_context(mode).unwrap();
            // B^(n)T = S_(n) (A^(N) ⊗ .. skip n .. ⊗ A^(1))^T
            let mut kron = Matrix::identity(1);
            for (k, f) in m.factors.iter().enumerate().rev() {
                if k == mode {
                    continue;
                }
                kron = kron.kronecker(f);
            }
            let expect = m.core.unfold(mode).unwrap().matmul_transb(&kron);
            assert!(b.max_abs_diff(&expect) <= 1e-12);
            // fold_n(A^(n) B^(n)T) is the full reconstruction
            let recon =
                DenseTensor::fold(&m.factors[mode].matmul(&b), mode, &[3, 4, 2]).unwrap();
            let full = m.reconstruct();
            for (x, y) in recon.data().iter().zip(full.data()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn vectorized_reconstruction_matches_kronecker_factor() {
        let m = random_model(&[3, 2, 4], &[2, 2, 3], 21);
        let f = explicit_kronecker_factor(&m);
        let via_f = f.matvec(m.core.vectorize());
        let direct = m.reconstruct();
        assert_eq!(via_f.len(), direct.len());
        for (a, b) in via_f.iter().zip(direct.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn rank_above_dimension_is_rejected() {
        let core = DenseTensor::zeros(vec![4, 2]).unwrap();
        let f0 = Matrix::zeros(3, 4);
        let f1 = Matrix::zeros(5, 2);
        match TuckerModel::new(core, vec![f0, f1]) {
            Err(Error::RankExceedsDim { mode: 0, rank: 4, dim: 3 }) => {}
            other => panic!("expected RankExceedsDim, got {:?}", other),
        }
    }
}
