//! Robust graph-regularized nonnegative Tucker decomposition.
//!
//! This crate factorizes a nonnegative N-way tensor into a small core tensor
//! and per-mode nonnegative factor matrices, using half-quadratic multiplicative
//! updates that tolerate gross corruption. Three robust error functionals are
//! provided (Gaussian-kernel correntropy, Huber, Cauchy) next to the plain
//! quadratic baseline; a heat-kernel k-NN graph over the sample mode supplies
//! a Laplacian smoothness term on the last factor matrix, whose rows serve as
//! sample representations for clustering.
//!
//! Module map:
//! - [`tensor`]: dense tensors, unfolding/folding and mode products
//! - [`model`]: the Tucker model (core + factors) and reconstruction
//! - [`graph`]: k-NN heat-kernel affinity, degree and Laplacian matrices
//! - [`loss`]: robust error functionals and their half-quadratic weight maps
//! - [`solver`]: the alternating optimizer, fit reports, out-of-sample projection
//! - [`noise`]: Laplace and salt & pepper corruption generators
//! - [`eval`]: seeded k-means, clustering accuracy (optimal relabeling) and NMI
//! - [`io`]: the DTF tensor file format, label files, CSV/JSON emission
//! - [`harness`]: the noise-sweep benchmark grid
//! - [`synth`]: planted clustered tensors for desk-scale experiments

pub mod error;
pub mod eval;
pub mod graph;
pub mod harness;
pub mod io;
pub mod loss;
pub mod model;
pub mod noise;
pub mod rng;
pub mod solver;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use graph::{AffinityGraph, TauPolicy};
pub use loss::{RobustLoss, ScalePolicy, ScaleState};
pub use model::TuckerModel;
pub use solver::{FitOutcome, FitReport, SolverConfig, StopReason};
pub use tensor::{DenseTensor, Matrix};
