//! Alternating half-quadratic optimizer for robust manifold-regularized
//! nonnegative Tucker decomposition.
//!
//! Each outer iteration resolves the loss scale, refreshes the weight tensor
//! from the current residual, then applies multiplicative updates to the
//! non-sample factors in ascending mode order, the Laplacian-regularized
//! sample factor, and finally the core tensor. Every update multiplies the
//! current value by a ratio of nonnegative terms, so nonnegativity is
//! preserved unconditionally, and at fixed weights each single update does
//! not increase the augmented objective.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{AffinityGraph, TauPolicy};
use crate::loss::{self, RobustLoss, ScaleState};
use crate::model::TuckerModel;
use crate::rng;
use crate::tensor::{DenseTensor, Matrix};

/// Configuration of a single fit.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Tucker ranks, one per mode.
    pub ranks: Vec<usize>,
    pub loss: RobustLoss,
    /// Manifold regularization weight on the last factor matrix.
    pub lambda: f64,
    /// Neighbor count of the affinity graph (used when lambda > 0).
    pub p: usize,
    /// Heat-kernel width policy.
    pub tau: TauPolicy,
    pub max_iter: usize,
    /// Relative objective-change stopping threshold.
    pub tol: f64,
    /// Damping added to both sides of every multiplicative ratio.
    pub eps_denominator: f64,
    pub seed: u64,
    /// Stop re-resolving the loss scale after this many iterations.
    /// The scale is always resolved at least once.
    pub freeze_scale_after: Option<usize>,
}

impl SolverConfig {
    pub fn new(ranks: Vec<usize>, loss: RobustLoss) -> Self {
        Self {
            ranks,
            loss,
            lambda: 1e5,
            p: 3,
            tau: TauPolicy::Mean,
            max_iter: 500,
            tol: 1e-6,
            eps_denominator: 1e-10,
            seed: 0,
            freeze_scale_after: None,
        }
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        if shape.len() < 2 {
            return Err(Error::InvalidArgument(
                "fit requires a tensor of order >= 2".into(),
            ));
        }
        if self.ranks.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} ranks for an order-{} tensor",
                self.ranks.len(),
                shape.len()
            )));
        }
        for (n, (&r, &d)) in self.ranks.iter().zip(shape).enumerate() {
            if r == 0 {
                return Err(Error::InvalidArgument("zero rank".into()));
            }
            if r > d {
                return Err(Error::RankExceedsDim {
                    mode: n,
                    rank: r,
                    dim: d,
                });
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument("lambda must be >= 0".into()));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tol,
    MaxIter,
}

/// Per-fit diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    /// Augmented objective after each iteration.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub wall_ms: u64,
    pub residual_mean_abs: f64,
    pub residual_max_abs: f64,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Two-column CSV of the objective trajectory.
    pub fn trajectory_csv(&self) -> String {
        let mut s = String::from("iter,objective\n");
        for (i, obj) in self.objective.iter().enumerate() {
            s.push_str(&format!("{},{}\n", i + 1, obj));
        }
        s
    }
}

/// A fitted model with its final weight tensor and diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: TuckerModel,
    pub weights: DenseTensor,
    pub report: FitReport,
}

/// Seeded random initialization: every factor and core entry i.i.d. uniform
/// on [0.1, 1.1), bounded away from zero so multiplicative updates cannot
/// stall on an exact zero. Factors are filled in mode order, then the core.
pub fn initialize(shape: &[usize], config: &SolverConfig) -> Result<TuckerModel> {
    config.validate(shape)?;
    let mut r = rng::stream(config.seed, "init", 0);
    let mut factors = Vec::with_capacity(shape.len());
    for (&d, &k) in shape.iter().zip(&config.ranks) {
        let data = (0..d * k).map(|_| rng::uniform(&mut r, 0.1, 1.1)).collect();
        factors.push(Matrix::new(d, k, data)?);
    }
    let core_len: usize = config.ranks.iter().product();
    let core = DenseTensor::new(
        config.ranks.clone(),
        (0..core_len).map(|_| rng::uniform(&mut r, 0.1, 1.1)).collect(),
    )?;
    TuckerModel::new(core, factors)
}

/// Weight tensor for the current model: the half-quadratic weight map of the
/// residual `x - reconstruct(model)`.
pub fn update_weights(
    x: &DenseTensor,
    model: &TuckerModel,
    loss: &RobustLoss,
    scale: &ScaleState,
) -> Result<DenseTensor> {
    let residual = x.sub(&model.reconstruct())?;
    if !residual.all_finite() {
        return Err(Error::NonFinite {
            context: "residual".into(),
            iteration: None,
        });
    }
    Ok(loss::weight_map(loss, &residual, scale))
}

fn multiplicative_step(current: &mut [f64], numerator: &[f64], denominator: &[f64], eps: f64) {
    for ((a, &num), &den) in current.iter_mut().zip(numerator).zip(denominator) {
        *a *= (num + eps) / (den + eps);
    }
}

/// One multiplicative update of factor `A^(mode)`:
/// `A ⊛ [(W_(n) ⊛ X_(n)) B] / [(W_(n) ⊛ (A B^T)) B]` with damping `eps`
/// on both sides of the ratio.
pub fn update_factor(
    model: &mut TuckerModel,
    x: &DenseTensor,
    w: &DenseTensor,
    mode: usize,
    eps: f64,
) -> Result<()> {
    update_factor_terms(model, x, w, mode, eps, None, 0.0)
}

/// One multiplicative update of the last factor with the graph terms:
/// affinity `V A` joins the numerator and degree `D A` the denominator,
/// both scaled by `lambda`. With `lambda = 0` this is `update_factor`.
pub fn update_last_factor(
    model: &mut TuckerModel,
    x: &DenseTensor,
    w: &DenseTensor,
    graph: Option<&AffinityGraph>,
    lambda: f64,
    eps: f64,
) -> Result<()> {
    let mode = model.order() - 1;
    if lambda > 0.0 {
        let g = graph.ok_or_else(|| {
            Error::InvalidArgument("lambda > 0 requires an affinity graph".into())
        })?;
        if g.n_samples() != model.factors[mode].rows() {
            return Err(Error::ShapeMismatch(format!(
                "graph has {} nodes, last factor has {} rows",
                g.n_samples(),
                model.factors[mode].rows()
            )));
        }
        update_factor_terms(model, x, w, mode, eps, Some(g), lambda)
    } else {
        update_factor_terms(model, x, w, mode, eps, None, 0.0)
    }
}

fn update_factor_terms(
    model: &mut TuckerModel,
    x: &DenseTensor,
    w: &DenseTensor,
    mode: usize,
    eps: f64,
    graph: Option<&AffinityGraph>,
    lambda: f64,
) -> Result<()> {
    if x.shape() != w.shape() {
        return Err(Error::ShapeMismatch("weights do not match data".into()));
    }
    let b_t = model.factor_context(mode)?; // r_n x M
    let x_n = x.unfold(mode)?;
    let w_n = w.unfold(mode)?;
    let a = &model.factors[mode];

    let weighted_x = w_n.hadamard(&x_n)?;
    let mut numerator = weighted_x.matmul_transb(&b_t); // I_n x r_n
    let recon_n = a.matmul(&b_t);
    let weighted_recon = w_n.hadamard(&recon_n)?;
    let mut denominator = weighted_recon.matmul_transb(&b_t);

    if let Some(g) = graph {
        let va = g.affinity().matmul(a);
        for (n, &v) in numerator.data_mut().iter_mut().zip(va.data()) {
            *n += lambda * v;
        }
        for i in 0..a.rows() {
            let d = g.degree()[i];
            let arow = a.row(i).to_vec();
            for (dst, &aij) in denominator.row_mut(i).iter_mut().zip(&arow) {
                *dst += lambda * d * aij;
            }
        }
    }

    multiplicative_step(
        model.factors[mode].data_mut(),
        numerator.data(),
        denominator.data(),
        eps,
    );
    Ok(())
}

/// One multiplicative update of the core tensor, computed without forming
/// the Kronecker factor: both sides of the ratio are the weighted data and
/// weighted reconstruction contracted by `A^(n)T` along every mode.
pub fn update_core(
    model: &mut TuckerModel,
    x: &DenseTensor,
    w: &DenseTensor,
    eps: f64,
) -> Result<()> {
    if x.shape() != w.shape() {
        return Err(Error::ShapeMismatch("weights do not match data".into()));
    }
    let recon = model.reconstruct();
    let mut numerator = w.hadamard(x)?;
    let mut denominator = w.hadamard(&recon)?;
    for (n, f) in model.factors.iter().enumerate() {
        let ft = f.transpose();
        numerator = numerator.mode_product(&ft, n)?;
        denominator = denominator.mode_product(&ft, n)?;
    }
    multiplicative_step(
        model.core.data_mut(),
        numerator.data(),
        denominator.data(),
        eps,
    );
    Ok(())
}

/// Monitored objective: `1/2 sum W ⊛ E^2 + (lambda/2) Tr(A^(N)T L A^(N))`.
///
/// This is the quantity each multiplicative update provably does not
/// increase at fixed weights; the conjugate term of the half-quadratic
/// expansion is constant in the model parameters and is not evaluated.
pub fn augmented_objective(
    x: &DenseTensor,
    model: &TuckerModel,
    w: &DenseTensor,
    graph: Option<&AffinityGraph>,
    lambda: f64,
) -> Result<f64> {
    let residual = x.sub(&model.reconstruct())?;
    let weighted: f64 = w
        .data()
        .iter()
        .zip(residual.data())
        .map(|(wi, e)| wi * e * e)
        .sum();
    let mut obj = 0.5 * weighted;
    if lambda > 0.0 {
        let g = graph.ok_or_else(|| {
            Error::InvalidArgument("lambda > 0 requires an affinity graph".into())
        })?;
        let last = model.order() - 1;
        obj += 0.5 * lambda * g.regularizer_value(&model.factors[last])?;
    }
    Ok(obj)
}

/// Runs the alternating optimization until the relative objective change
/// drops below `tol` or `max_iter` is reached.
pub fn fit(x: &DenseTensor, config: &SolverConfig) -> Result<FitOutcome> {
    let start = Instant::now();
    config.validate(x.shape())?;
    if !x.all_finite() {
        return Err(Error::NonFinite {
            context: "input tensor".into(),
            iteration: None,
        });
    }
    if x.min() < 0.0 {
        return Err(Error::InvalidArgument(
            "input tensor must be nonnegative".into(),
        ));
    }

    let graph = if config.lambda > 0.0 {
        Some(AffinityGraph::from_tensor(x, config.p, config.tau)?)
    } else {
        None
    };

    let mut model = initialize(x.shape(), config)?;
    let order = model.order();
    let mut objective = Vec::with_capacity(config.max_iter);
    let mut stop_reason = StopReason::MaxIter;
    let mut scale = ScaleState::fixed(1.0);
    let mut weights = DenseTensor::zeros(x.shape().to_vec())?;

    for it in 1..=config.max_iter {
        let residual = x.sub(&model.reconstruct())?;
        if !residual.all_finite() {
            return Err(Error::NonFinite {
                context: "residual".into(),
                iteration: Some(it),
            });
        }
        let resolve = it == 1 || config.freeze_scale_after.is_none_or(|f| it <= f);
        if resolve {
            scale = loss::resolve_scale(&config.loss, &residual)?;
        }
        weights = loss::weight_map(&config.loss, &residual, &scale);

        for mode in 0..order - 1 {
            update_factor(&mut model, x, &weights, mode, config.eps_denominator)?;
        }
        update_last_factor(
            &mut model,
            x,
            &weights,
            graph.as_ref(),
            config.lambda,
            config.eps_denominator,
        )?;
        update_core(&mut model, x, &weights, config.eps_denominator)?;

        if !model.all_finite() {
            return Err(Error::NonFinite {
                context: "model update".into(),
                iteration: Some(it),
            });
        }

        let obj = augmented_objective(x, &model, &weights, graph.as_ref(), config.lambda)?;
        if !obj.is_finite() {
            return Err(Error::NonFinite {
                context: "objective".into(),
                iteration: Some(it),
            });
        }
        let converged = objective
            .last()
            .map(|&prev: &f64| (obj - prev).abs() / prev.max(1e-12) < config.tol)
            .unwrap_or(false);
        objective.push(obj);
        if converged {
            stop_reason = StopReason::Tol;
            break;
        }
    }

    let residual = x.sub(&model.reconstruct())?;
    let n = residual.len() as f64;
    let report = FitReport {
        iterations: objective.len(),
        stop_reason,
        wall_ms: start.elapsed().as_millis() as u64,
        residual_mean_abs: residual.data().iter().map(|e| e.abs()).sum::<f64>() / n,
        residual_max_abs: residual.max_abs(),
        objective,
    };
    Ok(FitOutcome {
        model,
        weights,
        report,
    })
}

/// Out-of-sample representation of a new sample.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Row of length `r_N`, clamped at zero.
    pub coefficients: Vec<f64>,
    /// Smallest coefficient of the unconstrained closed-form solution.
    pub pre_clamp_min: f64,
    /// Whether clamping changed anything.
    pub clamped: bool,
}

/// Closed-form projection of a new sample onto a trained model.
///
/// Solves the weighted regularized least squares
/// `min_a ||sqrt(w) ⊛ (x' - a B^(N)T)||^2 + lambda sum_j v_j ||a - a_j||^2`
/// where `a_j` are the trained last-factor rows, giving
/// `a = [B' B'^T + lambda (sum v_j) I]^{-1} (x~ B'^T + lambda sum_j v_j a_j)`
/// with `B' = sqrt(w) ⊛ B^(N)T` and `x~ = sqrt(w) ⊛ vec(x')`. The solution is
/// unconstrained; negative entries are clamped to zero and flagged.
pub fn project_new_sample(
    x_new: &DenseTensor,
    model: &TuckerModel,
    weights: Option<&DenseTensor>,
    v: &[f64],
    lambda: f64,
) -> Result<Projection> {
    let order = model.order();
    let last = order - 1;
    let dims = model.dims();
    if x_new.shape() != &dims[..last] {
        return Err(Error::ShapeMismatch(format!(
            "new sample shape {:?} does not match model dims {:?}",
            x_new.shape(),
            &dims[..last]
        )));
    }
    if v.len() != dims[last] {
        return Err(Error::ShapeMismatch(format!(
            "{} graph weights for {} training samples",
            v.len(),
            dims[last]
        )));
    }
    if v.iter().any(|&vi| vi < 0.0 || !vi.is_finite()) {
        return Err(Error::InvalidArgument(
            "graph weights must be finite and nonnegative".into(),
        ));
    }
    if let Some(w) = weights {
        if w.shape() != x_new.shape() {
            return Err(Error::ShapeMismatch("weights do not match sample".into()));
        }
    }

    let b_t = model.factor_context(last)?; // r x M
    let r = b_t.rows();
    let m = b_t.cols();
    let sqrt_w: Vec<f64> = match weights {
        Some(w) => w.data().iter().map(|&x| x.sqrt()).collect(),
        None => vec![1.0; m],
    };
    // B' = columns of B^(N)T scaled by sqrt(w); x~ = sqrt(w) ⊛ vec(x')
    let x_tilde: Vec<f64> = x_new
        .vectorize()
        .iter()
        .zip(&sqrt_w)
        .map(|(x, s)| x * s)
        .collect();

    let v_sum: f64 = v.iter().sum();
    let mut gram = vec![0.0; r * r];
    let mut rhs = vec![0.0; r];
    for k in 0..r {
        let bk = b_t.row(k);
        for l in k..r {
            let bl = b_t.row(l);
            let mut s = 0.0;
            for ((a, b), sw) in bk.iter().zip(bl).zip(&sqrt_w) {
                s += a * b * sw * sw;
            }
            gram[k * r + l] = s;
            gram[l * r + k] = s;
        }
        gram[k * r + k] += lambda * v_sum;
        let mut s = 0.0;
        for ((b, x), sw) in bk.iter().zip(&x_tilde).zip(&sqrt_w) {
            s += b * x * sw;
        }
        rhs[k] = s;
    }
    let a_last = &model.factors[last];
    for (j, &vj) in v.iter().enumerate() {
        if vj > 0.0 {
            for (k, rk) in rhs.iter_mut().enumerate() {
                *rk += lambda * vj * a_last.at(j, k);
            }
        }
    }

    let solution = solve_linear(&mut gram, &mut rhs, r)?;
    let pre_clamp_min = solution.iter().copied().fold(f64::INFINITY, f64::min);
    let coefficients: Vec<f64> = solution.iter().map(|&x| x.max(0.0)).collect();
    Ok(Projection {
        coefficients,
        pre_clamp_min,
        clamped: pre_clamp_min < 0.0,
    })
}

/// Gaussian elimination with partial pivoting on an n x n system.
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(Error::SingularProjection);
    }
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val <= 1e-12 * scale {
            return Err(Error::SingularProjection);
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let piv = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / piv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Ok(x)
}
