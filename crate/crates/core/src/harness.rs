//! The noise-sweep benchmark grid: corrupt, fit every configured loss
//! variant, cluster the last-factor rows, score against ground truth.
//!
//! Grid cells are independent and run in parallel; rows come back in a
//! deterministic sorted order regardless of scheduling, and every random
//! stream is derived from the root seed, so identical inputs reproduce
//! identical rows byte for byte.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::eval::{self, Labeling};
use crate::loss::RobustLoss;
use crate::noise::{NoiseKind, NoiseSpec};
use crate::rng;
use crate::solver::{self, SolverConfig};
use crate::tensor::DenseTensor;

/// One benchmark experiment: a clean tensor, planted labels, and the grid of
/// (loss variant x noise level x Monte-Carlo run) cells to evaluate.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub x: DenseTensor,
    pub truth: Vec<usize>,
    pub variants: Vec<RobustLoss>,
    pub noise_kind: NoiseKind,
    pub levels: Vec<f64>,
    pub value_max: f64,
    pub runs: usize,
    /// Base solver settings; `loss` and `seed` are overridden per cell.
    pub base: SolverConfig,
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// One grid cell result.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub variant: String,
    pub noise_kind: String,
    pub level: f64,
    pub run: usize,
    pub acc: f64,
    pub nmi: f64,
    pub iterations: usize,
}

/// Mean and sample standard deviation over runs for one (variant, level).
#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub variant: String,
    pub noise_kind: String,
    pub level: f64,
    pub runs: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub nmi_mean: f64,
    pub nmi_std: f64,
}

/// Runs the full grid. Per run, the corruption, the solver initialization and
/// the k-means seeding are all re-randomized from the root seed.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<Vec<BenchRow>> {
    let k_classes = spec.truth.iter().copied().max().unwrap_or(0) + 1;
    let truth = Labeling::new(spec.truth.clone(), k_classes)?;

    let mut cells = Vec::new();
    for (li, &level) in spec.levels.iter().enumerate() {
        for run in 0..spec.runs {
            for (vi, loss) in spec.variants.iter().enumerate() {
                cells.push((li, level, run, vi, *loss));
            }
        }
    }

    let mut rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(li, level, run, vi, loss)| -> Result<BenchRow> {
            let cell = (li * spec.runs + run) as u64;
            let noisy = NoiseSpec {
                kind: spec.noise_kind,
                level,
                value_max: spec.value_max,
                seed: rng::derive_seed(spec.seed, "noise", cell),
            }
            .apply(&spec.x)?;

            let mut config = spec.base.clone();
            config.loss = loss;
            if matches!(loss, RobustLoss::Quadratic) {
                // the quadratic variant is the plain NTD baseline: unit
                // weights and no manifold term
                config.lambda = 0.0;
            }
            config.seed = rng::derive_seed(spec.seed, "fit", cell * 97 + vi as u64);
            let out = solver::fit(&noisy, &config)?;

            let last = out.model.order() - 1;
            let repr = &out.model.factors[last];
            let pred = eval::kmeans(
                repr,
                spec.k,
                rng::derive_seed(spec.seed, "kmeans", cell * 97 + vi as u64),
                spec.restarts,
            )?;
            Ok(BenchRow {
                variant: loss.name().to_string(),
                noise_kind: spec.noise_kind.name().to_string(),
                level,
                run,
                acc: eval::accuracy(&truth, &pred)?,
                nmi: eval::nmi(&truth, &pred)?,
                iterations: out.report.iterations,
            })
        })
        .collect::<Result<_>>()?;

    rows.sort_by(|a, b| {
        a.variant
            .cmp(&b.variant)
            .then(a.level.partial_cmp(&b.level).unwrap())
            .then(a.run.cmp(&b.run))
    });
    Ok(rows)
}

/// Long-form CSV, one row per grid cell.
pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("variant,noise_kind,level,run,acc,nmi\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.variant, r.noise_kind, r.level, r.run, r.acc, r.nmi
        ));
    }
    s
}

/// Aggregates rows into per-(variant, level) means and standard deviations.
pub fn summarize(rows: &[BenchRow]) -> Vec<BenchSummary> {
    let mut keys: Vec<(String, String, f64)> = rows
        .iter()
        .map(|r| (r.variant.clone(), r.noise_kind.clone(), r.level))
        .collect();
    keys.dedup();

    keys.into_iter()
        .map(|(variant, noise_kind, level)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.variant == variant && r.level == level)
                .collect();
            let n = group.len() as f64;
            let acc_mean = group.iter().map(|r| r.acc).sum::<f64>() / n;
            let nmi_mean = group.iter().map(|r| r.nmi).sum::<f64>() / n;
            let var = |mean: f64, get: fn(&BenchRow) -> f64| -> f64 {
                if group.len() < 2 {
                    0.0
                } else {
                    group
                        .iter()
                        .map(|r| (get(r) - mean).powi(2))
                        .sum::<f64>()
                        / (n - 1.0)
                }
            };
            BenchSummary {
                variant,
                noise_kind,
                level,
                runs: group.len(),
                acc_mean,
                acc_std: var(acc_mean, |r| r.acc).sqrt(),
                nmi_mean,
                nmi_std: var(nmi_mean, |r| r.nmi).sqrt(),
            }
        })
        .collect()
}

pub fn summary_to_json(summaries: &[BenchSummary]) -> String {
    serde_json::to_string_pretty(summaries).expect("summary serializes")
}
