//! Batch front door: load tensors, corrupt them, fit decompositions, build
//! graphs, and score clusterings from a JSON experiment configuration.
//!
//! Exit codes: 0 success, 1 usage/IO/validation failure, 2 numerical failure.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::{parse_loss, parse_noise_kind, parse_scale, parse_tau, ExperimentConfig};
use rntd_core::graph::AffinityGraph;
use rntd_core::harness::{self, BenchmarkSpec};
use rntd_core::noise::{NoiseKind, NoiseSpec};
use rntd_core::rng;
use rntd_core::tensor::{DenseTensor, Matrix};
use rntd_core::{eval, io, solver, Error, Result};

#[derive(Parser)]
#[command(name = "rntd", version, about = "Robust nonnegative Tucker decomposition toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a decomposition and write model, weights, report and trajectory.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Root seed; overrides the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Sweep noise levels x Monte-Carlo runs x loss variants and score each cell.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Corrupt a DTF tensor.
    Noise {
        /// laplace or salt_pepper.
        #[arg(long)]
        kind: String,
        /// Laplace scale (data units).
        #[arg(long)]
        delta: Option<f64>,
        /// Salt & pepper corrupted fraction in [0, 1].
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long = "value-max", default_value_t = 255.0)]
        value_max: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        quiet: bool,
    },
    /// Cluster the rows of a 2-way DTF tensor and score against labels.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional path for the JSON metrics (always printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional path for a one-row CSV `acc,nmi`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Build the affinity graph of a DTF tensor and export its edge list.
    Graph {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        p: usize,
        /// "mean" or a positive number.
        #[arg(long, default_value = "mean")]
        tau: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_numerical() { 2 } else { 1 });
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            config,
            seed,
            out,
            quiet,
        } => cmd_fit(&config, seed, out, quiet),
        Command::Benchmark {
            config,
            seed,
            out,
            quiet,
        } => cmd_benchmark(&config, seed, out, quiet),
        Command::Noise {
            kind,
            delta,
            fraction,
            value_max,
            input,
            out,
            seed,
            quiet,
        } => cmd_noise(&kind, delta, fraction, value_max, &input, &out, seed, quiet),
        Command::Eval {
            input,
            labels,
            k,
            restarts,
            seed,
            out,
            csv,
            quiet,
        } => cmd_eval(&input, &labels, k, restarts, seed, out, csv, quiet),
        Command::Graph {
            input,
            p,
            tau,
            out,
            quiet,
        } => cmd_graph(&input, p, &tau, &out, quiet),
    }
}

fn matrix_as_tensor(m: &Matrix) -> DenseTensor {
    let mut t = DenseTensor::zeros(vec![m.rows(), m.cols()]).expect("factor shape");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            t.set(&[i, j], m.at(i, j));
        }
    }
    t
}

fn resolve_out(config_out: Option<PathBuf>, flag: Option<PathBuf>) -> PathBuf {
    flag.or(config_out).unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_fit(
    config_path: &Path,
    seed_flag: Option<u64>,
    out_flag: Option<PathBuf>,
    quiet: bool,
) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let root = seed_flag.or(cfg.seed).unwrap_or(0);
    let out_dir = resolve_out(cfg.output.clone(), out_flag);

    let mut x = io::read_dtf(&cfg.dataset)?;
    if let Some(noise) = &cfg.noise {
        let level = noise.level.ok_or_else(|| {
            Error::InvalidArgument("fit needs noise.level when a noise section is present".into())
        })?;
        x = NoiseSpec {
            kind: parse_noise_kind(&noise.kind)?,
            level,
            value_max: noise.value_max,
            seed: rng::derive_seed(root, "noise", 0),
        }
        .apply(&x)?;
    }

    let scale = parse_scale(&cfg.solver.scale)?;
    let loss = parse_loss(&cfg.solver.loss, scale)?;
    let mut solver_cfg = config::solver_config(&cfg.solver, loss)?;
    solver_cfg.seed = rng::derive_seed(root, "fit", 0);

    let outcome = solver::fit(&x, &solver_cfg)?;

    let model_dir = out_dir.join("model");
    fs::create_dir_all(&model_dir)?;
    io::write_dtf_text(model_dir.join("core.dtf"), &outcome.model.core)?;
    for (n, f) in outcome.model.factors.iter().enumerate() {
        io::write_dtf_text(model_dir.join(format!("factor_{n}.dtf")), &matrix_as_tensor(f))?;
    }
    io::write_dtf_text(out_dir.join("weights.dtf"), &outcome.weights)?;
    fs::write(out_dir.join("report.json"), outcome.report.to_json())?;
    fs::write(out_dir.join("trajectory.csv"), outcome.report.trajectory_csv())?;

    if !quiet {
        println!(
            "fit: {} iterations ({:?}), outputs in {}",
            outcome.report.iterations,
            outcome.report.stop_reason,
            out_dir.display()
        );
    }
    Ok(())
}

fn cmd_benchmark(
    config_path: &Path,
    seed_flag: Option<u64>,
    out_flag: Option<PathBuf>,
    quiet: bool,
) -> Result<()> {
    let cfg = ExperimentConfig::load(config_path)?;
    let root = seed_flag.or(cfg.seed).unwrap_or(0);
    let out_dir = resolve_out(cfg.output.clone(), out_flag);

    let x = io::read_dtf(&cfg.dataset)?;
    let labels_path = cfg
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("benchmark requires a labels file".into()))?;
    let truth = io::read_labels(labels_path)?;
    let last = x.order() - 1;
    if truth.len() != x.shape()[last] {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} samples",
            truth.len(),
            x.shape()[last]
        )));
    }

    let noise = cfg
        .noise
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("benchmark requires a noise section".into()))?;
    let levels = match (&noise.levels, noise.level) {
        (Some(levels), _) if !levels.is_empty() => levels.clone(),
        (None, Some(level)) => vec![level],
        _ => {
            return Err(Error::InvalidArgument(
                "benchmark needs noise.levels (or a single noise.level)".into(),
            ))
        }
    };
    let kind = parse_noise_kind(&noise.kind)?;

    let scale = parse_scale(&cfg.solver.scale)?;
    let variant_names = cfg.variants.clone().unwrap_or_else(|| {
        vec![
            "quadratic".into(),
            "cim".into(),
            "huber".into(),
            "cauchy".into(),
        ]
    });
    let variants = variant_names
        .iter()
        .map(|name| parse_loss(name, scale))
        .collect::<Result<Vec<_>>>()?;

    let eval_cfg = cfg
        .eval
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("benchmark requires an eval section".into()))?;

    let base = config::solver_config(&cfg.solver, rntd_core::RobustLoss::Quadratic)?;
    let spec = BenchmarkSpec {
        x,
        truth,
        variants,
        noise_kind: kind,
        levels,
        value_max: noise.value_max,
        runs: eval_cfg.monte_carlo_runs,
        base,
        k: eval_cfg.k,
        restarts: eval_cfg.restarts,
        seed: root,
    };

    let rows = harness::run_benchmark(&spec)?;
    let summaries = harness::summarize(&rows);

    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("benchmark.csv"), harness::rows_to_csv(&rows))?;
    fs::write(
        out_dir.join("summary.json"),
        harness::summary_to_json(&summaries),
    )?;

    if !quiet {
        println!(
            "benchmark: {} rows over {} levels, outputs in {}",
            rows.len(),
            spec.levels.len(),
            out_dir.display()
        );
        for s in &summaries {
            println!(
                "  {:<10} {} level {:<6}: acc {:.3} +- {:.3}, nmi {:.3} +- {:.3}",
                s.variant, s.noise_kind, s.level, s.acc_mean, s.acc_std, s.nmi_mean, s.nmi_std
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_noise(
    kind: &str,
    delta: Option<f64>,
    fraction: Option<f64>,
    value_max: f64,
    input: &Path,
    out: &Path,
    seed: u64,
    quiet: bool,
) -> Result<()> {
    let kind = parse_noise_kind(kind)?;
    let x = io::read_dtf(input)?;
    let y = match kind {
        NoiseKind::Laplace => {
            let delta = delta.ok_or_else(|| {
                Error::InvalidArgument("laplace noise requires --delta".into())
            })?;
            rntd_core::noise::add_laplace(&x, delta, value_max, seed)?
        }
        NoiseKind::SaltPepper => {
            let fraction = fraction.ok_or_else(|| {
                Error::InvalidArgument("salt & pepper noise requires --fraction".into())
            })?;
            rntd_core::noise::add_salt_pepper(&x, fraction, value_max, seed)?
        }
    };
    io::write_dtf_text(out, &y)?;
    if !quiet {
        println!("noise: wrote {}", out.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    input: &Path,
    labels_path: &Path,
    k: usize,
    restarts: usize,
    seed: u64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    quiet: bool,
) -> Result<()> {
    let repr = io::read_dtf(input)?;
    if repr.order() != 2 {
        return Err(Error::InvalidArgument(
            "eval expects a 2-way tensor (samples x representation)".into(),
        ));
    }
    let unfolded = repr.unfold(0)?;
    let truth_ids = io::read_labels(labels_path)?;
    if truth_ids.len() != unfolded.rows() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} rows",
            truth_ids.len(),
            unfolded.rows()
        )));
    }
    let k_classes = truth_ids.iter().copied().max().unwrap_or(0) + 1;
    let truth = eval::Labeling::new(truth_ids, k_classes)?;
    let pred = eval::kmeans(&unfolded, k, rng::derive_seed(seed, "kmeans", 0), restarts)?;
    let acc = eval::accuracy(&truth, &pred)?;
    let nmi = eval::nmi(&truth, &pred)?;

    let json = format!("{{\"acc\": {acc}, \"nmi\": {nmi}}}");
    if !quiet {
        println!("{json}");
    }
    if let Some(path) = out {
        fs::write(path, &json)?;
    }
    if let Some(path) = csv {
        fs::write(path, format!("acc,nmi\n{acc},{nmi}\n"))?;
    }
    Ok(())
}

fn cmd_graph(input: &Path, p: usize, tau: &str, out: &Path, quiet: bool) -> Result<()> {
    let tau_field = if tau == "mean" {
        None
    } else {
        let v: f64 = tau
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad tau \"{tau}\"")))?;
        Some(config::TauField::Value(v))
    };
    let policy = parse_tau(&tau_field)?;
    let x = io::read_dtf(input)?;
    let g = AffinityGraph::from_tensor(&x, p, policy)?;
    fs::write(out, io::edge_list_csv(&g))?;
    if !quiet {
        println!(
            "graph: {} nodes, {} edges, tau {}, wrote {}",
            g.n_samples(),
            g.edges().len(),
            g.tau(),
            out.display()
        );
    }
    Ok(())
}
