//! Property tests over the tensor algebra, weight maps, noise generators and
//! metrics, plus the equivalence of the quadratic no-regularizer solver with
//! an independently coded plain-NTD reference.

use proptest::prelude::*;

use rntd_core::eval::{accuracy, nmi, Labeling};
use rntd_core::loss::{self, RobustLoss, ScalePolicy, ScaleState};
use rntd_core::model::explicit_kronecker_factor;
use rntd_core::noise;
use rntd_core::rng;
use rntd_core::solver::{fit, initialize, SolverConfig};
use rntd_core::tensor::{DenseTensor, Matrix};
use rntd_core::{io, TuckerModel};

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    (1usize..=4)
        .prop_flat_map(|order| {
            proptest::collection::vec(1usize..=4, order..=order).prop_flat_map(|shape| {
                let n: usize = shape.iter().product();
                proptest::collection::vec(0.0f64..1.0, n..=n)
                    .prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
            })
        })
        .no_shrink()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn unfold_fold_round_trip(t in tensor_strategy(), mode_pick in 0usize..4) {
        let mode = mode_pick % t.order();
        let m = t.unfold(mode).unwrap();
        let back = DenseTensor::fold(&m, mode, t.shape()).unwrap();
        prop_assert_eq!(back.data(), t.data());
    }

    #[test]
    fn mode_product_matches_unfolding(t in tensor_strategy(), mode_pick in 0usize..4, rows in 1usize..4, seed in 0u64..1000) {
        let mode = mode_pick % t.order();
        let mut r = rng::stream(seed, "prop-mp", 0);
        let m = Matrix::new(
            rows,
            t.shape()[mode],
            (0..rows * t.shape()[mode]).map(|_| rng::uniform(&mut r, -1.0, 1.0)).collect(),
        ).unwrap();
        let prod = t.mode_product(&m, mode).unwrap();
        let direct = m.matmul(&t.unfold(mode).unwrap());
        let via = prod.unfold(mode).unwrap();
        prop_assert!(via.max_abs_diff(&direct) <= 1e-12);
    }

    #[test]
    fn distinct_mode_products_commute(t in tensor_strategy(), seed in 0u64..1000) {
        prop_assume!(t.order() >= 2);
        let mut r = rng::stream(seed, "prop-comm", 0);
        let a = Matrix::new(2, t.shape()[0], (0..2 * t.shape()[0]).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect()).unwrap();
        let b = Matrix::new(3, t.shape()[1], (0..3 * t.shape()[1]).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect()).unwrap();
        let ab = t.mode_product(&a, 0).unwrap().mode_product(&b, 1).unwrap();
        let ba = t.mode_product(&b, 1).unwrap().mode_product(&a, 0).unwrap();
        for (x, y) in ab.data().iter().zip(ba.data()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn weights_lie_in_unit_interval_and_decrease(scale in 0.05f64..3.0, e1 in 0.0f64..20.0, e2 in 0.0f64..20.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let s = ScaleState::fixed(scale);
        for loss in [
            RobustLoss::Quadratic,
            RobustLoss::Cim { sigma: ScalePolicy::Fixed(scale) },
            RobustLoss::Huber { c: ScalePolicy::Fixed(scale) },
            RobustLoss::Cauchy { gamma: ScalePolicy::Fixed(scale) },
        ] {
            let w_lo = loss::weight_of(&loss, lo, &s);
            let w_hi = loss::weight_of(&loss, hi, &s);
            // the Gaussian kernel underflows to 0.0 beyond |e/scale| ~ 38;
            // everywhere else the weights are strictly positive
            prop_assert!((0.0..=1.0).contains(&w_lo));
            if lo / scale < 35.0 {
                prop_assert!(w_lo > 0.0);
            }
            prop_assert!(w_hi <= w_lo + 1e-15, "{}: w({lo})={w_lo} < w({hi})={w_hi}", loss.name());
            // symmetry in the sign of the residual
            prop_assert_eq!(loss::weight_of(&loss, -lo, &s), w_lo);
        }
    }

    #[test]
    fn salt_pepper_count_and_range(fraction in 0.0f64..1.0, seed in 0u64..500) {
        let x = DenseTensor::new(vec![6, 7], vec![0.5; 42]).unwrap();
        let y = noise::add_salt_pepper(&x, fraction, 1.0, seed).unwrap();
        let differing = x.data().iter().zip(y.data()).filter(|(a, b)| a != b).count();
        prop_assert_eq!(differing, (fraction * 42.0).round() as usize);
        prop_assert!(y.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn laplace_output_is_clamped(delta in 0.01f64..200.0, seed in 0u64..500) {
        let x = DenseTensor::new(vec![40], (0..40).map(|i| i as f64 * 6.0).collect()).unwrap();
        let y = noise::add_laplace(&x, delta, 234.0, seed).unwrap();
        prop_assert!(y.data().iter().all(|&v| (0.0..=234.0).contains(&v)));
    }

    #[test]
    fn metrics_invariant_under_relabeling(seed in 0u64..500) {
        let mut r = rng::stream(seed, "prop-metrics", 0);
        let k = 2 + rng::index(&mut r, 3);
        let n = k + rng::index(&mut r, 20);
        let truth = Labeling::new((0..n).map(|_| rng::index(&mut r, k)).collect(), k).unwrap();
        let pred = Labeling::new((0..n).map(|_| rng::index(&mut r, k)).collect(), k).unwrap();

        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng::index(&mut r, i + 1));
        }
        let renamed = Labeling::new(pred.labels().iter().map(|&l| perm[l]).collect(), k).unwrap();

        let acc_delta = (accuracy(&truth, &pred).unwrap() - accuracy(&truth, &renamed).unwrap()).abs();
        let nmi_delta = (nmi(&truth, &pred).unwrap() - nmi(&truth, &renamed).unwrap()).abs();
        prop_assert!(acc_delta <= 1e-12);
        prop_assert!(nmi_delta <= 1e-12);
        // symmetry of NMI
        let sym = (nmi(&truth, &pred).unwrap() - nmi(&pred, &truth).unwrap()).abs();
        prop_assert!(sym <= 1e-12);
    }

    #[test]
    fn dtf_round_trips(t in tensor_strategy()) {
        let text = io::dtf_from_bytes(io::dtf_to_text(&t).as_bytes()).unwrap();
        prop_assert_eq!(text.data(), t.data());
        let binary = io::dtf_from_bytes(&io::dtf_to_binary(&t)).unwrap();
        prop_assert_eq!(binary.data(), t.data());
    }
}

/// Plain NTD multiplicative updates coded independently of the solver: every
/// context matrix and the core update go through explicit Kronecker products.
struct NtdReference {
    model: TuckerModel,
    eps: f64,
}

impl NtdReference {
    fn step(&mut self, x: &DenseTensor) {
        let order = self.model.order();
        for mode in 0..order {
            // B^(n)T = S_(n) (A^(N) ⊗ .. skip n .. ⊗ A^(1))^T
            let mut kron = Matrix::identity(1);
            for (k, f) in self.model.factors.iter().enumerate().rev() {
                if k != mode {
                    kron = kron.kronecker(f);
                }
            }
            let b_t = self.model.core.unfold(mode).unwrap().matmul_transb(&kron);
            let x_n = x.unfold(mode).unwrap();
            let numerator = x_n.matmul_transb(&b_t);
            let recon_n = self.model.factors[mode].matmul(&b_t);
            let denominator = recon_n.matmul_transb(&b_t);
            let a = self.model.factors[mode].data_mut();
            for (i, v) in a.iter_mut().enumerate() {
                *v *= (numerator.data()[i] + self.eps) / (denominator.data()[i] + self.eps);
            }
        }
        // core via the explicit Kronecker factor
        let f = explicit_kronecker_factor(&self.model);
        let ft = f.transpose();
        let num = ft.matvec(x.vectorize());
        let recon = f.matvec(self.model.core.vectorize());
        let den = ft.matvec(&recon);
        for (i, s) in self.model.core.data_mut().iter_mut().enumerate() {
            *s *= (num[i] + self.eps) / (den[i] + self.eps);
        }
    }

    fn objective(&self, x: &DenseTensor) -> f64 {
        let f = explicit_kronecker_factor(&self.model);
        let recon = f.matvec(self.model.core.vectorize());
        0.5 * x
            .vectorize()
            .iter()
            .zip(&recon)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }
}

#[test]
fn quadratic_no_regularizer_fit_matches_ntd_reference() {
    let mut r = rng::stream(77, "ntd-ref", 0);
    let shape = [4usize, 3, 5];
    let x = DenseTensor::new(
        shape.to_vec(),
        (0..60).map(|_| rng::uniform(&mut r, 0.0, 1.0)).collect(),
    )
    .unwrap();

    let mut config = SolverConfig::new(vec![2, 2, 2], RobustLoss::Quadratic);
    config.lambda = 0.0;
    config.seed = 99;
    config.tol = 1e-14;
    config.max_iter = 25;
    let out = fit(&x, &config).unwrap();

    let mut reference = NtdReference {
        model: initialize(&shape, &config).unwrap(),
        eps: config.eps_denominator,
    };
    for (it, &solver_obj) in out.report.objective.iter().enumerate() {
        reference.step(&x);
        let ref_obj = reference.objective(&x);
        assert!(
            (solver_obj - ref_obj).abs() <= 1e-10,
            "iteration {}: solver {solver_obj} vs reference {ref_obj}",
            it + 1
        );
    }
    // final factors agree entrywise as well
    for (mode, (a, b)) in out
        .model
        .factors
        .iter()
        .zip(&reference.model.factors)
        .enumerate()
    {
        assert!(
            a.max_abs_diff(b) <= 1e-10,
            "factor {mode} diverged from the reference"
        );
    }
}
