//! Property checks shared by `properties.rs` and the acceptance suite.
//!
//! Each check runs `CASES` cases on a deterministic runner and reports the
//! first falsifying input.
#![allow(dead_code)]

use std::sync::Arc;

use eigennet_core::consensus::{run_consensus, AcConfig, AcEngine};
use eigennet_core::dec_eig::{
    default_dla_start, default_dpm_start, dla_run, dpm_run, predict_dpm_vector_error, predict_lambda1_error,
};
use eigennet_core::detection::{compute_statistic, EigenPipeline, roc_curve, statistic_consensus, threshold_from_samples, StatisticKind};
use eigennet_core::eigencore::{
    dense_hermitian_eig, lanczos, power_method, sample_covariance, tridiagonal_eigenvalues, CovarianceMatrix,
    SampleMatrix, Tridiagonal,
};
use eigennet_core::linalg::{dot_conj, norm};
use eigennet_core::signal_model::{gen_h1, SignalConfig};
use eigennet_core::topology::{generate_random_geometric, metropolis_weights, Graph};
use eigennet_core::{CMatrix, Error};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 256;

pub type Check = fn() -> Result<(), String>;

/// Every property, by name.
pub const PROPERTIES: &[(&str, Check)] = &[
    ("geometric graphs are connected", graph_connected),
    ("metropolis weights symmetric and stochastic", metropolis_structure),
    ("weight spectrum in (-1, 1] with simple unit eigenvalue", weight_spectrum),
    ("consensus mass conservation", mass_conservation),
    ("standard consensus contracts monotonically", monotone_contraction),
    ("chebyshev damping bound", chebyshev_bound),
    ("consensus determinism", consensus_determinism),
    ("lanczos ritz interlacing", interlacing),
    ("lanczos ritz containment", ritz_containment),
    ("power method angle decay", pm_angle_decay),
    ("bisection matches jacobi", bisection_oracle),
    ("ideal consensus reproduces PM and LA", ideal_equivalence),
    ("dla beta nonnegative", beta_nonnegative),
    ("decentralized determinism", decentralized_determinism),
    ("dpm error trace exactness", error_trace_exact),
    ("signal determinism", signal_determinism),
    ("statistic scale invariance", scale_invariance),
    ("dla-fed statistics defined", dla_statistics_defined),
    ("ideal statistic consensus is unanimous", unanimous_decisions),
    ("roc invariant under trial order", roc_order_invariance),
];

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn cn_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let v = default_dpm_start(rows * cols, seed);
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

pub fn sample(k: usize, n: usize, seed: u64) -> SampleMatrix {
    SampleMatrix::new(cn_matrix(k, n, seed)).unwrap()
}

fn graph(k: usize, seed: u64) -> Arc<Graph> {
    Arc::new(generate_random_geometric(k, 0.6, seed).unwrap())
}

fn disagreement(z: &CMatrix) -> f64 {
    z.sub(&z.consensus_target()).frobenius_norm()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn graph_connected() -> Result<(), String> {
    check((2usize..30, 0.1f64..0.9, any::<u64>()), |(k, r, seed)| {
        match generate_random_geometric(k, r, seed) {
            Ok(g) => prop_assert_eq!(g.reachable_from_first(), k),
            Err(Error::GenerationFailed { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        Ok(())
    })
}

pub fn metropolis_structure() -> Result<(), String> {
    check((2usize..25, any::<u64>()), |(k, seed)| {
        let g = graph(k, seed);
        let w = metropolis_weights(&g).to_dense();
        for (i, row) in w.iter().enumerate() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (j, &x) in row.iter().enumerate() {
                prop_assert_eq!(x, w[j][i]);
                prop_assert_eq!(x != 0.0, i == j || g.has_edge(i, j));
            }
        }
        Ok(())
    })
}

pub fn weight_spectrum() -> Result<(), String> {
    check((2usize..16, any::<u64>()), |(k, seed)| {
        let values = dense_hermitian_eig(&metropolis_weights(&graph(k, seed)).to_cmatrix()).unwrap().values;
        prop_assert!(values.iter().all(|&x| x > -1.0 && x <= 1.0 + 1e-9), "{values:?}");
        prop_assert_eq!(values.iter().filter(|&&x| (x - 1.0).abs() <= 1e-9).count(), 1);
        Ok(())
    })
}

fn engines() -> impl Strategy<Value = AcEngine> {
    prop_oneof![Just(AcEngine::Standard), Just(AcEngine::Chebyshev)]
}

pub fn mass_conservation() -> Result<(), String> {
    let strategy = (engines(), 2usize..20, 1usize..4, 1usize..40, prop_oneof![Just(0.0), Just(0.03), Just(0.3)], any::<u64>());
    check(strategy, |(engine, k, m, t, p, seed)| {
        let cfg = AcConfig::new(engine, graph(k, seed), t).unwrap().with_link_failures(p).with_seed(seed);
        let z0 = cn_matrix(k, m, seed ^ 1);
        let res = run_consensus(&z0, &cfg).unwrap();
        for (a, b) in z0.column_sums().iter().zip(res.z_t.column_sums()) {
            prop_assert!((a - b).norm() <= 1e-10, "{a} vs {b}");
        }
        Ok(())
    })
}

pub fn monotone_contraction() -> Result<(), String> {
    check((2usize..20, any::<u64>()), |(k, seed)| {
        let z0 = cn_matrix(k, 2, seed ^ 2);
        let mut last = disagreement(&z0);
        for t in 1..15 {
            let cfg = AcConfig::new(AcEngine::Standard, graph(k, seed), t).unwrap();
            let d = disagreement(&run_consensus(&z0, &cfg).unwrap().z_t);
            prop_assert!(d <= last + 1e-12, "t={t}: {d} > {last}");
            last = d;
        }
        Ok(())
    })
}

pub fn chebyshev_bound() -> Result<(), String> {
    check((2usize..25, 1usize..40, any::<u64>()), |(k, t, seed)| {
        let cfg = AcConfig::new(AcEngine::Chebyshev, graph(k, seed), t).unwrap();
        let bound = cfg.cheb.unwrap().damping(t);
        let z0 = cn_matrix(k, 2, seed ^ 3);
        let d = disagreement(&run_consensus(&z0, &cfg).unwrap().z_t);
        prop_assert!(d <= bound * disagreement(&z0) + 1e-12, "{d} > {bound}");
        Ok(())
    })
}

pub fn consensus_determinism() -> Result<(), String> {
    check((engines(), 2usize..20, 1usize..20, any::<u64>()), |(engine, k, t, seed)| {
        let cfg = AcConfig::new(engine, graph(k, seed), t).unwrap().with_link_failures(0.1).with_seed(seed);
        let z0 = cn_matrix(k, 3, seed);
        prop_assert_eq!(run_consensus(&z0, &cfg).unwrap(), run_consensus(&z0, &cfg).unwrap());
        Ok(())
    })
}

fn lanczos_on(k: usize, n: usize, seed: u64) -> (CovarianceMatrix, Tridiagonal) {
    let r = sample_covariance(&sample(k, n, seed));
    let t = lanczos(&r, &default_dla_start(k), k).unwrap().t;
    (r, t)
}

pub fn interlacing() -> Result<(), String> {
    check((2usize..13, 1usize..16, any::<u64>()), |(k, n, seed)| {
        let (_, t) = lanczos_on(k, n, seed);
        let tol = 1e-8 * t.inf_norm().max(1.0);
        for j in 1..t.size() {
            let a = tridiagonal_eigenvalues(&t.leading(j));
            let b = tridiagonal_eigenvalues(&t.leading(j + 1));
            for i in 0..j {
                prop_assert!(b[i + 1] - tol <= a[i] && a[i] <= b[i] + tol, "j={j}: {a:?} vs {b:?}");
            }
        }
        Ok(())
    })
}

pub fn ritz_containment() -> Result<(), String> {
    check((2usize..13, 1usize..16, any::<u64>()), |(k, n, seed)| {
        let (r, t) = lanczos_on(k, n, seed);
        let eig = dense_hermitian_eig(r.matrix()).unwrap().values;
        let tol = 1e-8 * eig[0].max(1.0);
        for j in 1..=t.size() {
            for x in tridiagonal_eigenvalues(&t.leading(j)) {
                prop_assert!(x >= eig[k - 1] - tol && x <= eig[0] + tol, "{x} outside {eig:?}");
            }
        }
        Ok(())
    })
}

pub fn pm_angle_decay() -> Result<(), String> {
    check((2usize..10, 2usize..20, any::<u64>()), |(k, n, seed)| {
        let r = sample_covariance(&sample(k, n, seed));
        let eig = dense_hermitian_eig(r.matrix()).unwrap();
        let (l1, l2) = (eig.values[0], eig.values[1]);
        prop_assume!(l1 - l2 > 1e-3 * l1);
        let u1 = eig.vector(0).unwrap();
        let v0 = default_dpm_start(k, seed ^ 4);
        let c1 = dot_conj(&u1, &v0).norm();
        prop_assume!(c1 > 1e-3 * norm(&v0));
        let tan0 = (norm(&v0).powi(2) - c1 * c1).max(0.0).sqrt() / c1;
        for j in 1..12 {
            let v = power_method(&r, &v0, j).unwrap().vector;
            let cos = dot_conj(&u1, &v).norm() / norm(&v);
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            let bound = tan0 * (l2 / l1).powi(j as i32);
            prop_assert!(sin <= bound * (1.0 + 1e-6) + 1e-7, "j={j}: {sin} > {bound}");
        }
        Ok(())
    })
}

pub fn bisection_oracle() -> Result<(), String> {
    let strategy = (1usize..13).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop_oneof![Just(0.0), -3.0f64..3.0], n - 1),
        )
    });
    check(strategy, |(alpha, beta)| {
        let t = Tridiagonal::new(alpha, beta);
        let got = tridiagonal_eigenvalues(&t);
        let want = dense_hermitian_eig(&t.to_dense()).unwrap().values;
        let tol = 1e-8 * t.inf_norm().max(1.0);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= tol, "{got:?} vs {want:?}");
        }
        Ok(())
    })
}

/// Checks one seeded instance of the ideal-consensus equivalence.
pub fn ideal_instance(k: usize, n: usize, m: usize, seed: u64) -> Result<(), String> {
    let y = sample(k, n, seed);
    let r = sample_covariance(&y);
    let cfg = AcConfig::new(AcEngine::Ideal, Arc::new(Graph::complete(k)), 1).unwrap();

    let v0 = default_dpm_start(k, seed ^ 5);
    let pm = power_method(&r, &v0, m).map_err(|e| e.to_string())?;
    let dpm = dpm_run(&y, &mut cfg.build().unwrap(), m, &v0).map_err(|e| e.to_string())?;
    for (node, l) in dpm.lambda.iter().enumerate() {
        if !close(*l, pm.lambda, 1e-12) {
            return Err(format!("DPM node {node}: {l} vs {}", pm.lambda));
        }
    }
    let scale = pm.log_scale.exp();
    let pm_norm = norm(&pm.vector) * scale;
    for (a, b) in dpm.v_history[m].iter().zip(&pm.vector) {
        if (a - b * scale).norm() > 1e-12 * pm_norm {
            return Err(format!("DPM iterate {a} vs {}", b * scale));
        }
    }

    // Past the Krylov closure at j = min(K, N) + 1 the recursion runs on
    // rounding noise, so T is compared entrywise only up to there; the
    // filtered estimates are compared in full.
    let v1 = default_dla_start(k);
    let la = lanczos(&r, &v1, m).map_err(|e| e.to_string())?.t;
    let la_values = EigenPipeline::la(m).run(&y, seed).map_err(|e| e.to_string())?.per_node.remove(0);
    let dla = dla_run(&y, &mut cfg.build().unwrap(), m, &v1).map_err(|e| e.to_string())?;
    let tol = 1e-12 * la.inf_norm().max(f64::MIN_POSITIVE);
    let closed = k.min(n);
    for (node, t) in dla.tridiagonals.iter().enumerate() {
        let c = closed.min(t.size()).min(la.size());
        let entries = t.alpha[..c].iter().zip(&la.alpha[..c]).chain(t.beta[..c - 1].iter().zip(&la.beta[..c - 1]));
        for (a, b) in entries {
            if (a - b).abs() > tol {
                return Err(format!("DLA node {node}: T entry {a} vs {b}"));
            }
        }
        let got = &dla.eigenvalues[node];
        if got.len() != la_values.len() {
            return Err(format!("DLA node {node}: estimates {got:?} vs {la_values:?}"));
        }
        let scale = la_values.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
        for (a, b) in got.iter().zip(&la_values) {
            if (a - b).abs() > 1e-12 * scale {
                return Err(format!("DLA node {node}: estimate {a} vs {b}"));
            }
        }
    }
    Ok(())
}

/// `(K, N, M)` with `M ≤ K`.
pub fn ideal_sizes() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (2usize..=16, 1usize..=16, any::<u64>())
        .prop_flat_map(|(k, n, seed)| (Just(k), Just(n), 1..=k, Just(seed)))
}

pub fn ideal_equivalence() -> Result<(), String> {
    check(ideal_sizes(), |(k, n, m, seed)| ideal_instance(k, n, m, seed).map_err(TestCaseError::fail))
}

pub fn beta_nonnegative() -> Result<(), String> {
    check((3usize..12, 1usize..10, 1usize..4, any::<u64>()), |(k, n, t, seed)| {
        let y = sample(k, n, seed);
        let cfg = AcConfig::new(AcEngine::Standard, Arc::new(Graph::path(k)), t).unwrap();
        let out = dla_run(&y, &mut cfg.build().unwrap(), k.min(6), &default_dla_start(k)).unwrap();
        for node in &out.nodes {
            prop_assert!(node.beta_hist.iter().all(|b| *b >= 0.0), "{:?}", node.beta_hist);
        }
        Ok(())
    })
}

pub fn decentralized_determinism() -> Result<(), String> {
    check((3usize..12, 2usize..10, any::<u64>()), |(k, n, seed)| {
        let y = sample(k, n, seed);
        let cfg = AcConfig::new(AcEngine::Chebyshev, graph(k, seed), 4).unwrap().with_link_failures(0.1).with_seed(seed);
        let m = k.min(5);
        let a = dla_run(&y, &mut cfg.build().unwrap(), m, &default_dla_start(k)).unwrap();
        let b = dla_run(&y, &mut cfg.build().unwrap(), m, &default_dla_start(k)).unwrap();
        prop_assert_eq!(&a.tridiagonals, &b.tridiagonals);
        prop_assert_eq!(&a.eigenvalues, &b.eigenvalues);
        let v0 = default_dpm_start(k, seed);
        let c = dpm_run(&y, &mut cfg.build().unwrap(), m, &v0).unwrap();
        let d = dpm_run(&y, &mut cfg.build().unwrap(), m, &v0).unwrap();
        prop_assert_eq!(c.lambda, d.lambda);
        Ok(())
    })
}

pub fn error_trace_exact() -> Result<(), String> {
    check((3usize..12, 2usize..10, 1usize..8, 1usize..5, any::<u64>()), |(k, n, m, t, seed)| {
        let y = sample(k, n, seed);
        let cfg = AcConfig::new(AcEngine::Standard, graph(k, seed), t).unwrap();
        let v0 = default_dpm_start(k, seed ^ 6);
        let out = dpm_run(&y, &mut cfg.build().unwrap(), m, &v0).unwrap();
        let vm = &out.v_history[m];
        let pred = predict_dpm_vector_error(&sample_covariance(&y), &out.trace, &v0);
        for (a, b) in pred.iter().zip(vm) {
            prop_assert!((a - b).norm() <= 1e-12 * norm(vm), "{a} vs {b}");
        }
        let rec = predict_lambda1_error(&y, &out.trace, vm).unwrap();
        for (a, b) in rec.lambda.iter().zip(&out.lambda) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
        Ok(())
    })
}

pub fn signal_determinism() -> Result<(), String> {
    check((1usize..20, 1usize..20, -10.0f64..20.0, any::<u64>()), |(k, n, snr, seed)| {
        let cfg = SignalConfig::new(k, n, 1.0, vec![snr], seed).unwrap();
        prop_assert_eq!(gen_h1(&cfg).unwrap(), gen_h1(&cfg).unwrap());
        Ok(())
    })
}

pub fn scale_invariance() -> Result<(), String> {
    let strategy = (prop::collection::vec(prop_oneof![1 => Just(0.0), 9 => 1e-3f64..1e3], 1..12), 1e-3f64..1e3);
    check(strategy, |(lam, c)| {
        prop_assume!(lam.iter().any(|x| *x > 0.0));
        let scaled: Vec<f64> = lam.iter().map(|x| x * c).collect();
        for kind in [StatisticKind::Gt, StatisticKind::St, StatisticKind::Jt] {
            let a = compute_statistic(kind, &lam, None).unwrap().value;
            let b = compute_statistic(kind, &scaled, None).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{kind}: {a} vs {b}");
        }
        let a = compute_statistic(StatisticKind::Rt, &lam, Some(1.5)).unwrap().value;
        let b = compute_statistic(StatisticKind::Rt, &scaled, Some(1.5)).unwrap().value;
        prop_assert!(close(a * c, b, 1e-12));
        Ok(())
    })
}

pub fn dla_statistics_defined() -> Result<(), String> {
    check((4usize..14, 2usize..12, 1usize..6, 1usize..8, any::<u64>()), |(k, n, m, t, seed)| {
        let m = m.min(k);
        let y = sample(k, n, seed);
        let cfg = AcConfig::new(AcEngine::Chebyshev, graph(k, seed), t).unwrap();
        let out = dla_run(&y, &mut cfg.build().unwrap(), m, &default_dla_start(k)).unwrap();
        for list in &out.eigenvalues {
            prop_assert!(list.len() <= m);
            if list.iter().any(|x| *x > 0.0) {
                for kind in [StatisticKind::Gt, StatisticKind::St, StatisticKind::Jt] {
                    let s = compute_statistic(kind, list, None).unwrap();
                    prop_assert!(s.value.is_finite());
                }
            }
        }
        Ok(())
    })
}

pub fn unanimous_decisions() -> Result<(), String> {
    check((prop::collection::vec(0.0f64..10.0, 2..30), 0.0f64..10.0), |(values, threshold)| {
        let k = values.len();
        let cfg = AcConfig::new(AcEngine::Ideal, Arc::new(Graph::ring(k)), 1).unwrap();
        let out = statistic_consensus(&values, &mut cfg.build().unwrap()).unwrap();
        let first = out[0] > threshold;
        prop_assert!(out.iter().all(|v| (*v > threshold) == first));
        Ok(())
    })
}

pub fn roc_order_invariance() -> Result<(), String> {
    let strategy = (prop::collection::vec(0.0f64..5.0, 20..60), prop::collection::vec(0.0f64..8.0, 20..60))
        .prop_flat_map(|(a, b)| (Just(a.clone()), Just(b.clone()), Just(a).prop_shuffle(), Just(b).prop_shuffle()));
    check(strategy, |(h0, h1, p0, p1)| {
        prop_assert_eq!(roc_curve(&h0, &h1, None), roc_curve(&p0, &p1, None));
        prop_assert_eq!(threshold_from_samples(&h0, 0.5).ok(), threshold_from_samples(&p0, 0.5).ok());
        Ok(())
    })
}
