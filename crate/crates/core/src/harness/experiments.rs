use std::sync::Arc;

use super::{AuditRow, ConvergenceRow, ExperimentConfig, ExperimentReport, OperatingPoint, PropRow, RocCurve};
use crate::consensus::{AcConfig, AcEngine, Consensus, InjectedConsensus};
use crate::dec_eig::{
    audit_messages, check_dpm_convergence_condition, default_dla_start, default_dpm_start, dla_run_with,
    dpm_run_with, predict_dla_w_error, predict_dpm_vector_error, predict_lambda1_error, Algorithm,
    ConvergenceTrace, DlaOptions, DpmOptions,
};
use crate::detection::{roc_curve, threshold_from_samples, trial_seed, EigenPipeline, PipelineKind};
use crate::eigencore::{covariance_spectrum, dense_hermitian_eig, sample_covariance, SampleMatrix};
use crate::error::Result;
use crate::linalg::{norm, CMatrix, C64};
use crate::signal_model::{gen_h0, gen_h1, SignalConfig};
use crate::topology::Graph;

fn signal(cfg: &ExperimentConfig, seed: u64) -> Result<SignalConfig> {
    SignalConfig::new(cfg.nodes, cfg.samples, cfg.sigma2, cfg.snr_db.clone(), seed)
}

/// H1 data when sources are configured, noise otherwise.
fn trial_data(cfg: &ExperimentConfig, seed: u64) -> Result<SampleMatrix> {
    let s = signal(cfg, seed)?;
    if s.sources() == 0 {
        gen_h0(&s)
    } else {
        Ok(gen_h1(&s)?.0)
    }
}

fn ac_config(cfg: &ExperimentConfig, graph: &Arc<Graph>, engine: AcEngine, i: usize, seed: u64) -> Result<AcConfig> {
    Ok(AcConfig::new(engine, graph.clone(), i)?
        .with_link_failures(cfg.link_failure_prob)
        .with_seed(seed))
}

fn seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    (0..cfg.trials as u64).map(|t| trial_seed(cfg.seed, t)).collect()
}

/// Running sum of squared errors over trials and nodes.
#[derive(Clone, Copy, Default)]
struct Mse {
    sum: f64,
    count: usize,
}

impl Mse {
    fn add(&mut self, estimate: f64, truth: f64) {
        self.sum += (estimate - truth).powi(2);
        self.count += 1;
    }

    /// Missing estimates count as 0.
    fn add_list(&mut self, estimates: &[f64], index: usize, truth: f64) {
        self.add(estimates.get(index).copied().unwrap_or(0.0), truth);
    }

    fn value(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }
}

fn row(cfg: &ExperimentConfig, engine: &str, algorithm: &str, m: usize, i: usize, idx: usize, mse: f64) -> ConvergenceRow {
    ConvergenceRow {
        experiment: cfg.experiment,
        engine: engine.to_string(),
        algorithm: algorithm.to_string(),
        nodes: cfg.nodes,
        samples: cfg.samples,
        iterations: m,
        ac_iterations: i,
        trials: cfg.trials,
        eig_index: idx,
        mse,
    }
}

/// DPM `λ1` MSE against the consensus iteration count, per engine, plus the
/// centralized power-method floor.
pub(super) fn ac_compare(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    let seeds = seeds(cfg);
    let m = cfg.iterations;
    let mut floor = Mse::default();
    let mut acc = vec![vec![Mse::default(); cfg.ac_iterations.len()]; cfg.engines.len()];
    for &s in &seeds {
        let y = trial_data(cfg, s)?;
        let l1 = covariance_spectrum(&y)[0];
        let v0 = default_dpm_start(cfg.nodes, s);
        let mut ideal = ac_config(cfg, graph, AcEngine::Ideal, 1, s)?.build()?;
        for l in dpm_run_with(&y, &mut ideal, m, &v0, &DpmOptions::default())?.lambda {
            floor.add(l, l1);
        }
        for (e, &engine) in cfg.engines.iter().enumerate() {
            for (ii, &i) in cfg.ac_iterations.iter().enumerate() {
                let mut ac = ac_config(cfg, graph, engine, i, s)?.build()?;
                for l in dpm_run_with(&y, &mut ac, m, &v0, &DpmOptions::default())?.lambda {
                    acc[e][ii].add(l, l1);
                }
            }
        }
    }
    let mut report = ExperimentReport::empty(cfg.clone());
    for (e, engine) in cfg.engines.iter().enumerate() {
        for (ii, &i) in cfg.ac_iterations.iter().enumerate() {
            report.convergence.push(row(cfg, engine.name(), "DPM", m, i, 1, acc[e][ii].value()));
        }
    }
    for &i in &cfg.ac_iterations {
        report.convergence.push(row(cfg, "ideal", "PM", m, i, 1, floor.value()));
    }
    report.trial_seeds = seeds;
    Ok(report)
}

fn dla_history_opts() -> DlaOptions {
    DlaOptions {
        track_history: true,
        ..DlaOptions::default()
    }
}

/// Ritz list after `j` iterations; runs that stopped early keep their last list.
fn ritz_at(history: &[Vec<Vec<f64>>], j: usize, node: usize) -> &[f64] {
    &history[j.min(history.len()) - 1][node]
}

/// Per-`j` accumulation of DPM and DLA MSEs for one engine setting.
struct Tracks {
    dpm: Vec<Mse>,
    dla: Vec<Vec<Mse>>,
}

impl Tracks {
    fn new(m: usize, indices: usize) -> Self {
        Self {
            dpm: vec![Mse::default(); m],
            dla: vec![vec![Mse::default(); indices]; m],
        }
    }
}

/// What a convergence experiment records for each trial.
struct Plan<'a> {
    cfg: &'a ExperimentConfig,
    indices: &'a [usize],
    dpm: bool,
    dla: bool,
}

fn accumulate(
    tracks: &mut Tracks,
    plan: &Plan,
    y: &SampleMatrix,
    spectrum: &[f64],
    seed: u64,
    ac: &mut dyn Consensus,
) -> Result<()> {
    let Plan { cfg, indices, dpm, dla } = *plan;
    let m = cfg.iterations;
    let k = cfg.nodes;
    if dpm {
        let out = dpm_run_with(y, ac, m, &default_dpm_start(k, seed), &DpmOptions { track_history: true })?;
        for (j, per_node) in out.lambda_history.iter().enumerate() {
            for l in per_node {
                tracks.dpm[j].add(*l, spectrum[0]);
            }
        }
    }
    if dla {
        let out = dla_run_with(y, ac, m, &default_dla_start(k), &dla_history_opts())?;
        for j in 1..=m {
            for node in 0..k {
                let list = ritz_at(&out.ritz_history, j, node);
                for (x, &idx) in indices.iter().enumerate() {
                    tracks.dla[j - 1][x].add_list(list, idx - 1, spectrum[idx - 1]);
                }
            }
        }
    }
    Ok(())
}

fn convergence_experiment(
    cfg: &ExperimentConfig,
    graph: &Arc<Graph>,
    indices: &[usize],
    with_dpm: bool,
) -> Result<ExperimentReport> {
    let seeds = seeds(cfg);
    let m = cfg.iterations;
    let dpm = with_dpm && cfg.algorithms.contains(&Algorithm::Dpm);
    let dla = cfg.algorithms.contains(&Algorithm::Dla);
    let plan = Plan { cfg, indices, dpm, dla };
    let mut reference = Tracks::new(m, indices.len());
    let mut tracks: Vec<Vec<Tracks>> = cfg
        .engines
        .iter()
        .map(|_| cfg.ac_iterations.iter().map(|_| Tracks::new(m, indices.len())).collect())
        .collect();
    for &s in &seeds {
        let y = trial_data(cfg, s)?;
        let spectrum = covariance_spectrum(&y);
        let mut ideal = ac_config(cfg, graph, AcEngine::Ideal, 1, s)?.build()?;
        accumulate(&mut reference, &plan, &y, &spectrum, s, &mut ideal)?;
        for (e, &engine) in cfg.engines.iter().enumerate() {
            for (ii, &i) in cfg.ac_iterations.iter().enumerate() {
                let mut ac = ac_config(cfg, graph, engine, i, s)?.build()?;
                accumulate(&mut tracks[e][ii], &plan, &y, &spectrum, s, &mut ac)?;
            }
        }
    }
    let mut report = ExperimentReport::empty(cfg.clone());
    let mut emit = |t: &Tracks, engine: &str, i: usize, names: (&str, &str)| {
        for j in 1..=m {
            if dpm {
                report.convergence.push(row(cfg, engine, names.0, j, i, 1, t.dpm[j - 1].value()));
            }
            if dla {
                for (x, &idx) in indices.iter().enumerate() {
                    report.convergence.push(row(cfg, engine, names.1, j, i, idx, t.dla[j - 1][x].value()));
                }
            }
        }
    };
    for (e, engine) in cfg.engines.iter().enumerate() {
        for (ii, &i) in cfg.ac_iterations.iter().enumerate() {
            emit(&tracks[e][ii], engine.name(), i, ("DPM", "DLA"));
        }
    }
    emit(&reference, "ideal", 0, ("PM", "LA"));
    report.trial_seeds = seeds;
    Ok(report)
}

/// `λ1` MSE against `j = 1..M` for DPM and DLA at each consensus setting.
pub(super) fn eig_converge(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    convergence_experiment(cfg, graph, &[1], true)
}

/// DLA MSE of several eigenvalues against `j = 1..M`.
pub(super) fn multi_eig(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    let mut indices = cfg.eig_indices.clone();
    indices.retain(|i| *i <= cfg.nodes);
    convergence_experiment(cfg, graph, &indices, false)
}

fn pipeline(cfg: &ExperimentConfig, graph: &Arc<Graph>, kind: PipelineKind) -> Result<EigenPipeline> {
    let ac = || ac_config(cfg, graph, cfg.engines[0], cfg.ac_iterations[0], cfg.seed);
    let p = match kind {
        PipelineKind::Exact => EigenPipeline::exact(),
        PipelineKind::Pm => EigenPipeline::pm(cfg.iterations),
        PipelineKind::La => EigenPipeline::la(cfg.iterations),
        PipelineKind::Dpm => EigenPipeline::dpm(cfg.iterations, ac()?),
        PipelineKind::Dla => EigenPipeline::dla(cfg.iterations, ac()?),
    };
    Ok(p.with_sum_mode(cfg.sum_mode).with_final_round(cfg.final_round))
}

/// ROC per detector and pipeline. Every pipeline sees the same H0 and H1
/// sample matrices; statistics are pooled over nodes.
pub(super) fn roc(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    let pipelines: Vec<(PipelineKind, EigenPipeline)> = cfg
        .pipelines
        .iter()
        .map(|&k| pipeline(cfg, graph, k).map(|p| (k, p)))
        .collect::<Result<_>>()?;
    let nd = cfg.detectors.len();
    let mut h0 = vec![vec![Vec::new(); nd]; pipelines.len()];
    let mut h1 = vec![vec![Vec::new(); nd]; pipelines.len()];
    let mut trial_seeds = Vec::with_capacity(2 * cfg.trials);
    for t in 0..cfg.trials as u64 {
        let s0 = trial_seed(cfg.seed, 2 * t);
        let s1 = trial_seed(cfg.seed, 2 * t + 1);
        trial_seeds.extend([s0, s1]);
        let y0 = gen_h0(&signal(cfg, s0)?)?;
        let y1 = gen_h1(&signal(cfg, s1)?)?.0;
        for (p, (_, pipe)) in pipelines.iter().enumerate() {
            let o0 = pipe.run(&y0, s0)?;
            let o1 = pipe.run(&y1, s1)?;
            for (d, &kind) in cfg.detectors.iter().enumerate() {
                h0[p][d].extend(pipe.statistic(&o0, kind, Some(cfg.sigma2))?);
                h1[p][d].extend(pipe.statistic(&o1, kind, Some(cfg.sigma2))?);
            }
        }
    }
    let mut report = ExperimentReport::empty(cfg.clone());
    for (d, &detector) in cfg.detectors.iter().enumerate() {
        for (p, (kind, _)) in pipelines.iter().enumerate() {
            let (a, b) = (&h0[p][d], &h1[p][d]);
            let points = roc_curve(a, b, None);
            let mut operating = Vec::new();
            for &alpha in &cfg.alphas {
                if let Ok(threshold) = threshold_from_samples(a, alpha) {
                    let pt = roc_curve(a, b, Some(&[threshold]))[0];
                    operating.push(OperatingPoint {
                        alpha,
                        threshold,
                        pfa: pt.pfa,
                        pd: pt.pd,
                    });
                }
            }
            report.roc.push(RocCurve {
                detector,
                pipeline: *kind,
                points,
                operating,
            });
        }
    }
    report.trial_seeds = trial_seeds;
    Ok(report)
}

/// Message counters of one DPM and one DLA run against the closed forms,
/// using the first configured consensus setting.
pub(super) fn audit(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    let s = trial_seed(cfg.seed, 0);
    let y = trial_data(cfg, s)?;
    let i = cfg.ac_iterations[0];
    let degrees = graph.degrees();
    let (m, n) = (cfg.iterations as u64, cfg.samples as u64);
    let mut report = ExperimentReport::empty(cfg.clone());
    for &alg in &cfg.algorithms {
        let mut ac = ac_config(cfg, graph, cfg.engines[0], i, s)?.build()?;
        let audit = match alg {
            Algorithm::Dpm => {
                dpm_run_with(&y, &mut ac, cfg.iterations, &default_dpm_start(cfg.nodes, s), &DpmOptions::default())?
                    .audit
            }
            Algorithm::Dla => {
                let opts = DlaOptions {
                    filter: false,
                    ..DlaOptions::default()
                };
                dla_run_with(&y, &mut ac, cfg.iterations, &default_dla_start(cfg.nodes), &opts)?.audit
            }
        };
        audit_messages(alg, &audit, m, n, i as u64, &degrees)?;
        for (node, &units) in audit.units_per_node.iter().enumerate() {
            report.audit.push(AuditRow {
                algorithm: alg,
                node,
                degree: degrees[node],
                ac_n_calls: audit.ac_n_calls,
                ac_1_calls: audit.ac_1_calls,
                units,
                time_periods: audit.time_periods,
            });
        }
    }
    report.trial_seeds = vec![s];
    Ok(report)
}

fn prop(check: &str, quantity: &str, value: f64, tolerance: f64) -> PropRow {
    PropRow {
        check: check.into(),
        quantity: quantity.into(),
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

/// Seeded perturbation of size `eps` for every consensus call.
fn perturbation(eps: f64, seed: u64) -> impl FnMut(usize, &CMatrix) -> Option<CMatrix> {
    move |call, z0: &CMatrix| {
        let (r, c) = (z0.rows(), z0.cols());
        let v = default_dpm_start(r * c, seed.wrapping_add(call as u64));
        Some(CMatrix::from_fn(r, c, |i, j| {
            let x = v[i * c + j] * eps;
            if c == 1 {
                C64::new(x.re, 0.0)
            } else {
                x
            }
        }))
    }
}

/// Residual of the first-order DLA residual-error model at iteration `j`.
fn w_model_residual(y: &SampleMatrix, graph: &Arc<Graph>, m: usize, j: usize, eps: f64, seed: u64) -> Result<f64> {
    let base = AcConfig::new(AcEngine::Ideal, graph.clone(), 1)?.build()?;
    let mut ac = InjectedConsensus::new(base, perturbation(eps, seed));
    let opts = DlaOptions {
        filter: false,
        ..DlaOptions::default()
    };
    let out = dla_run_with(y, &mut ac, m, &default_dla_start(y.nodes()), &opts)?;
    let p = predict_dla_w_error(y, &out.trace, &out.v_history, &out.w_history, j)?;
    let diff: Vec<C64> = out.trace.e_w[j - 1].iter().zip(&p.predicted).map(|(a, b)| a - b).collect();
    Ok(norm(&diff))
}

/// Error-propagation checks with the configured consensus engine, plus a
/// controlled-injection check of the second-order DLA residual.
pub(super) fn prop_check(cfg: &ExperimentConfig, graph: &Arc<Graph>) -> Result<ExperimentReport> {
    let seeds = seeds(cfg);
    let m = cfg.iterations;
    let i = cfg.ac_iterations[0];
    let mut worst_v: f64 = 0.0;
    let mut worst_l: f64 = 0.0;
    let mut worst_ratio_dev: f64 = 0.0;
    let mut holds = 0usize;
    let mut sin_final = 0.0;
    let mut w_rel: f64 = 0.0;
    for &s in &seeds {
        let mut y = trial_data(cfg, s)?;
        let eig = dense_hermitian_eig(sample_covariance(&y).matrix())?;
        if eig.values[0] <= 1.0 {
            y = y.scaled((2.0 / eig.values[0].max(f64::MIN_POSITIVE)).sqrt());
        }
        let r = sample_covariance(&y);
        let eig = dense_hermitian_eig(r.matrix())?;
        let u1 = eig.vector(0).expect("vectors requested");
        let mut v0 = default_dpm_start(cfg.nodes, s);
        let mut redraw = s;
        while crate::linalg::dot_conj(&u1, &v0).norm() < 1e-8 * norm(&v0) {
            redraw = redraw.wrapping_add(1);
            v0 = default_dpm_start(cfg.nodes, redraw);
        }

        let mut ac = ac_config(cfg, graph, cfg.engines[0], i, s)?.build()?;
        let out = dpm_run_with(&y, &mut ac, m, &v0, &DpmOptions::default())?;
        let vm = &out.v_history[m];
        let pred = predict_dpm_vector_error(&r, &out.trace, &v0);
        let d: Vec<C64> = pred.iter().zip(vm).map(|(a, b)| a - b).collect();
        worst_v = worst_v.max(norm(&d) / norm(vm));
        let rec = predict_lambda1_error(&y, &out.trace, vm)?;
        for (a, b) in rec.lambda.iter().zip(&out.lambda) {
            worst_l = worst_l.max((a - b).abs() / b.abs());
        }
        let trace = ConvergenceTrace::from_run(&out.v_history, &out.trace.d, &u1);
        let verdict = check_dpm_convergence_condition(&trace, &eig)?;
        holds += usize::from(verdict.condition_holds);
        sin_final += trace.sin_theta[m];

        let mut ac = ac_config(cfg, graph, cfg.engines[0], i, s)?.build()?;
        let dla = dla_run_with(&y, &mut ac, m, &default_dla_start(cfg.nodes), &DlaOptions::default())?;
        for (e, p) in dla.trace.e_w.iter().zip(&dla.trace.e_w_pred) {
            let diff: Vec<C64> = e.iter().zip(p).map(|(a, b)| a - b).collect();
            let scale = norm(e);
            if scale > 0.0 {
                w_rel = w_rel.max(norm(&diff) / scale);
            }
        }

        if m >= 2 {
            let j = m.min(3);
            let r1 = w_model_residual(&y, graph, m, j, 1e-4, s)?;
            let r2 = w_model_residual(&y, graph, m, j, 5e-5, s)?;
            if r2 > 0.0 {
                worst_ratio_dev = worst_ratio_dev.max((r1 / r2 - 4.0).abs());
            }
        }
    }
    let n = seeds.len() as f64;
    let mut report = ExperimentReport::empty(cfg.clone());
    report.prop = vec![
        prop("dpm_vector", "max_relative_residual", worst_v, 1e-10),
        prop("lambda1", "max_relative_residual", worst_l, 1e-10),
        prop("dla_w_second_order", "max_ratio_deviation_from_4", worst_ratio_dev, 1.0),
        prop("dla_w_realized", "max_relative_residual", w_rel, f64::INFINITY),
        prop("dpm_convergence", "mean_sin_theta_final", sin_final / n, f64::INFINITY),
        prop("dpm_convergence", "condition_holds_fraction", holds as f64 / n, f64::INFINITY),
    ];
    report.trial_seeds = seeds;
    Ok(report)
}

