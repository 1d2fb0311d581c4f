//! Runs, sweeps, comparisons, spectral reports and geometry probes driven by
//! an [`ExperimentConfig`].

use rayon::prelude::*;

use super::config::{
    normal_hessian, ExperimentConfig, Method, ReferenceConstants, RegionKind, SweepGrid,
};
use crate::dynamics::{
    integrate_ode, max_stable_step, run_discrete, FlowTrajectory, StopReason, Trajectory,
};
use crate::error::{Error, Result};
use crate::estimator::{compare_to_theory, Grid, Outcome, RateEstimate, RateEstimator, Verdict};
use crate::geometry::{geometry_report, hessian_normal_spectrum, GeometryReport, Region};
use crate::linalg::norm;
use crate::objectives::{Objective, ObjectiveKind};
use crate::rates::{
    continuous_spectral_report, discrete_spectral_report, m_continuous, m_discrete, SpectralReport,
};

/// Default ODE step when none is configured (capped by the RK4 guard).
pub const DEFAULT_ODE_STEP: f64 = 1e-3;
/// Default ODE horizon in units of the slowest theoretical time constant.
pub const HORIZON_TIME_CONSTANTS: f64 = 40.0;
/// Factor between the last step (or residual velocity) and the lowest
/// distance the fit may use; below it the distance to the final point is
/// dominated by the final point's own error.
pub const FLOOR_FACTOR: f64 = 100.0;

/// Recorded path of a run.
#[derive(Debug, Clone)]
pub enum Trace {
    Discrete(Trajectory),
    Flow(FlowTrajectory),
}

/// Outcome of one run, with everything needed for the summary row.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub objective: String,
    /// Method with every hyperparameter resolved (ODE step and horizon filled).
    pub method: Method,
    pub constants: ReferenceConstants,
    /// `(μ, L)` the theoretical rate was computed from.
    pub theory_constants: (f64, f64),
    /// Rate of the distance series: per-step factor or exponent. NaN when the
    /// hyperparameters are outside the admissible range.
    pub theory_rate: f64,
    pub estimate: Option<RateEstimate>,
    pub fgap_theory_rate: f64,
    pub fgap_estimate: Option<RateEstimate>,
    /// Steps taken (iterations or RK4 steps).
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub final_grad_norm: f64,
    pub expected_divergent: bool,
    pub verdict: Verdict,
    pub trace: Option<Trace>,
}

impl RunReport {
    fn failed(
        cfg: &ExperimentConfig,
        method: Method,
        expected_divergent: bool,
        err: &Error,
    ) -> Self {
        Self {
            objective: cfg.objective.label(),
            method,
            constants: cfg.constants,
            theory_constants: (cfg.constants.mu, cfg.constants.l),
            theory_rate: f64::NAN,
            estimate: None,
            fgap_theory_rate: f64::NAN,
            fgap_estimate: None,
            iterations: 0,
            stop_reason: StopReason::MaxIters,
            final_grad_norm: f64::NAN,
            expected_divergent,
            verdict: Verdict {
                outcome: Outcome::Fail,
                details: format!("run failed: {err}"),
            },
            trace: None,
        }
    }

    /// A sweep row is as expected when it passes, or diverges where
    /// divergence was predicted.
    pub fn as_expected(&self) -> bool {
        match self.verdict.outcome {
            Outcome::Pass => true,
            Outcome::Divergent => self.expected_divergent,
            Outcome::Fail => false,
        }
    }
}

/// Constants used for the theoretical rate: exact for a quadratic, the
/// Hessian normal spectrum at the end point otherwise, falling back to the
/// reference constants when the end point is not close enough to a minimizer.
fn theory_constants(obj: &Objective, cfg: &ExperimentConfig, end: &[f64]) -> (f64, f64) {
    if let ObjectiveKind::Quadratic { .. } = obj.spec().kind {
        return obj.nominal_constants();
    }
    hessian_normal_spectrum(obj, end, None)
        .and_then(|s| s.extremes())
        .unwrap_or((cfg.constants.mu, cfg.constants.l))
}

/// Resolved ODE step and horizon for `alpha`.
pub fn ode_grid(
    obj: &Objective,
    cfg: &ExperimentConfig,
    alpha: f64,
    h: Option<f64>,
    horizon: Option<f64>,
) -> Result<(f64, f64)> {
    let h = h
        .unwrap_or_else(|| DEFAULT_ODE_STEP.min(max_stable_step(obj.nominal_constants().1, alpha)));
    let t = match horizon {
        Some(t) => t,
        None => HORIZON_TIME_CONSTANTS / m_continuous(alpha, cfg.constants.mu)?,
    };
    Ok((h, t))
}

fn verdict_for(
    stop: StopReason,
    estimate: &Result<RateEstimate>,
    theory: f64,
    eps: f64,
) -> Verdict {
    if stop == StopReason::Divergence {
        return Verdict {
            outcome: Outcome::Divergent,
            details: "iterates left the blow-up bound or became non-finite".into(),
        };
    }
    match estimate {
        Err(e) => Verdict {
            outcome: Outcome::Fail,
            details: format!("no rate estimate: {e}"),
        },
        Ok(_) if theory.is_nan() => Verdict {
            outcome: Outcome::Fail,
            details: "hyperparameters outside the admissible range; no theoretical rate".into(),
        },
        Ok(est) => compare_to_theory(est, theory, eps),
    }
}

fn discrete_run(
    obj: &Objective,
    cfg: &ExperimentConfig,
    method: Method,
    expected_divergent: bool,
) -> Result<RunReport> {
    let params = method.discrete_params().expect("discrete method");
    let traj = run_discrete(obj, &cfg.x0, &cfg.x1, params, cfg.stopping)?;
    let (mu, l) = theory_constants(obj, cfg, traj.final_point());
    let theory = m_discrete(params, mu, l).unwrap_or(f64::NAN);

    let mut est = cfg.estimator;
    if theory < 1.0 {
        est = est.with_floor(FLOOR_FACTOR * traj.last_step() / (1.0 - theory));
    }
    let estimate = est.estimate(&traj.dist_to_final, Grid::PerIteration);
    let fgap_estimate = fgap_estimator(cfg).estimate(&traj.f_gaps, Grid::PerIteration);
    let verdict = verdict_for(traj.stop_reason, &estimate, theory, cfg.eps);
    Ok(RunReport {
        objective: cfg.objective.label(),
        method,
        constants: cfg.constants,
        theory_constants: (mu, l),
        theory_rate: theory,
        estimate: estimate.ok(),
        fgap_theory_rate: theory * theory,
        fgap_estimate: fgap_estimate.ok(),
        iterations: traj.len() - 1,
        stop_reason: traj.stop_reason,
        final_grad_norm: traj.grad_norms.last().copied().unwrap_or(f64::NAN),
        expected_divergent,
        verdict,
        trace: Some(Trace::Discrete(traj)),
    })
}

fn fgap_estimator(cfg: &ExperimentConfig) -> RateEstimator {
    cfg.estimator.squared()
}

fn ode_run(obj: &Objective, cfg: &ExperimentConfig, method: Method) -> Result<RunReport> {
    let Method::HbOde { alpha, h, horizon } = method else {
        unreachable!("ode_run takes an ODE method")
    };
    let (h, t_end) = ode_grid(obj, cfg, alpha, h, horizon)?;
    let flow = integrate_ode(obj, &cfg.x0, &cfg.v0, alpha, h, t_end)?;
    let (mu, l) = theory_constants(obj, cfg, flow.final_position());
    let theory = m_continuous(alpha, mu)?;

    let est = cfg
        .estimator
        .with_floor(FLOOR_FACTOR * norm(flow.final_velocity()) / theory);
    let grid = Grid::PerUnitTime { h };
    let estimate = est.estimate(&flow.dist_to_final, grid);
    let fgap_estimate = fgap_estimator(cfg).estimate(&flow.f_gaps, grid);
    let verdict = verdict_for(flow.stop_reason, &estimate, theory, cfg.eps);
    Ok(RunReport {
        objective: cfg.objective.label(),
        method: Method::HbOde {
            alpha,
            h: Some(h),
            horizon: Some(t_end),
        },
        constants: cfg.constants,
        theory_constants: (mu, l),
        theory_rate: theory,
        estimate: estimate.ok(),
        fgap_theory_rate: 2.0 * theory,
        fgap_estimate: fgap_estimate.ok(),
        iterations: flow.len() - 1,
        stop_reason: flow.stop_reason,
        final_grad_norm: flow.grad_norms.last().copied().unwrap_or(f64::NAN),
        expected_divergent: false,
        verdict,
        trace: Some(Trace::Flow(flow)),
    })
}

fn run_method(
    cfg: &ExperimentConfig,
    method: Method,
    expected_divergent: bool,
) -> Result<RunReport> {
    let obj = cfg.build_objective()?;
    match method {
        Method::HbOde { .. } => ode_run(&obj, cfg, method),
        _ => discrete_run(&obj, cfg, method, expected_divergent),
    }
}

/// Executes the configured method, fits the distance-to-final series and
/// compares the fit with the theoretical rate. Divergence is reported in the
/// verdict, not as an error.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_method(cfg, cfg.method, false)
}

/// One report per grid point in grid order, computed on `parallelism`
/// workers. A point whose run fails gets a failed row; the sweep continues.
/// `on_row` sees every full report (with its trace) before the trace is
/// dropped, e.g. to write per-point trajectory files.
pub fn run_sweep<F>(cfg: &ExperimentConfig, grid: &SweepGrid, on_row: F) -> Result<Vec<RunReport>>
where
    F: Fn(usize, &RunReport) -> Result<()> + Sync,
{
    if grid.points.is_empty() {
        return Err(Error::InvalidSpec("empty sweep grid".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        grid.points
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let point_cfg = cfg.with_method(p.method);
                let mut report = run_method(&point_cfg, p.method, p.expected_divergent)
                    .unwrap_or_else(|e| {
                        RunReport::failed(&point_cfg, p.method, p.expected_divergent, &e)
                    });
                on_row(i, &report)?;
                report.trace = None;
                Ok(report)
            })
            .collect()
    })
}

/// Heavy ball and gradient descent with their optimal hyperparameters for
/// the reference constants, started from the same point.
pub fn compare(cfg: &ExperimentConfig) -> Result<(RunReport, RunReport)> {
    let (mu, l) = (cfg.constants.mu, cfg.constants.l);
    let hb = Method::HbDiscrete(crate::rates::optimal_hyperparams(mu, l)?);
    let gd = Method::Gd {
        gamma: 2.0 / (l + mu),
    };
    Ok((
        run_experiment(&cfg.with_method(hb))?,
        run_experiment(&cfg.with_method(gd))?,
    ))
}

/// Numerical spectrum of the linearized method at the probe anchor.
pub fn spectral(cfg: &ExperimentConfig) -> Result<SpectralReport> {
    let obj = cfg.build_objective()?;
    let (h, d_t) = normal_hessian(&obj, &cfg.probe.anchor)?;
    match cfg.method {
        Method::HbOde { alpha, .. } => continuous_spectral_report(&h, d_t, alpha),
        m => discrete_spectral_report(&h, d_t, m.discrete_params().expect("discrete method")),
    }
}

/// Geometry constants on every configured region, widest first.
pub fn probe(cfg: &ExperimentConfig) -> Result<Vec<GeometryReport>> {
    let obj = cfg.build_objective()?;
    let p = &cfg.probe;
    p.widths
        .iter()
        .map(|&w| {
            let region = match p.region {
                RegionKind::Ball => Region::ball(p.anchor.clone(), w),
                RegionKind::Annulus => Region::annulus(obj.dim(), p.radius - w, p.radius + w),
            };
            geometry_report(&obj, &p.anchor, region, p.samples, cfg.seed)
        })
        .collect()
}
