//! Heavy ball iteration, its gradient-descent special case, the heavy ball
//! ODE under fixed-step RK4, and the Lyapunov energy of the flow.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, dot, norm};
use crate::objectives::Objective;
use crate::rates::HyperParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The f-gap dropped below `f_tol`.
    Tolerance,
    /// `max_iters` steps taken.
    MaxIters,
    /// The continuous run reached its horizon.
    Horizon,
    /// `‖x‖` exceeded the blow-up bound or a non-finite value appeared.
    Divergence,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIters => "max_iters",
            StopReason::Horizon => "horizon",
            StopReason::Divergence => "divergence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stopping {
    pub f_tol: f64,
    pub max_iters: usize,
    pub blow_up_bound: f64,
}

impl Default for Stopping {
    fn default() -> Self {
        // f_tol sits well above the ~1e-32 roundoff floor of the testbed so
        // the distance series reaches deep into the default fit window.
        Self {
            f_tol: 1e-26,
            max_iters: 200_000,
            blow_up_bound: 1e8,
        }
    }
}

impl Stopping {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_tol > 0.0 && self.blow_up_bound > 0.0 && self.max_iters > 0) {
            return Err(Error::InvalidParameter(
                "stopping thresholds must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Discrete run record. All series share the index `n` of `x_n`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
    pub f_gaps: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// `‖x_n − x_N‖` against the final iterate.
    pub dist_to_final: Vec<f64>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn final_point(&self) -> &[f64] {
        self.iterates.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Step length `‖x_N − x_{N−1}‖` of the last iteration.
    pub fn last_step(&self) -> f64 {
        match self.iterates.len() {
            0 | 1 => 0.0,
            n => dist(&self.iterates[n - 1], &self.iterates[n - 2]),
        }
    }
}

/// Continuous run record on the grid `t_k = k·h`.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub f_gaps: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub energy: Vec<f64>,
    pub dist_to_final: Vec<f64>,
    pub step: f64,
    pub stop_reason: StopReason,
}

impl FlowTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_position(&self) -> &[f64] {
        self.positions.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_velocity(&self) -> &[f64] {
        self.velocities.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// `x_n − γ g + β(x_n − x_prev)`; the one arithmetic path shared by heavy
/// ball and gradient descent.
fn step_with_grad(x: &[f64], x_prev: &[f64], g: &[f64], gamma: f64, beta: f64) -> Vec<f64> {
    x.iter()
        .zip(x_prev)
        .zip(g)
        .map(|((xi, pi), gi)| xi - gamma * gi + beta * (xi - pi))
        .collect()
}

/// One heavy ball step `x_{n+1} = x_n − γ∇f(x_n) + β(x_n − x_{n−1})`.
pub fn hb_step(
    obj: &Objective,
    x: &[f64],
    x_prev: &[f64],
    params: HyperParams,
) -> Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    check_dim(obj.dim(), x_prev.len())?;
    let g = obj.grad_unchecked(x);
    Ok(step_with_grad(x, x_prev, &g, params.gamma, params.beta))
}

/// One gradient descent step, routed through [`hb_step`] with `β = 0`.
pub fn gd_step(obj: &Objective, x: &[f64], gamma: f64) -> Result<Vec<f64>> {
    hb_step(obj, x, x, HyperParams { gamma, beta: 0.0 })
}

fn is_blown_up(x: &[f64], bound: f64) -> bool {
    let n = norm(x);
    !n.is_finite() || n > bound
}

/// `‖x_k − x_K‖` for every `k`, against the last entry.
pub fn dist_to_final(points: &[Vec<f64>]) -> Vec<f64> {
    match points.last() {
        Some(last) => points.iter().map(|p| dist(p, last)).collect(),
        None => Vec::new(),
    }
}

/// Iterates the heavy ball map from `(x0, x1)` until the f-gap falls below
/// `f_tol`, `max_iters` steps are taken, or the iterates blow up.
pub fn run_discrete(
    obj: &Objective,
    x0: &[f64],
    x1: &[f64],
    params: HyperParams,
    stopping: Stopping,
) -> Result<Trajectory> {
    check_dim(obj.dim(), x0.len())?;
    check_dim(obj.dim(), x1.len())?;
    let params = HyperParams::new(params.gamma, params.beta)?;
    stopping.validate()?;
    let min = obj.min_value();

    let mut iterates = Vec::new();
    let mut f_gaps = Vec::new();
    let mut grad_norms = Vec::new();
    let mut grads: [Vec<f64>; 2] = [Vec::new(), Vec::new()];

    let mut record = |x: Vec<f64>, iterates: &mut Vec<Vec<f64>>| -> (bool, f64, Vec<f64>) {
        let f = obj.value_unchecked(&x) - min;
        let g = obj.grad_unchecked(&x);
        let gn = norm(&g);
        let finite = f.is_finite() && gn.is_finite() && !is_blown_up(&x, stopping.blow_up_bound);
        f_gaps.push(f);
        grad_norms.push(gn);
        iterates.push(x);
        (finite, f, g)
    };

    let mut stop_reason = StopReason::MaxIters;
    let (ok0, _, g0) = record(x0.to_vec(), &mut iterates);
    let (ok1, f1, g1) = record(x1.to_vec(), &mut iterates);
    grads[0] = g0;
    grads[1] = g1;
    if !(ok0 && ok1) {
        stop_reason = StopReason::Divergence;
    } else if f1 < stopping.f_tol {
        stop_reason = StopReason::Tolerance;
    } else {
        for _ in 1..stopping.max_iters {
            let n = iterates.len();
            let next = step_with_grad(
                &iterates[n - 1],
                &iterates[n - 2],
                &grads[1],
                params.gamma,
                params.beta,
            );
            let (ok, f, g) = record(next, &mut iterates);
            grads.swap(0, 1);
            grads[1] = g;
            if !ok {
                stop_reason = StopReason::Divergence;
                break;
            }
            if f < stopping.f_tol {
                stop_reason = StopReason::Tolerance;
                break;
            }
        }
    }

    let dist_to_final = dist_to_final(&iterates);
    Ok(Trajectory {
        iterates,
        f_gaps,
        grad_norms,
        dist_to_final,
        stop_reason,
    })
}

/// Right-hand side `(v, −αv − ∇f(x))` of the heavy ball ODE.
pub fn ode_rhs(obj: &Objective, x: &[f64], v: &[f64], alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(obj.dim(), x.len())?;
    check_dim(obj.dim(), v.len())?;
    Ok(rhs_unchecked(obj, x, v, alpha))
}

fn rhs_unchecked(obj: &Objective, x: &[f64], v: &[f64], alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let g = obj.grad_unchecked(x);
    let dv = v.iter().zip(&g).map(|(vi, gi)| -alpha * vi - gi).collect();
    (v.to_vec(), dv)
}

/// `E(x, v) = f(x) + α/(α²+2L)⟨∇f(x), v⟩ + L/(α²+2L)‖v‖²`, measured from the
/// minimum value.
pub fn lyapunov_energy(obj: &Objective, x: &[f64], v: &[f64], alpha: f64, l: f64) -> Result<f64> {
    check_dim(obj.dim(), x.len())?;
    check_dim(obj.dim(), v.len())?;
    if !(alpha > 0.0 && l > 0.0) {
        return Err(Error::InvalidParameter(
            "energy needs alpha > 0 and L > 0".into(),
        ));
    }
    let g = obj.grad_unchecked(x);
    Ok(energy_with_grad(
        obj.value_unchecked(x) - obj.min_value(),
        &g,
        v,
        alpha,
        l,
    ))
}

fn energy_with_grad(f_gap: f64, g: &[f64], v: &[f64], alpha: f64, l: f64) -> f64 {
    let denom = alpha * alpha + 2.0 * l;
    f_gap + alpha / denom * dot(g, v) + l / denom * dot(v, v)
}

/// Largest admissible RK4 step `0.1/√(L + α²)`.
pub fn max_stable_step(l: f64, alpha: f64) -> f64 {
    0.1 / (l + alpha * alpha).sqrt()
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}

/// Integrates the heavy ball ODE with classical fixed-step RK4 on
/// `[0, t_end]`, recording f-gap, gradient norm and Lyapunov energy at every
/// grid point. The energy and step guard use the objective's nominal `L`.
pub fn integrate_ode(
    obj: &Objective,
    x0: &[f64],
    v0: &[f64],
    alpha: f64,
    h: f64,
    t_end: f64,
) -> Result<FlowTrajectory> {
    check_dim(obj.dim(), x0.len())?;
    check_dim(obj.dim(), v0.len())?;
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(h > 0.0 && t_end >= h && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and T >= h, got h={h}, T={t_end}"
        )));
    }
    let (_, l) = obj.nominal_constants();
    let h_max = max_stable_step(l, alpha);
    if h > h_max {
        return Err(Error::InvalidParameter(format!(
            "step h={h} exceeds the RK4 guard 0.1/sqrt(L + alpha^2) = {h_max}"
        )));
    }
    let steps = (t_end / h).round() as usize;
    let min = obj.min_value();

    let mut out = FlowTrajectory {
        times: Vec::with_capacity(steps + 1),
        positions: Vec::with_capacity(steps + 1),
        velocities: Vec::with_capacity(steps + 1),
        f_gaps: Vec::with_capacity(steps + 1),
        grad_norms: Vec::with_capacity(steps + 1),
        energy: Vec::with_capacity(steps + 1),
        dist_to_final: Vec::new(),
        step: h,
        stop_reason: StopReason::Horizon,
    };

    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    for k in 0..=steps {
        let g = obj.grad_unchecked(&x);
        let f = obj.value_unchecked(&x) - min;
        let e = energy_with_grad(f, &g, &v, alpha, l);
        out.times.push(k as f64 * h);
        out.f_gaps.push(f);
        out.grad_norms.push(norm(&g));
        out.energy.push(e);
        out.positions.push(x.clone());
        out.velocities.push(v.clone());
        if !e.is_finite() || is_blown_up(&x, 1e8) || is_blown_up(&v, 1e8) {
            out.stop_reason = StopReason::Divergence;
            break;
        }
        if k == steps {
            break;
        }

        let (k1x, k1v) = rhs_unchecked(obj, &x, &v, alpha);
        let (k2x, k2v) = rhs_unchecked(
            obj,
            &axpy(&x, 0.5 * h, &k1x),
            &axpy(&v, 0.5 * h, &k1v),
            alpha,
        );
        let (k3x, k3v) = rhs_unchecked(
            obj,
            &axpy(&x, 0.5 * h, &k2x),
            &axpy(&v, 0.5 * h, &k2v),
            alpha,
        );
        let (k4x, k4v) = rhs_unchecked(obj, &axpy(&x, h, &k3x), &axpy(&v, h, &k3v), alpha);
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
    out.dist_to_final = dist_to_final(&out.positions);
    Ok(out)
}
