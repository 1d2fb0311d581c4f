//! CSV and plain-text renderings of reports. Floats are written with 17
//! significant digits; fields that do not apply are written as `NA`.

use std::fmt::Write as _;

use super::config::Method;
use super::experiment::{RunReport, Trace};
use crate::estimator::RateEstimate;
use crate::geometry::GeometryReport;
use crate::rates::{RateRow, SpectralReport, SystemKind};

pub fn float(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), float)
}

pub const SUMMARY_HEADER: &str = "objective,method,gamma,beta,alpha,mu,L,constants_source,h,horizon,\
theory_rate,fitted_rate,prefactor_degree,r_squared,window_lo,window_hi,\
fgap_theory_rate,fgap_fitted_rate,iterations,stop_reason,final_grad_norm,expected_divergent,verdict";

fn method_fields(m: &Method) -> [String; 6] {
    let na = || "NA".to_string();
    match *m {
        Method::HbDiscrete(p) => [
            m.kind().as_str().into(),
            float(p.gamma),
            float(p.beta),
            na(),
            na(),
            na(),
        ],
        Method::Gd { gamma } => [
            m.kind().as_str().into(),
            float(gamma),
            float(0.0),
            na(),
            na(),
            na(),
        ],
        Method::HbOde { alpha, h, horizon } => [
            m.kind().as_str().into(),
            na(),
            na(),
            float(alpha),
            opt_float(h),
            opt_float(horizon),
        ],
    }
}

pub fn summary_row(r: &RunReport) -> String {
    let [name, gamma, beta, alpha, h, horizon] = method_fields(&r.method);
    let est = |e: &Option<RateEstimate>| e.map(|e| e.rate);
    let fields = [
        r.objective.clone(),
        name,
        gamma,
        beta,
        alpha,
        float(r.theory_constants.0),
        float(r.theory_constants.1),
        r.constants.source.as_str().into(),
        h,
        horizon,
        float(r.theory_rate),
        opt_float(est(&r.estimate)),
        r.estimate
            .map_or("NA".into(), |e| e.prefactor_degree.to_string()),
        opt_float(r.estimate.map(|e| e.r_squared)),
        opt_float(r.estimate.map(|e| e.window_coords.0)),
        opt_float(r.estimate.map(|e| e.window_coords.1)),
        float(r.fgap_theory_rate),
        opt_float(est(&r.fgap_estimate)),
        r.iterations.to_string(),
        r.stop_reason.as_str().into(),
        float(r.final_grad_norm),
        r.expected_divergent.to_string(),
        r.verdict.outcome.as_str().into(),
    ];
    fields.join(",")
}

pub fn summary_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&summary_row(r));
        out.push('\n');
    }
    out
}

/// Per-step series of a run, or `None` when the trace was dropped.
pub fn trajectory_csv(r: &RunReport) -> Option<String> {
    let mut out = String::new();
    match r.trace.as_ref()? {
        Trace::Discrete(t) => {
            out.push_str("n,f_gap,grad_norm,dist_to_final\n");
            for n in 0..t.len() {
                let _ = writeln!(
                    out,
                    "{n},{},{},{}",
                    float(t.f_gaps[n]),
                    float(t.grad_norms[n]),
                    float(t.dist_to_final[n])
                );
            }
        }
        Trace::Flow(t) => {
            out.push_str("t,f_gap,grad_norm,energy,dist_to_final\n");
            for k in 0..t.len() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    float(t.times[k]),
                    float(t.f_gaps[k]),
                    float(t.grad_norms[k]),
                    float(t.energy[k]),
                    float(t.dist_to_final[k])
                );
            }
        }
    }
    Some(out)
}

fn describe_method(m: &Method) -> String {
    match *m {
        Method::HbDiscrete(p) => format!("heavy ball, gamma = {}, beta = {}", p.gamma, p.beta),
        Method::Gd { gamma } => format!("gradient descent, gamma = {gamma}"),
        Method::HbOde { alpha, h, horizon } => format!(
            "heavy ball ODE (RK4), alpha = {alpha}, h = {}, T = {}",
            opt_float(h),
            opt_float(horizon)
        ),
    }
}

fn describe_estimate(e: &Option<RateEstimate>) -> String {
    match e {
        Some(e) => format!(
            "{:.6} (R^2 {:.6}, prefactor degree {}, window {}..{})",
            e.rate, e.r_squared, e.prefactor_degree, e.window_coords.0, e.window_coords.1
        ),
        None => "none".into(),
    }
}

/// One-page human-readable summary of a run.
pub fn summary_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "objective        {}", r.objective);
    let _ = writeln!(out, "method           {}", describe_method(&r.method));
    let _ = writeln!(
        out,
        "reference (mu,L) ({}, {}) [{}]",
        r.constants.mu,
        r.constants.l,
        r.constants.source.as_str()
    );
    let _ = writeln!(
        out,
        "theory (mu,L)    ({}, {})",
        r.theory_constants.0, r.theory_constants.1
    );
    let _ = writeln!(
        out,
        "steps            {} (stop: {})",
        r.iterations,
        r.stop_reason.as_str()
    );
    let _ = writeln!(out, "final |grad|     {:.3e}", r.final_grad_norm);
    let _ = writeln!(out, "theory rate      {:.6}", r.theory_rate);
    let _ = writeln!(out, "fitted rate      {}", describe_estimate(&r.estimate));
    let _ = writeln!(out, "f-gap theory     {:.6}", r.fgap_theory_rate);
    let _ = writeln!(
        out,
        "f-gap fitted     {}",
        describe_estimate(&r.fgap_estimate)
    );
    let _ = writeln!(
        out,
        "verdict          {}: {}",
        r.verdict.outcome, r.verdict.details
    );
    out
}

pub const RATES_HEADER: &str = "mu,L,kappa,alpha_star,m_cont,gamma_star,beta_star,m_disc,gd_rate";

pub fn rates_csv(rows: &[RateRow]) -> String {
    let mut out = format!("{RATES_HEADER}\n");
    for r in rows {
        let fields = [
            r.mu,
            r.l,
            r.kappa,
            r.alpha_star,
            r.m_cont,
            r.gamma_star,
            r.beta_star,
            r.m_disc,
            r.gd_rate,
        ];
        let line: Vec<String> = fields.iter().map(|&x| float(x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn rates_text(rows: &[RateRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "mu = {}, L = {} (kappa = {})", r.mu, r.l, r.kappa);
        let _ = writeln!(
            out,
            "  ODE:        alpha* = {}, m = {}",
            r.alpha_star, r.m_cont
        );
        let _ = writeln!(
            out,
            "  heavy ball: gamma* = {}, beta* = {}, m = {}",
            r.gamma_star, r.beta_star, r.m_disc
        );
        let _ = writeln!(out, "  GD:         rate = {}", r.gd_rate);
    }
    out
}

pub const PROBE_HEADER: &str =
    "objective,region,n_samples,seed,pl,qg,eb,qsc,min_nonzero_eig,max_nonzero_eig,kernel_dim";

pub fn probe_csv(objective: &str, reports: &[GeometryReport]) -> String {
    let mut out = format!("{PROBE_HEADER}\n");
    for g in reports {
        let _ = writeln!(
            out,
            "{objective},{},{},{},{},{},{},{},{},{},{}",
            g.region,
            g.samples,
            g.seed,
            float(g.pl_const),
            float(g.qg_const),
            float(g.eb_const),
            float(g.qsc_const),
            opt_float(g.hess_nonzero_eigs.first().copied()),
            opt_float(g.hess_nonzero_eigs.last().copied()),
            g.kernel_dim
        );
    }
    out
}

pub fn probe_text(objective: &str, reports: &[GeometryReport]) -> String {
    let mut out = format!("geometry probe on {objective}\n");
    for g in reports {
        let _ = writeln!(
            out,
            "  {:<22} pl {:.6}  qg {:.6}  eb {:.6}  qsc {:.6}  (n = {}, seed = {})",
            g.region.to_string(),
            g.pl_const,
            g.qg_const,
            g.eb_const,
            g.qsc_const,
            g.samples,
            g.seed
        );
    }
    if let Some(g) = reports.first() {
        let _ = writeln!(
            out,
            "  Hessian nonzero eigenvalues {:?}, kernel dimension {}",
            g.hess_nonzero_eigs, g.kernel_dim
        );
    }
    out
}

fn kind_name(k: SystemKind) -> &'static str {
    match k {
        SystemKind::Discrete => "discrete",
        SystemKind::Continuous => "continuous",
    }
}

pub fn spectral_csv(s: &SpectralReport) -> String {
    let mut out = String::from("system,index,re,im,modulus\n");
    for (i, z) in s.eigenvalues.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{i},{},{},{}",
            kind_name(s.kind),
            float(z.re),
            float(z.im),
            float(z.norm())
        );
    }
    out
}

pub fn spectral_text(s: &SpectralReport) -> String {
    let mut out = format!(
        "{} system, {} eigenvalues\n",
        kind_name(s.kind),
        s.eigenvalues.len()
    );
    for z in &s.eigenvalues {
        let _ = writeln!(
            out,
            "  {:+.12} {:+.12}i  |z| = {:.12}",
            z.re,
            z.im,
            z.norm()
        );
    }
    let _ = writeln!(out, "spectral radius      {}", s.rho);
    let _ = writeln!(out, "spectral abscissa    {}", s.abscissa);
    let _ = writeln!(out, "closed form          {}", s.theory_rate);
    let _ = writeln!(out, "rate bound           {}", opt_float(s.rate_bound));
    let _ = writeln!(out, "max discrepancy      {:.3e}", s.max_abs_discrepancy);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(float(0.5), "5.0000000000000000e-1");
        assert_eq!(float(f64::NAN), "NA");
        let s = float(0.1);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn summary_header_and_rows_have_equal_width() {
        let cfg = crate::cli::config::parse_config(
            "[objective]\nkind = quadratic\neigenvalues = 1, 9\n[method]\nname = gd\n[init]\nx0 = 1, 1\n",
        )
        .unwrap();
        let r = crate::cli::experiment::run_experiment(&cfg).unwrap();
        let width = SUMMARY_HEADER.split(',').count();
        assert_eq!(summary_row(&r).split(',').count(), width);
        let traj = trajectory_csv(&r).unwrap();
        assert_eq!(traj.lines().count(), r.iterations + 2);
    }
}
