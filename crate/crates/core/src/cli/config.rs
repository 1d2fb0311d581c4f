//! Experiment configuration: a flat `[section]` / `key = value` format.
//!
//! ```text
//! seed = 7                      # top level, before any section
//!
//! [objective]
//! kind = quadratic              # quadratic | circle | sine_valley
//! eigenvalues = 1, 9
//! rotation_seed = 11
//!
//! [method]
//! name = hb_discrete            # hb_discrete | gd | hb_ode
//! gamma = auto
//! beta = auto
//!
//! [init]
//! x0 = 1, 1
//! rotate = true
//! ```
//!
//! Comments start with `#`. Numbers are decimal or scientific, lists are
//! comma-separated. Every error carries the line it refers to.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::dynamics::{max_stable_step, Stopping};
use crate::error::{Error, Result};
use crate::estimator::{RateEstimator, DEFAULT_EPS};
use crate::geometry::hessian_normal_spectrum;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::objectives::{make_objective, Objective, ObjectiveKind, ObjectiveSpec};
use crate::rates::{optimal_alpha, optimal_hyperparams, HyperParams};

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["seed"]),
    (
        "objective",
        &["kind", "dim", "eigenvalues", "rotation_seed", "mu_t", "l_t"],
    ),
    (
        "method",
        &[
            "name", "gamma", "beta", "alpha", "h", "horizon", "anchor", "mu", "L",
        ],
    ),
    ("init", &["x0", "x1", "v0", "rotate"]),
    ("stopping", &["f_tol", "max_iters", "blow_up_bound"]),
    ("estimator", &["lo", "hi", "prefactor", "eps"]),
    ("output", &["dir", "prefix", "trajectories"]),
    (
        "sweep",
        &["gamma", "beta", "alpha", "parallelism", "allow_unstable"],
    ),
    (
        "probe",
        &["region", "widths", "radius", "samples", "anchor"],
    ),
];

/// Number of gradient steps in the pilot run of `auto` hyperparameters.
pub const PILOT_STEPS: usize = 500;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    sections.insert(String::new(), Section::default());
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) || name.is_empty() {
                return Err(config_err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(config_err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.to_string(),
                Section {
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let known = SECTIONS
            .iter()
            .find(|(s, _)| *s == current)
            .map(|(_, keys)| keys.contains(&key))
            .unwrap_or(false);
        if !known {
            let section = if current.is_empty() {
                "top level".to_string()
            } else {
                format!("[{current}]")
            };
            return Err(config_err(
                line,
                format!("unknown key `{key}` in {section}"),
            ));
        }
        let section = sections.get_mut(&current).expect("current section exists");
        if section.entries.contains_key(key) {
            return Err(config_err(line, format!("duplicate key `{key}`")));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(sections)
}

/// Typed accessors over one section.
struct View<'a> {
    section: Option<&'a Section>,
}

impl<'a> View<'a> {
    fn line(&self) -> usize {
        self.section.map_or(0, |s| s.line)
    }

    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| s.entries.get(key))
    }

    fn str(&self, key: &str) -> Option<(&'a str, usize)> {
        self.entry(key).map(|e| (e.value.as_str(), e.line))
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.entry(key)
            .map(|e| parse_f64(&e.value, e.line, key))
            .transpose()
    }

    fn u64(&self, key: &str) -> Result<Option<u64>> {
        self.entry(key)
            .map(|e| {
                e.value.parse::<u64>().map_err(|_| {
                    config_err(
                        e.line,
                        format!("`{key}` must be an unsigned integer, got `{}`", e.value),
                    )
                })
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.u64(key)?.map(|v| v as usize))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.entry(key)
            .map(|e| match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(config_err(
                    e.line,
                    format!("`{key}` must be true or false, got `{other}`"),
                )),
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        self.entry(key)
            .map(|e| parse_list(&e.value, e.line, key).map(|v| (v, e.line)))
            .transpose()
    }

    /// A number or the word `auto` (also the default when the key is absent).
    fn auto_f64(&self, key: &str) -> Result<Option<(f64, usize)>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) if e.value == "auto" => Ok(None),
            Some(e) => parse_f64(&e.value, e.line, key).map(|v| Some((v, e.line))),
        }
    }
}

fn parse_f64(s: &str, line: usize, key: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(config_err(
            line,
            format!("`{key}` must be a finite number, got `{s}`"),
        )),
    }
}

fn parse_list(s: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(config_err(line, format!("`{key}` must not be empty")));
    }
    s.split(',').map(|tok| parse_f64(tok, line, key)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    HbDiscrete,
    Gd,
    HbOde,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::HbDiscrete => "hb_discrete",
            MethodKind::Gd => "gd",
            MethodKind::HbOde => "hb_ode",
        }
    }
}

/// Fully resolved method with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    HbDiscrete(HyperParams),
    Gd {
        gamma: f64,
    },
    /// `h` and `horizon` of `None` are resolved per run: `h = min(1e-3, guard)`,
    /// `T = 40/m(α, μ)`.
    HbOde {
        alpha: f64,
        h: Option<f64>,
        horizon: Option<f64>,
    },
}

impl Method {
    pub fn kind(&self) -> MethodKind {
        match self {
            Method::HbDiscrete(_) => MethodKind::HbDiscrete,
            Method::Gd { .. } => MethodKind::Gd,
            Method::HbOde { .. } => MethodKind::HbOde,
        }
    }

    /// Discrete hyperparameters, with `β = 0` for gradient descent.
    pub fn discrete_params(&self) -> Option<HyperParams> {
        match *self {
            Method::HbDiscrete(p) => Some(p),
            Method::Gd { gamma } => Some(HyperParams { gamma, beta: 0.0 }),
            Method::HbOde { .. } => None,
        }
    }
}

/// Where the reference `(μ, L)` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsSource {
    /// `mu` and `L` keys in `[method]`.
    Given,
    /// Extreme eigenvalues of a quadratic.
    Analytic,
    /// Hessian normal spectrum after a gradient-descent pilot.
    Pilot,
    /// The objective's nominal constants over its minimizer set.
    Nominal,
}

impl ConstantsSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantsSource::Given => "given",
            ConstantsSource::Analytic => "analytic",
            ConstantsSource::Pilot => "pilot",
            ConstantsSource::Nominal => "nominal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConstants {
    pub mu: f64,
    pub l: f64,
    pub source: ConstantsSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub prefix: String,
    /// Write one trajectory CSV per sweep point.
    pub trajectories: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    /// Shell `radius ± w` around the origin.
    Annulus,
    /// Ball of radius `w` around the anchor.
    Ball,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub region: RegionKind,
    pub widths: Vec<f64>,
    pub radius: f64,
    pub samples: usize,
    pub anchor: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub method: Method,
    /// The point lies outside the admissible step range `γ < 2(1+β)/L`.
    pub expected_divergent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub points: Vec<SweepPoint>,
    pub parallelism: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub method: Method,
    /// Hyperparameters were derived rather than given.
    pub auto: bool,
    pub constants: ReferenceConstants,
    pub x0: Vec<f64>,
    /// Second iterate for discrete methods (defaults to `x0`).
    pub x1: Vec<f64>,
    /// Initial velocity for the ODE (defaults to zero).
    pub v0: Vec<f64>,
    pub stopping: Stopping,
    pub estimator: RateEstimator,
    pub eps: f64,
    pub output: OutputConfig,
    pub seed: u64,
    pub sweep: Option<SweepGrid>,
    pub probe: ProbeConfig,
}

impl ExperimentConfig {
    pub fn build_objective(&self) -> Result<Objective> {
        make_objective(self.objective.clone())
    }

    /// Copy with a different method, used for sweep points and comparisons.
    pub fn with_method(&self, method: Method) -> Self {
        Self {
            method,
            sweep: None,
            ..self.clone()
        }
    }
}

/// Parses and validates a configuration, filling every default and
/// resolving `auto` hyperparameters.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let sections = tokenize(text)?;
    let view = |name: &str| View {
        section: sections.get(name),
    };
    let top = view("");
    let seed = top.u64("seed")?.unwrap_or(0);

    let (objective, obj) = parse_objective(&view("objective"))?;
    let (x0, x1, v0) = parse_init(&view("init"), &obj)?;

    let method_view = view("method");
    let kind = parse_method_kind(&method_view)?;
    let (method, auto, constants) = parse_method(&method_view, kind, &obj, &x0)?;

    let stopping = parse_stopping(&view("stopping"))?;
    let (estimator, eps) = parse_estimator(&view("estimator"))?;
    let output = parse_output(&view("output"))?;
    let probe = parse_probe(&view("probe"), &obj)?;
    let sweep = match sections.get("sweep") {
        Some(_) => Some(parse_sweep(&view("sweep"), method, constants)?),
        None => None,
    };

    Ok(ExperimentConfig {
        objective,
        method,
        auto,
        constants,
        x0,
        x1,
        v0,
        stopping,
        estimator,
        eps,
        output,
        seed,
        sweep,
        probe,
    })
}

fn parse_objective(v: &View) -> Result<(ObjectiveSpec, Objective)> {
    let header = v.line();
    let (kind, kind_line) = v
        .str("kind")
        .ok_or_else(|| config_err(header, "[objective] needs `kind`"))?;
    let dim = v.usize("dim")?;
    let dim_line = v.str("dim").map_or(header, |(_, l)| l);
    let spec = match kind {
        "quadratic" => {
            let (eigs, _) = v
                .list("eigenvalues")?
                .ok_or_else(|| config_err(header, "quadratic needs `eigenvalues`"))?;
            if let Some(d) = dim {
                if d != eigs.len() {
                    return Err(config_err(
                        dim_line,
                        format!("dim = {d} but {} eigenvalues given", eigs.len()),
                    ));
                }
            }
            ObjectiveSpec::quadratic(eigs, v.u64("rotation_seed")?)
        }
        "circle" => {
            ObjectiveSpec::circle(dim.ok_or_else(|| config_err(header, "circle needs `dim`"))?)
        }
        "sine_valley" => {
            let mu_t = v
                .f64("mu_t")?
                .ok_or_else(|| config_err(header, "sine_valley needs `mu_t`"))?;
            let l_t = v
                .f64("l_t")?
                .ok_or_else(|| config_err(header, "sine_valley needs `l_t`"))?;
            let spec = ObjectiveSpec::sine_valley(mu_t, l_t);
            match dim {
                Some(d) if d != 3 => ObjectiveSpec { dim: d, ..spec },
                _ => spec,
            }
        }
        other => {
            return Err(config_err(
                kind_line,
                format!("unknown objective kind `{other}` (quadratic, circle, sine_valley)"),
            ))
        }
    };
    if !matches!(spec.kind, ObjectiveKind::Quadratic { .. }) {
        if let Some((_, line)) = v.str("eigenvalues").or(v.str("rotation_seed")) {
            return Err(config_err(
                line,
                format!("{kind} takes no eigenvalues or rotation seed"),
            ));
        }
    }
    let obj = make_objective(spec.clone()).map_err(|e| config_err(header, e.to_string()))?;
    Ok((spec, obj))
}

fn parse_point(v: &View, key: &str, obj: &Objective) -> Result<Option<(Vec<f64>, usize)>> {
    match v.list(key)? {
        Some((p, line)) if p.len() != obj.dim() => Err(config_err(
            line,
            format!(
                "`{key}` has {} entries but the objective has dim {}",
                p.len(),
                obj.dim()
            ),
        )),
        other => Ok(other),
    }
}

fn parse_init(v: &View, obj: &Objective) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (x0, _) =
        parse_point(v, "x0", obj)?.ok_or_else(|| config_err(v.line(), "[init] needs `x0`"))?;
    let x1 = parse_point(v, "x1", obj)?.map_or_else(|| x0.clone(), |(p, _)| p);
    let v0 = parse_point(v, "v0", obj)?.map_or_else(|| vec![0.0; obj.dim()], |(p, _)| p);
    if v.bool("rotate")?.unwrap_or(false) {
        return Ok((obj.rotate(&x0)?, obj.rotate(&x1)?, obj.rotate(&v0)?));
    }
    Ok((x0, x1, v0))
}

fn parse_method_kind(v: &View) -> Result<MethodKind> {
    let (name, line) = v
        .str("name")
        .ok_or_else(|| config_err(v.line(), "[method] needs `name`"))?;
    match name {
        "hb_discrete" => Ok(MethodKind::HbDiscrete),
        "gd" => Ok(MethodKind::Gd),
        "hb_ode" => Ok(MethodKind::HbOde),
        other => Err(config_err(
            line,
            format!("unknown method `{other}` (hb_discrete, gd, hb_ode)"),
        )),
    }
}

fn reject_key(v: &View, key: &str, kind: MethodKind) -> Result<()> {
    match v.str(key) {
        Some((_, line)) => Err(config_err(
            line,
            format!("`{key}` does not apply to {}", kind.as_str()),
        )),
        None => Ok(()),
    }
}

fn check_positive(value: f64, line: usize, key: &str) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(config_err(
            line,
            format!("`{key}` must be positive, got {value}"),
        ))
    }
}

/// `(μ, L)` from a gradient-descent pilot started at `start` followed by the
/// Hessian normal spectrum at the pilot's end point.
pub fn pilot_constants(obj: &Objective, start: &[f64]) -> Result<(f64, f64)> {
    let h0 = symmetric_eigen(&obj.hess(start)?)?;
    let scale = h0.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidParameter(
            "pilot start has a zero Hessian".into(),
        ));
    }
    let gamma = 1.0 / (1.5 * scale);
    let mut x = start.to_vec();
    for _ in 0..PILOT_STEPS {
        x = crate::dynamics::gd_step(obj, &x, gamma)?;
    }
    hessian_normal_spectrum(obj, &x, None)?.extremes()
}

fn parse_method(
    v: &View,
    kind: MethodKind,
    obj: &Objective,
    x0: &[f64],
) -> Result<(Method, bool, ReferenceConstants)> {
    let header = v.line();
    let gamma = v.auto_f64("gamma")?;
    let beta = v.auto_f64("beta")?;
    let alpha = v.auto_f64("alpha")?;

    let auto = match kind {
        MethodKind::HbDiscrete => {
            reject_key(v, "alpha", kind)?;
            reject_key(v, "h", kind)?;
            reject_key(v, "horizon", kind)?;
            match (gamma, beta) {
                (None, None) => true,
                (Some(_), Some(_)) => false,
                (Some((_, line)), None) | (None, Some((_, line))) => {
                    return Err(config_err(
                        line,
                        "gamma and beta must both be numbers or both auto",
                    ))
                }
            }
        }
        MethodKind::Gd => {
            reject_key(v, "alpha", kind)?;
            reject_key(v, "h", kind)?;
            reject_key(v, "horizon", kind)?;
            if let Some((b, line)) = beta {
                if b != 0.0 {
                    return Err(config_err(line, "gradient descent has beta = 0"));
                }
            }
            gamma.is_none()
        }
        MethodKind::HbOde => {
            reject_key(v, "gamma", kind)?;
            reject_key(v, "beta", kind)?;
            alpha.is_none()
        }
    };

    let constants = match (v.f64("mu")?, v.f64("L")?) {
        (Some(mu), Some(l)) => {
            let line = v.str("mu").map_or(header, |(_, l)| l);
            if !(mu > 0.0 && mu <= l) {
                return Err(config_err(
                    line,
                    format!("need 0 < mu <= L, got mu={mu}, L={l}"),
                ));
            }
            ReferenceConstants {
                mu,
                l,
                source: ConstantsSource::Given,
            }
        }
        (None, None) => match &obj.spec().kind {
            ObjectiveKind::Quadratic { .. } => {
                let (mu, l) = obj.nominal_constants();
                ReferenceConstants {
                    mu,
                    l,
                    source: ConstantsSource::Analytic,
                }
            }
            _ if auto => {
                let anchor = match parse_point(v, "anchor", obj)? {
                    Some((p, _)) => p,
                    None => x0.to_vec(),
                };
                let (mu, l) = pilot_constants(obj, &anchor).map_err(|e| {
                    config_err(header, format!("auto hyperparameters: pilot failed: {e}"))
                })?;
                ReferenceConstants {
                    mu,
                    l,
                    source: ConstantsSource::Pilot,
                }
            }
            _ => {
                let (mu, l) = obj.nominal_constants();
                ReferenceConstants {
                    mu,
                    l,
                    source: ConstantsSource::Nominal,
                }
            }
        },
        _ => return Err(config_err(header, "`mu` and `L` must be given together")),
    };

    let method = match kind {
        MethodKind::HbDiscrete => match (gamma, beta) {
            (Some((g, gl)), Some((b, bl))) => {
                check_positive(g, gl, "gamma")?;
                Method::HbDiscrete(
                    HyperParams::new(g, b).map_err(|e| config_err(bl, e.to_string()))?,
                )
            }
            _ => Method::HbDiscrete(
                optimal_hyperparams(constants.mu, constants.l)
                    .map_err(|e| config_err(header, e.to_string()))?,
            ),
        },
        MethodKind::Gd => match gamma {
            Some((g, line)) => Method::Gd {
                gamma: check_positive(g, line, "gamma")?,
            },
            None => Method::Gd {
                gamma: 2.0 / (constants.l + constants.mu),
            },
        },
        MethodKind::HbOde => {
            let alpha = match alpha {
                Some((a, line)) => check_positive(a, line, "alpha")?,
                None => {
                    optimal_alpha(constants.mu).map_err(|e| config_err(header, e.to_string()))?
                }
            };
            let h = match v.f64("h")? {
                Some(h) => {
                    let line = v.str("h").map_or(header, |(_, l)| l);
                    let h = check_positive(h, line, "h")?;
                    let guard = max_stable_step(obj.nominal_constants().1, alpha);
                    if h > guard {
                        return Err(config_err(
                            line,
                            format!("h = {h} exceeds the RK4 stability guard {guard:.6e}"),
                        ));
                    }
                    Some(h)
                }
                None => None,
            };
            let horizon = match v.f64("horizon")? {
                Some(t) => Some(check_positive(
                    t,
                    v.str("horizon").map_or(header, |(_, l)| l),
                    "horizon",
                )?),
                None => None,
            };
            Method::HbOde { alpha, h, horizon }
        }
    };
    Ok((method, auto, constants))
}

fn parse_stopping(v: &View) -> Result<Stopping> {
    let d = Stopping::default();
    let s = Stopping {
        f_tol: v.f64("f_tol")?.unwrap_or(d.f_tol),
        max_iters: v.usize("max_iters")?.unwrap_or(d.max_iters),
        blow_up_bound: v.f64("blow_up_bound")?.unwrap_or(d.blow_up_bound),
    };
    s.validate()
        .map_err(|e| config_err(v.line(), e.to_string()))?;
    Ok(s)
}

fn parse_estimator(v: &View) -> Result<(RateEstimator, f64)> {
    let d = RateEstimator::default();
    let est = RateEstimator {
        lo: v.f64("lo")?.unwrap_or(d.lo),
        hi: v.f64("hi")?.unwrap_or(d.hi),
        allow_prefactor: v.bool("prefactor")?.unwrap_or(d.allow_prefactor),
    };
    if !(est.lo > 0.0 && est.lo < est.hi) {
        return Err(config_err(
            v.line(),
            format!("need 0 < lo < hi, got [{}, {}]", est.lo, est.hi),
        ));
    }
    let eps = v.f64("eps")?.unwrap_or(DEFAULT_EPS);
    if !(eps > 0.0) {
        let line = v.str("eps").map_or(v.line(), |(_, l)| l);
        return Err(config_err(
            line,
            format!("`eps` must be positive, got {eps}"),
        ));
    }
    Ok((est, eps))
}

fn parse_output(v: &View) -> Result<OutputConfig> {
    let prefix = v.str("prefix").map_or("run", |(p, _)| p).to_string();
    if prefix.is_empty() || prefix.contains(['/', '\\']) {
        let line = v.str("prefix").map_or(v.line(), |(_, l)| l);
        return Err(config_err(line, "`prefix` must be a plain file-name stem"));
    }
    Ok(OutputConfig {
        dir: v.str("dir").map(|(d, _)| PathBuf::from(d)),
        prefix,
        trajectories: v.bool("trajectories")?.unwrap_or(false),
    })
}

fn parse_probe(v: &View, obj: &Objective) -> Result<ProbeConfig> {
    let region = match v.str("region") {
        None | Some(("ball", _)) => RegionKind::Ball,
        Some(("annulus", _)) => RegionKind::Annulus,
        Some((other, line)) => {
            return Err(config_err(
                line,
                format!("unknown region `{other}` (ball, annulus)"),
            ))
        }
    };
    let widths = match v.list("widths")? {
        Some((w, line)) => {
            if w.iter().any(|x| !(*x > 0.0)) {
                return Err(config_err(line, "`widths` must be positive"));
            }
            w
        }
        None => vec![0.2, 0.1, 0.05],
    };
    let radius = v.f64("radius")?.unwrap_or(1.0);
    if region == RegionKind::Annulus {
        if let Some(w) = widths.iter().find(|w| **w >= radius) {
            return Err(config_err(
                v.line(),
                format!("annulus half-width {w} must be below radius {radius}"),
            ));
        }
    }
    let samples = v.usize("samples")?.unwrap_or(100_000);
    let anchor = match parse_point(v, "anchor", obj)? {
        Some((p, _)) => p,
        None => obj.reference_minimizer(),
    };
    Ok(ProbeConfig {
        region,
        widths,
        radius,
        samples,
        anchor,
    })
}

fn parse_sweep(v: &View, base: Method, constants: ReferenceConstants) -> Result<SweepGrid> {
    let header = v.line();
    let gammas = v.list("gamma")?;
    let betas = v.list("beta")?;
    let alphas = v.list("alpha")?;
    let parallelism = v.usize("parallelism")?.unwrap_or(1).max(1);
    let allow_unstable = v.bool("allow_unstable")?.unwrap_or(false);

    let mut points = Vec::new();
    match base {
        Method::HbOde { h, horizon, .. } => {
            for key in ["gamma", "beta"] {
                reject_key(v, key, MethodKind::HbOde)?;
            }
            let (alphas, line) = alphas
                .ok_or_else(|| config_err(header, "empty grid: hb_ode sweeps need `alpha`"))?;
            for a in alphas {
                points.push(SweepPoint {
                    method: Method::HbOde {
                        alpha: check_positive(a, line, "alpha")?,
                        h,
                        horizon,
                    },
                    expected_divergent: false,
                });
            }
        }
        Method::HbDiscrete(_) | Method::Gd { .. } => {
            reject_key(v, "alpha", base.kind())?;
            if gammas.is_none() && betas.is_none() {
                return Err(config_err(
                    header,
                    "empty grid: give `gamma` and/or `beta` lists",
                ));
            }
            let p = base.discrete_params().expect("discrete method");
            let (gs, gl) = gammas.unwrap_or((vec![p.gamma], header));
            let (bs, bl) = match (base, betas) {
                (Method::Gd { .. }, Some((_, line))) => {
                    return Err(config_err(line, "`beta` does not apply to gd sweeps"))
                }
                (_, Some(b)) => b,
                (_, None) => (vec![p.beta], header),
            };
            for &g in &gs {
                for &b in &bs {
                    check_positive(g, gl, "gamma")?;
                    let hp = HyperParams::new(g, b).map_err(|e| config_err(bl, e.to_string()))?;
                    let expected_divergent = hp.check_stable(constants.l).is_err();
                    if expected_divergent && !allow_unstable {
                        return Err(config_err(
                            gl,
                            format!(
                                "grid point gamma={g}, beta={b} is outside (0, 2(1+beta)/L) = (0, {:.6}); \
                                 set allow_unstable = true to run it as expected-divergent",
                                hp.stability_bound(constants.l)
                            ),
                        ));
                    }
                    let method = match base {
                        Method::Gd { .. } => Method::Gd { gamma: g },
                        _ => Method::HbDiscrete(hp),
                    };
                    points.push(SweepPoint {
                        method,
                        expected_divergent,
                    });
                }
            }
        }
    }
    Ok(SweepGrid {
        points,
        parallelism,
    })
}

/// Normal-space Hessian used by the spectral report: the full Hessian for a
/// quadratic, the diagonal of nonzero eigenvalues otherwise.
pub fn normal_hessian(obj: &Objective, point: &[f64]) -> Result<(Matrix, usize)> {
    if let ObjectiveKind::Quadratic { .. } = obj.spec().kind {
        return Ok((obj.hess(point)?, 0));
    }
    let s = hessian_normal_spectrum(obj, point, None)?;
    Ok((s.normal_block(), s.kernel_dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[objective]
kind = quadratic
eigenvalues = 1, 9

[method]
name = hb_discrete
gamma = auto
beta = auto

[init]
x0 = 1, 1
";

    fn err_line(text: &str) -> (usize, String) {
        match parse_config(text) {
            Err(Error::Config { line, message }) => (line, message),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_optimal_hyperparameters() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(
            cfg.method,
            Method::HbDiscrete(HyperParams {
                gamma: 0.25,
                beta: 0.25
            })
        );
        assert!(cfg.auto);
        assert_eq!(cfg.constants.source, ConstantsSource::Analytic);
        assert_eq!(cfg.x1, cfg.x0);
        assert_eq!(cfg.stopping, Stopping::default());
        assert_eq!(cfg.eps, DEFAULT_EPS);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn beta_out_of_range_names_the_range() {
        let text = MINIMAL.replace("gamma = auto\nbeta = auto", "gamma = 0.1\nbeta = 1.2");
        let (line, msg) = err_line(&text);
        assert_eq!(line, 8);
        assert!(msg.contains("[0, 1)"), "{msg}");
    }

    #[test]
    fn unknown_keys_and_sections_are_line_anchored() {
        let (line, msg) = err_line(&format!("{MINIMAL}colour = red\n"));
        assert_eq!(line, 12);
        assert!(msg.contains("colour"));
        let (line, _) = err_line(&format!("{MINIMAL}[extras]\n"));
        assert_eq!(line, 12);
        let (line, _) = err_line("seed = x\n");
        assert_eq!(line, 1);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let (line, msg) = err_line(&MINIMAL.replace("x0 = 1, 1", "x0 = 1, 1, 1"));
        assert_eq!(line, 11);
        assert!(msg.contains("dim"));
        let text = MINIMAL.replace("eigenvalues = 1, 9", "eigenvalues = 1, 9\ndim = 3");
        assert_eq!(err_line(&text).0, 4);
        let text = MINIMAL.replace("eigenvalues = 1, 9", "eigenvalues = 0, 9");
        assert_eq!(err_line(&text).0, 1);
    }

    #[test]
    fn gradient_descent_auto_and_ode_defaults() {
        let text = MINIMAL.replace("name = hb_discrete\ngamma = auto\nbeta = auto", "name = gd");
        assert_eq!(
            parse_config(&text).unwrap().method,
            Method::Gd { gamma: 0.2 }
        );
        let text = MINIMAL.replace(
            "name = hb_discrete\ngamma = auto\nbeta = auto",
            "name = hb_ode\nh = 1e-3",
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(
            cfg.method,
            Method::HbOde {
                alpha: 2.0,
                h: Some(1e-3),
                horizon: None
            }
        );
        assert_eq!(cfg.v0, vec![0.0, 0.0]);
        let text = MINIMAL.replace(
            "name = hb_discrete\ngamma = auto\nbeta = auto",
            "name = hb_ode\nh = 0.5",
        );
        assert!(err_line(&text).1.contains("guard"));
    }

    #[test]
    fn mixed_auto_is_rejected() {
        let text = MINIMAL.replace("beta = auto", "beta = 0.3");
        assert_eq!(err_line(&text).0, 8);
    }

    #[test]
    fn rotate_applies_the_objective_rotation() {
        let text = MINIMAL.replace(
            "eigenvalues = 1, 9",
            "eigenvalues = 1, 9\nrotation_seed = 5",
        ) + "rotate = true\n";
        let cfg = parse_config(&text).unwrap();
        let obj = cfg.build_objective().unwrap();
        assert_eq!(cfg.x0, obj.rotate(&[1.0, 1.0]).unwrap());
        assert_ne!(cfg.x0, vec![1.0, 1.0]);
    }

    #[test]
    fn sine_valley_auto_uses_the_pilot() {
        let text = "\
[objective]
kind = sine_valley
mu_t = 1
l_t = 9
[method]
name = hb_discrete
[init]
x0 = 1.05, 0.1, 1.6207963267948966
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.constants.source, ConstantsSource::Pilot);
        assert!((cfg.constants.l - 9.0).abs() < 1e-9);
        assert!((cfg.constants.mu - 1.0).abs() < 0.01);
    }

    #[test]
    fn sweep_grids() {
        let text = format!("{MINIMAL}[sweep]\ngamma = 0.05, 0.1, 0.3\nallow_unstable = true\n");
        let grid = parse_config(&text).unwrap().sweep.unwrap();
        assert_eq!(grid.points.len(), 3);
        let flags: Vec<bool> = grid.points.iter().map(|p| p.expected_divergent).collect();
        assert_eq!(flags, vec![false, false, true]);
        assert!(matches!(grid.points[0].method, Method::HbDiscrete(p) if p.beta == 0.25));

        let text = format!("{MINIMAL}[sweep]\ngamma = 0.05, 0.3\n");
        assert!(err_line(&text).1.contains("allow_unstable"));
        let text = format!("{MINIMAL}[sweep]\nparallelism = 2\n");
        assert!(err_line(&text).1.contains("empty grid"));
        let text = format!("{MINIMAL}[sweep]\ngamma =\n");
        assert!(err_line(&text).1.contains("empty"));
    }
}
