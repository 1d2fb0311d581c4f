//! Tail-rate estimation for geometric (per-iteration) and exponential
//! (per-unit-time) decay, tolerant of polynomial prefactors.
//!
//! The fit is ordinary least squares of `log s − p·log(1 + x)` against the
//! grid coordinate `x` (iteration index or time) inside a residual band
//! `[lo, hi]`, with the prefactor degree `p` chosen from `{0, 1, 2}`.

use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_LO: f64 = 1e-11;
pub const DEFAULT_HI: f64 = 1e-4;
pub const MIN_POINTS: usize = 10;
pub const MIN_R_SQUARED: f64 = 0.99;
pub const DEFAULT_EPS: f64 = 0.02;

/// Sampling grid of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    /// Entry `n` belongs to iteration `n`; the rate is a per-step factor.
    PerIteration,
    /// Entry `k` belongs to time `k·h`; the rate is an exponent.
    PerUnitTime { h: f64 },
}

impl Grid {
    fn coord(self, k: usize) -> f64 {
        match self {
            Grid::PerIteration => k as f64,
            Grid::PerUnitTime { h } => k as f64 * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// Per-step factor `ρ` (per-iteration grid) or exponent `r` (time grid).
    pub rate: f64,
    pub prefactor_degree: u32,
    pub r_squared: f64,
    /// Inclusive index range of the fit.
    pub window: (usize, usize),
    /// The same range in grid coordinates (iteration or time).
    pub window_coords: (f64, f64),
}

/// Longest contiguous index range with every value in `[lo, hi]`; the
/// earliest one wins ties.
pub fn tail_window(series: &[f64], lo: f64, hi: f64) -> Result<(usize, usize)> {
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "window bounds need lo < hi, got [{lo}, {hi}]"
        )));
    }
    let mut best: Option<(usize, usize)> = None;
    let mut start: Option<usize> = None;
    for (i, &s) in series.iter().enumerate() {
        if (lo..=hi).contains(&s) {
            let st = *start.get_or_insert(i);
            if best.is_none_or(|(a, b)| i - st > b - a) {
                best = Some((st, i));
            }
        } else {
            start = None;
        }
    }
    best.ok_or(Error::InsufficientDecay { lo, hi })
}

/// Configurable tail-rate fitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimator {
    pub lo: f64,
    pub hi: f64,
    pub allow_prefactor: bool,
}

impl Default for RateEstimator {
    fn default() -> Self {
        Self {
            lo: DEFAULT_LO,
            hi: DEFAULT_HI,
            allow_prefactor: true,
        }
    }
}

impl RateEstimator {
    /// The same estimator with the lower window bound raised to `floor`.
    pub fn with_floor(mut self, floor: f64) -> Self {
        if floor.is_finite() && floor > self.lo {
            self.lo = floor;
        }
        self
    }

    /// Band for a series that decays like the square of the one this
    /// estimator is tuned for (f-gaps versus distances).
    pub fn squared(self) -> Self {
        Self {
            lo: self.lo * self.lo,
            hi: self.hi * self.hi,
            ..self
        }
    }

    pub fn estimate(&self, series: &[f64], grid: Grid) -> Result<RateEstimate> {
        let (a, b) = tail_window(series, self.lo, self.hi)?;
        self.fit_range(series, grid, a, b)
    }

    /// Fits on the explicit inclusive range `[start, end]`.
    pub fn fit_range(
        &self,
        series: &[f64],
        grid: Grid,
        start: usize,
        end: usize,
    ) -> Result<RateEstimate> {
        if start > end || end >= series.len() {
            return Err(Error::InvalidParameter(format!(
                "fit range [{start}, {end}] outside a series of length {}",
                series.len()
            )));
        }
        if let Grid::PerUnitTime { h } = grid {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "time step must be positive, got {h}"
                )));
            }
        }
        let points = end - start + 1;
        if points < MIN_POINTS {
            return Err(Error::InsufficientData {
                points,
                needed: MIN_POINTS,
            });
        }
        if let Some(bad) = series[start..=end]
            .iter()
            .find(|s| !(**s > 0.0 && s.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "series must be positive inside the window, found {bad}"
            )));
        }

        let xs: Vec<f64> = (start..=end).map(|k| grid.coord(k)).collect();
        let logs: Vec<f64> = series[start..=end].iter().map(|s| s.ln()).collect();
        let degrees: &[u32] = if self.allow_prefactor {
            &[0, 1, 2]
        } else {
            &[0]
        };

        let mut best: Option<(u32, f64, f64)> = None;
        for &p in degrees {
            let ys: Vec<f64> = match grid {
                Grid::PerIteration => xs
                    .iter()
                    .zip(&logs)
                    .map(|(x, l)| l - p as f64 * (x + 1.0).ln())
                    .collect(),
                Grid::PerUnitTime { .. } => xs
                    .iter()
                    .zip(&logs)
                    .map(|(x, l)| l - p as f64 * x.ln_1p())
                    .collect(),
            };
            let (slope, r2) = least_squares(&xs, &ys);
            // a higher degree has to earn its place
            if best.is_none_or(|(_, _, r)| r2 > r + 1e-12) {
                best = Some((p, slope, r2));
            }
        }
        let (p, slope, r2) = best.expect("at least one degree is fitted");
        let rate = match grid {
            Grid::PerIteration => slope.exp(),
            Grid::PerUnitTime { .. } => -slope,
        };
        Ok(RateEstimate {
            rate,
            prefactor_degree: p,
            r_squared: r2,
            window: (start, end),
            window_coords: (grid.coord(start), grid.coord(end)),
        })
    }
}

/// Fits with the default band `[1e-11, 1e-4]`.
pub fn estimate_rate(series: &[f64], grid: Grid, allow_prefactor: bool) -> Result<RateEstimate> {
    RateEstimator {
        allow_prefactor,
        ..RateEstimator::default()
    }
    .estimate(series, grid)
}

/// Slope and coefficient of determination of `y ≈ a + b·x`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - xm, y - ym);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (ym + slope * (x - xm));
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Divergent,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Divergent => "divergent",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub details: String,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

/// Pass iff `|rate − theory| ≤ eps` and the fit has `R² ≥ 0.99`.
pub fn compare_to_theory(estimate: &RateEstimate, theory: f64, eps: f64) -> Verdict {
    let gap = (estimate.rate - theory).abs();
    let close = gap <= eps;
    let good_fit = estimate.r_squared >= MIN_R_SQUARED;
    let outcome = if close && good_fit {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    let mut details = format!(
        "fitted {:.6} vs theory {:.6} (|diff| {:.2e}, eps {:.2e}), R^2 {:.6}, prefactor degree {}",
        estimate.rate, theory, gap, eps, estimate.r_squared, estimate.prefactor_degree
    );
    if !close {
        details.push_str("; rate outside tolerance");
    }
    if !good_fit {
        details.push_str("; poor fit");
    }
    Verdict { outcome, details }
}
