//! Sampling probes for the local geometry around the minimizer set:
//! Polyak-Łojasiewicz (PL), quadratic growth (QG), error bound (EB) and
//! quasi-strong convexity (QSC) constants, plus the Hessian spectrum split
//! into normal (nonzero) and tangent (kernel) parts.
//!
//! Sample `i` is drawn from its own ChaCha stream of `seed`, so a larger
//! sample count extends the same point set instead of redrawing it, and the
//! infima are non-increasing in the sample count.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, norm, symmetric_eigen, Matrix};
use crate::objectives::Objective;

pub const MIN_SAMPLES: usize = 1000;
const GAP_SKIP: f64 = 1e-14;
const DIST_SKIP: f64 = 1e-9;
const NEAR_MINIMIZER_GRAD: f64 = 1e-8;
const KERNEL_REL_TOL: f64 = 1e-8;

/// Sampling region, uniform in volume.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Spherical shell `r_lo ≤ ‖x − center‖ ≤ r_hi`.
    Annulus {
        center: Vec<f64>,
        r_lo: f64,
        r_hi: f64,
    },
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn annulus(dim: usize, r_lo: f64, r_hi: f64) -> Self {
        Region::Annulus {
            center: vec![0.0; dim],
            r_lo,
            r_hi,
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Region::Ball { center, .. } | Region::Annulus { center, .. } => center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Ball { radius, .. } if !(radius.is_finite() && *radius > 0.0) => Err(
                Error::InvalidParameter(format!("ball radius must be positive, got {radius}")),
            ),
            Region::Annulus { r_lo, r_hi, .. }
                if !(*r_lo >= 0.0 && r_lo < r_hi && r_hi.is_finite()) =>
            {
                Err(Error::InvalidParameter(format!(
                    "annulus needs 0 <= r_lo < r_hi, got [{r_lo}, {r_hi}]"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Deterministic sample `i` of the stream `seed`.
    pub fn sample(&self, seed: u64, i: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let center = self.center();
        let d = center.len();
        let mut dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&dir);
        if n > 0.0 {
            dir.iter_mut().for_each(|v| *v /= n);
        }
        let u: f64 = rng.random();
        let r = match self {
            Region::Ball { radius, .. } => radius * u.powf(1.0 / d as f64),
            Region::Annulus { r_lo, r_hi, .. } => {
                let (a, b) = (r_lo.powi(d as i32), r_hi.powi(d as i32));
                (a + u * (b - a)).powf(1.0 / d as f64)
            }
        };
        center.iter().zip(&dir).map(|(c, v)| c + r * v).collect()
    }
}

/// Comma-free descriptor used in reports, e.g. `ball:r=0.05` or `annulus:0.95-1.05`.
impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Ball { radius, .. } => write!(f, "ball:r={radius}"),
            Region::Annulus { r_lo, r_hi, .. } => write!(f, "annulus:{r_lo}-{r_hi}"),
        }
    }
}

/// Infima of the four ratios over one sample set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConstants {
    pub pl: f64,
    pub qg: f64,
    pub eb: f64,
    pub qsc: f64,
}

#[derive(Debug, Clone, Copy)]
struct Ratios {
    pl: Option<f64>,
    qg: Option<f64>,
    eb: Option<f64>,
    qsc: Option<f64>,
}

fn ratios(obj: &Objective, x: &[f64]) -> Ratios {
    let f = obj.value_unchecked(x);
    let gap = f - obj.min_value();
    let g = obj.grad_unchecked(x);
    let g2 = dot(&g, &g);
    let pl = (gap >= GAP_SKIP).then(|| g2 / (2.0 * gap));

    let Ok(y) = obj.project_to_min_set(x) else {
        return Ratios {
            pl,
            qg: None,
            eb: None,
            qsc: None,
        };
    };
    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    let d = norm(&diff);
    if d < DIST_SKIP {
        return Ratios {
            pl,
            qg: None,
            eb: None,
            qsc: None,
        };
    }
    let d2 = d * d;
    let fy = obj.value_unchecked(&y);
    Ratios {
        pl,
        qg: Some(2.0 * gap / d2),
        eb: Some(g2.sqrt() / d),
        qsc: Some(2.0 * (dot(&g, &diff) - f + fy) / d2),
    }
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// All four constants from one pass over `n_samples` seeded samples.
pub fn estimate_constants(
    obj: &Objective,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<GeometryConstants> {
    region.validate()?;
    check_dim(obj.dim(), region.center().len())?;
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let empty = Ratios {
        pl: None,
        qg: None,
        eb: None,
        qsc: None,
    };
    // min is exact, associative and commutative, so the parallel reduction
    // is order-independent
    let r = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| ratios(obj, &region.sample(seed, i)))
        .reduce(
            || empty,
            |a, b| Ratios {
                pl: min_opt(a.pl, b.pl),
                qg: min_opt(a.qg, b.qg),
                eb: min_opt(a.eb, b.eb),
                qsc: min_opt(a.qsc, b.qsc),
            },
        );
    match (r.pl, r.qg, r.eb, r.qsc) {
        (Some(pl), Some(qg), Some(eb), Some(qsc)) => Ok(GeometryConstants { pl, qg, eb, qsc }),
        _ => Err(Error::DegenerateRegion),
    }
}

/// `inf ‖∇f‖² / (2(f − f*))` over the samples.
pub fn pl_constant_estimate(
    obj: &Objective,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_constants(obj, region, n_samples, seed)?.pl)
}

/// `inf 2(f − f*) / d(x, M)²` over the samples.
pub fn qg_constant_estimate(
    obj: &Objective,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_constants(obj, region, n_samples, seed)?.qg)
}

/// `inf ‖∇f‖ / d(x, M)` over the samples.
pub fn eb_constant_estimate(
    obj: &Objective,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_constants(obj, region, n_samples, seed)?.eb)
}

/// `inf 2(⟨∇f(x), x − y⟩ − f(x) + f(y)) / ‖x − y‖²` with `y` the projection of `x`.
pub fn qsc_constant_estimate(
    obj: &Objective,
    region: &Region,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_constants(obj, region, n_samples, seed)?.qsc)
}

/// Hessian spectrum at a point of the minimizer set.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSpectrum {
    /// Eigenvalues above the kernel threshold, ascending.
    pub nonzero_eigs: Vec<f64>,
    pub kernel_dim: usize,
}

impl NormalSpectrum {
    /// Smallest and largest nonzero eigenvalue: the effective `(μ, L)`.
    pub fn extremes(&self) -> Result<(f64, f64)> {
        match (self.nonzero_eigs.first(), self.nonzero_eigs.last()) {
            (Some(&mu), Some(&l)) if mu > 0.0 => Ok((mu, l)),
            _ => Err(Error::InvalidParameter(format!(
                "Hessian has no positive normal spectrum: {:?}",
                self.nonzero_eigs
            ))),
        }
    }

    /// Hessian restricted to the normal space, in its eigenbasis.
    pub fn normal_block(&self) -> Matrix {
        Matrix::from_diag(&self.nonzero_eigs)
    }
}

/// Splits `Hess f(x_star)` into kernel and nonzero eigenvalues.
///
/// `kernel_tol` is absolute; `None` means `1e-8·max|λ|`. Requires
/// `‖∇f(x_star)‖ ≤ 1e-8`.
pub fn hessian_normal_spectrum(
    obj: &Objective,
    x_star: &[f64],
    kernel_tol: Option<f64>,
) -> Result<NormalSpectrum> {
    let grad_norm = norm(&obj.grad(x_star)?);
    if !(grad_norm <= NEAR_MINIMIZER_GRAD) {
        return Err(Error::NotNearMinimizer { grad_norm });
    }
    let eig = symmetric_eigen(&obj.hess(x_star)?)?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = kernel_tol.unwrap_or(KERNEL_REL_TOL * scale);
    let nonzero_eigs: Vec<f64> = eig
        .values
        .iter()
        .copied()
        .filter(|v| v.abs() >= tol)
        .collect();
    Ok(NormalSpectrum {
        kernel_dim: eig.values.len() - nonzero_eigs.len(),
        nonzero_eigs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub pl_const: f64,
    pub qg_const: f64,
    pub eb_const: f64,
    pub qsc_const: f64,
    pub hess_nonzero_eigs: Vec<f64>,
    pub kernel_dim: usize,
    pub region: Region,
    pub samples: usize,
    pub seed: u64,
}

/// Probes one region and attaches the Hessian spectrum at `x_star`.
pub fn geometry_report(
    obj: &Objective,
    x_star: &[f64],
    region: Region,
    n_samples: usize,
    seed: u64,
) -> Result<GeometryReport> {
    let spectrum = hessian_normal_spectrum(obj, x_star, None)?;
    let c = estimate_constants(obj, &region, n_samples, seed)?;
    Ok(GeometryReport {
        pl_const: c.pl,
        qg_const: c.qg,
        eb_const: c.eb,
        qsc_const: c.qsc,
        hess_nonzero_eigs: spectrum.nonzero_eigs,
        kernel_dim: spectrum.kernel_dim,
        region,
        samples: n_samples,
        seed,
    })
}

/// One report per ball of radius `radii[k]` around `x_star`, radii strictly
/// decreasing, so the approach of the constants to the smallest nonzero
/// Hessian eigenvalue is visible.
pub fn local_equivalence_report(
    obj: &Objective,
    x_star: &[f64],
    radii: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<GeometryReport>> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter(
            "radii must be a nonempty strictly decreasing list".into(),
        ));
    }
    radii
        .iter()
        .map(|&r| {
            geometry_report(
                obj,
                x_star,
                Region::ball(x_star.to_vec(), r),
                n_samples,
                seed,
            )
        })
        .collect()
}
