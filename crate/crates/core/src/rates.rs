//! Closed-form convergence rates, optimal hyperparameters and the spectra of
//! the linearized heavy ball system matrices.
//!
//! Discrete time: `x_{n+1} = x_n − γ∇f(x_n) + β(x_n − x_{n−1})`, with the
//! three-branch rate `m(γ, β)`. Continuous time: `ẍ + αẋ + ∇f(x) = 0`, with
//! the exponent `m(α) = ½(α − √max(0, α² − 4μ))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, merge_clusters, symmetric_eigen, Matrix};

/// Discrete heavy ball hyperparameters. `beta = 0` is gradient descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub gamma: f64,
    pub beta: f64,
}

impl HyperParams {
    /// Validates `γ > 0` and `β ∈ [0, 1)`.
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        Ok(Self { gamma, beta })
    }

    pub fn gradient_descent(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0)
    }

    /// Upper end of the admissible step range, `2(1 + β)/L`.
    pub fn stability_bound(&self, l: f64) -> f64 {
        2.0 * (1.0 + self.beta) / l
    }

    pub fn check_stable(&self, l: f64) -> Result<()> {
        let upper = self.stability_bound(l);
        if !(self.gamma < upper) {
            return Err(Error::OutOfStabilityRange {
                gamma: self.gamma,
                upper,
            });
        }
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

fn check_mu_l(mu: f64, l: f64) -> Result<()> {
    check_positive("mu", mu)?;
    check_positive("L", l)?;
    if mu > l {
        return Err(Error::InvalidParameter(format!(
            "mu must not exceed L, got mu={mu}, L={l}"
        )));
    }
    Ok(())
}

/// Continuous-time exponent `m(α) = ½(α − √max(0, α² − 4μ))`.
pub fn m_continuous(alpha: f64, mu: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("mu", mu)?;
    Ok(0.5 * (alpha - (alpha * alpha - 4.0 * mu).max(0.0).sqrt()))
}

/// Critical damping `α* = 2√μ`, where `m(α*) = √μ`.
pub fn optimal_alpha(mu: f64) -> Result<f64> {
    check_positive("mu", mu)?;
    Ok(2.0 * mu.sqrt())
}

/// The three step sizes at which `m(γ, β)` changes branch:
/// `((1−√β)²/μ, (1+√β)²/L, 2(1+β)/(L+μ))`.
pub fn branch_boundaries(beta: f64, mu: f64, l: f64) -> [f64; 3] {
    let sb = beta.sqrt();
    [
        (1.0 - sb).powi(2) / mu,
        (1.0 + sb).powi(2) / l,
        2.0 * (1.0 + beta) / (l + mu),
    ]
}

/// Which closed form of `m(γ, β)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBranch {
    /// Every mode is complex; `m = √β`.
    Middle,
    /// The slowest mode is the `μ` mode.
    Small,
    /// The slowest mode is the `L` mode.
    Large,
    /// `β = 0`: gradient descent, `max(|1−γμ|, |1−γL|)`.
    GradientDescent,
}

/// Relative slack on the closed middle interval so that hyperparameters
/// computed in floating point from the optimal formulas land inside it.
/// The left end `(1−√β)²/μ` cancels as `β → 1`, so its slack is widened by
/// `1/(1−√β)`.
const MIDDLE_SLACK: f64 = 4.0 * f64::EPSILON;

pub fn discrete_branch(params: HyperParams, mu: f64, l: f64) -> RateBranch {
    if params.beta == 0.0 {
        return RateBranch::GradientDescent;
    }
    let [a, b, c] = branch_boundaries(params.beta, mu, l);
    let g = params.gamma;
    let slack_a = MIDDLE_SLACK / (1.0 - params.beta.sqrt());
    if a * (1.0 - slack_a) <= g && g <= b * (1.0 + MIDDLE_SLACK) {
        RateBranch::Middle
    } else if g <= c {
        RateBranch::Small
    } else {
        RateBranch::Large
    }
}

/// Discrete-time rate `m(γ, β)` for `0 < μ ≤ L` and `γ ∈ (0, 2(1+β)/L)`.
///
/// `β = 0` is accepted as the gradient-descent limit.
pub fn m_discrete(params: HyperParams, mu: f64, l: f64) -> Result<f64> {
    check_mu_l(mu, l)?;
    let params = HyperParams::new(params.gamma, params.beta)?;
    params.check_stable(l)?;
    let HyperParams { gamma, beta } = params;
    Ok(match discrete_branch(params, mu, l) {
        RateBranch::GradientDescent => (1.0 - gamma * mu).abs().max((1.0 - gamma * l).abs()),
        RateBranch::Middle => beta.sqrt(),
        RateBranch::Small => {
            let p = 0.5 * (1.0 + beta - gamma * mu);
            p + (p * p - beta).max(0.0).sqrt()
        }
        RateBranch::Large => {
            let q = 0.5 * (gamma * l - (1.0 + beta));
            q + (q * q - beta).max(0.0).sqrt()
        }
    })
}

/// `γ = 4/(√μ + √L)²`, `β = ((√κ − 1)/(√κ + 1))²`.
pub fn optimal_hyperparams(mu: f64, l: f64) -> Result<HyperParams> {
    check_mu_l(mu, l)?;
    let s = mu.sqrt() + l.sqrt();
    let r = optimal_rate(mu, l)?;
    Ok(HyperParams {
        gamma: 4.0 / (s * s),
        beta: r * r,
    })
}

/// `(√κ − 1)/(√κ + 1)`, the value of `m` at the optimal hyperparameters.
pub fn optimal_rate(mu: f64, l: f64) -> Result<f64> {
    check_mu_l(mu, l)?;
    let sk = (l / mu).sqrt();
    Ok((sk - 1.0) / (sk + 1.0))
}

/// Gradient descent rate `(κ − 1)/(κ + 1)` at step `2/(L + μ)`.
pub fn gd_rate(kappa: f64) -> Result<f64> {
    if !(kappa.is_finite() && kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be at least 1, got {kappa}"
        )));
    }
    Ok((kappa - 1.0) / (kappa + 1.0))
}

/// One row of the `rates` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub mu: f64,
    pub l: f64,
    pub kappa: f64,
    pub alpha_star: f64,
    pub m_cont: f64,
    pub gamma_star: f64,
    pub beta_star: f64,
    pub m_disc: f64,
    pub gd_rate: f64,
}

pub fn rate_row(mu: f64, l: f64) -> Result<RateRow> {
    check_mu_l(mu, l)?;
    let alpha_star = optimal_alpha(mu)?;
    let hp = optimal_hyperparams(mu, l)?;
    let kappa = l / mu;
    Ok(RateRow {
        mu,
        l,
        kappa,
        alpha_star,
        m_cont: m_continuous(alpha_star, mu)?,
        gamma_star: hp.gamma,
        beta_star: hp.beta,
        m_disc: m_discrete(hp, mu, l)?,
        gd_rate: gd_rate(kappa)?,
    })
}

/// Linearization of the ODE around a minimizer with normal Hessian `H`
/// (`d_N × d_N`) and `d_T` tangential directions. State order is
/// `(x_N, v_T, v_N)`:
///
/// ```text
/// [  0    0    I  ]
/// [  0  −αI    0  ]
/// [ −H    0  −αI  ]
/// ```
pub fn continuous_system_matrix(h: &Matrix, d_t: usize, alpha: f64) -> Result<Matrix> {
    h.ensure_symmetric(1e-12)?;
    check_positive("alpha", alpha)?;
    let dn = h.rows();
    let mut a = Matrix::zeros(2 * dn + d_t, 2 * dn + d_t);
    let v_n = dn + d_t;
    for i in 0..dn {
        a[(i, v_n + i)] = 1.0;
        a[(v_n + i, v_n + i)] = -alpha;
        for j in 0..dn {
            a[(v_n + i, j)] = -h[(i, j)];
        }
    }
    for k in 0..d_t {
        a[(dn + k, dn + k)] = -alpha;
    }
    Ok(a)
}

/// One-step map of the linearized heavy ball iteration. State order is
/// `(x_n, x_{n−1})` in the normal directions followed by the tangential
/// momentum:
///
/// ```text
/// [ (1+β)I − γH   −βI   0 ]
/// [      I          0   0 ]
/// [      0          0   β ]
/// ```
pub fn discrete_system_matrix(h: &Matrix, d_t: usize, params: HyperParams) -> Result<Matrix> {
    h.ensure_symmetric(1e-12)?;
    let HyperParams { gamma, beta } = HyperParams::new(params.gamma, params.beta)?;
    let dn = h.rows();
    let mut a = Matrix::zeros(2 * dn + d_t, 2 * dn + d_t);
    for i in 0..dn {
        for j in 0..dn {
            a[(i, j)] = -gamma * h[(i, j)];
        }
        a[(i, i)] += 1.0 + beta;
        a[(i, dn + i)] = -beta;
        a[(dn + i, i)] = 1.0;
    }
    for k in 0..d_t {
        a[(2 * dn + k, 2 * dn + k)] = beta;
    }
    Ok(a)
}

/// Eigenvalues `−½(α ∓ √(α² − 4λ))` of `[[0, 1], [−λ, −α]]`, slowest first.
pub fn block_eigenvalues_continuous(lambda: f64, alpha: f64) -> [Complex64; 2] {
    let disc = alpha * alpha - 4.0 * lambda;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [
            Complex64::new(-0.5 * (alpha - s), 0.0),
            Complex64::new(-0.5 * (alpha + s), 0.0),
        ]
    } else {
        let s = 0.5 * (-disc).sqrt();
        [
            Complex64::new(-0.5 * alpha, s),
            Complex64::new(-0.5 * alpha, -s),
        ]
    }
}

/// Eigenvalues `p ± √(p² − β)`, `p = (1 + β − γλ)/2`, of `[[1+β−γλ, −β], [1, 0]]`.
pub fn block_eigenvalues_discrete(lambda: f64, gamma: f64, beta: f64) -> [Complex64; 2] {
    let p = 0.5 * (1.0 + beta - gamma * lambda);
    let disc = p * p - beta;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // larger modulus first
        if p >= 0.0 {
            [Complex64::new(p + s, 0.0), Complex64::new(p - s, 0.0)]
        } else {
            [Complex64::new(p - s, 0.0), Complex64::new(p + s, 0.0)]
        }
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(p, s), Complex64::new(p, -s)]
    }
}

/// Eigenvalues of a general square matrix with numerically split defective
/// clusters replaced by their mean.
pub fn spectrum(a: &Matrix) -> Result<Vec<Complex64>> {
    let raw = eigenvalues(a)?;
    Ok(merge_clusters(&raw, cluster_tol(a)))
}

fn cluster_tol(a: &Matrix) -> f64 {
    1e-6 * a.max_abs().max(1.0)
}

/// `max |λ|` over the spectrum of `a`.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(spectrum(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `max Re λ` over the spectrum of `a`.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    let eigs = spectrum(a)?;
    if eigs.is_empty() {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Discrete,
    Continuous,
}

/// Numerical spectrum of a system matrix next to its closed form.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub kind: SystemKind,
    pub eigenvalues: Vec<Complex64>,
    /// Spectral radius of the numerical spectrum.
    pub rho: f64,
    /// Spectral abscissa of the numerical spectrum.
    pub abscissa: f64,
    /// Closed-form counterpart: `max(β, block moduli)` for the discrete map,
    /// `−m(α, λ_min)` for the continuous one.
    pub theory_rate: f64,
    /// Rate bound from the extreme eigenvalues of `H`: `m(γ, β)` or `m(α)`.
    /// `None` when the hyperparameters are outside the admissible range.
    pub rate_bound: Option<f64>,
    /// Largest distance in a greedy one-to-one matching of numerical and
    /// closed-form eigenvalues.
    pub max_abs_discrepancy: f64,
}

fn greedy_discrepancy(numeric: &[Complex64], closed: &[Complex64]) -> f64 {
    let mut used = vec![false; closed.len()];
    let mut worst: f64 = 0.0;
    for z in numeric {
        let best = closed
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .min_by(|(_, a), (_, b)| (*a - z).norm().total_cmp(&(*b - z).norm()));
        match best {
            Some((k, w)) => {
                used[k] = true;
                worst = worst.max((w - z).norm());
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

fn hessian_extremes(values: &[f64]) -> Result<(f64, f64)> {
    match (values.first(), values.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => Ok((lo, hi)),
        _ => Err(Error::InvalidParameter(
            "H must be nonempty and positive definite".into(),
        )),
    }
}

pub fn discrete_spectral_report(
    h: &Matrix,
    d_t: usize,
    params: HyperParams,
) -> Result<SpectralReport> {
    let a = discrete_system_matrix(h, d_t, params)?;
    let lambdas = symmetric_eigen(h)?.values;
    let (mu, l) = hessian_extremes(&lambdas)?;
    let mut closed: Vec<Complex64> = lambdas
        .iter()
        .flat_map(|&lam| block_eigenvalues_discrete(lam, params.gamma, params.beta))
        .collect();
    closed.extend(std::iter::repeat_n(Complex64::new(params.beta, 0.0), d_t));
    let closed = merge_clusters(&closed, cluster_tol(&a));
    let eigs = spectrum(&a)?;
    Ok(SpectralReport {
        kind: SystemKind::Discrete,
        rho: eigs.iter().map(|z| z.norm()).fold(0.0, f64::max),
        abscissa: eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        theory_rate: closed.iter().map(|z| z.norm()).fold(0.0, f64::max),
        rate_bound: m_discrete(params, mu, l).ok(),
        max_abs_discrepancy: greedy_discrepancy(&eigs, &closed),
        eigenvalues: eigs,
    })
}

pub fn continuous_spectral_report(h: &Matrix, d_t: usize, alpha: f64) -> Result<SpectralReport> {
    let a = continuous_system_matrix(h, d_t, alpha)?;
    let lambdas = symmetric_eigen(h)?.values;
    let (mu, _) = hessian_extremes(&lambdas)?;
    let mut closed: Vec<Complex64> = lambdas
        .iter()
        .flat_map(|&lam| block_eigenvalues_continuous(lam, alpha))
        .collect();
    closed.extend(std::iter::repeat_n(Complex64::new(-alpha, 0.0), d_t));
    let closed = merge_clusters(&closed, cluster_tol(&a));
    let eigs = spectrum(&a)?;
    let m = m_continuous(alpha, mu)?;
    Ok(SpectralReport {
        kind: SystemKind::Continuous,
        rho: eigs.iter().map(|z| z.norm()).fold(0.0, f64::max),
        abscissa: eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        theory_rate: -m,
        rate_bound: Some(m),
        max_abs_discrepancy: greedy_discrepancy(&eigs, &closed),
        eigenvalues: eigs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(gamma: f64, beta: f64) -> HyperParams {
        HyperParams::new(gamma, beta).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn m_continuous_examples() {
        assert_eq!(m_continuous(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(m_continuous(1.0, 1.0).unwrap(), 0.5);
        assert!(close(
            m_continuous(4.0, 1.0).unwrap(),
            0.5 * (4.0 - 12f64.sqrt()),
            1e-15
        ));
        assert!(close(m_continuous(4.0, 1.0).unwrap(), 0.267949, 1e-6));
        assert!(m_continuous(0.0, 1.0).is_err());
        assert!(m_continuous(1.0, -1.0).is_err());
    }

    #[test]
    fn optimal_alpha_examples() {
        assert_eq!(optimal_alpha(1.0).unwrap(), 2.0);
        assert_eq!(optimal_alpha(4.0).unwrap(), 4.0);
        assert_eq!(m_continuous(4.0, 4.0).unwrap(), 2.0);
        assert_eq!(optimal_alpha(0.25).unwrap(), 1.0);
        assert_eq!(m_continuous(1.0, 0.25).unwrap(), 0.5);
        assert!(optimal_alpha(0.0).is_err());
    }

    #[test]
    fn m_discrete_examples() {
        assert_eq!(m_discrete(hp(0.25, 0.25), 1.0, 9.0).unwrap(), 0.5);
        let want = 0.575 + (0.330625f64 - 0.25).sqrt();
        assert!(close(
            m_discrete(hp(0.1, 0.25), 1.0, 9.0).unwrap(),
            want,
            1e-15
        ));
        // quoted reference value 0.858952 carries a ~7e-6 arithmetic slip
        assert!(close(want, 0.8589454172900136, 1e-15));
        assert!(close(want, 0.858952, 1e-5));
        let want = 0.545 + (0.297025f64 - 0.25).sqrt();
        assert!(close(
            m_discrete(hp(0.26, 0.25), 1.0, 9.0).unwrap(),
            want,
            1e-15
        ));
        assert!(close(want, 0.7618524844220145, 1e-15));
        assert!(close(want, 0.761862, 2e-5));
    }

    #[test]
    fn m_discrete_rejects_unstable_steps() {
        let err = m_discrete(hp(0.3, 0.25), 1.0, 9.0).unwrap_err();
        assert!(matches!(err, Error::OutOfStabilityRange { .. }));
        assert!(m_discrete(hp(2.5 / 9.0, 0.25), 1.0, 9.0).is_err());
        assert!(m_discrete(hp(0.1, 0.25), 9.0, 1.0).is_err());
        assert!(HyperParams::new(0.1, 1.2).is_err());
        assert!(HyperParams::new(0.0, 0.5).is_err());
    }

    #[test]
    fn beta_zero_is_gradient_descent() {
        let r = m_discrete(hp(0.2, 0.0), 1.0, 9.0).unwrap();
        assert!(close(r, 0.8, 1e-15));
        assert_eq!(
            discrete_branch(hp(0.2, 0.0), 1.0, 9.0),
            RateBranch::GradientDescent
        );
    }

    #[test]
    fn optimal_hyperparams_examples() {
        assert_eq!(optimal_hyperparams(1.0, 9.0).unwrap(), hp(0.25, 0.25));
        assert_eq!(optimal_hyperparams(1.0, 1.0).unwrap(), hp(1.0, 0.0));
        let p = optimal_hyperparams(1.0, 100.0).unwrap();
        assert!(close(p.gamma, 4.0 / 121.0, 1e-16));
        assert!(close(p.beta, 81.0 / 121.0, 1e-15));
        assert!(close(m_discrete(p, 1.0, 100.0).unwrap(), 9.0 / 11.0, 1e-12));
        assert!(optimal_hyperparams(2.0, 1.0).is_err());
    }

    #[test]
    fn optimal_boundaries_coincide() {
        for (mu, l) in [(1.0, 9.0), (1.0, 100.0), (0.3, 7.0), (2.0, 2.5)] {
            let p = optimal_hyperparams(mu, l).unwrap();
            let [a, b, c] = branch_boundaries(p.beta, mu, l);
            assert!(close(a, b, 1e-12) && close(b, c, 1e-12), "{a} {b} {c}");
            assert!(close(a, p.gamma, 1e-12));
        }
    }

    #[test]
    fn gd_rate_examples() {
        assert_eq!(gd_rate(1.0).unwrap(), 0.0);
        assert_eq!(gd_rate(9.0).unwrap(), 0.8);
        assert!(close(gd_rate(100.0).unwrap(), 99.0 / 101.0, 1e-16));
        assert!(gd_rate(0.5).is_err());
    }

    #[test]
    fn rate_row_for_one_nine() {
        let r = rate_row(1.0, 9.0).unwrap();
        assert_eq!((r.m_cont, r.m_disc, r.gd_rate), (1.0, 0.5, 0.8));
        assert_eq!((r.alpha_star, r.gamma_star, r.beta_star), (2.0, 0.25, 0.25));
    }

    #[test]
    fn continuous_matrix_examples() {
        let a = continuous_system_matrix(&Matrix::from_diag(&[1.0]), 0, 2.0).unwrap();
        assert_eq!(a, Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, -2.0]]));
        let e = spectrum(&a).unwrap();
        assert!(e
            .iter()
            .all(|z| (z - Complex64::new(-1.0, 0.0)).norm() < 1e-12));

        let a = continuous_system_matrix(&Matrix::from_diag(&[1.0, 9.0]), 0, 2.0).unwrap();
        let mut e = spectrum(&a).unwrap();
        e.sort_by(|x, y| x.im.total_cmp(&y.im));
        let s8 = 8f64.sqrt();
        assert!((e[0] - Complex64::new(-1.0, -s8)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((e[2] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((e[3] - Complex64::new(-1.0, s8)).norm() < 1e-12);

        let a = continuous_system_matrix(&Matrix::from_diag(&[1.0]), 1, 3.0).unwrap();
        let e = spectrum(&a).unwrap();
        assert_eq!(
            e.iter()
                .filter(|z| (*z - Complex64::new(-3.0, 0.0)).norm() < 1e-12)
                .count(),
            1
        );
    }

    #[test]
    fn discrete_matrix_examples() {
        let p = hp(0.25, 0.25);
        let a = discrete_system_matrix(&Matrix::from_diag(&[1.0]), 0, p).unwrap();
        assert_eq!(a, Matrix::from_rows(&[vec![1.0, -0.25], vec![1.0, 0.0]]));
        assert!(spectrum(&a)
            .unwrap()
            .iter()
            .all(|z| (z.re - 0.5).abs() < 1e-12 && z.im == 0.0));

        let a = discrete_system_matrix(&Matrix::from_diag(&[9.0]), 0, p).unwrap();
        assert_eq!(a, Matrix::from_rows(&[vec![-1.0, -0.25], vec![1.0, 0.0]]));
        assert!(spectrum(&a)
            .unwrap()
            .iter()
            .all(|z| (z.re + 0.5).abs() < 1e-12));

        let a = discrete_system_matrix(&Matrix::from_diag(&[1.0]), 1, hp(0.1, 0.3)).unwrap();
        let e = spectrum(&a).unwrap();
        assert!(e
            .iter()
            .any(|z| (z - Complex64::new(0.3, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn non_symmetric_hessian_is_rejected() {
        let h = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(
            continuous_system_matrix(&h, 0, 1.0),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(discrete_system_matrix(&h, 0, hp(0.1, 0.1)).is_err());
    }

    #[test]
    fn block_eigenvalue_examples() {
        let e = block_eigenvalues_continuous(1.0, 2.0);
        assert_eq!(e, [Complex64::new(-1.0, 0.0); 2]);
        let e = block_eigenvalues_continuous(4.0, 2.0);
        assert!(close(e[0].re, -1.0, 1e-15) && close(e[0].im.abs(), 3f64.sqrt(), 1e-15));
        assert!(close(e[1].im, -e[0].im, 0.0));
        let e = block_eigenvalues_continuous(1.0, 4.0);
        assert!(close(e[0].re, -0.267949, 1e-6) && close(e[1].re, -3.732050, 1e-6));

        let e = block_eigenvalues_discrete(1.0, 0.25, 0.25);
        assert_eq!(e, [Complex64::new(0.5, 0.0); 2]);
        let e = block_eigenvalues_discrete(5.0, 0.25, 0.25);
        assert!(e.iter().all(|z| close(z.norm(), 0.5, 1e-15) && z.im != 0.0));
        let e = block_eigenvalues_discrete(1.0, 0.1, 0.25);
        assert!(close(e[0].re, 0.8589454172900136, 1e-15));
        assert!(close(e[1].re, 0.2910545827099863, 1e-15));
    }

    #[test]
    fn spectral_examples() {
        let i3 = Matrix::identity(3);
        assert!(close(spectral_radius(&i3).unwrap(), 1.0, 1e-15));
        assert!(close(spectral_abscissa(&i3).unwrap(), 1.0, 1e-15));

        let h = Matrix::from_diag(&[1.0, 9.0]);
        let a = discrete_system_matrix(&h, 0, optimal_hyperparams(1.0, 9.0).unwrap()).unwrap();
        assert!(close(spectral_radius(&a).unwrap(), 0.5, 1e-9));

        let a = continuous_system_matrix(&Matrix::from_diag(&[1.0]), 0, 3.0).unwrap();
        let want = -0.5 * (3.0 - 5f64.sqrt());
        assert!(close(spectral_abscissa(&a).unwrap(), want, 1e-12));
        assert!(close(want, -0.381966, 1e-6));
        assert!(close(want, -m_continuous(3.0, 1.0).unwrap(), 1e-15));
    }

    #[test]
    fn spectral_reports_match_closed_forms() {
        let h = Matrix::from_rows(&[vec![5.0, 4.0], vec![4.0, 5.0]]);
        let r = discrete_spectral_report(&h, 1, hp(0.25, 0.25)).unwrap();
        assert!(r.max_abs_discrepancy < 1e-9, "{}", r.max_abs_discrepancy);
        assert!(close(r.rho, r.theory_rate, 1e-9));
        assert!(close(r.rate_bound.unwrap(), 0.5, 1e-15));

        let r = continuous_spectral_report(&h, 2, 1.5).unwrap();
        assert!(r.max_abs_discrepancy < 1e-9);
        assert!(close(r.abscissa, r.theory_rate, 1e-9));
        assert_eq!(r.eigenvalues.len(), 6);
    }

    #[test]
    fn branch_limits_are_holder_continuous() {
        // At β = β* all three boundaries coincide at a square-root branch
        // point; the jump across ±δ is O(√δ), not O(δ).
        let p = hp(0.25, 0.25);
        for delta in [1e-6, 1e-9, 1e-12] {
            let lo = m_discrete(hp(p.gamma - delta, 0.25), 1.0, 9.0).unwrap();
            let hi = m_discrete(hp(p.gamma + delta, 0.25), 1.0, 9.0).unwrap();
            assert!((lo - hi).abs() <= 4.0 * delta.sqrt());
        }
    }
}
