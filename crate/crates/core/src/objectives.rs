//! Testbed objectives with exact value, gradient and Hessian oracles.
//!
//! Every member has minimum value 0, a known minimizer set `M` and a
//! projection onto it:
//!
//! * `quadratic`: `½ xᵀ Q diag(λ) Qᵀ x`, `M = {0}`.
//! * `circle`: `¼(‖x‖² − 1)²`, `M` is the unit sphere.
//! * `sine_valley`: `½ μ_t (x₁ − sin x₃)² + ½ L_t x₂²` in ℝ³, `M` is the
//!   curve `{(sin t, 0, t)}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    Quadratic {
        /// Strictly positive, ascending.
        eigenvalues: Vec<f64>,
        rotation_seed: Option<u64>,
    },
    Circle,
    SineValley {
        mu_t: f64,
        l_t: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub dim: usize,
}

impl ObjectiveSpec {
    pub fn quadratic(eigenvalues: Vec<f64>, rotation_seed: Option<u64>) -> Self {
        let dim = eigenvalues.len();
        Self {
            kind: ObjectiveKind::Quadratic {
                eigenvalues,
                rotation_seed,
            },
            dim,
        }
    }

    pub fn circle(dim: usize) -> Self {
        Self {
            kind: ObjectiveKind::Circle,
            dim,
        }
    }

    pub fn sine_valley(mu_t: f64, l_t: f64) -> Self {
        Self {
            kind: ObjectiveKind::SineValley { mu_t, l_t },
            dim: 3,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ObjectiveKind::Quadratic { .. } => "quadratic",
            ObjectiveKind::Circle => "circle",
            ObjectiveKind::SineValley { .. } => "sine_valley",
        }
    }

    /// Compact, comma-free label used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            ObjectiveKind::Quadratic {
                eigenvalues,
                rotation_seed,
            } => {
                let eigs: Vec<String> = eigenvalues.iter().map(|v| format!("{v}")).collect();
                match rotation_seed {
                    Some(seed) => format!("quadratic(eigs={};seed={seed})", eigs.join(" ")),
                    None => format!("quadratic(eigs={})", eigs.join(" ")),
                }
            }
            ObjectiveKind::Circle => format!("circle(dim={})", self.dim),
            ObjectiveKind::SineValley { mu_t, l_t } => {
                format!("sine_valley(mu_t={mu_t};l_t={l_t})")
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidSpec("dim must be at least 1".into()));
        }
        match &self.kind {
            ObjectiveKind::Quadratic { eigenvalues, .. } => {
                if eigenvalues.len() != self.dim {
                    return Err(Error::InvalidSpec(format!(
                        "quadratic has {} eigenvalues but dim {}",
                        eigenvalues.len(),
                        self.dim
                    )));
                }
                if let Some(bad) = eigenvalues.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::InvalidSpec(format!(
                        "quadratic eigenvalues must be strictly positive, got {bad}"
                    )));
                }
                if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::InvalidSpec(
                        "quadratic eigenvalues must be sorted ascending".into(),
                    ));
                }
            }
            ObjectiveKind::Circle => {
                if self.dim < 2 {
                    return Err(Error::InvalidSpec("circle requires dim >= 2".into()));
                }
            }
            ObjectiveKind::SineValley { mu_t, l_t } => {
                if self.dim != 3 {
                    return Err(Error::InvalidSpec(format!(
                        "sine_valley is fixed to dim 3, got {}",
                        self.dim
                    )));
                }
                if !(mu_t.is_finite() && l_t.is_finite() && *mu_t > 0.0 && mu_t <= l_t) {
                    return Err(Error::InvalidSpec(format!(
                        "sine_valley requires 0 < mu_t <= l_t, got mu_t={mu_t}, l_t={l_t}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Objective {
    spec: ObjectiveSpec,
    /// Orthogonal rotation of the quadratic; `None` means identity.
    rotation: Option<Matrix>,
    /// Constant Hessian of the quadratic.
    quad_hessian: Option<Matrix>,
}

/// Builds a testbed objective after validating `spec`.
pub fn make_objective(spec: ObjectiveSpec) -> Result<Objective> {
    spec.validate()?;
    let (rotation, quad_hessian) = match &spec.kind {
        ObjectiveKind::Quadratic {
            eigenvalues,
            rotation_seed,
        } => {
            let rotation = rotation_seed.map(|seed| random_orthogonal(spec.dim, seed));
            let hessian = match &rotation {
                Some(q) => rotated_diag(q, eigenvalues),
                None => Matrix::from_diag(eigenvalues),
            };
            (rotation, Some(hessian))
        }
        _ => (None, None),
    };
    Ok(Objective {
        spec,
        rotation,
        quad_hessian,
    })
}

/// Deterministic Haar-like orthogonal matrix: Gram-Schmidt on a seeded Gaussian matrix.
pub fn random_orthogonal(dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj: f64 = c.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            v.iter_mut().for_each(|vi| *vi /= n);
            cols.push(v);
        }
    }
    let mut q = Matrix::zeros(dim, dim);
    for (j, c) in cols.iter().enumerate() {
        for (i, &ci) in c.iter().enumerate() {
            q[(i, j)] = ci;
        }
    }
    q
}

/// `Q diag(λ) Qᵀ`, filled from the upper triangle so the result is exactly symmetric.
fn rotated_diag(q: &Matrix, lambda: &[f64]) -> Matrix {
    let n = lambda.len();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| q[(i, k)] * lambda[k] * q[(j, k)]).sum();
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

impl Objective {
    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn min_value(&self) -> f64 {
        0.0
    }

    pub fn rotation(&self) -> Option<&Matrix> {
        self.rotation.as_ref()
    }

    /// Dimension of the minimizer manifold.
    pub fn manifold_dim(&self) -> usize {
        match self.spec.kind {
            ObjectiveKind::Quadratic { .. } => 0,
            ObjectiveKind::Circle => self.spec.dim - 1,
            ObjectiveKind::SineValley { .. } => 1,
        }
    }

    /// Analytic `(μ, L)`: smallest and largest nonzero Hessian eigenvalue over
    /// the minimizer set.
    pub fn nominal_constants(&self) -> (f64, f64) {
        match &self.spec.kind {
            ObjectiveKind::Quadratic { eigenvalues, .. } => {
                (eigenvalues[0], eigenvalues[eigenvalues.len() - 1])
            }
            ObjectiveKind::Circle => (2.0, 2.0),
            // nonzero eigenvalues on M are μ_t(1 + cos² x₃) and L_t
            ObjectiveKind::SineValley { mu_t, l_t } => (*mu_t, l_t.max(2.0 * mu_t)),
        }
    }

    /// A fixed point of the minimizer set: the origin, `e₁`, or `(1, 0, π/2)`.
    pub fn reference_minimizer(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        match self.spec.kind {
            ObjectiveKind::Quadratic { .. } => {}
            ObjectiveKind::Circle => x[0] = 1.0,
            ObjectiveKind::SineValley { .. } => {
                x[0] = 1.0;
                x[2] = std::f64::consts::FRAC_PI_2;
            }
        }
        x
    }

    /// Applies the quadratic's rotation `Q` to `x`; identity otherwise.
    pub fn rotate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.rotation {
            Some(q) => q.matvec(x),
            None => x.to_vec(),
        })
    }

    /// `Qᵀ x` for the quadratic (identity when unrotated).
    fn to_eigenbasis(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(q) => q.tr_matvec(x),
            None => x.to_vec(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.value_unchecked(x))
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.grad_unchecked(x))
    }

    pub fn hess(&self, x: &[f64]) -> Result<Matrix> {
        check_dim(self.dim(), x.len())?;
        Ok(self.hess_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[f64]) -> f64 {
        match &self.spec.kind {
            ObjectiveKind::Quadratic { eigenvalues, .. } => {
                let y = self.to_eigenbasis(x);
                0.5 * eigenvalues
                    .iter()
                    .zip(&y)
                    .map(|(l, yi)| l * yi * yi)
                    .sum::<f64>()
            }
            ObjectiveKind::Circle => {
                let s = x.iter().map(|v| v * v).sum::<f64>() - 1.0;
                0.25 * s * s
            }
            ObjectiveKind::SineValley { mu_t, l_t } => {
                let r = x[0] - x[2].sin();
                0.5 * mu_t * r * r + 0.5 * l_t * x[1] * x[1]
            }
        }
    }

    pub(crate) fn grad_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.spec.kind {
            ObjectiveKind::Quadratic { eigenvalues, .. } => {
                let y = self.to_eigenbasis(x);
                let scaled: Vec<f64> = eigenvalues.iter().zip(&y).map(|(l, yi)| l * yi).collect();
                match &self.rotation {
                    Some(q) => q.matvec(&scaled),
                    None => scaled,
                }
            }
            ObjectiveKind::Circle => {
                let s = x.iter().map(|v| v * v).sum::<f64>() - 1.0;
                x.iter().map(|v| s * v).collect()
            }
            ObjectiveKind::SineValley { mu_t, l_t } => {
                let r = x[0] - x[2].sin();
                vec![mu_t * r, l_t * x[1], -mu_t * r * x[2].cos()]
            }
        }
    }

    pub(crate) fn hess_unchecked(&self, x: &[f64]) -> Matrix {
        match &self.spec.kind {
            ObjectiveKind::Quadratic { .. } => self
                .quad_hessian
                .clone()
                .expect("quadratic hessian is built in make_objective"),
            ObjectiveKind::Circle => {
                let n = x.len();
                let s = x.iter().map(|v| v * v).sum::<f64>() - 1.0;
                let mut h = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = 2.0 * x[i] * x[j] + if i == j { s } else { 0.0 };
                        h[(i, j)] = v;
                        h[(j, i)] = v;
                    }
                }
                h
            }
            ObjectiveKind::SineValley { mu_t, l_t } => {
                let (sin3, cos3) = x[2].sin_cos();
                let r = x[0] - sin3;
                let mut h = Matrix::zeros(3, 3);
                h[(0, 0)] = *mu_t;
                h[(1, 1)] = *l_t;
                h[(0, 2)] = -mu_t * cos3;
                h[(2, 0)] = -mu_t * cos3;
                h[(2, 2)] = mu_t * cos3 * cos3 + mu_t * r * sin3;
                h
            }
        }
    }

    /// A nearest point of the minimizer set.
    pub fn project_to_min_set(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        match &self.spec.kind {
            ObjectiveKind::Quadratic { .. } => Ok(vec![0.0; x.len()]),
            ObjectiveKind::Circle => {
                let r = norm(x);
                if r == 0.0 {
                    return Err(Error::DegenerateProjection);
                }
                Ok(x.iter().map(|v| v / r).collect())
            }
            ObjectiveKind::SineValley { .. } => {
                let t = project_onto_sine_curve(x);
                Ok(vec![t.sin(), 0.0, t])
            }
        }
    }

    /// `d(x, M)`.
    pub fn distance_to_min_set(&self, x: &[f64]) -> Result<f64> {
        let p = self.project_to_min_set(x)?;
        Ok(dist(x, &p))
    }
}

const SINE_GRID_HALF_WIDTH: f64 = 2.0;
const SINE_GRID_SPACING: f64 = 0.01;
const SINE_TERNARY_STEPS: usize = 20;

/// Parameter `t` minimizing `‖x − (sin t, 0, t)‖`: grid search on
/// `[x₃ − 2, x₃ + 2]`, ternary refinement of the best bracket, then a few
/// guarded Newton steps on the stationarity condition.
fn project_onto_sine_curve(x: &[f64]) -> f64 {
    let phi = |t: f64| {
        let a = x[0] - t.sin();
        let c = x[2] - t;
        a * a + x[1] * x[1] + c * c
    };
    let steps = (2.0 * SINE_GRID_HALF_WIDTH / SINE_GRID_SPACING).round() as usize;
    let start = x[2] - SINE_GRID_HALF_WIDTH;
    let (mut best_t, mut best_v) = (start, phi(start));
    for k in 1..=steps {
        let t = start + k as f64 * SINE_GRID_SPACING;
        let v = phi(t);
        if v < best_v {
            best_t = t;
            best_v = v;
        }
    }

    let (mut lo, mut hi) = (best_t - SINE_GRID_SPACING, best_t + SINE_GRID_SPACING);
    for _ in 0..SINE_TERNARY_STEPS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if phi(m1) < phi(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mut t = 0.5 * (lo + hi);

    // φ'(t)/2 = −(x₁ − sin t) cos t − (x₃ − t)
    for _ in 0..4 {
        let (s, c) = t.sin_cos();
        let a = x[0] - s;
        let d1 = -a * c - (x[2] - t);
        let d2 = c * c + a * s + 1.0;
        if d2 <= 0.0 {
            break;
        }
        let next = t - d1 / d2;
        if !(next.is_finite() && phi(next) <= phi(t)) {
            break;
        }
        t = next;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub max_rel_error_grad: f64,
    pub max_rel_error_hess: f64,
}

/// Recommended central-difference steps for gradient and Hessian checks.
pub const FD_STEP_GRAD: f64 = 1e-5;
pub const FD_STEP_HESS: f64 = 1e-4;

/// Compares central differences against the analytic oracles.
///
/// The gradient is differenced from values and the Hessian from analytic
/// gradients, both with step `h`. Errors are `‖fd − exact‖_∞ / max(‖exact‖_∞, 1)`,
/// so near-critical points are measured on an absolute scale.
pub fn fd_check(obj: &Objective, x: &[f64], h: f64) -> Result<FdReport> {
    fd_check_with_steps(obj, x, h, h)
}

/// Same as [`fd_check`] with separate gradient and Hessian steps.
pub fn fd_check_with_steps(
    obj: &Objective,
    x: &[f64],
    h_grad: f64,
    h_hess: f64,
) -> Result<FdReport> {
    if !(h_grad > 0.0 && h_hess > 0.0) {
        return Err(Error::InvalidParameter(
            "finite-difference step must be positive".into(),
        ));
    }
    check_dim(obj.dim(), x.len())?;
    let n = x.len();
    let g = obj.grad_unchecked(x);
    let hs = obj.hess_unchecked(x);

    let mut xp = x.to_vec();
    let mut fd_grad = vec![0.0; n];
    let mut fd_hess = Matrix::zeros(n, n);
    for j in 0..n {
        xp[j] = x[j] + h_grad;
        let fp = obj.value_unchecked(&xp);
        xp[j] = x[j] - h_grad;
        let fm = obj.value_unchecked(&xp);
        fd_grad[j] = (fp - fm) / (2.0 * h_grad);

        xp[j] = x[j] + h_hess;
        let gp = obj.grad_unchecked(&xp);
        xp[j] = x[j] - h_hess;
        let gm = obj.grad_unchecked(&xp);
        for i in 0..n {
            fd_hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h_hess);
        }
        xp[j] = x[j];
    }

    let grad_err = fd_grad
        .iter()
        .zip(&g)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let grad_scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut hess_err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            hess_err = hess_err.max((fd_hess[(i, j)] - hs[(i, j)]).abs());
        }
    }
    let hess_scale = hs.max_abs().max(1.0);
    Ok(FdReport {
        max_rel_error_grad: grad_err / grad_scale,
        max_rel_error_hess: hess_err / hess_scale,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::linalg::symmetric_eigen;

    fn quad19() -> Objective {
        make_objective(ObjectiveSpec::quadratic(vec![1.0, 9.0], None)).unwrap()
    }

    fn sine19() -> Objective {
        make_objective(ObjectiveSpec::sine_valley(1.0, 9.0)).unwrap()
    }

    #[test]
    fn quadratic_examples() {
        let q = quad19();
        assert_eq!(q.eval(&[1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(q.grad(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(q.grad(&[1.0, 1.0]).unwrap(), vec![1.0, 9.0]);
        assert_eq!(q.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            q.hess(&[3.0, -2.0]).unwrap(),
            Matrix::from_diag(&[1.0, 9.0])
        );
    }

    #[test]
    fn rotated_quadratic_hessian_is_q_diag_qt() {
        let q = make_objective(ObjectiveSpec::quadratic(vec![1.0, 9.0], Some(11))).unwrap();
        let h = q.hess(&[0.0, 0.0]).unwrap();
        assert_eq!(h.asymmetry(), 0.0);
        let e = symmetric_eigen(&h).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-13);
        assert!((e.values[1] - 9.0).abs() < 1e-13);
        let rot = q.rotation().unwrap();
        let qtq = rot.transpose().matmul(rot);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn circle_examples() {
        let c = make_objective(ObjectiveSpec::circle(2)).unwrap();
        assert_eq!(c.eval(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(c.grad(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!((c.eval(&[1.1, 0.0]).unwrap() - 0.011025).abs() < 1e-15);
        let g = c.grad(&[1.1, 0.0]).unwrap();
        assert!((g[0] - 0.231).abs() < 1e-15 && g[1] == 0.0);
        let e = symmetric_eigen(&c.hess(&[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![0.0, 2.0]);
    }

    #[test]
    fn sine_valley_examples() {
        let s = sine19();
        let x = [1.0, 0.0, FRAC_PI_2];
        assert_eq!(s.eval(&x).unwrap(), 0.0);
        assert!(s.grad(&x).unwrap().iter().all(|g| g.abs() < 1e-15));
        let e = symmetric_eigen(&s.hess(&x).unwrap()).unwrap();
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
        assert!((e.values[2] - 9.0).abs() < 1e-15);
        assert_eq!(s.eval(&[0.0, 1.0, 0.0]).unwrap(), 4.5);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            ObjectiveSpec::quadratic(vec![0.0, 1.0], None),
            ObjectiveSpec::quadratic(vec![-1.0], None),
            ObjectiveSpec::quadratic(vec![9.0, 1.0], None),
            ObjectiveSpec {
                kind: ObjectiveKind::Quadratic {
                    eigenvalues: vec![1.0, 2.0],
                    rotation_seed: None,
                },
                dim: 3,
            },
            ObjectiveSpec::circle(1),
            ObjectiveSpec::sine_valley(2.0, 1.0),
            ObjectiveSpec::sine_valley(0.0, 1.0),
            ObjectiveSpec {
                kind: ObjectiveKind::SineValley {
                    mu_t: 1.0,
                    l_t: 2.0,
                },
                dim: 2,
            },
        ];
        for spec in bad {
            assert!(matches!(make_objective(spec), Err(Error::InvalidSpec(_))));
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let q = quad19();
        assert!(matches!(
            q.eval(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(q.grad(&[1.0, 2.0, 3.0]).is_err());
        assert!(q.hess(&[]).is_err());
        assert!(q.project_to_min_set(&[1.0]).is_err());
    }

    #[test]
    fn projections() {
        let c = make_objective(ObjectiveSpec::circle(2)).unwrap();
        assert_eq!(c.project_to_min_set(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(c.distance_to_min_set(&[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(
            c.project_to_min_set(&[0.0, 0.0]),
            Err(Error::DegenerateProjection)
        );
        let q = quad19();
        assert_eq!(q.project_to_min_set(&[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(q.distance_to_min_set(&[3.0, 4.0]).unwrap(), 5.0);
    }

    /// Dense brute-force scan of the curve parameter, independent of the
    /// grid/ternary/Newton path.
    fn brute_sine_distance(x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        let n = 4_000_000;
        for k in 0..=n {
            let t = x[2] - 2.0 + 4.0 * k as f64 / n as f64;
            let d = ((x[0] - t.sin()).powi(2) + x[1] * x[1] + (x[2] - t).powi(2)).sqrt();
            best = best.min(d);
        }
        best
    }

    #[test]
    fn sine_projection_matches_brute_force() {
        let s = sine19();
        let x = [1.0, 0.2, FRAC_PI_2];
        let p = s.project_to_min_set(&x).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-10);
        assert_eq!(p[1], 0.0);
        assert!((p[2] - FRAC_PI_2).abs() < 1e-10);
        assert!((s.distance_to_min_set(&x).unwrap() - 0.2).abs() < 1e-12);

        for x in [[0.3, -0.4, 0.9], [1.4, 0.05, 2.2], [-0.7, 0.0, -1.1]] {
            let d = s.distance_to_min_set(&x).unwrap();
            let brute = brute_sine_distance(&x);
            assert!(d <= brute + 1e-12, "{d} vs {brute}");
            assert!(brute - d < 1e-9, "{d} vs {brute}");
        }
    }

    #[test]
    fn fd_examples() {
        let c = make_objective(ObjectiveSpec::circle(2)).unwrap();
        assert!(fd_check(&c, &[0.7, 0.3], 1e-5).unwrap().max_rel_error_grad < 1e-6);
        let q = quad19();
        assert!(fd_check(&q, &[1.0, 1.0], 1e-4).unwrap().max_rel_error_hess < 1e-6);
        let s = sine19();
        assert!(
            fd_check(&s, &[0.5, 0.5, 0.5], 1e-5)
                .unwrap()
                .max_rel_error_grad
                < 1e-6
        );
        assert!(fd_check(&s, &[0.5, 0.5, 0.5], 0.0).is_err());
    }
}
