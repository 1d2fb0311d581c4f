//! Eigenvalues of small dense real matrices: Householder reduction to upper
//! Hessenberg form followed by Francis double-shift QR iteration.
//!
//! The iteration follows the classical EISPACK `hqr` scheme with Wilkinson's
//! exceptional shifts. Only eigenvalues are computed.

use num_complex::Complex64;

use super::Matrix;
use crate::error::{Error, Result};

const MAX_DIM: usize = 64;

/// All eigenvalues of a real square matrix (complex pairs appear as conjugates).
///
/// The total number of QR sweeps is capped at `100·n`; deflation uses the
/// relative sub-diagonal test against machine epsilon.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    a.ensure_square()?;
    let n = a.rows();
    if n > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "general eigensolver supports dimension <= {MAX_DIM}, got {n}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.max_abs() == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let mut h = a.clone();
    reduce_to_hessenberg(&mut h);
    francis_qr(&mut h)
}

fn reduce_to_hessenberg(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in (m + 1)..=high {
            h[(i, m - 1)] = 0.0;
        }
    }
}

#[allow(clippy::many_single_char_names)]
fn francis_qr(h: &mut Matrix) -> Result<Vec<Complex64>> {
    let nn = h.rows();
    let cap = 100 * nn;
    let eps = f64::EPSILON;
    let mut re = vec![0.0; nn];
    let mut im = vec![0.0; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let mut iter = 0usize;
    let mut total = 0usize;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut w, mut x, mut y);

    while n >= 0 {
        let nu = n as usize;
        // smallest l with a negligible sub-diagonal entry at l
        let mut l = nu;
        while l > 0 {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            re[nu] = h[(nu, nu)];
            im[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                re[nu - 1] = x + z;
                re[nu] = if z != 0.0 { x - w / z } else { x + z };
                im[nu - 1] = 0.0;
                im[nu] = 0.0;
            } else {
                re[nu - 1] = x + p;
                re[nu] = x + p;
                im[nu - 1] = z;
                im[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            total += 1;
            if total > cap {
                return Err(Error::NoConvergence { iterations: cap });
            }
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // two consecutive small sub-diagonal entries
            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let lhs = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let rhs =
                    eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s == 0.0 {
                    continue;
                }
                if k != m {
                    h[(k, k - 1)] = -s * x;
                } else if l != m {
                    h[(k, k - 1)] = -h[(k, k - 1)];
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for j in k..nn {
                    p = h[(k, j)] + q * h[(k + 1, j)];
                    if notlast {
                        p += r * h[(k + 2, j)];
                        h[(k + 2, j)] -= p * z;
                    }
                    h[(k, j)] -= p * x;
                    h[(k + 1, j)] -= p * y;
                }
                for i in 0..=nu.min(k + 3) {
                    p = x * h[(i, k)] + y * h[(i, k + 1)];
                    if notlast {
                        p += z * h[(i, k + 2)];
                        h[(i, k + 2)] -= p * r;
                    }
                    h[(i, k)] -= p;
                    h[(i, k + 1)] -= p * q;
                }
            }
        }
    }

    Ok(re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect())
}

/// Replaces every cluster of eigenvalues (single linkage, distance below
/// `tol`) by the cluster mean.
///
/// QR iteration resolves a defective eigenvalue only to about `√eps` per
/// member, but the mean of the perturbed cluster is accurate to `O(eps)`.
pub fn merge_clusters(values: &[Complex64], tol: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() < tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); n];
    for (i, v) in values.iter().enumerate() {
        let r = root(&mut parent, i);
        sums[r].0 += v;
        sums[r].1 += 1;
    }
    (0..n)
        .map(|i| {
            let (sum, count) = sums[root(&mut parent, i)];
            sum / count as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn identity_and_diagonal() {
        let e = eigenvalues(&Matrix::identity(3)).unwrap();
        assert!(e.iter().all(|z| (z.re - 1.0).abs() < 1e-15 && z.im == 0.0));
        let e = sorted(eigenvalues(&Matrix::from_diag(&[3.0, -1.0, 2.0])).unwrap());
        assert_eq!(
            e.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![-1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn rotation_has_unit_complex_pair() {
        let a = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let e = sorted(eigenvalues(&a).unwrap());
        assert!((e[0].im + 1.0).abs() < 1e-15 && e[0].re.abs() < 1e-15);
        assert!((e[1].im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn companion_of_known_cubic() {
        // (s-1)(s-2)(s-3) = s^3 - 6s^2 + 11s - 6
        let a = Matrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let e = sorted(eigenvalues(&a).unwrap());
        for (z, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-12, "{z} vs {want}");
            assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn nonsymmetric_with_complex_pair() {
        // block diag(rotation-scaling, 5) conjugated by a fixed invertible matrix
        let b = Matrix::from_rows(&[
            vec![1.0, -2.0, 0.0],
            vec![2.0, 1.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ]);
        let s = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
        ]);
        // inverse of s computed by hand: det = 1*(1) - 2*(0-3) = 7
        let s_inv = Matrix::from_rows(&[
            vec![1.0 / 7.0, -2.0 / 7.0, 6.0 / 7.0],
            vec![3.0 / 7.0, 1.0 / 7.0, -3.0 / 7.0],
            vec![-1.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0],
        ]);
        let a = s.matmul(&b).matmul(&s_inv);
        let e = sorted(eigenvalues(&a).unwrap());
        assert!((e[0] - Complex64::new(1.0, -2.0)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(1.0, 2.0)).norm() < 1e-12);
        assert!((e[2] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cluster_mean_recovers_defective_eigenvalue() {
        // rotated Jordan-type block with double eigenvalue 0.5
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let h = Matrix::from_rows(&[
            vec![c * c + 9.0 * s * s, (1.0 - 9.0) * c * s],
            vec![(1.0 - 9.0) * c * s, s * s + 9.0 * c * c],
        ]);
        let mut a = Matrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                a[(i, j)] = -0.25 * h[(i, j)];
            }
            a[(i, i)] += 1.25;
            a[(i, i + 2)] = -0.25;
            a[(i + 2, i)] = 1.0;
        }
        let merged = merge_clusters(&eigenvalues(&a).unwrap(), 1e-6 * a.max_abs().max(1.0));
        let mut moduli: Vec<f64> = merged.iter().map(|z| z.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        for m in moduli {
            assert!((m - 0.5).abs() < 1e-14, "{m}");
        }
    }

    #[test]
    fn distinct_eigenvalues_are_not_merged() {
        let v = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        assert_eq!(merge_clusters(&v, 1e-6), v.to_vec());
    }

    #[test]
    fn rejects_non_square() {
        assert!(eigenvalues(&Matrix::zeros(2, 3)).is_err());
    }
}
