//! Dense linear algebra on the small (n ≤ 8) matrices that occur pointwise.

use crate::jet::Jet;

/// Cholesky factor of a row-major symmetric matrix; `None` if not positive definite.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// `sqrt(det a)` for a symmetric positive-definite matrix.
pub fn sqrt_det_spd(a: &[f64], n: usize) -> Option<f64> {
    let l = cholesky(a, n)?;
    Some((0..n).map(|i| l[i * n + i]).product())
}

/// Inverse of a symmetric positive-definite matrix.
pub fn inverse_spd(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, n)?;
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * inv[k * n + col];
            }
            inv[i * n + col] = s / l[i * n + i];
        }
    }
    Some(inv)
}

/// Inverse of a matrix of jets with invertible value part.
///
/// Gauss–Jordan without pivoting, which is safe for the symmetric
/// positive-definite value parts it is used on.
pub fn inverse_jets(a: &[Jet], n: usize) -> Vec<Jet> {
    let mut m: Vec<Jet> = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| a[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for p in 0..n {
        let r = m[p * n + p].recip();
        for j in 0..n {
            m[p * n + j] = &m[p * n + j] * &r;
            inv[p * n + j] = &inv[p * n + j] * &r;
        }
        for i in 0..n {
            if i == p {
                continue;
            }
            let f = m[i * n + p].clone();
            if f.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for j in 0..n {
                let mj = &f * &m[p * n + j];
                m[i * n + j] -= &mj;
                let ij = &f * &inv[p * n + j];
                inv[i * n + j] -= &ij;
            }
        }
    }
    // restore exact symmetry lost to rounding
    for i in 0..n {
        for j in i + 1..n {
            let avg = (&inv[i * n + j] + &inv[j * n + i]) * 0.5;
            inv[i * n + j] = avg.clone();
            inv[j * n + i] = avg;
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_inverse_and_determinant() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = inverse_spd(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let det = 4.0 * (3.0 * 2.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((sqrt_det_spd(&a, 3).unwrap() - f64::sqrt(det)).abs() < 1e-14);
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn jet_inverse_matches_derivative_of_inverse() {
        // d(A^{-1}) = -A^{-1} dA A^{-1} for A(x) = [[2+x, x], [x, 1]]
        let x = Jet::variable(1, 2, 0, 0.0);
        let one = x.constant_like(1.0);
        let a = vec![&x + 2.0, x.clone(), x.clone(), one];
        let inv = inverse_jets(&a, 2);
        let a0inv = [0.5, 0.0, 0.0, 1.0];
        let da = [1.0, 1.0, 1.0, 0.0];
        for i in 0..2 {
            for j in 0..2 {
                let mut d = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        d -= a0inv[i * 2 + k] * da[k * 2 + l] * a0inv[l * 2 + j];
                    }
                }
                assert!((inv[i * 2 + j].value() - a0inv[i * 2 + j]).abs() < 1e-15);
                assert!((inv[i * 2 + j].d1(0) - d).abs() < 1e-14);
            }
        }
    }
}
