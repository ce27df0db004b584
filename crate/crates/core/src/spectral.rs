//! Explicit TT fields, Rayleigh quotients of the Lichnerowicz Laplacian and
//! the symmetrization energies behind its lower bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chart::{milnor_coframe, MetricField, QuadratureGrid, SymTensorField};
use crate::error::{CurvError, Result};
use crate::tensor::{self, JTensor, LocalGeometry};

/// Tolerance on the TT defect before any spectral claim is made.
pub const TT_CHECK_TOL: f64 = 1e-6;
/// Slack allowed below the spherical bound `4nλ` for quadrature error.
pub const BOUND_SLACK: f64 = 1e-3;

/// `h(x) = A cos(2π k·x)` on the unit torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusTTMode {
    pub k: Vec<i64>,
    pub a: Vec<f64>,
}

impl TorusTTMode {
    /// Checks symmetry, `tr A = 0`, `A·k = 0` and `k ≠ 0` exactly.
    pub fn new(k: Vec<i64>, a: Vec<f64>) -> Result<Self> {
        let n = k.len();
        if a.len() != n * n {
            return Err(CurvError::DimensionMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        if k.iter().all(|&ki| ki == 0) {
            return Err(CurvError::InvalidMode("wave vector k is zero".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if a[i * n + j] != a[j * n + i] {
                    return Err(CurvError::InvalidMode(format!(
                        "A is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
        if tr != 0.0 {
            return Err(CurvError::InvalidMode(format!("tr A = {tr}, not 0")));
        }
        for j in 0..n {
            let v: f64 = (0..n).map(|p| a[p * n + j] * k[p] as f64).sum();
            if v != 0.0 {
                return Err(CurvError::InvalidMode(format!("(A·k)_{j} = {v}, not 0")));
            }
        }
        Ok(TorusTTMode { k, a })
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// `|2πk|²`, the eigenvalue of `−Δ`.
    pub fn eigenvalue(&self) -> f64 {
        let k2: i64 = self.k.iter().map(|k| k * k).sum();
        4.0 * PI * PI * k2 as f64
    }

    /// `∫|h|² = |A|²/2` on the unit torus.
    pub fn norm2(&self) -> f64 {
        0.5 * self.a.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn field(&self) -> SymTensorField {
        let w: Vec<f64> = self.k.iter().map(|&k| 2.0 * PI * k as f64).collect();
        let a = self.a.clone();
        SymTensorField::from_jets(self.dim(), move |c| {
            let mut arg = c[0].constant_like(0.0);
            for (x, wi) in c.iter().zip(&w) {
                arg.axpy(*wi, x);
            }
            let cs = arg.cos();
            a.iter().map(|aij| &cs * *aij).collect()
        })
    }
}

pub fn torus_tt_mode(k: &[i64], a: &[f64]) -> Result<SymTensorField> {
    Ok(TorusTTMode::new(k.to_vec(), a.to_vec())?.field())
}

/// `Σ d_i e^i ⊗ e^i` in the orthonormal Milnor coframe of the unit `S³`
/// (see [`crate::chart::euler_s3`]); requires `Σ d = 0`, `d ≠ 0`.
pub fn s3_invariant_tt(d: [f64; 3]) -> Result<SymTensorField> {
    let sum: f64 = d.iter().sum();
    if sum.abs() > 1e-14 * d.iter().map(|x| x.abs()).sum::<f64>().max(1.0) {
        return Err(CurvError::InvalidMode(format!(
            "invariant mode needs Σd = 0, got {sum}"
        )));
    }
    if d.iter().all(|&x| x == 0.0) {
        return Err(CurvError::InvalidMode("invariant mode is zero".into()));
    }
    Ok(SymTensorField::from_jets(3, move |c| {
        let s = milnor_coframe(c);
        let mut h = vec![c[0].constant_like(0.0); 9];
        for (i, di) in d.iter().enumerate() {
            let w = 0.25 * di;
            for a in 0..3 {
                let sa = &s[i][a] * w;
                for b in 0..3 {
                    h[a * 3 + b].fma_assign(&sa, &s[i][b]);
                }
            }
        }
        h
    }))
}

/// `(sup|δh|_g, sup|tr h|)` over the grid nodes.
pub fn tt_defect(
    base: &MetricField,
    h: &SymTensorField,
    grid: &QuadratureGrid,
) -> Result<(f64, f64)> {
    let n = base.dim();
    let div = grid.sup(|x| {
        let d = tensor::divergence(base, h, x)?;
        let g = base.components(x)?;
        let ginv = crate::linalg::inverse_spd(&g, n)
            .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })?;
        Ok(tensor::norm2(&d, 1, n, &ginv).sqrt())
    })?;
    let tr = grid.sup(|x| Ok(tensor::trace(base, h, x)?.abs()))?;
    Ok((div, tr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayleighReport {
    pub model: String,
    pub mode_desc: String,
    pub energy: f64,
    pub norm2: f64,
    pub quotient: f64,
    pub tt_defect_div: f64,
    pub tt_defect_tr: f64,
}

/// Lower bound on the TT spectrum of `−Δ_L` on a space form of curvature `λ`, if one is known.
pub fn tt_lower_bound(n: usize, lambda: f64) -> Option<f64> {
    if lambda > 0.0 {
        Some(4.0 * n as f64 * lambda)
    } else if lambda < 0.0 {
        Some(n as f64 * lambda)
    } else {
        None
    }
}

/// `∫⟨−Δ_L h, h⟩ / ∫|h|²` on a closed Einstein base, checked against [`tt_lower_bound`].
pub fn rayleigh_lichnerowicz(
    base: &MetricField,
    h: &SymTensorField,
    grid: &QuadratureGrid,
    mode_desc: &str,
) -> Result<RayleighReport> {
    let report = rayleigh_report(base, h, grid, mode_desc)?;
    let n = base.dim();
    if let Some(lambda) = base.curvature().filter(|&l| l > 0.0) {
        let bound = 4.0 * n as f64 * lambda;
        if report.quotient < bound - BOUND_SLACK {
            return Err(CurvError::Tolerance {
                what: format!("TT Rayleigh quotient below 4nλ = {bound}"),
                err: bound - report.quotient,
                tol: BOUND_SLACK,
            });
        }
    }
    Ok(report)
}

/// The quotient alone, without the spherical bound check.
pub fn rayleigh_report(
    base: &MetricField,
    h: &SymTensorField,
    grid: &QuadratureGrid,
    mode_desc: &str,
) -> Result<RayleighReport> {
    base.require_integrals()?;
    let (div, tr) = tt_defect(base, h, grid)?;
    if div > TT_CHECK_TOL || tr > TT_CHECK_TOL {
        return Err(CurvError::Precondition(format!(
            "h is not TT (divergence {div:.3e}, trace {tr:.3e})"
        )));
    }
    let n = base.dim();
    let v = grid.integrate(2, |x| {
        let lh = tensor::lichnerowicz(base, h, x)?;
        let hv = h.components(x)?;
        let g = base.components(x)?;
        let ginv = crate::linalg::inverse_spd(&g, n)
            .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })?;
        let hup = tensor::raise_all(&hv, 2, n, &ginv);
        let dv = base.sqrt_det(x)?;
        let e: f64 = lh.iter().zip(&hup).map(|(a, b)| a * b).sum();
        Ok(vec![
            -dv * e,
            dv * hv.iter().zip(&hup).map(|(a, b)| a * b).sum::<f64>(),
        ])
    })?;
    if !(v[1] > 0.0) {
        return Err(CurvError::Precondition("h vanishes on the grid".into()));
    }
    let quotient = v[0] / v[1];
    Ok(RayleighReport {
        model: base.label().to_string(),
        mode_desc: mode_desc.to_string(),
        energy: v[0],
        norm2: v[1],
        quotient,
        tt_defect_div: div,
        tt_defect_tr: tr,
    })
}

/// `(∫|h_ij,k + h_jk,i + h_ki,j|², ∫|h_ij,k − h_ik,j|²)`.
pub fn symmetrization_energies(
    base: &MetricField,
    h: &SymTensorField,
    grid: &QuadratureGrid,
) -> Result<(f64, f64)> {
    base.require_integrals()?;
    let n = base.dim();
    let v = grid.integrate(2, |x| {
        let geo = LocalGeometry::at(base, x, 2)?;
        let hj = JTensor::from_data(n, 2, h.jets(x, 1)?);
        let dh = geo.covariant_derivative(&hj).values();
        let ginv = geo.ginv.values();
        let at = |i: usize, j: usize, k: usize| dh[(i * n + j) * n + k];
        let mut cyc = vec![0.0; n * n * n];
        let mut anti = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cyc[(i * n + j) * n + k] = at(i, j, k) + at(j, k, i) + at(k, i, j);
                    anti[(i * n + j) * n + k] = at(i, j, k) - at(i, k, j);
                }
            }
        }
        let dv = base.sqrt_det(x)?;
        Ok(vec![
            dv * tensor::norm2(&cyc, 3, n, &ginv),
            dv * tensor::norm2(&anti, 3, n, &ginv),
        ])
    })?;
    Ok((v[0], v[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{build_grid, euler_s3, flat_torus, round_sphere, ScalarField};

    fn torus_mode(k: &[i64], a: &[f64]) -> (MetricField, SymTensorField, QuadratureGrid) {
        let n = k.len();
        let base = flat_torus(&vec![1.0; n]).unwrap();
        let grid = build_grid(base.domain(), &vec![6; n]).unwrap();
        (base, torus_tt_mode(k, a).unwrap(), grid)
    }

    #[test]
    fn torus_modes() {
        let a = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0];
        let (base, h, grid) = torus_mode(&[1, 0, 0], &a);
        let (div, tr) = tt_defect(&base, &h, &grid).unwrap();
        assert!(div <= 1e-12 && tr == 0.0, "{div} {tr}");
        let r = rayleigh_lichnerowicz(&base, &h, &grid, "k=(1,0,0)").unwrap();
        assert!((r.quotient - 4.0 * PI * PI).abs() < 1e-9, "{r:?}");
        assert!((r.norm2 - 1.0).abs() < 1e-12);

        let bad = TorusTTMode::new(
            vec![1, 0, 0],
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0],
        );
        assert!(matches!(bad, Err(CurvError::InvalidMode(ref m)) if m.contains("A·k")));
        let asym = TorusTTMode::new(
            vec![1, 0, 0],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        );
        assert!(matches!(asym, Err(CurvError::InvalidMode(ref m)) if m.contains("symmetric")));
        let zero = TorusTTMode::new(vec![0, 0, 0], a.to_vec());
        assert!(matches!(zero, Err(CurvError::InvalidMode(_))));

        // A·(1,1,0,0) = 0 and tr A = 0
        let mut a4 = vec![0.0; 16];
        let set = |a: &mut Vec<f64>, i: usize, j: usize, v: f64| {
            a[i * 4 + j] = v;
            a[j * 4 + i] = v;
        };
        set(&mut a4, 0, 0, 1.0);
        set(&mut a4, 1, 1, 1.0);
        set(&mut a4, 0, 1, -1.0);
        set(&mut a4, 2, 2, -2.0);
        set(&mut a4, 2, 3, 0.5);
        let mode = TorusTTMode::new(vec![1, 1, 0, 0], a4.clone()).unwrap();
        assert!((mode.eigenvalue() - 8.0 * PI * PI).abs() < 1e-12);
        let (base, h, grid) = torus_mode(&[1, 1, 0, 0], &a4);
        let r = rayleigh_lichnerowicz(&base, &h, &grid, "k=(1,1,0,0)").unwrap();
        assert!((r.quotient - 8.0 * PI * PI).abs() < 1e-9, "{r:?}");
        assert!((r.norm2 - mode.norm2()).abs() < 1e-12);
    }

    #[test]
    fn flat_lichnerowicz_is_rough_laplacian() {
        let a = [0.0, 0.5, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (base, h, grid) = torus_mode(&[0, 0, 2], &a);
        let rough = grid
            .integrate(1, |x| {
                let l = tensor::rough_laplacian(&base, &h, x)?;
                let hv = h.components(x)?;
                Ok(vec![-l.iter().zip(&hv).map(|(p, q)| p * q).sum::<f64>()])
            })
            .unwrap()[0];
        let r = rayleigh_lichnerowicz(&base, &h, &grid, "k=(0,0,2)").unwrap();
        assert!(
            (r.energy - rough).abs() < 1e-10 * rough.abs(),
            "{} {rough}",
            r.energy
        );
        assert!((r.quotient - 16.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn symmetrization_energies_on_torus_mode() {
        let a = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0];
        let (base, h, grid) = torus_mode(&[1, 0, 0], &a);
        let (cyc, anti) = symmetrization_energies(&base, &h, &grid).unwrap();
        let k2 = 4.0 * PI * PI;
        assert!((cyc - 3.0 * k2).abs() < 1e-9 * k2, "{cyc}");
        assert!((anti - 2.0 * k2).abs() < 1e-9 * k2, "{anti}");
    }

    #[test]
    fn trace_defect_of_conformal_tensor() {
        let base = round_sphere(3, 1.0).unwrap();
        let grid = build_grid(base.domain(), &[4, 4, 5]).unwrap();
        let f = ScalarField::from_jets(3, |c| c[0].cos());
        let h = SymTensorField::conformal(&f, &base);
        let (_, tr) = tt_defect(&base, &h, &grid).unwrap();
        let fmax = grid.sup(|x| Ok(f.value(x)?.abs())).unwrap();
        assert!((tr - 3.0 * fmax).abs() < 1e-12, "{tr} {fmax}");
        assert!(matches!(
            rayleigh_lichnerowicz(&base, &h, &grid, "conformal"),
            Err(CurvError::Precondition(_))
        ));
    }

    #[test]
    fn s3_invariant_modes_attain_bound() {
        let base = euler_s3(1.0).unwrap();
        let grid = build_grid(base.domain(), &[12, 12, 12]).unwrap();
        let vol = 2.0 * PI * PI;
        let mut energies = Vec::new();
        for (d, scale) in [
            ([2.0, -1.0, -1.0], 1.0),
            ([0.0, 1.0, -1.0], 1.0),
            ([1.0, 1.0, -2.0], 3.0),
        ] {
            let d = d.map(|x: f64| x * scale);
            let h = s3_invariant_tt(d).unwrap();
            let (div, tr) = tt_defect(&base, &h, &grid).unwrap();
            assert!(div <= 1e-8 && tr <= 1e-12, "{d:?}: {div} {tr}");
            let r = rayleigh_lichnerowicz(&base, &h, &grid, "invariant").unwrap();
            assert!((r.quotient - 12.0).abs() < 1e-3, "{d:?}: {r:?}");
            let d2: f64 = d.iter().map(|x| x * x).sum();
            assert!((r.norm2 - d2 * vol).abs() < 1e-6 * d2 * vol, "{r:?}");
            let (cyc, anti) = symmetrization_energies(&base, &h, &grid).unwrap();
            assert!(cyc.abs() <= 1e-6 && anti >= -1e-12, "{cyc} {anti}");
            energies.push(r.energy);
        }
        let h = s3_invariant_tt([2.0, -1.0, -1.0]).unwrap();
        let h2 = s3_invariant_tt([4.0, -2.0, -2.0]).unwrap();
        let e1 = rayleigh_lichnerowicz(&base, &h, &grid, "h").unwrap().energy;
        let e2 = rayleigh_lichnerowicz(&base, &h2, &grid, "2h")
            .unwrap()
            .energy;
        assert!((e2 - 4.0 * e1).abs() < 1e-10 * e2.abs());
        assert!((energies[0] - e1).abs() < 1e-12 * e1);
        assert!(s3_invariant_tt([1.0, 1.0, 0.0]).is_err());
        assert!(s3_invariant_tt([0.0; 3]).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(tt_lower_bound(3, 1.0), Some(12.0));
        assert_eq!(tt_lower_bound(4, -1.0), Some(-4.0));
        assert_eq!(tt_lower_bound(4, 0.0), None);
    }
}
