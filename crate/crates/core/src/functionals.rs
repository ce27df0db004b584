//! Quadrature of the quadratic curvature functionals.

use serde::{Deserialize, Serialize};

use crate::chart::{MetricField, QuadratureGrid};
use crate::error::{CurvError, Result};
use crate::tensor::{self, CurvatureBundle};

/// The coefficients of `F_{s,τ} = ∫|Rm|² + s∫|Ric|² + τ∫R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub s: f64,
    pub tau: f64,
}

impl Coefficients {
    pub fn new(s: f64, tau: f64) -> Result<Self> {
        if !s.is_finite() || !tau.is_finite() {
            return Err(CurvError::Config(format!(
                "coefficients must be finite, got s = {s}, tau = {tau}"
            )));
        }
        Ok(Coefficients { s, tau })
    }

    /// Pointwise integrand `|Rm|² + s|Ric|² + τR²`.
    pub fn integrand(&self, b: &CurvatureBundle) -> f64 {
        b.norm_rm2 + self.s * b.norm_ric2 + self.tau * b.scalar * b.scalar
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FunctionalReport {
    pub n: usize,
    pub model: String,
    pub s: f64,
    pub tau: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub rho: f64,
    #[serde(rename = "S")]
    pub scal: f64,
    #[serde(rename = "Rquad")]
    pub rquad: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub volume: f64,
}

/// Integrates `|W|², |Ric|², R², |Rm|²` and the volume over the grid.
pub fn evaluate(
    field: &MetricField,
    grid: &QuadratureGrid,
    coeff: Coefficients,
) -> Result<FunctionalReport> {
    field.require_integrals()?;
    let v = grid.integrate(5, |x| {
        let b = tensor::curvature(field, x)?;
        let dv = field.sqrt_det(x)?;
        Ok(vec![
            dv * b.norm_weyl2,
            dv * b.norm_ric2,
            dv * b.scalar * b.scalar,
            dv * b.norm_rm2,
            dv,
        ])
    })?;
    Ok(FunctionalReport {
        n: field.dim(),
        model: field.label().to_string(),
        s: coeff.s,
        tau: coeff.tau,
        w: v[0],
        rho: v[1],
        scal: v[2],
        rquad: v[3],
        f: v[3] + coeff.s * v[1] + coeff.tau * v[2],
        volume: v[4],
    })
}

/// Just `F_{s,τ}`, without the breakdown.
pub fn functional_value(
    field: &MetricField,
    grid: &QuadratureGrid,
    coeff: Coefficients,
) -> Result<f64> {
    field.require_integrals()?;
    Ok(grid.integrate(1, |x| {
        let b = tensor::curvature(field, x)?;
        Ok(vec![field.sqrt_det(x)? * coeff.integrand(&b)])
    })?[0])
}

/// `|Rm|² − |W|² − 4/(n−2)|Ric|² + 2/((n−1)(n−2))R²` at a point, relative to `max(|Rm|², tiny)`.
pub fn pointwise_decomposition_residual(b: &CurvatureBundle) -> Result<f64> {
    let n = b.n as f64;
    if b.n < 3 {
        return Err(CurvError::UnsupportedDimension(b.n));
    }
    let rhs = b.norm_weyl2 + 4.0 / (n - 2.0) * b.norm_ric2
        - 2.0 / ((n - 1.0) * (n - 2.0)) * b.scalar * b.scalar;
    Ok((b.norm_rm2 - rhs).abs() / b.norm_rm2.abs().max(f64::MIN_POSITIVE))
}

/// `|ℛ − (𝒲 + 4/(n−2)·ρ − 2/((n−1)(n−2))·𝒮)| / max(1, ℛ)`.
pub fn decomposition_residual(field: &MetricField, grid: &QuadratureGrid) -> Result<f64> {
    let n = field.dim();
    if n < 3 {
        return Err(CurvError::UnsupportedDimension(n));
    }
    let r = evaluate(field, grid, Coefficients { s: 0.0, tau: 0.0 })?;
    let nf = n as f64;
    let rhs = r.w + 4.0 / (nf - 2.0) * r.rho - 2.0 / ((nf - 1.0) * (nf - 2.0)) * r.scal;
    Ok((r.rquad - rhs).abs() / r.rquad.max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Compares `F(c·g)` with `c^{(n−4)/2} F(g)`.
pub fn scaling_check(
    field: &MetricField,
    grid: &QuadratureGrid,
    coeff: Coefficients,
    c: f64,
) -> Result<ScalingCheck> {
    if !(c > 0.0) {
        return Err(CurvError::Config(format!(
            "scale factor must be positive, got {c}"
        )));
    }
    let f0 = functional_value(field, grid, coeff)?;
    let lhs = functional_value(&field.scaled(c), grid, coeff)?;
    let rhs = c.powf((field.dim() as f64 - 4.0) / 2.0) * f0;
    let rel_err = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(ScalingCheck { lhs, rhs, rel_err })
}
