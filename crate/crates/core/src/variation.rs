//! First and second variations of `F_{s,τ}` along `g + t·h`.
//!
//! The gradient is assembled from ten basis tensors
//!
//! | # | tensor            |
//! |---|-------------------|
//! | 0 | `R_i^{plk}R_jplk` |
//! | 1 | `ΔR_ij`           |
//! | 2 | `R_,ij`           |
//! | 3 | `R_i^l R_jl`      |
//! | 4 | `R^{pl}R_ipjl`    |
//! | 5 | `|Rm|² g_ij`      |
//! | 6 | `ΔR g_ij`         |
//! | 7 | `|Ric|² g_ij`     |
//! | 8 | `R R_ij`          |
//! | 9 | `R² g_ij`         |
//!
//! and the linearized gradient is the same combination of their variations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chart::{volume, MetricField, QuadratureGrid, ScalarField, SymTensorField};
use crate::error::{CurvError, Result};
use crate::functionals::Coefficients;
use crate::jet::Jet;
use crate::tensor::{self, flatten, unflatten, JTensor, LocalGeometry, EINSTEIN_TOL};

/// Metric jet order needed for the gradient (it contains `ΔRic`).
pub const GRADIENT_ORDER: usize = 4;
/// Default Richardson base step for t-derivatives.
pub const DEFAULT_T_STEP: f64 = 1e-2;
/// Default step for first-variation differences, which need no second difference.
pub const D1_T_STEP: f64 = 1e-3;
/// Tolerance on `|Vol − 1|` for unit-volume preconditions.
pub const UNIT_VOLUME_TOL: f64 = 1e-8;
/// Tolerance on the TT defect required by the identity batteries.
pub const TT_TOL: f64 = 1e-6;

pub const TERM_NAMES: [&str; 10] = [
    "(R_i^plk R_jplk)'",
    "(ΔR_ij)'",
    "(R_,ij)'",
    "(R_i^l R_jl)'",
    "(R^pl R_ipjl)'",
    "(|Rm|² g_ij)'",
    "(ΔR g_ij)'",
    "(|Ric|² g_ij)'",
    "(R R_ij)'",
    "(R² g_ij)'",
];

const GRAD_RQUAD: [f64; 10] = [-2.0, -4.0, 2.0, 4.0, -4.0, 0.5, 0.0, 0.0, 0.0, 0.0];
const GRAD_RHO: [f64; 10] = [0.0, -1.0, 1.0, 0.0, -2.0, 0.0, -0.5, 0.5, 0.0, 0.0];
const GRAD_SCAL: [f64; 10] = [0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -2.0, 0.0, -2.0, 0.5];

/// Weights of the basis tensors in `∇F_{s,τ} = ∇ℛ + s∇ρ + τ∇𝒮`.
pub fn gradient_weights(coeff: Coefficients) -> [f64; 10] {
    let mut w = [0.0; 10];
    for i in 0..10 {
        w[i] = GRAD_RQUAD[i] + coeff.s * GRAD_RHO[i] + coeff.tau * GRAD_SCAL[i];
    }
    w
}

fn combine(weights: &[f64; 10], terms: &[Vec<f64>; 10]) -> Vec<f64> {
    let mut out = vec![0.0; terms[0].len()];
    for (w, t) in weights.iter().zip(terms) {
        if *w != 0.0 {
            for (o, x) in out.iter_mut().zip(t) {
                *o += w * x;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Multilinear helpers on plain components

/// Contracts `slot` of a rank-`rank` tensor with the symmetric matrix `m`.
fn raise_slot(t: &[f64], rank: usize, n: usize, m: &[f64], slot: usize) -> Vec<f64> {
    let inner = n.pow((rank - 1 - slot) as u32);
    let outer = t.len() / (n * inner);
    let mut out = vec![0.0; t.len()];
    for o in 0..outer {
        for a in 0..n {
            for i in 0..inner {
                let mut v = 0.0;
                for p in 0..n {
                    v += m[a * n + p] * t[(o * n + p) * inner + i];
                }
                out[(o * n + a) * inner + i] = v;
            }
        }
    }
    out
}

/// `m1^{pp'} m2^{ll'} m3^{kk'} A_iplk B_jp'l'k'`.
fn x_form(m: [&[f64]; 3], a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut up = b.to_vec();
    for (s, ms) in m.iter().enumerate() {
        up = raise_slot(&up, 4, n, ms, s + 1);
    }
    let n3 = n * n * n;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n3).map(|r| a[i * n3 + r] * up[j * n3 + r]).sum();
        }
    }
    out
}

/// `m^{lq} A_il B_jq`.
fn y_form(m: &[f64], a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let bu = raise_slot(b, 2, n, m, 1);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|l| a[i * n + l] * bu[j * n + l]).sum();
        }
    }
    out
}

/// `m1^{pa} m2^{lb} S_ab Rm_ipjl`.
fn z_form(m1: &[f64], m2: &[f64], s: &[f64], rm: &[f64], n: usize) -> Vec<f64> {
    let up = raise_slot(&raise_slot(s, 2, n, m1, 0), 2, n, m2, 1);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for p in 0..n {
                for l in 0..n {
                    v += up[p * n + l] * rm[((i * n + p) * n + j) * n + l];
                }
            }
            out[i * n + j] = v;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy_vec(out: &mut [f64], s: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += s * v;
    }
}

fn scaled(x: &[f64], s: f64) -> Vec<f64> {
    x.iter().map(|v| s * v).collect()
}

fn sum_vecs(parts: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; parts[0].len()];
    for p in parts {
        axpy_vec(&mut out, 1.0, p);
    }
    out
}

// ---------------------------------------------------------------------------
// Gradient

/// Pointwise curvature data entering the gradient.
#[derive(Debug, Clone)]
pub struct GradientTerms {
    pub n: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub rm: Vec<f64>,
    pub ric: Vec<f64>,
    pub scal: f64,
    pub norm_rm2: f64,
    pub norm_ric2: f64,
    pub lap_r: f64,
    /// `R_ij,k` and `R_ij,kl`.
    pub dric: Vec<f64>,
    pub ddric: Vec<f64>,
    /// `R_,k`.
    pub dscal: Vec<f64>,
    /// The basis tensors, in table order.
    pub basis: [Vec<f64>; 10],
}

impl GradientTerms {
    pub fn from_geometry(geo: &LocalGeometry) -> Result<Self> {
        if geo.g.order() < GRADIENT_ORDER {
            return Err(CurvError::Config(format!(
                "the gradient needs metric jets of order {GRADIENT_ORDER}, got {}",
                geo.g.order()
            )));
        }
        let n = geo.n;
        let dric = geo.covariant_derivative(&geo.ric);
        let ddric = geo.covariant_derivative(&dric);
        let lap_ric = geo.trace_last_two(&ddric).values();
        let r = JTensor::from_data(n, 0, vec![geo.scal.clone()]);
        let dr = geo.covariant_derivative(&r);
        let hess = geo.covariant_derivative(&dr).values();
        let g = geo.g.values();
        let ginv = geo.ginv.values();
        let rm = geo.rm.values();
        let ric = geo.ric.values();
        let scal = geo.scal.value();
        let lap_r = dot(&ginv, &hess);
        let x = x_form([&ginv, &ginv, &ginv], &rm, &rm, n);
        let y = y_form(&ginv, &ric, &ric, n);
        let z = z_form(&ginv, &ginv, &ric, &rm, n);
        let norm_rm2 = dot(&ginv, &x);
        let norm_ric2 = dot(&ginv, &y);
        let basis = [
            x,
            lap_ric,
            hess,
            y,
            z,
            scaled(&g, norm_rm2),
            scaled(&g, lap_r),
            scaled(&g, norm_ric2),
            scaled(&ric, scal),
            scaled(&g, scal * scal),
        ];
        Ok(GradientTerms {
            n,
            g,
            ginv,
            rm,
            ric,
            scal,
            norm_rm2,
            norm_ric2,
            lap_r,
            dric: dric.values(),
            ddric: ddric.values(),
            dscal: dr.values(),
            basis,
        })
    }

    pub fn gradient(&self, coeff: Coefficients) -> Vec<f64> {
        combine(&gradient_weights(coeff), &self.basis)
    }

    /// `tr_g G / n`, which is `c` from the traced Euler–Lagrange equation.
    pub fn lagrange_constant(&self, coeff: Coefficients) -> f64 {
        let n = self.n as f64;
        let q = self.norm_rm2 + coeff.s * self.norm_ric2 + coeff.tau * self.scal * self.scal;
        ((n - 4.0) * q - (4.0 + n * coeff.s + 4.0 * (n - 1.0) * coeff.tau) * self.lap_r) / (2.0 * n)
    }

    /// The traceless Euler–Lagrange tensor, written out term by term.
    pub fn euler_lagrange(&self, coeff: Coefficients) -> Vec<f64> {
        let (s, tau) = (coeff.s, coeff.tau);
        let n = self.n as f64;
        let q = self.norm_rm2 + s * self.norm_ric2 + tau * self.scal * self.scal;
        let b = &self.basis;
        let mut e = vec![0.0; self.n * self.n];
        axpy_vec(&mut e, -(4.0 + s), &b[1]);
        axpy_vec(&mut e, 2.0 + s + 2.0 * tau, &b[2]);
        axpy_vec(&mut e, (2.0 - 2.0 * tau) / n * self.lap_r, &self.g);
        axpy_vec(&mut e, -2.0, &b[0]);
        axpy_vec(&mut e, -(4.0 + 2.0 * s), &b[4]);
        axpy_vec(&mut e, 4.0, &b[3]);
        axpy_vec(&mut e, -2.0 * tau, &b[8]);
        axpy_vec(&mut e, 2.0 / n * q, &self.g);
        e
    }
}

/// `∇ℛ`, `∇ρ`, `∇𝒮` and `∇F_{s,τ}` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientTensor {
    pub rquad: Vec<f64>,
    pub rho: Vec<f64>,
    pub scal: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn gradient_tensor(
    base: &MetricField,
    x: &[f64],
    coeff: Coefficients,
) -> Result<GradientTensor> {
    let t = gradient_terms_at(base, x)?;
    Ok(GradientTensor {
        rquad: combine(&GRAD_RQUAD, &t.basis),
        rho: combine(&GRAD_RHO, &t.basis),
        scal: combine(&GRAD_SCAL, &t.basis),
        total: t.gradient(coeff),
    })
}

pub fn gradient_terms_at(base: &MetricField, x: &[f64]) -> Result<GradientTerms> {
    if base.field().max_order() < GRADIENT_ORDER {
        return Err(CurvError::Config(format!(
            "the gradient needs metric derivatives of order {GRADIENT_ORDER}, the field supplies {}",
            base.field().max_order()
        )));
    }
    GradientTerms::from_geometry(&LocalGeometry::at(base, x, GRADIENT_ORDER)?)
}

// ---------------------------------------------------------------------------
// Linearization

/// `(∇T)' = ∇T' − Σ_s C^p_{m i_s} T_{…p…}` for the covariant derivative of a
/// tensor `T` with variation `T'`, given `C = Γ'`.
fn covariant_variation(geo: &LocalGeometry, t: &JTensor, t_dot: &JTensor, c: &JTensor) -> JTensor {
    let n = geo.n;
    let rank = t.rank;
    let mut out = geo.covariant_derivative(t_dot);
    let mut idx = vec![0usize; rank];
    let mut swapped = vec![0usize; rank];
    for k in 0..t.data.len() {
        unflatten(k, n, rank, &mut idx);
        for m in 0..n {
            let slot = &mut out.data[k * n + m];
            for s in 0..rank {
                swapped.copy_from_slice(&idx);
                for p in 0..n {
                    swapped[s] = p;
                    slot.fnma_assign(
                        &c.data[(p * n + m) * n + idx[s]],
                        &t.data[flatten(&swapped, n)],
                    );
                }
            }
        }
    }
    out
}

/// First-order changes of the connection and curvature, as jets.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub h: JTensor,
    /// `h_ij,k` and `h_ij,kl`.
    pub dh: JTensor,
    pub ddh: JTensor,
    /// `C^k_ij = (Γ^k_ij)'` at `(k, i, j)`.
    pub christoffel: JTensor,
    pub rm13: JTensor,
    pub rm: JTensor,
    pub ric: JTensor,
    pub scal: Jet,
}

impl CurvatureJets {
    pub fn new(geo: &LocalGeometry, h: &JTensor) -> Self {
        let n = geo.n;
        let dh = geo.covariant_derivative(h);
        let ddh = geo.covariant_derivative(&dh);
        let i3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;

        let mut christoffel = JTensor::zeros(n, 3, &dh.data[0]);
        for i in 0..n {
            for j in 0..n {
                let low: Vec<Jet> = (0..n)
                    .map(|l| {
                        (&(&dh.data[i3(i, l, j)] + &dh.data[i3(j, l, i)]) - &dh.data[i3(i, j, l)])
                            * 0.5
                    })
                    .collect();
                for k in 0..n {
                    let slot = &mut christoffel.data[i3(k, i, j)];
                    for (l, lo) in low.iter().enumerate() {
                        slot.fma_assign(&geo.ginv.data[k * n + l], lo);
                    }
                }
            }
        }

        // S_lijk = ½(h_il,kj + h_kl,ij − h_ik,lj − h_il,jk − h_jl,ik + h_ij,lk)
        let like = &ddh.data[0];
        let mut sym = JTensor::zeros(n, 4, like);
        let d = &ddh.data;
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut v = &d[i4(i, l, k, j)] + &d[i4(k, l, i, j)];
                        v -= &d[i4(i, k, l, j)];
                        v -= &d[i4(i, l, j, k)];
                        v -= &d[i4(j, l, i, k)];
                        v += &d[i4(i, j, l, k)];
                        v.scale(0.5);
                        sym.data[i4(l, i, j, k)] = v;
                    }
                }
            }
        }
        let n3 = n * n * n;
        let mut rm = sym.clone();
        for l in 0..n {
            for rest in 0..n3 {
                let slot = &mut rm.data[l * n3 + rest];
                for q in 0..n {
                    slot.fma_assign(&h.data[l * n + q], &geo.rm13.data[q * n3 + rest]);
                }
            }
        }
        let mut rm13 = JTensor::zeros(n, 4, like);
        for l in 0..n {
            for rest in 0..n3 {
                let slot = &mut rm13.data[l * n3 + rest];
                for p in 0..n {
                    slot.fma_assign(&geo.ginv.data[l * n + p], &sym.data[p * n3 + rest]);
                }
            }
        }

        // Ric'_ik = ½(h^j_i,kj + h^j_k,ij − Δh_ik − H_,ik)
        let mut ric = JTensor::zeros(n, 2, like);
        for i in 0..n {
            for k in 0..n {
                let slot = &mut ric.data[i * n + k];
                for a in 0..n {
                    for b in 0..n {
                        let gab = &geo.ginv.data[a * n + b];
                        let mut v = &d[i4(a, i, k, b)] + &d[i4(a, k, i, b)];
                        v -= &d[i4(i, k, a, b)];
                        v -= &d[i4(a, b, i, k)];
                        slot.fma_assign(gab, &v);
                    }
                }
                slot.scale(0.5);
            }
        }

        // R' = −h^ij R_ij + h^ij_,ij − ΔH
        let hup = geo.raise(&geo.raise(h, 0), 1);
        let mut scal = like.zero_like();
        for ij in 0..n * n {
            scal.fnma_assign(&hup.data[ij], &geo.ric.data[ij]);
        }
        for a in 0..n {
            for b in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let w = &geo.ginv.data[i * n + a] * &geo.ginv.data[j * n + b];
                        scal.fma_assign(&w, &d[i4(a, b, i, j)]);
                        let w = &geo.ginv.data[a * n + b] * &geo.ginv.data[i * n + j];
                        scal.fnma_assign(&w, &d[i4(i, j, a, b)]);
                    }
                }
            }
        }

        CurvatureJets {
            h: h.clone(),
            dh,
            ddh,
            christoffel,
            rm13,
            rm,
            ric,
            scal,
        }
    }
}

/// Pointwise first variation of every quantity in the gradient.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub base: GradientTerms,
    pub h: Vec<f64>,
    pub hup: Vec<f64>,
    pub christoffel: Vec<f64>,
    pub rm13: Vec<f64>,
    pub rm: Vec<f64>,
    pub ric: Vec<f64>,
    pub scal: f64,
    /// `(R_ij,k)'`.
    pub dric: Vec<f64>,
    /// Variations of the basis tensors, in table order.
    pub terms: [Vec<f64>; 10],
}

impl Linearization {
    /// Needs metric and `h` jets of order at least [`GRADIENT_ORDER`].
    pub fn new(geo: &LocalGeometry, h: &JTensor) -> Result<Self> {
        if h.order() < GRADIENT_ORDER {
            return Err(CurvError::Config(format!(
                "the linearized gradient needs jets of h of order {GRADIENT_ORDER}, got {}",
                h.order()
            )));
        }
        let base = GradientTerms::from_geometry(geo)?;
        let n = geo.n;
        let cj = CurvatureJets::new(geo, h);
        let c = &cj.christoffel;

        let dric = geo.covariant_derivative(&geo.ric);
        let dric_dot = covariant_variation(geo, &geo.ric, &cj.ric, c);
        let ddric_dot = covariant_variation(geo, &dric, &dric_dot, c).values();
        let r = JTensor::from_data(n, 0, vec![geo.scal.clone()]);
        let r_dot = JTensor::from_data(n, 0, vec![cj.scal.clone()]);
        let dr = geo.covariant_derivative(&r);
        let dr_dot = covariant_variation(geo, &r, &r_dot, c);
        let hess_dot = covariant_variation(geo, &dr, &dr_dot, c).values();

        let hv = h.values();
        let hup = tensor::raise_all(&hv, 2, n, &base.ginv);
        let ginv = &base.ginv;
        let gdot: Vec<f64> = hup.iter().map(|v| -v).collect();
        let rm_dot = cj.rm.values();
        let ric_dot = cj.ric.values();
        let scal_dot = cj.scal.value();
        let b = &base;

        let x_dot = sum_vecs(&[
            x_form([&gdot, ginv, ginv], &b.rm, &b.rm, n),
            x_form([ginv, &gdot, ginv], &b.rm, &b.rm, n),
            x_form([ginv, ginv, &gdot], &b.rm, &b.rm, n),
            x_form([ginv, ginv, ginv], &rm_dot, &b.rm, n),
            x_form([ginv, ginv, ginv], &b.rm, &rm_dot, n),
        ]);
        let n2 = n * n;
        let mut lap_ric_dot = vec![0.0; n2];
        for ij in 0..n2 {
            for kl in 0..n2 {
                lap_ric_dot[ij] +=
                    gdot[kl] * b.ddric[ij * n2 + kl] + ginv[kl] * ddric_dot[ij * n2 + kl];
            }
        }
        let y_dot = sum_vecs(&[
            y_form(&gdot, &b.ric, &b.ric, n),
            y_form(ginv, &ric_dot, &b.ric, n),
            y_form(ginv, &b.ric, &ric_dot, n),
        ]);
        let z_dot = sum_vecs(&[
            z_form(&gdot, ginv, &b.ric, &b.rm, n),
            z_form(ginv, &gdot, &b.ric, &b.rm, n),
            z_form(ginv, ginv, &ric_dot, &b.rm, n),
            z_form(ginv, ginv, &b.ric, &rm_dot, n),
        ]);
        let norm_rm2_dot = dot(&gdot, &b.basis[0]) + dot(ginv, &x_dot);
        let norm_ric2_dot = dot(&gdot, &b.basis[3]) + dot(ginv, &y_dot);
        let lap_r_dot = dot(&gdot, &b.basis[2]) + dot(ginv, &hess_dot);
        let with_g = |sd: f64, s: f64| -> Vec<f64> {
            let mut v = scaled(&b.g, sd);
            axpy_vec(&mut v, s, &hv);
            v
        };
        let mut r_ric_dot = scaled(&b.ric, scal_dot);
        axpy_vec(&mut r_ric_dot, b.scal, &ric_dot);
        let terms = [
            x_dot,
            lap_ric_dot,
            hess_dot,
            y_dot,
            z_dot,
            with_g(norm_rm2_dot, b.norm_rm2),
            with_g(lap_r_dot, b.lap_r),
            with_g(norm_ric2_dot, b.norm_ric2),
            r_ric_dot,
            with_g(2.0 * b.scal * scal_dot, b.scal * b.scal),
        ];
        Ok(Linearization {
            h: hv,
            hup,
            christoffel: cj.christoffel.values(),
            rm13: cj.rm13.values(),
            rm: rm_dot,
            ric: ric_dot,
            scal: scal_dot,
            dric: dric_dot.values(),
            terms,
            base,
        })
    }

    pub fn at(base: &MetricField, h: &SymTensorField, x: &[f64]) -> Result<Self> {
        check_dims(base, h)?;
        let geo = LocalGeometry::at(base, x, GRADIENT_ORDER)?;
        let hj = JTensor::from_data(base.dim(), 2, h.jets(x, GRADIENT_ORDER)?);
        Self::new(&geo, &hj)
    }

    /// `(dG/dt)_ij`.
    pub fn gradient_variation(&self, coeff: Coefficients) -> Vec<f64> {
        combine(&gradient_weights(coeff), &self.terms)
    }

    /// `T'_ij h^ij` for each basis tensor.
    pub fn pairings(&self) -> [f64; 10] {
        let mut p = [0.0; 10];
        for (pi, t) in p.iter_mut().zip(&self.terms) {
            *pi = dot(t, &self.hup);
        }
        p
    }
}

fn check_dims(base: &MetricField, h: &SymTensorField) -> Result<()> {
    if h.dim() != base.dim() {
        return Err(CurvError::DimensionMismatch {
            expected: base.dim(),
            got: h.dim(),
        });
    }
    Ok(())
}

/// `(Γ^k_ij)'` at `(k, i, j)`.
pub fn christoffel_variation(
    base: &MetricField,
    h: &SymTensorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    check_dims(base, h)?;
    let geo = LocalGeometry::at(base, x, 2)?;
    let hj = JTensor::from_data(base.dim(), 2, h.jets(x, 2)?);
    Ok(CurvatureJets::new(&geo, &hj).christoffel.values())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVariations {
    /// `(R^l_ijk)'`.
    pub rm13: Vec<f64>,
    /// `(R_lijk)'`.
    pub rm: Vec<f64>,
    pub ric: Vec<f64>,
    pub scal: f64,
}

pub fn curvature_variations(
    base: &MetricField,
    h: &SymTensorField,
    x: &[f64],
) -> Result<CurvatureVariations> {
    check_dims(base, h)?;
    let geo = LocalGeometry::at(base, x, 2)?;
    let hj = JTensor::from_data(base.dim(), 2, h.jets(x, 2)?);
    let cj = CurvatureJets::new(&geo, &hj);
    Ok(CurvatureVariations {
        rm13: cj.rm13.values(),
        rm: cj.rm.values(),
        ric: cj.ric.values(),
        scal: cj.scal.value(),
    })
}

// ---------------------------------------------------------------------------
// Integrated first variation and Euler–Lagrange equations

/// `∫ G_ij h^ij dV`.
pub fn first_variation(
    base: &MetricField,
    grid: &QuadratureGrid,
    h: &SymTensorField,
    coeff: Coefficients,
) -> Result<f64> {
    check_dims(base, h)?;
    base.require_integrals()?;
    let n = base.dim();
    Ok(grid.integrate(1, |x| {
        let t = gradient_terms_at(base, x)?;
        let hup = tensor::raise_all(&h.components(x)?, 2, n, &t.ginv);
        Ok(vec![base.sqrt_det(x)? * dot(&t.gradient(coeff), &hup)])
    })?[0])
}

/// `d/dt F(g + t·h)` at 0 by Richardson-extrapolated central differences.
pub fn first_variation_numeric(
    base: &MetricField,
    grid: &QuadratureGrid,
    h: &SymTensorField,
    coeff: Coefficients,
    t_step: f64,
) -> Result<f64> {
    let fam = PerturbationFamily::new(base.clone(), h.clone(), Normalization::Raw)?;
    let d = |t: f64| -> Result<f64> {
        Ok((fam.functional_at(t, grid, coeff)? - fam.functional_at(-t, grid, coeff)?) / (2.0 * t))
    };
    Ok((4.0 * d(t_step / 2.0)? - d(t_step)?) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElResidual {
    /// Largest pointwise norm of the traceless Euler–Lagrange tensor.
    pub residual: f64,
    /// Volume average of the pointwise Lagrange constant.
    pub c: f64,
}

/// Euler–Lagrange residual of `F_{s,τ}` restricted to unit volume.
pub fn el_residual(
    base: &MetricField,
    grid: &QuadratureGrid,
    coeff: Coefficients,
) -> Result<ElResidual> {
    let vol = volume(base, grid)?;
    if (vol - 1.0).abs() > UNIT_VOLUME_TOL {
        return Err(CurvError::Precondition(format!(
            "Euler–Lagrange residual needs a unit-volume metric, got volume {vol}"
        )));
    }
    let n = base.dim();
    let vals = grid.integrate(2, |x| {
        let t = gradient_terms_at(base, x)?;
        let dv = base.sqrt_det(x)?;
        Ok(vec![dv * t.lagrange_constant(coeff), dv])
    })?;
    let residual = grid.sup(|x| {
        let t = gradient_terms_at(base, x)?;
        Ok(tensor::norm2(&t.euler_lagrange(coeff), 2, n, &t.ginv).sqrt())
    })?;
    Ok(ElResidual {
        residual,
        c: vals[0] / vals[1],
    })
}

/// `sup |R_i^{plk}R_jplk − (1/n)|Rm|² g_ij|` over the grid for an Einstein metric.
pub fn einstein_criticality_defect(base: &MetricField, grid: &QuadratureGrid) -> Result<f64> {
    let n = base.dim();
    grid.sup(|x| {
        let b = tensor::curvature(base, x)?;
        let r = b.scalar / n as f64;
        let mut traceless = b.ric.clone();
        axpy_vec(&mut traceless, -r, &b.g);
        let defect = tensor::norm2(&traceless, 2, n, &b.ginv).sqrt();
        if defect > EINSTEIN_TOL {
            return Err(CurvError::NotEinstein { defect });
        }
        let mut e = x_form([&b.ginv, &b.ginv, &b.ginv], &b.rm4, &b.rm4, n);
        axpy_vec(&mut e, -b.norm_rm2 / n as f64, &b.g);
        Ok(tensor::norm2(&e, 2, n, &b.ginv).sqrt())
    })
}

// ---------------------------------------------------------------------------
// Perturbation families and second variation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `g(t) = g + t·h`.
    Raw,
    /// `g(t) = φ(t)(g + t·h)` with the constant `φ(t)` restoring the base volume.
    ConstantRescale,
}

#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    pub base: MetricField,
    pub h: SymTensorField,
    pub normalization: Normalization,
}

impl PerturbationFamily {
    pub fn new(base: MetricField, h: SymTensorField, normalization: Normalization) -> Result<Self> {
        check_dims(&base, &h)?;
        Ok(PerturbationFamily {
            base,
            h,
            normalization,
        })
    }

    /// The rescaling constant `φ(t)` (one for raw families).
    pub fn scale_at(&self, t: f64, grid: &QuadratureGrid) -> Result<f64> {
        match self.normalization {
            Normalization::Raw => Ok(1.0),
            Normalization::ConstantRescale => {
                if t == 0.0 {
                    return Ok(1.0);
                }
                let v0 = volume(&self.base, grid)?;
                let v = volume(&self.base.perturbed(&self.h, t), grid)?;
                Ok((v0 / v).powf(2.0 / self.base.dim() as f64))
            }
        }
    }

    pub fn metric_at(&self, t: f64, grid: &QuadratureGrid) -> Result<MetricField> {
        if t == 0.0 {
            return Ok(self.base.clone());
        }
        let g = self.base.perturbed(&self.h, t);
        Ok(match self.normalization {
            Normalization::Raw => g,
            Normalization::ConstantRescale => g.scaled(self.scale_at(t, grid)?),
        })
    }

    /// `F(g(t))`; the rescaling is applied through the exact scaling law.
    pub fn functional_at(&self, t: f64, grid: &QuadratureGrid, coeff: Coefficients) -> Result<f64> {
        let g = if t == 0.0 {
            self.base.clone()
        } else {
            self.base.perturbed(&self.h, t)
        };
        g.require_integrals()?;
        let v = grid.integrate(2, |x| {
            let b = tensor::curvature(&g, x)?;
            let dv = g.sqrt_det(x)?;
            Ok(vec![dv * coeff.integrand(&b), dv])
        })?;
        match self.normalization {
            Normalization::Raw => Ok(v[0]),
            Normalization::ConstantRescale => {
                let v0 = volume(&self.base, grid)?;
                let n = self.base.dim() as f64;
                Ok((v[1] / v0).powf(-(n - 4.0) / n) * v[0])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondVariation {
    /// Extrapolated `d²F/dt²` at 0.
    pub d2: f64,
    /// Plain second difference at the base step.
    pub d2_coarse: f64,
    /// `|d2 − d2_coarse| / |d2|`.
    pub rel_err_est: f64,
}

/// Second difference of `F(g(t))` over steps `t` and `t/2`, Richardson-extrapolated.
pub fn second_variation_numeric(
    family: &PerturbationFamily,
    grid: &QuadratureGrid,
    coeff: Coefficients,
    t_step: f64,
) -> Result<SecondVariation> {
    if family.normalization != Normalization::ConstantRescale {
        return Err(CurvError::Precondition(
            "second variation needs a volume-normalized family".into(),
        ));
    }
    if !(t_step > 0.0) || !t_step.is_finite() {
        return Err(CurvError::Config(format!(
            "t step must be positive, got {t_step}"
        )));
    }
    let f0 = family.functional_at(0.0, grid, coeff)?;
    let d = |t: f64| -> Result<f64> {
        Ok((family.functional_at(t, grid, coeff)? - 2.0 * f0
            + family.functional_at(-t, grid, coeff)?)
            / (t * t))
    };
    let coarse = d(t_step)?;
    let fine = d(t_step / 2.0)?;
    let d2 = (4.0 * fine - coarse) / 3.0;
    Ok(SecondVariation {
        d2,
        d2_coarse: coarse,
        rel_err_est: (d2 - coarse).abs() / d2.abs().max(f64::MIN_POSITIVE),
    })
}

/// Volume-rescaled second variation rebuilt from a raw family:
/// `F'' − 2αv'F' + (α(α+1)v'² − αv'')F₀` with `α = (n−4)/n`, `v = Vol/Vol₀`.
pub fn second_variation_from_raw(
    base: &MetricField,
    grid: &QuadratureGrid,
    h: &SymTensorField,
    coeff: Coefficients,
    t_step: f64,
) -> Result<f64> {
    let raw = PerturbationFamily::new(base.clone(), h.clone(), Normalization::Raw)?;
    let n = base.dim();
    let f0 = raw.functional_at(0.0, grid, coeff)?;
    let fp = |t: f64| raw.functional_at(t, grid, coeff);
    let d1 = |t: f64| -> Result<f64> { Ok((fp(t)? - fp(-t)?) / (2.0 * t)) };
    let d2 = |t: f64| -> Result<f64> { Ok((fp(t)? - 2.0 * f0 + fp(-t)?) / (t * t)) };
    let f1 = (4.0 * d1(t_step / 2.0)? - d1(t_step)?) / 3.0;
    let f2 = (4.0 * d2(t_step / 2.0)? - d2(t_step)?) / 3.0;
    let v = grid.integrate(3, |x| {
        let g = base.components(x)?;
        let ginv = crate::linalg::inverse_spd(&g, n)
            .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })?;
        let hv = h.components(x)?;
        let tr = dot(&ginv, &hv);
        let hn = tensor::norm2(&hv, 2, n, &ginv);
        let dv = base.sqrt_det(x)?;
        Ok(vec![dv, dv * 0.5 * tr, dv * (0.25 * tr * tr - 0.5 * hn)])
    })?;
    let (v1, v2) = (v[1] / v[0], v[2] / v[0]);
    let a = (n as f64 - 4.0) / n as f64;
    Ok(f2 - 2.0 * a * v1 * f1 + (a * (a + 1.0) * v1 * v1 - a * v2) * f0)
}

/// `∫ (dG/dt)_ij h^ij dV − c ∫|h|² dV` on a critical space form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSecondVariation {
    pub d2: f64,
    pub gprime_pairing: f64,
    pub c: f64,
    pub h_norm2: f64,
}

pub fn second_variation_analytic(
    base: &MetricField,
    grid: &QuadratureGrid,
    h: &SymTensorField,
    coeff: Coefficients,
) -> Result<AnalyticSecondVariation> {
    check_dims(base, h)?;
    base.require_integrals()?;
    if base.curvature().is_none() {
        return Err(CurvError::Precondition(
            "analytic second variation needs a space-form base".into(),
        ));
    }
    let v = grid.integrate(5, |x| {
        let lin = Linearization::at(base, h, x)?;
        let dv = base.sqrt_det(x)?;
        let gp = lin.gradient_variation(coeff);
        Ok(vec![
            dv * dot(&gp, &lin.hup),
            dv * dot(&lin.h, &lin.hup),
            dv * lin.base.lagrange_constant(coeff),
            dv,
            dv * dot(&lin.base.ginv, &lin.h),
        ])
    })?;
    let scale = (v[1] * v[3]).sqrt().max(f64::MIN_POSITIVE);
    if v[4].abs() > UNIT_VOLUME_TOL * scale {
        return Err(CurvError::Precondition(format!(
            "direction changes the volume to first order (∫tr h dV = {:.3e})",
            v[4]
        )));
    }
    let c = v[2] / v[3];
    Ok(AnalyticSecondVariation {
        d2: v[0] - c * v[1],
        gprime_pairing: v[0],
        c,
        h_norm2: v[1],
    })
}

/// The two volume-constraint integrals for a normalized family at `t = 0`:
/// `∫ tr g' dV` and `∫ (g^{ij}g''_ij − |g'|² + ½(tr g')²) dV`.
pub fn volume_constraint_identities(
    family: &PerturbationFamily,
    grid: &QuadratureGrid,
    t_step: f64,
) -> Result<(f64, f64)> {
    let phi = |t: f64| family.scale_at(t, grid);
    let p1 = |t: f64| -> Result<f64> { Ok((phi(t)? - phi(-t)?) / (2.0 * t)) };
    let p2 = |t: f64| -> Result<f64> { Ok((phi(t)? - 2.0 + phi(-t)?) / (t * t)) };
    let dphi = (4.0 * p1(t_step / 2.0)? - p1(t_step)?) / 3.0;
    let ddphi = (4.0 * p2(t_step / 2.0)? - p2(t_step)?) / 3.0;
    let base = &family.base;
    let n = base.dim();
    let v = grid.integrate(2, |x| {
        let g = base.components(x)?;
        let ginv = crate::linalg::inverse_spd(&g, n)
            .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })?;
        let h = family.h.components(x)?;
        // g' = φ'g + h, g'' = φ''g + 2φ'h
        let mut g1 = scaled(&g, dphi);
        axpy_vec(&mut g1, 1.0, &h);
        let mut g2 = scaled(&g, ddphi);
        axpy_vec(&mut g2, 2.0 * dphi, &h);
        let tr1 = dot(&ginv, &g1);
        let dv = base.sqrt_det(x)?;
        Ok(vec![
            dv * tr1,
            dv * (dot(&ginv, &g2) - tensor::norm2(&g1, 2, n, &ginv) + 0.5 * tr1 * tr1),
        ])
    })?;
    Ok((v[0], v[1]))
}

// ---------------------------------------------------------------------------
// Closed-form second variations on space forms

/// Second variation along a TT eigentensor, `−Δ_L h = λ_L h`, on a space form
/// of curvature `λ` (for `λ = 0`, `λ_L` is the eigenvalue of `−Δ`).
pub fn second_variation_tt_predicted(
    n: usize,
    lambda: f64,
    lambda_l: f64,
    coeff: Coefficients,
    h_norm2: f64,
) -> Result<f64> {
    check_inputs(n, &[lambda, lambda_l, h_norm2])?;
    let nf = n as f64;
    if lambda > 0.0 && lambda_l < 4.0 * nf * lambda - 1e-12 {
        return Err(CurvError::Domain(format!(
            "TT eigenvalue {lambda_l} below the spherical bound 4nλ = {}",
            4.0 * nf * lambda
        )));
    }
    if lambda < 0.0 && lambda_l < nf * lambda - 1e-12 {
        return Err(CurvError::Domain(format!(
            "TT eigenvalue {lambda_l} below the hyperbolic bound −n|λ| = {}",
            nf * lambda
        )));
    }
    if lambda == 0.0 && lambda_l < 0.0 {
        return Err(CurvError::Domain(format!(
            "flat Laplace eigenvalue {lambda_l} is negative"
        )));
    }
    let (s, tau) = (coeff.s, coeff.tau);
    let first = lambda_l - 2.0 * (nf - 1.0) * lambda;
    let second =
        (4.0 + s) / 2.0 * lambda_l - lambda * (2.0 * nf + 4.0 + (nf - 1.0) * (2.0 * s + nf * tau));
    Ok(first * second * h_norm2)
}

/// Second variation along `h = f·g` with `−Δf = μf` on a space form of curvature `λ`.
pub fn second_variation_conformal_predicted(
    n: usize,
    lambda: f64,
    mu: f64,
    coeff: Coefficients,
    f_norm2: f64,
) -> Result<f64> {
    check_inputs(n, &[lambda, mu, f_norm2])?;
    let nf = n as f64;
    if lambda > 0.0 && mu < nf * lambda - 1e-12 {
        return Err(CurvError::Domain(format!(
            "Laplace eigenvalue {mu} below the spherical bound nλ = {}",
            nf * lambda
        )));
    }
    if lambda <= 0.0 && !(mu > 0.0) {
        return Err(CurvError::Domain(format!(
            "Laplace eigenvalue {mu} must be positive"
        )));
    }
    let (s, tau) = (coeff.s, coeff.tau);
    let a = (nf * s - 4.0 * tau + 4.0 * nf * tau + 4.0) / 2.0;
    let q = nf * nf * tau + nf * s - nf * tau - s + 2.0;
    Ok((nf - 1.0) * (mu - nf * lambda) * (a * mu + (nf - 4.0) * q * lambda) * f_norm2)
}

fn check_inputs(n: usize, vals: &[f64]) -> Result<()> {
    if n < 3 {
        return Err(CurvError::UnsupportedDimension(n));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(CurvError::Config(
            "non-finite input to a second-variation formula".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Integral identity batteries

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

fn space_form_curvature(base: &MetricField) -> Result<f64> {
    base.curvature()
        .ok_or_else(|| CurvError::Precondition("identity battery needs a space-form base".into()))
}

fn package(lhs: &[f64], rhs: [f64; 10], reference: f64) -> Vec<IdentityCheck> {
    TERM_NAMES
        .iter()
        .zip(lhs.iter().zip(rhs))
        .map(|(name, (&l, r))| IdentityCheck {
            name: name.to_string(),
            lhs: l,
            rhs: r,
            rel_err: (l - r).abs() / r.abs().max(reference).max(f64::MIN_POSITIVE),
        })
        .collect()
}

/// `∫ T'_ij h^ij dV` for each basis tensor against closed forms in
/// `I₀ = ∫|h|²`, `I₁ = ∫⟨h, Δh⟩`, `I₂ = ∫|Δh|²`, for TT `h`.
pub fn tt_identity_suite(
    base: &MetricField,
    h: &SymTensorField,
    grid: &QuadratureGrid,
) -> Result<Vec<IdentityCheck>> {
    check_dims(base, h)?;
    base.require_integrals()?;
    let lambda = space_form_curvature(base)?;
    let (div, tr) = crate::spectral::tt_defect(base, h, grid)?;
    if div > TT_TOL || tr > TT_TOL {
        return Err(CurvError::Precondition(format!(
            "h is not TT (divergence {div:.3e}, trace {tr:.3e})"
        )));
    }
    let n = base.dim();
    let v = grid.integrate(13, |x| {
        let geo = LocalGeometry::at(base, x, GRADIENT_ORDER)?;
        let hj = JTensor::from_data(n, 2, h.jets(x, GRADIENT_ORDER)?);
        let lap = geo.laplacian(&hj).values();
        let lin = Linearization::new(&geo, &hj)?;
        let dv = base.sqrt_det(x)?;
        let mut out: Vec<f64> = lin.pairings().iter().map(|p| dv * p).collect();
        out.push(dv * dot(&lin.h, &lin.hup));
        out.push(dv * dot(&lap, &lin.hup));
        out.push(dv * tensor::norm2(&lap, 2, n, &lin.base.ginv));
        Ok(out)
    })?;
    let (i0, i1, i2) = (v[10], v[11], v[12]);
    let nf = n as f64;
    let l = lambda;
    let rhs = [
        2.0 * (nf + 1.0) * l * l * i0 - 2.0 * l * i1,
        -0.5 * i2 + l * i1,
        0.0,
        l * l * (nf * nf - 1.0) * i0 - l * (nf - 1.0) * i1,
        (nf * nf - nf - 1.0) * l * l * i0 - 0.5 * l * (nf - 2.0) * i1,
        2.0 * l * l * nf * (nf - 1.0) * i0,
        0.0,
        l * l * nf * (nf - 1.0).powi(2) * i0,
        l * l * nf * nf * (nf - 1.0) * i0 - 0.5 * l * nf * (nf - 1.0) * i1,
        l * l * nf * nf * (nf - 1.0).powi(2) * i0,
    ];
    let reference = l * l * nf * nf * i0.abs() + l.abs() * nf * i1.abs() + i2.abs();
    Ok(package(&v[..10], rhs, reference))
}

/// The same battery along `h = f·g`, in `J₀ = ∫f²`, `J₁ = ∫fΔf`, `J₂ = ∫(Δf)²`.
pub fn conformal_identity_suite(
    base: &MetricField,
    f: &ScalarField,
    grid: &QuadratureGrid,
) -> Result<Vec<IdentityCheck>> {
    base.require_integrals()?;
    let lambda = space_form_curvature(base)?;
    let n = base.dim();
    if f.field().dim() != n {
        return Err(CurvError::DimensionMismatch {
            expected: n,
            got: f.field().dim(),
        });
    }
    let v = grid.integrate(13, |x| {
        let geo = LocalGeometry::at(base, x, GRADIENT_ORDER)?;
        let fj = f.jet(x, GRADIENT_ORDER)?;
        let hj = JTensor::from_data(n, 2, geo.g.data.iter().map(|g| g * &fj).collect());
        let fs = JTensor::from_data(n, 0, vec![fj.clone()]);
        let lap_f = geo.laplacian(&fs).data[0].value();
        let lin = Linearization::new(&geo, &hj)?;
        let dv = base.sqrt_det(x)?;
        let fv = fj.value();
        let mut out: Vec<f64> = lin.pairings().iter().map(|p| dv * p).collect();
        out.push(dv * fv * fv);
        out.push(dv * fv * lap_f);
        out.push(dv * lap_f * lap_f);
        Ok(out)
    })?;
    let (j0, j1, j2) = (v[10], v[11], v[12]);
    let nf = n as f64;
    let l = lambda;
    let m1 = nf - 1.0;
    let lap_ric = -m1 * j2 - l * nf * m1 * j1;
    let rm_ric = -l * l * nf * m1 * m1 * j0 - 2.0 * l * m1 * m1 * j1;
    let r_ric = -l * l * nf * nf * m1 * m1 * j0 - 2.0 * l * nf * m1 * m1 * j1;
    let rhs = [
        -2.0 * l * l * nf * m1 * j0 - 4.0 * l * m1 * j1,
        lap_ric,
        lap_ric,
        rm_ric,
        rm_ric,
        -2.0 * l * l * nf * nf * m1 * j0 - 4.0 * l * nf * m1 * j1,
        -nf * m1 * j2 - l * nf * nf * m1 * j1,
        r_ric,
        r_ric,
        -l * l * nf.powi(3) * m1 * m1 * j0 - 2.0 * l * nf * nf * m1 * m1 * j1,
    ];
    let reference = l * l * nf * nf * j0.abs() + l.abs() * nf * j1.abs() + j2.abs();
    Ok(package(&v[..10], rhs, reference))
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Tt,
    Conformal,
}

impl ModeKind {
    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Tt => "tt",
            ModeKind::Conformal => "conformal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub model: String,
    pub mode: ModeKind,
    pub n: usize,
    pub lambda: f64,
    pub s: f64,
    pub tau: f64,
    pub d1_numeric: f64,
    pub d1_analytic: f64,
    pub d2_numeric: f64,
    pub d2_predicted: f64,
    pub rel_err_d1: f64,
    pub rel_err_d2: f64,
    pub c_lagrange: f64,
}

/// A space form, an eigen-direction and the closed-form data to compare against.
#[derive(Debug, Clone)]
pub struct HessianCase {
    pub base: MetricField,
    pub h: SymTensorField,
    pub mode: ModeKind,
    /// `λ_L` for TT modes, `μ` for conformal ones.
    pub eigenvalue: f64,
    /// `∫|h|²` for TT modes, `∫f²` for conformal ones.
    pub norm2: f64,
}

impl HessianCase {
    /// Invariant TT mode `Σ d_i e^i⊗e^i` on the unit Euler-angle `S³`, where `−Δ_L = 12`.
    pub fn s3_invariant(d: [f64; 3]) -> Result<Self> {
        let h = crate::spectral::s3_invariant_tt(d)?;
        Ok(HessianCase {
            base: crate::chart::euler_s3(1.0)?,
            h,
            mode: ModeKind::Tt,
            eigenvalue: 12.0,
            norm2: d.iter().map(|x| x * x).sum::<f64>() * 2.0 * PI * PI,
        })
    }

    /// `A cos(2π k·x)` on the flat unit torus.
    pub fn torus_tt(k: &[i64], a: &[f64]) -> Result<Self> {
        let mode = crate::spectral::TorusTTMode::new(k.to_vec(), a.to_vec())?;
        Ok(HessianCase {
            base: crate::chart::flat_torus(&vec![1.0; k.len()])?,
            h: mode.field(),
            mode: ModeKind::Tt,
            eigenvalue: mode.eigenvalue(),
            norm2: mode.norm2(),
        })
    }

    /// `h = f·g` with `f = cos(2π k·x)` on the flat unit torus.
    pub fn torus_conformal(k: &[i64]) -> Result<Self> {
        if k.iter().all(|&x| x == 0) {
            return Err(CurvError::InvalidMode("conformal mode needs k ≠ 0".into()));
        }
        let base = crate::chart::flat_torus(&vec![1.0; k.len()])?;
        let w: Vec<f64> = k.iter().map(|&x| 2.0 * PI * x as f64).collect();
        let f = ScalarField::from_jets(k.len(), move |c| {
            let mut arg = c[0].constant_like(0.0);
            for (x, wi) in c.iter().zip(&w) {
                arg.axpy(*wi, x);
            }
            arg.cos()
        });
        let k2: i64 = k.iter().map(|x| x * x).sum();
        Ok(HessianCase {
            h: SymTensorField::conformal(&f, &base),
            base,
            mode: ModeKind::Conformal,
            eigenvalue: 4.0 * PI * PI * k2 as f64,
            norm2: 0.5,
        })
    }
}

/// Numeric first and second variations along a case, next to their predictions.
pub fn verify_hessian(
    case: &HessianCase,
    grid: &QuadratureGrid,
    coeff: Coefficients,
    t_step: f64,
) -> Result<VariationReport> {
    let lambda = case
        .base
        .curvature()
        .ok_or_else(|| CurvError::Precondition("Hessian check needs a space-form base".into()))?;
    let n = case.base.dim();
    // one difference instead of two, so a smaller step costs little roundoff
    let d1_numeric = first_variation_numeric(&case.base, grid, &case.h, coeff, 0.1 * t_step)?;
    let d1_analytic = first_variation(&case.base, grid, &case.h, coeff)?;
    let fam = PerturbationFamily::new(
        case.base.clone(),
        case.h.clone(),
        Normalization::ConstantRescale,
    )?;
    let d2 = second_variation_numeric(&fam, grid, coeff, t_step)?;
    let d2_predicted = match case.mode {
        ModeKind::Tt => {
            second_variation_tt_predicted(n, lambda, case.eigenvalue, coeff, case.norm2)?
        }
        ModeKind::Conformal => {
            second_variation_conformal_predicted(n, lambda, case.eigenvalue, coeff, case.norm2)?
        }
    };
    let t = gradient_terms_at(&case.base, &grid.nodes[0])?;
    Ok(VariationReport {
        model: case.base.label().to_string(),
        mode: case.mode,
        n,
        lambda,
        s: coeff.s,
        tau: coeff.tau,
        d1_numeric,
        d1_analytic,
        d2_numeric: d2.d2,
        d2_predicted,
        rel_err_d1: (d1_numeric - d1_analytic).abs() / d1_analytic.abs().max(1.0),
        rel_err_d2: (d2.d2 - d2_predicted).abs() / d2_predicted.abs().max(f64::MIN_POSITIVE),
        c_lagrange: t.lagrange_constant(coeff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{
        build_grid, euler_s3, flat_torus, normalize_volume, perturbed_torus, random_trig_tensor,
        round_sphere, s3_polynomial, s3_random_tensor, ChartDomain, DomainKind, Field,
    };
    use crate::spectral::s3_invariant_tt;

    const ZERO: Coefficients = Coefficients { s: 0.0, tau: 0.0 };

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn max_abs(a: &[f64]) -> f64 {
        a.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Geometry of `g + t·h` with `t` as an extra jet variable; its
    /// `t`-coefficients are exact first variations.
    fn t_geometry(
        base: &MetricField,
        h: &SymTensorField,
        x: &[f64],
        order: usize,
    ) -> LocalGeometry {
        let n = base.dim();
        let g = base.jets_in(x, order, n + 1).unwrap();
        let hj = h.jets_in(x, order, n + 1).unwrap();
        let t = Jet::variable(n + 1, order, n, 0.0);
        let gt = g.iter().zip(&hj).map(|(a, b)| a + &(&t * b)).collect();
        LocalGeometry::from_metric_jets(n, gt).unwrap()
    }

    fn t_coeffs(t: &JTensor) -> Vec<f64> {
        t.data.iter().map(|j| j.d1(t.n)).collect()
    }

    fn cases() -> Vec<(MetricField, SymTensorField, Vec<f64>)> {
        vec![
            (
                perturbed_torus(3, 0.1, 3, 5).unwrap(),
                random_trig_tensor(&[1.0; 3], 0.5, 3, 1, 6),
                vec![0.3, 0.6, 0.15],
            ),
            (
                euler_s3(1.0).unwrap(),
                s3_random_tensor(0.3, 2),
                vec![1.1, 2.0, 3.0],
            ),
            (
                perturbed_torus(4, 0.05, 2, 9).unwrap(),
                random_trig_tensor(&[1.0; 4], 0.5, 2, 1, 10),
                vec![0.2, 0.7, 0.4, 0.9],
            ),
        ]
    }

    #[test]
    fn christoffel_variation_examples() {
        let g = flat_torus(&[1.0, 1.0]).unwrap();
        let h = SymTensorField::from_jets(2, |c| {
            vec![
                c[0].clone(),
                c[0].zero_like(),
                c[0].zero_like(),
                c[0].clone(),
            ]
        });
        let c = christoffel_variation(&g, &h, &[0.3, 0.4]).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-14);

        let s3 = euler_s3(1.0).unwrap();
        let gh = SymTensorField::new(s3.field().clone()).unwrap();
        let c = christoffel_variation(&s3, &gh, &[1.0, 2.0, 3.0]).unwrap();
        assert!(max_abs(&c) < 1e-13);
    }

    #[test]
    fn curvature_variations_match_t_jets_and_differences() {
        for (base, h, x) in cases() {
            let geo = t_geometry(&base, &h, &x, 3);
            let cv = curvature_variations(&base, &h, &x).unwrap();
            let cg = christoffel_variation(&base, &h, &x).unwrap();
            assert!(max_diff(&cg, &t_coeffs(&geo.gamma)) < 1e-10);
            assert!(max_diff(&cv.rm, &t_coeffs(&geo.rm)) < 1e-10);
            assert!(max_diff(&cv.rm13, &t_coeffs(&geo.rm13)) < 1e-10);
            assert!(max_diff(&cv.ric, &t_coeffs(&geo.ric)) < 1e-10);
            assert!((cv.scal - geo.scal.d1(base.dim())).abs() < 1e-10);

            let eps = 1e-3;
            let bp = tensor::curvature(&base.perturbed(&h, eps), &x).unwrap();
            let bm = tensor::curvature(&base.perturbed(&h, -eps), &x).unwrap();
            let fd = |p: &[f64], m: &[f64]| -> Vec<f64> {
                p.iter()
                    .zip(m)
                    .map(|(a, b)| (a - b) / (2.0 * eps))
                    .collect()
            };
            let rel = |a: &[f64], b: &[f64]| max_diff(a, b) / max_abs(b).max(1.0);
            assert!(rel(&cg, &fd(&bp.gamma, &bm.gamma)) < 1e-5);
            assert!(rel(&cv.rm, &fd(&bp.rm4, &bm.rm4)) < 1e-4);
            assert!(rel(&cv.ric, &fd(&bp.ric, &bm.ric)) < 1e-4);
            assert!(
                (cv.scal - (bp.scalar - bm.scalar) / (2.0 * eps)).abs()
                    < 1e-4 * cv.scal.abs().max(1.0)
            );
        }
    }

    #[test]
    fn conformal_scalar_variation_on_flat_space() {
        let g = flat_torus(&[1.0; 3]).unwrap();
        let f = ScalarField::from_jets(3, |c| {
            (&c[0] * (2.0 * PI)).sin() * (&c[1] * (2.0 * PI)).cos()
        });
        let h = SymTensorField::conformal(&f, &g);
        let x = [0.1, 0.35, 0.8];
        let cv = curvature_variations(&g, &h, &x).unwrap();
        // Δf = −8π² f
        let lap = -8.0 * PI * PI * f.value(&x).unwrap();
        assert!((cv.scal + 2.0 * lap).abs() < 1e-10);
    }

    #[test]
    fn tt_scalar_variation_vanishes_on_s3() {
        let g = euler_s3(1.0).unwrap();
        let h = s3_invariant_tt([2.0, -1.0, -1.0]).unwrap();
        for x in [[0.7, 1.0, 2.0], [2.0, 5.0, 0.3]] {
            assert!(curvature_variations(&g, &h, &x).unwrap().scal.abs() < 1e-12);
        }
    }

    #[test]
    fn ricci_derivative_variation_on_space_form() {
        let g = euler_s3(1.0).unwrap();
        let h = s3_random_tensor(0.4, 3);
        let x = [1.2, 0.4, 2.2];
        let lin = Linearization::at(&g, &h, &x).unwrap();
        let geo = LocalGeometry::at(&g, &x, GRADIENT_ORDER).unwrap();
        let hj = JTensor::from_data(3, 2, h.jets(&x, GRADIENT_ORDER).unwrap());
        let cj = CurvatureJets::new(&geo, &hj);
        let want: Vec<f64> = geo
            .covariant_derivative(&cj.ric)
            .values()
            .iter()
            .zip(cj.dh.values())
            .map(|(a, b)| a - 2.0 * b)
            .collect();
        assert!(max_diff(&lin.dric, &want) < 1e-10);
    }

    #[test]
    fn gradient_on_space_forms() {
        let t = flat_torus(&[1.0; 3]).unwrap();
        let gt = gradient_tensor(&t, &[0.2, 0.3, 0.4], Coefficients { s: 1.0, tau: 1.0 }).unwrap();
        assert_eq!(max_abs(&gt.total), 0.0);

        for (n, coeff) in [
            (3, ZERO),
            (4, Coefficients { s: 1.5, tau: -0.3 }),
            (5, Coefficients { s: -0.7, tau: 0.4 }),
        ] {
            let g = round_sphere(n, 1.0).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.9 + 0.3 * i as f64).collect();
            let terms = gradient_terms_at(&g, &x).unwrap();
            let grad = terms.gradient(coeff);
            let nf = n as f64;
            let c = (nf - 4.0)
                * (nf - 1.0)
                * (2.0 + coeff.s * (nf - 1.0) + coeff.tau * nf * (nf - 1.0))
                / 2.0;
            let want = scaled(&terms.g, c);
            assert!(max_diff(&grad, &want) < 1e-9, "n = {n}");
            assert!((terms.lagrange_constant(coeff) - c).abs() < 1e-9);
            assert!(max_abs(&terms.euler_lagrange(coeff)) < 1e-9);
            if n == 3 {
                assert!((c + 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradient_needs_fourth_derivatives() {
        let g = euler_s3(1.0).unwrap().finite_difference(1e-3);
        let short =
            MetricField::new(g.domain().clone(), g.field().to_sampled(1e-3, 2), "short").unwrap();
        assert!(matches!(
            gradient_tensor(&short, &[1.0, 1.0, 1.0], ZERO),
            Err(CurvError::Config(_))
        ));
    }

    #[test]
    fn traced_euler_lagrange_matches_gradient() {
        let g = perturbed_torus(4, 0.08, 3, 17).unwrap();
        let coeff = Coefficients { s: 0.6, tau: -1.1 };
        let t = gradient_terms_at(&g, &[0.1, 0.5, 0.2, 0.7]).unwrap();
        let grad = t.gradient(coeff);
        let c = t.lagrange_constant(coeff);
        assert!((dot(&t.ginv, &grad) / 4.0 - c).abs() < 1e-9 * c.abs().max(1.0));
        let mut traceless = grad.clone();
        axpy_vec(&mut traceless, -c, &t.g);
        assert!(max_diff(&traceless, &t.euler_lagrange(coeff)) < 1e-9 * max_abs(&grad).max(1.0));
    }

    #[test]
    fn term_variations_match_differences() {
        for (base, h, x) in cases() {
            let lin = Linearization::at(&base, &h, &x).unwrap();
            let diff = |eps: f64| -> Vec<Vec<f64>> {
                let tp = gradient_terms_at(&base.perturbed(&h, eps), &x).unwrap();
                let tm = gradient_terms_at(&base.perturbed(&h, -eps), &x).unwrap();
                (0..10)
                    .map(|i| {
                        tp.basis[i]
                            .iter()
                            .zip(&tm.basis[i])
                            .map(|(a, b)| (a - b) / (2.0 * eps))
                            .collect()
                    })
                    .collect()
            };
            let (coarse, fine) = (diff(2e-3), diff(1e-3));
            for i in 0..10 {
                let fd: Vec<f64> = coarse[i]
                    .iter()
                    .zip(&fine[i])
                    .map(|(c, f)| (4.0 * f - c) / 3.0)
                    .collect();
                let err = max_diff(&lin.terms[i], &fd) / max_abs(&fd).max(1.0);
                assert!(err < 1e-6, "term {i} ({}) off by {err:.3e}", TERM_NAMES[i]);
            }
        }
    }

    #[test]
    fn tt_battery_on_invariant_mode() {
        let g = euler_s3(1.0).unwrap();
        let h = s3_invariant_tt([2.0, -1.0, -1.0]).unwrap();
        let grid = build_grid(g.domain(), &[12, 8, 8]).unwrap();
        let checks = tt_identity_suite(&g, &h, &grid).unwrap();
        assert!((checks[0].lhs - 120.0 * 2.0 * PI * PI).abs() < 1e-4 * 2368.7);
        for c in &checks {
            assert!(c.rel_err < 1e-6, "{} lhs {} rhs {}", c.name, c.lhs, c.rhs);
        }
    }

    #[test]
    fn tt_battery_rejects_non_tt() {
        let g = euler_s3(1.0).unwrap();
        let grid = build_grid(g.domain(), &[8, 6, 6]).unwrap();
        assert!(matches!(
            tt_identity_suite(&g, &s3_random_tensor(0.3, 1), &grid),
            Err(CurvError::Precondition(_))
        ));
    }

    #[test]
    fn conformal_battery_on_s3() {
        let g = euler_s3(1.0).unwrap();
        let f = s3_polynomial(vec![
            (1.0, [1, 1, 0, 0]),
            (0.5, [0, 0, 1, 0]),
            (-0.3, [0, 0, 2, 0]),
        ]);
        let grid = build_grid(g.domain(), &[14, 10, 10]).unwrap();
        for c in conformal_identity_suite(&g, &f, &grid).unwrap() {
            assert!(c.rel_err < 1e-6, "{} lhs {} rhs {}", c.name, c.lhs, c.rhs);
        }
    }

    #[test]
    fn first_variation_matches_differences() {
        let coeff = Coefficients { s: 0.5, tau: 0.25 };
        let g = perturbed_torus(3, 0.1, 2, 31).unwrap();
        let grid = build_grid(g.domain(), &[6, 6, 6]).unwrap();
        let h = random_trig_tensor(&[1.0; 3], 0.4, 2, 1, 32);
        let a = first_variation(&g, &grid, &h, coeff).unwrap();
        let b = first_variation_numeric(&g, &grid, &h, coeff, DEFAULT_T_STEP).unwrap();
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");

        let flat = flat_torus(&[1.0; 3]).unwrap();
        assert!(first_variation(&flat, &grid, &h, coeff).unwrap().abs() < 1e-9);
    }

    #[test]
    fn el_residual_on_unit_volume_spheres() {
        let coeff = Coefficients { s: 0.8, tau: -0.6 };
        let s4 = round_sphere(4, 1.0).unwrap();
        let grid = build_grid(s4.domain(), &[4, 4, 4, 5]).unwrap();
        assert!(matches!(
            el_residual(&s4, &grid, coeff),
            Err(CurvError::Precondition(_))
        ));
        let (u, _) = normalize_volume(&s4, &grid).unwrap();
        let r = el_residual(&u, &grid, coeff).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(r.c.abs() < 1e-9);

        let s3 = euler_s3(1.0).unwrap();
        let grid = build_grid(s3.domain(), &[6, 6, 6]).unwrap();
        let (u, _) = normalize_volume(&s3, &grid).unwrap();
        let r = el_residual(&u, &grid, ZERO).unwrap();
        let lambda = u.curvature().unwrap();
        assert!(r.residual < 1e-6, "{r:?} {lambda}");
        assert!((r.c - (-2.0 * lambda * lambda)).abs() < 1e-8);
        let mid = &grid.nodes[grid.nodes.len() / 2];
        let gt = gradient_tensor(&u, mid, ZERO).unwrap();
        let g0 = u.components(mid).unwrap();
        assert!(
            (gt.total[0] / g0[0] - r.c).abs() < 1e-8,
            "{} {}",
            gt.total[0] / g0[0],
            r.c
        );
    }

    #[test]
    fn einstein_criticality() {
        let s = round_sphere(4, 1.3).unwrap();
        let grid = build_grid(s.domain(), &[4, 4, 4, 4]).unwrap();
        assert!(einstein_criticality_defect(&s, &grid).unwrap() < 1e-8);
        let t = flat_torus(&[1.0; 3]).unwrap();
        let grid = build_grid(t.domain(), &[4, 4, 4]).unwrap();
        assert_eq!(einstein_criticality_defect(&t, &grid).unwrap(), 0.0);

        let domain = ChartDomain::new(
            vec![(0.0, PI), (0.0, 2.0 * PI), (0.0, PI), (0.0, 2.0 * PI)],
            vec![false, true, false, true],
            DomainKind::SphereAngular,
        )
        .unwrap();
        let field = Field::analytic(4, 16, |c| {
            let mut g = vec![c[0].constant_like(0.0); 16];
            g[0] = c[0].constant_like(1.0);
            g[5] = c[0].sin().powi(2);
            g[10] = c[0].constant_like(1.0);
            g[15] = c[2].sin().powi(2);
            g
        });
        let prod = MetricField::new(domain, field, "s2xs2").unwrap();
        let grid = build_grid(prod.domain(), &[4, 4, 4, 4]).unwrap();
        assert!(einstein_criticality_defect(&prod, &grid).unwrap() < 1e-7);
        let p = perturbed_torus(3, 0.1, 2, 3).unwrap();
        let grid = build_grid(p.domain(), &[4, 4, 4]).unwrap();
        assert!(matches!(
            einstein_criticality_defect(&p, &grid),
            Err(CurvError::NotEinstein { .. })
        ));
    }

    #[test]
    fn predicted_values() {
        let v = second_variation_tt_predicted(3, 1.0, 12.0, ZERO, 6.0 * 2.0 * PI * PI).unwrap();
        assert!((v - 13264.8).abs() < 0.1);
        let s = Coefficients { s: -4.0, tau: 0.7 };
        assert_eq!(
            second_variation_tt_predicted(5, 0.0, 3.0, s, 2.0).unwrap(),
            0.0
        );
        assert_eq!(
            second_variation_tt_predicted(4, 1.0, 6.0 + 10.0, ZERO, 1.0).unwrap(),
            10.0 * (2.0 * 16.0 - 12.0)
        );
        assert!(matches!(
            second_variation_tt_predicted(3, 1.0, 11.0, ZERO, 1.0),
            Err(CurvError::Domain(_))
        ));
        assert!(matches!(
            second_variation_tt_predicted(3, -1.0, -3.5, ZERO, 1.0),
            Err(CurvError::Domain(_))
        ));
        assert!(second_variation_tt_predicted(3, -1.0, -3.0, ZERO, 1.0).is_ok());

        let mu = 4.0 * PI * PI;
        let v = second_variation_conformal_predicted(3, 0.0, mu, ZERO, 0.5).unwrap();
        assert!((v - 3117.09).abs() < 0.01);
        assert_eq!(
            second_variation_conformal_predicted(4, 1.0, 4.0, ZERO, 1.0).unwrap(),
            0.0
        );
        // s·n + 4(n−1)τ + 4 = 0
        let edge = Coefficients { s: -4.0, tau: 1.0 };
        assert!(
            second_variation_conformal_predicted(3, 0.0, 7.0, edge, 1.0)
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(matches!(
            second_variation_conformal_predicted(3, 1.0, 2.0, ZERO, 1.0),
            Err(CurvError::Domain(_))
        ));
        // f = X1 X2 on S³: μ = 8
        let p1 = second_variation_conformal_predicted(3, 1.0, 8.0, ZERO, 1.0).unwrap();
        assert!((p1 - 140.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_tt_second_variation() {
        let g = euler_s3(1.0).unwrap();
        let h = s3_invariant_tt([2.0, -1.0, -1.0]).unwrap();
        let grid = build_grid(g.domain(), &[12, 8, 8]).unwrap();
        let fam =
            PerturbationFamily::new(g.clone(), h.clone(), Normalization::ConstantRescale).unwrap();
        let num = second_variation_numeric(&fam, &grid, ZERO, DEFAULT_T_STEP).unwrap();
        assert!((num.d2 - 13264.8).abs() < 0.01 * 13264.8, "{num:?}");
        let an = second_variation_analytic(&g, &grid, &h, ZERO).unwrap();
        assert!((an.d2 - num.d2).abs() < 0.01 * num.d2.abs());
        assert!((an.c + 2.0).abs() < 1e-6, "{an:?}");
        let raw = second_variation_from_raw(&g, &grid, &h, ZERO, DEFAULT_T_STEP).unwrap();
        assert!((raw - num.d2).abs() < 1e-3 * num.d2.abs());

        for (coeff, positive) in [
            (ZERO, true),
            (Coefficients { s: 2.0, tau: 0.5 }, true),
            (Coefficients { s: -6.0, tau: 2.0 }, false),
        ] {
            let d2 = second_variation_numeric(&fam, &grid, coeff, DEFAULT_T_STEP)
                .unwrap()
                .d2;
            assert_eq!(d2 > 0.0, positive, "{coeff:?}: {d2}");
        }
        let raw_fam = PerturbationFamily::new(g, h, Normalization::Raw).unwrap();
        assert!(matches!(
            second_variation_numeric(&raw_fam, &grid, ZERO, DEFAULT_T_STEP),
            Err(CurvError::Precondition(_))
        ));
    }

    #[test]
    fn volume_constraints_along_rescaled_family() {
        let g = euler_s3(1.0).unwrap();
        let h = s3_random_tensor(0.3, 8);
        let grid = build_grid(g.domain(), &[10, 8, 8]).unwrap();
        let fam = PerturbationFamily::new(g.clone(), h, Normalization::ConstantRescale).unwrap();
        let v0 = volume(&g, &grid).unwrap();
        for t in [0.05, -0.1] {
            let vt = volume(&fam.metric_at(t, &grid).unwrap(), &grid).unwrap();
            assert!((vt - v0).abs() < 1e-10 * v0);
        }
        let (first, second) = volume_constraint_identities(&fam, &grid, 2e-3).unwrap();
        assert!(first.abs() < 1e-8, "{first}");
        assert!(second.abs() < 1e-6, "{second}");
    }

    #[test]
    fn hessian_cases_on_flat_torus() {
        let tt = HessianCase::torus_tt(&[1, 0, 0], &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0])
            .unwrap();
        let grid = build_grid(tt.base.domain(), &[8, 4, 4]).unwrap();
        let want = 2.0 * (2.0 * PI).powi(4);
        let r = verify_hessian(&tt, &grid, ZERO, DEFAULT_T_STEP).unwrap();
        assert!((r.d2_predicted - want).abs() < 1e-9 * want);
        assert!(r.rel_err_d2 < 0.01 && r.rel_err_d1 < 1e-4, "{r:?}");
        for (s, positive) in [(-3.5, true), (-4.5, false)] {
            let r =
                verify_hessian(&tt, &grid, Coefficients { s, tau: 0.3 }, DEFAULT_T_STEP).unwrap();
            assert_eq!(r.d2_numeric > 0.0, positive, "{r:?}");
            assert!(r.rel_err_d2 < 0.01, "{r:?}");
        }

        let conf = HessianCase::torus_conformal(&[1, 0, 0]).unwrap();
        let r = verify_hessian(&conf, &grid, ZERO, DEFAULT_T_STEP).unwrap();
        assert!((r.d2_predicted - want).abs() < 1e-9 * want);
        assert!(r.rel_err_d2 < 0.01 && r.rel_err_d1 < 1e-4, "{r:?}");
        assert!(HessianCase::torus_conformal(&[0, 0, 0]).is_err());

        let s3 = HessianCase::s3_invariant([2.0, -1.0, -1.0]).unwrap();
        assert!((s3.norm2 - 12.0 * PI * PI).abs() < 1e-12);
    }
}
