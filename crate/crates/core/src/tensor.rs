//! Pointwise Riemannian tensor algebra.
//!
//! Conventions (all indices lowered unless stated):
//! - `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)`
//! - `R^q_bcd = ∂_c Γ^q_db − ∂_d Γ^q_cb + Γ^q_cp Γ^p_db − Γ^q_dp Γ^p_cb`
//! - `R_abcd = g_aq R^q_bcd`, so a space form has `R_abcd = λ(g_ac g_bd − g_ad g_bc)`
//! - `R_bd = R^a_bad`, `R = g^{bd} R_bd`
//! - covariant derivatives append their index: `(∇∇T)_{…cd} = ∇_d ∇_c T_…`
//! - `Δ = g^{kl}∇_l∇_k`, with non-positive spectrum
//!
//! Tensors are flat row-major vectors of `n^rank` components.

use serde::{Deserialize, Serialize};

use crate::chart::{MetricField, OneFormField, SymTensorField};
use crate::error::{CurvError, Result};
use crate::jet::Jet;
use crate::linalg;

/// Tolerance on `|Ric − (R/n) g|` for treating a metric as Einstein.
pub const EINSTEIN_TOL: f64 = 1e-6;

/// A tensor whose components are jets.
#[derive(Clone, Debug)]
pub struct JTensor {
    pub n: usize,
    pub rank: usize,
    pub data: Vec<Jet>,
}

impl JTensor {
    pub fn zeros(n: usize, rank: usize, like: &Jet) -> Self {
        JTensor {
            n,
            rank,
            data: vec![like.zero_like(); n.pow(rank as u32)],
        }
    }

    pub fn from_data(n: usize, rank: usize, data: Vec<Jet>) -> Self {
        assert_eq!(data.len(), n.pow(rank as u32), "tensor component count");
        JTensor { n, rank, data }
    }

    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn add(&self, other: &JTensor) -> JTensor {
        JTensor {
            n: self.n,
            rank: self.rank,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &JTensor) -> JTensor {
        JTensor {
            n: self.n,
            rank: self.rank,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> JTensor {
        JTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> JTensor {
        JTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|a| a.truncate(order)).collect(),
        }
    }
}

/// Decomposes a flat index into its multi-index.
pub(crate) fn unflatten(mut k: usize, n: usize, rank: usize, out: &mut [usize]) {
    for s in (0..rank).rev() {
        out[s] = k % n;
        k /= n;
    }
}

pub(crate) fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Metric, connection and curvature as jets around one point.
///
/// Built from metric jets of order `K`: `Γ` has order `K − 1`, curvature
/// `K − 2`. The jets may carry extra trailing variables (for instance a
/// variation parameter); only the first `n` are differentiated.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub n: usize,
    pub g: JTensor,
    pub ginv: JTensor,
    /// `Γ^k_ij` stored at `(k, i, j)`.
    pub gamma: JTensor,
    /// `R^q_bcd` stored at `(q, b, c, d)`.
    pub rm13: JTensor,
    pub rm: JTensor,
    pub ric: JTensor,
    pub scal: Jet,
}

impl LocalGeometry {
    /// Geometry of `field` at `x` from metric jets of the given order (≥ 2).
    pub fn at(field: &MetricField, x: &[f64], order: usize) -> Result<Self> {
        let g = field.jets(x, order)?;
        Self::from_metric_jets(field.dim(), g).map_err(|e| match e {
            CurvError::NotPositiveDefinite { .. } => {
                CurvError::NotPositiveDefinite { point: x.to_vec() }
            }
            e => e,
        })
    }

    pub fn from_metric_jets(n: usize, g: Vec<Jet>) -> Result<Self> {
        let gv: Vec<f64> = g.iter().map(Jet::value).collect();
        if linalg::cholesky(&gv, n).is_none() {
            return Err(CurvError::NotPositiveDefinite { point: vec![] });
        }
        assert!(
            g[0].order() >= 2,
            "curvature needs second derivatives of the metric"
        );
        let ginv = linalg::inverse_jets(&g, n);
        let g = JTensor::from_data(n, 2, g);
        let ginv = JTensor::from_data(n, 2, ginv);
        let like = g.data[0].derivative(0);

        // ∂_k g_ij at (i, j, k)
        let mut dg = JTensor::zeros(n, 3, &like);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    dg.data[(i * n + j) * n + k] = g.data[i * n + j].derivative(k);
                }
            }
        }
        // Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij), then raise l
        let mut low = JTensor::zeros(n, 3, &like);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let v = &(&dg.data[(j * n + l) * n + i] + &dg.data[(i * n + l) * n + j])
                        - &dg.data[(i * n + j) * n + l];
                    low.data[(l * n + i) * n + j] = v * 0.5;
                }
            }
        }
        let mut gamma = JTensor::zeros(n, 3, &like);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let slot = &mut gamma.data[(k * n + i) * n + j];
                    for l in 0..n {
                        slot.fma_assign(&ginv.data[k * n + l], &low.data[(l * n + i) * n + j]);
                    }
                }
            }
        }

        let like2 = like.derivative(0);
        let mut dgamma = vec![like2.zero_like(); n * n * n * n]; // ∂_c Γ^q_db at (q, d, b, c)
        for q in 0..n {
            for d in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        dgamma[((q * n + d) * n + b) * n + c] =
                            gamma.data[(q * n + d) * n + b].derivative(c);
                    }
                }
            }
        }
        let mut rm13 = JTensor::zeros(n, 4, &like2);
        for q in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut v = &dgamma[((q * n + d) * n + b) * n + c]
                            - &dgamma[((q * n + c) * n + b) * n + d];
                        for p in 0..n {
                            v.fma_assign(
                                &gamma.data[(q * n + c) * n + p],
                                &gamma.data[(p * n + d) * n + b],
                            );
                            v.fnma_assign(
                                &gamma.data[(q * n + d) * n + p],
                                &gamma.data[(p * n + c) * n + b],
                            );
                        }
                        rm13.data[((q * n + b) * n + c) * n + d] = v;
                    }
                }
            }
        }
        let mut rm = JTensor::zeros(n, 4, &like2);
        for a in 0..n {
            for rest in 0..n * n * n {
                let slot = &mut rm.data[a * n * n * n + rest];
                for q in 0..n {
                    slot.fma_assign(&g.data[a * n + q], &rm13.data[q * n * n * n + rest]);
                }
            }
        }
        let mut ric = JTensor::zeros(n, 2, &like2);
        for b in 0..n {
            for d in 0..n {
                let mut v = like2.zero_like();
                for a in 0..n {
                    v += &rm13.data[((a * n + b) * n + a) * n + d];
                }
                ric.data[b * n + d] = v;
            }
        }
        // symmetrize Ricci against rounding
        for b in 0..n {
            for d in 0..b {
                let avg = (&ric.data[b * n + d] + &ric.data[d * n + b]) * 0.5;
                ric.data[b * n + d] = avg.clone();
                ric.data[d * n + b] = avg;
            }
        }
        let mut scal = like2.zero_like();
        for b in 0..n {
            for d in 0..n {
                scal.fma_assign(&ginv.data[b * n + d], &ric.data[b * n + d]);
            }
        }
        Ok(LocalGeometry {
            n,
            g,
            ginv,
            gamma,
            rm13,
            rm,
            ric,
            scal,
        })
    }

    /// `∇T` with the derivative index appended.
    pub fn covariant_derivative(&self, t: &JTensor) -> JTensor {
        let n = self.n;
        let rank = t.rank;
        let like = t.data[0].derivative(0);
        let mut out = JTensor::zeros(n, rank + 1, &like);
        let mut idx = vec![0usize; rank];
        let mut swapped = vec![0usize; rank];
        for k in 0..t.data.len() {
            unflatten(k, n, rank, &mut idx);
            for m in 0..n {
                let mut v = t.data[k].derivative(m);
                for s in 0..rank {
                    swapped.copy_from_slice(&idx);
                    for p in 0..n {
                        swapped[s] = p;
                        v.fnma_assign(
                            &self.gamma.data[(p * n + m) * n + idx[s]],
                            &t.data[flatten(&swapped, n)],
                        );
                    }
                }
                out.data[k * n + m] = v;
            }
        }
        out
    }

    /// `g^{kl} T_{…kl}` over the last two slots.
    pub fn trace_last_two(&self, t: &JTensor) -> JTensor {
        let n = self.n;
        let like = &t.data[0];
        let mut out = JTensor::zeros(n, t.rank - 2, like);
        for (k, slot) in out.data.iter_mut().enumerate() {
            for a in 0..n {
                for b in 0..n {
                    slot.fma_assign(&self.ginv.data[a * n + b], &t.data[(k * n + a) * n + b]);
                }
            }
        }
        out
    }

    /// Rough Laplacian of a covariant tensor.
    pub fn laplacian(&self, t: &JTensor) -> JTensor {
        let d2 = self.covariant_derivative(&self.covariant_derivative(t));
        self.trace_last_two(&d2)
    }

    /// Raises the given index of a covariant tensor.
    pub fn raise(&self, t: &JTensor, slot: usize) -> JTensor {
        let n = self.n;
        let mut out = JTensor::zeros(n, t.rank, &t.data[0]);
        let mut idx = vec![0usize; t.rank];
        for k in 0..t.data.len() {
            unflatten(k, n, t.rank, &mut idx);
            let a = idx[slot];
            for p in 0..n {
                idx[slot] = p;
                out.data[k].fma_assign(&self.ginv.data[a * n + p], &t.data[flatten(&idx, n)]);
            }
        }
        out
    }

    /// Full contraction `⟨A, B⟩ = A_I B^I` of two covariant tensors of equal rank.
    pub fn inner(&self, a: &JTensor, b: &JTensor) -> Jet {
        let mut up = b.clone();
        for s in 0..b.rank {
            up = self.raise(&up, s);
        }
        let mut v = a.data[0].zero_like();
        for (x, y) in a.data.iter().zip(&up.data) {
            v.fma_assign(x, y);
        }
        v
    }

    /// `Ric − (R/n) g` sup norm at the base point.
    pub fn einstein_defect(&self) -> f64 {
        let n = self.n;
        let r = self.scal.value() / n as f64;
        (0..n * n)
            .map(|k| (self.ric.data[k].value() - r * self.g.data[k].value()).abs())
            .fold(0.0, f64::max)
    }
}

/// Pointwise curvature data at a chart point.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub n: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    /// `Γ^k_ij` at `(k, i, j)`.
    pub gamma: Vec<f64>,
    /// `R^l_ijk`.
    pub rm13: Vec<f64>,
    /// `R_lijk`.
    pub rm4: Vec<f64>,
    pub ric: Vec<f64>,
    pub scalar: f64,
    /// Weyl tensor, identically zero for `n ≤ 3`.
    pub weyl: Vec<f64>,
    pub norm_rm2: f64,
    pub norm_ric2: f64,
    pub norm_weyl2: f64,
}

/// Full curvature data of `field` at `x`.
pub fn curvature(field: &MetricField, x: &[f64]) -> Result<CurvatureBundle> {
    let g = field.jets(x, 2)?;
    bundle_from_metric_jets(field.dim(), &g)
        .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })
}

/// Curvature from the second-order jets of the metric, in plain floating point.
pub fn bundle_from_metric_jets(n: usize, gj: &[Jet]) -> Option<CurvatureBundle> {
    let n2 = n * n;
    let n3 = n2 * n;
    let g: Vec<f64> = gj.iter().map(Jet::value).collect();
    let ginv = linalg::inverse_spd(&g, n)?;
    // dg[(i j) k] = ∂_k g_ij, ddg[((i j) k) l] = ∂_k ∂_l g_ij
    let mut dg = vec![0.0; n3];
    let mut ddg = vec![0.0; n3 * n];
    for ij in 0..n2 {
        for k in 0..n {
            dg[ij * n + k] = gj[ij].d1(k);
            for l in 0..n {
                ddg[(ij * n + k) * n + l] = gj[ij].d2(k, l);
            }
        }
    }
    // Γ_{l,ij} and ∂_c Γ_{l,ij}
    let mut low = vec![0.0; n3];
    let mut dlow = vec![0.0; n3 * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                let o = (l * n + i) * n + j;
                low[o] = 0.5
                    * (dg[(j * n + l) * n + i] + dg[(i * n + l) * n + j] - dg[(i * n + j) * n + l]);
                for c in 0..n {
                    dlow[o * n + c] = 0.5
                        * (ddg[((j * n + l) * n + i) * n + c] + ddg[((i * n + l) * n + j) * n + c]
                            - ddg[((i * n + j) * n + l) * n + c]);
                }
            }
        }
    }
    let mut gamma = vec![0.0; n3];
    for k in 0..n {
        for ij in 0..n2 {
            gamma[k * n2 + ij] = (0..n).map(|l| ginv[k * n + l] * low[l * n2 + ij]).sum();
        }
    }
    // ∂_c Γ^k_ij = g^{kl} ∂_c Γ_{l,ij} − g^{ka} ∂_c g_ab Γ^b_ij
    let mut dgamma = vec![0.0; n3 * n];
    for k in 0..n {
        for ij in 0..n2 {
            for c in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += ginv[k * n + l] * dlow[(l * n2 + ij) * n + c];
                    let mut t = 0.0;
                    for b in 0..n {
                        t += dg[(l * n + b) * n + c] * gamma[b * n2 + ij];
                    }
                    v -= ginv[k * n + l] * t;
                }
                dgamma[(k * n2 + ij) * n + c] = v;
            }
        }
    }
    let dgam = |q: usize, d: usize, b: usize, c: usize| dgamma[((q * n + d) * n + b) * n + c];
    let gam = |q: usize, i: usize, j: usize| gamma[(q * n + i) * n + j];
    let mut rm13 = vec![0.0; n2 * n2];
    for q in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut v = dgam(q, d, b, c) - dgam(q, c, b, d);
                    for p in 0..n {
                        v += gam(q, c, p) * gam(p, d, b) - gam(q, d, p) * gam(p, c, b);
                    }
                    rm13[((q * n + b) * n + c) * n + d] = v;
                }
            }
        }
    }
    let mut rm4 = vec![0.0; n2 * n2];
    for a in 0..n {
        for rest in 0..n3 {
            rm4[a * n3 + rest] = (0..n).map(|q| g[a * n + q] * rm13[q * n3 + rest]).sum();
        }
    }
    let mut ric = vec![0.0; n2];
    for b in 0..n {
        for d in 0..n {
            ric[b * n + d] = (0..n).map(|a| rm13[((a * n + b) * n + a) * n + d]).sum();
        }
    }
    for b in 0..n {
        for d in 0..b {
            let avg = 0.5 * (ric[b * n + d] + ric[d * n + b]);
            ric[b * n + d] = avg;
            ric[d * n + b] = avg;
        }
    }
    let scalar: f64 = ginv.iter().zip(&ric).map(|(a, b)| a * b).sum();
    let norm_rm2 = norm2(&rm4, 4, n, &ginv);
    let norm_ric2 = norm2(&ric, 2, n, &ginv);
    let weyl = if n >= 4 {
        weyl_from_parts(&rm4, &ric, scalar, &g, n)
    } else {
        vec![0.0; n2 * n2]
    };
    let norm_weyl2 = if n >= 4 {
        norm2(&weyl, 4, n, &ginv)
    } else {
        0.0
    };
    Some(CurvatureBundle {
        n,
        g,
        ginv,
        gamma,
        rm13,
        rm4,
        ric,
        scalar,
        weyl,
        norm_rm2,
        norm_ric2,
        norm_weyl2,
    })
}

pub fn bundle_from_geometry(geo: &LocalGeometry) -> CurvatureBundle {
    let n = geo.n;
    let g = geo.g.values();
    let ginv = geo.ginv.values();
    let rm4 = geo.rm.values();
    let ric = geo.ric.values();
    let scalar = geo.scal.value();
    let norm_rm2 = norm2(&rm4, 4, n, &ginv);
    let norm_ric2 = norm2(&ric, 2, n, &ginv);
    let weyl = if n >= 4 {
        weyl_from_parts(&rm4, &ric, scalar, &g, n)
    } else {
        vec![0.0; n.pow(4)]
    };
    let norm_weyl2 = if n >= 4 {
        norm2(&weyl, 4, n, &ginv)
    } else {
        0.0
    };
    CurvatureBundle {
        n,
        gamma: geo.gamma.values(),
        rm13: geo.rm13.values(),
        g,
        ginv,
        rm4,
        ric,
        scalar,
        weyl,
        norm_rm2,
        norm_ric2,
        norm_weyl2,
    }
}

/// Raises every index of a covariant tensor with `ginv`.
pub fn raise_all(t: &[f64], rank: usize, n: usize, ginv: &[f64]) -> Vec<f64> {
    let mut cur = t.to_vec();
    let mut next = vec![0.0; cur.len()];
    for s in 0..rank {
        // view as [outer][a][inner] with `a` the slot being raised
        let inner = n.pow((rank - 1 - s) as u32);
        let outer = cur.len() / (n * inner);
        for o in 0..outer {
            for a in 0..n {
                for i in 0..inner {
                    let mut v = 0.0;
                    for p in 0..n {
                        v += ginv[a * n + p] * cur[(o * n + p) * inner + i];
                    }
                    next[(o * n + a) * inner + i] = v;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `|T|²` of a covariant tensor.
pub fn norm2(t: &[f64], rank: usize, n: usize, ginv: &[f64]) -> f64 {
    let up = raise_all(t, rank, n, ginv);
    t.iter().zip(&up).map(|(a, b)| a * b).sum()
}

/// `(A⊙B)_ijkl = A_ik B_jl + A_jl B_ik − A_il B_jk − A_jk B_il`.
pub fn kulkarni_nomizu(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n * n {
        return Err(CurvError::DimensionMismatch {
            expected: n * n,
            got: a.len().min(b.len()),
        });
    }
    let mut out = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] = a[i * n + k] * b[j * n + l]
                        + a[j * n + l] * b[i * n + k]
                        - a[i * n + l] * b[j * n + k]
                        - a[j * n + k] * b[i * n + l];
                }
            }
        }
    }
    Ok(out)
}

fn weyl_from_parts(rm: &[f64], ric: &[f64], r: f64, g: &[f64], n: usize) -> Vec<f64> {
    let nf = n as f64;
    let ricg = kulkarni_nomizu(ric, g, n).expect("shapes");
    let gg = kulkarni_nomizu(g, g, n).expect("shapes");
    let c1 = 1.0 / (nf - 2.0);
    let c2 = r / (2.0 * (nf - 1.0) * (nf - 2.0));
    rm.iter()
        .zip(ricg.iter().zip(&gg))
        .map(|(rm, (a, b))| rm - c1 * a + c2 * b)
        .collect()
}

/// Weyl tensor `W = Rm − Ric⊙g/(n−2) + R/(2(n−1)(n−2)) g⊙g`; zero for `n = 3`.
pub fn weyl(bundle: &CurvatureBundle) -> Result<Vec<f64>> {
    let n = bundle.n;
    if n < 3 {
        return Err(CurvError::UnsupportedDimension(n));
    }
    if n == 3 {
        return Ok(vec![0.0; 81]);
    }
    Ok(weyl_from_parts(
        &bundle.rm4,
        &bundle.ric,
        bundle.scalar,
        &bundle.g,
        n,
    ))
}

fn geometry_and_tensor(
    field: &MetricField,
    h: &SymTensorField,
    x: &[f64],
    order: usize,
) -> Result<(LocalGeometry, JTensor)> {
    if h.dim() != field.dim() {
        return Err(CurvError::DimensionMismatch {
            expected: field.dim(),
            got: h.dim(),
        });
    }
    let geo = LocalGeometry::at(field, x, order.max(2))?;
    let hj = JTensor::from_data(field.dim(), 2, h.jets(x, order.max(2))?);
    Ok((geo, hj))
}

/// `h_ij,k` (order 1) or `h_ij,kl = ∇_l∇_k h_ij` (order 2).
pub fn covariant_derivative(
    field: &MetricField,
    h: &SymTensorField,
    x: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    if !(1..=2).contains(&order) {
        return Err(CurvError::Config(format!(
            "covariant derivative order must be 1 or 2, got {order}"
        )));
    }
    let (geo, hj) = geometry_and_tensor(field, h, x, order)?;
    let mut t = geo.covariant_derivative(&hj);
    if order == 2 {
        t = geo.covariant_derivative(&t);
    }
    Ok(t.values())
}

/// `(δh)_j = g^{pq} h_pj,q`.
pub fn divergence(field: &MetricField, h: &SymTensorField, x: &[f64]) -> Result<Vec<f64>> {
    let (geo, hj) = geometry_and_tensor(field, h, x, 1)?;
    let n = geo.n;
    let dh = geo.covariant_derivative(&hj).values();
    let ginv = geo.ginv.values();
    Ok((0..n)
        .map(|j| {
            let mut v = 0.0;
            for p in 0..n {
                for q in 0..n {
                    v += ginv[p * n + q] * dh[(p * n + j) * n + q];
                }
            }
            v
        })
        .collect())
}

/// `tr h = g^{ij} h_ij`.
pub fn trace(field: &MetricField, h: &SymTensorField, x: &[f64]) -> Result<f64> {
    let n = field.dim();
    let g = field.components(x)?;
    let ginv = linalg::inverse_spd(&g, n)
        .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })?;
    let hv = h.components(x)?;
    Ok(ginv.iter().zip(&hv).map(|(a, b)| a * b).sum())
}

/// `(δ*ω)_ij = −(ω_i,j + ω_j,i)/2`.
pub fn delta_star(field: &MetricField, omega: &OneFormField, x: &[f64]) -> Result<Vec<f64>> {
    let n = field.dim();
    let geo = LocalGeometry::at(field, x, 2)?;
    let w = JTensor::from_data(n, 1, omega.jets(x, 1)?);
    let dw = geo.covariant_derivative(&w).values();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = -0.5 * (dw[i * n + j] + dw[j * n + i]);
        }
    }
    Ok(out)
}

/// `Δh = g^{kl} h_ij,kl`.
pub fn rough_laplacian(field: &MetricField, h: &SymTensorField, x: &[f64]) -> Result<Vec<f64>> {
    let (geo, hj) = geometry_and_tensor(field, h, x, 2)?;
    Ok(geo.laplacian(&hj).values())
}

/// `R_ikjl h^{kl}`, the curvature action in the Lichnerowicz Laplacian.
pub fn curvature_action(geo: &LocalGeometry, h: &JTensor) -> JTensor {
    let n = geo.n;
    let hup = geo.raise(&geo.raise(h, 0), 1);
    let like = geo.rm.data[0].clone();
    let mut out = JTensor::zeros(n, 2, &like);
    for i in 0..n {
        for j in 0..n {
            let slot = &mut out.data[i * n + j];
            for k in 0..n {
                for l in 0..n {
                    slot.fma_assign(
                        &geo.rm.data[((i * n + k) * n + j) * n + l],
                        &hup.data[k * n + l],
                    );
                }
            }
        }
    }
    out
}

/// `Δ_L h = Δh + 2R_ikjl h^{kl} − (2/n) R h` on an Einstein base.
pub fn lichnerowicz_jets(geo: &LocalGeometry, h: &JTensor) -> Result<JTensor> {
    let defect = geo.einstein_defect();
    if defect > EINSTEIN_TOL {
        return Err(CurvError::NotEinstein { defect });
    }
    let n = geo.n;
    let lap = geo.laplacian(h);
    let act = curvature_action(geo, h);
    let r = geo.scal.value();
    let data = (0..n * n)
        .map(|k| {
            let mut v = lap.data[k].clone();
            v.axpy(2.0, &act.data[k]);
            v.axpy(-2.0 * r / n as f64, &h.data[k]);
            v
        })
        .collect();
    Ok(JTensor::from_data(n, 2, data))
}

pub fn lichnerowicz(field: &MetricField, h: &SymTensorField, x: &[f64]) -> Result<Vec<f64>> {
    let (geo, hj) = geometry_and_tensor(field, h, x, 2)?;
    Ok(lichnerowicz_jets(&geo, &hj)?.values())
}

/// Component-wise deviations of a bundle from a space form of curvature `λ`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceFormDefect {
    /// `max |R_ijkl − λ(g_ik g_jl − g_il g_jk)|`
    pub rm: f64,
    /// `max |R_ij − (n−1)λ g_ij|`
    pub ric: f64,
    /// `|R − n(n−1)λ|`
    pub scalar: f64,
}

impl SpaceFormDefect {
    pub fn max(&self, other: &SpaceFormDefect) -> SpaceFormDefect {
        SpaceFormDefect {
            rm: self.rm.max(other.rm),
            ric: self.ric.max(other.ric),
            scalar: self.scalar.max(other.scalar),
        }
    }

    pub fn worst(&self) -> f64 {
        self.rm.max(self.ric).max(self.scalar)
    }
}

pub fn space_form_defect(b: &CurvatureBundle, lambda: f64) -> SpaceFormDefect {
    let n = b.n;
    let g = &b.g;
    let mut rm: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let want = lambda * (g[i * n + k] * g[j * n + l] - g[i * n + l] * g[j * n + k]);
                    rm = rm.max((b.rm4[((i * n + j) * n + k) * n + l] - want).abs());
                }
            }
        }
    }
    let nf = n as f64;
    let ric = (0..n * n)
        .map(|k| (b.ric[k] - (nf - 1.0) * lambda * g[k]).abs())
        .fold(0.0, f64::max);
    SpaceFormDefect {
        rm,
        ric,
        scalar: (b.scalar - nf * (nf - 1.0) * lambda).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{
        euler_s3, flat_torus, perturbed_torus, poincare_ball, round_sphere, ScalarField,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn round_sphere_curvature_convention() {
        let g = round_sphere(3, 1.0).unwrap();
        let b = curvature(&g, &[0.7, 1.2, 0.3]).unwrap();
        assert!(space_form_defect(&b, 1.0).worst() < 1e-12);
        assert!((b.scalar - 6.0).abs() < 1e-12);
        assert!((b.norm_rm2 - 12.0).abs() < 1e-11);
        assert!((b.norm_ric2 - 12.0).abs() < 1e-11);
        for i in 0..3 {
            for j in 0..3 {
                assert!((b.ric[i * 3 + j] - 2.0 * b.g[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poincare_and_euler_charts_are_space_forms() {
        let p = poincare_ball(3, 0.9).unwrap();
        let b = curvature(&p, &[0.1, 0.2, 0.0]).unwrap();
        assert!(space_form_defect(&b, -1.0).worst() < 1e-10);
        for k in 0..9 {
            assert!((b.ric[k] + 2.0 * b.g[k]).abs() < 1e-10);
        }
        let p4 = poincare_ball(4, 0.9).unwrap();
        let b4 = curvature(&p4, &[0.1, 0.0, 0.0, 0.0]).unwrap();
        assert!((b4.scalar + 12.0).abs() < 1e-10);
        let e = euler_s3(1.0).unwrap();
        let be = curvature(&e, &[1.0, 0.4, 2.0]).unwrap();
        assert!(space_form_defect(&be, 1.0).worst() < 1e-12);
    }

    #[test]
    fn algebraic_symmetries_on_perturbed_metric() {
        let g = perturbed_torus(4, 0.05, 5, 3).unwrap();
        let b = curvature(&g, &[0.2, 0.5, 0.1, 0.9]).unwrap();
        let n = 4;
        let r = |i: usize, j: usize, k: usize, l: usize| b.rm4[((i * n + j) * n + k) * n + l];
        let scale = b.rm4.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        assert!((r(i, j, k, l) + r(i, j, l, k)).abs() <= 1e-8 * scale);
                        assert!((r(i, j, k, l) - r(k, l, i, j)).abs() <= 1e-8 * scale);
                        assert!(
                            (r(i, j, k, l) + r(i, k, l, j) + r(i, l, j, k)).abs() <= 1e-8 * scale
                        );
                    }
                }
            }
        }
        // Weyl is trace-free over slots 1 and 3
        let w = weyl(&b).unwrap();
        for j in 0..n {
            for l in 0..n {
                let t: f64 = (0..n)
                    .flat_map(|i| (0..n).map(move |k| (i, k)))
                    .map(|(i, k)| b.ginv[i * n + k] * w[((i * n + j) * n + k) * n + l])
                    .sum();
                assert!(t.abs() < 1e-7);
            }
        }
        let lhs = b.norm_rm2;
        let rhs = b.norm_weyl2 + 2.0 * b.norm_ric2 - b.scalar * b.scalar / 3.0;
        assert!((lhs - rhs).abs() <= 1e-7 * lhs.abs().max(1e-300));
    }

    #[test]
    fn kulkarni_nomizu_of_identity() {
        let n = 3;
        let id: Vec<f64> = (0..9)
            .map(|k| if k / 3 == k % 3 { 1.0 } else { 0.0 })
            .collect();
        let gg = kulkarni_nomizu(&id, &id, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        let want = 2.0 * (d(i, k) * d(j, l) - d(i, l) * d(j, k));
                        assert_eq!(gg[((i * n + j) * n + k) * n + l], want);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sym = |m: &[f64]| {
            (0..9)
                .map(|k| 0.5 * (m[k] + m[(k % 3) * 3 + k / 3]))
                .collect::<Vec<_>>()
        };
        let (a, b) = (sym(&a), sym(&b));
        let ab = kulkarni_nomizu(&a, &b, n).unwrap();
        let ba = kulkarni_nomizu(&b, &a, n).unwrap();
        assert!(ab.iter().zip(&ba).all(|(x, y)| (x - y).abs() < 1e-15));
        assert!(kulkarni_nomizu(&a, &b[..4], n).is_err());
    }

    #[test]
    fn metric_is_parallel() {
        for g in [
            round_sphere(3, 1.0).unwrap(),
            euler_s3(1.0).unwrap(),
            perturbed_torus(3, 0.05, 3, 9).unwrap(),
        ] {
            let gfield = SymTensorField::new(g.field().clone()).unwrap();
            let dg = covariant_derivative(&g, &gfield, &[0.6, 1.3, 0.4], 1).unwrap();
            assert!(dg.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn flat_derivative_of_cosine_mode() {
        let g = flat_torus(&[1.0; 3]).unwrap();
        let a = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0];
        let h = SymTensorField::from_jets(3, move |c| {
            let w = (&c[0] * (2.0 * PI)).cos();
            a.iter().map(|&v| &w * v).collect()
        });
        let x = [0.13, 0.4, 0.8];
        let dh = covariant_derivative(&g, &h, &x, 1).unwrap();
        for ij in 0..9 {
            for k in 0..3 {
                let want = if k == 0 {
                    -2.0 * PI * a[ij] * (2.0 * PI * x[0]).sin()
                } else {
                    0.0
                };
                assert!((dh[ij * 3 + k] - want).abs() < 1e-12);
            }
        }
        let f = ScalarField::from_jets(3, |c| (&c[0] * (2.0 * PI)).cos());
        let hf = SymTensorField::conformal(&f, &g);
        let div = divergence(&g, &hf, &x).unwrap();
        assert!((div[0] + 2.0 * PI * (2.0 * PI * x[0]).sin()).abs() < 1e-12);
        assert!(div[1].abs() < 1e-14 && div[2].abs() < 1e-14);
    }

    #[test]
    fn ricci_identity_on_round_s3() {
        let g = round_sphere(3, 1.0).unwrap();
        let h = SymTensorField::from_jets(3, |c| {
            let p = &c[0] * &c[1] + &c[2] * &c[2] * 0.5;
            vec![
                p.clone(),
                &c[0] * 0.3,
                c[1].clone() * &c[2],
                &c[0] * 0.3,
                &c[1] * &c[1],
                c[2].clone(),
                c[1].clone() * &c[2],
                c[2].clone(),
                &p * &c[0],
            ]
        });
        let x = [0.9, 1.4, 2.2];
        let n = 3;
        let d2 = covariant_derivative(&g, &h, &x, 2).unwrap();
        let b = curvature(&g, &x).unwrap();
        let hv = h.components(&x).unwrap();
        // R_pikl with the first index raised: R^p_ikl = rm13
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let lhs =
                            d2[((i * n + j) * n + k) * n + l] - d2[((i * n + j) * n + l) * n + k];
                        let mut rhs = 0.0;
                        for p in 0..n {
                            rhs += hv[p * n + j] * b.rm13[((p * n + i) * n + k) * n + l]
                                + hv[i * n + p] * b.rm13[((p * n + j) * n + k) * n + l];
                        }
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-6, "Ricci identity residual {worst}");
    }

    #[test]
    fn lichnerowicz_on_sphere_and_torus() {
        let g = round_sphere(3, 1.0).unwrap();
        // traceless at the point only matters for the algebraic identity
        let h = SymTensorField::from_jets(3, |c| {
            let z = c[0].constant_like(0.0);
            vec![
                c[1].sin(),
                z.clone(),
                z.clone(),
                z.clone(),
                -c[1].sin() * c[0].sin().powi(2),
                z.clone(),
                z.clone(),
                z.clone(),
                z,
            ]
        });
        let x = [0.8, 1.1, 0.5];
        let dl = lichnerowicz(&g, &h, &x).unwrap();
        let lap = rough_laplacian(&g, &h, &x).unwrap();
        let hv = h.components(&x).unwrap();
        for k in 0..9 {
            assert!((dl[k] - (lap[k] - 6.0 * hv[k])).abs() < 1e-10);
        }
        let t = flat_torus(&[1.0; 3]).unwrap();
        let dlt = lichnerowicz(&t, &h, &x).unwrap();
        let lapt = rough_laplacian(&t, &h, &x).unwrap();
        assert!(dlt.iter().zip(&lapt).all(|(a, b)| (a - b).abs() < 1e-12));
        let p = perturbed_torus(3, 0.05, 3, 2).unwrap();
        assert!(matches!(
            lichnerowicz(&p, &h, &x),
            Err(CurvError::NotEinstein { .. })
        ));
    }

    #[test]
    fn float_path_matches_jet_geometry() {
        let g = perturbed_torus(4, 0.05, 4, 17).unwrap();
        let x = [0.3, 0.1, 0.7, 0.45];
        let fast = curvature(&g, &x).unwrap();
        let slow = bundle_from_geometry(&LocalGeometry::at(&g, &x, 2).unwrap());
        for (a, b) in fast.rm4.iter().zip(&slow.rm4) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in fast.gamma.iter().zip(&slow.gamma) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!((fast.norm_weyl2 - slow.norm_weyl2).abs() < 1e-12);
    }

    #[test]
    fn curvature_scaling() {
        let g = round_sphere(4, 1.0).unwrap();
        let x = [0.5, 1.0, 1.5, 0.2];
        let b = curvature(&g, &x).unwrap();
        for c in [0.5, 2.0] {
            let bc = curvature(&g.scaled(c), &x).unwrap();
            assert!((bc.norm_rm2 - b.norm_rm2 / (c * c)).abs() < 1e-10);
            assert!((bc.scalar - b.scalar / c).abs() < 1e-10);
            for k in 0..b.rm4.len() {
                assert!((bc.rm4[k] - c * b.rm4[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn finite_difference_mode_agrees_with_analytic() {
        let g = perturbed_torus(3, 0.05, 3, 5).unwrap();
        let fd = g.finite_difference(g.domain().default_fd_step());
        let x = [0.3, 0.6, 0.2];
        let a = curvature(&g, &x).unwrap();
        let b = curvature(&fd, &x).unwrap();
        assert!((a.scalar - b.scalar).abs() < 1e-6 * (1.0 + a.scalar.abs()));
    }
}
