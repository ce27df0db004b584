//! Coordinate charts, model metrics, tensor fields and quadrature grids.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CurvError, Result};
use crate::jet::Jet;
use crate::linalg;

pub type JetFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
pub type SampleFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Highest derivative order available from sampled fields by default.
pub const DEFAULT_FD_ORDER: usize = 4;
/// Steps for derivative orders 3 and 4 are this multiple of the base step.
const HIGH_ORDER_STEP_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivMode {
    Analytic,
    FiniteDifference { step: f64 },
}

#[derive(Clone)]
enum Source {
    Analytic(JetFn),
    Sampled {
        f: SampleFn,
        step: f64,
        max_order: usize,
    },
}

/// A vector of component functions on a chart, with derivative access.
///
/// Analytic fields are closed forms evaluated on jets, so their partials are
/// exact. Sampled fields only expose point values; partials come from
/// 4th-order central stencils.
#[derive(Clone)]
pub struct Field {
    dim: usize,
    ncomp: usize,
    src: Source,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("dim", &self.dim)
            .field("ncomp", &self.ncomp)
            .field("mode", &self.deriv_mode())
            .finish()
    }
}

impl Field {
    pub fn analytic<F>(dim: usize, ncomp: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        Field {
            dim,
            ncomp,
            src: Source::Analytic(Arc::new(f)),
        }
    }

    pub fn sampled<F>(dim: usize, ncomp: usize, step: f64, max_order: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Field {
            dim,
            ncomp,
            src: Source::Sampled {
                f: Arc::new(f),
                step,
                max_order,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn deriv_mode(&self) -> DerivMode {
        match &self.src {
            Source::Analytic(_) => DerivMode::Analytic,
            Source::Sampled { step, .. } => DerivMode::FiniteDifference { step: *step },
        }
    }

    /// Highest derivative order this field can supply.
    pub fn max_order(&self) -> usize {
        match &self.src {
            Source::Analytic(_) => crate::jet::MAX_ORDER,
            Source::Sampled { max_order, .. } => *max_order,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let v = match &self.src {
            Source::Analytic(f) => f(&Jet::coordinates(x, 0)).iter().map(Jet::value).collect(),
            Source::Sampled { f, .. } => f(x),
        };
        self.check_out(v.len())?;
        if v.iter().any(|c| !c.is_finite()) {
            return Err(CurvError::NonFinite("field evaluation"));
        }
        Ok(v)
    }

    /// Jets of every component at `x`, in `dim` variables.
    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.jets_in(x, order, self.dim)
    }

    /// Jets of every component at `x`, in `nvars ≥ dim` variables; the
    /// extra variables are parameters the field does not depend on.
    pub fn jets_in(&self, x: &[f64], order: usize, nvars: usize) -> Result<Vec<Jet>> {
        self.check_point(x)?;
        if order > self.max_order() {
            return Err(CurvError::Config(format!(
                "derivative order {order} requested from a field that supplies at most {}",
                self.max_order()
            )));
        }
        let out = match &self.src {
            Source::Analytic(f) => {
                let coords: Vec<Jet> = (0..self.dim)
                    .map(|v| Jet::variable(nvars, order, v, x[v]))
                    .collect();
                f(&coords)
            }
            Source::Sampled { f, step, .. } => {
                let jets = fd_jets(f.as_ref(), x, self.ncomp, order, *step);
                jets.into_iter().map(|j| j.embed(nvars)).collect()
            }
        };
        self.check_out(out.len())?;
        if out.iter().any(|j| !j.value().is_finite()) {
            return Err(CurvError::NonFinite("field jets"));
        }
        Ok(out)
    }

    /// Same values, but derivatives from finite differences.
    pub fn to_sampled(&self, step: f64, max_order: usize) -> Field {
        let this = self.clone();
        Field::sampled(self.dim, self.ncomp, step, max_order, move |x| {
            this.eval(x).expect("sampled evaluation")
        })
    }

    /// Pointwise jet map applied to the components.
    pub fn map<F>(&self, ncomp: usize, f: F) -> Field
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        match &self.src {
            Source::Analytic(g) => {
                let g = g.clone();
                Field::analytic(self.dim, ncomp, move |c| f(&g(c)))
            }
            Source::Sampled {
                f: g,
                step,
                max_order,
            } => {
                let g = g.clone();
                let dim = self.dim;
                Field::sampled(dim, ncomp, *step, *max_order, move |x| {
                    let vals: Vec<Jet> =
                        g(x).into_iter().map(|v| Jet::constant(dim, 0, v)).collect();
                    f(&vals).iter().map(Jet::value).collect()
                })
            }
        }
    }

    /// Pointwise combination of two fields on the same chart.
    pub fn combine<F>(a: &Field, b: &Field, ncomp: usize, f: F) -> Field
    where
        F: Fn(&[Jet], &[Jet], &[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        assert_eq!(a.dim, b.dim, "combining fields on different charts");
        let dim = a.dim;
        if let (Source::Analytic(fa), Source::Analytic(fb)) = (&a.src, &b.src) {
            let (fa, fb) = (fa.clone(), fb.clone());
            return Field::analytic(dim, ncomp, move |c| f(c, &fa(c), &fb(c)));
        }
        let step = match (a.deriv_mode(), b.deriv_mode()) {
            (DerivMode::FiniteDifference { step: s }, DerivMode::FiniteDifference { step: t }) => {
                s.min(t)
            }
            (DerivMode::FiniteDifference { step }, _)
            | (_, DerivMode::FiniteDifference { step }) => step,
            _ => unreachable!(),
        };
        let max_order = a.max_order().min(b.max_order()).min(DEFAULT_FD_ORDER);
        let (a, b) = (a.clone(), b.clone());
        Field::sampled(dim, ncomp, step, max_order, move |x| {
            let c = Jet::coordinates(x, 0);
            let va: Vec<Jet> = a
                .eval(x)
                .expect("field")
                .into_iter()
                .map(|v| c[0].constant_like(v))
                .collect();
            let vb: Vec<Jet> = b
                .eval(x)
                .expect("field")
                .into_iter()
                .map(|v| c[0].constant_like(v))
                .collect();
            f(&c, &va, &vb).iter().map(Jet::value).collect()
        })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(CurvError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_out(&self, got: usize) -> Result<()> {
        if got != self.ncomp {
            return Err(CurvError::DimensionMismatch {
                expected: self.ncomp,
                got,
            });
        }
        Ok(())
    }
}

fn stencil(order: usize) -> &'static [(i32, f64)] {
    match order {
        0 => &[(0, 1.0)],
        1 => &[
            (-2, 1.0 / 12.0),
            (-1, -8.0 / 12.0),
            (1, 8.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        2 => &[
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        3 => &[
            (-3, 1.0 / 8.0),
            (-2, -1.0),
            (-1, 13.0 / 8.0),
            (1, -13.0 / 8.0),
            (2, 1.0),
            (3, -1.0 / 8.0),
        ],
        4 => &[
            (-3, -1.0 / 6.0),
            (-2, 2.0),
            (-1, -6.5),
            (0, 56.0 / 6.0),
            (1, -6.5),
            (2, 2.0),
            (3, -1.0 / 6.0),
        ],
        _ => panic!("no stencil for derivative order {order}"),
    }
}

/// Taylor jets of a sampled vector function from tensor-product stencils.
fn fd_jets(
    f: &(dyn Fn(&[f64]) -> Vec<f64> + Send + Sync),
    x: &[f64],
    ncomp: usize,
    order: usize,
    step: f64,
) -> Vec<Jet> {
    let n = x.len();
    let space = crate::jet::JetSpace::get(n);
    let len = space.len(order);
    let mut cache: HashMap<Vec<i32>, Vec<f64>> = HashMap::new();
    let mut coeffs = vec![vec![0.0; len]; ncomp];
    for m in 0..len {
        let exps = space.exponents(m);
        let total: usize = exps.iter().map(|&e| e as usize).sum();
        let (unit, h) = if total <= 2 {
            (1, step)
        } else {
            (HIGH_ORDER_STEP_FACTOR as i32, step * HIGH_ORDER_STEP_FACTOR)
        };
        let mut fact = 1.0;
        let mut scale = 1.0;
        for &e in exps {
            fact *= (1..=e as u32).product::<u32>() as f64;
            scale *= h.powi(e as i32);
        }
        // iterate the tensor-product stencil
        let stencils: Vec<&[(i32, f64)]> = exps.iter().map(|&e| stencil(e as usize)).collect();
        let mut idx = vec![0usize; n];
        loop {
            let mut w = 1.0;
            let mut key = vec![0i32; n];
            for v in 0..n {
                let (o, c) = stencils[v][idx[v]];
                w *= c;
                key[v] = o * unit;
            }
            let vals = cache.entry(key.clone()).or_insert_with(|| {
                let p: Vec<f64> = x
                    .iter()
                    .zip(&key)
                    .map(|(xi, k)| xi + *k as f64 * step)
                    .collect();
                f(&p)
            });
            for (c, v) in coeffs.iter_mut().zip(vals.iter()) {
                c[m] += w * v / (scale * fact);
            }
            let mut v = 0;
            loop {
                if v == n {
                    break;
                }
                idx[v] += 1;
                if idx[v] < stencils[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
            if v == n {
                break;
            }
        }
    }
    coeffs
        .into_iter()
        .map(|c| Jet::from_coeffs(n, order, c))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    TorusBox,
    SphereAngular,
    PoincareBall,
    EulerAnglesSU2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    pub kind: DomainKind,
}

impl ChartDomain {
    pub fn new(bounds: Vec<(f64, f64)>, periodic: Vec<bool>, kind: DomainKind) -> Result<Self> {
        let dim = bounds.len();
        if dim < 2 {
            return Err(CurvError::UnsupportedDimension(dim));
        }
        if periodic.len() != dim {
            return Err(CurvError::DimensionMismatch {
                expected: dim,
                got: periodic.len(),
            });
        }
        for (i, &(a, b)) in bounds.iter().enumerate() {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(CurvError::Config(format!(
                    "degenerate interval on axis {i}: [{a}, {b}]"
                )));
            }
        }
        if kind == DomainKind::PoincareBall {
            let r2: f64 = bounds
                .iter()
                .map(|&(a, b)| a.abs().max(b.abs()).powi(2))
                .sum();
            if r2.sqrt() >= 1.0 {
                return Err(CurvError::Config(format!(
                    "Poincaré chart box reaches radius {:.4} ≥ 1",
                    r2.sqrt()
                )));
            }
        }
        Ok(ChartDomain {
            dim,
            bounds,
            periodic,
            kind,
        })
    }

    pub fn min_extent(&self) -> f64 {
        self.bounds
            .iter()
            .map(|(a, b)| b - a)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn coordinate_volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }

    /// A deterministic pseudo-random interior point, away from the box faces.
    pub fn probe_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.bounds
            .iter()
            .map(|&(a, b)| a + (b - a) * rng.random_range(0.1..0.9))
            .collect()
    }

    /// Default step for finite-difference partials.
    pub fn default_fd_step(&self) -> f64 {
        1e-3 * self.min_extent()
    }
}

/// A Riemannian metric on a chart. Components are stored row-major.
#[derive(Clone, Debug)]
pub struct MetricField {
    domain: ChartDomain,
    field: Field,
    label: String,
    curvature: Option<f64>,
}

impl MetricField {
    pub fn new(domain: ChartDomain, field: Field, label: impl Into<String>) -> Result<Self> {
        let n = domain.dim;
        if field.dim() != n || field.ncomp() != n * n {
            return Err(CurvError::DimensionMismatch {
                expected: n * n,
                got: field.ncomp(),
            });
        }
        Ok(MetricField {
            domain,
            field,
            label: label.into(),
            curvature: None,
        })
    }

    /// A metric known only through point values; partials by finite differences.
    pub fn sampled<F>(domain: ChartDomain, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let n = domain.dim;
        let step = domain.default_fd_step();
        Self::new(
            domain,
            Field::sampled(n, n * n, step, DEFAULT_FD_ORDER, f),
            label,
        )
    }

    /// Records a known constant sectional curvature.
    pub fn with_curvature(mut self, lambda: f64) -> Self {
        self.curvature = Some(lambda);
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn curvature(&self) -> Option<f64> {
        self.curvature
    }

    pub fn deriv_mode(&self) -> DerivMode {
        self.field.deriv_mode()
    }

    pub fn allows_integrals(&self) -> bool {
        self.domain.kind != DomainKind::PoincareBall
    }

    pub fn require_integrals(&self) -> Result<()> {
        if self.allows_integrals() {
            Ok(())
        } else {
            Err(CurvError::NotClosed(format!(
                "{} is a local chart; global integrals are not available",
                self.label
            )))
        }
    }

    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(x)
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.field.jets(x, order)
    }

    pub fn jets_in(&self, x: &[f64], order: usize, nvars: usize) -> Result<Vec<Jet>> {
        self.field.jets_in(x, order, nvars)
    }

    pub fn sqrt_det(&self, x: &[f64]) -> Result<f64> {
        let g = self.components(x)?;
        linalg::sqrt_det_spd(&g, self.dim())
            .ok_or_else(|| CurvError::NotPositiveDefinite { point: x.to_vec() })
    }

    /// The metric `c·g` for a constant `c > 0`.
    pub fn scaled(&self, c: f64) -> MetricField {
        MetricField {
            domain: self.domain.clone(),
            field: self.field.map(self.field.ncomp(), move |g| {
                g.iter().map(|j| j * c).collect()
            }),
            label: self.label.clone(),
            curvature: self.curvature.map(|l| l / c),
        }
    }

    /// The metric `g + t·h`.
    pub fn perturbed(&self, h: &SymTensorField, t: f64) -> MetricField {
        MetricField {
            domain: self.domain.clone(),
            field: Field::combine(
                &self.field,
                h.field(),
                self.field.ncomp(),
                move |_, g, h| g.iter().zip(h).map(|(a, b)| a + &(b * t)).collect(),
            ),
            label: self.label.clone(),
            curvature: None,
        }
    }

    /// The same metric with finite-difference partials at the given step.
    pub fn finite_difference(&self, step: f64) -> MetricField {
        MetricField {
            field: self.field.to_sampled(step, DEFAULT_FD_ORDER),
            ..self.clone()
        }
    }

    /// Largest mismatch between the supplied first/second partials and
    /// finite differences at the probe points, relative to `1 + |∂g|`.
    pub fn check_partials(&self, probes: &[Vec<f64>]) -> Result<f64> {
        let step = self.domain.default_fd_step();
        let mut worst: f64 = 0.0;
        for x in probes {
            let exact = self.jets(x, 2)?;
            let vals = self.field.clone();
            let approx = fd_jets(
                &move |p: &[f64]| vals.eval(p).expect("metric"),
                x,
                exact.len(),
                2,
                step,
            );
            for (a, b) in exact.iter().zip(&approx) {
                for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
                    worst = worst.max((ca - cb).abs() / (1.0 + ca.abs()));
                }
            }
        }
        Ok(worst)
    }

    /// Fails unless analytic partials agree with finite differences within `10·step²`.
    pub fn verify_partials(&self, probes: &[Vec<f64>]) -> Result<()> {
        if self.deriv_mode() != DerivMode::Analytic {
            return Ok(());
        }
        let step = self.domain.default_fd_step();
        let tol = 10.0 * step * step;
        let err = self.check_partials(probes)?;
        if err > tol {
            return Err(CurvError::Tolerance {
                what: "analytic metric partials vs finite differences".into(),
                err,
                tol,
            });
        }
        Ok(())
    }

    /// Checks symmetry and positive definiteness at every grid node.
    pub fn validate_on(&self, grid: &QuadratureGrid) -> Result<()> {
        let n = self.dim();
        for x in &grid.nodes {
            let g = self.components(x)?;
            for i in 0..n {
                for j in 0..i {
                    if (g[i * n + j] - g[j * n + i]).abs() > 1e-12 * (1.0 + g[i * n + j].abs()) {
                        return Err(CurvError::Config(format!("metric not symmetric at {x:?}")));
                    }
                }
            }
            if linalg::cholesky(&g, n).is_none() {
                return Err(CurvError::NotPositiveDefinite { point: x.clone() });
            }
        }
        Ok(())
    }
}

/// A symmetric 2-tensor field, components row-major.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    field: Field,
}

impl SymTensorField {
    pub fn new(field: Field) -> Result<Self> {
        let n = field.dim();
        if field.ncomp() != n * n {
            return Err(CurvError::DimensionMismatch {
                expected: n * n,
                got: field.ncomp(),
            });
        }
        Ok(SymTensorField { field })
    }

    /// Closed-form field; `f` should return the upper-triangular data in
    /// any form, and is symmetrized by averaging `h_ij` and `h_ji`.
    pub fn from_jets<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        SymTensorField {
            field: Field::analytic(n, n * n, move |c| symmetrize(f(c), n)),
        }
    }

    pub fn sampled<F>(n: usize, step: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        SymTensorField {
            field: Field::sampled(n, n * n, step, DEFAULT_FD_ORDER, move |x| {
                let mut v = f(x);
                for i in 0..n {
                    for j in 0..i {
                        let a = 0.5 * (v[i * n + j] + v[j * n + i]);
                        v[i * n + j] = a;
                        v[j * n + i] = a;
                    }
                }
                v
            }),
        }
    }

    /// `h = f·g`.
    pub fn conformal(f: &ScalarField, g: &MetricField) -> Self {
        SymTensorField {
            field: Field::combine(f.field(), g.field(), g.field().ncomp(), |_, f, g| {
                g.iter().map(|gij| gij * &f[0]).collect()
            }),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymTensorField {
            field: self.field.map(self.field.ncomp(), move |h| {
                h.iter().map(|j| j * c).collect()
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.field.eval(x)
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.field.jets(x, order)
    }

    pub fn jets_in(&self, x: &[f64], order: usize, nvars: usize) -> Result<Vec<Jet>> {
        self.field.jets_in(x, order, nvars)
    }
}

fn symmetrize(mut v: Vec<Jet>, n: usize) -> Vec<Jet> {
    for i in 0..n {
        for j in 0..i {
            let a = (&v[i * n + j] + &v[j * n + i]) * 0.5;
            v[i * n + j] = a.clone();
            v[j * n + i] = a;
        }
    }
    v
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    field: Field,
}

impl ScalarField {
    pub fn new(field: Field) -> Result<Self> {
        if field.ncomp() != 1 {
            return Err(CurvError::DimensionMismatch {
                expected: 1,
                got: field.ncomp(),
            });
        }
        Ok(ScalarField { field })
    }

    pub fn from_jets<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField {
            field: Field::analytic(n, 1, move |c| vec![f(c)]),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.field.eval(x)?[0])
    }

    pub fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        Ok(self.field.jets(x, order)?.remove(0))
    }
}

#[derive(Clone, Debug)]
pub struct OneFormField {
    field: Field,
}

impl OneFormField {
    pub fn from_jets<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        OneFormField {
            field: Field::analytic(n, n, f),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.field.jets(x, order)
    }
}

// ---------------------------------------------------------------------------
// Models

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Torus,
    Sphere,
    PoincareBall,
    EulerS3,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Torus => "torus",
            ModelKind::Sphere => "sphere",
            ModelKind::PoincareBall => "poincare",
            ModelKind::EulerS3 => "s3-euler",
        }
    }

    /// Sign of the sectional curvature the model carries.
    pub fn curvature_sign(self) -> f64 {
        match self {
            ModelKind::Torus => 0.0,
            ModelKind::Sphere | ModelKind::EulerS3 => 1.0,
            ModelKind::PoincareBall => -1.0,
        }
    }
}

/// Default radius bound of the Poincaré chart box.
pub const POINCARE_R_MAX: f64 = 0.9;

/// Builds a constant-curvature model metric.
///
/// `scale` is the side length for the torus, the radius for the spheres
/// (curvature `1/scale²`) and the radius bound `r_max` for the Poincaré chart.
pub fn make_model(kind: ModelKind, n: usize, lambda: f64, scale: f64) -> Result<MetricField> {
    if !(2..=8).contains(&n) {
        return Err(CurvError::UnsupportedDimension(n));
    }
    if lambda.signum() != kind.curvature_sign().signum()
        || (kind == ModelKind::Torus && lambda != 0.0)
    {
        return Err(CurvError::Config(format!(
            "model {} has curvature sign {}, requested λ = {lambda}",
            kind.name(),
            kind.curvature_sign()
        )));
    }
    if !(scale > 0.0) {
        return Err(CurvError::Config(format!(
            "model scale must be positive, got {scale}"
        )));
    }
    match kind {
        ModelKind::Torus => flat_torus(&vec![scale; n]),
        ModelKind::Sphere => round_sphere(n, scale),
        ModelKind::PoincareBall => poincare_ball(n, scale),
        ModelKind::EulerS3 => {
            if n != 3 {
                return Err(CurvError::Config(format!(
                    "the Euler-angle SU(2) chart requires n = 3, got n = {n}"
                )));
            }
            euler_s3(scale)
        }
    }
}

fn identity_jets(c: &[Jet], scale: f64) -> Vec<Jet> {
    let n = c.len();
    (0..n * n)
        .map(|k| c[0].constant_like(if k / n == k % n { scale } else { 0.0 }))
        .collect()
}

/// Flat metric on the box `∏[0, L_i)` with all axes periodic.
pub fn flat_torus(lengths: &[f64]) -> Result<MetricField> {
    let n = lengths.len();
    let domain = ChartDomain::new(
        lengths.iter().map(|&l| (0.0, l)).collect(),
        vec![true; n],
        DomainKind::TorusBox,
    )?;
    let field = Field::analytic(n, n * n, |c| identity_jets(c, 1.0));
    Ok(MetricField::new(domain, field, "torus")?.with_curvature(0.0))
}

/// Round `S^n` of radius `r` in hyperspherical coordinates
/// `(θ_1, …, θ_{n-1}, φ)`, `θ_i ∈ [0, π]`, `φ ∈ [0, 2π)`.
pub fn round_sphere(n: usize, r: f64) -> Result<MetricField> {
    let mut bounds = vec![(0.0, PI); n - 1];
    bounds.push((0.0, 2.0 * PI));
    let mut periodic = vec![false; n - 1];
    periodic.push(true);
    let domain = ChartDomain::new(bounds, periodic, DomainKind::SphereAngular)?;
    let r2 = r * r;
    let field = Field::analytic(n, n * n, move |c| {
        let mut g = identity_jets(c, 0.0);
        let mut w = c[0].constant_like(r2);
        for i in 0..n {
            g[i * n + i] = w.clone();
            if i + 1 < n {
                let s = c[i].sin();
                w = &w * &(&s * &s);
            }
        }
        g
    });
    Ok(MetricField::new(domain, field, "sphere")?.with_curvature(1.0 / r2))
}

/// Ball model of hyperbolic space, `4δ/(1 − |x|²)²`, on the cube inscribed
/// in the ball of radius `r_max`.
pub fn poincare_ball(n: usize, r_max: f64) -> Result<MetricField> {
    let a = r_max / (n as f64).sqrt();
    let domain = ChartDomain::new(vec![(-a, a); n], vec![false; n], DomainKind::PoincareBall)?;
    let field = Field::analytic(n, n * n, move |c| {
        let mut r2 = c[0].constant_like(0.0);
        for x in c {
            r2.fma_assign(x, x);
        }
        let conf = (1.0 - r2).powi(2).recip() * 4.0;
        let mut g = identity_jets(c, 0.0);
        for i in 0..n {
            g[i * n + i] = conf.clone();
        }
        g
    });
    Ok(MetricField::new(domain, field, "poincare")?.with_curvature(-1.0))
}

/// Round `S³` of radius `r` as `SU(2)` in Euler angles `(θ, φ, ψ)`,
/// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`, `ψ ∈ [0, 4π)`:
/// `g = (r²/4)(dθ² + dφ² + dψ² + 2 cos θ dφ dψ)`.
pub fn euler_s3(r: f64) -> Result<MetricField> {
    let domain = ChartDomain::new(
        vec![(0.0, PI), (0.0, 2.0 * PI), (0.0, 4.0 * PI)],
        vec![false, true, true],
        DomainKind::EulerAnglesSU2,
    )?;
    let q = r * r / 4.0;
    let field = Field::analytic(3, 9, move |c| {
        let mut g = identity_jets(c, q);
        let ct = c[0].cos() * q;
        g[5] = ct.clone();
        g[7] = ct;
        g
    });
    Ok(MetricField::new(domain, field, "s3-euler")?.with_curvature(1.0 / (r * r)))
}

/// Milnor coframe `σ_1, σ_2, σ_3` of `SU(2)` in Euler angles; entry `[i][a]`
/// is the `dx^a` component of `σ_i`. With `e^i = (r/2)σ_i` it is orthonormal
/// for [`euler_s3`].
pub fn milnor_coframe(c: &[Jet]) -> [[Jet; 3]; 3] {
    let (st, ct) = (c[0].sin(), c[0].cos());
    let (sp, cp) = (c[2].sin(), c[2].cos());
    let zero = c[0].constant_like(0.0);
    let one = c[0].constant_like(1.0);
    [
        [sp.clone(), -(&st * &cp), zero.clone()],
        [cp, &st * &sp, zero],
        [c[0].constant_like(0.0), ct, one],
    ]
}

/// Unit-sphere embedding `S³ ⊂ R⁴` matching [`euler_s3`].
pub fn s3_embedding(c: &[Jet]) -> [Jet; 4] {
    let half_t = &c[0] * 0.5;
    let (ch, sh) = (half_t.cos(), half_t.sin());
    let sum = (&c[1] + &c[2]) * 0.5;
    let diff = (&c[2] - &c[1]) * 0.5;
    [
        &ch * &sum.cos(),
        &ch * &sum.sin(),
        &sh * &diff.cos(),
        &sh * &diff.sin(),
    ]
}

/// Random symmetric trigonometric field
/// `Σ_m a_m cos(2π k_m·x/L + φ_m)` with `|a_m| ≤ amplitude/modes` entrywise
/// and integer wave vectors `|k_i| ≤ kmax`.
pub fn random_trig_tensor(
    lengths: &[f64],
    amplitude: f64,
    modes: usize,
    kmax: i32,
    seed: u64,
) -> SymTensorField {
    let n = lengths.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(modes);
    for _ in 0..modes {
        let k: Vec<f64> = (0..n)
            .map(|i| 2.0 * PI * rng.random_range(-kmax..=kmax) as f64 / lengths[i])
            .collect();
        let phase = rng.random_range(0.0..2.0 * PI);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = amplitude / modes as f64 * rng.random_range(-1.0..1.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        terms.push((k, phase, a));
    }
    SymTensorField::from_jets(n, move |c| {
        let mut h = identity_jets(c, 0.0);
        for (k, phase, a) in &terms {
            let mut arg = c[0].constant_like(*phase);
            for (x, ki) in c.iter().zip(k) {
                arg.axpy(*ki, x);
            }
            let w = arg.cos();
            for (hij, aij) in h.iter_mut().zip(a) {
                hij.axpy(*aij, &w);
            }
        }
        h
    })
}

/// `δ + ε·(random trigonometric field)` on the unit torus. Positive definite
/// whenever `amplitude·n < 1`.
pub fn perturbed_torus(n: usize, amplitude: f64, modes: usize, seed: u64) -> Result<MetricField> {
    if amplitude * n as f64 >= 1.0 {
        return Err(CurvError::Config(format!(
            "perturbation amplitude {amplitude} too large for n = {n}"
        )));
    }
    let base = flat_torus(&vec![1.0; n])?;
    let h = random_trig_tensor(&vec![1.0; n], amplitude, modes, 1, seed);
    let g = base.perturbed(&h, 1.0);
    MetricField::new(g.domain().clone(), g.field().clone(), "torus-perturbed")
}

/// Restriction to `S³` of a polynomial `Σ c_α X^α` in the embedding
/// coordinates, for exponents `α ∈ N⁴`.
pub fn s3_polynomial(terms: Vec<(f64, [u32; 4])>) -> ScalarField {
    ScalarField::from_jets(3, move |c| {
        let x = s3_embedding(c);
        let mut f = c[0].constant_like(0.0);
        for (coef, e) in &terms {
            let mut m = c[0].constant_like(*coef);
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m = &m * &xi.powi(k);
                }
            }
            f += &m;
        }
        f
    })
}

/// Random globally smooth symmetric tensor on the Euler-angle `S³` chart:
/// `Σ_ij f_ij(X) σ_i ⊗ σ_j` with `f_ij` random polynomials of degree ≤ 2 in
/// the embedding coordinates.
#[allow(clippy::needless_range_loop)]
pub fn s3_random_tensor(amplitude: f64, seed: u64) -> SymTensorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = [[[0.0f64; 15]; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            for c in coeffs[i][j].iter_mut() {
                *c = amplitude * rng.random_range(-1.0..1.0);
            }
            coeffs[j][i] = coeffs[i][j];
        }
    }
    SymTensorField::from_jets(3, move |c| {
        let x = s3_embedding(c);
        // 1, X_a, X_a X_b (a ≤ b)
        let mut basis = vec![c[0].constant_like(1.0)];
        basis.extend(x.iter().cloned());
        for a in 0..4 {
            for b in a..4 {
                basis.push(&x[a] * &x[b]);
            }
        }
        let s = milnor_coframe(c);
        let mut h = identity_jets(c, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let mut f = c[0].constant_like(0.0);
                for (coef, b) in coeffs[i][j].iter().zip(&basis) {
                    f.axpy(*coef, b);
                }
                for a in 0..3 {
                    let fa = &f * &s[i][a];
                    for b in 0..3 {
                        h[a * 3 + b].fma_assign(&fa, &s[j][b]);
                    }
                }
            }
        }
        h
    })
}

// ---------------------------------------------------------------------------
// Quadrature

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub resolution: Vec<usize>,
}

/// Minimum number of nodes per axis.
pub const MIN_RESOLUTION: usize = 4;

/// Gauss–Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    // ascending order on [a, b]
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&z, &wi)| (mid + half * z, half * wi))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

/// Gauss–Legendre in `u ∈ [0, 1]` pushed through `x = a + (b − a)·p(u)`,
/// `p(u) = u + (u − 3u² + 2u³)`. `p'` is 2 at the ends and ½ in the middle,
/// which keeps nodes away from the endpoints; the cubic map keeps the rule
/// exact for the constant, so the weights still sum to `b − a`.
pub fn stretched_gauss_legendre(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (u, w) = gauss_legendre(m, 0.0, 1.0);
    u.iter()
        .zip(&w)
        .map(|(&u, &w)| {
            let p = u + (u - 3.0 * u * u + 2.0 * u * u * u);
            let dp = 1.0 + (1.0 - 6.0 * u + 6.0 * u * u);
            (a + (b - a) * p, (b - a) * dp * w)
        })
        .unzip()
}

/// Tensor-product grid: uniform nodes on periodic axes, Gauss–Legendre on
/// the others (so endpoints and coordinate poles are never nodes). Polar
/// axes of angular charts use [`stretched_gauss_legendre`]: near the poles,
/// curvature derivatives lose digits like a high power of the pole distance.
pub fn build_grid(domain: &ChartDomain, resolution: &[usize]) -> Result<QuadratureGrid> {
    if resolution.len() != domain.dim {
        return Err(CurvError::DimensionMismatch {
            expected: domain.dim,
            got: resolution.len(),
        });
    }
    if let Some(&r) = resolution.iter().find(|&&r| r < MIN_RESOLUTION) {
        return Err(CurvError::Config(format!(
            "grid resolution {r} below the minimum of {MIN_RESOLUTION} per axis"
        )));
    }
    let angular = matches!(
        domain.kind,
        DomainKind::SphereAngular | DomainKind::EulerAnglesSU2
    );
    let axes: Vec<(Vec<f64>, Vec<f64>)> = domain
        .bounds
        .iter()
        .zip(&domain.periodic)
        .zip(resolution)
        .map(|((&(a, b), &per), &m)| {
            if per {
                let h = (b - a) / m as f64;
                ((0..m).map(|i| a + i as f64 * h).collect(), vec![h; m])
            } else if angular {
                stretched_gauss_legendre(m, a, b)
            } else {
                gauss_legendre(m, a, b)
            }
        })
        .collect();
    let total: usize = resolution.iter().product();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; domain.dim];
    for _ in 0..total {
        nodes.push(idx.iter().enumerate().map(|(d, &i)| axes[d].0[i]).collect());
        weights.push(idx.iter().enumerate().map(|(d, &i)| axes[d].1[i]).product());
        for d in (0..domain.dim).rev() {
            idx[d] += 1;
            if idx[d] < resolution[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(QuadratureGrid {
        nodes,
        weights,
        resolution: resolution.to_vec(),
    })
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_nodes w·f(x)` componentwise for a vector-valued integrand. The
    /// integrand sees the coordinate measure only; multiply by `√det g` inside.
    pub fn integrate<F>(&self, ncomp: usize, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        let vals: Vec<Result<Vec<f64>>> = self.nodes.par_iter().map(|x| f(x)).collect();
        let mut cols = vec![Vec::with_capacity(self.len()); ncomp];
        for (v, w) in vals.into_iter().zip(&self.weights) {
            let v = v?;
            if v.len() != ncomp {
                return Err(CurvError::DimensionMismatch {
                    expected: ncomp,
                    got: v.len(),
                });
            }
            for (c, x) in cols.iter_mut().zip(v) {
                c.push(w * x);
            }
        }
        let out: Vec<f64> = cols.iter().map(|c| pairwise_sum(c)).collect();
        if out.iter().any(|x| !x.is_finite()) {
            return Err(CurvError::NonFinite("quadrature"));
        }
        Ok(out)
    }

    /// Largest value of a pointwise quantity over the nodes.
    pub fn sup<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let vals: Vec<Result<f64>> = self.nodes.par_iter().map(|x| f(x)).collect();
        let mut m: f64 = 0.0;
        for v in vals {
            m = m.max(v?);
        }
        Ok(m)
    }
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `Σ w·√det g` over the grid.
pub fn volume(field: &MetricField, grid: &QuadratureGrid) -> Result<f64> {
    field.require_integrals()?;
    Ok(grid.integrate(1, |x| Ok(vec![field.sqrt_det(x)?]))?[0])
}

/// Rescales by a constant so the grid volume is one; returns the metric and the factor.
pub fn normalize_volume(field: &MetricField, grid: &QuadratureGrid) -> Result<(MetricField, f64)> {
    let v = volume(field, grid)?;
    let c = v.powf(-2.0 / field.dim() as f64);
    Ok((field.scaled(c), c))
}
