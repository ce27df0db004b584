//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `c_α` of a smooth function around a base point `x0`, so that
//! `f(x0 + δ) = Σ_{|α| ≤ K} c_α δ^α + O(|δ|^{K+1})`. Arithmetic on jets is
//! exact polynomial arithmetic modulo degree `K + 1`, which gives exact
//! partial derivatives of any closed-form expression evaluated on jets.
//!
//! Monomials are stored in graded order, so a jet of order `k` is a prefix
//! of the coefficient vector of any higher order jet at the same point.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Highest jet order supported by the shared monomial tables.
pub const MAX_ORDER: usize = 6;
const MAX_VARS: usize = 8;

/// Monomial bookkeeping shared by every jet in a given number of variables.
pub struct JetSpace {
    nvars: usize,
    exps: Vec<Vec<u8>>,
    degree_start: Vec<usize>,
    products: Vec<(u32, u32, u32)>,
    product_end: Vec<usize>,
    derivs: Vec<Vec<(u32, u32, f64)>>,
    deriv_end: Vec<Vec<usize>>,
    pair_index: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("monomials", &self.exps.len())
            .finish()
    }
}

fn monomials_of_degree(nvars: usize, degree: usize, out: &mut Vec<Vec<u8>>) {
    fn rec(prefix: &mut Vec<u8>, left: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
        if left == 1 {
            prefix.push(remaining as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=remaining).rev() {
            prefix.push(e as u8);
            rec(prefix, left - 1, remaining - e, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(nvars), nvars, degree, out);
}

impl JetSpace {
    fn build(nvars: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree_start = vec![0];
        for d in 0..=MAX_ORDER {
            monomials_of_degree(nvars, d, &mut exps);
            degree_start.push(exps.len());
        }
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let deg = |i: usize| exps[i].iter().map(|&e| e as usize).sum::<usize>();

        let mut products = Vec::new();
        for a in 0..exps.len() {
            for b in 0..exps.len() {
                if deg(a) + deg(b) > MAX_ORDER {
                    continue;
                }
                let sum: Vec<u8> = exps[a].iter().zip(&exps[b]).map(|(x, y)| x + y).collect();
                products.push((a as u32, b as u32, index[&sum] as u32));
            }
        }
        products.sort_by_key(|&(a, b, o)| (deg(o as usize), o, a, b));
        let product_end = (0..=MAX_ORDER)
            .map(|k| {
                products
                    .iter()
                    .take_while(|p| deg(p.2 as usize) <= k)
                    .count()
            })
            .collect();

        let mut derivs = Vec::with_capacity(nvars);
        let mut deriv_end = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut entries = Vec::new();
            for (src, e) in exps.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut lowered = e.clone();
                lowered[v] -= 1;
                entries.push((src as u32, index[&lowered] as u32, e[v] as f64));
            }
            entries.sort_by_key(|&(_, dst, _)| dst);
            let ends = (0..=MAX_ORDER)
                .map(|k| {
                    entries
                        .iter()
                        .take_while(|p| deg(p.1 as usize) <= k)
                        .count()
                })
                .collect();
            derivs.push(entries);
            deriv_end.push(ends);
        }

        let mut pair_index = vec![0; nvars * nvars];
        for a in 0..nvars {
            for b in 0..nvars {
                let mut e = vec![0u8; nvars];
                e[a] += 1;
                e[b] += 1;
                pair_index[a * nvars + b] = index[&e];
            }
        }

        JetSpace {
            nvars,
            exps,
            degree_start,
            products,
            product_end,
            derivs,
            deriv_end,
            pair_index,
            index,
        }
    }

    /// Shared space for `nvars` variables.
    pub fn get(nvars: usize) -> &'static JetSpace {
        static SPACES: [OnceLock<JetSpace>; MAX_VARS + 1] =
            [const { OnceLock::new() }; MAX_VARS + 1];
        assert!(
            (1..=MAX_VARS).contains(&nvars),
            "jets support 1..={MAX_VARS} variables, got {nvars}"
        );
        SPACES[nvars].get_or_init(|| JetSpace::build(nvars))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    pub fn monomial_index(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

/// Truncated Taylor expansion of a scalar function around a point.
#[derive(Clone)]
pub struct Jet {
    space: &'static JetSpace,
    order: usize,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.space.nvars)
            .field("order", &self.order)
            .field("coeffs", &self.c)
            .finish()
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let space = JetSpace::get(nvars);
        let mut c = vec![0.0; space.len(order)];
        c[0] = value;
        Jet { space, order, c }
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, 0.0)
    }

    /// The coordinate function `x_var` expanded around `x0`.
    pub fn variable(nvars: usize, order: usize, var: usize, x0: f64) -> Self {
        let mut j = Self::constant(nvars, order, x0);
        if order >= 1 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// All coordinate functions expanded around `x`.
    pub fn coordinates(x: &[f64], order: usize) -> Vec<Jet> {
        (0..x.len())
            .map(|v| Self::variable(x.len(), order, v, x[v]))
            .collect()
    }

    /// A zero jet sharing this jet's space and order.
    pub fn zero_like(&self) -> Self {
        Jet {
            space: self.space,
            order: self.order,
            c: vec![0.0; self.c.len()],
        }
    }

    pub fn constant_like(&self, value: f64) -> Self {
        let mut j = self.zero_like();
        j.c[0] = value;
        j
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Self {
        let space = JetSpace::get(nvars);
        assert_eq!(coeffs.len(), space.len(order), "coefficient count mismatch");
        Jet {
            space,
            order,
            c: coeffs,
        }
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> &'static JetSpace {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        match self.space.monomial_index(exps) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => 0.0,
        }
    }

    /// Mixed partial derivative `∂^α f(x0)` for exponent vector `α`.
    pub fn partial(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        self.coeff(exps) * fact
    }

    /// Second partial `∂_a ∂_b f(x0)`.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        let c = self.c[self.space.pair_index[a * self.space.nvars + b]];
        if a == b {
            2.0 * c
        } else {
            c
        }
    }

    /// First partial `∂_var f(x0)`.
    pub fn d1(&self, var: usize) -> f64 {
        if self.order == 0 {
            return 0.0;
        }
        self.c[1 + var]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            space: self.space,
            order,
            c: self.c[..self.space.len(order)].to_vec(),
        }
    }

    /// Reinterprets the jet in a space with extra trailing variables that it
    /// does not depend on.
    pub fn embed(&self, nvars: usize) -> Self {
        if nvars == self.space.nvars {
            return self.clone();
        }
        assert!(
            nvars > self.space.nvars,
            "cannot embed into fewer variables"
        );
        let target = JetSpace::get(nvars);
        let mut c = vec![0.0; target.len(self.order)];
        let mut e = vec![0u8; nvars];
        for (i, &v) in self.c.iter().enumerate() {
            e[..self.space.nvars].copy_from_slice(&self.space.exps[i]);
            c[target.index[&e]] = v;
        }
        Jet {
            space: target,
            order: self.order,
            c,
        }
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut c = vec![0.0; self.space.len(order)];
        let entries = &self.space.derivs[var][..self.space.deriv_end[var][order]];
        for &(src, dst, factor) in entries {
            c[dst as usize] += factor * self.c[src as usize];
        }
        Jet {
            space: self.space,
            order,
            c,
        }
    }

    fn check_space(&self, other: &Jet) {
        debug_assert!(
            std::ptr::eq(self.space, other.space),
            "jets over different variable counts"
        );
    }

    /// `self += a * b`, truncated to the lowest of the three orders.
    pub fn fma_assign(&mut self, a: &Jet, b: &Jet) {
        self.check_space(a);
        self.check_space(b);
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            self.c.truncate(self.space.len(order));
            self.order = order;
        }
        for &(i, j, o) in &self.space.products[..self.space.product_end[order]] {
            self.c[o as usize] += a.c[i as usize] * b.c[j as usize];
        }
    }

    /// `self -= a * b`, truncated like [`Jet::fma_assign`].
    pub fn fnma_assign(&mut self, a: &Jet, b: &Jet) {
        self.check_space(a);
        self.check_space(b);
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            self.c.truncate(self.space.len(order));
            self.order = order;
        }
        for &(i, j, o) in &self.space.products[..self.space.product_end[order]] {
            self.c[o as usize] -= a.c[i as usize] * b.c[j as usize];
        }
    }

    /// `self += s * a`.
    pub fn axpy(&mut self, s: f64, a: &Jet) {
        self.check_space(a);
        let order = self.order.min(a.order);
        if order < self.order {
            self.c.truncate(self.space.len(order));
            self.order = order;
        }
        for (x, y) in self.c.iter_mut().zip(&a.c) {
            *x += s * y;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.c.iter_mut().for_each(|x| *x *= s);
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet {
            space: self.space,
            order,
            c: vec![0.0; self.space.len(order)],
        };
        out.fma_assign(self, other);
        out
    }

    /// Evaluates `Σ d_k (self - x0)^k` where `d_k = f^{(k)}(x0)/k!`.
    fn compose(&self, taylor: &[f64]) -> Jet {
        let mut u = self.clone();
        u.c[0] = 0.0;
        let mut r = self.constant_like(taylor[self.order]);
        for k in (0..self.order).rev() {
            r = r.mul_jet(&u);
            r.c[0] += taylor[k];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.order + 1);
        let mut p = 1.0 / a;
        for k in 0..=self.order {
            d.push(if k % 2 == 0 { p } else { -p });
            p /= a;
        }
        self.compose(&d)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            d.push(binom * a.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powi(&self, k: u32) -> Jet {
        let mut r = self.constant_like(1.0);
        for _ in 0..k {
            r = r.mul_jet(self);
        }
        r
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut f = 1.0;
        for k in 0..=self.order {
            d.push(e / f);
            f *= k as f64 + 1.0;
        }
        self.compose(&d)
    }

    pub fn ln(&self) -> Jet {
        let a = self.c[0];
        let mut d = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign / (k as f64 * a.powi(k as i32)));
        }
        self.compose(&d)
    }

    fn trig(&self, phase: usize) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        let cycle = [s, c, -s, -c];
        let mut d = Vec::with_capacity(self.order + 1);
        let mut f = 1.0;
        for k in 0..=self.order {
            d.push(cycle[(k + phase) % 4] / f);
            f *= k as f64 + 1.0;
        }
        self.compose(&d)
    }

    pub fn sin(&self) -> Jet {
        self.trig(0)
    }

    pub fn cos(&self) -> Jet {
        self.trig(1)
    }
}

macro_rules! binary_ops {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign:ident, $op:tt) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.check_space(rhs);
                let order = self.order.min(rhs.order);
                let len = self.space.len(order);
                let c = self.c[..len]
                    .iter()
                    .zip(&rhs.c[..len])
                    .map(|(a, b)| a $op b)
                    .collect();
                Jet { space: self.space, order, c }
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
        impl $assign_tr<&Jet> for Jet {
            fn $assign(&mut self, rhs: &Jet) {
                self.check_space(rhs);
                let order = self.order.min(rhs.order);
                if order < self.order {
                    self.c.truncate(self.space.len(order));
                    self.order = order;
                }
                for (a, b) in self.c.iter_mut().zip(&rhs.c) {
                    *a = *a $op *b;
                }
            }
        }
        impl $assign_tr<Jet> for Jet {
            fn $assign(&mut self, rhs: Jet) {
                self.$assign(&rhs);
            }
        }
    };
}

binary_ops!(Add, add, AddAssign, add_assign, +);
binary_ops!(Sub, sub, SubAssign, sub_assign, -);

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.check_space(rhs);
        self.mul_jet(rhs)
    }
}
impl Mul<Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}
impl Mul<&Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}
impl Mul<Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}
impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, rhs: &Jet) {
        *self = self.mul_jet(rhs);
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}
impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}
impl Div<&Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.scale(-1.0);
        self
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -self.clone()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}
impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.clone() + rhs
    }
}
impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}
impl Add<&Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        rhs.clone() + self
    }
}
impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}
impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}
impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}
impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        -rhs + self
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self.scale(rhs);
        self
    }
}
impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.clone() * rhs
    }
}
impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}
impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.clone() * self
    }
}
impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs);
        self
    }
}
impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.clone() / rhs
    }
}
#[allow(clippy::suspicious_arithmetic_impl)]
impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}
#[allow(clippy::suspicious_arithmetic_impl)]
impl Div<&Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        rhs.recip() * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_counts_are_binomial() {
        let s = JetSpace::get(3);
        // C(3 + k, k)
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(2), 10);
        assert_eq!(s.len(4), 35);
        let s5 = JetSpace::get(5);
        assert_eq!(s5.len(4), 126);
    }

    #[test]
    fn product_matches_polynomial_expansion() {
        // (1 + x + 2y)(3 - y) around the origin, exact at order 2
        let x = Jet::variable(2, 2, 0, 0.0);
        let y = Jet::variable(2, 2, 1, 0.0);
        let a = 1.0 + &x + &y * 2.0;
        let b = 3.0 - &y;
        let p = &a * &b;
        assert_eq!(p.coeff(&[0, 0]), 3.0);
        assert_eq!(p.coeff(&[1, 0]), 3.0);
        assert_eq!(p.coeff(&[0, 1]), 5.0);
        assert_eq!(p.coeff(&[1, 1]), -1.0);
        assert_eq!(p.coeff(&[0, 2]), -2.0);
    }

    #[test]
    fn elementary_functions_match_closed_form_derivatives() {
        let x0 = 0.7;
        let x = Jet::variable(1, 4, 0, x0);
        let s = x.sin();
        assert!(close(s.partial(&[3]), -x0.cos(), 1e-14));
        let e = (&x * 2.0).exp();
        assert!(close(e.partial(&[4]), 16.0 * (2.0 * x0).exp(), 1e-13));
        let r = x.recip();
        assert!(close(r.partial(&[2]), 2.0 / x0.powi(3), 1e-13));
        let q = x.sqrt();
        assert!(close(q.partial(&[2]), -0.25 * x0.powf(-1.5), 1e-13));
        let l = x.ln();
        assert!(close(l.partial(&[3]), 2.0 / x0.powi(3), 1e-13));
        let c = x.cos();
        assert!(close(c.partial(&[1]), -x0.sin(), 1e-14));
    }

    #[test]
    fn derivative_lowers_order_and_commutes() {
        let x = Jet::variable(2, 4, 0, 0.3);
        let y = Jet::variable(2, 4, 1, -0.2);
        let f = (&x * &y).sin() + (&x * &x * &y).exp();
        let fxy = f.derivative(0).derivative(1);
        let fyx = f.derivative(1).derivative(0);
        assert_eq!(fxy.order(), 2);
        for (a, b) in fxy.coeffs().iter().zip(fyx.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(close(fxy.value(), f.partial(&[1, 1]), 1e-12));
        assert!(close(f.d2(0, 1), f.partial(&[1, 1]), 1e-14));
        assert!(close(f.d2(1, 1), f.partial(&[0, 2]), 1e-14));
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::variable(3, 3, 0, 0.4);
        let z = Jet::variable(3, 3, 2, 1.1);
        let a = (&x * &z).cos() + 2.0;
        let b = &z * &z + 1.0;
        let back = (&a / &b) * &b;
        for (u, v) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_preserves_partials() {
        let x = Jet::variable(2, 3, 0, 0.2);
        let y = Jet::variable(2, 3, 1, 0.5);
        let f = (&x * &y).exp();
        let g = f.embed(3);
        assert_eq!(g.nvars(), 3);
        assert!((g.partial(&[1, 2, 0]) - f.partial(&[1, 2])).abs() < 1e-14);
        assert_eq!(g.partial(&[0, 0, 1]), 0.0);
    }

    #[test]
    fn mixed_orders_truncate_to_lowest() {
        let a = Jet::variable(2, 4, 0, 1.0);
        let b = Jet::variable(2, 2, 1, 1.0);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
        let mut acc = Jet::zero(2, 4);
        acc.fma_assign(&a, &b);
        assert_eq!(acc.order(), 2);
    }
}
