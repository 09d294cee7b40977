//! Truncated multivariate polynomials over state variables followed by parameters.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numkit::{Matrix, NumError};

/// Exponent vector. Ordered graded-lexicographically: total degree first, then
/// larger leading exponents first (`x₁² < x₁x₂ < x₂²`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Degree in the first `n` variables.
    pub fn partial_degree(&self, n: usize) -> u32 {
        self.0[..n].iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0.iter().zip(point).map(|(&e, &x)| x.powi(e as i32)).product()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of total degree `k` in `nvars` variables, ascending.
pub fn monomials_of_degree(nvars: usize, k: u32) -> Vec<Mono> {
    fn rec(nvars: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if cur.len() + 1 == nvars {
            cur.push(left);
            out.push(Mono(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(nvars, left - e, cur, out);
            cur.pop();
        }
    }
    if nvars == 0 {
        return if k == 0 { vec![Mono(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    rec(nvars, k, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Scalar polynomial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Mono, f64>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Mono::var(nvars, i), 1.0);
        p
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Mono::one(nvars), c);
        p
    }

    pub fn add_term(&mut self, m: Mono, c: f64) {
        debug_assert_eq!(m.0.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0.0);
        *e += c;
    }

    pub fn coef(&self, m: &Mono) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|&c| c == 0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|(_, &c)| c != 0.0).map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn add_scaled(&mut self, other: &Poly, s: f64) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), s * c);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(other, 1.0);
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(other, -1.0);
        p
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut p = Poly::zero(self.nvars);
        p.add_scaled(self, s);
        p
    }

    /// Product with terms above `max_deg` dropped.
    pub fn mul(&self, other: &Poly, max_deg: u32) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (ma, &ca) in &self.terms {
            let da = ma.degree();
            if da > max_deg {
                continue;
            }
            for (mb, &cb) in &other.terms {
                if da + mb.degree() <= max_deg {
                    p.add_term(ma.mul(mb), ca * cb);
                }
            }
        }
        p
    }

    pub fn deriv(&self, i: usize) -> Poly {
        let mut p = Poly::zero(self.nvars);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[i] -= 1;
                p.add_term(m2, c * e as f64);
            }
        }
        p
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(point)).sum()
    }

    pub fn filter(&self, keep: impl Fn(&Mono) -> bool) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, &c)| (m.clone(), c)).collect() }
    }

    pub fn homogeneous(&self, k: u32) -> Poly {
        self.filter(|m| m.degree() == k)
    }

    pub fn truncate(&self, k: u32) -> Poly {
        self.filter(|m| m.degree() <= k)
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |a, &c| a.max(c.abs()))
    }

    pub fn l1(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Drops coefficients with |c| ≤ tol.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.abs() > tol);
    }
}

/// Evaluates `polys` at the polynomial arguments `subs` (one per variable), truncating at
/// `max_deg`. Every substitute must vanish at the origin so truncation is exact.
pub fn compose(polys: &[Poly], subs: &[Poly], max_deg: u32) -> Vec<Poly> {
    let out_vars = subs.first().map_or(0, |s| s.nvars);
    let nv = subs.len();
    let mut max_exp = vec![0u32; nv];
    for p in polys {
        assert_eq!(p.nvars, nv, "compose: variable count mismatch");
        for m in p.terms.keys() {
            for (j, &e) in m.0.iter().enumerate() {
                max_exp[j] = max_exp[j].max(e.min(max_deg));
            }
        }
    }
    let powers: Vec<Vec<Poly>> = (0..nv)
        .map(|j| {
            let mut v = vec![Poly::constant(out_vars, 1.0)];
            for e in 1..=max_exp[j] as usize {
                let next = v[e - 1].mul(&subs[j], max_deg);
                v.push(next);
            }
            v
        })
        .collect();
    polys
        .iter()
        .map(|p| {
            let mut out = Poly::zero(out_vars);
            for (m, &c) in &p.terms {
                if m.degree() > max_deg {
                    continue;
                }
                let mut acc = Poly::constant(out_vars, c);
                for (j, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        acc = acc.mul(&powers[j][e as usize], max_deg);
                    }
                }
                out.add_scaled(&acc, 1.0);
            }
            out
        })
        .collect()
}

/// Vector-valued polynomial in `n` state variables and `d` parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawField", into = "RawField")]
pub struct PolyField {
    pub n: usize,
    pub d: usize,
    /// Maximum total degree retained (parameters count as degree 1).
    pub order: u32,
    pub comps: Vec<Poly>,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    exps: Vec<u32>,
    coef: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawField {
    n: usize,
    d: usize,
    order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    terms: Vec<RawTerm>,
}

impl TryFrom<RawField> for PolyField {
    type Error = NumError;
    fn try_from(raw: RawField) -> Result<Self, NumError> {
        let dim = raw.dim.or_else(|| raw.terms.first().map(|t| t.coef.len())).unwrap_or(raw.n);
        let mut f = PolyField::zero(raw.n, raw.d, dim, raw.order);
        for (k, t) in raw.terms.into_iter().enumerate() {
            let bad = |detail: String| NumError::Shape { op: "PolyField", detail: format!("term {k}: {detail}") };
            if t.exps.len() != raw.n + raw.d {
                return Err(bad(format!("expected {} exponents, got {}", raw.n + raw.d, t.exps.len())));
            }
            if t.coef.len() != dim {
                return Err(bad(format!("expected {dim} coefficients, got {}", t.coef.len())));
            }
            let m = Mono(t.exps);
            if m.degree() > raw.order {
                return Err(bad(format!("degree {} exceeds order {}", m.degree(), raw.order)));
            }
            if t.coef.iter().any(|c| !c.is_finite()) {
                return Err(NumError::NonFinite { index: k });
            }
            for (comp, c) in f.comps.iter_mut().zip(t.coef) {
                comp.add_term(m.clone(), c);
            }
        }
        Ok(f)
    }
}

impl From<PolyField> for RawField {
    fn from(f: PolyField) -> Self {
        let mut all: BTreeMap<Mono, Vec<f64>> = BTreeMap::new();
        let dim = f.dim();
        for (i, p) in f.comps.iter().enumerate() {
            for (m, &c) in &p.terms {
                if c != 0.0 {
                    all.entry(m.clone()).or_insert_with(|| vec![0.0; dim])[i] = c;
                }
            }
        }
        RawField {
            n: f.n,
            d: f.d,
            order: f.order,
            dim: (dim != f.n).then_some(dim),
            terms: all.into_iter().map(|(m, coef)| RawTerm { exps: m.0, coef }).collect(),
        }
    }
}

impl PolyField {
    pub fn zero(n: usize, d: usize, dim: usize, order: u32) -> Self {
        Self { n, d, order, comps: vec![Poly::zero(n + d); dim] }
    }

    /// Linear field `x ↦ M x` (dim = rows of M).
    pub fn linear(m: &Matrix, d: usize, order: u32) -> Self {
        let n = m.cols();
        let mut f = Self::zero(n, d, m.rows(), order);
        for i in 0..m.rows() {
            for j in 0..n {
                f.comps[i].add_term(Mono::var(n + d, j), m[(i, j)]);
            }
        }
        f
    }

    pub fn nvars(&self) -> usize {
        self.n + self.d
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn add_term(&mut self, exps: &[u32], coef: &[f64]) {
        let m = Mono(exps.to_vec());
        for (p, &c) in self.comps.iter_mut().zip(coef) {
            p.add_term(m.clone(), c);
        }
    }

    pub fn eval(&self, x: &[f64], eps: &[f64]) -> Vec<f64> {
        let pt: Vec<f64> = x.iter().chain(eps).copied().collect();
        self.comps.iter().map(|p| p.eval(&pt)).collect()
    }

    pub fn map_comps(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        Self { comps: self.comps.iter().map(f).collect(), ..self.clone() }
    }

    pub fn homogeneous(&self, k: u32) -> Self {
        self.map_comps(|p| p.homogeneous(k))
    }

    pub fn truncate(&self, k: u32) -> Self {
        let mut f = self.map_comps(|p| p.truncate(k));
        f.order = f.order.min(k);
        f
    }

    pub fn add(&self, other: &PolyField) -> Self {
        let mut f = self.clone();
        for (a, b) in f.comps.iter_mut().zip(&other.comps) {
            a.add_scaled(b, 1.0);
        }
        f.order = f.order.max(other.order);
        f
    }

    pub fn sub(&self, other: &PolyField) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_comps(|p| p.scale(s))
    }

    /// `M · f`.
    pub fn left_mul(&self, m: &Matrix) -> Self {
        let nv = self.nvars();
        let comps = (0..m.rows())
            .map(|i| {
                let mut p = Poly::zero(nv);
                for (j, q) in self.comps.iter().enumerate() {
                    let a = m[(i, j)];
                    if a != 0.0 {
                        p.add_scaled(q, a);
                    }
                }
                p
            })
            .collect();
        Self { comps, ..self.clone() }
    }

    /// Jacobian in the state variables, `∂fᵢ/∂xⱼ` at (x, ε).
    pub fn jacobian(&self, x: &[f64], eps: &[f64]) -> Matrix {
        let pt: Vec<f64> = x.iter().chain(eps).copied().collect();
        let mut j = Matrix::zeros(self.dim(), self.n);
        for (i, p) in self.comps.iter().enumerate() {
            for k in 0..self.n {
                j[(i, k)] = p.deriv(k).eval(&pt);
            }
        }
        j
    }

    /// Coefficients of the pure-state linear terms.
    pub fn linear_part(&self) -> Matrix {
        let mut j = Matrix::zeros(self.dim(), self.n);
        for (i, p) in self.comps.iter().enumerate() {
            for k in 0..self.n {
                j[(i, k)] = p.coef(&Mono::var(self.nvars(), k));
            }
        }
        j
    }

    /// Largest coefficient among terms with no state variable (the field at x = 0).
    pub fn origin_defect(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|p| p.terms.iter())
            .filter(|(m, _)| m.partial_degree(self.n) == 0)
            .fold(0.0, |a, (_, &c)| a.max(c.abs()))
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.comps.iter().map(Poly::max_abs_coef).fold(0.0, f64::max)
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(Poly::degree).max().unwrap_or(0)
    }

    /// `Σ_a ∂f/∂x_a · g_a`, truncated at `max_deg`.
    pub fn directional(&self, g: &[Poly], max_deg: u32) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|p| {
                let mut acc = Poly::zero(self.nvars());
                for (a, ga) in g.iter().enumerate() {
                    let dp = p.deriv(a);
                    if !dp.is_zero() {
                        acc.add_scaled(&dp.mul(ga, max_deg), 1.0);
                    }
                }
                acc
            })
            .collect();
        Self { comps, ..self.clone() }
    }
}
