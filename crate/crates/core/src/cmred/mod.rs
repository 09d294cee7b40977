//! Parameterized center manifolds of the coupled network and their reduced fields.
//!
//! The node nonlinearity is diagonal (`H(X)_p = h(x_p)`), so the invariance equation
//! splits along the Laplacian eigenvectors `wᵢ`: writing `X = Σᵢ wᵢ ⊗ yᵢ`, each channel
//! obeys `ẏᵢ = Jᵢ yᵢ + Σ_p (wᵢ)_p h(x_p)` with `Jᵢ = A − α* λᵢ D`. The center manifold
//! is stored as one polynomial `ψᵢ(u; ε) ∈ ℝⁿ` per channel instead of one map on ℝ^{Nn}.

pub mod poly;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use poly::{compose, monomials_of_degree, Mono, Poly, PolyField};

use crate::graphlab::POWER_SUM_EPS;
use crate::netlin::{CenterSplit, NetworkDesign};
use crate::numkit::{solve, Matrix, NumError};

/// Highest supported truncation order.
pub const MAX_ORDER: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmError {
    #[error("order {0} outside the supported range 1..=6")]
    Order(u32),
    #[error("invalid nonlinearity: {0}")]
    Nonlinearity(String),
    #[error("invalid target: {0}")]
    Target(String),
    #[error("homological operator singular in channel {channel} at degree {degree}")]
    Singular { channel: usize, degree: u32 },
    #[error("graph not versatile at power sum ℓ = {ell} (Σν^ℓ = {sum:.3e})")]
    NotVersatile { ell: usize, sum: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl CmError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Num(e) => e.is_validation(),
            Self::Order(_) | Self::Nonlinearity(_) | Self::Target(_) | Self::Shape(_) | Self::NotVersatile { .. } => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterModel {
    pub order: u32,
    /// Channel carrying the center directions.
    pub distinguished: usize,
    /// `ψᵢ(u; ε) ∈ ℝⁿ` per channel; the distinguished one is already mapped through `Eh`.
    pub psi: Vec<PolyField>,
    /// `R(u; ε)` in `Ec` coordinates.
    pub reduced: PolyField,
    /// Largest coefficient of the invariance defect through `order`.
    pub residual: f64,
}

impl CenterModel {
    /// Channel states `yᵢ(u; ε)` on the manifold.
    pub fn channel_states(&self, split: &CenterSplit) -> Vec<PolyField> {
        lift(&self.psi, split, self.distinguished, self.reduced.d, self.order, false)
    }
}

/// `yᵢ` from the channel unknowns; `raw` marks the distinguished ψ as living in `E^h`
/// coordinates rather than ℝⁿ.
fn lift(psi: &[PolyField], split: &CenterSplit, dist: usize, d: usize, order: u32, raw: bool) -> Vec<PolyField> {
    let m = split.m();
    psi.iter()
        .enumerate()
        .map(|(i, p)| {
            if i != dist {
                return p.clone();
            }
            let hyp = if raw { p.left_mul(&split.eh) } else { p.clone() };
            PolyField::linear(&split.ec, d, order).add(&hyp)
        })
        .map(|mut f| {
            f.n = m;
            f
        })
        .collect()
}

/// Matrix of `C ↦ op C − (∂C/∂u)·N u` on ℝ^dim-valued homogeneous degree-k polynomials.
fn homological_matrix(op: &Matrix, n_block: &Matrix, monos: &[Mono]) -> Matrix {
    let dim = op.rows();
    let k = monos.len();
    let m = n_block.rows();
    let index: std::collections::HashMap<&Mono, usize> = monos.iter().enumerate().map(|(i, mo)| (mo, i)).collect();
    let mut l = Matrix::zeros(dim * k, dim * k);
    for r in 0..dim {
        for c in 0..k {
            for j in 0..dim {
                l[(r * k + c, j * k + c)] += op[(r, j)];
            }
        }
    }
    for (c, mo) in monos.iter().enumerate() {
        for a in 0..m {
            let e = mo.0[a];
            if e == 0 {
                continue;
            }
            for b in 0..m {
                let nab = n_block[(a, b)];
                if nab == 0.0 {
                    continue;
                }
                let mut target = mo.clone();
                target.0[a] -= 1;
                target.0[b] += 1;
                let c2 = index[&target];
                for r in 0..dim {
                    l[(r * k + c2, r * k + c)] -= nab * e as f64;
                }
            }
        }
    }
    l
}

struct Solved {
    psi: Vec<PolyField>,
    reduced: PolyField,
    residual: f64,
}

/// Order-by-order solve of `Dψᵢ·R = opᵢ ψᵢ + Pᵢ H̃ᵢ` with `R = N u + ec_dual H̃_s`.
///
/// `nonlin(y, k)` returns the channel nonlinearities `H̃ᵢ` through degree `k` for channel
/// states `y`.
fn solve_channels<F>(split: &CenterSplit, ops: &[Matrix], dist: usize, d: usize, rho: u32, nonlin: F) -> Result<Solved, CmError>
where
    F: Fn(&[PolyField], u32) -> Vec<PolyField> + Sync,
{
    if !(1..=MAX_ORDER).contains(&rho) {
        return Err(CmError::Order(rho));
    }
    let m = split.m();
    let nv = m + d;
    let nb = &split.nilpotent_block;
    let mut psi: Vec<PolyField> = ops.iter().map(|op| PolyField::zero(m, d, op.rows(), rho)).collect();
    let project = |ht: &[PolyField]| -> Vec<PolyField> {
        ht.iter().enumerate().map(|(i, h)| if i == dist { h.left_mul(&split.eh_dual) } else { h.clone() }).collect()
    };
    let linear = PolyField::linear(nb, d, rho);

    for k in 2..=rho {
        let y = lift(&psi, split, dist, d, rho, true);
        let ht = nonlin(&y, k);
        let g = ht[dist].left_mul(&split.ec_dual);
        let rhs = project(&ht);
        let monos = poly::monomials_of_degree(nv, k);
        let updates: Vec<PolyField> = (0..ops.len())
            .into_par_iter()
            .map(|i| {
                let mut target = rhs[i].homogeneous(k);
                target = target.sub(&psi[i].directional(&g.comps, k).homogeneous(k));
                let dim = ops[i].rows();
                let kk = monos.len();
                let mut b = vec![0.0; dim * kk];
                for r in 0..dim {
                    for (c, mo) in monos.iter().enumerate() {
                        b[r * kk + c] = -target.comps[r].coef(mo);
                    }
                }
                let l = homological_matrix(&ops[i], nb, &monos);
                let sol = solve(&l, &b).map_err(|_| CmError::Singular { channel: i, degree: k })?;
                let mut upd = PolyField::zero(m, d, dim, rho);
                for r in 0..dim {
                    for (c, mo) in monos.iter().enumerate() {
                        upd.comps[r].add_term(mo.clone(), sol[r * kk + c]);
                    }
                }
                Ok(upd)
            })
            .collect::<Result<_, CmError>>()?;
        for (p, u) in psi.iter_mut().zip(updates) {
            *p = p.add(&u);
        }
    }

    let y = lift(&psi, split, dist, d, rho, true);
    let ht = nonlin(&y, rho);
    let mut reduced = linear.add(&ht[dist].left_mul(&split.ec_dual).truncate(rho));
    reduced.order = rho;
    let rhs = project(&ht);
    let mut residual: f64 = 0.0;
    for (i, p) in psi.iter().enumerate() {
        let lhs = p.directional(&reduced.comps, rho);
        let right = PolyField { comps: compose_linear(&ops[i], p), ..p.clone() }.add(&rhs[i]);
        residual = residual.max(lhs.sub(&right).truncate(rho).max_abs_coef());
    }
    for (i, p) in psi.iter_mut().enumerate() {
        if i == dist {
            *p = p.left_mul(&split.eh);
        }
    }
    Ok(Solved { psi, reduced, residual })
}

fn compose_linear(op: &Matrix, p: &PolyField) -> Vec<Poly> {
    p.left_mul(op).comps
}

fn check_nonlinearity(h: &PolyField, n: usize) -> Result<(), CmError> {
    if h.n != n || h.dim() != n {
        return Err(CmError::Nonlinearity(format!("expected {n} states and components, got n = {}, dim = {}", h.n, h.dim())));
    }
    if h.origin_defect() != 0.0 {
        return Err(CmError::Nonlinearity("has terms without a state variable (h(0; ε) ≠ 0)".into()));
    }
    if h.linear_part().max_abs() != 0.0 {
        return Err(CmError::Nonlinearity("has linear state terms (Dh(0; 0) ≠ 0)".into()));
    }
    Ok(())
}

fn param_vars(nv: usize, m: usize, d: usize) -> Vec<Poly> {
    (0..d).map(|j| Poly::var(nv, m + j)).collect()
}

/// Center manifold of `ẋ = J x + H(x; ε)` with `split` computed from `J`.
pub fn solve_homological(j: &Matrix, split: &CenterSplit, h: &PolyField, rho: u32) -> Result<CenterModel, CmError> {
    let n = j.rows();
    if split.n() != n {
        return Err(CmError::Shape("split does not match J".into()));
    }
    check_nonlinearity(h, n)?;
    let (m, d) = (split.m(), h.d);
    let nv = m + d;
    let solved = solve_channels(split, &[split.hyperbolic_block.clone()], 0, d, rho, |y, k| {
        let mut subs = y[0].comps.clone();
        subs.extend(param_vars(nv, m, d));
        vec![PolyField { n: m, d, order: k, comps: compose(&h.comps, &subs, k) }]
    })?;
    Ok(CenterModel { order: rho, distinguished: 0, psi: solved.psi, reduced: solved.reduced, residual: solved.residual })
}

/// Reduced field of the network `ẋ_p = A x_p + h(x_p; ε) − α* Σ_q L_pq D x_q` on its
/// center manifold at `α = α*`.
pub fn reduced_field(net: &NetworkDesign, split: &CenterSplit, h: &PolyField, rho: u32) -> Result<CenterModel, CmError> {
    let n = net.n();
    if split.n() != n {
        return Err(CmError::Shape("split does not match the design".into()));
    }
    check_nonlinearity(h, n)?;
    let (m, d) = (split.m(), h.d);
    let nv = m + d;
    let nodes = net.nodes();
    let dist = net.eigen_index;
    let w: Vec<Vec<f64>> = (0..nodes).map(|i| if i == dist { net.v.clone() } else { net.laplacian_eigenvectors[i].clone() }).collect();
    let ops: Vec<Matrix> = (0..nodes)
        .map(|i| if i == dist { split.hyperbolic_block.clone() } else { net.block(net.alpha_star, net.laplacian_eigenvalues[i]) })
        .collect();
    let params = param_vars(nv, m, d);
    let solved = solve_channels(split, &ops, dist, d, rho, |y, k| {
        let node_h: Vec<Vec<Poly>> = (0..nodes)
            .into_par_iter()
            .map(|p| {
                let mut subs: Vec<Poly> = (0..n)
                    .map(|r| {
                        let mut acc = Poly::zero(nv);
                        for (i, yi) in y.iter().enumerate() {
                            if w[i][p] != 0.0 {
                                acc.add_scaled(&yi.comps[r], w[i][p]);
                            }
                        }
                        acc
                    })
                    .collect();
                subs.extend(params.iter().cloned());
                compose(&h.comps, &subs, k)
            })
            .collect();
        (0..nodes)
            .map(|i| {
                let comps = (0..n)
                    .map(|r| {
                        let mut acc = Poly::zero(nv);
                        for (p, hp) in node_h.iter().enumerate() {
                            acc.add_scaled(&hp[r], w[i][p]);
                        }
                        acc
                    })
                    .collect();
                PolyField { n: m, d, order: k, comps }
            })
            .collect()
    })?;
    Ok(CenterModel { order: rho, distinguished: dist, psi: solved.psi, reduced: solved.reduced, residual: solved.residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseDesign {
    /// Node nonlinearity, ℝⁿ-valued, in (x, ε).
    pub h: PolyField,
    /// Largest coefficient of `reduced_field(h) − target` through the order.
    pub defect: f64,
}

/// A node nonlinearity whose reduced field matches `target` through order `rho`.
///
/// Built degree by degree: the deficit `Δ` at degree k is split by u-degree i, and
/// `Q(x; ε) = Ec Δᵢ(ec_dual x; ε) / Σ_p ν_p^{i+1}` is added to h. The added terms have no
/// `E^h` component.
pub fn inverse_design(target: &PolyField, net: &NetworkDesign, split: &CenterSplit, rho: u32) -> Result<InverseDesign, CmError> {
    let (m, n, d) = (split.m(), net.n(), target.d);
    if target.n != m || target.dim() != m {
        return Err(CmError::Target(format!("expected a field on {m} center coordinates")));
    }
    if target.origin_defect() > 1e-12 {
        return Err(CmError::Target("target does not vanish at u = 0".into()));
    }
    let nb = &split.nilpotent_block;
    if target.linear_part().sub(nb).max_abs() > 1e-9 * nb.max_abs().max(1.0) {
        return Err(CmError::Target("linear part differs from the nilpotent block".into()));
    }
    let nv_x = n + d;
    let mut subs: Vec<Poly> = (0..m)
        .map(|a| {
            let mut p = Poly::zero(nv_x);
            for j in 0..n {
                p.add_term(Mono::var(nv_x, j), split.ec_dual[(a, j)]);
            }
            p
        })
        .collect();
    subs.extend((0..d).map(|j| Poly::var(nv_x, n + j)));

    let mut h = PolyField::zero(n, d, n, rho);
    for k in 2..=rho {
        let model = reduced_field(net, split, &h, k)?;
        let delta = target.homogeneous(k).sub(&model.reduced.homogeneous(k));
        for i in 1..=k {
            let part = delta.map_comps(|p| p.filter(|mo| mo.partial_degree(m) == i));
            if part.max_abs_coef() <= 1e-14 {
                continue;
            }
            let ell = i as usize + 1;
            let sum: f64 = net.v.iter().map(|x| x.powi(ell as i32)).sum();
            if sum.abs() < POWER_SUM_EPS {
                return Err(CmError::NotVersatile { ell, sum });
            }
            let q = PolyField { n, d, order: rho, comps: compose(&part.comps, &subs, k) };
            h = h.add(&q.left_mul(&split.ec).scale(1.0 / sum));
        }
    }
    let check = reduced_field(net, split, &h, rho)?;
    let defect = check.reduced.sub(&target.truncate(rho)).truncate(rho).max_abs_coef();
    h.order = rho;
    Ok(InverseDesign { h, defect })
}


/// Seeded node nonlinearity with every admissible term of degree 2..=`max_deg`.
///
/// Coefficients are uniform in `[-scale, scale]`. Pure-ε terms and terms linear in x with
/// no ε factor are left out, as the reduction requires.
pub fn random_nonlinearity(n: usize, d: usize, max_deg: u32, scale: f64, seed: u64) -> PolyField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut h = PolyField::zero(n, d, n, max_deg);
    for k in 2..=max_deg {
        for mono in monomials_of_degree(n + d, k) {
            let xdeg: u32 = mono.0[..n].iter().sum();
            if xdeg == 0 {
                continue;
            }
            let coef: Vec<f64> = (0..n).map(|_| rng.gen_range(-scale..=scale)).collect();
            h.add_term(&mono.0, &coef);
        }
    }
    h
}
