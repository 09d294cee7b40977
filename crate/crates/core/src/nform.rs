//! Unfolding normal form of a 3-dimensional, 3-parameter field with a single nilpotent
//! block, reduced to `y∂x + z∂y + (λ − y + νz − x²/2 + O(κ))∂z`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmred::{compose, Mono, Poly, PolyField};
use crate::numkit::{eigendecompose, inverse, singular_values, Matrix, NumError, SpectralClass, Tolerances};

/// Relative to `Jet3::a1_scale`.
const GENERIC_A1: f64 = 1e-10;
const MAX_EPS_COND: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NfError {
    #[error("expected a field with 3 states, 3 parameters and 3 components")]
    Shape,
    #[error("linear part is not nilpotent")]
    NotNilpotent,
    #[error("linear part has a {0}-dimensional kernel, expected 1")]
    KernelDimension(usize),
    #[error("lower components are not in companion form (defect {0:.3e})")]
    NotEliminated(f64),
    #[error("a1 = {0:.3e} vanishes")]
    DegenerateA1(f64),
    #[error("gamma2 = {0} must be negative")]
    Gamma2(f64),
    #[error("kappa must be nonzero")]
    Kappa,
    #[error("parameter map is singular (condition {0:.3e})")]
    EpsMapSingular(f64),
    #[error("term {exps:?} has blow-up weight {weight} < 6 (coefficient {coef:.3e})")]
    LowWeight { exps: Vec<u32>, weight: u32, coef: f64 },
    #[error("lambda = {0} must be positive")]
    Lambda(f64),
    #[error("no kappa down to {0:.3e} brings the remainder under target")]
    KappaSearch(f64),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl NfError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Num(e) => e.is_validation(),
            Self::Shape | Self::Gamma2(_) | Self::Kappa | Self::Lambda(_) => true,
            _ => false,
        }
    }
}

/// Polynomial change of variables `new = old + φ(old; ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearIdentity {
    pub phi: PolyField,
}

impl NearIdentity {
    pub fn apply(&self, x: &[f64], eps: &[f64]) -> Vec<f64> {
        x.iter().zip(self.phi.eval(x, eps)).map(|(a, b)| a + b).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet3 {
    pub field: PolyField,
    /// Original coordinates are `frame · ξ`.
    pub frame: Matrix,
    /// Near-identity maps applied after the frame change, in order.
    pub transforms: Vec<NearIdentity>,
    /// Size the z₁² coefficient would have for an O(1) quadratic part in this frame.
    /// A nearly-degenerate linear part shrinks the frame and a₁ with it.
    #[serde(default = "unit")]
    pub a1_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Jet3 {
    /// Maps original coordinates to the current ones.
    pub fn forward(&self, x: &[f64], eps: &[f64]) -> Result<Vec<f64>, NfError> {
        let mut y = crate::numkit::solve(&self.frame, x)?;
        for t in &self.transforms {
            y = t.apply(&y, eps);
        }
        Ok(y)
    }
}

fn check_shape(f: &PolyField) -> Result<(), NfError> {
    if f.n != 3 || f.d != 3 || f.dim() != 3 {
        return Err(NfError::Shape);
    }
    Ok(())
}

fn companion() -> Matrix {
    Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
}

/// `S⁻¹ R(S ξ; ε)` with `S = [L² w, L w, w]`, `w` the axis maximizing `‖L² eⱼ‖`.
pub fn normalize_frame(r: &PolyField) -> Result<Jet3, NfError> {
    check_shape(r)?;
    let l = r.linear_part();
    let scale = l.norm_inf().max(1.0);
    if l.pow(3).max_abs() > 1e-9 * scale.powi(3) {
        return Err(NfError::NotNilpotent);
    }
    let sv = singular_values(&l)?;
    let kernel = sv.iter().filter(|&&s| s <= 1e-8 * scale).count();
    if kernel != 1 {
        return Err(NfError::KernelDimension(kernel));
    }
    let l2 = l.matmul(&l);
    let j = (0..3)
        .max_by(|&a, &b| crate::numkit::norm2(&l2.col(a)).total_cmp(&crate::numkit::norm2(&l2.col(b))).then(b.cmp(&a)))
        .expect("three columns");
    let mut w = vec![0.0; 3];
    w[j] = 1.0;
    let lw = l.matvec(&w);
    let s = Matrix::from_cols(3, &[l.matvec(&lw), lw, w]);
    let s_inv = inverse(&s)?;
    let nv = 6;
    let mut subs: Vec<Poly> = (0..3)
        .map(|i| {
            let mut p = Poly::zero(nv);
            for k in 0..3 {
                p.add_term(Mono::var(nv, k), s[(i, k)]);
            }
            p
        })
        .collect();
    subs.extend((3..6).map(|k| Poly::var(nv, k)));
    let comps = compose(&r.comps, &subs, r.order);
    let mut field = PolyField { comps, ..r.clone() }.left_mul(&s_inv);
    // The linear block is exact by construction; remove roundoff.
    let target = companion();
    for i in 0..3 {
        for k in 0..3 {
            let m = Mono::var(nv, k);
            field.comps[i].terms.remove(&m);
            field.comps[i].add_term(m, target[(i, k)]);
        }
    }
    let quad = r
        .comps
        .iter()
        .flat_map(|p| p.terms.iter())
        .filter(|(m, _)| m.0[..3].iter().sum::<u32>() == 2 && m.0[3..].iter().all(|&e| e == 0))
        .fold(0.0, |acc: f64, (_, c)| acc.max(c.abs()));
    let a1_scale = crate::numkit::norm2(s_inv.row(2)) * crate::numkit::norm2(&s.col(0)).powi(2) * quad;
    Ok(Jet3 { field, frame: s, transforms: Vec::new(), a1_scale })
}

/// Field in the coordinates `y = x + φ(x; ε)`, truncated at the field's order.
pub fn change_coordinates(f: &PolyField, phi: &PolyField) -> PolyField {
    let order = f.order;
    let nv = f.nvars();
    let g = f.add(&phi.directional(&f.comps[..f.n], order)).truncate(order);
    // x = y − φ(x) by fixed-point iteration; each pass fixes one more degree.
    let ident: Vec<Poly> = (0..f.n).map(|i| Poly::var(nv, i)).collect();
    let params: Vec<Poly> = (f.n..nv).map(|i| Poly::var(nv, i)).collect();
    let mut x = ident.clone();
    for _ in 0..order {
        let mut subs = x.clone();
        subs.extend(params.iter().cloned());
        let ph = compose(&phi.comps, &subs, order);
        x = ident.iter().zip(&ph).map(|(y, p)| y.sub(p)).collect();
    }
    let mut subs = x;
    subs.extend(params);
    PolyField { comps: compose(&g.comps, &subs, order), ..g }
}

/// Removes `h₁` then `h̃₂` so that the field reads `(z₂, z₃, ĥ₃(z; ε))`.
pub fn eliminate_lower(jet: &Jet3) -> Result<Jet3, NfError> {
    check_shape(&jet.field)?;
    let nv = 6;
    let order = jet.field.order;
    let mut field = jet.field.clone();
    let mut transforms = jet.transforms.clone();
    for (row, target) in [(0usize, 1usize), (1, 2)] {
        let mut h = field.comps[row].clone();
        h.terms.remove(&Mono::var(nv, target));
        h.prune(0.0);
        if h.is_zero() {
            continue;
        }
        let mut phi = PolyField::zero(3, 3, 3, order);
        phi.comps[target] = h;
        field = change_coordinates(&field, &phi);
        transforms.push(NearIdentity { phi });
    }
    let mut defect: f64 = 0.0;
    for (row, target) in [(0usize, 1usize), (1, 2)] {
        let mut rest = field.comps[row].clone();
        rest.add_term(Mono::var(nv, target), -1.0);
        defect = defect.max(rest.max_abs_coef());
        field.comps[row] = Poly::var(nv, target);
    }
    let scale = jet.field.max_abs_coef().max(1.0).powi(order as i32);
    if defect > 1e-9 * scale {
        return Err(NfError::NotEliminated(defect));
    }
    Ok(Jet3 { field, frame: jet.frame.clone(), transforms, a1_scale: jet.a1_scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unfolding {
    /// Coefficients of z₁², z₂², z₃², z₁z₂, z₁z₃, z₂z₃ in ĥ₃.
    pub a: [f64; 6],
    /// `eps_map[i][j]`: coefficient of zᵢ εⱼ.
    pub eps_map: Matrix,
    pub a1_generic: bool,
    pub eps_map_invertible: bool,
    pub eps_map_cond: f64,
    /// Linear coefficients of the second steady-state branch, z̃₁(ε) ≈ branch · ε.
    pub branch: Option<[f64; 3]>,
}

impl Unfolding {
    pub fn generic(&self) -> bool {
        self.a1_generic && self.eps_map_invertible
    }
}

fn exps(z: [u32; 3], e: [u32; 3]) -> Mono {
    Mono(vec![z[0], z[1], z[2], e[0], e[1], e[2]])
}

pub fn extract_unfolding(jet: &Jet3) -> Result<Unfolding, NfError> {
    check_shape(&jet.field)?;
    let h = &jet.field.comps[2];
    let pure = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
    let a = pure.map(|z| h.coef(&exps(z, [0, 0, 0])));
    let mut e = Matrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let mut z = [0; 3];
            let mut p = [0; 3];
            z[i] = 1;
            p[j] = 1;
            e[(i, j)] = h.coef(&exps(z, p));
        }
    }
    // Rows of ℰ scale with the frame columns; equilibrate before judging invertibility.
    let mut eq = e.clone();
    for i in 0..3 {
        let c = crate::numkit::norm2(&jet.frame.col(i));
        for j in 0..3 {
            eq[(i, j)] /= c;
        }
    }
    let sv = singular_values(&eq)?;
    let cond = if sv[2] > 0.0 { sv[0] / sv[2] } else { f64::INFINITY };
    let a1_generic = a[0].abs() > GENERIC_A1 * jet.a1_scale;
    let branch = a1_generic.then(|| [0, 1, 2].map(|j| -e[(0, j)] / a[0]));
    Ok(Unfolding { a, eps_map: e, a1_generic, eps_map_invertible: cond <= MAX_EPS_COND, eps_map_cond: cond, branch })
}

/// Parameter polynomials `ℰᵢ(ε)`: the coefficient of `zᵢ` in ĥ₃, in 3 variables.
fn eps_functions(h: &Poly) -> Vec<Poly> {
    (0..3)
        .map(|i| {
            let mut p = Poly::zero(3);
            for (m, &c) in &h.terms {
                if m.0[..3].iter().sum::<u32>() == 1 && m.0[i] == 1 {
                    p.add_term(Mono(m.0[3..].to_vec()), c);
                }
            }
            p
        })
        .collect()
}

/// ĥ₃ rewritten in the parameters `ε' = ℰ(ε)`, so that its z-linear part is exactly
/// `ε'₁z₁ + ε'₂z₂ + ε'₃z₃`. Returns the rewritten polynomial on (z, ε').
pub fn reparametrize(jet: &Jet3, unf: &Unfolding) -> Result<Poly, NfError> {
    if !unf.eps_map_invertible {
        return Err(NfError::EpsMapSingular(unf.eps_map_cond));
    }
    let h = &jet.field.comps[2];
    let order = jet.field.order;
    let script_e = eps_functions(h);
    let e_inv = inverse(&unf.eps_map)?;
    // ε = E⁻¹(ε' − ℰ_nl(ε)), iterated.
    let nonlinear: Vec<Poly> = script_e.iter().map(|p| p.filter(|m| m.degree() >= 2)).collect();
    let ident: Vec<Poly> = (0..3).map(|i| Poly::var(3, i)).collect();
    let mut eps = ident.iter().map(|_| Poly::zero(3)).collect::<Vec<_>>();
    for i in 0..3 {
        for j in 0..3 {
            eps[i].add_scaled(&ident[j], e_inv[(i, j)]);
        }
    }
    for _ in 0..order {
        let nl = compose(&nonlinear, &eps, order);
        let diff: Vec<Poly> = ident.iter().zip(&nl).map(|(a, b)| a.sub(b)).collect();
        eps = (0..3)
            .map(|i| {
                let mut p = Poly::zero(3);
                for j in 0..3 {
                    p.add_scaled(&diff[j], e_inv[(i, j)]);
                }
                p
            })
            .collect();
    }
    let nv = 6;
    let mut subs: Vec<Poly> = (0..3).map(|i| Poly::var(nv, i)).collect();
    for p in &eps {
        let mut lifted = Poly::zero(nv);
        for (m, &c) in &p.terms {
            lifted.add_term(Mono([vec![0, 0, 0], m.0.clone()].concat()), c);
        }
        subs.push(lifted);
    }
    let mut out = compose(std::slice::from_ref(h), &subs, order).remove(0);
    // z-linear part is ε'ᵢ zᵢ by construction; drop roundoff.
    out.terms.retain(|m, _| m.0[..3].iter().sum::<u32>() != 1);
    for i in 0..3 {
        let mut z = [0; 3];
        let mut p = [0; 3];
        z[i] = 1;
        p[i] = 1;
        out.add_term(exps(z, p), 1.0);
    }
    Ok(out)
}

fn blow_up_weight(m: &Mono) -> u32 {
    3 * m.0[0] + 4 * m.0[1] + 5 * m.0[2] + 3 * m.0[3] + 2 * m.0[4] + m.0[5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormResult {
    pub a: [f64; 6],
    pub eps_map: Matrix,
    pub kappa: f64,
    pub gamma: [f64; 3],
    pub r: f64,
    pub lambda_nf: f64,
    pub nu_nf: f64,
    /// Third component in (x, y, z); the first two are y and z.
    pub third: PolyField,
    /// Σ|coef| of `third − (λ − y + νz − x²/2)`, a bound on the unit box.
    pub remainder_norm: f64,
    pub generic: bool,
}

/// Shift, blow-up (weights 3,4,5 on z and 3,2,1 on ε'), γ₂-rescale and a₁-scaling.
pub fn blow_up_and_scale(jet: &Jet3, unf: &Unfolding, kappa: f64, gamma: [f64; 3]) -> Result<NormalFormResult, NfError> {
    let a1 = unf.a[0];
    if !unf.a1_generic {
        return Err(NfError::DegenerateA1(a1));
    }
    if !(gamma[1] < 0.0) {
        return Err(NfError::Gamma2(gamma[1]));
    }
    if kappa == 0.0 || !kappa.is_finite() {
        return Err(NfError::Kappa);
    }
    let h = reparametrize(jet, unf)?;
    let r = (-1.0 / gamma[1]).sqrt();

    // κ^{-6} ĥ₃ at z = (κ³(u₁ − γ₁/2a₁), κ⁴u₂, κ⁵u₃), ε' = (κ³γ₁, κ²γ₂, κγ₃), as a
    // polynomial in u.
    let mut shifted_u1 = Poly::var(3, 0);
    shifted_u1.add_term(Mono::one(3), -gamma[0] / (2.0 * a1));
    let mut p = Poly::zero(3);
    for (m, &c) in &h.terms {
        if c == 0.0 {
            continue;
        }
        let w = blow_up_weight(m);
        if w < 6 {
            if c.abs() > 1e-12 {
                return Err(NfError::LowWeight { exps: m.0.clone(), weight: w, coef: c });
            }
            continue;
        }
        let mut term = Poly::constant(3, c * kappa.powi(w as i32 - 6) * (0..3).map(|j| gamma[j].powi(m.0[3 + j] as i32)).product::<f64>());
        for _ in 0..m.0[0] {
            term = term.mul(&shifted_u1, u32::MAX);
        }
        let mut rest = Mono::one(3);
        rest.0[1] = m.0[1];
        rest.0[2] = m.0[2];
        let mut mono = Poly::zero(3);
        mono.add_term(rest, 1.0);
        p.add_scaled(&term.mul(&mono, u32::MAX), 1.0);
    }
    // x = a₁ v, vᵢ = −2 r^{i+2} uᵢ, third component −2 a₁ r⁶ P(u).
    let subs: Vec<Poly> = (0..3).map(|i| Poly::var(3, i).scale(1.0 / (-2.0 * a1 * r.powi(i as i32 + 3)))).collect();
    let mut third = compose(std::slice::from_ref(&p), &subs, u32::MAX).remove(0).scale(-2.0 * a1 * r.powi(6));
    third.prune(0.0);

    let lambda_nf = gamma[0] * gamma[0] * r.powi(6) / 2.0;
    let nu_nf = gamma[2] * r;
    let mut model = Poly::zero(3);
    model.add_term(Mono::one(3), lambda_nf);
    model.add_term(Mono::var(3, 1), -1.0);
    model.add_term(Mono::var(3, 2), nu_nf);
    model.add_term(Mono(vec![2, 0, 0]), -0.5);
    let remainder_norm = third.sub(&model).l1();
    let order = third.degree().max(2);
    Ok(NormalFormResult {
        a: unf.a,
        eps_map: unf.eps_map.clone(),
        kappa,
        gamma,
        r,
        lambda_nf,
        nu_nf,
        third: PolyField { n: 3, d: 0, order, comps: vec![third] },
        remainder_norm,
        generic: unf.generic(),
    })
}

/// Full chain from a reduced field to the normal form.
pub fn normal_form(r: &PolyField, kappa: f64, gamma: [f64; 3]) -> Result<(Jet3, Unfolding, NormalFormResult), NfError> {
    let jet = eliminate_lower(&normalize_frame(r)?)?;
    let unf = extract_unfolding(&jet)?;
    let res = blow_up_and_scale(&jet, &unf, kappa, gamma)?;
    Ok((jet, unf, res))
}

/// Shrinks κ from `start` until the remainder bound is at most `target`.
///
/// The remainder is O(κ) only asymptotically, so each step shrinks κ by a factor in
/// [1/100, 1/2] guided by the observed ratio.
pub fn choose_kappa(jet: &Jet3, unf: &Unfolding, gamma: [f64; 3], start: f64, target: f64) -> Result<NormalFormResult, NfError> {
    let mut kappa = start;
    let mut res = blow_up_and_scale(jet, unf, kappa, gamma)?;
    for _ in 0..200 {
        if res.remainder_norm <= target {
            return Ok(res);
        }
        kappa *= (0.9 * target / res.remainder_norm).clamp(1e-2, 0.5);
        if !(kappa > f64::MIN_POSITIVE) {
            break;
        }
        res = blow_up_and_scale(jet, unf, kappa, gamma)?;
    }
    Err(NfError::KappaSearch(kappa))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: [f64; 3],
    pub eigenvalues: Vec<num_complex::Complex64>,
    pub n_stable: usize,
    pub n_unstable: usize,
    /// Stable pair is complex.
    pub saddle_focus: bool,
}

/// Jacobian of `(y, z, λ − y + νz − x²/2)` at x.
pub fn nf_jacobian(x: f64, nu: f64) -> Matrix {
    Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-x, -1.0, nu]])
}

pub fn nf_fixed_points(lambda: f64, nu: f64, tol: &Tolerances) -> Result<[Equilibrium; 2], NfError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(NfError::Lambda(lambda));
    }
    let s = (2.0 * lambda).sqrt();
    let mk = |x: f64| -> Result<Equilibrium, NfError> {
        let spec = eigendecompose(&nf_jacobian(x, nu), false, tol)?;
        let n_stable = spec.count(SpectralClass::Stable);
        let n_unstable = spec.count(SpectralClass::Unstable);
        let stable_complex = spec.eigenvalues.iter().any(|z| z.re < 0.0 && z.im.abs() > spec.zero_threshold);
        Ok(Equilibrium { point: [x, 0.0, 0.0], eigenvalues: spec.eigenvalues, n_stable, n_unstable, saddle_focus: stable_complex && n_stable == 2 })
    };
    Ok([mk(-s)?, mk(s)?])
}

/// Bifurcation suggested by the center dimension of the reduced field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterClass {
    Transcritical,
    BogdanovTakens,
    NilpotentCodim3,
    Other,
}

pub fn classify_center(m: usize) -> CenterClass {
    match m {
        1 => CenterClass::Transcritical,
        2 => CenterClass::BogdanovTakens,
        3 => CenterClass::NilpotentCodim3,
        _ => CenterClass::Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_jet(g: [f64; 6]) -> PolyField {
        let mut f = PolyField::zero(3, 3, 3, 3);
        f.add_term(&[0, 1, 0, 0, 0, 0], &[1.0, 0.0, 0.0]);
        f.add_term(&[0, 0, 1, 0, 0, 0], &[0.0, 1.0, 0.0]);
        f.add_term(&[1, 0, 0, 1, 0, 0], &[0.0, 0.0, 1.0]);
        f.add_term(&[0, 1, 0, 0, 1, 0], &[0.0, 0.0, 1.0]);
        f.add_term(&[0, 0, 1, 0, 0, 1], &[0.0, 0.0, 1.0]);
        f.add_term(&[2, 0, 0, 0, 0, 0], &[0.0, 0.0, g[0]]);
        f.add_term(&[1, 1, 0, 0, 0, 0], &[0.0, 0.0, g[3]]);
        f
    }

    #[test]
    fn model_limit() {
        let f = model_jet([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let (jet, unf, res) = normal_form(&f, 1e-3, [0.8, -1.0, 0.0]).unwrap();
        assert_eq!(jet.frame, Matrix::identity(3));
        assert_eq!(unf.a, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(unf.eps_map.sub(&Matrix::identity(3)).max_abs() == 0.0);
        assert!((res.lambda_nf - 0.32).abs() < 1e-14);
        assert_eq!(res.nu_nf, 0.0);
        assert!(res.remainder_norm < 1e-12, "{}", res.remainder_norm);
    }

    #[test]
    fn remainder_shrinks_with_kappa() {
        let f = model_jet([1.5, 0.0, 0.0, 0.7, 0.0, 0.0]);
        let g = [0.5, -2.0, 0.3];
        let r1 = normal_form(&f, 1e-2, g).unwrap().2.remainder_norm;
        let r2 = normal_form(&f, 1e-3, g).unwrap().2.remainder_norm;
        assert!(r1 > 0.0 && (r2 / r1 - 0.1).abs() < 0.01, "{r1} {r2}");
    }

    #[test]
    fn fixed_points_half() {
        let [p1, p2] = nf_fixed_points(0.5, 0.0, &Tolerances::default()).unwrap();
        assert_eq!(p1.point, [-1.0, 0.0, 0.0]);
        assert_eq!((p1.n_stable, p1.n_unstable), (2, 1));
        assert_eq!((p2.n_stable, p2.n_unstable), (1, 2));
        assert!(p1.saddle_focus);
        assert!(nf_fixed_points(0.0, 0.0, &Tolerances::default()).is_err());
    }

    #[test]
    fn h1_square_elimination() {
        let mut f = model_jet([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        f.order = 2;
        f.add_term(&[2, 0, 0, 0, 0, 0], &[1.0, 0.0, 0.0]);
        let jet = eliminate_lower(&normalize_frame(&f).unwrap()).unwrap();
        assert_eq!(jet.transforms.len(), 2);
        // y₂ = x₂ + x₁², ẏ₂ = x₃ + 2x₁x₂ ⇒ z₃ = y₃ + 2y₁y₂
        let phi2 = &jet.transforms[1].phi.comps[2];
        assert!((phi2.coef(&Mono(vec![1, 1, 0, 0, 0, 0])) - 2.0).abs() < 1e-14);
    }
}
