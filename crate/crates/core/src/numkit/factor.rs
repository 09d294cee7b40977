use serde::{Deserialize, Serialize};

use super::eigen::eigendecompose;
use super::{dot, norm2, require_square, Matrix, NumError, Tolerances};

/// LU factorization with partial pivoting, packed in one matrix.
struct Lu {
    lu: Matrix,
    piv: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn lu(a: &Matrix) -> Lu {
    let n = a.rows();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let scale = a.norm_inf().max(f64::MIN_POSITIVE);
    let mut singular = false;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs())).unwrap();
        if p != k {
            for j in 0..n {
                let t = lu[(p, j)];
                lu[(p, j)] = lu[(k, j)];
                lu[(k, j)] = t;
            }
            piv.swap(p, k);
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        if pivot.abs() <= 1e-14 * scale {
            singular = true;
            continue;
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
            }
        }
    }
    Lu { lu, piv, sign, singular }
}

impl Lu {
    fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `a x = b` for a single right-hand side.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, NumError> {
    let n = require_square("solve", a)?;
    if b.len() != n {
        return Err(NumError::Shape { op: "solve", detail: format!("rhs length {} vs {n}", b.len()) });
    }
    let f = lu(a);
    if f.singular {
        return Err(NumError::Singular { op: "solve" });
    }
    Ok(f.solve_vec(b))
}

/// Solves `a X = b` column by column.
pub fn lu_solve(a: &Matrix, b: &Matrix) -> Result<Matrix, NumError> {
    let n = require_square("lu_solve", a)?;
    if b.rows() != n {
        return Err(NumError::Shape { op: "lu_solve", detail: format!("rhs rows {} vs {n}", b.rows()) });
    }
    let f = lu(a);
    if f.singular {
        return Err(NumError::Singular { op: "lu_solve" });
    }
    let mut x = Matrix::zeros(n, b.cols());
    for j in 0..b.cols() {
        x.set_col(j, &f.solve_vec(&b.col(j)));
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix, NumError> {
    let n = require_square("inverse", a)?;
    lu_solve(a, &Matrix::identity(n))
}

pub fn determinant(a: &Matrix) -> Result<f64, NumError> {
    let n = require_square("determinant", a)?;
    let f = lu(a);
    Ok(f.sign * (0..n).map(|i| f.lu[(i, i)]).product::<f64>())
}

/// Lower-triangular `L` with `L Lᵀ = a`; fails unless `a` is symmetric positive definite.
pub fn cholesky(a: &Matrix) -> Result<Matrix, NumError> {
    let n = require_square("cholesky", a)?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(NumError::Singular { op: "cholesky" });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosDefReport {
    pub positive: bool,
    /// Minimum eigenvalue of the symmetric part.
    pub min_eig: f64,
}

/// Definiteness of the quadratic form `xᵀ M x`, judged on the symmetric part.
pub fn is_positive_definite(m: &Matrix, tol: &Tolerances) -> Result<PosDefReport, NumError> {
    require_square("is_positive_definite", m)?;
    let spec = eigendecompose(&m.symmetric_part(), true, tol)?;
    let min_eig = spec.eigenvalues.first().map_or(f64::INFINITY, |z| z.re);
    Ok(PosDefReport { positive: min_eig > tol.posdef_margin, min_eig })
}

/// `M₁₁ − M₁₂ M₂₂⁻¹ M₂₁` with the leading block of size `split`.
pub fn schur_complement(m: &Matrix, split: usize) -> Result<Matrix, NumError> {
    let n = require_square("schur_complement", m)?;
    if split == 0 || split >= n {
        return Err(NumError::Shape { op: "schur_complement", detail: format!("split {split} of {n}") });
    }
    let m11 = m.block(0, split, 0, split);
    let m12 = m.block(0, split, split, n);
    let m21 = m.block(split, n, 0, split);
    let m22 = m.block(split, n, split, n);
    let x = lu_solve(&m22, &m21).map_err(|_| NumError::Singular { op: "schur_complement" })?;
    Ok(m11.sub(&m12.matmul(&x)))
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut k = Matrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == 0.0 {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    k[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSchmidt {
    /// Orthonormal output, same span as the input prefix by prefix.
    pub basis: Vec<Vec<f64>>,
    /// `coeffs[i][j]` (j < i): `yᵢ = xᵢ − Σⱼ coeffs[i][j]·yⱼ` with `yⱼ` the unnormalized orthogonal vectors.
    pub coeffs: Vec<Vec<f64>>,
    /// Norms of the unnormalized `yᵢ`.
    pub norms: Vec<f64>,
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Result<GramSchmidt, NumError> {
    let Some(first) = vectors.first() else {
        return Ok(GramSchmidt { basis: vec![], coeffs: vec![], norms: vec![] });
    };
    let n = first.len();
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let mut coeffs = Vec::with_capacity(vectors.len());
    for (i, x) in vectors.iter().enumerate() {
        if x.len() != n {
            return Err(NumError::Shape { op: "gram_schmidt", detail: format!("vector {i} has length {}", x.len()) });
        }
        let mut y = x.clone();
        let mut alpha = vec![0.0; i];
        for _pass in 0..2 {
            for (j, yj) in ys.iter().enumerate() {
                let a = dot(&y, yj) / dot(yj, yj);
                alpha[j] += a;
                for (yk, yjk) in y.iter_mut().zip(yj) {
                    *yk -= a * yjk;
                }
            }
        }
        if norm2(&y) <= 1e-10 * norm2(x).max(f64::MIN_POSITIVE) {
            return Err(NumError::RankDeficient { op: "gram_schmidt", rank: i, expected: vectors.len() });
        }
        ys.push(y);
        coeffs.push(alpha);
    }
    let norms: Vec<f64> = ys.iter().map(|y| norm2(y)).collect();
    let basis = ys.iter().zip(&norms).map(|(y, &nr)| y.iter().map(|v| v / nr).collect()).collect();
    Ok(GramSchmidt { basis, coeffs, norms })
}

/// Thin SVD `a = U diag(s) Vᵀ` by one-sided Jacobi; `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(a: &Matrix) -> Result<Svd, NumError> {
    let (r, c) = (a.rows(), a.cols());
    let mut u = a.clone();
    let mut v = Matrix::identity(c);
    let max_sweeps = 100 * c * c + 10;
    // Columns below this squared norm are numerically zero; rotating them only churns roundoff.
    let floor = (f64::EPSILON * a.norm_fro()).powi(2);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..r {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || alpha.min(beta) <= floor {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + zeta.hypot(1.0)) };
                let cs = 1.0 / t.hypot(1.0);
                let sn = cs * t;
                for i in 0..r {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = cs * up - sn * uq;
                    u[(i, q)] = sn * up + cs * uq;
                }
                for i in 0..c {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = cs * vp - sn * vq;
                    v[(i, q)] = sn * vp + cs * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumError::NoConvergence { algo: "jacobi-svd", iterations: max_sweeps });
    }
    let s: Vec<f64> = (0..c).map(|j| norm2(&u.col(j))).collect();
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
    let mut uu = Matrix::zeros(r, c);
    let mut vv = Matrix::zeros(c, c);
    let mut ss = Vec::with_capacity(c);
    for (k, &j) in order.iter().enumerate() {
        let sj = s[j];
        for i in 0..r {
            uu[(i, k)] = if sj > 0.0 { u[(i, j)] / sj } else { 0.0 };
        }
        for i in 0..c {
            vv[(i, k)] = v[(i, j)];
        }
        ss.push(sj);
    }
    Ok(Svd { u: uu, s: ss, v: vv })
}

pub fn singular_values(a: &Matrix) -> Result<Vec<f64>, NumError> {
    Ok(svd(a)?.s)
}

/// Orthonormal basis of `{x : ‖a x‖ ≲ cutoff}` (right singular vectors with σ ≤ cutoff).
pub fn null_space(a: &Matrix, cutoff: f64) -> Result<Vec<Vec<f64>>, NumError> {
    let d = svd(a)?;
    Ok((0..a.cols()).filter(|&k| d.s[k] <= cutoff).map(|k| d.v.col(k)).collect())
}

/// Orthonormal basis adapted to the flag `ker M ⊂ ker M² ⊂ …` of the generalized kernel.
///
/// Levels are computed as iterated nullspaces (`ker Mᵏ = {x : M x ∈ ker Mᵏ⁻¹}`), which
/// keeps every rank decision on `M` itself rather than on its powers. Returns the basis
/// and the size of each level; `M` restricted to the basis is strictly upper triangular.
pub fn flag_basis(m: &Matrix, rel_cutoff: f64) -> Result<(Vec<Vec<f64>>, Vec<usize>), NumError> {
    let n = require_square("flag_basis", m)?;
    let norm = m.norm_inf();
    let cutoff = rel_cutoff * if norm > 0.0 { norm } else { 1.0 };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut levels = Vec::new();
    while basis.len() < n {
        // (I − B Bᵀ) M
        let mut pm = m.clone();
        for b in &basis {
            let bt_m: Vec<f64> = (0..n).map(|j| (0..n).map(|i| b[i] * m[(i, j)]).sum()).collect();
            for i in 0..n {
                for j in 0..n {
                    pm[(i, j)] -= b[i] * bt_m[j];
                }
            }
        }
        let kernel = null_space(&pm, cutoff)?;
        let new_dim = kernel.len().saturating_sub(basis.len());
        if new_dim == 0 {
            break;
        }
        let mut projected = Matrix::from_cols(n, &kernel);
        for j in 0..kernel.len() {
            let mut col = projected.col(j);
            for _ in 0..2 {
                for b in &basis {
                    let a = dot(&col, b);
                    for (c, bi) in col.iter_mut().zip(b) {
                        *c -= a * bi;
                    }
                }
            }
            projected.set_col(j, &col);
        }
        let d = svd(&projected)?;
        for k in 0..new_dim {
            basis.push(d.u.col(k));
        }
        levels.push(new_dim);
    }
    Ok((basis, levels))
}

/// Orthonormal completion of an orthonormal set to a basis of ℝⁿ, greedy over the
/// coordinate axes with the largest residual.
pub fn orthonormal_complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    while all.len() < n {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..n {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            for _ in 0..2 {
                for b in &all {
                    let a = dot(&r, b);
                    for (rk, bk) in r.iter_mut().zip(b) {
                        *rk -= a * bk;
                    }
                }
            }
            let nr = norm2(&r);
            if best.as_ref().map_or(true, |(bn, _)| nr > *bn + 1e-12) {
                best = Some((nr, r));
            }
        }
        let (nr, r) = best.expect("n > 0");
        let v: Vec<f64> = r.iter().map(|x| x / nr).collect();
        all.push(v.clone());
        out.push(v);
    }
    out
}
