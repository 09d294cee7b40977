//! Diffusion-matrix synthesis.
//!
//! Given a Hurwitz `A` with m orthonormal directions of positive Rayleigh quotient,
//! build a positive-definite `D` such that `A − D` has an m-dimensional generalized
//! kernel: on the directions `D xᵢ = A xᵢ − Σ_{j<i} p_{j,i} xⱼ` with
//! `p_{j,i} = xⱼᵀ(A + Aᵀ)xᵢ`, and `D = c·I` on the orthogonal complement.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{
    dot, eigendecompose, flag_basis, hurwitz_margin, is_positive_definite, norm2, null_space,
    orthonormal_complement, Matrix, NumError, Tolerances,
};

/// Relative singular-value cutoff for kernel rank decisions.
pub const KERNEL_CUTOFF: f64 = 1e-8;
/// Upper limit for the complement scale search.
pub const C_CAP: f64 = 1e6;
/// Resolution of the complement scale search.
pub const C_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("certificate has m = 0: A shows no skewness")]
    NoSkewness,
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("no admissible c below {cap}")]
    NoAdmissibleC { cap: f64 },
    #[error("c = {c} is not admissible: {reason}")]
    InadmissibleC { c: f64, reason: String },
    #[error("D is not positive definite (min eigenvalue of symmetric part {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("generalized kernel extraction failed: {0}")]
    Kernel(String),
    #[error("perturbation takes A out of the Hurwitz class (margin {margin:.3e})")]
    LeavesHurwitz { margin: f64 },
    #[error("no delta in the grid makes all non-distinguished blocks hyperbolic")]
    GridExhausted,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl CouplingError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Num(e) => e.is_validation(),
            Self::InvalidCertificate(_) | Self::Invalid(_) | Self::NoSkewness | Self::InadmissibleC { .. } => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkewSource {
    /// Coordinate axes with positive diagonal entries.
    CoordinateAxes,
    /// Eigenvectors of the symmetric part with positive eigenvalues.
    SymmetricEigen,
    /// Supplied by the caller.
    Given,
    /// Recovered from a generalized kernel.
    Recovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewnessCertificate {
    pub m: usize,
    pub directions: Vec<Vec<f64>>,
    /// `⟨xᵢ, A xᵢ⟩`.
    pub rayleigh: Vec<f64>,
    pub source: SkewSource,
    pub requested: Option<usize>,
    /// Number of positive eigenvalues of the symmetric part.
    pub achievable: usize,
}

impl SkewnessCertificate {
    /// Validates caller-supplied directions against `a`.
    pub fn from_directions(a: &Matrix, directions: Vec<Vec<f64>>, tol: &Tolerances) -> Result<Self, CouplingError> {
        let n = a.rows();
        if !a.is_square() {
            return Err(NumError::NotSquare { op: "certificate", rows: a.rows(), cols: a.cols() }.into());
        }
        for (i, x) in directions.iter().enumerate() {
            if x.len() != n {
                return Err(CouplingError::InvalidCertificate(format!("direction {i} has length {}", x.len())));
            }
            for (j, y) in directions.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(x, y) - target).abs() > 1e-10 {
                    return Err(CouplingError::InvalidCertificate(format!("directions {i},{j} not orthonormal")));
                }
            }
        }
        let rayleigh: Vec<f64> = directions.iter().map(|x| dot(x, &a.matvec(x))).collect();
        if let Some(i) = rayleigh.iter().position(|&r| r <= tol.posdef_margin) {
            return Err(CouplingError::InvalidCertificate(format!(
                "direction {i} has non-positive Rayleigh quotient {}",
                rayleigh[i]
            )));
        }
        let achievable = positive_symmetric_count(a, tol)?;
        Ok(Self { m: directions.len(), directions, rayleigh, source: SkewSource::Given, requested: None, achievable })
    }

    pub fn x_matrix(&self, n: usize) -> Matrix {
        Matrix::from_cols(n, &self.directions)
    }
}

fn positive_eigen_threshold(s: &Matrix, tol: &Tolerances) -> f64 {
    tol.posdef_margin * s.norm_inf().max(1.0)
}

fn positive_symmetric_count(a: &Matrix, tol: &Tolerances) -> Result<usize, NumError> {
    let s = a.symmetric_part();
    let thr = positive_eigen_threshold(&s, tol);
    Ok(eigendecompose(&s, true, tol)?.eigenvalues.iter().filter(|z| z.re > thr).count())
}

/// Orthonormal directions with `⟨x, A x⟩ > 0`.
///
/// The achievable m is the number of positive eigenvalues of `(A + Aᵀ)/2`. When that
/// many (or the requested number of) coordinate axes already have positive diagonal
/// entries they are used, since they keep `D` sparse; otherwise the symmetric-part
/// eigenvectors are returned in order of decreasing eigenvalue.
pub fn find_skew_directions(a: &Matrix, want_m: Option<usize>, tol: &Tolerances) -> Result<SkewnessCertificate, CouplingError> {
    if !a.is_square() {
        return Err(NumError::NotSquare { op: "find_skew_directions", rows: a.rows(), cols: a.cols() }.into());
    }
    let n = a.rows();
    let s = a.symmetric_part();
    let thr = positive_eigen_threshold(&s, tol);
    let spec = eigendecompose(&s, true, tol)?;
    let vecs = spec.eigenvectors.as_ref().expect("symmetric path");
    let positive: Vec<usize> = (0..n).rev().filter(|&k| spec.eigenvalues[k].re > thr).collect();
    let achievable = positive.len();
    let m = want_m.map_or(achievable, |w| w.min(achievable));

    let mut axes: Vec<usize> = (0..n).filter(|&i| a[(i, i)] > thr).collect();
    axes.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let (directions, source) = if m > 0 && axes.len() >= m {
        let mut pick: Vec<usize> = axes[..m].to_vec();
        pick.sort_unstable();
        let dirs: Vec<Vec<f64>> = pick
            .iter()
            .map(|&i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        (dirs, SkewSource::CoordinateAxes)
    } else {
        (positive[..m].iter().map(|&k| vecs[k].clone()).collect(), SkewSource::SymmetricEigen)
    };
    let rayleigh = directions.iter().map(|x: &Vec<f64>| dot(x, &a.matvec(x))).collect();
    Ok(SkewnessCertificate { m, directions, rayleigh, source, requested: want_m, achievable })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDesign {
    pub a: Matrix,
    pub d: Matrix,
    /// Strictly upper triangular, `(A − D) X = X P`.
    pub p: Matrix,
    /// n×m, orthonormal columns.
    pub x: Matrix,
    /// n×(n−m), orthonormal complement.
    pub y: Matrix,
    pub c: f64,
    pub m: usize,
    /// Geometric multiplicity of 0 in `A − D`.
    pub kernel_geom: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignAudit {
    /// `‖(A − D)X − XP‖∞`.
    pub xp_residual: f64,
    pub posdef_min_eig: f64,
    pub generalized_kernel: usize,
    pub kernel_geom: usize,
    /// Largest real part outside the kernel.
    pub max_re_nonkernel: f64,
}

fn p_matrix(a: &Matrix, x: &Matrix) -> Matrix {
    let m = x.cols();
    let s = a.add(&a.transpose());
    let sx = s.matmul(x);
    let mut p = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            p[(i, j)] = dot(&x.col(i), &sx.col(j));
        }
    }
    p
}

/// `D = (A X − X P) Xᵀ + c Y Yᵀ`.
fn assemble_d(a: &Matrix, x: &Matrix, p: &Matrix, y: &Matrix, c: f64) -> Matrix {
    let dx = a.matmul(x).sub(&x.matmul(p));
    dx.matmul(&x.transpose()).add(&y.matmul(&y.transpose()).scale(c))
}

fn nonkernel_max_re(a: &Matrix, y: &Matrix, c: f64, tol: &Tolerances) -> Result<f64, NumError> {
    if y.cols() == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let q = y.transpose().matmul(a).matmul(y).shift(-c);
    Ok(eigendecompose(&q, false, tol)?.max_real())
}

fn admissible(a: &Matrix, x: &Matrix, p: &Matrix, y: &Matrix, c: f64, tol: &Tolerances) -> Result<Result<(), String>, NumError> {
    let d = assemble_d(a, x, p, y, c);
    let pd = is_positive_definite(&d, tol)?;
    if !pd.positive {
        return Ok(Err(format!("D not positive definite (min eig {:.3e})", pd.min_eig)));
    }
    let re = nonkernel_max_re(a, y, c, tol)?;
    let thr = tol.zero_eig * a.norm_inf().max(1.0);
    if re >= -thr {
        return Ok(Err(format!("non-kernel eigenvalue with Re = {re:.3e}")));
    }
    Ok(Ok(()))
}

/// Smallest admissible c on a 1e-3 grid; admissibility is monotone in c.
fn minimal_c(a: &Matrix, x: &Matrix, p: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<f64, CouplingError> {
    let ok = |c: f64| -> Result<bool, CouplingError> { Ok(admissible(a, x, p, y, c, tol)?.is_ok()) };
    let mut hi = 1.0;
    while !ok(hi)? {
        hi *= 2.0;
        if hi > C_CAP {
            if ok(C_CAP)? {
                hi = C_CAP;
                break;
            }
            return Err(CouplingError::NoAdmissibleC { cap: C_CAP });
        }
    }
    let mut lo = 0.0;
    while hi - lo > C_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn kernel_geom(m: &Matrix) -> Result<usize, NumError> {
    let norm = m.norm_inf();
    Ok(null_space(m, KERNEL_CUTOFF * if norm > 0.0 { norm } else { 1.0 })?.len())
}

fn build_design(a: &Matrix, x: Matrix, y: Matrix, c: Option<f64>, tol: &Tolerances) -> Result<CouplingDesign, CouplingError> {
    let p = p_matrix(a, &x);
    let m = x.cols();
    let c = match c {
        Some(c) => {
            if !(c.is_finite()) {
                return Err(CouplingError::Invalid(format!("c = {c}")));
            }
            if let Err(reason) = admissible(a, &x, &p, &y, c, tol)? {
                return Err(CouplingError::InadmissibleC { c, reason });
            }
            c
        }
        None if y.cols() == 0 => {
            if let Err(reason) = admissible(a, &x, &p, &y, 0.0, tol)? {
                return Err(CouplingError::InadmissibleC { c: 0.0, reason });
            }
            0.0
        }
        None => minimal_c(a, &x, &p, &y, tol)?,
    };
    let d = assemble_d(a, &x, &p, &y, c);
    let kg = kernel_geom(&a.sub(&d))?;
    Ok(CouplingDesign { a: a.clone(), d, p, x, y, c, m, kernel_geom: kg })
}

pub fn synthesize_d(a: &Matrix, cert: &SkewnessCertificate, c: Option<f64>, tol: &Tolerances) -> Result<CouplingDesign, CouplingError> {
    tol.validate()?;
    if cert.m == 0 {
        return Err(CouplingError::NoSkewness);
    }
    let n = a.rows();
    if !a.is_square() || cert.directions.iter().any(|x| x.len() != n) {
        return Err(CouplingError::InvalidCertificate("dimension mismatch with A".into()));
    }
    let x = cert.x_matrix(n);
    let y = Matrix::from_cols(n, &orthonormal_complement(&cert.directions, n));
    build_design(a, x, y, c, tol)
}

impl CouplingDesign {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn a_minus_d(&self) -> Matrix {
        self.a.sub(&self.d)
    }

    pub fn audit(&self, tol: &Tolerances) -> Result<DesignAudit, CouplingError> {
        let amd = self.a_minus_d();
        let xp_residual = amd.matmul(&self.x).sub(&self.x.matmul(&self.p)).max_abs();
        let posdef_min_eig = is_positive_definite(&self.d, tol)?.min_eig;
        let (basis, _) = flag_basis(&amd, KERNEL_CUTOFF)?;
        Ok(DesignAudit {
            xp_residual,
            posdef_min_eig,
            generalized_kernel: basis.len(),
            kernel_geom: kernel_geom(&amd)?,
            max_re_nonkernel: nonkernel_max_re(&self.a, &self.y, self.c, tol)?,
        })
    }
}

/// Orthonormal directions spanning the generalized kernel of `A − D`, ordered along
/// its kernel flag; each satisfies `⟨x, A x⟩ = ⟨x, D x⟩ > 0`.
pub fn recover_skew_directions(a: &Matrix, d: &Matrix, tol: &Tolerances) -> Result<SkewnessCertificate, CouplingError> {
    let pd = is_positive_definite(d, tol)?;
    if !pd.positive {
        return Err(CouplingError::NotPositiveDefinite { min_eig: pd.min_eig });
    }
    if a.rows() != d.rows() || a.cols() != d.cols() {
        return Err(NumError::Shape { op: "recover_skew_directions", detail: "A and D differ in shape".into() }.into());
    }
    let (basis, _) = flag_basis(&a.sub(d), KERNEL_CUTOFF)?;
    if basis.is_empty() {
        return Err(CouplingError::Kernel("A − D has no kernel under the rank cutoff".into()));
    }
    let rayleigh: Vec<f64> = basis.iter().map(|x| dot(x, &a.matvec(x))).collect();
    if let Some(i) = rayleigh.iter().position(|&r| r <= 0.0) {
        return Err(CouplingError::Kernel(format!("direction {i} has Rayleigh quotient {}", rayleigh[i])));
    }
    let achievable = positive_symmetric_count(a, tol)?;
    Ok(SkewnessCertificate { m: basis.len(), directions: basis, rayleigh, source: SkewSource::Recovered, requested: None, achievable })
}

/// `A ↦ A + Σ εᵢ xᵢ xᵢ₊₁ᵀ`, making every `p_{i,i+1}` nonzero so that `A − D` is a single
/// Jordan block on the kernel. The sign of each εᵢ follows the existing `p_{i,i+1}`.
pub fn perturb_for_single_kernel(design: &CouplingDesign, eps: f64, tol: &Tolerances) -> Result<CouplingDesign, CouplingError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CouplingError::Invalid(format!("eps must be positive, got {eps}")));
    }
    let n = design.n();
    let mut a = design.a.clone();
    for i in 0..design.m.saturating_sub(1) {
        let pi = design.p[(i, i + 1)];
        let e = if pi < 0.0 { -eps } else { eps };
        let (xi, xj) = (design.x.col(i), design.x.col(i + 1));
        for r in 0..n {
            for c in 0..n {
                a[(r, c)] += e * xi[r] * xj[c];
            }
        }
    }
    let before = hurwitz_margin(&design.a, tol)?;
    if before > 0.0 {
        let after = hurwitz_margin(&a, tol)?;
        if after <= 0.0 {
            return Err(CouplingError::LeavesHurwitz { margin: after });
        }
    }
    let p = p_matrix(&a, &design.x);
    let c = if admissible(&a, &design.x, &p, &design.y, design.c, tol)?.is_ok() {
        Some(design.c)
    } else {
        None
    };
    build_design(&a, design.x.clone(), design.y.clone(), c, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicPerturbation {
    pub a: Matrix,
    pub d: Matrix,
    pub delta: f64,
    /// Smallest |Re λ| over the non-distinguished blocks after the shift.
    pub margin: f64,
}

/// Blocks `A − α* λᵢ D` for the non-distinguished λᵢ, with the δ-shift applied.
fn shifted_blocks_ok(a: &Matrix, d: &Matrix, alpha: f64, lambdas: &[f64], delta: f64, tol: &Tolerances) -> Result<Option<f64>, NumError> {
    let lk = *lambdas.last().expect("non-empty");
    let mut margin = f64::INFINITY;
    for &li in &lambdas[..lambdas.len() - 1] {
        let block = a.sub(&d.scale(alpha * li)).shift((1.0 - li / lk) * delta);
        let spec = eigendecompose(&block, false, tol)?;
        if !spec.is_hyperbolic() {
            return Ok(None);
        }
        margin = margin.min(spec.hyperbolic_margin());
    }
    Ok(Some(margin))
}

/// `Ã = A + δI`, `D̃ = D + δ/(α*λ_K)·I`, leaving the distinguished block unchanged.
///
/// With `delta = None` the smallest |δ| in {0, ±1e-6, ±1e-5, …, ±1e-1} (negative first)
/// that makes every non-distinguished block hyperbolic is used.
pub fn perturb_for_hyperbolicity(
    a: &Matrix,
    d: &Matrix,
    alpha_star: f64,
    lambdas: &[f64],
    delta: Option<f64>,
    tol: &Tolerances,
) -> Result<HyperbolicPerturbation, CouplingError> {
    let Some(&lk) = lambdas.last() else {
        return Err(CouplingError::Invalid("empty eigenvalue list".into()));
    };
    if !(lk > 0.0 && alpha_star > 0.0) {
        return Err(CouplingError::Invalid("distinguished eigenvalue and alpha* must be positive".into()));
    }
    let apply = |delta: f64| -> Result<(Matrix, Matrix), CouplingError> {
        let at = a.shift(delta);
        let dt = d.shift(delta / (alpha_star * lk));
        let pd = is_positive_definite(&dt, tol)?;
        if !pd.positive {
            return Err(CouplingError::NotPositiveDefinite { min_eig: pd.min_eig });
        }
        Ok((at, dt))
    };
    let candidates: Vec<f64> = match delta {
        Some(dl) => vec![dl],
        None => std::iter::once(0.0)
            .chain((-6..=-1).flat_map(|e| {
                let m = 10f64.powi(e);
                [-m, m]
            }))
            .collect(),
    };
    for dl in candidates {
        if let Some(margin) = shifted_blocks_ok(a, d, alpha_star, lambdas, dl, tol)? {
            match apply(dl) {
                Ok((at, dt)) => return Ok(HyperbolicPerturbation { a: at, d: dt, delta: dl, margin }),
                Err(e) if delta.is_some() => return Err(e),
                Err(_) => continue,
            }
        } else if let Some(dl) = delta {
            let (at, dt) = apply(dl)?;
            return Ok(HyperbolicPerturbation { a: at, d: dt, delta: dl, margin: 0.0 });
        }
    }
    Err(CouplingError::GridExhausted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepEventKind {
    /// A real eigenvalue crosses the imaginary axis through the origin.
    RealCrossing,
    /// A complex-conjugate pair crosses the imaginary axis away from the origin.
    ComplexPairCrossing,
    /// An eigenvalue reaches 0.
    ArrivalAtZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEvent {
    /// Interpolated β for crossings, grid β for arrivals.
    pub beta: f64,
    pub kind: SweepEventKind,
    pub branch: usize,
    /// Imaginary part at the event (|Im| for pairs).
    pub imag: f64,
    /// True when the real part goes from negative to non-negative.
    pub destabilizing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAmbiguity {
    pub beta: f64,
    pub branch: usize,
    pub chosen: f64,
    pub runner_up: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub betas: Vec<f64>,
    /// `eigenvalues[k][b]`: branch b at `betas[k]`.
    pub eigenvalues: Vec<Vec<Complex64>>,
    pub events: Vec<SweepEvent>,
    pub ambiguities: Vec<SweepAmbiguity>,
}

impl SweepResult {
    pub fn count_positive(&self, step: usize, thr: f64) -> usize {
        self.eigenvalues[step].iter().filter(|z| z.re > thr).count()
    }

    pub fn events_of(&self, kind: SweepEventKind) -> impl Iterator<Item = &SweepEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

/// `steps + 1` equispaced points on [0, 1].
pub fn uniform_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 / steps as f64).collect()
}

/// Spectra of `A − βD` on `grid`, tracked by nearest-neighbour pairing.
pub fn beta_sweep(a: &Matrix, d: &Matrix, grid: &[f64], tol: &Tolerances) -> Result<SweepResult, CouplingError> {
    if grid.is_empty() {
        return Err(CouplingError::Invalid("empty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CouplingError::Invalid("grid must be strictly increasing".into()));
    }
    let spectra: Vec<(Vec<Complex64>, f64)> = grid
        .par_iter()
        .map(|&b| {
            let m = a.sub(&d.scale(b));
            let thr = tol.gap * m.norm_inf().max(1.0);
            eigendecompose(&m, false, tol).map(|s| (s.eigenvalues, thr))
        })
        .collect::<Result<_, _>>()?;

    let nb = spectra[0].0.len();
    let mut tracks: Vec<Vec<Complex64>> = vec![spectra[0].0.clone()];
    let mut ambiguities = Vec::new();
    for (k, (cur, thr)) in spectra.iter().enumerate().skip(1) {
        let prev = &tracks[k - 1];
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(nb * nb);
        for (b, p) in prev.iter().enumerate() {
            for (j, c) in cur.iter().enumerate() {
                pairs.push(((p - c).norm(), b, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut assigned = vec![usize::MAX; nb];
        let mut used = vec![false; nb];
        let mut left = nb;
        for &(_, b, j) in &pairs {
            if left == 0 {
                break;
            }
            if assigned[b] == usize::MAX && !used[j] {
                assigned[b] = j;
                used[j] = true;
                left -= 1;
            }
        }
        let next: Vec<Complex64> = assigned.iter().map(|&j| cur[j]).collect();
        for b in 0..nb {
            let chosen = (prev[b] - next[b]).norm();
            let runner_up = cur
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != assigned[b])
                .map(|(_, c)| (prev[b] - c).norm())
                .fold(f64::INFINITY, f64::min);
            if chosen > *thr && runner_up < 2.0 * chosen {
                ambiguities.push(SweepAmbiguity { beta: grid[k], branch: b, chosen, runner_up });
            }
        }
        tracks.push(next);
    }

    let mut events = Vec::new();
    for k in 1..grid.len() {
        let thr = spectra[k].1;
        let thr_prev = spectra[k - 1].1;
        for b in 0..nb {
            let (za, zb) = (tracks[k - 1][b], tracks[k][b]);
            if zb.norm() <= thr && za.norm() > thr_prev {
                events.push(SweepEvent { beta: grid[k], kind: SweepEventKind::ArrivalAtZero, branch: b, imag: 0.0, destabilizing: false });
                continue;
            }
            if zb.norm() <= thr || za.norm() <= thr_prev {
                continue;
            }
            let up = za.re < 0.0 && zb.re >= 0.0;
            let down = za.re >= 0.0 && zb.re < 0.0;
            if !(up || down) {
                continue;
            }
            let s = za.re / (za.re - zb.re);
            let beta = grid[k - 1] + s * (grid[k] - grid[k - 1]);
            let imag = za.im + s * (zb.im - za.im);
            if imag.abs() > thr {
                if imag > 0.0 {
                    events.push(SweepEvent { beta, kind: SweepEventKind::ComplexPairCrossing, branch: b, imag, destabilizing: up });
                }
            } else {
                events.push(SweepEvent { beta, kind: SweepEventKind::RealCrossing, branch: b, imag: 0.0, destabilizing: up });
            }
        }
    }
    events.sort_by(|x, y| x.beta.total_cmp(&y.beta).then(x.branch.cmp(&y.branch)));
    Ok(SweepResult { betas: grid.to_vec(), eigenvalues: tracks, events, ambiguities })
}

/// Largest principal-angle sine between two subspaces given by orthonormal bases.
pub fn subspace_distance(u: &[Vec<f64>], v: &[Vec<f64>]) -> f64 {
    if u.len() != v.len() {
        return 1.0;
    }
    // ‖(I − V Vᵀ) U‖₂ bounded by the worst column residual times sqrt(k).
    let mut worst: f64 = 0.0;
    for x in u {
        let mut r = x.clone();
        for y in v {
            let a = dot(x, y);
            for (ri, yi) in r.iter_mut().zip(y) {
                *ri -= a * yi;
            }
        }
        worst = worst.max(norm2(&r));
    }
    (worst * (u.len() as f64).sqrt()).min(1.0)
}
