//! Linearization of the coupled network `ẋ_p = f(x_p) − α Σ_q L_pq D x_q` at the
//! synchronous origin, its `v ⊗ x` block structure and the center/hyperbolic split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::{perturb_for_hyperbolicity, CouplingError, KERNEL_CUTOFF};
use crate::graphlab::{is_simple, laplacian, laplacian_spectrum, EigenChoice, Graph, GraphError};
use crate::numkit::{
    eigendecompose, flag_basis, kron, orthonormal_complement, solve, Matrix, NumError, Spectrum,
    Tolerances,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("Laplacian eigenvalue {eigenvalue} (index {index}) is not simple")]
    NotSimple { index: usize, eigenvalue: f64 },
    #[error("A − D has no generalized kernel")]
    NoKernel,
    #[error("expected a center subspace of dimension {expected}, found {found}")]
    CenterDimension { expected: usize, found: usize },
    #[error("hyperbolic block is singular: {0}")]
    NotHyperbolic(String),
    #[error("invalid design: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl NetError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Graph(e) => e.is_validation(),
            Self::Coupling(e) => e.is_validation(),
            Self::Num(e) => e.is_validation(),
            Self::Invalid(_) | Self::NotSimple { .. } => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDesign {
    pub graph: Graph,
    pub a: Matrix,
    pub d: Matrix,
    pub alpha_star: f64,
    /// Distinguished Laplacian eigenvalue.
    pub lambda: f64,
    /// Its position in the ascending Laplacian spectrum.
    pub eigen_index: usize,
    /// Unit 2-norm eigenvector, largest-magnitude entry positive.
    pub v: Vec<f64>,
    pub m: usize,
    /// Ascending Laplacian spectrum.
    pub laplacian_eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, `laplacian_eigenvectors[i]` for eigenvalue i.
    pub laplacian_eigenvectors: Vec<Vec<f64>>,
    /// Shift applied by the hyperbolicity perturbation (0 when none was needed).
    #[serde(default)]
    pub delta: f64,
}

impl NetworkDesign {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn nodes(&self) -> usize {
        self.graph.n()
    }

    /// `A − α* λ D`.
    pub fn critical_block(&self) -> Matrix {
        self.block(self.alpha_star, self.lambda)
    }

    pub fn block(&self, alpha: f64, lambda: f64) -> Matrix {
        self.a.sub(&self.d.scale(alpha * lambda))
    }

    pub fn validate(&self) -> Result<(), NetError> {
        let n = self.a.rows();
        if !self.a.is_square() || self.d.rows() != n || self.d.cols() != n {
            return Err(NetError::Invalid("A and D must be square of equal size".into()));
        }
        let nodes = self.graph.n();
        if self.v.len() != nodes
            || self.laplacian_eigenvalues.len() != nodes
            || self.laplacian_eigenvectors.len() != nodes
            || self.laplacian_eigenvectors.iter().any(|w| w.len() != nodes)
        {
            return Err(NetError::Invalid("eigen data does not match the graph size".into()));
        }
        if self.eigen_index >= nodes {
            return Err(NetError::Invalid("eigen_index out of range".into()));
        }
        if !(self.alpha_star.is_finite() && self.alpha_star > 0.0) {
            return Err(NetError::Invalid(format!("alpha_star = {}", self.alpha_star)));
        }
        Ok(())
    }
}

/// `I_N ⊗ A − α L ⊗ D`, node-major ordering.
pub fn assemble_linearization(net: &NetworkDesign, alpha: f64) -> Matrix {
    let nodes = net.nodes();
    kron(&Matrix::identity(nodes), &net.a).sub(&kron(&laplacian(&net.graph), &net.d).scale(alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpectrum {
    pub lambda: f64,
    pub spectrum: Spectrum,
}

/// Spectrum of `A − α λ_p D` for every Laplacian eigenvalue, ascending in λ.
pub fn block_spectrum(net: &NetworkDesign, alpha: f64, tol: &Tolerances) -> Result<Vec<BlockSpectrum>, NetError> {
    net.laplacian_eigenvalues
        .par_iter()
        .map(|&lambda| {
            let spectrum = eigendecompose(&net.block(alpha, lambda), false, tol)?;
            Ok(BlockSpectrum { lambda, spectrum })
        })
        .collect()
}

/// Builds the design with `α* = 1/λ` so the distinguished block is `A − D`.
///
/// If another block is not hyperbolic, `A` and `D` are shifted (see
/// [`perturb_for_hyperbolicity`]) and the shift is recorded in `delta`.
pub fn choose_alpha_star(a: &Matrix, d: &Matrix, graph: &Graph, which: EigenChoice, tol: &Tolerances) -> Result<NetworkDesign, NetError> {
    tol.validate()?;
    if !a.is_square() || d.rows() != a.rows() || d.cols() != a.cols() {
        return Err(NetError::Invalid("A and D must be square of equal size".into()));
    }
    let nodes = graph.n();
    let spec = laplacian_spectrum(graph, tol)?;
    let values = spec.real_values();
    let idx = which.resolve(nodes)?;
    let lambda = values[idx];
    if lambda <= tol.zero_eig * values[nodes - 1].max(1.0) {
        return Err(NetError::Invalid("distinguished eigenvalue must be positive".into()));
    }
    if !is_simple(&values, idx, tol.gap) {
        return Err(NetError::NotSimple { index: idx, eigenvalue: lambda });
    }
    let vecs = spec.eigenvectors.expect("symmetric path");
    let v = {
        let w = &vecs[idx];
        let lead = w.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        let s = if lead < 0.0 { -1.0 } else { 1.0 };
        w.iter().map(|x| x * s).collect::<Vec<_>>()
    };
    let alpha_star = 1.0 / lambda;

    let (basis, _) = flag_basis(&a.sub(d), KERNEL_CUTOFF)?;
    if basis.is_empty() {
        return Err(NetError::NoKernel);
    }
    let mut others: Vec<f64> = values.iter().enumerate().filter(|&(k, _)| k != idx).map(|(_, &x)| x).collect();
    others.push(lambda);
    let hp = perturb_for_hyperbolicity(a, d, alpha_star, &others, None, tol)?;

    Ok(NetworkDesign {
        graph: graph.clone(),
        a: hp.a,
        d: hp.d,
        alpha_star,
        lambda,
        eigen_index: idx,
        v,
        m: basis.len(),
        laplacian_eigenvalues: values,
        laplacian_eigenvectors: vecs,
        delta: hp.delta,
    })
}

/// Center/hyperbolic splitting of a matrix with a nilpotent center part.
///
/// Coordinates: `x = Ec u + Eh w` with `u = ec_dual x`, `w = eh_dual x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSplit {
    /// n×m, orthonormal, adapted to the kernel flag.
    pub ec: Matrix,
    /// n×(n−m), spans the complementary invariant subspace.
    pub eh: Matrix,
    /// m×n, rows of `π^c` in `Ec` coordinates.
    pub ec_dual: Matrix,
    /// (n−m)×n.
    pub eh_dual: Matrix,
    /// `π^c = Ec ec_dual`.
    pub proj_c: Matrix,
    /// m×m, strictly upper triangular.
    pub nilpotent_block: Matrix,
    /// (n−m)×(n−m), `M` restricted to `E^h`.
    pub hyperbolic_block: Matrix,
}

impl CenterSplit {
    pub fn m(&self) -> usize {
        self.ec.cols()
    }

    pub fn n(&self) -> usize {
        self.ec.rows()
    }
}

/// Splits `M` along its generalized kernel (dimension `m`) and the complementary
/// invariant subspace, via a Sylvester solve `N X − X H = −B` in the frame `[Ec Qh]`.
pub fn center_split(mat: &Matrix, m: usize, tol: &Tolerances) -> Result<CenterSplit, NetError> {
    if !mat.is_square() {
        return Err(NumError::NotSquare { op: "center_split", rows: mat.rows(), cols: mat.cols() }.into());
    }
    tol.validate()?;
    let n = mat.rows();
    let (basis, _) = flag_basis(mat, KERNEL_CUTOFF)?;
    if basis.len() != m {
        return Err(NetError::CenterDimension { expected: m, found: basis.len() });
    }
    let h = n - m;
    let ec = Matrix::from_cols(n, &basis);
    let qh = Matrix::from_cols(n, &orthonormal_complement(&basis, n));
    let nb = ec.transpose().matmul(mat).matmul(&ec);
    let bb = ec.transpose().matmul(mat).matmul(&qh);
    let hb = qh.transpose().matmul(mat).matmul(&qh);

    let x = if m == 0 || h == 0 {
        Matrix::zeros(m, h)
    } else {
        // Unknown X[i][j] at i*h + j.
        let mut op = Matrix::zeros(m * h, m * h);
        let mut rhs = vec![0.0; m * h];
        for i in 0..m {
            for j in 0..h {
                let row = i * h + j;
                for k in 0..m {
                    op[(row, k * h + j)] += nb[(i, k)];
                }
                for k in 0..h {
                    op[(row, i * h + k)] -= hb[(k, j)];
                }
                rhs[row] = -bb[(i, j)];
            }
        }
        let sol = solve(&op, &rhs).map_err(|e| NetError::NotHyperbolic(e.to_string()))?;
        Matrix::new(m, h, sol)?
    };
    if h > 0 {
        let spec = eigendecompose(&hb, false, tol)?;
        let thr = tol.zero_threshold(mat);
        if spec.eigenvalues.iter().any(|z| z.norm() <= thr) {
            return Err(NetError::CenterDimension { expected: m, found: m + 1 });
        }
    }
    let eh = ec.matmul(&x).add(&qh);
    let ec_dual = ec.transpose().sub(&x.matmul(&qh.transpose()));
    let eh_dual = qh.transpose();
    let proj_c = ec.matmul(&ec_dual);
    Ok(CenterSplit { ec, eh, ec_dual, eh_dual, proj_c, nilpotent_block: nb, hyperbolic_block: hb })
}

/// `Π^c = v vᵀ ⊗ π^c` on the full network state.
pub fn network_center_projection(net: &NetworkDesign, split: &CenterSplit) -> Matrix {
    let v = Matrix::from_cols(net.nodes(), &[net.v.clone()]);
    kron(&v.matmul(&v.transpose()), &split.proj_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{find_skew_directions, synthesize_d};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn diag_split() {
        let s = center_split(&Matrix::from_diag(&[0.0, -1.0]), 1, &tol()).unwrap();
        assert!(s.proj_c.sub(&Matrix::from_diag(&[1.0, 0.0])).max_abs() < 1e-14);
        assert!(center_split(&Matrix::from_diag(&[0.0, -1.0]), 2, &tol()).is_err());
    }

    #[test]
    fn projection_commutes() {
        let m = Matrix::from_rows(&[[0.0, 1.0, 2.0], [0.0, 0.0, -1.0], [0.0, 0.0, -3.0]]);
        let s = center_split(&m, 2, &tol()).unwrap();
        let p = &s.proj_c;
        assert!(p.matmul(p).sub(p).max_abs() < 1e-12);
        assert!(p.matmul(&m).sub(&m.matmul(p)).max_abs() < 1e-12);
        assert!(s.nilpotent_block.matmul(&s.nilpotent_block).max_abs() < 1e-12);
    }

    #[test]
    fn path2_alpha() {
        let a = Matrix::from_diag(&[1.0, -2.0]);
        let d = Matrix::from_diag(&[1.0, 0.5]);
        let net = choose_alpha_star(&a, &d, &Graph::path(2), EigenChoice::Largest, &tol()).unwrap();
        assert!((net.alpha_star - 0.5).abs() < 1e-14);
        assert_eq!(net.m, 1);
    }

    #[test]
    fn star9_node4() {
        let a = Matrix::from_rows(&[
            [1.0, 1.0, 0.0, 0.0],
            [-1.0, 1.0, 1.0, 0.0],
            [0.0, -1.0, 1.0, 16.94],
            [1.0, -4.24, -4.24, -17.94],
        ]);
        let cert = find_skew_directions(&a, Some(3), &tol()).unwrap();
        let des = synthesize_d(&a, &cert, Some(9.24), &tol()).unwrap();
        let net = choose_alpha_star(&a, &des.d, &Graph::star(8), EigenChoice::Largest, &tol()).unwrap();
        assert!((net.alpha_star - 1.0 / 9.0).abs() < 1e-12);
        assert_eq!(net.m, 3);
        let blocks = block_spectrum(&net, net.alpha_star, &tol()).unwrap();
        let last = blocks.last().unwrap();
        assert_eq!(last.spectrum.eigenvalues.iter().filter(|z| z.norm() < 1e-8).count(), 3);
        for b in &blocks[..blocks.len() - 1] {
            assert!(b.spectrum.is_hyperbolic());
        }
    }
}
