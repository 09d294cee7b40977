#![allow(dead_code)]

use nilnet::cmred::{compose, random_nonlinearity, CenterModel, Poly, PolyField};
use nilnet::coupling::{find_skew_directions, synthesize_d, CouplingDesign};
use nilnet::dynsim::{integrate, PolyVectorField, SimConfig};
use nilnet::graphlab::{EigenChoice, Graph};
use nilnet::netlin::{assemble_linearization, center_split, choose_alpha_star, CenterSplit, NetworkDesign};
use nilnet::numkit::{inverse, Matrix, Tolerances};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The 4x4 node from the worked coupling example.
pub fn node4() -> Matrix {
    Matrix::from_rows(&[
        [1.0, 1.0, 0.0, 0.0],
        [-1.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 1.0, 16.94],
        [1.0, -4.24, -4.24, -17.94],
    ])
}

pub fn node4_design(c: Option<f64>) -> CouplingDesign {
    let a = node4();
    let cert = find_skew_directions(&a, Some(3), &tol()).unwrap();
    synthesize_d(&a, &cert, c, &tol()).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::new(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> Graph {
    let mut g = Graph::empty(n);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(extra) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Path on three nodes, 2D node with a one-dimensional center.
pub fn path3_design() -> (NetworkDesign, CenterSplit) {
    let a = Matrix::from_rows(&[[1.0, 2.0], [-3.0, -4.0]]);
    let d = Matrix::from_rows(&[[1.0, 0.0], [-3.0, 2.5]]);
    let net = choose_alpha_star(&a, &d, &Graph::path(3), EigenChoice::Largest, &tol()).unwrap();
    let split = center_split(&net.critical_block(), net.m, &tol()).unwrap();
    (net, split)
}

pub fn path3_h() -> PolyField {
    let mut h = PolyField::zero(2, 1, 2, 3);
    h.add_term(&[2, 0, 0], &[0.7, -0.2]);
    h.add_term(&[1, 1, 0], &[0.1, 0.4]);
    h.add_term(&[1, 0, 1], &[1.0, 0.5]);
    h.add_term(&[3, 0, 0], &[-0.3, 0.2]);
    h.add_term(&[0, 2, 1], &[0.25, 0.0]);
    h
}

/// Characteristic polynomial coefficients (monic, highest first) by Faddeev–LeVerrier.
pub fn char_poly(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        m = a.matmul(&m).add(&Matrix::identity(n).scale(c));
        c = -a.matmul(&m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Roots of a monic polynomial by Durand–Kerner iteration.
pub fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    // Newton polish on the polynomial itself.
    let deriv: Vec<f64> = coeffs[..n].iter().enumerate().map(|(k, c)| c * (n - k) as f64).collect();
    let evald = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in &mut z {
        for _ in 0..3 {
            let d = evald(*r);
            if d.norm() > 0.0 {
                *r -= eval(*r) / d;
            }
        }
    }
    z
}

/// Matrix exponential by scaling and squaring with a long Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.rows();
    let norm = a.norm_inf();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale(0.5f64.powi(s));
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..30 {
        term = term.matmul(&b).scale(1.0 / k as f64);
        sum = sum.add(&term);
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    sum
}

/// Manifold embedding `Φ(u; ε) = Σᵢ wᵢ ⊗ yᵢ(u; ε)` in node-major order.
pub fn embedding(net: &NetworkDesign, split: &CenterSplit, model: &CenterModel) -> PolyField {
    let y = model.channel_states(split);
    let (n, nodes) = (net.n(), net.nodes());
    let m = split.m();
    let d = model.reduced.d;
    let mut phi = PolyField::zero(m, d, nodes * n, model.order);
    for (i, yi) in y.iter().enumerate() {
        let w = if i == net.eigen_index { &net.v } else { &net.laplacian_eigenvectors[i] };
        for p in 0..nodes {
            for r in 0..n {
                phi.comps[p * n + r].add_scaled(&yi.comps[r], w[p]);
            }
        }
    }
    phi
}

/// Largest coefficient of `DΦ·R − F(Φ)` on the full network through `model.order`.
pub fn full_invariance_defect(net: &NetworkDesign, split: &CenterSplit, h: &PolyField, model: &CenterModel) -> f64 {
    let rho = model.order;
    let phi = embedding(net, split, model);
    let lhs = phi.directional(&model.reduced.comps, rho);
    let mut rhs = phi.left_mul(&assemble_linearization(net, net.alpha_star));
    let (n, m, d) = (net.n(), split.m(), h.d);
    let params: Vec<Poly> = (0..d).map(|j| Poly::var(m + d, m + j)).collect();
    for p in 0..net.nodes() {
        let mut subs: Vec<Poly> = phi.comps[p * n..(p + 1) * n].to_vec();
        subs.extend(params.iter().cloned());
        for (r, c) in compose(&h.comps, &subs, rho).into_iter().enumerate() {
            rhs.comps[p * n + r].add_scaled(&c, 1.0);
        }
    }
    lhs.sub(&rhs).truncate(rho).max_abs_coef()
}

pub fn companion() -> Matrix {
    Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
}

/// Nilpotent linear part `S J S⁻¹` plus a random nonlinearity.
pub fn random_jet(r: &mut ChaCha8Rng, seed: u64) -> PolyField {
    let (s, s_inv) = loop {
        let s = random_matrix(r, 3, 3).add(&Matrix::identity(3).scale(1.5));
        if let Ok(si) = inverse(&s) {
            break (s, si);
        }
    };
    PolyField::linear(&s.matmul(&companion()).matmul(&s_inv), 3, 3).add(&random_nonlinearity(3, 3, 3, 1.0, seed))
}

pub fn flow(f: &PolyField, eps: &[f64], x0: &[f64], t_end: f64) -> Vec<f64> {
    let field = PolyVectorField::new(f.clone(), eps.to_vec()).unwrap();
    let cfg = SimConfig { dt: 1e-3, t_end, ..SimConfig::default() };
    integrate(&field, x0, &cfg).unwrap().last().to_vec()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `ẋ = y, ẏ = −x − x³/6 + y/10`, a smooth non-stiff test field.
pub fn duffing() -> PolyVectorField {
    let mut f = PolyField::zero(2, 0, 2, 3);
    f.add_term(&[0, 1], &[1.0, 0.1]);
    f.add_term(&[1, 0], &[0.0, -1.0]);
    f.add_term(&[3, 0], &[0.0, -1.0 / 6.0]);
    PolyVectorField::new(f, vec![]).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let k = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / k, b + y.ln() / k));
    let num: f64 = pts.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum();
    num / den
}
