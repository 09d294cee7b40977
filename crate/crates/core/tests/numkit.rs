mod common;

use common::{char_poly, durand_kerner, random_matrix, rng, tol};
use nilnet::numkit::{
    cholesky, determinant, eigendecompose, flag_basis, is_positive_definite, kron, lu_solve, null_space,
    schur_complement, singular_values, solve, spectral_distance, svd, Matrix,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn general_spectra_match_characteristic_roots() {
    let mut r = rng(11);
    for trial in 0..60 {
        let n = 2 + trial % 5;
        let a = random_matrix(&mut r, n, n);
        let ours = eigendecompose(&a, false, &tol()).unwrap().eigenvalues;
        let oracle = durand_kerner(&char_poly(&a));
        let d = spectral_distance(&ours, &oracle);
        assert!(d < 1e-8, "trial {trial}: n = {n}, distance {d:.3e}");
    }
}

#[test]
fn companion_matrix_recovers_chosen_roots() {
    let mut r = rng(12);
    for _ in 0..40 {
        // Two conjugate pairs and two real roots, well separated.
        let mut roots = vec![];
        for k in 0..2 {
            let re = r.gen_range(-2.0..2.0);
            let im = 0.5 + k as f64 + r.gen_range(0.0..0.4);
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        }
        roots.push(Complex64::new(-3.0 + r.gen_range(0.0..0.5), 0.0));
        roots.push(Complex64::new(3.0 + r.gen_range(0.0..0.5), 0.0));
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for z in &roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k] += c;
                next[k + 1] -= c * z;
            }
            poly = next;
        }
        let n = roots.len();
        let mut comp = Matrix::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -poly[n - i].re;
        }
        let ours = eigendecompose(&comp, false, &tol()).unwrap().eigenvalues;
        let d = spectral_distance(&ours, &roots);
        assert!(d < 1e-8, "distance {d:.3e}");
    }
}

#[test]
fn jacobi_and_qr_agree_on_symmetric_input() {
    let mut r = rng(13);
    for n in 1..9 {
        let b = random_matrix(&mut r, n, n);
        let s = b.add(&b.transpose());
        let jac = eigendecompose(&s, true, &tol()).unwrap();
        let qr = eigendecompose(&s, false, &tol()).unwrap();
        assert!(spectral_distance(&jac.eigenvalues, &qr.eigenvalues) < 1e-10);
        assert!(qr.eigenvalues.iter().all(|z| z.im.abs() < 1e-10));
    }
}

#[test]
fn schur_complement_determinant_identity() {
    let mut r = rng(14);
    for _ in 0..30 {
        let n = 5;
        let m = random_matrix(&mut r, n, n).add(&Matrix::identity(n).scale(3.0));
        let s = schur_complement(&m, 2).unwrap();
        let m22 = m.block(2, n, 2, n);
        let lhs = determinant(&m).unwrap();
        let rhs = determinant(&m22).unwrap() * determinant(&s).unwrap();
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }
}

#[test]
fn singular_values_are_roots_of_gram_eigenvalues() {
    let mut r = rng(15);
    for _ in 0..20 {
        let a = random_matrix(&mut r, 6, 4);
        let mut sv = singular_values(&a).unwrap();
        sv.sort_by(|x, y| y.total_cmp(x));
        let mut gram: Vec<f64> =
            eigendecompose(&a.transpose().matmul(&a), true, &tol()).unwrap().real_values().iter().map(|x| x.max(0.0).sqrt()).collect();
        gram.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in sv.iter().zip(&gram) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn flag_basis_of_conjugated_jordan_block() {
    let mut r = rng(16);
    let mut j = Matrix::zeros(5, 5);
    j[(0, 1)] = 1.0;
    j[(1, 2)] = 1.0;
    j[(3, 3)] = -1.0;
    j[(4, 4)] = -2.0;
    let p = random_matrix(&mut r, 5, 5).add(&Matrix::identity(5).scale(2.0));
    let pinv = nilnet::numkit::inverse(&p).unwrap();
    let m = p.matmul(&j).matmul(&pinv);
    let (basis, levels) = flag_basis(&m, 1e-8).unwrap();
    assert_eq!(levels, vec![1, 1, 1]);
    let b = Matrix::from_cols(5, &basis);
    // M maps the flag into itself, strictly upward.
    let mb = m.matmul(&b);
    let coords = b.transpose().matmul(&mb);
    for i in 0..3 {
        for k in 0..=i {
            assert!(coords[(i, k)].abs() < 1e-8, "({i},{k}) = {}", coords[(i, k)]);
        }
    }
    assert!(mb.sub(&b.matmul(&coords)).max_abs() < 1e-8);
}

#[test]
fn positive_definiteness_uses_symmetric_part() {
    // x^T M x = x1^2 + x2^2 although M is far from symmetric.
    let m = Matrix::from_rows(&[[1.0, 5.0], [-5.0, 1.0]]);
    let rep = is_positive_definite(&m, &tol()).unwrap();
    assert!(rep.positive);
    assert!((rep.min_eig - 1.0).abs() < 1e-14);
    let m = Matrix::from_rows(&[[1.0, 0.0], [0.0, -1e-3]]);
    assert!(!is_positive_definite(&m, &tol()).unwrap().positive);
}

fn square(n: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_decomposition_reconstructs(m in (1usize..8).prop_flat_map(square)) {
        let s = m.add(&m.transpose());
        let spec = eigendecompose(&s, true, &tol()).unwrap();
        let v = Matrix::from_cols(s.rows(), spec.eigenvectors.as_ref().unwrap());
        let lam = Matrix::from_diag(&spec.real_values());
        let back = v.matmul(&lam).matmul(&v.transpose());
        prop_assert!(back.sub(&s).max_abs() < 1e-10 * s.max_abs().max(1.0));
        prop_assert!(v.transpose().matmul(&v).sub(&Matrix::identity(s.rows())).max_abs() < 1e-12);
    }

    #[test]
    fn trace_and_determinant_match_spectrum(m in (1usize..7).prop_flat_map(square)) {
        let spec = eigendecompose(&m, false, &tol()).unwrap();
        let sum: Complex64 = spec.eigenvalues.iter().sum();
        let prod: Complex64 = spec.eigenvalues.iter().product();
        prop_assert!((sum.re - m.trace()).abs() < 1e-10 && sum.im.abs() < 1e-10);
        prop_assert!((prod.re - determinant(&m).unwrap()).abs() < 1e-9 && prod.im.abs() < 1e-9);
    }

    #[test]
    fn lu_solve_residual(m in (1usize..8).prop_flat_map(square), seed in 0u64..1000) {
        let n = m.rows();
        let a = m.add(&Matrix::identity(n).scale(4.0));
        let mut r = rng(seed);
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x = solve(&a, &b).unwrap();
        let res: f64 = a.matvec(&x).iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(res < 1e-12);
        let bm = Matrix::from_cols(n, &[b.clone(), b]);
        let xm = lu_solve(&a, &bm).unwrap();
        prop_assert!(a.matmul(&xm).sub(&bm).max_abs() < 1e-12);
    }

    #[test]
    fn cholesky_factor_reproduces(m in (1usize..7).prop_flat_map(square)) {
        let n = m.rows();
        let spd = m.matmul(&m.transpose()).add(&Matrix::identity(n).scale(0.1));
        let l = cholesky(&spd).unwrap();
        prop_assert!(l.matmul(&l.transpose()).sub(&spd).max_abs() < 1e-12);
        for i in 0..n {
            for j in i + 1..n {
                prop_assert!(l[(i, j)] == 0.0);
            }
        }
    }

    #[test]
    fn svd_reconstructs_and_nullspace_annihilates(rows in 1usize..7, cols in 1usize..7, seed in 0u64..1000) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, rows, cols);
        let d = svd(&a).unwrap();
        let back = d.u.matmul(&Matrix::from_diag(&d.s)).matmul(&d.v.transpose());
        prop_assert!(back.sub(&a).max_abs() < 1e-12);
        // Rank-deficient by construction: duplicate the first column.
        let mut cols_v = a.columns();
        cols_v.push(cols_v[0].clone());
        let b = Matrix::from_cols(rows, &cols_v);
        let ns = null_space(&b, 1e-10).unwrap();
        prop_assert!(!ns.is_empty());
        for v in &ns {
            prop_assert!(b.matvec(v).iter().all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn kron_mixed_product(seed in 0u64..1000) {
        let mut r = rng(seed);
        let (a, b) = (random_matrix(&mut r, 2, 3), random_matrix(&mut r, 3, 2));
        let (c, d) = (random_matrix(&mut r, 3, 2), random_matrix(&mut r, 2, 3));
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-13);
    }
}
