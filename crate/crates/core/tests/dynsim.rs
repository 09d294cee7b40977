mod common;

use common::{duffing, node4_design, expm, loglog_slope, max_diff, random_matrix, rng, tol};
use nilnet::cmred::{random_nonlinearity, PolyField};
use nilnet::dynsim::{
    alpha_stability_sweep, integrate, integrate_network, largest_lyapunov, nf_field, saddle_data, shilnikov_scan,
    shooting_distance, sync_error, LinearField, Method, PolyVectorField, ScanConfig, ScanFamily, ScanGrid, SimConfig,
};
use nilnet::graphlab::Graph;
use nilnet::numkit::{eigendecompose, hurwitz_margin, Matrix};
use rand::Rng;

#[test]
fn rk4_order() {
    let f = duffing();
    let x0 = [1.0, 0.5];
    let cfg = |dt: f64| SimConfig { dt, t_end: 2.0, renorm_interval: 1.0, ..SimConfig::default() };
    let reference = integrate(&f, &x0, &cfg(1e-4)).unwrap();
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            let tr = integrate(&f, &x0, &cfg(dt)).unwrap();
            (dt, max_diff(tr.last(), reference.last()))
        })
        .collect();
    let slope = loglog_slope(&pts);
    assert!(slope >= 3.8, "slope {slope}");
}

#[test]
fn linear_flow_matches_expm() {
    let mut r = rng(71);
    for _ in 0..10 {
        let a = random_matrix(&mut r, 4, 4);
        let x0: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        let want = expm(&a).matvec(&x0);
        let rk = integrate(&LinearField(a.clone()), &x0, &SimConfig { dt: 1e-3, t_end: 1.0, ..SimConfig::default() }).unwrap();
        assert!(max_diff(rk.last(), &want) < 1e-6);
        let dp = SimConfig { dt: 1e-2, t_end: 1.0, method: Method::Dp54 { rtol: 1e-10, atol: 1e-12 }, ..SimConfig::default() };
        assert!(max_diff(integrate(&LinearField(a), &x0, &dp).unwrap().last(), &want) < 1e-6);
    }
}

#[test]
fn zero_is_an_equilibrium() {
    let cd = node4_design(None);
    let node = PolyField::linear(&cd.a, 1, 3).add(&random_nonlinearity(4, 1, 3, 1.0, 1));
    let cfg = SimConfig { dt: 1e-3, t_end: 0.5, ..SimConfig::default() };
    let tr = integrate_network(&Graph::star(3), &cd.d, 0.1, &node, &[0.2], &[0.0; 16], &cfg).unwrap();
    assert!(tr.states.iter().all(|x| x.iter().all(|&v| v == 0.0)));
}

#[test]
fn synchronized_data_stays_synchronized() {
    let cd = node4_design(None);
    let node = PolyField::linear(&cd.a, 1, 3).add(&random_nonlinearity(4, 1, 3, 0.5, 2));
    let x = [0.1, -0.05, 0.02, 0.03];
    let x0: Vec<f64> = (0..4).flat_map(|_| x).collect();
    let cfg = SimConfig { dt: 1e-3, t_end: 10.0, ..SimConfig::default() };
    let tr = integrate_network(&Graph::star(3), &cd.d, 0.1, &node, &[0.05], &x0, &cfg).unwrap();
    assert_eq!(tr.states.len(), 10_001);
    let drift = sync_error(&tr, 4).into_iter().fold(0.0, f64::max);
    assert!(drift <= 1e-10, "drift {drift:e}");
    let iso = integrate(&PolyVectorField::new(node, vec![0.05]).unwrap(), &x, &cfg).unwrap();
    assert!(max_diff(&tr.last()[..4], iso.last()) <= 1e-10);
}

#[test]
fn antisymmetric_mode_follows_its_block() {
    let a = Matrix::from_rows(&[[-0.5, 1.0], [-1.0, -0.2]]);
    let d = Matrix::from_rows(&[[1.0, 0.2], [0.0, 0.5]]);
    let alpha = 0.3;
    let x = [0.2, -0.1];
    let x0 = [x[0], x[1], -x[0], -x[1]];
    let cfg = SimConfig { dt: 1e-3, t_end: 2.0, ..SimConfig::default() };
    let node = PolyField::linear(&a, 0, 1);
    let tr = integrate_network(&Graph::path(2), &d, alpha, &node, &[], &x0, &cfg).unwrap();
    let blk = a.sub(&d.scale(2.0 * alpha)).scale(2.0);
    let diff0 = [2.0 * x[0], 2.0 * x[1]];
    let want = expm(&blk).matvec(&diff0);
    let last = tr.last();
    let got = [last[0] - last[2], last[1] - last[3]];
    assert!(max_diff(&got, &want) < 1e-8);
    let err = sync_error(&tr, 2);
    assert!((err.last().unwrap() - (want[0].hypot(want[1]))).abs() < 1e-8);
}

#[test]
fn lyapunov_of_linear_systems() {
    let cfg = SimConfig { dt: 1e-2, t_end: 100.0, renorm_interval: 0.1, ..SimConfig::default() };
    let mut r = rng(72);
    let mut mats = vec![
        Matrix::from_diag(&[-0.5, -1.0]),
        Matrix::from_rows(&[[-0.2, 1.0], [-1.0, -0.2]]),
        Matrix::from_rows(&[[0.1, 3.0], [0.0, -1.0]]),
    ];
    for _ in 0..5 {
        let m = random_matrix(&mut r, 3, 3);
        let top = eigendecompose(&m, false, &tol()).unwrap().max_real();
        mats.push(m.shift(-top + r.gen_range(-0.8..0.1)));
    }
    for m in mats {
        let want = eigendecompose(&m, false, &tol()).unwrap().max_real();
        let x0 = vec![0.5; m.rows()];
        let est = largest_lyapunov(&LinearField(m), &x0, &cfg).unwrap();
        assert!((est.value - want).abs() <= 5e-2, "{} vs {want}", est.value);
    }
}

#[test]
fn stable_network_has_negative_exponent() {
    let cd = node4_design(None);
    let g = Graph::star(3);
    let sweep = alpha_stability_sweep(&g, &cd.a, &cd.d, &[0.0, 0.001, 0.002], &tol()).unwrap();
    assert!(sweep.points.iter().all(|p| p.stable));
    // The real crossing of this family sits at αλ ≈ 0.017, so stay below it.
    let alpha = 0.002;
    let node = PolyField::linear(&cd.a, 0, 3).add(&random_nonlinearity(4, 0, 3, 0.5, 3));
    let field = nilnet::dynsim::NetworkField::new(&g, cd.d.clone(), alpha, PolyVectorField::new(node, vec![]).unwrap()).unwrap();
    let mut r = rng(73);
    let x0: Vec<f64> = (0..16).map(|_| r.gen_range(-1e-3..1e-3)).collect();
    let cfg = SimConfig { dt: 1e-3, t_end: 20.0, renorm_interval: 1e-2, ..SimConfig::default() };
    let est = largest_lyapunov(&field, &x0, &cfg).unwrap();
    let lin = nilnet::netlin::assemble_linearization(
        &nilnet::netlin::choose_alpha_star(&cd.a, &cd.d, &g, nilnet::graphlab::EigenChoice::Largest, &tol()).unwrap(),
        alpha,
    );
    let margin = hurwitz_margin(&lin, &tol()).unwrap();
    assert!(est.value < 0.0);
    assert!((est.value + margin).abs() <= 5e-2, "{} vs {}", est.value, -margin);
}

#[test]
fn alpha_sweep_examples() {
    let cd = node4_design(Some(21.0));
    let g = Graph::star(8);
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0 * (1.0 / 9.0)).collect();
    let sweep = alpha_stability_sweep(&g, &cd.a, &cd.d, &grid, &tol()).unwrap();
    assert!(sweep.points[0].stable);
    let first = sweep.first_crossing.clone().unwrap();
    assert!(first.alpha < 1.0 / 9.0);
    // The first loss is the real crossing of the β-family, reached in the top channel.
    let betas = nilnet::coupling::beta_sweep(&cd.a, &cd.d, &nilnet::coupling::uniform_grid(1000), &tol()).unwrap();
    let beta0 = betas.events[0].beta;
    assert!((first.alpha * first.lambda - beta0).abs() <= 1e-3, "{first:?} vs {beta0}");

    let scaled = alpha_stability_sweep(&g, &cd.a, &cd.d.scale(10.0), &grid.iter().map(|a| a / 10.0).collect::<Vec<_>>(), &tol()).unwrap();
    let f2 = scaled.first_crossing.unwrap();
    assert!((f2.alpha - first.alpha / 10.0).abs() < 1e-9 * first.alpha);
}

#[test]
fn runs_are_deterministic() {
    let cfg = SimConfig { dt: 1e-2, t_end: 20.0, renorm_interval: 0.1, seed: 9, ..SimConfig::default() };
    let f = duffing();
    let a = largest_lyapunov(&f, &[1.0, 0.0], &cfg).unwrap();
    let b = largest_lyapunov(&f, &[1.0, 0.0], &cfg).unwrap();
    assert_eq!(a, b);
    let g = nf_field(0.5, -0.1);
    let short = SimConfig { t_end: 5.0, ..cfg };
    assert_eq!(integrate(&g, &[-0.9, 0.0, 0.0], &short).unwrap(), integrate(&g, &[-0.9, 0.0, 0.0], &short).unwrap());
}

#[test]
fn blow_up_is_reported() {
    let mut f = PolyField::zero(1, 0, 1, 2);
    f.add_term(&[2], &[1.0]);
    let tr = integrate(&PolyVectorField::new(f, vec![]).unwrap(), &[1.0], &SimConfig { dt: 1e-4, t_end: 2.0, ..SimConfig::default() }).unwrap();
    let t = tr.blow_up.expect("x' = x² escapes at t = 1");
    assert!((t - 1.0).abs() < 1e-2);
    assert!(tr.times.last().unwrap() <= &t);
}

#[test]
fn saddle_at_p1() {
    let f = nf_field(0.5, 0.0);
    let s = saddle_data(&f, &[-1.0, 0.0, 0.0], &tol()).unwrap();
    assert!(max_diff(&s.point, &[-1.0, 0.0, 0.0]) < 1e-12);
    let stable_complex = s.eigenvalues.iter().filter(|z| z.re < 0.0 && z.im != 0.0).count() == 2;
    assert_eq!(s.saddle_focus, stable_complex);
    assert!(s.saddle_focus);
    let cfg = ScanConfig::default();
    // Both unstable branches escape to infinity here, so nothing returns to the ball.
    assert_eq!(shooting_distance(&f, &s, cfg.ball, &cfg.shoot), None);
    let nu = -7.0 / 19.0;
    let f = nf_field(0.5, nu);
    let s = saddle_data(&f, &[-1.0, 0.0, 0.0], &tol()).unwrap();
    let d = shooting_distance(&f, &s, cfg.ball, &cfg.shoot);
    assert!(d.is_some_and(|d| d.is_finite() && d < cfg.ball), "{d:?}");
}

#[test]
fn scan_skips_and_flags() {
    let grid = ScanGrid { lambdas: vec![-0.1, 0.0, 0.3], nus: vec![-0.2, 0.0], kappas: vec![0.0] };
    let cfg = ScanConfig {
        lyapunov: SimConfig { dt: 1e-2, t_end: 20.0, renorm_interval: 0.1, ..SimConfig::default() },
        shoot: SimConfig { dt: 1e-2, t_end: 20.0, ..ScanConfig::default().shoot },
        ..ScanConfig::default()
    };
    let rep = shilnikov_scan(&ScanFamily::Truncated, &grid, &cfg, &tol()).unwrap();
    assert_eq!(rep.points.len(), 6);
    for p in &rep.points {
        if p.lambda <= 0.0 {
            assert!(p.skipped.is_some());
            continue;
        }
        let s = p.saddle.as_ref().unwrap();
        let complex_stable = s.eigenvalues.iter().filter(|z| z.re < 0.0 && z.im.abs() > 0.0).count() == 2;
        assert_eq!(s.saddle_focus, complex_stable);
        if s.shilnikov_ratio {
            assert!(s.saddle_focus);
        }
        assert!(p.lyapunov.is_some_and(f64::is_finite));
    }
    for w in rep.candidates.windows(2) {
        assert!(rep.points[w[0]].shooting_distance <= rep.points[w[1]].shooting_distance);
    }
}
