//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero on any failure.
//!
//! `cargo test --release --test acceptance` for the timings that matter.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{
    companion, duffing, embedding, node4, flow, full_invariance_defect, loglog_slope, max_diff, path3_design, path3_h,
    random_connected_graph, random_jet, random_matrix, rng, tol,
};
use nilnet::cli::{default_scan_grid, dispatch};
use nilnet::cmred::{compose, inverse_design, random_nonlinearity, reduced_field, solve_homological, Poly, PolyField};
use nilnet::coupling::{beta_sweep, find_skew_directions, synthesize_d, uniform_grid, SweepEventKind};
use nilnet::dynsim::{
    integrate, integrate_network, largest_lyapunov, sync_error, LinearField, PolyVectorField, ScanReport, SimConfig,
};
use nilnet::graphlab::{
    check_degree_versatility, check_versatile, gen_hub_graph, gen_two_component_versatile, laplacian_spectrum,
    spectral_gap_bound, EigenChoice, Graph,
};
use nilnet::netlin::{assemble_linearization, block_spectrum, center_split, NetworkDesign};
use nilnet::nform::{change_coordinates, eliminate_lower, nf_fixed_points, normal_form, normalize_frame};
use nilnet::numkit::{eigendecompose, inverse, spectral_distance, Matrix};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let el = t.elapsed();
    ensure!(el < limit, "{what} took {el:.2?}, limit {limit:?}");
    Ok(el)
}

fn c1_node4() -> Outcome {
    let t = Instant::now();
    let a = node4();
    let cert = find_skew_directions(&a, Some(3), &tol()).map_err(|e| e.to_string())?;
    let d = synthesize_d(&a, &cert, None, &tol()).map_err(|e| e.to_string())?;
    let el = within(t, Duration::from_secs(1), "synthesis")?;
    ensure!(d.p.max_abs() == 0.0, "P = {:?}", d.p);
    for i in 0..4 {
        for j in 0..3 {
            ensure!((d.d[(i, j)] - a[(i, j)]).abs() < 1e-12, "D[{i},{j}] = {}", d.d[(i, j)]);
        }
    }
    let mut eig = eigendecompose(&d.a_minus_d(), false, &tol()).map_err(|e| e.to_string())?.eigenvalues;
    eig.sort_by(|x, y| x.re.total_cmp(&y.re));
    let want = -17.94 - d.c;
    ensure!((eig[0].re - want).abs() < 1e-6 && eig[0].im.abs() < 1e-6, "{} vs {want}", eig[0]);
    ensure!(eig[1..].iter().all(|z| z.norm() < 1e-6), "kernel {:?}", &eig[1..]);
    ensure!((9.14..=9.34).contains(&d.c), "c = {}", d.c);
    Ok(format!("c_min = {:.4}, {el:.1?}", d.c))
}

fn c2_beta_sweep() -> Outcome {
    let t = Instant::now();
    let a = node4();
    let cert = find_skew_directions(&a, Some(3), &tol()).map_err(|e| e.to_string())?;
    let d = synthesize_d(&a, &cert, Some(21.0), &tol()).map_err(|e| e.to_string())?;
    let res = beta_sweep(&a, &d.d, &uniform_grid(1000), &tol()).map_err(|e| e.to_string())?;
    let el = within(t, Duration::from_secs(10), "sweep")?;
    let complex = res.events_of(SweepEventKind::ComplexPairCrossing).map(|e| e.beta).find(|&b| b > 0.0 && b < 0.5);
    let real = res.events_of(SweepEventKind::RealCrossing).map(|e| e.beta).find(|&b| b > 0.0 && b < 1.0);
    ensure!(complex.is_some(), "no complex crossing in (0, 0.5): {:?}", res.events);
    ensure!(real.is_some(), "no real crossing in (0, 1): {:?}", res.events);
    let pos = res.count_positive(500, 0.0);
    ensure!(pos == 3, "{pos} unstable eigenvalues at 0.5");
    let zeros = res.eigenvalues[1000].iter().filter(|z| z.norm() < 1e-6).count();
    ensure!(zeros == 3, "{zeros} zeros at 1");
    Ok(format!("complex at {:.3}, real at {:.3}, {el:.1?}", complex.unwrap(), real.unwrap()))
}

fn c3_worked_graphs() -> Outcome {
    // (graph, spectrum, versatile)
    let cases = [
        (Graph::new(3, [(0, 1)]), vec![3.0, 1.0, 0.0], true),
        (Graph::new(4, [(0, 1), (2, 3)]), vec![4.0, 2.0, 2.0, 0.0], false),
        (Graph::new(5, [(0, 1), (1, 2), (3, 4)]), vec![5.0, 4.0, 3.0, 2.0, 0.0], true),
        (Graph::new(6, [(0, 1), (2, 3), (3, 4)]), vec![6.0, 6.0, 5.0, 4.0, 3.0, 0.0], false),
    ];
    for (g, want, verdict) in cases {
        let g = g.map_err(|e| e.to_string())?.complement();
        let mut got = laplacian_spectrum(&g, &tol()).map_err(|e| e.to_string())?.real_values();
        got.reverse();
        ensure!(got.iter().zip(&want).all(|(x, y)| (x - y).abs() < 1e-8), "{got:?} vs {want:?}");
        let rep = check_versatile(&g, 3, EigenChoice::Largest, &tol()).map_err(|e| e.to_string())?;
        ensure!(rep.verdict == verdict, "N = {}: verdict {}", g.n(), rep.verdict);
    }
    Ok("4 spectra, 4 verdicts".into())
}

fn c4_two_component() -> Outcome {
    let mut r = rng(21);
    let mut done = 0;
    while done < 200 {
        let (s, t) = (r.gen_range(1..=8), r.gen_range(1..=8));
        if s == t {
            continue;
        }
        let g1 = random_connected_graph(&mut r, s, 0.3);
        let g2 = random_connected_graph(&mut r, t, 0.3);
        let des = gen_two_component_versatile(&g1, &g2, &tol()).map_err(|e| e.to_string())?;
        let rep = check_versatile(&des.graph, 10, EigenChoice::Largest, &tol()).map_err(|e| e.to_string())?;
        ensure!((rep.eigenvalue - (s + t) as f64).abs() < 1e-8, "({s},{t}): λ = {}", rep.eigenvalue);
        ensure!(rep.simple && rep.verdict, "({s},{t}): {rep:?}");
        let scale = s.max(t) as f64;
        let sign = if t >= s { 1.0 } else { -1.0 };
        for (i, x) in rep.eigenvector.iter().enumerate() {
            let want = if i < s { t as f64 } else { -(s as f64) } * sign / scale;
            ensure!((x - want).abs() < 1e-8, "({s},{t}) node {i}: {x} vs {want}");
        }
        done += 1;
    }
    Ok("200 graphs, versatile through ℓ = 11".into())
}

fn c5_hubs() -> Outcome {
    let mut r = rng(23);
    let (mut done, mut worst) = (0, 0.0f64);
    while done < 50 {
        let n = r.gen_range(8..80);
        let cbrt = (n as f64).cbrt();
        let r_max = (n as f64 / (cbrt + 1.0)).floor() as usize;
        if r_max == 0 {
            continue;
        }
        let deg = r.gen_range(1..=r_max.min(4));
        let c_min = ((cbrt + 1.0) * deg as f64).ceil() as usize;
        if c_min > n {
            continue;
        }
        let c = r.gen_range(c_min..=n);
        let Ok(g) = gen_hub_graph(n, deg, c, r.gen()) else { continue };
        let rep = check_degree_versatility(&g, 3, &tol()).map_err(|e| e.to_string())?;
        ensure!(rep.hypothesis_holds && rep.report.simple, "n = {n}: {rep:?}");
        ensure!(rep.lambda_bound_ok == Some(true), "n = {n}: λ below C + 1");
        let gap = spectral_gap_bound(&g, &tol()).map_err(|e| e.to_string())?;
        ensure!(gap.ratio <= gap.bound + 1e-12, "n = {n}: {gap:?}");
        worst = worst.max(gap.ratio / gap.bound);
        done += 1;
    }
    Ok(format!("50 graphs, worst ratio/bound {worst:.3}"))
}

fn c6_block_spectrum() -> Outcome {
    let mut r = rng(41);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let nodes = r.gen_range(1..=5);
        let n = r.gen_range(1..=4);
        let graph = random_connected_graph(&mut r, nodes, 0.3);
        let (a, d) = (random_matrix(&mut r, n, n), random_matrix(&mut r, n, n));
        let alpha = r.gen_range(0.0..2.0);
        let spec = laplacian_spectrum(&graph, &tol()).map_err(|e| e.to_string())?;
        let vals = spec.real_values();
        let vecs = spec.eigenvectors.unwrap();
        let k = vals.len() - 1;
        let net = NetworkDesign {
            m: 0,
            alpha_star: 1.0,
            lambda: vals[k],
            eigen_index: k,
            v: vecs[k].clone(),
            laplacian_eigenvalues: vals,
            laplacian_eigenvectors: vecs,
            delta: 0.0,
            graph,
            a,
            d,
        };
        let full = eigendecompose(&assemble_linearization(&net, alpha), false, &tol()).map_err(|e| e.to_string())?;
        let blocks: Vec<_> = block_spectrum(&net, alpha, &tol())
            .map_err(|e| e.to_string())?
            .into_iter()
            .flat_map(|b| b.spectrum.eigenvalues)
            .collect();
        let dist = spectral_distance(&full.eigenvalues, &blocks);
        ensure!(dist <= 1e-8, "case {case}: {dist:e}");
        worst = worst.max(dist);
    }
    Ok(format!("100 cases, max distance {worst:.1e}"))
}

fn c7_center_manifold() -> Outcome {
    // Invariance residual on single systems and on the network.
    let mut r = rng(51);
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let j = Matrix::from_rows(&[[0.0, 0.0, 0.0], [r.gen_range(-1.0..1.0), -1.5, 0.4], [r.gen_range(-1.0..1.0), -0.3, 2.0]]);
        let split = center_split(&j, 1, &tol()).map_err(|e| e.to_string())?;
        let model = solve_homological(&j, &split, &random_nonlinearity(3, 1, 3, 1.0, seed), 3).map_err(|e| e.to_string())?;
        worst = worst.max(model.residual);
    }
    let (net, split) = path3_design();
    for seed in 0..5 {
        let h = random_nonlinearity(2, 1, 3, 1.0, seed);
        let model = reduced_field(&net, &split, &h, 3).map_err(|e| e.to_string())?;
        worst = worst.max(full_invariance_defect(&net, &split, &h, &model));
    }
    ensure!(worst <= 1e-9, "invariance residual {worst:e}");

    // Second order: factor Σν³ on center-quadratic terms, Σν² on mixed ones.
    let h = path3_h();
    let model = reduced_field(&net, &split, &h, 3).map_err(|e| e.to_string())?;
    let s2: f64 = net.v.iter().map(|x| x * x).sum();
    let s3: f64 = net.v.iter().map(|x| x.powi(3)).sum();
    let (m, d) = (split.m(), h.d);
    let mut subs: Vec<Poly> = (0..net.n())
        .map(|row| {
            let mut p = Poly::zero(m + d);
            for a in 0..m {
                p.add_scaled(&Poly::var(m + d, a), split.ec[(row, a)]);
            }
            p
        })
        .collect();
    subs.extend((0..d).map(|j| Poly::var(m + d, m + j)));
    let hq = PolyField { comps: compose(&h.comps, &subs, 2), ..PolyField::zero(m, d, net.n(), 2) }.left_mul(&split.ec_dual);
    let mut closed = 0.0f64;
    for (got, want) in model.reduced.homogeneous(2).comps.iter().zip(&hq.homogeneous(2).comps) {
        for (mono, c) in &want.terms {
            let factor = if mono.partial_degree(m) == 2 { s3 } else { s2 };
            closed = closed.max((got.coef(mono) - factor * c).abs());
        }
    }
    ensure!(closed < 1e-12, "second-order mismatch {closed:e}");

    let mut round = 0.0f64;
    for seed in 0..5 {
        let target = reduced_field(&net, &split, &random_nonlinearity(2, 1, 3, 1.0, 100 + seed), 3)
            .map_err(|e| e.to_string())?
            .reduced;
        let inv = inverse_design(&target, &net, &split, 3).map_err(|e| e.to_string())?;
        let back = reduced_field(&net, &split, &inv.h, 3).map_err(|e| e.to_string())?.reduced;
        round = round.max(inv.defect).max(back.sub(&target).truncate(3).max_abs_coef());
    }
    ensure!(round <= 1e-8, "inverse round trip {round:e}");

    let rho = 3;
    let model = reduced_field(&net, &split, &h, rho).map_err(|e| e.to_string())?;
    let phi = embedding(&net, &split, &model);
    let node = PolyField::linear(&net.a, 1, 3).add(&h);
    let reduced = PolyVectorField::new(model.reduced.clone(), vec![0.0]).map_err(|e| e.to_string())?;
    let cfg = SimConfig { dt: 1e-3, t_end: 1.0, ..SimConfig::default() };
    let mut pts = Vec::new();
    for s in [1e-2, 1e-3, 1e-4] {
        let x0 = phi.eval(&[s], &[0.0]);
        let full = integrate_network(&net.graph, &net.d, net.alpha_star, &node, &[0.0], &x0, &cfg).map_err(|e| e.to_string())?;
        let red = integrate(&reduced, &[s], &cfg).map_err(|e| e.to_string())?;
        pts.push((s, max_diff(full.last(), &phi.eval(red.last(), &[0.0]))));
    }
    let slope = loglog_slope(&pts);
    ensure!(slope >= rho as f64 + 0.5, "shadowing slope {slope:.3}");
    Ok(format!("residual {worst:.1e}, round trip {round:.1e}, shadowing slope {slope:.2}"))
}

fn c8_normal_form() -> Outcome {
    for seed in 0..10 {
        let mut f = PolyField::linear(&companion(), 3, 3);
        f.comps[2] = random_nonlinearity(3, 3, 3, 1.0, seed).comps[2].clone();
        let jet = normalize_frame(&f).map_err(|e| e.to_string())?;
        let out = eliminate_lower(&jet).map_err(|e| e.to_string())?;
        ensure!(out.transforms.is_empty() && out.field == jet.field, "seed {seed}: h₁ = h₂ = 0 input was changed");
    }

    let mut r = rng(63);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let f = random_jet(&mut r, 200 + seed);
        let eps = [1e-3, -2e-3, 1.5e-3];
        let x0: Vec<f64> = (0..3).map(|_| r.gen_range(-3e-3..3e-3)).collect();
        let t = 0.5;
        let jet = normalize_frame(&f).map_err(|e| e.to_string())?;
        let s_inv = inverse(&jet.frame).map_err(|e| e.to_string())?;
        let mut y0 = s_inv.matvec(&x0);
        worst = worst.max(max_diff(&s_inv.matvec(&flow(&f, &eps, &x0, t)), &flow(&jet.field, &eps, &y0, t)));
        let out = eliminate_lower(&jet).map_err(|e| e.to_string())?;
        let mut field = jet.field.clone();
        for stage in &out.transforms {
            let next = change_coordinates(&field, &stage.phi);
            let z0 = stage.apply(&y0, &eps);
            worst = worst.max(max_diff(&stage.apply(&flow(&field, &eps, &y0, t), &eps), &flow(&next, &eps, &z0, t)));
            field = next;
            y0 = z0;
        }
    }
    ensure!(worst <= 1e-7, "stage conjugacy {worst:e}");

    let mut r = rng(66);
    let (mut checked, mut seed) = (0, 500);
    while checked < 100 {
        seed += 1;
        let f = random_jet(&mut r, seed);
        let gamma = [r.gen_range(-3.0..3.0), -r.gen_range(0.1..3.0), r.gen_range(-3.0..3.0)];
        let Ok((_, _, res)) = normal_form(&f, r.gen_range(1e-4..0.1), gamma) else { continue };
        ensure!(res.lambda_nf >= 0.0, "λ_nf = {}", res.lambda_nf);
        checked += 1;
    }

    for lambda in [0.02, 0.5, 0.7, 3.0] {
        let [p1, p2] = nf_fixed_points(lambda, 0.0, &tol()).map_err(|e| e.to_string())?;
        let root = (2.0 * lambda).sqrt();
        ensure!(p1.point == [-root, 0.0, 0.0] && p2.point == [root, 0.0, 0.0], "λ = {lambda}: {p1:?} {p2:?}");
        ensure!((p1.n_stable, p1.n_unstable) == (2, 1), "λ = {lambda}: p₁ split {}/{}", p1.n_stable, p1.n_unstable);
    }
    Ok(format!("stage conjugacy {worst:.1e}, 100 λ_nf ≥ 0"))
}

fn c9_dynamics() -> Outcome {
    let f = duffing();
    let x0 = [1.0, 0.5];
    let cfg = |dt: f64| SimConfig { dt, t_end: 2.0, renorm_interval: 1.0, ..SimConfig::default() };
    let reference = integrate(&f, &x0, &cfg(1e-4)).map_err(|e| e.to_string())?;
    let mut pts = Vec::new();
    for dt in [0.1, 0.05, 0.025, 0.0125] {
        let tr = integrate(&f, &x0, &cfg(dt)).map_err(|e| e.to_string())?;
        pts.push((dt, max_diff(tr.last(), reference.last())));
    }
    let slope = loglog_slope(&pts);
    ensure!(slope >= 3.8, "RK4 slope {slope:.3}");

    let lcfg = SimConfig { dt: 1e-2, t_end: 100.0, renorm_interval: 0.1, ..SimConfig::default() };
    let mut r = rng(72);
    let mut mats = vec![
        Matrix::from_diag(&[-0.5, -1.0]),
        Matrix::from_rows(&[[-0.2, 1.0], [-1.0, -0.2]]),
        Matrix::from_rows(&[[0.1, 3.0], [0.0, -1.0]]),
    ];
    for _ in 0..5 {
        let m = random_matrix(&mut r, 3, 3);
        let top = eigendecompose(&m, false, &tol()).map_err(|e| e.to_string())?.max_real();
        mats.push(m.shift(-top + r.gen_range(-0.8..0.1)));
    }
    let mut lyap = 0.0f64;
    for m in mats {
        let want = eigendecompose(&m, false, &tol()).map_err(|e| e.to_string())?.max_real();
        let est = largest_lyapunov(&LinearField(m.clone()), &vec![0.5; m.rows()], &lcfg).map_err(|e| e.to_string())?;
        lyap = lyap.max((est.value - want).abs());
    }
    ensure!(lyap <= 5e-2, "Lyapunov error {lyap:.3}");

    let cd = common::node4_design(None);
    let node = PolyField::linear(&cd.a, 1, 3).add(&random_nonlinearity(4, 1, 3, 0.5, 2));
    let x: Vec<f64> = vec![0.1, -0.05, 0.02, 0.03];
    let x0: Vec<f64> = (0..4).flat_map(|_| x.iter().copied()).collect();
    let scfg = SimConfig { dt: 1e-3, t_end: 10.0, ..SimConfig::default() };
    let tr = integrate_network(&Graph::star(3), &cd.d, 0.1, &node, &[0.05], &x0, &scfg).map_err(|e| e.to_string())?;
    let drift = sync_error(&tr, 4).into_iter().fold(0.0, f64::max);
    ensure!(tr.states.len() == 10_001 && drift <= 1e-10, "drift {drift:e} over {} states", tr.states.len());
    Ok(format!("RK4 slope {slope:.2}, Lyapunov error {lyap:.1e}, drift {drift:.1e}"))
}

fn c10_scan() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = Instant::now();
    let out = dir.path().display().to_string();
    let code = dispatch(["nilnet", "--out", out.as_str(), "sim", "scan"]);
    let el = within(t, Duration::from_secs(300), "scan")?;
    ensure!(code == 0, "exit code {code}");
    let text = std::fs::read_to_string(dir.path().join("scan.json")).map_err(|e| e.to_string())?;
    let report: ScanReport = serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(&text))
        .map_err(|e| format!("schema: {e}"))?;
    let grid = default_scan_grid();
    let expected = grid.lambdas.len() * grid.nus.len() * grid.kappas.len();
    ensure!(report.points.len() == expected, "{} points, expected {expected}", report.points.len());
    let (mut focus, mut ratio, mut lyap) = (0, 0, 0);
    for p in &report.points {
        let Some(s) = &p.saddle else {
            ensure!(p.skipped.is_some(), "point {:?} has neither saddle data nor a skip reason", p.index);
            continue;
        };
        let complex_stable = s.eigenvalues.iter().filter(|z| z.re < 0.0 && z.im.abs() > 0.0).count() == 2;
        ensure!(s.saddle_focus == complex_stable, "point {:?}: saddle-focus flag disagrees with spectrum", p.index);
        ensure!(!s.shilnikov_ratio || s.saddle_focus, "point {:?}: ratio flag without saddle-focus", p.index);
        ensure!(p.lyapunov.is_some() || p.lyapunov_note.is_some(), "point {:?}: no Lyapunov estimate", p.index);
        focus += s.saddle_focus as usize;
        ratio += s.shilnikov_ratio as usize;
        lyap += p.lyapunov.is_some_and(f64::is_finite) as usize;
    }
    ensure!(lyap > 0, "no finite Lyapunov estimates");
    let best = report.candidates.first().and_then(|&i| report.points[i].shooting_distance);
    Ok(format!(
        "{expected} points, {focus} saddle-focus, {ratio} Shilnikov ratio, {lyap} exponents, best shooting distance {best:?}, {el:.1?}"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("coupling synthesis on the 4x4 example", c1_node4),
        ("beta sweep with c = 21", c2_beta_sweep),
        ("worked complement graphs", c3_worked_graphs),
        ("two-component versatility suite", c4_two_component),
        ("hub degree-distribution suite", c5_hubs),
        ("block-spectrum equivalence", c6_block_spectrum),
        ("center-manifold reduction", c7_center_manifold),
        ("normal-form chain", c8_normal_form),
        ("integrators and Lyapunov estimates", c9_dynamics),
        ("Shilnikov scan on the default grid", c10_scan),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let el = t.elapsed();
        match res {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{el:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{el:.1?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
