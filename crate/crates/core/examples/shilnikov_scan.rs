//! Small (lambda, nu) scan of the truncated unfolding: saddle-focus and Shilnikov-ratio
//! flags at p1, distance of the returning unstable branch, and Lyapunov estimates.

use nilnet::dynsim::{largest_lyapunov, nf_field, shilnikov_scan, ScanConfig, ScanFamily, ScanGrid, SimConfig};
use nilnet::numkit::Tolerances;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let grid = ScanGrid {
        lambdas: vec![0.05, 0.1, 0.2, 0.3],
        nus: vec![-0.4, -0.24, -0.08],
        kappas: vec![0.0],
    };
    let report = shilnikov_scan(&ScanFamily::Truncated, &grid, &ScanConfig::default(), &tol)?;
    println!("{:>6} {:>6} {:>6} {:>6} {:>10} {:>10}", "lambda", "nu", "focus", "ratio", "shoot", "lyap");
    for p in &report.points {
        let s = p.saddle.as_ref();
        println!(
            "{:>6.2} {:>6.2} {:>6} {:>6} {:>10} {:>10}",
            p.lambda,
            p.nu,
            s.map_or("-".into(), |s| s.saddle_focus.to_string()),
            s.map_or("-".into(), |s| s.shilnikov_ratio.to_string()),
            p.shooting_distance.map_or("-".into(), |d| format!("{d:.3e}")),
            p.lyapunov.map_or("-".into(), |l| format!("{l:.4}")),
        );
    }
    if let Some(&best) = report.candidates.first() {
        let p = &report.points[best];
        println!("closest return at lambda = {}, nu = {}", p.lambda, p.nu);
        let cfg = SimConfig { dt: 1e-2, t_end: 400.0, renorm_interval: 0.1, ..SimConfig::default() };
        let x0 = [-(2.0 * p.lambda as f64).sqrt() + 1e-3, 0.0, 0.0];
        let est = largest_lyapunov(&nf_field(p.lambda, p.nu), &x0, &cfg)?;
        println!("  longer Lyapunov run: {:.4} (converged {})", est.value, est.converged);
    }
    Ok(())
}
