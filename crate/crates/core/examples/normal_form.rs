//! From a reduced 3D field with a nilpotent linear part to the canonical unfolding
//! (y, z, lambda - y + nu z - x^2/2), and the equilibria of the result.

use nilnet::cmred::PolyField;
use nilnet::nform::{choose_kappa, eliminate_lower, extract_unfolding, nf_fixed_points, normalize_frame};
use nilnet::numkit::Tolerances;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    // x' = y + x^2, y' = z + xy + eps1 x, z' = -x^2 + eps1 x + eps2 y + eps3 z + y^2 + x^3
    let mut r = PolyField::zero(3, 3, 3, 3);
    r.add_term(&[0, 1, 0, 0, 0, 0], &[1.0, 0.0, 0.0]);
    r.add_term(&[0, 0, 1, 0, 0, 0], &[0.0, 1.0, 0.0]);
    r.add_term(&[2, 0, 0, 0, 0, 0], &[1.0, 0.0, -1.0]);
    r.add_term(&[1, 1, 0, 0, 0, 0], &[0.0, 1.0, 0.0]);
    r.add_term(&[1, 0, 0, 1, 0, 0], &[0.0, 1.0, 1.0]);
    r.add_term(&[0, 1, 0, 0, 1, 0], &[0.0, 0.0, 1.0]);
    r.add_term(&[0, 0, 1, 0, 0, 1], &[0.0, 0.0, 1.0]);
    r.add_term(&[0, 2, 0, 0, 0, 0], &[0.0, 0.0, 1.0]);
    r.add_term(&[3, 0, 0, 0, 0, 0], &[0.0, 0.0, 1.0]);

    let jet = eliminate_lower(&normalize_frame(&r)?)?;
    let unf = extract_unfolding(&jet)?;
    println!("quadratic coefficients a = {:?}", unf.a);
    println!("parameter map condition {:.3e}, generic: {}", unf.eps_map_cond, unf.generic());

    for (lambda, nu) in [(0.5, 0.0), (1.0, 0.3)] {
        let res = choose_kappa(&jet, &unf, [(2.0 * lambda as f64).sqrt(), -1.0, nu], 0.1, 1e-2)?;
        println!(
            "gamma for (lambda, nu) = ({lambda}, {nu}): kappa = {:.3e}, lambda_nf = {:.6}, nu_nf = {:.6}, remainder {:.2e}",
            res.kappa, res.lambda_nf, res.nu_nf, res.remainder_norm
        );
        let [p1, p2] = nf_fixed_points(res.lambda_nf, res.nu_nf, &tol)?;
        for p in [p1, p2] {
            println!(
                "  x = {:+.6}: {} stable / {} unstable, saddle-focus {}",
                p.point[0], p.n_stable, p.n_unstable, p.saddle_focus
            );
        }
    }
    Ok(())
}
