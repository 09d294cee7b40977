//! Build a coupling matrix D that gives the 4x4 example a triple zero eigenvalue,
//! then break the kernel down to a single nilpotent block.

use nilnet::coupling::{find_skew_directions, perturb_for_single_kernel, synthesize_d};
use nilnet::numkit::{eigendecompose, Matrix, Tolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let a = Matrix::from_rows(&[
        [1.0, 1.0, 0.0, 0.0],
        [-1.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 1.0, 16.94],
        [1.0, -4.24, -4.24, -17.94],
    ]);
    let cert = find_skew_directions(&a, Some(3), &tol)?;
    println!("skew directions ({:?}): rayleigh quotients {:?}", cert.source, cert.rayleigh);

    let design = synthesize_d(&a, &cert, None, &tol)?;
    println!("smallest admissible c = {:.4}", design.c);
    println!("D =\n{:?}", design.d);
    let spec = eigendecompose(&design.a_minus_d(), false, &tol)?;
    for z in &spec.eigenvalues {
        println!("  eig(A - D) = {:+.6} {:+.6}i", z.re, z.im);
    }
    let audit = design.audit(&tol)?;
    println!("audit: {audit:?}");

    let single = perturb_for_single_kernel(&design, 1e-2, &tol)?;
    println!("after perturbation: kernel geometric multiplicity {}", single.kernel_geom);
    Ok(())
}
