//! Eigenvalue paths of A - beta*D for beta in [0, 1] with the c = 21 design.
//!
//! Pass a path to also write the plot-ready CSV (beta, index, re, im).

use std::io::Write;

use nilnet::coupling::{beta_sweep, find_skew_directions, synthesize_d, uniform_grid};
use nilnet::numkit::{Matrix, Tolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let a = Matrix::from_rows(&[
        [1.0, 1.0, 0.0, 0.0],
        [-1.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 1.0, 16.94],
        [1.0, -4.24, -4.24, -17.94],
    ]);
    let cert = find_skew_directions(&a, Some(3), &tol)?;
    let design = synthesize_d(&a, &cert, Some(21.0), &tol)?;
    let res = beta_sweep(&a, &design.d, &uniform_grid(1000), &tol)?;

    for e in &res.events {
        println!("beta = {:.4}  {:?} (branch {}, imag {:.4})", e.beta, e.kind, e.branch, e.imag);
    }
    println!("eigenvalues with Re > 0 at beta = 0.5: {}", res.count_positive(500, 0.0));
    let zeros = res.eigenvalues[1000].iter().filter(|z| z.norm() < 1e-6).count();
    println!("eigenvalues at zero for beta = 1: {zeros}");

    if let Some(path) = std::env::args().nth(1) {
        let mut out = std::fs::File::create(&path)?;
        writeln!(out, "beta,index,re,im")?;
        for (b, beta) in res.betas.iter().enumerate() {
            for (k, z) in res.eigenvalues[b].iter().enumerate() {
                writeln!(out, "{beta:.16e},{k},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        println!("wrote {path}");
    }
    Ok(())
}
