//! Couple nine copies of the designed node on a star and locate the critical coupling.
//! The full 36x36 spectrum is compared with the union of the 4x4 channel blocks.

use nilnet::coupling::{find_skew_directions, perturb_for_single_kernel, synthesize_d};
use nilnet::dynsim::alpha_stability_sweep;
use nilnet::graphlab::{EigenChoice, Graph};
use nilnet::netlin::{assemble_linearization, block_spectrum, choose_alpha_star};
use nilnet::numkit::{eigendecompose, spectral_distance, Matrix, Tolerances};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let a = Matrix::from_rows(&[
        [1.0, 1.0, 0.0, 0.0],
        [-1.0, 1.0, 1.0, 0.0],
        [0.0, -1.0, 1.0, 16.94],
        [1.0, -4.24, -4.24, -17.94],
    ]);
    let cert = find_skew_directions(&a, Some(3), &tol)?;
    let design = perturb_for_single_kernel(&synthesize_d(&a, &cert, None, &tol)?, 1e-2, &tol)?;
    let graph = Graph::star(8);

    let net = choose_alpha_star(&design.a, &design.d, &graph, EigenChoice::Largest, &tol)?;
    println!("alpha* = {:.6} on lambda = {:.6}, center dimension {}", net.alpha_star, net.lambda, net.m);

    let blocks = block_spectrum(&net, net.alpha_star, &tol)?;
    let union: Vec<_> = blocks.iter().flat_map(|b| b.spectrum.eigenvalues.iter().copied()).collect();
    let full = eigendecompose(&assemble_linearization(&net, net.alpha_star), false, &tol)?.eigenvalues;
    // The triple zero is defective, so roundoff spreads it by about eps^(1/3).
    println!("full spectrum vs union of blocks: {:.2e}", spectral_distance(&full, &union));

    let grid: Vec<f64> = (0..=40).map(|i| 0.2 * i as f64 / 40.0).collect();
    let sweep = alpha_stability_sweep(&graph, &design.a, &design.d, &grid, &tol)?;
    if let Some(c) = sweep.first_crossing {
        println!("first loss of stability near alpha = {:.6} in channel {} (lambda = {:.3})", c.alpha, c.channel, c.lambda);
    }
    Ok(())
}
