//! Center-manifold reduction of the star network and the inverse problem: pick a
//! target reduced field and recover a node nonlinearity that produces it.

use nilnet::cmred::{inverse_design, random_nonlinearity, reduced_field, PolyField};
use nilnet::coupling::{find_skew_directions, perturb_for_single_kernel, synthesize_d};
use nilnet::graphlab::{EigenChoice, Graph};
use nilnet::netlin::{center_split, choose_alpha_star};
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
    let design = perturb_for_single_kernel(&synthesize_d(&a, &cert, None, &tol)?, 1e-2, &tol)?;
    let net = choose_alpha_star(&design.a, &design.d, &Graph::star(8), EigenChoice::Largest, &tol)?;
    let split = center_split(&net.critical_block(), net.m, &tol)?;

    let h = random_nonlinearity(4, 3, 3, 1.0, 7);
    let model = reduced_field(&net, &split, &h, 3)?;
    println!("reduced field: {} states, {} parameters, order {}", model.reduced.n, model.reduced.d, model.order);
    println!("invariance residual {:.2e}", model.residual);
    println!("linear part (nilpotent):\n{:?}", model.reduced.linear_part());

    // Keep the linear part and ask for a single quadratic and a parameter term.
    let mut target = PolyField::linear(&split.nilpotent_block, 3, 3);
    target.add_term(&[2, 0, 0, 0, 0, 0], &[0.0, 0.0, -0.5]);
    target.add_term(&[0, 0, 1, 1, 0, 0], &[0.0, 0.0, 1.0]);
    let inv = inverse_design(&target, &net, &split, 3)?;
    println!("inverse design: {} terms, round-trip defect {:.2e}", inv.h.comps.iter().map(|p| p.terms.len()).sum::<usize>(), inv.defect);
    Ok(())
}
