//! Laplacian spectra and versatility checks for the small graphs used throughout,
//! plus the two constructive families (complement of two components, hub graphs).

use nilnet::graphlab::{
    check_degree_versatility, check_versatile, gen_hub_graph, gen_two_component_versatile, laplacian_spectrum,
    spectral_gap_bound, EigenChoice, Graph,
};
use nilnet::numkit::Tolerances;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();

    let star9 = Graph::star(8);
    let spec = laplacian_spectrum(&star9, &tol)?;
    println!("star on 9 nodes: {:?}", spec.real_values().iter().map(|x| x.round()).collect::<Vec<_>>());
    let rep = check_versatile(&star9, 3, EigenChoice::Largest, &tol)?;
    println!("  lambda = {:.6}, power sums {:?}, versatile: {}", rep.eigenvalue, rep.power_sums, rep.verdict);

    // Path on two nodes: eigenvector (1, -1) kills every odd power sum.
    let rep = check_versatile(&Graph::path(2), 2, EigenChoice::Largest, &tol)?;
    println!("path on 2 nodes: versatile = {}, fails at l = {:?}", rep.verdict, rep.failed_at);

    let design = gen_two_component_versatile(&Graph::path(2), &Graph::complete(3), &tol)?;
    println!(
        "complement of P2 + K3: lambda = {}, eigenvector {:?}",
        design.eigenvalue, design.eigenvector
    );
    let rep = check_versatile(&design.graph, 10, EigenChoice::Largest, &tol)?;
    println!("  versatile through l = 11: {}", rep.verdict);

    let hub = gen_hub_graph(27, 3, 20, 42)?;
    let deg = check_degree_versatility(&hub, 3, &tol)?;
    let gap = spectral_gap_bound(&hub, &tol)?;
    println!(
        "hub graph (N = 27, r = 3, C = 20): condition {}, lambda >= C+1: {:?}, kappa/mu = {:.4} <= {:.4}",
        deg.hypothesis_holds, deg.lambda_bound_ok, gap.ratio, gap.bound
    );
    Ok(())
}
