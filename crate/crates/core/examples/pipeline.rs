//! End-to-end run on the 4x4 example node and a star on nine nodes with a seeded cubic
//! nonlinearity. Artifacts go to the directory given as the first argument.

use std::path::PathBuf;

use nilnet::cli::{run_pipeline, PipelineManifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("nilnet_pipeline"));
    let manifest = PipelineManifest::from_json(
        r#"{
            "a": [[1.0, 1.0, 0.0, 0.0], [-1.0, 1.0, 1.0, 0.0], [0.0, -1.0, 1.0, 16.94], [1.0, -4.24, -4.24, -17.94]],
            "graph": {"n": 9, "edges": [[0,1],[0,2],[0,3],[0,4],[0,5],[0,6],[0,7],[0,8]]},
            "seed": 7,
            "nf_lambdas": [0.5, 1.0],
            "nf_nus": [0.0, 0.3]
        }"#,
    )?;
    let summary = run_pipeline(&manifest, std::path::Path::new("."), &out)?;
    println!("m = {}, c = {:.4}, alpha* = {:.6}, versatile = {}", summary.m, summary.c, summary.alpha_star, summary.versatile);
    println!("invariance residual {:.2e}, a1 generic {:?}", summary.cm_residual, summary.a1_generic);
    for r in &summary.normal_forms {
        println!("  gamma {:?}: kappa {:.2e}, lambda_nf {:.4}, nu_nf {:.4}", r.gamma, r.kappa, r.lambda_nf, r.nu_nf);
    }
    for r in &summary.lyapunov {
        println!("  (lambda, nu) = ({}, {}): lyapunov {:?} {}", r.lambda, r.nu, r.lyapunov, r.note.as_deref().unwrap_or(""));
    }
    for s in &summary.stages {
        println!("  {:<12} {} {}", s.stage, &s.input_hash[..12], if s.cached { "(cached)" } else { "" });
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
