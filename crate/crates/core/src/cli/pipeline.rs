//! End-to-end run: coupling → network → versatility → split → center manifold →
//! normal form → scan. Each stage output is cached under the hash of its inputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{parse_json, read_json, read_matrix, to_json, CliError, MatrixFile};
use crate::cmred::{random_nonlinearity, CmError, reduced_field, CenterModel, PolyField};
use crate::coupling::{find_skew_directions, perturb_for_single_kernel, synthesize_d, CouplingDesign};
use crate::dynsim::{shilnikov_scan, ScanConfig, ScanFamily, ScanGrid, ScanReport};
use crate::graphlab::{check_versatile, EigenChoice, Graph, VersatilityReport};
use crate::netlin::{center_split, choose_alpha_star, CenterSplit, NetworkDesign};
use crate::nform::{
    blow_up_and_scale, choose_kappa, classify_center, eliminate_lower, extract_unfolding, normalize_frame, CenterClass,
    Unfolding,
};
use crate::numkit::{Matrix, Tolerances};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A value given inline or as a path relative to the manifest.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned> Source<T> {
    fn load(&self, base: &Path) -> Result<T, CliError>
    where
        T: Clone,
    {
        match self {
            Self::Path(p) => read_json(&base.join(p)),
            Self::Inline(v) => Ok(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineManifest {
    /// Node linear part.
    pub a: Source<MatrixFile>,
    pub graph: Source<Graph>,
    /// Center dimension to build; defaults to every available skew direction.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub c: Option<f64>,
    /// Single-kernel perturbation size, used when m ≥ 2.
    #[serde(default = "default_single_kernel")]
    pub single_kernel_eps: Option<f64>,
    /// Ascending Laplacian index; defaults to the largest eigenvalue.
    #[serde(default)]
    pub eigen_index: Option<usize>,
    #[serde(default = "default_rho")]
    pub rho: u32,
    /// Node nonlinearity; a seeded random cubic is drawn when absent.
    #[serde(default)]
    pub h: Option<Source<PolyField>>,
    /// Number of unfolding parameters for the random nonlinearity.
    #[serde(default = "default_params")]
    pub params: usize,
    #[serde(default = "default_h_scale")]
    pub h_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Blow-up parameter; chosen from `max_remainder` when absent.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Largest O(κ) remainder bound accepted by the automatic κ choice.
    #[serde(default = "default_max_remainder")]
    pub max_remainder: f64,
    /// Targets for γ₁ = √(2λ), paired with every entry of `nf_nus` (γ₃).
    #[serde(default = "default_nf_lambdas")]
    pub nf_lambdas: Vec<f64>,
    #[serde(default = "default_nf_nus")]
    pub nf_nus: Vec<f64>,
    #[serde(default = "default_true")]
    pub run_scan: bool,
    #[serde(default)]
    pub scan: ScanConfig,
}

fn default_single_kernel() -> Option<f64> {
    Some(1e-2)
}
fn default_rho() -> u32 {
    3
}
fn default_params() -> usize {
    3
}
fn default_h_scale() -> f64 {
    1.0
}
fn default_max_remainder() -> f64 {
    0.05
}
fn default_nf_lambdas() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}
fn default_nf_nus() -> Vec<f64> {
    vec![0.0]
}
fn default_true() -> bool {
    true
}

impl PipelineManifest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        parse_json(text)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("stage {stage}: {message}")]
pub struct PipelineError {
    pub stage: String,
    pub message: String,
    pub validation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub input_hash: String,
    pub output_hash: String,
    #[serde(skip)]
    pub cached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfRow {
    pub gamma: [f64; 3],
    pub kappa: f64,
    pub lambda_nf: f64,
    pub nu_nf: f64,
    pub remainder_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfStage {
    pub unfolding: Unfolding,
    pub rows: Vec<NfRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapRow {
    pub lambda: f64,
    pub nu: f64,
    pub kappa: f64,
    pub saddle_focus: Option<bool>,
    pub lyapunov: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub alpha_star: f64,
    pub lambda: f64,
    pub versatile: bool,
    pub center_class: CenterClass,
    pub cm_residual: f64,
    pub a1_generic: Option<bool>,
    pub normal_forms: Vec<NfRow>,
    pub lyapunov: Vec<LyapRow>,
    pub stages: Vec<StageRecord>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Lock<'a> {
    version: &'a str,
    seed: u64,
    tolerances: Tolerances,
    inputs: BTreeMap<&'a str, String>,
    stages: &'a [StageRecord],
}

#[derive(Serialize)]
struct Artifact<'a, T> {
    stage: &'a str,
    input_hash: &'a str,
    output: &'a T,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Runner<'a> {
    out: &'a Path,
    records: Vec<StageRecord>,
}

impl Runner<'_> {
    fn stage<I, T>(&mut self, name: &str, inputs: &I, compute: impl FnOnce() -> Result<T, CliError>) -> Result<T, PipelineError>
    where
        I: Serialize,
        T: Serialize + DeserializeOwned,
    {
        let fail = |e: CliError| PipelineError {
            stage: name.to_string(),
            validation: matches!(e, CliError::Validation(_)),
            message: e.to_string(),
        };
        let io = |e: std::io::Error| fail(CliError::Validation(e.to_string()));
        let key = serde_json::to_string(&(VERSION, name, inputs)).expect("serializable");
        let input_hash = sha_hex(key.as_bytes());
        let cache_dir = self.out.join("cache");
        std::fs::create_dir_all(&cache_dir).map_err(io)?;
        let cache = cache_dir.join(format!("{name}-{}.json", &input_hash[..16]));
        let cached = cache.exists().then(|| read_json::<T>(&cache).ok()).flatten();
        let hit = cached.is_some();
        let value = match cached {
            Some(v) => v,
            None => {
                let v = compute().map_err(fail)?;
                std::fs::write(&cache, to_json(&v)).map_err(io)?;
                v
            }
        };
        let body = to_json(&Artifact { stage: name, input_hash: &input_hash, output: &value });
        std::fs::write(self.out.join(format!("{name}.json")), &body).map_err(io)?;
        self.records.push(StageRecord { stage: name.into(), input_hash, output_hash: sha_hex(body.as_bytes()), cached: hit });
        Ok(value)
    }
}

/// Run every stage, writing artifacts, `summary.json` and `manifest.lock.json` into `out`.
///
/// Relative paths in the manifest resolve against `base`.
pub fn run_pipeline(manifest: &PipelineManifest, base: &Path, out: &Path) -> Result<PipelineSummary, PipelineError> {
    let input_err = |e: CliError| PipelineError { stage: "inputs".into(), validation: true, message: e.to_string() };
    std::fs::create_dir_all(out).map_err(|e| input_err(CliError::Validation(e.to_string())))?;
    let tol = manifest.tolerances;
    tol.validate().map_err(|e| input_err(CliError::Validation(e.to_string())))?;

    let a: Matrix = match &manifest.a {
        Source::Path(p) => read_matrix(&base.join(p)),
        Source::Inline(m) => m.clone().into_matrix(),
    }
    .map_err(input_err)?;
    let graph = manifest.graph.load(base).map_err(input_err)?;
    let n = a.rows();
    let h = match &manifest.h {
        Some(src) => src.load(base).map_err(input_err)?,
        None => random_nonlinearity(n, manifest.params, 3, manifest.h_scale, manifest.seed),
    };

    let mut inputs = BTreeMap::new();
    inputs.insert("a", sha_hex(to_json(&a).as_bytes()));
    inputs.insert("graph", sha_hex(to_json(&graph).as_bytes()));
    inputs.insert("h", sha_hex(to_json(&h).as_bytes()));

    let mut run = Runner { out, records: Vec::new() };
    let mut notes = Vec::new();

    let coupling: CouplingDesign =
        run.stage("coupling", &(&a, manifest.m, manifest.c, manifest.single_kernel_eps, &tol), || {
            let cert = find_skew_directions(&a, manifest.m, &tol)?;
            let mut design = synthesize_d(&a, &cert, manifest.c, &tol)?;
            if let (Some(eps), true) = (manifest.single_kernel_eps, design.m >= 2) {
                design = perturb_for_single_kernel(&design, eps, &tol)?;
            }
            Ok(design)
        })?;

    let which = manifest.eigen_index.map_or(EigenChoice::Largest, EigenChoice::Index);
    let net: NetworkDesign = run.stage("network", &(&coupling.a, &coupling.d, &graph, manifest.eigen_index, &tol), || {
        Ok(choose_alpha_star(&coupling.a, &coupling.d, &graph, which, &tol)?)
    })?;
    if net.delta != 0.0 {
        notes.push(format!("non-distinguished blocks shifted by delta = {:e} for hyperbolicity", net.delta));
    }

    let rho = manifest.rho as usize;
    let versatility: VersatilityReport = run.stage("versatility", &(&graph, rho, net.eigen_index, &tol), || {
        Ok(check_versatile(&graph, rho, EigenChoice::Index(net.eigen_index), &tol)?)
    })?;

    let split: CenterSplit =
        run.stage("split", &(&net, &tol), || Ok(center_split(&net.critical_block(), net.m, &tol)?))?;

    let model: CenterModel =
        run.stage("cm", &(&net, &split, &h, manifest.rho, versatility.verdict), || {
            if let Some(ell) = versatility.failed_at {
                let sum = versatility.power_sums[ell - 2];
                return Err(CmError::NotVersatile { ell, sum }.into());
            }
            if !versatility.verdict {
                let reason = versatility.reason.clone().unwrap_or_default();
                return Err(CliError::Validation(format!("graph not versatile: {reason}")));
            }
            Ok(reduced_field(&net, &split, &h, manifest.rho)?)
        })?;

    let center_class = classify_center(net.m);
    let mut normal_forms = Vec::new();
    let mut lyapunov = Vec::new();
    let mut a1_generic = None;
    if net.m == 3 {
        let gammas: Vec<[f64; 3]> = manifest
            .nf_lambdas
            .iter()
            .flat_map(|&l| manifest.nf_nus.iter().map(move |&nu| [(2.0 * l).sqrt(), -1.0, nu]))
            .collect();
        let nf: NfStage = run.stage("nf", &(&model.reduced, manifest.kappa, manifest.max_remainder, &gammas), || {
            let jet = eliminate_lower(&normalize_frame(&model.reduced)?)?;
            let unfolding = extract_unfolding(&jet)?;
            let mut rows = Vec::new();
            for &gamma in &gammas {
                let res = match manifest.kappa {
                    Some(k) => blow_up_and_scale(&jet, &unfolding, k, gamma)?,
                    None => choose_kappa(&jet, &unfolding, gamma, 0.1, manifest.max_remainder)?,
                };
                rows.push(NfRow {
                    gamma,
                    kappa: res.kappa,
                    lambda_nf: res.lambda_nf,
                    nu_nf: res.nu_nf,
                    remainder_norm: res.remainder_norm,
                });
            }
            Ok(NfStage { unfolding, rows })
        })?;
        a1_generic = Some(nf.unfolding.a1_generic);
        normal_forms = nf.rows;

        if manifest.run_scan {
            let kappa = normal_forms.iter().map(|r: &NfRow| r.kappa).fold(f64::INFINITY, f64::min);
            let grid = ScanGrid { lambdas: manifest.nf_lambdas.clone(), nus: manifest.nf_nus.clone(), kappas: vec![kappa] };
            let mut cfg = manifest.scan.clone();
            cfg.lyapunov.seed = manifest.seed;
            let report: ScanReport = run.stage("scan", &(&model.reduced, &grid, &cfg, &tol), || {
                let jet = eliminate_lower(&normalize_frame(&model.reduced)?)?;
                let unfolding = extract_unfolding(&jet)?;
                Ok(shilnikov_scan(&ScanFamily::Jet { jet, unfolding }, &grid, &cfg, &tol)?)
            })?;
            lyapunov = report
                .points
                .iter()
                .map(|p| LyapRow {
                    lambda: p.lambda,
                    nu: p.nu,
                    kappa: p.kappa,
                    saddle_focus: p.saddle.as_ref().map(|s| s.saddle_focus),
                    lyapunov: p.lyapunov,
                    note: p.skipped.clone().or_else(|| p.lyapunov_note.clone()),
                })
                .collect();
        }
    } else {
        notes.push(format!("center dimension {} is not 3; normal form and scan skipped", net.m));
    }

    let summary = PipelineSummary {
        n,
        m: net.m,
        c: coupling.c,
        alpha_star: net.alpha_star,
        lambda: net.lambda,
        versatile: versatility.verdict,
        center_class,
        cm_residual: model.residual,
        a1_generic,
        normal_forms,
        lyapunov,
        stages: run.records.clone(),
        notes,
    };
    let write = |name: &str, body: String| {
        std::fs::write(out.join(name), body).map_err(|e| input_err(CliError::Validation(e.to_string())))
    };
    write("summary.json", to_json(&summary))?;
    write(
        "manifest.lock.json",
        to_json(&Lock { version: VERSION, seed: manifest.seed, tolerances: tol, inputs, stages: &run.records }),
    )?;
    Ok(summary)
}
