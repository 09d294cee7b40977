//! Subcommand front end. Every command reads JSON, writes JSON or CSV, and maps
//! failures to exit code 2 (bad input) or 3 (numerics).

mod pipeline;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cmred::{inverse_design, reduced_field, CmError, PolyField};
use crate::coupling::{
    beta_sweep, find_skew_directions, perturb_for_single_kernel, synthesize_d, uniform_grid, CouplingError,
};
use crate::dynsim::{
    integrate, integrate_network, largest_lyapunov, shilnikov_scan, NetworkField, PolyVectorField, ScanConfig,
    ScanFamily, ScanGrid, ScanReport, SimConfig, SimError, Trajectory,
};
use crate::graphlab::{
    check_degree_versatility, check_versatile, gen_hub_graph, gen_two_component_versatile, EigenChoice, Graph,
    GraphError,
};
use crate::netlin::{block_spectrum, center_split, choose_alpha_star, NetError, NetworkDesign};
use crate::nform::{eliminate_lower, extract_unfolding, normal_form, normalize_frame, NfError};
use crate::numkit::{Matrix, NumError, Tolerances};

pub use pipeline::{run_pipeline, PipelineError, PipelineManifest, PipelineSummary, Source, StageRecord};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn tagged(self, tag: &str) -> Self {
        match self {
            Self::Validation(m) => Self::Validation(format!("{tag}: {m}")),
            Self::Numerical(m) => Self::Numerical(format!("{tag}: {m}")),
        }
    }
}

macro_rules! classify {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                if e.is_validation() { Self::Validation(e.to_string()) } else { Self::Numerical(e.to_string()) }
            }
        }
    )*};
}
classify!(NumError, GraphError, CouplingError, NetError, CmError, NfError, SimError);

#[derive(Parser, Debug)]
#[command(name = "nilnet", version, about = "Nilpotent singularities in diffusively coupled networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_zero_eig: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol_gap: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_posdef: f64,
    #[arg(long, global = true, default_value_t = 1e-13)]
    pub tol_iter: f64,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write artifacts here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Global {
    fn tolerances(&self) -> Result<Tolerances, CliError> {
        let tol = Tolerances {
            zero_eig: self.tol_zero_eig,
            gap: self.tol_gap,
            posdef_margin: self.tol_posdef,
            iter_eps: self.tol_iter,
        };
        tol.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(tol)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Graph generation and versatility checks.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Coupling-matrix synthesis and β-sweeps.
    #[command(subcommand)]
    Couple(CoupleCmd),
    /// Network linearization.
    #[command(subcommand)]
    Net(NetCmd),
    /// Center-manifold reduction.
    #[command(subcommand)]
    Cm(CmCmd),
    /// Normal-form reduction.
    #[command(subcommand)]
    Nf(NfCmd),
    /// Simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// End-to-end pipeline.
    #[command(subcommand)]
    Pipeline(PipelineCmd),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    TwoComp,
    Hub,
    Star,
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    Gen {
        #[arg(long, value_enum)]
        kind: GraphKind,
        /// two-comp: size of the first component (a path unless --first is given).
        #[arg(long)]
        s: Option<usize>,
        /// two-comp: size of the second component.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        first: Option<PathBuf>,
        #[arg(long)]
        second: Option<PathBuf>,
        /// hub: number of peripheral nodes.
        #[arg(long)]
        n: Option<usize>,
        /// hub: degree cap of peripheral nodes.
        #[arg(long)]
        r: Option<usize>,
        /// hub: hub degree.
        #[arg(long)]
        c: Option<usize>,
        /// star: number of leaves.
        #[arg(long)]
        leaves: Option<usize>,
    },
    Check {
        #[arg(long)]
        rho: usize,
        #[arg(long)]
        input: PathBuf,
        /// Ascending position of the eigenvalue; defaults to the largest.
        #[arg(long)]
        index: Option<usize>,
        /// Also evaluate the hub degree condition.
        #[arg(long)]
        degree: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum CoupleCmd {
    Synth {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        c: Option<f64>,
        /// Perturb the design so the kernel becomes a single nilpotent block.
        #[arg(long)]
        single_kernel: Option<f64>,
    },
    Sweep {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "D")]
        d: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum NetCmd {
    /// Build a network design from A, D and a graph.
    Design {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "D")]
        d: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        index: Option<usize>,
    },
    Spectrum {
        #[arg(long)]
        design: PathBuf,
        /// Defaults to the design's α*.
        #[arg(long)]
        alpha: Option<f64>,
    },
    Split {
        #[arg(long)]
        design: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum CmCmd {
    Reduce {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long, default_value_t = 3)]
        rho: u32,
    },
    Design {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value_t = 3)]
        rho: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum NfCmd {
    Reduce {
        #[arg(long)]
        jet: PathBuf,
        #[arg(long)]
        kappa: f64,
        /// γ₁,γ₂,γ₃
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        gamma: Vec<f64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SimCmd {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    Lyap {
        #[arg(long)]
        config: PathBuf,
    },
    Scan {
        /// Without a config the truncated family is scanned on the default 20×20×3 grid.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum PipelineCmd {
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// `sim run` / `sim lyap` input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// Node field in (x; ε).
    pub field: PolyField,
    #[serde(default)]
    pub eps: Vec<f64>,
    pub x0: Vec<f64>,
    /// Couple N copies of `field` when present; `x0` is then the stacked state.
    #[serde(default)]
    pub network: Option<NetworkSpec>,
    #[serde(default)]
    pub sim: SimConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub graph: Graph,
    pub d: Matrix,
    pub alpha: f64,
}

/// `sim scan` input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    #[serde(default = "default_scan_grid")]
    pub grid: ScanGrid,
    #[serde(default)]
    pub scan: ScanConfig,
    /// Reduced 3D field to blow up; the truncated family is used when absent.
    #[serde(default)]
    pub jet: Option<PolyField>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { grid: default_scan_grid(), scan: ScanConfig::default(), jet: None }
    }
}

pub fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

/// λ ∈ [0.05, 1], ν ∈ [−1, 0] on 20 points each, κ ∈ {0, 0.01, 0.02}. Orbits of the
/// truncated family escape for ν > 0, where the flow expands volume.
pub fn default_scan_grid() -> ScanGrid {
    ScanGrid { lambdas: linspace(0.05, 1.0, 20), nus: linspace(-1.0, 0.0, 20), kappas: vec![0.0, 0.01, 0.02] }
}

/// Matrix file: either `{"rows", "cols", "data"}` or a plain array of rows.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixFile {
    Rows(Vec<Vec<f64>>),
    Flat(Matrix),
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<Matrix, CliError> {
        match self {
            Self::Flat(m) => Ok(m),
            Self::Rows(rows) => {
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    return Err(CliError::Validation("ragged matrix rows".into()));
                }
                Matrix::new(rows.len(), cols, rows.concat()).map_err(|e| CliError::Validation(e.to_string()))
            }
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    read_json::<MatrixFile>(path)?.into_matrix().map_err(|e| e.tagged(&path.display().to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| e.tagged(&path.display().to_string()))
}

/// Deserialize, reporting schema violations with a JSON pointer.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        CliError::Validation(format!("schema violation at '{pointer}': {}", e.inner()))
    })
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => write!(out, "{index}").unwrap(),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Numerical(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?)
        .map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn trajectory_csv(traj: &Trajectory) -> Result<String, CliError> {
    let dim = traj.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("x{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_string(
        &header,
        traj.times.iter().zip(&traj.states).map(|(t, x)| std::iter::once(*t).chain(x.iter().copied()).map(f).collect()),
    )
}

pub fn scan_csv(report: &ScanReport) -> Result<String, CliError> {
    let opt = |x: Option<f64>| x.map(f).unwrap_or_default();
    csv_string(
        &["lambda", "nu", "kappa", "saddle_focus", "shilnikov_ratio", "shooting_distance", "lyapunov", "note"],
        report.points.iter().map(|p| {
            vec![
                f(p.lambda),
                f(p.nu),
                f(p.kappa),
                p.saddle.as_ref().map(|s| s.saddle_focus.to_string()).unwrap_or_default(),
                p.saddle.as_ref().map(|s| s.shilnikov_ratio.to_string()).unwrap_or_default(),
                opt(p.shooting_distance),
                opt(p.lyapunov),
                p.skipped.clone().or_else(|| p.lyapunov_note.clone()).unwrap_or_default(),
            ]
        }),
    )
}

struct Sink<'a> {
    out: Option<&'a Path>,
    format: Option<Format>,
}

impl Sink<'_> {
    fn want_csv(&self, default_csv: bool) -> bool {
        self.format.map_or(default_csv, |f| f == Format::Csv)
    }

    fn emit(&self, name: &str, body: &str) -> Result<(), CliError> {
        match self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
                let p = dir.join(name);
                std::fs::write(&p, body)
                    .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display())))?;
                eprintln!("wrote {}", p.display());
            }
            None => print!("{body}"),
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<(), CliError> {
        self.emit(name, &to_json(v))
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    let tol = g.tolerances()?;
    let sink = Sink { out: g.out.as_deref(), format: g.format };
    match &cli.cmd {
        Cmd::Graph(c) => graph_cmd(c, g, &tol, &sink),
        Cmd::Couple(c) => couple_cmd(c, &tol, &sink),
        Cmd::Net(c) => net_cmd(c, &tol, &sink),
        Cmd::Cm(c) => cm_cmd(c, &tol, &sink),
        Cmd::Nf(NfCmd::Reduce { jet, kappa, gamma }) => {
            let r: PolyField = read_json(jet)?;
            let gamma: [f64; 3] = gamma
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Validation("--gamma takes exactly three values".into()))?;
            let (_, unfolding, result) = normal_form(&r, *kappa, gamma)?;
            eprintln!("lambda_nf = {:.6e}, nu_nf = {:.6e}", result.lambda_nf, result.nu_nf);
            #[derive(Serialize)]
            struct Out<'a> {
                unfolding: &'a crate::nform::Unfolding,
                normal_form: &'a crate::nform::NormalFormResult,
            }
            sink.json("normal_form.json", &Out { unfolding: &unfolding, normal_form: &result })
        }
        Cmd::Sim(c) => sim_cmd(c, &tol, &sink),
        Cmd::Pipeline(PipelineCmd::Run { manifest }) => {
            let mut m: PipelineManifest = read_json(manifest)?;
            if let Some(seed) = g.seed {
                m.seed = seed;
            }
            let base = manifest.parent().unwrap_or(Path::new("."));
            let out = g.out.clone().unwrap_or_else(|| PathBuf::from("pipeline_out"));
            let summary = run_pipeline(&m, base, &out).map_err(|e| {
                let msg = e.to_string();
                if e.validation { CliError::Validation(msg) } else { CliError::Numerical(msg) }
            })?;
            print!("{}", to_json(&summary));
            Ok(())
        }
    }
}

fn graph_cmd(c: &GraphCmd, g: &Global, tol: &Tolerances, sink: &Sink) -> Result<(), CliError> {
    match c {
        GraphCmd::Gen { kind, s, t, first, second, n, r, c, leaves } => {
            let need = |v: &Option<usize>, name: &str| {
                v.ok_or_else(|| CliError::Validation(format!("--kind {kind:?} requires --{name}")))
            };
            let graph = match kind {
                GraphKind::Star => Graph::star(need(leaves, "leaves")?),
                GraphKind::Hub => gen_hub_graph(need(n, "n")?, need(r, "r")?, need(c, "c")?, g.seed.unwrap_or(0))?,
                GraphKind::TwoComp => {
                    let comp = |file: &Option<PathBuf>, size: &Option<usize>, name: &str| match file {
                        Some(p) => read_json::<Graph>(p),
                        None => Ok(Graph::path(need(size, name)?)),
                    };
                    let design = gen_two_component_versatile(&comp(first, s, "s")?, &comp(second, t, "t")?, tol)?;
                    eprintln!("largest eigenvalue {} (residual {:.1e})", design.eigenvalue, design.residual);
                    design.graph
                }
            };
            sink.json("graph.json", &graph)
        }
        GraphCmd::Check { rho, input, index, degree } => {
            let graph: Graph = read_json(input)?;
            if *degree {
                sink.json("versatility.json", &check_degree_versatility(&graph, *rho, tol)?)
            } else {
                let which = index.map_or(EigenChoice::Largest, EigenChoice::Index);
                sink.json("versatility.json", &check_versatile(&graph, *rho, which, tol)?)
            }
        }
    }
}

fn couple_cmd(c: &CoupleCmd, tol: &Tolerances, sink: &Sink) -> Result<(), CliError> {
    match c {
        CoupleCmd::Synth { a, m, c, single_kernel } => {
            let a = read_matrix(a)?;
            let cert = find_skew_directions(&a, *m, tol)?;
            let mut design = synthesize_d(&a, &cert, *c, tol)?;
            if let Some(eps) = single_kernel {
                design = perturb_for_single_kernel(&design, *eps, tol)?;
            }
            eprintln!("m = {}, c = {:.6}", design.m, design.c);
            sink.json("coupling.json", &design)
        }
        CoupleCmd::Sweep { a, d, steps } => {
            if *steps == 0 {
                return Err(CliError::Validation("--steps must be positive".into()));
            }
            let (a, d) = (read_matrix(a)?, read_matrix(d)?);
            let res = beta_sweep(&a, &d, &uniform_grid(*steps), tol)?;
            if !sink.want_csv(true) {
                return sink.json("sweep.json", &res);
            }
            let rows = res.betas.iter().enumerate().flat_map(|(b, beta)| {
                res.eigenvalues[b].iter().enumerate().map(move |(k, z)| vec![f(*beta), k.to_string(), f(z.re), f(z.im)])
            });
            sink.emit("sweep.csv", &csv_string(&["beta", "index", "re", "im"], rows)?)?;
            match sink.out {
                Some(_) => {
                    #[derive(Serialize)]
                    struct Events<'a> {
                        events: &'a [crate::coupling::SweepEvent],
                        ambiguities: &'a [crate::coupling::SweepAmbiguity],
                    }
                    sink.json("events.json", &Events { events: &res.events, ambiguities: &res.ambiguities })
                }
                None => {
                    for e in &res.events {
                        eprintln!("{e:?}");
                    }
                    Ok(())
                }
            }
        }
    }
}

fn net_cmd(c: &NetCmd, tol: &Tolerances, sink: &Sink) -> Result<(), CliError> {
    match c {
        NetCmd::Design { a, d, graph, index } => {
            let (a, d) = (read_matrix(a)?, read_matrix(d)?);
            let graph: Graph = read_json(graph)?;
            let which = index.map_or(EigenChoice::Largest, EigenChoice::Index);
            let net = choose_alpha_star(&a, &d, &graph, which, tol)?;
            eprintln!("alpha* = {:.12}, lambda = {:.12}, m = {}", net.alpha_star, net.lambda, net.m);
            sink.json("design.json", &net)
        }
        NetCmd::Spectrum { design, alpha } => {
            let net = read_design(design)?;
            let blocks = block_spectrum(&net, alpha.unwrap_or(net.alpha_star), tol)?;
            if !sink.want_csv(true) {
                return sink.json("spectrum.json", &blocks);
            }
            let rows = blocks.iter().enumerate().flat_map(|(ch, b)| {
                let lambda = b.lambda;
                b.spectrum.eigenvalues.iter().zip(&b.spectrum.classes).enumerate().map(move |(i, (z, cls))| {
                    vec![ch.to_string(), f(lambda), i.to_string(), f(z.re), f(z.im), cls.as_str().to_string()]
                })
            });
            sink.emit("spectrum.csv", &csv_string(&["channel", "lambda", "index", "re", "im", "class"], rows)?)
        }
        NetCmd::Split { design } => {
            let net = read_design(design)?;
            sink.json("split.json", &center_split(&net.critical_block(), net.m, tol)?)
        }
    }
}

fn read_design(path: &Path) -> Result<NetworkDesign, CliError> {
    let net: NetworkDesign = read_json(path)?;
    net.validate()?;
    Ok(net)
}

fn cm_cmd(c: &CmCmd, tol: &Tolerances, sink: &Sink) -> Result<(), CliError> {
    match c {
        CmCmd::Reduce { design, h, rho } => {
            let net = read_design(design)?;
            let h: PolyField = read_json(h)?;
            let split = center_split(&net.critical_block(), net.m, tol)?;
            let model = reduced_field(&net, &split, &h, *rho)?;
            eprintln!("invariance residual {:.3e}", model.residual);
            sink.json("center_model.json", &model)
        }
        CmCmd::Design { target, design, rho } => {
            let net = read_design(design)?;
            let target: PolyField = read_json(target)?;
            let split = center_split(&net.critical_block(), net.m, tol)?;
            let inv = inverse_design(&target, &net, &split, *rho)?;
            eprintln!("round-trip defect {:.3e}", inv.defect);
            sink.json("inverse_design.json", &inv)
        }
    }
}

fn sim_cmd(c: &SimCmd, tol: &Tolerances, sink: &Sink) -> Result<(), CliError> {
    match c {
        SimCmd::Run { config } => {
            let spec: SimSpec = read_json(config)?;
            let traj = match &spec.network {
                Some(net) => integrate_network(&net.graph, &net.d, net.alpha, &spec.field, &spec.eps, &spec.x0, &spec.sim)?,
                None => integrate(&PolyVectorField::new(spec.field.clone(), spec.eps.clone())?, &spec.x0, &spec.sim)?,
            };
            if let Some(t) = traj.blow_up {
                eprintln!("warning: trajectory escaped |x| < 1e8 at t = {t:.6e} and was truncated");
            }
            if sink.want_csv(true) {
                sink.emit("trajectory.csv", &trajectory_csv(&traj)?)
            } else {
                sink.json("trajectory.json", &traj)
            }
        }
        SimCmd::Lyap { config } => {
            let spec: SimSpec = read_json(config)?;
            let node = PolyVectorField::new(spec.field.clone(), spec.eps.clone())?;
            let est = match &spec.network {
                Some(net) => {
                    let field = NetworkField::new(&net.graph, net.d.clone(), net.alpha, node)?;
                    largest_lyapunov(&field, &spec.x0, &spec.sim)?
                }
                None => largest_lyapunov(&node, &spec.x0, &spec.sim)?,
            };
            sink.json("lyapunov.json", &est)
        }
        SimCmd::Scan { config } => {
            let spec = match config {
                Some(p) => read_json::<ScanSpec>(p)?,
                None => ScanSpec::default(),
            };
            let family = match &spec.jet {
                Some(r) => {
                    let jet = eliminate_lower(&normalize_frame(r)?)?;
                    let unfolding = extract_unfolding(&jet)?;
                    ScanFamily::Jet { jet, unfolding }
                }
                None => ScanFamily::Truncated,
            };
            let report = shilnikov_scan(&family, &spec.grid, &spec.scan, tol)?;
            if sink.want_csv(false) {
                sink.emit("scan.csv", &scan_csv(&report)?)
            } else {
                sink.json("scan.json", &report)
            }
        }
    }
}
