//! ODE integration of networks, reduced and normal-form fields; Lyapunov exponents,
//! synchronization error, coupling sweeps and the saddle-focus scan.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmred::{Poly, PolyField};
use crate::graphlab::{laplacian, laplacian_spectrum, Graph, GraphError};
use crate::nform::{blow_up_and_scale, Jet3, Unfolding};
use crate::numkit::{dot, eigendecompose, norm2, null_space, solve, Matrix, NumError, Tolerances};

/// States with a larger max-norm count as escaped.
pub const BLOW_UP: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("orbit left the ball of radius 1e8 at t = {t}")]
    Unbounded { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Num(#[from] NumError),
}

impl SimError {
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Config(_) | Self::Shape(_) => true,
            Self::Graph(e) => e.is_validation(),
            Self::Num(e) => e.is_validation(),
            _ => false,
        }
    }
}

pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);

    /// Directional derivative `Df(x)·v`; central differences unless overridden.
    fn jvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let nv = norm2(v);
        if nv == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let h = 1e-6 * (1.0 + norm2(x)) / nv;
        let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let mut fm = vec![0.0; out.len()];
        self.eval(&xp, out);
        self.eval(&xm, &mut fm);
        for (o, m) in out.iter_mut().zip(fm) {
            *o = (*o - m) / (2.0 * h);
        }
    }
}

pub struct LinearField(pub Matrix);

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.0.rows()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0.matvec(x));
    }
    fn jvp(&self, _x: &[f64], v: &[f64], out: &mut [f64]) {
        self.eval(v, out);
    }
}

/// A polynomial field with its parameters frozen.
#[derive(Debug, Clone)]
pub struct PolyVectorField {
    field: PolyField,
    eps: Vec<f64>,
    /// `deriv[i][j] = ∂fᵢ/∂xⱼ`.
    deriv: Vec<Vec<Poly>>,
}

impl PolyVectorField {
    pub fn new(field: PolyField, eps: Vec<f64>) -> Result<Self, SimError> {
        if field.dim() != field.n {
            return Err(SimError::Shape(format!("field maps ℝ^{} to ℝ^{}", field.n, field.dim())));
        }
        if eps.len() != field.d {
            return Err(SimError::Shape(format!("expected {} parameters, got {}", field.d, eps.len())));
        }
        let deriv = field.comps.iter().map(|p| (0..field.n).map(|j| p.deriv(j)).collect()).collect();
        Ok(Self { field, eps, deriv })
    }

    fn point(&self, x: &[f64]) -> Vec<f64> {
        x.iter().chain(&self.eps).copied().collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        let pt = self.point(x);
        let n = self.field.n;
        let mut j = Matrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                j[(i, k)] = self.deriv[i][k].eval(&pt);
            }
        }
        j
    }
}

impl VectorField for PolyVectorField {
    fn dim(&self) -> usize {
        self.field.n
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let pt = self.point(x);
        for (o, p) in out.iter_mut().zip(&self.field.comps) {
            *o = p.eval(&pt);
        }
    }
    fn jvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.jacobian(x).matvec(v));
    }
}

/// `(y, z, λ − y + νz − x²/2)`.
pub fn nf_field(lambda: f64, nu: f64) -> PolyVectorField {
    let mut f = PolyField::zero(3, 0, 3, 2);
    f.add_term(&[0, 1, 0], &[1.0, 0.0, -1.0]);
    f.add_term(&[0, 0, 1], &[0.0, 1.0, nu]);
    f.add_term(&[0, 0, 0], &[0.0, 0.0, lambda]);
    f.add_term(&[2, 0, 0], &[0.0, 0.0, -0.5]);
    PolyVectorField::new(f, vec![]).expect("well-formed")
}

/// `ẋ_p = f(x_p) − α Σ_q L_pq D x_q`, node-major state.
pub struct NetworkField<F: VectorField> {
    pub node: F,
    pub laplacian: Matrix,
    pub d: Matrix,
    pub alpha: f64,
}

impl<F: VectorField> NetworkField<F> {
    pub fn new(graph: &Graph, d: Matrix, alpha: f64, node: F) -> Result<Self, SimError> {
        if d.rows() != node.dim() || d.cols() != node.dim() {
            return Err(SimError::Shape("D does not match the node dimension".into()));
        }
        Ok(Self { node, laplacian: laplacian(graph), d, alpha })
    }

    pub fn nodes(&self) -> usize {
        self.laplacian.rows()
    }

    fn coupling(&self, x: &[f64], out: &mut [f64]) {
        let n = self.node.dim();
        let nodes = self.nodes();
        for p in 0..nodes {
            let mut lx = vec![0.0; n];
            for q in 0..nodes {
                let l = self.laplacian[(p, q)];
                if l != 0.0 {
                    for k in 0..n {
                        lx[k] += l * x[q * n + k];
                    }
                }
            }
            let dlx = self.d.matvec(&lx);
            for k in 0..n {
                out[p * n + k] -= self.alpha * dlx[k];
            }
        }
    }
}

impl<F: VectorField> VectorField for NetworkField<F> {
    fn dim(&self) -> usize {
        self.nodes() * self.node.dim()
    }
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let n = self.node.dim();
        for p in 0..self.nodes() {
            self.node.eval(&x[p * n..(p + 1) * n], &mut out[p * n..(p + 1) * n]);
        }
        self.coupling(x, out);
    }
    fn jvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.node.dim();
        for p in 0..self.nodes() {
            let r = p * n..(p + 1) * n;
            self.node.jvp(&x[r.clone()], &v[r.clone()], &mut out[r]);
        }
        self.coupling(v, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Rk4,
    Dp54 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Fixed step for RK4, initial step for DP54.
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub seed: u64,
    /// Benettin renormalization period (time units).
    pub renorm_interval: f64,
    /// Time discarded before averaging; `None` means 20% of `t_end`.
    pub transient_skip: Option<f64>,
    /// Record every k-th step.
    pub sample_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 10.0, method: Method::Rk4, seed: 0, renorm_interval: 1e-2, transient_skip: None, sample_every: 1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!("dt = {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Config(format!("t_end = {}", self.t_end)));
        }
        if !(self.renorm_interval >= self.dt) {
            return Err(SimError::Config("renorm_interval must be at least dt".into()));
        }
        if self.sample_every == 0 {
            return Err(SimError::Config("sample_every must be positive".into()));
        }
        if let Method::Dp54 { rtol, atol } = self.method {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(SimError::Config("DP54 tolerances must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn transient(&self) -> f64 {
        self.transient_skip.unwrap_or(0.2 * self.t_end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Time at which the orbit escaped, if it did.
    pub blow_up: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }
}

fn rk4_step<F: VectorField + ?Sized>(f: &F, x: &[f64], h: f64, k: &mut [Vec<f64>; 4], tmp: &mut [f64]) -> Vec<f64> {
    let n = x.len();
    f.eval(x, &mut k[0]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[0][i];
    }
    f.eval(tmp, &mut k[1]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k[1][i];
    }
    f.eval(tmp, &mut k[2]);
    for i in 0..n {
        tmp[i] = x[i] + h * k[2][i];
    }
    f.eval(tmp, &mut k[3]);
    (0..n).map(|i| x[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i])).collect()
}

fn escaped(x: &[f64]) -> bool {
    x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP)
}

// Fields are autonomous, so the stage times are not needed.
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand–Prince attempt: (5th-order solution, scaled error norm).
fn dp54_attempt<F: VectorField + ?Sized>(f: &F, x: &[f64], h: f64, rtol: f64, atol: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            tmp[i] = x[i] + h * (0..s).map(|j| DP_A[s][j] * k[j][i]).sum::<f64>();
        }
        f.eval(&tmp, &mut k[s]);
    }
    let y5: Vec<f64> = (0..n).map(|i| x[i] + h * (0..7).map(|s| DP_B5[s] * k[s][i]).sum::<f64>()).collect();
    let mut err: f64 = 0.0;
    for i in 0..n {
        let e = h * (0..7).map(|s| (DP_B5[s] - DP_B4[s]) * k[s][i]).sum::<f64>();
        let sc = atol + rtol * x[i].abs().max(y5[i].abs());
        err += (e / sc).powi(2);
    }
    (y5, (err / n as f64).sqrt())
}

/// Integrates `f` from `x0` over `[0, cfg.t_end]`.
pub fn integrate<F: VectorField + ?Sized>(f: &F, x0: &[f64], cfg: &SimConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let n = f.dim();
    if x0.len() != n {
        return Err(SimError::Shape(format!("initial state has length {}, field dimension {n}", x0.len())));
    }
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = 0.0;
    match cfg.method {
        Method::Rk4 => {
            let steps = (cfg.t_end / cfg.dt).round() as usize;
            let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            let mut tmp = vec![0.0; n];
            for s in 1..=steps {
                x = rk4_step(f, &x, cfg.dt, &mut k, &mut tmp);
                t = s as f64 * cfg.dt;
                if escaped(&x) {
                    times.push(t);
                    states.push(x);
                    return Ok(Trajectory { times, states, blow_up: Some(t) });
                }
                if s % cfg.sample_every == 0 || s == steps {
                    times.push(t);
                    states.push(x.clone());
                }
            }
        }
        Method::Dp54 { rtol, atol } => {
            let mut h = cfg.dt;
            let mut accepted = 0usize;
            while t < cfg.t_end {
                let step = h.min(cfg.t_end - t);
                let (y, err) = dp54_attempt(f, &x, step, rtol, atol);
                if err <= 1.0 || step < 1e-14 {
                    if step < 1e-14 && err > 1.0 {
                        return Err(SimError::StepUnderflow { t });
                    }
                    t += step;
                    x = y;
                    accepted += 1;
                    if escaped(&x) {
                        times.push(t);
                        states.push(x);
                        return Ok(Trajectory { times, states, blow_up: Some(t) });
                    }
                    if accepted % cfg.sample_every == 0 || t >= cfg.t_end {
                        times.push(t);
                        states.push(x.clone());
                    }
                }
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h = step * fac;
            }
        }
    }
    Ok(Trajectory { times, states, blow_up: None })
}

/// Network trajectory with node nonlinearity `f` (parameters frozen at `eps`).
pub fn integrate_network(graph: &Graph, d: &Matrix, alpha: f64, f: &PolyField, eps: &[f64], x0: &[f64], cfg: &SimConfig) -> Result<Trajectory, SimError> {
    let node = PolyVectorField::new(f.clone(), eps.to_vec())?;
    if f.origin_defect() != 0.0 {
        return Err(SimError::Shape("node field must vanish at the origin".into()));
    }
    let net = NetworkField::new(graph, d.clone(), alpha, node)?;
    integrate(&net, x0, cfg)
}

/// Per-sample `max_{p,q} ‖x_p − x_q‖` for node-major states with `n` components per node.
pub fn sync_error(traj: &Trajectory, n: usize) -> Vec<f64> {
    traj.states
        .iter()
        .map(|x| {
            let nodes = x.len() / n;
            let mut worst: f64 = 0.0;
            for p in 0..nodes {
                for q in p + 1..nodes {
                    let d: f64 = (0..n).map(|k| (x[p * n + k] - x[q * n + k]).powi(2)).sum::<f64>().sqrt();
                    worst = worst.max(d);
                }
            }
            worst
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    /// (time, running average) at each renormalization after the transient.
    pub trace: Vec<(f64, f64)>,
    pub first_half: f64,
    pub second_half: f64,
    /// Halves agree within 0.05 + 10% of |value|.
    pub converged: bool,
}

/// Benettin estimate of the largest Lyapunov exponent (RK4 on state and tangent).
pub fn largest_lyapunov<F: VectorField + ?Sized>(f: &F, x0: &[f64], cfg: &SimConfig) -> Result<LyapunovEstimate, SimError> {
    cfg.validate()?;
    let n = f.dim();
    if x0.len() != n {
        return Err(SimError::Shape("initial state length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut x = x0.to_vec();
    let h = cfg.dt;
    let steps = (cfg.t_end / h).round() as usize;
    let renorm = ((cfg.renorm_interval / h).round() as usize).max(1);
    let skip = cfg.transient();
    let (mut sum, mut t_acc) = (0.0, 0.0);
    let mut logs: Vec<(f64, f64)> = Vec::new();
    let mut trace = Vec::new();
    let mut fx = vec![vec![0.0; n]; 4];
    let mut fv = vec![vec![0.0; n]; 4];
    let (mut tx, mut tv) = (vec![0.0; n], vec![0.0; n]);
    for s in 1..=steps {
        // RK4 on (x, v) with v' = Df(x) v.
        let coef = [0.0, 0.5, 0.5, 1.0];
        for st in 0..4 {
            for i in 0..n {
                let (px, pv) = if st == 0 { (0.0, 0.0) } else { (fx[st - 1][i], fv[st - 1][i]) };
                tx[i] = x[i] + coef[st] * h * px;
                tv[i] = v[i] + coef[st] * h * pv;
            }
            f.eval(&tx, &mut fx[st]);
            f.jvp(&tx, &tv, &mut fv[st]);
        }
        for i in 0..n {
            x[i] += h / 6.0 * (fx[0][i] + 2.0 * fx[1][i] + 2.0 * fx[2][i] + fx[3][i]);
            v[i] += h / 6.0 * (fv[0][i] + 2.0 * fv[1][i] + 2.0 * fv[2][i] + fv[3][i]);
        }
        let t = s as f64 * h;
        if escaped(&x) {
            return Err(SimError::Unbounded { t });
        }
        if s % renorm == 0 {
            let nv = norm2(&v);
            if nv == 0.0 || !nv.is_finite() {
                return Err(SimError::Unbounded { t });
            }
            v.iter_mut().for_each(|c| *c /= nv);
            if t > skip {
                let dt = renorm as f64 * h;
                sum += nv.ln();
                t_acc += dt;
                logs.push((dt, nv.ln()));
                trace.push((t, sum / t_acc));
            }
        }
    }
    if logs.is_empty() {
        return Err(SimError::Config("no renormalizations after the transient".into()));
    }
    let half = logs.len() / 2;
    let avg = |s: &[(f64, f64)]| {
        let (tt, ll) = s.iter().fold((0.0, 0.0), |(a, b), (dt, l)| (a + dt, b + l));
        if tt > 0.0 { ll / tt } else { f64::NAN }
    };
    let value = sum / t_acc;
    let (first_half, second_half) = (avg(&logs[..half.max(1)]), avg(&logs[half..]));
    let converged = (first_half - second_half).abs() <= 0.05 + 0.1 * value.abs();
    Ok(LyapunovEstimate { value, trace, first_half, second_half, converged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub stable: bool,
    pub max_re: f64,
    /// Laplacian eigenvalue index of the block with the largest real part.
    pub worst_channel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstCrossing {
    pub alpha: f64,
    pub channel: usize,
    pub lambda: f64,
    /// |Im| of the crossing eigenvalue (0 for a real crossing).
    pub imag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweep {
    pub points: Vec<AlphaPoint>,
    pub first_crossing: Option<FirstCrossing>,
}

fn worst_block(a: &Matrix, d: &Matrix, lambdas: &[f64], alpha: f64, tol: &Tolerances) -> Result<(f64, usize, Complex64), NumError> {
    let mut best = (f64::NEG_INFINITY, 0, Complex64::new(0.0, 0.0));
    for (i, &l) in lambdas.iter().enumerate() {
        let spec = eigendecompose(&a.sub(&d.scale(alpha * l)), false, tol)?;
        for z in &spec.eigenvalues {
            if z.re > best.0 {
                best = (z.re, i, *z);
            }
        }
    }
    Ok(best)
}

/// Hurwitz verdict of every block `A − α λ_p D` along `grid`; the first loss of
/// stability is refined by bisection.
pub fn alpha_stability_sweep(graph: &Graph, a: &Matrix, d: &Matrix, grid: &[f64], tol: &Tolerances) -> Result<AlphaSweep, SimError> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SimError::Config("alpha grid must be strictly increasing".into()));
    }
    let lambdas = laplacian_spectrum(graph, tol)?.real_values();
    let points: Vec<AlphaPoint> = grid
        .par_iter()
        .map(|&alpha| {
            let (max_re, worst_channel, _) = worst_block(a, d, &lambdas, alpha, tol)?;
            Ok(AlphaPoint { alpha, stable: max_re < 0.0, max_re, worst_channel })
        })
        .collect::<Result<_, NumError>>()?;
    let mut first_crossing = None;
    if let Some(k) = points.iter().position(|p| !p.stable) {
        let (mut lo, mut hi) = if k == 0 { (grid[0], grid[0]) } else { (grid[k - 1], grid[k]) };
        if k > 0 {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if worst_block(a, d, &lambdas, mid, tol)?.0 < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let (_, channel, z) = worst_block(a, d, &lambdas, hi, tol)?;
        let thr = tol.zero_threshold(a);
        first_crossing = Some(FirstCrossing { alpha: hi, channel, lambda: lambdas[channel], imag: if z.im.abs() > thr { z.im.abs() } else { 0.0 } });
    }
    Ok(AlphaSweep { points, first_crossing })
}

/// Real eigenpair data at a saddle equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub point: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub saddle_focus: bool,
    /// Unstable eigenvalue exceeds |Re| of the stable complex pair.
    pub shilnikov_ratio: bool,
    pub unstable: f64,
    pub unstable_vec: Vec<f64>,
    /// Annihilates the stable eigenspace.
    pub left_unstable: Vec<f64>,
}

fn newton(f: &PolyVectorField, x0: &[f64]) -> Option<Vec<f64>> {
    let mut x = x0.to_vec();
    let mut fx = vec![0.0; x.len()];
    for _ in 0..50 {
        f.eval(&x, &mut fx);
        if norm2(&fx) < 1e-13 {
            return Some(x);
        }
        let dx = solve(&f.jacobian(&x), &fx).ok()?;
        x.iter_mut().zip(dx).for_each(|(a, b)| *a -= b);
    }
    f.eval(&x, &mut fx);
    (norm2(&fx) < 1e-9).then_some(x)
}

/// Saddle with a 1-dimensional unstable manifold near `guess`.
pub fn saddle_data(f: &PolyVectorField, guess: &[f64], tol: &Tolerances) -> Option<SaddleData> {
    let p = newton(f, guess)?;
    let j = f.jacobian(&p);
    let spec = eigendecompose(&j, false, tol).ok()?;
    let unstable: Vec<&Complex64> = spec.eigenvalues.iter().filter(|z| z.re > spec.zero_threshold).collect();
    if unstable.len() != 1 || unstable[0].im != 0.0 {
        return None;
    }
    let mu = unstable[0].re;
    let stable: Vec<&Complex64> = spec.eigenvalues.iter().filter(|z| z.re < -spec.zero_threshold).collect();
    let saddle_focus = stable.len() == 2 && stable[0].im.abs() > spec.zero_threshold;
    let shilnikov_ratio = saddle_focus && mu > -stable[0].re;
    let shifted = j.shift(-mu);
    let cut = 1e-8 * shifted.norm_inf().max(1.0);
    let right = null_space(&shifted, cut).ok()?.into_iter().next()?;
    let left = null_space(&shifted.transpose(), cut).ok()?.into_iter().next()?;
    Some(SaddleData { point: p, eigenvalues: spec.eigenvalues.clone(), saddle_focus, shilnikov_ratio, unstable: mu, unstable_vec: right, left_unstable: left })
}

/// Smallest distance to the stable plane at the saddle among returns of the unstable
/// branches into the ball of radius `ball` after first leaving it.
pub fn shooting_distance(f: &PolyVectorField, s: &SaddleData, ball: f64, cfg: &SimConfig) -> Option<f64> {
    let mut best: Option<f64> = None;
    let nl = norm2(&s.left_unstable);
    for sign in [1.0, -1.0] {
        let x0: Vec<f64> = s.point.iter().zip(&s.unstable_vec).map(|(p, v)| p + sign * 1e-6 * v).collect();
        let Ok(traj) = integrate(f, &x0, cfg) else { continue };
        let mut left_ball = false;
        for x in &traj.states {
            let diff: Vec<f64> = x.iter().zip(&s.point).map(|(a, b)| a - b).collect();
            let r = norm2(&diff);
            if r > ball {
                left_ball = true;
            } else if left_ball {
                let dist = dot(&s.left_unstable, &diff).abs() / nl;
                best = Some(best.map_or(dist, |b: f64| b.min(dist)));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub lambdas: Vec<f64>,
    pub nus: Vec<f64>,
    pub kappas: Vec<f64>,
}

/// Field family scanned over (λ, ν, κ).
#[derive(Debug, Clone)]
pub enum ScanFamily {
    /// `(y, z, λ − y + νz − x²/2)`; κ is ignored.
    Truncated,
    /// Blow-up of a reduced jet with γ₂ = −1, γ₁ = √(2λ), γ₃ = ν.
    Jet { jet: Jet3, unfolding: Unfolding },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub index: [usize; 3],
    pub lambda: f64,
    pub nu: f64,
    pub kappa: f64,
    pub skipped: Option<String>,
    pub saddle: Option<SaddleData>,
    pub shooting_distance: Option<f64>,
    pub lyapunov: Option<f64>,
    pub lyapunov_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    /// Indices into `points`, best (smallest shooting distance) first.
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub shoot: SimConfig,
    pub lyapunov: SimConfig,
    pub ball: f64,
    pub max_candidates: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            shoot: SimConfig { dt: 1e-2, t_end: 60.0, method: Method::Dp54 { rtol: 1e-8, atol: 1e-10 }, ..SimConfig::default() },
            lyapunov: SimConfig { dt: 1e-2, t_end: 200.0, renorm_interval: 0.1, ..SimConfig::default() },
            ball: 0.5,
            max_candidates: 10,
        }
    }
}

fn scan_field(family: &ScanFamily, lambda: f64, nu: f64, kappa: f64) -> Result<PolyVectorField, String> {
    match family {
        ScanFamily::Truncated => Ok(nf_field(lambda, nu)),
        ScanFamily::Jet { jet, unfolding } => {
            let gamma = [(2.0 * lambda).sqrt(), -1.0, nu];
            let res = blow_up_and_scale(jet, unfolding, kappa, gamma).map_err(|e| e.to_string())?;
            let mut f = PolyField::zero(3, 0, 3, res.third.order.max(1));
            f.add_term(&[0, 1, 0], &[1.0, 0.0, 0.0]);
            f.add_term(&[0, 0, 1], &[0.0, 1.0, 0.0]);
            f.comps[2] = res.third.comps[0].clone();
            PolyVectorField::new(f, vec![]).map_err(|e| e.to_string())
        }
    }
}

/// Exploratory scan for saddle-focus homoclinic candidates near p₁ = (−√(2λ), 0, 0).
pub fn shilnikov_scan(family: &ScanFamily, grid: &ScanGrid, cfg: &ScanConfig, tol: &Tolerances) -> Result<ScanReport, SimError> {
    cfg.shoot.validate()?;
    cfg.lyapunov.validate()?;
    let mut jobs = Vec::new();
    for (i, &l) in grid.lambdas.iter().enumerate() {
        for (j, &nu) in grid.nus.iter().enumerate() {
            for (k, &kappa) in grid.kappas.iter().enumerate() {
                jobs.push(([i, j, k], l, nu, kappa));
            }
        }
    }
    let points: Vec<ScanPoint> = jobs
        .par_iter()
        .map(|&(index, lambda, nu, kappa)| {
            let mut pt = ScanPoint { index, lambda, nu, kappa, skipped: None, saddle: None, shooting_distance: None, lyapunov: None, lyapunov_note: None };
            if !(lambda > 0.0) {
                pt.skipped = Some("lambda must be positive".into());
                return pt;
            }
            let f = match scan_field(family, lambda, nu, kappa) {
                Ok(f) => f,
                Err(e) => {
                    pt.skipped = Some(e);
                    return pt;
                }
            };
            let guess = [-(2.0 * lambda).sqrt(), 0.0, 0.0];
            let Some(s) = saddle_data(&f, &guess, tol) else {
                pt.skipped = Some("no saddle with a one-dimensional unstable manifold near p1".into());
                return pt;
            };
            pt.shooting_distance = shooting_distance(&f, &s, cfg.ball, &cfg.shoot);
            let x0: Vec<f64> = s.point.iter().zip(&s.unstable_vec).map(|(p, v)| p + 1e-4 * v).collect();
            match largest_lyapunov(&f, &x0, &cfg.lyapunov) {
                Ok(est) => {
                    pt.lyapunov = Some(est.value);
                    if !est.converged {
                        pt.lyapunov_note = Some("halves disagree".into());
                    }
                }
                Err(e) => pt.lyapunov_note = Some(e.to_string()),
            }
            pt.saddle = Some(s);
            pt
        })
        .collect();
    let mut candidates: Vec<usize> = (0..points.len()).filter(|&i| points[i].shooting_distance.is_some()).collect();
    candidates.sort_by(|&a, &b| points[a].shooting_distance.unwrap().total_cmp(&points[b].shooting_distance.unwrap()).then(a.cmp(&b)));
    candidates.truncate(cfg.max_candidates);
    Ok(ScanReport { points, candidates })
}
