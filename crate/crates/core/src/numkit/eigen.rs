use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{require_square, Matrix, NumError, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralClass {
    Stable,
    Center,
    Unstable,
}

impl SpectralClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Center => "center",
            Self::Unstable => "unstable",
        }
    }
}

/// Eigenvalues sorted by (re, im, original index) with a per-eigenvalue class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Orthonormal real eigenvectors, present on the symmetric path only.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub classes: Vec<SpectralClass>,
    /// Absolute threshold used for the center class.
    pub zero_threshold: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn count(&self, class: SpectralClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Real parts, for symmetric spectra.
    pub fn real_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// True when no eigenvalue sits in the center band.
    pub fn is_hyperbolic(&self) -> bool {
        self.count(SpectralClass::Center) == 0
    }

    /// Smallest |Re λ| over the spectrum.
    pub fn hyperbolic_margin(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// Ordering used for every spectrum: real part, then imaginary part.
pub fn sort_key(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

pub fn eigendecompose(m: &Matrix, symmetric_hint: bool, tol: &Tolerances) -> Result<Spectrum, NumError> {
    tol.validate()?;
    let n = require_square("eigendecompose", m)?;
    if let Some(pos) = m.data().iter().position(|v| !v.is_finite()) {
        return Err(NumError::NonFinite { index: pos });
    }
    let zero_threshold = tol.zero_threshold(m);
    let (values, vectors) = if n == 0 {
        (Vec::new(), None)
    } else if symmetric_hint {
        if !m.is_symmetric(tol.iter_eps) {
            return Err(NumError::NotSymmetric { op: "eigendecompose" });
        }
        let (vals, v) = jacobi(&m.symmetric_part(), tol)?;
        (vals.into_iter().map(|x| Complex64::new(x, 0.0)).collect(), Some(v.columns()))
    } else {
        (hqr(m)?, None)
    };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| sort_key(&values[i], &values[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = vectors.map(|vs| order.iter().map(|&i| vs[i].clone()).collect());
    let classes = eigenvalues
        .iter()
        .map(|z| {
            if z.re > zero_threshold {
                SpectralClass::Unstable
            } else if z.re < -zero_threshold {
                SpectralClass::Stable
            } else {
                SpectralClass::Center
            }
        })
        .collect();
    Ok(Spectrum { eigenvalues, eigenvectors, classes, zero_threshold })
}

/// `-max Re λ`; positive exactly when `m` is Hurwitz.
pub fn hurwitz_margin(m: &Matrix, tol: &Tolerances) -> Result<f64, NumError> {
    Ok(-eigendecompose(m, false, tol)?.max_real())
}

/// Cyclic Jacobi. Returns eigenvalues and the matrix whose columns are eigenvectors.
fn jacobi(m: &Matrix, tol: &Tolerances) -> Result<(Vec<f64>, Matrix), NumError> {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let scale = a.norm_fro();
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let max_sweeps = 100 * n * n;
    for _ in 0..max_sweeps.max(1) {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() <= tol.iter_eps * scale {
            let vals = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(NumError::NoConvergence { algo: "jacobi", iterations: max_sweeps })
}

/// Householder reduction to upper Hessenberg form (in place).
fn hessenberg(h: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f: f64 = (m..=high).rev().map(|i| ort[i] * h[(i, j)]).sum::<f64>() / hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let f: f64 = (m..=high).rev().map(|j| ort[j] * h[(i, j)]).sum::<f64>() / hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }
}

/// Francis double-shift QR on the Hessenberg form; eigenvalues only.
fn hqr(m: &Matrix) -> Result<Vec<Complex64>, NumError> {
    let nn = m.rows();
    let mut h = m.clone();
    hessenberg(&mut h);
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let eps = f64::EPSILON;
    let low = 0usize;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut x, mut y, mut w): (f64, f64, f64);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let cap = 100 * nn * nn + 100;
    let mut total_iter = 0usize;
    let mut iter = 0usize;
    let mut n = nn as isize - 1;
    while n >= low as isize {
        let nu = n as usize;
        let mut l = nu;
        while l > low {
            let mut s0 = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s0 == 0.0 {
                s0 = norm;
            }
            if h[(l, l - 1)].abs() < eps * s0 {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = d[nu - 1];
                if z != 0.0 {
                    d[nu] = x - w / z;
                }
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            // Exceptional shifts.
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            total_iter += 1;
            if total_iter > cap {
                return Err(NumError::NoConvergence { algo: "francis-qr", iterations: total_iter });
            }

            // Two consecutive small subdiagonal elements.
            let mut mm = nu - 2;
            loop {
                z = h[(mm, mm)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(mm + 1, mm)] + h[(mm, mm + 1)];
                q = h[(mm + 1, mm + 1)] - z - r - s;
                r = h[(mm + 2, mm + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    break;
                }
                let lhs = h[(mm, mm - 1)].abs() * (q.abs() + r.abs());
                let rhs = eps * (p.abs() * (h[(mm - 1, mm - 1)].abs() + z.abs() + h[(mm + 1, mm + 1)].abs()));
                if lhs < rhs {
                    break;
                }
                mm -= 1;
            }
            for i in mm + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > mm + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns mm..=n.
            let mut k = mm;
            while k < nu {
                let notlast = k != nu - 1;
                if k != mm {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != mm {
                        h[(k, k - 1)] = -s * x;
                    } else if l != mm {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k, j)] -= pp * x;
                        h[(k + 1, j)] -= pp * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k)] -= pp;
                        h[(i, k + 1)] -= pp * q;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(d.into_iter().zip(e).map(|(re, im)| Complex64::new(re, im)).collect())
}


/// Largest distance under a greedy nearest-neighbour matching of two eigenvalue lists.
///
/// Sorting both lists and zipping misaligns conjugate pairs whose real parts differ in the
/// last bit; matching does not. Returns infinity when the lengths differ.
pub fn spectral_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for z in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("lengths match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
