//! The exact kernel of ρ_{m,n} for three-term operators, its traces by Nyström
//! discretisation, and the O(2) matrix-model form of the fermionic traces.

use crate::error::{Error, Result};
use crate::quad::composite_gl;
use crate::specfun::{psi_ac, QdilogParams};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// ħ = 2π𝖻²/(m+n+1), a = m𝖻/(2(m+n+1)), c = 𝖻/(2(m+n+1)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelParams {
    pub m: f64,
    pub n: f64,
    pub hbar: f64,
    pub b: f64,
    pub a: f64,
    pub c: f64,
}

pub fn kernel_params(m: f64, n: f64, hbar: f64) -> Result<KernelParams> {
    if !(m > 0.0 && n > 0.0 && hbar > 0.0) {
        return Err(Error::Invalid(format!("need m, n, hbar > 0, got ({m}, {n}, {hbar})")));
    }
    let s = m + n + 1.0;
    let b = (hbar * s / (2.0 * PI)).sqrt();
    Ok(KernelParams {
        m,
        n,
        hbar,
        b,
        a: m * b / (2.0 * s),
        c: b / (2.0 * s),
    })
}

impl KernelParams {
    /// Recompute the derived fields and compare.
    pub fn check(&self) -> Result<()> {
        let k = kernel_params(self.m, self.n, self.hbar)?;
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-14 * y.abs().max(1.0);
        if close(k.b, self.b) && close(k.a, self.a) && close(k.c, self.c) && self.a > 0.0 && self.c > 0.0 {
            Ok(())
        } else {
            Err(Error::Invalid("kernel parameters are inconsistent".into()))
        }
    }

    /// a + c − nc, the imaginary shift in the cosh denominator.
    pub fn gamma(&self) -> f64 {
        self.a + self.c - self.n * self.c
    }

    /// C_{m,n} = (a + c − nc)/𝖻 = (m + 1 − n)/(2(m+n+1)).
    pub fn matrix_model_constant(&self) -> f64 {
        self.gamma() / self.b
    }

    fn qd(&self) -> Result<QdilogParams> {
        QdilogParams::new(self.b)
    }

    pub fn psi(&self, p: f64) -> Result<Complex64> {
        psi_ac(p, self.a, self.c, self.qd()?)
    }
}

/// ρ(p, p′) = conj(ψ(p))ψ(p′) / (2𝖻 cosh(π(p − p′ + i(a + c − nc))/𝖻)).
pub fn rho_kernel(p: f64, pp: f64, kp: &KernelParams) -> Result<Complex64> {
    let den = 2.0 * kp.b * Complex64::new(PI * (p - pp) / kp.b, PI * kp.gamma() / kp.b).cosh();
    Ok(kp.psi(p)?.conj() * kp.psi(pp)? / den)
}

/// Interval outside of which ρ(p, p) < rel·max ρ(p, p), scanned outward on a 0.5 grid.
pub fn kernel_support(kp: &KernelParams, rel: f64) -> Result<(f64, f64)> {
    let diag = |p: f64| -> Result<f64> { Ok(rho_kernel(p, p, kp)?.re) };
    let mut peak = diag(0.0)?;
    let mut edge = [0.0; 2];
    for (side, dir) in [-1.0, 1.0].into_iter().enumerate() {
        let mut p: f64 = 0.0;
        loop {
            p += 0.5 * dir;
            if p.abs() > 100.0 {
                return Err(Error::Numerical(
                    "kernel diagonal does not decay inside |p| ≤ 100".into(),
                ));
            }
            let v = diag(p)?;
            peak = peak.max(v);
            if v < rel * peak {
                edge[side] = p;
                break;
            }
        }
    }
    Ok((edge[0], edge[1]))
}

/// Nyström discretisation K_ij = √w_i ρ(p_i, p_j) √w_j on composite Gauss–Legendre nodes.
#[derive(Clone, Debug)]
pub struct Nystrom {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major n×n Hermitian matrix.
    pub k: Vec<Complex64>,
    /// |ψ(p_i)|².
    pub psi_sq: Vec<f64>,
    pub support: (f64, f64),
}

impl Nystrom {
    pub fn new(kp: &KernelParams, panels_per_unit: f64, order: usize) -> Result<Self> {
        kp.check()?;
        let support = kernel_support(kp, 1e-16)?;
        let panels = ((support.1 - support.0) * panels_per_unit).ceil().max(1.0) as usize;
        let (nodes, weights) = composite_gl(support.0, support.1, panels, order);
        let psi = nodes
            .par_iter()
            .map(|&p| kp.psi(p))
            .collect::<Result<Vec<Complex64>>>()?;
        let n = nodes.len();
        let (b, g) = (kp.b, kp.gamma());
        let k: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let den = 2.0 * b * Complex64::new(PI * (nodes[i] - nodes[j]) / b, PI * g / b).cosh();
                psi[i].conj() * psi[j] / den * (weights[i] * weights[j]).sqrt()
            })
            .collect();
        let psi_sq = psi.iter().map(|z| z.norm_sqr()).collect();
        Ok(Nystrom {
            nodes,
            weights,
            k,
            psi_sq,
            support,
        })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// Tr ρ^l for l = 1, 2, 3.
    pub fn power_traces(&self) -> [f64; 3] {
        let n = self.size();
        let k = &self.k;
        let t1: f64 = (0..n).map(|i| k[i * n + i].re).sum();
        let t2: f64 = k.iter().map(|z| z.norm_sqr()).sum();
        let t3: f64 = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let kij = k[i * n + j];
                    let mut row = Complex64::new(0.0, 0.0);
                    for l in 0..n {
                        row += k[j * n + l] * k[l * n + i];
                    }
                    s += kij * row;
                }
                s.re
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        [t1, t2, t3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelTrace {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

fn two_resolutions(kp: &KernelParams, f: impl Fn(&[f64; 3]) -> f64) -> Result<KernelTrace> {
    let coarse = Nystrom::new(kp, 1.0, 16)?;
    let fine = Nystrom::new(kp, 1.0, 24)?;
    let (a, b) = (f(&coarse.power_traces()), f(&fine.power_traces()));
    Ok(KernelTrace {
        value: b,
        error: (a - b).abs(),
        nodes: fine.size(),
    })
}

fn order_guard(what: &str, l: u32) -> Result<()> {
    if l == 0 {
        return Err(Error::Invalid(format!("{what} order must be at least 1")));
    }
    if l > 3 {
        return Err(Error::Unsupported(format!(
            "{what} order {l} > 3; use the Airy or contour routes"
        )));
    }
    Ok(())
}

/// Tr ρ^l, l ≤ 3.
pub fn trace_power(l: u32, kp: &KernelParams) -> Result<KernelTrace> {
    order_guard("trace", l)?;
    two_resolutions(kp, |t| t[l as usize - 1])
}

/// Z(N) = (1/N!)∫det ρ(p_i, p_j), N ≤ 3, via Newton's identities.
pub fn fermionic_trace(n: u32, kp: &KernelParams) -> Result<KernelTrace> {
    order_guard("fermionic trace", n)?;
    two_resolutions(kp, |t| newton_elementary(t, n))
}

/// e_N from power sums p_1..p_3.
pub fn newton_elementary(p: &[f64; 3], n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => p[0],
        2 => (p[0] * p[0] - p[1]) / 2.0,
        3 => (p[0].powi(3) - 3.0 * p[0] * p[1] + 2.0 * p[2]) / 6.0,
        _ => f64::NAN,
    }
}

/// Integrand of the O(2) matrix model (without the 1/N! and the |ψ|² weights).
pub fn matrix_model_integrand(u: &[f64], c_mn: f64) -> f64 {
    let mut num = 1.0;
    let mut den = Complex64::new(1.0, 0.0);
    for i in 0..u.len() {
        for j in 0..u.len() {
            if i < j {
                num *= 4.0 * ((u[i] - u[j]) / 2.0).sinh().powi(2);
            }
            den *= 2.0 * Complex64::new((u[i] - u[j]) / 2.0, PI * c_mn).cosh();
        }
    }
    (num / den).re
}

/// Value of C_{1,1} that makes the N = 1 matrix integral equal Tr ρ.
pub fn calibrate_c11(kp: &KernelParams) -> Result<f64> {
    if kp.m != 1.0 || kp.n != 1.0 {
        return Err(Error::Unsupported("matrix model only for m = n = 1".into()));
    }
    let ny = Nystrom::new(kp, 1.0, 24)?;
    let moment: f64 = ny.psi_sq.iter().zip(&ny.weights).map(|(s, w)| s * w).sum::<f64>() / kp.b;
    let tr = ny.power_traces()[0];
    Ok((moment / (2.0 * tr)).acos() / PI)
}

/// Z_{1,1}(N, ħ) from the u-representation (row sums are collected before the
/// final sum so the result does not depend on thread scheduling), N ≤ 3, with u = 2πp/𝖻 on a
/// tensor Gauss–Legendre grid.
pub fn matrix_model_z(n: u32, kp: &KernelParams, c_mn: f64) -> Result<f64> {
    if kp.m != 1.0 || kp.n != 1.0 {
        return Err(Error::Unsupported("matrix model only for m = n = 1".into()));
    }
    order_guard("matrix model", n)?;
    let ny = Nystrom::new(kp, 1.0, if n == 3 { 16 } else { 24 })?;
    // d u/(2π) = dp/𝖻
    let us: Vec<f64> = ny.nodes.iter().map(|p| 2.0 * PI * p / kp.b).collect();
    let wt: Vec<f64> = ny.weights.iter().zip(&ny.psi_sq).map(|(w, s)| w * s / kp.b).collect();
    let m = us.len();
    let total: f64 = match n {
        1 => (0..m).map(|i| wt[i] * matrix_model_integrand(&[us[i]], c_mn)).sum(),
        2 => (0..m)
            .into_par_iter()
            .map(|i| {
                (0..m)
                    .map(|j| wt[i] * wt[j] * matrix_model_integrand(&[us[i], us[j]], c_mn))
                    .sum::<f64>()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum(),
        _ => (0..m)
            .into_par_iter()
            .map(|i| {
                let mut s = 0.0;
                for j in 0..m {
                    for k in 0..m {
                        s += wt[i] * wt[j] * wt[k] * matrix_model_integrand(&[us[i], us[j], us[k]], c_mn);
                    }
                }
                s
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum(),
    };
    Ok(total / (1..=n).product::<u32>() as f64)
}
