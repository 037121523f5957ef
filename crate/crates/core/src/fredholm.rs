//! The ħ = 2π spectral determinant of local P²: theta-function form and its
//! zeros, the Airy-sum and contour-integral fermionic traces.

use crate::dd::Dd;
use crate::enumerative::{cb_p2, genus_one_series, LocalP2};
use crate::error::{Error, Result};
use crate::periods::genus_one_parts;
use crate::quad::{integrate, Tolerance};
use crate::series::{ps_mul, TruncatedSeries};
use crate::specfun::{airy_derivatives, jacobi_theta2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Ξ(−κ, 2π) = exp(prefactor_log)·e^{iπ/8}·ϑ₂(ξ − 1/4, τ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaFrame {
    pub xi: f64,
    pub tau: Complex64,
    pub prefactor_log: f64,
}

impl ThetaFrame {
    /// Real value of Ξ(−κ, 2π).
    pub fn value(&self) -> Result<f64> {
        let th = jacobi_theta2(Complex64::new(self.xi - 0.25, 0.0), self.tau)?;
        let v = Complex64::from_polar(1.0, PI / 8.0) * th;
        Ok(self.prefactor_log.exp() * v.re)
    }
}

/// Theta frame on the negative κ axis, κ > 27^{1/3}: z = κ⁻³, T = 3 log κ − ϖ̃₁(z).
pub fn theta_frame_p2(kappa: f64, model: &LocalP2) -> Result<ThetaFrame> {
    if !(kappa > 0.0) {
        return Err(Error::Invalid(format!("kappa must be positive, got {kappa}")));
    }
    let z = kappa.powi(-3);
    if !(z < 1.0 / 27.0) {
        return Err(Error::OutOfDisk { z });
    }
    let zc = Complex64::new(z, 0.0);
    let mu = kappa.ln();
    let w1 = model.genus0.w1.eval_c64(zc);
    let t = Complex64::new(3.0 * mu, 0.0) - w1;
    let g = model.genus0.eval_z(zc, t);
    let (h1, h2) = genus_one_parts(zc, g.w1, g.theta_w1);
    let pref =
        model.a_2pi + (t * t * g.d2f0 / 2.0 - t * g.df0 + g.f0) / (4.0 * PI * PI) + t / 12.0 + h1 - t / 24.0 + h2;
    let xi = 3.0 / (4.0 * PI * PI) * (t * g.d2f0 - g.df0);
    let tau = Complex64::new(-0.5, 0.0) + Complex64::new(0.0, 9.0 / (2.0 * PI)) * g.d2f0;
    Ok(ThetaFrame {
        xi: xi.re,
        tau,
        prefactor_log: pref.re,
    })
}

/// Ξ(−κ, 2π) = det(1 − κρ) for κ > 27^{1/3}.
pub fn xi_closed_form_p2(kappa: f64, model: &LocalP2) -> Result<f64> {
    theta_frame_p2(kappa, model)?.value()
}

/// log Ξ(κ, 2π) for κ > 27^{1/3} as the periodic sum Σ_n exp J(log κ + 2πin).
pub fn log_xi_positive_p2(kappa: f64, model: &LocalP2) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Invalid(format!("kappa must be positive, got {kappa}")));
    }
    let mu = kappa.ln();
    let j0 = model.j_max_susy(Complex64::new(mu, 0.0))?.re;
    let mut rest = 0.0;
    for n in 1..200 {
        let jn = model.j_max_susy(Complex64::new(mu, 2.0 * PI * n as f64))?;
        let term = 2.0 * (jn - j0).exp().re;
        rest += term;
        if (jn.re - j0).exp() < 1e-18 {
            break;
        }
    }
    Ok(j0 + rest.ln_1p())
}

/// The a_{l,n} table of e^{J − J^{(p)}} = Σ a_{l,n} μⁿ e^{−lμ} at ħ = 2π, plus A, B, C.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrandPotentialModel {
    pub geometry: String,
    pub hbar: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// (l, n) → a_{l,n}, l > 0; the (0, 0) term is 1 and not stored.
    pub coeffs: BTreeMap<(u32, u32), f64>,
}

/// Bivariate coefficients [k][n] of a series in z with polynomial-in-μ coefficients.
type Biv = Vec<Vec<Dd>>;

/// exp of a bivariate series with zero z⁰ part: k·E_k = Σ_j j·L_j·E_{k−j}.
fn biv_exp(l: &Biv, kmax: usize) -> Biv {
    let mut e: Biv = vec![Vec::new(); kmax + 1];
    e[0] = vec![Dd::ONE];
    for k in 1..=kmax {
        let mut acc: Vec<Dd> = Vec::new();
        for j in 1..=k {
            let (lj, ekj) = (&l[j], &e[k - j]);
            if lj.is_empty() || ekj.is_empty() {
                continue;
            }
            if acc.len() < lj.len() + ekj.len() - 1 {
                acc.resize(lj.len() + ekj.len() - 1, Dd::ZERO);
            }
            for (p, x) in lj.iter().enumerate() {
                for (q, y) in ekj.iter().enumerate() {
                    acc[p + q] += *x * *y * j as f64;
                }
            }
        }
        e[k] = acc.into_iter().map(|v| v / k as f64).collect();
    }
    e
}

/// Coefficients a_{l,n} for l = 3k ≤ cutoff, from the large-radius expansion of
/// J(μ, 2π) at z = −e^{−3μ}.
pub fn airy_coeff_table_p2(cutoff: u32, model: &LocalP2) -> Result<GrandPotentialModel> {
    let kmax = (cutoff / 3) as usize;
    if kmax > model.periods.order {
        return Err(Error::Invalid(format!(
            "cutoff {cutoff} needs period order {kmax}, have {}",
            model.periods.order
        )));
    }
    let g = &model.genus0;
    let w = g.w1.truncate(kmax);
    let tw = g.theta_w1.truncate(kmax);
    let f1 = g.df0_z.truncate(kmax);
    let one = TruncatedSeries::one("z", kmax);
    // g2 = −θf1 / (2(1 + θϖ̃₁))
    let g2 = ps_mul(&f1.theta(), &one.add(&tw)?.recip()?)?.scale(&Dd::from_f64(-0.5));
    let g0 = g.f0inst_z.truncate(kmax);
    let (h1, h2) = genus_one_series(&w)?;
    let w2 = ps_mul(&w, &w)?;
    let w3 = ps_mul(&w2, &w)?;
    let ww = ps_mul(&w, &f1)?;
    let wg2 = ps_mul(&w, &g2)?;
    let w2g2 = ps_mul(&w2, &g2)?;
    let inv = Dd::ONE / (Dd::from_f64(4.0) * crate::dd::PI * crate::dd::PI);
    // J_np = [(−27μ²w + 9μw² − w³)/18 + g0 − (3μ − w) f1 + (3μ − w)² g2]/(4π²) − w/24 + h1 + h2
    let c0: Vec<Dd> = (0..=kmax)
        .map(|k| {
            (-(w3.coeff(k)) / 18.0 + g0.coeff(k) + ww.coeff(k) + w2g2.coeff(k)) * inv - w.coeff(k) / 24.0
                + h1.coeff(k)
                + h2.coeff(k)
        })
        .collect();
    let c1: Vec<Dd> = (0..=kmax)
        .map(|k| (w2.coeff(k) / 2.0 - f1.coeff(k) * 3.0 - wg2.coeff(k) * 6.0) * inv)
        .collect();
    let c2: Vec<Dd> = (0..=kmax)
        .map(|k| (w.coeff(k) * (-1.5) + g2.coeff(k) * 9.0) * inv)
        .collect();
    let l: Biv = (0..=kmax)
        .map(|k| if k == 0 { Vec::new() } else { vec![c0[k], c1[k], c2[k]] })
        .collect();
    let e = biv_exp(&l, kmax);
    let mut coeffs = BTreeMap::new();
    for (k, poly) in e.iter().enumerate().skip(1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for (n, v) in poly.iter().enumerate() {
            coeffs.insert((3 * k as u32, n as u32), sign * v.to_f64());
        }
    }
    let (c, b) = cb_p2(2.0 * PI);
    Ok(GrandPotentialModel {
        geometry: "local_p2".into(),
        hbar: 2.0 * PI,
        a: model.a_2pi,
        b,
        c,
        coeffs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceValue {
    pub n: u32,
    pub value: f64,
    pub error_estimate: f64,
    /// False when the Airy tail stopped decreasing before reaching the target.
    pub converged: bool,
}

/// Z(N) = e^A C^{−1/3} Σ a_{l,n} (−C^{−1/3})ⁿ Ai⁽ⁿ⁾((N + l − B)/C^{1/3}).
pub fn z_trace_airy(n: u32, gpm: &GrandPotentialModel) -> Result<TraceValue> {
    if n == 0 {
        return Err(Error::Invalid("N must be at least 1".into()));
    }
    let s = gpm.c.powf(-1.0 / 3.0);
    let x = |l: u32| (n as f64 + l as f64 - gpm.b) * s;
    let mut total = airy_derivatives(x(0), 0)[0];
    let mut sectors: BTreeMap<u32, Vec<(u32, f64)>> = BTreeMap::new();
    for (&(l, k), &a) in &gpm.coeffs {
        sectors.entry(l).or_default().push((k, a));
    }
    let mut last = f64::INFINITY;
    let mut abs_sum = total.abs();
    let mut converged = false;
    for (l, terms) in sectors {
        let nmax = terms.iter().map(|t| t.0).max().unwrap_or(0) as usize;
        let ai = airy_derivatives(x(l), nmax);
        let sec: f64 = terms
            .iter()
            .map(|&(k, a)| a * (-s).powi(k as i32) * ai[k as usize])
            .sum();
        total += sec;
        abs_sum += sec.abs();
        let small = sec.abs() <= 1e-14 * total.abs();
        if small && last.abs() <= 1e-14 * total.abs() {
            converged = true;
        }
        last = sec;
        if converged {
            break;
        }
    }
    let scale = gpm.a.exp() * s;
    Ok(TraceValue {
        n,
        value: scale * total,
        error_estimate: scale * (last.abs() + 1e-15 * abs_sum),
        converged,
    })
}

/// Z(N) = (1/2πi)∫ e^{J(μ,2π) − Nμ} dμ along μ0 + ρe^{±iπ/3}.
pub fn z_trace_contour(n: u32, mu0: f64, model: &LocalP2) -> Result<TraceValue> {
    if n == 0 {
        return Err(Error::Invalid("N must be at least 1".into()));
    }
    let z0 = (-3.0 * mu0).exp();
    if !(z0 < 1.0 / 27.0) {
        return Err(Error::OutOfDisk { z: z0 });
    }
    let om = Complex64::from_polar(1.0, PI / 3.0);
    let (c, _) = cb_p2(2.0 * PI);
    let rho_max = (120.0 / c).cbrt() + 4.0;
    let f = |rho: f64| -> Complex64 {
        let mu = mu0 + rho * om;
        match model.j_max_susy(mu) {
            Ok(j) => (j - n as f64 * mu).exp() * om,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let mut pts: Vec<f64> = vec![0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0];
    pts.retain(|p| *p < rho_max);
    pts.push(rho_max);
    let tol = Tolerance {
        abs: 1e-16,
        rel: 1e-12,
        max_panels: 4000,
    };
    let (v, err) = integrate(f, &pts, tol)?;
    if !v.re.is_finite() {
        return Err(Error::Numerical("contour integrand is not finite".into()));
    }
    Ok(TraceValue {
        n,
        value: v.im / PI,
        error_estimate: err / PI,
        converged: true,
    })
}

/// Roots of Ξ(−e^E, 2π) in [e_lo, e_hi], by sign-change bracketing and bisection.
pub fn fredholm_zeros(e_lo: f64, e_hi: f64, model: &LocalP2) -> Result<Vec<f64>> {
    if !(e_hi > e_lo) {
        return Err(Error::Invalid(format!("empty range [{e_lo}, {e_hi}]")));
    }
    let f = |e: f64| {
        theta_frame_p2(e.exp(), model).and_then(|fr| {
            if !fr.prefactor_log.is_finite() {
                return Err(Error::Numerical("prefactor is not finite".into()));
            }
            fr.value()
        })
    };
    let steps = ((e_hi - e_lo) / 0.01).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| e_lo + (e_hi - e_lo) * k as f64 / steps as f64)
        .collect();
    let vals = grid.par_iter().map(|&e| f(e)).collect::<Result<Vec<f64>>>()?;
    let brackets: Vec<(f64, f64, f64)> = (0..steps)
        .filter(|&k| vals[k] == 0.0 || vals[k].signum() != vals[k + 1].signum())
        .filter(|&k| vals[k + 1] != 0.0 || k + 1 == steps)
        .map(|k| (grid[k], grid[k + 1], vals[k]))
        .collect();
    brackets
        .par_iter()
        .map(|&(mut a, mut b, fa)| {
            if fa == 0.0 {
                return Ok(a);
            }
            let sa = fa.signum();
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m)?;
                if fm == 0.0 {
                    return Ok(m);
                }
                if fm.signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

/// Ξ(κ, 2π) on the positive axis: 1 + Σ Z(N)κ^N for κ below 4, the periodic
/// sum of e^J above.
pub fn xi_positive_p2(kappa: f64, model: &LocalP2, gpm: &GrandPotentialModel) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Invalid(format!("kappa must be positive, got {kappa}")));
    }
    if kappa >= 4.0 {
        return Ok(log_xi_positive_p2(kappa, model)?.exp());
    }
    let mut sum = 1.0;
    for n in 1..60 {
        let term = z_trace_airy(n, gpm)?.value * kappa.powi(n as i32);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Least-squares fit −log Z(N) = a N^{3/2} + b N^{1/2} + c; returns a.
pub fn fit_n32(ns: &[u32], values: &[f64]) -> Result<f64> {
    if ns.len() != values.len() || ns.len() < 3 {
        return Err(Error::Invalid("need at least three (N, Z) pairs".into()));
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (&n, &z) in ns.iter().zip(values) {
        if !(z > 0.0) {
            return Err(Error::Domain(format!("Z({n}) = {z} is not positive")));
        }
        let nf = n as f64;
        let row = [nf.powf(1.5), nf.sqrt(), 1.0];
        for i in 0..3 {
            atb[i] += row[i] * -z.ln();
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Cramer's rule on the 3×3 normal equations
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&ata);
    if d.abs() < 1e-300 {
        return Err(Error::Numerical("singular fit".into()));
    }
    let mut m = ata;
    for i in 0..3 {
        m[i][0] = atb[i];
    }
    Ok(det(&m) / d)
}
