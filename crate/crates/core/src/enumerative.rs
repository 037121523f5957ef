//! BPS data, Gopakumar–Vafa and Nekrasov–Shatashvili free energies, and the
//! local P² grand potential.
//!
//! Sign conventions: the refined spin sum carries (−1)^{2j_R} and the NS
//! resummation carries (−1)^{2j_L+2j_R}; with these the d = 1, 2 refined
//! states reproduce n₀ = 3, −6 and ħF^NS → F₀ as ħ → 0.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::periods::{f0_series, genus_one_parts, periods, FreeEnergyData, PeriodData};
use crate::quad::{integrate, Tolerance};
use crate::series::{ps_log, Coeff, TruncatedSeries};
use crate::specfun::ZETA3;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const LOCAL_P2_BPS: &str = include_str!("../data/local_p2.bps");

#[derive(Clone, Debug, PartialEq)]
pub struct BpsTable {
    pub geometry: String,
    pub bfield: i64,
    /// GV rows are complete in the genus for d ≤ this degree.
    pub complete_degree: u32,
    /// (d, 2j_L, 2j_R) → N.
    pub refined: BTreeMap<(u32, u32, u32), i64>,
    /// (g, d) → n_g^d.
    pub gv: BTreeMap<(u32, u32), i64>,
}

fn chi(two_j: u32, q: Complex64) -> Complex64 {
    let n = two_j as i32 + 1;
    (q.powi(n) - q.powi(-n)) / (q - q.inv())
}

impl BpsTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut geometry = None;
        let mut bfield = None;
        let mut complete_degree = 0;
        let mut refined = BTreeMap::new();
        let mut gv = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let int = |tok: &str| -> Result<i64> {
                tok.parse::<i64>()
                    .map_err(|_| perr(format!("expected an integer, got '{tok}'")))
            };
            let nat = |tok: &str| -> Result<u32> {
                tok.parse::<u32>()
                    .map_err(|_| perr(format!("expected a non-negative integer, got '{tok}'")))
            };
            if let Some((key, value)) = line.split_once('=') {
                let value = value.trim();
                match key.trim() {
                    "geometry" => geometry = Some(value.to_string()),
                    "bfield" => bfield = Some(int(value)?),
                    "complete_degree" => complete_degree = nat(value)?,
                    other => return Err(perr(format!("unknown key '{other}'"))),
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.first().copied() {
                Some("refined") if toks.len() == 5 => {
                    let key = (nat(toks[1])?, nat(toks[2])?, nat(toks[3])?);
                    if key.0 == 0 {
                        return Err(perr("degree must be positive".into()));
                    }
                    if refined.insert(key, int(toks[4])?).is_some() {
                        return Err(perr(format!("duplicate refined row {key:?}")));
                    }
                }
                Some("gv") if toks.len() == 4 => {
                    let key = (nat(toks[1])?, nat(toks[2])?);
                    if key.1 == 0 {
                        return Err(perr("degree must be positive".into()));
                    }
                    if gv.insert(key, int(toks[3])?).is_some() {
                        return Err(perr(format!("duplicate gv row {key:?}")));
                    }
                }
                _ => return Err(perr(format!("cannot parse row '{line}'"))),
            }
        }
        let table = BpsTable {
            geometry: geometry.ok_or(Error::Parse {
                line: 0,
                msg: "missing 'geometry'".into(),
            })?,
            bfield: bfield.ok_or(Error::Parse {
                line: 0,
                msg: "missing 'bfield'".into(),
            })?,
            complete_degree,
            refined,
            gv,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn local_p2() -> Self {
        Self::parse(LOCAL_P2_BPS).expect("shipped table is valid")
    }

    pub fn gv(&self, g: u32, d: u32) -> i64 {
        self.gv.get(&(g, d)).copied().unwrap_or(0)
    }

    pub fn refined_degrees(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self.refined.keys().map(|k| k.0).collect();
        ds.dedup();
        ds
    }

    pub fn max_refined_degree(&self) -> u32 {
        self.refined.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// B-field parity for every refined state, and the spin sum for every degree with refined data.
    pub fn validate(&self) -> Result<()> {
        for (&(d, tl, tr), &n) in &self.refined {
            if n != 0 && (tl + tr + 1) as i64 % 2 != (self.bfield * d as i64).rem_euclid(2) {
                return Err(Error::Invalid(format!(
                    "B-field parity fails for d={d}, 2jL={tl}, 2jR={tr}"
                )));
            }
        }
        let qs = [
            Complex64::from_polar(0.7, 0.3),
            Complex64::from_polar(1.3, -1.1),
            Complex64::new(0.45, 0.0),
            Complex64::from_polar(0.9, 2.0),
            Complex64::from_polar(1.1, 0.77),
        ];
        for d in self.refined_degrees() {
            for q in qs {
                let r = check_spin_sum(self, d, q);
                if r > 1e-10 * (1.0 + q.norm().powi(40)) {
                    return Err(Error::Invalid(format!(
                        "spin sum fails at d={d}, q={q}: residual {r:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "geometry = {}\nbfield = {}\ncomplete_degree = {}\n",
            self.geometry, self.bfield, self.complete_degree
        );
        for (&(d, tl, tr), n) in &self.refined {
            s += &format!("refined {d} {tl} {tr} {n}\n");
        }
        for (&(g, d), n) in &self.gv {
            s += &format!("gv {g} {d} {n}\n");
        }
        s
    }
}

/// |Σ χ_{jL}(q)(−1)^{2jR}(2jR+1)N − Σ_g n_g (q^{1/2} − q^{−1/2})^{2g}| at degree d.
pub fn check_spin_sum(t: &BpsTable, d: u32, q: Complex64) -> f64 {
    let mut lhs = Complex64::new(0.0, 0.0);
    for (&(dd, tl, tr), &n) in &t.refined {
        if dd == d {
            let sign = if tr % 2 == 0 { 1.0 } else { -1.0 };
            lhs += chi(tl, q) * (sign * (tr + 1) as f64 * n as f64);
        }
    }
    let x = q - 2.0 + q.inv();
    let mut rhs = Complex64::new(0.0, 0.0);
    for (&(g, dd), &n) in &t.gv {
        if dd == d {
            rhs += x.powi(g as i32) * n as f64;
        }
    }
    (lhs - rhs).norm()
}

/// Genus-zero multicover inversion: N₀^d = Σ_{w|d} n₀^{d/w}/w³.
pub fn gv_from_gw(gw: &[BigRational]) -> Vec<BigRational> {
    let mut n: Vec<BigRational> = Vec::with_capacity(gw.len());
    for d in 1..=gw.len() {
        let mut v = gw[d - 1].clone();
        for w in 2..=d {
            if d % w == 0 {
                v = v - n[d / w - 1].clone() / BigRational::from_integer(BigInt::from(w.pow(3)));
            }
        }
        n.push(v);
    }
    n
}

/// Forward genus-zero multicover sum.
pub fn gw_from_gv(gv: &[BigRational]) -> Vec<BigRational> {
    (1..=gv.len())
        .map(|d| {
            (1..=d).filter(|w| d % w == 0).fold(BigRational::zero(), |acc, w| {
                acc + gv[d / w - 1].clone() / BigRational::from_integer(BigInt::from(w.pow(3)))
            })
        })
        .collect()
}

/// Genus-one GV invariants from F₁^inst(Q) = Σ_d Σ_w (n₁^d + n₀^d/12) Q^{wd}/w.
pub fn gv_genus_one(f1_instanton: &[BigRational], n0: &[BigRational]) -> Vec<BigRational> {
    let mut m: Vec<BigRational> = Vec::with_capacity(f1_instanton.len());
    for d in 1..=f1_instanton.len() {
        let mut v = f1_instanton[d - 1].clone();
        for w in 2..=d {
            if d % w == 0 {
                v = v - m[d / w - 1].clone() / BigRational::from_integer(BigInt::from(w));
            }
        }
        m.push(v);
    }
    m.iter()
        .zip(n0)
        .map(|(m, n)| m.clone() - n.clone() / BigRational::from_integer(BigInt::from(12)))
        .collect()
}

/// Polynomial data: F₀ ⊃ a t³/6, F₁ ⊃ b t, F^NS ⊃ b_NS t ħ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialData {
    pub a: f64,
    pub b: f64,
    pub b_ns: f64,
}

impl PolynomialData {
    pub fn local_p2() -> Self {
        PolynomialData {
            a: 1.0 / 3.0,
            b: 1.0 / 12.0,
            b_ns: -1.0 / 24.0,
        }
    }
}

fn w_cutoff(decay: f64) -> usize {
    if decay <= 0.0 {
        return 1;
    }
    ((40.0 / decay).ceil() as usize).clamp(1, 400)
}

fn check_data(t: &BpsTable, dmax: u32, refined: bool) -> Result<()> {
    let have = if refined {
        t.max_refined_degree()
    } else {
        t.complete_degree
    };
    if dmax > have {
        return Err(Error::Unsupported(format!(
            "degree {dmax} requested but the table is complete only through d = {have}"
        )));
    }
    Ok(())
}

/// F^GV(t + πiB, g_s), instanton part, d ≤ dmax.
pub fn gv_free_energy(t: &BpsTable, tval: f64, gs: f64, dmax: u32) -> Result<f64> {
    check_data(t, dmax, false)?;
    let mut sum = 0.0;
    for (&(g, d), &n) in &t.gv {
        if d > dmax || n == 0 {
            continue;
        }
        for w in 1..=w_cutoff(d as f64 * tval) {
            let s = (w as f64 * gs / 2.0).sin();
            if g == 0 && s.abs() < 1e-8 {
                return Err(Error::Pole(format!("sin(w gs/2) vanishes at w = {w}, gs = {gs}")));
            }
            let sign = if (w as i64 * d as i64 * t.bfield).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            sum +=
                sign * n as f64 * (2.0 * s).powi(2 * g as i32 - 2) / w as f64 * (-(w as f64) * d as f64 * tval).exp();
        }
    }
    Ok(sum)
}

/// ħ written as π·r + ε; trigonometric functions of c·ħ and c·π²/ħ reduce the
/// π·r part exactly so that values near poles keep their relative accuracy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftedHbar {
    pub r: f64,
    pub eps: f64,
}

fn sin_cos_pi(x: f64) -> (f64, f64) {
    let k = (2.0 * x).round();
    if (2.0 * x - k).abs() < 1e-9 {
        match (k as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        (PI * x).sin_cos()
    }
}

fn add_angles((s0, c0): (f64, f64), (s1, c1): (f64, f64)) -> (f64, f64) {
    (s0 * c1 + c0 * s1, c0 * c1 - s0 * s1)
}

impl ShiftedHbar {
    pub fn plain(hbar: f64) -> Self {
        ShiftedHbar { r: hbar / PI, eps: 0.0 }
    }

    pub fn value(&self) -> f64 {
        PI * self.r + self.eps
    }

    /// sin and cos of c·ħ.
    pub fn sin_cos_mul(&self, c: f64) -> (f64, f64) {
        if self.eps == 0.0 {
            return (c * self.value()).sin_cos();
        }
        add_angles(sin_cos_pi(c * self.r), (c * self.eps).sin_cos())
    }

    /// sin and cos of c·π²/ħ.
    pub fn sin_cos_inv(&self, c: f64) -> (f64, f64) {
        if self.eps == 0.0 {
            return (c * PI * PI / self.value()).sin_cos();
        }
        let delta = self.eps / (PI * self.r);
        let base = c / self.r;
        add_angles(sin_cos_pi(base), (-PI * base * delta / (1.0 + delta)).sin_cos())
    }
}

/// s_{jL,jR}(ħ, w) = sin(ħw(2jL+1)/2) sin(ħw(2jR+1)/2) / (2w² sin³(ħw/2)) and ∂_ħ s.
fn ns_weight(hbar: f64, w: f64, tl: u32, tr: u32) -> (f64, f64) {
    ns_weight_shifted(&ShiftedHbar::plain(hbar), w, tl, tr)
}

fn ns_weight_shifted(h: &ShiftedHbar, w: f64, tl: u32, tr: u32) -> (f64, f64) {
    let (al, ar, c) = (w * (tl + 1) as f64 / 2.0, w * (tr + 1) as f64 / 2.0, w / 2.0);
    let (sl, cl) = h.sin_cos_mul(al);
    let (sr, cr) = h.sin_cos_mul(ar);
    let (sc, cc) = h.sin_cos_mul(c);
    let den = 2.0 * w * w * sc.powi(3);
    let s = sl * sr / den;
    let ds = (al * cl * sr + ar * sl * cr) / den - 3.0 * c * cc / sc * s;
    (s, ds)
}

fn state_sign(tl: u32, tr: u32) -> f64 {
    if (tl + tr) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// F^NS(t, ħ) including the cubic and linear terms, refined degrees ≤ dmax.
pub fn ns_free_energy(t: &BpsTable, poly: &PolynomialData, tval: f64, hbar: f64, dmax: u32) -> Result<f64> {
    Ok(poly.a * tval.powi(3) / (6.0 * hbar) + poly.b_ns * tval * hbar + ns_instanton(t, tval, hbar, dmax)?)
}

/// Instanton part of F^NS(t, ħ).
pub fn ns_instanton(t: &BpsTable, tval: f64, hbar: f64, dmax: u32) -> Result<f64> {
    check_data(t, dmax, true)?;
    let mut sum = 0.0;
    for (&(d, tl, tr), &n) in &t.refined {
        if d > dmax {
            continue;
        }
        for w in 1..=w_cutoff(d as f64 * tval) {
            if (w as f64 * hbar / 2.0).sin().abs() < 1e-8 {
                return Err(Error::Pole(format!("sin(ħw/2) vanishes at w = {w}, ħ = {hbar}")));
            }
            let (s, _) = ns_weight(hbar, w as f64, tl, tr);
            sum += state_sign(tl, tr) * n as f64 * s * (-(w as f64) * d as f64 * tval).exp();
        }
    }
    Ok(sum)
}

/// A_c(k) = 2ζ(3)/(π²k)(1 − k³/16) + (k²/π²)∫₀^∞ x/(e^{kx} − 1) log(1 − e^{−2x}) dx.
pub fn a_c(k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Invalid(format!("A_c needs k > 0, got {k}")));
    }
    let f = |x: f64| {
        if x == 0.0 {
            return 0.0;
        }
        x / (k * x).exp_m1() * (-(-2.0 * x).exp_m1()).ln()
    };
    let tol = Tolerance {
        abs: 1e-15,
        rel: 1e-13,
        max_panels: 4000,
    };
    let (v, _) = integrate(f, &[0.0, 0.25, 1.0, 4.0, 10.0, 25.0, 60.0], tol)?;
    Ok(2.0 * ZETA3 / (PI * PI * k) * (1.0 - k.powi(3) / 16.0) + k * k / (PI * PI) * v)
}

/// A(ħ) = [3A_c(ħ/π) − A_c(3ħ/π)]/4.
pub fn a_constant_p2(hbar: f64) -> Result<f64> {
    if !(hbar > 0.0) {
        return Err(Error::Invalid("hbar must be positive".into()));
    }
    Ok((3.0 * a_c(hbar / PI)? - a_c(3.0 * hbar / PI)?) / 4.0)
}

/// C(ħ) = 9/(4πħ), B(ħ) = π/(2ħ) − ħ/(16π).
pub fn cb_p2(hbar: f64) -> (f64, f64) {
    (9.0 / (4.0 * PI * hbar), PI / (2.0 * hbar) - hbar / (16.0 * PI))
}

/// Local P² at large radius: period data, genus-zero and genus-one series in
/// z and in Q, the BPS table and polynomial data.
#[derive(Clone, Debug)]
pub struct LocalP2 {
    pub periods: PeriodData,
    pub genus0: FreeEnergyData<Dd>,
    /// z(Q).
    pub z_of_q: TruncatedSeries<Dd>,
    /// h₁ and h₂ as series in Q (F₁ = t/12 + h₁, F₁^NS = −t/24 + h₂).
    pub h1_q: TruncatedSeries<Dd>,
    pub h2_q: TruncatedSeries<Dd>,
    pub bps: BpsTable,
    pub poly: PolynomialData,
    pub a_2pi: f64,
}

/// h₁(z) and h₂(z) as series (any coefficient field).
pub fn genus_one_series<T: Coeff>(w1: &TruncatedSeries<T>) -> Result<(TruncatedSeries<T>, TruncatedSeries<T>)> {
    let n = w1.order();
    let one = TruncatedSeries::one("z", n);
    let l1 = ps_log(&one.add(&w1.theta())?)?;
    let mut c = vec![T::zero(); n + 1];
    c[0] = T::one();
    if n >= 1 {
        c[1] = T::from_int(27);
    }
    let l27 = ps_log(&TruncatedSeries::new("z", c))?;
    let h1 = w1
        .scale(&(T::one() / T::from_int(12)))
        .sub(&l1.scale(&(T::one() / T::from_int(2))))?
        .sub(&l27.scale(&(T::one() / T::from_int(12))))?;
    let h2 = w1.add(&l27)?.scale(&(-(T::one() / T::from_int(24))));
    Ok((h1, h2))
}

impl LocalP2 {
    pub fn new(order: usize) -> Result<Self> {
        let periods = periods(order)?;
        let w1 = periods.varpi1_tilde.clone();
        let w2 = periods.varpi2_tilde.clone();
        let genus0 = f0_series(&w1, &w2)?;
        let z_of_q = crate::periods::mirror_map_inverse(&w1)?;
        let (h1, h2) = genus_one_series(&w1)?;
        let h1_q = h1.relabel("Q").compose(&z_of_q)?;
        let h2_q = h2.relabel("Q").compose(&z_of_q)?;
        Ok(LocalP2 {
            periods,
            genus0,
            z_of_q,
            h1_q,
            h2_q,
            bps: BpsTable::local_p2(),
            poly: PolynomialData::local_p2(),
            a_2pi: a_constant_p2(2.0 * PI)?,
        })
    }

    /// J(μ, 2π) from the z-series at z = −e^{−3μ}, t = 3μ − ϖ̃₁(z) (complex μ allowed).
    pub fn j_max_susy(&self, mu: Complex64) -> Result<Complex64> {
        let z = -(-3.0 * mu).exp();
        if !(z.norm() < 1.0 / 27.0) {
            return Err(Error::OutOfDisk { z: z.norm() });
        }
        let w1 = self.genus0.w1.eval_c64(z);
        let t = 3.0 * mu - w1;
        let g = self.genus0.eval_z(z, t);
        let (h1, h2) = genus_one_parts(z, g.w1, g.theta_w1);
        let f1 = t / 12.0 + h1;
        let f1ns = -t / 24.0 + h2;
        Ok(self.a_2pi + (g.f0 - t * g.df0 + t * t * g.d2f0 / 2.0) / (4.0 * PI * PI) + f1 + f1ns)
    }

    /// The same J(μ, 2π) from the Q-series: solve z(Q) = −e^{−3μ} for t with
    /// Q = −e^{−t}, then use F₀ = t³/18 + Σ c_d Q^d and h₁(Q), h₂(Q).
    pub fn j_max_susy_q(&self, mu: f64) -> Result<f64> {
        let target = -(-3.0 * mu).exp();
        if !(target.abs() < 1.0 / 27.0) {
            return Err(Error::OutOfDisk { z: target });
        }
        let zq = &self.z_of_q;
        let dzq = zq.derivative();
        // Newton in Q, starting from Q = z
        let mut q = target;
        for _ in 0..60 {
            let f = zq.eval(&Dd::from_f64(q)).to_f64() - target;
            let step = f / dzq.eval(&Dd::from_f64(q)).to_f64();
            q -= step;
            if step.abs() <= 1e-17 * q.abs() {
                break;
            }
        }
        let t = -(-q).ln();
        let c = &self.genus0.f0_instanton;
        let (mut f0, mut df0, mut d2f0) = (t.powi(3) / 18.0, t * t / 6.0, t / 3.0);
        let mut qp = 1.0;
        for d in 1..=c.order() {
            qp *= q;
            let cd = c.coeff(d).to_f64() * qp;
            f0 += cd;
            df0 -= d as f64 * cd;
            d2f0 += (d * d) as f64 * cd;
        }
        let h1 = self.h1_q.eval(&Dd::from_f64(q)).to_f64();
        let h2 = self.h2_q.eval(&Dd::from_f64(q)).to_f64();
        Ok(self.a_2pi + (f0 - t * df0 + t * t * d2f0 / 2.0) / (4.0 * PI * PI) + t / 12.0 + h1 - t / 24.0 + h2)
    }

    /// J(μ, ħ). At ħ = 2π the closed form is used; otherwise J^WKB + J^WS with
    /// the classical ("leading") mirror map and table data through `dmax`.
    pub fn grand_potential(&self, mu: f64, hbar: f64, dmax: u32) -> Result<f64> {
        if !(hbar > 0.0) {
            return Err(Error::Invalid("hbar must be positive".into()));
        }
        if (hbar - 2.0 * PI).abs() < 1e-13 {
            return Ok(self.j_max_susy(Complex64::new(mu, 0.0))?.re);
        }
        let z = -(-3.0 * mu).exp();
        if !(z.abs() < 1.0 / 27.0) {
            return Err(Error::OutOfDisk { z });
        }
        let t = 3.0 * mu - self.periods.varpi1_tilde.eval(&Dd::from_f64(z)).to_f64();
        let a = a_constant_p2(hbar)?;
        Ok(j_wkb(&self.bps, &self.poly, t, hbar, dmax, a)? + j_ws(&self.bps, t, hbar, dmax)?)
    }
}

/// J^WKB(t, ħ) = (t/2π)∂_tF^NS + (ħ²/2π)∂_ħ(F^NS/ħ) + (2π/ħ) b t + A.
pub fn j_wkb(t: &BpsTable, poly: &PolynomialData, tval: f64, hbar: f64, dmax: u32, a: f64) -> Result<f64> {
    check_data(t, dmax, true)?;
    let mut sum = poly.a * tval.powi(3) / (12.0 * PI * hbar)
        + poly.b_ns * hbar * tval / (2.0 * PI)
        + 2.0 * PI / hbar * poly.b * tval
        + a;
    for (&(d, tl, tr), &n) in &t.refined {
        if d > dmax {
            continue;
        }
        for w in 1..=w_cutoff(d as f64 * tval) {
            if (w as f64 * hbar / 2.0).sin().abs() < 1e-8 {
                return Err(Error::Pole(format!("J^WKB pole at ħ = {hbar}, w = {w}")));
            }
            sum += wkb_term(hbar, tval, d, w as u32, tl, tr)? * state_sign(tl, tr) * n as f64;
        }
    }
    Ok(sum)
}

fn wkb_term(hbar: f64, tval: f64, d: u32, w: u32, tl: u32, tr: u32) -> Result<f64> {
    wkb_term_shifted(&ShiftedHbar::plain(hbar), tval, d, w, tl, tr)
}

fn wkb_term_shifted(h: &ShiftedHbar, tval: f64, d: u32, w: u32, tl: u32, tr: u32) -> Result<f64> {
    let wf = w as f64;
    let hbar = h.value();
    if h.sin_cos_mul(wf / 2.0).0.abs() < 1e-14 * (1.0 + hbar) {
        return Err(Error::Pole(format!("J^WKB pole at ħ = {hbar}, w = {w}")));
    }
    let (s, ds) = ns_weight_shifted(h, wf, tl, tr);
    let wd = wf * d as f64;
    let dsh = (ds * hbar - s) / (hbar * hbar);
    Ok((-wd * tval / (2.0 * PI) * s + hbar * hbar / (2.0 * PI) * dsh) * (-wd * tval).exp())
}

/// J^WS = F^GV(2πt/ħ + πiB, 4π²/ħ).
pub fn j_ws(t: &BpsTable, tval: f64, hbar: f64, dmax: u32) -> Result<f64> {
    gv_free_energy(t, 2.0 * PI * tval / hbar, 4.0 * PI * PI / hbar, dmax)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmoReport {
    pub hbar_target: f64,
    pub t: f64,
    pub eps: Vec<f64>,
    /// Colliding WKB and WS pieces at ħ = target + ε and target − ε.
    pub wkb_plus: Vec<f64>,
    pub wkb_minus: Vec<f64>,
    pub ws_plus: Vec<f64>,
    pub ws_minus: Vec<f64>,
    /// Symmetric combination ½[(WKB+WS)(target+ε) + (WKB+WS)(target−ε)].
    pub combined: Vec<f64>,
    /// True when no WKB/WS exponents collide at the target.
    pub generic: bool,
}

impl HmoReport {
    /// max over sides of |piece(ε_{k+1})| / |piece(ε_k)|, the growth per ε step.
    pub fn piece_growth(&self) -> Vec<f64> {
        let series = [&self.wkb_plus, &self.wkb_minus, &self.ws_plus, &self.ws_minus];
        (0..self.eps.len().saturating_sub(1))
            .map(|k| {
                series
                    .iter()
                    .map(|s| s[k + 1].abs() / s[k].abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// |combined(ε_{k+1}) − combined(ε_k)|.
    pub fn combined_differences(&self) -> Vec<f64> {
        self.combined.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }
}

/// Collision of the WS order-m exponent e^{−2πm t/ħ} with WKB exponents
/// e^{−n t}, n = 2πm/ħ_target, evaluated near the target at fixed t.
pub fn hmo_cancellation_check(t: &BpsTable, hbar_target: f64, m: u32, tval: f64, eps: &[f64]) -> Result<HmoReport> {
    let nf = 2.0 * PI * m as f64 / hbar_target;
    let n = nf.round();
    let generic = (nf - n).abs() > 1e-9 || n < 1.0;
    let n = n as u32;
    if !generic && n > t.max_refined_degree() {
        return Err(Error::Unsupported("collision beyond the refined data".into()));
    }
    let wkb = |h: ShiftedHbar| -> Result<f64> {
        if generic {
            return Ok(0.0);
        }
        let mut s = 0.0;
        for (&(d, tl, tr), &num) in &t.refined {
            if n % d == 0 {
                s += wkb_term_shifted(&h, tval, d, n / d, tl, tr)? * state_sign(tl, tr) * num as f64;
            }
        }
        Ok(s)
    };
    let ws = |h: ShiftedHbar| -> Result<f64> {
        let tt = 2.0 * PI * tval / h.value();
        let mut s = 0.0;
        for (&(g, d), &num) in &t.gv {
            if m % d != 0 || num == 0 {
                continue;
            }
            let w = m / d;
            let sn = h.sin_cos_inv(2.0 * w as f64).0;
            let sign = if (w as i64 * d as i64 * t.bfield).rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            s += sign * num as f64 * (2.0 * sn).powi(2 * g as i32 - 2) / w as f64 * (-(w as f64) * d as f64 * tt).exp();
        }
        Ok(s)
    };
    if m > t.complete_degree {
        return Err(Error::Unsupported(format!("WS order {m} beyond complete GV data")));
    }
    let mut r = HmoReport {
        hbar_target,
        t: tval,
        eps: eps.to_vec(),
        wkb_plus: vec![],
        wkb_minus: vec![],
        ws_plus: vec![],
        ws_minus: vec![],
        combined: vec![],
        generic,
    };
    for &e in eps {
        let r0 = hbar_target / PI;
        let (hp, hm) = (ShiftedHbar { r: r0, eps: e }, ShiftedHbar { r: r0, eps: -e });
        let (a, b, c, d) = (wkb(hp)?, wkb(hm)?, ws(hp)?, ws(hm)?);
        r.wkb_plus.push(a);
        r.wkb_minus.push(b);
        r.ws_plus.push(c);
        r.ws_minus.push(d);
        r.combined.push(0.5 * ((a + c) + (b + d)));
    }
    Ok(r)
}

/// Exact F₀ instanton coefficients and genus-one F₁ instanton coefficients in Q through `order`.
pub fn exact_free_energy_coefficients(order: usize) -> Result<(Vec<BigRational>, Vec<BigRational>)> {
    let (w1, w2) = crate::periods::periods_exact(order);
    let fe = f0_series(&w1, &w2)?;
    let zq = crate::periods::mirror_map_inverse(&w1)?;
    let (h1, _) = genus_one_series(&w1)?;
    let h1q = h1.relabel("Q").compose(&zq)?;
    let c: Vec<BigRational> = (1..=order).map(|d| fe.f0_instanton.coeff(d)).collect();
    let f1: Vec<BigRational> = (1..=order).map(|d| h1q.coeff(d)).collect();
    Ok((c, f1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn shipped_table_loads() {
        let t = BpsTable::local_p2();
        assert_eq!(t.bfield, 1);
        assert_eq!(t.gv(0, 1), 3);
        assert_eq!(BpsTable::parse(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn corrupted_table_is_rejected() {
        let bad = LOCAL_P2_BPS.replace("refined 1 0 2 1", "refined 1 0 2 2");
        assert!(BpsTable::parse(&bad).is_err());
        let mut t = BpsTable::local_p2();
        t.refined.insert((1, 0, 2), 2);
        assert!((check_spin_sum(&t, 1, Complex64::new(1.0 + 1e-9, 0.0)) - 3.0).abs() < 1e-6);
        assert!(BpsTable::parse(&LOCAL_P2_BPS.replace("gv 0 1 3", "gv 0 1 3.0")).is_err());
    }

    #[test]
    fn multicover_inversion() {
        assert_eq!(gv_from_gw(&[r(3, 1)]), vec![r(3, 1)]);
        assert_eq!(gv_from_gw(&[r(3, 1), r(-45, 8)]), vec![r(3, 1), r(-6, 1)]);
        assert!(gv_from_gw(&vec![r(0, 1); 4]).iter().all(|x| x.is_zero()));
        let v = vec![r(3, 1), r(-6, 1), r(27, 1), r(-192, 1)];
        assert_eq!(gv_from_gw(&gw_from_gv(&v)), v);
    }

    #[test]
    fn gv_integrality_and_table_agreement() {
        let (c, f1) = exact_free_energy_coefficients(6).unwrap();
        let n0 = gv_from_gw(&c);
        let n1 = gv_genus_one(&f1, &n0);
        let t = BpsTable::local_p2();
        for d in 1..=6u32 {
            let a = &n0[d as usize - 1];
            let b = &n1[d as usize - 1];
            assert!(a.is_integer() && b.is_integer(), "d={d}: {a} {b}");
            assert_eq!(a, &r(t.gv(0, d), 1));
            assert_eq!(b, &r(t.gv(1, d), 1));
        }
    }

    #[test]
    fn gv_leading_term_and_periodicity() {
        let t = BpsTable::local_p2();
        let (tv, gs) = (12.0, 0.9);
        let full = gv_free_energy(&t, tv, gs, 1).unwrap();
        let lead = -3.0 * (-tv).exp() / (2.0 * (gs / 2.0).sin()).powi(2);
        assert!((full / lead - 1.0).abs() < 1e-4);
        assert!(gv_free_energy(&t, 60.0, gs, 3).unwrap().abs() < 1e-20);
        assert!(gv_free_energy(&t, tv, 2.0 * PI, 1).is_err());
        assert!(gv_free_energy(&t, tv, gs, 5).is_err());
    }

    #[test]
    fn ns_single_state_and_classical_limit() {
        let t = BpsTable::local_p2();
        let (hb, tv) = (0.8, 20.0);
        let poly = PolynomialData::local_p2();
        let full = ns_free_energy(&t, &poly, tv, hb, 1).unwrap();
        let inst = ns_instanton(&t, tv, hb, 1).unwrap();
        assert!((full - inst - (tv.powi(3) / (18.0 * hb) - tv * hb / 24.0)).abs() < 1e-10);
        let want = (hb / 2.0).sin() * (1.5 * hb).sin() / (2.0 * (hb / 2.0).sin().powi(3)) * (-tv).exp();
        assert!((inst / want - 1.0).abs() < 1e-7);
        // ħ F^NS → F₀ as ħ → 0, compared on the d ≤ 2 instanton sectors
        let tv = 4.0;
        let hb = 1e-3;
        let ns = hb * ns_instanton(&t, tv, hb, 2).unwrap();
        let f0: f64 = (1..=2)
            .map(|d: u32| {
                (1..50)
                    .map(|w: u32| t.gv(0, d) as f64 * (-((w * d) as f64) * tv).exp() / (w as f64).powi(3))
                    .sum::<f64>()
            })
            .sum();
        assert!((ns / f0 - 1.0).abs() < 1e-4, "{ns} {f0}");
    }

    #[test]
    fn a_constant_values() {
        let k = 1e-3;
        assert!((a_c(k).unwrap() * k / (2.0 * ZETA3 / (PI * PI)) - 1.0).abs() < 1e-4);
        assert!((a_constant_p2(2.0 * PI).unwrap() - 0.142504105366827254).abs() < 1e-12);
    }

    #[test]
    fn two_routes_to_the_grand_potential() {
        let p = LocalP2::new(60).unwrap();
        for mu in [2.0, 3.0, 5.0] {
            let a = p.j_max_susy(Complex64::new(mu, 0.0)).unwrap();
            let b = p.j_max_susy_q(mu).unwrap();
            assert!(a.im.abs() < 1e-14);
            assert!(((a.re - b) / b).abs() < 1e-10, "mu={mu}: {} vs {b}", a.re);
        }
        let (c, b) = cb_p2(2.0 * PI);
        assert!((c - 9.0 / (8.0 * PI * PI)).abs() < 1e-15 && (b - 0.125).abs() < 1e-15);
        let mu = 25.0;
        let j = p.grand_potential(mu, 2.0 * PI, 1).unwrap();
        assert!((j - (c * mu.powi(3) / 3.0 + b * mu + p.a_2pi)).abs() < 1e-10);
        let np = |mu: f64| p.grand_potential(mu, 2.0 * PI, 1).unwrap() - c * mu.powi(3) / 3.0 - b * mu - p.a_2pi;
        // e^{3μ} J_np is quadratic in μ up to e^{−3μ} corrections
        let g: Vec<f64> = (4..8).map(|m| np(m as f64) * (3.0 * m as f64).exp()).collect();
        let d3 = g[3] - 3.0 * g[2] + 3.0 * g[1] - g[0];
        assert!(d3.abs() < 1e-2 * g[3].abs(), "{g:?}");
    }

    #[test]
    fn hmo_poles_cancel() {
        let t = BpsTable::local_p2();
        let eps = [1e-2, 1e-3, 1e-4];
        for target in [2.0 * PI, PI] {
            let r = hmo_cancellation_check(&t, target, 1, 9.0, &eps).unwrap();
            assert!(!r.generic);
            assert!(r.piece_growth().iter().all(|g| *g > 10.0));
            let d = r.combined_differences();
            assert!(d[1] < d[0] / 10.0, "{d:?}");
            assert!(d[0] < 10.0 * eps[0]);
        }
        let r = hmo_cancellation_check(&t, 2.7, 1, 9.0, &eps).unwrap();
        assert!(r.generic && r.wkb_plus.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn shifted_hbar_reduction() {
        let h = ShiftedHbar { r: 2.0, eps: 1e-9 };
        let (s, c) = h.sin_cos_mul(0.5);
        assert!((s + 5e-10).abs() < 1e-24 && (c + 1.0).abs() < 1e-15);
        let (s, _) = h.sin_cos_inv(2.0);
        let direct = (2.0 * PI * PI / h.value()).sin();
        assert!((s - direct).abs() < 1e-15);
    }
}
