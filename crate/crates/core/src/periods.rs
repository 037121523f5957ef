//! Local P² periods at large radius, the exact quantization condition at
//! ħ = 2π, the mirror map, genus-zero and genus-one free energies, and the
//! conifold value of the mirror map.
//!
//! Conventions: z is the complex modulus, t = −ϖ₁(z) = −log z − ϖ̃₁(z),
//! Q = e^{−t}, and ∂F₀/∂t = ϖ₂/6 = t²/6 + (ϖ̃₂ − ϖ̃₁²)/6.

use crate::dd::{rational_to_dd, Dd};
use crate::error::{Error, Result};
use crate::series::{ps_exp, ps_mul, ps_revert, Coeff, LogSeries, TruncatedSeries};
use crate::specfun::bloch_wigner;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use std::f64::consts::PI;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact coefficients of ϖ̃₁ and ϖ̃₂ through z^J:
/// ϖ̃₁ = Σ 3(3j−1)!/(j!)³ (−z)^j, ϖ̃₂ = Σ 18(3j−1)!/(j!)³ (H_{3j−1} − H_j)(−z)^j.
pub fn periods_exact(order: usize) -> (TruncatedSeries<BigRational>, TruncatedSeries<BigRational>) {
    let mut w1 = vec![BigRational::zero(); order + 1];
    let mut w2 = vec![BigRational::zero(); order + 1];
    // r_j = (3j−1)!/(j!)³ and h_j = H_{3j−1} − H_j
    let mut r = rat(2, 1);
    let mut h = rat(1, 2);
    for j in 1..=order {
        let sign = if j % 2 == 1 { -1 } else { 1 };
        w1[j] = r.clone() * rat(3 * sign, 1);
        w2[j] = r.clone() * h.clone() * rat(18 * sign, 1);
        let jj = j as i64;
        r = r * rat(3 * jj * (3 * jj + 1) * (3 * jj + 2), (jj + 1).pow(3));
        h = h + rat(1, 3 * jj) + rat(1, 3 * jj + 1) + rat(1, 3 * jj + 2) - rat(1, jj + 1);
    }
    (TruncatedSeries::new("z", w1), TruncatedSeries::new("z", w2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodData {
    pub order: usize,
    pub varpi1_tilde: TruncatedSeries<Dd>,
    pub varpi2_tilde: TruncatedSeries<Dd>,
    pub exact: (TruncatedSeries<BigRational>, TruncatedSeries<BigRational>),
}

pub fn periods(order: usize) -> Result<PeriodData> {
    if order == 0 {
        return Err(Error::Invalid("period order must be at least 1".into()));
    }
    let (a, b) = periods_exact(order);
    Ok(PeriodData {
        order,
        varpi1_tilde: a.map(rational_to_dd),
        varpi2_tilde: b.map(rational_to_dd),
        exact: (a, b),
    })
}

impl PeriodData {
    /// ϖ₁ = log z + ϖ̃₁ and ϖ₂ = log²z + 2ϖ̃₁ log z + ϖ̃₂ as log-sector series.
    pub fn log_series(&self) -> (LogSeries<BigRational>, LogSeries<BigRational>) {
        let (a, b) = &self.exact;
        let n = self.order;
        let one = TruncatedSeries::one("z", n);
        let zero = TruncatedSeries::zero("z", n);
        (
            LogSeries::new(a.clone(), one.clone(), zero),
            LogSeries::new(b.clone(), a.scale(&rat(2, 1)), one),
        )
    }
}

/// θ³ + 3z(3θ+2)(3θ+1)θ applied to a log-sector series (the sign that
/// annihilates the alternating (−z)^j series).
pub fn picard_fuchs(s: &LogSeries<BigRational>) -> Result<LogSeries<BigRational>> {
    let t1 = s.theta();
    let t2 = t1.theta();
    let t3 = t2.theta();
    // (3θ+2)(3θ+1)θ = 9θ³ + 9θ² + 2θ
    let inner = LogSeries::new(
        lin(&t3.sectors[0], &t2.sectors[0], &t1.sectors[0])?,
        lin(&t3.sectors[1], &t2.sectors[1], &t1.sectors[1])?,
        lin(&t3.sectors[2], &t2.sectors[2], &t1.sectors[2])?,
    );
    let shifted = LogSeries::new(
        inner.sectors[0].shift_up(1).scale(&rat(3, 1)),
        inner.sectors[1].shift_up(1).scale(&rat(3, 1)),
        inner.sectors[2].shift_up(1).scale(&rat(3, 1)),
    );
    t3.add(&shifted)
}

fn lin(
    a: &TruncatedSeries<BigRational>,
    b: &TruncatedSeries<BigRational>,
    c: &TruncatedSeries<BigRational>,
) -> Result<TruncatedSeries<BigRational>> {
    a.scale(&rat(9, 1)).add(&b.scale(&rat(9, 1)))?.add(&c.scale(&rat(2, 1)))
}

/// ϖ₁, θϖ₁, ϖ₂, θϖ₂ at real 0 < z < 1/27, in double-double.
fn period_values(z: Dd, pd: &PeriodData) -> (Dd, Dd, Dd, Dd) {
    let lz = z.ln();
    let w1t = pd.varpi1_tilde.eval(&z);
    let w2t = pd.varpi2_tilde.eval(&z);
    let tw1t = pd.varpi1_tilde.theta().eval(&z);
    let tw2t = pd.varpi2_tilde.theta().eval(&z);
    let w1 = lz + w1t;
    let tw1 = Dd::ONE + tw1t;
    let w2 = lz * lz + w1t * lz * 2.0 + w2t;
    let tw2 = lz * 2.0 + tw1t * lz * 2.0 + w1t * 2.0 + tw2t;
    (w1, tw1, w2, tw2)
}

fn check_disk(z: f64) -> Result<()> {
    if !(z.abs() < 1.0 / 27.0) {
        return Err(Error::OutOfDisk { z });
    }
    Ok(())
}

/// ξ(E) = (ϖ₁ϖ₂′ − ϖ₂ϖ₁′)/(8π²ϖ₁′) at z = e^{−3E}.
pub fn xi_of_e(e: f64, pd: &PeriodData) -> Result<f64> {
    let z = Dd::from_f64(-3.0 * e).exp();
    check_disk(z.to_f64())?;
    let (w1, tw1, w2, tw2) = period_values(z, pd);
    let pi = crate::dd::PI;
    Ok(((w1 * tw2 - w2 * tw1) / (tw1 * pi * pi * 8.0)).to_f64())
}

/// Root of ξ(E) − 1/4 = n + 1/2: bracketing and bisection, then a Newton polish.
pub fn qc_energy(n: u32, pd: &PeriodData) -> Result<f64> {
    let target = n as f64 + 0.75;
    let f = |e: f64| xi_of_e(e, pd).map(|x| x - target);
    let emin = 27f64.ln() / 3.0 + 1e-9;
    let guess = (8.0 * PI * PI * target / 9.0).sqrt();
    let mut lo = (guess - 1.0).max(emin);
    let mut hi = guess + 1.0;
    if f(lo)? > 0.0 {
        return Err(Error::OutOfDisk { z: (-3.0 * lo).exp() });
    }
    while f(hi)? < 0.0 {
        hi += 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..3 {
        let h = 1e-6;
        let d = (f(e + h)? - f(e - h)?) / (2.0 * h);
        let step = f(e)? / d;
        e -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    Ok(e)
}

/// z(Q) by reverting Q(z) = z e^{ϖ̃₁(z)}.
pub fn mirror_map_inverse<T: Coeff>(w1: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>> {
    let q_of_z = ps_exp(w1)?.shift_up(1);
    Ok(ps_revert(&q_of_z)?.relabel("Q"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyData<T> {
    /// c_d in F₀ = t³/18 + Σ c_d Q^d.
    pub f0_instanton: TruncatedSeries<T>,
    /// ∂F₀/∂t − t²/6 as a series in z.
    pub df0_z: TruncatedSeries<T>,
    /// F₀ − t³/18 as a series in z.
    pub f0inst_z: TruncatedSeries<T>,
    /// θϖ̃₁.
    pub theta_w1: TruncatedSeries<T>,
    pub w1: TruncatedSeries<T>,
}

/// Genus-zero data from the period series (any coefficient field).
pub fn f0_series<T: Coeff>(w1: &TruncatedSeries<T>, w2: &TruncatedSeries<T>) -> Result<FreeEnergyData<T>> {
    let n = w1.order().min(w2.order());
    if n < 3 {
        return Err(Error::Invalid("F0 needs series order at least 3".into()));
    }
    let (w1, w2) = (w1.truncate(n), w2.truncate(n));
    let six = T::from_int(6);
    let df0_z = w2.sub(&ps_mul(&w1, &w1)?)?.scale(&(T::one() / six));
    let theta_w1 = w1.theta();
    // dF0inst/dz = −f1 (1 + θϖ̃₁)/z
    let prod = ps_mul(&df0_z, &TruncatedSeries::one("z", n).add(&theta_w1)?)?;
    let mut inst = vec![T::zero(); n + 1];
    for (k, slot) in inst.iter_mut().enumerate().skip(1) {
        *slot = -(prod.coeff(k) / T::from_int(k as i64));
    }
    let f0inst_z = TruncatedSeries::new("z", inst);
    let zq = mirror_map_inverse(&w1)?;
    let g = df0_z.relabel("Q").compose(&zq)?;
    let mut c = vec![T::zero(); n + 1];
    for (d, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = -(g.coeff(d) / T::from_int(d as i64));
    }
    Ok(FreeEnergyData {
        f0_instanton: TruncatedSeries::new("Q", c),
        df0_z,
        f0inst_z,
        theta_w1,
        w1,
    })
}

/// Values of F₀, ∂_tF₀, ∂²_tF₀ at a (complex) point z with a chosen t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenusZeroValues {
    pub f0: Complex64,
    pub df0: Complex64,
    pub d2f0: Complex64,
    pub w1: Complex64,
    pub theta_w1: Complex64,
}

impl<T: Coeff> FreeEnergyData<T> {
    /// t must be the branch of −log z − ϖ̃₁(z) the caller wants.
    pub fn eval_z(&self, z: Complex64, t: Complex64) -> GenusZeroValues {
        let w1 = self.w1.eval_c64(z);
        let tw1 = self.theta_w1.eval_c64(z);
        let f1 = self.df0_z.eval_c64(z);
        let tf1 = self.df0_z.theta().eval_c64(z);
        let inst = self.f0inst_z.eval_c64(z);
        GenusZeroValues {
            f0: t * t * t / 18.0 + inst,
            df0: t * t / 6.0 + f1,
            d2f0: t / 3.0 - tf1 / (1.0 + tw1),
            w1,
            theta_w1: tw1,
        }
    }
}

/// z-dependent parts of the genus-one free energies: F₁ = t/12 + h₁, F₁^NS = −t/24 + h₂.
pub fn genus_one_parts(z: Complex64, w1: Complex64, theta_w1: Complex64) -> (Complex64, Complex64) {
    let l27 = (1.0 + 27.0 * z).ln();
    let h1 = w1 / 12.0 - 0.5 * (1.0 + theta_w1).ln() - l27 / 12.0;
    let h2 = -w1 / 24.0 - l27 / 24.0;
    (h1, h2)
}

/// (F₁, F₁^NS) at real z with 1 + 27z > 0, using t = −log|z| − ϖ̃₁(z).
pub fn genus_one(z: f64, pd: &PeriodData) -> Result<(f64, f64)> {
    if !(1.0 + 27.0 * z > 0.0) {
        return Err(Error::Pole(format!(
            "conifold singularity: 1 + 27z = {}",
            1.0 + 27.0 * z
        )));
    }
    if z == 0.0 || z >= 1.0 / 27.0 {
        return Err(Error::OutOfDisk { z });
    }
    let zc = Complex64::new(z, 0.0);
    let w1 = pd.varpi1_tilde.eval_c64(zc);
    let tw1 = pd.varpi1_tilde.theta().eval_c64(zc);
    let t = -z.abs().ln() - w1.re;
    let (h1, h2) = genus_one_parts(zc, w1, tw1);
    Ok((t / 12.0 + h1.re, -t / 24.0 + h2.re))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConifoldValue {
    pub series: f64,
    pub bloch_wigner: f64,
    pub error_estimate: f64,
}

/// t_c = log 27 − ϖ̃₁(−1/27) against (9/π) D(e^{iπ/3}). At z = −1/27 the
/// terms are positive and fall off like j^{−2}, so the partial sums have a
/// tail expansion in integer powers of 1/N; Richardson on N = 2^k removes it.
pub fn conifold_t() -> Result<ConifoldValue> {
    let levels = 8;
    let mut partial = Vec::with_capacity(levels);
    let mut a = Dd::from_f64(6.0) / 27.0;
    let mut s = Dd::ZERO;
    let mut next = 128usize;
    let mut j = 1usize;
    while partial.len() < levels {
        s += a;
        if j == next {
            partial.push(s);
            next *= 2;
        }
        let jf = j as f64;
        a = a * ((3.0 * jf + 2.0) * (3.0 * jf + 1.0) * 3.0 * jf) / ((jf + 1.0).powi(3) * 27.0);
        j += 1;
    }
    let mut table = partial;
    let mut best = table[table.len() - 1];
    let mut err = f64::INFINITY;
    for k in 0..levels - 1 {
        let r = Dd::from_f64(0.5).powi(k as i32 + 1);
        table = table.windows(2).map(|w| (w[1] - r * w[0]) / (Dd::ONE - r)).collect();
        let cand = table[table.len() - 1];
        let e = (cand - best).abs().to_f64();
        best = cand;
        err = e;
        if e < 1e-15 {
            break;
        }
    }
    let series = (Dd::from_f64(27.0).ln() - best).to_f64();
    let bw = 9.0 / PI * bloch_wigner(Complex64::from_polar(1.0, PI / 3.0))?;
    if err > 1e-6 {
        return Err(Error::Numerical(format!(
            "conifold acceleration did not converge: estimate {series}, error {err:.2e}"
        )));
    }
    Ok(ConifoldValue {
        series,
        bloch_wigner: bw,
        error_estimate: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::digamma;

    #[test]
    fn period_coefficients() {
        let (a, b) = periods_exact(5);
        let want1 = [rat(-6, 1), rat(45, 1), rat(-560, 1), rat(17325, 2)];
        for (k, w) in want1.iter().enumerate() {
            assert_eq!(&a.coeff(k + 1), w);
        }
        assert_eq!(b.coeff(1), rat(-18, 1));
        assert_eq!(b.coeff(2), rat(423, 2));
        assert_eq!(b.coeff(3), rat(-2972, 1));
        // against the digamma form 18/j! Γ(3j)/Γ(1+j)² (ψ(3j) − ψ(j+1)) (−1)^j
        for j in 1..=5usize {
            let g: f64 =
                (1..3 * j).map(|k| k as f64).product::<f64>() / (1..=j).map(|k| k as f64).product::<f64>().powi(3);
            let v = 18.0
                * g
                * (digamma(3.0 * j as f64).unwrap() - digamma(j as f64 + 1.0).unwrap())
                * if j % 2 == 1 { -1.0 } else { 1.0 };
            assert!((v / b.coeff(j).to_f64() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn picard_fuchs_annihilates() {
        let pd = periods(30).unwrap();
        let (w1, w2) = pd.log_series();
        for s in [&w1, &w2] {
            let r = picard_fuchs(s).unwrap();
            for sec in &r.sectors {
                for k in 0..30 {
                    assert!(sec.coeff(k).is_zero(), "order {k}");
                }
            }
        }
    }

    #[test]
    fn quantization_condition_reproduces_ground_state() {
        let pd = periods(60).unwrap();
        let e0 = qc_energy(0, &pd).unwrap();
        assert!((e0 - 2.5626420686238193708).abs() < 1e-12);
        assert!((xi_of_e(e0, &pd).unwrap() - 0.75).abs() < 1e-13);
        assert!(xi_of_e(1.0, &pd).is_err());
    }

    #[test]
    fn mirror_map_and_f0() {
        let pd = periods(8).unwrap();
        let zq = mirror_map_inverse(&pd.exact.0).unwrap();
        assert_eq!(zq.coeff(0), rat(0, 1));
        assert_eq!(zq.coeff(1), rat(1, 1));
        assert_eq!(zq.coeff(2), rat(6, 1));
        let fe = f0_series(&pd.exact.0, &pd.exact.1).unwrap();
        assert_eq!(fe.f0_instanton.coeff(1), rat(3, 1));
        assert_eq!(fe.f0_instanton.coeff(2), rat(-45, 8));
        assert_eq!(fe.f0_instanton.coeff(3), rat(244, 9));
    }

    #[test]
    fn genus_one_limits() {
        let pd = periods(60).unwrap();
        let (_, ns) = genus_one(1e-6, &pd).unwrap();
        assert!((ns + 0.5756).abs() < 1e-3);
        let (f1a, _) = genus_one(-1.0 / 27.0 + 1e-8, &pd).unwrap();
        let (f1b, _) = genus_one(-1.0 / 27.0 + 1e-12, &pd).unwrap();
        assert!(f1b.abs() > f1a.abs());
        assert!(genus_one(-0.05, &pd).is_err());
        assert!(genus_one(1e-3, &pd).unwrap().0.is_finite());
    }

    #[test]
    fn conifold_identity() {
        let c = conifold_t().unwrap();
        assert!((c.bloch_wigner - 2.907593524975055).abs() < 1e-12);
        assert!((c.series - c.bloch_wigner).abs() < 1e-6, "{c:?}");
    }
}
