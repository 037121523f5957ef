//! Weyl quantization of a toric curve in the harmonic-oscillator basis.
//!
//! For an exponential e^{r𝗑 + s𝗒} with [𝗑, 𝗒] = iħ and oscillator scale σ,
//! write μ = (rσ + i sħ/σ)/√2 = |μ|e^{iθ}. Then
//! ⟨φ_i|e^{r𝗑+s𝗒}|φ_j⟩ = e^{|μ|²/2} m_ij e^{iθ(i−j)} with a positive
//! symmetric magnitude m_ij obeying a two-term recurrence. Everything is
//! computed in double-double: the matrices are strongly graded and rounding
//! the entries to double costs several digits in the low eigenvalues.

use crate::dd::{cdd, Cdd, Dd};
use crate::eigen::{hermitian_eigenvalues, HermitianDd};
use crate::error::{Error, Result};
use crate::toric::{build_operator_terms, OperatorTerm, ToricCurveSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_LADDER: [usize; 3] = [200, 300, 400];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Report the largest basis; error = |E(M_k) − E(M_{k−1})|.
    Finest,
    /// Richardson in 1/M through the whole ladder; error = |last two extrapolants|.
    Richardson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationConfig {
    pub hbar: f64,
    /// Basis sizes, increasing; the last one is the production size.
    pub ladder: Vec<usize>,
    /// Oscillator scale; `None` selects it variationally.
    pub sigma: Option<f64>,
    pub levels: usize,
    pub extrapolation: Extrapolation,
}

impl QuantizationConfig {
    pub fn new(hbar: f64) -> Self {
        QuantizationConfig {
            hbar,
            ladder: DEFAULT_LADDER.to_vec(),
            sigma: None,
            levels: 5,
            extrapolation: Extrapolation::Finest,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::Invalid("hbar must be positive".into()));
        }
        if self.ladder.is_empty() || self.ladder.iter().any(|&m| m < 20) {
            return Err(Error::Invalid("basis sizes must be at least 20".into()));
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("basis ladder must be strictly increasing".into()));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Invalid("sigma must be positive".into()));
            }
        }
        if self.levels == 0 || self.levels > self.ladder[0] / 2 {
            return Err(Error::Invalid(format!(
                "levels must be between 1 and {} for this ladder",
                self.ladder[0] / 2
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub errors: Vec<f64>,
    /// Raw E_n for each basis size in the ladder.
    pub per_size: Vec<Vec<f64>>,
    pub sigma: f64,
    pub config: QuantizationConfig,
}

struct TermFactors {
    coeff: Dd,
    modulus: Dd,
    cos: Dd,
    sin: Dd,
}

fn term_factors(term: &OperatorTerm, hbar: Dd, sigma: Dd) -> TermFactors {
    let a = sigma * term.r as f64;
    let b = hbar / sigma * term.s as f64;
    let modulus = ((a * a + b * b) * 0.5).sqrt();
    let (cos, sin) = if modulus.hi() == 0.0 {
        (Dd::ONE, Dd::ZERO)
    } else {
        let d = modulus * Dd::from_f64(2.0).sqrt();
        (a / d, b / d)
    };
    TermFactors {
        coeff: Dd::from_f64(term.coeff),
        modulus,
        cos,
        sin,
    }
}

/// Magnitudes m_ij for 0 ≤ j ≤ i < n (lower triangle, row-major).
fn magnitudes(modulus: Dd, n: usize) -> Vec<Vec<Dd>> {
    let sq: Vec<Dd> = (0..=n).map(|k| Dd::from_i64(k as i64).sqrt()).collect();
    let mut rows: Vec<Vec<Dd>> = Vec::with_capacity(n);
    rows.push(vec![Dd::ONE]);
    for i in 0..n.saturating_sub(1) {
        let mut next = Vec::with_capacity(i + 2);
        for j in 0..=i + 1 {
            let prev_same = if j <= i { rows[i][j] } else { next[i] };
            let prev_left = if j == 0 { Dd::ZERO } else { rows[i][j - 1] };
            next.push((sq[j] * prev_left + modulus * prev_same) / sq[i + 1]);
        }
        rows.push(next);
    }
    rows
}

fn phase_powers(cos: Dd, sin: Dd, n: usize) -> Vec<Cdd> {
    let step = cdd(cos, sin);
    let mut out = Vec::with_capacity(n);
    let mut cur = cdd(Dd::ONE, Dd::ZERO);
    for _ in 0..n {
        out.push(cur);
        cur = cur * step;
    }
    out
}

/// ⟨φ_i| c e^{r𝗑+s𝗒} |φ_j⟩.
pub fn ho_matrix_element(term: &OperatorTerm, i: usize, j: usize, hbar: f64, sigma: f64) -> Cdd {
    let f = term_factors(term, Dd::from_f64(hbar), Dd::from_f64(sigma));
    let n = i.max(j) + 1;
    let m = magnitudes(f.modulus, n);
    let mag = if i >= j { m[i][j] } else { m[j][i] };
    let gauss = (f.modulus * f.modulus * 0.5).exp();
    let (k, conj) = if i >= j { (i - j, false) } else { (j - i, true) };
    let p = phase_powers(f.cos, f.sin, k + 1)[k];
    let p = if conj { cdd(p.re, -p.im) } else { p };
    cdd(p.re * mag * gauss * f.coeff, p.im * mag * gauss * f.coeff)
}

/// M × M Hermitian matrix of the quantized curve.
pub fn build_truncated_matrix(spec: &ToricCurveSpec, hbar: f64, sigma: f64, size: usize) -> Result<HermitianDd> {
    spec.validate()?;
    let hb = Dd::from_f64(hbar);
    let sg = Dd::from_f64(sigma);
    let terms = build_operator_terms(spec);
    let parts: Vec<(Cdd, Vec<Vec<Dd>>, Vec<Cdd>)> = terms
        .par_iter()
        .map(|t| {
            let f = term_factors(t, hb, sg);
            let scale = (f.modulus * f.modulus * 0.5).exp() * f.coeff;
            (
                cdd(scale, Dd::ZERO),
                magnitudes(f.modulus, size),
                phase_powers(f.cos, f.sin, size),
            )
        })
        .collect();
    let mut m = HermitianDd::zeros(size);
    m.a.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            let (hi, lo, conj) = if i >= j { (i, j, false) } else { (j, i, true) };
            let mut acc = cdd(Dd::ZERO, Dd::ZERO);
            for (scale, mags, ph) in &parts {
                let p = ph[hi - lo];
                let v = cdd(p.re * mags[hi][lo] * scale.re, p.im * mags[hi][lo] * scale.re);
                acc = acc + v;
            }
            if i == j {
                acc.im = Dd::ZERO;
            }
            *slot = if conj { cdd(acc.re, -acc.im) } else { acc };
        }
    });
    Ok(m)
}

/// The `levels` lowest E_n = log λ_n at one basis size.
pub fn energies_at(spec: &ToricCurveSpec, hbar: f64, sigma: f64, size: usize, levels: usize) -> Result<Vec<f64>> {
    let m = build_truncated_matrix(spec, hbar, sigma, size)?;
    let ev = hermitian_eigenvalues(m);
    ev.iter()
        .take(levels)
        .enumerate()
        .map(|(n, l)| {
            if l.hi() <= 0.0 {
                Err(Error::Numerical(format!(
                    "eigenvalue {n} is not positive at M = {size}: truncation too small"
                )))
            } else {
                Ok(l.ln().to_f64())
            }
        })
        .collect()
}

/// Oscillator scale minimizing E₀ at a small basis (golden section in log σ).
pub fn select_sigma(spec: &ToricCurveSpec, hbar: f64) -> Result<f64> {
    let size = 40;
    let f = |ls: f64| energies_at(spec, hbar, ls.exp(), size, 1).map(|e| e[0]);
    let centre = hbar.sqrt().ln();
    let (mut a, mut b) = (centre - 2.0, centre + 2.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > 1e-3 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Polynomial extrapolation in 1/M to 1/M = 0 (Neville).
fn richardson(sizes: &[usize], vals: &[f64]) -> f64 {
    let h: Vec<f64> = sizes.iter().map(|&m| 1.0 / m as f64).collect();
    let mut p = vals.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (h[i] * p[i + 1] - h[i + k] * p[i]) / (h[i] - h[i + k]);
        }
    }
    p[0]
}

pub fn spectrum(spec: &ToricCurveSpec, cfg: &QuantizationConfig) -> Result<SpectrumResult> {
    cfg.validate()?;
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => select_sigma(spec, cfg.hbar)?,
    };
    let per_size = cfg
        .ladder
        .par_iter()
        .map(|&m| energies_at(spec, cfg.hbar, sigma, m, cfg.levels))
        .collect::<Result<Vec<_>>>()?;
    let k = per_size.len();
    let mut energies = Vec::with_capacity(cfg.levels);
    let mut errors = Vec::with_capacity(cfg.levels);
    for n in 0..cfg.levels {
        let col: Vec<f64> = per_size.iter().map(|r| r[n]).collect();
        let (val, err) = match cfg.extrapolation {
            Extrapolation::Finest => {
                let err = if k > 1 {
                    (col[k - 1] - col[k - 2]).abs()
                } else {
                    f64::NAN
                };
                (col[k - 1], err)
            }
            Extrapolation::Richardson => {
                let full = richardson(&cfg.ladder, &col);
                let err = if k > 1 {
                    (full - richardson(&cfg.ladder[..k - 1], &col[..k - 1])).abs()
                } else {
                    f64::NAN
                };
                (full, err)
            }
        };
        energies.push(val);
        errors.push(err);
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Numerical(
            "spectrum not strictly increasing; increase the basis".into(),
        ));
    }
    Ok(SpectrumResult {
        energies,
        errors,
        per_size,
        sigma,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Cdd, re: f64, im: f64, tol: f64) -> bool {
        (a.re.to_f64() - re).abs() < tol && (a.im.to_f64() - im).abs() < tol
    }

    #[test]
    fn ground_state_expectation() {
        let t = OperatorTerm { r: 1, s: 0, coeff: 1.0 };
        let s = 1.7f64;
        let v = ho_matrix_element(&t, 0, 0, 2.0 * PI, s);
        assert!(close(v, (s * s / 4.0).exp(), 0.0, 1e-14));
    }

    #[test]
    fn identity_term() {
        let t = OperatorTerm { r: 0, s: 0, coeff: 1.0 };
        for (i, j) in [(0, 0), (3, 3), (2, 5), (7, 1)] {
            let v = ho_matrix_element(&t, i, j, 2.0 * PI, 1.3);
            assert!(close(v, if i == j { 1.0 } else { 0.0 }, 0.0, 1e-15));
        }
    }

    #[test]
    fn hermitian_elements() {
        let t = OperatorTerm {
            r: -1,
            s: -1,
            coeff: 1.0,
        };
        let a = ho_matrix_element(&t, 3, 7, 2.0 * PI, 2.0);
        let b = ho_matrix_element(&t, 7, 3, 2.0 * PI, 2.0);
        assert!((a.re - b.re).abs().hi() < 1e-25 && (a.im + b.im).abs().hi() < 1e-25);
    }

    #[test]
    fn element_matches_position_space_integral() {
        // ⟨φ_1|e^{x}|φ_2⟩ against a Hermite-function quadrature at σ = 1.3
        let s = 1.3f64;
        let t = OperatorTerm { r: 1, s: 0, coeff: 1.0 };
        let phi = |n: usize, x: f64| {
            let u = x / s;
            let h = match n {
                1 => 2.0 * u,
                2 => 4.0 * u * u - 2.0,
                _ => unreachable!(),
            };
            let norm = (s * PI.sqrt() * (1u64 << n) as f64 * (1..=n).product::<usize>() as f64).sqrt();
            h * (-u * u / 2.0).exp() / norm
        };
        let (v, _) = crate::quad::integrate(
            |x: f64| phi(1, x) * x.exp() * phi(2, x),
            &[-30.0, 0.0, 30.0],
            crate::quad::Tolerance::default(),
        )
        .unwrap();
        let e = ho_matrix_element(&t, 1, 2, 2.0 * PI, s);
        assert!(close(e, v, 0.0, 1e-11), "{} vs {v}", e.re);
    }

    #[test]
    fn nested_blocks() {
        let p2 = ToricCurveSpec::p2();
        let a = build_truncated_matrix(&p2, 2.0 * PI, 2.2, 30).unwrap();
        let b = build_truncated_matrix(&p2, 2.0 * PI, 2.2, 50).unwrap();
        assert_eq!(a.a, b.leading(30).a);
        for i in 0..50 {
            assert!(b.get(i, i).re.hi() >= 3.0);
        }
    }

    #[test]
    fn richardson_exact_on_polynomials() {
        let sizes = [10, 20, 40];
        let vals: Vec<f64> = sizes
            .iter()
            .map(|&m| 2.0 + 3.0 / m as f64 - 5.0 / (m * m) as f64)
            .collect();
        assert!((richardson(&sizes, &vals) - 2.0).abs() < 1e-12);
    }
}
