//! Special functions: Airy, digamma, dilogarithm and Bloch–Wigner, ϑ₂,
//! and Faddeev's noncompact quantum dilogarithm.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use num_complex::Complex64;
use std::f64::consts::PI;

const AI0: Dd = Dd::from_parts_const(0.3550280538878172, 2.05233632436212e-17);
const AIP0: Dd = Dd::from_parts_const(-0.2588194037928068, 2.522243111610832e-17);

pub const ZETA3: f64 = 1.2020569031595942854;

/// Maclaurin series in double-double; used for |x| < 8.
fn airy_series(x: f64) -> (f64, f64) {
    let xd = Dd::from_f64(x);
    // a_{n+3} = a_n / ((n+2)(n+3)), a_0 = Ai(0), a_1 = Ai'(0), a_2 = 0
    let mut a = [AI0, AIP0, Dd::ZERO];
    let mut xn = [Dd::ONE, xd, xd * xd];
    let x3 = xd * xd * xd;
    let mut ai = Dd::ZERO;
    let mut dai = Dd::ZERO;
    let mut n = 0usize;
    loop {
        let mut largest: f64 = 0.0;
        for r in 0..3 {
            let k = n + r;
            let t = a[r] * xn[r];
            ai += t;
            if k > 0 {
                let d = a[r] * (k as f64) * xn[r] / xd;
                dai += d;
                largest = largest.max(d.abs().hi());
            }
            largest = largest.max(t.abs().hi());
        }
        if n > 6 && largest < 1e-34 * (1.0 + ai.abs().hi() + dai.abs().hi()) {
            break;
        }
        for r in 0..3 {
            let k = (n + r) as f64;
            a[r] = a[r] / ((k + 2.0) * (k + 3.0));
            xn[r] = xn[r] * x3;
        }
        n += 3;
        if n > 600 {
            break;
        }
    }
    if x == 0.0 {
        return (AI0.to_f64(), AIP0.to_f64());
    }
    (ai.to_f64(), dai.to_f64())
}

/// u_k and v_k of the Airy asymptotic expansions.
fn airy_uv(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

fn airy_asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = airy_uv(30);
    let ax = x.abs();
    let zeta = 2.0 / 3.0 * ax.powf(1.5);
    let q = ax.powf(0.25);
    if x > 0.0 {
        let (mut su, mut sv) = (0.0, 0.0);
        let mut p = 1.0;
        for k in 0..u.len() {
            let tu = u[k] * p;
            if k > 0 && tu.abs() > (u[k - 1] * p * zeta).abs() {
                break;
            }
            su += tu;
            sv += v[k] * p;
            if tu.abs() < 1e-17 {
                break;
            }
            p *= -1.0 / zeta;
        }
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e / q * su, -e * q * sv)
    } else {
        let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
        let mut p = 1.0;
        for k in 0..u.len() {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let tu = sign * u[k] * p;
            let tv = sign * v[k] * p;
            if k % 2 == 0 {
                pu += tu;
                pv += tv;
            } else {
                qu += tu;
                qv += tv;
            }
            if tu.abs() < 1e-17 {
                break;
            }
            p /= zeta;
        }
        let ph = zeta - PI / 4.0;
        let (s, c) = ph.sin_cos();
        let ai = (c * pu + s * qu) / (PI.sqrt() * q);
        let dai = q / PI.sqrt() * (s * pv - c * qv);
        (ai, dai)
    }
}

/// (Ai(x), Ai'(x)).
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x.abs() < 8.0 {
        airy_series(x)
    } else {
        airy_asymptotic(x)
    }
}

/// Ai(x), Ai'(x), …, Ai^{(n)}(x) from Ai^{(k+2)} = x Ai^{(k)} + k Ai^{(k−1)}.
pub fn airy_derivatives(x: f64, n: usize) -> Vec<f64> {
    let (a, da) = airy_ai(x);
    let mut out = vec![a, da];
    for k in 0..n.saturating_sub(1) {
        let prev = if k == 0 { 0.0 } else { out[k - 1] };
        out.push(x * out[k] + k as f64 * prev);
    }
    out.truncate(n + 1);
    out
}

pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma needs x > 0, got {x}")));
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 12.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    // B_{2k}/(2k) for k = 1..7
    let c = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut tail = 0.0;
    for ck in c.iter().rev() {
        tail = tail * r + ck;
    }
    Ok(acc + y.ln() - 0.5 / y - r * tail)
}

// B_0, B_2, B_4, …
const BERNOULLI_EVEN: [f64; 15] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
];

/// Dilogarithm Li₂(z) on the principal branch.
pub fn li2(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    if z == one {
        return Complex64::new(PI * PI / 6.0, 0.0);
    }
    if z.norm() > 1.0 {
        let l = (-z).ln();
        return -li2(one / z) - PI * PI / 6.0 - 0.5 * l * l;
    }
    if z.re > 0.5 {
        return -li2(one - z) + PI * PI / 6.0 - z.ln() * (one - z).ln();
    }
    // Σ B_n u^{n+1}/(n+1)! with u = −log(1−z), |u| < 2π here
    let u = -(one - z).ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = u;
    let mut fact = 1.0;
    for n in 0..60usize {
        fact *= (n + 1) as f64;
        let b = if n == 1 {
            -0.5
        } else if n % 2 == 1 {
            0.0
        } else if n / 2 < BERNOULLI_EVEN.len() {
            BERNOULLI_EVEN[n / 2]
        } else {
            bernoulli_even(n)
        };
        if b != 0.0 {
            let t = p * (b / fact);
            sum += t;
            if n > 4 && t.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        p *= u;
    }
    sum
}

fn bernoulli_even(n: usize) -> f64 {
    // |B_n| = 2 n! ζ(n) / (2π)^n
    let mut v = 2.0;
    for k in 1..=n {
        v *= k as f64 / (2.0 * PI);
    }
    let zeta: f64 = (1..40).map(|k| (k as f64).powi(-(n as i32))).sum();
    let sign = if (n / 2) % 2 == 1 { 1.0 } else { -1.0 };
    sign * v * zeta
}

/// Bloch–Wigner D(z) = Im Li₂(z) + arg(1−z) log|z|.
pub fn bloch_wigner(z: Complex64) -> Result<f64> {
    if z.norm() == 0.0 || (z - 1.0).norm() == 0.0 {
        return Err(Error::Domain("Bloch–Wigner is undefined at 0 and 1".into()));
    }
    Ok(li2(z).im + (Complex64::new(1.0, 0.0) - z).arg() * z.norm().ln())
}

/// ϑ₂(z, τ) = 2 Σ_{n≥0} q^{(n+1/2)²} cos((2n+1)πz), q = e^{iπτ}.
pub fn jacobi_theta2(z: Complex64, tau: Complex64) -> Result<Complex64> {
    theta_series(z, tau, 0.5)
}

/// ϑ₃(z, τ) = 1 + 2 Σ_{n≥1} q^{n²} cos(2nπz); used on the positive κ axis.
pub fn jacobi_theta3(z: Complex64, tau: Complex64) -> Result<Complex64> {
    theta_series(z, tau, 0.0)
}

fn theta_series(z: Complex64, tau: Complex64, shift: f64) -> Result<Complex64> {
    if !(tau.im > 0.0) {
        return Err(Error::Domain(format!("theta needs Im tau > 0, got {tau}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..10_000 {
        let k = n as f64 + shift;
        let w = if shift == 0.0 && n == 0 { 1.0 } else { 2.0 };
        let t = (i * PI * tau * k * k).exp() * (2.0 * PI * k * z).cos() * w;
        sum += t;
        if n > 0 && t.norm() <= 1e-16 * sum.norm().max(1e-300) && (i * PI * tau * k * k).exp().norm() < 1e-16 {
            break;
        }
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QdilogParams {
    pub b: f64,
}

impl QdilogParams {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Invalid(format!("b must be positive, got {b}")));
        }
        Ok(QdilogParams { b })
    }

    /// Half-width of the strip |Im z| < (b + 1/b)/2.
    pub fn strip(&self) -> f64 {
        0.5 * (self.b + 1.0 / self.b)
    }
}

/// log Φ_b(z) from
/// −(i/2)∫₀^∞ [sin(2zw)/(w sinh(bw) sinh(w/b)) − 2z/w²] dw + iπz²/2 + iπ(b² + b⁻²)/24.
pub fn log_faddeev_phi(z: Complex64, p: QdilogParams) -> Result<Complex64> {
    let b = p.b;
    let decay = 2.0 * (p.strip() - z.im.abs());
    if !(decay > 0.0) {
        return Err(Error::Domain(format!(
            "z = {z} lies outside the strip |Im z| < {}",
            p.strip()
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let b2 = b * b + 1.0 / (b * b);
    let b4 = b.powi(4) + b.powi(-4);
    let b6 = b.powi(6) + b.powi(-6);
    let z2 = z * z;
    let c0 = -z * (b2 + 4.0 * z2) / 3.0;
    let c2 = z * (7.0 * b4 + 40.0 * z2 * b2 + 48.0 * z2 * z2 + 10.0) / 180.0;
    let c4 = -z * (31.0 * b6 + 196.0 * z2 * b4 + 336.0 * z2 * z2 * b2 + 49.0 * b2 + 192.0 * z2 * z2 * z2 + 280.0 * z2)
        / 7560.0;
    let b8 = b.powi(8) + b.powi(-8);
    let b10 = b.powi(10) + b.powi(-10);
    let (z4, z6, z8) = (z2 * z2, z2 * z2 * z2, z2 * z2 * z2 * z2);
    let c6 = z
        * (381.0 * b8
            + 2480.0 * z2 * b6
            + 4704.0 * z4 * b4
            + 620.0 * b4
            + 3840.0 * z6 * b2
            + 3920.0 * z2 * b2
            + 1280.0 * z8
            + 6720.0 * z4
            + 686.0)
        / 907_200.0;
    let c8 = -z
        * (2555.0 * b10
            + 16764.0 * z2 * b8
            + 32736.0 * z4 * b6
            + 4191.0 * b6
            + 29568.0 * z6 * b4
            + 27280.0 * z2 * b4
            + 14080.0 * z8 * b2
            + 51744.0 * z4 * b2
            + 4774.0 * b2
            + 3072.0 * z8 * z2
            + 42240.0 * z6
            + 30184.0 * z2)
        / 59_875_200.0;
    // the expansion is in z·w
    let w0 = 0.03 / z.norm().max(1.0);
    let f = |w: f64| -> Complex64 {
        if w < w0 {
            let w2 = w * w;
            return c0 + w2 * (c2 + w2 * (c4 + w2 * (c6 + w2 * c8)));
        }
        let s = b + 1.0 / b;
        let den = (1.0 - (-2.0 * b * w).exp()) * (1.0 - (-2.0 * w / b).exp());
        let e1 = (2.0 * i * z * w - s * w).exp();
        let e2 = (-2.0 * i * z * w - s * w).exp();
        (e1 - e2) / (2.0 * i) * 4.0 / den / w - 2.0 * z / (w * w)
    };
    let wmax = (40.0 / decay).clamp(20.0, 4000.0);
    let mut pts = vec![0.0, w0, 0.5, 1.0, 2.0, 4.0, 8.0];
    let mut w = 16.0;
    while w < wmax {
        pts.push(w);
        w *= 2.0;
    }
    pts.push(wmax);
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-13,
        max_panels: 20_000,
    };
    let (val, _) = integrate(f, &pts, tol)?;
    let val = val - 2.0 * z / wmax;
    Ok(-0.5 * i * val + i * PI * z2 / 2.0 + i * PI * b2 / 24.0)
}

pub fn faddeev_phi(z: Complex64, p: QdilogParams) -> Result<Complex64> {
    Ok(log_faddeev_phi(z, p)?.exp())
}

/// ψ_{a,c}(x) = e^{2πax} / Φ_b(x − i(a + c)).
pub fn psi_ac(x: f64, a: f64, c: f64, p: QdilogParams) -> Result<Complex64> {
    let l = log_faddeev_phi(Complex64::new(x, -(a + c)), p)?;
    Ok((2.0 * PI * a * x - l).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn airy_values() {
        let (a0, d0) = airy_ai(0.0);
        assert!((a0 - 0.3550280538878172).abs() < 1e-16);
        assert!((d0 + 0.2588194037928068).abs() < 1e-16);
        assert!((airy_ai(1.0).0 - 0.13529241631288141552).abs() < 1e-15);
        assert!((airy_ai(-8.0).0 + 0.052705050356386202622).abs() < 1e-13);
        assert!((airy_ai(-10.0).0 - 0.040241238486443190689).abs() < 1e-13);
        assert!((airy_ai(8.0).0 - 4.6922076160992316256e-8).abs() < 1e-20);
        assert!((airy_ai(-8.0).1 - 0.93556093819830655103).abs() < 1e-12);
        assert!((airy_ai(8.0).1 + 1.3414392979067865743e-7).abs() < 1e-19);
        assert!((airy_ai(30.0).0 / 3.2082175915504955711e-49 - 1.0).abs() < 1e-13);
        assert!((airy_ai(58.0).0 / 1.3179250953357322523e-129 - 1.0).abs() < 1e-13);
        assert!(airy_ai(5.0).0 < airy_ai(1.0).0);
    }

    #[test]
    fn airy_series_meets_asymptotics() {
        for x in [-8.0f64, 8.0] {
            let (a, da) = airy_series(x);
            let (b, db) = airy_asymptotic(x);
            assert!((a - b).abs() < 1e-13 && (da - db).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn airy_derivative_recursion() {
        let d = airy_derivatives(1.5, 4);
        let (a, da) = airy_ai(1.5);
        assert_eq!(d[0], a);
        assert!((d[2] - 1.5 * a).abs() < 1e-16);
        assert!((d[3] - (a + 1.5 * da)).abs() < 1e-16);
        assert!((d[4] - (2.0 * da + 1.5 * 1.5 * a)).abs() < 1e-15);
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(3.0).unwrap() - digamma(2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((digamma(1.0).unwrap() + 0.57721566490153286061).abs() < 1e-14);
        assert!((digamma(6.0).unwrap() - digamma(1.0).unwrap() - 137.0 / 60.0).abs() < 1e-13);
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn dilog_values() {
        assert!((li2(c(0.5, 0.0)).re - (PI * PI / 12.0 - 0.5 * 2f64.ln().powi(2))).abs() < 1e-15);
        assert!((li2(c(-1.0, 0.0)).re + PI * PI / 12.0).abs() < 1e-15);
        let w = Complex64::from_polar(1.0, PI / 3.0);
        assert!((li2(w).im - 1.0149416064096536250).abs() < 1e-14);
        assert!((bloch_wigner(w).unwrap() - 1.0149416064096536250).abs() < 1e-14);
        assert!(bloch_wigner(c(0.4, 0.0)).unwrap().abs() < 1e-15);
        assert!(bloch_wigner(c(1.0, 0.0)).is_err());
        let z = c(0.3, 0.4);
        assert!((bloch_wigner(z.conj()).unwrap() + bloch_wigner(z).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn theta_values() {
        let t = jacobi_theta2(c(0.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((t.re - 0.91357913815611682141).abs() < 1e-15);
        assert!(jacobi_theta2(c(0.5, 0.0), c(0.1, 0.7)).unwrap().norm() < 1e-15);
        assert!(jacobi_theta2(c(0.0, 0.0), c(0.0, -1.0)).is_err());
    }

    #[test]
    fn faddeev_shift_and_unitarity() {
        let p = QdilogParams::new(1.0).unwrap();
        for x in [0.0, 0.5, 1.3] {
            assert!((faddeev_phi(c(x, 0.0), p).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let z = 0.2;
        let lhs = faddeev_phi(c(z, -0.5), p).unwrap();
        let rhs = faddeev_phi(c(z, 0.5), p).unwrap() * (1.0 + (2.0 * PI * z).exp());
        assert!((lhs / rhs - 1.0).norm() < 1e-10);
        let inv = |z: f64| {
            faddeev_phi(c(-z, 0.0), p).unwrap() * faddeev_phi(c(z, 0.0), p).unwrap() * c(0.0, -PI * z * z).exp()
        };
        assert!((inv(0.1) - inv(0.4)).norm() < 1e-10);
        assert!(faddeev_phi(c(0.0, 1.2), p).is_err());
    }

    #[test]
    fn faddeev_off_axis_oracle() {
        // independent arbitrary-precision quadrature of the same representation
        let cases = [
            (c(0.3, -0.2), 1.3, c(1.20852012803356747, 0.995590716642831557)),
            (c(-1.1, -0.6), 0.7, c(1.00195856135331223, -0.00348810712268635506)),
            (c(2.0, -1.0 / 3.0), 1.0, c(64.9415730243484114, 11.4511361818987701)),
        ];
        for (z, b, want) in cases {
            let got = faddeev_phi(z, QdilogParams::new(b).unwrap()).unwrap();
            assert!((got / want - 1.0).norm() < 1e-10, "{z} {b}: {got}");
        }
    }
}
