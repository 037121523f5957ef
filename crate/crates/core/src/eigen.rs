//! Eigenvalues of complex Hermitian matrices in double-double precision.
//!
//! Householder reduction to real tridiagonal form, eliminating columns from
//! the last one upward, then implicit-shift QL. The oscillator-basis matrices
//! are strongly graded (entries grow along the diagonal), and this
//! orientation keeps the small eigenvalues accurate.

use crate::dd::{cdd, cdd_conj, Cdd, Dd};
use num_traits::Zero;
use rayon::prelude::*;

/// Dense Hermitian matrix, row-major.
#[derive(Clone, Debug)]
pub struct HermitianDd {
    pub n: usize,
    pub a: Vec<Cdd>,
}

impl HermitianDd {
    pub fn zeros(n: usize) -> Self {
        HermitianDd {
            n,
            a: vec![Cdd::zero(); n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cdd {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cdd) {
        self.a[i * self.n + j] = v;
    }

    /// Leading k x k block.
    pub fn leading(&self, k: usize) -> HermitianDd {
        let mut m = HermitianDd::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }
}

fn hypot(a: Dd, b: Dd) -> Dd {
    let aa = a.abs();
    let bb = b.abs();
    let (big, small) = if aa > bb { (aa, bb) } else { (bb, aa) };
    if big.is_zero() {
        return Dd::ZERO;
    }
    let r = small / big;
    big * (r * r + 1.0).sqrt()
}

/// Reduce to real symmetric tridiagonal form (diagonal d, off-diagonal e).
pub fn tridiagonalize(mut m: HermitianDd) -> (Vec<Dd>, Vec<Dd>) {
    let n = m.n;
    let mut d = vec![Dd::ZERO; n];
    let mut e = vec![Dd::ZERO; n.saturating_sub(1)];
    if n == 0 {
        return (d, e);
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let col = i + 1;
        let alpha = m.get(i, col);
        let mut xnorm2 = Dd::ZERO;
        for k in 0..i {
            let x = m.get(k, col);
            xnorm2 += x.re * x.re + x.im * x.im;
        }
        let (beta, tau) = if xnorm2.is_zero() && alpha.im.is_zero() {
            (alpha.re, Cdd::zero())
        } else {
            let norm = (alpha.re * alpha.re + alpha.im * alpha.im + xnorm2).sqrt();
            let beta = if alpha.re.hi() >= 0.0 { -norm } else { norm };
            let tau = cdd((beta - alpha.re) / beta, -alpha.im / beta);
            let denom = alpha - cdd(beta, Dd::ZERO);
            let scale = Cdd::new(Dd::ONE, Dd::ZERO) / denom;
            for k in 0..i {
                let x = m.get(k, col);
                m.set(k, col, x * scale);
            }
            (beta, tau)
        };
        e[i] = beta;
        if !(tau.re.is_zero() && tau.im.is_zero()) {
            let len = i + 1;
            let mut v: Vec<Cdd> = (0..i).map(|k| m.get(k, col)).collect();
            v.push(Cdd::new(Dd::ONE, Dd::ZERO));
            // p = tau * A v on the leading block
            let mut p: Vec<Cdd> = (0..len)
                .into_par_iter()
                .map(|r| {
                    let row = &m.a[r * n..r * n + len];
                    let mut s = Cdd::zero();
                    for (a, vk) in row.iter().zip(v.iter()) {
                        s = s + *a * *vk;
                    }
                    tau * s
                })
                .collect();
            let mut dot = Cdd::zero();
            for k in 0..len {
                dot = dot + cdd_conj(p[k]) * v[k];
            }
            let half = Cdd::new(Dd::from_f64(-0.5), Dd::ZERO) * tau * dot;
            for k in 0..len {
                p[k] = p[k] + half * v[k];
            }
            // A -= v p^H + p v^H
            m.a.par_chunks_mut(n).take(len).enumerate().for_each(|(r, row)| {
                let vr = v[r];
                let pr = p[r];
                for c in 0..len {
                    row[c] = row[c] - vr * cdd_conj(p[c]) - pr * cdd_conj(v[c]);
                }
            });
        } else {
            let a = m.get(i, i);
            m.set(i, i, cdd(a.re, Dd::ZERO));
        }
        d[col] = m.get(col, col).re;
    }
    d[0] = m.get(0, 0).re;
    (d, e)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL, sorted ascending.
pub fn tridiagonal_eigenvalues(mut d: Vec<Dd>, e_in: Vec<Dd>) -> Vec<Dd> {
    let n = d.len();
    let mut e = e_in;
    e.push(Dd::ZERO);
    let eps = 1e-32;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let s = d[m].abs() + d[m + 1].abs();
                if e[m].abs().hi() <= eps * s.hi() {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] * 2.0);
            let mut r = hypot(g, Dd::ONE);
            let sr = if g.hi() >= 0.0 { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sr);
            let mut s = Dd::ONE;
            let mut c = Dd::ONE;
            let mut p = Dd::ZERO;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r.is_zero() {
                    d[i + 1] -= p;
                    e[m] = Dd::ZERO;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + c * b * 2.0;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = Dd::ZERO;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d
}

pub fn hermitian_eigenvalues(m: HermitianDd) -> Vec<Dd> {
    let (d, e) = tridiagonalize(m);
    tridiagonal_eigenvalues(d, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::dd;

    fn c(re: f64, im: f64) -> Cdd {
        cdd(dd(re), dd(im))
    }

    #[test]
    fn two_by_two() {
        // [[2, 1-i],[1+i, 3]] has eigenvalues (5 ± 3)/2
        let mut m = HermitianDd::zeros(2);
        m.set(0, 0, c(2.0, 0.0));
        m.set(0, 1, c(1.0, -1.0));
        m.set(1, 0, c(1.0, 1.0));
        m.set(1, 1, c(3.0, 0.0));
        let ev = hermitian_eigenvalues(m);
        assert!((ev[0] - 1.0).abs().hi() < 1e-30);
        assert!((ev[1] - 4.0).abs().hi() < 1e-30);
    }

    #[test]
    fn invariants_of_random_hermitian() {
        let n = 12;
        let mut m = HermitianDd::zeros(n);
        let mut seed = 7u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            m.set(i, i, c(rnd() * 4.0, 0.0));
            for j in 0..i {
                let v = c(rnd(), rnd());
                m.set(i, j, v);
                m.set(j, i, cdd_conj(v));
            }
        }
        let mut tr = Dd::ZERO;
        let mut fro = Dd::ZERO;
        for i in 0..n {
            tr += m.get(i, i).re;
            for j in 0..n {
                let v = m.get(i, j);
                fro += v.re * v.re + v.im * v.im;
            }
        }
        let ev = hermitian_eigenvalues(m);
        let s1 = ev.iter().fold(Dd::ZERO, |a, &x| a + x);
        let s2 = ev.iter().fold(Dd::ZERO, |a, &x| a + x * x);
        assert!((s1 - tr).abs().hi() < 1e-28);
        assert!((s2 - fro).abs().hi() < 1e-27);
    }

    #[test]
    fn diagonal_graded_matrix() {
        let n = 30;
        let mut m = HermitianDd::zeros(n);
        for i in 0..n {
            m.set(i, i, c(10f64.powi(i as i32), 0.0));
        }
        let ev = hermitian_eigenvalues(m);
        assert!((ev[0] - 1.0).abs().hi() < 1e-30);
        assert!((ev[n - 1] / 1e29 - 1.0).abs().hi() < 1e-28);
    }
}
