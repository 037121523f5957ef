//! Toric mirror curves O_S(x, y) = Σ c_i e^{ν_i·(x, y)}, their classical
//! regions {O_S ≤ e^E}, tropical volumes and Bohr–Sommerfeld estimates.

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct ToricCurveSpec {
    pub name: String,
    pub vertices: Vec<(i64, i64)>,
    /// e^{f_i(ξ)}, one per vertex.
    pub coefficients: Vec<f64>,
    pub mass_params: Vec<f64>,
    /// Optional charge matrix; carried as metadata only.
    pub charges: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorTerm {
    pub r: i64,
    pub s: i64,
    pub coeff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRegion<'a> {
    pub energy: f64,
    pub spec: &'a ToricCurveSpec,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BohrSommerfeld {
    pub energy: f64,
    pub tropical: f64,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut p = points.to_vec();
    p.sort();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl ToricCurveSpec {
    pub fn new(name: &str, vertices: Vec<(i64, i64)>, coefficients: Vec<f64>) -> Result<Self> {
        let spec = ToricCurveSpec {
            name: name.to_string(),
            vertices,
            coefficients,
            mass_params: Vec::new(),
            charges: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 3 {
            return Err(Error::Invalid(format!("{}: need at least 3 vertices", self.name)));
        }
        if self.coefficients.len() != self.vertices.len() {
            return Err(Error::Invalid(format!(
                "{}: {} vertices but {} coefficients",
                self.name,
                self.vertices.len(),
                self.coefficients.len()
            )));
        }
        if let Some(c) = self.coefficients.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::Invalid(format!(
                "{}: coefficient {c} is not positive",
                self.name
            )));
        }
        let hull = convex_hull(&self.vertices);
        let inside = hull.len() >= 3 && (0..hull.len()).all(|k| cross(hull[k], hull[(k + 1) % hull.len()], (0, 0)) > 0);
        if !inside {
            return Err(Error::Invalid(format!(
                "{}: origin is not strictly inside the convex hull of the vertices",
                self.name
            )));
        }
        Ok(())
    }

    pub fn p2() -> Self {
        Self::new("p2", vec![(1, 0), (0, 1), (-1, -1)], vec![1.0; 3]).unwrap()
    }

    pub fn f0(xi: f64) -> Result<Self> {
        let mut s = Self::new("f0", vec![(1, 0), (-1, 0), (0, 1), (0, -1)], vec![1.0, xi, 1.0, 1.0])?;
        s.mass_params = vec![xi];
        Ok(s)
    }

    pub fn f1(xi: f64) -> Result<Self> {
        let mut s = Self::new("f1", vec![(1, 0), (0, 1), (-1, -1), (-1, 0)], vec![1.0, 1.0, 1.0, xi])?;
        s.mass_params = vec![xi];
        Ok(s)
    }

    pub fn f2(xi: f64) -> Result<Self> {
        let mut s = Self::new("f2", vec![(1, 0), (0, 1), (-2, -1), (-1, 0)], vec![1.0, 1.0, 1.0, xi])?;
        s.mass_params = vec![xi];
        Ok(s)
    }

    pub fn b2(xi1: f64, xi2: f64) -> Result<Self> {
        let mut s = Self::new(
            "b2",
            vec![(1, 0), (0, 1), (-1, -1), (0, -1), (-1, 0)],
            vec![1.0, 1.0, 1.0, xi1, xi2],
        )?;
        s.mass_params = vec![xi1, xi2];
        Ok(s)
    }

    pub fn b3(xi1: f64, xi2: f64, xi3: f64) -> Result<Self> {
        let mut s = Self::new(
            "b3",
            vec![(1, 0), (0, 1), (-1, -1), (-1, 0), (0, -1), (1, 1)],
            vec![1.0, 1.0, 1.0, xi1, xi2, xi3],
        )?;
        s.mass_params = vec![xi1, xi2, xi3];
        Ok(s)
    }

    /// The three-term curve e^x + e^y + e^{-m x - n y}.
    pub fn three_term(m: i64, n: i64) -> Result<Self> {
        if m <= 0 || n <= 0 {
            return Err(Error::Invalid(format!(
                "three-term curve needs m, n > 0 (got {m}, {n})"
            )));
        }
        Self::new(&format!("p1{m}{n}"), vec![(1, 0), (0, 1), (-m, -n)], vec![1.0; 3])
    }

    /// Preset by name: p2, f0, f1, f2, b2, b3 (mass parameters 1), or p1mn:M,N.
    pub fn preset(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase();
        match key.as_str() {
            "p2" => Ok(Self::p2()),
            "f0" => Self::f0(1.0),
            "f1" => Self::f1(1.0),
            "f2" => Self::f2(1.0),
            "b2" => Self::b2(1.0, 1.0),
            "b3" => Self::b3(1.0, 1.0, 1.0),
            _ => {
                if let Some(rest) = key.strip_prefix("p1mn:") {
                    let parts: Vec<&str> = rest.split(',').collect();
                    if parts.len() == 2 {
                        if let (Ok(m), Ok(n)) = (parts[0].trim().parse(), parts[1].trim().parse()) {
                            return Self::three_term(m, n);
                        }
                    }
                }
                Err(Error::Invalid(format!("unknown geometry preset '{name}'")))
            }
        }
    }

    /// log O_S(x, y), evaluated stably.
    pub fn log_o(&self, x: f64, y: f64) -> f64 {
        let vals: Vec<f64> = self
            .vertices
            .iter()
            .zip(&self.coefficients)
            .map(|(&(r, s), c)| c.ln() + r as f64 * x + s as f64 * y)
            .collect();
        let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }

    fn weights(&self, x: f64, y: f64) -> Vec<f64> {
        let l = self.log_o(x, y);
        self.vertices
            .iter()
            .zip(&self.coefficients)
            .map(|(&(r, s), c)| (c.ln() + r as f64 * x + s as f64 * y - l).exp())
            .collect()
    }

    /// Minimum of log O_S over the plane and its location (damped Newton; log O_S is convex).
    pub fn min_log_o(&self) -> (f64, (f64, f64)) {
        let (mut x, mut y) = (0.0, 0.0);
        for _ in 0..100 {
            let w = self.weights(x, y);
            let (mut gx, mut gy) = (0.0, 0.0);
            let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
            for (&(r, s), wi) in self.vertices.iter().zip(&w) {
                let (r, s) = (r as f64, s as f64);
                gx += wi * r;
                gy += wi * s;
                hxx += wi * r * r;
                hxy += wi * r * s;
                hyy += wi * s * s;
            }
            hxx -= gx * gx;
            hxy -= gx * gy;
            hyy -= gy * gy;
            let det = hxx * hyy - hxy * hxy;
            if gx.hypot(gy) < 1e-15 || det <= 0.0 {
                break;
            }
            let dx = -(hyy * gx - hxy * gy) / det;
            let dy = -(hxx * gy - hxy * gx) / det;
            let f0 = self.log_o(x, y);
            let mut step = 1.0;
            while step > 1e-12 && self.log_o(x + step * dx, y + step * dy) > f0 {
                step *= 0.5;
            }
            x += step * dx;
            y += step * dy;
            if (step * dx).hypot(step * dy) < 1e-15 {
                break;
            }
        }
        (self.log_o(x, y), (x, y))
    }
}

pub fn build_operator_terms(spec: &ToricCurveSpec) -> Vec<OperatorTerm> {
    spec.vertices
        .iter()
        .zip(&spec.coefficients)
        .map(|(&(r, s), &coeff)| OperatorTerm { r, s, coeff })
        .collect()
}

/// Vertices of the polygon {(x, y): ν_i·(x, y) ≤ 1 for all i}, exactly.
pub fn tropical_polygon(spec: &ToricCurveSpec) -> Result<Vec<(Rational64, Rational64)>> {
    spec.validate()?;
    let bound = 2 * spec
        .vertices
        .iter()
        .map(|&(r, s)| r.abs().max(s.abs()))
        .max()
        .unwrap_or(1)
        + 1;
    let b = Rational64::from_integer(bound);
    let mut poly = vec![(-b, -b), (b, -b), (b, b), (-b, b)];
    for &(r, s) in &spec.vertices {
        let (r, s) = (Rational64::from_integer(r), Rational64::from_integer(s));
        let one = Rational64::from_integer(1);
        let val = |p: &(Rational64, Rational64)| r * p.0 + s * p.1 - one;
        let mut out = Vec::new();
        for k in 0..poly.len() {
            let p = poly[k];
            let q = poly[(k + 1) % poly.len()];
            let (vp, vq) = (val(&p), val(&q));
            if vp <= Rational64::zero() {
                out.push(p);
            }
            if (vp < Rational64::zero() && vq > Rational64::zero())
                || (vp > Rational64::zero() && vq < Rational64::zero())
            {
                let t = vp / (vp - vq);
                out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
        out.dedup();
        if out.len() > 1 && out.first() == out.last() {
            out.pop();
        }
        poly = out;
    }
    if poly.iter().any(|p| p.0.abs() == b || p.1.abs() == b) {
        return Err(Error::Invalid(format!("{}: tropical region is unbounded", spec.name)));
    }
    Ok(poly)
}

/// C in vol₀(E) ≈ C E²: the area of the tropical polygon at E = 1, exactly.
pub fn tropical_volume_coeff_exact(spec: &ToricCurveSpec) -> Result<Rational64> {
    let poly = tropical_polygon(spec)?;
    let mut twice = Rational64::zero();
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        twice += p.0 * q.1 - q.0 * p.1;
    }
    Ok(twice.abs() / Rational64::from_integer(2))
}

pub fn tropical_volume_coeff(spec: &ToricCurveSpec) -> Result<f64> {
    let c = tropical_volume_coeff_exact(spec)?;
    Ok(*c.numer() as f64 / *c.denom() as f64)
}

/// Minimizer of a convex function on the line (golden section after bracketing).
fn convex_min(f: &impl Fn(f64) -> f64, start: f64) -> (f64, f64) {
    let mut h = 1.0;
    let (mut a, mut b) = (start - h, start + h);
    while f(a) < f(start) && h < 1e6 {
        h *= 2.0;
        a = start - h;
    }
    h = 1.0;
    while f(b) < f(start) && h < 1e6 {
        h *= 2.0;
        b = start + h;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Crossing of a convex function with level `e` on the side of `dir` from its minimizer.
fn level_crossing(f: &impl Fn(f64) -> f64, xmin: f64, e: f64, dir: f64) -> f64 {
    let mut lo = xmin;
    let mut step = 1.0;
    let mut hi = xmin + dir * step;
    while f(hi) <= e {
        lo = hi;
        step *= 2.0;
        hi = xmin + dir * step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) <= e {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Area of R(E) = {O_S(x, y) ≤ e^E}. Each vertical slice is an interval
/// (log O_S is convex), so the area is a 1-D integral of the slice width.
pub fn classical_region_volume(spec: &ToricCurveSpec, energy: f64) -> Result<f64> {
    spec.validate()?;
    let (fmin, (x0, _)) = spec.min_log_o();
    if energy <= fmin {
        return Ok(0.0);
    }
    let slice = |x: f64| -> Option<(f64, f64)> {
        let g = |y: f64| spec.log_o(x, y);
        let (ym, gm) = convex_min(&g, 0.0);
        if gm >= energy {
            return None;
        }
        Some((
            level_crossing(&g, ym, energy, -1.0),
            level_crossing(&g, ym, energy, 1.0),
        ))
    };
    let h = |x: f64| convex_min(&|y: f64| spec.log_o(x, y), 0.0).1;
    let xl = level_crossing(&h, x0, energy, -1.0);
    let xr = level_crossing(&h, x0, energy, 1.0);
    let half = 0.5 * (xr - xl);
    let mid = 0.5 * (xr + xl);
    // x = mid - half cos θ removes the square-root behaviour at the ends
    let width = |th: f64| -> f64 {
        let x = mid - half * th.cos();
        match slice(x) {
            Some((a, b)) => (b - a) * half * th.sin(),
            None => 0.0,
        }
    };
    let tol = Tolerance {
        abs: 1e-12,
        rel: 1e-9,
        max_panels: 2000,
    };
    let (v, _) = integrate(width, &[0.0, 0.5 * PI, PI], tol)?;
    Ok(v)
}

/// Solves vol₀(E) = 2πħ(n + 1/2) by bisection; also returns √(2πħ(n+1/2)/C).
pub fn bohr_sommerfeld_energy(spec: &ToricCurveSpec, hbar: f64, n: u32) -> Result<BohrSommerfeld> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Invalid("hbar must be positive".into()));
    }
    let c = tropical_volume_coeff(spec)?;
    let target = 2.0 * PI * hbar * (n as f64 + 0.5);
    let tropical = (target / c).sqrt();
    let (fmin, _) = spec.min_log_o();
    let mut lo = fmin;
    let mut hi = fmin + tropical.max(1.0);
    while classical_region_volume(spec, hi)? < target {
        lo = hi;
        hi += tropical.max(1.0);
    }
    while hi - lo > 1e-10 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if classical_region_volume(spec, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BohrSommerfeld {
        energy: 0.5 * (lo + hi),
        tropical,
    })
}

/// Parses a geometry file:
///
/// ```text
/// # comment
/// name = p121
/// vertices = (1,0) (0,1) (-2,-1)
/// coefficients = 1 1 1
/// mass_params = 1.0            (optional)
/// charges = 1 1 1 ; 0 1 -1     (optional, rows separated by ';')
/// ```
pub fn parse_geometry(text: &str) -> Result<ToricCurveSpec> {
    let mut name = None;
    let mut vertices = None;
    let mut coefficients = None;
    let mut mass_params = Vec::new();
    let mut charges = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| Error::Parse { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(format!("expected 'key = value', got '{line}'")))?;
        let value = value.trim();
        match key.trim() {
            "name" => name = Some(value.to_string()),
            "vertices" => {
                let mut vs = Vec::new();
                for tok in value.split(')') {
                    let tok = tok.trim();
                    if tok.is_empty() {
                        continue;
                    }
                    let inner = tok
                        .strip_prefix('(')
                        .ok_or_else(|| perr(format!("bad vertex '{tok})'")))?;
                    let (a, b) = inner
                        .split_once(',')
                        .ok_or_else(|| perr(format!("bad vertex '({inner})'")))?;
                    let a: i64 = a
                        .trim()
                        .parse()
                        .map_err(|_| perr(format!("bad integer '{}'", a.trim())))?;
                    let b: i64 = b
                        .trim()
                        .parse()
                        .map_err(|_| perr(format!("bad integer '{}'", b.trim())))?;
                    vs.push((a, b));
                }
                vertices = Some(vs);
            }
            "coefficients" | "mass_params" => {
                let xs = value
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| perr(format!("bad number '{t}'"))))
                    .collect::<Result<Vec<_>>>()?;
                if key.trim() == "coefficients" {
                    coefficients = Some(xs);
                } else {
                    mass_params = xs;
                }
            }
            "charges" => {
                let rows = value
                    .split(';')
                    .map(|row| {
                        row.split_whitespace()
                            .map(|t| t.parse::<i64>().map_err(|_| perr(format!("bad integer '{t}'"))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                charges = Some(rows);
            }
            other => return Err(perr(format!("unknown key '{other}'"))),
        }
    }
    let missing = |f: &str| Error::Parse {
        line: 0,
        msg: format!("missing field '{f}'"),
    };
    let spec = ToricCurveSpec {
        name: name.ok_or_else(|| missing("name"))?,
        vertices: vertices.ok_or_else(|| missing("vertices"))?,
        coefficients: coefficients.ok_or_else(|| missing("coefficients"))?,
        mass_params,
        charges,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_presets() {
        let t = build_operator_terms(&ToricCurveSpec::p2());
        assert_eq!(
            t,
            vec![
                OperatorTerm { r: 1, s: 0, coeff: 1.0 },
                OperatorTerm { r: 0, s: 1, coeff: 1.0 },
                OperatorTerm {
                    r: -1,
                    s: -1,
                    coeff: 1.0
                }
            ]
        );
        let t = build_operator_terms(&ToricCurveSpec::three_term(2, 1).unwrap());
        assert_eq!(
            t[2],
            OperatorTerm {
                r: -2,
                s: -1,
                coeff: 1.0
            }
        );
        for name in ["p2", "f0", "f1", "f2", "b2", "b3", "p1mn:2,1"] {
            ToricCurveSpec::preset(name).unwrap();
        }
        assert!(ToricCurveSpec::preset("dp9").is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ToricCurveSpec::new("x", vec![(1, 0), (0, 1), (1, 1)], vec![1.0; 3]).is_err());
        assert!(ToricCurveSpec::new("x", vec![(1, 0), (0, 1), (-1, -1)], vec![1.0, -1.0, 1.0]).is_err());
        assert!(ToricCurveSpec::new("x", vec![(1, 0), (-1, 0)], vec![1.0; 2]).is_err());
    }

    #[test]
    fn tropical_coefficients() {
        assert_eq!(
            tropical_volume_coeff_exact(&ToricCurveSpec::p2()).unwrap(),
            Rational64::new(9, 2)
        );
        assert_eq!(
            tropical_volume_coeff_exact(&ToricCurveSpec::f0(1.0).unwrap()).unwrap(),
            Rational64::new(4, 1)
        );
    }

    #[test]
    fn minimum_of_p2() {
        let (m, (x, y)) = ToricCurveSpec::p2().min_log_o();
        assert!((m - 3f64.ln()).abs() < 1e-14);
        assert!(x.abs() < 1e-10 && y.abs() < 1e-10);
        assert_eq!(classical_region_volume(&ToricCurveSpec::p2(), 3f64.ln()).unwrap(), 0.0);
    }

    #[test]
    fn geometry_file_roundtrip() {
        let text = "# three-term\nname = p121\nvertices = (1,0) (0,1) (-2,-1)\ncoefficients = 1 1 1\n";
        let s = parse_geometry(text).unwrap();
        assert_eq!(
            s,
            ToricCurveSpec::three_term(2, 1)
                .map(|mut t| {
                    t.name = "p121".into();
                    t
                })
                .unwrap()
        );
        match parse_geometry("name = a\nvertices = (1,0) (0,x)\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
