use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mirror_spectra::enumerative::{check_spin_sum, BpsTable, LocalP2};
use mirror_spectra::fredholm::{
    airy_coeff_table_p2, fredholm_zeros, xi_closed_form_p2, xi_positive_p2, z_trace_airy, z_trace_contour,
};
use mirror_spectra::kernels::{calibrate_c11, fermionic_trace, kernel_params, matrix_model_z, trace_power};
use mirror_spectra::periods::{periods, qc_energy};
use mirror_spectra::quantizer::{spectrum, Extrapolation, QuantizationConfig, DEFAULT_LADDER};
use mirror_spectra::toric::{
    bohr_sommerfeld_energy, classical_region_volume, parse_geometry, tropical_volume_coeff, ToricCurveSpec,
};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(
    name = "mspec",
    version,
    about = "Spectra of quantized mirror curves and their Fredholm determinants"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Omit the timestamp from the header (for golden files).
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct GeometryArgs {
    /// Built-in geometry: p2, f0, f1, f2, b2, b3 or p1mn:M,N.
    #[arg(long, conflicts_with = "geometry")]
    preset: Option<String>,
    /// Geometry file (key = value lines).
    #[arg(long)]
    geometry: Option<PathBuf>,
}

impl GeometryArgs {
    fn load(&self) -> Result<(ToricCurveSpec, String)> {
        match (&self.preset, &self.geometry) {
            (_, Some(path)) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Ok((parse_geometry(&text)?, path.display().to_string()))
            }
            (Some(name), None) => Ok((ToricCurveSpec::preset(name)?, name.clone())),
            (None, None) => Ok((ToricCurveSpec::preset("p2")?, "p2".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExtrapolationArg {
    Finest,
    Richardson,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Axis {
    Negative,
    Positive,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceKind {
    Power,
    Fermionic,
    Matrix,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ZMethod {
    Airy,
    Contour,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues of the quantized curve in a truncated oscillator basis.
    Spectrum {
        #[command(flatten)]
        geom: GeometryArgs,
        /// Planck constant: a number, or 2pi, pi, 2pi/3, ...
        #[arg(long, default_value = "2pi", value_parser = parse_hbar)]
        hbar: f64,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Basis sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
        /// Oscillator scale; selected variationally when absent.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, value_enum, default_value_t = ExtrapolationArg::Finest)]
        extrapolation: ExtrapolationArg,
    },
    /// Energies from the exact quantization condition of local P² at ħ = 2π.
    Qc {
        #[arg(long, default_value_t = 5)]
        levels: u32,
        /// Period series order.
        #[arg(long, default_value_t = 60)]
        order: usize,
    },
    /// Samples of the ħ = 2π Fredholm determinant of local P² on a κ grid.
    Xi {
        #[arg(long, default_value_t = 4.0)]
        kappa_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        kappa_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Ξ(−κ) (oscillating, zeros at κ = e^{E_n}) or Ξ(κ).
        #[arg(long, value_enum, default_value_t = Axis::Negative)]
        axis: Axis,
    },
    /// Classical phase-space volumes and Bohr–Sommerfeld energies.
    Volume {
        #[command(flatten)]
        geom: GeometryArgs,
        /// Energies at which to evaluate vol(E), comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        energies: Vec<f64>,
        #[arg(long, default_value = "2pi", value_parser = parse_hbar)]
        hbar: f64,
        /// Number of Bohr–Sommerfeld levels (0 to skip).
        #[arg(long, default_value_t = 5)]
        levels: u32,
    },
    /// Traces of the three-term kernel ρ_{m,n}.
    Trace {
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 1.0)]
        n: f64,
        #[arg(long, default_value = "2pi", value_parser = parse_hbar)]
        hbar: f64,
        #[arg(long, value_enum, default_value_t = TraceKind::Fermionic)]
        kind: TraceKind,
        /// Maximal power l or particle number N (at most 3).
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// Fermionic traces Z(N, 2π) of local P² from the grand potential.
    Ztrace {
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t = ZMethod::Both)]
        method: ZMethod,
        /// Real part of the contour anchor.
        #[arg(long, default_value_t = 2.0)]
        mu0: f64,
        /// Largest instanton order l in the Airy table.
        #[arg(long, default_value_t = 60)]
        cutoff: u32,
    },
    /// Load and validate a BPS table.
    ValidateBps {
        /// BPS file; the shipped local P² table when absent.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Agreement of the operator, quantization-condition and determinant routes for local P².
    Crosscheck {
        #[arg(long, default_value = "p2")]
        preset: String,
    },
}

/// Accepts plain numbers and `[k]pi[/d]` tokens such as 2pi, pi, 2pi/3.
fn parse_hbar(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(['*', ' '], "");
    let bad = || format!("cannot parse hbar '{s}' (examples: 2pi, pi, 2pi/3, 3.5)");
    if let Some((pre, post)) = t.split_once("pi") {
        let k: f64 = if pre.is_empty() {
            1.0
        } else {
            pre.parse().map_err(|_| bad())?
        };
        let d: f64 = match post.strip_prefix('/') {
            Some(d) => d.parse().map_err(|_| bad())?,
            None if post.is_empty() => 1.0,
            None => return Err(bad()),
        };
        if d == 0.0 {
            return Err(bad());
        }
        return Ok(k * PI / d);
    }
    t.parse().map_err(|_| bad())
}

enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
            Cell::Num(x) => format!("{x}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn int(i: impl Into<i64>) -> Cell {
    Cell::Int(i.into())
}

fn text(s: &str) -> Cell {
    Cell::Text(s.to_string())
}

struct Report {
    command: &'static str,
    config: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Report {
    fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Report {
            command,
            config: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format, timestamp: Option<u64>) -> String {
        match format {
            Format::Csv => {
                let mut s = format!("# mspec {}\n# command = {}\n", env!("CARGO_PKG_VERSION"), self.command);
                for (k, v) in &self.config {
                    s += &format!("# {k} = {v}\n");
                }
                if let Some(ts) = timestamp {
                    s += &format!("# timestamp_unix = {ts}\n");
                }
                s += &self.columns.join(",");
                s.push('\n');
                for r in &self.rows {
                    s += &r.iter().map(Cell::csv).collect::<Vec<_>>().join(",");
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), v.json()))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut top = json!({
                    "program": "mspec",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": self.command,
                    "config": config,
                    "columns": self.columns,
                    "rows": rows,
                });
                if let Some(ts) = timestamp {
                    top["timestamp_unix"] = json!(ts);
                }
                let mut s = serde_json::to_string_pretty(&top).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn run_spectrum(
    geom: &GeometryArgs,
    hbar: f64,
    levels: usize,
    ladder: &Option<Vec<usize>>,
    sigma: Option<f64>,
    extrapolation: ExtrapolationArg,
) -> Result<Report> {
    let (spec, source) = geom.load()?;
    let mut cfg = QuantizationConfig::new(hbar);
    cfg.levels = levels;
    cfg.sigma = sigma;
    if let Some(l) = ladder {
        cfg.ladder = l.clone();
    }
    cfg.extrapolation = match extrapolation {
        ExtrapolationArg::Finest => Extrapolation::Finest,
        ExtrapolationArg::Richardson => Extrapolation::Richardson,
    };
    let res = spectrum(&spec, &cfg)?;
    let mut r = Report::new("spectrum", &["n", "energy", "error"]);
    r.set("geometry", source);
    r.set("hbar", format!("{hbar:.16e}"));
    r.set(
        "ladder",
        cfg.ladder.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" "),
    );
    r.set("sigma", format!("{:.16e}", res.sigma));
    r.set("extrapolation", format!("{:?}", cfg.extrapolation).to_lowercase());
    for (n, (e, err)) in res.energies.iter().zip(&res.errors).enumerate() {
        r.push(vec![int(n as i64), num(*e), num(*err)]);
    }
    Ok(r)
}

fn run_qc(levels: u32, order: usize) -> Result<Report> {
    if order < 30 {
        bail!(mirror_spectra::Error::Invalid(
            "period order must be at least 30".into()
        ));
    }
    let pd = periods(order)?;
    let coarse = periods(order - 20)?;
    let mut r = Report::new("qc", &["n", "energy", "error"]);
    r.set("geometry", "local_p2");
    r.set("hbar", "2pi");
    r.set("order", order);
    r.set("error_estimate", "|E(order) - E(order - 20)| + 4 eps |E|");
    for n in 0..levels {
        let e = qc_energy(n, &pd)?;
        let e2 = qc_energy(n, &coarse)?;
        r.push(vec![int(n), num(e), num((e - e2).abs() + 4.0 * f64::EPSILON * e.abs())]);
    }
    Ok(r)
}

fn run_xi(kmin: f64, kmax: f64, points: usize, axis: Axis) -> Result<Report> {
    if !(kmin > 0.0 && kmax > kmin) || points < 2 {
        bail!(mirror_spectra::Error::Invalid(
            "need 0 < kappa-min < kappa-max and at least 2 points".into()
        ));
    }
    let fine = LocalP2::new(60)?;
    let coarse = LocalP2::new(40)?;
    let (gf, gc) = (airy_coeff_table_p2(60, &fine)?, airy_coeff_table_p2(39, &coarse)?);
    let eval = |k: f64, m: &LocalP2, g| -> Result<f64> {
        Ok(match axis {
            Axis::Negative => xi_closed_form_p2(k, m)?,
            Axis::Positive => xi_positive_p2(k, m, g)?,
        })
    };
    let mut r = Report::new("xi", &["kappa", "xi", "error"]);
    r.set("geometry", "local_p2");
    r.set("hbar", "2pi");
    r.set(
        "axis",
        if axis == Axis::Negative {
            "negative: Xi(-kappa)"
        } else {
            "positive: Xi(kappa)"
        },
    );
    r.set("error_estimate", "|period order 60 - period order 40| + 1e-14 |xi|");
    for i in 0..points {
        let k = kmin * (kmax / kmin).powf(i as f64 / (points - 1) as f64);
        let a = eval(k, &fine, &gf)?;
        let b = eval(k, &coarse, &gc)?;
        r.push(vec![num(k), num(a), num((a - b).abs() + 1e-14 * a.abs())]);
    }
    Ok(r)
}

fn run_volume(geom: &GeometryArgs, energies: &[f64], hbar: f64, levels: u32) -> Result<Report> {
    let (spec, source) = geom.load()?;
    let mut r = Report::new("volume", &["quantity", "x", "value", "error"]);
    r.set("geometry", source);
    r.set("hbar", format!("{hbar:.16e}"));
    r.set("volume_rel_tolerance", "1e-9");
    r.push(vec![
        text("tropical_coeff"),
        text(""),
        num(tropical_volume_coeff(&spec)?),
        num(0.0),
    ]);
    for &e in energies {
        let v = classical_region_volume(&spec, e)?;
        r.push(vec![text("volume"), num(e), num(v), num(1e-9 * v.abs())]);
    }
    for n in 0..levels {
        let bs = bohr_sommerfeld_energy(&spec, hbar, n)?;
        r.push(vec![
            text("bohr_sommerfeld"),
            int(n),
            num(bs.energy),
            num(1e-10 * bs.energy.abs().max(1.0)),
        ]);
        r.push(vec![
            text("bohr_sommerfeld_tropical"),
            int(n),
            num(bs.tropical),
            num(0.0),
        ]);
    }
    Ok(r)
}

fn run_trace(m: f64, n: f64, hbar: f64, kind: TraceKind, order: u32) -> Result<Report> {
    let kp = kernel_params(m, n, hbar)?;
    let mut r = Report::new("trace", &["quantity", "order", "value", "error"]);
    r.set("m", m);
    r.set("n", n);
    r.set("hbar", format!("{hbar:.16e}"));
    r.set("b", format!("{:.16e}", kp.b));
    for l in 1..=order {
        match kind {
            TraceKind::Power => {
                let t = trace_power(l, &kp)?;
                r.push(vec![text("tr_rho_power"), int(l), num(t.value), num(t.error)]);
            }
            TraceKind::Fermionic => {
                let t = fermionic_trace(l, &kp)?;
                r.push(vec![text("fermionic_trace"), int(l), num(t.value), num(t.error)]);
            }
            TraceKind::Matrix => {
                let c = calibrate_c11(&kp)?;
                let exact = kp.matrix_model_constant();
                if l == 1 {
                    r.set("c_calibrated", format!("{c:.16e}"));
                    r.set("c_exact", format!("{exact:.16e}"));
                }
                let z = matrix_model_z(l, &kp, c)?;
                let z_exact = matrix_model_z(l, &kp, exact)?;
                r.push(vec![text("matrix_model"), int(l), num(z), num((z - z_exact).abs())]);
            }
        }
    }
    Ok(r)
}

fn run_ztrace(n_max: u32, method: ZMethod, mu0: f64, cutoff: u32) -> Result<Report> {
    let model = LocalP2::new(60)?;
    let gpm = airy_coeff_table_p2(cutoff, &model)?;
    let mut r = Report::new("ztrace", &["N", "method", "value", "error"]);
    r.set("geometry", "local_p2");
    r.set("hbar", "2pi");
    r.set("mu0", mu0);
    r.set("airy_cutoff", cutoff);
    for n in 1..=n_max {
        if method != ZMethod::Contour {
            let t = z_trace_airy(n, &gpm)?;
            if !t.converged {
                eprintln!(
                    "warning: Airy sum for N = {n} did not reach its tolerance (tail {:.3e})",
                    t.error_estimate
                );
            }
            r.push(vec![int(n), text("airy"), num(t.value), num(t.error_estimate)]);
        }
        if method != ZMethod::Airy {
            let t = z_trace_contour(n, mu0, &model)?;
            r.push(vec![int(n), text("contour"), num(t.value), num(t.error_estimate)]);
        }
    }
    Ok(r)
}

fn run_validate_bps(file: &Option<PathBuf>) -> Result<Report> {
    let (table, source) = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            (BpsTable::parse(&text)?, p.display().to_string())
        }
        None => (BpsTable::local_p2(), "shipped local_p2".to_string()),
    };
    let mut r = Report::new("validate-bps", &["degree", "quantity", "value", "error"]);
    r.set("source", source);
    r.set("geometry", &table.geometry);
    r.set("bfield", table.bfield);
    r.set("complete_degree", table.complete_degree);
    r.set("refined_entries", table.refined.len());
    r.set("gv_entries", table.gv.len());
    r.set("spin_sum_tolerance", "1e-10");
    let qs = [(0.7, 0.3), (1.3, -1.1), (0.9, 2.0)];
    for d in table.refined_degrees() {
        let worst = qs
            .iter()
            .map(|&(rho, phi)| check_spin_sum(&table, d, Complex64::from_polar(rho, phi)))
            .fold(0.0, f64::max);
        r.push(vec![int(d), text("spin_sum_residual"), num(worst), num(1e-10)]);
    }
    Ok(r)
}

fn run_crosscheck(preset: &str) -> Result<Report> {
    if preset != "p2" {
        bail!(mirror_spectra::Error::Unsupported(format!(
            "crosscheck needs the closed-form determinant, available for p2 only (got '{preset}')"
        )));
    }
    let spec = ToricCurveSpec::preset("p2")?;
    let res = spectrum(&spec, &QuantizationConfig::new(2.0 * PI))?;
    let pd = periods(60)?;
    let model = LocalP2::new(60)?;
    let zeros = fredholm_zeros(2.0, 7.0, &model)?;
    let gpm = airy_coeff_table_p2(60, &model)?;
    let kp = kernel_params(1.0, 1.0, 2.0 * PI)?;

    let mut r = Report::new("crosscheck", &["quantity", "index", "route", "value", "error"]);
    r.set("geometry", "local_p2");
    r.set("hbar", "2pi");
    r.set(
        "ladder",
        DEFAULT_LADDER
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    let mut worst: f64 = 0.0;
    for n in 0..5u32 {
        let q = res.energies[n as usize];
        let c = qc_energy(n, &pd)?;
        let f = *zeros
            .get(n as usize)
            .ok_or_else(|| anyhow!("fewer than 5 determinant zeros in [2, 7]"))?;
        r.push(vec![
            text("energy"),
            int(n),
            text("quantizer"),
            num(q),
            num(res.errors[n as usize]),
        ]);
        r.push(vec![text("energy"), int(n), text("qc"), num(c), num(1e-12)]);
        r.push(vec![text("energy"), int(n), text("fredholm"), num(f), num(1e-12)]);
        let d = (q - c).abs().max((q - f).abs()).max((c - f).abs());
        worst = worst.max(d);
        r.push(vec![
            text("energy"),
            int(n),
            text("max_delta"),
            num(d),
            num(res.errors[n as usize]),
        ]);
    }
    for n in 1..=2u32 {
        let a = z_trace_airy(n, &gpm)?;
        let c = z_trace_contour(n, 2.0, &model)?;
        let k = fermionic_trace(n, &kp)?;
        r.push(vec![
            text("z_trace"),
            int(n),
            text("airy"),
            num(a.value),
            num(a.error_estimate),
        ]);
        r.push(vec![
            text("z_trace"),
            int(n),
            text("contour"),
            num(c.value),
            num(c.error_estimate),
        ]);
        r.push(vec![
            text("z_trace"),
            int(n),
            text("kernel"),
            num(k.value),
            num(k.error),
        ]);
        let d = (a.value - c.value)
            .abs()
            .max((a.value - k.value).abs())
            .max((c.value - k.value).abs());
        worst = worst.max(d);
        r.push(vec![text("z_trace"), int(n), text("max_delta"), num(d), num(k.error)]);
    }
    r.push(vec![text("max_delta"), text(""), text("all"), num(worst), num(0.0)]);
    r.set("agreement_tolerance", "1e-5");
    r.set("agreement", if worst < 1e-5 { "pass" } else { "fail" });
    Ok(r)
}

fn run(cli: &Cli) -> Result<()> {
    let report = match &cli.cmd {
        Cmd::Spectrum {
            geom,
            hbar,
            levels,
            ladder,
            sigma,
            extrapolation,
        } => run_spectrum(geom, *hbar, *levels, ladder, *sigma, *extrapolation)?,
        Cmd::Qc { levels, order } => run_qc(*levels, *order)?,
        Cmd::Xi {
            kappa_min,
            kappa_max,
            points,
            axis,
        } => run_xi(*kappa_min, *kappa_max, *points, *axis)?,
        Cmd::Volume {
            geom,
            energies,
            hbar,
            levels,
        } => run_volume(geom, energies, *hbar, *levels)?,
        Cmd::Trace {
            m,
            n,
            hbar,
            kind,
            order,
        } => run_trace(*m, *n, *hbar, *kind, *order)?,
        Cmd::Ztrace {
            n_max,
            method,
            mu0,
            cutoff,
        } => run_ztrace(*n_max, *method, *mu0, *cutoff)?,
        Cmd::ValidateBps { file } => run_validate_bps(file)?,
        Cmd::Crosscheck { preset } => run_crosscheck(preset)?,
    };
    let ts = if cli.out.no_timestamp {
        None
    } else {
        Some(
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        )
    };
    let text = report.render(cli.out.format, ts);
    match &cli.out.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<mirror_spectra::Error>() {
        Some(me) if me.is_input_error() => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_tokens() {
        assert_eq!(parse_hbar("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_hbar("pi").unwrap(), PI);
        assert_eq!(parse_hbar("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_hbar("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_hbar("1.5").unwrap(), 1.5);
        assert!(parse_hbar("2pix").is_err() && parse_hbar("pi/0").is_err() && parse_hbar("abc").is_err());
    }
}
