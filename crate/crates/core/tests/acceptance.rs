//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any fails.

use mirror_spectra::enumerative::{
    exact_free_energy_coefficients, gv_from_gw, hmo_cancellation_check, BpsTable, LocalP2,
};
use mirror_spectra::fredholm::{airy_coeff_table_p2, fit_n32, fredholm_zeros, z_trace_airy, z_trace_contour};
use mirror_spectra::kernels::{fermionic_trace, kernel_params, trace_power};
use mirror_spectra::periods::{conifold_t, periods, qc_energy};
use mirror_spectra::quantizer::{spectrum, Extrapolation, QuantizationConfig};
use mirror_spectra::specfun::li2;
use mirror_spectra::toric::{classical_region_volume, tropical_volume_coeff_exact, ToricCurveSpec};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use num_traits::One;
use std::f64::consts::PI;
use std::time::Instant;

const REFERENCE_ENERGIES: [f64; 5] = [
    2.5626420686238194,
    3.9182131882998398,
    4.9117898237673361,
    5.7357370354215595,
    6.4553592284429990,
];

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn report(&mut self, k: u32, ok: bool, detail: String) {
        println!("{} criterion {k}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(k);
        }
    }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn main() {
    let mut g = Gate { failed: Vec::new() };
    let p2 = ToricCurveSpec::p2();

    // 1. operator spectrum
    let t0 = Instant::now();
    let spec = spectrum(&p2, &QuantizationConfig::new(2.0 * PI)).expect("spectrum");
    let secs = t0.elapsed().as_secs_f64();
    let dev1 = max_dev(&spec.energies, &REFERENCE_ENERGIES);
    let mut rich = QuantizationConfig::new(2.0 * PI);
    rich.extrapolation = Extrapolation::Richardson;
    let rich = spectrum(&p2, &rich).expect("spectrum");
    g.report(
        1,
        dev1 <= 1e-7 && secs <= 120.0,
        format!(
            "operator spectrum max|E - reference| = {dev1:.2e} (<= 1e-7) in {secs:.1} s (<= 120 s); Richardson variant {:.2e}",
            max_dev(&rich.energies, &REFERENCE_ENERGIES)
        ),
    );

    // 2. exact quantization condition
    let t0 = Instant::now();
    let pd = periods(60).expect("periods");
    let qc: Vec<f64> = (0..5).map(|n| qc_energy(n, &pd).expect("qc")).collect();
    let secs = t0.elapsed().as_secs_f64();
    let dev2 = max_dev(&qc, &REFERENCE_ENERGIES);
    g.report(
        2,
        dev2 <= 1e-10 && secs <= 1.0,
        format!("qc_energy max|E - reference| = {dev2:.2e} (<= 1e-10) in {secs:.3} s (<= 1 s)"),
    );

    // 3. three-way zeros
    let model = LocalP2::new(60).expect("model");
    let zeros = fredholm_zeros(2.0, 7.0, &model).expect("zeros");
    let dev3 = if zeros.len() == 5 {
        max_dev(&zeros, &qc)
            .max(max_dev(&zeros, &spec.energies))
            .max(max_dev(&qc, &spec.energies))
    } else {
        f64::INFINITY
    };
    g.report(
        3,
        dev3 <= 1e-7,
        format!(
            "{} Fredholm zeros on [2,7], max pairwise |dE| = {dev3:.2e} (<= 1e-7)",
            zeros.len()
        ),
    );

    // 4. fermionic traces three ways
    let gpm = airy_coeff_table_p2(60, &model).expect("airy table");
    let kp = kernel_params(1.0, 1.0, 2.0 * PI).expect("kernel");
    let exact = [1.0 / 9.0, 1.0 / (12.0 * 3f64.sqrt() * PI) - 1.0 / 81.0];
    let mut dev4: f64 = 0.0;
    let mut kernel_secs: f64 = 0.0;
    for n in 1..=2u32 {
        let a = z_trace_airy(n, &gpm).expect("airy").value;
        let c = z_trace_contour(n, 2.0, &model).expect("contour").value;
        let t0 = Instant::now();
        let k = fermionic_trace(n, &kp).expect("kernel").value;
        kernel_secs = kernel_secs.max(t0.elapsed().as_secs_f64());
        let e = exact[n as usize - 1];
        for v in [a, c, k] {
            dev4 = dev4.max((v - e).abs());
        }
        dev4 = dev4.max((a - c).abs()).max((a - k).abs()).max((c - k).abs());
    }
    g.report(
        4,
        dev4 <= 1e-6 && kernel_secs <= 300.0,
        format!("Z(1), Z(2) by Airy/contour/kernel, max deviation {dev4:.2e} (<= 1e-6); kernel {kernel_secs:.1} s (<= 300 s)"),
    );

    // 5. closed trace at (1, 1, 2π/3)
    let kp = kernel_params(1.0, 1.0, 2.0 * PI / 3.0).expect("kernel");
    let tr = trace_power(1, &kp).expect("trace").value;
    let v = 2.0 * li2(Complex64::from_polar(1.0, PI / 3.0)).im;
    let closed = (v / (2.0 * PI)).exp() / 3.0;
    let digits = (tr * 1e13).floor() as i64 == 4604521481728;
    g.report(
        5,
        (tr - closed).abs() <= 1e-8 && digits,
        format!(
            "Tr rho = {tr:.15}, |Tr rho - exp(V/2pi)/3| = {:.2e} (<= 1e-8), 13 digits match: {digits}",
            (tr - closed).abs()
        ),
    );

    // 6. conifold identity
    let cv = conifold_t().expect("conifold");
    let dev6 = (cv.series - cv.bloch_wigner).abs();
    g.report(
        6,
        dev6 <= 1e-6,
        format!("|t_c - (9/pi) D(e^(i pi/3))| = {dev6:.2e} (<= 1e-6)"),
    );

    // 7. tropical volume
    let c = tropical_volume_coeff_exact(&p2).expect("tropical");
    let ratio = classical_region_volume(&p2, 40.0).expect("volume") / 1600.0;
    g.report(
        7,
        c == Rational64::new(9, 2) && (ratio / 4.5 - 1.0).abs() <= 0.01,
        format!("C = {c} (exactly 9/2), vol(40)/40^2 = {ratio:.6} (within 1% of 4.5)"),
    );

    // 8. genus-zero data
    let (cd, _) = exact_free_energy_coefficients(6).expect("free energy");
    let f0_ok = cd[..3] == [r(3, 1), r(-45, 8), r(244, 9)];
    let n0 = gv_from_gw(&cd);
    let integral = n0.iter().all(|x| x.denom().is_one());
    let table = BpsTable::local_p2();
    let agrees = n0
        .iter()
        .enumerate()
        .all(|(i, x)| *x == BigRational::from_integer(BigInt::from(table.gv(0, i as u32 + 1))));
    let shown: Vec<String> = n0.iter().map(|x| x.to_string()).collect();
    g.report(
        8,
        f0_ok && integral && agrees,
        format!(
            "F0 coefficients (3, -45/8, 244/9) exact: {f0_ok}; n0(d <= 6) = [{}] integral: {integral}",
            shown.join(", ")
        ),
    );

    // 9. HMO cancellation
    let eps = [1e-2, 1e-3, 1e-4];
    let rep = hmo_cancellation_check(&table, 2.0 * PI, 1, 9.0, &eps).expect("hmo");
    let growth = rep.piece_growth();
    let diffs = rep.combined_differences();
    let min_growth = growth.iter().cloned().fold(f64::INFINITY, f64::min);
    let shrink = diffs[0] / diffs[1];
    g.report(
        9,
        min_growth >= 10.0 && shrink >= 10.0,
        format!("pieces grow x{min_growth:.1} per decade of eps (>= 10), combined differences {:.2e}, {:.2e} shrink x{shrink:.1} (>= 10)", diffs[0], diffs[1]),
    );

    // 10. N^{3/2} scaling
    let ns: Vec<u32> = (4..=10).collect();
    let zs: Vec<f64> = ns.iter().map(|&n| z_trace_airy(n, &gpm).expect("airy").value).collect();
    let a = fit_n32(&ns, &zs).expect("fit");
    let target = 4.0 * PI.sqrt() / 9.0 * (2.0 * PI).sqrt();
    let rel = (a / target - 1.0).abs();
    g.report(
        10,
        rel <= 0.05,
        format!("fitted N^(3/2) coefficient {a:.5} vs {target:.5}, relative {rel:.2e} (<= 5%)"),
    );

    if g.failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {:?}", g.failed);
        std::process::exit(1);
    }
}
