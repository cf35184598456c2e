//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ... PASS|FAIL` line to the terminal.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use salem_patterns::corpus::bourgain_corpus;
use salem_patterns::experiment::ExperimentConfig;
use salem_patterns::fourier::{
    cell_averages, decompose, fourier_coeffs, random_band, sobolev_norm, FourierSeries,
};
use salem_patterns::grid::GridDensity;
use salem_patterns::measures::{cantor_measure, cantor_measure_native, CantorSpec, MeasureConditions};
use salem_patterns::oscillatory::{
    admissible_window, multiplier_quadrature_tol, nondegeneracy, nondegeneracy_fd, scale_setup,
    stationary_phase, top_coefficient, xi_for_critical_point, MultiplierTable, SP_ERROR_CONSTANT,
    SP_GAMMA0,
};
use salem_patterns::patterns::{find_configurations, nu_mass, IntervalSet, DEFAULT_BUDGET};
use salem_patterns::trilinear::{
    apply_t_fourier, bourgain_ratio, log2_slope, scale_scan, trilinear_fourier,
    trilinear_physical_trig, ScanParams, TrilinearReport, BOURGAIN_C0, BOURGAIN_SCALES,
};
use salem_patterns::Polynomial;

use common::{cantor_intervals, oracle_triples, OraclePoly};

// Criteria run one at a time so their wall-clock limits are meaningful.
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, name: &str, pass: bool, detail: String) {
    let line = format!(
        "criterion {n:>2} {name:<28} {}  {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    // Bypass the harness capture so the line shows for passing tests too.
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn t_plus_t3() -> Polynomial {
    Polynomial::parse("1:1, 1:3").unwrap()
}

fn cantor_product(k: i64, depth: u32) -> Complex64 {
    let h = 3f64.powi(-(depth as i32));
    let x = PI * k as f64 * h;
    let cell = if x == 0.0 { 1.0 } else { x.sin() / x };
    let mut c = Complex64::from_polar(cell, -x);
    for j in 1..=depth {
        let shift = 2.0 * 3f64.powi(-(j as i32));
        c *= (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, -2.0 * PI * k as f64 * shift)) / 2.0;
    }
    c
}

#[test]
fn criterion_01_cantor_fourier_oracle() {
    let _g = serial();
    let start = Instant::now();
    let mu = cantor_measure_native(&CantorSpec::middle_thirds(12)).unwrap();
    let s = fourier_coeffs(&mu, 512).unwrap();
    let worst = (-512..=512i64)
        .map(|k| (s.get(k) - cantor_product(k, 12)).norm())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "cantor fourier oracle",
        worst <= 1e-10 && secs < 10.0,
        format!("max |err| {worst:.2e} over |k| <= 512, {secs:.2} s"),
    );
}

#[test]
fn criterion_02_stationary_phase() {
    let _g = serial();
    let start = Instant::now();
    let polys = [Polynomial::parse("1:2").unwrap(), Polynomial::t_plus_t2(), t_plus_t3()];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_err = 0.0f64;
    let mut bound_fail = 0;
    let mut ratio_fail = Vec::new();
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    let mut total = 0;
    for p in &polys {
        for l in [2, 4] {
            for _ in 0..50 {
                let t_c = rng.random_range(1.25..=1.75);
                let mag = 10f64.powf(rng.random_range(3.0..=5.0));
                let eta = if rng.random_bool(0.5) { mag } else { -mag };
                let xi = xi_for_critical_point(t_c, eta, l, p);
                let sp = stationary_phase(xi, eta, l, p).unwrap();
                let q = multiplier_quadrature_tol(xi, eta, l, p, 1e-12);
                let err = (q.value - sp.leading).norm();
                worst_err = worst_err.max(err * eta.abs() / (SP_GAMMA0 * l as f64).exp2());
                if err > sp.error_bound {
                    bound_fail += 1;
                }
                if eta.abs() >= 1e4 {
                    total += 1;
                    let ratio = q.value.norm() * eta.abs().sqrt() / sp.amplitude.norm();
                    rmin = rmin.min(ratio);
                    rmax = rmax.max(ratio);
                    if !(0.8..=1.25).contains(&ratio) {
                        ratio_fail.push(format!("{p} l={l} t_c={t_c:.3} eta={eta:.2e} ratio={ratio:.3}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    for f in &ratio_fail {
        println!("  ratio outside [0.8, 1.25]: {f}");
    }
    report(
        2,
        "stationary phase",
        bound_fail == 0 && ratio_fail.is_empty() && secs < 60.0,
        format!(
            "constant {SP_ERROR_CONSTANT} (observed {worst_err:.3}), {bound_fail}/300 over bound, \
             ratio in [{rmin:.3}, {rmax:.3}], {}/{total} ratios outside, {secs:.1} s",
            ratio_fail.len()
        ),
    );
}

#[test]
fn criterion_03_side_agreement() {
    let _g = serial();
    let start = Instant::now();
    let p = Polynomial::t_plus_t2();
    let (k, l, level) = (128, 6, 14);
    let table = MultiplierTable::tabulate(&p, l, k);
    let mut worst = 0.0f64;
    for trio in 0..25u64 {
        let f = random_band(0, k + 1, k, 3 * trio + 1000);
        let g = random_band(0, k + 1, k, 3 * trio + 1001);
        let h = random_band(0, k + 1, k, 3 * trio + 1002);
        let phys = trilinear_physical_trig(&f, &g, &h, l, &p, level).unwrap();
        let four = trilinear_fourier(&f, &g, &h, &table).unwrap();
        worst = worst.max((phys - four).norm() / four.norm());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        3,
        "side agreement",
        worst <= 1e-6 && secs < 120.0,
        format!("max relative gap {worst:.2e} over 25 trios, {secs:.1} s"),
    );
}

#[test]
fn criterion_04_bourgain_lower_bound() {
    let _g = serial();
    let min_of = |id: u64| {
        bourgain_corpus(id, 200, 12)
            .unwrap()
            .iter()
            .map(|f| bourgain_ratio(f, &BOURGAIN_SCALES).unwrap())
            .fold(f64::INFINITY, f64::min)
    };
    let (m1, m2) = (min_of(1), min_of(2));
    let shift = (m2 - BOURGAIN_C0).abs() / BOURGAIN_C0;
    report(
        4,
        "bourgain lower bound",
        BOURGAIN_C0 > 0.0 && m1 >= BOURGAIN_C0 && shift < 0.1,
        format!("c0 {BOURGAIN_C0}, corpus minima {m1:.6} / {m2:.6}, shift {:.2}%", 100.0 * shift),
    );
}

#[test]
fn criterion_05_decomposition_identities() {
    let _g = serial();
    let mut measures: Vec<GridDensity> = bourgain_corpus(1, 200, 12).unwrap();
    measures.push(cantor_measure(&CantorSpec::middle_thirds(7), 12).unwrap());
    for seed in 0..4 {
        measures.push(cantor_measure(&CantorSpec::random(5, 3, 4, seed), 12).unwrap());
    }
    let cond = MeasureConditions::new(0.6, 0.5, 2.0, 1.0, 1.0).unwrap();
    let mut failures = Vec::new();
    let mut lowest = f64::INFINITY;
    for (i, mu) in measures.iter().enumerate() {
        let s = fourier_coeffs(mu, 512).unwrap();
        let d = decompose(&s, &cond, 16.0).unwrap();
        let exact = s.iter().all(|(k, c)| d.mu1.get(k) + d.mu2.get(k) == c);
        let zero = d.mu2.get(0) == Complex64::new(0.0, 0.0);
        lowest = lowest.min(d.min_value);
        if !exact || !zero || d.min_value < -1e-9 || d.truncated {
            failures.push(i);
        }
    }
    let mut n_ok = true;
    let mut n_gap = 0.0f64;
    for (alpha, c2) in [(0.5, 1.0), (0.6, 1.0), (0.75, 0.5), (0.9, 2.0), (0.95, 3.0), (0.98, 1.0)] {
        let c = MeasureConditions::new(alpha, 0.5, 2.0, c2, 1.0).unwrap();
        let d = decompose(&unit_series(), &c, 16.0).unwrap();
        let expected = exact_truncation(alpha) / c2;
        let gap = ((d.n - expected) / expected).abs();
        n_gap = n_gap.max(gap / f64::EPSILON);
        n_ok &= gap <= 4.0 * f64::EPSILON;
    }
    report(
        5,
        "decomposition identities",
        failures.is_empty() && n_ok,
        format!(
            "{} measures, failing {:?}, N within {n_gap:.1} eps, min reconstructed mu1 {lowest:.3e}",
            measures.len(),
            failures
        ),
    );
}

fn unit_series() -> FourierSeries {
    FourierSeries::from_fn(4, |k| Complex64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0))
}

/// `e^{1/(1-alpha)}` for the exact binary value of `alpha`, in 256-bit fixed
/// point, rounded to `f64`.
fn exact_truncation(alpha: f64) -> f64 {
    const F: u32 = 256;
    let one = BigInt::one() << F;
    let (mant, exp) = {
        let bits = alpha.to_bits();
        let e = ((bits >> 52) & 0x7ff) as i32 - 1075;
        ((bits & ((1 << 52) - 1)) | (1 << 52), e)
    };
    // alpha = mant 2^exp with exp < 0, so 1/(1-alpha) = 2^-exp / (2^-exp - mant).
    let den = BigInt::one() << (-exp) as u32;
    let x = (&den << F) / (&den - BigInt::from(mant));
    let k = 12;
    let y = x >> k;
    let mut term = one.clone();
    let mut sum = one.clone();
    for i in 1..60u32 {
        term = ((&term * &y) >> F) / i;
        sum += &term;
    }
    for _ in 0..k {
        sum = (&sum * &sum) >> F;
    }
    let shift = sum.bits() as i64 - 64;
    let top = (&sum >> shift as u32).to_f64().unwrap();
    top * 2f64.powi((shift - F as i64) as i32)
}

fn scan_ok(r: &TrilinearReport) -> bool {
    r.dichotomy_holds() && r.energy_identity_holds()
}

#[test]
fn criterion_06_scale_scan_dichotomy() {
    let _g = serial();
    let p = Polynomial::t_plus_t2();
    let mut runs: Vec<(String, GridDensity, i32)> = bourgain_corpus(1, 30, 14)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, f)| (format!("corpus {i}"), f, 2))
        .collect();
    let n = 1usize << 14;
    let spike: Vec<f64> = (0..n).map(|j| if j < n / 128 { 128.0 } else { 0.0 }).collect();
    runs.push(("narrow arc".into(), GridDensity::new(14, spike).unwrap(), 4));
    let cond = MeasureConditions::new(0.6, 0.5, 2.0, 1.0, 1.0).unwrap();
    let cantor = cantor_measure(&CantorSpec::middle_thirds(8), 14).unwrap();
    let d = decompose(&fourier_coeffs(&cantor, 512).unwrap(), &cond, 16.0).unwrap();
    runs.push(("cantor mu1".into(), cell_averages(&d.mu1, 14).unwrap(), 2));

    let mut failures = Vec::new();
    let mut uncertified_rungs = 0;
    for (name, f, l_start) in &runs {
        match scale_scan(f, &p, &ScanParams::new(*l_start)) {
            Ok(r) => {
                uncertified_rungs += r.scales.iter().filter(|x| Some(x.ell) != r.certified_scale).count();
                if !scan_ok(&r) {
                    failures.push(name.clone());
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let uniform = scale_scan(&GridDensity::uniform(12).unwrap(), &p, &ScanParams::new(2)).unwrap();
    let first = &uniform.scales[0];
    let uniform_ok = uniform.certified_scale == Some(first.ell) && (first.lambda - 1.0).abs() <= 1e-9;
    report(
        6,
        "scale-scan dichotomy",
        failures.is_empty() && uniform_ok,
        format!(
            "{} runs ({uncertified_rungs} uncertified rungs), failing {failures:?}; uniform Lambda - 1 = {:.1e}",
            runs.len(),
            first.lambda - 1.0
        ),
    );
}

#[test]
fn criterion_07_resonance_decay() {
    let _g = serial();
    let p = Polynomial::t_plus_t2();
    let (l, k, gap) = (4, 256, 5);
    let table = MultiplierTable::tabulate(&p, l, k);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for kmax in gap..=7u32 {
        let mut worst = 0.0f64;
        for kmin in 0..=(kmax - gap) {
            for (k1, k2) in [(kmax, kmin), (kmin, kmax)] {
                for seed in 0..4u64 {
                    let f = random_band(1 << k1, 2 << k1, k, 100 * seed + 1);
                    let g = random_band(1 << k2, 2 << k2, k, 100 * seed + 2);
                    let t = apply_t_fourier(&f, &g, &table).unwrap();
                    worst = worst.max(sobolev_norm(&t, 0.0));
                }
            }
        }
        xs.push(kmax as f64);
        ys.push(worst);
    }
    let slope = log2_slope(&xs, &ys);
    report(
        7,
        "resonance decay",
        slope <= -2.0,
        format!("l = {l}, log-log slope {slope:.2} over max band 2^5..2^7 (K = {k})"),
    );
}

#[test]
fn criterion_08_pattern_search_soundness() {
    let _g = serial();
    let start = Instant::now();
    let set = IntervalSet::from_cantor(&CantorSpec::middle_thirds(6)).unwrap();
    let exact = cantor_intervals(6);
    let l0 = 3;
    let mut detail = Vec::new();
    let mut pass = true;
    for (p, oracle) in [
        (Polynomial::from_pairs(&[(2.0, 1)]).unwrap(), OraclePoly::Linear(2)),
        (Polynomial::t_plus_t2(), OraclePoly::TPlusT2),
    ] {
        let found = find_configurations(&set, &p, l0, DEFAULT_BUDGET).unwrap();
        let expected = oracle_triples(&exact, &oracle, l0 as u32);
        let verified = found.triples.iter().all(|t| t.verify(&set, &p, l0));
        let same = found.index_set() == expected;
        pass &= same && verified && !found.is_inconclusive();
        detail.push(format!("P = {p}: {} vs oracle {} (match {same})", found.triples.len(), expected.len()));
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        8,
        "pattern search soundness",
        pass && secs < 60.0,
        format!("{}, {secs:.1} s", detail.join("; ")),
    );
}

#[test]
fn criterion_09_positivity_pipeline() {
    let _g = serial();
    let p = Polynomial::t_plus_t2();
    let spec = CantorSpec::middle_thirds(8);
    let l0 = scale_setup(&p, 100.0).unwrap().l0;
    let mu = cantor_measure(&spec, 13).unwrap();
    let eps = [2f64.powi(-8), 2f64.powi(-9), 2f64.powi(-10)];
    let nm = nu_mass(&mu, &p, l0, &eps).unwrap();
    let set = IntervalSet::from_cantor(&spec).unwrap();
    let found = find_configurations(&set, &p, l0, DEFAULT_BUDGET).unwrap();
    let positive = nm.limit_estimate > 0.0 && nm.residual < 0.1;
    let consistent = !positive || !found.triples.is_empty();
    report(
        9,
        "positivity pipeline",
        nm.cauchy_decreasing() && consistent,
        format!(
            "l0 = {l0}, cauchy {:.3e} > {:.3e}, limit {:.4}, residual {:.1}%, {} certified triples",
            nm.cauchy[0],
            nm.cauchy[1],
            nm.limit_estimate,
            100.0 * nm.residual,
            found.triples.len()
        ),
    );
}

#[test]
fn criterion_10_nondegeneracy() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    let mut count = 0;
    for p in [Polynomial::t_plus_t2(), t_plus_t3()] {
        for l in [2, 4] {
            let (lo, hi) = admissible_window(&p, l);
            let margin = 0.01 * (hi - lo);
            for _ in 0..500 {
                let rho = rng.random_range(lo + margin..hi - margin);
                let sym = nondegeneracy(rho, &p, l).unwrap();
                let fd = nondegeneracy_fd(rho, &p, l).unwrap();
                worst = worst.max((fd - sym).abs() / sym);
                count += 1;
            }
        }
    }
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut polys = vec![Polynomial::parse("1:2").unwrap(), Polynomial::t_plus_t2(), t_plus_t3()];
    for name in ["reference.cfg", "uniform.cfg"] {
        let text = std::fs::read_to_string(format!("{root}/{name}")).unwrap();
        polys.push(ExperimentConfig::parse(&text).unwrap().polynomial);
    }
    let top_ok = polys.iter().all(|p| {
        let t = *p.terms().last().unwrap();
        let e = t.exponent as f64;
        let c = top_coefficient(p);
        c != 0.0 && c == -t.coeff.powi(3) * e.powi(4) * (e - 1.0)
    });
    report(
        10,
        "non-degeneracy",
        worst <= 1e-4 && top_ok,
        format!(
            "{count} rho values, max relative gap {worst:.2e}; top coefficient identity on {} polynomials: {top_ok}",
            polys.len()
        ),
    );
}
