//! The operator `T_l(f, g)(x) = int f(x + t) g(x + P(t)) tau_l(t) dt`, the
//! trilinear form `Lambda_l(f, g, h) = int h T_l(f, g)` on both sides, the
//! triple-convolution lower bound, the scale scan and the mixed-term bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bump::{tau0, BumpFunction};
use crate::error::{invalid, Error, Result};
use crate::fourier::{sobolev_norm, FourierSeries};
use crate::grid::GridDensity;
use crate::measures::{mollifier_kernel, mollify};
use crate::oscillatory::MultiplierTable;
use crate::polynomial::{bisect, DensePoly, Polynomial};
use crate::quad::{gauss, pairwise_sum, pairwise_sum_complex, GaussLegendre};

/// Which side of the identity evaluates the form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Physical,
    Fourier,
}

/// Operand of the trilinear form.
///
/// Grids are cell averages (step functions); series are trigonometric
/// polynomials, evaluated on the physical side from point samples.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a> {
    Grid(&'a GridDensity),
    Series(&'a FourierSeries),
}

/// Grid level used for the physical side of series operands.
pub const DEFAULT_TRIG_LEVEL: u32 = 14;

fn scale_window(l: i32) -> (f64, f64) {
    let a = (-(l as f64)).exp2();
    (a, 2.0 * a)
}

/// Contribution `weight * f[i + df] * g[i + dg]` to the average of
/// `T_l(f, g)` over cell `i`.
#[derive(Debug, Clone, Copy)]
struct Entry {
    weight: f64,
    df: i64,
    dg: i64,
}

// Adds every t in (a, b) with q(t) in h Z.
fn level_crossings(q: &DensePoly, a: f64, b: f64, h: f64, out: &mut Vec<f64>) {
    let mut knots = vec![a];
    knots.extend(q.derivative().roots_in(a, b));
    knots.push(b);
    for w in knots.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (qu, qv) = (q.eval(u), q.eval(v));
        let (lo, hi) = (qu.min(qv), qu.max(qv));
        for m in (lo / h).ceil() as i64..=(hi / h).floor() as i64 {
            let c = m as f64 * h;
            if c <= lo || c >= hi {
                continue;
            }
            let t = bisect(|t| q.eval(t) - c, u, v);
            if t > a && t < b {
                out.push(t);
            }
        }
    }
}

// Over cell i = [ih, (i+1)h), f(x + t) switches from f[i + A] to
// f[i + A + 1] at fraction 1 - alpha of the cell, alpha = frac(t / h), and
// g(x + P(t)) likewise with beta = frac(P(t) / h). Between consecutive
// zeros of t, P(t) and P(t) - t modulo h the cell overlaps are linear in
// alpha and beta and are integrated against tau_l with Gauss-Legendre.
fn entries(h: f64, l: i32, p: &Polynomial) -> Vec<Entry> {
    let (a, b) = scale_window(l);
    let dense = p.dense();
    let mut diff = dense.clone();
    if diff.coeffs.len() < 2 {
        diff.coeffs.resize(2, 0.0);
    }
    diff.coeffs[1] -= 1.0;
    let ident = DensePoly { coeffs: vec![0.0, 1.0] };
    let mut breaks = vec![a, b];
    level_crossings(&ident, a, b, h, &mut breaks);
    level_crossings(&dense, a, b, h, &mut breaks);
    level_crossings(&diff, a, b, h, &mut breaks);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let scale = (l as f64).exp2();
    let rule = gauss(8);
    let mut acc: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        if !(v > u) {
            continue;
        }
        let mid = 0.5 * (u + v);
        let fa = (mid / h).floor();
        let fb = (dense.eval(mid) / h).floor();
        let (ia, ib) = (fa as i64, fb as i64);
        let frac = |t: f64| (t / h - fa, dense.eval(t) / h - fb);
        let (am, bm) = frac(mid);
        let tau = |t: f64| scale * tau0(scale * t);
        let int = |g: &dyn Fn(f64, f64) -> f64| {
            rule.integrate(u, v, |t| {
                let (al, be) = frac(t);
                tau(t) * g(al, be)
            })
        };
        let parts: [((i64, i64), f64); 3] = if am <= bm {
            [
                ((ia, ib), int(&|_, be| 1.0 - be)),
                ((ia, ib + 1), int(&|al, be| be - al)),
                ((ia + 1, ib + 1), int(&|al, _| al)),
            ]
        } else {
            [
                ((ia, ib), int(&|al, _| 1.0 - al)),
                ((ia + 1, ib), int(&|al, be| al - be)),
                ((ia + 1, ib + 1), int(&|_, be| be)),
            ]
        };
        for (key, wgt) in parts {
            *acc.entry(key).or_insert(0.0) += wgt;
        }
    }
    acc.into_iter()
        .filter(|(_, w)| *w != 0.0)
        .map(|((df, dg), weight)| Entry { weight, df, dg })
        .collect()
}

fn check_resolution(mu: &GridDensity, l: i32) -> Result<()> {
    if mu.base() != 2 {
        return Err(Error::RepresentationMismatch(
            "the physical side needs dyadic grids".into(),
        ));
    }
    if (mu.level() as i64) < l as i64 + 3 {
        return Err(Error::GridTooCoarse(format!(
            "scale {l} needs grid level >= {}, got {}",
            l as i64 + 3,
            mu.level()
        )));
    }
    Ok(())
}

fn same_grid(a: &GridDensity, b: &GridDensity) -> Result<()> {
    if a.base() != b.base() || a.level() != b.level() {
        return Err(Error::RepresentationMismatch(
            "operands live on different grids".into(),
        ));
    }
    Ok(())
}

/// Cell averages of `T_l(f, g)` for step functions `f`, `g`.
pub fn apply_t_values(f: &GridDensity, g: &GridDensity, l: i32, p: &Polynomial) -> Result<Vec<f64>> {
    same_grid(f, g)?;
    check_resolution(f, l)?;
    let n = f.len() as i64;
    let segs = entries(f.cell_width(), l, p);
    let (fv, gv) = (f.values(), g.values());
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for s in &segs {
                let fi = (i + s.df).rem_euclid(n) as usize;
                let gi = (i + s.dg).rem_euclid(n) as usize;
                acc += s.weight * fv[fi] * gv[gi];
            }
            acc
        })
        .collect())
}

/// `T_l(f, g)` projected onto the grid of `f`.
pub fn apply_t(f: &GridDensity, g: &GridDensity, l: i32, p: &Polynomial) -> Result<GridDensity> {
    let v = apply_t_values(f, g, l, p)?;
    GridDensity::new(f.level(), v)
}

/// Physical side for step functions, exact up to the Gauss rule in `t`.
pub fn trilinear_physical(
    f: &GridDensity,
    g: &GridDensity,
    h: &GridDensity,
    l: i32,
    p: &Polynomial,
) -> Result<f64> {
    same_grid(f, h)?;
    let t = apply_t_values(f, g, l, p)?;
    let prod: Vec<f64> = t.iter().zip(h.values()).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum(&prod) * h.cell_width())
}

struct TrigContext {
    n: usize,
    ifft: Arc<dyn Fft<f64>>,
}

impl TrigContext {
    fn new(n: usize) -> Self {
        Self {
            n,
            ifft: FftPlanner::new().plan_fft_inverse(n),
        }
    }

    /// Samples of `sum_k c_k e^{2 pi i k (x_j + shift)}` at `x_j = j / n`.
    fn shifted(&self, s: &FourierSeries, shift: f64) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, c) in s.iter() {
            if c != Complex64::new(0.0, 0.0) {
                let phase = 2.0 * PI * (k as f64 * shift).rem_euclid(1.0);
                buf[k.rem_euclid(self.n as i64) as usize] = c * Complex64::from_polar(1.0, phase);
            }
        }
        self.ifft.process(&mut buf);
        buf
    }
}

fn trig_nodes(f: &FourierSeries, g: &FourierSeries, l: i32, p: &Polynomial) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = scale_window(l);
    let dp = p.dense().derivative();
    let (lo, hi) = dp.range_on(a, b);
    let slope = lo.abs().max(hi.abs());
    // Radians of phase swept by the shifted factors as s runs over [1, 2].
    let sweep = 2.0 * PI * a * (f.cutoff() as f64 + g.cutoff() as f64 * slope);
    let panels = (sweep / 2.0).ceil() as usize + 32;
    GaussLegendre::new(16).composite_nodes(1.0, 2.0, panels)
}

/// Point values of `T_l(f, g)` at `j / n` for trigonometric polynomials,
/// by composite Gauss-Legendre in `t` with exact fractional shifts.
pub fn apply_t_trig(
    f: &FourierSeries,
    g: &FourierSeries,
    l: i32,
    p: &Polynomial,
    level: u32,
) -> Result<Vec<Complex64>> {
    let n = crate::grid::cell_count(2, level)?;
    let k = f.cutoff().max(g.cutoff());
    if n <= 2 * k {
        return Err(Error::BeyondNyquist {
            cutoff: k,
            limit: (n - 1) / 2,
        });
    }
    let ctx = TrigContext::new(n);
    let (nodes, weights) = trig_nodes(f, g, l, p);
    let scale = (-(l as f64)).exp2();
    const CHUNK: usize = 16;
    let partials: Vec<Vec<Complex64>> = nodes
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(ns, ws)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (&s, &w) in ns.iter().zip(ws) {
                let wt = w * tau0(s);
                if wt == 0.0 {
                    continue;
                }
                let t = scale * s;
                let fs = ctx.shifted(f, t);
                let gs = ctx.shifted(g, p.eval(t));
                for ((a, x), y) in acc.iter_mut().zip(&fs).zip(&gs) {
                    *a += x * y * wt;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut column = Vec::with_capacity(partials.len());
    for (j, o) in out.iter_mut().enumerate() {
        column.clear();
        column.extend(partials.iter().map(|v| v[j]));
        *o = pairwise_sum_complex(&column);
    }
    Ok(out)
}

/// Physical side for trigonometric polynomials: the exact trapezoid rule in
/// `x` over the samples of `h T_l(f, g)`.
pub fn trilinear_physical_trig(
    f: &FourierSeries,
    g: &FourierSeries,
    h: &FourierSeries,
    l: i32,
    p: &Polynomial,
    level: u32,
) -> Result<Complex64> {
    let n = crate::grid::cell_count(2, level)?;
    let total = f.cutoff() + g.cutoff() + h.cutoff();
    if n <= total {
        return Err(Error::BeyondNyquist {
            cutoff: total,
            limit: n - 1,
        });
    }
    let t = apply_t_trig(f, g, l, p, level)?;
    let hs = TrigContext::new(n).shifted(h, 0.0);
    let prod: Vec<Complex64> = t.iter().zip(&hs).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum_complex(&prod) / n as f64)
}

fn check_table(table: &MultiplierTable, need: usize, l: i32, p: &Polynomial) -> Result<()> {
    if table.cutoff < need {
        return Err(Error::TableCoverage {
            table: table.cutoff,
            needed: need,
        });
    }
    if table.l != l || table.polynomial != *p {
        return Err(invalid(
            "table",
            format!("tabulated for l = {} and P = {}", table.l, table.polynomial),
        ));
    }
    Ok(())
}

/// `sum_{a, b} f(a) g(b) h(-a-b) m_l(2 pi a, 2 pi b)`.
pub fn trilinear_fourier(
    f: &FourierSeries,
    g: &FourierSeries,
    h: &FourierSeries,
    table: &MultiplierTable,
) -> Result<Complex64> {
    let need = f.cutoff().max(g.cutoff());
    if table.cutoff < need {
        return Err(Error::TableCoverage {
            table: table.cutoff,
            needed: need,
        });
    }
    let (kf, kg, kh) = (f.cutoff() as i64, g.cutoff() as i64, h.cutoff() as i64);
    let rows: Vec<Complex64> = (-kf..=kf)
        .into_par_iter()
        .map(|a| {
            let fa = f.get(a);
            if fa == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let lo = (-kg).max(-kh - a);
            let hi = kg.min(kh - a);
            let terms: Vec<Complex64> = (lo..=hi)
                .map(|b| g.get(b) * h.get(-a - b) * table.get(a, b))
                .collect();
            fa * pairwise_sum_complex(&terms)
        })
        .collect();
    Ok(pairwise_sum_complex(&rows))
}

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
        return Err(invalid(
            "operands",
            format!("form is not real: imaginary residual {:e}", z.im),
        ));
    }
    Ok(z.re)
}

/// `Lambda_l(f, g, h) = int h(x) f(x + t) g(x + P(t)) tau_l(t) dt dx`.
///
/// Physical side: grids as step functions, series from point samples on
/// [`DEFAULT_TRIG_LEVEL`]. Fourier side: series only, with a freshly
/// tabulated multiplier; see [`trilinear_fourier`] to reuse a table.
pub fn trilinear_form(
    f: Operand,
    g: Operand,
    h: Operand,
    l: i32,
    p: &Polynomial,
    side: Side,
) -> Result<f64> {
    use Operand::*;
    match (side, f, g, h) {
        (Side::Physical, Grid(f), Grid(g), Grid(h)) => trilinear_physical(f, g, h, l, p),
        (Side::Physical, Series(f), Series(g), Series(h)) => {
            real_part(trilinear_physical_trig(f, g, h, l, p, DEFAULT_TRIG_LEVEL)?)
        }
        (Side::Fourier, Series(f), Series(g), Series(h)) => {
            let k = f.cutoff().max(g.cutoff());
            let table = MultiplierTable::tabulate(p, l, k);
            check_table(&table, k, l, p)?;
            real_part(trilinear_fourier(f, g, h, &table)?)
        }
        (Side::Fourier, ..) => Err(Error::RepresentationMismatch(
            "the Fourier side takes Fourier series".into(),
        )),
        _ => Err(Error::RepresentationMismatch(
            "all three operands must have the same representation".into(),
        )),
    }
}

/// As [`trilinear_form`] on the Fourier side with a given table.
pub fn trilinear_form_with_table(
    f: &FourierSeries,
    g: &FourierSeries,
    h: &FourierSeries,
    table: &MultiplierTable,
) -> Result<f64> {
    check_table(table, f.cutoff().max(g.cutoff()), table.l, &table.polynomial)?;
    real_part(trilinear_fourier(f, g, h, table)?)
}

/// Fourier coefficients of `T_l(f, g)`: `sum_{a+b=n} f(a) g(b) m_l(2 pi a, 2 pi b)`.
pub fn apply_t_fourier(f: &FourierSeries, g: &FourierSeries, table: &MultiplierTable) -> Result<FourierSeries> {
    let (kf, kg) = (f.cutoff() as i64, g.cutoff() as i64);
    if table.cutoff < f.cutoff().max(g.cutoff()) {
        return Err(Error::TableCoverage {
            table: table.cutoff,
            needed: f.cutoff().max(g.cutoff()),
        });
    }
    let k = (kf + kg) as usize;
    Ok(crate::fourier::par_from_fn(k, |n| {
        let lo = (-kf).max(n - kg);
        let hi = kf.min(n + kg);
        let terms: Vec<Complex64> = (lo..=hi)
            .map(|a| f.get(a) * g.get(n - a) * table.get(a, n - a))
            .collect();
        pairwise_sum_complex(&terms)
    }))
}

/// `(int f (f * theta_k)(f * theta_ell), (int f)^3)` with `theta_k` the
/// plateau bump at width `2^{-k}`.
pub fn bourgain_bound(f: &GridDensity, k: u32, ell: u32) -> Result<(f64, f64)> {
    let fk = mollify(f, (-(k as f64)).exp2(), BumpFunction::THETA)?;
    let fl = mollify(f, (-(ell as f64)).exp2(), BumpFunction::THETA)?;
    let prod: Vec<f64> = f
        .values()
        .iter()
        .zip(fk.values())
        .zip(fl.values())
        .map(|((a, b), c)| a * b * c)
        .collect();
    let lhs = pairwise_sum(&prod) * f.cell_width();
    Ok((lhs, f.mass().powi(3)))
}

/// `min_{k, ell in scales} lhs / (int f)^3`.
pub fn bourgain_ratio(f: &GridDensity, scales: &[u32]) -> Result<f64> {
    let molls: Vec<GridDensity> = scales
        .iter()
        .map(|&k| mollify(f, (-(k as f64)).exp2(), BumpFunction::THETA))
        .collect::<Result<_>>()?;
    let rhs = f.mass().powi(3);
    let mut best = f64::INFINITY;
    for (i, a) in molls.iter().enumerate() {
        for b in &molls[i..] {
            let prod: Vec<f64> = f
                .values()
                .iter()
                .zip(a.values())
                .zip(b.values())
                .map(|((x, y), z)| x * y * z)
                .collect();
            best = best.min(pairwise_sum(&prod) * f.cell_width() / rhs);
        }
    }
    Ok(best)
}

/// Scales `k, ell in {2, ..., 8}` of the lower-bound check.
pub const BOURGAIN_SCALES: [u32; 7] = [2, 3, 4, 5, 6, 7, 8];

/// Lower-bound constant: the minimum of [`bourgain_ratio`] over
/// `corpus::bourgain_corpus(1, 200, 12)` (0.458991), rounded down.
pub const BOURGAIN_C0: f64 = 0.4589;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Lower-bound constant `c0`.
    pub c0: f64,
    /// Ladder ratio: `ell_{k+1} = ceil(ratio ell_k)`.
    pub ratio: f64,
    pub l_start: i32,
    pub k_max: usize,
    /// `C_M`; `None` uses `M^10`.
    pub c_m: Option<f64>,
    /// Density bound `M`; `None` uses the grid maximum of `f`.
    pub m: Option<f64>,
}

impl ScanParams {
    pub fn new(l_start: i32) -> Self {
        Self {
            c0: BOURGAIN_C0,
            ratio: 1.5,
            l_start,
            k_max: 8,
            c_m: None,
            m: None,
        }
    }

    pub fn ladder(&self) -> Vec<i32> {
        let mut v = vec![self.l_start];
        while v.len() <= self.k_max {
            let last = *v.last().expect("nonempty");
            let next = ((last as f64) * self.ratio).ceil() as i32;
            v.push(next.max(last + 1));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub ell: i32,
    pub lambda: f64,
    /// `||f * theta_ell - f * theta_next||_2^2`; absent when the next
    /// mollification is below the grid resolution at a certified rung.
    pub increment: Option<f64>,
    /// Whether `sqrt(increment)` exceeds the energy threshold.
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearReport {
    pub scales: Vec<Rung>,
    pub certified_scale: Option<i32>,
    pub c0: f64,
    /// Density bound `M`.
    pub m: f64,
    pub c_m: f64,
    /// `2^{-10} c0 / C_M`.
    pub energy_threshold: f64,
    /// True when the threshold is below the round-off level of the increments.
    pub vacuous: bool,
    /// `max_n sum_k |K_k(n) - K_{k+1}(n)|^2` over the mollifier multipliers.
    pub c_big0: f64,
    /// `C0 M^2`.
    pub budget: f64,
    pub l2_norm_sq: f64,
    pub increments_sum: f64,
    pub k_max: usize,
    /// Present when the ladder ran out without certification.
    pub diagnostic: Option<String>,
}

impl TrilinearReport {
    /// `Sum increments <= C0 ||f||_2^2` up to `1e-9`.
    pub fn energy_identity_holds(&self) -> bool {
        self.increments_sum <= self.c_big0 * self.l2_norm_sq + 1e-9
    }

    /// Every uncertified rung has its increment above the threshold.
    pub fn dichotomy_holds(&self) -> bool {
        self.scales
            .iter()
            .filter(|r| Some(r.ell) != self.certified_scale)
            .all(|r| r.above_threshold)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# ell lambda increment above_threshold\n");
        for r in &self.scales {
            let inc = r.increment.map_or("-".to_string(), |v| format!("{v:.12e}"));
            s.push_str(&format!(
                "{} {:.12e} {} {}\n",
                r.ell, r.lambda, inc, r.above_threshold
            ));
        }
        s.push_str(&format!(
            "certified_scale = {}\nc0 = {:e}\nM = {:e}\nC_M = {:e}\nenergy_threshold = {:e}\nvacuous = {}\nC0 = {:e}\nbudget = {:e}\nincrements_sum = {:e}\nK_max = {}\n",
            self.certified_scale.map_or("none".into(), |l| l.to_string()),
            self.c0,
            self.m,
            self.c_m,
            self.energy_threshold,
            self.vacuous,
            self.c_big0,
            self.budget,
            self.increments_sum,
            self.k_max
        ));
        if let Some(d) = &self.diagnostic {
            s.push_str(&format!("diagnostic = {d}\n"));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("ell,lambda,increment\n");
        for r in &self.scales {
            s.push_str(&format!(
                "{},{:e},{}\n",
                r.ell,
                r.lambda,
                r.increment.map_or(String::new(), |v| format!("{v:e}"))
            ));
        }
        s
    }
}

/// DFT of the discrete mollifier at width `2^{-ell}` on an `n`-cell grid.
fn kernel_multiplier(n: usize, ell: i32) -> Vec<Complex64> {
    let h = 1.0 / n as f64;
    let (first, kernel) = mollifier_kernel(h, (-(ell as f64)).exp2(), BumpFunction::THETA);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, k) in kernel.iter().enumerate() {
        buf[(first + j as i64).rem_euclid(n as i64) as usize].re += k;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

fn format_ladder(rungs: &[Rung]) -> String {
    rungs
        .iter()
        .map(|r| {
            format!(
                "(ell {}, lambda {:e}, increment {})",
                r.ell,
                r.lambda,
                r.increment.map_or("-".into(), |v| format!("{v:e}"))
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Walk the ladder: at each rung either `Lambda > 2^{-10} c0` (certified,
/// stop) or the energy increment is recorded against its threshold.
pub fn scale_scan(f: &GridDensity, p: &Polynomial, params: &ScanParams) -> Result<TrilinearReport> {
    if !(params.ratio > 1.0) || !(params.c0 > 0.0) {
        return Err(invalid("params", "ratio must exceed 1 and c0 be positive"));
    }
    if params.l_start < 0 {
        return Err(invalid("l_start", "must be nonnegative"));
    }
    let m = params.m.unwrap_or_else(|| f.max());
    let c_m = params.c_m.unwrap_or_else(|| m.powi(10));
    let threshold = (-10f64).exp2() * params.c0 / c_m;
    let l2 = f.l2_norm_sq();
    let vacuous = threshold * threshold < f64::EPSILON * l2;
    let ladder = params.ladder();
    let n = f.len();
    let level = f.level() as i32;
    let mut rungs: Vec<Rung> = Vec::new();
    let mut certified = None;
    let mut used = vec![];
    for (k, &ell) in ladder.iter().enumerate().take(params.k_max + 1) {
        if ell + 3 > level {
            return Err(Error::ResolutionExceeded {
                scale: ell as u32,
                reason: format!(
                    "grid level {level} cannot resolve scale {ell}; partial ladder: [{}]",
                    format_ladder(&rungs)
                ),
            });
        }
        let lambda = trilinear_physical(f, f, f, ell, p)?;
        let next = ladder.get(k + 1).copied();
        let is_cert = lambda > (-10f64).exp2() * params.c0;
        let increment = match next {
            Some(nx) if nx <= level => {
                let a = mollify(f, (-(ell as f64)).exp2(), BumpFunction::THETA)?;
                let b = mollify(f, (-(nx as f64)).exp2(), BumpFunction::THETA)?;
                let d: Vec<f64> = a
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y) * (x - y))
                    .collect();
                used.push((ell, nx));
                Some(pairwise_sum(&d) / n as f64)
            }
            _ if is_cert => None,
            _ => {
                return Err(Error::ResolutionExceeded {
                    scale: next.unwrap_or(ell) as u32,
                    reason: format!(
                        "mollifier width below the cell width; partial ladder: [{}]",
                        format_ladder(&rungs)
                    ),
                })
            }
        };
        rungs.push(Rung {
            ell,
            lambda,
            increment,
            above_threshold: increment.is_some_and(|v| v.sqrt() > threshold),
        });
        if is_cert {
            certified = Some(ell);
            break;
        }
    }
    let mut c_big0 = 0.0f64;
    if !used.is_empty() {
        let mut acc = vec![0.0f64; n];
        for &(a, b) in &used {
            let ka = kernel_multiplier(n, a);
            let kb = kernel_multiplier(n, b);
            for (s, (x, y)) in acc.iter_mut().zip(ka.iter().zip(&kb)) {
                *s += (x - y).norm_sqr();
            }
        }
        c_big0 = acc.iter().copied().fold(0.0, f64::max);
    }
    let increments_sum: f64 = rungs.iter().filter_map(|r| r.increment).sum();
    let budget = c_big0 * m * m;
    let diagnostic = if certified.is_none() {
        let forced = rungs.len() as f64 * threshold * threshold;
        Some(format!(
            "no rung certified; {} rungs each forced an increment above {threshold:e}, \
             total >= {forced:e} against the budget C0 M^2 = {budget:e}{}",
            rungs.len(),
            if forced > budget {
                " (contradiction: budget exceeded)"
            } else {
                " (no contradiction at this ladder length)"
            }
        ))
    } else {
        None
    };
    Ok(TrilinearReport {
        scales: rungs,
        certified_scale: certified,
        c0: params.c0,
        m,
        c_m,
        energy_threshold: threshold,
        vacuous,
        c_big0,
        budget,
        l2_norm_sq: l2,
        increments_sum,
        k_max: params.k_max,
        diagnostic,
    })
}

/// The seven mixed forms `Lambda(mu_{i1}, mu_{i2}, mu_{i3})`,
/// `(i1, i2, i3) != (1, 1, 1)`, and their Sobolev product bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedTermReport {
    /// `(i1, i2, i3)` in lexicographic order.
    pub labels: Vec<[u8; 3]>,
    /// `|Lambda|`, where `mu_{i1}` is the outer function and `mu_{i2}`,
    /// `mu_{i3}` are shifted by `t` and `P(t)`.
    pub values: Vec<f64>,
    /// `C_{l0} prod ||mu_{i}||_{H^{-s0}}`.
    pub bounds: Vec<f64>,
    pub c_l0: f64,
    pub s0: f64,
    pub norm_mu1: f64,
    pub norm_mu2: f64,
}

impl MixedTermReport {
    pub fn all_within_bounds(&self) -> bool {
        self.values
            .iter()
            .zip(&self.bounds)
            .all(|(v, b)| *v <= b * (1.0 + 1e-9) + 1e-15)
    }
}

/// Schur constant of the form with respect to `H^{-s0}` on the table:
/// `max_b (sum_a k(a, b)^2)^{1/2}`, with
/// `k = w(a) w(b) w(a+b) |m_l(2 pi a, 2 pi b)|`, `w(n) = (1 + n^2)^{s0/2}`.
pub fn schur_constant(table: &MultiplierTable, s0: f64) -> f64 {
    let k = table.cutoff as i64;
    let w = |n: i64| (1.0 + (n as f64).powi(2)).powf(s0 / 2.0);
    (-k..=k)
        .into_par_iter()
        .map(|b| {
            let col: Vec<f64> = (-k..=k)
                .map(|a| (w(a) * w(b) * w(a + b) * table.get(a, b).norm()).powi(2))
                .collect();
            pairwise_sum(&col).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

pub fn mixed_term_bounds(
    mu1: &FourierSeries,
    mu2: &FourierSeries,
    table: &MultiplierTable,
    s0: f64,
) -> Result<MixedTermReport> {
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(invalid("s0", "must lie in (0, 1)"));
    }
    let mus = [mu1, mu2];
    let norms = [sobolev_norm(mu1, -s0), sobolev_norm(mu2, -s0)];
    let c_l0 = schur_constant(table, s0);
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut bounds = Vec::new();
    for i1 in 0..2usize {
        for i2 in 0..2usize {
            for i3 in 0..2usize {
                if (i1, i2, i3) == (0, 0, 0) {
                    continue;
                }
                let v = trilinear_fourier(mus[i2], mus[i3], mus[i1], table)?;
                labels.push([i1 as u8 + 1, i2 as u8 + 1, i3 as u8 + 1]);
                values.push(v.norm());
                bounds.push(c_l0 * norms[i1] * norms[i2] * norms[i3]);
            }
        }
    }
    Ok(MixedTermReport {
        labels,
        values,
        bounds,
        c_l0,
        s0,
        norm_mu1: norms[0],
        norm_mu2: norms[1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevRatio {
    pub ratio: f64,
    /// Set when `f` or `g` vanishes; the ratio is then 0 by convention.
    pub degenerate: bool,
}

/// `||T_l(f, g)||_{H^{s0}} / (||f||_{H^{-s0}} ||g||_{H^{-s0}})`, with `T`
/// evaluated on the physical side from samples on a grid fine enough to
/// resolve its full band.
pub fn sobolev_improving_ratio(
    f: &FourierSeries,
    g: &FourierSeries,
    l: i32,
    s0: f64,
    p: &Polynomial,
) -> Result<SobolevRatio> {
    let den = sobolev_norm(f, -s0) * sobolev_norm(g, -s0);
    if den == 0.0 {
        return Ok(SobolevRatio {
            ratio: 0.0,
            degenerate: true,
        });
    }
    let band = f.cutoff() + g.cutoff();
    let mut level = 4;
    while (1usize << level) <= 2 * band {
        level += 1;
    }
    let t = apply_t_trig(f, g, l, p, level)?;
    let n = t.len();
    let mut buf = t;
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let series = FourierSeries::from_fn(band, |k| buf[k.rem_euclid(n as i64) as usize] / n as f64);
    Ok(SobolevRatio {
        ratio: sobolev_norm(&series, s0) / den,
        degenerate: false,
    })
}

/// Least-squares slope of `log2 y` against `x`.
pub fn log2_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
