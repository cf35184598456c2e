//! The oscillatory multiplier
//! `m_l(xi, eta) = int tau0(s) exp(i (2^{-l} s xi + P(2^{-l} s) eta)) ds`,
//! its stationary-phase approximation, the scale constants of `P` and the
//! non-degeneracy quantity of the phase.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::tau0;
use crate::error::{invalid, Error, Result};
use crate::polynomial::{DensePoly, Polynomial};
use crate::quad::adaptive_complex;

/// Scale constants of `P`: `2^{b_i} <= |a_i| < 2^{b_i + 1}` and the smallest
/// `l0 >= 0` from which every lower-order term dominates the higher ones by `gamma0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub l: i32,
    pub l0: i32,
    pub gamma0: f64,
    pub b: Vec<i32>,
}

/// `|a_i| 2^{-l e_i} <= |a_j| 2^{-l e_j} / gamma0`.
fn dominated(p: &Polynomial, i: usize, j: usize, l: i32, gamma0: f64) -> bool {
    let (ti, tj) = (p.terms()[i], p.terms()[j]);
    let lhs = ti.coeff.abs().log2() - (l as f64) * ti.exponent as f64;
    let rhs = tj.coeff.abs().log2() - (l as f64) * tj.exponent as f64 - gamma0.log2();
    lhs <= rhs
}

/// Whether the dominance conditions hold at scale `l`.
pub fn dominance_holds(p: &Polynomial, l: i32, gamma0: f64) -> bool {
    let n = p.terms().len();
    let first = (1..n).all(|i| dominated(p, i, 0, l, gamma0));
    let second = !p.has_linear_term() || (2..n).all(|i| dominated(p, i, 1, l, gamma0));
    first && second
}

pub fn scale_setup(p: &Polynomial, gamma0: f64) -> Result<ScaleParams> {
    if !(gamma0 >= 2.0) || !gamma0.is_finite() {
        return Err(invalid("gamma0", "must be at least 2"));
    }
    let b = p
        .terms()
        .iter()
        .map(|t| t.coeff.abs().log2().floor() as i32)
        .collect();
    // Each condition is monotone in l; solve it in closed form, then settle
    // rounding at the boundary by direct checks.
    let terms = p.terms();
    let mut need = 0.0f64;
    let mut bound = |i: usize, j: usize| {
        let (ti, tj) = (terms[i], terms[j]);
        let gap = (ti.exponent - tj.exponent) as f64;
        need = need.max((gamma0 * ti.coeff.abs() / tj.coeff.abs()).log2() / gap);
    };
    for i in 1..terms.len() {
        bound(i, 0);
    }
    if p.has_linear_term() {
        for i in 2..terms.len() {
            bound(i, 1);
        }
    }
    let mut l0 = need.ceil().max(0.0) as i32;
    while l0 > 0 && dominance_holds(p, l0 - 1, gamma0) {
        l0 -= 1;
    }
    while !dominance_holds(p, l0, gamma0) {
        l0 += 1;
    }
    Ok(ScaleParams {
        l: l0,
        l0,
        gamma0,
        b,
    })
}

/// Quadrature value of the multiplier with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierValue {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
    /// Set when the panel budget ran out before the tolerance was met.
    pub flagged: bool,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 20;

/// The phase `2^{-l} s xi + P(2^{-l} s) eta` and its `s`-derivative.
struct Phase {
    xi_s: f64,
    eta: f64,
    p: DensePoly,
    dp: DensePoly,
}

impl Phase {
    fn new(xi: f64, eta: f64, l: i32, p: &Polynomial) -> Self {
        let p = p.rescaled(l);
        let dp = p.derivative();
        Self {
            xi_s: xi * (-(l as f64)).exp2(),
            eta,
            p,
            dp,
        }
    }

    fn value(&self, s: f64) -> f64 {
        self.xi_s * s + self.p.eval(s) * self.eta
    }

    fn rate(&self, s: f64) -> f64 {
        (self.xi_s + self.dp.eval(s) * self.eta).abs()
    }
}

pub fn multiplier_quadrature(xi: f64, eta: f64, l: i32, p: &Polynomial) -> MultiplierValue {
    multiplier_quadrature_tol(xi, eta, l, p, DEFAULT_TOLERANCE)
}

/// Adaptive GK15 over panels that each span about one radian of phase.
pub fn multiplier_quadrature_tol(
    xi: f64,
    eta: f64,
    l: i32,
    p: &Polynomial,
    tol: f64,
) -> MultiplierValue {
    let phase = Phase::new(xi, eta, l, p);
    let mut breaks = vec![1.0];
    let mut s = 1.0;
    while s < 2.0 {
        let step = (1.0 / phase.rate(s).max(1e-300)).min(0.125);
        s = (s + step).min(2.0);
        breaks.push(s);
    }
    let r = adaptive_complex(&breaks, tol, MAX_PANELS, |s| {
        Complex64::from_polar(tau0(s), phase.value(s))
    });
    debug_assert!(r.value.norm() <= 1.0 + r.error + 1e-12);
    MultiplierValue {
        value: r.value,
        error: r.error,
        panels: r.panels,
        flagged: r.truncated,
    }
}

/// Constant `c` of the remainder bound `c 2^{gamma l} / |eta|`, calibrated
/// by [`calibrate_error_constant`] on the reference grid and frozen here.
pub const SP_ERROR_CONSTANT: f64 = 3.85;
/// Exponent `gamma` of the remainder bound.
pub const SP_GAMMA0: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseResult {
    /// Critical point in rescaled coordinates (`s = 2^l t`, support `[1, 2]`).
    pub t_c: f64,
    /// `sqrt(2 pi) |2^{-2l} P''(2^{-l} t_c)|^{-1/2} tau0(t_c) e^{+-i pi/4}`.
    pub amplitude: Complex64,
    /// `2^{-l} t_c xi + P(2^{-l} t_c) eta`.
    pub phase: f64,
    /// `amplitude |eta|^{-1/2} e^{i phase}`.
    pub leading: Complex64,
    pub error_bound: f64,
}

impl StationaryPhaseResult {
    /// The critical point in the original variable, `2^{-l} t_c`.
    pub fn t_c_unscaled(&self, l: i32) -> f64 {
        self.t_c * (-(l as f64)).exp2()
    }
}

/// Roots of `xi + P'(2^{-l} s) eta` for `s` in `(1/2, 2)`.
fn critical_points(phase: &Phase) -> Vec<f64> {
    let mut g = phase.dp.clone();
    for c in g.coeffs.iter_mut() {
        *c *= phase.eta;
    }
    if g.coeffs.is_empty() {
        g.coeffs.push(0.0);
    }
    g.coeffs[0] += phase.xi_s;
    g.roots_in(0.5, 2.0)
        .into_iter()
        .map(|s| newton_polish(&g, s))
        .collect()
}

fn newton_polish(g: &DensePoly, mut s: f64) -> f64 {
    let dg = g.derivative();
    for _ in 0..4 {
        let d = dg.eval(s);
        if d == 0.0 {
            break;
        }
        let next = s - g.eval(s) / d;
        if !next.is_finite() || (next - s).abs() > 1e-6 * s.abs() {
            break;
        }
        s = next;
    }
    s
}

pub fn stationary_phase(xi: f64, eta: f64, l: i32, p: &Polynomial) -> Result<StationaryPhaseResult> {
    stationary_phase_with(xi, eta, l, p, SP_ERROR_CONSTANT)
}

/// As [`stationary_phase`] with an explicit remainder constant.
pub fn stationary_phase_with(
    xi: f64,
    eta: f64,
    l: i32,
    p: &Polynomial,
    c: f64,
) -> Result<StationaryPhaseResult> {
    let scale = (-(l as f64)).exp2();
    let phase = Phase::new(xi, eta, l, p);
    let roots = critical_points(&phase);
    let t_c = roots
        .into_iter()
        .min_by(|a, b| (a - 1.5).abs().total_cmp(&(b - 1.5).abs()))
        .ok_or(Error::NoCriticalPoint {
            lo: 0.5 * scale,
            hi: 2.0 * scale,
        })?;
    // d^2/ds^2 of P(2^{-l} s) is 2^{-2l} P''(2^{-l} s).
    let second = phase.dp.derivative().eval(t_c);
    let curvature = second * eta;
    if second == 0.0 || curvature.abs() <= 1e-14 * (phase.dp.eval(t_c) * eta).abs() {
        return Err(Error::DegeneratePhase {
            t_c: t_c * scale,
            second,
        });
    }
    let amplitude = Complex64::from_polar(
        (2.0 * PI / second.abs()).sqrt() * tau0(t_c),
        curvature.signum() * PI / 4.0,
    );
    let psi = phase.value(t_c);
    let leading = amplitude * eta.abs().powf(-0.5) * Complex64::from_polar(1.0, psi);
    Ok(StationaryPhaseResult {
        t_c,
        amplitude,
        phase: psi,
        leading,
        error_bound: c * (SP_GAMMA0 * l as f64).exp2() / eta.abs(),
    })
}

/// `xi` placing the critical point at rescaled `t_c` for the given `eta`.
pub fn xi_for_critical_point(t_c: f64, eta: f64, l: i32, p: &Polynomial) -> f64 {
    let scale = (-(l as f64)).exp2();
    -eta * p.derivative(scale * t_c, 1)
}

/// Reference grid for the remainder constant: `t_c` in `[1.25, 1.75]`
/// (step 1/40), both signs of `eta`, `|eta|` in `{1, 3} x 10^{3,4}` and `10^5`.
pub fn calibration_points() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for i in 0..=20 {
        let t_c = 1.25 + i as f64 * 0.025;
        for mag in [1e3, 3e3, 1e4, 3e4, 1e5] {
            for sign in [1.0, -1.0] {
                pts.push((t_c, sign * mag));
            }
        }
    }
    pts
}

/// Largest observed `|quadrature - leading| |eta| / 2^{gamma l}` over the
/// reference grid, times `safety`.
pub fn calibrate_error_constant(polys: &[Polynomial], levels: &[i32], safety: f64) -> f64 {
    let jobs: Vec<(&Polynomial, i32, f64, f64)> = polys
        .iter()
        .flat_map(|p| {
            levels.iter().flat_map(move |&l| {
                calibration_points()
                    .into_iter()
                    .map(move |(t_c, eta)| (p, l, t_c, eta))
            })
        })
        .collect();
    let worst = jobs
        .par_iter()
        .filter_map(|&(p, l, t_c, eta)| {
            let xi = xi_for_critical_point(t_c, eta, l, p);
            let sp = stationary_phase_with(xi, eta, l, p, 1.0).ok()?;
            let q = multiplier_quadrature_tol(xi, eta, l, p, 1e-12);
            Some((q.value - sp.leading).norm() * eta.abs() / (SP_GAMMA0 * l as f64).exp2())
        })
        .reduce(|| 0.0, f64::max);
    worst * safety
}

/// `E(s) = -(2Q' + 2a_1 - 1) Q''^2 + (Q' + a_1)(Q' + a_1 - 1) Q'''` at
/// `s = (Q')^{-1}(-rho - a_1)`, the root taken in `(2^{-l-1}, 2^{-l+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    pub s: f64,
    pub value: f64,
}

/// `|E(s)|` for `rho = xi / eta`.
pub fn nondegeneracy(rho: f64, p: &Polynomial, l: i32) -> Result<f64> {
    nondegeneracy_detail(rho, p, l).map(|n| n.value.abs())
}

pub fn nondegeneracy_detail(rho: f64, p: &Polynomial, l: i32) -> Result<Nondegeneracy> {
    let a1 = p.linear_coeff();
    let q = p.q_part();
    let dq = q.derivative();
    let d2q = dq.derivative();
    let d3q = d2q.derivative();
    let scale = (-(l as f64)).exp2();
    let (lo, hi) = (0.5 * scale, 2.0 * scale);
    let target = -rho - a1;
    let mut g = dq.clone();
    g.coeffs[0] -= target;
    let roots = g.roots_in(lo, hi);
    let s = match roots.as_slice() {
        [] => {
            return Err(Error::InversionFailed(format!(
                "Q' = {target} has no solution in ({lo}, {hi})"
            )))
        }
        [s] => newton_polish(&g, *s),
        _ => {
            return Err(Error::InversionFailed(format!(
                "Q' is not invertible on ({lo}, {hi}) at {target}"
            )))
        }
    };
    let (q1, q2, q3) = (dq.eval(s), d2q.eval(s), d3q.eval(s));
    let value = -(2.0 * q1 + 2.0 * a1 - 1.0) * q2 * q2 + (q1 + a1) * (q1 + a1 - 1.0) * q3;
    Ok(Nondegeneracy { s, value })
}

/// Values of `rho` whose critical point lies in the support scale
/// `[2^{-l}, 2^{-l+1}]`: the image of `-a_1 - Q'` there.
pub fn admissible_window(p: &Polynomial, l: i32) -> (f64, f64) {
    let scale = (-(l as f64)).exp2();
    let (lo, hi) = p.q_part().derivative().range_on(scale, 2.0 * scale);
    let a1 = p.linear_coeff();
    (-a1 - hi, -a1 - lo)
}

/// Finite-difference counterpart of [`nondegeneracy`]: the third derivative
/// `d_xi d_eta (d_xi - d_eta) Psi` at `(rho, 1)` by fourth-order central
/// differences of the stationary-phase `Psi`, multiplied by
/// `|Q''(s)|^3 eta^2` (the two agree exactly in exact arithmetic).
pub fn nondegeneracy_fd(rho: f64, p: &Polynomial, l: i32) -> Result<f64> {
    let nd = nondegeneracy_detail(rho, p, l)?;
    let q2 = p.q_part().derivative().derivative().eval(nd.s);
    let scale = (-(l as f64)).exp2();
    let base = nd.s / scale;
    // Psi through the critical point nearest the unperturbed one; the
    // bracket is wider than the stationary-phase one so stencils near the
    // edge of the window stay on the same branch.
    let psi = |xi: f64, eta: f64| -> Result<f64> {
        let phase = Phase::new(xi, eta, l, p);
        let mut g = phase.dp.clone();
        g.coeffs.iter_mut().for_each(|c| *c *= eta);
        g.coeffs[0] += phase.xi_s;
        let t = g
            .roots_in(0.25, 4.0)
            .into_iter()
            .map(|r| newton_polish(&g, r))
            .min_by(|a, b| (a - base).abs().total_cmp(&(b - base).abs()))
            .ok_or(Error::NoCriticalPoint {
                lo: 0.25 * scale,
                hi: 4.0 * scale,
            })?;
        Ok(phase.value(t))
    };
    // Moving xi by h moves the critical point by about h / Q''.
    let h = 0.02 * (q2.abs() * scale).min(1.0);
    let d1 = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
    let d2 = [
        (-2.0, -1.0 / 12.0),
        (-1.0, 16.0 / 12.0),
        (0.0, -30.0 / 12.0),
        (1.0, 16.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    let mut xxe = 0.0;
    let mut xee = 0.0;
    for &(i, wi) in &d2 {
        for &(j, wj) in &d1 {
            xxe += wi * wj * psi(rho + i * h, 1.0 + j * h)?;
            xee += wj * wi * psi(rho + j * h, 1.0 + i * h)?;
        }
    }
    let third = (xxe - xee) / h.powi(3);
    Ok((third * q2.powi(3)).abs())
}

/// Coefficient `a_n^3 e_n^3 (-2(e_n-1)^2 + (e_n-1)(e_n-2))` of the leading
/// power of `E`, which equals `-a_n^3 e_n^4 (e_n - 1)`.
pub fn top_coefficient(p: &Polynomial) -> f64 {
    let top = *p.terms().last().expect("nonempty");
    let (a, e) = (top.coeff, top.exponent as f64);
    a.powi(3) * e.powi(3) * (-2.0 * (e - 1.0).powi(2) + (e - 1.0) * (e - 2.0))
}

/// `m_l(2 pi a, 2 pi b)` for all integer `|a|, |b| <= K`, `a` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    pub l: i32,
    pub cutoff: usize,
    pub polynomial: Polynomial,
    values: Vec<Complex64>,
    /// Largest quadrature error estimate over the table.
    pub max_error: f64,
}

impl MultiplierTable {
    pub fn tabulate(p: &Polynomial, l: i32, cutoff: usize) -> Self {
        let k = cutoff as i64;
        let w = 2 * cutoff + 1;
        // Only the half a >= 0 is integrated; the rest is conjugate symmetry.
        let half: Vec<MultiplierValue> = (0..=k)
            .into_par_iter()
            .flat_map_iter(|a| {
                (-k..=k).map(move |b| {
                    multiplier_quadrature(2.0 * PI * a as f64, 2.0 * PI * b as f64, l, p)
                })
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); w * w];
        let mut max_error = 0.0f64;
        for a in 0..=k {
            for b in -k..=k {
                let v = half[(a * (2 * k + 1) + b + k) as usize];
                max_error = max_error.max(v.error);
                values[((a + k) as usize) * w + (b + k) as usize] = v.value;
                values[((k - a) as usize) * w + (k - b) as usize] = v.value.conj();
            }
        }
        // a = 0, b = 0 was written twice with conjugates; the integral is real there.
        let m = values[cutoff * w + cutoff];
        values[cutoff * w + cutoff] = Complex64::new(m.re, 0.0);
        Self {
            l,
            cutoff,
            polynomial: p.clone(),
            values,
            max_error,
        }
    }

    /// `m_l(2 pi a, 2 pi b)`.
    pub fn get(&self, a: i64, b: i64) -> Complex64 {
        let k = self.cutoff as i64;
        assert!(a.abs() <= k && b.abs() <= k, "outside the table");
        self.values[((a + k) as usize) * (2 * self.cutoff + 1) + (b + k) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Little-endian: `i64 l`, `u64 K`, `u64 n_terms`, the terms as
    /// `(f64 coeff, u64 exponent)`, then `(2K+1)^2` pairs `(re, im)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let terms = self.polynomial.terms();
        let mut out = Vec::with_capacity(24 + 16 * terms.len() + 16 * self.values.len());
        out.extend_from_slice(&(self.l as i64).to_le_bytes());
        out.extend_from_slice(&(self.cutoff as u64).to_le_bytes());
        out.extend_from_slice(&(terms.len() as u64).to_le_bytes());
        for t in terms {
            out.extend_from_slice(&t.coeff.to_le_bytes());
            out.extend_from_slice(&(t.exponent as u64).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> Result<[u8; 8]> {
            bytes
                .get(8 * i..8 * i + 8)
                .map(|s| s.try_into().expect("8 bytes"))
                .ok_or_else(|| Error::Format("multiplier table truncated".into()))
        };
        let l = i64::from_le_bytes(word(0)?) as i32;
        let cutoff = u64::from_le_bytes(word(1)?) as usize;
        let n_terms = u64::from_le_bytes(word(2)?) as usize;
        if n_terms > 64 || cutoff > 1 << 16 {
            return Err(Error::Format("implausible multiplier table header".into()));
        }
        let mut pairs = Vec::with_capacity(n_terms);
        for i in 0..n_terms {
            let c = f64::from_le_bytes(word(3 + 2 * i)?);
            let e = u64::from_le_bytes(word(4 + 2 * i)?);
            pairs.push((c, u32::try_from(e).map_err(|_| Error::Format("exponent".into()))?));
        }
        let polynomial = Polynomial::from_pairs(&pairs).map_err(|e| Error::Format(e.to_string()))?;
        let start = 3 + 2 * n_terms;
        let w = 2 * cutoff + 1;
        if bytes.len() != 8 * start + 16 * w * w {
            return Err(Error::Format(format!(
                "multiplier table of cutoff {cutoff} has the wrong length {}",
                bytes.len()
            )));
        }
        let values = bytes[8 * start..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(Self {
            l,
            cutoff,
            polynomial,
            values,
            max_error: 0.0,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Write `P` at scale `l`, tabulated over `|a|, |b| <= K`, to `path`.
pub fn tabulate_multiplier(p: &Polynomial, l: i32, cutoff: usize, path: &Path) -> Result<MultiplierTable> {
    let t = MultiplierTable::tabulate(p, l, cutoff);
    t.write(path)?;
    Ok(t)
}

/// `|m_l|` along the ray `xi = rho eta`, as CSV rows `eta,xi,re,im,abs`.
pub fn ray_csv(p: &Polynomial, l: i32, rho: f64, etas: &[f64]) -> String {
    let rows: Vec<String> = etas
        .par_iter()
        .map(|&eta| {
            let xi = rho * eta;
            let m = multiplier_quadrature(xi, eta, l, p).value;
            format!("{eta:e},{xi:e},{:e},{:e},{:e}", m.re, m.im, m.norm())
        })
        .collect();
    let mut out = String::from("eta,xi,re,im,abs\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}
