//! Fourier series on the circle, decay and Sobolev norms, Littlewood-Paley
//! projections and the Fejer-taper decomposition `mu = mu1 + mu2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bump::smooth_step;
use crate::error::{invalid, Error, Result};
use crate::grid::GridDensity;
use crate::measures::MeasureConditions;
use crate::quad::pairwise_sum;

/// Coefficients `c_k`, `-K <= k <= K`, with `c_k = int_0^1 f(x) e^{-2 pi i k x} dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    /// `coeffs` in index order `-K..=K`.
    pub fn new(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(invalid(
                "coeffs",
                format!("expected {} values, got {}", 2 * cutoff + 1, coeffs.len()),
            ));
        }
        Ok(Self { cutoff, coeffs })
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * cutoff + 1],
        }
    }

    /// Build from `f(k)` for every `|k| <= K`.
    pub fn from_fn(cutoff: usize, f: impl Fn(i64) -> Complex64) -> Self {
        let k = cutoff as i64;
        Self {
            cutoff,
            coeffs: (-k..=k).map(f).collect(),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_k`, zero outside the truncation.
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.cutoff as i64) as usize]
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.cutoff, "index out of range");
        let i = (k + self.cutoff as i64) as usize;
        self.coeffs[i] = value;
    }

    /// `(k, c_k)` in index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let k0 = self.cutoff as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - k0, c))
    }

    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        Self {
            cutoff: self.cutoff,
            coeffs: self.iter().map(|(k, c)| f(k, c)).collect(),
        }
    }

    /// Copy with a different cutoff (zero padded or truncated).
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self::from_fn(cutoff, |k| self.get(k))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..=self.cutoff as i64).all(|k| (self.get(-k) - self.get(k).conj()).norm() <= tol)
    }

    pub fn linear_combination(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let k = x.cutoff.max(y.cutoff);
        Self::from_fn(k, |n| x.get(n) * a + y.get(n) * b)
    }

    /// Real point values `sum_k c_k e^{2 pi i k j / n}` at `j = 0..n`, `n > 2K`.
    pub fn samples(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.synthesize(n)?.into_iter().map(|z| z.re).collect())
    }

    pub(crate) fn synthesize(&self, n: usize) -> Result<Vec<Complex64>> {
        if n <= 2 * self.cutoff {
            return Err(Error::BeyondNyquist {
                cutoff: self.cutoff,
                limit: n.saturating_sub(1) / 2,
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, c) in self.iter() {
            buf[k.rem_euclid(n as i64) as usize] = c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        Ok(buf)
    }

    /// Series of real point samples `f(j/n)` of a trigonometric polynomial of
    /// degree at most `K < n/2`.
    pub fn from_samples(samples: &[f64], cutoff: usize) -> Result<Self> {
        let n = samples.len();
        if n <= 2 * cutoff {
            return Err(Error::BeyondNyquist {
                cutoff,
                limit: n.saturating_sub(1) / 2,
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        Ok(Self::from_fn(cutoff, |k| {
            buf[k.rem_euclid(n as i64) as usize] * scale
        }))
    }

    /// Binary layout: `u64` cutoff, then `2K+1` pairs of `f64` (re, im),
    /// all little-endian, index order `-K..=K`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.coeffs.len());
        out.extend_from_slice(&(self.cutoff as u64).to_le_bytes());
        for c in &self.coeffs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::Format("missing cutoff header".into()));
        }
        let k = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
        let need = k
            .checked_mul(2)
            .and_then(|m| m.checked_add(1))
            .and_then(|m| m.checked_mul(16))
            .and_then(|m| m.checked_add(8));
        if need != Some(bytes.len()) {
            return Err(Error::Format(format!(
                "series with cutoff {k} has the wrong length {}",
                bytes.len()
            )));
        }
        let coeffs = bytes[8..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Self::new(k, coeffs)
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0 + u.powi(4) / 120.0
    } else {
        u.sin() / u
    }
}

/// Exact coefficients of the step function: a DFT of the cell values times
/// the transform of one cell, `h e^{-pi i k h} sinc(pi k h)`.
pub fn fourier_coeffs(mu: &GridDensity, cutoff: usize) -> Result<FourierSeries> {
    let n = mu.len();
    if 2 * cutoff > n {
        return Err(Error::BeyondNyquist {
            cutoff,
            limit: n / 2,
        });
    }
    let mut buf: Vec<Complex64> = mu.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let h = mu.cell_width();
    let mut series = FourierSeries::from_fn(cutoff, |k| {
        let x = PI * k as f64 * h;
        buf[k.rem_euclid(n as i64) as usize] * Complex64::from_polar(h * sinc(x), -x)
    });
    series.set(0, Complex64::new(mu.mass(), 0.0));
    Ok(series)
}

/// Cell averages of the (real part of the) series on the dyadic grid of
/// `2^level` cells; round-off negatives down to `-1e-9` are clipped to zero.
pub fn cell_averages(series: &FourierSeries, level: u32) -> Result<GridDensity> {
    let n = crate::grid::cell_count(2, level)?;
    let h = 1.0 / n as f64;
    let shifted = series.map(|k, c| {
        let x = PI * k as f64 * h;
        c * Complex64::from_polar(sinc(x), x)
    });
    let mut values = shifted.samples(n)?;
    for (cell, v) in values.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -1e-9 {
                return Err(Error::NegativeDensity { cell, value: *v });
            }
            *v = 0.0;
        }
    }
    GridDensity::new(level, values)
}

/// Real trigonometric polynomial with random coefficients on
/// `lo <= |k| < hi` (Hermitian), scaled to unit `L^2` norm.
pub fn random_band(lo: usize, hi: usize, cutoff: usize, seed: u64) -> FourierSeries {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut s = FourierSeries::zeros(cutoff);
    let hi = hi.min(cutoff + 1);
    for k in lo..hi {
        let amp: f64 = rng.random_range(0.5..1.0);
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        let c = Complex64::from_polar(amp, if k == 0 { 0.0 } else { phase });
        s.set(k as i64, c);
        s.set(-(k as i64), c.conj());
    }
    let norm = sobolev_norm(&s, 0.0);
    if norm > 0.0 {
        s = s.map(|_, c| c / norm);
    }
    s
}

/// `max_{1 <= |k| <= K} |c_k| |k|^{beta/2}`.
pub fn decay_constant(series: &FourierSeries, beta: f64) -> f64 {
    series
        .iter()
        .filter(|&(k, _)| k != 0)
        .map(|(k, c)| c.norm() * (k.unsigned_abs() as f64).powf(beta / 2.0))
        .fold(0.0, f64::max)
}

/// `(sum_k |c_k|^2 (1 + k^2)^s)^{1/2}`.
pub fn sobolev_norm(series: &FourierSeries, s: f64) -> f64 {
    let terms: Vec<f64> = series
        .iter()
        .map(|(k, c)| c.norm_sqr() * (1.0 + (k as f64).powi(2)).powf(s))
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// Low-pass profile: 1 on `|xi| <= 1`, 0 on `|xi| >= 3/2`.
fn lp_phi(xi: f64) -> f64 {
    smooth_step((1.5 - xi.abs()) * 2.0)
}

/// `psi_0(xi) = phi(xi/2) - phi(xi)`, supported on `1 <= |xi| <= 3`.
pub fn lp_psi0(xi: f64) -> f64 {
    lp_phi(xi / 2.0) - lp_phi(xi)
}

/// Multiplier of the `k`-th projection: `phi(xi/2)` for `k = 0`
/// (all of `psi_j`, `j <= 0`, plus the zero frequency), else `psi_0(xi / 2^k)`.
pub fn lp_multiplier(k: u32, xi: f64) -> f64 {
    if k == 0 {
        lp_phi(xi / 2.0)
    } else {
        let s = 2f64.powi(k as i32);
        lp_phi(xi / (2.0 * s)) - lp_phi(xi / s)
    }
}

pub fn lp_project(series: &FourierSeries, k: i32) -> Result<FourierSeries> {
    if k < 0 {
        return Err(invalid("k", "projection index must be nonnegative"));
    }
    let k = k as u32;
    Ok(series.map(|n, c| c * lp_multiplier(k, n as f64)))
}

/// Number of projections needed to cover `|xi| <= K`.
pub fn lp_levels(cutoff: usize) -> u32 {
    let mut k = 0;
    while 2f64.powi(k as i32) < cutoff as f64 {
        k += 1;
    }
    k + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub mu1: FourierSeries,
    pub mu2: FourierSeries,
    /// `C2^{-1} e^{1/(1-alpha)}`.
    pub n: f64,
    /// Largest value of the reconstructed `mu1` density.
    pub sup_bound: f64,
    /// Smallest value of the reconstructed `mu1` density.
    pub min_value: f64,
    /// `A 2^{6B} C1`.
    pub m: f64,
    /// True when the taper does not reach zero inside the truncation
    /// (`2N + 1 > K`); `mu1` is then a truncated Fejer mean and need not be
    /// nonnegative.
    pub truncated: bool,
    /// Number of points of the reconstruction grid.
    pub grid_points: usize,
}

impl DecompositionResult {
    pub fn sup_within_bound(&self) -> bool {
        self.sup_bound <= self.m
    }
}

/// `ln N` and `N` for the given conditions.
pub fn truncation_parameter(cond: &MeasureConditions) -> Result<f64> {
    // exp magnifies the rounding of 1/(1-alpha) by its size, so carry the
    // low part of the exponent separately.
    let d = 1.0 - cond.alpha;
    let d_lo = (1.0 - d) - cond.alpha;
    let r = 1.0 / d;
    let r_lo = ((-r).mul_add(d, 1.0) - r * d_lo) / d;
    let n = r.exp() * (1.0 + r_lo) / cond.c2;
    if n.is_finite() && n > 0.0 {
        Ok(n)
    } else {
        Err(Error::TruncationOutOfRange {
            ln_n: 1.0 / (1.0 - cond.alpha) - cond.c2.ln(),
        })
    }
}

// The spacing of the floating-point lattice at |x|.
fn ulp_unit(x: f64) -> f64 {
    let e = ((x.to_bits() >> 52) & 0x7ff) as i32;
    if e == 0 {
        f64::from_bits(1)
    } else {
        2f64.powi(e - 1075)
    }
}

// (1 - w) x rounded onto the lattice of x, so that x minus it is exact.
fn taper_component(x: f64, w: f64) -> f64 {
    if x == 0.0 || w >= 1.0 {
        return 0.0;
    }
    let q = ulp_unit(x);
    ((1.0 - w) * x / q).round() * q
}

/// Split `mu` into the Fejer mean `mu1` (multiplier `max(0, 1 - |n|/(2N+1))`)
/// and the rough part `mu2 = mu - mu1`; the two add back to `mu` exactly.
pub fn decompose(
    series: &FourierSeries,
    cond: &MeasureConditions,
    a: f64,
) -> Result<DecompositionResult> {
    cond.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("A", "must be positive"));
    }
    let n = truncation_parameter(cond)?;
    let width = 2.0 * n + 1.0;
    let mut mu1 = FourierSeries::zeros(series.cutoff());
    let mut mu2 = FourierSeries::zeros(series.cutoff());
    for (k, c) in series.iter() {
        let w = (k.unsigned_abs() as f64 / width).min(1.0);
        let c1 = Complex64::new(taper_component(c.re, w), taper_component(c.im, w));
        mu1.set(k, c1);
        mu2.set(k, c - c1);
    }
    let band = (n.ceil().min(series.cutoff() as f64)) as usize;
    let grid_points = (4 * band).max(2 * series.cutoff() + 1).max(8).next_power_of_two();
    let samples = mu1.samples(grid_points)?;
    let sup_bound = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_value = samples.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DecompositionResult {
        mu1,
        mu2,
        n,
        sup_bound,
        min_value,
        m: a * 2f64.powf(6.0 * cond.b) * cond.c1,
        truncated: width > series.cutoff() as f64,
        grid_points,
    })
}

/// `C2^{10} (1-alpha)^{-10B} N^{(1-beta-2 s0)/2}` evaluated in log form;
/// the factor driving the mixed-term bound to zero.
pub fn mixed_decay_driver(cond: &MeasureConditions, s0: f64) -> f64 {
    let ln_n = 1.0 / (1.0 - cond.alpha) - cond.c2.ln();
    let log = 10.0 * cond.c2.ln() - 10.0 * cond.b * (1.0 - cond.alpha).ln()
        + 0.5 * (1.0 - cond.beta - 2.0 * s0) * ln_n;
    log.exp()
}

/// Parallel map over frequencies, collected in index order.
pub(crate) fn par_from_fn(
    cutoff: usize,
    f: impl Fn(i64) -> Complex64 + Send + Sync,
) -> FourierSeries {
    let k = cutoff as i64;
    FourierSeries {
        cutoff,
        coeffs: (-k..=k).into_par_iter().map(f).collect(),
    }
}
