//! Piecewise-constant densities on a uniform partition of the circle.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::pairwise_sum;

/// Hard cap on the number of cells of any grid built by this crate.
pub const MAX_CELLS: usize = 1 << 26;

/// Cell averages on `[j b^{-J}, (j+1) b^{-J})`, `j < b^J`, read periodically.
///
/// The base is 2 unless stated otherwise; triadic grids represent
/// triadic Cantor measures exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    base: u32,
    level: u32,
    values: Vec<f64>,
}

pub(crate) fn cell_count(base: u32, level: u32) -> Result<usize> {
    if base < 2 {
        return Err(invalid("base", "must be at least 2"));
    }
    let mut n: usize = 1;
    for _ in 0..level {
        n = n
            .checked_mul(base as usize)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| invalid("level", format!("{base}^{level} cells exceeds {MAX_CELLS}")))?;
    }
    Ok(n)
}

impl GridDensity {
    /// Dyadic grid of `2^level` cells.
    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        Self::with_base(2, level, values)
    }

    pub fn with_base(base: u32, level: u32, values: Vec<f64>) -> Result<Self> {
        let n = cell_count(base, level)?;
        if values.len() != n {
            return Err(invalid(
                "values",
                format!("expected {n} cells, got {}", values.len()),
            ));
        }
        if let Some((cell, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeDensity { cell, value });
        }
        Ok(Self {
            base,
            level,
            values,
        })
    }

    pub fn uniform(level: u32) -> Result<Self> {
        let n = cell_count(2, level)?;
        Self::new(level, vec![1.0; n])
    }

    /// Grid from samples of `f` at cell centres, rescaled to unit mass.
    pub fn from_fn(level: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = cell_count(2, level)?;
        let h = 1.0 / n as f64;
        let mut values: Vec<f64> = (0..n).map(|j| f((j as f64 + 0.5) * h)).collect();
        let m = pairwise_sum(&values) * h;
        if !(m > 0.0) {
            return Err(invalid("f", "sampled mass must be positive"));
        }
        values.iter_mut().for_each(|v| *v /= m);
        Self::new(level, values)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// `int f`, the mean of the cell values.
    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `||f||_2^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        pairwise_sum(&sq) / self.values.len() as f64
    }

    /// Value at `x`, read periodically.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let u = x.rem_euclid(1.0) * n as f64;
        self.values[(u as usize).min(n - 1)]
    }

    /// Multiply every value by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::with_base(
            self.base,
            self.level,
            self.values.iter().map(|v| v * s).collect(),
        )
    }

    /// Exact cell-average projection onto a `base^level` grid; the overlap of
    /// every pair of cells is computed in integer units.
    pub fn project(&self, base: u32, level: u32) -> Result<Self> {
        let n2 = cell_count(base, level)?;
        let n1 = self.values.len();
        if base == self.base && level == self.level {
            return Ok(self.clone());
        }
        // Cell i of the source spans [i n2, (i+1) n2) units, cell j of the
        // target [j n1, (j+1) n1); one unit is 1 / (n1 n2).
        let (n1u, n2u) = (n1 as u128, n2 as u128);
        let values: Vec<f64> = (0..n2)
            .map(|j| {
                let lo = j as u128 * n1u;
                let hi = lo + n1u;
                let first = (lo / n2u) as usize;
                let last = ((hi - 1) / n2u) as usize;
                let mut acc = 0.0;
                for i in first..=last {
                    let a = (i as u128 * n2u).max(lo);
                    let b = ((i as u128 + 1) * n2u).min(hi);
                    acc += self.values[i] * (b - a) as f64;
                }
                acc / n1 as f64
            })
            .collect();
        Self::with_base(base, level, values)
    }

    /// 8-byte little-endian header (`level | base << 32`, so dyadic grids
    /// carry just the level) followed by the values as little-endian `f64`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.values.len());
        let base_bits = if self.base == 2 { 0 } else { self.base as u64 };
        out.extend_from_slice(&(self.level as u64 | base_bits << 32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || !(bytes.len() - 8).is_multiple_of(8) {
            return Err(Error::Format(format!(
                "grid density needs 8 + 8n bytes, got {}",
                bytes.len()
            )));
        }
        let header = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
        let level = (header & 0xffff_ffff) as u32;
        let base = match (header >> 32) as u32 {
            0 => 2,
            b => b,
        };
        let values = bytes[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Self::with_base(base, level, values).map_err(|e| Error::Format(e.to_string()))
    }
}
